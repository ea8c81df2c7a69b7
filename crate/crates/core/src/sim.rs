//! Monte Carlo plumbing: per-trial RNG streams, the parallel trial engine,
//! stopping rules, Wilson intervals and the CSV result record.
//!
//! Every trial draws from its own ChaCha8 stream selected by
//! `(seed, trial index)`, and results are combined by integer counting, so
//! counts do not depend on the number of worker threads.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

pub type TrialRng = ChaCha8Rng;

/// Trials are evaluated in batches of this size between stopping checks.
pub const BATCH: u64 = 2048;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// RNG stream for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Independent sub-seed for a named purpose (construction, a sweep, ...).
pub fn derive_seed(seed: u64, domain: u64) -> u64 {
    // splitmix64 finaliser over the pair
    let mut z = seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `trial` for every index in `range` and folds the outputs.
/// `init` builds per-worker scratch (decoders, buffers).
pub fn par_trials<S, T, A, I, F, G, R>(
    range: Range<u64>,
    seed: u64,
    init: I,
    trial: F,
    identity: fn() -> A,
    fold: G,
    reduce: R,
) -> A
where
    S: Send,
    T: Send,
    A: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut TrialRng) -> T + Sync + Send,
    G: Fn(A, T) -> A + Sync + Send,
    R: Fn(A, A) -> A + Sync + Send,
{
    range
        .into_par_iter()
        .map_init(&init, |scratch, index| {
            let mut rng = trial_rng(seed, index);
            trial(scratch, &mut rng)
        })
        .fold(identity, &fold)
        .reduce(identity, &reduce)
}

/// Result of one end-to-end frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub frame_error: bool,
    pub bit_errors: u64,
}

/// Aggregated counts at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub trials: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
}

impl Counts {
    fn add(mut self, other: Counts) -> Counts {
        self.trials += other.trials;
        self.frame_errors += other.frame_errors;
        self.bit_errors += other.bit_errors;
        self
    }
}

/// When to stop simulating one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoppingRule {
    pub max_trials: u64,
    /// Stop after the first batch that brings the frame-error count to this value.
    pub target_frame_errors: Option<u64>,
}

impl StoppingRule {
    pub fn fixed(trials: u64) -> Self {
        Self {
            max_trials: trials,
            target_frame_errors: None,
        }
    }
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            max_trials: 1_000_000,
            target_frame_errors: Some(100),
        }
    }
}

/// Runs batches of trials until the stopping rule fires. The set of trials
/// evaluated depends only on the rule and the per-batch counts, never on
/// scheduling.
pub fn run_until<S, I, F>(rule: StoppingRule, seed: u64, init: I, trial: F) -> Result<Counts>
where
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut TrialRng) -> TrialOutcome + Sync + Send,
{
    if rule.max_trials == 0 {
        return Err(Error::Parameter("trial count must be positive".into()));
    }
    let mut total = Counts::default();
    while total.trials < rule.max_trials {
        let end = (total.trials + BATCH).min(rule.max_trials);
        let batch = par_trials(
            total.trials..end,
            seed,
            &init,
            &trial,
            Counts::default,
            |acc, t: TrialOutcome| {
                acc.add(Counts {
                    trials: 1,
                    frame_errors: t.frame_error as u64,
                    bit_errors: t.bit_errors,
                })
            },
            Counts::add,
        );
        total = total.add(batch);
        if rule.target_frame_errors.is_some_and(|t| total.frame_errors >= t) {
            break;
        }
    }
    Ok(total)
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Compound,
    Separated,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Compound => "compound",
            SchemeKind::Separated => "separated",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compound" => Ok(SchemeKind::Compound),
            "separated" => Ok(SchemeKind::Separated),
            other => Err(Error::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

/// One simulated operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub scheme: SchemeKind,
    pub block_length: usize,
    pub rate: f64,
    pub ebn0_db: f64,
    pub trials: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub bler: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
}

impl SimRecord {
    pub const CSV_HEADER: &'static str =
        "scheme,N,rate,ebn0_db,trials,frame_errors,bit_errors,bler,ci_lo,ci_hi,seed";

    pub fn new(
        scheme: SchemeKind,
        block_length: usize,
        rate: f64,
        ebn0_db: f64,
        counts: Counts,
        seed: u64,
    ) -> Self {
        Self {
            scheme,
            block_length,
            rate,
            ebn0_db,
            trials: counts.trials,
            frame_errors: counts.frame_errors,
            bit_errors: counts.bit_errors,
            bler: counts.frame_errors as f64 / counts.trials.max(1) as f64,
            ci95: wilson_interval(counts.frame_errors, counts.trials, Z95),
            seed,
        }
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{:?},{:?},{},{},{},{:?},{:?},{:?},{}",
            self.scheme,
            self.block_length,
            self.rate,
            self.ebn0_db,
            self.trials,
            self.frame_errors,
            self.bit_errors,
            self.bler,
            self.ci95.0,
            self.ci95.1,
            self.seed
        )
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let fields: Vec<&str> = row.trim().split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Parse(format!("expected 11 fields, got {}", fields.len())));
        }
        fn num<T: FromStr>(s: &str, what: &str) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            s.parse().map_err(|e| Error::Parse(format!("{what}: {e}")))
        }
        Ok(Self {
            scheme: fields[0].parse()?,
            block_length: num(fields[1], "N")?,
            rate: num(fields[2], "rate")?,
            ebn0_db: num(fields[3], "ebn0_db")?,
            trials: num(fields[4], "trials")?,
            frame_errors: num(fields[5], "frame_errors")?,
            bit_errors: num(fields[6], "bit_errors")?,
            bler: num(fields[7], "bler")?,
            ci95: (num(fields[8], "ci_lo")?, num(fields[9], "ci_hi")?),
            seed: num(fields[10], "seed")?,
        })
    }
}

/// Eb/N0 at which a BLER curve crosses `target`, by linear interpolation of
/// `log10(BLER)` between the bracketing points. Points must be sorted by SNR.
pub fn crossing_db(points: &[(f64, f64)], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= target && y1 < target {
            if y1 <= 0.0 {
                return Some(x1);
            }
            let (l0, l1, lt) = (y0.log10(), y1.log10(), target.log10());
            Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1))
        } else {
            None
        }
    })
}
