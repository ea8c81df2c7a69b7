//! Bit-channel reliabilities and frozen-set design.
//!
//! Three routes to a [`ReliabilityProfile`]:
//! - [`brute_force_bit_channel`] enumerates the exact bit-channel of a short
//!   code as a [`Dmc`]; slow but definitionally correct.
//! - [`bec_z_profile`] runs the closed-form erasure recursion along the
//!   butterfly; exact for erasure channels at any length.
//! - [`mc_genie_estimate`] counts genie-aided SC decision errors per position
//!   over simulated frames; used for BICM sub-channels.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::channel::{Dmc, MAX_SYNTH_OUTPUTS};
use crate::decoder::SpecDecoder;
use crate::sim::{par_trials, TrialRng};
use crate::transform::{bit_reversal_perm, compound_transform, CompoundSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Exact Bhattacharyya parameters.
    ExactZ,
    /// Estimated bit-channel error probabilities.
    McErrorRate,
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::ExactZ => "exact_z",
            ProfileKind::McErrorRate => "mc_error_rate",
        })
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_z" => Ok(Self::ExactZ),
            "mc_error_rate" => Ok(Self::McErrorRate),
            other => Err(Error::Parse(format!("unknown profile kind {other:?}"))),
        }
    }
}

/// Per-position quality scores; lower is better.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityProfile {
    pub scores: Vec<f64>,
    pub kind: ProfileKind,
    /// Channel parameter or Eb/N0 (dB) the scores were computed at.
    pub construction_point: f64,
}

impl ReliabilityProfile {
    pub fn new(scores: Vec<f64>, kind: ProfileKind, construction_point: f64) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::Parameter("empty profile".into()));
        }
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Parameter(format!("score {s} outside [0, 1]")));
        }
        Ok(Self {
            scores,
            kind,
            construction_point,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Sub-profile over `range`, e.g. one half of a jointly simulated pair.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            scores: self.scores[range].to_vec(),
            kind: self.kind,
            construction_point: self.construction_point,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,score,kind,construction_point\n");
        for (i, s) in self.scores.iter().enumerate() {
            out.push_str(&format!("{i},{s:?},{},{:?}\n", self.kind, self.construction_point));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "index,score,kind,construction_point" => {}
            other => return Err(Error::Parse(format!("bad profile header {other:?}"))),
        }
        let mut scores = Vec::new();
        let mut kind = None;
        let mut point = None;
        for line in lines {
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("bad profile row {line:?}")));
            }
            let index: usize = f[0].parse().map_err(|e| Error::Parse(format!("index: {e}")))?;
            if index != scores.len() {
                return Err(Error::Parse(format!("index {index} out of order")));
            }
            scores.push(f[1].parse::<f64>().map_err(|e| Error::Parse(format!("score: {e}")))?);
            let k: ProfileKind = f[2].parse()?;
            let p: f64 = f[3].parse().map_err(|e| Error::Parse(format!("point: {e}")))?;
            if kind.is_some_and(|prev| prev != k) || point.is_some_and(|prev: f64| prev != p) {
                return Err(Error::Parse("mixed kinds or construction points".into()));
            }
            kind = Some(k);
            point = Some(p);
        }
        Self::new(
            scores,
            kind.ok_or_else(|| Error::Parse("empty profile".into()))?,
            point.unwrap_or_default(),
        )
    }
}

/// Exact bit-channel `i` (0-based) of `spec` over per-position channels.
///
/// Output `(y_0..y_{N-1}, u_0..u_{i-1})` has index
/// `y_index * 2^i + prefix`, where `y_index` is mixed-radix with the last
/// position fastest and the prefix is read with `u_0` as its top bit.
pub fn brute_force_bit_channel(channels: &[Dmc], spec: &CompoundSpec, i: usize) -> Result<Dmc> {
    let n = spec.block_length();
    if channels.len() != n {
        return Err(Error::Length {
            expected: n,
            actual: channels.len(),
        });
    }
    if i >= n {
        return Err(Error::Parameter(format!("bit-channel {i} of {n}")));
    }
    let too_large = Error::AlphabetTooLarge {
        size: usize::MAX,
        cap: MAX_SYNTH_OUTPUTS,
    };
    let outputs = channels
        .iter()
        .try_fold(1usize, |acc, w| acc.checked_mul(w.num_outputs()))
        .ok_or(too_large)?;
    let work = outputs.checked_shl(n as u32).filter(|w| *w >> n == outputs);
    match work {
        Some(w) if w <= MAX_SYNTH_OUTPUTS => {}
        _ => {
            return Err(Error::AlphabetTooLarge {
                size: work.unwrap_or(usize::MAX),
                cap: MAX_SYNTH_OUTPUTS,
            })
        }
    }

    let words = 1usize << n;
    let codewords = (0..words)
        .map(|idx| {
            let u: Vec<u8> = (0..n).map(|j| ((idx >> (n - 1 - j)) & 1) as u8).collect();
            compound_transform(&u, spec)
        })
        .collect::<Result<Vec<_>>>()?;

    let prefixes = 1usize << i;
    let tail = n - 1 - i;
    let scale = 0.5f64.powi(n as i32 - 1);
    let mut rows = [vec![0.0; outputs * prefixes], vec![0.0; outputs * prefixes]];
    let mut y = vec![0usize; n];
    let mut likelihood = vec![0.0; words];
    for y_index in 0..outputs {
        for (lk, x) in likelihood.iter_mut().zip(&codewords) {
            *lk = x
                .iter()
                .zip(&y)
                .zip(channels)
                .map(|((&xj, &yj), w)| w.prob(yj, xj))
                .product();
        }
        for prefix in 0..prefixes {
            for ui in 0..2usize {
                let base = ((prefix << 1) | ui) << tail;
                let total: f64 = likelihood[base..base + (1 << tail)].iter().sum();
                rows[ui][y_index * prefixes + prefix] = scale * total;
            }
        }
        for j in (0..n).rev() {
            y[j] += 1;
            if y[j] < channels[j].num_outputs() {
                break;
            }
            y[j] = 0;
        }
    }
    let [r0, r1] = rows;
    Dmc::synthesized(r0, r1)
}

/// Exact Bhattacharyya profile for erasure channels, `epsilons[j]` being the
/// erasure rate at coded position `j`.
pub fn bec_z_profile(epsilons: &[f64], spec: &CompoundSpec) -> Result<ReliabilityProfile> {
    let depth = spec.butterfly_depth().ok_or_else(|| {
        Error::Unsupported("erasure recursion needs a power-of-two Arikan kernel".into())
    })?;
    let n = spec.block_length();
    if epsilons.len() != n {
        return Err(Error::Length {
            expected: n,
            actual: epsilons.len(),
        });
    }
    if let Some(e) = epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::Parameter(format!("erasure rate {e} not in [0, 1]")));
    }
    let rev = bit_reversal_perm(1 << depth)?;
    let mut z: Vec<f64> = rev.iter().map(|&r| epsilons[r]).collect();
    let mut half = n / 2;
    while half >= 1 {
        for base in (0..n).step_by(2 * half) {
            for t in base..base + half {
                let (a, b) = (z[t], z[t + half]);
                z[t] = a + b - a * b;
                z[t + half] = a * b;
            }
        }
        half /= 2;
    }
    let mean = epsilons.iter().sum::<f64>() / n as f64;
    ReliabilityProfile::new(z, ProfileKind::ExactZ, mean)
}

/// Source of genie-aided SC trials for [`mc_genie_estimate`].
pub trait GenieSampler: Sync {
    type Scratch: Send;

    fn block_length(&self) -> usize;

    /// Channel parameter or Eb/N0 recorded in the resulting profile.
    fn construction_point(&self) -> f64;

    fn scratch(&self) -> Self::Scratch;

    /// Transmits one random frame and returns every input position whose
    /// raw SC decision was wrong while all earlier positions were corrected.
    fn sample(&self, scratch: &mut Self::Scratch, rng: &mut TrialRng) -> Vec<usize>;
}

/// Per-position genie error rates over `trials` frames.
pub fn mc_genie_estimate<S: GenieSampler>(sampler: &S, trials: u64, seed: u64) -> Result<ReliabilityProfile> {
    if trials == 0 {
        return Err(Error::Parameter("trial count must be positive".into()));
    }
    let n = sampler.block_length();
    let counts = par_trials(
        0..trials,
        seed,
        || sampler.scratch(),
        |scratch, rng| sampler.sample(scratch, rng),
        Vec::new,
        |mut acc: Vec<u64>, errors: Vec<usize>| {
            acc.resize(n, 0);
            for e in errors {
                acc[e] += 1;
            }
            acc
        },
        |mut a, b| {
            if a.is_empty() {
                return b;
            }
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );
    let mut counts = counts;
    counts.resize(n, 0);
    let scores = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    ReliabilityProfile::new(scores, ProfileKind::McErrorRate, sampler.construction_point())
}

/// Genie sampler over explicit per-position DMCs with uniformly random inputs.
#[derive(Debug, Clone)]
pub struct DmcGenieSampler {
    spec: CompoundSpec,
    channels: Vec<Dmc>,
    point: f64,
}

impl DmcGenieSampler {
    pub fn new(spec: &CompoundSpec, channels: Vec<Dmc>, point: f64) -> Result<Self> {
        if channels.len() != spec.block_length() {
            return Err(Error::Length {
                expected: spec.block_length(),
                actual: channels.len(),
            });
        }
        let all_info = spec.clone().with_frozen(&[])?;
        SpecDecoder::new(&all_info)?;
        Ok(Self {
            spec: all_info,
            channels,
            point,
        })
    }
}

impl GenieSampler for DmcGenieSampler {
    type Scratch = SpecDecoder;

    fn block_length(&self) -> usize {
        self.spec.block_length()
    }

    fn construction_point(&self) -> f64 {
        self.point
    }

    fn scratch(&self) -> SpecDecoder {
        SpecDecoder::new(&self.spec).expect("checked at construction")
    }

    fn sample(&self, decoder: &mut SpecDecoder, rng: &mut TrialRng) -> Vec<usize> {
        let u: Vec<u8> = (0..self.block_length()).map(|_| rng.random_range(0..2u8)).collect();
        let x = compound_transform(&u, &self.spec).expect("length fixed");
        let llrs: Vec<f64> = x
            .iter()
            .zip(&self.channels)
            .map(|(&xj, w)| w.llr(w.sample(xj, rng)))
            .collect();
        decoder.decode_genie(&llrs, &u).expect("length fixed").decision_errors
    }
}

/// Information set of the `k` lowest scores, ascending; ties go to the smaller index.
pub fn select_information_set(profile: &ReliabilityProfile, k: usize) -> Result<Vec<usize>> {
    let n = profile.len();
    if k > n {
        return Err(Error::Parameter(format!("k = {k} exceeds block length {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| profile.scores[a].total_cmp(&profile.scores[b]).then(a.cmp(&b)));
    let mut info = order[..k].to_vec();
    info.sort_unstable();
    Ok(info)
}

/// Complement of an information set.
pub fn frozen_complement(block_length: usize, info: &[usize]) -> Vec<usize> {
    let mut is_info = vec![false; block_length];
    for &i in info {
        is_info[i] = true;
    }
    (0..block_length).filter(|&i| !is_info[i]).collect()
}

/// `{ i : Z_i < 2^(-N^beta) / N }`.
pub fn threshold_good_set(profile: &ReliabilityProfile, beta: f64) -> Result<Vec<usize>> {
    if profile.kind != ProfileKind::ExactZ {
        return Err(Error::Parameter("threshold needs an exact Z profile".into()));
    }
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::Parameter(format!("beta {beta} not in (0, 1/2)")));
    }
    let n = profile.len() as f64;
    let threshold = (-(n.powf(beta))).exp2() / n;
    Ok((0..profile.len())
        .filter(|&i| profile.scores[i] < threshold)
        .collect())
}

/// Sum of scores over the information set; for an exact Z profile this is
/// the SC block error bound.
pub fn union_bound(profile: &ReliabilityProfile, info: &[usize]) -> f64 {
    info.iter().map(|&i| profile.scores[i]).sum()
}

/// Splits `total_k` information bits between two equal-length sub-codes so
/// that the summed scores of the chosen positions are minimal. Ties favour
/// more bits on the first sub-code.
pub fn allocate_separated_rates(
    first: &ReliabilityProfile,
    second: &ReliabilityProfile,
    total_k: usize,
) -> Result<(usize, usize)> {
    let (n1, n2) = (first.len(), second.len());
    if total_k > n1 + n2 {
        return Err(Error::Parameter(format!(
            "{total_k} information bits do not fit in {} positions",
            n1 + n2
        )));
    }
    let prefix = |p: &ReliabilityProfile| {
        let mut s = p.scores.clone();
        s.sort_by(f64::total_cmp);
        let mut acc = vec![0.0; s.len() + 1];
        for (i, v) in s.iter().enumerate() {
            acc[i + 1] = acc[i] + v;
        }
        acc
    };
    let (c1, c2) = (prefix(first), prefix(second));
    let lo = total_k.saturating_sub(n2);
    let hi = total_k.min(n1);
    let mut best = (lo, f64::INFINITY);
    for k1 in lo..=hi {
        let cost = c1[k1] + c2[total_k - k1];
        if cost <= best.1 {
            best = (k1, cost);
        }
    }
    Ok((best.0, total_k - best.0))
}
