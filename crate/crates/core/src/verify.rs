//! Oracle suite behind `cpolar verify`.
//!
//! Each check compares a fast code path against an independent exact
//! computation (brute-force enumeration, closed forms or matrix products)
//! and reports a pass/fail line. The `full` level adds the 16-QAM
//! reproduction at N = 1024, which takes minutes.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::bicm::{
    construct_compound, construct_separated, CompoundScheme, LinkConfig, SeparatedScheme,
    CONSTRUCTION_EBN0_DB, CONSTRUCTION_TRIALS,
};
use crate::channel::{box_star, circle_star, Dmc};
use crate::decoder::{CheckNode, SpecDecoder};
use crate::reliability::{bec_z_profile, brute_force_bit_channel, select_information_set};
use crate::sim::{derive_seed, par_trials, trial_rng, StoppingRule, TrialRng};
use crate::transform::{compound_transform, polar_encode, CompoundSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(Error::Parse(format!("unknown level {other:?}"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Fast => "fast",
            Level::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub level: Level,
    pub seed: u64,
    /// Check-node rule for the decoding checks; replace it to confirm the
    /// suite catches a broken decoder.
    pub check_node: CheckNode,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            level: Level::Fast,
            seed: 1,
            check_node: CheckNode::Exact,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<22} {} ({:.2}s)\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail,
                c.seconds
            ));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        out
    }
}

/// Runs every check of the requested level.
pub fn run(options: &VerifyOptions) -> VerifyReport {
    type Check = fn(&VerifyOptions) -> Result<(bool, String)>;
    let mut checks: Vec<(&str, Check)> = vec![
        ("sum-capacity", check_sum_capacity),
        ("decomposition", check_decomposition),
        ("z-i-bounds", check_z_i_bounds),
        ("circle-star-z", check_circle_star_z),
        ("conservation", check_conservation),
        ("bec-recursion", check_bec_recursion),
        ("self-inverse", check_self_inverse),
        ("sc-union-bound", check_sc_union_bound),
        ("genie-partition", check_genie_partition),
        ("polarization-trend", check_polarization_trend),
    ];
    if options.level == Level::Full {
        checks.push(("paper-point", check_paper_point));
    }
    let checks = checks
        .into_iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check(options) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                name: name.to_string(),
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    VerifyReport {
        level: options.level,
        seed: options.seed,
        checks,
    }
}

/// Random symmetric channel: mirrored column pairs plus an optional erasure
/// column, with at most `2 * pairs + 1` outputs.
pub fn random_symmetric_channel<R: Rng + ?Sized>(rng: &mut R, pairs: usize) -> Dmc {
    let pairs = rng.random_range(1..=pairs.max(1));
    let erasure = if rng.random_bool(0.5) { rng.random_range(0.0..0.5) } else { 0.0 };
    let weights: Vec<f64> = (0..pairs).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut row0 = Vec::new();
    let mut row1 = Vec::new();
    for w in weights {
        let mass = (1.0 - erasure) * w / total;
        let t: f64 = rng.random_range(0.0..=1.0);
        row0.extend([mass * t, mass * (1.0 - t)]);
        row1.extend([mass * (1.0 - t), mass * t]);
    }
    if erasure > 0.0 {
        row0.push(erasure);
        row1.push(erasure);
    }
    Dmc::new(row0, row1).expect("rows sum to one")
}

/// Random binary-input channel with `outputs` outputs, not necessarily symmetric.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, outputs: usize) -> Dmc {
    let mut row = || {
        let v: Vec<f64> = (0..outputs).map(|_| rng.random_range(0.0..1.0f64).powi(2)).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect::<Vec<_>>()
    };
    let (r0, r1) = (row(), row());
    Dmc::new(r0, r1).expect("normalised rows")
}

fn check_sum_capacity(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut rng = trial_rng(derive_seed(o.seed, 1), 0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let w1 = random_symmetric_channel(&mut rng, 3);
        let w2 = random_symmetric_channel(&mut rng, 3);
        let lhs = box_star(&w1, &w2)?.symmetric_capacity() + circle_star(&w1, &w2)?.symmetric_capacity();
        let rhs = w1.symmetric_capacity() + w2.symmetric_capacity();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok((worst <= 1e-10, format!("50 pairs, max deviation {worst:.2e}")))
}

/// Bit-channels of the length-`n` compound code of `(w1, w2)` against the
/// length-`n/2` single-channel bit-channels of the two combined channels.
pub fn decomposition_deviation(w1: &Dmc, w2: &Dmc, depth: u32) -> Result<f64> {
    let spec = CompoundSpec::power_of_two(1, depth)?;
    let n = spec.block_length();
    let channels = spec.per_position(&[w1.clone(), w2.clone()])?;
    let half = CompoundSpec::polar(depth);
    let minus = vec![box_star(w1, w2)?; n / 2];
    let plus = vec![circle_star(w1, w2)?; n / 2];
    let mut worst = 0.0f64;
    for i in 0..n {
        let full = brute_force_bit_channel(&channels, &spec, i)?.stats();
        let reduced = if i < n / 2 {
            brute_force_bit_channel(&minus, &half, i)?
        } else {
            brute_force_bit_channel(&plus, &half, i - n / 2)?
        }
        .stats();
        worst = worst
            .max((full.z - reduced.z).abs())
            .max((full.capacity - reduced.capacity).abs());
    }
    Ok(worst)
}

fn check_decomposition(_: &VerifyOptions) -> Result<(bool, String)> {
    let pairs = [(Dmc::bec(0.3)?, Dmc::bsc(0.1)?), (Dmc::bec(0.5)?, Dmc::bsc(0.2)?)];
    let mut worst = 0.0f64;
    for (w1, w2) in &pairs {
        for depth in [1, 2] {
            worst = worst.max(decomposition_deviation(w1, w2, depth)?);
        }
    }
    Ok((worst <= 1e-10, format!("N in {{4, 8}}, max deviation {worst:.2e}")))
}

fn check_z_i_bounds(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut rng = trial_rng(derive_seed(o.seed, 2), 0);
    let mut violations = 0;
    for t in 0..100 {
        let w = random_channel(&mut rng, 2 + t % 6);
        if !w.stats().satisfies_z_capacity_bounds(1e-9) {
            violations += 1;
        }
    }
    Ok((violations == 0, format!("100 channels, {violations} violations")))
}

fn check_circle_star_z(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut rng = trial_rng(derive_seed(o.seed, 3), 0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let w1 = random_symmetric_channel(&mut rng, 3);
        let w2 = random_symmetric_channel(&mut rng, 3);
        let z = circle_star(&w1, &w2)?.bhattacharyya();
        worst = worst.max((z - w1.bhattacharyya() * w2.bhattacharyya()).abs());
    }
    Ok((worst <= 1e-12, format!("50 pairs, max deviation {worst:.2e}")))
}

/// `|Σ_i I(bit-channel i) - (N/l) Σ_c I(W_c)|` for a compound code.
pub fn conservation_deviation(per_channel: &[Dmc], spec: &CompoundSpec) -> Result<f64> {
    let channels = spec.per_position(per_channel)?;
    let mut total = 0.0;
    for i in 0..spec.block_length() {
        total += brute_force_bit_channel(&channels, spec, i)?.symmetric_capacity();
    }
    let expected = spec.channel_length() as f64
        * per_channel.iter().map(Dmc::symmetric_capacity).sum::<f64>();
    Ok((total - expected).abs())
}

fn check_conservation(_: &VerifyOptions) -> Result<(bool, String)> {
    let (w1, w2) = (Dmc::bec(0.3)?, Dmc::bsc(0.1)?);
    let mut worst = 0.0f64;
    for depth in 0..=2 {
        let spec = CompoundSpec::power_of_two(1, depth)?;
        worst = worst.max(conservation_deviation(&[w1.clone(), w2.clone()], &spec)?);
    }
    for depth in 1..=3 {
        worst = worst.max(conservation_deviation(std::slice::from_ref(&w2), &CompoundSpec::polar(depth))?);
    }
    Ok((worst <= 1e-10, format!("N <= 8, max deviation {worst:.2e}")))
}

/// Largest `|bec_z_profile - Z(brute force)|` over all bit-channels.
pub fn bec_recursion_deviation(epsilons: &[f64], spec: &CompoundSpec) -> Result<f64> {
    let bec: Vec<Dmc> = epsilons.iter().map(|&e| Dmc::bec(e)).collect::<Result<_>>()?;
    let channels = spec.per_position(&bec)?;
    let eps = spec.per_position(epsilons)?;
    let profile = bec_z_profile(&eps, spec)?;
    let mut worst = 0.0f64;
    for (i, z) in profile.scores.iter().enumerate() {
        let exact = brute_force_bit_channel(&channels, spec, i)?.bhattacharyya();
        worst = worst.max((z - exact).abs());
    }
    Ok(worst)
}

fn check_bec_recursion(_: &VerifyOptions) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for depth in 1..=3 {
        worst = worst.max(bec_recursion_deviation(&[0.4], &CompoundSpec::polar(depth))?);
    }
    for depth in 0..=2 {
        let spec = CompoundSpec::power_of_two(1, depth)?;
        worst = worst.max(bec_recursion_deviation(&[0.2, 0.45], &spec)?);
    }
    Ok((worst <= 1e-12, format!("N in {{2, 4, 8}}, max deviation {worst:.2e}")))
}

fn check_self_inverse(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut rng = trial_rng(derive_seed(o.seed, 4), 0);
    let mut failures = 0;
    for n in 0..=10u32 {
        for _ in 0..20 {
            let u: Vec<u8> = (0..1usize << n).map(|_| rng.random_range(0..2u8)).collect();
            if polar_encode(&polar_encode(&u, n)?, n)? != u {
                failures += 1;
            }
        }
    }
    Ok((failures == 0, format!("n <= 10, {failures} failures")))
}

/// BEC(0.5), N = 128 code whose information set has the largest size with
/// `Σ Z <= target`. Returns the spec and the union bound.
pub fn bec_bound_code(epsilon: f64, depth: u32, target: f64) -> Result<(CompoundSpec, f64)> {
    let spec = CompoundSpec::polar(depth);
    let profile = bec_z_profile(&vec![epsilon; spec.block_length()], &spec)?;
    let order = select_information_set(&profile, spec.block_length())?;
    let mut ranked = order;
    ranked.sort_by(|&a, &b| profile.scores[a].total_cmp(&profile.scores[b]).then(a.cmp(&b)));
    let mut bound = 0.0;
    let mut k = 0;
    while k < ranked.len() && bound + profile.scores[ranked[k]] <= target {
        bound += profile.scores[ranked[k]];
        k += 1;
    }
    Ok((spec.with_information_set(&ranked[..k])?, bound))
}

/// Transmits a random message over a BEC and returns `(message, u, llrs)`.
pub fn bec_frame(spec: &CompoundSpec, w: &Dmc, rng: &mut TrialRng) -> (Vec<u8>, Vec<u8>, Vec<f64>) {
    let message: Vec<u8> = (0..spec.dimension()).map(|_| rng.random_range(0..2u8)).collect();
    let u = spec.embed(&message).expect("dimension fixed");
    let x = compound_transform(&u, spec).expect("length fixed");
    let llrs = x.iter().map(|&b| w.llr(w.sample(b, rng))).collect();
    (message, u, llrs)
}

fn check_sc_union_bound(o: &VerifyOptions) -> Result<(bool, String)> {
    let trials = 100_000u64;
    let (spec, bound) = bec_bound_code(0.5, 7, 1e-2)?;
    let w = Dmc::bec(0.5)?;
    let rule = o.check_node;
    let errors = par_trials(
        0..trials,
        derive_seed(o.seed, 5),
        || SpecDecoder::new(&spec).expect("polar spec").with_check_node(rule),
        |dec, rng| {
            let (message, _, llrs) = bec_frame(&spec, &w, rng);
            (dec.decode(&llrs).expect("length fixed").info_bits != message) as u64
        },
        || 0u64,
        |a, b| a + b,
        |a, b| a + b,
    );
    let fer = errors as f64 / trials as f64;
    let limit = bound + 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
    Ok((
        fer <= limit,
        format!(
            "k = {}, FER {fer:.2e} vs bound {bound:.2e} (+3 SE = {limit:.2e})",
            spec.dimension()
        ),
    ))
}

fn check_genie_partition(o: &VerifyOptions) -> Result<(bool, String)> {
    let trials = 20_000u64;
    let (spec, _) = bec_bound_code(0.5, 6, 0.2)?;
    let w = Dmc::bec(0.5)?;
    let rule = o.check_node;
    let info = spec.information_set();
    let (sc, genie) = par_trials(
        0..trials,
        derive_seed(o.seed, 6),
        || SpecDecoder::new(&spec).expect("polar spec").with_check_node(rule),
        |dec, rng| {
            let (message, u, llrs) = bec_frame(&spec, &w, rng);
            let sc = dec.decode(&llrs).expect("length fixed").info_bits != message;
            let first = dec.decode_genie(&llrs, &u).expect("length fixed").first_error;
            (sc, first.is_some_and(|i| info.binary_search(&i).is_ok()))
        },
        || (0u64, 0u64),
        |acc, (a, b)| (acc.0 + a as u64, acc.1 + b as u64),
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    Ok((
        sc == genie,
        format!("{trials} frames: {sc} SC errors, {genie} genie first errors in the information set"),
    ))
}

/// Fraction of BEC(ε) bit-channels with `Z < threshold` at each depth.
pub fn good_fraction(epsilon: f64, depth: u32, threshold: f64) -> Result<f64> {
    let spec = CompoundSpec::polar(depth);
    let p = bec_z_profile(&vec![epsilon; spec.block_length()], &spec)?;
    Ok(p.scores.iter().filter(|z| **z < threshold).count() as f64 / p.len() as f64)
}

fn check_polarization_trend(_: &VerifyOptions) -> Result<(bool, String)> {
    let fractions = (10..=20)
        .map(|n| good_fraction(0.5, n, 1e-9))
        .collect::<Result<Vec<_>>>()?;
    let monotone = fractions.windows(2).all(|w| w[1] >= w[0]);
    let last = fractions[fractions.len() - 1];
    Ok((
        monotone && last > 0.40,
        format!("fraction {:.4} at n = 10, {last:.4} at n = 20, monotone: {monotone}", fractions[0]),
    ))
}

fn check_paper_point(o: &VerifyOptions) -> Result<(bool, String)> {
    let trials = 100_000;
    let (_, spec) = construct_compound(1024, 0.5, CONSTRUCTION_EBN0_DB, CONSTRUCTION_TRIALS, derive_seed(o.seed, 7))?;
    let design = construct_separated(1024, 0.5, CONSTRUCTION_EBN0_DB, CONSTRUCTION_TRIALS, derive_seed(o.seed, 8))?;
    let sim_seed = derive_seed(o.seed, 9);
    let compound = |db: f64| -> Result<f64> {
        let s = CompoundScheme::new(spec.clone(), LinkConfig::new(db, 0.5)?)?;
        let c = s.simulate(StoppingRule::fixed(trials), sim_seed)?;
        Ok(c.frame_errors as f64 / c.trials as f64)
    };
    let (c5, c4) = (compound(5.0)?, compound(4.0)?);
    let sep = SeparatedScheme::new(design.first.clone(), design.second.clone(), LinkConfig::new(5.0, 0.5)?)?;
    let counts = sep.simulate(StoppingRule::fixed(trials), sim_seed)?;
    let s5 = counts.frame_errors as f64 / counts.trials as f64;
    let within = |v: f64, target: f64, factor: f64| v >= target / factor && v <= target * factor;
    let (r1, r2) = design.rates();
    let passed = within(c5, 0.0032, 3.0)
        && within(c4, 0.1107, 2.0)
        && within(s5, 0.0611, 3.0)
        && (r1 - 0.62).abs() <= 0.03
        && (r2 - 0.38).abs() <= 0.03;
    Ok((
        passed,
        format!(
            "compound {c5:.2e} @5dB, {c4:.3} @4dB; separated {s5:.3} @5dB; rates ({r1:.3}, {r2:.3})"
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_channels_are_valid() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..100 {
            let w = random_symmetric_channel(&mut rng, 3);
            assert!(w.is_symmetric());
            assert!(w.num_outputs() <= 7);
            let v = random_channel(&mut rng, 4);
            assert_eq!(v.num_outputs(), 4);
        }
    }

    #[test]
    fn bound_code_respects_target() {
        let (spec, bound) = bec_bound_code(0.5, 7, 1e-2).unwrap();
        assert!(bound <= 1e-2 && bound > 5e-3, "{bound}");
        assert!(spec.dimension() > 0);
    }

    #[test]
    fn fast_suite_passes() {
        let report = run(&VerifyOptions::default());
        assert!(report.passed(), "{}", report.to_text());
        assert!(report.checks.iter().all(|c| c.name != "paper-point"));
    }

    #[test]
    fn negated_check_node_is_caught() {
        let options = VerifyOptions {
            check_node: CheckNode::Custom(|a, b| -crate::decoder::check_node(a, b)),
            ..VerifyOptions::default()
        };
        let report = run(&options);
        let bound = report.checks.iter().find(|c| c.name == "sc-union-bound").unwrap();
        assert!(!bound.passed, "{}", bound.detail);
        assert!(!report.passed());
    }
}
