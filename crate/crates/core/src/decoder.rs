//! Successive cancellation decoding in the LLR domain.
//!
//! LLRs are `ln(W(y|0) / W(y|1))`, indexed by coded position. [`ScDecoder`]
//! handles every spec that reduces to one butterfly (plain polar codes and
//! power-of-two compounds with the Arikan kernel). [`GeneralScDecoder`]
//! handles any valid kernel up to 8×8 by exhaustively marginalising the
//! kernel once per block and running an ordinary SC decoder per lane.

use crate::transform::{bit_reversal_perm, polar_encode, CompoundSpec, MAX_KERNEL};
use crate::{Error, Result};

/// Check-node rule used for the upper (`f`) branch of the butterfly.
#[derive(Debug, Clone, Copy, Default)]
pub enum CheckNode {
    /// `2 atanh(tanh(a/2) tanh(b/2))`, evaluated in a stable log form.
    #[default]
    Exact,
    /// `sign(a) sign(b) min(|a|, |b|)`.
    MinSum,
    /// Caller-supplied rule, used by mutation tests of the oracle suite.
    Custom(fn(f64, f64) -> f64),
}

impl CheckNode {
    #[inline]
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            CheckNode::Exact => check_node(a, b),
            CheckNode::MinSum => check_node_min_sum(a, b),
            CheckNode::Custom(f) => f(a, b),
        }
    }
}

/// Exact check-node update.
#[inline]
pub fn check_node(a: f64, b: f64) -> f64 {
    let (small, big) = if a.abs() <= b.abs() { (a.abs(), b.abs()) } else { (b.abs(), a.abs()) };
    let negative = (a < 0.0) != (b < 0.0);
    let magnitude = if big.is_infinite() {
        small
    } else {
        // |a + b| and |a - b| are big + small and big - small in some order:
        // ln1p(e^-(big+small)) - ln1p(e^-(big-small)) = ln1p((p - q) / (1 + q)).
        let q = (small - big).exp();
        let p = q * (-2.0 * small).exp();
        small + ((p - q) / (1.0 + q)).ln_1p()
    };
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

#[inline]
pub fn check_node_min_sum(a: f64, b: f64) -> f64 {
    let magnitude = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -magnitude
    } else {
        magnitude
    }
}

/// Variable-node update `b + (1 - 2u) a`, with `∞ - ∞` taken as 0.
#[inline]
pub fn variable_node(a: f64, b: f64, u: u8) -> f64 {
    let v = if u == 0 { b + a } else { b - a };
    if v.is_nan() {
        0.0
    } else {
        v
    }
}

/// Output of one SC pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    /// Decisions for every input position, frozen ones included (always 0).
    pub u_hat: Vec<u8>,
    /// Decisions on the information set, in increasing index order.
    pub info_bits: Vec<u8>,
    /// Genie mode: first position whose raw decision was wrong.
    pub first_error: Option<usize>,
    /// Genie mode: every position whose raw decision was wrong.
    pub decision_errors: Vec<usize>,
}

fn check_llrs(llrs: &[f64], expected: usize) -> Result<()> {
    if llrs.len() != expected {
        return Err(Error::Length {
            expected,
            actual: llrs.len(),
        });
    }
    if let Some(i) = llrs.iter().position(|l| l.is_nan()) {
        return Err(Error::InvalidInput(format!("LLR {i} is NaN")));
    }
    Ok(())
}

/// Reusable single-butterfly SC decoder. Owns its scratch, so one instance
/// per worker.
#[derive(Debug, Clone)]
pub struct ScDecoder {
    depth: u32,
    frozen: Vec<bool>,
    rev: Vec<usize>,
    rule: CheckNode,
    // Level s occupies [2^s, 2^(s+1)) in each plane; level `depth` holds the
    // channel LLRs in natural butterfly order.
    llr: Vec<f64>,
    left: Vec<u8>,
    right: Vec<u8>,
}

impl ScDecoder {
    /// Decoder for a spec that reduces to one butterfly.
    pub fn new(spec: &CompoundSpec) -> Result<Self> {
        let depth = spec.butterfly_depth().ok_or_else(|| {
            Error::Unsupported(format!(
                "kernel {} has no single-butterfly decoder; use GeneralScDecoder",
                spec.kernel()
            ))
        })?;
        Ok(Self::with_frozen(depth, spec.frozen_mask().to_vec()))
    }

    fn with_frozen(depth: u32, frozen: Vec<bool>) -> Self {
        let size = 1usize << depth;
        Self {
            depth,
            frozen,
            rev: bit_reversal_perm(size).expect("power of two"),
            rule: CheckNode::Exact,
            llr: vec![0.0; 2 * size],
            left: vec![0; 2 * size],
            right: vec![0; 2 * size],
        }
    }

    pub fn with_check_node(mut self, rule: CheckNode) -> Self {
        self.rule = rule;
        self
    }

    pub fn block_length(&self) -> usize {
        1 << self.depth
    }

    pub fn decode(&mut self, llrs: &[f64]) -> Result<DecodeResult> {
        check_llrs(llrs, self.block_length())?;
        let mut u_hat = vec![0u8; self.block_length()];
        let mut errors = Vec::new();
        self.run(llrs, None, &mut u_hat, &mut errors);
        Ok(self.result(u_hat, errors, false))
    }

    /// SC with every decision replaced by the truth after it is recorded.
    pub fn decode_genie(&mut self, llrs: &[f64], truth: &[u8]) -> Result<DecodeResult> {
        check_llrs(llrs, self.block_length())?;
        if truth.len() != self.block_length() {
            return Err(Error::Length {
                expected: self.block_length(),
                actual: truth.len(),
            });
        }
        let mut u_hat = vec![0u8; self.block_length()];
        let mut errors = Vec::new();
        self.run(llrs, Some(truth), &mut u_hat, &mut errors);
        Ok(self.result(u_hat, errors, true))
    }

    fn result(&self, u_hat: Vec<u8>, errors: Vec<usize>, genie: bool) -> DecodeResult {
        let info_bits = u_hat
            .iter()
            .zip(&self.frozen)
            .filter(|(_, f)| !**f)
            .map(|(b, _)| *b)
            .collect();
        DecodeResult {
            u_hat,
            info_bits,
            first_error: if genie { errors.first().copied() } else { None },
            decision_errors: errors,
        }
    }

    /// Core SC pass. `u_hat` receives raw decisions (frozen = 0); with a
    /// genie, the truth is fed back into the partial sums and mismatching
    /// positions are pushed to `errors`.
    fn run(&mut self, llrs: &[f64], truth: Option<&[u8]>, u_hat: &mut [u8], errors: &mut Vec<usize>) {
        let depth = self.depth as usize;
        let size = 1usize << depth;
        for (q, &r) in self.rev.iter().enumerate() {
            self.llr[size + q] = llrs[r];
        }
        for i in 0..size {
            let top = if i == 0 {
                depth
            } else {
                let p = i.trailing_zeros() as usize;
                self.upper_right(p);
                p
            };
            for s in (0..top).rev() {
                self.upper_left(s);
            }

            let decision = if self.frozen[i] || self.llr[1] >= 0.0 { 0 } else { 1 };
            u_hat[i] = decision;
            let fed_back = match truth {
                Some(t) => {
                    if t[i] != decision {
                        errors.push(i);
                    }
                    t[i]
                }
                None => decision,
            };
            self.propagate(i, fed_back);
        }
    }

    /// Left child at level `s` from the parent at level `s + 1`.
    #[inline]
    fn upper_left(&mut self, s: usize) {
        let h = 1usize << s;
        let (lower, upper) = self.llr.split_at_mut(2 * h);
        let child = &mut lower[h..2 * h];
        let (a, b) = upper[..2 * h].split_at(h);
        match self.rule {
            CheckNode::Exact => {
                for t in 0..h {
                    child[t] = check_node(a[t], b[t]);
                }
            }
            rule => {
                for t in 0..h {
                    child[t] = rule.apply(a[t], b[t]);
                }
            }
        }
    }

    /// Right child at level `s`, using the finished left sibling's codeword.
    #[inline]
    fn upper_right(&mut self, s: usize) {
        let h = 1usize << s;
        let (lower, upper) = self.llr.split_at_mut(2 * h);
        let child = &mut lower[h..2 * h];
        let (a, b) = upper[..2 * h].split_at(h);
        let sibling = &self.left[h..2 * h];
        for t in 0..h {
            child[t] = variable_node(a[t], b[t], sibling[t]);
        }
    }

    /// Folds the decided bit `i` into the partial-sum planes.
    fn propagate(&mut self, i: usize, bit: u8) {
        let depth = self.depth as usize;
        self.right[1] = bit;
        let mut s = 0;
        while s < depth && (i >> s) & 1 == 1 {
            let h = 1usize << s;
            for t in 0..h {
                let r = self.right[h + t];
                self.right[2 * h + t] = self.left[h + t] ^ r;
                self.right[2 * h + h + t] = r;
            }
            s += 1;
        }
        if s < depth {
            let h = 1usize << s;
            let (left, right) = (&mut self.left[h..2 * h], &self.right[h..2 * h]);
            left.copy_from_slice(right);
        }
    }
}

/// SC decoding of a single-butterfly spec.
pub fn sc_decode(llrs: &[f64], spec: &CompoundSpec) -> Result<DecodeResult> {
    ScDecoder::new(spec)?.decode(llrs)
}

/// Genie-aided SC decoding of a single-butterfly spec.
pub fn genie_decode(llrs: &[f64], spec: &CompoundSpec, truth: &[u8]) -> Result<DecodeResult> {
    ScDecoder::new(spec)?.decode_genie(llrs, truth)
}

/// SC decoder for an arbitrary valid kernel with `l <= 8`.
///
/// Lane `c` carries `polar_encode(chunk_c)`. Its per-block LLR is obtained by
/// summing the kernel likelihood over all `2^(l-c-1)` continuations of the
/// later lanes, with the earlier lanes fixed to their re-encoded decisions.
#[derive(Debug, Clone)]
pub struct GeneralScDecoder {
    l: usize,
    lane_len: usize,
    masks: Vec<u8>,
    frozen: Vec<bool>,
    lanes: Vec<ScDecoder>,
    depth: u32,
    log_w: Vec<[f64; 2]>,
    lane_llr: Vec<f64>,
    known: Vec<u8>,
}

impl GeneralScDecoder {
    pub fn new(spec: &CompoundSpec) -> Result<Self> {
        let l = spec.num_channels();
        if l > MAX_KERNEL {
            return Err(Error::Unsupported(format!("kernel size {l} exceeds {MAX_KERNEL}")));
        }
        let m = spec.channel_length();
        let lanes = (0..l)
            .map(|c| ScDecoder::with_frozen(spec.depth(), spec.frozen_mask()[c * m..(c + 1) * m].to_vec()))
            .collect();
        Ok(Self {
            l,
            lane_len: m,
            masks: spec.kernel().row_masks(),
            frozen: spec.frozen_mask().to_vec(),
            lanes,
            depth: spec.depth(),
            log_w: vec![[0.0; 2]; spec.block_length()],
            lane_llr: vec![0.0; m],
            known: vec![0; spec.block_length()],
        })
    }

    pub fn with_check_node(mut self, rule: CheckNode) -> Self {
        self.lanes = self.lanes.into_iter().map(|d| d.with_check_node(rule)).collect();
        self
    }

    pub fn kernel_size(&self) -> usize {
        self.l
    }

    pub fn decode(&mut self, llrs: &[f64]) -> Result<DecodeResult> {
        self.run(llrs, None)
    }

    pub fn decode_genie(&mut self, llrs: &[f64], truth: &[u8]) -> Result<DecodeResult> {
        if truth.len() != self.frozen.len() {
            return Err(Error::Length {
                expected: self.frozen.len(),
                actual: truth.len(),
            });
        }
        self.run(llrs, Some(truth))
    }

    fn run(&mut self, llrs: &[f64], truth: Option<&[u8]>) -> Result<DecodeResult> {
        check_llrs(llrs, self.frozen.len())?;
        let (l, m) = (self.l, self.lane_len);
        for (lw, &llr) in self.log_w.iter_mut().zip(llrs) {
            // Normalised so W(y|0) + W(y|1) = 1; the scale cancels per block.
            *lw = [-softplus(-llr), -softplus(llr)];
        }
        let mut u_hat = vec![0u8; l * m];
        let mut errors = Vec::new();
        for c in 0..l {
            let free = l - c - 1;
            for k in 0..m {
                let fixed = (0..c)
                    .filter(|&r| self.known[k * l + r] == 1)
                    .fold(0u8, |acc, r| acc ^ self.masks[r]);
                let block = &self.log_w[k * l..(k + 1) * l];
                let mut best = [f64::NEG_INFINITY; 2];
                let mut terms = [Vec::with_capacity(1 << free), Vec::with_capacity(1 << free)];
                for bit in 0..2u8 {
                    let base = if bit == 1 { fixed ^ self.masks[c] } else { fixed };
                    for cont in 0..(1usize << free) {
                        let x = (0..free)
                            .filter(|t| (cont >> t) & 1 == 1)
                            .fold(base, |acc, t| acc ^ self.masks[c + 1 + t]);
                        let ll: f64 = (0..l).map(|j| block[j][((x >> j) & 1) as usize]).sum();
                        best[bit as usize] = best[bit as usize].max(ll);
                        terms[bit as usize].push(ll);
                    }
                }
                let lse = |v: &[f64], mx: f64| {
                    if mx == f64::NEG_INFINITY {
                        mx
                    } else {
                        mx + v.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
                    }
                };
                let l0 = lse(&terms[0], best[0]);
                let l1 = lse(&terms[1], best[1]);
                self.lane_llr[k] = variable_node(-l1, l0, 0);
            }

            let lane = &mut self.lanes[c];
            let mut lane_hat = vec![0u8; m];
            let mut lane_errors = Vec::new();
            let chunk_truth = truth.map(|t| &t[c * m..(c + 1) * m]);
            lane.run(&self.lane_llr, chunk_truth, &mut lane_hat, &mut lane_errors);
            errors.extend(lane_errors.into_iter().map(|e| c * m + e));
            u_hat[c * m..(c + 1) * m].copy_from_slice(&lane_hat);

            let settled = chunk_truth.unwrap_or(&lane_hat);
            let encoded = polar_encode(settled, self.depth)?;
            for (k, b) in encoded.into_iter().enumerate() {
                self.known[k * l + c] = b;
            }
        }
        let info_bits = u_hat
            .iter()
            .zip(&self.frozen)
            .filter(|(_, f)| !**f)
            .map(|(b, _)| *b)
            .collect();
        Ok(DecodeResult {
            u_hat,
            info_bits,
            first_error: if truth.is_some() { errors.first().copied() } else { None },
            decision_errors: errors,
        })
    }
}

/// SC decoding for any valid kernel up to 8×8.
pub fn sc_decode_general_l(llrs: &[f64], spec: &CompoundSpec) -> Result<DecodeResult> {
    GeneralScDecoder::new(spec)?.decode(llrs)
}

/// Picks the butterfly decoder when the spec allows it, the general one otherwise.
#[derive(Debug, Clone)]
pub enum SpecDecoder {
    Butterfly(ScDecoder),
    General(GeneralScDecoder),
}

impl SpecDecoder {
    pub fn new(spec: &CompoundSpec) -> Result<Self> {
        if spec.butterfly_depth().is_some() {
            ScDecoder::new(spec).map(Self::Butterfly)
        } else {
            GeneralScDecoder::new(spec).map(Self::General)
        }
    }

    pub fn with_check_node(self, rule: CheckNode) -> Self {
        match self {
            Self::Butterfly(d) => Self::Butterfly(d.with_check_node(rule)),
            Self::General(d) => Self::General(d.with_check_node(rule)),
        }
    }

    pub fn decode(&mut self, llrs: &[f64]) -> Result<DecodeResult> {
        match self {
            Self::Butterfly(d) => d.decode(llrs),
            Self::General(d) => d.decode(llrs),
        }
    }

    pub fn decode_genie(&mut self, llrs: &[f64], truth: &[u8]) -> Result<DecodeResult> {
        match self {
            Self::Butterfly(d) => d.decode_genie(llrs, truth),
            Self::General(d) => d.decode_genie(llrs, truth),
        }
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
