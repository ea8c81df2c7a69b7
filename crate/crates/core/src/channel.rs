//! Exact binary-input discrete memoryless channels.
//!
//! A [`Dmc`] is a dense 2×M transition table. Everything here is exact
//! arithmetic on those tables, so the module doubles as the ground-truth
//! oracle for construction and decoding code elsewhere in the crate.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;

use crate::{Error, Result};

/// Alphabet cap for tables produced by the public constructors and the
/// combining operators.
pub const MAX_OUTPUTS: usize = 4096;

/// Alphabet cap for internally synthesised tables (brute-force bit-channels).
pub(crate) const MAX_SYNTH_OUTPUTS: usize = 10_000_000;

const ROW_SUM_TOL: f64 = 1e-12;
const SYNTH_ROW_SUM_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;

/// Binary-input DMC stored as `probs[x][y] = W(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc {
    probs: [Vec<f64>; 2],
    labels: Option<Vec<String>>,
}

/// Bhattacharyya parameter and symmetric capacity (bits per use).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub z: f64,
    pub capacity: f64,
}

impl ChannelStats {
    /// `1 - I <= Z <= sqrt(1 - I^2)` within `tol`.
    pub fn satisfies_z_capacity_bounds(&self, tol: f64) -> bool {
        let lower = 1.0 - self.capacity;
        let upper = (1.0 - self.capacity * self.capacity).max(0.0).sqrt();
        self.z >= lower - tol && self.z <= upper + tol
    }
}

impl Dmc {
    /// Builds a channel from its two rows, `row0[y] = W(y|0)` and `row1[y] = W(y|1)`.
    pub fn new(row0: Vec<f64>, row1: Vec<f64>) -> Result<Self> {
        Self::checked(row0, row1, MAX_OUTPUTS, ROW_SUM_TOL)
    }

    pub(crate) fn synthesized(row0: Vec<f64>, row1: Vec<f64>) -> Result<Self> {
        Self::checked(row0, row1, MAX_SYNTH_OUTPUTS, SYNTH_ROW_SUM_TOL)
    }

    fn checked(row0: Vec<f64>, row1: Vec<f64>, cap: usize, tol: f64) -> Result<Self> {
        if row0.len() != row1.len() {
            return Err(Error::Length {
                expected: row0.len(),
                actual: row1.len(),
            });
        }
        if row0.is_empty() {
            return Err(Error::InvalidChannel("channel needs at least one output".into()));
        }
        if row0.len() > cap {
            return Err(Error::AlphabetTooLarge {
                size: row0.len(),
                cap,
            });
        }
        for (x, row) in [&row0, &row1].into_iter().enumerate() {
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has entry {p} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::InvalidChannel(format!("row {x} sums to {sum}")));
            }
        }
        Ok(Self {
            probs: [row0, row1],
            labels: None,
        })
    }

    /// Attaches one opaque tag per output symbol.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.num_outputs() {
            return Err(Error::Length {
                expected: self.num_outputs(),
                actual: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Binary erasure channel with outputs `0`, `1`, `e`.
    pub fn bec(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Parameter(format!(
                "erasure probability {epsilon} not in [0, 1]"
            )));
        }
        let keep = 1.0 - epsilon;
        Self::new(vec![keep, 0.0, epsilon], vec![0.0, keep, epsilon])?
            .with_labels(vec!["0".into(), "1".into(), "e".into()])
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::Parameter(format!("crossover {p} not in [0, 1/2]")));
        }
        Self::new(vec![1.0 - p, p], vec![p, 1.0 - p])?
            .with_labels(vec!["0".into(), "1".into()])
    }

    pub fn num_outputs(&self) -> usize {
        self.probs[0].len()
    }

    /// `W(y|x)`.
    #[inline]
    pub fn prob(&self, y: usize, x: u8) -> f64 {
        self.probs[x as usize][y]
    }

    pub fn row(&self, x: u8) -> &[f64] {
        &self.probs[x as usize]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Tag of output `y`, falling back to its index.
    pub fn label(&self, y: usize) -> String {
        match &self.labels {
            Some(l) => l[y].clone(),
            None => y.to_string(),
        }
    }

    fn columns(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.probs[0].iter().copied().zip(self.probs[1].iter().copied())
    }

    /// `Z(W) = sum_y sqrt(W(y|0) W(y|1))`.
    pub fn bhattacharyya(&self) -> f64 {
        self.columns()
            .map(|(a, b)| (a * b).sqrt())
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Mutual information with uniform input, in bits.
    pub fn symmetric_capacity(&self) -> f64 {
        let mut total = 0.0;
        for (a, b) in self.columns() {
            let q = 0.5 * (a + b);
            if a > 0.0 {
                total += 0.5 * a * (a / q).log2();
            }
            if b > 0.0 {
                total += 0.5 * b * (b / q).log2();
            }
        }
        total.clamp(0.0, 1.0)
    }

    /// `ln(W(y|0) / W(y|1))`, infinite when one input is ruled out.
    pub fn llr(&self, y: usize) -> f64 {
        let (a, b) = (self.probs[0][y], self.probs[1][y]);
        match (a > 0.0, b > 0.0) {
            (true, true) => (a / b).ln(),
            (true, false) => f64::INFINITY,
            (false, true) => f64::NEG_INFINITY,
            (false, false) => 0.0,
        }
    }

    /// Draws an output for input `x`.
    pub fn sample<R: Rng + ?Sized>(&self, x: u8, rng: &mut R) -> usize {
        let row = &self.probs[x as usize];
        let mut t: f64 = rng.random();
        for (y, &p) in row.iter().enumerate() {
            if t < p {
                return y;
            }
            t -= p;
        }
        // Rounding slack: fall back to the last output with positive mass.
        row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn stats(&self) -> ChannelStats {
        ChannelStats {
            z: self.bhattacharyya(),
            capacity: self.symmetric_capacity(),
        }
    }

    /// True when an involutive output permutation maps row 0 onto row 1.
    ///
    /// Such a permutation pairs every column `(a, b)` with a column `(b, a)`;
    /// columns with `a == b` are fixed points. The check therefore reduces to
    /// comparing the multiset of columns leaning towards input 0 with the
    /// mirrored multiset of columns leaning towards input 1.
    pub fn is_symmetric(&self) -> bool {
        let mut toward0 = Vec::new();
        let mut toward1 = Vec::new();
        for (a, b) in self.columns() {
            if (a - b).abs() <= SYMMETRY_TOL {
                continue;
            }
            if a > b {
                toward0.push((a, b));
            } else {
                toward1.push((b, a));
            }
        }
        if toward0.len() != toward1.len() {
            return false;
        }
        let by_value = |p: &(f64, f64), q: &(f64, f64)| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1));
        toward0.sort_by(by_value);
        toward1.sort_by(by_value);
        toward0.iter().zip(&toward1).all(|(p, q)| {
            (p.0 - q.0).abs() <= SYMMETRY_TOL && (p.1 - q.1).abs() <= SYMMETRY_TOL
        })
    }

    /// Plain-text table: `M` on the first line, then the two rows.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.num_outputs());
        for row in &self.probs {
            let line: Vec<String> = row.iter().map(|p| format!("{p:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

impl FromStr for Dmc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let m: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("missing output count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("output count: {e}")))?;
        let mut row = || -> Result<Vec<f64>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("missing probability row".into()))?;
            let values = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if values.len() != m {
                return Err(Error::Parse(format!(
                    "row has {} entries, expected {m}",
                    values.len()
                )));
            }
            Ok(values)
        };
        let row0 = row()?;
        let row1 = row()?;
        Dmc::new(row0, row1)
    }
}

/// The worse half of the two-channel building block: `u` is the input of
/// `W1` XORed with an unknown uniform bit `x` which is itself sent over `W2`.
///
/// `(W1 ⊠ W2)(y1, y2 | u) = 1/2 sum_x W1(y1 | u ^ x) W2(y2 | x)`,
/// output index `y1 * |Y2| + y2`.
pub fn box_star(w1: &Dmc, w2: &Dmc) -> Result<Dmc> {
    let (m1, m2) = (w1.num_outputs(), w2.num_outputs());
    check_product_size(m1 * m2)?;
    let mut rows = [vec![0.0; m1 * m2], vec![0.0; m1 * m2]];
    for u in 0..2u8 {
        for y1 in 0..m1 {
            for y2 in 0..m2 {
                let p: f64 = (0..2u8)
                    .map(|x| w1.prob(y1, u ^ x) * w2.prob(y2, x))
                    .sum();
                rows[u as usize][y1 * m2 + y2] = 0.5 * p;
            }
        }
    }
    let labels = (0..m1)
        .flat_map(|y1| (0..m2).map(move |y2| (y1, y2)))
        .map(|(y1, y2)| format!("({},{})", w1.label(y1), w2.label(y2)))
        .collect();
    let [r0, r1] = rows;
    Dmc::new(r0, r1)?.with_labels(labels)
}

/// The better half of the building block: `u` is sent over `W2` directly and
/// XORed into `W1`'s input, with the other bit `x` revealed at the output.
///
/// `(W1 ⊛ W2)(y1, y2, x | u) = 1/2 W1(y1 | u ^ x) W2(y2 | u)`,
/// output index `(y1 * |Y2| + y2) * 2 + x`.
pub fn circle_star(w1: &Dmc, w2: &Dmc) -> Result<Dmc> {
    let (m1, m2) = (w1.num_outputs(), w2.num_outputs());
    let size = m1 * m2 * 2;
    check_product_size(size)?;
    let mut rows = [vec![0.0; size], vec![0.0; size]];
    for u in 0..2u8 {
        for y1 in 0..m1 {
            for y2 in 0..m2 {
                for x in 0..2u8 {
                    rows[u as usize][(y1 * m2 + y2) * 2 + x as usize] =
                        0.5 * w1.prob(y1, u ^ x) * w2.prob(y2, u);
                }
            }
        }
    }
    let mut labels = Vec::with_capacity(size);
    for y1 in 0..m1 {
        for y2 in 0..m2 {
            for x in 0..2 {
                labels.push(format!("({},{},{x})", w1.label(y1), w2.label(y2)));
            }
        }
    }
    let [r0, r1] = rows;
    Dmc::new(r0, r1)?.with_labels(labels)
}

fn check_product_size(size: usize) -> Result<()> {
    if size > MAX_OUTPUTS {
        return Err(Error::AlphabetTooLarge {
            size,
            cap: MAX_OUTPUTS,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn bec_edge_cases() {
        let s = Dmc::bec(0.0).unwrap().stats();
        assert!(close(s.z, 0.0, 1e-15) && close(s.capacity, 1.0, 1e-15));
        let s = Dmc::bec(1.0).unwrap().stats();
        assert!(close(s.z, 1.0, 1e-15) && close(s.capacity, 0.0, 1e-15));
        let s = Dmc::bec(0.5).unwrap().stats();
        assert!(close(s.z, 0.5, 1e-15) && close(s.capacity, 0.5, 1e-15));
        assert!(close(Dmc::bec(0.3).unwrap().bhattacharyya(), 0.3, 1e-15));
        assert!(close(Dmc::bec(0.25).unwrap().symmetric_capacity(), 0.75, 1e-15));
    }

    #[test]
    fn bsc_closed_forms() {
        let s = Dmc::bsc(0.0).unwrap().stats();
        assert!(close(s.z, 0.0, 1e-15) && close(s.capacity, 1.0, 1e-15));
        let s = Dmc::bsc(0.5).unwrap().stats();
        assert!(close(s.z, 1.0, 1e-15) && close(s.capacity, 0.0, 1e-15));
        let s = Dmc::bsc(0.1).unwrap().stats();
        let h2 = -(0.1f64 * 0.1f64.log2() + 0.9 * 0.9f64.log2());
        assert!(close(s.z, 0.6, 1e-12));
        assert!(close(s.capacity, 1.0 - h2, 1e-12));
        assert!(close(s.capacity, 0.5310, 1e-4));
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(matches!(Dmc::bec(-0.1), Err(Error::Parameter(_))));
        assert!(matches!(Dmc::bec(1.5), Err(Error::Parameter(_))));
        assert!(matches!(Dmc::bsc(0.6), Err(Error::Parameter(_))));
        assert!(Dmc::new(vec![0.5, 0.4], vec![0.5, 0.5]).is_err());
        assert!(Dmc::new(vec![], vec![]).is_err());
    }

    #[test]
    fn symmetry_detection() {
        assert!(Dmc::bsc(0.1).unwrap().is_symmetric());
        assert!(Dmc::bec(0.4).unwrap().is_symmetric());
        // Neither of the two permutations of a 2-output alphabet maps
        // (0.7, 0.3) onto (0.6, 0.4).
        let w = Dmc::new(vec![0.7, 0.3], vec![0.6, 0.4]).unwrap();
        assert!(!w.is_symmetric());
    }

    #[test]
    fn box_star_of_erasures() {
        let (e1, e2) = (0.2, 0.3);
        let w = box_star(&Dmc::bec(e1).unwrap(), &Dmc::bec(e2).unwrap()).unwrap();
        assert_eq!(w.num_outputs(), 9);
        // Direct enumeration of the 9 composite columns.
        let b1 = Dmc::bec(e1).unwrap();
        let b2 = Dmc::bec(e2).unwrap();
        let mut z = 0.0;
        for y1 in 0..3 {
            for y2 in 0..3 {
                let p0 = 0.5 * (b1.prob(y1, 0) * b2.prob(y2, 0) + b1.prob(y1, 1) * b2.prob(y2, 1));
                let p1 = 0.5 * (b1.prob(y1, 1) * b2.prob(y2, 0) + b1.prob(y1, 0) * b2.prob(y2, 1));
                z += (p0 * p1).sqrt();
            }
        }
        assert!(close(z, 0.44, 1e-12));
        assert!(close(w.bhattacharyya(), e1 + e2 - e1 * e2, 1e-12));
        assert_eq!(w.label(8), "(e,e)");
    }

    #[test]
    fn circle_star_of_erasures() {
        let (e1, e2) = (0.2, 0.3);
        let w = circle_star(&Dmc::bec(e1).unwrap(), &Dmc::bec(e2).unwrap()).unwrap();
        assert_eq!(w.num_outputs(), 18);
        assert!(close(w.bhattacharyya(), e1 * e2, 1e-12));
    }

    #[test]
    fn noiseless_components() {
        let clean = Dmc::bec(0.0).unwrap();
        let w = box_star(&clean, &clean).unwrap();
        assert!(close(w.symmetric_capacity(), 1.0, 1e-12));
        let w = circle_star(&Dmc::bsc(0.3).unwrap(), &clean).unwrap();
        assert!(close(w.symmetric_capacity(), 1.0, 1e-12));
    }

    #[test]
    fn combining_rows_sum_to_one() {
        let w1 = Dmc::bsc(0.11).unwrap();
        let w2 = Dmc::bec(0.37).unwrap();
        for w in [box_star(&w1, &w2).unwrap(), circle_star(&w1, &w2).unwrap()] {
            for x in 0..2 {
                let s: f64 = w.row(x).iter().sum();
                assert!(close(s, 1.0, 1e-12));
            }
            assert!(w.is_symmetric());
        }
    }

    #[test]
    fn alphabet_cap_is_enforced() {
        let big = Dmc::new(vec![1.0 / 64.0; 64], vec![1.0 / 64.0; 64]).unwrap();
        assert_eq!(box_star(&big, &big).unwrap().num_outputs(), 4096);
        assert!(matches!(
            circle_star(&big, &big),
            Err(Error::AlphabetTooLarge { size: 8192, .. })
        ));
    }

    #[test]
    fn text_roundtrip() {
        let w = Dmc::bsc(0.1).unwrap();
        let back: Dmc = w.to_text().parse().unwrap();
        assert_eq!(back.row(0), w.row(0));
        assert_eq!(back.row(1), w.row(1));
        assert!("2\n0.5 0.5\n".parse::<Dmc>().is_err());
        assert!("3\n0.5 0.5\n0.5 0.5\n".parse::<Dmc>().is_err());
    }
}
