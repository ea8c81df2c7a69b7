//! 16-QAM bit-interleaved coded modulation over AWGN.
//!
//! A symbol label is `(b1, b2, b3, b4)`. The in-phase axis carries the Gray
//! PAM-4 pair `(b1, b3)` and the quadrature axis `(b2, b4)`, so `b1, b2` are
//! the well-protected bits of the two axes and `b3, b4` the weak ones.

mod scheme;

pub use scheme::{
    construct_compound, construct_separated, CompoundGenieSampler, CompoundScheme,
    SeparatedDesign, SeparatedGenieSampler, SeparatedScheme, CONSTRUCTION_EBN0_DB,
    CONSTRUCTION_TRIALS,
};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub const BITS_PER_SYMBOL: usize = 4;

/// Demapper output magnitude cap.
pub const LLR_CLIP: f64 = 40.0;

/// Label positions (0-based) of the strong and weak protection classes.
pub const STRONG_POSITIONS: [usize; 2] = [0, 1];
pub const WEAK_POSITIONS: [usize; 2] = [2, 3];

// Gray PAM-4 amplitude for (msb, lsb): 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
const PAM4: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Qam16Mapper {
    points: [Complex64; 16],
    scale: f64,
}

impl Default for Qam16Mapper {
    fn default() -> Self {
        Self::new()
    }
}

impl Qam16Mapper {
    pub fn new() -> Self {
        let scale = 1.0 / 10f64.sqrt();
        let points = std::array::from_fn(|label| {
            let bits = label_bits(label);
            Complex64::new(
                pam(bits[0], bits[2]) * scale,
                pam(bits[1], bits[3]) * scale,
            )
        });
        Self { points, scale }
    }

    /// Point for a label `b1 b2 b3 b4` packed as `b1 << 3 | b2 << 2 | b3 << 1 | b4`.
    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn points(&self) -> &[Complex64; 16] {
        &self.points
    }

    /// Groups of four bits to symbols.
    pub fn modulate(&self, coded: &[u8]) -> Result<Vec<Complex64>> {
        check_blocks(coded.len())?;
        coded
            .chunks_exact(BITS_PER_SYMBOL)
            .map(|c| {
                if c.iter().any(|b| *b > 1) {
                    return Err(Error::InvalidInput("coded bits must be 0 or 1".into()));
                }
                let label = c.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                Ok(self.points[label])
            })
            .collect()
    }

    /// Exact bit LLRs, four per symbol, clipped to `LLR_CLIP`. With
    /// `sigma == 0` the LLRs are hard decisions at the clip level.
    pub fn demap(&self, received: &[Complex64], sigma: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; received.len() * BITS_PER_SYMBOL];
        self.demap_into(received, sigma, &mut out)?;
        Ok(out)
    }

    pub fn demap_into(&self, received: &[Complex64], sigma: f64, out: &mut [f64]) -> Result<()> {
        if !(sigma >= 0.0) {
            return Err(Error::Parameter(format!("noise sigma {sigma} must be >= 0")));
        }
        if out.len() != received.len() * BITS_PER_SYMBOL {
            return Err(Error::Length {
                expected: received.len() * BITS_PER_SYMBOL,
                actual: out.len(),
            });
        }
        for (y, llr) in received.iter().zip(out.chunks_exact_mut(BITS_PER_SYMBOL)) {
            let (i_msb, i_lsb) = self.axis_llrs(y.re, sigma);
            let (q_msb, q_lsb) = self.axis_llrs(y.im, sigma);
            llr.copy_from_slice(&[i_msb, q_msb, i_lsb, q_lsb]);
        }
        Ok(())
    }

    // The 16 metrics factor over the two axes and the label bits split
    // between them, so each axis is an exact PAM-4 demap.
    fn axis_llrs(&self, y: f64, sigma: f64) -> (f64, f64) {
        let metric = |msb: u8, lsb: u8| {
            let d = y - pam(msb, lsb) * self.scale;
            -d * d
        };
        let m = [metric(0, 0), metric(0, 1), metric(1, 0), metric(1, 1)];
        if sigma == 0.0 {
            let best = (0..4).max_by(|&a, &b| m[a].total_cmp(&m[b])).unwrap_or(0);
            let hard = |bit: usize| if bit == 0 { LLR_CLIP } else { -LLR_CLIP };
            return (hard(best >> 1), hard(best & 1));
        }
        let inv = 1.0 / (2.0 * sigma * sigma);
        let top = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // The largest term is 1 after the shift, so neither ratio is 0 / 0.
        let e = m.map(|v| ((v - top) * inv).exp());
        let msb = ((e[0] + e[1]) / (e[2] + e[3])).ln();
        let lsb = ((e[0] + e[2]) / (e[1] + e[3])).ln();
        (clip(msb), clip(lsb))
    }
}

fn pam(msb: u8, lsb: u8) -> f64 {
    PAM4[((msb << 1) | lsb) as usize]
}

fn label_bits(label: usize) -> [u8; 4] {
    std::array::from_fn(|k| ((label >> (3 - k)) & 1) as u8)
}

fn clip(llr: f64) -> f64 {
    if llr.is_nan() {
        0.0
    } else {
        llr.clamp(-LLR_CLIP, LLR_CLIP)
    }
}

fn check_blocks(len: usize) -> Result<()> {
    if len % BITS_PER_SYMBOL != 0 {
        return Err(Error::Parameter(format!(
            "length {len} is not a multiple of {BITS_PER_SYMBOL}"
        )));
    }
    Ok(())
}

/// Swaps the second and third bit of every 4-bit block. Self-inverse.
pub fn compound_interleave<T: Copy>(coded: &[T]) -> Result<Vec<T>> {
    check_blocks(coded.len())?;
    let mut out = coded.to_vec();
    for block in out.chunks_exact_mut(BITS_PER_SYMBOL) {
        block.swap(1, 2);
    }
    Ok(out)
}

pub fn compound_deinterleave<T: Copy>(interleaved: &[T]) -> Result<Vec<T>> {
    compound_interleave(interleaved)
}

/// Adds circular Gaussian noise with per-dimension standard deviation `sigma`.
pub fn awgn<R: Rng + ?Sized>(symbols: &[Complex64], sigma: f64, rng: &mut R) -> Result<Vec<Complex64>> {
    if !(sigma >= 0.0) || sigma.is_infinite() {
        return Err(Error::Parameter(format!("noise sigma {sigma} must be finite and >= 0")));
    }
    Ok(symbols
        .iter()
        .map(|s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + Complex64::new(re * sigma, im * sigma)
        })
        .collect())
}

/// Operating point of a coded 16-QAM link. Eb counts information bits and
/// the symbol energy is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub ebn0_db: f64,
    pub code_rate: f64,
}

impl LinkConfig {
    pub fn new(ebn0_db: f64, code_rate: f64) -> Result<Self> {
        if !(code_rate > 0.0 && code_rate <= 1.0) {
            return Err(Error::Parameter(format!("code rate {code_rate} not in (0, 1]")));
        }
        if ebn0_db.is_nan() || ebn0_db == f64::NEG_INFINITY {
            return Err(Error::Parameter(format!("invalid Eb/N0 {ebn0_db}")));
        }
        Ok(Self { ebn0_db, code_rate })
    }

    /// Infinite Eb/N0.
    pub fn noiseless(code_rate: f64) -> Result<Self> {
        Self::new(f64::INFINITY, code_rate)
    }

    pub fn bits_per_symbol(&self) -> usize {
        BITS_PER_SYMBOL
    }

    pub fn noise_sigma(&self) -> f64 {
        let ebn0 = 10f64.powf(self.ebn0_db / 10.0);
        (1.0 / (2.0 * self.code_rate * BITS_PER_SYMBOL as f64 * ebn0)).sqrt()
    }
}
