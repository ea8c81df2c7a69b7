//! End-to-end compound and separated codecs over 16-QAM.

use num_complex::Complex64;
use rand::Rng;

use super::{awgn, compound_deinterleave, compound_interleave, LinkConfig, Qam16Mapper};
use crate::decoder::SpecDecoder;
use crate::reliability::{
    allocate_separated_rates, mc_genie_estimate, select_information_set, GenieSampler,
    ReliabilityProfile,
};
use crate::sim::{run_until, Counts, StoppingRule, TrialOutcome, TrialRng};
use crate::transform::{compound_transform, route_to_streams, streams_to_coded, CompoundSpec};
use crate::{Error, Result};

/// Eb/N0 (dB) at which both schemes are designed.
pub const CONSTRUCTION_EBN0_DB: f64 = 5.0;

/// Genie trials per construction.
pub const CONSTRUCTION_TRIALS: u64 = 200_000;

/// Number of information bits for `rate` at `block_length`, if integral.
pub(crate) fn information_bits(block_length: usize, rate: f64) -> Result<usize> {
    let k = rate * block_length as f64;
    if !(rate > 0.0 && rate <= 1.0) || (k - k.round()).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "rate {rate} does not give an integral dimension at N = {block_length}"
        )));
    }
    Ok(k.round() as usize)
}

fn random_bits(len: usize, rng: &mut TrialRng) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

fn check_qam_length(n: usize) -> Result<()> {
    if n == 0 || n % 4 != 0 {
        return Err(Error::Parameter(format!("block length {n} is not a multiple of 4")));
    }
    Ok(())
}

/// Sends coded bits through modulation, noise and demapping. Returns one
/// LLR per bit in the given order.
fn qam_link(mapper: &Qam16Mapper, link: &LinkConfig, bits: &[u8], rng: &mut TrialRng) -> Vec<f64> {
    let sigma = link.noise_sigma();
    let symbols = mapper.modulate(bits).expect("length checked");
    let received: Vec<Complex64> = awgn(&symbols, sigma, rng).expect("sigma checked");
    mapper.demap(&received, sigma).expect("sigma checked")
}

/// Compound code with `l = 2`: sub-channel 0 rides label bits 1 and 2,
/// sub-channel 1 bits 3 and 4.
#[derive(Debug, Clone)]
pub struct CompoundScheme {
    spec: CompoundSpec,
    link: LinkConfig,
    mapper: Qam16Mapper,
}

impl CompoundScheme {
    pub fn new(spec: CompoundSpec, link: LinkConfig) -> Result<Self> {
        if spec.num_channels() != 2 {
            return Err(Error::Parameter(format!(
                "16-QAM compound scheme needs l = 2, got {}",
                spec.num_channels()
            )));
        }
        check_qam_length(spec.block_length())?;
        let k = information_bits(spec.block_length(), link.code_rate)?;
        if k != spec.dimension() {
            return Err(Error::Parameter(format!(
                "code dimension {} does not match rate {}",
                spec.dimension(),
                link.code_rate
            )));
        }
        SpecDecoder::new(&spec)?;
        Ok(Self {
            spec,
            link,
            mapper: Qam16Mapper::new(),
        })
    }

    pub fn spec(&self) -> &CompoundSpec {
        &self.spec
    }

    pub fn link(&self) -> LinkConfig {
        self.link
    }

    pub fn with_link(&self, link: LinkConfig) -> Result<Self> {
        Self::new(self.spec.clone(), link)
    }

    pub fn decoder(&self) -> SpecDecoder {
        SpecDecoder::new(&self.spec).expect("checked at construction")
    }

    /// Channel LLRs, in coded-position order, for one transmitted codeword.
    pub fn transmit(&self, coded: &[u8], rng: &mut TrialRng) -> Vec<f64> {
        let streams = route_to_streams(coded, &self.spec);
        let serial = serialize(&streams);
        let llrs = qam_link(&self.mapper, &self.link, &compound_interleave(&serial).unwrap(), rng);
        let serial_llrs = compound_deinterleave(&llrs).unwrap();
        streams_to_coded(&deserialize(&serial_llrs, 2), &self.spec)
    }

    pub fn trial(&self, decoder: &mut SpecDecoder, rng: &mut TrialRng) -> TrialOutcome {
        let message = random_bits(self.spec.dimension(), rng);
        let u = self.spec.embed(&message).expect("dimension fixed");
        let x = compound_transform(&u, &self.spec).expect("length fixed");
        let llrs = self.transmit(&x, rng);
        let decoded = decoder.decode(&llrs).expect("length fixed");
        let bit_errors = count_errors(&decoded.info_bits, &message);
        TrialOutcome {
            frame_error: bit_errors > 0,
            bit_errors,
        }
    }

    pub fn simulate(&self, rule: StoppingRule, seed: u64) -> Result<Counts> {
        run_until(rule, seed, || self.decoder(), |dec, rng| self.trial(dec, rng))
    }
}

// Stream c, slot t goes to serial position 2t + c, so each 4-bit block reads
// (s0, s1, s0, s1) and the interleaver turns it into (s0, s0, s1, s1).
fn serialize<T: Copy + Default>(streams: &[Vec<T>]) -> Vec<T> {
    let l = streams.len();
    let mut out = vec![T::default(); l * streams[0].len()];
    for (c, s) in streams.iter().enumerate() {
        for (t, &v) in s.iter().enumerate() {
            out[t * l + c] = v;
        }
    }
    out
}

fn deserialize<T: Copy>(serial: &[T], l: usize) -> Vec<Vec<T>> {
    (0..l)
        .map(|c| serial.iter().skip(c).step_by(l).copied().collect())
        .collect()
}

/// Two independent polar codes of length `N / 2`; the first rides label bits
/// 1 and 2, the second bits 3 and 4.
#[derive(Debug, Clone)]
pub struct SeparatedScheme {
    first: CompoundSpec,
    second: CompoundSpec,
    link: LinkConfig,
    mapper: Qam16Mapper,
}

impl SeparatedScheme {
    pub fn new(first: CompoundSpec, second: CompoundSpec, link: LinkConfig) -> Result<Self> {
        if first.num_channels() != 1 || second.num_channels() != 1 {
            return Err(Error::Parameter("separated codes must be single-channel".into()));
        }
        if first.block_length() != second.block_length() {
            return Err(Error::Parameter("separated codes must have equal length".into()));
        }
        let n = 2 * first.block_length();
        check_qam_length(n)?;
        let k = information_bits(n, link.code_rate)?;
        if first.dimension() + second.dimension() != k {
            return Err(Error::Parameter(format!(
                "dimensions {} + {} do not match rate {} at N = {n}",
                first.dimension(),
                second.dimension(),
                link.code_rate
            )));
        }
        Ok(Self {
            first,
            second,
            link,
            mapper: Qam16Mapper::new(),
        })
    }

    pub fn codes(&self) -> (&CompoundSpec, &CompoundSpec) {
        (&self.first, &self.second)
    }

    pub fn block_length(&self) -> usize {
        2 * self.first.block_length()
    }

    /// Per-code rates `(k1 / (N/2), k2 / (N/2))`.
    pub fn rates(&self) -> (f64, f64) {
        let half = self.first.block_length() as f64;
        (
            self.first.dimension() as f64 / half,
            self.second.dimension() as f64 / half,
        )
    }

    pub fn link(&self) -> LinkConfig {
        self.link
    }

    pub fn with_link(&self, link: LinkConfig) -> Result<Self> {
        Self::new(self.first.clone(), self.second.clone(), link)
    }

    pub fn decoders(&self) -> (SpecDecoder, SpecDecoder) {
        (
            SpecDecoder::new(&self.first).expect("polar spec"),
            SpecDecoder::new(&self.second).expect("polar spec"),
        )
    }

    /// Channel LLRs for the two codewords.
    pub fn transmit(&self, c1: &[u8], c2: &[u8], rng: &mut TrialRng) -> (Vec<f64>, Vec<f64>) {
        separated_link(&self.mapper, &self.link, c1, c2, rng)
    }

    pub fn trial(&self, decoders: &mut (SpecDecoder, SpecDecoder), rng: &mut TrialRng) -> TrialOutcome {
        let m1 = random_bits(self.first.dimension(), rng);
        let m2 = random_bits(self.second.dimension(), rng);
        let x1 = compound_transform(&self.first.embed(&m1).unwrap(), &self.first).unwrap();
        let x2 = compound_transform(&self.second.embed(&m2).unwrap(), &self.second).unwrap();
        let (l1, l2) = self.transmit(&x1, &x2, rng);
        let d1 = decoders.0.decode(&l1).expect("length fixed");
        let d2 = decoders.1.decode(&l2).expect("length fixed");
        let bit_errors = count_errors(&d1.info_bits, &m1) + count_errors(&d2.info_bits, &m2);
        TrialOutcome {
            frame_error: bit_errors > 0,
            bit_errors,
        }
    }

    pub fn simulate(&self, rule: StoppingRule, seed: u64) -> Result<Counts> {
        run_until(rule, seed, || self.decoders(), |dec, rng| self.trial(dec, rng))
    }
}

// Symbol k carries (c1[2k], c1[2k+1], c2[2k], c2[2k+1]).
fn separated_link(
    mapper: &Qam16Mapper,
    link: &LinkConfig,
    c1: &[u8],
    c2: &[u8],
    rng: &mut TrialRng,
) -> (Vec<f64>, Vec<f64>) {
    let bits: Vec<u8> = c1
        .chunks_exact(2)
        .zip(c2.chunks_exact(2))
        .flat_map(|(a, b)| [a[0], a[1], b[0], b[1]])
        .collect();
    let llrs = qam_link(mapper, link, &bits, rng);
    let mut l1 = Vec::with_capacity(c1.len());
    let mut l2 = Vec::with_capacity(c2.len());
    for block in llrs.chunks_exact(4) {
        l1.extend_from_slice(&block[..2]);
        l2.extend_from_slice(&block[2..]);
    }
    (l1, l2)
}

/// Genie trials of the compound code with every position unfrozen.
#[derive(Debug, Clone)]
pub struct CompoundGenieSampler {
    scheme: CompoundScheme,
}

impl CompoundGenieSampler {
    pub fn new(spec: &CompoundSpec, link: LinkConfig) -> Result<Self> {
        let spec = spec.clone().with_frozen(&[])?;
        if spec.num_channels() != 2 {
            return Err(Error::Parameter("16-QAM compound scheme needs l = 2".into()));
        }
        check_qam_length(spec.block_length())?;
        SpecDecoder::new(&spec)?;
        Ok(Self {
            scheme: CompoundScheme {
                spec,
                link,
                mapper: Qam16Mapper::new(),
            },
        })
    }
}

impl GenieSampler for CompoundGenieSampler {
    type Scratch = SpecDecoder;

    fn block_length(&self) -> usize {
        self.scheme.spec.block_length()
    }

    fn construction_point(&self) -> f64 {
        self.scheme.link.ebn0_db
    }

    fn scratch(&self) -> SpecDecoder {
        self.scheme.decoder()
    }

    fn sample(&self, decoder: &mut SpecDecoder, rng: &mut TrialRng) -> Vec<usize> {
        let u = random_bits(self.block_length(), rng);
        let x = compound_transform(&u, &self.scheme.spec).expect("length fixed");
        let llrs = self.scheme.transmit(&x, rng);
        decoder.decode_genie(&llrs, &u).expect("length fixed").decision_errors
    }
}

/// Genie trials of two unfrozen half-length polar codes sharing symbols.
/// Positions of the second code are reported offset by `N / 2`.
#[derive(Debug, Clone)]
pub struct SeparatedGenieSampler {
    half: CompoundSpec,
    link: LinkConfig,
    mapper: Qam16Mapper,
}

impl SeparatedGenieSampler {
    pub fn new(block_length: usize, link: LinkConfig) -> Result<Self> {
        check_qam_length(block_length)?;
        if !block_length.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "separated block length {block_length} must be a power of two"
            )));
        }
        Ok(Self {
            half: CompoundSpec::polar(block_length.trailing_zeros() - 1),
            link,
            mapper: Qam16Mapper::new(),
        })
    }
}

impl GenieSampler for SeparatedGenieSampler {
    type Scratch = (SpecDecoder, SpecDecoder);

    fn block_length(&self) -> usize {
        2 * self.half.block_length()
    }

    fn construction_point(&self) -> f64 {
        self.link.ebn0_db
    }

    fn scratch(&self) -> Self::Scratch {
        let d = SpecDecoder::new(&self.half).expect("polar spec");
        (d.clone(), d)
    }

    fn sample(&self, decoders: &mut Self::Scratch, rng: &mut TrialRng) -> Vec<usize> {
        let half = self.half.block_length();
        let u1 = random_bits(half, rng);
        let u2 = random_bits(half, rng);
        let x1 = compound_transform(&u1, &self.half).expect("length fixed");
        let x2 = compound_transform(&u2, &self.half).expect("length fixed");
        let (l1, l2) = separated_link(&self.mapper, &self.link, &x1, &x2, rng);
        let mut errors = decoders.0.decode_genie(&l1, &u1).expect("length fixed").decision_errors;
        let second = decoders.1.decode_genie(&l2, &u2).expect("length fixed").decision_errors;
        errors.extend(second.into_iter().map(|i| i + half));
        errors
    }
}

/// Designs the compound code of length `block_length` (`l = 2`, Arikan
/// kernel) at `ebn0_db` by genie Monte Carlo.
pub fn construct_compound(
    block_length: usize,
    rate: f64,
    ebn0_db: f64,
    trials: u64,
    seed: u64,
) -> Result<(ReliabilityProfile, CompoundSpec)> {
    if block_length < 4 || !block_length.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "block length {block_length} must be a power of two >= 4"
        )));
    }
    let k = information_bits(block_length, rate)?;
    let spec = CompoundSpec::power_of_two(1, block_length.trailing_zeros() - 1)?;
    let sampler = CompoundGenieSampler::new(&spec, LinkConfig::new(ebn0_db, rate)?)?;
    let profile = mc_genie_estimate(&sampler, trials, seed)?;
    let info = select_information_set(&profile, k)?;
    Ok((profile, spec.with_information_set(&info)?))
}

/// Outcome of the separated design.
#[derive(Debug, Clone)]
pub struct SeparatedDesign {
    /// Joint profile: first code in `0..N/2`, second in `N/2..N`.
    pub profile: ReliabilityProfile,
    pub first: CompoundSpec,
    pub second: CompoundSpec,
}

impl SeparatedDesign {
    pub fn dimensions(&self) -> (usize, usize) {
        (self.first.dimension(), self.second.dimension())
    }

    pub fn rates(&self) -> (f64, f64) {
        let half = self.first.block_length() as f64;
        (
            self.first.dimension() as f64 / half,
            self.second.dimension() as f64 / half,
        )
    }
}

/// Designs the separated baseline: per-code genie profiles at `ebn0_db`,
/// then the rate split minimising the summed error estimates.
pub fn construct_separated(
    block_length: usize,
    rate: f64,
    ebn0_db: f64,
    trials: u64,
    seed: u64,
) -> Result<SeparatedDesign> {
    let k = information_bits(block_length, rate)?;
    let sampler = SeparatedGenieSampler::new(block_length, LinkConfig::new(ebn0_db, rate)?)?;
    let profile = mc_genie_estimate(&sampler, trials, seed)?;
    let half = block_length / 2;
    let (p1, p2) = (profile.slice(0..half), profile.slice(half..block_length));
    let (k1, k2) = allocate_separated_rates(&p1, &p2, k)?;
    let depth = half.trailing_zeros();
    let first = CompoundSpec::polar(depth).with_information_set(&select_information_set(&p1, k1)?)?;
    let second = CompoundSpec::polar(depth).with_information_set(&select_information_set(&p2, k2)?)?;
    Ok(SeparatedDesign {
        profile,
        first,
        second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::trial_rng;

    #[test]
    fn serialization_roundtrip() {
        let streams = vec![vec![1, 2, 3, 4], vec![5, 6, 7, 8]];
        let s = serialize(&streams);
        assert_eq!(s, vec![1, 5, 2, 6, 3, 7, 4, 8]);
        assert_eq!(compound_interleave(&s).unwrap(), vec![1, 2, 5, 6, 3, 4, 7, 8]);
        assert_eq!(deserialize(&s, 2), streams);
    }

    #[test]
    fn default_assignment_puts_channel_zero_on_strong_bits() {
        // Coded positions alternate channels, so after the swap each symbol
        // carries two bits of each.
        let spec = CompoundSpec::power_of_two(1, 2).unwrap();
        let streams = route_to_streams(&(0..8).collect::<Vec<usize>>(), &spec);
        assert_eq!(streams, vec![vec![0, 2, 4, 6], vec![1, 3, 5, 7]]);
        let serial = compound_interleave(&serialize(&streams)).unwrap();
        assert_eq!(serial, vec![0, 2, 1, 3, 4, 6, 5, 7]);
    }

    #[test]
    fn information_bits_checks_integrality() {
        assert_eq!(information_bits(1024, 0.5).unwrap(), 512);
        assert!(information_bits(10, 0.33).is_err());
        assert!(information_bits(10, 0.0).is_err());
    }

    #[test]
    fn noiseless_round_trips() {
        let spec = CompoundSpec::power_of_two(1, 4).unwrap();
        let info: Vec<usize> = (16..32).collect();
        let spec = spec.with_information_set(&info).unwrap();
        let link = LinkConfig::noiseless(0.5).unwrap();
        let compound = CompoundScheme::new(spec, link).unwrap();
        let mut dec = compound.decoder();
        let polar = |k: usize| {
            CompoundSpec::polar(4)
                .with_information_set(&(16 - k..16).collect::<Vec<_>>())
                .unwrap()
        };
        let separated = SeparatedScheme::new(polar(10), polar(6), link).unwrap();
        let mut decs = separated.decoders();
        for t in 0..100 {
            let mut rng = trial_rng(1, t);
            assert!(!compound.trial(&mut dec, &mut rng).frame_error);
            assert!(!separated.trial(&mut decs, &mut rng).frame_error);
        }
    }

    #[test]
    fn scheme_configuration_errors() {
        let link = LinkConfig::new(5.0, 0.5).unwrap();
        let polar = CompoundSpec::polar(4).with_information_set(&(8..16).collect::<Vec<_>>()).unwrap();
        assert!(CompoundScheme::new(polar.clone(), link).is_err());
        let wrong_k = CompoundSpec::power_of_two(1, 3).unwrap().with_information_set(&[15]).unwrap();
        assert!(CompoundScheme::new(wrong_k, link).is_err());
        assert!(SeparatedScheme::new(polar.clone(), polar.clone(), link).is_ok());
        let quarter = LinkConfig::new(5.0, 0.25).unwrap();
        assert!(SeparatedScheme::new(polar.clone(), polar, quarter).is_err());
    }

    #[test]
    fn separated_genie_offsets_second_code() {
        let sampler = SeparatedGenieSampler::new(16, LinkConfig::new(-5.0, 0.5).unwrap()).unwrap();
        let p = mc_genie_estimate(&sampler, 2000, 3).unwrap();
        assert_eq!(p.len(), 16);
        // The weak half is worse on average at low SNR.
        let mean = |r: std::ops::Range<usize>| p.scores[r].iter().sum::<f64>() / 8.0;
        assert!(mean(0..8) < mean(8..16));
    }
}
