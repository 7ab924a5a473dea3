//! Memoryless binary-input channel that retains, flips or erases each bit.
//!
//! Randomness comes from a counter-based generator: the stream for trial `t`
//! under master seed `s` is ChaCha8 keyed by `s` on stream `t`, so any trial
//! can be regenerated independently of the others.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Slack allowed on `p1 + p_er <= 1` when validating parameters.
pub const PARAM_TOLERANCE: f64 = 1e-12;

/// Flip and erasure probabilities of the channel. The retain probability is
/// derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    p1: f64,
    p_er: f64,
}

impl ChannelParams {
    pub fn new(p1: f64, p_er: f64) -> Result<Self> {
        if !(p1.is_finite() && p_er.is_finite()) {
            return Err(Error::InvalidChannel(format!(
                "non-finite probability (p1 = {p1}, p_er = {p_er})"
            )));
        }
        if p1 < 0.0 || p_er < 0.0 {
            return Err(Error::InvalidChannel(format!(
                "negative probability (p1 = {p1}, p_er = {p_er})"
            )));
        }
        if p1 + p_er > 1.0 + PARAM_TOLERANCE {
            return Err(Error::InvalidChannel(format!(
                "p1 + p_er = {} exceeds 1",
                p1 + p_er
            )));
        }
        Ok(Self { p1, p_er })
    }

    /// Channel that never corrupts anything.
    pub fn noiseless() -> Self {
        Self { p1: 0.0, p_er: 0.0 }
    }

    /// Probability of a flip.
    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Probability of an erasure.
    pub fn p_er(&self) -> f64 {
        self.p_er
    }

    /// Probability that the bit arrives unchanged. Clamped at zero so that
    /// parameters accepted within [`PARAM_TOLERANCE`] stay a distribution.
    pub fn p0(&self) -> f64 {
        (1.0 - self.p1 - self.p_er).max(0.0)
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p_er == 0.0
    }

    /// `2 p1 + p_er < 1`, i.e. a retained copy is more likely than a flipped
    /// one and majority voting improves with more copies.
    pub fn favours_majority(&self) -> bool {
        2.0 * self.p1 + self.p_er < 1.0
    }

    /// Probability of `noise`.
    pub fn probability(&self, noise: NoiseSymbol) -> f64 {
        match noise {
            NoiseSymbol::Retain => self.p0(),
            NoiseSymbol::Flip => self.p1,
            NoiseSymbol::Erase => self.p_er,
        }
    }

    /// Draws one noise symbol from a single uniform variate.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> NoiseSymbol {
        let u: f64 = rng.random();
        if u < self.p_er {
            NoiseSymbol::Erase
        } else if u < self.p_er + self.p1 {
            NoiseSymbol::Flip
        } else {
            NoiseSymbol::Retain
        }
    }
}

impl fmt::Display for ChannelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Channel(p1 = {}, p_er = {})", self.p1, self.p_er)
    }
}

/// What the channel does to one transmitted bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseSymbol {
    Retain,
    Flip,
    Erase,
}

impl NoiseSymbol {
    pub const ALL: [NoiseSymbol; 3] = [NoiseSymbol::Retain, NoiseSymbol::Flip, NoiseSymbol::Erase];
}

/// A channel output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReceivedSymbol {
    Zero,
    One,
    Erasure,
}

impl ReceivedSymbol {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            ReceivedSymbol::One
        } else {
            ReceivedSymbol::Zero
        }
    }

    /// The bit carried by the symbol, `None` for an erasure.
    pub fn bit(self) -> Option<bool> {
        match self {
            ReceivedSymbol::Zero => Some(false),
            ReceivedSymbol::One => Some(true),
            ReceivedSymbol::Erasure => None,
        }
    }
}

/// Received message symbols followed by received parity symbols.
pub type ReceivedWord = Vec<ReceivedSymbol>;

/// Random stream for trial `trial` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Draws `count` i.i.d. noise symbols.
pub fn sample_noise<R: Rng + ?Sized>(
    params: &ChannelParams,
    rng: &mut R,
    count: usize,
) -> Vec<NoiseSymbol> {
    (0..count).map(|_| params.sample_one(rng)).collect()
}

pub fn apply_noise(bit: bool, noise: NoiseSymbol) -> ReceivedSymbol {
    match noise {
        NoiseSymbol::Erase => ReceivedSymbol::Erasure,
        NoiseSymbol::Retain => ReceivedSymbol::from_bit(bit),
        NoiseSymbol::Flip => ReceivedSymbol::from_bit(!bit),
    }
}

/// Sends every bit through the channel with fresh noise.
pub fn transmit_word<R: Rng + ?Sized>(
    bits: &[bool],
    params: &ChannelParams,
    rng: &mut R,
) -> ReceivedWord {
    bits.iter()
        .map(|&bit| apply_noise(bit, params.sample_one(rng)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p1: f64, p_er: f64) -> ChannelParams {
        ChannelParams::new(p1, p_er).unwrap()
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ChannelParams::new(-0.1, 0.2).is_err());
        assert!(ChannelParams::new(0.6, 0.5).is_err());
        assert!(ChannelParams::new(f64::NAN, 0.0).is_err());
        // within rounding slack
        assert!(ChannelParams::new(0.7, 0.3 + 1e-13).is_ok());
    }

    #[test]
    fn retain_probability() {
        let p = params(0.1, 0.25);
        assert_eq!(p.p0(), 1.0 - 0.1 - 0.25);
        assert_eq!(params(0.5, 0.5).p0(), 0.0);
    }

    #[test]
    fn degenerate_sampling() {
        let mut rng = trial_rng(1, 0);
        assert_eq!(
            sample_noise(&params(0.0, 0.0), &mut rng, 5),
            vec![NoiseSymbol::Retain; 5]
        );
        assert_eq!(
            sample_noise(&params(1.0, 0.0), &mut rng, 3),
            vec![NoiseSymbol::Flip; 3]
        );
        assert_eq!(
            sample_noise(&params(0.0, 1.0), &mut rng, 3),
            vec![NoiseSymbol::Erase; 3]
        );
    }

    #[test]
    fn apply_noise_table() {
        assert_eq!(apply_noise(false, NoiseSymbol::Flip), ReceivedSymbol::One);
        assert_eq!(
            apply_noise(true, NoiseSymbol::Erase),
            ReceivedSymbol::Erasure
        );
        assert_eq!(apply_noise(true, NoiseSymbol::Retain), ReceivedSymbol::One);
        for bit in [false, true] {
            for noise in NoiseSymbol::ALL {
                assert_eq!(
                    apply_noise(bit, noise) == ReceivedSymbol::Erasure,
                    noise == NoiseSymbol::Erase
                );
            }
        }
    }

    #[test]
    fn transmit_degenerate_channels() {
        let mut rng = trial_rng(3, 9);
        assert_eq!(
            transmit_word(&[true, false, true], &ChannelParams::noiseless(), &mut rng),
            vec![
                ReceivedSymbol::One,
                ReceivedSymbol::Zero,
                ReceivedSymbol::One
            ]
        );
        assert_eq!(
            transmit_word(&[true, false], &params(0.0, 1.0), &mut rng),
            vec![ReceivedSymbol::Erasure; 2]
        );
    }

    fn within_four_sigma(count: usize, n: usize, p: f64) -> bool {
        let freq = count as f64 / n as f64;
        (freq - p).abs() <= 4.0 * (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn flip_frequency_concentrates() {
        let p = params(0.1, 0.1);
        let n = 1_000_000;
        let noise = sample_noise(&p, &mut trial_rng(2024, 0), n);
        let count = |s| noise.iter().filter(|&&x| x == s).count();
        assert!(within_four_sigma(count(NoiseSymbol::Flip), n, 0.1));
        assert!(within_four_sigma(count(NoiseSymbol::Erase), n, 0.1));
        assert!(within_four_sigma(count(NoiseSymbol::Retain), n, 0.8));
    }

    #[test]
    fn transmit_zero_word_frequency() {
        let n = 100_000;
        let word = transmit_word(&vec![false; n], &params(0.2, 0.0), &mut trial_rng(5, 1));
        let ones = word.iter().filter(|&&s| s == ReceivedSymbol::One).count();
        assert_eq!(word.len(), n);
        assert!(within_four_sigma(ones, n, 0.2));
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let p = params(0.3, 0.3);
        let a = sample_noise(&p, &mut trial_rng(7, 4), 64);
        let b = sample_noise(&p, &mut trial_rng(7, 4), 64);
        let c = sample_noise(&p, &mut trial_rng(7, 5), 64);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
