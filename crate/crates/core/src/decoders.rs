//! Decoders: majority voting for repetition codes, with its exact error and
//! Chernoff bound, and exhaustive maximum-likelihood decoding for tiny codes.

use crate::channel::{ChannelParams, ReceivedSymbol};
use crate::codes::BipartiteCode;
use crate::entropy::{xlny, CompensatedSum, LnFactorials};
use crate::{Error, Result};

/// Largest `k` accepted by [`map_decode_exhaustive`].
pub const MAP_MAX_K: usize = 20;

/// Decoder output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub estimate: Vec<bool>,
    /// `tie_flags[i]` is set when `estimate[i]` was decided by a tie rule
    /// rather than by the evidence.
    pub tie_flags: Vec<bool>,
}

/// Majority decoding of a word laid out as [`BipartiteCode::repetition`]:
/// copy 0 of bit `i` is received position `i`, copy `j >= 1` is position
/// `k + i * r + j - 1`. Bit `i` decodes to 1 iff at least as many copies read
/// One as read Zero; erasures abstain.
pub fn majority_decode(received: &[ReceivedSymbol], k: usize, r: usize) -> Result<DecodeResult> {
    let expected = k + k * r;
    if received.len() != expected {
        return Err(Error::LengthMismatch {
            what: "received word",
            expected,
            actual: received.len(),
        });
    }
    let (direct, repeats) = received.split_at(k);
    let mut estimate = Vec::with_capacity(k);
    let mut tie_flags = Vec::with_capacity(k);
    for (i, &first) in direct.iter().enumerate() {
        let mut ones = 0usize;
        let mut zeros = 0usize;
        for s in std::iter::once(first).chain(repeats[i * r..(i + 1) * r].iter().copied()) {
            match s {
                ReceivedSymbol::One => ones += 1,
                ReceivedSymbol::Zero => zeros += 1,
                ReceivedSymbol::Erasure => {}
            }
        }
        estimate.push(ones >= zeros);
        tie_flags.push(ones == zeros);
    }
    Ok(DecodeResult {
        estimate,
        tie_flags,
    })
}

/// `P(sum of L >= 0)` over `r + 1` copies, with `L = +1` on a flip, `-1` on
/// a retain and `0` on an erasure. A tie counts as an error, so this is the
/// error probability when the transmitted bit is 0 and an upper bound on
/// the error for a uniform bit.
pub fn exact_majority_bit_error(params: &ChannelParams, r: usize) -> f64 {
    trinomial_tail(params, r + 1, |retained, flipped| flipped >= retained)
}

/// `(P(error | X = 0), P(error | X = 1))` for majority decoding of `r + 1`
/// copies. They differ only through ties, which decode to 1.
pub fn exact_majority_conditional_errors(params: &ChannelParams, r: usize) -> (f64, f64) {
    let n = r + 1;
    (
        trinomial_tail(params, n, |retained, flipped| flipped >= retained),
        trinomial_tail(params, n, |retained, flipped| flipped > retained),
    )
}

fn trinomial_tail(params: &ChannelParams, n: usize, include: impl Fn(usize, usize) -> bool) -> f64 {
    let lf = LnFactorials::new(n);
    let (ln_p0, ln_p1, ln_per) = (params.p0().ln(), params.p1().ln(), params.p_er().ln());
    let mut total = CompensatedSum::default();
    for e in 0..=n {
        for a in 0..=n - e {
            let b = n - e - a;
            if include(a, b) {
                let powers = params.p0().powi(a as i32)
                    * params.p1().powi(b as i32)
                    * params.p_er().powi(e as i32);
                let impossible = (a > 0 && params.p0() == 0.0)
                    || (b > 0 && params.p1() == 0.0)
                    || (e > 0 && params.p_er() == 0.0);
                let term = if impossible {
                    0.0
                } else if powers >= 1e-290 {
                    lf.multinomial3(a, b, e).exp() * powers
                } else {
                    (lf.multinomial3(a, b, e) + xlny(a, ln_p0) + xlny(b, ln_p1) + xlny(e, ln_per))
                        .exp()
                };
                total.add(term);
            }
        }
    }
    total.value().clamp(0.0, 1.0)
}

/// Exact and Chernoff-bounded error of majority decoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorityErrorReport {
    pub r: usize,
    /// Ties counted as errors; see [`exact_majority_bit_error`].
    pub exact_bit_error: f64,
    pub error_given_zero: f64,
    pub error_given_one: f64,
    /// `M(s*)^(r+1)` with `M(s) = p1 e^s + p0 e^-s + p_er`.
    pub chernoff_bound: f64,
    /// Minimiser `s*`; infinite when `p1 = 0`.
    pub optimal_s: f64,
}

impl MajorityErrorReport {
    /// Error for a uniformly distributed bit.
    pub fn symmetric_error(&self) -> f64 {
        0.5 * (self.error_given_zero + self.error_given_one)
    }
}

/// Moment generating function of `L` at `s`.
pub fn majority_mgf(params: &ChannelParams, s: f64) -> f64 {
    params.p1() * s.exp() + params.p0() * (-s).exp() + params.p_er()
}

fn require_majority_regime(params: &ChannelParams) -> Result<()> {
    if params.favours_majority() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "requires 2 p1 + p_er < 1, got 2 * {} + {} = {}",
            params.p1(),
            params.p_er(),
            2.0 * params.p1() + params.p_er()
        )))
    }
}

/// Chernoff bound on [`exact_majority_bit_error`], minimised in closed form:
/// `e^(2 s*) = p0 / p1`, so `M(s*) = 2 sqrt(p0 p1) + p_er`.
pub fn chernoff_bound(params: &ChannelParams, r: usize) -> Result<MajorityErrorReport> {
    require_majority_regime(params)?;
    let (p0, p1, p_er) = (params.p0(), params.p1(), params.p_er());
    let (optimal_s, per_copy) = if p1 > 0.0 {
        (0.5 * (p0 / p1).ln(), 2.0 * (p0 * p1).sqrt() + p_er)
    } else {
        (f64::INFINITY, p_er)
    };
    let (error_given_zero, error_given_one) = exact_majority_conditional_errors(params, r);
    Ok(MajorityErrorReport {
        r,
        exact_bit_error: error_given_zero,
        error_given_zero,
        error_given_one,
        chernoff_bound: per_copy.powi(r as i32 + 1).min(1.0),
        optimal_s,
    })
}

/// Numerical minimisation of the Chernoff exponent, independent of the
/// closed form. `M` is convex, so the root of `M'(s) = p1 e^s - p0 e^-s` is
/// bracketed and bisected to `1e-12` (relative). Returns `(s*, bound)`.
pub fn chernoff_bound_numeric(params: &ChannelParams, r: usize) -> Result<(f64, f64)> {
    require_majority_regime(params)?;
    let (p0, p1) = (params.p0(), params.p1());
    if p1 == 0.0 {
        return Ok((f64::INFINITY, params.p_er().powi(r as i32 + 1)));
    }
    let slope = |s: f64| p1 * s.exp() - p0 * (-s).exp();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while slope(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    Ok((s, majority_mgf(params, s).powi(r as i32 + 1).min(1.0)))
}

/// Maximum-likelihood decoding by scanning all `2^k` messages. Ties go to
/// the lexicographically smallest message (bit 0 compared first); a bit is
/// tie-flagged when two maximisers disagree on it.
pub fn map_decode_exhaustive(
    code: &BipartiteCode,
    received: &[ReceivedSymbol],
    params: &ChannelParams,
) -> Result<DecodeResult> {
    let k = code.k();
    if k > MAP_MAX_K {
        return Err(Error::TooLarge {
            what: "k",
            value: k,
            limit: MAP_MAX_K,
        });
    }
    if received.len() != code.len() {
        return Err(Error::LengthMismatch {
            what: "received word",
            expected: code.len(),
            actual: received.len(),
        });
    }
    let (ln_p0, ln_p1) = (params.p0().ln(), params.p1().ln());
    let observed: Vec<(usize, bool)> = received
        .iter()
        .enumerate()
        .filter_map(|(pos, s)| s.bit().map(|b| (pos, b)))
        .collect();

    let mut message = vec![false; k];
    let mut best = f64::NEG_INFINITY;
    let mut best_message: Option<Vec<bool>> = None;
    let mut agree_mask = vec![true; k];
    for index in 0..1u64 << k {
        // lexicographic order: bit 0 is the most significant
        for (i, bit) in message.iter_mut().enumerate() {
            *bit = index >> (k - 1 - i) & 1 == 1;
        }
        let codeword = code.encode(&message)?.bits();
        let mismatches = observed
            .iter()
            .filter(|&&(pos, b)| codeword[pos] != b)
            .count();
        // erasure factors are common to all candidates
        let ll = xlny(observed.len() - mismatches, ln_p0) + xlny(mismatches, ln_p1);
        if ll > best {
            best = ll;
            best_message = Some(message.clone());
            agree_mask.iter_mut().for_each(|a| *a = true);
        } else if ll == best {
            if let Some(leader) = &best_message {
                for ((a, x), y) in agree_mask.iter_mut().zip(leader).zip(&message) {
                    *a &= x == y;
                }
            }
        }
    }
    let estimate = best_message.unwrap_or_else(|| vec![false; k]);
    Ok(DecodeResult {
        estimate,
        tie_flags: agree_mask.into_iter().map(|a| !a).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ReceivedSymbol::{Erasure as E, One as I, Zero as O};

    fn params(p1: f64, p_er: f64) -> ChannelParams {
        ChannelParams::new(p1, p_er).unwrap()
    }

    #[test]
    fn majority_rule() {
        // k = 1, r = 3: direct copy then three repeats
        let d = majority_decode(&[I, I, E, O], 1, 3).unwrap();
        assert_eq!(d.estimate, vec![true]);
        assert_eq!(d.tie_flags, vec![false]);
        let d = majority_decode(&[E, E, E, E], 1, 3).unwrap();
        assert_eq!(d.estimate, vec![true]);
        assert_eq!(d.tie_flags, vec![true]);
        assert_eq!(
            majority_decode(&[O, O, I], 1, 2).unwrap().estimate,
            vec![false]
        );
        assert!(majority_decode(&[O, O], 1, 2).is_err());
    }

    #[test]
    fn majority_uses_repetition_layout() {
        let code = BipartiteCode::repetition(3, 2).unwrap();
        let message = [true, false, true];
        let received: Vec<_> = code
            .encode(&message)
            .unwrap()
            .bits()
            .into_iter()
            .map(ReceivedSymbol::from_bit)
            .collect();
        assert_eq!(majority_decode(&received, 3, 2).unwrap().estimate, message);
    }

    #[test]
    fn exact_error_pure_erasure() {
        for q in [0.1, 0.5, 0.8] {
            for r in [1, 4, 9] {
                let e = exact_majority_bit_error(&params(0.0, q), r);
                assert!((e - q.powi(r as i32 + 1)).abs() < 1e-15);
            }
        }
        assert!((exact_majority_bit_error(&params(0.0, 0.5), 1) - 0.25).abs() < 1e-16);
    }

    #[test]
    fn conditional_errors_differ_by_ties() {
        let (e0, e1) = exact_majority_conditional_errors(&params(0.0, 0.5), 3);
        assert!((e0 - 0.0625).abs() < 1e-16);
        assert_eq!(e1, 0.0);
        let (e0, e1) = exact_majority_conditional_errors(&params(0.1, 0.1), 7);
        assert!(e0 > e1);
    }

    #[test]
    fn exact_error_by_enumeration() {
        // direct enumeration of all 3^(r+1) noise patterns
        let p = params(0.15, 0.2);
        let r = 5;
        let n = r + 1;
        let probs = [p.p0(), p.p1(), p.p_er()];
        let mut expected = 0.0;
        for pattern in 0..3usize.pow(n as u32) {
            let (mut v, mut retained, mut flipped, mut prob) = (pattern, 0, 0, 1.0);
            for _ in 0..n {
                let digit = v % 3;
                v /= 3;
                prob *= probs[digit];
                match digit {
                    0 => retained += 1,
                    1 => flipped += 1,
                    _ => {}
                }
            }
            if flipped >= retained {
                expected += prob;
            }
        }
        assert!((exact_majority_bit_error(&p, r) - expected).abs() < 1e-14);
    }

    #[test]
    fn chernoff_examples() {
        let rep = chernoff_bound(&params(0.0, 0.3), 5).unwrap();
        assert!((rep.chernoff_bound - 0.3f64.powi(6)).abs() < 1e-16);
        assert!((rep.chernoff_bound - rep.exact_bit_error).abs() < 1e-16);
        assert_eq!(rep.optimal_s, f64::INFINITY);

        let bsc = chernoff_bound(&params(0.1, 0.0), 3).unwrap();
        assert!((bsc.chernoff_bound - 0.1296).abs() < 1e-15);
        let (s, bound) = chernoff_bound_numeric(&params(0.1, 0.0), 3).unwrap();
        assert!((s - bsc.optimal_s).abs() < 1e-11);
        assert!((bound - 0.1296).abs() < 1e-14);

        let mixed = chernoff_bound(&params(0.1, 0.1), 9).unwrap();
        assert!(mixed.chernoff_bound >= mixed.exact_bit_error);
    }

    #[test]
    fn chernoff_precondition() {
        let err = chernoff_bound(&params(0.3, 0.4), 3).unwrap_err();
        assert!(err.to_string().contains("2 p1 + p_er < 1"));
        assert!(chernoff_bound_numeric(&params(0.5, 0.0), 3).is_err());
    }

    #[test]
    fn chernoff_numeric_agrees_with_closed_form() {
        for (p1, p_er) in [(0.01, 0.3), (0.2, 0.1), (0.3, 0.35), (1e-9, 0.0)] {
            let p = params(p1, p_er);
            let closed = chernoff_bound(&p, 12).unwrap();
            let (s, bound) = chernoff_bound_numeric(&p, 12).unwrap();
            assert!((s - closed.optimal_s).abs() <= 1e-11 * closed.optimal_s.max(1.0));
            assert!((bound - closed.chernoff_bound).abs() <= 1e-13);
        }
    }

    #[test]
    fn map_noiseless_and_all_erased() {
        let code = BipartiteCode::random_regular(5, 4, 2, 1).unwrap();
        let message = [true, false, false, true, true];
        let received: Vec<_> = code
            .encode(&message)
            .unwrap()
            .bits()
            .into_iter()
            .map(ReceivedSymbol::from_bit)
            .collect();
        let d = map_decode_exhaustive(&code, &received, &ChannelParams::noiseless()).unwrap();
        assert_eq!(d.estimate, message);
        assert!(d.tie_flags.iter().all(|t| !t));

        let erased = vec![E; code.len()];
        let d = map_decode_exhaustive(&code, &erased, &params(0.1, 0.1)).unwrap();
        assert_eq!(d.estimate, vec![false; 5]);
        assert!(d.tie_flags.iter().all(|&t| t));
    }

    #[test]
    fn map_ties_flag_only_ambiguous_bits() {
        // bit 0 received cleanly, bit 1 fully erased
        let code = BipartiteCode::repetition(2, 1).unwrap();
        let d = map_decode_exhaustive(&code, &[I, E, I, E], &params(0.1, 0.1)).unwrap();
        assert_eq!(d.estimate, vec![true, false]);
        assert_eq!(d.tie_flags, vec![false, true]);
    }

    #[test]
    fn map_limits() {
        let code = BipartiteCode::new(21, vec![]).unwrap();
        assert!(matches!(
            map_decode_exhaustive(&code, &[E; 21], &params(0.1, 0.1)),
            Err(Error::TooLarge { limit: 20, .. })
        ));
        let code = BipartiteCode::new(2, vec![]).unwrap();
        assert!(map_decode_exhaustive(&code, &[E], &params(0.1, 0.1)).is_err());
    }
}
