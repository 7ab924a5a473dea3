//! Exact entropy computations: the residual uncertainty `G(d)` of a uniform
//! bit seen through `d + 1` independent channel copies, and the Fano lower
//! bound on block error probability that it yields.
//!
//! # Computing `G(d)`
//!
//! With `n = d + 1` copies, the posterior of the bit depends on the
//! observations only through the counts `(a, b, e)` of copies that agree with
//! the hypothesis `X = 0` (read as 0), disagree (read as 1) and were erased.
//! Writing `A = p0^a p1^b` and `B = p1^a p0^b`,
//!
//! ```text
//! G = sum_{a+b+e=n} n!/(a! b! e!) * p_er^e * (A + B)/2 * h2(A / (A + B))
//! ```
//!
//! Terms are evaluated in the log domain. Each term is bounded above by
//! `n!/(a! b! e!) p_er^e (p0 p1)^{(a+b)/2}` (from `h2(x) <= 2 sqrt(x(1-x))`),
//! a bound that is unimodal both in `e` and in `a` for fixed `e`. Summation
//! walks outward from the peaks and stops once the bound falls `e^-80` below
//! the largest one, so large `d` costs roughly `O(d)` rather than `O(d^2)`.

use std::f64::consts::LN_2;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::channel::{apply_noise, ChannelParams, NoiseSymbol, ReceivedSymbol};
use crate::codes::BipartiteCode;
use crate::format::sig17;
use crate::{Error, Result};

/// Largest `d` accepted by [`g_of_d_bruteforce`].
pub const BRUTEFORCE_MAX_D: usize = 12;
/// Largest `k` accepted by [`conditional_entropy_bruteforce`].
pub const BRUTEFORCE_MAX_K: usize = 8;
/// Largest `k + m` accepted by [`conditional_entropy_bruteforce`].
pub const BRUTEFORCE_MAX_LEN: usize = 14;
/// Search cap of [`min_degree_for_target`].
pub const MIN_DEGREE_CAP: usize = 1_000_000;

/// Terms whose upper bound is this many nats below the largest are dropped.
const PRUNE_NATS: f64 = 80.0;

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `ln(i!)` for `i = 0..=n`.
#[derive(Debug, Clone)]
pub(crate) struct LnFactorials(Vec<f64>);

impl LnFactorials {
    pub(crate) fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        let mut acc = CompensatedSum::default();
        table.push(0.0);
        for i in 1..=n {
            acc.add((i as f64).ln());
            table.push(acc.value());
        }
        Self(table)
    }

    pub(crate) fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// `ln(n! / (a! b! e!))` with `n = a + b + e`.
    pub(crate) fn multinomial3(&self, a: usize, b: usize, e: usize) -> f64 {
        self.get(a + b + e) - self.get(a) - self.get(b) - self.get(e)
    }
}

/// `count * ln_p`, taking `0 * ln 0 = 0`.
pub(crate) fn xlny(count: usize, ln_p: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * ln_p
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(h2(p))
}

fn h2(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Entropy in bits of the two-point posterior with log-masses `ln_a`, `ln_b`
/// normalised by `ln_total`.
fn h2_from_logs(ln_a: f64, ln_b: f64, ln_total: f64) -> f64 {
    let term = |ln_x: f64| {
        if ln_x == f64::NEG_INFINITY {
            0.0
        } else {
            let rel = ln_x - ln_total;
            -rel.exp() * rel / LN_2
        }
    };
    term(ln_a) + term(ln_b)
}

fn log_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// `H(X | V_0, ..., V_d)` in bits for a uniform bit `X` observed through
/// `d + 1` independent uses of the channel.
pub fn g_of_d(params: &ChannelParams, d: usize) -> f64 {
    let n = d + 1;
    let lf = LnFactorials::new(n);
    g_with_table(params, n, &lf)
}

fn g_with_table(params: &ChannelParams, n: usize, lf: &LnFactorials) -> f64 {
    let ln_p0 = params.p0().ln();
    let ln_p1 = params.p1().ln();
    let ln_per = params.p_er().ln();
    // ln sqrt(p0 p1), the per-copy factor of the term bound
    let ln_half_bhatt = 0.5 * (ln_p0 + ln_p1);

    // Upper bound on the total contribution with `e` erasures.
    let erasure_bound = |e: usize| {
        let rest = n - e;
        lf.get(n) - lf.get(e) - lf.get(rest) + xlny(e, ln_per) + xlny(rest, LN_2 + ln_half_bhatt)
    };
    let bounds: Vec<f64> = (0..=n).map(erasure_bound).collect();
    let peak = bounds
        .iter()
        .copied()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(e, _)| e)
        .unwrap();
    if bounds[peak] == f64::NEG_INFINITY {
        return 0.0;
    }
    let cutoff = bounds[peak] - PRUNE_NATS;

    let mut total = CompensatedSum::default();
    let add_erasure_level = |e: usize| {
        let rest = n - e;
        let ln_erased = xlny(e, ln_per);
        let term = |a: usize| -> Option<f64> {
            let b = rest - a;
            let ln_coef = lf.multinomial3(a, b, e);
            if ln_coef + ln_erased + xlny(rest, ln_half_bhatt) < cutoff {
                return None;
            }
            let ln_a = xlny(a, ln_p0) + xlny(b, ln_p1);
            let ln_b = xlny(a, ln_p1) + xlny(b, ln_p0);
            let ln_sum = log_add(ln_a, ln_b);
            if ln_sum == f64::NEG_INFINITY {
                return Some(0.0);
            }
            let weight = (ln_coef + ln_erased + ln_sum - LN_2).exp();
            Some(weight * h2_from_logs(ln_a, ln_b, ln_sum))
        };
        let mid = rest / 2;
        let mut level = CompensatedSum::default();
        for a in (0..=mid).rev() {
            match term(a) {
                Some(t) => level.add(t),
                None => break,
            }
        }
        for a in mid + 1..=rest {
            match term(a) {
                Some(t) => level.add(t),
                None => break,
            }
        }
        level.value()
    };

    for e in (0..=peak).rev() {
        if bounds[e] < cutoff {
            break;
        }
        total.add(add_erasure_level(e));
    }
    for (e, &bound) in bounds.iter().enumerate().skip(peak + 1) {
        if bound < cutoff {
            break;
        }
        total.add(add_erasure_level(e));
    }
    total.value().clamp(0.0, 1.0)
}

/// Reference value of [`g_of_d`] by enumerating all `3^(d+1)` noise
/// patterns for both bit values.
pub fn g_of_d_bruteforce(params: &ChannelParams, d: usize) -> Result<f64> {
    if d > BRUTEFORCE_MAX_D {
        return Err(Error::TooLarge {
            what: "d",
            value: d,
            limit: BRUTEFORCE_MAX_D,
        });
    }
    let n = d + 1;
    let outcomes = 3usize.pow(n as u32);
    // joint[y] = [P(X = 0, Y = y), P(X = 1, Y = y)]
    let mut joint = vec![[0.0f64; 2]; outcomes];
    for pattern in 0..outcomes {
        let noise = base3_digits(pattern, n)
            .map(|digit| NoiseSymbol::ALL[digit])
            .collect::<Vec<_>>();
        let prob: f64 = 0.5
            * noise
                .iter()
                .map(|&s| params.probability(s))
                .product::<f64>();
        for (x, slot) in [false, true].into_iter().zip(0..2) {
            let y = noise
                .iter()
                .fold(0usize, |acc, &s| 3 * acc + symbol_index(apply_noise(x, s)));
            joint[y][slot] += prob;
        }
    }
    Ok(conditional_entropy_of_joint(
        joint.iter().map(|row| &row[..]),
    ))
}

fn base3_digits(mut value: usize, len: usize) -> impl Iterator<Item = usize> {
    let mut digits = vec![0; len];
    for slot in digits.iter_mut().rev() {
        *slot = value % 3;
        value /= 3;
    }
    digits.into_iter()
}

fn symbol_index(s: ReceivedSymbol) -> usize {
    match s {
        ReceivedSymbol::Zero => 0,
        ReceivedSymbol::One => 1,
        ReceivedSymbol::Erasure => 2,
    }
}

/// `H(X | Y) = sum_y sum_x p(x, y) log2(p(y) / p(x, y))` from rows
/// `p(., y)`.
fn conditional_entropy_of_joint<'a>(rows: impl Iterator<Item = &'a [f64]>) -> f64 {
    let mut total = CompensatedSum::default();
    for row in rows {
        let py: f64 = row.iter().sum();
        if py <= 0.0 {
            continue;
        }
        for &pxy in row {
            if pxy > 0.0 {
                total.add(pxy * (py / pxy).log2());
            }
        }
    }
    total.value()
}

/// `G(0), ..., G(d_max)` for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct GTable {
    params: ChannelParams,
    values: Vec<f64>,
}

impl GTable {
    pub fn new(params: ChannelParams, d_max: usize) -> Self {
        let lf = LnFactorials::new(d_max + 1);
        #[cfg(feature = "parallel")]
        let values = (0..=d_max)
            .into_par_iter()
            .map(|d| g_with_table(&params, d + 1, &lf))
            .collect();
        #[cfg(not(feature = "parallel"))]
        let values = (0..=d_max)
            .map(|d| g_with_table(&params, d + 1, &lf))
            .collect();
        Self { params, values }
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn d_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `G(d)`; panics if `d > d_max`.
    pub fn get(&self, d: usize) -> f64 {
        self.values[d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `d,G` header and one row per degree, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,G\n");
        for (d, g) in self.values.iter().enumerate() {
            out.push_str(&format!("{d},{}\n", sig17(*g)));
        }
        out
    }
}

/// Fano lower bound on the block error probability of any decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoBound {
    pub k: usize,
    /// `sum_i G(d(i))` in bits, a lower bound on `H(X | Y)`.
    pub entropy_sum: f64,
    /// `max(0, (entropy_sum - 1) / k)`.
    pub lower_bound: f64,
}

impl FanoBound {
    /// `H(X)` in bits for uniform messages.
    pub fn message_entropy(&self) -> f64 {
        self.k as f64
    }

    /// `H(X) / k`, identically one for uniform messages.
    pub fn raw_rate(&self) -> f64 {
        1.0
    }
}

pub fn fano_lower_bound(code: &BipartiteCode, params: &ChannelParams) -> FanoBound {
    let degrees = code.degrees();
    let table = GTable::new(*params, degrees.max_message());
    let mut sum = CompensatedSum::default();
    for &d in &degrees.message {
        sum.add(table.get(d));
    }
    let entropy_sum = sum.value();
    let k = code.k();
    FanoBound {
        k,
        entropy_sum,
        lower_bound: ((entropy_sum - 1.0) / k as f64).clamp(0.0, 1.0),
    }
}

/// Exact `H(X | Y)` for a tiny code by enumerating every message and every
/// received word.
pub fn conditional_entropy_bruteforce(code: &BipartiteCode, params: &ChannelParams) -> Result<f64> {
    let k = code.k();
    let len = code.len();
    if k > BRUTEFORCE_MAX_K {
        return Err(Error::TooLarge {
            what: "k",
            value: k,
            limit: BRUTEFORCE_MAX_K,
        });
    }
    if len > BRUTEFORCE_MAX_LEN {
        return Err(Error::TooLarge {
            what: "k + m",
            value: len,
            limit: BRUTEFORCE_MAX_LEN,
        });
    }
    let messages = 1usize << k;
    let codewords: Vec<Vec<bool>> = (0..messages)
        .map(|x| {
            let bits: Vec<bool> = (0..k).map(|i| x >> i & 1 == 1).collect();
            code.encode(&bits).expect("length matches").bits()
        })
        .collect();
    // likelihood[pos][y][x] = P(Y_pos = y | codeword x)
    let likelihood: Vec<[Vec<f64>; 3]> = (0..len)
        .map(|pos| {
            let table = |y: ReceivedSymbol| -> Vec<f64> {
                codewords
                    .iter()
                    .map(|cw| match y.bit() {
                        None => params.p_er(),
                        Some(bit) if bit == cw[pos] => params.p0(),
                        Some(_) => params.p1(),
                    })
                    .collect()
            };
            [
                table(ReceivedSymbol::Zero),
                table(ReceivedSymbol::One),
                table(ReceivedSymbol::Erasure),
            ]
        })
        .collect();

    let prior = 1.0 / messages as f64;
    let mut levels = vec![vec![prior; messages]; len + 1];
    let mut total = CompensatedSum::default();
    enumerate_received(0, &likelihood, &mut levels, &mut total);
    Ok(total.value())
}

fn enumerate_received(
    pos: usize,
    likelihood: &[[Vec<f64>; 3]],
    levels: &mut [Vec<f64>],
    total: &mut CompensatedSum,
) {
    if pos == likelihood.len() {
        let joint = &levels[pos];
        let py: f64 = joint.iter().sum();
        for &pxy in joint {
            if pxy > 0.0 {
                total.add(pxy * (py / pxy).log2());
            }
        }
        return;
    }
    for y in 0..3 {
        let (head, tail) = levels.split_at_mut(pos + 1);
        let (parent, child) = (&head[pos], &mut tail[0]);
        let mut any = false;
        for ((c, &p), &l) in child.iter_mut().zip(parent).zip(&likelihood[pos][y]) {
            *c = p * l;
            any |= *c > 0.0;
        }
        if any {
            enumerate_received(pos + 1, likelihood, levels, total);
        }
    }
}

/// Smallest `d` with `G(d) <= target`.
pub fn min_degree_for_target(params: &ChannelParams, target: f64) -> Result<usize> {
    if target.is_nan() || target <= 0.0 {
        return Err(Error::Precondition(format!(
            "target {target} must be positive"
        )));
    }
    let g = |d: usize| g_of_d(params, d);
    if g(0) <= target {
        return Ok(0);
    }
    if params.p0() == params.p1() {
        // every observation is uninformative and G is identically one
        return Err(Error::DegreeCapExceeded {
            cap: MIN_DEGREE_CAP,
            g_at_cap: 1.0,
        });
    }
    // G(lo) > target >= G(hi)
    let mut lo = 0;
    let mut hi = 1;
    while g(hi) > target {
        if hi == MIN_DEGREE_CAP {
            return Err(Error::DegreeCapExceeded {
                cap: MIN_DEGREE_CAP,
                g_at_cap: g(MIN_DEGREE_CAP),
            });
        }
        lo = hi;
        hi = (hi * 2).min(MIN_DEGREE_CAP);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if g(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
