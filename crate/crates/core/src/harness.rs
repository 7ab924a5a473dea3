//! Monte Carlo estimation of the block error probability and the batch
//! experiments built on it.
//!
//! Trial `t` draws its message and its noise from
//! [`trial_rng`]`(seed, t)` and nothing else, and results are aggregated as
//! integer counts, so a report depends only on its configuration and never
//! on how many workers ran it.

use std::time::Instant;

use rand::Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::channel::{apply_noise, transmit_word, trial_rng, ChannelParams, ReceivedSymbol};
use crate::codes::BipartiteCode;
use crate::decoders::{
    chernoff_bound, exact_majority_bit_error, exact_majority_conditional_errors, majority_decode,
    map_decode_exhaustive, MAP_MAX_K,
};
use crate::entropy::{fano_lower_bound, FanoBound};
use crate::format::Json;
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Where the code of an experiment comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeSource {
    Repetition {
        k: usize,
        r: usize,
    },
    RandomRegular {
        k: usize,
        m: usize,
        parity_degree: usize,
        seed: u64,
    },
    Explicit {
        label: String,
        code: BipartiteCode,
    },
}

impl CodeSource {
    pub fn build(&self) -> Result<BipartiteCode> {
        match self {
            CodeSource::Repetition { k, r } => BipartiteCode::repetition(*k, *r),
            CodeSource::RandomRegular {
                k,
                m,
                parity_degree,
                seed,
            } => BipartiteCode::random_regular(*k, *m, *parity_degree, *seed),
            CodeSource::Explicit { code, .. } => Ok(code.clone()),
        }
    }

    fn describe(&self) -> Json {
        match self {
            CodeSource::Repetition { k, r } => Json::object([
                ("builder", Json::from("repetition")),
                ("k", Json::from(*k)),
                ("r", Json::from(*r)),
            ]),
            CodeSource::RandomRegular {
                k,
                m,
                parity_degree,
                seed,
            } => Json::object([
                ("builder", Json::from("random-regular")),
                ("k", Json::from(*k)),
                ("m", Json::from(*m)),
                ("parity_degree", Json::from(*parity_degree)),
                ("seed", Json::from(*seed)),
            ]),
            CodeSource::Explicit { label, .. } => Json::object([
                ("builder", Json::from("file")),
                ("path", Json::from(label.as_str())),
            ]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    /// Majority vote; needs the repetition layout.
    Majority,
    /// Exhaustive maximum likelihood; needs `k <= 20`.
    Map,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Majority => "majority",
            DecoderKind::Map => "map",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub code: CodeSource,
    pub params: ChannelParams,
    pub decoder: DecoderKind,
    pub trials: u64,
    pub seed: u64,
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // rounding can leave the estimate a hair outside at p = 0 or 1
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Bounds that can be computed exactly for a majority-decoded repetition
/// code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorityAnalysis {
    pub r: usize,
    /// Ties counted as errors.
    pub exact_bit_error: f64,
    pub error_given_zero: f64,
    pub error_given_one: f64,
    /// `1 - (1 - (e0 + e1) / 2)^k`: bits decode independently.
    pub exact_block_error: f64,
    /// `k * exact_bit_error`.
    pub union_bound: f64,
    /// `None` outside `2 p1 + p_er < 1`.
    pub chernoff_bound: Option<f64>,
}

impl MajorityAnalysis {
    pub fn new(params: &ChannelParams, k: usize, r: usize) -> Self {
        let (e0, e1) = exact_majority_conditional_errors(params, r);
        let symmetric = 0.5 * (e0 + e1);
        Self {
            r,
            exact_bit_error: e0,
            error_given_zero: e0,
            error_given_one: e1,
            exact_block_error: -(k as f64 * (-symmetric).ln_1p()).exp_m1(),
            union_bound: (k as f64 * e0).min(1.0),
            chernoff_bound: chernoff_bound(params, r).ok().map(|c| c.chernoff_bound),
        }
    }

    fn to_json(self) -> Json {
        Json::object([
            ("r", Json::from(self.r)),
            ("exact_bit_error", Json::from(self.exact_bit_error)),
            ("error_given_zero", Json::from(self.error_given_zero)),
            ("error_given_one", Json::from(self.error_given_one)),
            ("exact_block_error", Json::from(self.exact_block_error)),
            ("union_bound", Json::from(self.union_bound)),
            ("chernoff_bound", Json::from(self.chernoff_bound)),
        ])
    }
}

/// Outcome of a Monte Carlo run together with the analytic quantities for
/// the same code and channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: TrialConfig,
    pub k: usize,
    pub m: usize,
    pub trials: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub block_error_rate: f64,
    /// Wilson 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Rule-of-three one-sided 95% upper bound `3 / trials`, reported only
    /// when no block error was observed.
    pub zero_error_upper_bound: Option<f64>,
    pub fano: FanoBound,
    pub majority: Option<MajorityAnalysis>,
    pub encoded_rate: f64,
    pub average_message_degree: f64,
    pub average_parity_degree: f64,
    pub max_message_degree: usize,
    /// Wall-clock time; not part of [`ExperimentReport::to_json`].
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn bit_error_rate(&self) -> f64 {
        self.bit_errors as f64 / (self.trials as f64 * self.k as f64)
    }

    pub fn to_json(&self) -> Json {
        let c = &self.config;
        Json::object([
            ("code", c.code.describe()),
            ("decoder", Json::from(c.decoder.name())),
            (
                "channel",
                Json::object([
                    ("p0", Json::from(c.params.p0())),
                    ("p1", Json::from(c.params.p1())),
                    ("p_er", Json::from(c.params.p_er())),
                ]),
            ),
            ("seed", Json::from(c.seed)),
            ("k", Json::from(self.k)),
            ("m", Json::from(self.m)),
            ("trials", Json::from(self.trials)),
            ("block_errors", Json::from(self.block_errors)),
            ("bit_errors", Json::from(self.bit_errors)),
            ("block_error_rate", Json::from(self.block_error_rate)),
            ("bit_error_rate", Json::from(self.bit_error_rate())),
            (
                "ci95",
                Json::object([
                    ("method", Json::from("wilson")),
                    ("low", Json::from(self.ci_low)),
                    ("high", Json::from(self.ci_high)),
                ]),
            ),
            (
                "zero_error_upper_bound",
                Json::from(self.zero_error_upper_bound),
            ),
            ("fano", fano_json(&self.fano)),
            (
                "majority",
                self.majority.map_or(Json::Null, MajorityAnalysis::to_json),
            ),
            ("encoded_rate", Json::from(self.encoded_rate)),
            ("raw_rate", Json::from(self.fano.raw_rate())),
            (
                "degrees",
                Json::object([
                    ("average_message", Json::from(self.average_message_degree)),
                    ("average_parity", Json::from(self.average_parity_degree)),
                    ("max_message", Json::from(self.max_message_degree)),
                ]),
            ),
        ])
    }
}

pub fn fano_json(fano: &FanoBound) -> Json {
    Json::object([
        ("k", Json::from(fano.k)),
        ("entropy_sum", Json::from(fano.entropy_sum)),
        ("lower_bound", Json::from(fano.lower_bound)),
        ("message_entropy", Json::from(fano.message_entropy())),
        ("raw_rate", Json::from(fano.raw_rate())),
    ])
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    block: u64,
    bit: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, rhs: Counts) -> Counts {
        Counts {
            block: self.block + rhs.block,
            bit: self.bit + rhs.bit,
        }
    }
}

fn run_trials(trials: u64, trial: impl Fn(u64) -> Counts + Sync + Send) -> Counts {
    #[cfg(feature = "parallel")]
    {
        (0..trials)
            .into_par_iter()
            .map(trial)
            .reduce(Counts::default, |a, b| a + b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(trial).fold(Counts::default(), |a, b| a + b)
    }
}

/// Estimates `P(X_hat != X)` for uniform messages. Runs on the current
/// rayon pool when the `parallel` feature is enabled.
pub fn monte_carlo_error(config: &TrialConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    if config.trials == 0 {
        return Err(Error::Precondition("trial count must be at least 1".into()));
    }
    let code = config.code.build()?;
    let k = code.k();
    let params = config.params;
    let repetition = code.repetition_factor();
    match config.decoder {
        DecoderKind::Majority if repetition.is_none() => {
            return Err(Error::Precondition(
                "majority decoding needs a repetition-code layout".into(),
            ));
        }
        DecoderKind::Map if k > MAP_MAX_K => {
            return Err(Error::TooLarge {
                what: "k",
                value: k,
                limit: MAP_MAX_K,
            });
        }
        _ => {}
    }

    let counts = run_trials(config.trials, |t| {
        let mut rng = trial_rng(config.seed, t);
        let message: Vec<bool> = (0..k).map(|_| rng.random()).collect();
        let codeword = code.encode(&message).expect("message has length k");
        let received = transmit_word(&codeword.bits(), &params, &mut rng);
        let decoded = match config.decoder {
            DecoderKind::Majority => majority_decode(&received, k, repetition.unwrap_or(0)),
            DecoderKind::Map => map_decode_exhaustive(&code, &received, &params),
        }
        .expect("decoder inputs validated");
        let bit = message
            .iter()
            .zip(&decoded.estimate)
            .filter(|(x, y)| x != y)
            .count() as u64;
        Counts {
            block: u64::from(bit > 0),
            bit,
        }
    });

    let (ci_low, ci_high) = wilson_interval(counts.block, config.trials, Z_95);
    let degrees = code.degrees();
    Ok(ExperimentReport {
        config: config.clone(),
        k,
        m: code.m(),
        trials: config.trials,
        block_errors: counts.block,
        bit_errors: counts.bit,
        block_error_rate: counts.block as f64 / config.trials as f64,
        ci_low,
        ci_high,
        zero_error_upper_bound: (counts.block == 0).then(|| 3.0 / config.trials as f64),
        fano: fano_lower_bound(&code, &params),
        majority: repetition.map(|r| MajorityAnalysis::new(&params, k, r)),
        encoded_rate: code.encoded_rate(),
        average_message_degree: degrees.average_message,
        average_parity_degree: degrees.average_parity,
        max_message_degree: degrees.max_message(),
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Empirical frequency of the tie-inclusive majority error event: bit 0 is
/// sent over `r + 1` copies and an error is a decoded 1. Returns the error
/// count.
pub fn monte_carlo_majority_bit_error(
    params: &ChannelParams,
    r: usize,
    trials: u64,
    seed: u64,
) -> u64 {
    run_trials(trials, |t| {
        let mut rng = trial_rng(seed, t);
        let received: Vec<ReceivedSymbol> = (0..=r)
            .map(|_| apply_noise(false, params.sample_one(&mut rng)))
            .collect();
        let decoded = majority_decode(&received, 1, r).expect("layout of k = 1");
        Counts {
            block: u64::from(decoded.estimate[0]),
            bit: 0,
        }
    })
    .block
}

/// `ceil(factor * log2 k)`, the repetition count of the logarithmic family.
pub fn log_repetitions(factor: f64, k: usize) -> usize {
    let r = (factor * (k as f64).log2()).ceil();
    if r.is_finite() && r > 0.0 {
        r as usize
    } else {
        0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Row {
    pub k: usize,
    pub r: usize,
    pub encoded_rate: f64,
    pub analysis: MajorityAnalysis,
    /// `1 / k`.
    pub target: f64,
    /// `k * exact_bit_error <= 1 / k`.
    pub satisfied: bool,
    pub monte_carlo: Option<ExperimentReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Table {
    pub factor: f64,
    pub params: ChannelParams,
    pub rows: Vec<Prop1Row>,
    /// Smallest integer factor meeting the target at every requested `k`.
    pub calibrated_factor: Option<u32>,
    /// `2 / -log2(2 sqrt(p0 p1) + p_er)`, enough by the Chernoff bound.
    pub chernoff_sufficient_factor: f64,
}

impl Prop1Table {
    pub fn all_satisfied(&self) -> bool {
        self.rows.iter().all(|row| row.satisfied)
    }

    pub fn to_json(&self) -> Json {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                Json::object([
                    ("k", Json::from(row.k)),
                    ("r", Json::from(row.r)),
                    ("encoded_rate", Json::from(row.encoded_rate)),
                    ("target", Json::from(row.target)),
                    ("satisfied", Json::from(row.satisfied)),
                    ("analysis", row.analysis.to_json()),
                    (
                        "monte_carlo",
                        row.monte_carlo
                            .as_ref()
                            .map_or(Json::Null, ExperimentReport::to_json),
                    ),
                ])
            })
            .collect();
        Json::object([
            ("factor", Json::from(self.factor)),
            (
                "channel",
                Json::object([
                    ("p1", Json::from(self.params.p1())),
                    ("p_er", Json::from(self.params.p_er())),
                ]),
            ),
            (
                "calibrated_factor",
                Json::from(self.calibrated_factor.map(|m| m as u64)),
            ),
            (
                "chernoff_sufficient_factor",
                Json::from(self.chernoff_sufficient_factor),
            ),
            ("all_satisfied", Json::from(self.all_satisfied())),
            ("rows", Json::Array(rows)),
        ])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "k,r,encoded_rate,exact_bit_error,union_bound,target,satisfied,chernoff_bound,empirical_block_error\n",
        );
        for row in &self.rows {
            let fmt = crate::format::sig17;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                row.k,
                row.r,
                fmt(row.encoded_rate),
                fmt(row.analysis.exact_bit_error),
                fmt(row.analysis.union_bound),
                fmt(row.target),
                row.satisfied,
                row.analysis.chernoff_bound.map(fmt).unwrap_or_default(),
                row.monte_carlo
                    .as_ref()
                    .map(|mc| fmt(mc.block_error_rate))
                    .unwrap_or_default(),
            ));
        }
        out
    }
}

fn require_majority_regime(params: &ChannelParams) -> Result<()> {
    if params.favours_majority() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "requires 2 p1 + p_er < 1, got {}",
            2.0 * params.p1() + params.p_er()
        )))
    }
}

/// Smallest integer factor `M >= 1` (up to 4096) such that
/// `k * exact_majority_bit_error(ceil(M log2 k)) <= 1 / k` for every `k`.
pub fn calibrate_factor(params: &ChannelParams, k_list: &[usize]) -> Result<Option<u32>> {
    require_majority_regime(params)?;
    if k_list.iter().any(|&k| k < 2) {
        return Err(Error::Precondition("every k must be at least 2".into()));
    }
    Ok((1..=4096u32).find(|&m| {
        k_list.iter().all(|&k| {
            let r = log_repetitions(m as f64, k);
            k as f64 * exact_majority_bit_error(params, r) <= 1.0 / k as f64
        })
    }))
}

/// Repetition codes with `r = ceil(factor log2 k)` checked against
/// `P_k <= 1/k` via the exact union bound. With `trials > 0` each row also
/// carries a Monte Carlo estimate, seeded with `seed`.
pub fn prop1_experiment(
    factor: f64,
    k_list: &[usize],
    params: &ChannelParams,
    trials: u64,
    seed: u64,
) -> Result<Prop1Table> {
    require_majority_regime(params)?;
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let r = log_repetitions(factor, k);
        if r == 0 {
            return Err(Error::Precondition(format!(
                "ceil({factor} log2 {k}) = 0 repetitions; need at least 1"
            )));
        }
        let analysis = MajorityAnalysis::new(params, k, r);
        let target = 1.0 / k as f64;
        let monte_carlo = if trials > 0 {
            Some(monte_carlo_error(&TrialConfig {
                code: CodeSource::Repetition { k, r },
                params: *params,
                decoder: DecoderKind::Majority,
                trials,
                seed,
            })?)
        } else {
            None
        };
        rows.push(Prop1Row {
            k,
            r,
            encoded_rate: 1.0 / (1.0 + r as f64),
            target,
            satisfied: k as f64 * analysis.exact_bit_error <= target,
            analysis,
            monte_carlo,
        });
    }
    let per_copy = 2.0 * (params.p0() * params.p1()).sqrt() + params.p_er();
    let chernoff_sufficient_factor = if per_copy > 0.0 {
        2.0 / -per_copy.log2()
    } else {
        0.0
    };
    let calibrated_factor = if k_list.iter().all(|&k| k >= 2) {
        calibrate_factor(params, k_list)?
    } else {
        None
    };
    Ok(Prop1Table {
        factor,
        params: *params,
        rows,
        calibrated_factor,
        chernoff_sufficient_factor,
    })
}

/// One code of a rate/degree trend.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub k: usize,
    pub m: usize,
    pub encoded_rate: f64,
    pub average_message_degree: f64,
    pub average_parity_degree: f64,
    pub fano: FanoBound,
}

impl TrendRow {
    fn from_code(code: &BipartiteCode, params: &ChannelParams) -> Self {
        let degrees = code.degrees();
        Self {
            k: code.k(),
            m: code.m(),
            encoded_rate: code.encoded_rate(),
            average_message_degree: degrees.average_message,
            average_parity_degree: degrees.average_parity,
            fano: fano_lower_bound(code, params),
        }
    }
}

pub fn trend_json(rows: &[TrendRow]) -> Json {
    Json::Array(
        rows.iter()
            .map(|row| {
                Json::object([
                    ("k", Json::from(row.k)),
                    ("m", Json::from(row.m)),
                    ("encoded_rate", Json::from(row.encoded_rate)),
                    (
                        "average_message_degree",
                        Json::from(row.average_message_degree),
                    ),
                    (
                        "average_parity_degree",
                        Json::from(row.average_parity_degree),
                    ),
                    ("fano", fano_json(&row.fano)),
                ])
            })
            .collect(),
    )
}

pub fn trend_csv(rows: &[TrendRow]) -> String {
    let fmt = crate::format::sig17;
    let mut out = String::from(
        "k,m,encoded_rate,average_message_degree,average_parity_degree,entropy_sum,fano_lower_bound\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.k,
            row.m,
            fmt(row.encoded_rate),
            fmt(row.average_message_degree),
            fmt(row.average_parity_degree),
            fmt(row.fano.entropy_sum),
            fmt(row.fano.lower_bound),
        ));
    }
    out
}

/// Number of parity nodes giving exactly `rate = k / (k + m)`.
pub fn parity_count_for_rate(k: usize, rate: f64) -> Result<usize> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Precondition(format!(
            "rate {rate} must lie in (0, 1]"
        )));
    }
    let exact = k as f64 * (1.0 - rate) / rate;
    let m = exact.round();
    if (m - exact).abs() > 1e-9 * exact.max(1.0) {
        return Err(Error::Precondition(format!(
            "rate {rate} is not attainable with k = {k} (needs m = {exact})"
        )));
    }
    Ok(m as usize)
}

/// Fixed rate and fixed parity degree: random codes whose Fano bound stays
/// away from zero as `k` grows.
pub fn theorem1_trend(
    rate: f64,
    parity_degree: usize,
    k_list: &[usize],
    params: &ChannelParams,
    seed: u64,
) -> Result<Vec<TrendRow>> {
    k_list
        .iter()
        .map(|&k| {
            let m = parity_count_for_rate(k, rate)?;
            let code = BipartiteCode::random_regular(k, m, parity_degree, seed)?;
            Ok(TrendRow::from_code(&code, params))
        })
        .collect()
}

/// Repetition codes with `r = ceil(factor log2 k)`: rate and Fano bound
/// both vanish.
pub fn repetition_trend(
    factor: f64,
    k_list: &[usize],
    params: &ChannelParams,
) -> Result<Vec<TrendRow>> {
    k_list
        .iter()
        .map(|&k| {
            let r = log_repetitions(factor, k);
            if r == 0 {
                return Err(Error::Precondition(format!(
                    "ceil({factor} log2 {k}) = 0 repetitions; need at least 1"
                )));
            }
            Ok(TrendRow::from_code(
                &BipartiteCode::repetition(k, r)?,
                params,
            ))
        })
        .collect()
}
