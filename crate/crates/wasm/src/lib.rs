//! WebAssembly bindings behind `www/index.html`.
//!
//! Each exported function returns a flat `Float64Array`; the page knows the
//! layout. The plain-Rust versions carry the logic and are tested natively.

use wasm_bindgen::prelude::*;

use converse_core::decoders::{chernoff_bound, exact_majority_conditional_errors};
use converse_core::entropy::{fano_lower_bound, GTable};
use converse_core::harness::{log_repetitions, parity_count_for_rate};
use converse_core::{BipartiteCode, ChannelParams, Error};

/// `G(0), ..., G(dmax)`.
pub fn g_values(p1: f64, p_er: f64, dmax: usize) -> Result<Vec<f64>, Error> {
    let params = ChannelParams::new(p1, p_er)?;
    Ok(GTable::new(params, dmax).values().to_vec())
}

/// For `r = 1..=rmax`, the rows `[r, exact_bit_error, error_given_one,
/// chernoff_bound]`. The Chernoff column is NaN when `2 p1 + p_er >= 1`.
pub fn majority_rows(p1: f64, p_er: f64, rmax: usize) -> Result<Vec<f64>, Error> {
    let params = ChannelParams::new(p1, p_er)?;
    let mut out = Vec::with_capacity(4 * rmax);
    for r in 1..=rmax {
        let (e0, e1) = exact_majority_conditional_errors(&params, r);
        let bound = chernoff_bound(&params, r).map_or(f64::NAN, |c| c.chernoff_bound);
        out.extend([r as f64, e0, e1, bound]);
    }
    Ok(out)
}

/// For `k = 2^4, 2^5, ..., 2^max_log2k`, the rows `[k, fano_random_regular,
/// rate_random_regular, fano_repetition, rate_repetition]`: random codes at
/// fixed `rate` and parity degree against repetition codes with
/// `r = ceil(log2 k)`.
pub fn trend_rows(
    p1: f64,
    p_er: f64,
    rate: f64,
    parity_degree: usize,
    max_log2k: u32,
    seed: u64,
) -> Result<Vec<f64>, Error> {
    let params = ChannelParams::new(p1, p_er)?;
    let mut out = Vec::new();
    for exp in 4..=max_log2k {
        let k = 1usize << exp;
        let m = parity_count_for_rate(k, rate)?;
        let random = BipartiteCode::random_regular(k, m, parity_degree, seed)?;
        let repetition = BipartiteCode::repetition(k, log_repetitions(1.0, k))?;
        out.extend([
            k as f64,
            fano_lower_bound(&random, &params).lower_bound,
            random.encoded_rate(),
            fano_lower_bound(&repetition, &params).lower_bound,
            repetition.encoded_rate(),
        ]);
    }
    Ok(out)
}

fn js_err(err: Error) -> JsError {
    JsError::new(&err.to_string())
}

#[wasm_bindgen]
pub fn g_curve(p1: f64, p_er: f64, dmax: usize) -> Result<Vec<f64>, JsError> {
    g_values(p1, p_er, dmax).map_err(js_err)
}

#[wasm_bindgen]
pub fn majority_curves(p1: f64, p_er: f64, rmax: usize) -> Result<Vec<f64>, JsError> {
    majority_rows(p1, p_er, rmax).map_err(js_err)
}

#[wasm_bindgen]
pub fn fano_trend(
    p1: f64,
    p_er: f64,
    rate: f64,
    parity_degree: usize,
    max_log2k: u32,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    trend_rows(p1, p_er, rate, parity_degree, max_log2k, seed).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_values_pure_erasure() {
        let g = g_values(0.0, 0.5, 3).unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[3] - 0.0625).abs() < 1e-15);
        assert!(g_values(0.8, 0.8, 3).is_err());
    }

    #[test]
    fn majority_rows_layout() {
        let rows = majority_rows(0.1, 0.0, 3).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!(rows[8], 3.0);
        assert!((rows[11] - 0.1296).abs() < 1e-15);
        assert!(rows[9] <= rows[11]);
        let outside = majority_rows(0.4, 0.3, 2).unwrap();
        assert!(outside[3].is_nan());
    }

    #[test]
    fn trend_rows_layout() {
        let rows = trend_rows(0.0, 0.3, 0.5, 3, 6, 1).unwrap();
        assert_eq!(rows.len(), 15);
        assert_eq!(rows[0], 16.0);
        assert_eq!(rows[2], 0.5);
        assert!(trend_rows(0.0, 0.3, 0.3, 3, 6, 1).is_err());
    }
}
