//! Browser bindings for the static demo page in `www/`.
//!
//! Each export takes plain numbers and strings and returns a JSON string,
//! so the page needs no generated TypeScript types. The `*_json` functions
//! are the same operations without the JS boundary, for native tests.

use nerf_core::certificates::{
    asymptotic_erasure_threshold, etf_nerf_max_p, group_nerf_max_p, max_gaussian_erasure_rate, mub_nerf_max_p,
};
use nerf_core::constructions::{gaussian_frame, mub_frame, sign_frame, simplex_group_frame, singer_etf};
use nerf_core::erasure::{
    binom_u128, certify_nerf, random_pattern, simulate_trials, CertificateReport, CertifyMode, CertifyOptions,
    SearchOptions,
};
use nerf_core::rng::{stream_rng, Stream};
use nerf_core::spectral::summarize_columns;
use nerf_core::{Frame, ScalarField, Tolerances};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Exhaustive search in the page is limited to this many patterns.
pub const DEMO_WORK_CAP: u64 = 200_000;
/// Frames larger than this are refused to keep the page responsive.
pub const DEMO_MAX_COLUMNS: usize = 400;

#[derive(Debug, Serialize)]
pub struct BoundCurves {
    pub m: usize,
    pub c: Vec<f64>,
    pub etf: Vec<f64>,
    pub mub: Vec<Option<f64>>,
    pub group: Vec<Option<f64>>,
    pub threshold: Vec<f64>,
    pub gaussian_max_p: f64,
}

/// Largest certified erasure rate against `C` on `steps + 1` evenly spaced
/// points. MUB and group entries are `null` where `M` is out of range.
pub fn bound_curves_json(m: usize, c_min: f64, c_max: f64, steps: usize) -> Result<String, String> {
    if !(c_min >= 1.0 && c_max > c_min && c_max.is_finite()) {
        return Err(format!("need 1 <= c_min < c_max, got {c_min}, {c_max}"));
    }
    if steps == 0 || steps > 10_000 {
        return Err("steps must be in 1..=10000".into());
    }
    let mut out = BoundCurves {
        m,
        c: Vec::new(),
        etf: Vec::new(),
        mub: Vec::new(),
        group: Vec::new(),
        threshold: Vec::new(),
        gaussian_max_p: max_gaussian_erasure_rate(),
    };
    for i in 0..=steps {
        let c = c_min + (c_max - c_min) * i as f64 / steps as f64;
        out.c.push(c);
        out.etf.push(etf_nerf_max_p(c).map_err(|e| e.to_string())?);
        out.mub.push(mub_nerf_max_p(m, c).ok());
        out.group.push(group_nerf_max_p(m, c).ok());
        out.threshold.push(asymptotic_erasure_threshold(c).map_err(|e| e.to_string())?);
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// `singer-etf` takes `q`; `mub` and `group-simplex` take `M`; `gaussian`
/// and `sign` take `M` and use `N = 4M`.
pub fn demo_frame(family: &str, param: u32, seed: u64) -> Result<Frame, String> {
    let m = param as usize;
    let frame = match family {
        "singer-etf" => singer_etf(param as u64),
        "mub" => mub_frame(m),
        "group-simplex" => simplex_group_frame(m),
        "gaussian" => gaussian_frame(m, 4 * m, seed, ScalarField::Complex),
        "sign" => sign_frame(m, 4 * m, seed),
        other => return Err(format!("unknown family {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    if frame.len() > DEMO_MAX_COLUMNS {
        return Err(format!("N = {} is too large for the demo (max {DEMO_MAX_COLUMNS})", frame.len()));
    }
    Ok(frame)
}

#[derive(Debug, Serialize)]
pub struct FrameProfile {
    pub family: String,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// Condition numbers of random `K`-subsets; `null` when rank deficient.
    pub sampled_conds: Vec<Option<f64>>,
    pub certificate: CertificateReport,
}

/// Certifies `frame` against `C` with `erased` columns removed (exhaustive
/// when the pattern count allows, otherwise the attacks), plus a sample of
/// random-pattern condition numbers for a histogram.
pub fn frame_profile_json(
    family: &str,
    param: u32,
    erased: usize,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<String, String> {
    let frame = demo_frame(family, param, seed)?;
    let n = frame.len();
    if erased >= n {
        return Err(format!("cannot erase {erased} of {n} columns"));
    }
    let k = n - erased;
    let mode = if binom_u128(n, k) <= DEMO_WORK_CAP as u128 {
        CertifyMode::Exhaustive
    } else {
        CertifyMode::Attacks
    };
    let opts = CertifyOptions {
        search: SearchOptions {
            work_cap: DEMO_WORK_CAP,
            workers: Some(1),
            ..SearchOptions::default()
        },
        trials: trials.max(1),
        seed,
        ..CertifyOptions::default()
    };
    let p = erased as f64 / n as f64;
    let certificate = certify_nerf(&frame, p, c, mode, &opts).map_err(|e| e.to_string())?;

    let tol = Tolerances::default();
    let mut rng = stream_rng(seed, Stream::Patterns);
    let mut sampled_conds = Vec::with_capacity(trials);
    for _ in 0..trials {
        let pattern = random_pattern(n, k, &mut rng).map_err(|e| e.to_string())?;
        let cond = summarize_columns(&frame.columns(pattern.survivors()), tol.rank).cond;
        sampled_conds.push(cond.is_finite().then_some(cond));
    }
    let out = FrameProfile {
        family: family.to_owned(),
        m: frame.dim(),
        n,
        k,
        sampled_conds,
        certificate,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct ScatterPoint {
    pub cond: f64,
    pub snr: f64,
    pub error_ratio: f64,
    pub cond_bound_ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct ChannelScatter {
    pub m: usize,
    pub n: usize,
    pub points: Vec<ScatterPoint>,
    pub rank_deficient_draws: usize,
    pub max_excess: f64,
}

/// Noisy erasure channel at rate `p`: one point per decodable trial,
/// relative error against `cond / snr`.
pub fn channel_scatter_json(
    family: &str,
    param: u32,
    p: f64,
    trials: usize,
    noise: f64,
    seed: u64,
) -> Result<String, String> {
    let frame = demo_frame(family, param, seed)?;
    let summary = simulate_trials(&frame, p, trials, noise, seed).map_err(|e| e.to_string())?;
    let points = summary
        .trials
        .iter()
        .filter_map(|t| t.outcome.as_ref())
        .map(|r| ScatterPoint {
            cond: r.cond,
            snr: r.snr,
            error_ratio: r.error_ratio,
            cond_bound_ratio: r.cond_bound_ratio,
        })
        .collect();
    let out = ChannelScatter {
        m: frame.dim(),
        n: frame.len(),
        points,
        rank_deficient_draws: summary.rank_deficient_draws,
        max_excess: summary.max_excess,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn bound_curves(m: u32, c_min: f64, c_max: f64, steps: u32) -> Result<String, JsValue> {
    bound_curves_json(m as usize, c_min, c_max, steps as usize).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn frame_profile(family: &str, param: u32, erased: u32, c: f64, trials: u32, seed: u32) -> Result<String, JsValue> {
    frame_profile_json(family, param, erased as usize, c, trials as usize, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn channel_scatter(family: &str, param: u32, p: f64, trials: u32, noise: f64, seed: u32) -> Result<String, JsValue> {
    channel_scatter_json(family, param, p, trials as usize, noise, seed as u64).map_err(|e| JsValue::from_str(&e))
}
