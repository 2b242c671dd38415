//! Browser bindings for three interactive views: a radial curvature
//! profile, the spectral gap `λ₁² - 96 F2/Vol` along a family of radial
//! bumps, and the Gauss-Bonnet breakdown of geodesic caps.
//!
//! The plain functions are what the bindings call; they also run natively.

use hemicheck::conformal::f2_parts;
use hemicheck::curvature::{models, point_curvature};
use hemicheck::spectral::lambda1_extrapolated;
use hemicheck::verify::cgb4_terms;
use hemicheck::{model, BallGrid, Result};
use wasm_bindgen::prelude::*;

/// Coarser than the command-line defaults so the page stays responsive.
const RADIAL: usize = 32;
const FD_STEP: f64 = 1e-3;

/// `[r, R, |E|², |W|²]` per sample along the first coordinate axis, at
/// `samples` evenly spaced radii in `[0, 1]`.
pub fn profile(model_name: &str, dim: usize, samples: usize) -> Result<Vec<f64>> {
    let m = model(model_name, dim)?;
    let grid = BallGrid::build(dim, RADIAL, 4, FD_STEP, m.rotationally_symmetric)?;
    let samples = samples.max(2);
    let mut out = Vec::with_capacity(4 * samples);
    let mut x = vec![0.0; dim];
    for i in 0..samples {
        let r = i as f64 / (samples - 1) as f64;
        x[0] = r;
        let pc = point_curvature(&m, &grid, &x)?;
        out.extend([r, pc.scalar, pc.trace_free_norm_sq, pc.weyl_norm_sq]);
    }
    Ok(out)
}

/// `[a, λ₁², 96 F2/Vol, gap]` for `radial_bump(seed, a)` at each amplitude;
/// amplitude 0 is the hemisphere.
pub fn gap_curve(seed: u64, amplitudes: &[f64], mesh: usize) -> Result<Vec<f64>> {
    let grid = BallGrid::build(4, RADIAL, 4, FD_STEP, true)?;
    let mut out = Vec::with_capacity(4 * amplitudes.len());
    for &a in amplitudes {
        let m = if a == 0.0 {
            models::hemisphere(4)
        } else {
            models::radial_bump(4, seed, a)?
        };
        let lambda = lambda1_extrapolated(&m, mesh)?.lambda1;
        let p = f2_parts(&m, &grid)?;
        let bound = 96.0 * p.total() / p.volume;
        out.extend([a, lambda * lambda, bound, lambda * lambda - bound]);
    }
    Ok(out)
}

/// `[∫|W|², ∫(R²/6 - 2|E|²), 8∫𝓑, χ̂]` for the cap of stereographic radius `a`.
pub fn cap_breakdown(a: f64) -> Result<Vec<f64>> {
    let grid = BallGrid::build(4, RADIAL, 4, FD_STEP, true)?;
    let t = cgb4_terms(&models::cap(4, a)?, &grid)?;
    Ok(vec![t.weyl, t.scalar, t.boundary, t.chi()])
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = curvatureProfile)]
pub fn curvature_profile_js(
    model_name: &str,
    dim: usize,
    samples: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(profile(model_name, dim, samples))
}

#[wasm_bindgen(js_name = gapCurve)]
pub fn gap_curve_js(
    seed: u32,
    amplitudes: Vec<f64>,
    mesh: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(gap_curve(u64::from(seed), &amplitudes, mesh))
}

#[wasm_bindgen(js_name = capBreakdown)]
pub fn cap_breakdown_js(a: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(cap_breakdown(a))
}
