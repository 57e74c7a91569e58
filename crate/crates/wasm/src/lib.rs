//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Every entry point returns a JSON string; errors surface as a thrown string.

use wasm_bindgen::prelude::*;
use yles::ed::scan_gamma;
use yles::floquet::{make_schedule, run_floquet, ScheduleRequest};
use yles::numerics::UniformGrid;
use yles::quench::{response_curve, Backend};
use yles::{InitialState, ModelParams};

/// Largest chain offered in the browser; the dense solvers stay interactive below it.
pub const MAX_DEMO_SITES: usize = 8;

fn params(l: usize, hx: f64, gamma: f64) -> Result<ModelParams, String> {
    if l > MAX_DEMO_SITES {
        return Err(format!("L = {l} exceeds the demo limit of {MAX_DEMO_SITES}"));
    }
    ModelParams::new(l, 1.0, hx, gamma).map_err(|e| e.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn ed_scan_json(l: usize, hx: f64, gamma_max: f64, step: f64) -> Result<String, String> {
    let grid = UniformGrid::new(0.0, gamma_max, step).map_err(|e| e.to_string())?;
    let scan = scan_gamma(&params(l, hx, 0.0)?, &grid).map_err(|e| e.to_string())?;
    to_json(&scan)
}

pub fn response_json(l: usize, hx: f64, t: f64, gamma_max: f64, step: f64, psi0: &str) -> Result<String, String> {
    let grid = UniformGrid::new(0.0, gamma_max, step).map_err(|e| e.to_string())?;
    let psi0: InitialState = psi0.parse().map_err(|e: yles::Error| e.to_string())?;
    let curve = response_curve(Backend::Exact, &params(l, hx, 0.0)?, psi0, t, &grid)
        .map_err(|e| e.to_string())?;
    let kink = curve.detect_kink().ok();
    to_json(&serde_json::json!({ "curve": curve, "kink": kink }))
}

pub fn floquet_json(l: usize, hx: f64, gamma: f64, t: f64, n_cycles: usize) -> Result<String, String> {
    let schedule = make_schedule(&ScheduleRequest {
        target: params(l, hx, gamma)?,
        t_total: t,
        n_cycles,
        j0: 5.0,
        tau_x: 0.1,
        tau_gamma: 0.05,
        tau_j: None,
        tau_se: 0.0,
    })
    .map_err(|e| e.to_string())?;
    let run = run_floquet(&schedule, InitialState::AllDown).map_err(|e| e.to_string())?;
    to_json(&serde_json::json!({ "schedule": schedule, "run": run }))
}

#[wasm_bindgen]
pub fn ed_scan(l: usize, hx: f64, gamma_max: f64, step: f64) -> Result<String, JsValue> {
    ed_scan_json(l, hx, gamma_max, step).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn response(l: usize, hx: f64, t: f64, gamma_max: f64, step: f64, psi0: &str) -> Result<String, JsValue> {
    response_json(l, hx, t, gamma_max, step, psi0).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn floquet(l: usize, hx: f64, gamma: f64, t: f64, n_cycles: usize) -> Result<String, JsValue> {
    floquet_json(l, hx, gamma, t, n_cycles).map_err(|e| JsValue::from_str(&e))
}
