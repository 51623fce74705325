//! wasm-bindgen exports for the static page in `www/`.
//!
//! All inputs are in units of ω_m unless the argument name carries a unit.
//! Curves are returned as flat `Float64Array`s.

use wasm_bindgen::prelude::*;

use eitcool::analytics::{absorption_spectrum, linspace, rates, robustness_sweep, SpectrumValues};
use eitcool::constants::TWO_PI;
use eitcool::model::dressed_states;
use eitcool::ModelParams;

fn drive(rabi: f64, detuning: f64, gamma: f64) -> ModelParams {
    let mut p = ModelParams::reference().with_gamma_total(gamma);
    p.rabi_omega0 = rabi;
    p.detuning = detuning;
    p
}

pub fn absorption_curve(
    rabi: f64,
    detuning: f64,
    gamma: f64,
    start: f64,
    stop: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let p = drive(rabi, detuning, gamma);
    let grid = linspace(start, stop, points);
    match absorption_spectrum(&p, &grid).map_err(|e| e.to_string())?.values {
        SpectrumValues::Absorption(v) => Ok(v),
        SpectrumValues::Complex(_) => Err("unexpected complex spectrum".into()),
    }
}

/// Rows of `[m_R, A₊, A₋, W]` at the optimal detuning.
pub fn rate_table(gamma: f64, eta: f64, m_start: f64, m_stop: f64, points: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * points);
    for m in linspace(m_start, m_stop, points) {
        let mut p = ModelParams::reference().with_gamma_total(gamma).with_rabi_ratio(m);
        p.eta = eta;
        let r = rates(&p);
        out.extend([m, r.a_plus, r.a_minus, r.w]);
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn robustness_curve(
    m_r: f64,
    gamma: f64,
    eta: f64,
    omega_m_mhz: f64,
    temperature_mk: f64,
    max_deviation: f64,
    points: usize,
    gamma_mech_hz: f64,
) -> Result<Vec<f64>, String> {
    let mut p = ModelParams::reference().with_gamma_total(gamma);
    p.omega_m = TWO_PI * omega_m_mhz * 1e6;
    p.eta = eta;
    p.temperature = temperature_mk * 1e-3;
    let g = p.hz_to_internal(gamma_mech_hz);
    let devs = linspace(-max_deviation, max_deviation, points);
    let mut curves = robustness_sweep(&p, m_r, &devs, &[g]).map_err(|e| e.to_string())?;
    Ok(curves.remove(0))
}

#[wasm_bindgen]
pub fn absorption(
    rabi: f64,
    detuning: f64,
    gamma: f64,
    start: f64,
    stop: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    absorption_curve(rabi, detuning, gamma, start, stop, points).map_err(|e| JsError::new(&e))
}

/// `[E₋, E₊]`.
#[wasm_bindgen]
pub fn dressed_energies(rabi: f64, detuning: f64) -> Result<Vec<f64>, JsError> {
    let d = dressed_states(&drive(rabi, detuning, 1.0)).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(vec![d.e_minus, d.e_plus])
}

#[wasm_bindgen]
pub fn rates_vs_mr(gamma: f64, eta: f64, m_start: f64, m_stop: f64, points: usize) -> Vec<f64> {
    rate_table(gamma, eta, m_start, m_stop, points)
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn robustness(
    m_r: f64,
    gamma: f64,
    eta: f64,
    omega_m_mhz: f64,
    temperature_mk: f64,
    max_deviation: f64,
    points: usize,
    gamma_mech_hz: f64,
) -> Result<Vec<f64>, JsError> {
    robustness_curve(m_r, gamma, eta, omega_m_mhz, temperature_mk, max_deviation, points, gamma_mech_hz)
        .map_err(|e| JsError::new(&e))
}
