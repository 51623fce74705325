//! Adiabatic elimination of the pumped |0⟩ ↔ |E_y⟩ transition.
//!
//! With `Γ_t = Γ₀ + Γ₊₁ + Γ₋₁` and `D = 4Δ_e² + Γ_t²`, second-order
//! perturbation theory in Ω_p gives the repump rates
//! `Γ_op^{±1} = Γ_{±1} Ω_p²/D`, the dephasing `Γ_op^0 = Γ₀ Ω_p²/D` and the
//! light shift `−Δ_e Ω_p²/D` of |0⟩.

use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EffectiveRates {
    pub gamma_op_p1: f64,
    pub gamma_op_m1: f64,
    pub gamma_op_0: f64,
    pub stark_shift_0: f64,
    /// Set by [`renormalized_decays`]; zero until then.
    pub gamma_plus_eff: f64,
    pub gamma_minus_eff: f64,
    /// `Γ_t`
    pub total_linewidth: f64,
}

impl EffectiveRates {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_op_p1", self.gamma_op_p1),
            ("gamma_op_m1", self.gamma_op_m1),
            ("gamma_op_0", self.gamma_op_0),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be ≥ 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Ω_p above Γ_t leaves the perturbative regime of the elimination.
    pub fn perturbative(rabi_pump: f64, total_linewidth: f64) -> bool {
        rabi_pump <= total_linewidth
    }
}

fn lorentz_factor(
    rabi_pump: f64,
    pump_detuning: f64,
    gamma_0: f64,
    gamma_p1: f64,
    gamma_m1: f64,
) -> Result<(f64, f64)> {
    for (name, v) in [
        ("big_gamma_0", gamma_0),
        ("big_gamma_p1", gamma_p1),
        ("big_gamma_m1", gamma_m1),
    ] {
        if !(v >= 0.0) {
            return Err(Error::param(name, "must be ≥ 0"));
        }
    }
    let gt = gamma_0 + gamma_p1 + gamma_m1;
    let denom = 4.0 * pump_detuning * pump_detuning + gt * gt;
    if denom == 0.0 {
        return Err(Error::DegeneratePump);
    }
    Ok((rabi_pump * rabi_pump / denom, gt))
}

pub fn effective_pump_rates(
    rabi_pump: f64,
    pump_detuning: f64,
    gamma_0: f64,
    gamma_p1: f64,
    gamma_m1: f64,
) -> Result<EffectiveRates> {
    let (f, gt) = lorentz_factor(rabi_pump, pump_detuning, gamma_0, gamma_p1, gamma_m1)?;
    if !EffectiveRates::perturbative(rabi_pump, gt) {
        log::warn!(
            "pump Rabi frequency {rabi_pump} exceeds the E_y linewidth {gt}; effective rates are outside their perturbative regime"
        );
    }
    Ok(EffectiveRates {
        gamma_op_p1: gamma_p1 * f,
        gamma_op_m1: gamma_m1 * f,
        gamma_op_0: gamma_0 * f,
        stark_shift_0: -pump_detuning * f,
        gamma_plus_eff: 0.0,
        gamma_minus_eff: 0.0,
        total_linewidth: gt,
    })
}

/// Light shift of |0⟩, `−Δ_e Ω_p² / (4Δ_e² + Γ_t²)`.
pub fn stark_shift(
    rabi_pump: f64,
    pump_detuning: f64,
    gamma_0: f64,
    gamma_p1: f64,
    gamma_m1: f64,
) -> Result<f64> {
    let (f, _) = lorentz_factor(rabi_pump, pump_detuning, gamma_0, gamma_p1, gamma_m1)?;
    Ok(-pump_detuning * f)
}

/// `γ_± = γ_{±1} + Γ_op^{±1}`. Their sum is the Γ of the Λ model.
pub fn renormalized_decays(gamma_p1: f64, gamma_m1: f64, rates: &EffectiveRates) -> (f64, f64) {
    (gamma_p1 + rates.gamma_op_p1, gamma_m1 + rates.gamma_op_m1)
}

/// Pump rates for the pump fields stored in `params`, with the
/// renormalized decays filled in.
pub fn effective_rates_for(params: &ModelParams) -> Result<EffectiveRates> {
    let mut r = effective_pump_rates(
        params.rabi_pump,
        params.pump_detuning,
        params.big_gamma_0,
        params.big_gamma_p1,
        params.big_gamma_m1,
    )?;
    let (gp, gm) = renormalized_decays(params.gamma_p1, params.gamma_m1, &r);
    r.gamma_plus_eff = gp;
    r.gamma_minus_eff = gm;
    Ok(r)
}
