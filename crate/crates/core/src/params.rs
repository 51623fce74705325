//! Model parameters. Every rate, energy and coupling is stored in units of
//! the mechanical angular frequency ω_m; only `omega_m` itself is in rad/s.

use crate::constants::TWO_PI;
use crate::error::{Error, Result};

/// Mechanical bath model. `Zero` keeps only the damping channel γ_m b;
/// `Thermal` uses γ_m(N+1) on b and γ_m N on b†.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Bath {
    #[default]
    Zero,
    Thermal,
}

impl std::str::FromStr for Bath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Bath::Zero),
            "thermal" => Ok(Bath::Thermal),
            other => Err(Error::Invalid(format!(
                "bath must be `zero` or `thermal`, got `{other}`"
            ))),
        }
    }
}

/// SI description of the cantilever and field gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// kg
    pub mass: f64,
    /// T/m
    pub mfg: f64,
    /// T
    pub bias: f64,
    /// Zero-point amplitude override in m.
    pub x0: Option<f64>,
    pub g_e: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Mechanical angular frequency in rad/s (the unit of everything else).
    pub omega_m: f64,
    pub rabi_omega0: f64,
    /// Common detuning Δ of both Λ legs.
    pub detuning: f64,
    pub gamma_total: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_p1: f64,
    pub gamma_m1: f64,
    pub gamma_0: f64,
    pub gamma_dark: f64,
    pub gamma_s: f64,
    /// E_y decay to |0⟩.
    pub big_gamma_0: f64,
    /// E_y decay to |+1⟩.
    pub big_gamma_p1: f64,
    /// E_y decay to |−1⟩.
    pub big_gamma_m1: f64,
    pub rabi_pump: f64,
    /// Δ_e = ω_e − ω_p.
    pub pump_detuning: f64,
    /// Lamb-Dicke parameter η = λ/ω_m (so λ = η in these units).
    pub eta: f64,
    pub quality_q: f64,
    /// Kelvin.
    pub temperature: f64,
    pub gamma_mech: f64,
    /// Rotating-frame offset of |0⟩.
    pub omega_0: f64,
    /// Rotating-frame offset of |¹A₁⟩.
    pub omega_s: f64,
    /// Static energy shift of |−1⟩ (quasi-static nuclear field).
    pub nuclear_shift: f64,
    pub bath: Bath,
    pub physical: Option<PhysicalParams>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl ModelParams {
    /// ω_m = 2π·1 MHz, m_R = 8 at its optimal detuning, Γ = 15, η = 0.115,
    /// Q = 1e5, T = 20 mK.
    pub fn reference() -> Self {
        let gamma = 15.0;
        ModelParams {
            omega_m: TWO_PI * 1e6,
            rabi_omega0: 8.0,
            detuning: 31.0,
            gamma_total: gamma,
            gamma_plus: gamma / 2.0,
            gamma_minus: gamma / 2.0,
            gamma_p1: gamma / 2.0,
            gamma_m1: gamma / 2.0,
            gamma_0: 0.0,
            gamma_dark: 0.0,
            gamma_s: 0.0,
            big_gamma_0: 0.0,
            big_gamma_p1: 0.0,
            big_gamma_m1: 0.0,
            rabi_pump: 0.0,
            pump_detuning: 0.0,
            eta: 0.115,
            quality_q: 1e5,
            temperature: 0.02,
            gamma_mech: 1e-5,
            omega_0: 0.0,
            omega_s: 0.0,
            nuclear_shift: 0.0,
            bath: Bath::Zero,
            physical: None,
        }
    }

    /// Recycling parameter set: Ω₀ = 6, Δ = 10, Γ = 15, γ_{±1} = Γ/2,
    /// Γ_dark = Γ/130, Γ₀ = Γ, Γ_{±1} = Γ/150, γ_s = Γ/33, γ₀ = 0.1Γ,
    /// Ω_p = Γ, Δ_e = 0. γ_± are set to γ_{±1} + Γ_op^{±1} and `gamma_total`
    /// to their sum, which slightly exceeds the nominal Γ = 15 used for the
    /// other rates.
    pub fn recycling_reference() -> Self {
        let g = 15.0;
        let mut p = ModelParams {
            rabi_omega0: 6.0,
            detuning: 10.0,
            gamma_total: g,
            gamma_p1: g / 2.0,
            gamma_m1: g / 2.0,
            gamma_0: 0.1 * g,
            gamma_dark: g / 130.0,
            gamma_s: g / 33.0,
            big_gamma_0: g,
            big_gamma_p1: g / 150.0,
            big_gamma_m1: g / 150.0,
            rabi_pump: g,
            pump_detuning: 0.0,
            ..Self::reference()
        };
        let rates = crate::effective::effective_pump_rates(
            p.rabi_pump,
            p.pump_detuning,
            p.big_gamma_0,
            p.big_gamma_p1,
            p.big_gamma_m1,
        )
        .expect("reference pump parameters are not degenerate");
        let (gp, gm) = crate::effective::renormalized_decays(p.gamma_p1, p.gamma_m1, &rates);
        p.gamma_plus = gp;
        p.gamma_minus = gm;
        p.gamma_total = gp + gm;
        p
    }

    /// Optimal-detuning setting for a Rabi ratio m_R: Ω₀ = m_R, Δ = (m_R² − 2)/2.
    pub fn with_rabi_ratio(mut self, m_r: f64) -> Self {
        self.rabi_omega0 = m_r;
        self.detuning = optimal_detuning(m_r);
        self
    }

    /// Set Γ and split it evenly into γ_±.
    pub fn with_gamma_total(mut self, gamma: f64) -> Self {
        self.gamma_total = gamma;
        self.gamma_plus = gamma / 2.0;
        self.gamma_minus = gamma / 2.0;
        self.gamma_p1 = gamma / 2.0;
        self.gamma_m1 = gamma / 2.0;
        self
    }

    /// Set Q and the matching γ_m = 1/Q.
    pub fn with_quality(mut self, q: f64) -> Self {
        self.quality_q = q;
        self.gamma_mech = 1.0 / q;
        self
    }

    /// λ in ω_m units (equal to η).
    pub fn lambda(&self) -> f64 {
        self.eta
    }

    /// Thermal occupation N(ω_m) of the mechanical bath.
    pub fn thermal_n(&self) -> f64 {
        crate::analytics::thermal_occupation(self.omega_m, self.temperature)
    }

    /// Convert an angular frequency in rad/s to ω_m units.
    pub fn to_internal(&self, angular: f64) -> f64 {
        angular / self.omega_m
    }

    /// Convert an ordinary frequency in Hz to ω_m units.
    pub fn hz_to_internal(&self, hz: f64) -> f64 {
        TWO_PI * hz / self.omega_m
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m > 0.0 && self.omega_m.is_finite()) {
            return Err(Error::param("omega_m", "must be positive and finite"));
        }
        let rates: [(&'static str, f64); 17] = [
            ("gamma_total", self.gamma_total),
            ("gamma_plus", self.gamma_plus),
            ("gamma_minus", self.gamma_minus),
            ("gamma_p1", self.gamma_p1),
            ("gamma_m1", self.gamma_m1),
            ("gamma_0", self.gamma_0),
            ("gamma_dark", self.gamma_dark),
            ("gamma_s", self.gamma_s),
            ("big_gamma_0", self.big_gamma_0),
            ("big_gamma_p1", self.big_gamma_p1),
            ("big_gamma_m1", self.big_gamma_m1),
            ("rabi_pump", self.rabi_pump),
            ("rabi_omega0", self.rabi_omega0),
            ("eta", self.eta),
            ("gamma_mech", self.gamma_mech),
            ("temperature", self.temperature),
            ("quality_q", self.quality_q),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be ≥ 0 and finite, got {v}")));
            }
        }
        if !(self.quality_q > 0.0) {
            return Err(Error::param("quality_q", "must be > 0"));
        }
        if self.gamma_plus + self.gamma_minus > self.gamma_total * (1.0 + 1e-9) {
            return Err(Error::param(
                "gamma_plus",
                format!(
                    "γ₊ + γ₋ = {} exceeds Γ = {}",
                    self.gamma_plus + self.gamma_minus,
                    self.gamma_total
                ),
            ));
        }
        for (name, v) in [
            ("detuning", self.detuning),
            ("pump_detuning", self.pump_detuning),
            ("omega_0", self.omega_0),
            ("omega_s", self.omega_s),
            ("nuclear_shift", self.nuclear_shift),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if let Some(ph) = &self.physical {
            if !(ph.mass > 0.0) {
                return Err(Error::param("physical.mass", "must be > 0"));
            }
            if ph.x0.is_some_and(|x| !(x > 0.0)) {
                return Err(Error::param("physical.x0", "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Δ = (m_R² − 2)/2, which puts E₊ exactly one phonon above the dark state.
pub fn optimal_detuning(m_r: f64) -> f64 {
    (m_r * m_r - 2.0) / 2.0
}
