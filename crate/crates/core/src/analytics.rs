//! Closed-form cooling theory and the phonon rate equation.
//!
//! Rates are in units of ω_m. The fluctuation spectrum of the force operator
//! is
//!
//! ```text
//! S(ω) = η² (Ω₀²/2) · 2iω / (iΓω + 2Δω + 2ω² − Ω₀²)
//! ```
//!
//! and the heating/cooling coefficients are `A± = 2 Re S(∓1)`.

mod bloch;

use std::io::Write;

use num_complex::Complex64 as C64;

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::params::{optimal_detuning, ModelParams};

pub use bloch::{
    absorption_spectrum, bloch_matrix, bloch_observables, bloch_steady_state,
    correlation_transform_numeric, correlation_transform_quadrature, density_from_bloch,
    spectral_abscissa, BlochSystem, BLOCH_VARIABLES,
};

const POLE_TOL: f64 = 1e-14;

/// Bose occupation `1/(exp(ħω/k_BT) − 1)` for ω in rad/s and T in kelvin.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

/// `∫₀^∞ dt e^{iωt} ⟨σ_y^{A2,d}(t) σ_y^{A2,d}(0)⟩_ss = 2iω / (iΓω + 2Δω + 2ω² − Ω₀²)`.
pub fn correlation_transform(params: &ModelParams, omega: f64) -> Result<C64> {
    let (g, d, o) = (params.gamma_total, params.detuning, params.rabi_omega0);
    let den = C64::new(2.0 * d * omega + 2.0 * omega * omega - o * o, g * omega);
    if den.norm() < POLE_TOL {
        return Err(Error::SpectrumPole {
            omega,
            magnitude: den.norm(),
        });
    }
    Ok(C64::new(0.0, 2.0 * omega) / den)
}

pub fn fluctuation_spectrum(params: &ModelParams, omega: f64) -> Result<C64> {
    let pref = params.eta * params.eta * params.rabi_omega0 * params.rabi_omega0 / 2.0;
    Ok(correlation_transform(params, omega)? * pref)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub a_plus: f64,
    pub a_minus: f64,
    pub w: f64,
    /// `(A₊ + Nγ_m)/(W + γ_m)`; `None` when `W + γ_m ≤ 0`.
    pub n_ss: Option<f64>,
    pub thermal_n: f64,
    pub gamma_mech: f64,
}

impl RateReport {
    fn new(a_plus: f64, a_minus: f64, gamma_mech: f64, thermal_n: f64) -> Self {
        let w = a_minus - a_plus;
        let n_ss = if w + gamma_mech > 0.0 {
            Some((a_plus + thermal_n * gamma_mech) / (w + gamma_mech))
        } else {
            None
        };
        RateReport {
            a_plus,
            a_minus,
            w,
            n_ss,
            thermal_n,
            gamma_mech,
        }
    }

    /// `key = value` lines.
    pub fn write_block<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "a_plus = {:.16e}", self.a_plus)?;
        writeln!(w, "a_minus = {:.16e}", self.a_minus)?;
        writeln!(w, "w = {:.16e}", self.w)?;
        match self.n_ss {
            Some(n) => writeln!(w, "n_ss = {n:.16e}")?,
            None => writeln!(w, "n_ss = heating")?,
        }
        writeln!(w, "thermal_n = {:.16e}", self.thermal_n)?;
        writeln!(w, "gamma_mech = {:.16e}", self.gamma_mech)
    }
}

fn a_pm(gamma: f64, eta: f64, rabi: f64, detuning: f64) -> (f64, f64) {
    let num = 2.0 * gamma * eta * eta * rabi * rabi;
    let half = rabi * rabi / 2.0;
    let a_plus = num / (gamma * gamma + 4.0 * (half + detuning - 1.0).powi(2));
    let a_minus = num / (gamma * gamma + 4.0 * (half - detuning - 1.0).powi(2));
    (a_plus, a_minus)
}

/// `A± = 2Γη²Ω₀² / (Γ² + 4(Ω₀²/2 ± Δ − 1)²)`, with the thermal bath of `params`.
pub fn rates(params: &ModelParams) -> RateReport {
    let (ap, am) = a_pm(
        params.gamma_total,
        params.eta,
        params.rabi_omega0,
        params.detuning,
    );
    RateReport::new(ap, am, params.gamma_mech, params.thermal_n())
}

/// Coefficients at Δ = (m_R² − 2)/2:
/// `A₊ = 2η²m_R²Γ / (4(m_R² − 2)² + Γ²)`, `A₋ = 2η²m_R²/Γ`.
/// No mechanical bath (γ_m = 0, N = 0).
pub fn rates_at_optimum(m_r: f64, gamma_total: f64, eta: f64) -> Result<RateReport> {
    if !(m_r > 0.0) {
        return Err(Error::param("m_r", "must be > 0"));
    }
    if !(gamma_total > 0.0) {
        return Err(Error::param("gamma_total", "must be > 0"));
    }
    let m2 = m_r * m_r;
    let e2 = eta * eta;
    let a_plus = e2 * 2.0 * m2 * gamma_total / (4.0 * (m2 - 2.0).powi(2) + gamma_total.powi(2));
    let a_minus = e2 * 2.0 * m2 / gamma_total;
    Ok(RateReport::new(a_plus, a_minus, 0.0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyPhonon {
    /// Exact rate-model quotient `(A₊ + Nγ_m)/(W + γ_m)`.
    pub n_ss: f64,
    /// `(Γ/4Δ)²`, only at the optimal detuning.
    pub backaction: Option<f64>,
    /// `Nγ_m/W`, only at the optimal detuning.
    pub thermal_term: Option<f64>,
}

impl SteadyPhonon {
    pub fn approximation(&self) -> Option<f64> {
        Some(self.backaction? + self.thermal_term?)
    }
}

pub fn steady_phonon(params: &ModelParams, rates: &RateReport) -> Result<SteadyPhonon> {
    let denom = rates.w + rates.gamma_mech;
    if !(denom > 0.0) {
        return Err(Error::NetHeating(denom));
    }
    let n_ss = (rates.a_plus + rates.thermal_n * rates.gamma_mech) / denom;
    let at_optimum = (params.detuning - optimal_detuning(params.rabi_omega0)).abs()
        <= 1e-9 * params.detuning.abs().max(1.0);
    let (backaction, thermal_term) = if at_optimum && params.detuning != 0.0 && rates.w > 0.0 {
        (
            Some((params.gamma_total / (4.0 * params.detuning)).powi(2)),
            Some(rates.thermal_n * rates.gamma_mech / rates.w),
        )
    } else {
        (None, None)
    };
    Ok(SteadyPhonon {
        n_ss,
        backaction,
        thermal_term,
    })
}

/// ⟨n⟩_ss = (A₊ + Nγ_m)/(W + γ_m) against the fractional Rabi error
/// (Ω₀′ − Ω₀)/Ω₀, with Δ held at the optimum of the nominal Ω₀ = m_R.
/// Returns one curve per entry of `gamma_mech` (units ω_m).
pub fn robustness_sweep(
    base: &ModelParams,
    m_r: f64,
    deviations: &[f64],
    gamma_mech: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let nominal = base.clone().with_rabi_ratio(m_r);
    gamma_mech
        .iter()
        .map(|&g| {
            deviations
                .iter()
                .map(|&d| {
                    let mut p = nominal.clone();
                    p.rabi_omega0 = m_r * (1.0 + d);
                    p.gamma_mech = g;
                    let r = rates(&p);
                    steady_phonon(&p, &r).map(|s| s.n_ss)
                })
                .collect()
        })
        .collect()
}

/// `⟨n(t)⟩ = n_ss + e^{−(W+γ_m)t}(N − n_ss)`.
pub fn analytic_trajectory(rates: &RateReport, gamma_m: f64, thermal_n: f64, t: f64) -> f64 {
    let k = rates.w + gamma_m;
    let n_ss = (rates.a_plus + thermal_n * gamma_m) / k;
    n_ss + (-k * t).exp() * (thermal_n - n_ss)
}

/// Bose–Einstein distribution with mean `mean` on `0..=n_max`, renormalized.
pub fn bose_einstein(mean: f64, n_max: usize) -> Vec<f64> {
    let r = mean / (1.0 + mean);
    let mut p: Vec<f64> = (0..=n_max).map(|n| r.powi(n as i32)).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTrajectory {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub distributions: Vec<Vec<f64>>,
    /// Largest P(n_max) seen at a sample.
    pub max_tail: f64,
}

pub const RATE_LEAKAGE: f64 = 1e-6;

/// Birth–death chain for P(n):
///
/// `dP(n)/dt = D[(n+1)P(n+1) − nP(n)] + U[nP(n−1) − (n+1)P(n)]`
///
/// with `D = A₋ + (N+1)γ_m` and `U = A₊ + Nγ_m`, truncated at `n_max`
/// (no flux out of the top level).
pub fn rate_equation_evolve(
    a_plus: f64,
    a_minus: f64,
    gamma_m: f64,
    thermal_n: f64,
    p0: &[f64],
    t_grid: &[f64],
    n_max: usize,
) -> Result<RateTrajectory> {
    if p0.len() > n_max + 1 {
        return Err(Error::Invalid(format!(
            "initial distribution has {} levels, n_max = {n_max}",
            p0.len()
        )));
    }
    let norm: f64 = p0.iter().sum();
    if (norm - 1.0).abs() > 1e-9 || p0.iter().any(|p| *p < 0.0) {
        return Err(Error::Invalid(format!("p0 is not normalized (sum {norm})")));
    }
    let down = a_minus + (thermal_n + 1.0) * gamma_m;
    let up = a_plus + thermal_n * gamma_m;
    if down < 0.0 || up < 0.0 {
        return Err(Error::Invalid("negative transition rate".into()));
    }
    let m = n_max + 1;
    let mut y0 = vec![0.0; m];
    y0[..p0.len()].copy_from_slice(p0);
    let rhs = |_: f64, p: &[f64], dp: &mut [f64]| {
        for n in 0..m {
            let nf = n as f64;
            let mut v = 0.0;
            if n + 1 < m {
                v += down * (nf + 1.0) * p[n + 1];
                v -= up * (nf + 1.0) * p[n];
            }
            if n > 0 {
                v -= down * nf * p[n];
                v += up * nf * p[n - 1];
            }
            dp[n] = v;
        }
    };
    let mut out = RateTrajectory {
        times: t_grid.to_vec(),
        mean: vec![0.0; t_grid.len()],
        distributions: vec![Vec::new(); t_grid.len()],
        max_tail: 0.0,
    };
    integrate(
        rhs,
        0.0,
        y0,
        t_grid,
        OdeOptions::new(1e-10, 1e-14),
        |i, t, p| {
            let tail = p[m - 1];
            out.max_tail = out.max_tail.max(tail);
            if tail > RATE_LEAKAGE {
                return Err(Error::Leakage {
                    t,
                    value: tail,
                    threshold: RATE_LEAKAGE,
                });
            }
            out.mean[i] = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
            out.distributions[i] = p.to_vec();
            Ok(())
        },
    )?;
    Ok(out)
}

/// Stationary distribution of the truncated chain from detailed balance,
/// `P(n+1)/P(n) = (A₊ + Nγ_m)/(A₋ + (N+1)γ_m)`.
pub fn rate_equation_stationary(
    a_plus: f64,
    a_minus: f64,
    gamma_m: f64,
    thermal_n: f64,
    n_max: usize,
) -> Result<Vec<f64>> {
    let down = a_minus + (thermal_n + 1.0) * gamma_m;
    let up = a_plus + thermal_n * gamma_m;
    if !(down > 0.0) {
        return Err(Error::NetHeating(down));
    }
    let r = up / down;
    let mut p = Vec::with_capacity(n_max + 1);
    let mut x = 1.0;
    for _ in 0..=n_max {
        p.push(x);
        x *= r;
    }
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumValues {
    Complex(Vec<C64>),
    Absorption(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSeries {
    pub omegas: Vec<f64>,
    pub values: SpectrumValues,
}

impl SpectrumSeries {
    /// `omega,re,im` or `omega,absorption`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        match &self.values {
            SpectrumValues::Complex(v) => {
                writeln!(w, "omega,re,im")?;
                for (o, z) in self.omegas.iter().zip(v) {
                    writeln!(w, "{o:.16e},{:.16e},{:.16e}", z.re, z.im)?;
                }
            }
            SpectrumValues::Absorption(v) => {
                writeln!(w, "omega,absorption")?;
                for (o, a) in self.omegas.iter().zip(v) {
                    writeln!(w, "{o:.16e},{a:.16e}")?;
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Invalid("frequency grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("frequency grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `S(ω)` over a grid.
pub fn fluctuation_spectrum_series(params: &ModelParams, grid: &[f64]) -> Result<SpectrumSeries> {
    check_grid(grid)?;
    let values = grid
        .iter()
        .map(|&w| fluctuation_spectrum(params, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumSeries {
        omegas: grid.to_vec(),
        values: SpectrumValues::Complex(values),
    })
}

/// `n` points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn spectrum_examples() {
        let p = ModelParams::reference();
        let s = fluctuation_spectrum(&p, 1.0).unwrap();
        assert_relative_eq!(s.re, 0.013225 * 32.0 * 2.0 / 15.0, max_relative = 1e-12);
        assert_abs_diff_eq!(s.im, 0.0, epsilon = 1e-15);
        assert_eq!(fluctuation_spectrum(&p, 0.0).unwrap(), C64::new(0.0, 0.0));
        let s = fluctuation_spectrum(&p, -1.0).unwrap();
        assert_relative_eq!(s.re, 0.013225 * 32.0 * 30.0 / 15601.0, max_relative = 1e-12);
        assert_relative_eq!(s.re, 8.1378e-4, max_relative = 1e-4);
    }

    #[test]
    fn pole_is_reported() {
        let mut p = ModelParams::reference();
        p.gamma_total = 0.0;
        // 2ω² + 62ω − 64 = 0 at ω = 1
        assert!(matches!(
            fluctuation_spectrum(&p, 1.0),
            Err(Error::SpectrumPole { .. })
        ));
    }

    #[test]
    fn rate_examples() {
        let r = rates(&ModelParams::reference());
        assert_relative_eq!(r.a_minus, 25.392 / 225.0, max_relative = 1e-12);
        assert_relative_eq!(r.a_plus, 25.392 / 15601.0, max_relative = 1e-12);
        assert_eq!(r.w, r.a_minus - r.a_plus);
        let mut p = ModelParams::reference();
        p.eta = 0.0;
        let r = rates(&p);
        assert_eq!((r.a_plus, r.a_minus), (0.0, 0.0));
    }

    #[test]
    fn optimum_matches_general() {
        for m in [1.5, 3.0, 8.0, 12.0] {
            let p = ModelParams::reference().with_rabi_ratio(m);
            let a = rates(&p);
            let b = rates_at_optimum(m, 15.0, 0.115).unwrap();
            assert_relative_eq!(a.a_plus, b.a_plus, max_relative = 1e-14);
            assert_relative_eq!(a.a_minus, b.a_minus, max_relative = 1e-14);
        }
        let r = rates_at_optimum(2f64.sqrt(), 15.0, 0.115).unwrap();
        assert_relative_eq!(r.a_plus, r.a_minus, max_relative = 1e-12);
        let r1 = rates_at_optimum(3.0, 15.0, 0.115).unwrap();
        let r2 = rates_at_optimum(6.0, 15.0, 0.115).unwrap();
        assert_relative_eq!(r2.a_minus / r1.a_minus, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn steady_examples() {
        let p = ModelParams::reference();
        let r = rates(&p);
        let s = steady_phonon(&p, &r).unwrap();
        assert_relative_eq!(s.backaction.unwrap(), (15.0f64 / 124.0).powi(2), max_relative = 1e-12);
        assert!((s.n_ss - 0.052).abs() < 1e-3, "{}", s.n_ss);
        let mut p0 = p.clone();
        p0.gamma_mech = 0.0;
        let r0 = rates(&p0);
        assert_relative_eq!(steady_phonon(&p0, &r0).unwrap().n_ss, r0.a_plus / r0.w);
        let mut heat = p.clone();
        heat.detuning = -31.0;
        heat.gamma_mech = 0.0;
        assert!(matches!(
            steady_phonon(&heat, &rates(&heat)),
            Err(Error::NetHeating(_))
        ));
    }

    #[test]
    fn thermal_examples() {
        let w = crate::constants::TWO_PI * 1e6;
        let n = thermal_occupation(w, 0.02);
        assert!((n - 416.2).abs() < 0.1, "{n}");
        assert_eq!(thermal_occupation(w, 0.0), 0.0);
        let rj = K_B * 0.02 / (HBAR * w);
        assert!((n / rj - 1.0).abs() < 2e-3);
    }

    #[test]
    fn trajectory_identities() {
        let r = rates(&ModelParams::reference());
        let (g, n) = (1e-3, 20.0);
        assert_relative_eq!(analytic_trajectory(&r, g, n, 0.0), n, max_relative = 1e-14);
        let k = r.w + g;
        let nss = (r.a_plus + n * g) / k;
        let half = analytic_trajectory(&r, g, n, std::f64::consts::LN_2 / k);
        assert_relative_eq!(half, nss + (n - nss) / 2.0, max_relative = 1e-12);
        assert_relative_eq!(analytic_trajectory(&r, g, n, 1e6), nss, max_relative = 1e-12);
    }

    #[test]
    fn birth_death_thermal_only() {
        let n_th = 2.0;
        let p = rate_equation_stationary(0.0, 0.0, 0.1, n_th, 200).unwrap();
        let mean: f64 = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
        assert_abs_diff_eq!(mean, n_th, epsilon = 1e-6);
        let traj = rate_equation_evolve(0.0, 0.0, 0.1, n_th, &[1.0], &[0.0, 200.0], 200).unwrap();
        assert_abs_diff_eq!(traj.mean[1], n_th, epsilon = 1e-6);
    }

    #[test]
    fn birth_death_moment_closure() {
        let r = rates(&ModelParams::reference());
        let (g, n) = (0.01, 4.0);
        let p0 = bose_einstein(n, 150);
        let grid = linspace(0.0, 40.0, 41);
        let traj = rate_equation_evolve(r.a_plus, r.a_minus, g, n, &p0, &grid, 150).unwrap();
        for (t, m) in grid.iter().zip(&traj.mean) {
            assert_abs_diff_eq!(*m, analytic_trajectory(&r, g, n, *t), epsilon = 1e-6);
        }
    }

    #[test]
    fn birth_death_leakage() {
        let r = rate_equation_evolve(0.0, 0.0, 1.0, 50.0, &[1.0], &[0.0, 10.0], 20);
        assert!(matches!(r, Err(Error::Leakage { .. })));
    }
}
