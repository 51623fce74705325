//! Bloch equations of the phonon-free Λ system in the bright/dark basis,
//! the regression-theorem transform built on them, and the weak-probe
//! absorption spectrum.
//!
//! Variables, with `g = Ω₀/√2`, `Γ = γ₊ + γ₋` and `ρ_AA = 1 − ρ_bb − ρ_dd`:
//!
//! ```text
//! v = [ρ_bb, ρ_dd, σx^{bd}, σy^{bd}, σx^{Ab}, σy^{Ab}, σx^{Ad}, σy^{Ad}]
//!
//! ρ̇_bb    = −g σy^{Ab} + (Γ/2) ρ_AA
//! ρ̇_dd    = (Γ/2) ρ_AA
//! σ̇x^{bd} = −g σy^{Ad} + (γ₊ − γ₋) ρ_AA
//! σ̇y^{bd} =  g σx^{Ad}
//! σ̇x^{Ab} = −(Γ/2) σx^{Ab} + Δ σy^{Ab}
//! σ̇y^{Ab} = −(Γ/2) σy^{Ab} + 2g(2ρ_bb + ρ_dd − 1) − Δ σx^{Ab}
//! σ̇x^{Ad} = −(Γ/2) σx^{Ad} − g σy^{bd} + Δ σy^{Ad}
//! σ̇y^{Ad} = −(Γ/2) σy^{Ad} + g σx^{bd} − Δ σx^{Ad}
//! ```
//!
//! where `σx^{m,n} = |m⟩⟨n| + |n⟩⟨m|` and `σy^{m,n} = −i(|m⟩⟨n| − |n⟩⟨m|)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{check_grid, SpectrumSeries, SpectrumValues};
use crate::dynamics::steady_state;
use crate::error::{Error, Result};
use crate::liouvillian::Generator;
use crate::model::build_internal_three_level;
use crate::ode::{Dopri5, OdeOptions};
use crate::operator::trace_product;
use crate::params::ModelParams;

pub const BLOCH_VARIABLES: [&str; 8] = [
    "rho_bb", "rho_dd", "sx_bd", "sy_bd", "sx_Ab", "sy_Ab", "sx_Ad", "sy_Ad",
];

const SY_AD: usize = 7;

/// `dv/dt = M v + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochSystem {
    pub m: DMatrix<f64>,
    pub s: DVector<f64>,
}

pub fn bloch_matrix(params: &ModelParams) -> BlochSystem {
    let g = params.rabi_omega0 / std::f64::consts::SQRT_2;
    let gam = params.gamma_plus + params.gamma_minus;
    let asym = params.gamma_plus - params.gamma_minus;
    let h = gam / 2.0;
    let d = params.detuning;
    let mut m = DMatrix::zeros(8, 8);
    let mut s = DVector::zeros(8);

    m[(0, 5)] = -g;
    m[(0, 0)] = -h;
    m[(0, 1)] = -h;
    s[0] = h;

    m[(1, 0)] = -h;
    m[(1, 1)] = -h;
    s[1] = h;

    m[(2, 7)] = -g;
    m[(2, 0)] = -asym;
    m[(2, 1)] = -asym;
    s[2] = asym;

    m[(3, 6)] = g;

    m[(4, 4)] = -h;
    m[(4, 5)] = d;

    m[(5, 5)] = -h;
    m[(5, 0)] = 4.0 * g;
    m[(5, 1)] = 2.0 * g;
    m[(5, 4)] = -d;
    s[5] = -2.0 * g;

    m[(6, 6)] = -h;
    m[(6, 3)] = -g;
    m[(6, 7)] = d;

    m[(7, 7)] = -h;
    m[(7, 2)] = g;
    m[(7, 6)] = -d;

    BlochSystem { m, s }
}

/// `U` with columns |b⟩, |d⟩, |A₂⟩ in the basis (|+1⟩, |−1⟩, |A₂⟩).
fn bd_basis() -> DMatrix<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| C64::new(x, 0.0);
    DMatrix::from_row_slice(3, 3, &[c(r), c(r), c(0.0), c(r), c(-r), c(0.0), c(0.0), c(0.0), c(1.0)])
}

/// The eight Bloch observables as 3×3 matrices in the (|+1⟩, |−1⟩, |A₂⟩) basis.
pub fn bloch_observables() -> Vec<DMatrix<C64>> {
    const B: usize = 0;
    const D: usize = 1;
    const A: usize = 2;
    let unit = |i: usize, j: usize| {
        let mut m = DMatrix::zeros(3, 3);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    };
    let sx = |m: usize, n: usize| unit(m, n) + unit(n, m);
    let sy = |m: usize, n: usize| (unit(m, n) - unit(n, m)) * C64::new(0.0, -1.0);
    let u = bd_basis();
    [
        unit(B, B),
        unit(D, D),
        sx(B, D),
        sy(B, D),
        sx(A, B),
        sy(A, B),
        sx(A, D),
        sy(A, D),
    ]
    .into_iter()
    .map(|o| &u * o * u.adjoint())
    .collect()
}

/// Reassemble ρ (in the |±1⟩, |A₂⟩ basis) from the eight Bloch variables.
pub fn density_from_bloch(v: &[f64]) -> DMatrix<C64> {
    let mut r = DMatrix::zeros(3, 3);
    let (b, d, a) = (0, 1, 2);
    r[(b, b)] = C64::new(v[0], 0.0);
    r[(d, d)] = C64::new(v[1], 0.0);
    r[(a, a)] = C64::new(1.0 - v[0] - v[1], 0.0);
    let mut set = |n: usize, m: usize, x: f64, y: f64| {
        let z = C64::new(x, y) / 2.0;
        r[(n, m)] = z;
        r[(m, n)] = z.conj();
    };
    set(d, b, v[2], v[3]);
    set(b, a, v[4], v[5]);
    set(d, a, v[6], v[7]);
    let u = bd_basis();
    &u * r * u.adjoint()
}

fn check_bloch_params(params: &ModelParams) -> Result<()> {
    if !(params.gamma_plus + params.gamma_minus > 0.0) {
        return Err(Error::param("gamma_total", "Bloch system needs Γ > 0"));
    }
    if !(params.rabi_omega0 > 0.0) {
        return Err(Error::param("rabi_omega0", "Bloch system needs Ω₀ > 0"));
    }
    Ok(())
}

/// Stationary point of the Bloch system as a 3×3 density matrix in the
/// (|+1⟩, |−1⟩, |A₂⟩) basis.
pub fn bloch_steady_state(params: &ModelParams) -> Result<DMatrix<C64>> {
    check_bloch_params(params)?;
    let sys = bloch_matrix(params);
    let v = sys
        .m
        .clone()
        .full_piv_lu()
        .solve(&(-&sys.s))
        .ok_or_else(|| Error::Singular("Bloch matrix".into()))?;
    Ok(density_from_bloch(v.as_slice()))
}

/// Initial vector of the regression system, `v_k(0) = Tr(O_k σy^{Ad} ρ_ss)`.
fn regression_start(params: &ModelParams) -> Result<DVector<C64>> {
    let rho = bloch_steady_state(params)?;
    let obs = bloch_observables();
    let x = &obs[SY_AD] * &rho;
    let mean = x.trace();
    if mean.norm() > 1e-8 {
        return Err(Error::Invalid(format!(
            "⟨σy^{{A2,d}}⟩_ss = {mean} is not zero; the regression start is not traceless"
        )));
    }
    Ok(DVector::from_iterator(8, obs.iter().map(|o| trace_product(o, &x))))
}

/// `∫₀^∞ dt e^{iωt} ⟨σy^{A2,d}(t) σy^{A2,d}(0)⟩_ss` from the resolvent
/// `(−iω − M)⁻¹ v(0)` of the Bloch matrix.
pub fn correlation_transform_numeric(params: &ModelParams, omega: f64) -> Result<C64> {
    let v0 = regression_start(params)?;
    let m = bloch_matrix(params).m.map(|x| C64::new(x, 0.0));
    let a = DMatrix::<C64>::identity(8, 8) * C64::new(0.0, -omega) - m;
    let f = a
        .full_piv_lu()
        .solve(&v0)
        .ok_or_else(|| Error::Singular(format!("resolvent at ω = {omega}")))?;
    Ok(f[SY_AD])
}

/// Largest real part of the eigenvalues of the Bloch matrix.
pub fn spectral_abscissa(params: &ModelParams) -> f64 {
    bloch_matrix(params)
        .m
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Same transform by direct time integration of the regression system with
/// an accumulated `∫ e^{iωt} v_y dt`, stopped once `|v(t)|/|α|` (α the
/// spectral abscissa) drops below `1e-10`.
pub fn correlation_transform_quadrature(params: &ModelParams, omega: f64) -> Result<C64> {
    let alpha = spectral_abscissa(params);
    if !(alpha < 0.0) {
        return Err(Error::NonDecaying(alpha));
    }
    let v0 = regression_start(params)?;
    let m = bloch_matrix(params).m;
    let mut y0: Vec<C64> = v0.iter().copied().collect();
    y0.push(C64::new(0.0, 0.0));
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        for i in 0..8 {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..8 {
                acc += y[j] * m[(i, j)];
            }
            dy[i] = acc;
        }
        dy[8] = C64::new(0.0, omega * t).exp() * y[SY_AD];
    };
    let mut opts = OdeOptions::new(1e-11, 1e-14);
    opts.h_max = 0.5 / omega.abs().max(1.0);
    let mut solver = Dopri5::new(rhs, 0.0, y0, opts)?;
    let scale = v0.norm().max(1e-300);
    let t_cap = 200.0 / alpha.abs();
    loop {
        solver.step()?;
        let y = solver.y();
        let tail = y[..8].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / alpha.abs();
        if tail < 1e-10 * scale {
            return Ok(y[8]);
        }
        if solver.t() > t_cap {
            return Err(Error::NonDecaying(alpha));
        }
    }
}

/// Weak-probe absorption on the |+1⟩ ↔ |A₂⟩ leg, with the coupling leg held
/// at detuning Δ and the probe offset by ω.
///
/// For each ω the first-order response solves
/// `(−iω − L) ρ₁ = −(i/2)[|A₂⟩⟨+1|, ρ_ss]` (trace of ρ₁ pinned to zero) and
/// the absorption is `−Γ Im⟨A₂|ρ₁|+1⟩`. A bare two-level resonance peaks at 1.
pub fn absorption_spectrum(params: &ModelParams, grid: &[f64]) -> Result<SpectrumSeries> {
    check_grid(grid)?;
    let model = build_internal_three_level(params)?;
    let space = model.space().clone();
    let rho = steady_state(&model)?;
    let lsup = Generator::new(&model).superoperator()?;
    let d = space.dim();
    let n = d * d;
    let (p, a) = (space.level(crate::model::PLUS)?, space.level(crate::model::A2)?);
    let mut probe = DMatrix::zeros(d, d);
    probe[(a, p)] = C64::new(1.0, 0.0);
    let src = (&probe * rho.matrix() - rho.matrix() * &probe) * C64::new(0.0, -0.5);
    let mut rhs = DVector::from_column_slice(src.as_slice());
    rhs[0] = C64::new(0.0, 0.0);
    let gamma = params.gamma_plus + params.gamma_minus;
    let mut values = Vec::with_capacity(grid.len());
    for &w in grid {
        let mut sys = DMatrix::<C64>::identity(n, n) * C64::new(0.0, -w) - &lsup;
        for j in 0..n {
            sys[(0, j)] = C64::new(0.0, 0.0);
        }
        for i in 0..d {
            sys[(0, i * d + i)] = C64::new(1.0, 0.0);
        }
        let x = sys
            .full_piv_lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular(format!("probe response at ω = {w}")))?;
        // element (a, p) of the column-major vector
        values.push(-gamma * x[p * d + a].im);
    }
    Ok(SpectrumSeries {
        omegas: grid.to_vec(),
        values: SpectrumValues::Absorption(values),
    })
}
