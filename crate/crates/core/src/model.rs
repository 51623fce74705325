//! Hamiltonians and master equations of the NV center coupled to the
//! cantilever mode, for the Λ system alone and with the recycling levels.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::constants::{HBAR, MU_B};
use crate::effective::EffectiveRates;
use crate::error::{Error, Result};
use crate::operator::{
    annihilation, coherent_state, compose_space, creation, fock_state, number, projector,
    thermal_state, transition, DensityMatrix, HilbertSpace, LindbladModel, Operator,
};
use crate::params::{Bath, ModelParams};

pub const PLUS: &str = "+1";
pub const MINUS: &str = "-1";
pub const A2: &str = "A2";
pub const ZERO_LEVEL: &str = "0";
pub const EY: &str = "Ey";
pub const SINGLET: &str = "1A1";

pub const THREE_LEVELS: [&str; 3] = [PLUS, MINUS, A2];
pub const FOUR_LEVELS: [&str; 4] = [PLUS, MINUS, A2, ZERO_LEVEL];
pub const SEVEN_LEVELS: [&str; 6] = [PLUS, MINUS, A2, ZERO_LEVEL, EY, SINGLET];

fn require(space: &HilbertSpace, labels: &[&str]) -> Result<()> {
    for l in labels {
        space.level(l)?;
    }
    Ok(())
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `|+1⟩⟨+1| − |−1⟩⟨−1|`
fn sigma_z(space: &Arc<HilbertSpace>) -> Result<Operator> {
    Ok(&projector(space, PLUS)? - &projector(space, MINUS)?)
}

/// Rotating-frame Hamiltonian of the Λ system and the cantilever:
///
/// `b†b − Δ|A₂⟩⟨A₂| + (Ω₀/2)(|A₂⟩⟨+1| + |A₂⟩⟨−1| + h.c.) + η σ_z (b + b†)`
///
/// plus the static shift `δ|−1⟩⟨−1|` when `nuclear_shift` is nonzero.
pub fn build_h_rot(params: &ModelParams, space: &Arc<HilbertSpace>) -> Result<Operator> {
    require(space, &THREE_LEVELS)?;
    let b = annihilation(space);
    let x = &b + &b.adjoint();
    let up_p = transition(space, A2, PLUS)?;
    let up_m = transition(space, A2, MINUS)?;
    let drive = &(&up_p + &up_m) + &(&up_p + &up_m).adjoint();
    let mut h = number(space);
    h = &h - &projector(space, A2)?.scale(params.detuning);
    h = &h + &drive.scale(params.rabi_omega0 / 2.0);
    h = &h + &(&sigma_z(space)? * &x).scale(params.eta);
    if params.nuclear_shift != 0.0 {
        h = &h + &projector(space, MINUS)?.scale(params.nuclear_shift);
    }
    Ok(h)
}

/// Bright and dark ground superpositions `(|+1⟩ ± |−1⟩)/√2` as internal-level
/// projector-like operators `|x⟩⟨y|`.
fn bd_transition(space: &Arc<HilbertSpace>, ket: &str, bra: &str) -> Result<Operator> {
    let k = space.internal_dim();
    let p = space.level(PLUS)?;
    let m = space.level(MINUS)?;
    let vec_of = |name: &str| -> Result<Vec<C64>> {
        let mut v = vec![c(0.0); k];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match name {
            "B" => {
                v[p] = c(s);
                v[m] = c(s);
            }
            "d" => {
                v[p] = c(s);
                v[m] = c(-s);
            }
            other => v[space.level(other)?] = c(1.0),
        }
        Ok(v)
    };
    let a = vec_of(ket)?;
    let b = vec_of(bra)?;
    let m = DMatrix::from_fn(k, k, |i, j| a[i] * b[j].conj());
    Operator::internal(space, &m)
}

/// Dark-state projector `|d⟩⟨d|`.
pub fn dark_projector(space: &Arc<HilbertSpace>) -> Result<Operator> {
    require(space, &[PLUS, MINUS])?;
    bd_transition(space, "d", "d")
}

/// Bright-state projector `|B⟩⟨B|`.
pub fn bright_projector(space: &Arc<HilbertSpace>) -> Result<Operator> {
    require(space, &[PLUS, MINUS])?;
    bd_transition(space, "B", "B")
}

/// First-order polaron-frame split `(H₀, V)`:
///
/// `H₀ = b†b − Δ|A₂⟩⟨A₂| + (Ω₀/√2)(|A₂⟩⟨B| + h.c.)`,
/// `V = η(b − b†)(Ω₀/√2)(|A₂⟩⟨d| − |d⟩⟨A₂|)`.
pub fn build_effective_h(
    params: &ModelParams,
    space: &Arc<HilbertSpace>,
) -> Result<(Operator, Operator)> {
    require(space, &THREE_LEVELS)?;
    let g = params.rabi_omega0 / std::f64::consts::SQRT_2;
    let a_b = bd_transition(space, A2, "B")?;
    let a_d = bd_transition(space, A2, "d")?;
    let mut h0 = &number(space) - &projector(space, A2)?.scale(params.detuning);
    h0 = &h0 + &(&a_b + &a_b.adjoint()).scale(g);
    if params.nuclear_shift != 0.0 {
        h0 = &h0 + &projector(space, MINUS)?.scale(params.nuclear_shift);
    }
    let b = annihilation(space);
    let p = &b - &b.adjoint();
    let v = (&p * &(&a_d - &a_d.adjoint())).scale(params.eta * g);
    Ok((h0, v))
}

/// Generator `S = −iη σ_z (b − b†)` of the polaron transform.
pub fn polaron_generator(params: &ModelParams, space: &Arc<HilbertSpace>) -> Result<Operator> {
    let b = annihilation(space);
    Ok((&sigma_z(space)? * &(&b - &b.adjoint())).scale(C64::new(0.0, -params.eta)))
}

/// `e^{−iS} H e^{iS}` by dense matrix exponential.
pub fn polaron_transform(h: &Operator, s: &Operator) -> Result<Operator> {
    let a = s.matrix() * C64::new(0.0, -1.0);
    let u = a.clone().exp();
    let u_inv = (-a).exp();
    Operator::from_matrix(h.space(), &u * h.matrix() * &u_inv)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedStateReport {
    pub e_plus: f64,
    pub e_minus: f64,
    pub phi: f64,
    pub linewidth_plus: f64,
    pub linewidth_minus: f64,
}

/// Eigen-decomposition of the bright/excited block
/// `[[−Δ, Ω₀/√2], [Ω₀/√2, 0]]`.
pub fn dressed_states(params: &ModelParams) -> Result<DressedStateReport> {
    let (o, d) = (params.rabi_omega0, params.detuning);
    if o == 0.0 && d == 0.0 {
        return Err(Error::DegenerateDressing);
    }
    let root = (2.0 * o * o + d * d).sqrt();
    let phi = 0.5 * (-d / root).clamp(-1.0, 1.0).acos();
    let cos2 = phi.cos().powi(2);
    Ok(DressedStateReport {
        e_plus: (-d + root) / 2.0,
        e_minus: (-d - root) / 2.0,
        phi,
        linewidth_plus: params.gamma_total * cos2,
        linewidth_minus: params.gamma_total * (1.0 - cos2),
    })
}

fn add_mechanical_channels(
    model: &mut LindbladModel,
    params: &ModelParams,
    space: &Arc<HilbertSpace>,
) -> Result<()> {
    let b = annihilation(space);
    match params.bath {
        Bath::Zero => model.add_channel("mech", params.gamma_mech, b),
        Bath::Thermal => {
            let n = params.thermal_n();
            model.add_channel("mech_down", params.gamma_mech * (n + 1.0), b)?;
            model.add_channel("mech_up", params.gamma_mech * n, creation(space))
        }
    }
}

fn add_common_observables(model: &mut LindbladModel, space: &Arc<HilbertSpace>) -> Result<()> {
    model.add_observable("n", number(space))?;
    model.add_observable("p_dark", dark_projector(space)?)?;
    model.add_observable("p_A2", projector(space, A2)?)
}

/// Λ system with renormalized decays γ_± from |A₂⟩.
pub fn build_model_three_level(params: &ModelParams, fock_dim: usize) -> Result<LindbladModel> {
    params.validate()?;
    let space = compose_space(&THREE_LEVELS, fock_dim)?;
    let mut model = LindbladModel::new(build_h_rot(params, &space)?)?;
    add_mechanical_channels(&mut model, params, &space)?;
    model.add_channel("gamma_plus", params.gamma_plus, transition(&space, PLUS, A2)?)?;
    model.add_channel("gamma_minus", params.gamma_minus, transition(&space, MINUS, A2)?)?;
    add_common_observables(&mut model, &space)?;
    Ok(model)
}

/// Λ system plus |0⟩, with the pump loop replaced by effective repump rates.
pub fn build_model_four_level(
    params: &ModelParams,
    rates: &EffectiveRates,
    fock_dim: usize,
) -> Result<LindbladModel> {
    params.validate()?;
    rates.validate()?;
    let space = compose_space(&FOUR_LEVELS, fock_dim)?;
    let h = &build_h_rot(params, &space)? - &projector(&space, ZERO_LEVEL)?.scale(params.omega_0);
    let mut model = LindbladModel::new(h)?;
    add_mechanical_channels(&mut model, params, &space)?;
    model.add_channel("gamma_p1", params.gamma_p1, transition(&space, PLUS, A2)?)?;
    model.add_channel("gamma_m1", params.gamma_m1, transition(&space, MINUS, A2)?)?;
    model.add_channel("gamma_0", params.gamma_0, transition(&space, ZERO_LEVEL, A2)?)?;
    model.add_channel("op_p1", rates.gamma_op_p1, transition(&space, PLUS, ZERO_LEVEL)?)?;
    model.add_channel("op_m1", rates.gamma_op_m1, transition(&space, MINUS, ZERO_LEVEL)?)?;
    add_common_observables(&mut model, &space)?;
    model.add_observable("p_0", projector(&space, ZERO_LEVEL)?)?;
    Ok(model)
}

/// Full recycling model: Λ system, |0⟩, |E_y⟩ driven from |0⟩ by the pump
/// (coupling Ω_p/2, detuning Δ_e on |E_y⟩), and the singlet |¹A₁⟩.
pub fn build_model_seven_level(params: &ModelParams, fock_dim: usize) -> Result<LindbladModel> {
    params.validate()?;
    let space = compose_space(&SEVEN_LEVELS, fock_dim)?;
    let pump = transition(&space, EY, ZERO_LEVEL)?;
    let mut h = build_h_rot(params, &space)?;
    h = &h - &projector(&space, SINGLET)?.scale(params.omega_s);
    h = &h + &projector(&space, EY)?.scale(params.pump_detuning);
    h = &h + &(&pump + &pump.adjoint()).scale(params.rabi_pump / 2.0);
    let mut model = LindbladModel::new(h)?;
    add_mechanical_channels(&mut model, params, &space)?;
    model.add_channel("gamma_p1", params.gamma_p1, transition(&space, PLUS, A2)?)?;
    model.add_channel("gamma_m1", params.gamma_m1, transition(&space, MINUS, A2)?)?;
    model.add_channel("gamma_dark", params.gamma_dark, transition(&space, SINGLET, A2)?)?;
    model.add_channel("gamma_s", params.gamma_s, transition(&space, ZERO_LEVEL, SINGLET)?)?;
    model.add_channel("big_gamma_0", params.big_gamma_0, transition(&space, ZERO_LEVEL, EY)?)?;
    model.add_channel("big_gamma_p1", params.big_gamma_p1, transition(&space, PLUS, EY)?)?;
    model.add_channel("big_gamma_m1", params.big_gamma_m1, transition(&space, MINUS, EY)?)?;
    add_common_observables(&mut model, &space)?;
    model.add_observable("p_0", projector(&space, ZERO_LEVEL)?)?;
    model.add_observable("p_Ey", projector(&space, EY)?)?;
    model.add_observable("p_1A1", projector(&space, SINGLET)?)?;
    Ok(model)
}

/// Three-level Λ model without a mechanical mode (Fock dimension 1).
pub fn build_internal_three_level(params: &ModelParams) -> Result<LindbladModel> {
    params.validate()?;
    let space = HilbertSpace::internal_only(&THREE_LEVELS)?;
    let up_p = transition(&space, A2, PLUS)?;
    let up_m = transition(&space, A2, MINUS)?;
    let drive = &(&up_p + &up_m) + &(&up_p + &up_m).adjoint();
    let mut h = &drive.scale(params.rabi_omega0 / 2.0) - &projector(&space, A2)?.scale(params.detuning);
    if params.nuclear_shift != 0.0 {
        h = &h + &projector(&space, MINUS)?.scale(params.nuclear_shift);
    }
    let mut model = LindbladModel::new(h)?;
    model.add_channel("gamma_plus", params.gamma_plus, transition(&space, PLUS, A2)?)?;
    model.add_channel("gamma_minus", params.gamma_minus, transition(&space, MINUS, A2)?)?;
    model.add_observable("p_dark", dark_projector(&space)?)?;
    model.add_observable("p_A2", projector(&space, A2)?)?;
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambDicke {
    /// m
    pub x0: f64,
    /// rad/s
    pub lambda: f64,
    pub eta: f64,
}

/// `x₀ = √(ħ/(2Mω_m))`, `λ = g_e μ_B B′ x₀ / ħ`, `η = λ/ω_m`.
pub fn lamb_dicke_from_physical(
    mass: f64,
    omega_m: f64,
    mfg: f64,
    g_e: f64,
    x0_override: Option<f64>,
) -> Result<LambDicke> {
    if !(mass > 0.0) {
        return Err(Error::param("mass", "must be > 0"));
    }
    if !(omega_m > 0.0) {
        return Err(Error::param("omega_m", "must be > 0"));
    }
    if !(g_e > 0.0) {
        return Err(Error::param("g_e", "must be > 0"));
    }
    if !(mfg >= 0.0) {
        return Err(Error::param("mfg", "must be ≥ 0"));
    }
    let x0 = match x0_override {
        Some(x) if x > 0.0 => x,
        Some(_) => return Err(Error::param("x0", "must be > 0")),
        None => (HBAR / (2.0 * mass * omega_m)).sqrt(),
    };
    let lambda = g_e * MU_B * mfg * x0 / HBAR;
    Ok(LambDicke {
        x0,
        lambda,
        eta: lambda / omega_m,
    })
}

/// `ceil(4⟨n⟩) + 10`.
pub fn default_fock_dim(mean_n: f64) -> usize {
    (4.0 * mean_n.max(0.0)).ceil() as usize + 10
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhononState {
    Fock(usize),
    Thermal(f64),
    Coherent(f64),
}

impl PhononState {
    pub fn matrix(&self, fock_dim: usize) -> Result<DMatrix<C64>> {
        match *self {
            PhononState::Fock(n) => fock_state(fock_dim, n),
            PhononState::Thermal(m) => thermal_state(fock_dim, m),
            PhononState::Coherent(a) => Ok(coherent_state(fock_dim, a)),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            PhononState::Fock(n) => n as f64,
            PhononState::Thermal(m) => m,
            PhononState::Coherent(a) => a * a,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InternalState {
    Level(String),
    Dark,
}

/// `ρ_internal ⊗ ρ_phonon` on the space of `model`.
pub fn product_state(
    space: &Arc<HilbertSpace>,
    internal: &InternalState,
    phonon: &PhononState,
) -> Result<DensityMatrix> {
    let k = space.internal_dim();
    let int = match internal {
        InternalState::Level(l) => {
            let i = space.level(l)?;
            let mut m = DMatrix::zeros(k, k);
            m[(i, i)] = c(1.0);
            m
        }
        InternalState::Dark => {
            let (p, m) = (space.level(PLUS)?, space.level(MINUS)?);
            let mut r = DMatrix::zeros(k, k);
            r[(p, p)] = c(0.5);
            r[(m, m)] = c(0.5);
            r[(p, m)] = c(-0.5);
            r[(m, p)] = c(-0.5);
            r
        }
    };
    let ph = phonon.matrix(space.fock_dim())?;
    DensityMatrix::product(space, &int, &ph)
}
