//! Dense operators on a composite `internal ⊗ Fock` Hilbert space.
//!
//! Basis ordering is internal-major: the basis index of `|level, n⟩` is
//! `level * fock_dim + n`, so the internal index varies slowest. The ordering
//! is part of the serialized CSV format and never changes.
//!
//! Dissipators use the standard trace-preserving form
//!
//! ```text
//! D[L]ρ = (γ/2)(2 L ρ L† − L†L ρ − ρ L†L)
//! ```
//!
//! Writing a channel as `(γ/2)[LρL† − ρL†L − L†Lρ]` is treated as shorthand
//! for this form; only the form above preserves the trace.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest total Hilbert-space dimension accepted by the dense kernels.
pub const MAX_DIM: usize = 1024;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    labels: Vec<String>,
    fock_dim: usize,
}

impl HilbertSpace {
    /// Composite space of the given internal levels and a Fock ladder
    /// truncated at `fock_dim - 1` phonons.
    pub fn compose<S: AsRef<str>>(labels: &[S], fock_dim: usize) -> Result<Arc<Self>> {
        if fock_dim < 2 {
            return Err(Error::FockTooSmall(fock_dim));
        }
        Self::build(labels, fock_dim)
    }

    /// Space without a mechanical mode (Fock factor of dimension one).
    pub fn internal_only<S: AsRef<str>>(labels: &[S]) -> Result<Arc<Self>> {
        Self::build(labels, 1)
    }

    fn build<S: AsRef<str>>(labels: &[S], fock_dim: usize) -> Result<Arc<Self>> {
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut owned: Vec<String> = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            if owned.iter().any(|o| o == l) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            owned.push(l.to_string());
        }
        let dim = owned.len() * fock_dim;
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge {
                dim,
                limit: MAX_DIM,
            });
        }
        Ok(Arc::new(HilbertSpace {
            labels: owned,
            fock_dim,
        }))
    }

    pub fn dim(&self) -> usize {
        self.labels.len() * self.fock_dim
    }

    pub fn internal_dim(&self) -> usize {
        self.labels.len()
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn level(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    #[inline]
    pub fn index(&self, level: usize, n: usize) -> usize {
        level * self.fock_dim + n
    }
}

/// Free-function form of [`HilbertSpace::compose`].
pub fn compose_space<S: AsRef<str>>(labels: &[S], fock_dim: usize) -> Result<Arc<HilbertSpace>> {
    HilbertSpace::compose(labels, fock_dim)
}

#[derive(Clone)]
pub struct Operator {
    space: Arc<HilbertSpace>,
    matrix: DMatrix<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("labels", &self.space.labels)
            .field("fock_dim", &self.space.fock_dim)
            .finish_non_exhaustive()
    }
}

impl Operator {
    pub fn from_matrix(space: &Arc<HilbertSpace>, matrix: DMatrix<C64>) -> Result<Self> {
        check_square(&matrix, space.dim())?;
        Ok(Operator {
            space: space.clone(),
            matrix,
        })
    }

    pub fn zeros(space: &Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Operator {
            space: space.clone(),
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(space: &Arc<HilbertSpace>) -> Self {
        let d = space.dim();
        Operator {
            space: space.clone(),
            matrix: DMatrix::identity(d, d),
        }
    }

    /// `m ⊗ 1_fock` for an internal-level matrix `m`.
    pub fn internal(space: &Arc<HilbertSpace>, m: &DMatrix<C64>) -> Result<Self> {
        check_square(m, space.internal_dim())?;
        let f = space.fock_dim;
        let mut out = DMatrix::zeros(space.dim(), space.dim());
        for ((i, j), v) in indexed(m) {
            if v == ZERO {
                continue;
            }
            for n in 0..f {
                out[(i * f + n, j * f + n)] = v;
            }
        }
        Ok(Operator {
            space: space.clone(),
            matrix: out,
        })
    }

    /// `1_internal ⊗ m` for a Fock-space matrix `m`.
    pub fn phonon(space: &Arc<HilbertSpace>, m: &DMatrix<C64>) -> Result<Self> {
        check_square(m, space.fock_dim)?;
        let f = space.fock_dim;
        let mut out = DMatrix::zeros(space.dim(), space.dim());
        for lvl in 0..space.internal_dim() {
            for ((n, k), v) in indexed(m) {
                if v != ZERO {
                    out[(lvl * f + n, lvl * f + k)] = v;
                }
            }
        }
        Ok(Operator {
            space: space.clone(),
            matrix: out,
        })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * c.into(),
        }
    }

    /// Max elementwise |A − A†|.
    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        same_space(&self.space, &other.space)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        })
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

impl<'a> Add for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<'a> Sub for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl<'a> Mul for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

/// Truncated Fock-space annihilation matrix, `b|n⟩ = √n |n−1⟩`.
pub fn fock_annihilation(fock_dim: usize) -> DMatrix<C64> {
    let mut b = DMatrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        b[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    b
}

/// `b` acting on the Fock factor.
pub fn annihilation(space: &Arc<HilbertSpace>) -> Operator {
    Operator::phonon(space, &fock_annihilation(space.fock_dim)).expect("fock block matches space")
}

pub fn creation(space: &Arc<HilbertSpace>) -> Operator {
    annihilation(space).adjoint()
}

/// `b†b`, diagonal with entries `n`.
pub fn number(space: &Arc<HilbertSpace>) -> Operator {
    let f = space.fock_dim;
    let diag = DMatrix::from_fn(f, f, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            ZERO
        }
    });
    Operator::phonon(space, &diag).expect("fock block matches space")
}

/// `|ket⟩⟨bra| ⊗ 1_fock`.
pub fn transition(space: &Arc<HilbertSpace>, ket: &str, bra: &str) -> Result<Operator> {
    let k = space.level(ket)?;
    let b = space.level(bra)?;
    let mut m = DMatrix::zeros(space.internal_dim(), space.internal_dim());
    m[(k, b)] = ONE;
    Operator::internal(space, &m)
}

pub fn projector(space: &Arc<HilbertSpace>, label: &str) -> Result<Operator> {
    transition(space, label, label)
}

/// `σ_x^{m,n} = |m⟩⟨n| + |n⟩⟨m|`.
pub fn sigma_x(space: &Arc<HilbertSpace>, m: &str, n: &str) -> Result<Operator> {
    let t = transition(space, m, n)?;
    Ok(&t + &t.adjoint())
}

/// `σ_y^{m,n} = −i(|m⟩⟨n| − |n⟩⟨m|)`.
pub fn sigma_y(space: &Arc<HilbertSpace>, m: &str, n: &str) -> Result<Operator> {
    let t = transition(space, m, n)?;
    Ok((&t - &t.adjoint()).scale(-I))
}

#[derive(Clone)]
pub struct DensityMatrix {
    space: Arc<HilbertSpace>,
    matrix: DMatrix<C64>,
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMatrix")
            .field("dim", &self.space.dim())
            .field("trace", &self.trace())
            .finish_non_exhaustive()
    }
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-9;
    pub const POSITIVITY_FLOOR: f64 = -1e-8;

    /// Validates Hermiticity and unit trace. Positivity is O(d³) and is only
    /// checked on request via [`DensityMatrix::check_positive`].
    pub fn new(space: &Arc<HilbertSpace>, matrix: DMatrix<C64>) -> Result<Self> {
        check_square(&matrix, space.dim())?;
        let h = hermiticity_residual(&matrix);
        if h > Self::HERMITIAN_TOL {
            return Err(Error::NotHermitian(h));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        Ok(DensityMatrix {
            space: space.clone(),
            matrix,
        })
    }

    pub(crate) fn new_unchecked(space: &Arc<HilbertSpace>, matrix: DMatrix<C64>) -> Self {
        DensityMatrix {
            space: space.clone(),
            matrix,
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(space: &Arc<HilbertSpace>, state: &DVector<C64>) -> Result<Self> {
        if state.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: state.len(),
            });
        }
        let norm = state.norm();
        if norm == 0.0 {
            return Err(Error::Invalid("zero state vector".into()));
        }
        let psi = state / C64::new(norm, 0.0);
        Self::new(space, &psi * psi.adjoint())
    }

    /// `ρ_internal ⊗ ρ_phonon`.
    pub fn product(
        space: &Arc<HilbertSpace>,
        internal: &DMatrix<C64>,
        phonon: &DMatrix<C64>,
    ) -> Result<Self> {
        check_square(internal, space.internal_dim())?;
        check_square(phonon, space.fock_dim)?;
        Self::new(space, internal.kronecker(phonon))
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.matrix)
    }

    /// Returns the minimum eigenvalue, or an error when it is below `floor`.
    pub fn check_positive(&self, floor: f64) -> Result<f64> {
        let m = self.min_eigenvalue();
        if m < floor {
            Err(Error::NotPositive(m))
        } else {
            Ok(m)
        }
    }

    /// Population of the internal level `label`, summed over phonons.
    pub fn level_population(&self, label: &str) -> Result<f64> {
        let lvl = self.space.level(label)?;
        let f = self.space.fock_dim;
        Ok((0..f).map(|n| self.matrix[(lvl * f + n, lvl * f + n)].re).sum())
    }

    /// Phonon-number distribution `P(n)` after tracing out the internal levels.
    pub fn phonon_distribution(&self) -> Vec<f64> {
        phonon_distribution(&self.matrix, &self.space)
    }

    /// Reduced internal-state density matrix.
    pub fn reduced_internal(&self) -> DMatrix<C64> {
        let k = self.space.internal_dim();
        let f = self.space.fock_dim;
        DMatrix::from_fn(k, k, |i, j| {
            (0..f).map(|n| self.matrix[(i * f + n, j * f + n)]).sum()
        })
    }
}

/// Population in the top `levels` Fock states, summed over internal levels.
pub fn top_fock_population(matrix: &DMatrix<C64>, space: &HilbertSpace, levels: usize) -> f64 {
    let f = space.fock_dim;
    let lo = f.saturating_sub(levels);
    (0..space.internal_dim())
        .flat_map(|lvl| (lo..f).map(move |n| lvl * f + n))
        .map(|i| matrix[(i, i)].re)
        .sum()
}

pub(crate) fn phonon_distribution(matrix: &DMatrix<C64>, space: &HilbertSpace) -> Vec<f64> {
    let f = space.fock_dim;
    (0..f)
        .map(|n| {
            (0..space.internal_dim())
                .map(|lvl| matrix[(lvl * f + n, lvl * f + n)].re)
                .sum()
        })
        .collect()
}

/// Fock-space projector `|n⟩⟨n|`.
pub fn fock_state(fock_dim: usize, n: usize) -> Result<DMatrix<C64>> {
    if n >= fock_dim {
        return Err(Error::Invalid(format!(
            "Fock state |{n}⟩ outside truncation {fock_dim}"
        )));
    }
    let mut m = DMatrix::zeros(fock_dim, fock_dim);
    m[(n, n)] = ONE;
    Ok(m)
}

/// Bose–Einstein state with mean occupation `mean`, truncated and renormalized.
pub fn thermal_state(fock_dim: usize, mean: f64) -> Result<DMatrix<C64>> {
    if !(mean >= 0.0) {
        return Err(Error::param("mean", "thermal occupation must be ≥ 0"));
    }
    let r = mean / (1.0 + mean);
    let weights: Vec<f64> = (0..fock_dim).map(|n| r.powi(n as i32)).collect();
    let z: f64 = weights.iter().sum();
    Ok(DMatrix::from_fn(fock_dim, fock_dim, |i, j| {
        if i == j {
            C64::new(weights[i] / z, 0.0)
        } else {
            ZERO
        }
    }))
}

/// Coherent state `|α⟩` with real amplitude, truncated and renormalized.
pub fn coherent_state(fock_dim: usize, alpha: f64) -> DMatrix<C64> {
    let mut amps = vec![0.0f64; fock_dim];
    amps[0] = (-alpha * alpha / 2.0).exp();
    for n in 1..fock_dim {
        amps[n] = amps[n - 1] * alpha / (n as f64).sqrt();
    }
    let norm: f64 = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    let v = DVector::from_iterator(fock_dim, amps.iter().map(|a| C64::new(a / norm, 0.0)));
    &v * v.adjoint()
}

#[derive(Debug, Clone)]
pub struct Channel {
    pub name: String,
    pub rate: f64,
    pub jump: Operator,
}

/// Hamiltonian, dissipator channels and named observables on one space.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    space: Arc<HilbertSpace>,
    hamiltonian: Operator,
    channels: Vec<Channel>,
    observables: Vec<(String, Operator)>,
}

impl LindbladModel {
    pub const HERMITIAN_TOL: f64 = 1e-10;

    pub fn new(hamiltonian: Operator) -> Result<Self> {
        let h = hamiltonian.hermiticity_residual();
        if h > Self::HERMITIAN_TOL {
            return Err(Error::NotHermitian(h));
        }
        Ok(LindbladModel {
            space: hamiltonian.space.clone(),
            hamiltonian,
            channels: Vec::new(),
            observables: Vec::new(),
        })
    }

    pub fn add_channel(&mut self, name: impl Into<String>, rate: f64, jump: Operator) -> Result<()> {
        let name = name.into();
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::Invalid(format!(
                "channel `{name}` has invalid rate {rate}"
            )));
        }
        same_space(&self.space, &jump.space)?;
        self.channels.push(Channel { name, rate, jump });
        Ok(())
    }

    pub fn with_channel(mut self, name: impl Into<String>, rate: f64, jump: Operator) -> Result<Self> {
        self.add_channel(name, rate, jump)?;
        Ok(self)
    }

    pub fn add_observable(&mut self, name: impl Into<String>, op: Operator) -> Result<()> {
        same_space(&self.space, &op.space)?;
        let name = name.into();
        if let Some(slot) = self.observables.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = op;
        } else {
            self.observables.push((name, op));
        }
        Ok(())
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn observables(&self) -> &[(String, Operator)] {
        &self.observables
    }

    pub fn observable(&self, name: &str) -> Option<&Operator> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, o)| o)
    }

    /// Add `delta` to the Hamiltonian.
    pub fn shift_hamiltonian(&mut self, delta: &Operator) -> Result<()> {
        same_space(&self.space, &delta.space)?;
        let h = &self.hamiltonian + delta;
        if h.hermiticity_residual() > Self::HERMITIAN_TOL {
            return Err(Error::NotHermitian(h.hermiticity_residual()));
        }
        self.hamiltonian = h;
        Ok(())
    }
}

/// Dense reference evaluation of `dρ/dt` for an arbitrary (not necessarily
/// Hermitian) matrix argument.
pub fn lindblad_rhs_matrix(model: &LindbladModel, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    check_square(rho, model.space.dim())?;
    let h = model.hamiltonian.matrix();
    let mut out = (h * rho - rho * h) * (-I);
    for ch in &model.channels {
        if ch.rate == 0.0 {
            continue;
        }
        let l = ch.jump.matrix();
        let ld = l.adjoint();
        let ldl = &ld * l;
        let term = (l * rho * &ld) * C64::new(2.0, 0.0) - &ldl * rho - rho * &ldl;
        out += term * C64::new(ch.rate / 2.0, 0.0);
    }
    Ok(out)
}

/// `−i[H,ρ] + Σ_k (γ_k/2)(2 L_k ρ L_k† − ρ L_k†L_k − L_k†L_k ρ)`.
pub fn lindblad_rhs(model: &LindbladModel, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
    same_space(&model.space, &rho.space)?;
    lindblad_rhs_matrix(model, &rho.matrix)
}

/// `Tr(op · ρ)`.
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<C64> {
    same_space(&rho.space, &op.space)?;
    Ok(trace_product(op.matrix(), rho.matrix()))
}

/// `Tr(A·B)` without forming the product.
pub fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let d = a.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Write nonzero entries as `row,col,re,im` lines (0-based, 17 significant digits).
///
/// This is a debugging format with no stability guarantee across versions.
pub fn write_csv_triples<W: Write>(m: &DMatrix<C64>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "row,col,re,im")?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z != ZERO {
                writeln!(w, "{i},{j},{:.16e},{:.16e}", z.re, z.im)?;
            }
        }
    }
    Ok(())
}

pub fn read_csv_triples<R: BufRead>(r: R, dim: usize) -> Result<DMatrix<C64>> {
    let mut m = DMatrix::zeros(dim, dim);
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Invalid(e.to_string()))?;
        let line = line.trim();
        if lineno == 0 || line.is_empty() {
            continue;
        }
        let bad = || Error::Invalid(format!("malformed triple on line {}", lineno + 1));
        let mut parts = line.split(',');
        let mut next = || parts.next().ok_or_else(bad);
        let i: usize = next()?.trim().parse().map_err(|_| bad())?;
        let j: usize = next()?.trim().parse().map_err(|_| bad())?;
        let re: f64 = next()?.trim().parse().map_err(|_| bad())?;
        let im: f64 = next()?.trim().parse().map_err(|_| bad())?;
        if i >= dim || j >= dim {
            return Err(bad());
        }
        m[(i, j)] = C64::new(re, im);
    }
    Ok(m)
}

fn check_square(m: &DMatrix<C64>, expected: usize) -> Result<()> {
    if m.nrows() != expected || m.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

pub(crate) fn same_space(a: &Arc<HilbertSpace>, b: &Arc<HilbertSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else if a.dim() != b.dim() {
        Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        })
    } else {
        Err(Error::SpaceMismatch)
    }
}

fn indexed(m: &DMatrix<C64>) -> impl Iterator<Item = ((usize, usize), C64)> + '_ {
    let r = m.nrows();
    m.iter().enumerate().map(move |(k, v)| ((k % r, k / r), *v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const LAMBDA: [&str; 3] = ["+1", "-1", "A2"];

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn space_dimensions() {
        assert_eq!(compose_space(&LAMBDA, 10).unwrap().dim(), 30);
        let six = ["+1", "-1", "A2", "0", "Ey", "1A1"];
        assert_eq!(compose_space(&six, 16).unwrap().dim(), 96);
        assert_eq!(compose_space(&LAMBDA, 1), Err(Error::FockTooSmall(1)));
        assert!(matches!(
            compose_space(&["a", "a"], 4),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(matches!(
            compose_space(&six, 200),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn internal_major_ordering() {
        let s = compose_space(&LAMBDA, 4).unwrap();
        assert_eq!(s.index(2, 3), 11);
        let p = projector(&s, "-1").unwrap();
        for i in 0..12 {
            let expect = if (4..8).contains(&i) { 1.0 } else { 0.0 };
            assert_eq!(p.matrix()[(i, i)].re, expect);
        }
    }

    #[test]
    fn annihilation_blocks() {
        let s = compose_space(&["g"], 2).unwrap();
        let b = annihilation(&s);
        assert_eq!(b.matrix()[(0, 1)], c(1.0));
        assert_eq!(b.matrix()[(1, 0)], ZERO);
        assert_eq!(b.matrix()[(0, 0)], ZERO);

        let s = compose_space(&LAMBDA, 6).unwrap();
        let b = annihilation(&s);
        let nb = &creation(&s) * &b;
        assert!(nb.max_abs_diff(&number(&s)) < 1e-14);
        // top Fock level is a fixed point of b†b
        let top = s.index(0, 5);
        assert_abs_diff_eq!(nb.matrix()[(top, top)].re, 5.0, epsilon = 1e-14);
        let one = s.index(1, 1);
        assert_abs_diff_eq!(nb.matrix()[(one, one)].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn commutator_truncation_structure() {
        let f = 7;
        let s = compose_space(&["g"], f).unwrap();
        let b = annihilation(&s);
        let comm = b.commutator(&b.adjoint()).unwrap();
        for i in 0..f {
            for j in 0..f {
                let expect = match (i == j, i) {
                    (true, n) if n == f - 1 => -((f - 1) as f64),
                    (true, _) => 1.0,
                    _ => 0.0,
                };
                assert_abs_diff_eq!(comm.matrix()[(i, j)].re, expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn transition_algebra() {
        let s = compose_space(&LAMBDA, 3).unwrap();
        let a = transition(&s, "A2", "+1").unwrap();
        let b = transition(&s, "+1", "A2").unwrap();
        assert_eq!(a.adjoint().matrix(), b.matrix());
        let p = transition(&s, "-1", "-1").unwrap();
        assert!((&p * &p).max_abs_diff(&p) < 1e-15);
        for x in LAMBDA {
            for y in LAMBDA {
                for z in LAMBDA {
                    for w in LAMBDA {
                        let lhs = &transition(&s, x, y).unwrap() * &transition(&s, z, w).unwrap();
                        let rhs = if y == z {
                            transition(&s, x, w).unwrap()
                        } else {
                            Operator::zeros(&s)
                        };
                        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
                    }
                }
            }
        }
        assert!(matches!(
            transition(&s, "A2", "0"),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn sigma_y_from_transitions() {
        // |d⟩ is not a basis label here; check the definition on basis levels.
        let s = compose_space(&LAMBDA, 2).unwrap();
        let sy = sigma_y(&s, "A2", "+1").unwrap();
        let up = transition(&s, "A2", "+1").unwrap();
        let expect = (&up - &up.adjoint()).scale(C64::new(0.0, -1.0));
        assert!(sy.max_abs_diff(&expect) < 1e-15);
        assert!(sy.is_hermitian(1e-15));
        let sx = sigma_x(&s, "A2", "+1").unwrap();
        assert!(sx.is_hermitian(1e-15));
    }

    #[test]
    fn expectation_examples() {
        let s = compose_space(&LAMBDA, 4).unwrap();
        let n = number(&s);
        let mut int = DMatrix::zeros(3, 3);
        int[(0, 0)] = c(1.0);
        let ground = DensityMatrix::product(&s, &int, &fock_state(4, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(expectation(&ground, &n).unwrap().re, 0.0);
        let two = DensityMatrix::product(&s, &int, &fock_state(4, 2).unwrap()).unwrap();
        assert_abs_diff_eq!(expectation(&two, &n).unwrap().re, 2.0, epsilon = 1e-14);

        let mixed = DMatrix::identity(3, 3) * c(1.0 / 3.0);
        let rho = DensityMatrix::product(&s, &mixed, &fock_state(4, 1).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut d = DMatrix::zeros(3, 3);
        d[(0, 0)] = c(0.5);
        d[(1, 1)] = c(0.5);
        d[(0, 1)] = c(-0.5);
        d[(1, 0)] = c(-0.5);
        let dark = Operator::internal(&s, &d).unwrap();
        assert_abs_diff_eq!(expectation(&rho, &dark).unwrap().re, 1.0 / 3.0, epsilon = 1e-14);
        assert!(h > 0.0);
    }

    #[test]
    fn density_matrix_validation() {
        let s = compose_space(&["g"], 3).unwrap();
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 0)] = c(0.5);
        assert!(matches!(DensityMatrix::new(&s, m.clone()), Err(Error::BadTrace(_))));
        m[(1, 1)] = c(0.5);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(matches!(DensityMatrix::new(&s, m.clone()), Err(Error::NotHermitian(_))));
        m[(1, 0)] = C64::new(0.0, -0.1);
        let rho = DensityMatrix::new(&s, m).unwrap();
        assert!(rho.check_positive(DensityMatrix::POSITIVITY_FLOOR).is_ok());
    }

    #[test]
    fn rhs_examples() {
        let s = compose_space(&["g"], 4).unwrap();
        let model = LindbladModel::new(Operator::zeros(&s)).unwrap();
        let rho = DensityMatrix::product(
            &s,
            &DMatrix::identity(1, 1),
            &thermal_state(4, 0.7).unwrap(),
        )
        .unwrap();
        assert_eq!(max_abs(&lindblad_rhs(&model, &rho).unwrap()), 0.0);

        // d⟨n⟩/dt = −γ⟨n⟩ on |1⟩⟨1| under damping √γ b:
        // 2bρb† = 2|0⟩⟨0|, {b†b, ρ} = 2|1⟩⟨1|, so the RHS is γ(|0⟩⟨0| − |1⟩⟨1|).
        let gamma = 0.37;
        let model = model
            .with_channel("damping", gamma, annihilation(&s))
            .unwrap();
        let one = DensityMatrix::product(&s, &DMatrix::identity(1, 1), &fock_state(4, 1).unwrap())
            .unwrap();
        let d = lindblad_rhs(&model, &one).unwrap();
        assert_abs_diff_eq!(d[(0, 0)].re, gamma, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(1, 1)].re, -gamma, epsilon = 1e-15);
        let dn = trace_product(number(&s).matrix(), &d);
        assert_abs_diff_eq!(dn.re, -gamma, epsilon = 1e-15);
    }

    #[test]
    fn csv_triples_round_trip() {
        let s = compose_space(&LAMBDA, 3).unwrap();
        let op = sigma_y(&s, "A2", "-1").unwrap();
        let mut buf = Vec::new();
        write_csv_triples(op.matrix(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("row,col,re,im\n"));
        let back = read_csv_triples(&buf[..], 9).unwrap();
        assert_eq!(&back, op.matrix());
    }

    #[test]
    fn space_mismatch_errors() {
        let a = compose_space(&LAMBDA, 3).unwrap();
        let b = compose_space(&LAMBDA, 4).unwrap();
        let rho = DensityMatrix::product(
            &a,
            &(DMatrix::identity(3, 3) * c(1.0 / 3.0)),
            &fock_state(3, 0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            expectation(&rho, &number(&b)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
