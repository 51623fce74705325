//! Precompiled action of a Lindblad generator on a dense, column-major ρ.
//!
//! Operators stay dense; only their nonzero entries are gathered once so that
//! each right-hand-side call costs `O(nnz · d)` instead of `O(d³)` products.
//! [`crate::operator::lindblad_rhs`] remains the dense reference.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::LindbladModel;

/// Largest vectorized (Liouville-space) dimension accepted by dense
/// superoperator routines such as the steady-state solve.
pub const MAX_LIOUVILLE_DIM: usize = 1024;

type Entries = Vec<(usize, usize, C64)>;

#[derive(Debug, Clone)]
pub struct Generator {
    dim: usize,
    /// Nonzeros of `A = −i H_eff`, with `H_eff = H − (i/2) Σ γ L†L`.
    a: Entries,
    /// Nonzeros of `√γ L` per channel.
    jumps: Vec<Entries>,
}

fn nonzeros(m: &DMatrix<C64>, scale: C64) -> Entries {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v.norm() > 0.0 {
                out.push((i, j, v * scale));
            }
        }
    }
    out
}

impl Generator {
    pub fn new(model: &LindbladModel) -> Self {
        let d = model.space().dim();
        let mut heff = model.hamiltonian().matrix().clone();
        let mut jumps = Vec::new();
        for ch in model.channels() {
            if ch.rate == 0.0 {
                continue;
            }
            let l = ch.jump.matrix();
            heff -= (l.adjoint() * l) * C64::new(0.0, ch.rate / 2.0);
            jumps.push(nonzeros(l, C64::new(ch.rate.sqrt(), 0.0)));
        }
        Generator {
            dim: d,
            a: nonzeros(&heff, C64::new(0.0, -1.0)),
            jumps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out = L(ρ)` for a column-major `d × d` slice; `scratch` must have length `d²`.
    pub fn apply(&self, rho: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        let d = self.dim;
        debug_assert_eq!(rho.len(), d * d);
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        // A ρ: row i of out gains a · row k of ρ
        for &(i, k, a) in &self.a {
            for c in 0..d {
                out[c * d + i] += a * rho[c * d + k];
            }
        }
        // ρ A†: column j of out gains conj(a) · column k of ρ
        for &(j, k, a) in &self.a {
            let a = a.conj();
            let (src, dst) = (k * d, j * d);
            for r in 0..d {
                out[dst + r] += a * rho[src + r];
            }
        }
        // Σ L ρ L†
        for jump in &self.jumps {
            scratch.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for &(i, k, l) in jump {
                for c in 0..d {
                    scratch[c * d + i] += l * rho[c * d + k];
                }
            }
            for &(j, k, l) in jump {
                let l = l.conj();
                let (src, dst) = (k * d, j * d);
                for r in 0..d {
                    out[dst + r] += l * scratch[src + r];
                }
            }
        }
    }

    pub fn apply_matrix(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim;
        let mut out = DMatrix::zeros(d, d);
        let mut scratch = vec![C64::new(0.0, 0.0); d * d];
        self.apply(rho.as_slice(), out.as_mut_slice(), &mut scratch);
        out
    }

    /// Dense `d² × d²` superoperator acting on column-major `vec(ρ)`.
    pub fn superoperator(&self) -> Result<DMatrix<C64>> {
        let n = self.dim * self.dim;
        if n > MAX_LIOUVILLE_DIM {
            return Err(Error::DimensionTooLarge {
                dim: n,
                limit: MAX_LIOUVILLE_DIM,
            });
        }
        let mut sup = DMatrix::zeros(n, n);
        let mut basis = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            basis[k] = C64::new(1.0, 0.0);
            self.apply(&basis, &mut col, &mut scratch);
            sup.column_mut(k).copy_from_slice(&col);
            basis[k] = C64::new(0.0, 0.0);
        }
        Ok(sup)
    }
}
