//! Time evolution, stationary states, cooling-rate fits and detuning ensembles.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::liouvillian::Generator;
use crate::model::{build_model_three_level, product_state, InternalState, PhononState};
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::operator::{
    max_abs, min_hermitian_eigenvalue, top_fock_population, trace_product, DensityMatrix,
    LindbladModel,
};
use crate::params::ModelParams;

pub const LEAKAGE_THRESHOLD: f64 = 1e-4;
pub const TRACE_TOL: f64 = 1e-6;
pub const POSITIVITY_FLOOR: f64 = -1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveSettings {
    pub t_final: f64,
    pub sample_count: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub leakage_threshold: f64,
    /// Number of evenly spaced samples at which the minimum eigenvalue of ρ
    /// is checked against [`POSITIVITY_FLOOR`]. Each check is O(d³).
    pub positivity_checks: usize,
}

impl EvolveSettings {
    pub fn new(t_final: f64, sample_count: usize) -> Self {
        EvolveSettings {
            t_final,
            sample_count,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            leakage_threshold: LEAKAGE_THRESHOLD,
            positivity_checks: 0,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_positivity_checks(mut self, n: usize) -> Self {
        self.positivity_checks = n;
        self
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.sample_count;
        (0..n)
            .map(|k| self.t_final * k as f64 / (n - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::param("t_final", "must be positive and finite"));
        }
        if self.sample_count < 2 {
            return Err(Error::param("sample_count", "need at least 2 samples"));
        }
        OdeOptions::new(self.rel_tol, self.abs_tol).validate()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverMeta {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub stats: OdeStats,
    /// Largest |ρ − ρ†| seen at a sample before symmetrization.
    pub max_hermiticity_residual: f64,
    /// Smallest eigenvalue over the positivity checkpoints (∞ if none).
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub observables: Vec<String>,
    /// `values[k][i]` is observable `k` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    pub trace: Vec<f64>,
    /// Population in the top two Fock levels.
    pub leakage: Vec<f64>,
    pub meta: SolverMeta,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        match name {
            "trace" => Some(&self.trace),
            "leakage" => Some(&self.leakage),
            _ => self
                .observables
                .iter()
                .position(|o| o == name)
                .map(|k| self.values[k].as_slice()),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t,<observables...>,trace,leakage`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for o in &self.observables {
            write!(w, ",{o}")?;
        }
        writeln!(w, ",trace,leakage")?;
        for i in 0..self.times.len() {
            write!(w, "{:.16e}", self.times[i])?;
            for col in &self.values {
                write!(w, ",{:.16e}", col[i])?;
            }
            writeln!(w, ",{:.16e},{:.16e}", self.trace[i], self.leakage[i])?;
        }
        Ok(())
    }
}

/// Integrate the master equation of `model` from `rho0`, sampling all named
/// observables on a uniform grid over `[0, t_final]`.
pub fn evolve(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    settings: &EvolveSettings,
) -> Result<TimeSeries> {
    evolve_with_final(model, rho0, settings).map(|(s, _)| s)
}

/// [`evolve`], also returning the (symmetrized) state at `t_final`.
pub fn evolve_with_final(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    settings: &EvolveSettings,
) -> Result<(TimeSeries, DensityMatrix)> {
    settings.validate()?;
    crate::operator::same_space(model.space(), rho0.space())?;
    let space = model.space().clone();
    let d = space.dim();
    let gen = Generator::new(model);
    let times = settings.times();
    let n = times.len();
    let obs = model.observables();
    let mut series = TimeSeries {
        times: times.clone(),
        observables: obs.iter().map(|(k, _)| k.clone()).collect(),
        values: vec![vec![0.0; n]; obs.len()],
        trace: vec![0.0; n],
        leakage: vec![0.0; n],
        meta: SolverMeta {
            rel_tol: settings.rel_tol,
            abs_tol: settings.abs_tol,
            min_eigenvalue: f64::INFINITY,
            ..Default::default()
        },
    };
    let check_every = match settings.positivity_checks {
        0 => usize::MAX,
        k => ((n - 1) / k).max(1),
    };
    let has_phonons = space.fock_dim() > 1;
    let mut scratch = vec![C64::new(0.0, 0.0); d * d];
    let mut final_state = DMatrix::zeros(d, d);
    let opts = OdeOptions::new(settings.rel_tol, settings.abs_tol);
    let stats = integrate(
        |_, y: &[C64], dy: &mut [C64]| gen.apply(y, dy, &mut scratch),
        0.0,
        rho0.matrix().as_slice().to_vec(),
        &times,
        opts,
        |i, t, y| {
            let raw = DMatrix::from_column_slice(d, d, y);
            let herm = crate::operator::hermiticity_residual(&raw);
            series.meta.max_hermiticity_residual = series.meta.max_hermiticity_residual.max(herm);
            let rho = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
            let tr = rho.trace().re;
            if !tr.is_finite() {
                return Err(Error::NonFinite(t));
            }
            if (tr - 1.0).abs() > TRACE_TOL {
                return Err(Error::TraceDrift { t, trace: tr });
            }
            series.trace[i] = tr;
            for (k, (_, op)) in obs.iter().enumerate() {
                series.values[k][i] = trace_product(op.matrix(), &rho).re;
            }
            if has_phonons {
                let leak = top_fock_population(&rho, &space, 2);
                series.leakage[i] = leak;
                if leak > settings.leakage_threshold {
                    return Err(Error::Leakage {
                        t,
                        value: leak,
                        threshold: settings.leakage_threshold,
                    });
                }
            }
            if i % check_every == 0 || (settings.positivity_checks > 0 && i == n - 1) {
                let m = min_hermitian_eigenvalue(&rho);
                series.meta.min_eigenvalue = series.meta.min_eigenvalue.min(m);
                if m < POSITIVITY_FLOOR {
                    return Err(Error::NotPositive(m));
                }
            }
            if i == n - 1 {
                final_state = rho;
            }
            Ok(())
        },
    )?;
    series.meta.stats = stats;
    Ok((series, DensityMatrix::new_unchecked(&space, final_state)))
}

/// Threshold on the ratio of the second-smallest to the largest pivot of the
/// full-pivot LU factorization of the Liouvillian; below it the null space
/// is treated as degenerate.
pub const UNIQUENESS_RATIO: f64 = 1e-10;
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

/// Unique stationary state from the vectorized Liouvillian.
///
/// Uniqueness is judged from the pivots of a full-pivot LU factorization,
/// a rank-revealing stand-in for the singular values. The trace condition
/// replaces the (redundant) equation for ρ₀₀.
pub fn steady_state(model: &LindbladModel) -> Result<DensityMatrix> {
    let gen = Generator::new(model);
    let sup = gen.superoperator()?;
    let d = gen.dim();
    let n = d * d;

    let lu = sup.clone().full_piv_lu();
    let u = lu.u();
    let mut pivots: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
    pivots.sort_by(|a, b| b.total_cmp(a));
    if n >= 2 {
        let ratio = pivots[n - 2] / pivots[0].max(f64::MIN_POSITIVE);
        if ratio <= UNIQUENESS_RATIO {
            return Err(Error::NonUniqueSteadyState(ratio));
        }
    }

    let mut a = sup.clone();
    for j in 0..n {
        a[(0, j)] = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i * d + i)] = C64::new(1.0, 0.0);
    }
    let mut rhs = DVector::zeros(n);
    rhs[0] = C64::new(1.0, 0.0);
    let x = a
        .full_piv_lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("bordered Liouvillian".into()))?;
    let raw = DMatrix::from_column_slice(d, d, x.as_slice());
    let mut rho = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let tr = rho.trace();
    rho /= tr;
    let res = max_abs(&gen.apply_matrix(&rho));
    if !(res < STEADY_RESIDUAL_TOL) {
        return Err(Error::SteadyStateResidual(res));
    }
    DensityMatrix::new(model.space(), rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Data with `t < discard` are ignored.
    pub discard: f64,
    /// Largest accepted `residual_rms / |c|`.
    pub max_relative_residual: f64,
    /// Minimum number of e-folds `w·(t_end − t_start)` the window must span.
    pub min_efolds: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            discard: 0.0,
            max_relative_residual: 0.02,
            min_efolds: 3.0,
        }
    }
}

impl FitOptions {
    /// Discard the first `5/Γ` of data (fast internal transient).
    pub fn after_transient(gamma_total: f64) -> Self {
        FitOptions {
            discard: 5.0 / gamma_total,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingFit {
    pub w_fit: f64,
    pub n_ss_fit: f64,
    pub n0_fit: f64,
    pub fit_window: (f64, f64),
    pub residual_rms: f64,
}

/// Least-squares fit of `a + c·e^{−wt}` with `a, c` eliminated analytically
/// for each trial `w` and `ln w` found by scan plus golden section.
pub fn extract_cooling_rate(
    series: &TimeSeries,
    observable: &str,
    opts: &FitOptions,
) -> Result<CoolingFit> {
    let ys = series
        .column(observable)
        .ok_or_else(|| Error::Fit(format!("no observable `{observable}`")))?;
    let (t, y): (Vec<f64>, Vec<f64>) = series
        .times
        .iter()
        .zip(ys)
        .filter(|(t, _)| **t >= opts.discard)
        .map(|(t, y)| (*t, *y))
        .unzip();
    fit_exponential(&t, &y, opts)
}

pub fn fit_exponential(t: &[f64], y: &[f64], opts: &FitOptions) -> Result<CoolingFit> {
    if t.len() < 4 {
        return Err(Error::Fit(format!("only {} points in fit window", t.len())));
    }
    let t0 = t[0];
    let span = t[t.len() - 1] - t0;
    if !(span > 0.0) {
        return Err(Error::Fit("empty fit window".into()));
    }
    // Linear solve for (a, c) at fixed w; basis uses shifted time for conditioning.
    let solve = |w: f64| -> (f64, f64, f64) {
        let (mut s1, mut se, mut see, mut sy, mut sey) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&ti, &yi) in t.iter().zip(y) {
            let e = (-w * (ti - t0)).exp();
            s1 += 1.0;
            se += e;
            see += e * e;
            sy += yi;
            sey += e * yi;
        }
        let det = s1 * see - se * se;
        if det.abs() < 1e-300 {
            return (f64::NAN, f64::NAN, f64::INFINITY);
        }
        let a = (see * sy - se * sey) / det;
        let c = (s1 * sey - se * sy) / det;
        let ssr: f64 = t
            .iter()
            .zip(y)
            .map(|(&ti, &yi)| (yi - a - c * (-w * (ti - t0)).exp()).powi(2))
            .sum();
        (a, c, ssr)
    };
    let lo = (0.01 / span).ln();
    let hi = (1e4 / span).ln();
    let grid = 400;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=grid {
        let lw = lo + (hi - lo) * k as f64 / grid as f64;
        let ssr = solve(lw.exp()).2;
        if ssr < best.0 {
            best = (ssr, lw);
        }
    }
    let step = (hi - lo) / grid as f64;
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = solve(x1.exp()).2;
    let mut f2 = solve(x2.exp()).2;
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = solve(x1.exp()).2;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = solve(x2.exp()).2;
        }
    }
    let w = (0.5 * (a + b)).exp();
    let (a_fit, c_shift, ssr) = solve(w);
    if !a_fit.is_finite() {
        return Err(Error::Fit("degenerate exponential basis".into()));
    }
    let rms = (ssr / t.len() as f64).sqrt();
    if w * span < opts.min_efolds {
        return Err(Error::Fit(format!(
            "window spans {:.2} e-folds, need {}",
            w * span,
            opts.min_efolds
        )));
    }
    if rms > opts.max_relative_residual * c_shift.abs() {
        return Err(Error::Fit(format!(
            "residual rms {rms:e} exceeds {} of amplitude {:e}; tail is not a single decaying exponential",
            opts.max_relative_residual,
            c_shift.abs()
        )));
    }
    let c = c_shift * (w * t0).exp();
    Ok(CoolingFit {
        w_fit: w,
        n_ss_fit: a_fit,
        n0_fit: a_fit + c,
        fit_window: (t0, t[t.len() - 1]),
        residual_rms: rms,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub internal: InternalState,
    pub phonon: PhononState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Pointwise mean over realizations; `trace` is the mean trace and
    /// `leakage` the worst leakage at each sample.
    pub mean: TimeSeries,
    pub n_ss_mean: f64,
    /// First sample time with mean ⟨n⟩ ≤ 1.1 n_ss_mean.
    pub cooling_time: Option<f64>,
    pub detunings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub delta_max: f64,
    pub samples: usize,
    pub seed: u64,
    pub fock_dim: usize,
    pub settings: EvolveSettings,
    pub initial: InitialCondition,
}

/// Draw the quasi-static shifts δ ∈ U[−δ_max, δ_max], in realization order.
pub fn draw_detunings(delta_max: f64, samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let u: f64 = rng.random();
            if delta_max == 0.0 {
                0.0
            } else {
                delta_max * (2.0 * u - 1.0)
            }
        })
        .collect()
}

fn run_realization(base: &ModelParams, spec: &EnsembleSpec, delta: f64) -> Result<TimeSeries> {
    let mut p = base.clone();
    p.nuclear_shift = delta;
    let model = build_model_three_level(&p, spec.fock_dim)?;
    let rho0 = product_state(model.space(), &spec.initial.internal, &spec.initial.phonon)?;
    evolve(&model, &rho0, &spec.settings)
}

/// Average ⟨n(t)⟩ over quasi-static |−1⟩ shifts drawn uniformly from
/// `[−δ_max, δ_max]`. Realizations run in parallel when the `parallel`
/// feature is on; results are combined in realization order.
pub fn monte_carlo_detuning(base: &ModelParams, spec: &EnsembleSpec) -> Result<EnsembleResult> {
    if spec.samples == 0 {
        return Err(Error::param("samples", "must be ≥ 1"));
    }
    if !(spec.delta_max >= 0.0) {
        return Err(Error::param("delta_max", "must be ≥ 0"));
    }
    let deltas = draw_detunings(spec.delta_max, spec.samples, spec.seed);

    let runs: Vec<Result<TimeSeries>> = if spec.delta_max == 0.0 {
        // all realizations coincide
        vec![run_realization(base, spec, 0.0)]
    } else {
        map_indexed(&deltas, |d| run_realization(base, spec, *d))
    };
    let mut series = Vec::with_capacity(runs.len());
    for (index, r) in runs.into_iter().enumerate() {
        series.push(r.map_err(|e| Error::Realization {
            index,
            source: Box::new(e),
        })?);
    }

    let first = &series[0];
    let n_times = first.len();
    let m = series.len() as f64;
    let mut mean = first.clone();
    mean.meta.stats = OdeStats::default();
    for k in 0..mean.values.len() {
        for i in 0..n_times {
            mean.values[k][i] = series.iter().map(|s| s.values[k][i]).sum::<f64>() / m;
        }
    }
    for i in 0..n_times {
        mean.trace[i] = series.iter().map(|s| s.trace[i]).sum::<f64>() / m;
        mean.leakage[i] = series.iter().map(|s| s.leakage[i]).fold(0.0, f64::max);
    }
    for s in &series {
        mean.meta.stats.accepted += s.meta.stats.accepted;
        mean.meta.stats.rejected += s.meta.stats.rejected;
        mean.meta.stats.evaluations += s.meta.stats.evaluations;
        mean.meta.max_hermiticity_residual = mean
            .meta
            .max_hermiticity_residual
            .max(s.meta.max_hermiticity_residual);
    }

    let n = mean
        .column("n")
        .ok_or_else(|| Error::Invalid("model has no `n` observable".into()))?;
    let tail = (n_times / 10).max(1);
    let n_ss_mean = n[n_times - tail..].iter().sum::<f64>() / tail as f64;
    let cooling_time = mean
        .times
        .iter()
        .zip(n)
        .find(|(_, v)| **v <= 1.1 * n_ss_mean)
        .map(|(t, _)| *t);
    Ok(EnsembleResult {
        mean,
        n_ss_mean,
        cooling_time,
        detunings: deltas,
    })
}

/// Map over a slice, in parallel when enabled, preserving order.
pub fn map_indexed<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
