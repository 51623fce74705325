//! Dormand–Prince 5(4) with Hairer's continuous extension.
//!
//! Works on flat slices of any [`OdeScalar`] (real or complex). The stepper is
//! exposed directly for callers that need their own stopping rule; most users
//! want [`integrate`], which samples the dense output on a time grid.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait OdeScalar:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl OdeScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl OdeScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

impl OdeOptions {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        OdeOptions {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for tol in [self.rel_tol, self.abs_tol] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::BadTolerance(tol));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

pub struct Dopri5<T: OdeScalar, F: FnMut(f64, &[T], &mut [T])> {
    f: F,
    opts: OdeOptions,
    t: f64,
    t_prev: f64,
    h: f64,
    y: Vec<T>,
    k: [Vec<T>; 7],
    ytmp: Vec<T>,
    ynew: Vec<T>,
    rcont: [Vec<T>; 5],
    stats: OdeStats,
    reject_streak: bool,
}

impl<T: OdeScalar, F: FnMut(f64, &[T], &mut [T])> Dopri5<T, F> {
    pub fn new(mut f: F, t0: f64, y0: Vec<T>, opts: OdeOptions) -> Result<Self> {
        opts.validate()?;
        let n = y0.len();
        let z = || vec![T::zero(); n];
        let mut k = [z(), z(), z(), z(), z(), z(), z()];
        f(t0, &y0, &mut k[0]);
        let mut s = Dopri5 {
            f,
            opts,
            t: t0,
            t_prev: t0,
            h: 0.0,
            y: y0,
            k,
            ytmp: z(),
            ynew: z(),
            rcont: [z(), z(), z(), z(), z()],
            stats: OdeStats {
                evaluations: 1,
                ..Default::default()
            },
            reject_streak: false,
        };
        s.h = match opts.h_init {
            Some(h) if h > 0.0 => h,
            _ => s.initial_step(),
        };
        s.h = s.h.min(opts.h_max);
        for i in 0..n {
            s.rcont[0][i] = s.y[i];
        }
        Ok(s)
    }

    fn rms(&self, v: &[T], scale_from: &[T]) -> f64 {
        if v.is_empty() {
            return 0.0;
        }
        let s: f64 = v
            .iter()
            .zip(scale_from)
            .map(|(x, y)| {
                let w = self.opts.abs_tol + self.opts.rel_tol * y.modulus();
                (x.modulus() / w).powi(2)
            })
            .sum();
        (s / v.len() as f64).sqrt()
    }

    fn initial_step(&mut self) -> f64 {
        let d0 = self.rms(&self.y, &self.y);
        let d1 = self.rms(&self.k[0], &self.y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        for i in 0..self.y.len() {
            self.ytmp[i] = self.y[i] + self.k[0][i] * h0;
        }
        (self.f)(self.t + h0, &self.ytmp, &mut self.k[1]);
        self.stats.evaluations += 1;
        let diff: Vec<T> = self.k[1]
            .iter()
            .zip(&self.k[0])
            .map(|(a, b)| *a - *b)
            .collect();
        let d2 = self.rms(&diff, &self.y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn stats(&self) -> OdeStats {
        self.stats
    }

    /// Take one accepted step (retrying internally after rejections).
    pub fn step(&mut self) -> Result<()> {
        let n = self.y.len();
        loop {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::MaxSteps(self.opts.max_steps));
            }
            let h = self.h;
            if h.abs() <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t, h });
            }
            let t = self.t;
            let y = &self.y;
            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let ytmp = &mut self.ytmp;
            for i in 0..n {
                ytmp[i] = y[i] + k1[i] * (h * A21);
            }
            (self.f)(t + C2 * h, ytmp, k2);
            for i in 0..n {
                ytmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
            }
            (self.f)(t + C3 * h, ytmp, k3);
            for i in 0..n {
                ytmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
            }
            (self.f)(t + C4 * h, ytmp, k4);
            for i in 0..n {
                ytmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
            }
            (self.f)(t + C5 * h, ytmp, k5);
            for i in 0..n {
                ytmp[i] = y[i]
                    + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
            }
            (self.f)(t + h, ytmp, k6);
            let ynew = &mut self.ynew;
            for i in 0..n {
                ynew[i] = y[i]
                    + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
            }
            (self.f)(t + h, ynew, k7);
            self.stats.evaluations += 6;

            let mut acc = 0.0;
            let mut finite = true;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                    * h;
                let w = self.opts.abs_tol
                    + self.opts.rel_tol * y[i].modulus().max(ynew[i].modulus());
                acc += (e.modulus() / w).powi(2);
                finite &= ynew[i].is_finite_value();
            }
            let err = if n == 0 { 0.0 } else { (acc / n as f64).sqrt() };
            if !finite || !err.is_finite() {
                self.stats.rejected += 1;
                self.h *= FAC_MIN;
                self.reject_streak = true;
                if self.stats.rejected > 50 && self.h.abs() < 1e-10 {
                    return Err(Error::NonFinite(self.t));
                }
                continue;
            }

            if err <= 1.0 {
                // dense-output coefficients for [t, t+h]
                for i in 0..n {
                    let yd0 = y[i];
                    let ydiff = ynew[i] - yd0;
                    let bspl = k1[i] * h - ydiff;
                    self.rcont[0][i] = yd0;
                    self.rcont[1][i] = ydiff;
                    self.rcont[2][i] = bspl;
                    self.rcont[3][i] = ydiff - k7[i] * h - bspl;
                    self.rcont[4][i] = (k1[i] * D1
                        + k3[i] * D3
                        + k4[i] * D4
                        + k5[i] * D5
                        + k6[i] * D6
                        + k7[i] * D7)
                        * h;
                }
                std::mem::swap(k1, k7);
                std::mem::swap(&mut self.y, &mut self.ynew);
                self.t_prev = self.t;
                self.t += h;
                self.stats.accepted += 1;
                let mut fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
                };
                if self.reject_streak {
                    fac = fac.min(1.0);
                }
                self.reject_streak = false;
                self.h = (h * fac).min(self.opts.h_max);
                return Ok(());
            }
            self.stats.rejected += 1;
            self.reject_streak = true;
            self.h = h * (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
        }
    }

    /// Dense output at `t` within the last accepted step.
    pub fn interpolate(&self, t: f64, out: &mut [T]) {
        let h = self.t - self.t_prev;
        if h == 0.0 {
            out.copy_from_slice(&self.y);
            return;
        }
        let th = (t - self.t_prev) / h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        for i in 0..out.len() {
            out[i] = r[0][i]
                + (r[1][i] + (r[2][i] + (r[3][i] + r[4][i] * th1) * th) * th1) * th;
        }
    }

    pub fn last_step(&self) -> (f64, f64) {
        (self.t_prev, self.t)
    }
}

/// Integrate from `t0` and call `on_sample(index, t, y)` at every requested
/// time (non-decreasing, all ≥ `t0`). The callback may abort with an error.
pub fn integrate<T, F, S>(
    f: F,
    t0: f64,
    y0: Vec<T>,
    sample_times: &[f64],
    opts: OdeOptions,
    mut on_sample: S,
) -> Result<OdeStats>
where
    T: OdeScalar,
    F: FnMut(f64, &[T], &mut [T]),
    S: FnMut(usize, f64, &[T]) -> Result<()>,
{
    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.first().is_some_and(|&s| s < t0)
    {
        return Err(Error::Invalid("sample times must be sorted and ≥ t0".into()));
    }
    let mut solver = Dopri5::new(f, t0, y0, opts)?;
    let mut buf = vec![T::zero(); solver.y().len()];
    let mut next = 0;
    while next < sample_times.len() && sample_times[next] == t0 {
        on_sample(next, t0, solver.y())?;
        next += 1;
    }
    while next < sample_times.len() {
        solver.step()?;
        let t = solver.t();
        while next < sample_times.len() && sample_times[next] <= t {
            let ts = sample_times[next];
            if ts == t {
                buf.copy_from_slice(solver.y());
            } else {
                solver.interpolate(ts, &mut buf);
            }
            on_sample(next, ts, &buf)?;
            next += 1;
        }
    }
    Ok(solver.stats())
}
