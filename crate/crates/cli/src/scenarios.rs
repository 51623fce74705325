use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use eitcool::analytics::{absorption_spectrum, rates, steady_phonon, SpectrumValues};
pub use eitcool::analytics::robustness_sweep;
use eitcool::constants::TWO_PI;
use eitcool::dynamics::{
    evolve, extract_cooling_rate, map_indexed, monte_carlo_detuning, EnsembleSpec, EvolveSettings,
    FitOptions, InitialCondition, TimeSeries,
};
use eitcool::effective::effective_rates_for;
use eitcool::model::{
    build_model_four_level, build_model_seven_level, build_model_three_level, dressed_states,
    product_state,
};
use eitcool::{Bath, ModelParams};

use crate::config::{InitialConfig, ScenarioConfig, ScenarioKind, SolverConfig};
use crate::manifest::{num, write_bytes, write_table, OutputFile, Progress, RunManifest, SolverSummary, UnitBlock};
use crate::CliError;

/// Positivity is checked at this many evenly spaced samples per trajectory.
const POSITIVITY_CHECKS: usize = 10;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub output_dir: PathBuf,
    pub config_file: Option<String>,
    pub threads: usize,
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    dir: &'a Path,
    outputs: Vec<OutputFile>,
    solver: SolverSummary,
    summary: BTreeMap<String, f64>,
    warnings: Vec<String>,
    progress: Progress,
}

impl Ctx<'_> {
    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        self.outputs.push(write_table(self.dir, name, &header, rows)?);
        Ok(())
    }

    fn series(&mut self, name: &str, s: &TimeSeries) -> Result<(), CliError> {
        let mut buf = Vec::new();
        s.write_csv(&mut buf).expect("vec write");
        self.outputs.push(write_bytes(self.dir, name, &buf, s.len())?);
        Ok(())
    }

    fn settings(&self, t_default: f64) -> EvolveSettings {
        settings_from(&self.cfg.solver, t_default)
    }
}

pub fn settings_from(solver: &SolverConfig, t_default: f64) -> EvolveSettings {
    EvolveSettings::new(solver.t_final.unwrap_or(t_default), solver.sample_count)
        .with_tolerances(solver.rel_tol, solver.abs_tol)
        .with_positivity_checks(POSITIVITY_CHECKS)
}

/// Run a scenario into `opts.output_dir` and write `manifest.json` there.
///
/// The manifest is written on solver failure too, with the error and the
/// number of completed work items. If the output directory itself cannot be
/// created no manifest is written.
pub fn run(cfg: &ScenarioConfig, opts: &RunOptions) -> (Option<RunManifest>, Result<(), CliError>) {
    let dir = opts.output_dir.as_path();
    if let Err(e) = std::fs::create_dir_all(dir) {
        return (None, Err(CliError::io(dir, e)));
    }
    let started = Instant::now();
    let mut ctx = Ctx {
        cfg,
        dir,
        outputs: Vec::new(),
        solver: SolverSummary::default(),
        summary: BTreeMap::new(),
        warnings: cfg.warnings.clone(),
        progress: Progress::default(),
    };
    log::info!("running {} into {}", cfg.scenario, dir.display());
    let result = match cfg.scenario {
        ScenarioKind::Absorption => absorption(&mut ctx),
        ScenarioKind::RatesVsMr => rates_vs_mr(&mut ctx),
        ScenarioKind::SteadyMap => steady_map(&mut ctx),
        ScenarioKind::CoolingRateCompare => cooling_rate_compare(&mut ctx),
        ScenarioKind::Robustness => robustness(&mut ctx),
        ScenarioKind::RecyclingCheck => recycling_check(&mut ctx),
        ScenarioKind::NuclearBath => nuclear_bath(&mut ctx),
    };
    let manifest = RunManifest {
        scenario: cfg.scenario.to_string(),
        status: if result.is_ok() { "ok" } else { "failed" }.to_string(),
        error: result.as_ref().err().map(|e| e.to_string()),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_file: opts.config_file.clone(),
        config: cfg.echo(),
        units: UnitBlock::new(&cfg.params),
        started_unix_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        wall_time_s: started.elapsed().as_secs_f64(),
        threads: opts.threads,
        progress: ctx.progress,
        outputs: ctx.outputs,
        solver: ctx.solver,
        summary: ctx.summary,
        warnings: ctx.warnings,
    };
    let written = manifest.write(dir);
    let result = result.and(written);
    (Some(manifest), result)
}

/// Keep the leading `Ok` results; report how many there were and the first
/// error, if any.
fn split_prefix<T>(results: Vec<Result<T, eitcool::Error>>) -> (Vec<T>, Option<eitcool::Error>) {
    let mut ok = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => return (ok, Some(e)),
        }
    }
    (ok, None)
}

fn absorption(ctx: &mut Ctx) -> Result<(), CliError> {
    let p = &ctx.cfg.params;
    let grid = ctx.cfg.axis("omega").values();
    ctx.progress.total = 1;
    let d = dressed_states(p)?;
    ctx.summary.insert("e_plus".into(), d.e_plus);
    ctx.summary.insert("e_minus".into(), d.e_minus);
    let spec = absorption_spectrum(p, &grid)?;
    let SpectrumValues::Absorption(values) = &spec.values else {
        unreachable!("absorption spectrum is real")
    };
    let rows: Vec<Vec<String>> = grid.iter().zip(values).map(|(o, a)| vec![num(*o), num(*a)]).collect();
    ctx.table("absorption.csv", &["omega", "absorption"], &rows)?;
    let peak = values.iter().copied().fold(f64::MIN, f64::max);
    ctx.summary.insert("peak".into(), peak);
    ctx.progress.completed = 1;
    Ok(())
}

fn rates_vs_mr(ctx: &mut Ctx) -> Result<(), CliError> {
    let base = &ctx.cfg.params;
    let khz = base.omega_m / TWO_PI / 1e3;
    let ms = ctx.cfg.axis("m_r").values();
    ctx.progress.total = ms.len();
    let mut rows = Vec::with_capacity(ms.len());
    for &m in &ms {
        let p = base.clone().with_rabi_ratio(m);
        let r = rates(&p);
        let n_ss = r.n_ss.map_or("heating".to_string(), num);
        rows.push(vec![
            num(m),
            num(p.rabi_omega0),
            num(p.detuning),
            num(r.a_plus),
            num(r.a_minus),
            num(r.w),
            num(r.a_plus * khz),
            num(r.a_minus * khz),
            num(r.w * khz),
            n_ss,
        ]);
        ctx.progress.completed += 1;
    }
    ctx.table(
        "rates_vs_mr.csv",
        &["m_r", "omega0", "detuning", "a_plus", "a_minus", "w", "a_plus_khz", "a_minus_khz", "w_khz", "n_ss"],
        &rows,
    )?;
    let r = rates(base);
    let mut block = Vec::new();
    r.write_block(&mut block).expect("vec write");
    ctx.outputs.push(write_bytes(ctx.dir, "rates.txt", &block, 6)?);
    ctx.summary.insert("a_plus_khz".into(), r.a_plus * khz);
    ctx.summary.insert("a_minus_khz".into(), r.a_minus * khz);
    if let Some(n) = r.n_ss {
        ctx.summary.insert("n_ss".into(), n);
    }
    Ok(())
}

fn steady_map(ctx: &mut Ctx) -> Result<(), CliError> {
    let base = &ctx.cfg.params;
    let qs = ctx.cfg.axis("quality_q").values();
    let ts = ctx.cfg.axis("temperature_mk").values();
    ctx.progress.total = qs.len() * ts.len();
    let mut rows = Vec::with_capacity(ctx.progress.total);
    for &q in &qs {
        for &t in &ts {
            let mut p = base.clone().with_quality(q);
            p.temperature = t * 1e-3;
            let r = rates(&p);
            let s = steady_phonon(&p, &r)?;
            rows.push(vec![num(q), num(t), num(r.thermal_n), num(s.n_ss), num(s.n_ss.log10())]);
            ctx.progress.completed += 1;
        }
    }
    ctx.table(
        "steady_map.csv",
        &["quality_q", "temperature_mk", "thermal_n", "n_ss", "log10_n_ss"],
        &rows,
    )
}

/// Parameters of one cooling-rate comparison point: ω_m/2π = `f_mhz`, with Γ
/// and λ fixed in absolute units, Ω₀ = m_R at the optimal detuning and no
/// mechanical damping.
pub fn cooling_params(base: &ModelParams, f_mhz: f64, lambda_mhz: f64, gamma_mhz: f64, m_r: f64) -> ModelParams {
    let mut p = base.clone();
    p.omega_m = TWO_PI * f_mhz * 1e6;
    let mut p = p.with_gamma_total(gamma_mhz / f_mhz).with_rabi_ratio(m_r);
    p.eta = lambda_mhz / f_mhz;
    p.gamma_mech = 0.0;
    p.bath = Bath::Zero;
    p
}

#[derive(Debug, Clone)]
pub struct CoolingPoint {
    pub params: ModelParams,
    pub w_analytic: f64,
    pub w_fit: f64,
    pub n_ss_fit: f64,
    pub residual_rms: f64,
    pub fit_window: (f64, f64),
    pub series: TimeSeries,
}

/// Integrate the three-level model and fit ⟨n(t)⟩ with an exponential.
///
/// Without an explicit `t_final` the run covers 20 analytic cooling times;
/// the fit skips the first 5/Γ unless `discard` is given.
pub fn cooling_rate_point(
    p: &ModelParams,
    initial: &InitialConfig,
    solver: &SolverConfig,
    discard: Option<f64>,
) -> Result<CoolingPoint, eitcool::Error> {
    let w_analytic = rates(p).w;
    let model = build_model_three_level(p, initial.fock_dim(solver))?;
    let rho0 = product_state(model.space(), &initial.internal, &initial.phonon)?;
    let series = evolve(&model, &rho0, &settings_from(solver, 20.0 / w_analytic))?;
    let opts = FitOptions {
        discard: discard.unwrap_or(5.0 / p.gamma_total),
        ..Default::default()
    };
    let fit = extract_cooling_rate(&series, "n", &opts)?;
    Ok(CoolingPoint {
        params: p.clone(),
        w_analytic,
        w_fit: fit.w_fit,
        n_ss_fit: fit.n_ss_fit,
        residual_rms: fit.residual_rms,
        fit_window: fit.fit_window,
        series,
    })
}

fn cooling_rate_compare(ctx: &mut Ctx) -> Result<(), CliError> {
    let c = &ctx.cfg.cooling;
    let ms = ctx.cfg.axis("m_r").values();
    let points: Vec<(f64, f64)> = c
        .frequencies_mhz
        .iter()
        .flat_map(|&f| ms.iter().map(move |&m| (f, m)))
        .collect();
    ctx.progress.total = points.len();
    let cfg = ctx.cfg;
    let results = map_indexed(&points, |&(f, m)| {
        let p = cooling_params(&cfg.params, f, c.lambda_mhz, c.gamma_mhz, m);
        cooling_rate_point(&p, &cfg.initial, &cfg.solver, c.fit_discard)
    });
    let (done, err) = split_prefix(results);
    ctx.progress.completed = done.len();
    let mut rows = Vec::new();
    for (k, (pt, &(f, m))) in done.iter().zip(&points).enumerate() {
        ctx.solver.record(&pt.series.meta);
        let lambda = pt.params.eta;
        rows.push(vec![
            num(f),
            num(m),
            num(lambda),
            num(pt.w_analytic),
            num(pt.w_fit),
            num(pt.w_analytic / lambda),
            num(pt.w_fit / lambda),
            num(pt.n_ss_fit),
            num(pt.residual_rms),
            num(pt.fit_window.0),
            num(pt.fit_window.1),
        ]);
        ctx.series(&format!("cooling_trajectory_{k}.csv"), &pt.series)?;
        ctx.summary.insert(format!("w_fit_over_lambda.f_mhz={f}.m_r={m}"), pt.w_fit / lambda);
    }
    ctx.table(
        "cooling_rates.csv",
        &[
            "omega_m_mhz",
            "m_r",
            "lambda",
            "w_analytic",
            "w_fit",
            "w_analytic_over_lambda",
            "w_fit_over_lambda",
            "n_ss_fit",
            "residual_rms",
            "fit_start",
            "fit_end",
        ],
        &rows,
    )?;
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn robustness(ctx: &mut Ctx) -> Result<(), CliError> {
    let base = &ctx.cfg.params;
    let devs = ctx.cfg.axis("deviation").values();
    let rb = &ctx.cfg.robustness;
    let gammas: Vec<f64> = rb.gamma_mech_hz.iter().map(|&h| base.hz_to_internal(h)).collect();
    ctx.progress.total = rb.rabi_ratios.len();
    let mut rows = Vec::new();
    for &m in &rb.rabi_ratios {
        let curves = robustness_sweep(base, m, &devs, &gammas)?;
        for ((hz, g), curve) in rb.gamma_mech_hz.iter().zip(&gammas).zip(&curves) {
            for (d, n) in devs.iter().zip(curve) {
                rows.push(vec![num(m), num(*hz), num(*g), num(*d), num(m * (1.0 + d)), num(*n)]);
            }
            let (k, _) = curve
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("deviation axis is nonempty");
            ctx.summary.insert(format!("argmin_deviation.m_r={m}.gamma_mech_hz={hz}"), devs[k]);
        }
        ctx.progress.completed += 1;
    }
    ctx.table(
        "robustness.csv",
        &["m_r", "gamma_mech_hz", "gamma_mech", "deviation", "rabi_omega0", "n_ss"],
        &rows,
    )
}

/// Largest pointwise `|a − b| / max(|a|, |b|)`.
pub fn max_relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let s = x.abs().max(y.abs());
            if s == 0.0 {
                0.0
            } else {
                (x - y).abs() / s
            }
        })
        .fold(0.0, f64::max)
}

/// ⟨n(t)⟩ of the three-, four- and seven-level models from the same initial
/// state. The three-level model carries the renormalized decays γ_±; the
/// four-level model uses effective repump rates from the pump parameters.
pub fn recycling_runs(
    p: &ModelParams,
    initial: &InitialCondition,
    fock_dim: usize,
    settings: &EvolveSettings,
) -> Result<[TimeSeries; 3], eitcool::Error> {
    let eff = effective_rates_for(p)?;
    let run = |k: usize| -> Result<TimeSeries, eitcool::Error> {
        let model = match k {
            0 => build_model_three_level(p, fock_dim)?,
            1 => build_model_four_level(p, &eff, fock_dim)?,
            _ => build_model_seven_level(p, fock_dim)?,
        };
        let rho0 = product_state(model.space(), &initial.internal, &initial.phonon)?;
        evolve(&model, &rho0, settings)
    };
    let mut out = map_indexed(&[0usize, 1, 2], |k| run(*k)).into_iter();
    let mut next = || out.next().expect("three runs");
    Ok([next()?, next()?, next()?])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub parameter: &'static str,
    pub value: f64,
    pub final_n: f64,
    pub relative_change: f64,
}

/// Final ⟨n⟩ of the seven-level model when ω₀ or ω_s is moved to each of
/// `offsets`, relative to the configured values.
pub fn recycling_probe(
    p: &ModelParams,
    initial: &InitialCondition,
    fock_dim: usize,
    settings: &EvolveSettings,
    offsets: &[f64],
) -> Result<Vec<ProbeRow>, eitcool::Error> {
    let final_n = |q: &ModelParams| -> Result<f64, eitcool::Error> {
        let model = build_model_seven_level(q, fock_dim)?;
        let rho0 = product_state(model.space(), &initial.internal, &initial.phonon)?;
        let s = evolve(&model, &rho0, settings)?;
        Ok(*s.column("n").expect("models carry n").last().expect("nonempty series"))
    };
    let nominal = final_n(p)?;
    let mut cases = Vec::new();
    for &v in offsets {
        cases.push(("omega_0", v));
        cases.push(("omega_s", v));
    }
    let runs = map_indexed(&cases, |&(name, v)| {
        let mut q = p.clone();
        match name {
            "omega_0" => q.omega_0 = v,
            _ => q.omega_s = v,
        }
        final_n(&q)
    });
    let mut rows = vec![ProbeRow {
        parameter: "nominal",
        value: 0.0,
        final_n: nominal,
        relative_change: 0.0,
    }];
    for ((name, v), r) in cases.into_iter().zip(runs) {
        let n = r?;
        rows.push(ProbeRow {
            parameter: name,
            value: v,
            final_n: n,
            relative_change: (n - nominal).abs() / nominal,
        });
    }
    Ok(rows)
}

fn recycling_check(ctx: &mut Ctx) -> Result<(), CliError> {
    let p = &ctx.cfg.params;
    let fock = ctx.cfg.fock_dim();
    let w = rates(p).w;
    let settings = ctx.settings(6.0 / w);
    let initial = InitialCondition {
        internal: ctx.cfg.initial.internal.clone(),
        phonon: ctx.cfg.initial.phonon.clone(),
    };
    ctx.progress.total = 2;
    let runs = recycling_runs(p, &initial, fock, &settings)?;
    for s in &runs {
        ctx.solver.record(&s.meta);
    }
    let cols: Vec<&[f64]> = runs.iter().map(|s| s.column("n").expect("n observable")).collect();
    let rows: Vec<Vec<String>> = (0..runs[0].len())
        .map(|i| vec![num(runs[0].times[i]), num(cols[0][i]), num(cols[1][i]), num(cols[2][i])])
        .collect();
    ctx.table("recycling.csv", &["t", "n_three", "n_four", "n_seven"], &rows)?;
    for (name, a, b) in [("three_four", 0, 1), ("three_seven", 0, 2), ("four_seven", 1, 2)] {
        ctx.summary.insert(format!("max_rel_dev.{name}"), max_relative_deviation(cols[a], cols[b]));
    }
    for (name, c) in ["three", "four", "seven"].iter().zip(&cols) {
        ctx.summary.insert(format!("final_n.{name}"), *c.last().expect("nonempty"));
    }
    ctx.progress.completed = 1;

    let probe = recycling_probe(p, &initial, fock, &settings, &ctx.cfg.recycling.probe_offsets)?;
    ctx.solver.runs += probe.len();
    let rows: Vec<Vec<String>> = probe
        .iter()
        .map(|r| vec![r.parameter.to_string(), num(r.value), num(r.final_n), num(r.relative_change)])
        .collect();
    ctx.table("recycling_probe.csv", &["parameter", "value", "final_n", "relative_change"], &rows)?;
    let worst = probe.iter().map(|r| r.relative_change).fold(0.0, f64::max);
    ctx.summary.insert("probe_max_relative_change".into(), worst);
    if worst >= 0.01 {
        ctx.warnings.push(format!(
            "final ⟨n⟩ moved by {:.2}% under the ω₀/ω_s probe",
            100.0 * worst
        ));
    }
    ctx.progress.completed = 2;
    Ok(())
}

fn nuclear_bath(ctx: &mut Ctx) -> Result<(), CliError> {
    let p = &ctx.cfg.params;
    let e = &ctx.cfg.ensemble;
    let w = rates(p).w;
    let settings = ctx.settings(6.0 / w);
    ctx.progress.total = e.delta_max_mhz.len();
    let mut curves: Vec<TimeSeries> = Vec::new();
    let mut summary_rows = Vec::new();
    let mut draw_rows = Vec::new();
    let mut failure = None;
    for &dm in &e.delta_max_mhz {
        let spec = EnsembleSpec {
            delta_max: p.hz_to_internal(dm * 1e6),
            samples: e.samples,
            seed: ctx.cfg.seed,
            fock_dim: ctx.cfg.fock_dim(),
            settings,
            initial: InitialCondition {
                internal: ctx.cfg.initial.internal.clone(),
                phonon: ctx.cfg.initial.phonon.clone(),
            },
        };
        let res = match monte_carlo_detuning(p, &spec) {
            Ok(r) => r,
            Err(err) => {
                failure = Some(err);
                break;
            }
        };
        ctx.solver.record(&res.mean.meta);
        summary_rows.push(vec![
            num(dm),
            e.samples.to_string(),
            num(res.n_ss_mean),
            res.cooling_time.map_or("none".to_string(), num),
        ]);
        for (k, d) in res.detunings.iter().enumerate() {
            draw_rows.push(vec![num(dm), k.to_string(), num(*d)]);
        }
        ctx.summary.insert(format!("n_ss_mean.delta_max_mhz={dm}"), res.n_ss_mean);
        curves.push(res.mean);
        ctx.progress.completed += 1;
    }
    if let Some(first) = curves.first() {
        let mut header = vec!["t".to_string()];
        header.extend(e.delta_max_mhz[..curves.len()].iter().map(|d| format!("n_delta_max_{d}mhz")));
        let cols: Vec<&[f64]> = curves.iter().map(|s| s.column("n").expect("n observable")).collect();
        let rows: Vec<Vec<String>> = (0..first.len())
            .map(|i| {
                let mut r = vec![num(first.times[i])];
                r.extend(cols.iter().map(|c| num(c[i])));
                r
            })
            .collect();
        let refs: Vec<&str> = header.iter().map(String::as_str).collect();
        ctx.table("nuclear_bath.csv", &refs, &rows)?;
    }
    ctx.table(
        "nuclear_bath_summary.csv",
        &["delta_max_mhz", "samples", "n_ss_mean", "cooling_time"],
        &summary_rows,
    )?;
    ctx.table("nuclear_bath_draws.csv", &["delta_max_mhz", "index", "delta"], &draw_rows)?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}
