//! Scenario configuration files.
//!
//! One scenario per file, UTF-8, one `key = value` per line. `#` starts a
//! comment that runs to the end of the line; blank lines are ignored. Keys
//! are dotted (`params.rabi_omega0`, `sweep.m_r.points`). Lists are
//! comma-separated (`ensemble.delta_max_mhz = 0, 0.1, 0.5`).
//!
//! Frequencies and rates are in units of ω_m unless the key carries a unit
//! suffix: `_hz` and `_mhz` take an ordinary frequency (f, with ω = 2πf) and
//! convert it with the configured ω_m; `_mk` takes millikelvin. `params.omega_m`
//! itself is in rad/s, `params.omega_m_mhz` in MHz.
//!
//! Keys that reset several fields are applied before all others, in this
//! order: `omega_m`, `gamma_total` (splits Γ evenly into γ_± and γ_{±1}),
//! `rabi_ratio` (Ω₀ = m_R with Δ at its optimum), `quality_q` (also sets
//! γ_m = 1/Q). Everything else is applied in file order, so an explicit
//! `params.gamma_plus` or `params.gamma_mech` overrides those defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use eitcool::constants::TWO_PI;
use eitcool::effective::{effective_pump_rates, EffectiveRates};
use eitcool::model::{
    default_fock_dim, lamb_dicke_from_physical, InternalState, PhononState, A2, MINUS, PLUS,
    THREE_LEVELS,
};
use eitcool::operator::compose_space;
use eitcool::{Bath, ModelParams, PhysicalParams};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: `{field}`: {message}")]
pub struct ConfigError {
    /// 0 when the problem is not tied to one line.
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    Absorption,
    RatesVsMr,
    SteadyMap,
    CoolingRateCompare,
    Robustness,
    RecyclingCheck,
    NuclearBath,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::Absorption,
        ScenarioKind::RatesVsMr,
        ScenarioKind::SteadyMap,
        ScenarioKind::CoolingRateCompare,
        ScenarioKind::Robustness,
        ScenarioKind::RecyclingCheck,
        ScenarioKind::NuclearBath,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Absorption => "absorption",
            ScenarioKind::RatesVsMr => "rates-vs-mr",
            ScenarioKind::SteadyMap => "steady-map",
            ScenarioKind::CoolingRateCompare => "cooling-rate-compare",
            ScenarioKind::Robustness => "robustness",
            ScenarioKind::RecyclingCheck => "recycling-check",
            ScenarioKind::NuclearBath => "nuclear-bath",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::Absorption => "weak-probe absorption spectrum of the driven Λ system",
            ScenarioKind::RatesVsMr => "A₊, A₋, W and ⟨n⟩_ss versus m_R at the optimal detuning",
            ScenarioKind::SteadyMap => "log₁₀⟨n⟩_ss over quality factor and bath temperature",
            ScenarioKind::CoolingRateCompare => {
                "fitted cooling rate of the full master equation against A₋ − A₊"
            }
            ScenarioKind::Robustness => "⟨n⟩_ss versus fractional Rabi-frequency error",
            ScenarioKind::RecyclingCheck => "⟨n(t)⟩ of the 3-, 4- and 7-level models",
            ScenarioKind::NuclearBath => "⟨n(t)⟩ averaged over random quasi-static |−1⟩ shifts",
        }
    }

    /// Sweep axes this scenario reads.
    pub fn sweep_axes(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::Absorption => &["omega"],
            ScenarioKind::RatesVsMr => &["m_r"],
            ScenarioKind::SteadyMap => &["quality_q", "temperature_mk"],
            ScenarioKind::CoolingRateCompare => &["m_r"],
            ScenarioKind::Robustness => &["deviation"],
            ScenarioKind::RecyclingCheck | ScenarioKind::NuclearBath => &[],
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown scenario `{s}`; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Lin,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepAxis {
    pub fn new(name: &str, start: f64, stop: f64, points: usize, scale: Scale) -> Self {
        SweepAxis {
            name: name.to_string(),
            start,
            stop,
            points,
            scale,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.scale {
            Scale::Lin => eitcool::analytics::linspace(self.start, self.stop, self.points),
            Scale::Log => eitcool::analytics::linspace(self.start.log10(), self.stop.log10(), self.points)
                .into_iter()
                .map(|e| 10f64.powf(e))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `None` means the default for the initial phonon number.
    pub fock_dim: Option<usize>,
    /// `None` lets the scenario pick a window from the analytic cooling rate.
    pub t_final: Option<f64>,
    pub sample_count: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            fock_dim: None,
            t_final: None,
            sample_count: 401,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub phonon: PhononState,
    pub internal: InternalState,
}

impl InitialConfig {
    pub fn fock_dim(&self, solver: &SolverConfig) -> usize {
        solver
            .fock_dim
            .unwrap_or_else(|| default_fock_dim(self.phonon.mean()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub samples: usize,
    /// δ_max values in MHz (ordinary frequency), as written in the file.
    pub delta_max_mhz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessConfig {
    pub rabi_ratios: Vec<f64>,
    /// γ_m/2π values in Hz.
    pub gamma_mech_hz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingConfig {
    /// ω_m/2π values in MHz.
    pub frequencies_mhz: Vec<f64>,
    pub lambda_mhz: f64,
    pub gamma_mhz: f64,
    /// Data before `fit_discard` (units 1/ω_m) are left out of the fit; `None`
    /// discards the first 5/Γ.
    pub fit_discard: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecyclingConfig {
    /// Values of ω₀ and ω_s (units ω_m) tried by the offset sensitivity probe.
    pub probe_offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub params: ModelParams,
    pub sweeps: BTreeMap<String, SweepAxis>,
    pub solver: SolverConfig,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub initial: InitialConfig,
    pub ensemble: EnsembleConfig,
    pub robustness: RobustnessConfig,
    pub cooling: CoolingConfig,
    pub recycling: RecyclingConfig,
    /// Non-fatal findings from parsing and sanity checks.
    pub warnings: Vec<String>,
}

impl ScenarioConfig {
    /// Defaults for a scenario before any file entries are applied.
    pub fn defaults(scenario: ScenarioKind) -> Self {
        let params = match scenario {
            ScenarioKind::RecyclingCheck => ModelParams::recycling_reference(),
            _ => ModelParams::reference(),
        };
        let mut sweeps = BTreeMap::new();
        let mut add = |a: SweepAxis| {
            sweeps.insert(a.name.clone(), a);
        };
        match scenario {
            ScenarioKind::Absorption => add(SweepAxis::new("omega", -40.0, 10.0, 2001, Scale::Lin)),
            ScenarioKind::RatesVsMr => add(SweepAxis::new("m_r", 2.0, 12.0, 101, Scale::Lin)),
            ScenarioKind::SteadyMap => {
                add(SweepAxis::new("quality_q", 1e3, 1e7, 41, Scale::Log));
                add(SweepAxis::new("temperature_mk", 1.0, 100.0, 41, Scale::Log));
            }
            ScenarioKind::CoolingRateCompare => add(SweepAxis::new("m_r", 8.0, 8.0, 1, Scale::Lin)),
            ScenarioKind::Robustness => add(SweepAxis::new("deviation", -0.2, 0.2, 81, Scale::Lin)),
            ScenarioKind::RecyclingCheck | ScenarioKind::NuclearBath => {}
        }
        let internal = match scenario {
            ScenarioKind::RecyclingCheck => InternalState::Level(MINUS.to_string()),
            _ => InternalState::Dark,
        };
        ScenarioConfig {
            scenario,
            params,
            sweeps,
            solver: SolverConfig::default(),
            seed: 42,
            output_dir: None,
            initial: InitialConfig {
                phonon: PhononState::Fock(3),
                internal,
            },
            ensemble: EnsembleConfig {
                samples: 200,
                delta_max_mhz: vec![0.0, 0.1, 0.5],
            },
            robustness: RobustnessConfig {
                rabi_ratios: vec![6.0, 10.0],
                gamma_mech_hz: vec![0.0, 10.0, 100.0],
            },
            cooling: CoolingConfig {
                frequencies_mhz: vec![1.0, 5.0, 10.0],
                lambda_mhz: 0.1,
                gamma_mhz: 15.0,
                fit_discard: None,
            },
            recycling: RecyclingConfig {
                probe_offsets: vec![-10.0, 10.0],
            },
            warnings: Vec::new(),
        }
    }

    pub fn axis(&self, name: &str) -> &SweepAxis {
        &self.sweeps[name]
    }

    pub fn fock_dim(&self) -> usize {
        self.initial.fock_dim(&self.solver)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let entries = tokenize(text)?;
        let scenario_entry = entries
            .iter()
            .find(|e| e.key == "scenario")
            .ok_or_else(|| ConfigError::new(0, "scenario", "missing scenario name"))?;
        let scenario: ScenarioKind = scenario_entry
            .value
            .parse()
            .map_err(|m| ConfigError::new(scenario_entry.line, "scenario", m))?;
        let mut cfg = ScenarioConfig::defaults(scenario);

        let priority = [
            "params.omega_m",
            "params.omega_m_mhz",
            "params.gamma_total",
            "params.gamma_total_mhz",
            "params.rabi_ratio",
            "params.quality_q",
        ];
        for key in priority {
            if let Some(e) = entries.iter().find(|e| e.key == key) {
                cfg.apply(e)?;
            }
        }
        let mut physical: BTreeMap<&str, &Entry> = BTreeMap::new();
        let mut sweep_parts: BTreeMap<String, BTreeMap<String, &Entry>> = BTreeMap::new();
        let mut eta_given = false;
        for e in &entries {
            if e.key == "scenario" || priority.contains(&e.key.as_str()) {
                continue;
            }
            if let Some(rest) = e.key.strip_prefix("physical.") {
                physical.insert(rest, e);
                continue;
            }
            if let Some(rest) = e.key.strip_prefix("sweep.") {
                let (axis, part) = rest
                    .rsplit_once('.')
                    .ok_or_else(|| ConfigError::new(e.line, &e.key, "expected sweep.<axis>.<field>"))?;
                sweep_parts
                    .entry(axis.to_string())
                    .or_default()
                    .insert(part.to_string(), e);
                continue;
            }
            eta_given |= e.key == "params.eta";
            cfg.apply(e)?;
        }
        cfg.apply_physical(&physical, eta_given)?;
        cfg.apply_sweeps(&sweep_parts)?;
        cfg.check()?;
        Ok(cfg)
    }

    fn apply(&mut self, e: &Entry) -> Result<(), ConfigError> {
        let key = e.key.as_str();
        let num = || parse_f64(e);
        match key {
            "seed" => self.seed = parse_int(e)?,
            "output_dir" => self.output_dir = Some(PathBuf::from(unquote(&e.value))),
            "solver.rel_tol" => self.solver.rel_tol = num()?,
            "solver.abs_tol" => self.solver.abs_tol = num()?,
            "solver.fock_dim" => self.solver.fock_dim = Some(parse_int(e)?),
            "solver.t_final" => self.solver.t_final = Some(positive(e, num()?)?),
            "solver.sample_count" => self.solver.sample_count = parse_int(e)?,
            "initial.phonon" => {
                let n = self.initial.phonon.mean();
                self.initial.phonon = phonon_kind(e, n)?;
            }
            "initial.n" => {
                let n = num()?;
                if !(n >= 0.0) {
                    return Err(ConfigError::new(e.line, key, "must be ≥ 0"));
                }
                self.initial.phonon = match self.initial.phonon {
                    PhononState::Fock(_) => {
                        if n.fract() != 0.0 {
                            return Err(ConfigError::new(e.line, key, "Fock initial state needs an integer n"));
                        }
                        PhononState::Fock(n as usize)
                    }
                    PhononState::Thermal(_) => PhononState::Thermal(n),
                    PhononState::Coherent(_) => PhononState::Coherent(n.sqrt()),
                };
            }
            "initial.internal" => {
                let v = unquote(&e.value);
                self.initial.internal = match v {
                    "dark" => InternalState::Dark,
                    PLUS | MINUS | A2 => InternalState::Level(v.to_string()),
                    _ => {
                        return Err(ConfigError::new(
                            e.line,
                            key,
                            format!("expected dark, {PLUS}, {MINUS} or {A2}, got `{v}`"),
                        ))
                    }
                };
            }
            "ensemble.samples" => self.ensemble.samples = parse_int(e)?,
            "ensemble.delta_max_mhz" => self.ensemble.delta_max_mhz = nonneg_list(e)?,
            "robustness.rabi_ratios" => self.robustness.rabi_ratios = nonneg_list(e)?,
            "robustness.gamma_mech_hz" => self.robustness.gamma_mech_hz = nonneg_list(e)?,
            "cooling.frequencies_mhz" => self.cooling.frequencies_mhz = nonneg_list(e)?,
            "cooling.lambda_mhz" => self.cooling.lambda_mhz = positive(e, num()?)?,
            "cooling.gamma_mhz" => self.cooling.gamma_mhz = positive(e, num()?)?,
            "cooling.fit_discard" => self.cooling.fit_discard = Some(num()?),
            "recycling.probe_offsets" => self.recycling.probe_offsets = parse_list(e)?,
            _ => {
                if let Some(field) = key.strip_prefix("params.") {
                    return self.apply_param(e, field);
                }
                return Err(ConfigError::new(e.line, key, "unknown key"));
            }
        }
        Ok(())
    }

    fn apply_param(&mut self, e: &Entry, field: &str) -> Result<(), ConfigError> {
        let p = &mut self.params;
        if field == "bath" {
            p.bath = unquote(&e.value)
                .parse::<Bath>()
                .map_err(|m| ConfigError::new(e.line, &e.key, m.to_string()))?;
            return Ok(());
        }
        let raw = parse_f64(e)?;
        // unit suffixes
        let (base, value) = if let Some(b) = field.strip_suffix("_mhz") {
            (b, raw * 1e6)
        } else if let Some(b) = field.strip_suffix("_hz") {
            (b, raw)
        } else if let Some(b) = field.strip_suffix("_mk") {
            if b != "temperature" {
                return Err(ConfigError::new(e.line, &e.key, "`_mk` applies to temperature only"));
            }
            p.temperature = raw * 1e-3;
            return Ok(());
        } else {
            (field, f64::NAN)
        };
        let suffixed = !value.is_nan();
        if base == "omega_m" {
            p.omega_m = if suffixed { TWO_PI * value } else { raw };
            return Ok(());
        }
        let v = if suffixed { p.hz_to_internal(value) } else { raw };
        if suffixed && matches!(base, "eta" | "quality_q" | "temperature" | "rabi_ratio") {
            return Err(ConfigError::new(e.line, &e.key, "this field takes no frequency suffix"));
        }
        match base {
            "rabi_omega0" => p.rabi_omega0 = v,
            "detuning" => p.detuning = v,
            "gamma_total" => *p = p.clone().with_gamma_total(v),
            "gamma_plus" => p.gamma_plus = v,
            "gamma_minus" => p.gamma_minus = v,
            "gamma_p1" => p.gamma_p1 = v,
            "gamma_m1" => p.gamma_m1 = v,
            "gamma_0" => p.gamma_0 = v,
            "gamma_dark" => p.gamma_dark = v,
            "gamma_s" => p.gamma_s = v,
            "big_gamma_0" => p.big_gamma_0 = v,
            "big_gamma_p1" => p.big_gamma_p1 = v,
            "big_gamma_m1" => p.big_gamma_m1 = v,
            "rabi_pump" => p.rabi_pump = v,
            "pump_detuning" => p.pump_detuning = v,
            "eta" => p.eta = v,
            "lambda" => p.eta = v,
            "quality_q" => *p = p.clone().with_quality(v),
            "temperature" => p.temperature = v,
            "gamma_mech" => p.gamma_mech = v,
            "omega_0" => p.omega_0 = v,
            "omega_s" => p.omega_s = v,
            "nuclear_shift" => p.nuclear_shift = v,
            "rabi_ratio" => *p = p.clone().with_rabi_ratio(v),
            _ => return Err(ConfigError::new(e.line, &e.key, "unknown parameter")),
        }
        Ok(())
    }

    fn apply_physical(&mut self, parts: &BTreeMap<&str, &Entry>, eta_given: bool) -> Result<(), ConfigError> {
        if parts.is_empty() {
            return Ok(());
        }
        let mut ph = PhysicalParams {
            mass: f64::NAN,
            mfg: 0.0,
            bias: 0.0,
            x0: None,
            g_e: eitcool::constants::G_E_NV,
        };
        for (k, e) in parts {
            let v = parse_f64(e)?;
            match *k {
                "mass" => ph.mass = v,
                "mfg" => ph.mfg = v,
                "bias" => ph.bias = v,
                "x0" => ph.x0 = Some(v),
                "g_e" => ph.g_e = v,
                _ => return Err(ConfigError::new(e.line, &e.key, "unknown physical parameter")),
            }
        }
        let line = parts.values().map(|e| e.line).min().unwrap_or(0);
        if ph.mass.is_nan() {
            return Err(ConfigError::new(line, "physical.mass", "required when physical.* is given"));
        }
        let ld = lamb_dicke_from_physical(ph.mass, self.params.omega_m, ph.mfg, ph.g_e, ph.x0)
            .map_err(|err| ConfigError::new(line, "physical", err.to_string()))?;
        if eta_given {
            self.warnings.push(format!(
                "params.eta given explicitly; physical.* would give η = {:.4}",
                ld.eta
            ));
        } else {
            self.params.eta = ld.eta;
        }
        self.params.physical = Some(ph);
        Ok(())
    }

    fn apply_sweeps(&mut self, parts: &BTreeMap<String, BTreeMap<String, &Entry>>) -> Result<(), ConfigError> {
        let allowed = self.scenario.sweep_axes();
        for (axis, fields) in parts {
            let line = fields.values().map(|e| e.line).min().unwrap_or(0);
            if !allowed.contains(&axis.as_str()) {
                return Err(ConfigError::new(
                    line,
                    format!("sweep.{axis}"),
                    format!(
                        "scenario {} has no sweep axis `{axis}` (axes: {})",
                        self.scenario,
                        if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
                    ),
                ));
            }
            let a = self.sweeps.get_mut(axis).expect("default axis exists");
            for (f, e) in fields {
                match f.as_str() {
                    "start" => a.start = parse_f64(e)?,
                    "stop" => a.stop = parse_f64(e)?,
                    "points" => a.points = parse_int(e)?,
                    "scale" => {
                        a.scale = match unquote(&e.value) {
                            "lin" => Scale::Lin,
                            "log" => Scale::Log,
                            v => return Err(ConfigError::new(e.line, &e.key, format!("expected lin or log, got `{v}`"))),
                        }
                    }
                    _ => return Err(ConfigError::new(e.line, &e.key, "expected start, stop, points or scale")),
                }
            }
        }
        for a in self.sweeps.values() {
            let field = format!("sweep.{}", a.name);
            let single_ok = self.scenario == ScenarioKind::CoolingRateCompare;
            if a.points < 2 && !(single_ok && a.points == 1 && a.start == a.stop) {
                return Err(ConfigError::new(0, format!("{field}.points"), "need at least 2 points"));
            }
            if !(a.start.is_finite() && a.stop.is_finite()) || (a.points > 1 && !(a.stop > a.start)) {
                return Err(ConfigError::new(0, field, "need finite start < stop"));
            }
            if a.scale == Scale::Log && !(a.start > 0.0) {
                return Err(ConfigError::new(0, field, "log axis needs start > 0"));
            }
        }
        Ok(())
    }

    /// Cross-field checks; pushes warnings for suspicious but valid values.
    fn check(&mut self) -> Result<(), ConfigError> {
        self.params
            .validate()
            .map_err(|e| ConfigError::new(0, "params", e.to_string()))?;
        eitcool::ode::OdeOptions::new(self.solver.rel_tol, self.solver.abs_tol)
            .validate()
            .map_err(|e| ConfigError::new(0, "solver.rel_tol", e.to_string()))?;
        if self.solver.sample_count < 2 {
            return Err(ConfigError::new(0, "solver.sample_count", "need at least 2 samples"));
        }
        let fock = self.fock_dim();
        compose_space(&THREE_LEVELS, fock)
            .map_err(|e| ConfigError::new(0, "solver.fock_dim", e.to_string()))?;
        if let PhononState::Fock(n) = self.initial.phonon {
            if n >= fock {
                return Err(ConfigError::new(
                    0,
                    "initial.n",
                    format!("Fock state |{n}⟩ does not fit in fock_dim = {fock}"),
                ));
            }
        }
        if self.scenario == ScenarioKind::NuclearBath && self.ensemble.samples == 0 {
            return Err(ConfigError::new(0, "ensemble.samples", "must be ≥ 1"));
        }
        if self.scenario == ScenarioKind::Robustness && self.robustness.rabi_ratios.is_empty() {
            return Err(ConfigError::new(0, "robustness.rabi_ratios", "need at least one m_R"));
        }
        let p = &self.params;
        if p.rabi_pump > 0.0 {
            if let Ok(r) = effective_pump_rates(p.rabi_pump, p.pump_detuning, p.big_gamma_0, p.big_gamma_p1, p.big_gamma_m1) {
                if !EffectiveRates::perturbative(p.rabi_pump, r.total_linewidth) {
                    self.warnings.push(format!(
                        "Ω_p = {} exceeds Γ_t = {}: effective repump rates are outside their perturbative regime",
                        p.rabi_pump, r.total_linewidth
                    ));
                }
            }
        }
        Ok(())
    }

    /// Normalized `key = value` listing of the effective configuration.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let p = &self.params;
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("scenario", self.scenario.to_string());
        put("seed", self.seed.to_string());
        for (k, v) in [
            ("omega_m", p.omega_m),
            ("rabi_omega0", p.rabi_omega0),
            ("detuning", p.detuning),
            ("gamma_total", p.gamma_total),
            ("gamma_plus", p.gamma_plus),
            ("gamma_minus", p.gamma_minus),
            ("gamma_p1", p.gamma_p1),
            ("gamma_m1", p.gamma_m1),
            ("gamma_0", p.gamma_0),
            ("gamma_dark", p.gamma_dark),
            ("gamma_s", p.gamma_s),
            ("big_gamma_0", p.big_gamma_0),
            ("big_gamma_p1", p.big_gamma_p1),
            ("big_gamma_m1", p.big_gamma_m1),
            ("rabi_pump", p.rabi_pump),
            ("pump_detuning", p.pump_detuning),
            ("eta", p.eta),
            ("quality_q", p.quality_q),
            ("temperature", p.temperature),
            ("gamma_mech", p.gamma_mech),
            ("omega_0", p.omega_0),
            ("omega_s", p.omega_s),
            ("nuclear_shift", p.nuclear_shift),
        ] {
            put(&format!("params.{k}"), format!("{v:e}"));
        }
        put("params.bath", format!("{:?}", p.bath).to_lowercase());
        for a in self.sweeps.values() {
            put(
                &format!("sweep.{}", a.name),
                format!("{:e}..{:e} x{} {:?}", a.start, a.stop, a.points, a.scale).to_lowercase(),
            );
        }
        put("solver.rel_tol", format!("{:e}", self.solver.rel_tol));
        put("solver.abs_tol", format!("{:e}", self.solver.abs_tol));
        put("solver.fock_dim", self.fock_dim().to_string());
        if let Some(t) = self.solver.t_final {
            put("solver.t_final", format!("{t:e}"));
        }
        put("solver.sample_count", self.solver.sample_count.to_string());
        put("initial.phonon", format!("{:?}", self.initial.phonon));
        put("initial.internal", format!("{:?}", self.initial.internal));
        m
    }
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

fn tokenize(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        }
        .trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::new(line, body, "expected `key = value`"))?;
        let key = k.trim().to_string();
        let value = v.trim().to_string();
        if key.is_empty()
            || !key
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.')
        {
            return Err(ConfigError::new(line, key, "keys use [a-z0-9_.] only"));
        }
        if value.is_empty() {
            return Err(ConfigError::new(line, key, "missing value"));
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(ConfigError::new(line, key, format!("duplicate key (first on line {})", prev.line)));
        }
        out.push(Entry { line, key, value });
    }
    Ok(out)
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(s)
}

fn parse_f64(e: &Entry) -> Result<f64, ConfigError> {
    let v: f64 = e
        .value
        .parse()
        .map_err(|_| ConfigError::new(e.line, &e.key, format!("expected a number, got `{}`", e.value)))?;
    if !v.is_finite() {
        return Err(ConfigError::new(e.line, &e.key, "must be finite"));
    }
    Ok(v)
}

fn parse_int<T: FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value
        .parse()
        .map_err(|_| ConfigError::new(e.line, &e.key, format!("expected a non-negative integer, got `{}`", e.value)))
}

fn positive(e: &Entry, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(e.line, &e.key, "must be > 0"))
    }
}

fn parse_list(e: &Entry) -> Result<Vec<f64>, ConfigError> {
    e.value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ConfigError::new(e.line, &e.key, format!("bad list element `{}`", s.trim())))
        })
        .collect()
}

fn nonneg_list(e: &Entry) -> Result<Vec<f64>, ConfigError> {
    let v = parse_list(e)?;
    if v.iter().any(|x| *x < 0.0) {
        return Err(ConfigError::new(e.line, &e.key, "elements must be ≥ 0"));
    }
    Ok(v)
}

fn phonon_kind(e: &Entry, n: f64) -> Result<PhononState, ConfigError> {
    Ok(match unquote(&e.value) {
        "fock" => PhononState::Fock(n.round() as usize),
        "thermal" => PhononState::Thermal(n),
        "coherent" => PhononState::Coherent(n.sqrt()),
        v => {
            return Err(ConfigError::new(
                e.line,
                &e.key,
                format!("expected fock, thermal or coherent, got `{v}`"),
            ))
        }
    })
}
