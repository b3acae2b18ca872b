//! Run configuration: TOML or JSON text validated into [`RunConfig`].
//!
//! Every problem found is reported, each prefixed with the dotted path of
//! the offending key.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::dynamics::{CouplingProfile, ModelParams};
use crate::error::{Error, Result};
use crate::fcs::FD_STEP;
use crate::protocols::{
    MomentMethod, ProtocolKind, ProtocolSpec, TauGrid, WindowObjective, MAX_DIM,
    MAX_PARALLEL_QUBITS,
};
use crate::states::{alpha_tilde_for_mean, CavityStateSpec, QubitStateSpec};
use crate::sweeps::{GaussianSearchSpace, SweepAxis, SweepParameter};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    JcSingle,
    Sequential,
    Parallel,
    NoiseSweep,
    SpeedCompare,
    RwaCompare,
    CouplingProfile,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::JcSingle,
        Scenario::Sequential,
        Scenario::Parallel,
        Scenario::NoiseSweep,
        Scenario::SpeedCompare,
        Scenario::RwaCompare,
        Scenario::CouplingProfile,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::JcSingle => "jc-single",
            Scenario::Sequential => "sequential",
            Scenario::Parallel => "parallel",
            Scenario::NoiseSweep => "noise-sweep",
            Scenario::SpeedCompare => "speed-compare",
            Scenario::RwaCompare => "rwa-compare",
            Scenario::CouplingProfile => "coupling-profile",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scenario::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|x| x.name()).collect();
                format!(
                    "unknown scenario {s:?} (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (expected csv or json)")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OutputSettings {
    pub path: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSettings {
    pub axis: SweepAxis,
    pub mean_photons: Vec<usize>,
    pub search: GaussianSearchSpace,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpeedSettings {
    pub qubits: Vec<usize>,
    /// Noise applied to the sequential branch only.
    pub n_th: f64,
    pub q: f64,
    pub detuning_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonSettings {
    pub gaussian: CavityStateSpec,
    pub couplings: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileSettings {
    pub gaussian: CavityStateSpec,
    pub g_deltas: Vec<f64>,
    pub g_t_tilde: f64,
}

/// Fully validated run description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub output: OutputSettings,
    pub protocol: ProtocolSpec,
    pub sweep: Option<SweepSettings>,
    pub speed: Option<SpeedSettings>,
    pub comparison: Option<ComparisonSettings>,
    pub profile: Option<ProfileSettings>,
}

/// Error collector bound to a table and its dotted path.
struct Section<'a> {
    path: String,
    map: Map<String, Value>,
    errs: &'a mut Vec<String>,
    allowed: Vec<&'static str>,
}

impl<'a> Section<'a> {
    fn new(path: &str, value: Option<&Value>, errs: &'a mut Vec<String>) -> Self {
        let map = match value {
            None => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => {
                errs.push(format!("{path}: expected a table"));
                Map::new()
            }
        };
        Self {
            path: path.to_string(),
            map,
            errs,
            allowed: Vec::new(),
        }
    }

    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }

    fn err(&mut self, k: &str, msg: impl fmt::Display) {
        let p = self.key(k);
        self.errs.push(format!("{p}: {msg}"));
    }

    fn raw(&mut self, k: &'static str) -> Option<Value> {
        self.allowed.push(k);
        self.map.get(k).cloned()
    }

    fn has(&self, k: &str) -> bool {
        self.map.contains_key(k)
    }

    fn f64(&mut self, k: &'static str) -> Option<f64> {
        match self.raw(k)? {
            Value::Number(n) => n.as_f64().or_else(|| {
                self.err(k, "not a finite number");
                None
            }),
            _ => {
                self.err(k, "expected a number");
                None
            }
        }
    }

    fn f64_in(
        &mut self,
        k: &'static str,
        default: f64,
        ok: impl Fn(f64) -> bool,
        range: &str,
    ) -> f64 {
        match self.f64(k) {
            Some(x) if ok(x) && x.is_finite() => x,
            Some(x) => {
                self.err(k, format!("{x} is out of range ({range})"));
                default
            }
            None => default,
        }
    }

    fn usize(&mut self, k: &'static str) -> Option<usize> {
        match self.raw(k)? {
            Value::Number(n) if n.as_u64().is_some() => Some(n.as_u64().unwrap() as usize),
            _ => {
                self.err(k, "expected a nonnegative integer");
                None
            }
        }
    }

    fn bool(&mut self, k: &'static str) -> Option<bool> {
        match self.raw(k)? {
            Value::Bool(b) => Some(b),
            _ => {
                self.err(k, "expected true or false");
                None
            }
        }
    }

    fn string(&mut self, k: &'static str) -> Option<String> {
        match self.raw(k)? {
            Value::String(s) => Some(s),
            _ => {
                self.err(k, "expected a string");
                None
            }
        }
    }

    fn parsed<T: FromStr<Err = String>>(&mut self, k: &'static str) -> Option<T> {
        let s = self.string(k)?;
        match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.err(k, e);
                None
            }
        }
    }

    fn complex(&mut self, k: &'static str) -> Option<C64> {
        let v = self.raw(k)?;
        let part = |x: &Value| x.as_f64();
        match &v {
            Value::Number(n) => n.as_f64().map(|x| C64::new(x, 0.0)),
            Value::Array(a) if a.len() == 2 => match (part(&a[0]), part(&a[1])) {
                (Some(re), Some(im)) => Some(C64::new(re, im)),
                _ => None,
            },
            _ => None,
        }
        .or_else(|| {
            self.err(k, "expected a number or a [re, im] pair");
            None
        })
    }

    fn f64_list(&mut self, k: &'static str) -> Option<Vec<f64>> {
        match self.raw(k)? {
            Value::Array(a) => {
                let v: Option<Vec<f64>> = a.iter().map(|x| x.as_f64()).collect();
                if v.is_none() {
                    self.err(k, "expected a list of numbers");
                }
                v
            }
            _ => {
                self.err(k, "expected a list of numbers");
                None
            }
        }
    }

    fn usize_list(&mut self, k: &'static str) -> Option<Vec<usize>> {
        match self.raw(k)? {
            Value::Array(a) => {
                let v: Option<Vec<usize>> =
                    a.iter().map(|x| x.as_u64().map(|u| u as usize)).collect();
                if v.is_none() {
                    self.err(k, "expected a list of nonnegative integers");
                }
                v
            }
            _ => {
                self.err(k, "expected a list of nonnegative integers");
                None
            }
        }
    }

    fn require<T>(&mut self, k: &'static str, v: Option<T>) -> Option<T> {
        if v.is_none() && !self.has(k) {
            self.err(k, "missing");
        }
        v
    }

    fn sub(&mut self, k: &'static str) -> Option<Value> {
        self.raw(k)
    }

    fn finish(self) {
        for k in self.map.keys() {
            if !self.allowed.contains(&k.as_str()) {
                let p = if self.path.is_empty() {
                    k.clone()
                } else {
                    format!("{}.{k}", self.path)
                };
                self.errs.push(format!("{p}: unknown key"));
            }
        }
    }
}

/// Parses TOML, or JSON when the text starts with `{`.
pub fn parse_value(text: &str) -> Result<Value> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::Config(vec![format!("invalid JSON: {e}")]))
    } else {
        let t: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(vec![format!("invalid TOML: {e}")]))?;
        serde_json::to_value(t)
            .map_err(|e| Error::Config(vec![format!("unrepresentable value: {e}")]))
    }
}

/// Parses and validates a configuration. `scenario` (from the command line)
/// takes precedence over the `scenario` key of the file.
pub fn parse_config(text: &str, scenario: Option<Scenario>) -> Result<RunConfig> {
    let root = parse_value(text)?;
    let mut errs = Vec::new();
    let cfg = build(&root, scenario, &mut errs);
    match cfg {
        Some(c) if errs.is_empty() => Ok(c),
        _ => {
            if errs.is_empty() {
                errs.push("configuration is incomplete".into());
            }
            Err(Error::Config(errs))
        }
    }
}

fn build(
    root: &Value,
    cli_scenario: Option<Scenario>,
    errs: &mut Vec<String>,
) -> Option<RunConfig> {
    let mut top = Section::new("", Some(root), errs);
    let file_scenario: Option<Scenario> = top.parsed("scenario");
    let scenario = cli_scenario.or(file_scenario);
    let sections = [
        "output",
        "protocol",
        "cavity",
        "qubit",
        "model",
        "grid",
        "sweep",
        "speed",
        "comparison",
        "profile",
    ];
    let values: Vec<Option<Value>> = sections.iter().map(|&s| top.sub(s)).collect();
    top.finish();
    let get = |name: &str| values[sections.iter().position(|&s| s == name).unwrap()].clone();
    let Some(scenario) = scenario else {
        errs.push("scenario: missing (give it on the command line or in the file)".into());
        return None;
    };

    let output = parse_output(get("output").as_ref(), errs);
    let model = parse_model(get("model").as_ref(), errs);
    let qubit = parse_qubit(get("qubit").as_ref(), errs);
    let grid = parse_grid(get("grid").as_ref(), errs);
    let cavity = parse_cavity(
        "cavity",
        get("cavity").as_ref(),
        errs,
        Some(CavityStateSpec::Fock { n: 1 }),
    );
    let default_m = match scenario {
        Scenario::NoiseSweep => Some(5),
        Scenario::Sequential | Scenario::Parallel => None,
        _ => Some(1),
    };
    let mut protocol = parse_protocol(get("protocol").as_ref(), errs, default_m);
    let unused = |name: &str, errs: &mut Vec<String>| {
        if get(name).is_some() {
            errs.push(format!("{name}: not used by scenario {scenario}"));
        }
    };
    let (mut sweep, mut speed, mut comparison, mut profile) = (None, None, None, None);
    match scenario {
        Scenario::NoiseSweep => sweep = parse_sweep(get("sweep").as_ref(), errs),
        Scenario::SpeedCompare => speed = Some(parse_speed(get("speed").as_ref(), errs)),
        Scenario::RwaCompare => comparison = parse_comparison(get("comparison").as_ref(), errs),
        Scenario::CouplingProfile => {
            profile = parse_profile(get("profile").as_ref(), errs, cavity.as_ref())
        }
        _ => {}
    }
    if scenario != Scenario::NoiseSweep {
        unused("sweep", errs);
    }
    if scenario != Scenario::SpeedCompare {
        unused("speed", errs);
    }
    if scenario != Scenario::RwaCompare {
        unused("comparison", errs);
    }
    if scenario != Scenario::CouplingProfile {
        unused("profile", errs);
    }
    let spec = protocol.as_mut()?;
    spec.cavity = cavity?;
    spec.params = model?;
    spec.qubit = qubit?;
    spec.tau_grid = grid?;
    match scenario {
        Scenario::Parallel => spec.kind = ProtocolKind::Parallel,
        Scenario::JcSingle | Scenario::RwaCompare | Scenario::CouplingProfile
            if spec.num_qubits != 1 =>
        {
            errs.push(format!("protocol.num_qubits: scenario {scenario} needs 1"));
        }
        _ => {}
    }
    if matches!(
        scenario,
        Scenario::RwaCompare | Scenario::CouplingProfile | Scenario::NoiseSweep
    ) && !matches!(spec.cavity, CavityStateSpec::Fock { .. })
    {
        errs.push(format!(
            "cavity.kind: scenario {scenario} takes a fock cavity"
        ));
    }
    if scenario == Scenario::Parallel && spec.num_qubits > MAX_PARALLEL_QUBITS {
        errs.push(format!(
            "protocol.num_qubits: parallel runs support at most {MAX_PARALLEL_QUBITS}"
        ));
    }
    if let Err(e) = spec.validate() {
        errs.push(format!("protocol: {e}"));
    }
    check_dimension(spec, errs);
    if let Some(s) = &speed {
        for &m in &s.qubits {
            let mut p = spec.clone();
            p.num_qubits = m;
            p.kind = ProtocolKind::Parallel;
            p.cavity = CavityStateSpec::Fock { n: m };
            check_dimension(&p, errs);
        }
    }
    Some(RunConfig {
        scenario,
        output: output?,
        protocol: protocol?,
        sweep,
        speed,
        comparison,
        profile,
    })
}

/// Rejects joint spaces above [`MAX_DIM`]. Sequential windows hold one
/// qubit at a time.
fn check_dimension(spec: &ProtocolSpec, errs: &mut Vec<String>) {
    let qubits = match spec.kind {
        ProtocolKind::Parallel => spec.num_qubits.min(16),
        ProtocolKind::Sequential => 1,
    };
    match spec.resolve_cavity_dim() {
        Ok(d) if (1usize << qubits) * d > MAX_DIM => errs.push(format!(
            "protocol: joint dimension 2^{qubits} x {d} exceeds {MAX_DIM}"
        )),
        Ok(_) => {}
        Err(e) => errs.push(format!("cavity: {e}")),
    }
}

fn parse_output(v: Option<&Value>, errs: &mut Vec<String>) -> Option<OutputSettings> {
    let mut s = Section::new("output", v, errs);
    let path = s.string("path").map(PathBuf::from);
    let format = s.parsed("format").unwrap_or_default();
    let threads = s.usize("threads");
    if threads == Some(0) {
        s.err("threads", "must be >= 1");
    }
    s.finish();
    Some(OutputSettings {
        path,
        format,
        threads,
    })
}

fn parse_model(v: Option<&Value>, errs: &mut Vec<String>) -> Option<ModelParams> {
    let mut s = Section::new("model", v, errs);
    let pos = |x: f64| x > 0.0;
    let g = s.f64_in("g", 0.01, pos, "> 0");
    let omega_qub = s.f64_in("omega_qub", 1.0, pos, "> 0");
    let detuning = s.f64("detuning_ratio");
    let omega_cav = s.f64("omega_cav");
    let rwa = s.bool("rwa").unwrap_or(true);
    let coupling_v = s.sub("coupling");
    let mut p = ModelParams {
        omega_qub,
        omega_cav: omega_qub,
        g,
        rwa,
        coupling: CouplingProfile::Constant,
    };
    match (detuning, omega_cav) {
        (Some(_), Some(_)) => s.err("omega_cav", "give either omega_cav or detuning_ratio"),
        (Some(r), None) if !(r < 1.0 && r.is_finite()) => {
            s.err("detuning_ratio", format!("{r} is out of range (< 1)"))
        }
        (Some(r), None) => p = p.with_detuning_ratio(r),
        (None, Some(w)) if !(w > 0.0 && w.is_finite()) => {
            s.err("omega_cav", format!("{w} is out of range (> 0)"))
        }
        (None, Some(w)) => p.omega_cav = w,
        (None, None) => {}
    }
    s.finish();
    match coupling_v {
        None => {}
        Some(Value::String(k)) if k == "constant" => {}
        Some(v) => {
            let mut c = Section::new("model.coupling", Some(&v), errs);
            match c.string("kind").as_deref() {
                Some("constant") => {}
                Some("smoothed-square") => {
                    let g_delta = c.f64("g_delta");
                    let g_delta = c.require("g_delta", g_delta);
                    let g_t_tilde = c.f64("g_t_tilde");
                    let g_t_tilde = c.require("g_t_tilde", g_t_tilde);
                    if let (Some(g_delta), Some(g_t_tilde)) = (g_delta, g_t_tilde) {
                        let prof = CouplingProfile::SmoothedSquare { g_delta, g_t_tilde };
                        match prof.validate() {
                            Ok(()) => p.coupling = prof,
                            Err(e) => c.err("g_delta", e),
                        }
                    }
                }
                Some(other) => c.err(
                    "kind",
                    format!("unknown coupling {other:?} (constant or smoothed-square)"),
                ),
                None => c.err("kind", "missing"),
            }
            c.finish();
        }
    }
    Some(p)
}

fn parse_qubit(v: Option<&Value>, errs: &mut Vec<String>) -> Option<QubitStateSpec> {
    let mut s = Section::new("qubit", v, errs);
    let q = s.f64_in("q", 0.0, |x| (0.0..=1.0).contains(&x), "0 <= q <= 1");
    s.finish();
    Some(QubitStateSpec { q })
}

fn parse_grid(v: Option<&Value>, errs: &mut Vec<String>) -> Option<TauGrid> {
    let mut s = Section::new("grid", v, errs);
    let mut g = TauGrid::default();
    if let Some(p) = s.usize("points") {
        if p < 100 {
            s.err("points", format!("{p} is out of range (>= 100)"));
        } else {
            g.points = p;
        }
    }
    if s.has("g_tau_max") {
        let x = s.f64_in("g_tau_max", 1.0, |x| x > 0.0, "> 0");
        g.g_tau_max = Some(x);
    } else {
        s.raw("g_tau_max");
    }
    s.finish();
    Some(g)
}

fn parse_protocol(
    v: Option<&Value>,
    errs: &mut Vec<String>,
    default_m: Option<usize>,
) -> Option<ProtocolSpec> {
    let mut s = Section::new("protocol", v, errs);
    let m = s.usize("num_qubits").or(default_m);
    let m = s.require("num_qubits", m);
    if m == Some(0) {
        s.err("num_qubits", "must be >= 1");
    }
    let objective = match s.string("objective").as_deref() {
        None | Some("max-snr") => WindowObjective::MaxSnr,
        Some("max-fidelity") => WindowObjective::MaxFidelity,
        Some(o) => {
            s.err(
                "objective",
                format!("unknown objective {o:?} (max-snr or max-fidelity)"),
            );
            WindowObjective::MaxSnr
        }
    };
    let h_chi = s.f64_in("h_chi", FD_STEP, |x| x > 0.0 && x < 1.0, "0 < h_chi < 1");
    let method = match s.string("method").as_deref() {
        None | Some("trace") => MomentMethod::Trace,
        Some("finite-difference") => MomentMethod::FiniteDifference { h_chi },
        Some(o) => {
            s.err(
                "method",
                format!("unknown method {o:?} (trace or finite-difference)"),
            );
            MomentMethod::Trace
        }
    };
    let ode_tol = s.f64_in(
        "ode_tol",
        1e-10,
        |x| x > 0.0 && x < 1e-3,
        "0 < ode_tol < 1e-3",
    );
    let cavity_dim = s.usize("cavity_dim");
    if matches!(cavity_dim, Some(d) if d < 2) {
        s.err("cavity_dim", "must be >= 2");
    }
    s.finish();
    let mut spec = ProtocolSpec::new(
        ProtocolKind::Sequential,
        m?.max(1),
        CavityStateSpec::Fock { n: 1 },
        ModelParams::resonant(0.01),
    );
    spec.window_objective = objective;
    spec.method = method;
    spec.ode_tol = ode_tol;
    spec.cavity_dim = cavity_dim;
    Some(spec)
}

/// Squeezing from `zeta` or from `r` and `phi`.
fn squeeze(s: &mut Section) -> Option<C64> {
    if s.has("zeta") {
        s.raw("r");
        s.raw("phi");
        if s.has("r") || s.has("phi") {
            s.err("zeta", "give either zeta or r/phi");
        }
        return s.complex("zeta");
    }
    s.raw("zeta");
    let r = s.f64_in("r", 0.0, |x| x >= 0.0, ">= 0");
    let phi = s.f64_in("phi", 0.0, |_| true, "finite");
    Some(C64::from_polar(r, phi))
}

pub(crate) fn parse_cavity(
    path: &str,
    v: Option<&Value>,
    errs: &mut Vec<String>,
    default: Option<CavityStateSpec>,
) -> Option<CavityStateSpec> {
    if v.is_none() {
        if default.is_none() {
            errs.push(format!("{path}: missing"));
        }
        return default;
    }
    let mut s = Section::new(path, v, errs);
    let kind = s.string("kind");
    let kind = s.require("kind", kind);
    let need_usize = |s: &mut Section, k: &'static str| {
        let x = s.usize(k);
        s.require(k, x)
    };
    let spec = match kind.as_deref() {
        Some("fock") => need_usize(&mut s, "n").map(|n| CavityStateSpec::Fock { n }),
        Some("coherent") => {
            let a = s.complex("alpha");
            s.require("alpha", a)
                .map(|alpha| CavityStateSpec::Coherent { alpha })
        }
        Some(k @ ("squeezed-coherent" | "phase-randomized-squeezed")) => {
            let zeta = squeeze(&mut s);
            let at = if s.has("mean_photons") {
                s.raw("alpha_tilde");
                let mean = s.f64_in("mean_photons", 1.0, |x| x >= 0.0, ">= 0");
                let r = zeta.map_or(0.0, |z| z.norm());
                match alpha_tilde_for_mean(r, mean) {
                    Some(a) => Some(C64::new(a, 0.0)),
                    None => {
                        s.err("mean_photons", format!("sinh^2 r exceeds {mean}"));
                        None
                    }
                }
            } else {
                s.raw("mean_photons");
                let a = s.complex("alpha_tilde");
                s.require("alpha_tilde", a)
            };
            match (zeta, at) {
                (Some(zeta), Some(alpha_tilde)) if k == "squeezed-coherent" => {
                    Some(CavityStateSpec::SqueezedCoherent { zeta, alpha_tilde })
                }
                (Some(zeta), Some(alpha_tilde)) => {
                    Some(CavityStateSpec::PhaseRandomizedSqueezed { zeta, alpha_tilde })
                }
                _ => None,
            }
        }
        Some("thermalized-fock") => {
            let n = need_usize(&mut s, "n");
            let n_th = s.f64("n_th");
            match (n, s.require("n_th", n_th)) {
                (Some(n), Some(n_th)) if n_th >= 0.0 => {
                    Some(CavityStateSpec::ThermalizedFock { n, n_th })
                }
                (Some(_), Some(x)) => {
                    s.err("n_th", format!("{x} is out of range (>= 0)"));
                    None
                }
                _ => None,
            }
        }
        Some("attenuated-fock") => {
            let n = need_usize(&mut s, "n");
            let p = s.f64("p");
            match (n, s.require("p", p)) {
                (Some(n), Some(p)) if (0.0..=1.0).contains(&p) => {
                    Some(CavityStateSpec::AttenuatedFock { n, p })
                }
                (Some(_), Some(x)) => {
                    s.err("p", format!("{x} is out of range (0 <= p <= 1)"));
                    None
                }
                _ => None,
            }
        }
        Some(other) => {
            s.err("kind", format!("unknown cavity state {other:?}"));
            None
        }
        None => None,
    };
    // keys of other kinds are not allowed
    s.finish();
    if spec.is_none() && errs.is_empty() {
        errs.push(format!("{path}: invalid"));
    }
    spec
}

fn parse_sweep(v: Option<&Value>, errs: &mut Vec<String>) -> Option<SweepSettings> {
    if v.is_none() {
        errs.push("sweep: missing (noise-sweep needs sweep.parameter and sweep.values)".into());
        return None;
    }
    let mut s = Section::new("sweep", v, errs);
    let parameter = match s.string("parameter").as_deref() {
        Some("n_th") => Some(SweepParameter::NTh),
        Some("attenuation_p") => Some(SweepParameter::AttenuationP),
        Some("detuning_ratio") => Some(SweepParameter::DetuningRatio),
        Some("qubit_q") => Some(SweepParameter::QubitQ),
        Some("mean_photons") => Some(SweepParameter::MeanPhotons),
        Some("coupling_delta") => Some(SweepParameter::CouplingDelta),
        Some(o) => {
            s.err("parameter", format!("unknown sweep parameter {o:?}"));
            None
        }
        None => {
            s.err("parameter", "missing");
            None
        }
    };
    let values = s.f64_list("values");
    let values = s.require("values", values);
    let mean_photons = s
        .usize_list("mean_photons")
        .unwrap_or_else(|| vec![1, 2, 3, 4, 5]);
    if mean_photons.is_empty() || mean_photons.contains(&0) {
        s.err("mean_photons", "needs a nonempty list of integers >= 1");
    }
    let r_grid = s.f64_list("r_grid");
    let search = match r_grid {
        Some(g) if g.is_empty() || g.iter().any(|&r| !(r >= 0.0 && r.is_finite())) => {
            s.err("r_grid", "needs a nonempty list of values >= 0");
            GaussianSearchSpace::default()
        }
        Some(r_grid) => GaussianSearchSpace { r_grid },
        None => GaussianSearchSpace::default(),
    };
    let axis = match (parameter, values) {
        (Some(parameter), Some(values)) => {
            let axis = SweepAxis { parameter, values };
            if let Err(e) = axis.validate() {
                s.err("values", e);
            }
            Some(axis)
        }
        _ => None,
    };
    s.finish();
    Some(SweepSettings {
        axis: axis?,
        mean_photons,
        search,
    })
}

fn parse_speed(v: Option<&Value>, errs: &mut Vec<String>) -> SpeedSettings {
    let mut s = Section::new("speed", v, errs);
    let qubits = s
        .usize_list("qubits")
        .unwrap_or_else(|| vec![2, 3, 4, 5, 6]);
    if qubits.is_empty() || qubits.iter().any(|&m| m == 0 || m > MAX_PARALLEL_QUBITS) {
        s.err(
            "qubits",
            format!("needs values in 1..={MAX_PARALLEL_QUBITS}"),
        );
    }
    let n_th = s.f64_in("n_th", 1e-2, |x| x >= 0.0, ">= 0");
    let q = s.f64_in("q", 1e-3, |x| (0.0..=1.0).contains(&x), "0 <= q <= 1");
    let detuning_ratio = s.f64_in("detuning_ratio", 1e-3, |x| x < 1.0, "< 1");
    s.finish();
    SpeedSettings {
        qubits,
        n_th,
        q,
        detuning_ratio,
    }
}

fn positive_list(s: &mut Section, k: &'static str) -> Option<Vec<f64>> {
    let v = s.f64_list(k);
    let v = s.require(k, v)?;
    if v.is_empty() || v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        s.err(k, "needs a nonempty list of positive values");
        return None;
    }
    Some(v)
}

fn parse_comparison(v: Option<&Value>, errs: &mut Vec<String>) -> Option<ComparisonSettings> {
    let mut s = Section::new("comparison", v, errs);
    let couplings = positive_list(&mut s, "couplings");
    let gv = s.sub("gaussian");
    s.finish();
    let gaussian = parse_cavity("comparison.gaussian", gv.as_ref(), errs, None);
    Some(ComparisonSettings {
        gaussian: gaussian?,
        couplings: couplings?,
    })
}

fn parse_profile(
    v: Option<&Value>,
    errs: &mut Vec<String>,
    cavity: Option<&CavityStateSpec>,
) -> Option<ProfileSettings> {
    let mut s = Section::new("profile", v, errs);
    let g_deltas = positive_list(&mut s, "g_deltas");
    // half the perfect-charging time of the Fock cavity by default
    let n = match cavity {
        Some(CavityStateSpec::Fock { n }) => (*n).max(1),
        _ => 1,
    };
    let g_t_tilde = s.f64_in(
        "g_t_tilde",
        PI / (4.0 * (n as f64).sqrt()),
        |x| x > 0.0,
        "> 0",
    );
    let gv = s.sub("gaussian");
    s.finish();
    let gaussian = parse_cavity("profile.gaussian", gv.as_ref(), errs, None);
    Some(ProfileSettings {
        gaussian: gaussian?,
        g_deltas: g_deltas?,
        g_t_tilde,
    })
}
