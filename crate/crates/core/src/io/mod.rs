//! Scenario execution, result tables and run manifests.

mod config;
mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fcs::Extended;
use crate::protocols::{
    averaged_snr, run as run_protocol, snr_per_time, ChargeReport, ProtocolKind,
};
use crate::states::CavityStateSpec;
use crate::sweeps::{sweep_coupling_profile, sweep_d, sweep_rwa_comparison};

pub use config::{
    parse_config, parse_value, ComparisonSettings, Format, OutputSettings, ProfileSettings,
    RunConfig, Scenario, SpeedSettings, SweepSettings,
};
pub use table::{Cell, Table};

/// Environment variable that overrides the thread count from the file.
pub const THREADS_ENV: &str = "QBATT_THREADS";

/// Reproducibility record written next to every table.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub scenario: Scenario,
    pub config_sha256: String,
    pub config: Value,
    pub cavity_dims: Vec<usize>,
    pub discarded_tail_max: f64,
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub table: Table,
    pub manifest: RunManifest,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Sets the size of the global worker pool. Only the first call has an
/// effect.
pub fn configure_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}

fn ext(x: f64) -> Extended {
    if x == f64::INFINITY {
        Extended::Infinite
    } else {
        Extended::Finite(x)
    }
}

struct Collected {
    dims: Vec<usize>,
    tail: f64,
    warnings: Vec<String>,
}

impl Collected {
    fn new() -> Self {
        Self {
            dims: Vec::new(),
            tail: 0.0,
            warnings: Vec::new(),
        }
    }

    fn report(&mut self, r: &ChargeReport) {
        self.dims.push(r.cavity_dim);
        self.tail = self.tail.max(r.discarded_tail);
        self.warnings.extend(r.warnings.iter().cloned());
    }
}

fn window_summary(r: &ChargeReport) -> Value {
    let windows: Vec<Value> = r
        .windows
        .iter()
        .map(|w| {
            json!({
                "window": w.index,
                "chosen_g_tau": w.chosen_g_tau,
                "max_snr": w.max_snr,
                "max_fidelity": w.max_fidelity,
                "cavity_mean_after": w.cavity_mean_after,
                "backend": w.backend,
            })
        })
        .collect();
    let mean = r.spec.cavity.nominal_mean_photons();
    let averaged = if mean > 0.0 {
        averaged_snr(r, mean, None).ok()
    } else {
        None
    };
    json!({
        "windows": windows,
        "g_tau_charge": r.g_tau_charge,
        "averaged_snr": averaged,
        "initial_mean_photons": r.initial_mean_photons,
    })
}

fn protocol_table(r: &ChargeReport) -> Table {
    let parallel = r.spec.kind == ProtocolKind::Parallel;
    let mut cols = vec![
        "window",
        "g_tau",
        "mean[hw]",
        "variance[hw^2]",
        "snr",
        "fidelity",
    ];
    if parallel {
        cols.extend([
            "collective_mean[hw]",
            "collective_variance[hw^2]",
            "collective_snr",
        ]);
    }
    let mut t = Table::new(&cols);
    for w in &r.windows {
        for (i, s) in w.stats.iter().enumerate() {
            let mut row = vec![
                Cell::Int(w.index as i64),
                Cell::Num(w.g_tau[i]),
                Cell::Num(s.mean),
                Cell::Num(s.variance),
                Cell::Ext(s.snr),
                Cell::Num(w.fidelity[i]),
            ];
            if let Some(c) = w.collective.as_ref().map(|c| c[i]) {
                row.extend([Cell::Num(c.mean), Cell::Num(c.variance), Cell::Ext(c.snr)]);
            }
            t.push(row);
        }
    }
    t
}

fn run_speed(cfg: &RunConfig, s: &SpeedSettings, col: &mut Collected) -> Result<(Table, Value)> {
    let mut t = Table::new(&[
        "num_qubits",
        "sequential_snr_per_g_tau",
        "parallel_snr_per_g_tau",
        "sequential_g_tau_charge",
        "parallel_g_tau_charge",
    ]);
    let g = cfg.protocol.params.g;
    for &m in &s.qubits {
        let mut seq = cfg.protocol.clone();
        seq.kind = ProtocolKind::Sequential;
        seq.num_qubits = m;
        seq.cavity = if s.n_th > 0.0 {
            CavityStateSpec::ThermalizedFock { n: m, n_th: s.n_th }
        } else {
            CavityStateSpec::Fock { n: m }
        };
        seq.qubit.q = s.q;
        seq.params = seq.params.with_detuning_ratio(s.detuning_ratio);
        let mut par = cfg.protocol.clone();
        par.kind = ProtocolKind::Parallel;
        par.num_qubits = m;
        par.cavity = CavityStateSpec::Fock { n: m };
        par.qubit.q = 0.0;
        par.params.omega_cav = par.params.omega_qub;
        let rs = run_protocol(&seq)?;
        let rp = run_protocol(&par)?;
        col.report(&rs);
        col.report(&rp);
        t.push(vec![
            Cell::Int(m as i64),
            Cell::Ext(ext(snr_per_time(&rs, g)?)),
            Cell::Ext(ext(snr_per_time(&rp, g)?)),
            Cell::Num(rs.g_tau_charge),
            Cell::Num(rp.g_tau_charge),
        ]);
    }
    Ok((t, Value::Null))
}

/// Runs the scenario and builds its table and manifest. `config_text` is the
/// exact file content, hashed into the manifest.
pub fn run(cfg: &RunConfig, config_text: &str) -> Result<RunOutput> {
    let start = Instant::now();
    let mut col = Collected::new();
    let (table, summary) = match cfg.scenario {
        Scenario::JcSingle | Scenario::Sequential | Scenario::Parallel => {
            let r = run_protocol(&cfg.protocol)?;
            col.report(&r);
            let mut t = protocol_table(&r);
            if cfg.scenario == Scenario::JcSingle {
                t.drop_column("window");
            }
            (t, window_summary(&r))
        }
        Scenario::NoiseSweep => {
            let s = cfg.sweep.as_ref().expect("validated");
            let tab = sweep_d(&s.axis, &cfg.protocol, &s.search, &s.mean_photons)?;
            col.dims.extend(&tab.cavity_dims);
            col.tail = tab.max_discarded_tail;
            col.warnings.extend(tab.notes.iter().cloned());
            let mut t = Table::new(&[
                tab.parameter.map_or("axis", |p| p.name()),
                "mean_photons",
                "fock_averaged_snr",
                "gaussian_averaged_snr",
                "r_star",
                "alpha_tilde_star",
                "d",
            ]);
            for r in &tab.rows {
                t.push(vec![
                    Cell::Num(r.axis_value),
                    Cell::Int(r.mean_photons as i64),
                    Cell::Ext(r.fock_averaged_snr),
                    Cell::Num(r.gaussian_averaged_snr),
                    Cell::Num(r.r_star),
                    Cell::Num(r.alpha_tilde_star),
                    Cell::Ext(r.d),
                ]);
            }
            (t, Value::Null)
        }
        Scenario::SpeedCompare => run_speed(cfg, cfg.speed.as_ref().expect("validated"), &mut col)?,
        Scenario::RwaCompare => {
            let c = cfg.comparison.as_ref().expect("validated");
            let rows = sweep_rwa_comparison(&cfg.protocol, &c.gaussian, &c.couplings)?;
            let mut t = Table::new(&[
                "coupling[g/omega_qub]",
                "fock_jc_max_snr",
                "fock_rabi_max_snr",
                "gaussian_jc_max_snr",
                "gaussian_rabi_max_snr",
                "rabi_gap",
                "snr_deviation",
                "fidelity_deviation",
            ]);
            for r in rows {
                t.push(vec![
                    Cell::Num(r.coupling),
                    Cell::Ext(r.fock_jc_max),
                    Cell::Ext(r.fock_rabi_max),
                    Cell::Ext(r.gaussian_jc_max),
                    Cell::Ext(r.gaussian_rabi_max),
                    Cell::Ext(r.rabi_gap),
                    Cell::Num(r.snr_deviation),
                    Cell::Num(r.fidelity_deviation),
                ]);
            }
            (t, Value::Null)
        }
        Scenario::CouplingProfile => {
            let p = cfg.profile.as_ref().expect("validated");
            let rows =
                sweep_coupling_profile(&cfg.protocol, &p.gaussian, p.g_t_tilde, &p.g_deltas)?;
            let mut t = Table::new(&["g_delta", "fock_max_snr", "gaussian_max_snr", "gap"]);
            for r in rows {
                t.push(vec![
                    Cell::Num(r.g_delta),
                    Cell::Ext(r.fock_max),
                    Cell::Ext(r.gaussian_max),
                    Cell::Ext(r.gap),
                ]);
            }
            (t, Value::Null)
        }
    };
    col.dims.sort_unstable();
    col.dims.dedup();
    let manifest = RunManifest {
        tool: "qbatt".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: cfg.scenario,
        config_sha256: sha256_hex(config_text.as_bytes()),
        config: serde_json::to_value(cfg).map_err(|e| Error::Config(vec![e.to_string()]))?,
        cavity_dims: col.dims,
        discarded_tail_max: col.tail,
        threads: cfg.output.threads,
        wall_clock_seconds: Some(start.elapsed().as_secs_f64()),
        summary,
        warnings: col.warnings,
    };
    Ok(RunOutput { table, manifest })
}

/// Manifest path paired with an output file: `out.csv` → `out.csv.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Renders the table. JSON output embeds the manifest without the
/// wall-clock entry so that identical configs give identical bytes.
pub fn render(out: &RunOutput, format: Format) -> String {
    match format {
        Format::Csv => out.table.to_csv(),
        Format::Json => {
            let mut m = out.manifest.clone();
            m.wall_clock_seconds = None;
            let v = json!({ "manifest": m, "table": out.table.to_json() });
            let mut s = serde_json::to_string_pretty(&v).expect("serializable");
            s.push('\n');
            s
        }
    }
}

pub fn render_manifest(m: &RunManifest) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("serializable");
    s.push('\n');
    s
}

/// Writes the table and its sidecar manifest.
pub fn write_outputs(out: &RunOutput, path: &Path, format: Format) -> Result<PathBuf> {
    let io = |context: String| move |source| Error::Io { context, source };
    std::fs::write(path, render(out, format)).map_err(io(format!("writing {}", path.display())))?;
    let mp = manifest_path(path);
    std::fs::write(&mp, render_manifest(&out.manifest))
        .map_err(io(format!("writing {}", mp.display())))?;
    Ok(mp)
}
