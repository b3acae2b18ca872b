use qbatt_core::dynamics::ModelParams;
use qbatt_core::fcs::Extended;
use qbatt_core::io::{self, Cell, Format, Scenario};
use qbatt_core::protocols::{ProtocolKind, ProtocolSpec};
use qbatt_core::states::CavityStateSpec;
use qbatt_core::sweeps::{sweep_d, GaussianSearchSpace, SweepAxis, SweepParameter};

fn config(name: &str) -> String {
    let path = format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn small_search() -> GaussianSearchSpace {
    GaussianSearchSpace {
        r_grid: vec![0.0, 0.2, 0.4],
    }
}

#[test]
fn every_shipped_config_parses() {
    for s in Scenario::ALL {
        let ext = if s == Scenario::Parallel {
            "json"
        } else {
            "toml"
        };
        let text = config(&format!("{}.{ext}", s.name()));
        let cfg = io::parse_config(&text, None).unwrap();
        assert_eq!(cfg.scenario, s);
    }
}

#[test]
fn tables_are_deterministic() {
    let text = config("sequential.toml");
    let cfg = io::parse_config(&text, None).unwrap();
    let a = io::run(&cfg, &text).unwrap();
    let b = io::run(&cfg, &text).unwrap();
    assert_eq!(io::render(&a, Format::Csv), io::render(&b, Format::Csv));
    assert_eq!(io::render(&a, Format::Json), io::render(&b, Format::Json));
    assert_eq!(a.manifest.config_sha256, io::sha256_hex(text.as_bytes()));
}

#[test]
fn headers_name_units() {
    let text = config("sequential.toml");
    let cfg = io::parse_config(&text, None).unwrap();
    let out = io::run(&cfg, &text).unwrap();
    let csv = io::render(&out, Format::Csv);
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "window,g_tau,mean[hw],variance[hw^2],snr,fidelity");
    // ideal Fock charging diverges at every chosen time
    assert!(csv.contains(",inf,"));
    assert_eq!(csv.lines().count(), 1 + 5 * cfg.protocol.tau_grid.points);
}

#[test]
fn gaussian_branch_is_shared_along_noise_axes() {
    let base = ProtocolSpec::new(
        ProtocolKind::Sequential,
        2,
        CavityStateSpec::Fock { n: 1 },
        ModelParams::resonant(0.01),
    );
    for (parameter, values) in [
        (SweepParameter::NTh, vec![0.02, 0.2]),
        (SweepParameter::AttenuationP, vec![0.9, 0.99]),
    ] {
        let tab = sweep_d(
            &SweepAxis { parameter, values },
            &base,
            &small_search(),
            &[1, 2],
        )
        .unwrap();
        for n in [1, 2] {
            let g: Vec<u64> = tab
                .rows
                .iter()
                .filter(|r| r.mean_photons == n)
                .map(|r| r.gaussian_averaged_snr.to_bits())
                .collect();
            assert!(g.windows(2).all(|p| p[0] == p[1]), "{parameter:?} n={n}");
        }
        assert!(tab
            .rows
            .iter()
            .all(|r| matches!(r.d, Extended::Finite(x) if x.is_finite())));
    }
}

#[test]
fn divergent_fock_branch_is_flagged() {
    let base = ProtocolSpec::new(
        ProtocolKind::Sequential,
        2,
        CavityStateSpec::Fock { n: 1 },
        ModelParams::resonant(0.01),
    );
    let axis = SweepAxis {
        parameter: SweepParameter::QubitQ,
        values: vec![0.0, 1e-2],
    };
    let tab = sweep_d(&axis, &base, &small_search(), &[1]).unwrap();
    assert!(tab.rows[0].d.is_infinite());
    assert!(!tab.rows[1].d.is_infinite());
    assert!(!tab.notes.is_empty());
}

#[test]
fn parallel_table_has_collective_columns() {
    let text = config("parallel.json");
    let cfg = io::parse_config(&text, None).unwrap();
    let out = io::run(&cfg, &text).unwrap();
    let cols = &out.table.columns;
    assert!(cols.iter().any(|c| c == "collective_mean[hw]"));
    let mean = out.table.column("mean[hw]").unwrap();
    let coll = out.table.column("collective_mean[hw]").unwrap();
    for (a, b) in mean.iter().zip(&coll) {
        if let (Cell::Num(a), Cell::Num(b)) = (a, b) {
            assert!((3.0 * a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn json_rendering_omits_wall_clock() {
    let text = config("jc-single.toml");
    let cfg = io::parse_config(&text, None).unwrap();
    let out = io::run(&cfg, &text).unwrap();
    assert!(out.manifest.wall_clock_seconds.is_some());
    let v: serde_json::Value = serde_json::from_str(&io::render(&out, Format::Json)).unwrap();
    assert!(v["manifest"].get("wall_clock_seconds").is_none());
    assert_eq!(v["table"]["columns"][0], "g_tau");
    let side: serde_json::Value =
        serde_json::from_str(&io::render_manifest(&out.manifest)).unwrap();
    assert!(side["wall_clock_seconds"].is_number());
}
