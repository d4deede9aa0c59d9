use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use tempfile::TempDir;

use randtoep::experiments::{read_csv, ExperimentConfig, ProcessFlags};
use randtoep::{DistributionSpec, EnsembleKind, NormMethod};
use randtoep_cli::{parse_config, ConfigOverrides};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_randtoep"));
    c.env_remove("RANDTOEP_THREADS");
    c
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("failed to spawn randtoep")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const MINIMAL: &str = r#"{"ensemble":"sym_toeplitz","dist":[{"kind":"rademacher"}],"n_list":[64],"replications":1,"seed":7}"#;

#[test]
fn minimal_config_defaults() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "cfg.json", MINIMAL);
    let c = parse_config(Some(&p), &ConfigOverrides::default()).unwrap();
    assert_eq!(c.tol, 1e-8);
    assert_eq!(c.grid_factor, 64);
    assert_eq!(c.master_seed, 7);
    assert_eq!(c.n_list, vec![64]);
}

#[test]
fn zero_dimension_rejected() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "cfg.json", &MINIMAL.replace("[64]", "[0]"));
    let err = parse_config(Some(&p), &ConfigOverrides::default()).unwrap_err();
    assert!(err.to_string().contains("dimension must be ≥ 1"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn flags_override_file() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "cfg.json", MINIMAL);
    let o = ConfigOverrides {
        n_list: Some(vec![8, 16]),
        seed: Some(99),
        dist: vec!["gaussian_std".into(), r#"{"kind":"rademacher","m":1.0}"#.into()],
        processes: Some(vec!["plain_Z".into()]),
        ..ConfigOverrides::default()
    };
    let c = parse_config(Some(&p), &o).unwrap();
    assert_eq!(c.n_list, vec![8, 16]);
    assert_eq!(c.master_seed, 99);
    assert_eq!(c.specs, vec![DistributionSpec::gaussian_std(), DistributionSpec::shifted(DistributionSpec::rademacher(), 1.0)]);
    assert_eq!(c.processes, ProcessFlags { upper_y: false, fejer_lower: false, plain_z: true });
}

#[test]
fn contradictory_and_malformed_configs() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "cfg.json", MINIMAL);
    let o = ConfigOverrides {
        method: Some(randtoep_cli::MethodArg::Dense),
        n_list: Some(vec![2048]),
        ..ConfigOverrides::default()
    };
    let err = parse_config(Some(&p), &o).unwrap_err().to_string();
    assert!(err.contains("dense_cap"), "{err}");
    let bad = write(dir.path(), "bad.json", "{\"ensemble\": ");
    assert!(parse_config(Some(&bad), &ConfigOverrides::default()).unwrap_err().to_string().contains("malformed JSON"));
    assert!(parse_config(Some(&dir.path().join("missing.json")), &ConfigOverrides::default()).is_err());
}

#[test]
fn missing_seed_is_resolved() {
    let o = ConfigOverrides {
        ensemble: Some(EnsembleKind::SymToeplitz),
        dist: vec!["rademacher".into()],
        n_list: Some(vec![4]),
        replications: Some(1),
        ..ConfigOverrides::default()
    };
    parse_config(None, &o).unwrap();
}

fn arb_spec() -> impl Strategy<Value = DistributionSpec> {
    (0usize..3, -5.0f64..5.0, 0.0f64..4.0).prop_map(|(k, m, v)| {
        let base = [DistributionSpec::rademacher(), DistributionSpec::gaussian_std(), DistributionSpec::uniform_symmetric()][k].clone();
        DistributionSpec::shifted(base.with_variance(v).unwrap(), m)
    })
}

fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
    (
        0usize..5,
        prop::collection::vec(arb_spec(), 1..4),
        prop::collection::btree_set(1usize..5000, 1..5),
        1usize..500,
        any::<u64>(),
        0usize..3,
        (any::<bool>(), any::<bool>(), any::<bool>()),
        -3.0f64..3.0,
        (1e-14f64..1e-2, 4usize..200, prop::option::of(1usize..10_000), 1usize..8192, any::<bool>()),
    )
        .prop_map(|(k, specs, ns, r, seed, method, (u, f, z), shift, (tol, gf, mi, cap, timing))| ExperimentConfig {
            ensemble: EnsembleKind::ALL[k],
            specs,
            n_list: ns.into_iter().collect(),
            replications: r,
            master_seed: seed,
            norm_method: [NormMethod::Dense, NormMethod::Iterative, NormMethod::Auto][method],
            processes: ProcessFlags { upper_y: u, fejer_lower: f, plain_z: z },
            mean_shift: shift,
            tol,
            grid_factor: gf,
            max_iter: mi,
            dense_cap: cap,
            record_timing: timing,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn config_round_trips(c in arb_config()) {
        let json = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &c);
        let dir = TempDir::new().unwrap();
        let p = write(dir.path(), "cfg.json", &json);
        if c.validate().is_ok() {
            prop_assert_eq!(parse_config(Some(&p), &ConfigOverrides::default()).unwrap(), c);
        }
    }
}

fn sweep_in(dir: &Path, threads: Option<&str>) -> Output {
    let cfg = write(
        dir,
        "cfg.json",
        r#"{"ensemble":"sym_toeplitz","dist":[{"kind":"rademacher"}],"n_list":[16,64,256],"replications":6,"seed":5,"norm_method":"iterative","processes":{"plain_Z":true}}"#,
    );
    let mut cmd = bin();
    cmd.args(["sweep", "--config"]).arg(&cfg).arg("--out-dir").arg(dir.join("out"));
    if let Some(t) = threads {
        cmd.env("RANDTOEP_THREADS", t);
    }
    run(&mut cmd)
}

#[test]
fn sweep_writes_all_formats() {
    let dir = TempDir::new().unwrap();
    let out = sweep_in(dir.path(), None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("master_seed=5"));
    let csv = fs::read(dir.path().join("out/results.csv")).unwrap();
    let rows = read_csv(csv.as_slice()).unwrap();
    assert_eq!(rows.len(), 18);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["sandwich_violations"], 0);
    assert_eq!(summary["per_n"].as_array().unwrap().len(), 3);
    let svg = fs::read_to_string(dir.path().join("out/ratio.svg")).unwrap();
    assert_eq!(svg.matches("class=\"mean-marker\"").count(), 3);
}

#[test]
fn sweep_is_byte_identical_across_thread_counts() {
    let mut outputs = Vec::new();
    for threads in [Some("1"), Some("2"), Some("4"), None] {
        let dir = TempDir::new().unwrap();
        let out = sweep_in(dir.path(), threads);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let files: Vec<Vec<u8>> = ["results.csv", "summary.json", "ratio.svg"]
            .iter()
            .map(|f| fs::read(dir.path().join("out").join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = sweep_in(dir.path(), Some("zero"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cfg.json", &MINIMAL.replace("[64]", "[0]"));
    let out = run(bin().args(["sweep", "--config"]).arg(&cfg).arg("--out-dir").arg(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension must be ≥ 1"));
    let out = run(bin().args(["bounds", "--n", "4", "--bogus", "1"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_norm_suptrig_pipeline() {
    let dir = TempDir::new().unwrap();
    let coeffs = dir.path().join("coeffs.json");
    let out = run(bin()
        .args(["sample", "--ensemble", "sym_toeplitz", "--dist", "rademacher", "--n", "50", "--seed", "3", "--out"])
        .arg(&coeffs));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("master_seed=3"));

    let norm = |method: &str| -> f64 {
        let out = run(bin().args(["norm", "--in"]).arg(&coeffs).args(["--method", method]));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["value"].as_f64().unwrap()
    };
    let dense = norm("dense");
    assert!((dense - norm("iterative")).abs() <= 1e-8 * dense);

    let sup = |process: &str| -> serde_json::Value {
        let out = run(bin().args(["suptrig", "--in"]).arg(&coeffs).args(["--process", process]));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    };
    assert!(sup("fejer_lower")["grid_max"].as_f64().unwrap() <= dense + 1e-9);
    assert!(sup("upper_Y")["certified_upper"].as_f64().unwrap() >= dense - 1e-9);
    assert!(sup("plain_Z")["grid_max"].as_f64().unwrap() >= 0.0);

    // Same seed, same bytes.
    let again = dir.path().join("again.json");
    run(bin()
        .args(["sample", "--ensemble", "sym_toeplitz", "--dist", "rademacher", "--n", "50", "--seed", "3", "--out"])
        .arg(&again));
    assert_eq!(fs::read(&coeffs).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn bounds_command() {
    let out = run(bin().args(["bounds", "--n", "100", "--K", "2"]));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 100);
    assert_eq!(v["constants"]["k_dudley"], 2.0);
    assert!(v["dudley"]["integral_value"].as_f64().unwrap() <= v["dudley"]["closed_form"].as_f64().unwrap());
    let out = run(bin().args(["bounds", "--n", "0"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_renders_csv() {
    let dir = TempDir::new().unwrap();
    let out = sweep_in(dir.path(), None);
    assert!(out.status.success());
    let svg = dir.path().join("plot.svg");
    let out = run(bin().args(["report", "--in"]).arg(dir.path().join("out/results.csv")).arg("--svg").arg(&svg));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let from_report = fs::read_to_string(&svg).unwrap();
    assert_eq!(from_report, fs::read_to_string(dir.path().join("out/ratio.svg")).unwrap());
    let empty = write(dir.path(), "empty.csv", &randtoep::experiments::CSV_HEADER.join(","));
    let out = run(bin().args(["report", "--in"]).arg(&empty).arg("--svg").arg(&svg));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let blocker = write(dir.path(), "file", "x");
    let cfg = write(dir.path(), "cfg.json", MINIMAL);
    let out = run(bin().args(["sweep", "--config"]).arg(&cfg).arg("--out-dir").arg(blocker.join("sub")));
    assert_eq!(out.status.code(), Some(3));
}
