use std::fs;
use std::path::Path;
use std::process::Command;

fn abflux(dir: &Path, experiment: &str, config: &str) -> (i32, std::path::PathBuf) {
    let cfg = dir.join(format!("{experiment}.toml"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("out-{experiment}"));
    let status = Command::new(env!("CARGO_BIN_EXE_abflux"))
        .arg(experiment)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--threads", "1"])
        .status()
        .unwrap();
    (status.code().unwrap(), out)
}

fn error_record(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("error.json")).unwrap()).unwrap()
}

#[test]
fn monopole_run_writes_table_chart_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = abflux(dir.path(), "monopole", "[monopole]\nq_values = [1.0]\ng_values = [0.5, 0.7]\n");
    assert_eq!(code, 0);
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("q,g,two_qg_over_hbar_c,n,satisfied,residual"));
    assert!(lines.next().unwrap().starts_with("1,0.5,1,1,true,0,"));
    assert!(lines.next().unwrap().starts_with("1,0.7,1.4,1,false,"));
    assert!(fs::read_to_string(out.join("dirac_residuals.svg")).unwrap().starts_with("<svg"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "monopole");
    assert_eq!(manifest["config"]["constants"]["hbar"], 1.0);
    assert_eq!(manifest["config"]["monopole"]["contour_nodes"], 256);
    assert_eq!(manifest["threads"], 1);
}

#[test]
fn flux_quant_table_steps_by_the_pair_quantum() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = abflux(dir.path(), "flux-quant", "[flux_quant]\napplied = [0.4, 1.4, 2.6]\n");
    assert_eq!(code, 0);
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    let trapped: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    let pi = std::f64::consts::PI;
    assert_eq!(trapped, vec![0.0, pi, 3.0 * pi]);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = abflux(dir.path(), "gauge-check", "[gauge_check]\ncontours = 10\nbogus = 1\n");
    assert_eq!(code, 2);
    let rec = error_record(&out);
    assert_eq!(
        (rec["kind"].as_str(), rec["line"].as_u64(), rec["key"].as_str()),
        (Some("schema"), Some(3), Some("bogus"))
    );

    let (code, out) = abflux(dir.path(), "monopole", "experiment = \"flux-quant\"\n");
    assert_eq!(code, 2);
    assert_eq!(error_record(&out)["key"], "experiment");
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
[grid]
nx = 128
ny = 96
[geometry]
barrier_column = 56
barrier_thickness = 4
slit_centers = [40, 56]
slit_width = 1
flux_position = [57.5, 48.5]
detector_column = 100
source = { center = [28.0, 48.0], sigma = 4.0, k0 = [1.0, 0.0] }
[propagator]
absorber = { kind = "layer", width = 12, strength = 0.5 }
[double_slit]
fluxes = [0.0]
max_steps = 200
min_transmitted = 0.5
"#;
    let (code, out) = abflux(dir.path(), "double-slit", config);
    assert_eq!(code, 3);
    let rec = error_record(&out);
    assert_eq!(rec["kind"], "numerical");
    assert!(rec["error"].as_str().unwrap().starts_with("NoTransmission"), "{rec}");
}
