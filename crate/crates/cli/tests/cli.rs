use hyperslice_cli::{ExperimentConfig, Suite, SuiteReport};
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hyperslice");

/// A small quadrature so the binary runs stay fast, with tolerances to match.
const LIGHT_BM: &str = "suite = \"bm\"\nseed = 5\n\
    [tolerances]\n\"bm.calibration\" = 1e-5\n\"bm.reproduction\" = 1e-4\n\
    [quadrature]\nangular_nodes = 16\nradial_nodes = 16\nvolume_refinement = 1\n";

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("HYPERSLICE_THREADS", t);
    }
    cmd.output().unwrap()
}

#[test]
fn table_prints_basis_products() {
    let out = run(&["table", "--algebra", "octonion"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    let e1 = text.lines().find(|l| l.trim_start().starts_with("e1 ")).unwrap();
    let cells: Vec<_> = e1.split_whitespace().collect();
    assert_eq!(cells[1..4], ["e1", "-e0", "e3"]);
    assert!(!run(&["table", "--algebra", "sedenion"], None).status.success());
}

#[test]
fn output_is_identical_across_worker_counts_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bm.toml", LIGHT_BM);
    let cfg = cfg.to_str().unwrap();
    let one = run(&["run", "--config", cfg], Some("1"));
    let three = run(&["run", "--config", cfg], Some("3"));
    let again = run(&["run", "--config", cfg], Some("3"));
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(three.stdout, again.stdout);
    let report = SuiteReport::from_json(std::str::from_utf8(&one.stdout).unwrap()).unwrap();
    assert_eq!(report.suite, "bm");
    assert_eq!(report.seed, 5);
    assert!(report.pass);
    assert_eq!(report.convergence.len(), 3);
}

#[test]
fn seed_override_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.toml", "suite = \"representation\"\nsamples = 20\n");
    let cfg = cfg.to_str().unwrap();
    let a = run(&["run", "--config", cfg, "--seed", "1"], None);
    let b = run(&["run", "--config", cfg, "--seed", "2"], None);
    assert_ne!(a.stdout, b.stdout);
    let parsed = SuiteReport::from_json(std::str::from_utf8(&b.stdout).unwrap()).unwrap();
    assert_eq!(parsed.seed, 2);
}

#[test]
fn csv_and_text_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bm.toml", LIGHT_BM);
    let csv_path = dir.path().join("out.csv");
    let out = run(
        &["run", "--config", cfg.to_str().unwrap(), "--format", "csv", "--out", csv_path.to_str().unwrap()],
        None,
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("M,R,V,abs_error,wall_ms"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("16,16,1,") && rows[2].starts_with("64,16,1,"));

    let text = run(
        &["run", "--config", cfg.to_str().unwrap(), "--suite", "spherical", "--format", "text"],
        None,
    );
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("spherical.identity") && text.contains("PASS (3/3 checks passed)"), "{text}");
}

#[test]
fn failing_check_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "strict.toml",
        "suite = \"products\"\n[tolerances]\n\"products.leibniz\" = 0.0\n\"products.star_vs_slice\" = 0.0\n",
    );
    let out = run(&["run", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let report = SuiteReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(!report.pass);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL products.leibniz"));
}

#[test]
fn invalid_config_reports_field_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "suite = \"bm\"\n\n[quadrature]\nangular_nodes = 4\n");
    let out = run(&["run", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml:4:") && err.contains("quadrature.angular_nodes"), "{err}");
    let missing = run(&["run", "--config", "/nonexistent/config.toml"], None);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn configured_functions_replace_random_ones() {
    let dir = tempfile::tempdir().unwrap();
    // z₁²z₂·e₁ + 2z₂ + 1 in the quaternions
    write(
        dir.path(),
        "cubic.json",
        r#"{"arity":2,"algebra":"quaternion","terms":[
            {"mu":[2,1],"coeff":[0,1,0,0]},
            {"mu":[0,1],"coeff":[2,0,0,0]},
            {"mu":[0,0],"coeff":[1,0,0,0]}]}"#,
    );
    let text = "suite = \"off-slice\"\nalgebra = \"quaternion\"\nfunctions = [\"cubic.json\"]\n\
                [quadrature]\nangular_nodes = 32\nradial_nodes = 16\n";
    let cfg_path = write(dir.path(), "f.toml", text);
    let cfg = ExperimentConfig::from_file(&cfg_path).unwrap();
    assert_eq!(cfg.functions.len(), 1);
    assert_eq!(cfg.functions[0].degree(), 3);
    let out = run(&["run", "--config", cfg_path.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));

    let wrong = write(dir.path(), "w.toml", "algebra = \"octonion\"\nfunctions = [\"cubic.json\"]\n");
    let err = ExperimentConfig::from_file(&wrong).unwrap_err().to_string();
    assert!(err.contains("w.toml:2:") && err.contains("does not match"), "{err}");
}

#[test]
fn library_and_binary_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write(dir.path(), "z.toml", "suite = \"algebra\"\nsamples = 50\n");
    let cfg = ExperimentConfig::from_file(&cfg_path).unwrap();
    assert_eq!(cfg.suite, Suite::Algebra);
    let lib = hyperslice_cli::run_suite(&cfg);
    let out = run(&["run", "--config", cfg_path.to_str().unwrap()], None);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), lib.to_json());
}
