use std::path::{Path, PathBuf};
use std::process::Command;

use reinsurance_game::bargaining::WelfareReport;
use reinsurance_game::cli::{run, EXIT_ACCURACY, EXIT_OK, EXIT_USAGE};
use reinsurance_game::contract::Indemnity;
use reinsurance_game::game::GridReport;

fn exp_cvar() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/exp_cvar.toml")
}

fn call(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut argv = vec!["reinsure"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn scenario_file(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const BASE: &str = "[game]\nfamily = \"mean_cvar(0.99)\"\ndistribution = \"exp(1)\"\ngamma1 = \"2/3\"\ngamma2 = \"1/3\"\n";

#[test]
fn nash_reports_example_geometry() {
    let s = exp_cvar();
    let (code, out) = call(&["nash", "--scenario", s.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("diagonal [0.3333, 0.6667]"), "{out}");
    assert!(out.contains("Gamma1 0.8333  Gamma2 -inf"), "{out}");
    assert!(out.contains("0 disagreements outside the boundary band"), "{out}");
}

#[test]
fn stackelberg_rows() {
    let s = exp_cvar();
    let (code, out) = call(&["stackelberg", "--scenario", s.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().filter(|l| l.starts_with("insurer") || l.starts_with("reinsurer")).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!(row.trim_end().ends_with("1.535057"), "{row}");
    }
}

#[test]
fn verify_binary_exits_zero() {
    let status = Command::new(env!("CARGO_BIN_EXE_reinsure"))
        .args(["verify", "--grid", "101", "--scenario"])
        .arg(exp_cvar())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["nash"]).0, EXIT_USAGE);
    let s = exp_cvar();
    assert_eq!(call(&["nash", "--grid", "5", "--scenario", s.to_str().unwrap()]).0, EXIT_USAGE);
    assert_eq!(call(&["bargain", "--zeta1", "1.5", "--scenario", s.to_str().unwrap()]).0, EXIT_USAGE);
    assert_eq!(call(&["bargain", "--format", "svg", "--scenario", s.to_str().unwrap()]).0, EXIT_USAGE);
    let bad = scenario_file(dir.path(), &format!("{BASE}delta = 1.0\n"));
    assert_eq!(call(&["nash", "--scenario", bad.to_str().unwrap()]).0, EXIT_USAGE);
    let missing = dir.path().join("nope.toml");
    assert_eq!(call(&["nash", "--scenario", missing.to_str().unwrap()]).0, EXIT_USAGE);
}

#[test]
fn truncation_loss_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASE.replace("exp(1)", "lognormal(0,3)") + "delta = 0.5\n";
    let s = scenario_file(dir.path(), &body);
    assert_eq!(call(&["evaluate", "--scenario", s.to_str().unwrap()]).0, EXIT_ACCURACY);
}

#[test]
fn help_exits_zero() {
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn evaluate_accepts_fractions() {
    let s = exp_cvar();
    let (code, out) = call(&["evaluate", "--gamma", "0,1/2", "--format", "csv", "--scenario", s.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "gamma,rho");
    let half: f64 = rows[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((half - (1.0 + 0.5 * 100f64.ln())).abs() < 1e-8);
}

#[test]
fn csv_outputs_round_trip() {
    let s = exp_cvar();
    let s = s.to_str().unwrap();

    let (_, out) = call(&["bargain", "--zeta1", "0.7", "--zeta2", "0.5", "--format", "csv", "--scenario", s]);
    let row = out.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.splitn(3, ',').collect();
    let report = WelfareReport::from_csv_row(fields[2]).unwrap();
    assert!((report.premium - (1.0 + 0.66 * 100f64.ln())).abs() < 1e-8);

    let (_, out) = call(&["pareto", "--format", "csv", "--scenario", s]);
    let i = Indemnity::from_csv_str(&out).unwrap();
    assert!(i.is_full());

    let (_, out) = call(&["verify", "--grid", "21", "--format", "csv", "--scenario", s]);
    let grid = GridReport::from_csv(&out).unwrap();
    assert_eq!(grid.n, 21);
    assert_eq!(grid.to_csv(), out);
}

#[test]
fn outputs_are_deterministic() {
    let s = exp_cvar();
    let s = s.to_str().unwrap();
    let a = call(&["sweep", "--grid", "31", "--format", "csv", "--scenario", s]).1;
    let b = call(&["sweep", "--grid", "31", "--format", "csv", "--scenario", s]).1;
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 31 * 31 + 1);
}

#[test]
fn artifacts_written() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{BASE}delta = 0.8\n\n[run]\ngrid_n = 21\noutputs = [\"table\", \"csv\", \"svg\"]\noutput_dir = \"out\"\n");
    let s = scenario_file(dir.path(), &body);
    let (code, _) = call(&["nash", "--scenario", s.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let out = dir.path().join("out");
    for file in [
        "nash.txt",
        "nash_grid.csv",
        "nash.json",
        "nash_regions.svg",
        "best_responses.svg",
        "welfare_regions.svg",
    ] {
        assert!(out.join(file).is_file(), "{file}");
    }
    let json = std::fs::read_to_string(out.join("nash.json")).unwrap();
    assert!(json.contains("\"gamma_bar_2\": \"-inf\""), "{json}");
    let svg = std::fs::read_to_string(out.join("nash_regions.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    let other = dir.path().join("elsewhere");
    let (code, _) = call(&["stackelberg", "--out", other.to_str().unwrap(), "--scenario", s.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(other.join("stackelberg.csv").is_file());
}
