//! The `reinsure` command-line front end.

pub mod scenario;
pub mod svg;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::bargaining::{optimal_gains_nonstrategic, welfare, GameSpec, WelfareReport};
use crate::contract::{pareto_indemnity_general, pareto_indemnity_parametric, Cover, Indemnity, DEFAULT_CELLS};
use crate::error::Error;
use crate::game::{
    nash_equilibria, stackelberg, verify_equilibria_bruteforce, EquilibriumReport, Interval, Lattice, Leader,
    LowerThreshold, UpperThreshold,
};
use crate::riskmeasure::RiskAversion;

pub use scenario::{parse_number, OutputKind, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ACCURACY: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "reinsure", version, about = "Reinsurance bargaining with strategic risk aversion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,

    /// Insurer's submitted risk aversion; defaults to the true level.
    #[arg(long, global = true, value_parser = level)]
    pub zeta1: Option<RiskAversion>,

    /// Reinsurer's submitted risk aversion; defaults to the true level.
    #[arg(long, global = true, value_parser = level)]
    pub zeta2: Option<RiskAversion>,

    /// Lattice size for sweeps, overriding the scenario.
    #[arg(long, global = true)]
    pub grid: Option<usize>,

    /// Directory for artifacts, overriding the scenario.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// What to print on stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutputKind::Table)]
    pub format: OutputKind,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// ρ(X; γ) for a list of levels.
    Evaluate {
        /// Comma-separated levels; fractions like 2/3 are accepted.
        #[arg(long, value_delimiter = ',', value_parser = level)]
        gamma: Vec<RiskAversion>,
    },
    /// Pareto-optimal cover at the submitted pair.
    Pareto,
    /// Bargained premium and welfare gains at the submitted pair.
    Bargain,
    /// The equilibrium set, with a grid check.
    Nash,
    /// Both leader cases.
    Stackelberg,
    /// Welfare gains over the whole lattice.
    Sweep,
    /// Brute-force equilibrium check; exits 3 on any mismatch.
    Verify,
}

fn level(text: &str) -> Result<RiskAversion, String> {
    let v = parse_number("risk aversion", text).map_err(|e| e.to_string())?;
    RiskAversion::new(v).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Core(Error),
    Mismatch(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Accuracy { .. } => EXIT_ACCURACY,
        _ => EXIT_USAGE,
    }
}

/// Everything a subcommand can produce.
#[derive(Default)]
struct Artifacts {
    table: String,
    csv: Option<(&'static str, String)>,
    svg: Vec<(&'static str, String)>,
    /// Always written when there is an output directory.
    json: Option<(&'static str, String)>,
    mismatches: usize,
}

/// Parse `args` (including the program name), run, and return the exit
/// status. Diagnostics go to stderr.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
        Err(Failure::Mismatch(n)) => {
            eprintln!("error: {n} lattice points disagree with the analytic equilibrium set");
            EXIT_MISMATCH
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    let path = cli
        .scenario
        .as_deref()
        .ok_or_else(|| Failure::Usage("--scenario <path> is required".into()))?;
    let mut scenario = Scenario::from_path(path)?;
    if let Some(n) = cli.grid {
        if n < 11 {
            return Err(Failure::Usage(format!("--grid {n} is below 11")));
        }
        scenario.grid_n = n;
    }
    let spec = &scenario.spec;
    let zeta1 = cli.zeta1.unwrap_or(spec.gamma1);
    let zeta2 = cli.zeta2.unwrap_or(spec.gamma2);

    let (name, art) = match &cli.command {
        Command::Evaluate { gamma } => ("evaluate", evaluate(spec, gamma)?),
        Command::Pareto => ("pareto", pareto(spec, zeta1, zeta2)?),
        Command::Bargain => ("bargain", bargain(spec, zeta1, zeta2)?),
        Command::Nash => ("nash", nash(spec, scenario.grid_n)?),
        Command::Stackelberg => ("stackelberg", stackelberg_cmd(spec)?),
        Command::Sweep => ("sweep", sweep(spec, scenario.grid_n)?),
        Command::Verify => ("verify", verify(spec, scenario.grid_n)?),
    };

    let shown = match cli.format {
        OutputKind::Table => art.table.clone(),
        OutputKind::Csv => match &art.csv {
            Some((_, text)) => text.clone(),
            None => return Err(Failure::Usage(format!("`{name}` has no csv output"))),
        },
        OutputKind::Svg => match art.svg.first() {
            Some((_, text)) => text.clone(),
            None => return Err(Failure::Usage(format!("`{name}` has no svg output"))),
        },
    };
    let out_dir = cli.out.clone().or(scenario.output_dir.clone());
    if let Some(dir) = out_dir {
        write_artifacts(&dir, name, &art, &scenario)?;
    }
    stdout
        .write_all(shown.as_bytes())
        .map_err(|e| Failure::Core(Error::io("<stdout>", e)))?;
    if art.mismatches > 0 {
        return Err(Failure::Mismatch(art.mismatches));
    }
    Ok(())
}

fn write_artifacts(dir: &Path, name: &str, art: &Artifacts, scenario: &Scenario) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |file: &str, text: &str| -> Result<(), Failure> {
        let path = dir.join(file);
        std::fs::write(&path, text).map_err(|e| Failure::Core(Error::io(path, e)))
    };
    for kind in &scenario.outputs {
        match kind {
            OutputKind::Table => write(&format!("{name}.txt"), &art.table)?,
            OutputKind::Csv => {
                if let Some((file, text)) = &art.csv {
                    write(file, text)?;
                }
            }
            OutputKind::Svg => {
                for (file, text) in &art.svg {
                    write(file, text)?;
                }
            }
        }
    }
    if let Some((file, text)) = &art.json {
        write(file, text)?;
    }
    Ok(())
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (k, (cell, w)) in cells.iter().zip(&width).enumerate() {
            if k > 0 {
                s.push_str("  ");
            }
            let _ = write!(s, "{cell:<w$}");
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

fn cover_name(c: Cover) -> &'static str {
    match c {
        Cover::Full => "full",
        Cover::Null => "null",
    }
}

fn header(spec: &GameSpec) -> String {
    format!(
        "family {}  loss {}  gamma1 {}  gamma2 {}  delta {}\n",
        spec.family, spec.dist, spec.gamma1, spec.gamma2, spec.delta
    )
}

fn evaluate(spec: &GameSpec, gammas: &[RiskAversion]) -> Result<Artifacts, Failure> {
    let defaults = [RiskAversion::ZERO, spec.gamma2, spec.gamma1, RiskAversion::ONE];
    let gammas = if gammas.is_empty() { &defaults[..] } else { gammas };
    let mut rows = Vec::new();
    let mut csv = String::from("gamma,rho\n");
    for &g in gammas {
        let r = spec.rho_whole(g)?;
        rows.push(vec![fixed(g.value()), fixed(r)]);
        let _ = writeln!(csv, "{},{}", g.value(), r);
    }
    Ok(Artifacts {
        table: header(spec) + &table(&["gamma", "rho(X; gamma)"], &rows),
        csv: Some(("evaluate.csv", csv)),
        ..Artifacts::default()
    })
}

const PARETO_PROBES: [f64; 6] = [0.1, 0.25, 0.5, 0.75, 0.9, 0.99];

fn pareto(spec: &GameSpec, zeta1: RiskAversion, zeta2: RiskAversion) -> Result<Artifacts, Failure> {
    let cover = pareto_indemnity_parametric(zeta1, zeta2, spec.gamma1, spec.gamma2);
    let indemnity = cover.indemnity(&spec.dist)?;
    let grid = Indemnity::quantile_grid(&spec.dist, DEFAULT_CELLS)?;
    let general = pareto_indemnity_general(&spec.dist, &spec.measure(zeta1), &spec.measure(zeta2), &grid)?;
    let general_shape = if general.indemnity.is_full() {
        "full"
    } else if general.indemnity.is_null() {
        "null"
    } else {
        "layered"
    };
    let mut text = header(spec);
    let _ = writeln!(text, "zeta1 {zeta1}  zeta2 {zeta2}");
    let _ = writeln!(text, "cover {}", cover_name(cover));
    let _ = writeln!(
        text,
        "cell-wise solver {general_shape}, objective {}",
        fixed(general.objective)
    );
    let rows: Vec<Vec<String>> = PARETO_PROBES
        .iter()
        .map(|&p| {
            let x = spec.dist.quantile(p)?;
            Ok(vec![format!("{p}"), fixed(x), fixed(indemnity.evaluate(x))])
        })
        .collect::<Result<_, Error>>()?;
    text.push_str(&table(&["p", "x = q(p)", "I(x)"], &rows));
    Ok(Artifacts {
        table: text,
        csv: Some(("indemnity.csv", indemnity.to_csv())),
        ..Artifacts::default()
    })
}

fn bargain(spec: &GameSpec, zeta1: RiskAversion, zeta2: RiskAversion) -> Result<Artifacts, Failure> {
    let r = welfare(spec, zeta1, zeta2)?;
    let rows = vec![
        vec!["zeta1".into(), format!("{zeta1}")],
        vec!["zeta2".into(), format!("{zeta2}")],
        vec!["cover".into(), cover_name(r.cover).into()],
        vec!["premium".into(), fixed(r.premium)],
        vec!["insurer gain before acceptance".into(), fixed(r.wg1_hat)],
        vec!["reinsurer gain before acceptance".into(), fixed(r.wg2_hat)],
        vec!["accepted".into(), r.accepted().to_string()],
        vec!["insurer gain".into(), fixed(r.wg1)],
        vec!["reinsurer gain".into(), fixed(r.wg2)],
        vec!["insurer risk after".into(), fixed(r.posterior_rho1)],
        vec!["reinsurer risk after".into(), fixed(r.posterior_rho2)],
    ];
    let csv = format!("zeta1,zeta2,{}\n{},{},{}\n", WelfareReport::CSV_HEADER, zeta1, zeta2, r.to_csv_row());
    Ok(Artifacts {
        table: header(spec) + &table(&["quantity", "value"], &rows),
        csv: Some(("bargain.csv", csv)),
        ..Artifacts::default()
    })
}

fn upper_json(t: Option<UpperThreshold>) -> Value {
    match t {
        None => Value::Null,
        Some(UpperThreshold::PlusInfinity) => json!("+inf"),
        Some(UpperThreshold::At(v)) => json!(v.value()),
    }
}

fn lower_json(t: Option<LowerThreshold>) -> Value {
    match t {
        None => Value::Null,
        Some(LowerThreshold::MinusInfinity) => json!("-inf"),
        Some(LowerThreshold::At(v)) => json!(v.value()),
    }
}

fn interval_json(i: &Interval) -> Value {
    json!({ "lo": i.lo, "hi": i.hi, "lo_closed": i.lo_closed, "hi_closed": i.hi_closed })
}

/// Machine-readable equilibrium set.
pub fn equilibrium_json(spec: &GameSpec, report: &EquilibriumReport) -> String {
    let points: Vec<Value> = report
        .per_point
        .iter()
        .map(|p| {
            json!({
                "zeta1": p.zeta1.value(),
                "zeta2": p.zeta2.value(),
                "cover": cover_name(p.welfare.cover),
                "premium": p.contract.premium,
                "wg1": p.welfare.wg1,
                "wg2": p.welfare.wg2,
            })
        })
        .collect();
    let doc = json!({
        "family": spec.family.to_string(),
        "distribution": spec.dist.to_string(),
        "gamma1": spec.gamma1.value(),
        "gamma2": spec.gamma2.value(),
        "delta": spec.delta,
        "every_pair": report.every_pair,
        "diagonal_segment": report.diagonal_segment.as_ref().map(interval_json),
        "gamma_bar_1": upper_json(report.gamma_bar_1),
        "gamma_bar_2": lower_json(report.gamma_bar_2),
        "trivial_region": {
            "insurer": report.trivial_region.insurer.iter().map(interval_json).collect::<Vec<_>>(),
            "reinsurer": report.trivial_region.reinsurer.iter().map(interval_json).collect::<Vec<_>>(),
        },
        "per_point": points,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json values serialise");
    text.push('\n');
    text
}

fn threshold_text(v: Option<f64>, sentinel: &str) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_else(|| sentinel.into())
}

fn nash(spec: &GameSpec, grid_n: usize) -> Result<Artifacts, Failure> {
    let report = nash_equilibria(spec)?;
    let grid = verify_equilibria_bruteforce(spec, grid_n)?;
    let mut text = header(spec);
    if report.every_pair {
        text.push_str("every pair is an equilibrium; no contract yields a gain\n");
    } else {
        let d = report.diagonal_segment.expect("diagonal when gains are possible");
        let _ = writeln!(text, "diagonal [{:.4}, {:.4}]", d.lo, d.hi);
        let _ = writeln!(
            text,
            "Gamma1 {}  Gamma2 {}",
            threshold_text(report.gamma_bar_1.and_then(|g| g.value()), "+inf"),
            threshold_text(report.gamma_bar_2.and_then(|g| g.value()), "-inf"),
        );
        let _ = writeln!(text, "trivial region {}", report.trivial_region);
        let rows: Vec<Vec<String>> = report
            .per_point
            .iter()
            .map(|p| {
                vec![
                    fixed(p.zeta1.value()),
                    fixed(p.contract.premium),
                    fixed(p.welfare.wg1),
                    fixed(p.welfare.wg2),
                ]
            })
            .collect();
        text.push_str(&table(&["gamma", "premium", "WG1", "WG2"], &rows));
    }
    let _ = writeln!(
        text,
        "grid {}x{}: {} equilibria, {} disagreements outside the boundary band",
        grid.n,
        grid.n,
        grid.flagged().count(),
        grid.mismatches().len()
    );
    let lattice = Lattice::new(spec, grid_n)?;
    Ok(Artifacts {
        table: text,
        csv: Some(("nash_grid.csv", grid.to_csv())),
        svg: vec![
            ("nash_regions.svg", svg::nash_regions(spec, &report)),
            ("best_responses.svg", svg::best_responses(spec, &report)?),
            ("welfare_regions.svg", svg::welfare_regions(spec, &report, &lattice)),
        ],
        json: Some(("nash.json", equilibrium_json(spec, &report))),
        mismatches: 0,
    })
}

fn stackelberg_cmd(spec: &GameSpec) -> Result<Artifacts, Failure> {
    let mut rows = Vec::new();
    let mut csv = String::from("leader,zeta1,zeta2,premium,wg1,wg2,total,every_pair\n");
    for leader in [Leader::Insurer, Leader::Reinsurer] {
        let s = stackelberg(spec, leader)?;
        let w = s.welfare;
        rows.push(vec![
            leader.to_string(),
            fixed(s.zeta1.value()),
            fixed(s.zeta2.value()),
            fixed(w.premium),
            fixed(w.wg1),
            fixed(w.wg2),
            fixed(w.wg1 + w.wg2),
        ]);
        let _ = writeln!(
            csv,
            "{leader},{},{},{},{},{},{},{}",
            s.zeta1,
            s.zeta2,
            w.premium,
            w.wg1,
            w.wg2,
            w.wg1 + w.wg2,
            u8::from(s.every_pair)
        );
    }
    let (o1, o2) = optimal_gains_nonstrategic(spec)?;
    let mut text = header(spec);
    text.push_str(&table(
        &["leader", "zeta1", "zeta2", "premium", "WG1", "WG2", "total"],
        &rows,
    ));
    let _ = writeln!(text, "truthful split: WG1 {}  WG2 {}", fixed(o1), fixed(o2));
    Ok(Artifacts {
        table: text,
        csv: Some(("stackelberg.csv", csv)),
        ..Artifacts::default()
    })
}

fn sweep(spec: &GameSpec, grid_n: usize) -> Result<Artifacts, Failure> {
    let lattice = Lattice::new(spec, grid_n)?;
    let report = nash_equilibria(spec)?;
    let n = lattice.len();
    let mut csv = String::from("zeta1,zeta2,cover,premium,wg1,wg2\n");
    let (mut best1, mut best2, mut accepted) = (0.0f64, 0.0f64, 0usize);
    for i in 0..n {
        for j in 0..n {
            let w = lattice.welfare(spec, i, j);
            best1 = best1.max(w.wg1);
            best2 = best2.max(w.wg2);
            accepted += usize::from(w.accepted());
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                lattice.zetas[i],
                lattice.zetas[j],
                cover_name(w.cover),
                w.premium,
                w.wg1,
                w.wg2
            );
        }
    }
    let mut text = header(spec);
    let _ = writeln!(text, "grid {n}x{n}: {accepted} pairs trade full cover");
    let _ = writeln!(text, "largest WG1 {}  largest WG2 {}", fixed(best1), fixed(best2));
    Ok(Artifacts {
        table: text,
        csv: Some(("sweep.csv", csv)),
        svg: vec![("welfare_regions.svg", svg::welfare_regions(spec, &report, &lattice))],
        ..Artifacts::default()
    })
}

const LISTED_MISMATCHES: usize = 10;

fn verify(spec: &GameSpec, grid_n: usize) -> Result<Artifacts, Failure> {
    let grid = verify_equilibria_bruteforce(spec, grid_n)?;
    let mismatches = grid.mismatches();
    let banded = grid.disagreements().count() - mismatches.len();
    let mut text = header(spec);
    let _ = writeln!(text, "grid {}x{}", grid.n, grid.n);
    let _ = writeln!(text, "grid equilibria      {}", grid.flagged().count());
    let _ = writeln!(
        text,
        "analytic equilibria  {}",
        grid.cells.iter().filter(|c| c.analytic_nash).count()
    );
    let _ = writeln!(text, "disagreements in the boundary band  {banded}");
    let _ = writeln!(text, "disagreements outside the band      {}", mismatches.len());
    if !mismatches.is_empty() {
        let rows: Vec<Vec<String>> = mismatches
            .iter()
            .take(LISTED_MISMATCHES)
            .map(|c| {
                vec![
                    fixed(c.zeta1),
                    fixed(c.zeta2),
                    c.grid_nash.to_string(),
                    c.analytic_nash.to_string(),
                ]
            })
            .collect();
        text.push_str(&table(&["zeta1", "zeta2", "grid", "analytic"], &rows));
    }
    let count = mismatches.len();
    Ok(Artifacts {
        table: text,
        csv: Some(("verify_grid.csv", grid.to_csv())),
        mismatches: count,
        ..Artifacts::default()
    })
}
