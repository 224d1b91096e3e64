//! The strategic layer: each agent submits a risk-aversion level, the
//! Pareto-optimal cover and Nash-bargained premium follow, and each agent
//! keeps the welfare gain measured with their true level.
//!
//! Everything here assumes `ρ(X; ·)` is continuous and strictly increasing,
//! so every threshold and indifference curve is found by bisection on
//! `ρ(X; ·)` alone. Closed forms for affine families live only in tests.

use std::fmt;

use rayon::prelude::*;

use crate::bargaining::{welfare, welfare_from_risks, GameSpec, WelfareReport, WholeRisks};
use crate::contract::{pareto_indemnity_parametric, Contract, Cover};
use crate::error::{Error, Result};
use crate::riskmeasure::RiskAversion;
use crate::roots::{bisect, ROOT_TOL};

/// Tolerance for "cannot improve" in the grid verifier.
pub const GRID_TOL: f64 = 1e-9;

/// `Γ₁`, the submission above which the insurer rejects every contract.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UpperThreshold {
    At(RiskAversion),
    /// The set defining the threshold is empty.
    PlusInfinity,
}

/// `Γ₂`, the submission below which the reinsurer rejects every contract.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LowerThreshold {
    At(RiskAversion),
    MinusInfinity,
}

impl UpperThreshold {
    pub fn value(self) -> Option<f64> {
        match self {
            UpperThreshold::At(v) => Some(v.value()),
            UpperThreshold::PlusInfinity => None,
        }
    }

    /// Upper end of `f₂`'s domain, clipped to the strategy set.
    fn clip(self) -> f64 {
        self.value().unwrap_or(1.0)
    }
}

impl LowerThreshold {
    pub fn value(self) -> Option<f64> {
        match self {
            LowerThreshold::At(v) => Some(v.value()),
            LowerThreshold::MinusInfinity => None,
        }
    }

    fn clip(self) -> f64 {
        self.value().unwrap_or(0.0)
    }
}

impl fmt::Display for UpperThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpperThreshold::At(v) => write!(f, "{v}"),
            UpperThreshold::PlusInfinity => f.write_str("+inf"),
        }
    }
}

impl fmt::Display for LowerThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowerThreshold::At(v) => write!(f, "{v}"),
            LowerThreshold::MinusInfinity => f.write_str("-inf"),
        }
    }
}

/// Value of an argmax correspondence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BestResponse {
    /// Every strategy in `[0, 1]` is optimal (all yield zero gain).
    Everything,
    Point(RiskAversion),
}

fn require_gains(spec: &GameSpec) -> Result<()> {
    if spec.gains_possible() {
        Ok(())
    } else {
        Err(Error::invalid(
            "game",
            format!(
                "thresholds and indifference curves need gamma1 > gamma2, got {} <= {}",
                spec.gamma1, spec.gamma2
            ),
        ))
    }
}

fn clamp_ra(v: f64) -> RiskAversion {
    RiskAversion::new(v.clamp(0.0, 1.0)).expect("clamped")
}

/// `Γ₁ = inf{ζ : ŴG₁(ζ, 0) < 0}`.
pub fn gamma_bar_1(spec: &GameSpec) -> Result<UpperThreshold> {
    require_gains(spec)?;
    let r1 = spec.rho_whole(spec.gamma1)?;
    let r0 = spec.rho_whole(RiskAversion::ZERO)?;
    let d = spec.delta;
    let h = |z: f64| -> Result<f64> { Ok(r1 - (1.0 - d) * r0 - d * spec.rho_whole(clamp_ra(z))?) };
    if h(1.0)? >= 0.0 {
        return Ok(UpperThreshold::PlusInfinity);
    }
    Ok(UpperThreshold::At(clamp_ra(bisect(h, spec.gamma1.value(), 1.0, ROOT_TOL)?)))
}

/// `Γ₂ = sup{ζ₂ : ŴG₂(1, ζ₂) < 0}`.
pub fn gamma_bar_2(spec: &GameSpec) -> Result<LowerThreshold> {
    require_gains(spec)?;
    let r2 = spec.rho_whole(spec.gamma2)?;
    let r_top = spec.rho_whole(RiskAversion::ONE)?;
    let d = spec.delta;
    let k = |z: f64| -> Result<f64> { Ok(-r2 + (1.0 - d) * spec.rho_whole(clamp_ra(z))? + d * r_top) };
    if k(0.0)? >= 0.0 {
        return Ok(LowerThreshold::MinusInfinity);
    }
    Ok(LowerThreshold::At(clamp_ra(bisect(k, 0.0, spec.gamma2.value(), ROOT_TOL)?)))
}

/// The reinsurer's submission that leaves the insurer exactly indifferent,
/// for `ζ₁ ∈ (γ₁, Γ₁]`.
pub fn f2(spec: &GameSpec, zeta1: RiskAversion) -> Result<RiskAversion> {
    let upper = gamma_bar_1(spec)?.clip();
    let z1 = zeta1.value();
    // Γ₁ itself is only known to ROOT_TOL.
    if !(z1 > spec.gamma1.value() && z1 <= upper + ROOT_TOL) {
        return Err(Error::Domain {
            what: "f2 argument",
            value: z1,
            domain: "(gamma1, Gamma1]",
        });
    }
    let r1 = spec.rho_whole(spec.gamma1)?;
    let rz1 = spec.rho_whole(zeta1)?;
    let d = spec.delta;
    let wg1 = |z2: f64| -> Result<f64> { Ok(r1 - (1.0 - d) * spec.rho_whole(clamp_ra(z2))? - d * rz1) };
    Ok(clamp_ra(bisect(wg1, 0.0, z1, ROOT_TOL)?))
}

/// The insurer's submission that leaves the reinsurer exactly indifferent,
/// for `ζ₂ ∈ [Γ₂, γ₂)`.
pub fn f1(spec: &GameSpec, zeta2: RiskAversion) -> Result<RiskAversion> {
    let lower = gamma_bar_2(spec)?.clip();
    let z2 = zeta2.value();
    if !(z2 >= lower - ROOT_TOL && z2 < spec.gamma2.value()) {
        return Err(Error::Domain {
            what: "f1 argument",
            value: z2,
            domain: "[Gamma2, gamma2)",
        });
    }
    let r2 = spec.rho_whole(spec.gamma2)?;
    let rz2 = spec.rho_whole(zeta2)?;
    let d = spec.delta;
    let wg2 = |z1: f64| -> Result<f64> { Ok(-r2 + (1.0 - d) * rz2 + d * spec.rho_whole(clamp_ra(z1))?) };
    Ok(clamp_ra(bisect(wg2, z2, 1.0, ROOT_TOL)?))
}

/// `argmax_{ζ₂} WG₂(ζ₁, ζ₂)`.
pub fn best_response_reinsurer(spec: &GameSpec, zeta1: RiskAversion) -> Result<BestResponse> {
    if !spec.gains_possible() || zeta1 <= spec.gamma2 {
        return Ok(BestResponse::Everything);
    }
    if zeta1 <= spec.gamma1 {
        return Ok(BestResponse::Point(zeta1));
    }
    match gamma_bar_1(spec)? {
        UpperThreshold::At(g) if zeta1 > g => Ok(BestResponse::Everything),
        _ => Ok(BestResponse::Point(f2(spec, zeta1)?)),
    }
}

/// `argmax_{ζ₁} WG₁(ζ₁, ζ₂)`.
pub fn best_response_insurer(spec: &GameSpec, zeta2: RiskAversion) -> Result<BestResponse> {
    if !spec.gains_possible() || zeta2 >= spec.gamma1 {
        return Ok(BestResponse::Everything);
    }
    if zeta2 >= spec.gamma2 {
        return Ok(BestResponse::Point(zeta2));
    }
    match gamma_bar_2(spec)? {
        LowerThreshold::At(g) if zeta2 < g => Ok(BestResponse::Everything),
        _ => Ok(BestResponse::Point(f1(spec, zeta2)?)),
    }
}

/// An interval of `[0, 1]` with open or closed ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Product of two unions of intervals: the equilibria where neither agent
/// can gain whatever they submit.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivialRegion {
    pub insurer: Vec<Interval>,
    pub reinsurer: Vec<Interval>,
}

impl TrivialRegion {
    pub fn contains(&self, zeta1: f64, zeta2: f64) -> bool {
        self.insurer.iter().any(|i| i.contains(zeta1)) && self.reinsurer.iter().any(|i| i.contains(zeta2))
    }
}

fn show_union(parts: &[Interval]) -> String {
    if parts.is_empty() {
        return "empty".into();
    }
    parts.iter().map(ToString::to_string).collect::<Vec<_>>().join(" u ")
}

impl fmt::Display for TrivialRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x {}", show_union(&self.insurer), show_union(&self.reinsurer))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumPoint {
    pub zeta1: RiskAversion,
    pub zeta2: RiskAversion,
    pub contract: Contract,
    pub welfare: WelfareReport,
}

/// The equilibrium set of a game.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumReport {
    /// `γ₁ ≤ γ₂`: every pair is an equilibrium and nobody gains.
    pub every_pair: bool,
    /// `[γ₂, γ₁]`: the strictly beneficial equilibria `(γ, γ)`.
    pub diagonal_segment: Option<Interval>,
    pub trivial_region: TrivialRegion,
    pub gamma_bar_1: Option<UpperThreshold>,
    pub gamma_bar_2: Option<LowerThreshold>,
    pub per_point: Vec<EquilibriumPoint>,
}

impl EquilibriumReport {
    pub fn contains(&self, zeta1: f64, zeta2: f64) -> bool {
        if self.every_pair {
            return true;
        }
        let on_diagonal = zeta1 == zeta2 && self.diagonal_segment.is_some_and(|d| d.contains(zeta1));
        on_diagonal || self.trivial_region.contains(zeta1, zeta2)
    }

    pub fn is_strictly_beneficial(&self, zeta1: f64, zeta2: f64) -> bool {
        !self.every_pair && zeta1 == zeta2 && self.diagonal_segment.is_some_and(|d| d.contains(zeta1))
    }
}

const DIAGONAL_SAMPLES: usize = 5;

/// The complete equilibrium set.
///
/// With `γ₁ > γ₂` it is the diagonal `{(γ, γ) : γ ∈ [γ₂, γ₁]}` plus the
/// region where both submissions make every reply worthless,
/// `([0, γ₂] ∪ (Γ₁, 1]) × ([0, Γ₂) ∪ [γ₁, 1])`.
pub fn nash_equilibria(spec: &GameSpec) -> Result<EquilibriumReport> {
    if !spec.gains_possible() {
        let contract = Contract::new(Cover::Null.indemnity(&spec.dist)?, 0.0)?;
        let sample = EquilibriumPoint {
            zeta1: spec.gamma1,
            zeta2: spec.gamma2,
            welfare: welfare(spec, spec.gamma1, spec.gamma2)?,
            contract,
        };
        let mut sample = sample;
        if sample.welfare.cover == Cover::Full {
            sample.contract = Contract::new(Cover::Full.indemnity(&spec.dist)?, sample.welfare.premium)?;
        }
        return Ok(EquilibriumReport {
            every_pair: true,
            diagonal_segment: None,
            trivial_region: TrivialRegion {
                insurer: vec![Interval::closed(0.0, 1.0)],
                reinsurer: vec![Interval::closed(0.0, 1.0)],
            },
            gamma_bar_1: None,
            gamma_bar_2: None,
            per_point: vec![sample],
        });
    }

    let (g1, g2) = (spec.gamma1.value(), spec.gamma2.value());
    let gb1 = gamma_bar_1(spec)?;
    let gb2 = gamma_bar_2(spec)?;

    let mut insurer = vec![Interval::closed(0.0, g2)];
    if let UpperThreshold::At(v) = gb1 {
        let iv = Interval {
            lo: v.value(),
            hi: 1.0,
            lo_closed: false,
            hi_closed: true,
        };
        if !iv.is_empty() {
            insurer.push(iv);
        }
    }
    let mut reinsurer = Vec::new();
    if let LowerThreshold::At(v) = gb2 {
        let iv = Interval {
            lo: 0.0,
            hi: v.value(),
            lo_closed: true,
            hi_closed: false,
        };
        if !iv.is_empty() {
            reinsurer.push(iv);
        }
    }
    reinsurer.push(Interval::closed(g1, 1.0));

    let indemnity = Cover::Full.indemnity(&spec.dist)?;
    let per_point = (0..DIAGONAL_SAMPLES)
        .map(|k| {
            let t = k as f64 / (DIAGONAL_SAMPLES - 1) as f64;
            let z = match k {
                0 => spec.gamma2,
                k if k == DIAGONAL_SAMPLES - 1 => spec.gamma1,
                _ => clamp_ra(g2 + t * (g1 - g2)),
            };
            let report = welfare(spec, z, z)?;
            Ok(EquilibriumPoint {
                zeta1: z,
                zeta2: z,
                contract: Contract::new(indemnity.clone(), report.premium)?,
                welfare: report,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EquilibriumReport {
        every_pair: false,
        diagonal_segment: Some(Interval::closed(g2, g1)),
        trivial_region: TrivialRegion { insurer, reinsurer },
        gamma_bar_1: Some(gb1),
        gamma_bar_2: Some(gb2),
        per_point,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Leader {
    Insurer,
    Reinsurer,
}

impl fmt::Display for Leader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Leader::Insurer => "insurer",
            Leader::Reinsurer => "reinsurer",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StackelbergOutcome {
    pub leader: Leader,
    pub zeta1: RiskAversion,
    pub zeta2: RiskAversion,
    pub welfare: WelfareReport,
    /// Set when every pair is a Stackelberg equilibrium; the pair reported
    /// is then the true levels.
    pub every_pair: bool,
}

/// The leader mimics the follower's true level and keeps the whole surplus.
pub fn stackelberg(spec: &GameSpec, leader: Leader) -> Result<StackelbergOutcome> {
    if !spec.gains_possible() {
        return Ok(StackelbergOutcome {
            leader,
            zeta1: spec.gamma1,
            zeta2: spec.gamma2,
            welfare: welfare(spec, spec.gamma1, spec.gamma2)?,
            every_pair: true,
        });
    }
    let z = match leader {
        Leader::Insurer => spec.gamma2,
        Leader::Reinsurer => spec.gamma1,
    };
    Ok(StackelbergOutcome {
        leader,
        zeta1: z,
        zeta2: z,
        welfare: welfare(spec, z, z)?,
        every_pair: false,
    })
}

/// `ρ(X; ·)` on the lattice `{k / (n-1)}` and at the true levels.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub zetas: Vec<f64>,
    rho: Vec<f64>,
    true1: f64,
    true2: f64,
}

impl Lattice {
    pub fn new(spec: &GameSpec, n: usize) -> Result<Self> {
        if n < 11 {
            return Err(Error::Domain {
                what: "grid size",
                value: n as f64,
                domain: "[11, ∞)",
            });
        }
        let zetas: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        let rho = zetas
            .par_iter()
            .map(|&z| spec.rho_whole(clamp_ra(z)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Lattice {
            zetas,
            rho,
            true1: spec.rho_whole(spec.gamma1)?,
            true2: spec.rho_whole(spec.gamma2)?,
        })
    }

    pub fn len(&self) -> usize {
        self.zetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zetas.is_empty()
    }

    fn report(&self, spec: &GameSpec, z1: f64, r1: f64, z2: f64, r2: f64) -> WelfareReport {
        let cover = pareto_indemnity_parametric(clamp_ra(z1), clamp_ra(z2), spec.gamma1, spec.gamma2);
        let risks = WholeRisks {
            true1: self.true1,
            true2: self.true2,
            submitted1: r1,
            submitted2: r2,
        };
        welfare_from_risks(cover, z1 == z2, spec.delta, &risks)
    }

    /// Welfare at lattice indices `(i, j)`.
    pub fn welfare(&self, spec: &GameSpec, i: usize, j: usize) -> WelfareReport {
        self.report(spec, self.zetas[i], self.rho[i], self.zetas[j], self.rho[j])
    }

    /// True when no unilateral deviation to a lattice level improves either
    /// agent by more than [`GRID_TOL`]. The pair itself need not lie on the
    /// lattice.
    pub fn is_grid_nash(&self, spec: &GameSpec, zeta1: RiskAversion, zeta2: RiskAversion) -> Result<bool> {
        let (z1, z2) = (zeta1.value(), zeta2.value());
        let (r1, r2) = (spec.rho_whole(zeta1)?, spec.rho_whole(zeta2)?);
        let here = self.report(spec, z1, r1, z2, r2);
        let best1 = (0..self.len())
            .map(|i| self.report(spec, self.zetas[i], self.rho[i], z2, r2).wg1)
            .fold(here.wg1, f64::max);
        let best2 = (0..self.len())
            .map(|j| self.report(spec, z1, r1, self.zetas[j], self.rho[j]).wg2)
            .fold(here.wg2, f64::max);
        Ok(here.wg1 >= best1 - GRID_TOL && here.wg2 >= best2 - GRID_TOL)
    }
}

/// One lattice point of a brute-force sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub i: usize,
    pub j: usize,
    pub zeta1: f64,
    pub zeta2: f64,
    pub wg1: f64,
    pub wg2: f64,
    pub grid_nash: bool,
    pub analytic_nash: bool,
    /// Within one cell of a line where the analytic set changes.
    pub boundary_band: bool,
}

#[derive(Clone, Debug)]
pub struct GridReport {
    pub n: usize,
    /// Row-major over `(i, j)`, `i` indexing `ζ₁`.
    pub cells: Vec<GridCell>,
}

impl GridReport {
    pub const CSV_HEADER: &'static str = "i,j,zeta1,zeta2,wg1,wg2,grid_nash,analytic_nash,boundary_band";

    pub fn cell(&self, i: usize, j: usize) -> &GridCell {
        &self.cells[i * self.n + j]
    }

    pub fn flagged(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(|c| c.grid_nash)
    }

    /// Symmetric difference between the grid and analytic sets.
    pub fn disagreements(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(|c| c.grid_nash != c.analytic_nash)
    }

    /// Disagreements outside the boundary band; empty when the analytic set
    /// is confirmed.
    pub fn mismatches(&self) -> Vec<&GridCell> {
        self.disagreements().filter(|c| !c.boundary_band).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() * 64);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                c.i,
                c.j,
                c.zeta1,
                c.zeta2,
                c.wg1,
                c.wg2,
                u8::from(c.grid_nash),
                u8::from(c.analytic_nash),
                u8::from(c.boundary_band)
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let mut cells = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse("grid csv", e.to_string()))?;
            let field = format!("grid csv line {}", line + 2);
            if rec.len() != 9 {
                return Err(Error::parse(field, "expected 9 columns"));
            }
            let num = |k: usize| -> Result<f64> {
                rec[k]
                    .parse::<f64>()
                    .map_err(|_| Error::parse(field.clone(), format!("`{}` is not a number", &rec[k])))
            };
            let idx = |k: usize| -> Result<usize> {
                rec[k]
                    .parse::<usize>()
                    .map_err(|_| Error::parse(field.clone(), format!("`{}` is not an index", &rec[k])))
            };
            let flag = |k: usize| -> Result<bool> {
                match &rec[k] {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::parse(field.clone(), format!("`{other}` is not 0 or 1"))),
                }
            };
            cells.push(GridCell {
                i: idx(0)?,
                j: idx(1)?,
                zeta1: num(2)?,
                zeta2: num(3)?,
                wg1: num(4)?,
                wg2: num(5)?,
                grid_nash: flag(6)?,
                analytic_nash: flag(7)?,
                boundary_band: flag(8)?,
            });
        }
        let n = (cells.len() as f64).sqrt().round() as usize;
        if n * n != cells.len() {
            return Err(Error::parse("grid csv", format!("{} rows is not a square lattice", cells.len())));
        }
        Ok(GridReport { n, cells })
    }
}

/// Brute-force Nash check over the `n × n` lattice of `[0, 1]²`, compared
/// against [`nash_equilibria`].
pub fn verify_equilibria_bruteforce(spec: &GameSpec, grid_n: usize) -> Result<GridReport> {
    let lattice = Lattice::new(spec, grid_n)?;
    let analytic = nash_equilibria(spec)?;
    let n = lattice.len();

    let rows: Vec<Vec<WelfareReport>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| lattice.welfare(spec, i, j)).collect())
        .collect();
    let best1: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| rows[i][j].wg1).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let best2: Vec<f64> = rows
        .iter()
        .map(|row| row.iter().map(|r| r.wg2).fold(f64::NEG_INFINITY, f64::max))
        .collect();

    let h = 1.0 / (n - 1) as f64;
    let (g1, g2) = (spec.gamma1.value(), spec.gamma2.value());
    let mut lines1 = Vec::new();
    let mut lines2 = Vec::new();
    if !analytic.every_pair {
        lines1.extend([g2, g1]);
        lines2.extend([g2, g1]);
        lines1.extend(analytic.gamma_bar_1.and_then(UpperThreshold::value));
        lines2.extend(analytic.gamma_bar_2.and_then(LowerThreshold::value));
    }
    let near = |x: f64, lines: &[f64]| lines.iter().any(|b| (x - b).abs() <= h * (1.0 + 1e-9));

    let mut cells = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            let (z1, z2) = (lattice.zetas[i], lattice.zetas[j]);
            cells.push(GridCell {
                i,
                j,
                zeta1: z1,
                zeta2: z2,
                wg1: r.wg1,
                wg2: r.wg2,
                grid_nash: r.wg1 >= best1[j] - GRID_TOL && r.wg2 >= best2[i] - GRID_TOL,
                analytic_nash: analytic.contains(z1, z2),
                boundary_band: near(z1, &lines1) || near(z2, &lines2),
            });
        }
    }
    Ok(GridReport { n, cells })
}
