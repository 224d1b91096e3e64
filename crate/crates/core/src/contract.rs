//! Indemnities in the class of non-decreasing, 1-Lipschitz ceded-loss
//! functions with `I(0) = 0`, and the Pareto-optimal choice among them.
//!
//! An [`Indemnity`] is stored through its marginal indemnification: a slope
//! `m_k ∈ [0, 1]` on each cell `[z_{k-1}, z_k)` of a loss grid.

use std::fmt::Write as _;
use std::path::Path;

use crate::distributions::LossDistribution;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::riskmeasure::{rho, PayoutSlice, RiskAversion, RiskMeasure};

/// Default number of equal-probability cells of an indemnity grid.
pub const DEFAULT_CELLS: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct Indemnity {
    /// `z_1 < … < z_M`; `z_0 = 0` is implicit.
    grid: Vec<f64>,
    marginal: Vec<f64>,
}

impl Indemnity {
    /// `grid` holds the right end of every cell; the first cell starts at 0.
    pub fn new(grid: Vec<f64>, marginal: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != marginal.len() {
            return Err(Error::invalid(
                "indemnity",
                format!("{} cell ends but {} slopes", grid.len(), marginal.len()),
            ));
        }
        let mut prev = 0.0;
        for &z in &grid {
            if !(z.is_finite() && z > prev) {
                return Err(Error::invalid("indemnity", "grid must be strictly increasing from 0"));
            }
            prev = z;
        }
        if let Some(m) = marginal.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::invalid(
                "indemnity",
                format!("marginal indemnification {m} outside [0, 1]"),
            ));
        }
        Ok(Indemnity { grid, marginal })
    }

    /// Cell ends at equal-probability spacing: `quantile(k / cells)` for
    /// `k = 1..cells` plus the support bound, with duplicates removed.
    pub fn quantile_grid(dist: &LossDistribution, cells: usize) -> Result<Vec<f64>> {
        let cells = cells.max(1);
        let upper = dist.support_upper();
        let mut grid = Vec::with_capacity(cells + 1);
        for k in 0..cells {
            let z = dist.quantile(k as f64 / cells as f64)?;
            if z > 0.0 && z < upper {
                grid.push(z);
            }
        }
        grid.push(upper);
        grid.dedup();
        Ok(grid)
    }

    pub fn with_slope(dist: &LossDistribution, cells: usize, slope: f64) -> Result<Self> {
        let grid = Self::quantile_grid(dist, cells)?;
        let marginal = vec![slope; grid.len()];
        Self::new(grid, marginal)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    pub fn cells(&self) -> usize {
        self.grid.len()
    }

    /// `I(x) = Σ m_k (min(x, z_k) - z_{k-1})⁺`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let mut total = 0.0;
        let mut left = 0.0;
        for (&right, &m) in self.grid.iter().zip(&self.marginal) {
            if x <= left {
                break;
            }
            total += m * (x.min(right) - left);
            left = right;
        }
        total
    }

    /// Slope of `I` at `z`; zero past the last cell.
    pub fn slope_at(&self, z: f64) -> f64 {
        let k = self.grid.partition_point(|&r| r <= z);
        self.marginal.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_full(&self) -> bool {
        self.marginal.iter().all(|&m| m == 1.0)
    }

    pub fn is_null(&self) -> bool {
        self.marginal.iter().all(|&m| m == 0.0)
    }

    /// Rows `z_k,m_k`, one per cell, under a `z,m` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,m\n");
        for (z, m) in self.grid.iter().zip(&self.marginal) {
            let _ = writeln!(out, "{z},{m}");
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut grid = Vec::new();
        let mut marginal = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse("indemnity csv", e.to_string()))?;
            if rec.len() != 2 {
                return Err(Error::parse(
                    format!("indemnity csv line {}", line + 2),
                    "expected `z,m`",
                ));
            }
            let num = |t: &str| {
                t.parse::<f64>().map_err(|_| {
                    Error::parse(format!("indemnity csv line {}", line + 2), format!("`{t}` is not a number"))
                })
            };
            grid.push(num(&rec[0])?);
            marginal.push(num(&rec[1])?);
        }
        Self::new(grid, marginal)
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }
}

/// `I(X) = X` on the equal-probability grid.
pub fn full_cover(dist: &LossDistribution) -> Result<Indemnity> {
    Indemnity::with_slope(dist, DEFAULT_CELLS, 1.0)
}

/// `I(X) = 0` on the equal-probability grid.
pub fn null_cover(dist: &LossDistribution) -> Result<Indemnity> {
    Indemnity::with_slope(dist, DEFAULT_CELLS, 0.0)
}

/// An indemnity together with the premium paid for it.
#[derive(Clone, Debug, PartialEq)]
pub struct Contract {
    pub indemnity: Indemnity,
    pub premium: f64,
}

impl Contract {
    pub fn new(indemnity: Indemnity, premium: f64) -> Result<Self> {
        if !(premium.is_finite() && premium >= 0.0) {
            return Err(Error::Domain {
                what: "premium",
                value: premium,
                domain: "[0, ∞)",
            });
        }
        Ok(Contract { indemnity, premium })
    }
}

/// The two indemnities selected in the single-family game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cover {
    Full,
    Null,
}

impl Cover {
    pub fn indemnity(self, dist: &LossDistribution) -> Result<Indemnity> {
        match self {
            Cover::Full => full_cover(dist),
            Cover::Null => null_cover(dist),
        }
    }
}

/// Pareto-optimal cover for submitted levels `(ζ₁, ζ₂)` when both agents
/// use the same family: full cover if the insurer appears more risk averse,
/// or if both submit the same level inside `[γ₂, γ₁]`; otherwise none.
/// `[γ₂, γ₁]` is empty when `γ₁ < γ₂`.
pub fn pareto_indemnity_parametric(
    zeta1: RiskAversion,
    zeta2: RiskAversion,
    gamma1: RiskAversion,
    gamma2: RiskAversion,
) -> Cover {
    let same_inside = zeta1 == zeta2 && gamma2 <= zeta1 && zeta1 <= gamma1;
    if zeta1 > zeta2 || same_inside {
        Cover::Full
    } else {
        Cover::Null
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParetoSolution {
    pub indemnity: Indemnity,
    /// `ρ₁(X - I(X)) + ρ₂(I(X))` at the optimum.
    pub objective: f64,
}

/// Relative gap below which two cell integrals count as equal.
const TIE_TOL: f64 = 1e-12;

/// Minimise `ρ₁(X - I(X)) + ρ₂(I(X))` over indemnities that are piecewise
/// linear on `grid`.
///
/// The objective is linear in each slope, with coefficient
/// `∫_cell g₂(S_X) - g₁(S_X)`, so each cell is ceded in full when the
/// reinsurer's distorted survival is cheaper and kept otherwise. Ties cede.
pub fn pareto_indemnity_general(
    dist: &LossDistribution,
    insurer: &RiskMeasure,
    reinsurer: &RiskMeasure,
    grid: &[f64],
) -> Result<ParetoSolution> {
    let mut breaks = dist.breakpoints();
    for s in insurer.family.kinks().into_iter().chain(reinsurer.family.kinks()) {
        breaks.push(dist.quantile(1.0 - s)?);
    }
    let mut marginal = Vec::with_capacity(grid.len());
    let mut left = 0.0;
    for &right in grid {
        let cell = |m: &RiskMeasure| -> Result<f64> {
            if dist.is_empirical() {
                // exact: S is a step function, reuse the layer sum on a one-cell indemnity
                let probe = cell_indicator(grid, left, right)?;
                rho(&m.family, dist, PayoutSlice::ceded(&probe), m.gamma)
            } else {
                quadrature::integrate(
                    |z| m.distortion(dist.survival(z)),
                    left,
                    right,
                    &breaks,
                )
            }
        };
        let c1 = cell(insurer)?;
        let c2 = cell(reinsurer)?;
        let scale = c1.abs().max(c2.abs()).max(f64::MIN_POSITIVE);
        let m = if c2 - c1 > TIE_TOL * scale { 0.0 } else { 1.0 };
        marginal.push(m);
        left = right;
    }
    let indemnity = Indemnity::new(grid.to_vec(), marginal)?;
    let objective = insurer.evaluate(dist, PayoutSlice::retained(&indemnity))?
        + reinsurer.evaluate(dist, PayoutSlice::ceded(&indemnity))?;
    Ok(ParetoSolution {
        indemnity,
        objective,
    })
}

fn cell_indicator(grid: &[f64], left: f64, right: f64) -> Result<Indemnity> {
    let marginal = grid
        .iter()
        .scan(0.0, |prev, &z| {
            let inside = *prev >= left && z <= right;
            *prev = z;
            Some(if inside { 1.0 } else { 0.0 })
        })
        .collect();
    Indemnity::new(grid.to_vec(), marginal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riskmeasure::DistortionFamily;

    fn ra(v: f64) -> RiskAversion {
        RiskAversion::new(v).unwrap()
    }

    fn exp1() -> LossDistribution {
        LossDistribution::exponential(1.0).unwrap()
    }

    #[test]
    fn full_and_null_evaluate() {
        let x = exp1();
        assert!((full_cover(&x).unwrap().evaluate(3.0) - 3.0).abs() < 1e-12);
        assert_eq!(null_cover(&x).unwrap().evaluate(3.0), 0.0);
    }

    #[test]
    fn full_cover_keeps_rho() {
        let x = exp1();
        let fam = DistortionFamily::mean_cvar(0.99).unwrap();
        let full = full_cover(&x).unwrap();
        let whole = rho(&fam, &x, PayoutSlice::whole(), ra(0.4)).unwrap();
        let ceded = rho(&fam, &x, PayoutSlice::ceded(&full), ra(0.4)).unwrap();
        let kept = rho(&fam, &x, PayoutSlice::retained(&full), ra(0.4)).unwrap();
        assert!((whole - ceded).abs() < 1e-9);
        assert_eq!(kept, 0.0);
    }

    #[test]
    fn quantile_grid_is_strict_and_starts_after_zero() {
        let u = LossDistribution::uniform(2.0, 4.0).unwrap();
        let g = Indemnity::quantile_grid(&u, 4).unwrap();
        assert_eq!(g, vec![2.0, 2.5, 3.0, 3.5, 4.0]);
        let e = LossDistribution::empirical(&[1.0, 1.0, 2.0, 5.0], None).unwrap();
        let g = Indemnity::quantile_grid(&e, 8).unwrap();
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*g.last().unwrap(), 5.0);
    }

    #[test]
    fn stop_loss_layer() {
        let i = Indemnity::new(vec![1.0, 3.0, 10.0], vec![0.0, 1.0, 0.5]).unwrap();
        assert_eq!(i.evaluate(0.5), 0.0);
        assert_eq!(i.evaluate(2.0), 1.0);
        assert_eq!(i.evaluate(5.0), 3.0);
        assert_eq!(i.evaluate(20.0), 5.5);
        assert_eq!(i.slope_at(2.0), 1.0);
        assert_eq!(i.slope_at(11.0), 0.0);
    }

    #[test]
    fn invalid_indemnities() {
        assert!(Indemnity::new(vec![1.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(Indemnity::new(vec![1.0], vec![1.5]).is_err());
        assert!(Indemnity::new(vec![1.0], vec![]).is_err());
        assert!(Indemnity::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let i = Indemnity::new(vec![0.1, 0.7, 2.0 / 3.0 + 1.0], vec![0.0, 1.0, 1.0 / 3.0]).unwrap();
        assert_eq!(Indemnity::from_csv_str(&i.to_csv()).unwrap(), i);
        assert!(Indemnity::from_csv_str("z,m\n1,x\n").is_err());
    }

    #[test]
    fn parametric_selection() {
        let (g1, g2) = (ra(2.0 / 3.0), ra(1.0 / 3.0));
        assert_eq!(pareto_indemnity_parametric(ra(0.7), ra(0.5), g1, g2), Cover::Full);
        assert_eq!(pareto_indemnity_parametric(ra(0.3), ra(0.5), g1, g2), Cover::Null);
        assert_eq!(pareto_indemnity_parametric(ra(0.5), ra(0.5), g1, g2), Cover::Full);
        assert_eq!(pareto_indemnity_parametric(ra(0.2), ra(0.2), g1, g2), Cover::Null);
        assert_eq!(pareto_indemnity_parametric(ra(0.9), ra(0.9), g1, g2), Cover::Null);
        // [γ₂, γ₁] is empty when γ₁ < γ₂
        assert_eq!(pareto_indemnity_parametric(ra(0.5), ra(0.5), g2, g1), Cover::Null);
    }

    #[test]
    fn contract_premium_sign() {
        let i = null_cover(&exp1()).unwrap();
        assert!(Contract::new(i.clone(), -0.1).is_err());
        assert!(Contract::new(i, 0.0).is_ok());
    }

    #[test]
    fn general_solver_same_family() {
        let x = exp1();
        let fam = DistortionFamily::mean_cvar(0.99).unwrap();
        let grid = Indemnity::quantile_grid(&x, 64).unwrap();
        let hi = RiskMeasure::new(fam.clone(), ra(0.7));
        let lo = RiskMeasure::new(fam.clone(), ra(0.3));
        let sol = pareto_indemnity_general(&x, &hi, &lo, &grid).unwrap();
        assert!(sol.indemnity.is_full());
        assert!((sol.objective - (1.0 + 0.3 * 100f64.ln())).abs() < 1e-9);
        let sol = pareto_indemnity_general(&x, &lo, &hi, &grid).unwrap();
        assert!(sol.indemnity.is_null());
        assert!((sol.objective - (1.0 + 0.3 * 100f64.ln())).abs() < 1e-9);
        // equal measures tie on every cell and cede everything
        let sol = pareto_indemnity_general(&x, &lo, &lo, &grid).unwrap();
        assert!(sol.indemnity.is_full());
    }
}
