//! Parameterised distortion risk measures `ρ(·; γ)`.
//!
//! For a non-negative payout `Y = h(X)` with `h` non-decreasing and
//! 1-Lipschitz, the Choquet integral reduces to a layer integral over the
//! loss axis,
//!
//! ```text
//! ρ(h(X); γ) = ∫₀^∞ h'(z) · g(S_X(z); γ) dz,
//! ```
//!
//! so the law of `h(X)` is never built. `h'` is 1 for the whole loss, the
//! marginal indemnification `m` for the ceded part and `1 - m` for the
//! retained part. Cash is added afterwards by translation invariance.

use std::fmt;
use std::path::Path;

use crate::contract::Indemnity;
use crate::distributions::{numbers, split_call, LossDistribution, LossKind};
use crate::error::{Error, Result};
use crate::quadrature;

/// Submitted or true risk-aversion level, normalised to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct RiskAversion(f64);

impl RiskAversion {
    pub const ZERO: RiskAversion = RiskAversion(0.0);
    pub const ONE: RiskAversion = RiskAversion(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(RiskAversion(value))
        } else {
            Err(Error::Domain {
                what: "risk aversion",
                value,
                domain: "[0, 1]",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RiskAversion {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        RiskAversion::new(value)
    }
}

impl fmt::Display for RiskAversion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Distortion `g(s; γ)` tabulated on an `(s, γ)` grid and interpolated
/// bilinearly.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionTable {
    s: Vec<f64>,
    gamma: Vec<f64>,
    /// `values[i * gamma.len() + j] = g(s[i]; gamma[j])`.
    values: Vec<f64>,
}

const TABLE_TOL: f64 = 1e-12;

impl DistortionTable {
    /// `rows[i][j]` is `g(s[i]; gamma[j])`.
    pub fn new(s: Vec<f64>, gamma: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let bad = |reason: String| Err(Error::invalid("distortion table", reason));
        if s.len() < 3 {
            return bad("need at least one interior s node besides 0 and 1".into());
        }
        if gamma.len() < 2 {
            return bad("need at least two gamma columns".into());
        }
        for (name, nodes) in [("s", &s), ("gamma", &gamma)] {
            if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
                return bad(format!("{name} nodes must start at 0 and end at 1"));
            }
            if nodes.windows(2).any(|w| !(w[0] < w[1])) {
                return bad(format!("{name} nodes must be strictly increasing"));
            }
        }
        if rows.len() != s.len() || rows.iter().any(|r| r.len() != gamma.len()) {
            return bad(format!("expected a {} x {} table", s.len(), gamma.len()));
        }
        let ng = gamma.len();
        for j in 0..ng {
            if rows[0][j].abs() > TABLE_TOL || (rows[s.len() - 1][j] - 1.0).abs() > TABLE_TOL {
                return bad(format!("g(0) must be 0 and g(1) must be 1 at gamma = {}", gamma[j]));
            }
            for i in 1..s.len() {
                if rows[i][j] < rows[i - 1][j] {
                    return bad(format!(
                        "g(.; {}) decreases between s = {} and s = {}",
                        gamma[j],
                        s[i - 1],
                        s[i]
                    ));
                }
            }
        }
        for i in 1..s.len() - 1 {
            for j in 1..ng {
                if !(rows[i][j] > rows[i][j - 1]) {
                    return bad(format!(
                        "g({}; .) is not strictly increasing between gamma = {} and {}",
                        s[i],
                        gamma[j - 1],
                        gamma[j]
                    ));
                }
            }
        }
        let mut values = Vec::with_capacity(s.len() * ng);
        let last = s.len() - 1;
        for (i, row) in rows.into_iter().enumerate() {
            // pin the boundary rows so g(0) = 0 and g(1) = 1 hold exactly
            values.extend(row.into_iter().map(|v| match i {
                0 => 0.0,
                i if i == last => 1.0,
                _ => v,
            }));
        }
        Ok(DistortionTable { s, gamma, values })
    }

    /// CSV layout: header `s,γ_0,…,γ_n`, then one row `s_i,g(s_i;γ_0),…`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let field = |line: usize| format!("{}:{}", path.display(), line);
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| {
                if e.is_io_error() {
                    match e.into_kind() {
                        csv::ErrorKind::Io(io) => Error::io(path, io),
                        _ => unreachable!(),
                    }
                } else {
                    Error::parse(path.display().to_string(), e.to_string())
                }
            })?;
        let mut records = reader.records();
        let parse_row = |line: usize, rec: &csv::StringRecord| -> Result<Vec<f64>> {
            rec.iter()
                .skip(1)
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(field(line), format!("`{t}` is not a number")))
                })
                .collect()
        };
        let header = records
            .next()
            .ok_or_else(|| Error::parse(field(1), "empty distortion table"))?
            .map_err(|e| Error::parse(field(1), e.to_string()))?;
        let gamma = parse_row(1, &header)?;
        let mut s = Vec::new();
        let mut rows = Vec::new();
        for (k, rec) in records.enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| Error::parse(field(line), e.to_string()))?;
            let lead = rec.get(0).unwrap_or("");
            s.push(
                lead.parse::<f64>()
                    .map_err(|_| Error::parse(field(line), format!("`{lead}` is not a number")))?,
            );
            rows.push(parse_row(line, &rec)?);
        }
        Self::new(s, gamma, rows)
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.gamma.len() + j]
    }

    fn eval(&self, s: f64, gamma: f64) -> f64 {
        let (i, ts) = bracket(&self.s, s);
        let (j, tg) = bracket(&self.gamma, gamma);
        let lo = self.at(i, j) * (1.0 - tg) + self.at(i, j + 1) * tg;
        let hi = self.at(i + 1, j) * (1.0 - tg) + self.at(i + 1, j + 1) * tg;
        lo * (1.0 - ts) + hi * ts
    }
}

/// Cell index and offset of `x` within a sorted node vector.
fn bracket(nodes: &[f64], x: f64) -> (usize, f64) {
    let last = nodes.len() - 2;
    let i = nodes.partition_point(|&n| n <= x).saturating_sub(1).min(last);
    let t = ((x - nodes[i]) / (nodes[i + 1] - nodes[i])).clamp(0.0, 1.0);
    (i, t)
}

/// A one-parameter family of distortion functions, strictly increasing in
/// the parameter on `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub enum DistortionFamily {
    /// `g(s; γ) = (1-γ) s + γ min(s / (1-α), 1)`: expectation blended with
    /// CVaR at level `α`.
    MeanCvarMix { alpha: f64 },
    /// `g(s; γ) = s^(1-γ)`.
    ProportionalHazard,
    Custom(DistortionTable),
}

impl DistortionFamily {
    pub fn mean_cvar(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(DistortionFamily::MeanCvarMix { alpha })
        } else {
            Err(Error::Domain {
                what: "CVaR level",
                value: alpha,
                domain: "(0, 1)",
            })
        }
    }

    /// Parse `mean_cvar(alpha)`, `prop_hazard` or `custom(path)`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let text = text.trim();
        if text == "prop_hazard" || text == "prop_hazard()" {
            return Ok(DistortionFamily::ProportionalHazard);
        }
        let (name, args) = split_call(text).ok_or_else(|| {
            Error::parse(
                "family",
                format!("expected mean_cvar(alpha), prop_hazard or custom(path), got `{text}`"),
            )
        })?;
        match name {
            "mean_cvar" => {
                let [alpha] = numbers::<1>("family", args)?;
                Self::mean_cvar(alpha)
            }
            "custom" => {
                let rel = Path::new(args.trim());
                let path = match base_dir {
                    Some(dir) if rel.is_relative() => dir.join(rel),
                    _ => rel.to_path_buf(),
                };
                Ok(DistortionFamily::Custom(DistortionTable::from_csv(&path)?))
            }
            other => Err(Error::parse("family", format!("unknown family `{other}`"))),
        }
    }

    /// `g(s; γ)` for `s` in `[0, 1]`.
    pub fn distortion(&self, s: f64, gamma: RiskAversion) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let gamma = gamma.value();
        match self {
            DistortionFamily::MeanCvarMix { alpha } => {
                (1.0 - gamma) * s + gamma * (s / (1.0 - alpha)).min(1.0)
            }
            DistortionFamily::ProportionalHazard => {
                if s == 0.0 {
                    0.0
                } else {
                    s.powf(1.0 - gamma)
                }
            }
            DistortionFamily::Custom(table) => table.eval(s, gamma),
        }
    }

    /// Survival levels in `(0, 1)` where `g(·; γ)` has a kink.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            DistortionFamily::MeanCvarMix { alpha } => vec![1.0 - alpha],
            DistortionFamily::ProportionalHazard => Vec::new(),
            DistortionFamily::Custom(table) => table.s[1..table.s.len() - 1].to_vec(),
        }
    }
}

impl fmt::Display for DistortionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistortionFamily::MeanCvarMix { alpha } => write!(f, "mean_cvar({alpha})"),
            DistortionFamily::ProportionalHazard => f.write_str("prop_hazard"),
            DistortionFamily::Custom(t) => {
                write!(f, "custom({}x{} table)", t.s.len(), t.gamma.len())
            }
        }
    }
}

/// Which comonotone piece of the loss is being measured.
#[derive(Clone, Copy, Debug)]
pub enum Layer<'a> {
    /// `X`.
    Whole,
    /// `I(X)`.
    Ceded(&'a Indemnity),
    /// `X - I(X)`.
    Retained(&'a Indemnity),
    /// The zero payout.
    Nothing,
}

/// `layer + cash`.
#[derive(Clone, Copy, Debug)]
pub struct PayoutSlice<'a> {
    pub layer: Layer<'a>,
    pub cash: f64,
}

impl<'a> PayoutSlice<'a> {
    pub fn whole() -> Self {
        PayoutSlice {
            layer: Layer::Whole,
            cash: 0.0,
        }
    }

    pub fn ceded(indemnity: &'a Indemnity) -> Self {
        PayoutSlice {
            layer: Layer::Ceded(indemnity),
            cash: 0.0,
        }
    }

    pub fn retained(indemnity: &'a Indemnity) -> Self {
        PayoutSlice {
            layer: Layer::Retained(indemnity),
            cash: 0.0,
        }
    }

    pub fn cash(amount: f64) -> Self {
        PayoutSlice {
            layer: Layer::Nothing,
            cash: amount,
        }
    }

    pub fn plus_cash(self, amount: f64) -> Self {
        PayoutSlice {
            cash: self.cash + amount,
            ..self
        }
    }

    /// The payout `h(x)` of the layer, without cash.
    pub fn payout(&self, x: f64) -> f64 {
        match self.layer {
            Layer::Whole => x,
            Layer::Ceded(i) => i.evaluate(x),
            Layer::Retained(i) => x - i.evaluate(x),
            Layer::Nothing => 0.0,
        }
    }

    /// Slope of the payout at a loss level inside a grid cell.
    fn slope(&self, z: f64) -> f64 {
        match self.layer {
            Layer::Whole => 1.0,
            Layer::Ceded(i) => i.slope_at(z),
            Layer::Retained(i) => 1.0 - i.slope_at(z),
            Layer::Nothing => 0.0,
        }
    }
}

/// `ρ(Y + c; γ)` for a comonotone slice `Y` of the loss.
pub fn rho(
    family: &DistortionFamily,
    dist: &LossDistribution,
    slice: PayoutSlice<'_>,
    gamma: RiskAversion,
) -> Result<f64> {
    let g = |s: f64| family.distortion(s, gamma);
    let body = match (dist.kind(), slice.layer) {
        (_, Layer::Nothing) => 0.0,
        (LossKind::Empirical(law), _) => {
            // S is constant between atoms, so the layer integral is a finite
            // sum of payout increments weighted by the distorted survival.
            let mut total = 0.0;
            let mut prev_x = 0.0;
            let mut prev_h = slice.payout(0.0);
            let mut s = 1.0;
            for (&x, &after) in law.atoms().iter().zip(law.survival_after()) {
                let h = slice.payout(x);
                if x > prev_x {
                    total += g(s) * (h - prev_h);
                }
                prev_x = x;
                prev_h = h;
                s = after;
            }
            total
        }
        (_, layer) => {
            let upper = dist.support_upper();
            let mut breaks = dist.breakpoints();
            for s in family.kinks() {
                breaks.push(dist.quantile(1.0 - s)?);
            }
            if let Layer::Ceded(i) | Layer::Retained(i) = layer {
                breaks.extend_from_slice(i.grid());
            }
            quadrature::integrate(
                |z| {
                    let w = slice.slope(z);
                    if w == 0.0 {
                        0.0
                    } else {
                        w * g(dist.survival(z))
                    }
                },
                0.0,
                upper,
                &breaks,
            )?
        }
    };
    Ok(body + slice.cash)
}

/// A family member bound to a risk-aversion level.
#[derive(Clone, Debug, PartialEq)]
pub struct RiskMeasure {
    pub family: DistortionFamily,
    pub gamma: RiskAversion,
}

impl RiskMeasure {
    pub fn new(family: DistortionFamily, gamma: RiskAversion) -> Self {
        RiskMeasure { family, gamma }
    }

    pub fn distortion(&self, s: f64) -> f64 {
        self.family.distortion(s, self.gamma)
    }

    pub fn evaluate(&self, dist: &LossDistribution, slice: PayoutSlice<'_>) -> Result<f64> {
        rho(&self.family, dist, slice, self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ra(v: f64) -> RiskAversion {
        RiskAversion::new(v).unwrap()
    }

    fn exp1() -> LossDistribution {
        LossDistribution::exponential(1.0).unwrap()
    }

    #[test]
    fn risk_aversion_range() {
        assert!(RiskAversion::new(1.2).is_err());
        assert!(RiskAversion::new(-0.1).is_err());
        assert!(RiskAversion::new(f64::NAN).is_err());
        assert_eq!(RiskAversion::try_from(0.5).unwrap().value(), 0.5);
    }

    #[test]
    fn mean_cvar_distortion_value() {
        let fam = DistortionFamily::mean_cvar(0.99).unwrap();
        // tabulated by hand: 0.5 * 0.005 + 0.5 * min(0.005 / 0.01, 1)
        assert!((fam.distortion(0.005, ra(0.5)) - 0.2525).abs() < 1e-15);
        assert_eq!(fam.distortion(1.0, ra(0.3)), 1.0);
        assert_eq!(fam.distortion(0.0, ra(0.3)), 0.0);
    }

    #[test]
    fn proportional_hazard_values() {
        let fam = DistortionFamily::ProportionalHazard;
        assert!((fam.distortion(0.25, ra(0.5)) - 0.5).abs() < 1e-15);
        assert_eq!(fam.distortion(1.0, ra(1.0)), 1.0);
        assert_eq!(fam.distortion(0.0, ra(1.0)), 0.0);
        assert_eq!(fam.distortion(0.3, ra(1.0)), 1.0);
    }

    #[test]
    fn cvar_level_domain() {
        assert!(DistortionFamily::mean_cvar(1.0).is_err());
        assert!(DistortionFamily::mean_cvar(0.0).is_err());
    }

    #[test]
    fn rho_of_exponential_is_affine_in_gamma() {
        let fam = DistortionFamily::mean_cvar(0.99).unwrap();
        let x = exp1();
        for gamma in [0.0, 0.25, 0.5, 1.0] {
            let v = rho(&fam, &x, PayoutSlice::whole(), ra(gamma)).unwrap();
            assert!((v - (1.0 + gamma * 100f64.ln())).abs() < 1e-9, "{gamma}: {v}");
        }
    }

    #[test]
    fn cash_only() {
        let fam = DistortionFamily::ProportionalHazard;
        let v = rho(&fam, &exp1(), PayoutSlice::cash(2.5), ra(0.7)).unwrap();
        assert_eq!(v, 2.5);
        let w = rho(&fam, &exp1(), PayoutSlice::whole().plus_cash(-1.0), ra(0.0)).unwrap();
        assert!((w - 0.0).abs() < 1e-9);
    }

    #[test]
    fn proportional_hazard_on_exponential() {
        // ∫ e^{-(1-γ) z} dz = 1 / (1-γ), truncated at the support bound
        let x = exp1();
        let u = x.support_upper();
        for gamma in [0.0, 0.3, 0.6] {
            let v = rho(&DistortionFamily::ProportionalHazard, &x, PayoutSlice::whole(), ra(gamma)).unwrap();
            let exact = (1.0 - (-(1.0 - gamma) * u).exp()) / (1.0 - gamma);
            assert!((v - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn empirical_choquet_sum() {
        let x = LossDistribution::empirical(&[1.0, 2.0, 3.0], None).unwrap();
        let fam = DistortionFamily::ProportionalHazard;
        // g(1)*1 + g(2/3)*1 + g(1/3)*1 with g = sqrt
        let expected = 1.0 + (2.0f64 / 3.0).sqrt() + (1.0f64 / 3.0).sqrt();
        let v = rho(&fam, &x, PayoutSlice::whole(), ra(0.5)).unwrap();
        assert!((v - expected).abs() < 1e-14);
    }

    fn small_table() -> DistortionTable {
        DistortionTable::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 1.0],
            vec![vec![0.0, 0.0], vec![0.5, 0.8], vec![1.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn custom_table_interpolates() {
        let fam = DistortionFamily::Custom(small_table());
        assert!((fam.distortion(0.25, ra(0.5)) - 0.325).abs() < 1e-15);
        assert_eq!(fam.distortion(1.0, ra(0.2)), 1.0);
        assert_eq!(fam.kinks(), vec![0.5]);
    }

    #[test]
    fn custom_table_validation() {
        let no_strict = DistortionTable::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 1.0],
            vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![1.0, 1.0]],
        );
        assert!(no_strict.is_err());
        let decreasing = DistortionTable::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 1.0],
            vec![vec![0.0, 0.0], vec![0.5, 1.2], vec![1.0, 1.0]],
        );
        assert!(decreasing.is_err());
        let bad_ends = DistortionTable::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 1.0],
            vec![vec![0.1, 0.0], vec![0.5, 0.8], vec![1.0, 1.0]],
        );
        assert!(bad_ends.is_err());
        let bad_gamma = DistortionTable::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 0.9],
            vec![vec![0.0, 0.0], vec![0.5, 0.8], vec![1.0, 1.0]],
        );
        assert!(bad_gamma.is_err());
    }

    #[test]
    fn family_grammar() {
        assert_eq!(
            DistortionFamily::parse("mean_cvar(0.99)", None).unwrap(),
            DistortionFamily::MeanCvarMix { alpha: 0.99 }
        );
        assert_eq!(
            DistortionFamily::parse("prop_hazard", None).unwrap(),
            DistortionFamily::ProportionalHazard
        );
        assert!(DistortionFamily::parse("mean_cvar(1.5)", None).is_err());
        assert!(DistortionFamily::parse("wang(0.3)", None).is_err());

        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("g.csv"), "s,0,1\n0,0,0\n0.5,0.5,0.8\n1,1,1\n").unwrap();
        let fam = DistortionFamily::parse("custom(g.csv)", Some(dir.path())).unwrap();
        assert_eq!(fam, DistortionFamily::Custom(small_table()));
    }
}
