//! The insurer's portfolio loss `X`.
//!
//! A [`LossDistribution`] exposes the survival function, the left-continuous
//! quantile function and the mean. Unbounded analytic laws are truncated at
//! `support_upper`, the quantile at level `1 - TAIL_TOLERANCE`; every
//! integral in the crate runs over `[0, support_upper]`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::quadrature;

/// Survival probability left beyond the truncation bound of unbounded laws.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Relative tolerance between the truncated integral of the survival
/// function and the exact mean before [`LossDistribution::mean`] gives up.
pub const MEAN_REL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum LossKind {
    Exponential { rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
    Empirical(EmpiricalLaw),
}

/// Discrete law on finitely many non-negative atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalLaw {
    /// Distinct atoms, strictly increasing.
    values: Arc<[f64]>,
    /// `cdf[k] = P(X <= values[k])`.
    cdf: Arc<[f64]>,
    /// `above[k] = P(X > values[k])`, accumulated from the right so small
    /// tail probabilities keep full precision.
    above: Arc<[f64]>,
}

impl EmpiricalLaw {
    pub fn atoms(&self) -> &[f64] {
        &self.values
    }

    /// Survival just to the right of each atom.
    pub fn survival_after(&self) -> &[f64] {
        &self.above
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.cdf
            .iter()
            .scan(0.0, |prev, &c| {
                let p = c - *prev;
                *prev = c;
                Some(p)
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossDistribution {
    kind: LossKind,
    support_upper: f64,
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

impl LossDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::invalid("exponential law", format!("rate must be positive, got {rate}")));
        }
        Self::analytic(LossKind::Exponential { rate })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(
                "lognormal law",
                format!("need finite mu and sigma > 0, got ({mu}, {sigma})"),
            ));
        }
        Self::analytic(LossKind::LogNormal { mu, sigma })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && b > a) {
            return Err(Error::invalid(
                "uniform law",
                format!("need 0 <= a < b, got ({a}, {b})"),
            ));
        }
        Self::analytic(LossKind::Uniform { a, b })
    }

    /// Empirical law from samples and optional weights. Weights are
    /// normalised to sum to one; repeated samples are merged.
    pub fn empirical(samples: &[f64], weights: Option<&[f64]>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empirical law", "no samples"));
        }
        if let Some(w) = weights {
            if w.len() != samples.len() {
                return Err(Error::invalid(
                    "empirical law",
                    format!("{} samples but {} weights", samples.len(), w.len()),
                ));
            }
        }
        let mut pairs = Vec::with_capacity(samples.len());
        for (i, &x) in samples.iter().enumerate() {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::invalid(
                    "empirical law",
                    format!("sample {i} is {x}; losses must be finite and non-negative"),
                ));
            }
            let w = weights.map_or(1.0, |w| w[i]);
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invalid("empirical law", format!("weight {i} is {w}")));
            }
            pairs.push((x, w));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if total <= 0.0 {
            return Err(Error::invalid("empirical law", "weights sum to zero"));
        }

        let mut values: Vec<f64> = Vec::new();
        let mut mass: Vec<f64> = Vec::new();
        for (x, w) in pairs {
            if w == 0.0 {
                continue;
            }
            match values.last() {
                Some(&last) if last == x => *mass.last_mut().unwrap() += w,
                _ => {
                    values.push(x);
                    mass.push(w);
                }
            }
        }
        let mut cdf = Vec::with_capacity(mass.len());
        let mut acc = 0.0;
        for m in &mass {
            acc += m;
            cdf.push(acc / total);
        }
        let mut above = vec![0.0; mass.len()];
        let mut acc = 0.0;
        for k in (0..mass.len()).rev() {
            above[k] = acc / total;
            acc += mass[k];
        }
        *cdf.last_mut().unwrap() = 1.0;

        let support_upper = *values.last().unwrap();
        let dist = LossDistribution {
            kind: LossKind::Empirical(EmpiricalLaw {
                values: values.into(),
                cdf: cdf.into(),
                above: above.into(),
            }),
            support_upper,
        };
        dist.check_not_constant()?;
        Ok(dist)
    }

    /// Read an empirical law from a CSV file: one loss per line, optionally
    /// followed by a weight column.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let mut samples = Vec::new();
        let mut weights = Vec::new();
        let mut weighted = None;
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let field = |i: usize| -> Result<f64> {
                record[i].parse::<f64>().map_err(|_| {
                    Error::parse(
                        format!("{}:{}", path.display(), line + 1),
                        format!("`{}` is not a number", &record[i]),
                    )
                })
            };
            let has_weight = match record.len() {
                1 => false,
                2 => true,
                n => {
                    return Err(Error::parse(
                        format!("{}:{}", path.display(), line + 1),
                        format!("expected 1 or 2 columns, found {n}"),
                    ))
                }
            };
            if *weighted.get_or_insert(has_weight) != has_weight {
                return Err(Error::parse(
                    format!("{}:{}", path.display(), line + 1),
                    "weight column must be present on every line or on none",
                ));
            }
            samples.push(field(0)?);
            if has_weight {
                weights.push(field(1)?);
            }
        }
        let weights = (weighted == Some(true)).then_some(weights.as_slice());
        Self::empirical(&samples, weights)
    }

    /// Parse `exp(rate)`, `lognormal(mu,sigma)`, `uniform(a,b)` or
    /// `empirical(path)`. Relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let (name, args) = split_call(text).ok_or_else(|| {
            Error::parse("distribution", format!("expected `name(args)`, got `{text}`"))
        })?;
        match name {
            "exp" => {
                let [rate] = numbers::<1>("distribution", args)?;
                Self::exponential(rate)
            }
            "lognormal" => {
                let [mu, sigma] = numbers::<2>("distribution", args)?;
                Self::lognormal(mu, sigma)
            }
            "uniform" => {
                let [a, b] = numbers::<2>("distribution", args)?;
                Self::uniform(a, b)
            }
            "empirical" => {
                let rel = Path::new(args.trim());
                let path = match base_dir {
                    Some(dir) if rel.is_relative() => dir.join(rel),
                    _ => rel.to_path_buf(),
                };
                Self::from_csv(&path)
            }
            other => Err(Error::parse(
                "distribution",
                format!("unknown law `{other}` (expected exp, lognormal, uniform, empirical)"),
            )),
        }
    }

    fn analytic(kind: LossKind) -> Result<Self> {
        let mut dist = LossDistribution {
            kind,
            support_upper: f64::NAN,
        };
        dist.support_upper = match dist.kind {
            LossKind::Uniform { b, .. } => b,
            _ => dist.quantile(1.0 - TAIL_TOLERANCE)?,
        };
        dist.check_not_constant()?;
        Ok(dist)
    }

    fn check_not_constant(&self) -> Result<()> {
        if self.quantile(0.01)? < self.quantile(0.99)? {
            Ok(())
        } else {
            Err(Error::invalid(
                "loss distribution",
                "X is (almost surely) constant: quantile(0.01) == quantile(0.99)",
            ))
        }
    }

    pub fn kind(&self) -> &LossKind {
        &self.kind
    }

    /// Finite bound used for every integral over the loss axis.
    pub fn support_upper(&self) -> f64 {
        self.support_upper
    }

    pub fn is_empirical(&self) -> bool {
        matches!(self.kind, LossKind::Empirical(_))
    }

    /// `P(X > z)`.
    pub fn survival(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 1.0;
        }
        match &self.kind {
            LossKind::Exponential { rate } => (-rate * z).exp(),
            LossKind::LogNormal { mu, sigma } => {
                if z == 0.0 {
                    1.0
                } else {
                    standard_normal().sf((z.ln() - mu) / sigma)
                }
            }
            LossKind::Uniform { a, b } => ((b - z) / (b - a)).clamp(0.0, 1.0),
            LossKind::Empirical(law) => {
                let idx = law.values.partition_point(|&v| v <= z);
                if idx == 0 {
                    1.0
                } else {
                    law.above[idx - 1]
                }
            }
        }
    }

    /// Left-continuous generalised inverse of the CDF, `p` in `[0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain {
                what: "quantile level",
                value: p,
                domain: "[0, 1)",
            });
        }
        Ok(match &self.kind {
            LossKind::Exponential { rate } => -(-p).ln_1p() / rate,
            LossKind::LogNormal { mu, sigma } => {
                if p == 0.0 {
                    0.0
                } else {
                    (mu + sigma * standard_normal().inverse_cdf(p)).exp()
                }
            }
            LossKind::Uniform { a, b } => a + p * (b - a),
            LossKind::Empirical(law) => {
                let k = law.cdf.partition_point(|&c| c < p);
                law.values[k.min(law.values.len() - 1)]
            }
        })
    }

    /// Points in `(0, support_upper)` where the survival function is not
    /// smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            LossKind::Uniform { a, .. } if *a > 0.0 => vec![*a],
            LossKind::Empirical(law) => law.values.to_vec(),
            _ => Vec::new(),
        }
    }

    /// Exact expectation of the untruncated law.
    pub fn exact_mean(&self) -> f64 {
        match &self.kind {
            LossKind::Exponential { rate } => 1.0 / rate,
            LossKind::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            LossKind::Uniform { a, b } => 0.5 * (a + b),
            LossKind::Empirical(law) => law
                .values
                .iter()
                .zip(law.probabilities())
                .map(|(x, p)| x * p)
                .sum(),
        }
    }

    /// `E[X] = ∫ S(z) dz` over `[0, support_upper]`. Fails when the
    /// truncated tail carries more than `MEAN_REL_TOL` of the mean.
    pub fn mean(&self) -> Result<f64> {
        if self.is_empirical() {
            return Ok(self.exact_mean());
        }
        let integral = quadrature::integrate(
            |z| self.survival(z),
            0.0,
            self.support_upper,
            &self.breakpoints(),
        )?;
        let exact = self.exact_mean();
        let gap = (integral - exact).abs();
        if gap > MEAN_REL_TOL * exact.abs().max(1.0) {
            return Err(Error::Accuracy {
                achieved: gap,
                requested: MEAN_REL_TOL * exact.abs().max(1.0),
            });
        }
        Ok(integral)
    }
}

impl fmt::Display for LossDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LossKind::Exponential { rate } => write!(f, "exp({rate})"),
            LossKind::LogNormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
            LossKind::Uniform { a, b } => write!(f, "uniform({a},{b})"),
            LossKind::Empirical(law) => write!(f, "empirical({} atoms)", law.values.len()),
        }
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::parse(path.display().to_string(), e.to_string())
    }
}

/// Split `name(args)` into its parts.
pub(crate) fn split_call(text: &str) -> Option<(&str, &str)> {
    let text = text.trim();
    let open = text.find('(')?;
    let inner = text.strip_suffix(')')?;
    let name = text[..open].trim();
    if name.is_empty() {
        return None;
    }
    Some((name, &inner[open + 1..]))
}

pub(crate) fn numbers<const N: usize>(field: &str, args: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    if parts.len() != N || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::parse(
            field,
            format!("expected {N} numeric argument(s), got `{args}`"),
        ));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| Error::parse(field, format!("`{p}` is not a number")))?;
    }
    Ok(out)
}
