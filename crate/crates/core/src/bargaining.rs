//! Asymmetric Nash bargaining over the premium, and the welfare gains it
//! induces once agents have submitted risk-aversion levels `(ζ₁, ζ₂)`.
//!
//! The insurer (agent 1) holds `X`; the reinsurer (agent 2) holds nothing.
//! The submitted levels fix the Pareto-optimal cover and the premium; the
//! resulting positions are then judged with the *true* levels `(γ₁, γ₂)`.

use crate::contract::{pareto_indemnity_parametric, Cover, Indemnity};
use crate::distributions::LossDistribution;
use crate::error::{Error, Result};
use crate::riskmeasure::{rho, DistortionFamily, PayoutSlice, RiskAversion, RiskMeasure};
use crate::roots::golden_max;

/// Everything that defines one bargaining game.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    pub family: DistortionFamily,
    pub dist: LossDistribution,
    /// Insurer's true risk aversion.
    pub gamma1: RiskAversion,
    /// Reinsurer's true risk aversion.
    pub gamma2: RiskAversion,
    /// Reinsurer's bargaining power, strictly inside `(0, 1)`.
    pub delta: f64,
}

impl GameSpec {
    pub fn new(
        family: DistortionFamily,
        dist: LossDistribution,
        gamma1: RiskAversion,
        gamma2: RiskAversion,
        delta: f64,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain {
                what: "bargaining power",
                value: delta,
                domain: "(0, 1)",
            });
        }
        Ok(GameSpec {
            family,
            dist,
            gamma1,
            gamma2,
            delta,
        })
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        GameSpec::new(self.family.clone(), self.dist.clone(), self.gamma1, self.gamma2, delta)
    }

    /// `ρ(X; γ)`.
    pub fn rho_whole(&self, gamma: RiskAversion) -> Result<f64> {
        rho(&self.family, &self.dist, PayoutSlice::whole(), gamma)
    }

    pub fn measure(&self, gamma: RiskAversion) -> RiskMeasure {
        RiskMeasure::new(self.family.clone(), gamma)
    }

    pub fn cover(&self, zeta1: RiskAversion, zeta2: RiskAversion) -> Cover {
        pareto_indemnity_parametric(zeta1, zeta2, self.gamma1, self.gamma2)
    }

    /// True when trade can create value at all, i.e. `γ₁ > γ₂`.
    pub fn gains_possible(&self) -> bool {
        self.gamma1 > self.gamma2
    }
}

/// Outcome of bargaining at one submitted pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WelfareReport {
    pub cover: Cover,
    pub premium: f64,
    /// Gains before the acceptance step.
    pub wg1_hat: f64,
    pub wg2_hat: f64,
    /// Gains after both agents accept or reject.
    pub wg1: f64,
    pub wg2: f64,
    /// `ρ(Y₁; γ₁)` with `Y₁ = X - I(X) + π`.
    pub posterior_rho1: f64,
    /// `ρ(Y₂; γ₂)` with `Y₂ = I(X) - π`.
    pub posterior_rho2: f64,
}

impl WelfareReport {
    pub const CSV_HEADER: &'static str =
        "cover,premium,wg1_hat,wg2_hat,wg1,wg2,posterior_rho1,posterior_rho2";

    pub fn accepted(&self) -> bool {
        self.cover == Cover::Full && self.wg1_hat >= 0.0 && self.wg2_hat >= 0.0
    }

    pub fn to_csv_row(&self) -> String {
        let cover = match self.cover {
            Cover::Full => "full",
            Cover::Null => "null",
        };
        format!(
            "{cover},{},{},{},{},{},{},{}",
            self.premium,
            self.wg1_hat,
            self.wg2_hat,
            self.wg1,
            self.wg2,
            self.posterior_rho1,
            self.posterior_rho2
        )
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let parts: Vec<&str> = row.trim().split(',').collect();
        if parts.len() != 8 {
            return Err(Error::parse("welfare row", format!("expected 8 fields, got {}", parts.len())));
        }
        let cover = match parts[0] {
            "full" => Cover::Full,
            "null" => Cover::Null,
            other => return Err(Error::parse("welfare row", format!("unknown cover `{other}`"))),
        };
        let mut nums = [0.0; 7];
        for (slot, text) in nums.iter_mut().zip(&parts[1..]) {
            *slot = text
                .parse()
                .map_err(|_| Error::parse("welfare row", format!("`{text}` is not a number")))?;
        }
        let [premium, wg1_hat, wg2_hat, wg1, wg2, posterior_rho1, posterior_rho2] = nums;
        Ok(WelfareReport {
            cover,
            premium,
            wg1_hat,
            wg2_hat,
            wg1,
            wg2,
            posterior_rho1,
            posterior_rho2,
        })
    }
}

/// `ρ(X; ·)` at the four levels a welfare evaluation needs.
#[derive(Clone, Copy, Debug)]
pub(crate) struct WholeRisks {
    pub true1: f64,
    pub true2: f64,
    pub submitted1: f64,
    pub submitted2: f64,
}

/// Premium of the selected cover. With full cover and equal submissions the
/// two bracket terms coincide and the premium is `ρ(X; ζ)` exactly.
pub(crate) fn premium_for_cover(cover: Cover, same_level: bool, delta: f64, risks: &WholeRisks) -> f64 {
    match cover {
        Cover::Null => 0.0,
        Cover::Full if same_level => risks.submitted1,
        Cover::Full => delta * risks.submitted1 + (1.0 - delta) * risks.submitted2,
    }
}

pub(crate) fn welfare_from_risks(cover: Cover, same_level: bool, delta: f64, risks: &WholeRisks) -> WelfareReport {
    let premium = premium_for_cover(cover, same_level, delta, risks);
    debug_assert!(premium >= 0.0, "negative premium {premium}");
    let (posterior_rho1, posterior_rho2) = match cover {
        // Y₁ = π (nothing retained), Y₂ = X - π
        Cover::Full => (premium, risks.true2 - premium),
        Cover::Null => (risks.true1, 0.0),
    };
    let wg1_hat = risks.true1 - posterior_rho1;
    // `0.0 - x` rather than `-x` so a zero gain is never printed as -0
    let wg2_hat = 0.0 - posterior_rho2;
    let accepted = wg1_hat >= 0.0 && wg2_hat >= 0.0;
    WelfareReport {
        cover,
        premium,
        wg1_hat,
        wg2_hat,
        wg1: if accepted { wg1_hat } else { 0.0 },
        wg2: if accepted { wg2_hat } else { 0.0 },
        posterior_rho1,
        posterior_rho2,
    }
}

/// `π = δ [ρ(X; ζ₁) - ρ(X - I(X); ζ₁)] + (1-δ) ρ(I(X); ζ₂)`, zero for the
/// null indemnity.
pub fn nash_premium(spec: &GameSpec, zeta1: RiskAversion, zeta2: RiskAversion, indemnity: &Indemnity) -> Result<f64> {
    if indemnity.is_null() {
        return Ok(0.0);
    }
    let whole = spec.rho_whole(zeta1)?;
    let kept = rho(&spec.family, &spec.dist, PayoutSlice::retained(indemnity), zeta1)?;
    let ceded = rho(&spec.family, &spec.dist, PayoutSlice::ceded(indemnity), zeta2)?;
    Ok(spec.delta * (whole - kept) + (1.0 - spec.delta) * ceded)
}

/// Welfare gains at the submitted pair `(ζ₁, ζ₂)`.
pub fn welfare(spec: &GameSpec, zeta1: RiskAversion, zeta2: RiskAversion) -> Result<WelfareReport> {
    let cover = spec.cover(zeta1, zeta2);
    let risks = match cover {
        Cover::Null => WholeRisks {
            true1: spec.rho_whole(spec.gamma1)?,
            true2: spec.rho_whole(spec.gamma2)?,
            submitted1: 0.0,
            submitted2: 0.0,
        },
        Cover::Full => WholeRisks {
            true1: spec.rho_whole(spec.gamma1)?,
            true2: spec.rho_whole(spec.gamma2)?,
            submitted1: spec.rho_whole(zeta1)?,
            submitted2: spec.rho_whole(zeta2)?,
        },
    };
    Ok(welfare_from_risks(cover, zeta1 == zeta2, spec.delta, &risks))
}

/// `ρ(X; γ₁) - ρ(X - I*(X); γ₁) - ρ(I*(X); γ₂)` with `I*` selected at
/// `(ζ₁, ζ₂)`. Depends on the submissions only through the cover.
pub fn total_welfare(spec: &GameSpec, zeta1: RiskAversion, zeta2: RiskAversion) -> Result<f64> {
    match spec.cover(zeta1, zeta2) {
        Cover::Null => Ok(0.0),
        Cover::Full => Ok(spec.rho_whole(spec.gamma1)? - spec.rho_whole(spec.gamma2)?),
    }
}

/// Gains when both agents submit their true levels: the surplus split
/// `(1-δ, δ)` when `γ₁ ≥ γ₂`, nothing otherwise.
pub fn optimal_gains_nonstrategic(spec: &GameSpec) -> Result<(f64, f64)> {
    if spec.gamma1 < spec.gamma2 {
        return Ok((0.0, 0.0));
    }
    let surplus = spec.rho_whole(spec.gamma1)? - spec.rho_whole(spec.gamma2)?;
    Ok(((1.0 - spec.delta) * surplus, spec.delta * surplus))
}

/// Maximise `(ρ₁(X) - ρ₁(X - I(X) + π))^{1-δ} (-ρ₂(I(X) - π))^δ` over the
/// premium for a fixed indemnity: golden-section search, then a bisection on
/// the sign of the local increment.
///
/// Cash invariance turns both factors into affine functions of `π`, so the
/// product is positive exactly between the reinsurer's indifference premium
/// `ρ₂(I(X))` and the insurer's `ρ₁(X) - ρ₁(X - I(X))`.
pub fn maximise_nash_product(
    dist: &LossDistribution,
    insurer: &RiskMeasure,
    reinsurer: &RiskMeasure,
    indemnity: &Indemnity,
    delta: f64,
) -> Result<f64> {
    let whole = insurer.evaluate(dist, PayoutSlice::whole())?;
    let kept = insurer.evaluate(dist, PayoutSlice::retained(indemnity))?;
    let ceded = reinsurer.evaluate(dist, PayoutSlice::ceded(indemnity))?;
    let floor = ceded;
    let ceiling = whole - kept;
    let gain = ceiling - floor;
    // Below this the two quadratures cannot be told apart.
    if !(gain > 1e-9 * whole.abs().max(1.0)) {
        return Err(Error::OracleInapplicable { gain });
    }
    let log_product = |premium: f64| -> Result<f64> {
        let insurer_gain = whole - (kept + premium);
        let reinsurer_gain = -(ceded - premium);
        if insurer_gain <= 0.0 || reinsurer_gain <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok((1.0 - delta) * insurer_gain.ln() + delta * reinsurer_gain.ln())
    };
    let rough = golden_max(log_product, floor, ceiling, 1e-13 * ceiling.abs().max(1.0))?;

    // Comparing values cannot place the maximiser closer than about
    // sqrt(eps) of the bracket. Polish with the sign of the log-product
    // increment over [π - h, π + h], written so that nothing cancels.
    let t0 = ((rough - floor) / gain).clamp(0.0, 1.0);
    let (mut lo, mut hi) = ((t0 - 1e-6).max(0.0), (t0 + 1e-6).min(1.0));
    let rising = |t: f64| {
        let h = 1e-12 * t.min(1.0 - t);
        (1.0 - delta) * (-2.0 * h / (1.0 - t + h)).ln_1p() + delta * (2.0 * h / (t - h)).ln_1p() > 0.0
    };
    if lo > 0.0 && !rising(lo) {
        lo = 0.0;
    }
    if hi < 1.0 && rising(hi) {
        hi = 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rising(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(floor + 0.5 * (lo + hi) * gain)
}

/// Direct Nash-product maximisation at the cover selected for `(ζ₁, ζ₂)`.
pub fn bargaining_product_oracle(spec: &GameSpec, zeta1: RiskAversion, zeta2: RiskAversion) -> Result<f64> {
    let indemnity = spec.cover(zeta1, zeta2).indemnity(&spec.dist)?;
    maximise_nash_product(
        &spec.dist,
        &spec.measure(zeta1),
        &spec.measure(zeta2),
        &indemnity,
        spec.delta,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ra(v: f64) -> RiskAversion {
        RiskAversion::new(v).unwrap()
    }

    fn spec(delta: f64) -> GameSpec {
        GameSpec::new(
            DistortionFamily::mean_cvar(0.99).unwrap(),
            LossDistribution::exponential(1.0).unwrap(),
            ra(2.0 / 3.0),
            ra(1.0 / 3.0),
            delta,
        )
        .unwrap()
    }

    #[test]
    fn delta_must_be_open_interval() {
        assert!(spec(0.5).with_delta(1.0).is_err());
        assert!(spec(0.5).with_delta(0.0).is_err());
    }

    #[test]
    fn null_cover_report() {
        let s = spec(0.8);
        let r = welfare(&s, ra(0.3), ra(0.5)).unwrap();
        assert_eq!(r.cover, Cover::Null);
        assert_eq!((r.premium, r.wg1, r.wg2, r.wg1_hat, r.wg2_hat), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.posterior_rho2, 0.0);
        assert!((r.posterior_rho1 - (1.0 + 2.0 / 3.0 * 100f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn ir_gate_zeroes_both() {
        // ζ₁ = 0.95 > Γ₁ = 5/6: insurer would lose, so nothing is traded
        let r = welfare(&spec(0.8), ra(0.95), ra(0.1)).unwrap();
        assert!(r.wg1_hat < 0.0 && r.wg2_hat > 0.0);
        assert_eq!((r.wg1, r.wg2), (0.0, 0.0));
        assert!(!r.accepted());
    }

    #[test]
    fn csv_row_round_trip() {
        let r = welfare(&spec(0.8), ra(0.7), ra(0.5)).unwrap();
        let back = WelfareReport::from_csv_row(&r.to_csv_row()).unwrap();
        assert_eq!(back, r);
        assert_eq!(WelfareReport::CSV_HEADER.split(',').count(), 8);
    }

    #[test]
    fn oracle_rejects_null_cover() {
        assert!(matches!(
            bargaining_product_oracle(&spec(0.8), ra(0.2), ra(0.6)),
            Err(Error::OracleInapplicable { .. })
        ));
    }

    #[test]
    fn nonstrategic_zero_when_reinsurer_more_averse() {
        let s = GameSpec::new(
            DistortionFamily::ProportionalHazard,
            LossDistribution::exponential(1.0).unwrap(),
            ra(0.2),
            ra(0.4),
            0.5,
        )
        .unwrap();
        assert_eq!(optimal_gains_nonstrategic(&s).unwrap(), (0.0, 0.0));
    }
}
