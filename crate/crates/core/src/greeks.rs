//! Analytic call deltas, each tagged with the co-movement assumption it was
//! derived under, plus the strike-from-delta inverse for the uniform family.
//!
//! Delta is ∂(call)/∂S₀ and depends on *which* distribution parameters move
//! with spot. Each operation documents its convention and stamps the result
//! with an assumption tag, so an untagged delta can never escape:
//!
//! - gamma, constant κ: θ moves as S₀e^{(r−q)T}/κ — closed form;
//! - gamma, constant variance κθ²: both κ and θ move — numeric central
//!   difference of the variance-parameterized price, step 1e-5·S₀;
//! - Student-t: μ moves as S₀e^{(r−q)T} — closed form;
//! - uniform: a fixed, b moves as 2S₀e^{(r−q)T} − a — closed form;
//! - lognormal (BSM) and normal (Bachelier): the standard e^{−qT}N(d) forms.
//!
//! All of the parameterized co-movements presume a forward-calibrated spec;
//! a spec whose mean strays from S₀e^{(r−q)T} by more than 1e-6 relative is
//! rejected.

use serde::{Deserialize, Serialize};

use crate::dists::{Gamma, MarketParams, StudentT, Uniform};
use crate::error::{ensure_finite, Error, Result};
use crate::pricer;
use crate::specfun::{reg_inc_beta, reg_inc_gamma, std_normal_cdf};

/// Central-difference step for the numeric const-variance delta, ×S₀.
const FD_STEP_REL: f64 = 1e-5;
/// Calibration slack tolerated by the parameterized co-movements.
const CALIBRATION_SLACK: f64 = 1e-6;
/// Slack on the delta range invariant [0, e^{−qT}].
const RANGE_SLACK: f64 = 1e-9;

/// Which parameters were held fixed while spot moved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaAssumption {
    /// Gamma shape κ constant, scale θ tracks spot.
    ConstKappa,
    /// Gamma variance κθ² constant, both parameters track spot.
    ConstVariance,
    /// The co-movement is exact for the family (no alternative convention).
    Exact,
}

impl std::fmt::Display for DeltaAssumption {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DeltaAssumption::ConstKappa => "const_kappa",
            DeltaAssumption::ConstVariance => "const_variance",
            DeltaAssumption::Exact => "exact",
        };
        write!(f, "{s}")
    }
}

/// A call delta plus the assumption it was computed under. Construction
/// enforces the call-delta range [0, e^{−qT}] to 1e-9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaResult {
    pub delta: f64,
    pub assumption: DeltaAssumption,
}

impl DeltaResult {
    fn new(delta: f64, assumption: DeltaAssumption, market: &MarketParams) -> Result<Self> {
        ensure_finite(delta, "delta")?;
        let cap = market.foreign_discount_factor();
        if !(-RANGE_SLACK..=cap + RANGE_SLACK).contains(&delta) {
            return Err(Error::invalid(format!(
                "call delta {delta} is outside [0, {cap}]"
            )));
        }
        Ok(DeltaResult { delta, assumption })
    }
}

fn require_calibrated(mean: f64, market: &MarketParams, family: &str) -> Result<()> {
    let fwd = market.forward();
    if ((mean - fwd) / fwd).abs() > CALIBRATION_SLACK {
        return Err(Error::calibration(format!(
            "{family} delta needs a forward-calibrated spec: mean {mean} vs forward {fwd}"
        )));
    }
    Ok(())
}

/// BSM call delta e^{−qT}·N(d₁).
pub fn bsm_delta(market: &MarketParams, strike: f64, vol: f64) -> Result<DeltaResult> {
    let (d1, _) = pricer::bsm_d1_d2(market, strike, vol)?;
    DeltaResult::new(
        market.foreign_discount_factor() * std_normal_cdf(d1)?.value(),
        DeltaAssumption::Exact,
        market,
    )
}

/// Bachelier call delta e^{−qT}·N((F−K)/(σ_N√T)); `vol_n` is annualized.
pub fn bachelier_delta(market: &MarketParams, strike: f64, vol_n: f64) -> Result<DeltaResult> {
    ensure_finite(strike, "strike")?;
    let stdev = vol_n * market.expiry().sqrt();
    if stdev <= 0.0 || !stdev.is_finite() {
        return Err(Error::invalid(format!(
            "vol_n must be positive, got {vol_n}"
        )));
    }
    let d = (market.forward() - strike) / stdev;
    DeltaResult::new(
        market.foreign_discount_factor() * std_normal_cdf(d)?.value(),
        DeltaAssumption::Exact,
        market,
    )
}

/// Gamma delta with κ constant (θ = S₀e^{(r−q)T}/κ moving with spot):
/// e^{−qT}·{1 − K·P(K;κ,θ)/θ − (κ+1)·P(K;κ+2,θ) + P(K;κ+1,θ)·[K/θ + κ]}.
pub fn gamma_delta_const_kappa(
    market: &MarketParams,
    strike: f64,
    spec: &Gamma,
) -> Result<DeltaResult> {
    ensure_finite(strike, "strike")?;
    require_calibrated(spec.mean(), market, "gamma")?;
    let dq = market.foreign_discount_factor();
    if strike <= 0.0 {
        return DeltaResult::new(dq, DeltaAssumption::ConstKappa, market);
    }
    let kappa = spec.kappa();
    let theta = spec.theta();
    let x = strike / theta;
    let p_k = reg_inc_gamma(kappa, x)?.value();
    let p_k1 = reg_inc_gamma(kappa + 1.0, x)?.value();
    let p_k2 = reg_inc_gamma(kappa + 2.0, x)?.value();
    let bracket =
        1.0 - strike * p_k / theta - (kappa + 1.0) * p_k2 + p_k1 * (strike / theta + kappa);
    DeltaResult::new(dq * bracket, DeltaAssumption::ConstKappa, market)
}

/// Gamma delta with the variance κθ² held constant. No closed form exists
/// for this co-movement; the delta is the central finite difference (step
/// 1e-5·S₀) of the call price reparameterized as
/// κ(S₀) = S₀²e^{2(r−q)T}/σ²_dist, θ(S₀) = σ²_dist/(S₀e^{(r−q)T}).
pub fn gamma_delta_const_variance(
    market: &MarketParams,
    strike: f64,
    spec: &Gamma,
) -> Result<DeltaResult> {
    ensure_finite(strike, "strike")?;
    require_calibrated(spec.mean(), market, "gamma")?;
    let dist_variance = spec.variance();
    let h = FD_STEP_REL * market.spot();
    let delta = crate::oracle::fd_derivative(
        |s0| gamma_call_const_variance(market, strike, s0, dist_variance),
        market.spot(),
        h,
        crate::oracle::DiffOrder::First,
    )?;
    DeltaResult::new(delta, DeltaAssumption::ConstVariance, market)
}

/// Call price as a function of spot with the gamma variance held fixed.
fn gamma_call_const_variance(
    market: &MarketParams,
    strike: f64,
    spot: f64,
    dist_variance: f64,
) -> Result<f64> {
    let carry = ((market.domestic_rate() - market.foreign_rate()) * market.expiry()).exp();
    let fwd = spot * carry;
    let spec = Gamma::new(fwd * fwd / dist_variance, dist_variance / fwd)?;
    pricer::gamma_call(&market.with_spot(spot)?, strike, &spec)
}

/// Student-t delta (μ = S₀e^{(r−q)T} moving with spot):
/// −e^{−qT}·(μ−K)·p(K) + e^{−qT}/2·B, with B = I_{y(K)}(ν/2, ½) − 2|μ−K|p(K)
/// for K ≥ μ and 2 − B′ for K < μ; the branches meet at e^{−qT}/2 when
/// K = μ.
pub fn student_delta(market: &MarketParams, strike: f64, spec: &StudentT) -> Result<DeltaResult> {
    ensure_finite(strike, "strike")?;
    require_calibrated(spec.mean(), market, "student_t")?;
    let dq = market.foreign_discount_factor();
    let mu = spec.mu();
    let z = mu - strike;
    let density = spec.density(strike);
    let iy = reg_inc_beta(spec.beta_argument(strike), 0.5 * spec.nu(), 0.5)?.value();
    let bracket = iy - 2.0 * z.abs() * density;
    let branch = if strike >= mu { bracket } else { 2.0 - bracket };
    DeltaResult::new(
        -dq * z * density + 0.5 * dq * branch,
        DeltaAssumption::Exact,
        market,
    )
}

/// Uniform delta (a fixed, b = 2S₀e^{(r−q)T} − a moving with spot):
/// e^{−qT}·[1 − (max(K,a) − a)²/(b − a)²] for K < b, 0 for K ≥ b.
pub fn uniform_delta(market: &MarketParams, strike: f64, spec: &Uniform) -> Result<DeltaResult> {
    ensure_finite(strike, "strike")?;
    require_calibrated(spec.mean(), market, "uniform")?;
    let dq = market.foreign_discount_factor();
    let (a, b) = (spec.a(), spec.b());
    let delta = if strike >= b {
        0.0
    } else {
        let clipped = strike.max(a) - a;
        let width = b - a;
        dq * (1.0 - clipped * clipped / (width * width))
    };
    DeltaResult::new(delta, DeltaAssumption::Exact, market)
}

/// Invert the uniform delta on its interior branch:
/// K = a + (b−a)·√(1 − Δ·e^{qT}), valid for 0 < Δ·e^{qT} < 1 strictly.
pub fn uniform_strike_from_delta(delta: f64, market: &MarketParams, spec: &Uniform) -> Result<f64> {
    ensure_finite(delta, "delta")?;
    let x = delta / market.foreign_discount_factor();
    if x <= 0.0 {
        return Err(Error::invalid(format!(
            "delta·e^(qT) = {x} is at/below the interior lower bound 0 (strike would be b)"
        )));
    }
    if x >= 1.0 {
        return Err(Error::invalid(format!(
            "delta·e^(qT) = {x} is at/above the interior upper bound 1 (strike would be a)"
        )));
    }
    Ok(spec.a() + (spec.b() - spec.a()) * (1.0 - x).sqrt())
}
