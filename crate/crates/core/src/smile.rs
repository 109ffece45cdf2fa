//! Implied-volatility inversion, smile-curve construction over strike grids,
//! and recovery of the implied density/CDF from prices by strike
//! differentiation.
//!
//! Inversion targets are always calls (puts convert through parity first,
//! which preserves the implied vol). The root-finder brackets σ with
//! bisection on [1e-6, 5] — the half-division rule — and hands over to
//! Newton with the analytic vega once the bracket is tighter than 1e-2,
//! stopping at a price residual of 1e-12·S₀.

use serde::{Deserialize, Serialize};

use crate::dists::{DistributionSpec, MarketParams};
use crate::error::{ensure_finite, ensure_positive, BoundSide, Error, Result};
use crate::pricer::{self, forward_mismatch, ForwardMismatch};
use crate::specfun::{std_normal_pdf, Probability};

const VOL_LO: f64 = 1e-6;
const VOL_HI: f64 = 5.0;
/// Bracket width below which bisection hands over to Newton.
const NEWTON_HANDOVER: f64 = 1e-2;
const MAX_ITER: usize = 200;
/// Margin (×S₀) keeping inversion targets strictly inside the price bounds.
const BOUND_MARGIN: f64 = 1e-14;
/// Price residual target (×S₀).
const RESIDUAL_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Strike grids
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    #[default]
    Linear,
    Log,
}

/// An inclusive strike grid with `n` points from `lo` to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StrikeGridRaw")]
pub struct StrikeGrid {
    lo: f64,
    hi: f64,
    n: usize,
    #[serde(default)]
    spacing: GridSpacing,
}

#[derive(Deserialize)]
struct StrikeGridRaw {
    lo: f64,
    hi: f64,
    #[serde(default = "default_grid_points")]
    n: usize,
    #[serde(default)]
    spacing: GridSpacing,
}

fn default_grid_points() -> usize {
    61
}

impl TryFrom<StrikeGridRaw> for StrikeGrid {
    type Error = Error;
    fn try_from(raw: StrikeGridRaw) -> Result<Self> {
        StrikeGrid::new(raw.lo, raw.hi, raw.n, raw.spacing)
    }
}

impl StrikeGrid {
    pub fn new(lo: f64, hi: f64, n: usize, spacing: GridSpacing) -> Result<Self> {
        ensure_positive(lo, "grid lo")?;
        ensure_finite(hi, "grid hi")?;
        if lo >= hi {
            return Err(Error::invalid(format!(
                "strike grid requires lo < hi, got {lo} and {hi}"
            )));
        }
        if n < 2 {
            return Err(Error::invalid(format!("strike grid needs n ≥ 2, got {n}")));
        }
        Ok(StrikeGrid { lo, hi, n, spacing })
    }

    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        StrikeGrid::new(lo, hi, n, GridSpacing::Linear)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Materialize the strictly increasing strikes.
    pub fn strikes(&self) -> Vec<f64> {
        let n = self.n;
        match self.spacing {
            GridSpacing::Linear => {
                let step = (self.hi - self.lo) / (n - 1) as f64;
                (0..n).map(|i| self.lo + step * i as f64).collect()
            }
            GridSpacing::Log => {
                let step = (self.hi / self.lo).ln() / (n - 1) as f64;
                (0..n).map(|i| self.lo * (step * i as f64).exp()).collect()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Implied volatility
// ---------------------------------------------------------------------------

/// Invert a call price to the BSM implied volatility.
///
/// The price must sit strictly inside the no-arbitrage interval
/// (max(e^{−qT}S₀ − e^{−rT}K, 0), e^{−qT}S₀); at or outside a bound there is
/// no solution and the error names the violated side. Inside, the result
/// reproduces the price to 1e-12·S₀.
pub fn implied_vol(price: f64, market: &MarketParams, strike: f64) -> Result<f64> {
    ensure_finite(price, "price")?;
    ensure_positive(strike, "strike")?;

    let spot = market.spot();
    let upper = market.foreign_discount_factor() * spot;
    let lower = (upper - market.discount_factor() * strike).max(0.0);
    let margin = BOUND_MARGIN * spot;
    if price <= lower + margin {
        return Err(Error::NoSolution {
            price,
            bound: lower,
            side: BoundSide::Lower,
        });
    }
    if price >= upper - margin {
        return Err(Error::NoSolution {
            price,
            bound: upper,
            side: BoundSide::Upper,
        });
    }

    let residual_tol = RESIDUAL_TOL * spot;
    let objective =
        |vol: f64| -> Result<f64> { Ok(pricer::bsm_call(market, strike, vol)? - price) };

    let mut lo = VOL_LO;
    let mut hi = VOL_HI;
    let f_lo = objective(lo)?;
    if f_lo > 0.0 {
        // Price below the σ→0⁺ limit yet above intrinsic: no vol in bracket.
        return Err(Error::Convergence {
            message: format!("implied vol below bracket [{VOL_LO}, {VOL_HI}] at strike {strike}"),
            residual: f_lo,
        });
    }
    let f_hi = objective(hi)?;
    if f_hi < 0.0 {
        return Err(Error::Convergence {
            message: format!("implied vol above bracket [{VOL_LO}, {VOL_HI}] at strike {strike}"),
            residual: f_hi,
        });
    }

    let mut vol = 0.5 * (lo + hi);
    let mut residual = objective(vol)?;
    for _ in 0..MAX_ITER {
        let next = if hi - lo > NEWTON_HANDOVER {
            // Half-division phase.
            if residual > 0.0 {
                hi = vol;
            } else {
                lo = vol;
            }
            0.5 * (lo + hi)
        } else {
            // Newton phase with the analytic vega, safeguarded by the bracket.
            // In the wings the vega is tiny and a price residual alone cannot
            // pin the vol, so convergence also requires the step to stall.
            if residual > 0.0 {
                hi = vol;
            } else {
                lo = vol;
            }
            let vega = bsm_vega(market, strike, vol)?;
            let candidate = vol - residual / vega;
            if vega > 0.0 && candidate > lo && candidate < hi {
                candidate
            } else {
                0.5 * (lo + hi)
            }
        };
        let step = (next - vol).abs();
        vol = next;
        residual = objective(vol)?;
        if residual.abs() <= residual_tol && step <= 1e-11 * (1.0 + vol) {
            return Ok(vol);
        }
    }
    if residual.abs() <= residual_tol {
        Ok(vol)
    } else {
        Err(Error::Convergence {
            message: format!("implied vol iteration budget exhausted at strike {strike}"),
            residual,
        })
    }
}

/// BSM vega e^{−qT}·S₀·N′(d₁)·√T.
fn bsm_vega(market: &MarketParams, strike: f64, vol: f64) -> Result<f64> {
    let (d1, _) = pricer::bsm_d1_d2(market, strike, vol)?;
    Ok(market.foreign_discount_factor()
        * market.spot()
        * std_normal_pdf(d1)?
        * market.expiry().sqrt())
}

// ---------------------------------------------------------------------------
// Smile curves
// ---------------------------------------------------------------------------

/// One inverted strike: the vol reproduces `call_price` to within
/// `inversion_residual`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmilePoint {
    pub strike: f64,
    pub implied_vol: f64,
    pub call_price: f64,
    pub put_price: f64,
    pub inversion_residual: f64,
}

/// Why a strike produced no smile point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// Price pinned at the intrinsic floor (strike below the distribution's
    /// lower reach); vol would have to be zero.
    BelowLowerBound,
    /// Price at/above the upper bound, or zero time value on the
    /// out-of-the-money side (strike beyond the distribution's upper reach).
    AboveUpperBound,
    /// The root-finder failed inside the bounds.
    NoConvergence,
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SkipReason::BelowLowerBound => "below_lower_bound",
            SkipReason::AboveUpperBound => "above_upper_bound",
            SkipReason::NoConvergence => "no_convergence",
        };
        write!(f, "{s}")
    }
}

/// A strike dropped from the curve, with its machine-readable reason.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkippedStrike {
    pub strike: f64,
    pub reason: SkipReason,
    pub call_price: f64,
}

/// An implied-volatility smile: inverted points in strictly increasing
/// strike order plus every skipped strike with its reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmileCurve {
    pub market: MarketParams,
    pub points: Vec<SmilePoint>,
    pub skipped: Vec<SkippedStrike>,
    pub source_spec: Option<DistributionSpec>,
    pub warning: Option<ForwardMismatch>,
}

impl SmileCurve {
    pub fn implied_vols(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.implied_vol).collect()
    }

    pub fn strikes(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.strike).collect()
    }

    /// CSV with header `strike,call_price,put_price,implied_vol,residual`,
    /// 17 significant digits, one row per inverted point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strike,call_price,put_price,implied_vol,residual\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                p.strike, p.call_price, p.put_price, p.implied_vol, p.inversion_residual
            ));
        }
        out
    }
}

/// Price every grid strike under `spec` and invert to implied vol.
///
/// Strikes whose prices fall at/outside the no-arbitrage bounds land in the
/// skipped list with a reason, never silently dropped. An entirely skipped
/// grid is an error.
pub fn build_smile(
    spec: &DistributionSpec,
    market: &MarketParams,
    grid: &StrikeGrid,
) -> Result<SmileCurve> {
    let mut points = Vec::with_capacity(grid.len());
    let mut skipped = Vec::new();

    for strike in grid.strikes() {
        let call = pricer::call_price(market, strike, spec)?;
        let put = pricer::put_price(market, strike, spec)?;
        match implied_vol(call, market, strike) {
            Ok(vol) => {
                let reprice = pricer::bsm_call(market, strike, vol)?;
                points.push(SmilePoint {
                    strike,
                    implied_vol: vol,
                    call_price: call,
                    put_price: put,
                    inversion_residual: (reprice - call).abs(),
                });
            }
            Err(err) => skipped.push(SkippedStrike {
                strike,
                reason: classify_skip(&err),
                call_price: call,
            }),
        }
    }

    if points.is_empty() {
        return Err(Error::EmptyCurve {
            skipped: skipped.len(),
        });
    }
    Ok(SmileCurve {
        market: *market,
        points,
        skipped,
        source_spec: Some(spec.clone()),
        warning: forward_mismatch(spec, market),
    })
}

/// Map an inversion failure to its skip reason. A price at a *zero* lower
/// bound has no time value on the OTM side — the strike is beyond the
/// distribution's upper reach — so it reports `above_upper_bound`; a price
/// pinned at a positive intrinsic floor reports `below_lower_bound`.
fn classify_skip(err: &Error) -> SkipReason {
    match err {
        Error::NoSolution {
            side: BoundSide::Upper,
            ..
        } => SkipReason::AboveUpperBound,
        Error::NoSolution {
            side: BoundSide::Lower,
            bound,
            ..
        } => {
            if *bound > 0.0 {
                SkipReason::BelowLowerBound
            } else {
                SkipReason::AboveUpperBound
            }
        }
        _ => SkipReason::NoConvergence,
    }
}

// ---------------------------------------------------------------------------
// Density and CDF recovery
// ---------------------------------------------------------------------------

/// Default differentiation step, 1e-3·max(K, 1).
pub fn default_recovery_step(strike: f64) -> f64 {
    1e-3 * strike.max(1.0)
}

/// Recover the implied density from call prices:
/// p(K) ≈ e^{rT}·[c(K−h) − 2c(K) + c(K+h)]/h².
pub fn recover_density<F>(price_fn: F, market: &MarketParams, strike: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    ensure_positive(h, "h")?;
    let up = price_fn(strike + h)?;
    let mid = price_fn(strike)?;
    let down = price_fn(strike - h)?;
    Ok((up - 2.0 * mid + down) / (h * h) / market.discount_factor())
}

/// Recover the implied CDF from call prices:
/// P(K) ≈ 1 + e^{rT}·[c(K+h) − c(K−h)]/(2h).
pub fn recover_cdf<F>(
    price_fn: F,
    market: &MarketParams,
    strike: f64,
    h: f64,
) -> Result<Probability>
where
    F: Fn(f64) -> Result<f64>,
{
    ensure_positive(h, "h")?;
    let up = price_fn(strike + h)?;
    let down = price_fn(strike - h)?;
    let slope = (up - down) / (2.0 * h) / market.discount_factor();
    let value = 1.0 + slope;
    // Discretization noise up to 1e-6 beyond [0, 1] is tolerated.
    if !(-1e-6..=1.0 + 1e-6).contains(&value) {
        return Err(Error::invalid(format!(
            "recovered CDF {value} at strike {strike} is outside [0, 1] beyond tolerance"
        )));
    }
    Probability::new(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dists::{calibrate_forward, CalibrationTarget, Gamma, StudentT, Uniform};
    use approx::assert_abs_diff_eq;

    fn flat_market(spot: f64, expiry: f64) -> MarketParams {
        MarketParams::new(spot, 0.0, 0.0, expiry).unwrap()
    }

    #[test]
    fn round_trip_at_benchmark_point() {
        let m = flat_market(100.0, 1.0);
        let price = pricer::bsm_call(&m, 100.0, 0.2).unwrap();
        let vol = implied_vol(price, &m, 100.0).unwrap();
        assert_abs_diff_eq!(vol, 0.2, epsilon = 1e-10);
    }

    #[test]
    fn price_at_bounds_is_rejected_with_side() {
        let m = flat_market(100.0, 1.0);
        let upper = m.foreign_discount_factor() * 100.0;
        match implied_vol(upper, &m, 100.0).unwrap_err() {
            Error::NoSolution { side, .. } => assert_eq!(side, BoundSide::Upper),
            other => panic!("expected NoSolution, got {other:?}"),
        }
        match implied_vol(0.0, &m, 120.0).unwrap_err() {
            Error::NoSolution { side, .. } => assert_eq!(side, BoundSide::Lower),
            other => panic!("expected NoSolution, got {other:?}"),
        }
        // Intrinsic-pinned ITM price also violates the lower bound.
        match implied_vol(20.0, &m, 80.0).unwrap_err() {
            Error::NoSolution { side, bound, .. } => {
                assert_eq!(side, BoundSide::Lower);
                assert!(bound > 0.0);
            }
            other => panic!("expected NoSolution, got {other:?}"),
        }
    }

    #[test]
    fn vols_outside_bracket_are_convergence_errors() {
        let m = flat_market(100.0, 1.0);
        // A price made with σ = 6 sits inside the no-arbitrage bounds but
        // above everything the σ ∈ [1e-6, 5] bracket can reach.
        let price = pricer::bsm_call(&m, 100.0, 6.0).unwrap();
        match implied_vol(price, &m, 100.0).unwrap_err() {
            Error::Convergence { residual, .. } => assert!(residual < 0.0),
            other => panic!("expected Convergence, got {other:?}"),
        }
        // And a positive price below the σ = 1e-6 ATM value falls under it.
        let tiny = 0.5 * pricer::bsm_call(&m, 100.0, 1e-6).unwrap();
        match implied_vol(tiny, &m, 100.0).unwrap_err() {
            Error::Convergence { residual, .. } => assert!(residual > 0.0),
            other => panic!("expected Convergence, got {other:?}"),
        }
    }

    #[test]
    fn gamma_prices_invert_to_a_non_flat_profile() {
        let m = flat_market(5.0, 0.5);
        let g = Gamma::new(2.0, 2.5).unwrap();
        let mut vols = Vec::new();
        for &k in &[4.0, 5.0, 6.0] {
            let price = pricer::gamma_call(&m, k, &g).unwrap();
            let vol = implied_vol(price, &m, k).unwrap();
            // Independent check: bisection-only inversion against a BSM call
            // built on an Abramowitz-Stegun normal CDF.
            let independent = bisect_reference_vol(&m, k, price);
            assert_abs_diff_eq!(vol, independent, epsilon = 1e-5);
            vols.push(vol);
        }
        assert!((vols[0] - vols[1]).abs() > 1e-4);
        assert!((vols[1] - vols[2]).abs() > 1e-4);
    }

    /// Reference-only normal CDF (Abramowitz-Stegun 26.2.17, |ε| < 7.5e-8).
    fn as_normal_cdf(x: f64) -> f64 {
        let t = 1.0 / (1.0 + 0.2316419 * x.abs());
        let poly = t
            * (0.319381530
                + t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))));
        let tail = (2.0 * std::f64::consts::PI).sqrt().recip() * (-0.5 * x * x).exp() * poly;
        if x >= 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }

    fn bisect_reference_vol(m: &MarketParams, strike: f64, price: f64) -> f64 {
        let call = |vol: f64| {
            let sq = vol * m.expiry().sqrt();
            let d1 = ((m.spot() / strike).ln()
                + (m.domestic_rate() - m.foreign_rate() + 0.5 * vol * vol) * m.expiry())
                / sq;
            m.foreign_discount_factor() * m.spot() * as_normal_cdf(d1)
                - m.discount_factor() * strike * as_normal_cdf(d1 - sq)
        };
        let (mut lo, mut hi) = (1e-6, 5.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if call(mid) < price {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lognormal_smile_is_flat() {
        let m = flat_market(100.0, 1.0);
        let spec = calibrate_forward(CalibrationTarget::Lognormal { s: 0.2 }, &m).unwrap();
        let grid = StrikeGrid::linear(50.0, 200.0, 61).unwrap();
        let curve = build_smile(&spec, &m, &grid).unwrap();
        assert_eq!(curve.points.len(), 61);
        assert!(curve.skipped.is_empty());
        for p in &curve.points {
            assert_abs_diff_eq!(p.implied_vol, 0.2, epsilon = 1e-8);
        }
    }

    #[test]
    fn student_smile_has_interior_minimum() {
        let m = flat_market(5.0, 0.5);
        let spec = DistributionSpec::StudentT(StudentT::new(5.0, 1.5).unwrap());
        let grid = StrikeGrid::linear(3.5, 6.5, 61).unwrap();
        let curve = build_smile(&spec, &m, &grid).unwrap();
        let vols = curve.implied_vols();
        let (min_idx, _) = vols
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!(
            min_idx > 0 && min_idx < vols.len() - 1,
            "minimum must be interior"
        );
        let spread = vols.iter().cloned().fold(f64::MIN, f64::max)
            - vols.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 1e-3, "profile must not be flat, spread {spread}");
    }

    #[test]
    fn uniform_smile_is_concave_and_skips_outside_support() {
        let m = flat_market(5.0, 0.5);
        let spec = DistributionSpec::Uniform(Uniform::new(4.0, 6.0).unwrap());
        let grid = StrikeGrid::linear(4.1, 6.5, 25).unwrap();
        let curve = build_smile(&spec, &m, &grid).unwrap();
        assert!(!curve.skipped.is_empty());
        for skip in &curve.skipped {
            assert!(skip.strike >= 6.0);
            assert_eq!(skip.reason, SkipReason::AboveUpperBound);
        }
        // Concavity: negative discrete second differences on the kept points
        // (uniform grid inside (a, b)).
        let interior: Vec<&SmilePoint> = curve.points.iter().filter(|p| p.strike < 5.9).collect();
        for w in interior.windows(3) {
            let second = w[2].implied_vol - 2.0 * w[1].implied_vol + w[0].implied_vol;
            assert!(
                second < 0.0,
                "second difference {second} at {}",
                w[1].strike
            );
        }
    }

    #[test]
    fn intrinsic_pinned_strikes_report_below_lower_bound() {
        let m = flat_market(5.0, 0.5);
        let spec = DistributionSpec::Uniform(Uniform::new(4.0, 6.0).unwrap());
        // Strikes at/below a price to exactly intrinsic.
        let grid = StrikeGrid::linear(3.0, 5.5, 6).unwrap();
        let curve = build_smile(&spec, &m, &grid).unwrap();
        let below: Vec<_> = curve
            .skipped
            .iter()
            .filter(|s| s.reason == SkipReason::BelowLowerBound)
            .collect();
        assert!(!below.is_empty());
        for skip in below {
            assert!(skip.strike <= 4.0);
        }
    }

    #[test]
    fn empty_curve_is_an_error() {
        let m = flat_market(5.0, 0.5);
        let spec = DistributionSpec::Uniform(Uniform::new(4.0, 6.0).unwrap());
        let grid = StrikeGrid::linear(7.0, 9.0, 5).unwrap();
        match build_smile(&spec, &m, &grid).unwrap_err() {
            Error::EmptyCurve { skipped } => assert_eq!(skipped, 5),
            other => panic!("expected EmptyCurve, got {other:?}"),
        }
    }

    #[test]
    fn density_recovery_gamma() {
        let m = flat_market(5.0, 0.5);
        let g = Gamma::new(2.0, 2.5).unwrap();
        let strike = 5.0;
        let h = 1e-3 * strike;
        let recovered = recover_density(|k| pricer::gamma_call(&m, k, &g), &m, strike, h).unwrap();
        let spec = DistributionSpec::Gamma(g);
        assert_abs_diff_eq!(recovered, spec.density(strike), epsilon = 1e-5);
    }

    #[test]
    fn density_recovery_uniform_interior() {
        let m = flat_market(5.0, 0.5);
        let u = Uniform::new(4.0, 6.0).unwrap();
        let recovered =
            recover_density(|k| pricer::uniform_call(&m, k, &u), &m, 5.0, 1e-3).unwrap();
        assert_abs_diff_eq!(recovered, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn density_recovery_lognormal_at_forward() {
        let m = flat_market(100.0, 1.0);
        let spec = calibrate_forward(CalibrationTarget::Lognormal { s: 0.2 }, &m).unwrap();
        let inner = match &spec {
            DistributionSpec::Lognormal(d) => *d,
            _ => unreachable!(),
        };
        let strike = m.forward();
        let recovered = recover_density(
            |k| pricer::lognormal_call(&m, k, &inner),
            &m,
            strike,
            default_recovery_step(strike),
        )
        .unwrap();
        assert_abs_diff_eq!(recovered, spec.density(strike), epsilon = 1e-5);
    }

    #[test]
    fn cdf_recovery_cases() {
        let m = flat_market(5.0, 0.5);
        let u = Uniform::new(4.0, 6.0).unwrap();
        let mid = recover_cdf(|k| pricer::uniform_call(&m, k, &u), &m, 5.0, 1e-4).unwrap();
        assert_abs_diff_eq!(mid.value(), 0.5, epsilon = 1e-6);

        // Far below the support the derivative is −e^{−rT}: CDF ≈ 0.
        let low = recover_cdf(|k| pricer::uniform_call(&m, k, &u), &m, 1.0, 1e-4).unwrap();
        assert_abs_diff_eq!(low.value(), 0.0, epsilon = 1e-6);

        let t = StudentT::new(5.0, 1.5).unwrap();
        let spec = DistributionSpec::StudentT(t);
        let atm = recover_cdf(
            |k| pricer::student_call(&m, k, &t),
            &m,
            5.0,
            default_recovery_step(5.0),
        )
        .unwrap();
        assert_abs_diff_eq!(atm.value(), 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(atm.value(), spec.cdf(5.0).unwrap().value(), epsilon = 1e-6);
    }

    #[test]
    fn recovery_rejects_nonpositive_step() {
        let m = flat_market(5.0, 0.5);
        let u = Uniform::new(4.0, 6.0).unwrap();
        assert!(recover_density(|k| pricer::uniform_call(&m, k, &u), &m, 5.0, 0.0).is_err());
        assert!(recover_cdf(|k| pricer::uniform_call(&m, k, &u), &m, 5.0, -0.1).is_err());
    }

    #[test]
    fn student_price_level_symmetry() {
        // call(μ+d) equals put(μ−d) for the symmetric law at r = q = 0.
        let m = flat_market(5.0, 0.5);
        let t = StudentT::new(5.0, 1.5).unwrap();
        for &d in &[0.2, 0.8, 1.4] {
            let call_up = pricer::student_call(&m, 5.0 + d, &t).unwrap();
            let put_down = pricer::student_put(&m, 5.0 - d, &t).unwrap();
            assert_abs_diff_eq!(call_up, put_down, epsilon = 1e-10);
        }
    }

    #[test]
    fn grid_spacing_variants() {
        let lin = StrikeGrid::linear(1.0, 3.0, 5).unwrap().strikes();
        assert_eq!(lin, vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        let log = StrikeGrid::new(1.0, 4.0, 3, GridSpacing::Log)
            .unwrap()
            .strikes();
        assert_abs_diff_eq!(log[1], 2.0, epsilon = 1e-12);
        assert!(StrikeGrid::linear(3.0, 1.0, 5).is_err());
        assert!(StrikeGrid::linear(1.0, 3.0, 1).is_err());
        assert!(StrikeGrid::linear(-1.0, 3.0, 5).is_err());
    }

    #[test]
    fn csv_round_trips_at_full_precision() {
        let m = flat_market(100.0, 1.0);
        let spec = calibrate_forward(CalibrationTarget::Lognormal { s: 0.2 }, &m).unwrap();
        let grid = StrikeGrid::linear(80.0, 120.0, 5).unwrap();
        let curve = build_smile(&spec, &m, &grid).unwrap();
        let csv = curve.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "strike,call_price,put_price,implied_vol,residual"
        );
        for (line, point) in lines.zip(&curve.points) {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols[0], point.strike);
            assert_eq!(cols[1], point.call_price);
            assert_eq!(cols[2], point.put_price);
            assert_eq!(cols[3], point.implied_vol);
            assert_eq!(cols[4], point.inversion_residual);
        }
    }
}
