//! Cross-check runner: compares every closed form against the quadrature /
//! finite-difference oracle and assembles a machine-readable report.
//!
//! The oracle side never touches the closed-form pricers; this module is the
//! one place where both routes meet.

use serde::{Deserialize, Serialize};

use crate::dists::{DistributionSpec, MarketParams};
use crate::error::Result;
use crate::greeks;
use crate::oracle::{self, DiffOrder, QuadratureConfig};
use crate::pricer;
use crate::smile::StrikeGrid;

/// Price agreement: 1e-6 relative with a 1e-8 absolute floor.
pub const PRICE_RTOL: f64 = 1e-6;
pub const PRICE_ATOL: f64 = 1e-8;
/// Mean agreement, relative.
pub const MEAN_RTOL: f64 = 1e-8;
/// Parity residual bound, ×S₀.
pub const PARITY_TOL_REL_SPOT: f64 = 1e-10;
/// Delta agreement: 1e-6 relative with a small absolute floor for deltas
/// that vanish in the wings.
pub const DELTA_RTOL: f64 = 1e-6;
pub const DELTA_ATOL: f64 = 1e-9;
/// Finite-difference step for delta checks, ×S₀.
pub const DELTA_FD_STEP_REL: f64 = 1e-5;

/// Which cross-checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckSet {
    #[default]
    All,
    Prices,
    Deltas,
    Means,
    Parity,
}

impl CheckSet {
    fn wants(self, other: CheckSet) -> bool {
        self == CheckSet::All || self == other
    }
}

/// One comparison: a closed-form value against its oracle counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub closed_form: f64,
    pub oracle_value: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn compare(name: String, closed_form: f64, oracle_value: f64, rtol: f64, atol: f64) -> Self {
        let abs_err = (closed_form - oracle_value).abs();
        let scale = closed_form.abs().max(oracle_value.abs());
        let rel_err = if scale > 0.0 { abs_err / scale } else { 0.0 };
        let tolerance = (rtol * scale).max(atol);
        CheckRecord {
            name,
            closed_form,
            oracle_value,
            abs_err,
            rel_err,
            tolerance,
            pass: abs_err <= tolerance,
        }
    }
}

/// Per-identity comparison records; `pass` iff every record passed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Run the selected checks for one spec/market/grid; `fd_deltas` appends
/// informational finite-difference deltas for families without analytic
/// formulas.
pub fn run_checks(
    spec: &DistributionSpec,
    market: &MarketParams,
    grid: &StrikeGrid,
    set: CheckSet,
    config: &QuadratureConfig,
    fd_deltas: bool,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let strikes = grid.strikes();
    let family = spec.family();

    if set.wants(CheckSet::Means) {
        let closed = spec.mean();
        let oracle_mean = oracle::quad_mean(spec, config)?;
        report.checks.push(CheckRecord::compare(
            format!("{family} mean"),
            closed,
            oracle_mean,
            MEAN_RTOL,
            0.0,
        ));
    }

    if set.wants(CheckSet::Prices) {
        for &k in &strikes {
            let call = pricer::call_price(market, k, spec)?;
            let oracle_call = oracle::quad_call(spec, market, k, config)?;
            report.checks.push(CheckRecord::compare(
                format!("{family} call K={k}"),
                call,
                oracle_call,
                PRICE_RTOL,
                PRICE_ATOL,
            ));
            let put = pricer::put_price(market, k, spec)?;
            let oracle_put = oracle::quad_put(spec, market, k, config)?;
            report.checks.push(CheckRecord::compare(
                format!("{family} put K={k}"),
                put,
                oracle_put,
                PRICE_RTOL,
                PRICE_ATOL,
            ));
        }
    }

    if set.wants(CheckSet::Parity) {
        let disc = market.discount_factor();
        let mean = spec.mean();
        for &k in &strikes {
            let call = pricer::call_price(market, k, spec)?;
            let put = pricer::put_price(market, k, spec)?;
            let lhs = call - put;
            let rhs = disc * (mean - k);
            let record = CheckRecord {
                name: format!("{family} parity K={k}"),
                closed_form: lhs,
                oracle_value: rhs,
                abs_err: (lhs - rhs).abs(),
                rel_err: if rhs.abs() > 0.0 {
                    ((lhs - rhs) / rhs).abs()
                } else {
                    0.0
                },
                tolerance: PARITY_TOL_REL_SPOT * market.spot(),
                pass: (lhs - rhs).abs() <= PARITY_TOL_REL_SPOT * market.spot(),
            };
            report.checks.push(record);
        }
    }

    if set.wants(CheckSet::Deltas) {
        delta_checks(spec, market, &strikes, &mut report)?;
        if fd_deltas {
            fd_delta_rows(spec, market, &strikes, &mut report)?;
        }
    }

    Ok(report)
}

/// Analytic deltas against central finite differences of the corresponding
/// pricing function with the documented parameter co-movement.
fn delta_checks(
    spec: &DistributionSpec,
    market: &MarketParams,
    strikes: &[f64],
    report: &mut VerificationReport,
) -> Result<()> {
    let h = DELTA_FD_STEP_REL * market.spot();
    let spot = market.spot();
    match spec {
        DistributionSpec::Gamma(g) => {
            let kappa = g.kappa();
            for &k in strikes {
                let analytic = greeks::gamma_delta_const_kappa(market, k, g)?.delta;
                let fd = oracle::fd_derivative(
                    |s0| {
                        let m = market.with_spot(s0)?;
                        let moved = crate::dists::Gamma::new(kappa, m.forward() / kappa)?;
                        pricer::gamma_call(&m, k, &moved)
                    },
                    spot,
                    h,
                    DiffOrder::First,
                )?;
                report.checks.push(CheckRecord::compare(
                    format!("gamma delta const_kappa K={k}"),
                    analytic,
                    fd,
                    DELTA_RTOL,
                    DELTA_ATOL,
                ));
            }
            let variance = g.variance();
            for &k in strikes {
                let analytic = greeks::gamma_delta_const_variance(market, k, g)?.delta;
                let fd = oracle::fd_derivative(
                    |s0| {
                        let m = market.with_spot(s0)?;
                        let fwd = m.forward();
                        let moved = crate::dists::Gamma::new(fwd * fwd / variance, variance / fwd)?;
                        pricer::gamma_call(&m, k, &moved)
                    },
                    spot,
                    h,
                    DiffOrder::First,
                )?;
                report.checks.push(CheckRecord::compare(
                    format!("gamma delta const_variance K={k}"),
                    analytic,
                    fd,
                    DELTA_RTOL,
                    DELTA_ATOL,
                ));
            }
        }
        DistributionSpec::StudentT(t) => {
            let nu = t.nu();
            for &k in strikes {
                let analytic = greeks::student_delta(market, k, t)?.delta;
                let fd = oracle::fd_derivative(
                    |s0| {
                        let m = market.with_spot(s0)?;
                        let moved = crate::dists::StudentT::new(m.forward(), nu)?;
                        pricer::student_call(&m, k, &moved)
                    },
                    spot,
                    h,
                    DiffOrder::First,
                )?;
                report.checks.push(CheckRecord::compare(
                    format!("student_t delta K={k}"),
                    analytic,
                    fd,
                    DELTA_RTOL,
                    DELTA_ATOL,
                ));
            }
        }
        DistributionSpec::Uniform(u) => {
            let a = u.a();
            for &k in strikes {
                let analytic = greeks::uniform_delta(market, k, u)?.delta;
                let fd = oracle::fd_derivative(
                    |s0| {
                        let m = market.with_spot(s0)?;
                        let moved = crate::dists::Uniform::new(a, 2.0 * m.forward() - a)?;
                        pricer::uniform_call(&m, k, &moved)
                    },
                    spot,
                    h,
                    DiffOrder::First,
                )?;
                report.checks.push(CheckRecord::compare(
                    format!("uniform delta K={k}"),
                    analytic,
                    fd,
                    DELTA_RTOL,
                    DELTA_ATOL,
                ));
            }
        }
        DistributionSpec::Lognormal(d) => {
            let vol = d.s() / market.expiry().sqrt();
            for &k in strikes {
                let analytic = greeks::bsm_delta(market, k, vol)?.delta;
                let fd = oracle::fd_derivative(
                    |s0| pricer::bsm_call(&market.with_spot(s0)?, k, vol),
                    spot,
                    h,
                    DiffOrder::First,
                )?;
                report.checks.push(CheckRecord::compare(
                    format!("lognormal delta K={k}"),
                    analytic,
                    fd,
                    DELTA_RTOL,
                    DELTA_ATOL,
                ));
            }
        }
        DistributionSpec::Normal(n) => {
            let vol_n = n.sigma_n() / market.expiry().sqrt();
            for &k in strikes {
                let analytic = greeks::bachelier_delta(market, k, vol_n)?.delta;
                let fd = oracle::fd_derivative(
                    |s0| pricer::bachelier_call(&market.with_spot(s0)?, k, vol_n),
                    spot,
                    h,
                    DiffOrder::First,
                )?;
                report.checks.push(CheckRecord::compare(
                    format!("normal delta K={k}"),
                    analytic,
                    fd,
                    DELTA_RTOL,
                    DELTA_ATOL,
                ));
            }
        }
        // No analytic delta in these families; cmd-level callers can ask
        // for informational finite differences instead.
        DistributionSpec::LogUniform(_) | DistributionSpec::Mixture(_) => {}
    }
    Ok(())
}

/// Informational finite-difference deltas for families without analytic
/// formulas (log-uniform, mixture). The spec moves with spot through
/// `recalibrate`, and the rows always pass — they carry values, not checks.
fn fd_delta_rows(
    spec: &DistributionSpec,
    market: &MarketParams,
    strikes: &[f64],
    report: &mut VerificationReport,
) -> Result<()> {
    if !matches!(
        spec,
        DistributionSpec::LogUniform(_) | DistributionSpec::Mixture(_)
    ) {
        return Ok(());
    }
    let h = DELTA_FD_STEP_REL * market.spot();
    for &k in strikes {
        let fd = oracle::fd_derivative(
            |s0| {
                let m = market.with_spot(s0)?;
                let moved = crate::dists::recalibrate(spec, &m)?;
                pricer::call_price(&m, k, &moved)
            },
            market.spot(),
            h,
            DiffOrder::First,
        )?;
        report.checks.push(CheckRecord {
            name: format!("{} delta fd K={k}", spec.family()),
            closed_form: fd,
            oracle_value: fd,
            abs_err: 0.0,
            rel_err: 0.0,
            tolerance: 0.0,
            pass: true,
        });
    }
    Ok(())
}
