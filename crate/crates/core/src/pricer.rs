//! Closed-form vanilla call and put prices under every distribution family,
//! plus the generic put-call parity transform.
//!
//! Parity is always written against the distribution's own expected value
//! (its ATMF): call − put = e^{−rT}·(E\[S_T\] − K). When a spec's mean strays
//! from the market forward S₀·e^{(r−q)T} the quote layer attaches a
//! structured [`ForwardMismatch`] warning instead of failing — holding such
//! prices is an arbitrage, but the caller decides what to do about it.
//!
//! Prices are never clamped into their no-arbitrage bounds; a violated bound
//! is an error so that formula bugs stay visible to the oracle.

use serde::{Deserialize, Serialize};

use crate::dists::{
    DistributionSpec, Gamma, LogUniform, Lognormal, MarketParams, Mixture, Normal, StudentT,
    Uniform,
};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::specfun::{reg_inc_beta, reg_inc_gamma, std_normal_cdf, std_normal_pdf};

/// Relative gap between a spec's mean and the market forward above which a
/// [`ForwardMismatch`] warning is attached to quotes.
pub const FORWARD_MISMATCH_RTOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Black-Scholes-Merton
// ---------------------------------------------------------------------------

/// BSM call: e^{−qT}·S₀·N(d₁) − e^{−rT}·K·N(d₂).
pub fn bsm_call(market: &MarketParams, strike: f64, vol: f64) -> Result<f64> {
    let (d1, d2) = bsm_d1_d2(market, strike, vol)?;
    Ok(
        market.foreign_discount_factor() * market.spot() * std_normal_cdf(d1)?.value()
            - market.discount_factor() * strike * std_normal_cdf(d2)?.value(),
    )
}

/// BSM put: e^{−rT}·K·N(−d₂) − e^{−qT}·S₀·N(−d₁).
pub fn bsm_put(market: &MarketParams, strike: f64, vol: f64) -> Result<f64> {
    let (d1, d2) = bsm_d1_d2(market, strike, vol)?;
    Ok(
        market.discount_factor() * strike * std_normal_cdf(-d2)?.value()
            - market.foreign_discount_factor() * market.spot() * std_normal_cdf(-d1)?.value(),
    )
}

/// d₁ = [ln(S₀/K) + (r − q + σ²/2)T] / (σ√T), d₂ = d₁ − σ√T.
pub(crate) fn bsm_d1_d2(market: &MarketParams, strike: f64, vol: f64) -> Result<(f64, f64)> {
    ensure_positive(strike, "strike")?;
    ensure_positive(vol, "vol")?;
    let t = market.expiry();
    let vol_sqrt_t = vol * t.sqrt();
    let d1 = ((market.spot() / strike).ln()
        + (market.domestic_rate() - market.foreign_rate() + 0.5 * vol * vol) * t)
        / vol_sqrt_t;
    let d2 = d1 - vol_sqrt_t;
    ensure_finite(d1, "d1")?;
    Ok((d1, d2))
}

/// Call under a lognormal law given by its distribution parameters (μ, s):
/// e^{−rT}·[M·N(d₁) − K·N(d₂)] with M = e^{μ+s²/2}, d₁ = (μ + s² − ln K)/s.
///
/// For a spec calibrated to the market forward this coincides with
/// [`bsm_call`] at σ = s/√T. Strikes K ≤ 0 price to the discounted mean
/// minus strike (the whole support is in the money).
pub fn lognormal_call(market: &MarketParams, strike: f64, spec: &Lognormal) -> Result<f64> {
    ensure_finite(strike, "strike")?;
    let disc = market.discount_factor();
    let mean = spec.mean();
    if strike <= 0.0 {
        return Ok(disc * (mean - strike));
    }
    let d1 = (spec.mu() + spec.s() * spec.s() - strike.ln()) / spec.s();
    let d2 = d1 - spec.s();
    Ok(disc * (mean * std_normal_cdf(d1)?.value() - strike * std_normal_cdf(d2)?.value()))
}

pub fn lognormal_put(market: &MarketParams, strike: f64, spec: &Lognormal) -> Result<f64> {
    let call = lognormal_call(market, strike, spec)?;
    Ok(call - market.discount_factor() * (spec.mean() - strike))
}

// ---------------------------------------------------------------------------
// Bachelier / normal
// ---------------------------------------------------------------------------

/// Bachelier call on the market forward F = S₀·e^{(r−q)T}:
/// e^{−rT}·[(F−K)·N(d) + σ_N·√T·N′(d)], d = (F−K)/(σ_N√T).
///
/// `vol_n` is the annualized normal vol in price units per √year; the
/// terminal price distribution has standard deviation σ_N·√T. Strikes (and
/// forwards) may be negative.
pub fn bachelier_call(market: &MarketParams, strike: f64, vol_n: f64) -> Result<f64> {
    ensure_finite(strike, "strike")?;
    ensure_positive(vol_n, "vol_n")?;
    let stdev = vol_n * market.expiry().sqrt();
    Ok(market.discount_factor() * normal_payoff(market.forward(), strike, stdev)?)
}

/// Bachelier put: e^{−rT}·[(K−F)·N(d′) + σ_N·√T·N′(d′)], d′ = (K−F)/(σ_N√T).
pub fn bachelier_put(market: &MarketParams, strike: f64, vol_n: f64) -> Result<f64> {
    ensure_finite(strike, "strike")?;
    ensure_positive(vol_n, "vol_n")?;
    let stdev = vol_n * market.expiry().sqrt();
    Ok(market.discount_factor() * normal_payoff(strike, market.forward(), stdev)?)
}

/// Call under a normal law given by its distribution parameters; the spec's
/// `sigma_n` is the terminal stdev, so no √T scaling happens here.
pub fn normal_call(market: &MarketParams, strike: f64, spec: &Normal) -> Result<f64> {
    ensure_finite(strike, "strike")?;
    Ok(market.discount_factor() * normal_payoff(spec.mu(), strike, spec.sigma_n())?)
}

pub fn normal_put(market: &MarketParams, strike: f64, spec: &Normal) -> Result<f64> {
    ensure_finite(strike, "strike")?;
    Ok(market.discount_factor() * normal_payoff(strike, spec.mu(), spec.sigma_n())?)
}

/// Undiscounted E[(X − k)⁺] for X ~ N(m, s²): (m−k)·N(d) + s·N′(d).
fn normal_payoff(m: f64, k: f64, s: f64) -> Result<f64> {
    let d = (m - k) / s;
    Ok((m - k) * std_normal_cdf(d)?.value() + s * std_normal_pdf(d)?)
}

// ---------------------------------------------------------------------------
// Gamma
// ---------------------------------------------------------------------------

/// Gamma-law call:
/// e^{−rT}·{κθ·[1 − P(K; κ+1, θ)] − K·[1 − P(K; κ, θ)]},
/// with P the gamma CDF evaluated through the regularized incomplete gamma.
pub fn gamma_call(market: &MarketParams, strike: f64, spec: &Gamma) -> Result<f64> {
    ensure_finite(strike, "strike")?;
    let mean = spec.mean();
    let disc = market.discount_factor();
    if strike <= 0.0 {
        return Ok(disc * (mean - strike));
    }
    let x = strike / spec.theta();
    let p_k = reg_inc_gamma(spec.kappa(), x)?.value();
    let p_k1 = reg_inc_gamma(spec.kappa() + 1.0, x)?.value();
    Ok(disc * (mean * (1.0 - p_k1) - strike * (1.0 - p_k)))
}

/// Gamma-law put: e^{−rT}·[K·P(K; κ, θ) − κθ·P(K; κ+1, θ)].
///
/// This is the parity-consistent form, `gamma_call − e^{−rT}(κθ − K)`
/// expanded; it vanishes at K = 0 and tends to e^{−rT}(K − κθ) for large K.
pub fn gamma_put(market: &MarketParams, strike: f64, spec: &Gamma) -> Result<f64> {
    ensure_finite(strike, "strike")?;
    if strike <= 0.0 {
        return Ok(0.0);
    }
    let x = strike / spec.theta();
    let p_k = reg_inc_gamma(spec.kappa(), x)?.value();
    let p_k1 = reg_inc_gamma(spec.kappa() + 1.0, x)?.value();
    Ok(market.discount_factor() * (strike * p_k - spec.mean() * p_k1))
}

// ---------------------------------------------------------------------------
// Translated Student-t
// ---------------------------------------------------------------------------

/// Student-t call:
/// e^{−rT}·{ ν/(ν−1)·g·[1 + (μ−K)²/ν]^{(1−ν)/2}
///          + (μ−K)/2·( I_{y(K)}(ν/2, ½)        for K ≥ μ
///                      2 − I_{y(K)}(ν/2, ½)    for K < μ ) },
/// with g = Γ((ν+1)/2)/(√(νπ)Γ(ν/2)) and y(K) = ν/((K−μ)²+ν). The two
/// branches agree at K = μ, where the price is e^{−rT}·ν g/(ν−1).
pub fn student_call(market: &MarketParams, strike: f64, spec: &StudentT) -> Result<f64> {
    ensure_finite(strike, "strike")?;
    let mu = spec.mu();
    let nu = spec.nu();
    let g = spec.norm_constant();
    let z = mu - strike;
    let smooth = nu / (nu - 1.0) * g * (1.0 + z * z / nu).powf(0.5 * (1.0 - nu));
    let iy = reg_inc_beta(spec.beta_argument(strike), 0.5 * nu, 0.5)?.value();
    let branch = if strike >= mu { iy } else { 2.0 - iy };
    Ok(market.discount_factor() * (smooth + 0.5 * z * branch))
}

/// Student-t put via parity: call − e^{−rT}(μ − K).
pub fn student_put(market: &MarketParams, strike: f64, spec: &StudentT) -> Result<f64> {
    let call = student_call(market, strike, spec)?;
    Ok(call - market.discount_factor() * (spec.mu() - strike))
}

// ---------------------------------------------------------------------------
// Uniform
// ---------------------------------------------------------------------------

/// Uniform-law call, piecewise in the strike:
/// e^{−rT}·{ (a+b)/2 − K          for K ≤ a
///           (b−K)²/(2(b−a))      for a < K < b
///           0                    for K ≥ b }.
pub fn uniform_call(market: &MarketParams, strike: f64, spec: &Uniform) -> Result<f64> {
    ensure_finite(strike, "strike")?;
    let (a, b) = (spec.a(), spec.b());
    let disc = market.discount_factor();
    let value = if strike >= b {
        0.0
    } else if strike <= a {
        spec.mean() - strike
    } else {
        let w = b - strike;
        w * w / (2.0 * (b - a))
    };
    Ok(disc * value)
}

pub fn uniform_put(market: &MarketParams, strike: f64, spec: &Uniform) -> Result<f64> {
    let call = uniform_call(market, strike, spec)?;
    Ok(call - market.discount_factor() * (spec.mean() - strike))
}

// ---------------------------------------------------------------------------
// Log-uniform
// ---------------------------------------------------------------------------

/// Log-uniform call:
/// e^{−rT}/ln(b/a)·[b − max(K, a) − K·ln(b/max(K, a))] for K < b, else 0.
pub fn loguniform_call(market: &MarketParams, strike: f64, spec: &LogUniform) -> Result<f64> {
    ensure_finite(strike, "strike")?;
    let (a, b) = (spec.a(), spec.b());
    if strike >= b {
        return Ok(0.0);
    }
    let m = strike.max(a);
    let value = (b - m - strike * (b / m).ln()) / spec.log_width();
    Ok(market.discount_factor() * value)
}

pub fn loguniform_put(market: &MarketParams, strike: f64, spec: &LogUniform) -> Result<f64> {
    let call = loguniform_call(market, strike, spec)?;
    Ok(call - market.discount_factor() * (spec.mean() - strike))
}

// ---------------------------------------------------------------------------
// Lognormal mixture
// ---------------------------------------------------------------------------

/// Mixture call: Σ qᵢ·cᵢ(K), each component priced as a lognormal call.
/// Linear in the weights by construction.
pub fn mixture_call(market: &MarketParams, strike: f64, spec: &Mixture) -> Result<f64> {
    let mut acc = 0.0;
    for (q, component) in spec.iter() {
        acc += q * lognormal_call(market, strike, component)?;
    }
    Ok(acc)
}

pub fn mixture_put(market: &MarketParams, strike: f64, spec: &Mixture) -> Result<f64> {
    let call = mixture_call(market, strike, spec)?;
    Ok(call - market.discount_factor() * (spec.mean() - strike))
}

// ---------------------------------------------------------------------------
// Dispatch and parity
// ---------------------------------------------------------------------------

/// Closed-form call for any family.
pub fn call_price(market: &MarketParams, strike: f64, spec: &DistributionSpec) -> Result<f64> {
    match spec {
        DistributionSpec::Lognormal(d) => lognormal_call(market, strike, d),
        DistributionSpec::Gamma(d) => gamma_call(market, strike, d),
        DistributionSpec::Normal(d) => normal_call(market, strike, d),
        DistributionSpec::StudentT(d) => student_call(market, strike, d),
        DistributionSpec::Uniform(d) => uniform_call(market, strike, d),
        DistributionSpec::LogUniform(d) => loguniform_call(market, strike, d),
        DistributionSpec::Mixture(d) => mixture_call(market, strike, d),
    }
}

/// Closed-form put for any family.
pub fn put_price(market: &MarketParams, strike: f64, spec: &DistributionSpec) -> Result<f64> {
    match spec {
        DistributionSpec::Lognormal(d) => lognormal_put(market, strike, d),
        DistributionSpec::Gamma(d) => gamma_put(market, strike, d),
        DistributionSpec::Normal(d) => normal_put(market, strike, d),
        DistributionSpec::StudentT(d) => student_put(market, strike, d),
        DistributionSpec::Uniform(d) => uniform_put(market, strike, d),
        DistributionSpec::LogUniform(d) => loguniform_put(market, strike, d),
        DistributionSpec::Mixture(d) => mixture_put(market, strike, d),
    }
}

/// Put from a call by parity against the market forward:
/// put = call − e^{−rT}(F − K). A materially negative result (below
/// −1e-12·S₀) signals inconsistent inputs and is an error, never clamped.
pub fn put_from_call(call: f64, market: &MarketParams, strike: f64) -> Result<f64> {
    ensure_finite(call, "call")?;
    ensure_finite(strike, "strike")?;
    let put = call - market.discount_factor() * (market.forward() - strike);
    if put < -1e-12 * market.spot() {
        return Err(Error::ParityViolation { value: put, strike });
    }
    Ok(put)
}

// ---------------------------------------------------------------------------
// Quotes
// ---------------------------------------------------------------------------

/// One strike's pricing output. `forward` is the distribution's own expected
/// value, so `call − put = discount·(forward − strike)` holds to rounding
/// regardless of whether the spec matches the market forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub strike: f64,
    pub call: f64,
    pub put: f64,
    pub forward: f64,
    pub discount: f64,
}

impl OptionQuote {
    /// Parity residual call − put − discount·(forward − strike).
    pub fn parity_residual(&self) -> f64 {
        self.call - self.put - self.discount * (self.forward - self.strike)
    }
}

/// Structured warning attached when a spec's mean strays from the market
/// forward; holding prices off the forward admits an arbitrage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardMismatch {
    pub spec_mean: f64,
    pub market_forward: f64,
    pub relative_gap: f64,
}

/// A quote plus the optional forward-consistency warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quoted {
    pub quote: OptionQuote,
    pub warning: Option<ForwardMismatch>,
}

/// Compare a spec's mean against the market forward.
pub fn forward_mismatch(spec: &DistributionSpec, market: &MarketParams) -> Option<ForwardMismatch> {
    let spec_mean = spec.mean();
    let market_forward = market.forward();
    let relative_gap = ((spec_mean - market_forward) / market_forward).abs();
    (relative_gap > FORWARD_MISMATCH_RTOL).then_some(ForwardMismatch {
        spec_mean,
        market_forward,
        relative_gap,
    })
}

/// Price call and put at one strike and validate the quote's no-arbitrage
/// invariants (parity to 1e-10·S₀, intrinsic floors to 1e-12·S₀).
pub fn quote(market: &MarketParams, strike: f64, spec: &DistributionSpec) -> Result<Quoted> {
    let call = call_price(market, strike, spec)?;
    let put = put_price(market, strike, spec)?;
    let quote = OptionQuote {
        strike,
        call,
        put,
        forward: spec.mean(),
        discount: market.discount_factor(),
    };

    let spot = market.spot();
    if quote.parity_residual().abs() > 1e-10 * spot {
        return Err(Error::ParityViolation {
            value: quote.parity_residual(),
            strike,
        });
    }
    let intrinsic_call = (quote.discount * (quote.forward - strike)).max(0.0);
    let intrinsic_put = (quote.discount * (strike - quote.forward)).max(0.0);
    if call < intrinsic_call - 1e-12 * spot || put < intrinsic_put - 1e-12 * spot {
        return Err(Error::invalid(format!(
            "quote at strike {strike} breaches an intrinsic floor: call={call}, put={put}"
        )));
    }

    Ok(Quoted {
        quote,
        warning: forward_mismatch(spec, market),
    })
}
