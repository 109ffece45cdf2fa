//! Distribution parameter model: density, CDF and mean for each supported
//! risk-neutral family, plus calibration of one free parameter to the
//! no-arbitrage forward.
//!
//! Seven families are supported:
//!
//! | family       | parameters            | mean                |
//! |--------------|-----------------------|---------------------|
//! | `lognormal`  | `mu`, `s`             | e^{μ+s²/2}          |
//! | `gamma`      | `kappa`, `theta`      | κθ                  |
//! | `normal`     | `mu`, `sigma_n`       | μ                   |
//! | `student_t`  | `mu`, `nu` (ν > 1)    | μ                   |
//! | `uniform`    | `a`, `b`              | (a+b)/2             |
//! | `log_uniform`| `a`, `b` (0 < a < b)  | (b−a)/ln(b/a)       |
//! | `mixture`    | lognormal components + weights | Σ qᵢMᵢ     |
//!
//! Densities return 0 outside a family's support instead of erroring, so a
//! single payoff integral works uniformly across families. All parameter
//! invariants are enforced at construction (including through serde), and
//! every value object here is immutable, so the whole module is trivially
//! thread-safe.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::specfun::{self, Probability, INV_SQRT_2PI};

/// Relative tolerance used by forward calibration.
const CALIBRATION_RTOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Market parameters
// ---------------------------------------------------------------------------

/// Spot, continuously-compounded domestic/foreign rates and expiry; owns the
/// forward identity F = S₀·e^{(r−q)T}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarketParamsRaw")]
pub struct MarketParams {
    spot: f64,
    domestic_rate: f64,
    foreign_rate: f64,
    expiry: f64,
}

#[derive(Deserialize)]
struct MarketParamsRaw {
    spot: f64,
    domestic_rate: f64,
    foreign_rate: f64,
    expiry: f64,
}

impl TryFrom<MarketParamsRaw> for MarketParams {
    type Error = Error;
    fn try_from(raw: MarketParamsRaw) -> Result<Self> {
        MarketParams::new(raw.spot, raw.domestic_rate, raw.foreign_rate, raw.expiry)
    }
}

impl MarketParams {
    pub fn new(spot: f64, domestic_rate: f64, foreign_rate: f64, expiry: f64) -> Result<Self> {
        ensure_positive(spot, "spot")?;
        ensure_finite(domestic_rate, "domestic_rate")?;
        ensure_finite(foreign_rate, "foreign_rate")?;
        ensure_positive(expiry, "expiry")?;
        Ok(MarketParams {
            spot,
            domestic_rate,
            foreign_rate,
            expiry,
        })
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }

    pub fn domestic_rate(&self) -> f64 {
        self.domestic_rate
    }

    pub fn foreign_rate(&self) -> f64 {
        self.foreign_rate
    }

    pub fn expiry(&self) -> f64 {
        self.expiry
    }

    /// Forward / ATMF: S₀·e^{(r−q)T}.
    pub fn forward(&self) -> f64 {
        self.spot * ((self.domestic_rate - self.foreign_rate) * self.expiry).exp()
    }

    /// Domestic discount factor e^{−rT}.
    pub fn discount_factor(&self) -> f64 {
        (-self.domestic_rate * self.expiry).exp()
    }

    /// Foreign (dividend-yield) discount factor e^{−qT}.
    pub fn foreign_discount_factor(&self) -> f64 {
        (-self.foreign_rate * self.expiry).exp()
    }

    /// A copy with the spot replaced; used by delta finite differences.
    pub fn with_spot(&self, spot: f64) -> Result<Self> {
        MarketParams::new(spot, self.domestic_rate, self.foreign_rate, self.expiry)
    }
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// Lognormal law of the terminal price: ln S_T ~ N(μ, s²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LognormalRaw")]
pub struct Lognormal {
    mu: f64,
    s: f64,
}

#[derive(Deserialize)]
struct LognormalRaw {
    mu: f64,
    s: f64,
}

impl TryFrom<LognormalRaw> for Lognormal {
    type Error = Error;
    fn try_from(raw: LognormalRaw) -> Result<Self> {
        Lognormal::new(raw.mu, raw.s)
    }
}

impl Lognormal {
    pub fn new(mu: f64, s: f64) -> Result<Self> {
        ensure_finite(mu, "mu")?;
        ensure_positive(s, "s")?;
        Ok(Lognormal { mu, s })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.s * self.s).exp()
    }

    /// Var(e^X) = (e^{s²} − 1)·e^{2μ+s²}.
    pub fn variance(&self) -> f64 {
        let s2 = self.s * self.s;
        s2.exp_m1() * (2.0 * self.mu + s2).exp()
    }

    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 || !x.is_finite() {
            return 0.0;
        }
        let z = (x.ln() - self.mu) / self.s;
        INV_SQRT_2PI / (x * self.s) * (-0.5 * z * z).exp()
    }

    pub fn cdf(&self, x: f64) -> Result<Probability> {
        ensure_finite(x, "x")?;
        if x <= 0.0 {
            return Probability::new(0.0);
        }
        specfun::std_normal_cdf((x.ln() - self.mu) / self.s)
    }
}

/// Gamma law with shape κ and scale θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GammaRaw")]
pub struct Gamma {
    kappa: f64,
    theta: f64,
}

#[derive(Deserialize)]
struct GammaRaw {
    kappa: f64,
    theta: f64,
}

impl TryFrom<GammaRaw> for Gamma {
    type Error = Error;
    fn try_from(raw: GammaRaw) -> Result<Self> {
        Gamma::new(raw.kappa, raw.theta)
    }
}

impl Gamma {
    pub fn new(kappa: f64, theta: f64) -> Result<Self> {
        ensure_positive(kappa, "kappa")?;
        ensure_positive(theta, "theta")?;
        Ok(Gamma { kappa, theta })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mean(&self) -> f64 {
        self.kappa * self.theta
    }

    pub fn variance(&self) -> f64 {
        self.kappa * self.theta * self.theta
    }

    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 || !x.is_finite() {
            return 0.0;
        }
        ((self.kappa - 1.0) * x.ln()
            - x / self.theta
            - self.kappa * self.theta.ln()
            - libm::lgamma(self.kappa))
        .exp()
    }

    pub fn cdf(&self, x: f64) -> Result<Probability> {
        ensure_finite(x, "x")?;
        if x <= 0.0 {
            return Probability::new(0.0);
        }
        specfun::reg_inc_gamma(self.kappa, x / self.theta)
    }
}

/// Normal law of the terminal price.
///
/// `sigma_n` is the standard deviation of S_T itself (price units); the
/// annualized normal vol of the Bachelier pricing formula equals
/// `sigma_n / √T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormalRaw")]
pub struct Normal {
    mu: f64,
    sigma_n: f64,
}

#[derive(Deserialize)]
struct NormalRaw {
    mu: f64,
    sigma_n: f64,
}

impl TryFrom<NormalRaw> for Normal {
    type Error = Error;
    fn try_from(raw: NormalRaw) -> Result<Self> {
        Normal::new(raw.mu, raw.sigma_n)
    }
}

impl Normal {
    pub fn new(mu: f64, sigma_n: f64) -> Result<Self> {
        ensure_finite(mu, "mu")?;
        ensure_positive(sigma_n, "sigma_n")?;
        Ok(Normal { mu, sigma_n })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    pub fn mean(&self) -> f64 {
        self.mu
    }

    pub fn density(&self, x: f64) -> f64 {
        if !x.is_finite() {
            return 0.0;
        }
        let z = (x - self.mu) / self.sigma_n;
        INV_SQRT_2PI / self.sigma_n * (-0.5 * z * z).exp()
    }

    pub fn cdf(&self, x: f64) -> Result<Probability> {
        specfun::std_normal_cdf((x - self.mu) / self.sigma_n)
    }
}

/// Student's t law translated so its expected value sits at μ; requires
/// ν > 1 so the mean (and the payoff integral) exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StudentTRaw")]
pub struct StudentT {
    mu: f64,
    nu: f64,
}

#[derive(Deserialize)]
struct StudentTRaw {
    mu: f64,
    nu: f64,
}

impl TryFrom<StudentTRaw> for StudentT {
    type Error = Error;
    fn try_from(raw: StudentTRaw) -> Result<Self> {
        StudentT::new(raw.mu, raw.nu)
    }
}

impl StudentT {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        ensure_finite(mu, "mu")?;
        if !nu.is_finite() || nu <= 1.0 {
            return Err(Error::invalid(format!(
                "student_t requires nu > 1, got {nu}"
            )));
        }
        Ok(StudentT { mu, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn mean(&self) -> f64 {
        self.mu
    }

    /// Normalization constant Γ((ν+1)/2) / (√(νπ)·Γ(ν/2)), via log-gamma
    /// differences so large ν cannot overflow.
    pub fn norm_constant(&self) -> f64 {
        let nu = self.nu;
        (libm::lgamma(0.5 * (nu + 1.0)) - libm::lgamma(0.5 * nu)).exp()
            / (nu * std::f64::consts::PI).sqrt()
    }

    pub fn density(&self, x: f64) -> f64 {
        if !x.is_finite() {
            return 0.0;
        }
        let z = x - self.mu;
        self.norm_constant() * (1.0 + z * z / self.nu).powf(-0.5 * (self.nu + 1.0))
    }

    /// Argument of the regularized incomplete beta in the CDF branches:
    /// y(x) = ν / ((x−μ)² + ν).
    pub(crate) fn beta_argument(&self, x: f64) -> f64 {
        let z = x - self.mu;
        self.nu / (z * z + self.nu)
    }

    pub fn cdf(&self, x: f64) -> Result<Probability> {
        ensure_finite(x, "x")?;
        let half_tail =
            0.5 * specfun::reg_inc_beta(self.beta_argument(x), 0.5 * self.nu, 0.5)?.value();
        if x >= self.mu {
            Probability::new(1.0 - half_tail)
        } else {
            Probability::new(half_tail)
        }
    }
}

/// Uniform law on [a, b].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UniformRaw")]
pub struct Uniform {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct UniformRaw {
    a: f64,
    b: f64,
}

impl TryFrom<UniformRaw> for Uniform {
    type Error = Error;
    fn try_from(raw: UniformRaw) -> Result<Self> {
        Uniform::new(raw.a, raw.b)
    }
}

impl Uniform {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure_finite(a, "a")?;
        ensure_finite(b, "b")?;
        if a >= b {
            return Err(Error::invalid(format!(
                "uniform requires a < b, got a={a}, b={b}"
            )));
        }
        Ok(Uniform { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn density(&self, x: f64) -> f64 {
        if x >= self.a && x <= self.b {
            1.0 / (self.b - self.a)
        } else {
            0.0
        }
    }

    pub fn cdf(&self, x: f64) -> Result<Probability> {
        ensure_finite(x, "x")?;
        Probability::new(((x - self.a) / (self.b - self.a)).clamp(0.0, 1.0))
    }
}

/// Log-uniform law: ln S_T uniform on [ln a, ln b], 0 < a < b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LogUniformRaw")]
pub struct LogUniform {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct LogUniformRaw {
    a: f64,
    b: f64,
}

impl TryFrom<LogUniformRaw> for LogUniform {
    type Error = Error;
    fn try_from(raw: LogUniformRaw) -> Result<Self> {
        LogUniform::new(raw.a, raw.b)
    }
}

impl LogUniform {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure_positive(a, "a")?;
        ensure_finite(b, "b")?;
        if a >= b {
            return Err(Error::invalid(format!(
                "log_uniform requires 0 < a < b, got a={a}, b={b}"
            )));
        }
        Ok(LogUniform { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn log_width(&self) -> f64 {
        (self.b / self.a).ln()
    }

    pub fn mean(&self) -> f64 {
        (self.b - self.a) / self.log_width()
    }

    pub fn density(&self, x: f64) -> f64 {
        if x >= self.a && x <= self.b {
            1.0 / (x * self.log_width())
        } else {
            0.0
        }
    }

    pub fn cdf(&self, x: f64) -> Result<Probability> {
        ensure_finite(x, "x")?;
        if x <= self.a {
            return Probability::new(0.0);
        }
        if x >= self.b {
            return Probability::new(1.0);
        }
        Probability::new((x / self.a).ln() / self.log_width())
    }
}

/// Mixture of lognormal components with nonnegative weights summing to one.
///
/// The law is the mixture density Σ qᵢ·pᵢ(x); under that reading the call
/// price is exactly the weighted sum of the component prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureRaw")]
pub struct Mixture {
    components: Vec<Lognormal>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct MixtureRaw {
    components: Vec<LognormalRaw>,
    weights: Vec<f64>,
}

impl TryFrom<MixtureRaw> for Mixture {
    type Error = Error;
    fn try_from(raw: MixtureRaw) -> Result<Self> {
        let components = raw
            .components
            .into_iter()
            .map(Lognormal::try_from)
            .collect::<Result<Vec<_>>>()?;
        Mixture::new(components, raw.weights)
    }
}

impl Mixture {
    pub fn new(components: Vec<Lognormal>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture requires at least one component"));
        }
        if components.len() != weights.len() {
            return Err(Error::invalid(format!(
                "mixture has {} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        let mut sum = 0.0;
        for &q in &weights {
            if !q.is_finite() || q < 0.0 {
                return Err(Error::invalid(format!(
                    "mixture weights must be nonnegative, got {q}"
                )));
            }
            sum += q;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "mixture weights must sum to 1, got {sum}"
            )));
        }
        Ok(Mixture {
            components,
            weights,
        })
    }

    pub fn components(&self) -> &[Lognormal] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Lognormal)> {
        self.weights.iter().copied().zip(self.components.iter())
    }

    /// Mean Σ qᵢ·Mᵢ with Mᵢ = e^{μᵢ+sᵢ²/2}.
    pub fn mean(&self) -> f64 {
        self.iter().map(|(q, c)| q * c.mean()).sum()
    }

    /// Σ qᵢ²·Var(e^{Xᵢ}) — the variance of the weighted sum Σ qᵢ·e^{Xᵢ} of
    /// independent components. Note this is *not* the variance of the
    /// mixture density used for pricing; the two laws differ even though
    /// they share the same mean.
    pub fn weighted_sum_variance(&self) -> f64 {
        self.iter().map(|(q, c)| q * q * c.variance()).sum()
    }

    pub fn density(&self, x: f64) -> f64 {
        self.iter().map(|(q, c)| q * c.density(x)).sum()
    }

    pub fn cdf(&self, x: f64) -> Result<Probability> {
        let mut acc = 0.0;
        for (q, c) in self.iter() {
            acc += q * c.cdf(x)?.value();
        }
        Probability::new(acc)
    }
}

// ---------------------------------------------------------------------------
// Tagged union
// ---------------------------------------------------------------------------

/// Tagged union over the seven families.
///
/// Serializes as `{"family": "...", <parameters by name>}`, e.g.
/// `{"family":"gamma","kappa":2.0,"theta":2.5}` or
/// `{"family":"mixture","components":[{"mu":0.0,"s":0.2}],"weights":[1.0]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Lognormal(Lognormal),
    Gamma(Gamma),
    Normal(Normal),
    StudentT(StudentT),
    Uniform(Uniform),
    LogUniform(LogUniform),
    Mixture(Mixture),
}

impl DistributionSpec {
    /// Family tag as it appears in serialized form.
    pub fn family(&self) -> &'static str {
        match self {
            DistributionSpec::Lognormal(_) => "lognormal",
            DistributionSpec::Gamma(_) => "gamma",
            DistributionSpec::Normal(_) => "normal",
            DistributionSpec::StudentT(_) => "student_t",
            DistributionSpec::Uniform(_) => "uniform",
            DistributionSpec::LogUniform(_) => "log_uniform",
            DistributionSpec::Mixture(_) => "mixture",
        }
    }

    /// Density of the terminal price; 0 outside the family's support.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            DistributionSpec::Lognormal(d) => d.density(x),
            DistributionSpec::Gamma(d) => d.density(x),
            DistributionSpec::Normal(d) => d.density(x),
            DistributionSpec::StudentT(d) => d.density(x),
            DistributionSpec::Uniform(d) => d.density(x),
            DistributionSpec::LogUniform(d) => d.density(x),
            DistributionSpec::Mixture(d) => d.density(x),
        }
    }

    /// Cumulative probability P(S_T ≤ x).
    pub fn cdf(&self, x: f64) -> Result<Probability> {
        match self {
            DistributionSpec::Lognormal(d) => d.cdf(x),
            DistributionSpec::Gamma(d) => d.cdf(x),
            DistributionSpec::Normal(d) => d.cdf(x),
            DistributionSpec::StudentT(d) => d.cdf(x),
            DistributionSpec::Uniform(d) => d.cdf(x),
            DistributionSpec::LogUniform(d) => d.cdf(x),
            DistributionSpec::Mixture(d) => d.cdf(x),
        }
    }

    /// Expected terminal price (the distribution's ATMF).
    pub fn mean(&self) -> f64 {
        match self {
            DistributionSpec::Lognormal(d) => d.mean(),
            DistributionSpec::Gamma(d) => d.mean(),
            DistributionSpec::Normal(d) => d.mean(),
            DistributionSpec::StudentT(d) => d.mean(),
            DistributionSpec::Uniform(d) => d.mean(),
            DistributionSpec::LogUniform(d) => d.mean(),
            DistributionSpec::Mixture(d) => d.mean(),
        }
    }

    /// Support endpoints; unbounded sides are ±∞.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DistributionSpec::Lognormal(_)
            | DistributionSpec::Gamma(_)
            | DistributionSpec::Mixture(_) => (0.0, f64::INFINITY),
            DistributionSpec::Normal(_) | DistributionSpec::StudentT(_) => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            DistributionSpec::Uniform(d) => (d.a(), d.b()),
            DistributionSpec::LogUniform(d) => (d.a(), d.b()),
        }
    }
}

// ---------------------------------------------------------------------------
// Forward calibration
// ---------------------------------------------------------------------------

/// One family with exactly one parameter left free, to be solved from
/// mean = S₀·e^{(r−q)T}. The gamma family admits three equivalent
/// parameterizations; callers must pick one explicitly.
#[derive(Debug, Clone, PartialEq)]
pub enum CalibrationTarget {
    /// Solve μ given the log-stdev s: μ = ln F − s²/2.
    Lognormal { s: f64 },
    /// Solve θ = F/κ.
    GammaGivenKappa { kappa: f64 },
    /// Solve κ = F/θ.
    GammaGivenTheta { theta: f64 },
    /// Solve both from the variance: θ = var/F, κ = F²/var.
    GammaGivenVariance { variance: f64 },
    /// Set the location: μ = F.
    Normal { sigma_n: f64 },
    /// Set the location: μ = F.
    StudentT { nu: f64 },
    /// Solve b = 2F − a.
    Uniform { a: f64 },
    /// Solve b from (b−a)/ln(b/a) = F by bracketed bisection.
    LogUniform { a: f64 },
    /// Shift every component's log-location by a common δ so the mixture
    /// mean scales onto F.
    Mixture {
        components: Vec<Lognormal>,
        weights: Vec<f64>,
    },
}

/// Solve the free parameter so that `mean(result)` equals the market
/// forward, to 1e-10 relative or better.
pub fn calibrate_forward(
    target: CalibrationTarget,
    market: &MarketParams,
) -> Result<DistributionSpec> {
    let fwd = market.forward();
    let spec = match target {
        CalibrationTarget::Lognormal { s } => {
            ensure_positive(s, "s")?;
            DistributionSpec::Lognormal(Lognormal::new(fwd.ln() - 0.5 * s * s, s)?)
        }
        CalibrationTarget::GammaGivenKappa { kappa } => {
            ensure_positive(kappa, "kappa")?;
            DistributionSpec::Gamma(Gamma::new(kappa, fwd / kappa)?)
        }
        CalibrationTarget::GammaGivenTheta { theta } => {
            ensure_positive(theta, "theta")?;
            DistributionSpec::Gamma(Gamma::new(fwd / theta, theta)?)
        }
        CalibrationTarget::GammaGivenVariance { variance } => {
            ensure_positive(variance, "variance")?;
            DistributionSpec::Gamma(Gamma::new(fwd * fwd / variance, variance / fwd)?)
        }
        CalibrationTarget::Normal { sigma_n } => {
            DistributionSpec::Normal(Normal::new(fwd, sigma_n)?)
        }
        CalibrationTarget::StudentT { nu } => DistributionSpec::StudentT(StudentT::new(fwd, nu)?),
        CalibrationTarget::Uniform { a } => {
            let b = 2.0 * fwd - a;
            if a >= b {
                return Err(Error::calibration(format!(
                    "uniform lower bound a={a} is not below the forward {fwd}"
                )));
            }
            DistributionSpec::Uniform(Uniform::new(a, b)?)
        }
        CalibrationTarget::LogUniform { a } => {
            DistributionSpec::LogUniform(solve_log_uniform_upper(a, fwd)?)
        }
        CalibrationTarget::Mixture {
            components,
            weights,
        } => {
            let base = Mixture::new(components, weights)?;
            let shift = (fwd / base.mean()).ln();
            let shifted = base
                .components()
                .iter()
                .map(|c| Lognormal::new(c.mu() + shift, c.s()))
                .collect::<Result<Vec<_>>>()?;
            DistributionSpec::Mixture(Mixture::new(shifted, base.weights().to_vec())?)
        }
    };

    let achieved = spec.mean();
    if ((achieved - fwd) / fwd).abs() > 1e-10 {
        return Err(Error::calibration(format!(
            "calibrated mean {achieved} misses forward {fwd}"
        )));
    }
    Ok(spec)
}

/// Re-solve a spec's location/scale parameter onto the market forward,
/// keeping each family's shape parameter fixed.
pub fn recalibrate(spec: &DistributionSpec, market: &MarketParams) -> Result<DistributionSpec> {
    let target = match spec {
        DistributionSpec::Lognormal(d) => CalibrationTarget::Lognormal { s: d.s() },
        DistributionSpec::Gamma(d) => CalibrationTarget::GammaGivenKappa { kappa: d.kappa() },
        DistributionSpec::Normal(d) => CalibrationTarget::Normal {
            sigma_n: d.sigma_n(),
        },
        DistributionSpec::StudentT(d) => CalibrationTarget::StudentT { nu: d.nu() },
        DistributionSpec::Uniform(d) => CalibrationTarget::Uniform { a: d.a() },
        DistributionSpec::LogUniform(d) => CalibrationTarget::LogUniform { a: d.a() },
        DistributionSpec::Mixture(d) => CalibrationTarget::Mixture {
            components: d.components().to_vec(),
            weights: d.weights().to_vec(),
        },
    };
    calibrate_forward(target, market)
}

/// Bisection for the log-uniform upper bound: (b−a)/ln(b/a) is strictly
/// increasing in b for fixed a, so once the geometric expansion brackets the
/// forward the root is pinned.
fn solve_log_uniform_upper(a: f64, fwd: f64) -> Result<LogUniform> {
    ensure_positive(a, "a")?;
    if a >= fwd {
        return Err(Error::calibration(format!(
            "log_uniform lower bound a={a} is not below the forward {fwd}"
        )));
    }
    let mean_for = |b: f64| (b - a) / (b / a).ln();

    let mut hi = 2.0 * fwd;
    let cap = 1e6 * fwd;
    while mean_for(hi) < fwd {
        hi *= 2.0;
        if hi > cap {
            return Err(Error::calibration(format!(
                "log_uniform upper bound exceeded {cap} while bracketing forward {fwd}"
            )));
        }
    }
    let mut lo = fwd; // mean_for(fwd) < fwd since the mean over [a, F] is below F
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_for(mid) < fwd {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= CALIBRATION_RTOL * hi {
            break;
        }
    }
    LogUniform::new(a, 0.5 * (lo + hi))
}
