//! Run configuration: a single JSON file plus flag overrides, so figure
//! settings can be checked in and regenerated byte-for-byte.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use distsmile::dists::{self, DistributionSpec, MarketParams};
use distsmile::smile::{GridSpacing, StrikeGrid};

/// What to do when a spec's mean strays from the market forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardPolicy {
    /// Print the structured warning and continue.
    #[default]
    Warn,
    /// Re-solve the location/scale parameter onto the forward.
    Recalibrate,
    /// Refuse to run.
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Least-squares fit request: match a family's density to a target normal
/// density over an even grid, holding the mean to the target's mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    /// The normal law being approximated.
    pub target: DistributionSpec,
    /// Family to fit: "gamma" or "lognormal".
    pub family: String,
    /// Number of even grid points.
    #[serde(default = "default_fit_points")]
    pub points: usize,
    /// Grid half-width in target standard deviations.
    #[serde(default = "default_fit_half_width")]
    pub half_width_stdevs: f64,
}

fn default_fit_points() -> usize {
    401
}

fn default_fit_half_width() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub market: MarketParams,
    pub spec: Option<DistributionSpec>,
    pub grid: Option<StrikeGrid>,
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub policy: ForwardPolicy,
    pub fit: Option<FitSpec>,
}

/// Flag overrides shared by every subcommand.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Override the market spot S0
    #[arg(long)]
    pub spot: Option<f64>,
    /// Override the domestic (discounting) rate r
    #[arg(long)]
    pub rate: Option<f64>,
    /// Override the foreign rate / dividend yield q
    #[arg(long)]
    pub div_yield: Option<f64>,
    /// Override the expiry T in years
    #[arg(long)]
    pub expiry: Option<f64>,
    /// Override the strike grid as `lo:hi:n[:log]`
    #[arg(long)]
    pub strikes: Option<String>,
    /// Write the primary artifact here instead of stdout
    #[arg(long)]
    pub out: Option<String>,
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Forward-mismatch policy
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PolicyArg {
    Warn,
    Recalibrate,
    Error,
}

impl RunConfig {
    pub fn load(path: &str, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {path}"))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow!("config file {path} is invalid: {e}"))?;
        config.apply(overrides)?;
        Ok(config)
    }

    fn apply(&mut self, overrides: &Overrides) -> Result<()> {
        if overrides.spot.is_some()
            || overrides.rate.is_some()
            || overrides.div_yield.is_some()
            || overrides.expiry.is_some()
        {
            let m = &self.market;
            self.market = MarketParams::new(
                overrides.spot.unwrap_or(m.spot()),
                overrides.rate.unwrap_or(m.domestic_rate()),
                overrides.div_yield.unwrap_or(m.foreign_rate()),
                overrides.expiry.unwrap_or(m.expiry()),
            )
            .map_err(|e| anyhow!("market override rejected: {e}"))?;
        }
        if let Some(text) = &overrides.strikes {
            self.grid = Some(parse_strikes(text)?);
        }
        if overrides.out.is_some() || overrides.format.is_some() {
            let current = self.output.clone().unwrap_or(OutputSpec {
                path: None,
                format: OutputFormat::Csv,
            });
            self.output = Some(OutputSpec {
                path: overrides.out.clone().or(current.path),
                format: match overrides.format {
                    Some(FormatArg::Csv) => OutputFormat::Csv,
                    Some(FormatArg::Json) => OutputFormat::Json,
                    None => current.format,
                },
            });
        }
        if let Some(policy) = overrides.policy {
            self.policy = match policy {
                PolicyArg::Warn => ForwardPolicy::Warn,
                PolicyArg::Recalibrate => ForwardPolicy::Recalibrate,
                PolicyArg::Error => ForwardPolicy::Error,
            };
        }
        Ok(())
    }

    pub fn require_spec(&self) -> Result<&DistributionSpec> {
        self.spec
            .as_ref()
            .ok_or_else(|| anyhow!("config is missing the \"spec\" field"))
    }

    pub fn require_grid(&self) -> Result<&StrikeGrid> {
        self.grid
            .as_ref()
            .ok_or_else(|| anyhow!("config is missing the \"grid\" field (or pass --strikes)"))
    }

    pub fn output(&self) -> OutputSpec {
        self.output.clone().unwrap_or(OutputSpec {
            path: None,
            format: OutputFormat::Csv,
        })
    }

    /// Apply the forward-mismatch policy; returns the spec to price with and
    /// an optional warning line for stderr.
    pub fn resolve_spec(&self) -> Result<(DistributionSpec, Option<String>)> {
        let spec = self.require_spec()?.clone();
        match distsmile::pricer::forward_mismatch(&spec, &self.market) {
            None => Ok((spec, None)),
            Some(gap) => match self.policy {
                ForwardPolicy::Warn => Ok((
                    spec,
                    Some(format!(
                        "warning: spec mean {} differs from market forward {} (relative gap {:e}); prices admit an arbitrage",
                        gap.spec_mean, gap.market_forward, gap.relative_gap
                    )),
                )),
                ForwardPolicy::Recalibrate => {
                    let recal = dists::recalibrate(&spec, &self.market)
                        .map_err(|e| anyhow!("recalibration failed: {e}"))?;
                    Ok((
                        recal,
                        Some(format!(
                            "note: recalibrated {} spec onto forward {}",
                            spec.family(),
                            gap.market_forward
                        )),
                    ))
                }
                ForwardPolicy::Error => bail!(
                    "spec mean {} differs from market forward {} (relative gap {:e}) and policy is \"error\"",
                    gap.spec_mean,
                    gap.market_forward,
                    gap.relative_gap
                ),
            },
        }
    }
}

/// Parse `lo:hi:n[:log]`.
pub fn parse_strikes(text: &str) -> Result<StrikeGrid> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 && parts.len() != 4 {
        bail!("--strikes expects lo:hi:n[:log], got {text}");
    }
    let lo: f64 = parts[0]
        .parse()
        .with_context(|| format!("bad strike lower bound in {text}"))?;
    let hi: f64 = parts[1]
        .parse()
        .with_context(|| format!("bad strike upper bound in {text}"))?;
    let n: usize = parts[2]
        .parse()
        .with_context(|| format!("bad strike count in {text}"))?;
    let spacing = match parts.get(3) {
        None => GridSpacing::Linear,
        Some(&"log") => GridSpacing::Log,
        Some(other) => bail!("unknown strike spacing {other:?}, expected \"log\""),
    };
    StrikeGrid::new(lo, hi, n, spacing).map_err(|e| anyhow!("bad strike grid: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strikes_parser() {
        let g = parse_strikes("3.5:6.5:61").unwrap();
        assert_eq!(g.len(), 61);
        assert_eq!(g.lo(), 3.5);
        let g = parse_strikes("1:4:3:log").unwrap();
        let s = g.strikes();
        assert!((s[1] - 2.0).abs() < 1e-12);
        assert!(parse_strikes("1:2").is_err());
        assert!(parse_strikes("1:2:5:cubic").is_err());
        assert!(parse_strikes("2:1:5").is_err());
    }

    #[test]
    fn config_parses_and_overrides() {
        let text = r#"{
            "market": {"spot": 5.0, "domestic_rate": 0.0, "foreign_rate": 0.0, "expiry": 0.5},
            "spec": {"family": "student_t", "mu": 5.0, "nu": 1.5},
            "grid": {"lo": 3.5, "hi": 6.5, "n": 61}
        }"#;
        let mut config: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.policy, ForwardPolicy::Warn);
        assert_eq!(config.grid.unwrap().len(), 61);
        config.grid = None;
        let overrides = Overrides {
            spot: Some(6.0),
            strikes: Some("4:6:11".into()),
            ..Overrides::default()
        };
        config.apply(&overrides).unwrap();
        assert_eq!(config.market.spot(), 6.0);
        assert_eq!(config.grid.unwrap().len(), 11);
    }
}
