//! Command-line front end: reads a JSON run config (plus flag overrides),
//! runs smile/price/delta/density/verify/fit workflows, and writes CSV or
//! JSON artifacts suitable for plotting.
//!
//! Exit codes: 0 success, 1 input/runtime error, 2 partial result (some
//! strikes skipped; artifact still written), 3 verification failure (report
//! still written).

mod config;
mod fit;

use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use distsmile::dists::DistributionSpec;
use distsmile::greeks;
use distsmile::oracle::QuadratureConfig;
use distsmile::pricer;
use distsmile::smile::{self, default_recovery_step};
use distsmile::verify::{self, CheckSet};

use config::{OutputFormat, Overrides, RunConfig};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "distsmile",
    version,
    about = "Represent price distributions as implied-volatility smiles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum KindArg {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum AssumptionArg {
    ConstKappa,
    ConstVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ChecksArg {
    All,
    Prices,
    Deltas,
    Means,
    Parity,
}

#[derive(Subcommand)]
enum Command {
    /// Build an implied-volatility smile over the strike grid
    Smile {
        /// Path to the JSON run config
        #[arg(long)]
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Price calls and puts over the strike grid (with a parity column)
    Price {
        #[arg(long)]
        config: String,
        /// Which price leads the table
        #[arg(long, value_enum, default_value = "call")]
        kind: KindArg,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Analytic call deltas over the strike grid
    Delta {
        #[arg(long)]
        config: String,
        /// Co-movement assumption for the gamma family
        #[arg(long, value_enum, default_value = "const-kappa")]
        assumption: AssumptionArg,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Analytic density next to the density recovered from prices
    Density {
        #[arg(long)]
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Cross-check closed forms against the quadrature oracle
    Verify {
        #[arg(long)]
        config: String,
        /// Which comparisons to run
        #[arg(long, value_enum, default_value = "all")]
        checks: ChecksArg,
        /// Also list finite-difference deltas for families without
        /// analytic formulas (log_uniform, mixture)
        #[arg(long)]
        fd_delta: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Least-squares fit of a gamma/lognormal density to a normal target
    Fit {
        #[arg(long)]
        config: String,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn main() -> ExitCode {
    // Clap's own usage errors would exit 2, which this tool reserves for
    // partial results; fold them into the input-error code instead.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Smile { config, overrides } => cmd_smile(&RunConfig::load(&config, &overrides)?),
        Command::Price {
            config,
            kind,
            overrides,
        } => cmd_price(&RunConfig::load(&config, &overrides)?, kind),
        Command::Delta {
            config,
            assumption,
            overrides,
        } => cmd_delta(&RunConfig::load(&config, &overrides)?, assumption),
        Command::Density { config, overrides } => {
            cmd_density(&RunConfig::load(&config, &overrides)?)
        }
        Command::Verify {
            config,
            checks,
            fd_delta,
            overrides,
        } => cmd_verify(&RunConfig::load(&config, &overrides)?, checks, fd_delta),
        Command::Fit { config, overrides } => cmd_fit(&RunConfig::load(&config, &overrides)?),
    }
}

// ---------------------------------------------------------------------------
// smile
// ---------------------------------------------------------------------------

fn cmd_smile(config: &RunConfig) -> Result<u8> {
    let (spec, note) = config.resolve_spec()?;
    if let Some(note) = note {
        eprintln!("{note}");
    }
    let grid = config.require_grid()?;
    let curve = smile::build_smile(&spec, &config.market, grid)
        .map_err(|e| anyhow!("smile construction failed: {e}"))?;

    for skip in &curve.skipped {
        eprintln!("skipped strike {}: {}", skip.strike, skip.reason);
    }

    let rendered = match config.output().format {
        OutputFormat::Csv => curve.to_csv(),
        OutputFormat::Json => to_json_pretty(&curve)?,
    };
    write_artifact(config, &rendered)?;
    Ok(if curve.skipped.is_empty() {
        EXIT_OK
    } else {
        EXIT_PARTIAL
    })
}

// ---------------------------------------------------------------------------
// price
// ---------------------------------------------------------------------------

fn cmd_price(config: &RunConfig, kind: KindArg) -> Result<u8> {
    let (spec, note) = config.resolve_spec()?;
    if let Some(note) = note {
        eprintln!("{note}");
    }
    let grid = config.require_grid()?;

    let mut quotes = Vec::with_capacity(grid.len());
    for strike in grid.strikes() {
        let quoted = pricer::quote(&config.market, strike, &spec)
            .map_err(|e| anyhow!("pricing failed at strike {strike}: {e}"))?;
        quotes.push(quoted.quote);
    }

    let rendered =
        match config.output().format {
            OutputFormat::Csv => {
                let mut out = String::new();
                match kind {
                    KindArg::Call => out
                        .push_str("strike,call_price,put_price,forward,discount,parity_residual\n"),
                    KindArg::Put => out
                        .push_str("strike,put_price,call_price,forward,discount,parity_residual\n"),
                }
                for q in &quotes {
                    let (first, second) = match kind {
                        KindArg::Call => (q.call, q.put),
                        KindArg::Put => (q.put, q.call),
                    };
                    out.push_str(&format!(
                        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                        q.strike,
                        first,
                        second,
                        q.forward,
                        q.discount,
                        q.parity_residual()
                    ));
                }
                out
            }
            OutputFormat::Json => to_json_pretty(&quotes)?,
        };
    write_artifact(config, &rendered)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// delta
// ---------------------------------------------------------------------------

fn cmd_delta(config: &RunConfig, assumption: AssumptionArg) -> Result<u8> {
    let (spec, note) = config.resolve_spec()?;
    if let Some(note) = note {
        eprintln!("{note}");
    }
    let grid = config.require_grid()?;
    let market = &config.market;

    let mut rows = Vec::with_capacity(grid.len());
    for strike in grid.strikes() {
        let result = match &spec {
            DistributionSpec::Gamma(g) => match assumption {
                AssumptionArg::ConstKappa => greeks::gamma_delta_const_kappa(market, strike, g),
                AssumptionArg::ConstVariance => {
                    greeks::gamma_delta_const_variance(market, strike, g)
                }
            },
            DistributionSpec::StudentT(t) => greeks::student_delta(market, strike, t),
            DistributionSpec::Uniform(u) => greeks::uniform_delta(market, strike, u),
            DistributionSpec::Lognormal(d) => {
                greeks::bsm_delta(market, strike, d.s() / market.expiry().sqrt())
            }
            DistributionSpec::Normal(n) => {
                greeks::bachelier_delta(market, strike, n.sigma_n() / market.expiry().sqrt())
            }
            DistributionSpec::LogUniform(_) | DistributionSpec::Mixture(_) => {
                return Err(anyhow!(
                    "no analytic delta exists for the {} family; run \
                     `distsmile verify --checks deltas --fd-delta` for finite-difference deltas",
                    spec.family()
                ));
            }
        }
        .map_err(|e| anyhow!("delta failed at strike {strike}: {e}"))?;
        rows.push((strike, result));
    }

    let rendered = match config.output().format {
        OutputFormat::Csv => {
            let mut out = String::from("strike,delta,assumption\n");
            for (strike, d) in &rows {
                out.push_str(&format!(
                    "{:.16e},{:.16e},{}\n",
                    strike, d.delta, d.assumption
                ));
            }
            out
        }
        OutputFormat::Json => {
            #[derive(serde::Serialize)]
            struct Row {
                strike: f64,
                delta: f64,
                assumption: greeks::DeltaAssumption,
            }
            let rows: Vec<Row> = rows
                .iter()
                .map(|(strike, d)| Row {
                    strike: *strike,
                    delta: d.delta,
                    assumption: d.assumption,
                })
                .collect();
            to_json_pretty(&rows)?
        }
    };
    write_artifact(config, &rendered)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// density
// ---------------------------------------------------------------------------

fn cmd_density(config: &RunConfig) -> Result<u8> {
    let (spec, note) = config.resolve_spec()?;
    if let Some(note) = note {
        eprintln!("{note}");
    }
    let grid = config.require_grid()?;
    let market = &config.market;

    let mut rows = Vec::with_capacity(grid.len());
    let mut max_gap = 0.0f64;
    for strike in grid.strikes() {
        let analytic = spec.density(strike);
        let recovered = smile::recover_density(
            |k| pricer::call_price(market, k, &spec),
            market,
            strike,
            default_recovery_step(strike),
        )
        .map_err(|e| anyhow!("density recovery failed at strike {strike}: {e}"))?;
        max_gap = max_gap.max((analytic - recovered).abs());
        rows.push((strike, analytic, recovered));
    }

    let rendered = match config.output().format {
        OutputFormat::Csv => {
            let mut out = String::from("strike,analytic_density,recovered_density\n");
            for (strike, analytic, recovered) in &rows {
                out.push_str(&format!("{strike:.16e},{analytic:.16e},{recovered:.16e}\n"));
            }
            out.push_str(&format!("# max_abs_gap = {max_gap:.16e}\n"));
            out
        }
        OutputFormat::Json => {
            #[derive(serde::Serialize)]
            struct Row {
                strike: f64,
                analytic_density: f64,
                recovered_density: f64,
            }
            #[derive(serde::Serialize)]
            struct Table {
                rows: Vec<Row>,
                max_abs_gap: f64,
            }
            let table = Table {
                rows: rows
                    .iter()
                    .map(|&(strike, analytic_density, recovered_density)| Row {
                        strike,
                        analytic_density,
                        recovered_density,
                    })
                    .collect(),
                max_abs_gap: max_gap,
            };
            to_json_pretty(&table)?
        }
    };
    write_artifact(config, &rendered)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(config: &RunConfig, checks: ChecksArg, fd_delta: bool) -> Result<u8> {
    let (spec, note) = config.resolve_spec()?;
    if let Some(note) = note {
        eprintln!("{note}");
    }
    let grid = config.require_grid()?;
    let set = match checks {
        ChecksArg::All => CheckSet::All,
        ChecksArg::Prices => CheckSet::Prices,
        ChecksArg::Deltas => CheckSet::Deltas,
        ChecksArg::Means => CheckSet::Means,
        ChecksArg::Parity => CheckSet::Parity,
    };
    let report = verify::run_checks(
        &spec,
        &config.market,
        grid,
        set,
        &QuadratureConfig::default(),
        fd_delta,
    )
    .map_err(|e| anyhow!("verification run failed: {e}"))?;

    let rendered = match config.output().format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => render_report_table(&report),
    };
    write_artifact(config, &rendered)?;

    Ok(if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

fn render_report_table(report: &distsmile::verify::VerificationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<42} {:>24} {:>24} {:>11} {:>11} {:>5}\n",
        "check", "closed_form", "oracle", "abs_err", "rel_err", "pass"
    ));
    for c in &report.checks {
        out.push_str(&format!(
            "{:<42} {:>24.16e} {:>24.16e} {:>11.3e} {:>11.3e} {:>5}\n",
            c.name,
            c.closed_form,
            c.oracle_value,
            c.abs_err,
            c.rel_err,
            if c.pass { "ok" } else { "FAIL" }
        ));
    }
    let failures = report.checks.iter().filter(|c| !c.pass).count();
    out.push_str(&format!(
        "# {} checks, {} failed\n",
        report.checks.len(),
        failures
    ));
    out
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

fn cmd_fit(config: &RunConfig) -> Result<u8> {
    let request = config
        .fit
        .as_ref()
        .ok_or_else(|| anyhow!("config is missing the \"fit\" field"))?;
    let fitted = fit::fit_to_normal(request)?;
    let rendered = to_json_pretty(&fitted)?;
    write_artifact(config, &rendered)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// Shared output plumbing
// ---------------------------------------------------------------------------

fn to_json_pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).context("serialization failed")?;
    text.push('\n');
    Ok(text)
}

fn write_artifact(config: &RunConfig, content: &str) -> Result<()> {
    match config.output().path {
        Some(path) => std::fs::write(&path, content)
            .with_context(|| format!("cannot write output file {path}")),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
