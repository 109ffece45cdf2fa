//! Least-squares matching of a gamma or lognormal density to a normal one.
//!
//! The mean is pinned to the target's mean; the one remaining free parameter
//! (gamma: variance, lognormal: log-stdev) minimizes the unweighted sum of
//! squared density differences over an even grid spanning
//! mean ± `half_width_stdevs`·σ. Golden-section search does the 1-D
//! minimization on a log-scaled parameter.

use anyhow::{bail, Result};

use distsmile::dists::{DistributionSpec, Gamma, Lognormal, Normal};

use crate::config::FitSpec;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SEARCH_ITERS: usize = 120;

pub fn fit_to_normal(request: &FitSpec) -> Result<DistributionSpec> {
    let target = match &request.target {
        DistributionSpec::Normal(n) => *n,
        other => bail!("fit target must be a normal spec, got {}", other.family()),
    };
    if request.points < 3 {
        bail!("fit grid needs at least 3 points, got {}", request.points);
    }
    if !request.half_width_stdevs.is_finite() || request.half_width_stdevs <= 0.0 {
        bail!(
            "fit grid half-width must be positive, got {}",
            request.half_width_stdevs
        );
    }
    let grid = density_grid(&target, request.points, request.half_width_stdevs);

    match request.family.as_str() {
        "gamma" => {
            if target.mu() <= 0.0 {
                bail!("gamma can only fit a normal with a positive mean");
            }
            let mean = target.mu();
            let sigma = target.sigma_n();
            // Search the variance over a wide log bracket around σ².
            let objective = |log_var: f64| -> f64 {
                let variance = log_var.exp();
                match Gamma::new(mean * mean / variance, variance / mean) {
                    Ok(g) => sse(&grid, &target, |x| g.density(x)),
                    Err(_) => f64::INFINITY,
                }
            };
            let lo = (sigma * sigma * 1e-3).ln();
            let hi = (sigma * sigma * 1e3).ln();
            let variance = golden_min(objective, lo, hi).exp();
            Ok(DistributionSpec::Gamma(Gamma::new(
                mean * mean / variance,
                variance / mean,
            )?))
        }
        "lognormal" => {
            if target.mu() <= 0.0 {
                bail!("lognormal can only fit a normal with a positive mean");
            }
            let mean = target.mu();
            // s controls the shape; μ follows from the pinned mean.
            let objective = |log_s: f64| -> f64 {
                let s = log_s.exp();
                match Lognormal::new(mean.ln() - 0.5 * s * s, s) {
                    Ok(d) => sse(&grid, &target, |x| d.density(x)),
                    Err(_) => f64::INFINITY,
                }
            };
            let rough = (target.sigma_n() / mean).max(1e-4);
            let s = golden_min(objective, (rough * 1e-2).ln(), (rough * 1e2).ln()).exp();
            Ok(DistributionSpec::Lognormal(Lognormal::new(
                mean.ln() - 0.5 * s * s,
                s,
            )?))
        }
        other => bail!("fit supports \"gamma\" and \"lognormal\", got {other:?}"),
    }
}

fn density_grid(target: &Normal, points: usize, half_width: f64) -> Vec<f64> {
    let lo = target.mu() - half_width * target.sigma_n();
    let hi = target.mu() + half_width * target.sigma_n();
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

fn sse<F: Fn(f64) -> f64>(grid: &[f64], target: &Normal, density: F) -> f64 {
    grid.iter()
        .map(|&x| {
            let d = density(x) - target.density(x);
            d * d
        })
        .sum()
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..SEARCH_ITERS {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
        if (hi - lo).abs() < 1e-13 * (1.0 + hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use distsmile::dists::Normal;

    fn request(family: &str) -> FitSpec {
        FitSpec {
            target: DistributionSpec::Normal(Normal::new(5.0, 0.5).unwrap()),
            family: family.into(),
            points: 401,
            half_width_stdevs: 4.0,
        }
    }

    #[test]
    fn gamma_fit_preserves_mean_and_tracks_spread() {
        let fitted = fit_to_normal(&request("gamma")).unwrap();
        assert!((fitted.mean() - 5.0).abs() < 1e-9);
        match fitted {
            DistributionSpec::Gamma(g) => {
                // With mean/σ = 10 the fitted variance lands near σ² = 0.25.
                assert!(
                    (g.variance() - 0.25).abs() < 0.05,
                    "variance {}",
                    g.variance()
                );
            }
            other => panic!("expected gamma, got {other:?}"),
        }
    }

    #[test]
    fn lognormal_fit_preserves_mean_and_tracks_spread() {
        let fitted = fit_to_normal(&request("lognormal")).unwrap();
        assert!((fitted.mean() - 5.0).abs() < 1e-9);
        match fitted {
            DistributionSpec::Lognormal(d) => {
                let implied_sd = (d.variance()).sqrt();
                assert!((implied_sd - 0.5).abs() < 0.05, "stdev {implied_sd}");
            }
            other => panic!("expected lognormal, got {other:?}"),
        }
    }

    #[test]
    fn fit_rejects_bad_requests() {
        let mut r = request("weibull");
        assert!(fit_to_normal(&r).is_err());
        r = request("gamma");
        r.points = 2;
        assert!(fit_to_normal(&r).is_err());
        r = request("gamma");
        r.target = DistributionSpec::Normal(Normal::new(-1.0, 0.5).unwrap());
        assert!(fit_to_normal(&r).is_err());
    }
}
