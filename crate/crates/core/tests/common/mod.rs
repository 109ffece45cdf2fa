//! Shared fixtures for the integration suites: randomized calibrated specs
//! and in-support strike placement for every family.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use distsmile::dists::{
    calibrate_forward, CalibrationTarget, DistributionSpec, Lognormal, MarketParams,
};

/// A calibrated spec from a family index (0..7) plus shape draws in [0, 1].
pub fn build_spec(family: usize, u1: f64, u2: f64, market: &MarketParams) -> DistributionSpec {
    let fwd = market.forward();
    match family % 7 {
        0 => calibrate_forward(
            CalibrationTarget::Lognormal {
                s: 0.05 + 0.55 * u1,
            },
            market,
        )
        .unwrap(),
        1 => calibrate_forward(
            CalibrationTarget::GammaGivenKappa {
                kappa: 1.2 + 24.0 * u1,
            },
            market,
        )
        .unwrap(),
        2 => calibrate_forward(
            CalibrationTarget::Normal {
                sigma_n: fwd * (0.05 + 0.25 * u1),
            },
            market,
        )
        .unwrap(),
        3 => calibrate_forward(CalibrationTarget::StudentT { nu: 1.05 + 6.95 * u1 }, market).unwrap(),
        4 => calibrate_forward(
            CalibrationTarget::Uniform {
                a: fwd * (0.2 + 0.6 * u1),
            },
            market,
        )
        .unwrap(),
        5 => calibrate_forward(
            CalibrationTarget::LogUniform {
                a: fwd * (0.3 + 0.6 * u1),
            },
            market,
        )
        .unwrap(),
        _ => {
            let s1 = 0.1 + 0.3 * u1;
            let s2 = 0.1 + 0.3 * u2;
            let c1 = Lognormal::new(-0.15, s1).unwrap();
            let c2 = Lognormal::new(0.15, s2).unwrap();
            let q1 = 0.2 + 0.6 * u2;
            calibrate_forward(
                CalibrationTarget::Mixture {
                    components: vec![c1, c2],
                    weights: vec![q1, 1.0 - q1],
                },
                market,
            )
            .unwrap()
        }
    }
}

/// Strikes inside the family's effective support, parameterized by u ∈ [0, 1].
pub fn strike_inside(spec: &DistributionSpec, market: &MarketParams, u: f64) -> f64 {
    let fwd = market.forward();
    match spec {
        DistributionSpec::Uniform(d) => d.a() + (d.b() - d.a()) * (0.05 + 0.9 * u),
        DistributionSpec::LogUniform(d) => d.a() + (d.b() - d.a()) * (0.05 + 0.9 * u),
        DistributionSpec::Normal(d) => d.mu() + d.sigma_n() * (4.0 * u - 2.0),
        DistributionSpec::StudentT(d) => {
            let k = d.mu() + d.nu().sqrt() * (4.0 * u - 2.0);
            k.max(0.05 * fwd)
        }
        _ => fwd * (0.55 + 1.1 * u),
    }
}

/// Calibrated (market, spec) pairs, `per_family` of each family, seeded.
pub fn seeded_specs(seed: u64, per_family: usize) -> Vec<(MarketParams, DistributionSpec)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for family in 0..7 {
        for _ in 0..per_family {
            let market = MarketParams::new(
                rng.random_range(0.5..50.0),
                rng.random_range(-0.02..0.05),
                rng.random_range(-0.02..0.05),
                rng.random_range(0.1..2.0),
            )
            .unwrap();
            let spec = build_spec(
                family,
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                &market,
            );
            out.push((market, spec));
        }
    }
    out
}
