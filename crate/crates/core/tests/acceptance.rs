//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured figure and its tolerance (visible with --nocapture).

use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use distsmile::dists::{
    calibrate_forward, CalibrationTarget, DistributionSpec, Lognormal, MarketParams, Mixture,
};
use distsmile::greeks;
use distsmile::oracle::{self, DiffOrder, QuadratureConfig};
use distsmile::pricer;
use distsmile::smile::{self, StrikeGrid};

mod common;
use common::{seeded_specs, strike_inside};

fn report(criterion: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {criterion}: {detail}");
    assert!(pass, "{criterion} failed: {detail}");
}

fn flat_market(spot: f64, expiry: f64) -> MarketParams {
    MarketParams::new(spot, 0.0, 0.0, expiry).unwrap()
}

/// 1. A calibrated lognormal spec must invert to a flat smile.
#[test]
fn acceptance_01_flat_smile() {
    let start = Instant::now();
    let market = flat_market(100.0, 1.0);
    let spec = calibrate_forward(CalibrationTarget::Lognormal { s: 0.2 }, &market).unwrap();
    let grid = StrikeGrid::linear(0.5 * market.forward(), 2.0 * market.forward(), 61).unwrap();
    let curve = smile::build_smile(&spec, &market, &grid).unwrap();
    let vols = curve.implied_vols();
    assert_eq!(vols.len(), 61, "every strike must invert");
    let spread = vols.iter().cloned().fold(f64::MIN, f64::max)
        - vols.iter().cloned().fold(f64::MAX, f64::min);
    let elapsed = start.elapsed();
    let pass = spread <= 1e-6 && elapsed < Duration::from_secs(1);
    report(
        "criterion 1 flat-smile",
        pass,
        &format!("max-min vol {spread:.3e} (tol 1e-6), elapsed {elapsed:?} (limit 1s)"),
    );
}

/// 2. Implied vol round-trips the BSM price over the σ × strike matrix.
#[test]
fn acceptance_02_round_trip_inversion() {
    let start = Instant::now();
    // T = 8 keeps every pair inside the no-arbitrage bounds and above the
    // double-precision vega-resolution floor across the whole matrix.
    let market = flat_market(100.0, 8.0);
    let fwd = market.forward();
    let mut worst = 0.0f64;
    let mut count = 0;
    for i in 1..=20 {
        let sigma = 0.05 * i as f64;
        for j in 0..21 {
            let strike = fwd * (0.5 + 1.5 * j as f64 / 20.0);
            let price = pricer::bsm_call(&market, strike, sigma).unwrap();
            let vol = smile::implied_vol(price, &market, strike).unwrap();
            worst = worst.max((vol - sigma).abs());
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-8 && elapsed < Duration::from_secs(5);
    report(
        "criterion 2 round-trip inversion",
        pass,
        &format!(
            "{count} pairs, worst |Δσ| {worst:.3e} (tol 1e-8), elapsed {elapsed:?} (limit 5s)"
        ),
    );
}

/// Shared draw matrix for criteria 3 and 4: at least 100 calibrated
/// (family, parameters, strike) draws across all seven families.
fn draw_matrix() -> Vec<(MarketParams, DistributionSpec, f64)> {
    let mut rng = StdRng::seed_from_u64(20240831);
    seeded_specs(42, 15)
        .into_iter()
        .map(|(market, spec)| {
            let strike = strike_inside(&spec, &market, rng.random_range(0.0..1.0));
            (market, spec, strike)
        })
        .collect()
}

/// 3. Every closed-form call agrees with the quadrature oracle.
#[test]
fn acceptance_03_oracle_equivalence() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let draws = draw_matrix();
    assert!(
        draws.len() >= 100,
        "need at least 100 draws, have {}",
        draws.len()
    );
    let mut worst = 0.0f64;
    for (market, spec, strike) in &draws {
        let closed = pricer::call_price(market, *strike, spec).unwrap();
        let quad = oracle::quad_call(spec, market, *strike, &cfg).unwrap();
        let scale = closed.abs().max(quad.abs());
        let tol_ratio = (closed - quad).abs() / (1e-6 * scale).max(1e-8);
        worst = worst.max(tol_ratio);
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1.0 && elapsed < Duration::from_secs(60);
    report(
        "criterion 3 oracle equivalence",
        pass,
        &format!(
            "{} draws, worst err/tol {worst:.3} (tol 1e-6 rel, 1e-8 abs floor), elapsed {elapsed:?} (limit 60s)",
            draws.len()
        ),
    );
}

/// 4. Put-call parity on the same draw matrix.
#[test]
fn acceptance_04_parity() {
    let draws = draw_matrix();
    let mut worst = 0.0f64;
    for (market, spec, strike) in &draws {
        let call = pricer::call_price(market, *strike, spec).unwrap();
        let put = pricer::put_price(market, *strike, spec).unwrap();
        let residual = (call - put - market.discount_factor() * (spec.mean() - strike)).abs();
        worst = worst.max(residual / (1e-10 * market.spot()));
    }
    let pass = worst <= 1.0;
    report(
        "criterion 4 parity",
        pass,
        &format!(
            "{} draws, worst |c-p-df(F-K)| / (1e-10·S0) = {worst:.3}",
            draws.len()
        ),
    );
}

/// 5. Density and CDF recovered from prices match the analytic forms.
#[test]
fn acceptance_05_density_recovery() {
    let market = MarketParams::new(5.0, 0.01, -0.005, 0.5).unwrap();
    let specs: Vec<DistributionSpec> = (0..7)
        .map(|family| common::build_spec(family, 0.5, 0.4, &market))
        .collect();
    let mut worst_density = 0.0f64;
    let mut worst_cdf = 0.0f64;
    for spec in &specs {
        for i in 0..10 {
            let u = 0.1 + 0.8 * i as f64 / 9.0;
            let k = strike_inside(spec, &market, u);
            let h = smile::default_recovery_step(k);
            let price_fn = |strike: f64| pricer::call_price(&market, strike, spec);
            let density = smile::recover_density(price_fn, &market, k, h).unwrap();
            worst_density = worst_density.max((density - spec.density(k)).abs());
            let cdf = smile::recover_cdf(price_fn, &market, k, h).unwrap().value();
            worst_cdf = worst_cdf.max((cdf - spec.cdf(k).unwrap().value()).abs());
        }
    }
    let pass = worst_density <= 1e-4 && worst_cdf <= 1e-5;
    report(
        "criterion 5 density recovery",
        pass,
        &format!(
            "7 families × 10 strikes: density gap {worst_density:.3e} (tol 1e-4), CDF gap {worst_cdf:.3e} (tol 1e-5)"
        ),
    );
}

/// 6. Analytic deltas match central finite differences; the uniform
///    strike-from-delta inverse round-trips.
#[test]
fn acceptance_06_delta_verification() {
    let market = flat_market(5.0, 0.5);
    let h = 1e-5 * market.spot();
    let mut worst = 0.0f64;
    let mut track = |name: &str, analytic: f64, numeric: f64| {
        let rel = (analytic - numeric).abs() / numeric.abs().max(1e-12);
        assert!(
            rel <= 1e-6,
            "{name}: analytic {analytic} vs fd {numeric} (rel {rel:.3e})"
        );
        worst = worst.max(rel);
    };

    // Gamma, both assumptions.
    let gamma = match common::build_spec(1, 0.05, 0.0, &market) {
        DistributionSpec::Gamma(g) => g,
        _ => unreachable!(),
    };
    for i in 0..10 {
        let k = 3.0 + 0.45 * i as f64;
        let analytic = greeks::gamma_delta_const_kappa(&market, k, &gamma)
            .unwrap()
            .delta;
        let kappa = gamma.kappa();
        let numeric = oracle::fd_derivative(
            |s0| {
                let m = market.with_spot(s0)?;
                let moved = distsmile::dists::Gamma::new(kappa, m.forward() / kappa)?;
                pricer::gamma_call(&m, k, &moved)
            },
            market.spot(),
            h,
            DiffOrder::First,
        )
        .unwrap();
        track("gamma const_kappa", analytic, numeric);

        let analytic = greeks::gamma_delta_const_variance(&market, k, &gamma)
            .unwrap()
            .delta;
        let variance = gamma.variance();
        let numeric = oracle::fd_derivative(
            |s0| {
                let m = market.with_spot(s0)?;
                let fwd = m.forward();
                let moved = distsmile::dists::Gamma::new(fwd * fwd / variance, variance / fwd)?;
                pricer::gamma_call(&m, k, &moved)
            },
            market.spot(),
            h,
            DiffOrder::First,
        )
        .unwrap();
        track("gamma const_variance", analytic, numeric);
    }

    // Student-t.
    let student = match common::build_spec(3, 0.05, 0.0, &market) {
        DistributionSpec::StudentT(t) => t,
        _ => unreachable!(),
    };
    for i in 0..10 {
        let k = 3.5 + 0.33 * i as f64;
        let analytic = greeks::student_delta(&market, k, &student).unwrap().delta;
        let nu = student.nu();
        let numeric = oracle::fd_derivative(
            |s0| {
                let m = market.with_spot(s0)?;
                pricer::student_call(&m, k, &distsmile::dists::StudentT::new(m.forward(), nu)?)
            },
            market.spot(),
            h,
            DiffOrder::First,
        )
        .unwrap();
        track("student_t", analytic, numeric);
    }

    // Uniform, plus the strike-from-delta round trip.
    let uniform = match common::build_spec(4, 0.5, 0.0, &market) {
        DistributionSpec::Uniform(u) => u,
        _ => unreachable!(),
    };
    let (a, b) = (uniform.a(), uniform.b());
    for i in 0..10 {
        let k = a + (b - a) * (0.08 + 0.84 * i as f64 / 9.0);
        let analytic = greeks::uniform_delta(&market, k, &uniform).unwrap().delta;
        let numeric = oracle::fd_derivative(
            |s0| {
                let m = market.with_spot(s0)?;
                pricer::uniform_call(
                    &m,
                    k,
                    &distsmile::dists::Uniform::new(a, 2.0 * m.forward() - a)?,
                )
            },
            market.spot(),
            h,
            DiffOrder::First,
        )
        .unwrap();
        track("uniform", analytic, numeric);
    }
    let mut worst_round_trip = 0.0f64;
    for i in 1..10 {
        let delta = market.foreign_discount_factor() * i as f64 / 10.0;
        let k = greeks::uniform_strike_from_delta(delta, &market, &uniform).unwrap();
        let back = greeks::uniform_delta(&market, k, &uniform).unwrap().delta;
        worst_round_trip = worst_round_trip.max((back - delta).abs());
    }

    // BSM.
    for i in 0..10 {
        let k = 3.5 + 0.33 * i as f64;
        let analytic = greeks::bsm_delta(&market, k, 0.3).unwrap().delta;
        let numeric = oracle::fd_derivative(
            |s0| pricer::bsm_call(&market.with_spot(s0)?, k, 0.3),
            market.spot(),
            h,
            DiffOrder::First,
        )
        .unwrap();
        track("bsm", analytic, numeric);
    }

    // Bachelier.
    for i in 0..10 {
        let k = 3.5 + 0.33 * i as f64;
        let analytic = greeks::bachelier_delta(&market, k, 0.8).unwrap().delta;
        let numeric = oracle::fd_derivative(
            |s0| pricer::bachelier_call(&market.with_spot(s0)?, k, 0.8),
            market.spot(),
            h,
            DiffOrder::First,
        )
        .unwrap();
        track("bachelier", analytic, numeric);
    }

    let pass = worst <= 1e-6 && worst_round_trip <= 1e-12;
    report(
        "criterion 6 delta verification",
        pass,
        &format!(
            "worst fd gap {worst:.3e} (tol 1e-6 rel), strike-from-delta round trip {worst_round_trip:.3e} (tol 1e-12)"
        ),
    );
}

/// 7. The Student-t smile is non-flat with an interior minimum and a
///    dominant left wing.
#[test]
fn acceptance_07_student_smile_shape() {
    let start = Instant::now();
    let market = flat_market(5.0, 0.5);
    let spec = calibrate_forward(CalibrationTarget::StudentT { nu: 1.5 }, &market).unwrap();
    let grid = StrikeGrid::linear(3.5, 6.5, 61).unwrap();
    let curve = smile::build_smile(&spec, &market, &grid).unwrap();
    let vols = curve.implied_vols();
    assert_eq!(vols.len(), 61);
    let (min_idx, min_vol) = vols
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, v)| (i, *v))
        .unwrap();
    let left = vols[0];
    let right = *vols.last().unwrap();
    let spread = vols.iter().cloned().fold(f64::MIN, f64::max) - min_vol;
    let elapsed = start.elapsed();

    let interior = min_idx > 0 && min_idx < vols.len() - 1;
    let pass = spread > 1e-6 && interior && left > right && elapsed < Duration::from_secs(1);
    report(
        "criterion 7 Student-t smile shape",
        pass,
        &format!(
            "spread {spread:.4}, min at index {min_idx}, left {left:.4} vs right {right:.4}, elapsed {elapsed:?} (limit 1s)"
        ),
    );
}

/// 8. Uniform and log-uniform smiles are strictly concave at interior
///    strikes.
#[test]
fn acceptance_08_bounded_support_smiles_concave() {
    let market = flat_market(5.0, 0.5);
    let uniform = calibrate_forward(CalibrationTarget::Uniform { a: 4.0 }, &market).unwrap();
    let log_uniform_market = MarketParams::new(
        5.097727239116331, // (8-3)/ln(8/3): spot such that the forward sits on the mean
        0.0,
        0.0,
        0.5,
    )
    .unwrap();
    let log_uniform =
        DistributionSpec::LogUniform(distsmile::dists::LogUniform::new(3.0, 8.0).unwrap());

    let mut all_pass = true;
    let mut detail = String::new();
    for (name, spec, market, lo, hi) in [
        ("uniform", &uniform, &market, 4.1, 5.9),
        ("log_uniform", &log_uniform, &log_uniform_market, 3.2, 7.8),
    ] {
        let grid = StrikeGrid::linear(lo, hi, 41).unwrap();
        let curve = smile::build_smile(spec, market, &grid).unwrap();
        let vols = curve.implied_vols();
        assert_eq!(vols.len(), 41, "{name}: all strikes must invert");
        let mut worst_second = f64::NEG_INFINITY;
        for w in vols.windows(3) {
            worst_second = worst_second.max(w[2] - 2.0 * w[1] + w[0]);
        }
        let pass = worst_second < 0.0;
        all_pass &= pass;
        detail.push_str(&format!(
            "{name}: max second difference {worst_second:.3e}; "
        ));
    }
    report(
        "criterion 8 bounded-support smiles concave",
        all_pass,
        detail.trim_end_matches("; "),
    );
}

/// 9. Calibration puts every family's quadrature mean on the forward.
#[test]
fn acceptance_09_forward_consistency() {
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (market, spec) in seeded_specs(9, 2) {
        let fwd = market.forward();
        let mean = oracle::quad_mean(&spec, &cfg).unwrap();
        worst = worst.max(((mean - fwd) / fwd).abs());
        count += 1;
    }
    let pass = worst <= 1e-8;
    report(
        "criterion 9 forward consistency",
        pass,
        &format!("{count} calibrated specs, worst |quad_mean/F - 1| = {worst:.3e} (tol 1e-8)"),
    );
}

/// 10. Mixture pricing is the weighted sum of component BSM prices and
///     matches quadrature on a bimodal example.
#[test]
fn acceptance_10_mixture_linearity() {
    let market = flat_market(5.0, 0.5);
    let c1 = Lognormal::new(1.2, 0.15).unwrap();
    let c2 = Lognormal::new(1.9, 0.2).unwrap();
    let weights = [0.45, 0.55];
    let mix = Mixture::new(vec![c1, c2], weights.to_vec()).unwrap();
    let spec = DistributionSpec::Mixture(mix.clone());

    // Strike between the two modes.
    let strike = 0.5 * (1.2f64.exp() + 1.9f64.exp());

    // Component-level BSM replication: spot_i = M_i e^{-(r-q)T}, σ_i = s_i/√T.
    let mut replicated = 0.0;
    for (q, component) in mix.iter() {
        let spot_i = component.mean()
            * ((market.foreign_rate() - market.domestic_rate()) * market.expiry()).exp();
        let sigma_i = component.s() / market.expiry().sqrt();
        let m_i = MarketParams::new(
            spot_i,
            market.domestic_rate(),
            market.foreign_rate(),
            market.expiry(),
        )
        .unwrap();
        replicated += q * pricer::bsm_call(&m_i, strike, sigma_i).unwrap();
    }
    let direct = pricer::mixture_call(&market, strike, &mix).unwrap();
    let linearity_gap = (direct - replicated).abs();

    let quad = oracle::quad_call(&spec, &market, strike, &QuadratureConfig::default()).unwrap();
    let quad_rel = (direct - quad).abs() / quad.abs();

    let pass = linearity_gap <= 1e-12 && quad_rel <= 1e-6;
    report(
        "criterion 10 mixture linearity",
        pass,
        &format!(
            "BSM replication gap {linearity_gap:.3e} (tol 1e-12), quadrature gap {quad_rel:.3e} rel (tol 1e-6)"
        ),
    );
}
