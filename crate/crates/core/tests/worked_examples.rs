//! Worked examples for every public operation, through the public API only.

mod common;

use agenda_mech::mechanism::{AllocationRule, BunchingCap, DirectMechanism, Mechanism, Window};
use agenda_mech::model::validate::{CHECK_LOG_CONCAVE, CHECK_RES_ZERO};
use agenda_mech::model::{
    hazard_high, hazard_low, validate_economy, virtual_value_gamma, Economy, ReservationProfile, Technology,
    TypeDistribution,
};
use agenda_mech::numerics::simpson;
use agenda_mech::regimes::{
    build_mechanism, solve, solve_majority_linear, solve_stochastic_coalition, solve_unanimity_general,
    solve_unanimity_linear, sweep_outside_option, Regime, SolveOptions,
};
use agenda_mech::solver_core::{
    efficient_level, envelope_slope, gamma_star_constant, partition_types, rent_residual, sigma, xi_argmax,
    GammaRepresentation, Shadow,
};
use agenda_mech::transfers::{agenda_setter_payoff, rent_profile, transfer_overstate, transfer_understate};
use agenda_mech::verify::{check_dsic, check_participation, vcg_demo};
use approx::assert_abs_diff_eq;
use common::{non_monotone_example, prop_example, unif};

fn u(lo: f64, hi: f64) -> TypeDistribution {
    TypeDistribution::uniform(lo, hi).unwrap()
}

fn quad(theta_a: f64, types: Vec<f64>, b: f64, g0: f64) -> Economy {
    Economy::new(theta_a, types, unif(), Technology::log(), ReservationProfile::quadratic(b).unwrap()).with_outside_g(g0)
}

// model

#[test]
fn uniform_density_is_log_concave() {
    let v = validate_economy(&prop_example(0.0));
    assert!(v.check(CHECK_LOG_CONCAVE).unwrap().passed);
    assert!(v.passed());
}

#[test]
fn exp_square_density_is_not_log_concave() {
    let mass = simpson(|s| (s * s).exp(), 0.0, 1.0, 2000);
    let d = TypeDistribution::custom(0.0, 1.0, move |x| simpson(|s| (s * s).exp(), 0.0, x, 200) / mass, move |x| (x * x).exp() / mass)
        .unwrap();
    let e = Economy::new(0.5, vec![0.8], d, Technology::log(), ReservationProfile::linear());
    let v = validate_economy(&e);
    assert!(!v.check(CHECK_LOG_CONCAVE).unwrap().passed);
    assert!(!v.passed());
}

#[test]
fn linear_profile_vanishes_at_zero_status_quo() {
    let e = prop_example(0.0);
    assert!(validate_economy(&e).check(CHECK_RES_ZERO).unwrap().passed);
    for x in [0.0, 0.3, 1.0] {
        assert_eq!(e.v_bar(x), 0.0);
    }
}

#[test]
fn hazard_values() {
    assert_abs_diff_eq!(hazard_low(&unif(), 0.8).unwrap(), 0.6, epsilon = 1e-15);
    assert_abs_diff_eq!(hazard_low(&unif(), 1.0).unwrap(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(hazard_low(&u(0.0, 2.0), 1.0).unwrap(), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(hazard_high(&unif(), 0.8).unwrap(), 1.6, epsilon = 1e-15);
    assert_abs_diff_eq!(hazard_high(&unif(), 0.0).unwrap(), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(hazard_high(&u(0.0, 2.0), 1.0).unwrap(), 2.0, epsilon = 1e-15);
}

#[test]
fn shadow_virtual_values() {
    assert_abs_diff_eq!(virtual_value_gamma(&unif(), 0.8, 1.0).unwrap(), 0.6, epsilon = 1e-15);
    assert_abs_diff_eq!(virtual_value_gamma(&unif(), 0.8, 0.0).unwrap(), 1.6, epsilon = 1e-15);
    assert_abs_diff_eq!(virtual_value_gamma(&unif(), 0.5, 0.5).unwrap(), 0.5, epsilon = 1e-15);
}

// solver_core

#[test]
fn envelope_slope_examples() {
    let (res, tech) = (ReservationProfile::linear(), Technology::log());
    for x in [0.0, 0.4, 1.0] {
        assert_eq!(envelope_slope(x, 0.7, 0.7, &res, &tech), 0.0);
        assert!(envelope_slope(x, 0.3, 0.0, &res, &tech) >= 0.0);
    }
    assert_abs_diff_eq!(envelope_slope(0.5, 1.1, 0.1, &res, &tech), 2.1f64.ln() - 1.1f64.ln(), epsilon = 1e-15);
    assert_abs_diff_eq!(2.1f64.ln() - 1.1f64.ln(), 0.6466, epsilon = 1e-4);
}

#[test]
fn linear_partition_above_status_quo() {
    let e = Economy::new(0.5, vec![0.2, 0.5, 0.9], unif(), Technology::log(), ReservationProfile::linear()).with_outside_g(0.3);
    let p = partition_types(&e, 0.6).unwrap();
    assert!(p.k.is_empty() && p.l.is_empty());
    assert_eq!(p.m, vec![1, 2, 3]);
}

#[test]
fn concave_partition_has_one_zero_slope_agent() {
    // φ(g°) = 1 and φ(g) = 0.7, so the slope 0.7 − (1 − θ/2) vanishes at θ = 0.6
    let e = quad(0.5, vec![0.2, 0.6, 0.9], -0.5, std::f64::consts::E - 1.0);
    let p = partition_types(&e, 0.7f64.exp_m1()).unwrap();
    assert_eq!(p.l, vec![2]);
    assert_eq!(p.k, vec![1]);
    assert_eq!(p.m, vec![3]);
}

#[test]
fn convex_intermediate_binds_at_lowest_and_highest_types() {
    let e = quad(3.0, vec![0.5, 0.5], 8.0, 0.25f64.exp_m1());
    let s = solve(&e, SolveOptions::default()).unwrap();
    for a in &s.anchors {
        assert!(a.iter().any(|x| x.abs() < 1e-9) && a.iter().any(|x| (x - 1.0).abs() < 1e-9), "{a:?}");
    }
}

#[test]
fn sigma_examples() {
    let e = prop_example(0.0);
    let low = Shadow::uniform(GammaRepresentation::PointMassAtLow, 1);
    assert_eq!(sigma(&e, &low, 0.0), 0.0);
    assert_abs_diff_eq!(sigma(&e, &low, 0.1), 1.1 * 1.1f64.ln() - 0.1, epsilon = 1e-15);
    assert_abs_diff_eq!(sigma(&e, &low, 0.1), 0.004841, epsilon = 1e-6);
    // γ = F at the realized type cancels the rent term
    let cdf = Shadow::uniform(GammaRepresentation::Constant { gamma: unif().cdf(0.8) }, 1);
    let g = 0.7;
    assert_abs_diff_eq!(sigma(&e, &cdf, g), (0.5 + 0.8) * e.phi(g) - g, epsilon = 1e-12);
}

#[test]
fn xi_examples() {
    let tech = Technology::log();
    assert_abs_diff_eq!(tech.xi(1.1).unwrap(), 0.1, epsilon = 1e-12);
    assert_abs_diff_eq!(tech.xi(2.1).unwrap(), 1.1, epsilon = 1e-12);
    assert_eq!(tech.xi(0.9).unwrap(), 0.0);
    let low = Shadow::uniform(GammaRepresentation::PointMassAtLow, 1);
    assert_abs_diff_eq!(xi_argmax(&prop_example(0.0), &low).unwrap(), 0.1, epsilon = 1e-12);
}

#[test]
fn efficient_level_examples() {
    assert_abs_diff_eq!(efficient_level(&prop_example(0.0)).unwrap(), 0.3, epsilon = 1e-12);
    let small = Economy::new(0.4, vec![0.5], unif(), Technology::log(), ReservationProfile::linear());
    assert_eq!(efficient_level(&small).unwrap(), 0.0);
    let sqrt = Economy::new(0.4, vec![0.6], unif(), Technology::power(0.5).unwrap(), ReservationProfile::linear());
    assert_abs_diff_eq!(efficient_level(&sqrt).unwrap(), 0.25, epsilon = 1e-10);
}

#[test]
fn gamma_star_examples() {
    let window = (0.0, 1.0);
    assert_eq!(gamma_star_constant(&quad(0.5, vec![0.5], 2.0, 0.0), window).unwrap(), 1.0);
    assert_eq!(gamma_star_constant(&quad(0.5, vec![0.5], 2.0, 1e6), window).unwrap(), 0.0);
    let e = quad(3.0, vec![0.5, 0.5], 8.0, 0.25f64.exp_m1());
    let g = gamma_star_constant(&e, window).unwrap();
    assert!(g > 0.0 && g < 1.0);
    let r = rent_residual(&e, &[g, g], 0, window, g).unwrap();
    assert!(r.abs() < 1e-8, "R(γ*) = {r}");
}

// regimes

#[test]
fn linear_unanimity_three_branches() {
    let s = solve_unanimity_linear(&prop_example(0.0)).unwrap();
    assert_abs_diff_eq!(s.g_star, 0.1, epsilon = 1e-10);
    assert_eq!(s.regime, Regime::UnderstateInterior);
    let s = solve_unanimity_linear(&prop_example(2.0)).unwrap();
    assert_abs_diff_eq!(s.g_star, 1.1, epsilon = 1e-10);
    assert_eq!(s.regime, Regime::OverstateInterior);
    let s = solve_unanimity_linear(&prop_example(0.5)).unwrap();
    assert_eq!(s.g_star, 0.5);
    assert_eq!(s.regime, Regime::OutsideOption);
}

#[test]
fn linear_majority_examples() {
    let full = Economy::new(0.5, vec![0.2, 0.8], unif(), Technology::log(), ReservationProfile::linear());
    assert_eq!(solve_majority_linear(&full).unwrap(), solve_unanimity_linear(&full).unwrap());

    let e = non_monotone_example();
    let s = solve_majority_linear(&e).unwrap();
    assert_eq!(s.coalition, vec![0, 2]);
    assert_eq!(s.excluded, vec![1]);
    assert_eq!(s.cutoff_types, vec![0.8]);
    assert_abs_diff_eq!(s.g_star, 0.5, epsilon = 1e-10);
    let plain = solve(&e, SolveOptions { cap: BunchingCap::None }).unwrap();
    assert_abs_diff_eq!(plain.g_star, 0.9, epsilon = 1e-10);

    let high = solve_majority_linear(&e.at_outside_g(50.0)).unwrap();
    assert_eq!(high.regime, Regime::OverstateInterior);
    assert_eq!(high.coalition, vec![0, 1]);
}

#[test]
fn general_unanimity_examples() {
    let lin = solve_unanimity_linear(&Economy::new(0.5, vec![0.8, 0.3], unif(), Technology::log(), ReservationProfile::linear())).unwrap();
    for b in [-0.7, 0.7] {
        let s = solve_unanimity_general(&quad(0.5, vec![0.8, 0.3], b, 0.0)).unwrap();
        assert_eq!(s.regime, Regime::UnderstateInterior);
        assert_abs_diff_eq!(s.g_star, lin.g_star, epsilon = 1e-12);
    }
    let e = quad(0.5, vec![0.8, 0.3], -0.5, 50.0);
    let s = solve_unanimity_general(&e).unwrap();
    assert_eq!(s.regime, Regime::OverstateInterior);
    assert!(s.gamma.iter().all(|g| *g == GammaRepresentation::PointMassAtHigh));

    let e = quad(3.0, vec![0.5], 8.0, 0.25f64.exp_m1());
    let s = solve_unanimity_general(&e).unwrap();
    let p = rent_profile(&e, &s, 1, 201).unwrap();
    assert!(p.rent[0].abs() < 1e-7 && p.rent[200].abs() < 1e-7);
    let floor = p.rent[0].min(p.rent[200]);
    assert!(p.rent.iter().all(|&r| r >= floor - 1e-12));
}

#[test]
fn general_majority_coalition_shapes() {
    let types = vec![0.15, 0.4, 0.6, 0.85];
    let s = solve(&quad(0.5, types.clone(), -0.9, 2.5).with_quota(3), SolveOptions::default()).unwrap();
    assert_eq!(s.coalition, vec![0, 1, 4]);
    assert_eq!(s.excluded, vec![2, 3]);
    let s = solve(&quad(1.5, types, 8.0, 0.3).with_quota(3), SolveOptions::default()).unwrap();
    assert_eq!(s.coalition, vec![0, 2, 3]);
    assert_eq!(s.excluded, vec![1, 4]);
}

#[test]
fn stochastic_coalition_examples() {
    let e = Economy::new(0.5, vec![0.2, 0.8, 0.5, 0.6], unif(), Technology::log(), ReservationProfile::linear()).with_quota(3);
    let a = solve_stochastic_coalition(&e, 9, 0.1).unwrap();
    assert_eq!(a, solve_stochastic_coalition(&e, 9, 0.1).unwrap());
    let free = solve_stochastic_coalition(&e, 9, 0.0).unwrap();
    let members = &free.scope.as_ref().unwrap().members;
    for id in 1..=e.r() {
        if !members.contains(&id) {
            assert_eq!(free.transfers[id], 0.0);
        }
    }
    assert!(free.transfers.iter().sum::<f64>() >= free.g_star - 1e-12);
    let full = e.clone().with_quota(5);
    let s = solve_stochastic_coalition(&full, 1, 0.2).unwrap();
    assert_eq!(s.g_star, solve(&full, SolveOptions::default()).unwrap().g_star);
}

#[test]
fn sweep_examples() {
    let e = prop_example(0.0);
    assert!(sweep_outside_option(&e, &[], SolveOptions::default()).unwrap().is_empty());
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
    let rows = sweep_outside_option(&e, &grid, SolveOptions::default()).unwrap();
    for (g0, s) in &rows {
        let expect = g0.clamp(0.1, 1.1);
        assert_abs_diff_eq!(s.g_star, expect, epsilon = 1e-10);
    }
}

// transfers

#[test]
fn transfer_anchor_examples() {
    let e = prop_example(0.0);
    let s = solve(&e, SolveOptions::default()).unwrap();
    // understate regime: the anchor is the bottom of the support
    let t0 = transfer_understate(&e, &s, 1, 0.0).unwrap();
    let mech = build_mechanism(&e, &s).unwrap();
    let g_lo = mech.allocation(&[0.0]);
    assert_abs_diff_eq!(0.0 * e.phi(g_lo) - t0 - e.v_bar(0.0), 0.0, epsilon = 1e-12);

    let e = prop_example(2.0);
    let s = solve(&e, SolveOptions::default()).unwrap();
    let t1 = transfer_overstate(&e, &s, 1, 1.0).unwrap();
    let g_hi = build_mechanism(&e, &s).unwrap().allocation(&[1.0]);
    assert_abs_diff_eq!(e.phi(g_hi) - t1 - e.v_bar(1.0), 0.0, epsilon = 1e-9);
    let p = rent_profile(&e, &s, 1, 101).unwrap();
    assert!(p.rent.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn constant_allocation_prices_at_the_anchor() {
    let e = non_monotone_example();
    let s = solve(&e, SolveOptions { cap: BunchingCap::None }).unwrap();
    let mech = build_mechanism(&e, &s).unwrap();
    let cut = s.cutoff_types[0];
    let g_bar = s.g_star;
    let t_cut = transfer_understate(&e, &s, 1, cut).unwrap();
    for x in [0.0, 0.1, 0.2, 0.5] {
        let mut r = e.types.clone();
        r[0] = x;
        assert_eq!(mech.allocation(&r), g_bar);
        assert_abs_diff_eq!(transfer_understate(&e, &s, 1, x).unwrap(), t_cut, epsilon = 1e-12);
    }
    // the excluded agent's window starts at the cutoff, which anchors the price
    assert_abs_diff_eq!(t_cut, cut * e.phi(g_bar) - e.v_bar(cut), epsilon = 1e-12);
}

#[test]
fn middle_branch_has_no_rent() {
    let e = prop_example(0.5);
    let s = solve(&e, SolveOptions::default()).unwrap();
    assert_abs_diff_eq!(s.slack(&e, 1), 0.0, epsilon = 1e-12);
    let mech = build_mechanism(&e, &s).unwrap();
    let r = check_participation(mech.as_ref(), &[0]);
    assert!(r.ir_report.iter().all(|x| x.slack.abs() < 1e-12));
}

#[test]
fn payoff_examples() {
    let e = prop_example(0.0);
    let s = solve(&e, SolveOptions::default()).unwrap();
    assert_abs_diff_eq!(s.virtual_surplus, 1.1 * 1.1f64.ln() - 0.1, epsilon = 1e-12);
    assert_abs_diff_eq!(agenda_setter_payoff(&e, &s), s.payoff, epsilon = 1e-12);

    let zero = Economy::new(0.1, vec![0.2], unif(), Technology::log(), ReservationProfile::linear());
    let s = solve(&zero, SolveOptions::default()).unwrap();
    assert_eq!(s.g_star, 0.0);
    assert!(s.transfers.iter().all(|t| t.abs() < 1e-15));
    assert_eq!(agenda_setter_payoff(&zero, &s), 0.0);

    for g0 in [0.0, 0.3, 0.8, 1.5] {
        let e = prop_example(g0);
        let s = solve(&e, SolveOptions::default()).unwrap();
        let outside = e.theta_a * e.phi(g0) - g0 / e.n as f64;
        assert!(s.payoff >= outside - 1e-12, "g°={g0}");
    }
}

// verify

#[test]
fn posted_outside_option_is_dsic() {
    let e = prop_example(0.5).with_types(vec![0.8, 0.3]).with_dists(vec![unif(), unif()]).with_population(3).with_quota(3);
    let m = DirectMechanism::new(e.clone(), AllocationRule::Posted { g: 0.5 }, vec![Window::Full; 2]);
    let r = check_dsic(&m, 41);
    assert!(r.dsic_ok && r.monotone_ok);
    for i in 0..2 {
        assert_abs_diff_eq!(m.transfer(i, &e.types), 0.5 / 3.0, epsilon = 1e-12);
    }
}

#[test]
fn understate_solution_has_no_profitable_deviation() {
    let e = prop_example(0.0);
    let s = solve(&e, SolveOptions::default()).unwrap();
    let r = check_dsic(build_mechanism(&e, &s).unwrap().as_ref(), 41);
    assert!(r.dsic_ok && r.monotone_ok, "{:?}", r.worst_deviation);
}

/// Provision falls when the single agent reports more.
struct Decreasing;

impl Mechanism for Decreasing {
    fn agents(&self) -> usize {
        1
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn realized(&self) -> &[f64] {
        &[0.5]
    }
    fn theta_a(&self) -> f64 {
        0.5
    }
    fn phi(&self, g: f64) -> f64 {
        g.ln_1p()
    }
    fn reservation(&self, _: usize, _: f64) -> f64 {
        0.0
    }
    fn allocation(&self, r: &[f64]) -> f64 {
        1.0 - r[0]
    }
    fn transfers_along(&self, _: usize, _: &[f64], own: &[f64]) -> Vec<f64> {
        vec![0.0; own.len()]
    }
}

#[test]
fn decreasing_allocation_is_flagged_with_its_location() {
    let r = check_dsic(&Decreasing, 11);
    assert!(!r.monotone_ok);
    let v = r.first_monotone_violation.unwrap();
    assert_eq!(v.agent, 0);
    assert_abs_diff_eq!(v.lower_report, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(v.upper_report, 0.1, epsilon = 1e-15);
    assert!(!r.dsic_ok);
}

#[test]
fn participation_examples() {
    let e = Economy::new(0.5, vec![0.8, 0.3, 0.6], unif(), Technology::log(), ReservationProfile::linear()).with_outside_g(0.2);
    let s = solve(&e, SolveOptions::default()).unwrap();
    let r = check_participation(build_mechanism(&e, &s).unwrap().as_ref(), &[0, 1, 2]);
    assert!(r.ir_ok && r.ir_report.iter().all(|x| x.slack >= -1e-8));

    let e = non_monotone_example();
    let s = solve(&e, SolveOptions { cap: BunchingCap::None }).unwrap();
    let r = check_participation(build_mechanism(&e, &s).unwrap().as_ref(), &[1]);
    let negative: Vec<usize> = r.ir_report.iter().filter(|x| x.slack < -1e-8).map(|x| x.agent + 1).collect();
    assert_eq!(negative, s.excluded);
    assert!(r.ir_ok);
}

#[test]
fn vcg_examples() {
    let e = Economy::new(0.5, vec![0.8, 0.7], unif(), Technology::log(), ReservationProfile::linear());
    let r = vcg_demo(&e, 1e-4).unwrap();
    assert_abs_diff_eq!(r.g_efficient, 1.0, epsilon = 1e-15);
    assert!(r.deficit > 0.0 && r.gain > 0.0);
    let half = vcg_demo(&e, 5e-5).unwrap();
    assert!(half.gain / half.epsilon <= r.gain / r.epsilon);
    assert_eq!(vcg_demo(&e, 0.0).unwrap().gain, 0.0);
}
