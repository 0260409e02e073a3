#![allow(dead_code)]

use agenda_mech::model::{Economy, ReservationProfile, Technology, TypeDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn unif() -> TypeDistribution {
    TypeDistribution::uniform(0.0, 1.0).unwrap()
}

/// One-agent economy with θ_a = 0.5, θ = 0.8 uniform on [0, 1], φ = ln(1 + g).
pub fn prop_example(g0: f64) -> Economy {
    Economy::new(0.5, vec![0.8], unif(), Technology::log(), ReservationProfile::linear()).with_outside_g(g0)
}

/// Linear majority economy whose low threshold sits above its high threshold.
pub fn non_monotone_example() -> Economy {
    Economy::new(0.5, vec![0.2, 0.8], unif(), Technology::log(), ReservationProfile::linear()).with_quota(2)
}

fn random_dist(rng: &mut ChaCha8Rng) -> TypeDistribution {
    match rng.random_range(0..3) {
        0 => unif(),
        1 => TypeDistribution::truncated_exponential(0.0, 1.0, rng.random_range(-2.0..2.0)).unwrap(),
        _ => TypeDistribution::truncated_normal(0.0, 1.0, rng.random_range(0.2..0.8), rng.random_range(0.3..1.0)).unwrap(),
    }
}

/// Seeded corpus cycling through linear, concave and convex profiles with
/// 2 to 6 agents (agenda-setter included) and every quota from ⌈n/2⌉ to n.
pub fn corpus(seed: u64, count: usize) -> Vec<Economy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = rng.random_range(2..=6usize);
            let q = rng.random_range(n.div_ceil(2)..=n);
            let types: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.02..0.98)).collect();
            let res = match k % 3 {
                0 => ReservationProfile::linear(),
                1 => ReservationProfile::quadratic(rng.random_range(-0.9..-0.1)).unwrap(),
                _ => ReservationProfile::quadratic(rng.random_range(0.1..3.0)).unwrap(),
            };
            let tech = if rng.random_bool(0.7) { Technology::log() } else { Technology::power(rng.random_range(0.3..0.7)).unwrap() };
            let dist = random_dist(&mut rng);
            Economy::new(rng.random_range(0.2..1.5), types, dist, tech, res)
                .with_quota(q)
                .with_outside_g(rng.random_range(0.0..2.0))
        })
        .collect()
}
