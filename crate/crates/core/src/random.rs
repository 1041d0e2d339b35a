//! Seeded generators for the property suites and the `--random` runs.
//!
//! Everything is drawn from a ChaCha stream, so one seed reproduces one
//! suite byte for byte.  Points are lattice points scaled by a common
//! denominator, masses are normalized positive integers, and both stay
//! exact rationals end to end.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::measure::{CostSpec, DiscreteMeasure, Instance, Point};
use crate::plan::TransportPlan;
use crate::rational::{rat, Rational};

/// The stream behind every random suite; one seed, one suite.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` distinct points on the lattice `(1/q) * {0..grid}^dim`.
fn random_points(rng: &mut impl Rng, count: usize, dim: usize, q: i64) -> Vec<Point> {
    // Twice as many slots per axis as points, so rejection is cheap.
    let grid = (2 * count) as i64;
    let mut seen = std::collections::BTreeSet::new();
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let coords: Vec<i64> = (0..dim).map(|_| rng.gen_range(0..=grid)).collect();
        if seen.insert(coords.clone()) {
            points.push(Point::new(
                coords.into_iter().map(|c| rat(c, q)).collect(),
            ));
        }
    }
    points
}

/// `count` positive masses summing to `total` exactly.
fn random_masses(rng: &mut impl Rng, count: usize, total: &Rational) -> Vec<Rational> {
    let weights: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=9)).collect();
    let sum: i64 = weights.iter().sum();
    weights.into_iter().map(|w| rat(w, sum) * total).collect()
}

/// A valid instance with `1..=max_m` source atoms, `1..=max_n` target
/// atoms, equal random totals, and a cost drawn from the three families
/// (plain distance, squared distance, explicit rational matrix).
pub fn random_instance(rng: &mut impl Rng, max_m: usize, max_n: usize) -> Instance {
    let m = rng.gen_range(1..=max_m);
    let n = rng.gen_range(1..=max_n);
    let dim = rng.gen_range(1..=3);
    let q = rng.gen_range(1..=3);
    let total = rat(rng.gen_range(1..=3), rng.gen_range(1..=2));
    let mu = DiscreteMeasure::new(
        random_points(rng, m, dim, q),
        random_masses(rng, m, &total),
    )
    .expect("generated source measure is valid");
    let nu = DiscreteMeasure::new(
        random_points(rng, n, dim, q),
        random_masses(rng, n, &total),
    )
    .expect("generated target measure is valid");
    let cost = match rng.gen_range(0..3) {
        0 => CostSpec::euclidean(rat(1, 1)).unwrap(),
        1 => CostSpec::euclidean(rat(2, 1)).unwrap(),
        _ => CostSpec::ExplicitMatrix {
            values: (0..m)
                .map(|_| (0..n).map(|_| rat(rng.gen_range(0..=12), 4)).collect())
                .collect(),
        },
    };
    Instance::new(mu, nu, cost).expect("generated instance is valid")
}

/// A forest-supported plan covering every row and column: arcs are
/// accepted in shuffled order while they keep the support acyclic,
/// stopping once each node carries mass.
pub fn random_forest_plan(rng: &mut impl Rng, max_m: usize, max_n: usize) -> TransportPlan {
    let m = rng.gen_range(1..=max_m);
    let n = rng.gen_range(1..=max_n);
    let mut arcs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .collect();
    arcs.shuffle(rng);
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut row_covered = vec![false; m];
    let mut col_covered = vec![false; n];
    let mut uncovered = m + n;
    let mut entries = Vec::new();
    for (i, j) in arcs {
        let (a, b) = (root(&mut parent, i), root(&mut parent, m + j));
        if a == b {
            continue;
        }
        parent[a] = b;
        if !std::mem::replace(&mut row_covered[i], true) {
            uncovered -= 1;
        }
        if !std::mem::replace(&mut col_covered[j], true) {
            uncovered -= 1;
        }
        entries.push((i, j, rat(rng.gen_range(1..=9), 12)));
        if uncovered == 0 {
            break;
        }
    }
    let plan = TransportPlan::new(m, n, entries).expect("generated entries are positive");
    debug_assert!(plan.is_forest());
    plan
}

/// Two unit point masses on distinct points, plain-distance cost.
pub fn random_singleton_pair(rng: &mut impl Rng) -> Instance {
    let dim = rng.gen_range(1..=3);
    let points = random_points(rng, 2, dim, 1);
    let atom = |p: &Point| {
        DiscreteMeasure::new(vec![p.clone()], vec![rat(1, 1)]).expect("unit atom is valid")
    };
    Instance::new(
        atom(&points[0]),
        atom(&points[1]),
        CostSpec::euclidean(rat(1, 1)).unwrap(),
    )
    .expect("singleton instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_seed_reproduces_one_instance() {
        let a = random_instance(&mut rng(7), 6, 6);
        let b = random_instance(&mut rng(7), 6, 6);
        assert_eq!(a, b);
        let c = random_instance(&mut rng(8), 6, 6);
        assert!(a != c, "different seeds should diverge");
    }

    #[test]
    fn instances_validate_and_balance() {
        let mut r = rng(42);
        for _ in 0..50 {
            let instance = random_instance(&mut r, 8, 8);
            assert_eq!(instance.mu().total_mass(), instance.nu().total_mass());
            assert!(instance.m() >= 1 && instance.m() <= 8);
        }
    }

    #[test]
    fn forest_plans_cover_everything() {
        let mut r = rng(9);
        for _ in 0..50 {
            let plan = random_forest_plan(&mut r, 16, 16);
            assert!(plan.is_forest());
            let (rows, cols) = plan.marginals();
            assert!(rows.iter().all(|mass| mass > &rat(0, 1)));
            assert!(cols.iter().all(|mass| mass > &rat(0, 1)));
        }
    }

    #[test]
    fn singleton_pairs_are_distinct_unit_atoms() {
        let mut r = rng(3);
        for _ in 0..20 {
            let pair = random_singleton_pair(&mut r);
            assert_eq!(pair.m(), 1);
            assert_eq!(pair.n(), 1);
            assert_eq!(pair.mu().total_mass(), rat(1, 1));
            assert!(pair.mu().points()[0] != pair.nu().points()[0]);
        }
    }
}
