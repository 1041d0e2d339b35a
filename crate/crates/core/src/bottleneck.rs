//! Exact bottleneck transport: the smallest cost threshold whose arc
//! set still couples the two marginals.
//!
//! The infimum over plans of the largest support cost is attained at
//! one of the finitely many arc costs, so the search sorts the distinct
//! costs and binary-searches the smallest feasible one.  Feasibility of
//! a threshold is decided by an exact rational max-flow on the arcs at
//! or below it.  The certificate carries proof in both directions: a
//! witness plan at the threshold and, one distinct cost lower, the
//! saturated cut showing why that cheaper arc set cannot carry the
//! mass.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::Instance;
use crate::plan::TransportPlan;
use crate::rational::{format_rational, Rational};
use crate::scalar::CostValue;

/// Row-count guard for the exhaustive subset oracle.
pub const HALL_ROW_GUARD: usize = 12;

/// Proof that no coupling exists using only arcs of cost at most
/// `threshold`: the listed rows can reach only the listed columns,
/// which hold `deficit` less mass than the rows supply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfeasibilityCut {
    pub threshold: CostValue,
    /// Largest mass the restricted arc set can carry.
    pub max_flow: Rational,
    /// Shortfall against the total mass; equals the supply of `rows`
    /// minus the capacity of `cols`.
    pub deficit: Rational,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// The exact bottleneck value together with its two-sided proof.
///
/// `witness` couples the marginals and its largest support cost equals
/// `threshold` exactly; `below` is the infeasibility cut for the next
/// lower distinct cost, absent only when the threshold is the smallest
/// cost in the matrix.
#[derive(Debug, Clone)]
pub struct ThresholdCertificate {
    pub threshold: CostValue,
    /// Position of the threshold in the sorted distinct-cost list.
    pub threshold_index: usize,
    pub witness: TransportPlan,
    pub below: Option<InfeasibilityCut>,
}

struct FlowOutcome {
    value: Rational,
    arc_flow: Vec<Vec<Rational>>,
    reach_rows: Vec<bool>,
    reach_cols: Vec<bool>,
}

/// Edmonds-Karp max-flow on the network source -> rows -> cols -> sink
/// with supplies `mu`, demands `nu`, and unbounded capacity on the
/// `allowed` middle arcs, all in exact rationals.  Returns the final
/// flow and the residual-reachable node sets (the min cut).
fn max_flow(mu: &[Rational], nu: &[Rational], allowed: &[Vec<bool>]) -> FlowOutcome {
    let m = mu.len();
    let n = nu.len();
    let mut flow_src = vec![Rational::zero(); m];
    let mut flow_arc = vec![vec![Rational::zero(); n]; m];
    let mut flow_snk = vec![Rational::zero(); n];
    // Node ids: 0 source, 1..=m rows, m+1..=m+n cols, m+n+1 sink.
    let source = 0usize;
    let sink = m + n + 1;
    let reach = loop {
        let mut prev = vec![usize::MAX; m + n + 2];
        prev[source] = source;
        let mut queue = VecDeque::new();
        queue.push_back(source);
        'bfs: while let Some(node) = queue.pop_front() {
            if node == source {
                for i in 0..m {
                    if prev[1 + i] == usize::MAX && flow_src[i] < mu[i] {
                        prev[1 + i] = source;
                        queue.push_back(1 + i);
                    }
                }
            } else if node <= m {
                let i = node - 1;
                for j in 0..n {
                    if allowed[i][j] && prev[m + 1 + j] == usize::MAX {
                        prev[m + 1 + j] = node;
                        queue.push_back(m + 1 + j);
                    }
                }
            } else {
                let j = node - m - 1;
                if flow_snk[j] < nu[j] {
                    prev[sink] = node;
                    break 'bfs;
                }
                for i in 0..m {
                    if prev[1 + i] == usize::MAX && flow_arc[i][j].is_positive() {
                        prev[1 + i] = node;
                        queue.push_back(1 + i);
                    }
                }
            }
        }
        if prev[sink] == usize::MAX {
            break prev;
        }
        // Bottleneck residual along the augmenting path; middle arcs are
        // unbounded forward, so only source edges, sink edges, and
        // backward arcs constrain it.
        let mut delta: Option<Rational> = None;
        let mut tighten = |r: Rational| {
            if delta.as_ref().is_none_or(|d| r < *d) {
                delta = Some(r);
            }
        };
        let mut node = sink;
        while node != source {
            let parent = prev[node];
            if node == sink {
                let j = parent - m - 1;
                tighten(&nu[j] - &flow_snk[j]);
            } else if node <= m && parent != source {
                let (i, j) = (node - 1, parent - m - 1);
                tighten(flow_arc[i][j].clone());
            } else if node <= m {
                tighten(&mu[node - 1] - &flow_src[node - 1]);
            }
            node = parent;
        }
        let delta = delta.expect("augmenting path has a finite edge");
        let mut node = sink;
        while node != source {
            let parent = prev[node];
            if node == sink {
                flow_snk[parent - m - 1] += &delta;
            } else if node <= m && parent != source {
                // Backward traversal cancels flow on the arc.
                flow_arc[node - 1][parent - m - 1] -= &delta;
            } else if node <= m {
                flow_src[node - 1] += &delta;
            } else {
                flow_arc[parent - 1][node - m - 1] += &delta;
            }
            node = parent;
        }
    };
    FlowOutcome {
        value: flow_src.iter().sum(),
        arc_flow: flow_arc,
        reach_rows: (0..m).map(|i| reach[1 + i] != usize::MAX).collect(),
        reach_cols: (0..n).map(|j| reach[m + 1 + j] != usize::MAX).collect(),
    }
}

/// Bottleneck certificate for explicit marginal masses and a cost
/// matrix; shared by the public entry points so that rescaled cost
/// matrices reuse the same search.
pub(crate) fn w_infinity_on(
    mu: &[Rational],
    nu: &[Rational],
    costs: &[Vec<CostValue>],
) -> ThresholdCertificate {
    let m = mu.len();
    let n = nu.len();
    let mut distinct: Vec<CostValue> = costs.iter().flatten().cloned().collect();
    distinct.sort();
    distinct.dedup();
    // rank[i][j]: position of the arc cost among the distinct costs, so
    // threshold tests are integer comparisons.
    let rank: Vec<Vec<usize>> = costs
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| distinct.binary_search(c).expect("cost is in its own list"))
                .collect()
        })
        .collect();
    let feasibility = |k: usize| -> FlowOutcome {
        let allowed: Vec<Vec<bool>> = rank
            .iter()
            .map(|row| row.iter().map(|&r| r <= k).collect())
            .collect();
        max_flow(mu, nu, &allowed)
    };
    let total: Rational = mu.iter().sum();
    // Feasibility is monotone in the threshold and the full arc set is
    // always feasible, so the smallest feasible index exists.
    let (mut lo, mut hi) = (0usize, distinct.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasibility(mid).value == total {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let outcome = feasibility(lo);
    debug_assert_eq!(outcome.value, total);
    let mut atoms = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if outcome.arc_flow[i][j].is_positive() {
                atoms.push((i, j, outcome.arc_flow[i][j].clone()));
            }
        }
    }
    let witness = TransportPlan::from_atoms(m, n, atoms);
    // A witness avoiding every rank-lo arc would be feasible one step
    // lower, contradicting minimality of lo.
    debug_assert_eq!(
        witness.entries().iter().map(|e| rank[e.row][e.col]).max(),
        Some(lo)
    );
    let below = if lo == 0 {
        None
    } else {
        let fail = feasibility(lo - 1);
        let rows: Vec<usize> = (0..m).filter(|&i| fail.reach_rows[i]).collect();
        let cols: Vec<usize> = (0..n).filter(|&j| fail.reach_cols[j]).collect();
        let deficit = &total - &fail.value;
        debug_assert!(deficit.is_positive());
        // Min-cut identity: the reachable rows supply exactly `deficit`
        // more than the columns they can reach hold.
        debug_assert_eq!(
            rows.iter().map(|&i| mu[i].clone()).sum::<Rational>()
                - cols.iter().map(|&j| nu[j].clone()).sum::<Rational>(),
            deficit
        );
        Some(InfeasibilityCut {
            threshold: distinct[lo - 1].clone(),
            max_flow: fail.value,
            deficit,
            rows,
            cols,
        })
    };
    ThresholdCertificate {
        threshold: distinct[lo].clone(),
        threshold_index: lo,
        witness,
        below,
    }
}

/// Exact bottleneck value of the instance with a two-sided certificate.
pub fn w_infinity(instance: &Instance) -> ThresholdCertificate {
    w_infinity_on(
        instance.mu().masses(),
        instance.nu().masses(),
        &instance.cost_matrix(),
    )
}

/// Independent oracle for [`w_infinity`]: scans the distinct costs in
/// increasing order and accepts the first threshold whose arc set
/// satisfies every subset inequality (each set of rows must see enough
/// column mass through the allowed arcs).  Exponential in the number of
/// rows, hence guarded.
pub fn w_infinity_bruteforce(instance: &Instance) -> Result<CostValue> {
    let m = instance.m();
    if m > HALL_ROW_GUARD {
        return Err(Error::InstanceTooLarge {
            operation: "w_infinity_bruteforce",
            size: m,
            guard: HALL_ROW_GUARD,
        });
    }
    let n = instance.n();
    let mu = instance.mu().masses();
    let nu = instance.nu().masses();
    let costs = instance.cost_matrix();
    let mut distinct: Vec<CostValue> = costs.iter().flatten().cloned().collect();
    distinct.sort();
    distinct.dedup();
    let full = 1usize << m;
    // Subset supply sums, built over the lowest set bit.
    let mut mu_sum = vec![Rational::zero(); full];
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        mu_sum[mask] = &mu_sum[mask & (mask - 1)] + &mu[low];
    }
    let words = n.div_ceil(64);
    for t in &distinct {
        // Columns visible from each row through arcs of cost <= t, as
        // bitsets; subset unions again extend over the lowest bit.
        let row_nb: Vec<Vec<u64>> = (0..m)
            .map(|i| {
                let mut bits = vec![0u64; words];
                for j in 0..n {
                    if costs[i][j] <= *t {
                        bits[j / 64] |= 1 << (j % 64);
                    }
                }
                bits
            })
            .collect();
        let mut union_nb: Vec<Vec<u64>> = vec![vec![0u64; words]; full];
        let mut feasible = true;
        'subsets: for mask in 1..full {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let bits: Vec<u64> = union_nb[rest]
                .iter()
                .zip(&row_nb[low])
                .map(|(a, b)| a | b)
                .collect();
            let mut visible = Rational::zero();
            for j in 0..n {
                if bits[j / 64] >> (j % 64) & 1 == 1 {
                    visible += &nu[j];
                }
            }
            union_nb[mask] = bits;
            if mu_sum[mask] > visible {
                feasible = false;
                break 'subsets;
            }
        }
        if feasible {
            return Ok(t.clone());
        }
    }
    unreachable!("the largest cost admits every arc and so every subset inequality")
}

/// Outcome of checking that powering the costs powers the bottleneck.
#[derive(Debug, Clone)]
pub struct PowerIdentityReport {
    pub p: Rational,
    pub base_threshold: CostValue,
    pub base_index: usize,
    pub powered_threshold: CostValue,
    pub powered_index: usize,
    /// The optimal threshold sits at the same position in both sorted
    /// distinct-cost lists.
    pub index_match: bool,
    /// The powered threshold equals the base threshold raised to `p`.
    pub value_match: bool,
}

impl PowerIdentityReport {
    pub fn holds(&self) -> bool {
        self.index_match && self.value_match
    }
}

/// Raises every arc cost to the power `p > 0` and checks that the
/// bottleneck threshold moves to the p-th power of the base threshold
/// while keeping its position in the sorted distinct-cost list.  The
/// position check is the stronger statement: any strictly increasing
/// transform of the costs preserves which arc sets are feasible.
///
/// Fails when some arc cost has no exactly representable `p`-th power.
pub fn power_identity_check(instance: &Instance, p: &Rational) -> Result<PowerIdentityReport> {
    if !p.is_positive() {
        return Err(Error::InvalidP(format!(
            "{} is not a positive exponent",
            format_rational(p)
        )));
    }
    let mu = instance.mu().masses();
    let nu = instance.nu().masses();
    let costs = instance.cost_matrix();
    let base = w_infinity_on(mu, nu, &costs);
    let powered_costs: Vec<Vec<CostValue>> = costs
        .iter()
        .map(|row| row.iter().map(|c| c.pow(p)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let powered = w_infinity_on(mu, nu, &powered_costs);
    let expected = base.threshold.pow(p)?;
    Ok(PowerIdentityReport {
        p: p.clone(),
        base_threshold: base.threshold,
        base_index: base.threshold_index,
        powered_threshold: powered.threshold.clone(),
        powered_index: powered.threshold_index,
        index_match: base.threshold_index == powered.threshold_index,
        value_match: powered.threshold == expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{CostSpec, DiscreteMeasure, Point};
    use crate::rational::rat;

    fn line_instance(
        xs: &[i64],
        mu: &[(i64, i64)],
        ys: &[i64],
        nu: &[(i64, i64)],
        p: i64,
    ) -> Instance {
        let points = |cs: &[i64]| cs.iter().map(|&c| Point::from_ints(&[c])).collect();
        let masses = |ms: &[(i64, i64)]| ms.iter().map(|&(n, d)| rat(n, d)).collect();
        Instance::new(
            DiscreteMeasure::new(points(xs), masses(mu)).unwrap(),
            DiscreteMeasure::new(points(ys), masses(nu)).unwrap(),
            CostSpec::euclidean(rat(p, 1)).unwrap(),
        )
        .unwrap()
    }

    fn two_atom_family(eps_num: i64, eps_den: i64, p: i64) -> Instance {
        line_instance(
            &[0, 1],
            &[(1, 2), (1, 2)],
            &[0, 1],
            &[(eps_den - eps_num, 2 * eps_den), (eps_den + eps_num, 2 * eps_den)],
            p,
        )
    }

    #[test]
    fn two_atom_threshold_is_one_with_cut_below() {
        let instance = two_atom_family(1, 2, 2);
        let cert = w_infinity(&instance);
        assert_eq!(cert.threshold, CostValue::from_int(1));
        assert_eq!(cert.threshold_index, 1);
        assert!(cert.witness.is_coupling_of(&instance));
        let cut = cert.below.expect("index 1 has a lower threshold");
        assert_eq!(cut.threshold, CostValue::zero());
        assert_eq!(cut.max_flow, rat(3, 4));
        assert_eq!(cut.deficit, rat(1, 4));
        assert_eq!(cut.rows, vec![0]);
        assert_eq!(cut.cols, vec![0]);
    }

    #[test]
    fn identical_marginals_reach_threshold_zero() {
        let instance = line_instance(&[0, 5], &[(1, 3), (2, 3)], &[0, 5], &[(1, 3), (2, 3)], 2);
        let cert = w_infinity(&instance);
        assert_eq!(cert.threshold, CostValue::zero());
        assert_eq!(cert.threshold_index, 0);
        assert!(cert.below.is_none());
        assert_eq!(cert.witness.support_size(), 2);
        assert_eq!(*cert.witness.mass_at(0, 0).unwrap(), rat(1, 3));
    }

    #[test]
    fn singleton_threshold_is_the_distance() {
        let instance = line_instance(&[0], &[(1, 1)], &[3], &[(1, 1)], 1);
        let cert = w_infinity(&instance);
        assert_eq!(cert.threshold, CostValue::from_int(3));
        assert_eq!(cert.witness.support_size(), 1);
        assert_eq!(
            w_infinity_bruteforce(&instance).unwrap(),
            CostValue::from_int(3)
        );
    }

    #[test]
    fn witness_max_cost_equals_threshold() {
        let instance = line_instance(
            &[0, 2, 7],
            &[(1, 2), (1, 4), (1, 4)],
            &[1, 3, 6],
            &[(1, 4), (1, 4), (1, 2)],
            1,
        );
        let cert = w_infinity(&instance);
        let costs = instance.cost_matrix();
        let max = cert
            .witness
            .entries()
            .iter()
            .map(|e| costs[e.row][e.col].clone())
            .max()
            .unwrap();
        assert_eq!(max, cert.threshold);
    }

    #[test]
    fn oracle_agrees_on_small_instances() {
        let cases = [
            two_atom_family(1, 2, 2),
            two_atom_family(1, 4, 2),
            line_instance(
                &[0, 2, 7],
                &[(1, 2), (1, 4), (1, 4)],
                &[1, 3, 6],
                &[(1, 4), (1, 4), (1, 2)],
                1,
            ),
            line_instance(&[0, 1, 4, 9], &[(1, 4); 4], &[2, 3, 5, 8], &[(1, 4); 4], 2),
        ];
        for instance in &cases {
            assert_eq!(
                w_infinity(instance).threshold,
                w_infinity_bruteforce(instance).unwrap()
            );
        }
    }

    #[test]
    fn oracle_guard_rejects_wide_instances() {
        let xs: Vec<i64> = (0..13).collect();
        let masses = vec![(1, 13); 13];
        let instance = line_instance(&xs, &masses, &xs, &masses, 1);
        assert!(matches!(
            w_infinity_bruteforce(&instance),
            Err(Error::InstanceTooLarge {
                operation: "w_infinity_bruteforce",
                ..
            })
        ));
    }

    #[test]
    fn powering_costs_powers_the_threshold() {
        // Distances 1, sqrt(2), 2 exercise radical thresholds.
        let mu = DiscreteMeasure::new(
            vec![Point::from_ints(&[0, 0]), Point::from_ints(&[1, 1])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(
            vec![Point::from_ints(&[1, 0]), Point::from_ints(&[2, 1])],
            vec![rat(3, 4), rat(1, 4)],
        )
        .unwrap();
        let instance =
            Instance::new(mu, nu, CostSpec::euclidean(rat(1, 1)).unwrap()).unwrap();
        for p in [rat(2, 1), rat(3, 1)] {
            let report = power_identity_check(&instance, &p).unwrap();
            assert!(report.index_match, "index moved under p = {p}");
            assert!(report.value_match, "value mismatch under p = {p}");
        }
        let trivial = power_identity_check(&instance, &rat(1, 1)).unwrap();
        assert_eq!(trivial.base_threshold, trivial.powered_threshold);
        assert!(trivial.holds());
    }

    #[test]
    fn nonpositive_power_is_rejected() {
        let instance = two_atom_family(1, 2, 1);
        assert!(matches!(
            power_identity_check(&instance, &rat(0, 1)),
            Err(Error::InvalidP(_))
        ));
    }
}
