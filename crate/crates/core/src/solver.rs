//! Exact optimal transport solvers.
//!
//! [`solve_optimal`] runs a transportation simplex entirely in exact
//! arithmetic: a northwest-corner initial basis, Bland's smallest-index
//! anti-cycling rule for entering and leaving arcs, and tree-structured
//! dual potentials anchored at `u[0] = 0`.  Because reduced-cost signs
//! are decided exactly, the returned potentials are a genuine optimality
//! certificate, which [`certify_optimal`] checks independently.
//!
//! [`brute_force_optimal`] is a deliberately naive oracle for small
//! instances: it enumerates every vertex of the transportation polytope
//! (equivalently, every feasible plan with acyclic support that covers
//! all atoms) and reports the exact optimal value together with every
//! optimal plan of minimal support cardinality.  The two solvers share
//! no code, so agreement between them is meaningful evidence.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::Instance;
use crate::plan::TransportPlan;
use crate::rational::Rational;
use crate::scalar::CostValue;

/// Default cell-count guard for the exhaustive oracle.
pub const ORACLE_CELL_GUARD: usize = 30;

/// Dual solution `(u, v)` with `u[0] = 0`.
#[derive(Debug, Clone)]
pub struct DualPotentials {
    pub u: Vec<CostValue>,
    pub v: Vec<CostValue>,
}

/// Scalar the simplex pivots on.  Instances whose costs are all rational
/// run on plain rationals; anything with irrational costs runs on the
/// full radical representation.
trait SimplexScalar: Clone {
    fn diff(a: &Self, b: &Self) -> Self;
    fn negative(&self) -> bool;
    fn zero() -> Self;
    fn into_cost(self) -> CostValue;
}

impl SimplexScalar for Rational {
    fn diff(a: &Self, b: &Self) -> Self {
        a - b
    }
    fn negative(&self) -> bool {
        self.is_negative()
    }
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn into_cost(self) -> CostValue {
        CostValue::from_rational(self)
    }
}

impl SimplexScalar for CostValue {
    fn diff(a: &Self, b: &Self) -> Self {
        a - b
    }
    fn negative(&self) -> bool {
        self.sign() == std::cmp::Ordering::Less
    }
    fn zero() -> Self {
        CostValue::zero()
    }
    fn into_cost(self) -> CostValue {
        self
    }
}

struct Simplex<'a, T> {
    m: usize,
    n: usize,
    costs: Vec<Vec<T>>,
    mu: &'a [Rational],
    nu: &'a [Rational],
    /// Basic arcs with their flows; exactly `m + n - 1` arcs forming a
    /// spanning tree of the bipartite node set.
    basis: std::collections::BTreeMap<(usize, usize), Rational>,
}

impl<'a, T: SimplexScalar> Simplex<'a, T> {
    fn new(instance: &'a Instance, costs: Vec<Vec<T>>) -> Self {
        Simplex {
            m: instance.m(),
            n: instance.n(),
            costs,
            mu: instance.mu().masses(),
            nu: instance.nu().masses(),
            basis: std::collections::BTreeMap::new(),
        }
    }

    fn northwest_corner(&mut self) {
        let (mut i, mut j) = (0, 0);
        let mut row_left = self.mu[0].clone();
        let mut col_left = self.nu[0].clone();
        loop {
            let t = row_left.clone().min(col_left.clone());
            self.basis.insert((i, j), t.clone());
            row_left -= &t;
            col_left -= &t;
            if i == self.m - 1 && j == self.n - 1 {
                break;
            }
            // On simultaneous exhaustion move down only, leaving a
            // degenerate zero arc in the next row.
            if row_left.is_zero() && i < self.m - 1 {
                i += 1;
                row_left = self.mu[i].clone();
            } else {
                j += 1;
                col_left = self.nu[j].clone();
            }
        }
        debug_assert_eq!(self.basis.len(), self.m + self.n - 1);
    }

    /// Node indexing: rows are `0..m`, column `j` is `m + j`.
    fn tree_adjacency(&self) -> Vec<Vec<(usize, (usize, usize))>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for &(i, j) in self.basis.keys() {
            adj[i].push((self.m + j, (i, j)));
            adj[self.m + j].push((i, (i, j)));
        }
        adj
    }

    fn potentials(&self) -> (Vec<T>, Vec<T>) {
        let adj = self.tree_adjacency();
        let mut u: Vec<Option<T>> = vec![None; self.m];
        let mut v: Vec<Option<T>> = vec![None; self.n];
        u[0] = Some(T::zero());
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            for &(next, (i, j)) in &adj[node] {
                if next < self.m {
                    if u[next].is_none() {
                        let vj = v[j].as_ref().expect("visited endpoint has potential");
                        u[next] = Some(T::diff(&self.costs[i][j], vj));
                        stack.push(next);
                    }
                } else if v[next - self.m].is_none() {
                    let ui = u[i].as_ref().expect("visited endpoint has potential");
                    v[next - self.m] = Some(T::diff(&self.costs[i][j], ui));
                    stack.push(next);
                }
            }
        }
        (
            u.into_iter().map(|x| x.expect("spanning tree")).collect(),
            v.into_iter().map(|x| x.expect("spanning tree")).collect(),
        )
    }

    /// First non-basic arc in row-major order with negative reduced cost.
    fn entering_arc(&self, u: &[T], v: &[T]) -> Option<(usize, usize)> {
        for (i, (row, ui)) in self.costs.iter().zip(u).enumerate() {
            for (j, (cost, vj)) in row.iter().zip(v).enumerate() {
                if self.basis.contains_key(&(i, j)) {
                    continue;
                }
                let reduced = T::diff(&T::diff(cost, ui), vj);
                if reduced.negative() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Tree path from column node `col` to row node `row`, as basic arcs
    /// in walk order.
    fn tree_path(&self, col: usize, row: usize) -> Vec<(usize, usize)> {
        let adj = self.tree_adjacency();
        let total = self.m + self.n;
        let start = self.m + col;
        let mut prev: Vec<Option<(usize, (usize, usize))>> = vec![None; total];
        let mut seen = vec![false; total];
        let mut queue = std::collections::VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(node) = queue.pop_front() {
            if node == row {
                break;
            }
            for &(next, arc) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    prev[next] = Some((node, arc));
                    queue.push_back(next);
                }
            }
        }
        let mut edges = Vec::new();
        let mut node = row;
        while let Some((from, arc)) = prev[node] {
            edges.push(arc);
            node = from;
        }
        edges.reverse();
        edges
    }

    fn pivot(&mut self, entering: (usize, usize)) {
        let path = self.tree_path(entering.1, entering.0);
        // Walk order starts at the entering arc's column, so path arcs
        // alternate minus, plus, minus, ... relative to the entering
        // arc's plus.
        let mut minus_arcs = Vec::new();
        let mut plus_arcs = Vec::new();
        for (idx, &arc) in path.iter().enumerate() {
            if idx % 2 == 0 {
                minus_arcs.push(arc);
            } else {
                plus_arcs.push(arc);
            }
        }
        // Leaving arc: minimum flow among minus arcs, ties broken by
        // smallest (row, col) to keep Bland's rule intact.
        let mut delta: Option<Rational> = None;
        let mut leaving = minus_arcs[0];
        for &arc in &minus_arcs {
            let f = self.basis.get(&arc).expect("path arc is basic");
            let take = match &delta {
                None => true,
                Some(d) => f < d || (f == d && arc < leaving),
            };
            if take {
                delta = Some(f.clone());
                leaving = arc;
            }
        }
        let delta = delta.expect("cycle has a minus arc");
        for arc in minus_arcs {
            *self.basis.get_mut(&arc).expect("basic") -= &delta;
        }
        for arc in plus_arcs {
            *self.basis.get_mut(&arc).expect("basic") += &delta;
        }
        self.basis.remove(&leaving);
        self.basis.insert(entering, delta);
    }

    fn run(mut self) -> (TransportPlan, DualPotentials) {
        self.northwest_corner();
        loop {
            let (u, v) = self.potentials();
            match self.entering_arc(&u, &v) {
                None => {
                    let entries = self
                        .basis
                        .iter()
                        .filter(|(_, f)| f.is_positive())
                        .map(|(&(i, j), f)| (i, j, f.clone()))
                        .collect();
                    let plan = TransportPlan::new(self.m, self.n, entries)
                        .expect("basis flows form a valid plan");
                    let duals = DualPotentials {
                        u: u.into_iter().map(T::into_cost).collect(),
                        v: v.into_iter().map(T::into_cost).collect(),
                    };
                    return (plan, duals);
                }
                Some(arc) => self.pivot(arc),
            }
        }
    }
}

/// Exact optimal plan and certifying dual potentials.
///
/// The returned plan is the positive part of the final simplex basis, so
/// its support is acyclic with at most `m + n - 1` entries.
pub fn solve_optimal(instance: &Instance) -> (TransportPlan, DualPotentials) {
    let costs = instance.cost_matrix();
    let rational: Option<Vec<Vec<Rational>>> = costs
        .iter()
        .map(|row| row.iter().map(|c| c.as_rational().cloned()).collect())
        .collect();
    match rational {
        Some(rc) => Simplex::new(instance, rc).run(),
        None => Simplex::new(instance, costs).run(),
    }
}

/// Checks the optimality certificate: `plan` couples the instance
/// marginals, the potentials are dual feasible (`u_i + v_j <= c_ij`
/// everywhere), and complementary slackness holds on the support.
pub fn certify_optimal(
    plan: &TransportPlan,
    duals: &DualPotentials,
    instance: &Instance,
) -> Result<()> {
    if !plan.is_coupling_of(instance) {
        return Err(Error::NotOptimal(
            "plan marginals do not match the instance".into(),
        ));
    }
    if duals.u.len() != instance.m() || duals.v.len() != instance.n() {
        return Err(Error::DimensionMismatch(
            "potential vectors do not match the instance shape".into(),
        ));
    }
    let costs = instance.cost_matrix();
    for (i, (row, ui)) in costs.iter().zip(&duals.u).enumerate() {
        for (j, (cost, vj)) in row.iter().zip(&duals.v).enumerate() {
            let reduced = &(cost - ui) - vj;
            if reduced.sign() == std::cmp::Ordering::Less {
                return Err(Error::NotOptimal(format!(
                    "potentials are infeasible at ({i}, {j})"
                )));
            }
        }
    }
    for e in plan.entries() {
        let reduced = &(&costs[e.row][e.col] - &duals.u[e.row]) - &duals.v[e.col];
        if !reduced.is_zero() {
            return Err(Error::NotOptimal(format!(
                "support arc ({}, {}) is not tight",
                e.row, e.col
            )));
        }
    }
    Ok(())
}

/// Everything the exhaustive oracle learns about an instance.
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub optimal_value: CostValue,
    /// All optimal plans whose support cardinality equals `minimal_support`.
    pub minimal_support_plans: Vec<TransportPlan>,
    pub minimal_support: usize,
}

struct ForestSearch<'a> {
    m: usize,
    n: usize,
    costs: &'a [Vec<CostValue>],
    /// Masses scaled to integers by the common denominator.
    supply: Vec<BigInt>,
    demand: Vec<BigInt>,
    scale: BigInt,
    chosen: Vec<(usize, usize)>,
    row_deg: Vec<usize>,
    col_deg: Vec<usize>,
    best_value: Option<CostValue>,
    best_support: usize,
    best_plans: Vec<Vec<(usize, usize, BigInt)>>,
}

impl<'a> ForestSearch<'a> {
    /// Union-find over `m + n` nodes; cloned per inclusion because the
    /// node count is tiny under the guard.
    fn dsu_find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    fn recurse(&mut self, edge: usize, parent: &mut Vec<usize>) {
        let max_edges = self.m + self.n - 1;
        if edge == self.m * self.n {
            if self.col_deg.iter().all(|&d| d > 0) {
                self.evaluate_leaf();
            }
            return;
        }
        let (i, j) = (edge / self.n, edge % self.n);
        // Include the edge if it does not close a cycle.
        if self.chosen.len() < max_edges {
            let a = Self::dsu_find(parent, i);
            let b = Self::dsu_find(parent, self.m + j);
            if a != b {
                let mut child = parent.clone();
                child[a] = b;
                self.chosen.push((i, j));
                self.row_deg[i] += 1;
                self.col_deg[j] += 1;
                self.recurse(edge + 1, &mut child);
                self.row_deg[i] -= 1;
                self.col_deg[j] -= 1;
                self.chosen.pop();
            }
        }
        // Exclude the edge unless that abandons an uncovered row or the
        // last chance to cover a column.
        let last_in_row = j == self.n - 1;
        if last_in_row && self.row_deg[i] == 0 {
            return;
        }
        let last_chance_for_col = i == self.m - 1;
        if last_chance_for_col && self.col_deg[j] == 0 {
            return;
        }
        self.recurse(edge + 1, parent);
    }

    /// Solves the unique flow on the chosen forest by leaf peeling;
    /// keeps the plan only when every flow is strictly positive and all
    /// residuals balance.
    fn evaluate_leaf(&mut self) {
        let nodes = self.m + self.n;
        let mut degree = vec![0usize; nodes];
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for (idx, &(i, j)) in self.chosen.iter().enumerate() {
            degree[i] += 1;
            degree[self.m + j] += 1;
            incident[i].push(idx);
            incident[self.m + j].push(idx);
        }
        let mut residual: Vec<BigInt> = self
            .supply
            .iter()
            .chain(self.demand.iter())
            .cloned()
            .collect();
        let mut removed = vec![false; self.chosen.len()];
        let mut flows: Vec<BigInt> = vec![BigInt::zero(); self.chosen.len()];
        let mut queue: std::collections::VecDeque<usize> = (0..nodes)
            .filter(|&x| degree[x] == 1)
            .collect();
        let mut processed = 0;
        while let Some(node) = queue.pop_front() {
            if degree[node] != 1 {
                continue;
            }
            let eidx = *incident[node]
                .iter()
                .find(|&&e| !removed[e])
                .expect("degree-one node has a live edge");
            let (i, j) = self.chosen[eidx];
            let other = if node < self.m { self.m + j } else { i };
            let f = residual[node].clone();
            if !f.is_positive() {
                return;
            }
            flows[eidx] = f.clone();
            residual[node] -= &f;
            residual[other] -= &f;
            removed[eidx] = true;
            degree[node] -= 1;
            degree[other] -= 1;
            processed += 1;
            if degree[other] == 1 {
                queue.push_back(other);
            }
        }
        if processed != self.chosen.len() || residual.iter().any(|r| !r.is_zero()) {
            return;
        }
        let mut value = CostValue::zero();
        for (idx, &(i, j)) in self.chosen.iter().enumerate() {
            let w = Rational::from(flows[idx].clone());
            value = &value + &self.costs[i][j].scale(&w);
        }
        let support = self.chosen.len();
        let better_value = match &self.best_value {
            None => true,
            Some(best) => value < *best,
        };
        if better_value {
            self.best_value = Some(value);
            self.best_support = support;
            self.best_plans = vec![self.current_plan(&flows)];
            return;
        }
        if self.best_value.as_ref() == Some(&value) {
            match support.cmp(&self.best_support) {
                std::cmp::Ordering::Less => {
                    self.best_support = support;
                    self.best_plans = vec![self.current_plan(&flows)];
                }
                std::cmp::Ordering::Equal => {
                    self.best_plans.push(self.current_plan(&flows));
                }
                std::cmp::Ordering::Greater => {}
            }
        }
    }

    fn current_plan(&self, flows: &[BigInt]) -> Vec<(usize, usize, BigInt)> {
        self.chosen
            .iter()
            .zip(flows)
            .map(|(&(i, j), f)| (i, j, f.clone()))
            .collect()
    }
}

/// Exhaustive oracle: exact optimum plus all minimal-support optimal
/// plans, by enumerating every acyclic covering support and its unique
/// flow.  Guarded to `m * n <= guard` cells.
pub fn brute_force_optimal_guarded(
    instance: &Instance,
    guard: usize,
) -> Result<BruteForceResult> {
    let (m, n) = (instance.m(), instance.n());
    if m * n > guard {
        return Err(Error::InstanceTooLarge {
            operation: "brute_force_optimal",
            size: m * n,
            guard,
        });
    }
    let mut scale = BigInt::one();
    for mass in instance.mu().masses().iter().chain(instance.nu().masses()) {
        scale = scale.lcm(mass.denom());
    }
    let to_int = |mass: &Rational| -> BigInt {
        let scaled = mass * Rational::from(scale.clone());
        debug_assert!(scaled.denom().is_one());
        scaled.numer().clone()
    };
    let costs = instance.cost_matrix();
    let mut search = ForestSearch {
        m,
        n,
        costs: &costs,
        supply: instance.mu().masses().iter().map(to_int).collect(),
        demand: instance.nu().masses().iter().map(to_int).collect(),
        scale: scale.clone(),
        chosen: Vec::new(),
        row_deg: vec![0; m],
        col_deg: vec![0; n],
        best_value: None,
        best_support: usize::MAX,
        best_plans: Vec::new(),
    };
    let mut parent: Vec<usize> = (0..m + n).collect();
    search.recurse(0, &mut parent);
    let best_value = search
        .best_value
        .clone()
        .expect("balanced instances always admit a plan");
    let scale_rat = Rational::from(search.scale.clone());
    let optimal_value = best_value.scale(&(Rational::one() / &scale_rat));
    let minimal_support_plans = search
        .best_plans
        .iter()
        .map(|entries| {
            TransportPlan::new(
                m,
                n,
                entries
                    .iter()
                    .map(|(i, j, f)| (*i, *j, Rational::from(f.clone()) / &scale_rat))
                    .collect(),
            )
            .expect("oracle flows form a valid plan")
        })
        .collect();
    Ok(BruteForceResult {
        optimal_value,
        minimal_support_plans,
        minimal_support: search.best_support,
    })
}

/// [`brute_force_optimal_guarded`] with the default guard.
pub fn brute_force_optimal(instance: &Instance) -> Result<BruteForceResult> {
    brute_force_optimal_guarded(instance, ORACLE_CELL_GUARD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{CostSpec, DiscreteMeasure, Point};
    use crate::rational::rat;

    fn line_instance(
        mu: &[(i64, (i64, i64))],
        nu: &[(i64, (i64, i64))],
        p: (i64, i64),
    ) -> Instance {
        let mk = |atoms: &[(i64, (i64, i64))]| {
            DiscreteMeasure::new(
                atoms.iter().map(|&(x, _)| Point::from_ints(&[x])).collect(),
                atoms.iter().map(|&(_, (a, b))| rat(a, b)).collect(),
            )
            .unwrap()
        };
        Instance::new(mk(mu), mk(nu), CostSpec::euclidean(rat(p.0, p.1)).unwrap()).unwrap()
    }

    #[test]
    fn solves_singleton() {
        let inst = line_instance(&[(0, (1, 1))], &[(3, (1, 1))], (2, 1));
        let (plan, duals) = solve_optimal(&inst);
        assert_eq!(plan.support_size(), 1);
        assert_eq!(
            plan.transport_cost(&inst).unwrap().as_rational().unwrap(),
            &rat(9, 1)
        );
        certify_optimal(&plan, &duals, &inst).unwrap();
    }

    #[test]
    fn solves_two_point_shift() {
        // Half the mass stays, a quarter moves across one unit.
        let inst = line_instance(
            &[(0, (1, 2)), (1, (1, 2))],
            &[(0, (1, 4)), (1, (3, 4))],
            (2, 1),
        );
        let (plan, duals) = solve_optimal(&inst);
        certify_optimal(&plan, &duals, &inst).unwrap();
        let cost = plan.transport_cost(&inst).unwrap();
        assert_eq!(cost.as_rational().unwrap(), &rat(1, 4));
        assert!(plan.is_forest());
        assert!(plan.support_size() <= 3);
    }

    #[test]
    fn pivots_through_radical_costs() {
        // Costs 0, sqrt(2), 2, sqrt(2): optimum keeps matched pairs.
        let mu = DiscreteMeasure::new(
            vec![Point::from_ints(&[0, 0]), Point::from_ints(&[2, 0])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(
            vec![Point::from_ints(&[0, 0]), Point::from_ints(&[1, 1])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let inst = Instance::new(mu, nu, CostSpec::euclidean(rat(1, 1)).unwrap()).unwrap();
        let (plan, duals) = solve_optimal(&inst);
        certify_optimal(&plan, &duals, &inst).unwrap();
        let expect = CostValue::nth_root(&rat(2, 1), 2).unwrap().scale(&rat(1, 2));
        assert_eq!(plan.transport_cost(&inst).unwrap(), expect);
        assert_eq!(plan.support_size(), 2);
    }

    #[test]
    fn oracle_agrees_on_small_instances() {
        let inst = line_instance(
            &[(0, (1, 2)), (1, (1, 2))],
            &[(0, (1, 4)), (1, (3, 4))],
            (2, 1),
        );
        let oracle = brute_force_optimal(&inst).unwrap();
        assert_eq!(oracle.optimal_value.as_rational().unwrap(), &rat(1, 4));
        assert_eq!(oracle.minimal_support, 3);
        let (plan, _) = solve_optimal(&inst);
        assert_eq!(plan.transport_cost(&inst).unwrap(), oracle.optimal_value);
    }

    #[test]
    fn oracle_finds_matching_among_ties() {
        // Two sources, two sinks, all costs equal: minimal support is
        // the two diagonal matchings of support size two.
        let mu = DiscreteMeasure::new(
            vec![Point::from_ints(&[0]), Point::from_ints(&[1])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(
            vec![Point::from_ints(&[2]), Point::from_ints(&[3])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let cost = CostSpec::ExplicitMatrix {
            values: vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]],
        };
        let inst = Instance::new(mu, nu, cost).unwrap();
        let oracle = brute_force_optimal(&inst).unwrap();
        assert_eq!(oracle.optimal_value.as_rational().unwrap(), &rat(1, 1));
        assert_eq!(oracle.minimal_support, 2);
        assert_eq!(oracle.minimal_support_plans.len(), 2);
    }

    #[test]
    fn oracle_guard_rejects_large_instances() {
        let inst = line_instance(
            &[(0, (1, 6)), (1, (1, 6)), (2, (1, 6)), (3, (1, 6)), (4, (1, 6)), (5, (1, 6))],
            &[(6, (1, 6)), (7, (1, 6)), (8, (1, 6)), (9, (1, 6)), (10, (1, 6)), (11, (1, 6))],
            (2, 1),
        );
        match brute_force_optimal(&inst) {
            Err(Error::InstanceTooLarge { size, guard, .. }) => {
                assert_eq!(size, 36);
                assert_eq!(guard, 30);
            }
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn certify_rejects_wrong_plans() {
        let inst = line_instance(
            &[(0, (1, 2)), (1, (1, 2))],
            &[(0, (1, 4)), (1, (3, 4))],
            (2, 1),
        );
        let (plan, duals) = solve_optimal(&inst);
        certify_optimal(&plan, &duals, &inst).unwrap();
        // Feasible but suboptimal: cost 3/4 instead of 1/4, and arc
        // (1, 0) is not tight.
        let suboptimal = TransportPlan::new(
            2,
            2,
            vec![(0, 1, rat(1, 2)), (1, 0, rat(1, 4)), (1, 1, rat(1, 4))],
        )
        .unwrap();
        assert!(matches!(
            certify_optimal(&suboptimal, &duals, &inst),
            Err(Error::NotOptimal(_))
        ));
        let unbalanced = TransportPlan::new(2, 2, vec![(0, 0, rat(1, 1))]).unwrap();
        assert!(certify_optimal(&unbalanced, &duals, &inst).is_err());
    }
}
