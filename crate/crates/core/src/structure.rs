//! Structure of forest-supported transport plans.
//!
//! [`decompose`] rewrites a plan with acyclic support as a *diffusive
//! model*: two deterministic maps `h1`, `h2` and a four-way split of the
//! marginals such that
//!
//! ```text
//! plan = (id, h1)# mu_d  +  (h2, id)# nu_d
//! mu   = mu_d + mu_c,        mu_c = h2 # nu_d
//! nu   = nu_d + nu_c,        nu_c = h1 # mu_d
//! ```
//!
//! Every unit of mass is either *diffusive* (it leaves its atom along a
//! single arc chosen by the map) or *concentrated* (it stays put and is
//! consumed by a diffusive atom on the other side).  The construction
//! peels leaves of the support forest; each peel retires one atom and
//! one arc per side, so the model has at most `max(m, n)` steps.
//!
//! [`minimize_support`] shrinks an optimal plan towards minimal support
//! cardinality: it first cancels cycles through tight arcs (free, because
//! every support arc of an optimal plan is tight for any certifying dual)
//! and then explores zero-cost chord swaps with a bounded deterministic
//! plateau search.  The result is always an optimal forest plan; minimal
//! cardinality itself is certified separately by [`is_trim_certified`]
//! against the exhaustive oracle.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::{CostSpec, DiscreteMeasure, Instance};
use crate::plan::TransportPlan;
use crate::rational::Rational;
use crate::solver::{brute_force_optimal_guarded, certify_optimal, DualPotentials, ORACLE_CELL_GUARD};

/// Deterministic-map decomposition of a forest-supported plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffusiveModel {
    pub m: usize,
    pub n: usize,
    /// Diffusive part of the source; `h1` maps its support into columns.
    pub mu_d: BTreeMap<usize, Rational>,
    /// Concentrated part of the source, `h2 # nu_d`.
    pub mu_c: BTreeMap<usize, Rational>,
    /// Diffusive part of the target; `h2` maps its support into rows.
    pub nu_d: BTreeMap<usize, Rational>,
    /// Concentrated part of the target, `h1 # mu_d`.
    pub nu_c: BTreeMap<usize, Rational>,
    pub h1: BTreeMap<usize, usize>,
    pub h2: BTreeMap<usize, usize>,
}

impl DiffusiveModel {
    /// Number of diffusive atoms on both sides.
    pub fn diffusive_support(&self) -> usize {
        self.mu_d.len() + self.nu_d.len()
    }
}

/// Which rule fired at one peeling step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PeelBranch {
    /// Isolated arc with equal residuals; the row goes diffusive and the
    /// column absorbs it, retiring both.
    RowEquality { row: usize, col: usize },
    /// Mirror image of `RowEquality`; unreachable when masses are
    /// strictly positive because equality forces an isolated arc, which
    /// the row scan claims first.  Kept so the rule order is explicit.
    ColEquality { row: usize, col: usize },
    /// One strict row leaf and one strict column leaf peeled together;
    /// the two arcs are always distinct.
    Double {
        row_leaf: (usize, usize),
        col_leaf: (usize, usize),
    },
    /// Strict row leaf peeled alone because no column leaf exists.
    RowOnly { row: usize, col: usize },
    /// Strict column leaf peeled alone because no row leaf exists.
    ColOnly { row: usize, col: usize },
}

/// One step of the peel: the rule plus the residual marginals *after*
/// applying it (only atoms with positive residual are listed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelStep {
    pub branch: PeelBranch,
    pub residual_mu: Vec<(usize, Rational)>,
    pub residual_nu: Vec<(usize, Rational)>,
}

/// Full replayable record of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelTrace {
    pub steps: Vec<PeelStep>,
}

struct Peeler {
    mu: Vec<Rational>,
    nu: Vec<Rational>,
    /// Live arcs with stored plan masses.
    arcs: BTreeMap<(usize, usize), Rational>,
    row_adj: Vec<BTreeSet<usize>>,
    col_adj: Vec<BTreeSet<usize>>,
    model: DiffusiveModel,
    steps: Vec<PeelStep>,
}

impl Peeler {
    fn new(plan: &TransportPlan) -> Self {
        let (mu, nu) = plan.marginals();
        let mut arcs = BTreeMap::new();
        let mut row_adj = vec![BTreeSet::new(); plan.m()];
        let mut col_adj = vec![BTreeSet::new(); plan.n()];
        for e in plan.entries() {
            arcs.insert((e.row, e.col), e.mass.clone());
            row_adj[e.row].insert(e.col);
            col_adj[e.col].insert(e.row);
        }
        Peeler {
            mu,
            nu,
            arcs,
            row_adj,
            col_adj,
            model: DiffusiveModel {
                m: plan.m(),
                n: plan.n(),
                mu_d: BTreeMap::new(),
                mu_c: BTreeMap::new(),
                nu_d: BTreeMap::new(),
                nu_c: BTreeMap::new(),
                h1: BTreeMap::new(),
                h2: BTreeMap::new(),
            },
            steps: Vec::new(),
        }
    }

    /// Smallest row whose residual support is a single arc.
    fn row_leaf(&self) -> Option<(usize, usize)> {
        self.row_adj
            .iter()
            .enumerate()
            .find(|(_, adj)| adj.len() == 1)
            .map(|(row, adj)| (row, *adj.iter().next().expect("single arc")))
    }

    fn col_leaf(&self) -> Option<(usize, usize)> {
        self.col_adj
            .iter()
            .enumerate()
            .find(|(_, adj)| adj.len() == 1)
            .map(|(col, adj)| (*adj.iter().next().expect("single arc"), col))
    }

    fn remove_arc(&mut self, row: usize, col: usize) {
        self.arcs.remove(&(row, col));
        self.row_adj[row].remove(&col);
        self.col_adj[col].remove(&row);
    }

    /// Sends the entire residual of row leaf `row` along its arc.
    fn peel_row(&mut self, row: usize, col: usize) {
        let mass = std::mem::replace(&mut self.mu[row], Rational::zero());
        debug_assert!(mass.is_positive());
        debug_assert_eq!(Some(&mass), self.arcs.get(&(row, col)));
        self.model.mu_d.insert(row, mass.clone());
        self.model.h1.insert(row, col);
        *self
            .model
            .nu_c
            .entry(col)
            .or_insert_with(Rational::zero) += &mass;
        self.nu[col] -= &mass;
        self.remove_arc(row, col);
    }

    /// Sends the entire residual of column leaf `col` along its arc.
    fn peel_col(&mut self, row: usize, col: usize) {
        let mass = std::mem::replace(&mut self.nu[col], Rational::zero());
        debug_assert!(mass.is_positive());
        debug_assert_eq!(Some(&mass), self.arcs.get(&(row, col)));
        self.model.nu_d.insert(col, mass.clone());
        self.model.h2.insert(col, row);
        *self
            .model
            .mu_c
            .entry(row)
            .or_insert_with(Rational::zero) += &mass;
        self.mu[row] -= &mass;
        self.remove_arc(row, col);
    }

    fn snapshot(&mut self, branch: PeelBranch) {
        let residual = |v: &[Rational]| {
            v.iter()
                .enumerate()
                .filter(|(_, m)| m.is_positive())
                .map(|(i, m)| (i, m.clone()))
                .collect()
        };
        self.steps.push(PeelStep {
            branch,
            residual_mu: residual(&self.mu),
            residual_nu: residual(&self.nu),
        });
    }

    fn run(mut self) -> (DiffusiveModel, PeelTrace) {
        while !self.arcs.is_empty() {
            let row_leaf = self.row_leaf();
            let col_leaf = self.col_leaf();
            // Equality peels first: an equal-residual leaf arc is always
            // isolated, and retiring both ends keeps the counts right.
            if let Some((row, col)) = row_leaf {
                if self.mu[row] == self.nu[col] {
                    self.peel_row(row, col);
                    self.snapshot(PeelBranch::RowEquality { row, col });
                    continue;
                }
            }
            if let Some((row, col)) = col_leaf {
                if self.nu[col] == self.mu[row] {
                    self.peel_col(row, col);
                    self.snapshot(PeelBranch::ColEquality { row, col });
                    continue;
                }
            }
            match (row_leaf, col_leaf) {
                (Some((r1, c1)), Some((r2, c2))) => {
                    // Strict on both sides, so the arcs are distinct and
                    // both peels stay valid after either one.
                    debug_assert!((r1, c1) != (r2, c2));
                    self.peel_row(r1, c1);
                    self.peel_col(r2, c2);
                    self.snapshot(PeelBranch::Double {
                        row_leaf: (r1, c1),
                        col_leaf: (r2, c2),
                    });
                }
                (Some((row, col)), None) => {
                    self.peel_row(row, col);
                    self.snapshot(PeelBranch::RowOnly { row, col });
                }
                (None, Some((row, col))) => {
                    self.peel_col(row, col);
                    self.snapshot(PeelBranch::ColOnly { row, col });
                }
                (None, None) => unreachable!("a nonempty forest has a leaf"),
            }
        }
        debug_assert!(self.mu.iter().all(Rational::is_zero));
        debug_assert!(self.nu.iter().all(Rational::is_zero));
        (self.model, PeelTrace { steps: self.steps })
    }
}

/// Decomposes a forest-supported plan into a diffusive model by leaf
/// peeling, with a trace that replays every step.
///
/// Rule order at each step: equal-residual row leaf, equal-residual
/// column leaf, strict row and column leaf together, then whichever
/// single-sided leaf exists.  Leaves are chosen by smallest index, so
/// the output is deterministic.
pub fn decompose(plan: &TransportPlan) -> Result<(DiffusiveModel, PeelTrace)> {
    if plan.is_empty() {
        return Err(Error::EmptyPlan);
    }
    if let Some((row, col)) = plan.support_graph().find_cycle_edge() {
        return Err(Error::CyclicSupport { row, col });
    }
    Ok(Peeler::new(plan).run())
}

/// Rebuilds the plan a model describes:
/// `(id, h1)# mu_d + (h2, id)# nu_d`, merging coincident atoms.
pub fn reconstruct(model: &DiffusiveModel) -> Result<TransportPlan> {
    if model.mu_d.is_empty() && model.nu_d.is_empty() {
        return Err(Error::EmptyModel);
    }
    let check_keys = |map: &BTreeMap<usize, Rational>,
                      fun: &BTreeMap<usize, usize>,
                      side: &str|
     -> Result<()> {
        let map_keys: Vec<_> = map.keys().collect();
        let fun_keys: Vec<_> = fun.keys().collect();
        if map_keys != fun_keys {
            return Err(Error::Validation(format!(
                "{side} diffusive atoms and their map have different supports"
            )));
        }
        Ok(())
    };
    check_keys(&model.mu_d, &model.h1, "source")?;
    check_keys(&model.nu_d, &model.h2, "target")?;
    let mut atoms = Vec::new();
    for (&row, mass) in &model.mu_d {
        let col = model.h1[&row];
        if row >= model.m || col >= model.n {
            return Err(Error::Validation(format!(
                "map sends source atom {row} to out-of-range column {col}"
            )));
        }
        if !mass.is_positive() {
            return Err(Error::Validation(format!(
                "diffusive source atom {row} has nonpositive mass"
            )));
        }
        atoms.push((row, col, mass.clone()));
    }
    for (&col, mass) in &model.nu_d {
        let row = model.h2[&col];
        if row >= model.m || col >= model.n {
            return Err(Error::Validation(format!(
                "map sends target atom {col} to out-of-range row {row}"
            )));
        }
        if !mass.is_positive() {
            return Err(Error::Validation(format!(
                "diffusive target atom {col} has nonpositive mass"
            )));
        }
        atoms.push((row, col, mass.clone()));
    }
    Ok(TransportPlan::from_atoms(model.m, model.n, atoms))
}

/// Compacts a sub-plan onto its own marginals: builds the instance
/// whose measures are the sub-plan's positive row and column marginals
/// (points and costs inherited from the parent) and reindexes the plan
/// onto it.  This is how a restriction of a plan becomes a standalone
/// problem, e.g. to certify that the restriction is itself trim.
pub fn restriction_instance(
    part: &TransportPlan,
    instance: &Instance,
) -> Result<(Instance, TransportPlan)> {
    if part.is_empty() {
        return Err(Error::EmptyPlan);
    }
    if part.m() != instance.m() || part.n() != instance.n() {
        return Err(Error::DimensionMismatch(format!(
            "plan is {}x{} but the instance is {}x{}",
            part.m(),
            part.n(),
            instance.m(),
            instance.n()
        )));
    }
    let (row_mass, col_mass) = part.marginals();
    let rows: Vec<usize> = (0..part.m()).filter(|&i| row_mass[i].is_positive()).collect();
    let cols: Vec<usize> = (0..part.n()).filter(|&j| col_mass[j].is_positive()).collect();
    let pick = |measure: &DiscreteMeasure, keep: &[usize], mass: &[Rational]| {
        DiscreteMeasure::new(
            keep.iter().map(|&k| measure.points()[k].clone()).collect(),
            keep.iter().map(|&k| mass[k].clone()).collect(),
        )
    };
    let mu = pick(instance.mu(), &rows, &row_mass)?;
    let nu = pick(instance.nu(), &cols, &col_mass)?;
    let cost = match instance.cost() {
        CostSpec::EuclideanPower { p } => CostSpec::EuclideanPower { p: p.clone() },
        CostSpec::ExplicitMatrix { values } => CostSpec::ExplicitMatrix {
            values: rows
                .iter()
                .map(|&i| cols.iter().map(|&j| values[i][j].clone()).collect())
                .collect(),
        },
    };
    let sub = Instance::new(mu, nu, cost)?;
    let row_pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let col_pos: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(k, &j)| (j, k)).collect();
    let entries = part
        .entries()
        .iter()
        .map(|e| (row_pos[&e.row], col_pos[&e.col], e.mass.clone()))
        .collect();
    let reindexed = TransportPlan::new(rows.len(), cols.len(), entries)?;
    debug_assert!(reindexed.is_coupling_of(&sub));
    Ok((sub, reindexed))
}

/// Plateau states explored per support size before giving up.
const PLATEAU_BUDGET: usize = 256;

struct Reducer {
    m: usize,
    n: usize,
    /// Arcs with zero reduced cost under the certifying potentials;
    /// optimal plans can only use these.
    tight: Vec<(usize, usize)>,
}

impl Reducer {
    /// Pushes mass around `cycle` (alternating +,-,+,... from the first
    /// edge) until the tightest minus arc empties; returns the new
    /// support map.
    fn cancel_cycle(
        masses: &mut BTreeMap<(usize, usize), Rational>,
        cycle: &[(usize, usize)],
    ) {
        let mut delta: Option<Rational> = None;
        for (idx, arc) in cycle.iter().enumerate() {
            if idx % 2 == 1 {
                let f = &masses[arc];
                if delta.as_ref().is_none_or(|d| f < d) {
                    delta = Some(f.clone());
                }
            }
        }
        let delta = delta.expect("cycles alternate and are even");
        for (idx, arc) in cycle.iter().enumerate() {
            let entry = masses.get_mut(arc).expect("cycle arc in support");
            if idx % 2 == 1 {
                *entry -= &delta;
            } else {
                *entry += &delta;
            }
        }
        masses.retain(|_, f| !f.is_zero());
    }

    fn to_plan(&self, masses: &BTreeMap<(usize, usize), Rational>) -> TransportPlan {
        TransportPlan::new(
            self.m,
            self.n,
            masses.iter().map(|(&(i, j), f)| (i, j, f.clone())).collect(),
        )
        .expect("reduction preserves plan validity")
    }

    /// All swaps of one tight chord into the forest `masses`.  Each swap
    /// closes one cycle and pushes until an arc empties, so the result
    /// is again a forest with the same marginals and cost.
    fn chord_swaps(
        &self,
        masses: &BTreeMap<(usize, usize), Rational>,
    ) -> Vec<BTreeMap<(usize, usize), Rational>> {
        let mut out = Vec::new();
        let plan = self.to_plan(masses);
        let graph = plan.support_graph();
        for &(i, j) in &self.tight {
            if masses.contains_key(&(i, j)) {
                continue;
            }
            // Path from column j back to row i, if they are connected;
            // the chord then closes a cycle in which it is the plus arc.
            let path = tree_path(&graph, self.m, j, i);
            let path = match path {
                None => continue,
                Some(p) => p,
            };
            let mut cycle = Vec::with_capacity(path.len() + 1);
            cycle.push((i, j));
            cycle.extend(path);
            let mut next = masses.clone();
            next.insert((i, j), Rational::zero());
            Self::cancel_cycle(&mut next, &cycle);
            out.push(next);
        }
        out
    }
}

/// Walk from column node `col` to row node `row` inside the support
/// forest, as arcs in walk order; `None` when they are disconnected.
fn tree_path(
    graph: &crate::plan::SupportGraph,
    m: usize,
    col: usize,
    row: usize,
) -> Option<Vec<(usize, usize)>> {
    let edges = graph.edges();
    let start = m + col;
    let goal = row;
    let mut prev: BTreeMap<usize, (usize, usize, usize)> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start);
    queue.push_back(start);
    while let Some(node) = queue.pop_front() {
        if node == goal {
            break;
        }
        let incident: Vec<usize> = if node < m {
            graph.row_edge_indices(node).to_vec()
        } else {
            graph.col_edge_indices(node - m).to_vec()
        };
        for eidx in incident {
            let (er, ec) = edges[eidx];
            let other = if node < m { m + ec } else { er };
            if seen.insert(other) {
                prev.insert(other, (node, er, ec));
                queue.push_back(other);
            }
        }
    }
    if !seen.contains(&goal) {
        return None;
    }
    let mut arcs = Vec::new();
    let mut node = goal;
    while let Some(&(from, er, ec)) = prev.get(&node) {
        arcs.push((er, ec));
        node = from;
    }
    arcs.reverse();
    Some(arcs)
}

/// Reduces an optimal plan towards minimal support cardinality while
/// preserving optimality exactly.
///
/// The potentials must certify the plan optimal (see
/// [`certify_optimal`]); the reduction then stays within tight arcs, so
/// every intermediate plan is optimal with the same cost.  Phase one
/// cancels support cycles, which never increases cost and strictly
/// shrinks support.  Phase two tries zero-cost chord swaps, taking any
/// swap that empties two or more arcs and exploring equal-size plateaus
/// breadth-first with a fixed deterministic budget.  The result is an
/// optimal forest plan; it is usually, but not provably, of minimal
/// support cardinality.
pub fn minimize_support(
    plan: &TransportPlan,
    duals: &DualPotentials,
    instance: &Instance,
) -> Result<TransportPlan> {
    certify_optimal(plan, duals, instance)?;
    let costs = instance.cost_matrix();
    let mut tight = Vec::new();
    for (i, (row, ui)) in costs.iter().zip(&duals.u).enumerate() {
        for (j, (cost, vj)) in row.iter().zip(&duals.v).enumerate() {
            let reduced = &(cost - ui) - vj;
            if reduced.is_zero() {
                tight.push((i, j));
            }
        }
    }
    let reducer = Reducer {
        m: instance.m(),
        n: instance.n(),
        tight,
    };
    let mut masses: BTreeMap<(usize, usize), Rational> = plan
        .entries()
        .iter()
        .map(|e| ((e.row, e.col), e.mass.clone()))
        .collect();
    // Phase one: cancel cycles inside the support.
    loop {
        let current = reducer.to_plan(&masses);
        match current.support_graph().find_cycle() {
            None => break,
            Some(cycle) => Reducer::cancel_cycle(&mut masses, &cycle),
        }
    }
    // Phase two: plateau search over tight chord swaps.
    let mut best = masses.clone();
    let mut improved = true;
    while improved {
        improved = false;
        let mut visited: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
        let mut queue: VecDeque<BTreeMap<(usize, usize), Rational>> = VecDeque::new();
        let support: Vec<_> = best.keys().copied().collect();
        visited.insert(support);
        queue.push_back(best.clone());
        while let Some(state) = queue.pop_front() {
            for next in reducer.chord_swaps(&state) {
                if next.len() < best.len() {
                    best = next;
                    improved = true;
                    break;
                }
                if next.len() == state.len() && visited.len() < PLATEAU_BUDGET {
                    let support: Vec<_> = next.keys().copied().collect();
                    if visited.insert(support) {
                        queue.push_back(next);
                    }
                }
            }
            if improved {
                break;
            }
        }
    }
    let result = reducer.to_plan(&best);
    debug_assert!(result.is_forest());
    debug_assert!(result.is_coupling_of(instance));
    Ok(result)
}

/// Outcome of comparing a plan against the exhaustive oracle.
#[derive(Debug, Clone)]
pub enum TrimCertificate {
    /// Optimal and of minimal support cardinality among optimal plans.
    Trim,
    /// Optimal but not of minimal support; a strictly smaller optimal
    /// plan witnesses it.
    NotTrim { witness: TransportPlan },
    /// Instance exceeds the oracle guard; nothing can be certified.
    Unverifiable,
}

/// Certifies whether an optimal plan has minimal support cardinality,
/// using the exhaustive oracle under the given cell guard.
///
/// Fails with `NotOptimal` when the plan's cost exceeds the true optimum
/// (trimness is only defined for optimal plans).
pub fn is_trim_certified_guarded(
    plan: &TransportPlan,
    instance: &Instance,
    guard: usize,
) -> Result<TrimCertificate> {
    if !plan.is_coupling_of(instance) {
        return Err(Error::Validation(
            "plan marginals do not match the instance".into(),
        ));
    }
    let oracle = match brute_force_optimal_guarded(instance, guard) {
        Err(Error::InstanceTooLarge { .. }) => return Ok(TrimCertificate::Unverifiable),
        other => other?,
    };
    let cost = plan.transport_cost(instance)?;
    if cost != oracle.optimal_value {
        return Err(Error::NotOptimal(
            "plan cost differs from the exact optimum".into(),
        ));
    }
    if plan.support_size() == oracle.minimal_support {
        Ok(TrimCertificate::Trim)
    } else {
        let witness = oracle.minimal_support_plans[0].clone();
        Ok(TrimCertificate::NotTrim { witness })
    }
}

/// [`is_trim_certified_guarded`] with the default oracle guard.
pub fn is_trim_certified(plan: &TransportPlan, instance: &Instance) -> Result<TrimCertificate> {
    is_trim_certified_guarded(plan, instance, ORACLE_CELL_GUARD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{CostSpec, DiscreteMeasure, Point};
    use crate::rational::rat;
    use crate::solver::solve_optimal;

    fn plan(m: usize, n: usize, entries: &[(usize, usize, (i64, i64))]) -> TransportPlan {
        TransportPlan::new(
            m,
            n,
            entries
                .iter()
                .map(|&(i, j, (a, b))| (i, j, rat(a, b)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn restriction_compacts_onto_its_marginals() {
        let mu = DiscreteMeasure::new(
            vec![Point::from_ints(&[0]), Point::from_ints(&[5])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(
            vec![
                Point::from_ints(&[0]),
                Point::from_ints(&[4]),
                Point::from_ints(&[6]),
            ],
            vec![rat(1, 4), rat(1, 4), rat(1, 2)],
        )
        .unwrap();
        let instance = Instance::new(mu, nu, CostSpec::euclidean(rat(2, 1)).unwrap()).unwrap();
        let full = plan(2, 3, &[(0, 0, (1, 4)), (0, 1, (1, 4)), (1, 2, (1, 2))]);
        let part = full.restrict(&[(0, 0), (0, 1)]);
        let (sub, reindexed) = restriction_instance(&part, &instance).unwrap();
        assert_eq!(sub.m(), 1);
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.mu().masses(), &[rat(1, 2)]);
        assert_eq!(sub.nu().masses(), &[rat(1, 4), rat(1, 4)]);
        // Costs are inherited from the parent points: |0 - 4|^2 = 16.
        assert_eq!(sub.cost_value(0, 1), crate::scalar::CostValue::from_int(16));
        assert!(reindexed.is_coupling_of(&sub));
        assert_eq!(reindexed.support_size(), 2);

        let empty = full.restrict(&[]);
        assert!(matches!(
            restriction_instance(&empty, &instance),
            Err(Error::EmptyPlan)
        ));
    }

    #[test]
    fn rejects_empty_and_cyclic_plans() {
        let empty = TransportPlan::new(2, 2, vec![]).unwrap();
        assert!(matches!(decompose(&empty), Err(Error::EmptyPlan)));
        let cyclic = plan(
            2,
            2,
            &[(0, 0, (1, 4)), (0, 1, (1, 4)), (1, 0, (1, 4)), (1, 1, (1, 4))],
        );
        match decompose(&cyclic) {
            Err(Error::CyclicSupport { row: 1, col: 1 }) => {}
            other => panic!("expected cycle at (1, 1), got {other:?}"),
        }
    }

    #[test]
    fn single_arc_is_one_equality_peel() {
        let p = plan(1, 1, &[(0, 0, (1, 1))]);
        let (model, trace) = decompose(&p).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert!(matches!(
            trace.steps[0].branch,
            PeelBranch::RowEquality { row: 0, col: 0 }
        ));
        assert_eq!(model.mu_d[&0], rat(1, 1));
        assert_eq!(model.h1[&0], 0);
        assert_eq!(model.nu_c[&0], rat(1, 1));
        assert!(model.nu_d.is_empty());
        assert!(model.mu_c.is_empty());
        assert_eq!(reconstruct(&model).unwrap(), p);
    }

    #[test]
    fn decomposes_three_arc_path() {
        // mu = (1/2, 1/2), nu = (1/4, 3/4), support (0,0),(0,1),(1,1).
        let p = plan(2, 2, &[(0, 0, (1, 4)), (0, 1, (1, 4)), (1, 1, (1, 2))]);
        let (model, trace) = decompose(&p).unwrap();
        // Step 1: row leaf 1 and column leaf 0 peel together.
        assert!(matches!(
            trace.steps[0].branch,
            PeelBranch::Double {
                row_leaf: (1, 1),
                col_leaf: (0, 0)
            }
        ));
        // Step 2: the remaining isolated arc (0, 1) with equal residuals.
        assert!(matches!(
            trace.steps[1].branch,
            PeelBranch::RowEquality { row: 0, col: 1 }
        ));
        assert_eq!(trace.steps.len(), 2);
        let expect_mu_d: BTreeMap<usize, Rational> =
            [(0, rat(1, 4)), (1, rat(1, 2))].into_iter().collect();
        let expect_mu_c: BTreeMap<usize, Rational> = [(0, rat(1, 4))].into_iter().collect();
        let expect_nu_d: BTreeMap<usize, Rational> = [(0, rat(1, 4))].into_iter().collect();
        let expect_nu_c: BTreeMap<usize, Rational> = [(1, rat(3, 4))].into_iter().collect();
        assert_eq!(model.mu_d, expect_mu_d);
        assert_eq!(model.mu_c, expect_mu_c);
        assert_eq!(model.nu_d, expect_nu_d);
        assert_eq!(model.nu_c, expect_nu_c);
        assert_eq!(model.h1[&0], 1);
        assert_eq!(model.h1[&1], 1);
        assert_eq!(model.h2[&0], 0);
        // Residuals after step 1: mu_0 = 1/4 left, nu_1 = 1/4 left.
        assert_eq!(trace.steps[0].residual_mu, vec![(0, rat(1, 4))]);
        assert_eq!(trace.steps[0].residual_nu, vec![(1, rat(1, 4))]);
        assert!(trace.steps[1].residual_mu.is_empty());
        assert!(trace.steps[1].residual_nu.is_empty());
        assert_eq!(reconstruct(&model).unwrap(), p);
    }

    #[test]
    fn splits_add_up() {
        let p = plan(
            3,
            4,
            &[
                (0, 0, (1, 8)),
                (0, 1, (1, 8)),
                (1, 1, (1, 4)),
                (1, 2, (1, 8)),
                (2, 2, (1, 8)),
                (2, 3, (1, 4)),
            ],
        );
        let (model, _) = decompose(&p).unwrap();
        let (mu, nu) = p.marginals();
        for (i, mass) in mu.iter().enumerate() {
            let d = model.mu_d.get(&i).cloned().unwrap_or_else(Rational::zero);
            let c = model.mu_c.get(&i).cloned().unwrap_or_else(Rational::zero);
            assert_eq!(&(d + c), mass, "source split at {i}");
        }
        for (j, mass) in nu.iter().enumerate() {
            let d = model.nu_d.get(&j).cloned().unwrap_or_else(Rational::zero);
            let c = model.nu_c.get(&j).cloned().unwrap_or_else(Rational::zero);
            assert_eq!(&(d + c), mass, "target split at {j}");
        }
        assert_eq!(reconstruct(&model).unwrap(), p);
        // Pushforward identities: nu_c = h1 # mu_d, mu_c = h2 # nu_d.
        let mut pushed_nu: BTreeMap<usize, Rational> = BTreeMap::new();
        for (row, mass) in &model.mu_d {
            *pushed_nu
                .entry(model.h1[row])
                .or_insert_with(Rational::zero) += mass;
        }
        assert_eq!(pushed_nu, model.nu_c);
        let mut pushed_mu: BTreeMap<usize, Rational> = BTreeMap::new();
        for (col, mass) in &model.nu_d {
            *pushed_mu
                .entry(model.h2[col])
                .or_insert_with(Rational::zero) += mass;
        }
        assert_eq!(pushed_mu, model.mu_c);
    }

    #[test]
    fn single_sided_peels_cover_stars() {
        // One source feeding three sinks: only row 0 exists, never a row
        // leaf after the first peels; column leaves peel alone.
        let p = plan(1, 3, &[(0, 0, (1, 4)), (0, 1, (1, 4)), (0, 2, (1, 2))]);
        let (model, trace) = decompose(&p).unwrap();
        assert!(trace
            .steps
            .iter()
            .take(2)
            .all(|s| matches!(s.branch, PeelBranch::ColOnly { .. })));
        assert_eq!(reconstruct(&model).unwrap(), p);
        // Mirror: three sources, one sink.
        let q = plan(3, 1, &[(0, 0, (1, 4)), (1, 0, (1, 4)), (2, 0, (1, 2))]);
        let (model_q, trace_q) = decompose(&q).unwrap();
        assert!(trace_q
            .steps
            .iter()
            .take(2)
            .all(|s| matches!(s.branch, PeelBranch::RowOnly { .. })));
        assert_eq!(reconstruct(&model_q).unwrap(), q);
    }

    #[test]
    fn reconstruct_validates_models() {
        let p = plan(2, 2, &[(0, 0, (1, 2)), (1, 1, (1, 2))]);
        let (mut model, _) = decompose(&p).unwrap();
        assert_eq!(reconstruct(&model).unwrap(), p);
        model.h1.remove(&0);
        assert!(reconstruct(&model).is_err());
        let empty = DiffusiveModel {
            m: 1,
            n: 1,
            mu_d: BTreeMap::new(),
            mu_c: BTreeMap::new(),
            nu_d: BTreeMap::new(),
            nu_c: BTreeMap::new(),
            h1: BTreeMap::new(),
            h2: BTreeMap::new(),
        };
        assert!(matches!(reconstruct(&empty), Err(Error::EmptyModel)));
    }

    #[test]
    fn minimize_support_cancels_cycles() {
        // Uniform masses, all costs equal: the four-arc cycle plan is
        // optimal but reducible to a two-arc matching.
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
        let (_, duals) = solve_optimal(&inst);
        let cyclic = plan(
            2,
            2,
            &[(0, 0, (1, 4)), (0, 1, (1, 4)), (1, 0, (1, 4)), (1, 1, (1, 4))],
        );
        let reduced = minimize_support(&cyclic, &duals, &inst).unwrap();
        assert_eq!(reduced.support_size(), 2);
        assert!(reduced.is_coupling_of(&inst));
        assert!(matches!(
            is_trim_certified(&reduced, &inst).unwrap(),
            TrimCertificate::Trim
        ));
    }

    #[test]
    fn minimize_support_rejects_suboptimal_input() {
        let mu = DiscreteMeasure::new(
            vec![Point::from_ints(&[0]), Point::from_ints(&[1])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(
            vec![Point::from_ints(&[0]), Point::from_ints(&[1])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let inst =
            Instance::new(mu, nu, CostSpec::euclidean(rat(2, 1)).unwrap()).unwrap();
        let (_, duals) = solve_optimal(&inst);
        let crossed = plan(2, 2, &[(0, 1, (1, 2)), (1, 0, (1, 2))]);
        assert!(matches!(
            minimize_support(&crossed, &duals, &inst),
            Err(Error::NotOptimal(_))
        ));
    }

    #[test]
    fn trim_certificates_spot_reducible_plans() {
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
        let reducible = plan(
            2,
            2,
            &[(0, 0, (1, 4)), (0, 1, (1, 4)), (1, 0, (1, 4)), (1, 1, (1, 4))],
        );
        match is_trim_certified(&reducible, &inst).unwrap() {
            TrimCertificate::NotTrim { witness } => {
                assert_eq!(witness.support_size(), 2);
            }
            other => panic!("expected NotTrim, got {other:?}"),
        }
        let matching = plan(2, 2, &[(0, 0, (1, 2)), (1, 1, (1, 2))]);
        assert!(matches!(
            is_trim_certified(&matching, &inst).unwrap(),
            TrimCertificate::Trim
        ));
    }

    #[test]
    fn trim_check_requires_optimality() {
        let mu = DiscreteMeasure::new(
            vec![Point::from_ints(&[0]), Point::from_ints(&[1])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(
            vec![Point::from_ints(&[0]), Point::from_ints(&[1])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let inst =
            Instance::new(mu, nu, CostSpec::euclidean(rat(2, 1)).unwrap()).unwrap();
        let crossed = plan(2, 2, &[(0, 1, (1, 2)), (1, 0, (1, 2))]);
        assert!(matches!(
            is_trim_certified(&crossed, &inst),
            Err(Error::NotOptimal(_))
        ));
    }
}
