//! Sparse transport plans and their support graphs.
//!
//! A [`TransportPlan`] is a list of `(row, col, mass)` entries with
//! strictly positive masses, kept sorted by `(row, col)`; zero entries
//! are never stored, so the entry list *is* the support.  The support
//! graph is the bipartite graph on row and column nodes with one edge
//! per entry; plans whose support graph is a forest have at most
//! `m + n - 1` entries and are exactly the plans the decomposition in
//! [`crate::structure`] accepts.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::Instance;
use crate::rational::{format_rational, Rational};
use crate::scalar::CostValue;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub row: usize,
    pub col: usize,
    pub mass: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportPlan {
    m: usize,
    n: usize,
    entries: Vec<PlanEntry>,
}

impl TransportPlan {
    /// Builds a plan from entries, rejecting out-of-range indices,
    /// nonpositive masses, and duplicate positions.
    pub fn new(m: usize, n: usize, entries: Vec<(usize, usize, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (row, col, mass) in entries {
            if row >= m || col >= n {
                return Err(Error::Validation(format!(
                    "entry ({row}, {col}) outside a {m} x {n} plan"
                )));
            }
            if !mass.is_positive() {
                return Err(Error::Validation(format!(
                    "entry ({row}, {col}) has nonpositive mass {}",
                    format_rational(&mass)
                )));
            }
            if map.insert((row, col), mass).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate entry at ({row}, {col})"
                )));
            }
        }
        Ok(Self::from_map(m, n, map))
    }

    /// Builds a plan by accumulating possibly repeated atoms; zero sums
    /// are dropped.  Panics on negative accumulated mass, which callers
    /// must rule out.
    pub fn from_atoms(m: usize, n: usize, atoms: Vec<(usize, usize, Rational)>) -> Self {
        let mut map: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (row, col, mass) in atoms {
            assert!(row < m && col < n, "atom ({row}, {col}) out of range");
            *map.entry((row, col)).or_insert_with(Rational::zero) += mass;
        }
        map.retain(|_, mass| !mass.is_zero());
        for ((row, col), mass) in &map {
            assert!(
                mass.is_positive(),
                "atom ({row}, {col}) accumulated to negative mass"
            );
        }
        Self::from_map(m, n, map)
    }

    fn from_map(m: usize, n: usize, map: BTreeMap<(usize, usize), Rational>) -> Self {
        let entries = map
            .into_iter()
            .map(|((row, col), mass)| PlanEntry { row, col, mass })
            .collect();
        TransportPlan { m, n, entries }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entries sorted by `(row, col)`.
    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass_at(&self, row: usize, col: usize) -> Option<&Rational> {
        self.entries
            .binary_search_by(|e| (e.row, e.col).cmp(&(row, col)))
            .ok()
            .map(|idx| &self.entries[idx].mass)
    }

    pub fn total_mass(&self) -> Rational {
        self.entries.iter().map(|e| &e.mass).sum()
    }

    /// Exact row and column sums, as full vectors of length `m` and `n`.
    pub fn marginals(&self) -> (Vec<Rational>, Vec<Rational>) {
        let mut rows = vec![Rational::zero(); self.m];
        let mut cols = vec![Rational::zero(); self.n];
        for e in &self.entries {
            rows[e.row] += &e.mass;
            cols[e.col] += &e.mass;
        }
        (rows, cols)
    }

    /// True when the plan transports `instance.mu()` to `instance.nu()`.
    pub fn is_coupling_of(&self, instance: &Instance) -> bool {
        if self.m != instance.m() || self.n != instance.n() {
            return false;
        }
        let (rows, cols) = self.marginals();
        rows == instance.mu().masses() && cols == instance.nu().masses()
    }

    /// The sub-plan with entries in `keep`; positions of `keep` outside
    /// the support contribute nothing.
    pub fn restrict(&self, keep: &[(usize, usize)]) -> TransportPlan {
        let keep: std::collections::BTreeSet<_> = keep.iter().copied().collect();
        let entries = self
            .entries
            .iter()
            .filter(|e| keep.contains(&(e.row, e.col)))
            .cloned()
            .collect();
        TransportPlan {
            m: self.m,
            n: self.n,
            entries,
        }
    }

    /// Exact transport cost `sum(mass * cost)` under the instance's cost.
    pub fn transport_cost(&self, instance: &Instance) -> Result<CostValue> {
        if self.m != instance.m() || self.n != instance.n() {
            return Err(Error::DimensionMismatch(format!(
                "plan is {} x {} but instance is {} x {}",
                self.m,
                self.n,
                instance.m(),
                instance.n()
            )));
        }
        let mut total = CostValue::zero();
        for e in &self.entries {
            total = &total + &instance.cost_value(e.row, e.col).scale(&e.mass);
        }
        Ok(total)
    }

    pub fn support_graph(&self) -> SupportGraph {
        SupportGraph::new(self)
    }

    /// True when the support graph is acyclic.
    pub fn is_forest(&self) -> bool {
        self.support_graph().find_cycle_edge().is_none()
    }
}

/// Bipartite support graph: node `r` for each row, node `c` for each
/// column, one edge per plan entry.
#[derive(Debug, Clone)]
pub struct SupportGraph {
    m: usize,
    n: usize,
    /// Edge list as `(row, col)` in entry order.
    edges: Vec<(usize, usize)>,
    row_edges: Vec<Vec<usize>>,
    col_edges: Vec<Vec<usize>>,
}

impl SupportGraph {
    fn new(plan: &TransportPlan) -> Self {
        let mut row_edges = vec![Vec::new(); plan.m()];
        let mut col_edges = vec![Vec::new(); plan.n()];
        let mut edges = Vec::with_capacity(plan.support_size());
        for (idx, e) in plan.entries().iter().enumerate() {
            edges.push((e.row, e.col));
            row_edges[e.row].push(idx);
            col_edges[e.col].push(idx);
        }
        SupportGraph {
            m: plan.m(),
            n: plan.n(),
            edges,
            row_edges,
            col_edges,
        }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn row_degree(&self, row: usize) -> usize {
        self.row_edges[row].len()
    }

    pub fn col_degree(&self, col: usize) -> usize {
        self.col_edges[col].len()
    }

    pub fn row_edge_indices(&self, row: usize) -> &[usize] {
        &self.row_edges[row]
    }

    pub fn col_edge_indices(&self, col: usize) -> &[usize] {
        &self.col_edges[col]
    }

    /// An edge lying on some cycle, if any; the smallest-index such edge
    /// found by the scan, so the answer is deterministic.
    pub fn find_cycle_edge(&self) -> Option<(usize, usize)> {
        // Union rows 0..m and cols m..m+n; the first edge joining two
        // already-connected nodes closes a cycle.
        let mut parent: Vec<usize> = (0..self.m + self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(row, col) in &self.edges {
            let a = find(&mut parent, row);
            let b = find(&mut parent, self.m + col);
            if a == b {
                return Some((row, col));
            }
            parent[a] = b;
        }
        None
    }

    /// A cycle through edges of the graph as an alternating closed walk,
    /// returned as the edge positions `(row, col)` in cycle order.
    /// `None` for forests.
    pub fn find_cycle(&self) -> Option<Vec<(usize, usize)>> {
        let (row0, col0) = self.find_cycle_edge()?;
        // The remaining edges connect row0 to col0 (they did when the
        // cycle edge was discovered); find a path by breadth-first
        // search avoiding the closing edge itself.
        let total = self.m + self.n;
        let start = row0;
        let goal = self.m + col0;
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut seen = vec![false; total];
        let mut queue = std::collections::VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(node) = queue.pop_front() {
            if node == goal {
                break;
            }
            let incident: &[usize] = if node < self.m {
                &self.row_edges[node]
            } else {
                &self.col_edges[node - self.m]
            };
            for &eidx in incident {
                let (er, ec) = self.edges[eidx];
                if (er, ec) == (row0, col0) {
                    continue;
                }
                let other = if node < self.m { self.m + ec } else { er };
                if !seen[other] {
                    seen[other] = true;
                    prev[other] = Some((node, eidx));
                    queue.push_back(other);
                }
            }
        }
        if !seen[goal] {
            // Possible only if the closing edge is parallel to nothing,
            // which cannot happen for a simple bipartite support graph.
            return None;
        }
        let mut path_edges = Vec::new();
        let mut node = goal;
        while let Some((from, eidx)) = prev[node] {
            path_edges.push(self.edges[eidx]);
            node = from;
        }
        path_edges.reverse();
        path_edges.push((row0, col0));
        Some(path_edges)
    }
}
