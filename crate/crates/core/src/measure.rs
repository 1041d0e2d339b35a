//! Points, finitely supported measures, cost functions, and
//! transport instances.
//!
//! An [`Instance`] couples two measures of equal total mass with a cost:
//! either `|x - y|^p` from the points (any rational `p > 0`, evaluated
//! exactly as a radical when `p` is odd or fractional) or an explicit
//! nonnegative rational matrix.  Constructors validate every structural
//! invariant once, so the rest of the crate can rely on them.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, rat, Rational};
use crate::scalar::CostValue;

/// A support point with rational coordinates and an optional label used
/// only in reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    pub coords: Vec<Rational>,
    pub label: Option<String>,
}

impl Point {
    pub fn new(coords: Vec<Rational>) -> Self {
        Point { coords, label: None }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point::new(coords.iter().map(|&c| rat(c, 1)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Squared Euclidean distance, always rational.
    pub fn squared_distance(&self, other: &Point) -> Rational {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let d = a - b;
                (&d) * (&d)
            })
            .sum()
    }
}

/// A measure with finitely many atoms of strictly positive mass at
/// pairwise distinct points of a common dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    points: Vec<Point>,
    masses: Vec<Rational>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Point>, masses: Vec<Rational>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Validation("measure needs at least one atom".into()));
        }
        if points.len() != masses.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points but {} masses",
                points.len(),
                masses.len()
            )));
        }
        let dim = points[0].dim();
        let mut seen = BTreeSet::new();
        for (i, p) in points.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "point {i} has dimension {} but point 0 has dimension {dim}",
                    p.dim()
                )));
            }
            if !seen.insert(p.coords.clone()) {
                return Err(Error::Validation(format!(
                    "duplicate support point at index {i}"
                )));
            }
        }
        for (i, m) in masses.iter().enumerate() {
            if !m.is_positive() {
                return Err(Error::Validation(format!(
                    "mass {} at index {i} is not strictly positive",
                    format_rational(m)
                )));
            }
        }
        Ok(DiscreteMeasure { points, masses })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn total_mass(&self) -> Rational {
        self.masses.iter().sum()
    }
}

/// How pair costs are produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostSpec {
    /// `c(x, y) = |x - y|^p` with rational `p > 0`.
    EuclideanPower { p: Rational },
    /// Explicit nonnegative rational matrix, `values[i][j] = c(x_i, y_j)`.
    ExplicitMatrix { values: Vec<Vec<Rational>> },
}

impl CostSpec {
    pub fn euclidean(p: Rational) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::InvalidP(format!(
                "{} is not a positive exponent",
                format_rational(&p)
            )));
        }
        Ok(CostSpec::EuclideanPower { p })
    }
}

/// A discrete transport problem: source measure, target measure, cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    cost: CostSpec,
}

impl Instance {
    pub fn new(mu: DiscreteMeasure, nu: DiscreteMeasure, cost: CostSpec) -> Result<Self> {
        if mu.total_mass() != nu.total_mass() {
            return Err(Error::Validation(format!(
                "total masses differ: {} vs {}",
                format_rational(&mu.total_mass()),
                format_rational(&nu.total_mass())
            )));
        }
        match &cost {
            CostSpec::EuclideanPower { p } => {
                if !p.is_positive() {
                    return Err(Error::InvalidP(format!(
                        "{} is not a positive exponent",
                        format_rational(p)
                    )));
                }
                if mu.dim() != nu.dim() {
                    return Err(Error::DimensionMismatch(format!(
                        "source dimension {} vs target dimension {}",
                        mu.dim(),
                        nu.dim()
                    )));
                }
            }
            CostSpec::ExplicitMatrix { values } => {
                if values.len() != mu.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "cost matrix has {} rows for {} source atoms",
                        values.len(),
                        mu.len()
                    )));
                }
                for (i, row) in values.iter().enumerate() {
                    if row.len() != nu.len() {
                        return Err(Error::DimensionMismatch(format!(
                            "cost matrix row {i} has {} entries for {} target atoms",
                            row.len(),
                            nu.len()
                        )));
                    }
                    for (j, v) in row.iter().enumerate() {
                        if v.is_negative() {
                            return Err(Error::Validation(format!(
                                "cost ({i}, {j}) = {} is negative",
                                format_rational(v)
                            )));
                        }
                    }
                }
            }
        }
        Ok(Instance { mu, nu, cost })
    }

    pub fn mu(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn nu(&self) -> &DiscreteMeasure {
        &self.nu
    }

    pub fn cost(&self) -> &CostSpec {
        &self.cost
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }

    pub fn n(&self) -> usize {
        self.nu.len()
    }

    /// Exact cost of moving mass from source atom `i` to target atom `j`.
    pub fn cost_value(&self, i: usize, j: usize) -> CostValue {
        match &self.cost {
            CostSpec::EuclideanPower { p } => {
                let sq = self.mu.points()[i].squared_distance(&self.nu.points()[j]);
                // |x - y|^p = (|x - y|^2)^(p/2); sq >= 0 and p > 0 were
                // validated, so this cannot fail.
                let half_p = p / rat(2, 1);
                CostValue::rational_power(&sq, &half_p).expect("validated cost inputs")
            }
            CostSpec::ExplicitMatrix { values } => {
                CostValue::from_rational(values[i][j].clone())
            }
        }
    }

    /// The full cost matrix; prefer this over repeated `cost_value` calls
    /// in inner loops.
    pub fn cost_matrix(&self) -> Vec<Vec<CostValue>> {
        (0..self.m())
            .map(|i| (0..self.n()).map(|j| self.cost_value(i, j)).collect())
            .collect()
    }

    /// The same points and masses under a different cost.
    pub fn with_cost(&self, cost: CostSpec) -> Result<Instance> {
        Instance::new(self.mu.clone(), self.nu.clone(), cost)
    }
}

/// Exact three-way comparison of cost values.
pub fn compare_costs(a: &CostValue, b: &CostValue) -> Ordering {
    a.cmp(b)
}

/// True when every atom of the measure has zero mass removed; used by
/// loaders that accept zero-mass atoms and strip them with a warning.
pub(crate) fn strip_zero_atoms(
    points: Vec<Point>,
    masses: Vec<Rational>,
) -> (Vec<Point>, Vec<Rational>, usize) {
    let mut kept_points = Vec::with_capacity(points.len());
    let mut kept_masses = Vec::with_capacity(masses.len());
    let mut dropped = 0;
    for (p, m) in points.into_iter().zip(masses) {
        if m.is_zero() {
            dropped += 1;
        } else {
            kept_points.push(p);
            kept_masses.push(m);
        }
    }
    (kept_points, kept_masses, dropped)
}
