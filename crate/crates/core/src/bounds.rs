//! Constants bounding the transport cost from below by the bottleneck
//! value, with end-to-end verification reports.
//!
//! Every decomposed plan splits its cost over the two deterministic
//! branches, so the optimal cost is at least the smallest diffusive
//! atom mass times the largest arc cost the plan uses, and therefore at
//! least that mass times the bottleneck value.  The instance-level
//! constant below it depends only on the marginals: the smallest
//! strictly positive gap between a source subset sum and a target
//! subset sum.  Both constants are computed exactly, and the
//! verification entry points re-derive every quantity from scratch so a
//! report is a complete audit of one instance.

use num_traits::{Signed, ToPrimitive, Zero};

use crate::bottleneck::w_infinity;
use crate::error::{Error, Result};
use crate::measure::{CostSpec, DiscreteMeasure, Instance};
use crate::rational::{format_rational, Rational};
use crate::scalar::CostValue;
use crate::solver::solve_optimal;
use crate::structure::{decompose, minimize_support, DiffusiveModel};

/// Combined atom-count guard for the exhaustive subset-sum scan.
pub const SUBSET_SUM_GUARD: usize = 24;

/// Index sets `(A, B)` of source and target atoms attaining a subset-sum
/// gap.
pub type SubsetPair = (Vec<usize>, Vec<usize>);

/// The two lower-bound constants of one instance side by side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaReport {
    /// Smallest diffusive atom mass of the constructed model.
    pub alpha_model: Rational,
    /// Smallest positive subset-sum gap between the marginals; never
    /// exceeds `alpha_model` because every diffusive mass is such a gap.
    pub alpha_uniform: Rational,
    pub achieving_pair: SubsetPair,
}

/// Smallest diffusive atom mass of the model, the constant multiplying
/// the bottleneck value in the lower bound.  When one diffusive side is
/// empty the minimum runs over the other side alone.
pub fn alpha_of_model(model: &DiffusiveModel) -> Result<Rational> {
    model
        .mu_d
        .values()
        .chain(model.nu_d.values())
        .min()
        .cloned()
        .ok_or(Error::EmptyModel)
}

/// Smallest strictly positive `|mu(A) - nu(B)|` over all subset pairs,
/// including empty subsets, with one attaining pair.  Exhaustive over
/// all `2^m * 2^n` pairs via two sorted subset-sum lists and an
/// adjacent-cross-difference scan, hence guarded.
pub fn alpha_uniform(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(Rational, SubsetPair)> {
    let size = mu.len() + nu.len();
    if size > SUBSET_SUM_GUARD {
        return Err(Error::InstanceTooLarge {
            operation: "alpha_uniform",
            size,
            guard: SUBSET_SUM_GUARD,
        });
    }
    let sums = |masses: &[Rational]| -> Vec<(Rational, usize)> {
        let mut out = vec![(Rational::zero(), 0usize)];
        for mask in 1..(1usize << masses.len()) {
            let low = mask.trailing_zeros() as usize;
            let (rest, _) = &out[mask & (mask - 1)];
            out.push((rest + &masses[low], mask));
        }
        out.sort();
        out
    };
    let mu_sums = sums(mu.masses());
    let nu_sums = sums(nu.masses());
    // Merge walk: the smallest positive gap is attained against the
    // nearest value from the other list, so it suffices to compare each
    // value with the last one seen on the other side.
    let mut best: Option<(Rational, usize, usize)> = None;
    let mut candidate = |diff: Rational, a: usize, b: usize| {
        if diff.is_positive() && best.as_ref().is_none_or(|(d, _, _)| diff < *d) {
            best = Some((diff, a, b));
        }
    };
    let (mut i, mut j) = (0usize, 0usize);
    let mut last_mu: Option<&(Rational, usize)> = None;
    let mut last_nu: Option<&(Rational, usize)> = None;
    while i < mu_sums.len() || j < nu_sums.len() {
        let take_mu = j == nu_sums.len() || (i < mu_sums.len() && mu_sums[i].0 <= nu_sums[j].0);
        if take_mu {
            if let Some((s, mask)) = last_nu {
                candidate((&mu_sums[i].0 - s).abs(), mu_sums[i].1, *mask);
            }
            last_mu = Some(&mu_sums[i]);
            i += 1;
        } else {
            if let Some((s, mask)) = last_mu {
                candidate((&nu_sums[j].0 - s).abs(), *mask, nu_sums[j].1);
            }
            last_nu = Some(&nu_sums[j]);
            j += 1;
        }
    }
    let (diff, a_mask, b_mask) = best.expect("the full-side pair against the empty set is positive");
    let indices = |mask: usize| (0..usize::BITS as usize).filter(|k| mask >> k & 1 == 1).collect();
    Ok((diff, (indices(a_mask), indices(b_mask))))
}

/// Both constants of one decomposed instance, cross-checked.
pub fn alpha_report(
    model: &DiffusiveModel,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<AlphaReport> {
    let alpha_model = alpha_of_model(model)?;
    let (alpha_uniform, achieving_pair) = alpha_uniform(mu, nu)?;
    debug_assert!(alpha_uniform <= alpha_model);
    Ok(AlphaReport {
        alpha_model,
        alpha_uniform,
        achieving_pair,
    })
}

fn check_model_shape(model: &DiffusiveModel, instance: &Instance) -> Result<()> {
    if model.m != instance.m() || model.n != instance.n() {
        return Err(Error::DimensionMismatch(format!(
            "model is {}x{} but the instance is {}x{}",
            model.m,
            model.n,
            instance.m(),
            instance.n()
        )));
    }
    Ok(())
}

/// Transport cost of the model's two deterministic branches, as
/// (source-branch sum, target-branch sum).  The two add up exactly to
/// the transport cost of the reconstructed plan.
pub fn cost_split(model: &DiffusiveModel, instance: &Instance) -> Result<(CostValue, CostValue)> {
    check_model_shape(model, instance)?;
    let mut source_branch = CostValue::zero();
    for (&x, mass) in &model.mu_d {
        let &y = model.h1.get(&x).ok_or_else(|| {
            Error::Validation(format!("diffusive source atom {x} has no image"))
        })?;
        source_branch = &source_branch + &instance.cost_value(x, y).scale(mass);
    }
    let mut target_branch = CostValue::zero();
    for (&y, mass) in &model.nu_d {
        let &x = model.h2.get(&y).ok_or_else(|| {
            Error::Validation(format!("diffusive target atom {y} has no image"))
        })?;
        target_branch = &target_branch + &instance.cost_value(x, y).scale(mass);
    }
    Ok((source_branch, target_branch))
}

/// Largest arc cost the model uses, the maximum over both branches.
pub fn t_infinity_of_model(model: &DiffusiveModel, instance: &Instance) -> Result<CostValue> {
    check_model_shape(model, instance)?;
    let source = model.mu_d.keys().map(|&x| {
        model
            .h1
            .get(&x)
            .map(|&y| instance.cost_value(x, y))
            .ok_or_else(|| Error::Validation(format!("diffusive source atom {x} has no image")))
    });
    let target = model.nu_d.keys().map(|&y| {
        model
            .h2
            .get(&y)
            .map(|&x| instance.cost_value(x, y))
            .ok_or_else(|| Error::Validation(format!("diffusive target atom {y} has no image")))
    });
    source
        .chain(target)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .ok_or(Error::EmptyModel)
}

/// One instance audited end to end against the bottleneck lower bound.
#[derive(Debug, Clone)]
pub struct LowerBoundReport {
    /// Exact optimal transport cost.
    pub w_c: CostValue,
    /// Exact bottleneck value.
    pub w_inf: CostValue,
    /// Smallest diffusive atom mass of the decomposed optimal plan.
    pub alpha: Rational,
    /// `alpha * w_inf`, the certified lower bound on `w_c`.
    pub bound: CostValue,
    pub holds: bool,
    pub tight: bool,
    pub plan_support: usize,
    pub diffusive_support: usize,
}

/// Solves the instance, reduces the plan, decomposes it, and checks
/// `w_c >= alpha * w_inf` with every quantity recomputed exactly.
pub fn verify_lower_bound(instance: &Instance) -> Result<LowerBoundReport> {
    let (plan, duals) = solve_optimal(instance);
    let reduced = minimize_support(&plan, &duals, instance)?;
    let (model, _trace) = decompose(&reduced)?;
    let alpha = alpha_of_model(&model)?;
    let w_c = reduced.transport_cost(instance)?;
    let w_inf = w_infinity(instance).threshold;
    let bound = w_inf.scale(&alpha);
    let slack = &w_c - &bound;
    Ok(LowerBoundReport {
        holds: !slack.is_negative(),
        tight: slack.is_zero(),
        w_c,
        w_inf,
        alpha,
        bound,
        plan_support: reduced.support_size(),
        diffusive_support: model.diffusive_support(),
    })
}

/// The marginal-only variant of the powered lower bound.
#[derive(Debug, Clone)]
pub struct UniformAlphaBound {
    pub alpha: Rational,
    pub achieving_pair: SubsetPair,
    /// `alpha * w_inf^p`.
    pub lhs: CostValue,
    pub holds: bool,
}

/// One instance audited against the powered lower bound
/// `alpha_p * w_inf^p <= w_cp`.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub p: Rational,
    /// Optimal transport cost under the instance costs raised to `p`.
    pub w_cp: CostValue,
    /// Bottleneck value under the base costs.
    pub w_inf: CostValue,
    /// Smallest diffusive atom mass of the plan solved under the
    /// powered costs.
    pub alpha_p: Rational,
    /// `alpha_p * w_inf^p`; the powered form keeps everything exact.
    pub lhs: CostValue,
    /// `w_cp`.
    pub rhs: CostValue,
    /// `rhs - lhs`, nonnegative on every valid instance.
    pub slack: CostValue,
    pub tight: bool,
    /// Decimal views of the rooted form `w_inf <= (w_cp / alpha_p)^(1/p)`.
    pub w_inf_approx: f64,
    pub root_bound_approx: f64,
    /// Same bound with the subset-sum constant; absent beyond its guard.
    pub uniform: Option<UniformAlphaBound>,
}

fn powered_instance(instance: &Instance, p: &Rational) -> Result<Instance> {
    match instance.cost() {
        CostSpec::EuclideanPower { p: base } => instance.with_cost(CostSpec::euclidean(base * p)?),
        CostSpec::ExplicitMatrix { values } => {
            if !p.is_integer() {
                return Err(Error::InvalidP(format!(
                    "explicit matrix costs admit only integer powers, got {}",
                    format_rational(p)
                )));
            }
            let k = p
                .to_integer()
                .to_usize()
                .ok_or_else(|| Error::InvalidP("power too large".into()))?;
            let powered = values
                .iter()
                .map(|row| row.iter().map(|v| num_traits::pow(v.clone(), k)).collect())
                .collect();
            instance.with_cost(CostSpec::ExplicitMatrix { values: powered })
        }
    }
}

/// Solves the instance under its costs raised to `p >= 1`, decomposes
/// the reduced plan, and checks `alpha_p * w_inf^p <= w_cp` exactly,
/// plus the same bound with the marginal-only constant when the
/// subset-sum guard allows it.
pub fn verify_power_bound(instance: &Instance, p: &Rational) -> Result<BoundReport> {
    if *p < Rational::from_integer(1.into()) {
        return Err(Error::InvalidP(format!(
            "{} is below one",
            format_rational(p)
        )));
    }
    let powered = powered_instance(instance, p)?;
    let (plan, duals) = solve_optimal(&powered);
    let reduced = minimize_support(&plan, &duals, &powered)?;
    let (model, _trace) = decompose(&reduced)?;
    let alpha_p = alpha_of_model(&model)?;
    let w_cp = reduced.transport_cost(&powered)?;
    let w_inf = w_infinity(instance).threshold;
    let w_inf_pow = w_inf.pow(p)?;
    let lhs = w_inf_pow.scale(&alpha_p);
    let slack = &w_cp - &lhs;
    let uniform = if instance.m() + instance.n() <= SUBSET_SUM_GUARD {
        let (alpha, achieving_pair) = alpha_uniform(instance.mu(), instance.nu())?;
        let lhs_u = w_inf_pow.scale(&alpha);
        Some(UniformAlphaBound {
            holds: !(&w_cp - &lhs_u).is_negative(),
            alpha,
            achieving_pair,
            lhs: lhs_u,
        })
    } else {
        None
    };
    let alpha_approx = CostValue::from_rational(alpha_p.clone()).approx();
    let p_approx = CostValue::from_rational(p.clone()).approx();
    Ok(BoundReport {
        p: p.clone(),
        tight: slack.is_zero(),
        w_inf_approx: w_inf.approx(),
        root_bound_approx: (w_cp.approx() / alpha_approx).powf(1.0 / p_approx),
        rhs: w_cp.clone(),
        w_cp,
        w_inf,
        alpha_p,
        lhs,
        slack,
        uniform,
    })
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        !self.slack.is_negative()
    }
}

/// The two-atom family showing the lower bound cannot be reversed.
#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub epsilon: Rational,
    /// Bottleneck value under `|x - y|`; stays at 1 for every epsilon.
    pub w_inf: CostValue,
    /// Optimal cost under `|x - y|^2`; shrinks like epsilon / 2.
    pub w2_squared: CostValue,
    /// `w_inf^3 / w2_squared`, exactly `2 / epsilon`: no bound of the
    /// form `w_inf^3 <= C * w2_squared` holds with one constant for the
    /// whole family.
    pub ratio: Rational,
}

/// Builds the two-atom family at `0 < epsilon < 1` and computes the
/// diverging ratio from scratch: source `1/2, 1/2` and target
/// `(1 - epsilon)/2, (1 + epsilon)/2` on the points `0` and `1`.
pub fn divergence_example(epsilon: &Rational) -> Result<DivergenceReport> {
    let one = Rational::from_integer(1.into());
    if !epsilon.is_positive() || *epsilon >= one {
        return Err(Error::Validation(format!(
            "epsilon must lie strictly between 0 and 1, got {}",
            format_rational(epsilon)
        )));
    }
    let points = vec![
        crate::measure::Point::from_ints(&[0]),
        crate::measure::Point::from_ints(&[1]),
    ];
    let half = crate::rational::rat(1, 2);
    let mu = DiscreteMeasure::new(points.clone(), vec![half.clone(); 2])?;
    let nu = DiscreteMeasure::new(
        points,
        vec![(&one - epsilon) * &half, (&one + epsilon) * &half],
    )?;
    let squared = Instance::new(mu, nu, CostSpec::euclidean(Rational::from_integer(2.into()))?)?;
    let base = squared.with_cost(CostSpec::euclidean(one)?)?;
    let (plan, _duals) = solve_optimal(&squared);
    let w2_squared = plan.transport_cost(&squared)?;
    let w_inf = w_infinity(&base).threshold;
    let wi = w_inf
        .as_rational()
        .ok_or_else(|| Error::Validation("bottleneck value is not rational".into()))?
        .clone();
    let w2 = w2_squared
        .as_rational()
        .ok_or_else(|| Error::Validation("transport cost is not rational".into()))?
        .clone();
    let ratio = num_traits::pow(wi, 3) / w2;
    Ok(DivergenceReport {
        epsilon: epsilon.clone(),
        w_inf,
        w2_squared,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Point;
    use crate::plan::TransportPlan;
    use crate::rational::rat;

    fn two_by_two() -> (Instance, TransportPlan) {
        let mu = DiscreteMeasure::new(
            vec![Point::from_ints(&[0, 0]), Point::from_ints(&[1, 1])],
            vec![rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(
            vec![Point::from_ints(&[-1, 1]), Point::from_ints(&[1, 0])],
            vec![rat(1, 4), rat(3, 4)],
        )
        .unwrap();
        let instance = Instance::new(mu, nu, CostSpec::euclidean(rat(1, 1)).unwrap()).unwrap();
        let plan = TransportPlan::new(
            2,
            2,
            vec![(0, 0, rat(1, 4)), (0, 1, rat(1, 4)), (1, 1, rat(1, 2))],
        )
        .unwrap();
        (instance, plan)
    }

    fn epsilon_half() -> Instance {
        let points = vec![Point::from_ints(&[0]), Point::from_ints(&[1])];
        let mu = DiscreteMeasure::new(points.clone(), vec![rat(1, 2), rat(1, 2)]).unwrap();
        let nu = DiscreteMeasure::new(points, vec![rat(1, 4), rat(3, 4)]).unwrap();
        Instance::new(mu, nu, CostSpec::euclidean(rat(1, 1)).unwrap()).unwrap()
    }

    #[test]
    fn model_constant_is_smallest_diffusive_mass() {
        let (_, plan) = two_by_two();
        let (model, _) = decompose(&plan).unwrap();
        assert_eq!(alpha_of_model(&model).unwrap(), rat(1, 4));
    }

    #[test]
    fn empty_model_is_rejected() {
        let model = DiffusiveModel {
            m: 1,
            n: 1,
            mu_d: Default::default(),
            mu_c: Default::default(),
            nu_d: Default::default(),
            nu_c: Default::default(),
            h1: Default::default(),
            h2: Default::default(),
        };
        assert!(matches!(alpha_of_model(&model), Err(Error::EmptyModel)));
    }

    #[test]
    fn split_sums_to_the_plan_cost() {
        let (instance, plan) = two_by_two();
        let (model, _) = decompose(&plan).unwrap();
        let (source_branch, target_branch) = cost_split(&model, &instance).unwrap();
        assert_eq!(source_branch, CostValue::from_rational(rat(3, 4)));
        assert_eq!(
            target_branch,
            CostValue::nth_root(&rat(2, 1), 2).unwrap().scale(&rat(1, 4))
        );
        assert_eq!(
            &source_branch + &target_branch,
            plan.transport_cost(&instance).unwrap()
        );
    }

    #[test]
    fn largest_model_arc_cost() {
        let (instance, plan) = two_by_two();
        let (model, _) = decompose(&plan).unwrap();
        assert_eq!(
            t_infinity_of_model(&model, &instance).unwrap(),
            CostValue::nth_root(&rat(2, 1), 2).unwrap()
        );
    }

    #[test]
    fn subset_sum_gap_examples() {
        let eps = epsilon_half();
        let (gap, (a, b)) = alpha_uniform(eps.mu(), eps.nu()).unwrap();
        assert_eq!(gap, rat(1, 4));
        let sum = |idx: &[usize], masses: &[Rational]| -> Rational {
            idx.iter().map(|&k| masses[k].clone()).sum()
        };
        assert_eq!(
            (sum(&a, eps.mu().masses()) - sum(&b, eps.nu().masses())).abs(),
            rat(1, 4)
        );

        let single = DiscreteMeasure::new(vec![Point::from_ints(&[0])], vec![rat(1, 1)]).unwrap();
        let other = DiscreteMeasure::new(vec![Point::from_ints(&[3])], vec![rat(1, 1)]).unwrap();
        assert_eq!(alpha_uniform(&single, &other).unwrap().0, rat(1, 1));

        let thirds = DiscreteMeasure::new(
            vec![Point::from_ints(&[0]), Point::from_ints(&[1])],
            vec![rat(1, 3), rat(2, 3)],
        )
        .unwrap();
        assert_eq!(alpha_uniform(&thirds, &thirds).unwrap().0, rat(1, 3));
    }

    #[test]
    fn subset_sum_guard_is_enforced() {
        let points: Vec<Point> = (0..13).map(|k| Point::from_ints(&[k])).collect();
        let wide = DiscreteMeasure::new(points, vec![rat(1, 13); 13]).unwrap();
        assert!(matches!(
            alpha_uniform(&wide, &wide),
            Err(Error::InstanceTooLarge {
                operation: "alpha_uniform",
                ..
            })
        ));
    }

    #[test]
    fn uniform_constant_never_exceeds_model_constant() {
        let (instance, plan) = two_by_two();
        let (model, _) = decompose(&plan).unwrap();
        let report = alpha_report(&model, instance.mu(), instance.nu()).unwrap();
        assert!(report.alpha_uniform <= report.alpha_model);
        assert_eq!(report.alpha_model, rat(1, 4));
        assert_eq!(report.alpha_uniform, rat(1, 4));
    }

    #[test]
    fn lower_bound_is_tight_on_the_two_atom_family() {
        let squared = epsilon_half()
            .with_cost(CostSpec::euclidean(rat(2, 1)).unwrap())
            .unwrap();
        let report = verify_lower_bound(&squared).unwrap();
        assert!(report.holds);
        assert!(report.tight);
        assert_eq!(report.w_c, CostValue::from_rational(rat(1, 4)));
        assert_eq!(report.alpha, rat(1, 4));
        assert_eq!(report.w_inf, CostValue::from_int(1));
        assert_eq!(report.bound, CostValue::from_rational(rat(1, 4)));
    }

    #[test]
    fn powered_bound_is_tight_on_singletons() {
        let mu = DiscreteMeasure::new(vec![Point::from_ints(&[0])], vec![rat(1, 1)]).unwrap();
        let nu = DiscreteMeasure::new(vec![Point::from_ints(&[3])], vec![rat(1, 1)]).unwrap();
        let instance = Instance::new(mu, nu, CostSpec::euclidean(rat(1, 1)).unwrap()).unwrap();
        for p in [rat(1, 1), rat(2, 1), rat(3, 1)] {
            let report = verify_power_bound(&instance, &p).unwrap();
            assert!(report.holds());
            assert!(report.tight, "slack at p = {p}");
            assert_eq!(report.alpha_p, rat(1, 1));
            assert_eq!(report.w_inf, CostValue::from_int(3));
        }
    }

    #[test]
    fn powered_bound_on_the_two_atom_family() {
        let report = verify_power_bound(&epsilon_half(), &rat(2, 1)).unwrap();
        assert!(report.holds());
        assert!(report.tight);
        assert_eq!(report.lhs, CostValue::from_rational(rat(1, 4)));
        assert_eq!(report.rhs, CostValue::from_rational(rat(1, 4)));
        let uniform = report.uniform.expect("4 atoms sit inside the guard");
        assert!(uniform.holds);
        assert_eq!(uniform.alpha, rat(1, 4));
    }

    #[test]
    fn powers_below_one_are_rejected() {
        assert!(matches!(
            verify_power_bound(&epsilon_half(), &rat(1, 2)),
            Err(Error::InvalidP(_))
        ));
    }

    #[test]
    fn ratio_family_diverges() {
        let mut previous = rat(0, 1);
        for k in 1..=4 {
            let eps = rat(1, 1 << k);
            let report = divergence_example(&eps).unwrap();
            assert_eq!(report.ratio, rat(2, 1) / &eps);
            assert_eq!(report.w_inf, CostValue::from_int(1));
            assert_eq!(
                report.w2_squared,
                CostValue::from_rational(&eps / rat(2, 1))
            );
            assert!(report.ratio > previous);
            previous = report.ratio;
        }
    }

    #[test]
    fn ratio_family_rejects_bad_epsilon() {
        assert!(divergence_example(&rat(1, 1)).is_err());
        assert!(divergence_example(&rat(0, 1)).is_err());
        assert!(divergence_example(&rat(-1, 2)).is_err());
    }
}
