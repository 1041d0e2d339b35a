//! Known-answer runs over the shipped example instances.  Every check
//! recomputes a value from scratch and compares its exact rendering
//! against the pinned answer; any mismatch exits with code 5.

use std::path::Path;

use serde::Serialize;

use otstruct::bottleneck::w_infinity;
use otstruct::bounds::{alpha_of_model, divergence_example, verify_power_bound};
use otstruct::format::{parse_instance, parse_plan};
use otstruct::measure::Instance;
use otstruct::plan::TransportPlan;
use otstruct::solver::{brute_force_optimal_guarded, solve_optimal};
use otstruct::structure::{
    decompose, is_trim_certified_guarded, minimize_support, reconstruct, TrimCertificate,
};
use otstruct::{format_rational, rat, CostValue, Error, Rational};

use crate::{manifest, Cli, Emitter, Failure, ManifestDto};

#[derive(Serialize)]
struct CheckDto {
    name: String,
    expected: String,
    got: String,
    ok: bool,
}

#[derive(Serialize)]
struct GoldenDoc {
    manifest: ManifestDto,
    checks: Vec<CheckDto>,
    all_ok: bool,
}

#[derive(Default)]
struct Table {
    checks: Vec<CheckDto>,
}

impl Table {
    fn push(&mut self, name: &str, expected: impl ToString, got: impl ToString) {
        let expected = expected.to_string();
        let got = got.to_string();
        self.checks.push(CheckDto {
            ok: expected == got,
            name: name.into(),
            expected,
            got,
        });
    }
}

fn load(dir: &Path, file: &str) -> Result<Instance, Failure> {
    let path = dir.join(file);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let (instance, _) =
        parse_instance(&text).map_err(|e| Failure::invalid(format!("{file}: {e}")))?;
    Ok(instance)
}

fn load_plan(dir: &Path, file: &str) -> Result<TransportPlan, Failure> {
    let path = dir.join(file);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    parse_plan(&text).map_err(|e| Failure::invalid(format!("{file}: {e}")))
}

fn objective(instance: &Instance) -> Result<CostValue, Failure> {
    let (plan, _) = solve_optimal(instance);
    plan.transport_cost(instance).map_err(Failure::internal)
}

/// Two atoms at 0 and 1: cost epsilon/2, bottleneck 1, and the squared
/// bound tight with alpha = epsilon/2.
fn check_epsilon(dir: &Path, file: &str, epsilon: &Rational, t: &mut Table) -> Result<(), Failure> {
    let instance = load(dir, file)?;
    let tag = format!("epsilon {}", format_rational(epsilon));
    let half = rat(1, 2);
    t.push(
        &format!("{tag}: transport cost"),
        CostValue::from_rational(epsilon * &half),
        objective(&instance)?,
    );
    t.push(&format!("{tag}: bottleneck"), "1", w_infinity(&instance).threshold);
    let report = verify_power_bound(&instance, &rat(2, 1)).map_err(Failure::internal)?;
    t.push(
        &format!("{tag}: squared bound"),
        format!("tight at {}", CostValue::from_rational(epsilon * &half)),
        if report.holds() && report.tight {
            format!("tight at {}", report.lhs)
        } else {
            format!("lhs {} vs rhs {}", report.lhs, report.rhs)
        },
    );
    Ok(())
}

/// Half mass at (0,0) and (1,1) against a quarter at (-1,1) and three
/// quarters at (1,0), with plain Euclidean cost: the reduced plan has
/// three arcs, alpha 1/4, and an irrational objective.
fn check_path(dir: &Path, t: &mut Table) -> Result<(), Failure> {
    let instance = load(dir, "three_arc_path.json")?;
    let (plan, duals) = solve_optimal(&instance);
    let reduced = minimize_support(&plan, &duals, &instance).map_err(Failure::internal)?;
    let expected_cost = &CostValue::from_rational(rat(3, 4))
        + &CostValue::nth_root(&rat(2, 1), 2)
            .map_err(Failure::internal)?
            .scale(&rat(1, 4));
    t.push(
        "path: transport cost",
        expected_cost,
        reduced.transport_cost(&instance).map_err(Failure::internal)?,
    );
    t.push("path: reduced support", "3", reduced.support_size());
    let cert = is_trim_certified_guarded(&reduced, &instance, 30).map_err(Failure::internal)?;
    t.push(
        "path: reduced plan",
        "minimal",
        match cert {
            TrimCertificate::Trim => "minimal",
            TrimCertificate::NotTrim { .. } => "reducible",
            TrimCertificate::Unverifiable => "unverified",
        },
    );
    let (model, _) = decompose(&reduced).map_err(Failure::internal)?;
    t.push(
        "path: alpha",
        "1/4",
        format_rational(&alpha_of_model(&model).map_err(Failure::internal)?),
    );
    t.push(
        "path: reconstruction",
        "matches",
        if reconstruct(&model).map_err(Failure::internal)? == reduced {
            "matches"
        } else {
            "differs"
        },
    );
    t.push(
        "path: bottleneck",
        CostValue::nth_root(&rat(2, 1), 2).map_err(Failure::internal)?,
        w_infinity(&instance).threshold,
    );
    Ok(())
}

/// Uniform mass on the even and odd corners of the cube.  The optimum
/// matches each corner to a neighbor; the twelve-arc plan is optimal
/// but cyclic and far from minimal.
fn check_hypercube(dir: &Path, t: &mut Table) -> Result<(), Failure> {
    let instance = load(dir, "hypercube.json")?;
    let oracle = brute_force_optimal_guarded(&instance, 30).map_err(Failure::internal)?;
    t.push("hypercube: transport cost", "1", &oracle.optimal_value);
    t.push("hypercube: minimal support", "4", oracle.minimal_support);
    t.push(
        "hypercube: minimal plans",
        "9",
        oracle.minimal_support_plans.len(),
    );

    let twelve = load_plan(dir, "hypercube_twelve_plan.json")?;
    t.push(
        "hypercube: twelve-arc cost",
        "1",
        twelve.transport_cost(&instance).map_err(Failure::internal)?,
    );
    let cert = is_trim_certified_guarded(&twelve, &instance, 30).map_err(Failure::internal)?;
    t.push(
        "hypercube: twelve-arc plan",
        "optimal but reducible",
        match cert {
            TrimCertificate::Trim => "minimal".into(),
            TrimCertificate::NotTrim { ref witness } => format!(
                "optimal but reducible{}",
                if witness.support_size() == 4 { "" } else { " (bad witness)" }
            ),
            TrimCertificate::Unverifiable => "unverified".into(),
        },
    );
    t.push(
        "hypercube: twelve-arc decompose",
        "cycle at (1, 3)",
        match decompose(&twelve) {
            Err(Error::CyclicSupport { row, col }) => format!("cycle at ({row}, {col})"),
            Err(other) => other.to_string(),
            Ok(_) => "decomposed".into(),
        },
    );
    let (_, duals) = solve_optimal(&instance);
    let trimmed = minimize_support(&twelve, &duals, &instance).map_err(Failure::internal)?;
    let (model, _) = decompose(&trimmed).map_err(Failure::internal)?;
    t.push(
        "hypercube: trimmed decompose",
        "4 diffusive atoms, one-sided",
        format!(
            "{} diffusive atoms{}",
            model.diffusive_support(),
            if model.mu_d.is_empty() || model.nu_d.is_empty() {
                ", one-sided"
            } else {
                ""
            }
        ),
    );
    Ok(())
}

/// One atom moved a distance of three: every power bound is tight with
/// alpha 1.
fn check_singleton(dir: &Path, t: &mut Table) -> Result<(), Failure> {
    let instance = load(dir, "singleton.json")?;
    t.push("singleton: transport cost", "3", objective(&instance)?);
    t.push("singleton: bottleneck", "3", w_infinity(&instance).threshold);
    let report = verify_power_bound(&instance, &rat(3, 1)).map_err(Failure::internal)?;
    t.push(
        "singleton: cubed bound",
        "tight at 27, alpha 1",
        if report.holds() && report.tight {
            format!("tight at {}, alpha {}", report.lhs, format_rational(&report.alpha_p))
        } else {
            format!("lhs {} vs rhs {}", report.lhs, report.rhs)
        },
    );
    Ok(())
}

/// Identical marginals: zero cost and zero bottleneck.
fn check_identity(dir: &Path, t: &mut Table) -> Result<(), Failure> {
    let instance = load(dir, "identity.json")?;
    t.push("identity: transport cost", "0", objective(&instance)?);
    t.push("identity: bottleneck", "0", w_infinity(&instance).threshold);
    Ok(())
}

/// The two-atom family whose cubed bottleneck outruns the squared cost:
/// the exact ratio is 2/epsilon, doubling each time epsilon halves.
fn check_divergence(t: &mut Table) -> Result<(), Failure> {
    let mut previous: Option<Rational> = None;
    let mut increasing = true;
    for k in 1..=4u32 {
        let epsilon = rat(1, 1 << k);
        let report = divergence_example(&epsilon).map_err(Failure::internal)?;
        t.push(
            &format!("divergence epsilon {}: ratio", format_rational(&epsilon)),
            format_rational(&(rat(2, 1) / &epsilon)),
            format_rational(&report.ratio),
        );
        if let Some(previous) = &previous {
            increasing &= report.ratio > *previous;
        }
        previous = Some(report.ratio);
    }
    t.push(
        "divergence: ratio strictly increases",
        "yes",
        if increasing { "yes" } else { "no" },
    );
    Ok(())
}

pub fn cmd_golden(dir: &Path, cli: &Cli, emitter: &Emitter) -> Result<u8, Failure> {
    let mut table = Table::default();
    check_epsilon(dir, "epsilon_half.json", &rat(1, 2), &mut table)?;
    check_epsilon(dir, "epsilon_quarter.json", &rat(1, 4), &mut table)?;
    check_path(dir, &mut table)?;
    check_hypercube(dir, &mut table)?;
    check_singleton(dir, &mut table)?;
    check_identity(dir, &mut table)?;
    check_divergence(&mut table)?;

    let all_ok = table.checks.iter().all(|c| c.ok);
    let name_width = table.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let expected_width = table
        .checks
        .iter()
        .map(|c| c.expected.len())
        .max()
        .unwrap_or(0);
    let mut text = String::new();
    for check in &table.checks {
        text += &format!(
            "{} {:name_width$}  {:expected_width$} {} {}\n",
            if check.ok { "ok  " } else { "FAIL" },
            check.name,
            check.expected,
            if check.ok { "==" } else { "!=" },
            check.got,
        );
    }
    let mismatches = table.checks.iter().filter(|c| !c.ok).count();
    text += &format!(
        "{} checks: {}\n",
        table.checks.len(),
        if all_ok {
            "all match".into()
        } else {
            format!("{mismatches} mismatch(es)")
        },
    );
    let doc = GoldenDoc {
        manifest: manifest("golden", &[dir], None, cli),
        checks: table.checks,
        all_ok,
    };
    emitter.emit(&text, &doc)?;
    Ok(if all_ok { 0 } else { 5 })
}
