//! On-disk formats for instances, plans, models, traces, certificates,
//! and reports.
//!
//! All masses and rational costs travel as exact strings (`"3/4"`,
//! `"1"`, or finite decimals on input); irrational cost values are
//! emitted in their exact radical form.  Output is canonical: reduced
//! fractions, entries sorted, fixed field order.  Loading a document
//! and saving it again reproduces every mass bit for bit, and the
//! instance hash is the digest of exactly these canonical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bottleneck::{InfeasibilityCut, ThresholdCertificate};
use crate::bounds::{
    AlphaReport, BoundReport, DivergenceReport, LowerBoundReport, SubsetPair,
};
use crate::bottleneck::PowerIdentityReport;
use crate::error::{Error, Result};
use crate::measure::{strip_zero_atoms, CostSpec, DiscreteMeasure, Instance, Point};
use crate::plan::TransportPlan;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::scalar::CostValue;
use crate::structure::{DiffusiveModel, PeelBranch, PeelStep, PeelTrace};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureDto {
    pub points: Vec<Vec<String>>,
    pub masses: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum CostDto {
    #[serde(rename = "euclidean")]
    Euclidean { p: String },
    #[serde(rename = "matrix")]
    Matrix { values: Vec<Vec<String>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceDto {
    pub mu: MeasureDto,
    pub nu: MeasureDto,
    pub cost: CostDto,
}

fn measure_to_dto(measure: &DiscreteMeasure) -> MeasureDto {
    let labels: Vec<String> = measure
        .points()
        .iter()
        .map(|p| p.label.clone().unwrap_or_default())
        .collect();
    MeasureDto {
        points: measure
            .points()
            .iter()
            .map(|p| p.coords.iter().map(format_rational).collect())
            .collect(),
        masses: measure.masses().iter().map(format_rational).collect(),
        labels: if labels.iter().all(String::is_empty) {
            None
        } else {
            Some(labels)
        },
    }
}

fn measure_from_dto(dto: &MeasureDto, side: &str, warnings: &mut Vec<String>) -> Result<DiscreteMeasure> {
    if dto.points.len() != dto.masses.len() {
        return Err(Error::Parse(format!(
            "{side}: {} points but {} masses",
            dto.points.len(),
            dto.masses.len()
        )));
    }
    let mut points = Vec::with_capacity(dto.points.len());
    for (k, coords) in dto.points.iter().enumerate() {
        let coords = coords
            .iter()
            .map(|c| parse_rational(c))
            .collect::<Result<Vec<Rational>>>()?;
        let mut point = Point::new(coords);
        if let Some(labels) = &dto.labels {
            let label = labels.get(k).ok_or_else(|| {
                Error::Parse(format!("{side}: fewer labels than points"))
            })?;
            if !label.is_empty() {
                point.label = Some(label.clone());
            }
        }
        points.push(point);
    }
    let masses = dto
        .masses
        .iter()
        .map(|m| parse_rational(m))
        .collect::<Result<Vec<Rational>>>()?;
    let (points, masses, dropped) = strip_zero_atoms(points, masses);
    if dropped > 0 {
        warnings.push(format!(
            "{side}: dropped {dropped} zero-mass atom{}",
            if dropped == 1 { "" } else { "s" }
        ));
    }
    DiscreteMeasure::new(points, masses)
}

pub fn instance_to_dto(instance: &Instance) -> InstanceDto {
    InstanceDto {
        mu: measure_to_dto(instance.mu()),
        nu: measure_to_dto(instance.nu()),
        cost: match instance.cost() {
            CostSpec::EuclideanPower { p } => CostDto::Euclidean {
                p: format_rational(p),
            },
            CostSpec::ExplicitMatrix { values } => CostDto::Matrix {
                values: values
                    .iter()
                    .map(|row| row.iter().map(format_rational).collect())
                    .collect(),
            },
        },
    }
}

/// Builds the instance, returning human-readable warnings for repairs
/// (currently only zero-mass atoms being stripped).
pub fn instance_from_dto(dto: &InstanceDto) -> Result<(Instance, Vec<String>)> {
    let mut warnings = Vec::new();
    let mu = measure_from_dto(&dto.mu, "mu", &mut warnings)?;
    let nu = measure_from_dto(&dto.nu, "nu", &mut warnings)?;
    let cost = match &dto.cost {
        CostDto::Euclidean { p } => CostSpec::euclidean(parse_rational(p)?)?,
        CostDto::Matrix { values } => CostSpec::ExplicitMatrix {
            values: values
                .iter()
                .map(|row| row.iter().map(|v| parse_rational(v)).collect())
                .collect::<Result<_>>()?,
        },
    };
    Ok((Instance::new(mu, nu, cost)?, warnings))
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report types always serialize");
    out.push('\n');
    out
}

pub fn parse_instance(text: &str) -> Result<(Instance, Vec<String>)> {
    instance_from_dto(&from_json(text, "instance")?)
}

pub fn load_instance(path: &Path) -> Result<(Instance, Vec<String>)> {
    parse_instance(&fs::read_to_string(path)?)
}

/// Canonical textual form of the instance; identical instances produce
/// identical bytes.
pub fn instance_to_json(instance: &Instance) -> String {
    to_json(&instance_to_dto(instance))
}

pub fn save_instance(path: &Path, instance: &Instance) -> Result<()> {
    fs::write(path, instance_to_json(instance))?;
    Ok(())
}

/// Hex digest of the canonical instance bytes; the stable identity of
/// an instance across runs and machines.
pub fn instance_hash(instance: &Instance) -> String {
    let digest = Sha256::digest(instance_to_json(instance).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEntryDto {
    pub i: usize,
    pub j: usize,
    pub mass: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanDto {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<PlanEntryDto>,
}

pub fn plan_to_dto(plan: &TransportPlan) -> PlanDto {
    PlanDto {
        m: plan.m(),
        n: plan.n(),
        entries: plan
            .entries()
            .iter()
            .map(|e| PlanEntryDto {
                i: e.row,
                j: e.col,
                mass: format_rational(&e.mass),
            })
            .collect(),
    }
}

pub fn plan_from_dto(dto: &PlanDto) -> Result<TransportPlan> {
    let entries = dto
        .entries
        .iter()
        .map(|e| Ok((e.i, e.j, parse_rational(&e.mass)?)))
        .collect::<Result<Vec<_>>>()?;
    TransportPlan::new(dto.m, dto.n, entries)
}

pub fn parse_plan(text: &str) -> Result<TransportPlan> {
    plan_from_dto(&from_json(text, "plan")?)
}

pub fn load_plan(path: &Path) -> Result<TransportPlan> {
    parse_plan(&fs::read_to_string(path)?)
}

pub fn plan_to_json(plan: &TransportPlan) -> String {
    to_json(&plan_to_dto(plan))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomDto {
    pub index: usize,
    pub mass: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrowDto {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDto {
    pub m: usize,
    pub n: usize,
    pub mu_d: Vec<AtomDto>,
    pub mu_c: Vec<AtomDto>,
    pub nu_d: Vec<AtomDto>,
    pub nu_c: Vec<AtomDto>,
    pub h1: Vec<ArrowDto>,
    pub h2: Vec<ArrowDto>,
}

fn atoms_to_dto(atoms: &std::collections::BTreeMap<usize, Rational>) -> Vec<AtomDto> {
    atoms
        .iter()
        .map(|(&index, mass)| AtomDto {
            index,
            mass: format_rational(mass),
        })
        .collect()
}

pub fn model_to_dto(model: &DiffusiveModel) -> ModelDto {
    let arrows = |map: &std::collections::BTreeMap<usize, usize>| {
        map.iter()
            .map(|(&from, &to)| ArrowDto { from, to })
            .collect()
    };
    ModelDto {
        m: model.m,
        n: model.n,
        mu_d: atoms_to_dto(&model.mu_d),
        mu_c: atoms_to_dto(&model.mu_c),
        nu_d: atoms_to_dto(&model.nu_d),
        nu_c: atoms_to_dto(&model.nu_c),
        h1: arrows(&model.h1),
        h2: arrows(&model.h2),
    }
}

pub fn model_to_json(model: &DiffusiveModel) -> String {
    to_json(&model_to_dto(model))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "rule")]
pub enum BranchDto {
    #[serde(rename = "row_equality")]
    RowEquality { row: usize, col: usize },
    #[serde(rename = "col_equality")]
    ColEquality { row: usize, col: usize },
    #[serde(rename = "double")]
    Double { row_leaf: [usize; 2], col_leaf: [usize; 2] },
    #[serde(rename = "row_only")]
    RowOnly { row: usize, col: usize },
    #[serde(rename = "col_only")]
    ColOnly { row: usize, col: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepDto {
    #[serde(flatten)]
    pub branch: BranchDto,
    pub residual_mu: Vec<AtomDto>,
    pub residual_nu: Vec<AtomDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceDto {
    pub steps: Vec<StepDto>,
}

pub fn trace_to_dto(trace: &PeelTrace) -> TraceDto {
    let residuals = |list: &[(usize, Rational)]| {
        list.iter()
            .map(|(index, mass)| AtomDto {
                index: *index,
                mass: format_rational(mass),
            })
            .collect()
    };
    let steps = trace
        .steps
        .iter()
        .map(|step: &PeelStep| StepDto {
            branch: match step.branch {
                PeelBranch::RowEquality { row, col } => BranchDto::RowEquality { row, col },
                PeelBranch::ColEquality { row, col } => BranchDto::ColEquality { row, col },
                PeelBranch::Double { row_leaf, col_leaf } => BranchDto::Double {
                    row_leaf: [row_leaf.0, row_leaf.1],
                    col_leaf: [col_leaf.0, col_leaf.1],
                },
                PeelBranch::RowOnly { row, col } => BranchDto::RowOnly { row, col },
                PeelBranch::ColOnly { row, col } => BranchDto::ColOnly { row, col },
            },
            residual_mu: residuals(&step.residual_mu),
            residual_nu: residuals(&step.residual_nu),
        })
        .collect();
    TraceDto { steps }
}

pub fn trace_to_json(trace: &PeelTrace) -> String {
    to_json(&trace_to_dto(trace))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutDto {
    pub threshold: String,
    pub max_flow: String,
    pub deficit: String,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateDto {
    pub threshold: String,
    pub threshold_approx: f64,
    pub threshold_index: usize,
    pub witness: PlanDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub below: Option<CutDto>,
}

pub fn certificate_to_dto(cert: &ThresholdCertificate) -> CertificateDto {
    CertificateDto {
        threshold: cert.threshold.to_string(),
        threshold_approx: cert.threshold.approx(),
        threshold_index: cert.threshold_index,
        witness: plan_to_dto(&cert.witness),
        below: cert.below.as_ref().map(|cut: &InfeasibilityCut| CutDto {
            threshold: cut.threshold.to_string(),
            max_flow: format_rational(&cut.max_flow),
            deficit: format_rational(&cut.deficit),
            rows: cut.rows.clone(),
            cols: cut.cols.clone(),
        }),
    }
}

pub fn certificate_to_json(cert: &ThresholdCertificate) -> String {
    to_json(&certificate_to_dto(cert))
}

fn cost_string(value: &CostValue) -> String {
    value.to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsetPairDto {
    pub source_indices: Vec<usize>,
    pub target_indices: Vec<usize>,
}

fn pair_to_dto(pair: &SubsetPair) -> SubsetPairDto {
    SubsetPairDto {
        source_indices: pair.0.clone(),
        target_indices: pair.1.clone(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaReportDto {
    pub alpha_model: String,
    pub alpha_uniform: String,
    pub achieving_pair: SubsetPairDto,
}

pub fn alpha_report_to_dto(report: &AlphaReport) -> AlphaReportDto {
    AlphaReportDto {
        alpha_model: format_rational(&report.alpha_model),
        alpha_uniform: format_rational(&report.alpha_uniform),
        achieving_pair: pair_to_dto(&report.achieving_pair),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundReportDto {
    pub w_c: String,
    pub w_c_approx: f64,
    pub w_inf: String,
    pub w_inf_approx: f64,
    pub alpha: String,
    pub bound: String,
    pub holds: bool,
    pub tight: bool,
    pub plan_support: usize,
    pub diffusive_support: usize,
}

pub fn lower_bound_report_to_dto(report: &LowerBoundReport) -> LowerBoundReportDto {
    LowerBoundReportDto {
        w_c: cost_string(&report.w_c),
        w_c_approx: report.w_c.approx(),
        w_inf: cost_string(&report.w_inf),
        w_inf_approx: report.w_inf.approx(),
        alpha: format_rational(&report.alpha),
        bound: cost_string(&report.bound),
        holds: report.holds,
        tight: report.tight,
        plan_support: report.plan_support,
        diffusive_support: report.diffusive_support,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformBoundDto {
    pub alpha: String,
    pub achieving_pair: SubsetPairDto,
    pub lhs: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReportDto {
    pub p: String,
    pub w_cp: String,
    pub w_inf: String,
    pub alpha_p: String,
    pub lhs: String,
    pub rhs: String,
    pub slack: String,
    pub holds: bool,
    pub tight: bool,
    pub w_inf_approx: f64,
    pub root_bound_approx: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform: Option<UniformBoundDto>,
}

pub fn bound_report_to_dto(report: &BoundReport) -> BoundReportDto {
    BoundReportDto {
        p: format_rational(&report.p),
        w_cp: cost_string(&report.w_cp),
        w_inf: cost_string(&report.w_inf),
        alpha_p: format_rational(&report.alpha_p),
        lhs: cost_string(&report.lhs),
        rhs: cost_string(&report.rhs),
        slack: cost_string(&report.slack),
        holds: report.holds(),
        tight: report.tight,
        w_inf_approx: report.w_inf_approx,
        root_bound_approx: report.root_bound_approx,
        uniform: report.uniform.as_ref().map(|u| UniformBoundDto {
            alpha: format_rational(&u.alpha),
            achieving_pair: pair_to_dto(&u.achieving_pair),
            lhs: cost_string(&u.lhs),
            holds: u.holds,
        }),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerIdentityReportDto {
    pub p: String,
    pub base_threshold: String,
    pub base_index: usize,
    pub powered_threshold: String,
    pub powered_index: usize,
    pub index_match: bool,
    pub value_match: bool,
}

pub fn power_identity_report_to_dto(report: &PowerIdentityReport) -> PowerIdentityReportDto {
    PowerIdentityReportDto {
        p: format_rational(&report.p),
        base_threshold: cost_string(&report.base_threshold),
        base_index: report.base_index,
        powered_threshold: cost_string(&report.powered_threshold),
        powered_index: report.powered_index,
        index_match: report.index_match,
        value_match: report.value_match,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceReportDto {
    pub epsilon: String,
    pub w_inf: String,
    pub w2_squared: String,
    pub ratio: String,
    pub ratio_approx: f64,
}

pub fn divergence_report_to_dto(report: &DivergenceReport) -> DivergenceReportDto {
    DivergenceReportDto {
        epsilon: format_rational(&report.epsilon),
        w_inf: cost_string(&report.w_inf),
        w2_squared: cost_string(&report.w2_squared),
        ratio: format_rational(&report.ratio),
        ratio_approx: CostValue::from_rational(report.ratio.clone()).approx(),
    }
}

pub fn report_to_json<T: Serialize>(dto: &T) -> String {
    to_json(dto)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    const SAMPLE: &str = r#"{
        "mu": {"points": [["0"], ["1"]], "masses": ["1/2", "1/2"]},
        "nu": {"points": [["0"], ["1"]], "masses": ["0.25", "3/4"]},
        "cost": {"type": "euclidean", "p": "2"}
    }"#;

    #[test]
    fn parses_rational_and_decimal_masses() {
        let (instance, warnings) = parse_instance(SAMPLE).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(instance.m(), 2);
        assert_eq!(instance.nu().masses()[0], rat(1, 4));
    }

    #[test]
    fn save_and_load_round_trips_bit_exactly() {
        let (instance, _) = parse_instance(SAMPLE).unwrap();
        let json = instance_to_json(&instance);
        let (again, warnings) = parse_instance(&json).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(instance, again);
        assert_eq!(json, instance_to_json(&again));
    }

    #[test]
    fn zero_mass_atoms_are_stripped_with_a_warning() {
        let text = r#"{
            "mu": {"points": [["0"], ["2"], ["5"]], "masses": ["1/2", "0", "1/2"]},
            "nu": {"points": [["1"]], "masses": ["1"]},
            "cost": {"type": "euclidean", "p": "1"}
        }"#;
        let (instance, warnings) = parse_instance(text).unwrap();
        assert_eq!(instance.m(), 2);
        assert_eq!(warnings, vec!["mu: dropped 1 zero-mass atom".to_string()]);
    }

    #[test]
    fn unbalanced_totals_are_rejected() {
        let text = r#"{
            "mu": {"points": [["0"]], "masses": ["1"]},
            "nu": {"points": [["1"]], "masses": ["3/4"]},
            "cost": {"type": "euclidean", "p": "1"}
        }"#;
        assert!(matches!(parse_instance(text), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_documents_are_parse_errors() {
        assert!(matches!(parse_instance("{"), Err(Error::Parse(_))));
        let bad_cost = r#"{
            "mu": {"points": [["0"]], "masses": ["1"]},
            "nu": {"points": [["1"]], "masses": ["1"]},
            "cost": {"type": "manhattan"}
        }"#;
        assert!(matches!(parse_instance(bad_cost), Err(Error::Parse(_))));
    }

    #[test]
    fn instance_hash_is_stable_and_content_sensitive() {
        let (instance, _) = parse_instance(SAMPLE).unwrap();
        assert_eq!(instance_hash(&instance), instance_hash(&instance));
        let other = instance
            .with_cost(CostSpec::euclidean(rat(1, 1)).unwrap())
            .unwrap();
        assert_ne!(instance_hash(&instance), instance_hash(&other));
        assert_eq!(instance_hash(&instance).len(), 64);
    }

    #[test]
    fn plan_round_trip() {
        let plan = TransportPlan::new(
            2,
            2,
            vec![(0, 0, rat(1, 4)), (0, 1, rat(1, 4)), (1, 1, rat(1, 2))],
        )
        .unwrap();
        let parsed = parse_plan(&plan_to_json(&plan)).unwrap();
        assert_eq!(plan, parsed);
    }

    #[test]
    fn labels_survive_the_round_trip() {
        let text = r#"{
            "mu": {"points": [["0"]], "masses": ["1"], "labels": ["origin"]},
            "nu": {"points": [["1"]], "masses": ["1"]},
            "cost": {"type": "euclidean", "p": "1"}
        }"#;
        let (instance, _) = parse_instance(text).unwrap();
        assert_eq!(instance.mu().points()[0].label.as_deref(), Some("origin"));
        let (again, _) = parse_instance(&instance_to_json(&instance)).unwrap();
        assert_eq!(instance, again);
    }
}
