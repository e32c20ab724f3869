//! Scenario files: the JSON surface that drives batch runs.
//!
//! Schema `plurienv/1`. Complex numbers are `[re, im]` pairs; scalar fields
//! that benefit from diff-friendly exactness (tolerances, deltas, radii)
//! accept either a JSON number or a decimal string. Canonical serialization
//! emits numbers (shortest round-trip form), so parse -> serialize -> parse
//! is the identity on canonical files.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cvec::ComplexVector;
use crate::disc::{AnalyticDisc, DiscKind};
use crate::domain::DomainSpec;
use crate::envelope::{FamilySpec, OptimizerSettings};
use crate::error::{Error, Result};
use crate::oracle::OracleSettings;
use crate::potential::{AffineForm, AffineMap, CurrentSpec, PotentialExpr, Weight};
use crate::riesz::QuadratureConfig;

pub const SCHEMA_VERSION: &str = "plurienv/1";

/// f64 that deserializes from a number or a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dec(pub f64);

impl Serialize for Dec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Dec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Dec(x)),
            Raw::Str(s) => s
                .trim()
                .parse::<f64>()
                .map(Dec)
                .map_err(|e| D::Error::custom(format!("bad decimal string {s:?}: {e}"))),
        }
    }
}

pub type ComplexPair = [f64; 2];

fn to_complex(p: &ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn from_complex(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

fn to_cvec(pairs: &[ComplexPair]) -> Result<ComplexVector> {
    ComplexVector::new(pairs.iter().map(to_complex).collect())
}

fn from_cvec(v: &ComplexVector) -> Vec<ComplexPair> {
    v.entries().iter().map(|z| from_complex(*z)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExprJson {
    Const { value: Dec },
    Abs2,
    Abs2Coord { index: usize },
    Logabs { affine: AffineJson },
    Add { terms: Vec<ExprJson> },
    Sub { left: Box<ExprJson>, right: Box<ExprJson> },
    Scale { factor: Dec, term: Box<ExprJson> },
    Max { left: Box<ExprJson>, right: Box<ExprJson> },
    Smoothmax {
        #[serde(default = "default_epsilon")]
        epsilon: Dec,
        left: Box<ExprJson>,
        right: Box<ExprJson>,
    },
    Precompose { matrix: Vec<Vec<ComplexPair>>, offset: Vec<ComplexPair>, term: Box<ExprJson> },
}

fn default_epsilon() -> Dec {
    Dec(crate::potential::DEFAULT_SMOOTH_MAX_EPSILON)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AffineJson {
    pub a: Vec<ComplexPair>,
    pub b: ComplexPair,
}

impl ExprJson {
    pub fn to_expr(&self) -> Result<PotentialExpr> {
        Ok(match self {
            ExprJson::Const { value } => PotentialExpr::Const(value.0),
            ExprJson::Abs2 => PotentialExpr::Abs2,
            ExprJson::Abs2Coord { index } => PotentialExpr::CoordAbs2(*index),
            ExprJson::Logabs { affine } => PotentialExpr::LogAbs(AffineForm {
                coeffs: affine.a.iter().map(to_complex).collect(),
                offset: to_complex(&affine.b),
            }),
            ExprJson::Add { terms } => {
                PotentialExpr::Sum(terms.iter().map(|t| t.to_expr()).collect::<Result<_>>()?)
            }
            ExprJson::Sub { left, right } => {
                PotentialExpr::Diff(Box::new(left.to_expr()?), Box::new(right.to_expr()?))
            }
            ExprJson::Scale { factor, term } => {
                PotentialExpr::Scale(factor.0, Box::new(term.to_expr()?))
            }
            ExprJson::Max { left, right } => {
                PotentialExpr::Max(Box::new(left.to_expr()?), Box::new(right.to_expr()?))
            }
            ExprJson::Smoothmax { epsilon, left, right } => PotentialExpr::SmoothMax {
                epsilon: epsilon.0,
                left: Box::new(left.to_expr()?),
                right: Box::new(right.to_expr()?),
            },
            ExprJson::Precompose { matrix, offset, term } => PotentialExpr::Precompose {
                map: AffineMap {
                    matrix: matrix
                        .iter()
                        .map(|row| row.iter().map(to_complex).collect())
                        .collect(),
                    offset: to_cvec(offset)?,
                },
                inner: Box::new(term.to_expr()?),
            },
        })
    }

    pub fn from_expr(e: &PotentialExpr) -> ExprJson {
        match e {
            PotentialExpr::Const(v) => ExprJson::Const { value: Dec(*v) },
            PotentialExpr::Abs2 => ExprJson::Abs2,
            PotentialExpr::CoordAbs2(j) => ExprJson::Abs2Coord { index: *j },
            PotentialExpr::LogAbs(form) => ExprJson::Logabs {
                affine: AffineJson {
                    a: form.coeffs.iter().map(|z| from_complex(*z)).collect(),
                    b: from_complex(form.offset),
                },
            },
            PotentialExpr::Sum(terms) => {
                ExprJson::Add { terms: terms.iter().map(ExprJson::from_expr).collect() }
            }
            PotentialExpr::Diff(a, b) => ExprJson::Sub {
                left: Box::new(ExprJson::from_expr(a)),
                right: Box::new(ExprJson::from_expr(b)),
            },
            PotentialExpr::Scale(factor, term) => {
                ExprJson::Scale { factor: Dec(*factor), term: Box::new(ExprJson::from_expr(term)) }
            }
            PotentialExpr::Max(a, b) => ExprJson::Max {
                left: Box::new(ExprJson::from_expr(a)),
                right: Box::new(ExprJson::from_expr(b)),
            },
            PotentialExpr::SmoothMax { epsilon, left, right } => ExprJson::Smoothmax {
                epsilon: Dec(*epsilon),
                left: Box::new(ExprJson::from_expr(left)),
                right: Box::new(ExprJson::from_expr(right)),
            },
            PotentialExpr::Precompose { map, inner } => ExprJson::Precompose {
                matrix: map
                    .matrix
                    .iter()
                    .map(|row| row.iter().map(|z| from_complex(*z)).collect())
                    .collect(),
                offset: from_cvec(&map.offset),
                term: Box::new(ExprJson::from_expr(inner)),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainJson {
    Ball { center: Vec<ComplexPair>, radius: Dec },
    Polydisc { center: Vec<ComplexPair>, radii: Vec<Dec> },
}

impl DomainJson {
    fn to_domain(&self) -> Result<DomainSpec> {
        let dom = match self {
            DomainJson::Ball { center, radius } => {
                DomainSpec::Ball { center: to_cvec(center)?, radius: radius.0 }
            }
            DomainJson::Polydisc { center, radii } => DomainSpec::Polydisc {
                center: to_cvec(center)?,
                radii: radii.iter().map(|r| r.0).collect(),
            },
        };
        dom.validate()?;
        Ok(dom)
    }

    pub fn from_domain(d: &DomainSpec) -> DomainJson {
        match d {
            DomainSpec::Ball { center, radius } => {
                DomainJson::Ball { center: from_cvec(center), radius: Dec(*radius) }
            }
            DomainSpec::Polydisc { center, radii } => DomainJson::Polydisc {
                center: from_cvec(center),
                radii: radii.iter().map(|r| Dec(*r)).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CurrentJson {
    pub psi1: ExprJson,
    pub psi2: ExprJson,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WeightJson {
    pub phi1: ExprJson,
    pub phi2: ExprJson,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKindJson {
    Polynomial,
    Moebius,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub kind: FamilyKindJson,
    pub degree: usize,
}

fn default_restarts() -> usize {
    8
}
fn default_max_evals() -> usize {
    2000
}
fn default_penalty() -> Dec {
    Dec(1e6)
}
fn default_radius() -> Dec {
    Dec(crate::disc::DEFAULT_DEFINITION_RADIUS)
}
fn default_probe() -> Dec {
    Dec(crate::potential::DEFAULT_PROBE_RADIUS)
}
fn default_boundary_nodes() -> usize {
    256
}
fn default_self_check() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OptimizerJson {
    pub families: Vec<FamilyJson>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
    #[serde(default = "default_penalty")]
    pub penalty_weight: Dec,
    #[serde(default = "default_radius")]
    pub definition_radius: Dec,
    #[serde(default = "default_probe")]
    pub probe_radius: Dec,
    #[serde(default = "default_boundary_nodes")]
    pub boundary_nodes: usize,
    #[serde(default = "default_self_check")]
    pub quadrature_self_check: bool,
}

impl OptimizerJson {
    fn to_settings(&self, seed: u64) -> Result<OptimizerSettings> {
        let families = self
            .families
            .iter()
            .map(|f| FamilySpec {
                kind: match f.kind {
                    FamilyKindJson::Polynomial => DiscKind::Polynomial,
                    FamilyKindJson::Moebius => DiscKind::MoebiusWarped,
                },
                degree: f.degree,
            })
            .collect();
        let settings = OptimizerSettings {
            families,
            restarts: self.restarts,
            max_evals: self.max_evals,
            penalty_weight: self.penalty_weight.0,
            definition_radius: self.definition_radius.0,
            probe_radius: self.probe_radius.0,
            quadrature: QuadratureConfig {
                n_circle: self.boundary_nodes,
                self_check: self.quadrature_self_check,
                ..QuadratureConfig::default()
            },
            seed,
        };
        settings.validate()?;
        Ok(settings)
    }
}

fn default_n_dirs() -> usize {
    8
}
fn default_circle_points() -> usize {
    16
}
fn default_rho() -> Dec {
    Dec(2.0)
}
fn default_oracle_tol() -> Dec {
    Dec(1e-6)
}
fn default_oracle_iters() -> usize {
    4000
}
fn default_true() -> bool {
    true
}
fn default_interior_fraction() -> Dec {
    Dec(0.9)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleJson {
    pub resolution: usize,
    #[serde(default = "default_n_dirs")]
    pub n_dirs: usize,
    #[serde(default = "default_circle_points")]
    pub circle_points: usize,
    #[serde(default = "default_rho")]
    pub rho_spacings: Dec,
    #[serde(default = "default_oracle_tol")]
    pub tol: Dec,
    #[serde(default = "default_oracle_iters")]
    pub max_iter: usize,
    #[serde(default = "default_true")]
    pub coarse_schedule: bool,
    /// Fraction of the inradius inside which comparisons are evaluated.
    #[serde(default = "default_interior_fraction")]
    pub interior_fraction: Dec,
}

impl OracleJson {
    fn to_settings(&self) -> Result<OracleSettings> {
        let s = OracleSettings {
            resolution: self.resolution,
            n_dirs: self.n_dirs,
            circle_points: self.circle_points,
            rho_spacings: self.rho_spacings.0,
            tol: self.tol.0,
            max_iter: self.max_iter,
            coarse_schedule: self.coarse_schedule,
        };
        s.validate()?;
        Ok(s)
    }
}

fn default_mollify_quad() -> usize {
    crate::mollify::DEFAULT_QUAD_NODES_1D
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MollifierJson {
    pub deltas: Vec<Dec>,
    #[serde(default = "default_mollify_quad")]
    pub n_quad: usize,
}

fn default_compare_tolerance() -> Dec {
    Dec(0.05)
}

/// The on-disk scenario form.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub name: String,
    pub seed: u64,
    pub domain: DomainJson,
    pub omega: CurrentJson,
    pub weight: WeightJson,
    pub points: Vec<Vec<ComplexPair>>,
    pub optimizer: OptimizerJson,
    pub oracle: OracleJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mollifier: Option<MollifierJson>,
    #[serde(default = "default_compare_tolerance")]
    pub compare_tolerance: Dec,
}

/// A validated scenario with all pieces compiled to engine types.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub dom: DomainSpec,
    pub omega: CurrentSpec,
    pub weight: Weight,
    pub points: Vec<ComplexVector>,
    pub optimizer: OptimizerSettings,
    pub oracle: OracleSettings,
    pub mollifier_deltas: Vec<f64>,
    pub mollifier_n_quad: usize,
    pub compare_tolerance: f64,
    pub interior_fraction: f64,
}

impl ScenarioFile {
    pub fn from_json(json: &str) -> Result<ScenarioFile> {
        serde_json::from_str(json).map_err(|e| Error::Scenario(format!("parse failure: {e}")))
    }

    pub fn to_canonical_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn compile(&self) -> Result<Scenario> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Scenario(format!(
                "schema {:?} is not supported (expected {SCHEMA_VERSION:?})",
                self.schema
            )));
        }
        let dom = self.domain.to_domain()?;
        let n = dom.dimension();
        let omega = CurrentSpec::new(n, self.omega.psi1.to_expr()?, self.omega.psi2.to_expr()?)
            .map_err(|e| Error::Scenario(format!("omega: {e}")))?;
        let weight = Weight::new(n, self.weight.phi1.to_expr()?, self.weight.phi2.to_expr()?)
            .map_err(|e| Error::Scenario(format!("weight: {e}")))?;
        let mut points = Vec::with_capacity(self.points.len());
        for (i, pairs) in self.points.iter().enumerate() {
            let p = to_cvec(pairs)?;
            if p.dim() != n {
                return Err(Error::Scenario(format!(
                    "point {i} has dimension {}, domain has {n}",
                    p.dim()
                )));
            }
            if !dom.contains(&p) {
                return Err(Error::Scenario(format!("point {i} lies outside the domain")));
            }
            points.push(p);
        }
        let optimizer =
            self.optimizer.to_settings(self.seed).map_err(|e| Error::Scenario(format!("optimizer: {e}")))?;
        let oracle =
            self.oracle.to_settings().map_err(|e| Error::Scenario(format!("oracle: {e}")))?;
        let mollifier_deltas: Vec<f64> = self
            .mollifier
            .as_ref()
            .map(|m| m.deltas.iter().map(|d| d.0).collect())
            .unwrap_or_default();
        if mollifier_deltas.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Scenario("mollifier deltas must be positive".into()));
        }
        Ok(Scenario {
            name: self.name.clone(),
            seed: self.seed,
            dom,
            omega,
            weight,
            points,
            optimizer,
            oracle,
            mollifier_deltas,
            mollifier_n_quad: self.mollifier.as_ref().map(|m| m.n_quad).unwrap_or_else(default_mollify_quad),
            compare_tolerance: self.compare_tolerance.0,
            interior_fraction: self.oracle.interior_fraction.0,
        })
    }
}

impl Scenario {
    pub fn from_json(json: &str) -> Result<Scenario> {
        ScenarioFile::from_json(json)?.compile()
    }
}

/// Disc description used by the `functional` command and in CSV output.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiscJson {
    pub kind: FamilyKindJson,
    pub coefficients: Vec<Vec<ComplexPair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<ComplexPair>,
    #[serde(default = "default_radius")]
    pub radius: Dec,
}

impl DiscJson {
    pub fn from_json(json: &str) -> Result<DiscJson> {
        serde_json::from_str(json).map_err(|e| Error::Scenario(format!("disc parse failure: {e}")))
    }

    pub fn to_disc(&self) -> Result<AnalyticDisc> {
        let coeffs = self
            .coefficients
            .iter()
            .map(|pairs| to_cvec(pairs))
            .collect::<Result<Vec<_>>>()?;
        match self.kind {
            FamilyKindJson::Polynomial => AnalyticDisc::polynomial(coeffs, self.radius.0),
            FamilyKindJson::Moebius => {
                let warp = self
                    .warp
                    .ok_or_else(|| Error::Scenario("moebius disc needs a warp".into()))?;
                AnalyticDisc::moebius_warped(coeffs, to_complex(&warp), self.radius.0)
            }
        }
    }

    pub fn from_disc(f: &AnalyticDisc) -> DiscJson {
        DiscJson {
            kind: match f.kind() {
                DiscKind::Polynomial => FamilyKindJson::Polynomial,
                DiscKind::MoebiusWarped => FamilyKindJson::Moebius,
            },
            coefficients: f.coefficients().iter().map(from_cvec).collect(),
            warp: f.warp().map(from_complex),
            radius: Dec(f.definition_radius()),
        }
    }
}
