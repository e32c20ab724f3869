//! Scenario execution: the shared paths behind the command-line interface
//! and the acceptance suite.

use crate::cvec::ComplexVector;
use crate::envelope::{envelope_field, EnvelopeEstimate, OptimizerSettings};
use crate::error::{Error, Result};
use crate::mollify::{mollified_envelope_check, MollifySweepReport};
use crate::oracle::{omega_envelope_oracle, GridFunction};
use crate::scenario::Scenario;

/// Envelope estimates at every scenario point (per-point failures collected).
pub fn run_envelope(s: &Scenario) -> Vec<(ComplexVector, Result<EnvelopeEstimate>)> {
    let results = envelope_field(&s.points, &s.omega, &s.weight, &s.dom, &s.optimizer);
    s.points.iter().cloned().zip(results).collect()
}

pub fn run_oracle(s: &Scenario) -> Result<GridFunction> {
    omega_envelope_oracle(&s.omega, &s.weight, &s.dom, &s.oracle)
}

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub point: ComplexVector,
    pub oracle_value: f64,
    pub optimizer_value: f64,
    pub gap: f64,
    pub pass: bool,
    pub status: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub tolerance: f64,
    pub all_pass: bool,
}

/// Runs both sides and tabulates the sandwich gap per point.
pub fn run_compare(s: &Scenario) -> Result<CompareReport> {
    let grid = run_oracle(s)?;
    let envelopes = run_envelope(s);
    let mut rows = Vec::with_capacity(envelopes.len());
    let mut all_pass = true;
    for (point, estimate) in envelopes {
        match estimate {
            Ok(est) => {
                let oracle_value = grid.value_at(&point)?;
                let optimizer_value = est.value.finite().ok_or_else(|| {
                    Error::Invalid(format!("optimizer value is {} at a compare point", est.value))
                })?;
                let gap = (oracle_value - optimizer_value).abs();
                let pass = gap <= s.compare_tolerance;
                all_pass &= pass;
                rows.push(CompareRow {
                    point,
                    oracle_value,
                    optimizer_value,
                    gap,
                    pass,
                    status: None,
                });
            }
            Err(e) => {
                all_pass = false;
                rows.push(CompareRow {
                    point,
                    oracle_value: f64::NAN,
                    optimizer_value: f64::NAN,
                    gap: f64::NAN,
                    pass: false,
                    status: Some(e.to_string()),
                });
            }
        }
    }
    Ok(CompareReport { rows, tolerance: s.compare_tolerance, all_pass })
}

/// Optimizer settings for the smoothing sweep: the mollified objective costs
/// hundreds of expression evaluations per boundary sample, so the search gets
/// a trimmed family set and budget; solutions are chained across deltas.
pub fn mollify_sweep_settings(opt: &OptimizerSettings) -> OptimizerSettings {
    let mut families = Vec::new();
    if let Some(p) = opt.families.iter().find(|f| f.kind == crate::disc::DiscKind::Polynomial) {
        families.push(*p);
    }
    if let Some(m) = opt.families.iter().find(|f| f.kind == crate::disc::DiscKind::MoebiusWarped) {
        families.push(*m);
    }
    if families.is_empty() {
        families = opt.families.clone();
    }
    let mut quadrature = opt.quadrature.clone();
    quadrature.n_circle = quadrature.n_circle.min(128);
    OptimizerSettings {
        families,
        restarts: opt.restarts.min(3),
        max_evals: opt.max_evals.min(300),
        quadrature,
        ..opt.clone()
    }
}

/// Smoothing sweep at every scenario point.
pub fn run_mollify(s: &Scenario) -> Vec<(ComplexVector, Result<MollifySweepReport>)> {
    let opt = mollify_sweep_settings(&s.optimizer);
    s.points
        .iter()
        .map(|x| {
            let report = mollified_envelope_check(
                &s.omega,
                &s.weight,
                &s.dom,
                x,
                &s.mollifier_deltas,
                s.mollifier_n_quad,
                &opt,
                0.01,
            );
            (x.clone(), report)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_scenario() -> Scenario {
        Scenario::from_json(
            r#"{
                "schema": "plurienv/1",
                "name": "runner-smoke",
                "seed": 9,
                "domain": {"kind": "ball", "center": [[0.0, 0.0]], "radius": 1.0},
                "omega": {"psi1": {"op": "const", "value": 0.0}, "psi2": {"op": "const", "value": 0.0}},
                "weight": {
                    "phi1": {"op": "sub", "left": {"op": "const", "value": 1.0}, "right": {"op": "abs2"}},
                    "phi2": {"op": "const", "value": 0.0}
                },
                "points": [[[0.5, 0.0]]],
                "optimizer": {
                    "families": [{"kind": "moebius", "degree": 1}],
                    "restarts": 2,
                    "max_evals": 250,
                    "definition_radius": 1.005,
                    "boundary_nodes": 64
                },
                "oracle": {"resolution": 48, "tol": 1e-5, "max_iter": 600}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn compare_passes_on_the_smoke_scenario() {
        let s = small_scenario();
        let report = run_compare(&s).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.all_pass, "gap {}", report.rows[0].gap);
        assert!(report.rows[0].gap <= 0.05);
    }

    #[test]
    fn truncated_budget_fails_compare() {
        let mut s = small_scenario();
        s.optimizer.restarts = 1;
        s.optimizer.max_evals = 1;
        s.optimizer.families.clear();
        s.optimizer.families.push(crate::envelope::FamilySpec {
            kind: crate::disc::DiscKind::Polynomial,
            degree: 1,
        });
        let report = run_compare(&s).unwrap();
        // the constant disc gives phi(0.5) = 0.75 against an oracle near 0
        assert!(!report.all_pass);
        assert!(report.rows[0].gap > s.compare_tolerance);
    }
}
