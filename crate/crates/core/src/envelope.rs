//! Upper bounds for the disc-functional envelope
//! `inf { -R_{f* omega}(0) + mean_T phi(f) : f(0) = x }`
//! by multi-start derivative-free minimization over parametric disc families.
//!
//! The search space never contains every closed disc, so the reported value
//! is an upper bound on the true envelope; certification of the other side
//! comes from the grid oracle. Feasibility (the disc image staying inside the
//! domain) is handled by penalty, and the reported optimum is always strictly
//! feasible; the constant disc at the base point guarantees a fallback.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cvec::ComplexVector;
use crate::disc::{AnalyticDisc, DiscKind, DiscTemplate, DEFAULT_DEFINITION_RADIUS};
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::functional::{omega_functional_with, BoundaryWeight, FunctionalResult};
use crate::neldermead::{minimize, NelderMeadOptions};
use crate::potential::{CurrentSpec, Weight};
use crate::riesz::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilySpec {
    pub kind: DiscKind,
    pub degree: usize,
}

#[derive(Debug, Clone)]
pub struct OptimizerSettings {
    pub families: Vec<FamilySpec>,
    /// Search starts per family (the zero start and the warm start included).
    pub restarts: usize,
    /// Objective evaluation budget per start.
    pub max_evals: usize,
    pub penalty_weight: f64,
    pub definition_radius: f64,
    /// Probe-ring radius for weight values across the psh part's poles.
    pub probe_radius: f64,
    pub quadrature: QuadratureConfig,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            families: vec![
                FamilySpec { kind: DiscKind::Polynomial, degree: 1 },
                FamilySpec { kind: DiscKind::Polynomial, degree: 2 },
                FamilySpec { kind: DiscKind::Polynomial, degree: 4 },
                FamilySpec { kind: DiscKind::Polynomial, degree: 8 },
                FamilySpec { kind: DiscKind::MoebiusWarped, degree: 1 },
                FamilySpec { kind: DiscKind::MoebiusWarped, degree: 2 },
            ],
            restarts: 8,
            max_evals: 2000,
            penalty_weight: 1e6,
            definition_radius: DEFAULT_DEFINITION_RADIUS,
            probe_radius: crate::potential::DEFAULT_PROBE_RADIUS,
            quadrature: QuadratureConfig::default(),
            seed: 0,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::Invalid("optimizer needs at least one disc family".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Invalid("optimizer needs at least one start".into()));
        }
        if !(self.definition_radius > 1.0) {
            return Err(Error::Invalid(format!(
                "definition radius must exceed 1, got {}",
                self.definition_radius
            )));
        }
        if !(self.penalty_weight > 0.0) {
            return Err(Error::Invalid("penalty weight must be positive".into()));
        }
        self.quadrature.validate()
    }
}

#[derive(Debug, Clone)]
pub struct EnvelopeEstimate {
    /// Best functional value found; an upper bound on the true envelope.
    pub value: ExtReal,
    pub best_disc: AnalyticDisc,
    /// (objective evaluation index, best value so far) at improvement events.
    pub trace: Vec<(usize, f64)>,
    pub starts_used: usize,
    /// Minimum sampled distance of the disc image to the domain boundary.
    pub feasibility_margin: f64,
}

struct Candidate {
    value: ExtReal,
    disc: AnalyticDisc,
    margin: f64,
}

/// Samples the two feasibility circles `|t| = 1` and `|t| = r` and returns
/// the worst escape depth and the smallest boundary distance seen.
fn feasibility_scan(f: &AnalyticDisc, dom: &DomainSpec, n_circle: usize) -> Result<(f64, f64)> {
    let mut violation = 0.0f64;
    let mut margin = f64::INFINITY;
    // stay strictly inside the domain of definition on the outer circle
    let outer = f.definition_radius() * (1.0 - 1e-12);
    for &radius in &[1.0, outer] {
        for j in 0..n_circle {
            let t = AnalyticDisc::boundary_parameter(j, n_circle) * radius;
            let z = f.eval(t)?;
            let d = dom.boundary_distance(&z);
            margin = margin.min(d);
            if d < 0.0 {
                violation = violation.max(-d);
            }
        }
    }
    Ok((violation, margin))
}

fn evaluate_candidate<W: BoundaryWeight + ?Sized>(
    f: &AnalyticDisc,
    omega: &CurrentSpec,
    w: &W,
    dom: &DomainSpec,
    opt: &OptimizerSettings,
) -> Result<(f64, Option<Candidate>)> {
    let (violation, margin) = feasibility_scan(f, dom, opt.quadrature.n_circle)?;
    let penalty = opt.penalty_weight * violation;
    // Deep escapes are ranked by penalty alone; the functional cannot
    // influence the ordering there and is the expensive part.
    if violation > 1e-4 {
        return Ok((penalty, None));
    }
    let functional: FunctionalResult = omega_functional_with(omega, w, f, &opt.quadrature)?;
    let mut objective = functional.value.to_objective() + penalty;
    if !functional.reliable {
        objective += opt.penalty_weight;
    }
    let eligible = violation == 0.0
        && margin > 0.0
        && functional.reliable
        && !functional.value.is_undefined()
        && !matches!(functional.value, ExtReal::PosInf);
    let candidate = eligible.then(|| Candidate { value: functional.value, disc: f.clone(), margin });
    Ok((objective, candidate))
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; both uniforms drawn unconditionally to keep the stream
    // length deterministic.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[allow(clippy::too_many_arguments)]
fn run_family<W: BoundaryWeight + ?Sized>(
    x: &ComplexVector,
    omega: &CurrentSpec,
    w: &W,
    dom: &DomainSpec,
    opt: &OptimizerSettings,
    family: FamilySpec,
    rng: &mut ChaCha8Rng,
    best: &mut Option<Candidate>,
    trace: &mut Vec<(usize, f64)>,
    eval_count: &mut usize,
    starts_used: &mut usize,
) -> Result<()> {
    let template = DiscTemplate::new(family.kind, family.degree, x.clone(), opt.definition_radius);
    let dim = template.param_len();
    let sigma = 0.5 * dom.boundary_distance(x);

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(opt.restarts);
    starts.push(vec![0.0; dim]);
    if let Some(b) = best.as_ref() {
        // Warm start: the best disc so far embedded into this family (when it
        // fits) makes enlarging the family monotone in the reported value.
        if let Ok(theta) = template.pack(&b.disc) {
            starts.push(theta);
        }
    }
    while starts.len() < opt.restarts {
        let theta: Vec<f64> = (0..dim).map(|_| sigma * gaussian(rng)).collect();
        starts.push(theta);
    }

    let mut steps = vec![(0.25 * sigma).max(0.02); dim];
    if family.kind == DiscKind::MoebiusWarped {
        // warp coordinates live in the unit disc; give them their own scale
        steps[dim - 2] = 0.15;
        steps[dim - 1] = 0.15;
    }

    for theta0 in starts {
        *starts_used += 1;
        let mut local_error: Option<Error> = None;
        let mut local_evals = 0usize;
        let objective = |theta: &[f64]| -> f64 {
            local_evals += 1;
            let disc = match template.unpack(theta) {
                Ok(d) => d,
                Err(_) => return 1e19,
            };
            match evaluate_candidate(&disc, omega, w, dom, opt) {
                Ok((obj, _)) => obj,
                Err(e) => {
                    local_error.get_or_insert(e);
                    1e19
                }
            }
        };
        let nm_opts = NelderMeadOptions { max_evals: opt.max_evals, ..Default::default() };
        let result = minimize(objective, &theta0, &steps, &nm_opts);
        *eval_count += local_evals;
        if let Some(e) = local_error {
            // Centered templates cannot produce singular-center failures;
            // anything that does surface here is structural and fatal.
            return Err(e);
        }
        if let Ok(disc) = template.unpack(&result.x) {
            if let (_, Some(candidate)) = evaluate_candidate(&disc, omega, w, dom, opt)? {
                let improved =
                    best.as_ref().is_none_or(|b| candidate.value.better_minimum_than(b.value));
                if improved {
                    if let ExtReal::Finite(v) = candidate.value {
                        trace.push((*eval_count, v));
                    }
                    *best = Some(candidate);
                }
            }
        }
    }
    Ok(())
}

/// Envelope upper bound at one point, for a generic boundary weight.
/// `warm_start` seeds the search with a known good disc (used by the
/// mollification sweep to chain solutions across smoothing scales).
pub fn envelope_at_with<W: BoundaryWeight + ?Sized>(
    x: &ComplexVector,
    omega: &CurrentSpec,
    w: &W,
    dom: &DomainSpec,
    opt: &OptimizerSettings,
    warm_start: Option<&AnalyticDisc>,
) -> Result<EnvelopeEstimate> {
    opt.validate()?;
    dom.validate()?;
    if x.dim() != dom.dimension() || x.dim() != omega.dimension() || x.dim() != w.dimension() {
        return Err(Error::DimensionMismatch { expected: dom.dimension(), got: x.dim() });
    }
    if !dom.contains(x) {
        return Err(Error::OutsideDomain);
    }
    if omega.is_singular_at(x)? {
        return Err(Error::SingularCenter);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let mut best: Option<Candidate> = None;
    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut eval_count = 0usize;
    let mut starts_used = 0usize;

    // The constant disc is always a candidate; it caps the estimate by the
    // weight value at the center.
    let constant = AnalyticDisc::constant(x.clone());
    eval_count += 1;
    if let (_, Some(candidate)) = evaluate_candidate(&constant, omega, w, dom, opt)? {
        if let ExtReal::Finite(v) = candidate.value {
            trace.push((eval_count, v));
        }
        best = Some(candidate);
    }
    if let Some(f) = warm_start {
        if f.dimension() == x.dim() {
            eval_count += 1;
            if let (_, Some(candidate)) = evaluate_candidate(f, omega, w, dom, opt)? {
                let improved =
                    best.as_ref().is_none_or(|b| candidate.value.better_minimum_than(b.value));
                if improved {
                    if let ExtReal::Finite(v) = candidate.value {
                        trace.push((eval_count, v));
                    }
                    best = Some(candidate);
                }
            }
        }
    }

    for &family in &opt.families {
        run_family(
            x,
            omega,
            w,
            dom,
            opt,
            family,
            &mut rng,
            &mut best,
            &mut trace,
            &mut eval_count,
            &mut starts_used,
        )?;
    }

    let best = best.ok_or(Error::NoFeasibleDisc)?;
    Ok(EnvelopeEstimate {
        value: best.value,
        best_disc: best.disc,
        trace,
        starts_used,
        feasibility_margin: best.margin,
    })
}

/// Envelope upper bound at one point for an expression weight.
pub fn envelope_at(
    x: &ComplexVector,
    omega: &CurrentSpec,
    w: &Weight,
    dom: &DomainSpec,
    opt: &OptimizerSettings,
) -> Result<EnvelopeEstimate> {
    envelope_at_with(x, omega, w, dom, opt, None)
}

/// Batch evaluation; points run concurrently, each with a seed derived
/// deterministically from the base seed and the point index. Per-point
/// failures are collected, not fatal.
pub fn envelope_field(
    points: &[ComplexVector],
    omega: &CurrentSpec,
    w: &Weight,
    dom: &DomainSpec,
    opt: &OptimizerSettings,
) -> Vec<Result<EnvelopeEstimate>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let per_point = OptimizerSettings { seed: point_seed(opt.seed, i), ..opt.clone() };
            envelope_at(x, omega, w, dom, &per_point)
        })
        .collect()
}

pub fn point_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
