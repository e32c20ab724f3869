//! The Poisson disc functional, its current-weighted variant, and the
//! potential-shift identities that tie the two together.

use crate::cvec::ComplexVector;
use crate::disc::AnalyticDisc;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::potential::{CurrentSpec, PotentialExpr, Weight};
use crate::riesz::{riesz_current, QuadratureConfig};

/// One boundary sample of a weight along a disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundarySample {
    Value(f64),
    /// The usc part was `-inf`; the sample legitimately drags the mean down.
    NegInf,
    /// The psh part was `-inf` (or the sample is otherwise unusable); the
    /// node is discarded and counted against the rejection budget.
    Reject,
}

/// Anything that can be averaged over disc boundaries. Implemented by plain
/// expression weights and by mollified weights.
pub trait BoundaryWeight: Sync {
    fn dimension(&self) -> usize;
    fn boundary_sample(&self, z: &ComplexVector) -> Result<BoundarySample>;
}

impl BoundaryWeight for Weight {
    fn dimension(&self) -> usize {
        self.dimension()
    }

    fn boundary_sample(&self, z: &ComplexVector) -> Result<BoundarySample> {
        if self.phi2().eval(z)?.is_neg_inf() {
            return Ok(BoundarySample::Reject);
        }
        Ok(match self.direct_value(z)? {
            ExtReal::Finite(v) => BoundarySample::Value(v),
            ExtReal::NegInf => BoundarySample::NegInf,
            ExtReal::PosInf | ExtReal::Undefined => BoundarySample::Reject,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FunctionalResult {
    pub value: ExtReal,
    pub n_rejected_boundary_nodes: usize,
    pub quadrature_used: QuadratureConfig,
    /// False once more than 1/8 of the boundary nodes were rejected.
    pub reliable: bool,
}

struct WeightMean {
    mean: ExtReal,
    rejected: usize,
}

fn weight_samples<W: BoundaryWeight + ?Sized>(
    w: &W,
    f: &AnalyticDisc,
    n: usize,
) -> Result<Vec<BoundarySample>> {
    (0..n)
        .map(|j| {
            let t = AnalyticDisc::boundary_parameter(j, n);
            let z = f.eval(t)?;
            w.boundary_sample(&z)
        })
        .collect()
}

fn weight_mean_of(samples: impl Iterator<Item = BoundarySample>) -> WeightMean {
    let mut acc = 0.0;
    let mut used = 0usize;
    let mut rejected = 0usize;
    let mut saw_neg_inf = false;
    for s in samples {
        match s {
            BoundarySample::Value(v) => {
                acc += v;
                used += 1;
            }
            BoundarySample::NegInf => saw_neg_inf = true,
            BoundarySample::Reject => rejected += 1,
        }
    }
    let mean = if saw_neg_inf {
        ExtReal::NegInf
    } else if used == 0 {
        ExtReal::Undefined
    } else {
        ExtReal::Finite(acc / used as f64)
    };
    WeightMean { mean, rejected }
}

fn weight_circle_mean<W: BoundaryWeight + ?Sized>(
    w: &W,
    f: &AnalyticDisc,
    n: usize,
) -> Result<WeightMean> {
    Ok(weight_mean_of(weight_samples(w, f, n)?.into_iter()))
}

/// Boundary mean of the weight along the disc: `mean_T phi(f)`.
///
/// Nodes where the psh part of the weight is `-inf` are rejected; if more
/// than 1/8 of the nodes are rejected the count is doubled once, and a disc
/// failing twice is flagged unreliable. A disc whose every sample is rejected
/// gets an undefined value (a nearby disc avoiding the singular set always
/// exists, so such discs are simply discarded from infima).
pub fn poisson_functional_with<W: BoundaryWeight + ?Sized>(
    w: &W,
    f: &AnalyticDisc,
    q: &QuadratureConfig,
) -> Result<FunctionalResult> {
    q.validate()?;
    if f.dimension() != w.dimension() {
        return Err(Error::DimensionMismatch { expected: w.dimension(), got: f.dimension() });
    }
    let mut n;
    let mut pass;
    let mut quadrature_trusted = true;
    if q.self_check {
        // One pass over the 2N grid serves both N and 2N means: the N-point
        // nodes are exactly the even-index nodes of the 2N grid.
        n = 2 * q.n_circle;
        let samples = weight_samples(w, f, n)?;
        let half = weight_mean_of(samples.iter().copied().step_by(2));
        pass = weight_mean_of(samples.into_iter());
        if pass.rejected * 8 >= n {
            n *= 2;
            pass = weight_circle_mean(w, f, n)?;
        } else if pass.rejected == 0 {
            if let (ExtReal::Finite(m1), ExtReal::Finite(m2)) = (half.mean, pass.mean) {
                if (m1 - m2).abs() > q.self_check_tol * (1.0 + m2.abs()) {
                    n *= 2;
                    let refined = weight_samples(w, f, n)?;
                    let half = weight_mean_of(refined.iter().copied().step_by(2));
                    pass = weight_mean_of(refined.into_iter());
                    if let (ExtReal::Finite(m2), ExtReal::Finite(m4)) = (half.mean, pass.mean) {
                        // Persistent disagreement under refinement means the
                        // boundary samples cannot be trusted for this disc.
                        quadrature_trusted = (m2 - m4).abs() <= q.self_check_tol * (1.0 + m4.abs());
                    }
                }
            }
        }
    } else {
        n = q.n_circle;
        pass = weight_circle_mean(w, f, n)?;
        if pass.rejected * 8 >= n {
            n *= 2;
            pass = weight_circle_mean(w, f, n)?;
        }
    }
    Ok(FunctionalResult {
        value: pass.mean,
        n_rejected_boundary_nodes: pass.rejected,
        quadrature_used: QuadratureConfig { n_circle: n, ..q.clone() },
        reliable: pass.rejected * 8 < n && quadrature_trusted,
    })
}

pub fn poisson_functional(w: &Weight, f: &AnalyticDisc, q: &QuadratureConfig) -> Result<FunctionalResult> {
    poisson_functional_with(w, f, q)
}

/// The current-weighted functional `-R_{f* omega}(0) + mean_T phi(f)`.
pub fn omega_functional(
    omega: &CurrentSpec,
    w: &Weight,
    f: &AnalyticDisc,
    q: &QuadratureConfig,
) -> Result<FunctionalResult> {
    omega_functional_with(omega, w, f, q)
}

pub fn omega_functional_with<W: BoundaryWeight + ?Sized>(
    omega: &CurrentSpec,
    w: &W,
    f: &AnalyticDisc,
    q: &QuadratureConfig,
) -> Result<FunctionalResult> {
    let rc = riesz_current(omega, f, q)?;
    let pf = poisson_functional_with(w, f, q)?;
    Ok(FunctionalResult {
        value: -rc.value + pf.value,
        n_rejected_boundary_nodes: rc.rejected + pf.n_rejected_boundary_nodes,
        quadrature_used: QuadratureConfig {
            n_circle: rc.n_circle_used.max(pf.quadrature_used.n_circle),
            ..q.clone()
        },
        reliable: rc.reliable && pf.reliable,
    })
}

/// The classical problem equivalent to `(omega, phi)`: zero current and the
/// shifted weight `(phi1 + psi1, phi2 + psi2)`. For every disc `f` avoiding
/// the singular set,
/// `omega_functional(omega, phi, f) + psi(f(0)) = poisson_functional(shifted, f)`
/// up to shared-node quadrature roundoff.
pub fn global_potential_shift(omega: &CurrentSpec, w: &Weight) -> Result<(CurrentSpec, Weight)> {
    let n = omega.dimension();
    if w.dimension() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.dimension() });
    }
    let shifted = Weight::new(
        n,
        PotentialExpr::Sum(vec![w.phi1().clone(), omega.psi1().clone()]),
        PotentialExpr::Sum(vec![w.phi2().clone(), omega.psi2().clone()]),
    )?;
    Ok((CurrentSpec::zero(n), shifted))
}

/// Absorbs the psh part of the weight into the current:
/// `(omega, phi1 - phi2) -> (omega - dd^c phi2, phi1)`. Envelopes of the two
/// problems differ exactly by `phi2` pointwise.
pub fn absorb_psh_weight(omega: &CurrentSpec, w: &Weight) -> Result<(CurrentSpec, Weight)> {
    let n = omega.dimension();
    if w.dimension() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.dimension() });
    }
    let new_current = CurrentSpec::new(
        n,
        omega.psi1().clone(),
        PotentialExpr::Sum(vec![omega.psi2().clone(), w.phi2().clone()]),
    )?;
    let new_weight = Weight::new(n, w.phi1().clone(), PotentialExpr::Const(0.0))?;
    Ok((new_current, new_weight))
}
