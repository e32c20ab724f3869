//! Green function of the unit disc, pullback densities and Riesz potentials
//! at the origin by two independent routes.
//!
//! The boundary route rests on the representation
//! `psi(f(0)) = R(0) + mean_T psi(f)`, so `R(0)` is recovered from boundary
//! samples alone, with no Hessian. The area route integrates the Green kernel
//! against the pullback density `Laplacian(psi o f)` over a polar grid and
//! serves as an independent cross-check of the boundary route.

use num_complex::Complex64;

use crate::disc::AnalyticDisc;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::potential::{CurrentSpec, PotentialExpr};

/// Default relative disagreement between the N and 2N boundary means that
/// triggers another doubling of the node count.
pub const DEFAULT_SELF_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    /// Boundary nodes on the unit circle.
    pub n_circle: usize,
    /// Radial shells of the polar area grid.
    pub n_radial: usize,
    /// Angular nodes per shell.
    pub n_angular: usize,
    /// Compare the N and 2N boundary means and double once on disagreement.
    pub self_check: bool,
    /// Relative disagreement bound for the self-check. Results still moving
    /// by more than this after the doubling are flagged unreliable.
    pub self_check_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            n_circle: 256,
            n_radial: 64,
            n_angular: 128,
            self_check: true,
            self_check_tol: DEFAULT_SELF_CHECK_TOL,
        }
    }
}

impl QuadratureConfig {
    pub fn fixed(n_circle: usize) -> Self {
        Self { n_circle, self_check: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_circle < 16 {
            return Err(Error::Invalid(format!("n_circle must be >= 16, got {}", self.n_circle)));
        }
        if self.n_radial < 8 {
            return Err(Error::Invalid(format!("n_radial must be >= 8, got {}", self.n_radial)));
        }
        if self.n_angular < 16 {
            return Err(Error::Invalid(format!("n_angular must be >= 16, got {}", self.n_angular)));
        }
        Ok(())
    }
}

/// Green function of the unit disc,
/// `G(z, w) = (1 / 2 pi) log( |z - w| / |1 - z conj(w)| )`.
/// Nonpositive on `D x D`, symmetric, vanishing as either argument
/// approaches the boundary; `-inf` on the diagonal.
pub fn green_disc(z: Complex64, w: Complex64) -> Result<ExtReal> {
    if z.norm() >= 1.0 {
        return Err(Error::OutsideUnitDisc { which: 'z', abs: z.norm() });
    }
    if w.norm() >= 1.0 {
        return Err(Error::OutsideUnitDisc { which: 'w', abs: w.norm() });
    }
    let num = (z - w).norm();
    if num == 0.0 {
        return Ok(ExtReal::NegInf);
    }
    let den = (Complex64::new(1.0, 0.0) - z * w.conj()).norm();
    Ok(ExtReal::Finite((num / den).ln() / (2.0 * std::f64::consts::PI)))
}

/// Density of the pullback measure on the parameter disc:
/// `Laplacian_t (psi o f)(t) = 4 sum_{j,k} H[j][k](f(t)) f_j'(t) conj(f_k'(t))`.
/// Nonnegative for plurisubharmonic `psi`.
pub fn pullback_density(psi: &PotentialExpr, f: &AnalyticDisc, t: Complex64) -> Result<f64> {
    let z = f.eval(t)?;
    let hess = psi.complex_hessian(&z)?;
    let fd = f.derivative(t)?;
    Ok(4.0 * hess.levi(fd.entries()))
}

/// Outcome of a boundary quadrature pass.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryEstimate {
    pub value: ExtReal,
    /// Samples discarded because the potential was `-inf` there.
    pub rejected: usize,
    /// Circle nodes actually used (after any doubling).
    pub n_circle_used: usize,
    /// False once more than 1/8 of the nodes were rejected even after doubling.
    pub reliable: bool,
}

struct CircleMean {
    mean: ExtReal,
    rejected: usize,
}

/// Means over the n-point circle grid and over its even-index half (the
/// half grid's nodes are exactly the n/2-point grid, so one sampling pass
/// serves both resolutions of the self-check).
struct NestedMeans {
    half: CircleMean,
    full: CircleMean,
}

fn circle_samples(psi: &PotentialExpr, f: &AnalyticDisc, n: usize) -> Result<Vec<ExtReal>> {
    (0..n)
        .map(|j| {
            let t = AnalyticDisc::boundary_parameter(j, n);
            let z = f.eval(t)?;
            let v = psi.eval(&z)?;
            if matches!(v, ExtReal::PosInf) {
                return Err(Error::Invalid("potential evaluated to +inf on the boundary".into()));
            }
            Ok(v)
        })
        .collect()
}

fn mean_of(samples: impl Iterator<Item = ExtReal>) -> CircleMean {
    let mut acc = 0.0;
    let mut used = 0usize;
    let mut rejected = 0usize;
    let mut undefined = false;
    for v in samples {
        match v {
            ExtReal::Finite(x) => {
                acc += x;
                used += 1;
            }
            ExtReal::NegInf => rejected += 1,
            ExtReal::Undefined => undefined = true,
            ExtReal::PosInf => undefined = true,
        }
    }
    let mean = if undefined || used == 0 {
        ExtReal::Undefined
    } else {
        ExtReal::Finite(acc / used as f64)
    };
    CircleMean { mean, rejected }
}

fn circle_mean(psi: &PotentialExpr, f: &AnalyticDisc, n: usize) -> Result<CircleMean> {
    Ok(mean_of(circle_samples(psi, f, n)?.into_iter()))
}

fn nested_means(psi: &PotentialExpr, f: &AnalyticDisc, n2: usize) -> Result<NestedMeans> {
    let samples = circle_samples(psi, f, n2)?;
    let half = mean_of(samples.iter().copied().step_by(2));
    let full = mean_of(samples.into_iter());
    Ok(NestedMeans { half, full })
}

fn reliable(rejected: usize, n: usize) -> bool {
    rejected * 8 < n
}

/// Riesz potential of `dd^c(psi o f)` at the origin via the boundary route:
/// `R = psi(f(0)) - mean_T psi(f)`. Nonpositive (up to quadrature noise) for
/// plurisubharmonic `psi`. Boundary `-inf` hits are rejected and the node
/// count is doubled once; a disc failing the rejection threshold twice is
/// flagged unreliable.
pub fn riesz_boundary(
    psi: &PotentialExpr,
    f: &AnalyticDisc,
    q: &QuadratureConfig,
) -> Result<BoundaryEstimate> {
    q.validate()?;
    let center_value = match psi.eval(&f.center())? {
        ExtReal::Finite(v) => v,
        ExtReal::NegInf => return Err(Error::SingularCenter),
        other => {
            return Err(Error::Invalid(format!("potential at disc center is {other}")));
        }
    };

    let mut n;
    let mut pass;
    let mut quadrature_trusted = true;

    if q.self_check {
        // One pass over the 2N grid serves both N and 2N means.
        n = 2 * q.n_circle;
        let nested = nested_means(psi, f, n)?;
        pass = nested.full;
        if !reliable(pass.rejected, n) {
            n *= 2;
            pass = circle_mean(psi, f, n)?;
        } else if pass.rejected == 0 {
            if let (ExtReal::Finite(m1), ExtReal::Finite(m2)) = (nested.half.mean, pass.mean) {
                if (m1 - m2).abs() > q.self_check_tol * (1.0 + m2.abs()) {
                    n *= 2;
                    let refined = nested_means(psi, f, n)?;
                    // Distrust results that keep moving under refinement.
                    if let (ExtReal::Finite(m2), ExtReal::Finite(m4)) =
                        (refined.half.mean, refined.full.mean)
                    {
                        quadrature_trusted =
                            (m2 - m4).abs() <= q.self_check_tol * (1.0 + m4.abs());
                    }
                    pass = refined.full;
                }
            }
        }
    } else {
        n = q.n_circle;
        pass = circle_mean(psi, f, n)?;
        if !reliable(pass.rejected, n) {
            n *= 2;
            pass = circle_mean(psi, f, n)?;
        }
    }

    let value = ExtReal::Finite(center_value) - pass.mean;
    Ok(BoundaryEstimate {
        value,
        rejected: pass.rejected,
        n_circle_used: n,
        reliable: reliable(pass.rejected, n) && quadrature_trusted,
    })
}

/// Riesz potential at the origin via the area route:
/// `sum over polar cells of G(0, t) * density(t) * cell area`, on midpoint
/// shells `r_i = (i - 1/2) / n_radial` which avoid both the kernel
/// singularity at 0 and the boundary zero. Errors if the density hits a
/// non-smooth point of `psi`.
pub fn riesz_area(psi: &PotentialExpr, f: &AnalyticDisc, q: &QuadratureConfig) -> Result<f64> {
    q.validate()?;
    let dr = 1.0 / q.n_radial as f64;
    let dtheta = 2.0 * std::f64::consts::PI / q.n_angular as f64;
    let mut acc = 0.0;
    for i in 1..=q.n_radial {
        let r = (i as f64 - 0.5) * dr;
        let g = r.ln() / (2.0 * std::f64::consts::PI);
        let mut ring = 0.0;
        for k in 0..q.n_angular {
            let t = Complex64::from_polar(r, k as f64 * dtheta);
            ring += pullback_density(psi, f, t)?;
        }
        acc += g * ring * r * dr * dtheta;
    }
    Ok(acc)
}

/// Riesz potential of the pullback of a two-sided current:
/// `R_{f* omega} = R_{f* dd^c psi1} - R_{f* dd^c psi2}` in extended-real
/// arithmetic; undefined when both sides are `-inf`.
#[derive(Debug, Clone, Copy)]
pub struct CurrentRiesz {
    pub value: ExtReal,
    pub rejected: usize,
    pub n_circle_used: usize,
    pub reliable: bool,
}

pub fn riesz_current(
    omega: &CurrentSpec,
    f: &AnalyticDisc,
    q: &QuadratureConfig,
) -> Result<CurrentRiesz> {
    if omega.is_singular_at(&f.center())? {
        return Err(Error::SingularCenter);
    }
    let b1 = riesz_boundary(omega.psi1(), f, q)?;
    let b2 = riesz_boundary(omega.psi2(), f, q)?;
    Ok(CurrentRiesz {
        value: b1.value - b2.value,
        rejected: b1.rejected + b2.rejected,
        n_circle_used: b1.n_circle_used.max(b2.n_circle_used),
        reliable: b1.reliable && b2.reliable,
    })
}
