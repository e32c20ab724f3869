//! Model domains in complex n-space: balls and polydiscs.
//!
//! Membership, distance to the complement and the delta-shrink are all exact
//! for both kinds, which keeps feasibility penalties and grid closures free of
//! geometric approximation error.

use num_complex::Complex64;

use crate::cvec::ComplexVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Ball { center: ComplexVector, radius: f64 },
    Polydisc { center: ComplexVector, radii: Vec<f64> },
}

impl DomainSpec {
    pub fn unit_disc() -> Self {
        DomainSpec::Ball { center: ComplexVector::from_re(0.0), radius: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Ball { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::Invalid(format!("ball radius must be positive, got {radius}")));
                }
            }
            DomainSpec::Polydisc { center, radii } => {
                if radii.len() != center.dim() {
                    return Err(Error::DimensionMismatch { expected: center.dim(), got: radii.len() });
                }
                if radii.iter().any(|r| !(*r > 0.0)) {
                    return Err(Error::Invalid("polydisc radii must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self {
            DomainSpec::Ball { center, .. } => center.dim(),
            DomainSpec::Polydisc { center, .. } => center.dim(),
        }
    }

    /// Signed distance to the complement: positive inside, `<= 0` outside.
    pub fn boundary_distance(&self, z: &ComplexVector) -> f64 {
        match self {
            DomainSpec::Ball { center, radius } => radius - z.dist(center),
            DomainSpec::Polydisc { center, radii } => z
                .entries()
                .iter()
                .zip(center.entries())
                .zip(radii)
                .map(|((zj, cj), rj)| rj - (zj - cj).norm())
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, z: &ComplexVector) -> bool {
        self.boundary_distance(z) > 0.0
    }

    /// Membership in the delta-shrink `{ x : dist(x, complement) > delta }`.
    pub fn contains_shrunk(&self, z: &ComplexVector, delta: f64) -> bool {
        self.boundary_distance(z) > delta
    }

    /// Radius of the largest ball around the center contained in the domain.
    pub fn inradius(&self) -> f64 {
        match self {
            DomainSpec::Ball { radius, .. } => *radius,
            DomainSpec::Polydisc { radii, .. } => radii.iter().fold(f64::INFINITY, |a, b| a.min(*b)),
        }
    }

    /// Nearest point of the closed domain (the identity inside).
    pub fn project_to_closure(&self, z: &ComplexVector) -> ComplexVector {
        match self {
            DomainSpec::Ball { center, radius } => {
                let d = z.dist(center);
                if d <= *radius {
                    z.clone()
                } else {
                    let dir = z.sub(center).scale(Complex64::new(radius / d, 0.0));
                    center.add(&dir)
                }
            }
            DomainSpec::Polydisc { center, radii } => {
                let entries = z
                    .entries()
                    .iter()
                    .zip(center.entries())
                    .zip(radii)
                    .map(|((zj, cj), rj)| {
                        let d = zj - cj;
                        if d.norm() <= *rj {
                            *zj
                        } else {
                            cj + d * (rj / d.norm())
                        }
                    })
                    .collect();
                ComplexVector::new(entries).expect("projection preserves dimension")
            }
        }
    }

    /// Axis-aligned bounding box of the closure over the flattened reals
    /// `[re_1, im_1, ...]`; returns (mins, maxs).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dimension();
        let mut mins = Vec::with_capacity(2 * n);
        let mut maxs = Vec::with_capacity(2 * n);
        match self {
            DomainSpec::Ball { center, radius } => {
                for cj in center.entries() {
                    mins.push(cj.re - radius);
                    maxs.push(cj.re + radius);
                    mins.push(cj.im - radius);
                    maxs.push(cj.im + radius);
                }
            }
            DomainSpec::Polydisc { center, radii } => {
                for (cj, rj) in center.entries().iter().zip(radii) {
                    mins.push(cj.re - rj);
                    maxs.push(cj.re + rj);
                    mins.push(cj.im - rj);
                    maxs.push(cj.im + rj);
                }
            }
        }
        (mins, maxs)
    }

    pub fn translated(&self, shift: &ComplexVector) -> DomainSpec {
        match self {
            DomainSpec::Ball { center, radius } => {
                DomainSpec::Ball { center: center.add(shift), radius: *radius }
            }
            DomainSpec::Polydisc { center, radii } => {
                DomainSpec::Polydisc { center: center.add(shift), radii: radii.clone() }
            }
        }
    }
}
