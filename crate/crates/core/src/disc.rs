//! Closed analytic discs into complex n-space and their samplings.
//!
//! A disc is a holomorphic map defined on `D_r`, `r > 1`, so that the closed
//! unit disc sits strictly inside its domain. Two parametric families are
//! supported: vector-valued polynomials `f(t) = sum a_k t^k`, and the same
//! polynomials precomposed with a disc automorphism
//! `m_c(t) = (t + c) / (1 + conj(c) t)`, `|c| < 1`. The warped family captures
//! boundary-hugging discs at low parameter count.

use num_complex::Complex64;

use crate::cvec::ComplexVector;
use crate::error::{Error, Result};

pub const DEFAULT_DEFINITION_RADIUS: f64 = 1.05;
/// Unpacked warp parameters are clamped to |c| <= 1 - WARP_MARGIN.
pub const WARP_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscKind {
    Polynomial,
    MoebiusWarped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticDisc {
    dimension: usize,
    kind: DiscKind,
    coefficients: Vec<ComplexVector>,
    warp: Option<Complex64>,
    definition_radius: f64,
}

pub fn moebius(c: Complex64, t: Complex64) -> Complex64 {
    (t + c) / (Complex64::new(1.0, 0.0) + c.conj() * t)
}

pub fn moebius_derivative(c: Complex64, t: Complex64) -> Complex64 {
    let d = Complex64::new(1.0, 0.0) + c.conj() * t;
    Complex64::new(1.0 - c.norm_sqr(), 0.0) / (d * d)
}

impl AnalyticDisc {
    pub fn polynomial(coefficients: Vec<ComplexVector>, definition_radius: f64) -> Result<Self> {
        Self::validate_coeffs(&coefficients)?;
        if definition_radius <= 1.0 {
            return Err(Error::Invalid(format!(
                "definition radius must exceed 1, got {definition_radius}"
            )));
        }
        Ok(Self {
            dimension: coefficients[0].dim(),
            kind: DiscKind::Polynomial,
            coefficients,
            warp: None,
            definition_radius,
        })
    }

    /// `f(t) = P(m_c(t))`. If `|c| * r >= 1` the radius is shrunk to the
    /// midpoint of `(1, 1/|c|)` so that `m_c` stays holomorphic on `D_r`.
    pub fn moebius_warped(
        coefficients: Vec<ComplexVector>,
        warp: Complex64,
        definition_radius: f64,
    ) -> Result<Self> {
        Self::validate_coeffs(&coefficients)?;
        if warp.norm() >= 1.0 {
            return Err(Error::Invalid(format!("warp must satisfy |c| < 1, got |c| = {}", warp.norm())));
        }
        if definition_radius <= 1.0 {
            return Err(Error::Invalid(format!(
                "definition radius must exceed 1, got {definition_radius}"
            )));
        }
        let mut r = definition_radius;
        let cn = warp.norm();
        if cn > 0.0 && cn * r >= 1.0 {
            r = 0.5 * (1.0 + 1.0 / cn);
        }
        debug_assert!(r > 1.0 && cn * r < 1.0);
        Ok(Self {
            dimension: coefficients[0].dim(),
            kind: DiscKind::MoebiusWarped,
            coefficients,
            warp: Some(warp),
            definition_radius: r,
        })
    }

    /// The constant disc `t -> x`.
    pub fn constant(x: ComplexVector) -> Self {
        Self {
            dimension: x.dim(),
            kind: DiscKind::Polynomial,
            coefficients: vec![x],
            warp: None,
            definition_radius: DEFAULT_DEFINITION_RADIUS,
        }
    }

    fn validate_coeffs(coefficients: &[ComplexVector]) -> Result<()> {
        let first = coefficients
            .first()
            .ok_or_else(|| Error::Invalid("a disc needs at least one coefficient".into()))?;
        let n = first.dim();
        for c in coefficients {
            if c.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.dim() });
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> DiscKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[ComplexVector] {
        &self.coefficients
    }

    pub fn warp(&self) -> Option<Complex64> {
        self.warp
    }

    pub fn definition_radius(&self) -> f64 {
        self.definition_radius
    }

    fn check_t(&self, t: Complex64) -> Result<()> {
        let abs_t = t.norm();
        if abs_t >= self.definition_radius {
            return Err(Error::OutsideDefinitionRadius { abs_t, radius: self.definition_radius });
        }
        Ok(())
    }

    fn horner(&self, s: Complex64) -> ComplexVector {
        let mut acc = self.coefficients.last().expect("nonempty").clone();
        for c in self.coefficients.iter().rev().skip(1) {
            acc = acc.scale(s).add(c);
        }
        acc
    }

    fn horner_derivative(&self, s: Complex64) -> ComplexVector {
        let d = self.degree();
        if d == 0 {
            return ComplexVector::zeros(self.dimension);
        }
        let mut acc = self.coefficients[d].scale(Complex64::new(d as f64, 0.0));
        for k in (1..d).rev() {
            let term = self.coefficients[k].scale(Complex64::new(k as f64, 0.0));
            acc = acc.scale(s).add(&term);
        }
        acc
    }

    pub fn eval(&self, t: Complex64) -> Result<ComplexVector> {
        self.check_t(t)?;
        Ok(match self.warp {
            None => self.horner(t),
            Some(c) => self.horner(moebius(c, t)),
        })
    }

    /// Componentwise complex derivative `f'(t)`.
    pub fn derivative(&self, t: Complex64) -> Result<ComplexVector> {
        self.check_t(t)?;
        Ok(match self.warp {
            None => self.horner_derivative(t),
            Some(c) => {
                let s = moebius(c, t);
                self.horner_derivative(s).scale(moebius_derivative(c, t))
            }
        })
    }

    pub fn center(&self) -> ComplexVector {
        self.eval(Complex64::new(0.0, 0.0)).expect("0 is inside D_r")
    }

    /// The j-th of `n` uniform boundary parameters `e^{2 pi i j / n}`.
    pub fn boundary_parameter(j: usize, n: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64)
    }

    /// `f(e^{2 pi i j / N})` for `j = 0..N-1`. Uniform samples, so the mean of
    /// a sampled function approximates its normalized circle integral with
    /// spectral accuracy for smooth integrands.
    pub fn boundary_samples(&self, n: usize) -> Result<Vec<ComplexVector>> {
        if n < 4 {
            return Err(Error::Invalid(format!("boundary sampling needs N >= 4, got {n}")));
        }
        (0..n).map(|j| self.eval(Self::boundary_parameter(j, n))).collect()
    }
}

/// Fixes the family (dimension, kind, degree, center, radius) over which the
/// optimizer searches. The leading coefficient is never packed: the center
/// constraint `f(0) = x` is enforced by reconstructing it on unpack.
#[derive(Debug, Clone)]
pub struct DiscTemplate {
    pub kind: DiscKind,
    pub degree: usize,
    pub center: ComplexVector,
    pub definition_radius: f64,
}

impl DiscTemplate {
    pub fn new(kind: DiscKind, degree: usize, center: ComplexVector, definition_radius: f64) -> Self {
        Self { kind, degree, center, definition_radius }
    }

    pub fn dimension(&self) -> usize {
        self.center.dim()
    }

    /// Real parameters: (Re, Im) per free coefficient component, plus the warp.
    pub fn param_len(&self) -> usize {
        let base = 2 * self.dimension() * self.degree;
        match self.kind {
            DiscKind::Polynomial => base,
            DiscKind::MoebiusWarped => base + 2,
        }
    }

    pub fn pack(&self, f: &AnalyticDisc) -> Result<Vec<f64>> {
        if f.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: f.dimension() });
        }
        if f.degree() > self.degree {
            return Err(Error::Invalid(format!(
                "disc degree {} exceeds template degree {}",
                f.degree(),
                self.degree
            )));
        }
        if f.kind() != self.kind && !(f.kind() == DiscKind::Polynomial && self.kind == DiscKind::MoebiusWarped) {
            return Err(Error::Invalid("disc kind incompatible with template".into()));
        }
        let n = self.dimension();
        let mut theta = Vec::with_capacity(self.param_len());
        for k in 1..=self.degree {
            if k <= f.degree() {
                for j in 0..n {
                    let a = f.coefficients()[k].get(j)?;
                    theta.push(a.re);
                    theta.push(a.im);
                }
            } else {
                theta.extend(std::iter::repeat_n(0.0, 2 * n));
            }
        }
        if self.kind == DiscKind::MoebiusWarped {
            let c = f.warp().unwrap_or(Complex64::new(0.0, 0.0));
            theta.push(c.re);
            theta.push(c.im);
        }
        Ok(theta)
    }

    pub fn unpack(&self, theta: &[f64]) -> Result<AnalyticDisc> {
        if theta.len() != self.param_len() {
            return Err(Error::DimensionMismatch { expected: self.param_len(), got: theta.len() });
        }
        let n = self.dimension();
        let mut higher: Vec<ComplexVector> = Vec::with_capacity(self.degree);
        for k in 0..self.degree {
            let base = 2 * n * k;
            let entries = (0..n)
                .map(|j| Complex64::new(theta[base + 2 * j], theta[base + 2 * j + 1]))
                .collect();
            higher.push(ComplexVector::new(entries)?);
        }
        match self.kind {
            DiscKind::Polynomial => {
                let mut coeffs = vec![self.center.clone()];
                coeffs.extend(higher);
                AnalyticDisc::polynomial(coeffs, self.definition_radius)
            }
            DiscKind::MoebiusWarped => {
                let base = 2 * n * self.degree;
                let mut c = Complex64::new(theta[base], theta[base + 1]);
                let max_abs = 1.0 - WARP_MARGIN;
                if c.norm() > max_abs {
                    c *= max_abs / c.norm();
                }
                // a_0 = center - sum_{k>=1} a_k c^k so that P(c) = center.
                let mut a0 = self.center.clone();
                let mut cpow = Complex64::new(1.0, 0.0);
                for coeff in &higher {
                    cpow *= c;
                    a0 = a0.sub(&coeff.scale(cpow));
                }
                let mut coeffs = vec![a0];
                coeffs.extend(higher);
                AnalyticDisc::moebius_warped(coeffs, c, self.definition_radius)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_poly(coeffs: &[Complex64], r: f64) -> AnalyticDisc {
        AnalyticDisc::polynomial(coeffs.iter().map(|&z| ComplexVector::scalar(z)).collect(), r).unwrap()
    }

    #[test]
    fn constant_disc_evaluates_to_its_value() {
        let x = ComplexVector::new(vec![c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        let f = AnalyticDisc::constant(x.clone());
        for t in [c(0.0, 0.0), c(0.9, 0.1), c(-1.0, 0.0)] {
            assert_eq!(f.eval(t).unwrap(), x);
        }
    }

    #[test]
    fn linear_disc_evaluation() {
        // f(t) = 0.2 + 0.3 t at t = 1 -> 0.5
        let f = scalar_poly(&[c(0.2, 0.0), c(0.3, 0.0)], 1.05);
        let v = f.eval(c(1.0, 0.0)).unwrap();
        assert!((v.get(0).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn warped_identity_evaluates_moebius() {
        // P(t) = t, c = 0.5: f(0) = m_c(0) = c
        let f = AnalyticDisc::moebius_warped(
            vec![ComplexVector::from_re(0.0), ComplexVector::from_re(1.0)],
            c(0.5, 0.0),
            1.05,
        )
        .unwrap();
        let v = f.eval(c(0.0, 0.0)).unwrap();
        assert!((v.get(0).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_cases() {
        // f(t) = x + b t -> f' = b everywhere
        let f = scalar_poly(&[c(0.2, 0.0), c(0.3, 0.0)], 1.05);
        for t in [c(0.0, 0.0), c(0.3, -0.6)] {
            assert!((f.derivative(t).unwrap().get(0).unwrap() - c(0.3, 0.0)).norm() < 1e-15);
        }
        // f(t) = t^2 at t = 0.5 -> 1.0
        let g = scalar_poly(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1.05);
        assert!((g.derivative(c(0.5, 0.0)).unwrap().get(0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        // warped P(t) = t, c = 0.5 at t = 0 -> 1 - |c|^2 = 0.75
        let w = AnalyticDisc::moebius_warped(
            vec![ComplexVector::from_re(0.0), ComplexVector::from_re(1.0)],
            c(0.5, 0.0),
            1.05,
        )
        .unwrap();
        assert!((w.derivative(c(0.0, 0.0)).unwrap().get(0).unwrap() - c(0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_outside_radius_is_an_error() {
        let f = scalar_poly(&[c(0.0, 0.0), c(1.0, 0.0)], 1.05);
        assert!(matches!(
            f.eval(c(1.05, 0.0)),
            Err(Error::OutsideDefinitionRadius { .. })
        ));
        assert!(f.eval(c(1.04, 0.0)).is_ok());
    }

    #[test]
    fn warp_radius_is_shrunk_when_needed() {
        // |c| = 0.98, requested r = 1.05 would put the pole inside D_r.
        let f = AnalyticDisc::moebius_warped(
            vec![ComplexVector::from_re(0.0), ComplexVector::from_re(1.0)],
            c(0.98, 0.0),
            1.05,
        )
        .unwrap();
        let r = f.definition_radius();
        assert!(r > 1.0, "r = {r}");
        assert!(0.98 * r < 1.0, "pole must stay outside, r = {r}");
    }

    #[test]
    fn boundary_samples_unit_circle() {
        let f = scalar_poly(&[c(0.0, 0.0), c(1.0, 0.0)], 1.05);
        let s = f.boundary_samples(4).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (got, want) in s.iter().zip(expected) {
            assert!((got.get(0).unwrap() - want).norm() < 1e-15);
        }
        let x = ComplexVector::from_re(0.25);
        let cst = AnalyticDisc::constant(x.clone());
        for v in cst.boundary_samples(8).unwrap() {
            assert_eq!(v, x);
        }
        assert!(f.boundary_samples(3).is_err());
    }

    #[test]
    fn boundary_mean_matches_power_sum() {
        // Parseval: mean |f|^2 over the circle = sum |a_k|^2, exact once
        // N > 2 * degree. f(t) = 0.2 + 0.3 t -> 0.13.
        let f = scalar_poly(&[c(0.2, 0.0), c(0.3, 0.0)], 1.05);
        let s = f.boundary_samples(64).unwrap();
        let mean: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / 64.0;
        assert!((mean - 0.13).abs() < 1e-15, "mean = {mean}");
    }

    #[test]
    fn quadrature_exactness_threshold() {
        // degree-3 disc, |f|^2 has trigonometric degree 3*2; exact once N > 6.
        let coeffs = [c(0.1, 0.2), c(0.3, -0.1), c(0.05, 0.0), c(-0.2, 0.1)];
        let f = scalar_poly(&coeffs, 1.05);
        let exact: f64 = coeffs.iter().map(|a| a.norm_sqr()).sum();
        for n in [7usize, 8, 64] {
            let s = f.boundary_samples(n).unwrap();
            let mean: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
            assert!((mean - exact).abs() < 1e-14, "N = {n}: {mean} vs {exact}");
        }
    }

    #[test]
    fn discrete_harmonicity_of_components() {
        // |f(t+h)+f(t-h)+f(t+ih)+f(t-ih) - 4 f(t)| = O(h^4) for holomorphic f.
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let h = 1e-4;
        for _ in 0..25 {
            let coeffs: Vec<ComplexVector> = (0..=rng.gen_range(1..4))
                .map(|_| ComplexVector::scalar(c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))))
                .collect();
            let f = if rng.gen_bool(0.5) {
                AnalyticDisc::polynomial(coeffs, 1.05).unwrap()
            } else {
                let warp = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
                AnalyticDisc::moebius_warped(coeffs, warp, 1.05).unwrap()
            };
            let t = c(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let sum = f
                .eval(t + c(h, 0.0))
                .unwrap()
                .add(&f.eval(t - c(h, 0.0)).unwrap())
                .add(&f.eval(t + c(0.0, h)).unwrap())
                .add(&f.eval(t - c(0.0, h)).unwrap())
                .sub(&f.eval(t).unwrap().scale(c(4.0, 0.0)));
            let ratio = sum.norm_sqr().sqrt() / (h * h);
            assert!(ratio < 1e-4, "laplacian defect {ratio}");
        }
    }

    #[test]
    fn unpack_clamps_warp_and_keeps_invariants() {
        let template = DiscTemplate::new(
            DiscKind::MoebiusWarped,
            1,
            ComplexVector::from_re(0.2),
            1.05,
        );
        let theta = vec![0.3, 0.0, 5.0, 0.0]; // |c| = 5 gets clamped
        let f = template.unpack(&theta).unwrap();
        let cw = f.warp().unwrap();
        assert!((cw.norm() - (1.0 - WARP_MARGIN)).abs() < 1e-12);
        assert!(cw.norm() * f.definition_radius() < 1.0);
        assert!(f.definition_radius() > 1.0);
        // center constraint holds after clamping
        let center = f.center();
        assert!((center.get(0).unwrap() - c(0.2, 0.0)).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn pack_unpack_round_trip(
            reals in proptest::collection::vec(-2.0f64..2.0, 6),
            warp_re in -0.6f64..0.6,
            warp_im in -0.6f64..0.6,
        ) {
            // degree-3 scalar polynomial template
            let template = DiscTemplate::new(
                DiscKind::Polynomial,
                3,
                ComplexVector::from_re(0.1),
                1.05,
            );
            let f = template.unpack(&reals).unwrap();
            let packed = template.pack(&f).unwrap();
            prop_assert_eq!(&packed, &reals);
            let g = template.unpack(&packed).unwrap();
            prop_assert_eq!(g, f);

            // warped round trip
            let wt = DiscTemplate::new(
                DiscKind::MoebiusWarped,
                1,
                ComplexVector::from_re(0.1),
                1.05,
            );
            let theta = vec![reals[0], reals[1], warp_re, warp_im];
            let wf = wt.unpack(&theta).unwrap();
            let wpacked = wt.pack(&wf).unwrap();
            prop_assert_eq!(&wpacked, &theta);
            prop_assert_eq!(wt.unpack(&wpacked).unwrap(), wf);
        }

        #[test]
        fn center_constraint_after_unpack(
            reals in proptest::collection::vec(-1.5f64..1.5, 4),
        ) {
            let wt = DiscTemplate::new(
                DiscKind::MoebiusWarped,
                1,
                ComplexVector::from_re(0.3),
                1.05,
            );
            let f = wt.unpack(&reals).unwrap();
            let center = f.center();
            prop_assert!((center.get(0).unwrap() - Complex64::new(0.3, 0.0)).norm() < 1e-12);
        }
    }
}
