//! Expression-tree scalar fields on complex n-space.
//!
//! The node algebra is closed so that values, Wirtinger gradients and complex
//! Hessians `H[j][k] = d^2 u / dz_j dzbar_k` can all be computed exactly by
//! recursion. Values live in the extended reals: `log|l(z)|` is `-inf` exactly
//! on the affine zero set `{l = 0}` and `+inf` never occurs for expressions
//! built from the plurisubharmonic constructors.
//!
//! Plurisubharmonicity is tracked structurally: every constructor that
//! provably preserves it (sums, nonnegative scalings, max, smooth max,
//! holomorphic affine precomposition) propagates the flag.

use num_complex::Complex64;

use crate::cvec::{CMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;

pub const DEFAULT_SMOOTH_MAX_EPSILON: f64 = 1e-3;
pub const DEFAULT_PROBE_RADIUS: f64 = 1e-3;
const MAX_TIE_TOLERANCE: f64 = 1e-12;

/// Affine functional `l(z) = coeffs . z + offset` from C^n to C.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub coeffs: Vec<Complex64>,
    pub offset: Complex64,
}

impl AffineForm {
    pub fn eval(&self, z: &ComplexVector) -> Result<Complex64> {
        if z.dim() != self.coeffs.len() {
            return Err(Error::DimensionMismatch { expected: self.coeffs.len(), got: z.dim() });
        }
        let mut acc = self.offset;
        for (a, zj) in self.coeffs.iter().zip(z.entries()) {
            acc += a * zj;
        }
        Ok(acc)
    }
}

/// Affine map `z -> A z + b` from C^n to C^m (rows of `matrix` have length n).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub matrix: Vec<Vec<Complex64>>,
    pub offset: ComplexVector,
}

impl AffineMap {
    pub fn n_out(&self) -> usize {
        self.matrix.len()
    }

    pub fn n_in(&self) -> Result<usize> {
        let first = self
            .matrix
            .first()
            .ok_or_else(|| Error::Invalid("affine map needs at least one row".into()))?;
        let n = first.len();
        if self.matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Invalid("affine map rows have unequal length".into()));
        }
        if n == 0 {
            return Err(Error::Invalid("affine map rows must be nonempty".into()));
        }
        Ok(n)
    }

    pub fn apply(&self, z: &ComplexVector) -> Result<ComplexVector> {
        let n_in = self.n_in()?;
        if z.dim() != n_in {
            return Err(Error::DimensionMismatch { expected: n_in, got: z.dim() });
        }
        if self.offset.dim() != self.n_out() {
            return Err(Error::DimensionMismatch { expected: self.n_out(), got: self.offset.dim() });
        }
        let entries = self
            .matrix
            .iter()
            .zip(self.offset.entries())
            .map(|(row, b)| {
                row.iter().zip(z.entries()).map(|(a, zj)| a * zj).sum::<Complex64>() + b
            })
            .collect();
        ComplexVector::new(entries)
    }

    /// Translation `z -> z + b` in dimension n.
    pub fn translation(b: ComplexVector) -> Self {
        let n = b.dim();
        let mut matrix = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (j, row) in matrix.iter_mut().enumerate() {
            row[j] = Complex64::new(1.0, 0.0);
        }
        Self { matrix, offset: b }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialExpr {
    /// Constant field.
    Const(f64),
    /// `|z_j|^2` for a single coordinate.
    CoordAbs2(usize),
    /// `|z|^2`, the full squared modulus.
    Abs2,
    /// `log |l(z)|` for an affine `l`; `-inf` exactly on `{l = 0}`.
    LogAbs(AffineForm),
    Sum(Vec<PotentialExpr>),
    Diff(Box<PotentialExpr>, Box<PotentialExpr>),
    Scale(f64, Box<PotentialExpr>),
    Max(Box<PotentialExpr>, Box<PotentialExpr>),
    /// `eps * log(exp(a/eps) + exp(b/eps))`, a smooth upper bound for max.
    SmoothMax { epsilon: f64, left: Box<PotentialExpr>, right: Box<PotentialExpr> },
    /// `z -> inner(A z + b)`.
    Precompose { map: AffineMap, inner: Box<PotentialExpr> },
}

/// Value, Wirtinger gradient and complex Hessian at a point of smoothness.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<Complex64>,
    pub hess: CMatrix,
}

impl PotentialExpr {
    pub fn shifted_abs2(center: &ComplexVector) -> Self {
        // |z - a|^2 via precomposition by the translation z -> z - a.
        let neg = center.scale(Complex64::new(-1.0, 0.0));
        PotentialExpr::Precompose {
            map: AffineMap::translation(neg),
            inner: Box::new(PotentialExpr::Abs2),
        }
    }

    pub fn log_abs_coord_shift(n: usize, j: usize, a: Complex64) -> Self {
        // log |z_j - a|
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        coeffs[j] = Complex64::new(1.0, 0.0);
        PotentialExpr::LogAbs(AffineForm { coeffs, offset: -a })
    }

    /// Structural plurisubharmonicity. Sound but conservative: differences are
    /// only accepted when the subtrahend is constant.
    pub fn is_psh(&self) -> bool {
        match self {
            PotentialExpr::Const(_) => true,
            PotentialExpr::CoordAbs2(_) => true,
            PotentialExpr::Abs2 => true,
            PotentialExpr::LogAbs(_) => true,
            PotentialExpr::Sum(terms) => terms.iter().all(|t| t.is_psh()),
            PotentialExpr::Diff(a, b) => matches!(**b, PotentialExpr::Const(_)) && a.is_psh(),
            PotentialExpr::Scale(lambda, e) => *lambda == 0.0 || (*lambda > 0.0 && e.is_psh()),
            PotentialExpr::Max(a, b) => a.is_psh() && b.is_psh(),
            PotentialExpr::SmoothMax { left, right, .. } => left.is_psh() && right.is_psh(),
            PotentialExpr::Precompose { inner, .. } => inner.is_psh(),
        }
    }

    /// Checks coordinate indices and affine shapes against dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            PotentialExpr::Const(v) => {
                if !v.is_finite() {
                    return Err(Error::Invalid("non-finite constant".into()));
                }
                Ok(())
            }
            PotentialExpr::CoordAbs2(j) => {
                if *j >= n {
                    return Err(Error::DimensionMismatch { expected: *j + 1, got: n });
                }
                Ok(())
            }
            PotentialExpr::Abs2 => Ok(()),
            PotentialExpr::LogAbs(form) => {
                if form.coeffs.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: form.coeffs.len() });
                }
                Ok(())
            }
            PotentialExpr::Sum(terms) => terms.iter().try_for_each(|t| t.validate(n)),
            PotentialExpr::Diff(a, b) => {
                a.validate(n)?;
                b.validate(n)
            }
            PotentialExpr::Scale(lambda, e) => {
                if !lambda.is_finite() {
                    return Err(Error::Invalid("non-finite scale factor".into()));
                }
                e.validate(n)
            }
            PotentialExpr::Max(a, b) => {
                a.validate(n)?;
                b.validate(n)
            }
            PotentialExpr::SmoothMax { epsilon, left, right } => {
                if !(*epsilon > 0.0) {
                    return Err(Error::Invalid("smooth max needs epsilon > 0".into()));
                }
                left.validate(n)?;
                right.validate(n)
            }
            PotentialExpr::Precompose { map, inner } => {
                let n_in = map.n_in()?;
                if n_in != n {
                    return Err(Error::DimensionMismatch { expected: n, got: n_in });
                }
                if map.offset.dim() != map.n_out() {
                    return Err(Error::DimensionMismatch {
                        expected: map.n_out(),
                        got: map.offset.dim(),
                    });
                }
                inner.validate(map.n_out())
            }
        }
    }

    pub fn eval(&self, z: &ComplexVector) -> Result<ExtReal> {
        Ok(match self {
            PotentialExpr::Const(v) => ExtReal::Finite(*v),
            PotentialExpr::CoordAbs2(j) => ExtReal::Finite(z.get(*j)?.norm_sqr()),
            PotentialExpr::Abs2 => ExtReal::Finite(z.norm_sqr()),
            PotentialExpr::LogAbs(form) => {
                let v = form.eval(z)?;
                let m = v.norm();
                if m == 0.0 {
                    ExtReal::NegInf
                } else {
                    ExtReal::from_sample(m.ln())
                }
            }
            PotentialExpr::Sum(terms) => {
                let mut acc = ExtReal::Finite(0.0);
                for t in terms {
                    acc = acc + t.eval(z)?;
                }
                acc
            }
            PotentialExpr::Diff(a, b) => a.eval(z)? - b.eval(z)?,
            PotentialExpr::Scale(lambda, e) => e.eval(z)?.scale(*lambda),
            PotentialExpr::Max(a, b) => ext_max(a.eval(z)?, b.eval(z)?),
            PotentialExpr::SmoothMax { epsilon, left, right } => {
                smooth_max_value(left.eval(z)?, right.eval(z)?, *epsilon)
            }
            PotentialExpr::Precompose { map, inner } => inner.eval(&map.apply(z)?)?,
        })
    }

    /// Value, gradient and Hessian where the expression is twice
    /// differentiable; names the offending node otherwise.
    pub fn jet(&self, z: &ComplexVector) -> Result<Jet> {
        let n = z.dim();
        Ok(match self {
            PotentialExpr::Const(v) => Jet {
                value: *v,
                grad: vec![Complex64::new(0.0, 0.0); n],
                hess: CMatrix::zeros(n),
            },
            PotentialExpr::CoordAbs2(j) => {
                let zj = z.get(*j)?;
                let mut grad = vec![Complex64::new(0.0, 0.0); n];
                grad[*j] = zj.conj();
                let mut hess = CMatrix::zeros(n);
                hess.set(*j, *j, Complex64::new(1.0, 0.0));
                Jet { value: zj.norm_sqr(), grad, hess }
            }
            PotentialExpr::Abs2 => Jet {
                value: z.norm_sqr(),
                grad: z.entries().iter().map(|zj| zj.conj()).collect(),
                hess: CMatrix::identity(n),
            },
            PotentialExpr::LogAbs(form) => {
                let v = form.eval(z)?;
                if v.norm() == 0.0 {
                    return Err(Error::NonDifferentiable {
                        node: "log-modulus at its zero set".into(),
                    });
                }
                // log|l| = Re log l is pluriharmonic off the zero set:
                // grad_j = a_j / (2 l), Hessian = 0.
                let grad = form.coeffs.iter().map(|a| a / (2.0 * v)).collect();
                Jet { value: v.norm().ln(), grad, hess: CMatrix::zeros(n) }
            }
            PotentialExpr::Sum(terms) => {
                let mut value = 0.0;
                let mut grad = vec![Complex64::new(0.0, 0.0); n];
                let mut hess = CMatrix::zeros(n);
                for t in terms {
                    let jet = t.jet(z)?;
                    value += jet.value;
                    for (g, gj) in grad.iter_mut().zip(&jet.grad) {
                        *g += gj;
                    }
                    hess.add_assign(&jet.hess);
                }
                Jet { value, grad, hess }
            }
            PotentialExpr::Diff(a, b) => {
                let ja = a.jet(z)?;
                let jb = b.jet(z)?;
                let mut hess = ja.hess;
                hess.sub_assign(&jb.hess);
                Jet {
                    value: ja.value - jb.value,
                    grad: ja.grad.iter().zip(&jb.grad).map(|(x, y)| x - y).collect(),
                    hess,
                }
            }
            PotentialExpr::Scale(lambda, e) => {
                let mut jet = e.jet(z)?;
                jet.value *= lambda;
                for g in jet.grad.iter_mut() {
                    *g *= *lambda;
                }
                jet.hess.scale_assign(*lambda);
                jet
            }
            PotentialExpr::Max(a, b) => {
                let va = a.eval(z)?;
                let vb = b.eval(z)?;
                let (fa, fb) = match (va.finite(), vb.finite()) {
                    (Some(fa), Some(fb)) => (fa, fb),
                    _ => {
                        return Err(Error::NonDifferentiable {
                            node: "max with an infinite argument".into(),
                        })
                    }
                };
                let scale = 1.0 + fa.abs().max(fb.abs());
                if (fa - fb).abs() <= MAX_TIE_TOLERANCE * scale {
                    return Err(Error::NonDifferentiable {
                        node: "max with tied arguments".into(),
                    });
                }
                if fa > fb {
                    a.jet(z)?
                } else {
                    b.jet(z)?
                }
            }
            PotentialExpr::SmoothMax { epsilon, left, right } => {
                let ja = left.jet(z)?;
                let jb = right.jet(z)?;
                let eps = *epsilon;
                // p = sigmoid((a - b) / eps), computed overflow-safely.
                let d = (ja.value - jb.value) / eps;
                let p = if d >= 0.0 { 1.0 / (1.0 + (-d).exp()) } else { d.exp() / (1.0 + d.exp()) };
                let q = 1.0 - p;
                let value = ja.value.max(jb.value) + eps * (-(d.abs())).exp().ln_1p();
                let grad: Vec<Complex64> =
                    ja.grad.iter().zip(&jb.grad).map(|(ga, gb)| p * ga + q * gb).collect();
                // H = p Ha + q Hb + (p q / eps) (ga - gb)(ga - gb)^H
                let mut hess = ja.hess.clone();
                hess.scale_assign(p);
                let mut hb = jb.hess.clone();
                hb.scale_assign(q);
                hess.add_assign(&hb);
                let gdiff: Vec<Complex64> =
                    ja.grad.iter().zip(&jb.grad).map(|(ga, gb)| ga - gb).collect();
                hess.rank_one_add(&gdiff, p * q / eps);
                Jet { value, grad, hess }
            }
            PotentialExpr::Precompose { map, inner } => {
                let w = map.apply(z)?;
                let jet = inner.jet(&w)?;
                let n_in = map.n_in()?;
                // grad_z[j] = sum_m A[m][j] grad_w[m]
                let grad = (0..n_in)
                    .map(|j| {
                        map.matrix
                            .iter()
                            .zip(&jet.grad)
                            .map(|(row, g)| row[j] * g)
                            .sum::<Complex64>()
                    })
                    .collect();
                let hess = jet.hess.precompose_affine(&map.matrix, n_in);
                Jet { value: jet.value, grad, hess }
            }
        })
    }

    pub fn complex_hessian(&self, z: &ComplexVector) -> Result<CMatrix> {
        Ok(self.jet(z)?.hess)
    }
}

fn ext_max(a: ExtReal, b: ExtReal) -> ExtReal {
    use ExtReal::*;
    match (a, b) {
        (Undefined, _) | (_, Undefined) => Undefined,
        (PosInf, _) | (_, PosInf) => PosInf,
        (NegInf, x) | (x, NegInf) => x,
        (Finite(x), Finite(y)) => Finite(x.max(y)),
    }
}

fn smooth_max_value(a: ExtReal, b: ExtReal, eps: f64) -> ExtReal {
    use ExtReal::*;
    match (a, b) {
        (Undefined, _) | (_, Undefined) => Undefined,
        (PosInf, _) | (_, PosInf) => PosInf,
        (NegInf, x) | (x, NegInf) => x,
        (Finite(x), Finite(y)) => {
            let m = x.max(y);
            Finite(m + eps * (-((x - y).abs() / eps)).exp().ln_1p())
        }
    }
}

/// A current `omega = dd^c psi1 - dd^c psi2` given by two global
/// plurisubharmonic potentials. The singular set is the union of the
/// `-inf` loci of the two potentials.
#[derive(Debug, Clone)]
pub struct CurrentSpec {
    dimension: usize,
    psi1: PotentialExpr,
    psi2: PotentialExpr,
}

impl CurrentSpec {
    pub fn new(dimension: usize, psi1: PotentialExpr, psi2: PotentialExpr) -> Result<Self> {
        psi1.validate(dimension)?;
        psi2.validate(dimension)?;
        if !psi1.is_psh() {
            return Err(Error::Invalid("psi1 is not plurisubharmonic".into()));
        }
        if !psi2.is_psh() {
            return Err(Error::Invalid("psi2 is not plurisubharmonic".into()));
        }
        Ok(Self { dimension, psi1, psi2 })
    }

    /// The zero current.
    pub fn zero(dimension: usize) -> Self {
        Self { dimension, psi1: PotentialExpr::Const(0.0), psi2: PotentialExpr::Const(0.0) }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn psi1(&self) -> &PotentialExpr {
        &self.psi1
    }

    pub fn psi2(&self) -> &PotentialExpr {
        &self.psi2
    }

    /// Membership in sing(omega), decidable by evaluation.
    pub fn is_singular_at(&self, z: &ComplexVector) -> Result<bool> {
        Ok(self.psi1.eval(z)?.is_neg_inf() || self.psi2.eval(z)?.is_neg_inf())
    }

    /// `psi(z) = psi1(z) - psi2(z)` in the extended reals.
    pub fn potential_value(&self, z: &ComplexVector) -> Result<ExtReal> {
        Ok(self.psi1.eval(z)? - self.psi2.eval(z)?)
    }
}

/// Weight `phi = phi1 - phi2`: an upper semicontinuous part and a
/// plurisubharmonic part.
#[derive(Debug, Clone)]
pub struct Weight {
    dimension: usize,
    phi1: PotentialExpr,
    phi2: PotentialExpr,
}

/// Combined weight value together with whether the probe-ring fallback was
/// used (the numeric stand-in for the limsup across `phi2 = -inf`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightValue {
    pub value: ExtReal,
    pub probe_limited: bool,
}

impl Weight {
    pub fn new(dimension: usize, phi1: PotentialExpr, phi2: PotentialExpr) -> Result<Self> {
        phi1.validate(dimension)?;
        phi2.validate(dimension)?;
        if !phi2.is_psh() {
            return Err(Error::Invalid("phi2 is not plurisubharmonic".into()));
        }
        Ok(Self { dimension, phi1, phi2 })
    }

    pub fn zero(dimension: usize) -> Self {
        Self { dimension, phi1: PotentialExpr::Const(0.0), phi2: PotentialExpr::Const(0.0) }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn phi1(&self) -> &PotentialExpr {
        &self.phi1
    }

    pub fn phi2(&self) -> &PotentialExpr {
        &self.phi2
    }

    /// Direct value `phi1(z) - phi2(z)` with no probe fallback.
    pub fn direct_value(&self, z: &ComplexVector) -> Result<ExtReal> {
        Ok(self.phi1.eval(z)? - self.phi2.eval(z)?)
    }

    /// Combined weight. Where `phi2` is finite this is `phi1 - phi2`; on
    /// `phi2 = -inf` it is the maximum of `phi1 - phi2` over a fixed ring of
    /// 16 points at distance `probe_radius`, excluding `-inf` hits. If every
    /// probe lands in `phi2^{-1}(-inf)` the value is undefined.
    pub fn combined_value(&self, z: &ComplexVector, probe_radius: f64) -> Result<WeightValue> {
        if !(probe_radius > 0.0) {
            return Err(Error::Invalid("probe radius must be positive".into()));
        }
        let v2 = self.phi2.eval(z)?;
        if !v2.is_neg_inf() {
            return Ok(WeightValue { value: self.phi1.eval(z)? - v2, probe_limited: false });
        }
        let n = self.dimension;
        // Probes where phi2 itself is -inf are the excluded hits; among the
        // rest the combined value may legitimately be -inf (through phi1).
        let mut best: Option<ExtReal> = None;
        for k in 0..16usize {
            let axis = k % n;
            let angle = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
            let mut entries = z.entries().to_vec();
            entries[axis] += Complex64::from_polar(probe_radius, angle);
            let p = ComplexVector::new(entries)?;
            let v2p = self.phi2.eval(&p)?;
            if v2p.is_neg_inf() {
                continue;
            }
            let value = self.phi1.eval(&p)? - v2p;
            best = Some(match best {
                None => value,
                Some(b) => ext_max(b, value),
            });
        }
        Ok(WeightValue { value: best.unwrap_or(ExtReal::Undefined), probe_limited: true })
    }
}
