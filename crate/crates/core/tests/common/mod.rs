//! Shared generators and loaders for the integration suites.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use plurienv_core::{AnalyticDisc, ComplexVector, PotentialExpr, Scenario};

pub fn load_scenario(name: &str) -> Scenario {
    let path = format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path}: {e}"));
    Scenario::from_json(&text).unwrap_or_else(|e| panic!("compiling {path}: {e}"))
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexVector {
    ComplexVector::new(
        (0..n).map(|_| c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))).collect(),
    )
    .unwrap()
}

/// Random smooth plurisubharmonic expression (no poles): positive
/// combinations of squared moduli, smooth maxima and affine precompositions.
pub fn random_smooth_psh(rng: &mut ChaCha8Rng, n: usize) -> PotentialExpr {
    let atom = |rng: &mut ChaCha8Rng| -> PotentialExpr {
        match rng.gen_range(0..3) {
            0 => PotentialExpr::Abs2,
            1 => PotentialExpr::CoordAbs2(rng.gen_range(0..n)),
            _ => PotentialExpr::shifted_abs2(&random_point(rng, n, 0.4)),
        }
    };
    let a = atom(rng);
    let b = atom(rng);
    match rng.gen_range(0..4) {
        0 => PotentialExpr::Sum(vec![
            a,
            PotentialExpr::Scale(rng.gen_range(0.1..1.5), Box::new(b)),
        ]),
        1 => PotentialExpr::SmoothMax { epsilon: 0.05, left: Box::new(a), right: Box::new(b) },
        2 => PotentialExpr::Sum(vec![a, PotentialExpr::Const(rng.gen_range(-0.5..0.5))]),
        _ => PotentialExpr::Scale(rng.gen_range(0.2..1.2), Box::new(a)),
    }
}

/// Random plurisubharmonic expression that may carry logarithmic poles.
pub fn random_psh_with_poles(rng: &mut ChaCha8Rng, n: usize) -> PotentialExpr {
    if rng.gen_bool(0.5) {
        random_smooth_psh(rng, n)
    } else {
        let pole = random_point(rng, n, 0.6);
        PotentialExpr::Sum(vec![
            random_smooth_psh(rng, n),
            PotentialExpr::Scale(
                rng.gen_range(0.05..0.5),
                Box::new(PotentialExpr::log_abs_coord_shift(
                    n,
                    rng.gen_range(0..n),
                    pole.get(0).unwrap(),
                )),
            ),
        ])
    }
}

/// Random scalar polynomial disc with coefficients scaled to stay well inside
/// the unit disc.
pub fn random_disc(rng: &mut ChaCha8Rng, max_degree: usize) -> AnalyticDisc {
    let d = rng.gen_range(1..=max_degree);
    let coeffs = (0..=d)
        .map(|k| {
            let scale = if k == 0 { 0.3 } else { 0.35 / (k as f64) };
            ComplexVector::scalar(c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
        })
        .collect();
    AnalyticDisc::polynomial(coeffs, 1.05).unwrap()
}
