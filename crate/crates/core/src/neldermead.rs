//! Simplex-based derivative-free minimizer (Nelder-Mead).
//!
//! Deterministic given the start point, so multi-start searches stay
//! reproducible under a fixed seed.

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once the value spread over the simplex falls below this (relative).
    pub f_tol: f64,
    /// Stop once the simplex diameter falls below this (absolute).
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_evals: 2000, f_tol: 1e-13, x_tol: 1e-11 }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const BETA: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    x0: &[f64],
    steps: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let dim = x0.len();
    assert_eq!(steps.len(), dim, "one initial step per coordinate");
    if dim == 0 {
        let value = objective(x0);
        return NelderMeadResult { x: x0.to_vec(), value, evals: 1, converged: true };
    }

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        let mut xi = x0.to_vec();
        xi[i] += if steps[i] != 0.0 { steps[i] } else { 0.05 };
        let vi = eval(&xi, &mut evals);
        simplex.push((xi, vi));
    }

    let centroid = |simplex: &[(Vec<f64>, f64)]| -> Vec<f64> {
        let mut c = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (cj, xj) in c.iter_mut().zip(x) {
                *cj += xj;
            }
        }
        for cj in c.iter_mut() {
            *cj /= dim as f64;
        }
        c
    };

    let mut converged = false;
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let spread = (worst - best).abs();
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if spread <= opts.f_tol * (1.0 + best.abs()) && diameter <= opts.x_tol {
            converged = true;
            break;
        }

        let c = centroid(&simplex);
        let xw = simplex[dim].0.clone();
        let reflect: Vec<f64> =
            c.iter().zip(&xw).map(|(cj, wj)| cj + ALPHA * (cj - wj)).collect();
        let fr = eval(&reflect, &mut evals);

        if fr < simplex[0].1 {
            let expand: Vec<f64> =
                c.iter().zip(&xw).map(|(cj, wj)| cj + GAMMA * (cj - wj)).collect();
            let fe = eval(&expand, &mut evals);
            simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            // contraction, outside or inside depending on the reflected value
            let (base, fbase) =
                if fr < simplex[dim].1 { (&reflect, fr) } else { (&xw, simplex[dim].1) };
            let contract: Vec<f64> =
                c.iter().zip(base).map(|(cj, bj)| cj + BETA * (bj - cj)).collect();
            let fc = eval(&contract, &mut evals);
            if fc < fbase {
                simplex[dim] = (contract, fc);
            } else {
                // shrink toward the best vertex
                let x_best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let xs: Vec<f64> = x_best
                        .iter()
                        .zip(&entry.0)
                        .map(|(bj, xj)| bj + SIGMA * (xj - bj))
                        .collect();
                    let fs = eval(&xs, &mut evals);
                    *entry = (xs, fs);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult { x, value, evals, converged }
}
