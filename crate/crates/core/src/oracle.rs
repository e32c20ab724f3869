//! Independent estimate of the supremum side: the largest plurisubharmonic
//! minorant of an obstacle on a grid, by monotone relaxation.
//!
//! Starting from the obstacle itself, every sweep replaces each interior node
//! value by the minimum of the obstacle and the smallest circle average of
//! the current iterate over a fixed set of complex directions. Every true
//! minorant satisfies the sub-mean inequality at every admissible radius, so
//! each iterate dominates the true minorant: the iteration decreases
//! monotonically toward an over-estimate whose quality is measured by the
//! sandwich gap against the disc-functional optimizer, never assumed.
//!
//! Grid closure: lattice nodes outside the domain are frozen at the obstacle
//! value of their boundary projection (the Dirichlet data a minorant must
//! respect), and the averaging radius shrinks near the boundary so circles
//! stay inside the domain.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cvec::ComplexVector;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::functional::global_potential_shift;
use crate::potential::{CurrentSpec, Weight};

#[derive(Debug, Clone)]
pub struct OracleSettings {
    /// Grid points per real axis.
    pub resolution: usize,
    /// Complex averaging directions (forced to 1 in dimension 1).
    pub n_dirs: usize,
    /// Points per averaging circle.
    pub circle_points: usize,
    /// Final averaging radius in units of the grid spacing.
    pub rho_spacings: f64,
    /// Stop once the sup-norm update falls below this.
    pub tol: f64,
    /// Total sweep budget across all radius levels.
    pub max_iter: usize,
    /// Warm-start with a coarse-to-fine radius schedule. The fixed point is
    /// governed by the final radius either way; the schedule only accelerates
    /// the approach.
    pub coarse_schedule: bool,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            resolution: 128,
            n_dirs: 8,
            circle_points: 16,
            rho_spacings: 2.0,
            tol: 1e-6,
            max_iter: 4000,
            coarse_schedule: true,
        }
    }
}

impl OracleSettings {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 8 {
            return Err(Error::Invalid(format!("resolution must be >= 8, got {}", self.resolution)));
        }
        if self.n_dirs == 0 || self.circle_points < 4 {
            return Err(Error::Invalid("need n_dirs >= 1 and circle_points >= 4".into()));
        }
        if !(self.rho_spacings > 0.0) || !(self.tol > 0.0) {
            return Err(Error::Invalid("rho and tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeKind {
    /// Updated each sweep.
    Interior,
    /// Holds Dirichlet data (outside the domain, or an exceptional obstacle node).
    Frozen,
}

#[derive(Debug, Clone, Copy)]
struct GridAxis {
    min: f64,
    step: f64,
    len: usize,
}

/// A function sampled on the bounding-box lattice of a domain.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub dom: DomainSpec,
    pub resolution: usize,
    axes: Vec<GridAxis>,
    values: Vec<f64>,
    kinds: Vec<NodeKind>,
    pub iteration_count: usize,
    pub residual: f64,
    /// Per-sweep sup-norm updates at the final averaging radius.
    pub residual_history: Vec<f64>,
    pub exceptional_nodes: usize,
}

fn node_coords(axes: &[GridAxis], mut index: usize) -> Vec<f64> {
    let mut coords = vec![0.0; axes.len()];
    for (d, axis) in axes.iter().enumerate().rev() {
        let i = index % axis.len;
        index /= axis.len;
        coords[d] = axis.min + i as f64 * axis.step;
    }
    coords
}

fn node_point(axes: &[GridAxis], index: usize) -> ComplexVector {
    ComplexVector::from_reals(&node_coords(axes, index)).expect("grid coords are valid")
}

impl GridFunction {
    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates (point, value) over nodes strictly inside the domain.
    pub fn interior_nodes(&self) -> impl Iterator<Item = (ComplexVector, f64)> + '_ {
        self.kinds.iter().enumerate().filter(|&(_i, kind)| *kind == NodeKind::Interior).map(|(i, _kind)| (node_point(&self.axes, i), self.values[i]))
    }

    /// Multilinear interpolation; clamps to the bounding box.
    pub fn value_at(&self, z: &ComplexVector) -> Result<f64> {
        let coords = z.to_reals();
        if coords.len() != self.axes.len() {
            return Err(Error::DimensionMismatch { expected: self.axes.len(), got: coords.len() });
        }
        Ok(interpolate(&self.axes, &self.values, &coords))
    }

    /// CSV rows of node coordinates and values: `z1_re,z1_im[,...],value,frozen`.
    pub fn to_csv(&self) -> String {
        let n = self.axes.len() / 2;
        let mut out = String::new();
        for j in 0..n {
            out.push_str(&format!("z{j}_re,z{j}_im,"));
        }
        out.push_str("value,frozen\n");
        for i in 0..self.values.len() {
            let coords = node_coords(&self.axes, i);
            for c in &coords {
                out.push_str(&format_f64(*c));
                out.push(',');
            }
            out.push_str(&format_f64(self.values[i]));
            out.push(',');
            out.push_str(if self.kinds[i] == NodeKind::Frozen { "1" } else { "0" });
            out.push('\n');
        }
        out
    }

    /// Residuals sampled every `stride` sweeps of the final relaxation level.
    pub fn residual_checkpoints(&self, stride: usize) -> Vec<f64> {
        self.residual_history.iter().copied().step_by(stride.max(1)).collect()
    }

    pub fn metadata_json(&self, extra: &[(&str, serde_json::Value)]) -> serde_json::Value {
        let stride = (self.residual_history.len() / 8).max(1);
        let mut meta = serde_json::json!({
            "resolution": self.resolution,
            "iterations": self.iteration_count,
            "residual": self.residual,
            "residual_checkpoints": self.residual_checkpoints(stride),
            "exceptional_nodes": self.exceptional_nodes,
            "nodes": self.node_count(),
        });
        for (k, v) in extra {
            meta[*k] = v.clone();
        }
        meta
    }

    /// Nodewise maximum with another grid of identical layout.
    pub fn nodewise_max(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&other.values) {
            *v = v.max(*w);
        }
        Ok(out)
    }
}

/// Round-trip-safe 17-significant-digit formatting shared by all CSV output.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn interpolate(axes: &[GridAxis], values: &[f64], coords: &[f64]) -> f64 {
    let dims = axes.len();
    let mut base = vec![0usize; dims];
    let mut frac = vec![0.0f64; dims];
    for (d, axis) in axes.iter().enumerate() {
        let t = (coords[d] - axis.min) / axis.step;
        let t = t.clamp(0.0, (axis.len - 1) as f64);
        let i = (t.floor() as usize).min(axis.len - 2);
        base[d] = i;
        frac[d] = t - i as f64;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << dims) {
        let mut weight = 1.0;
        let mut index = 0usize;
        for (d, axis) in axes.iter().enumerate() {
            let hi = (corner >> d) & 1 == 1;
            weight *= if hi { frac[d] } else { 1.0 - frac[d] };
            index = index * axis.len + base[d] + hi as usize;
        }
        if weight != 0.0 {
            acc += weight * values[index];
        }
    }
    acc
}

/// Extended-real obstacle samples are clipped into plain floats: `-inf` and
/// undefined samples are exceptional and get a finite floor so they cannot
/// poison averages; the count is reported.
struct ClippedObstacle {
    values: Vec<f64>,
    exceptional: Vec<bool>,
}

fn clip_obstacle<F>(obstacle: &F, axes: &[GridAxis], kinds: &[NodeKind], dom: &DomainSpec) -> Result<ClippedObstacle>
where
    F: Fn(&ComplexVector) -> Result<ExtReal> + Sync,
{
    let total = kinds.len();
    let raw: Vec<ExtReal> = (0..total)
        .into_par_iter()
        .map(|i| {
            let p = node_point(axes, i);
            if kinds[i] != NodeKind::Frozen {
                return obstacle(&p);
            }
            // Frozen nodes carry max(obstacle(node), obstacle(projection)):
            // the projection supplies the Dirichlet data a minorant must
            // respect at the boundary, and taking the max with the raw
            // continuation keeps psh obstacles exact fixed points.
            let v_node = obstacle(&p)?;
            let v_proj = obstacle(&dom.project_to_closure(&p))?;
            Ok(match (v_node, v_proj) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.max(b)),
                (ExtReal::Finite(a), _) => ExtReal::Finite(a),
                (_, ExtReal::Finite(b)) => ExtReal::Finite(b),
                (a, _) => a,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in &raw {
        if let ExtReal::Finite(x) = v {
            lo = lo.min(*x);
            hi = hi.max(*x);
        }
    }
    if !lo.is_finite() {
        return Err(Error::OracleIllPosed { percent: 100.0 });
    }
    let floor = lo - 10.0 * (hi - lo).max(1.0);
    let mut values = Vec::with_capacity(total);
    let mut exceptional = Vec::with_capacity(total);
    for v in raw {
        match v {
            ExtReal::Finite(x) => {
                values.push(x);
                exceptional.push(false);
            }
            _ => {
                values.push(floor);
                exceptional.push(true);
            }
        }
    }
    Ok(ClippedObstacle { values, exceptional })
}

struct Sweeper {
    axes: Vec<GridAxis>,
    directions: Vec<Vec<Complex64>>,
    circle: Vec<Complex64>,
    /// Per-node averaging radius cap: 0.9 * distance to the complement.
    radius_cap: Vec<f64>,
}

impl Sweeper {
    fn average_floor(&self, values: &[f64], point: &[f64], rho: f64) -> f64 {
        // min over directions of the circle mean of the interpolant
        let dims = self.axes.len();
        let mut best = f64::INFINITY;
        let mut shifted = vec![0.0f64; dims];
        for dir in &self.directions {
            let mut acc = 0.0;
            for t in &self.circle {
                for (d, s) in shifted.iter_mut().enumerate() {
                    let w = dir[d / 2];
                    let delta = t * w * rho;
                    *s = point[d] + if d % 2 == 0 { delta.re } else { delta.im };
                }
                acc += interpolate(&self.axes, values, &shifted);
            }
            best = best.min(acc / self.circle.len() as f64);
        }
        best
    }
}

fn build_directions(n: usize, n_dirs: usize) -> Vec<Vec<Complex64>> {
    if n == 1 {
        return vec![vec![Complex64::new(1.0, 0.0)]];
    }
    // Deterministic spread of unit directions.
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0D15_EA5E);
    let mut dirs = Vec::with_capacity(n_dirs);
    // Coordinate axes first, then pseudo-random fills.
    for j in 0..n.min(n_dirs) {
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        d[j] = Complex64::new(1.0, 0.0);
        dirs.push(d);
    }
    while dirs.len() < n_dirs {
        let mut d: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        for z in d.iter_mut() {
            *z /= norm;
        }
        dirs.push(d);
    }
    dirs
}

/// Largest-psh-minorant estimate for a pointwise obstacle.
///
/// The iteration is monotone nonincreasing nodewise, stays above the true
/// minorant, and stops when the sup-norm update drops below `tol` or the
/// sweep budget runs out. Errors if the obstacle is `-inf` on more than 1% of
/// the interior nodes.
pub fn largest_psh_minorant<F>(
    obstacle: F,
    dom: &DomainSpec,
    settings: &OracleSettings,
) -> Result<GridFunction>
where
    F: Fn(&ComplexVector) -> Result<ExtReal> + Sync,
{
    settings.validate()?;
    dom.validate()?;
    let n = dom.dimension();
    if n > 2 {
        return Err(Error::UnsupportedDimension(n));
    }

    let (mins, maxs) = dom.bounding_box();
    let res = settings.resolution;
    let axes: Vec<GridAxis> = mins
        .iter()
        .zip(&maxs)
        .map(|(lo, hi)| GridAxis { min: *lo, step: (hi - lo) / (res - 1) as f64, len: res })
        .collect();
    let total: usize = axes.iter().map(|a| a.len).product();

    let kinds: Vec<NodeKind> = (0..total)
        .into_par_iter()
        .map(|i| {
            let p = node_point(&axes, i);
            if dom.contains(&p) {
                NodeKind::Interior
            } else {
                NodeKind::Frozen
            }
        })
        .collect();

    let clipped = clip_obstacle(&obstacle, &axes, &kinds, dom)?;
    let interior_total = kinds.iter().filter(|k| **k == NodeKind::Interior).count().max(1);
    let interior_exceptional = clipped
        .exceptional
        .iter()
        .zip(&kinds)
        .filter(|(e, k)| **e && **k == NodeKind::Interior)
        .count();
    let percent = 100.0 * interior_exceptional as f64 / interior_total as f64;
    if percent > 1.0 {
        return Err(Error::OracleIllPosed { percent });
    }
    // Exceptional interior nodes are frozen at the clip floor.
    let kinds: Vec<NodeKind> = kinds
        .iter()
        .zip(&clipped.exceptional)
        .map(|(k, e)| if *e { NodeKind::Frozen } else { *k })
        .collect();
    let obstacle_values = clipped.values;

    let h = axes.iter().map(|a| a.step).fold(0.0f64, f64::max);
    let rho_final = settings.rho_spacings * h;
    let span = axes.iter().map(|a| (a.len - 1) as f64 * a.step).fold(f64::INFINITY, f64::min);

    let radius_cap: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| {
            if kinds[i] == NodeKind::Frozen {
                0.0
            } else {
                0.9 * dom.boundary_distance(&node_point(&axes, i))
            }
        })
        .collect();

    let sweeper = Sweeper {
        axes: axes.clone(),
        directions: build_directions(n, if n == 1 { 1 } else { settings.n_dirs }),
        circle: (0..settings.circle_points)
            .map(|j| {
                Complex64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * j as f64 / settings.circle_points as f64,
                )
            })
            .collect(),
        radius_cap,
    };

    // Coarse-to-fine radius schedule: halve from a quarter of the domain span
    // down to the final radius, then settle there until tolerance.
    let mut levels: Vec<f64> = Vec::new();
    if settings.coarse_schedule {
        let mut rho = span / 4.0;
        while rho > 2.0 * rho_final {
            levels.push(rho);
            rho /= 2.0;
        }
    }
    levels.push(rho_final);

    let interior_indices: Vec<usize> = (0..total).filter(|&i| kinds[i] == NodeKind::Interior).collect();
    let mut values = obstacle_values.clone();
    let mut iterations = 0usize;
    let mut residual = f64::INFINITY;
    let mut residual_history = Vec::new();

    let n_levels = levels.len();
    for (li, &rho_level) in levels.iter().enumerate() {
        let final_level = li + 1 == n_levels;
        let level_tol = if final_level { settings.tol } else { settings.tol.max(1e-5) };
        loop {
            if iterations >= settings.max_iter {
                break;
            }
            let updates: Vec<(usize, f64)> = interior_indices
                .par_iter()
                .map(|&i| {
                    let point = node_coords(&sweeper.axes, i);
                    let rho = rho_level.min(sweeper.radius_cap[i]);
                    let new = if rho <= 0.0 {
                        values[i]
                    } else {
                        let avg = sweeper.average_floor(&values, &point, rho);
                        values[i].min(obstacle_values[i]).min(avg)
                    };
                    (i, new)
                })
                .collect();
            let mut delta = 0.0f64;
            for (i, new) in updates {
                delta = delta.max((values[i] - new).abs());
                values[i] = new;
            }
            iterations += 1;
            residual = delta;
            if final_level {
                residual_history.push(delta);
            }
            if delta < level_tol {
                break;
            }
        }
    }

    Ok(GridFunction {
        dom: dom.clone(),
        resolution: res,
        axes,
        values,
        kinds,
        iteration_count: iterations,
        residual,
        residual_history,
        exceptional_nodes: interior_exceptional,
    })
}

/// Supremum-side estimate for the weighted problem: shift to the classical
/// obstacle `(phi1 + psi1) - (phi2 + psi2)`, take the largest psh minorant,
/// then subtract the potential `psi = psi1 - psi2` nodewise.
pub fn omega_envelope_oracle(
    omega: &CurrentSpec,
    w: &Weight,
    dom: &DomainSpec,
    settings: &OracleSettings,
) -> Result<GridFunction> {
    let (_, shifted) = global_potential_shift(omega, w)?;
    let obstacle = |z: &ComplexVector| shifted.direct_value(z);
    let mut grid = largest_psh_minorant(obstacle, dom, settings)?;
    let axes = grid.axes.clone();
    let corrections: Vec<f64> = (0..grid.values.len())
        .into_par_iter()
        .map(|i| {
            let p = node_point(&axes, i);
            match omega.potential_value(&p) {
                Ok(ExtReal::Finite(v)) => v,
                _ => 0.0,
            }
        })
        .collect();
    for (v, c) in grid.values.iter_mut().zip(&corrections) {
        *v -= c;
    }
    Ok(grid)
}
