//! The non-Markovianity measure `N(Φ)`: the largest total growth of
//! `‖Φ_t(p1ρ1 − p2ρ2)‖₁` over binary ensembles.
//!
//! Two optimizers are provided. [`measure_orthogonal_scan`] searches pairs of
//! orthogonal pure states with arbitrary weights. [`measure_local`] fixes
//! one state at the center of an [`EnclosingSurface`], puts the other on the
//! surface and divides the growth by the initial trace norm. Both give the
//! same number.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    check_qubit, trace_norm, DensityMatrix, HelstromEnsemble, HermitianOperator,
};
use crate::propagator::PropagatorTable;
use crate::random;
use crate::tolerances::Tolerances;

const TOL: Tolerances = Tolerances::DEFAULT;

/// Growth rates at or below this count as flat.
pub const SIGMA_TOL: f64 = 1e-9;

/// `‖Φ_t(Δ)‖₁` on the grid with its time derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceNormTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Central differences inside, one-sided at the ends.
    pub sigma: Vec<f64>,
}

impl TraceNormTrajectory {
    pub fn from_values(times: Vec<f64>, values: Vec<f64>) -> Self {
        let n = values.len();
        let sigma = (0..n)
            .map(|k| {
                if n < 2 {
                    0.0
                } else {
                    let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
                    (values[b] - values[a]) / (times[b] - times[a])
                }
            })
            .collect();
        Self {
            times,
            values,
            sigma,
        }
    }

    fn step_increases(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.windows(2).enumerate().filter_map(|(k, v)| {
            let delta = v[1] - v[0];
            (delta > SIGMA_TOL * (self.times[k + 1] - self.times[k])).then_some((k, delta))
        })
    }

    /// Maximal runs of grid steps along which the trace norm grows.
    pub fn increasing_intervals(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut last = None;
        for (k, _) in self.step_increases() {
            match out.last_mut() {
                Some(run) if last == Some(k - 1) => run.1 = self.times[k + 1],
                _ => out.push((self.times[k], self.times[k + 1])),
            }
            last = Some(k);
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            sigma: self.sigma.iter().map(|s| s * factor).collect(),
        }
    }
}

/// `‖Φ_{t_k}(Δ)‖₁` for every grid time.
pub fn trace_norm_trajectory(
    table: &PropagatorTable,
    ensemble: &HelstromEnsemble,
) -> Result<TraceNormTrajectory> {
    if ensemble.dim() != table.dim() {
        return Err(Error::DimensionMismatch {
            expected: table.dim(),
            found: ensemble.dim(),
        });
    }
    let delta = ensemble.delta();
    let values = table
        .maps()
        .par_iter()
        .map(|m| trace_norm(&m.apply_hermitian(&delta)))
        .collect();
    Ok(TraceNormTrajectory::from_values(table.times().to_vec(), values))
}

/// Total growth: the sum of `value(end) − value(start)` over the increasing
/// runs, which is the sum of the positive grid-step increments.
pub fn accumulate_increase(traj: &TraceNormTrajectory) -> f64 {
    traj.step_increases().map(|(_, d)| d).sum()
}

/// Bloch-space form of a qubit propagator table, for fast trajectories.
///
/// Writing `Δ = ½(d·I + w·σ)`, the evolved trace norm is
/// `max(|d|, |M_t w + d c_t|)`.
#[derive(Clone, Debug)]
pub struct QubitFlow {
    times: Vec<f64>,
    affine: Vec<(Matrix3<f64>, Vector3<f64>)>,
}

impl QubitFlow {
    pub fn new(table: &PropagatorTable) -> Result<Self> {
        check_qubit(table.dim())?;
        let affine = table
            .maps()
            .iter()
            .map(|m| m.bloch_affine())
            .collect::<Result<_>>()?;
        Ok(Self {
            times: table.times().to_vec(),
            affine,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn affine(&self, k: usize) -> &(Matrix3<f64>, Vector3<f64>) {
        &self.affine[k]
    }

    fn norm_at(&self, k: usize, d: f64, w: &Vector3<f64>) -> f64 {
        let (m, c) = &self.affine[k];
        d.abs().max((m * w + c * d).norm())
    }

    pub fn values(&self, d: f64, w: [f64; 3]) -> Vec<f64> {
        let w = Vector3::from(w);
        (0..self.affine.len()).map(|k| self.norm_at(k, d, &w)).collect()
    }

    pub fn trajectory(&self, d: f64, w: [f64; 3]) -> TraceNormTrajectory {
        TraceNormTrajectory::from_values(self.times.clone(), self.values(d, w))
    }

    /// Same as `accumulate_increase(&self.trajectory(d, w))`, without
    /// allocating.
    pub fn increase(&self, d: f64, w: [f64; 3]) -> f64 {
        let w = Vector3::from(w);
        let mut total = 0.0;
        let mut prev = self.norm_at(0, d, &w);
        for k in 1..self.affine.len() {
            let cur = self.norm_at(k, d, &w);
            let delta = cur - prev;
            if delta > SIGMA_TOL * (self.times[k] - self.times[k - 1]) {
                total += delta;
            }
            prev = cur;
        }
        total
    }

    /// Increase for an ensemble given by Bloch vectors.
    pub fn ensemble_increase(&self, p1: f64, v1: [f64; 3], v2: [f64; 3]) -> f64 {
        let p2 = 1.0 - p1;
        self.increase(p1 - p2, [0, 1, 2].map(|k| p1 * v1[k] - p2 * v2[k]))
    }
}

/// Which optimizer produced a [`MeasureResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    OrthogonalScan,
    LocalRepresentation,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureResult {
    pub value: f64,
    pub optimizer: HelstromEnsemble,
    pub increasing_intervals: Vec<(f64, f64)>,
    pub method: Method,
    /// Set when the search is heuristic (dimension above 2).
    pub lower_bound: bool,
    pub evaluations: usize,
    /// Trajectory of the optimizer; rescaled for the local representation.
    #[serde(skip)]
    pub trajectory: TraceNormTrajectory,
}

/// Grid sizes and search settings for both optimizers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_weights: usize,
    pub refine: bool,
    /// Random restarts above dimension 2.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self::with_grid(24)
    }
}

impl ScanOptions {
    /// `n × 2n` directions and `⌈5n/3⌉` weights; `n = 24` is the default
    /// 24×48×40 grid.
    pub fn with_grid(n: usize) -> Self {
        let n = n.max(2);
        Self {
            n_theta: n,
            n_phi: 2 * n,
            n_weights: (5 * n).div_ceil(3),
            refine: true,
            restarts: 2000,
            seed: 0,
        }
    }
}

fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coordinate ascent with golden-section line searches in shrinking
/// brackets around the current point.
fn refine<const N: usize>(
    f: &(impl Fn(&[f64; N]) -> f64 + Sync),
    mut x: [f64; N],
    mut fx: f64,
    mut half_width: [f64; N],
    bounds: [(f64, f64); N],
    evaluations: &mut usize,
) -> ([f64; N], f64) {
    const SWEEPS: usize = 4;
    const ITERS: usize = 30;
    for _ in 0..SWEEPS {
        for i in 0..N {
            let lo = (x[i] - half_width[i]).max(bounds[i].0);
            let hi = (x[i] + half_width[i]).min(bounds[i].1);
            let line = |s: f64| {
                let mut y = x;
                y[i] = s;
                f(&y)
            };
            let (s, fs) = golden_max(&line, lo, hi, ITERS);
            *evaluations += ITERS + 2;
            if fs > fx {
                x[i] = s;
                fx = fs;
            }
            half_width[i] *= 0.5;
        }
    }
    (x, fx)
}

/// Deterministic argmax over a parallel evaluation; ties go to the lowest
/// index.
fn argmax<T: Sync>(candidates: &[T], f: impl Fn(&T) -> f64 + Sync + Send) -> (usize, f64) {
    let values: Vec<f64> = candidates.par_iter().map(&f).collect();
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
}

fn finish(
    value: f64,
    optimizer: HelstromEnsemble,
    trajectory: TraceNormTrajectory,
    method: Method,
    lower_bound: bool,
    evaluations: usize,
) -> MeasureResult {
    MeasureResult {
        value: value.max(0.0),
        optimizer,
        increasing_intervals: trajectory.increasing_intervals(),
        method,
        lower_bound,
        evaluations,
        trajectory,
    }
}

/// `N(Φ)` over orthogonal pure pairs.
///
/// For a qubit the pairs are antipodal Bloch vectors `±n(θ, φ)` with weight
/// gap `d = p1 − p2 ∈ [0, 1]`, scanned on a full grid (poles included) and
/// refined by coordinate ascent. Larger dimensions use Haar-random
/// orthogonal pairs with a weight line search, and the result is flagged as
/// a lower bound.
pub fn measure_orthogonal_scan(table: &PropagatorTable, options: &ScanOptions) -> Result<MeasureResult> {
    if table.dim() != 2 {
        return orthogonal_restarts(table, options);
    }
    let flow = QubitFlow::new(table)?;
    let (nt, np, nw) = (options.n_theta.max(2), options.n_phi.max(1), options.n_weights.max(1));
    let objective = |x: &[f64; 3]| flow.increase(x[2], direction(x[0], x[1]));
    let grid: Vec<[f64; 3]> = (0..nt)
        .flat_map(|i| {
            let theta = std::f64::consts::PI * i as f64 / (nt - 1) as f64;
            (0..np).flat_map(move |j| {
                let phi = std::f64::consts::TAU * j as f64 / np as f64;
                (0..nw).map(move |k| [theta, phi, k as f64 / nw as f64])
            })
        })
        .collect();
    let (best, mut value) = argmax(&grid, objective);
    let mut x = grid[best];
    let mut evaluations = grid.len();
    if options.refine {
        let widths = [
            std::f64::consts::PI / (nt - 1) as f64,
            std::f64::consts::TAU / np as f64,
            1.0 / nw as f64,
        ];
        let bounds = [
            (0.0, std::f64::consts::PI),
            (f64::NEG_INFINITY, f64::INFINITY),
            (0.0, 1.0),
        ];
        (x, value) = refine(&objective, x, value, widths, bounds, &mut evaluations);
    }
    let n = direction(x[0], x[1]);
    let p1 = 0.5 * (1.0 + x[2]);
    let optimizer = HelstromEnsemble::with_weight(
        p1,
        DensityMatrix::from_bloch(n)?,
        DensityMatrix::from_bloch(n.map(|c| -c))?,
    )?;
    let trajectory = flow.trajectory(x[2], n);
    Ok(finish(value, optimizer, trajectory, Method::OrthogonalScan, false, evaluations))
}

/// Increase and best weight gap for two fixed state trajectories.
fn weight_search(
    images: &[(HermitianOperator, HermitianOperator)],
    times: &[f64],
    n_weights: usize,
    refine: bool,
    p_range: (f64, f64),
    rescale: impl Fn(f64) -> f64,
) -> (f64, f64, usize) {
    let increase = |p1: f64| {
        let values: Vec<f64> = images
            .iter()
            .map(|(a, b)| trace_norm(&a.scale(p1).sub(&b.scale(1.0 - p1)).expect("same dimension")))
            .collect();
        accumulate_increase(&TraceNormTrajectory::from_values(times.to_vec(), values)) * rescale(p1)
    };
    let (lo, hi) = p_range;
    let step = (hi - lo) / n_weights as f64;
    let mut best = (lo, f64::NEG_INFINITY);
    for k in 0..n_weights {
        let p = lo + (k as f64 + 0.5) * step;
        let v = increase(p);
        if v > best.1 {
            best = (p, v);
        }
    }
    let mut evaluations = n_weights;
    if refine {
        let (p, v) = golden_max(&increase, (best.0 - step).max(lo), (best.0 + step).min(hi), 30);
        evaluations += 32;
        if v > best.1 {
            best = (p, v);
        }
    }
    (best.0, best.1, evaluations)
}

fn evolve_all(table: &PropagatorTable, x: &HermitianOperator) -> Vec<HermitianOperator> {
    table.maps().iter().map(|m| m.apply_hermitian(x)).collect()
}

fn orthogonal_restarts(table: &PropagatorTable, options: &ScanOptions) -> Result<MeasureResult> {
    let dim = table.dim();
    let candidates: Vec<(f64, f64, usize, DensityMatrix, DensityMatrix)> = (0..options.restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = random::rng(options.seed, i as u64);
            let u = random::haar_unitary(dim, &mut rng);
            let rho1 = DensityMatrix::pure(&u.column(0).into_owned()).expect("unit vector");
            let rho2 = DensityMatrix::pure(&u.column(1).into_owned()).expect("unit vector");
            let images: Vec<_> = evolve_all(table, rho1.operator())
                .into_iter()
                .zip(evolve_all(table, rho2.operator()))
                .collect();
            let (p, v, evals) =
                weight_search(&images, table.times(), options.n_weights.max(1), options.refine, (0.5, 1.0), |_| 1.0);
            (p, v, evals, rho1, rho2)
        })
        .collect();
    let evaluations = candidates.iter().map(|c| c.2).sum();
    let best = candidates
        .into_iter()
        .fold(None::<(f64, f64, usize, DensityMatrix, DensityMatrix)>, |acc, c| match acc {
            Some(a) if a.1 >= c.1 => Some(a),
            _ => Some(c),
        })
        .expect("at least one restart");
    let optimizer = HelstromEnsemble::with_weight(best.0, best.3, best.4)?;
    let trajectory = trace_norm_trajectory(table, &optimizer)?;
    Ok(finish(best.1, optimizer, trajectory, Method::OrthogonalScan, true, evaluations))
}

/// The trace-norm sphere `{σ : ‖σ − ρ‖₁ = ε}` around an interior state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnclosingSurface {
    center: DensityMatrix,
    radius: f64,
}

impl EnclosingSurface {
    /// Smallest eigenvalue accepted for the center.
    pub const MIN_INTERIOR: f64 = 0.05;

    /// Requires `λ_min(ρ) ≥ 0.05` and `0 < ε ≤ 2 λ_min(ρ)`, which keeps the
    /// whole sphere inside the state space.
    pub fn new(center: DensityMatrix, radius: f64) -> Result<Self> {
        let min = center.operator().min_eigenvalue();
        if min < Self::MIN_INTERIOR {
            return Err(Error::NotInterior {
                min_eigenvalue: min,
                required: Self::MIN_INTERIOR,
            });
        }
        if !(radius > 0.0 && radius <= 2.0 * min) {
            return Err(Error::Constraint(format!(
                "surface radius {radius} must lie in (0, {}]",
                2.0 * min
            )));
        }
        Ok(Self { center, radius })
    }

    /// Radius `min(0.5, λ_min(ρ))`.
    pub fn around(center: DensityMatrix) -> Result<Self> {
        let radius = 0.5_f64.min(center.operator().min_eigenvalue());
        Self::new(center, radius)
    }

    /// Sphere around `I/d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::around(DensityMatrix::maximally_mixed(dim))
    }

    pub fn center(&self) -> &DensityMatrix {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The surface point `ρ + ε·Y/‖Y‖₁` along a traceless direction.
    pub fn point_towards(&self, y: &HermitianOperator) -> Result<DensityMatrix> {
        if y.dim() != self.center.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.center.dim(),
                found: y.dim(),
            });
        }
        if y.trace().abs() > TOL.trace * trace_norm(y).max(1.0) {
            return Err(Error::Constraint("surface direction must be traceless".into()));
        }
        let norm = trace_norm(y);
        if norm <= TOL.zero_operator {
            return Err(Error::ZeroOperator);
        }
        let op = self.center.operator().add(&y.scale(self.radius / norm))?;
        DensityMatrix::new(op)
    }

    /// `σ` is a state at trace distance `ε` from the center.
    pub fn contains(&self, sigma: &DensityMatrix) -> bool {
        sigma.dim() == self.center.dim()
            && sigma
                .operator()
                .sub(self.center.operator())
                .map(|d| (trace_norm(&d) - self.radius).abs() <= TOL.orthogonality)
                .unwrap_or(false)
    }
}

/// `Θ_ρ(X) = sgn(Tr X)[(Tr X)ρ − X]` with `sgn(0) = −1`; traceless, and the
/// identity on traceless operators. Traces within rounding of zero count as
/// zero.
pub fn theta(rho: &DensityMatrix, x: &HermitianOperator) -> Result<HermitianOperator> {
    let tr = x.trace();
    let sign = if tr > 1e-12 * crate::operator::max_abs(x.matrix()).max(f64::MIN_POSITIVE) { 1.0 } else { -1.0 };
    Ok(rho.operator().scale(tr).sub(x)?.scale(sign))
}

/// Result of [`enclosing_surface_point`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub lambda: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub rho2: DensityMatrix,
}

/// Writes an indefinite `X` as a multiple of a Helstrom matrix whose first
/// state is the surface center and whose second lies on the surface:
/// `p₊ρ − p₋ρ₂ = sgn(Tr X)·λ·X`.
pub fn enclosing_surface_point(surface: &EnclosingSurface, x: &HermitianOperator) -> Result<SurfacePoint> {
    let eig = x.eigenvalues();
    let scale = eig.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    if scale <= TOL.zero_operator {
        return Err(Error::ZeroOperator);
    }
    let slack = TOL.spectral_zero * scale;
    if eig[0] >= -slack || eig[eig.len() - 1] <= slack {
        return Err(Error::Semidefinite);
    }
    let y = theta(surface.center(), x)?;
    let mu = surface.radius() / (2.0 * trace_norm(&y));
    let tr = x.trace().abs();
    let lambda = mu / (1.0 + mu * tr);
    let rho2 = DensityMatrix::from_evolved(
        &(surface.center().matrix() + y.matrix().scale(2.0 * mu)),
        TOL.positivity,
    )?;
    Ok(SurfacePoint {
        lambda,
        p_plus: 0.5 * (1.0 + lambda * tr),
        p_minus: 0.5 * (1.0 - lambda * tr),
        rho2,
    })
}

/// `N(Φ)` from the local representation: ensembles `{p, ρ; 1 − p, σ}` with
/// `ρ` the surface center and `σ` on the surface, each scored by its growth
/// divided by the initial trace norm.
pub fn measure_local(
    table: &PropagatorTable,
    surface: &EnclosingSurface,
    options: &ScanOptions,
) -> Result<MeasureResult> {
    if surface.center().dim() != table.dim() {
        return Err(Error::DimensionMismatch {
            expected: table.dim(),
            found: surface.center().dim(),
        });
    }
    if table.dim() != 2 {
        return local_restarts(table, surface, options);
    }
    let flow = QubitFlow::new(table)?;
    let v0 = surface.center().bloch_vector()?;
    let eps = surface.radius();
    let ensemble_data = |x: &[f64; 3]| {
        let u = direction(x[0], x[1]);
        let p = x[2];
        let d = 2.0 * p - 1.0;
        let w = [0, 1, 2].map(|k| d * v0[k] - (1.0 - p) * eps * u[k]);
        (d, w)
    };
    let objective = |x: &[f64; 3]| {
        let (d, w) = ensemble_data(x);
        let norm0 = d.abs().max((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt());
        flow.increase(d, w) / norm0
    };
    let (nt, np) = (options.n_theta.max(2), options.n_phi.max(1));
    let nw = 2 * options.n_weights.max(1);
    let grid: Vec<[f64; 3]> = (0..nt)
        .flat_map(|i| {
            let theta = std::f64::consts::PI * i as f64 / (nt - 1) as f64;
            (0..np).flat_map(move |j| {
                let phi = std::f64::consts::TAU * j as f64 / np as f64;
                (0..nw).map(move |k| [theta, phi, (k as f64 + 0.5) / nw as f64])
            })
        })
        .collect();
    let (best, mut value) = argmax(&grid, objective);
    let mut x = grid[best];
    let mut evaluations = grid.len();
    if options.refine {
        let widths = [
            std::f64::consts::PI / (nt - 1) as f64,
            std::f64::consts::TAU / np as f64,
            1.0 / nw as f64,
        ];
        let bounds = [
            (0.0, std::f64::consts::PI),
            (f64::NEG_INFINITY, f64::INFINITY),
            (1e-9, 1.0 - 1e-9),
        ];
        (x, value) = refine(&objective, x, value, widths, bounds, &mut evaluations);
    }
    let u = direction(x[0], x[1]);
    let sigma = DensityMatrix::from_bloch([0, 1, 2].map(|k| v0[k] + eps * u[k]))?;
    let optimizer = HelstromEnsemble::with_weight(x[2], surface.center().clone(), sigma)?;
    let (d, w) = ensemble_data(&x);
    let norm0 = d.abs().max((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt());
    let trajectory = flow.trajectory(d, w).scaled(1.0 / norm0);
    Ok(finish(value, optimizer, trajectory, Method::LocalRepresentation, false, evaluations))
}

fn local_restarts(
    table: &PropagatorTable,
    surface: &EnclosingSurface,
    options: &ScanOptions,
) -> Result<MeasureResult> {
    let dim = table.dim();
    let center_images = evolve_all(table, surface.center().operator());
    let candidates: Vec<(f64, f64, usize, DensityMatrix)> = (0..options.restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = random::rng(options.seed, i as u64);
            let y = random::traceless_hermitian(dim, &mut rng);
            let sigma = surface.point_towards(&y).expect("sphere lies inside the state space");
            let images: Vec<_> = center_images
                .iter()
                .cloned()
                .zip(evolve_all(table, sigma.operator()))
                .collect();
            let delta0 = |p: f64| {
                trace_norm(
                    &surface
                        .center()
                        .operator()
                        .scale(p)
                        .sub(&sigma.operator().scale(1.0 - p))
                        .expect("same dimension"),
                )
            };
            let (p, v, evals) = weight_search(
                &images,
                table.times(),
                2 * options.n_weights.max(1),
                options.refine,
                (1e-9, 1.0 - 1e-9),
                |p| 1.0 / delta0(p),
            );
            (p, v, evals, sigma)
        })
        .collect();
    let evaluations = candidates.iter().map(|c| c.2).sum();
    let best = candidates
        .into_iter()
        .fold(None::<(f64, f64, usize, DensityMatrix)>, |acc, c| match acc {
            Some(a) if a.1 >= c.1 => Some(a),
            _ => Some(c),
        })
        .expect("at least one restart");
    let optimizer = HelstromEnsemble::with_weight(best.0, surface.center().clone(), best.3)?;
    let norm0 = trace_norm(&optimizer.delta());
    let trajectory = trace_norm_trajectory(table, &optimizer)?.scaled(1.0 / norm0);
    Ok(finish(best.1, optimizer, trajectory, Method::LocalRepresentation, true, evaluations))
}
