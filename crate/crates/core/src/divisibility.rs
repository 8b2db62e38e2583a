//! CP- and P-divisibility from generator rates and from intermediate maps.
//!
//! Rate conditions look at the instantaneous generator: all rates
//! nonnegative (CP), or `a_mn = Σ_j γ_j |⟨m|A_j|n⟩|² ≥ 0` for every
//! orthonormal basis and `m ≠ n` (P). Witnesses look at the one-step maps
//! `Φ_{t+dt,t}`: the smallest Choi eigenvalue (CP) and the largest growth of
//! the trace norm of Helstrom matrices (P).

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{Coefficients, GeneratorSpec};
use crate::operator::{self, hermitian_to_helstrom, pauli, trace_norm, HermitianOperator};
use crate::propagator::{choi, PropagatorTable, Superoperator};
use crate::random;
use crate::tolerances::Tolerances;
use crate::CMatrix;

const TOL: Tolerances = Tolerances::DEFAULT;

/// Default number of sampled bases for the P rate condition.
pub const DEFAULT_BASES: usize = 200;
/// Default number of sampled Helstrom matrices per interval.
pub const DEFAULT_SAMPLES: usize = 200;

/// A rate condition evaluated on grid times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCondition {
    pub times: Vec<f64>,
    pub margins: Vec<f64>,
    pub satisfied: Vec<bool>,
    pub worst_margin: f64,
    pub holds: bool,
    /// `true` when the margin is the exact minimum, not a sampled one.
    pub exact: bool,
}

impl RateCondition {
    fn from_margins(times: &[f64], margins: Vec<f64>, exact: bool) -> Self {
        let satisfied: Vec<bool> = margins.iter().map(|&m| m >= -TOL.rate).collect();
        Self {
            times: times.to_vec(),
            worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
            holds: satisfied.iter().all(|&s| s),
            margins,
            satisfied,
            exact,
        }
    }
}

/// A map-level witness evaluated per grid interval.
///
/// `values[k]` is `None` when `Φ_{t_{k+1},t_k}` is undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalWitness {
    pub intervals: Vec<(f64, f64)>,
    pub values: Vec<Option<f64>>,
    pub holds: bool,
}

impl IntervalWitness {
    /// Smallest defined value.
    pub fn min(&self) -> Option<f64> {
        self.values.iter().flatten().copied().reduce(f64::min)
    }

    /// Largest defined value.
    pub fn max(&self) -> Option<f64> {
        self.values.iter().flatten().copied().reduce(f64::max)
    }

    fn undefined(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.intervals
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| *i)
    }
}

/// Rate conditions, map witnesses and verdicts for one process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityReport {
    pub cp_rate_condition: RateCondition,
    pub p_rate_condition: RateCondition,
    pub cp_choi_witness: IntervalWitness,
    pub p_contraction_witness: IntervalWitness,
    /// Verdicts from the rate conditions.
    pub verdict_cp: bool,
    pub verdict_p: bool,
    /// Verdicts from the map witnesses.
    pub witness_verdict_cp: bool,
    pub witness_verdict_p: bool,
    /// Rate and witness verdicts agree.
    pub concordant: bool,
    pub undefined_intervals: Vec<(f64, f64)>,
}

/// Settings for [`divisibility_report`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityOptions {
    pub n_bases: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for DivisibilityOptions {
    fn default() -> Self {
        Self {
            n_bases: DEFAULT_BASES,
            n_samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

/// Coefficients at grid time `times[k]`, seen from the interval that starts
/// there (from the last interval at the final time).
fn grid_coefficients(spec: &GeneratorSpec, times: &[f64], k: usize) -> Coefficients {
    let n = times.len();
    if n < 2 {
        return spec.coefficients(times[k]);
    }
    if k + 1 < n {
        spec.coefficients_within(times[k], times[k], times[k + 1])
    } else {
        spec.coefficients_within(times[k], times[k - 1], times[k])
    }
}

/// `min_j γ_j(t)` on the grid; CP-divisibility holds iff it is nonnegative.
pub fn check_cp_rates(spec: &GeneratorSpec, times: &[f64]) -> RateCondition {
    let margins = (0..times.len())
        .map(|k| {
            grid_coefficients(spec, times, k)
                .rates
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
        .map(|m| if m.is_finite() { m } else { 0.0 })
        .collect();
    RateCondition::from_margins(times, margins, true)
}

/// Channel weights on `σ_x, σ_y, σ_z` when every channel is a multiple of a
/// single Pauli matrix: `Σ_j γ_j |α_j|²` per axis, as linear forms in the rates.
fn pauli_axes(spec: &GeneratorSpec) -> Option<Vec<(usize, f64)>> {
    if spec.dim() != 2 {
        return None;
    }
    let sigmas = pauli::sigmas();
    spec.channels()
        .iter()
        .map(|ch| {
            let a = &ch.operator;
            sigmas.iter().enumerate().find_map(|(axis, s)| {
                let alpha = (s * a).trace() * 0.5;
                let residual = operator::max_abs(&(a - s * alpha));
                (residual <= 1e-12 * (1.0 + alpha.norm())).then(|| (axis, alpha.norm_sqr()))
            })
        })
        .collect()
}

/// Orthonormal bases used to sample the P rate condition: the computational
/// basis followed by `n_bases − 1` Haar-random ones.
pub fn sample_bases(dim: usize, n_bases: usize, seed: u64) -> Vec<CMatrix> {
    let mut rng = random::rng(seed, 0xB45E);
    let mut out = vec![CMatrix::identity(dim, dim)];
    out.extend((1..n_bases).map(|_| random::haar_unitary(dim, &mut rng)));
    out
}

/// Margin of Eq. `a_mn ≥ 0` on the grid.
///
/// For a qubit whose channels are all multiples of Pauli matrices the
/// minimum over all bases is exact: with per-axis weights `c_j` it is the
/// smallest pairwise sum `c_i + c_j`. Otherwise it is the minimum over the
/// sampled bases and can only certify a violation.
pub fn check_p_rates(
    spec: &GeneratorSpec,
    times: &[f64],
    n_bases: usize,
    seed: u64,
) -> RateCondition {
    if let Some(axes) = pauli_axes(spec) {
        let margins = (0..times.len())
            .map(|k| {
                let rates = grid_coefficients(spec, times, k).rates;
                let mut c = [0.0; 3];
                for (&(axis, w), g) in axes.iter().zip(rates) {
                    c[axis] += w * g;
                }
                (c[0] + c[1]).min(c[0] + c[2]).min(c[1] + c[2])
            })
            .collect();
        return RateCondition::from_margins(times, margins, true);
    }

    let d = spec.dim();
    let bases = sample_bases(d, n_bases.max(1), seed);
    // |⟨m|A_j|n⟩|² for every basis, channel and off-diagonal pair.
    let elements: Vec<Vec<Vec<f64>>> = bases
        .iter()
        .map(|u| {
            let ud = u.adjoint();
            spec.channels()
                .iter()
                .map(|ch| {
                    let a = &ud * &ch.operator * u;
                    let mut v = Vec::with_capacity(d * (d - 1));
                    for m in 0..d {
                        for n in 0..d {
                            if m != n {
                                v.push(a[(m, n)].norm_sqr());
                            }
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    let pairs = d * (d - 1);
    let margins = (0..times.len())
        .map(|k| {
            let rates = grid_coefficients(spec, times, k).rates;
            let mut worst = if pairs == 0 { 0.0 } else { f64::INFINITY };
            for per_channel in &elements {
                for p in 0..pairs {
                    let s: f64 = per_channel.iter().zip(&rates).map(|(e, g)| g * e[p]).sum();
                    worst = worst.min(s);
                }
            }
            worst
        })
        .collect();
    RateCondition::from_margins(times, margins, false)
}

/// Checks that the columns of `basis` are orthonormal.
pub fn check_orthonormal(basis: &CMatrix) -> Result<()> {
    if basis.nrows() != basis.ncols() {
        return Err(Error::NotSquare {
            rows: basis.nrows(),
            cols: basis.ncols(),
        });
    }
    let d = basis.nrows();
    let dev = operator::max_abs(&(basis.adjoint() * basis - CMatrix::identity(d, d)));
    if dev > TOL.basis {
        return Err(Error::NotOrthonormal(dev));
    }
    Ok(())
}

/// `a_mn = ⟨m| K_t(|n⟩⟨n|) |m⟩` for the basis given by the columns of `basis`.
///
/// Column sums vanish by trace preservation; the diagonal is nonpositive
/// whenever the off-diagonal entries are nonnegative.
pub fn kossakowski_amn(spec: &GeneratorSpec, t: f64, basis: &CMatrix) -> Result<DMatrix<f64>> {
    check_orthonormal(basis)?;
    let d = spec.dim();
    if basis.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: basis.nrows(),
        });
    }
    let coeffs = spec.coefficients(t);
    let mut a = DMatrix::zeros(d, d);
    for n in 0..d {
        let col = basis.column(n);
        let proj: CMatrix = col * col.adjoint();
        let image = spec.apply_with(&coeffs, &proj);
        for m in 0..d {
            let bra = basis.column(m);
            a[(m, n)] = (bra.adjoint() * &image * bra)[(0, 0)].re;
        }
    }
    let scale = 1.0 + a.amax();
    let residual = a.row_sum().amax();
    if residual > TOL.invertibility * scale {
        return Err(Error::Numerical(format!(
            "a_mn column sums do not vanish (residual {residual:e})"
        )));
    }
    Ok(a)
}

fn interval_maps(table: &PropagatorTable) -> Vec<((f64, f64), Option<Superoperator>)> {
    let t = table.times();
    (0..table.len().saturating_sub(1))
        .into_par_iter()
        .map(|k| ((t[k], t[k + 1]), table.step_map(k).ok()))
        .collect()
}

fn choi_values(maps: &[((f64, f64), Option<Superoperator>)]) -> IntervalWitness {
    let values: Vec<Option<f64>> = maps
        .par_iter()
        .map(|(_, m)| m.as_ref().map(|m| choi(m).min_eigenvalue()))
        .collect();
    IntervalWitness {
        intervals: maps.iter().map(|(i, _)| *i).collect(),
        holds: values.iter().flatten().all(|&v| v >= -TOL.choi),
        values,
    }
}

/// Smallest Choi eigenvalue of every one-step map `Φ_{t_{k+1},t_k}`.
pub fn check_cp_choi(table: &PropagatorTable) -> IntervalWitness {
    choi_values(&interval_maps(table))
}

/// Helstrom matrices probed by the contraction witness, each of unit trace
/// norm. Random Hermitian operators are brought to Helstrom form; qubits
/// also get pure states and unbiased antipodal pairs on a Fibonacci sphere.
pub fn contraction_samples(dim: usize, n_samples: usize, seed: u64) -> Vec<HermitianOperator> {
    let mut rng = random::rng(seed, 0xC047);
    let mut out = Vec::with_capacity(n_samples);
    if dim == 2 {
        let dirs = operator::fibonacci_sphere((n_samples / 4).max(1));
        for w in &dirs {
            out.push(HermitianOperator::from_bloch_components(1.0, *w));
            out.push(HermitianOperator::from_bloch_components(0.0, *w));
        }
    }
    while out.len() < n_samples.max(1) {
        let x = random::hermitian(dim, &mut rng);
        if let Ok((_, ensemble)) = hermitian_to_helstrom(&x) {
            let delta = ensemble.delta();
            let norm = trace_norm(&delta);
            out.push(delta.scale(1.0 / norm));
        }
    }
    out
}

fn growth_values(
    maps: &[((f64, f64), Option<Superoperator>)],
    samples: &[HermitianOperator],
) -> IntervalWitness {
    let values: Vec<Option<f64>> = maps
        .par_iter()
        .map(|(_, m)| {
            m.as_ref().map(|m| {
                samples
                    .iter()
                    .map(|x| trace_norm(&m.apply_hermitian(x)) - trace_norm(x))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
        })
        .collect();
    IntervalWitness {
        intervals: maps.iter().map(|(i, _)| *i).collect(),
        holds: values.iter().flatten().all(|&v| v <= TOL.contraction),
        values,
    }
}

/// Largest trace-norm growth `‖Φ_{t_{k+1},t_k}(Δ)‖₁ − ‖Δ‖₁` over sampled
/// normalized Helstrom matrices.
pub fn check_p_contraction(table: &PropagatorTable, n_samples: usize, seed: u64) -> IntervalWitness {
    let samples = contraction_samples(table.dim(), n_samples, seed);
    growth_values(&interval_maps(table), &samples)
}

/// Runs all four checks on a generator and its propagator table.
pub fn divisibility_report(
    spec: &GeneratorSpec,
    table: &PropagatorTable,
    options: &DivisibilityOptions,
) -> DivisibilityReport {
    let times = table.times();
    let cp_rate_condition = check_cp_rates(spec, times);
    let p_rate_condition = check_p_rates(spec, times, options.n_bases, options.seed);
    let maps = interval_maps(table);
    let cp_choi_witness = choi_values(&maps);
    let samples = contraction_samples(table.dim(), options.n_samples, options.seed);
    let p_contraction_witness = growth_values(&maps, &samples);
    let undefined_intervals: Vec<(f64, f64)> = cp_choi_witness.undefined().collect();

    let verdict_cp = cp_rate_condition.holds;
    let verdict_p = p_rate_condition.holds;
    let witness_verdict_cp = cp_choi_witness.holds;
    let witness_verdict_p = p_contraction_witness.holds;
    DivisibilityReport {
        concordant: verdict_cp == witness_verdict_cp && verdict_p == witness_verdict_p,
        cp_rate_condition,
        p_rate_condition,
        cp_choi_witness,
        p_contraction_witness,
        verdict_cp,
        verdict_p,
        witness_verdict_cp,
        witness_verdict_p,
        undefined_intervals,
    }
}
