//! Superoperators, the propagator table `Φ_t` and intermediate maps.
//!
//! Operators are column-stacked, `vec(X)[i + j*d] = X[(i, j)]`, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. The Choi matrix is
//! `C = Σ_ij E_ij ⊗ Φ(E_ij)`, i.e. `C[(i*d + k, j*d + l)] = Φ(E_ij)[(k, l)]`.

use nalgebra::{DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::generator::GeneratorSpec;
use crate::operator::{check_qubit, max_abs, pauli, DensityMatrix, HermitianOperator};
use crate::tolerances::Tolerances;
use crate::{CMatrix, C64};

const TOL: Tolerances = Tolerances::DEFAULT;

pub fn vectorize(m: &CMatrix) -> DVector<C64> {
    // nalgebra storage is column-major
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

fn unit(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(dim, dim);
    e[(i, j)] = C64::new(1.0, 0.0);
    e
}

/// Linear map on `d×d` operators as a `d²×d²` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    /// Builds the matrix of `f` from its action on matrix units.
    pub fn from_fn(dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let n = dim * dim;
        let mut matrix = CMatrix::zeros(n, n);
        for col in 0..n {
            matrix.set_column(col, &vectorize(&f(&unit(dim, col % dim, col / dim))));
        }
        Self { dim, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    /// `X ↦ Xᵀ`, positive but not completely positive.
    pub fn transpose_map(dim: usize) -> Self {
        Self::from_fn(dim, |x| x.transpose())
    }

    /// `X ↦ Tr(X)·I/d`.
    pub fn completely_depolarizing(dim: usize) -> Self {
        Self::from_fn(dim, |x| CMatrix::identity(dim, dim) * (x.trace() / dim as f64))
    }

    /// `X ↦ U X U†`.
    pub fn unitary_conjugation(u: &CMatrix) -> Self {
        let ud = u.adjoint();
        Self::from_fn(u.nrows(), |x| u * x * &ud)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(x)), self.dim)
    }

    pub fn apply_hermitian(&self, x: &HermitianOperator) -> HermitianOperator {
        HermitianOperator::hermitize(&self.apply(x.matrix()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn inverse(&self) -> Option<Superoperator> {
        self.matrix.clone().try_inverse().map(|matrix| Superoperator {
            dim: self.dim,
            matrix,
        })
    }

    /// Smallest over largest singular value.
    pub fn singular_value_ratio(&self) -> f64 {
        let sv = self.matrix.singular_values();
        let max = sv.max();
        if max == 0.0 {
            0.0
        } else {
            sv.min() / max
        }
    }

    /// `max_ij |Tr Φ(E_ij) − δ_ij|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for col in 0..d * d {
            let (i, j) = (col % d, col / d);
            let tr: C64 = (0..d).map(|k| self.matrix[(k + k * d, col)]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((tr - C64::new(target, 0.0)).norm());
        }
        worst
    }

    /// Max-abs entry of the difference of two maps.
    pub fn distance(&self, other: &Superoperator) -> f64 {
        crate::operator::max_abs(&(&self.matrix - &other.matrix))
    }

    /// Affine Bloch form `v ↦ M v + c` of a trace-preserving qubit map.
    pub fn bloch_affine(&self) -> Result<(Matrix3<f64>, Vector3<f64>)> {
        check_qubit(self.dim)?;
        let sigmas = pauli::sigmas();
        let component = |m: &CMatrix, k: usize| 0.5 * (&sigmas[k] * m).trace().re;
        let mut lin = Matrix3::zeros();
        for l in 0..3 {
            let image = self.apply(&sigmas[l]);
            for k in 0..3 {
                lin[(k, l)] = component(&image, k);
            }
        }
        let shift = self.apply(&pauli::identity());
        let c = Vector3::new(component(&shift, 0), component(&shift, 1), component(&shift, 2));
        Ok((lin, c))
    }
}

/// Choi matrix of a superoperator.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: HermitianOperator,
}

impl ChoiMatrix {
    pub fn matrix(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.min_eigenvalue()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.eigenvalues()
    }

    pub fn is_completely_positive(&self) -> bool {
        self.min_eigenvalue() >= -TOL.choi
    }

    /// Inverse reshuffle back to the superoperator.
    pub fn to_superoperator(&self) -> Superoperator {
        let d = self.dim;
        let c = self.matrix.matrix();
        let mut matrix = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        matrix[(k + l * d, i + j * d)] = c[(i * d + k, j * d + l)];
                    }
                }
            }
        }
        Superoperator { dim: d, matrix }
    }
}

/// `C = Σ_ij E_ij ⊗ Φ(E_ij)`.
///
/// The result is Hermitian whenever the map preserves Hermiticity; residual
/// anti-Hermitian round-off is projected away.
pub fn choi(map: &Superoperator) -> ChoiMatrix {
    let d = map.dim;
    let mut c = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let col = map.matrix.column(i + j * d);
            for k in 0..d {
                for l in 0..d {
                    c[(i * d + k, j * d + l)] = col[k + l * d];
                }
            }
        }
    }
    ChoiMatrix {
        dim: d,
        matrix: HermitianOperator::hermitize(&c),
    }
}

/// Conditioning of one tabulated map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invertibility {
    pub singular_value_ratio: f64,
    pub invertible: bool,
}

/// `Φ_t` on a uniform grid `t_k = k·T/n`, with `Φ_0 = 1`.
#[derive(Clone, Debug)]
pub struct PropagatorTable {
    dim: usize,
    dt: f64,
    times: Vec<f64>,
    maps: Vec<Superoperator>,
    invertibility: Vec<Invertibility>,
}

impl PropagatorTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Step actually used, `T/n`.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().expect("grid is never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn maps(&self) -> &[Superoperator] {
        &self.maps
    }

    pub fn map(&self, k: usize) -> &Superoperator {
        &self.maps[k]
    }

    pub fn invertibility(&self) -> &[Invertibility] {
        &self.invertibility
    }

    /// Index of the grid point at `t`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt).round();
        if !(k >= 0.0) || k as usize >= self.times.len() {
            return Err(Error::OffGrid(t));
        }
        let k = k as usize;
        if (self.times[k] - t).abs() > TOL.grid_match * self.t_final().max(1.0) {
            return Err(Error::OffGrid(t));
        }
        Ok(k)
    }

    /// `Φ_{t_j, t_i} = Φ_{t_j} Φ_{t_i}⁻¹` for grid indices `i ≤ j`.
    pub fn intermediate_by_index(&self, i: usize, j: usize) -> Result<Superoperator> {
        if i > j || j >= self.len() {
            return Err(Error::InvalidInterval {
                s: self.times.get(i).copied().unwrap_or(f64::NAN),
                t: self.times.get(j).copied().unwrap_or(f64::NAN),
            });
        }
        if i == j {
            return Ok(Superoperator::identity(self.dim));
        }
        if i == 0 {
            return Ok(self.maps[j].clone());
        }
        let inv = self.invertibility[i];
        let undefined = Error::DivisibilityUndefined {
            t: self.times[i],
            ratio: inv.singular_value_ratio,
        };
        if !inv.invertible {
            return Err(undefined);
        }
        let inverse = self.maps[i].inverse().ok_or(undefined)?;
        Ok(self.maps[j].compose(&inverse))
    }

    /// `Φ_{t_{k+1}, t_k}`.
    pub fn step_map(&self, k: usize) -> Result<Superoperator> {
        self.intermediate_by_index(k, k + 1)
    }
}

/// Integrates `dΦ/dt = K_t Φ` from `Φ_0 = 1` with fixed-step RK4.
///
/// The step count is `round(T/dt)` and the step used is `T/n`. Stage
/// coefficients are evaluated from inside each step, so rate jumps placed on
/// grid points are resolved exactly.
pub fn integrate(spec: &GeneratorSpec, t_final: f64, dt: f64) -> Result<PropagatorTable> {
    if !(dt > 0.0 && t_final.is_finite() && t_final >= dt * (1.0 - 1e-9)) {
        return Err(Error::InvalidGrid { t_final, dt });
    }
    let n = ((t_final / dt).round() as usize).max(1);
    let h = t_final / n as f64;
    let dim = spec.dim();
    let parts = spec.superoperator_parts();
    let times: Vec<f64> = (0..=n).map(|k| t_final * k as f64 / n as f64).collect();

    let mut maps = Vec::with_capacity(n + 1);
    let mut phi = CMatrix::identity(dim * dim, dim * dim);
    maps.push(Superoperator {
        dim,
        matrix: phi.clone(),
    });
    for k in 0..n {
        let (a, b) = (times[k], times[k + 1]);
        let gen = |t: f64| parts.assemble(&spec.coefficients_within(t, a, b));
        let mid = 0.5 * (a + b);
        let l_start = gen(a);
        let l_mid = gen(mid);
        let l_end = gen(b);
        let k1 = &l_start * &phi;
        let k2 = &l_mid * (&phi + k1.scale(0.5 * h));
        let k3 = &l_mid * (&phi + k2.scale(0.5 * h));
        let k4 = &l_end * (&phi + k3.scale(h));
        phi += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
        if !phi.iter().all(|z| z.re.is_finite() && z.im.is_finite()) || max_abs(&phi) > TOL.divergence {
            return Err(Error::Numerical(format!(
                "integration diverged at t={b} (step {h}); reduce dt"
            )));
        }
        maps.push(Superoperator {
            dim,
            matrix: phi.clone(),
        });
    }

    let invertibility = maps
        .iter()
        .map(|m| {
            let ratio = m.singular_value_ratio();
            Invertibility {
                singular_value_ratio: ratio,
                invertible: ratio >= TOL.invertibility,
            }
        })
        .collect();

    Ok(PropagatorTable {
        dim,
        dt: h,
        times,
        maps,
        invertibility,
    })
}

/// `Φ_{t,s} = Φ_t Φ_s⁻¹` for grid times `s ≤ t`.
pub fn intermediate_map(table: &PropagatorTable, s: f64, t: f64) -> Result<Superoperator> {
    if s > t {
        return Err(Error::InvalidInterval { s, t });
    }
    let i = table.index_of(s)?;
    let j = table.index_of(t)?;
    table.intermediate_by_index(i, j)
}

/// `Φ_t(ρ0)` at a grid time.
pub fn evolve_state(table: &PropagatorTable, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if rho0.dim() != table.dim() {
        return Err(Error::DimensionMismatch {
            expected: table.dim(),
            found: rho0.dim(),
        });
    }
    let k = table.index_of(t)?;
    DensityMatrix::from_evolved(&table.map(k).apply(rho0.matrix()), TOL.trace_preservation)
}
