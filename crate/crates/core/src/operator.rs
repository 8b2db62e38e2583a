//! Dense operator algebra for small Hilbert spaces.
//!
//! Hermitian operators, density matrices and Helstrom ensembles, together
//! with the trace norm, the Jordan-Hahn split and the one-shot two-state
//! discrimination quantities built on them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;
use crate::{CMatrix, C64};

const TOL: Tolerances = Tolerances::DEFAULT;

/// Largest entrywise deviation of `m` from its conjugate transpose.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Row-major matrix literal with entries written as `[re, im]`.
pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_literal(m: &CMatrix) -> MatrixLiteral {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Parses a row-major literal, rejecting ragged or non-finite input.
pub fn matrix_from_literal(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
        return Err(Error::NotSquare {
            rows: n,
            cols: bad.len(),
        });
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Constraint("matrix literal has non-finite entries".into()));
    }
    Ok(CMatrix::from_fn(n, cols, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixLiteral", into = "MatrixLiteral")]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates squareness and Hermiticity within `Tolerances::hermiticity`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let dev = hermiticity_deviation(&matrix);
        if !(dev <= TOL.hermiticity) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { matrix })
    }

    /// Projects an almost-Hermitian matrix onto `(M + M†)/2`.
    ///
    /// Used for outputs of maps that preserve Hermiticity only up to
    /// round-off.
    pub fn hermitize(matrix: &CMatrix) -> Self {
        let matrix = (matrix + matrix.adjoint()).scale(0.5);
        Self { matrix }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self {
            matrix: CMatrix::from_diagonal(&d),
        }
    }

    /// `|ψ⟩⟨ψ|` for an arbitrary (not necessarily normalized) vector.
    pub fn outer(psi: &DVector<C64>) -> Self {
        Self {
            matrix: psi * psi.adjoint(),
        }
    }

    /// `½(c·I + w·σ)` for a qubit.
    pub fn from_bloch_components(c: f64, w: [f64; 3]) -> Self {
        let mut m = pauli::identity().scale(c);
        for (k, s) in pauli::sigmas().iter().enumerate() {
            m += s.scale(w[k]);
        }
        Self {
            matrix: m.scale(0.5),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 2 {
            let (lo, hi) = eigenvalues_2x2(&self.matrix);
            return vec![lo, hi];
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Eigenpairs sorted by ascending eigenvalue; eigenvectors are columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        let se = SymmetricEigen::new(self.matrix.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            se.eigenvectors[(r, order[c])]
        });
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Bloch components `Tr(σ_k X)` of a qubit operator.
    pub fn bloch_components(&self) -> Result<[f64; 3]> {
        check_qubit(self.dim())?;
        let s = pauli::sigmas();
        Ok([0, 1, 2].map(|k| (&s[k] * &self.matrix).trace().re))
    }
}

fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn check_qubit(dim: usize) -> Result<()> {
    if dim != 2 {
        return Err(Error::UnsupportedDimension {
            found: dim,
            supported: 2,
        });
    }
    Ok(())
}

/// Closed-form eigenvalues `(low, high)` of a 2x2 Hermitian matrix.
fn eigenvalues_2x2(m: &CMatrix) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half_gap = (0.5 * (a - d)).hypot(b.norm());
    (mean - half_gap, mean + half_gap)
}

impl TryFrom<MatrixLiteral> for HermitianOperator {
    type Error = Error;

    fn try_from(rows: MatrixLiteral) -> Result<Self> {
        Self::new(matrix_from_literal(&rows)?)
    }
}

impl From<HermitianOperator> for MatrixLiteral {
    fn from(op: HermitianOperator) -> Self {
        matrix_to_literal(&op.matrix)
    }
}

/// A positive semidefinite Hermitian operator of unit trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOperator", into = "HermitianOperator")]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if !((tr - 1.0).abs() <= TOL.trace) {
            return Err(Error::NotDensityMatrix(format!("trace {tr}")));
        }
        let min = op.min_eigenvalue();
        if !(min >= -TOL.positivity) {
            return Err(Error::NotDensityMatrix(format!("min eigenvalue {min:e}")));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(matrix)?)
    }

    /// Accepts a map output that is a state up to `tol` in trace and positivity.
    pub(crate) fn from_evolved(matrix: &CMatrix, tol: f64) -> Result<Self> {
        let op = HermitianOperator::hermitize(matrix);
        let tr = op.trace();
        let min = op.min_eigenvalue();
        if (tr - 1.0).abs() > tol || min < -tol {
            return Err(Error::NotDensityMatrix(format!(
                "evolved operator has trace {tr} and min eigenvalue {min:e}"
            )));
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Pure state `|ψ⟩⟨ψ|`; the vector is normalized first.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::ZeroOperator);
        }
        Ok(Self {
            op: HermitianOperator::outer(&psi.unscale(n)),
        })
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut diag = vec![0.0; dim];
        diag[k] = 1.0;
        Self {
            op: HermitianOperator::from_real_diagonal(&diag),
        }
    }

    /// Qubit state `½(I + v·σ)`, requiring `|v| ≤ 1`.
    pub fn from_bloch(v: [f64; 3]) -> Result<Self> {
        let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if len > 1.0 + TOL.positivity {
            return Err(Error::NotDensityMatrix(format!("Bloch vector length {len}")));
        }
        Ok(Self {
            op: HermitianOperator::from_bloch_components(1.0, v),
        })
    }

    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        self.op.bloch_components()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }
}

impl TryFrom<HermitianOperator> for DensityMatrix {
    type Error = Error;

    fn try_from(op: HermitianOperator) -> Result<Self> {
        Self::new(op)
    }
}

impl From<DensityMatrix> for HermitianOperator {
    fn from(rho: DensityMatrix) -> Self {
        rho.op
    }
}

#[derive(Deserialize)]
struct RawEnsemble {
    p1: f64,
    p2: f64,
    rho1: DensityMatrix,
    rho2: DensityMatrix,
}

impl TryFrom<RawEnsemble> for HelstromEnsemble {
    type Error = Error;

    fn try_from(raw: RawEnsemble) -> Result<Self> {
        Self::new(raw.p1, raw.p2, raw.rho1, raw.rho2)
    }
}

/// Weights and states `{p_i, ρ_i}` of a binary preparation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnsemble")]
pub struct HelstromEnsemble {
    pub p1: f64,
    pub p2: f64,
    pub rho1: DensityMatrix,
    pub rho2: DensityMatrix,
}

impl HelstromEnsemble {
    pub fn new(p1: f64, p2: f64, rho1: DensityMatrix, rho2: DensityMatrix) -> Result<Self> {
        if !(p1 >= 0.0 && p2 >= 0.0 && (p1 + p2 - 1.0).abs() <= TOL.probability) {
            return Err(Error::InvalidProbabilities { p1, p2 });
        }
        check_same_dim(rho1.dim(), rho2.dim())?;
        Ok(Self {
            p1,
            p2,
            rho1,
            rho2,
        })
    }

    /// Ensemble with `p2 = 1 - p1`.
    pub fn with_weight(p1: f64, rho1: DensityMatrix, rho2: DensityMatrix) -> Result<Self> {
        Self::new(p1, 1.0 - p1, rho1, rho2)
    }

    pub fn unbiased(rho1: DensityMatrix, rho2: DensityMatrix) -> Result<Self> {
        Self::new(0.5, 0.5, rho1, rho2)
    }

    pub fn dim(&self) -> usize {
        self.rho1.dim()
    }

    /// The Helstrom matrix `Δ = p1·ρ1 − p2·ρ2`.
    pub fn delta(&self) -> HermitianOperator {
        HermitianOperator {
            matrix: self.rho1.matrix().scale(self.p1) - self.rho2.matrix().scale(self.p2),
        }
    }

    pub fn weight_gap(&self) -> f64 {
        self.p1 - self.p2
    }
}

/// `Δ = S − Q` with `S, Q ≥ 0` supported on orthogonal subspaces.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanHahnPair {
    pub positive: HermitianOperator,
    pub negative: HermitianOperator,
}

/// `‖X‖₁`, the sum of absolute eigenvalues.
///
/// Hermiticity is enforced by the argument type; build the operator with
/// [`HermitianOperator::new`] to get the domain check on raw matrices.
pub fn trace_norm(x: &HermitianOperator) -> f64 {
    x.eigenvalues().iter().map(|l| l.abs()).sum()
}

/// Trace norm of a raw matrix after a Hermiticity check.
pub fn trace_norm_of(matrix: &CMatrix) -> Result<f64> {
    Ok(trace_norm(&HermitianOperator::new(matrix.clone())?))
}

/// Spectral split into positive and negative parts.
///
/// Eigenvalues within `Tolerances::spectral_zero` of zero are assigned to the
/// positive part.
pub fn jordan_hahn(x: &HermitianOperator) -> JordanHahnPair {
    let (values, vectors) = x.eigen();
    let dim = x.dim();
    let mut s = CMatrix::zeros(dim, dim);
    let mut q = CMatrix::zeros(dim, dim);
    for (k, &lambda) in values.iter().enumerate() {
        let v = vectors.column(k);
        let proj = v * v.adjoint();
        if lambda > -TOL.spectral_zero {
            s += proj.scale(lambda);
        } else {
            q += proj.scale(-lambda);
        }
    }
    JordanHahnPair {
        positive: HermitianOperator::hermitize(&s),
        negative: HermitianOperator::hermitize(&q),
    }
}

/// Projection onto the span of eigenvectors with eigenvalue above the
/// spectral-zero threshold (`Π_{X≥0}` with zero modes dropped).
pub fn positive_projection(x: &HermitianOperator) -> HermitianOperator {
    let (values, vectors) = x.eigen();
    let dim = x.dim();
    let mut p = CMatrix::zeros(dim, dim);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda > TOL.spectral_zero {
            let v = vectors.column(k);
            p += v * v.adjoint();
        }
    }
    HermitianOperator::hermitize(&p)
}

/// Writes a nonzero Hermitian `X` as `λ·Δ` for a Helstrom matrix `Δ`.
///
/// Indefinite `X` yields orthogonal states from the Jordan-Hahn split with
/// `λ = ‖X‖₁`. Semidefinite `X` puts all weight on one state and fixes the
/// partner to the maximally mixed state.
pub fn hermitian_to_helstrom(x: &HermitianOperator) -> Result<(f64, HelstromEnsemble)> {
    let dim = x.dim();
    let lambda = trace_norm(x);
    if !(lambda > TOL.zero_operator) {
        return Err(Error::ZeroOperator);
    }
    let pair = jordan_hahn(x);
    let tr_s = pair.positive.trace();
    let tr_q = pair.negative.trace();
    let mixed = DensityMatrix::maximally_mixed(dim);
    let slack = TOL.zero_operator * lambda.max(1.0);
    if tr_q <= slack || tr_s <= slack {
        let tr = x.trace();
        let state = DensityMatrix {
            op: x.scale(1.0 / tr),
        };
        let ensemble = if tr > 0.0 {
            HelstromEnsemble {
                p1: 1.0,
                p2: 0.0,
                rho1: state,
                rho2: mixed,
            }
        } else {
            HelstromEnsemble {
                p1: 0.0,
                p2: 1.0,
                rho1: mixed,
                rho2: state,
            }
        };
        return Ok((tr.abs(), ensemble));
    }
    let lambda = tr_s + tr_q;
    let ensemble = HelstromEnsemble {
        p1: tr_s / lambda,
        p2: tr_q / lambda,
        rho1: DensityMatrix {
            op: pair.positive.scale(1.0 / tr_s),
        },
        rho2: DensityMatrix {
            op: pair.negative.scale(1.0 / tr_q),
        },
    };
    Ok((lambda, ensemble))
}

/// Optimal one-shot success probability `½(1 + ‖Δ‖₁)`.
pub fn discrimination_success(ensemble: &HelstromEnsemble) -> f64 {
    0.5 * (1.0 + trace_norm(&ensemble.delta()))
}

/// `P = p2 + Tr{Δ T}` for a two-outcome test with effect `T`.
pub fn success_for_effect(ensemble: &HelstromEnsemble, effect: &CMatrix) -> f64 {
    ensemble.p2 + (ensemble.delta().matrix() * effect).trace().re
}

/// Maximizes `p2 + Tr{Δ Π}` over projections of a qubit.
///
/// Candidates are the trivial projections `0` and `I`, `n_candidates` rank-1
/// projections spread over the Bloch sphere, and `Π_{Δ≥0}`.
pub fn discrimination_success_bruteforce(
    ensemble: &HelstromEnsemble,
    n_candidates: usize,
) -> Result<f64> {
    check_qubit(ensemble.dim())?;
    let mut best = success_for_effect(ensemble, &CMatrix::zeros(2, 2))
        .max(success_for_effect(ensemble, &CMatrix::identity(2, 2)));
    for v in fibonacci_sphere(n_candidates) {
        let proj = HermitianOperator::from_bloch_components(1.0, v);
        best = best.max(success_for_effect(ensemble, proj.matrix()));
    }
    let exact = positive_projection(&ensemble.delta());
    Ok(best.max(success_for_effect(ensemble, exact.matrix())))
}

/// Evenly spread unit vectors (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// `‖Δ‖₁ = 2·Tr{Π_{Δ≥0} Δ} + p2 − p1`.
pub fn trace_norm_by_projection(ensemble: &HelstromEnsemble) -> f64 {
    let delta = ensemble.delta();
    let proj = positive_projection(&delta);
    2.0 * (proj.matrix() * delta.matrix()).trace().re + ensemble.p2 - ensemble.p1
}

/// `|p1 − p2| ≤ ‖Δ‖₁ ≤ 1`, with slack `1e-10` on both sides.
pub fn helstrom_bounds_check(ensemble: &HelstromEnsemble) -> bool {
    let norm = trace_norm(&ensemble.delta());
    let lower = (ensemble.p1 - ensemble.p2).abs();
    lower - 1e-10 <= norm && norm <= 1.0 + 1e-10
}

/// Pauli matrices in the basis where `σ_z = diag(1, −1)`.
pub mod pauli {
    use super::*;

    fn m(entries: [[C64; 2]; 2]) -> CMatrix {
        DMatrix::from_fn(2, 2, |r, c| entries[r][c])
    }

    const O: C64 = C64::new(0.0, 0.0);
    const I1: C64 = C64::new(1.0, 0.0);
    const J: C64 = C64::new(0.0, 1.0);

    pub fn identity() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn sigma_x() -> CMatrix {
        m([[O, I1], [I1, O]])
    }

    pub fn sigma_y() -> CMatrix {
        m([[O, -J], [J, O]])
    }

    pub fn sigma_z() -> CMatrix {
        m([[I1, O], [O, -I1]])
    }

    /// Raising operator `|+⟩⟨−|` with respect to the eigenstates of `σ_z`.
    pub fn sigma_plus() -> CMatrix {
        m([[O, I1], [O, O]])
    }

    /// Lowering operator `|−⟩⟨+|`.
    pub fn sigma_minus() -> CMatrix {
        m([[O, O], [I1, O]])
    }

    pub fn sigmas() -> [CMatrix; 3] {
        [sigma_x(), sigma_y(), sigma_z()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(d: &[f64]) -> HermitianOperator {
        HermitianOperator::from_real_diagonal(d)
    }

    fn ket(k: usize) -> DensityMatrix {
        DensityMatrix::basis_state(2, k)
    }

    #[test]
    fn trace_norm_identical_states_vanishes() {
        let rho = DensityMatrix::from_bloch([0.3, -0.2, 0.5]).unwrap();
        let e = HelstromEnsemble::unbiased(rho.clone(), rho).unwrap();
        assert_abs_diff_eq!(trace_norm(&e.delta()), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn trace_norm_orthogonal_states_is_one() {
        let e = HelstromEnsemble::unbiased(ket(0), ket(1)).unwrap();
        assert_abs_diff_eq!(trace_norm(&e.delta()), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_norm_x_against_z() {
        // Δ = ¼(σ_x − σ_z); eigenvalues ±√2/4 by hand.
        let e = HelstromEnsemble::unbiased(
            DensityMatrix::from_bloch([1.0, 0.0, 0.0]).unwrap(),
            DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(trace_norm(&e.delta()), 0.5_f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            discrimination_success(&e),
            0.5 * (1.0 + 0.5_f64.sqrt()),
            epsilon = 1e-14
        );
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = pauli::sigma_x();
        m[(0, 1)] = C64::new(1.0, 0.5);
        assert!(matches!(trace_norm_of(&m), Err(Error::NotHermitian(_))));
        assert!(matches!(
            HermitianOperator::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn jordan_hahn_diagonal() {
        let pair = jordan_hahn(&diag(&[0.3, -0.7]));
        assert!((pair.positive.matrix() - diag(&[0.3, 0.0]).matrix()).camax() < 1e-15);
        assert!((pair.negative.matrix() - diag(&[0.0, 0.7]).matrix()).camax() < 1e-15);
    }

    #[test]
    fn jordan_hahn_semidefinite_has_no_negative_part() {
        let pair = jordan_hahn(&diag(&[0.2, 0.0]));
        assert_eq!(max_abs(pair.negative.matrix()), 0.0);
    }

    #[test]
    fn jordan_hahn_sigma_x() {
        let x = HermitianOperator::new(pauli::sigma_x()).unwrap();
        let pair = jordan_hahn(&x);
        let plus = (pauli::identity() + pauli::sigma_x()).scale(0.5);
        let minus = (pauli::identity() - pauli::sigma_x()).scale(0.5);
        assert!((pair.positive.matrix() - plus).camax() < 1e-14);
        assert!((pair.negative.matrix() - minus).camax() < 1e-14);
        assert!((pair.positive.matrix() * pair.negative.matrix()).camax() < 1e-14);
    }

    #[test]
    fn helstrom_form_of_indefinite_diagonal() {
        let (lambda, e) = hermitian_to_helstrom(&diag(&[0.3, -0.7])).unwrap();
        assert_abs_diff_eq!(lambda, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.p1, 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(e.p2, 0.7, epsilon = 1e-14);
        assert!((e.rho1.matrix() - ket(0).matrix()).camax() < 1e-14);
        assert!((e.rho2.matrix() - ket(1).matrix()).camax() < 1e-14);
    }

    #[test]
    fn helstrom_form_of_positive_operator() {
        let (lambda, e) = hermitian_to_helstrom(&diag(&[2.0, 1.0])).unwrap();
        assert_abs_diff_eq!(lambda, 3.0, epsilon = 1e-14);
        assert_eq!((e.p1, e.p2), (1.0, 0.0));
        assert!((e.rho1.matrix() - diag(&[2.0 / 3.0, 1.0 / 3.0]).matrix()).camax() < 1e-14);
        assert_eq!(e.rho2, DensityMatrix::maximally_mixed(2));
    }

    #[test]
    fn helstrom_form_of_negative_operator() {
        let (lambda, e) = hermitian_to_helstrom(&diag(&[-0.5, -1.5])).unwrap();
        assert_abs_diff_eq!(lambda, 2.0, epsilon = 1e-14);
        assert_eq!((e.p1, e.p2), (0.0, 1.0));
        let back = e.delta().scale(lambda);
        assert!((back.matrix() - diag(&[-0.5, -1.5]).matrix()).camax() < 1e-14);
    }

    #[test]
    fn helstrom_form_of_minus_sigma_z() {
        let x = HermitianOperator::new(-pauli::sigma_z()).unwrap();
        let (lambda, e) = hermitian_to_helstrom(&x).unwrap();
        assert_abs_diff_eq!(lambda, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.p1, 0.5, epsilon = 1e-14);
        assert!((e.rho1.matrix() - ket(1).matrix()).camax() < 1e-14);
        assert!((e.rho2.matrix() - ket(0).matrix()).camax() < 1e-14);
    }

    #[test]
    fn helstrom_form_of_zero_fails() {
        assert!(matches!(
            hermitian_to_helstrom(&HermitianOperator::zero(3)),
            Err(Error::ZeroOperator)
        ));
    }

    #[test]
    fn success_probabilities() {
        let e = HelstromEnsemble::unbiased(ket(0), ket(1)).unwrap();
        assert_abs_diff_eq!(discrimination_success(&e), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            discrimination_success_bruteforce(&e, 50).unwrap(),
            1.0,
            epsilon = 1e-14
        );

        let rho = DensityMatrix::from_bloch([0.1, 0.4, -0.3]).unwrap();
        let e = HelstromEnsemble::with_weight(0.7, rho.clone(), rho).unwrap();
        assert_abs_diff_eq!(discrimination_success(&e), 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(
            discrimination_success_bruteforce(&e, 50).unwrap(),
            0.7,
            epsilon = 1e-14
        );
    }

    #[test]
    fn bruteforce_rejects_qutrits() {
        let e = HelstromEnsemble::unbiased(
            DensityMatrix::basis_state(3, 0),
            DensityMatrix::basis_state(3, 1),
        )
        .unwrap();
        assert!(matches!(
            discrimination_success_bruteforce(&e, 10),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn bounds_saturate() {
        let rho = DensityMatrix::from_bloch([0.0, 0.6, 0.0]).unwrap();
        let e = HelstromEnsemble::with_weight(0.8, rho.clone(), rho).unwrap();
        assert!(helstrom_bounds_check(&e));
        assert_abs_diff_eq!(trace_norm(&e.delta()), 0.6, epsilon = 1e-14);

        let e = HelstromEnsemble::with_weight(0.8, ket(0), ket(1)).unwrap();
        assert!(helstrom_bounds_check(&e));
        assert_abs_diff_eq!(trace_norm(&e.delta()), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(diag(&[0.6, 0.6])).is_err());
        assert!(DensityMatrix::new(diag(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::from_bloch([1.0, 1.0, 0.0]).is_err());
        assert!(HelstromEnsemble::new(0.6, 0.6, ket(0), ket(1)).is_err());
        assert!(HelstromEnsemble::new(-0.1, 1.1, ket(0), ket(1)).is_err());
    }

    #[test]
    fn bloch_round_trip() {
        let v = [0.2, -0.5, 0.7];
        let rho = DensityMatrix::from_bloch(v).unwrap();
        let back = rho.bloch_vector().unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(back[k], v[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn qutrit_trace_norm_uses_general_eigensolver() {
        let x = diag(&[0.5, -0.25, 0.125]);
        assert_abs_diff_eq!(trace_norm(&x), 0.875, epsilon = 1e-14);
    }

    #[test]
    fn serde_round_trip_validates() {
        let e = HelstromEnsemble::with_weight(
            0.7,
            DensityMatrix::from_bloch([0.1, -0.2, 0.3]).unwrap(),
            DensityMatrix::maximally_mixed(2),
        )
        .unwrap();
        let json = serde_json::to_string(&e).unwrap();
        let back: HelstromEnsemble = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<DensityMatrix>("[[[1,0],[0,0]],[[0,0],[1,0]]]").is_err());
        assert!(serde_json::from_str::<HermitianOperator>("[[[0,0],[1,0]],[[0,0],[0,0]]]").is_err());
        assert!(serde_json::from_str::<HermitianOperator>("[[[0,0],[1,0]],[[1,0]]]").is_err());
    }
}
