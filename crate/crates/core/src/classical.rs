//! The classical jump process carried by the instantaneous eigenvalues of
//! `ρ(t)`.
//!
//! Along a trajectory `ρ(t) = Σ_m p_m(t) |φ_m(t)⟩⟨φ_m(t)|` the eigenvalues
//! obey a Pauli master equation with rates
//! `W_mn(t) = Σ_j γ_j(t) |⟨φ_m(t)|A_j|φ_n(t)⟩|²`.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::generator::{Coefficients, GeneratorSpec};
use crate::operator::{check_qubit, DensityMatrix, HermitianOperator};
use crate::propagator::PropagatorTable;
use crate::tolerances::Tolerances;
use crate::{CMatrix, C64};

const TOL: Tolerances = Tolerances::DEFAULT;

/// Eigenvalues and continuity-matched eigenframes of `Φ_t(ρ0)` on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTrajectory {
    pub times: Vec<f64>,
    /// `eigenvalues[k][m] = ⟨φ_m(t_k)|ρ(t_k)|φ_m(t_k)⟩`.
    pub eigenvalues: Vec<Vec<f64>>,
    /// Frame vectors as columns.
    pub frames: Vec<CMatrix>,
    /// Grid points where two eigenvalues were within the degeneracy
    /// tolerance and the previous frame was kept.
    pub degenerate: Vec<bool>,
}

impl SpectralTrajectory {
    pub fn dim(&self) -> usize {
        self.frames.first().map_or(0, |f| f.nrows())
    }

    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }
}

/// Groups of indices of a sorted spectrum closer than `tol`.
fn clusters(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (v - values[*c.last().expect("nonempty")]).abs() < tol => c.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

fn normalize_phase(mut v: nalgebra::DVector<C64>, reference: &nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
    let overlap = reference.dotc(&v);
    if overlap.norm() > 0.0 {
        v *= overlap.conj() / overlap.norm();
    }
    v
}

/// Eigenframe of `rho` ordered and phased to follow `prev`.
///
/// Each eigenspace (a cluster of near-equal eigenvalues) is given slots for
/// the previous frame vectors with the largest weight in it, assigned
/// greedily, ties by index. Inside a degenerate eigenspace the projected
/// previous vectors are kept, so the frame does not jump.
fn matched_frame(rho: &HermitianOperator, prev: &CMatrix) -> (CMatrix, bool) {
    let d = rho.dim();
    let (values, vecs) = rho.eigen();
    let groups = clusters(&values, TOL.degeneracy);
    let degenerate = groups.iter().any(|g| g.len() > 1);
    let projectors: Vec<CMatrix> = groups
        .iter()
        .map(|g| {
            let mut p = CMatrix::zeros(d, d);
            for &i in g {
                let c = vecs.column(i);
                p += c * c.adjoint();
            }
            p
        })
        .collect();
    let mut weight = vec![vec![0.0; groups.len()]; d];
    for (m, row) in weight.iter_mut().enumerate() {
        let phi = prev.column(m);
        for (g, p) in projectors.iter().enumerate() {
            row[g] = (p * phi).norm();
        }
    }
    let mut slots: Vec<usize> = groups.iter().map(Vec::len).collect();
    let mut group_of = vec![usize::MAX; d];
    for _ in 0..d {
        let mut best: Option<(usize, usize, f64)> = None;
        for m in (0..d).filter(|&m| group_of[m] == usize::MAX) {
            for g in (0..groups.len()).filter(|&g| slots[g] > 0) {
                if best.is_none_or(|b| weight[m][g] > b.2) {
                    best = Some((m, g, weight[m][g]));
                }
            }
        }
        let (m, g, _) = best.expect("slots remain while vectors remain");
        group_of[m] = g;
        slots[g] -= 1;
    }

    let mut frame = CMatrix::zeros(d, d);
    for (g, members) in groups.iter().enumerate() {
        let assigned: Vec<usize> = (0..d).filter(|&m| group_of[m] == g).collect();
        if members.len() == 1 {
            let m = assigned[0];
            let v = normalize_phase(vecs.column(members[0]).into_owned(), &prev.column(m).into_owned());
            frame.set_column(m, &v);
            continue;
        }
        // Gram-Schmidt on the projected previous vectors, falling back to
        // the eigenvectors if a projection vanishes.
        let mut basis: Vec<nalgebra::DVector<C64>> = Vec::new();
        let candidates = assigned
            .iter()
            .map(|&m| &projectors[g] * prev.column(m))
            .chain(members.iter().map(|&i| vecs.column(i).into_owned()));
        for mut v in candidates {
            for b in &basis {
                let c = b.dotc(&v);
                v -= b * c;
            }
            let n = v.norm();
            if n > 1e-6 {
                basis.push(v.unscale(n));
            }
            if basis.len() == assigned.len() {
                break;
            }
        }
        for (&m, v) in assigned.iter().zip(basis) {
            let v = normalize_phase(v, &prev.column(m).into_owned());
            frame.set_column(m, &v);
        }
    }
    (frame, degenerate)
}

/// Tracks the spectral decomposition of `Φ_t(ρ0)` along the grid.
///
/// At `t = 0` eigenvalues are in decreasing order. Later frames are matched
/// to the previous step by largest overlap and phased so that
/// `⟨φ_m(t_k)|φ_m(t_{k+1})⟩ ≥ 0`.
pub fn spectral_track(table: &PropagatorTable, rho0: &DensityMatrix) -> Result<SpectralTrajectory> {
    let d = table.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho0.dim(),
        });
    }
    let n = table.len();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut frames: Vec<CMatrix> = Vec::with_capacity(n);
    let mut degenerate = Vec::with_capacity(n);
    for (k, map) in table.maps().iter().enumerate() {
        let rho = HermitianOperator::hermitize(&map.apply(rho0.matrix()));
        let (frame, flag) = match frames.last() {
            Some(prev) => matched_frame(&rho, prev),
            None => {
                let (values, vecs) = rho.eigen();
                let mut frame = CMatrix::zeros(d, d);
                for m in 0..d {
                    frame.set_column(m, &vecs.column(d - 1 - m));
                }
                let flag = clusters(&values, TOL.degeneracy).iter().any(|g| g.len() > 1);
                (frame, flag)
            }
        };
        let p: Vec<f64> = (0..d)
            .map(|m| {
                let c = frame.column(m);
                (c.adjoint() * rho.matrix() * c)[(0, 0)].re
            })
            .collect();
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > TOL.trace_preservation {
            return Err(Error::Numerical(format!(
                "eigenvalues at t = {} sum to {total}",
                table.times()[k]
            )));
        }
        eigenvalues.push(p);
        frames.push(frame);
        degenerate.push(flag);
    }
    Ok(SpectralTrajectory {
        times: table.times().to_vec(),
        eigenvalues,
        frames,
        degenerate,
    })
}

/// Rates, eigenvalue trajectory and the derived Pauli equation.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalProcess {
    pub times: Vec<f64>,
    /// `W(t_k)` as seen from the step that starts at `t_k`.
    pub rates: Vec<DMatrix<f64>>,
    /// `W(t_k)` as seen from the step that ends at `t_k`.
    pub rates_left: Vec<DMatrix<f64>>,
    /// Eigenvalues from the spectral trajectory.
    pub probabilities: Vec<Vec<f64>>,
    /// Smallest off-diagonal rate per grid point (over both limits).
    pub margins: Vec<f64>,
    pub min_offdiag: f64,
}

fn rate_matrix(spec: &GeneratorSpec, coeffs: &Coefficients, frame: &CMatrix) -> DMatrix<f64> {
    let d = frame.nrows();
    let fd = frame.adjoint();
    let mut w = DMatrix::zeros(d, d);
    for (ch, &g) in spec.channels().iter().zip(&coeffs.rates) {
        if g == 0.0 {
            continue;
        }
        let a = &fd * &ch.operator * frame;
        for m in 0..d {
            for n in 0..d {
                if m != n {
                    w[(m, n)] += g * a[(m, n)].norm_sqr();
                }
            }
        }
    }
    w
}

fn min_offdiag(w: &DMatrix<f64>) -> f64 {
    let d = w.nrows();
    let mut out = f64::INFINITY;
    for m in 0..d {
        for n in 0..d {
            if m != n {
                out = out.min(w[(m, n)]);
            }
        }
    }
    if out.is_finite() {
        out
    } else {
        0.0
    }
}

/// `W_mn(t_k)` along the tracked eigenframes.
pub fn classical_rates(spec: &GeneratorSpec, traj: &SpectralTrajectory) -> Result<ClassicalProcess> {
    if traj.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: traj.dim(),
        });
    }
    let t = &traj.times;
    let n = t.len();
    let within = |k: usize, right: bool| {
        if n < 2 {
            spec.coefficients(t[k])
        } else if (right && k + 1 < n) || k == 0 {
            spec.coefficients_within(t[k], t[k], t[k + 1])
        } else {
            spec.coefficients_within(t[k], t[k - 1], t[k])
        }
    };
    let rates: Vec<DMatrix<f64>> = (0..n)
        .map(|k| rate_matrix(spec, &within(k, true), &traj.frames[k]))
        .collect();
    let rates_left: Vec<DMatrix<f64>> = (0..n)
        .map(|k| rate_matrix(spec, &within(k, false), &traj.frames[k]))
        .collect();
    let margins: Vec<f64> = rates
        .iter()
        .zip(&rates_left)
        .map(|(r, l)| min_offdiag(r).min(min_offdiag(l)))
        .collect();
    Ok(ClassicalProcess {
        times: t.clone(),
        min_offdiag: margins.iter().copied().fold(f64::INFINITY, f64::min),
        margins,
        rates,
        rates_left,
        probabilities: traj.eigenvalues.clone(),
    })
}

/// Generator `G = W − diag(Σ_m W_mn)` of the Pauli equation `dp/dt = G p`.
fn pauli_generator(w: &DMatrix<f64>) -> DMatrix<f64> {
    let mut g = w.clone();
    let out_rates = w.row_sum();
    for n in 0..w.nrows() {
        g[(n, n)] -= out_rates[n];
    }
    g
}

impl ClassicalProcess {
    pub fn dim(&self) -> usize {
        self.rates.first().map_or(0, |w| w.nrows())
    }

    /// Propagator of one RK4 step `t_k → t_{k+1}`, with rates interpolated
    /// linearly between the limits at the two ends.
    pub fn step_matrix(&self, k: usize) -> DMatrix<f64> {
        let h = self.times[k + 1] - self.times[k];
        let ga = pauli_generator(&self.rates[k]);
        let gb = pauli_generator(&self.rates_left[k + 1]);
        let gm = (&ga + &gb).scale(0.5);
        let id = DMatrix::identity(self.dim(), self.dim());
        let k1 = &ga;
        let k2 = &gm * (&id + k1.scale(0.5 * h));
        let k3 = &gm * (&id + k2.scale(0.5 * h));
        let k4 = &gb * (&id + k3.scale(h));
        id + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0)
    }

    /// `T(t_j, t_i)` for grid indices `i ≤ j`.
    pub fn transition_matrix(&self, i: usize, j: usize) -> Result<DMatrix<f64>> {
        if i > j || j >= self.times.len() {
            return Err(Error::InvalidInterval {
                s: self.times.get(i).copied().unwrap_or(f64::NAN),
                t: self.times.get(j).copied().unwrap_or(f64::NAN),
            });
        }
        let mut t = DMatrix::identity(self.dim(), self.dim());
        for k in i..j {
            t = self.step_matrix(k) * t;
        }
        Ok(t)
    }
}

/// Integrates the Pauli master equation from `p0` at `t_0`.
pub fn pauli_evolve(process: &ClassicalProcess, p0: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = process.dim();
    if p0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p0.len(),
        });
    }
    let mut p = nalgebra::DVector::from_column_slice(p0);
    let mut out = vec![p0.to_vec()];
    for k in 0..process.times.len().saturating_sub(1) {
        p = process.step_matrix(k) * p;
        out.push(p.iter().copied().collect());
    }
    Ok(out)
}

/// `max |T(t3,t1) − T(t3,t2)·T(t2,t1)|` for grid indices `i1 ≤ i2 ≤ i3`.
pub fn chapman_kolmogorov_check(process: &ClassicalProcess, i1: usize, i2: usize, i3: usize) -> Result<f64> {
    let direct = process.transition_matrix(i1, i3)?;
    let split = process.transition_matrix(i2, i3)? * process.transition_matrix(i1, i2)?;
    Ok((direct - split).amax())
}

/// `min_{|v| ≤ 1} |M v + c|`: distance from the origin to the image
/// ellipsoid of the Bloch ball.
pub fn image_origin_distance(m: &Matrix3<f64>, c: &Vector3<f64>) -> f64 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested");
    let s = svd.singular_values;
    let cc = u.transpose() * c;
    let smax = s.max();
    let positive = |i: usize| s[i] > 1e-14 * smax.max(1e-300);
    let residual = |y: &Vector3<f64>| (0..3).map(|i| (s[i] * y[i] + cc[i]).powi(2)).sum::<f64>().sqrt();
    let solve = |mu: f64| {
        Vector3::from_fn(|i, _| {
            if positive(i) {
                -s[i] * cc[i] / (s[i] * s[i] + mu)
            } else {
                0.0
            }
        })
    };
    let free = solve(0.0);
    if free.norm() <= 1.0 {
        return residual(&free);
    }
    let (mut lo, mut hi) = (0.0, smax * smax + 1.0);
    while solve(hi).norm() > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if solve(mid).norm() > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    residual(&solve(hi))
}

/// Whether `I/2` lies in the image of `Φ_t` (qubits only).
pub fn max_mixed_in_image(table: &PropagatorTable, t: f64) -> Result<bool> {
    check_qubit(table.dim())?;
    let (m, c) = table.map(table.index_of(t)?).bloch_affine()?;
    Ok(image_origin_distance(&m, &c) <= TOL.image_origin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{BuiltinGenerator, Channel, RateFunction, TranslationDemoParams};
    use crate::operator::pauli;
    use crate::propagator::integrate;
    use approx::assert_abs_diff_eq;

    fn track(b: BuiltinGenerator, rho0: &DensityMatrix, t: f64, dt: f64) -> (GeneratorSpec, PropagatorTable, SpectralTrajectory) {
        let spec = b.build().unwrap();
        let table = integrate(&spec, t, dt).unwrap();
        let traj = spectral_track(&table, rho0).unwrap();
        (spec, table, traj)
    }

    #[test]
    fn diagonal_state_keeps_z_frame() {
        let rho0 = DensityMatrix::from_bloch([0.0, 0.0, 0.6]).unwrap();
        let (_, _, traj) = track(BuiltinGenerator::eternal(), &rho0, 2.0, 0.01);
        for f in &traj.frames {
            assert!((f - CMatrix::identity(2, 2)).norm() < 1e-12);
        }
        assert!(!traj.any_degenerate());
    }

    #[test]
    fn maximally_mixed_is_flagged() {
        let (_, _, traj) = track(BuiltinGenerator::eternal(), &DensityMatrix::maximally_mixed(2), 1.0, 0.1);
        assert!(traj.degenerate.iter().all(|&d| d));
        assert_eq!(traj.eigenvalues[5], vec![0.5, 0.5]);
    }

    #[test]
    fn isotropic_pure_state_eigenvalues() {
        let g = 0.7;
        let rho0 = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        let (_, _, traj) = track(BuiltinGenerator::Isotropic { gamma0: g }, &rho0, 2.0, 0.01);
        for (t, p) in traj.times.iter().zip(&traj.eigenvalues) {
            assert_abs_diff_eq!(p[0], 0.5 * (1.0 + (-g * t).exp()), epsilon = 1e-9);
            assert_abs_diff_eq!(p[1], 0.5 * (1.0 - (-g * t).exp()), epsilon = 1e-9);
        }
    }

    #[test]
    fn frames_stay_continuous_through_rotation() {
        let mut rng = crate::random::rng(11, 0);
        let h = crate::random::hermitian(3, &mut rng);
        let channels = vec![Channel::new(RateFunction::Constant(0.2), crate::random::ginibre(3, &mut rng))];
        let spec = GeneratorSpec::new(h, None, channels).unwrap();
        let table = integrate(&spec, 2.0, 0.01).unwrap();
        let rho0 = crate::random::density_matrix(3, &mut rng);
        let traj = spectral_track(&table, &rho0).unwrap();
        for w in traj.frames.windows(2) {
            let overlap = w[0].adjoint() * &w[1];
            for m in 0..3 {
                assert!(overlap[(m, m)].re > 0.9 && overlap[(m, m)].im.abs() < 1e-12);
            }
            assert!((w[1].adjoint() * &w[1] - CMatrix::identity(3, 3)).norm() < 1e-9);
        }
        let process = classical_rates(&spec, &traj).unwrap();
        let p = pauli_evolve(&process, &traj.eigenvalues[0]).unwrap();
        let dev = p
            .iter()
            .zip(&traj.eigenvalues)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        assert!(dev < 1e-4, "{dev}");
    }

    #[test]
    fn eternal_telegraph_process() {
        let rho0 = DensityMatrix::basis_state(2, 0);
        let (spec, _, traj) = track(BuiltinGenerator::eternal(), &rho0, 2.0, 0.01);
        let process = classical_rates(&spec, &traj).unwrap();
        for w in process.rates.iter().chain(&process.rates_left) {
            assert_abs_diff_eq!(w[(0, 1)], 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(w[(1, 0)], 0.5, epsilon = 1e-14);
            assert_eq!(w[(0, 0)], 0.0);
        }
        let p = pauli_evolve(&process, &[1.0, 0.0]).unwrap();
        for (t, pk) in process.times.iter().zip(&p) {
            assert_abs_diff_eq!(pk[0], 0.5 * (1.0 + (-t).exp()), epsilon = 1e-9);
            assert_abs_diff_eq!(pk[0] + pk[1], 1.0, epsilon = 1e-14);
        }
        assert!(chapman_kolmogorov_check(&process, 10, 80, 200).unwrap() <= 1e-8);
        assert_eq!(chapman_kolmogorov_check(&process, 30, 30, 150).unwrap(), 0.0);
    }

    #[test]
    fn translation_rates_go_negative() {
        let rho0 = DensityMatrix::from_bloch([0.0, 0.0, 0.5]).unwrap();
        let b = BuiltinGenerator::TranslationDemo(TranslationDemoParams::from_geometry(0.5, 0.3));
        let (spec, _, traj) = track(b, &rho0, 2.0, 0.01);
        let process = classical_rates(&spec, &traj).unwrap();
        let w = &process.rates[150];
        // Frame index 0 is |0⟩; σ− with rate −b/2 moves |0⟩ → |1⟩.
        assert_abs_diff_eq!(w[(1, 0)], -0.15, epsilon = 1e-12);
        assert_abs_diff_eq!(w[(0, 1)], 0.15, epsilon = 1e-12);
        assert!(process.min_offdiag < 0.0);
    }

    #[test]
    fn hamiltonian_only_has_zero_rates() {
        let spec = GeneratorSpec::unitary(HermitianOperator::new(pauli::sigma_x()).unwrap());
        let table = integrate(&spec, 1.0, 0.01).unwrap();
        let traj = spectral_track(&table, &DensityMatrix::from_bloch([0.1, 0.2, 0.3]).unwrap()).unwrap();
        let process = classical_rates(&spec, &traj).unwrap();
        assert!(process.rates.iter().all(|w| w.amax() == 0.0));
        let p = pauli_evolve(&process, &traj.eigenvalues[0]).unwrap();
        assert!(p.iter().all(|pk| pk == &traj.eigenvalues[0]));
    }

    #[test]
    fn image_geometry() {
        let at_end = |r: f64, a: f64| {
            let spec = BuiltinGenerator::TranslationDemo(TranslationDemoParams::from_geometry(r, a))
                .build()
                .unwrap();
            let table = integrate(&spec, 2.0, 1e-2).unwrap();
            (max_mixed_in_image(&table, 2.0).unwrap(), max_mixed_in_image(&table, 0.0).unwrap())
        };
        assert_eq!(at_end(0.5, 0.3), (true, true));
        assert_eq!(at_end(0.3, 0.45), (false, true));
        let m = Matrix3::from_diagonal(&Vector3::new(0.3, 0.3, 0.3));
        assert_abs_diff_eq!(image_origin_distance(&m, &Vector3::new(0.0, 0.0, 0.45)), 0.15, epsilon = 1e-12);
        let flat = Matrix3::from_diagonal(&Vector3::new(0.5, 0.2, 0.0));
        assert_abs_diff_eq!(image_origin_distance(&flat, &Vector3::new(0.0, 0.1, 0.3)), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(image_origin_distance(&flat, &Vector3::new(0.0, 0.5, 0.0)), 0.3, epsilon = 1e-9);
    }
}
