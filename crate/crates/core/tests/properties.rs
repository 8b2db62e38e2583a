use std::sync::OnceLock;

use helstrom_flow::classical::{classical_rates, max_mixed_in_image, spectral_track};
use helstrom_flow::generator::{apply_generator, bloch_rhs, TranslationDemoParams};
use helstrom_flow::measure::{measure_orthogonal_scan, theta, trace_norm_trajectory, ScanOptions};
use helstrom_flow::operator::{
    hermitian_to_helstrom, jordan_hahn, max_abs, pauli, trace_norm, trace_norm_by_projection,
};
use helstrom_flow::propagator::{choi, integrate, PropagatorTable};
use helstrom_flow::random;
use helstrom_flow::scenarios::{helstrom_norm_qubit_closed_form, run_dilation_demo, DilationDemoParams};
use helstrom_flow::{
    BuiltinGenerator, CMatrix, Channel, DensityMatrix, GeneratorSpec, HelstromEnsemble, HermitianOperator,
    RateFunction, C64,
};
use proptest::prelude::*;
use rand::Rng;

fn translation() -> &'static PropagatorTable {
    static T: OnceLock<PropagatorTable> = OnceLock::new();
    T.get_or_init(|| {
        let p = TranslationDemoParams::from_geometry(0.5, 0.3);
        integrate(&BuiltinGenerator::TranslationDemo(p).build().unwrap(), 2.0, 1e-3).unwrap()
    })
}

fn p_divisible_tables() -> &'static [(GeneratorSpec, PropagatorTable)] {
    static T: OnceLock<Vec<(GeneratorSpec, PropagatorTable)>> = OnceLock::new();
    T.get_or_init(|| {
        [BuiltinGenerator::eternal(), BuiltinGenerator::Isotropic { gamma0: 0.8 }]
            .iter()
            .map(|b| {
                let spec = b.build().unwrap();
                let table = integrate(&spec, 3.0, 1e-2).unwrap();
                (spec, table)
            })
            .collect()
    })
}

fn random_spec<R: Rng>(dim: usize, rng: &mut R) -> GeneratorSpec {
    let channels = (0..3)
        .map(|_| {
            let rate = RateFunction::NegTanh {
                scale: rng.random_range(-1.0..1.0),
            };
            Channel::new(rate, random::ginibre(dim, rng))
        })
        .collect();
    GeneratorSpec::new(random::hermitian(dim, rng), None, channels).unwrap()
}

fn bloch(m: &CMatrix) -> [f64; 3] {
    [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_norm_matches_projection_form(seed in any::<u64>(), dim in 2usize..5, p1 in 0.0f64..1.0) {
        let mut rng = random::rng(seed, 0);
        let e = HelstromEnsemble::with_weight(p1, random::density_matrix(dim, &mut rng), random::density_matrix(dim, &mut rng)).unwrap();
        prop_assert!((trace_norm(&e.delta()) - trace_norm_by_projection(&e)).abs() <= 1e-10);
    }

    #[test]
    fn jordan_hahn_reconstructs(seed in any::<u64>(), dim in 2usize..5) {
        let x = random::hermitian(dim, &mut random::rng(seed, 1));
        let jh = jordan_hahn(&x);
        prop_assert!(max_abs(&(jh.positive.matrix() - jh.negative.matrix() - x.matrix())) <= 1e-12);
        prop_assert!((trace_norm(&x) - jh.positive.trace() - jh.negative.trace()).abs() <= 1e-10);
    }

    #[test]
    fn helstrom_form_round_trip(seed in any::<u64>(), dim in 2usize..5) {
        let x = random::hermitian(dim, &mut random::rng(seed, 2));
        let eig = x.eigenvalues();
        prop_assume!(eig.iter().any(|&v| v > 1e-3) && eig.iter().any(|&v| v < -1e-3));
        let (lambda, e) = hermitian_to_helstrom(&x).unwrap();
        prop_assert!(max_abs(&(e.delta().matrix() * C64::from(lambda) - x.matrix())) <= 1e-10);
        prop_assert!(max_abs(&(e.rho1.matrix() * e.rho2.matrix())) < 1e-9);
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(seed in any::<u64>(), dim in 2usize..4, t in 0.0f64..3.0) {
        let mut rng = random::rng(seed, 3);
        let spec = random_spec(dim, &mut rng);
        let rho = random::density_matrix(dim, &mut rng);
        let out = spec.apply_matrix(t, rho.matrix()).unwrap();
        prop_assert!(out.trace().norm() < 1e-12);
        prop_assert!(max_abs(&(&out - out.adjoint())) < 1e-12);
    }

    #[test]
    fn bloch_rhs_matches_generator(seed in any::<u64>(), t in 0.0f64..3.0) {
        let mut rng = random::rng(seed, 4);
        let spec = random_spec(2, &mut rng);
        let v = random::unit_ball_vector(&mut rng);
        let rho = DensityMatrix::from_bloch(v).unwrap();
        let direct = bloch(apply_generator(&spec, t, rho.operator()).unwrap().matrix());
        let rhs = bloch_rhs(&spec, t, v).unwrap();
        for k in 0..3 {
            prop_assert!((direct[k] - rhs[k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn qubit_closed_form_matches_eigensolver(seed in any::<u64>(), p1 in 0.0f64..1.0) {
        let mut rng = random::rng(seed, 5);
        let (v1, v2) = (random::unit_ball_vector(&mut rng), random::unit_ball_vector(&mut rng));
        let e = HelstromEnsemble::with_weight(p1, DensityMatrix::from_bloch(v1).unwrap(), DensityMatrix::from_bloch(v2).unwrap()).unwrap();
        let w = [0, 1, 2].map(|k| e.p1 * v1[k] - e.p2 * v2[k]);
        prop_assert!((helstrom_norm_qubit_closed_form(w, e.p1, e.p2) - trace_norm(&e.delta())).abs() <= 1e-12);
    }

    #[test]
    fn theta_fixes_traceless_operators(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = random::rng(seed, 6);
        let rho = random::density_matrix(dim, &mut rng);
        let y = random::traceless_hermitian(dim, &mut rng);
        prop_assert!(max_abs(&(theta(&rho, &y).unwrap().matrix() - y.matrix())) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rescaling_identity(seed in any::<u64>(), p1 in 0.05f64..0.95) {
        let mut rng = random::rng(seed, 7);
        let e = HelstromEnsemble::with_weight(p1, random::bloch_ball_state(&mut rng), random::bloch_ball_state(&mut rng)).unwrap();
        let (lambda, normal) = hermitian_to_helstrom(&e.delta()).unwrap();
        let a = trace_norm_trajectory(translation(), &e).unwrap();
        let b = trace_norm_trajectory(translation(), &normal).unwrap();
        for (x, y) in a.sigma.iter().zip(&b.sigma) {
            prop_assert!((x - lambda * y).abs() <= 2e-6);
        }
    }

    #[test]
    fn trajectories_stay_above_weight_gap(seed in any::<u64>(), p1 in 0.0f64..1.0) {
        let mut rng = random::rng(seed, 8);
        let e = HelstromEnsemble::with_weight(p1, random::bloch_ball_state(&mut rng), random::bloch_ball_state(&mut rng)).unwrap();
        for (_, table) in p_divisible_tables() {
            let traj = trace_norm_trajectory(table, &e).unwrap();
            let floor = (e.p1 - e.p2).abs() - 1e-8;
            prop_assert!(traj.values.iter().all(|&v| v >= floor));
        }
    }

    #[test]
    fn transition_matrices_are_stochastic(seed in any::<u64>()) {
        let mut rng = random::rng(seed, 9);
        for (spec, table) in p_divisible_tables() {
            let rho0 = random::bloch_ball_state(&mut rng);
            let process = classical_rates(spec, &spectral_track(table, &rho0).unwrap()).unwrap();
            let n = process.times.len() - 1;
            for (i, j) in [(0, n), (n / 3, 2 * n / 3), (n / 2, n)] {
                let t = process.transition_matrix(i, j).unwrap();
                for col in t.column_iter() {
                    prop_assert!((col.sum() - 1.0).abs() <= 1e-7);
                    prop_assert!(col.iter().all(|&x| (-1e-7..=1.0 + 1e-7).contains(&x)));
                }
            }
        }
    }
}

#[test]
fn maps_compose() {
    let t = translation();
    let n = t.len() - 1;
    for (r, s, u) in [(0, n / 2, n), (n / 4, n / 2, 3 * n / 4), (400, 1000, 1500)] {
        let direct = t.intermediate_by_index(r, u).unwrap();
        let split = t.intermediate_by_index(s, u).unwrap().compose(&t.intermediate_by_index(r, s).unwrap());
        assert!(direct.distance(&split) <= 1e-6);
    }
}

#[test]
fn builtin_maps_are_trace_preserving_and_positive() {
    for b in [
        BuiltinGenerator::Eternal { weight: 0.5 },
        BuiltinGenerator::Isotropic { gamma0: 1.0 },
        BuiltinGenerator::TranslationDemo(TranslationDemoParams::from_geometry(0.5, 0.3)),
    ] {
        let table = integrate(&b.build().unwrap(), 2.0, 1e-2).unwrap();
        for m in table.maps() {
            assert!(m.trace_preservation_error() <= 1e-8);
            assert!(choi(m).min_eigenvalue() >= -1e-7);
        }
    }
}

#[test]
fn translation_measure_is_linear_in_a() {
    let points: Vec<(f64, f64)> = [0.1, 0.2, 0.3]
        .iter()
        .map(|&a| {
            let b = BuiltinGenerator::TranslationDemo(TranslationDemoParams::from_geometry(0.5, a));
            let table = integrate(&b.build().unwrap(), 2.0, 1e-2).unwrap();
            (a, measure_orthogonal_scan(&table, &ScanOptions::with_grid(12)).unwrap().value)
        })
        .collect();
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(x, y), p| (x + p.0, y + p.1));
    let (mx, my) = (sx / n, sy / n);
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    for &(a, v) in &points {
        let fit = my + slope * (a - mx);
        assert!((v - fit).abs() <= 0.01 * v, "a={a}: {v} vs fit {fit}");
    }
    assert!((slope - 0.5).abs() < 0.01);
}

#[test]
fn dilation_information_is_nonnegative() {
    let r = run_dilation_demo(&DilationDemoParams::default()).unwrap();
    assert!(r.min_quantity >= -1e-12);
}

/// Distance between eigenframes up to column phases.
fn frame_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|k| 1.0 - a.column(k).dotc(&b.column(k)).norm())
        .fold(0.0, f64::max)
}

/// When `I/2` lies in the image of `Φ_T`, every target eigenbasis at `T` is
/// reached: a state `I/2 + ε U Z U†` has a preimage, and the tracked frame
/// of that preimage ends on `U`.
#[test]
fn eigenframes_cover_bases_when_max_mixed_is_reachable() {
    let table = translation();
    assert!(max_mixed_in_image(table, 2.0).unwrap());
    let spec = BuiltinGenerator::TranslationDemo(TranslationDemoParams::from_geometry(0.5, 0.3))
        .build()
        .unwrap();
    let last = table.len() - 1;
    let inverse = table.map(last).inverse().unwrap();
    let mut rng = random::rng(11, 0);

    let mut frames = Vec::new();
    for _ in 0..50 {
        let rho0 = random::bloch_ball_state(&mut rng);
        let process = classical_rates(&spec, &spectral_track(table, &rho0).unwrap()).unwrap();
        assert_eq!(process.times.len(), table.len());
        frames.push(spectral_track(table, &rho0).unwrap().frames[last].clone());
    }
    let eps = 0.05;
    for _ in 0..20 {
        let u = random::haar_unitary(2, &mut rng);
        let target = CMatrix::identity(2, 2) * C64::from(0.5) + &u * pauli::sigma_z() * u.adjoint() * C64::from(eps);
        let pre = HermitianOperator::hermitize(&inverse.apply(&target));
        let rho0 = DensityMatrix::new(pre).expect("preimage is a state");
        let frame = spectral_track(table, &rho0).unwrap().frames[last].clone();
        assert!(frame_distance(&frame, &u) <= 1e-3, "frame off by {}", frame_distance(&frame, &u));
        frames.push(frame);
    }
    assert_eq!(frames.len(), 70);
}
