//! Worked scenarios with closed-form answers.
//!
//! - Translation demo: isotropic contraction to radius `r`, then a uniform
//!   shift by `a` along `ẑ`. Unbiased pairs see nothing; the best biased
//!   pair gains exactly `r·a`.
//! - Eternal model: one rate is negative for all `t > 0`, yet the process is
//!   P-divisible and the measure vanishes.
//! - Dilation demo: a qubit exchanging excitations with a qubit environment,
//!   where internal and external distinguishability add up to a constant.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::divisibility::{divisibility_report, DivisibilityOptions, DivisibilityReport};
use crate::error::{Error, Result};
use crate::generator::{BuiltinGenerator, TranslationDemoParams};
use crate::measure::{
    accumulate_increase, measure_local, measure_orthogonal_scan, EnclosingSurface, QubitFlow,
    ScanOptions, TraceNormTrajectory,
};
use crate::operator::{pauli, trace_norm, DensityMatrix, HelstromEnsemble, HermitianOperator};
use crate::propagator::integrate;
use crate::{CMatrix, C64};

/// `½{|d + |w|| + |d − |w||}` with `d = p1 − p2`: the trace norm of
/// `½(d·I + w·σ)`.
pub fn helstrom_norm_qubit_closed_form(w: [f64; 3], p1: f64, p2: f64) -> f64 {
    let d = p1 - p2;
    let len = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    0.5 * ((d + len).abs() + (d - len).abs())
}

/// Growth of `‖Δ(t)‖₁` over the translation phase for an antipodal pair
/// with `v1 ∥ +ẑ` and weight gap `d`: `max(d, r + d·a) − max(d, r)`.
///
/// This is `d·a` for `d ≤ r`, peaking at `r·a` when `d = r`.
pub fn translation_increase_analytic(r: f64, a: f64, d: f64) -> f64 {
    d.max(r + d * a) - d.max(r)
}

/// Bloch factors `(v_x(t)/v_x(0), v_z(t)/v_z(0))` of the eternal model with
/// Pauli weight `w`: `exp(−2w(t − ln cosh t))` and `exp(−4wt)`.
pub fn eternal_closed_form(weight: f64, t: f64) -> (f64, f64) {
    (
        (-2.0 * weight * (t - t.cosh().ln())).exp(),
        (-4.0 * weight * t).exp(),
    )
}

/// Shared numerical settings for the demos.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoOptions {
    pub dt: f64,
    pub scan: ScanOptions,
    pub divisibility: DivisibilityOptions,
}

impl Default for DemoOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scan: ScanOptions::default(),
            divisibility: DivisibilityOptions::default(),
        }
    }
}

/// A biased pair below the optimal weight gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuboptimalCheck {
    pub weight_gap: f64,
    pub numeric: f64,
    pub analytic: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TranslationReport {
    pub params: TranslationDemoParams,
    pub r: f64,
    pub a: f64,
    pub measure_numeric: f64,
    pub measure_analytic: f64,
    pub measure_local: f64,
    pub optimizer: HelstromEnsemble,
    pub optimizer_weight_gap: f64,
    pub optimizer_direction: [f64; 3],
    /// Angle between the optimal `v1` and `ẑ`, in degrees.
    pub direction_error_deg: f64,
    pub unbiased_measure: f64,
    pub suboptimal: SuboptimalCheck,
    pub image_contains_max_mixed: bool,
    pub verdict_cp: bool,
    pub verdict_p: bool,
    #[serde(skip)]
    pub optimal_trajectory: TraceNormTrajectory,
}

/// Contraction followed by translation, with the analytic optimum `r·a`.
///
/// `suboptimal_gap` is the weight gap of the extra biased check (0.3 in the
/// worked example).
pub fn run_translation_demo(
    params: &TranslationDemoParams,
    suboptimal_gap: f64,
    options: &DemoOptions,
) -> Result<TranslationReport> {
    params.validate()?;
    let builtin = BuiltinGenerator::TranslationDemo(*params);
    let spec = builtin.build()?;
    let table = integrate(&spec, params.t_final, options.dt)?;
    let (r, a) = (params.r(), params.a());

    let global = measure_orthogonal_scan(&table, &options.scan)?;
    let local = measure_local(&table, &EnclosingSurface::maximally_mixed(2)?, &options.scan)?;
    let flow = QubitFlow::new(&table)?;
    let z = [0.0, 0.0, 1.0];
    let unbiased_measure = flow.ensemble_increase(0.5, z, [0.0, 0.0, -1.0]);
    let p1 = 0.5 * (1.0 + suboptimal_gap);
    let suboptimal = SuboptimalCheck {
        weight_gap: suboptimal_gap,
        numeric: flow.ensemble_increase(p1, z, [0.0, 0.0, -1.0]),
        analytic: translation_increase_analytic(r, a, suboptimal_gap),
    };
    let v1 = global.optimizer.rho1.bloch_vector()?;
    let len = (v1[0] * v1[0] + v1[1] * v1[1] + v1[2] * v1[2]).sqrt();
    let division = divisibility_report(&spec, &table, &options.divisibility);

    Ok(TranslationReport {
        params: *params,
        r,
        a,
        measure_numeric: global.value,
        measure_analytic: r * a,
        measure_local: local.value,
        optimizer_weight_gap: global.optimizer.weight_gap(),
        optimizer_direction: v1,
        direction_error_deg: (v1[2] / len).clamp(-1.0, 1.0).acos().to_degrees(),
        optimizer: global.optimizer,
        unbiased_measure,
        suboptimal,
        image_contains_max_mixed: crate::classical::max_mixed_in_image(&table, params.t_final)?,
        verdict_cp: division.verdict_cp,
        verdict_p: division.verdict_p,
        optimal_trajectory: global.trajectory,
    })
}

/// Settings of the eternal demo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EternalDemoParams {
    /// Pauli weight; see [`BuiltinGenerator::Eternal`].
    pub weight: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
}

impl Default for EternalDemoParams {
    fn default() -> Self {
        Self {
            weight: 0.25,
            t_final: 3.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EternalReport {
    pub params: EternalDemoParams,
    pub cp_verdict: bool,
    pub p_verdict: bool,
    /// Largest CP rate margin over grid times in `(0, T]`; negative when CP
    /// fails everywhere there.
    pub max_cp_margin_after_zero: f64,
    pub min_p_margin: f64,
    /// Largest min-Choi eigenvalue over the one-step maps.
    pub max_step_choi_eigenvalue: f64,
    pub max_contraction_growth: f64,
    pub measure_orthogonal: f64,
    pub measure_local: f64,
    /// Numerical and closed-form `v_x(1)/v_x(0)`, when `T ≥ 1`.
    pub bloch_x_factor_at_1: Option<(f64, f64)>,
    pub divisibility: DivisibilityReport,
}

/// Eternal non-Markovianity: not CP-divisible, P-divisible, zero measure.
pub fn run_eternal_demo(params: &EternalDemoParams, options: &DemoOptions) -> Result<EternalReport> {
    if !(params.t_final > 0.0) {
        return Err(Error::Constraint(format!("T must be positive, got {}", params.t_final)));
    }
    let spec = BuiltinGenerator::Eternal {
        weight: params.weight,
    }
    .build()?;
    let table = integrate(&spec, params.t_final, options.dt)?;
    let division = divisibility_report(&spec, &table, &options.divisibility);
    let global = measure_orthogonal_scan(&table, &options.scan)?;
    let local = measure_local(&table, &EnclosingSurface::maximally_mixed(2)?, &options.scan)?;
    let bloch_x_factor_at_1 = match table.index_of(1.0) {
        Ok(k) => {
            let (m, _) = table.map(k).bloch_affine()?;
            Some((m[(0, 0)], eternal_closed_form(params.weight, 1.0).0))
        }
        Err(_) => None,
    };
    let cp = &division.cp_rate_condition;
    Ok(EternalReport {
        params: *params,
        cp_verdict: division.verdict_cp,
        p_verdict: division.verdict_p,
        max_cp_margin_after_zero: cp.margins[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_p_margin: division.p_rate_condition.worst_margin,
        max_step_choi_eigenvalue: division.cp_choi_witness.max().unwrap_or(f64::NAN),
        max_contraction_growth: division.p_contraction_witness.max().unwrap_or(f64::NAN),
        measure_orthogonal: global.value,
        measure_local: local.value,
        bloch_x_factor_at_1,
        divisibility: division,
    })
}

/// System qubit coupled to an environment qubit by excitation exchange.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationDemoParams {
    pub g: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    pub ensemble: HelstromEnsemble,
    pub environment: DensityMatrix,
}

impl Default for DilationDemoParams {
    fn default() -> Self {
        Self {
            g: 1.0,
            t_final: 2.0 * std::f64::consts::PI,
            dt: 0.01,
            ensemble: HelstromEnsemble::unbiased(DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1))
                .expect("valid ensemble"),
            environment: DensityMatrix::basis_state(2, 0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub times: Vec<f64>,
    pub i_int: Vec<f64>,
    pub i_ext: Vec<f64>,
    pub sum: Vec<f64>,
    /// `max_t |I_int(t) + I_ext(t) − I_int(0)|`.
    pub max_residual: f64,
    pub i_ext_initial: f64,
    pub min_quantity: f64,
    pub max_unitarity_error: f64,
}

/// `H = g(σ+⊗σ− + σ−⊗σ+)`, system first.
pub fn exchange_hamiltonian(g: f64) -> HermitianOperator {
    let sp = pauli::sigma_plus();
    let sm = pauli::sigma_minus();
    HermitianOperator::hermitize(&(sp.kronecker(&sm) + sm.kronecker(&sp)).scale(g))
}

/// `Tr_E` of a system ⊗ environment operator.
pub fn partial_trace_environment(m: &CMatrix, d_sys: usize, d_env: usize) -> CMatrix {
    CMatrix::from_fn(d_sys, d_sys, |i, j| {
        (0..d_env).map(|e| m[(i * d_env + e, j * d_env + e)]).sum()
    })
}

/// Internal and external distinguishability along the exchange dynamics.
pub fn run_dilation_demo(params: &DilationDemoParams) -> Result<DilationReport> {
    if params.ensemble.dim() != 2 || params.environment.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            found: params.ensemble.dim().max(params.environment.dim()),
            supported: 2,
        });
    }
    if !(params.dt > 0.0 && params.t_final >= params.dt && params.g.is_finite()) {
        return Err(Error::InvalidGrid {
            t_final: params.t_final,
            dt: params.dt,
        });
    }
    let n = (params.t_final / params.dt).round() as usize;
    let times: Vec<f64> = (0..=n).map(|k| params.t_final * k as f64 / n as f64).collect();
    let (values, vecs) = exchange_hamiltonian(params.g).eigen();
    let env = params.environment.matrix();
    let e = &params.ensemble;
    let joint1 = e.rho1.matrix().kronecker(env);
    let joint2 = e.rho2.matrix().kronecker(env);

    let mut report = DilationReport {
        times: times.clone(),
        i_int: Vec::with_capacity(n + 1),
        i_ext: Vec::with_capacity(n + 1),
        sum: Vec::with_capacity(n + 1),
        max_residual: 0.0,
        i_ext_initial: 0.0,
        min_quantity: f64::INFINITY,
        max_unitarity_error: 0.0,
    };
    for &t in &times {
        let phases = DVector::from_iterator(4, values.iter().map(|&l| C64::from_polar(1.0, -l * t)));
        let u = &vecs * CMatrix::from_diagonal(&phases) * vecs.adjoint();
        let unitarity = crate::operator::max_abs(&(u.adjoint() * &u - CMatrix::identity(4, 4)));
        let evolve = |m: &CMatrix| &u * m * u.adjoint();
        let (se1, se2) = (evolve(&joint1), evolve(&joint2));
        let total = trace_norm(&HermitianOperator::hermitize(&(se1.scale(e.p1) - se2.scale(e.p2))));
        let s1 = partial_trace_environment(&se1, 2, 2);
        let s2 = partial_trace_environment(&se2, 2, 2);
        let internal = trace_norm(&HermitianOperator::hermitize(&(s1.scale(e.p1) - s2.scale(e.p2))));
        report.i_int.push(internal);
        report.i_ext.push(total - internal);
        report.sum.push(total);
        report.max_unitarity_error = report.max_unitarity_error.max(unitarity);
    }
    let i0 = report.i_int[0];
    report.i_ext_initial = report.i_ext[0];
    report.max_residual = report.sum.iter().map(|s| (s - i0).abs()).fold(0.0, f64::max);
    report.min_quantity = report
        .i_int
        .iter()
        .chain(&report.i_ext)
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(report)
}

/// Accumulated increase of an arbitrary ensemble under the translation demo.
pub fn translation_ensemble_increase(params: &TranslationDemoParams, dt: f64, ensemble: &HelstromEnsemble) -> Result<f64> {
    let table = integrate(&BuiltinGenerator::TranslationDemo(*params).build()?, params.t_final, dt)?;
    Ok(accumulate_increase(&crate::measure::trace_norm_trajectory(&table, ensemble)?))
}
