//! Time-local generators of Lindblad structure with time-dependent rates.
//!
//! ```text
//! K_t ρ = −i s(t)[H, ρ] + Σ_j γ_j(t) (A_j ρ A_j† − ½{A_j† A_j, ρ})
//! ```
//!
//! Rates may be negative. Lindblad operators and the Hamiltonian matrix are
//! time independent; the Hamiltonian carries an optional scalar schedule
//! `s(t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{check_qubit, pauli, HermitianOperator};
use crate::propagator::vectorize;
use crate::{CMatrix, C64};

/// A scalar function of time.
///
/// Evaluation is right-continuous; [`RateFunction::eval_left`] gives left
/// limits so integrators can treat jumps that fall on step boundaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "kebab-case")]
pub enum RateFunction {
    Constant(f64),
    /// `values[i]` holds on `[breaks[i-1], breaks[i])`, with
    /// `values.len() == breaks.len() + 1`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// `−scale · tanh(t)`.
    NegTanh { scale: f64 },
    /// Linear interpolation through `(times[i], values[i])`, held constant
    /// outside the table.
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl RateFunction {
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            RateFunction::Constant(v) if !v.is_finite() => {
                Err(Error::Constraint("constant rate must be finite".into()))
            }
            RateFunction::NegTanh { scale } if !scale.is_finite() => {
                Err(Error::Constraint("tanh scale must be finite".into()))
            }
            RateFunction::PiecewiseConstant { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::Constraint(format!(
                        "piecewise-constant rate needs {} values for {} breaks, got {}",
                        breaks.len() + 1,
                        breaks.len(),
                        values.len()
                    )));
                }
                if !finite(breaks) || !finite(values) || breaks.windows(2).any(|w| w[0] >= w[1])
                {
                    return Err(Error::Constraint(
                        "piecewise-constant breaks must be finite and increasing".into(),
                    ));
                }
                Ok(())
            }
            RateFunction::Table { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::Constraint(
                        "table rate needs matching non-empty times and values".into(),
                    ));
                }
                if !finite(times) || !finite(values) || times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Constraint(
                        "table times must be finite and increasing".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Right-continuous value at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            RateFunction::Constant(v) => *v,
            RateFunction::PiecewiseConstant { breaks, values } => {
                values[breaks.partition_point(|&b| b <= t)]
            }
            RateFunction::NegTanh { scale } => -scale * t.tanh(),
            RateFunction::Table { times, values } => interpolate(times, values, t),
        }
    }

    /// Left limit at `t`.
    pub fn eval_left(&self, t: f64) -> f64 {
        match self {
            RateFunction::PiecewiseConstant { breaks, values } => {
                values[breaks.partition_point(|&b| b < t)]
            }
            _ => self.eval(t),
        }
    }

    /// Value seen from inside the step `[start, end]`: right limit at the
    /// start, left limit at the end.
    pub fn eval_within(&self, t: f64, start: f64, end: f64) -> f64 {
        if t >= end && end > start {
            self.eval_left(t)
        } else {
            self.eval(t)
        }
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= times[0] {
        return values[0];
    }
    let last = times.len() - 1;
    if t >= times[last] {
        return values[last];
    }
    let i = times.partition_point(|&x| x <= t);
    let (t0, t1) = (times[i - 1], times[i]);
    let w = (t - t0) / (t1 - t0);
    values[i - 1] * (1.0 - w) + values[i] * w
}

/// One decay channel `γ_j(t)` with operator `A_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub rate: RateFunction,
    pub operator: CMatrix,
    pub label: Option<String>,
}

impl Channel {
    pub fn new(rate: RateFunction, operator: CMatrix) -> Self {
        Self {
            rate,
            operator,
            label: None,
        }
    }

    pub fn labelled(rate: RateFunction, operator: CMatrix, label: &str) -> Self {
        Self {
            rate,
            operator,
            label: Some(label.to_string()),
        }
    }
}

/// Hamiltonian plus decay channels.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    dim: usize,
    hamiltonian: HermitianOperator,
    schedule: Option<RateFunction>,
    channels: Vec<Channel>,
}

/// Rates and Hamiltonian scale at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub hamiltonian_scale: f64,
    pub rates: Vec<f64>,
}

impl GeneratorSpec {
    pub fn new(
        hamiltonian: HermitianOperator,
        schedule: Option<RateFunction>,
        channels: Vec<Channel>,
    ) -> Result<Self> {
        let dim = hamiltonian.dim();
        if dim == 0 {
            return Err(Error::Constraint("dimension must be positive".into()));
        }
        if let Some(s) = &schedule {
            s.validate()?;
        }
        for ch in &channels {
            ch.rate.validate()?;
            if ch.operator.nrows() != dim || ch.operator.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: ch.operator.nrows().max(ch.operator.ncols()),
                });
            }
            if ch.operator.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Constraint("Lindblad operator has non-finite entries".into()));
            }
        }
        Ok(Self {
            dim,
            hamiltonian,
            schedule,
            channels,
        })
    }

    /// Purely dissipative generator.
    pub fn dissipative(dim: usize, channels: Vec<Channel>) -> Result<Self> {
        Self::new(HermitianOperator::zero(dim), None, channels)
    }

    /// Unitary dynamics under a constant Hamiltonian.
    pub fn unitary(hamiltonian: HermitianOperator) -> Self {
        let dim = hamiltonian.dim();
        Self {
            dim,
            hamiltonian,
            schedule: None,
            channels: Vec::new(),
        }
    }

    /// Pauli channels `Σ_j c_j(t)(σ_j ρ σ_j − ρ)` on a qubit.
    pub fn pauli_channels(rates: [RateFunction; 3]) -> Result<Self> {
        let labels = ["sigma_x", "sigma_y", "sigma_z"];
        let channels = rates
            .into_iter()
            .zip(pauli::sigmas())
            .zip(labels)
            .map(|((r, s), l)| Channel::labelled(r, s, l))
            .collect();
        Self::dissipative(2, channels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn schedule(&self) -> Option<&RateFunction> {
        self.schedule.as_ref()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Right-continuous coefficients at `t`.
    pub fn coefficients(&self, t: f64) -> Coefficients {
        Coefficients {
            hamiltonian_scale: self.schedule.as_ref().map_or(1.0, |s| s.eval(t)),
            rates: self.channels.iter().map(|c| c.rate.eval(t)).collect(),
        }
    }

    /// Coefficients seen from inside the step `[start, end]`.
    pub fn coefficients_within(&self, t: f64, start: f64, end: f64) -> Coefficients {
        Coefficients {
            hamiltonian_scale: self
                .schedule
                .as_ref()
                .map_or(1.0, |s| s.eval_within(t, start, end)),
            rates: self
                .channels
                .iter()
                .map(|c| c.rate.eval_within(t, start, end))
                .collect(),
        }
    }

    pub fn rates_at(&self, t: f64) -> Vec<f64> {
        self.coefficients(t).rates
    }

    /// Applies the generator with given coefficients to an arbitrary matrix.
    pub fn apply_with(&self, coeffs: &Coefficients, x: &CMatrix) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let h = self.hamiltonian.matrix();
        let mut out = (h * x - x * h) * (-i * coeffs.hamiltonian_scale);
        for (ch, &g) in self.channels.iter().zip(&coeffs.rates) {
            if g == 0.0 {
                continue;
            }
            let a = &ch.operator;
            let ad = a.adjoint();
            let ada = &ad * a;
            let term = a * x * &ad - (&ada * x + x * &ada).scale(0.5);
            out += term.scale(g);
        }
        out
    }

    /// `K_t X` for an arbitrary matrix `X`.
    pub fn apply_matrix(&self, t: f64, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.nrows(),
            });
        }
        Ok(self.apply_with(&self.coefficients(t), x))
    }

    /// Time-independent superoperator pieces: the Hamiltonian part and one
    /// dissipator per channel, each on column-stacked operators.
    pub fn superoperator_parts(&self) -> SuperoperatorParts {
        let d = self.dim;
        let unit = Coefficients {
            hamiltonian_scale: 1.0,
            rates: vec![0.0; self.channels.len()],
        };
        let hamiltonian = self.superoperator_from(|x| self.apply_with(&unit, x));
        let dissipators = (0..self.channels.len())
            .map(|j| {
                let mut rates = vec![0.0; self.channels.len()];
                rates[j] = 1.0;
                let c = Coefficients {
                    hamiltonian_scale: 0.0,
                    rates,
                };
                self.superoperator_from(|x| self.apply_with(&c, x))
            })
            .collect();
        SuperoperatorParts {
            dim: d,
            hamiltonian,
            dissipators,
        }
    }

    fn superoperator_from(&self, f: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
        let d = self.dim;
        let n = d * d;
        let mut out = CMatrix::zeros(n, n);
        for col in 0..n {
            let mut basis = CMatrix::zeros(d, d);
            basis[(col % d, col / d)] = C64::new(1.0, 0.0);
            out.set_column(col, &vectorize(&f(&basis)));
        }
        out
    }
}

/// Superoperator matrices from which `K_t` is assembled at any time.
#[derive(Clone, Debug)]
pub struct SuperoperatorParts {
    pub dim: usize,
    pub hamiltonian: CMatrix,
    pub dissipators: Vec<CMatrix>,
}

impl SuperoperatorParts {
    pub fn assemble(&self, coeffs: &Coefficients) -> CMatrix {
        let mut out = self.hamiltonian.scale(coeffs.hamiltonian_scale);
        for (d, &g) in self.dissipators.iter().zip(&coeffs.rates) {
            if g != 0.0 {
                out += d.scale(g);
            }
        }
        out
    }
}

/// `K_t ρ` for a Hermitian argument; the result is Hermitian and traceless.
pub fn apply_generator(
    spec: &GeneratorSpec,
    t: f64,
    rho: &HermitianOperator,
) -> Result<HermitianOperator> {
    Ok(HermitianOperator::hermitize(
        &spec.apply_matrix(t, rho.matrix())?,
    ))
}

/// Affine Bloch form `dv/dt = A v + b` of a qubit generator at time `t`.
pub fn bloch_affine(spec: &GeneratorSpec, t: f64) -> Result<([[f64; 3]; 3], [f64; 3])> {
    check_qubit(spec.dim())?;
    let sigmas = pauli::sigmas();
    let coeffs = spec.coefficients(t);
    let component = |m: &CMatrix, k: usize| 0.5 * (&sigmas[k] * m).trace().re;
    let mut a = [[0.0; 3]; 3];
    for l in 0..3 {
        let image = spec.apply_with(&coeffs, &sigmas[l]);
        for (k, row) in a.iter_mut().enumerate() {
            row[l] = component(&image, k);
        }
    }
    let drift = spec.apply_with(&coeffs, &pauli::identity());
    let b = [0, 1, 2].map(|k| component(&drift, k));
    Ok((a, b))
}

/// Bloch-vector velocity `dv/dt` under the generator at time `t`.
pub fn bloch_rhs(spec: &GeneratorSpec, t: f64, v: [f64; 3]) -> Result<[f64; 3]> {
    let (a, b) = bloch_affine(spec, t)?;
    Ok([0, 1, 2].map(|k| a[k][0] * v[0] + a[k][1] * v[1] + a[k][2] * v[2] + b[k]))
}

/// Isotropic contraction followed by a translation along `ẑ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationDemoParams {
    /// Contraction rate on `[0, t1)`.
    pub gamma0: f64,
    pub t1: f64,
    /// Translation speed on `[t1, T]`.
    pub b0: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
}

impl TranslationDemoParams {
    /// Radius of the contracted Bloch ball, `exp(−γ0 t1)`.
    pub fn r(&self) -> f64 {
        (-self.gamma0 * self.t1).exp()
    }

    /// Length of the translation, `b0 (T − t1)`.
    pub fn a(&self) -> f64 {
        self.b0 * (self.t_final - self.t1)
    }

    /// Parameters producing a given `(r, a)` with `t1 = 1`, `T = 2`.
    pub fn from_geometry(r: f64, a: f64) -> Self {
        Self {
            gamma0: -r.ln(),
            t1: 1.0,
            b0: a,
            t_final: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.gamma0, self.t1, self.b0, self.t_final]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite || self.gamma0 <= 0.0 || self.b0 <= 0.0 {
            return Err(Error::Constraint(
                "translation-demo needs finite gamma0 > 0 and b0 > 0".into(),
            ));
        }
        if !(0.0 < self.t1 && self.t1 < self.t_final) {
            return Err(Error::Constraint(format!(
                "translation-demo needs 0 < t1 < T, got t1={}, T={}",
                self.t1, self.t_final
            )));
        }
        let (r, a) = (self.r(), self.a());
        if a > 1.0 - r + 1e-12 {
            return Err(Error::Constraint(format!(
                "translation a={a} exceeds 1 - r = {}; the dynamical map would not be positive",
                1.0 - r
            )));
        }
        Ok(())
    }
}

/// Named generator families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum BuiltinGenerator {
    /// Contraction with Pauli rates `γ0/4`, then the `σ±` pair with rates
    /// `∓b0/2`.
    TranslationDemo(TranslationDemoParams),
    /// Pauli rates `weight·(1, 1, −tanh t)`: P- but not CP-divisible.
    ///
    /// The default weight `1/4` gives maps `Φ_t` that are positive but not
    /// completely positive; weight `1/2` keeps every `Φ_t` completely positive.
    Eternal {
        #[serde(default = "default_eternal_weight")]
        weight: f64,
    },
    /// Pauli rates `γ0/4`, contracting the Bloch ball as `e^{−γ0 t}`.
    Isotropic { gamma0: f64 },
}

fn default_eternal_weight() -> f64 {
    0.25
}

impl BuiltinGenerator {
    /// The eternal model with the default weight `1/4`.
    pub fn eternal() -> Self {
        BuiltinGenerator::Eternal { weight: default_eternal_weight() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BuiltinGenerator::TranslationDemo(_) => "translation-demo",
            BuiltinGenerator::Eternal { .. } => "eternal",
            BuiltinGenerator::Isotropic { .. } => "isotropic",
        }
    }

    pub fn build(&self) -> Result<GeneratorSpec> {
        match *self {
            BuiltinGenerator::TranslationDemo(p) => {
                p.validate()?;
                let contraction = RateFunction::PiecewiseConstant {
                    breaks: vec![p.t1],
                    values: vec![p.gamma0 / 4.0, 0.0],
                };
                let mut channels: Vec<Channel> = pauli::sigmas()
                    .into_iter()
                    .zip(["sigma_x", "sigma_y", "sigma_z"])
                    .map(|(s, l)| Channel::labelled(contraction.clone(), s, l))
                    .collect();
                channels.push(Channel::labelled(
                    RateFunction::PiecewiseConstant {
                        breaks: vec![p.t1],
                        values: vec![0.0, -p.b0 / 2.0],
                    },
                    pauli::sigma_minus(),
                    "sigma_minus",
                ));
                channels.push(Channel::labelled(
                    RateFunction::PiecewiseConstant {
                        breaks: vec![p.t1],
                        values: vec![0.0, p.b0 / 2.0],
                    },
                    pauli::sigma_plus(),
                    "sigma_plus",
                ));
                GeneratorSpec::dissipative(2, channels)
            }
            BuiltinGenerator::Eternal { weight } => {
                if !(weight.is_finite() && weight > 0.0) {
                    return Err(Error::Constraint(format!(
                        "eternal weight must be positive, got {weight}"
                    )));
                }
                GeneratorSpec::pauli_channels([
                    RateFunction::Constant(weight),
                    RateFunction::Constant(weight),
                    RateFunction::NegTanh { scale: weight },
                ])
            }
            BuiltinGenerator::Isotropic { gamma0 } => {
                if !gamma0.is_finite() {
                    return Err(Error::Constraint("gamma0 must be finite".into()));
                }
                let c = RateFunction::Constant(gamma0 / 4.0);
                GeneratorSpec::pauli_channels([c.clone(), c.clone(), c])
            }
        }
    }
}

/// Builds a named generator family.
pub fn builtin_generator(builtin: &BuiltinGenerator) -> Result<GeneratorSpec> {
    builtin.build()
}
