//! JSON process configuration.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "hamiltonian": [[[0.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]],
//!   "channels": [
//!     {"operator": "sigma_x", "rate": {"type": "constant", "params": 0.25}},
//!     {"operator": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]],
//!      "rate": {"type": "neg-tanh", "params": {"scale": 0.25}}}
//!   ],
//!   "time": {"T": 3.0, "dt": 0.001},
//!   "seed": 7,
//!   "initial_state": {"bloch": [1, 0, 0]}
//! }
//! ```
//!
//! Instead of `hamiltonian` and `channels`, a config may name a built-in
//! family: `"builtin": {"name": "eternal"}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{BuiltinGenerator, Channel, GeneratorSpec, RateFunction};
use crate::operator::{matrix_from_literal, matrix_to_literal, pauli, DensityMatrix, HermitianOperator, MatrixLiteral};
use crate::CMatrix;

/// A Lindblad operator given by name or as a matrix literal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Named(String),
    Matrix(MatrixLiteral),
}

impl OperatorSpec {
    pub fn resolve(&self, dim: usize) -> Result<CMatrix> {
        let m = match self {
            OperatorSpec::Matrix(rows) => matrix_from_literal(rows)?,
            OperatorSpec::Named(name) => {
                if name == "identity" {
                    CMatrix::identity(dim, dim)
                } else {
                    if dim != 2 {
                        return Err(Error::Constraint(format!(
                            "named operator '{name}' needs dim 2, config has dim {dim}"
                        )));
                    }
                    match name.as_str() {
                        "sigma_x" => pauli::sigma_x(),
                        "sigma_y" => pauli::sigma_y(),
                        "sigma_z" => pauli::sigma_z(),
                        "sigma_plus" => pauli::sigma_plus(),
                        "sigma_minus" => pauli::sigma_minus(),
                        _ => {
                            return Err(Error::Constraint(format!(
                                "unknown operator name '{name}' (expected identity, sigma_x, sigma_y, sigma_z, sigma_plus or sigma_minus)"
                            )))
                        }
                    }
                }
            }
        };
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub operator: OperatorSpec,
    pub rate: RateFunction,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
}

/// Initial state of `simulate` and `classical`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    MaximallyMixed,
    Bloch([f64; 3]),
    Basis(usize),
    Matrix(MatrixLiteral),
}

impl InitialState {
    pub fn resolve(&self, dim: usize) -> Result<DensityMatrix> {
        let rho = match self {
            InitialState::MaximallyMixed => DensityMatrix::maximally_mixed(dim),
            InitialState::Bloch(v) => DensityMatrix::from_bloch(*v)?,
            InitialState::Basis(k) if *k < dim => DensityMatrix::basis_state(dim, *k),
            InitialState::Basis(k) => {
                return Err(Error::Constraint(format!("basis index {k} out of range for dim {dim}")))
            }
            InitialState::Matrix(rows) => DensityMatrix::from_matrix(matrix_from_literal(rows)?)?,
        };
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.dim(),
            });
        }
        Ok(rho)
    }

    /// Parses `mixed`, `basis:K` or a Bloch vector `x,y,z`.
    pub fn parse_flag(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "mixed" {
            return Ok(InitialState::MaximallyMixed);
        }
        if let Some(k) = s.strip_prefix("basis:") {
            return k
                .trim()
                .parse()
                .map(InitialState::Basis)
                .map_err(|_| Error::Constraint(format!("bad basis index in '{s}'")));
        }
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Constraint(format!("expected 'mixed', 'basis:K' or 'x,y,z', got '{s}'")))?;
        match parts[..] {
            [x, y, z] => Ok(InitialState::Bloch([x, y, z])),
            _ => Err(Error::Constraint(format!("Bloch vector needs 3 components, got '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixLiteral>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian_schedule: Option<RateFunction>,
    #[serde(default)]
    pub channels: Vec<ChannelConfig>,
    pub time: TimeConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinGenerator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
}

/// Parse or validation failure, addressed by field path where possible.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl ProcessConfig {
    /// Parses JSON text; errors name the JSON path and the line/column.
    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            ConfigError(format!("{path}: {inner}"))
        })?;
        config.spec()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// The generator, with errors prefixed by the offending field.
    pub fn spec(&self) -> std::result::Result<GeneratorSpec, ConfigError> {
        let field = |path: String| move |e: Error| ConfigError(format!("{path}: {e}"));
        if !(self.time.dt > 0.0 && self.time.t_final.is_finite() && self.time.t_final >= self.time.dt) {
            return Err(ConfigError(format!(
                "time: need 0 < dt <= T, got T={}, dt={}",
                self.time.t_final, self.time.dt
            )));
        }
        if let Some(b) = &self.builtin {
            if self.hamiltonian.is_some() || !self.channels.is_empty() || self.hamiltonian_schedule.is_some() {
                return Err(ConfigError(
                    "builtin: cannot be combined with hamiltonian or channels".into(),
                ));
            }
            let spec = b.build().map_err(field("builtin".into()))?;
            if spec.dim() != self.dim {
                return Err(ConfigError(format!("dim: builtin '{}' has dim {}", b.name(), spec.dim())));
            }
            return Ok(spec);
        }
        if self.dim == 0 {
            return Err(ConfigError("dim: must be positive".into()));
        }
        let hamiltonian = match &self.hamiltonian {
            Some(rows) => {
                let m = matrix_from_literal(rows).map_err(field("hamiltonian".into()))?;
                if m.nrows() != self.dim || m.ncols() != self.dim {
                    return Err(ConfigError(format!(
                        "hamiltonian: expected {d}x{d}, got {}x{}",
                        m.nrows(),
                        m.ncols(),
                        d = self.dim
                    )));
                }
                HermitianOperator::new(m).map_err(field("hamiltonian".into()))?
            }
            None => HermitianOperator::zero(self.dim),
        };
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, ch)| {
                ch.rate.validate().map_err(field(format!("channels[{i}].rate")))?;
                let op = ch.operator.resolve(self.dim).map_err(field(format!("channels[{i}].operator")))?;
                Ok(match &ch.operator {
                    OperatorSpec::Named(name) => Channel::labelled(ch.rate.clone(), op, name),
                    OperatorSpec::Matrix(_) => Channel::new(ch.rate.clone(), op),
                })
            })
            .collect::<std::result::Result<Vec<_>, ConfigError>>()?;
        GeneratorSpec::new(hamiltonian, self.hamiltonian_schedule.clone(), channels)
            .map_err(field("channels".into()))
    }

    /// The same process with any builtin expanded into explicit matrices.
    pub fn explicit(&self) -> std::result::Result<Self, ConfigError> {
        let spec = self.spec()?;
        if self.builtin.is_none() {
            return Ok(self.clone());
        }
        Ok(Self {
            dim: spec.dim(),
            hamiltonian: Some(matrix_to_literal(spec.hamiltonian().matrix())),
            hamiltonian_schedule: spec.schedule().cloned(),
            channels: spec
                .channels()
                .iter()
                .map(|c| ChannelConfig {
                    operator: OperatorSpec::Matrix(matrix_to_literal(&c.operator)),
                    rate: c.rate.clone(),
                })
                .collect(),
            time: self.time,
            seed: self.seed,
            builtin: None,
            initial_state: self.initial_state.clone(),
        })
    }

    pub fn initial_state(&self) -> std::result::Result<DensityMatrix, ConfigError> {
        self.initial_state
            .as_ref()
            .unwrap_or(&InitialState::Basis(0))
            .resolve(self.dim)
            .map_err(|e| ConfigError(format!("initial_state: {e}")))
    }

    /// Config for a builtin family on `[0, T]`.
    pub fn builtin(builtin: BuiltinGenerator, t_final: f64, dt: f64) -> Self {
        Self {
            dim: 2,
            hamiltonian: None,
            hamiltonian_schedule: None,
            channels: Vec::new(),
            time: TimeConfig { t_final, dt },
            seed: 0,
            builtin: Some(builtin),
            initial_state: None,
        }
    }
}
