//! Numerical tolerances shared by every module.

use serde::{Deserialize, Serialize};

/// One record holding every tolerance the library compares against.
///
/// Library entry points read [`Tolerances::DEFAULT`]; the record is public so
/// callers can inspect the thresholds that produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max entrywise deviation of `X` from `X†`.
    pub hermiticity: f64,
    /// Allowed deviation of a density matrix trace from one.
    pub trace: f64,
    /// Smallest eigenvalue still accepted as positive semidefinite.
    pub positivity: f64,
    /// Allowed deviation of `p1 + p2` from one.
    pub probability: f64,
    /// Eigenvalues within this distance of zero go to the positive part.
    pub spectral_zero: f64,
    /// Trace norm below which an operator counts as zero.
    pub zero_operator: f64,
    /// Product of orthogonal supports.
    pub orthogonality: f64,
    /// Trace preservation of superoperators.
    pub trace_preservation: f64,
    /// Most negative Choi eigenvalue still certifying complete positivity.
    pub choi: f64,
    /// Smallest singular value ratio for which a map is treated as invertible.
    pub invertibility: f64,
    /// Rate-condition margins at or above `-rate` pass.
    pub rate: f64,
    /// Trace-norm growth per interval accepted as contraction.
    pub contraction: f64,
    /// Threshold on the trace-norm derivative marking an increase.
    pub sigma: f64,
    /// Eigenvalues closer than this are treated as degenerate.
    pub degeneracy: f64,
    /// Minimised Bloch norm counted as reaching the origin.
    pub image_origin: f64,
    /// Distance at which a time counts as lying on the grid.
    pub grid_match: f64,
    /// Orthonormality of user supplied bases.
    pub basis: f64,
    /// Largest propagator entry before integration is declared divergent.
    pub divergence: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermiticity: 1e-12,
        trace: 1e-10,
        positivity: 1e-10,
        probability: 1e-12,
        spectral_zero: 1e-12,
        zero_operator: 1e-14,
        orthogonality: 1e-9,
        trace_preservation: 1e-8,
        choi: 1e-7,
        invertibility: 1e-10,
        rate: 1e-12,
        contraction: 1e-7,
        sigma: 1e-9,
        degeneracy: 1e-10,
        image_origin: 1e-9,
        grid_match: 1e-9,
        basis: 1e-10,
        divergence: 1e12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
