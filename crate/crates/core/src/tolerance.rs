use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by validation and reconstruction.
///
/// All matrix entries handled by this crate lie in `[0, 1]` in modulus, so
/// the tolerances are absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed deviation of a squared norm or trace from 1.
    pub norm: f64,
    /// Allowed entrywise deviation from Hermiticity.
    pub herm: f64,
    /// Allowed negative eigenvalue before a matrix is rejected as non-PSD.
    pub psd: f64,
    /// Entries that must vanish are accepted up to this magnitude.
    pub zero: f64,
    /// Allowed disagreement between quantities read from different marginals.
    pub consistency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm: 1e-10,
            herm: 1e-10,
            psd: 1e-9,
            zero: 1e-8,
            consistency: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn with_zero(mut self, zero: f64) -> Self {
        self.zero = zero;
        self
    }

    pub fn with_consistency(mut self, consistency: f64) -> Self {
        self.consistency = consistency;
        self
    }
}
