//! Pure states, density matrices, W-class coefficients and the closed-form
//! two-party marginals of W-class states.

use num_complex::Complex64;

use crate::bitindex::{PartyLabel, PartyPair};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::tolerance::Tolerances;

/// Largest qubit count for a dense amplitude vector.
pub const PURE_CAP: usize = 20;
/// Largest qubit count for a dense `2^n x 2^n` matrix.
pub const MATRIX_CAP: usize = 12;

/// A normalized state `sum_i a_i |B_n(i)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerances(n, amplitudes, &Tolerances::default())
    }

    pub fn with_tolerances(n: usize, amplitudes: Vec<Complex64>, tol: &Tolerances) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("a state needs at least one qubit".into()));
        }
        if n > PURE_CAP {
            return Err(Error::CapExceeded { what: "dense pure state", n, cap: PURE_CAP });
        }
        if amplitudes.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: amplitudes.len() });
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(PureState { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize) -> Complex64 {
        self.amplitudes[i]
    }

    /// `|<self|other>|`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        linalg::overlap(&self.amplitudes, &other.amplitudes)
    }

    pub fn projector(&self) -> Result<DensityMatrix> {
        if self.n > MATRIX_CAP {
            return Err(Error::CapExceeded { what: "dense density matrix", n: self.n, cap: MATRIX_CAP });
        }
        let d = self.amplitudes.len();
        let entries =
            CMatrix::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        Ok(DensityMatrix { n: self.n, entries })
    }
}

/// A general `n`-qubit density matrix, stored in full.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(n: usize, entries: CMatrix, tol: &Tolerances) -> Result<Self> {
        if n > MATRIX_CAP {
            return Err(Error::CapExceeded { what: "dense density matrix", n, cap: MATRIX_CAP });
        }
        let d = 1usize << n;
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: entries.nrows() });
        }
        validate_state_matrix(&entries, tol)?;
        Ok(DensityMatrix { n, entries })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n > MATRIX_CAP {
            return Err(Error::CapExceeded { what: "dense density matrix", n, cap: MATRIX_CAP });
        }
        let d = 1usize << n;
        let entries = CMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        Ok(DensityMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }
}

/// Checks Hermiticity, unit trace and positive semidefiniteness.
pub fn validate_state_matrix(m: &CMatrix, tol: &Tolerances) -> Result<()> {
    let deviation = linalg::hermitian_deviation(m);
    if !(deviation <= tol.herm) {
        return Err(Error::NotHermitian { deviation });
    }
    let tr = linalg::trace(m);
    if !((tr.re - 1.0).abs() <= tol.norm && tr.im.abs() <= tol.norm) {
        return Err(Error::BadTrace { trace: tr.re });
    }
    let min_eigenvalue = linalg::min_eigenvalue(m);
    if min_eigenvalue < -tol.psd {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    Ok(())
}

/// Coefficients of a W-class state `sum_J c_J |0..1_J..0>`.
///
/// Stored per party: `c[J-1]` is the amplitude of the basis state whose
/// single 1 sits at party `J`, i.e. the amplitude at basis index `2^(n-J)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WCoefficients {
    c: Vec<Complex64>,
}

impl WCoefficients {
    pub fn new(c: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerances(c, &Tolerances::default())
    }

    pub fn with_tolerances(c: Vec<Complex64>, tol: &Tolerances) -> Result<Self> {
        if c.len() < 2 {
            return Err(Error::TooFewParties(c.len()));
        }
        let norm_sq: f64 = c.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(WCoefficients { c })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(c: Vec<Complex64>) -> Result<Self> {
        let norm = c.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        Self::new(c.into_iter().map(|a| a / norm).collect())
    }

    /// The symmetric W state, all coefficients `1/sqrt(n)`.
    pub fn uniform(n: usize) -> Result<Self> {
        let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        Self::new(vec![a; n])
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// Coefficient of party `j` (1-based).
    pub fn get(&self, j: usize) -> Complex64 {
        self.c[j - 1]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.c
    }

    /// `|<self|other>|` over the single-excitation subspace.
    pub fn fidelity(&self, other: &WCoefficients) -> f64 {
        linalg::overlap(&self.c, &other.c)
    }

    pub(crate) fn from_raw(c: Vec<Complex64>) -> Self {
        WCoefficients { c }
    }
}

/// A labelled reduced density matrix over a sorted party subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Rdm {
    parties: Vec<usize>,
    ambient_n: usize,
    entries: CMatrix,
}

impl Rdm {
    /// Validated constructor: the matrix must be a density matrix.
    pub fn new(parties: Vec<usize>, ambient_n: usize, entries: CMatrix, tol: &Tolerances) -> Result<Self> {
        let rdm = Self::unchecked(parties, ambient_n, entries)?;
        validate_state_matrix(&rdm.entries, tol)?;
        Ok(rdm)
    }

    /// Checks only labels and shape; the matrix may be any complex matrix.
    pub fn unchecked(parties: Vec<usize>, ambient_n: usize, entries: CMatrix) -> Result<Self> {
        validate_subset(&parties, ambient_n)?;
        let d = 1usize << parties.len();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: entries.nrows().max(entries.ncols()) });
        }
        Ok(Rdm { parties, ambient_n, entries })
    }

    pub fn parties(&self) -> &[usize] {
        &self.parties
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// The pair this marginal lives on, when it is a two-party marginal.
    pub fn pair(&self) -> Option<PartyPair> {
        match self.parties[..] {
            [j, k] => PartyPair::new(j, k, self.ambient_n).ok(),
            _ => None,
        }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        validate_state_matrix(&self.entries, tol)
    }

    pub fn entries_mut(&mut self) -> &mut CMatrix {
        &mut self.entries
    }
}

/// Non-empty, strictly increasing, within `1..=n`.
pub fn validate_subset(parties: &[usize], n: usize) -> Result<()> {
    if parties.is_empty() {
        return Err(Error::Invalid("party subset is empty".into()));
    }
    for &p in parties {
        PartyLabel::new(p, n)?;
    }
    if parties.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedParties(parties.to_vec()));
    }
    Ok(())
}

/// Dense amplitude vector of the W-class state with coefficients `c`.
pub fn make_w(c: &WCoefficients) -> Result<PureState> {
    let n = c.n();
    if n > PURE_CAP {
        return Err(Error::CapExceeded { what: "dense pure state", n, cap: PURE_CAP });
    }
    let mut amplitudes = vec![ZERO; 1 << n];
    for j in 1..=n {
        amplitudes[1 << (n - j)] = c.get(j);
    }
    Ok(PureState { n, amplitudes })
}

/// Rank-one projector `|W><W|`.
pub fn w_density(c: &WCoefficients) -> Result<DensityMatrix> {
    let n = c.n();
    if n > MATRIX_CAP {
        return Err(Error::CapExceeded { what: "dense density matrix", n, cap: MATRIX_CAP });
    }
    let d = 1usize << n;
    let mut entries = CMatrix::zeros(d, d);
    for j in 1..=n {
        for k in 1..=n {
            entries[(1 << (n - j), 1 << (n - k))] = c.get(j) * c.get(k).conj();
        }
    }
    Ok(DensityMatrix { n, entries })
}

fn ordered_pair(c: &WCoefficients, j: usize, k: usize) -> Result<()> {
    let n = c.n();
    PartyLabel::new(j, n)?;
    PartyLabel::new(k, n)?;
    if j >= k {
        return Err(Error::MalformedPair(j, k));
    }
    Ok(())
}

/// Closed-form marginal of a W-class state on parties `J < K`, over the basis
/// `|00>, |01>, |10>, |11>`:
///
/// ```text
/// [ 1-|cJ|^2-|cK|^2   0           0           0 ]
/// [ 0                 |cK|^2      cK conj(cJ) 0 ]
/// [ 0                 cJ conj(cK) |cJ|^2      0 ]
/// [ 0                 0           0           0 ]
/// ```
pub fn w_bipartite_marginal(c: &WCoefficients, j: usize, k: usize) -> Result<Rdm> {
    ordered_pair(c, j, k)?;
    let (cj, ck) = (c.get(j), c.get(k));
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = Complex64::new(1.0 - cj.norm_sqr() - ck.norm_sqr(), 0.0);
    m[(1, 1)] = Complex64::new(ck.norm_sqr(), 0.0);
    m[(2, 2)] = Complex64::new(cj.norm_sqr(), 0.0);
    m[(1, 2)] = ck * cj.conj();
    m[(2, 1)] = m[(1, 2)].conj();
    Ok(Rdm { parties: vec![j, k], ambient_n: c.n(), entries: m })
}

/// Splits the `(J, K)` marginal into `|v><v| + w |00><00|` where
/// `v = cK|01> + cJ|10>` is unnormalized. Returns `(v, w)`.
pub fn psi_plus_decomposition(c: &WCoefficients, j: usize, k: usize) -> Result<([Complex64; 4], f64)> {
    ordered_pair(c, j, k)?;
    let (cj, ck) = (c.get(j), c.get(k));
    let v = [ZERO, ck, cj, ZERO];
    Ok((v, 1.0 - cj.norm_sqr() - ck.norm_sqr()))
}

/// `|v><v| + weight |00><00|` as a 4x4 matrix.
pub fn reassemble_psi_plus(v: &[Complex64; 4], weight: f64) -> CMatrix {
    let mut m = CMatrix::from_fn(4, 4, |a, b| v[a] * v[b].conj());
    m[(0, 0)] += Complex64::new(weight, 0.0);
    m
}

/// GHZ-class state `a|0..0> + b|1..1>`.
pub fn ghz(a: Complex64, b: Complex64, n: usize) -> Result<PureState> {
    if n > PURE_CAP {
        return Err(Error::CapExceeded { what: "dense pure state", n, cap: PURE_CAP });
    }
    let mut amplitudes = vec![ZERO; 1 << n];
    amplitudes[0] = a;
    amplitudes[(1 << n) - 1] = b;
    PureState::new(n, amplitudes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn make_w_two_qubits() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let w = make_w(&WCoefficients::new(vec![c(h, 0.0), c(h, 0.0)]).unwrap()).unwrap();
        assert_eq!(w.amplitudes(), &[ZERO, c(h, 0.0), c(h, 0.0), ZERO]);
    }

    #[test]
    fn make_w_places_parties_big_endian() {
        let coeffs = WCoefficients::new(vec![c(0.6, 0.0), c(0.0, 0.48), c(0.64, 0.0)]).unwrap();
        let w = make_w(&coeffs).unwrap();
        assert_eq!(w.amplitude(4), coeffs.get(1));
        assert_eq!(w.amplitude(2), coeffs.get(2));
        assert_eq!(w.amplitude(1), coeffs.get(3));
        let degenerate = make_w(&WCoefficients::new(vec![ZERO, ZERO, c(1.0, 0.0)]).unwrap()).unwrap();
        assert_eq!(degenerate.amplitude(1), c(1.0, 0.0));
        assert_eq!(degenerate.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);
    }

    #[test]
    fn coefficient_errors() {
        assert!(matches!(WCoefficients::new(vec![c(1.0, 0.0)]), Err(Error::TooFewParties(1))));
        assert!(matches!(
            WCoefficients::new(vec![c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::NotNormalized { .. })
        ));
        let big = WCoefficients::uniform(21).unwrap();
        assert!(matches!(make_w(&big), Err(Error::CapExceeded { .. })));
        assert!(matches!(w_density(&WCoefficients::uniform(13).unwrap()), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn w_density_uniform_three() {
        let rho = w_density(&WCoefficients::uniform(3).unwrap()).unwrap();
        let m = rho.entries();
        let mut nonzero = 0;
        for i in 0..8 {
            for j in 0..8 {
                if m[(i, j)].norm() > 0.0 {
                    nonzero += 1;
                    assert!([1, 2, 4].contains(&i) && [1, 2, 4].contains(&j));
                    assert!((m[(i, j)] - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
                }
            }
        }
        assert_eq!(nonzero, 9);
        assert!((linalg::trace(m) - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(m, make_w(&WCoefficients::uniform(3).unwrap()).unwrap().projector().unwrap().entries());
    }

    #[test]
    fn w_density_is_rank_one() {
        let coeffs = WCoefficients::normalized(vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.0, 0.0), c(0.5, -0.4)]).unwrap();
        let ev = hermitian_eigenvalues(w_density(&coeffs).unwrap().entries());
        assert!((ev.last().unwrap() - 1.0).abs() < 1e-10);
        assert!(ev[..ev.len() - 1].iter().all(|e| e.abs() < 1e-10));
    }

    #[test]
    fn bipartite_marginal_template() {
        let coeffs = WCoefficients::normalized(vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.4, 0.0), c(0.5, -0.4)]).unwrap();
        let m = w_bipartite_marginal(&coeffs, 2, 4).unwrap();
        assert_eq!(m.entry(3, 3), ZERO);
        assert_eq!(m.entry(1, 2), coeffs.get(4) * coeffs.get(2).conj());
        assert_eq!(m.entry(2, 1), m.entry(1, 2).conj());
        m.validate(&Tolerances::default()).unwrap();
        assert!(w_bipartite_marginal(&coeffs, 3, 3).is_err());
        assert!(w_bipartite_marginal(&coeffs, 3, 2).is_err());
        assert!(w_bipartite_marginal(&coeffs, 1, 5).is_err());
    }

    #[test]
    fn bipartite_marginal_uniform_three() {
        let m = w_bipartite_marginal(&WCoefficients::uniform(3).unwrap(), 1, 2).unwrap();
        let third = 1.0 / 3.0;
        for i in 0..3 {
            assert!((m.entry(i, i).re - third).abs() < 1e-15);
        }
        assert!((m.entry(1, 2).re - third).abs() < 1e-15);
    }

    #[test]
    fn bipartite_marginal_two_parties_is_projector() {
        let (a, b) = (c(0.6, 0.0), c(0.0, 0.8));
        let coeffs = WCoefficients::new(vec![a, b]).unwrap();
        let m = w_bipartite_marginal(&coeffs, 1, 2).unwrap();
        let proj = make_w(&coeffs).unwrap().projector().unwrap();
        assert!(linalg::max_abs_diff(m.entries(), proj.entries()) < 1e-15);
        assert_eq!(m.entry(1, 2), b * a.conj());
    }

    #[test]
    fn psi_plus_edge_cases() {
        let coeffs = WCoefficients::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let (_, w) = psi_plus_decomposition(&coeffs, 1, 2).unwrap();
        assert!(w.abs() < 1e-15);
        let coeffs = WCoefficients::new(vec![ZERO, c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let (v, _) = psi_plus_decomposition(&coeffs, 1, 3).unwrap();
        assert_eq!(v, [ZERO, c(0.8, 0.0), ZERO, ZERO]);
    }

    #[test]
    fn ghz_requires_normalization() {
        assert!(ghz(c(1.0, 0.0), c(1.0, 0.0), 3).is_err());
        let g = ghz(c(0.6, 0.0), c(0.8, 0.0), 3).unwrap();
        assert_eq!(g.amplitude(7), c(0.8, 0.0));
    }

    #[test]
    fn density_validation() {
        let tol = Tolerances::default();
        let mut m = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert!(DensityMatrix::new(1, m.clone(), &tol).is_ok());
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(1, m.clone(), &tol), Err(Error::NotHermitian { .. })));
        m[(1, 0)] = c(0.1, 0.0);
        m[(0, 0)] = c(0.6, 0.0);
        assert!(matches!(DensityMatrix::new(1, m.clone(), &tol), Err(Error::BadTrace { .. })));
        let bad = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(DensityMatrix::new(1, bad, &tol), Err(Error::NotPsd { .. })));
    }
}
