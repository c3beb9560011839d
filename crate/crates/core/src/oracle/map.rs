//! The linear map from traceless Hermitian perturbations of an `n`-qubit
//! state to their two-party marginals, and its kernel.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bitindex::PartyPair;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};

/// Largest `n` accepted by [`build_marginal_map`].
pub const MAP_CAP: usize = 7;
/// Singular values below `RANK_TOL * sigma_max` count as kernel.
pub const RANK_TOL: f64 = 1e-10;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Frobenius-orthonormal basis of traceless Hermitian matrices supported on
/// a subset of the computational basis.
///
/// Element order: `(E_ab + E_ba)/sqrt2` for `a < b`, then `i(E_ab - E_ba)/sqrt2`
/// for `a < b`, then the generalized diagonal generators
/// `(sum_{k<l} E_kk - l E_ll) / sqrt(l(l+1))`, all over support positions.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianBasis {
    dim: usize,
    support: Vec<usize>,
}

impl HermitianBasis {
    pub fn full(dim: usize) -> Self {
        HermitianBasis { dim, support: (0..dim).collect() }
    }

    /// Basis restricted to the given (sorted, distinct) global indices.
    pub fn on_support(dim: usize, support: Vec<usize>) -> Self {
        HermitianBasis { dim, support }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        let s = self.support.len();
        (s * s).saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn offdiag_pairs(&self) -> usize {
        let s = self.support.len();
        s * (s.saturating_sub(1)) / 2
    }

    /// Sparse entries `(row, col, value)` of basis element `index`.
    pub fn element(&self, index: usize) -> Vec<(usize, usize, Complex64)> {
        let s = self.support.len();
        let p = self.offdiag_pairs();
        if index < 2 * p {
            let (a, b) = unrank_pair(index % p, s);
            let (ga, gb) = (self.support[a], self.support[b]);
            if index < p {
                let v = Complex64::new(SQRT_HALF, 0.0);
                vec![(ga, gb, v), (gb, ga, v)]
            } else {
                vec![(ga, gb, Complex64::new(0.0, SQRT_HALF)), (gb, ga, Complex64::new(0.0, -SQRT_HALF))]
            }
        } else {
            let l = index - 2 * p + 1;
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut out: Vec<_> =
                (0..l).map(|k| (self.support[k], self.support[k], Complex64::new(norm, 0.0))).collect();
            out.push((self.support[l], self.support[l], Complex64::new(-(l as f64) * norm, 0.0)));
            out
        }
    }

    /// `sum_i coords[i] B_i` as a dense ambient matrix.
    pub fn assemble(&self, coords: &[f64]) -> CMatrix {
        let mut m = CMatrix::from_element(self.dim, self.dim, ZERO);
        for (i, &x) in coords.iter().enumerate() {
            if x != 0.0 {
                for (r, c, v) in self.element(i) {
                    m[(r, c)] += v * x;
                }
            }
        }
        m
    }

    /// Same as [`assemble`](Self::assemble) but only the support block.
    pub fn assemble_block(&self, coords: &[f64]) -> CMatrix {
        let pos: std::collections::HashMap<usize, usize> =
            self.support.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let s = self.support.len();
        let mut m = CMatrix::from_element(s, s, ZERO);
        for (i, &x) in coords.iter().enumerate() {
            if x != 0.0 {
                for (r, c, v) in self.element(i) {
                    m[(pos[&r], pos[&c])] += v * x;
                }
            }
        }
        m
    }
}

fn unrank_pair(mut r: usize, s: usize) -> (usize, usize) {
    for a in 0..s {
        let row = s - 1 - a;
        if r < row {
            return (a, a + 1 + r);
        }
        r -= row;
    }
    unreachable!("pair rank out of range")
}

/// Frobenius-isometric real coordinates of a Hermitian matrix: diagonal
/// entries, then `sqrt2 Re` and `sqrt2 Im` of the strict upper triangle.
pub fn hermitian_coords(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    out.extend((0..d).map(|i| m[(i, i)].re));
    for a in 0..d {
        for b in (a + 1)..d {
            out.push(std::f64::consts::SQRT_2 * m[(a, b)].re);
            out.push(std::f64::consts::SQRT_2 * m[(a, b)].im);
        }
    }
    out
}

/// Pair marginal of a sparse operator given as `(row, col, value)` triples.
pub fn sparse_pair_marginal(entries: &[(usize, usize, Complex64)], pair: PartyPair, n: usize) -> CMatrix {
    let sj = n - pair.first();
    let sk = n - pair.second();
    let kept = (1usize << sj) | (1usize << sk);
    let sub = |i: usize| (((i >> sj) & 1) << 1) | ((i >> sk) & 1);
    let mut out = CMatrix::from_element(4, 4, ZERO);
    for &(r, c, v) in entries {
        if r & !kept == c & !kept {
            out[(sub(r), sub(c))] += v;
        }
    }
    out
}

/// The marginal map restricted to a basis, as a real matrix with 16 rows per
/// pair and one column per basis element.
#[derive(Debug, Clone)]
pub struct MarginalMap {
    n: usize,
    pairs: Vec<PartyPair>,
    basis: HermitianBasis,
    matrix: DMatrix<f64>,
}

impl MarginalMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[PartyPair] {
        &self.pairs
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Applies the map to basis coordinates.
    pub fn apply(&self, coords: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(coords);
        (&self.matrix * x).iter().copied().collect()
    }

    /// Numerical rank with the default relative threshold.
    pub fn rank(&self) -> usize {
        numerical_rank(&self.matrix)
    }
}

pub(crate) fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

fn check_pairs(pairs: &[PartyPair], n: usize) -> Result<Vec<PartyPair>> {
    let mut out = Vec::with_capacity(pairs.len());
    for p in pairs {
        let q = PartyPair::new(p.first(), p.second(), n)?;
        if !out.contains(&q) {
            out.push(q);
        }
    }
    out.sort();
    Ok(out)
}

/// Builds the map over the full traceless Hermitian space of `n` qubits.
pub fn build_marginal_map(n: usize, pairs: &[PartyPair]) -> Result<MarginalMap> {
    if n > MAP_CAP {
        return Err(Error::CapExceeded { what: "marginal map", n, cap: MAP_CAP });
    }
    if n < 2 {
        return Err(Error::TooFewParties(n));
    }
    build_restricted_map(n, pairs, HermitianBasis::full(1 << n))
}

/// Builds the map over a basis supported on a subset of basis states.
pub fn build_restricted_map(n: usize, pairs: &[PartyPair], basis: HermitianBasis) -> Result<MarginalMap> {
    if n > MAP_CAP {
        return Err(Error::CapExceeded { what: "marginal map", n, cap: MAP_CAP });
    }
    let pairs = check_pairs(pairs, n)?;
    let cols = basis.len();
    let mut matrix = DMatrix::<f64>::zeros(16 * pairs.len(), cols);
    for j in 0..cols {
        let el = basis.element(j);
        for (p, &pair) in pairs.iter().enumerate() {
            let coords = hermitian_coords(&sparse_pair_marginal(&el, pair, n));
            for (r, x) in coords.into_iter().enumerate() {
                matrix[(16 * p + r, j)] = x;
            }
        }
    }
    Ok(MarginalMap { n, pairs, basis, matrix })
}

/// Orthonormal basis (as columns of coordinates) of the kernel of `m`.
/// Orthonormal rows spanning the row space of `m`.
pub(crate) fn row_space(m: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let c = m.ncols();
    if c == 0 || m.nrows() == 0 {
        return DMatrix::zeros(0, c);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let rows: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| max > 0.0 && s > rank_tol * max)
        .map(|(i, _)| v_t.row(i).into_owned())
        .collect();
    if rows.is_empty() { DMatrix::zeros(0, c) } else { DMatrix::from_rows(&rows) }
}

pub(crate) fn kernel_coords(m: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let c = m.ncols();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(c, c);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut row_space = DMatrix::<f64>::zeros(c, c);
    if max > 0.0 {
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > rank_tol * max {
                let v = v_t.row(i).transpose();
                row_space += &v * v.transpose();
            }
        }
    }
    let complement = DMatrix::<f64>::identity(c, c) - row_space;
    let eig = complement.symmetric_eigen();
    let cols: Vec<_> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0.5)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(c, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Frobenius-orthonormal basis of traceless Hermitian matrices whose listed
/// pair marginals all vanish.
pub fn null_space(map: &MarginalMap, rank_tol: f64) -> Vec<CMatrix> {
    let k = kernel_coords(&map.matrix, rank_tol);
    (0..k.ncols())
        .map(|j| map.basis.assemble(k.column(j).as_slice()))
        .collect()
}
