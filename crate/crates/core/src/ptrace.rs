//! Reduced density matrices.
//!
//! The pure-state path records each diagonal entry of the reduced matrix as
//! the ordered list of amplitudes that contribute to it. Off-diagonal entry
//! `(i, j)` is then the termwise product of list `i` with the conjugate of
//! list `j`. The dense index-pair partial trace in [`rdm_from_density`] is a
//! separate, conventional implementation.

use num_complex::Complex64;

use crate::bitindex::{self, BasisIndex, PartyLabel};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::states::{validate_subset, DensityMatrix, PureState, Rdm, MATRIX_CAP};

/// The contributing amplitudes of one reduced diagonal entry, sorted by
/// ascending global basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalExpression {
    pub rdm_index: usize,
    pub suffixes: Vec<BasisIndex>,
    pub terms: Vec<Complex64>,
}

impl DiagonalExpression {
    /// `sum_k |p_k|^2`.
    pub fn value(&self) -> f64 {
        self.terms.iter().map(|t| t.norm_sqr()).sum()
    }

    /// `sum_k p_k conj(q_k)`, pairing terms in suffix order.
    pub fn pair_with(&self, other: &DiagonalExpression) -> Complex64 {
        self.terms.iter().zip(&other.terms).map(|(p, q)| p * q.conj()).sum()
    }
}

fn labels(parties: &[usize], n: usize) -> Result<Vec<PartyLabel>> {
    validate_subset(parties, n)?;
    parties.iter().map(|&p| PartyLabel::new(p, n)).collect()
}

/// Big-endian bits of `i` over `m` places.
fn pattern(i: usize, m: usize) -> Vec<u8> {
    (0..m).map(|b| ((i >> (m - 1 - b)) & 1) as u8).collect()
}

pub fn diagonal_expressions(psi: &PureState, parties: &[usize]) -> Result<Vec<DiagonalExpression>> {
    let n = psi.n();
    let positions = labels(parties, n)?;
    let m = parties.len();
    (0..1usize << m)
        .map(|i| {
            let suffixes = bitindex::enumerate_suffixes(&positions, &pattern(i, m), n)?;
            let terms = suffixes.iter().map(|s| psi.amplitude(s.as_usize())).collect();
            Ok(DiagonalExpression { rdm_index: i, suffixes, terms })
        })
        .collect()
}

/// Reduced state of `psi` on `parties`, built from its diagonal expressions.
pub fn rdm_from_pure(psi: &PureState, parties: &[usize]) -> Result<Rdm> {
    let exprs = diagonal_expressions(psi, parties)?;
    let d = exprs.len();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(exprs[i].value(), 0.0);
        for j in (i + 1)..d {
            let r = exprs[i].pair_with(&exprs[j]);
            m[(i, j)] = r;
            m[(j, i)] = r.conj();
        }
    }
    Rdm::unchecked(parties.to_vec(), psi.n(), m)
}

/// Conventional partial trace of a dense density matrix.
pub fn rdm_from_density(rho: &DensityMatrix, parties: &[usize]) -> Result<Rdm> {
    let n = rho.n();
    if n > MATRIX_CAP {
        return Err(Error::CapExceeded { what: "dense density matrix", n, cap: MATRIX_CAP });
    }
    validate_subset(parties, n)?;
    let m = parties.len();
    let shifts: Vec<usize> = parties.iter().map(|&p| n - p).collect();
    let kept_mask: usize = shifts.iter().map(|s| 1usize << s).sum();
    let extract = |i: usize| shifts.iter().fold(0usize, |acc, &s| (acc << 1) | ((i >> s) & 1));
    let deposit = |b: usize| {
        shifts
            .iter()
            .enumerate()
            .fold(0usize, |acc, (pos, &s)| acc | (((b >> (m - 1 - pos)) & 1) << s))
    };
    let dm = 1usize << m;
    let full = rho.entries();
    let mut out = CMatrix::from_element(dm, dm, ZERO);
    for i in 0..(1usize << n) {
        let a = extract(i);
        let rest = i & !kept_mask;
        for b in 0..dm {
            out[(a, b)] += full[(i, rest | deposit(b))];
        }
    }
    Rdm::unchecked(parties.to_vec(), n, out)
}

/// Largest entrywise `|a_ij - b_ij|` between two marginals on the same subset.
pub fn marginal_residual(a: &Rdm, b: &Rdm) -> Result<f64> {
    if a.parties() != b.parties() || a.ambient_n() != b.ambient_n() {
        return Err(Error::SubsetMismatch { left: a.parties().to_vec(), right: b.parties().to_vec() });
    }
    Ok(linalg::max_abs_diff(a.entries(), b.entries()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_w, w_bipartite_marginal, WCoefficients};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn fixture_001_111() -> PureState {
        let mut a = vec![ZERO; 8];
        a[1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        a[7] = Complex64::new(0.0, FRAC_1_SQRT_2);
        PureState::new(3, a).unwrap()
    }

    #[test]
    fn fixture_001_111_expressions() {
        let e = diagonal_expressions(&fixture_001_111(), &[1, 2]).unwrap();
        assert_eq!(e.len(), 4);
        assert_eq!(e[0].suffixes.iter().map(|s| s.value()).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(e[0].terms, vec![ZERO, Complex64::new(FRAC_1_SQRT_2, 0.0)]);
        assert_eq!(e[3].suffixes.iter().map(|s| s.value()).collect::<Vec<_>>(), vec![6, 7]);
        assert_eq!(e[3].terms, vec![ZERO, Complex64::new(0.0, FRAC_1_SQRT_2)]);
    }

    #[test]
    fn fixture_001_111_rdm() {
        let r = rdm_from_pure(&fixture_001_111(), &[1, 2]).unwrap();
        let half = 0.5;
        assert!((r.entry(0, 0).re - half).abs() < 1e-15);
        assert!((r.entry(3, 3).re - half).abs() < 1e-15);
        assert!((r.entry(0, 3) - Complex64::new(0.0, -half)).norm() < 1e-15);
        assert_eq!(r.entry(2, 3), ZERO);
    }

    #[test]
    fn full_subset_has_single_terms() {
        let psi = fixture_001_111();
        let e = diagonal_expressions(&psi, &[1, 2, 3]).unwrap();
        assert!(e.iter().all(|x| x.terms.len() == 1));
        let r = rdm_from_pure(&psi, &[1, 2, 3]).unwrap();
        let proj = psi.projector().unwrap();
        assert!(linalg::max_abs_diff(r.entries(), proj.entries()) == 0.0);
    }

    #[test]
    fn maximally_mixed_single_party() {
        let r = rdm_from_density(&DensityMatrix::maximally_mixed(2).unwrap(), &[1]).unwrap();
        assert!((r.entry(0, 0).re - 0.5).abs() < 1e-15);
        assert!((r.entry(1, 1).re - 0.5).abs() < 1e-15);
        assert_eq!(r.entry(0, 1), ZERO);
    }

    #[test]
    fn w_marginal_matches_both_paths() {
        let c = WCoefficients::normalized(vec![
            Complex64::new(0.3, 0.2),
            Complex64::new(-0.5, 0.1),
            Complex64::new(0.0, 0.6),
            Complex64::new(0.2, -0.2),
        ])
        .unwrap();
        let psi = make_w(&c).unwrap();
        let rho = psi.projector().unwrap();
        for j in 1..=4 {
            for k in (j + 1)..=4 {
                let analytic = w_bipartite_marginal(&c, j, k).unwrap();
                let a = rdm_from_pure(&psi, &[j, k]).unwrap();
                let b = rdm_from_density(&rho, &[j, k]).unwrap();
                assert!(marginal_residual(&analytic, &a).unwrap() < 1e-15);
                assert!(marginal_residual(&analytic, &b).unwrap() < 1e-15);
            }
        }
    }

    #[test]
    fn residual_examples() {
        let c = WCoefficients::uniform(3).unwrap();
        let a = w_bipartite_marginal(&c, 1, 2).unwrap();
        assert_eq!(marginal_residual(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b.entries_mut()[(0, 0)] += Complex64::new(1e-3, 0.0);
        assert!((marginal_residual(&a, &b).unwrap() - 1e-3).abs() < 1e-15);
        let other = w_bipartite_marginal(&c, 1, 3).unwrap();
        assert!(matches!(marginal_residual(&a, &other), Err(Error::SubsetMismatch { .. })));
    }

    #[test]
    fn invalid_subsets() {
        let psi = fixture_001_111();
        assert!(rdm_from_pure(&psi, &[]).is_err());
        assert!(rdm_from_pure(&psi, &[2, 1]).is_err());
        assert!(rdm_from_pure(&psi, &[1, 4]).is_err());
        assert!(rdm_from_density(&psi.projector().unwrap(), &[0]).is_err());
    }
}
