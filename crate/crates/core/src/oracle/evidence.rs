//! First-order PSD feasibility sampling around a W-class projector.
//!
//! A direction `H` with vanishing listed marginals can only move
//! `rho = |W><W|` to another state `rho + tH` (for some `t != 0`) if the
//! compression of `+H` or `-H` onto the kernel of `rho` is PSD.
//!
//! Before sampling, rows and columns that every feasible direction must
//! leave empty are removed: if a marginal population sums diagonal entries
//! of `H` that all sit on basis states where `|W>` has no amplitude, each of
//! those entries must vanish, and so must its whole row and column. What
//! remains is split into the zero-compression face (tangents of pure-state
//! curves through `|W>`) and the rest; samples are drawn alternately from
//! the two when the face is nonzero. When nothing remains, samples are drawn
//! from the whole kernel instead; all of them must then fail.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::map::{build_restricted_map, hermitian_coords, kernel_coords, row_space, HermitianBasis, MAP_CAP, RANK_TOL};
use crate::bitindex::PartyPair;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::states::{make_w, WCoefficients};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessEvidence {
    pub n: usize,
    pub pairs: Vec<PartyPair>,
    pub seed: u64,
    /// Directions requested.
    pub requested_samples: usize,
    /// Directions actually tested (0 only when the full kernel is empty).
    pub samples: usize,
    /// Tested directions drawn from the full kernel, used when the reduced
    /// kernel is empty.
    pub full_kernel_samples: usize,
    /// Tested directions drawn from the zero-compression face.
    pub tangent_samples: usize,
    /// Directions whose compression (of `+H` or `-H`) is PSD within tolerance.
    pub feasible_directions: usize,
    /// Over all samples, the largest `max(lambda_min(PHP), -lambda_max(PHP))`.
    pub best_min_eigenvalue: Option<f64>,
    /// Kernel dimension of the full marginal map.
    pub null_space_dim: usize,
    /// Basis states whose rows and columns were forced to vanish.
    pub forced_zero: Vec<usize>,
    /// Kernel dimension after removing forced rows and columns.
    pub reduced_dim: usize,
    /// Dimension of the zero-compression face inside the reduced kernel.
    pub tangent_dim: usize,
}

impl UniquenessEvidence {
    pub fn is_unique_evidence(&self) -> bool {
        self.feasible_directions == 0
    }
}

/// Basis states that every feasible direction leaves empty, derived from
/// the population entries of the listed marginals.
pub fn forced_zero_states(psi: &[Complex64], pairs: &[PartyPair], n: usize, amp_tol: f64) -> Vec<usize> {
    let d = psi.len();
    let mut forced = vec![false; d];
    loop {
        let mut changed = false;
        for pair in pairs {
            let (sj, sk) = (n - pair.first(), n - pair.second());
            for pattern in 0..4usize {
                let members = (0..d).filter(|&i| (((i >> sj) & 1) << 1 | ((i >> sk) & 1)) == pattern);
                let group: Vec<usize> = members.filter(|&i| !forced[i]).collect();
                if !group.is_empty() && group.iter().all(|&i| psi[i].norm() <= amp_tol) {
                    for i in group {
                        forced[i] = true;
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..d).filter(|&i| forced[i]).collect()
}

fn compression_coords(h: &CMatrix, proj: &CMatrix) -> Vec<f64> {
    hermitian_coords(&(proj * h * proj))
}

fn gaussian_unit(basis: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = basis.ncols();
    let g = nalgebra::DVector::<f64>::from_fn(k, |_, _| StandardNormal.sample(rng));
    let g = g.normalize();
    (basis * g).iter().copied().collect()
}

/// Whether `+H` or `-H` compresses to a PSD matrix, and the better of the
/// two smallest eigenvalues.
fn feasibility(compressed: &CMatrix, tol: &Tolerances) -> (bool, f64) {
    let ev = linalg::hermitian_eigenvalues(compressed);
    let lo = ev.first().copied().unwrap_or(0.0);
    let hi = ev.last().copied().unwrap_or(0.0);
    (lo >= -tol.psd || hi <= tol.psd, lo.max(-hi))
}

/// Samples `samples` kernel directions around `|W(c)><W(c)|` and counts those
/// passing the first-order feasibility test.
pub fn uniqueness_evidence(
    c: &WCoefficients,
    pairs: &[PartyPair],
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<UniquenessEvidence> {
    let n = c.n();
    if n > MAP_CAP {
        return Err(Error::CapExceeded { what: "uniqueness evidence", n, cap: MAP_CAP });
    }
    let mut pairs: Vec<PartyPair> =
        pairs.iter().map(|p| PartyPair::new(p.first(), p.second(), n)).collect::<Result<_>>()?;
    pairs.sort();
    pairs.dedup();

    let full = HermitianBasis::full(1 << n);
    let full_map = build_restricted_map(n, &pairs, full.clone())?;
    let null_space_dim = full.len() - full_map.rank();

    let psi = make_w(c)?;
    let forced_zero = forced_zero_states(psi.amplitudes(), &pairs, n, tol.zero);
    let support: Vec<usize> = (0..1usize << n).filter(|i| forced_zero.binary_search(i).is_err()).collect();
    let basis = HermitianBasis::on_support(1 << n, support.clone());
    let map = build_restricted_map(n, &pairs, basis.clone())?;
    let reduced = kernel_coords(map.matrix(), RANK_TOL);
    let reduced_dim = reduced.ncols();

    let mut evidence = UniquenessEvidence {
        n,
        pairs: pairs.clone(),
        seed,
        requested_samples: samples,
        samples: 0,
        full_kernel_samples: 0,
        tangent_samples: 0,
        feasible_directions: 0,
        best_min_eigenvalue: None,
        null_space_dim,
        forced_zero,
        reduced_dim,
        tangent_dim: 0,
    };
    if null_space_dim == 0 {
        return Ok(evidence);
    }
    if reduced_dim == 0 {
        // every kernel direction touches a forced row; sample the whole
        // kernel by projecting Gaussians off the row space of the map
        let rows = row_space(full_map.matrix(), RANK_TOL);
        let d = 1usize << n;
        let proj = CMatrix::from_fn(d, d, |a, b| {
            let id = if a == b { 1.0 } else { 0.0 };
            Complex64::new(id, 0.0) - psi.amplitude(a) * psi.amplitude(b).conj()
        });
        let results: Vec<(bool, f64)> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let g = nalgebra::DVector::<f64>::from_fn(full.len(), |_, _| StandardNormal.sample(&mut rng));
                let k = (&g - rows.transpose() * (&rows * &g)).normalize();
                feasibility(&(&proj * full.assemble(k.as_slice()) * &proj), tol)
            })
            .collect();
        evidence.samples = results.len();
        evidence.full_kernel_samples = results.len();
        evidence.feasible_directions = results.iter().filter(|r| r.0).count();
        evidence.best_min_eigenvalue = results.iter().map(|r| r.1).reduce(f64::max);
        return Ok(evidence);
    }

    // projector onto the orthocomplement of |W> within the support block
    let w_block: Vec<Complex64> = support.iter().map(|&i| psi.amplitude(i)).collect();
    let s = support.len();
    let proj = CMatrix::from_fn(s, s, |a, b| {
        let id = if a == b { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) - w_block[a] * w_block[b].conj()
    });

    // zero-compression face: kernel of H -> PHP restricted to the reduced kernel
    let comp_rows = s * s;
    let mut comp = DMatrix::<f64>::zeros(comp_rows, reduced_dim);
    for j in 0..reduced_dim {
        let h = basis.assemble_block(reduced.column(j).as_slice());
        for (r, x) in compression_coords(&h, &proj).into_iter().enumerate() {
            comp[(r, j)] = x;
        }
    }
    let face = kernel_coords(&comp, RANK_TOL);
    let tangent = &reduced * &face;
    evidence.tangent_dim = tangent.ncols();

    let results: Vec<(bool, bool, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let from_face = tangent.ncols() > 0 && i % 2 == 1;
            let coords = if from_face { gaussian_unit(&tangent, &mut rng) } else { gaussian_unit(&reduced, &mut rng) };
            let h = basis.assemble_block(&coords);
            let (feasible, margin) = feasibility(&(&proj * h * &proj), tol);
            (from_face, feasible, margin)
        })
        .collect();

    evidence.samples = results.len();
    evidence.tangent_samples = results.iter().filter(|r| r.0).count();
    evidence.feasible_directions = results.iter().filter(|r| r.1).count();
    evidence.best_min_eigenvalue = results.iter().map(|r| r.2).reduce(f64::max);
    Ok(evidence)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_qubits_trivial() {
        let c = WCoefficients::uniform(2).unwrap();
        let e = uniqueness_evidence(&c, &PartyPair::all(2), 100, 0, &Tolerances::default()).unwrap();
        assert_eq!(e.null_space_dim, 0);
        assert_eq!(e.samples, 0);
        assert!(e.is_unique_evidence());
    }

    #[test]
    fn forced_states_for_all_pairs_are_multi_excitation() {
        let c = WCoefficients::uniform(4).unwrap();
        let psi = make_w(&c).unwrap();
        let z = forced_zero_states(psi.amplitudes(), &PartyPair::all(4), 4, 1e-12);
        let expected: Vec<usize> = (0..16usize).filter(|i| i.count_ones() >= 2).collect();
        assert_eq!(z, expected);
    }

    #[test]
    fn cap() {
        let c = WCoefficients::uniform(8).unwrap();
        assert!(uniqueness_evidence(&c, &PartyPair::all(8), 1, 0, &Tolerances::default()).is_err());
    }
}
