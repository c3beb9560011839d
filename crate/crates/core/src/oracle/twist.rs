use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{make_w, PureState, WCoefficients};

/// Checks that `blocks` partition `1..=n` and returns each party's block.
pub fn block_of(blocks: &[Vec<usize>], n: usize) -> Result<Vec<usize>> {
    let mut owner = vec![usize::MAX; n + 1];
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::InvalidPartition(format!("block {} is empty", b + 1)));
        }
        for &p in block {
            if p == 0 || p > n {
                return Err(Error::InvalidPartition(format!("party {p} outside 1..={n}")));
            }
            if owner[p] != usize::MAX {
                return Err(Error::InvalidPartition(format!("party {p} appears twice")));
            }
            owner[p] = b;
        }
    }
    if let Some(p) = (1..=n).find(|&p| owner[p] == usize::MAX) {
        return Err(Error::InvalidPartition(format!("party {p} is in no block")));
    }
    Ok(owner)
}

/// Multiplies `c_J` by `e^(i theta_B)` for every party `J` in block `B`.
pub fn twist_coefficients(c: &WCoefficients, blocks: &[Vec<usize>], phases: &[f64]) -> Result<WCoefficients> {
    let n = c.n();
    if blocks.len() != phases.len() {
        return Err(Error::InvalidPartition(format!(
            "{} blocks but {} phases",
            blocks.len(),
            phases.len()
        )));
    }
    let owner = block_of(blocks, n)?;
    let twisted =
        (1..=n).map(|j| c.get(j) * Complex64::from_polar(1.0, phases[owner[j]])).collect();
    WCoefficients::new(twisted)
}

/// The phase-twisted W-class state as a dense vector. Marginals of pairs
/// inside one block are unchanged; cross-block coherences rotate by the
/// phase difference.
pub fn phase_twist(c: &WCoefficients, blocks: &[Vec<usize>], phases: &[f64]) -> Result<PureState> {
    make_w(&twist_coefficients(c, blocks, phases)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptrace::{marginal_residual, rdm_from_pure};

    #[test]
    fn partition_errors() {
        let c = WCoefficients::uniform(4).unwrap();
        assert!(phase_twist(&c, &[vec![1, 2], vec![3]], &[0.0, 1.0]).is_err());
        assert!(phase_twist(&c, &[vec![1, 2], vec![2, 3, 4]], &[0.0, 1.0]).is_err());
        assert!(phase_twist(&c, &[vec![1, 2], vec![3, 5]], &[0.0, 1.0]).is_err());
        assert!(phase_twist(&c, &[vec![1, 2, 3, 4]], &[0.0, 1.0]).is_err());
        assert!(phase_twist(&c, &[vec![1, 2, 3, 4], vec![]], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn single_block_is_global_phase() {
        let c = WCoefficients::normalized(vec![
            Complex64::new(0.2, 0.5),
            Complex64::new(-0.3, 0.1),
            Complex64::new(0.6, 0.0),
        ])
        .unwrap();
        let t = phase_twist(&c, &[vec![1, 2, 3]], &[2.1]).unwrap();
        let w = make_w(&c).unwrap();
        assert!((t.fidelity(&w) - 1.0).abs() < 1e-12);
        for (j, k) in [(1, 2), (1, 3), (2, 3)] {
            let r = marginal_residual(&rdm_from_pure(&t, &[j, k]).unwrap(), &rdm_from_pure(&w, &[j, k]).unwrap());
            assert!(r.unwrap() < 1e-15);
        }
    }
}
