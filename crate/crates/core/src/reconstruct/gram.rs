//! Rank-one completion of a partially known Gram matrix.

use std::fmt;

use num_complex::Complex64;

use crate::linalg::ZERO;
use crate::states::WCoefficients;

/// Hermitian matrix with a fully known diagonal and a partial set of known
/// off-diagonal entries.
///
/// The known entry for parties `J < K` holds `c_K * conj(c_J)`, which is how
/// it appears as entry `(1, 2)` of the `(J, K)` marginal of a W-class state.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialGram {
    n: usize,
    diag: Vec<f64>,
    known: Vec<Option<Complex64>>,
}

impl PartialGram {
    pub fn new(diag: Vec<f64>) -> Self {
        let n = diag.len();
        PartialGram { n, diag, known: vec![None; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diagonal(&self, j: usize) -> f64 {
        self.diag[j - 1]
    }

    /// Records `c_K conj(c_J)` for parties `j < k` (1-based).
    pub fn set(&mut self, j: usize, k: usize, value: Complex64) {
        assert!(j < k && k <= self.n, "pair ({j}, {k}) out of order or range");
        self.known[(j - 1) * self.n + (k - 1)] = Some(value);
    }

    /// `c_v conj(c_u)` if the entry is known, for any `u != v`.
    pub fn get(&self, u: usize, v: usize) -> Option<Complex64> {
        if u < v {
            self.known[(u - 1) * self.n + (v - 1)]
        } else {
            self.known[(v - 1) * self.n + (u - 1)].map(|g| g.conj())
        }
    }

    /// Known entries as `(j, k, value)` with `j < k`.
    pub fn known_entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.known.iter().enumerate().filter_map(move |(idx, v)| {
            v.map(|g| (idx / self.n + 1, idx % self.n + 1, g))
        })
    }

    /// Dense `n x n` Hermitian matrix `G[u][v] = c_v conj(c_u)` (0-based),
    /// unknown entries set to zero.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (1..=self.n)
            .map(|u| {
                (1..=self.n)
                    .map(|v| {
                        if u == v {
                            Complex64::new(self.diag[u - 1], 0.0)
                        } else {
                            self.get(u, v).unwrap_or(ZERO)
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Why a partial Gram matrix admits no rank-one factor.
#[derive(Debug, Clone, PartialEq)]
pub enum GramDefect {
    NegativeDiagonal { party: usize, value: f64 },
    EmptySupport,
    ModulusMismatch { j: usize, k: usize, observed: f64, expected: f64 },
    CycleInconsistent { j: usize, k: usize, deviation: f64 },
    DisconnectedSupport { components: Vec<Vec<usize>> },
}

impl fmt::Display for GramDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GramDefect::NegativeDiagonal { party, value } => {
                write!(f, "diagonal entry of party {party} is negative ({value:e})")
            }
            GramDefect::EmptySupport => write!(f, "all diagonal entries vanish"),
            GramDefect::ModulusMismatch { j, k, observed, expected } => write!(
                f,
                "inconsistent modulus at ({j}, {k}): |G| = {observed:e}, |c_J||c_K| = {expected:e}"
            ),
            GramDefect::CycleInconsistent { j, k, deviation } => {
                write!(f, "phase cycle inconsistent at ({j}, {k}): deviation {deviation:e}")
            }
            GramDefect::DisconnectedSupport { components } => {
                write!(f, "phase indeterminate across components {components:?}")
            }
        }
    }
}

/// A rank-one factor `c` with `G = c c^dagger` on all known entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Factor {
    /// Per-party coefficients; norm equals `sqrt(trace G)`.
    pub coefficients: Vec<Complex64>,
    /// Party whose coefficient was fixed real positive.
    pub anchor: usize,
    /// Edges `(parent, child)` used to propagate phases.
    pub tree: Vec<(usize, usize)>,
    /// Largest `|G_uv - c_v conj(c_u)|` over all known entries.
    pub max_defect: f64,
}

impl Rank1Factor {
    /// Normalizes the factor into W coefficients.
    pub fn to_w(&self) -> crate::Result<WCoefficients> {
        WCoefficients::normalized(self.coefficients.clone())
    }
}

/// Factors `G` as `c c^dagger` up to a global phase.
///
/// Moduli come from the diagonal. Phases are propagated from the anchor (the
/// largest diagonal entry) along a maximum-weight spanning tree of the known
/// entries among parties with a positive diagonal; every other known entry
/// is then checked against the factor.
pub fn gram_rank1_factor(g: &PartialGram, tol: f64) -> Result<Rank1Factor, GramDefect> {
    let n = g.n;
    for j in 1..=n {
        if g.diagonal(j) < -tol {
            return Err(GramDefect::NegativeDiagonal { party: j, value: g.diagonal(j) });
        }
    }
    let modulus: Vec<f64> = g.diag.iter().map(|&d| d.max(0.0).sqrt()).collect();

    for (j, k, value) in g.known_entries() {
        let expected = modulus[j - 1] * modulus[k - 1];
        if (value.norm() - expected).abs() > tol {
            return Err(GramDefect::ModulusMismatch { j, k, observed: value.norm(), expected });
        }
    }

    let positive: Vec<usize> = (1..=n).filter(|&j| g.diagonal(j) > tol).collect();
    let anchor = *positive
        .iter()
        .max_by(|&&a, &&b| g.diagonal(a).total_cmp(&g.diagonal(b)).then(b.cmp(&a)))
        .ok_or(GramDefect::EmptySupport)?;

    let mut c = vec![ZERO; n];
    c[anchor - 1] = Complex64::new(modulus[anchor - 1], 0.0);

    // Prim's algorithm on |G_uv|, restricted to the positive support.
    let mut in_tree = vec![false; n + 1];
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n + 1];
    let mut tree = Vec::with_capacity(positive.len().saturating_sub(1));
    let mut current = anchor;
    in_tree[anchor] = true;
    for _ in 1..positive.len() {
        for &v in &positive {
            if in_tree[v] {
                continue;
            }
            if let Some(value) = g.get(current, v) {
                let w = value.norm();
                if best[v].is_none_or(|(bw, _)| w > bw) {
                    best[v] = Some((w, current));
                }
            }
        }
        let next = positive
            .iter()
            .filter(|&&v| !in_tree[v])
            .filter_map(|&v| best[v].map(|(w, p)| (w, v, p)))
            .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        let Some((_, v, parent)) = next else { break };
        let value = g.get(parent, v).expect("tree edge is a known entry");
        let direction = value * c[parent - 1];
        c[v - 1] = if direction.norm() > 0.0 {
            direction / direction.norm() * modulus[v - 1]
        } else {
            Complex64::new(modulus[v - 1], 0.0)
        };
        in_tree[v] = true;
        tree.push((parent, v));
        current = v;
    }

    if tree.len() + 1 < positive.len() {
        let mut components = vec![positive.iter().copied().filter(|&v| in_tree[v]).collect::<Vec<_>>()];
        let rest: Vec<usize> = positive.iter().copied().filter(|&v| !in_tree[v]).collect();
        components.extend(split_components(g, &rest));
        components.sort();
        return Err(GramDefect::DisconnectedSupport { components });
    }

    let mut max_defect = 0.0f64;
    for (j, k, value) in g.known_entries() {
        let deviation = (value - c[k - 1] * c[j - 1].conj()).norm();
        max_defect = max_defect.max(deviation);
        if deviation > tol {
            return Err(GramDefect::CycleInconsistent { j, k, deviation });
        }
    }

    Ok(Rank1Factor { coefficients: c, anchor, tree, max_defect })
}

fn split_components(g: &PartialGram, vertices: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n + 1];
    let mut out = Vec::new();
    for &start in vertices {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            for &v in vertices {
                if !seen[v] && g.get(u, v).is_some() {
                    seen[v] = true;
                    comp.push(v);
                }
            }
            i += 1;
        }
        comp.sort();
        out.push(comp);
    }
    out
}
