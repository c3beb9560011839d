//! Computational-basis bookkeeping.
//!
//! Party `J` (1-based) owns bit weight `2^(n-J)`, so party 1 is the most
//! significant bit of a basis index. Every other module inherits this
//! big-endian convention.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Largest ambient qubit count accepted by index arithmetic.
pub const MAX_QUBITS: usize = 62;

/// A 1-based party label, range-checked against the ambient qubit count.
/// Labels themselves work for any `n`; only index arithmetic is capped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartyLabel(usize);

impl PartyLabel {
    pub fn new(value: usize, n: usize) -> Result<Self> {
        if value == 0 || value > n {
            return Err(Error::PartyOutOfRange { label: value, n });
        }
        Ok(PartyLabel(value))
    }

    pub fn value(self) -> usize {
        self.0
    }

    /// Bit weight `2^(n-J)` of this party inside an `n`-qubit index.
    /// Panics if `n > MAX_QUBITS`.
    pub fn weight(self, n: usize) -> u64 {
        assert!(n <= MAX_QUBITS, "index arithmetic requires n <= {MAX_QUBITS}");
        1u64 << (n - self.0)
    }
}

impl fmt::Display for PartyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A computational-basis index `0 <= i < 2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(u64);

impl BasisIndex {
    pub fn new(value: u64, n: usize) -> Result<Self> {
        check_n(n)?;
        if value >= 1u64 << n {
            return Err(Error::IndexOutOfRange { index: value, n });
        }
        Ok(BasisIndex(value))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn as_usize(self) -> usize {
        self.0 as usize
    }
}

/// Unordered party pair, stored as `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartyPair(usize, usize);

impl PartyPair {
    pub fn new(a: usize, b: usize, n: usize) -> Result<Self> {
        if a == b {
            return Err(Error::MalformedPair(a, b));
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        PartyLabel::new(lo, n)?;
        PartyLabel::new(hi, n)?;
        Ok(PartyPair(lo, hi))
    }

    pub fn first(self) -> usize {
        self.0
    }

    pub fn second(self) -> usize {
        self.1
    }

    pub fn as_vec(self) -> Vec<usize> {
        vec![self.0, self.1]
    }

    /// All `C(n, 2)` pairs in lexicographic order.
    pub fn all(n: usize) -> Vec<PartyPair> {
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for j in 1..=n {
            for k in (j + 1)..=n {
                out.push(PartyPair(j, k));
            }
        }
        out
    }

    /// The star pairs `{1, K}` for `K = 2..=n`.
    pub fn star(n: usize) -> Vec<PartyPair> {
        (2..=n).map(|k| PartyPair(1, k)).collect()
    }
}

impl fmt::Display for PartyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::CapExceeded { what: "index arithmetic", n, cap: MAX_QUBITS });
    }
    Ok(())
}

/// Big-endian bit expansion of `i` over `n` bits.
pub fn to_bits(i: BasisIndex, n: usize) -> Result<Vec<u8>> {
    let i = BasisIndex::new(i.value(), n)?;
    Ok((0..n).map(|b| ((i.0 >> (n - 1 - b)) & 1) as u8).collect())
}

pub fn from_bits(bits: &[u8]) -> Result<BasisIndex> {
    check_n(bits.len())?;
    let mut v = 0u64;
    for &b in bits {
        if b > 1 {
            return Err(Error::InvalidBit(b));
        }
        v = (v << 1) | b as u64;
    }
    Ok(BasisIndex(v))
}

/// Index of the basis state whose only 1 sits at party `j`.
pub fn single_one_index(j: PartyLabel, n: usize) -> Result<BasisIndex> {
    check_n(n)?;
    let j = PartyLabel::new(j.value(), n)?;
    Ok(BasisIndex(j.weight(n)))
}

fn check_pattern(positions: &[PartyLabel], bits: &[u8], n: usize) -> Result<()> {
    check_n(n)?;
    if positions.len() != bits.len() {
        return Err(Error::BitCountMismatch { expected: positions.len(), got: bits.len() });
    }
    for p in positions {
        PartyLabel::new(p.value(), n)?;
    }
    if positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedParties(positions.iter().map(|p| p.value()).collect()));
    }
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::InvalidBit(b));
    }
    Ok(())
}

/// Smallest global index whose bits at `positions` equal `bits`:
/// `sum_j t_j 2^(n - i_j)`.
pub fn least_suffix(positions: &[PartyLabel], bits: &[u8], n: usize) -> Result<BasisIndex> {
    check_pattern(positions, bits, n)?;
    let v = positions
        .iter()
        .zip(bits)
        .filter(|(_, &t)| t == 1)
        .map(|(p, _)| p.weight(n))
        .sum();
    Ok(BasisIndex(v))
}

/// All `2^(n-m)` global indices whose bits at `positions` equal `bits`,
/// in ascending order.
pub fn enumerate_suffixes(
    positions: &[PartyLabel],
    bits: &[u8],
    n: usize,
) -> Result<Vec<BasisIndex>> {
    let base = least_suffix(positions, bits, n)?.0;
    let fixed: u64 = positions.iter().map(|p| p.weight(n)).sum();
    // free weights from most to least significant
    let free: Vec<u64> = (1..=n)
        .map(|j| 1u64 << (n - j))
        .filter(|w| fixed & w == 0)
        .collect();
    let count = 1u64 << free.len();
    let out = (0..count)
        .map(|c| {
            let mut v = base;
            for (slot, w) in free.iter().rev().enumerate() {
                if (c >> slot) & 1 == 1 {
                    v |= w;
                }
            }
            BasisIndex(v)
        })
        .collect();
    Ok(out)
}

/// Result of [`coverage_graph_connected`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coverage {
    pub connected: bool,
    /// Components over vertices `1..=n`, each sorted, ordered by smallest member.
    pub components: Vec<Vec<usize>>,
}

/// Connectivity of the graph on parties `1..=n` whose edges are `pairs`.
pub fn coverage_graph_connected(pairs: &[(usize, usize)], n: usize) -> Result<Coverage> {
    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in pairs {
        let p = PartyPair::new(a, b, n)?;
        let ra = find(&mut parent, p.0);
        let rb = find(&mut parent, p.1);
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, BTreeSet<usize>> = Default::default();
    for v in 1..=n {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().insert(v);
    }
    let mut components: Vec<Vec<usize>> =
        groups.into_values().map(|s| s.into_iter().collect()).collect();
    components.sort();
    Ok(Coverage { connected: components.len() <= 1, components })
}
