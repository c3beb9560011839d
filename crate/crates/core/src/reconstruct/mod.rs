//! Reconstruction of W-class states from two-party marginals.
//!
//! [`reconstruct_mixed`] needs all `C(n, 2)` pair marginals and certifies the
//! state among arbitrary (mixed) states. [`reconstruct_pure`] needs only the
//! star marginals `{1, K}` and relies on the caller's assertion that the
//! global state is pure. Both finish by re-deriving every supplied marginal
//! from the recovered coefficients.

mod gram;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

pub use gram::{gram_rank1_factor, GramDefect, PartialGram, Rank1Factor};

use crate::bitindex::PartyPair;
use crate::error::{Error, Result};
use crate::linalg;
use crate::ptrace::marginal_residual;
use crate::states::{w_bipartite_marginal, Rdm, WCoefficients};
use crate::tolerance::Tolerances;

/// Gram matrices are copied into diagnostics only up to this many parties.
pub const GRAM_REPORT_CAP: usize = 32;

/// A collection of 4x4 pair marginals keyed by canonical pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSet {
    n: usize,
    entries: BTreeMap<PartyPair, Rdm>,
    tol: Tolerances,
}

impl MarginalSet {
    pub fn new(n: usize, tol: Tolerances) -> Self {
        MarginalSet { n, entries: BTreeMap::new(), tol }
    }

    pub fn from_rdms(n: usize, rdms: impl IntoIterator<Item = Rdm>, tol: Tolerances) -> Result<Self> {
        let mut set = Self::new(n, tol);
        for r in rdms {
            set.insert(r)?;
        }
        Ok(set)
    }

    /// Closed-form marginals of the W-class state `c` on `pairs`.
    pub fn from_w(c: &WCoefficients, pairs: &[PartyPair], tol: Tolerances) -> Result<Self> {
        let mut set = Self::new(c.n(), tol);
        for p in pairs {
            set.insert(w_bipartite_marginal(c, p.first(), p.second())?)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, rdm: Rdm) -> Result<()> {
        if rdm.ambient_n() != self.n {
            return Err(Error::Invalid(format!(
                "marginal belongs to {} parties, set has {}",
                rdm.ambient_n(),
                self.n
            )));
        }
        if rdm.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: rdm.dim() });
        }
        let pair = rdm.pair().ok_or_else(|| Error::Invalid("not a two-party marginal".into()))?;
        if self.entries.contains_key(&pair) {
            return Err(Error::DuplicatePair(pair.first(), pair.second()));
        }
        self.entries.insert(pair, rdm);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn set_tolerances(&mut self, tol: Tolerances) {
        self.tol = tol;
    }

    pub fn get(&self, pair: &PartyPair) -> Option<&Rdm> {
        self.entries.get(pair)
    }

    pub fn get_mut(&mut self, pair: &PartyPair) -> Option<&mut Rdm> {
        self.entries.get_mut(pair)
    }

    pub fn pairs(&self) -> impl Iterator<Item = PartyPair> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PartyPair, &Rdm)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Steps of the two reconstruction procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Input marginals must be Hermitian with unit trace.
    Validity,
    /// The `|11><11|` population of every marginal vanishes.
    Corner,
    /// The supplied pairs suffice for the procedure.
    Coverage,
    /// Squared moduli agree across marginals and sum to one.
    Moduli,
    /// Partial Gram matrix assembly.
    Gram,
    /// Rank-one factorization of the Gram matrix.
    Factor,
    /// Star procedure: hub modulus agrees across marginals.
    HubModulus,
    /// Star procedure: relative phases `c_K / c_1`.
    PhaseChain,
    /// Star procedure: `|01>` populations carry no extra terms.
    CrossTerms,
    /// Star procedure: vacuum amplitude vanishes.
    Normalization,
    /// Re-derived marginals match the input.
    Verification,
}

impl Step {
    pub fn number(self) -> u8 {
        match self {
            Step::Validity => 0,
            Step::Corner => 1,
            Step::Coverage | Step::HubModulus => 2,
            Step::Moduli | Step::PhaseChain => 3,
            Step::Gram | Step::CrossTerms => 4,
            Step::Factor | Step::Normalization => 5,
            Step::Verification => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Step::Validity => "validity",
            Step::Corner => "corner",
            Step::Coverage => "coverage",
            Step::Moduli => "moduli",
            Step::Gram => "gram",
            Step::Factor => "factor",
            Step::HubModulus => "hub-modulus",
            Step::PhaseChain => "phase-chain",
            Step::CrossTerms => "cross-terms",
            Step::Normalization => "normalization",
            Step::Verification => "verification",
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} ({})", self.number(), self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    UniqueW(WCoefficients),
    Inconsistent { step: Step, pair: Option<PartyPair>, message: String },
    Insufficient { step: Step, missing: Vec<PartyPair>, message: String },
}

impl Verdict {
    pub fn is_unique(&self) -> bool {
        matches!(self, Verdict::UniqueW(_))
    }

    pub fn coefficients(&self) -> Option<&WCoefficients> {
        match self {
            Verdict::UniqueW(c) => Some(c),
            _ => None,
        }
    }

    pub fn step(&self) -> Option<Step> {
        match self {
            Verdict::UniqueW(_) => None,
            Verdict::Inconsistent { step, .. } | Verdict::Insufficient { step, .. } => Some(*step),
        }
    }
}

/// Quantities extracted along the way.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Largest `|11><11|` population seen.
    pub max_corner: f64,
    /// Mean extracted `|c_J|^2`, per party.
    pub moduli_sq: Vec<f64>,
    /// Spread (max - min) of the `|c_J|^2` readings, per party.
    pub moduli_spread: Vec<f64>,
    /// `sum_J |c_J|^2` before renormalization.
    pub norm_sum: Option<f64>,
    /// Dense Gram matrix `G[u][v] = c_v conj(c_u)`, for small `n` only.
    pub gram: Option<Vec<Vec<Complex64>>>,
    /// Largest deviation of a known Gram entry from the rank-one factor.
    pub rank1_defect: Option<f64>,
    /// Phase-propagation edges of the spanning tree.
    pub tree: Vec<(usize, usize)>,
    /// Star procedure: `c_K / c_1` for `K = 2..=n`.
    pub phase_chain: Vec<(usize, Complex64)>,
    /// Star procedure: largest `| (01-population) - |c_K|^2 |`.
    pub cross_term_excess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub verdict: Verdict,
    pub phase_convention: String,
    pub residuals: BTreeMap<PartyPair, f64>,
    pub diagnostics: Diagnostics,
    pub assumptions: Vec<String>,
}

impl ReconstructionReport {
    fn new(verdict: Verdict, diagnostics: Diagnostics) -> Self {
        ReconstructionReport {
            verdict,
            phase_convention: String::new(),
            residuals: BTreeMap::new(),
            diagnostics,
            assumptions: Vec::new(),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

const GAUGE_DESCRIPTION: &str =
    "global phase removed: largest-modulus coefficient real positive, ties to the lowest party";

/// Multiplies by a unit scalar so the largest-modulus coefficient is real
/// positive. Ties (within 1e-12) go to the lowest party index.
pub fn fix_gauge(c: &WCoefficients) -> WCoefficients {
    let s = c.as_slice();
    let max = s.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let pivot = s.iter().position(|a| a.norm() >= max - 1e-12).unwrap_or(0);
    let p = s[pivot];
    let rot = if p.norm() > 0.0 { p.conj() / p.norm() } else { Complex64::new(1.0, 0.0) };
    let mut out: Vec<Complex64> = s.iter().map(|a| a * rot).collect();
    out[pivot] = Complex64::new(out[pivot].norm(), 0.0);
    WCoefficients::from_raw(out)
}

/// Deviations of a 4x4 marginal from the W-class template.
#[derive(Debug, Clone, PartialEq)]
pub struct WFormCheck {
    pub pass: bool,
    /// `(label, deviation)` for every template condition that failed.
    pub deviations: Vec<(String, f64)>,
}

/// Checks a pair marginal against the W template: vanishing `|11>` row and
/// column, vanishing `|00>` coherences, consistent populations and
/// `|m12|^2 <= m11 m22`.
pub fn check_w_form(m: &Rdm, tol: &Tolerances) -> Result<WFormCheck> {
    if m.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: m.dim() });
    }
    let mut deviations = Vec::new();
    let mut require = |label: String, dev: f64, limit: f64| {
        if !(dev <= limit) {
            deviations.push((label, dev));
        }
    };
    require("entry(3,3)".into(), m.entry(3, 3).norm(), tol.zero);
    for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)] {
        let dev = m.entry(i, j).norm().max(m.entry(j, i).norm());
        require(format!("entry({i},{j})"), dev, tol.zero);
    }
    let populations = m.entry(0, 0).re - (1.0 - m.entry(1, 1).re - m.entry(2, 2).re);
    require("entry(0,0)".into(), populations.abs(), tol.consistency);
    let cs = m.entry(1, 2).norm_sqr() - m.entry(1, 1).re * m.entry(2, 2).re;
    require("cauchy-schwarz(1,2)".into(), cs.max(0.0), tol.consistency);
    Ok(WFormCheck { pass: deviations.is_empty(), deviations })
}

fn inconsistent(step: Step, pair: Option<PartyPair>, message: impl Into<String>) -> Verdict {
    Verdict::Inconsistent { step, pair, message: message.into() }
}

/// Hermiticity and trace, at the consistency tolerance.
fn check_validity(ms: &MarginalSet) -> Option<Verdict> {
    let tol = ms.tolerances().consistency;
    for (pair, rdm) in ms.iter() {
        let dev = linalg::hermitian_deviation(rdm.entries());
        if !(dev <= tol) {
            return Some(inconsistent(
                Step::Validity,
                Some(*pair),
                format!("marginal {pair} is not Hermitian (deviation {dev:e})"),
            ));
        }
        let tr = linalg::trace(rdm.entries());
        if !((tr - Complex64::new(1.0, 0.0)).norm() <= tol) {
            return Some(inconsistent(
                Step::Validity,
                Some(*pair),
                format!("marginal {pair} has trace {:.17}", tr.re),
            ));
        }
    }
    None
}

/// The `|11><11|` population must vanish in every listed marginal.
fn check_corners<'a>(
    ms: &'a MarginalSet,
    pairs: impl Iterator<Item = &'a PartyPair>,
    diag: &mut Diagnostics,
) -> Option<Verdict> {
    let tol = ms.tolerances().zero;
    for pair in pairs {
        let corner = ms.get(pair).expect("listed pair present").entry(3, 3).norm();
        diag.max_corner = diag.max_corner.max(corner);
        if corner > tol {
            return Some(inconsistent(
                Step::Corner,
                Some(*pair),
                format!(
                    "marginal {pair} has |11> population {corner:e}; some global state with two \
                     or more excitations is populated"
                ),
            ));
        }
    }
    None
}

fn verify(ms: &MarginalSet, c: &WCoefficients, report: &mut ReconstructionReport) -> Result<()> {
    let tol = ms.tolerances().consistency;
    let mut worst: Option<(PartyPair, f64)> = None;
    for (pair, rdm) in ms.iter() {
        let derived = w_bipartite_marginal(c, pair.first(), pair.second())?;
        let r = marginal_residual(&derived, rdm)?;
        report.residuals.insert(*pair, r);
        if r > tol && worst.is_none_or(|(_, w)| r > w) {
            worst = Some((*pair, r));
        }
    }
    if let Some((pair, r)) = worst {
        report.verdict = inconsistent(
            Step::Verification,
            Some(pair),
            format!("re-derived marginal {pair} differs from the input by {r:e}"),
        );
    }
    Ok(())
}

/// Reconstructs the unique global state from all `C(n, 2)` pair marginals.
///
/// Steps: (1) every `|11><11|` population vanishes, so every global diagonal
/// entry with two or more excitations vanishes; (2) all pairs are present;
/// (3) the single-excitation populations `|c_J|^2` agree across marginals
/// and sum to one, which empties `|0..0>`; (4) the `|01><10|` coherences form
/// the Gram matrix of `c`; (5) it is factored as rank one; (6) every input
/// marginal is re-derived from the result.
pub fn reconstruct_mixed(ms: &MarginalSet) -> ReconstructionReport {
    let n = ms.n();
    let tol = *ms.tolerances();
    let mut diag = Diagnostics::default();

    if n < 2 || ms.is_empty() {
        return ReconstructionReport::new(
            Verdict::Insufficient {
                step: Step::Coverage,
                missing: PartyPair::all(n),
                message: "no marginals supplied".into(),
            },
            diag,
        );
    }
    if let Some(v) = check_validity(ms) {
        return ReconstructionReport::new(v, diag);
    }
    let supplied: Vec<PartyPair> = ms.pairs().collect();
    if let Some(v) = check_corners(ms, supplied.iter(), &mut diag) {
        return ReconstructionReport::new(v, diag);
    }

    let missing: Vec<PartyPair> =
        PartyPair::all(n).into_iter().filter(|p| ms.get(p).is_none()).collect();
    if !missing.is_empty() {
        return ReconstructionReport::new(
            Verdict::Insufficient {
                step: Step::Coverage,
                message: format!(
                    "diagonal support not certified: {} of {} pairs missing",
                    missing.len(),
                    n * (n - 1) / 2
                ),
                missing,
            },
            diag,
        );
    }

    // (3) |c_K|^2 from the |01> population, |c_J|^2 from |10>
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    let mut read = |party: usize, value: f64| {
        let i = party - 1;
        lo[i] = lo[i].min(value);
        hi[i] = hi[i].max(value);
        sum[i] += value;
        count[i] += 1;
    };
    for (pair, rdm) in ms.iter() {
        read(pair.second(), rdm.entry(1, 1).re);
        read(pair.first(), rdm.entry(2, 2).re);
    }
    diag.moduli_sq = sum.iter().zip(&count).map(|(s, &k)| s / k as f64).collect();
    diag.moduli_spread = hi.iter().zip(&lo).map(|(h, l)| h - l).collect();
    for j in 1..=n {
        let spread = diag.moduli_spread[j - 1];
        if spread > tol.consistency {
            return ReconstructionReport::new(
                inconsistent(
                    Step::Moduli,
                    None,
                    format!("|c_{j}|^2 readings disagree across marginals (spread {spread:e})"),
                ),
                diag,
            );
        }
        if lo[j - 1] < -tol.zero {
            return ReconstructionReport::new(
                inconsistent(Step::Moduli, None, format!("negative population for party {j}")),
                diag,
            );
        }
    }
    let norm_sum: f64 = diag.moduli_sq.iter().sum();
    diag.norm_sum = Some(norm_sum);
    if (norm_sum - 1.0).abs() > tol.consistency {
        return ReconstructionReport::new(
            inconsistent(
                Step::Moduli,
                None,
                format!("single-excitation populations sum to {norm_sum:.17}, leaving |0..0> populated"),
            ),
            diag,
        );
    }

    // (4) Gram matrix
    let mut gram = PartialGram::new(diag.moduli_sq.iter().map(|&d| d.max(0.0)).collect());
    for (pair, rdm) in ms.iter() {
        gram.set(pair.first(), pair.second(), rdm.entry(1, 2));
    }
    if n <= GRAM_REPORT_CAP {
        diag.gram = Some(gram.to_dense());
    }

    // (5) rank-one factor
    let factor = match gram_rank1_factor(&gram, tol.consistency) {
        Ok(f) => f,
        Err(defect) => {
            return ReconstructionReport::new(
                inconsistent(Step::Factor, None, defect.to_string()),
                diag,
            )
        }
    };
    diag.rank1_defect = Some(factor.max_defect);
    diag.tree = factor.tree.clone();
    let c = match factor.to_w() {
        Ok(c) => fix_gauge(&c),
        Err(e) => {
            return ReconstructionReport::new(inconsistent(Step::Factor, None, e.to_string()), diag)
        }
    };

    // (6) verification
    let mut report = ReconstructionReport::new(Verdict::UniqueW(c.clone()), diag);
    report.phase_convention = GAUGE_DESCRIPTION.into();
    report.assumptions.push("none: certified among all density matrices".into());
    if let Err(e) = verify(ms, &c, &mut report) {
        report.verdict = inconsistent(Step::Verification, None, e.to_string());
    }
    report
}

/// Reconstructs a pure global state from the star marginals `{1, K}`.
///
/// The caller asserts that the global state is pure; this cannot be
/// certified from the star marginals and is stamped into the report. Extra
/// non-star marginals are not used to solve for the state but are included
/// in verification.
pub fn reconstruct_pure(ms: &MarginalSet) -> ReconstructionReport {
    let n = ms.n();
    let tol = *ms.tolerances();
    let mut diag = Diagnostics::default();
    let assumptions = vec!["global state asserted pure by the caller".to_string()];
    let finish = |verdict: Verdict, diag: Diagnostics| {
        let mut r = ReconstructionReport::new(verdict, diag);
        r.assumptions = assumptions.clone();
        r
    };

    let star = PartyPair::star(n);
    let missing: Vec<PartyPair> = star.iter().copied().filter(|p| ms.get(p).is_none()).collect();
    if n < 2 || !missing.is_empty() {
        return finish(
            Verdict::Insufficient {
                step: Step::Coverage,
                message: format!("{} star marginals rho^(1K) missing", missing.len()),
                missing,
            },
            diag,
        );
    }
    if let Some(v) = check_validity(ms) {
        return finish(v, diag);
    }

    // step 1: |11> population of each rho^(1K) kills every a_i with i > 2^(n-1)
    if let Some(v) = check_corners(ms, star.iter(), &mut diag) {
        return finish(v, diag);
    }

    // step 2: the |10> population is |a_(2^(n-1))|^2 in every rho^(1K)
    let hub: Vec<f64> = star.iter().map(|p| ms.get(p).unwrap().entry(2, 2).re).collect();
    let hub_lo = hub.iter().copied().fold(f64::INFINITY, f64::min);
    let hub_hi = hub.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hub_sq = hub.iter().sum::<f64>() / hub.len() as f64;
    let mut spread = vec![0.0; n];
    spread[0] = hub_hi - hub_lo;
    diag.moduli_spread = spread;
    if hub_hi - hub_lo > tol.consistency {
        return finish(
            inconsistent(
                Step::HubModulus,
                None,
                format!("|c_1|^2 readings disagree across star marginals (spread {:e})", hub_hi - hub_lo),
            ),
            diag,
        );
    }
    if hub_sq <= tol.zero {
        return finish(
            Verdict::Insufficient {
                step: Step::HubModulus,
                missing: Vec::new(),
                message: "hub coefficient vanishes; the phase chain c_K = e^(i phi) w_K cannot be solved".into(),
            },
            diag,
        );
    }

    // step 3: the |01><10| coherence is a_(2^(n-K)) conj(a_(2^(n-1)))
    let hub_mod = hub_sq.sqrt();
    let mut c = vec![Complex64::new(hub_mod, 0.0); n];
    for (k, pair) in (2..=n).zip(&star) {
        c[k - 1] = ms.get(pair).unwrap().entry(1, 2) / hub_mod;
        diag.phase_chain.push((k, c[k - 1] / c[0]));
    }

    // step 4: |01> population must consist of |a_(2^(n-K))|^2 alone
    let mut excess = 0.0f64;
    let mut excess_pair = star[0];
    for (k, pair) in (2..=n).zip(&star) {
        let d = ms.get(pair).unwrap().entry(1, 1).re - c[k - 1].norm_sqr();
        if d.abs() > excess {
            excess = d.abs();
            excess_pair = *pair;
        }
    }
    diag.cross_term_excess = Some(excess);
    diag.moduli_sq = c.iter().map(|a| a.norm_sqr()).collect();
    if excess > tol.consistency {
        return finish(
            inconsistent(
                Step::CrossTerms,
                Some(excess_pair),
                format!("|01> population of {excess_pair} differs from |c_K|^2 by {excess:e}"),
            ),
            diag,
        );
    }

    // step 5: normalization forces a_0 = 0
    let norm_sum: f64 = diag.moduli_sq.iter().sum();
    diag.norm_sum = Some(norm_sum);
    if (norm_sum - 1.0).abs() > tol.consistency {
        return finish(
            inconsistent(
                Step::Normalization,
                None,
                format!("recovered single-excitation weight {norm_sum:.17} differs from 1"),
            ),
            diag,
        );
    }
    let c = match WCoefficients::normalized(c) {
        Ok(c) => fix_gauge(&c),
        Err(e) => return finish(inconsistent(Step::Normalization, None, e.to_string()), diag),
    };

    let mut report = finish(Verdict::UniqueW(c.clone()), diag);
    report.phase_convention = format!(
        "phase chain solved with c_1 real positive (c_K = e^(i phi) w_K, phi quotiented out); {GAUGE_DESCRIPTION}"
    );
    if ms.len() > star.len() {
        report.assumptions.push("non-star marginals used for verification only".into());
    }
    if let Err(e) = verify(ms, &c, &mut report) {
        report.verdict = inconsistent(Step::Verification, None, e.to_string());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptrace::rdm_from_pure;
    use crate::linalg::CMatrix;
    use crate::states::{ghz, PureState};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn marginals_of(psi: &PureState, pairs: &[PartyPair]) -> MarginalSet {
        let rdms = pairs.iter().map(|p| rdm_from_pure(psi, &p.as_vec()).unwrap());
        MarginalSet::from_rdms(psi.n(), rdms, Tolerances::default()).unwrap()
    }

    #[test]
    fn fix_gauge_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = fix_gauge(&WCoefficients::new(vec![c(0.0, h), c(h, 0.0), c(0.0, 0.0)]).unwrap());
        assert!((g.get(1) - c(h, 0.0)).norm() < 1e-15);
        assert!((g.get(2) - c(0.0, -h)).norm() < 1e-15);
        assert_eq!(g.get(3), c(0.0, 0.0));
        assert_eq!(fix_gauge(&g), g);
        let base = WCoefficients::normalized(vec![c(0.3, 0.4), c(-0.5, 0.1), c(0.2, -0.6)]).unwrap();
        for k in 0..16 {
            let rot = Complex64::from_polar(1.0, 0.4 * k as f64);
            let turned = WCoefficients::from_raw(base.as_slice().iter().map(|a| a * rot).collect());
            let a = fix_gauge(&turned);
            let b = fix_gauge(&base);
            for j in 1..=3 {
                assert!((a.get(j) - b.get(j)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn w_form_checks() {
        let tol = Tolerances::default();
        let w = WCoefficients::normalized(vec![c(0.3, 0.4), c(-0.5, 0.1), c(0.2, -0.6)]).unwrap();
        for (j, k) in [(1, 2), (1, 3), (2, 3)] {
            assert!(check_w_form(&w_bipartite_marginal(&w, j, k).unwrap(), &tol).unwrap().pass);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = ghz(c(h, 0.0), c(h, 0.0), 3).unwrap();
        let check = check_w_form(&rdm_from_pure(&g, &[1, 2]).unwrap(), &tol).unwrap();
        assert!(!check.pass);
        let corner = check.deviations.iter().find(|(l, _)| l == "entry(3,3)").unwrap();
        assert!((corner.1 - 0.5).abs() < 1e-15);
        let mixed = Rdm::unchecked(vec![1, 2], 2, CMatrix::identity(4, 4) * c(0.25, 0.0)).unwrap();
        let check = check_w_form(&mixed, &tol).unwrap();
        assert!(check.deviations.iter().any(|(l, d)| l == "entry(3,3)" && (*d - 0.25).abs() < 1e-15));
        let single = Rdm::unchecked(vec![1], 2, CMatrix::identity(2, 2) * c(0.5, 0.0)).unwrap();
        assert!(check_w_form(&single, &tol).is_err());
    }

    #[test]
    fn mixed_uniform_three() {
        let w = WCoefficients::uniform(3).unwrap();
        let ms = MarginalSet::from_w(&w, &PartyPair::all(3), Tolerances::default()).unwrap();
        let report = reconstruct_mixed(&ms);
        let got = report.verdict.coefficients().expect("unique");
        assert!((got.fidelity(&w) - 1.0).abs() < 1e-12);
        assert!(report.max_residual() < 1e-12);
        assert_eq!(report.residuals.len(), 3);
    }

    #[test]
    fn mixed_ghz_fails_at_corner() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = ghz(c(h, 0.0), c(h, 0.0), 3).unwrap();
        let report = reconstruct_mixed(&marginals_of(&g, &PartyPair::all(3)));
        match report.verdict {
            Verdict::Inconsistent { step: Step::Corner, pair, .. } => {
                assert_eq!(pair, Some(PartyPair::new(1, 2, 3).unwrap()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mixed_missing_pair_is_insufficient() {
        let w = WCoefficients::uniform(5).unwrap();
        let mut pairs = PartyPair::all(5);
        let dropped = pairs.remove(3);
        let report = reconstruct_mixed(&MarginalSet::from_w(&w, &pairs, Tolerances::default()).unwrap());
        match report.verdict {
            Verdict::Insufficient { step: Step::Coverage, missing, .. } => assert_eq!(missing, vec![dropped]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mixed_with_zero_coefficient() {
        let w = WCoefficients::normalized(vec![c(0.3, 0.4), c(0.0, 0.0), c(0.2, -0.6), c(-0.1, 0.2)]).unwrap();
        let ms = MarginalSet::from_w(&w, &PartyPair::all(4), Tolerances::default()).unwrap();
        let report = reconstruct_mixed(&ms);
        let got = report.verdict.coefficients().expect("unique");
        assert!((got.fidelity(&w) - 1.0).abs() < 1e-12);
        assert_eq!(got.get(2), c(0.0, 0.0));
    }

    #[test]
    fn mixed_rejects_vacuum_admixture() {
        // pure state a0|000> + W part: pair marginals carry |00><01| coherences
        let mut amp = vec![c(0.0, 0.0); 8];
        amp[0] = c(0.5, 0.0);
        amp[4] = c(0.5, 0.0);
        amp[2] = c(0.5, 0.0);
        amp[1] = c(0.5, 0.0);
        let psi = PureState::new(3, amp).unwrap();
        let report = reconstruct_mixed(&marginals_of(&psi, &PartyPair::all(3)));
        assert!(matches!(report.verdict, Verdict::Inconsistent { step: Step::Moduli, .. }));
    }

    #[test]
    fn pure_star_uniform_four() {
        let w = WCoefficients::uniform(4).unwrap();
        let ms = MarginalSet::from_w(&w, &PartyPair::star(4), Tolerances::default()).unwrap();
        let report = reconstruct_pure(&ms);
        assert!((report.verdict.coefficients().unwrap().fidelity(&w) - 1.0).abs() < 1e-12);
        assert!(report.max_residual() < 1e-12);
        assert_eq!(report.diagnostics.phase_chain.len(), 3);
        assert!(!report.phase_convention.is_empty());
        assert!(report.assumptions[0].contains("pure"));
    }

    #[test]
    fn pure_star_ghz_fails_at_corner() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = ghz(c(h, 0.0), c(0.0, h), 3).unwrap();
        let report = reconstruct_pure(&marginals_of(&g, &PartyPair::star(3)));
        assert_eq!(report.verdict.step(), Some(Step::Corner));
    }

    #[test]
    fn pure_star_zero_hub_is_insufficient() {
        let w = WCoefficients::normalized(vec![c(0.0, 0.0), c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let ms = MarginalSet::from_w(&w, &PartyPair::star(3), Tolerances::default()).unwrap();
        let report = reconstruct_pure(&ms);
        assert!(matches!(report.verdict, Verdict::Insufficient { step: Step::HubModulus, .. }));
    }

    #[test]
    fn pure_star_missing_marginal() {
        let w = WCoefficients::uniform(4).unwrap();
        let pairs = [PartyPair::new(1, 2, 4).unwrap(), PartyPair::new(2, 3, 4).unwrap()];
        let report = reconstruct_pure(&MarginalSet::from_w(&w, &pairs, Tolerances::default()).unwrap());
        match report.verdict {
            Verdict::Insufficient { step: Step::Coverage, missing, .. } => assert_eq!(missing.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn marginal_set_rejects_bad_input() {
        let w = WCoefficients::uniform(3).unwrap();
        let mut ms = MarginalSet::from_w(&w, &PartyPair::all(3), Tolerances::default()).unwrap();
        let again = w_bipartite_marginal(&w, 1, 2).unwrap();
        assert!(matches!(ms.insert(again), Err(Error::DuplicatePair(1, 2))));
        let wrong_n = w_bipartite_marginal(&WCoefficients::uniform(4).unwrap(), 1, 2).unwrap();
        assert!(ms.insert(wrong_n).is_err());
    }

    #[test]
    fn non_hermitian_input_is_invalid() {
        let w = WCoefficients::uniform(3).unwrap();
        let mut ms = MarginalSet::from_w(&w, &PartyPair::all(3), Tolerances::default()).unwrap();
        let p = PartyPair::new(1, 3, 3).unwrap();
        ms.get_mut(&p).unwrap().entries_mut()[(0, 1)] += c(1e-3, 0.0);
        assert_eq!(reconstruct_mixed(&ms).verdict.step(), Some(Step::Validity));
    }
}
