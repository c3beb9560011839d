//! JSON file formats.
//!
//! ```text
//! state:     {"n": int, "kind": "pure", "amplitudes": [[re, im], ...]}   index i = basis index i
//! w-state:   {"n": int, "kind": "w", "c": [[re, im], ...]}              entry J-1 = party J
//! marginals: {"n": int, "pairs": [{"parties": [J, K], "matrix": [[[re, im] x4] x4]}]}
//! ```
//!
//! Matrix rows and columns run over `|00>, |01>, |10>, |11>`. Complex numbers
//! are written as pairs of decimals with 17 significant digits, so parsing a
//! written file gives back the same bits.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::ser::{Error as _, SerializeTuple};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::bitindex::PartyPair;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::oracle::{FitOutcome, ReducedState, UniquenessEvidence};
use crate::reconstruct::{MarginalSet, ReconstructionReport, Verdict};
use crate::states::{PureState, Rdm, WCoefficients};
use crate::tolerance::Tolerances;

/// An `f64` written with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exact(pub f64);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("non-finite number {}", self.0)));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Exact)
    }
}

/// A complex number as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx(pub Complex64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&Exact(self.0.re))?;
        t.serialize_element(&Exact(self.0.im))?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<f64> = Vec::deserialize(d)?;
        match v[..] {
            [re, im] => Ok(Cx(Complex64::new(re, im))),
            _ => Err(D::Error::custom(format!("complex number needs 2 components, got {}", v.len()))),
        }
    }
}

fn cx_vec(v: &[Complex64]) -> Vec<Cx> {
    v.iter().copied().map(Cx).collect()
}

fn cx_matrix(m: &CMatrix) -> Vec<Vec<Cx>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| Cx(m[(r, c)])).collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<Cx>]) -> Result<CMatrix> {
    let d = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: r.len() });
    }
    Ok(CMatrix::from_fn(d, d, |r, c| rows[r][c].0))
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Invalid(format!("malformed JSON: {e}"))
}

/// Contents of a state file.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFile {
    Pure(PureState),
    W(WCoefficients),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawState {
    Pure { n: usize, amplitudes: Vec<Cx> },
    W { n: usize, c: Vec<Cx> },
}

impl StateFile {
    pub fn n(&self) -> usize {
        match self {
            StateFile::Pure(p) => p.n(),
            StateFile::W(c) => c.n(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text).map_err(parse_err)?)
    }

    pub fn from_value(v: serde_json::Value) -> Result<Self> {
        let raw: RawState = serde_json::from_value(v).map_err(parse_err)?;
        match raw {
            RawState::Pure { n, amplitudes } => {
                Ok(StateFile::Pure(PureState::new(n, amplitudes.into_iter().map(|c| c.0).collect())?))
            }
            RawState::W { n, c } => {
                if c.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: c.len() });
                }
                Ok(StateFile::W(WCoefficients::new(c.into_iter().map(|c| c.0).collect())?))
            }
        }
    }

    fn to_raw(&self) -> RawState {
        match self {
            StateFile::Pure(p) => RawState::Pure { n: p.n(), amplitudes: cx_vec(p.amplitudes()) },
            StateFile::W(c) => RawState::W { n: c.n(), c: cx_vec(c.as_slice()) },
        }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_raw()).expect("finite state serializes")
    }

    pub fn to_json(&self) -> String {
        to_pretty(&self.to_raw())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarginal {
    parties: Vec<usize>,
    matrix: Vec<Vec<Cx>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarginals {
    n: usize,
    pairs: Vec<RawMarginal>,
}

/// Writes a marginal file. Entries may be on any subset; only two-party
/// entries can be read back into a [`MarginalSet`].
pub fn marginals_to_json(n: usize, rdms: &[Rdm]) -> String {
    let raw = RawMarginals {
        n,
        pairs: rdms
            .iter()
            .map(|r| RawMarginal { parties: r.parties().to_vec(), matrix: cx_matrix(r.entries()) })
            .collect(),
    };
    to_pretty(&raw)
}

/// Reads a marginal file of arbitrary subsets. Matrices are checked for shape
/// only.
pub fn parse_rdms(text: &str) -> Result<(usize, Vec<Rdm>)> {
    let raw: RawMarginals = serde_json::from_str(text).map_err(parse_err)?;
    let rdms = raw
        .pairs
        .iter()
        .map(|m| Rdm::unchecked(m.parties.clone(), raw.n, matrix_from_rows(&m.matrix)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((raw.n, rdms))
}

/// Reads a marginal file into a [`MarginalSet`] of 4x4 pair marginals.
pub fn parse_marginal_set(text: &str, tol: Tolerances) -> Result<MarginalSet> {
    let (n, rdms) = parse_rdms(text)?;
    MarginalSet::from_rdms(n, rdms, tol)
}

pub fn marginal_set_to_json(ms: &MarginalSet) -> String {
    let rdms: Vec<Rdm> = ms.iter().map(|(_, r)| r.clone()).collect();
    marginals_to_json(ms.n(), &rdms)
}

fn pair_key(p: &PartyPair) -> String {
    p.to_string()
}

#[derive(Serialize)]
struct StepJson {
    number: u8,
    name: &'static str,
}

#[derive(Serialize)]
struct DiagnosticsJson {
    max_corner: f64,
    moduli_sq: Vec<f64>,
    moduli_spread: Vec<f64>,
    norm_sum: Option<f64>,
    gram: Option<Vec<Vec<Cx>>>,
    rank1_defect: Option<f64>,
    tree: Vec<(usize, usize)>,
    phase_chain: Vec<(usize, Cx)>,
    cross_term_excess: Option<f64>,
}

#[derive(Serialize)]
struct ReportJson {
    verdict: &'static str,
    step: Option<StepJson>,
    pair: Option<[usize; 2]>,
    message: Option<String>,
    missing_pairs: Vec<[usize; 2]>,
    coefficients: Option<Vec<Cx>>,
    phase_convention: String,
    residuals: BTreeMap<String, Exact>,
    diagnostics: DiagnosticsJson,
    assumptions: Vec<String>,
}

pub fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::UniqueW(_) => "unique_w",
        Verdict::Inconsistent { .. } => "inconsistent",
        Verdict::Insufficient { .. } => "insufficient",
    }
}

pub fn report_to_json(r: &ReconstructionReport) -> String {
    let (pair, message, missing) = match &r.verdict {
        Verdict::UniqueW(_) => (None, None, Vec::new()),
        Verdict::Inconsistent { pair, message, .. } => (*pair, Some(message.clone()), Vec::new()),
        Verdict::Insufficient { missing, message, .. } => (None, Some(message.clone()), missing.clone()),
    };
    let d = &r.diagnostics;
    let json = ReportJson {
        verdict: verdict_name(&r.verdict),
        step: r.verdict.step().map(|s| StepJson { number: s.number(), name: s.name() }),
        pair: pair.map(|p| [p.first(), p.second()]),
        message,
        missing_pairs: missing.iter().map(|p| [p.first(), p.second()]).collect(),
        coefficients: r.verdict.coefficients().map(|c| cx_vec(c.as_slice())),
        phase_convention: r.phase_convention.clone(),
        residuals: r.residuals.iter().map(|(p, x)| (pair_key(p), Exact(*x))).collect(),
        diagnostics: DiagnosticsJson {
            max_corner: d.max_corner,
            moduli_sq: d.moduli_sq.clone(),
            moduli_spread: d.moduli_spread.clone(),
            norm_sum: d.norm_sum,
            gram: d.gram.as_ref().map(|g| g.iter().map(|row| cx_vec(row)).collect()),
            rank1_defect: d.rank1_defect,
            tree: d.tree.clone(),
            phase_chain: d.phase_chain.iter().map(|&(k, z)| (k, Cx(z))).collect(),
            cross_term_excess: d.cross_term_excess,
        },
        assumptions: r.assumptions.clone(),
    };
    to_pretty(&json)
}

#[derive(Serialize)]
struct EvidenceJson<'a> {
    n: usize,
    pairs: Vec<[usize; 2]>,
    seed: u64,
    requested_samples: usize,
    samples: usize,
    full_kernel_samples: usize,
    tangent_samples: usize,
    feasible_directions: usize,
    best_min_eigenvalue: Option<f64>,
    null_space_dim: usize,
    reduced_dim: usize,
    tangent_dim: usize,
    forced_zero: &'a [usize],
    unique_evidence: bool,
}

pub fn evidence_to_json(e: &UniquenessEvidence) -> String {
    to_pretty(&EvidenceJson {
        n: e.n,
        pairs: e.pairs.iter().map(|p| [p.first(), p.second()]).collect(),
        seed: e.seed,
        requested_samples: e.requested_samples,
        samples: e.samples,
        full_kernel_samples: e.full_kernel_samples,
        tangent_samples: e.tangent_samples,
        feasible_directions: e.feasible_directions,
        best_min_eigenvalue: e.best_min_eigenvalue,
        null_space_dim: e.null_space_dim,
        reduced_dim: e.reduced_dim,
        tangent_dim: e.tangent_dim,
        forced_zero: &e.forced_zero,
        unique_evidence: e.is_unique_evidence(),
    })
}

#[derive(Serialize)]
pub struct ResidualRow {
    pub parties: [usize; 2],
    pub same_block: bool,
    pub residual: Exact,
}

#[derive(Serialize)]
struct CounterexampleJson {
    state: serde_json::Value,
    blocks: Vec<Vec<usize>>,
    phases: Vec<f64>,
    fidelity: Exact,
    residuals: Vec<ResidualRow>,
}

pub fn counterexample_to_json(
    state: &WCoefficients,
    blocks: &[Vec<usize>],
    phases: &[f64],
    fidelity: f64,
    residuals: Vec<ResidualRow>,
) -> String {
    to_pretty(&CounterexampleJson {
        state: StateFile::W(state.clone()).to_value(),
        blocks: blocks.to_vec(),
        phases: phases.to_vec(),
        fidelity: Exact(fidelity),
        residuals,
    })
}

#[derive(Serialize)]
struct FitStartJson {
    vacuum: Cx,
    c: Vec<Cx>,
    residual: f64,
    objective: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct FitJson {
    applicable: bool,
    message: Option<String>,
    starts: Vec<FitStartJson>,
    clusters: Vec<Vec<usize>>,
}

pub fn fit_to_json(out: &FitOutcome) -> String {
    let state_json = |s: &ReducedState| (Cx(s.vacuum), cx_vec(&s.c));
    let json = match out {
        FitOutcome::NotApplicable { pair, corner } => FitJson {
            applicable: false,
            message: Some(format!("marginal {pair} has |11> population {corner:e}")),
            starts: Vec::new(),
            clusters: Vec::new(),
        },
        FitOutcome::Fitted { starts, clusters } => FitJson {
            applicable: true,
            message: None,
            starts: starts
                .iter()
                .map(|s| {
                    let (vacuum, c) = state_json(&s.state);
                    FitStartJson {
                        vacuum,
                        c,
                        residual: s.residual,
                        objective: s.objective,
                        iterations: s.iterations,
                        converged: s.converged,
                    }
                })
                .collect(),
            clusters: clusters.iter().map(|c| c.members.clone()).collect(),
        },
    };
    to_pretty(&json)
}

/// Indents objects but keeps arrays on one line, so a matrix row or a
/// complex number reads as a unit.
#[derive(Default)]
struct ObjectIndent {
    depth: usize,
    has_value: bool,
}

impl ObjectIndent {
    fn indent<W: ?Sized + std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.depth {
            w.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl serde_json::ser::Formatter for ObjectIndent {
    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.depth += 1;
        self.has_value = false;
        w.write_all(b"{")
    }

    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.depth -= 1;
        if self.has_value {
            self.indent(w)?;
        }
        w.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.indent(w)
    }

    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, _w: &mut W) -> std::io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        if first { Ok(()) } else { w.write_all(b", ") }
    }
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ObjectIndent::default());
    v.serialize(&mut ser).expect("finite values serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}
