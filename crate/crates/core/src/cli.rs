//! Command implementations behind the `wmarg` binary. Each command takes
//! input text and returns output text plus an exit code, so the binary is a
//! thin argument-parsing shell.

use crate::bitindex::PartyPair;
use crate::error::Error;
use crate::io::{self, ResidualRow, StateFile};
use crate::oracle::{multistart_pure_fit, twist_coefficients, uniqueness_evidence, FitOptions};
use crate::ptrace::{marginal_residual, rdm_from_pure};
use crate::reconstruct::{reconstruct_mixed, reconstruct_pure, MarginalSet, Verdict};
use crate::states::{validate_subset, w_bipartite_marginal, Rdm};
use crate::tolerance::Tolerances;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;
pub const EXIT_INSUFFICIENT: i32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::CapExceeded { .. }) { EXIT_CAP } else { EXIT_PARSE };
        Failure { code, message: e.to_string() }
    }
}

fn parse_failure(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_PARSE, message: message.into() }
}

/// Output text and exit code of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

/// Parses one party list. With all labels below 10 the digits may be run
/// together (`"134"`); otherwise separate them with `-` (`"1-12"`, or
/// `"12-"` for the single party 12).
pub fn parse_parties(s: &str) -> Result<Vec<usize>, Failure> {
    let s = s.trim();
    if s.is_empty() {
        return Err(parse_failure("empty party list"));
    }
    let labels: Option<Vec<usize>> = if s.contains('-') {
        s.split('-').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse().ok()).collect()
    } else {
        s.chars().map(|ch| ch.to_digit(10).map(|d| d as usize)).collect()
    };
    labels.ok_or_else(|| parse_failure(format!("cannot read party list {s:?}")))
}

/// Parses a comma-separated list of party subsets. The words `all-pairs`
/// and `star` expand to every pair and to the pairs containing party 1.
pub fn parse_subsets(s: &str, n: usize) -> Result<Vec<Vec<usize>>, Failure> {
    match s.trim() {
        "all-pairs" => return Ok(PartyPair::all(n).into_iter().map(PartyPair::as_vec).collect()),
        "star" => return Ok(PartyPair::star(n).into_iter().map(PartyPair::as_vec).collect()),
        _ => {}
    }
    let subsets = s.split(',').map(parse_parties).collect::<Result<Vec<_>, _>>()?;
    for sub in &subsets {
        validate_subset(sub, n)?;
    }
    Ok(subsets)
}

pub fn parse_pairs(s: &str, n: usize) -> Result<Vec<PartyPair>, Failure> {
    let mut pairs = Vec::new();
    for sub in parse_subsets(s, n)? {
        match sub[..] {
            [a, b] => pairs.push(PartyPair::new(a, b, n)?),
            _ => return Err(parse_failure(format!("{sub:?} is not a pair"))),
        }
    }
    Ok(pairs)
}

/// Parses a `|`-separated partition such as `"34|12"`.
pub fn parse_blocks(s: &str) -> Result<Vec<Vec<usize>>, Failure> {
    s.split('|').map(parse_parties).collect()
}

pub fn parse_phases(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            let x: f64 = t.trim().parse().map_err(|_| parse_failure(format!("cannot read phase {t:?}")))?;
            if x.is_finite() { Ok(x) } else { Err(parse_failure(format!("phase {t:?} is not finite"))) }
        })
        .collect()
}

/// `marginals`: reduced density matrices of a state file on the requested
/// subsets. Pair marginals of W-class inputs use the closed form and work
/// for any qubit count.
pub fn marginals(state_text: &str, subsets: &str) -> Result<Output, Failure> {
    let state = StateFile::parse(state_text)?;
    let n = state.n();
    let subsets = parse_subsets(subsets, n)?;
    let rdms = match &state {
        StateFile::W(c) if subsets.iter().all(|s| s.len() == 2) => subsets
            .iter()
            .map(|s| w_bipartite_marginal(c, s[0], s[1]))
            .collect::<Result<Vec<Rdm>, _>>()?,
        StateFile::W(c) => {
            let psi = crate::states::make_w(c)?;
            subsets.iter().map(|s| rdm_from_pure(&psi, s)).collect::<Result<_, _>>()?
        }
        StateFile::Pure(psi) => subsets.iter().map(|s| rdm_from_pure(psi, s)).collect::<Result<_, _>>()?,
    };
    Ok(Output { text: io::marginals_to_json(n, &rdms), code: EXIT_OK })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// The global state may be mixed; all pairs are required.
    Mixed,
    /// The global state is known to be pure; pairs containing party 1 suffice.
    PureStar,
}

/// `reconstruct`: decide whether the marginals pin down a unique W-class
/// state. The exit code follows the verdict.
pub fn reconstruct(marginal_text: &str, mode: Mode, tol: Tolerances) -> Result<Output, Failure> {
    let ms = io::parse_marginal_set(marginal_text, tol)?;
    let report = match mode {
        Mode::Mixed => reconstruct_mixed(&ms),
        Mode::PureStar => reconstruct_pure(&ms),
    };
    let code = match report.verdict {
        Verdict::UniqueW(_) => EXIT_OK,
        Verdict::Inconsistent { .. } => EXIT_INCONSISTENT,
        Verdict::Insufficient { .. } => EXIT_INSUFFICIENT,
    };
    Ok(Output { text: io::report_to_json(&report), code })
}

fn w_input(state_text: &str) -> Result<crate::states::WCoefficients, Failure> {
    match StateFile::parse(state_text)? {
        StateFile::W(c) => Ok(c),
        StateFile::Pure(_) => Err(parse_failure("this command needs a W-class state file (kind \"w\")")),
    }
}

/// `verify-unique`: seeded search for marginal-preserving PSD directions
/// around a W-class state.
pub fn verify_unique(state_text: &str, pairs: &str, samples: usize, seed: u64, tol: Tolerances) -> Result<Output, Failure> {
    let c = w_input(state_text)?;
    let pairs = parse_pairs(pairs, c.n())?;
    let e = uniqueness_evidence(&c, &pairs, samples, seed, &tol)?;
    Ok(Output { text: io::evidence_to_json(&e), code: EXIT_OK })
}

/// `counterexample`: the phase-twisted state together with the marginal
/// residual of every pair.
pub fn counterexample(state_text: &str, blocks: &str, phases: &str) -> Result<Output, Failure> {
    let c = w_input(state_text)?;
    let n = c.n();
    let blocks = parse_blocks(blocks)?;
    let phases = parse_phases(phases)?;
    let owner = crate::oracle::block_of(&blocks, n)?;
    let twisted = twist_coefficients(&c, &blocks, &phases)?;
    let mut rows = Vec::new();
    for p in PartyPair::all(n) {
        let (j, k) = (p.first(), p.second());
        let residual = marginal_residual(&w_bipartite_marginal(&twisted, j, k)?, &w_bipartite_marginal(&c, j, k)?)?;
        rows.push(ResidualRow { parties: [j, k], same_block: owner[j] == owner[k], residual: io::Exact(residual) });
    }
    let fidelity = twisted.fidelity(&c);
    Ok(Output { text: io::counterexample_to_json(&twisted, &blocks, &phases, fidelity, rows), code: EXIT_OK })
}

/// `fit`: multi-start search for pure states in the vacuum plus
/// single-excitation span that reproduce the marginals.
pub fn fit(marginal_text: &str, starts: usize, seed: u64, tol: Tolerances) -> Result<Output, Failure> {
    let ms: MarginalSet = io::parse_marginal_set(marginal_text, tol)?;
    let out = multistart_pure_fit(&ms, &FitOptions { starts, seed, ..Default::default() })?;
    Ok(Output { text: io::fit_to_json(&out), code: EXIT_OK })
}
