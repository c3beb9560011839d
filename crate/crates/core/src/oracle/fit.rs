//! Multi-start fitting of pure states in the span of `|0..0>` and the
//! single-excitation states to a set of pair marginals.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bitindex::PartyPair;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::reconstruct::MarginalSet;
use crate::states::{PureState, PURE_CAP};

/// Largest party count for the reduced parameterization.
pub const FIT_CAP: usize = 12;

/// A state `a_0 |0..0> + sum_J c_J |0..1_J..0>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub vacuum: Complex64,
    pub c: Vec<Complex64>,
}

impl ReducedState {
    fn from_vec(x: &[Complex64]) -> Self {
        ReducedState { vacuum: x[0], c: x[1..].to_vec() }
    }

    fn to_vec(&self) -> Vec<Complex64> {
        std::iter::once(self.vacuum).chain(self.c.iter().copied()).collect()
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// `|<self|other>|`.
    pub fn fidelity(&self, other: &ReducedState) -> f64 {
        linalg::overlap(&self.to_vec(), &other.to_vec())
    }

    /// Dense amplitude vector.
    pub fn to_pure(&self) -> Result<PureState> {
        let n = self.n();
        if n > PURE_CAP {
            return Err(Error::CapExceeded { what: "dense pure state", n, cap: PURE_CAP });
        }
        let mut a = vec![ZERO; 1 << n];
        a[0] = self.vacuum;
        for j in 1..=n {
            a[1 << (n - j)] = self.c[j - 1];
        }
        PureState::new(n, a)
    }

    /// Pair marginal over `|00>, |01>, |10>, |11>`.
    pub fn pair_marginal(&self, pair: PartyPair) -> CMatrix {
        let (j, k) = (pair.first(), pair.second());
        let v = [self.vacuum, self.c[k - 1], self.c[j - 1], ZERO];
        let rest: f64 = (1..=self.n())
            .filter(|&l| l != j && l != k)
            .map(|l| self.c[l - 1].norm_sqr())
            .sum();
        crate::states::reassemble_psi_plus(&v, rest)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitStart {
    pub state: ReducedState,
    /// Largest entrywise marginal deviation over all pairs.
    pub residual: f64,
    /// Sum of squared Frobenius deviations.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Index (into `starts`) of the first member.
    pub representative: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitOutcome {
    /// Some supplied marginal has a populated `|11>` entry, so the reduced
    /// subspace cannot contain a matching state.
    NotApplicable { pair: PartyPair, corner: f64 },
    Fitted { starts: Vec<FitStart>, clusters: Vec<Cluster> },
}

/// Options for [`multistart_pure_fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// A start counts as converged when its residual is below this.
    pub residual_tol: f64,
    /// Converged minimizers with fidelity above `1 - cluster_tol` are merged.
    pub cluster_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { starts: 16, seed: 0, max_iters: 20_000, residual_tol: 1e-8, cluster_tol: 1e-6 }
    }
}

struct Objective<'a> {
    targets: Vec<(PartyPair, &'a CMatrix)>,
}

impl Objective<'_> {
    fn value(&self, s: &ReducedState) -> f64 {
        self.targets
            .iter()
            .map(|(p, t)| (s.pair_marginal(*p) - *t).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Gradient with respect to the real inner product `Re <g, dx>`.
    fn gradient(&self, s: &ReducedState) -> Vec<Complex64> {
        let n = s.n();
        let mut g = vec![ZERO; n + 1];
        for (pair, t) in &self.targets {
            let (j, k) = (pair.first(), pair.second());
            let d = s.pair_marginal(*pair) - *t;
            let v = [s.vacuum, s.c[k - 1], s.c[j - 1], ZERO];
            let dv: Vec<Complex64> = (0..4).map(|r| (0..4).map(|q| d[(r, q)] * v[q]).sum()).collect();
            g[0] += dv[0] * 4.0;
            g[k] += dv[1] * 4.0;
            g[j] += dv[2] * 4.0;
            let d00 = d[(0, 0)].re;
            for l in (1..=n).filter(|&l| l != j && l != k) {
                g[l] += s.c[l - 1] * (4.0 * d00);
            }
        }
        g
    }

    fn residual(&self, s: &ReducedState) -> f64 {
        self.targets
            .iter()
            .map(|(p, t)| linalg::max_abs_diff(&s.pair_marginal(*p), t))
            .fold(0.0, f64::max)
    }
}

fn normalize(x: &mut [Complex64]) {
    let norm = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in x.iter_mut() {
        *a /= norm;
    }
}

fn descend(obj: &Objective<'_>, mut x: Vec<Complex64>, opts: &FitOptions) -> FitStart {
    let mut state = ReducedState::from_vec(&x);
    let mut f = obj.value(&state);
    let mut step = 0.5;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        if obj.residual(&state) < opts.residual_tol * 1e-2 {
            break;
        }
        iterations += 1;
        let g = obj.gradient(&state);
        // tangent projection on the unit sphere
        let radial: f64 = x.iter().zip(&g).map(|(a, b)| (a.conj() * b).re).sum();
        let dir: Vec<Complex64> = g.iter().zip(&x).map(|(b, a)| b - a * radial).collect();
        let slope: f64 = dir.iter().map(|d| d.norm_sqr()).sum();
        if slope < 1e-32 {
            break;
        }
        let mut accepted = false;
        while step > 1e-20 {
            let mut trial: Vec<Complex64> = x.iter().zip(&dir).map(|(a, d)| a - d * step).collect();
            normalize(&mut trial);
            let ts = ReducedState::from_vec(&trial);
            let tf = obj.value(&ts);
            if tf <= f - 1e-4 * step * slope {
                x = trial;
                state = ts;
                f = tf;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let residual = obj.residual(&state);
    FitStart { state, residual, objective: f, iterations, converged: residual < opts.residual_tol }
}

/// Minimizes the squared marginal mismatch over normalized states in the
/// `(n+1)`-dimensional span of `|0..0>` and the single-excitation states,
/// from `opts.starts` random starts. Converged minimizers are clustered up
/// to global phase.
pub fn multistart_pure_fit(ms: &MarginalSet, opts: &FitOptions) -> Result<FitOutcome> {
    let n = ms.n();
    if n > FIT_CAP {
        return Err(Error::CapExceeded { what: "reduced pure-state fit", n, cap: FIT_CAP });
    }
    if n < 2 {
        return Err(Error::TooFewParties(n));
    }
    for (pair, rdm) in ms.iter() {
        let corner = rdm.entry(3, 3).norm();
        if corner > ms.tolerances().zero {
            return Ok(FitOutcome::NotApplicable { pair: *pair, corner });
        }
    }
    let obj = Objective { targets: ms.iter().map(|(p, r)| (*p, r.entries())).collect() };

    let starts: Vec<FitStart> = (0..opts.starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let mut x: Vec<Complex64> = (0..=n)
                .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                .collect();
            normalize(&mut x);
            descend(&obj, x, opts)
        })
        .collect();

    let mut clusters: Vec<Cluster> = Vec::new();
    for (i, s) in starts.iter().enumerate().filter(|(_, s)| s.converged) {
        match clusters
            .iter_mut()
            .find(|c| starts[c.representative].state.fidelity(&s.state) > 1.0 - opts.cluster_tol)
        {
            Some(c) => c.members.push(i),
            None => clusters.push(Cluster { representative: i, members: vec![i] }),
        }
    }
    Ok(FitOutcome::Fitted { starts, clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::WCoefficients;
    use crate::tolerance::Tolerances;

    #[test]
    fn gradient_matches_finite_differences() {
        let w = WCoefficients::normalized(vec![
            Complex64::new(0.4, 0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.3, -0.3),
            Complex64::new(0.1, 0.2),
        ])
        .unwrap();
        let ms = MarginalSet::from_w(&w, &PartyPair::all(4), Tolerances::default()).unwrap();
        let obj = Objective { targets: ms.iter().map(|(p, r)| (*p, r.entries())).collect() };
        let x = vec![
            Complex64::new(0.1, 0.2),
            Complex64::new(0.5, -0.1),
            Complex64::new(0.2, 0.3),
            Complex64::new(-0.4, 0.1),
            Complex64::new(0.3, 0.3),
        ];
        let g = obj.gradient(&ReducedState::from_vec(&x));
        let h = 1e-6;
        for i in 0..x.len() {
            for (unit, part) in [(Complex64::new(1.0, 0.0), 0), (Complex64::new(0.0, 1.0), 1)] {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += unit * h;
                xm[i] -= unit * h;
                let fd = (obj.value(&ReducedState::from_vec(&xp)) - obj.value(&ReducedState::from_vec(&xm))) / (2.0 * h);
                let an = if part == 0 { g[i].re } else { g[i].im };
                assert!((fd - an).abs() < 1e-6, "coordinate {i}/{part}: fd {fd} vs {an}");
            }
        }
    }

    #[test]
    fn reduced_marginal_matches_partial_trace() {
        let s = ReducedState {
            vacuum: Complex64::new(0.3, 0.1),
            c: vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, -0.4), Complex64::new(0.2, 0.6)],
        };
        let norm = s.to_vec().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let s = ReducedState { vacuum: s.vacuum / norm, c: s.c.iter().map(|a| a / norm).collect() };
        let psi = s.to_pure().unwrap();
        for p in PartyPair::all(3) {
            let r = crate::ptrace::rdm_from_pure(&psi, &p.as_vec()).unwrap();
            assert!(linalg::max_abs_diff(r.entries(), &s.pair_marginal(p)) < 1e-15);
        }
    }

    #[test]
    fn ghz_marginals_are_not_applicable() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = crate::states::ghz(Complex64::new(h, 0.0), Complex64::new(h, 0.0), 3).unwrap();
        let rdms = PartyPair::all(3).into_iter().map(|p| crate::ptrace::rdm_from_pure(&g, &p.as_vec()).unwrap());
        let ms = MarginalSet::from_rdms(3, rdms, Tolerances::default()).unwrap();
        let out = multistart_pure_fit(&ms, &FitOptions::default()).unwrap();
        assert!(matches!(out, FitOutcome::NotApplicable { .. }));
    }
}
