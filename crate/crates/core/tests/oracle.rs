use num_complex::Complex64;
use wmarg::bitindex::PartyPair;
use wmarg::linalg::{self, trace};
use wmarg::oracle::*;
use wmarg::ptrace::{marginal_residual, rdm_from_pure};
use wmarg::reconstruct::MarginalSet;
use wmarg::states::{make_w, w_density, WCoefficients};
use wmarg::Tolerances;

fn pairs(list: &[(usize, usize)], n: usize) -> Vec<PartyPair> {
    list.iter().map(|&(j, k)| PartyPair::new(j, k, n).unwrap()).collect()
}

fn generic_w4() -> WCoefficients {
    WCoefficients::normalized(vec![
        Complex64::new(0.5, 0.2),
        Complex64::new(-0.3, 0.4),
        Complex64::new(0.2, -0.1),
        Complex64::new(0.35, 0.3),
    ])
    .unwrap()
}

#[test]
fn null_space_elements_have_vanishing_marginals() {
    for (n, ps) in [(3, PartyPair::all(3)), (4, pairs(&[(1, 2), (3, 4)], 4)), (4, PartyPair::star(4))] {
        let map = build_marginal_map(n, &ps).unwrap();
        let basis = null_space(&map, RANK_TOL);
        assert_eq!(basis.len(), map.basis().len() - map.rank());
        for h in &basis {
            assert!(trace(h).norm() < 1e-12);
            assert!(linalg::hermitian_deviation(h) < 1e-12);
            let entries: Vec<_> = (0..h.nrows())
                .flat_map(|r| (0..h.ncols()).map(move |c| (r, c)))
                .map(|(r, c)| (r, c, h[(r, c)]))
                .collect();
            for p in &ps {
                let m = sparse_pair_marginal(&entries, *p, n);
                assert!(m.iter().all(|z| z.norm() < 1e-9));
            }
        }
        // orthonormal under the Frobenius inner product
        for (i, a) in basis.iter().enumerate().take(6) {
            for (j, b) in basis.iter().enumerate().take(6) {
                let ip = (a.adjoint() * b).trace().re;
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn three_qubit_all_pairs_kernel_dimension() {
    // 63 traceless directions
    let map = build_marginal_map(3, &PartyPair::all(3)).unwrap();
    let dim = map.basis().len() - map.rank();
    // image: Pauli strings of weight 1 or 2 (9 + 27); kernel: weight 3 (27)
    assert_eq!(map.rank(), 36);
    assert_eq!(dim, 27);
}

#[test]
fn phase_twist_tangent_lies_in_kernel() {
    let c = generic_w4();
    let ps = pairs(&[(1, 2), (3, 4)], 4);
    let map = build_marginal_map(4, &ps).unwrap();
    let basis = null_space(&map, RANK_TOL);
    assert!(!basis.is_empty());
    // finite-difference tangent of the twist family, blocks {3,4} / {1,2}
    let eps = 1e-6;
    let blocks = vec![vec![3, 4], vec![1, 2]];
    let plus = twist_coefficients(&c, &blocks, &[eps, 0.0]).unwrap();
    let minus = twist_coefficients(&c, &blocks, &[-eps, 0.0]).unwrap();
    let tangent = (w_density(&plus).unwrap().entries() - w_density(&minus).unwrap().entries())
        / Complex64::new(2.0 * eps, 0.0);
    let norm = tangent.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm > 1e-3);
    let t = tangent / Complex64::new(norm, 0.0);
    let projected: f64 = basis.iter().map(|h| (h.adjoint() * &t).trace().re.powi(2)).sum();
    assert!((projected - 1.0).abs() < 1e-6, "tangent captured {projected}");
}

#[test]
fn evidence_uniform_w3_w4_all_pairs() {
    for n in [3, 4] {
        let c = WCoefficients::uniform(n).unwrap();
        let e = uniqueness_evidence(&c, &PartyPair::all(n), 2000, 7, &Tolerances::default()).unwrap();
        assert_eq!(e.feasible_directions, 0, "{e:?}");
        assert!(e.null_space_dim > 0);
        // nothing survives facial reduction, so the whole kernel is sampled
        assert_eq!(e.reduced_dim, 0);
        assert_eq!(e.samples, 2000);
        assert_eq!(e.full_kernel_samples, 2000);
    }
}

#[test]
fn evidence_w4_split_pairs_finds_directions() {
    let c = WCoefficients::uniform(4).unwrap();
    let e = uniqueness_evidence(&c, &pairs(&[(1, 2), (3, 4)], 4), 500, 3, &Tolerances::default()).unwrap();
    assert!(e.tangent_dim >= 1);
    assert!(e.feasible_directions >= 1);
    let again = uniqueness_evidence(&c, &pairs(&[(1, 2), (3, 4)], 4), 500, 3, &Tolerances::default()).unwrap();
    assert_eq!(e, again);
}

#[test]
fn evidence_star_w4_has_first_order_directions() {
    // the star set certifies only among pure states; around |W4> it leaves a
    // two-dimensional zero-compression face
    let c = WCoefficients::uniform(4).unwrap();
    let e = uniqueness_evidence(&c, &PartyPair::star(4), 200, 1, &Tolerances::default()).unwrap();
    assert_eq!(e.tangent_dim, 2);
    assert_eq!(e.forced_zero, vec![9, 10, 11, 12, 13, 14, 15]);
    assert!(e.feasible_directions >= e.tangent_samples);
}

#[test]
fn twist_preserves_same_block_marginals() {
    let c = generic_w4();
    let blocks = vec![vec![3, 4], vec![1, 2]];
    let t = phase_twist(&c, &blocks, &[0.7, 1.9]).unwrap();
    let w = make_w(&c).unwrap();
    for p in PartyPair::all(4) {
        let r = marginal_residual(&rdm_from_pure(&t, &p.as_vec()).unwrap(), &rdm_from_pure(&w, &p.as_vec()).unwrap())
            .unwrap();
        let same = (p.first() <= 2) == (p.second() <= 2);
        if same {
            assert!(r <= 1e-12);
        } else {
            // |c_J c_K| |e^{i(phi - theta)} - 1|
            let expected = (c.get(p.first()) * c.get(p.second())).norm()
                * (Complex64::from_polar(1.0, 1.9 - 0.7) - 1.0).norm();
            assert!((r - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn fit_all_pairs_w5_single_cluster() {
    let w = WCoefficients::uniform(5).unwrap();
    let ms = MarginalSet::from_w(&w, &PartyPair::all(5), Tolerances::default()).unwrap();
    let out = multistart_pure_fit(&ms, &FitOptions { starts: 12, seed: 11, ..Default::default() }).unwrap();
    let FitOutcome::Fitted { starts, clusters } = out else { panic!("not applicable") };
    let conv = starts.iter().filter(|s| s.converged).count();
    assert!(conv >= 1, "{starts:?}");
    assert_eq!(clusters.len(), 1);
    let rep = &starts[clusters[0].representative];
    assert!(rep.residual < 1e-8);
    let target = wmarg::oracle::ReducedState { vacuum: Complex64::new(0.0, 0.0), c: w.as_slice().to_vec() };
    assert!((rep.state.fidelity(&target) - 1.0).abs() < 1e-6);
}

#[test]
fn fit_star_w6_single_cluster() {
    let w = WCoefficients::normalized((1..=6).map(|k| Complex64::from_polar(0.3 + 0.05 * k as f64, 0.9 * k as f64)).collect())
        .unwrap();
    let ms = MarginalSet::from_w(&w, &PartyPair::star(6), Tolerances::default()).unwrap();
    let out = multistart_pure_fit(&ms, &FitOptions { starts: 12, seed: 5, ..Default::default() }).unwrap();
    let FitOutcome::Fitted { starts, clusters } = out else { panic!("not applicable") };
    assert_eq!(clusters.len(), 1, "{starts:?}");
}

#[test]
fn fit_split_pairs_w4_traces_twist_family() {
    let c = generic_w4();
    let ms = MarginalSet::from_w(&c, &pairs(&[(1, 2), (3, 4)], 4), Tolerances::default()).unwrap();
    let out = multistart_pure_fit(&ms, &FitOptions { starts: 12, seed: 2, ..Default::default() }).unwrap();
    let FitOutcome::Fitted { starts, clusters } = out else { panic!("not applicable") };
    assert!(clusters.len() >= 2, "expected a family, got {clusters:?}");
    for s in starts.iter().filter(|s| s.converged) {
        // every minimizer is a block twist: vacuum empty, moduli preserved,
        // relative phase constant inside each block
        assert!(s.state.vacuum.norm() < 1e-6);
        for j in 1..=4 {
            assert!((s.state.c[j - 1].norm() - c.get(j).norm()).abs() < 1e-6);
        }
        let r1 = s.state.c[0] / c.get(1);
        let r2 = s.state.c[1] / c.get(2);
        let r3 = s.state.c[2] / c.get(3);
        let r4 = s.state.c[3] / c.get(4);
        assert!((r1 - r2).norm() < 1e-5);
        assert!((r3 - r4).norm() < 1e-5);
    }
}
