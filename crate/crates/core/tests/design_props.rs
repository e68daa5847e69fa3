mod common;

use common::{exhaustive_binary_links, random_symmetric_network, reference_sigma_real, rng, stacked_closed_loop};
use msfnet_core::design::{design_binary, design_matching, design_weighted, norm_sweep, SweepFamily};
use msfnet_core::eigen::spectral_abscissa;
use msfnet_core::graphs::{spectrum, Network};
use msfnet_core::model::reference_plant;
use msfnet_core::msf::{sigma, IntervalSearch};
use msfnet_core::{Complex64, Error};
use rand::Rng;

const MARGIN: f64 = 0.01;

/// Gain the reference plant needs on a mode with eigenvalue `lambda`:
/// stable iff `mu > lambda - 2`.
fn reference_gain(lambda: f64) -> f64 {
    if lambda < 2.0 {
        0.0
    } else {
        lambda - 2.0 + MARGIN
    }
}

fn random_plant(r: &mut rand_chacha::ChaCha8Rng) -> Network {
    let n = r.gen_range(2..=10);
    let p = r.gen_range(0.2..1.0);
    Network::custom(random_symmetric_network(r, n, p, true)).unwrap()
}

#[test]
fn weighted_gains_match_reference_rule() {
    let p = reference_plant();
    let search = IntervalSearch::default();
    let mut r = rng(21);
    for case in 0..100 {
        let b = random_plant(&mut r);
        let d = design_weighted(&p, &b, &search, MARGIN).unwrap();
        for (lambda, mu) in d.plant_eigenvalues.iter().zip(&d.mode_gains) {
            if (lambda.re - 2.0).abs() < 1e-6 {
                continue;
            }
            assert!((mu - reference_gain(lambda.re)).abs() < 1e-8, "case {case}: lambda {lambda} mu {mu}");
        }
        let a = &d.feedback;
        assert_eq!(a.asymmetry(), 0.0);
        // Shared eigenbasis: A and B commute.
        let comm = a.matmul(b.adjacency()).unwrap().try_sub(&b.adjacency().matmul(a).unwrap()).unwrap();
        assert!(comm.frobenius_norm() < 1e-8 * (1.0 + a.frobenius_norm() * b.adjacency().frobenius_norm()));
        assert!(d.trace_identity_defect() < 1e-9 * (1.0 + d.frobenius_norm.powi(2)));
        let abscissa = spectral_abscissa(&stacked_closed_loop(&p, b.adjacency(), a)).unwrap();
        assert!(abscissa < 0.0, "case {case}: abscissa {abscissa}");
    }
}

#[test]
fn weighted_gains_are_minimal_per_mode() {
    let p = reference_plant();
    let search = IntervalSearch::default();
    let mut r = rng(22);
    for _ in 0..50 {
        let b = random_plant(&mut r);
        let d = design_weighted(&p, &b, &search, MARGIN).unwrap();
        for (lambda, &mu) in d.plant_eigenvalues.iter().zip(&d.mode_gains) {
            assert!(reference_sigma_real(lambda.re, mu) < 0.0);
            if mu != 0.0 {
                // Anything smaller in magnitude by more than the margin is unstable.
                let tighter = mu.signum() * (mu.abs() - MARGIN - 1e-6);
                assert!(reference_sigma_real(lambda.re, tighter) >= 0.0);
            }
        }
    }
}

#[test]
fn weighted_gains_on_random_models_lie_in_their_intervals() {
    let search = IntervalSearch::new(-20.0, 20.0);
    let mut r = rng(23);
    let mut designed = 0;
    for _ in 0..200 {
        let p = common::random_model2(&mut r);
        let b = random_plant(&mut r);
        let d = match design_weighted(&p, &b, &search, MARGIN) {
            Ok(d) => d,
            Err(Error::Infeasible(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        designed += 1;
        for m in &d.modes {
            assert!(m.interval.contains(m.gain));
            assert!(m.gain.abs() <= m.interval.distance_to_origin() + MARGIN + 1e-12);
            assert!(sigma(&p, m.lambda, Complex64::new(m.gain, 0.0)).unwrap() < 0.0);
        }
    }
    assert!(designed > 20, "only {designed} feasible instances");
}

#[test]
fn weighted_never_exceeds_matching() {
    let p = reference_plant();
    let search = IntervalSearch::default();
    for family in [SweepFamily::Complete, SweepFamily::Ring { k: 2 }, SweepFamily::Ring { k: 4 }] {
        for row in norm_sweep(&p, family, 5..=20, &search, MARGIN) {
            let (w, m) = (row.weighted_norm.unwrap(), row.matching_norm.unwrap());
            assert!(w <= m, "{family:?} n={}: {w} > {m}", row.n);
        }
    }
    let mut r = rng(24);
    for _ in 0..50 {
        let b = random_plant(&mut r);
        let w = design_weighted(&p, &b, &search, MARGIN).unwrap();
        let m = design_matching(&p, &b).unwrap();
        assert!(w.frobenius_norm <= m.frobenius_norm + 1e-12);
        assert!((m.frobenius_norm - b.adjacency().frobenius_norm()).abs() < 1e-12);
    }
}

#[test]
fn matching_spectrum_cancels_coupling() {
    let p = reference_plant();
    let mut r = rng(25);
    for _ in 0..30 {
        let b = random_plant(&mut r);
        let d = design_matching(&p, &b).unwrap();
        let model = p.with_loop_gain(d.loop_gain.clone().unwrap()).unwrap();
        let closed = stacked_closed_loop(&model, b.adjacency(), &d.feedback);
        // Every block reduces to F, whose eigenvalues are -1 ± 2i.
        let ev = msfnet_core::eigen::eigenvalues(&closed).unwrap();
        for z in ev {
            assert!((z.re + 1.0).abs() < 1e-6 && (z.im.abs() - 2.0).abs() < 1e-6, "{z}");
        }
    }
}

#[test]
fn binary_matches_exhaustive_enumeration() {
    let p = reference_plant();
    let mut r = rng(26);
    let mut feasible = 0;
    for case in 0..40 {
        let n = r.gen_range(2..=4);
        let b = random_symmetric_network(&mut r, n, 0.7, false);
        let net = Network::custom(b.clone()).unwrap();
        let want = exhaustive_binary_links(&p, &b);
        match design_binary(&p, &net, true, &mut || false) {
            Ok(d) => {
                feasible += 1;
                assert_eq!(Some(d.link_count()), want, "case {case}");
                assert_eq!(d.feedback.asymmetry(), 0.0);
                assert!(spectral_abscissa(&stacked_closed_loop(&p, &b, &d.feedback)).unwrap() < 0.0);
            }
            Err(Error::Infeasible(_)) => assert_eq!(want, None, "case {case}"),
            Err(e) => panic!("case {case}: {e}"),
        }
    }
    assert!(feasible >= 10, "only {feasible} feasible instances");
}

#[test]
fn spectrum_pairs_with_gains_in_order() {
    let p = reference_plant();
    let mut r = rng(27);
    let b = random_plant(&mut r);
    let d = design_weighted(&p, &b, &IntervalSearch::default(), MARGIN).unwrap();
    let ev = spectrum(&b).unwrap().eigenvalues;
    assert_eq!(ev, d.plant_eigenvalues);
}
