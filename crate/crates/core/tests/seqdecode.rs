use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmac::qmat::random::{random_density, random_projector, random_unitary};
use qmac::qmat::{
    eigenvalues_hermitian, identity, outer, r, tr_prod, CMat, CVec, KrausChannel, PovmSet,
    PureState,
};
use qmac::seqdecode::{
    ea_sequential_protocol, exact_success_probability, expected_success_exhaustive, mean_stderr,
    packing_bound_raw, packing_diagnostics, packing_lower_bound, sequential_povm, successive_bound,
    successive_povm, successive_success, BoundFlag, DoubleEnsemble, SuccessiveConstants,
    SuccessiveExponents, SuccessiveProjectors,
};
use qmac::QmacError;

fn basis(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = r(1.0);
    v
}

fn min_slack(povm: &PovmSet) -> f64 {
    let sum = povm
        .elements()
        .iter()
        .fold(CMat::zeros(povm.dim(), povm.dim()), |a, e| a + e);
    *eigenvalues_hermitian(&(identity(povm.dim()) - sum))
        .unwrap()
        .last()
        .unwrap()
}

#[test]
fn single_message_povm() {
    let mut g = ChaCha8Rng::seed_from_u64(1);
    let pi = random_projector(3, 2, &mut g);
    let p = random_projector(3, 1, &mut g);
    let povm = sequential_povm(&[0], &pi, std::slice::from_ref(&p)).unwrap();
    assert!(qmac::qmat::max_abs(&(&povm.elements()[0] - &pi * &p * &pi)) < 1e-12);
    assert!(sequential_povm(&[0], &(&pi * r(0.5)), &[p]).is_err());
}

#[test]
fn orthogonal_codewords_are_decoded_perfectly() {
    let (a, b) = (outer(&basis(3, 0)), outer(&basis(3, 1)));
    let pi = &a + &b;
    let povm = sequential_povm(&[0, 1], &pi, &[a.clone(), b.clone()]).unwrap();
    assert!((povm.probability(0, &a) - 1.0).abs() < 1e-12);
    assert!((povm.probability(1, &b) - 1.0).abs() < 1e-12);
    assert!(
        (exact_success_probability(&povm, &[a.clone(), b.clone()]).unwrap() - 1.0).abs() < 1e-12
    );
    assert!(exact_success_probability(&povm, &[a]).is_err());
}

#[test]
fn uniform_guessing_succeeds_with_inverse_message_count() {
    let m = 5;
    let povm = PovmSet::new(3, vec![identity(3) * r(1.0 / m as f64); m]).unwrap();
    let states: Vec<CMat> = (0..m)
        .map(|i| random_density(3, 2, &mut ChaCha8Rng::seed_from_u64(i as u64)))
        .collect();
    assert!((exact_success_probability(&povm, &states).unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn random_sequential_povm_is_subnormalized() {
    let mut g = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let pi = random_projector(4, g.gen_range(1..=4), &mut g);
        let pis: Vec<CMat> = (0..3)
            .map(|_| random_projector(4, g.gen_range(1..=3), &mut g))
            .collect();
        let povm = sequential_povm(&[0, 1, 2], &pi, &pis).unwrap();
        assert!(min_slack(&povm) >= -1e-9);
        for e in povm.elements() {
            assert!(*eigenvalues_hermitian(e).unwrap().last().unwrap() >= -1e-12);
        }
    }
}

#[test]
fn identical_codewords_match_hand_expansion() {
    // Π = |a⟩⟨a|, Π_x = |b⟩⟨b|, c = |⟨a|b⟩|²: Λ_1 = c Π, Λ_2 = c (1 - c)² Π
    let mut g = ChaCha8Rng::seed_from_u64(3);
    let u = random_unitary(2, &mut g);
    let a = CVec::from_vec(vec![r(1.0), r(0.0)]);
    let b = u.column(0).into_owned();
    let c = (a.adjoint() * &b)[(0, 0)].norm_sqr();
    let rho = random_density(2, 2, &mut g);
    let raa = (a.adjoint() * &rho * &a)[(0, 0)].re;
    let expect = 0.5 * c * raa * (1.0 + (1.0 - c).powi(2));
    let povm = sequential_povm(&[0, 0], &outer(&a), &[outer(&b)]).unwrap();
    let got = exact_success_probability(&povm, &[rho.clone(), rho]).unwrap();
    assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
}

#[test]
fn exhaustive_expectation_trivial_cases() {
    let mut g = ChaCha8Rng::seed_from_u64(4);
    let pi = random_projector(3, 2, &mut g);
    let ens: Vec<(f64, CMat)> = vec![
        (0.3, random_density(3, 2, &mut g)),
        (0.7, random_density(3, 1, &mut g)),
    ];
    let pis: Vec<CMat> = (0..2).map(|_| random_projector(3, 1, &mut g)).collect();
    let direct: f64 = ens
        .iter()
        .zip(&pis)
        .map(|((p, rho), px)| p * tr_prod(&(&pi * px * &pi), rho))
        .sum();
    assert!((expected_success_exhaustive(&ens, &pi, &pis, 1).unwrap() - direct).abs() < 1e-12);
    // a one-letter alphabet has exactly one codebook
    let one = vec![(1.0, ens[0].1.clone())];
    let povm = sequential_povm(&[0, 0, 0], &pi, &pis[..1]).unwrap();
    let code = exact_success_probability(&povm, &vec![ens[0].1.clone(); 3]).unwrap();
    assert!((expected_success_exhaustive(&one, &pi, &pis[..1], 3).unwrap() - code).abs() < 1e-12);
    let big: Vec<(f64, CMat)> = (0..10).map(|_| (0.1, ens[0].1.clone())).collect();
    let big_p = vec![pis[0].clone(); 10];
    assert!(matches!(
        expected_success_exhaustive(&big, &pi, &big_p, 6),
        Err(QmacError::EnumerationCap { .. })
    ));
}

#[test]
fn exhaustive_expectation_matches_monte_carlo() {
    let mut g = ChaCha8Rng::seed_from_u64(5);
    let pi = random_projector(3, 2, &mut g);
    let ens: Vec<(f64, CMat)> = vec![
        (0.4, random_density(3, 1, &mut g)),
        (0.6, random_density(3, 2, &mut g)),
    ];
    let pis: Vec<CMat> = (0..2).map(|_| random_projector(3, 2, &mut g)).collect();
    let exact = expected_success_exhaustive(&ens, &pi, &pis, 2).unwrap();
    // the four codebooks' success values, then 1e5 draws
    let mut table = [[0.0; 2]; 2];
    for (x1, row) in table.iter_mut().enumerate() {
        for (x2, cell) in row.iter_mut().enumerate() {
            let povm = sequential_povm(&[x1, x2], &pi, &pis).unwrap();
            *cell =
                exact_success_probability(&povm, &[ens[x1].1.clone(), ens[x2].1.clone()]).unwrap();
        }
    }
    let draw = |g: &mut ChaCha8Rng| usize::from(g.gen::<f64>() >= 0.4);
    let samples: Vec<f64> = (0..100_000)
        .map(|_| table[draw(&mut g)][draw(&mut g)])
        .collect();
    let (mean, se) = mean_stderr(&samples);
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} ± {se} vs {exact}");
}

#[test]
fn packing_bound_examples() {
    let b = packing_bound_raw(0.01, 2f64.powi(-10), 32);
    assert!((b.value - 0.900_395_004_096_159_4).abs() < 1e-12 && b.flag.is_none());
    assert_eq!(
        packing_bound_raw(0.5, 0.01, 2),
        qmac::seqdecode::PackingBound {
            value: 0.0,
            flag: Some(BoundFlag::EpsilonTooLarge)
        }
    );
    assert_eq!(
        packing_bound_raw(0.1, 1.0, 2).flag,
        Some(BoundFlag::PositivityFails)
    );
    assert!((packing_bound_raw(0.0, 1e-15, 1).value - 1.0).abs() < 1e-12);
}

#[test]
fn diagnostics_on_orthogonal_codewords() {
    // W_1 = W̄_0 = I/k on the span, so f_z = k^{-z}
    let k = 3;
    let pis: Vec<CMat> = (0..k).map(|i| outer(&basis(4, i))).collect();
    let ens: Vec<(f64, CMat)> = pis.iter().map(|p| (1.0 / k as f64, p.clone())).collect();
    let pi = pis.iter().fold(CMat::zeros(4, 4), |a, p| a + p);
    let d = packing_diagnostics(&ens, &pi, &pis, 4).unwrap();
    for (z, f) in d.f.iter().enumerate() {
        assert!((f - (k as f64).powi(-(z as i32))).abs() < 1e-12);
    }
    assert!(d.f0_holds && d.ratio_holds && d.power_holds);
    let zero = packing_diagnostics(&ens, &CMat::zeros(4, 4), &pis, 3).unwrap();
    assert!(zero.f.iter().all(|f| f.abs() < 1e-15));
}

/// Noisy rotated basis states with rank-one codeword projectors.
fn noisy_basis(g: &mut ChaCha8Rng) -> (Vec<(f64, CMat)>, Vec<CMat>, CMat) {
    let d = g.gen_range(2..=8);
    let k = g.gen_range(1..=d);
    let noise = g.gen_range(0.0..0.2);
    let u = random_unitary(d, g);
    let (ens, pis) = (0..k)
        .map(|x| {
            let p = outer(&u.column(x).into_owned());
            (
                (
                    1.0 / k as f64,
                    &p * r(1.0 - noise) + identity(d) * r(noise / d as f64),
                ),
                p,
            )
        })
        .unzip();
    let pi = if g.gen_bool(0.5) {
        identity(d)
    } else {
        random_projector(d, d - 1, g)
    };
    (ens, pis, pi)
}

#[test]
fn exact_success_dominates_packing_bound() {
    let mut g = ChaCha8Rng::seed_from_u64(6);
    let mut tested = 0;
    for _ in 0..400 {
        let (ens, pis, pi) = noisy_basis(&mut g);
        let m = g.gen_range(1..=4);
        let diag = packing_diagnostics(&ens, &pi, &pis, 6).unwrap();
        assert!(diag.ratio_holds && diag.power_holds && diag.f0_holds);
        let bound = packing_lower_bound(&diag.constants, m);
        if bound.flag.is_some() {
            continue;
        }
        tested += 1;
        let exact = expected_success_exhaustive(&ens, &pi, &pis, m).unwrap();
        assert!(exact >= bound.value - 1e-12, "{exact} < {}", bound.value);
    }
    assert!(tested >= 50, "only {tested} qualifying instances");
}

fn bell() -> PureState {
    PureState::max_entangled("A'", "A", 2).unwrap()
}

#[test]
fn protocol_noiseless_single_message() {
    let rep = ea_sequential_protocol(
        &KrausChannel::from_spec("identity:2").unwrap(),
        &bell(),
        1,
        1,
        0.5,
        0,
        10,
    )
    .unwrap();
    assert!((rep.success_mean - 1.0).abs() < 1e-9);
    assert!(rep.exhaustive);
}

#[test]
fn protocol_noiseless_four_messages() {
    // at n = 1 the index set encodes |Φ+⟩ or |Φ-⟩ with probability 1/2 each; with orthogonal
    // codewords message m is decoded iff its letter differs from all earlier ones
    let expect = (1.0 + 0.5 + 0.25 + 0.125) / 4.0;
    let rep = ea_sequential_protocol(
        &KrausChannel::from_spec("identity:2").unwrap(),
        &bell(),
        1,
        4,
        2.0,
        0,
        10,
    )
    .unwrap();
    assert!(rep.exhaustive);
    assert!(
        (rep.success_mean - expect).abs() < 1e-9,
        "{}",
        rep.success_mean
    );
    assert!(rep.success_mean >= rep.bound - 1e-12);
}

#[test]
fn protocol_fully_depolarizing() {
    for m in [2, 3, 4] {
        let rep = ea_sequential_protocol(
            &KrausChannel::from_spec("depolarizing:1").unwrap(),
            &bell(),
            1,
            m,
            0.5,
            1,
            10,
        )
        .unwrap();
        assert!((rep.success_mean - 1.0 / m as f64).abs() < 1e-9);
    }
}

#[test]
fn protocol_monte_carlo_is_reproducible() {
    let ch = KrausChannel::from_spec("amplitude-damping:0.1").unwrap();
    let run = |seed| ea_sequential_protocol(&ch, &bell(), 2, 8, 0.6, seed, 12).unwrap();
    let (a, b) = (run(3), run(3));
    assert!(!a.exhaustive);
    assert_eq!(a, b);
    assert!((0.0..=1.0 + 1e-9).contains(&a.success_mean));
}

#[test]
fn successive_bound_examples() {
    let c = |epsilon, eps_prime, d2| SuccessiveConstants {
        epsilon,
        eps_prime,
        d1_minus: 1.0,
        d1_plus: 1.0,
        d2,
        big_d1: 1.0,
        l: 1,
        m: 1,
    };
    assert!((successive_bound(&c(0.0, 0.0, 1e-15)).clamped - 1.0).abs() < 1e-12);
    let b = successive_bound(&c(0.1, 0.1, 1e-15));
    assert!((b.raw - (0.64 - 2.0 * 0.4f64.sqrt())).abs() < 1e-12);
    assert_eq!(b.clamped, 0.0);
    assert!((SuccessiveConstants::min_eps_prime(1.0, 2, 4.0) - (0.5f64.exp() - 1.0)).abs() < 1e-15);
}

#[test]
fn successive_single_pair_orthogonal() {
    let p = outer(&basis(2, 1));
    let ens = DoubleEnsemble {
        px: vec![1.0],
        py: vec![1.0],
        states: vec![vec![p.clone()]],
    };
    let proj = SuccessiveProjectors {
        pi: p.clone(),
        pi_x: vec![p.clone()],
        pi_xy: vec![vec![p]],
    };
    assert!((successive_success(&[0], &[0], &ens, &proj).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn unassisted_exponents_give_mutual_information_ratio() {
    let (h_b, h_b_x, h_b_xy, n, delta) = (1.7, 0.9, 0.2, 12, 0.05);
    let e = SuccessiveExponents::unassisted(h_b, h_b_x, h_b_xy, n, delta);
    assert!((e.first_stage_gap() - n as f64 * ((h_b - h_b_x) - 2.0 * delta)).abs() < 1e-12);
    assert!((e.second_stage_gap() - n as f64 * ((h_b_x - h_b_xy) - 2.0 * delta)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn successive_povm_is_subnormalized(seed in any::<u64>(), l in 1usize..4, m in 1usize..4) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let d = g.gen_range(2..=5);
        let pi = random_projector(d, g.gen_range(1..=d), &mut g);
        let pi_x: Vec<CMat> = (0..2).map(|_| random_projector(d, g.gen_range(1..=d), &mut g)).collect();
        let pi_xy: Vec<Vec<CMat>> = (0..2).map(|_| (0..2).map(|_| random_projector(d, g.gen_range(1..=d), &mut g)).collect()).collect();
        let proj = SuccessiveProjectors { pi, pi_x, pi_xy };
        let cx: Vec<usize> = (0..l).map(|_| g.gen_range(0..2)).collect();
        let cy: Vec<usize> = (0..m).map(|_| g.gen_range(0..2)).collect();
        let povm = successive_povm(&cx, &cy, &proj).unwrap();
        prop_assert_eq!(povm.len(), l * m);
        prop_assert!(min_slack(&povm) >= -1e-9);
    }
}
