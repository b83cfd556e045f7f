use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qmac::qmat::random::{random_density, random_matrix, random_psd, random_unitary};
use qmac::qmat::{
    amplitude_damping, apply_channel, c, channel_from_json, channel_to_json, eig_hermitian,
    eigenvalues_hermitian, identity, max_abs, named_channel, operator_power, partial_trace, r,
    tensor, tr, CMat, FactorSpace, KrausChannel, Operator, PureState,
};
use qmac::QmacError;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn op(labels: &[&str], dims: &[usize], m: CMat) -> Operator {
    Operator::new(FactorSpace::new(labels, dims).unwrap(), m).unwrap()
}

fn diag(v: &[f64]) -> CMat {
    CMat::from_fn(
        v.len(),
        v.len(),
        |i, j| if i == j { r(v[i]) } else { r(0.0) },
    )
}

/// Channel with `k` Kraus operators cut from a random isometry.
fn random_channel(d: usize, k: usize, rng: &mut ChaCha8Rng) -> KrausChannel {
    let u = random_unitary(d * k, rng);
    let kraus = (0..k)
        .map(|i| u.view((i * d, 0), (d, d)).into_owned())
        .collect();
    KrausChannel::new(
        FactorSpace::single("A'", d).unwrap(),
        FactorSpace::single("B", d).unwrap(),
        kraus,
    )
    .unwrap()
}

#[test]
fn tensor_identities_and_basis() {
    let i2 = op(&["A"], &[2], identity(2));
    let j2 = op(&["B"], &[2], identity(2));
    assert_eq!(tensor(&[&i2, &j2]).unwrap().matrix(), &identity(4));
    let p0 = op(&["A"], &[2], diag(&[1.0, 0.0]));
    let p1 = op(&["B"], &[2], diag(&[0.0, 1.0]));
    let t = tensor(&[&p0, &p1]).unwrap();
    assert_eq!(t.matrix(), &diag(&[0.0, 1.0, 0.0, 0.0]));
    assert_eq!(t.space().labels(), &["A".to_string(), "B".to_string()]);
}

#[test]
fn tensor_trace_is_product_of_traces() {
    let mut g = rng(1);
    let a = random_psd(3, 3, &mut g);
    let b = random_psd(3, 2, &mut g);
    let t = tensor(&[&op(&["A"], &[3], a.clone()), &op(&["B"], &[3], b.clone())]).unwrap();
    // oracle: Σ_{ij} a_ii b_jj
    let mut expect = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            expect += (a[(i, i)] * b[(j, j)]).re;
        }
    }
    assert!((t.trace() - expect).abs() < 1e-12);
    assert!((t.trace() - tr(&a) * tr(&b)).abs() < 1e-12);
}

#[test]
fn tensor_rejects_duplicates_and_cap() {
    let a = op(&["A"], &[2], identity(2));
    assert!(matches!(
        tensor(&[&a, &a]),
        Err(QmacError::DuplicateLabel(_))
    ));
    let big = FactorSpace::with_cap(&["A", "B"], &[64, 128], 4096);
    assert!(matches!(big, Err(QmacError::DimensionCap { .. })));
}

#[test]
fn partial_trace_of_bell_and_product() {
    let bell = PureState::max_entangled("A", "B", 2).unwrap().density();
    let ra = partial_trace(&bell, &["A"]).unwrap();
    assert!(max_abs(&(ra.matrix() - identity(2) * r(0.5))) < 1e-12);
    let mut g = rng(2);
    let rho = random_density(2, 2, &mut g);
    let sigma = random_density(3, 3, &mut g);
    let t = tensor(&[&op(&["A"], &[2], rho.clone()), &op(&["B"], &[3], sigma)]).unwrap();
    assert!(max_abs(&(partial_trace(&t, &["A"]).unwrap().matrix() - rho)) < 1e-12);
    assert!(matches!(
        partial_trace(&t, &["Z"]),
        Err(QmacError::UnknownLabel(_))
    ));
}

#[test]
fn partial_trace_matches_index_sum() {
    let m = random_density(6, 6, &mut rng(3));
    let rho = op(&["A", "B"], &[2, 3], m.clone());
    let ra = partial_trace(&rho, &["A"]).unwrap();
    let rb = partial_trace(&rho, &["B"]).unwrap();
    for a in 0..2 {
        for a2 in 0..2 {
            let s: num_complex::Complex64 = (0..3).map(|b| m[(a * 3 + b, a2 * 3 + b)]).sum();
            assert!((ra.matrix()[(a, a2)] - s).norm() < 1e-12);
        }
    }
    for b in 0..3 {
        for b2 in 0..3 {
            let s: num_complex::Complex64 = (0..2).map(|a| m[(a * 3 + b, a * 3 + b2)]).sum();
            assert!((rb.matrix()[(b, b2)] - s).norm() < 1e-12);
        }
    }
}

#[test]
fn eig_small_cases() {
    let e = eig_hermitian(&diag(&[3.0, 1.0, 2.0])).unwrap();
    assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
    let x = CMat::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)]);
    let e = eig_hermitian(&x).unwrap();
    assert!((e.values[0] - 1.0).abs() < 1e-12 && (e.values[1] + 1.0).abs() < 1e-12);
    let plus = e.vectors.column(0);
    // |+⟩ up to phase: equal-magnitude entries with the same phase
    assert!((plus[0].norm() - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((plus[0] - plus[1]).norm() < 1e-12);
}

#[test]
fn eig_reconstructs_random_hermitian() {
    let a = random_matrix(6, 6, &mut rng(4));
    let h = (&a + a.adjoint()) * r(0.5);
    let e = eig_hermitian(&h).unwrap();
    assert!(max_abs(&(e.map(|l| l) - &h)) < 1e-9);
    assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn operator_power_cases() {
    assert!(max_abs(&(operator_power(&identity(3), -0.5, 1e-12).unwrap() - identity(3))) < 1e-12);
    let p = diag(&[1.0, 0.0, 1.0]);
    let q = operator_power(&(&p * r(4.0)), -0.5, 1e-12).unwrap();
    assert!(max_abs(&(q - &p * r(0.5))) < 1e-12);
    let m = random_psd(5, 5, &mut rng(5));
    let s = operator_power(&m, 0.5, 1e-12).unwrap();
    assert!(max_abs(&(&s * &s - &m)) < 1e-9);
    assert!(matches!(
        operator_power(&diag(&[1.0, -0.1]), 0.5, 1e-12),
        Err(QmacError::NegativeEigenvalue(_))
    ));
}

#[test]
fn channel_examples() {
    let mut g = rng(6);
    let rho = random_density(3, 2, &mut g);
    let id = named_channel("identity:3").unwrap();
    let out = apply_channel(&id, &op(&["A'"], &[3], rho.clone()), &["A'"]).unwrap();
    assert!(max_abs(&(out.matrix() - &rho)) < 1e-12);
    let dep = named_channel("depolarizing:1").unwrap();
    let out = apply_channel(
        &dep,
        &op(&["A'"], &[2], random_density(2, 1, &mut g)),
        &["A'"],
    )
    .unwrap();
    assert!(max_abs(&(out.matrix() - identity(2) * r(0.5))) < 1e-12);
    // K0 = diag(1, √0.7), K1 = √0.3 |0⟩⟨1|: |1⟩⟨1| ↦ diag(0.3, 0.7)
    let ad = amplitude_damping(0.3).unwrap();
    let out = apply_channel(&ad, &op(&["A'"], &[2], diag(&[0.0, 1.0])), &["A'"]).unwrap();
    assert!(max_abs(&(out.matrix() - diag(&[0.3, 0.7]))) < 1e-12);
}

#[test]
fn channel_acts_on_named_factor_only() {
    let bell = PureState::max_entangled("A'", "A", 2).unwrap().density();
    let out = apply_channel(&named_channel("depolarizing:1").unwrap(), &bell, &["A'"]).unwrap();
    assert!(max_abs(&(out.matrix() - identity(4) * r(0.25))) < 1e-12);
    assert!(apply_channel(&named_channel("identity:2").unwrap(), &bell, &["Q"]).is_err());
}

#[test]
fn named_channels_are_trace_preserving() {
    for spec in [
        "identity:2",
        "identity:5",
        "depolarizing:0.3",
        "depolarizing:0.7:3",
        "amplitude-damping:0.4",
        "cnot-mac",
        "adder-mac",
    ] {
        let ch = KrausChannel::from_spec(spec).unwrap();
        let sum = ch.kraus().iter().fold(
            CMat::zeros(ch.in_space().dim(), ch.in_space().dim()),
            |a, k| a + k.adjoint() * k,
        );
        assert!(
            max_abs(&(sum - identity(ch.in_space().dim()))) < 1e-10,
            "{spec}"
        );
    }
    assert!(named_channel("depolarizing:1.5").is_err());
    assert!(named_channel("teleporter").is_err());
}

#[test]
fn json_channel_round_trip() {
    let ch = KrausChannel::parallel_identity_mac(2, 2).unwrap();
    let text = serde_json::to_string(&channel_to_json(&ch)).unwrap();
    let back = channel_from_json(&text).unwrap();
    assert_eq!(back.in_space().dims(), &[2, 2]);
    assert_eq!(back.out_space().dim(), 4);
    for (a, b) in ch.kraus().iter().zip(back.kraus()) {
        assert!(max_abs(&(a - b)) == 0.0);
    }
    let bad = r#"{"in_dims":[2],"out_dims":[2],"kraus":[[[0.5,0],[0,0],[0,0],[0.5,0]]]}"#;
    assert!(matches!(
        channel_from_json(bad),
        Err(QmacError::NotTracePreserving(_))
    ));
}

#[test]
fn cnot_mac_output() {
    // |a⟩|b⟩ ↦ |a ⊕ b⟩ once the control is discarded
    let ch = named_channel("cnot-mac").unwrap();
    for a in 0..2 {
        for b in 0..2 {
            let mut rho = CMat::zeros(4, 4);
            rho[(2 * a + b, 2 * a + b)] = c(1.0, 0.0);
            let out = apply_channel(&ch, &op(&["A'", "B'"], &[2, 2], rho), &["A'", "B'"]).unwrap();
            assert!((out.matrix()[(a ^ b, a ^ b)].re - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_inverts_tensor(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut g = rng(seed);
        let rho = random_density(da, da, &mut g);
        let sigma = random_density(db, db, &mut g);
        let t = tensor(&[&op(&["A"], &[da], rho.clone()), &op(&["B"], &[db], sigma)]).unwrap();
        prop_assert!(max_abs(&(partial_trace(&t, &["A"]).unwrap().matrix() - rho)) <= 1e-12);
    }

    #[test]
    fn eigenvectors_orthonormal(seed in any::<u64>(), d in 1usize..8) {
        let a = random_matrix(d, d, &mut rng(seed));
        let e = eig_hermitian(&(&a + a.adjoint())).unwrap();
        prop_assert!(max_abs(&(e.vectors.adjoint() * &e.vectors - identity(d))) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn channels_preserve_trace_and_positivity(seed in any::<u64>()) {
        let mut g = rng(seed);
        for d in 2..=4 {
            let ch = random_channel(d, 1 + (seed as usize % 3), &mut g);
            let rho = random_density(d, d, &mut g);
            let out = apply_channel(&ch, &op(&["A'"], &[d], rho), &["A'"]).unwrap();
            prop_assert!((out.trace() - 1.0).abs() <= 1e-9);
            let lo = *eigenvalues_hermitian(out.matrix()).unwrap().last().unwrap();
            prop_assert!(lo >= -1e-9);
        }
    }
}
