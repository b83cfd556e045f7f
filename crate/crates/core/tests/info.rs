use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qmac::info::{
    coherent_information, conditional_mutual_information, ea_cc_region, ea_q_region, entropy,
    lsd_q_region, mutual_information, unassisted_cc_region, von_neumann_entropy, RateRegion,
};
use qmac::qmat::random::{random_density, random_matrix};
use qmac::qmat::{identity, r, CMat, CVec, FactorSpace, KrausChannel, Operator, PureState, C64};

const H_01: f64 = 0.468_995_593_589_281_2;

fn op(labels: &[&str], dims: &[usize], m: CMat) -> Operator {
    Operator::new(FactorSpace::new(labels, dims).unwrap(), m).unwrap()
}

fn ket(dims: &[usize], amps: &[(usize, f64)]) -> CVec {
    let d: usize = dims.iter().product();
    let mut v = CVec::zeros(d);
    for &(i, a) in amps {
        v[i] = C64::new(a, 0.0);
    }
    v
}

fn bell_pair(a: &str, b: &str) -> PureState {
    PureState::max_entangled(a, b, 2).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn entropy_examples() {
    let pure = ket(&[2], &[(0, 0.6), (1, 0.8)]);
    assert!(
        von_neumann_entropy(&(&pure * pure.adjoint()))
            .unwrap()
            .abs()
            < 1e-12
    );
    assert!(close(
        von_neumann_entropy(&(identity(2) * r(0.5))).unwrap(),
        1.0,
        1e-12
    ));
    let d = CMat::from_diagonal(&CVec::from_vec(vec![r(0.9), r(0.1)]));
    assert!(close(von_neumann_entropy(&d).unwrap(), H_01, 1e-12));
}

#[test]
fn mutual_information_examples() {
    let bell = bell_pair("A", "B").density();
    assert!(close(
        mutual_information(&bell, &["A"], &["B"]).unwrap(),
        2.0,
        1e-12
    ));
    let prod = op(&["A", "B"], &[2, 2], identity(4) * r(0.25));
    assert!(mutual_information(&prod, &["A"], &["B"]).unwrap().abs() < 1e-12);
    let mut cc = CMat::zeros(4, 4);
    cc[(0, 0)] = r(0.5);
    cc[(3, 3)] = r(0.5);
    assert!(close(
        mutual_information(&op(&["A", "B"], &[2, 2], cc), &["A"], &["B"]).unwrap(),
        1.0,
        1e-12
    ));
    assert!(mutual_information(&bell, &["A"], &["A"]).is_err());
}

#[test]
fn conditional_mutual_information_examples() {
    // Bell(A, C) ⊗ (I/2)_B
    let bell = bell_pair("A", "C").density();
    let mixed = op(&["B"], &[2], identity(2) * r(0.5));
    let rho = qmac::qmat::tensor(&[&bell, &mixed]).unwrap();
    assert!(close(
        conditional_mutual_information(&rho, &["A"], &["C"], &["B"]).unwrap(),
        2.0,
        1e-12
    ));
    let s = 0.5f64.sqrt();
    let ghz = ket(&[2, 2, 2], &[(0, s), (7, s)]);
    let ghz = op(&["A", "B", "C"], &[2, 2, 2], &ghz * ghz.adjoint());
    // H(AC) + H(BC) - H(C) - H(ABC) = 1 + 1 - 1 - 0 = 1
    assert!(close(
        conditional_mutual_information(&ghz, &["A"], &["B"], &["C"]).unwrap(),
        1.0,
        1e-12
    ));
    // dephasing the GHZ leaves the classical copy state, where I(A;B|C) vanishes
    let mut deph = CMat::zeros(8, 8);
    deph[(0, 0)] = r(0.5);
    deph[(7, 7)] = r(0.5);
    let deph = op(&["A", "B", "C"], &[2, 2, 2], deph);
    assert!(
        conditional_mutual_information(&deph, &["A"], &["B"], &["C"])
            .unwrap()
            .abs()
            < 1e-12
    );
    let prod = ket(&[2, 2, 2], &[(5, 1.0)]);
    let prod = op(&["A", "B", "C"], &[2, 2, 2], &prod * prod.adjoint());
    assert!(
        conditional_mutual_information(&prod, &["A"], &["B"], &["C"])
            .unwrap()
            .abs()
            < 1e-12
    );
}

#[test]
fn coherent_information_examples() {
    let bell = bell_pair("A", "B").density();
    assert!(close(
        coherent_information(&bell, &["A"], &["B"]).unwrap(),
        1.0,
        1e-12
    ));
    let mixed = op(&["A", "B"], &[2, 2], identity(4) * r(0.25));
    assert!(close(
        coherent_information(&mixed, &["A"], &["B"]).unwrap(),
        -1.0,
        1e-12
    ));
    let sch = PureState::schmidt_diagonal("A", "B", &[0.9, 0.1])
        .unwrap()
        .density();
    assert!(close(
        coherent_information(&sch, &["A"], &["B"]).unwrap(),
        H_01,
        1e-12
    ));
}

fn assert_region(r: &RateRegion, expect: [f64; 3], tol: f64) {
    assert!(
        close(r.r1, expect[0], tol) && close(r.r2, expect[1], tol) && close(r.sum, expect[2], tol),
        "{r:?} vs {expect:?}"
    );
}

#[test]
fn superdense_regions() {
    let ch = KrausChannel::parallel_identity_mac(2, 2).unwrap();
    let (phi, psi) = (bell_pair("A'", "A"), bell_pair("B'", "B"));
    assert_region(
        &ea_cc_region(&ch, &phi, &psi).unwrap(),
        [2.0, 2.0, 4.0],
        1e-12,
    );
    assert_region(
        &ea_q_region(&ch, &phi, &psi).unwrap(),
        [1.0, 1.0, 2.0],
        1e-12,
    );
    assert_region(
        &lsd_q_region(&ch, &phi, &psi).unwrap().region,
        [1.0, 1.0, 2.0],
        1e-12,
    );
}

#[test]
fn depolarized_mac_regions_vanish() {
    let ch = KrausChannel::completely_depolarizing(&[2, 2], 2).unwrap();
    let (phi, psi) = (bell_pair("A'", "A"), bell_pair("B'", "B"));
    assert_region(
        &ea_cc_region(&ch, &phi, &psi).unwrap(),
        [0.0, 0.0, 0.0],
        1e-12,
    );
    let lsd = lsd_q_region(&ch, &phi, &psi).unwrap();
    assert_region(&lsd.region, [0.0, 0.0, 0.0], 0.0);
    assert!(lsd.raw_sum < 0.0);
}

/// `ρ^{ABC}` of the CNOT MAC with Bell inputs, built by explicit index loops over
/// `|a'⟩_{A'} |a⟩_A |b'⟩_{B'} |b⟩_B` and a trace over the control `A'`.
fn cnot_state_by_hand() -> CMat {
    // amplitude of |a', a, c, b⟩ after CNOT: (1/2) δ_{a'a} δ_{c, b ⊕ a'} with b' = b
    let amp = |ap: usize, a: usize, cc: usize, b: usize| {
        if ap == a && cc == (b ^ ap) {
            0.5
        } else {
            0.0
        }
    };
    let mut rho = CMat::zeros(8, 8);
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        for c2 in 0..2 {
                            let v: f64 = (0..2)
                                .map(|ap| amp(ap, a, cc, b) * amp(ap, a2, c2, b2))
                                .sum();
                            rho[(a * 4 + b * 2 + cc, a2 * 4 + b2 * 2 + c2)] = r(v);
                        }
                    }
                }
            }
        }
    }
    rho
}

#[test]
fn cnot_region_matches_hand_state() {
    let rho = op(&["A", "B", "C"], &[2, 2, 2], cnot_state_by_hand());
    let h = |l: &[&str]| entropy(&rho, l).unwrap();
    let expect = [
        h(&["A", "B"]) + h(&["B", "C"]) - h(&["B"]) - h(&["A", "B", "C"]),
        h(&["A", "B"]) + h(&["A", "C"]) - h(&["A"]) - h(&["A", "B", "C"]),
        h(&["A", "B"]) + h(&["C"]) - h(&["A", "B", "C"]),
    ];
    let region = ea_cc_region(
        &KrausChannel::from_spec("cnot-mac").unwrap(),
        &bell_pair("A'", "A"),
        &bell_pair("B'", "B"),
    )
    .unwrap();
    assert_region(&region, expect, 1e-10);
    assert_region(&region, [1.0, 2.0, 2.0], 1e-10);
}

fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

fn basis_ensemble() -> Vec<(f64, CMat)> {
    (0..2)
        .map(|i| {
            let mut m = CMat::zeros(2, 2);
            m[(i, i)] = r(1.0);
            (0.5, m)
        })
        .collect()
}

/// Entropy of the marginal of a joint law on `(x, y, c)` keeping the flagged coordinates.
fn marginal_entropy(joint: &[((usize, usize, usize), f64)], keep: [bool; 3]) -> f64 {
    let mut acc: Vec<((usize, usize, usize), f64)> = Vec::new();
    for &((x, y, c), p) in joint {
        let key = (
            if keep[0] { x } else { 0 },
            if keep[1] { y } else { 0 },
            if keep[2] { c } else { 0 },
        );
        match acc.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 += p,
            None => acc.push((key, p)),
        }
    }
    shannon(&acc.iter().map(|e| e.1).collect::<Vec<_>>())
}

#[test]
fn adder_unassisted_region_matches_shannon_oracle() {
    let mut joint = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for c in 0..3 {
                joint.push(((x, y, c), if c == x + y { 0.25 } else { 0.0 }));
            }
        }
    }
    let h = |k: [bool; 3]| marginal_entropy(&joint, k);
    let (t, f) = (true, false);
    // I(X;C|Y) = H(XY) + H(YC) - H(Y) - H(XYC), and symmetrically
    let expect = [
        h([t, t, f]) + h([f, t, t]) - h([f, t, f]) - h([t, t, t]),
        h([t, t, f]) + h([t, f, t]) - h([t, f, f]) - h([t, t, t]),
        h([t, t, f]) + h([f, f, t]) - h([t, t, t]),
    ];
    let region = unassisted_cc_region(
        &KrausChannel::from_spec("adder-mac").unwrap(),
        &basis_ensemble(),
        &basis_ensemble(),
    )
    .unwrap();
    assert_region(&region, expect, 1e-12);
    assert_region(&region, [1.0, 1.0, 1.5], 1e-12);
}

#[test]
fn unassisted_degenerate_and_identity_cases() {
    let adder = KrausChannel::from_spec("adder-mac").unwrap();
    let det = vec![(1.0, basis_ensemble()[0].1.clone())];
    assert_region(
        &unassisted_cc_region(&adder, &det, &det).unwrap(),
        [0.0, 0.0, 0.0],
        1e-12,
    );
    // C = A', B' discarded
    let mut kraus = Vec::new();
    for b in 0..2 {
        let mut k = CMat::zeros(2, 4);
        for a in 0..2 {
            k[(a, a * 2 + b)] = r(1.0);
        }
        kraus.push(k);
    }
    let ch = KrausChannel::new(
        FactorSpace::new(&["A'", "B'"], &[2, 2]).unwrap(),
        FactorSpace::single("C", 2).unwrap(),
        kraus,
    )
    .unwrap();
    let region = unassisted_cc_region(&ch, &basis_ensemble(), &basis_ensemble()).unwrap();
    assert!(close(region.r1, 1.0, 1e-12) && region.r2.abs() < 1e-12);
    let bad = vec![(0.7, basis_ensemble()[0].1.clone())];
    assert!(unassisted_cc_region(&adder, &bad, &basis_ensemble()).is_err());
}

fn random_tripartite(seed: u64, dc: usize) -> Operator {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    let d = 4 * dc;
    op(
        &["A", "B", "C"],
        &[2, 2, dc],
        random_density(d, 1 + (seed as usize % d), &mut g),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn strong_subadditivity(seed in any::<u64>()) {
        for dc in [2, 3] {
            let rho = random_tripartite(seed, dc);
            prop_assert!(conditional_mutual_information(&rho, &["A"], &["C"], &["B"]).unwrap() >= -1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn region_vertices_satisfy_bounds(seed in any::<u64>()) {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(2, 2, &mut g);
        let (p0, p1) = (a[(0, 0)].norm() + 0.05, a[(1, 1)].norm() + 0.05);
        let phi = PureState::schmidt_diagonal("A'", "A", &[p0 / (p0 + p1), p1 / (p0 + p1)]).unwrap();
        let psi = bell_pair("B'", "B");
        for spec in ["cnot-mac", "adder-mac"] {
            let ch = KrausChannel::from_spec(spec).unwrap();
            let cc = ea_cc_region(&ch, &phi, &psi).unwrap();
            for v in &cc.vertices {
                prop_assert!(v[0] >= -1e-9 && v[1] >= -1e-9);
                prop_assert!(v[0] <= cc.r1 + 1e-9 && v[1] <= cc.r2 + 1e-9 && v[0] + v[1] <= cc.sum + 1e-9);
            }
            let q = ea_q_region(&ch, &phi, &psi).unwrap();
            prop_assert_eq!([q.r1, q.r2, q.sum], [cc.r1 * 0.5, cc.r2 * 0.5, cc.sum * 0.5]);
        }
    }

    #[test]
    fn coherent_information_of_pure_state(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let v = random_matrix(da * db, 1, &mut ChaCha8Rng::seed_from_u64(seed));
        let v = &v / C64::new(v.norm(), 0.0);
        let rho = op(&["A", "B"], &[da, db], &v * v.adjoint());
        let hb = entropy(&rho, &["B"]).unwrap();
        prop_assert!((coherent_information(&rho, &["A"], &["B"]).unwrap() - hb).abs() <= 1e-9);
    }
}
