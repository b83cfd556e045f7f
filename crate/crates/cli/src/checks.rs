//! Fast invariant suite behind `qmac check`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmac::eacode::{transpose_trick_residual, TypeDecomposition};
use qmac::gaussian::{
    beamsplitter_symplectic, compare_regions, ea_bosonic_region, ea_bosonic_region_numeric,
    g_entropy, output_covariance, region_sweep, sum_gap, symplectic_eigenvalues,
    two_mode_symplectic_closed_form, BosonicMacParams, SymplecticMap,
};
use qmac::info::{ea_cc_region, ea_q_region, RateRegion};
use qmac::qmat::random::{random_psd, random_unitary};
use qmac::qmat::{identity, lambda_max, outer, r, CMat, KrausChannel, PureState};
use qmac::seqdecode::{
    expected_success_exhaustive, packing_diagnostics, packing_lower_bound, sequential_povm,
};
use qmac::simuldecode::{
    average_error, coherent_fidelity, coherent_isometry, hayashi_nagaoka_check, isometry_residual,
    max_error_via_randomization, povm_complete_within, uniform_amplitudes, MacCodePair,
    SimultaneousDecoder,
};
use qmac::Result;

const POVM_SLACK: f64 = 1e-9;

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn run(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult {
            name,
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn bounds(r: &RateRegion) -> [f64; 3] {
    [r.r1, r.r2, r.sum]
}

pub fn run_all() -> Vec<CheckResult> {
    vec![
        run(
            "closed-form region matches symplectic spectra",
            closed_vs_numeric,
        ),
        run("symmetric sum bound is constant", symmetric_sum),
        run("containment flags", containment),
        run("sum gap non-negative", sum_gap_sign),
        run("two-mode symplectic eigenvalues", hand_check),
        run("beamsplitter is symplectic", beamsplitter),
        run("packing bound below exact success", packing),
        run("transpose trick", transpose_trick),
        run("operator inequality gap", operator_gap),
        run("randomization identity and completeness", randomization),
        run("super-dense coding region", superdense),
        run("coherent decoder", coherent),
    ]
}

fn closed_vs_numeric() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for eta in [0.05, 0.3, 0.5, 0.95] {
        for (a, b) in [(0.1, 1000.0), (1.0, 1.0), (10.0, 0.1), (1000.0, 10.0)] {
            let p = BosonicMacParams::new(eta, a, b)?;
            let (c, n) = (ea_bosonic_region(&p)?, ea_bosonic_region_numeric(&p)?);
            for (x, y) in bounds(&c).iter().zip(bounds(&n)) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max difference {worst:.3e}")))
}

fn symmetric_sum() -> Result<(bool, String)> {
    let target = 2.0 * g_entropy(10.0)?;
    let etas: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let worst = region_sweep(10.0, 10.0, &etas)?
        .iter()
        .map(|r| (r.ea.sum - target).abs())
        .fold(0.0, f64::max);
    Ok((
        worst <= 1e-10,
        format!("max deviation from 2 g(10): {worst:.3e}"),
    ))
}

fn containment() -> Result<(bool, String)> {
    let yes = compare_regions(&BosonicMacParams::new(0.5, 10.0, 8.0)?)?.ea_contains_ys;
    let no = compare_regions(&BosonicMacParams::new(0.95, 1.0, 1.0)?)?.ea_contains_ys;
    Ok((
        yes && !no,
        format!("(10, 8, 0.5): {yes}, (1, 1, 0.95): {no}"),
    ))
}

fn sum_gap_sign() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let p = BosonicMacParams::new(
            rng.gen(),
            10f64.powf(rng.gen_range(-2.0..3.0)),
            10f64.powf(rng.gen_range(-2.0..3.0)),
        )?;
        worst = worst.min(sum_gap(&p)?);
    }
    Ok((worst >= -1e-9, format!("smallest gap {worst:.3e}")))
}

fn hand_check() -> Result<(bool, String)> {
    let v = output_covariance(&BosonicMacParams::new(0.5, 1.0, 1.0)?)?.select(&["A", "C"])?;
    let nu = symplectic_eigenvalues(&v)?;
    let (p, m) = two_mode_symplectic_closed_form(v.matrix())?;
    let s5 = 5f64.sqrt();
    let dev = [nu[0] - s5, nu[1] - s5, p - s5, m - s5]
        .iter()
        .fold(0.0f64, |a, x| a.max(x.abs()));
    Ok((dev <= 1e-10, format!("nu = {:.12}, {:.12}", nu[0], nu[1])))
}

fn beamsplitter() -> Result<(bool, String)> {
    let s = beamsplitter_symplectic(0.37)?;
    Ok((
        SymplecticMap::new(s.matrix().clone()).is_ok(),
        "S J S^T = J at eta = 0.37".into(),
    ))
}

/// Noisy rotated basis states with rank-one codeword projectors.
fn basis_ensemble(
    rng: &mut ChaCha8Rng,
    d: usize,
    k: usize,
    noise: f64,
) -> (Vec<(f64, CMat)>, Vec<CMat>) {
    let u = random_unitary(d, rng);
    let mixed = identity(d) * r(noise / d as f64);
    (0..k)
        .map(|x| {
            let p = outer(&u.column(x % d).into_owned());
            ((1.0 / k as f64, &p * r(1.0 - noise) + &mixed), p)
        })
        .unzip()
}

fn packing() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut tested, mut ok) = (0, true);
    let mut attempts = 0;
    while tested < 10 && attempts < 200 {
        attempts += 1;
        let d = rng.gen_range(2..=8);
        let noise = rng.gen_range(0.0..0.1);
        let (ens, pis) = basis_ensemble(&mut rng, d, d, noise);
        let pi = identity(d);
        let m = rng.gen_range(1..=4usize);
        let diag = packing_diagnostics(&ens, &pi, &pis, m)?;
        let bound = packing_lower_bound(&diag.constants, m);
        if bound.flag.is_some() {
            continue;
        }
        tested += 1;
        let exact = expected_success_exhaustive(&ens, &pi, &pis, m)?;
        let povm = sequential_povm(&(0..m).map(|i| i % d).collect::<Vec<_>>(), &pi, &pis)?;
        ok &= exact >= bound.value - 1e-12 && diag.f0_holds && diag.power_holds;
        ok &= povm_complete_within(&povm, POVM_SLACK);
    }
    Ok((ok && tested == 10, format!("{tested} qualifying ensembles")))
}

fn transpose_trick() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let states = [
        PureState::max_entangled("A'", "A", 2)?,
        PureState::schmidt_diagonal("A'", "A", &[0.6, 0.3, 0.1])?,
    ];
    let mut worst = 0.0f64;
    for phi in &states {
        let dec = TypeDecomposition::new(phi, 2)?;
        for _ in 0..20 {
            worst = worst.max(transpose_trick_residual(&dec, &dec.sample_index(&mut rng))?);
        }
    }
    Ok((worst < 1e-10, format!("max residual {worst:.3e}")))
}

fn operator_gap() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::INFINITY;
    for _ in 0..40 {
        let d = rng.gen_range(2..=6);
        let s0 = random_psd(d, rng.gen_range(1..=d), &mut rng);
        let s = &s0 * r(rng.gen_range(0.1..1.0) / lambda_max(&s0)?);
        let t = random_psd(d, rng.gen_range(1..=d), &mut rng) * r(rng.gen_range(0.0..2.0));
        worst = worst.min(hayashi_nagaoka_check(&s, &t)?.min_gap_eigenvalue);
    }
    Ok((
        worst >= -1e-9,
        format!("smallest gap eigenvalue {worst:.3e}"),
    ))
}

fn bell_inputs() -> Result<(PureState, PureState)> {
    Ok((
        PureState::max_entangled("A'", "A", 2)?,
        PureState::max_entangled("B'", "B", 2)?,
    ))
}

fn randomization() -> Result<(bool, String)> {
    let (phi, psi) = bell_inputs()?;
    let dec = SimultaneousDecoder::new(&KrausChannel::from_spec("cnot-mac")?, &phi, &psi, 1, 0.5)?;
    let mut worst = 0.0f64;
    let mut complete = true;
    for (i, (l, m)) in [(1, 2), (2, 2), (3, 2), (2, 4)].into_iter().enumerate() {
        let pair = MacCodePair::sample(&dec.setup, l, m, 100 + i as u64);
        let povm = dec.povm(&pair)?;
        let gap = (average_error(&dec.setup, &pair, &povm)?
            - max_error_via_randomization(&dec.setup, &pair, &povm)?)
        .abs();
        worst = worst.max(gap);
        complete &= povm_complete_within(&povm, POVM_SLACK);
        complete &= povm_complete_within(&dec.successive_povm(&pair)?, POVM_SLACK);
    }
    Ok((
        worst <= 1e-12 && complete,
        format!("max difference {worst:.3e}, POVMs complete: {complete}"),
    ))
}

fn superdense() -> Result<(bool, String)> {
    let (phi, psi) = bell_inputs()?;
    let ch = KrausChannel::parallel_identity_mac(2, 2)?;
    let (cc, q) = (
        ea_cc_region(&ch, &phi, &psi)?,
        ea_q_region(&ch, &phi, &psi)?,
    );
    let dev = bounds(&cc)
        .iter()
        .zip([2.0, 2.0, 4.0])
        .chain(bounds(&q).iter().zip([1.0, 1.0, 2.0]))
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    Ok((
        dev <= 1e-12,
        format!("classical {:?}, quantum {:?}", bounds(&cc), bounds(&q)),
    ))
}

fn coherent() -> Result<(bool, String)> {
    let (phi, psi) = bell_inputs()?;
    let dec = SimultaneousDecoder::new(&KrausChannel::from_spec("cnot-mac")?, &phi, &psi, 1, 0.5)?;
    let pair = MacCodePair::sample(&dec.setup, 2, 2, 7);
    let povm = dec.povm(&pair)?;
    let res = isometry_residual(&coherent_isometry(&povm)?);
    let err = average_error(&dec.setup, &pair, &povm)?;
    let fid = coherent_fidelity(
        &dec.setup,
        &pair,
        &povm,
        &uniform_amplitudes(1, 2),
        &uniform_amplitudes(1, 2),
    )?;
    Ok((
        res <= 1e-9 && fid >= 1.0 - err - 1e-12,
        format!(
            "isometry residual {res:.3e}, fidelity {fid:.6} vs 1 - error {:.6}",
            1.0 - err
        ),
    ))
}
