//! Sequential decoders: the packing decoder with its lower bound and `f_z` diagnostics, the
//! end-to-end assisted point-to-point protocol, and the two-stage successive MAC decoder.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eacode::{sample_code, HwIndex, PointToPointSetup};
use crate::error::{QmacError, Result};
use crate::format::derive_seed;
use crate::qmat::{
    check_projector, identity, kron, lambda_max, min_eig_on_support, r, tr, tr_prod, CMat,
    KrausChannel, PovmSet, PureState,
};
use crate::typicality::{measure_packing_constants, typical_projector_grouped, PackingConstants};

/// Exhaustive enumeration is used when the number of codebooks is at most this.
pub const EXHAUSTIVE_CAP: u128 = 100_000;

const PROJ_TOL: f64 = 1e-8;

fn check_projectors(pi: &CMat, pis: &[CMat]) -> Result<()> {
    check_projector(pi, PROJ_TOL)?;
    for p in pis {
        if p.nrows() != pi.nrows() {
            return Err(QmacError::ShapeMismatch(
                "projectors of different dimensions".into(),
            ));
        }
        check_projector(p, PROJ_TOL)?;
    }
    Ok(())
}

/// `Q̄_x = Π (I - Π_x) Π`.
fn q_bar(pi: &CMat, px: &CMat) -> CMat {
    let q = identity(pi.nrows()) - px;
    pi * q * pi
}

/// Kraus operators `A_m = Π_{c_m} Π Q̄_{c_{m-1}} ⋯ Q̄_{c_1}` with `Λ_m = A_m† A_m`.
pub fn sequential_kraus(code: &[usize], pi: &CMat, pis: &[CMat]) -> Result<Vec<CMat>> {
    check_projectors(pi, pis)?;
    if let Some(&bad) = code.iter().find(|&&c| c >= pis.len()) {
        return Err(QmacError::InvalidParameter(format!(
            "code letter {bad} outside alphabet of {}",
            pis.len()
        )));
    }
    let mut prefix = identity(pi.nrows());
    let mut out = Vec::with_capacity(code.len());
    for &c in code {
        out.push(&pis[c] * pi * &prefix);
        prefix = q_bar(pi, &pis[c]) * prefix;
    }
    Ok(out)
}

/// `Λ_m = Q̄_{c_1} ⋯ Q̄_{c_{m-1}} Π̄_{c_m} Q̄_{c_{m-1}} ⋯ Q̄_{c_1}`.
pub fn sequential_povm(code: &[usize], pi: &CMat, pis: &[CMat]) -> Result<PovmSet> {
    let ks = sequential_kraus(code, pi, pis)?;
    PovmSet::new(pi.nrows(), ks.iter().map(|a| a.adjoint() * a).collect())
}

/// `(1/|M|) Σ_m Tr{Λ_m ρ_m}` with `codewords[m]` the state sent for message `m`.
pub fn exact_success_probability(povm: &PovmSet, codewords: &[CMat]) -> Result<f64> {
    if povm.len() != codewords.len() || codewords.is_empty() {
        return Err(QmacError::ShapeMismatch(format!(
            "{} POVM elements for {} codewords",
            povm.len(),
            codewords.len()
        )));
    }
    let s: f64 = (0..povm.len())
        .map(|m| povm.probability(m, &codewords[m]))
        .sum();
    Ok(s / codewords.len() as f64)
}

fn pow_count(base: usize, exp: usize) -> u128 {
    (0..exp).fold(1u128, |a, _| a.saturating_mul(base as u128))
}

/// Exact `E_C{p̄_succ}` over all `|X|^{|M|}` codebooks drawn i.i.d. from the ensemble.
///
/// The decision for message `m` depends only on `c_1..c_m`, so the enumeration walks code
/// prefixes and weights each by its probability.
pub fn expected_success_exhaustive(
    ensemble: &[(f64, CMat)],
    pi: &CMat,
    pis: &[CMat],
    message_count: usize,
) -> Result<f64> {
    check_projectors(pi, pis)?;
    if ensemble.len() != pis.len() || ensemble.is_empty() || message_count == 0 {
        return Err(QmacError::ShapeMismatch(
            "ensemble, projectors and message count must be non-empty and aligned".into(),
        ));
    }
    let required = pow_count(ensemble.len(), message_count);
    if required > EXHAUSTIVE_CAP {
        return Err(QmacError::EnumerationCap {
            required,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let qbars: Vec<CMat> = pis.iter().map(|p| q_bar(pi, p)).collect();
    let pbar: Vec<CMat> = pis.iter().map(|p| pi * p * pi).collect();
    // Σ_x p(x) Tr{Π̄_x P ρ_x P†} for a prefix operator P.
    let stage = |prefix: &CMat| -> f64 {
        ensemble
            .iter()
            .zip(&pbar)
            .map(|((p, rho), pb)| p * tr_prod(pb, &(prefix * rho * prefix.adjoint())))
            .sum()
    };
    fn walk(
        depth: usize,
        w: f64,
        pre: &CMat,
        ensemble: &[(f64, CMat)],
        qbars: &[CMat],
        message_count: usize,
        stage: &(dyn Fn(&CMat) -> f64 + Sync),
    ) -> f64 {
        let mut s = w * stage(pre);
        if depth + 1 < message_count {
            for ((p, _), q) in ensemble.iter().zip(qbars) {
                s += walk(
                    depth + 1,
                    w * p,
                    &(q * pre),
                    ensemble,
                    qbars,
                    message_count,
                    stage,
                );
            }
        }
        s
    }
    let root = identity(pi.nrows());
    let mut total = stage(&root);
    if message_count > 1 {
        let parts: Vec<f64> = ensemble
            .par_iter()
            .zip(qbars.par_iter())
            .map(|((p, _), q)| walk(1, *p, &(q * &root), ensemble, &qbars, message_count, &stage))
            .collect();
        total += parts.iter().sum::<f64>();
    }
    Ok(total / message_count as f64)
}

/// Why a bound was replaced by 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFlag {
    /// `2 - e^{d|M|/D} ≤ 0`.
    PositivityFails,
    /// `ε ≥ 1/2`, so `1 - 2ε ≤ 0`.
    EpsilonTooLarge,
}

/// Value of a lower bound with the reason it was zeroed, if any.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingBound {
    pub value: f64,
    pub flag: Option<BoundFlag>,
}

/// `|(1 - 2ε)(2 - e^{d|M|/D})|²`, or 0 with a flag when a factor is not positive.
pub fn packing_lower_bound(c: &PackingConstants, message_count: usize) -> PackingBound {
    packing_bound_raw(c.epsilon, c.d / c.big_d, message_count)
}

/// [`packing_lower_bound`] from `ε`, the ratio `d/D` and `|M|`.
pub fn packing_bound_raw(epsilon: f64, d_over_big_d: f64, message_count: usize) -> PackingBound {
    let second = 2.0 - (d_over_big_d * message_count as f64).exp();
    if !(second > 0.0) {
        return PackingBound {
            value: 0.0,
            flag: Some(BoundFlag::PositivityFails),
        };
    }
    let first = 1.0 - 2.0 * epsilon;
    if first <= 0.0 {
        return PackingBound {
            value: 0.0,
            flag: Some(BoundFlag::EpsilonTooLarge),
        };
    }
    PackingBound {
        value: (first * second).powi(2),
        flag: None,
    }
}

/// The sequence `f_z = Tr{W_1 Π W̄_0^z}` and the contracts checked on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingDiagnostics {
    pub f: Vec<f64>,
    pub constants: PackingConstants,
    /// `f_0 ≥ 1 - 2ε`.
    pub f0_holds: bool,
    /// `f_z ≤ (d/D) f_{z-1}` for every `z ≥ 1`.
    pub ratio_holds: bool,
    /// `f_z ≤ (d/D)^z f_0` for every `z`.
    pub power_holds: bool,
}

/// `f_z` for `z = 0..=z_max`, with `W_1 = Σ p Π_x ρ_x Π_x` and `W̄_0 = Π (Σ p Π_x) Π`.
pub fn packing_diagnostics(
    ensemble: &[(f64, CMat)],
    pi: &CMat,
    pis: &[CMat],
    z_max: usize,
) -> Result<PackingDiagnostics> {
    check_projectors(pi, pis)?;
    let constants = measure_packing_constants(ensemble, pi, pis)?;
    let dim = pi.nrows();
    let mut w1 = CMat::zeros(dim, dim);
    let mut w0 = CMat::zeros(dim, dim);
    for ((p, rho), px) in ensemble.iter().zip(pis) {
        w1 += px * rho * px * r(*p);
        w0 += px * r(*p);
    }
    let w0b = pi * w0 * pi;
    let mut f = Vec::with_capacity(z_max + 1);
    let mut acc = w1 * pi;
    for _ in 0..=z_max {
        f.push(tr(&acc));
        acc *= &w0b;
    }
    const TOL: f64 = 1e-10;
    let ratio = constants.d / constants.big_d;
    let f0_holds = f[0] >= 1.0 - 2.0 * constants.epsilon - TOL;
    let ratio_holds = f.windows(2).all(|w| w[1] <= ratio * w[0] + TOL);
    let power_holds = f
        .iter()
        .enumerate()
        .all(|(z, &fz)| fz <= ratio.powi(z as i32) * f[0] + TOL);
    Ok(PackingDiagnostics {
        f,
        constants,
        f0_holds,
        ratio_holds,
        power_holds,
    })
}

/// Report of the assisted point-to-point sequential protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeqReport {
    pub success_mean: f64,
    pub success_stderr: f64,
    pub bound: f64,
    pub bound_flag: Option<BoundFlag>,
    pub epsilon: f64,
    pub d: f64,
    #[serde(rename = "D")]
    pub big_d: f64,
    pub n: usize,
    pub message_count: usize,
    pub seed: u64,
    pub trials: usize,
    pub exhaustive: bool,
}

/// Code and message projectors of the assisted protocol.
#[derive(Debug, Clone)]
pub struct EaSequentialDecoder {
    pub setup: PointToPointSetup,
    /// `Π = Π_δ^{A^n} ⊗ Π_δ^{B^n}`.
    pub code_projector: CMat,
    /// `Π_δ^{A^nB^n}`.
    pub joint_projector: CMat,
    pub constants: PackingConstants,
}

impl EaSequentialDecoder {
    pub fn new(channel: &KrausChannel, phi: &PureState, n: usize, delta: f64) -> Result<Self> {
        let setup = PointToPointSetup::new(channel, phi, n)?;
        let ra = setup.rho_single.partial_trace(&["A"])?;
        let rb = setup.rho_single.partial_trace(&["B"])?;
        let (pa, _) = typical_projector_grouped(&ra, n, delta)?;
        let (pb, _) = typical_projector_grouped(&rb, n, delta)?;
        let (pab, _) = typical_projector_grouped(&setup.rho_single, n, delta)?;
        let code_projector = kron(pa.matrix(), pb.matrix());
        let joint_projector = pab.into_matrix();
        let constants = Self::measure(&setup, &code_projector, &joint_projector)?;
        Ok(Self {
            setup,
            code_projector,
            joint_projector,
            constants,
        })
    }

    /// Measured constants over the full index set. `Tr{Π σ_s}`, `Tr{Π_s σ_s}` and the spectrum of
    /// `Π_s σ_s Π_s` do not depend on `s`, so they are evaluated at `s = 0`; `D` uses the
    /// closed-form average codeword.
    fn measure(setup: &PointToPointSetup, pi: &CMat, pab: &CMat) -> Result<PackingConstants> {
        let rho = setup.rho.matrix();
        let eps = 1.0 - tr_prod(pi, rho).min(tr_prod(pab, rho));
        let d = match min_eig_on_support(&(pab * rho * pab), pab)? {
            None => 1.0,
            Some(l) if l <= 0.0 => f64::INFINITY,
            Some(l) => 1.0 / l,
        };
        let avg = setup.expected_codeword()?;
        let lm = lambda_max(&(pi * avg * pi))?;
        let big_d = if lm <= 0.0 { f64::INFINITY } else { 1.0 / lm };
        let comm = {
            let m = pab * rho - rho * pab;
            crate::qmat::max_abs(&m)
        };
        Ok(PackingConstants {
            epsilon: eps.max(0.0),
            d,
            big_d,
            commutator_residual: comm,
        })
    }

    /// `(σ_s, Π_s)` for a code index.
    pub fn codeword(&self, s: &HwIndex) -> Result<(CMat, CMat)> {
        let u = self.setup.encoder(s)?;
        let sigma = &u * self.setup.rho.matrix() * u.adjoint();
        let proj = &u * &self.joint_projector * u.adjoint();
        Ok((sigma, proj))
    }

    /// Exact success of one codebook.
    pub fn success_of(&self, entries: &[HwIndex]) -> Result<f64> {
        let mut states = Vec::with_capacity(entries.len());
        let mut projs = Vec::with_capacity(entries.len());
        for s in entries {
            let (a, b) = self.codeword(s)?;
            states.push(a);
            projs.push(b);
        }
        let code: Vec<usize> = (0..entries.len()).collect();
        let povm = sequential_povm(&code, &self.code_projector, &projs)?;
        exact_success_probability(&povm, &states)
    }

    /// Exact expectation over all `|𝒮|^{|M|}` codebooks.
    pub fn expected_success(&self, message_count: usize) -> Result<f64> {
        let all = self.setup.decomp.enumerate_index_set()?;
        let required = pow_count(all.len(), message_count);
        if required > EXHAUSTIVE_CAP {
            return Err(QmacError::EnumerationCap {
                required,
                cap: EXHAUSTIVE_CAP,
            });
        }
        let w = 1.0 / all.len() as f64;
        let mut ens = Vec::with_capacity(all.len());
        let mut projs = Vec::with_capacity(all.len());
        for s in &all {
            let (a, b) = self.codeword(s)?;
            ens.push((w, a));
            projs.push(b);
        }
        expected_success_exhaustive(&ens, &self.code_projector, &projs, message_count)
    }
}

/// Runs the assisted sequential protocol and reports the success probability with the packing
/// bound at measured constants.
pub fn ea_sequential_protocol(
    channel: &KrausChannel,
    phi: &PureState,
    n: usize,
    message_count: usize,
    delta: f64,
    seed: u64,
    trials: usize,
) -> Result<SeqReport> {
    if message_count == 0 {
        return Err(QmacError::InvalidParameter(
            "message count must be positive".into(),
        ));
    }
    let dec = EaSequentialDecoder::new(channel, phi, n, delta)?;
    let bound = packing_lower_bound(&dec.constants, message_count);
    let codebooks = pow_count(
        dec.setup.decomp.index_set_size().min(u64::MAX as u128) as usize,
        message_count,
    );
    let (mean, stderr, exhaustive) = if codebooks <= EXHAUSTIVE_CAP {
        (dec.expected_success(message_count)?, 0.0, true)
    } else {
        if trials == 0 {
            return Err(QmacError::InvalidParameter(
                "trials must be positive".into(),
            ));
        }
        let vals = (0..trials)
            .into_par_iter()
            .map(|t| {
                let book = sample_code(
                    &dec.setup.decomp,
                    message_count,
                    derive_seed(seed, t as u64),
                );
                dec.success_of(&book.entries)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (m, se) = mean_stderr(&vals);
        (m, se, false)
    };
    Ok(SeqReport {
        success_mean: mean,
        success_stderr: stderr,
        bound: bound.value,
        bound_flag: bound.flag,
        epsilon: dec.constants.epsilon,
        d: dec.constants.d,
        big_d: dec.constants.big_d,
        n,
        message_count,
        seed,
        trials,
        exhaustive,
    })
}

/// Sample mean and standard error, summed in index order.
pub fn mean_stderr(vals: &[f64]) -> (f64, f64) {
    let k = vals.len() as f64;
    if vals.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = vals.iter().sum::<f64>() / k;
    if vals.len() < 2 {
        return (mean, 0.0);
    }
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Measured constants of the successive-decoding hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessiveConstants {
    pub epsilon: f64,
    pub eps_prime: f64,
    pub d1_minus: f64,
    pub d1_plus: f64,
    pub d2: f64,
    #[serde(rename = "D1")]
    pub big_d1: f64,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "M")]
    pub m: usize,
}

impl SuccessiveConstants {
    /// Smallest `ε'` with `2 - e^{d_1^- |L| / D_1} ≥ 1 - ε'`.
    pub fn min_eps_prime(d1_minus: f64, l: usize, big_d1: f64) -> f64 {
        ((d1_minus * l as f64 / big_d1).exp() - 1.0).max(0.0)
    }
}

/// Raw and clamped successive bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessiveBound {
    pub raw: f64,
    pub clamped: f64,
}

/// `|(1-2ε)(2 - e^{d_2|M|/d_1^+})|² - 2√(2(ε+ε'))`.
pub fn successive_bound(c: &SuccessiveConstants) -> SuccessiveBound {
    let first = (1.0 - 2.0 * c.epsilon) * (2.0 - (c.d2 * c.m as f64 / c.d1_plus).exp());
    let raw = first * first - 2.0 * (2.0 * (c.epsilon + c.eps_prime)).sqrt();
    SuccessiveBound {
        raw,
        clamped: raw.clamp(0.0, 1.0),
    }
}

/// Projector families for the successive decoder.
#[derive(Debug, Clone)]
pub struct SuccessiveProjectors {
    pub pi: CMat,
    /// `Π_x`.
    pub pi_x: Vec<CMat>,
    /// `Π_{x,y}` indexed `[x][y]`.
    pub pi_xy: Vec<Vec<CMat>>,
}

impl SuccessiveProjectors {
    fn check(&self) -> Result<()> {
        check_projectors(&self.pi, &self.pi_x)?;
        if self.pi_xy.len() != self.pi_x.len() {
            return Err(QmacError::ShapeMismatch(
                "Π_{x,y} rows do not match Π_x".into(),
            ));
        }
        for row in &self.pi_xy {
            check_projectors(&self.pi, row)?;
        }
        Ok(())
    }
}

/// `M_{l,m}` in row-major `(l, m)` order following the measured sequence
/// `Π → Q_{x(1)} → Π → ⋯ → Π → Π_{x(l)} → Q_{x(l),y(1)} → Π_{x(l)} → ⋯ → Π_{x(l),y(m)}`.
pub fn successive_kraus(
    code_x: &[usize],
    code_y: &[usize],
    proj: &SuccessiveProjectors,
) -> Result<Vec<CMat>> {
    proj.check()?;
    let nx = proj.pi_x.len();
    let ny = proj.pi_xy.first().map(|r| r.len()).unwrap_or(0);
    if code_x.iter().any(|&x| x >= nx) || code_y.iter().any(|&y| y >= ny) {
        return Err(QmacError::InvalidParameter(
            "code letter outside the projector families".into(),
        ));
    }
    let dim = proj.pi.nrows();
    let pi = &proj.pi;
    let mut out = Vec::with_capacity(code_x.len() * code_y.len());
    let mut prefix = identity(dim);
    for &x in code_x {
        let px = &proj.pi_x[x];
        let stage1 = px * pi * &prefix;
        let mut inner = identity(dim);
        for &y in code_y {
            let pxy = &proj.pi_xy[x][y];
            out.push(pxy * &inner * &stage1);
            let q = identity(dim) - pxy;
            inner = px * q * px * inner;
        }
        prefix = q_bar(pi, px) * prefix;
    }
    Ok(out)
}

/// `Λ_{l,m} = M_{l,m}† M_{l,m}` in row-major `(l, m)` order.
pub fn successive_povm(
    code_x: &[usize],
    code_y: &[usize],
    proj: &SuccessiveProjectors,
) -> Result<PovmSet> {
    let ks = successive_kraus(code_x, code_y, proj)?;
    PovmSet::new(
        proj.pi.nrows(),
        ks.iter().map(|m| m.adjoint() * m).collect(),
    )
}

/// Doubly indexed ensemble `{p_X(x) p_Y(y), ρ_{x,y}}`.
#[derive(Debug, Clone)]
pub struct DoubleEnsemble {
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    /// `ρ_{x,y}` indexed `[x][y]`.
    pub states: Vec<Vec<CMat>>,
}

impl DoubleEnsemble {
    pub fn rho_x(&self, x: usize) -> CMat {
        let dim = self.states[0][0].nrows();
        let mut m = CMat::zeros(dim, dim);
        for (y, p) in self.py.iter().enumerate() {
            m += &self.states[x][y] * r(*p);
        }
        m
    }

    pub fn average(&self) -> CMat {
        let dim = self.states[0][0].nrows();
        let mut m = CMat::zeros(dim, dim);
        for (x, p) in self.px.iter().enumerate() {
            m += self.rho_x(x) * r(*p);
        }
        m
    }
}

/// Exact success of one successive code pair.
pub fn successive_success(
    code_x: &[usize],
    code_y: &[usize],
    ens: &DoubleEnsemble,
    proj: &SuccessiveProjectors,
) -> Result<f64> {
    let ks = successive_kraus(code_x, code_y, proj)?;
    let mut s = 0.0;
    for (l, &x) in code_x.iter().enumerate() {
        for (m, &y) in code_y.iter().enumerate() {
            let k = &ks[l * code_y.len() + m];
            s += tr(&(k * &ens.states[x][y] * k.adjoint()));
        }
    }
    Ok(s / (code_x.len() * code_y.len()) as f64)
}

/// Exact expected success over all `|X|^{|L|} |Y|^{|M|}` code pairs.
pub fn expected_successive_exhaustive(
    ens: &DoubleEnsemble,
    proj: &SuccessiveProjectors,
    l: usize,
    m: usize,
) -> Result<f64> {
    let (nx, ny) = (ens.px.len(), ens.py.len());
    let required = pow_count(nx, l).saturating_mul(pow_count(ny, m));
    if required > EXHAUSTIVE_CAP {
        return Err(QmacError::EnumerationCap {
            required,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let decode = |mut i: usize, base: usize, len: usize| -> Vec<usize> {
        let mut v = vec![0; len];
        for k in (0..len).rev() {
            v[k] = i % base;
            i /= base;
        }
        v
    };
    let total = required as usize;
    let vals = (0..total)
        .into_par_iter()
        .map(|i| {
            let cx = decode(i / pow_count(ny, m) as usize, nx, l);
            let cy = decode(i % pow_count(ny, m) as usize, ny, m);
            let w: f64 = cx.iter().map(|&x| ens.px[x]).product::<f64>()
                * cy.iter().map(|&y| ens.py[y]).product::<f64>();
            Ok(w * successive_success(&cx, &cy, ens, proj)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.iter().sum())
}

/// Measures the successive hypotheses; `ε'` is the smallest value satisfying its condition.
pub fn measure_successive_constants(
    ens: &DoubleEnsemble,
    proj: &SuccessiveProjectors,
    l: usize,
    m: usize,
) -> Result<SuccessiveConstants> {
    let mut min_trace = f64::INFINITY;
    let (mut lo1, mut hi1, mut lo2) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for x in 0..ens.px.len() {
        let rx = ens.rho_x(x);
        let px = &proj.pi_x[x];
        min_trace = min_trace.min(tr_prod(&proj.pi, &rx)).min(tr_prod(px, &rx));
        let sandwich = px * &rx * px;
        if let Some(v) = min_eig_on_support(&sandwich, px)? {
            lo1 = lo1.min(v);
        }
        hi1 = hi1.max(lambda_max(&sandwich)?);
        for y in 0..ens.py.len() {
            let rxy = &ens.states[x][y];
            let pxy = &proj.pi_xy[x][y];
            min_trace = min_trace.min(tr_prod(px, rxy)).min(tr_prod(pxy, rxy));
            if let Some(v) = min_eig_on_support(&(pxy * rxy * pxy), pxy)? {
                lo2 = lo2.min(v);
            }
        }
    }
    let inv = |v: f64| {
        if v == f64::INFINITY {
            1.0
        } else if v <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / v
        }
    };
    let d1_minus = inv(lo1);
    let d2 = inv(lo2);
    let d1_plus = if hi1 <= 0.0 { f64::INFINITY } else { 1.0 / hi1 };
    let lm = lambda_max(&(&proj.pi * ens.average() * &proj.pi))?;
    let big_d1 = if lm <= 0.0 { f64::INFINITY } else { 1.0 / lm };
    Ok(SuccessiveConstants {
        epsilon: (1.0 - min_trace).max(0.0),
        eps_prime: SuccessiveConstants::min_eps_prime(d1_minus, l, big_d1),
        d1_minus,
        d1_plus,
        d2,
        big_d1,
        l,
        m,
    })
}

/// Base-2 exponents of the successive parameters: `log2 D_1`, `log2 d_1^±`, `log2 d_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessiveExponents {
    pub log_big_d1: f64,
    pub log_d1_plus: f64,
    pub log_d1_minus: f64,
    pub log_d2: f64,
}

impl SuccessiveExponents {
    /// Unassisted choice from `H(B)`, `H(B|X)`, `H(B|XY)`.
    pub fn unassisted(h_b: f64, h_b_x: f64, h_b_xy: f64, n: usize, delta: f64) -> Self {
        let n = n as f64;
        Self {
            log_big_d1: n * (h_b - delta),
            log_d1_plus: n * (h_b_x - delta),
            log_d1_minus: n * (h_b_x + delta),
            log_d2: n * (h_b_xy + delta),
        }
    }

    /// Assisted choice from `H(A)`, `H(B)`, `H(C)`, `H(AC)`, `H(ABC)`.
    pub fn assisted(
        h_a: f64,
        h_b: f64,
        h_c: f64,
        h_ac: f64,
        h_abc: f64,
        n: usize,
        delta: f64,
    ) -> Self {
        let n = n as f64;
        Self {
            log_big_d1: n * (h_a + h_b + h_c - delta),
            log_d1_plus: n * (h_b + h_ac - delta),
            log_d1_minus: n * (h_b + h_ac + delta),
            log_d2: n * (h_abc + delta),
        }
    }

    /// `log2(D_1 / d_1^-)`.
    pub fn first_stage_gap(&self) -> f64 {
        self.log_big_d1 - self.log_d1_minus
    }

    /// `log2(d_1^+ / d_2)`.
    pub fn second_stage_gap(&self) -> f64 {
        self.log_d1_plus - self.log_d2
    }
}
