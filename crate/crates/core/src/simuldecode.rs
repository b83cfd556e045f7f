//! Simultaneous decoding over a two-sender channel: the assisted square-root decoder, its error
//! split, the shift randomization that turns average into maximal error, the coherent version of
//! the measurement, and the unassisted decoder for classical-quantum inputs.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eacode::{sample_code, EaCodeBook, MacSetup};
use crate::error::{QmacError, Result};
use crate::format::derive_seed;
use crate::info::{unassisted_cc_region, von_neumann_entropy, Ensemble, RateRegion};
use crate::qmat::{
    eigenvalues_hermitian, identity, kron, kron_all, max_abs, operator_power, r, sqrt_psd,
    support_projector, tr_prod, trace_norm_hermitian, CMat, KrausChannel, Operator, PovmSet,
    PureState, C64, PSD_TOL,
};
use crate::seqdecode::{
    exact_success_probability, mean_stderr, successive_povm, successive_success, DoubleEnsemble,
    SuccessiveProjectors,
};
use crate::typicality::{product_typical_projector, typical_projector, typical_projector_grouped};

/// Eigenvalues of `Σ Υ` at or below this are outside its support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Tolerance on the part of an element lying outside the normaliser's support.
const SUPPORT_TOL: f64 = 1e-8;

/// Gap eigenvalues above `-HN_TOL` count as non-negative.
pub const HN_TOL: f64 = 1e-9;

/// Alice's and Bob's independent random codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacCodePair {
    pub book1: EaCodeBook,
    pub book2: EaCodeBook,
}

impl MacCodePair {
    /// Samples both codes; Alice uses `derive_seed(seed, 0)` and Bob `derive_seed(seed, 1)`.
    pub fn sample(setup: &MacSetup, l: usize, m: usize, seed: u64) -> Self {
        Self {
            book1: sample_code(&setup.decomp_a, l, derive_seed(seed, 0)),
            book2: sample_code(&setup.decomp_b, m, derive_seed(seed, 1)),
        }
    }

    pub fn l(&self) -> usize {
        self.book1.entries.len()
    }

    pub fn m(&self) -> usize {
        self.book2.entries.len()
    }

    pub fn seeds(&self) -> [u64; 2] {
        [self.book1.seed, self.book2.seed]
    }
}

/// Relabels the codes by cyclic shifts: message `l` now uses the entry of `l + s`, message `m`
/// the entry of `m + t`.
pub fn randomize_code(pair: &MacCodePair, s: usize, t: usize) -> MacCodePair {
    let shift = |b: &EaCodeBook, k: usize| {
        let len = b.entries.len();
        let entries = (0..len).map(|i| b.entries[(i + k) % len].clone()).collect();
        EaCodeBook {
            seed: b.seed,
            message_count: b.message_count,
            entries,
        }
    };
    MacCodePair {
        book1: shift(&pair.book1, s),
        book2: shift(&pair.book2, t),
    }
}

/// Typical projectors of the marginals of `ρ^{A^nB^nC^n}`, each embedded in the full space.
#[derive(Debug, Clone)]
pub struct MacProjectors {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub ab: CMat,
    pub ac: CMat,
    pub bc: CMat,
    pub abc: CMat,
    /// `Π^A Π^{BC}`.
    pub hat1: CMat,
    /// `Π^B Π^{AC}`.
    pub hat2: CMat,
    /// `Π^C Π^{AB}`.
    pub hat3: CMat,
}

impl MacProjectors {
    pub fn new(setup: &MacSetup, delta: f64) -> Result<Self> {
        let n = setup.n;
        let full = setup.rho.space();
        let proj = |labels: &[&str]| -> Result<CMat> {
            let marg = setup.rho_single.partial_trace(labels)?;
            let (p, _) = typical_projector_grouped(&marg, n, delta)?;
            Ok(p.embed(full)?.into_matrix())
        };
        let a = proj(&["A"])?;
        let b = proj(&["B"])?;
        let c = proj(&["C"])?;
        let ab = proj(&["A", "B"])?;
        let ac = proj(&["A", "C"])?;
        let bc = proj(&["B", "C"])?;
        let abc = proj(&["A", "B", "C"])?;
        let hat1 = &a * &bc;
        let hat2 = &b * &ac;
        let hat3 = &c * &ab;
        Ok(Self {
            a,
            b,
            c,
            ab,
            ac,
            bc,
            abc,
            hat1,
            hat2,
            hat3,
        })
    }

    /// All projectors equal to the identity (no typicality cuts).
    pub fn trivial(dim: usize) -> Self {
        let i = identity(dim);
        Self {
            a: i.clone(),
            b: i.clone(),
            c: i.clone(),
            ab: i.clone(),
            ac: i.clone(),
            bc: i.clone(),
            abc: i.clone(),
            hat1: i.clone(),
            hat2: i.clone(),
            hat3: i,
        }
    }
}

/// `Υ = U1 Π̂3 Π̂2 U2 Π^{ABC} U2† Π̂2 Π̂3 U1†` with `U1`, `U2` the receiver-side encoders.
pub fn build_upsilon(
    u1: &CMat,
    u2: &CMat,
    hat2: &CMat,
    hat3: &CMat,
    pi_abc: &CMat,
) -> Result<CMat> {
    let d = pi_abc.nrows();
    if [u1, u2, hat2, hat3, pi_abc]
        .iter()
        .any(|m| m.nrows() != d || m.ncols() != d)
    {
        return Err(QmacError::ShapeMismatch(
            "operators of different dimensions".into(),
        ));
    }
    let g = u1 * hat3 * hat2 * u2;
    Ok(&g * pi_abc * g.adjoint())
}

/// `Λ_i = (Σ Υ)^{-1/2} Υ_i (Σ Υ)^{-1/2}` with the inverse taken on the support of `Σ Υ`.
pub fn sqrt_measurement(upsilons: &[CMat]) -> Result<PovmSet> {
    let first = upsilons
        .first()
        .ok_or_else(|| QmacError::InvalidParameter("no operators".into()))?;
    let d = first.nrows();
    let mut sum = CMat::zeros(d, d);
    for u in upsilons {
        if u.nrows() != d || u.ncols() != d {
            return Err(QmacError::ShapeMismatch(
                "operators of different dimensions".into(),
            ));
        }
        sum += u;
    }
    let inv = operator_power(&sum, -0.5, SUPPORT_CUTOFF)?;
    let outside = identity(d) - support_projector(&sum, SUPPORT_CUTOFF)?;
    let mut elems = Vec::with_capacity(upsilons.len());
    for u in upsilons {
        let leak = tr_prod(&outside, u);
        if leak > SUPPORT_TOL {
            return Err(QmacError::InvalidParameter(format!(
                "operator has weight {leak:e} outside the support of the sum"
            )));
        }
        elems.push(&inv * u * &inv);
    }
    PovmSet::new(d, elems)
}

/// Result of checking `I - (S+T)^{-1/2} S (S+T)^{-1/2} ≤ 2(I - S) + 4T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HnCheck {
    pub holds: bool,
    /// Smallest eigenvalue of the right side minus the left side.
    pub min_gap_eigenvalue: f64,
}

/// Evaluates the gap of the operator inequality for `0 ≤ S ≤ I`, `T ≥ 0`.
pub fn hayashi_nagaoka_check(s: &CMat, t: &CMat) -> Result<HnCheck> {
    let d = s.nrows();
    if s.ncols() != d || t.nrows() != d || t.ncols() != d {
        return Err(QmacError::ShapeMismatch(
            "S and T must be square of one dimension".into(),
        ));
    }
    let es = eigenvalues_hermitian(s)?;
    let (hi, lo) = (
        es.first().copied().unwrap_or(0.0),
        es.last().copied().unwrap_or(0.0),
    );
    if lo < -PSD_TOL || hi > 1.0 + PSD_TOL {
        return Err(QmacError::InvalidParameter(format!(
            "S has spectrum in [{lo}, {hi}], outside [0, 1]"
        )));
    }
    if let Some(&lt) = eigenvalues_hermitian(t)?.last() {
        if lt < -PSD_TOL {
            return Err(QmacError::NegativeEigenvalue(lt));
        }
    }
    let inv = operator_power(&(s + t), -0.5, SUPPORT_CUTOFF)?;
    let id = identity(d);
    let lhs = &id - &inv * s * &inv;
    let rhs = (&id - s) * r(2.0) + t * r(4.0);
    let gap = eigenvalues_hermitian(&(rhs - lhs))?
        .last()
        .copied()
        .unwrap_or(0.0);
    Ok(HnCheck {
        holds: gap >= -HN_TOL,
        min_gap_eigenvalue: gap,
    })
}

/// `(1/|POVM|) Σ_k Tr{(I - Λ_k) σ_k}` with codewords in the POVM's order.
pub fn average_error_of(povm: &PovmSet, codewords: &[CMat]) -> Result<f64> {
    Ok(1.0 - exact_success_probability(povm, codewords)?)
}

/// Codewords `σ_{l,m}` in row-major `(l, m)` order.
pub fn codewords(setup: &MacSetup, pair: &MacCodePair) -> Result<Vec<CMat>> {
    let mut out = Vec::with_capacity(pair.l() * pair.m());
    for s1 in &pair.book1.entries {
        for s2 in &pair.book2.entries {
            out.push(setup.codeword(s1, s2)?);
        }
    }
    Ok(out)
}

/// Average error of a POVM indexed row-major by `(l, m)` on the code pair.
pub fn average_error(setup: &MacSetup, pair: &MacCodePair, povm: &PovmSet) -> Result<f64> {
    if povm.len() != pair.l() * pair.m() {
        return Err(QmacError::ShapeMismatch(format!(
            "{} POVM elements for {}x{} messages",
            povm.len(),
            pair.l(),
            pair.m()
        )));
    }
    average_error_of(povm, &codewords(setup, pair)?)
}

/// Largest over `(l, m)` of the error averaged over all shifts `(S, T)`: the shifted code sends
/// `(l, m)` with the entries of `(l+S, m+T)` and the decoder reports its outcome minus the shift.
pub fn max_error_via_randomization(
    setup: &MacSetup,
    pair: &MacCodePair,
    povm: &PovmSet,
) -> Result<f64> {
    let (l_n, m_n) = (pair.l(), pair.m());
    if povm.len() != l_n * m_n {
        return Err(QmacError::ShapeMismatch(format!(
            "{} POVM elements for {l_n}x{m_n} messages",
            povm.len()
        )));
    }
    let mut err = vec![0.0; l_n * m_n];
    for s in 0..l_n {
        for t in 0..m_n {
            let shifted = randomize_code(pair, s, t);
            let cw = codewords(setup, &shifted)?;
            for l in 0..l_n {
                for m in 0..m_n {
                    let k = ((l + s) % l_n) * m_n + (m + t) % m_n;
                    err[l * m_n + m] += 1.0 - povm.probability(k, &cw[l * m_n + m]);
                }
            }
        }
    }
    let shifts = (l_n * m_n) as f64;
    Ok(err
        .iter()
        .map(|e| e / shifts)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `V = Σ_k √Λ_k ⊗ |k⟩` over the completed POVM, rows ordered `system * K + k`.
pub fn coherent_isometry(povm: &PovmSet) -> Result<CMat> {
    let elems = povm.completed();
    let (d, k) = (povm.dim(), elems.len());
    let mut v = CMat::zeros(d * k, d);
    for (j, e) in elems.iter().enumerate() {
        let root = sqrt_psd(e)?;
        for a in 0..d {
            for b in 0..d {
                v[(a * k + j, b)] = root[(a, b)];
            }
        }
    }
    Ok(v)
}

/// `max|V†V - I|`.
pub fn isometry_residual(v: &CMat) -> f64 {
    max_abs(&(v.adjoint() * v - identity(v.ncols())))
}

/// Expected overlap between the coherently measured state and the ideal state carrying copies of
/// the message registers, averaged over the shared shifts.
///
/// `alpha` and `beta` hold the amplitudes `α_{j,l}` and `β_{k,m}` (rows `j`, columns `l`).
pub fn coherent_fidelity(
    setup: &MacSetup,
    pair: &MacCodePair,
    povm: &PovmSet,
    alpha: &CMat,
    beta: &CMat,
) -> Result<f64> {
    let (l_n, m_n) = (pair.l(), pair.m());
    if alpha.ncols() != l_n || beta.ncols() != m_n || povm.len() != l_n * m_n {
        return Err(QmacError::ShapeMismatch(
            "amplitudes or POVM do not match the code sizes".into(),
        ));
    }
    let wa: Vec<f64> = (0..l_n).map(|l| alpha.column(l).norm_squared()).collect();
    let wb: Vec<f64> = (0..m_n).map(|m| beta.column(m).norm_squared()).collect();
    let norm = wa.iter().sum::<f64>() * wb.iter().sum::<f64>();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(QmacError::InvalidParameter(format!(
            "amplitudes have norm {norm}"
        )));
    }
    let purified = setup.purified_output()?;
    let sys = setup.dim();
    let env = purified.space().dim() / sys;
    let phi = CMat::from_fn(sys, env, |i, e| purified.vector()[i * env + e]);
    let roots = povm
        .elements()
        .iter()
        .map(sqrt_psd)
        .collect::<Result<Vec<_>>>()?;
    let mut overlap = vec![0.0; l_n * m_n];
    for p in 0..l_n {
        for q in 0..m_n {
            let u = setup.encoder_a(&pair.book1.entries[p])?
                * setup.encoder_b(&pair.book2.entries[q])?;
            let v = &u * &phi;
            let k = p * m_n + q;
            overlap[k] = (v.adjoint() * &roots[k] * &v).trace().re;
        }
    }
    let mut f = 0.0;
    for l in 0..l_n {
        for m in 0..m_n {
            let mut avg = 0.0;
            for s in 0..l_n {
                for t in 0..m_n {
                    avg += overlap[((l + s) % l_n) * m_n + (m + t) % m_n];
                }
            }
            f += wa[l] * wb[m] * avg / (l_n * m_n) as f64;
        }
    }
    Ok(f)
}

/// Uniform amplitudes `α_{j,l} = 1/√(dL)` over a reference of dimension `d`.
pub fn uniform_amplitudes(reference_dim: usize, messages: usize) -> CMat {
    CMat::from_element(
        reference_dim,
        messages,
        C64::new(1.0 / ((reference_dim * messages) as f64).sqrt(), 0.0),
    )
}

/// The terms of the error split, each averaged over `(l, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSplit {
    /// `‖θ_{l,m} - σ_{l,m}‖₁`.
    pub gentle: f64,
    /// `Tr{(I - Υ_{l,m}) θ_{l,m}}`.
    pub first: f64,
    /// `Σ_{l'≠l} Tr{Υ_{l',m} θ_{l,m}}`.
    pub wrong_l: f64,
    /// `Σ_{m'≠m} Tr{Υ_{l,m'} θ_{l,m}}`.
    pub wrong_m: f64,
    /// `Σ_{l'≠l, m'≠m} Tr{Υ_{l',m'} θ_{l,m}}`.
    pub wrong_both: f64,
    /// `gentle + 2 first + 4 (wrong_l + wrong_m + wrong_both)`, an upper bound on the average error.
    pub hn_bound: f64,
}

impl ErrorSplit {
    fn mean(parts: &[ErrorSplit]) -> Option<ErrorSplit> {
        if parts.is_empty() {
            return None;
        }
        let k = parts.len() as f64;
        let f = |g: fn(&ErrorSplit) -> f64| parts.iter().map(g).sum::<f64>() / k;
        Some(ErrorSplit {
            gentle: f(|e| e.gentle),
            first: f(|e| e.first),
            wrong_l: f(|e| e.wrong_l),
            wrong_m: f(|e| e.wrong_m),
            wrong_both: f(|e| e.wrong_both),
            hn_bound: f(|e| e.hn_bound),
        })
    }
}

/// Square-root decoder built on the typical projectors of one assisted instance.
#[derive(Debug, Clone)]
pub struct SimultaneousDecoder {
    pub setup: MacSetup,
    pub projectors: MacProjectors,
    pub delta: f64,
}

impl SimultaneousDecoder {
    pub fn new(
        mac: &KrausChannel,
        phi: &PureState,
        psi: &PureState,
        n: usize,
        delta: f64,
    ) -> Result<Self> {
        let setup = MacSetup::new(mac, phi, psi, n)?;
        let projectors = MacProjectors::new(&setup, delta)?;
        Ok(Self {
            setup,
            projectors,
            delta,
        })
    }

    pub fn from_setup(setup: MacSetup, delta: f64) -> Result<Self> {
        let projectors = MacProjectors::new(&setup, delta)?;
        Ok(Self {
            setup,
            projectors,
            delta,
        })
    }

    /// `1 - min(Tr{Π̂1 ρ}, Tr{Π̂2 ρ}, Tr{Π̂3 ρ}, Tr{Π^{ABC} ρ})`; each trace is the same for every
    /// encoding since the encoders commute with the marginal projectors they meet.
    pub fn epsilon_measured(&self) -> f64 {
        let rho = self.setup.rho.matrix();
        let p = &self.projectors;
        let m = [&p.hat1, &p.hat2, &p.hat3, &p.abc]
            .iter()
            .map(|q| tr_prod(q, rho))
            .fold(f64::INFINITY, f64::min);
        (1.0 - m).max(0.0)
    }

    fn encoders(&self, pair: &MacCodePair) -> Result<(Vec<CMat>, Vec<CMat>)> {
        let u1 = pair
            .book1
            .entries
            .iter()
            .map(|s| self.setup.encoder_a(s))
            .collect::<Result<Vec<_>>>()?;
        let u2 = pair
            .book2
            .entries
            .iter()
            .map(|s| self.setup.encoder_b(s))
            .collect::<Result<Vec<_>>>()?;
        Ok((u1, u2))
    }

    /// `Υ_{l,m}` in row-major order.
    pub fn upsilons(&self, pair: &MacCodePair) -> Result<Vec<CMat>> {
        let (u1, u2) = self.encoders(pair)?;
        let p = &self.projectors;
        let mut out = Vec::with_capacity(u1.len() * u2.len());
        for a in &u1 {
            for b in &u2 {
                out.push(build_upsilon(a, b, &p.hat2, &p.hat3, &p.abc)?);
            }
        }
        Ok(out)
    }

    pub fn povm(&self, pair: &MacCodePair) -> Result<PovmSet> {
        sqrt_measurement(&self.upsilons(pair)?)
    }

    /// The error split behind the bound on the average error of [`Self::povm`].
    pub fn error_split(&self, pair: &MacCodePair) -> Result<ErrorSplit> {
        let (l_n, m_n) = (pair.l(), pair.m());
        let ups = self.upsilons(pair)?;
        let (_, u2) = self.encoders(pair)?;
        let cw = codewords(&self.setup, pair)?;
        let id = identity(self.setup.dim());
        let mut acc = [0.0f64; 5];
        for m in 0..m_n {
            let g = &u2[m] * &self.projectors.hat1 * u2[m].adjoint();
            for l in 0..l_n {
                let sigma = &cw[l * m_n + m];
                let theta = &g * sigma * &g;
                acc[0] += trace_norm_hermitian(&(&theta - sigma))?;
                acc[1] += tr_prod(&(&id - &ups[l * m_n + m]), &theta);
                for lp in 0..l_n {
                    for mp in 0..m_n {
                        if lp == l && mp == m {
                            continue;
                        }
                        let v = tr_prod(&ups[lp * m_n + mp], &theta);
                        let slot = match (lp == l, mp == m) {
                            (false, true) => 2,
                            (true, false) => 3,
                            _ => 4,
                        };
                        acc[slot] += v;
                    }
                }
            }
        }
        let k = (l_n * m_n) as f64;
        let [gentle, first, wrong_l, wrong_m, wrong_both] = acc.map(|v| v / k);
        Ok(ErrorSplit {
            gentle,
            first,
            wrong_l,
            wrong_m,
            wrong_both,
            hn_bound: gentle + 2.0 * first + 4.0 * (wrong_l + wrong_m + wrong_both),
        })
    }

    /// Projector families of the two-stage decoder: `Π = Π^A Π^B Π^C`, `Π_l = U1 Π̂2 U1†` and
    /// `Π_{l,m} = U1 U2 Π^{ABC} U2† U1†`.
    pub fn successive_projectors(&self, pair: &MacCodePair) -> Result<SuccessiveProjectors> {
        let (u1, u2) = self.encoders(pair)?;
        let p = &self.projectors;
        let pi = &p.a * &p.b * &p.c;
        let pi_x = u1.iter().map(|u| u * &p.hat2 * u.adjoint()).collect();
        let pi_xy = u1
            .iter()
            .map(|a| {
                u2.iter()
                    .map(|b| {
                        let w = a * b;
                        &w * &p.abc * w.adjoint()
                    })
                    .collect()
            })
            .collect();
        Ok(SuccessiveProjectors { pi, pi_x, pi_xy })
    }

    /// Two-stage POVM in row-major `(l, m)` order.
    pub fn successive_povm(&self, pair: &MacCodePair) -> Result<PovmSet> {
        let proj = self.successive_projectors(pair)?;
        let lx: Vec<usize> = (0..pair.l()).collect();
        let my: Vec<usize> = (0..pair.m()).collect();
        successive_povm(&lx, &my, &proj)
    }

    /// Exact average error of the two-stage decoder.
    pub fn successive_error(&self, pair: &MacCodePair) -> Result<f64> {
        let proj = self.successive_projectors(pair)?;
        let (l_n, m_n) = (pair.l(), pair.m());
        let cw = codewords(&self.setup, pair)?;
        let states = (0..l_n)
            .map(|l| cw[l * m_n..(l + 1) * m_n].to_vec())
            .collect();
        let ens = DoubleEnsemble {
            px: vec![1.0 / l_n as f64; l_n],
            py: vec![1.0 / m_n as f64; m_n],
            states,
        };
        let lx: Vec<usize> = (0..l_n).collect();
        let my: Vec<usize> = (0..m_n).collect();
        Ok(1.0 - successive_success(&lx, &my, &ens, &proj)?)
    }
}

/// Which decoder a MAC experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderMode {
    Successive,
    Simultaneous,
}

impl std::str::FromStr for DecoderMode {
    type Err = QmacError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "successive" => Ok(Self::Successive),
            "simultaneous" => Ok(Self::Simultaneous),
            other => Err(QmacError::Parse(format!("unknown decoder mode `{other}`"))),
        }
    }
}

/// Report of an assisted MAC experiment, averaged over sampled code pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacReport {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub mode: DecoderMode,
    pub delta: f64,
    pub avg_error: f64,
    pub avg_error_stderr: f64,
    pub max_error_randomized: f64,
    pub epsilon_measured: f64,
    pub seed: u64,
    /// Per-trial code seeds `(Alice, Bob)`.
    pub seeds: Vec<[u64; 2]>,
    pub trials: usize,
    /// Mean error split (simultaneous mode only).
    pub error_terms: Option<ErrorSplit>,
}

struct Trial {
    avg: f64,
    max: f64,
    split: Option<ErrorSplit>,
    seeds: [u64; 2],
}

/// Runs one decoder on `trials` code pairs; trial `i` uses `derive_seed(seed, i)`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_mac(
    mac: &KrausChannel,
    phi: &PureState,
    psi: &PureState,
    n: usize,
    l: usize,
    m: usize,
    mode: DecoderMode,
    delta: f64,
    seed: u64,
    trials: usize,
) -> Result<MacReport> {
    if l == 0 || m == 0 || trials == 0 {
        return Err(QmacError::InvalidParameter(
            "L, M and trials must be positive".into(),
        ));
    }
    let dec = SimultaneousDecoder::new(mac, phi, psi, n, delta)?;
    let runs = (0..trials)
        .into_par_iter()
        .map(|i| {
            let pair = MacCodePair::sample(&dec.setup, l, m, derive_seed(seed, i as u64));
            let (povm, split) = match mode {
                DecoderMode::Simultaneous => (dec.povm(&pair)?, Some(dec.error_split(&pair)?)),
                DecoderMode::Successive => (dec.successive_povm(&pair)?, None),
            };
            Ok(Trial {
                avg: average_error(&dec.setup, &pair, &povm)?,
                max: max_error_via_randomization(&dec.setup, &pair, &povm)?,
                split,
                seeds: pair.seeds(),
            })
        })
        .collect::<Result<Vec<Trial>>>()?;
    let avgs: Vec<f64> = runs.iter().map(|t| t.avg).collect();
    let (mean, stderr) = mean_stderr(&avgs);
    let splits: Vec<ErrorSplit> = runs.iter().filter_map(|t| t.split).collect();
    Ok(MacReport {
        n,
        l,
        m,
        mode,
        delta,
        avg_error: mean,
        avg_error_stderr: stderr,
        max_error_randomized: runs.iter().map(|t| t.max).sum::<f64>() / trials as f64,
        epsilon_measured: dec.epsilon_measured(),
        seed,
        seeds: runs.iter().map(|t| t.seeds).collect(),
        trials,
        error_terms: ErrorSplit::mean(&splits),
    })
}

/// `{p_X(x) p_Y(y), N(ρ_x ⊗ σ_y)}` for classical-quantum inputs.
pub fn cq_double_ensemble(
    mac: &KrausChannel,
    ens_x: &Ensemble,
    ens_y: &Ensemble,
) -> Result<DoubleEnsemble> {
    if mac.num_inputs() != 2 {
        return Err(QmacError::InvalidParameter(format!(
            "MAC needs 2 inputs, channel has {}",
            mac.num_inputs()
        )));
    }
    let ch = mac.relabel(&["A'", "B'"], &["C"])?;
    let in_space = ch.in_space().clone();
    let states = ens_x
        .iter()
        .map(|(_, rx)| {
            ens_y
                .iter()
                .map(|(_, ry)| {
                    Ok(ch
                        .apply(
                            &Operator::new(in_space.clone(), kron(rx, ry))?,
                            &["A'", "B'"],
                        )?
                        .into_matrix())
                })
                .collect::<Result<Vec<CMat>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DoubleEnsemble {
        px: ens_x.iter().map(|e| e.0).collect(),
        py: ens_y.iter().map(|e| e.0).collect(),
        states,
    })
}

/// A pair of classical codes: sequences `x^n(l)` and `y^n(m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CqCodePair {
    pub seed: u64,
    pub x: Vec<Vec<usize>>,
    pub y: Vec<Vec<usize>>,
}

/// Simultaneous decoder for unassisted classical communication with product-state inputs.
///
/// `Υ_{l,m} = Π Π_{x^n} Π_{y^n} Π_{x^n y^n} Π_{y^n} Π_{x^n} Π`, with `Π` typical for the average
/// output and the others conditionally typical for `H(C|X)`, `H(C|Y)` and `H(C|XY)`.
#[derive(Debug, Clone)]
pub struct UnassistedDecoder {
    pub ensemble: DoubleEnsemble,
    pub n: usize,
    pub delta: f64,
    /// `(H(C|X), H(C|Y), H(C|XY))`.
    pub conditional_entropies: [f64; 3],
    pub region: RateRegion,
    pi: CMat,
    rho_x: Vec<CMat>,
    rho_y: Vec<CMat>,
}

impl UnassistedDecoder {
    pub fn new(
        mac: &KrausChannel,
        ens_x: &Ensemble,
        ens_y: &Ensemble,
        n: usize,
        delta: f64,
    ) -> Result<Self> {
        let ensemble = cq_double_ensemble(mac, ens_x, ens_y)?;
        let region = unassisted_cc_region(mac, ens_x, ens_y)?;
        let (nx, ny) = (ensemble.px.len(), ensemble.py.len());
        let rho_x: Vec<CMat> = (0..nx).map(|x| ensemble.rho_x(x)).collect();
        let rho_y: Vec<CMat> = (0..ny)
            .map(|y| {
                let d = ensemble.states[0][0].nrows();
                let mut acc = CMat::zeros(d, d);
                for x in 0..nx {
                    acc += &ensemble.states[x][y] * r(ensemble.px[x]);
                }
                acc
            })
            .collect();
        let mut h = [0.0; 3];
        for x in 0..nx {
            h[0] += ensemble.px[x] * von_neumann_entropy(&rho_x[x])?;
            for y in 0..ny {
                h[2] +=
                    ensemble.px[x] * ensemble.py[y] * von_neumann_entropy(&ensemble.states[x][y])?;
            }
        }
        for y in 0..ny {
            h[1] += ensemble.py[y] * von_neumann_entropy(&rho_y[y])?;
        }
        let avg = ensemble.average();
        let space = crate::qmat::FactorSpace::single("C", avg.nrows())?;
        let pi = typical_projector(&Operator::new(space, avg)?, n, delta)?
            .projector
            .into_matrix();
        Ok(Self {
            ensemble,
            n,
            delta,
            conditional_entropies: h,
            region,
            pi,
            rho_x,
            rho_y,
        })
    }

    pub fn dim(&self) -> usize {
        self.pi.nrows()
    }

    /// Draws `x^n(l)` i.i.d. from `p_X` and `y^n(m)` from `p_Y`; sender `k` uses ChaCha stream `k`.
    pub fn sample(&self, l: usize, m: usize, seed: u64) -> Result<CqCodePair> {
        let draw = |p: &[f64], count: usize, stream: u64| -> Result<Vec<Vec<usize>>> {
            let dist =
                WeightedIndex::new(p).map_err(|e| QmacError::InvalidParameter(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            Ok((0..count)
                .map(|_| (0..self.n).map(|_| dist.sample(&mut rng)).collect())
                .collect())
        };
        Ok(CqCodePair {
            seed,
            x: draw(&self.ensemble.px, l, 0)?,
            y: draw(&self.ensemble.py, m, 1)?,
        })
    }

    /// `⊗_i ρ_{x_i, y_i}`.
    pub fn codeword(&self, x: &[usize], y: &[usize]) -> CMat {
        let parts: Vec<&CMat> = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| &self.ensemble.states[a][b])
            .collect();
        kron_all(&parts)
    }

    pub fn upsilons(&self, pair: &CqCodePair) -> Result<Vec<CMat>> {
        let [h_x, h_y, h_xy] = self.conditional_entropies;
        let pick = |v: &[CMat], seq: &[usize]| -> Vec<CMat> {
            seq.iter().map(|&i| v[i].clone()).collect()
        };
        let px = pair
            .x
            .iter()
            .map(|x| product_typical_projector(&pick(&self.rho_x, x), h_x, self.delta))
            .collect::<Result<Vec<_>>>()?;
        let py = pair
            .y
            .iter()
            .map(|y| product_typical_projector(&pick(&self.rho_y, y), h_y, self.delta))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(pair.x.len() * pair.y.len());
        for (x, pxl) in pair.x.iter().zip(&px) {
            for (y, pym) in pair.y.iter().zip(&py) {
                let states: Vec<CMat> = x
                    .iter()
                    .zip(y)
                    .map(|(&a, &b)| self.ensemble.states[a][b].clone())
                    .collect();
                let pxy = product_typical_projector(&states, h_xy, self.delta)?;
                let g = pxy * pym * pxl * &self.pi;
                out.push(g.adjoint() * g);
            }
        }
        Ok(out)
    }

    /// Exact average error of the square-root decoder on one code pair.
    pub fn average_error(&self, pair: &CqCodePair) -> Result<f64> {
        let povm = sqrt_measurement(&self.upsilons(pair)?)?;
        let cw: Vec<CMat> = pair
            .x
            .iter()
            .flat_map(|x| pair.y.iter().map(move |y| (x, y)))
            .map(|(x, y)| self.codeword(x, y))
            .collect();
        average_error_of(&povm, &cw)
    }
}

/// Report of the unassisted simultaneous decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnassistedReport {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub delta: f64,
    /// `(log2 L / n, log2 M / n)`.
    pub rates: [f64; 2],
    pub region: RateRegion,
    pub avg_error: f64,
    pub avg_error_stderr: f64,
    pub seed: u64,
    pub trials: usize,
}

/// Runs the unassisted decoder on `trials` sampled code pairs.
#[allow(clippy::too_many_arguments)]
pub fn simulate_unassisted(
    mac: &KrausChannel,
    ens_x: &Ensemble,
    ens_y: &Ensemble,
    n: usize,
    l: usize,
    m: usize,
    delta: f64,
    seed: u64,
    trials: usize,
) -> Result<UnassistedReport> {
    if l == 0 || m == 0 || trials == 0 {
        return Err(QmacError::InvalidParameter(
            "L, M and trials must be positive".into(),
        ));
    }
    let dec = UnassistedDecoder::new(mac, ens_x, ens_y, n, delta)?;
    let errs = (0..trials)
        .into_par_iter()
        .map(|i| dec.average_error(&dec.sample(l, m, derive_seed(seed, i as u64))?))
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&errs);
    Ok(UnassistedReport {
        n,
        l,
        m,
        delta,
        rates: [(l as f64).log2() / n as f64, (m as f64).log2() / n as f64],
        region: dec.region.clone(),
        avg_error: mean,
        avg_error_stderr: stderr,
        seed,
        trials,
    })
}

/// `Σ Λ` of a POVM has spectrum inside `[0, 1 + tol]`.
pub fn povm_complete_within(povm: &PovmSet, tol: f64) -> bool {
    povm.sum_max_eigenvalue() <= 1.0 + tol
}
