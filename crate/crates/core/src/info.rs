//! Von Neumann entropies and capacity-region calculators. All logarithms are base 2.

use serde::{Deserialize, Serialize};

use crate::error::{QmacError, Result};
use crate::qmat::{
    eigenvalues_hermitian, kron, CMat, FactorSpace, KrausChannel, Operator, PureState, PSD_TOL,
};

/// `-Σ λ log2 λ`; eigenvalues in `[-PSD_TOL, 0]` are treated as zero.
pub fn von_neumann_entropy(rho: &CMat) -> Result<f64> {
    entropy_of_spectrum(&eigenvalues_hermitian(rho)?)
}

/// Shannon entropy (bits) of a spectrum, rejecting values below `-PSD_TOL`.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for &l in values {
        if l < -PSD_TOL {
            return Err(QmacError::NegativeEigenvalue(l));
        }
        if l > 0.0 {
            h -= l * l.log2();
        }
    }
    Ok(h.max(0.0))
}

/// Entropy of the marginal on `labels` (empty set gives 0).
pub fn entropy<S: AsRef<str>>(rho: &Operator, labels: &[S]) -> Result<f64> {
    if labels.is_empty() {
        return Ok(0.0);
    }
    von_neumann_entropy(rho.partial_trace(labels)?.matrix())
}

fn union<'a>(parts: &[&'a [&'a str]]) -> Result<Vec<&'a str>> {
    let mut out: Vec<&str> = Vec::new();
    for p in parts {
        for &l in *p {
            if out.contains(&l) {
                return Err(QmacError::InvalidParameter(format!(
                    "label `{l}` appears in two parts"
                )));
            }
            out.push(l);
        }
    }
    Ok(out)
}

/// `I(A;B) = H(A) + H(B) - H(AB)`; factors outside both parts are traced out.
pub fn mutual_information(rho: &Operator, a: &[&str], b: &[&str]) -> Result<f64> {
    let ab = union(&[a, b])?;
    Ok(entropy(rho, a)? + entropy(rho, b)? - entropy(rho, &ab)?)
}

/// `I(A;B|C) = H(AC) + H(BC) - H(C) - H(ABC)`.
pub fn conditional_mutual_information(
    rho: &Operator,
    a: &[&str],
    b: &[&str],
    cond: &[&str],
) -> Result<f64> {
    let ac = union(&[a, cond])?;
    let bc = union(&[b, cond])?;
    let abc = union(&[a, b, cond])?;
    Ok(entropy(rho, &ac)? + entropy(rho, &bc)? - entropy(rho, cond)? - entropy(rho, &abc)?)
}

/// `I(A⟩B) = H(B) - H(AB)`.
pub fn coherent_information(rho: &Operator, a: &[&str], b: &[&str]) -> Result<f64> {
    let ab = union(&[a, b])?;
    Ok(entropy(rho, b)? - entropy(rho, &ab)?)
}

/// `I(A⟩B|C) = H(BC) - H(ABC)`.
pub fn conditional_coherent_information(
    rho: &Operator,
    a: &[&str],
    b: &[&str],
    cond: &[&str],
) -> Result<f64> {
    let bc = union(&[b, cond])?;
    let abc = union(&[a, b, cond])?;
    Ok(entropy(rho, &bc)? - entropy(rho, &abc)?)
}

/// The pentagon `{0 ≤ R1 ≤ r1, 0 ≤ R2 ≤ r2, R1 + R2 ≤ sum}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub r1: f64,
    pub r2: f64,
    pub sum: f64,
    /// Extreme points, counter-clockwise from the origin.
    pub vertices: Vec<[f64; 2]>,
}

impl RateRegion {
    /// Builds the region; negative bounds are clamped to 0.
    pub fn new(r1: f64, r2: f64, sum: f64) -> Self {
        let (r1, r2, sum) = (r1.max(0.0), r2.max(0.0), sum.max(0.0));
        Self {
            r1,
            r2,
            sum,
            vertices: pentagon_vertices(r1, r2, sum),
        }
    }

    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        p[0] >= -tol
            && p[1] >= -tol
            && p[0] <= self.r1 + tol
            && p[1] <= self.r2 + tol
            && p[0] + p[1] <= self.sum + tol
    }

    /// Whether every vertex of `other` lies in `self`.
    pub fn contains_region(&self, other: &RateRegion, tol: f64) -> bool {
        other.vertices.iter().all(|&v| self.contains(v, tol))
    }

    /// All three bounds multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.r1 * k, self.r2 * k, self.sum * k)
    }
}

fn pentagon_vertices(a: f64, b: f64, c: f64) -> Vec<[f64; 2]> {
    let a1 = a.min(c);
    let b1 = b.min(c);
    let pts = if a1 + b1 <= c {
        vec![[0.0, 0.0], [a1, 0.0], [a1, b1], [0.0, b1]]
    } else {
        vec![[0.0, 0.0], [a1, 0.0], [a1, c - a1], [c - b1, b1], [0.0, b1]]
    };
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for p in pts {
        if !out
            .iter()
            .any(|q| (q[0] - p[0]).abs() <= 1e-15 && (q[1] - p[1]).abs() <= 1e-15)
        {
            out.push(p);
        }
    }
    out
}

/// Region of coherent-information bounds, clamped, with the raw values kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsdRegion {
    pub region: RateRegion,
    pub raw_r1: f64,
    pub raw_r2: f64,
    pub raw_sum: f64,
}

fn two_factor(state: &PureState, what: &str) -> Result<()> {
    if state.space().len() != 2 {
        return Err(QmacError::InvalidParameter(format!(
            "{what} must have two factors (sent, kept), found {}",
            state.space().len()
        )));
    }
    Ok(())
}

fn mac_inputs(mac: &KrausChannel) -> Result<()> {
    if mac.num_inputs() != 2 {
        return Err(QmacError::InvalidParameter(format!(
            "MAC needs 2 inputs, channel has {}",
            mac.num_inputs()
        )));
    }
    Ok(())
}

/// `ρ^{ABC} = N^{A'B'→C}(φ^{A'A} ⊗ ψ^{B'B})` with factors ordered `A, B, C`.
///
/// The first factor of each pure state is the one fed to the channel.
pub fn mac_output_state(mac: &KrausChannel, phi: &PureState, psi: &PureState) -> Result<Operator> {
    mac_inputs(mac)?;
    two_factor(phi, "phi")?;
    two_factor(psi, "psi")?;
    let phi = phi.relabel(&["A'", "A"])?;
    let psi = psi.relabel(&["B'", "B"])?;
    let ch = mac.relabel(&["A'", "B'"], &["C"])?;
    let state = phi.tensor(&psi)?.density();
    ch.apply(&state, &["A'", "B'"])?.permute(&["A", "B", "C"])
}

/// Entanglement-assisted classical region `(I(A;C|B), I(B;C|A), I(AB;C))`.
pub fn ea_cc_region(mac: &KrausChannel, phi: &PureState, psi: &PureState) -> Result<RateRegion> {
    let rho = mac_output_state(mac, phi, psi)?;
    ea_cc_region_of_state(&rho)
}

/// The three assisted bounds evaluated on a given `ρ^{ABC}`.
pub fn ea_cc_region_of_state(rho: &Operator) -> Result<RateRegion> {
    Ok(RateRegion::new(
        conditional_mutual_information(rho, &["A"], &["C"], &["B"])?,
        conditional_mutual_information(rho, &["B"], &["C"], &["A"])?,
        mutual_information(rho, &["A", "B"], &["C"])?,
    ))
}

/// Entanglement-assisted quantum region: half the classical one.
pub fn ea_q_region(mac: &KrausChannel, phi: &PureState, psi: &PureState) -> Result<RateRegion> {
    Ok(ea_cc_region(mac, phi, psi)?.scaled(0.5))
}

/// Coherent-information region `(I(A⟩C|B), I(B⟩C|A), I(AB⟩C))`.
pub fn lsd_q_region(mac: &KrausChannel, phi: &PureState, psi: &PureState) -> Result<LsdRegion> {
    let rho = mac_output_state(mac, phi, psi)?;
    let raw_r1 = conditional_coherent_information(&rho, &["A"], &["C"], &["B"])?;
    let raw_r2 = conditional_coherent_information(&rho, &["B"], &["C"], &["A"])?;
    let raw_sum = coherent_information(&rho, &["A", "B"], &["C"])?;
    Ok(LsdRegion {
        region: RateRegion::new(raw_r1, raw_r2, raw_sum),
        raw_r1,
        raw_r2,
        raw_sum,
    })
}

/// Ensemble `{p(x), ρ_x}`.
pub type Ensemble = [(f64, CMat)];

/// Tolerance on `Σ p = 1` for ensembles.
const ENSEMBLE_TOL: f64 = 1e-9;

fn check_ensemble(ens: &Ensemble, what: &str) -> Result<()> {
    if ens.is_empty() {
        return Err(QmacError::InvalidParameter(format!(
            "ensemble {what} is empty"
        )));
    }
    if let Some((p, _)) = ens.iter().find(|(p, _)| !(*p >= 0.0)) {
        return Err(QmacError::InvalidParameter(format!(
            "ensemble {what} has probability {p}"
        )));
    }
    let total: f64 = ens.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > ENSEMBLE_TOL {
        return Err(QmacError::InvalidParameter(format!(
            "ensemble {what} has total probability {total}"
        )));
    }
    Ok(())
}

/// Unassisted region `(I(X;C|Y), I(Y;C|X), I(XY;C))` for product input ensembles.
pub fn unassisted_cc_region(
    mac: &KrausChannel,
    ens_x: &Ensemble,
    ens_y: &Ensemble,
) -> Result<RateRegion> {
    mac_inputs(mac)?;
    let rho = cq_mac_state(mac, ens_x, ens_y)?;
    Ok(RateRegion::new(
        conditional_mutual_information(&rho, &["X"], &["C"], &["Y"])?,
        conditional_mutual_information(&rho, &["Y"], &["C"], &["X"])?,
        mutual_information(&rho, &["X", "Y"], &["C"])?,
    ))
}

/// `Σ p(x) p(y) |x⟩⟨x| ⊗ |y⟩⟨y| ⊗ N(ρ_x ⊗ σ_y)` on factors `X, Y, C`.
pub fn cq_mac_state(mac: &KrausChannel, ens_x: &Ensemble, ens_y: &Ensemble) -> Result<Operator> {
    check_ensemble(ens_x, "X")?;
    check_ensemble(ens_y, "Y")?;
    let (nx, ny) = (ens_x.len(), ens_y.len());
    let dims = mac.in_space().dims();
    let ch = mac.relabel(&["A'", "B'"], &["C"])?;
    let in_space = FactorSpace::new(&["A'", "B'"], dims)?;
    let dc = mac.out_space().dim();
    let space = FactorSpace::new(&["X", "Y", "C"], &[nx, ny, dc])?;
    let mut out = CMat::zeros(space.dim(), space.dim());
    for (x, (px, rx)) in ens_x.iter().enumerate() {
        for (y, (py, ry)) in ens_y.iter().enumerate() {
            let w = px * py;
            if w == 0.0 {
                continue;
            }
            let inp = Operator::new(in_space.clone(), kron(rx, ry))?;
            let o = ch.apply(&inp, &["A'", "B'"])?;
            let base = (x * ny + y) * dc;
            for i in 0..dc {
                for j in 0..dc {
                    out[(base + i, base + j)] += o.matrix()[(i, j)] * w;
                }
            }
        }
    }
    Operator::new(space, out)
}
