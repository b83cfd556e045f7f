//! Entanglement-assisted random codes built from the type decomposition of `|φ⟩^⊗n`.
//!
//! `|φ⟩^{A'A} = Σ_z √p(z) |u_z⟩|v_z⟩` is split by type as `|φ⟩^⊗n = Σ_t √p(t) |Φ_t⟩` with
//! `|Φ_t⟩ = d_t^{-1/2} Σ_{z^n ∈ T_t} |u_{z^n}⟩|v_{z^n}⟩`. A code index `s` picks one
//! Heisenberg–Weyl operator `(-1)^{b_t} X(x_t) Z(z_t)` per type block; the sender applies
//! `U(s)` to `A'^n` and, by the transpose trick, the same state arises from `U^T(s)` on `A^n`.

use std::collections::BTreeMap;

use nalgebra::SVD;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QmacError, Result};
use crate::qmat::{
    copy_labels, heisenberg_weyl, identity, kron, kron_all, r, CMat, CVec, FactorSpace,
    KrausChannel, Operator, PureState,
};
use crate::typicality::{enumerate_types, grouped_labels, TypeClass};

/// Schmidt coefficients below this are dropped.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;

/// Largest index set the exhaustive enumerator will list.
pub const INDEX_SET_CAP: u128 = 1 << 20;

/// Schmidt decomposition `|φ⟩ = Σ_z √p_z |u_z⟩|v_z⟩`.
#[derive(Debug, Clone)]
pub struct Schmidt {
    /// `p_z`, descending, strictly positive.
    pub weights: Vec<f64>,
    /// Columns `|u_z⟩` on the sender side.
    pub sender_basis: CMat,
    /// Columns `|v_z⟩` on the receiver side.
    pub receiver_basis: CMat,
}

impl Schmidt {
    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    /// `√p_z`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.weights.iter().map(|p| p.sqrt()).collect()
    }
}

/// Schmidt decomposition across `sender | rest` via the singular value decomposition of the
/// reshaped amplitude matrix.
pub fn schmidt<S: AsRef<str>>(phi: &PureState, sender: &[S]) -> Result<Schmidt> {
    let space = phi.space();
    let rest = space.complement(sender);
    let mut order: Vec<String> = sender.iter().map(|s| s.as_ref().to_string()).collect();
    order.extend(rest.iter().cloned());
    let moved = phi.permute(&order)?;
    let da = space.select(sender)?.dim();
    let db = space.dim() / da;
    let m = CMat::from_row_iterator(da, db, moved.vector().iter().copied());
    let svd = SVD::new(m, true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    idx.retain(|&i| svd.singular_values[i] * svd.singular_values[i] > SCHMIDT_CUTOFF);
    let mut weights = Vec::with_capacity(idx.len());
    let mut ub = CMat::zeros(da, idx.len());
    let mut vb = CMat::zeros(db, idx.len());
    for (j, &i) in idx.iter().enumerate() {
        let s = svd.singular_values[i];
        weights.push(s * s);
        ub.set_column(j, &u.column(i));
        for k in 0..db {
            vb[(k, j)] = vt[(i, k)];
        }
    }
    Ok(Schmidt {
        weights,
        sender_basis: ub,
        receiver_basis: vb,
    })
}

/// Type decomposition of `|φ⟩^⊗n` in the Schmidt basis.
#[derive(Debug, Clone)]
pub struct TypeDecomposition {
    pub n: usize,
    pub schmidt: Schmidt,
    pub types: Vec<TypeClass>,
    /// `p(t) = p(z_t^n) d_t`.
    pub type_probs: Vec<f64>,
    /// Start of each type block in the type-ordered sequence basis.
    pub offsets: Vec<usize>,
    /// Sequences in type-ordered position.
    pub sequences: Vec<Vec<usize>>,
    /// Isometry whose columns are `|u_{z^n}⟩` in type order, on `A'_1..A'_n`.
    pub sender_iso: CMat,
    /// Isometry whose columns are `|v_{z^n}⟩` in type order, on `A_1..A_n`.
    pub receiver_iso: CMat,
    sender_dim: usize,
    receiver_dim: usize,
}

impl TypeDecomposition {
    /// `phi` has two factors: the sent one first, the kept one second.
    pub fn new(phi: &PureState, n: usize) -> Result<Self> {
        if phi.space().len() != 2 {
            return Err(QmacError::InvalidParameter(
                "phi must have two factors (sent, kept)".into(),
            ));
        }
        if n == 0 {
            return Err(QmacError::InvalidParameter("n must be positive".into()));
        }
        let sent = phi.space().labels()[0].clone();
        let sch = schmidt(phi, &[sent])?;
        let (da, db) = (phi.space().dims()[0], phi.space().dims()[1]);
        FactorSpace::new(
            &grouped_labels(&["S", "R"], n),
            &[vec![da; n], vec![db; n]].concat(),
        )?;
        let k = sch.rank();
        let types = enumerate_types(n, k)?;
        let mut type_probs = Vec::with_capacity(types.len());
        let mut offsets = Vec::with_capacity(types.len());
        let mut sequences = Vec::new();
        for t in &types {
            type_probs.push(t.sequence_probability(&sch.weights) * t.size as f64);
            offsets.push(sequences.len());
            sequences.extend(t.members());
        }
        let column = |basis: &CMat, seq: &[usize]| -> CMat {
            let cols: Vec<CMat> = seq
                .iter()
                .map(|&z| basis.columns(z, 1).into_owned())
                .collect();
            let refs: Vec<&CMat> = cols.iter().collect();
            kron_all(&refs)
        };
        let (sd, rd) = (da.pow(n as u32), db.pow(n as u32));
        let mut sender_iso = CMat::zeros(sd, sequences.len());
        let mut receiver_iso = CMat::zeros(rd, sequences.len());
        for (j, seq) in sequences.iter().enumerate() {
            sender_iso.set_column(j, &column(&sch.sender_basis, seq).column(0));
            receiver_iso.set_column(j, &column(&sch.receiver_basis, seq).column(0));
        }
        Ok(Self {
            n,
            schmidt: sch,
            types,
            type_probs,
            offsets,
            sequences,
            sender_iso,
            receiver_iso,
            sender_dim: sd,
            receiver_dim: rd,
        })
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    /// `d_t`.
    pub fn block_dim(&self, t: usize) -> usize {
        self.types[t].size as usize
    }

    pub fn sender_dim(&self) -> usize {
        self.sender_dim
    }

    pub fn receiver_dim(&self) -> usize {
        self.receiver_dim
    }

    /// `|Φ_t⟩` on `A'^n ⊗ A^n` (sender factors first).
    pub fn block_state(&self, t: usize) -> CVec {
        let (o, d) = (self.offsets[t], self.block_dim(t));
        let mut v = CVec::zeros(self.sender_dim * self.receiver_dim);
        let w = 1.0 / (d as f64).sqrt();
        for j in o..o + d {
            v += kron(
                &self.sender_iso.columns(j, 1).into_owned(),
                &self.receiver_iso.columns(j, 1).into_owned(),
            )
            .column(0)
                * r(w);
        }
        v
    }

    /// `|φ⟩^⊗n = Σ_t √p(t) |Φ_t⟩` on `A'^n ⊗ A^n`.
    pub fn reassembled(&self) -> CVec {
        let mut v = CVec::zeros(self.sender_dim * self.receiver_dim);
        for t in 0..self.num_types() {
            v += self.block_state(t) * r(self.type_probs[t].sqrt());
        }
        v
    }

    /// `π_t` on the receiver side `A^n`.
    pub fn receiver_type_state(&self, t: usize) -> CMat {
        let (o, d) = (self.offsets[t], self.block_dim(t));
        let w = self.receiver_iso.columns(o, d);
        (w * w.adjoint()) * r(1.0 / d as f64)
    }

    /// `π_t` on the sender side `A'^n`.
    pub fn sender_type_state(&self, t: usize) -> CMat {
        let (o, d) = (self.offsets[t], self.block_dim(t));
        let w = self.sender_iso.columns(o, d);
        (w * w.adjoint()) * r(1.0 / d as f64)
    }

    /// `|𝒮| = Π_t 2 d_t²`.
    pub fn index_set_size(&self) -> u128 {
        self.types
            .iter()
            .fold(1u128, |a, t| a.saturating_mul(2 * t.size * t.size))
    }

    /// Block matrix `⊕_t (-1)^{b_t} X(x_t) Z(z_t)` in the type-ordered sequence basis.
    pub fn block_matrix(&self, s: &HwIndex) -> Result<CMat> {
        if s.blocks.len() != self.num_types() {
            return Err(QmacError::ShapeMismatch(format!(
                "index has {} blocks for {} types",
                s.blocks.len(),
                self.num_types()
            )));
        }
        let total = self.sequences.len();
        let mut b = CMat::zeros(total, total);
        for (t, blk) in s.blocks.iter().enumerate() {
            let d = self.block_dim(t);
            if blk.x >= d || blk.z >= d || blk.b > 1 {
                return Err(QmacError::InvalidParameter(format!(
                    "index entry {blk:?} for block dimension {d}"
                )));
            }
            let sign = if blk.b == 1 { -1.0 } else { 1.0 };
            let m = heisenberg_weyl(d, blk.x, blk.z) * r(sign);
            b.view_mut((self.offsets[t], self.offsets[t]), (d, d))
                .copy_from(&m);
        }
        Ok(b)
    }

    /// Sender unitary `U(s)` on `A'^n` (identity off the Schmidt support).
    pub fn sender_unitary(&self, s: &HwIndex) -> Result<CMat> {
        let b = self.block_matrix(s)?;
        Ok(lift(&self.sender_iso, &b))
    }

    /// Receiver-side image `U^T(s)` on `A^n`, transposed in the Schmidt basis.
    pub fn receiver_unitary(&self, s: &HwIndex) -> Result<CMat> {
        let b = self.block_matrix(s)?;
        Ok(lift(&self.receiver_iso, &b.transpose()))
    }

    /// Every index of `𝒮`, in lexicographic order of `(x_t, z_t, b_t)` per type.
    pub fn enumerate_index_set(&self) -> Result<Vec<HwIndex>> {
        let size = self.index_set_size();
        if size > INDEX_SET_CAP {
            return Err(QmacError::EnumerationCap {
                required: size,
                cap: INDEX_SET_CAP,
            });
        }
        let mut out = vec![HwIndex { blocks: vec![] }];
        for t in 0..self.num_types() {
            let d = self.block_dim(t);
            let mut next = Vec::with_capacity(out.len() * 2 * d * d);
            for s in &out {
                for x in 0..d {
                    for z in 0..d {
                        for b in 0..2u8 {
                            let mut s2 = s.clone();
                            s2.blocks.push(HwBlock { x, z, b });
                            next.push(s2);
                        }
                    }
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// Uniform draw from `𝒮`.
    pub fn sample_index<R: Rng>(&self, rng: &mut R) -> HwIndex {
        let blocks = (0..self.num_types())
            .map(|t| {
                let d = self.block_dim(t);
                HwBlock {
                    x: rng.gen_range(0..d),
                    z: rng.gen_range(0..d),
                    b: rng.gen_range(0..2u8),
                }
            })
            .collect();
        HwIndex { blocks }
    }
}

/// `W B W† + (I - W W†)`.
fn lift(w: &CMat, b: &CMat) -> CMat {
    let d = w.nrows();
    let p = w * w.adjoint();
    w * b * w.adjoint() + identity(d) - p
}

/// One Heisenberg–Weyl choice for a type block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HwBlock {
    pub x: usize,
    pub z: usize,
    pub b: u8,
}

/// A code index `s = (x_t, z_t, b_t)_t`, one block per type in decomposition order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(
    from = "BTreeMap<usize, [usize; 3]>",
    into = "BTreeMap<usize, [usize; 3]>"
)]
pub struct HwIndex {
    pub blocks: Vec<HwBlock>,
}

impl From<HwIndex> for BTreeMap<usize, [usize; 3]> {
    fn from(s: HwIndex) -> Self {
        s.blocks
            .iter()
            .enumerate()
            .map(|(t, b)| (t, [b.x, b.z, b.b as usize]))
            .collect()
    }
}

impl From<BTreeMap<usize, [usize; 3]>> for HwIndex {
    fn from(m: BTreeMap<usize, [usize; 3]>) -> Self {
        HwIndex {
            blocks: m
                .values()
                .map(|&[x, z, b]| HwBlock { x, z, b: b as u8 })
                .collect(),
        }
    }
}

/// A sampled codebook: message `m` is encoded with `entries[m]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EaCodeBook {
    pub seed: u64,
    pub message_count: usize,
    pub entries: Vec<HwIndex>,
}

/// Draws `message_count` independent uniform indices; message `m` uses ChaCha stream `m` of `seed`.
pub fn sample_code(decomp: &TypeDecomposition, message_count: usize, seed: u64) -> EaCodeBook {
    let entries = (0..message_count)
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(m as u64);
            decomp.sample_index(&mut rng)
        })
        .collect();
    EaCodeBook {
        seed,
        message_count,
        entries,
    }
}

/// `‖(U ⊗ I - I ⊗ V)|φ⟩‖` for a two-factor `φ` (sender factor first).
pub fn ricochet_residual(u_sender: &CMat, v_receiver: &CMat, phi: &CVec) -> f64 {
    let (da, db) = (u_sender.nrows(), v_receiver.nrows());
    let lhs = kron(u_sender, &identity(db)) * phi;
    let rhs = kron(&identity(da), v_receiver) * phi;
    (lhs - rhs).norm()
}

/// Transpose-trick residual of `U(s)` against `U^T(s)` on `|φ⟩^⊗n`.
pub fn transpose_trick_residual(decomp: &TypeDecomposition, s: &HwIndex) -> Result<f64> {
    let u = decomp.sender_unitary(s)?;
    let v = decomp.receiver_unitary(s)?;
    Ok(ricochet_residual(&u, &v, &decomp.reassembled()))
}

/// `|φ⟩^⊗n` on `A'_1..A'_n, A_1..A_n` computed directly from the state.
pub fn phi_power(phi: &PureState, n: usize) -> Result<PureState> {
    let p = phi.relabel(&["A'", "A"])?.tensor_power(n)?;
    p.permute(&grouped_labels(&["A'", "A"], n))
}

fn single_input(ch: &KrausChannel) -> Result<()> {
    if ch.num_inputs() != 1 {
        return Err(QmacError::InvalidParameter(format!(
            "channel has {} inputs, expected 1",
            ch.num_inputs()
        )));
    }
    Ok(())
}

/// Applies one copy of `ch` to each `from_i → to_i`.
fn apply_copies(
    ch: &KrausChannel,
    state: &Operator,
    from: &[String],
    to: &[String],
) -> Result<Operator> {
    let mut st = state.clone();
    for (f, t) in from.iter().zip(to) {
        let c = ch.relabel(&[f.as_str()], &[t.as_str()])?;
        st = c.apply(&st, &[f.as_str()])?;
    }
    Ok(st)
}

/// Point-to-point assisted setting: `ρ^{A^nB^n} = (id ⊗ N^⊗n)(φ^⊗n)`.
#[derive(Debug, Clone)]
pub struct PointToPointSetup {
    pub n: usize,
    pub decomp: TypeDecomposition,
    pub channel: KrausChannel,
    /// Single-copy `ρ^{AB}`.
    pub rho_single: Operator,
    /// `ρ^{A^nB^n}` on `A_1..A_n, B_1..B_n`.
    pub rho: Operator,
}

impl PointToPointSetup {
    pub fn new(channel: &KrausChannel, phi: &PureState, n: usize) -> Result<Self> {
        single_input(channel)?;
        if channel.in_space().dim() != phi.space().dims()[0] {
            return Err(QmacError::ShapeMismatch(
                "phi's sent factor does not match the channel input".into(),
            ));
        }
        let decomp = TypeDecomposition::new(phi, n)?;
        let ch = channel.relabel(&["A'"], &["B"])?;
        let rho_single = ch
            .apply(&phi.relabel(&["A'", "A"])?.density(), &["A'"])?
            .permute(&["A", "B"])?;
        let pn = phi_power(phi, n)?.density();
        let out = apply_copies(&ch, &pn, &copy_labels("A'", n), &copy_labels("B", n))?;
        let rho = out.permute(&grouped_labels(&["A", "B"], n))?;
        Ok(Self {
            n,
            decomp,
            channel: ch,
            rho_single,
            rho,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// Receiver-side encoder on the full space `A^n ⊗ B^n`.
    pub fn encoder(&self, s: &HwIndex) -> Result<CMat> {
        let v = self.decomp.receiver_unitary(s)?;
        Ok(kron(&v, &identity(self.dim() / v.nrows())))
    }

    /// `σ_s = U^T(s) ρ U^*(s)`.
    pub fn codeword(&self, s: &HwIndex) -> Result<CMat> {
        let u = self.encoder(s)?;
        Ok(&u * self.rho.matrix() * u.adjoint())
    }

    /// Average of `σ_s` over `𝒮`: `(id ⊗ N^⊗n)(Σ_t p(t) π_t ⊗ π_t)`.
    pub fn expected_codeword(&self) -> Result<CMat> {
        let n = self.n;
        let space = self.grouped_input_space()?;
        let mut m = CMat::zeros(space.dim(), space.dim());
        for t in 0..self.decomp.num_types() {
            m += kron(
                &self.decomp.sender_type_state(t),
                &self.decomp.receiver_type_state(t),
            ) * r(self.decomp.type_probs[t]);
        }
        let st = Operator::new(space, m)?;
        let out = apply_copies(
            &self.channel,
            &st,
            &copy_labels("A'", n),
            &copy_labels("B", n),
        )?;
        Ok(out.permute(&grouped_labels(&["A", "B"], n))?.into_matrix())
    }

    fn grouped_input_space(&self) -> Result<FactorSpace> {
        let n = self.n;
        let da = self.channel.in_space().dim();
        let dr = self.rho_single.space().dims()[0];
        FactorSpace::new(
            &grouped_labels(&["A'", "A"], n),
            &[vec![da; n], vec![dr; n]].concat(),
        )
    }
}

/// Two-sender assisted setting: `ρ^{A^nB^nC^n} = N^⊗n(φ^⊗n ⊗ ψ^⊗n)`.
#[derive(Debug, Clone)]
pub struct MacSetup {
    pub n: usize,
    pub decomp_a: TypeDecomposition,
    pub decomp_b: TypeDecomposition,
    pub channel: KrausChannel,
    /// Single-copy `ρ^{ABC}`.
    pub rho_single: Operator,
    /// `ρ^{A^nB^nC^n}` on `A_1..A_n, B_1..B_n, C_1..C_n`.
    pub rho: Operator,
    phi: PureState,
    psi: PureState,
}

impl MacSetup {
    pub fn new(mac: &KrausChannel, phi: &PureState, psi: &PureState, n: usize) -> Result<Self> {
        if mac.num_inputs() != 2 {
            return Err(QmacError::InvalidParameter(format!(
                "MAC needs 2 inputs, channel has {}",
                mac.num_inputs()
            )));
        }
        let dims = mac.in_space().dims();
        if phi.space().dims()[0] != dims[0] || psi.space().dims()[0] != dims[1] {
            return Err(QmacError::ShapeMismatch(
                "entangled inputs do not match the MAC input dimensions".into(),
            ));
        }
        let decomp_a = TypeDecomposition::new(phi, n)?;
        let decomp_b = TypeDecomposition::new(psi, n)?;
        let ch = mac.relabel(&["A'", "B'"], &["C"])?;
        let rho_single = crate::info::mac_output_state(mac, phi, psi)?;
        let pa = phi.relabel(&["A'", "A"])?.tensor_power(n)?;
        let pb = psi.relabel(&["B'", "B"])?.tensor_power(n)?;
        let joint = pa.tensor(&pb)?.density();
        let mut st = joint;
        for i in 1..=n {
            let (a, b, c) = (format!("A'_{i}"), format!("B'_{i}"), format!("C_{i}"));
            let ci = ch.relabel(&[a.as_str(), b.as_str()], &[c.as_str()])?;
            st = ci.apply(&st, &[a.as_str(), b.as_str()])?;
        }
        let rho = st.permute(&grouped_labels(&["A", "B", "C"], n))?;
        Ok(Self {
            n,
            decomp_a,
            decomp_b,
            channel: ch,
            rho_single,
            rho,
            phi: phi.relabel(&["A'", "A"])?,
            psi: psi.relabel(&["B'", "B"])?,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    fn dims(&self) -> (usize, usize, usize) {
        let da = self.decomp_a.receiver_dim();
        let db = self.decomp_b.receiver_dim();
        (da, db, self.dim() / (da * db))
    }

    /// `U^T(s1)` on `A^n`, embedded in the full space.
    pub fn encoder_a(&self, s1: &HwIndex) -> Result<CMat> {
        let (_, db, dc) = self.dims();
        Ok(kron(
            &self.decomp_a.receiver_unitary(s1)?,
            &identity(db * dc),
        ))
    }

    /// `U^T(s2)` on `B^n`, embedded in the full space.
    pub fn encoder_b(&self, s2: &HwIndex) -> Result<CMat> {
        let (da, _, dc) = self.dims();
        Ok(kron(
            &kron(&identity(da), &self.decomp_b.receiver_unitary(s2)?),
            &identity(dc),
        ))
    }

    /// `σ_{s1,s2} = (U^T(s1) ⊗ U^T(s2)) ρ (U^*(s1) ⊗ U^*(s2))`.
    pub fn codeword(&self, s1: &HwIndex, s2: &HwIndex) -> Result<CMat> {
        let u = self.encoder_a(s1)? * self.encoder_b(s2)?;
        Ok(&u * self.rho.matrix() * u.adjoint())
    }

    /// Average over `s2 ∈ 𝒮_B` of `σ`, by the closed form `Σ_t p(t) π_t^{B^n} ⊗ N^⊗n(φ^⊗n ⊗ π_t^{B'^n})`.
    pub fn expected_over_b(&self) -> Result<CMat> {
        let n = self.n;
        let db_in = self.channel.in_space().dims()[1];
        let pa = phi_power(&self.phi, n)?.density();
        let bspace = FactorSpace::new(
            &grouped_labels(&["B'", "B"], n),
            &[vec![db_in; n], vec![self.psi.space().dims()[1]; n]].concat(),
        )?;
        let mut total: Option<CMat> = None;
        for t in 0..self.decomp_b.num_types() {
            let mb = kron(
                &self.decomp_b.sender_type_state(t),
                &self.decomp_b.receiver_type_state(t),
            );
            let joint = crate::qmat::tensor(&[&pa, &Operator::new(bspace.clone(), mb)?])?;
            let mut st = joint;
            for i in 1..=n {
                let (a, b, c) = (format!("A'_{i}"), format!("B'_{i}"), format!("C_{i}"));
                let ci = self
                    .channel
                    .relabel(&[a.as_str(), b.as_str()], &[c.as_str()])?;
                st = ci.apply(&st, &[a.as_str(), b.as_str()])?;
            }
            let m = st
                .permute(&grouped_labels(&["A", "B", "C"], n))?
                .into_matrix()
                * r(self.decomp_b.type_probs[t]);
            total = Some(match total {
                Some(acc) => acc + m,
                None => m,
            });
        }
        Ok(total.expect("at least one type"))
    }

    /// Stinespring output `|ϕ⟩` on `A^n B^n C^n E^n` (environment last, copy order).
    pub fn purified_output(&self) -> Result<PureState> {
        let n = self.n;
        let pa = self.phi.tensor_power(n)?;
        let pb = self.psi.tensor_power(n)?;
        let mut st = pa.tensor(&pb)?;
        let v = self.channel.stinespring();
        let dc = self.channel.out_space().dim();
        let de = self.channel.env_dim();
        for i in 1..=n {
            let (a, b) = (format!("A'_{i}"), format!("B'_{i}"));
            let out = FactorSpace::new(&[format!("C_{i}"), format!("E_{i}")], &[dc, de])?;
            st = st.apply_map(&v, &[a.as_str(), b.as_str()], &out)?;
        }
        let mut order = grouped_labels(&["A", "B", "C"], n);
        order.extend(copy_labels("E", n));
        st.permute(&order)
    }
}
