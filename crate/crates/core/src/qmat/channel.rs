use serde::{Deserialize, Serialize};

use crate::error::{QmacError, Result};

use super::linalg::{c, heisenberg_weyl, identity, kron, max_abs, r, CMat};
use super::operator::Operator;
use super::space::FactorSpace;
use super::state::replaced_order;

/// Tolerance on `Σ K†K = I`.
pub const TP_TOL: f64 = 1e-9;

/// A CPTP map given by Kraus operators `K_k : in_space → out_space`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    in_space: FactorSpace,
    out_space: FactorSpace,
    kraus: Vec<CMat>,
}

impl KrausChannel {
    pub fn new(in_space: FactorSpace, out_space: FactorSpace, kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(QmacError::InvalidParameter(
                "channel without Kraus operators".into(),
            ));
        }
        let (di, dout) = (in_space.dim(), out_space.dim());
        let mut sum = CMat::zeros(di, di);
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != di {
                return Err(QmacError::ShapeMismatch(format!(
                    "Kraus operator {}x{} for a map {di} -> {dout}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            sum += k.adjoint() * k;
        }
        let dev = max_abs(&(sum - identity(di)));
        if dev > TP_TOL {
            return Err(QmacError::NotTracePreserving(dev));
        }
        Ok(Self {
            in_space,
            out_space,
            kraus,
        })
    }

    pub fn in_space(&self) -> &FactorSpace {
        &self.in_space
    }

    pub fn out_space(&self) -> &FactorSpace {
        &self.out_space
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// Number of senders (input factors).
    pub fn num_inputs(&self) -> usize {
        self.in_space.len()
    }

    pub fn relabel<S: AsRef<str>, T: AsRef<str>>(
        &self,
        inputs: &[S],
        outputs: &[T],
    ) -> Result<Self> {
        Ok(Self {
            in_space: self.in_space.relabel(inputs)?,
            out_space: self.out_space.relabel(outputs)?,
            kraus: self.kraus.clone(),
        })
    }

    /// Stinespring isometry `V = Σ_k K_k ⊗ |k⟩_E`, an `(d_out · #K) × d_in` matrix with `E` last.
    pub fn stinespring(&self) -> CMat {
        let ne = self.kraus.len();
        let (di, dout) = (self.in_space.dim(), self.out_space.dim());
        let mut v = CMat::zeros(dout * ne, di);
        for (k, kr) in self.kraus.iter().enumerate() {
            for i in 0..dout {
                for j in 0..di {
                    v[(i * ne + k, j)] = kr[(i, j)];
                }
            }
        }
        v
    }

    /// Environment dimension of [`Self::stinespring`].
    pub fn env_dim(&self) -> usize {
        self.kraus.len()
    }

    /// Applies the channel to the factors `acting_on` of `state` (matched to the input factors in order).
    ///
    /// Output factors replace the input factors at the position of the first one.
    pub fn apply<S: AsRef<str>>(&self, state: &Operator, acting_on: &[S]) -> Result<Operator> {
        apply_channel(self, state, acting_on)
    }

    /// Parses a built-in channel name or a JSON file path.
    pub fn from_spec(spec: &str) -> Result<Self> {
        if let Ok(ch) = named_channel(spec) {
            return Ok(ch);
        }
        let looks_named = spec
            .split(':')
            .next()
            .map(|h| NAMED.contains(&h))
            .unwrap_or(false);
        if looks_named {
            return named_channel(spec);
        }
        let text = std::fs::read_to_string(spec)
            .map_err(|e| QmacError::Parse(format!("cannot read channel `{spec}`: {e}")))?;
        channel_from_json(&text)
    }

    /// Qudit channel with `ρ ↦ Tr ρ · I/d_out` on the given input dimensions.
    pub fn completely_depolarizing(in_dims: &[usize], d_out: usize) -> Result<Self> {
        let di: usize = in_dims.iter().product();
        let w = 1.0 / (d_out as f64).sqrt();
        let mut kraus = Vec::with_capacity(di * d_out);
        for i in 0..d_out {
            for j in 0..di {
                let mut k = CMat::zeros(d_out, di);
                k[(i, j)] = r(w);
                kraus.push(k);
            }
        }
        Self::new(
            default_inputs(in_dims)?,
            default_output(in_dims.len(), d_out)?,
            kraus,
        )
    }

    /// MAC that passes both inputs through untouched, `C = A' ⊗ B'`.
    pub fn parallel_identity_mac(da: usize, db: usize) -> Result<Self> {
        Self::new(
            default_inputs(&[da, db])?,
            default_output(2, da * db)?,
            vec![identity(da * db)],
        )
    }
}

const NAMED: [&str; 5] = [
    "identity",
    "depolarizing",
    "amplitude-damping",
    "cnot-mac",
    "adder-mac",
];

fn default_inputs(in_dims: &[usize]) -> Result<FactorSpace> {
    match in_dims.len() {
        1 => FactorSpace::new(&["A'"], in_dims),
        2 => FactorSpace::new(&["A'", "B'"], in_dims),
        n => {
            let labels: Vec<String> = (1..=n).map(|i| format!("X{i}'")).collect();
            FactorSpace::new(&labels, in_dims)
        }
    }
}

fn default_output(inputs: usize, d: usize) -> Result<FactorSpace> {
    FactorSpace::single(if inputs == 1 { "B" } else { "C" }, d)
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| QmacError::Parse(format!("bad {what} `{s}`")))
}

fn parse_prob(s: &str, what: &str) -> Result<f64> {
    let p = parse_f64(s, what)?;
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(QmacError::InvalidParameter(format!(
            "{what} {p} outside [0, 1]"
        )));
    }
    Ok(p)
}

/// Built-in channels: `identity:d`, `depolarizing:p[:d]`, `amplitude-damping:g`, `cnot-mac`, `adder-mac`.
pub fn named_channel(spec: &str) -> Result<KrausChannel> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["identity", d] => {
            let d: usize = d
                .trim()
                .parse()
                .map_err(|_| QmacError::Parse(format!("bad dimension `{d}`")))?;
            if d == 0 {
                return Err(QmacError::InvalidParameter("dimension 0".into()));
            }
            KrausChannel::new(
                default_inputs(&[d])?,
                default_output(1, d)?,
                vec![identity(d)],
            )
        }
        ["depolarizing", p] => depolarizing(parse_prob(p, "depolarizing probability")?, 2),
        ["depolarizing", p, d] => {
            let d: usize = d
                .trim()
                .parse()
                .map_err(|_| QmacError::Parse(format!("bad dimension `{d}`")))?;
            depolarizing(parse_prob(p, "depolarizing probability")?, d)
        }
        ["amplitude-damping", g] => amplitude_damping(parse_prob(g, "damping parameter")?),
        ["cnot-mac"] => cnot_mac(),
        ["adder-mac"] => adder_mac(),
        _ => Err(QmacError::Parse(format!("unknown channel `{spec}`"))),
    }
}

/// `ρ ↦ (1-p) ρ + p I/d` via Heisenberg–Weyl Kraus operators.
pub fn depolarizing(p: f64, d: usize) -> Result<KrausChannel> {
    if d < 2 {
        return Err(QmacError::InvalidParameter(format!(
            "depolarizing dimension {d}"
        )));
    }
    let d2 = (d * d) as f64;
    let mut kraus = Vec::with_capacity(d * d);
    for x in 0..d {
        for z in 0..d {
            let w = if x == 0 && z == 0 {
                1.0 - p + p / d2
            } else {
                p / d2
            };
            if w > 0.0 {
                kraus.push(heisenberg_weyl(d, x, z) * r(w.sqrt()));
            }
        }
    }
    KrausChannel::new(default_inputs(&[d])?, default_output(1, d)?, kraus)
}

/// Qubit amplitude damping with decay probability `g`.
pub fn amplitude_damping(g: f64) -> Result<KrausChannel> {
    let mut k0 = identity(2);
    k0[(1, 1)] = r((1.0 - g).sqrt());
    let mut k1 = CMat::zeros(2, 2);
    k1[(0, 1)] = r(g.sqrt());
    KrausChannel::new(default_inputs(&[2])?, default_output(1, 2)?, vec![k0, k1])
}

/// Two-qubit MAC: CNOT with `A'` as control and `B'` as target; the control is traced out
/// and the target is the output `C`.
pub fn cnot_mac() -> Result<KrausChannel> {
    let mut kraus = Vec::with_capacity(2);
    for j in 0..2usize {
        let mut k = CMat::zeros(2, 4);
        for b in 0..2usize {
            // |j, b⟩ ↦ |b ⊕ j⟩
            k[(b ^ j, j * 2 + b)] = r(1.0);
        }
        kraus.push(k);
    }
    KrausChannel::new(default_inputs(&[2, 2])?, default_output(2, 2)?, kraus)
}

/// Binary adder MAC `|a, b⟩ ↦ |a + b⟩` with a qutrit output.
pub fn adder_mac() -> Result<KrausChannel> {
    let mut kraus = Vec::with_capacity(4);
    for a in 0..2usize {
        for b in 0..2usize {
            let mut k = CMat::zeros(3, 4);
            k[(a + b, a * 2 + b)] = r(1.0);
            kraus.push(k);
        }
    }
    KrausChannel::new(default_inputs(&[2, 2])?, default_output(2, 3)?, kraus)
}

/// JSON channel description; each Kraus matrix is a row-major list of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub in_dims: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub kraus: Vec<Vec<[f64; 2]>>,
}

pub fn channel_from_json(text: &str) -> Result<KrausChannel> {
    let cj: ChannelJson =
        serde_json::from_str(text).map_err(|e| QmacError::Parse(e.to_string()))?;
    let di: usize = cj.in_dims.iter().product();
    let dout: usize = cj.out_dims.iter().product();
    if cj.in_dims.is_empty() || cj.out_dims.is_empty() {
        return Err(QmacError::Parse("empty in_dims or out_dims".into()));
    }
    let kraus = cj
        .kraus
        .iter()
        .map(|k| {
            if k.len() != di * dout {
                return Err(QmacError::ShapeMismatch(format!(
                    "Kraus operator with {} entries for a {dout}x{di} map",
                    k.len()
                )));
            }
            Ok(CMat::from_row_iterator(
                dout,
                di,
                k.iter().map(|&[re, im]| c(re, im)),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::new(
        default_inputs(&cj.in_dims)?,
        default_output(cj.in_dims.len(), dout)?,
        kraus,
    )
}

pub fn channel_to_json(ch: &KrausChannel) -> ChannelJson {
    ChannelJson {
        in_dims: ch.in_space().dims().to_vec(),
        out_dims: ch.out_space().dims().to_vec(),
        kraus: ch
            .kraus()
            .iter()
            .map(|k| {
                let mut v = Vec::with_capacity(k.len());
                for i in 0..k.nrows() {
                    for j in 0..k.ncols() {
                        v.push([k[(i, j)].re, k[(i, j)].im]);
                    }
                }
                v
            })
            .collect(),
    }
}

/// `Σ_k (K_k ⊗ I) ρ (K_k ⊗ I)†` on the factors `acting_on`.
pub fn apply_channel<S: AsRef<str>>(
    ch: &KrausChannel,
    state: &Operator,
    acting_on: &[S],
) -> Result<Operator> {
    let acting: Vec<&str> = acting_on.iter().map(|s| s.as_ref()).collect();
    let space = state.space();
    if acting.len() != ch.in_space().len() {
        return Err(QmacError::ShapeMismatch(format!(
            "channel has {} inputs, {} factors given",
            ch.in_space().len(),
            acting.len()
        )));
    }
    for (l, &d) in acting.iter().zip(ch.in_space().dims()) {
        if space.dim_of(l)? != d {
            return Err(QmacError::ShapeMismatch(format!(
                "factor {l} does not match channel input dimension {d}"
            )));
        }
    }
    for l in ch.out_space().labels() {
        if space.contains(l) && !acting.contains(&l.as_str()) {
            return Err(QmacError::DuplicateLabel(l.clone()));
        }
    }
    let rest = space.complement(&acting);
    let mut order: Vec<String> = acting.iter().map(|s| s.to_string()).collect();
    order.extend(rest.iter().cloned());
    let moved = state.permute(&order)?;
    let rest_space = space.select(&rest)?;
    let id = identity(rest_space.dim());
    let out_space = ch.out_space().concat(&rest_space)?;
    let d = out_space.dim();
    let mut out = CMat::zeros(d, d);
    for k in ch.kraus() {
        let kf = kron(k, &id);
        out += &kf * moved.matrix() * kf.adjoint();
    }
    let target = replaced_order(space, &acting, ch.out_space().labels());
    Operator::new(out_space, out)?.permute(&target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::linalg::CVec;

    #[test]
    fn depolarizing_full_gives_maximally_mixed() {
        let ch = named_channel("depolarizing:1").unwrap();
        let rho = Operator::new(
            FactorSpace::single("A'", 2).unwrap(),
            CMat::from_diagonal(&CVec::from_vec(vec![r(1.0), r(0.0)])),
        )
        .unwrap();
        let out = ch.apply(&rho, &["A'"]).unwrap();
        assert!(max_abs(&(out.matrix() - identity(2) * r(0.5))) < 1e-14);
        assert_eq!(out.space().labels(), &["B"]);
    }

    #[test]
    fn json_round_trip() {
        let ch = adder_mac().unwrap();
        let text = serde_json::to_string(&channel_to_json(&ch)).unwrap();
        let back = channel_from_json(&text).unwrap();
        assert_eq!(back, ch);
    }

    #[test]
    fn rejects_non_tp() {
        let sp = FactorSpace::single("A'", 2).unwrap();
        let out = FactorSpace::single("B", 2).unwrap();
        assert!(matches!(
            KrausChannel::new(sp, out, vec![identity(2) * r(0.9)]),
            Err(QmacError::NotTracePreserving(_))
        ));
    }
}
