//! Gaussian covariance matrices (vacuum = identity), beamsplitter action, symplectic spectra and
//! the bosonic two-sender rate regions.

use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QmacError, Result};
use crate::format::fmt_sig;
use crate::info::RateRegion;
use crate::qmat::{eigenvalues_hermitian, CMat, C64};

/// Real matrix type for covariance and symplectic matrices.
pub type RMat = DMatrix<f64>;

/// Symmetry tolerance of a covariance matrix.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Tolerance on `V + iJ ≥ 0` and on symplectic eigenvalues below 1.
pub const PHYSICAL_TOL: f64 = 1e-8;
/// Tolerance on `S J Sᵀ = J`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Relative tolerance when pairing `±ν`.
const PAIR_TOL: f64 = 1e-7;
/// Largest negative photon number treated as 0.
const NEG_PHOTON_TOL: f64 = 1e-12;

/// `(N+1) log2(N+1) - N log2 N`, the entropy of a thermal state with mean photon number `N`.
pub fn g_entropy(n: f64) -> Result<f64> {
    if !n.is_finite() || n < -NEG_PHOTON_TOL {
        return Err(QmacError::InvalidParameter(format!(
            "mean photon number {n} is negative"
        )));
    }
    if n <= 0.0 {
        return Ok(0.0);
    }
    Ok((n + 1.0) * (n + 1.0).log2() - n * n.log2())
}

/// `⊕_k [[0, 1], [-1, 0]]`.
pub fn symplectic_form(modes: usize) -> RMat {
    let mut j = RMat::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

fn max_abs_real(m: &RMat) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Covariance matrix of a Gaussian state over labelled modes, quadratures ordered `(x_1, p_1, x_2, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    modes: Vec<String>,
    v: RMat,
}

impl CovarianceState {
    /// Validates symmetry and `V + iJ ≥ 0`.
    pub fn new<S: AsRef<str>>(modes: &[S], v: RMat) -> Result<Self> {
        let k = modes.len();
        if v.nrows() != 2 * k || v.ncols() != 2 * k {
            return Err(QmacError::ShapeMismatch(format!(
                "{}x{} covariance for {k} modes",
                v.nrows(),
                v.ncols()
            )));
        }
        let modes: Vec<String> = modes.iter().map(|m| m.as_ref().to_string()).collect();
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(QmacError::DuplicateLabel(m.clone()));
            }
        }
        let asym = max_abs_real(&(&v - v.transpose()));
        if asym > SYMMETRY_TOL * (1.0 + max_abs_real(&v)) {
            return Err(QmacError::NotHermitian(asym));
        }
        let v = (&v + v.transpose()) * 0.5;
        let herm = to_complex(&v) + symplectic_form(k).map(|x| C64::new(0.0, x));
        if let Some(&lo) = eigenvalues_hermitian(&herm)?.last() {
            if lo < -PHYSICAL_TOL * (1.0 + max_abs_real(&v)) {
                return Err(QmacError::InvalidParameter(format!(
                    "covariance violates V + iJ ≥ 0 (eigenvalue {lo:e})"
                )));
            }
        }
        Ok(Self { modes, v })
    }

    /// Vacuum on the given modes.
    pub fn vacuum<S: AsRef<str>>(modes: &[S]) -> Result<Self> {
        Self::new(modes, RMat::identity(2 * modes.len(), 2 * modes.len()))
    }

    /// Thermal state `diag(2N+1)` on one mode.
    pub fn thermal(mode: &str, n: f64) -> Result<Self> {
        check_photons(n, "N")?;
        Self::new(&[mode], RMat::identity(2, 2) * (2.0 * n.max(0.0) + 1.0))
    }

    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    pub fn matrix(&self) -> &RMat {
        &self.v
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    fn index_of(&self, mode: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m == mode)
            .ok_or_else(|| QmacError::UnknownLabel(mode.to_string()))
    }

    /// `V ⊕ W`.
    pub fn direct_sum(&self, other: &CovarianceState) -> Result<Self> {
        let (a, b) = (self.v.nrows(), other.v.nrows());
        let mut v = RMat::zeros(a + b, a + b);
        v.view_mut((0, 0), (a, a)).copy_from(&self.v);
        v.view_mut((a, a), (b, b)).copy_from(&other.v);
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        Self::new(&modes, v)
    }

    /// Marginal covariance on `modes`, in the order given.
    pub fn select<S: AsRef<str>>(&self, modes: &[S]) -> Result<Self> {
        let idx = modes
            .iter()
            .map(|m| self.index_of(m.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let k = idx.len();
        let v = RMat::from_fn(2 * k, 2 * k, |i, j| {
            self.v[(2 * idx[i / 2] + i % 2, 2 * idx[j / 2] + j % 2)]
        });
        Self::new(modes, v)
    }

    /// Renames the modes in order.
    pub fn relabel<S: AsRef<str>>(&self, modes: &[S]) -> Result<Self> {
        if modes.len() != self.modes.len() {
            return Err(QmacError::ShapeMismatch(format!(
                "{} labels for {} modes",
                modes.len(),
                self.modes.len()
            )));
        }
        Self::new(modes, self.v.clone())
    }
}

fn check_photons(n: f64, what: &str) -> Result<()> {
    if !n.is_finite() || n < 0.0 {
        return Err(QmacError::InvalidParameter(format!(
            "{what} must be a non-negative mean photon number, got {n}"
        )));
    }
    Ok(())
}

/// Two-mode squeezed vacuum with `N` mean photons per mode.
pub fn tms_covariance(n: f64, modes: [&str; 2]) -> Result<CovarianceState> {
    check_photons(n, "N_S")?;
    let a = 2.0 * n + 1.0;
    let c = 2.0 * (n * (n + 1.0)).sqrt();
    #[rustfmt::skip]
    let v = RMat::from_row_slice(4, 4, &[
        a, 0.0, c, 0.0,
        0.0, a, 0.0, -c,
        c, 0.0, a, 0.0,
        0.0, -c, 0.0, a,
    ]);
    CovarianceState::new(&modes, v)
}

/// A symplectic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    s: RMat,
}

impl SymplecticMap {
    /// Validates `S J Sᵀ = J`.
    pub fn new(s: RMat) -> Result<Self> {
        if s.nrows() != s.ncols() || !s.nrows().is_multiple_of(2) {
            return Err(QmacError::ShapeMismatch(format!(
                "{}x{} symplectic matrix",
                s.nrows(),
                s.ncols()
            )));
        }
        let j = symplectic_form(s.nrows() / 2);
        let res = max_abs_real(&(&s * &j * s.transpose() - &j));
        if res > SYMPLECTIC_TOL {
            return Err(QmacError::InvalidParameter(format!(
                "matrix is not symplectic (residual {res:e})"
            )));
        }
        Ok(Self { s })
    }

    pub fn matrix(&self) -> &RMat {
        &self.s
    }

    pub fn num_modes(&self) -> usize {
        self.s.nrows() / 2
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(QmacError::InvalidParameter(format!(
            "eta out of range: {eta} not in [0, 1]"
        )));
    }
    Ok(())
}

/// `[[√η I, √(1-η) I], [-√(1-η) I, √η I]]`.
pub fn beamsplitter_symplectic(eta: f64) -> Result<SymplecticMap> {
    check_eta(eta)?;
    let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
    let mut s = RMat::zeros(4, 4);
    for k in 0..2 {
        s[(k, k)] = t;
        s[(k, 2 + k)] = r;
        s[(2 + k, k)] = -r;
        s[(2 + k, 2 + k)] = t;
    }
    SymplecticMap::new(s)
}

/// `S V Sᵀ` with `S` acting on `modes` (in order) and the identity elsewhere.
pub fn apply_symplectic<S: AsRef<str>>(
    s: &SymplecticMap,
    state: &CovarianceState,
    modes: &[S],
) -> Result<CovarianceState> {
    if modes.len() != s.num_modes() {
        return Err(QmacError::ShapeMismatch(format!(
            "{}-mode map applied to {} modes",
            s.num_modes(),
            modes.len()
        )));
    }
    let idx = modes
        .iter()
        .map(|m| state.index_of(m.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    for (i, k) in idx.iter().enumerate() {
        if idx[..i].contains(k) {
            return Err(QmacError::DuplicateLabel(state.modes[*k].clone()));
        }
    }
    let dim = state.v.nrows();
    let mut full = RMat::identity(dim, dim);
    for (a, &ia) in idx.iter().enumerate() {
        for (b, &ib) in idx.iter().enumerate() {
            for p in 0..2 {
                for q in 0..2 {
                    full[(2 * ia + p, 2 * ib + q)] = s.s[(2 * a + p, 2 * b + q)];
                }
            }
        }
    }
    CovarianceState::new(&state.modes, &full * &state.v * full.transpose())
}

/// Symplectic eigenvalues, descending, one per mode.
///
/// With `V = L Lᵀ`, `i Lᵀ J L` is Hermitian and similar to `iJV`; its spectrum is `{±ν_k}`.
/// Values within [`PHYSICAL_TOL`] below 1 are clamped to 1.
pub fn symplectic_eigenvalues(state: &CovarianceState) -> Result<Vec<f64>> {
    let k = state.num_modes();
    let chol = Cholesky::new(state.v.clone()).ok_or_else(|| {
        QmacError::InvalidParameter("covariance matrix is not positive definite".into())
    })?;
    let l = chol.l();
    let h = (l.transpose() * symplectic_form(k) * &l).map(|x| C64::new(0.0, x));
    let mut abs: Vec<f64> = eigenvalues_hermitian(&h)?.iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let mut out = Vec::with_capacity(k);
    for pair in abs.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if (a - b).abs() > PAIR_TOL * a.max(1.0) {
            return Err(QmacError::InvalidParameter(format!(
                "unpaired symplectic spectrum: {a} vs {b}"
            )));
        }
        let nu = 0.5 * (a + b);
        if nu < 1.0 - PHYSICAL_TOL {
            return Err(QmacError::InvalidParameter(format!(
                "symplectic eigenvalue {nu} below 1"
            )));
        }
        out.push(nu.max(1.0));
    }
    Ok(out)
}

/// `Σ_k g((ν_k - 1)/2)` in bits.
pub fn gaussian_entropy(state: &CovarianceState) -> Result<f64> {
    symplectic_eigenvalues(state)?
        .iter()
        .map(|nu| g_entropy((nu - 1.0) / 2.0))
        .sum()
}

/// Transmissivity and the senders' mean photon numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BosonicMacParams {
    pub eta: f64,
    pub nsa: f64,
    pub nsb: f64,
}

impl BosonicMacParams {
    pub fn new(eta: f64, nsa: f64, nsb: f64) -> Result<Self> {
        let p = Self { eta, nsa, nsb };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_eta(self.eta)?;
        check_photons(self.nsa, "nsa")?;
        check_photons(self.nsb, "nsb")
    }

    /// Mean photon number at the receiver, `η N_a + (1-η) N_b`.
    pub fn n_out(&self) -> f64 {
        self.eta * self.nsa + (1.0 - self.eta) * self.nsb
    }

    /// Mean photon number in the environment, `η N_b + (1-η) N_a`.
    pub fn n_env(&self) -> f64 {
        self.eta * self.nsb + (1.0 - self.eta) * self.nsa
    }
}

/// `t |N_a - N_b| ± √(t² (N_a - N_b)² + 2t (2 N_a N_b + N_a + N_b) + 1)`.
fn lambda_pm(t: f64, nsa: f64, nsb: f64) -> (f64, f64) {
    let d = (nsa - nsb).abs();
    let root = (t * t * d * d + 2.0 * t * (2.0 * nsa * nsb + nsa + nsb) + 1.0).sqrt();
    (t * d + root, t * d - root)
}

/// `λ_AC^±`: the substitution `η → 1-η` of [`lambda_bc`].
pub fn lambda_ac(p: &BosonicMacParams) -> (f64, f64) {
    lambda_pm(1.0 - p.eta, p.nsa, p.nsb)
}

/// `λ_BC^±`.
pub fn lambda_bc(p: &BosonicMacParams) -> (f64, f64) {
    lambda_pm(p.eta, p.nsa, p.nsb)
}

fn pair_entropy((lp, lm): (f64, f64)) -> Result<f64> {
    let nu = |l: f64| (l.abs().max(1.0) - 1.0) / 2.0;
    Ok(g_entropy(nu(lp))? + g_entropy(nu(lm))?)
}

/// Closed-form assisted region `(I(A;BC), I(B;AC), I(AB;C))` for two-mode squeezed inputs.
pub fn ea_bosonic_region(p: &BosonicMacParams) -> Result<RateRegion> {
    p.validate()?;
    let (ga, gb) = (g_entropy(p.nsa)?, g_entropy(p.nsb)?);
    let g_env = g_entropy(p.n_env())?;
    let r1 = ga + pair_entropy(lambda_bc(p))? - g_env;
    let r2 = gb + pair_entropy(lambda_ac(p))? - g_env;
    let sum = ga + gb + g_entropy(p.n_out())? - g_env;
    Ok(RateRegion::new(r1, r2, sum))
}

/// Four-mode output covariance in mode order `A, C, B, E`.
pub fn output_covariance(p: &BosonicMacParams) -> Result<CovarianceState> {
    p.validate()?;
    let v = tms_covariance(p.nsa, ["A", "A'"])?.direct_sum(&tms_covariance(p.nsb, ["B", "B'"])?)?;
    let out = apply_symplectic(&beamsplitter_symplectic(p.eta)?, &v, &["A'", "B'"])?;
    out.relabel(&["A", "C", "B", "E"])
}

/// The seven marginal entropies `H(A), H(B), H(C), H(AB), H(AC), H(BC), H(ABC)` computed from
/// the output covariance.
///
/// `H(ABC)` is taken as `H(E)` since the four-mode output is pure: the two unit symplectic
/// eigenvalues of the three-mode marginal carry rounding of order `1e-10` at `N ~ 10³`, which `g`
/// amplifies near 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalEntropies {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub ab: f64,
    pub ac: f64,
    pub bc: f64,
    pub abc: f64,
}

pub fn marginal_entropies(p: &BosonicMacParams) -> Result<MarginalEntropies> {
    let v = output_covariance(p)?;
    let h = |m: &[&str]| gaussian_entropy(&v.select(m)?);
    Ok(MarginalEntropies {
        a: h(&["A"])?,
        b: h(&["B"])?,
        c: h(&["C"])?,
        ab: h(&["A", "B"])?,
        ac: h(&["A", "C"])?,
        bc: h(&["B", "C"])?,
        abc: h(&["E"])?,
    })
}

/// Region from the symplectic spectra of the output marginals.
pub fn ea_bosonic_region_numeric(p: &BosonicMacParams) -> Result<RateRegion> {
    let h = marginal_entropies(p)?;
    Ok(RateRegion::new(
        h.a + h.bc - h.abc,
        h.b + h.ac - h.abc,
        h.ab + h.c - h.abc,
    ))
}

/// Unassisted outer bound `(g(N_a), g(N_b), g(η N_a + (1-η) N_b))`.
pub fn yen_shapiro_bound(p: &BosonicMacParams) -> Result<RateRegion> {
    p.validate()?;
    Ok(RateRegion::new(
        g_entropy(p.nsa)?,
        g_entropy(p.nsb)?,
        g_entropy(p.n_out())?,
    ))
}

/// Assisted sum bound minus the unassisted one: `g(N_a) + g(N_b) - g(η N_b + (1-η) N_a)`.
pub fn sum_gap(p: &BosonicMacParams) -> Result<f64> {
    p.validate()?;
    Ok(g_entropy(p.nsa)? + g_entropy(p.nsb)? - g_entropy(p.n_env())?)
}

/// One unassisted vertex and whether the assisted region holds it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexCheck {
    pub vertex: [f64; 2],
    pub inside: bool,
}

/// Assisted region against the unassisted outer bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionComparison {
    pub params: BosonicMacParams,
    pub ea: RateRegion,
    pub ys: RateRegion,
    pub sum_gap: f64,
    pub ea_contains_ys: bool,
    pub vertices: Vec<VertexCheck>,
}

/// Containment tolerance for vertex checks.
const CONTAIN_TOL: f64 = 1e-12;

pub fn compare_regions(p: &BosonicMacParams) -> Result<RegionComparison> {
    let ea = ea_bosonic_region(p)?;
    let ys = yen_shapiro_bound(p)?;
    let vertices: Vec<VertexCheck> = ys
        .vertices
        .iter()
        .map(|&v| VertexCheck {
            vertex: v,
            inside: ea.contains(v, CONTAIN_TOL),
        })
        .collect();
    Ok(RegionComparison {
        params: *p,
        sum_gap: sum_gap(p)?,
        ea_contains_ys: vertices.iter().all(|v| v.inside),
        ea,
        ys,
        vertices,
    })
}

/// One grid point of a transmissivity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub ea: RateRegion,
    pub ys: RateRegion,
    pub sum_gap: f64,
}

/// `steps` evenly spaced values `i / (steps - 1)`.
pub fn eta_grid(steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(QmacError::InvalidParameter(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    Ok((0..steps).map(|i| i as f64 / (steps - 1) as f64).collect())
}

/// Regions over a grid of transmissivities, in grid order.
pub fn region_sweep(nsa: f64, nsb: f64, etas: &[f64]) -> Result<Vec<SweepRow>> {
    etas.par_iter()
        .map(|&eta| {
            let p = BosonicMacParams::new(eta, nsa, nsb)?;
            Ok(SweepRow {
                eta,
                ea: ea_bosonic_region(&p)?,
                ys: yen_shapiro_bound(&p)?,
                sum_gap: sum_gap(&p)?,
            })
        })
        .collect()
}

/// CSV header of [`sweep_csv`].
pub const SWEEP_HEADER: &str = "eta,r1,r2,sum,ys_r1,ys_r2,ys_sum,sum_gap";

/// CSV rows at 12 significant digits, `\n` line endings.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            r.eta, r.ea.r1, r.ea.r2, r.ea.sum, r.ys.r1, r.ys.r2, r.ys.sum, r.sum_gap,
        ];
        out.push_str(
            &cells
                .iter()
                .map(|&x| fmt_sig(x))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    out
}

/// Symplectic eigenvalues of a two-mode covariance from `Δ = det A + det B + 2 det C` and `det V`.
pub fn two_mode_symplectic_closed_form(v: &RMat) -> Result<(f64, f64)> {
    if v.nrows() != 4 || v.ncols() != 4 {
        return Err(QmacError::ShapeMismatch(
            "two-mode covariance must be 4x4".into(),
        ));
    }
    let det2 = |r: usize, c: usize| v[(r, c)] * v[(r + 1, c + 1)] - v[(r, c + 1)] * v[(r + 1, c)];
    let delta = det2(0, 0) + det2(2, 2) + 2.0 * det2(0, 2);
    let det = v.determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    Ok((
        ((delta + disc) / 2.0).sqrt(),
        ((delta - disc) / 2.0).max(0.0).sqrt(),
    ))
}
