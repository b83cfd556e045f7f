//! Dense complex linear algebra on labelled tensor-product spaces.

mod channel;
mod linalg;
mod operator;
mod povm;
pub mod random;
mod space;
mod state;

pub use channel::{
    adder_mac, amplitude_damping, apply_channel, channel_from_json, channel_to_json, cnot_mac,
    depolarizing, named_channel, ChannelJson, KrausChannel, TP_TOL,
};
pub use linalg::{
    c, check_projector, clock, eig_hermitian, eigenvalues_hermitian, heisenberg_weyl,
    hermitian_part, identity, kron, kron_all, kron_vec, lambda_max, max_abs, min_eig_on_support,
    operator_power, outer, r, shift, sqrt_psd, support_projector, tr, tr_prod,
    trace_norm_hermitian, CMat, CVec, Eigen, C64, HERMITIAN_TOL, PSD_TOL, SUPPORT_CUTOFF,
};
pub use operator::{partial_trace, require_hermitian, tensor, Operator};
pub use povm::{PovmSet, POVM_TOL};
pub use space::{copy_label, copy_labels, dim_cap, FactorSpace, DEFAULT_DIM_CAP, DIM_CAP_ENV};
pub use state::{DensityOperator, PureState, TRACE_TOL};
