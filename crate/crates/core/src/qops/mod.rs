//! Dense operator algebra: states, tensor structure, Gibbs states and I/O.

pub mod cq;
pub mod gibbs;
pub mod json;
pub mod linalg;
pub mod operator;
pub mod random;

pub use cq::CqOperator;
pub use gibbs::{gibbs_state, GibbsContext};
pub use linalg::{CMatrix, C64};
pub use operator::{
    cyclic_shift_perm, partial_trace, permute_subsystems, tensor, tensor_capped, tensor_power, trace_distance,
    DensityOperator, HermitianOperator, Operator,
};
