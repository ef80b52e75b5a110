//! Intrusive reference implementations: dense matrix-equation solvers,
//! matrix functions, and the nine intrusive balancing variants. These are
//! the ground truth the non-intrusive pipeline is compared against.

mod equations;
mod gramians;
mod matfun;

pub use equations::{kron_lyapunov, kron_sylvester, solve_care, solve_lyapunov, solve_sylvester};
pub use gramians::{
    hankel_values, intrusive_reduce, limited_gramians, variant_gramians, GramianPair,
};
pub use matfun::{expm, funm_eig};
