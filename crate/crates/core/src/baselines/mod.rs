//! Classical unwrappers used as comparison methods.

pub mod goldstein;
pub mod irls;
pub mod itoh;
pub mod ls;

pub use goldstein::{residues, unwrap_goldstein, GoldsteinOutput, ResidueMap};
pub use irls::{unwrap_irls, IrlsConfig, IrlsReport};
pub use itoh::{unwrap_itoh, unwrap_itoh_1d};
pub use ls::{ls_solution, unwrap_ls_dct, PoissonSolver};
