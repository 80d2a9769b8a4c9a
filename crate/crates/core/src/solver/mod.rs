pub mod cl1;
pub mod lsq;

pub use cl1::{fit, fit_with_scaler, FitReport, SolverConfig};
pub use lsq::{fit_lsq, fit_lsq_with_scaler, LsqConfig};
