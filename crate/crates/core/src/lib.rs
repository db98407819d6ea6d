pub mod error;
pub mod specfun;
pub mod quadrature;
pub mod func;
pub mod kernels;
pub mod gauss_aw;
pub mod mart_approx;
pub mod fsde;
pub mod oracles;
pub mod cli;
pub(crate) mod reduce;
