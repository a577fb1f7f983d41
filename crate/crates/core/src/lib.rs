pub mod angular;
pub mod cli;
pub mod error;
pub mod kapitsa;
pub mod kernel;
pub mod moments;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod spectrum;
