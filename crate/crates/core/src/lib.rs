pub mod control;
pub mod experiments;
pub mod fem1d;
pub mod kernels;
pub mod operators;
pub mod quadrature;
pub mod symbols;
