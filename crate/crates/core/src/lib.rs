pub mod cli;
pub mod criteria;
pub mod expr;
pub mod function;
pub mod quadrature;
pub mod recover;
pub mod sampling;
pub mod scalar;
pub mod series;
pub mod verify;
