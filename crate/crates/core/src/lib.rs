//! Exact convex-order decisions for finitely supported distributions.
//!
//! Everything is computed over arbitrary-precision rationals: distributions
//! ([`distributions`]), the four convex-order decision procedures
//! ([`cx_order`]), Bernstein forms and the binomial orderings they reduce to
//! ([`rasa`]), the classic non-binomial counterexample ([`counterexample`])
//! and deterministic grid sweeps ([`sweep`]).

pub mod counterexample;
pub mod cx_order;
pub mod distributions;
pub mod error;
pub mod rasa;
pub mod rational;
pub mod sweep;

pub use cx_order::{CxVerdict, OhlinReport, SzostokReport};
pub use distributions::{DiscreteDistribution, StepCdf};
pub use error::{Error, Result};
pub use rational::Rational;
