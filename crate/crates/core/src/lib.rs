//! Generalized entropies and their maximum-entropy distributions.
//!
//! The crate centres on the hybrid entropy `D_q = ln_q exp(−⟨ln P⟩_q)`, which
//! interpolates between Rényi and Tsallis–Havrda–Charvát entropies, and
//! provides:
//!
//! - [`entropy`]: validated distributions, Shannon/Rényi/THC/hybrid
//!   entropies, escort weights and the entropy inequality chain;
//! - [`lambert`]: both real branches of the Lambert W function;
//! - [`maxent`]: certified MaxEnt distributions under escort and linear
//!   energy constraints;
//! - [`asymptotics`]: high- and low-temperature closed forms of those
//!   distributions;
//! - [`majorization`]: majorization, Schur-concavity probes and the order
//!   `q = 1/2` boundary;
//! - [`multifractal`]: box counting, `τ(q)`/`f(a)` spectra and cascades.
//!
//! ```
//! use qentropy::entropy::{hybrid_dq, EntropyOrder, ProbDist};
//!
//! let p = ProbDist::new(vec![0.3, 0.7]).unwrap();
//! let d = hybrid_dq(&p, EntropyOrder::new(2.0).unwrap()).unwrap();
//! assert!((d - 0.386_240_547_111_329_7).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod entropy;
pub mod error;
pub mod lambert;
pub mod majorization;
pub mod maxent;
pub mod multifractal;
pub mod par;

pub use entropy::{EntropyKind, EntropyOrder, ProbDist};
pub use error::{Error, Result};
pub use lambert::{Branch, WBranchValue};
pub use maxent::{ConstraintKind, EnergySpectrum, MaxEntProblem, MaxEntSolution, SolverOptions};
pub use par::Execution;
