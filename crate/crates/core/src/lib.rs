//! Hankel determinants generated by perturbed Jacobi weights on `[-1, 1]`.
//!
//! For a weight `w(x) = (1-x)^α (1+x)^β h(x)` the crate computes
//! `ln D_n[w] = ln det(μ_{j+k})_{j,k<n}` by three routes:
//!
//! * the closed form for the pure weight (`h ≡ 1`) built from Gamma and
//!   Barnes G values ([`jacobi`]),
//! * direct high-precision factorization of the moment matrix, by LDLᵀ and
//!   by the modified Chebyshev algorithm ([`hankel`]),
//! * the large-`n` asymptotic formula with its explicit constant, whose
//!   perturbation part comes from the Chebyshev coefficients of `ln h`
//!   ([`linstat`]).
//!
//! All arithmetic is carried out in [`BigReal`] at a [`Precision`] measured
//! in decimal digits. Logarithms are used throughout since `D_n` behaves
//! like `2^{-n^2}`.

pub mod dsl;
pub mod error;
pub mod fluid;
pub mod hankel;
pub mod jacobi;
pub mod linstat;
pub mod precision;
pub mod quadrature;
pub mod specfun;

pub use dsl::{parse_h, validate_positive, Expr, Family, PerturbationFn};
pub use error::{Error, Result};
pub use fluid::{EquilibriumDensity, FluidRecurrence, SupportInterval};
pub use hankel::{HankelMethod, HankelResult, MomentSequence, MomentSource};
pub use jacobi::{JacobiParams, RecurrenceCoeffs};
pub use linstat::{AsymptoticPrediction, ConstantParts, LinStatTerms, MeanForm};

pub use precision::{BigReal, Precision};
pub use quadrature::{ChebExpansion, QuadratureRule};
