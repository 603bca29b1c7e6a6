//! Random walks on finite modules over finite commutative rings and their
//! exact spectra.
//!
//! Rings and modules are element-indexed tables. A walk is built from a
//! distribution `P` on the module and `Q` on the ring; its eigenvalues are
//! predicted from characters of the dual module and checked against exact
//! traces of the transition matrix.
//!
//! ```
//! use ringwalk::experiment::{parse_spec, run};
//!
//! let spec = parse_spec(r#"{"ring": {"zn": 4}, "walk": {"coin_toss": {"alpha": "1/2"}}}"#).unwrap();
//! let artifacts = run(&spec).unwrap();
//! assert!(artifacts.verification.pass);
//! ```
//!
//! The numeric core is generic over [`scalar::Real`]; the aliases below fix
//! the scalar for the common cases.

pub mod characters;
pub mod corpus;
pub mod experiment;
pub mod matrix;
mod modtrace;
pub mod module;
pub mod ring;
pub mod scalar;
pub mod spectrum;
pub mod verify;
pub mod walk;

pub use num_complex::Complex64;
pub use num_rational::BigRational;

pub use characters::{dual_module, AbelianPresentation, Character, DualModule, RootOfUnity};
pub use experiment::{parse_spec, ExperimentSpec, SpecError};
pub use module::{build_cyclic_module, build_free_module, direct_sum, FiniteModule};
pub use ring::{build_gf, build_product, build_zn, quotient_ring, Elem, FiniteRing, Ideal, RingRef};
pub use spectrum::{SpectrumItem, SpectrumPath, SpectrumReport};
pub use verify::{verify_power_sums, VerificationReport};
pub use walk::{build_transition, Distribution, Polynomial, TransitionMatrix, WalkKind, WalkSpec};

/// Exact rational scalar used throughout.
pub type Rational = BigRational;
pub type ComplexRational = num_complex::Complex<Rational>;
pub type RationalMatrix = matrix::Matrix<Rational>;
pub type FloatMatrix = matrix::Matrix<f64>;
pub type RationalDistribution = Distribution<Rational>;
pub type FloatDistribution = Distribution<f64>;
pub type RationalWalk = WalkSpec<Rational>;
pub type FloatWalk = WalkSpec<f64>;
