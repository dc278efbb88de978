//! Exact and Monte-Carlo machinery for hard-core point processes on finite
//! weighted metric spaces.
//!
//! The crate revolves around the avoidance generating function `Z`: on an
//! atomic space it is the independence polynomial of the strict unit-distance
//! graph evaluated at negated masses. Everything else is built on top of it:
//!
//! * [`space`]: finite metric spaces, regions, the unit partition number κ
//!   and the growth bound K;
//! * [`zfun`]: exact evaluation of `Z` and the ratio `z`, phase
//!   classification of intensity measures, critical scaling factors, the
//!   iterated set-difference operator and a Poisson-functional Monte-Carlo
//!   estimator;
//! * [`cluster`]: Penrose coefficients and the truncated series expansion of
//!   `-log z`;
//! * [`lll`]: sufficient local conditions (local-lemma style) for uniform
//!   exponential lower bounds on `z`, with certificates and bound evaluation;
//! * [`sim`]: exact samplers for the point processes the library compares
//!   (product fields, Matérn I/II/III thinnings, the hard-sphere model,
//!   Shearer's process, a zero-phase construction) plus empirical statistics;
//! * [`audit`]: the deterministic end-to-end check suite, also exposed
//!   through the CLI.
//!
//! All values are immutable after construction and every operation is a pure
//! function of its inputs (and, for samplers, an explicit seed), so the whole
//! API is safe to use concurrently without coordination.
//!
//! ```
//! use shearer_core::zfun::{classify_phase, z_exact, Phase, ZMethod};
//! use shearer_core::{AtomicMeasure, FiniteMetricSpace};
//!
//! let space = FiniteMetricSpace::from_coords(
//!     vec!["a".into(), "b".into(), "c".into()],
//!     vec![vec![0.0], vec![0.5], vec![1.0]],
//! )?;
//! let measure = AtomicMeasure::uniform(&space, 0.2)?;
//! let z = z_exact(&space, &measure, space.full_region(), ZMethod::Recursion)?;
//! assert!((z - 0.44).abs() < 1e-12);
//! assert_eq!(classify_phase(&space, &measure)?.phase, Phase::Positive);
//! # Ok::<(), shearer_core::Error>(())
//! ```

pub mod audit;
pub mod cluster;
pub mod error;
pub mod lll;
pub mod measure;
pub mod numeric;
pub mod sim;
pub mod space;
pub mod zfun;

pub use error::Error;
pub use measure::AtomicMeasure;
pub use space::{BoxRegion, FiniteMetricSpace, GridRegion, Kappa, KappaMode, RegionSet};
pub use zfun::{EvalLimits, McEstimate, Phase, PhaseLabel, ZMethod};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
