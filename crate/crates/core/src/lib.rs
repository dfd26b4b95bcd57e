//! Containment tests for ellipsoids.
//!
//! [`inclusion::decide`] classifies `E ⊆ E0` as strictly inside, outside or
//! touching within a tolerance. It works on a scalar concave dual after
//! moving `E0` to the unit ball. The same dual yields the minimal scaling
//! factor, boundary contact points and covering bounds for several
//! ellipsoids, which [`invariant`] uses to size invariant level sets of
//! disturbed linear systems.
//!
//! ```
//! use ellinc::ellipsoid::Ellipsoid;
//! use ellinc::inclusion::{decide, minimal_scaling, Verdict, DEFAULT_EPS, DEFAULT_TOL};
//! use ellinc::linalg::SymMatrix;
//!
//! let e = Ellipsoid::new(vec![0.2, 0.0], SymMatrix::from_diag(&[4.0, 4.0]))?;
//! let ball = Ellipsoid::unit_ball(2);
//!
//! assert_eq!(decide(&e, &ball, DEFAULT_EPS)?.verdict, Verdict::StrictlyInside);
//! assert!((minimal_scaling(&e, &ball, DEFAULT_TOL)?.gamma - 0.49).abs() < 1e-10);
//! # Ok::<(), ellinc::error::Error>(())
//! ```
//!
//! [`oracle`] holds an independent sampling check used by the tests and
//! [`generate`] the seeded problem generator behind the benchmark.

pub mod dualfn;
pub mod ellipsoid;
pub mod error;
pub mod generate;
pub mod inclusion;
pub mod invariant;
pub mod linalg;
pub mod oracle;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/normalization.md")]
    mod normalization {}
    #[doc = include_str!("../../../book/src/dual.md")]
    mod dual {}
    #[doc = include_str!("../../../book/src/decision.md")]
    mod decision {}
    #[doc = include_str!("../../../book/src/scaling.md")]
    mod scaling {}
    #[doc = include_str!("../../../book/src/invariant.md")]
    mod invariant {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
