//! Exact and numeric verification of deformation families of cusped
//! hyperbolic lattices: the figure-eight knot group into SU(3,1) and SU(2,2),
//! and bending families of Bianchi groups into SU(3,1) and SO(4,1).
//!
//! The crate is layered bottom-up:
//!
//! * [`scalars`]: Laurent polynomials, quadratic extensions, complex floats;
//! * [`matform`]: matrices over those scalars, Hermitian forms, spectra;
//! * [`isometry`]: the elliptic / parabolic / loxodromic taxonomy;
//! * [`heisenberg`]: boundary geometry of the Siegel model and cusp orbits;
//! * [`words`]: presentations, words and representations;
//! * [`figure8`] and [`bending`]: the concrete families and their checks.

pub mod bending;
pub mod figure8;
pub mod heisenberg;
pub mod isometry;
pub mod matform;
pub mod scalars;
pub mod words;

pub use matform::{Backend, CMat, EigenData, FormConvention, HermForm, Mat, MatError, Signature};
pub use scalars::{Angle, CScalar, ExtScalar, LaurentPoly, Ring, ScalarError};

/// Default numeric tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
