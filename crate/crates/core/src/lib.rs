//! Numerical toolkit for uniformly rotating vortex patches (V-states) of the
//! two-dimensional Euler equations and the free-boundary problem satisfied by
//! their relative stream function.

pub mod acceptance;
pub mod angular;
pub mod blowup;
pub mod cone;
pub mod error;
pub mod field;
pub mod geometry;
pub mod quadrature;
pub mod vstate;
pub mod weiss;

pub use error::{Error, Result};
pub use field::{relative_stream, BoxRegion, PlanarField, ScalarField, Synthetic};
pub use geometry::{PatchBoundary, Point};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/stream-function.md")]
    mod stream_function {}
    #[doc = include_str!("../../../book/src/weiss.md")]
    mod weiss {}
    #[doc = include_str!("../../../book/src/blowup.md")]
    mod blowup {}
    #[doc = include_str!("../../../book/src/angular.md")]
    mod angular {}
    #[doc = include_str!("../../../book/src/cone.md")]
    mod cone {}
    #[doc = include_str!("../../../book/src/vstate.md")]
    mod vstate {}
}
