//! Numerical toolkit for anisotropic degenerate elliptic problems with
//! gradient growth: convex gauges and their Wulff shapes, decreasing
//! rearrangements and convex symmetrization, exact radial solutions with
//! branch selection, finite-element Dirichlet solves, and the comparison
//! checks tying them together.

pub mod anisotropy;
pub mod geometry;
pub mod pde;
pub mod quad;
pub mod radial;
pub mod rearrange;
pub mod verify;
