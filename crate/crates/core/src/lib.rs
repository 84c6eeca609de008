//! Warped-product G2-structures on `N^6 x L`, modelled through their profile
//! functions `(G, h, theta)` on a 1-dimensional grid: torsion computation
//! and classification, conformal gauge fixing and reconstruction, the Hodge
//! Laplacian of the defining 3-form, the modified Laplacian coflow as a
//! method-of-lines system, and the soliton ODE systems with their
//! closed-form solution families.
//!
//! ```
//! use g2flow::geometry::{compute_abc, torsion_class, SU3Background, WarpedProfile};
//! use g2flow::numerics::{Field, Grid};
//!
//! // a nearly Kahler background with linearly winding phase
//! let grid = Grid::interval(128, 0.0, 1.0);
//! let profile = WarpedProfile::new(
//!     Field::constant(grid, 1.0),
//!     Field::constant(grid, 1.0),
//!     Field::from_fn(grid, |r| r),
//!     SU3Background::nearly_kahler(),
//! );
//! let torsion = compute_abc(&profile);
//! // alpha = 1, beta = sin(r), gamma = cos(r)
//! assert!((torsion.alpha.value(0) - 1.0).abs() < 1e-10);
//! assert!(!torsion_class(&torsion, 1e-9).co_closed);
//! ```

pub mod flow;
pub mod geometry;
pub mod laplacian;
pub mod numerics;
pub mod profile;
pub mod soliton;
pub mod verify;
