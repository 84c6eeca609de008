//! Grids on the 1-dimensional factor, spatial differentiation, quadrature and
//! ODE time-stepping shared by the geometry, flow and soliton modules.

mod grid;
mod ode;
mod stencil;

pub use grid::{Field, Grid, Topology};
pub use ode::{integrate_ode, OdeError, OdeSolution, StepControl};
pub use stencil::{diff, quadrature};
