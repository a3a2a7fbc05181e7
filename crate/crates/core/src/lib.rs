//! Corrected trapezoidal rules for near-singular Stokes layer potentials on ellipsoids.
//!
//! The crate evaluates the Stokes single and double layer potentials of densities on
//! posed ellipsoids at targets arbitrarily close to the surfaces. A fourth-order
//! trapezoidal rule on a latitude-longitude chart is corrected by the exact window
//! integrals of a local expansion of the integrand, which keeps the error uniform in
//! the distance to the surface. On top of that sit a boundary integral solver for
//! resistance-free bodies in a uniform stream and a particle tracer.
//!
//! The `examples/` directory holds one runnable program per capability:
//!
//! * `sphere_layers` evaluates both layers near a unit sphere and compares with closed forms.
//! * `recursion_table` computes window integrals `I_pqk` and checks them against quadrature.
//! * `trapezoid_orders` shows the orders 2, 4 and 6 of the rectangle rules.
//! * `ellipsoid_flow` solves for the density on a (3,2,1) ellipsoid and samples the velocity.
//! * `shadow_sphere` runs the windward-to-leeward particle experiment past a sphere.
//! * `two_spheres` and `three_ellipsoids` solve the multi-body scenes and trace streamlines.

pub mod commands;
pub mod error;
pub mod expand;
pub mod flowsim;
pub mod gauss;
pub mod geom;
pub mod gmres;
pub mod interp;
pub mod io;
pub mod nearcore;
pub mod poly;
pub mod scene;
pub mod solve;
pub mod stokes;
pub mod trapz;

pub use error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
