//! Grid calculus: x-derivatives, quadrature and partial Fourier transforms.

pub mod fourier;
pub mod quadrature;
pub mod stencil;

pub use fourier::{fourier_x, fourier_x_damped, inverse_fourier_x};
pub use quadrature::{integrate_p, integrate_x, p_tail_max, simpson, simpson_weights, DEFAULT_TAIL_TOL};
pub use stencil::{derivative_at_node, interior_x_mask, partial_derivative_x, partial_derivative_x_with, Stencil};
