//! P1 and MINI finite-element spaces, quadrature and operator assembly.

mod assembly;
mod dirichlet;
mod dof;
mod element;
mod interpolate;
mod norms;
mod quadrature;
mod space;

pub use assembly::{
    assemble_divergence_block, assemble_mass_p1, assemble_mini_mass, assemble_mini_momentum_block,
    assemble_mini_viscous_block, assemble_reaction_weighted_mass, assemble_scalar_convection,
    assemble_stiffness_p1, assemble_weighted_mass, Coefficient, QuadField,
};
pub(crate) use assembly::{p1_value, velocity_eval, velocity_local};
pub use dirichlet::{apply_dirichlet, DirichletMode};
pub use dof::{DofLayout, LayoutKind};
pub use element::{bubble, ElementGeometry, BUBBLE_SCALE};
pub use interpolate::{interpolate, interpolate_velocity};
pub use norms::{
    l2_error_p1, h1_seminorm_error_p1, velocity_errors, l2_norm_p1, VelocityNorms,
};
pub use quadrature::{QuadratureRule, RuleKind};
pub use space::Discretization;
