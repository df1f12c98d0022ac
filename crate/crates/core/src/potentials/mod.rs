//! Separable potentials: Laurent polynomial algebra, the separability system
//! and its coefficient recurrence, basis potentials and companion integrals.

mod basis;
mod companion;
mod elliptic;
mod laurent;
mod separability;

pub use basis::{basis_potential, catalog_potential, printed_catalog_potential, BasisKind, BasisSpec};
pub use companion::{
    antiderivative, line_integral, loop_integral, solve_f, symbolic_field, CompanionFunction, PerturbedIntegral,
};
pub use elliptic::{divided_difference, elliptic_calibrate, elliptic_form_eval, EllipticProfile};
pub use laurent::LaurentPolynomial;
pub use separability::{
    is_separable, recurrence_check, separability_residual, PairResidual, RecurrenceOutcome, RecurrenceViolation,
};

use nalgebra::DVector;

/// A smooth potential on a domain of ℝ^d.
pub trait Potential: Send + Sync {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn value(&self, _x: &DVector<f64>) -> f64 {
        0.0
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(x.len())
    }
}
