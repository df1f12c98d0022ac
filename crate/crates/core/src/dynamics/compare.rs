use nalgebra::DVector;
use serde::Serialize;

use super::chords::trace_chords;
use super::ode::trace_with_potential;
use super::trajectory::{Trajectory, TrajectorySummary};
use crate::confocal::BoundaryQuadric;
use crate::error::Result;
use crate::hierarchy::{HierarchyMetric, Metric, PhasePoint};
use crate::potentials::ZeroPotential;

/// Geodesic billiard of the Klein-model metric, integrated numerically from
/// the velocity `v0`. Momenta are stored as velocities.
pub fn trace_hyperbolic_geodesics(
    boundary: &BoundaryQuadric,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    n_bounces: usize,
    tol: f64,
) -> Result<Trajectory> {
    let g = HierarchyMetric::hyperbolic(boundary.family().clone());
    let p0 = g.matrix(x0)? * v0;
    let mut traj = trace_with_potential(boundary, &g, &ZeroPotential, &PhasePoint::new(x0.clone(), p0), n_bounces, tol)?;
    traj.start.p = v0.clone();
    for b in &mut traj.bounces {
        let inv = g.cometric(&b.x)?;
        b.p_in = &inv * &b.p_in;
        b.p_out = &inv * &b.p_out;
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub bounces: usize,
    pub tol: f64,
    /// Per bounce: distance of the bounce points and of the outgoing unit
    /// directions.
    pub deviations: Vec<(f64, f64)>,
    pub max_point_deviation: f64,
    pub max_direction_deviation: f64,
    pub chords: TrajectorySummary,
    pub geodesic: TrajectorySummary,
}

fn unit(v: &DVector<f64>) -> DVector<f64> {
    v / v.norm()
}

/// Hyperbolic geodesic billiard against the Euclidean chord billiard from the
/// same launch. Both are broken lines through their bounce points, so the
/// point sets agree when the bounce points and directions do.
pub fn compare_models(
    boundary: &BoundaryQuadric,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    n_bounces: usize,
    tol: f64,
) -> Result<ModelComparison> {
    let chords = trace_chords(boundary, x0, v0, n_bounces)?;
    let ode = trace_hyperbolic_geodesics(boundary, x0, v0, n_bounces, tol)?;
    let deviations: Vec<(f64, f64)> = chords
        .bounces
        .iter()
        .zip(&ode.bounces)
        .map(|(a, b)| ((&a.x - &b.x).norm(), (unit(&a.p_out) - unit(&b.p_out)).norm()))
        .collect();
    Ok(ModelComparison {
        bounces: n_bounces,
        tol,
        max_point_deviation: deviations.iter().map(|d| d.0).fold(0.0, f64::max),
        max_direction_deviation: deviations.iter().map(|d| d.1).fold(0.0, f64::max),
        deviations,
        chords: chords.summary(None),
        geodesic: ode.summary(None),
    })
}
