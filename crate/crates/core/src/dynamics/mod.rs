//! Billiard dynamics inside a confocal quadric: reflection law, chord
//! stepping, integrated geodesic and potential flows, closure tests.

mod chords;
mod compare;
mod launch;
mod ode;
mod reflect;
mod trajectory;

pub use compare::{compare_models, trace_hyperbolic_geodesics, ModelComparison};
pub use chords::{chord_exit, trace_chords, trace_chords_in};
pub use launch::{find_double_normals, random_boundary_point, tangent_launch, DoubleNormal};
pub use ode::{geodesic_flow, hamiltonian_flow, trace_with_potential, PathSamples};
pub use reflect::{reflect, reflect_elliptic, transversality, BOUNDARY_TOLERANCE, GRAZING_THRESHOLD};
pub use trajectory::{closure_check, Bounce, Trajectory, TrajectorySummary};
