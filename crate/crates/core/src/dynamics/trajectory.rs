use std::fmt::Write;

use nalgebra::DVector;
use serde::Serialize;

use crate::confocal::CausticSet;
use crate::hierarchy::PhasePoint;

#[derive(Debug, Clone, PartialEq)]
pub struct Bounce {
    pub x: DVector<f64>,
    pub p_in: DVector<f64>,
    pub p_out: DVector<f64>,
}

/// Broken billiard path: launch state, bounces and the caustic parameters of
/// every segment (`segments[0]` leaves the launch point, `segments[i]` leaves
/// bounce `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start: PhasePoint,
    pub bounces: Vec<Bounce>,
    pub segments: Vec<CausticSet>,
    pub metric_tag: String,
    pub energy: f64,
}

fn unit(v: &DVector<f64>) -> DVector<f64> {
    v / v.norm()
}

impl Trajectory {
    /// Position and unit momentum after `n` bounces (`n = 0` is the launch).
    pub fn state_after(&self, n: usize) -> Option<(DVector<f64>, DVector<f64>)> {
        if n == 0 {
            return Some((self.start.x.clone(), unit(&self.start.p)));
        }
        self.bounces.get(n - 1).map(|b| (b.x.clone(), unit(&b.p_out)))
    }

    /// `|x_n − x_0| + |p̂_n − p̂_0|`.
    pub fn closure_residual(&self, n: usize) -> Option<f64> {
        let (x0, p0) = self.state_after(0)?;
        let (xn, pn) = self.state_after(n)?;
        Some((xn - x0).norm() + (pn - p0).norm())
    }

    /// Closure residual up to the coordinate reflections `x ↦ σx`, `σ ∈ {±1}^d`.
    pub fn symmetric_closure_residual(&self, n: usize) -> Option<f64> {
        let (x0, p0) = self.state_after(0)?;
        let (xn, pn) = self.state_after(n)?;
        let d = x0.len();
        let best = (0u32..1 << d)
            .map(|mask| {
                let s = DVector::from_fn(d, |i, _| if mask >> i & 1 == 1 { -1.0 } else { 1.0 });
                (&xn - x0.component_mul(&s)).norm() + (&pn - p0.component_mul(&s)).norm()
            })
            .fold(f64::INFINITY, f64::min);
        Some(best)
    }

    /// Largest deviation of any segment's caustic set from the first one.
    pub fn caustic_drift(&self) -> f64 {
        let first = &self.segments[0];
        self.segments.iter().map(|s| s.max_deviation(first)).fold(0.0, f64::max)
    }

    /// Delimited table, one row per bounce (row 0 is the launch): index,
    /// position, outgoing unit momentum, caustic parameters.
    pub fn table(&self) -> String {
        let d = self.start.x.len();
        let mut out = String::from("index");
        for i in 1..=d {
            write!(out, ",x{i}").unwrap();
        }
        for i in 1..=d {
            write!(out, ",p{i}").unwrap();
        }
        for i in 1..d {
            write!(out, ",mu{i}").unwrap();
        }
        out.push('\n');
        for n in 0..=self.bounces.len() {
            let (x, p) = self.state_after(n).expect("index in range");
            write!(out, "{n}").unwrap();
            for v in x.iter().chain(p.iter()) {
                write!(out, ",{v:.17e}").unwrap();
            }
            if let Some(seg) = self.segments.get(n) {
                for v in &seg.params {
                    write!(out, ",{v:.17e}").unwrap();
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self, n: Option<usize>) -> TrajectorySummary {
        TrajectorySummary {
            metric: self.metric_tag.clone(),
            bounces: self.bounces.len(),
            energy: self.energy,
            caustic_drift: self.caustic_drift(),
            closure_residual: n.and_then(|n| self.closure_residual(n)),
            symmetric_closure_residual: n.and_then(|n| self.symmetric_closure_residual(n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub metric: String,
    pub bounces: usize,
    pub energy: f64,
    pub caustic_drift: f64,
    pub closure_residual: Option<f64>,
    pub symmetric_closure_residual: Option<f64>,
}

/// State recurrence after `n` bounces within `eps`.
pub fn closure_check(traj: &Trajectory, n: usize, eps: f64) -> bool {
    traj.closure_residual(n).is_some_and(|r| r < eps)
}
