use nalgebra::DVector;

use super::reflect::reflect;
use super::trajectory::{Bounce, Trajectory};
use crate::confocal::{line_caustics, BoundaryQuadric};
use crate::error::{Error, Result};
use crate::hierarchy::{Metric, PhasePoint};
use crate::potentials::{Potential, ZeroPotential};

/// Step cap for a single integration call.
const MAX_STEPS: usize = 2_000_000;

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Hamiltonian vector field of `H = ½ g⁻¹(p, p) + V` on `y = (x, p)`.
struct Field<'a> {
    metric: &'a dyn Metric,
    potential: &'a dyn Potential,
    d: usize,
}

impl Field<'_> {
    fn split(&self, y: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (y.rows(0, self.d).into_owned(), y.rows(self.d, self.d).into_owned())
    }

    fn eval(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let (x, p) = self.split(y);
        let xdot = self.metric.cometric(&x)? * &p;
        let pdot = -(self.metric.kinetic_gradient(&x, &p)? + self.potential.gradient(&x));
        let mut out = DVector::zeros(2 * self.d);
        out.rows_mut(0, self.d).copy_from(&xdot);
        out.rows_mut(self.d, self.d).copy_from(&pdot);
        Ok(out)
    }

    fn energy(&self, y: &DVector<f64>) -> Result<f64> {
        let (x, p) = self.split(y);
        Ok(self.metric.kinetic(&x, &p)? + self.potential.value(&x))
    }
}

/// One Dormand–Prince step: fifth-order solution and error estimate.
fn dopri_step(f: &Field, y: &DVector<f64>, h: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
    for s in 0..7 {
        let mut ys = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if A[s][j] != 0.0 {
                ys += kj * (h * A[s][j]);
            }
        }
        k.push(f.eval(&ys)?);
    }
    let mut y5 = y.clone();
    let mut err = DVector::zeros(y.len());
    for s in 0..7 {
        y5 += &k[s] * (h * B5[s]);
        err += &k[s] * (h * (B5[s] - B4[s]));
    }
    Ok((y5, err))
}

fn error_norm(err: &DVector<f64>, y0: &DVector<f64>, y1: &DVector<f64>, tol: f64) -> f64 {
    let n = err.len() as f64;
    (err.iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (a, b))| {
            let sc = tol + tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum::<f64>()
        / n)
        .sqrt()
}

struct Stepper<'a> {
    field: Field<'a>,
    tol: f64,
    h: f64,
}

impl Stepper<'_> {
    /// Advances by one accepted adaptive step, never beyond `h_max`.
    fn advance(&mut self, y: &DVector<f64>, h_max: f64) -> Result<(f64, DVector<f64>)> {
        loop {
            let h = self.h.min(h_max);
            let (y1, err) = dopri_step(&self.field, y, h)?;
            let en = error_norm(&err, y, &y1, self.tol);
            let factor = if en == 0.0 {
                5.0
            } else if en.is_finite() {
                (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                0.2
            };
            if en <= 1.0 {
                if h == self.h || factor < 1.0 {
                    self.h = h * factor;
                }
                return Ok((h, y1));
            }
            self.h = h * factor;
            if self.h < 1e-14 * (1.0 + h_max.abs()) {
                return Err(Error::Integration("step size underflow".into()));
            }
        }
    }
}

fn map_model_error(e: Error) -> Error {
    match e {
        Error::OutsideModel { f } => Error::LeftModel { f },
        other => other,
    }
}

/// Samples of an integrated phase-space path at the accepted steps.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSamples {
    pub t: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub velocities: Vec<DVector<f64>>,
    pub energies: Vec<f64>,
}

impl PathSamples {
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    /// Distance from `q` to the piecewise cubic Hermite curve through the samples.
    pub fn distance_to(&self, q: &DVector<f64>) -> f64 {
        let n = self.states.len();
        let mut best = f64::INFINITY;
        for i in 0..n.saturating_sub(1) {
            let (x0, x1) = (&self.states[i].x, &self.states[i + 1].x);
            let h = self.t[i + 1] - self.t[i];
            let (v0, v1) = (&self.velocities[i] * h, &self.velocities[i + 1] * h);
            let chord = (x1 - x0).norm();
            if (x0 - q).norm().min((x1 - q).norm()) > best + chord {
                continue;
            }
            for s in 0..=64 {
                let u = s as f64 / 64.0;
                let p = hermite(x0, &v0, x1, &v1, u);
                best = best.min((p - q).norm());
            }
            // Local refinement by golden-section on the segment parameter.
            let (mut a, mut b) = (0.0f64, 1.0f64);
            let g = |u: f64| (hermite(x0, &v0, x1, &v1, u) - q).norm();
            let r = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let c = b - r * (b - a);
                let e = a + r * (b - a);
                if g(c) < g(e) {
                    b = e;
                } else {
                    a = c;
                }
            }
            best = best.min(g(0.5 * (a + b)));
        }
        if n == 1 {
            best = (&self.states[0].x - q).norm();
        }
        best
    }
}

fn hermite(x0: &DVector<f64>, v0: &DVector<f64>, x1: &DVector<f64>, v1: &DVector<f64>, u: f64) -> DVector<f64> {
    let u2 = u * u;
    let u3 = u2 * u;
    x0 * (2.0 * u3 - 3.0 * u2 + 1.0) + v0 * (u3 - 2.0 * u2 + u) + x1 * (-2.0 * u3 + 3.0 * u2) + v1 * (u3 - u2)
}

fn pack(s: &PhasePoint) -> DVector<f64> {
    let d = s.dim();
    let mut y = DVector::zeros(2 * d);
    y.rows_mut(0, d).copy_from(&s.x);
    y.rows_mut(d, d).copy_from(&s.p);
    y
}

/// Flow of `H = ½ g⁻¹(p, p) + V` up to time `t_end`.
pub fn hamiltonian_flow(
    metric: &dyn Metric,
    potential: &dyn Potential,
    start: &PhasePoint,
    t_end: f64,
    tol: f64,
) -> Result<PathSamples> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameters("tolerance must be positive".into()));
    }
    let d = start.dim();
    let field = Field { metric, potential, d };
    let mut y = pack(start);
    let mut t = 0.0;
    let sample = |y: &DVector<f64>, field: &Field| -> Result<(PhasePoint, DVector<f64>, f64)> {
        let (x, p) = field.split(y);
        let v = field.metric.cometric(&x)? * &p;
        let e = field.energy(y)?;
        Ok((PhasePoint::new(x, p), v, e))
    };
    let (s0, v0, e0) = sample(&y, &field).map_err(map_model_error)?;
    let mut out = PathSamples { t: vec![0.0], states: vec![s0], velocities: vec![v0], energies: vec![e0] };
    let mut stepper = Stepper { field, tol, h: (0.01 * t_end.abs()).max(1e-6) };
    let mut steps = 0;
    while t < t_end {
        let (h, y1) = stepper.advance(&y, t_end - t).map_err(map_model_error)?;
        t = if t_end - t - h <= 1e-15 * t_end { t_end } else { t + h };
        y = y1;
        let (s, v, e) = sample(&y, &stepper.field).map_err(map_model_error)?;
        out.t.push(t);
        out.states.push(s);
        out.velocities.push(v);
        out.energies.push(e);
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::Integration("step limit exceeded".into()));
        }
    }
    Ok(out)
}

/// Geodesic flow of `metric`; flat metrics are short-circuited to straight lines.
pub fn geodesic_flow(metric: &dyn Metric, start: &PhasePoint, t_end: f64, tol: f64) -> Result<PathSamples> {
    if metric.is_flat() {
        let samples = 16;
        let mut out = PathSamples { t: vec![], states: vec![], velocities: vec![], energies: vec![] };
        let e = 0.5 * start.p.norm_squared();
        for i in 0..=samples {
            let t = t_end * i as f64 / samples as f64;
            out.t.push(t);
            out.states.push(PhasePoint::new(&start.x + &start.p * t, start.p.clone()));
            out.velocities.push(start.p.clone());
            out.energies.push(e);
        }
        return Ok(out);
    }
    hamiltonian_flow(metric, &ZeroPotential, start, t_end, tol)
}

/// Billiard inside Γ for `H = ½ g⁻¹(p, p) + V`: integrate, locate each boundary
/// crossing on the step size, reflect, continue until `n_bounces`.
pub fn trace_with_potential(
    boundary: &BoundaryQuadric,
    metric: &dyn Metric,
    potential: &dyn Potential,
    start: &PhasePoint,
    n_bounces: usize,
    tol: f64,
) -> Result<Trajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameters("tolerance must be positive".into()));
    }
    let d = start.dim();
    let family = boundary.family();
    let field = Field { metric, potential, d };
    let energy = field.energy(&pack(start)).map_err(map_model_error)?;
    let velocity = |y: &DVector<f64>, field: &Field| -> Result<DVector<f64>> {
        let (x, p) = field.split(y);
        Ok(field.metric.cometric(&x)? * p)
    };
    let first_v = velocity(&pack(start), &field)?;
    let mut segments = vec![line_caustics(family, &start.x, &first_v)?];
    let mut stepper = Stepper { field, tol, h: 1e-2 };
    let mut y = pack(start);
    let mut bounces = Vec::with_capacity(n_bounces);
    let mut steps = 0;
    let level = |y: &DVector<f64>| boundary.level(&y.rows(0, d).into_owned());
    let min_axis = boundary.semi_axes_sq().iter().fold(f64::INFINITY, |m, v| m.min(v.sqrt()));
    while bounces.len() < n_bounces {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::Integration("step limit exceeded".into()));
        }
        // One step may not cross Γ twice: limit the travel to a fraction of the
        // smallest semi-axis.
        let speed = velocity(&y, &stepper.field)?.norm();
        let cap = if speed > 0.0 { 0.25 * min_axis / speed } else { f64::INFINITY };
        let (h, y1) = stepper.advance(&y, cap).map_err(map_model_error)?;
        if level(&y1) <= 0.0 {
            y = y1;
            continue;
        }
        // Bracket [lo, hi] on the step size with level(lo) < 0 < level(hi).
        let mut lo = 0.0;
        let mut g_lo = level(&y);
        if g_lo >= 0.0 {
            let mut found = false;
            for k in 1..32 {
                let s = h * k as f64 / 32.0;
                let (ys, _) = dopri_step(&stepper.field, &y, s).map_err(map_model_error)?;
                let g = level(&ys);
                if g < 0.0 {
                    lo = s;
                    g_lo = g;
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::TangentialImpact { transversality: 0.0 });
            }
        }
        let (mut hi, mut g_hi) = (h, level(&y1));
        let mut yb = y1.clone();
        let mut side = 0i8;
        for _ in 0..200 {
            let s = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
            let (ys, _) = dopri_step(&stepper.field, &y, s).map_err(map_model_error)?;
            let g = level(&ys);
            yb = ys;
            if g == 0.0 || hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            if g < 0.0 {
                lo = s;
                g_lo = g;
                if side == -1 {
                    g_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = s;
                g_hi = g;
                if side == 1 {
                    g_lo *= 0.5;
                }
                side = 1;
            }
        }
        let (x, p_in) = stepper.field.split(&yb);
        let p_out = reflect(boundary, stepper.field.metric, &x, &p_in)?;
        y = yb;
        y.rows_mut(d, d).copy_from(&p_out);
        let v = velocity(&y, &stepper.field)?;
        segments.push(line_caustics(family, &x, &v)?);
        bounces.push(Bounce { x, p_in, p_out });
    }
    Ok(Trajectory { start: start.clone(), bounces, segments, metric_tag: metric.tag(), energy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confocal::ConfocalFamily;
    use crate::dynamics::trace_chords;
    use crate::hierarchy::{Branch, HierarchyContext, HierarchyMetric};
    use crate::numeric::{int, rat};

    fn fam() -> ConfocalFamily {
        ConfocalFamily::new(vec![int(5), int(3), int(1)]).unwrap()
    }

    #[test]
    fn flat_short_circuit() {
        let g = HierarchyMetric::euclidean(fam());
        let s = PhasePoint::new(DVector::from_vec(vec![0.1, 0.2, 0.3]), DVector::from_vec(vec![1.0, -1.0, 0.5]));
        let path = geodesic_flow(&g, &s, 2.0, 1e-9).unwrap();
        let last = path.states.last().unwrap();
        assert_eq!(last.x, &s.x + &s.p * 2.0);
    }

    #[test]
    fn hyperbolic_diameter_and_chord() {
        let g = HierarchyMetric::hyperbolic(fam());
        let s = PhasePoint::new(DVector::zeros(3), DVector::from_vec(vec![0.0, 0.05, 0.0]));
        let path = geodesic_flow(&g, &s, 1.0, 1e-10).unwrap();
        for st in &path.states {
            assert!(st.x[0].abs() < 1e-14 && st.x[2].abs() < 1e-14);
        }
        let x0 = DVector::from_vec(vec![0.5, -0.4, 0.2]);
        let v0 = DVector::from_vec(vec![-0.3, 0.7, 0.4]);
        let p0 = g.matrix(&x0).unwrap() * &v0;
        let path = geodesic_flow(&g, &PhasePoint::new(x0.clone(), p0), 0.5, 1e-9).unwrap();
        let dir = v0.normalize();
        for st in &path.states {
            let r = &st.x - &x0;
            assert!((&r - &dir * r.dot(&dir)).norm() < 1e-8);
        }
        assert!(path.energy_drift() < 10.0 * 1e-9 * 0.5 * (1.0 + path.energies[0]));
    }

    #[test]
    fn zero_potential_matches_chords() {
        let bd = BoundaryQuadric::new(fam(), rat(1, 2)).unwrap();
        let g = HierarchyMetric::new(HierarchyContext::new(fam(), 0), Branch::Euclidean);
        let x0 = DVector::from_vec(vec![0.2, 0.1, -0.1]);
        let v0 = DVector::from_vec(vec![0.6, -0.3, 0.5]);
        let ode = trace_with_potential(&bd, &g, &ZeroPotential, &PhasePoint::new(x0.clone(), v0.clone()), 5, 1e-10).unwrap();
        let ch = trace_chords(&bd, &x0, &v0, 5).unwrap();
        for (a, b) in ode.bounces.iter().zip(&ch.bounces) {
            assert!((&a.x - &b.x).norm() < 1e-8);
        }
    }
}
