use argmin::core::{CostFunction, Executor, State};
use argmin::solver::brent::BrentOpt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::condition::period_indicator_f64;
use crate::confocal::{minkowski_to_klein, BoundaryQuadric, MinkowskiEllipsoid};
use crate::dynamics::{tangent_launch, trace_chords};
use crate::error::{Error, Result};
use crate::numeric::{from_f64, int, to_f64, Rational};

/// How a launch tangent to the caustic comes back after `n` bounces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureClass {
    /// Same position and direction.
    Strict,
    /// Same state up to a reflection in coordinate hyperplanes.
    Symmetric,
    Open,
    /// No tangent line could be launched.
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicCaustic {
    pub mu: f64,
    pub indicator: f64,
    /// Images of all caustic parameters in the Klein model.
    pub caustics: Vec<f64>,
    pub closure_residual: Option<f64>,
    pub symmetric_closure_residual: Option<f64>,
    pub closure: ClosureClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    pub grid: usize,
    pub accept: f64,
    pub closure_eps: f64,
    pub seed: u64,
    pub c: Rational,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { grid: 400, accept: 1e-10, closure_eps: 1e-6, seed: 0, c: int(1) }
    }
}

struct Indicator<'a> {
    a: &'a [f64],
    fixed: &'a [f64],
    n: usize,
}

impl Indicator<'_> {
    fn eval(&self, mu: f64) -> f64 {
        let mut all = self.fixed.to_vec();
        all.push(mu);
        period_indicator_f64(self.a, &all, self.n).unwrap_or(f64::INFINITY)
    }
}

impl CostFunction for Indicator<'_> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, mu: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.eval(*mu))
    }
}

/// Values of the free caustic parameter in `bracket` at which the rank
/// condition holds for period `n`, each re-checked by simulating a chord
/// billiard tangent to the image caustics. `fixed` holds the other `d − 2`
/// caustic parameters.
pub fn find_periodic_caustic(
    a: &[Rational],
    fixed: &[Rational],
    n: usize,
    bracket: (f64, f64),
    opts: &SearchOptions,
) -> Result<Vec<PeriodicCaustic>> {
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    let af: Vec<f64> = a.iter().map(to_f64).collect();
    let ff: Vec<f64> = fixed.iter().map(to_f64).collect();
    let d = af.len().saturating_sub(1);
    if d < 2 || ff.len() + 2 != d {
        return Err(Error::InvalidParameters("expected d+1 values of a and d-2 fixed caustic parameters".into()));
    }
    if n < d {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    let f = Indicator { a: &af, fixed: &ff, n };
    let scale = af[0];
    let excluded = |mu: f64| {
        mu.abs() < 1e-9 * scale || af.iter().chain(&ff).any(|r| (mu - r).abs() < 1e-9 * scale)
    };
    let m = opts.grid.max(3);
    let xs: Vec<f64> = (0..=m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| if excluded(x) { f64::INFINITY } else { f.eval(x) }).collect();
    let mut found: Vec<(f64, f64)> = Vec::new();
    for i in 1..m {
        if !(ys[i] <= ys[i - 1] && ys[i] <= ys[i + 1]) || !ys[i].is_finite() {
            continue;
        }
        let (mu, value) = refine(&f, xs[i - 1], xs[i + 1])?;
        if value < opts.accept && !excluded(mu) && !found.iter().any(|(r, _)| (r - mu).abs() < 1e-9 * scale) {
            found.push((mu, value));
        }
    }
    if found.is_empty() {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    found
        .into_iter()
        .map(|(mu, indicator)| {
            let mut all = ff.clone();
            all.push(mu);
            let (caustics, residuals) = match caustic_boundary(a, &all, &opts.c) {
                Ok((boundary, t)) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                    let r = closure_residuals(&boundary, &t, n, &mut rng).ok();
                    (t, r)
                }
                Err(_) => (Vec::new(), None),
            };
            let closure = match residuals {
                None => ClosureClass::Unverified,
                Some((s, _)) if s < opts.closure_eps => ClosureClass::Strict,
                Some((_, s)) if s < opts.closure_eps => ClosureClass::Symmetric,
                Some(_) => ClosureClass::Open,
            };
            Ok(PeriodicCaustic {
                mu,
                indicator,
                caustics,
                closure_residual: residuals.map(|r| r.0),
                symmetric_closure_residual: residuals.map(|r| r.1),
                closure,
            })
        })
        .collect()
}

fn refine(f: &Indicator<'_>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let solver = BrentOpt::new(lo, hi).set_tolerance(1e-15, 1e-300);
    let res = Executor::new(Indicator { a: f.a, fixed: f.fixed, n: f.n }, solver)
        .configure(|s| s.max_iters(500))
        .run()
        .map_err(|e| Error::Integration(format!("indicator minimization failed: {e}")))?;
    let mu = *res.state().get_best_param().ok_or_else(|| Error::Integration("no minimizer".into()))?;
    Ok((mu, f.eval(mu)))
}

/// Klein-model boundary and caustic parameters for the Minkowski data
/// `(a, μ)`, with the caustics given in floating point.
pub fn caustic_boundary(a: &[Rational], mu: &[f64], c: &Rational) -> Result<(BoundaryQuadric, Vec<f64>)> {
    let exact: Vec<Rational> = mu.iter().map(|&m| from_f64(m)).collect::<Result<_>>()?;
    let image = minkowski_to_klein(&MinkowskiEllipsoid::new(a.to_vec(), exact)?, c)?;
    let t = mu.iter().map(|&m| image.caustic_map.t_f64(m)).collect();
    Ok((image.boundary, t))
}

/// Strict and symmetric closure residuals after `n` bounces of a chord
/// billiard launched tangent to `caustics` from a random boundary point.
pub fn closure_residuals(
    boundary: &BoundaryQuadric,
    caustics: &[f64],
    n: usize,
    rng: &mut impl rand::Rng,
) -> Result<(f64, f64)> {
    let start = tangent_launch(boundary, caustics, rng)?;
    let traj = trace_chords(boundary, &start.x, &start.p, n)?;
    let strict = traj.closure_residual(n).expect("n bounces traced");
    let symmetric = traj.symmetric_closure_residual(n).expect("n bounces traced");
    Ok((strict, symmetric))
}
