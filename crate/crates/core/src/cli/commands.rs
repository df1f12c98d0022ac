use nalgebra::DVector;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::scenario::{Request, Scenario, SimMetric};
use super::{Report, SCHEMA};
use crate::cayley::{
    cayley_condition, cayley_condition_normalized, find_periodic_caustic, period_indicator, Degeneracy, SearchOptions,
};
use crate::confocal::{
    from_elliptic, line_caustics, line_caustics_exact, to_elliptic, BoundaryQuadric, ConfocalFamily, EllipticCoords,
    MinkowskiEllipsoid,
};
use crate::dynamics::{compare_models, tangent_launch, trace_chords, trace_chords_in, trace_hyperbolic_geodesics, Trajectory};
use crate::error::{Error, Result};
use crate::hierarchy::{hierarchy_check, render_rows, HierarchyMetric};
use crate::numeric::{fmt_rational, int, Number, Rational};
use crate::potentials::{
    basis_potential, catalog_potential, is_separable, recurrence_check, separability_residual, BasisKind, BasisSpec,
    LaurentPolynomial,
};

/// Thresholds applied by `hierarchy-check`.
pub const INVOLUTION_LIMIT: f64 = 1e-8;
pub const DRIFT_LIMIT: f64 = 1e-6;
pub const REFLECTION_LIMIT: f64 = 1e-10;
pub const INDEPENDENCE_FLOOR: f64 = 1e-8;
/// Bounce-point agreement required by `compare-models`.
pub const MODEL_AGREEMENT: f64 = 1e-6;

fn rationals(v: &[Number]) -> Result<Vec<Rational>> {
    v.iter().map(Number::to_rational).collect()
}

fn family(b: &[Number]) -> Result<ConfocalFamily> {
    ConfocalFamily::new(rationals(b)?)
}

fn boundary(b: &[Number], c: &Option<Number>) -> Result<BoundaryQuadric> {
    let fam = family(b)?;
    let c = match c {
        Some(c) => c.to_rational()?,
        None => fam.b()[fam.dim() - 1].clone() / int(2),
    };
    BoundaryQuadric::new(fam, c)
}

fn vector(v: &[f64], d: usize, key: &str) -> Result<DVector<f64>> {
    if v.len() != d {
        return Err(Error::BadParameter { key: key.into(), expected: format!("{d} entries") });
    }
    Ok(DVector::from_column_slice(v))
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}

/// Runs a validated scenario.
pub fn execute(s: &Scenario) -> Result<Report> {
    let (result, table) = match &s.request {
        Request::Cayley { a, mu, n } => (cayley(a, mu, *n)?, None),
        Request::ScanPeriods { a, n, bracket, fixed, grid, c, eps } => {
            let opts = SearchOptions { grid: *grid, accept: 1e-10, closure_eps: *eps, seed: s.seed, c: c.to_rational()? };
            let roots = find_periodic_caustic(&rationals(a)?, &rationals(fixed)?, *n, *bracket, &opts)?;
            let mut table = String::from("mu,indicator,closure_residual,symmetric_closure_residual,closure\n");
            for r in &roots {
                let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.17e}"));
                table.push_str(&format!(
                    "{:.17e},{:.17e},{},{},{}\n",
                    r.mu,
                    r.indicator,
                    opt(r.closure_residual),
                    opt(r.symmetric_closure_residual),
                    serde_json::to_value(r.closure)?.as_str().unwrap_or_default()
                ));
            }
            let result = json!({
                "roots": roots,
                "accept": opts.accept,
                "closure_eps": opts.closure_eps,
                "arithmetic": { "indicator": "float", "closure": "float" },
            });
            (result, Some(table))
        }
        Request::Caustics { b, x, v } => (caustics(b, x, v)?, None),
        Request::Elliptic { b, x, lambda, signs } => (elliptic(b, x.as_deref(), lambda.as_deref(), signs)?, None),
        Request::Simulate { b, c, start, dir, caustic, bounces, closure, metric, tol } => {
            let bd = boundary(b, c)?;
            let d = bd.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            let (x0, v0) = match (start, caustic) {
                (Some(x), _) => (vector(x, d, "start")?, vector(dir.as_deref().unwrap_or_default(), d, "dir")?),
                (None, Some(t)) => {
                    let launch = tangent_launch(&bd, t, &mut rng)?;
                    (launch.x, launch.p)
                }
                (None, None) => unreachable!("validated"),
            };
            let traj = simulate(&bd, *metric, &x0, &v0, *bounces, *tol)?;
            let result = json!({
                "boundary": { "b": strings(bd.family().b()), "c": fmt_rational(bd.c()) },
                "launch": { "x": x0.as_slice(), "v": v0.as_slice() },
                "summary": traj.summary(*closure),
                "arithmetic": { "trajectory": "float" },
            });
            (result, Some(traj.table()))
        }
        Request::CompareModels { b, c, start, dir, bounces, tol } => {
            let bd = boundary(b, c)?;
            let d = bd.dim();
            let (x0, v0) = (vector(start, d, "start")?, vector(dir, d, "dir")?);
            model_comparison(&bd, &x0, &v0, *bounces, *tol)?
        }
        Request::HierarchyCheck { b, ks, sizes } => {
            let fam = family(b)?;
            let rows = ks.iter().map(|&k| hierarchy_check(&fam, k, sizes, s.seed)).collect::<Result<Vec<_>>>()?;
            let checks: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "row": r,
                        "pass": {
                            "involution": r.involution < INVOLUTION_LIMIT,
                            "conservation": r.conservation_drift < DRIFT_LIMIT,
                            "reflection": r.reflection_residual < REFLECTION_LIMIT,
                            "independence": r.independence > INDEPENDENCE_FLOOR,
                        }
                    })
                })
                .collect();
            let result = json!({
                "thresholds": {
                    "involution": INVOLUTION_LIMIT,
                    "conservation_drift": DRIFT_LIMIT,
                    "reflection_residual": REFLECTION_LIMIT,
                    "independence": INDEPENDENCE_FLOOR,
                },
                "sizes": {
                    "states": sizes.states,
                    "boundary_states": sizes.boundary_states,
                    "geodesics": sizes.geodesics,
                    "t_end": sizes.t_end,
                    "tol": sizes.tol,
                },
                "checks": checks,
                "arithmetic": { "residuals": "float" },
            });
            (result, Some(render_rows(&rows)))
        }
        Request::Potential { basis, file, b, export } => {
            potential(*basis, file.as_deref(), b, export.as_deref())?
        }
    };
    let mut body = Map::new();
    body.insert("schema".into(), json!(SCHEMA));
    body.insert("command".into(), json!(s.command.name()));
    body.insert("mode".into(), serde_json::to_value(s.mode)?);
    body.insert("seed".into(), json!(s.seed));
    body.insert("params".into(), serde_json::to_value(&s.params)?);
    body.insert("result".into(), result);
    Ok(Report { command: s.command, body: Value::Object(body), table })
}

fn cayley(a: &[Number], mu: &[Number], n: usize) -> Result<Value> {
    let e = MinkowskiEllipsoid::new(rationals(a)?, rationals(mu)?)?;
    let verdict = cayley_condition(&e, n)?;
    let normalized = match verdict.degeneracy {
        Degeneracy::CaseIi | Degeneracy::CaseIii if verdict.double_points.len() == 1 => {
            Some(cayley_condition_normalized(&e, n)?)
        }
        _ => None,
    };
    let indicator = if n >= e.dim() && verdict.degeneracy == Degeneracy::None { Some(period_indicator(&e, n)?) } else { None };
    Ok(json!({
        "periodic": verdict.periodic,
        "reason": verdict.reason,
        "verdict": verdict,
        "normalized_route": normalized,
        "indicator": indicator,
        "arithmetic": { "verdict": "exact", "indicator": "float" },
    }))
}

fn caustics(b: &[Number], x: &[Number], v: &[Number]) -> Result<Value> {
    let fam = family(b)?;
    let d = fam.dim();
    if x.len() != d || v.len() != d {
        return Err(Error::BadParameter { key: "x".into(), expected: format!("point and direction with {d} entries") });
    }
    let xf: Vec<f64> = x.iter().map(Number::to_f64).collect();
    let vf: Vec<f64> = v.iter().map(Number::to_f64).collect();
    let set = line_caustics(&fam, &DVector::from_vec(xf), &DVector::from_vec(vf))?;
    let exact = x.iter().chain(v).chain(b).all(Number::is_exact);
    let polynomial = if exact {
        let (q, flags) = line_caustics_exact(&fam, &rationals(x)?, &rationals(v)?)?;
        Some(json!({ "coefficients": strings(q.coeffs()), "family_roots": flags }))
    } else {
        None
    };
    Ok(json!({
        "params": set.params,
        "degenerate": set.degenerate,
        "polynomial": polynomial,
        "arithmetic": { "polynomial": if exact { "exact" } else { "float" }, "params": "float" },
    }))
}

fn elliptic(b: &[Number], x: Option<&[Number]>, lambda: Option<&[f64]>, signs: &[bool]) -> Result<Value> {
    let fam = family(b)?;
    let d = fam.dim();
    match (x, lambda) {
        (Some(x), _) => {
            let xf = DVector::from_iterator(x.len(), x.iter().map(Number::to_f64));
            let l = to_elliptic(&fam, &vector(xf.as_slice(), d, "x")?)?;
            Ok(json!({ "lambda": l.lambda, "arithmetic": { "lambda": "float" } }))
        }
        (None, Some(l)) => {
            let signs = if signs.is_empty() { vec![true; d] } else { signs.to_vec() };
            if signs.len() != d || l.len() != d {
                return Err(Error::BadParameter { key: "lambda".into(), expected: format!("{d} coordinates and signs") });
            }
            let xv = from_elliptic(&fam, &EllipticCoords::new(l.to_vec()), &signs)?;
            Ok(json!({ "x": xv.as_slice(), "arithmetic": { "x": "float" } }))
        }
        (None, None) => unreachable!("validated"),
    }
}

fn simulate(bd: &BoundaryQuadric, metric: SimMetric, x0: &DVector<f64>, v0: &DVector<f64>, n: usize, tol: f64) -> Result<Trajectory> {
    match metric {
        SimMetric::Euclidean => trace_chords(bd, x0, v0, n),
        SimMetric::Hyperbolic => trace_chords_in(bd, &HierarchyMetric::hyperbolic(bd.family().clone()), x0, v0, n),
        SimMetric::HyperbolicOde => trace_hyperbolic_geodesics(bd, x0, v0, n, tol),
    }
}

fn model_comparison(bd: &BoundaryQuadric, x0: &DVector<f64>, v0: &DVector<f64>, n: usize, tol: f64) -> Result<(Value, Option<String>)> {
    let cmp = compare_models(bd, x0, v0, n, tol)?;
    let mut table = String::from("index,point_deviation,direction_deviation\n");
    for (i, (dp, dv)) in cmp.deviations.iter().enumerate() {
        table.push_str(&format!("{},{dp:.17e},{dv:.17e}\n", i + 1));
    }
    let agree = cmp.max_point_deviation < MODEL_AGREEMENT && cmp.max_direction_deviation < MODEL_AGREEMENT;
    let mut result = serde_json::to_value(&cmp)?;
    result["threshold"] = json!(MODEL_AGREEMENT);
    result["agree"] = json!(agree);
    result["arithmetic"] = json!({ "trajectories": "float" });
    Ok((result, Some(table)))
}

/// Closed-form template of a basis element, in the notation of the rendered
/// polynomials (`i` is the pole axis).
fn template(spec: BasisSpec) -> String {
    match (spec.kind, spec.k) {
        (BasisKind::V, 1) => "sum_j x_j^2".into(),
        (BasisKind::V, 2) => "sum_j b_j x_j^2 - (sum_j x_j^2)^2".into(),
        (BasisKind::V, 3) => "sum_j b_j^2 x_j^2 - 2 (sum_j x_j^2)(sum_j b_j x_j^2) + (sum_j x_j^2)^3".into(),
        (BasisKind::V, k) => format!("-[s^{k}] 1/(1 + s sum_j x_j^2/(1 - s b_j))"),
        (BasisKind::W, 1) => "x_i^-2".into(),
        (BasisKind::W, 2) => "x_i^-4 (1 + sum_{j!=i} x_j^2/(b_i - b_j))".into(),
        (BasisKind::W, 3) => "x_i^-6 (1 + 2 sum_{j!=i} x_j^2/(b_i - b_j) + x_i^2 sum_{j!=i} x_j^2/(b_i - b_j)^2 \
                              + sum_{j,l!=i} x_j^2 x_l^2/((b_i - b_j)(b_i - b_l)))"
            .into(),
        (BasisKind::W, k) => format!("x_i^-{} P(x), P polynomial of degree {} with P = 1 on the x_i axis", 2 * k, 2 * (k - 1)),
    }
}

fn potential(
    basis: Option<BasisSpec>,
    file: Option<&std::path::Path>,
    b: &[Number],
    export: Option<&std::path::Path>,
) -> Result<(Value, Option<String>)> {
    let fam = family(b)?;
    let d = fam.dim();
    let v = match (basis, file) {
        (Some(spec), _) => basis_potential(spec, &fam)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let (p, width) = LaurentPolynomial::from_text(&text)?;
            if width > d {
                return Err(Error::BadParameter { key: "file".into(), expected: format!("at most {d} exponent columns") });
            }
            p
        }
        (None, None) => unreachable!("validated"),
    };
    if let Some(path) = export {
        std::fs::write(path, v.to_text(d)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let residuals = separability_residual(&v, &fam);
    let separable = is_separable(&v, &fam);
    let nonzero: Vec<Value> = residuals
        .iter()
        .filter(|r| !r.residual.is_zero())
        .map(|r| json!({ "i": r.i + 1, "j": r.j + 1, "residual": r.residual.render() }))
        .collect();
    let matches_catalog = match basis {
        Some(spec) if spec.k <= 3 => Some(catalog_potential(spec, &fam)? == v),
        _ => None,
    };
    let result = json!({
        "basis": basis.map(|s| s.to_string()),
        "b": strings(fam.b()),
        "closed_form": basis.map(template),
        "expanded": v.render(),
        "terms": v.len(),
        "separable": separable,
        "residual_status": if separable { "zero (exact)" } else { "nonzero (exact)" },
        "nonzero_residuals": nonzero,
        "recurrence": recurrence_check(&v, &fam),
        "matches_catalog": matches_catalog,
        "arithmetic": { "residual": "exact", "recurrence": "exact" },
    });
    Ok((result, Some(v.to_text(d))))
}
