use crate::input::{parse_link, InputError, Inputs};
use crate::report::Status;
use propinquity_core::algebra::Algebra;
use propinquity_core::audit::{self, CriterionResult, BATTERY_EPSILONS};
use propinquity_core::classical::{classical_gh_exact, lipnorm_from_metric, FiniteMetricSpace};
use propinquity_core::fixtures::{default_spaces, lipnormed};
use propinquity_core::io;
use propinquity_core::lipnorm::{check_leibniz, check_lipnorm_axioms, PolyhedralLipNorm};
use propinquity_core::lp::LpScalar;
use propinquity_core::propinquity::{
    enumerate_links, link_maps, propinquity_upper_bound_cached, SearchCache, TunnelFamilySpec,
};
use propinquity_core::states::{mk_distance, Mode, State};
use propinquity_core::tunnels::{
    bridge_tunnel, compose_tunnels, tunnel_quantities, validate_tunnel, DEFAULT_SPANNING_EXTRA,
};
use propinquity_core::Error;
use serde_json::{json, Map, Value};
use std::path::Path;
use std::sync::Arc;

const LEIBNIZ_TRIALS: usize = 200;
/// Bridges the inequality battery must contain.
const MIN_BRIDGES: usize = 50;
const COMPOSITION_PAIRS: usize = 100;
const EMBEDDING_PAIRS: usize = 200;
const SOLVER_PROGRAMS: usize = 200;

/// Settings shared by all commands.
pub struct Context {
    pub seed: u64,
    pub tolerance: f64,
    pub spec: TunnelFamilySpec,
    pub size_cap: usize,
    pub inputs: Inputs,
}

pub struct Outcome {
    pub status: Status,
    pub result: Value,
}

impl Outcome {
    fn new(passed: bool, result: Value) -> Self {
        Self { status: if passed { Status::Pass } else { Status::Fail }, result }
    }
}

type Run = Result<Outcome, InputError>;

fn at(path: &Path) -> impl Fn(Error) -> InputError + '_ {
    move |e| InputError::at(path, e.to_string())
}

fn computation(e: Error) -> InputError {
    InputError::new(e.to_string())
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn mode(m: Mode) -> Value {
    Value::from(m.as_str())
}

pub fn validate(ctx: &mut Context, path: &Path) -> Run {
    let doc = ctx.inputs.document(path)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("X").to_string();
    let mut out = Map::new();
    let mut passed = true;
    let mut algebra: Option<Arc<Algebra>> = None;
    let mut lipnorm: Option<PolyhedralLipNorm> = None;

    if let Some(a) = &doc.algebra {
        let a = io::algebra_from_json(a).map_err(at(path))?;
        out.insert(
            "algebra".into(),
            json!({"label": a.label(), "blocks": a.blocks(), "dim": a.dim(), "commutative": a.is_commutative()}),
        );
        algebra = Some(a);
    }
    if let Some(s) = &doc.space {
        let space = io::space_from_json(s, &stem).map_err(at(path))?;
        let l = lipnorm_from_metric(&space).map_err(at(path))?;
        out.insert(
            "space".into(),
            json!({"label": space.label(), "points": space.points(), "diameter": space.diameter(), "mode": "exact"}),
        );
        algebra.get_or_insert_with(|| l.algebra().clone());
        lipnorm = Some(l);
    }
    if let Some(lj) = &doc.lipnorm {
        let alg = algebra.as_ref().ok_or_else(|| InputError::at(path, "a `lipnorm` needs an `algebra`"))?;
        lipnorm = Some(io::lipnorm_from_json(alg, lj).map_err(at(path))?);
    }
    if let Some(l) = &lipnorm {
        let axioms = check_lipnorm_axioms(l);
        let leibniz = check_leibniz(l, LEIBNIZ_TRIALS, ctx.seed);
        passed &= axioms.passed && leibniz.passed;
        out.insert(
            "lipnorm".into(),
            json!({
                "functionals": l.functionals().len(),
                "axioms": to_value(&axioms),
                "leibniz": to_value(&leibniz),
                "mode": "exact",
            }),
        );
    }
    let mut states: Vec<(String, &io::StateJson)> = Vec::new();
    if let Some(s) = &doc.state {
        states.push(("state".into(), s));
    }
    for (name, s) in doc.states.iter().flatten() {
        states.push((name.clone(), s));
    }
    if !states.is_empty() {
        let alg = algebra.as_ref().ok_or_else(|| InputError::at(path, "states need an `algebra` or a `space`"))?;
        let mut report = Map::new();
        for (name, s) in states {
            let entry = match io::state_from_json(alg, s) {
                Ok(_) => json!({"passed": true}),
                Err(e) => {
                    passed = false;
                    json!({"passed": false, "error": e.to_string()})
                }
            };
            report.insert(name, entry);
        }
        out.insert("states".into(), Value::Object(report));
    }
    if let Some(tj) = &doc.tunnel {
        let t = io::tunnel_from_json(tj).map_err(at(path))?;
        let report = validate_tunnel(&t, DEFAULT_SPANNING_EXTRA);
        passed &= report.passed;
        let mut v = to_value(&report);
        v["mode"] = mode(t.mode());
        out.insert("tunnel".into(), v);
    }
    if out.is_empty() {
        return Err(InputError::at(path, "nothing to validate"));
    }
    Ok(Outcome::new(passed, Value::Object(out)))
}

fn named_state(
    doc: &io::Document,
    alg: &Arc<Algebra>,
    space: Option<&FiniteMetricSpace>,
    name: &str,
    path: &Path,
) -> Result<State, InputError> {
    if let Some(x) = space {
        let i = x.index_of(name).ok_or_else(|| InputError::at(path, format!("no point `{name}`")))?;
        return State::dirac(alg, i).map_err(at(path));
    }
    let s = doc
        .states
        .as_ref()
        .and_then(|m| m.get(name))
        .ok_or_else(|| InputError::at(path, format!("no state `{name}`")))?;
    io::state_from_json(alg, s).map_err(at(path))
}

pub fn mk_dist(ctx: &mut Context, path: &Path, from: &str, to: &str) -> Run {
    let doc = ctx.inputs.document(path)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("X").to_string();
    let (l, space) = if let Some(s) = &doc.space {
        let space = io::space_from_json(s, &stem).map_err(at(path))?;
        (lipnorm_from_metric(&space).map_err(at(path))?, Some(space))
    } else {
        match (&doc.algebra, &doc.lipnorm) {
            (Some(a), Some(lj)) => {
                let alg = io::algebra_from_json(a).map_err(at(path))?;
                (io::lipnorm_from_json(&alg, lj).map_err(at(path))?, None)
            }
            _ => return Err(InputError::at(path, "expected a `space`, or an `algebra` with a `lipnorm`")),
        }
    };
    let alg = l.algebra().clone();
    let phi = named_state(&doc, &alg, space.as_ref(), from, path)?;
    let psi = named_state(&doc, &alg, space.as_ref(), to, path)?;
    let value = mk_distance(&l, &phi, &psi).map_err(computation)?;
    Ok(Outcome::new(true, json!({"from": from, "to": to, "value": value, "mode": "exact"})))
}

fn default_link(a: &Algebra, b: &Algebra) -> Option<Vec<(usize, usize)>> {
    let links = enumerate_links(a, b);
    let widest = links.iter().map(Vec::len).max()?;
    links.into_iter().find(|l| l.len() == widest)
}

pub fn tunnel(ctx: &mut Context, pa: &Path, pb: &Path, epsilon: f64, link: Option<&str>) -> Run {
    let a = ctx.inputs.endpoint(pa)?.lipnorm;
    let b = ctx.inputs.endpoint(pb)?.lipnorm;
    let (alg_a, alg_b) = (a.algebra(), b.algebra());
    let link = match link {
        Some(text) => parse_link(text).map_err(InputError::new)?,
        None => default_link(alg_a, alg_b)
            .ok_or_else(|| InputError::new("no block of the first algebra matches a block of the second"))?,
    };
    for &(i, j) in &link {
        if i >= alg_a.num_blocks() || j >= alg_b.num_blocks() || alg_a.blocks()[i] != alg_b.blocks()[j] {
            return Err(InputError::new(format!("link pair {i}:{j} does not match blocks of equal size")));
        }
    }
    let (p, q) = link_maps(alg_a, alg_b, &link).map_err(computation)?;
    let link_json: Vec<[usize; 2]> = link.iter().map(|&(i, j)| [i, j]).collect();
    match bridge_tunnel(&a, &b, &p, &q, epsilon) {
        Ok(t) => {
            let quantities = tunnel_quantities(&t).map_err(computation)?;
            Ok(Outcome::new(
                true,
                json!({
                    "epsilon": epsilon,
                    "link": link_json,
                    "tunnel": to_value(&io::tunnel_to_json(&t)),
                    "quantities": to_value(&quantities),
                    "mode": mode(quantities.mode),
                }),
            ))
        }
        Err(Error::BridgeConditionViolated { leg, gap, witness }) => Ok(Outcome::new(
            false,
            json!({
                "epsilon": epsilon,
                "link": link_json,
                "violation": {"leg": leg.to_string(), "gap": gap, "witness": witness},
                "mode": "exact",
            }),
        )),
        Err(e) => Err(computation(e)),
    }
}

pub fn compose(ctx: &mut Context, p1: &Path, p2: &Path, epsilon: f64) -> Run {
    let t1 = ctx.inputs.tunnel(p1)?;
    let t2 = ctx.inputs.tunnel(p2)?;
    let t = compose_tunnels(&t1, &t2, epsilon).map_err(computation)?;
    let q1 = tunnel_quantities(&t1).map_err(computation)?;
    let q2 = tunnel_quantities(&t2).map_err(computation)?;
    let q = tunnel_quantities(&t).map_err(computation)?;
    let cap = q1.extent + q2.extent + epsilon;
    let bound_ok = q.extent <= cap + ctx.tolerance;
    let validation = validate_tunnel(&t, DEFAULT_SPANNING_EXTRA);
    Ok(Outcome::new(
        bound_ok && validation.passed,
        json!({
            "epsilon": epsilon,
            "tunnel": to_value(&io::tunnel_to_json(&t)),
            "quantities": to_value(&q),
            "extent_bound": {
                "first": q1.extent,
                "second": q2.extent,
                "bound": cap,
                "margin": cap - q.extent,
                "passed": bound_ok,
            },
            "validation": to_value(&validation),
            "mode": mode(q.mode.combine(q1.mode).combine(q2.mode)),
        }),
    ))
}

fn gh_value(x: &FiniteMetricSpace, y: &FiniteMetricSpace, cap: usize) -> Result<Value, Error> {
    let gh = classical_gh_exact(x, y, cap)?;
    Ok(json!({"value": gh.as_f64(), "exact": gh.to_string(), "mode": "exact"}))
}

pub fn propinquity(ctx: &mut Context, pa: &Path, pb: &Path) -> Run {
    let a = ctx.inputs.endpoint(pa)?;
    let b = ctx.inputs.endpoint(pb)?;
    let r =
        propinquity_upper_bound_cached(&a.lipnorm, &b.lipnorm, &ctx.spec, &SearchCache::new()).map_err(computation)?;
    let mut passed = true;
    let lower = match (&a.space, &b.space) {
        (Some(x), Some(y)) => match gh_value(x, y, ctx.size_cap) {
            Ok(mut gh) => {
                let margin = r.bound - gh["value"].as_f64().unwrap_or(f64::NAN);
                passed = margin >= -ctx.tolerance;
                gh["margin"] = margin.into();
                gh
            }
            Err(Error::SizeCap(msg)) => json!({"skipped": msg}),
            Err(e) => return Err(computation(e)),
        },
        _ => Value::Null,
    };
    let mut result = json!({
        "pair": r.pair,
        "bound": r.bound,
        "mode": mode(r.mode),
        "witness": to_value(&io::tunnel_to_json(&r.witness)),
        "quantities": to_value(&r.quantities),
        "candidates": r.candidates,
        "family": to_value(&r.family),
    });
    if !lower.is_null() {
        result["gh_lower_bound"] = lower;
    }
    Ok(Outcome::new(passed, result))
}

pub fn gh(ctx: &mut Context, px: &Path, py: &Path) -> Run {
    let x = ctx.inputs.space(px)?;
    let y = ctx.inputs.space(py)?;
    let mut v = gh_value(&x, &y, ctx.size_cap).map_err(computation)?;
    v["pair"] = json!([x.label(), y.label()]);
    Ok(Outcome::new(true, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Inequalities,
    Classical,
    Solver,
    All,
}

fn fixtures(ctx: &mut Context, which: &str) -> Result<Vec<FiniteMetricSpace>, InputError> {
    if which == "default" {
        return Ok(default_spaces());
    }
    which.split(',').map(|p| ctx.inputs.space(Path::new(p.trim()))).collect()
}

pub fn audit(ctx: &mut Context, suite: Suite, which: &str) -> Run {
    let spaces = fixtures(ctx, which)?;
    let seed = ctx.seed;
    let cache = SearchCache::new();
    let inequalities = matches!(suite, Suite::Inequalities | Suite::All);
    let classical = matches!(suite, Suite::Classical | Suite::All);
    let mut criteria: Vec<CriterionResult> = Vec::new();
    if inequalities {
        let lipnorms: Vec<_> = spaces.iter().map(lipnormed).collect();
        let battery = audit::build_battery(&lipnorms, &BATTERY_EPSILONS).map_err(computation)?;
        criteria.push(audit::criterion_equivalence(&battery, MIN_BRIDGES));
        criteria.push(audit::criterion_composition(&battery, COMPOSITION_PAIRS, seed));
        criteria.push(audit::criterion_isometric_embedding(&battery, EMBEDDING_PAIRS, seed));
        criteria.push(audit::criterion_quotient_recovery(&battery));
        criteria.push(audit::criterion_triangle(&ctx.spec, &cache));
    }
    if inequalities || classical {
        let bounds = audit::fixture_bounds(&spaces, &ctx.spec, &cache).map_err(computation)?;
        if inequalities {
            criteria.push(audit::criterion_diameter(&bounds));
            criteria.push(audit::criterion_metric_axioms(&bounds));
        }
        if classical {
            criteria.push(audit::criterion_classical(&spaces, &bounds));
        }
    }
    if matches!(suite, Suite::Solver | Suite::All) {
        criteria.push(audit::criterion_solver(SOLVER_PROGRAMS, seed));
    }
    for c in &criteria {
        eprintln!("{}", c.summary_line());
    }
    let passed = criteria.iter().all(|c| c.passed);
    let labels: Vec<&str> = spaces.iter().map(FiniteMetricSpace::label).collect();
    Ok(Outcome::new(passed, json!({"fixtures": labels, "criteria": to_value(&criteria)})))
}
