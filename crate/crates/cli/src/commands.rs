//! Subcommand implementations. Each returns a report document, an exit code
//! and, for `simulate`, the trajectory CSV.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use symplie::cocycle::{closedness_probe, two_cocycle_check, xi_from_theta};
use symplie::dynamics::{Halt, Trajectory};
use symplie::gnh::{Constraint, GnhProblem, GnhReport, TangencyOutcome};
use symplie::observables::{chart_coordinates, jacobi_cyclic_sum, QuadraticObservable};
use symplie::symplectic::{degeneracy_tolerance, fundamental_bracket_table, s_bundle, PhaseSpaceForm, PhasePoint};
use symplie::{DualVector, Error};

use crate::scenario::Scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_DEGENERACY: i32 = 3;
pub const EXIT_BLOWUP: i32 = 4;

/// Jacobi triples sampled by `check`.
const CHECK_JACOBI_SAMPLES: usize = 10;
const CHECK_JACOBI_STEP: f64 = 2.5e-4;
const CHECK_JACOBI_TOL: f64 = 1e-8;
const CHECK_CLOSEDNESS_STEP: f64 = 1e-3;
const CHECK_CLOSEDNESS_TOL: f64 = 1e-7;

pub struct Outcome {
    pub report: Value,
    pub code: i32,
    pub csv: Option<String>,
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::DegeneratePoint { .. } => EXIT_DEGENERACY,
        Error::Numerical(_) => EXIT_BLOWUP,
        _ => EXIT_VALIDATION,
    }
}

fn status(code: i32, message: Option<String>) -> Value {
    let outcome = match code {
        EXIT_OK => "ok",
        EXIT_DEGENERACY => "degeneracy",
        EXIT_BLOWUP => "blow-up",
        _ => "error",
    };
    json!({ "code": code, "outcome": outcome, "message": message })
}

fn base(command: &str, sc: &Scenario) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("scenario".into(), sc.echo());
    m
}

/// Wraps a library failure into a report with the mapped exit code.
pub fn failure(command: &str, sc: &Scenario, e: &Error) -> Outcome {
    let code = exit_code_for(e);
    let mut m = base(command, sc);
    if let Error::DegeneratePoint { delta, tolerance, point } = e {
        m.insert("degenerate_point".into(), json!({ "delta": delta, "tolerance": tolerance, "point": point }));
    }
    m.insert("status".into(), status(code, Some(e.to_string())));
    Outcome { report: Value::Object(m), code, csv: None }
}

fn point_json(p: &PhasePoint<f64>, su2: bool) -> Value {
    let key = if su2 { "quaternion" } else { "coords" };
    json!({ key: p.g.coords(), "pi": p.pi_l.as_slice() })
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    json!((0..m.nrows()).map(|i| m.row(i).iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn vec_json(v: &DVector<f64>) -> Value {
    json!(v.as_slice())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn trajectory_csv(sc: &Scenario, tr: &Trajectory<f64>) -> String {
    let n = sc.group.dim();
    let mut header: Vec<String> = vec!["t".into()];
    if sc.group.is_su2() {
        header.extend(["q_w", "q_x", "q_y", "q_z"].map(String::from));
    } else {
        header.extend((1..=n).map(|i| format!("g_{i}")));
    }
    header.extend((1..=n).map(|i| format!("pi_{i}")));
    if tr.gamma.is_some() {
        header.extend((1..=n).map(|i| format!("gamma_{i}")));
    }
    if tr.pi_prime.is_some() {
        header.extend((1..=n).map(|i| format!("pi_prime_{i}")));
    }
    if tr.delta.is_some() {
        header.push("delta".into());
    }
    let mut out = header.join(",");
    out.push('\n');
    for (k, (t, p)) in tr.times.iter().zip(&tr.points).enumerate() {
        let mut row = vec![fmt(*t)];
        row.extend(p.g.coords().into_iter().map(fmt));
        row.extend(p.pi_l.as_slice().iter().copied().map(fmt));
        if let Some(g) = &tr.gamma {
            row.extend(g[k].as_slice().iter().copied().map(fmt));
        }
        if let Some(pp) = &tr.pi_prime {
            row.extend(pp[k].as_slice().iter().copied().map(fmt));
        }
        if let Some(d) = &tr.delta {
            row.push(fmt(d[k]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn simulate(sc: &Scenario) -> Outcome {
    let sys = sc.system();
    let tr = match sys.integrate(sc.mode, &sc.initial, &sc.integrator) {
        Ok(tr) => tr,
        Err(e) => return failure("simulate", sc, &e),
    };
    let mut m = base("simulate", sc);
    m.insert(
        "trajectory".into(),
        json!({
            "path": sc.trajectory_path,
            "mode": sc.mode.name(),
            "samples": tr.points.len(),
            "steps_taken": tr.steps_taken,
            "t_final": tr.times.last().copied(),
            "final_point": point_json(tr.last(), sc.group.is_su2()),
        }),
    );
    m.insert(
        "monitors".into(),
        json!(tr
            .monitors
            .iter()
            .map(|c| json!({ "name": c.name, "initial": c.initial, "max_drift": c.max_drift }))
            .collect::<Vec<_>>()),
    );
    let (code, events, blow_up, message) = match &tr.halt {
        None => (EXIT_OK, vec![], Value::Null, None),
        Some(Halt::Degeneracy(ev)) => (
            EXIT_DEGENERACY,
            vec![json!({
                "t_lo": ev.t_lo,
                "t_hi": ev.t_hi,
                "width": ev.t_hi - ev.t_lo,
                "delta_lo": ev.delta_lo,
                "delta_hi": ev.delta_hi,
                "indicator_lo": ev.indicator_lo,
                "indicator_hi": ev.indicator_hi,
                "tolerance": ev.tolerance,
            })],
            Value::Null,
            Some(format!("flow reached the degenerate set between t = {} and t = {}", ev.t_lo, ev.t_hi)),
        ),
        Some(Halt::BlowUp { t, last_good, reason }) => (
            EXIT_BLOWUP,
            vec![],
            json!({ "t": t, "last_good": point_json(last_good, sc.group.is_su2()), "reason": reason }),
            Some(format!("numerical blow-up at t = {t}: {reason}")),
        ),
    };
    m.insert("degeneracy_events".into(), json!(events));
    m.insert("blow_up".into(), blow_up);
    m.insert("status".into(), status(code, message));
    Outcome { report: Value::Object(m), code, csv: Some(trajectory_csv(sc, &tr)) }
}

fn coordinate_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("g{i}")).chain((1..=n).map(|i| format!("pi{i}"))).collect()
}

pub fn brackets(sc: &Scenario) -> Outcome {
    let sel = sc.natural_selector();
    let table = match fundamental_bracket_table(&sc.group, &sc.initial, &sel) {
        Ok(t) => t,
        Err(e) => return failure("brackets", sc, &e),
    };
    let mut m = base("brackets", sc);
    m.insert("structure".into(), json!(format!("{:?}", sel.mode()).to_lowercase()));
    m.insert("labels".into(), json!(coordinate_labels(sc.group.dim())));
    m.insert("table".into(), matrix_json(&table));
    m.insert("status".into(), status(EXIT_OK, None));
    Outcome { report: Value::Object(m), code: EXIT_OK, csv: None }
}

fn random_observable(rng: &mut ChaCha8Rng, dim: usize) -> QuadraticObservable<f64> {
    QuadraticObservable::new(
        rng.gen_range(-1.0..1.0),
        DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0)),
        DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0)),
    )
    .expect("square by construction")
}

pub fn check(sc: &Scenario) -> Outcome {
    let sel = sc.natural_selector();
    let (grp, p) = (&sc.group, &sc.initial);
    let bundle = match s_bundle(grp, p, &sel) {
        Ok(b) => b,
        Err(e) => return failure("check", sc, &e),
    };
    let tol = degeneracy_tolerance(&bundle.s, sel.upsilon());
    if bundle.delta.abs() <= tol {
        let e = Error::DegeneratePoint { delta: bundle.delta, tolerance: tol, point: p.flat() };
        return failure("check", sc, &e);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let dim = 2 * grp.dim();
    let mut sums = Vec::with_capacity(CHECK_JACOBI_SAMPLES);
    for _ in 0..CHECK_JACOBI_SAMPLES {
        let obs: Vec<_> = (0..3).map(|_| random_observable(&mut rng, dim)).collect();
        match jacobi_cyclic_sum(grp, p, &sel, [&obs[0], &obs[1], &obs[2]], CHECK_JACOBI_STEP) {
            Ok(s) => sums.push(s),
            Err(e) => return failure("check", sc, &e),
        }
    }
    let jacobi_max = sums.iter().fold(0.0f64, |m, s| m.max(s.abs()));

    let cocycle = match two_cocycle_check(grp.algebra(), &sel.theta().matrix()) {
        Ok(c) => c,
        Err(e) => return failure("check", sc, &e),
    };

    let closedness = match (PhaseSpaceForm::new(grp.clone(), sel.clone()), chart_coordinates(grp, p)) {
        (Ok(form), Ok(x)) => match closedness_probe(&form, &x, CHECK_CLOSEDNESS_STEP) {
            Ok(r) => json!({ "residual": r, "step": CHECK_CLOSEDNESS_STEP, "passes": r < CHECK_CLOSEDNESS_TOL }),
            Err(e) => json!({ "skipped": e.to_string() }),
        },
        (Err(e), _) | (_, Err(e)) => json!({ "skipped": e.to_string() }),
    };

    let xi = if sel.theta().is_zero() {
        Some(DualVector::zeros(grp.dim()))
    } else {
        xi_from_theta(grp.algebra(), sel.theta()).ok()
    };
    let (worst_a, worst_b, worst_c) = cocycle.worst;
    let mut m = base("check", sc);
    m.insert("structure".into(), json!(format!("{:?}", sel.mode()).to_lowercase()));
    m.insert(
        "jacobi".into(),
        json!({
            "samples": CHECK_JACOBI_SAMPLES,
            "step": CHECK_JACOBI_STEP,
            "values": sums,
            "max_abs": jacobi_max,
            "passes": jacobi_max < CHECK_JACOBI_TOL,
        }),
    );
    m.insert(
        "cocycle".into(),
        json!({
            "residual": cocycle.residual,
            "worst_triple": [worst_a + 1, worst_b + 1, worst_c + 1],
            "passes": cocycle.passes,
            "xi": xi.map(|x| x.as_slice().to_vec()),
        }),
    );
    m.insert("delta".into(), json!({ "value": bundle.delta, "tolerance": tol, "degenerate": false }));
    m.insert("closedness".into(), closedness);
    m.insert("status".into(), status(EXIT_OK, None));
    Outcome { report: Value::Object(m), code: EXIT_OK, csv: None }
}

fn constraint_json(c: &Constraint<f64>) -> Value {
    match c {
        Constraint::Tertiary { weights } => json!({ "name": c.name(), "weights": weights }),
        _ => json!({ "name": c.name() }),
    }
}

fn gnh_json(r: &GnhReport<f64>) -> Value {
    let strata: Vec<Value> = r
        .strata
        .iter()
        .map(|s| {
            json!({
                "level": s.level,
                "constraints": s.constraints.iter().map(constraint_json).collect::<Vec<_>>(),
                "dimension": s.dimension,
                "equals_previous": s.equals_previous,
                "point": point_json(&s.point, true),
                "residuals": s.residuals,
            })
        })
        .collect();
    let general = r.general_solution.as_ref().map(|g| {
        json!({
            "point": point_json(&g.point, true),
            "particular": vec_json(&g.particular),
            "gauge": [vec_json(&g.gauge[0]), vec_json(&g.gauge[1])],
            "c23": g.c23,
        })
    });
    let tangency = r.tangency.as_ref().map(|t| {
        let outcome = match &t.outcome {
            TangencyOutcome::Determined { zeta } => json!({ "kind": "determined", "zeta": zeta }),
            TangencyOutcome::Underdetermined { gauge_dimension, zeta } => {
                json!({ "kind": "underdetermined", "gauge_dimension": gauge_dimension, "zeta": zeta })
            }
            TangencyOutcome::Tertiary { constraints } => json!({
                "kind": "tertiary",
                "constraints": constraints.iter().map(|c| json!({ "weights": c.weights, "value": c.value })).collect::<Vec<_>>(),
            }),
        };
        json!({
            "system": matrix_json(&t.system),
            "rhs": vec_json(&t.rhs),
            "singular_values": t.singular_values,
            "rank": t.rank,
            "outcome": outcome,
            "near_threshold": t.near_threshold,
        })
    });
    json!({
        "rotation": matrix_json(&r.rotation),
        "tau": r.tau,
        "m2_equals_m1": r.m2_equals_m1(),
        "strata": strata,
        "general_solution": general,
        "tangency": tangency,
        "gauge_dimension": r.gauge_dimension,
        "notice": r.notice,
        "warnings": r.warnings,
    })
}

pub fn gnh(sc: &Scenario) -> Outcome {
    let run = || -> symplie::Result<GnhReport<f64>> {
        if !sc.group.is_su2() {
            return Err(Error::Unsupported("the constraint analysis is implemented for su2 only".into()));
        }
        let tau = sc
            .upsilon
            .tau()
            .filter(|t| t.norm() > 0.0)
            .ok_or_else(|| Error::InvalidArgument("gnh needs a nonzero tau (or upsilon)".into()))?;
        let xi = if sc.theta.is_zero() {
            DualVector::zeros(3)
        } else {
            xi_from_theta(sc.group.algebra(), &sc.theta)?
        };
        GnhProblem::new(&sc.inertia, &sc.potential, &xi, &tau)?.run(&sc.initial)
    };
    match run() {
        Ok(r) => {
            let mut m = base("gnh", sc);
            m.insert("gnh".into(), gnh_json(&r));
            m.insert("status".into(), status(EXIT_OK, r.notice.clone()));
            Outcome { report: Value::Object(m), code: EXIT_OK, csv: None }
        }
        Err(e) => failure("gnh", sc, &e),
    }
}
