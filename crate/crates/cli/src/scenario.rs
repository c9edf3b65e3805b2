//! Scenario documents: parsing, defaults and validation.

use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::{json, Value};
use symplie::cocycle::{theta_from_xi, TwoCocycle, UpsilonField};
use symplie::dynamics::{FlowMode, InertiaTensor, IntegratorConfig, PotentialSpec, System};
use symplie::symplectic::{PhasePoint, StructureMode, StructureSelector};
use symplie::{AlgebraVector, DualVector, GroupElement, LieGroup, StructureConstants};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 1.0;
pub const DEFAULT_TRAJECTORY: &str = "trajectory.csv";
pub const DEFAULT_REPORT: &str = "report.json";
/// Allowed deviation of the initial quaternion from unit norm.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    group: Option<Value>,
    inertia: Option<Value>,
    xi: Option<Vec<f64>>,
    theta: Option<Vec<Vec<f64>>>,
    tau: Option<Vec<f64>>,
    upsilon: Option<Vec<Vec<f64>>>,
    potential: Option<Value>,
    mode: Option<String>,
    initial: Option<RawInitial>,
    integrator: Option<RawIntegrator>,
    outputs: Option<RawOutputs>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    quaternion: Option<Vec<f64>>,
    coords: Option<Vec<f64>>,
    pi: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    dt: Option<f64>,
    t_end: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    trajectory: Option<String>,
    report: Option<String>,
    stride: Option<usize>,
}

/// How `Θ` was given; Darboux mode needs the `ξ` form.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaSource {
    Xi(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

/// How `Υ` was given.
#[derive(Debug, Clone, PartialEq)]
pub enum UpsilonSource {
    Tau(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub group: LieGroup<f64>,
    pub inertia: InertiaTensor<f64>,
    pub theta_source: Option<ThetaSource>,
    pub upsilon_source: Option<UpsilonSource>,
    pub theta: TwoCocycle<f64>,
    pub upsilon: UpsilonField<f64>,
    pub potential: PotentialSpec<f64>,
    pub mode: FlowMode,
    pub initial: PhasePoint<f64>,
    pub integrator: IntegratorConfig<f64>,
    pub trajectory_path: String,
    pub report_path: String,
}

/// Load failures: a parse error or the full list of validation errors.
#[derive(Debug)]
pub enum LoadError {
    Io(String),
    Parse(String),
    Invalid(Vec<String>),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io(m) => write!(f, "cannot read scenario: {m}"),
            Self::Parse(m) => write!(f, "scenario parse error: {m}"),
            Self::Invalid(errs) => {
                writeln!(f, "scenario has {} validation error(s):", errs.len())?;
                for e in errs {
                    writeln!(f, "  - {e}")?;
                }
                Ok(())
            }
        }
    }
}

pub fn mode_from_name(name: &str) -> Option<FlowMode> {
    [FlowMode::EulerCanonical, FlowMode::EulerPoisson, FlowMode::Cocycle, FlowMode::Darboux, FlowMode::Full]
        .into_iter()
        .find(|m| m.name() == name)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, LoadError> {
    let raw: RawScenario =
        serde_json::from_str(text).map_err(|e| LoadError::Parse(format!("{e} (line {}, column {})", e.line(), e.column())))?;
    validate(raw).map_err(LoadError::Invalid)
}

fn matrix(rows: &[Vec<f64>], n: usize, field: &str, errs: &mut Vec<String>) -> Option<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        errs.push(format!("{field}: expected a {n}x{n} matrix"));
        return None;
    }
    Some(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn vector(v: &[f64], n: usize, field: &str, errs: &mut Vec<String>) -> Option<Vec<f64>> {
    if v.len() != n {
        errs.push(format!("{field}: expected {n} components, found {}", v.len()));
        return None;
    }
    if v.iter().any(|x| !x.is_finite()) {
        errs.push(format!("{field}: components must be finite"));
        return None;
    }
    Some(v.to_vec())
}

fn f64_rows(v: &Value) -> Option<Vec<Vec<f64>>> {
    v.as_array()?.iter().map(|r| r.as_array()?.iter().map(Value::as_f64).collect()).collect()
}

fn parse_group(v: Option<&Value>, errs: &mut Vec<String>) -> Option<LieGroup<f64>> {
    match v {
        None => Some(LieGroup::su2()),
        Some(Value::String(s)) if s == "su2" => Some(LieGroup::su2()),
        Some(Value::Object(o)) if o.len() == 1 && o.contains_key("structure_constants") => {
            let table: Option<Vec<Vec<Vec<f64>>>> = o["structure_constants"]
                .as_array()
                .and_then(|slices| slices.iter().map(f64_rows).collect());
            match table {
                None => {
                    errs.push("group.structure_constants: expected a nested array of numbers".into());
                    None
                }
                Some(t) => match StructureConstants::new(&t) {
                    Ok(sc) => Some(LieGroup::new(sc)),
                    Err(e) => {
                        errs.push(format!("group.structure_constants: {e}"));
                        None
                    }
                },
            }
        }
        Some(_) => {
            errs.push("group: expected \"su2\" or {\"structure_constants\": [...]}".into());
            None
        }
    }
}

fn parse_inertia(v: Option<&Value>, n: usize, errs: &mut Vec<String>) -> Option<InertiaTensor<f64>> {
    let Some(v) = v else {
        errs.push("inertia: required".into());
        return None;
    };
    let m = if let Some(rows) = f64_rows(v) {
        matrix(&rows, n, "inertia", errs)?
    } else if let Some(diag) = v.as_array().and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>()) {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vector(&diag, n, "inertia", errs)?))
    } else {
        errs.push("inertia: expected a vector of principal moments or a matrix".into());
        return None;
    };
    InertiaTensor::new(m).map_err(|e| errs.push(format!("inertia: {e}"))).ok()
}

fn parse_potential(v: Option<&Value>, n: usize, errs: &mut Vec<String>) -> Option<PotentialSpec<f64>> {
    match v {
        None => Some(PotentialSpec::None),
        Some(Value::String(s)) if s == "none" => Some(PotentialSpec::None),
        Some(Value::Object(o)) if o.len() == 1 && o.contains_key("heavy_top") => {
            let ht = &o["heavy_top"];
            let get = |k: &str| ht.get(k).and_then(Value::as_array).and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>());
            let unknown = ht.as_object().map(|m| m.keys().any(|k| k != "gamma" && k != "l")).unwrap_or(true);
            if unknown {
                errs.push("potential.heavy_top: expected exactly the keys gamma and l".into());
                return None;
            }
            let gamma = get("gamma").and_then(|g| vector(&g, n, "potential.heavy_top.gamma", errs));
            let l = get("l").and_then(|l| vector(&l, n, "potential.heavy_top.l", errs));
            match (gamma, l) {
                (Some(g), Some(l)) => PotentialSpec::heavy_top(DualVector::from_slice(&g), AlgebraVector::from_slice(&l))
                    .map_err(|e| errs.push(format!("potential.heavy_top: {e}")))
                    .ok(),
                _ => {
                    errs.push("potential.heavy_top: gamma and l must be numeric vectors".into());
                    None
                }
            }
        }
        Some(_) => {
            errs.push("potential: expected \"none\" or {\"heavy_top\": {\"gamma\": [...], \"l\": [...]}}".into());
            None
        }
    }
}

fn validate(raw: RawScenario) -> Result<Scenario, Vec<String>> {
    let mut errs = Vec::new();
    let Some(group) = parse_group(raw.group.as_ref(), &mut errs) else {
        return Err(errs);
    };
    let n = group.dim();
    let inertia = parse_inertia(raw.inertia.as_ref(), n, &mut errs);

    let theta_source = match (&raw.xi, &raw.theta) {
        (Some(_), Some(_)) => {
            errs.push("xi, theta: give at most one of them".into());
            None
        }
        (Some(xi), None) => Some(ThetaSource::Xi(xi.clone())),
        (None, Some(m)) => Some(ThetaSource::Matrix(m.clone())),
        (None, None) => None,
    };
    let theta = match &theta_source {
        None => Some(TwoCocycle::zero(n)),
        Some(ThetaSource::Xi(xi)) => vector(xi, n, "xi", &mut errs).and_then(|xi| {
            theta_from_xi(group.algebra(), &DualVector::from_slice(&xi)).map_err(|e| errs.push(format!("xi: {e}"))).ok()
        }),
        Some(ThetaSource::Matrix(m)) => matrix(m, n, "theta", &mut errs)
            .and_then(|m| TwoCocycle::new(group.algebra(), &m).map_err(|e| errs.push(format!("theta: {e}"))).ok()),
    };

    let upsilon_source = match (&raw.tau, &raw.upsilon) {
        (Some(_), Some(_)) => {
            errs.push("tau, upsilon: give at most one of them".into());
            None
        }
        (Some(t), None) => Some(UpsilonSource::Tau(t.clone())),
        (None, Some(m)) => Some(UpsilonSource::Matrix(m.clone())),
        (None, None) => None,
    };
    let upsilon = match &upsilon_source {
        None => Some(UpsilonField::zero(n)),
        Some(UpsilonSource::Tau(t)) => {
            if n != 3 {
                errs.push("tau: only defined for three-dimensional algebras; give upsilon instead".into());
                None
            } else {
                vector(t, 3, "tau", &mut errs).and_then(|t| {
                    UpsilonField::from_tau(&AlgebraVector::from_slice(&t)).map_err(|e| errs.push(format!("tau: {e}"))).ok()
                })
            }
        }
        Some(UpsilonSource::Matrix(m)) => matrix(m, n, "upsilon", &mut errs)
            .and_then(|m| UpsilonField::new(&m).map_err(|e| errs.push(format!("upsilon: {e}"))).ok()),
    };

    let potential = parse_potential(raw.potential.as_ref(), n, &mut errs);

    let mode = match &raw.mode {
        Some(name) => mode_from_name(name).or_else(|| {
            errs.push(format!(
                "mode: unknown mode {name:?} (expected euler-canonical, euler-poisson, cocycle, darboux or full)"
            ));
            None
        }),
        None => match (&theta, &upsilon) {
            (_, Some(u)) if !u.is_zero() => Some(FlowMode::Full),
            (Some(t), _) if !t.is_zero() => Some(FlowMode::Cocycle),
            _ => Some(FlowMode::EulerCanonical),
        },
    };
    let explicit_theta = matches!(theta_source, Some(ThetaSource::Matrix(_))) && theta.as_ref().is_some_and(|t| !t.is_zero());
    if mode == Some(FlowMode::Darboux) && explicit_theta {
        errs.push("mode: darboux mode requires theta in xi form; give xi instead of an explicit theta".into());
    }

    let initial = match &raw.initial {
        None => {
            errs.push("initial: required".into());
            None
        }
        Some(init) => {
            let g = if group.is_su2() {
                if init.coords.is_some() {
                    errs.push("initial.coords: su2 elements are given as initial.quaternion".into());
                }
                match &init.quaternion {
                    None => Some(group.identity()),
                    Some(q) => vector(q, 4, "initial.quaternion", &mut errs).and_then(|q| {
                        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if (norm - 1.0).abs() > UNIT_TOL {
                            errs.push(format!("initial.quaternion: norm {norm} is not 1 (tolerance {UNIT_TOL:e})"));
                            return None;
                        }
                        GroupElement::unit_quaternion(q[0], q[1], q[2], q[3])
                            .map_err(|e| errs.push(format!("initial.quaternion: {e}")))
                            .ok()
                    }),
                }
            } else {
                if init.quaternion.is_some() {
                    errs.push("initial.quaternion: only su2 elements are quaternions; use initial.coords".into());
                }
                match &init.coords {
                    None => Some(group.identity()),
                    Some(c) => vector(c, n, "initial.coords", &mut errs).map(|c| GroupElement::chart(&c)),
                }
            };
            let pi = match &init.pi {
                None => {
                    errs.push("initial.pi: required".into());
                    None
                }
                Some(p) => vector(p, n, "initial.pi", &mut errs),
            };
            match (g, pi) {
                (Some(g), Some(pi)) => PhasePoint::new(g, DualVector::from_slice(&pi))
                    .map_err(|e| errs.push(format!("initial: {e}")))
                    .ok(),
                _ => None,
            }
        }
    };

    let (dt, t_end) = raw.integrator.as_ref().map_or((None, None), |i| (i.dt, i.t_end));
    let dt = dt.unwrap_or(DEFAULT_DT);
    let t_end = t_end.unwrap_or(DEFAULT_T_END);
    if !(dt > 0.0 && dt.is_finite()) {
        errs.push("integrator.dt: must be positive and finite".into());
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        errs.push("integrator.t_end: must be positive and finite".into());
    } else if dt > 0.0 && !((t_end / dt).round() >= 1.0 && (t_end / dt) <= 1e9) {
        errs.push("integrator: t_end / dt must give between 1 and 1e9 steps".into());
    }
    let outputs = raw.outputs.unwrap_or(RawOutputs { trajectory: None, report: None, stride: None });
    let stride = outputs.stride.unwrap_or(1);
    if stride == 0 {
        errs.push("outputs.stride: must be at least 1".into());
    }
    let trajectory_path = outputs.trajectory.unwrap_or_else(|| DEFAULT_TRAJECTORY.into());
    let report_path = outputs.report.unwrap_or_else(|| DEFAULT_REPORT.into());
    for (field, p) in [("outputs.trajectory", &trajectory_path), ("outputs.report", &report_path)] {
        if p.is_empty() || Path::new(p).is_absolute() || Path::new(p).components().any(|c| c == std::path::Component::ParentDir) {
            errs.push(format!("{field}: must be a non-empty relative path inside the output directory"));
        }
    }
    if trajectory_path == report_path {
        errs.push("outputs: trajectory and report paths must differ".into());
    }

    // cross-field rules, checked through the library so messages stay consistent
    if let (Some(theta), Some(upsilon), Some(mode), Some(inertia), Some(potential)) =
        (&theta, &upsilon, mode, &inertia, &potential)
    {
        match StructureSelector::new(mode.structure_mode(), theta.clone(), upsilon.clone()) {
            Err(e) => errs.push(format!("mode: {e}")),
            Ok(sel) => {
                if let Err(e) = System::new(group.clone(), sel, inertia.clone(), potential.clone())
                    .and_then(|s| s.check_mode(mode))
                {
                    errs.push(format!("mode: {e}"));
                }
            }
        }
    }

    if !errs.is_empty() {
        return Err(errs);
    }
    let mut integrator = IntegratorConfig::new(dt, t_end);
    integrator.stride = stride;
    Ok(Scenario {
        group,
        inertia: inertia.expect("no errors"),
        theta_source,
        upsilon_source,
        theta: theta.expect("no errors"),
        upsilon: upsilon.expect("no errors"),
        potential: potential.expect("no errors"),
        mode: mode.expect("no errors"),
        initial: initial.expect("no errors"),
        integrator,
        trajectory_path,
        report_path,
    })
}

impl Scenario {
    pub fn selector(&self) -> StructureSelector<f64> {
        StructureSelector::new(self.mode.structure_mode(), self.theta.clone(), self.upsilon.clone())
            .expect("validated at load")
    }

    /// The structure with `Θ` and `Υ` as given, regardless of the flow mode.
    pub fn natural_selector(&self) -> StructureSelector<f64> {
        let mode = if !self.upsilon.is_zero() {
            StructureMode::Full
        } else if !self.theta.is_zero() {
            StructureMode::Cocycle
        } else {
            StructureMode::Canonical
        };
        StructureSelector::new(mode, self.theta.clone(), self.upsilon.clone()).expect("consistent by construction")
    }

    pub fn system(&self) -> System<f64> {
        System::new(self.group.clone(), self.selector(), self.inertia.clone(), self.potential.clone())
            .expect("validated at load")
    }

    /// The normalized scenario document; loading it reproduces this scenario.
    pub fn echo(&self) -> Value {
        let n = self.group.dim();
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> { (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect() };
        let mut doc = serde_json::Map::new();
        doc.insert(
            "group".into(),
            if self.group.is_su2() {
                json!("su2")
            } else {
                json!({ "structure_constants": self.group.algebra().table() })
            },
        );
        doc.insert("inertia".into(), json!(rows(self.inertia.inertia())));
        match &self.theta_source {
            Some(ThetaSource::Xi(xi)) => doc.insert("xi".into(), json!(xi)),
            Some(ThetaSource::Matrix(_)) => doc.insert("theta".into(), json!(rows(&self.theta.matrix()))),
            None if self.group.algebra().is_semisimple() => doc.insert("xi".into(), json!(vec![0.0; n])),
            None => doc.insert("theta".into(), json!(vec![vec![0.0; n]; n])),
        };
        match &self.upsilon_source {
            Some(UpsilonSource::Matrix(_)) => doc.insert("upsilon".into(), json!(rows(&self.upsilon.matrix()))),
            Some(UpsilonSource::Tau(t)) => doc.insert("tau".into(), json!(t)),
            None if n == 3 => doc.insert("tau".into(), json!([0.0, 0.0, 0.0])),
            None => doc.insert("upsilon".into(), json!(vec![vec![0.0; n]; n])),
        };
        doc.insert(
            "potential".into(),
            match &self.potential {
                PotentialSpec::None => json!("none"),
                PotentialSpec::HeavyTop { gamma, l } => {
                    json!({ "heavy_top": { "gamma": gamma.as_slice(), "l": l.as_slice() } })
                }
            },
        );
        doc.insert("mode".into(), json!(self.mode.name()));
        let g_key = if self.group.is_su2() { "quaternion" } else { "coords" };
        doc.insert("initial".into(), json!({ g_key: self.initial.g.coords(), "pi": self.initial.pi_l.as_slice() }));
        doc.insert("integrator".into(), json!({ "dt": self.integrator.dt, "t_end": self.integrator.t_end }));
        doc.insert(
            "outputs".into(),
            json!({
                "trajectory": self.trajectory_path,
                "report": self.report_path,
                "stride": self.integrator.stride,
            }),
        );
        Value::Object(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn invalid(text: &str) -> Vec<String> {
        match parse_scenario(text) {
            Err(LoadError::Invalid(e)) => e,
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_scenario_gets_defaults() {
        let s = parse_scenario(r#"{"inertia": [1, 2, 3], "initial": {"pi": [0.1, 0.2, 0.3]}}"#).unwrap();
        assert!(s.group.is_su2());
        assert!(s.theta.is_zero() && s.upsilon.is_zero());
        assert_eq!(s.mode, FlowMode::EulerCanonical);
        assert_eq!(s.initial.g, s.group.identity());
        assert_eq!((s.integrator.dt, s.integrator.t_end, s.integrator.stride), (DEFAULT_DT, DEFAULT_T_END, 1));
    }

    #[test]
    fn mode_defaults_follow_the_structure() {
        let s = parse_scenario(r#"{"inertia": [1, 2, 3], "xi": [0, 0, 1], "initial": {"pi": [0, 0, 0]}}"#).unwrap();
        assert_eq!(s.mode, FlowMode::Cocycle);
        let s = parse_scenario(r#"{"inertia": [1, 2, 3], "tau": [0, 0, 1], "initial": {"pi": [0, 0, 0]}}"#).unwrap();
        assert_eq!(s.mode, FlowMode::Full);
    }

    #[test]
    fn all_errors_are_reported() {
        let errs = invalid(
            r#"{"inertia": [1, -2, 3], "xi": [1, 2], "mode": "sideways",
                "initial": {"quaternion": [2, 0, 0, 0], "pi": [1]}, "integrator": {"dt": -1}}"#,
        );
        for field in ["inertia", "xi", "mode", "initial.quaternion", "initial.pi", "integrator.dt"] {
            assert!(errs.iter().any(|e| e.starts_with(field)), "{field} missing from {errs:?}");
        }
    }

    #[test]
    fn non_cocycle_theta_is_rejected() {
        let sc = StructureConstants::<f64>::su2_plus_center().table();
        let doc = json!({
            "group": {"structure_constants": sc},
            "inertia": [1, 1, 1, 1],
            "theta": [[0, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [-1, 0, 0, 0]],
            "initial": {"pi": [0, 0, 0, 0]}
        });
        let errs = invalid(&doc.to_string());
        assert!(errs.iter().any(|e| e.starts_with("theta") && e.contains("two-cocycle") && e.contains("residual 1e0")), "{errs:?}");
    }

    #[test]
    fn darboux_needs_xi_form() {
        let errs = invalid(
            r#"{"inertia": [1, 2, 3], "theta": [[0, 1, 0], [-1, 0, 0], [0, 0, 0]], "mode": "darboux",
                "initial": {"pi": [0, 0, 0]}}"#,
        );
        assert!(errs.iter().any(|e| e.contains("darboux")), "{errs:?}");
    }

    #[test]
    fn mode_structure_mismatch() {
        let errs = invalid(r#"{"inertia": [1, 2, 3], "tau": [0, 0, 1], "mode": "cocycle", "initial": {"pi": [0, 0, 0]}}"#);
        assert!(errs.iter().any(|e| e.starts_with("mode")), "{errs:?}");
        let errs = invalid(r#"{"inertia": [1, 2, 3], "mode": "euler-poisson", "initial": {"pi": [0, 0, 0]}}"#);
        assert!(errs.iter().any(|e| e.contains("heavy-top")), "{errs:?}");
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_scenario("{\"inertia\": [1, 2,\n 3,, ]}") {
            Err(LoadError::Parse(m)) => assert!(m.contains("line 2"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_scenario(r#"{"inertia": [1, 2, 3], "bogus": 1}"#), Err(LoadError::Parse(_))));
    }

    #[test]
    fn echo_round_trips() {
        let text = r#"{"inertia": [[2, 0.1, 0], [0.1, 3, 0], [0, 0, 4]], "xi": [0.1, 0.2, 0.3], "tau": [0, 0, 0.5],
            "potential": {"heavy_top": {"gamma": [0, 0, -9.8], "l": [0, 0, 0.2]}},
            "initial": {"quaternion": [1, 0, 0, 0], "pi": [0.1, 0.2, 0.3]},
            "integrator": {"dt": 0.01, "t_end": 2}, "outputs": {"stride": 5}}"#;
        let s = parse_scenario(text).unwrap();
        let echo = s.echo();
        let again = parse_scenario(&echo.to_string()).unwrap();
        assert_eq!(again.echo(), echo);
        assert_eq!(again.mode, FlowMode::Full);

        let generic = json!({
            "group": {"structure_constants": StructureConstants::<f64>::su2_plus_center().table()},
            "inertia": [1, 2, 3, 4],
            "initial": {"coords": [0.1, 0, 0, 0.2], "pi": [0, 1, 0, 0]}
        });
        let s = parse_scenario(&generic.to_string()).unwrap();
        let again = parse_scenario(&s.echo().to_string()).unwrap();
        assert_eq!(again.echo(), s.echo());
    }
}
