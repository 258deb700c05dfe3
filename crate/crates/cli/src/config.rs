//! Run configuration: a JSON document, optionally seeded from a catalog example and
//! patched by `KEY=VALUE` overrides.

use std::path::{Path, PathBuf};

use bertrand::orbits::turning_points;
use bertrand::spaces::{example_by_name, Family};
use bertrand::{BertrandParams, BertrandSpace, Branch, IntegrationSettings, PhaseState, Vec3};
use serde_json::{Map, Value};

use crate::CliError;

/// Parameters understood by catalog examples rather than by the config schema.
pub const EXAMPLE_KEYS: [&str; 7] = ["kappa", "k_d", "a", "b", "c", "d", "mu"];

const TOP_LEVEL_KEYS: [&str; 16] = [
    "max_steps",
    "family",
    "branch",
    "n",
    "m",
    "K",
    "D",
    "G",
    "amplitude",
    "initial",
    "t_end",
    "n_periods",
    "rtol",
    "atol",
    "out",
    "grid",
];

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    State(PhaseState<f64>),
    /// Orbit constants with a start radius; `r = None` starts at the pericentre.
    Constants {
        e: f64,
        j2: f64,
        r: Option<f64>,
        inward: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Time(f64),
    RadialPeriods(f64),
}

/// Inclusive linear grid `min, min + step, ..., max` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            c => (0..c).map(|i| self.min + (self.max - self.min) * i as f64 / (c - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub e: Axis,
    pub j2: Axis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: BertrandParams<f64>,
    pub initial: Option<InitialSpec>,
    pub horizon: Horizon,
    pub rtol: f64,
    pub atol: f64,
    /// Step budget of the integrator.
    pub max_steps: Option<usize>,
    pub out: Option<PathBuf>,
    pub grid: Option<Grid>,
    /// Example slug the parameters came from, if any.
    pub example: Option<String>,
}

/// Where a configuration comes from, in order of application.
#[derive(Debug, Clone, Default)]
pub struct ConfigSources {
    pub file: Option<PathBuf>,
    pub example: Option<String>,
    pub attractive: bool,
    pub overrides: Vec<String>,
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn read_document(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(config_error(format!("{}: top level must be an object", path.display()))),
        Err(e) => Err(config_error(format!("{}: {e}", path.display()))),
    }
}

fn parse_override(raw: &str) -> Result<(String, Value), CliError> {
    let (key, value) =
        raw.split_once('=').ok_or_else(|| config_error(format!("override `{raw}` is not of the form KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(config_error(format!("override `{raw}` has an empty key")));
    }
    let value = serde_json::from_str(value.trim()).unwrap_or_else(|_| Value::String(value.trim().to_string()));
    Ok((key.to_string(), value))
}

/// Sets a dotted path such as `initial.E` inside `doc`.
fn set_path(doc: &mut Map<String, Value>, key: &str, value: Value) -> Result<(), CliError> {
    let mut parts = key.split('.').peekable();
    let mut cur = doc;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let slot = cur.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
        cur = slot
            .as_object_mut()
            .ok_or_else(|| config_error(format!("`{part}` in override `{key}` is not an object")))?;
    }
    Ok(())
}

/// Merges all sources into a single JSON document and validates it.
pub fn load(sources: &ConfigSources) -> Result<RunConfig, CliError> {
    let mut doc = match &sources.file {
        Some(path) => read_document(path)?,
        None => Map::new(),
    };
    let overrides: Vec<(String, Value)> =
        sources.overrides.iter().map(|o| parse_override(o)).collect::<Result<_, _>>()?;
    if let Some(slug) = &sources.example {
        let lookup = |key: &str| overrides.iter().rev().find(|(k, _)| k == key).and_then(|(_, v)| v.as_f64());
        let example = example_by_name::<f64>(slug, lookup).map_err(|e| config_error(format!("example: {e}")))?;
        apply_params(&mut doc, &example.params);
    }
    if sources.attractive {
        doc.insert("amplitude".into(), Value::from(-1.0));
    }
    for (key, value) in overrides {
        if EXAMPLE_KEYS.contains(&key.as_str()) {
            if sources.example.is_none() {
                return Err(config_error(format!(
                    "override `{key}` is an example parameter but no --example was given"
                )));
            }
            continue;
        }
        set_path(&mut doc, &key, value)?;
    }
    let mut cfg = parse(&doc)?;
    cfg.example = sources.example.clone();
    Ok(cfg)
}

fn apply_params(doc: &mut Map<String, Value>, p: &BertrandParams<f64>) {
    match p.family {
        Family::TypeI => {
            doc.insert("family".into(), "type1".into());
            doc.remove("D");
            doc.remove("branch");
        }
        Family::TypeII { d, branch } => {
            doc.insert("family".into(), "type2".into());
            doc.insert("D".into(), d.into());
            doc.insert("branch".into(), Value::from(branch_sign(branch)));
        }
    }
    doc.insert("n".into(), p.n.into());
    doc.insert("m".into(), p.m.into());
    doc.insert("K".into(), p.k.into());
}

pub fn branch_sign(branch: Branch) -> i64 {
    match branch {
        Branch::Plus => 1,
        Branch::Minus => -1,
    }
}

fn number(map: &Map<String, Value>, key: &str, path: &str) -> Result<Option<f64>, CliError> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => match v.as_f64() {
            Some(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(config_error(format!("`{path}{key}` must be a finite number, got {v}"))),
        },
    }
}

fn positive_int(map: &Map<String, Value>, key: &str) -> Result<Option<u32>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => match v.as_u64().and_then(|x| u32::try_from(x).ok()) {
            Some(x) if x > 0 => Ok(Some(x)),
            _ => Err(config_error(format!("`{key}` must be a positive integer, got {v}"))),
        },
    }
}

fn vec3(map: &Map<String, Value>, key: &str) -> Result<Vec3<f64>, CliError> {
    let bad = || config_error(format!("`initial.{key}` must be an array of three finite numbers"));
    let arr = map.get(key).and_then(Value::as_array).ok_or_else(bad)?;
    if arr.len() != 3 {
        return Err(bad());
    }
    let xs: Vec<f64> =
        arr.iter().map(|v| v.as_f64().filter(|x| x.is_finite()).ok_or_else(bad)).collect::<Result<_, _>>()?;
    Ok(Vec3::new(xs[0], xs[1], xs[2]))
}

fn parse_initial(value: &Value) -> Result<InitialSpec, CliError> {
    let map = value.as_object().ok_or_else(|| config_error("`initial` must be an object"))?;
    let has_state = map.contains_key("q") || map.contains_key("p");
    let has_constants = ["E", "J2", "r", "inward"].iter().any(|k| map.contains_key(*k));
    for key in map.keys() {
        if !["q", "p", "E", "J2", "r", "inward"].contains(&key.as_str()) {
            return Err(config_error(format!("unknown field `initial.{key}`")));
        }
    }
    match (has_state, has_constants) {
        (true, true) => Err(config_error("`initial` must give either `q`/`p` or `E`/`J2`/`r`, not both")),
        (true, false) => Ok(InitialSpec::State(PhaseState::new(vec3(map, "q")?, vec3(map, "p")?))),
        (false, true) => {
            let e = number(map, "E", "initial.")?.ok_or_else(|| config_error("missing field `initial.E`"))?;
            let j2 = number(map, "J2", "initial.")?.ok_or_else(|| config_error("missing field `initial.J2`"))?;
            if j2 < 0.0 {
                return Err(config_error(format!("`initial.J2` must be non-negative, got {j2}")));
            }
            let r = number(map, "r", "initial.")?;
            if r.is_some_and(|r| r <= 0.0) {
                return Err(config_error("`initial.r` must be positive"));
            }
            let inward = match map.get("inward") {
                None => true,
                Some(Value::Bool(b)) => *b,
                Some(v) => return Err(config_error(format!("`initial.inward` must be a boolean, got {v}"))),
            };
            Ok(InitialSpec::Constants { e, j2, r, inward })
        }
        (false, false) => Err(config_error("`initial` is empty")),
    }
}

fn parse_axis(grid: &Map<String, Value>, key: &str) -> Result<Axis, CliError> {
    let map = grid
        .get(key)
        .and_then(Value::as_object)
        .ok_or_else(|| config_error(format!("`grid.{key}` must be an object with `min`, `max`, `count`")))?;
    let path = format!("grid.{key}.");
    let min = number(map, "min", &path)?.ok_or_else(|| config_error(format!("missing field `{path}min`")))?;
    let max = number(map, "max", &path)?.ok_or_else(|| config_error(format!("missing field `{path}max`")))?;
    let count = map
        .get("count")
        .and_then(Value::as_u64)
        .ok_or_else(|| config_error(format!("`{path}count` must be a non-negative integer")))? as usize;
    Ok(Axis { min, max, count })
}

/// Validates a merged document.
pub fn parse(doc: &Map<String, Value>) -> Result<RunConfig, CliError> {
    for key in doc.keys() {
        if !TOP_LEVEL_KEYS.contains(&key.as_str()) {
            return Err(config_error(format!("unknown field `{key}`")));
        }
    }
    let n = positive_int(doc, "n")?.unwrap_or(1);
    let m = positive_int(doc, "m")?.unwrap_or(1);
    let k = number(doc, "K", "")?.unwrap_or(0.0);
    let g = number(doc, "G", "")?.unwrap_or(0.0);
    let amplitude = number(doc, "amplitude", "")?.unwrap_or(1.0);
    let family = match doc.get("family") {
        None => Family::TypeI,
        Some(Value::String(s)) if s == "type1" => Family::TypeI,
        Some(Value::String(s)) if s == "type2" => {
            let d = number(doc, "D", "")?.unwrap_or(0.0);
            let branch = match doc.get("branch") {
                None => Branch::Plus,
                Some(v) => v
                    .as_i64()
                    .and_then(|s| Branch::from_sign(s as i32))
                    .ok_or_else(|| config_error(format!("`branch` must be +1 or -1, got {v}")))?,
            };
            Family::TypeII { d, branch }
        }
        Some(v) => return Err(config_error(format!("`family` must be \"type1\" or \"type2\", got {v}"))),
    };
    if matches!(family, Family::TypeI) && (doc.contains_key("D") || doc.contains_key("branch")) {
        return Err(config_error("`D` and `branch` only apply to family \"type2\""));
    }
    let params =
        BertrandParams::new(family, n, m, k, g, amplitude).map_err(|e| config_error(format!("params: {e}")))?;
    BertrandSpace::new(params).map_err(|e| config_error(format!("params: {e}")))?;

    let initial = doc.get("initial").map(parse_initial).transpose()?;
    let horizon = match (number(doc, "t_end", "")?, number(doc, "n_periods", "")?) {
        (Some(_), Some(_)) => return Err(config_error("give only one of `t_end` and `n_periods`")),
        (Some(t), None) if t >= 0.0 => Horizon::Time(t),
        (None, Some(p)) if p >= 0.0 => Horizon::RadialPeriods(p),
        (None, None) => Horizon::RadialPeriods(10.0),
        (Some(_), None) => return Err(config_error("`t_end` must be non-negative")),
        (None, Some(_)) => return Err(config_error("`n_periods` must be non-negative")),
    };
    let rtol = number(doc, "rtol", "")?.unwrap_or(1e-12);
    let atol = number(doc, "atol", "")?.unwrap_or(1e-12);
    if rtol <= 0.0 {
        return Err(config_error("`rtol` must be positive"));
    }
    if atol <= 0.0 {
        return Err(config_error("`atol` must be positive"));
    }
    let max_steps = positive_int(doc, "max_steps")?.map(|s| s as usize);
    let out = match doc.get("out") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(v) => return Err(config_error(format!("`out` must be a path string, got {v}"))),
    };
    let grid = match doc.get("grid") {
        None => None,
        Some(Value::Object(g)) => {
            for key in g.keys() {
                if key != "E" && key != "J2" {
                    return Err(config_error(format!("unknown field `grid.{key}`")));
                }
            }
            Some(Grid { e: parse_axis(g, "E")?, j2: parse_axis(g, "J2")? })
        }
        Some(_) => return Err(config_error("`grid` must be an object")),
    };
    Ok(RunConfig { params, initial, horizon, rtol, atol, max_steps, out, grid, example: None })
}

impl RunConfig {
    pub fn space(&self) -> BertrandSpace<f64> {
        BertrandSpace::new(self.params).expect("validated in parse")
    }

    pub fn settings(&self) -> IntegrationSettings<f64> {
        let mut s = IntegrationSettings::with_tolerances(self.rtol, self.atol);
        if let Some(max) = self.max_steps {
            s.stepper.max_steps = max;
        }
        s
    }

    pub fn initial_state(&self) -> Result<PhaseState<f64>, CliError> {
        let spec = self.initial.as_ref().ok_or_else(|| config_error("missing field `initial`"))?;
        initial_state(&self.space(), spec)
    }
}

/// Phase-space state for an initial-condition spec. For orbit constants the state is
/// `q = r e1`, `p = p_r e1 + (J / r) e2`, with `p_r` solved from the energy relation
/// `E = (g p_r^2 + J^2 / r^2) / 2 + V(r)`.
pub fn initial_state(space: &BertrandSpace<f64>, spec: &InitialSpec) -> Result<PhaseState<f64>, CliError> {
    let (e, j2, r, inward) = match *spec {
        InitialSpec::State(st) => {
            if st.r() == 0.0 {
                return Err(config_error("`initial.q` must not be the origin"));
            }
            space.check_radius(st.r()).map_err(|e| config_error(format!("initial.q: {e}")))?;
            return Ok(st);
        }
        InitialSpec::Constants { e, j2, r, inward } => (e, j2, r, inward),
    };
    let r = match r {
        Some(r) => r,
        None => {
            let tp = turning_points(space, e, j2).map_err(|err| config_error(format!("initial: {err}")))?;
            *tp.radii.first().ok_or_else(|| config_error("initial: no turning point; give `initial.r`"))?
        }
    };
    space.check_radius(r).map_err(|e| config_error(format!("initial.r: {e}")))?;
    let (g, _, _) = space.radial_jet(r).map_err(|e| config_error(format!("initial.r: {e}")))?;
    let v = space.potential(r).map_err(|e| config_error(format!("initial.r: {e}")))?;
    let kinetic = 2.0 * (e - v) - j2 / (r * r);
    let scale = 2.0 * (e.abs() + v.abs()) + j2 / (r * r);
    let pr2 = if kinetic < 0.0 && kinetic > -1e-12 * scale {
        0.0
    } else if kinetic < 0.0 {
        return Err(config_error(format!("initial: r = {r} is not reachable with E = {e}, J2 = {j2}")));
    } else {
        kinetic / g
    };
    let pr = if inward { -pr2.sqrt() } else { pr2.sqrt() };
    Ok(PhaseState::new(Vec3::new(r, 0.0, 0.0), Vec3::new(pr, j2.sqrt() / r, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bertrand::dynamics::{conserved, hamiltonian};

    fn doc(text: &str) -> Map<String, Value> {
        serde_json::from_str(text).unwrap()
    }

    fn err(text: &str) -> String {
        parse(&doc(text)).unwrap_err().to_string()
    }

    #[test]
    fn defaults() {
        let cfg = parse(&Map::new()).unwrap();
        assert_eq!(cfg.params, BertrandParams::type_i(1, 1, 0.0).unwrap());
        assert_eq!(cfg.horizon, Horizon::RadialPeriods(10.0));
        assert_eq!((cfg.rtol, cfg.atol), (1e-12, 1e-12));
    }

    #[test]
    fn diagnostics_name_the_field() {
        assert!(err(r#"{"n": "two"}"#).contains("`n`"));
        assert!(err(r#"{"rtol": -1}"#).contains("`rtol`"));
        assert!(err(r#"{"bogus": 1}"#).contains("`bogus`"));
        assert!(err(r#"{"family": "type2", "branch": 0}"#).contains("`branch`"));
        assert!(err(r#"{"initial": {"q": [1, 0], "p": [0, 1, 0]}}"#).contains("initial.q"));
        assert!(err(r#"{"initial": {"E": -0.3}}"#).contains("initial.J2"));
        assert!(err(r#"{"t_end": 1, "n_periods": 2}"#).contains("t_end"));
        assert!(err(r#"{"n": 2, "m": 4}"#).contains("coprime"));
        assert!(err(r#"{"grid": {"E": {"min": 0, "max": 1, "count": 3}}}"#).contains("grid.J2"));
    }

    #[test]
    fn overrides_patch_nested_keys() {
        let sources = ConfigSources {
            overrides: vec![
                "initial.E=-0.375".into(),
                "initial.J2=1".into(),
                "amplitude=-1".into(),
                "n_periods=3".into(),
            ],
            ..Default::default()
        };
        let cfg = load(&sources).unwrap();
        assert_eq!(cfg.initial, Some(InitialSpec::Constants { e: -0.375, j2: 1.0, r: None, inward: true }));
        assert_eq!(cfg.params.amplitude, -1.0);
        assert_eq!(cfg.horizon, Horizon::RadialPeriods(3.0));
        assert!(load(&ConfigSources { overrides: vec!["nokey".into()], ..Default::default() }).is_err());
        assert!(load(&ConfigSources { overrides: vec!["kappa=1".into()], ..Default::default() }).is_err());
    }

    #[test]
    fn examples_seed_the_parameters() {
        let sources = ConfigSources {
            example: Some("multifold-kepler".into()),
            attractive: true,
            overrides: vec!["a=2".into(), "b=0.5".into(), "n=3".into(), "m=2".into()],
            ..Default::default()
        };
        let cfg = load(&sources).unwrap();
        let p = cfg.params;
        assert_eq!((p.n, p.m, p.amplitude), (3, 2, -1.0));
        assert!((p.k - 4.0 * 0.25 / 16.0).abs() < 1e-15);
        assert_eq!(p.d().unwrap(), -2.0 * 0.5 / 4.0);
        let sources = ConfigSources { example: Some("nowhere".into()), ..Default::default() };
        assert!(load(&sources).unwrap_err().to_string().contains("nowhere"));
    }

    #[test]
    fn constants_spec_reproduces_e_and_j2() {
        let space =
            BertrandSpace::new(BertrandParams::type_i(1, 1, 0.0).unwrap().with_amplitude(-1.0).unwrap()).unwrap();
        let st = initial_state(&space, &InitialSpec::Constants { e: -0.375, j2: 1.0, r: None, inward: true }).unwrap();
        assert!((st.r() - 2.0 / 3.0).abs() < 1e-14);
        let st =
            initial_state(&space, &InitialSpec::Constants { e: -0.375, j2: 1.0, r: Some(1.0), inward: true }).unwrap();
        let c = conserved(&space, &st).unwrap();
        assert!((c.e + 0.375).abs() < 1e-15 && (c.j2 - 1.0).abs() < 1e-15);
        assert!(st.p[0] < 0.0);
        let bad = InitialSpec::Constants { e: -0.375, j2: 1.0, r: Some(3.0), inward: true };
        assert!(matches!(initial_state(&space, &bad), Err(CliError::Config(_))));
        let curved = BertrandSpace::new(
            BertrandParams::type_ii(3, 2, 0.5, 0.2, Branch::Plus).unwrap().with_amplitude(-1.0).unwrap(),
        )
        .unwrap();
        let e = curved.potential(0.7).unwrap() + 0.5;
        let spec = InitialSpec::Constants { e, j2: 0.4, r: Some(0.7), inward: false };
        let st = initial_state(&curved, &spec).unwrap();
        assert!((hamiltonian(&curved, &st).unwrap() - e).abs() < 1e-14);
    }

    #[test]
    fn axis_values() {
        assert_eq!(Axis { min: 0.0, max: 1.0, count: 3 }.values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Axis { min: 2.0, max: 5.0, count: 1 }.values(), vec![2.0]);
    }
}
