//! The `simulate`, `verify`, `sweep` and `catalog` commands.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use bertrand::dynamics::{conserved, integrate, TrajectoryStatus};
use bertrand::orbits::{
    apsidal_angle, classify_orbit, fit_phi0, measure_radial_period, orbit_residual, turning_points, OrbitClass,
};
use bertrand::runge_lenz::{branch_index, circle_value_of, conserved_tensor, runge_lenz_along, RungeLenzSample};
use bertrand::spaces::{example_by_name, ExampleName, EXAMPLE_SLUGS};
use bertrand::{BertrandSpace, Error, PhaseState, Trajectory};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{initial_state, Horizon, InitialSpec, RunConfig};
use crate::report::{self, number, Check, TrajectoryRow, VerificationReport};
use crate::CliError;

fn numeric(e: Error) -> CliError {
    CliError::Numeric(e.to_string())
}

/// Radial period of the orbit through `state`; circular orbits use the azimuthal rate,
/// since a radial period spans an azimuth of `2 pi m / n`.
pub fn radial_period(cfg: &RunConfig, space: &BertrandSpace<f64>, state: &PhaseState<f64>) -> Result<f64, CliError> {
    let c = conserved(space, state).map_err(numeric)?;
    let p = space.params();
    match classify_orbit(space, c.e, c.j2) {
        OrbitClass::Circular => {
            let r = state.r();
            Ok(2.0 * PI * p.m as f64 / p.n as f64 * r * r / c.j2.sqrt())
        }
        OrbitClass::BoundedPeriodic => Ok(measure_radial_period(space, state, &cfg.settings()).map_err(numeric)?.value),
        other => Err(CliError::Config(format!(
            "`n_periods` needs a bounded orbit but this one is {}; give `t_end` instead",
            other.name()
        ))),
    }
}

/// Integrates over the configured horizon; `None` for a zero horizon.
pub fn run_trajectory(
    cfg: &RunConfig,
    space: &BertrandSpace<f64>,
    state: &PhaseState<f64>,
) -> Result<Option<Trajectory<f64>>, CliError> {
    let t_end = match cfg.horizon {
        Horizon::Time(t) => t,
        Horizon::RadialPeriods(0.0) => return Ok(None),
        Horizon::RadialPeriods(p) => p * radial_period(cfg, space, state)?,
    };
    integrate(space, state, t_end, &cfg.settings()).map(Some).map_err(numeric)
}

/// Runge-Lenz vectors along a trajectory, or the reason they are unavailable.
pub fn runge_lenz_samples(traj: &Trajectory<f64>) -> Result<Vec<RungeLenzSample<f64>>, Error> {
    let constants = fit_phi0(traj)?;
    runge_lenz_along(traj, &constants)
}

pub fn trajectory_rows(traj: &Trajectory<f64>, rl: Option<&[RungeLenzSample<f64>]>) -> Vec<TrajectoryRow> {
    let space = &traj.space;
    traj.samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let c = conserved(space, &s.state);
            let (e, j2) = c.map_or((f64::NAN, f64::NAN), |c| (c.e, c.j2));
            let (k, a) = match rl {
                Some(rl) => (rl[i].k.k, rl[i].a.0),
                None => (branch_index(traj, i).k, [f64::NAN; 3]),
            };
            TrajectoryRow {
                t: s.t,
                q: s.state.q.0,
                p: s.state.p.0,
                r: s.state.r(),
                phi_unwrapped: s.phi_unwrapped,
                k,
                e,
                j2,
                a,
            }
        })
        .collect()
}

fn status_warning(traj: &Trajectory<f64>) -> Option<String> {
    match traj.status {
        TrajectoryStatus::Completed => None,
        TrajectoryStatus::ChartExit { t, r } => Some(format!("trajectory left the chart at t = {t}, r = {r}")),
    }
}

fn orbit_summary(
    space: &BertrandSpace<f64>,
    state: &PhaseState<f64>,
    traj: Option<&Trajectory<f64>>,
) -> Result<Value, CliError> {
    let c = conserved(space, state).map_err(numeric)?;
    let class = classify_orbit(space, c.e, c.j2);
    let p = space.params();
    let apsidal = traj.and_then(|t| apsidal_angle(t).ok());
    Ok(json!({
        "E": number(c.e),
        "J2": number(c.j2),
        "L": c.l.0.map(number),
        "class": class.name(),
        "apsidal_angle": apsidal.map(|a| json!({"value": number(a.value), "spread": number(a.error)})),
        "expected_apsidal_angle": p.m as f64 * PI / p.n as f64,
        "samples": traj.map_or(0, |t| t.len()),
        "t_end": traj.map(|t| number(t.last().t)),
        "status": traj.map(|t| if t.is_complete() { "completed" } else { "chart_exit" }),
    }))
}

pub fn output_dir(cfg: &RunConfig, flag: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = flag.map(Path::to_path_buf).or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub summary: Value,
    pub warnings: Vec<String>,
    pub trajectory_path: PathBuf,
    pub summary_path: PathBuf,
}

pub fn simulate(cfg: &RunConfig, out_dir: &Path) -> Result<SimulateOutcome, CliError> {
    let space = cfg.space();
    let state = cfg.initial_state()?;
    let traj = run_trajectory(cfg, &space, &state)?;
    let mut warnings = Vec::new();
    let rows = match &traj {
        None => Vec::new(),
        Some(traj) => {
            warnings.extend(status_warning(traj));
            let rl = match runge_lenz_samples(traj) {
                Ok(rl) => Some(rl),
                Err(e) => {
                    warnings.push(format!("Runge-Lenz vector unavailable: {e}"));
                    None
                }
            };
            trajectory_rows(traj, rl.as_deref())
        }
    };
    let mut summary = orbit_summary(&space, &state, traj.as_ref())?;
    summary["params"] = report::params_json(&space.params().clone(), cfg.example.as_deref());
    summary["warnings"] = json!(warnings);
    summary["versions"] = report::versions();
    let trajectory_path = out_dir.join("trajectory.csv");
    let summary_path = out_dir.join("summary.json");
    report::write_trajectory_csv(&trajectory_path, &rows)?;
    report::write_json(&summary_path, &summary)?;
    Ok(SimulateOutcome { summary, warnings, trajectory_path, summary_path })
}

fn is_radial(state: &PhaseState<f64>) -> bool {
    let l = state.angular_momentum().norm();
    l <= f64::EPSILON * state.r() * state.p.norm()
}

/// Runs the check battery on one trajectory.
pub fn verification_checks(traj: &Trajectory<f64>) -> Vec<Check> {
    let space = &traj.space;
    let p = space.params();
    let radial = is_radial(&traj.first().state);
    let mut checks = Vec::new();

    checks.push(match traj.energy_drift() {
        Ok(d) => Check::measured("energy_drift", d, report::ENERGY_DRIFT_BOUND),
        Err(e) => Check::failed("energy_drift", report::ENERGY_DRIFT_BOUND, e.to_string()),
    });
    checks.push(Check::measured("momentum_drift", traj.momentum_drift(), report::MOMENTUM_DRIFT_BOUND));

    let constants = fit_phi0(traj);
    checks.push(match (&constants, radial) {
        (_, true) => Check::skipped("orbit_residual", report::ORBIT_RESIDUAL_BOUND, "radial"),
        (Ok(c), false) => Check::measured("orbit_residual", orbit_residual(traj, c), report::ORBIT_RESIDUAL_BOUND),
        (Err(e), false) => Check::failed("orbit_residual", report::ORBIT_RESIDUAL_BOUND, e.to_string()),
    });

    let modulus = constants.as_ref().map_err(Clone::clone).and_then(|c| {
        traj.samples.iter().try_fold(0.0_f64, |worst, s| {
            let cv = circle_value_of(space, s, c.e, c.j2)?;
            Ok(worst.max((cv.c * cv.c + cv.s * cv.s - 1.0).abs()))
        })
    });
    checks.push(match modulus {
        Ok(v) => Check::measured("circle_modulus", v, report::CIRCLE_MODULUS_BOUND),
        Err(e) => Check::failed("circle_modulus", report::CIRCLE_MODULUS_BOUND, e.to_string()),
    });

    // evaluated even for radial orbits so that the J = 0 path is exercised
    let rl = constants.as_ref().map_err(Clone::clone).and_then(|c| runge_lenz_along(traj, c));
    match (&rl, radial) {
        (Ok(_), true) => {
            checks.push(Check::skipped("a_norm", report::A_NORM_BOUND, "radial"));
            checks.push(Check::skipped("a_drift", report::A_DRIFT_BOUND, "radial"));
        }
        (Ok(rl), false) => {
            let norm = rl.iter().fold(0.0_f64, |m, a| m.max((a.a.norm() - 1.0).abs()));
            let drift = rl.iter().fold(0.0_f64, |m, a| m.max((a.a - rl[0].a).max_abs()));
            checks.push(Check::measured("a_norm", norm, report::A_NORM_BOUND));
            let mut c = Check::measured("a_drift", drift, report::A_DRIFT_BOUND);
            let crossings = rl.windows(2).filter(|w| w[0].k != w[1].k).count();
            c.note = Some(format!("{crossings} branch changes"));
            checks.push(c);
        }
        (Err(e), _) => {
            checks.push(Check::failed("a_norm", report::A_NORM_BOUND, e.to_string()));
            checks.push(Check::failed("a_drift", report::A_DRIFT_BOUND, e.to_string()));
        }
    }

    let bound = report::tensor_drift_bound(p.n);
    checks.push(if radial {
        Check::skipped("tensor_drift", bound, "radial")
    } else {
        match tensor_drift(traj) {
            Ok(d) => Check::measured("tensor_drift", d, bound),
            Err(Error::InsufficientCoverage { advance }) => {
                Check::skipped("tensor_drift", bound, format!("azimuth advance {advance:.3} < 2 pi"))
            }
            Err(e) => Check::failed("tensor_drift", bound, e.to_string()),
        }
    });

    let expected = p.m as f64 * PI / p.n as f64;
    checks.push(if radial {
        Check::skipped("apsidal_error", report::APSIDAL_BOUND, "radial")
    } else {
        match apsidal_angle(traj) {
            Ok(a) => {
                let mut c = Check::measured("apsidal_error", (a.value - expected).abs(), report::APSIDAL_BOUND);
                c.note = Some(format!("measured {:.12}, expected m pi / n = {expected:.12}", a.value));
                c
            }
            Err(Error::InsufficientTurningPoints { found }) => {
                Check::skipped("apsidal_error", report::APSIDAL_BOUND, format!("{found} turning events"))
            }
            Err(e) => Check::failed("apsidal_error", report::APSIDAL_BOUND, e.to_string()),
        }
    });
    checks
}

/// Largest component drift of the conserved tensor relative to the first sample.
pub fn tensor_drift(traj: &Trajectory<f64>) -> Result<f64, Error> {
    let c0 = conserved_tensor(traj, 0)?;
    (1..traj.len()).try_fold(0.0_f64, |worst, i| Ok(worst.max(conserved_tensor(traj, i)?.max_abs_diff(&c0))))
}

pub fn verify(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<VerificationReport, CliError> {
    let space = cfg.space();
    let state = cfg.initial_state()?;
    let Some(traj) = run_trajectory(cfg, &space, &state)? else {
        return Err(CliError::Config("verification needs a non-empty trajectory".into()));
    };
    let warnings: Vec<String> = status_warning(&traj).into_iter().collect();
    let summary = orbit_summary(&space, &state, Some(&traj))?;
    let report = VerificationReport::new(
        verification_checks(&traj),
        report::params_json(space.params(), cfg.example.as_deref()),
        summary,
        warnings,
    );
    if let Some(dir) = out_dir {
        report::write_json(&dir.join("report.json"), &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "J2")]
    pub j2: f64,
    pub class: &'static str,
    pub apsidal: Option<f64>,
    pub apsidal_error: Option<f64>,
    pub apsidal_bound: f64,
    pub energy_drift: Option<f64>,
    pub momentum_drift: Option<f64>,
    pub a_drift: Option<f64>,
    /// `None` for cells without a bounded orbit to judge.
    pub pass: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub params: Value,
    pub rows: Vec<SweepRow>,
    pub pass: bool,
    pub versions: Value,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn sweep_cell(cfg: &RunConfig, space: &BertrandSpace<f64>, e: f64, j2: f64) -> SweepRow {
    let class = classify_orbit(space, e, j2);
    let mut row = SweepRow {
        e,
        j2,
        class: class.name(),
        apsidal: None,
        apsidal_error: None,
        apsidal_bound: report::APSIDAL_BOUND,
        energy_drift: None,
        momentum_drift: None,
        a_drift: None,
        pass: None,
        error: None,
    };
    if class != OrbitClass::BoundedPeriodic {
        return row;
    }
    let result = (|| -> Result<(), String> {
        let tp = turning_points(space, e, j2).map_err(|e| e.to_string())?;
        let spec = InitialSpec::Constants { e, j2, r: tp.radii.first().copied(), inward: true };
        let state = initial_state(space, &spec).map_err(|e| e.to_string())?;
        let traj = run_trajectory(cfg, space, &state).map_err(|e| e.to_string())?.ok_or("empty horizon")?;
        row.energy_drift = traj.energy_drift().ok().and_then(finite);
        row.momentum_drift = finite(traj.momentum_drift());
        if let Ok(rl) = runge_lenz_samples(&traj) {
            row.a_drift = finite(rl.iter().fold(0.0_f64, |m, a| m.max((a.a - rl[0].a).max_abs())));
        }
        let p = space.params();
        let a = apsidal_angle(&traj).map_err(|e| e.to_string())?;
        let err = (a.value - p.m as f64 * PI / p.n as f64).abs();
        row.apsidal = finite(a.value);
        row.apsidal_error = finite(err);
        row.pass = Some(err <= report::APSIDAL_BOUND);
        if let Some(w) = status_warning(&traj) {
            return Err(w);
        }
        Ok(())
    })();
    if let Err(msg) = result {
        row.error = Some(msg);
        row.pass = Some(false);
    }
    row
}

pub fn sweep(cfg: &RunConfig) -> Result<SweepReport, CliError> {
    let grid = cfg.grid.ok_or_else(|| CliError::Config("sweep needs a `grid` with `E` and `J2` axes".into()))?;
    let space = cfg.space();
    let cells: Vec<(f64, f64)> =
        grid.e.values().into_iter().flat_map(|e| grid.j2.values().into_iter().map(move |j2| (e, j2))).collect();
    let mut rows: Vec<SweepRow> = cells.par_iter().map(|&(e, j2)| sweep_cell(cfg, &space, e, j2)).collect();
    rows.sort_by(|a, b| a.e.total_cmp(&b.e).then(a.j2.total_cmp(&b.j2)));
    let pass = rows.iter().all(|r| r.pass != Some(false));
    Ok(SweepReport {
        params: report::params_json(space.params(), cfg.example.as_deref()),
        rows,
        pass,
        versions: report::versions(),
    })
}

pub fn write_sweep(report: &SweepReport, dir: &Path) -> Result<(), CliError> {
    report::write_json(&dir.join("sweep.json"), report)?;
    let path = dir.join("sweep.csv");
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    w.write_record([
        "E",
        "J2",
        "class",
        "apsidal",
        "apsidal_error",
        "apsidal_bound",
        "energy_drift",
        "momentum_drift",
        "a_drift",
        "pass",
        "error",
    ])
    .map_err(io)?;
    let opt = |x: Option<f64>| x.map_or(String::new(), report::float);
    for r in &report.rows {
        w.write_record([
            report::float(r.e),
            report::float(r.j2),
            r.class.to_string(),
            opt(r.apsidal),
            opt(r.apsidal_error),
            report::float(r.apsidal_bound),
            opt(r.energy_drift),
            opt(r.momentum_drift),
            opt(r.a_drift),
            r.pass.map_or(String::new(), |p| p.to_string()),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub parameters: &'static str,
    pub identification: String,
    pub references: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    EXAMPLE_SLUGS
        .iter()
        .map(|slug| {
            let ex = example_by_name::<f64>(slug, |_| None).expect("catalog slugs resolve");
            let (description, parameters, identification, references) = match ex.name {
                ExampleName::ConstantCurvature { potential: bertrand::spaces::CurvaturePotential::Kepler, .. } => (
                    "Kepler problem on a space of constant curvature kappa",
                    "kappa (default 0)",
                    "type1, n = m = 1, K = -kappa".to_string(),
                    "Schroedinger 1940; Higgs 1979",
                ),
                ExampleName::ConstantCurvature { .. } => (
                    "harmonic oscillator on a space of constant curvature kappa",
                    "kappa (default 0)",
                    "type2, n = 2, m = 1, K = 0, D = kappa".to_string(),
                    "Higgs 1979; Leemon 1979",
                ),
                ExampleName::DarbouxIII { .. } => (
                    "Darboux space of type III with metric (k_d + |Q|^2) |dQ|^2",
                    "k_d > 0 (default 1)",
                    "type2, n = 2, m = 1, K = 4/k_d^4, D = -2/k_d^2".to_string(),
                    "Darboux 1887; Kalnins, Kress, Miller and Winternitz 2003",
                ),
                ExampleName::MultifoldKepler { .. } => (
                    "multifold Kepler system with metric |Q|^(n/m - 2) (a + b |Q|^(n/m)) |dQ|^2",
                    "a > 0, b > 0, n, m (defaults 1, 1, 2, 1); c, d, mu",
                    "type2, K = 4 b^2/a^4, D = -2 b/a^2".to_string(),
                    "Iwai and Katayama 1994, 1995",
                ),
            };
            CatalogEntry { name: slug, description, parameters, identification, references }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{load, ConfigSources};
    use bertrand::orbits::circular_state;

    fn kepler_cfg(extra: &[&str]) -> RunConfig {
        let mut overrides: Vec<String> = vec!["initial.E=-0.375".into(), "initial.J2=1".into()];
        overrides.extend(extra.iter().map(|s| s.to_string()));
        load(&ConfigSources {
            example: Some("constant-curvature".into()),
            attractive: true,
            overrides,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn kepler_verification_passes() {
        let report = verify(&kepler_cfg(&[]), None).unwrap();
        for c in &report.checks {
            assert!(c.pass && c.skipped.is_none(), "{c:?}");
        }
        assert!(report.pass);
    }

    #[test]
    fn loose_tolerance_fails_the_drift_check() {
        let report = verify(&kepler_cfg(&["rtol=1e-3", "atol=1e-3"]), None).unwrap();
        assert!(!report.check("a_drift").unwrap().pass);
        assert!(!report.pass);
    }

    #[test]
    fn circular_orbits_use_the_azimuthal_rate() {
        let cfg = kepler_cfg(&["n_periods=2"]);
        let space = cfg.space();
        let st = circular_state(&space, 1.0).unwrap();
        let period = radial_period(&cfg, &space, &st).unwrap();
        assert!((period - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn catalog_lists_identifications() {
        let entries = catalog();
        let darboux = entries.iter().find(|e| e.name == "darboux-iii").unwrap();
        assert!(darboux.identification.contains("K = 4/k_d^4") && darboux.identification.contains("D = -2/k_d^2"));
        let multifold = entries.iter().find(|e| e.name == "multifold-kepler").unwrap();
        assert!(multifold.identification.contains("K = 4 b^2/a^4"));
        assert!(entries.iter().any(|e| e.name == "constant-curvature"));
        assert!(entries.iter().any(|e| e.name == "constant-curvature-oscillator"));
    }
}
