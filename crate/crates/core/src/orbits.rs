//! Closed-form orbit equations, turning points, apsidal angles and orbit classes.
//!
//! Bound orbits satisfy `cos(n phi / m - phi0) = chi(r^2, J^2, E)`. With amplitude `a`:
//!
//! * type I, `u = sqrt(r^-2 + K)`:
//!   `chi = (a + J^2 u) / sqrt(a^2 + 2 J^2 (E - G) + K J^4)`
//! * type II, `v = r^-2 (1 - D r^2 + s sqrt(...))`:
//!   `chi = (J^2 (v + D) + 2 G - 2 E) / sqrt((2 E - 2 G - D J^2)^2 + 4 s a J^2 - K J^4)`
//!
//! The companion `Theta = sin(n phi / m - phi0)` is evaluated with the `1/J` cancelled,
//! so radial orbits are handled by the same code.

use crate::dynamics::{conserved, integrate, velocity_map, IntegrationSettings, PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::quadrature::Estimate;
use crate::scalar::Real;
use crate::spaces::{BertrandSpace, Family};
use crate::vec3::Vec3;

/// Constants `(E, J^2, phi0)` labelling an orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitConstants<T> {
    pub e: T,
    pub j2: T,
    pub phi0: T,
}

/// Admissible roots of the radial quadratic, ordered by radius.
#[derive(Debug, Clone, PartialEq)]
pub struct TurningPoints<T> {
    /// Roots in the substitution variable (`u` for type I, `v` for type II).
    pub substitution_values: Vec<T>,
    pub radii: Vec<T>,
}

impl<T> TurningPoints<T> {
    pub fn count(&self) -> usize {
        self.radii.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrbitClass {
    BoundedPeriodic,
    ChartEscaping,
    Circular,
    Radial,
    Empty,
}

impl OrbitClass {
    pub fn name(&self) -> &'static str {
        match self {
            OrbitClass::BoundedPeriodic => "BoundedPeriodic",
            OrbitClass::ChartEscaping => "ChartEscaping",
            OrbitClass::Circular => "Circular",
            OrbitClass::Radial => "Radial",
            OrbitClass::Empty => "Empty",
        }
    }
}

/// `S^2`, the square of the denominator of `chi`, together with a magnitude scale
/// for judging it against zero.
fn denominator_squared<T: Real>(space: &BertrandSpace<T>, j2: T, e: T) -> (T, T) {
    let p = space.params();
    let (a, g, k) = (p.amplitude, p.g, p.k);
    let j4 = j2 * j2;
    match p.family {
        Family::TypeI => {
            let terms = [a * a, T::two() * j2 * (e - g), k * j4];
            (terms[0] + terms[1] + terms[2], terms.iter().fold(T::zero(), |s, x| s + x.abs()))
        }
        Family::TypeII { d, branch } => {
            let b = T::two() * (e - g) - d * j2;
            let terms = [b * b, T::lit(4.0) * branch.sign::<T>() * a * j2, -k * j4];
            (terms[0] + terms[1] + terms[2], terms.iter().fold(T::zero(), |s, x| s + x.abs()))
        }
    }
}

fn denominator<T: Real>(space: &BertrandSpace<T>, j2: T, e: T) -> Result<T> {
    let (s2, _) = denominator_squared(space, j2, e);
    if s2 > T::zero() && s2.is_finite() {
        Ok(s2.sqrt())
    } else {
        Err(Error::DegenerateOrbit(format!("chi denominator radicand {s2} is not positive")))
    }
}

fn check_j2<T: Real>(j2: T) -> Result<()> {
    if j2 >= T::zero() && j2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("J^2 must be finite and non-negative, got {j2}")))
    }
}

/// Substitution variable at `x = r^2` (`u` for type I, `v` for type II) and its `x`-derivative.
struct Substitution<T> {
    value: T,
    derivative: T,
}

fn substitution<T: Real>(space: &BertrandSpace<T>, x: T) -> Result<Substitution<T>> {
    let r = x.sqrt();
    space.check_radius(r)?;
    let p = space.params();
    match p.family {
        Family::TypeI => {
            let u = (x.recip() + p.k).sqrt();
            Ok(Substitution { value: u, derivative: -(T::two() * x * x * u).recip() })
        }
        Family::TypeII { branch, .. } => {
            let parts = space.type_ii_parts(x).ok_or(Error::Domain {
                r: r.as_f64(),
                lo: space.domain().lo.as_f64(),
                hi: space.domain().hi.as_f64(),
            })?;
            let dv = -branch.sign::<T>() * parts.v / (x * parts.sqrt_radicand);
            Ok(Substitution { value: parts.v, derivative: dv })
        }
    }
}

/// `chi(r^2, J^2, E)`, the cosine side of the orbit equation.
pub fn chi<T: Real>(space: &BertrandSpace<T>, r2: T, j2: T, e: T) -> Result<T> {
    check_j2(j2)?;
    let sub = substitution(space, r2)?;
    let s = denominator(space, j2, e)?;
    let p = space.params();
    Ok(match p.family {
        Family::TypeI => (p.amplitude + j2 * sub.value) / s,
        Family::TypeII { d, .. } => (j2 * (sub.value + d) + T::two() * (p.g - e)) / s,
    })
}

/// `d chi / d(r^2)`.
pub fn chi_d1<T: Real>(space: &BertrandSpace<T>, r2: T, j2: T, e: T) -> Result<T> {
    check_j2(j2)?;
    let sub = substitution(space, r2)?;
    let s = denominator(space, j2, e)?;
    Ok(j2 * sub.derivative / s)
}

/// `Theta = sin(n phi / m - phi0) = -2 r rdot (m r^2) / (n J) chi_d1`, evaluated with the
/// `J` in the denominator cancelled against the `J^2` inside `chi_d1`.
pub fn theta<T: Real>(space: &BertrandSpace<T>, rrdot: T, r2: T, j: T, e: T) -> Result<T> {
    if !(j >= T::zero()) {
        return Err(Error::InvalidParams(format!("J must be non-negative, got {j}")));
    }
    let sub = substitution(space, r2)?;
    let s = denominator(space, j * j, e)?;
    let p = space.params();
    let ratio = T::from_u32(p.m).unwrap() / T::from_u32(p.n).unwrap();
    // chi_d1 = J^2 * dsub/dx / S
    Ok(-T::two() * rrdot * ratio * r2 * j * sub.derivative / s)
}

/// `r rdot = q . v(q, p)`.
pub fn rrdot<T: Real>(space: &BertrandSpace<T>, state: &PhaseState<T>) -> Result<T> {
    Ok(state.q.dot(&velocity_map(space, &state.q, &state.p)?))
}

/// `(chi, Theta)` at a phase-space point for the orbit constants `(E, J^2)`.
pub fn chi_theta<T: Real>(space: &BertrandSpace<T>, state: &PhaseState<T>, e: T, j2: T) -> Result<(T, T)> {
    let r2 = state.q.norm_squared();
    let c = chi(space, r2, j2, e)?;
    let s = theta(space, rrdot(space, state)?, r2, j2.sqrt(), e)?;
    Ok((c, s))
}

fn orbit_phase<T: Real>(space: &BertrandSpace<T>, phi: T, phi0: T) -> T {
    let p = space.params();
    T::from_u32(p.n).unwrap() * phi / T::from_u32(p.m).unwrap() - phi0
}

/// `max |cos(n phi / m - phi0) - chi(r^2, J^2, E)|` over the samples, with `phi` the
/// unwrapped azimuth. Constants inconsistent with the trajectory give `+inf`.
pub fn orbit_residual<T: Real>(traj: &Trajectory<T>, constants: &OrbitConstants<T>) -> T {
    let space = &traj.space;
    let mut worst = T::zero();
    for s in &traj.samples {
        let lhs = orbit_phase(space, s.phi_unwrapped, constants.phi0).cos();
        match chi(space, s.state.q.norm_squared(), constants.j2, constants.e) {
            Ok(c) if c.is_finite() => worst = worst.max((lhs - c).abs()),
            _ => return T::infinity(),
        }
    }
    worst
}

/// Orbit constants of a trajectory: `E` and `J^2` from its first sample, `phi0` as the
/// circular mean of `n phi / m - atan2(Theta, chi)` over all samples.
pub fn fit_phi0<T: Real>(traj: &Trajectory<T>) -> Result<OrbitConstants<T>> {
    if traj.samples.is_empty() {
        return Err(Error::InsufficientData("empty trajectory".into()));
    }
    let space = &traj.space;
    let c0 = conserved(space, &traj.first().state)?;
    let (mut sx, mut sy) = (T::zero(), T::zero());
    for s in &traj.samples {
        let (c, th) = chi_theta(space, &s.state, c0.e, c0.j2)?;
        let offset = orbit_phase(space, s.phi_unwrapped, T::zero()) - th.atan2(c);
        sx = sx + offset.cos();
        sy = sy + offset.sin();
    }
    if sx.hypot(sy) <= T::epsilon() {
        return Err(Error::InsufficientData("orbit phase offsets cancel".into()));
    }
    Ok(OrbitConstants { e: c0.e, j2: c0.j2, phi0: sy.atan2(sx) })
}

fn type_ii_radius<T: Real>(space: &BertrandSpace<T>, v: T) -> Option<T> {
    let Family::TypeII { d, .. } = space.params().family else {
        return None;
    };
    if !(v.is_finite() && v != T::zero()) {
        return None;
    }
    // r^-2 = (v^2 + 2 D v + K) / (2 v)
    let x = T::two() * v / (v * v + T::two() * d * v + space.params().k);
    if !(x > T::zero() && x.is_finite()) {
        return None;
    }
    let r = x.sqrt();
    if !space.domain().contains(r) {
        return None;
    }
    // the map v -> r is two-to-one; keep only roots on this space's branch
    let own = space.type_ii_parts(x)?.v;
    ((own - v).abs() <= T::lit(1e-8) * v.abs().max(own.abs())).then_some(r)
}

fn radius_of<T: Real>(space: &BertrandSpace<T>, w: T) -> Option<T> {
    let p = space.params();
    match p.family {
        Family::TypeI => {
            let den = w * w - p.k;
            if !(w > T::zero() && den > T::zero()) {
                return None;
            }
            let r = den.sqrt().recip();
            space.domain().contains(r).then_some(r)
        }
        Family::TypeII { .. } => type_ii_radius(space, w),
    }
}

/// Coefficients `(A, B, C)` of the radial quadratic `A w^2 + B w + C = 0` in the
/// substitution variable.
fn radial_quadratic<T: Real>(space: &BertrandSpace<T>, e: T, j2: T) -> (T, T, T) {
    let p = space.params();
    let (a, g, k) = (p.amplitude, p.g, p.k);
    match p.family {
        // J^2 u^2 + 2 a u - (2 E - 2 G + K J^2)
        Family::TypeI => (j2, T::two() * a, -(T::two() * (e - g) + k * j2)),
        // J^2 v^2 + (2 D J^2 - 4 (E - G)) v + K J^2 - 4 s a
        Family::TypeII { d, branch } => {
            (j2, T::two() * d * j2 - T::lit(4.0) * (e - g), k * j2 - T::lit(4.0) * branch.sign::<T>() * a)
        }
    }
}

/// Value of the radial quadratic at `w`; vanishes at turning points.
pub fn radial_quadratic_value<T: Real>(space: &BertrandSpace<T>, e: T, j2: T, w: T) -> T {
    let (qa, qb, qc) = radial_quadratic(space, e, j2);
    (qa * w + qb) * w + qc
}

fn quadratic_roots<T: Real>(qa: T, qb: T, qc: T) -> Result<Vec<T>> {
    if qa == T::zero() {
        if qb == T::zero() {
            return Ok(Vec::new());
        }
        return Ok(vec![-qc / qb]);
    }
    let disc = qb * qb - T::lit(4.0) * qa * qc;
    if disc < T::zero() {
        return Err(Error::DegenerateOrbit(format!("radial quadratic has negative discriminant {disc}")));
    }
    let sq = disc.sqrt();
    let t = -(qb + if qb >= T::zero() { sq } else { -sq }) * T::half();
    if t == T::zero() {
        return Ok(vec![T::zero(), T::zero()]);
    }
    Ok(vec![t / qa, qc / t])
}

/// Admissible turning points of the orbits with energy `e` and squared angular momentum `j2`.
pub fn turning_points<T: Real>(space: &BertrandSpace<T>, e: T, j2: T) -> Result<TurningPoints<T>> {
    check_j2(j2)?;
    let (qa, qb, qc) = radial_quadratic(space, e, j2);
    let mut pairs: Vec<(T, T)> = Vec::new();
    for w in quadratic_roots(qa, qb, qc)? {
        if let Some(r) = radius_of(space, w) {
            if !pairs.iter().any(|(_, r0)| *r0 == r) {
                pairs.push((w, r));
            }
        }
    }
    pairs.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
    Ok(TurningPoints {
        substitution_values: pairs.iter().map(|p| p.0).collect(),
        radii: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Radius at azimuth `phi` on the orbit with the given constants, or `None` when
/// `cos(n phi / m - phi0)` lies outside the range of `chi` on the domain.
pub fn solve_r_of_phi<T: Real>(space: &BertrandSpace<T>, constants: &OrbitConstants<T>, phi: T) -> Result<Option<T>> {
    let OrbitConstants { e, j2, phi0 } = *constants;
    check_j2(j2)?;
    if j2 == T::zero() {
        return Err(Error::RadialOrbit);
    }
    let s = denominator(space, j2, e)?;
    let c = orbit_phase(space, phi, phi0).cos();
    let p = space.params();
    let w = match p.family {
        Family::TypeI => (c * s - p.amplitude) / j2,
        Family::TypeII { d, .. } => (c * s - T::two() * (p.g - e)) / j2 - d,
    };
    Ok(radius_of(space, w))
}

/// Radial kinetic energy is non-negative exactly where `|chi| <= 1`.
fn allowed<T: Real>(space: &BertrandSpace<T>, r: T, e: T, j2: T) -> bool {
    let (qa, qb, qc) = radial_quadratic(space, e, j2);
    let Ok(sub) = substitution(space, r * r) else {
        return false;
    };
    let w = sub.value;
    let value = (qa * w + qb) * w + qc;
    // type I: Q(u) = 2 (V_eff - E); type II: Q(v) = 4 v (V_eff - E)
    match space.params().family {
        Family::TypeI => value <= T::zero(),
        Family::TypeII { .. } => value * w <= T::zero(),
    }
}

/// Relative size below which the radial discriminant counts as a double root.
pub const CIRCULAR_TOLERANCE: f64 = 1e-12;

pub fn classify_orbit<T: Real>(space: &BertrandSpace<T>, e: T, j2: T) -> OrbitClass {
    if !(j2 >= T::zero() && j2.is_finite() && e.is_finite()) {
        return OrbitClass::Empty;
    }
    if j2 == T::zero() {
        return OrbitClass::Radial;
    }
    let (s2, scale) = denominator_squared(space, j2, e);
    if s2.abs() <= T::lit(CIRCULAR_TOLERANCE) * scale {
        let (qa, qb, _) = radial_quadratic(space, e, j2);
        return match radius_of(space, -qb / (T::two() * qa)) {
            Some(_) => OrbitClass::Circular,
            None => OrbitClass::Empty,
        };
    }
    let Ok(tp) = turning_points(space, e, j2) else {
        return OrbitClass::Empty;
    };
    let dom = space.domain();
    let upper_probe = |r: T| if dom.hi.is_finite() { (r + dom.hi) * T::half() } else { r * T::two() };
    match tp.radii.as_slice() {
        [r1, r2] if allowed(space, (*r1 + *r2) * T::half(), e, j2) => OrbitClass::BoundedPeriodic,
        [r1, r2] => {
            let below = allowed(space, *r1 * T::half() + dom.lo * T::half(), e, j2);
            if below || allowed(space, upper_probe(*r2), e, j2) {
                OrbitClass::ChartEscaping
            } else {
                OrbitClass::Empty
            }
        }
        [r1] => {
            let below = allowed(space, *r1 * T::half() + dom.lo * T::half(), e, j2);
            if below || allowed(space, upper_probe(*r1), e, j2) {
                OrbitClass::ChartEscaping
            } else {
                OrbitClass::Empty
            }
        }
        _ => {
            if allowed(space, dom.interior_point(), e, j2) {
                OrbitClass::ChartEscaping
            } else {
                OrbitClass::Empty
            }
        }
    }
}

/// Planar state on the circular orbit of radius `r`: `q = r e1`, `p = (J / r) e2` with
/// `J^2 = r^3 V'(r)`. Requires an attractive force at `r`.
pub fn circular_state<T: Real>(space: &BertrandSpace<T>, r: T) -> Result<PhaseState<T>> {
    let (_, _, dv) = space.radial_jet(r)?;
    if !(dv > T::zero()) {
        return Err(Error::DegenerateOrbit(format!("no circular orbit at r = {r}: force is not attractive")));
    }
    let j = (r * r * r * dv).sqrt();
    Ok(PhaseState::new(Vec3::new(r, T::zero(), T::zero()), Vec3::new(T::zero(), j / r, T::zero())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Apsis {
    Pericentre,
    Apocentre,
}

/// A zero of `r rdot` located between two samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningEvent<T> {
    pub t: T,
    pub r: T,
    pub phi: T,
    pub kind: Apsis,
}

/// Sign changes of `q . p` smaller than this (relative to `|q| |p|`) are treated as noise.
const EVENT_NOISE: f64 = 1e-10;

/// Radial turning events of a trajectory.
///
/// Each sign change of `r rdot` between samples is refined by Newton iteration on the
/// flow itself, re-integrating from the left sample with the trajectory's settings.
pub fn turning_events<T: Real>(traj: &Trajectory<T>) -> Result<Vec<TurningEvent<T>>> {
    let space = &traj.space;
    let sigma = |s: &PhaseState<T>| s.q.dot(&s.p);
    let mut events = Vec::new();
    for w in traj.samples.windows(2) {
        let (s0, s1) = (sigma(&w[0].state), sigma(&w[1].state));
        let noise = T::lit(EVENT_NOISE) * w[0].state.r() * w[0].state.p.norm().max(w[1].state.p.norm());
        let crosses = (s0 < T::zero() && s1 >= T::zero()) || (s0 > T::zero() && s1 <= T::zero());
        if !crosses || s0.abs().max(s1.abs()) <= noise {
            continue;
        }
        let kind = if s0 < T::zero() { Apsis::Pericentre } else { Apsis::Apocentre };
        let dt = w[1].t - w[0].t;
        let mut tau = dt * s0 / (s0 - s1);
        let mut state = w[0].state;
        let mut dphi = T::zero();
        let tiny = T::lit(64.0) * T::epsilon() * (w[0].t.abs() + dt);
        for _ in 0..8 {
            if tau > tiny {
                let seg = integrate(space, &w[0].state, tau, &traj.settings)?;
                state = seg.last().state;
                dphi = seg.azimuth_advance();
            } else {
                state = w[0].state;
                dphi = T::zero();
            }
            let (dq, dp) = crate::dynamics::eom(space, &state)?;
            let value = sigma(&state);
            let slope = dq.dot(&state.p) + state.q.dot(&dp);
            if slope == T::zero() {
                break;
            }
            let delta = value / slope;
            tau = (tau - delta).max(T::zero()).min(dt);
            if delta.abs() <= tiny {
                break;
            }
        }
        events.push(TurningEvent { t: w[0].t + tau, r: state.r(), phi: w[0].phi_unwrapped + dphi, kind });
    }
    Ok(events)
}

/// Mean azimuth swept between consecutive turning events, with the largest deviation of
/// an individual gap from the mean as the error estimate.
pub fn apsidal_angle<T: Real>(traj: &Trajectory<T>) -> Result<Estimate<T>> {
    let events = turning_events(traj)?;
    if events.len() < 2 {
        return Err(Error::InsufficientTurningPoints { found: events.len() });
    }
    let gaps: Vec<T> = events.windows(2).map(|w| w[1].phi - w[0].phi).collect();
    let mean = gaps.iter().fold(T::zero(), |s, g| s + *g) / T::from_usize_lossy(gaps.len());
    let error = gaps.iter().fold(T::zero(), |m, g| m.max((*g - mean).abs()));
    Ok(Estimate { value: mean, error })
}

/// Radial period from pairs of like turning events.
pub fn radial_period<T: Real>(traj: &Trajectory<T>) -> Result<Estimate<T>> {
    let events = turning_events(traj)?;
    if events.len() < 3 {
        return Err(Error::InsufficientTurningPoints { found: events.len() });
    }
    let periods: Vec<T> = events.windows(3).map(|w| w[2].t - w[0].t).collect();
    let mean = periods.iter().fold(T::zero(), |s, p| s + *p) / T::from_usize_lossy(periods.len());
    let error = periods.iter().fold(T::zero(), |m, p| m.max((*p - mean).abs()));
    Ok(Estimate { value: mean, error })
}

/// Radial period of the orbit through `state0`, found by integrating until three turning
/// events have been seen.
pub fn measure_radial_period<T: Real>(
    space: &BertrandSpace<T>,
    state0: &PhaseState<T>,
    settings: &IntegrationSettings<T>,
) -> Result<Estimate<T>> {
    let r0 = state0.r();
    let speed = velocity_map(space, &state0.q, &state0.p)?.norm();
    let (_, _, dv) = space.radial_jet(r0)?;
    let rate = speed.max((r0 * dv.abs()).sqrt()).max(T::epsilon());
    let mut horizon = T::lit(20.0) * r0 / rate;
    let mut found = 0;
    for _ in 0..40 {
        let traj = integrate(space, state0, horizon, settings)?;
        match radial_period(&traj) {
            Ok(p) => return Ok(p),
            Err(Error::InsufficientTurningPoints { found: f }) => found = f,
            Err(e) => return Err(e),
        }
        if !traj.is_complete() {
            break;
        }
        horizon = horizon * T::two();
    }
    Err(Error::InsufficientTurningPoints { found })
}

/// Integrates over `periods` radial periods, returning the trajectory and the period used.
pub fn integrate_radial_periods<T: Real>(
    space: &BertrandSpace<T>,
    state0: &PhaseState<T>,
    periods: T,
    settings: &IntegrationSettings<T>,
) -> Result<(Trajectory<T>, T)> {
    let period = measure_radial_period(space, state0, settings)?.value;
    Ok((integrate(space, state0, periods * period, settings)?, period))
}

/// Phase-space distance between `state0` and the state after `n` radial periods; the
/// azimuth then advances by `2 pi m` and Bertrand orbits close.
pub fn closure_error<T: Real>(
    space: &BertrandSpace<T>,
    state0: &PhaseState<T>,
    settings: &IntegrationSettings<T>,
) -> Result<T> {
    let n = T::from_u32(space.params().n).unwrap();
    let (traj, _) = integrate_radial_periods(space, state0, n, settings)?;
    if !traj.is_complete() {
        return Err(Error::InsufficientData("trajectory left the chart before closing".into()));
    }
    Ok(traj.last().state.distance(state0))
}
