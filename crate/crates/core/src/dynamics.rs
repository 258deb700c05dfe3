//! Hamiltonian flow of a Bertrand space in the rectangular chart.
//!
//! With `r = |q|`, `g = h(r)^-2` and `sigma = q . p` the Hamiltonian is
//! `H = (|p|^2 + (g - 1) sigma^2 / r^2) / 2 + V(r)`.

use crate::error::{Error, Result};
use crate::integrator::{Dop853, Dop853Settings, ImplicitMidpoint, OdeSystem};
use crate::scalar::Real;
use crate::spaces::BertrandSpace;
use crate::vec3::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseState<T> {
    pub q: Vec3<T>,
    pub p: Vec3<T>,
}

impl<T: Real> PhaseState<T> {
    pub fn new(q: Vec3<T>, p: Vec3<T>) -> Self {
        Self { q, p }
    }

    pub fn from_array(y: &[T; 6]) -> Self {
        Self { q: Vec3::new(y[0], y[1], y[2]), p: Vec3::new(y[3], y[4], y[5]) }
    }

    pub fn to_array(&self) -> [T; 6] {
        let (q, p) = (self.q.0, self.p.0);
        [q[0], q[1], q[2], p[0], p[1], p[2]]
    }

    pub fn r(&self) -> T {
        self.q.norm()
    }

    /// Angular momentum `q x p`.
    pub fn angular_momentum(&self) -> Vec3<T> {
        self.q.cross(&self.p)
    }

    /// The state with its momentum flipped; the flow of the reversed state runs backwards in time.
    pub fn reversed(&self) -> Self {
        Self { q: self.q, p: -self.p }
    }

    pub fn rotated(&self, rotation: &Mat3<T>) -> Self {
        Self { q: rotation.apply(&self.q), p: rotation.apply(&self.p) }
    }

    /// Euclidean distance in phase space.
    pub fn distance(&self, other: &Self) -> T {
        let dq = self.q - other.q;
        let dp = self.p - other.p;
        (dq.norm_squared() + dp.norm_squared()).sqrt()
    }
}

/// Energy and angular momentum of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedSet<T> {
    pub e: T,
    pub l: Vec3<T>,
    pub j2: T,
}

pub fn hamiltonian<T: Real>(space: &BertrandSpace<T>, state: &PhaseState<T>) -> Result<T> {
    let r = state.r();
    let h2 = space.metric_coeff(r)?;
    let sigma = state.q.dot(&state.p);
    let kinetic = state.p.norm_squared() + (h2.recip() - T::one()) * sigma * sigma / (r * r);
    Ok(kinetic * T::half() + space.potential(r)?)
}

/// `dq/dt = dH/dp = p + (h^-2 - 1) (q . p / |q|^2) q`.
pub fn velocity_map<T: Real>(space: &BertrandSpace<T>, q: &Vec3<T>, p: &Vec3<T>) -> Result<Vec3<T>> {
    let r = q.norm();
    let h2 = space.metric_coeff(r)?;
    let c = (h2.recip() - T::one()) * q.dot(p) / (r * r);
    Ok(*p + q.scale(c))
}

/// Hamilton's equations `(dq/dt, dp/dt)`.
pub fn eom<T: Real>(space: &BertrandSpace<T>, state: &PhaseState<T>) -> Result<(Vec3<T>, Vec3<T>)> {
    let PhaseState { q, p } = *state;
    let r = q.norm();
    if r == T::zero() {
        return Err(Error::Origin);
    }
    let (g, dg, dv) = space.radial_jet(r)?;
    let r2 = r * r;
    let sigma = q.dot(&p);
    // H = |p|^2 / 2 + f(r) sigma^2 / 2 + V with f = (g - 1) / r^2
    let f = (g - T::one()) / r2;
    let df = dg / r2 - T::two() * (g - T::one()) / (r2 * r);
    let qdot = p + q.scale(f * sigma);
    let radial = (T::half() * df * sigma * sigma + dv) / r;
    let pdot = -(q.scale(radial) + p.scale(f * sigma));
    Ok((qdot, pdot))
}

pub fn conserved<T: Real>(space: &BertrandSpace<T>, state: &PhaseState<T>) -> Result<ConservedSet<T>> {
    let e = hamiltonian(space, state)?;
    let l = state.angular_momentum();
    Ok(ConservedSet { e, l, j2: l.dot(&l) })
}

/// Rotation taking a state into the `q1 q2` plane with angular momentum along `+e3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFrame<T> {
    pub rotation: Mat3<T>,
    pub planar: PhaseState<T>,
    /// `J = 0`: the rotation only aligns `q` with `e1`.
    pub radial: bool,
}

impl<T: Real> PlaneFrame<T> {
    /// Undoes the rotation.
    pub fn restore(&self, v: &Vec3<T>) -> Vec3<T> {
        self.rotation.transpose().apply(v)
    }
}

/// The orbit of a state lies in the plane orthogonal to `L`; this rotates that plane
/// onto `theta = 0` of the rectangular chart, where `phi` is the ordinary azimuth.
pub fn rotate_to_plane<T: Real>(state: &PhaseState<T>) -> PlaneFrame<T> {
    let l = state.angular_momentum();
    let scale = state.q.norm() * state.p.norm();
    let (rotation, radial) = match l.normalized() {
        Some(axis) if l.norm() > T::epsilon() * scale => (Mat3::rotation_between(&axis, &Vec3::unit(2)), false),
        _ => {
            let rot = match state.q.normalized() {
                Some(dir) => Mat3::rotation_between(&dir, &Vec3::unit(0)),
                None => Mat3::identity(),
            };
            (rot, true)
        }
    };
    PlaneFrame { rotation, planar: state.rotated(&rotation), radial }
}

/// How trajectory samples are placed in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling<T> {
    /// Every accepted step, split into `subdivisions` equal parts by dense output.
    /// Interpolated points are roughly an order of magnitude less accurate than step ends.
    Steps { subdivisions: usize },
    /// A uniform grid with spacing `dt`, plus the final time.
    Uniform { dt: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings<T> {
    pub stepper: Dop853Settings<T>,
    pub sampling: Sampling<T>,
    /// Relative guard band around finite domain endpoints.
    pub guard: T,
}

impl<T: Real> Default for IntegrationSettings<T> {
    fn default() -> Self {
        Self { stepper: Dop853Settings::default(), sampling: Sampling::Steps { subdivisions: 1 }, guard: T::lit(1e-9) }
    }
}

impl<T: Real> IntegrationSettings<T> {
    pub fn with_tolerances(rtol: T, atol: T) -> Self {
        let mut s = Self::default();
        s.stepper.rtol = rtol;
        s.stepper.atol = atol;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub state: PhaseState<T>,
    /// Continuous azimuth in the orbital plane.
    pub phi_unwrapped: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryStatus<T> {
    Completed,
    /// Stopped inside the guard band of a domain endpoint.
    ChartExit {
        t: T,
        r: T,
    },
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub space: BertrandSpace<T>,
    pub samples: Vec<Sample<T>>,
    pub settings: IntegrationSettings<T>,
    pub status: TrajectoryStatus<T>,
    /// Orbital-plane frame of the initial state; `phi_unwrapped` is measured in it.
    pub frame: Mat3<T>,
    pub steps: usize,
    pub rejections: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn is_complete(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }

    /// Azimuth swept between the first and last sample.
    pub fn azimuth_advance(&self) -> T {
        self.last().phi_unwrapped - self.first().phi_unwrapped
    }

    /// `max |E(t) - E(0)| / max(1, |E(0)|)`.
    pub fn energy_drift(&self) -> Result<T> {
        let e0 = hamiltonian(&self.space, &self.first().state)?;
        let mut worst = T::zero();
        for s in &self.samples {
            worst = worst.max((hamiltonian(&self.space, &s.state)? - e0).abs());
        }
        Ok(worst / e0.abs().max(T::one()))
    }

    /// Componentwise maximum of `|L(t) - L(0)|`.
    pub fn momentum_drift(&self) -> T {
        let l0 = self.first().state.angular_momentum();
        self.samples.iter().fold(T::zero(), |m, s| m.max((s.state.angular_momentum() - l0).max_abs()))
    }
}

struct Flow<'a, T> {
    space: &'a BertrandSpace<T>,
}

impl<T: Real> OdeSystem<T, 6> for Flow<'_, T> {
    fn rhs(&self, _t: T, y: &[T; 6]) -> Result<[T; 6]> {
        let (dq, dp) = eom(self.space, &PhaseState::from_array(y))?;
        let out = [dq[0], dq[1], dq[2], dp[0], dp[1], dp[2]];
        if out.iter().all(|x| x.is_finite()) {
            Ok(out)
        } else {
            Err(Error::Domain { r: y[0].hypot(y[1]).hypot(y[2]).as_f64(), lo: f64::NAN, hi: f64::NAN })
        }
    }
}

fn wrap_pi<T: Real>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    x - two_pi * ((x + T::PI()) / two_pi).floor()
}

/// Tracks a continuous azimuth in a fixed orbital frame.
struct Unwrapper<T> {
    frame: Mat3<T>,
    phi: T,
}

impl<T: Real> Unwrapper<T> {
    fn new(frame: Mat3<T>, q: &Vec3<T>) -> Self {
        let pq = frame.apply(q);
        Self { frame, phi: pq[1].atan2(pq[0]) }
    }

    fn advance(&mut self, q: &Vec3<T>) -> T {
        let pq = self.frame.apply(q);
        let raw = pq[1].atan2(pq[0]);
        self.phi = self.phi + wrap_pi(raw - self.phi);
        self.phi
    }
}

/// Integrates the flow from `state0` over `[0, t_end]` with DOP853.
///
/// Trajectories that approach a finite endpoint of the radial domain stop with
/// [`TrajectoryStatus::ChartExit`] instead of failing.
pub fn integrate<T: Real>(
    space: &BertrandSpace<T>,
    state0: &PhaseState<T>,
    t_end: T,
    settings: &IntegrationSettings<T>,
) -> Result<Trajectory<T>> {
    if !(t_end >= T::zero() && t_end.is_finite()) {
        return Err(Error::InvalidParams(format!("t_end must be finite and non-negative, got {t_end}")));
    }
    hamiltonian(space, state0)?;
    let frame = rotate_to_plane(state0).rotation;
    let mut unwrap = Unwrapper::new(frame, &state0.q);
    let mut traj = Trajectory {
        space: *space,
        samples: vec![Sample { t: T::zero(), state: *state0, phi_unwrapped: unwrap.phi }],
        settings: *settings,
        status: TrajectoryStatus::Completed,
        frame,
        steps: 0,
        rejections: 0,
    };
    if t_end == T::zero() {
        return Ok(traj);
    }

    let domain = space.domain();
    let r0 = state0.r();
    let lo_guard = domain.lo + settings.guard * if domain.lo > T::zero() { domain.lo } else { r0 };
    let hi_guard = domain.hi * (T::one() - settings.guard);

    let flow = Flow { space };
    let mut stepper = Dop853::new(&flow, T::zero(), state0.to_array(), settings.stepper)?;
    let mut next_uniform = T::one();
    while stepper.t() < t_end {
        stepper.step(&flow, t_end)?;
        let (t0, t1) = (stepper.t_prev(), stepper.t());
        let mut emit = |t: T, y: [T; 6], unwrap: &mut Unwrapper<T>| {
            let state = PhaseState::from_array(&y);
            let phi = unwrap.advance(&state.q);
            traj.samples.push(Sample { t, state, phi_unwrapped: phi });
        };
        match settings.sampling {
            Sampling::Steps { subdivisions } => {
                let parts = subdivisions.max(1);
                for j in 1..parts {
                    let t = t0 + (t1 - t0) * T::from_usize_lossy(j) / T::from_usize_lossy(parts);
                    emit(t, stepper.interpolate(t), &mut unwrap);
                }
                emit(t1, *stepper.y(), &mut unwrap);
            }
            Sampling::Uniform { dt } => {
                loop {
                    let t = dt * next_uniform;
                    if t >= t1 || t >= t_end {
                        break;
                    }
                    emit(t, stepper.interpolate(t), &mut unwrap);
                    next_uniform = next_uniform + T::one();
                }
                if t1 >= t_end {
                    emit(t1, *stepper.y(), &mut unwrap);
                } else {
                    // keep the unwrapped azimuth continuous between sparse samples
                    unwrap.advance(&PhaseState::from_array(stepper.y()).q);
                }
            }
        }
        let r = PhaseState::from_array(stepper.y()).r();
        if r <= lo_guard || r >= hi_guard {
            if !matches!(settings.sampling, Sampling::Steps { .. }) && traj.last().t != t1 {
                let state = PhaseState::from_array(stepper.y());
                traj.samples.push(Sample { t: t1, state, phi_unwrapped: unwrap.phi });
            }
            traj.status = TrajectoryStatus::ChartExit { t: t1, r };
            break;
        }
    }
    traj.steps = stepper.steps();
    traj.rejections = stepper.rejections();
    Ok(traj)
}

/// Integrates backwards in time by flipping momenta; sample states are flipped back so
/// that they describe the original flow at times `0, -t, ...` (stored as positive `t`).
pub fn integrate_backward<T: Real>(
    space: &BertrandSpace<T>,
    state0: &PhaseState<T>,
    t_end: T,
    settings: &IntegrationSettings<T>,
) -> Result<Trajectory<T>> {
    let mut traj = integrate(space, &state0.reversed(), t_end, settings)?;
    for s in &mut traj.samples {
        s.state = s.state.reversed();
    }
    Ok(traj)
}

/// Fixed-step implicit midpoint integration, sampling every step.
pub fn integrate_midpoint<T: Real>(
    space: &BertrandSpace<T>,
    state0: &PhaseState<T>,
    t_end: T,
    h: T,
) -> Result<Trajectory<T>> {
    if !(h > T::zero() && t_end >= T::zero()) {
        return Err(Error::InvalidParams("step and t_end must be positive".into()));
    }
    hamiltonian(space, state0)?;
    let frame = rotate_to_plane(state0).rotation;
    let mut unwrap = Unwrapper::new(frame, &state0.q);
    let mut samples = vec![Sample { t: T::zero(), state: *state0, phi_unwrapped: unwrap.phi }];
    let flow = Flow { space };
    let mut stepper = ImplicitMidpoint::new(T::zero(), state0.to_array(), h);
    let steps = (t_end / h).ceil().to_usize().unwrap_or(0);
    for _ in 0..steps {
        stepper.step(&flow)?;
        let state = PhaseState::from_array(stepper.y());
        let phi = unwrap.advance(&state.q);
        samples.push(Sample { t: stepper.t(), state, phi_unwrapped: phi });
    }
    Ok(Trajectory {
        space: *space,
        samples,
        settings: IntegrationSettings::default(),
        status: TrajectoryStatus::Completed,
        frame,
        steps,
        rejections: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{BertrandParams, Branch};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(p: BertrandParams<f64>) -> BertrandSpace<f64> {
        BertrandSpace::new(p).unwrap()
    }

    fn kepler(amplitude: f64) -> BertrandSpace<f64> {
        space(BertrandParams::type_i(1, 1, 0.0).unwrap().with_amplitude(amplitude).unwrap())
    }

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    fn sample_spaces() -> Vec<BertrandSpace<f64>> {
        vec![
            kepler(1.0),
            space(BertrandParams::type_i(1, 2, 0.3).unwrap().with_amplitude(-1.0).unwrap()),
            space(BertrandParams::type_i(3, 2, -0.2).unwrap()),
            space(BertrandParams::type_ii(2, 1, 4.0, -2.0, Branch::Plus).unwrap().with_amplitude(-1.0).unwrap()),
            space(BertrandParams::type_ii(3, 2, 0.5, 0.2, Branch::Plus).unwrap()),
            space(BertrandParams::type_ii(1, 2, 0.8, -0.3, Branch::Minus).unwrap().with_g(0.4)),
        ]
    }

    fn random_state(rng: &mut ChaCha8Rng, space: &BertrandSpace<f64>) -> PhaseState<f64> {
        let hi = space.domain().hi.min(2.0);
        let r = rng.random_range(0.2 * hi..0.8 * hi);
        let dir = v(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            .normalized()
            .unwrap();
        let p = v(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        PhaseState::new(dir.scale(r), p)
    }

    #[test]
    fn hamiltonian_examples() {
        let k = kepler(1.0);
        assert_eq!(hamiltonian(&k, &PhaseState::new(v(0.0, 0.0, 1.0), v(1.0, 0.0, 0.0))).unwrap(), 1.5);
        assert_eq!(hamiltonian(&k, &PhaseState::new(v(0.0, 0.0, 2.0), Vec3::zero())).unwrap(), 0.5);
        let stretched = space(BertrandParams::type_i(1, 2, 0.0).unwrap());
        let st = PhaseState::new(v(0.0, 0.0, 1.0), v(0.0, 0.0, 1.0));
        assert_relative_eq!(hamiltonian(&stretched, &st).unwrap(), 1.125, max_relative = 1e-15);
    }

    #[test]
    fn hamiltonian_matches_spherical_form() {
        // H = (h^-2 p_r^2 + p_theta^2 / r^2 + p_phi^2 / (r^2 cos^2 theta)) / 2 + V in the chart (r, theta, phi)
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for sp in sample_spaces() {
            for _ in 0..20 {
                let st = random_state(&mut rng, &sp);
                let (r, th, ph) = crate::spaces::from_cartesian(&st.q).unwrap();
                let e_r = v(th.cos() * ph.cos(), th.cos() * ph.sin(), th.sin());
                let e_th = v(-th.sin() * ph.cos(), -th.sin() * ph.sin(), th.cos());
                let e_ph = v(-ph.sin(), ph.cos(), 0.0);
                let (p_r, p_th, p_ph) = (st.p.dot(&e_r), r * st.p.dot(&e_th), r * th.cos() * st.p.dot(&e_ph));
                let g = sp.metric_coeff(r).unwrap().recip();
                let h = 0.5 * (g * p_r * p_r + p_th * p_th / (r * r) + p_ph * p_ph / (r * r * th.cos().powi(2)))
                    + sp.potential(r).unwrap();
                assert_relative_eq!(hamiltonian(&sp, &st).unwrap(), h, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn eom_examples() {
        let (dq, dp) = eom(&kepler(1.0), &PhaseState::new(v(0.0, 0.0, 1.0), v(1.0, 0.0, 0.0))).unwrap();
        assert_eq!(dq, v(1.0, 0.0, 0.0));
        assert!((dp - v(0.0, 0.0, 1.0)).max_abs() < 1e-15);
    }

    #[test]
    fn eom_is_gradient_of_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let step = 1e-6;
        for sp in sample_spaces() {
            for _ in 0..17 {
                let st = random_state(&mut rng, &sp);
                let (dq, dp) = eom(&sp, &st).unwrap();
                for i in 0..3 {
                    let shift = |dq_: f64, dp_: f64| {
                        let mut s = st;
                        s.q.0[i] += dq_;
                        s.p.0[i] += dp_;
                        hamiltonian(&sp, &s).unwrap()
                    };
                    let dh_dp = (shift(0.0, step) - shift(0.0, -step)) / (2.0 * step);
                    let dh_dq = (shift(step, 0.0) - shift(-step, 0.0)) / (2.0 * step);
                    assert!((dq[i] - dh_dp).abs() < 1e-6, "{:?}", sp.params());
                    assert!((dp[i] + dh_dq).abs() < 1e-6, "{:?}", sp.params());
                }
                let vel = velocity_map(&sp, &st.q, &st.p).unwrap();
                assert!((vel - dq).max_abs() <= 1e-14 * (1.0 + vel.max_abs()));
            }
        }
    }

    #[test]
    fn velocity_map_examples() {
        let k = kepler(1.0);
        let (q, p) = (v(0.3, -1.0, 0.2), v(0.5, 0.1, -2.0));
        assert_eq!(velocity_map(&k, &q, &p).unwrap(), p);
        let sp = space(BertrandParams::type_ii(2, 1, 4.0, -2.0, Branch::Plus).unwrap());
        let perp = v(1.0, 0.3, 0.0);
        let q2 = v(-0.3, 1.0, 0.5);
        assert!((velocity_map(&sp, &q2, &perp).unwrap() - perp).max_abs() < 1e-16);
        let stretched = space(BertrandParams::type_i(1, 2, 0.0).unwrap());
        let out = velocity_map(&stretched, &v(0.0, 0.0, 1.0), &v(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(out, v(0.0, 0.0, 0.25));
    }

    #[test]
    fn conserved_examples() {
        let k = kepler(1.0);
        let c = conserved(&k, &PhaseState::new(v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0))).unwrap();
        assert_eq!((c.l, c.j2), (v(0.0, 0.0, 1.0), 1.0));
        let c = conserved(&k, &PhaseState::new(v(1.0, 2.0, 0.5), v(2.0, 4.0, 1.0))).unwrap();
        assert_eq!((c.l, c.j2), (Vec3::zero(), 0.0));
    }

    #[test]
    fn rotate_to_plane_properties() {
        let planar = PhaseState::new(v(1.0, 0.5, 0.0), v(-0.2, 0.7, 0.0));
        assert_eq!(rotate_to_plane(&planar).rotation, Mat3::identity());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let st = random_state(&mut rng, &kepler(1.0));
            let frame = rotate_to_plane(&st);
            let l = frame.rotation.apply(&st.angular_momentum());
            assert!(l[0].abs() < 1e-14 && l[1].abs() < 1e-14 && l[2] > 0.0);
            assert!(frame.planar.q[2].abs() < 1e-14 && frame.planar.p[2].abs() < 1e-14);
            assert!((frame.restore(&frame.planar.q) - st.q).max_abs() < 1e-14);
            assert!((frame.restore(&frame.planar.p) - st.p).max_abs() < 1e-14);
        }
        let radial = rotate_to_plane(&PhaseState::new(v(0.0, 2.0, 0.0), v(0.0, -1.0, 0.0)));
        assert!(radial.radial);
        assert!((radial.planar.q - v(2.0, 0.0, 0.0)).max_abs() < 1e-15);
    }

    #[test]
    fn attractive_kepler_turning_radii() {
        // E = -3/8, J = 1: semi-major axis 4/3, eccentricity 1/2
        let k = kepler(-1.0);
        let st = PhaseState::new(v(2.0 / 3.0, 0.0, 0.0), v(0.0, 1.5, 0.0));
        assert_relative_eq!(hamiltonian(&k, &st).unwrap(), -0.375, max_relative = 1e-15);
        let period = 2.0 * std::f64::consts::PI * (4.0f64 / 3.0).powf(1.5);
        let traj = integrate(&k, &st, 3.0 * period, &IntegrationSettings::default()).unwrap();
        let (lo, hi) =
            traj.samples.iter().fold((f64::INFINITY, 0.0f64), |(a, b), s| (a.min(s.state.r()), b.max(s.state.r())));
        // extremal samples only bracket the apsides; interpolated events are checked in orbits
        assert!((lo - 2.0 / 3.0).abs() < 1e-3 && (hi - 2.0).abs() < 1e-3, "{lo} {hi}");
        assert!(traj.energy_drift().unwrap() < 1e-11);
        assert!(traj.momentum_drift() < 1e-11);
        assert_relative_eq!(traj.azimuth_advance(), 6.0 * std::f64::consts::PI, max_relative = 1e-9);
    }

    #[test]
    fn repulsive_escape_is_monotone() {
        let traj = integrate(
            &kepler(1.0),
            &PhaseState::new(v(0.0, 1.0, 0.0), Vec3::zero()),
            20.0,
            &IntegrationSettings::default(),
        )
        .unwrap();
        assert!(traj.samples.windows(2).all(|w| w[1].state.r() > w[0].state.r()));
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let sp = space(BertrandParams::type_ii(2, 1, 4.0, -2.0, Branch::Plus).unwrap().with_amplitude(-1.0).unwrap());
        let st = PhaseState::new(v(0.4, 0.1, 0.2), v(-0.3, 0.6, 0.1));
        let fwd = integrate(&sp, &st, 7.0, &IntegrationSettings::default()).unwrap();
        let end = fwd.last().state;
        let back = integrate_backward(&sp, &end, 7.0, &IntegrationSettings::default()).unwrap();
        assert!(back.last().state.distance(&st) < 1e-10, "{}", back.last().state.distance(&st));
    }

    #[test]
    fn planar_motion_stays_planar() {
        let sp = space(BertrandParams::type_i(3, 2, 0.4).unwrap().with_amplitude(-1.0).unwrap());
        let traj =
            integrate(&sp, &PhaseState::new(v(0.8, 0.0, 0.0), v(0.1, 0.9, 0.0)), 30.0, &IntegrationSettings::default())
                .unwrap();
        for s in &traj.samples {
            assert!(s.state.q[2].abs() < 1e-12 && s.state.p[2].abs() < 1e-12);
        }
    }

    #[test]
    fn integration_commutes_with_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sp = space(BertrandParams::type_ii(3, 2, 0.5, 0.2, Branch::Plus).unwrap().with_amplitude(-1.0).unwrap());
        for _ in 0..10 {
            let st = random_state(&mut rng, &sp);
            let axis = v(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0).normalized().unwrap();
            let ang: f64 = rng.random_range(0.0..6.0);
            let rot = Mat3::axis_angle(&axis, ang.cos(), ang.sin());
            let settings = IntegrationSettings::default();
            let a = integrate(&sp, &st, 3.0, &settings).unwrap();
            let b = integrate(&sp, &st.rotated(&rot), 3.0, &settings).unwrap();
            if a.is_complete() && b.is_complete() {
                assert!(a.last().state.rotated(&rot).distance(&b.last().state) < 1e-9);
            }
        }
    }

    #[test]
    fn unwrapped_azimuth_is_continuous() {
        let sp = kepler(-1.0);
        let st = PhaseState::new(v(0.1, 0.0, 0.0), v(0.0, 4.3, 0.0));
        let traj = integrate(&sp, &st, 40.0, &IntegrationSettings::default()).unwrap();
        assert!(traj
            .samples
            .windows(2)
            .all(|w| (w[1].phi_unwrapped - w[0].phi_unwrapped).abs() < std::f64::consts::PI));
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn uniform_sampling_grid() {
        let settings =
            IntegrationSettings { sampling: Sampling::Uniform { dt: 0.5 }, ..IntegrationSettings::default() };
        let st = PhaseState::new(v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0));
        let traj = integrate(&kepler(-1.0), &st, 10.0, &settings).unwrap();
        assert_eq!(traj.len(), 21);
        for (i, s) in traj.samples.iter().enumerate() {
            assert!((s.t - 0.5 * i as f64).abs() < 1e-12);
            // circular orbit: unit speed, unit radius
            assert!((s.state.r() - 1.0).abs() < 1e-10);
            assert!((s.phi_unwrapped - s.t).abs() < 1e-10);
        }
    }

    #[test]
    fn chart_exit_is_reported() {
        // sphere chart ends at r = 1; repulsive potential pushes outwards
        let sp = space(BertrandParams::type_i(1, 1, -1.0).unwrap());
        let traj =
            integrate(&sp, &PhaseState::new(v(0.5, 0.0, 0.0), v(0.3, 0.0, 0.0)), 50.0, &IntegrationSettings::default())
                .unwrap();
        match traj.status {
            TrajectoryStatus::ChartExit { r, .. } => assert!((1.0 - 1e-9..1.0).contains(&r)),
            TrajectoryStatus::Completed => panic!("expected chart exit"),
        }
        assert!(traj.samples.iter().all(|s| s.state.r().is_finite() && s.state.r() < 1.0));
    }

    #[test]
    fn midpoint_energy_error_is_bounded() {
        let sp = space(BertrandParams::type_ii(2, 1, 0.0, 0.0, Branch::Plus).unwrap().with_amplitude(-1.0).unwrap());
        let st = PhaseState::new(v(1.0, 0.0, 0.0), v(0.0, 0.4, 0.2));
        let traj = integrate_midpoint(&sp, &st, 200.0, 0.01).unwrap();
        assert!(traj.energy_drift().unwrap() < 1e-4);
        assert!(traj.momentum_drift() < 1e-12);
    }

    #[test]
    fn rejects_bad_horizon() {
        let st = PhaseState::new(v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0));
        assert!(integrate(&kepler(1.0), &st, -1.0, &IntegrationSettings::default()).is_err());
        assert_eq!(integrate(&kepler(1.0), &st, 0.0, &IntegrationSettings::default()).unwrap().len(), 1);
    }
}
