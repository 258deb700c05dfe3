//! Generalized Runge-Lenz vector and the conserved rank-`n` tensor.
//!
//! Along an orbit `chi` and `Theta` are the cosine and sine of `psi = n phi / m - phi0`.
//! Chebyshev lifting turns them into `e^{i m psi} = e^{i (n phi - m phi0)}`; an `n`-th
//! root, chosen by the cover index `k`, recovers the orbit-relative azimuth
//! `phi - m phi0 / n` and with it the unit vector
//! `A = cos(phi~) q / r + sin(phi~) q x (q x p) / (r J)`, which points at the fixed
//! azimuth `m phi0 / n` of the orbital plane.

use std::collections::HashMap;

use crate::dynamics::{Sample, Trajectory};
use crate::error::{Error, Result};
use crate::orbits::{chi, fit_phi0, rrdot, theta, OrbitConstants};
use crate::scalar::Real;
use crate::spaces::BertrandSpace;
use crate::vec3::Vec3;

/// Chebyshev polynomial of the first kind, `T_m(cos a) = cos(m a)`.
pub fn chebyshev_t<T: Real>(m: u32, x: T) -> T {
    let (mut prev, mut cur) = (T::one(), x);
    if m == 0 {
        return prev;
    }
    for _ in 1..m {
        (prev, cur) = (cur, T::two() * x * cur - prev);
    }
    cur
}

/// Chebyshev polynomial of the second kind, `U_d(cos a) sin a = sin((d + 1) a)`.
pub fn chebyshev_u<T: Real>(d: u32, x: T) -> T {
    let (mut prev, mut cur) = (T::one(), T::two() * x);
    if d == 0 {
        return prev;
    }
    for _ in 1..d {
        (prev, cur) = (cur, T::two() * x * cur - prev);
    }
    cur
}

/// A point `c + i s` on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleValue<T> {
    pub c: T,
    pub s: T,
}

impl<T: Real> CircleValue<T> {
    pub fn modulus(&self) -> T {
        self.c.hypot(self.s)
    }

    /// Argument in `[0, 2 pi)`.
    pub fn angle(&self) -> T {
        let two_pi = T::PI() + T::PI();
        let a = self.s.atan2(self.c);
        if a < T::zero() {
            a + two_pi
        } else {
            a
        }
    }
}

/// Sheet `k` of the `n`-fold cover, i.e. the azimuth sector `[2 pi k / n, 2 pi (k + 1) / n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoverIndex {
    pub k: usize,
    pub n: usize,
}

impl CoverIndex {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if n == 0 || k >= n {
            return Err(Error::InconsistentBranch { k, n });
        }
        Ok(Self { k, n })
    }

    /// Sector containing the azimuth `phi`.
    pub fn of_azimuth<T: Real>(n: usize, phi: T) -> Self {
        let two_pi = T::PI() + T::PI();
        let sector = (T::from_usize_lossy(n) * phi / two_pi).floor();
        let k = sector.to_i64().unwrap_or(0).rem_euclid(n as i64) as usize;
        Self { k, n }
    }

    pub fn shifted(&self, by: usize) -> Self {
        Self { k: (self.k + by) % self.n, n: self.n }
    }
}

/// `(T_m(chi), Theta U_{m-1}(chi)) = (cos n phi~, sin n phi~)` with `phi~` the orbit-relative azimuth.
pub fn circle_map<T: Real>(space: &BertrandSpace<T>, rrdot: T, r2: T, j: T, e: T) -> Result<CircleValue<T>> {
    let x = chi(space, r2, j * j, e)?;
    let th = theta(space, rrdot, r2, j, e)?;
    let m = space.params().m;
    Ok(CircleValue { c: chebyshev_t(m, x), s: th * chebyshev_u(m - 1, x) })
}

/// Circle value of a phase-space sample for the orbit constants `(E, J^2)`.
pub fn circle_value_of<T: Real>(space: &BertrandSpace<T>, sample: &Sample<T>, e: T, j2: T) -> Result<CircleValue<T>> {
    let st = &sample.state;
    circle_map(space, rrdot(space, st)?, st.q.norm_squared(), j2.sqrt(), e)
}

/// `k = floor(n phi_unwrapped / 2 pi) mod n` at a sample.
pub fn branch_index<T: Real>(traj: &Trajectory<T>, sample_index: usize) -> CoverIndex {
    let n = traj.space.params().n as usize;
    CoverIndex::of_azimuth(n, traj.samples[sample_index].phi_unwrapped)
}

/// [`branch_index`] at every sample.
pub fn branch_tracking<T: Real>(traj: &Trajectory<T>) -> Vec<CoverIndex> {
    (0..traj.samples.len()).map(|i| branch_index(traj, i)).collect()
}

/// `(cos phi, sin phi)` with `phi = (arg(cv) + 2 pi k) / n`, the root of `cv` lying in sector `k`.
pub fn reconstruct_phase<T: Real>(cv: &CircleValue<T>, k: CoverIndex) -> Result<(T, T)> {
    if k.n == 0 || k.k >= k.n || !(cv.c.is_finite() && cv.s.is_finite()) || cv.modulus() == T::zero() {
        return Err(Error::InconsistentBranch { k: k.k, n: k.n });
    }
    if k.n == 1 {
        let m = cv.modulus();
        return Ok((cv.c / m, cv.s / m));
    }
    let two_pi = T::PI() + T::PI();
    let phi = (cv.angle() + two_pi * T::from_usize_lossy(k.k)) / T::from_usize_lossy(k.n);
    Ok((phi.cos(), phi.sin()))
}

/// Sheet of the orbit-relative azimuth `phi_rel`, chosen as the root of `cv` nearest to it.
///
/// Unlike `floor`, this cannot disagree with `cv` when `phi_rel` sits on a sector boundary.
pub fn nearest_branch<T: Real>(cv: &CircleValue<T>, n: usize, phi_rel: T) -> CoverIndex {
    let two_pi = T::PI() + T::PI();
    let j = ((T::from_usize_lossy(n) * phi_rel - cv.angle()) / two_pi).round();
    let k = j.to_i64().unwrap_or(0).rem_euclid(n as i64) as usize;
    CoverIndex { k, n }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RungeLenzSample<T> {
    pub a: Vec3<T>,
    pub k: CoverIndex,
    pub t: T,
    /// `J = 0`: the transverse part is dropped and `A` is not a unit vector in general.
    pub radial: bool,
}

/// Runge-Lenz vector at a sample on sheet `k` of the cover.
///
/// `E` and `J^2` come from the sample itself; `q x (q x p) / J` is a unit vector times
/// `-r`, so the `1/J` never has to be formed.
pub fn runge_lenz<T: Real>(space: &BertrandSpace<T>, sample: &Sample<T>, k: CoverIndex) -> Result<RungeLenzSample<T>> {
    let c = crate::dynamics::conserved(space, &sample.state)?;
    runge_lenz_with(space, sample, k, c.e, c.j2)
}

fn runge_lenz_with<T: Real>(
    space: &BertrandSpace<T>,
    sample: &Sample<T>,
    k: CoverIndex,
    e: T,
    j2: T,
) -> Result<RungeLenzSample<T>> {
    let cv = circle_value_of(space, sample, e, j2)?;
    let (cos_p, sin_p) = reconstruct_phase(&cv, k)?;
    let st = &sample.state;
    let r = st.r();
    let radial_dir = st.q.scale(r.recip());
    // e_phi = (q x p) x q / (r J); the direction is taken from L itself
    let l = st.angular_momentum();
    let transverse = l.cross(&st.q);
    let radial = transverse.norm() <= T::epsilon() * r * r * st.p.norm().max(T::min_positive_value());
    let a = if radial {
        radial_dir.scale(cos_p)
    } else {
        radial_dir.scale(cos_p) - transverse.scale(sin_p / transverse.norm())
    };
    Ok(RungeLenzSample { a, k, t: sample.t, radial })
}

/// Runge-Lenz vector at every sample, with the sheet chosen from the orbit-relative
/// azimuth `phi_unwrapped - m phi0 / n` of the fitted constants.
pub fn runge_lenz_along<T: Real>(
    traj: &Trajectory<T>,
    constants: &OrbitConstants<T>,
) -> Result<Vec<RungeLenzSample<T>>> {
    let space = &traj.space;
    let p = space.params();
    let n = p.n as usize;
    let shift = T::from_u32(p.m).unwrap() * constants.phi0 / T::from_u32(p.n).unwrap();
    traj.samples
        .iter()
        .map(|s| {
            let cv = circle_value_of(space, s, constants.e, constants.j2)?;
            let k = nearest_branch(&cv, n, s.phi_unwrapped - shift);
            runge_lenz_with(space, s, k, constants.e, constants.j2)
        })
        .collect()
}

/// Fits the orbit constants and evaluates [`runge_lenz_along`].
pub fn runge_lenz_trajectory<T: Real>(traj: &Trajectory<T>) -> Result<(OrbitConstants<T>, Vec<RungeLenzSample<T>>)> {
    let constants = fit_phi0(traj)?;
    Ok((constants, runge_lenz_along(traj, &constants)?))
}

/// Symmetric tensor of rank `order` on `R^3`, stored by multidegree.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTensor<T> {
    pub order: usize,
    /// Component for each multidegree `(a1, a2, a3)`, ordered as [`SymmetricTensor::multidegrees`].
    pub components: Vec<T>,
}

impl<T: Real> SymmetricTensor<T> {
    /// All `(a1, a2, a3)` with `a1 + a2 + a3 = order`, `a1` descending then `a2` descending.
    pub fn multidegrees(order: usize) -> Vec<[usize; 3]> {
        let mut out = Vec::with_capacity((order + 1) * (order + 2) / 2);
        for a1 in (0..=order).rev() {
            for a2 in (0..=order - a1).rev() {
                out.push([a1, a2, order - a1 - a2]);
            }
        }
        out
    }

    /// Symmetrized product `v_1 (.) ... (.) v_n`.
    ///
    /// The coefficient of `x^a` in `prod (v_i . x)` equals `n! / a!` times the tensor
    /// component of multidegree `a`.
    pub fn symmetric_product(vectors: &[Vec3<T>]) -> Self {
        let order = vectors.len();
        let mut poly: HashMap<[usize; 3], T> = HashMap::from([([0, 0, 0], T::one())]);
        for v in vectors {
            let mut next: HashMap<[usize; 3], T> = HashMap::new();
            for (deg, coef) in &poly {
                for axis in 0..3 {
                    let mut d = *deg;
                    d[axis] += 1;
                    let entry = next.entry(d).or_insert(T::zero());
                    *entry = *entry + *coef * v[axis];
                }
            }
            poly = next;
        }
        let fact = |k: usize| (1..=k).fold(T::one(), |acc, i| acc * T::from_usize_lossy(i));
        let components = Self::multidegrees(order)
            .into_iter()
            .map(|deg| {
                let coef = poly.get(&deg).copied().unwrap_or(T::zero());
                coef * fact(deg[0]) * fact(deg[1]) * fact(deg[2]) / fact(order)
            })
            .collect();
        Self { order, components }
    }

    /// Component with explicit indices `i_1, ..., i_n` in `0..3`.
    pub fn get(&self, indices: &[usize]) -> T {
        let mut deg = [0usize; 3];
        for &i in indices {
            deg[i] += 1;
        }
        let pos = Self::multidegrees(self.order).iter().position(|d| *d == deg).expect("index count matches order");
        self.components[pos]
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.components.iter().zip(&other.components).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

/// The `n` branch vectors `A_0, ..., A_{n-1}` at a sample, all from the same circle value.
pub fn branch_vectors<T: Real>(space: &BertrandSpace<T>, sample: &Sample<T>, e: T, j2: T) -> Result<Vec<Vec3<T>>> {
    let n = space.params().n as usize;
    (0..n).map(|k| Ok(runge_lenz_with(space, sample, CoverIndex { k, n }, e, j2)?.a)).collect()
}

/// Conserved tensor at one sample: the symmetrized product of all branch vectors, which
/// does not depend on how the sheets are labelled.
pub fn conserved_tensor_at<T: Real>(
    space: &BertrandSpace<T>,
    sample: &Sample<T>,
    e: T,
    j2: T,
) -> Result<SymmetricTensor<T>> {
    Ok(SymmetricTensor::symmetric_product(&branch_vectors(space, sample, e, j2)?))
}

/// Conserved tensor at `sample_index` of a trajectory that sweeps a full turn of azimuth.
pub fn conserved_tensor<T: Real>(traj: &Trajectory<T>, sample_index: usize) -> Result<SymmetricTensor<T>> {
    let advance = traj.azimuth_advance().abs();
    if advance < T::PI() + T::PI() {
        return Err(Error::InsufficientCoverage { advance: advance.as_f64() });
    }
    let c = crate::dynamics::conserved(&traj.space, &traj.first().state)?;
    let sample =
        traj.samples.get(sample_index).ok_or_else(|| Error::InsufficientData(format!("no sample {sample_index}")))?;
    conserved_tensor_at(&traj.space, sample, c.e, c.j2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, IntegrationSettings, PhaseState};
    use crate::orbits::{circular_state, integrate_radial_periods};
    use crate::spaces::{BertrandParams, Branch};
    use crate::vec3::Mat3;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn space(p: BertrandParams<f64>) -> BertrandSpace<f64> {
        BertrandSpace::new(p).unwrap()
    }

    fn kepler() -> BertrandSpace<f64> {
        space(BertrandParams::type_i(1, 1, 0.0).unwrap().with_amplitude(-1.0).unwrap())
    }

    fn oscillator() -> BertrandSpace<f64> {
        space(BertrandParams::type_ii(2, 1, 0.0, 0.0, Branch::Plus).unwrap().with_amplitude(-1.0).unwrap())
    }

    fn bounded(sp: &BertrandSpace<f64>, r: f64, factor: f64, tilt: f64) -> PhaseState<f64> {
        let c = circular_state(sp, r).unwrap();
        let st = PhaseState::new(c.q, c.p.scale(factor) + Vec3::new(0.05, 0.0, 0.0));
        st.rotated(&Mat3::axis_angle(&Vec3::new(0.6, 0.8, 0.0), tilt.cos(), tilt.sin()))
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_t(2, 0.5), -0.5);
        assert_eq!(chebyshev_u(1, 0.3), 0.6);
        assert_eq!(chebyshev_t(0, 0.3), 1.0);
        assert_eq!(chebyshev_u(0, 0.3), 1.0);
        for m in 1..=7u32 {
            for i in 0..200 {
                let a = i as f64 * PI / 199.0;
                assert!((chebyshev_t(m, a.cos()) - (m as f64 * a).cos()).abs() < 1e-12);
                assert!((chebyshev_u(m - 1, a.cos()) * a.sin() - (m as f64 * a).sin()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn circle_map_at_turning_point_and_m1() {
        let sp = kepler();
        // pericentre of E = -3/8, J = 1
        let cv = circle_map(&sp, 0.0, 4.0 / 9.0, 1.0, -0.375).unwrap();
        assert!((cv.c - 1.0).abs() < 1e-14 && cv.s == 0.0);
        let (x, th) = (chi(&sp, 1.0, 1.0, -0.375).unwrap(), theta(&sp, 0.3, 1.0, 1.0, -0.375).unwrap());
        let cv = circle_map(&sp, 0.3, 1.0, 1.0, -0.375).unwrap();
        assert_eq!((cv.c, cv.s), (x, th));
    }

    #[test]
    fn branch_index_examples() {
        assert_eq!(CoverIndex::of_azimuth(3, 0.5), CoverIndex { k: 0, n: 3 });
        assert_eq!(CoverIndex::of_azimuth(2, 3.5 * PI), CoverIndex { k: 1, n: 2 });
        assert_eq!(CoverIndex::of_azimuth(2, -0.1), CoverIndex { k: 1, n: 2 });
    }

    #[test]
    fn reconstruct_phase_examples() {
        let cv = CircleValue { c: 1.0_f64, s: 0.0 };
        let (c, s) = reconstruct_phase(&cv, CoverIndex::new(1, 2).unwrap()).unwrap();
        assert!((c + 1.0).abs() < 1e-15 && s.abs() < 1e-15);
        let cv = CircleValue { c: 0.6, s: -0.8 };
        let (c, s) = reconstruct_phase(&cv, CoverIndex::new(0, 1).unwrap()).unwrap();
        assert_eq!((c, s), (0.6, -0.8));
        assert!(CoverIndex::new(2, 2).is_err());
        assert!(matches!(
            reconstruct_phase(&CircleValue { c: f64::NAN, s: 0.0 }, CoverIndex { k: 0, n: 2 }),
            Err(Error::InconsistentBranch { .. })
        ));
        assert!(reconstruct_phase(&cv, CoverIndex { k: 3, n: 2 }).is_err());
    }

    proptest! {
        #[test]
        fn reconstruct_inverts_the_nth_power(phi in 0.0..(2.0 * PI), n in 1usize..6) {
            let cv = CircleValue { c: (n as f64 * phi).cos(), s: (n as f64 * phi).sin() };
            let k = CoverIndex::of_azimuth(n, phi);
            let (c, s) = reconstruct_phase(&cv, k).unwrap();
            // phi itself may sit a rounding error across a sector boundary
            let near = nearest_branch(&cv, n, phi);
            let (c2, s2) = reconstruct_phase(&cv, near).unwrap();
            prop_assert!((c2 - phi.cos()).abs() < 1e-12 && (s2 - phi.sin()).abs() < 1e-12);
            let boundary = (n as f64 * phi / (2.0 * PI)).fract();
            if boundary > 1e-9 && boundary < 1.0 - 1e-9 {
                prop_assert!((c - phi.cos()).abs() < 1e-9 && (s - phi.sin()).abs() < 1e-9);
            }
        }

        #[test]
        fn symmetric_product_matches_permutation_sum(seed in 0u64..1000, order in 1usize..5) {
            let mut x = seed as f64 * 0.618_033_988_7;
            let mut next = || { x = (x * 7.3 + 0.41).fract(); x - 0.5 };
            let vs: Vec<Vec3<f64>> = (0..order).map(|_| Vec3::new(next(), next(), next())).collect();
            let t = SymmetricTensor::symmetric_product(&vs);
            prop_assert_eq!(t.components.len(), (order + 1) * (order + 2) / 2);
            for deg in SymmetricTensor::<f64>::multidegrees(order) {
                let idx: Vec<usize> = (0..3).flat_map(|a| std::iter::repeat_n(a, deg[a])).collect();
                let mut total = 0.0;
                let mut count = 0.0;
                permute(&mut (0..order).collect::<Vec<_>>(), 0, &mut |perm| {
                    total += perm.iter().zip(&idx).map(|(&v, &i)| vs[v][i]).product::<f64>();
                    count += 1.0;
                });
                prop_assert!((t.get(&idx) - total / count).abs() < 1e-14);
            }
        }
    }

    fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
        if start == items.len() {
            visit(items);
            return;
        }
        for i in start..items.len() {
            items.swap(start, i);
            permute(items, start + 1, visit);
            items.swap(start, i);
        }
    }

    #[test]
    fn circle_map_tracks_the_azimuth() {
        let sp = space(BertrandParams::type_ii(3, 2, 0.5, 0.2, Branch::Plus).unwrap().with_amplitude(-1.0).unwrap());
        let st = bounded(&sp, 0.6, 1.1, 0.0);
        let traj = integrate_radial_periods(&sp, &st, 3.0, &IntegrationSettings::default()).unwrap().0;
        let c = fit_phi0(&traj).unwrap();
        for s in &traj.samples {
            let cv = circle_value_of(&sp, s, c.e, c.j2).unwrap();
            let psi = 3.0 * s.phi_unwrapped - 2.0 * c.phi0;
            assert!((cv.c - psi.cos()).abs() < 1e-7 && (cv.s - psi.sin()).abs() < 1e-7);
            assert!((cv.modulus() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn perihelion_on_axis_gives_radial_unit_vector() {
        let sp = kepler();
        let st = PhaseState::new(Vec3::new(2.0 / 3.0, 0.0, 0.0), Vec3::new(0.0, 1.5, 0.0));
        let traj = integrate(&sp, &st, 1.0, &IntegrationSettings::default()).unwrap();
        let k = branch_index(&traj, 0);
        let a = runge_lenz(&sp, traj.first(), k).unwrap();
        assert!((a.a - Vec3::new(1.0, 0.0, 0.0)).max_abs() < 1e-14);
    }

    #[test]
    fn kepler_vector_is_classical() {
        let sp = kepler();
        let st = bounded(&sp, 1.0, 1.2, 0.7);
        let traj = integrate_radial_periods(&sp, &st, 10.0, &IntegrationSettings::default()).unwrap().0;
        let (_, rl) = runge_lenz_trajectory(&traj).unwrap();
        for (s, a) in traj.samples.iter().zip(&rl) {
            let q = s.state.q;
            let classical = s.state.p.cross(&q.cross(&s.state.p)) - q.scale(q.norm().recip());
            let sine = a.a.cross(&classical.normalized().unwrap()).norm();
            assert!(sine < 1e-7, "{sine}");
            assert!(a.a.dot(&classical) > 0.0);
            assert!((a.a.norm() - 1.0).abs() < 1e-9);
            assert!((a.a - rl[0].a).max_abs() < 1e-6);
        }
    }

    #[test]
    fn vector_is_constant_across_branch_changes() {
        let cases = [
            (space(BertrandParams::type_ii(3, 2, 0.5, 0.2, Branch::Plus).unwrap().with_amplitude(-1.0).unwrap()), 0.6),
            (space(BertrandParams::type_i(3, 2, -0.2).unwrap().with_amplitude(-1.0).unwrap()), 0.8),
            (space(BertrandParams::type_ii(2, 1, 4.0, -2.0, Branch::Plus).unwrap().with_amplitude(-1.0).unwrap()), 0.5),
        ];
        for (sp, r) in cases {
            let st = bounded(&sp, r, 1.08, 1.2);
            let traj = integrate_radial_periods(&sp, &st, 10.0, &IntegrationSettings::default()).unwrap().0;
            let (_, rl) = runge_lenz_trajectory(&traj).unwrap();
            let mut changes = 0;
            for w in rl.windows(2) {
                if w[0].k != w[1].k {
                    changes += 1;
                }
            }
            assert!(changes >= sp.params().n as usize);
            for a in &rl {
                assert!((a.a.norm() - 1.0).abs() < 1e-9);
                assert!((a.a - rl[0].a).max_abs() < 1e-6, "{}: {:?} vs {:?}", sp.params(), a, rl[0]);
            }
        }
    }

    #[test]
    fn n1_vector_ignores_the_branch() {
        let sp = space(BertrandParams::type_i(1, 2, 0.3).unwrap().with_amplitude(-1.0).unwrap());
        let traj = integrate(&sp, &bounded(&sp, 0.6, 1.1, 0.3), 5.0, &IntegrationSettings::default()).unwrap();
        for s in traj.samples.iter().step_by(7) {
            let a = runge_lenz(&sp, s, CoverIndex { k: 0, n: 1 }).unwrap();
            let t =
                conserved_tensor_at(&sp, s, hamiltonian_of(&sp, s), s.state.angular_momentum().norm_squared()).unwrap();
            assert_eq!(t.components, a.a.0.to_vec());
        }
    }

    fn hamiltonian_of(sp: &BertrandSpace<f64>, s: &Sample<f64>) -> f64 {
        crate::dynamics::hamiltonian(sp, &s.state).unwrap()
    }

    #[test]
    fn vector_is_not_a_function_of_e_and_l() {
        // same E and L, orbits rotated within their plane
        let sp = kepler();
        let st = bounded(&sp, 1.0, 1.2, 0.0);
        let rot = Mat3::axis_angle(&Vec3::unit(2), 0.0, 1.0);
        let a1 =
            runge_lenz_trajectory(&integrate(&sp, &st, 3.0, &IntegrationSettings::default()).unwrap()).unwrap().1[0];
        let a2 =
            runge_lenz_trajectory(&integrate(&sp, &st.rotated(&rot), 3.0, &IntegrationSettings::default()).unwrap())
                .unwrap()
                .1[0];
        assert!((a1.a - a2.a).norm() > 0.1);
    }

    #[test]
    fn radial_states_are_flagged() {
        let sp = kepler();
        let st = PhaseState::new(Vec3::new(1.0, 0.5, 0.0), Vec3::new(0.2, 0.1, 0.0));
        let traj = integrate(&sp, &st, 0.5, &IntegrationSettings::default()).unwrap();
        let (_, rl) = runge_lenz_trajectory(&traj).unwrap();
        assert!(rl.iter().all(|a| a.radial && a.a.is_finite()));
        assert!(branch_tracking(&traj).windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn branch_counting_over_a_closed_orbit() {
        // (n, m) = (3, 2): azimuth advances by 4 pi per closure, each sheet entered twice
        let sp = space(BertrandParams::type_i(3, 2, -0.2).unwrap().with_amplitude(-1.0).unwrap());
        let st = circular_state(&sp, 0.8).unwrap();
        let period = 2.0 * PI * 0.8 / st.p.norm();
        let traj = integrate(&sp, &st, 2.0 * period, &IntegrationSettings::default()).unwrap();
        let ks = branch_tracking(&traj);
        let mut entries = [0usize; 3];
        for w in ks.windows(2) {
            if w[0] != w[1] {
                assert_eq!(w[1].k, (w[0].k + 1) % 3);
                entries[w[1].k] += 1;
            }
        }
        // the last crossing lands exactly at 4 pi and may fall on either side
        let total: usize = entries.iter().sum();
        assert!(total == 5 || total == 6, "{entries:?}");
        assert!(entries[1] == 2 && entries[2] == 2, "{entries:?}");
    }

    #[test]
    fn oscillator_tensor_matches_classical() {
        use nalgebra::{Matrix3, SymmetricEigen};
        let sp = oscillator();
        let st = bounded(&sp, 0.8, 1.2, 0.9);
        let traj = integrate_radial_periods(&sp, &st, 4.0, &IntegrationSettings::default()).unwrap().0;
        let c0 = conserved_tensor(&traj, 0).unwrap();
        assert_eq!(c0.components.len(), 6);
        let omega2 = 0.5; // V = r^2 / 2 = omega^2 r^2 with omega^2 = 1/2
        for (i, s) in traj.samples.iter().enumerate().step_by(5) {
            let t = conserved_tensor(&traj, i).unwrap();
            assert!(t.max_abs_diff(&c0) < 1e-6);
            let (q, p) = (s.state.q, s.state.p);
            let classical = Matrix3::from_fn(|a, b| 2.0 * omega2 * q[a] * q[b] + p[a] * p[b]);
            let ours = Matrix3::from_fn(|a, b| t.get(&[a, b]));
            let ce = SymmetricEigen::new(classical);
            let oe = SymmetricEigen::new(ours);
            // ours is -A A^T: its only non-degenerate eigenvector is A, an axis of the ellipse
            let idx = (0..3).min_by(|&x, &y| oe.eigenvalues[x].partial_cmp(&oe.eigenvalues[y]).unwrap()).unwrap();
            let axis = oe.eigenvectors.column(idx);
            let best = (0..3).map(|j| axis.dot(&ce.eigenvectors.column(j)).abs()).fold(0.0, f64::max);
            assert!(best.min(1.0).acos() < 1e-5, "angle {}", best.min(1.0).acos());
        }
    }

    #[test]
    fn tensor_requires_a_full_turn() {
        let sp = oscillator();
        let traj = integrate(&sp, &bounded(&sp, 0.8, 1.2, 0.0), 0.5, &IntegrationSettings::default()).unwrap();
        assert!(matches!(conserved_tensor(&traj, 0), Err(Error::InsufficientCoverage { .. })));
    }

    #[test]
    fn tensor_is_invariant_under_sheet_relabelling() {
        let sp = space(BertrandParams::type_i(3, 2, -0.2).unwrap().with_amplitude(-1.0).unwrap());
        let traj = integrate(&sp, &bounded(&sp, 0.8, 1.1, 0.4), 3.0, &IntegrationSettings::default()).unwrap();
        let s = &traj.samples[10];
        let c = crate::dynamics::conserved(&sp, &s.state).unwrap();
        let vs = branch_vectors(&sp, s, c.e, c.j2).unwrap();
        let base = SymmetricTensor::symmetric_product(&vs);
        for shift in 1..3 {
            let rotated: Vec<_> = (0..3).map(|k| vs[(k + shift) % 3]).collect();
            assert!(SymmetricTensor::symmetric_product(&rotated).max_abs_diff(&base) < 1e-15);
        }
        assert_relative_eq!(vs[0].norm(), 1.0, max_relative = 1e-9);
    }
}
