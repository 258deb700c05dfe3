//! Bertrand spaces: the two metric/potential families, their radial domains,
//! the intrinsic Kepler/oscillator potentials and the rectangular chart.
//!
//! A Bertrand space is the Riemannian 3-manifold with metric
//! `h(r)^2 dr^2 + r^2 dOmega^2` where `h^2` is one of
//!
//! * type I:  `m^2 / (n^2 (1 + K r^2))`
//! * type II: `2 m^2 (1 - D r^2 +/- sqrt((1 - D r^2)^2 - K r^4)) / (n^2 ((1 - D r^2)^2 - K r^4))`
//!
//! with coprime positive integers `n`, `m`. Type I carries the Kepler potential
//! `sqrt(r^-2 + K) + G` and type II the oscillator potential
//! `G -/+ r^2 / (1 - D r^2 +/- sqrt(...))`.

use std::fmt;

use crate::error::{Error, Result};
use crate::quadrature::{self, Estimate};
use crate::scalar::Real;
use crate::vec3::{Mat3, Vec3};

/// Sign choice of the square root in the type II family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }

    pub fn from_sign(s: i32) -> Option<Self> {
        match s {
            1 => Some(Branch::Plus),
            -1 => Some(Branch::Minus),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    /// Kepler-like family.
    TypeI,
    /// Oscillator-like family with its extra constant `D` and root branch.
    TypeII { d: T, branch: Branch },
}

/// Full parameter set of a Bertrand space together with its potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BertrandParams<T> {
    pub family: Family<T>,
    pub n: u32,
    pub m: u32,
    pub k: T,
    /// Additive potential constant.
    pub g: T,
    /// Multiplicative potential constant; `1` gives the classified potentials verbatim.
    pub amplitude: T,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl<T: Real> BertrandParams<T> {
    pub fn type_i(n: u32, m: u32, k: T) -> Result<Self> {
        Self::new(Family::TypeI, n, m, k, T::zero(), T::one())
    }

    pub fn type_ii(n: u32, m: u32, k: T, d: T, branch: Branch) -> Result<Self> {
        Self::new(Family::TypeII { d, branch }, n, m, k, T::zero(), T::one())
    }

    pub fn new(family: Family<T>, n: u32, m: u32, k: T, g: T, amplitude: T) -> Result<Self> {
        let params = Self { family, n, m, k, g, amplitude };
        params.validate()?;
        Ok(params)
    }

    pub fn with_g(mut self, g: T) -> Self {
        self.g = g;
        self
    }

    /// Replaces the amplitude. Zero or non-finite values are rejected.
    pub fn with_amplitude(mut self, amplitude: T) -> Result<Self> {
        self.amplitude = amplitude;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidParams(format!("n and m must be positive (n = {}, m = {})", self.n, self.m)));
        }
        if gcd(self.n, self.m) != 1 {
            return Err(Error::InvalidParams(format!("n = {} and m = {} are not coprime", self.n, self.m)));
        }
        if !(self.amplitude.is_finite() && self.amplitude != T::zero()) {
            return Err(Error::InvalidParams("amplitude must be finite and nonzero".into()));
        }
        let d_ok = match self.family {
            Family::TypeI => true,
            Family::TypeII { d, .. } => d.is_finite(),
        };
        if !(self.k.is_finite() && self.g.is_finite() && d_ok) {
            return Err(Error::InvalidParams("K, D and G must be finite".into()));
        }
        Ok(())
    }

    pub fn is_type_i(&self) -> bool {
        matches!(self.family, Family::TypeI)
    }

    /// The constant `D`; an error for type I, which has none.
    pub fn d(&self) -> Result<T> {
        match self.family {
            Family::TypeI => Err(Error::InvalidParams("type I spaces have no D".into())),
            Family::TypeII { d, .. } => Ok(d),
        }
    }

    /// The root branch; an error for type I, which has none.
    pub fn branch(&self) -> Result<Branch> {
        match self.family {
            Family::TypeI => Err(Error::InvalidParams("type I spaces have no branch".into())),
            Family::TypeII { branch, .. } => Ok(branch),
        }
    }

    /// `(m / n)^2`, the overall radial scale of the metric.
    pub fn ratio_squared(&self) -> T {
        let q = T::from_u32(self.m).unwrap() / T::from_u32(self.n).unwrap();
        q * q
    }
}

impl<T: Real> fmt::Display for BertrandParams<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::TypeI => write!(
                f,
                "type I (n = {}, m = {}, K = {}, G = {}, amplitude = {})",
                self.n, self.m, self.k, self.g, self.amplitude
            ),
            Family::TypeII { d, branch } => write!(
                f,
                "type II{} (n = {}, m = {}, K = {}, D = {}, G = {}, amplitude = {})",
                if branch == Branch::Plus { "+" } else { "-" },
                self.n,
                self.m,
                self.k,
                d,
                self.g,
                self.amplitude
            ),
        }
    }
}

/// Open interval `(lo, hi)` of radii on which the metric coefficient is finite and positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialDomain<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> RadialDomain<T> {
    pub fn contains(&self, r: T) -> bool {
        r > self.lo && r < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }

    /// A representative interior radius.
    pub fn interior_point(&self) -> T {
        if self.hi.is_finite() {
            (self.lo + self.hi) * T::half()
        } else if self.lo > T::zero() {
            self.lo * T::two()
        } else {
            T::one()
        }
    }

    fn check(&self, r: T) -> Result<()> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(Error::Domain { r: r.as_f64(), lo: self.lo.as_f64(), hi: self.hi.as_f64() })
        }
    }
}

/// Pieces of the type II expressions evaluated at `x = r^2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TypeIIParts<T> {
    /// `(1 - D x)^2 - K x^2`
    pub radicand: T,
    pub sqrt_radicand: T,
    /// `1 - D x + s sqrt(radicand)`, evaluated without cancellation.
    pub numerator: T,
    /// `numerator / x`
    pub v: T,
}

/// A validated Bertrand space with its radial domain resolved once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BertrandSpace<T> {
    params: BertrandParams<T>,
    domain: RadialDomain<T>,
}

impl<T: Real> BertrandSpace<T> {
    pub fn new(params: BertrandParams<T>) -> Result<Self> {
        params.validate()?;
        let domain = radial_domain(&params)?;
        Ok(Self { params, domain })
    }

    pub fn params(&self) -> &BertrandParams<T> {
        &self.params
    }

    pub fn domain(&self) -> &RadialDomain<T> {
        &self.domain
    }

    pub fn check_radius(&self, r: T) -> Result<()> {
        self.domain.check(r)
    }

    /// Type II building blocks at `x = r^2`, or `None` when the radicand is negative.
    pub(crate) fn type_ii_parts(&self, x: T) -> Option<TypeIIParts<T>> {
        let Family::TypeII { d, branch } = self.params.family else {
            return None;
        };
        type_ii_parts(self.params.k, d, branch.sign(), x)
    }

    /// `h(r)^2`.
    pub fn metric_coeff(&self, r: T) -> Result<T> {
        self.check_radius(r)?;
        let h2 = metric_coeff_unchecked(&self.params, r).ok_or_else(|| self.domain_err(r))?;
        if h2.is_finite() && h2 > T::zero() {
            Ok(h2)
        } else {
            Err(self.domain_err(r))
        }
    }

    /// Radial potential `V(r)`.
    pub fn potential(&self, r: T) -> Result<T> {
        self.check_radius(r)?;
        let p = &self.params;
        let x = r * r;
        let v = match p.family {
            Family::TypeI => p.amplitude * (x.recip() + p.k).sqrt() + p.g,
            Family::TypeII { branch, .. } => {
                let parts = self.type_ii_parts(x).ok_or_else(|| self.domain_err(r))?;
                p.g - branch.sign::<T>() * p.amplitude / parts.v
            }
        };
        v.is_finite().then_some(v).ok_or_else(|| self.domain_err(r))
    }

    /// Returns `(h^-2, d(h^-2)/dr, dV/dr)` at `r`, the radial data needed by the flow.
    pub fn radial_jet(&self, r: T) -> Result<(T, T, T)> {
        self.check_radius(r)?;
        let p = &self.params;
        let x = r * r;
        let inv_ratio = p.ratio_squared().recip();
        let two = T::two();
        let out = match p.family {
            Family::TypeI => {
                let g = inv_ratio * (T::one() + p.k * x);
                let dg = two * inv_ratio * p.k * r;
                let u = (x.recip() + p.k).sqrt();
                let dv = -p.amplitude / (x * r * u);
                (g, dg, dv)
            }
            Family::TypeII { d, branch } => {
                let s = branch.sign::<T>();
                let parts = self.type_ii_parts(x).ok_or_else(|| self.domain_err(r))?;
                let TypeIIParts { radicand, sqrt_radicand, v, .. } = parts;
                // dv/dx = -s v / (x sqrt(R)); h^-2 = R / (2 (m/n)^2 x v)
                let dv_dx = -s * v / (x * sqrt_radicand);
                let w = T::one() - d * x;
                let dr_dx = -two * d * w - two * p.k * x;
                let xv = x * v;
                let dxv_dx = v + x * dv_dx;
                let g = inv_ratio * radicand / (two * xv);
                let dg_dx = inv_ratio * (dr_dx * xv - radicand * dxv_dx) / (two * xv * xv);
                let dpot_dx = -p.amplitude / (x * sqrt_radicand * v);
                (g, two * r * dg_dx, two * r * dpot_dx)
            }
        };
        if out.0.is_finite() && out.1.is_finite() && out.2.is_finite() && out.0 > T::zero() {
            Ok(out)
        } else {
            Err(self.domain_err(r))
        }
    }

    /// The metric of the space in the rectangular chart,
    /// `I + (h^2 - 1) q q^T / |q|^2`.
    pub fn cartesian_metric(&self, q: &Vec3<T>) -> Result<Mat3<T>> {
        let r = q.norm();
        let h2 = self.metric_coeff(r)?;
        let c = (h2 - T::one()) / (r * r);
        let mut m = Mat3::identity();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = m.0[i][j] + c * q.0[i] * q.0[j];
            }
        }
        Ok(m)
    }

    /// `h(r)` as a closure, for the profile-generic potential and Laplacian routines.
    pub fn h_profile(&self) -> impl Fn(T) -> T + '_ {
        move |r| self.metric_coeff(r).map(|h2| h2.sqrt()).unwrap_or(T::nan())
    }

    fn domain_err(&self, r: T) -> Error {
        Error::Domain { r: r.as_f64(), lo: self.domain.lo.as_f64(), hi: self.domain.hi.as_f64() }
    }
}

pub(crate) fn type_ii_parts<T: Real>(k: T, d: T, s: T, x: T) -> Option<TypeIIParts<T>> {
    let w = T::one() - d * x;
    let radicand = w * w - k * x * x;
    if !(radicand >= T::zero()) {
        return None;
    }
    let sqrt_radicand = radicand.sqrt();
    // w + s sqrt(R) == K x^2 / (w - s sqrt(R)); use whichever form avoids cancellation
    let numerator = if s * w >= T::zero() { w + s * sqrt_radicand } else { k * x * x / (w - s * sqrt_radicand) };
    Some(TypeIIParts { radicand, sqrt_radicand, numerator, v: numerator / x })
}

/// `h(r)^2` without the domain check; `None` when the radicand is negative.
fn metric_coeff_unchecked<T: Real>(p: &BertrandParams<T>, r: T) -> Option<T> {
    let x = r * r;
    match p.family {
        Family::TypeI => Some(p.ratio_squared() / (T::one() + p.k * x)),
        Family::TypeII { d, branch } => {
            let parts = type_ii_parts(p.k, d, branch.sign(), x)?;
            Some(T::two() * p.ratio_squared() * parts.numerator / parts.radicand)
        }
    }
}

fn positive_at<T: Real>(p: &BertrandParams<T>, r: T) -> bool {
    metric_coeff_unchecked(p, r).is_some_and(|h2| h2.is_finite() && h2 > T::zero())
}

/// Maximal open radial interval on which `h^2` is finite and positive.
///
/// Type II degeneracies sit at the positive roots of the radicand, a quadratic in
/// `r^2`; the interval adjacent to the origin is preferred, then the next valid one.
pub fn radial_domain<T: Real>(params: &BertrandParams<T>) -> Result<RadialDomain<T>> {
    let k = params.k;
    match params.family {
        Family::TypeI => {
            let hi = if k < T::zero() { (-k).recip().sqrt() } else { T::infinity() };
            Ok(RadialDomain { lo: T::zero(), hi })
        }
        Family::TypeII { d, .. } => {
            let mut breaks: Vec<T> = Vec::new();
            if k > T::zero() {
                let sk = k.sqrt();
                breaks.extend([d + sk, d - sk].into_iter().filter(|&den| den > T::zero()).map(|den| den.recip()));
            } else if k == T::zero() && d > T::zero() {
                breaks.push(d.recip());
            }
            breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
            breaks.dedup();
            let mut edges = vec![T::zero()];
            edges.extend(breaks);
            edges.push(T::infinity());
            for w in edges.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let probe = if hi.is_finite() { (lo + hi) * T::half() } else { lo * T::two() + T::one() };
                if positive_at(params, probe.sqrt()) {
                    return Ok(RadialDomain { lo: lo.sqrt(), hi: hi.sqrt() });
                }
            }
            sign_scan(params)
        }
    }
}

/// Fallback: locate a positive cell on a logarithmic grid and bisect outwards.
fn sign_scan<T: Real>(params: &BertrandParams<T>) -> Result<RadialDomain<T>> {
    const CELLS: usize = 10_000;
    let (lmin, lmax) = (-6.0_f64, 6.0_f64);
    let grid = |i: usize| T::lit(10f64.powf(lmin + (lmax - lmin) * i as f64 / CELLS as f64));
    let start = (0..=CELLS).find(|&i| positive_at(params, grid(i))).ok_or(Error::EmptyDomain)?;
    let bisect = |mut good: T, mut bad: T| {
        for _ in 0..200 {
            let mid = (good + bad) * T::half();
            if positive_at(params, mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        bad
    };
    let mut hi_idx = start;
    while hi_idx < CELLS && positive_at(params, grid(hi_idx + 1)) {
        hi_idx += 1;
    }
    let lo = if start == 0 { T::zero() } else { bisect(grid(start), grid(start - 1)) };
    let hi = if hi_idx == CELLS { T::infinity() } else { bisect(grid(hi_idx), grid(hi_idx + 1)) };
    Ok(RadialDomain { lo, hi })
}

/// Which intrinsic potential to build from the Green-function integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Kepler,
    Oscillator,
}

/// Intrinsic Kepler or oscillator potential of an arbitrary radial profile `h`:
/// `A (I + B)` or `A (I + B)^-2` with `I = int_a^r s^-2 h(s) ds`.
pub fn intrinsic_potential<T: Real, F: Fn(T) -> T>(
    h_profile: F,
    r: T,
    a: T,
    amp: T,
    b: T,
    kind: PotentialKind,
) -> Result<Estimate<T>> {
    let integral = quadrature::integrate(|s: T| h_profile(s) / (s * s), a, r, T::lit(1e-12))?;
    let inner = integral.value + b;
    match kind {
        PotentialKind::Kepler => Ok(Estimate { value: amp * inner, error: amp.abs() * integral.error }),
        PotentialKind::Oscillator => {
            if inner.abs() <= T::epsilon() * (T::one() + b.abs()) {
                return Err(Error::SingularInner { r: r.as_f64() });
            }
            let value = amp / (inner * inner);
            // first-order propagation of the quadrature error through x^-2
            let error = (T::two() * value / inner).abs() * integral.error;
            Ok(Estimate { value, error })
        }
    }
}

/// Default relative step for [`radial_laplacian`].
pub const LAPLACIAN_REL_STEP: f64 = 0.08;

const LAPLACIAN_LEVELS: usize = 4;
const LAPLACIAN_MAX_HALVINGS: usize = 10;

/// Laplacian of a radial function, `(r^2 h)^-1 d/dr (r^2 / h du/dr)`.
///
/// Uses the conservative three-point flux stencil at steps `delta, delta/2, delta/4,
/// delta/8` with a full Romberg table in `delta^2`, where `delta` is `rel_step` times
/// the distance to the origin or to the nearer domain endpoint, whichever is smaller.
/// Endpoints are located by probing for non-finite `h` or `u`.
pub fn radial_laplacian<T: Real, H: Fn(T) -> T, U: Fn(T) -> T>(h: H, u: U, r: T, rel_step: T) -> Result<T> {
    let domain_err = || Error::Domain { r: r.as_f64(), lo: f64::NAN, hi: f64::NAN };
    let hr = h(r);
    if !(r > T::zero() && hr.is_finite() && hr > T::zero()) {
        return Err(domain_err());
    }
    let u0 = u(r);
    if !u0.is_finite() {
        return Err(domain_err());
    }
    let stencil = |delta: T| -> Option<T> {
        let half = delta * T::half();
        let (rp, rm) = (r + half, r - half);
        let (hp, hm) = (h(rp), h(rm));
        let (up, um) = (u(r + delta), u(r - delta));
        let ok = [hp, hm].iter().all(|x| x.is_finite() && *x > T::zero())
            && [up, um].iter().all(|x| x.is_finite())
            && r - delta > T::zero();
        if !ok {
            return None;
        }
        let flux_p = rp * rp / hp * (up - u0);
        let flux_m = rm * rm / hm * (u0 - um);
        Some((flux_p - flux_m) / (delta * delta * r * r * hr))
    };
    let romberg = |delta: T| -> Option<T> {
        let mut table = Vec::with_capacity(LAPLACIAN_LEVELS);
        let mut d = delta;
        for _ in 0..LAPLACIAN_LEVELS {
            table.push(stencil(d)?);
            d = d * T::half();
        }
        let mut factor = T::one();
        for j in 1..LAPLACIAN_LEVELS {
            factor = factor * T::lit(4.0);
            for i in (j..LAPLACIAN_LEVELS).rev() {
                table[i] = (factor * table[i] - table[i - 1]) / (factor - T::one());
            }
        }
        Some(table[LAPLACIAN_LEVELS - 1])
    };
    // distance to the nearest endpoint, to within a factor of two
    let inside = |t: T| {
        [h(r + t), h(r - t)].iter().all(|x| x.is_finite() && *x > T::zero())
            && u(r + t).is_finite()
            && u(r - t).is_finite()
    };
    let mut reach = r * T::half();
    let mut halvings = 0;
    while !inside(reach) {
        halvings += 1;
        if halvings > LAPLACIAN_MAX_HALVINGS {
            return Err(domain_err());
        }
        reach = reach * T::half();
    }
    let delta = T::two() * rel_step * reach;
    romberg(delta).ok_or_else(domain_err)
}

/// Rectangular coordinates `(r cos(theta) cos(phi), r cos(theta) sin(phi), r sin(theta))`.
pub fn to_cartesian<T: Real>(r: T, theta: T, phi: T) -> Vec3<T> {
    Vec3::new(r * theta.cos() * phi.cos(), r * theta.cos() * phi.sin(), r * theta.sin())
}

/// Inverse of [`to_cartesian`], returning `(r, theta, phi)` with `theta` in `[-pi/2, pi/2]`.
pub fn from_cartesian<T: Real>(q: &Vec3<T>) -> Result<(T, T, T)> {
    let r = q.norm();
    if r == T::zero() {
        return Err(Error::Origin);
    }
    let rho = q[0].hypot(q[1]);
    Ok((r, q[2].atan2(rho), q[1].atan2(q[0])))
}

/// Potential paired with a constant-curvature example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvaturePotential {
    Kepler,
    Oscillator,
}

/// The named spaces of the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExampleName<T> {
    ConstantCurvature {
        kappa: T,
        potential: CurvaturePotential,
    },
    DarbouxIII {
        k: T,
    },
    /// Multifold Kepler system; `c`, `d` and `mu` only shape its potential and are
    /// carried for reporting.
    MultifoldKepler {
        a: T,
        b: T,
        c: T,
        d: T,
        mu: T,
        n: u32,
        m: u32,
    },
}

impl<T: Real> ExampleName<T> {
    pub fn slug(&self) -> &'static str {
        match self {
            ExampleName::ConstantCurvature { potential: CurvaturePotential::Kepler, .. } => "constant-curvature",
            ExampleName::ConstantCurvature { .. } => "constant-curvature-oscillator",
            ExampleName::DarbouxIII { .. } => "darboux-iii",
            ExampleName::MultifoldKepler { .. } => "multifold-kepler",
        }
    }
}

/// Coordinates `Q = rho(r) q / |q|` in which a catalog example takes its textbook form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QTransform<T> {
    /// `rho = ((sqrt(k^2 + 4 r^2) - k) / 2)^(1/2)`, metric `(k + |Q|^2) |dQ|^2`.
    Darboux { k: T },
    /// `rho = ((sqrt(a^2 + 4 b r^2) - a) / (2 b))^(m/n)`,
    /// metric `|Q|^(n/m - 2) (a + b |Q|^(n/m)) |dQ|^2`.
    Multifold { a: T, b: T, n: u32, m: u32 },
}

impl<T: Real> QTransform<T> {
    pub fn radius(&self, r: T) -> T {
        match *self {
            QTransform::Darboux { k } => (((k * k + T::lit(4.0) * r * r).sqrt() - k) * T::half()).sqrt(),
            QTransform::Multifold { a, b, n, m } => {
                let base = ((a * a + T::lit(4.0) * b * r * r).sqrt() - a) / (T::two() * b);
                base.powf(T::from_u32(m).unwrap() / T::from_u32(n).unwrap())
            }
        }
    }

    pub fn apply(&self, q: &Vec3<T>) -> Result<Vec3<T>> {
        let r = q.norm();
        if r == T::zero() {
            return Err(Error::Origin);
        }
        Ok(q.scale(self.radius(r) / r))
    }

    /// Conformal factor `c(Q)` of the textbook metric `c(Q) |dQ|^2`.
    pub fn conformal_factor(&self, big_q: &Vec3<T>) -> T {
        let rho = big_q.norm();
        match *self {
            QTransform::Darboux { k } => k + rho * rho,
            QTransform::Multifold { a, b, n, m } => {
                let e = T::from_u32(n).unwrap() / T::from_u32(m).unwrap();
                rho.powf(e - T::two()) * (a + b * rho.powf(e))
            }
        }
    }
}

/// Catalog entry: a named space, its Bertrand parameters and optional coordinate change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NamedExample<T> {
    pub name: ExampleName<T>,
    pub params: BertrandParams<T>,
    pub transform: Option<QTransform<T>>,
}

impl<T: Real> NamedExample<T> {
    pub fn new(name: ExampleName<T>) -> Result<Self> {
        let four = T::lit(4.0);
        let (params, transform) = match name {
            ExampleName::ConstantCurvature { kappa, potential: CurvaturePotential::Kepler } => {
                (BertrandParams::type_i(1, 1, -kappa)?, None)
            }
            ExampleName::ConstantCurvature { kappa, potential: CurvaturePotential::Oscillator } => {
                (BertrandParams::type_ii(2, 1, T::zero(), kappa, Branch::Plus)?, None)
            }
            ExampleName::DarbouxIII { k } => {
                if !(k > T::zero()) {
                    return Err(Error::InvalidParams("Darboux III needs k > 0".into()));
                }
                let k2 = k * k;
                let params = BertrandParams::type_ii(2, 1, four / (k2 * k2), -T::two() / k2, Branch::Plus)?;
                (params, Some(QTransform::Darboux { k }))
            }
            ExampleName::MultifoldKepler { a, b, n, m, .. } => {
                if !(a > T::zero() && b > T::zero()) {
                    return Err(Error::InvalidParams("multifold Kepler needs a > 0 and b > 0".into()));
                }
                let a2 = a * a;
                let params = BertrandParams::type_ii(n, m, four * b * b / (a2 * a2), -T::two() * b / a2, Branch::Plus)?;
                (params, Some(QTransform::Multifold { a, b, n, m }))
            }
        };
        Ok(Self { name, params, transform })
    }
}

/// Looks up a catalog entry by slug. Missing example parameters default to 1
/// (`kappa` defaults to 0 and `n`, `m` of the multifold family to 2 and 1).
pub fn example_by_name<T: Real>(slug: &str, param: impl Fn(&str) -> Option<T>) -> Result<NamedExample<T>> {
    let get = |key: &str, default: f64| param(key).unwrap_or(T::lit(default));
    let int = |key: &str, default: u32| param(key).and_then(|x| x.to_u32()).unwrap_or(default);
    let name = match slug {
        "constant-curvature" => {
            ExampleName::ConstantCurvature { kappa: get("kappa", 0.0), potential: CurvaturePotential::Kepler }
        }
        "constant-curvature-oscillator" => {
            ExampleName::ConstantCurvature { kappa: get("kappa", 0.0), potential: CurvaturePotential::Oscillator }
        }
        "darboux-iii" => ExampleName::DarbouxIII { k: get("k_d", 1.0) },
        "multifold-kepler" => ExampleName::MultifoldKepler {
            a: get("a", 1.0),
            b: get("b", 1.0),
            c: get("c", 0.0),
            d: get("d", 0.0),
            mu: get("mu", 1.0),
            n: int("n", 2),
            m: int("m", 1),
        },
        other => return Err(Error::UnknownExample(other.to_string())),
    };
    NamedExample::new(name)
}

/// Slugs accepted by [`example_by_name`].
pub const EXAMPLE_SLUGS: [&str; 4] =
    ["constant-curvature", "constant-curvature-oscillator", "darboux-iii", "multifold-kepler"];
