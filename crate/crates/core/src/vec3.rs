//! Minimal fixed-size linear algebra for the rectangular chart.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Real> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self([x, y, z])
    }

    pub fn zero() -> Self {
        Self([T::zero(); 3])
    }

    pub fn unit(axis: usize) -> Self {
        let mut v = Self::zero();
        v.0[axis] = T::one();
        v
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, other: &Self) -> Self {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        Self([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.map(|x| x * s))
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero() && n.is_finite()).then(|| self.scale(n.recip()))
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn to_f64(&self) -> [f64; 3] {
        self.0.map(|x| x.as_f64())
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|x| -x))
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self([[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]])
    }

    pub fn apply(&self, v: &Vec3<T>) -> Vec3<T> {
        let m = &self.0;
        Vec3([0, 1, 2].map(|i| m[i][0] * v.0[0] + m[i][1] * v.0[1] + m[i][2] * v.0[2]))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).fold(T::zero(), |acc, k| acc + self.0[i][k] * other.0[k][j]);
            }
        }
        Self(out)
    }

    /// Rotation taking the unit vector `from` onto the unit vector `to` along the
    /// shortest arc. Antiparallel inputs rotate by pi about an axis orthogonal to `from`.
    pub fn rotation_between(from: &Vec3<T>, to: &Vec3<T>) -> Self {
        let c = from.dot(to);
        let axis = from.cross(to);
        let s = axis.norm();
        if s <= T::epsilon() {
            if c > T::zero() {
                return Self::identity();
            }
            // pick the coordinate axis least aligned with `from`
            let idx = (0..3).min_by(|&i, &j| from.0[i].abs().partial_cmp(&from.0[j].abs()).unwrap()).unwrap_or(0);
            let k = from.cross(&Vec3::unit(idx)).normalized().unwrap_or(Vec3::unit(0));
            return Self::axis_angle(&k, -T::one(), T::zero());
        }
        Self::axis_angle(&axis.scale(s.recip()), c, s)
    }

    /// Rodrigues formula from a unit axis and the cosine/sine of the angle.
    pub fn axis_angle(k: &Vec3<T>, c: T, s: T) -> Self {
        let [x, y, z] = k.0;
        let t = T::one() - c;
        Self([
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
            [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
        ])
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut m = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }
}
