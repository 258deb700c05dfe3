use super::tableau::{A, A_DENSE, B, BHH, C, C_DENSE, DENSE, ER};
use super::OdeSystem;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dop853Settings<T> {
    pub rtol: T,
    pub atol: T,
    /// Upper bound on the step size; `None` leaves it unbounded.
    pub h_max: Option<T>,
    pub h_init: Option<T>,
    pub max_steps: usize,
    pub safety: T,
    /// Bounds on the step ratio `h_new / h`.
    pub fac_min: T,
    pub fac_max: T,
}

impl<T: Real> Default for Dop853Settings<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-12),
            atol: T::lit(1e-12),
            h_max: None,
            h_init: None,
            max_steps: 5_000_000,
            safety: T::lit(0.9),
            fac_min: T::lit(0.333),
            fac_max: T::lit(6.0),
        }
    }
}

/// Dormand-Prince 8(5,3) stepper over a fixed-size state.
#[derive(Debug, Clone)]
pub struct Dop853<T, const N: usize> {
    settings: Dop853Settings<T>,
    t: T,
    y: [T; N],
    /// Derivative at `(t, y)`; reused as the first stage (FSAL).
    f0: [T; N],
    h: T,
    t_old: T,
    h_old: T,
    cont: [[T; N]; 8],
    last_rejected: bool,
    steps: usize,
    rejections: usize,
    evaluations: usize,
}

impl<T: Real, const N: usize> Dop853<T, N> {
    pub fn new<S: OdeSystem<T, N>>(system: &S, t0: T, y0: [T; N], settings: Dop853Settings<T>) -> Result<Self> {
        let f0 = system.rhs(t0, &y0)?;
        let mut stepper = Self {
            settings,
            t: t0,
            y: y0,
            f0,
            h: T::zero(),
            t_old: t0,
            h_old: T::zero(),
            cont: [[T::zero(); N]; 8],
            last_rejected: false,
            steps: 0,
            rejections: 0,
            evaluations: 1,
        };
        stepper.h = match settings.h_init {
            Some(h) => h,
            None => stepper.initial_step(system),
        };
        Ok(stepper)
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn y(&self) -> &[T; N] {
        &self.y
    }

    pub fn t_prev(&self) -> T {
        self.t_old
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rejections(&self) -> usize {
        self.rejections
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn weight(&self, i: usize, a: &[T; N], b: &[T; N]) -> T {
        self.settings.atol + self.settings.rtol * a[i].abs().max(b[i].abs())
    }

    /// Starting step heuristic from Hairer, Norsett & Wanner.
    fn initial_step<S: OdeSystem<T, N>>(&mut self, system: &S) -> T {
        let (mut dnf, mut dny) = (T::zero(), T::zero());
        for i in 0..N {
            let sk = self.weight(i, &self.y, &self.y);
            dnf = dnf + (self.f0[i] / sk).powi(2);
            dny = dny + (self.y[i] / sk).powi(2);
        }
        let small = T::lit(1e-10);
        let mut h = if dnf <= small || dny <= small { T::lit(1e-6) } else { (dny / dnf).sqrt() * T::lit(0.01) };
        if let Some(hm) = self.settings.h_max {
            h = h.min(hm);
        }
        let y1 = super::axpy(&self.y, h, &self.f0);
        let Ok(f1) = system.rhs(self.t + h, &y1) else {
            return h * T::lit(1e-3);
        };
        self.evaluations += 1;
        let mut der2 = T::zero();
        for (i, (a, b)) in f1.iter().zip(&self.f0).enumerate() {
            let sk = self.weight(i, &self.y, &self.y);
            der2 = der2 + ((*a - *b) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= T::lit(1e-15) {
            T::lit(1e-6).max(h.abs() * T::lit(1e-3))
        } else {
            (T::lit(0.01) / der12).powf(T::lit(1.0 / 8.0))
        };
        let mut h = (T::lit(100.0) * h.abs()).min(h1);
        if let Some(hm) = self.settings.h_max {
            h = h.min(hm);
        }
        h
    }

    /// Advances by one accepted step, never stepping past `t_limit`.
    /// Rejected trial steps are retried internally.
    pub fn step<S: OdeSystem<T, N>>(&mut self, system: &S, t_limit: T) -> Result<()> {
        let eps = T::epsilon();
        loop {
            if self.steps >= self.settings.max_steps {
                return Err(self.failure("maximum number of steps exceeded"));
            }
            let mut h = self.h;
            let remaining = t_limit - self.t;
            if remaining <= T::zero() {
                return Err(self.failure("step requested beyond the integration limit"));
            }
            let mut clamped = false;
            if h >= remaining {
                h = remaining;
                clamped = true;
            }
            if h <= eps * T::lit(10.0) * self.t.abs().max(T::one()) {
                return Err(self.failure("step size underflow"));
            }
            self.steps += 1;
            match self.attempt(system, h) {
                Ok(Some(h_next)) => {
                    if clamped {
                        self.t = t_limit;
                    }
                    // a step shortened to hit t_limit keeps the controller's proposal
                    self.h = if clamped { self.h.max(h_next) } else { h_next };
                    if let Some(hm) = self.settings.h_max {
                        self.h = self.h.min(hm);
                    }
                    return Ok(());
                }
                Ok(None) => {}
                Err(_) => {
                    // trial point left the admissible set: shrink hard and retry
                    self.rejections += 1;
                    self.last_rejected = true;
                    self.h = h * T::lit(0.25);
                }
            }
        }
    }

    fn failure(&self, reason: &str) -> Error {
        Error::StepFailure { t: self.t.as_f64(), reason: reason.to_string() }
    }

    /// One trial step of size `h`. `Ok(Some(h_next))` when accepted, `Ok(None)` when rejected.
    fn attempt<S: OdeSystem<T, N>>(&mut self, system: &S, h: T) -> Result<Option<T>> {
        let mut k = [[T::zero(); N]; 16];
        k[0] = self.f0;
        for s in 1..12 {
            let mut ys = self.y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    let ah = T::lit(a) * h;
                    for i in 0..N {
                        ys[i] = ys[i] + ah * kj[i];
                    }
                }
            }
            k[s] = system.rhs(self.t + T::lit(C[s]) * h, &ys)?;
            self.evaluations += 1;
        }
        let mut incr = [T::zero(); N];
        for (j, kj) in k.iter().enumerate().take(12) {
            if B[j] != 0.0 {
                let b = T::lit(B[j]);
                for i in 0..N {
                    incr[i] = incr[i] + b * kj[i];
                }
            }
        }
        let y_new: [T; N] = std::array::from_fn(|i| self.y[i] + h * incr[i]);

        let (mut err5, mut err3) = (T::zero(), T::zero());
        for i in 0..N {
            let sk = self.weight(i, &self.y, &y_new);
            let e3 = incr[i] - T::lit(BHH[0]) * k[0][i] - T::lit(BHH[1]) * k[8][i] - T::lit(BHH[2]) * k[11][i];
            let mut e5 = T::zero();
            for (j, kj) in k.iter().enumerate().take(12) {
                if ER[j] != 0.0 {
                    e5 = e5 + T::lit(ER[j]) * kj[i];
                }
            }
            err5 = err5 + (e5 / sk).powi(2);
            err3 = err3 + (e3 / sk).powi(2);
        }
        let mut deno = err5 + T::lit(0.01) * err3;
        if deno <= T::zero() {
            deno = T::one();
        }
        let err = h.abs() * err5 * (T::one() / (deno * T::from_usize_lossy(N))).sqrt();
        if !err.is_finite() {
            return Err(self.failure("non-finite error estimate"));
        }

        let fac11 = err.powf(T::lit(1.0 / 8.0));
        let inv_fac_min = self.settings.fac_min.recip();
        let inv_fac_max = self.settings.fac_max.recip();
        let safety = self.settings.safety;
        if err <= T::one() {
            let fac = inv_fac_max.max(inv_fac_min.min(fac11 / safety));
            let mut h_new = h / fac;
            let f_new = system.rhs(self.t + h, &y_new)?;
            self.evaluations += 1;
            k[12] = f_new;
            self.build_dense(system, h, &k, &y_new)?;
            if self.last_rejected {
                h_new = h_new.min(h);
                self.last_rejected = false;
            }
            self.t_old = self.t;
            self.h_old = h;
            self.t = self.t + h;
            self.y = y_new;
            self.f0 = f_new;
            Ok(Some(h_new))
        } else {
            self.rejections += 1;
            self.last_rejected = true;
            self.h = h / inv_fac_min.min(fac11 / safety);
            Ok(None)
        }
    }

    fn build_dense<S: OdeSystem<T, N>>(&mut self, system: &S, h: T, k: &[[T; N]; 16], y_new: &[T; N]) -> Result<()> {
        let mut k = *k;
        for (r, (row, &c)) in A_DENSE.iter().zip(C_DENSE.iter()).enumerate() {
            let stage = 13 + r;
            let mut ys = self.y;
            for (j, kj) in k.iter().enumerate() {
                if row[j] != 0.0 {
                    let ah = T::lit(row[j]) * h;
                    for i in 0..N {
                        ys[i] = ys[i] + ah * kj[i];
                    }
                }
            }
            k[stage] = system.rhs(self.t + T::lit(c) * h, &ys)?;
            self.evaluations += 1;
        }
        for i in 0..N {
            let ydiff = y_new[i] - self.y[i];
            let bspl = h * k[0][i] - ydiff;
            self.cont[0][i] = self.y[i];
            self.cont[1][i] = ydiff;
            self.cont[2][i] = bspl;
            self.cont[3][i] = ydiff - h * k[12][i] - bspl;
        }
        for (d, coeffs) in DENSE.iter().enumerate() {
            for i in 0..N {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate() {
                    if coeffs[j] != 0.0 {
                        acc = acc + T::lit(coeffs[j]) * kj[i];
                    }
                }
                self.cont[4 + d][i] = acc * h;
            }
        }
        Ok(())
    }

    /// Dense output on the last accepted step `[t_prev, t]`.
    pub fn interpolate(&self, t: T) -> [T; N] {
        let s = (t - self.t_old) / self.h_old;
        let s1 = T::one() - s;
        let c = &self.cont;
        std::array::from_fn(|i| {
            let conpar = c[4][i] + (c[5][i] + (c[6][i] + c[7][i] * s) * s1) * s;
            c[0][i] + (c[1][i] + (c[2][i] + (c[3][i] + conpar * s1) * s) * s1) * s
        })
    }
}
