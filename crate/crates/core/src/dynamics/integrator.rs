//! Dormand–Prince 5(4) with first-same-as-last reuse and an I-controller.

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth order minus embedded fourth order
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-8, abs: 1e-10 }
    }
}

impl Tolerances {
    pub fn scaled(self, s: f64) -> Self {
        Self { rel: self.rel * s, abs: self.abs * s }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_calls: usize,
}

/// Adaptive integrator for `dy/dt = f(t, y)` on complex matrices.
pub struct Dopri5 {
    pub tol: Tolerances,
    pub max_step: f64,
    pub max_steps: usize,
    pub stats: Stats,
    /// Step size carried over between calls.
    pub h: Option<f64>,
    after_step: Option<Box<dyn FnMut(&mut DMatrix<C64>)>>,
}

impl Dopri5 {
    pub fn new(tol: Tolerances, max_step: f64) -> Self {
        Self { tol, max_step, max_steps: 2_000_000, stats: Stats::default(), h: None, after_step: None }
    }

    /// Hook applied to each accepted step (e.g. re-symmetrisation).
    pub fn with_after_step(mut self, f: impl FnMut(&mut DMatrix<C64>) + 'static) -> Self {
        self.after_step = Some(Box::new(f));
        self
    }

    fn err_norm(&self, y: &DMatrix<C64>, y_new: &DMatrix<C64>, err: &DMatrix<C64>) -> f64 {
        let mut acc = 0.0;
        for ((a, b), e) in y.iter().zip(y_new.iter()).zip(err.iter()) {
            let sc = self.tol.abs + self.tol.rel * a.norm().max(b.norm());
            let r = e.norm() / sc;
            acc += r * r;
        }
        (acc / y.len() as f64).sqrt()
    }

    /// Integrates from `t0` to `t1` in place.
    pub fn integrate<F>(&mut self, f: &mut F, y: &mut DMatrix<C64>, t0: f64, t1: f64) -> Result<()>
    where
        F: FnMut(f64, &DMatrix<C64>, &mut DMatrix<C64>),
    {
        if t1 <= t0 {
            return Ok(());
        }
        let shape = y.shape();
        let zeros = || DMatrix::<C64>::zeros(shape.0, shape.1);
        let (mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
            (zeros(), zeros(), zeros(), zeros(), zeros(), zeros(), zeros());
        let mut tmp = zeros();
        let mut err = zeros();

        let span = t1 - t0;
        let mut t = t0;
        f(t, y, &mut k1);
        self.stats.rhs_calls += 1;

        let mut h = match self.h {
            Some(h) => h,
            None => {
                let d0 = rms(y);
                let d1 = rms(&k1);
                if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 }
            }
        };
        h = h.min(self.max_step).min(span);
        let mut steps = 0usize;

        while t < t1 {
            if steps >= self.max_steps {
                return Err(Error::TooManySteps { steps, t });
            }
            steps += 1;
            let last = t + h >= t1 - 1e-12 * span.max(t1.abs());
            if last {
                h = t1 - t;
            }
            if h <= 1e-14 * t1.abs().max(span) {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            let hc = C64::new(h, 0.0);

            lin(&mut tmp, y, &[(A21, &k1)], hc);
            f(t + C2 * h, &tmp, &mut k2);
            lin(&mut tmp, y, &[(A31, &k1), (A32, &k2)], hc);
            f(t + C3 * h, &tmp, &mut k3);
            lin(&mut tmp, y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hc);
            f(t + C4 * h, &tmp, &mut k4);
            lin(&mut tmp, y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hc);
            f(t + C5 * h, &tmp, &mut k5);
            lin(&mut tmp, y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hc);
            f(t + h, &tmp, &mut k6);
            // tmp now holds the fifth-order solution
            lin(&mut tmp, y, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], hc);
            f(t + h, &tmp, &mut k7);
            self.stats.rhs_calls += 6;

            err.fill(C64::new(0.0, 0.0));
            for (e, k) in [(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)] {
                err.zip_apply(k, |a, b| *a += b * (e * h));
            }
            let en = self.err_norm(y, &tmp, &err);
            if !en.is_finite() {
                self.stats.rejected += 1;
                h *= 0.1;
                continue;
            }
            if en <= 1.0 {
                t = if last { t1 } else { t + h };
                std::mem::swap(y, &mut tmp);
                if let Some(hook) = self.after_step.as_mut() {
                    hook(y);
                    f(t, y, &mut k1);
                    self.stats.rhs_calls += 1;
                } else {
                    std::mem::swap(&mut k1, &mut k7);
                }
                self.stats.accepted += 1;
                let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                let next = (h * fac).min(self.max_step);
                if !last {
                    h = next;
                }
                self.h = Some(next);
            } else {
                self.stats.rejected += 1;
                h *= (0.9 * en.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        Ok(())
    }
}

fn rms(m: &DMatrix<C64>) -> f64 {
    (m.iter().map(|z| z.norm_sqr()).sum::<f64>() / m.len() as f64).sqrt()
}

/// `out = y + h·Σ aᵢ kᵢ`.
fn lin(out: &mut DMatrix<C64>, y: &DMatrix<C64>, terms: &[(f64, &DMatrix<C64>)], h: C64) {
    out.copy_from(y);
    for (a, k) in terms {
        let s = h * *a;
        out.zip_apply(*k, |o, v| *o += v * s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_exponential() {
        let mut y = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let lam = C64::new(-0.5, 3.0);
        let mut rhs = |_t: f64, y: &DMatrix<C64>, dy: &mut DMatrix<C64>| {
            dy[(0, 0)] = lam * y[(0, 0)];
        };
        let mut ig = Dopri5::new(Tolerances { rel: 1e-10, abs: 1e-12 }, 1.0);
        ig.integrate(&mut rhs, &mut y, 0.0, 4.0).unwrap();
        assert!((y[(0, 0)] - (lam * 4.0).exp()).norm() < 1e-8);
        assert!(ig.stats.accepted > 10);
    }

    #[test]
    fn time_dependent_forcing() {
        // y' = cos t, y(0) = 0 → sin t
        let mut y = DMatrix::from_element(1, 1, C64::new(0.0, 0.0));
        let mut rhs = |t: f64, _y: &DMatrix<C64>, dy: &mut DMatrix<C64>| {
            dy[(0, 0)] = C64::new(t.cos(), 0.0);
        };
        let mut ig = Dopri5::new(Tolerances::default(), 0.5);
        ig.integrate(&mut rhs, &mut y, 0.0, 10.0).unwrap();
        assert!((y[(0, 0)].re - 10f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn step_limit_reported() {
        let mut y = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let mut rhs = |_t: f64, y: &DMatrix<C64>, dy: &mut DMatrix<C64>| {
            dy[(0, 0)] = y[(0, 0)] * C64::new(0.0, 1e4);
        };
        let mut ig = Dopri5::new(Tolerances::default(), 1.0);
        ig.max_steps = 5;
        assert!(matches!(
            ig.integrate(&mut rhs, &mut y, 0.0, 1.0),
            Err(Error::TooManySteps { .. })
        ));
    }
}
