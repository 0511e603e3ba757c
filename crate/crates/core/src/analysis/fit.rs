//! Damped least squares with automatic seeding for the experiment curves.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    /// One standard deviation.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub params: Vec<FitParam>,
    /// `‖y − model‖₂` at the optimum.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Value of `name`, or NaN when absent.
    pub fn value(&self, name: &str) -> f64 {
        self.param(name).map_or(f64::NAN, |p| p.value)
    }

    pub fn sigma(&self, name: &str) -> f64 {
        self.param(name).map_or(f64::NAN, |p| p.sigma)
    }

    /// Parameters of a non-converged fit must not be used.
    pub fn usable(&self) -> bool {
        self.converged && self.params.iter().all(|p| p.value.is_finite() && p.sigma.is_finite())
    }
}

/// Cat-cut fit together with the derived size `S = f²/4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatCutFit {
    pub fit: FitResult,
    pub size: f64,
    pub size_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative cost reduction regarded as stagnation.
    pub ftol: f64,
    /// Relative parameter step regarded as stagnation.
    pub xtol: f64,
    /// Scaled gradient regarded as stationary.
    pub gtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 2000, ftol: 1e-15, xtol: 1e-13, gtol: 1e-13 }
    }
}

/// Levenberg–Marquardt on `y ≈ f(x, p)`.
///
/// `f(x, p, grad)` returns the model value and writes `∂f/∂p` into `grad`.
/// Never errors on non-convergence; the flag in the result says so instead.
pub fn least_squares<F>(
    model: &str,
    names: &[&str],
    f: F,
    x: &[f64],
    y: &[f64],
    p0: &[f64],
    opts: &LmOptions,
) -> Result<FitResult>
where
    F: Fn(f64, &[f64], &mut [f64]) -> f64,
{
    let n = x.len();
    let m = p0.len();
    if names.len() != m {
        return Err(Error::InvalidParameter(format!("{m} parameters but {} names", names.len())));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("{n} abscissae but {} ordinates", y.len())));
    }
    if n < m {
        return Err(Error::DegenerateData(format!("{n} points for {m} parameters")));
    }

    let eval = |p: &[f64], jac: &mut DMatrix<f64>, r: &mut DVector<f64>| -> f64 {
        let mut g = vec![0.0; m];
        for i in 0..n {
            r[i] = y[i] - f(x[i], p, &mut g);
            for j in 0..m {
                jac[(i, j)] = g[j];
            }
        }
        r.norm_squared()
    };

    let mut p = p0.to_vec();
    let mut jac = DMatrix::zeros(n, m);
    let mut r = DVector::zeros(n);
    let mut cost = eval(&p, &mut jac, &mut r);
    if !cost.is_finite() {
        return Err(Error::NonConvergence(format!("{model}: non-finite residual at the seed")));
    }
    let scale_y = y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);

    let mut jac_new = jac.clone();
    let mut r_new = r.clone();
    let mut lambda = 1e-3;
    let mut diag = vec![0.0f64; m];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let a = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        for j in 0..m {
            diag[j] = diag[j].max(a[(j, j)]);
        }
        let gmax = (0..m)
            .map(|j| if diag[j] > 0.0 { g[j].abs() / (diag[j] * cost).sqrt().max(f64::MIN_POSITIVE) } else { 0.0 })
            .fold(0.0, f64::max);
        if gmax <= opts.gtol || cost <= 1e-32 * scale_y {
            converged = true;
            break;
        }

        let mut accepted = false;
        while lambda < 1e20 {
            let mut lhs = a.clone();
            for j in 0..m {
                lhs[(j, j)] += lambda * diag[j].max(1e-300);
            }
            let Some(ch) = lhs.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = ch.solve(&g);
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let c_new = eval(&trial, &mut jac_new, &mut r_new);
            if c_new.is_finite() && c_new < cost {
                let small_step = p.iter().zip(step.iter()).all(|(pj, dj)| dj.abs() <= opts.xtol * (pj.abs() + opts.xtol));
                let small_drop = (cost - c_new) <= opts.ftol * cost;
                p = trial;
                cost = c_new;
                std::mem::swap(&mut jac, &mut jac_new);
                std::mem::swap(&mut r, &mut r_new);
                lambda = (lambda * 0.1).max(1e-15);
                accepted = true;
                if small_step || small_drop {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no descent direction left at machine precision
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    let cov = covariance(&jac, cost, n, m);
    let params = names
        .iter()
        .zip(p.iter())
        .enumerate()
        .map(|(j, (name, v))| FitParam { name: (*name).to_string(), value: *v, sigma: cov[(j, j)].max(0.0).sqrt() })
        .collect();
    Ok(FitResult { model: model.to_string(), params, residual_norm: cost.sqrt(), converged, iterations })
}

/// `s²(JᵀJ)⁺` with column equilibration before the pseudo-inverse.
fn covariance(jac: &DMatrix<f64>, cost: f64, n: usize, m: usize) -> DMatrix<f64> {
    let a = jac.transpose() * jac;
    let d: Vec<f64> = (0..m).map(|j| if a[(j, j)] > 0.0 { 1.0 / a[(j, j)].sqrt() } else { 0.0 }).collect();
    let scaled = DMatrix::from_fn(m, m, |i, j| a[(i, j)] * d[i] * d[j]);
    let pinv = scaled.pseudo_inverse(1e-14).unwrap_or_else(|_| DMatrix::zeros(m, m));
    let s2 = if n > m { cost / (n - m) as f64 } else { 0.0 };
    DMatrix::from_fn(m, m, |i, j| s2 * pinv[(i, j)] * d[i] * d[j])
}

/// Transforms parameter uncertainties through `q = g(p)` given `∂q/∂p` rows
/// (diagonal propagation; cross terms are not tracked).
fn propagate(sigmas: &[f64], grad: &[f64]) -> f64 {
    sigmas.iter().zip(grad).map(|(s, g)| (s * g).powi(2)).sum::<f64>().sqrt()
}

/// Linear least squares on the given columns; returns (coefficients, SSR).
fn linear_ls(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = y.len();
    let k = columns.len();
    let a = DMatrix::from_fn(n, k, |i, j| columns[j][i]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&b, 1e-12).ok()?;
    let res = b - a * &coef;
    let ssr = res.norm_squared();
    ssr.is_finite().then(|| (coef.iter().copied().collect(), ssr))
}

fn check_series(x: &[f64], y: &[f64], min_points: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} abscissae but {} ordinates", x.len(), y.len())));
    }
    if x.len() < min_points {
        return Err(Error::DegenerateData(format!("need at least {min_points} points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("non-finite sample".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("abscissae must be strictly increasing".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    if var <= 1e-28 * y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE) || var == 0.0 {
        return Err(Error::DegenerateData("zero variance".into()));
    }
    Ok(())
}

fn require_converged(fit: FitResult) -> Result<FitResult> {
    if fit.usable() {
        Ok(fit)
    } else {
        Err(Error::NonConvergence(format!("{} after {} iterations", fit.model, fit.iterations)))
    }
}

fn span(x: &[f64]) -> f64 {
    x[x.len() - 1] - x[0]
}

fn median_spacing(x: &[f64]) -> f64 {
    let mut d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

fn logspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

/// Variable projection for `A e^{−kx} + C` at fixed `k`.
fn exp_projection(x: &[f64], y: &[f64], k: f64, offset: bool) -> Option<(f64, f64, f64)> {
    let e: Vec<f64> = x.iter().map(|xi| (-k * (xi - x[0])).exp()).collect();
    let mut cols = vec![e];
    if offset {
        cols.push(vec![1.0; x.len()]);
    }
    let (c, ssr) = linear_ls(&cols, y)?;
    // amplitude referred back to x = 0
    let a = c[0] * (k * x[0]).exp();
    Some((a, if offset { c[1] } else { 0.0 }, ssr))
}

/// Decay-rate seed from log-linear regressions on baseline-subtracted data,
/// cross-checked against a coarse logarithmic grid.
fn exp_seed(x: &[f64], y: &[f64], offset: bool) -> Result<(f64, f64, f64)> {
    let n = y.len();
    let t = span(x);
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let range = hi - lo;
    let tail = y[n - 1];
    let head = y[0];
    let sign = if head >= tail { 1.0 } else { -1.0 };

    let mut baselines = vec![0.0];
    if offset {
        for e in [1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.3, 1.0] {
            baselines.push(if sign > 0.0 { lo - e * range } else { hi + e * range });
        }
    }
    let mut rates = Vec::new();
    for c in baselines {
        let (mut sw, mut sx, mut sz, mut sxx, mut sxz) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (xi, yi) in x.iter().zip(y) {
            let z = sign * (yi - c);
            if z > 0.0 {
                let w = z * z;
                let l = z.ln();
                sw += w;
                sx += w * xi;
                sz += w * l;
                sxx += w * xi * xi;
                sxz += w * xi * l;
            }
        }
        let det = sw * sxx - sx * sx;
        if sw > 0.0 && det.abs() > 0.0 {
            let slope = (sw * sxz - sx * sz) / det;
            if -slope > 0.0 && (-slope).is_finite() {
                rates.push(-slope);
            }
        }
    }
    rates.extend(logspace(0.01 / t, 200.0 / t, 48));

    let mut best: Option<(f64, f64, f64, f64)> = None;
    for k in rates {
        if let Some((a, c, ssr)) = exp_projection(x, y, k, offset) {
            if best.is_none_or(|b| ssr < b.3) {
                best = Some((a, k, c, ssr));
            }
        }
    }
    best.map(|(a, k, c, _)| (a, k, c)).ok_or_else(|| Error::DegenerateData("no exponential seed".into()))
}

/// `A e^{−x/τ} + C`. Parameters: `amplitude`, `tau`, `offset`.
pub fn fit_exponential(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_series(x, y, 4)?;
    let (a, k, c) = exp_seed(x, y, true)?;
    let model = |xi: f64, p: &[f64], g: &mut [f64]| {
        let e = (-p[1] * xi).exp();
        g[0] = e;
        g[1] = -xi * p[0] * e;
        g[2] = 1.0;
        p[0] * e + p[2]
    };
    let raw = least_squares("exponential", &["amplitude", "rate", "offset"], model, x, y, &[a, k, c], &LmOptions::default())?;
    let raw = require_converged(raw)?;
    rate_to_time(raw, 1)
}

/// `A e^{−x/τ}` with no baseline. Parameters: `amplitude`, `tau`.
pub fn fit_decay(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_series(x, y, 3)?;
    let (a, k, _) = exp_seed(x, y, false)?;
    let model = |xi: f64, p: &[f64], g: &mut [f64]| {
        let e = (-p[1] * xi).exp();
        g[0] = e;
        g[1] = -xi * p[0] * e;
        p[0] * e
    };
    let raw = least_squares("decay", &["amplitude", "rate"], model, x, y, &[a, k], &LmOptions::default())?;
    let raw = require_converged(raw)?;
    rate_to_time(raw, 1)
}

/// Replaces the fitted rate at `idx` by `tau = 1/rate`.
fn rate_to_time(mut fit: FitResult, idx: usize) -> Result<FitResult> {
    let k = fit.params[idx].value;
    if !(k > 0.0) {
        return Err(Error::NonConvergence(format!("{}: non-positive decay rate {k:e}", fit.model)));
    }
    let s = fit.params[idx].sigma;
    fit.params[idx] = FitParam { name: "tau".into(), value: 1.0 / k, sigma: s / (k * k) };
    Ok(fit)
}

fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI { w + 2.0 * PI } else { w }
}

/// `A e^{−x/τ} cos(2πfx + φ) + C`. Parameters: `amplitude`, `tau`,
/// `frequency`, `phase`, `offset`.
///
/// Falls back to [`fit_exponential`] (with `frequency = 0`) when no fringe
/// completes half a period over the data span.
pub fn fit_exp_cos(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_series(x, y, 8)?;
    let t = span(x);
    let nyquist = 0.5 / median_spacing(x);
    let df = 1.0 / (8.0 * t);
    let n_f = ((nyquist / df).ceil() as usize).max(1);
    let x0 = x[0];

    let mut ks = vec![0.0];
    ks.extend(logspace(0.1 / t, 30.0 / t, 16));

    let mut best: Option<(f64, f64, f64, f64, f64, f64)> = None; // f, k, a, b, c, ssr
    for &k in &ks {
        let e: Vec<f64> = x.iter().map(|xi| (-k * (xi - x0)).exp()).collect();
        for i in 0..=n_f {
            let f = i as f64 * df;
            let cols = if i == 0 {
                vec![e.clone(), vec![1.0; x.len()]]
            } else {
                let w = 2.0 * PI * f;
                vec![
                    x.iter().zip(&e).map(|(xi, ei)| ei * (w * (xi - x0)).cos()).collect(),
                    x.iter().zip(&e).map(|(xi, ei)| ei * (w * (xi - x0)).sin()).collect(),
                    vec![1.0; x.len()],
                ]
            };
            let Some((c, ssr)) = linear_ls(&cols, y) else { continue };
            let (a, b, off) = if i == 0 { (c[0], 0.0, c[1]) } else { (c[0], c[1], c[2]) };
            if best.is_none_or(|bst| ssr < bst.5) {
                best = Some((f, k, a, b, off, ssr));
            }
        }
    }
    let (f, k, a, b, c, _) = best.ok_or_else(|| Error::DegenerateData("no spectral peak".into()))?;

    if f * t < 0.5 {
        let exp = fit_exponential(x, y)?;
        let mut params = exp.params.clone();
        params.insert(2, FitParam { name: "frequency".into(), value: 0.0, sigma: 0.0 });
        params.insert(3, FitParam { name: "phase".into(), value: 0.0, sigma: 0.0 });
        return Ok(FitResult { model: "exp_cos".into(), params, ..exp });
    }

    // a cos(θ) + b sin(θ) = A cos(θ + φ), θ measured from x0
    let amp = a.hypot(b);
    if amp == 0.0 {
        return Err(Error::DegenerateData("no spectral peak".into()));
    }
    let w = 2.0 * PI * f;
    let phi = (-b).atan2(a) - w * x0;
    let amp0 = amp * (k * x0).exp();

    let model = |xi: f64, p: &[f64], g: &mut [f64]| {
        let e = (-p[1] * xi).exp();
        let th = 2.0 * PI * p[2] * xi + p[3];
        let (s, co) = th.sin_cos();
        g[0] = e * co;
        g[1] = -xi * p[0] * e * co;
        g[2] = -p[0] * e * s * 2.0 * PI * xi;
        g[3] = -p[0] * e * s;
        g[4] = 1.0;
        p[0] * e * co + p[4]
    };
    let names = ["amplitude", "rate", "frequency", "phase", "offset"];
    let raw = least_squares("exp_cos", &names, model, x, y, &[amp0, k, f, phi, c], &LmOptions::default())?;
    let mut fit = require_converged(raw)?;
    if fit.params[0].value < 0.0 {
        fit.params[0].value = -fit.params[0].value;
        fit.params[3].value += PI;
    }
    if fit.params[2].value < 0.0 {
        fit.params[2].value = -fit.params[2].value;
        fit.params[3].value = -fit.params[3].value;
    }
    fit.params[3].value = wrap_phase(fit.params[3].value);
    rate_to_time(fit, 1)
}

/// `A cos(2πfx + φ) + B`. Parameters: `amplitude`, `frequency`, `phase`, `offset`.
pub fn fit_cosine(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_series(x, y, 5)?;
    let t = span(x);
    let nyquist = 0.5 / median_spacing(x);
    let df = 1.0 / (16.0 * t);
    let n_f = (nyquist / df).ceil() as usize;
    let x0 = x[0];
    let mut best: Option<(f64, f64, f64, f64, f64)> = None;
    for i in 1..=n_f {
        let w = 2.0 * PI * i as f64 * df;
        let cols = vec![
            x.iter().map(|xi| (w * (xi - x0)).cos()).collect(),
            x.iter().map(|xi| (w * (xi - x0)).sin()).collect(),
            vec![1.0; x.len()],
        ];
        let Some((c, ssr)) = linear_ls(&cols, y) else { continue };
        if best.is_none_or(|b| ssr < b.4) {
            best = Some((i as f64 * df, c[0], c[1], c[2], ssr));
        }
    }
    let (f, a, b, off, _) = best.ok_or_else(|| Error::DegenerateData("no spectral peak".into()))?;
    let amp = a.hypot(b);
    let phi = (-b).atan2(a) - 2.0 * PI * f * x0;
    let model = |xi: f64, p: &[f64], g: &mut [f64]| {
        let th = 2.0 * PI * p[1] * xi + p[2];
        let (s, co) = th.sin_cos();
        g[0] = co;
        g[1] = -p[0] * s * 2.0 * PI * xi;
        g[2] = -p[0] * s;
        g[3] = 1.0;
        p[0] * co + p[3]
    };
    let names = ["amplitude", "frequency", "phase", "offset"];
    let raw = least_squares("cosine", &names, model, x, y, &[amp, f, phi, off], &LmOptions::default())?;
    let mut fit = require_converged(raw)?;
    if fit.params[0].value < 0.0 {
        fit.params[0].value = -fit.params[0].value;
        fit.params[2].value += PI;
    }
    if fit.params[1].value < 0.0 {
        fit.params[1].value = -fit.params[1].value;
        fit.params[2].value = -fit.params[2].value;
    }
    fit.params[2].value = wrap_phase(fit.params[2].value);
    Ok(fit)
}

fn gauss(xi: f64, mu: f64, sigma: f64) -> f64 {
    let u = (xi - mu) / sigma;
    (-0.5 * u * u).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Weighted centre and width using `|y|` as weights.
fn moments(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let w: f64 = y.iter().map(|v| v.abs()).sum();
    if w == 0.0 {
        return Err(Error::DegenerateData("all-zero signal".into()));
    }
    let mu = x.iter().zip(y).map(|(a, b)| a * b.abs()).sum::<f64>() / w;
    let var = x.iter().zip(y).map(|(a, b)| (a - mu).powi(2) * b.abs()).sum::<f64>() / w;
    Ok((mu, var.sqrt().max(median_spacing(x))))
}

/// `(A/σ√2π) e^{−(x−µ)²/2σ²}`. Parameters: `amplitude`, `center`, `sigma`.
pub fn fit_gaussian(x: &[f64], y: &[f64]) -> Result<FitResult> {
    check_series(x, y, 4)?;
    let (mu, sigma) = moments(x, y)?;
    let col: Vec<f64> = x.iter().map(|xi| gauss(*xi, mu, sigma)).collect();
    let (c, _) = linear_ls(&[col], y).ok_or_else(|| Error::DegenerateData("no Gaussian seed".into()))?;
    let model = |xi: f64, p: &[f64], g: &mut [f64]| {
        let gv = gauss(xi, p[1], p[2]);
        let u = (xi - p[1]) / p[2];
        g[0] = gv;
        g[1] = p[0] * gv * u / p[2];
        g[2] = p[0] * gv * (u * u - 1.0) / p[2];
        p[0] * gv
    };
    let raw = least_squares("gaussian", &["amplitude", "center", "sigma"], model, x, y, &[c[0], mu, sigma], &LmOptions::default())?;
    let mut fit = require_converged(raw)?;
    fit.params[2].value = fit.params[2].value.abs();
    Ok(fit)
}

/// Modulated Gaussian `(A/σ√2π) e^{−(x−µ)²/2σ²} sin(fx + φ)` for a Wigner cut
/// across the fringes of a cat. The abscissa must be calibrated so that the
/// vacuum has `σ = 1/2`; the size is then `S = f²/4`.
pub fn fit_cat_cut(x: &[f64], w: &[f64]) -> Result<CatCutFit> {
    check_series(x, w, 8)?;
    let (mu, sigma) = moments(x, w)?;
    let nyquist = PI / median_spacing(x);
    let f_min = PI / (4.0 * sigma);
    let df = PI / (8.0 * span(x));
    let n_f = (nyquist / df).ceil() as usize;

    let env: Vec<f64> = x.iter().map(|xi| gauss(*xi, mu, sigma)).collect();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for i in 1..=n_f {
        let f = i as f64 * df;
        let cols = vec![
            x.iter().zip(&env).map(|(xi, g)| g * (f * xi).sin()).collect(),
            x.iter().zip(&env).map(|(xi, g)| g * (f * xi).cos()).collect(),
        ];
        let Some((c, ssr)) = linear_ls(&cols, w) else { continue };
        if best.is_none_or(|b| ssr < b.3) {
            best = Some((f, c[0], c[1], ssr));
        }
    }
    let (f, a_sin, a_cos, _) = best.ok_or_else(|| Error::DegenerateData("no fringes".into()))?;
    let amp = a_sin.hypot(a_cos);
    let scale = w.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if amp * gauss(mu, mu, sigma) <= 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateData("zero-amplitude fringes".into()));
    }
    if f < f_min {
        return Err(Error::DegenerateData(format!("fringe frequency {f:.3} below resolvable {f_min:.3}")));
    }
    let phi = a_cos.atan2(a_sin);

    let model = |xi: f64, p: &[f64], g: &mut [f64]| {
        let gv = gauss(xi, p[1], p[2]);
        let u = (xi - p[1]) / p[2];
        let (s, co) = (p[3] * xi + p[4]).sin_cos();
        g[0] = gv * s;
        g[1] = p[0] * gv * s * u / p[2];
        g[2] = p[0] * gv * s * (u * u - 1.0) / p[2];
        g[3] = p[0] * gv * co * xi;
        g[4] = p[0] * gv * co;
        p[0] * gv * s
    };
    let names = ["amplitude", "center", "sigma", "frequency", "phase"];
    let raw = least_squares("cat_cut", &names, model, x, w, &[amp, mu, sigma, f, phi], &LmOptions::default())?;
    let mut fit = require_converged(raw)?;
    let p = &mut fit.params;
    p[2].value = p[2].value.abs();
    if p[3].value < 0.0 {
        p[3].value = -p[3].value;
        p[4].value = PI - p[4].value;
    }
    if p[0].value < 0.0 {
        p[0].value = -p[0].value;
        p[4].value += PI;
    }
    p[4].value = wrap_phase(p[4].value);
    let f = p[3].value;
    let size = f * f / 4.0;
    let size_sigma = propagate(&[p[3].sigma], &[f / 2.0]);
    Ok(CatCutFit { fit, size, size_sigma })
}

/// `y = s·x` through the origin. Parameter: `slope`.
pub fn fit_proportional(x: &[f64], y: &[f64]) -> Result<FitResult> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::DegenerateData("need matching non-empty series".into()));
    }
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateData("all abscissae zero".into()));
    }
    let s = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - s * a).powi(2)).sum();
    let dof = x.len().saturating_sub(1);
    let sigma = if dof > 0 { (ssr / dof as f64 / sxx).sqrt() } else { 0.0 };
    Ok(FitResult {
        model: "proportional".into(),
        params: vec![FitParam { name: "slope".into(), value: s, sigma }],
        residual_norm: ssr.sqrt(),
        converged: true,
        iterations: 0,
    })
}
