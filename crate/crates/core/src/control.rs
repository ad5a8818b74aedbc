//! Rank-one control of diagonal systems `x'ₙ = −λₙxₙ + b̄ₙu` with an
//! orthonormal modal basis: moment-problem synthesis, simulation and the
//! link to weighted interpolation.
//!
//! Gram matrices of decaying exponentials are badly conditioned (around 1e15
//! for ten integer modes at `τ = 1`), so the Gram system, its factorization and
//! the evaluation of the resulting control run in double-double arithmetic.

use num_complex::Complex64;

use crate::dd::{Cdd, Dd};
use crate::error::{invalid, Error, Result};
use crate::interp::{InterpolationProblem, Weighting};
use crate::mcphail::{mq_check, pw_weight_adaptation, McPhailCheck, WeightedPair};
use crate::quad::{default_rule, PanelLayout, DEFAULT_ORDER};
use crate::seqlab::{ComplexSequence, HalfPlane, Side};

/// Condition number above which the Gram system is ridged. Chosen for the
/// roughly 32-digit working precision.
pub const RIDGE_CONDITION: f64 = 1e28;
/// Ridge size relative to the Gram trace.
pub const RIDGE_SCALE: f64 = 1e-28;
/// Endpoint stability required of [`simulate`] under panel doubling.
pub const SIMULATION_TOLERANCE: f64 = 1e-8;
const MAX_DOUBLINGS: usize = 14;
/// Samples in a synthesized signal.
pub const DEFAULT_SAMPLES: usize = 1025;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSystem {
    eigenvalues: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl DiagonalSystem {
    pub fn new(eigenvalues: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(invalid("system needs at least one mode"));
        }
        if eigenvalues.len() != b.len() {
            return Err(invalid(format!(
                "{} eigenvalues for {} coefficients",
                eigenvalues.len(),
                b.len()
            )));
        }
        for (k, z) in eigenvalues.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) || z.re <= 0.0 {
                return Err(Error::UnstableEigenvalue { index: k, lambda: *z });
            }
        }
        if let Some(k) = b.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid(format!("control coefficient {k} is not finite")));
        }
        for i in 0..eigenvalues.len() {
            for j in 0..i {
                let d = (eigenvalues[i] - eigenvalues[j]).norm();
                if d <= 1e-12 * eigenvalues[i].norm().max(1.0) {
                    return Err(Error::DuplicatePoints {
                        i: j,
                        j: i,
                        distance: d,
                    });
                }
            }
        }
        Ok(DiagonalSystem { eigenvalues, b })
    }

    /// `λₙ = n`, `bₙ = 1`, `n = 1..=count`.
    pub fn integer_ladder(count: usize) -> Result<Self> {
        DiagonalSystem::new(
            (1..=count).map(|n| Complex64::new(n as f64, 0.0)).collect(),
            vec![Complex64::new(1.0, 0.0); count],
        )
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn control_coefficients(&self) -> &[Complex64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Stability margin `min Re λₙ`.
    pub fn alpha(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    /// Nodes `iλₙ`, all in the upper half-plane.
    pub fn rotated_nodes(&self) -> Result<ComplexSequence> {
        ComplexSequence::new(self.eigenvalues.iter().map(|z| Complex64::new(-z.im, z.re)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    pub x0: Vec<Complex64>,
    pub x1: Vec<Complex64>,
    pub horizon: Horizon,
}

impl ControlProblem {
    pub fn new(x0: Vec<Complex64>, x1: Vec<Complex64>, horizon: Horizon) -> Result<Self> {
        if x0.len() != x1.len() {
            return Err(invalid(format!("state lengths differ: {} vs {}", x0.len(), x1.len())));
        }
        if x0.iter().chain(&x1).any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("state vectors must be finite"));
        }
        if let Horizon::Finite(t) = horizon {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid(format!("horizon must be positive, got {t}")));
            }
        }
        Ok(ControlProblem { x0, x1, horizon })
    }

    fn horizon(&self) -> Result<f64> {
        match self.horizon {
            Horizon::Finite(t) => Ok(t),
            Horizon::Infinite => Err(invalid("control synthesis needs a finite horizon")),
        }
    }
}

/// Weighted problem for the nodes `iλₙ`: bandwidth `τ/2`, `p = 2`,
/// `ωₙ = e^{−(τ/2)Re λₙ}|bₙ|`. `epsilon` is the enlargement the
/// interpolation builder will use.
pub fn to_interpolation_problem(sys: &DiagonalSystem, tau: f64, epsilon: f64) -> Result<InterpolationProblem> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {tau}")));
    }
    let weights = interpolation_weights(sys, tau)?;
    InterpolationProblem::new(
        sys.rotated_nodes()?,
        &[],
        2.0,
        Weighting::Explicit(weights),
        0.5 * tau,
        epsilon,
    )
}

/// `e^{−(τ/2)Re λₙ}|bₙ|`; `τ = 0` gives `|bₙ|`.
pub fn interpolation_weights(sys: &DiagonalSystem, tau: f64) -> Result<Vec<f64>> {
    sys.eigenvalues
        .iter()
        .zip(&sys.b)
        .enumerate()
        .map(|(k, (z, b))| {
            if b.norm() == 0.0 {
                Err(Error::UncontrollableMode { index: k })
            } else {
                Ok((-0.5 * tau * z.re).exp() * b.norm())
            }
        })
        .collect()
}

/// `(iΛ, |bₙ|)` in the upper half-plane, the infinite-horizon pair.
pub fn hardy_pair(sys: &DiagonalSystem, q: f64) -> Result<WeightedPair> {
    WeightedPair::new(
        sys.rotated_nodes()?,
        interpolation_weights(sys, 0.0)?,
        q,
        HalfPlane::upper(0.0),
    )
}

/// `u(t) = Σ cₘ e^{−λ̄ₘ(τ−t)}` kept in double-double.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialSum {
    pub tau: f64,
    pub exponents: Vec<Complex64>,
    pub coefficients: Vec<Cdd>,
}

impl ExponentialSum {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.eval_dd(t).to_c64()
    }

    pub fn eval_dd(&self, t: f64) -> Cdd {
        let s = Dd::new(self.tau) - Dd::new(t);
        let mut acc = Cdd::ZERO;
        for (lam, c) in self.exponents.iter().zip(&self.coefficients) {
            let e = (-Cdd::from(lam.conj())).scale(s).exp();
            acc += *c * e;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    grid: Vec<f64>,
    values: Vec<Complex64>,
    norm: f64,
    model: Option<ExponentialSum>,
}

impl ControlSignal {
    /// Samples on `0 = t₀ < … < t_m = τ`; between samples the signal is the
    /// local cubic through the four nearest points.
    pub fn from_samples(grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() < 4 || grid.len() != values.len() {
            return Err(invalid("a sampled signal needs at least four (t, u) pairs"));
        }
        if grid[0] != 0.0 {
            return Err(invalid("signal grid must start at 0"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("signal grid must be strictly increasing"));
        }
        let mut s = ControlSignal {
            grid,
            values,
            norm: 0.0,
            model: None,
        };
        s.norm = s.quadrature_norm();
        Ok(s)
    }

    fn from_model(model: ExponentialSum, samples: usize) -> Self {
        let m = samples.max(4) - 1;
        let grid: Vec<f64> = (0..=m).map(|k| model.tau * k as f64 / m as f64).collect();
        let values = grid.iter().map(|&t| model.eval(t)).collect();
        let mut s = ControlSignal {
            grid,
            values,
            norm: 0.0,
            model: Some(model),
        };
        s.norm = s.quadrature_norm();
        s
    }

    /// Zero input on `[0, τ]`.
    pub fn zero(tau: f64, samples: usize) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid(format!("horizon must be positive, got {tau}")));
        }
        let m = samples.max(4) - 1;
        let grid = (0..=m).map(|k| tau * k as f64 / m as f64).collect();
        ControlSignal::from_samples(grid, vec![Complex64::new(0.0, 0.0); m + 1])
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Quadrature `L²(0, τ)` norm.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn model(&self) -> Option<&ExponentialSum> {
        self.model.as_ref()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match &self.model {
            Some(m) => m.eval(t),
            None => self.interpolate(t),
        }
    }

    fn eval_dd(&self, t: f64) -> Cdd {
        match &self.model {
            Some(m) => m.eval_dd(t),
            None => Cdd::from(self.interpolate(t)),
        }
    }

    fn interpolate(&self, t: f64) -> Complex64 {
        let g = &self.grid;
        let k = g.partition_point(|&x| x <= t).clamp(1, g.len() - 1) - 1;
        let lo = k.saturating_sub(1).min(g.len() - 4);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in lo..lo + 4 {
            let mut l = 1.0;
            for j in lo..lo + 4 {
                if j != i {
                    l *= (t - g[j]) / (g[i] - g[j]);
                }
            }
            acc += self.values[i] * l;
        }
        acc
    }

    fn quadrature_norm(&self) -> f64 {
        let tau = self.horizon();
        let mut panels = 8;
        let mut prev = f64::NAN;
        loop {
            let rule = PanelLayout::uniform(0.0, tau, panels, DEFAULT_ORDER).rule();
            let v = rule.integrate(|t| self.eval(t).norm_sqr());
            if (v - prev).abs() <= 1e-14 * v.max(f64::MIN_POSITIVE) || panels >= 1 << 12 {
                return v.sqrt();
            }
            prev = v;
            panels *= 2;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSolution {
    pub signal: ControlSignal,
    /// Moments `∫₀^τ u(t)e^{−λₙ(τ−t)}dt` that were imposed.
    pub moments: Vec<Complex64>,
    /// `‖Gc − m‖/‖m‖` (zero for zero moments).
    pub moment_residual: f64,
    /// `cᴴGc`.
    pub gram_norm_sqr: f64,
    pub condition: f64,
    pub regularized: bool,
    /// Modes with `bₙ = 0` and zero target, left out of the Gram system.
    pub skipped_modes: Vec<usize>,
}

fn gram(lams: &[Complex64], tau: f64) -> Vec<Vec<Cdd>> {
    let t = Dd::new(tau);
    let n = lams.len();
    let mut g = vec![vec![Cdd::ZERO; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = Cdd::from(lams[i]) + Cdd::from(lams[j].conj());
            // (1 − e^{−sτ})/s
            let v = -(-s.scale(t)).exp_m1() / s;
            g[i][j] = v;
            g[j][i] = v.conj();
        }
        g[i][i].im = Dd::ZERO;
    }
    g
}

/// Gram matrix `Gₙₘ = (1 − e^{−(λₙ+λ̄ₘ)τ})/(λₙ+λ̄ₘ)`, rounded to `f64`.
pub fn gram_matrix(sys: &DiagonalSystem, tau: f64) -> Vec<Vec<Complex64>> {
    gram(&sys.eigenvalues, tau)
        .into_iter()
        .map(|r| r.into_iter().map(Cdd::to_c64).collect())
        .collect()
}

/// Lower factor `L` with `G = LLᴴ`, `None` if not positive definite.
fn cholesky(g: &[Vec<Cdd>]) -> Option<Vec<Vec<Cdd>>> {
    let n = g.len();
    let mut l = vec![vec![Cdd::ZERO; n]; n];
    for j in 0..n {
        let mut d = g[j][j].re;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if !(d.to_f64() > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[j][j] = Cdd::from_real(djj);
        for i in j + 1..n {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = Cdd::new(s.re / djj, s.im / djj);
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[Vec<Cdd>], b: &[Cdd]) -> Vec<Cdd> {
    let n = l.len();
    let mut y = vec![Cdd::ZERO; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![Cdd::ZERO; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i].conj() * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

fn matvec(g: &[Vec<Cdd>], v: &[Cdd]) -> Vec<Cdd> {
    g.iter()
        .map(|row| row.iter().zip(v).fold(Cdd::ZERO, |acc, (a, b)| acc + *a * *b))
        .collect()
}

fn vnorm(v: &[Cdd]) -> Dd {
    v.iter().fold(Dd::ZERO, |acc, x| acc + x.norm_sqr()).sqrt()
}

fn normalize(v: &mut [Cdd]) {
    let n = vnorm(v);
    for x in v.iter_mut() {
        *x = Cdd::new(x.re / n, x.im / n);
    }
}

fn start_vector(n: usize) -> Vec<Cdd> {
    (0..n)
        .map(|k| Cdd::from_real(Dd::new(1.0 + 0.1 * k as f64 / n as f64)))
        .collect()
}

/// `λ_max/λ_min` by power and inverse iteration.
fn condition_number(g: &[Vec<Cdd>], l: &[Vec<Cdd>]) -> f64 {
    let n = g.len();
    if n == 1 {
        return 1.0;
    }
    let rayleigh = |v: &[Cdd], w: &[Cdd]| -> f64 {
        v.iter()
            .zip(w)
            .fold(Dd::ZERO, |acc, (a, b)| acc + (a.conj() * *b).re)
            .to_f64()
    };
    let iterate = |step: &dyn Fn(&[Cdd]) -> Vec<Cdd>| -> f64 {
        let mut v = start_vector(n);
        normalize(&mut v);
        let mut est = 0.0;
        for _ in 0..500 {
            let mut w = step(&v);
            let r = rayleigh(&v, &w);
            normalize(&mut w);
            v = w;
            if (r - est).abs() <= 1e-13 * r.abs() {
                return r;
            }
            est = r;
        }
        est
    };
    let lmax = iterate(&|v| matvec(g, v));
    let inv = iterate(&|v| cholesky_solve(l, v));
    lmax * inv
}

fn factor(g: &mut [Vec<Cdd>]) -> Result<(Vec<Vec<Cdd>>, f64, bool)> {
    let trace = g.iter().enumerate().fold(Dd::ZERO, |acc, (i, r)| acc + r[i].re);
    let plain = cholesky(g);
    let cond = plain.as_ref().map(|l| condition_number(g, l)).unwrap_or(f64::INFINITY);
    if let Some(l) = plain {
        if cond <= RIDGE_CONDITION {
            return Ok((l, cond, false));
        }
    }
    let ridge = trace * RIDGE_SCALE;
    for (i, row) in g.iter_mut().enumerate() {
        row[i].re += ridge;
    }
    let l = cholesky(g).ok_or_else(|| invalid("Gram matrix not positive definite after ridging"))?;
    Ok((l, cond, true))
}

/// Gram condition number at horizon `tau`.
pub fn gram_condition(sys: &DiagonalSystem, tau: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {tau}")));
    }
    let g = gram(&sys.eigenvalues, tau);
    match cholesky(&g) {
        Some(l) => Ok(condition_number(&g, &l)),
        None => Ok(f64::INFINITY),
    }
}

pub fn gram_condition_profile(sys: &DiagonalSystem, taus: &[f64]) -> Result<Vec<(f64, f64)>> {
    taus.iter().map(|&t| Ok((t, gram_condition(sys, t)?))).collect()
}

/// Moments `(x1ₙ − e^{−λₙτ}x0ₙ)/b̄ₙ`; `None` marks a mode with `bₙ = 0` and
/// zero target.
fn moments(sys: &DiagonalSystem, prob: &ControlProblem, tau: f64) -> Result<Vec<Option<Cdd>>> {
    if prob.x0.len() != sys.len() {
        return Err(invalid(format!(
            "state length {} for {} modes",
            prob.x0.len(),
            sys.len()
        )));
    }
    let t = Dd::new(tau);
    (0..sys.len())
        .map(|n| {
            let decay = (-Cdd::from(sys.eigenvalues[n])).scale(t).exp();
            let target = Cdd::from(prob.x1[n]) - decay * Cdd::from(prob.x0[n]);
            let b = sys.b[n];
            if b.norm() == 0.0 {
                if target.to_c64().norm() == 0.0 {
                    Ok(None)
                } else {
                    Err(Error::UncontrollableMode { index: n })
                }
            } else {
                Ok(Some(target / Cdd::from(b.conj())))
            }
        })
        .collect()
}

/// Minimum-`L²` control in `span{e^{−λ̄ₘ(τ−t)}}` meeting every moment.
pub fn min_norm_control(sys: &DiagonalSystem, prob: &ControlProblem) -> Result<ControlSolution> {
    let tau = prob.horizon()?;
    let m = moments(sys, prob, tau)?;
    let solutions = solve_moments(sys, tau, &[m])?;
    Ok(solutions.into_iter().next().unwrap())
}

fn solve_moments(sys: &DiagonalSystem, tau: f64, rhs: &[Vec<Option<Cdd>>]) -> Result<Vec<ControlSolution>> {
    // modes skipped in any right-hand side are dropped only for that one
    let mut out = Vec::with_capacity(rhs.len());
    let mut cache: Option<(Vec<usize>, Vec<Vec<Cdd>>, Vec<Vec<Cdd>>, f64, bool)> = None;
    for m in rhs {
        let active: Vec<usize> = (0..m.len()).filter(|&k| m[k].is_some()).collect();
        let skipped: Vec<usize> = (0..m.len()).filter(|&k| m[k].is_none()).collect();
        let reuse = matches!(&cache, Some((a, ..)) if *a == active);
        if !reuse {
            let lams: Vec<Complex64> = active.iter().map(|&k| sys.eigenvalues[k]).collect();
            let g0 = gram(&lams, tau);
            let mut g = g0.clone();
            let (l, cond, reg) = if lams.is_empty() {
                (Vec::new(), 1.0, false)
            } else {
                factor(&mut g)?
            };
            cache = Some((active.clone(), g0, l, cond, reg));
        }
        let (_, g0, l, cond, reg) = cache.as_ref().unwrap();
        let b: Vec<Cdd> = active.iter().map(|&k| m[k].unwrap()).collect();
        let c = if b.is_empty() {
            Vec::new()
        } else {
            cholesky_solve(l, &b)
        };
        let gc = matvec(g0, &c);
        let res: Vec<Cdd> = gc.iter().zip(&b).map(|(x, y)| *x - *y).collect();
        let bn = vnorm(&b).to_f64();
        let moment_residual = if bn == 0.0 {
            vnorm(&res).to_f64()
        } else {
            vnorm(&res).to_f64() / bn
        };
        let gram_norm_sqr = c
            .iter()
            .zip(&gc)
            .fold(Dd::ZERO, |acc, (x, y)| acc + (x.conj() * *y).re)
            .to_f64();
        let model = ExponentialSum {
            tau,
            exponents: active.iter().map(|&k| sys.eigenvalues[k]).collect(),
            coefficients: c,
        };
        out.push(ControlSolution {
            signal: ControlSignal::from_model(model, DEFAULT_SAMPLES),
            moments: b.iter().map(|v| v.to_c64()).collect(),
            moment_residual,
            gram_norm_sqr,
            condition: *cond,
            regularized: *reg,
            skipped_modes: skipped,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `states[k][n] = xₙ(times[k])`.
    pub states: Vec<Vec<Complex64>>,
    pub endpoint: Vec<Complex64>,
    /// Largest endpoint change at the last panel doubling.
    pub endpoint_change: f64,
    pub panels: usize,
}

/// `xₙ(t) = e^{−λₙt}x0ₙ + b̄ₙ∫₀^t e^{−λₙ(t−r)}u(r)dr` on a panel grid,
/// doubling panels until the endpoint moves by at most [`SIMULATION_TOLERANCE`]
/// (relative to `max(1, |x(τ)|)`).
pub fn simulate(sys: &DiagonalSystem, u: &ControlSignal, x0: &[Complex64]) -> Result<Trajectory> {
    if x0.len() != sys.len() {
        return Err(invalid(format!("state length {} for {} modes", x0.len(), sys.len())));
    }
    let tau = u.horizon();
    let fastest = sys.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut panels = ((tau * fastest).ceil() as usize).max(16);
    let mut prev = run(sys, u, x0, tau, panels);
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let mut cur = run(sys, u, x0, tau, panels);
        let scale = cur.endpoint.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let change = cur
            .endpoint
            .iter()
            .zip(&prev.endpoint)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        cur.endpoint_change = change;
        if change <= SIMULATION_TOLERANCE * scale {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::SimulationNotConverged {
        change: prev.endpoint_change,
    })
}

fn run(sys: &DiagonalSystem, u: &ControlSignal, x0: &[Complex64], tau: f64, panels: usize) -> Trajectory {
    // The forced part is accumulated in double-double: minimum-norm controls
    // for high modes are large sums that cancel almost completely.
    let gl = default_rule();
    let h = Dd::new(tau) / panels as f64;
    let n = sys.len();
    let times: Vec<f64> = (0..=panels).map(|k| (h * k as f64).to_f64()).collect();
    let lams: Vec<Cdd> = sys.eigenvalues.iter().map(|&z| Cdd::from(z)).collect();
    let bconj: Vec<Cdd> = sys.b.iter().map(|b| Cdd::from(b.conj())).collect();
    let step: Vec<Cdd> = lams.iter().map(|l| (-*l).scale(h).exp()).collect();
    // e^{−λ(b−r)} depends only on the offset of r inside its panel
    let offsets: Vec<Dd> = gl.nodes.iter().map(|x| (h * (1.0 - x)).ldexp(-1)).collect();
    let kernel: Vec<Vec<Cdd>> = lams
        .iter()
        .map(|l| offsets.iter().map(|&o| (-*l).scale(o).exp()).collect())
        .collect();
    let weights: Vec<Dd> = gl.weights.iter().map(|&w| (h * w).ldexp(-1)).collect();
    let mut forced = vec![Cdd::ZERO; n];
    let mut states = Vec::with_capacity(panels + 1);
    let state = |t: f64, forced: &[Cdd]| -> Vec<Complex64> {
        (0..n)
            .map(|k| (-sys.eigenvalues[k] * t).exp() * x0[k] + forced[k].to_c64())
            .collect()
    };
    states.push(state(0.0, &forced));
    for p in 0..panels {
        let b = h * (p + 1) as f64;
        let samples: Vec<Cdd> = offsets
            .iter()
            .zip(&weights)
            .map(|(&o, &w)| u.eval_dd((b - o).to_f64()).scale(w))
            .collect();
        for k in 0..n {
            let mut integral = Cdd::ZERO;
            for (e, v) in kernel[k].iter().zip(&samples) {
                integral += *e * *v;
            }
            forced[k] = step[k] * forced[k] + bconj[k] * integral;
        }
        states.push(state(times[p + 1], &forced));
    }
    let endpoint = states.last().unwrap().clone();
    Trajectory {
        times,
        states,
        endpoint,
        endpoint_change: f64::INFINITY,
        panels,
    }
}

/// `max_t ‖x(t)‖ / (e^{−αt}‖x0‖)` over the trajectory grid.
pub fn free_decay_ratio(traj: &Trajectory, alpha: f64) -> f64 {
    let n0 = l2(&traj.states[0]);
    if n0 == 0.0 {
        return 0.0;
    }
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, x)| l2(x) / ((-alpha * t).exp() * n0))
        .fold(0.0, f64::max)
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationReport {
    pub solutions: Vec<ControlSolution>,
    /// `‖uₙ‖` against `n`.
    pub norms: Vec<f64>,
    pub condition: f64,
}

/// Controls `uₙ` steering `0` to `eₙ` at time `τ`, one per mode.
pub fn simple_oscillation_controls(sys: &DiagonalSystem, tau: f64) -> Result<OscillationReport> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {tau}")));
    }
    let n = sys.len();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let mut rhs = Vec::with_capacity(n);
    for k in 0..n {
        let mut x1 = zero.clone();
        x1[k] = Complex64::new(1.0, 0.0);
        let prob = ControlProblem::new(zero.clone(), x1, Horizon::Finite(tau))?;
        rhs.push(moments(sys, &prob, tau)?);
    }
    let solutions = solve_moments(sys, tau, &rhs)?;
    let norms = solutions.iter().map(|s| s.signal.norm()).collect();
    let condition = solutions.first().map(|s| s.condition).unwrap_or(1.0);
    Ok(OscillationReport {
        solutions,
        norms,
        condition,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityReport {
    pub tau: f64,
    /// (a) `(M_2)` check of `(iΛ, |bₙ|)`.
    pub infinite_horizon: McPhailCheck,
    /// (b) `(M_2)` check of the `τ`-weighted pair after adaptation to the upper
    /// half-plane.
    pub finite_horizon: McPhailCheck,
    /// (c) Gram condition numbers over the horizon sweep.
    pub condition_profile: Vec<(f64, f64)>,
    pub oscillation_norms: Vec<f64>,
}

pub fn controllability_report(
    sys: &DiagonalSystem,
    tau: f64,
    sweep: &[f64],
    threshold: f64,
) -> Result<ControllabilityReport> {
    let infinite_horizon = mq_check(&hardy_pair(sys, 2.0)?, threshold)?;
    let nodes = sys.rotated_nodes()?;
    let w = interpolation_weights(sys, tau)?;
    let adapted = pw_weight_adaptation(&nodes, &w, 0.5 * tau, 0.0, Side::Upper, 2.0)?;
    let finite_horizon = mq_check(&adapted.pair, threshold)?;
    let condition_profile = gram_condition_profile(sys, sweep)?;
    let oscillation_norms = simple_oscillation_controls(sys, tau)?.norms;
    Ok(ControllabilityReport {
        tau,
        infinite_horizon,
        finite_horizon,
        condition_profile,
        oscillation_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcphail::DEFAULT_MQ_THRESHOLD;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single() -> DiagonalSystem {
        DiagonalSystem::new(vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]).unwrap()
    }

    fn unit(n: usize, k: usize) -> Vec<Complex64> {
        let mut v = vec![c(0.0, 0.0); n];
        v[k] = c(1.0, 0.0);
        v
    }

    #[test]
    fn validation() {
        assert!(matches!(
            DiagonalSystem::new(vec![c(-1.0, 0.0)], vec![c(1.0, 0.0)]),
            Err(Error::UnstableEigenvalue { index: 0, .. })
        ));
        assert!(DiagonalSystem::new(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0); 2]).is_err());
        assert!(ControlProblem::new(vec![c(0.0, 0.0)], vec![c(0.0, 0.0)], Horizon::Finite(0.0)).is_err());
    }

    #[test]
    fn interpolation_problem_weights() {
        let p = to_interpolation_problem(&single(), 2.0, 0.5).unwrap();
        assert_eq!(p.nodes().points()[0], c(0.0, 1.0));
        assert!((p.weights()[0] - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(p.tau(), 1.0);
        let sys = DiagonalSystem::new(vec![c(1.0, 0.5), c(2.0, -1.0)], vec![c(3.0, 4.0), c(0.0, -2.0)]).unwrap();
        let w = interpolation_weights(&sys, 1e-14).unwrap();
        assert!((w[0] - 5.0).abs() < 1e-12 && (w[1] - 2.0).abs() < 1e-12);
        let scaled = DiagonalSystem::new(
            sys.eigenvalues().to_vec(),
            sys.control_coefficients().iter().map(|b| b * 3.0).collect(),
        )
        .unwrap();
        let ws = interpolation_weights(&scaled, 1.0).unwrap();
        let w1 = interpolation_weights(&sys, 1.0).unwrap();
        assert!((ws[0] - 3.0 * w1[0]).abs() < 1e-14 && (ws[1] - 3.0 * w1[1]).abs() < 1e-14);
    }

    #[test]
    fn single_mode_closed_form() {
        let prob = ControlProblem::new(vec![c(0.0, 0.0)], vec![c(1.0, 0.0)], Horizon::Finite(1.0)).unwrap();
        let sol = min_norm_control(&single(), &prob).unwrap();
        let g = (1.0 - (-2.0f64).exp()) / 2.0;
        assert!((sol.signal.norm().powi(2) - 1.0 / g).abs() < 1e-10);
        assert!((sol.gram_norm_sqr - 1.0 / g).abs() < 1e-13);
        assert!((sol.signal.eval(0.25) - c((-0.75f64).exp() / g, 0.0)).norm() < 1e-13);
        assert_eq!(sol.condition, 1.0);
        let traj = simulate(&single(), &sol.signal, &prob.x0).unwrap();
        assert!((traj.endpoint[0] - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn free_evolution_needs_no_control() {
        let sys = DiagonalSystem::integer_ladder(3).unwrap();
        let x0 = vec![c(1.0, 0.0), c(-2.0, 1.0), c(0.5, 0.0)];
        let x1: Vec<Complex64> = x0
            .iter()
            .enumerate()
            .map(|(k, v)| v * (-(k as f64 + 1.0) * 0.8).exp())
            .collect();
        let sol = min_norm_control(&sys, &ControlProblem::new(x0, x1, Horizon::Finite(0.8)).unwrap()).unwrap();
        assert!(sol.signal.norm() < 1e-12);
        assert!(sol.signal.values().iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn ladder_moments_and_endpoint() {
        let sys = DiagonalSystem::integer_ladder(10).unwrap();
        let prob = ControlProblem::new(vec![c(0.0, 0.0); 10], unit(10, 0), Horizon::Finite(1.0)).unwrap();
        let sol = min_norm_control(&sys, &prob).unwrap();
        assert!(sol.moment_residual <= 1e-10, "{}", sol.moment_residual);
        assert!(!sol.regularized);
        assert!(sol.condition > 1e12 && sol.condition.is_finite());
        let traj = simulate(&sys, &sol.signal, &prob.x0).unwrap();
        let err = traj
            .endpoint
            .iter()
            .zip(&prob.x1)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "endpoint error {err}");
    }

    #[test]
    fn condition_decreases_with_horizon() {
        let sys = DiagonalSystem::integer_ladder(10).unwrap();
        let prof = gram_condition_profile(&sys, &[0.5, 1.0, 2.0, 4.0]).unwrap();
        for w in prof.windows(2) {
            assert!(w[1].1 <= w[0].1, "{prof:?}");
        }
    }

    #[test]
    fn uncontrollable_mode() {
        let sys = DiagonalSystem::new(vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let bad = ControlProblem::new(vec![c(0.0, 0.0); 2], unit(2, 1), Horizon::Finite(1.0)).unwrap();
        assert!(matches!(
            min_norm_control(&sys, &bad),
            Err(Error::UncontrollableMode { index: 1 })
        ));
        let ok = ControlProblem::new(vec![c(0.0, 0.0); 2], unit(2, 0), Horizon::Finite(1.0)).unwrap();
        let sol = min_norm_control(&sys, &ok).unwrap();
        assert_eq!(sol.skipped_modes, vec![1]);
        let inf = ControlProblem::new(vec![c(0.0, 0.0); 2], unit(2, 0), Horizon::Infinite).unwrap();
        assert!(min_norm_control(&sys, &inf).is_err());
    }

    #[test]
    fn free_decay_matches_closed_form() {
        let sys = DiagonalSystem::new(vec![c(0.5, 3.0), c(1.5, -1.0), c(4.0, 0.0)], vec![c(1.0, 0.0); 3]).unwrap();
        let x0 = vec![c(1.0, -1.0), c(0.3, 0.0), c(2.0, 0.5)];
        let u = ControlSignal::zero(3.0, 64).unwrap();
        let traj = simulate(&sys, &u, &x0).unwrap();
        for (t, x) in traj.times.iter().zip(&traj.states) {
            for k in 0..3 {
                assert!((x[k] - (-sys.eigenvalues()[k] * *t).exp() * x0[k]).norm() <= 1e-10);
            }
        }
        assert!(free_decay_ratio(&traj, sys.alpha()) <= 1.0 + 1e-12);
    }

    #[test]
    fn oscillation_controls_hit_unit_vectors() {
        let sys = DiagonalSystem::integer_ladder(10).unwrap();
        let rep = simple_oscillation_controls(&sys, 1.0).unwrap();
        let zero = vec![c(0.0, 0.0); 10];
        for (k, sol) in rep.solutions.iter().enumerate() {
            let traj = simulate(&sys, &sol.signal, &zero).unwrap();
            let target = unit(10, k);
            let err = traj
                .endpoint
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err <= 1e-6, "mode {k}: {err}");
        }
        let one = simple_oscillation_controls(&single(), 1.0).unwrap();
        assert!((one.norms[0].powi(2) - 2.0 / (1.0 - (-2.0f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn sampled_signal_round_trip() {
        let prob = ControlProblem::new(vec![c(0.0, 0.0)], vec![c(1.0, 0.0)], Horizon::Finite(1.0)).unwrap();
        let sol = min_norm_control(&single(), &prob).unwrap();
        let s = ControlSignal::from_samples(sol.signal.grid().to_vec(), sol.signal.values().to_vec()).unwrap();
        assert!((s.norm() - sol.signal.norm()).abs() < 1e-10);
        let traj = simulate(&single(), &s, &prob.x0).unwrap();
        assert!((traj.endpoint[0] - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn report_contrast_and_single_mode() {
        let a = DiagonalSystem::integer_ladder(8).unwrap();
        let b = DiagonalSystem::new(
            a.eigenvalues().to_vec(),
            (1..=8).map(|n| c((-(n as f64)).exp(), 0.0)).collect(),
        )
        .unwrap();
        let sweep = [0.5, 1.0, 2.0, 4.0];
        let ra = controllability_report(&a, 1.0, &sweep, DEFAULT_MQ_THRESHOLD).unwrap();
        let rb = controllability_report(&b, 1.0, &sweep, DEFAULT_MQ_THRESHOLD).unwrap();
        assert!(rb.infinite_horizon.constant > 1e3 * ra.infinite_horizon.constant);
        let r2 = controllability_report(&a, 2.0, &sweep, DEFAULT_MQ_THRESHOLD).unwrap();
        assert!(r2.finite_horizon.constant <= ra.finite_horizon.constant * (1.0 + 1e-12));
        let s = controllability_report(&single(), 1.0, &[1.0], DEFAULT_MQ_THRESHOLD).unwrap();
        // single atom of mass 1 at height 1
        assert!((s.infinite_horizon.constant - 1.0).abs() < 1e-15);
        assert_eq!(s.condition_profile[0].1, 1.0);
        assert!((s.oscillation_norms[0].powi(2) - 2.0 / (1.0 - (-2.0f64).exp())).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn superposition(x0 in prop::collection::vec(-1.0f64..1.0, 4), x1 in prop::collection::vec(-1.0f64..1.0, 4), y1 in prop::collection::vec(-1.0f64..1.0, 4)) {
            let sys = DiagonalSystem::new(
                vec![c(1.0, 0.0), c(2.0, 1.0), c(2.0, -1.0), c(3.5, 0.0)],
                vec![c(1.0, 0.0), c(0.5, 0.5), c(0.5, -0.5), c(2.0, 0.0)],
            ).unwrap();
            let cv = |v: &[f64]| v.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>();
            let zero = vec![c(0.0, 0.0); 4];
            let p1 = ControlProblem::new(cv(&x0), cv(&x1), Horizon::Finite(1.5)).unwrap();
            let p2 = ControlProblem::new(zero.clone(), cv(&y1), Horizon::Finite(1.5)).unwrap();
            let u1 = min_norm_control(&sys, &p1).unwrap();
            let u2 = min_norm_control(&sys, &p2).unwrap();
            let grid = u1.signal.grid().to_vec();
            let sum: Vec<Complex64> = grid.iter().map(|&t| u1.signal.eval(t) + u2.signal.eval(t)).collect();
            let u = ControlSignal::from_samples(grid, sum).unwrap();
            let traj = simulate(&sys, &u, &cv(&x0)).unwrap();
            for k in 0..4 {
                let target = c(x1[k] + y1[k], 0.0);
                prop_assert!((traj.endpoint[k] - target).norm() < 1e-6);
            }
        }
    }
}
