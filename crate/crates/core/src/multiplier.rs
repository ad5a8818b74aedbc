//! The bump multiplier `Hε = c·𝓕φε` of exponential type `ε/2`, normalized
//! by `Hε(0) = 1`.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::pwcore::PwFunction;
use crate::quad::{integrate_adaptive, PanelLayout, DEFAULT_ORDER};

/// Real-axis table range in units of `εx`.
const TABLE_REACH: f64 = 1600.0;
const TABLE_STEP: f64 = 0.25;
const STENCIL: usize = 12;

/// `exp(−1/(1−s²))` on `(−1, 1)`, zero outside.
pub fn standard_bump(s: f64) -> f64 {
    let d = 1.0 - s * s;
    if d <= 0.0 {
        0.0
    } else {
        (-1.0 / d).exp()
    }
}

#[derive(Debug)]
pub struct BumpMultiplier {
    epsilon: f64,
    normalization: f64,
    spectrum: PwFunction,
    table: OnceLock<Vec<f64>>,
}

impl Clone for BumpMultiplier {
    fn clone(&self) -> Self {
        let table = OnceLock::new();
        if let Some(t) = self.table.get() {
            let _ = table.set(t.clone());
        }
        BumpMultiplier {
            epsilon: self.epsilon,
            normalization: self.normalization,
            spectrum: self.spectrum.clone(),
            table,
        }
    }
}

/// `φε(t) = exp(−1/(1−(2t/ε)²))` on `(−ε/2, ε/2)`; `c = 1/∫φε`.
pub fn build_multiplier(epsilon: f64) -> Result<BumpMultiplier> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let half = 0.5 * epsilon;
    let bump = move |t: f64| standard_bump(t / half);
    let (integral, _) = integrate_adaptive(bump, -half, half, DEFAULT_ORDER, 1e-15, 1 << 12);
    let normalization = 1.0 / integral;
    let layout = PanelLayout::graded(-half, half, 8, 6, DEFAULT_ORDER);
    let spectrum = PwFunction::from_density_on(
        half,
        layout,
        move |t| Complex64::new(normalization * bump(t), 0.0),
        format!("bump multiplier eps={epsilon}"),
    )?;
    Ok(BumpMultiplier {
        epsilon,
        normalization,
        spectrum,
        table: OnceLock::new(),
    })
}

impl BumpMultiplier {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `c` with `c·∫φε = 1`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn bump_integral(&self) -> f64 {
        1.0 / self.normalization
    }

    /// `c·φε` as a Paley-Wiener function of bandwidth `ε/2`.
    pub fn spectrum(&self) -> &PwFunction {
        &self.spectrum
    }

    /// Adaptive quadrature of `c∫φε(t)e^{−itz}dt`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.spectrum.eval(z)
    }

    /// `Hε(x)` for real `x` from a tabulated grid in `εx` with local
    /// 12-point interpolation; beyond the table it falls back to [`Self::eval`].
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        let u = (x * self.epsilon).abs();
        if u > TABLE_REACH - STENCIL as f64 * TABLE_STEP {
            return Ok(self.eval(Complex64::new(x, 0.0))?.re);
        }
        Ok(interpolate_even(self.table(), u))
    }

    /// Argument-dispatching evaluation: the table on the real axis.
    pub fn eval_any(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 {
            self.eval_real(z.re).map(|v| Complex64::new(v, 0.0))
        } else {
            self.eval(z)
        }
    }

    fn table(&self) -> &[f64] {
        self.table.get_or_init(|| self.build_table())
    }

    fn build_table(&self) -> Vec<f64> {
        // Hε(x) = 2c∫_0^{ε/2} φε(t) cos(tx) dt; panel width times the largest
        // frequency stays below 2.
        let half = 0.5 * self.epsilon;
        let x_max = TABLE_REACH / self.epsilon;
        let panels = (half * x_max / 2.0).ceil() as usize;
        let rule = PanelLayout::uniform(0.0, half, panels, DEFAULT_ORDER).rule();
        let c = self.normalization;
        let weighted: Vec<(f64, f64)> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| (t, 2.0 * c * w * standard_bump(t / half)))
            .filter(|p| p.1 != 0.0)
            .collect();
        let count = (TABLE_REACH / TABLE_STEP).round() as usize + 1;
        (0..count)
            .map(|k| {
                let x = k as f64 * TABLE_STEP / self.epsilon;
                weighted.iter().map(|&(t, w)| w * (t * x).cos()).sum()
            })
            .collect()
    }
}

/// Barycentric interpolation on the equispaced table of an even function.
fn interpolate_even(table: &[f64], u: f64) -> f64 {
    let pos = u / TABLE_STEP;
    let start = pos.floor() as i64 - (STENCIL as i64 / 2 - 1);
    let value = |k: i64| table[k.unsigned_abs() as usize];
    let mut num = 0.0;
    let mut den = 0.0;
    let mut w = 1.0;
    for j in 0..STENCIL {
        let k = start + j as i64;
        let d = pos - k as f64;
        if d == 0.0 {
            return value(k);
        }
        let wj = w / d;
        num += wj * value(k);
        den += wj;
        // binomial weights (−1)ʲ C(n−1, j)
        w *= -((STENCIL - 1 - j) as f64) / (j + 1) as f64;
    }
    num / den
}

/// Rectangle `[−R, R] × [−Y, Y]` sampled on an `nx × ny` lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectGrid {
    pub x_max: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl RectGrid {
    pub fn points(&self) -> Vec<Complex64> {
        let xs = lattice(self.x_max, self.nx);
        let ys = if self.y_max == 0.0 {
            vec![0.0]
        } else {
            lattice(self.y_max, self.ny)
        };
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y)))
            .collect()
    }

    pub fn refined(&self) -> Self {
        RectGrid {
            nx: 2 * self.nx - 1,
            ny: 2 * self.ny - 1,
            ..*self
        }
    }
}

fn lattice(extent: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0];
    }
    (0..n)
        .map(|k| -extent + 2.0 * extent * k as f64 / (n - 1) as f64)
        .collect()
}

/// `max |Hε(z)|(1+|z|)e^{−ε|Im z|}` over the grid.
pub fn decay_certificate(h: &BumpMultiplier, grid: &RectGrid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in grid.points() {
        let v = h.eval_any(z)?.norm() * (1.0 + z.norm()) * (-h.epsilon() * z.im.abs()).exp();
        worst = worst.max(v);
    }
    Ok(worst)
}
