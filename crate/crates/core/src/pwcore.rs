//! Paley-Wiener functions in spectral form, reproducing kernels and norms on
//! horizontal lines.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quad::{default_rule, PanelLayout, DEFAULT_ORDER};

/// Relative agreement required between successive panel refinements.
pub const EVAL_TOLERANCE: f64 = 1e-10;
/// Refinement stops with an error beyond this many panels.
pub const MAX_PANELS: usize = 1 << 15;

type Density = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// `f(z) = ∫_{−τ}^{τ} φ(t) e^{−itz} dt`, stored through samples of `φ` on a
/// panel layout and, when available, the density itself for refinement.
#[derive(Clone)]
pub struct PwFunction {
    bandwidth: f64,
    layout: PanelLayout,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    samples: Vec<Complex64>,
    density: Option<Density>,
    label: String,
}

impl fmt::Debug for PwFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PwFunction")
            .field("label", &self.label)
            .field("bandwidth", &self.bandwidth)
            .field("panels", &self.layout.panels())
            .field("refinable", &self.density.is_some())
            .finish()
    }
}

/// Value of an adaptive evaluation with the last refinement change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    /// `None` for functions known only through fixed samples.
    pub error_estimate: Option<f64>,
}

fn check_bandwidth(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("bandwidth must be positive, got {tau}")))
    }
}

fn check_layout(tau: f64, layout: &PanelLayout) -> Result<()> {
    let span = 1e-12 * tau.max(1.0);
    if (layout.start() + tau).abs() > span || (layout.end() - tau).abs() > span {
        return Err(invalid(format!(
            "panel layout [{}, {}] does not span [-{tau}, {tau}]",
            layout.start(),
            layout.end()
        )));
    }
    PanelLayout::new(layout.breakpoints.clone(), layout.order).map(|_| ())
}

impl PwFunction {
    pub fn from_density<F>(tau: f64, density: F, label: impl Into<String>) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        check_bandwidth(tau)?;
        let layout = PanelLayout::uniform(-tau, tau, 8, DEFAULT_ORDER);
        Self::from_density_on(tau, layout, density, label)
    }

    pub fn from_density_on<F>(tau: f64, layout: PanelLayout, density: F, label: impl Into<String>) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        check_bandwidth(tau)?;
        check_layout(tau, &layout)?;
        let rule = layout.rule();
        let samples: Vec<Complex64> = rule.nodes.iter().map(|&t| density(t)).collect();
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(invalid("density is not finite on the quadrature grid"));
        }
        Ok(PwFunction {
            bandwidth: tau,
            layout,
            nodes: rule.nodes,
            weights: rule.weights,
            samples,
            density: Some(Arc::new(density)),
            label: label.into(),
        })
    }

    /// Function known only through spectrum samples at the nodes of `layout`.
    pub fn synthesize(
        tau: f64,
        layout: PanelLayout,
        samples: Vec<Complex64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_bandwidth(tau)?;
        check_layout(tau, &layout)?;
        let rule = layout.rule();
        if samples.len() != rule.len() {
            return Err(invalid(format!(
                "expected {} spectrum samples, got {}",
                rule.len(),
                samples.len()
            )));
        }
        Ok(PwFunction {
            bandwidth: tau,
            layout,
            nodes: rule.nodes,
            weights: rule.weights,
            samples,
            density: None,
            label: label.into(),
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn layout(&self) -> &PanelLayout {
        &self.layout
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn is_refinable(&self) -> bool {
        self.density.is_some()
    }

    /// Evaluate with the stored rule only.
    pub fn evaluate_fixed(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((&t, &w), &s) in self.nodes.iter().zip(&self.weights).zip(&self.samples) {
            acc += w * s * (Complex64::new(0.0, -t) * z).exp();
        }
        acc
    }

    /// Evaluate with panel doubling until successive values agree to
    /// [`EVAL_TOLERANCE`] relative to `∫|φ(t)e^{−itz}|dt`.
    pub fn evaluate(&self, z: Complex64) -> Result<Evaluation> {
        let density = match &self.density {
            Some(d) => d,
            None => {
                return Ok(Evaluation {
                    value: self.evaluate_fixed(z),
                    error_estimate: None,
                })
            }
        };
        let widest = self
            .layout
            .breakpoints
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max);
        let reach = z.re.abs().max(z.im.abs());
        let mut k = ((widest * reach / 4.0).ceil() as usize).max(1);
        let (mut prev, _) = panel_sum(&self.layout.breakpoints, k, density.as_ref(), z);
        loop {
            k *= 2;
            let (cur, scale) = panel_sum(&self.layout.breakpoints, k, density.as_ref(), z);
            let change = (cur - prev).norm();
            if change <= EVAL_TOLERANCE * scale {
                return Ok(Evaluation {
                    value: cur,
                    error_estimate: Some(change),
                });
            }
            if k * self.layout.panels() >= MAX_PANELS {
                return Err(Error::QuadratureNotConverged {
                    last: cur,
                    previous: prev,
                });
            }
            prev = cur;
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.evaluate(z).map(|e| e.value)
    }

    pub fn eval_real(&self, x: f64) -> Result<Complex64> {
        self.eval(Complex64::new(x, 0.0))
    }

    /// Spectrum multiplied by `e^{iat}`: the result is `z ↦ f(z − a)`.
    pub fn modulate(&self, a: f64) -> PwFunction {
        let samples = self
            .nodes
            .iter()
            .zip(&self.samples)
            .map(|(&t, &s)| s * Complex64::new(0.0, a * t).exp())
            .collect();
        let density = self.density.clone().map(|d| {
            let m: Density = Arc::new(move |t: f64| d(t) * Complex64::new(0.0, a * t).exp());
            m
        });
        PwFunction {
            samples,
            density,
            label: format!("{}·e^(i{a}t)", self.label),
            ..self.clone()
        }
    }

    pub fn scaled(&self, c: Complex64) -> PwFunction {
        let density = self.density.clone().map(|d| {
            let m: Density = Arc::new(move |t: f64| c * d(t));
            m
        });
        PwFunction {
            samples: self.samples.iter().map(|&s| c * s).collect(),
            density,
            label: format!("{}·({c})", self.label),
            ..self.clone()
        }
    }

    /// `∫|f(x+iy)|ᵖ dx` with adaptive truncation.
    pub fn line_norm(&self, y: f64, p: f64, opts: &LineOptions) -> Result<LineNorm> {
        line_lp_integral(|x| self.eval(Complex64::new(x, y)), y, p, opts)
    }

    /// Samples of `f` on the line `Im z = y` over `[−radius, radius]`.
    pub fn sample_line(&self, y: f64, radius: f64, panel_width: f64) -> Result<LineSamples> {
        LineSamples::sample(|x| self.eval(Complex64::new(x, y)), -radius, radius, panel_width)
    }
}

fn panel_sum(
    breaks: &[f64],
    k: usize,
    density: &(dyn Fn(f64) -> Complex64 + Send + Sync),
    z: Complex64,
) -> (Complex64, f64) {
    let gl = default_rule();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / k as f64;
        for j in 0..k {
            let a = w[0] + j as f64 * h;
            let c = a + 0.5 * h;
            let r = 0.5 * h;
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                let t = c + r * x;
                let term = density(t) * (Complex64::new(0.0, -t) * z).exp() * (r * wt);
                scale += term.norm();
                acc += term;
            }
        }
    }
    (acc, scale)
}

/// `sin w / w` with the removable singularity filled.
pub fn sinc(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        let w2 = w * w;
        Complex64::new(1.0, 0.0) - w2 / 6.0 + w2 * w2 / 120.0 - w2 * w2 * w2 / 5040.0
    } else {
        w.sin() / w
    }
}

/// `k_λ(z) = sin τ(z−λ̄) / (τ(z−λ̄))`. On `ℝ`, `⟨f, k_λ⟩ = (π/τ) f(λ)`.
pub fn kernel_eval(lambda: Complex64, z: Complex64, tau: f64) -> Complex64 {
    sinc(tau * (z - lambda.conj()))
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("exponent must lie in (1, inf), got {p}")))
    }
}

/// Conjugate exponent `p/(p−1)`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(p / (p - 1.0))
}

/// `(1 + |Im λ|)^{−1/p} e^{τ|Im λ|}`, the comparison function for `‖k_λ‖_q`.
pub fn kernel_norm_estimate(lambda: Complex64, tau: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let b = lambda.im.abs();
    Ok((1.0 + b).powf(-1.0 / p) * (tau * b).exp())
}

/// `‖k_λ‖_q` on `ℝ` by quadrature, `q` conjugate to `p`.
pub fn kernel_line_norm(lambda: Complex64, tau: f64, p: f64, opts: &LineOptions) -> Result<f64> {
    check_bandwidth(tau)?;
    let q = conjugate_exponent(p)?;
    let n = line_lp_integral(|x| Ok(kernel_eval(lambda, Complex64::new(x, 0.0), tau)), 0.0, q, opts)?;
    Ok(n.norm())
}

/// Truncated `∫|f(x+iy)|ᵖ dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineNorm {
    pub height: f64,
    pub exponent: f64,
    /// The integral itself (the `p`-th power of the norm).
    pub value: f64,
    pub truncation_radius: f64,
    pub tail_estimate: f64,
}

impl LineNorm {
    pub fn norm(&self) -> f64 {
        self.value.powf(1.0 / self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineOptions {
    pub initial_radius: f64,
    pub max_radius: f64,
    pub panel_width: f64,
    /// Accepted ratio of tail estimate to value.
    pub tail_fraction: f64,
}

impl Default for LineOptions {
    fn default() -> Self {
        LineOptions {
            initial_radius: 16.0,
            max_radius: 8192.0,
            panel_width: 0.5,
            tail_fraction: 0.01,
        }
    }
}

/// `∫|f(x)|ᵖ dx` over `[−R, R]`, doubling `R` until the tail bound
/// `2Aᵖ R^{1−p}/(p−1)` (from `|f(x)| ≤ A/|x|` fitted on the outer tenth of the
/// window) drops below `tail_fraction` of the value.
pub fn line_lp_integral<F>(f: F, y: f64, p: f64, opts: &LineOptions) -> Result<LineNorm>
where
    F: Fn(f64) -> Result<Complex64>,
{
    check_exponent(p)?;
    if !(opts.initial_radius > 0.0 && opts.max_radius >= opts.initial_radius && opts.panel_width > 0.0) {
        return Err(invalid("invalid line-integration options"));
    }
    let mut radius = opts.initial_radius;
    let mut value = 0.0;
    let mut covered = 0.0;
    // |f(x)|·|x| at sampled nodes, kept for the edge fit
    let mut edge: Vec<(f64, f64)> = Vec::new();
    loop {
        for (a, b) in [(-radius, -covered), (covered, radius)] {
            let s = LineSamples::sample(&f, a, b, opts.panel_width)?;
            value += s.lp_integral(p);
            edge.extend(
                s.nodes
                    .iter()
                    .zip(&s.values)
                    .map(|(&x, v)| (x.abs(), v.norm() * x.abs())),
            );
        }
        if !value.is_finite() {
            return Err(invalid("line integral is not finite"));
        }
        covered = radius;
        let amp = edge
            .iter()
            .filter(|(ax, _)| *ax >= 0.9 * radius)
            .map(|e| e.1)
            .fold(0.0, f64::max);
        let tail = 2.0 * amp.powf(p) * radius.powf(1.0 - p) / (p - 1.0);
        if tail <= opts.tail_fraction * value {
            return Ok(LineNorm {
                height: y,
                exponent: p,
                value,
                truncation_radius: radius,
                tail_estimate: tail,
            });
        }
        if 2.0 * radius > opts.max_radius {
            return Err(Error::TruncationInsufficient { tail, value, radius });
        }
        edge.retain(|(ax, _)| *ax >= 0.9 * radius);
        radius *= 2.0;
    }
}

/// Function values at composite Gauss nodes of an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSamples {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl LineSamples {
    pub fn sample<F>(f: F, a: f64, b: f64, panel_width: f64) -> Result<Self>
    where
        F: Fn(f64) -> Result<Complex64>,
    {
        let panels = ((b - a) / panel_width).ceil().max(1.0) as usize;
        let rule = PanelLayout::uniform(a, b, panels, DEFAULT_ORDER).rule();
        let values = rule.nodes.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Ok(LineSamples {
            nodes: rule.nodes,
            weights: rule.weights,
            values,
        })
    }

    pub fn lp_integral(&self, p: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm().powf(p))
            .sum()
    }

    /// `∫ f ḡ dx` over the sampled interval.
    pub fn inner_with<G: Fn(f64) -> Complex64>(&self, g: G) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.values)
            .map(|((&x, &w), &v)| w * v * g(x).conj())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlancherelPolya {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub line: LineNorm,
    pub real_line: LineNorm,
}

/// `∫|f(x+iy)|ᵖ dx ≤ e^{pτ|y|} ‖f‖ₚᵖ`, accepted with relative slack `10⁻⁶`.
pub fn plancherel_polya_check(f: &PwFunction, y: f64, p: f64, opts: &LineOptions) -> Result<PlancherelPolya> {
    let real_line = f.line_norm(0.0, p, opts)?;
    let line = if y == 0.0 { real_line } else { f.line_norm(y, p, opts)? };
    let rhs = (p * f.bandwidth() * y.abs()).exp() * real_line.value;
    Ok(PlancherelPolya {
        lhs: line.value,
        rhs,
        pass: line.value <= rhs * (1.0 + 1e-6),
        line,
        real_line,
    })
}

/// `max |f(z)| / (‖f‖ₚ (1+|Im z|)^{−1/p} e^{τ|Im z|})` over the grid.
pub fn pointwise_bound_check(f: &PwFunction, grid: &[Complex64], p: f64, norm: f64) -> Result<f64> {
    check_exponent(p)?;
    if !(norm > 0.0) {
        return Err(invalid("norm must be positive"));
    }
    let tau = f.bandwidth();
    let mut worst: f64 = 0.0;
    for &z in grid {
        let v = f.eval(z)?.norm();
        worst = worst.max(v / (norm * kernel_norm_estimate(z, tau, p)?));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bump(t: f64) -> f64 {
        if t.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - t * t)).exp()
        }
    }

    #[test]
    fn constant_density_examples() {
        let tau = 1.7;
        let f = PwFunction::from_density(tau, move |_| c(0.5 / tau, 0.0), "unit").unwrap();
        assert!((f.eval(c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        assert!((f.weights().iter().sum::<f64>() - 2.0 * tau).abs() < 1e-13);

        let g = PwFunction::from_density(PI, |_| c(1.0, 0.0), "box").unwrap();
        let z = 3.5;
        let exact = 2.0 * (PI * z).sin() / z;
        let v = g.eval_real(z).unwrap();
        assert!((v.re - exact).abs() < 1e-10 && v.im.abs() < 1e-12);
        // off the axis: 2 sin(πz)/z
        let z = c(0.7, 1.3);
        let exact = 2.0 * (PI * z).sin() / z;
        assert!((g.eval(z).unwrap() - exact).norm() < 1e-10 * exact.norm());
    }

    #[test]
    fn modulation_shifts_argument() {
        let f = PwFunction::from_density(2.0, |t| c(bump(t / 2.0) * (1.0 + t), 0.3 * t), "f").unwrap();
        let a = 0.8;
        let g = f.modulate(a);
        for z in [c(0.3, 0.0), c(-2.0, 0.5), c(5.0, -1.0)] {
            let lhs = g.eval(z).unwrap();
            let rhs = f.eval(z - a).unwrap();
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
            // fixed-rule path gives the same identity
            assert!((g.evaluate_fixed(z) - f.evaluate_fixed(z - a)).norm() < 1e-12);
        }
    }

    #[test]
    fn translation_of_spectrum_is_unimodular_on_the_line() {
        // spectrum supported in [-1, 1] and its translate by s inside [-2, 2]
        let f = PwFunction::from_density(2.0, |t| c(bump(t), 0.0), "f").unwrap();
        let s = 0.75;
        let g = PwFunction::from_density(2.0, move |t| c(bump(t - s), 0.0), "g").unwrap();
        for x in [-3.0, 0.0, 1.1, 7.5] {
            let z = c(x, 0.0);
            let expected = Complex64::new(0.0, -s * x).exp() * f.eval(z).unwrap();
            assert!((g.eval(z).unwrap() - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn synthesized_matches_density_form() {
        let f = PwFunction::from_density(1.0, |t| c(bump(t), 0.0), "f").unwrap();
        let g = PwFunction::synthesize(1.0, f.layout().clone(), f.samples().to_vec(), "g").unwrap();
        let z = c(2.0, 0.5);
        let e = g.evaluate(z).unwrap();
        assert!(e.error_estimate.is_none());
        assert!((e.value - f.evaluate_fixed(z)).norm() < 1e-14);
        assert!(PwFunction::synthesize(1.0, f.layout().clone(), vec![], "bad").is_err());
        assert!(PwFunction::synthesize(2.0, f.layout().clone(), f.samples().to_vec(), "bad").is_err());
    }

    #[test]
    fn non_convergence_reported() {
        // discontinuous density at a non-breakpoint converges slowly
        let f = PwFunction::from_density(1.0, |t| c(if t > 0.123_456 { 1.0 } else { 0.0 }, 0.0), "step").unwrap();
        match f.evaluate(c(1.0, 0.0)) {
            Err(Error::QuadratureNotConverged { last, previous }) => assert!(last != previous),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn kernel_examples() {
        let lam = c(0.4, 1.2);
        assert!((kernel_eval(lam, lam.conj(), 2.0) - 1.0).norm() < 1e-15);
        for n in 1..6 {
            assert!(kernel_eval(c(0.0, 0.0), c(n as f64, 0.0), PI).norm() < 1e-15);
        }
        let v = kernel_eval(c(0.0, 1.0), c(0.0, 0.0), PI);
        assert!((v.re - 3.676_077_910_374_977_4).abs() < 1e-14 && v.im.abs() < 1e-15);
        // near the singularity the series matches the direct quotient
        let w = c(1.1e-3, -0.4e-3);
        assert!((sinc(w) - w.sin() / w).norm() < 1e-15);
    }

    #[test]
    fn kernel_norm_examples() {
        assert_eq!(kernel_norm_estimate(c(3.0, 0.0), 1.3, 1.5).unwrap(), 1.0);
        let e = kernel_norm_estimate(c(0.0, 2.0), PI, 2.0).unwrap();
        assert!((e - 309.166_251_466_021_2).abs() < 1e-9);
        assert!(kernel_norm_estimate(c(0.0, 2.0), PI, 1.0).is_err());
    }

    #[test]
    fn kernel_line_norm_matches_closed_form() {
        let opts = LineOptions::default();
        for b in [0.0, 0.5, 1.0] {
            let tau = PI;
            let exact = if b == 0.0 {
                (PI / tau).sqrt()
            } else {
                (PI * (2.0 * tau * b).sinh() / (2.0 * tau * tau * b)).sqrt()
            };
            let got = kernel_line_norm(c(0.3, b), tau, 2.0, &opts).unwrap();
            assert!((got / exact - 1.0).abs() < 0.01, "b = {b}: {got} vs {exact}");
        }
    }

    #[test]
    fn line_norm_of_sinc() {
        // sin(πx)/(πx) has unit L² norm
        let f = PwFunction::from_density(PI, |_| c(0.5 / PI, 0.0), "sinc").unwrap();
        let n = f.line_norm(0.0, 2.0, &LineOptions::default()).unwrap();
        assert!(n.tail_estimate <= 0.01 * n.value);
        assert!((n.value - 1.0).abs() < 0.01);
        let tight = LineOptions {
            max_radius: 16.0,
            tail_fraction: 1e-6,
            ..LineOptions::default()
        };
        assert!(matches!(
            f.line_norm(0.0, 2.0, &tight),
            Err(Error::TruncationInsufficient { .. })
        ));
    }

    #[test]
    fn plancherel_polya_examples() {
        let opts = LineOptions::default();
        let f = PwFunction::from_density(PI, |_| c(0.5 / PI, 0.0), "sinc").unwrap();
        let r0 = plancherel_polya_check(&f, 0.0, 2.0, &opts).unwrap();
        assert!(r0.pass && r0.lhs == r0.rhs);
        let r1 = plancherel_polya_check(&f, 1.0, 2.0, &opts).unwrap();
        assert!(r1.pass && r1.lhs < r1.rhs);
        let g = PwFunction::from_density(2.0, |t| c(bump(t / 2.0), 0.0), "even").unwrap();
        let up = g.line_norm(2.0, 1.5, &opts).unwrap();
        let down = g.line_norm(-2.0, 1.5, &opts).unwrap();
        assert!((up.value - down.value).abs() < 1e-8 * up.value);
    }

    #[test]
    fn pointwise_bound_homogeneous_and_height_stable() {
        let opts = LineOptions::default();
        let f = PwFunction::from_density(PI, |_| c(0.5 / PI, 0.0), "k0").unwrap();
        let norm = f.line_norm(0.0, 2.0, &opts).unwrap().norm();
        let real: Vec<Complex64> = (-40..=40).map(|k| c(0.25 * k as f64, 0.0)).collect();
        let high: Vec<Complex64> = real.iter().map(|z| z + c(0.0, 3.0)).collect();
        let r = pointwise_bound_check(&f, &real, 2.0, norm).unwrap();
        let g = f.scaled(c(10.0, 0.0));
        let r10 = pointwise_bound_check(&g, &real, 2.0, 10.0 * norm).unwrap();
        assert!((r - r10).abs() < 1e-12 * r);
        let rh = pointwise_bound_check(&f, &high, 2.0, norm).unwrap();
        assert!(r.is_finite() && rh < 2.0 * r.max(1.0), "{r} {rh}");
    }

    #[test]
    fn reproducing_property_on_line() {
        let f = PwFunction::from_density(PI, |t| bump(t / PI) * c(1.0 + 0.3 * t, 0.2 * t), "t").unwrap();
        let s = f.sample_line(0.0, 160.0, 0.5).unwrap();
        for lam in [c(0.0, 0.0), c(1.3, 1.0), c(-2.0, -2.0)] {
            let inner = s.inner_with(|x| kernel_eval(lam, c(x, 0.0), PI));
            let direct = f.eval(lam).unwrap();
            assert!(
                (inner - direct).norm() < 1e-8 * (1.0 + direct.norm()),
                "{inner} vs {direct}"
            );
        }
    }

    #[test]
    fn hermitian_symmetry_of_kernel() {
        use proptest::prelude::*;
        proptest!(|(a in -5.0..5.0f64, b in -2.0..2.0f64, x in -5.0..5.0f64, y in -2.0..2.0f64, tau in 0.1..4.0f64)| {
            let l = c(a, b);
            let z = c(x, y);
            let lhs = kernel_eval(l, z, tau);
            let rhs = kernel_eval(z, l, tau).conj();
            prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + lhs.norm()));
        });
    }
}
