//! Composite Gauss-Legendre quadrature on panel layouts.

use std::sync::OnceLock;

use crate::error::{invalid, Result};

/// Per-panel order used throughout the crate.
pub const DEFAULT_ORDER: usize = 16;

/// Cached rule of order [`DEFAULT_ORDER`].
pub fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(DEFAULT_ORDER))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Breakpoints of a composite rule plus the per-panel Gauss order.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelLayout {
    pub breakpoints: Vec<f64>,
    pub order: usize,
}

impl PanelLayout {
    pub fn new(breakpoints: Vec<f64>, order: usize) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(invalid("panel layout needs at least two breakpoints"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("panel breakpoints must be strictly increasing"));
        }
        if order == 0 {
            return Err(invalid("panel order must be positive"));
        }
        Ok(PanelLayout { breakpoints, order })
    }

    pub fn uniform(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut breakpoints: Vec<f64> = (0..panels).map(|k| a + k as f64 * h).collect();
        breakpoints.push(b);
        PanelLayout { breakpoints, order }
    }

    /// Uniform interior panels with `levels` geometrically shrinking panels
    /// (ratio 1/2) toward each endpoint.
    pub fn graded(a: f64, b: f64, interior: usize, levels: usize, order: usize) -> Self {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        // Grading occupies the outer quarter on each side.
        let edge = 0.25 * half;
        let mut right = Vec::new();
        let mut d = edge;
        for _ in 0..levels {
            d *= 0.5;
            right.push(half - d);
        }
        let inner = half - edge;
        let interior = interior.max(2);
        let mut pts = Vec::new();
        pts.push(a);
        let mut left: Vec<f64> = right.iter().map(|r| mid - r).collect();
        left.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.extend(left);
        let h = 2.0 * inner / interior as f64;
        for k in 0..=interior {
            pts.push(mid - inner + k as f64 * h);
        }
        let mut rgt: Vec<f64> = right.iter().map(|r| mid + r).collect();
        rgt.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.extend(rgt);
        pts.push(b);
        pts.dedup_by(|x, y| (*x - *y).abs() < 1e-15 * half.max(1.0));
        PanelLayout {
            breakpoints: pts,
            order,
        }
    }

    pub fn panels(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Split every panel in two.
    pub fn refine(&self) -> Self {
        let mut pts = Vec::with_capacity(2 * self.breakpoints.len());
        for w in self.breakpoints.windows(2) {
            pts.push(w[0]);
            pts.push(0.5 * (w[0] + w[1]));
        }
        pts.push(self.end());
        PanelLayout {
            breakpoints: pts,
            order: self.order,
        }
    }

    /// Split every panel into `k` equal parts.
    pub fn subdivide(&self, k: usize) -> Self {
        let k = k.max(1);
        let mut pts = Vec::with_capacity(k * self.breakpoints.len());
        for w in self.breakpoints.windows(2) {
            let h = (w[1] - w[0]) / k as f64;
            for j in 0..k {
                pts.push(w[0] + j as f64 * h);
            }
        }
        pts.push(self.end());
        PanelLayout {
            breakpoints: pts,
            order: self.order,
        }
    }

    pub fn rule(&self) -> QuadRule {
        let owned;
        let gl = if self.order == DEFAULT_ORDER {
            default_rule()
        } else {
            owned = GaussLegendre::new(self.order);
            &owned
        };
        let mut nodes = Vec::with_capacity(self.panels() * self.order);
        let mut weights = Vec::with_capacity(self.panels() * self.order);
        for w in self.breakpoints.windows(2) {
            let c = 0.5 * (w[0] + w[1]);
            let h = 0.5 * (w[1] - w[0]);
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(c + h * x);
                weights.push(h * wt);
            }
        }
        QuadRule { nodes, weights }
    }
}

/// Flattened nodes and positive weights of a composite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Integrate `f` over `[a, b]`, doubling panels until two successive values agree
/// to `rel_tol` (relative to `max(|value|, scale)`). Returns `(value, last change)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    order: usize,
    rel_tol: f64,
    max_panels: usize,
) -> (f64, f64) {
    let mut layout = PanelLayout::uniform(a, b, 4, order);
    let mut prev = layout.rule().integrate(&f);
    loop {
        layout = layout.refine();
        let cur = layout.rule().integrate(&f);
        let change = (cur - prev).abs();
        if change <= rel_tol * cur.abs().max(f64::MIN_POSITIVE) || layout.panels() >= max_panels {
            return (cur, change);
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 14 monomial: integral over [-1,1] is 2/15
        let v: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(14)).sum();
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
        for w in gl.nodes.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn odd_order_has_center_node() {
        let gl = GaussLegendre::new(7);
        assert_eq!(gl.nodes[3], 0.0);
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn graded_layout_weights_sum_to_length() {
        let l = PanelLayout::graded(-0.25, 0.25, 8, 6, 16);
        for w in l.breakpoints.windows(2) {
            assert!(w[1] > w[0], "{:?}", l.breakpoints);
        }
        let r = l.rule();
        assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-14);
        assert!(r.weights.iter().all(|&w| w > 0.0));
        // panels shrink toward the ends
        let first = l.breakpoints[1] - l.breakpoints[0];
        let mid = l.breakpoints[l.panels() / 2 + 1] - l.breakpoints[l.panels() / 2];
        assert!(first < mid);
    }

    #[test]
    fn refine_doubles_panels() {
        let l = PanelLayout::uniform(0.0, 1.0, 3, 4);
        assert_eq!(l.refine().panels(), 6);
        assert_eq!(l.subdivide(5).panels(), 15);
    }

    #[test]
    fn layout_validation() {
        assert!(PanelLayout::new(vec![0.0], 4).is_err());
        assert!(PanelLayout::new(vec![0.0, 0.0], 4).is_err());
        assert!(PanelLayout::new(vec![0.0, 1.0], 0).is_err());
    }

    #[test]
    fn adaptive_integrates_smooth_function() {
        let (v, _) = integrate_adaptive(|x: f64| x.cos(), 0.0, 3.0, 8, 1e-14, 1 << 12);
        assert!((v - 3f64.sin()).abs() < 1e-13);
    }
}
