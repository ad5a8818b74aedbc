//! Biorthogonal families `fₙ(λₖ) = δₙₖ` from the generating function of a
//! symmetric real node family, or supplied explicitly.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::pwcore::{LineNorm, LineOptions, LineSamples, PwFunction};
use crate::seqlab::{perturbation, ComplexSequence, Generator};

/// Tolerance for matching a node with its mirror image.
const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// `|S′(λₙ)|` below this is reported as a multiple zero.
pub const MULTIPLE_ZERO_THRESHOLD: f64 = 1e-10;
/// `Re log S` above this is a range error.
const LOG_OVERFLOW: f64 = 700.0;
/// Below this distance to a node the direct product form is used.
const NEAR_NODE: f64 = 1e-2;

/// Nodes beyond the truncation are modelled as `n + δ` for `n > start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub delta: f64,
    pub start: usize,
}

/// `S(z) = z·Π_{n≤M}(1 − z²/λₙ²)·Π_{n>start}(1 − z²/(n+δ)²)`, the leading `z`
/// present only when 0 is a node.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFunction {
    nodes: ComplexSequence,
    /// Real parts of the nodes, in sequence order.
    roots: Vec<f64>,
    tail: TailModel,
}

impl GeneratingFunction {
    /// `nodes` must be real and symmetric about 0.
    pub fn new(nodes: ComplexSequence, tail: TailModel) -> Result<Self> {
        let pts = nodes.points();
        if let Some(k) = pts.iter().position(|z| z.im.abs() > SYMMETRY_TOLERANCE) {
            return Err(Error::FamilyMismatch(format!(
                "node {k} = {} is not real; supply the family explicitly",
                pts[k]
            )));
        }
        let roots: Vec<f64> = pts.iter().map(|z| z.re).collect();
        let zeros = roots.iter().filter(|x| x.abs() <= SYMMETRY_TOLERANCE).count();
        if zeros > 1 {
            return Err(Error::FamilyMismatch("node family contains 0 more than once".into()));
        }
        let mut positive: Vec<f64> = roots.iter().copied().filter(|&x| x > SYMMETRY_TOLERANCE).collect();
        let mut negative: Vec<f64> = roots
            .iter()
            .copied()
            .filter(|&x| x < -SYMMETRY_TOLERANCE)
            .map(|x| -x)
            .collect();
        positive.sort_by(f64::total_cmp);
        negative.sort_by(f64::total_cmp);
        if positive.len() != negative.len()
            || positive
                .iter()
                .zip(&negative)
                .any(|(a, b)| (a - b).abs() > SYMMETRY_TOLERANCE * a.max(1.0))
        {
            return Err(Error::FamilyMismatch("node family is not symmetric about 0".into()));
        }
        if !tail.delta.is_finite() || tail.start as f64 + 1.0 + tail.delta <= 0.0 {
            return Err(invalid("tail nodes must be positive"));
        }
        if let Some(&last) = positive.last() {
            if tail.start as f64 + 1.0 + tail.delta <= last {
                return Err(invalid("tail nodes must lie beyond the truncated family"));
            }
        }
        Ok(GeneratingFunction { nodes, roots, tail })
    }

    /// Tail inferred from the generator tag, else from the largest node.
    pub fn for_sequence(nodes: ComplexSequence) -> Result<Self> {
        let start = nodes.points().iter().filter(|z| z.re > SYMMETRY_TOLERANCE).count();
        let delta = match nodes.generator() {
            Some(Generator::PerturbedIntegers { p, .. }) => perturbation(*p)?,
            Some(Generator::ShiftedIntegers { shift, .. }) if shift.norm() == 0.0 => 0.0,
            _ => {
                let last = nodes.points().iter().map(|z| z.re).fold(0.0, f64::max);
                last - start as f64
            }
        };
        GeneratingFunction::new(nodes, TailModel { delta, start })
    }

    pub fn nodes(&self) -> &ComplexSequence {
        &self.nodes
    }

    pub fn truncation(&self) -> usize {
        self.tail.start
    }

    pub fn tail(&self) -> TailModel {
        self.tail
    }

    /// `log S(z)` (any branch); `None` when `z` is a node.
    fn log_eval(&self, z: Complex64) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for &mu in &self.roots {
            let e = factor(z, mu);
            if e == Complex64::new(0.0, 0.0) {
                return None;
            }
            acc += e.ln();
        }
        let t = log_tail(z, self.tail.start, self.tail.delta)?;
        Some(acc + t)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self.log_eval(z) {
            None => Ok(Complex64::new(0.0, 0.0)),
            Some(l) => exp_checked(l, z),
        }
    }

    /// `log R_n(z)` where `S(z) = e(z, λₙ) R_n(z)`.
    fn log_cofactor(&self, n: usize, z: Complex64) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &mu) in self.roots.iter().enumerate() {
            if k == n {
                continue;
            }
            let e = factor(z, mu);
            if e == Complex64::new(0.0, 0.0) {
                return None;
            }
            acc += e.ln();
        }
        Some(acc + log_tail(z, self.tail.start, self.tail.delta)?)
    }

    /// `S′(λₙ) = e′(λₙ)·R_n(λₙ)`.
    pub fn derivative_at_node(&self, n: usize) -> Result<Complex64> {
        let lam = *self
            .roots
            .get(n)
            .ok_or_else(|| invalid(format!("node index {n} out of range")))?;
        let z = Complex64::new(lam, 0.0);
        let r = self.log_cofactor(n, z).ok_or_else(|| Error::MultipleZero {
            index: n,
            derivative: 0.0,
        })?;
        Ok(exp_checked(r, z)? * factor_derivative(lam))
    }

    /// `(S(z+h) − S(z−h))/(2h)`.
    pub fn derivative_central(&self, z: Complex64, h: f64) -> Result<Complex64> {
        Ok((self.eval(z + h)? - self.eval(z - h)?) / (2.0 * h))
    }
}

/// `e(z, 0) = z`, `e(z, μ) = 1 − z/μ`.
fn factor(z: Complex64, mu: f64) -> Complex64 {
    if mu == 0.0 {
        z
    } else {
        Complex64::new(1.0, 0.0) - z / mu
    }
}

fn factor_derivative(mu: f64) -> Complex64 {
    if mu == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(-1.0 / mu, 0.0)
    }
}

fn exp_checked(l: Complex64, z: Complex64) -> Result<Complex64> {
    if l.re > LOG_OVERFLOW || !l.re.is_finite() && l.re > 0.0 {
        return Err(Error::Range { z, log_magnitude: l.re });
    }
    Ok(l.exp())
}

/// `log Π_{n>M}(1 − z²/(n+δ)²)`: explicit factors up to `K ≥ 4|z| + 20`, then
/// `−Σₖ (z^{2k}/k)·ζ(2k, K+1+δ)`.
fn log_tail(z: Complex64, m: usize, delta: f64) -> Option<Complex64> {
    let w = z * z;
    let k_explicit = m.max((4.0 * z.norm() + 20.0).ceil() as usize);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in m + 1..=k_explicit {
        let d = n as f64 + delta;
        let e = Complex64::new(1.0, 0.0) - w / (d * d);
        if e == Complex64::new(0.0, 0.0) {
            return None;
        }
        acc += e.ln();
    }
    let a = k_explicit as f64 + 1.0 + delta;
    let mut wk = Complex64::new(1.0, 0.0);
    for k in 1..=200 {
        wk *= w;
        let term = wk * hurwitz_zeta(2 * k as u32, a) / k as f64;
        acc -= term;
        if term.norm() <= 1e-18 * (1.0 + acc.norm()) {
            break;
        }
    }
    Some(acc)
}

const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// `ζ(s, a) = Σ_{j≥0} (a+j)^{−s}` for integer `s ≥ 2`, `a ≥ 1`, by
/// Euler-Maclaurin after eight explicit terms.
pub fn hurwitz_zeta(s: u32, a: f64) -> f64 {
    let sf = s as f64;
    let n = 8;
    let mut sum: f64 = (0..n).map(|j| (a + j as f64).powf(-sf)).sum();
    let b = a + n as f64;
    let bs = b.powf(-sf);
    sum += b * bs / (sf - 1.0) + 0.5 * bs;
    // B_{2k}/(2k)! · s(s+1)…(s+2k−2) · b^{−s−2k+1}
    let mut coef = sf / b * bs; // s·b^{−s−1}
    let mut fact = 2.0;
    for (k, bern) in BERNOULLI.iter().enumerate() {
        let k = k + 1;
        let term = bern / fact * coef;
        sum += term;
        if term.abs() < 1e-18 * sum {
            break;
        }
        let j = 2 * k as u32;
        coef *= (sf + j as f64 - 1.0) * (sf + j as f64) / (b * b);
        fact *= ((j + 1) * (j + 2)) as f64;
    }
    sum
}

#[derive(Debug, Clone)]
enum FamilyKind {
    Generated {
        s: GeneratingFunction,
        derivatives: Vec<Complex64>,
    },
    Supplied {
        functions: Vec<PwFunction>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMode {
    Generated,
    Supplied,
}

#[derive(Debug, Clone)]
pub struct BiorthogonalFamily {
    nodes: ComplexSequence,
    kind: FamilyKind,
    /// Per-function factors applied after evaluation.
    scale: Vec<Complex64>,
    bandwidth: f64,
}

/// Result of checking `fₙ(λₖ) = δₙₖ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiorthogonalityCheck {
    pub max_error: f64,
    pub worst: (usize, usize),
}

/// `fₙ(z) = S(z)/(S′(λₙ)(z − λₙ))`.
pub fn biorthogonal_from_s(s: GeneratingFunction) -> Result<BiorthogonalFamily> {
    let n = s.nodes.len();
    let mut derivatives = Vec::with_capacity(n);
    for k in 0..n {
        let d = s.derivative_at_node(k)?;
        if d.norm() < MULTIPLE_ZERO_THRESHOLD {
            return Err(Error::MultipleZero {
                index: k,
                derivative: d.norm(),
            });
        }
        derivatives.push(d);
    }
    // exponential type of the sine-like product is π
    Ok(BiorthogonalFamily {
        nodes: s.nodes.clone(),
        kind: FamilyKind::Generated { s, derivatives },
        scale: vec![Complex64::new(1.0, 0.0); n],
        bandwidth: std::f64::consts::PI,
    })
}

impl BiorthogonalFamily {
    /// `functions[n]` is meant to satisfy `fₙ(λₖ) = δₙₖ` on `nodes`.
    pub fn supplied(nodes: ComplexSequence, functions: Vec<PwFunction>) -> Result<Self> {
        if functions.len() != nodes.len() {
            return Err(Error::FamilyMismatch(format!(
                "{} functions for {} nodes",
                functions.len(),
                nodes.len()
            )));
        }
        let bandwidth = functions.iter().map(|f| f.bandwidth()).fold(0.0, f64::max);
        let n = nodes.len();
        Ok(BiorthogonalFamily {
            nodes,
            kind: FamilyKind::Supplied { functions },
            scale: vec![Complex64::new(1.0, 0.0); n],
            bandwidth,
        })
    }

    pub fn mode(&self) -> FamilyMode {
        match self.kind {
            FamilyKind::Generated { .. } => FamilyMode::Generated,
            FamilyKind::Supplied { .. } => FamilyMode::Supplied,
        }
    }

    pub fn nodes(&self) -> &ComplexSequence {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Exponential type of the members.
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn generating_function(&self) -> Option<&GeneratingFunction> {
        match &self.kind {
            FamilyKind::Generated { s, .. } => Some(s),
            FamilyKind::Supplied { .. } => None,
        }
    }

    /// Multiply each member by a factor (breaks biorthogonality unless the
    /// factors are 1; intended for diagnostics).
    pub fn scaled(&self, factors: &[Complex64]) -> Result<Self> {
        if factors.len() != self.len() {
            return Err(invalid("one factor per family member required"));
        }
        let mut out = self.clone();
        for (s, f) in out.scale.iter_mut().zip(factors) {
            *s *= f;
        }
        Ok(out)
    }

    pub fn eval(&self, n: usize, z: Complex64) -> Result<Complex64> {
        if n >= self.len() {
            return Err(invalid(format!("family index {n} out of range")));
        }
        let v = match &self.kind {
            FamilyKind::Generated { s, .. } => {
                let lam = Complex64::new(s.roots[n], 0.0);
                let num = s.log_cofactor(n, z);
                let den = s.log_cofactor(n, lam).ok_or(Error::MultipleZero {
                    index: n,
                    derivative: 0.0,
                })?;
                match num {
                    None => Complex64::new(0.0, 0.0),
                    Some(l) => exp_checked(l - den, z)?,
                }
            }
            FamilyKind::Supplied { functions } => functions[n].eval(z)?,
        };
        Ok(self.scale[n] * v)
    }

    /// All members at `z`, sharing one evaluation of `S(z)`.
    pub fn eval_all(&self, z: Complex64) -> Result<Vec<Complex64>> {
        match &self.kind {
            FamilyKind::Generated { s, derivatives } => {
                let sz = s.log_eval(z);
                let mut out = Vec::with_capacity(self.len());
                for (n, (&mu, d)) in s.roots.iter().zip(derivatives).enumerate() {
                    let gap = z - mu;
                    let v = if gap.norm() <= NEAR_NODE {
                        self.eval(n, z)?
                    } else {
                        match sz {
                            None => Complex64::new(0.0, 0.0),
                            Some(l) => self.scale[n] * exp_checked(l - (d * gap).ln(), z)?,
                        }
                    };
                    out.push(v);
                }
                Ok(out)
            }
            FamilyKind::Supplied { .. } => (0..self.len()).map(|n| self.eval(n, z)).collect(),
        }
    }

    /// Largest deviation of `[fₙ(λₖ)]` from the identity.
    pub fn check(&self) -> Result<BiorthogonalityCheck> {
        let mut max_error: f64 = 0.0;
        let mut worst = (0, 0);
        for (k, &lam) in self.nodes.points().iter().enumerate() {
            let vals = self.eval_all(lam)?;
            for (n, v) in vals.iter().enumerate() {
                let target = if n == k { 1.0 } else { 0.0 };
                let e = (v - target).norm();
                if e > max_error {
                    max_error = e;
                    worst = (n, k);
                }
            }
        }
        Ok(BiorthogonalityCheck { max_error, worst })
    }

    /// Fails with a family mismatch when the biorthogonality error exceeds `tol`.
    pub fn validate(&self, tol: f64) -> Result<BiorthogonalityCheck> {
        let c = self.check()?;
        if c.max_error > tol {
            return Err(Error::FamilyMismatch(format!(
                "f_{}(λ_{}) deviates from δ by {:e}",
                c.worst.0, c.worst.1, c.max_error
            )));
        }
        Ok(c)
    }

    /// `∫|fₙ(x)|ᵖ dx` for every member, sharing evaluations and doubling the
    /// window until every tail estimate is acceptable.
    pub fn line_norms(&self, p: f64, opts: &LineOptions) -> Result<Vec<LineNorm>> {
        if !(p.is_finite() && p > 1.0) {
            return Err(invalid(format!("exponent must lie in (1, inf), got {p}")));
        }
        let n = self.len();
        let extent = self.nodes.points().iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let mut radius = opts.initial_radius.max(2.0 * extent);
        let mut covered = 0.0;
        let mut values = vec![0.0; n];
        let mut amps = vec![0.0f64; n];
        loop {
            amps.iter_mut().for_each(|a| *a = 0.0);
            for (a, b) in [(-radius, -covered), (covered, radius)] {
                let rows = LineSamples::sample(|_| Ok(Complex64::new(0.0, 0.0)), a, b, opts.panel_width)?;
                for (&x, &w) in rows.nodes.iter().zip(&rows.weights) {
                    let vals = self.eval_all(Complex64::new(x, 0.0))?;
                    for (k, v) in vals.iter().enumerate() {
                        let m = v.norm();
                        values[k] += w * m.powf(p);
                        if x.abs() >= 0.9 * radius {
                            amps[k] = amps[k].max(m * x.abs());
                        }
                    }
                }
            }
            covered = radius;
            let tails: Vec<f64> = amps
                .iter()
                .map(|a| 2.0 * a.powf(p) * radius.powf(1.0 - p) / (p - 1.0))
                .collect();
            let bad = (0..n).find(|&k| tails[k] > opts.tail_fraction * values[k]);
            match bad {
                None => {
                    return Ok((0..n)
                        .map(|k| LineNorm {
                            height: 0.0,
                            exponent: p,
                            value: values[k],
                            truncation_radius: radius,
                            tail_estimate: tails[k],
                        })
                        .collect())
                }
                Some(k) if 2.0 * radius > opts.max_radius => {
                    return Err(Error::TruncationInsufficient {
                        tail: tails[k],
                        value: values[k],
                        radius,
                    })
                }
                Some(_) => radius *= 2.0,
            }
        }
    }
}

/// Normalized member norms `‖fₙ‖ₚ (1+|Im λₙ|)^{−1/p} e^{τ|Im λₙ|}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakInterpolationReport {
    pub normalized_norms: Vec<f64>,
    pub sup: f64,
    pub argmax: usize,
}

pub fn weak_interpolation_report(
    fam: &BiorthogonalFamily,
    tau: f64,
    p: f64,
    opts: &LineOptions,
) -> Result<WeakInterpolationReport> {
    let norms = fam.line_norms(p, opts)?;
    let normalized: Vec<f64> = norms
        .iter()
        .zip(fam.nodes().points())
        .map(|(n, lam)| {
            let b = lam.im.abs();
            n.norm() * (1.0 + b).powf(-1.0 / p) * (tau * b).exp()
        })
        .collect();
    let (argmax, sup) = normalized
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    Ok(WeakInterpolationReport {
        normalized_norms: normalized,
        sup,
        argmax,
    })
}

/// `(N, sup)` for a family rebuilt at each truncation size.
pub fn weak_interpolation_trend<F>(
    sizes: &[usize],
    build: F,
    tau: f64,
    p: f64,
    opts: &LineOptions,
) -> Result<Vec<(usize, f64)>>
where
    F: Fn(usize) -> Result<BiorthogonalFamily>,
{
    sizes
        .iter()
        .map(|&n| Ok((n, weak_interpolation_report(&build(n)?, tau, p, opts)?.sup)))
        .collect()
}

/// The family generated by the perturbed-integer nodes with `|n| ≤ n_max`.
pub fn perturbed_integer_family(p: f64, n_max: usize) -> Result<BiorthogonalFamily> {
    let seq = ComplexSequence::generate(Generator::PerturbedIntegers { p, n_max })?;
    biorthogonal_from_s(GeneratingFunction::for_sequence(seq)?)
}

/// The sinc family of the integers `|n| ≤ n_max`.
pub fn integer_family(n_max: usize) -> Result<BiorthogonalFamily> {
    let n = n_max as i64;
    let seq = ComplexSequence::generate(Generator::ShiftedIntegers {
        shift: Complex64::new(0.0, 0.0),
        from: -n,
        to: n,
    })?;
    biorthogonal_from_s(GeneratingFunction::for_sequence(seq)?)
}

/// Integers `0 < |n| ≤ n_max` with the origin replaced by the pair `±gap/2`;
/// a deliberately poorly separated family.
pub fn split_origin_family(n_max: usize, gap: f64) -> Result<BiorthogonalFamily> {
    if !(gap > 0.0 && gap < 1.0) {
        return Err(invalid("split gap must lie in (0, 1)"));
    }
    let n = n_max as i64;
    let mut pts = vec![Complex64::new(-0.5 * gap, 0.0), Complex64::new(0.5 * gap, 0.0)];
    pts.extend((-n..=n).filter(|&k| k != 0).map(|k| Complex64::new(k as f64, 0.0)));
    let seq = ComplexSequence::new(pts)?;
    let s = GeneratingFunction::new(
        seq,
        TailModel {
            delta: 0.0,
            start: n_max,
        },
    )?;
    biorthogonal_from_s(s)
}
