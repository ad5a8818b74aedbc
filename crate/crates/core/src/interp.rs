//! Explicit interpolants `f = Σ (aₙ/ωₙ) fₙ Hε(· − λₙ)` and their verification.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::biortho::BiorthogonalFamily;
use crate::error::{invalid, Error, Result};
use crate::multiplier::BumpMultiplier;
use crate::pwcore::{conjugate_exponent, line_lp_integral, LineNorm, LineOptions, LineSamples};
use crate::seqlab::ComplexSequence;

/// Biorthogonality tolerance enforced before building.
pub const FAMILY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// `(1+|Im λₙ|)^{1/p} e^{−(τ+ε)|Im λₙ|}`, the normalization of the
    /// enlarged space.
    Canonical,
    Explicit(Vec<f64>),
}

/// Find `f` with `ωₙ f(λₙ) = aₙ` (data given on a finite support).
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationProblem {
    nodes: ComplexSequence,
    data: Vec<Complex64>,
    p: f64,
    weighting: Weighting,
    tau: f64,
    epsilon: f64,
}

impl InterpolationProblem {
    /// `data` lists `(node index, aₙ)`; unlisted nodes carry 0.
    pub fn new(
        nodes: ComplexSequence,
        data: &[(usize, Complex64)],
        p: f64,
        weighting: Weighting,
        tau: f64,
        epsilon: f64,
    ) -> Result<Self> {
        conjugate_exponent(p)?;
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid(format!("bandwidth must be positive, got {tau}")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        let mut dense = vec![Complex64::new(0.0, 0.0); nodes.len()];
        let mut seen = vec![false; nodes.len()];
        for &(k, a) in data {
            if k >= nodes.len() {
                return Err(invalid(format!("data index {k} outside the node set")));
            }
            if seen[k] {
                return Err(invalid(format!("data index {k} given twice")));
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(invalid(format!("data value at {k} is not finite")));
            }
            seen[k] = true;
            dense[k] = a;
        }
        if let Weighting::Explicit(w) = &weighting {
            if w.len() != nodes.len() {
                return Err(invalid(format!("{} weights for {} nodes", w.len(), nodes.len())));
            }
            if let Some(k) = w.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(invalid(format!("weight {k} must be positive")));
            }
        }
        Ok(InterpolationProblem {
            nodes,
            data: dense,
            p,
            weighting,
            tau,
            epsilon,
        })
    }

    pub fn nodes(&self) -> &ComplexSequence {
        &self.nodes
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn weighting(&self) -> &Weighting {
        &self.weighting
    }

    pub fn with_data(&self, data: &[(usize, Complex64)]) -> Result<Self> {
        InterpolationProblem::new(
            self.nodes.clone(),
            data,
            self.p,
            self.weighting.clone(),
            self.tau,
            self.epsilon,
        )
    }

    /// `ωₙ`, explicit or canonical.
    pub fn weights(&self) -> Vec<f64> {
        match &self.weighting {
            Weighting::Explicit(w) => w.clone(),
            Weighting::Canonical => canonical_weights(&self.nodes, self.p, self.tau + self.epsilon),
        }
    }

    /// `(Σ|aₙ|ᵖ)^{1/p}` of the normalized data.
    pub fn data_norm(&self) -> f64 {
        lp_norm(&self.data, self.p)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.data.len())
            .filter(|&k| self.data[k] != Complex64::new(0.0, 0.0))
            .collect()
    }
}

/// `(1+|Im λ|)^{1/p} e^{−σ|Im λ|}`.
pub fn canonical_weights(nodes: &ComplexSequence, p: f64, sigma: f64) -> Vec<f64> {
    nodes
        .points()
        .iter()
        .map(|z| {
            let b = z.im.abs();
            (1.0 + b).powf(1.0 / p) * (-sigma * b).exp()
        })
        .collect()
}

fn lp_norm(v: &[Complex64], p: f64) -> f64 {
    v.iter().map(|a| a.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationReport {
    /// `max |ωₙ f(λₙ) − aₙ|` over all nodes.
    pub node_residuals: f64,
    pub residuals: Vec<f64>,
    /// `‖f‖ₚ / ‖a‖`, zero when both vanish.
    pub norm_ratio: f64,
    pub data_norm: f64,
    pub line_norm: LineNorm,
    pub achieved_bandwidth: f64,
}

/// `Σ cₙ fₙ(z) Hε(z − λₙ)` over the data support.
#[derive(Debug, Clone)]
pub struct Interpolant<'a> {
    family: &'a BiorthogonalFamily,
    multiplier: &'a BumpMultiplier,
    coefficients: Vec<(usize, Complex64)>,
    bandwidth: f64,
}

impl<'a> Interpolant<'a> {
    pub fn coefficients(&self) -> &[(usize, Complex64)] {
        &self.coefficients
    }

    /// Exponential type bound `τ + ε`.
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Shared generating-function evaluation, tabulated multiplier on `ℝ`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if self.coefficients.is_empty() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let f = self.family.eval_all(z)?;
        let nodes = self.family.nodes().points();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(n, c) in &self.coefficients {
            acc += c * f[n] * self.multiplier.eval_any(z - nodes[n])?;
        }
        Ok(acc)
    }

    /// Per-term product form and adaptive multiplier quadrature.
    pub fn eval_independent(&self, z: Complex64) -> Result<Complex64> {
        let nodes = self.family.nodes().points();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(n, c) in &self.coefficients {
            acc += c * self.family.eval(n, z)? * self.multiplier.eval(z - nodes[n])?;
        }
        Ok(acc)
    }
}

fn check_pairing(prob: &InterpolationProblem, fam: &BiorthogonalFamily, h: &BumpMultiplier) -> Result<()> {
    if (h.epsilon() - prob.epsilon).abs() > 1e-12 * prob.epsilon {
        return Err(Error::EpsilonMismatch {
            multiplier: h.epsilon(),
            problem: prob.epsilon,
        });
    }
    let a = fam.nodes().points();
    let b = prob.nodes.points();
    if a.len() != b.len() {
        return Err(Error::FamilyMismatch(format!(
            "{} family members for {} nodes",
            a.len(),
            b.len()
        )));
    }
    if let Some(k) = (0..a.len()).find(|&k| (a[k] - b[k]).norm() > 1e-12) {
        return Err(Error::FamilyMismatch(format!("node {k} differs: {} vs {}", a[k], b[k])));
    }
    if fam.bandwidth() > prob.tau * (1.0 + 1e-12) {
        return Err(Error::FamilyMismatch(format!(
            "family type {} exceeds the problem bandwidth {}",
            fam.bandwidth(),
            prob.tau
        )));
    }
    Ok(())
}

/// Build `f = Σ (aₙ/ωₙ) fₙ Hε(· − λₙ)` and report residuals and norm ratio.
pub fn solve_interpolation<'a>(
    prob: &InterpolationProblem,
    fam: &'a BiorthogonalFamily,
    h: &'a BumpMultiplier,
) -> Result<(Interpolant<'a>, InterpolationReport)> {
    check_pairing(prob, fam, h)?;
    fam.validate(FAMILY_TOLERANCE)?;
    let w = prob.weights();
    let coefficients: Vec<(usize, Complex64)> = prob.support().into_iter().map(|k| (k, prob.data[k] / w[k])).collect();
    let f = Interpolant {
        family: fam,
        multiplier: h,
        coefficients,
        bandwidth: prob.tau + prob.epsilon,
    };
    let report = report_for(|z| f.eval(z), prob, &LineOptions::default())?;
    Ok((f, report))
}

/// Residuals and norm ratio of any evaluable `f` against the problem.
pub fn verify_interpolant<F>(f: F, prob: &InterpolationProblem) -> Result<InterpolationReport>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    report_for(f, prob, &LineOptions::default())
}

fn report_for<F>(f: F, prob: &InterpolationProblem, opts: &LineOptions) -> Result<InterpolationReport>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let w = prob.weights();
    let mut residuals = Vec::with_capacity(w.len());
    for (k, &lam) in prob.nodes.points().iter().enumerate() {
        residuals.push((w[k] * f(lam)? - prob.data[k]).norm());
    }
    let node_residuals = residuals.iter().copied().fold(0.0, f64::max);
    let line_norm = line_lp_integral(|x| f(Complex64::new(x, 0.0)), 0.0, prob.p, opts)?;
    let data_norm = prob.data_norm();
    let fnorm = line_norm.norm();
    let norm_ratio = if data_norm == 0.0 && fnorm == 0.0 {
        0.0
    } else {
        fnorm / data_norm
    };
    Ok(InterpolationReport {
        node_residuals,
        residuals,
        norm_ratio,
        data_norm,
        line_norm,
        achieved_bandwidth: prob.tau + prob.epsilon,
    })
}

/// Least-squares slope of `ln ‖f(· + iy)‖ₚ` against `|y|` (an estimate of the
/// exponential type from line-norm growth).
pub fn growth_slope<F>(f: F, heights: &[f64], p: f64, opts: &LineOptions) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if heights.len() < 2 {
        return Err(invalid("growth fit needs at least two heights"));
    }
    let mut pts = Vec::with_capacity(heights.len());
    for &y in heights {
        let n = line_lp_integral(|x| f(Complex64::new(x, y)), y, p, opts)?;
        pts.push((y.abs(), n.norm().ln()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|q| q.0).sum::<f64>() / m;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("growth fit needs distinct heights"));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormStudy {
    pub seed: u64,
    pub ratios: Vec<f64>,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    /// Largest node residual over all trials.
    pub max_residual: f64,
    /// Largest `‖f‖₂/‖a‖` over all data (`p = 2` only).
    pub operator_norm: Option<f64>,
    /// Unit data vector attaining the operator norm.
    pub extremal_data: Option<Vec<Complex64>>,
    pub truncation_radius: f64,
}

/// Columns `gₙ = fₙ Hε(· − λₙ)/ωₙ` on a real-line grid and at the nodes.
struct Design {
    weights: Vec<f64>,
    line: DMatrix<Complex64>,
    quad: Vec<f64>,
    at_nodes: DMatrix<Complex64>,
    node_weights: Vec<f64>,
    radius: f64,
}

fn build_design(prob: &InterpolationProblem, fam: &BiorthogonalFamily, h: &BumpMultiplier) -> Result<Design> {
    let nodes = prob.nodes.points();
    let n = nodes.len();
    let omega = prob.weights();
    let columns = |z: Complex64| -> Result<Vec<Complex64>> {
        let f = fam.eval_all(z)?;
        (0..n)
            .map(|k| Ok(f[k] * h.eval_any(z - nodes[k])? / omega[k]))
            .collect()
    };
    // The envelope Σ|gₙ| dominates every unit-data interpolant; its window is
    // reused for all data vectors.
    let opts = LineOptions {
        tail_fraction: 1e-4,
        ..LineOptions::default()
    };
    let envelope = line_lp_integral(
        |x| {
            Ok(Complex64::new(
                columns(Complex64::new(x, 0.0))?.iter().map(|v| v.norm()).sum(),
                0.0,
            ))
        },
        0.0,
        prob.p,
        &opts,
    )?;
    let radius = envelope.truncation_radius;
    let grid = LineSamples::sample(|_| Ok(Complex64::new(0.0, 0.0)), -radius, radius, opts.panel_width)?;
    let mut line = DMatrix::zeros(grid.nodes.len(), n);
    for (j, &x) in grid.nodes.iter().enumerate() {
        for (k, v) in columns(Complex64::new(x, 0.0))?.into_iter().enumerate() {
            line[(j, k)] = v;
        }
    }
    let mut at_nodes = DMatrix::zeros(n, n);
    for (j, &lam) in nodes.iter().enumerate() {
        for (k, v) in columns(lam)?.into_iter().enumerate() {
            at_nodes[(j, k)] = v;
        }
    }
    Ok(Design {
        weights: omega.clone(),
        line,
        quad: grid.weights,
        at_nodes,
        node_weights: omega,
        radius,
    })
}

impl Design {
    fn ratio_and_residual(&self, a: &[Complex64], p: f64) -> (f64, f64) {
        let v = nalgebra::DVector::from_column_slice(a);
        let f = &self.line * &v;
        let integral: f64 = f.iter().zip(&self.quad).map(|(x, w)| w * x.norm().powf(p)).sum();
        let at = &self.at_nodes * &v;
        let residual = (0..a.len())
            .map(|k| (self.node_weights[k] * at[k] - a[k]).norm())
            .fold(0.0, f64::max);
        (integral.powf(1.0 / p) / lp_norm(a, p), residual)
    }

    /// `√λ_max` of the Gram matrix of the columns, with its eigenvector.
    fn operator_norm(&self) -> (f64, Vec<Complex64>) {
        let mut weighted = self.line.clone();
        for (j, w) in self.quad.iter().enumerate() {
            let s = w.sqrt();
            weighted.row_mut(j).iter_mut().for_each(|v| *v *= s);
        }
        let gram = weighted.adjoint() * &weighted;
        let eig = SymmetricEigen::new(gram);
        let (k, lmax) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (k, v)| if v > b.1 { (k, v) } else { b });
        let vec = eig.eigenvectors.column(k).iter().copied().collect();
        let _ = &self.weights;
        (lmax.max(0.0).sqrt(), vec)
    }
}

/// Norm ratios over `trials` random unit data vectors (complex Gaussian,
/// full support), canonical weights; trial `k` draws from stream `k` of a
/// generator seeded with `seed`.
pub fn norm_stability_study(
    nodes: &ComplexSequence,
    fam: &BiorthogonalFamily,
    h: &BumpMultiplier,
    trials: usize,
    p: f64,
    seed: u64,
) -> Result<NormStudy> {
    if trials < 10 {
        return Err(invalid("a norm study needs at least 10 trials"));
    }
    let prob = InterpolationProblem::new(
        nodes.clone(),
        &[],
        p,
        Weighting::Canonical,
        fam.bandwidth(),
        h.epsilon(),
    )?;
    check_pairing(&prob, fam, h)?;
    fam.validate(FAMILY_TOLERANCE)?;
    let design = build_design(&prob, fam, h)?;
    let n = nodes.len();
    let mut ratios = Vec::with_capacity(trials);
    let mut max_residual: f64 = 0.0;
    for t in 0..trials {
        let a = random_unit_data(n, p, seed, t as u64);
        let (r, res) = design.ratio_and_residual(&a, p);
        ratios.push(r);
        max_residual = max_residual.max(res);
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if trials % 2 == 1 {
        sorted[trials / 2]
    } else {
        0.5 * (sorted[trials / 2 - 1] + sorted[trials / 2])
    };
    let (operator_norm, extremal_data) = if p == 2.0 {
        let (norm, v) = design.operator_norm();
        (Some(norm), Some(v))
    } else {
        (None, None)
    };
    Ok(NormStudy {
        seed,
        min: sorted[0],
        median,
        max: sorted[trials - 1],
        ratios,
        max_residual,
        operator_norm,
        extremal_data,
        truncation_radius: design.radius,
    })
}

/// Complex Gaussian vector normalized in `ℓᵖ`.
pub fn random_unit_data(n: usize, p: f64, seed: u64, stream: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let a: Vec<Complex64> = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let norm = lp_norm(&a, p);
    a.into_iter().map(|v| v / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biortho::{integer_family, perturbed_integer_family, split_origin_family};
    use crate::multiplier::build_multiplier;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense(a: &[Complex64]) -> Vec<(usize, Complex64)> {
        a.iter().copied().enumerate().collect()
    }

    #[test]
    fn unit_vector_data_is_exact() {
        let fam = perturbed_integer_family(2.0, 10).unwrap();
        let h = build_multiplier(0.5).unwrap();
        let nodes = fam.nodes().clone();
        let prob = InterpolationProblem::new(nodes, &[(4, c(1.0, 0.0))], 2.0, Weighting::Canonical, PI, 0.5).unwrap();
        let (_, rep) = solve_interpolation(&prob, &fam, &h).unwrap();
        assert!(rep.node_residuals < 1e-10, "{rep:?}");
        assert_eq!(rep.achieved_bandwidth, PI + 0.5);
    }

    #[test]
    fn alternating_data_on_integers() {
        let fam = integer_family(12).unwrap();
        let h = build_multiplier(0.25).unwrap();
        let data: Vec<(usize, Complex64)> = (0..4)
            .map(|k| (k, c(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)))
            .collect();
        let prob = InterpolationProblem::new(fam.nodes().clone(), &data, 2.0, Weighting::Canonical, PI, 0.25).unwrap();
        let (f, rep) = solve_interpolation(&prob, &fam, &h).unwrap();
        assert!(rep.node_residuals < 1e-8);
        let slope = growth_slope(|z| f.eval(z), &[0.5, 1.0, 2.0], 2.0, &LineOptions::default()).unwrap();
        assert!(slope <= (PI + 0.25) * 1.01, "slope {slope}");
        assert!(slope > 0.5 * PI);
    }

    #[test]
    fn verification_agrees_with_builder() {
        let fam = perturbed_integer_family(2.0, 8).unwrap();
        let h = build_multiplier(0.5).unwrap();
        let a = random_unit_data(fam.len(), 2.0, 7, 0);
        let prob =
            InterpolationProblem::new(fam.nodes().clone(), &dense(&a), 2.0, Weighting::Canonical, PI, 0.5).unwrap();
        let (f, rep) = solve_interpolation(&prob, &fam, &h).unwrap();
        let again = verify_interpolant(|z| f.eval_independent(z), &prob).unwrap();
        for (x, y) in rep.residuals.iter().zip(&again.residuals) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!((rep.norm_ratio - again.norm_ratio).abs() < 1e-8 * rep.norm_ratio);
        // perturbing one target shows up exactly on that node
        let mut b = a.clone();
        b[3] += 1e-3;
        let shifted = prob.with_data(&dense(&b)).unwrap();
        let r = verify_interpolant(|z| f.eval(z), &shifted).unwrap();
        assert!((r.residuals[3] - 1e-3).abs() < 1e-10);
        assert!(r.residuals.iter().enumerate().all(|(k, v)| k == 3 || *v < 1e-10));
    }

    #[test]
    fn zero_function_zero_data() {
        let fam = integer_family(3).unwrap();
        let prob = InterpolationProblem::new(fam.nodes().clone(), &[], 2.0, Weighting::Canonical, PI, 0.5).unwrap();
        let r = verify_interpolant(|_| Ok(c(0.0, 0.0)), &prob).unwrap();
        assert_eq!(r.node_residuals, 0.0);
        assert_eq!(r.norm_ratio, 0.0);
    }

    #[test]
    fn mismatches_rejected() {
        let fam = integer_family(3).unwrap();
        let h = build_multiplier(0.5).unwrap();
        let prob = InterpolationProblem::new(
            fam.nodes().clone(),
            &[(0, c(1.0, 0.0))],
            2.0,
            Weighting::Canonical,
            PI,
            0.25,
        )
        .unwrap();
        assert!(matches!(
            solve_interpolation(&prob, &fam, &h),
            Err(Error::EpsilonMismatch { .. })
        ));
        let other = integer_family(4).unwrap();
        let prob = InterpolationProblem::new(
            other.nodes().clone(),
            &[(0, c(1.0, 0.0))],
            2.0,
            Weighting::Canonical,
            PI,
            0.5,
        )
        .unwrap();
        assert!(matches!(
            solve_interpolation(&prob, &fam, &h),
            Err(Error::FamilyMismatch(_))
        ));
        assert!(InterpolationProblem::new(
            fam.nodes().clone(),
            &[(99, c(1.0, 0.0))],
            2.0,
            Weighting::Canonical,
            PI,
            0.5
        )
        .is_err());
        assert!(InterpolationProblem::new(
            fam.nodes().clone(),
            &[],
            2.0,
            Weighting::Explicit(vec![1.0; 3]),
            PI,
            0.5
        )
        .is_err());
    }

    #[test]
    fn linearity_and_weighting_consistency() {
        let fam = perturbed_integer_family(2.0, 6).unwrap();
        let h = build_multiplier(0.5).unwrap();
        let n = fam.len();
        let a = random_unit_data(n, 2.0, 11, 0);
        let b = random_unit_data(n, 2.0, 11, 1);
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let base = InterpolationProblem::new(fam.nodes().clone(), &[], 2.0, Weighting::Canonical, PI, 0.5).unwrap();
        let pa = base.with_data(&dense(&a)).unwrap();
        let pb = base.with_data(&dense(&b)).unwrap();
        let ps = base.with_data(&dense(&sum)).unwrap();
        let (fa, _) = solve_interpolation(&pa, &fam, &h).unwrap();
        let (fb, _) = solve_interpolation(&pb, &fam, &h).unwrap();
        let (fs, _) = solve_interpolation(&ps, &fam, &h).unwrap();
        let weighted = InterpolationProblem::new(
            fam.nodes().clone(),
            &dense(&a),
            2.0,
            Weighting::Explicit(base.weights()),
            PI,
            0.5,
        )
        .unwrap();
        let (fw, _) = solve_interpolation(&weighted, &fam, &h).unwrap();
        for z in [c(0.1, 0.0), c(3.3, 0.0), c(-7.7, 0.0), c(1.0, 0.5)] {
            let lhs = fs.eval(z).unwrap();
            let rhs = fa.eval(z).unwrap() + fb.eval(z).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
            assert!((fw.eval(z).unwrap() - fa.eval(z).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn study_on_perturbed_integers() {
        let fam = perturbed_integer_family(2.0, 12).unwrap();
        let h = build_multiplier(0.5).unwrap();
        let s = norm_stability_study(fam.nodes(), &fam, &h, 12, 2.0, 5).unwrap();
        assert!(s.max_residual < 1e-8);
        assert!(s.max / s.median < 10.0);
        assert!(s.operator_norm.unwrap() >= s.max * (1.0 - 1e-9));
        // reproducible
        let t = norm_stability_study(fam.nodes(), &fam, &h, 12, 2.0, 5).unwrap();
        assert_eq!(s.ratios, t.ratios);
        assert!(norm_stability_study(fam.nodes(), &fam, &h, 5, 2.0, 5).is_err());
    }

    #[test]
    fn split_origin_blows_up_operator_norm() {
        let h = build_multiplier(0.5).unwrap();
        let good = split_origin_family(10, 1.0 - 1e-9).unwrap_or_else(|_| integer_family(10).unwrap());
        let bad = split_origin_family(10, 1e-3).unwrap();
        let sg = norm_stability_study(good.nodes(), &good, &h, 10, 2.0, 1).unwrap();
        let sb = norm_stability_study(bad.nodes(), &bad, &h, 10, 2.0, 1).unwrap();
        assert!(sb.operator_norm.unwrap() > 100.0 * sg.operator_norm.unwrap());
    }
}
