//! Weighted interpolation in half-planes: the measure `ν_{Λ,ω}`, its Carleson
//! constant, Paley-Wiener weight adaptation and a small-scale solvability
//! oracle built from Hardy reproducing kernels.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::seqlab::{
    blaschke_condition_sum, carleson_measure_constant, log_carleson_products, ComplexSequence, DiscreteMeasure,
    HalfPlane, Side,
};

/// Products below this are treated as underflow.
pub const LOG_THETA_FLOOR: f64 = -690.7755278982137; // ln 1e-300

/// Verdict threshold for [`mq_check`]. Calibrated on the `{n + i}` contrast
/// pair (compensated weights give about 2, unit weights above 1e3); it has no
/// theoretical meaning.
pub const DEFAULT_MQ_THRESHOLD: f64 = 10.0;

/// Largest node count accepted by [`solvability_oracle`].
pub const ORACLE_MAX_NODES: usize = 40;

/// Condition number above which the oracle Gram matrix is ridged.
pub const ORACLE_RIDGE_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPair {
    seq: ComplexSequence,
    weights: Vec<f64>,
    q: f64,
    hp: HalfPlane,
    blaschke_sum: f64,
}

impl WeightedPair {
    pub fn new(seq: ComplexSequence, weights: Vec<f64>, q: f64, hp: HalfPlane) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(invalid(format!("q must lie in (1, inf), got {q}")));
        }
        if weights.len() != seq.len() {
            return Err(invalid(format!("{} weights for {} nodes", weights.len(), seq.len())));
        }
        if let Some(k) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid(format!("weight {k} must be positive, got {}", weights[k])));
        }
        hp.check_all(seq.points())?;
        let blaschke_sum = if seq.is_empty() {
            0.0
        } else {
            let s = blaschke_condition_sum(&seq, hp)?.sum;
            if !s.is_finite() {
                return Err(invalid("Blaschke sum is not finite"));
            }
            s
        };
        Ok(WeightedPair {
            seq,
            weights,
            q,
            hp,
            blaschke_sum,
        })
    }

    pub fn sequence(&self) -> &ComplexSequence {
        &self.seq
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exponent(&self) -> f64 {
        self.q
    }

    pub fn half_plane(&self) -> HalfPlane {
        self.hp
    }

    pub fn blaschke_sum(&self) -> f64 {
        self.blaschke_sum
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        WeightedPair::new(self.seq.clone(), weights, self.q, self.hp)
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let w = indices.iter().map(|&k| self.weights[k]).collect();
        WeightedPair::new(self.seq.select(indices)?, w, self.q, self.hp)
    }
}

/// `ν = Σ hₙ^q / (ωₙ ϑₙ)^q δ_{λₙ}` with `hₙ` the height above the boundary.
pub fn mcphail_measure(pair: &WeightedPair) -> Result<DiscreteMeasure> {
    let pts = pair.seq.points();
    if pts.is_empty() {
        return DiscreteMeasure::new(Vec::new());
    }
    let log_theta = log_carleson_products(&pair.seq, pair.hp)?;
    let mut atoms = Vec::with_capacity(pts.len());
    for (n, &z) in pts.iter().enumerate() {
        if !(log_theta[n] > LOG_THETA_FLOOR) {
            return Err(Error::ProductUnderflow {
                index: n,
                log_theta: log_theta[n],
            });
        }
        let theta = log_theta[n].exp();
        let mass = (pair.hp.height(z) / (pair.weights[n] * theta)).powf(pair.q);
        atoms.push((z, mass));
    }
    DiscreteMeasure::new(atoms)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPhailCheck {
    pub constant: f64,
    pub threshold: f64,
    /// `constant <= threshold`.
    pub satisfied: bool,
}

pub fn mq_check(pair: &WeightedPair, threshold: f64) -> Result<McPhailCheck> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(invalid(format!("threshold must be positive, got {threshold}")));
    }
    let nu = mcphail_measure(pair)?;
    let constant = carleson_measure_constant(&nu, pair.hp)?;
    Ok(McPhailCheck {
        constant,
        threshold,
        satisfied: constant <= threshold,
    })
}

/// Half-plane part of `(Λ, ω)` with weights `ωₙ e^{±τ Im λₙ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedPair {
    pub pair: WeightedPair,
    /// Index of each retained node in the input sequence.
    pub indices: Vec<usize>,
    /// Nodes on the line `Im z = a`, left out.
    pub excluded: Vec<usize>,
}

/// Keep the nodes in `{±(Im z − a) > 0}`; upper side weights become
/// `ωₙ e^{τ Im λₙ}`, lower side `ωₙ e^{−τ Im λₙ}`.
pub fn pw_weight_adaptation(
    seq: &ComplexSequence,
    weights: &[f64],
    tau: f64,
    a: f64,
    side: Side,
    q: f64,
) -> Result<AdaptedPair> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid(format!("bandwidth must be nonnegative, got {tau}")));
    }
    if weights.len() != seq.len() {
        return Err(invalid(format!("{} weights for {} nodes", weights.len(), seq.len())));
    }
    let hp = HalfPlane { offset: a, side };
    let mut indices = Vec::new();
    let mut excluded = Vec::new();
    let mut w = Vec::new();
    for (k, &z) in seq.points().iter().enumerate() {
        if z.im == a {
            excluded.push(k);
        } else if hp.contains(z) {
            indices.push(k);
            w.push(weights[k] * (side.sign() * tau * z.im).exp());
        }
    }
    let pair = WeightedPair::new(seq.select(&indices)?, w, q, hp)?;
    Ok(AdaptedPair {
        pair,
        indices,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    /// Norm of the map from weighted data to the minimal-norm interpolant.
    pub operator_norm: f64,
    pub condition: f64,
    pub regularized: bool,
}

/// `s·i/(2π(z − λ̄ − 2ia))`, the reproducing kernel of `H²` of the half-plane.
pub fn hardy_kernel(lambda: Complex64, z: Complex64, hp: HalfPlane) -> Complex64 {
    let s = hp.side.sign();
    Complex64::new(0.0, s) / (2.0 * PI * (z - hp.reflect(lambda)))
}

/// Exact `p = 2` operator norm `1/√λ_min(D G D)`, `G` the kernel Gram matrix
/// and `D = diag(ω)`.
pub fn solvability_oracle(pair: &WeightedPair, p: f64) -> Result<OracleEstimate> {
    if p != 2.0 {
        return Err(invalid("the solvability oracle supports p = 2 only"));
    }
    let n = pair.len();
    if n == 0 {
        return Err(invalid("oracle needs at least one node"));
    }
    if n > ORACLE_MAX_NODES {
        return Err(invalid(format!("oracle limited to {ORACLE_MAX_NODES} nodes, got {n}")));
    }
    let pts = pair.seq.points();
    let w = &pair.weights;
    let mut g = DMatrix::from_fn(n, n, |j, k| w[j] * w[k] * hardy_kernel(pts[k], pts[j], pair.hp));
    // exact Hermitian symmetry before the eigensolve
    for j in 0..n {
        g[(j, j)] = Complex64::new(g[(j, j)].re, 0.0);
        for k in 0..j {
            g[(k, j)] = g[(j, k)].conj();
        }
    }
    let (lmin, lmax) = extreme_eigenvalues(&g);
    let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    if condition <= ORACLE_RIDGE_CONDITION {
        return Ok(OracleEstimate {
            operator_norm: 1.0 / lmin.sqrt(),
            condition,
            regularized: false,
        });
    }
    let ridge = 1e-12 * g.diagonal().iter().map(|v| v.re).sum::<f64>();
    for j in 0..n {
        g[(j, j)] += ridge;
    }
    let (lmin, _) = extreme_eigenvalues(&g);
    Ok(OracleEstimate {
        operator_norm: 1.0 / lmin.sqrt(),
        condition,
        regularized: true,
    })
}

fn extreme_eigenvalues(g: &DMatrix<Complex64>) -> (f64, f64) {
    let e = SymmetricEigen::new(g.clone()).eigenvalues;
    let lmin = e.iter().copied().fold(f64::INFINITY, f64::min);
    let lmax = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lmin, lmax)
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid("rank correlation needs two equal-length samples of size >= 2"));
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let m = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / m;
    let my = ry.iter().sum::<f64>() / m;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (vx * vy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Gaps of the merging-pair family: `2·2^{−k}`-style geometric steps from 2 to 1e-3.
pub fn merging_pair_gaps() -> Vec<f64> {
    let (hi, lo) = (2.0f64, 1e-3f64);
    (0..10).map(|k| hi * (lo / hi).powf(k as f64 / 9.0)).collect()
}

/// Nodes `±g/2 + i` with unit weights in the upper half-plane, `q = 2`.
pub fn merging_pair(gap: f64) -> Result<WeightedPair> {
    let seq = ComplexSequence::new(vec![Complex64::new(-0.5 * gap, 1.0), Complex64::new(0.5 * gap, 1.0)])?;
    WeightedPair::new(seq, vec![1.0; 2], 2.0, HalfPlane::upper(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationStudy {
    pub labels: Vec<f64>,
    pub oracle_norms: Vec<f64>,
    pub constants: Vec<f64>,
    pub regularized: Vec<bool>,
    pub rank_correlation: f64,
}

/// Oracle norm against `(M_q)` constant over a family of pairs.
pub fn correlation_study(labels: &[f64], pairs: &[WeightedPair]) -> Result<CorrelationStudy> {
    let mut oracle_norms = Vec::with_capacity(pairs.len());
    let mut constants = Vec::with_capacity(pairs.len());
    let mut regularized = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let o = solvability_oracle(pair, 2.0)?;
        oracle_norms.push(o.operator_norm);
        regularized.push(o.regularized);
        constants.push(mq_check(pair, DEFAULT_MQ_THRESHOLD)?.constant);
    }
    let rank_correlation = spearman(&oracle_norms, &constants)?;
    Ok(CorrelationStudy {
        labels: labels.to_vec(),
        oracle_norms,
        constants,
        regularized,
        rank_correlation,
    })
}
