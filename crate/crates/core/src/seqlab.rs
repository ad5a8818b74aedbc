//! Diagnostics on finite node sequences: Carleson products, separation,
//! density, the Blaschke condition and discrete Carleson-measure constants.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Points closer than this are treated as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

/// Reproducible recipe for a truncated node family.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `λ₀ = 0`, `λₙ = n + sign(n)·δ` for `0 < |n| ≤ n_max`, with
    /// `δ = 1/(2·max(p, q))` and `q = p/(p−1)`.
    PerturbedIntegers { p: f64, n_max: usize },
    /// `n + shift` for `from ≤ n ≤ to`.
    ShiftedIntegers { shift: Complex64, from: i64, to: i64 },
    /// `base·ratioᵏ` for `0 ≤ k < count`.
    GeometricLadder { base: Complex64, ratio: f64, count: usize },
}

impl Generator {
    pub fn points(&self) -> Result<Vec<Complex64>> {
        match *self {
            Generator::PerturbedIntegers { p, n_max } => {
                let delta = perturbation(p)?;
                let n = n_max as i64;
                Ok((-n..=n)
                    .map(|k| {
                        let x = k as f64 + (k.signum() as f64) * delta;
                        Complex64::new(x, 0.0)
                    })
                    .collect())
            }
            Generator::ShiftedIntegers { shift, from, to } => {
                if from > to {
                    return Err(invalid("shifted integers: empty index range"));
                }
                Ok((from..=to).map(|k| Complex64::new(k as f64, 0.0) + shift).collect())
            }
            Generator::GeometricLadder { base, ratio, count } => {
                if !(ratio.is_finite() && ratio > 0.0 && ratio != 1.0) {
                    return Err(invalid("ladder ratio must be positive and different from 1"));
                }
                if base == Complex64::new(0.0, 0.0) {
                    return Err(invalid("ladder base must be nonzero"));
                }
                Ok((0..count).map(|k| base * ratio.powi(k as i32)).collect())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::PerturbedIntegers { .. } => "perturbed-integers",
            Generator::ShiftedIntegers { .. } => "shifted-integers",
            Generator::GeometricLadder { .. } => "geometric-ladder",
        }
    }
}

/// Perturbation `δ = 1/(2·max(p, q))` of the perturbed-integer family.
pub fn perturbation(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(invalid(format!("exponent p must lie in (1, inf), got {p}")));
    }
    let q = p / (p - 1.0);
    Ok(1.0 / (2.0 * p.max(q)))
}

/// Finite truncation of a node family.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    points: Vec<Complex64>,
    strip_bound: Option<f64>,
    generator: Option<Generator>,
}

impl ComplexSequence {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if let Some(k) = points.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid(format!("point {k} is not finite")));
        }
        check_distinct(&points)?;
        Ok(ComplexSequence {
            points,
            strip_bound: None,
            generator: None,
        })
    }

    /// Build from a generator; the strip bound is set to `max |Im λ|`.
    pub fn generate(generator: Generator) -> Result<Self> {
        let points = generator.points()?;
        let bound = points.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let mut seq = ComplexSequence::new(points)?;
        seq.strip_bound = Some(bound);
        seq.generator = Some(generator);
        Ok(seq)
    }

    pub fn with_strip_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(invalid("strip bound must be a nonnegative real"));
        }
        if let Some(k) = self.points.iter().position(|z| z.im.abs() > bound) {
            return Err(invalid(format!(
                "point {k} = {} violates strip bound {bound}",
                self.points[k]
            )));
        }
        self.strip_bound = Some(bound);
        Ok(self)
    }

    pub fn with_generator(mut self, generator: Generator) -> Self {
        self.generator = Some(generator);
        self
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn strip_bound(&self) -> Option<f64> {
        self.strip_bound
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    /// Subsequence keeping the listed indices (in the given order).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(indices.len());
        for &i in indices {
            let z = self
                .points
                .get(i)
                .ok_or_else(|| invalid(format!("index {i} out of range")))?;
            points.push(*z);
        }
        let mut seq = ComplexSequence::new(points)?;
        seq.strip_bound = self.strip_bound;
        Ok(seq)
    }
}

fn check_distinct(points: &[Complex64]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].re.total_cmp(&points[b].re));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if points[j].re - points[i].re >= DUPLICATE_TOLERANCE {
                break;
            }
            let distance = (points[i] - points[j]).norm();
            if distance < DUPLICATE_TOLERANCE {
                let (i, j) = (i.min(j), i.max(j));
                return Err(Error::DuplicatePoints { i, j, distance });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

/// `{Im z > a}` or `{Im z < a}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub offset: f64,
    pub side: Side,
}

impl HalfPlane {
    pub fn upper(offset: f64) -> Self {
        HalfPlane {
            offset,
            side: Side::Upper,
        }
    }

    pub fn lower(offset: f64) -> Self {
        HalfPlane {
            offset,
            side: Side::Lower,
        }
    }

    /// Signed distance to the boundary line, positive inside.
    pub fn height(&self, z: Complex64) -> f64 {
        self.side.sign() * (z.im - self.offset)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.height(z) > 0.0
    }

    /// Mirror image across the boundary line.
    pub fn reflect(&self, z: Complex64) -> Complex64 {
        Complex64::new(z.re, 2.0 * self.offset - z.im)
    }

    fn check(&self, index: usize, z: Complex64) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(Error::OutsideHalfPlane { index, point: z })
        }
    }

    pub fn check_all(&self, points: &[Complex64]) -> Result<()> {
        points.iter().enumerate().try_for_each(|(i, &z)| self.check(i, z))
    }
}

/// Atomic measure `Σ mᵢ δ_{zᵢ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(Complex64, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(Complex64, f64)>) -> Result<Self> {
        if let Some(k) = atoms.iter().position(|(_, m)| !(m.is_finite() && *m >= 0.0)) {
            return Err(invalid(format!("atom {k} has invalid mass {}", atoms[k].1)));
        }
        Ok(DiscreteMeasure { atoms })
    }

    /// `Σ |Im λ − a| δ_λ`, the measure attached to a sequence in a half-plane.
    pub fn from_sequence(seq: &ComplexSequence, hp: HalfPlane) -> Result<Self> {
        hp.check_all(seq.points())?;
        Ok(DiscreteMeasure {
            atoms: seq.points().iter().map(|&z| (z, hp.height(z))).collect(),
        })
    }

    pub fn atoms(&self) -> &[(Complex64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        DiscreteMeasure::new(self.atoms.iter().map(|&(z, m)| (z, c * m)).collect())
    }
}

/// Pseudo-hyperbolic distance `|(λ−μ)/(λ−μ̄−2ia)|` (the same expression in
/// both half-planes).
pub fn carleson_factor(lambda: Complex64, mu: Complex64, hp: HalfPlane) -> Result<f64> {
    hp.check(0, lambda)?;
    hp.check(1, mu)?;
    if lambda == mu {
        return Err(Error::CoincidentPoints);
    }
    Ok(pseudo_hyperbolic(lambda, mu, hp))
}

fn pseudo_hyperbolic(lambda: Complex64, mu: Complex64, hp: HalfPlane) -> f64 {
    (lambda - mu).norm() / (lambda - hp.reflect(mu)).norm()
}

/// `ln ρ(λ, μ)` via `ρ² = 1 − 4·h(λ)h(μ)/|λ − μ*|²`, accurate when ρ is near 1.
fn log_factor(lambda: Complex64, mu: Complex64, hp: HalfPlane) -> f64 {
    let d = (lambda - hp.reflect(mu)).norm_sqr();
    let t = 4.0 * hp.height(lambda) * hp.height(mu) / d;
    if t < 0.5 {
        0.5 * (-t).ln_1p()
    } else {
        (lambda - mu).norm().ln() - 0.5 * d.ln()
    }
}

/// `ln ϑₙ` for the node at `index`.
pub fn log_carleson_product_at(seq: &ComplexSequence, hp: HalfPlane, index: usize) -> Result<f64> {
    let pts = seq.points();
    if index >= pts.len() {
        return Err(invalid(format!("index {index} out of range")));
    }
    hp.check_all(pts)?;
    Ok(log_product_unchecked(pts, hp, index))
}

fn log_product_unchecked(pts: &[Complex64], hp: HalfPlane, index: usize) -> f64 {
    let lambda = pts[index];
    pts.iter()
        .enumerate()
        .filter(|&(k, _)| k != index)
        .map(|(_, &mu)| log_factor(lambda, mu, hp))
        .sum()
}

pub fn carleson_product_at(seq: &ComplexSequence, hp: HalfPlane, index: usize) -> Result<f64> {
    log_carleson_product_at(seq, hp, index).map(f64::exp)
}

/// `ln ϑₙ` for every node.
pub fn log_carleson_products(seq: &ComplexSequence, hp: HalfPlane) -> Result<Vec<f64>> {
    let pts = seq.points();
    hp.check_all(pts)?;
    Ok((0..pts.len()).map(|n| log_product_unchecked(pts, hp, n)).collect())
}

/// `ϑₙ = Π_{k≠n} ρ(λₙ, λₖ)` for every node.
pub fn carleson_products(seq: &ComplexSequence, hp: HalfPlane) -> Result<Vec<f64>> {
    Ok(log_carleson_products(seq, hp)?.into_iter().map(f64::exp).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport {
    /// Minimum pseudo-hyperbolic distance, when a half-plane was supplied.
    pub psh_gap: Option<f64>,
    pub euclid_gap: f64,
    /// Pair attaining the Euclidean gap.
    pub closest_pair: (usize, usize),
}

pub fn separation_report(seq: &ComplexSequence, hp: Option<HalfPlane>) -> Result<SeparationReport> {
    let pts = seq.points();
    if pts.len() < 2 {
        return Err(Error::Degenerate);
    }
    if let Some(hp) = hp {
        hp.check_all(pts)?;
    }
    let mut euclid = f64::INFINITY;
    let mut pair = (0, 1);
    let mut psh = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (pts[i] - pts[j]).norm();
            if d < euclid {
                euclid = d;
                pair = (i, j);
            }
            if let Some(hp) = hp {
                psh = psh.min(pseudo_hyperbolic(pts[i], pts[j], hp));
            }
        }
    }
    Ok(SeparationReport {
        psh_gap: hp.map(|_| psh),
        euclid_gap: euclid,
        closest_pair: pair,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlaschkeSum {
    pub sum: f64,
    /// Magnitude of the last term in sequence order.
    pub last_term: f64,
}

/// `Σ |Im λₙ − a| / (1 + |λₙ|²)`.
pub fn blaschke_condition_sum(seq: &ComplexSequence, hp: HalfPlane) -> Result<BlaschkeSum> {
    let pts = seq.points();
    hp.check_all(pts)?;
    let terms = pts.iter().map(|&z| hp.height(z) / (1.0 + z.norm_sqr()));
    let mut sum = 0.0;
    let mut last_term = 0.0;
    for t in terms {
        sum += t;
        last_term = t;
    }
    Ok(BlaschkeSum { sum, last_term })
}

/// `(r, n⁺(r)/r)` where `n⁺(r)` is the largest number of real parts in a
/// closed window of length `r`.
pub fn upper_uniform_density(seq: &ComplexSequence, r_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if seq.strip_bound().is_none() {
        return Err(Error::MissingStripBound);
    }
    if r_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(invalid("window lengths must be positive"));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("window lengths must be increasing"));
    }
    let mut xs: Vec<f64> = seq.points().iter().map(|z| z.re).collect();
    xs.sort_by(f64::total_cmp);
    Ok(r_grid
        .iter()
        .map(|&r| (r, max_window_count(&xs, r) as f64 / r))
        .collect())
}

/// Largest count of sorted values in `[x, x + r]`; a maximizing window can be
/// slid until its left end sits on a value, so those candidates suffice.
fn max_window_count(xs: &[f64], r: f64) -> usize {
    let mut best = 0;
    let mut hi = 0;
    for lo in 0..xs.len() {
        if hi < lo {
            hi = lo;
        }
        while hi < xs.len() && xs[hi] <= xs[lo] + r {
            hi += 1;
        }
        best = best.max(hi - lo);
    }
    best
}

/// Lower bound for `sup_Q m(Q)/h` over boundary squares
/// `Q = {x₀ ≤ x ≤ x₀+h, |y − a| ≤ h}`.
///
/// Side lengths run over the dyadic grid `2ᵏ` covering the atom heights and the
/// horizontal extent, together with every atom height; for each side the best
/// left edge is found by a sweep with left edges on atom abscissas. Any square
/// of side in `[2ᵏ, 2ᵏ⁺¹]` is contained in a swept square of side `2ᵏ⁺¹`, so the
/// result is at least half of the true supremum. The grid is anchored at 1, so
/// removing atoms only shrinks the candidate set.
pub fn carleson_measure_constant(m: &DiscreteMeasure, hp: HalfPlane) -> Result<f64> {
    let atoms = m.atoms();
    for (i, &(z, _)) in atoms.iter().enumerate() {
        hp.check(i, z)?;
    }
    if atoms.is_empty() {
        return Ok(0.0);
    }
    // (x, height, mass) sorted by height
    let mut pts: Vec<(f64, f64, f64)> = atoms.iter().map(|&(z, w)| (z.re, hp.height(z), w)).collect();
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let h_lo = pts[0].1;
    let h_hi = pts[pts.len() - 1].1;
    let (x_min, x_max) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let extent = h_hi.max(x_max - x_min);

    let mut scales: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let k_lo = h_lo.log2().floor() as i32;
    let k_hi = extent.log2().ceil() as i32;
    scales.extend((k_lo..=k_hi).map(|k| 2f64.powi(k)));
    scales.sort_by(f64::total_cmp);
    scales.dedup();

    let mut best: f64 = 0.0;
    let mut active: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    let mut next = 0;
    for &h in &scales {
        let before = active.len();
        while next < pts.len() && pts[next].1 <= h {
            active.push((pts[next].0, pts[next].2));
            next += 1;
        }
        if active.is_empty() {
            continue;
        }
        if active.len() != before {
            active.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        best = best.max(max_window_mass(&active, h) / h);
    }
    Ok(best)
}

fn max_window_mass(sorted: &[(f64, f64)], r: f64) -> f64 {
    let mut best: f64 = 0.0;
    let mut hi = 0;
    let mut acc = 0.0;
    for lo in 0..sorted.len() {
        while hi < sorted.len() && sorted[hi].0 <= sorted[lo].0 + r {
            acc += sorted[hi].1;
            hi += 1;
        }
        best = best.max(acc);
        acc -= sorted[lo].1;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn factor_examples() {
        let hp = HalfPlane::upper(0.0);
        let f = carleson_factor(c(0.0, 1.0), c(1.0, 1.0), hp).unwrap();
        assert!((f - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            carleson_factor(c(0.0, 1.0), c(0.0, 1.0), hp),
            Err(Error::CoincidentPoints)
        );
        assert!(matches!(
            carleson_factor(c(0.0, 0.0), c(0.0, 1.0), hp),
            Err(Error::OutsideHalfPlane { .. })
        ));
        // toward the boundary of its range
        let mut prev = 0.0;
        for k in 1..20 {
            let f = carleson_factor(c(0.0, 2f64.powi(k)), c(0.3, 1.0), hp).unwrap();
            assert!(f > prev && f < 1.0);
            prev = f;
        }
        assert!(prev > 0.999);
    }

    #[test]
    fn lower_half_plane_mirrors_upper() {
        let up = HalfPlane::upper(1.0);
        let lo = HalfPlane::lower(1.0);
        let a = c(0.2, 1.5);
        let b = c(-1.0, 3.0);
        let fu = carleson_factor(a, b, up).unwrap();
        let fl = carleson_factor(up.reflect(a), up.reflect(b), lo).unwrap();
        assert!((fu - fl).abs() < 1e-15);
    }

    #[test]
    fn products_small_cases() {
        let hp = HalfPlane::upper(0.0);
        let one = ComplexSequence::new(vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(carleson_products(&one, hp).unwrap(), vec![1.0]);
        let close = ComplexSequence::new(vec![c(0.0, 1.0), c(1.000_000_1, 1.0)]).unwrap();
        let t = carleson_products(&close, hp).unwrap();
        assert!((t[0] - carleson_factor(c(0.0, 1.0), c(1.000_000_1, 1.0), hp).unwrap()).abs() < 1e-15);
        let tiny = ComplexSequence::new(vec![c(0.0, 1.0), c(1e-7, 1.0)]).unwrap();
        assert!(carleson_products(&tiny, hp).unwrap()[0] < 1e-6);
    }

    #[test]
    fn product_converges_to_closed_form() {
        let seq = ComplexSequence::generate(Generator::ShiftedIntegers {
            shift: c(0.0, 1.0),
            from: -1000,
            to: 1000,
        })
        .unwrap();
        let theta = carleson_product_at(&seq, HalfPlane::upper(0.0), 1000).unwrap();
        let exact = 2.0 * std::f64::consts::PI / (2.0 * std::f64::consts::PI).sinh();
        assert!((theta / exact - 1.0).abs() < 5e-3);
    }

    #[test]
    fn separation_examples() {
        let seq = ComplexSequence::generate(Generator::PerturbedIntegers { p: 2.0, n_max: 50 }).unwrap();
        let r = separation_report(&seq, None).unwrap();
        assert!((r.euclid_gap - 1.0).abs() < 1e-12);
        assert!(r.psh_gap.is_none());
        let two = ComplexSequence::new(vec![c(0.0, 1.0), c(0.0, 3.0)]).unwrap();
        let r = separation_report(&two, Some(HalfPlane::upper(0.0))).unwrap();
        assert!((r.psh_gap.unwrap() - 0.5).abs() < 1e-15);
        let one = ComplexSequence::new(vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(separation_report(&one, None), Err(Error::Degenerate));
    }

    #[test]
    fn blaschke_examples() {
        let hp = HalfPlane::upper(0.0);
        let one = ComplexSequence::new(vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(blaschke_condition_sum(&one, hp).unwrap().sum, 0.5);
        let ladder = ComplexSequence::generate(Generator::GeometricLadder {
            base: c(0.0, 1.0),
            ratio: 2.0,
            count: 21,
        })
        .unwrap();
        let b = blaschke_condition_sum(&ladder, hp).unwrap();
        let direct: f64 = (0..=20).map(|k| 2f64.powi(k) / (1.0 + 4f64.powi(k))).sum();
        assert!((b.sum - direct).abs() < 1e-14);
        assert!((b.sum - 1.383_092_049_890_427).abs() < 1e-12);
        assert!(b.last_term < 1e-6);
    }

    #[test]
    fn density_examples() {
        let seq = ComplexSequence::generate(Generator::PerturbedIntegers { p: 2.0, n_max: 500 }).unwrap();
        let d = upper_uniform_density(&seq, &[0.5, 100.0]).unwrap();
        assert_eq!(d[0], (0.5, 2.0));
        assert!(d[1].1 >= 1.0 && d[1].1 <= 1.05);
        let step: Vec<Complex64> = (0..50).map(|k| c(10.0 * k as f64, 0.0)).collect();
        let seq = ComplexSequence::new(step).unwrap().with_strip_bound(0.0).unwrap();
        let d = upper_uniform_density(&seq, &[100.0]).unwrap();
        assert!((d[0].1 - 0.11).abs() < 1e-15);
        let bare = ComplexSequence::new(vec![c(0.0, 0.0)]).unwrap();
        assert_eq!(upper_uniform_density(&bare, &[1.0]), Err(Error::MissingStripBound));
        assert!(upper_uniform_density(&seq, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn measure_examples() {
        let hp = HalfPlane::upper(0.0);
        let single = DiscreteMeasure::new(vec![(c(0.0, 1.0), 1.0)]).unwrap();
        assert_eq!(carleson_measure_constant(&single, hp).unwrap(), 1.0);
        let seq = ComplexSequence::generate(Generator::ShiftedIntegers {
            shift: c(0.0, 1.0),
            from: -200,
            to: 200,
        })
        .unwrap();
        let sigma = DiscreteMeasure::from_sequence(&seq, hp).unwrap();
        let k = carleson_measure_constant(&sigma, hp).unwrap();
        assert!((0.25..=4.0).contains(&k), "{k}");
        let outside = DiscreteMeasure::new(vec![(c(0.0, -1.0), 1.0)]).unwrap();
        assert!(carleson_measure_constant(&outside, hp).is_err());
        assert!(DiscreteMeasure::new(vec![(c(0.0, 1.0), -1.0)]).is_err());
    }

    #[test]
    fn duplicates_rejected() {
        let err = ComplexSequence::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0 + 1e-13, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::DuplicatePoints { i: 0, j: 2, .. }));
        assert!(ComplexSequence::new(vec![c(0.0, 2.0)])
            .unwrap()
            .with_strip_bound(1.0)
            .is_err());
    }

    fn interior_point() -> impl Strategy<Value = Complex64> {
        (-5.0..5.0f64, 0.01..5.0f64).prop_map(|(x, y)| c(x, y))
    }

    proptest! {
        #[test]
        fn rho_symmetric_and_in_unit_interval(a in interior_point(), b in interior_point()) {
            prop_assume!((a - b).norm() > 1e-9);
            let hp = HalfPlane::upper(0.0);
            let f = carleson_factor(a, b, hp).unwrap();
            let g = carleson_factor(b, a, hp).unwrap();
            prop_assert!(f > 0.0 && f < 1.0);
            prop_assert!((f - g).abs() < 1e-14);
            prop_assert!((log_factor(a, b, hp) - f.ln()).abs() < 1e-10 * (1.0 + f.ln().abs()));
        }

        #[test]
        fn density_subadditive(r in 0.1..40.0f64, s in 0.1..40.0f64, seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut xs: Vec<f64> = (0..80).map(|_| rng.gen_range(-50.0..50.0)).collect();
            xs.sort_by(f64::total_cmp);
            let n = |t: f64| max_window_count(&xs, t);
            prop_assert!(n(r + s) <= n(r) + n(s));
        }

        #[test]
        fn measure_constant_linear_and_monotone(seed in 0u64..500, scale in 0.01..100.0f64) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let atoms: Vec<(Complex64, f64)> = (0..12)
                .map(|_| (c(rng.gen_range(-10.0..10.0), rng.gen_range(0.05..4.0)), rng.gen_range(0.0..3.0)))
                .collect();
            let hp = HalfPlane::upper(0.0);
            let m = DiscreteMeasure::new(atoms.clone()).unwrap();
            let k = carleson_measure_constant(&m, hp).unwrap();
            let ks = carleson_measure_constant(&m.scaled(scale).unwrap(), hp).unwrap();
            prop_assert!((ks - scale * k).abs() <= 1e-12 * ks.abs());
            let drop = rng.gen_range(0..atoms.len());
            let mut fewer = atoms;
            fewer.remove(drop);
            let kf = carleson_measure_constant(&DiscreteMeasure::new(fewer).unwrap(), hp).unwrap();
            prop_assert!(kf <= k * (1.0 + 1e-12));
        }

        #[test]
        fn strip_separation_gives_psh_lower_bound(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = 1.0;
            let pts: Vec<Complex64> = (0..15)
                .map(|k| c(2.0 * k as f64 + rng.gen_range(-0.4..0.4), rng.gen_range(-m..m)))
                .collect();
            let seq = ComplexSequence::new(pts).unwrap().with_strip_bound(m).unwrap();
            let hp = HalfPlane::lower(2.0 * m);
            let r = separation_report(&seq, Some(hp)).unwrap();
            // heights lie in [M, 3M], so 4 h h' <= 36 M^2
            let d = r.euclid_gap;
            let bound = d / (d * d + 36.0 * m * m).sqrt();
            prop_assert!(r.psh_gap.unwrap() >= bound * (1.0 - 1e-12));
        }
    }
}
