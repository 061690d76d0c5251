//! Linearization of expanding circle maps through their leaf measure.
//!
//! For a degree-d expanding map fixing 0, the preimages of 0 cut the circle
//! into branch cylinders, and the measure of maximal entropy gives every
//! level-k cylinder mass exactly d^{-k}. The cumulative distribution built
//! from sorted preimage quantiles is therefore exact at its knots; pushing
//! the map through that CDF produces a coordinate in which the dynamics is
//! linear, and all the audits in this module (interval scaling, derivative
//! flatness, holonomy scaling, idempotence) quantify how far the finite
//! construction strays from that ideal.

use crate::{det, tol, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::TAU;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Hard ceiling on preimage-tree depth.
const MAX_DEPTH: u32 = 24;
/// Largest preimage population the tree construction will hold in memory.
const MAX_TREE_POINTS: u128 = 1 << 24;
/// Chunk length for deterministic parallel reductions in this module.
const CHUNK: usize = 4096;
/// Base-interval width for the holonomy finite difference.
const HOLONOMY_DU: f64 = 1.0 / 256.0;

/// Degree-d circle map with a lift fixing 0, exposing the monotone inverse
/// branches the preimage-tree constructions need.
pub trait CircleDegreeMap: Sync {
    fn degree(&self) -> u32;
    /// Lift G with G(0) = 0 and G(x+1) = G(x) + degree.
    fn lift(&self, x: f64) -> f64;
    /// The unique x in [0,1) with lift(x) = y + branch, for y in [0,1).
    fn inverse_branch(&self, y: f64, branch: u32) -> f64;
    fn apply(&self, x: f64) -> f64 {
        self.lift(x).rem_euclid(1.0)
    }
}

// ---------------------------------------------------------------------------
// The analytic map family
// ---------------------------------------------------------------------------

/// g(x) = d·x + (eps/2π)·sin(2πx) mod 1, an expanding map of degree d.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpandingMap {
    d: u32,
    eps: f64,
}

impl ExpandingMap {
    /// The derivative d + eps·cos must stay above 1.1, hence |eps| ≤ d − 1.1.
    pub fn new(d: u32, eps: f64) -> Result<Self> {
        if !(2..=16).contains(&d) {
            return Err(invalid(format!("degree must be in 2..=16, got {d}")));
        }
        if !eps.is_finite() || d as f64 - eps.abs() < 1.1 - 1e-12 {
            return Err(invalid(format!(
                "perturbation must satisfy |eps| <= {}, got {eps}",
                d as f64 - 1.1
            )));
        }
        Ok(Self { d, eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.d as f64 + self.eps * (TAU * x).cos()
    }
}

impl CircleDegreeMap for ExpandingMap {
    fn degree(&self) -> u32 {
        self.d
    }

    fn lift(&self, x: f64) -> f64 {
        self.d as f64 * x + self.eps / TAU * (TAU * x).sin()
    }

    /// Safeguarded Newton iteration; the derivative floor of 1.1 makes the
    /// bracket shrink geometrically even when Newton steps are rejected.
    fn inverse_branch(&self, y: f64, branch: u32) -> f64 {
        let t = y + branch as f64;
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let mut x = (t / self.d as f64).clamp(0.0, 1.0);
        for _ in 0..80 {
            let f = self.lift(x) - t;
            if f.abs() <= 1e-15 * (1.0 + t) {
                break;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let step = f / self.derivative(x);
            let cand = x - step;
            x = if cand > lo && cand < hi {
                cand
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-17 {
                break;
            }
        }
        x
    }
}

// ---------------------------------------------------------------------------
// Leaf measure CDF
// ---------------------------------------------------------------------------

/// Strictly increasing piecewise-linear CDF on [0,1], stored through its
/// quantile knots: `knots[i]` is the point whose cumulative mass is i/2^m.
/// Forward evaluation interpolates between knots; the inverse is a direct
/// index lookup, so both directions are monotone by construction.
#[derive(Debug, Clone)]
pub struct LeafMeasureCDF {
    resolution_log: u32,
    knots: Vec<f64>,
}

impl LeafMeasureCDF {
    pub fn from_knots(resolution_log: u32, knots: Vec<f64>) -> Result<Self> {
        if !(4..=MAX_DEPTH).contains(&resolution_log) {
            return Err(invalid(format!(
                "resolution exponent must be in 4..={MAX_DEPTH}, got {resolution_log}"
            )));
        }
        let n = 1usize << resolution_log;
        if knots.len() != n + 1 {
            return Err(invalid(format!(
                "expected {} knots, got {}",
                n + 1,
                knots.len()
            )));
        }
        if knots[0] != 0.0 || knots[n] != 1.0 {
            return Err(invalid("quantile knots must start at 0 and end at 1"));
        }
        for w in knots.windows(2) {
            if !(w[1] > w[0]) {
                return Err(invalid(format!(
                    "quantile knots must be strictly increasing, found {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            resolution_log,
            knots,
        })
    }

    pub fn identity(resolution_log: u32) -> Self {
        let n = 1usize << resolution_log;
        let knots = (0..=n).map(|i| i as f64 / n as f64).collect();
        Self {
            resolution_log,
            knots,
        }
    }

    pub fn resolution_log(&self) -> u32 {
        self.resolution_log
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// F(x), clamped to [0,1] outside the domain. Evaluation at a knot
    /// reproduces the dyadic quantile with no rounding.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots.len() - 1;
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let cell = self.knots.partition_point(|&k| k <= x) - 1;
        let cell = cell.min(n - 1);
        let frac = (x - self.knots[cell]) / (self.knots[cell + 1] - self.knots[cell]);
        (cell as f64 + frac) / n as f64
    }

    /// F extended to [0, degree] by F(y + k) = F(y) + k.
    fn eval_extended(&self, y: f64) -> f64 {
        let k = y.floor();
        self.eval(y - k) + k
    }

    /// Quantile function: monotone linear interpolation between knots.
    pub fn inverse(&self, q: f64) -> f64 {
        let n = self.knots.len() - 1;
        if q <= 0.0 {
            return 0.0;
        }
        if q >= 1.0 {
            return 1.0;
        }
        let t = q * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let frac = t - i as f64;
        self.knots[i] + frac * (self.knots[i + 1] - self.knots[i])
    }

    /// Mass of the positively oriented circle arc from a to b.
    pub fn arc_mass(&self, a: f64, b: f64) -> f64 {
        if a <= b {
            self.eval(b) - self.eval(a)
        } else {
            1.0 - self.eval(a) + self.eval(b)
        }
    }

    /// Exact sup distance to another piecewise-linear CDF: the difference is
    /// piecewise linear, so its extremes sit at knots of either operand.
    pub fn sup_distance(&self, other: &LeafMeasureCDF) -> f64 {
        let mut sup = 0.0f64;
        let n = self.knots.len() - 1;
        for (i, &x) in self.knots.iter().enumerate() {
            sup = sup.max((i as f64 / n as f64 - other.eval(x)).abs());
        }
        let m = other.knots.len() - 1;
        for (i, &x) in other.knots.iter().enumerate() {
            sup = sup.max((self.eval(x) - i as f64 / m as f64).abs());
        }
        sup
    }

    /// Sup distance to the identity CDF.
    pub fn identity_distance(&self) -> f64 {
        let n = self.knots.len() - 1;
        self.knots
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Preimage tree and the maximal-entropy CDF
// ---------------------------------------------------------------------------

/// Sorted level-`depth` preimages of the fixed point 0. Branch images are
/// disjoint increasing intervals, so branch-major concatenation of the
/// previous sorted level is already sorted.
fn preimage_level<M: CircleDegreeMap>(map: &M, depth: u32) -> Result<Vec<f64>> {
    let d = map.degree();
    let total = (d as u128)
        .checked_pow(depth)
        .filter(|&t| t <= MAX_TREE_POINTS)
        .ok_or_else(|| {
            Error::ResourceLimit(format!(
                "preimage tree of degree {d} and depth {depth} exceeds the point budget"
            ))
        })?;
    let _ = total;
    let mut level = vec![0.0f64];
    for _ in 0..depth {
        let n = level.len();
        let prev = level;
        level = det::map_fold(
            n * d as usize,
            CHUNK,
            |range| {
                let mut out = Vec::with_capacity(range.len());
                for idx in range {
                    let branch = (idx / n) as u32;
                    out.push(map.inverse_branch(prev[idx % n], branch));
                }
                out
            },
            Vec::new(),
            |mut acc, mut part| {
                acc.append(&mut part);
                acc
            },
        );
    }
    for w in level.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Numerical(format!(
                "preimage tree lost monotonicity between {} and {}",
                w[0], w[1]
            )));
        }
    }
    Ok(level)
}

/// CDF of the maximal-entropy measure plus the exactness diagnostic of the
/// underlying preimage tree.
#[derive(Debug, Clone, Serialize)]
pub struct MmeCdfReport {
    pub depth: u32,
    pub resolution_log: u32,
    pub degree: u32,
    /// Worst |x_j − j/dᵈᵉᵖᵗʰ| over the full sorted preimage level; zero for
    /// the unperturbed doubling map, and the idempotence measure for
    /// linearized maps.
    pub identity_deviation: f64,
    #[serde(skip)]
    pub cdf: LeafMeasureCDF,
}

/// Builds the maximal-entropy CDF of `map` from its depth-level preimage
/// tree. Every level-k cylinder carries mass d^{-k}, so the sorted preimage
/// of rank r is exactly the (r·d^{-depth})-quantile and the stored knots
/// carry no statistical error; resolution is capped by the tree, hence
/// `depth >= resolution_log` is required.
pub fn mme_cdf<M: CircleDegreeMap>(
    map: &M,
    depth: u32,
    resolution_log: u32,
) -> Result<MmeCdfReport> {
    if depth > MAX_DEPTH {
        return Err(invalid(format!("depth must be at most {MAX_DEPTH}")));
    }
    if !(4..=MAX_DEPTH).contains(&resolution_log) {
        return Err(invalid(format!(
            "resolution exponent must be in 4..={MAX_DEPTH}"
        )));
    }
    if depth < resolution_log {
        return Err(invalid(format!(
            "depth {depth} cannot resolve a 2^{resolution_log} quantile grid"
        )));
    }
    let level = preimage_level(map, depth)?;
    let total = level.len() as u128;
    let identity_deviation = det::map_fold(
        level.len(),
        CHUNK,
        |range| {
            let mut m = 0.0f64;
            for j in range {
                m = m.max((level[j] - j as f64 / total as f64).abs());
            }
            m
        },
        0.0,
        f64::max,
    );
    let n = 1usize << resolution_log;
    let mut knots = Vec::with_capacity(n + 1);
    for i in 0..n {
        // Nearest-rank quantile; exact whenever total is a power of two
        // times the resolution, in particular for degree 2.
        let rank = ((i as u128 * total + (n as u128 >> 1)) >> resolution_log) as usize;
        knots.push(level[rank]);
    }
    knots.push(1.0);
    let cdf = LeafMeasureCDF::from_knots(resolution_log, knots)?;
    Ok(MmeCdfReport {
        depth,
        resolution_log,
        degree: map.degree(),
        identity_deviation,
        cdf,
    })
}

// ---------------------------------------------------------------------------
// Interval scaling audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub intervals: usize,
    pub max_residual: f64,
    pub ok: bool,
}

/// Checks μ(g(I)) = d·μ(I) on seeded random small intervals, the defining
/// scaling property of the maximal-entropy measure under one map step.
pub fn scaling_check<M: CircleDegreeMap>(
    map: &M,
    cdf: &LeafMeasureCDF,
    intervals: usize,
    seed: u64,
) -> Result<ScalingReport> {
    if intervals == 0 || intervals > 100_000 {
        return Err(invalid("interval count must be in 1..=100000"));
    }
    let d = map.degree() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0f64;
    for _ in 0..intervals {
        let w = rng.gen_range(1e-4..1e-3);
        let a = rng.gen_range(0.0..1.0 - w);
        let b = a + w;
        let base = cdf.eval(b) - cdf.eval(a);
        let image = cdf.arc_mass(map.apply(a), map.apply(b));
        max_residual = max_residual.max((image - d * base).abs());
    }
    Ok(ScalingReport {
        intervals,
        max_residual,
        ok: max_residual <= tol::MME_SCALING,
    })
}

// ---------------------------------------------------------------------------
// Linearization
// ---------------------------------------------------------------------------

/// Degree-d circle map stored as lift samples on a uniform dyadic grid,
/// interpolated linearly. Used for maps that only exist numerically, like
/// the conjugated map produced by [`linearize`].
#[derive(Debug, Clone)]
pub struct GriddedMap {
    degree: u32,
    resolution_log: u32,
    values: Vec<f64>,
}

impl GriddedMap {
    /// `values[i]` is the lift at i/2^r; the samples must start at 0, end at
    /// the degree, and increase strictly.
    pub fn from_lift_samples(degree: u32, values: Vec<f64>) -> Result<Self> {
        if !(2..=16).contains(&degree) {
            return Err(invalid("degree must be in 2..=16"));
        }
        let cells = values.len().saturating_sub(1);
        if cells < 16 || !cells.is_power_of_two() {
            return Err(invalid(
                "lift samples must cover a dyadic grid of at least 16 cells",
            ));
        }
        if values[0] != 0.0 {
            return Err(invalid("the lift must fix 0"));
        }
        if (values[cells] - degree as f64).abs() > 1e-9 {
            return Err(invalid("the lift must end at its degree"));
        }
        for w in values.windows(2) {
            if !(w[1] > w[0]) {
                return Err(invalid("lift samples must be strictly increasing"));
            }
        }
        let mut values = values;
        values[cells] = degree as f64;
        Ok(Self {
            degree,
            resolution_log: cells.trailing_zeros(),
            values,
        })
    }

    pub fn resolution_log(&self) -> u32 {
        self.resolution_log
    }

    pub fn lift_samples(&self) -> &[f64] {
        &self.values
    }
}

impl CircleDegreeMap for GriddedMap {
    fn degree(&self) -> u32 {
        self.degree
    }

    fn lift(&self, x: f64) -> f64 {
        let k = x.floor();
        let frac = x - k;
        let n = self.values.len() - 1;
        let t = frac * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let r = t - i as f64;
        self.values[i] + r * (self.values[i + 1] - self.values[i]) + k * self.degree as f64
    }

    fn inverse_branch(&self, y: f64, branch: u32) -> f64 {
        let t = y + branch as f64;
        let n = self.values.len() - 1;
        let cell = self.values.partition_point(|&v| v <= t).clamp(1, n) - 1;
        let frac = (t - self.values[cell]) / (self.values[cell + 1] - self.values[cell]);
        ((cell as f64 + frac) / n as f64).min(1.0 - f64::EPSILON)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearizeReport {
    pub resolution_log: u32,
    pub degree: u32,
    /// Worst |derivative − degree| over the full grid, with the derivative
    /// taken as a centered difference four cells wide.
    pub max_derivative_deviation: f64,
    pub derivative_ok: bool,
    #[serde(skip)]
    pub map: GriddedMap,
}

/// Conjugates `map` by the CDF: returns F∘g∘F⁻¹ sampled on the CDF's own
/// quantile grid, together with how far its derivative strays from the
/// degree. In the exact leaf-measure coordinate the map would be linear,
/// so the deviation measures the quality of the finite CDF.
pub fn linearize<M: CircleDegreeMap>(map: &M, cdf: &LeafMeasureCDF) -> Result<LinearizeReport> {
    for w in cdf.knots().windows(2) {
        if !(w[1] > w[0]) {
            return Err(invalid("the conjugating CDF must be strictly increasing"));
        }
    }
    let r = cdf.resolution_log();
    let n = 1usize << r;
    let d = map.degree();
    let values = det::map_fold(
        n + 1,
        CHUNK,
        |range| {
            let mut out = Vec::with_capacity(range.len());
            for i in range {
                let x = i as f64 / n as f64;
                out.push(cdf.eval_extended(map.lift(cdf.inverse(x))));
            }
            out
        },
        Vec::new(),
        |mut acc, mut part| {
            acc.append(&mut part);
            acc
        },
    );
    let gridded = GriddedMap::from_lift_samples(d, values)
        .map_err(|e| Error::Numerical(format!("conjugated lift is not a circle map: {e}")))?;
    let values = gridded.lift_samples();
    let step = 4usize;
    let max_derivative_deviation = det::map_fold(
        n,
        CHUNK,
        |range| {
            let mut m = 0.0f64;
            for i in range {
                // Periodic extension: the lift gains the degree per period.
                let hi = if i + step <= n {
                    values[i + step]
                } else {
                    values[i + step - n] + d as f64
                };
                let lo = if i >= step {
                    values[i - step]
                } else {
                    values[i + n - step] - d as f64
                };
                let deriv = (hi - lo) * n as f64 / (2 * step) as f64;
                m = m.max((deriv - d as f64).abs());
            }
            m
        },
        0.0,
        f64::max,
    );
    Ok(LinearizeReport {
        resolution_log: r,
        degree: d,
        max_derivative_deviation,
        derivative_ok: max_derivative_deviation <= tol::LINEARIZE_DERIV,
        map: gridded,
    })
}

// ---------------------------------------------------------------------------
// Holonomy scaling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct HolonomyReport {
    pub lambda: f64,
    pub roof: f64,
    pub samples: usize,
    pub max_residual: f64,
    pub ok: bool,
}

/// Audits the exponential scaling of leaf masses under the suspension of
/// `map` with constant roof: flowing for time η expands leaf measure by
/// e^{λη} with λ = log(d)/roof. The finite-difference mass ratio over the
/// whole map steps spanning η is discounted by e^{-λη} and by the overshoot
/// e^{-λ(⌈η/roof⌉·roof − η)}, which must land at 1.
pub fn holonomy_rn_check(
    map: &ExpandingMap,
    cdf: &LeafMeasureCDF,
    roof: f64,
    samples: usize,
    seed: u64,
) -> Result<HolonomyReport> {
    if !(roof.is_finite() && roof > 0.0) {
        return Err(invalid("roof constant must be positive"));
    }
    if samples == 0 || samples > 100_000 {
        return Err(invalid("sample count must be in 1..=100000"));
    }
    let d = map.degree() as f64;
    let lambda = d.ln() / roof;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0f64;
    for _ in 0..samples {
        let u = rng.gen_range(0.0..1.0 - HOLONOMY_DU);
        let eta = rng.gen_range(0.15..2.85) * roof;
        let steps = (eta / roof).ceil() as u32;
        let base = cdf.eval(u + HOLONOMY_DU) - cdf.eval(u);
        let mut a = u;
        let mut b = u + HOLONOMY_DU;
        for _ in 0..steps {
            a = map.apply(a);
            b = map.apply(b);
        }
        let image = cdf.arc_mass(a, b);
        let fd = image / base;
        let discount = (-lambda * eta).exp() * (-lambda * (steps as f64 * roof - eta)).exp();
        max_residual = max_residual.max((fd * discount - 1.0).abs());
    }
    Ok(HolonomyReport {
        lambda,
        roof,
        samples,
        max_residual,
        ok: max_residual <= tol::RN_RESIDUAL,
    })
}

// ---------------------------------------------------------------------------
// Regularity diagnostic
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    /// Dyadic increment exponents: h = 2^{log2_h}.
    pub log2_h: Vec<i32>,
    pub mean_log_increment: Vec<f64>,
    /// Least-squares slope of mean log-increment against log h; 1 for any
    /// measure with bounded positive density.
    pub exponent: f64,
}

/// Fits the scaling exponent of CDF increments |F(x+h) − F(x)| over dyadic
/// h, averaged across a fixed 256-point grid of base points.
pub fn regularity_diagnostic(cdf: &LeafMeasureCDF) -> RegularityReport {
    const BASE_POINTS: usize = 256;
    let mut log2_h = Vec::new();
    let mut mean_log_increment = Vec::new();
    for j in 4..=10i32 {
        let h = 0.5f64.powi(j);
        let mut acc = 0.0;
        for t in 0..BASE_POINTS {
            let x = t as f64 / BASE_POINTS as f64;
            let y = x + h;
            let inc = if y <= 1.0 {
                cdf.eval(y) - cdf.eval(x)
            } else {
                1.0 - cdf.eval(x) + cdf.eval(y - 1.0)
            };
            acc += inc.ln();
        }
        log2_h.push(-j);
        mean_log_increment.push(acc / BASE_POINTS as f64);
    }
    let n = log2_h.len() as f64;
    let mx = log2_h.iter().map(|&v| v as f64).sum::<f64>() / n * std::f64::consts::LN_2;
    let my = mean_log_increment.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&lx, &ly) in log2_h.iter().zip(&mean_log_increment) {
        let x = lx as f64 * std::f64::consts::LN_2;
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (ly - my);
    }
    RegularityReport {
        log2_h,
        mean_log_increment,
        exponent: sxy / sxx,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expanding_map_validation() {
        assert!(ExpandingMap::new(2, 0.0).is_ok());
        assert!(ExpandingMap::new(2, 0.9).is_ok());
        assert!(ExpandingMap::new(2, 0.95).is_err());
        assert!(ExpandingMap::new(2, -0.95).is_err());
        assert!(ExpandingMap::new(1, 0.0).is_err());
        assert!(ExpandingMap::new(17, 0.0).is_err());
        assert!(ExpandingMap::new(3, 1.8).is_ok());
        assert!(ExpandingMap::new(2, f64::NAN).is_err());
    }

    #[test]
    fn lift_shifts_by_degree_per_period() {
        let g = ExpandingMap::new(2, 0.3).unwrap();
        for x in [0.0, 0.13, 0.5, 0.77, 0.999] {
            let gap = g.lift(x + 1.0) - g.lift(x) - 2.0;
            assert!(gap.abs() < 1e-12, "gap {gap} at x = {x}");
        }
        assert_eq!(g.lift(0.0), 0.0, "the lift fixes 0 exactly");
    }

    #[test]
    fn inverse_branch_solves_the_lift() {
        let g = ExpandingMap::new(2, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let y = rng.gen_range(0.0..1.0);
            let b = rng.gen_range(0..2u32);
            let x = g.inverse_branch(y, b);
            assert!((0.0..1.0).contains(&x));
            assert!(
                (g.lift(x) - y - b as f64).abs() < 1e-12,
                "residual at y = {y}, branch {b}"
            );
        }
        let g3 = ExpandingMap::new(3, -1.5).unwrap();
        for _ in 0..200 {
            let y = rng.gen_range(0.0..1.0);
            let b = rng.gen_range(0..3u32);
            let x = g3.inverse_branch(y, b);
            assert!((g3.lift(x) - y - b as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn mme_identity_for_linear_doubling() {
        let g = ExpandingMap::new(2, 0.0).unwrap();
        let rep = mme_cdf(&g, 12, 10).unwrap();
        assert_eq!(rep.identity_deviation, 0.0, "dyadic arithmetic is exact");
        let n = 1usize << 10;
        for (i, &k) in rep.cdf.knots().iter().enumerate() {
            assert_eq!(
                k.to_bits(),
                (i as f64 / n as f64).to_bits(),
                "knot {i} must be the exact dyadic quantile"
            );
        }
        assert_eq!(rep.cdf.identity_distance(), 0.0);
    }

    #[test]
    fn mme_near_identity_for_linear_tripling() {
        let g = ExpandingMap::new(3, 0.0).unwrap();
        let rep = mme_cdf(&g, 10, 8).unwrap();
        // Rank rounding moves knots by at most one preimage spacing.
        assert!(rep.identity_deviation < 1e-12);
        assert!(rep.cdf.identity_distance() < 1e-4);
    }

    #[test]
    fn mme_rejects_bad_parameters() {
        let g = ExpandingMap::new(2, 0.3).unwrap();
        assert!(mme_cdf(&g, 8, 10).is_err(), "depth below resolution");
        assert!(mme_cdf(&g, 25, 10).is_err(), "depth above the cap");
        assert!(mme_cdf(&g, 12, 3).is_err(), "resolution too small");
        let g3 = ExpandingMap::new(3, 0.0).unwrap();
        assert!(
            matches!(mme_cdf(&g3, 24, 10), Err(Error::ResourceLimit(_))),
            "3^24 points blow the tree budget"
        );
    }

    #[test]
    fn cdf_eval_and_inverse_roundtrip() {
        let g = ExpandingMap::new(2, 0.3).unwrap();
        let cdf = mme_cdf(&g, 12, 12).unwrap().cdf;
        assert_eq!(cdf.eval(0.0), 0.0);
        assert_eq!(cdf.eval(1.0), 1.0);
        assert_eq!(cdf.eval(-0.5), 0.0);
        assert_eq!(cdf.eval(1.5), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let x = rng.gen_range(0.0..1.0);
            let q = cdf.eval(x);
            assert!((cdf.inverse(q) - x).abs() < 1e-12);
            let q2 = rng.gen_range(0.0..1.0);
            assert!((cdf.eval(cdf.inverse(q2)) - q2).abs() < 1e-12);
        }
        // Knots evaluate to exact dyadic quantiles.
        let n = 1usize << 12;
        for i in [0usize, 1, 77, n / 2, n - 1, n] {
            let q = cdf.eval(cdf.knots()[i]);
            assert_eq!(q.to_bits(), (i as f64 / n as f64).to_bits());
        }
    }

    #[test]
    fn depth_refinement_is_consistent() {
        let g = ExpandingMap::new(2, 0.3).unwrap();
        let a = mme_cdf(&g, 12, 12).unwrap().cdf;
        let b = mme_cdf(&g, 14, 12).unwrap().cdf;
        assert!(
            a.sup_distance(&b) <= tol::CDF_DEPTH_AGREEMENT,
            "sup distance {}",
            a.sup_distance(&b)
        );
    }

    #[test]
    fn from_knots_validation() {
        let id = LeafMeasureCDF::identity(4);
        assert!(LeafMeasureCDF::from_knots(4, id.knots().to_vec()).is_ok());
        let mut bad = id.knots().to_vec();
        bad[3] = bad[5];
        assert!(
            LeafMeasureCDF::from_knots(4, bad).is_err(),
            "non-monotone knots"
        );
        let mut shifted = id.knots().to_vec();
        shifted[0] = 0.01;
        assert!(LeafMeasureCDF::from_knots(4, shifted).is_err());
        assert!(LeafMeasureCDF::from_knots(4, vec![0.0, 1.0]).is_err());
        assert!(LeafMeasureCDF::from_knots(30, id.knots().to_vec()).is_err());
    }

    #[test]
    fn gridded_map_validation_and_inversion() {
        let vals: Vec<f64> = (0..=64).map(|i| 2.0 * i as f64 / 64.0).collect();
        let m = GriddedMap::from_lift_samples(2, vals.clone()).unwrap();
        assert_eq!(m.resolution_log(), 6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let y = rng.gen_range(0.0..1.0);
            let b = rng.gen_range(0..2u32);
            let x = m.inverse_branch(y, b);
            assert!((m.lift(x) - y - b as f64).abs() < 1e-12);
        }
        let mut bad = vals.clone();
        bad[10] = bad[12];
        assert!(GriddedMap::from_lift_samples(2, bad).is_err());
        let mut shifted = vals.clone();
        shifted[0] = 0.25;
        assert!(GriddedMap::from_lift_samples(2, shifted).is_err());
        assert!(GriddedMap::from_lift_samples(2, vec![0.0, 1.0, 2.0]).is_err());
        let mut wrong_end = vals;
        *wrong_end.last_mut().unwrap() = 1.5;
        assert!(GriddedMap::from_lift_samples(2, wrong_end).is_err());
    }

    #[test]
    fn regularity_of_identity_is_one() {
        let id = LeafMeasureCDF::identity(12);
        let rep = regularity_diagnostic(&id);
        assert!(
            (rep.exponent - 1.0).abs() <= 0.02,
            "exponent {}",
            rep.exponent
        );
        let finer = regularity_diagnostic(&LeafMeasureCDF::identity(13));
        assert!((rep.exponent - finer.exponent).abs() <= 0.05);
        assert_eq!(rep.log2_h.len(), rep.mean_log_increment.len());
    }

    #[test]
    fn regularity_of_perturbed_map_stays_near_one() {
        let g = ExpandingMap::new(2, 0.3).unwrap();
        let coarse = mme_cdf(&g, 14, 14).unwrap().cdf;
        let fine = mme_cdf(&g, 15, 15).unwrap().cdf;
        let rc = regularity_diagnostic(&coarse);
        let rf = regularity_diagnostic(&fine);
        // Bounded positive density forces exponent 1 in the limit.
        assert!((rc.exponent - 1.0).abs() < 0.1, "exponent {}", rc.exponent);
        assert!(
            (rc.exponent - rf.exponent).abs() <= 0.05,
            "resolution instability: {} vs {}",
            rc.exponent,
            rf.exponent
        );
    }

    #[test]
    fn scaling_check_at_moderate_resolution() {
        let g = ExpandingMap::new(2, 0.3).unwrap();
        let cdf = mme_cdf(&g, 16, 16).unwrap().cdf;
        let rep = scaling_check(&g, &cdf, 100, 42).unwrap();
        assert!(rep.ok, "max residual {}", rep.max_residual);
        assert!(scaling_check(&g, &cdf, 0, 1).is_err());
    }

    #[test]
    fn full_resolution_linearization_chain() {
        let g = ExpandingMap::new(2, 0.3).unwrap();
        let mme = mme_cdf(&g, 20, 20).unwrap();
        let scaling = scaling_check(&g, &mme.cdf, 100, 7).unwrap();
        assert!(scaling.ok, "scaling residual {}", scaling.max_residual);

        let lin = linearize(&g, &mme.cdf).unwrap();
        assert!(
            lin.derivative_ok,
            "derivative deviation {}",
            lin.max_derivative_deviation
        );

        // The linearized map is its own leaf-measure coordinate, so its
        // maximal-entropy CDF is the identity.
        let again = mme_cdf(&lin.map, 20, 20).unwrap();
        assert!(
            again.identity_deviation <= tol::IDEMPOTENCE_SUP,
            "idempotence deviation {}",
            again.identity_deviation
        );

        let rn = holonomy_rn_check(&g, &mme.cdf, 1.0, 200, 13).unwrap();
        assert!(rn.ok, "holonomy residual {}", rn.max_residual);
        assert!((rn.lambda - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn holonomy_input_validation() {
        let g = ExpandingMap::new(2, 0.3).unwrap();
        let cdf = LeafMeasureCDF::identity(12);
        assert!(holonomy_rn_check(&g, &cdf, 0.0, 10, 1).is_err());
        assert!(holonomy_rn_check(&g, &cdf, -1.0, 10, 1).is_err());
        assert!(holonomy_rn_check(&g, &cdf, 1.0, 0, 1).is_err());
    }

    #[test]
    fn holonomy_exact_for_linear_map() {
        // For the unperturbed doubling map the CDF is exactly linear and
        // every mass ratio is exactly a power of two.
        let g = ExpandingMap::new(2, 0.0).unwrap();
        let cdf = mme_cdf(&g, 14, 14).unwrap().cdf;
        let rep = holonomy_rn_check(&g, &cdf, 0.7, 300, 21).unwrap();
        assert!(rep.max_residual < 1e-10, "residual {}", rep.max_residual);
    }

    #[test]
    fn linearize_rejects_collapsed_cdf() {
        // A synthetic CDF hugging the diagonal except for one flat-ish spot
        // still passes construction; a genuinely non-increasing one cannot
        // even be built, which is the guarantee linearize relies on.
        let g = ExpandingMap::new(2, 0.3).unwrap();
        let id = LeafMeasureCDF::identity(10);
        let rep = linearize(&g, &id).unwrap();
        // Conjugating by the identity returns the original nonlinear map.
        assert!(rep.max_derivative_deviation > 0.2);
        assert!(!rep.derivative_ok);
    }
}
