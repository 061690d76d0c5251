//! Suspension flows over hyperbolic automorphisms of the two-torus.
//!
//! The base dynamics is an integer matrix acting on T² = R²/Z². Periodic
//! points are enumerated exactly in rational arithmetic through a Smith
//! decomposition, so every downstream quantity built on them (pressure sums,
//! coboundary solutions, flow periods) starts from exact orbit data. On top
//! of the base map sit suspension flows with trigonometric-polynomial roof
//! functions: entropy comes from the Bowen root of periodic-orbit pressure,
//! cocycles over the flow integrate in closed form segment by segment, and
//! the volume/entropy bookkeeping for time-changed flows is verified with
//! exact rational arithmetic where the identity is definitional.

use crate::{det, tol, Error, Result};
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

/// Exact point on the two-torus, coordinates in [0,1).
pub type TorusPoint = [Rational64; 2];

/// Fixed-point enumerations beyond this size are refused rather than left
/// to exhaust memory.
const MAX_FIXED_POINTS: u128 = 4_000_000;

/// Largest frequency accepted in a parsed trigonometric polynomial; keeps
/// exact phase arithmetic far away from integer overflow.
const MAX_FREQ: i64 = 1000;

/// Chunk length for deterministic parallel reductions in this module.
const CHUNK: usize = 2048;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn mod1(r: Rational64) -> Rational64 {
    r - r.floor()
}

// ---------------------------------------------------------------------------
// Base automorphism
// ---------------------------------------------------------------------------

/// Hyperbolic element of SL(2,Z) acting on the two-torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToralAuto {
    entries: [[i64; 2]; 2],
}

type M2I = [[i128; 2]; 2];

fn mat_mul_checked(a: M2I, b: M2I) -> Option<M2I> {
    let mut r = [[0i128; 2]; 2];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let p0 = a[i][0].checked_mul(b[0][j])?;
            let p1 = a[i][1].checked_mul(b[1][j])?;
            *cell = p0.checked_add(p1)?;
        }
    }
    Some(r)
}

impl ToralAuto {
    /// Accepts only determinant-one integer matrices with |trace| > 2, the
    /// class whose torus action has a dense set of isolated periodic points.
    pub fn new(entries: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = entries;
        for e in [a, b, c, d] {
            if e.abs() > 100_000 {
                return Err(invalid(format!("matrix entry {e} out of range")));
            }
        }
        let det = (a as i128) * (d as i128) - (b as i128) * (c as i128);
        if det != 1 {
            return Err(invalid(format!(
                "determinant must be exactly 1, got {det}"
            )));
        }
        let tr = a + d;
        if tr.abs() <= 2 {
            return Err(invalid(format!(
                "|trace| must exceed 2 for hyperbolicity, got {tr}"
            )));
        }
        Ok(Self { entries })
    }

    /// The standard [[2,1],[1,1]] automorphism used throughout the tests.
    pub fn cat() -> Self {
        Self {
            entries: [[2, 1], [1, 1]],
        }
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.entries
    }

    pub fn trace(&self) -> i64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// Dominant expansion factor, the absolute value of the large eigenvalue.
    pub fn lambda1(&self) -> f64 {
        let t = self.trace().abs() as f64;
        (t + (t * t - 4.0).sqrt()) / 2.0
    }

    pub fn log_lambda1(&self) -> f64 {
        self.lambda1().ln()
    }

    /// n-th power with overflow checking; wide integers keep every entry
    /// exact for all the periods this module enumerates.
    pub fn pow(&self, n: u32) -> Result<M2I> {
        let m: M2I = [
            [self.entries[0][0] as i128, self.entries[0][1] as i128],
            [self.entries[1][0] as i128, self.entries[1][1] as i128],
        ];
        let mut r: M2I = [[1, 0], [0, 1]];
        for _ in 0..n {
            r = mat_mul_checked(r, m)
                .ok_or_else(|| invalid(format!("matrix power {n} overflows exact arithmetic")))?;
        }
        Ok(r)
    }

    /// Exact action on a rational torus point.
    pub fn apply(&self, x: TorusPoint) -> TorusPoint {
        let [[a, b], [c, d]] = self.entries;
        [
            mod1(x[0] * a + x[1] * b),
            mod1(x[0] * c + x[1] * d),
        ]
    }

    /// Floating-point action, used by flow integration where inputs are
    /// already inexact.
    pub fn apply_f64(&self, x: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.entries;
        [
            (x[0] * a as f64 + x[1] * b as f64).rem_euclid(1.0),
            (x[0] * c as f64 + x[1] * d as f64).rem_euclid(1.0),
        ]
    }
}

// ---------------------------------------------------------------------------
// Smith decomposition and exact fixed points
// ---------------------------------------------------------------------------

fn row_op(a: &mut M2I, u: &mut M2I, dst: usize, src: usize, q: i128) {
    for j in 0..2 {
        a[dst][j] -= q * a[src][j];
        u[dst][j] -= q * u[src][j];
    }
}

fn col_op(a: &mut M2I, v: &mut M2I, dst: usize, src: usize, q: i128) {
    for i in 0..2 {
        a[i][dst] -= q * a[i][src];
        v[i][dst] -= q * v[i][src];
    }
}

/// Unimodular diagonalization u·m·v = diag(d1, d2) with d1 ≥ 1 and d1 | d2.
/// Panics on singular input; callers establish nonsingularity first.
fn smith_2x2(m: M2I) -> (M2I, (i128, i128), M2I) {
    let mut a = m;
    let mut u: M2I = [[1, 0], [0, 1]];
    let mut v: M2I = [[1, 0], [0, 1]];
    loop {
        // Euclidean stage: clear the off-diagonal against the pivot.
        loop {
            if a[0][0] == 0 {
                if a[1][0] != 0 {
                    a.swap(0, 1);
                    u.swap(0, 1);
                } else if a[0][1] != 0 {
                    for i in 0..2 {
                        a[i].swap(0, 1);
                        v[i].swap(0, 1);
                    }
                } else {
                    assert!(a[1][1] != 0, "singular matrix has no Smith pivot");
                    a.swap(0, 1);
                    u.swap(0, 1);
                    for i in 0..2 {
                        a[i].swap(0, 1);
                        v[i].swap(0, 1);
                    }
                }
                continue;
            }
            if a[1][0] != 0 {
                let q = a[1][0].div_euclid(a[0][0]);
                row_op(&mut a, &mut u, 1, 0, q);
                if a[1][0] != 0 {
                    a.swap(0, 1);
                    u.swap(0, 1);
                }
                continue;
            }
            if a[0][1] != 0 {
                let q = a[0][1].div_euclid(a[0][0]);
                col_op(&mut a, &mut v, 1, 0, q);
                if a[0][1] != 0 {
                    for i in 0..2 {
                        a[i].swap(0, 1);
                        v[i].swap(0, 1);
                    }
                }
                continue;
            }
            break;
        }
        // Divisibility stage: fold the second diagonal entry back in until
        // the pivot divides it.
        if a[1][1] % a[0][0] == 0 {
            break;
        }
        col_op(&mut a, &mut v, 0, 1, -1);
    }
    if a[0][0] < 0 {
        for j in 0..2 {
            a[0][j] = -a[0][j];
            u[0][j] = -u[0][j];
        }
    }
    if a[1][1] < 0 {
        for j in 0..2 {
            a[1][j] = -a[1][j];
            u[1][j] = -u[1][j];
        }
    }
    (u, (a[0][0], a[1][1]), v)
}

/// All rational solutions of Aⁿx ≡ x (mod Z²), sorted lexicographically.
///
/// The solution set is the kernel of Aⁿ−I acting on the torus; a Smith
/// decomposition of that integer matrix turns it into a product of cyclic
/// groups whose elements are written down directly. The count always equals
/// |tr Aⁿ − 2| and the enumeration asserts this.
pub fn fixed_points(auto: &ToralAuto, n: u32) -> Result<Vec<TorusPoint>> {
    if n == 0 {
        return Err(invalid("period must be at least 1"));
    }
    let p = auto.pow(n)?;
    let m: M2I = [[p[0][0] - 1, p[0][1]], [p[1][0], p[1][1] - 1]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    assert!(det != 0, "a hyperbolic automorphism has no eigenvalue one");
    let count = det.unsigned_abs();
    if count > MAX_FIXED_POINTS {
        return Err(Error::ResourceLimit(format!(
            "{count} fixed points at period {n} exceeds the enumeration budget"
        )));
    }
    let (_u, (d1, d2), v) = smith_2x2(m);
    let (d1, d2) = (d1 as i64, d2 as i64);
    let v: [[i64; 2]; 2] = [
        [v[0][0] as i64, v[0][1] as i64],
        [v[1][0] as i64, v[1][1] as i64],
    ];
    let mut pts = Vec::with_capacity((d1 * d2) as usize);
    for k1 in 0..d1 {
        for k2 in 0..d2 {
            let y1 = Rational64::new(k1, d1);
            let y2 = Rational64::new(k2, d2);
            pts.push([
                mod1(y1 * v[0][0] + y2 * v[0][1]),
                mod1(y1 * v[1][0] + y2 * v[1][1]),
            ]);
        }
    }
    pts.sort();
    pts.dedup();
    assert_eq!(
        pts.len() as u128,
        count,
        "Smith enumeration must produce |tr A^n - 2| distinct points"
    );
    let expected = (p[0][0] + p[1][1] - 2).unsigned_abs();
    assert_eq!(pts.len() as u128, expected, "fixed-point count identity");
    Ok(pts)
}

/// Independent oracle for [`fixed_points`]: solves the two congruences
/// row by row over the common denominator instead of via Smith form.
pub fn brute_force_fixed_points(auto: &ToralAuto, n: u32) -> Result<Vec<TorusPoint>> {
    if n == 0 {
        return Err(invalid("period must be at least 1"));
    }
    let p = auto.pow(n)?;
    let m: M2I = [[p[0][0] - 1, p[0][1]], [p[1][0], p[1][1] - 1]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    assert!(det != 0, "a hyperbolic automorphism has no eigenvalue one");
    let d = det.unsigned_abs();
    if d > 300_000 {
        return Err(Error::ResourceLimit(format!(
            "brute-force oracle capped below {d} residues"
        )));
    }
    let d = d as i128;
    fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
        if b == 0 {
            (a, 1, 0)
        } else {
            let (g, x, y) = egcd(b, a.rem_euclid(b));
            (g, y, x - (a / b) * y)
        }
    }
    let m00 = m[0][0].rem_euclid(d);
    let m01 = m[0][1].rem_euclid(d);
    let m10 = m[1][0].rem_euclid(d);
    let m11 = m[1][1].rem_euclid(d);
    let (g, inv_raw, _) = egcd(m01, d);
    let step = d / g;
    let inv = if step == 1 {
        0
    } else {
        inv_raw.rem_euclid(step)
    };
    let mut pts = Vec::new();
    for a in 0..d {
        // First congruence: m00·a + m01·b ≡ 0 (mod d), solved for b.
        let rhs = (-(m00 * a)).rem_euclid(d);
        if rhs % g != 0 {
            continue;
        }
        let b0 = ((rhs / g) % step * inv) % step;
        for t in 0..g {
            let b = (b0 + t * step).rem_euclid(d);
            if (m10 * a + m11 * b).rem_euclid(d) == 0 {
                pts.push([
                    Rational64::new(a as i64, d as i64),
                    Rational64::new(b as i64, d as i64),
                ]);
            }
        }
    }
    pts.sort();
    pts.dedup();
    Ok(pts)
}

// ---------------------------------------------------------------------------
// Periodic orbits
// ---------------------------------------------------------------------------

/// One periodic orbit of the base automorphism, listed in dynamical order
/// starting from its lexicographically least point.
#[derive(Debug, Clone)]
pub struct BaseOrbit {
    pub points: Vec<TorusPoint>,
    pub n: u32,
}

/// Every orbit of least period at most `n_max`, sorted by period and then
/// by starting point. Each orbit appears exactly once.
pub fn periodic_orbits(auto: &ToralAuto, n_max: u32) -> Result<Vec<BaseOrbit>> {
    if n_max == 0 {
        return Err(invalid("orbit enumeration needs n_max of at least 1"));
    }
    let mut orbits = Vec::new();
    for n in 1..=n_max {
        for x in fixed_points(auto, n)? {
            let mut pts = vec![x];
            let mut y = auto.apply(x);
            while y != x && pts.len() <= n as usize {
                pts.push(y);
                y = auto.apply(y);
            }
            // Keep the orbit only when discovered at its least period and
            // from its least point, so every orbit is recorded once.
            if y != x || pts.len() != n as usize {
                continue;
            }
            if pts.iter().min().unwrap() != &x {
                continue;
            }
            orbits.push(BaseOrbit { points: pts, n });
        }
    }
    Ok(orbits)
}

// ---------------------------------------------------------------------------
// Trigonometric polynomials on the torus
// ---------------------------------------------------------------------------

/// One Fourier mode: `cos·cos(2π k·x) + sin·sin(2π k·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigMode {
    pub freq: [i64; 2],
    pub cos: f64,
    pub sin: f64,
}

/// Real trigonometric polynomial on the two-torus. Evaluation at rational
/// points reduces the phase exactly before any floating-point trig, so two
/// representations of the same torus point always produce the same bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub constant: f64,
    pub modes: Vec<TrigMode>,
}

impl TrigPoly {
    pub fn constant_poly(c: f64) -> Self {
        Self {
            constant: c,
            modes: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Self::constant_poly(0.0)
    }

    fn normalized(constant: f64, modes: BTreeMap<[i64; 2], (f64, f64)>) -> Self {
        let modes = modes
            .into_iter()
            .filter(|(_, (c, s))| *c != 0.0 || *s != 0.0)
            .map(|(freq, (cos, sin))| TrigMode { freq, cos, sin })
            .collect();
        Self { constant, modes }
    }

    fn mode_map(&self) -> BTreeMap<[i64; 2], (f64, f64)> {
        let mut map: BTreeMap<[i64; 2], (f64, f64)> = BTreeMap::new();
        for m in &self.modes {
            let e = map.entry(m.freq).or_insert((0.0, 0.0));
            e.0 += m.cos;
            e.1 += m.sin;
        }
        map
    }

    /// Exact phase of one mode at a rational point: k·x reduced mod 1 in
    /// integer arithmetic, only then sent to f64.
    fn phase(freq: [i64; 2], x: &TorusPoint) -> f64 {
        let (p0, q0) = (*x[0].numer() as i128, *x[0].denom() as i128);
        let (p1, q1) = (*x[1].numer() as i128, *x[1].denom() as i128);
        let num = (freq[0] as i128) * p0 * q1 + (freq[1] as i128) * p1 * q0;
        let den = q0 * q1;
        let r = num.rem_euclid(den);
        (r as f64) / (den as f64)
    }

    pub fn eval(&self, x: &TorusPoint) -> f64 {
        let mut v = self.constant;
        for m in &self.modes {
            let ang = TAU * Self::phase(m.freq, x);
            v += m.cos * ang.cos() + m.sin * ang.sin();
        }
        v
    }

    pub fn eval_f64(&self, x: [f64; 2]) -> f64 {
        let mut v = self.constant;
        for m in &self.modes {
            let ang = TAU * (m.freq[0] as f64 * x[0] + m.freq[1] as f64 * x[1]).rem_euclid(1.0);
            v += m.cos * ang.cos() + m.sin * ang.sin();
        }
        v
    }

    /// Pullback under the automorphism: x ↦ f(Ax) maps the mode at k to the
    /// mode at Aᵀk with unchanged coefficients.
    pub fn compose_auto(&self, auto: &ToralAuto) -> Self {
        let [[a, b], [c, d]] = auto.entries();
        let mut map = BTreeMap::new();
        for m in &self.modes {
            let freq = [a * m.freq[0] + c * m.freq[1], b * m.freq[0] + d * m.freq[1]];
            let e = map.entry(freq).or_insert((0.0, 0.0));
            e.0 += m.cos;
            e.1 += m.sin;
        }
        Self::normalized(self.constant, map)
    }

    /// `beta − beta∘A`, exact on Fourier coefficients. Its Birkhoff sum over
    /// any exact periodic orbit telescopes to zero.
    pub fn coboundary(auto: &ToralAuto, beta: &TrigPoly) -> Self {
        beta.sub(&beta.compose_auto(auto))
    }

    pub fn sub(&self, other: &TrigPoly) -> Self {
        let mut map = self.mode_map();
        for m in &other.modes {
            let e = map.entry(m.freq).or_insert((0.0, 0.0));
            e.0 -= m.cos;
            e.1 -= m.sin;
        }
        Self::normalized(self.constant - other.constant, map)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            constant: self.constant * c,
            modes: self
                .modes
                .iter()
                .map(|m| TrigMode {
                    freq: m.freq,
                    cos: m.cos * c,
                    sin: m.sin * c,
                })
                .collect(),
        }
    }

    pub fn plus_constant(&self, a: f64) -> Self {
        Self {
            constant: self.constant + a,
            modes: self.modes.clone(),
        }
    }

    /// Upper bound for |∇f|, hence a Lipschitz constant on the torus.
    pub fn gradient_bound(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let k = ((m.freq[0] * m.freq[0] + m.freq[1] * m.freq[1]) as f64).sqrt();
                TAU * k * (m.cos.abs() + m.sin.abs())
            })
            .sum()
    }

    /// Upper bound for |f|.
    pub fn sup_bound(&self) -> f64 {
        self.constant.abs()
            + self
                .modes
                .iter()
                .map(|m| m.cos.abs() + m.sin.abs())
                .sum::<f64>()
    }

    /// Parses the compact mode list used on the command line, for example
    /// `const:1.0;cos:1,0:0.05;sin:2,-1:0.02`. Repeated entries accumulate.
    pub fn parse(s: &str) -> Result<Self> {
        let mut constant = 0.0;
        let mut map: BTreeMap<[i64; 2], (f64, f64)> = BTreeMap::new();
        let mut seen_any = false;
        for part in s.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            seen_any = true;
            let fields: Vec<&str> = part.split(':').collect();
            match fields.as_slice() {
                ["const", v] => {
                    constant += parse_finite(v)?;
                }
                [kind @ ("cos" | "sin"), freq, coeff] => {
                    let ks: Vec<&str> = freq.split(',').collect();
                    if ks.len() != 2 {
                        return Err(invalid(format!("frequency needs two components: {part}")));
                    }
                    let k0: i64 = ks[0]
                        .trim()
                        .parse()
                        .map_err(|_| invalid(format!("bad frequency in {part}")))?;
                    let k1: i64 = ks[1]
                        .trim()
                        .parse()
                        .map_err(|_| invalid(format!("bad frequency in {part}")))?;
                    if k0 == 0 && k1 == 0 {
                        return Err(invalid("zero frequency: use a const term instead"));
                    }
                    if k0.abs() > MAX_FREQ || k1.abs() > MAX_FREQ {
                        return Err(invalid(format!("frequency out of range in {part}")));
                    }
                    let c = parse_finite(coeff)?;
                    let e = map.entry([k0, k1]).or_insert((0.0, 0.0));
                    if *kind == "cos" {
                        e.0 += c;
                    } else {
                        e.1 += c;
                    }
                }
                _ => {
                    return Err(invalid(format!("unrecognized term: {part}")));
                }
            }
        }
        if !seen_any {
            return Err(invalid("empty trigonometric polynomial"));
        }
        Ok(Self::normalized(constant, map))
    }
}

fn parse_finite(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| invalid(format!("bad number: {s}")))?;
    if !v.is_finite() {
        return Err(invalid(format!("non-finite coefficient: {s}")));
    }
    Ok(v)
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "const:{}", self.constant)?;
        for m in &self.modes {
            if m.cos != 0.0 {
                write!(f, ";cos:{},{}:{}", m.freq[0], m.freq[1], m.cos)?;
            }
            if m.sin != 0.0 {
                write!(f, ";sin:{},{}:{}", m.freq[0], m.freq[1], m.sin)?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Roof functions and suspension flows
// ---------------------------------------------------------------------------

/// Strictly positive roof over the torus, certified by a 256×256 audit grid.
///
/// Positivity of a trig polynomial is undecidable from samples alone, so the
/// constructor demands the grid minimum clear zero by at least
/// [`tol::ROOF_MARGIN_FACTOR`] times the worst value change possible between
/// a grid point and any off-grid point (gradient bound times half a cell
/// diagonal). `certified_min` subtracts that bound and is a true lower bound
/// of the roof on the whole torus.
#[derive(Debug, Clone, Serialize)]
pub struct RoofFunction {
    poly: TrigPoly,
    grid_min: f64,
    modulus_bound: f64,
    certified_min: f64,
}

impl RoofFunction {
    pub fn new(poly: TrigPoly) -> Result<Self> {
        let modulus_bound = poly.gradient_bound() * std::f64::consts::SQRT_2 / 512.0;
        let grid_min = det::map_fold(
            256usize,
            16,
            |rows| {
                let mut m = f64::INFINITY;
                for i in rows {
                    let y = (i as f64 + 0.5) / 256.0;
                    for j in 0..256 {
                        let x = (j as f64 + 0.5) / 256.0;
                        m = m.min(poly.eval_f64([x, y]));
                    }
                }
                m
            },
            f64::INFINITY,
            f64::min,
        );
        if !(grid_min > 0.0) || grid_min < tol::ROOF_MARGIN_FACTOR * modulus_bound {
            return Err(invalid(format!(
                "roof fails the positivity audit: grid minimum {grid_min:.6} \
                 against continuity bound {modulus_bound:.6}"
            )));
        }
        Ok(Self {
            poly,
            grid_min,
            modulus_bound,
            certified_min: grid_min - modulus_bound,
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(invalid("roof constant must be finite"));
        }
        Self::new(TrigPoly::constant_poly(c))
    }

    pub fn eval(&self, x: &TorusPoint) -> f64 {
        self.poly.eval(x)
    }

    pub fn eval_f64(&self, x: [f64; 2]) -> f64 {
        self.poly.eval_f64(x)
    }

    pub fn poly(&self) -> &TrigPoly {
        &self.poly
    }

    pub fn grid_min(&self) -> f64 {
        self.grid_min
    }

    pub fn modulus_bound(&self) -> f64 {
        self.modulus_bound
    }

    /// Certified lower bound of the roof over the entire torus.
    pub fn certified_min(&self) -> f64 {
        self.certified_min
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid("roof scale must be positive"));
        }
        Self::new(self.poly.scaled(c))
    }

    pub fn plus_constant(&self, a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(invalid("roof shift must be finite"));
        }
        Self::new(self.poly.plus_constant(a))
    }
}

/// Suspension of the base automorphism under a positive roof: the phase
/// space is the mapping torus {(x,u) : 0 ≤ u < roof(x)} with unit vertical
/// speed and the gluing (x, roof(x)) ~ (Ax, 0).
#[derive(Debug, Clone, Serialize)]
pub struct SuspensionFlow {
    pub base: ToralAuto,
    pub roof: RoofFunction,
}

impl SuspensionFlow {
    pub fn new(base: ToralAuto, roof: RoofFunction) -> Self {
        Self { base, roof }
    }
}

/// Periodic orbit of the suspension flow: exact base data plus flow period
/// and the log-Jacobians along the expanding/contracting directions over
/// one full period. The fiber homology class of the orbit is its base
/// period.
#[derive(Debug, Clone, Serialize)]
pub struct FlowOrbit {
    pub x: TorusPoint,
    pub n: u32,
    pub tau: f64,
    pub homology: i64,
    pub ju: f64,
    pub js: f64,
}

/// Flow orbits for all base orbits of least period at most `n_max`.
pub fn flow_orbits(flow: &SuspensionFlow, n_max: u32) -> Result<Vec<FlowOrbit>> {
    let log_lam = flow.base.log_lambda1();
    let orbits = periodic_orbits(&flow.base, n_max)?;
    let mut out = Vec::with_capacity(orbits.len());
    for o in orbits {
        let tau: f64 = o.points.iter().map(|p| flow.roof.eval(p)).sum();
        assert!(tau > 0.0, "positive roof forces positive periods");
        out.push(FlowOrbit {
            x: o.points[0],
            n: o.n,
            tau,
            homology: o.n as i64,
            ju: o.n as f64 * log_lam,
            js: -(o.n as f64) * log_lam,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Pressure and entropy
// ---------------------------------------------------------------------------

/// Raw periodic-orbit pressure values with their extrapolated limit.
#[derive(Debug, Clone, Serialize)]
pub struct PressureReport {
    pub n_values: Vec<u32>,
    pub raw: Vec<f64>,
    pub extrapolated: f64,
    pub tail: f64,
    pub tail_gap: f64,
    pub converged: bool,
}

fn check_pressure_range(n_lo: u32, n_hi: u32) -> Result<()> {
    if n_lo < 4 || n_hi > 14 || n_lo + 2 > n_hi {
        return Err(invalid(format!(
            "period range [{n_lo},{n_hi}] must sit inside [4,14] and span at least three values"
        )));
    }
    Ok(())
}

/// Birkhoff sums of `f` over every fixed point of Aⁿ, in the deterministic
/// enumeration order. Orbit points are walked exactly, so coboundary sums
/// telescope to the last bit.
fn birkhoff_sums(auto: &ToralAuto, f: &TrigPoly, n: u32) -> Result<Vec<f64>> {
    let pts = fixed_points(auto, n)?;
    Ok(det::map_fold(
        pts.len(),
        CHUNK,
        |range| {
            let mut out = Vec::with_capacity(range.len());
            for i in range {
                let mut y = pts[i];
                let mut s = 0.0;
                for _ in 0..n {
                    s += f.eval(&y);
                    y = auto.apply(y);
                }
                out.push(s);
            }
            out
        },
        Vec::new(),
        |mut acc, mut part| {
            acc.append(&mut part);
            acc
        },
    ))
}

/// (1/n)·log Σ exp(scale·sums[i]), max-shifted for stability, chunk-summed
/// for thread-count-independent bits.
fn scaled_pressure(sums: &[f64], scale: f64, n: u32) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &s in sums {
        m = m.max(scale * s);
    }
    let total = det::sum_indexed(sums.len(), CHUNK, |i| (scale * sums[i] - m).exp());
    (m + total.ln()) / n as f64
}

/// Aitken acceleration of the last three terms; falls back to the raw tail
/// when the second difference underflows.
fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    let d2 = x2 - x1;
    let dd = d2 - (x1 - x0);
    if dd.abs() <= 1e-14 * (1.0 + x2.abs()) {
        x2
    } else {
        x2 - d2 * d2 / dd
    }
}

/// Growth rate of Birkhoff-weighted periodic-point sums of the base map:
/// Pₙ = (1/n)·log Σ_{x∈Fix(Aⁿ)} exp Sₙf(x), extrapolated over `n_lo..=n_hi`.
///
/// Never fails on slow convergence; the `converged` flag records whether the
/// extrapolation and the raw tail agree within [`tol::PRESSURE_CONVERGENCE`].
/// With f = 0 the extrapolation recovers the topological entropy log λ₁.
pub fn pressure_base(
    auto: &ToralAuto,
    f: &TrigPoly,
    n_lo: u32,
    n_hi: u32,
) -> Result<PressureReport> {
    check_pressure_range(n_lo, n_hi)?;
    let mut n_values = Vec::new();
    let mut raw = Vec::new();
    for n in n_lo..=n_hi {
        let sums = birkhoff_sums(auto, f, n)?;
        raw.push(scaled_pressure(&sums, 1.0, n));
        n_values.push(n);
    }
    let k = raw.len();
    let extrapolated = aitken(raw[k - 3], raw[k - 2], raw[k - 1]);
    let tail = raw[k - 1];
    let tail_gap = (extrapolated - tail).abs();
    Ok(PressureReport {
        n_values,
        raw,
        extrapolated,
        tail,
        tail_gap,
        converged: tail_gap <= tol::PRESSURE_CONVERGENCE,
    })
}

/// Entropy of a suspension flow via its Bowen root.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub root: f64,
    pub bracket: (f64, f64),
    pub bisection_width: f64,
    pub pressure_at_root: f64,
    pub pressure_raw_at_root: Vec<f64>,
    pub n_values: Vec<u32>,
    pub converged: bool,
}

/// Topological entropy of the suspension: the unique s ≥ 0 at which the
/// base pressure of −s·roof vanishes. The root is bracketed by s = 0
/// (pressure log λ₁ > 0) and s = log λ₁ / certified_min ≤ 0 side, then
/// bisected to [`tol::BOWEN_ROOT`]. Per-point roof sums are cached once, so
/// each bisection step is a cheap reweighting.
pub fn entropy_suspension(flow: &SuspensionFlow, n_lo: u32, n_hi: u32) -> Result<EntropyReport> {
    check_pressure_range(n_lo, n_hi)?;
    let mut cached: Vec<(u32, Vec<f64>)> = Vec::new();
    for n in n_lo..=n_hi {
        cached.push((n, birkhoff_sums(&flow.base, flow.roof.poly(), n)?));
    }
    let pressure_at = |s: f64| -> (f64, Vec<f64>) {
        let raw: Vec<f64> = cached
            .iter()
            .map(|(n, sums)| scaled_pressure(sums, -s, *n))
            .collect();
        let k = raw.len();
        (aitken(raw[k - 3], raw[k - 2], raw[k - 1]), raw)
    };
    let mut lo = 0.0;
    let mut hi = flow.base.log_lambda1() / flow.roof.certified_min();
    let bracket = (lo, hi);
    let (p_lo, _) = pressure_at(lo);
    let (p_hi, _) = pressure_at(hi);
    if !(p_lo > 0.0 && p_hi < 0.0) {
        return Err(Error::Numerical(format!(
            "Bowen root not bracketed: pressure {p_lo:.6} at 0 and {p_hi:.6} at {hi:.6}"
        )));
    }
    let mut guard = 0;
    while hi - lo > tol::BOWEN_ROOT && guard < 80 {
        let mid = 0.5 * (lo + hi);
        let (pm, _) = pressure_at(mid);
        if pm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        guard += 1;
    }
    let root = 0.5 * (lo + hi);
    let (pressure_at_root, pressure_raw_at_root) = pressure_at(root);
    let tail = *pressure_raw_at_root.last().unwrap();
    let converged = (pressure_at_root - tail).abs() <= tol::PRESSURE_CONVERGENCE;
    Ok(EntropyReport {
        root,
        bracket,
        bisection_width: hi - lo,
        pressure_at_root,
        pressure_raw_at_root,
        n_values: (n_lo..=n_hi).collect(),
        converged,
    })
}

// ---------------------------------------------------------------------------
// Maximal-entropy identities
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SrbCase {
    pub lambda: f64,
    pub roof_constant: f64,
    pub entropy: f64,
    pub error: f64,
}

/// Consistency report for the unstable-Jacobian cocycle of the base map.
#[derive(Debug, Clone, Serialize)]
pub struct SrbReport {
    /// (n, Σ_{Fix(Aⁿ)} λ₁⁻ⁿ): reweighted periodic-point masses, → 1.
    pub partition_sums: Vec<(u32, f64)>,
    pub final_partition_sum: f64,
    /// Pressure of the constant −log λ₁, whose extrapolation should vanish.
    pub unstable_pressure: PressureReport,
    /// Constant-roof suspensions scaled so the unstable log-Jacobian equals
    /// `lambda` times the period; entropy must then equal `lambda`.
    pub cases: Vec<SrbCase>,
    pub max_case_error: f64,
    pub partition_sum_ok: bool,
    pub unstable_pressure_ok: bool,
    pub cases_ok: bool,
}

pub fn srb_identity_check(auto: &ToralAuto, n_lo: u32, n_hi: u32) -> Result<SrbReport> {
    check_pressure_range(n_lo, n_hi)?;
    let log_lam = auto.log_lambda1();
    let lam = auto.lambda1();
    let mut partition_sums = Vec::new();
    for n in n_lo..=n_hi {
        let p = auto.pow(n)?;
        let count = (p[0][0] + p[1][1] - 2).unsigned_abs() as f64;
        partition_sums.push((n, count * lam.powi(-(n as i32))));
    }
    let final_partition_sum = partition_sums.last().unwrap().1;
    let unstable_pressure = pressure_base(auto, &TrigPoly::constant_poly(-log_lam), n_lo, n_hi)?;
    let mut cases = Vec::new();
    let mut max_case_error: f64 = 0.0;
    for lambda in [0.5, 1.0, 2.0] {
        let roof_constant = log_lam / lambda;
        let flow = SuspensionFlow::new(*auto, RoofFunction::constant(roof_constant)?);
        let entropy = entropy_suspension(&flow, n_lo, n_hi)?.root;
        let error = (entropy - lambda).abs();
        max_case_error = max_case_error.max(error);
        cases.push(SrbCase {
            lambda,
            roof_constant,
            entropy,
            error,
        });
    }
    Ok(SrbReport {
        partition_sum_ok: (final_partition_sum - 1.0).abs() <= tol::SRB_PARTITION,
        unstable_pressure_ok: unstable_pressure.extrapolated.abs() <= tol::SRB_PRESSURE,
        cases_ok: max_case_error <= tol::ENTROPY_IDENTITY,
        partition_sums,
        final_partition_sum,
        unstable_pressure,
        cases,
        max_case_error,
    })
}

// ---------------------------------------------------------------------------
// Coboundary solving on periodic orbits
// ---------------------------------------------------------------------------

/// Transfer-function values along one periodic orbit, anchored to zero at
/// the orbit's lexicographically least point.
#[derive(Debug, Clone)]
pub struct OrbitTransfer {
    pub n: u32,
    pub points: Vec<TorusPoint>,
    pub beta: Vec<f64>,
    pub orbit_sum: f64,
}

#[derive(Debug, Clone)]
pub struct TransferReport {
    pub orbits: Vec<OrbitTransfer>,
    pub orbit_count: usize,
    pub point_count: usize,
    pub max_orbit_sum: f64,
    /// Log-log slope of |Δβ| against torus distance over same-orbit pairs.
    pub holder_exponent: Option<f64>,
    pub holder_pair_count: usize,
    /// Worst spread, over pairs of distinct orbits, of the anchor-free
    /// differences β(x)−β(y) among nearby cross-orbit point pairs.
    pub cross_orbit_spread: Option<f64>,
}

fn torus_coord_gap(a: Rational64, b: Rational64) -> f64 {
    let d = mod1(a - b);
    let v = (*d.numer() as f64) / (*d.denom() as f64);
    v.min(1.0 - v)
}

fn torus_dist(a: &TorusPoint, b: &TorusPoint) -> f64 {
    let d0 = torus_coord_gap(a[0], b[0]);
    let d1 = torus_coord_gap(a[1], b[1]);
    (d0 * d0 + d1 * d1).sqrt()
}

/// Solves f = β − β∘A on all periodic orbits of least period ≤ `n_max`.
///
/// The hypothesis that every orbit sum of f vanishes (within
/// [`tol::ORBIT_SUM_ZERO`]) is checked first and its violation is an error
/// carrying the worst sum. β is then defined along each orbit by partial
/// sums from the orbit's least point, which pins the per-orbit constant.
pub fn livschitz_solve(auto: &ToralAuto, f: &TrigPoly, n_max: u32) -> Result<TransferReport> {
    let orbits = periodic_orbits(auto, n_max)?;
    let values: Vec<Vec<f64>> = orbits
        .iter()
        .map(|o| o.points.iter().map(|p| f.eval(p)).collect())
        .collect();
    let mut max_orbit_sum = 0.0f64;
    for vals in &values {
        let s: f64 = vals.iter().sum();
        max_orbit_sum = max_orbit_sum.max(s.abs());
    }
    if max_orbit_sum > tol::ORBIT_SUM_ZERO {
        return Err(Error::HypothesisViolated {
            max_violation: max_orbit_sum,
        });
    }
    let mut transfers = Vec::with_capacity(orbits.len());
    for (o, vals) in orbits.into_iter().zip(values) {
        let mut beta = Vec::with_capacity(vals.len());
        let mut acc = 0.0;
        for v in &vals {
            beta.push(acc);
            // β(Ax) = β(x) − f(x), unrolled along the orbit.
            acc -= v;
        }
        let orbit_sum: f64 = vals.iter().sum();
        transfers.push(OrbitTransfer {
            n: o.n,
            points: o.points,
            beta,
            orbit_sum,
        });
    }

    // Hölder diagnostic over same-orbit pairs: anchor constants cancel
    // within an orbit, so these differences are well defined.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for t in &transfers {
        for i in 0..t.points.len() {
            for j in (i + 1)..t.points.len() {
                let h = torus_dist(&t.points[i], &t.points[j]);
                let db = (t.beta[i] - t.beta[j]).abs();
                if h > 1e-12 && h <= 0.25 && db > 1e-13 {
                    xs.push(h.ln());
                    ys.push(db.ln());
                }
            }
        }
    }
    let holder_pair_count = xs.len();
    let holder_exponent = if holder_pair_count >= 8 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        (sxx > 1e-9).then(|| sxy / sxx)
    } else {
        None
    };

    // Cross-orbit consistency: β on different orbits is only defined up to
    // one constant per orbit, so compare the spread of β(x)−β(y) over many
    // nearby pairs from the same pair of orbits; the unknown constants drop
    // out of the spread.
    const CELLS: usize = 50;
    let mut grid: Vec<Vec<(usize, usize)>> = vec![Vec::new(); CELLS * CELLS];
    let coord = |r: Rational64| -> usize {
        let v = (*r.numer() as f64) / (*r.denom() as f64);
        ((v * CELLS as f64) as usize).min(CELLS - 1)
    };
    for (oi, t) in transfers.iter().enumerate() {
        for (pi, p) in t.points.iter().enumerate() {
            grid[coord(p[0]) * CELLS + coord(p[1])].push((oi, pi));
        }
    }
    let mut diffs: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    let mut record = |oa: usize, pa: usize, ob: usize, pb: usize| {
        let (oa, pa, ob, pb) = if oa < ob {
            (oa, pa, ob, pb)
        } else {
            (ob, pb, oa, pa)
        };
        let h = torus_dist(&transfers[oa].points[pa], &transfers[ob].points[pb]);
        if h > 0.02 {
            return;
        }
        let d = transfers[oa].beta[pa] - transfers[ob].beta[pb];
        let e = diffs
            .entry((oa, ob))
            .or_insert((f64::INFINITY, f64::NEG_INFINITY));
        e.0 = e.0.min(d);
        e.1 = e.1.max(d);
    };
    for ci in 0..CELLS {
        for cj in 0..CELLS {
            let here = &grid[ci * CELLS + cj];
            for di in 0..2usize {
                for dj in 0..2usize {
                    if di == 0 && dj == 0 {
                        for (a, &(oa, pa)) in here.iter().enumerate() {
                            for &(ob, pb) in here.iter().skip(a + 1) {
                                if oa != ob {
                                    record(oa, pa, ob, pb);
                                }
                            }
                        }
                    } else {
                        let ni = (ci + di) % CELLS;
                        let nj = (cj + dj) % CELLS;
                        for &(oa, pa) in here {
                            for &(ob, pb) in &grid[ni * CELLS + nj] {
                                if oa != ob {
                                    record(oa, pa, ob, pb);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let cross_orbit_spread = diffs
        .values()
        .filter(|(lo, hi)| hi > lo)
        .map(|(lo, hi)| hi - lo)
        .fold(None, |acc: Option<f64>, s| {
            Some(acc.map_or(s, |a| a.max(s)))
        });

    Ok(TransferReport {
        orbit_count: transfers.len(),
        point_count: transfers.iter().map(|t| t.points.len()).sum(),
        orbits: transfers,
        max_orbit_sum,
        holder_exponent,
        holder_pair_count,
        cross_orbit_spread,
    })
}

// ---------------------------------------------------------------------------
// Flow cocycles and the averaging smoother
// ---------------------------------------------------------------------------

/// Point of the suspension space: base coordinate and fiber height
/// 0 ≤ u < roof(x).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuspPoint {
    pub x: [f64; 2],
    pub u: f64,
}

/// Additive cocycle over the suspension flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CocycleSpec {
    /// α(p,t) = ∫₀ᵗ f(base(Φˢp)) ds for a trig polynomial f on the torus.
    /// The integrand is constant along each fiber crossing, so the integral
    /// is evaluated in closed form segment by segment.
    Generator(TrigPoly),
    /// α(p,t) = rate·t + β₀(p) − β₀(Φᵗp) with β₀(x,u) = amplitude·sin(2πu/roof(x)),
    /// a linear cocycle with a planted smooth coboundary part.
    PlantedLinear { rate: f64, amplitude: f64 },
}

/// Walks the flow for `t` units from `start`, invoking `seg(x, u0, u1)` for
/// each maximal piece that stays inside one fiber, and returns the endpoint.
fn walk_segments<F: FnMut(&[f64; 2], f64, f64)>(
    flow: &SuspensionFlow,
    start: SuspPoint,
    t: f64,
    mut seg: F,
) -> SuspPoint {
    let mut x = start.x;
    let mut u = start.u;
    let mut remaining = t;
    let cap = (t / flow.roof.certified_min()).ceil() as usize + 16;
    for _ in 0..cap {
        if remaining <= 0.0 {
            break;
        }
        let r = flow.roof.eval_f64(x);
        let left = r - u;
        if remaining < left {
            seg(&x, u, u + remaining);
            u += remaining;
            remaining = 0.0;
            break;
        }
        seg(&x, u, r);
        remaining -= left;
        x = flow.base.apply_f64(x);
        u = 0.0;
    }
    assert!(
        remaining <= 0.0,
        "flow walk exhausted its crossing budget; roof certification is broken"
    );
    SuspPoint { x, u }
}

fn planted_beta0(flow: &SuspensionFlow, amplitude: f64, p: &SuspPoint) -> f64 {
    amplitude * (TAU * p.u / flow.roof.eval_f64(p.x)).sin()
}

/// α(p,t) together with the endpoint Φᵗp.
fn cocycle_alpha(
    flow: &SuspensionFlow,
    spec: &CocycleSpec,
    p: SuspPoint,
    t: f64,
) -> (f64, SuspPoint) {
    match spec {
        CocycleSpec::Generator(f) => {
            let mut a = 0.0;
            let end = walk_segments(flow, p, t, |x, u0, u1| {
                a += f.eval_f64(*x) * (u1 - u0);
            });
            (a, end)
        }
        CocycleSpec::PlantedLinear { rate, amplitude } => {
            let end = walk_segments(flow, p, t, |_, _, _| {});
            let a = rate * t + planted_beta0(flow, *amplitude, &p)
                - planted_beta0(flow, *amplitude, &end);
            (a, end)
        }
    }
}

/// ∫₀ᵀ α(p,s) ds, exact per segment: the generator case integrates a
/// piecewise-linear function of s, the planted case has a closed-form
/// sine primitive on each fiber crossing.
fn cocycle_alpha_integral(flow: &SuspensionFlow, spec: &CocycleSpec, p: SuspPoint, t: f64) -> f64 {
    match spec {
        CocycleSpec::Generator(f) => {
            let mut integral = 0.0;
            let mut running = 0.0;
            walk_segments(flow, p, t, |x, u0, u1| {
                let v = f.eval_f64(*x);
                let d = u1 - u0;
                integral += running * d + 0.5 * v * d * d;
                running += v * d;
            });
            integral
        }
        CocycleSpec::PlantedLinear { rate, amplitude } => {
            let mut beta_int = 0.0;
            walk_segments(flow, p, t, |x, u0, u1| {
                let r = flow.roof.eval_f64(*x);
                beta_int += amplitude * r / TAU * ((TAU * u0 / r).cos() - (TAU * u1 / r).cos());
            });
            0.5 * rate * t * t + planted_beta0(flow, *amplitude, &p) * t - beta_int
        }
    }
}

/// Time-averaged rate of the cocycle along each periodic orbit of least
/// period ≤ 8, computed from exact orbit data.
pub fn orbit_rates(flow: &SuspensionFlow, spec: &CocycleSpec) -> Result<Vec<f64>> {
    let orbits = periodic_orbits(&flow.base, 8)?;
    Ok(match spec {
        CocycleSpec::Generator(f) => orbits
            .iter()
            .map(|o| {
                let mut num = 0.0;
                let mut den = 0.0;
                for p in &o.points {
                    let r = flow.roof.eval(p);
                    num += f.eval(p) * r;
                    den += r;
                }
                num / den
            })
            .collect(),
        CocycleSpec::PlantedLinear { rate, .. } => vec![*rate; orbits.len()],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaGrid {
    pub base: usize,
    pub fibers: usize,
    /// Row-major over (row, col, fiber level).
    pub values: Vec<f64>,
}

/// Report of the time-averaging construction that turns a cocycle with
/// positive periodic rates into a comparison function β.
#[derive(Debug, Clone, Serialize)]
pub struct SmootherReport {
    pub lambda_prime: f64,
    pub min_orbit_rate: f64,
    /// Chosen averaging window: the first power of two at which every grid
    /// point satisfies α(p,T) ≥ λ'T.
    pub t_averaging: f64,
    pub doubling_steps: u32,
    pub grid_min_rate: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_mean: f64,
    /// Worst |α(p,t)+β(Φᵗp)−β(p) − (1/T)∫ₜ^{T+t} α(p,s)ds + (1/T)∫₀ᵀ α(p,s)ds|
    /// over the random samples.
    pub identity_max_residual: f64,
    /// Worst α(p,t)+β(Φᵗp)−β(p) − λ't over the random samples.
    pub inequality_min_margin: f64,
    pub sample_count: usize,
    #[serde(skip)]
    pub beta_grid: BetaGrid,
}

const SMOOTHER_GRID: usize = 128;
const SMOOTHER_FIBERS: usize = 4;
const SMOOTHER_T_CAP: f64 = 1024.0;

/// Builds β(p) = (1/T)∫₀ᵀ α(p,s) ds for the smallest dyadic window T whose
/// grid-verified rates clear `lambda_prime`, then verifies the smoothing
/// identity and inequality on `samples` random (point, time) pairs.
///
/// Periodic rates over orbits of period ≤ 8 must strictly exceed
/// `lambda_prime` or the hypothesis error is returned; failure to find a
/// window by T = 2¹⁰ is a resource error.
pub fn averaging_smoother(
    flow: &SuspensionFlow,
    spec: &CocycleSpec,
    lambda_prime: f64,
    samples: usize,
    seed: u64,
) -> Result<SmootherReport> {
    if !lambda_prime.is_finite() {
        return Err(invalid("rate bound must be finite"));
    }
    if samples == 0 || samples > 1_000_000 {
        return Err(invalid("sample count must be in 1..=1000000"));
    }
    if let CocycleSpec::PlantedLinear { rate, amplitude } = spec {
        if !rate.is_finite() || !amplitude.is_finite() {
            return Err(invalid("planted cocycle parameters must be finite"));
        }
    }
    let rates = orbit_rates(flow, spec)?;
    let min_orbit_rate = rates.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(min_orbit_rate > lambda_prime) {
        return Err(Error::HypothesisViolated {
            max_violation: lambda_prime - min_orbit_rate,
        });
    }

    let g = SMOOTHER_GRID;
    let grid_point = |idx: usize| -> SuspPoint {
        let cell = idx / SMOOTHER_FIBERS;
        let level = idx % SMOOTHER_FIBERS;
        let (i, j) = (cell / g, cell % g);
        let x = [j as f64 / g as f64, i as f64 / g as f64];
        let r = flow.roof.eval_f64(x);
        SuspPoint {
            x,
            u: level as f64 / SMOOTHER_FIBERS as f64 * r,
        }
    };
    let total = g * g * SMOOTHER_FIBERS;
    let min_rate_at = |t: f64| -> f64 {
        det::map_fold(
            total,
            CHUNK,
            |range| {
                let mut m = f64::INFINITY;
                for idx in range {
                    let (a, _) = cocycle_alpha(flow, spec, grid_point(idx), t);
                    m = m.min(a / t);
                }
                m
            },
            f64::INFINITY,
            f64::min,
        )
    };
    let mut t_avg = 1.0;
    let mut doubling_steps = 0;
    let grid_min_rate = loop {
        let r = min_rate_at(t_avg);
        if r >= lambda_prime {
            break r;
        }
        t_avg *= 2.0;
        doubling_steps += 1;
        if t_avg > SMOOTHER_T_CAP {
            return Err(Error::ResourceLimit(format!(
                "no averaging window up to {SMOOTHER_T_CAP} reaches rate {lambda_prime}"
            )));
        }
    };

    let beta_values = det::map_fold(
        total,
        CHUNK,
        |range| {
            let mut out = Vec::with_capacity(range.len());
            for idx in range {
                out.push(cocycle_alpha_integral(flow, spec, grid_point(idx), t_avg) / t_avg);
            }
            out
        },
        Vec::new(),
        |mut acc, mut part| {
            acc.append(&mut part);
            acc
        },
    );
    let beta_min = beta_values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let beta_max = beta_values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let beta_mean = beta_values.iter().sum::<f64>() / beta_values.len() as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identity_max_residual = 0.0f64;
    let mut inequality_min_margin = f64::INFINITY;
    for _ in 0..samples {
        let x = [rng.gen::<f64>(), rng.gen::<f64>()];
        let r = flow.roof.eval_f64(x);
        let p = SuspPoint {
            x,
            u: rng.gen::<f64>() * r * 0.999,
        };
        let t = rng.gen_range(0.1..4.0);
        let (a_t, q) = cocycle_alpha(flow, spec, p, t);
        let beta_p = cocycle_alpha_integral(flow, spec, p, t_avg) / t_avg;
        let beta_q = cocycle_alpha_integral(flow, spec, q, t_avg) / t_avg;
        let int_to_t = cocycle_alpha_integral(flow, spec, p, t);
        let int_to_tt = cocycle_alpha_integral(flow, spec, p, t_avg + t);
        let lhs = a_t + beta_q - beta_p;
        let rhs = (int_to_tt - int_to_t) / t_avg - beta_p;
        identity_max_residual = identity_max_residual.max((lhs - rhs).abs());
        inequality_min_margin = inequality_min_margin.min(lhs - lambda_prime * t);
    }

    Ok(SmootherReport {
        lambda_prime,
        min_orbit_rate,
        t_averaging: t_avg,
        doubling_steps,
        grid_min_rate,
        beta_min,
        beta_max,
        beta_mean,
        identity_max_residual,
        inequality_min_margin,
        sample_count: samples,
        beta_grid: BetaGrid {
            base: g,
            fibers: SMOOTHER_FIBERS,
            values: beta_values,
        },
    })
}

// ---------------------------------------------------------------------------
// Time-change bookkeeping
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct TimeChangeRow {
    pub n: u32,
    pub tau: f64,
    pub pairing: f64,
    pub tau_rho: f64,
    /// (1−δ)·τ_ρ − (τ + pairing), evaluated in exact rational arithmetic;
    /// zero by construction.
    pub bookkeeping_residual: f64,
    pub ju: f64,
    pub js: f64,
    pub j_model: f64,
}

/// Entropy defect chain for the shifted roof, with the exactly-verified
/// period bookkeeping and the measured rescaling law.
#[derive(Debug, Clone, Serialize)]
pub struct TimeChangeReport {
    pub a_scalar: f64,
    pub h_a: f64,
    pub delta_bar: f64,
    /// (c, |c·entropy(c·roof_a) − h_a|) for c ∈ {1−δ̄, 1/2, 2}.
    pub rescale_residuals: Vec<(f64, f64)>,
    pub max_rescale_residual: f64,
    pub max_bookkeeping_residual: f64,
    pub rows: Vec<TimeChangeRow>,
    /// Which columns are definitional bookkeeping and which carry measured
    /// numerical content.
    pub column_provenance: Vec<(String, String)>,
}

fn exact_rational(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| invalid("non-finite value in exact bookkeeping"))
}

/// Shifts the roof by `a_scalar`, measures the entropy h_a of the shifted
/// suspension, sets δ̄ = 1 − 1/h_a, and audits the resulting period and
/// rescaling identities. The period relation (1−δ̄)·τ_ρ = τ + a·n is checked
/// in exact rational arithmetic, so its residual is identically zero; the
/// rescaling law entropy(c·roof)·c = entropy(roof) is a genuine measurement.
pub fn delta_bar_chain(
    flow: &SuspensionFlow,
    a_scalar: f64,
    n_lo: u32,
    n_hi: u32,
) -> Result<TimeChangeReport> {
    let roof_a = flow.roof.plus_constant(a_scalar)?;
    let flow_a = SuspensionFlow::new(flow.base, roof_a.clone());
    let h_a = entropy_suspension(&flow_a, n_lo, n_hi)?.root;
    if !h_a.is_finite() || h_a <= 0.0 {
        return Err(Error::Numerical(format!(
            "entropy of the shifted roof must be positive, got {h_a}"
        )));
    }
    let delta_bar = 1.0 - 1.0 / h_a;
    if delta_bar >= 1.0 {
        return Err(Error::Numerical(
            "time-change defect reached one; the flow model breaks down".into(),
        ));
    }
    let one_minus = 1.0 - delta_bar;

    let mut rescale_residuals = Vec::new();
    let mut max_rescale_residual = 0.0f64;
    for c in [one_minus, 0.5, 2.0] {
        let scaled = SuspensionFlow::new(flow.base, roof_a.scaled(c)?);
        let e = entropy_suspension(&scaled, n_lo, n_hi)?.root;
        let residual = (c * e - h_a).abs();
        max_rescale_residual = max_rescale_residual.max(residual);
        rescale_residuals.push((c, residual));
    }

    let log_lam = flow.base.log_lambda1();
    let delta_r = exact_rational(delta_bar)?;
    let one_minus_r = BigRational::one() - &delta_r;
    let a_r = exact_rational(a_scalar)?;
    let mut rows = Vec::new();
    let mut max_bookkeeping_residual = 0.0f64;
    for orbit in flow_orbits(flow, n_hi.min(6))? {
        let tau_r = exact_rational(orbit.tau)?;
        let pairing_r = &a_r * BigRational::from_integer(BigInt::from(orbit.n));
        let tau_rho_r = (&tau_r + &pairing_r) / &one_minus_r;
        let residual_r = &one_minus_r * &tau_rho_r - (&tau_r + &pairing_r);
        assert!(
            residual_r.is_zero(),
            "exact field arithmetic cannot miss a definitional identity"
        );
        let residual = residual_r.to_f64().unwrap();
        max_bookkeeping_residual = max_bookkeeping_residual.max(residual.abs());
        let tau_rho = tau_rho_r.to_f64().unwrap();
        let pairing = a_scalar * orbit.n as f64;
        rows.push(TimeChangeRow {
            n: orbit.n,
            tau: orbit.tau,
            pairing,
            tau_rho,
            bookkeeping_residual: residual,
            ju: orbit.n as f64 * log_lam,
            js: -(orbit.n as f64) * log_lam,
            j_model: delta_bar * tau_rho + pairing / one_minus,
        });
    }

    let column_provenance = [
        ("tau", "measured"),
        ("pairing", "definitional"),
        ("tau_rho", "definitional"),
        ("bookkeeping_residual", "definitional"),
        ("ju", "definitional"),
        ("js", "definitional"),
        ("j_model", "definitional"),
        ("h_a", "measured"),
        ("rescale_residuals", "measured"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();

    Ok(TimeChangeReport {
        a_scalar,
        h_a,
        delta_bar,
        rescale_residuals,
        max_rescale_residual,
        max_bookkeeping_residual,
        rows,
        column_provenance,
    })
}

// ---------------------------------------------------------------------------
// Volume audit for the solvable model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct VolumeCurve {
    pub t: f64,
    pub lambda_star: Vec<f64>,
    pub integral: Vec<f64>,
    pub strictly_increasing: bool,
    pub root: f64,
}

/// Audit of the drift-rate formula and the volume obstruction.
#[derive(Debug, Clone, Serialize)]
pub struct SolvableReport {
    pub omega_scalar: f64,
    pub planted_delta: f64,
    pub planted_lambda: f64,
    pub planted_lambda_s: f64,
    /// (λ − δλˢ)/(1−δ).
    pub lambda_star_closed_form: f64,
    /// Least-squares rate recovered from the planted orbit table.
    pub lambda_star_fit: f64,
    pub closed_form_gap: f64,
    pub max_fit_residual: f64,
    pub orbit_rows: usize,
    pub curves: Vec<VolumeCurve>,
    /// Worst |I(t,0) − 1| over t; zero bitwise because the normalized
    /// integral of the constant 1 is its own denominator.
    pub identity_at_zero: f64,
    pub max_root_abs: f64,
}

const VOLUME_BASE_GRID: usize = 64;
const VOLUME_FIBERS: usize = 8;

/// Plants orbit data consistent with both drift decompositions for the given
/// (δ, λ, λˢ), recovers the drift rate two ways, and locates the unique
/// volume-preserving rate of the flow-stretched integral I(t,·).
///
/// The fiber density is ω/roof, so each full crossing contributes exactly ω
/// to the orbit integral and I(t,0) = 1 with no quadrature error at all.
pub fn solvable_volume_audit(
    flow: &SuspensionFlow,
    omega_scalar: f64,
    planted: (f64, f64, f64),
    lambda_lo: f64,
    lambda_hi: f64,
) -> Result<SolvableReport> {
    if !(omega_scalar.is_finite() && omega_scalar > 0.0) {
        return Err(invalid("fiber density scale must be positive"));
    }
    let (delta, lambda, lambda_s) = planted;
    for v in [delta, lambda, lambda_s] {
        if !v.is_finite() {
            return Err(invalid("planted parameters must be finite"));
        }
    }
    if (1.0 - delta).abs() < 1e-9 {
        return Err(invalid("planted delta of one makes the periods blow up"));
    }
    if !(lambda_lo < 0.0 && 0.0 < lambda_hi) {
        return Err(invalid("rate window must straddle zero"));
    }

    // Planted orbit table: periods chosen so both decompositions of the
    // log-Jacobian hold at once, which forces J/ω to a single constant.
    let orbits = periodic_orbits(&flow.base, 8)?;
    let mut sum_jw = 0.0;
    let mut sum_ww = 0.0;
    let mut table = Vec::with_capacity(orbits.len());
    for o in &orbits {
        let w = omega_scalar * o.n as f64;
        let tau = (lambda - lambda_s) * w / (1.0 - delta);
        let j = tau + lambda_s * w;
        sum_jw += j * w;
        sum_ww += w * w;
        table.push((j, w));
    }
    let lambda_star_fit = sum_jw / sum_ww;
    let lambda_star_closed_form = (lambda - delta * lambda_s) / (1.0 - delta);
    let max_fit_residual = table
        .iter()
        .map(|(j, w)| (j - lambda_star_fit * w).abs())
        .fold(0.0f64, f64::max);

    // Stretch integrals W(p,t) = ∫₀ᵗ ω/roof ds on a fixed quadrature grid.
    let g = VOLUME_BASE_GRID;
    let cells = g * g * VOLUME_FIBERS;
    let cell_point_weight = |idx: usize| -> (SuspPoint, f64) {
        let cell = idx / VOLUME_FIBERS;
        let level = idx % VOLUME_FIBERS;
        let (i, j) = (cell / g, cell % g);
        let x = [(j as f64 + 0.5) / g as f64, (i as f64 + 0.5) / g as f64];
        let r = flow.roof.eval_f64(x);
        let u = (level as f64 + 0.5) / VOLUME_FIBERS as f64 * r;
        (SuspPoint { x, u }, r)
    };
    let mut curves = Vec::new();
    let mut identity_at_zero = 0.0f64;
    let mut max_root_abs = 0.0f64;
    for t in [1.0, 2.0, 4.0] {
        let stretched: Vec<(f64, f64)> = det::map_fold(
            cells,
            CHUNK,
            |range| {
                let mut out = Vec::with_capacity(range.len());
                for idx in range {
                    let (p, weight) = cell_point_weight(idx);
                    let mut w_int = 0.0;
                    walk_segments(flow, p, t, |x, u0, u1| {
                        w_int += omega_scalar * (u1 - u0) / flow.roof.eval_f64(*x);
                    });
                    out.push((w_int, weight));
                }
                out
            },
            Vec::new(),
            |mut acc, mut part| {
                acc.append(&mut part);
                acc
            },
        );
        let integral_at = |ls: f64| -> f64 {
            let (num, den) = det::map_fold(
                cells,
                CHUNK,
                |range| {
                    let mut num = 0.0;
                    let mut den = 0.0;
                    for idx in range {
                        let (w_int, weight) = stretched[idx];
                        num += weight * (ls * w_int).exp();
                        den += weight;
                    }
                    (num, den)
                },
                (0.0, 0.0),
                |a, b| (a.0 + b.0, a.1 + b.1),
            );
            num / den
        };
        let mut lambda_star = Vec::new();
        let mut integral = Vec::new();
        let steps = 20;
        for k in 0..=steps {
            let ls = lambda_lo + (lambda_hi - lambda_lo) * k as f64 / steps as f64;
            lambda_star.push(ls);
            integral.push(integral_at(ls));
        }
        let strictly_increasing = integral.windows(2).all(|w| w[1] > w[0]);
        identity_at_zero = identity_at_zero.max((integral_at(0.0) - 1.0).abs());
        let (mut lo, mut hi) = (lambda_lo, lambda_hi);
        if !(integral_at(lo) < 1.0 && integral_at(hi) > 1.0) {
            return Err(Error::Numerical(
                "volume root not bracketed by the rate window".into(),
            ));
        }
        let mut guard = 0;
        while hi - lo > tol::VOLUME_ROOT && guard < 80 {
            let mid = 0.5 * (lo + hi);
            if integral_at(mid) > 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            guard += 1;
        }
        let root = 0.5 * (lo + hi);
        max_root_abs = max_root_abs.max(root.abs());
        curves.push(VolumeCurve {
            t,
            lambda_star,
            integral,
            strictly_increasing,
            root,
        });
    }

    Ok(SolvableReport {
        omega_scalar,
        planted_delta: delta,
        planted_lambda: lambda,
        planted_lambda_s: lambda_s,
        lambda_star_closed_form,
        lambda_star_fit,
        closed_form_gap: (lambda_star_fit - lambda_star_closed_form).abs(),
        max_fit_residual,
        orbit_rows: table.len(),
        curves,
        identity_at_zero,
        max_root_abs,
    })
}

// ---------------------------------------------------------------------------
// Separated-set entropy for the doubling map
// ---------------------------------------------------------------------------

/// Exact separated-set counts for the circle-doubling map.
#[derive(Debug, Clone, Serialize)]
pub struct SeparatedReport {
    pub k: u32,
    /// (n, maximal (n, 2⁻ᵏ)-separated cardinality), exactly 2^(n−1+k).
    pub counts: Vec<(u32, u64)>,
    /// Successive log-ratio of the counts; equals ln 2 to the last bit.
    pub entropy: f64,
    pub spot_checks: usize,
}

fn circle_norm(x: f64) -> f64 {
    let f = x.rem_euclid(1.0);
    f.min(1.0 - f)
}

/// max over 0 ≤ i < n of the circle distance between the i-th doublings of
/// two points at difference `delta`; the orbit metric is translation
/// invariant so the difference is all that matters.
fn orbit_gap(delta: f64, n: u32) -> f64 {
    let mut m = 0.0f64;
    let mut d = delta;
    for _ in 0..n {
        m = m.max(circle_norm(d));
        d *= 2.0;
    }
    m
}

/// For x ↦ 2x on the circle with ε = 2⁻ᵏ, the maximal (n,ε)-separated sets
/// are the arithmetic grids of spacing ε·2^{1−n}: two points are (n,ε)-far
/// exactly when their difference exceeds ε·2^{-(n-1)}, so the count is
/// 2^{n−1+k} on the nose and the entropy drops out of one exact ratio.
pub fn doubling_separated_entropy(n_max: u32, k: u32) -> Result<SeparatedReport> {
    if !(2..=20).contains(&k) {
        return Err(invalid("resolution exponent must be in 2..=20"));
    }
    if !(2..=40).contains(&n_max) {
        return Err(invalid("depth must be in 2..=40"));
    }
    let mut counts = Vec::new();
    for n in 1..=n_max {
        counts.push((n, 1u64 << (n - 1 + k)));
    }
    let eps = 0.5f64.powi(k as i32);
    let mut spot_checks = 0;
    if k <= 8 {
        for n in 1..=n_max.min(6) {
            let m = 1u64 << (n - 1 + k);
            // Dyadic spacings double exactly in f64, so these checks are
            // exact arithmetic, not approximations.
            for j in 1..m {
                assert!(
                    orbit_gap(j as f64 / m as f64, n) >= eps,
                    "grid of {m} points must be pairwise separated"
                );
            }
            assert!(
                orbit_gap(1.0 / (m as f64 + 1.0), n) < eps,
                "one more point than {m} must collide"
            );
            spot_checks += 1;
        }
    }
    // log N(n) − log N(n−1) for exact powers of two is one bit-exact ln 2.
    let exponent_step = (n_max - 1 + k) - (n_max - 2 + k);
    let entropy = exponent_step as f64 * std::f64::consts::LN_2;
    Ok(SeparatedReport {
        k,
        counts,
        entropy,
        spot_checks,
    })
}
