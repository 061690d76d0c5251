//! Lifted unit-determinant 2x2 matrix arithmetic.
//!
//! An element pairs a matrix with an integer winding number. The matrix acts
//! projectively on the circle of directions; the winding number selects one
//! continuous lift of that action to the real line. Lifts are evaluated
//! through a window normalization, so composing two elements costs a couple
//! of trigonometric calls instead of any path tracking.

use crate::tol;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Row-major 2x2 real matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Plain matrix product with no determinant bookkeeping.
    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Adjugate, which equals the inverse when the determinant is one.
    ///
    /// It is formed entrywise with no division, so it stays accurate for
    /// hyperbolic powers whose determinant can no longer be evaluated
    /// without catastrophic cancellation.
    pub fn adjugate(&self) -> Mat2 {
        Mat2 {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn neg(&self) -> Mat2 {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2 {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            d: self.d * s,
        }
    }

    /// Largest absolute entrywise difference.
    pub fn dist(&self, o: &Mat2) -> f64 {
        (self.a - o.a)
            .abs()
            .max((self.b - o.b).abs())
            .max((self.c - o.c).abs())
            .max((self.d - o.d).abs())
    }

    /// Distance to the nearer of the two central matrices.
    pub fn dist_to_center(&self) -> f64 {
        self.dist(&Mat2::IDENTITY).min(self.dist(&Mat2::IDENTITY.neg()))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        let t = self.frobenius_sq();
        let det = self.det();
        let disc = (t * t - 4.0 * det * det).max(0.0);
        (0.5 * (t + disc.sqrt())).sqrt()
    }

    /// Enforces the unit-determinant contract.
    ///
    /// Drift below `tol::DET_DRIFT` passes through, drift up to
    /// `tol::DET_HARD` is corrected by rescaling, and anything beyond that is
    /// rejected. For matrices with very large entries the determinant itself
    /// is computed with absolute error proportional to |ad| + |bc|, so in
    /// that regime drift inside the scaled rounding budget passes through
    /// unrescaled: the computed value carries no usable information there.
    pub fn into_unit(self) -> Result<Mat2> {
        let det = self.det();
        let drift = (det - 1.0).abs();
        if drift <= tol::DET_DRIFT {
            return Ok(self);
        }
        if drift <= tol::DET_HARD && det > 0.0 {
            return Ok(self.scale(1.0 / det.sqrt()));
        }
        let scale = (self.a * self.d).abs() + (self.b * self.c).abs() + 1.0;
        if scale > 1e8 && drift <= 1e-12 * scale {
            return Ok(self);
        }
        Err(Error::NonUnitDeterminant { det })
    }
}

/// Reduces an angle to [0, pi).
pub fn angle_mod_pi(x: f64) -> f64 {
    let mut y = x % PI;
    if y < 0.0 {
        y += PI;
    }
    if y >= PI {
        y -= PI;
    }
    y
}

/// Direction angle of the image of the horizontal direction, in [0, pi).
pub fn base_angle(m: &Mat2) -> f64 {
    angle_mod_pi(f64::atan2(m.c, m.a))
}

/// Value at `x` of the canonical lift of the projective action of `m`.
///
/// The canonical lift is the increasing map commuting with adding pi whose
/// value at 0 lies in [0, pi). Evaluation reduces x into [0, pi), computes
/// the image direction there, and places it inside the window
/// [f(0), f(0) + pi). When the image direction sits at the window edge to
/// working precision, the side is decided by comparing x against the
/// preimage of the horizontal direction, which is well conditioned exactly
/// where the edge comparison is not.
pub fn lift_eval(m: &Mat2, x: f64) -> f64 {
    let mut n = (x / PI).floor();
    let mut x0 = x - n * PI;
    if x0 >= PI {
        x0 -= PI;
        n += 1.0;
    }
    if x0 < 0.0 {
        x0 += PI;
        n -= 1.0;
    }
    let (sn, cs) = x0.sin_cos();
    let theta = angle_mod_pi(f64::atan2(m.c * cs + m.d * sn, m.a * cs + m.b * sn));
    let f0 = base_angle(m);
    let z = theta - f0;
    let wrap = if z < -1e-9 {
        true
    } else if z > 1e-9 {
        false
    } else {
        let x_pi = angle_mod_pi(f64::atan2(-m.c, m.d));
        x_pi > 0.0 && x0 >= x_pi
    };
    theta + if wrap { PI } else { 0.0 } + n * PI
}

/// Geodesic translation length encoded by a trace value, zero when the trace
/// is not hyperbolic.
pub fn translation_length_of_trace(t: f64) -> f64 {
    let h = 0.5 * t.abs();
    if h <= 1.0 {
        0.0
    } else {
        2.0 * h.acosh()
    }
}

/// Conjugacy type of a lifted element.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementClass {
    /// Matrix is one of the two central matrices; `power` counts half turns
    /// of the total lift.
    Central { power: i64 },
    /// Conjugate to a rotation; `angle` in (0, pi) satisfies
    /// trace = 2 cos(angle).
    Elliptic { angle: f64 },
    /// Absolute trace within the band around 2.
    Parabolic,
    /// Conjugate to a diagonal stretch with the given translation length.
    Hyperbolic { length: f64 },
}

/// A matrix together with the winding number that picks a lift.
///
/// Two stored values describe the same lift when the matrices agree up to
/// sign and the total lifts at zero agree; raw winding numbers are
/// representation dependent near the central matrices and should be compared
/// through [`CoverElement::lift0`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CoverElement {
    #[serde(rename = "matrix")]
    m: Mat2,
    #[serde(rename = "winding")]
    k: i64,
}

impl CoverElement {
    pub fn new(m: Mat2, k: i64) -> Result<Self> {
        Ok(CoverElement {
            m: m.into_unit()?,
            k,
        })
    }

    /// The base lift, with value at zero inside [0, pi).
    pub fn from_matrix(m: Mat2) -> Result<Self> {
        Self::new(m, 0)
    }

    /// The lift whose value at zero is nearest to `target`; errors when no
    /// lift of `m` comes within a quarter period of it.
    pub fn with_lift0(m: Mat2, target: f64) -> Result<Self> {
        let m = m.into_unit()?;
        let f0 = base_angle(&m);
        let t = (target - f0) / PI;
        let k = t.round();
        if (t - k).abs() > tol::WINDING_ROUND {
            return Err(Error::InvalidInput(format!(
                "no lift of the matrix takes the value {target:.6} at zero"
            )));
        }
        Ok(CoverElement { m, k: k as i64 })
    }

    pub fn identity() -> Self {
        CoverElement {
            m: Mat2::IDENTITY,
            k: 0,
        }
    }

    /// Central element translating every lift by `power` half turns.
    pub fn central(power: i64) -> Self {
        CoverElement {
            m: Mat2::IDENTITY,
            k: power,
        }
    }

    /// Lift of the rotation by `phi`, with lift value `phi` at zero.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self::with_lift0(Mat2::new(c, -s, s, c), phi)
            .expect("rotation matrices always admit the requested lift")
    }

    /// Diagonal stretch with translation length |t|, base lift.
    pub fn geodesic(t: f64) -> Self {
        let e = (0.5 * t).exp();
        CoverElement {
            m: Mat2::new(e, 0.0, 0.0, 1.0 / e),
            k: 0,
        }
    }

    /// Upper triangular shear, base lift.
    pub fn upper(s: f64) -> Self {
        CoverElement {
            m: Mat2::new(1.0, s, 0.0, 1.0),
            k: 0,
        }
    }

    /// Lower triangular shear, on the lift branch through the identity.
    pub fn lower(s: f64) -> Self {
        Self::with_lift0(Mat2::new(1.0, 0.0, s, 1.0), f64::atan2(s, 1.0))
            .expect("shear matrices always admit the requested lift")
    }

    pub fn matrix(&self) -> Mat2 {
        self.m
    }

    pub(crate) fn matrix_ref(&self) -> &Mat2 {
        &self.m
    }

    pub fn winding(&self) -> i64 {
        self.k
    }

    /// Value of the selected lift at zero. This is the invariant that
    /// separates the countably many lifts of one matrix.
    pub fn lift0(&self) -> f64 {
        base_angle(&self.m) + self.k as f64 * PI
    }

    pub fn compose(&self, other: &CoverElement) -> Result<CoverElement> {
        let m = self.m.mul(&other.m).into_unit()?;
        let w0 = winding_defect(&self.m, &other.m, &m, 0.0)?;
        let w1 = winding_defect(&self.m, &other.m, &m, 1.0)?;
        if w0 != w1 {
            return Err(Error::Numerical(format!(
                "winding defect disagrees between sample points ({w0} vs {w1})"
            )));
        }
        Ok(CoverElement {
            m,
            k: self.k + other.k + w0,
        })
    }

    pub fn inverse(&self) -> Result<CoverElement> {
        let minv = self.m.adjugate().into_unit()?;
        let t = lift_eval(&self.m, base_angle(&minv)) / PI;
        let w = t.round();
        if (t - w).abs() > tol::WINDING_ROUND {
            return Err(Error::Numerical(format!(
                "inverse winding defect {t:.6} is not close to an integer"
            )));
        }
        Ok(CoverElement {
            m: minv,
            k: -self.k - w as i64,
        })
    }

    pub fn pow(&self, n: i64) -> Result<CoverElement> {
        let (base, reps) = if n < 0 {
            (self.inverse()?, n.unsigned_abs())
        } else {
            (*self, n as u64)
        };
        let mut out = CoverElement::identity();
        for _ in 0..reps {
            out = out.compose(&base)?;
        }
        Ok(out)
    }

    pub fn conjugate_by(&self, g: &CoverElement) -> Result<CoverElement> {
        g.compose(self)?.compose(&g.inverse()?)
    }

    pub fn classify(&self) -> ElementClass {
        if self.m.dist_to_center() <= tol::CENTRAL_MATRIX {
            return ElementClass::Central {
                power: (self.lift0() / PI).round() as i64,
            };
        }
        let t = self.m.trace();
        if t.abs() >= 2.0 + tol::PARABOLIC_BAND {
            ElementClass::Hyperbolic {
                length: translation_length_of_trace(t),
            }
        } else if t.abs() <= 2.0 - tol::PARABOLIC_BAND {
            ElementClass::Elliptic {
                angle: (0.5 * t).acos(),
            }
        } else {
            ElementClass::Parabolic
        }
    }

    /// Translation length read off the trace; zero unless hyperbolic.
    pub fn translation_length(&self) -> f64 {
        translation_length_of_trace(self.m.trace())
    }

    /// Half-turn count for an element whose matrix is central; errors
    /// otherwise.
    pub fn central_power(&self) -> Result<i64> {
        let d = self.m.dist_to_center();
        if d > tol::CENTRAL_MATRIX {
            return Err(Error::InvalidInput(format!(
                "matrix is {d:.3e} away from the center"
            )));
        }
        Ok((self.lift0() / PI).round() as i64)
    }

    /// Same lift to tolerance: matrices agree up to sign and the lifts agree
    /// at zero. Winding numbers are not compared directly because they shift
    /// with the sign gauge of the matrix.
    pub fn approx_eq(&self, other: &CoverElement, tol_mat: f64) -> bool {
        let md = self
            .m
            .dist(&other.m)
            .min(self.m.dist(&other.m.neg()));
        md <= tol_mat && (self.lift0() - other.lift0()).abs() <= 0.5
    }
}

fn winding_defect(mp: &Mat2, mq: &Mat2, mpq: &Mat2, x: f64) -> Result<i64> {
    let inner = lift_eval(mq, x);
    let outer = lift_eval(mp, inner);
    let base = lift_eval(mpq, x);
    let t = (outer - base) / PI;
    let w = t.round();
    if (t - w).abs() > tol::WINDING_ROUND {
        return Err(Error::Numerical(format!(
            "winding defect {t:.6} is not close to an integer"
        )));
    }
    Ok(w as i64)
}

/// One step of the commutator growth table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CommutatorRow {
    pub n: u32,
    /// Trace from the closed form in the eigenframe of the base element.
    pub trace_closed: f64,
    /// Trace of the fully multiplied out commutator.
    pub trace_direct: f64,
    /// Translation length of the commutator at this step.
    pub length: f64,
    /// length / (2n); converges to the base length, since the commutator
    /// travels out along the axis of the base element and back.
    pub ratio: f64,
    /// n |ratio - base_length| = |length/2 - n base_length|; bounded by the
    /// log of the framed off-diagonal product in the limit.
    pub deviation: f64,
}

/// Growth of commutators of an increasing hyperbolic power against a fixed
/// element.
#[derive(Clone, Debug, Serialize)]
pub struct CommutatorGrowth {
    /// Translation length of the base hyperbolic element.
    pub base_length: f64,
    /// Product of the off-diagonal entries of the second element in the
    /// eigenframe of the first; the growth degenerates when it vanishes.
    pub off_diagonal_product: f64,
    pub rows: Vec<CommutatorRow>,
    /// Largest relative disagreement between the closed form trace and the
    /// multiplied out trace.
    pub max_trace_mismatch: f64,
    /// Largest deviation over the table.
    pub max_deviation: f64,
}

/// Diagonalizing frame of a hyperbolic matrix: unit determinant, first
/// column expanding, second contracting. Returns the frame and the
/// translation length.
fn eigen_frame(m: &Mat2) -> Result<(Mat2, f64)> {
    let t = m.trace();
    if t.abs() <= 2.0 + tol::PARABOLIC_BAND {
        return Err(Error::DegenerateCommutator(
            "base element is not hyperbolic".into(),
        ));
    }
    let length = translation_length_of_trace(t);
    let disc = (t * t - 4.0).sqrt();
    let l1 = 0.5 * (t + t.signum() * disc);
    let l2 = 1.0 / l1;
    let pick = |l: f64| -> (f64, f64) {
        let u = (m.b, l - m.a);
        let v = (l - m.d, m.c);
        if u.0 * u.0 + u.1 * u.1 >= v.0 * v.0 + v.1 * v.1 {
            u
        } else {
            v
        }
    };
    let v1 = pick(l1);
    let mut v2 = pick(l2);
    let mut det = v1.0 * v2.1 - v1.1 * v2.0;
    if det < 0.0 {
        v2 = (-v2.0, -v2.1);
        det = -det;
    }
    if det < 1e-12 {
        return Err(Error::DegenerateCommutator(
            "eigenvector frame is numerically singular".into(),
        ));
    }
    let s = 1.0 / det.sqrt();
    Ok((Mat2::new(v1.0 * s, v2.0 * s, v1.1 * s, v2.1 * s), length))
}

/// Entries of `q` written in the eigenframe of the hyperbolic element `p`:
/// returns (diagonal product, off-diagonal product, translation length of p).
pub(crate) fn framed_products(p: &Mat2, q: &Mat2) -> Result<(f64, f64, f64)> {
    let (frame, length) = eigen_frame(p)?;
    let b = frame.adjugate().mul(q).mul(&frame);
    Ok((b.a * b.d, b.b * b.c, length))
}

/// Tabulates lengths of the commutators of p^n with q for n up to `n_max`.
///
/// The base element must be hyperbolic and q must move its axis; in the
/// eigenframe of p the commutator trace has the closed form
/// 2 ad - bc (e^{nL} + e^{-nL}), which is compared against the trace of the
/// fully multiplied out product. Direct products use adjugate inverses
/// throughout, since at large n the factors are far too ill conditioned for
/// any division-based inverse.
pub fn commutator_growth(
    p: &CoverElement,
    q: &CoverElement,
    n_max: u32,
) -> Result<CommutatorGrowth> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    let (diag, off, length) = framed_products(&p.m, &q.m)?;
    if off.abs() < 1e-10 {
        return Err(Error::DegenerateCommutator(format!(
            "the pair nearly shares an axis endpoint, off-diagonal product {off:.3e}"
        )));
    }
    let qinv = q.m.adjugate();
    let pinv = p.m.adjugate();
    let mut pn = Mat2::IDENTITY;
    let mut pninv = Mat2::IDENTITY;
    let mut rows = Vec::with_capacity(n_max as usize);
    let mut max_trace_mismatch: f64 = 0.0;
    let mut max_deviation: f64 = 0.0;
    for n in 1..=n_max {
        pn = pn.mul(&p.m);
        pninv = pninv.mul(&pinv);
        let mu = (n as f64 * length).exp();
        let trace_closed = 2.0 * diag - off * (mu + 1.0 / mu);
        let cm = pn.mul(&q.m).mul(&pninv).mul(&qinv);
        let trace_direct = cm.trace();
        if trace_direct.abs() <= 2.0 + tol::PARABOLIC_BAND {
            return Err(Error::DegenerateCommutator(format!(
                "commutator at n = {n} is not hyperbolic, trace {trace_direct:.6}"
            )));
        }
        let len = translation_length_of_trace(trace_direct);
        let mismatch = (trace_closed - trace_direct).abs() / trace_closed.abs().max(1.0);
        let deviation = (0.5 * len - n as f64 * length).abs();
        max_trace_mismatch = max_trace_mismatch.max(mismatch);
        max_deviation = max_deviation.max(deviation);
        rows.push(CommutatorRow {
            n,
            trace_closed,
            trace_direct,
            length: len,
            ratio: 0.5 * len / n as f64,
            deviation,
        });
    }
    Ok(CommutatorGrowth {
        base_length: length,
        off_diagonal_product: off,
        rows,
        max_trace_mismatch,
        max_deviation,
    })
}

/// Seeded random elements for tests and audits.
pub mod sample {
    use super::*;
    use rand::Rng;

    /// Generic element: a rotation, stretch, shear product with an extra
    /// central factor so winding numbers get exercised.
    pub fn group_point<R: Rng>(rng: &mut R) -> CoverElement {
        let g = CoverElement::rotation(rng.gen_range(-PI..PI))
            .compose(&CoverElement::geodesic(rng.gen_range(-2.0..2.0)))
            .and_then(|g| g.compose(&CoverElement::upper(rng.gen_range(-2.0..2.0))))
            .expect("bounded products stay well conditioned");
        CoverElement::central(rng.gen_range(-2..3)).compose(&g).unwrap()
    }

    /// Hyperbolic element with translation length drawn from [0.3, 2.5].
    pub fn hyperbolic<R: Rng>(rng: &mut R) -> CoverElement {
        let l = rng.gen_range(0.3..2.5);
        let g = CoverElement::rotation(rng.gen_range(-PI..PI))
            .compose(&CoverElement::geodesic(rng.gen_range(-1.0..1.0)))
            .and_then(|g| g.compose(&CoverElement::upper(rng.gen_range(-1.0..1.0))))
            .expect("bounded products stay well conditioned");
        CoverElement::geodesic(l)
            .conjugate_by(&g)
            .expect("conjugation by a bounded element stays well conditioned")
    }

    /// Pair (p, q) valid for `commutator_growth` up to `n_max`: p hyperbolic
    /// with length in [0.5, 1.5], q moving its axis with a bounded framed
    /// off-diagonal product, and every commutator trace along the way kept
    /// away from the non-hyperbolic band.
    pub fn commutator_pair<R: Rng>(rng: &mut R, n_max: u32) -> (CoverElement, CoverElement) {
        loop {
            let l = rng.gen_range(0.5..1.5);
            let g = CoverElement::rotation(rng.gen_range(-PI..PI))
                .compose(&CoverElement::geodesic(rng.gen_range(-1.0..1.0)))
                .and_then(|g| g.compose(&CoverElement::upper(rng.gen_range(-1.0..1.0))))
                .expect("bounded products stay well conditioned");
            let p = match CoverElement::geodesic(l).conjugate_by(&g) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let q = match CoverElement::rotation(rng.gen_range(-PI..PI))
                .compose(&CoverElement::geodesic(rng.gen_range(-1.0..1.0)))
                .and_then(|q| q.compose(&CoverElement::lower(rng.gen_range(-1.0..1.0))))
            {
                Ok(q) => q,
                Err(_) => continue,
            };
            let Ok((diag, off, length)) = framed_products(&p.m, &q.m) else {
                continue;
            };
            if !(0.05..20.0).contains(&off.abs()) {
                continue;
            }
            let hyperbolic_throughout = (1..=n_max).all(|n| {
                let mu = (n as f64 * length).exp();
                (2.0 * diag - off * (mu + 1.0 / mu)).abs() >= 2.5
            });
            if hyperbolic_throughout {
                return (p, q);
            }
        }
    }
}
