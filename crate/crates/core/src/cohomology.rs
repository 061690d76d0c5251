//! The moduli seminorm on first cohomology of the surface lattice.
//!
//! A cohomology class is a pairing vector a in R^4 against the homology
//! vector of a word. The stage n seminorm is the largest ratio
//! |<a, h(g)>| / length(g) over hyperbolic classes represented by words of
//! length at most n. Everything here is driven by one table: for each
//! homology vector, the minimal translation length seen at each word length
//! budget. That table is built in a single streaming scan and makes seminorm
//! evaluation, history, grid slices, and audits cheap afterwards.

use crate::cover::translation_length_of_trace;
use crate::lattice::{scan_reduced_words, GroupWord, LatticeRep};
use crate::tol;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

/// Largest word length budget a table can be built for.
pub const MAX_TABLE_DEPTH: usize = 12;

const BALL_MARGIN: f64 = 0.05;

fn pack_homology(h: &[i64; 4]) -> u32 {
    let mut out = 0u32;
    for (i, &x) in h.iter().enumerate() {
        debug_assert!((-120..=120).contains(&x));
        out |= (((x as i8) as u8) as u32) << (8 * i);
    }
    out
}

fn unpack_homology(p: u32) -> [i64; 4] {
    let mut h = [0i64; 4];
    for (i, slot) in h.iter_mut().enumerate() {
        *slot = ((p >> (8 * i)) as u8 as i8) as i64;
    }
    h
}

/// Per-homology minimal translation lengths at every word length budget.
#[derive(Clone, Debug)]
pub struct DeltaTable {
    maxlen: usize,
    /// Sorted by homology vector; `mins[n]` is the least translation length
    /// among hyperbolic words of length at most n with that homology
    /// (infinite when none exists yet).
    entries: Vec<([i64; 4], Vec<f64>)>,
}

impl DeltaTable {
    /// Scans all freely reduced words up to `maxlen` once and keeps, for
    /// each nonzero homology vector, the shortest hyperbolic translation
    /// length at every length budget.
    pub fn build(lat: &LatticeRep, maxlen: usize) -> Result<DeltaTable> {
        if maxlen == 0 || maxlen > MAX_TABLE_DEPTH {
            return Err(Error::InvalidInput(format!(
                "table depth {maxlen} is outside 1..={MAX_TABLE_DEPTH}"
            )));
        }
        let slots = maxlen + 1;
        let raw: HashMap<u32, Vec<f64>> = scan_reduced_words(
            lat,
            maxlen,
            HashMap::new,
            |acc: &mut HashMap<u32, Vec<f64>>, w| {
                if w.homology == &[0, 0, 0, 0] {
                    return;
                }
                let t = w.matrix.trace();
                if t.abs() <= 2.0 + tol::PARABOLIC_BAND {
                    return;
                }
                let len = translation_length_of_trace(t);
                let slot = &mut acc
                    .entry(pack_homology(w.homology))
                    .or_insert_with(|| vec![f64::INFINITY; slots])[w.letters.len()];
                if len < *slot {
                    *slot = len;
                }
            },
            |mut a, b| {
                for (k, v) in b {
                    match a.entry(k) {
                        std::collections::hash_map::Entry::Occupied(mut e) => {
                            for (x, y) in e.get_mut().iter_mut().zip(v) {
                                if y < *x {
                                    *x = y;
                                }
                            }
                        }
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(v);
                        }
                    }
                }
                a
            },
        );
        let mut entries: Vec<([i64; 4], Vec<f64>)> = raw
            .into_iter()
            .map(|(k, mut mins)| {
                for i in 1..mins.len() {
                    if mins[i - 1] < mins[i] {
                        mins[i] = mins[i - 1];
                    }
                }
                (unpack_homology(k), mins)
            })
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(DeltaTable { maxlen, entries })
    }

    pub fn maxlen(&self) -> usize {
        self.maxlen
    }

    /// Number of distinct nonzero homology vectors seen.
    pub fn class_count(&self) -> usize {
        self.entries.len()
    }

    /// Stage n seminorm of the pairing vector `a`.
    pub fn seminorm_at(&self, a: &[f64; 4], n: usize) -> f64 {
        let n = n.min(self.maxlen);
        let mut best = 0.0f64;
        for (h, mins) in &self.entries {
            let len = mins[n];
            if !len.is_finite() {
                continue;
            }
            let dot = (a[0] * h[0] as f64
                + a[1] * h[1] as f64
                + a[2] * h[2] as f64
                + a[3] * h[3] as f64)
                .abs();
            let s = dot / len;
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Seminorm at the full depth of the table.
    pub fn seminorm(&self, a: &[f64; 4]) -> f64 {
        self.seminorm_at(a, self.maxlen)
    }

    /// Homology vector realizing the stage n seminorm and its minimal
    /// length, or None when the value is zero. Ties go to the smallest
    /// vector in lexicographic order, since entries are kept sorted.
    pub fn witness_class(&self, a: &[f64; 4], n: usize) -> Option<([i64; 4], f64)> {
        let n = n.min(self.maxlen);
        let mut best: Option<([i64; 4], f64)> = None;
        let mut value = 0.0f64;
        for (h, mins) in &self.entries {
            let len = mins[n];
            if !len.is_finite() {
                continue;
            }
            let dot = (a[0] * h[0] as f64
                + a[1] * h[1] as f64
                + a[2] * h[2] as f64
                + a[3] * h[3] as f64)
                .abs();
            let s = dot / len;
            if s > value {
                value = s;
                best = Some((*h, len));
            }
        }
        best
    }

    /// Seminorm values for every stage 1..=maxlen; nondecreasing.
    pub fn history(&self, a: &[f64; 4]) -> Vec<f64> {
        (1..=self.maxlen).map(|n| self.seminorm_at(a, n)).collect()
    }

    /// Largest l1 norm of a homology vector divided by its minimal length at
    /// stage n. Controls which sup ball is certain to sit inside the unit
    /// set of the seminorm.
    pub fn kappa_at(&self, n: usize) -> f64 {
        let n = n.min(self.maxlen);
        let mut best = 0.0f64;
        for (h, mins) in &self.entries {
            let len = mins[n];
            if !len.is_finite() {
                continue;
            }
            let l1: i64 = h.iter().map(|x| x.abs()).sum();
            let r = l1 as f64 / len;
            if r > best {
                best = r;
            }
        }
        best
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_at(self.maxlen)
    }

    /// Whether `a` lies in the open unit set of the full-depth seminorm,
    /// together with the value.
    pub fn contains(&self, a: &[f64; 4]) -> (bool, f64) {
        let s = self.seminorm(a);
        (s < 1.0, s)
    }
}

/// Twisted period of a single hyperbolic word under a pairing vector.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodShift {
    pub word: GroupWord,
    pub length: f64,
    pub homology: [i64; 4],
    /// <a, h(w)>.
    pub pairing: f64,
    /// length + pairing.
    pub shifted_length: f64,
    /// shifted_length / length; positive for every word whenever the
    /// seminorm of `a` is below one.
    pub ratio: f64,
}

/// Evaluates the twisted period of one word. The word must be hyperbolic.
pub fn period_shift(lat: &LatticeRep, w: &GroupWord, a: &[f64; 4]) -> Result<PeriodShift> {
    let g = lat.eval(w)?;
    let length = g.translation_length();
    if length <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "word {w} is not hyperbolic, so it has no period to shift"
        )));
    }
    let h = w.homology();
    let pairing = a[0] * h[0] as f64
        + a[1] * h[1] as f64
        + a[2] * h[2] as f64
        + a[3] * h[3] as f64;
    Ok(PeriodShift {
        word: w.clone(),
        length,
        homology: h,
        pairing,
        shifted_length: length + pairing,
        ratio: 1.0 + pairing / length,
    })
}

/// A planar slice of seminorm values over a centered square grid.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaSlice {
    /// Indices of the two coordinate axes spanning the plane.
    pub axes: [usize; 2],
    pub radius: f64,
    pub grid: usize,
    pub maxlen: usize,
    /// values[row][col] with the first axis along columns; both run from
    /// -radius to radius inclusive.
    pub values: Vec<Vec<f64>>,
    /// Fraction of grid nodes with seminorm below one.
    pub inside_fraction: f64,
}

/// Evaluates the full-depth seminorm over a grid in the plane spanned by two
/// coordinate axes.
pub fn delta_slice(
    table: &DeltaTable,
    axes: [usize; 2],
    radius: f64,
    grid: usize,
) -> Result<DeltaSlice> {
    if axes[0] > 3 || axes[1] > 3 || axes[0] == axes[1] {
        return Err(Error::InvalidInput(format!(
            "axes {axes:?} must be two distinct indices in 0..=3"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    if grid < 2 || grid > 501 {
        return Err(Error::InvalidInput(format!(
            "grid size {grid} is outside 2..=501"
        )));
    }
    let coord = |i: usize| -radius + 2.0 * radius * i as f64 / (grid - 1) as f64;
    let mut values = Vec::with_capacity(grid);
    let mut inside = 0usize;
    for row in 0..grid {
        let y = coord(row);
        let mut line = Vec::with_capacity(grid);
        for col in 0..grid {
            let x = coord(col);
            let mut a = [0.0f64; 4];
            a[axes[0]] = x;
            a[axes[1]] = y;
            let s = table.seminorm(&a);
            if s < 1.0 {
                inside += 1;
            }
            line.push(s);
        }
        values.push(line);
    }
    Ok(DeltaSlice {
        axes,
        radius,
        grid,
        maxlen: table.maxlen(),
        values,
        inside_fraction: inside as f64 / (grid * grid) as f64,
    })
}

/// Randomized audit of the seminorm laws on a finished table.
#[derive(Clone, Debug, Serialize)]
pub struct GammaAudit {
    pub trials: u32,
    pub maxlen: usize,
    pub class_count: usize,
    pub kappa: f64,
    /// Radius of the sup ball tested for containment in the unit set:
    /// (1 - margin) / kappa.
    pub ball_radius: f64,
    /// Largest seminorm value found on that ball; stays below one by
    /// construction of kappa.
    pub max_seminorm_on_ball: f64,
    pub max_homogeneity_defect: f64,
    pub max_subadditivity_defect: f64,
    pub max_symmetry_defect: f64,
    /// True when every sampled history was nondecreasing in the stage.
    pub monotone_history: bool,
}

/// Checks positive homogeneity, subadditivity, symmetry, stage monotonicity,
/// and the kappa ball containment on seeded random pairing vectors.
pub fn gamma_a_audit(table: &DeltaTable, seed: u64, trials: u32) -> Result<GammaAudit> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kappa = table.kappa();
    if kappa <= 0.0 {
        return Err(Error::Numerical(
            "table has no hyperbolic classes, kappa is undefined".into(),
        ));
    }
    let ball_radius = (1.0 - BALL_MARGIN) / kappa;
    let mut max_hom = 0.0f64;
    let mut max_sub = 0.0f64;
    let mut max_sym = 0.0f64;
    let mut max_ball = 0.0f64;
    let mut monotone = true;
    for _ in 0..trials {
        let mut a = [0.0f64; 4];
        let mut b = [0.0f64; 4];
        for i in 0..4 {
            a[i] = rng.gen_range(-1.0..1.0);
            b[i] = rng.gen_range(-1.0..1.0);
        }
        let sa = table.seminorm(&a);
        let sb = table.seminorm(&b);

        let t: f64 = rng.gen_range(0.0..3.0);
        let ta = [t * a[0], t * a[1], t * a[2], t * a[3]];
        let hom = (table.seminorm(&ta) - t * sa).abs() / (t * sa).max(1.0);
        max_hom = max_hom.max(hom);

        let ab = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
        let sub = table.seminorm(&ab) - sa - sb;
        max_sub = max_sub.max(sub);

        let na = [-a[0], -a[1], -a[2], -a[3]];
        max_sym = max_sym.max((table.seminorm(&na) - sa).abs());

        let hist = table.history(&a);
        if hist.windows(2).any(|p| p[0] > p[1] + 1e-15) {
            monotone = false;
        }

        let sup = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if sup > 0.0 {
            let scaled = [
                a[0] / sup * ball_radius,
                a[1] / sup * ball_radius,
                a[2] / sup * ball_radius,
                a[3] / sup * ball_radius,
            ];
            max_ball = max_ball.max(table.seminorm(&scaled));
        }
    }
    Ok(GammaAudit {
        trials,
        maxlen: table.maxlen(),
        class_count: table.class_count(),
        kappa,
        ball_radius,
        max_seminorm_on_ball: max_ball,
        max_homogeneity_defect: max_hom,
        max_subadditivity_defect: max_sub,
        max_symmetry_defect: max_sym,
        monotone_history: monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(maxlen: usize) -> DeltaTable {
        let lat = LatticeRep::octagon().unwrap();
        DeltaTable::build(&lat, maxlen).unwrap()
    }

    #[test]
    fn witness_class_reproduces_the_seminorm() {
        let t = table(4);
        let a = [0.9, -0.3, 0.2, 0.1];
        let (h, len) = t.witness_class(&a, 4).expect("nonzero value");
        let dot: f64 = (0..4).map(|i| a[i] * h[i] as f64).sum();
        assert!((dot.abs() / len - t.seminorm_at(&a, 4)).abs() == 0.0);
        assert!(t.witness_class(&[0.0; 4], 4).is_none());
    }

    #[test]
    fn first_axis_history_matches_recorded_values() {
        let t = table(6);
        let e1 = [1.0, 0.0, 0.0, 0.0];
        let hist = t.history(&e1);
        // Stage one and two are pinned by the generator itself: 1 over the
        // systole.
        let inv_systole = 1.0 / 3.0571418389619964;
        assert!((hist[0] - inv_systole).abs() < 1e-12);
        assert!((hist[1] - inv_systole).abs() < 1e-12);
        assert!((hist[2] - 0.343167).abs() < 1e-6, "stage 3 {}", hist[2]);
        assert!((hist[3] - 0.408421).abs() < 1e-6, "stage 4 {}", hist[3]);
        assert!((hist[5] - 0.408421).abs() < 1e-6, "stage 6 {}", hist[5]);
    }

    #[test]
    fn seminorm_vanishes_only_toward_zero_pairing() {
        let t = table(4);
        assert_eq!(t.seminorm(&[0.0; 4]), 0.0);
        let s = t.seminorm(&[0.3, -0.2, 0.1, 0.4]);
        assert!(s > 0.0);
    }

    #[test]
    fn audit_laws_hold_tightly() {
        let t = table(5);
        let audit = gamma_a_audit(&t, 1, 100).unwrap();
        assert!(audit.max_homogeneity_defect <= 1e-12);
        assert!(audit.max_subadditivity_defect <= 1e-12);
        assert!(audit.max_symmetry_defect <= 1e-12);
        assert!(audit.monotone_history);
        assert!(
            audit.max_seminorm_on_ball < 1.0 - BALL_MARGIN + 1e-9,
            "ball value {}",
            audit.max_seminorm_on_ball
        );
        assert!(audit.kappa > 0.3 && audit.kappa < 2.0, "kappa {}", audit.kappa);
    }

    #[test]
    fn slice_is_centrally_symmetric_with_zero_core() {
        let t = table(4);
        let s = delta_slice(&t, [0, 1], 2.0, 5).unwrap();
        assert_eq!(s.values.len(), 5);
        assert_eq!(s.values[2][2], 0.0);
        for r in 0..5 {
            for c in 0..5 {
                let v = s.values[r][c];
                let w = s.values[4 - r][4 - c];
                assert!((v - w).abs() < 1e-12);
            }
        }
        assert!(s.inside_fraction > 0.0 && s.inside_fraction < 1.0);
    }

    #[test]
    fn period_shift_of_a_generator() {
        let lat = LatticeRep::octagon().unwrap();
        let w = GroupWord::parse("a").unwrap();
        let p = period_shift(&lat, &w, &[0.1, 0.0, 0.0, 0.0]).unwrap();
        assert!((p.length - 3.0571418389619964).abs() < 1e-12);
        assert!((p.pairing - 0.1).abs() < 1e-15);
        assert!((p.shifted_length - p.length - 0.1).abs() < 1e-15);
        assert!(p.ratio > 1.0);
        let r = GroupWord::parse("aBcDAbCd").unwrap();
        assert!(period_shift(&lat, &r, &[0.1, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn deeper_tables_only_grow_the_seminorm() {
        let t4 = table(4);
        let t6 = table(6);
        for a in [[0.4, 0.1, -0.2, 0.3], [1.0, 0.0, 0.0, 0.0], [-0.5, 0.5, 0.5, -0.5]] {
            assert!(t6.seminorm(&a) >= t4.seminorm(&a) - 1e-15);
            // The shallow table agrees with the deep table truncated to the
            // shallow stage.
            assert!((t6.seminorm_at(&a, 4) - t4.seminorm(&a)).abs() < 1e-15);
        }
    }
}
