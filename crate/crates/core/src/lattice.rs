//! A cocompact surface lattice from a regular octagon side pairing, plus a
//! deterministic streaming enumeration of its freely reduced words.
//!
//! The four generators are conjugates of one diagonal stretch by rotations in
//! eighth-turn steps. The defining relation is not assumed: it is found by
//! checking a fixed candidate family for numerical closure into the center of
//! the cover, and construction fails unless exactly one candidate closes with
//! a total lift of two half turns.

use crate::cover::{translation_length_of_trace, CoverElement, Mat2};
use crate::tol;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;

/// Number of generators.
pub const NGEN: usize = 4;

/// Children are pushed in this order everywhere, so scans are reproducible.
const LETTER_ORDER: [i8; 8] = [1, -1, 2, -2, 3, -3, 4, -4];

/// Length-eight candidate relations tried at construction time. Lower case
/// letters in the comments are generators, upper case their inverses.
const RELATOR_CANDIDATES: [[i8; 8]; 6] = [
    [1, 2, 3, 4, -1, -2, -3, -4],  // abcdABCD
    [1, 2, -1, -2, 3, 4, -3, -4],  // abABcdCD
    [1, -2, 3, -4, -1, 2, -3, 4],  // aBcDAbCd
    [1, 2, 3, 4, 1, 2, 3, 4],      // abcdabcd
    [1, -2, 3, -4, 1, -2, 3, -4],  // aBcDaBcD
    [1, 3, -1, -3, 2, 4, -2, -4],  // acACbdBD
];

/// Word in the generators: letters 1..=4 are generators, negatives are their
/// inverses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupWord(Vec<i8>);

impl GroupWord {
    pub fn new(letters: Vec<i8>) -> Result<Self> {
        for &l in &letters {
            if l == 0 || l.unsigned_abs() as usize > NGEN {
                return Err(Error::InvalidInput(format!(
                    "letter {l} is outside the generator range"
                )));
            }
        }
        Ok(GroupWord(letters))
    }

    /// Parses the compact form: a..d for generators, A..D for inverses, and
    /// "e" for the empty word.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "e" {
            return Ok(GroupWord(Vec::new()));
        }
        let mut letters = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let l = match ch {
                'a'..='d' => (ch as i8) - b'a' as i8 + 1,
                'A'..='D' => -((ch as i8) - b'A' as i8 + 1),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "unexpected character {ch:?} in word, expected a..d or A..D"
                    )))
                }
            };
            letters.push(l);
        }
        Ok(GroupWord(letters))
    }

    pub fn letters(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord(self.0.iter().rev().map(|&l| -l).collect())
    }

    /// Cancels adjacent inverse pairs until none remain.
    pub fn freely_reduced(&self) -> GroupWord {
        let mut out: Vec<i8> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        GroupWord(out)
    }

    /// Freely reduces, then strips matching first and last letters.
    pub fn cyclically_reduced(&self) -> GroupWord {
        let mut w = self.freely_reduced().0;
        while w.len() >= 2 && w[0] == -w[w.len() - 1] {
            w.pop();
            w.remove(0);
        }
        GroupWord(w)
    }

    /// Exponent sums per generator.
    pub fn homology(&self) -> [i64; 4] {
        let mut h = [0i64; 4];
        for &l in &self.0 {
            h[(l.unsigned_abs() - 1) as usize] += l.signum() as i64;
        }
        h
    }

    pub fn rotated(&self, by: usize) -> GroupWord {
        if self.0.is_empty() {
            return self.clone();
        }
        let n = self.0.len();
        let by = by % n;
        let mut v = Vec::with_capacity(n);
        v.extend_from_slice(&self.0[by..]);
        v.extend_from_slice(&self.0[..by]);
        GroupWord(v)
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &l in &self.0 {
            let ch = if l > 0 {
                (b'a' + (l - 1) as u8) as char
            } else {
                (b'A' + (-l - 1) as u8) as char
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl Serialize for GroupWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The lattice: generators, their inverses, and the verified relation.
#[derive(Clone, Debug)]
pub struct LatticeRep {
    gens: [CoverElement; NGEN],
    gen_invs: [CoverElement; NGEN],
    relator: GroupWord,
    relator_gap: f64,
    relator_power: i64,
    closing_candidates: usize,
    convention: &'static str,
    base_length: f64,
}

fn eval_letters(
    gens: &[CoverElement; NGEN],
    gen_invs: &[CoverElement; NGEN],
    letters: &[i8],
) -> Result<CoverElement> {
    let mut acc = CoverElement::identity();
    for &l in letters {
        let idx = (l.unsigned_abs() - 1) as usize;
        let g = if l > 0 { &gens[idx] } else { &gen_invs[idx] };
        acc = acc.compose(g)?;
    }
    Ok(acc)
}

impl LatticeRep {
    /// Builds the octagon lattice: generator k is the diagonal stretch of
    /// trace 2 + 2 sqrt(2) conjugated by the rotation through k pi / 8, so
    /// consecutive axes are an eighth turn apart. The relation is found by
    /// numerical closure over the candidate family and must be unique there.
    pub fn octagon() -> Result<LatticeRep> {
        let lambda = 1.0 + SQRT_2 + (2.0 + 2.0 * SQRT_2).sqrt();
        let base_length = 2.0 * lambda.ln();
        let stretch = CoverElement::geodesic(base_length);
        let mut gens = [CoverElement::identity(); NGEN];
        let mut gen_invs = [CoverElement::identity(); NGEN];
        for k in 0..NGEN {
            let r = CoverElement::rotation(k as f64 * PI / 8.0);
            gens[k] = stretch.conjugate_by(&r)?;
            gen_invs[k] = gens[k].inverse()?;
        }
        let mut found: Option<(GroupWord, f64, i64)> = None;
        let mut closing = 0usize;
        for cand in RELATOR_CANDIDATES {
            let g = eval_letters(&gens, &gen_invs, &cand)?;
            let gap = g.matrix().dist_to_center();
            if gap <= tol::CENTRAL_MATRIX {
                closing += 1;
                let power = g.central_power()?;
                if found.is_none() {
                    found = Some((GroupWord(cand.to_vec()), gap, power));
                }
            }
        }
        let Some((relator, relator_gap, relator_power)) = found else {
            return Err(Error::ConstructionFailed(
                "no candidate relation closes into the center".into(),
            ));
        };
        if closing != 1 {
            return Err(Error::ConstructionFailed(format!(
                "{closing} candidate relations close, expected exactly one"
            )));
        }
        if relator_power.abs() != 2 {
            return Err(Error::ConstructionFailed(format!(
                "relation closes with central power {relator_power}, expected two half turns"
            )));
        }
        Ok(LatticeRep {
            gens,
            gen_invs,
            relator,
            relator_gap,
            relator_power,
            closing_candidates: closing,
            convention: "octagon-r8/aBcDAbCd",
            base_length,
        })
    }

    pub fn generators(&self) -> &[CoverElement; NGEN] {
        &self.gens
    }

    pub fn relator(&self) -> &GroupWord {
        &self.relator
    }

    pub fn convention(&self) -> &'static str {
        self.convention
    }

    /// Translation length of each generator.
    pub fn base_length(&self) -> f64 {
        self.base_length
    }

    fn element(&self, l: i8) -> &CoverElement {
        let idx = (l.unsigned_abs() - 1) as usize;
        if l > 0 {
            &self.gens[idx]
        } else {
            &self.gen_invs[idx]
        }
    }

    fn letter_matrix(&self, l: i8) -> &Mat2 {
        self.element(l).matrix_ref()
    }

    /// Full lifted evaluation, tracking winding numbers.
    pub fn eval(&self, w: &GroupWord) -> Result<CoverElement> {
        eval_letters(&self.gens, &self.gen_invs, w.letters())
    }

    /// Plain matrix product of the word, for scans where winding and
    /// determinant bookkeeping are not needed.
    pub fn eval_matrix(&self, w: &GroupWord) -> Mat2 {
        let mut m = Mat2::IDENTITY;
        for &l in w.letters() {
            m = m.mul(self.letter_matrix(l));
        }
        m
    }
}

/// View of one enumerated word handed to scan visitors.
pub struct WordData<'a> {
    pub letters: &'a [i8],
    pub matrix: &'a Mat2,
    pub homology: &'a [i64; 4],
}

/// Number of parallel accumulators used by scans. Fixed, so the merge tree
/// never depends on the thread count.
const SCAN_GROUPS: usize = 16;

/// Streams every nonempty freely reduced word of length at most `maxlen`
/// through `visit`, in parallel over length-two prefixes.
///
/// Matrices are built incrementally with one multiplication per tree edge.
/// The 56 length-two prefix subtrees are dealt round robin into a fixed
/// number of groups; each group fills one accumulator in a fixed depth-first
/// order and the accumulators are merged in group order, so the result is
/// bitwise reproducible for any thread count.
pub fn scan_reduced_words<T, S, V, M>(
    lat: &LatticeRep,
    maxlen: usize,
    seed: S,
    visit: V,
    merge: M,
) -> T
where
    T: Send,
    S: Fn() -> T + Sync,
    V: Fn(&mut T, WordData<'_>) + Sync,
    M: Fn(T, T) -> T,
{
    let mut root = seed();
    if maxlen == 0 {
        return root;
    }
    for &l in &LETTER_ORDER {
        let m = *lat.letter_matrix(l);
        let mut h = [0i64; 4];
        h[(l.unsigned_abs() - 1) as usize] = l.signum() as i64;
        visit(
            &mut root,
            WordData {
                letters: &[l],
                matrix: &m,
                homology: &h,
            },
        );
    }
    if maxlen == 1 {
        return root;
    }
    let mut prefixes: Vec<[i8; 2]> = Vec::with_capacity(56);
    for &l1 in &LETTER_ORDER {
        for &l2 in &LETTER_ORDER {
            if l2 != -l1 {
                prefixes.push([l1, l2]);
            }
        }
    }
    let mut groups: Vec<Vec<[i8; 2]>> = vec![Vec::new(); SCAN_GROUPS];
    for (i, p) in prefixes.into_iter().enumerate() {
        groups[i % SCAN_GROUPS].push(p);
    }
    let parts: Vec<T> = groups
        .into_par_iter()
        .map(|group| {
            let mut acc = seed();
            for p in group {
                let m1 = *lat.letter_matrix(p[0]);
                let m2 = m1.mul(lat.letter_matrix(p[1]));
                let mut letters = Vec::with_capacity(maxlen);
                letters.extend_from_slice(&p);
                let mut mats = Vec::with_capacity(maxlen);
                mats.push(m1);
                mats.push(m2);
                let mut hom = [0i64; 4];
                for &l in &p {
                    hom[(l.unsigned_abs() - 1) as usize] += l.signum() as i64;
                }
                visit(
                    &mut acc,
                    WordData {
                        letters: &letters,
                        matrix: &m2,
                        homology: &hom,
                    },
                );
                dfs(lat, maxlen, &mut letters, &mut mats, &mut hom, &visit, &mut acc);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(root, merge)
}

fn dfs<T, V>(
    lat: &LatticeRep,
    maxlen: usize,
    letters: &mut Vec<i8>,
    mats: &mut Vec<Mat2>,
    hom: &mut [i64; 4],
    visit: &V,
    acc: &mut T,
) where
    V: Fn(&mut T, WordData<'_>) + Sync,
{
    if letters.len() >= maxlen {
        return;
    }
    let last = *letters.last().expect("dfs starts below a nonempty prefix");
    for &l in &LETTER_ORDER {
        if l == -last {
            continue;
        }
        let m = mats.last().unwrap().mul(lat.letter_matrix(l));
        letters.push(l);
        mats.push(m);
        let hi = (l.unsigned_abs() - 1) as usize;
        hom[hi] += l.signum() as i64;
        visit(
            acc,
            WordData {
                letters,
                matrix: &m,
                homology: hom,
            },
        );
        dfs(lat, maxlen, letters, mats, hom, visit, acc);
        hom[hi] -= l.signum() as i64;
        mats.pop();
        letters.pop();
    }
}

/// Summary checks on the constructed lattice over all freely reduced words
/// up to `maxlen`.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeAudit {
    pub convention: String,
    /// Translation length of each generator.
    pub base_length: f64,
    pub relator: GroupWord,
    /// Distance of the relation matrix from the center.
    pub relator_gap: f64,
    /// Half turns of the relation lift; its inverse carries the negative.
    pub relator_power: i64,
    pub inverse_relator_power: i64,
    /// How many of the eight rotations of the relation close numerically.
    pub rotation_closures: usize,
    /// Candidates from the fixed family that closed at construction time.
    pub closing_candidates: usize,
    pub candidate_count: usize,
    pub maxlen: usize,
    pub words_scanned: u64,
    /// Smallest distance from any scanned word to the central matrices.
    pub min_center_gap: f64,
    pub parabolic_count: u64,
    pub elliptic_count: u64,
    /// Shortest hyperbolic translation length seen.
    pub systole: f64,
    /// Largest determinant drift across scanned word matrices.
    pub max_det_drift: f64,
    /// Integer rank of the scanned exponent-sum vectors; 4 for a genus-2
    /// surface group since the four generators are independent in homology.
    pub homology_rank: usize,
}

/// Rank over the integers by fraction-free Gaussian elimination; entries
/// stay below Hadamard bounds for 4x4 minors, far inside i128.
fn int_rank(rows: &[[i64; 4]]) -> usize {
    let mut m: Vec<[i128; 4]> = rows
        .iter()
        .map(|r| [r[0] as i128, r[1] as i128, r[2] as i128, r[3] as i128])
        .collect();
    let mut rank = 0;
    for col in 0..4 {
        if let Some(p) = (rank..m.len()).find(|&r| m[r][col] != 0) {
            m.swap(rank, p);
            for r in rank + 1..m.len() {
                if m[r][col] != 0 {
                    let (a, b) = (m[rank][col], m[r][col]);
                    for j in 0..4 {
                        m[r][j] = m[r][j] * a - m[rank][j] * b;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

#[derive(Clone, Copy)]
struct AuditAcc {
    words: u64,
    min_gap: f64,
    parabolic: u64,
    elliptic: u64,
    systole: f64,
    drift: f64,
    hvecs: [[i64; 4]; 4],
    hrank: usize,
}

impl AuditAcc {
    fn new() -> Self {
        AuditAcc {
            words: 0,
            min_gap: f64::INFINITY,
            parabolic: 0,
            elliptic: 0,
            systole: f64::INFINITY,
            drift: 0.0,
            hvecs: [[0; 4]; 4],
            hrank: 0,
        }
    }

    fn observe_homology(&mut self, h: &[i64; 4]) {
        if self.hrank == 4 || h == &[0; 4] {
            return;
        }
        let mut rows: Vec<[i64; 4]> = self.hvecs[..self.hrank].to_vec();
        rows.push(*h);
        if int_rank(&rows) > self.hrank {
            self.hvecs[self.hrank] = *h;
            self.hrank += 1;
        }
    }

    fn merge(a: Self, b: Self) -> Self {
        let mut out = AuditAcc {
            words: a.words + b.words,
            min_gap: a.min_gap.min(b.min_gap),
            parabolic: a.parabolic + b.parabolic,
            elliptic: a.elliptic + b.elliptic,
            systole: a.systole.min(b.systole),
            drift: a.drift.max(b.drift),
            hvecs: a.hvecs,
            hrank: a.hrank,
        };
        for h in &b.hvecs[..b.hrank] {
            out.observe_homology(h);
        }
        out
    }
}

/// Scans all freely reduced words up to `maxlen` and reports discreteness
/// diagnostics together with the relation checks.
pub fn audit_lattice(lat: &LatticeRep, maxlen: usize) -> Result<LatticeAudit> {
    if maxlen == 0 || maxlen > 12 {
        return Err(Error::InvalidInput(format!(
            "audit depth {maxlen} is outside 1..=12"
        )));
    }
    let inverse_relator_power = lat.eval(&lat.relator.inverse())?.central_power()?;
    let mut rotation_closures = 0usize;
    for r in 0..lat.relator.len() {
        let g = lat.eval(&lat.relator.rotated(r))?;
        if g.matrix().dist_to_center() <= tol::CENTRAL_MATRIX {
            rotation_closures += 1;
        }
    }
    let acc = scan_reduced_words(
        lat,
        maxlen,
        AuditAcc::new,
        |acc, w| {
            acc.words += 1;
            acc.min_gap = acc.min_gap.min(w.matrix.dist_to_center());
            acc.drift = acc.drift.max((w.matrix.det() - 1.0).abs());
            acc.observe_homology(w.homology);
            let t = w.matrix.trace().abs();
            if t >= 2.0 + tol::PARABOLIC_BAND {
                acc.systole = acc.systole.min(translation_length_of_trace(t));
            } else if t <= 2.0 - tol::PARABOLIC_BAND {
                acc.elliptic += 1;
            } else {
                acc.parabolic += 1;
            }
        },
        AuditAcc::merge,
    );
    Ok(LatticeAudit {
        convention: lat.convention.to_string(),
        base_length: lat.base_length,
        relator: lat.relator.clone(),
        relator_gap: lat.relator_gap,
        relator_power: lat.relator_power,
        inverse_relator_power,
        rotation_closures,
        closing_candidates: lat.closing_candidates,
        candidate_count: RELATOR_CANDIDATES.len(),
        maxlen,
        words_scanned: acc.words,
        min_center_gap: acc.min_gap,
        parabolic_count: acc.parabolic,
        elliptic_count: acc.elliptic,
        systole: acc.systole,
        max_det_drift: acc.drift,
        homology_rank: acc.hrank,
    })
}

/// One geometric length class of the spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEntry {
    pub length: f64,
    pub trace: f64,
    pub homology: [i64; 4],
    /// Number of distinct cyclic word classes merged into this entry.
    pub multiplicity: usize,
    /// Shortest, then lexicographically least, witnessing word.
    pub witness: GroupWord,
}

#[derive(Clone)]
struct CyclicClass {
    trace: f64,
    homology: [i64; 4],
    witness: Vec<i8>,
}

fn letter_code(l: i8) -> u64 {
    if l > 0 {
        l as u64
    } else {
        8 + (-l) as u64
    }
}

/// Packs the lexicographically least rotation of a cyclic word into nibbles
/// and returns it with the rotation offset that achieves it.
fn canonical_cyclic(letters: &[i8]) -> (u64, usize) {
    let n = letters.len();
    debug_assert!(n >= 1 && n <= 15);
    let mut best = u64::MAX;
    let mut best_rot = 0usize;
    for r in 0..n {
        let mut packed = 0u64;
        for i in 0..n {
            packed = (packed << 4) | letter_code(letters[(r + i) % n]);
        }
        if packed < best {
            best = packed;
            best_rot = r;
        }
    }
    (best, best_rot)
}

/// Hyperbolic length spectrum over cyclically reduced words of length at
/// most `maxlen`, as a sorted list of at most `max_entries` classes.
///
/// Words are first merged over cyclic rotation, which is exact. Classes are
/// then merged when the quantized trace and the homology vector both agree;
/// words conjugate through the relation always merge this way, while an
/// accidental coincidence of both invariants would be counted once. Inverse
/// classes stay separate and show up with mirrored homology.
pub fn length_spectrum(
    lat: &LatticeRep,
    maxlen: usize,
    max_entries: usize,
) -> Result<Vec<SpectrumEntry>> {
    if maxlen == 0 || maxlen > 10 {
        return Err(Error::InvalidInput(format!(
            "spectrum depth {maxlen} is outside 1..=10"
        )));
    }
    if max_entries == 0 {
        return Err(Error::InvalidInput("max_entries must be positive".into()));
    }
    let classes: HashMap<u64, CyclicClass> = scan_reduced_words(
        lat,
        maxlen,
        HashMap::new,
        |acc: &mut HashMap<u64, CyclicClass>, w| {
            let n = w.letters.len();
            if n >= 2 && w.letters[0] == -w.letters[n - 1] {
                return;
            }
            let t = w.matrix.trace();
            if t.abs() <= 2.0 + tol::PARABOLIC_BAND {
                return;
            }
            let (key, rot) = canonical_cyclic(w.letters);
            acc.entry(key).or_insert_with(|| {
                let mut witness = Vec::with_capacity(n);
                witness.extend_from_slice(&w.letters[rot..]);
                witness.extend_from_slice(&w.letters[..rot]);
                CyclicClass {
                    trace: t,
                    homology: *w.homology,
                    witness,
                }
            });
        },
        |mut a, b| {
            for (k, v) in b {
                a.entry(k).or_insert(v);
            }
            a
        },
    );
    // Group cyclic classes by quantized trace and homology.
    let mut groups: std::collections::BTreeMap<(i64, [i64; 4]), (f64, usize, Vec<i8>)> =
        std::collections::BTreeMap::new();
    let mut ordered: Vec<(u64, CyclicClass)> = classes.into_iter().collect();
    ordered.sort_by_key(|(k, _)| *k);
    for (_, c) in ordered {
        let q = (c.trace / tol::TRACE_HASH_QUANTUM).round() as i64;
        groups
            .entry((q, c.homology))
            .and_modify(|(_, mult, witness)| {
                *mult += 1;
                let better = c.witness.len() < witness.len()
                    || (c.witness.len() == witness.len() && c.witness < *witness);
                if better {
                    *witness = c.witness.clone();
                }
            })
            .or_insert((c.trace, 1, c.witness.clone()));
    }
    let mut out: Vec<SpectrumEntry> = groups
        .into_iter()
        .map(|((_, homology), (trace, multiplicity, witness))| SpectrumEntry {
            length: translation_length_of_trace(trace),
            trace,
            homology,
            multiplicity,
            witness: GroupWord(witness),
        })
        .collect();
    out.sort_by(|a, b| {
        a.length
            .partial_cmp(&b.length)
            .unwrap()
            .then(a.homology.cmp(&b.homology))
            .then(a.witness.letters().cmp(b.witness.letters()))
    });
    out.truncate(max_entries);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn octagon() -> LatticeRep {
        LatticeRep::octagon().expect("octagon construction succeeds")
    }

    #[test]
    fn construction_finds_the_alternating_relation() {
        let lat = octagon();
        assert_eq!(lat.relator().to_string(), "aBcDAbCd");
        assert_eq!(lat.convention(), "octagon-r8/aBcDAbCd");
        assert!(lat.relator_gap < 1e-12, "gap {}", lat.relator_gap);
        assert_eq!(lat.relator_power, 2);
    }

    #[test]
    fn generator_traces_and_lengths_match_the_octagon() {
        let lat = octagon();
        let expect_trace = 2.0 + 2.0 * SQRT_2;
        for g in lat.generators() {
            assert!((g.matrix().trace() - expect_trace).abs() < 1e-12);
            assert!((g.translation_length() - 3.0571418389619964).abs() < 1e-12);
        }
        assert!((lat.base_length() - 3.0571418389619964).abs() < 1e-12);
    }

    #[test]
    fn relation_rotations_and_inverse_close() {
        let lat = octagon();
        let audit = audit_lattice(&lat, 2).unwrap();
        assert_eq!(audit.rotation_closures, 8);
        assert_eq!(audit.inverse_relator_power, -2);
        assert_eq!(audit.closing_candidates, 1);
        assert_eq!(audit.candidate_count, 6);
    }

    #[test]
    fn word_parsing_round_trips() {
        for s in ["e", "a", "aBcDAbCd", "ddDD", "cA"] {
            assert_eq!(GroupWord::parse(s).unwrap().to_string(), s);
        }
        assert!(GroupWord::parse("xyz").is_err());
        assert_eq!(GroupWord::parse("ddDD").unwrap().freely_reduced().len(), 0);
    }

    #[test]
    fn homology_counts_exponents() {
        let w = GroupWord::parse("aBcDAbCd").unwrap();
        assert_eq!(w.homology(), [0, 0, 0, 0]);
        let v = GroupWord::parse("aaBc").unwrap();
        assert_eq!(v.homology(), [2, -1, 1, 0]);
    }

    #[test]
    fn cyclic_reduction_strips_conjugation() {
        let w = GroupWord::parse("aBcCbA").unwrap();
        assert_eq!(w.cyclically_reduced().to_string(), "e");
        let v = GroupWord::parse("abA").unwrap();
        assert_eq!(v.cyclically_reduced().to_string(), "b");
    }

    #[test]
    fn scan_visits_every_reduced_word_once() {
        let lat = octagon();
        let count = scan_reduced_words(
            &lat,
            4,
            || 0u64,
            |acc, _| *acc += 1,
            |a, b| a + b,
        );
        // 8 + 8*7 + 8*49 + 8*343
        assert_eq!(count, 3200);
    }

    #[test]
    fn audit_sees_a_discrete_torsion_free_picture() {
        let lat = octagon();
        let audit = audit_lattice(&lat, 4).unwrap();
        assert_eq!(audit.parabolic_count, 0);
        assert_eq!(audit.elliptic_count, 0);
        assert!(audit.min_center_gap > 2.0, "gap {}", audit.min_center_gap);
        assert!((audit.systole - 3.0571418389619964).abs() < 1e-9);
        assert!(audit.max_det_drift < 1e-9);
    }

    #[test]
    fn cyclic_rotations_share_translation_length() {
        let lat = octagon();
        let w = GroupWord::parse("abcd").unwrap();
        let base = lat.eval(&w).unwrap().translation_length();
        for r in 1..4 {
            let rot = lat.eval(&w.rotated(r)).unwrap().translation_length();
            assert!((rot - base).abs() < 1e-12, "rotation {r}: {rot} vs {base}");
        }
        assert!(base > 9.0 && base < 11.0, "length {base}");
    }

    #[test]
    fn spectrum_starts_at_the_systole_and_is_sorted() {
        let lat = octagon();
        let spec = length_spectrum(&lat, 4, 200).unwrap();
        assert!(!spec.is_empty());
        assert!((spec[0].length - 3.0571418389619964).abs() < 1e-9);
        for pair in spec.windows(2) {
            assert!(pair[0].length <= pair[1].length + 1e-12);
        }
        // This surface carries twelve unoriented systolic geodesics, which
        // appear here as twenty four oriented classes.
        let systolic = spec
            .iter()
            .filter(|e| (e.length - spec[0].length).abs() < 1e-9)
            .count();
        assert_eq!(systolic, 24);
        for e in &spec {
            assert!(e.multiplicity >= 1);
            assert!(e.witness.len() <= 4);
        }
    }

    #[test]
    fn spectrum_rejects_silly_depths() {
        let lat = octagon();
        assert!(length_spectrum(&lat, 0, 10).is_err());
        assert!(length_spectrum(&lat, 11, 10).is_err());
    }
}
