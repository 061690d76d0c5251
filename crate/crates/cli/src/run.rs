//! Executes one resolved command against the core library and shapes the
//! result for the output envelope.

use crate::config::{OutFormat, Resolver};
use crate::csvout;
use anoslab_core::cohomology::{delta_slice, gamma_a_audit, period_shift, DeltaTable};
use anoslab_core::cover::{commutator_growth, sample, translation_length_of_trace};
use anoslab_core::lattice::{
    audit_lattice, length_spectrum, scan_reduced_words, GroupWord, LatticeRep,
};
use anoslab_core::margulis::{
    holonomy_rn_check, linearize, mme_cdf, regularity_diagnostic, scaling_check, ExpandingMap,
};
use anoslab_core::suspension::{
    averaging_smoother, delta_bar_chain, entropy_suspension, fixed_points, flow_orbits,
    livschitz_solve, orbit_rates, pressure_base, solvable_volume_audit, srb_identity_check,
    CocycleSpec, RoofFunction, SuspensionFlow, ToralAuto, TrigPoly,
};
use anoslab_core::{tol, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, to_value, Value};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Outcome of a command, before envelope assembly.
pub struct CmdOut {
    pub result: Value,
    pub seed: Option<u64>,
    /// Relator convention stamp, set by every command that touches the
    /// surface lattice.
    pub convention: Option<&'static str>,
    /// Converged-with-reservations: drives exit status 3 with the result
    /// still emitted.
    pub nonconverged: bool,
    /// Rendered CSV payload, present when the caller asked for one.
    pub csv: Option<String>,
}

impl CmdOut {
    fn new(result: Value) -> CmdOut {
        CmdOut {
            result,
            seed: None,
            convention: None,
            nonconverged: false,
            csv: None,
        }
    }
}

/// Commands that write a CSV payload when format=csv is selected.
const CSV_COMMANDS: [&str; 4] = ["spectrum", "delta-slice", "fixed-points", "mme-cdf"];

pub fn execute(name: &str, r: &mut Resolver) -> Result<CmdOut> {
    let want_csv = r.output.format == OutFormat::Csv;
    if want_csv && !CSV_COMMANDS.contains(&name) {
        return Err(invalid(format!(
            "command {name} has no CSV payload; it serves {}",
            CSV_COMMANDS.join(", ")
        )));
    }
    match name {
        "length" => length_cmd(r),
        "classify" => classify_cmd(r),
        "commutator-limit" => commutator_limit_cmd(r),
        "spectrum" => spectrum_cmd(r, want_csv),
        "audit-lattice" => audit_lattice_cmd(r),
        "delta-sup" => delta_sup_cmd(r),
        "delta-slice" => delta_slice_cmd(r, want_csv),
        "gamma-a-audit" => gamma_a_audit_cmd(r),
        "period-shift" => period_shift_cmd(r),
        "fixed-points" => fixed_points_cmd(r, want_csv),
        "pressure" => pressure_cmd(r),
        "entropy" => entropy_cmd(r),
        "srb-check" => srb_check_cmd(r),
        "livschitz" => livschitz_cmd(r),
        "smoother" => smoother_cmd(r),
        "delta-bar" => delta_bar_cmd(r),
        "solvable-audit" => solvable_audit_cmd(r),
        "mme-cdf" => mme_cdf_cmd(r, want_csv),
        "linearize" => linearize_cmd(r),
        "rn-check" => rn_check_cmd(r),
        "regularity" => regularity_cmd(r),
        other => Err(Error::ConstructionFailed(format!(
            "dispatch table is missing command {other}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Budget helpers
// ---------------------------------------------------------------------------

/// Freely reduced nonempty words of length at most `maxlen`: 8·7^(k-1) each.
fn words_to_depth(maxlen: usize) -> u128 {
    let mut total = 0u128;
    let mut level = 8u128;
    for _ in 0..maxlen {
        total += level;
        level *= 7;
    }
    total
}

/// Shrinks a requested scan depth until it fits the word budget.
fn budget_maxlen(r: &mut Resolver, requested: usize) -> Result<usize> {
    let budget = r.budgets.max_words as u128;
    let mut len = requested;
    while len > 0 && words_to_depth(len) > budget {
        len -= 1;
    }
    if len == 0 {
        return Err(Error::ResourceLimit(format!(
            "word budget {} cannot cover even a depth-1 scan of 8 words",
            r.budgets.max_words
        )));
    }
    if len < requested {
        r.clamp(format!(
            "scan depth reduced from {requested} to {len} to fit the word budget of {}",
            r.budgets.max_words
        ));
    }
    Ok(len)
}

/// Exact periodic-point count of one period from the integer trace.
fn points_at(auto: &ToralAuto, n: u32) -> Result<u128> {
    let m = auto.pow(n)?;
    Ok((m[0][0] + m[1][1] - 2).unsigned_abs())
}

/// Shrinks an upper period until the cumulative point count fits the orbit
/// budget; `floor` is the smallest admissible value.
fn budget_periods(r: &mut Resolver, auto: &ToralAuto, requested: u32, floor: u32) -> Result<u32> {
    let budget = r.budgets.max_orbits as u128;
    let mut hi = requested;
    loop {
        let mut total = 0u128;
        for k in 1..=hi {
            total += points_at(auto, k)?;
        }
        if total <= budget {
            break;
        }
        if hi == floor {
            return Err(Error::ResourceLimit(format!(
                "orbit budget {} cannot cover periods up to {floor} ({total} points)",
                r.budgets.max_orbits
            )));
        }
        hi -= 1;
    }
    if hi < requested {
        r.clamp(format!(
            "period bound reduced from {requested} to {hi} to fit the orbit budget of {}",
            r.budgets.max_orbits
        ));
    }
    Ok(hi)
}

// ---------------------------------------------------------------------------
// Shared parameter shapes
// ---------------------------------------------------------------------------

fn toral_auto(r: &mut Resolver) -> Result<ToralAuto> {
    let m = r.mat2("A", [[2, 1], [1, 1]])?;
    ToralAuto::new(m)
}

fn pressure_window(r: &mut Resolver, auto: &ToralAuto) -> Result<(u32, u32)> {
    let n_lo = r.u32_in("n-lo", 4, 4, 14)?;
    let n_hi = r.u32_in("n-hi", 12, 4, 14)?;
    if n_lo + 2 > n_hi {
        return Err(invalid(format!(
            "period window [{n_lo},{n_hi}] must span at least three values"
        )));
    }
    let n_hi = budget_periods(r, auto, n_hi, n_lo + 2)?;
    Ok((n_lo, n_hi))
}

/// Roof from `roof-const` or a `roof` polynomial; constant 1 by default.
fn roof_function(r: &mut Resolver) -> Result<RoofFunction> {
    let c = r.f64_optional("roof-const")?;
    let poly = r.str_optional("roof");
    match (c, poly) {
        (Some(_), Some(_)) => Err(invalid("give either roof-const or roof, not both")),
        (Some(c), None) => RoofFunction::constant(c),
        (None, Some(p)) => RoofFunction::new(TrigPoly::parse(&p)?),
        (None, None) => {
            r.record_value("roof-const", json!(1.0));
            RoofFunction::constant(1.0)
        }
    }
}

fn octagon() -> Result<LatticeRep> {
    LatticeRep::octagon()
}

// ---------------------------------------------------------------------------
// Cover arithmetic commands
// ---------------------------------------------------------------------------

fn length_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let trace = r.f64_required("trace")?;
    let length = translation_length_of_trace(trace);
    Ok(CmdOut::new(json!({
        "trace": trace,
        "length": length,
        "hyperbolic": length > 0.0,
    })))
}

fn classify_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let word = GroupWord::parse(&r.str_required("word")?)?;
    let lat = octagon()?;
    let g = lat.eval(&word)?;
    let mut out = CmdOut::new(json!({
        "word": word.to_string(),
        "homology": word.homology(),
        "trace": g.matrix().trace(),
        "lift_at_zero": g.lift0(),
        "class": to_value(g.classify()).expect("classification serializes"),
        "length": g.translation_length(),
    }));
    out.convention = Some(lat.convention());
    Ok(out)
}

fn commutator_limit_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let seed = r.seed_required("seed")?;
    let n_max = r.u32_in("n-max", 40, 1, 60)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p, q) = sample::commutator_pair(&mut rng, n_max);
    let growth = commutator_growth(&p, &q, n_max)?;
    let mut out = CmdOut::new(to_value(growth).expect("growth table serializes"));
    out.seed = Some(seed);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lattice and seminorm commands
// ---------------------------------------------------------------------------

fn spectrum_cmd(r: &mut Resolver, want_csv: bool) -> Result<CmdOut> {
    let maxlen = r.usize_in("maxlen", 4, 1, 10)?;
    let max_entries = r.usize_in("max-entries", 500, 1, 100_000)?;
    let maxlen = budget_maxlen(r, maxlen)?;
    let lat = octagon()?;
    let entries = length_spectrum(&lat, maxlen, max_entries)?;
    let csv = want_csv.then(|| csvout::spectrum(&entries));
    let mut out = CmdOut::new(json!({
        "maxlen_used": maxlen,
        "count": entries.len(),
        "entries": to_value(&entries).expect("spectrum entries serialize"),
    }));
    out.convention = Some(lat.convention());
    out.csv = csv;
    Ok(out)
}

fn audit_lattice_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let maxlen = r.usize_in("maxlen", 4, 1, 12)?;
    let maxlen = budget_maxlen(r, maxlen)?;
    let lat = octagon()?;
    let audit = audit_lattice(&lat, maxlen)?;
    let mut out = CmdOut::new(to_value(audit).expect("audit serializes"));
    out.convention = Some(lat.convention());
    Ok(out)
}

/// First scan-order word with the given homology whose length matches the
/// table minimum; ties broken toward shorter then lexicographically smaller
/// letter strings, so the witness is reproducible.
fn witness_word(lat: &LatticeRep, maxlen: usize, h: [i64; 4], len: f64) -> Option<GroupWord> {
    let pick = |acc: &mut Option<Vec<i8>>, cand: &[i8]| {
        let better = match acc.as_ref() {
            None => true,
            Some(b) => (cand.len(), cand) < (b.len(), b.as_slice()),
        };
        if better {
            *acc = Some(cand.to_vec());
        }
    };
    let best = scan_reduced_words(
        lat,
        maxlen,
        || None::<Vec<i8>>,
        |acc, w| {
            if w.homology == &h {
                let t = w.matrix.trace();
                if t.abs() > 2.0 + tol::PARABOLIC_BAND
                    && (translation_length_of_trace(t) - len).abs() <= 1e-9
                {
                    pick(acc, w.letters);
                }
            }
        },
        |mut a, b| {
            if let Some(cand) = b {
                pick(&mut a, &cand);
            }
            a
        },
    );
    best.map(|letters| GroupWord::new(letters).expect("scanned letters are in range"))
}

fn delta_sup_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let class = r.vec4("class", None)?;
    let maxlen = r.usize_in("maxlen", 6, 1, 12)?;
    let maxlen = budget_maxlen(r, maxlen)?;
    let lat = octagon()?;
    let table = DeltaTable::build(&lat, maxlen)?;
    let sup = table.seminorm(&class);
    let history: Vec<Value> = table
        .history(&class)
        .iter()
        .enumerate()
        .map(|(i, s)| json!([i + 1, s]))
        .collect();
    // The staged value only ever grows with depth, so exceeding one at any
    // finite depth certifies the class is outside the unit set; staying
    // below one certifies nothing.
    let status = if sup > 1.0 { "certified_out" } else { "inconclusive" };
    let witness = table
        .witness_class(&class, maxlen)
        .map(|(h, len)| (h, len, witness_word(&lat, maxlen, h, len)));
    let (witness_homology, witness_length, witness_text) = match &witness {
        Some((h, len, w)) => (
            json!(h),
            json!(len),
            w.as_ref()
                .map_or(Value::Null, |w| Value::String(w.to_string())),
        ),
        None => (Value::Null, Value::Null, Value::Null),
    };
    let mut out = CmdOut::new(json!({
        "class_vector": class,
        "maxlen": maxlen,
        "sup": sup,
        "status": status,
        "witness_word": witness_text,
        "witness_homology": witness_homology,
        "witness_length": witness_length,
        "history": history,
    }));
    out.convention = Some(lat.convention());
    Ok(out)
}

fn delta_slice_cmd(r: &mut Resolver, want_csv: bool) -> Result<CmdOut> {
    let axes = r.axes("axes", [0, 1])?;
    let radius = r.f64_default("radius", 3.5)?;
    let mut grid = r.usize_in("grid", 41, 2, 501)?;
    let maxlen = r.usize_in("maxlen", 6, 1, 12)?;
    if grid as u64 > r.budgets.grid {
        if r.budgets.grid < 2 {
            return Err(Error::ResourceLimit(format!(
                "grid budget {} cannot hold the minimum 2x2 slice",
                r.budgets.grid
            )));
        }
        let clamped = r.budgets.grid as usize;
        r.clamp(format!(
            "grid side reduced from {grid} to {clamped} to fit the grid budget"
        ));
        grid = clamped;
    }
    let maxlen = budget_maxlen(r, maxlen)?;
    let lat = octagon()?;
    let table = DeltaTable::build(&lat, maxlen)?;
    let slice = delta_slice(&table, axes, radius, grid)?;
    let csv = want_csv.then(|| csvout::slice_grid(&slice.values));
    let mut out = CmdOut::new(to_value(slice).expect("slice serializes"));
    out.convention = Some(lat.convention());
    out.csv = csv;
    Ok(out)
}

fn gamma_a_audit_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let seed = r.seed_required("seed")?;
    let trials = r.u32_in("trials", 1000, 1, 1_000_000)?;
    let maxlen = r.usize_in("maxlen", 5, 1, 12)?;
    let maxlen = budget_maxlen(r, maxlen)?;
    let lat = octagon()?;
    let table = DeltaTable::build(&lat, maxlen)?;
    let audit = gamma_a_audit(&table, seed, trials)?;
    let mut out = CmdOut::new(to_value(audit).expect("audit serializes"));
    out.convention = Some(lat.convention());
    out.seed = Some(seed);
    Ok(out)
}

fn period_shift_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let word = GroupWord::parse(&r.str_required("word")?)?;
    let class = r.vec4("class", None)?;
    let lat = octagon()?;
    let shift = period_shift(&lat, &word, &class)?;
    let mut out = CmdOut::new(to_value(shift).expect("shift serializes"));
    out.convention = Some(lat.convention());
    Ok(out)
}

// ---------------------------------------------------------------------------
// Toral suspension commands
// ---------------------------------------------------------------------------

fn fixed_points_cmd(r: &mut Resolver, want_csv: bool) -> Result<CmdOut> {
    let auto = toral_auto(r)?;
    let n = r.u32_in("n", 8, 1, 24)?;
    let n = budget_periods(r, &auto, n, 1)?;
    let mut counts = Vec::new();
    for k in 1..=n {
        let pts = fixed_points(&auto, k)?;
        let formula = points_at(&auto, k)?;
        debug_assert_eq!(pts.len() as u128, formula);
        counts.push(json!([k, pts.len()]));
    }
    let top = fixed_points(&auto, n)?;
    let include_points = top.len() <= 512;
    let csv = if want_csv {
        let flow = SuspensionFlow::new(auto, RoofFunction::constant(1.0)?);
        Some(csvout::orbits(&flow_orbits(&flow, n)?))
    } else {
        None
    };
    let mut out = CmdOut::new(json!({
        "matrix": auto.entries(),
        "n": n,
        "counts": counts,
        "count_at_n": top.len(),
        "points_included": include_points,
        "points": if include_points { to_value(&top).expect("points serialize") } else { Value::Array(Vec::new()) },
    }));
    out.csv = csv;
    Ok(out)
}

fn pressure_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let auto = toral_auto(r)?;
    let potential = match r.str_optional("potential") {
        Some(p) => TrigPoly::parse(&p)?,
        None => TrigPoly::zero(),
    };
    let (n_lo, n_hi) = pressure_window(r, &auto)?;
    let report = pressure_base(&auto, &potential, n_lo, n_hi)?;
    let mut out = CmdOut::new(to_value(&report).expect("pressure report serializes"));
    out.nonconverged = !report.converged;
    Ok(out)
}

fn entropy_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let auto = toral_auto(r)?;
    let roof = roof_function(r)?;
    let (n_lo, n_hi) = pressure_window(r, &auto)?;
    let roof_info = json!({
        "poly": roof.poly().to_string(),
        "grid_min": roof.grid_min(),
        "certified_min": roof.certified_min(),
    });
    let flow = SuspensionFlow::new(auto, roof);
    let report = entropy_suspension(&flow, n_lo, n_hi)?;
    let mut out = CmdOut::new(json!({
        "roof": roof_info,
        "entropy": to_value(&report).expect("entropy report serializes"),
    }));
    out.nonconverged = !report.converged;
    Ok(out)
}

fn srb_check_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let auto = toral_auto(r)?;
    let (n_lo, n_hi) = pressure_window(r, &auto)?;
    let report = srb_identity_check(&auto, n_lo, n_hi)?;
    let ok = report.partition_sum_ok && report.unstable_pressure_ok && report.cases_ok;
    let mut out = CmdOut::new(to_value(&report).expect("srb report serializes"));
    out.nonconverged = !ok;
    Ok(out)
}

fn livschitz_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let auto = toral_auto(r)?;
    let beta = TrigPoly::parse(&r.str_required("beta")?)?;
    let perturb = r.f64_default("perturb", 0.0)?;
    let n_max = r.u32_in("n-max", 9, 1, 12)?;
    let n_max = budget_periods(r, &auto, n_max, 1)?;
    let mut f = TrigPoly::coboundary(&auto, &beta);
    if perturb != 0.0 {
        f = f.plus_constant(perturb);
    }
    match livschitz_solve(&auto, &f, n_max) {
        Ok(rep) => Ok(CmdOut::new(json!({
            "obstructed": false,
            "orbit_count": rep.orbit_count,
            "point_count": rep.point_count,
            "max_orbit_sum": rep.max_orbit_sum,
            "holder_exponent": rep.holder_exponent,
            "holder_pair_count": rep.holder_pair_count,
            "cross_orbit_spread": rep.cross_orbit_spread,
        }))),
        Err(Error::HypothesisViolated { max_violation }) => {
            let mut out = CmdOut::new(json!({
                "obstructed": true,
                "max_violation": max_violation,
            }));
            out.nonconverged = true;
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

fn smoother_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let auto = toral_auto(r)?;
    let roof = roof_function(r)?;
    let beta = r.str_optional("beta");
    let rate = r.f64_optional("planted-rate")?;
    let amp = r.f64_optional("planted-amp")?;
    let spec = match (beta, rate, amp) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(invalid(
                "give either a generator beta or the planted rate/amplitude pair, not both",
            ))
        }
        (Some(poly), None, None) => CocycleSpec::Generator(TrigPoly::parse(&poly)?),
        (None, rate, amp) => {
            let rate = rate.unwrap_or(0.5);
            let amp = amp.unwrap_or(0.02);
            r.record_value("planted-rate", json!(rate));
            r.record_value("planted-amp", json!(amp));
            CocycleSpec::PlantedLinear {
                rate,
                amplitude: amp,
            }
        }
    };
    let samples = r.usize_in("samples", 1000, 1, 1_000_000)?;
    let seed = r.seed_required("seed")?;
    let factor = r.f64_default("lambda-prime-factor", 0.9)?;
    let flow = SuspensionFlow::new(auto, roof);
    let min_rate = orbit_rates(&flow, &spec)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let lambda_prime = match r.f64_optional("lambda-prime")? {
        Some(l) => l,
        None => factor * min_rate,
    };
    r.record_value("lambda-prime", json!(lambda_prime));
    match averaging_smoother(&flow, &spec, lambda_prime, samples, seed) {
        Ok(rep) => {
            let mut out = CmdOut::new(json!({
                "rejected": false,
                "spec": to_value(&spec).expect("cocycle spec serializes"),
                "report": to_value(&rep).expect("smoother report serializes"),
            }));
            out.seed = Some(seed);
            Ok(out)
        }
        Err(Error::HypothesisViolated { max_violation }) => {
            let mut out = CmdOut::new(json!({
                "rejected": true,
                "max_violation": max_violation,
                "lambda_prime": lambda_prime,
                "min_orbit_rate": min_rate,
            }));
            out.seed = Some(seed);
            out.nonconverged = true;
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

fn delta_bar_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let auto = toral_auto(r)?;
    let roof = roof_function(r)?;
    let shift = r.f64_default("shift", 0.25)?;
    let (n_lo, n_hi) = pressure_window(r, &auto)?;
    let flow = SuspensionFlow::new(auto, roof);
    let report = delta_bar_chain(&flow, shift, n_lo, n_hi)?;
    Ok(CmdOut::new(to_value(report).expect("chain serializes")))
}

fn solvable_audit_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let auto = toral_auto(r)?;
    let roof = roof_function(r)?;
    let omega = r.f64_default("omega", 1.0)?;
    let delta = r.f64_default("delta", 0.35)?;
    let lambda = r.f64_default("lambda", 0.8)?;
    let lambda_s = r.f64_default("lambda-s", 0.45)?;
    let (lo, hi) = r.pair_f64("window", (-2.0, 2.0))?;
    let flow = SuspensionFlow::new(auto, roof);
    let report = solvable_volume_audit(&flow, omega, (delta, lambda, lambda_s), lo, hi)?;
    Ok(CmdOut::new(to_value(report).expect("audit serializes")))
}

// ---------------------------------------------------------------------------
// Leaf-measure commands
// ---------------------------------------------------------------------------

fn expanding_map(r: &mut Resolver) -> Result<(ExpandingMap, u32, u32)> {
    let degree = r.u32_in("degree", 2, 2, 16)?;
    let eps = r.f64_default("eps", 0.3)?;
    let depth = r.u32_in("depth", 16, 4, 24)?;
    let resolution = r.u32_in("resolution", 16, 4, 24)?;
    Ok((ExpandingMap::new(degree, eps)?, depth, resolution))
}

fn mme_cdf_cmd(r: &mut Resolver, want_csv: bool) -> Result<CmdOut> {
    let (map, depth, resolution) = expanding_map(r)?;
    let intervals = r.usize_in("intervals", 1000, 1, 100_000)?;
    let seed = r.seed_required("seed")?;
    let report = mme_cdf(&map, depth, resolution)?;
    let scaling = scaling_check(&map, &report.cdf, intervals, seed)?;
    let csv = want_csv.then(|| csvout::cdf(report.cdf.knots()));
    let mut out = CmdOut::new(json!({
        "mme": to_value(&report).expect("cdf report serializes"),
        "identity_distance": report.cdf.identity_distance(),
        "scaling": to_value(&scaling).expect("scaling report serializes"),
    }));
    out.seed = Some(seed);
    out.nonconverged = !scaling.ok;
    out.csv = csv;
    Ok(out)
}

fn linearize_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let (map, depth, resolution) = expanding_map(r)?;
    let report = mme_cdf(&map, depth, resolution)?;
    let lin = linearize(&map, &report.cdf)?;
    let second = mme_cdf(&lin.map, depth, resolution)?;
    let idempotence_ok = second.identity_deviation <= tol::IDEMPOTENCE_SUP;
    let ok = lin.derivative_ok && idempotence_ok;
    let mut out = CmdOut::new(json!({
        "linearize": to_value(&lin).expect("linearize report serializes"),
        "idempotence_deviation": second.identity_deviation,
        "idempotence_ok": idempotence_ok,
    }));
    out.nonconverged = !ok;
    Ok(out)
}

fn rn_check_cmd(r: &mut Resolver) -> Result<CmdOut> {
    // The holonomy residual gate needs the full megaknot resolution, so this
    // command defaults deeper than the other leaf-measure commands.
    let degree = r.u32_in("degree", 2, 2, 16)?;
    let eps = r.f64_default("eps", 0.3)?;
    let depth = r.u32_in("depth", 20, 4, 24)?;
    let resolution = r.u32_in("resolution", 20, 4, 24)?;
    let map = ExpandingMap::new(degree, eps)?;
    let roof = r.f64_default("roof", 1.0)?;
    let samples = r.usize_in("samples", 400, 1, 100_000)?;
    let seed = r.seed_required("seed")?;
    let cdf = mme_cdf(&map, depth, resolution)?.cdf;
    let report = holonomy_rn_check(&map, &cdf, roof, samples, seed)?;
    let mut out = CmdOut::new(to_value(&report).expect("holonomy report serializes"));
    out.seed = Some(seed);
    out.nonconverged = !report.ok;
    Ok(out)
}

fn regularity_cmd(r: &mut Resolver) -> Result<CmdOut> {
    let (map, depth, resolution) = expanding_map(r)?;
    let cdf = mme_cdf(&map, depth, resolution)?.cdf;
    let report = regularity_diagnostic(&cdf);
    Ok(CmdOut::new(json!({
        "regularity": to_value(&report).expect("regularity report serializes"),
        "identity_distance": cdf.identity_distance(),
    })))
}
