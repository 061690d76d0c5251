//! CSV payload rendering for the commands that export tables.
//!
//! Numbers are written with Rust's shortest-roundtrip formatting, so payloads
//! are bitwise reproducible across runs and thread counts.

use anoslab_core::lattice::SpectrumEntry;
use anoslab_core::suspension::FlowOrbit;
use std::fmt::Write;

/// Letters as signed generator indices joined by dots, e.g. `1.-2.3`.
fn word_indices(letters: &[i8]) -> String {
    letters
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

/// `word,length,h1,h2,h3,h4,tau,Ju,Js`: one row per spectrum class. The flow
/// period of a closed geodesic equals its length and the stable/unstable
/// log-Jacobians over one period are ±length.
pub fn spectrum(entries: &[SpectrumEntry]) -> String {
    let mut out = String::from("word,length,h1,h2,h3,h4,tau,Ju,Js\n");
    for e in entries {
        let h = e.homology;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            word_indices(e.witness.letters()),
            e.length,
            h[0],
            h[1],
            h[2],
            h[3],
            e.length,
            e.length,
            -e.length
        )
        .expect("string writes cannot fail");
    }
    out
}

/// Bare value matrix, row major, no header: row i column j holds the
/// seminorm at grid node (i, j).
pub fn slice_grid(values: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in values {
        let line = row
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// `n,x_num,x_den,y_num,y_den,tau,Ju,Js,homology`: one row per periodic
/// orbit, identified by its exact rational starting point.
pub fn orbits(list: &[FlowOrbit]) -> String {
    let mut out = String::from("n,x_num,x_den,y_num,y_den,tau,Ju,Js,homology\n");
    for o in list {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            o.n,
            o.x[0].numer(),
            o.x[0].denom(),
            o.x[1].numer(),
            o.x[1].denom(),
            o.tau,
            o.ju,
            o.js,
            o.homology
        )
        .expect("string writes cannot fail");
    }
    out
}

/// `y,F` rows: the quantile knots against their dyadic cumulative masses.
pub fn cdf(knots: &[f64]) -> String {
    let n = knots.len() - 1;
    let mut out = String::from("y,F\n");
    for (i, y) in knots.iter().enumerate() {
        writeln!(out, "{},{}", y, i as f64 / n as f64).expect("string writes cannot fail");
    }
    out
}
