//! Command-line surface: one subcommand per operation, every value-bearing
//! flag optional at parse time so a key=value config file can fill gaps.
//! All values arrive as strings and are parsed by the resolver, which gives
//! file-supplied and flag-supplied parameters one shared code path.

use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;

#[derive(Parser)]
#[command(
    name = "anoslab",
    version,
    about = "Numerical laboratory for surface lattices over PSL(2,R) and suspension flows",
    after_help = "Every run prints a JSON envelope on stdout. Set ANOSLAB_THREADS to pin the \
worker-pool size; results are bitwise independent of it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand: config file, output routing, budgets.
#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Plain-text key=value config file; command-line flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<String>,

    /// Output format: "json" (envelope only) or "csv" (envelope plus a CSV
    /// payload file for commands that define one).
    #[arg(long, value_name = "FMT")]
    pub format: Option<String>,

    /// Destination file: the CSV payload for format=csv, or a copy of the
    /// JSON envelope for format=json.
    #[arg(long, value_name = "FILE")]
    pub path: Option<String>,

    /// Budget: total words a lattice scan may visit.
    #[arg(long, value_name = "N")]
    pub max_words: Option<String>,

    /// Budget: total periodic points an orbit enumeration may touch.
    #[arg(long, value_name = "N")]
    pub max_orbits: Option<String>,

    /// Budget: largest allowed grid side length.
    #[arg(long, value_name = "N")]
    pub max_grid: Option<String>,

    /// Budget: soft wall-clock limit in seconds, checked after the run.
    #[arg(long, value_name = "S")]
    pub time_limit_s: Option<String>,
}

impl CommonArgs {
    fn collect(&self, map: &mut BTreeMap<String, String>) {
        put(map, "format", &self.format);
        put(map, "path", &self.path);
        put(map, "max-words", &self.max_words);
        put(map, "max-orbits", &self.max_orbits);
        put(map, "max-grid", &self.max_grid);
        put(map, "time-limit-s", &self.time_limit_s);
    }
}

fn put(map: &mut BTreeMap<String, String>, key: &str, v: &Option<String>) {
    if let Some(v) = v {
        map.insert(key.to_string(), v.clone());
    }
}

#[derive(Subcommand)]
pub enum Command {
    /// Translation length from an absolute trace.
    Length {
        /// Trace value; lengths are 2*arccosh(|trace|/2) beyond the band at 2.
        #[arg(long, value_name = "T")]
        trace: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate a word in the octagon lattice and classify the element.
    Classify {
        /// Word over a..d with A..D as inverses, or "e".
        #[arg(long, value_name = "WORD")]
        word: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Growth of commutator lengths [P^n, Q] for one seeded random pair.
    CommutatorLimit {
        #[arg(long, value_name = "SEED")]
        seed: Option<String>,
        /// Largest commutator power tabulated.
        #[arg(long, value_name = "N")]
        n_max: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Bottom of the length spectrum of the octagon lattice.
    Spectrum {
        #[arg(long, value_name = "N")]
        maxlen: Option<String>,
        /// Keep at most this many spectrum entries.
        #[arg(long, value_name = "N")]
        max_entries: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Scan-based discreteness and relator audit of the octagon lattice.
    AuditLattice {
        #[arg(long, value_name = "N")]
        maxlen: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Moduli seminorm of one cohomology class, with certification status.
    DeltaSup {
        /// Pairing vector, four comma-separated reals.
        #[arg(long, value_name = "A1,A2,A3,A4")]
        class: Option<String>,
        #[arg(long, value_name = "N")]
        maxlen: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Seminorm values over a centered grid in a coordinate plane.
    DeltaSlice {
        /// Two distinct coordinate axes, e.g. "0,1".
        #[arg(long, value_name = "I,J")]
        axes: Option<String>,
        #[arg(long, value_name = "R")]
        radius: Option<String>,
        /// Grid side length (odd keeps the origin on a node).
        #[arg(long, value_name = "N")]
        grid: Option<String>,
        #[arg(long, value_name = "N")]
        maxlen: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Randomized audit of the seminorm laws on seeded pairing vectors.
    GammaAAudit {
        #[arg(long, value_name = "SEED")]
        seed: Option<String>,
        #[arg(long, value_name = "N")]
        trials: Option<String>,
        #[arg(long, value_name = "N")]
        maxlen: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Twisted period of one hyperbolic word under a pairing vector.
    PeriodShift {
        #[arg(long, value_name = "WORD")]
        word: Option<String>,
        #[arg(long, value_name = "A1,A2,A3,A4")]
        class: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Periodic points of a hyperbolic toral automorphism.
    FixedPoints {
        /// Integer matrix rows "a,b,c,d" for [[a,b],[c,d]], det 1, |tr| > 2.
        #[arg(long = "A", value_name = "A,B,C,D")]
        matrix: Option<String>,
        /// Period to enumerate up to.
        #[arg(long, value_name = "N")]
        n: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Periodic-orbit pressure of a trigonometric potential over the base map.
    Pressure {
        #[arg(long = "A", value_name = "A,B,C,D")]
        matrix: Option<String>,
        /// Potential, e.g. "const:0.1;cos:1,0:0.05;sin:2,-1:0.02"; omit for zero.
        #[arg(long, value_name = "POLY")]
        potential: Option<String>,
        #[arg(long, value_name = "N")]
        n_lo: Option<String>,
        #[arg(long, value_name = "N")]
        n_hi: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Entropy of the suspension flow via its Bowen root.
    Entropy {
        #[arg(long = "A", value_name = "A,B,C,D")]
        matrix: Option<String>,
        /// Constant roof value; mutually exclusive with --roof.
        #[arg(long, value_name = "C", conflicts_with = "roof")]
        roof_const: Option<String>,
        /// Trigonometric roof, e.g. "const:1.0;cos:1,0:0.05".
        #[arg(long, value_name = "POLY")]
        roof: Option<String>,
        #[arg(long, value_name = "N")]
        n_lo: Option<String>,
        #[arg(long, value_name = "N")]
        n_hi: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Partition-sum, pressure, and constant-roof entropy identities for the
    /// unstable Jacobian.
    SrbCheck {
        #[arg(long = "A", value_name = "A,B,C,D")]
        matrix: Option<String>,
        #[arg(long, value_name = "N")]
        n_lo: Option<String>,
        #[arg(long, value_name = "N")]
        n_hi: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Plant a coboundary, optionally perturb it, and solve for the transfer
    /// function on periodic orbits.
    Livschitz {
        #[arg(long = "A", value_name = "A,B,C,D")]
        matrix: Option<String>,
        /// Transfer polynomial whose coboundary is planted.
        #[arg(long, value_name = "POLY")]
        beta: Option<String>,
        /// Constant added to the planted cocycle; nonzero must be rejected.
        #[arg(long, value_name = "C")]
        perturb: Option<String>,
        #[arg(long, value_name = "N")]
        n_max: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Averaging smoother for a flow cocycle above a planted contraction rate.
    Smoother {
        #[arg(long = "A", value_name = "A,B,C,D")]
        matrix: Option<String>,
        #[arg(long, value_name = "C", conflicts_with = "roof")]
        roof_const: Option<String>,
        #[arg(long, value_name = "POLY")]
        roof: Option<String>,
        /// Generator polynomial of the cocycle; mutually exclusive with the
        /// planted pair.
        #[arg(long, value_name = "POLY", conflicts_with_all = ["planted_rate", "planted_amp"])]
        beta: Option<String>,
        #[arg(long, value_name = "RATE")]
        planted_rate: Option<String>,
        #[arg(long, value_name = "AMP")]
        planted_amp: Option<String>,
        /// Explicit smoothing rate; overrides the factor.
        #[arg(long, value_name = "L")]
        lambda_prime: Option<String>,
        /// Smoothing rate as a fraction of the least orbit rate.
        #[arg(long, value_name = "F")]
        lambda_prime_factor: Option<String>,
        #[arg(long, value_name = "N")]
        samples: Option<String>,
        #[arg(long, value_name = "SEED")]
        seed: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Time-change bookkeeping: shifted-roof entropy, delta-bar, and the
    /// exact period relation.
    DeltaBar {
        #[arg(long = "A", value_name = "A,B,C,D")]
        matrix: Option<String>,
        #[arg(long, value_name = "C", conflicts_with = "roof")]
        roof_const: Option<String>,
        #[arg(long, value_name = "POLY")]
        roof: Option<String>,
        /// Constant added to the roof before the entropy measurement.
        #[arg(long, value_name = "A")]
        shift: Option<String>,
        #[arg(long, value_name = "N")]
        n_lo: Option<String>,
        #[arg(long, value_name = "N")]
        n_hi: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Drift-rate closed form and the volume-integral root audit.
    SolvableAudit {
        #[arg(long = "A", value_name = "A,B,C,D")]
        matrix: Option<String>,
        #[arg(long, value_name = "C", conflicts_with = "roof")]
        roof_const: Option<String>,
        #[arg(long, value_name = "POLY")]
        roof: Option<String>,
        /// Fiber density scale.
        #[arg(long, value_name = "W")]
        omega: Option<String>,
        #[arg(long, value_name = "D")]
        delta: Option<String>,
        #[arg(long, value_name = "L")]
        lambda: Option<String>,
        #[arg(long, value_name = "LS")]
        lambda_s: Option<String>,
        /// Rate window "lo,hi" straddling zero for the root search.
        #[arg(long, value_name = "LO,HI")]
        window: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Maximal-entropy CDF of an expanding circle map plus its scaling audit.
    MmeCdf {
        #[arg(long, value_name = "D")]
        degree: Option<String>,
        #[arg(long, value_name = "E")]
        eps: Option<String>,
        /// Preimage-tree depth.
        #[arg(long, value_name = "K")]
        depth: Option<String>,
        /// Quantile grid exponent m; the CDF keeps 2^m + 1 knots.
        #[arg(long, value_name = "M")]
        resolution: Option<String>,
        /// Random intervals for the scaling audit.
        #[arg(long, value_name = "N")]
        intervals: Option<String>,
        #[arg(long, value_name = "SEED")]
        seed: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Conjugate the map by its leaf-measure CDF and test linearity and
    /// idempotence.
    Linearize {
        #[arg(long, value_name = "D")]
        degree: Option<String>,
        #[arg(long, value_name = "E")]
        eps: Option<String>,
        #[arg(long, value_name = "K")]
        depth: Option<String>,
        #[arg(long, value_name = "M")]
        resolution: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Radon-Nikodym holonomy scaling of leaf masses along the suspension.
    RnCheck {
        #[arg(long, value_name = "D")]
        degree: Option<String>,
        #[arg(long, value_name = "E")]
        eps: Option<String>,
        #[arg(long, value_name = "K")]
        depth: Option<String>,
        #[arg(long, value_name = "M")]
        resolution: Option<String>,
        /// Constant roof of the suspension.
        #[arg(long, value_name = "C")]
        roof: Option<String>,
        #[arg(long, value_name = "N")]
        samples: Option<String>,
        #[arg(long, value_name = "SEED")]
        seed: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Scaling exponent of CDF increments over dyadic step sizes.
    Regularity {
        #[arg(long, value_name = "D")]
        degree: Option<String>,
        #[arg(long, value_name = "E")]
        eps: Option<String>,
        #[arg(long, value_name = "K")]
        depth: Option<String>,
        #[arg(long, value_name = "M")]
        resolution: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl Command {
    /// Canonical command name, echoed in the envelope.
    pub fn name(&self) -> &'static str {
        match self {
            Command::Length { .. } => "length",
            Command::Classify { .. } => "classify",
            Command::CommutatorLimit { .. } => "commutator-limit",
            Command::Spectrum { .. } => "spectrum",
            Command::AuditLattice { .. } => "audit-lattice",
            Command::DeltaSup { .. } => "delta-sup",
            Command::DeltaSlice { .. } => "delta-slice",
            Command::GammaAAudit { .. } => "gamma-a-audit",
            Command::PeriodShift { .. } => "period-shift",
            Command::FixedPoints { .. } => "fixed-points",
            Command::Pressure { .. } => "pressure",
            Command::Entropy { .. } => "entropy",
            Command::SrbCheck { .. } => "srb-check",
            Command::Livschitz { .. } => "livschitz",
            Command::Smoother { .. } => "smoother",
            Command::DeltaBar { .. } => "delta-bar",
            Command::SolvableAudit { .. } => "solvable-audit",
            Command::MmeCdf { .. } => "mme-cdf",
            Command::Linearize { .. } => "linearize",
            Command::RnCheck { .. } => "rn-check",
            Command::Regularity { .. } => "regularity",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Length { common, .. }
            | Command::Classify { common, .. }
            | Command::CommutatorLimit { common, .. }
            | Command::Spectrum { common, .. }
            | Command::AuditLattice { common, .. }
            | Command::DeltaSup { common, .. }
            | Command::DeltaSlice { common, .. }
            | Command::GammaAAudit { common, .. }
            | Command::PeriodShift { common, .. }
            | Command::FixedPoints { common, .. }
            | Command::Pressure { common, .. }
            | Command::Entropy { common, .. }
            | Command::SrbCheck { common, .. }
            | Command::Livschitz { common, .. }
            | Command::Smoother { common, .. }
            | Command::DeltaBar { common, .. }
            | Command::SolvableAudit { common, .. }
            | Command::MmeCdf { common, .. }
            | Command::Linearize { common, .. }
            | Command::RnCheck { common, .. }
            | Command::Regularity { common, .. } => common,
        }
    }

    /// Flag values as a key map, using the config-file key spelling.
    pub fn collect(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        self.common().collect(&mut map);
        match self {
            Command::Length { trace, .. } => {
                put(&mut map, "trace", trace);
            }
            Command::Classify { word, .. } => {
                put(&mut map, "word", word);
            }
            Command::CommutatorLimit { seed, n_max, .. } => {
                put(&mut map, "seed", seed);
                put(&mut map, "n-max", n_max);
            }
            Command::Spectrum {
                maxlen,
                max_entries,
                ..
            } => {
                put(&mut map, "maxlen", maxlen);
                put(&mut map, "max-entries", max_entries);
            }
            Command::AuditLattice { maxlen, .. } => {
                put(&mut map, "maxlen", maxlen);
            }
            Command::DeltaSup { class, maxlen, .. } => {
                put(&mut map, "class", class);
                put(&mut map, "maxlen", maxlen);
            }
            Command::DeltaSlice {
                axes,
                radius,
                grid,
                maxlen,
                ..
            } => {
                put(&mut map, "axes", axes);
                put(&mut map, "radius", radius);
                put(&mut map, "grid", grid);
                put(&mut map, "maxlen", maxlen);
            }
            Command::GammaAAudit {
                seed,
                trials,
                maxlen,
                ..
            } => {
                put(&mut map, "seed", seed);
                put(&mut map, "trials", trials);
                put(&mut map, "maxlen", maxlen);
            }
            Command::PeriodShift { word, class, .. } => {
                put(&mut map, "word", word);
                put(&mut map, "class", class);
            }
            Command::FixedPoints { matrix, n, .. } => {
                put(&mut map, "A", matrix);
                put(&mut map, "n", n);
            }
            Command::Pressure {
                matrix,
                potential,
                n_lo,
                n_hi,
                ..
            } => {
                put(&mut map, "A", matrix);
                put(&mut map, "potential", potential);
                put(&mut map, "n-lo", n_lo);
                put(&mut map, "n-hi", n_hi);
            }
            Command::Entropy {
                matrix,
                roof_const,
                roof,
                n_lo,
                n_hi,
                ..
            } => {
                put(&mut map, "A", matrix);
                put(&mut map, "roof-const", roof_const);
                put(&mut map, "roof", roof);
                put(&mut map, "n-lo", n_lo);
                put(&mut map, "n-hi", n_hi);
            }
            Command::SrbCheck {
                matrix, n_lo, n_hi, ..
            } => {
                put(&mut map, "A", matrix);
                put(&mut map, "n-lo", n_lo);
                put(&mut map, "n-hi", n_hi);
            }
            Command::Livschitz {
                matrix,
                beta,
                perturb,
                n_max,
                ..
            } => {
                put(&mut map, "A", matrix);
                put(&mut map, "beta", beta);
                put(&mut map, "perturb", perturb);
                put(&mut map, "n-max", n_max);
            }
            Command::Smoother {
                matrix,
                roof_const,
                roof,
                beta,
                planted_rate,
                planted_amp,
                lambda_prime,
                lambda_prime_factor,
                samples,
                seed,
                ..
            } => {
                put(&mut map, "A", matrix);
                put(&mut map, "roof-const", roof_const);
                put(&mut map, "roof", roof);
                put(&mut map, "beta", beta);
                put(&mut map, "planted-rate", planted_rate);
                put(&mut map, "planted-amp", planted_amp);
                put(&mut map, "lambda-prime", lambda_prime);
                put(&mut map, "lambda-prime-factor", lambda_prime_factor);
                put(&mut map, "samples", samples);
                put(&mut map, "seed", seed);
            }
            Command::DeltaBar {
                matrix,
                roof_const,
                roof,
                shift,
                n_lo,
                n_hi,
                ..
            } => {
                put(&mut map, "A", matrix);
                put(&mut map, "roof-const", roof_const);
                put(&mut map, "roof", roof);
                put(&mut map, "shift", shift);
                put(&mut map, "n-lo", n_lo);
                put(&mut map, "n-hi", n_hi);
            }
            Command::SolvableAudit {
                matrix,
                roof_const,
                roof,
                omega,
                delta,
                lambda,
                lambda_s,
                window,
                ..
            } => {
                put(&mut map, "A", matrix);
                put(&mut map, "roof-const", roof_const);
                put(&mut map, "roof", roof);
                put(&mut map, "omega", omega);
                put(&mut map, "delta", delta);
                put(&mut map, "lambda", lambda);
                put(&mut map, "lambda-s", lambda_s);
                put(&mut map, "window", window);
            }
            Command::MmeCdf {
                degree,
                eps,
                depth,
                resolution,
                intervals,
                seed,
                ..
            } => {
                put(&mut map, "degree", degree);
                put(&mut map, "eps", eps);
                put(&mut map, "depth", depth);
                put(&mut map, "resolution", resolution);
                put(&mut map, "intervals", intervals);
                put(&mut map, "seed", seed);
            }
            Command::Linearize {
                degree,
                eps,
                depth,
                resolution,
                ..
            } => {
                put(&mut map, "degree", degree);
                put(&mut map, "eps", eps);
                put(&mut map, "depth", depth);
                put(&mut map, "resolution", resolution);
            }
            Command::RnCheck {
                degree,
                eps,
                depth,
                resolution,
                roof,
                samples,
                seed,
                ..
            } => {
                put(&mut map, "degree", degree);
                put(&mut map, "eps", eps);
                put(&mut map, "depth", depth);
                put(&mut map, "resolution", resolution);
                put(&mut map, "roof", roof);
                put(&mut map, "samples", samples);
                put(&mut map, "seed", seed);
            }
            Command::Regularity {
                degree,
                eps,
                depth,
                resolution,
                ..
            } => {
                put(&mut map, "degree", degree);
                put(&mut map, "eps", eps);
                put(&mut map, "depth", depth);
                put(&mut map, "resolution", resolution);
            }
        }
        map
    }
}
