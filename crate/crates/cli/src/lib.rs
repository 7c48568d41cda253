//! `cmreduce` command-line front end.

mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cmreduce::classpoly::{hilbert_class_poly, ClassPolyCache};
use cmreduce::ffield::{fp2_construct, roots_with_multiplicity};
use cmreduce::numbase::fmt_rat;
use cmreduce::quadforms::{splitting, ClassGroup, Discriminant, Splitting};
use cmreduce::quatalg::{construct_bp, ideal_classes, maximal_order};
use cmreduce::reduction::{joint_reduce, reduce_archimedean, reduce_at_prime, scan, PrimeContext, ScanConfig};
use cmreduce::ssenum::enumerate_ss;
use cmreduce::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "cmreduce", version, about = "Class groups, supersingular loci and simultaneous reduction of CM points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Format {
    /// Machine-readable JSON output.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// CSV output (scan only).
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduced forms of discriminant D.
    Classgroup {
        #[arg(long = "D", allow_hyphen_values = true)]
        d: i64,
        #[command(flatten)]
        fmt: Format,
    },
    /// Hilbert class polynomial H_D, optionally reduced mod p with its roots in F_{p^2}.
    Classpoly {
        #[arg(long = "D", allow_hyphen_values = true)]
        d: i64,
        #[arg(long)]
        p: Option<i64>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[command(flatten)]
        fmt: Format,
    },
    /// Supersingular j-invariants in F_{p^2} with weights.
    Ss {
        #[arg(long)]
        p: i64,
        #[command(flatten)]
        fmt: Format,
    },
    /// Eichler mass of SS_p.
    Mass {
        #[arg(long)]
        p: i64,
        #[command(flatten)]
        fmt: Format,
    },
    /// The quaternion algebra ramified at p and infinity.
    Quat {
        #[arg(long)]
        p: i64,
        #[command(subcommand)]
        what: QuatCommand,
    },
    /// Reduction of Pic(O_D) at an inert prime, or to CM points without --p.
    Reduce {
        #[arg(long = "D", allow_hyphen_values = true)]
        d: i64,
        #[arg(long)]
        p: Option<i64>,
        #[command(flatten)]
        fmt: Format,
    },
    /// Simultaneous reduction at several inert primes.
    Joint {
        #[arg(long = "D", allow_hyphen_values = true)]
        d: i64,
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<i64>,
        #[command(flatten)]
        fmt: Format,
    },
    /// Joint reduction statistics over a range of |D|.
    Scan(ScanArgs),
    /// Run the invariant suite.
    Verify {
        /// Smaller ranges; finishes in seconds.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[command(flatten)]
        fmt: Format,
    },
}

#[derive(Subcommand, Debug)]
enum QuatCommand {
    /// The pair (a, b) and the ramified places.
    Algebra {
        #[command(flatten)]
        fmt: Format,
    },
    /// The maximal order: HNF basis, reduced discriminant, unit weight.
    Order {
        #[command(flatten)]
        fmt: Format,
    },
    /// Left ideal class representatives of the maximal order.
    Classes {
        #[command(flatten)]
        fmt: Format,
    },
    /// An optimal embedding of O_D.
    Embed {
        #[arg(long = "D", allow_hyphen_values = true)]
        d: i64,
        #[command(flatten)]
        fmt: Format,
    },
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [11i64, 23])]
    primes: Vec<i64>,
    /// Primes q1,q2 required to split.
    #[arg(long, value_delimiter = ',')]
    split: Vec<i64>,
    #[arg(long, default_value_t = 3)]
    dmin: i64,
    #[arg(long, default_value_t = 1000)]
    dmax: i64,
    /// Fundamental discriminants only.
    #[arg(long)]
    fundamental: bool,
    /// Keep a seeded random subset of this many discriminants.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fmt: Format,
}

/// Parse `argv` (including the program name), run, return the exit code.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        // e.g. output piped into `head`
        Err(Error::Io(msg)) if msg.contains("Broken pipe") => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, fmt: Format, value: &Value, text: impl FnOnce() -> String) -> Result<()> {
    if fmt.json {
        writeln!(out, "{}", serde_json::to_string_pretty(value).expect("json"))?;
    } else {
        write!(out, "{}", text())?;
    }
    Ok(())
}

fn disc(d: i64) -> Result<Discriminant> {
    Discriminant::new(d)
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Classgroup { d, fmt } => {
            let cg = ClassGroup::new(disc(d)?);
            emit(out, fmt, &cg.to_json(), || {
                let mut s = format!("D = {d}, h = {}\n", cg.h());
                for f in &cg.forms {
                    s.push_str(&format!("{f}\n"));
                }
                s
            })?;
        }
        Command::Classpoly { d, p, cache_dir, fmt } => {
            let d = disc(d)?;
            let h = match cache_dir {
                Some(dir) => ClassPolyCache::new(dir)?.get(d)?,
                None => hilbert_class_poly(d)?,
            };
            let mut v = h.to_json();
            let mut text = format!("H_{}(X), degree {}\n", d.value(), h.degree());
            for (k, c) in h.coeffs.iter().enumerate() {
                text.push_str(&format!("X^{k}: {c}\n"));
            }
            if let Some(p) = p {
                let ctx = fp2_construct(p)?;
                let reduced = h.mod_p(ctx.p());
                let roots = roots_with_multiplicity(&h.to_ffpoly(&ctx), &ctx)?;
                v["p"] = json!(p);
                v["mod_p"] = json!(reduced.iter().map(|c| c.to_string()).collect::<Vec<_>>());
                v["roots"] = json!(roots.iter().map(|(r, m)| json!({"root": r.to_string(), "multiplicity": m})).collect::<Vec<_>>());
                text.push_str(&format!("mod {p}: {reduced:?}\n"));
                for (r, m) in &roots {
                    text.push_str(&format!("root {r} multiplicity {m}\n"));
                }
            }
            emit(out, fmt, &v, || text)?;
        }
        Command::Ss { p, fmt } => {
            let ss = enumerate_ss(p)?;
            emit(out, fmt, &ss.to_json(), || {
                let mut s = format!("p = {p}, |SS_p| = {}, mass = {}\n", ss.points.len(), fmt_rat(&ss.mass));
                for pt in &ss.points {
                    s.push_str(&format!("j = {} w = {}\n", pt.j, pt.weight));
                }
                s
            })?;
        }
        Command::Mass { p, fmt } => {
            let ss = enumerate_ss(p)?;
            let v = json!({"p": p, "mass": fmt_rat(&ss.mass), "expected": fmt_rat(&ss.expected_mass())});
            emit(out, fmt, &v, || format!("{}\n", fmt_rat(&ss.mass)))?;
            if ss.mass != ss.expected_mass() {
                return Err(Error::Internal(format!("mass {} differs from (p-1)/12", fmt_rat(&ss.mass))));
            }
        }
        Command::Quat { p, what } => quat(p, what, out)?,
        Command::Reduce { d, p, fmt } => {
            let d = disc(d)?;
            match p {
                Some(p) => {
                    let r = reduce_at_prime(d, p)?;
                    emit(out, fmt, &r.to_json(), || {
                        let mut s = format!("D = {}, p = {p}, base class {}\n", d.value(), r.base_class);
                        for (f, k) in r.forms.iter().zip(&r.indices) {
                            s.push_str(&format!("{f} -> {k}\n"));
                        }
                        s.push_str(&format!("fibers {:?}\n", r.fiber_sizes()));
                        s
                    })?;
                }
                None => {
                    let (pts, st) = reduce_archimedean(d);
                    let v = json!({
                        "D": d.value().to_string(),
                        "points": pts.iter().map(|pt| json!({"form": pt.form.to_array(), "re": pt.re, "im": pt.im})).collect::<Vec<_>>(),
                        "stats": st.to_json(),
                    });
                    emit(out, fmt, &v, || {
                        let mut s = String::new();
                        for pt in &pts {
                            s.push_str(&format!("{} tau = {:.12} + {:.12} i\n", pt.form, pt.re, pt.im));
                        }
                        s.push_str(&format!(
                            "min Im {:.12}, max Im {:.12}, mass(Im >= 2) = {}, mass(|Re| <= 1/4) = {}\n",
                            st.min_im,
                            st.max_im,
                            fmt_rat(&st.cusp[0].mass),
                            fmt_rat(&st.strip[0].mass)
                        ));
                        s
                    })?;
                }
            }
        }
        Command::Joint { d, primes, fmt } => {
            let j = joint_reduce(disc(d)?, &primes)?;
            emit(out, fmt, &j.to_json(), || {
                let mut s = format!("D = {d}, h = {}, primes {:?}, class counts {:?}\n", j.h, j.primes, j.class_counts);
                for (t, c) in &j.tuple_counts {
                    s.push_str(&format!("{t:?}: {c} (product measure {})\n", fmt_rat(&j.product_measure[t])));
                }
                s.push_str(&format!("tv = {}, chi2 = {:.12}, surjective = {}\n", fmt_rat(&j.tv), j.chi2, j.is_surjective()));
                s
            })?;
        }
        Command::Scan(a) => {
            let cfg = ScanConfig {
                primes: a.primes,
                split: a.split,
                dmin: a.dmin,
                dmax: a.dmax,
                fundamental_only: a.fundamental,
                sample: a.sample,
                seed: a.seed,
                threads: a.threads,
            };
            let report = scan(&cfg)?;
            let body = if a.fmt.json {
                format!("{}\n", serde_json::to_string_pretty(&report.to_json()).expect("json"))
            } else {
                report.to_csv()
            };
            match a.out {
                Some(path) => std::fs::write(path, body)?,
                None => write!(out, "{body}")?,
            }
        }
        Command::Verify { quick, cache_dir, fmt } => {
            let cache = cache_dir.map(ClassPolyCache::new).transpose()?;
            let results = verify::run_suite(quick, cache.as_ref());
            let all_ok = results.iter().all(|r| r.pass);
            let v = json!({
                "quick": quick,
                "checks": results.iter().map(|r| json!({"name": r.name, "pass": r.pass, "detail": r.detail})).collect::<Vec<_>>(),
                "pass": all_ok,
            });
            emit(out, fmt, &v, || {
                let mut s = String::new();
                for r in &results {
                    s.push_str(&format!("{} {}: {}\n", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail));
                }
                s
            })?;
            return Ok(if all_ok { 0 } else { 2 });
        }
    }
    Ok(0)
}

fn quat(p: i64, what: QuatCommand, out: &mut dyn Write) -> Result<()> {
    let alg = construct_bp(p)?;
    match what {
        QuatCommand::Algebra { fmt } => {
            let ram: Vec<String> = alg.ramified.iter().map(|v| v.to_string()).collect();
            let v = json!({"p": p, "a": alg.a, "b": alg.b, "ramified": ram});
            emit(out, fmt, &v, || format!("({}, {}) ramified at {}\n", alg.a, alg.b, ram.join(", ")))?;
        }
        QuatCommand::Order { fmt } => {
            let o = maximal_order(&alg)?;
            let v = json!({
                "p": p,
                "algebra": [alg.a, alg.b],
                "basis": o.lattice().to_strings(),
                "reduced_discriminant": o.reduced_discriminant().to_string(),
                "unit_weight": o.unit_weight()?,
            });
            emit(out, fmt, &v, || {
                let mut s = format!("maximal order of ({}, {}), reduced discriminant {}\n", alg.a, alg.b, o.reduced_discriminant());
                for row in o.lattice().to_strings() {
                    s.push_str(&format!("{}\n", row.join(" ")));
                }
                s
            })?;
        }
        QuatCommand::Classes { fmt } => {
            let o = Arc::new(maximal_order(&alg)?);
            let set = ideal_classes(&o)?;
            emit(out, fmt, &set.to_json(), || {
                let mut s = format!("p = {p}: {} classes, mass {}\n", set.len(), fmt_rat(&set.mass()));
                for (k, (r, w)) in set.representatives.iter().zip(&set.weights).enumerate() {
                    s.push_str(&format!("class {k}: norm {}, weight {w}\n", fmt_rat(r.reduced_norm())));
                    for row in r.lattice().to_strings() {
                        s.push_str(&format!("  {}\n", row.join(" ")));
                    }
                }
                s
            })?;
        }
        QuatCommand::Embed { d, fmt } => {
            let d = disc(d)?;
            // O_D embeds in a maximal order of B_{p,inf} iff p does not split
            if splitting(d, p)? == Splitting::Split {
                return Err(Error::Domain(format!("{p} splits in discriminant {d}, so O_D has no embedding")));
            }
            let ctx = PrimeContext::get(p)?;
            let (k, e) = ctx.embedding_for(d)?;
            let v = json!({"p": p, "D": d.value().to_string(), "class": k, "v": e.v().to_strings()});
            emit(out, fmt, &v, || format!("iota(sqrt({})) = {} in the right order of class {k}\n", d.value(), e.v()))?;
        }
    }
    Ok(())
}
