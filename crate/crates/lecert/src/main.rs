//! lecert: equisingularity certificates for polynomial families with a
//! line singularity along the z1-axis.
//!
//! JSON is the machine interface; the human-readable summary is rendered
//! from the same JSON value. Outputs are written atomically and are
//! byte-identical for identical inputs, options, and seed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::{json, Value};

use lecert::admissibility::{check_admissible, Mode};
use lecert::certify::{certify_family, CertifyOptions, Verdict};
use lecert::le::{choose_exponent_a, le_numbers, attach_slice_check};
use lecert::newton::{is_convenient, is_quasi_convenient, newton_number, newton_polyhedron};
use lecert::nondegen::is_newton_nondegenerate;
use lecert::parse::parse_family;
use lecert::poly::{PolyFamily, Q};
use lecert::probe::{probe_csv, probe_family, ProbeConfig, Stratum};

#[derive(Parser)]
#[command(name = "lecert", version, about = "Equisingularity certificates via exact Newton-polyhedron combinatorics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every randomized sub-procedure.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Write the JSON report to this path (atomically).
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for the exact per-sample pipelines.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Timing diagnostics on stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a family and echo its canonical form.
    Parse { file: PathBuf },
    /// Newton polyhedron of f_t: vertices, facets, compact faces.
    Newton {
        file: PathBuf,
        #[arg(long, default_value = "0")]
        t: String,
    },
    /// Newton number of f_t (requires a convenient germ).
    Nu {
        file: PathBuf,
        #[arg(long, default_value = "0")]
        t: String,
    },
    /// Newton non-degeneracy verdict for f_t.
    Nondegen {
        file: PathBuf,
        #[arg(long, default_value = "0")]
        t: String,
        #[arg(long = "nondegen-tier", default_value_t = 3)]
        tier: u8,
    },
    /// Admissibility report for the family.
    Admissible {
        file: PathBuf,
        #[arg(long, default_value = "per-vertex")]
        mode: String,
        #[arg(long = "t-samples", default_value = "0,1,1/2,-2")]
        t_samples: String,
        #[arg(long = "nondegen-tier", default_value_t = 3)]
        tier: u8,
    },
    /// Le numbers of f_t via the exponent-window route.
    Le {
        file: PathBuf,
        #[arg(long, default_value = "1")]
        t: String,
        /// Exponent a; chosen by the stabilization search when omitted.
        #[arg(long)]
        a: Option<u32>,
        /// Cross-check lambda1 against generic-slice Milnor numbers.
        #[arg(long = "cross-check")]
        cross_check: bool,
        #[arg(long = "nondegen-tier", default_value_t = 3)]
        tier: u8,
    },
    /// Full certificate; exit 0 = EQUISINGULAR, 2 = INCONCLUSIVE.
    Certify {
        file: PathBuf,
        #[arg(long = "t-samples", default_value = "0,1,1/2,-2")]
        t_samples: String,
        #[arg(long, default_value = "per-vertex")]
        mode: String,
        #[arg(long = "nondegen-tier", default_value_t = 3)]
        tier: u8,
    },
    /// Numerical regularity probe along arcs on V(f).
    Probe {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        arcs: usize,
        #[arg(long, default_value_t = 0.1)]
        s0: f64,
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
        #[arg(long, default_value_t = 14)]
        steps: usize,
        /// CSV output path (columns arc_id,k,s,R1,R2,C1,C2).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value = "line")]
        stratum: String,
        /// Parameter value at which the boundary vertices feeding rho are read.
        #[arg(long = "boundary-t", default_value = "1")]
        boundary_t: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lecert: error: {e}");
            ExitCode::from(1)
        }
    };
    if cli.verbose {
        eprintln!("lecert: elapsed {:.3}s", started.elapsed().as_secs_f64());
    }
    code
}

fn run(cli: &Cli) -> lecert::Result<ExitCode> {
    let (value, human, code) = dispatch(cli)?;
    if let Some(path) = &cli.json {
        write_atomic(path, &format!("{}\n", serde_json::to_string_pretty(&value)?))?;
    }
    if !cli.quiet {
        println!("{human}");
    }
    Ok(code)
}

fn dispatch(cli: &Cli) -> lecert::Result<(Value, String, ExitCode)> {
    match &cli.command {
        Command::Parse { file } => {
            let f = load(file)?;
            let value = json!({
                "n": f.n(),
                "terms": f.term_map().len(),
                "canonical": f.to_string(),
            });
            let human = render_parse(&value);
            Ok((value, human, ExitCode::SUCCESS))
        }
        Command::Newton { file, t } => {
            let f = load(file)?;
            let t0 = parse_q(t)?;
            let np = newton_polyhedron(&f.germ_at(&t0))?;
            let value = json!({
                "t": t0.to_string(),
                "quasi_convenient": is_quasi_convenient(&np),
                "convenient": is_convenient(&np),
                "polyhedron": serde_json::to_value(&np)?,
            });
            let human = render_newton(&value);
            Ok((value, human, ExitCode::SUCCESS))
        }
        Command::Nu { file, t } => {
            let f = load(file)?;
            let t0 = parse_q(t)?;
            let np = newton_polyhedron(&f.germ_at(&t0))?;
            let nu = newton_number(&np)?;
            let value = json!({ "t": t0.to_string(), "nu": nu });
            let human = value["nu"].to_string();
            Ok((value, human, ExitCode::SUCCESS))
        }
        Command::Nondegen { file, t, tier } => {
            let f = load(file)?;
            let t0 = parse_q(t)?;
            let verdict = is_newton_nondegenerate(&f.germ_at(&t0), *tier, cli.seed)?;
            let value = json!({
                "t": t0.to_string(),
                "tier": tier,
                "seed": cli.seed,
                "verdict": serde_json::to_value(&verdict)?,
            });
            let human = render_nondegen(&value);
            Ok((value, human, ExitCode::SUCCESS))
        }
        Command::Admissible {
            file,
            mode,
            t_samples,
            tier,
        } => {
            let f = load(file)?;
            let mode = Mode::parse(mode)?;
            let samples = parse_samples(t_samples)?;
            let report = check_admissible(&f, &samples, mode, *tier, cli.seed)?;
            let value = serde_json::to_value(&report)?;
            let human = render_admissible(&value);
            Ok((value, human, ExitCode::SUCCESS))
        }
        Command::Le {
            file,
            t,
            a,
            cross_check,
            tier,
        } => {
            let f = load(file)?;
            let t0 = parse_q(t)?;
            let germ = f.germ_at(&t0);
            let a = match a {
                Some(a) => *a,
                None => choose_exponent_a(std::slice::from_ref(&germ), *tier, cli.seed)?,
            };
            let mut le = le_numbers(&germ, a, *tier, cli.seed)?;
            if *cross_check {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed ^ 0x5eed_51ce);
                attach_slice_check(&mut le, &germ, 3, &mut rng, *tier, cli.seed)?;
            }
            let value = json!({
                "t": t0.to_string(),
                "assumes_admissible": true,
                "le": serde_json::to_value(&le)?,
            });
            let human = render_le(&value);
            Ok((value, human, ExitCode::SUCCESS))
        }
        Command::Certify {
            file,
            t_samples,
            mode,
            tier,
        } => {
            let f = load(file)?;
            let opts = CertifyOptions {
                t_samples: parse_samples(t_samples)?,
                mode: Mode::parse(mode)?,
                tier: *tier,
                seed: cli.seed,
                threads: cli.threads.max(1),
                slice_cross_check: true,
            };
            let cert = certify_family(&f, &opts)?;
            let code = match cert.verdict {
                Verdict::Equisingular => ExitCode::SUCCESS,
                Verdict::Inconclusive => ExitCode::from(2),
            };
            let value = serde_json::to_value(&cert)?;
            let human = render_certificate(&value);
            Ok((value, human, code))
        }
        Command::Probe {
            file,
            arcs,
            s0,
            ratio,
            steps,
            csv,
            stratum,
            boundary_t,
        } => {
            let f = load(file)?;
            let cfg = ProbeConfig {
                arcs: *arcs,
                seed: cli.seed,
                s0: *s0,
                ratio: *ratio,
                steps: *steps,
                stratum: Stratum::parse(stratum)?,
                boundary_t: parse_q(boundary_t)?,
            };
            let report = probe_family(&f, &cfg)?;
            if let Some(path) = csv {
                write_atomic(path, &probe_csv(&report))?;
            }
            let value = serde_json::to_value(&report)?;
            let human = render_probe(&value);
            Ok((value, human, ExitCode::SUCCESS))
        }
    }
}

fn load(path: &Path) -> lecert::Result<PolyFamily> {
    let src = std::fs::read_to_string(path)?;
    parse_family(&src)
}

/// Exact rational from "p", "-p", or "p/q".
fn parse_q(s: &str) -> lecert::Result<Q> {
    let bad = || lecert::Error::InvalidInput(format!("cannot parse rational `{s}`"));
    let s = s.trim();
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Q::from_integer(n))
        }
        Some((num, den)) => {
            let n: BigInt = num.trim().parse().map_err(|_| bad())?;
            let d: BigInt = den.trim().parse().map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
    }
}

fn parse_samples(s: &str) -> lecert::Result<Vec<Q>> {
    let samples: Vec<Q> = s
        .split(',')
        .map(parse_q)
        .collect::<lecert::Result<_>>()?;
    if samples.is_empty() {
        return Err(lecert::Error::InvalidInput("empty t-sample list".into()));
    }
    Ok(samples)
}

fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp.partial");
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(content.as_bytes())?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

// Human renderings are derived from the JSON value, never from separate
// state, so the two interfaces cannot drift apart.

fn render_parse(v: &Value) -> String {
    format!(
        "variables: t, z1..z{}\nterms: {}\n{}",
        v["n"], v["terms"],
        v["canonical"].as_str().unwrap_or_default().trim_end()
    )
}

fn render_newton(v: &Value) -> String {
    let p = &v["polyhedron"];
    let mut out = String::new();
    out.push_str(&format!(
        "t = {}  quasi-convenient: {}  convenient: {}\n",
        v["t"].as_str().unwrap_or("?"),
        v["quasi_convenient"],
        v["convenient"]
    ));
    out.push_str(&format!("vertices: {}\n", p["vertices"]));
    out.push_str(&format!(
        "facets: {}  compact faces: {}",
        p["facets"].as_array().map_or(0, Vec::len),
        p["compact_faces"].as_array().map_or(0, Vec::len)
    ));
    out
}

fn render_nondegen(v: &Value) -> String {
    let verdict = &v["verdict"];
    let status = verdict["status"].as_str().unwrap_or("?").to_string();
    match verdict["witness"].as_object() {
        Some(w) => format!(
            "{status} (witness residual {} at scale {})",
            w["residual"], w["scale"]
        ),
        None => status,
    }
}

fn render_admissible(v: &Value) -> String {
    let overall = &v["overall"];
    let verdict = if overall.as_str() == Some("Admissible") {
        "Admissible".to_string()
    } else {
        format!("{overall}")
    };
    format!(
        "axis contained: {}  quasi-convenient: {}  condition (iii): {}\noverall: {}",
        v["line_singularity"]["axis_contained"],
        v["quasi_convenient"],
        v["condition_iii"],
        verdict
    )
}

fn render_le(v: &Value) -> String {
    let le = &v["le"];
    let mut out = format!(
        "t = {}: lambda0 = {}, lambda1 = {} (exponent a = {})",
        v["t"].as_str().unwrap_or("?"),
        le["lambda0"], le["lambda1"], le["exponent_a"]
    );
    if let Some(mu) = le["slice_mu"].as_u64() {
        out.push_str(&format!("\ngeneric-slice Milnor number: {mu} (agrees with lambda1)"));
    }
    out
}

fn render_certificate(v: &Value) -> String {
    let mut out = String::new();
    out.push_str(&format!("verdict: {}\n", v["verdict"].as_str().unwrap_or("?")));
    out.push_str(&format!("input digest: {}\n", v["input_digest"].as_str().unwrap_or("?")));
    out.push_str(&format!("constancy: {}\n", v["constancy"]));
    if let Some(table) = v["le_table"].as_object() {
        out.push_str("Le numbers by t-sample:\n");
        for (t, le) in table {
            out.push_str(&format!(
                "  t = {:>6}: (lambda0, lambda1) = ({}, {})\n",
                t, le["lambda0"], le["lambda1"]
            ));
        }
    }
    if let Some(reasons) = v["reasons"].as_array() {
        for r in reasons {
            out.push_str(&format!("reason: {}\n", r.as_str().unwrap_or("?")));
        }
    }
    out.push_str(&format!("basis: {}", v["verdict_basis"].as_str().unwrap_or("?")));
    out
}

fn render_probe(v: &Value) -> String {
    let pf = &v["pass_fraction"];
    format!(
        "arcs: {} of {} requested (stratum {})\npass fractions  R1: {}  R2: {}  C1: {}  C2: {}\nidentity max rel. deviation: {}",
        v["arcs_used"], v["arcs_requested"], v["stratum"].as_str().unwrap_or("?"),
        pf[0], pf[1], pf[2], pf[3],
        v["identity_max_reldev"]
    )
}
