//! thetatool: command-line front end for the thetalocus library.
//!
//! Subcommands expose theta evaluation, the identity residual checkers, the
//! exact symbolic ranks and kernels, hyperelliptic period matrices,
//! vanishing-pattern classification, transport to the standard form, the
//! Gunning multisecant check, and the acceptance suite. Output is JSON
//! (pretty-printed with --pretty); exit code 0 means every requested check
//! passed, 1 means a check failed, 2 means invalid input.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use thetalocus::chars::{Characteristic, VarleyDebarreVariant};
use thetalocus::heisenberg;
use thetalocus::identities;
use thetalocus::jacobian::{self, BranchPointSet};
use thetalocus::theta::{self, PeriodMatrix, TruncationPolicy};

#[derive(Parser)]
#[command(
    name = "thetatool",
    about = "Theta characteristics, certified theta-function numerics, and hyperelliptic locus checks",
    version
)]
struct Cli {
    /// Seed for every randomized sampler (ChaCha8; identical seeds give
    /// byte-identical reports).
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Relative tolerance for pass/fail decisions on residual checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Write the JSON report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Pretty-print the JSON report.
    #[arg(long, global = true)]
    pretty: bool,
    /// Truncation tail target for theta sums.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tail: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a first- or second-order theta value at (tau, z).
    Theta(ThetaArgs),
    /// Residual checks of the theta identities (addition formula, Riemann
    /// relations, Frobenius formula, Grushevsky cubics, quartic corollaries).
    Identities(IdentitiesTop),
    /// Exact integer computations: cubic span ranks over vanishing sets,
    /// biquadratic relation-space dimensions, the Frobenius kernel witness.
    Symbolic(SymbolicArgs),
    /// Period matrix of a real hyperelliptic curve, frame-normalized to the
    /// standard fundamental system.
    Periods(PeriodsArgs),
    /// Evaluate all even theta constants and classify the vanishing pattern
    /// against the hyperelliptic prediction.
    Classify(ClassifyArgs),
    /// Transport a consistent vanishing pattern to the standard one by a
    /// breadth-first search over symplectic generator words.
    Transport(ClassifyArgs),
    /// Gunning multisecant dependence and Gram-rank check.
    Gunning(GunningArgs),
    /// Run the acceptance suite (all criteria, or --only a subset).
    Acceptance(AcceptanceArgs),
}

#[derive(Args)]
struct ThetaArgs {
    /// Period matrix JSON file {"g":, "re":[[..]], "im":[[..]]}.
    #[arg(long)]
    tau: PathBuf,
    /// Characteristic in text form, e.g. "0101|1111".
    #[arg(long, default_value = "")]
    char: String,
    /// Argument vector as comma-separated complex entries, e.g.
    /// "0.1+0.2i,-0.3". Defaults to 0.
    #[arg(long)]
    z: Option<String>,
    /// Evaluate the second-order theta with this sigma bit string instead.
    #[arg(long)]
    sigma: Option<String>,
}

#[derive(Args)]
struct IdentitiesTop {
    #[command(subcommand)]
    cmd: IdentitiesCmd,
}

#[derive(Subcommand)]
enum IdentitiesCmd {
    /// Evaluate one identity's residual report and gate it on --tol.
    Check(IdentitiesArgs),
}

#[derive(Args)]
struct IdentitiesArgs {
    #[arg(long, value_enum)]
    which: Identity,
    /// Period matrix file; when omitted, random samples on H_g are used.
    #[arg(long)]
    tau: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    genus: usize,
    #[arg(long, default_value_t = 20)]
    samples: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Identity {
    /// The theta addition formula.
    Addition,
    /// Shifted biquadratic Riemann relations over the exact kernel basis.
    Riemann,
    /// Four-point Frobenius theta formula over the standard system.
    Frobenius,
    /// Grushevsky cubics R_sigma in second-order theta functions.
    Grushevsky,
    /// Q[0,0]^2 = sum_k Q[s_k, e_{k+1}]^2.
    Rf,
    /// Quarter-period form of rf with integer shifts (x, y).
    Rf2,
    /// Q[0,0] Q[e1,d1] = signed sum of shifted quadric products.
    Rf2a,
    /// The genus-4 six-equation arrowhead system (requires --tau).
    Genus4,
}

#[derive(Args)]
struct SymbolicArgs {
    #[command(subcommand)]
    what: SymbolicCmd,
}

#[derive(Subcommand)]
enum SymbolicCmd {
    /// Rank of the cubic span {X_rho Q[eps, delta]} over a vanishing set.
    Ranks {
        #[arg(long, default_value_t = 4)]
        genus: usize,
        #[arg(long, value_enum, default_value_t = CharSet::Hyperelliptic)]
        set: CharSet,
    },
    /// Dimension and basis of the biquadratic relation kernel for a twist.
    Reldim {
        #[arg(long)]
        genus: usize,
        /// sigma as a bit string, e.g. "10" (empty = zero).
        #[arg(long, default_value = "")]
        sigma: String,
        /// rho as a bit string (empty = zero).
        #[arg(long, default_value = "")]
        rho: String,
    },
    /// The signed quartic relation vector behind Frobenius' formula.
    FrobeniusKernel {
        #[arg(long)]
        genus: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CharSet {
    /// The predicted hyperelliptic vanishing set (10 characteristics at g=4).
    Hyperelliptic,
    /// Varley-Debarre in the weight-2/3 form [0|alpha].
    VarleyDebarre,
    /// Varley-Debarre as the explicitly listed n_1..n_10.
    VarleyDebarreExplicit,
}

#[derive(Args)]
struct PeriodsArgs {
    /// Comma-separated strictly increasing real branch points; an odd count
    /// adds a branch point at infinity.
    #[arg(long)]
    branch_points: String,
    /// Gauss-Chebyshev nodes per segment (doubled internally for the
    /// convergence check).
    #[arg(long, default_value_t = 256)]
    nodes: usize,
    /// Also report the raw (pre frame-normalization) period matrix.
    #[arg(long)]
    raw: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    tau: PathBuf,
    /// Vanishing threshold as a fraction of the largest even constant.
    #[arg(long, default_value_t = 1e-6)]
    threshold_ratio: f64,
}

#[derive(Args)]
struct GunningArgs {
    #[arg(long)]
    tau: PathBuf,
    #[arg(long, default_value_t = 10)]
    samples: usize,
}

#[derive(Args)]
struct AcceptanceArgs {
    /// Run every criterion (the default).
    #[arg(long)]
    all: bool,
    /// Comma-separated criterion ids to run, e.g. "1,2,13".
    #[arg(long)]
    only: Option<String>,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim().replace(' ', "");
    if t.is_empty() {
        return Err("empty complex entry".into());
    }
    if let Some(body) = t.strip_suffix('i') {
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|e| format!("{e}"))?;
                let im_str = &body[k..];
                let im: f64 = match im_str {
                    "+" => 1.0,
                    "-" => -1.0,
                    _ => im_str.parse().map_err(|e| format!("{e}"))?,
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else {
                    body.parse().map_err(|e| format!("{e}"))?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        Ok(Complex64::new(t.parse().map_err(|e| format!("{e}"))?, 0.0))
    }
}

fn parse_z(s: &str, g: usize) -> Result<Vec<Complex64>, String> {
    let v: Result<Vec<Complex64>, String> = s.split(',').map(parse_complex).collect();
    let v = v?;
    if v.len() != g {
        return Err(format!("z has {} entries, genus is {g}", v.len()));
    }
    Ok(v)
}

fn parse_bits(s: &str) -> Result<u32, String> {
    let mut m = 0u32;
    for (k, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => m |= 1 << k,
            _ => return Err(format!("bad bit '{c}'")),
        }
    }
    Ok(m)
}

fn bitstring(m: u32, g: usize) -> String {
    (0..g)
        .map(|k| if (m >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn load_tau(path: &PathBuf) -> Result<PeriodMatrix, String> {
    let data = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&data).map_err(|e| format!("{}: {e}", path.display()))
}

enum Outcome {
    Pass(serde_json::Value),
    Fail(serde_json::Value),
}

fn dispatch(cli: &Cli) -> Result<Outcome, String> {
    let policy = TruncationPolicy {
        target_tail: cli.tail,
        ..TruncationPolicy::default()
    };
    match &cli.command {
        Command::Theta(args) => {
            let tau = load_tau(&args.tau)?;
            let g = tau.genus();
            let z = match &args.z {
                Some(s) => parse_z(s, g)?,
                None => vec![Complex64::new(0.0, 0.0); g],
            };
            let value = if let Some(sig) = &args.sigma {
                let sigma = parse_bits(sig)?;
                theta::theta2(sigma, &tau, &z, &policy).map_err(|e| e.to_string())?
            } else {
                let m = Characteristic::parse(&args.char).map_err(|e| e.to_string())?;
                theta::theta1(&m, &tau, &z, &policy).map_err(|e| e.to_string())?
            };
            Ok(Outcome::Pass(serde_json::to_value(value).unwrap()))
        }
        Command::Identities(top) => {
            let IdentitiesCmd::Check(args) = &top.cmd;
            let g = args.genus;
            let seed = cli.seed;
            let n = args.samples;
            let tau = args.tau.as_ref().map(load_tau).transpose()?;
            if matches!(args.which, Identity::Genus4) {
                let t = tau.ok_or("--which genus4 requires --tau")?;
                let sys =
                    identities::genus4_system(&t, 1e-6, &policy).map_err(|e| e.to_string())?;
                let passed = sys.rank == 5 && sys.det_residual < 1e-9;
                let v = serde_json::to_value(&sys).unwrap();
                return Ok(if passed {
                    Outcome::Pass(v)
                } else {
                    Outcome::Fail(v)
                });
            }
            let n_tau = n.max(1) / 2 + 1;
            let report = match (args.which, &tau) {
                (Identity::Addition, _) => {
                    identities::addition_formula_report(g.min(3), n, seed, &policy)
                }
                (Identity::Riemann, _) => {
                    identities::riemann_report(g.min(3), n_tau, seed, &policy)
                }
                (Identity::Frobenius, Some(t)) => identities::frobenius_at_tau(t, n, seed, &policy),
                (Identity::Frobenius, None) => {
                    identities::frobenius_report(g, n_tau, 4, seed, &policy)
                }
                (Identity::Grushevsky, Some(t)) => {
                    identities::grushevsky_at_tau(t, n, seed, &policy)
                }
                (Identity::Grushevsky, None) => {
                    identities::grushevsky_report(g, n_tau, 4, seed, &policy)
                }
                (Identity::Rf, Some(t)) => identities::rf_at_tau(t, n, seed, &policy),
                (Identity::Rf, None) => identities::rf_report(g, n_tau, 4, seed, &policy),
                (Identity::Rf2, _) => identities::rf2_report(g, n_tau, 4, seed, &policy),
                (Identity::Rf2a, _) => identities::rf2a_report(g, n_tau, 4, seed, &policy),
                (Identity::Genus4, _) => unreachable!(),
            }
            .map_err(|e| e.to_string())?;
            let passed = report.passes(cli.tol);
            let v = serde_json::to_value(&report).unwrap();
            Ok(if passed {
                Outcome::Pass(v)
            } else {
                Outcome::Fail(v)
            })
        }
        Command::Symbolic(args) => match &args.what {
            SymbolicCmd::Ranks { genus, set } => {
                let g = *genus;
                let chars = match set {
                    CharSet::Hyperelliptic => {
                        thetalocus::chars::predicted_vanishing_set(g).map_err(|e| e.to_string())?
                    }
                    CharSet::VarleyDebarre => {
                        thetalocus::chars::varley_debarre_sets(VarleyDebarreVariant::WeightTwoThree)
                            .map_err(|e| e.to_string())?
                    }
                    CharSet::VarleyDebarreExplicit => {
                        thetalocus::chars::varley_debarre_sets(VarleyDebarreVariant::ExplicitN)
                            .map_err(|e| e.to_string())?
                    }
                };
                let pairs: Vec<(u32, u32)> = chars.iter().map(|m| (m.eps(), m.delta())).collect();
                let cubics =
                    heisenberg::cubics_from_quadrics(g, &pairs).map_err(|e| e.to_string())?;
                let rank = heisenberg::span_rank(&cubics).map_err(|e| e.to_string())?;
                Ok(Outcome::Pass(json!({
                    "genus": g,
                    "set": chars.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                    "generators": cubics.len(),
                    "rank": rank,
                })))
            }
            SymbolicCmd::Reldim { genus, sigma, rho } => {
                let s = parse_bits(sigma)?;
                let r = parse_bits(rho)?;
                let (dim, basis) =
                    heisenberg::relation_space(*genus, s, r).map_err(|e| e.to_string())?;
                Ok(Outcome::Pass(json!({
                    "genus": genus,
                    "sigma": bitstring(s, *genus),
                    "rho": bitstring(r, *genus),
                    "dimension": dim,
                    "kernel_basis": basis
                        .iter()
                        .map(|v| {
                            v.coefficients
                                .iter()
                                .map(|(e, d, c)| json!({
                                    "pair": Characteristic::new(*genus, *e, *d).unwrap().to_string(),
                                    "c": c.to_string(),
                                }))
                                .collect::<Vec<_>>()
                        })
                        .collect::<Vec<_>>(),
                })))
            }
            SymbolicCmd::FrobeniusKernel { genus } => {
                let v =
                    heisenberg::frobenius_vector_in_kernel(*genus).map_err(|e| e.to_string())?;
                let expansion_zero = v.verify_in_kernel().is_ok();
                Ok(Outcome::Pass(json!({
                    "genus": genus,
                    "expansion_zero": expansion_zero,
                    "coefficients": v
                        .coefficients
                        .iter()
                        .map(|(e, d, c)| {
                            let m = Characteristic::new(*genus, *e, *d).unwrap();
                            json!({ "pair": m.to_string(), "c": c.to_string() })
                        })
                        .collect::<Vec<_>>(),
                })))
            }
        },
        Command::Periods(args) => {
            let bp = BranchPointSet::parse(&args.branch_points).map_err(|e| e.to_string())?;
            let pc = jacobian::hyperelliptic_periods(&bp, args.nodes).map_err(|e| e.to_string())?;
            let mut v = json!({
                "genus": bp.genus(),
                "tau": serde_json::to_value(&pc.tau).unwrap(),
                "quadrature_defect": pc.quadrature_defect,
                "frame_change": serde_json::to_value(&pc.frame_change).unwrap(),
            });
            if args.raw {
                v["tau_raw"] = serde_json::to_value(&pc.tau_raw).unwrap();
            }
            Ok(Outcome::Pass(v))
        }
        Command::Classify(args) => {
            let tau = load_tau(&args.tau)?;
            let report = jacobian::vanishing_pattern(&tau, args.threshold_ratio, &policy)
                .map_err(|e| e.to_string())?;
            let consistent = report.verdict == jacobian::Verdict::ConsistentHyperelliptic;
            let v = serde_json::to_value(&report).unwrap();
            Ok(if consistent {
                Outcome::Pass(v)
            } else {
                Outcome::Fail(v)
            })
        }
        Command::Transport(args) => {
            let tau = load_tau(&args.tau)?;
            let report = jacobian::vanishing_pattern(&tau, args.threshold_ratio, &policy)
                .map_err(|e| e.to_string())?;
            let cert = jacobian::transport_to_standard(&tau, &report, &policy)
                .map_err(|e| e.to_string())?;
            Ok(Outcome::Pass(serde_json::to_value(&cert).unwrap()))
        }
        Command::Gunning(args) => {
            let tau = load_tau(&args.tau)?;
            let rep = jacobian::gunning_check(&tau, args.samples, cli.seed, &policy)
                .map_err(|e| e.to_string())?;
            let g = tau.genus();
            let passed = rep.max_dependence_ratio < 1e-6 && rep.gram_rank == g + 1;
            let v = serde_json::to_value(&rep).unwrap();
            Ok(if passed {
                Outcome::Pass(v)
            } else {
                Outcome::Fail(v)
            })
        }
        Command::Acceptance(args) => {
            let only: Option<Vec<usize>> = match &args.only {
                Some(s) => Some(
                    s.split(',')
                        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{e}")))
                        .collect::<Result<_, _>>()?,
                ),
                None => None,
            };
            let results = thetalocus::acceptance::run_all(cli.seed, only.as_deref());
            for r in &results {
                eprintln!("{}", r.line());
            }
            let all_pass = results.iter().all(|r| r.passed && r.within_budget());
            let v = json!({
                "seed": cli.seed,
                "passed": all_pass,
                "criteria": results,
            });
            Ok(if all_pass {
                Outcome::Pass(v)
            } else {
                Outcome::Fail(v)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(outcome) => {
            let (value, code) = match outcome {
                Outcome::Pass(v) => (v, ExitCode::SUCCESS),
                Outcome::Fail(v) => (v, ExitCode::from(1)),
            };
            let text = if cli.pretty {
                serde_json::to_string_pretty(&value).unwrap()
            } else {
                serde_json::to_string(&value).unwrap()
            };
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        eprintln!("error writing {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => {
                    let mut stdout = std::io::stdout();
                    let _ = writeln!(stdout, "{text}");
                }
            }
            code
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
