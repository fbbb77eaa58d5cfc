use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use homobounds::gclosure::{boundary_curve_sample, g_membership, GMembershipReport, GVerdict, Side};
use homobounds::hashin::{hs_b, hs_m, hs_radial_oracle, CoatingConfig, HsCase};
use homobounds::homog1d::{bounds_1d, bsharp_1d, convergence_study, homogenized_energy, invert_theta_ab, Profile1D, Source1D};
use homobounds::laminates::{overlap_window, seq_a, seq_b_const, seq_b_pp, simple_laminate_pair, Core, LaminateSpec, Relation};
use homobounds::pairbounds::{classify_region, fibre_mix, pair_membership, PairBoundReport};
use homobounds::relaxation::{odp_bruteforce_1d, odp_relaxed_min_1d, oodp_bruteforce_1d, oodp_relaxed_min_1d};
use homobounds::sweep::feasibility_sweep;
use homobounds::{Error, PhaseA, PhaseB, SymTensor};

#[derive(Parser)]
#[command(name = "homobounds", version, about = "Bounds and microstructures for relative limits of two-phase composites")]
struct Cli {
    /// Boundary tolerance
    #[arg(long, env = "HOMOBOUNDS_TOL", default_value_t = 1e-9, global = true)]
    tol: f64,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// G-closure membership and boundary curves
    #[command(subcommand)]
    Gset(GsetCmd),
    /// Trace-bound membership of a pair (A*, B#)
    #[command(subcommand)]
    Pair(PairCmd),
    /// Simple and sequential laminates
    #[command(subcommand)]
    Laminate(LaminateCmd),
    /// Coated-sphere assemblages
    Hashin(HashinArgs),
    /// One-dimensional relative limits
    #[command(subcommand)]
    Oned(OnedCmd),
    /// Optimal design: brute force vs relaxed minimum
    Odp(OdpArgs),
    /// Oscillation-dissipation design: brute force vs relaxed minimum
    Oodp(OodpArgs),
    /// Region and 1-D bound grid over (thetaA, thetaB)
    Phase(PhaseGridArgs),
}

#[derive(Args, Clone)]
struct AArgs {
    /// a1,a2 or a1,a2,thetaA
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    a: Vec<f64>,
    /// thetaA (volume fraction of a1)
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args, Clone)]
struct BArgs {
    /// b1,b2 or b1,b2,thetaB
    #[arg(long, value_delimiter = ',', default_value = "1,3")]
    b: Vec<f64>,
    /// thetaB (volume fraction of b1)
    #[arg(long)]
    theta_b: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Lower,
    Upper,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoreArg {
    A1,
    A2,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    #[value(name = "A_subset_B")]
    ASubsetB,
    #[value(name = "B_subset_A")]
    BSubsetA,
    #[value(name = "disjoint")]
    Disjoint,
    #[value(name = "complement_cover")]
    ComplementCover,
    #[value(name = "const_b")]
    ConstB,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    #[value(name = "2a")]
    Case2a,
    #[value(name = "2b")]
    Case2b,
    #[value(name = "2c")]
    Case2c,
    #[value(name = "2d")]
    Case2d,
    Const,
}

#[derive(Subcommand)]
enum GsetCmd {
    /// Classify A* against G_theta
    Check {
        #[command(flatten)]
        a: AArgs,
        /// A* as JSON rows, e.g. "[[1.5,0],[0,1.5]]"
        #[arg(long, required_unless_present = "input")]
        astar: Option<String>,
        /// JSON file with {pa, astar}, or the output of a previous check
        #[arg(long)]
        input: Option<PathBuf>,
        /// Exit 1 if A* is outside
        #[arg(long)]
        assert: bool,
    },
    /// Points on a boundary curve of G_theta (N = 2)
    Sample {
        #[command(flatten)]
        a: AArgs,
        #[arg(long, value_enum, default_value = "lower")]
        side: SideArg,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Subcommand)]
enum PairCmd {
    /// Chain, G-set and region trace bounds for one pair
    Check {
        #[command(flatten)]
        a: AArgs,
        #[command(flatten)]
        b: BArgs,
        #[arg(long, required_unless_present = "input")]
        astar: Option<String>,
        #[arg(long, required_unless_present = "input")]
        bsharp: Option<String>,
        /// JSON file with {pa, pb, astar, bsharp}, or the output of a previous check
        #[arg(long)]
        input: Option<PathBuf>,
        /// Exit 1 if the pair is infeasible
        #[arg(long)]
        assert: bool,
    },
    /// Seeded random composites from every constructor, one row each
    Sweep {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Exit 1 on any unexpected infeasible row
        #[arg(long)]
        assert: bool,
    },
    /// Weights of B# between the two extreme relative limits over A* (region L1U1)
    Mix {
        #[command(flatten)]
        a: AArgs,
        #[command(flatten)]
        b: BArgs,
        #[arg(long)]
        astar: String,
        #[arg(long)]
        bsharp: String,
    },
}

#[derive(Subcommand)]
enum LaminateCmd {
    /// Rank-one laminate with overlap fraction thetaAB
    Simple {
        #[command(flatten)]
        a: AArgs,
        #[command(flatten)]
        b: BArgs,
        #[arg(long)]
        theta_ab: f64,
        #[arg(long, default_value_t = 0)]
        axis: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        assert: bool,
    },
    /// Rank-p sequential laminate
    Seq {
        #[command(flatten)]
        a: AArgs,
        #[command(flatten)]
        b: BArgs,
        #[arg(long, value_enum)]
        relation: RelationArg,
        /// Needed for const_b; otherwise fixed by the relation
        #[arg(long, value_enum)]
        core: Option<CoreArg>,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Laminate spec JSON (directions, weights, core, relation) instead of axes
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        assert: bool,
    },
}

#[derive(Args)]
struct HashinArgs {
    #[command(flatten)]
    a: AArgs,
    #[command(flatten)]
    b: BArgs,
    #[arg(long, value_enum)]
    case: CaseArg,
    /// Core phase for the const case
    #[arg(long, value_enum, default_value = "a1")]
    core: CoreArg,
    /// Constant b for the const case (default b1)
    #[arg(long)]
    b_const: Option<f64>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Also run the radial quadrature with this many points
    #[arg(long)]
    oracle: Option<usize>,
    #[arg(long)]
    assert: bool,
}

#[derive(Subcommand)]
enum OnedCmd {
    /// The four closed forms and the valid interval
    Bounds {
        #[command(flatten)]
        a: AArgs,
        #[command(flatten)]
        b: BArgs,
    },
    /// Overlap fraction realizing a target b#
    Invert {
        #[command(flatten)]
        a: AArgs,
        #[command(flatten)]
        b: BArgs,
        #[arg(long)]
        target: f64,
    },
    /// Energy of the periodic state against the homogenized energy
    Converge {
        #[command(flatten)]
        a: AArgs,
        #[command(flatten)]
        b: BArgs,
        /// "nested", "disjoint", or a profile JSON file
        #[arg(long, default_value = "nested")]
        profile: String,
        #[arg(long, value_delimiter = ',', default_value = "4,16,64,256")]
        periods: Vec<usize>,
        /// Constant source
        #[arg(long, default_value_t = 1.0)]
        f: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Exit 1 unless the last relative error is at most this
        #[arg(long)]
        assert_rel: Option<f64>,
    },
}

#[derive(Args)]
struct OdpArgs {
    #[command(flatten)]
    a: AArgs,
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 6)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    /// Golden-section scan resolution for the relaxed minimum
    #[arg(long, default_value_t = 48)]
    scan: usize,
    /// Exit 1 if brute force falls below the relaxed minimum
    #[arg(long)]
    assert: bool,
}

#[derive(Args)]
struct OodpArgs {
    #[command(flatten)]
    a: AArgs,
    #[command(flatten)]
    b: BArgs,
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 6)]
    ka: usize,
    #[arg(long, default_value_t = 6)]
    kb: usize,
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    #[arg(long, default_value_t = 48)]
    scan: usize,
    #[arg(long)]
    assert: bool,
}

#[derive(Args)]
struct PhaseGridArgs {
    #[command(flatten)]
    a: AArgs,
    #[command(flatten)]
    b: BArgs,
    /// Grid points per axis, endpoints included
    #[arg(long, default_value_t = 21)]
    grid: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

enum Failure {
    Usage(String),
    Assert(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::ChainViolation { .. } => Failure::Assert(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

struct Report {
    text: String,
    failed: Option<String>,
}

impl Report {
    fn ok(text: String) -> Report {
        Report { text, failed: None }
    }

    fn check(text: String, assert: bool, pass: bool, msg: &str) -> Report {
        Report { text, failed: (assert && !pass).then(|| msg.to_string()) }
    }
}

type Out = Result<Report, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl AArgs {
    fn phase(&self, tol: f64) -> Result<PhaseA, Failure> {
        let (a1, a2, t) = match self.a[..] {
            [a1, a2] => (a1, a2, None),
            [a1, a2, t] => (a1, a2, Some(t)),
            _ => return Err(usage("--a takes a1,a2 or a1,a2,thetaA")),
        };
        let theta = self.theta.or(t).unwrap_or(0.5);
        // the bounds divide by (a2-a1)^2
        if a2 > a1 && ((a2 - a1) / a2).powi(2) <= tol {
            return Err(usage(format!("a1 < a2 violated at tolerance {tol}: a1={a1}, a2={a2}")));
        }
        Ok(PhaseA::new(a1, a2, theta)?)
    }
}

impl BArgs {
    fn phase(&self) -> Result<PhaseB, Failure> {
        let (b1, b2, t) = match self.b[..] {
            [b1, b2] => (b1, b2, None),
            [b1, b2, t] => (b1, b2, Some(t)),
            _ => return Err(usage("--b takes b1,b2 or b1,b2,thetaB")),
        };
        Ok(PhaseB::new(b1, b2, self.theta_b.or(t).unwrap_or(0.5))?)
    }
}

fn tensor(s: &str) -> Result<SymTensor, Failure> {
    serde_json::from_str(s).map_err(|e| usage(format!("bad tensor {s:?}: {e}")))
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Reads `path` as `T`, accepting either the bare input or a report with an `input` field.
fn read_input<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if let Some(inner) = v.get_mut("input") {
        v = inner.take();
    }
    serde_json::from_value(v).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn table<R: Serialize>(rows: &[R], format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => Ok(to_json(&rows)),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(vec![]);
            for r in rows {
                w.serialize(r).map_err(|e| usage(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| usage(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

fn verdict_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

#[derive(Serialize, Deserialize)]
struct GsetInput {
    pa: PhaseA,
    astar: SymTensor,
}

#[derive(Serialize)]
struct GsetOutput<'a> {
    input: &'a GsetInput,
    eigenvalues: Vec<f64>,
    report: GMembershipReport,
}

#[derive(Serialize)]
struct SampleRow {
    lambda1: f64,
    lambda2: f64,
    verdict: String,
}

fn cmd_gset(cmd: GsetCmd, tol: f64) -> Out {
    match cmd {
        GsetCmd::Check { a, astar, input, assert } => {
            let inp = match input {
                Some(p) => {
                    let i: GsetInput = read_input(&p)?;
                    GsetInput { pa: PhaseA::new(i.pa.a1, i.pa.a2, i.pa.theta)?, astar: i.astar }
                }
                None => GsetInput { pa: a.phase(tol)?, astar: tensor(astar.as_deref().unwrap_or_default())? },
            };
            let report = g_membership(&inp.astar, &inp.pa, tol)?;
            let inside = report.verdict != GVerdict::Outside;
            let out = GsetOutput { input: &inp, eigenvalues: inp.astar.eig().values, report };
            Ok(Report::check(to_json(&out), assert, inside, "A* outside the G-closure"))
        }
        GsetCmd::Sample { a, side, n, format } => {
            let pa = a.phase(tol)?;
            let side = match side {
                SideArg::Lower => Side::Lower,
                SideArg::Upper => Side::Upper,
            };
            let rows = boundary_curve_sample(&pa, side, n)
                .into_iter()
                .map(|(l1, l2)| {
                    let r = g_membership(&SymTensor::diag(&[l1, l2])?, &pa, tol)?;
                    Ok(SampleRow { lambda1: l1, lambda2: l2, verdict: verdict_name(&r.verdict) })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            Ok(Report::ok(table(&rows, format)?))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PairInput {
    pa: PhaseA,
    pb: PhaseB,
    astar: SymTensor,
    bsharp: SymTensor,
}

#[derive(Serialize)]
struct PairOutput<'a> {
    input: &'a PairInput,
    report: PairBoundReport,
}

#[derive(Serialize)]
struct SweepCsvRow {
    index: u64,
    kind: String,
    detail: String,
    region: String,
    verdict: String,
    min_slack: f64,
    li_slack: Option<f64>,
    uj_slack: Option<f64>,
    uj_variant_slack: Option<f64>,
    commutator: f64,
    l1_counterexample: bool,
    expected: bool,
}

fn pair_report(inp: &PairInput, tol: f64, assert: bool) -> Out {
    let report = pair_membership(&inp.astar, &inp.bsharp, &inp.pa, &inp.pb, tol)?;
    let ok = report.is_feasible();
    Ok(Report::check(to_json(&PairOutput { input: inp, report }), assert, ok, "pair infeasible"))
}

fn cmd_pair(cmd: PairCmd, tol: f64) -> Out {
    match cmd {
        PairCmd::Check { a, b, astar, bsharp, input, assert } => {
            let inp = match input {
                Some(p) => {
                    let i: PairInput = read_input(&p)?;
                    PairInput {
                        pa: PhaseA::new(i.pa.a1, i.pa.a2, i.pa.theta)?,
                        pb: PhaseB::new(i.pb.b1, i.pb.b2, i.pb.theta)?,
                        ..i
                    }
                }
                None => PairInput {
                    pa: a.phase(tol)?,
                    pb: b.phase()?,
                    astar: tensor(astar.as_deref().unwrap_or_default())?,
                    bsharp: tensor(bsharp.as_deref().unwrap_or_default())?,
                },
            };
            pair_report(&inp, tol, assert)
        }
        PairCmd::Sweep { seed, count, format, assert } => {
            let rows = feasibility_sweep(seed, count, tol)?;
            let all_expected = rows.iter().all(|r| r.is_expected());
            let text = match format {
                Format::Json => to_json(&rows),
                Format::Csv => {
                    let flat: Vec<SweepCsvRow> = rows
                        .iter()
                        .map(|r| SweepCsvRow {
                            index: r.index,
                            kind: verdict_name(&r.kind),
                            detail: r.detail.clone(),
                            region: r.region.name().to_string(),
                            verdict: verdict_name(&r.report.verdict),
                            min_slack: r.min_slack,
                            li_slack: r.report.li_slack,
                            uj_slack: r.report.uj_slack,
                            uj_variant_slack: r.report.uj_variant_slack,
                            commutator: r.commutator,
                            l1_counterexample: r.l1_counterexample,
                            expected: r.is_expected(),
                        })
                        .collect();
                    table(&flat, Format::Csv)?
                }
            };
            Ok(Report::check(text, assert, all_expected, "unexpected infeasible composite in sweep"))
        }
        PairCmd::Mix { a, b, astar, bsharp } => {
            let (pa, pb) = (a.phase(tol)?, b.phase()?);
            let m = fibre_mix(&tensor(&astar)?, &tensor(&bsharp)?, &pa, &pb)?;
            Ok(Report::ok(to_json(&m)))
        }
    }
}

fn cmd_laminate(cmd: LaminateCmd, tol: f64) -> Out {
    match cmd {
        LaminateCmd::Simple { a, b, theta_ab, axis, n, assert } => {
            let (pa, pb) = (a.phase(tol)?, b.phase()?);
            let (astar, bsharp) = simple_laminate_pair(&pa, &pb, theta_ab, axis, n)?;
            pair_report(&PairInput { pa, pb, astar, bsharp }, tol, assert)
        }
        LaminateCmd::Seq { a, b, relation, core, p, n, spec, assert } => {
            let (pa, mut pb) = (a.phase(tol)?, b.phase()?);
            let relation = match relation {
                RelationArg::ASubsetB => Relation::ASubsetB,
                RelationArg::BSubsetA => Relation::BSubsetA,
                RelationArg::Disjoint => Relation::Disjoint,
                RelationArg::ComplementCover => Relation::ComplementCover,
                RelationArg::ConstB => Relation::ConstB,
            };
            let core = match (relation.required_core(), core) {
                (Some(c), _) => c,
                (None, Some(CoreArg::A1)) => Core::A1,
                (None, Some(CoreArg::A2)) => Core::A2,
                (None, None) => return Err(usage("const_b needs --core")),
            };
            let spec = match spec {
                Some(path) => {
                    let s: LaminateSpec = read_input(&path)?;
                    s.validate()?;
                    s
                }
                None => LaminateSpec::axes(n, p, core, relation)?,
            };
            let astar = seq_a(&spec, &pa)?;
            let bsharp = if spec.relation == Relation::ConstB {
                pb = PhaseB::constant(pb.b1)?;
                seq_b_const(&spec, &pa, pb.b1)?
            } else {
                seq_b_pp(&spec, &pa, &pb)?
            };
            pair_report(&PairInput { pa, pb, astar, bsharp }, tol, assert)
        }
    }
}

fn cmd_hashin(args: HashinArgs, tol: f64) -> Out {
    let pa = args.a.phase(tol)?;
    let pb = args.b.phase()?;
    let (cfg, pb_used) = match args.case {
        CaseArg::Const => {
            let b = args.b_const.unwrap_or(pb.b1);
            let core = match args.core {
                CoreArg::A1 => Core::A1,
                CoreArg::A2 => Core::A2,
            };
            (CoatingConfig::constant(core, b), PhaseB::constant(b)?)
        }
        c => {
            let case = match c {
                CaseArg::Case2a => HsCase::Case2a,
                CaseArg::Case2b => HsCase::Case2b,
                CaseArg::Case2c => HsCase::Case2c,
                _ => HsCase::Case2d,
            };
            (CoatingConfig::case(case), pb)
        }
    };
    let two_phase = if matches!(args.case, CaseArg::Const) { None } else { Some(&pb) };
    let case = cfg.classify(&pa, two_phase)?;
    let m = hs_m(&pa, cfg.core_a, args.n)?;
    let b = hs_b(&pa, two_phase, &cfg, args.n)?;
    let oracle = match args.oracle {
        Some(points) => Some(hs_radial_oracle(&pa, two_phase, &cfg, args.n, points)?),
        None => None,
    };
    let astar = SymTensor::scalar(args.n, m)?;
    let bsharp = SymTensor::scalar(args.n, b)?;
    let report = pair_membership(&astar, &bsharp, &pa, &pb_used, tol)?;
    let ok = report.is_feasible();
    let out = json!({
        "input": { "pa": pa, "pb": pb_used, "config": cfg, "n": args.n },
        "case": case,
        "m": m,
        "b": b,
        "oracle_b": oracle,
        "report": report,
    });
    Ok(Report::check(to_json(&out), args.assert, ok, "coated-sphere pair infeasible"))
}

#[derive(Serialize)]
struct ConvCsvRow {
    periods: usize,
    eps: f64,
    energy: f64,
    error: f64,
    rel_error: f64,
}

fn load_profile(name: &str) -> Result<Profile1D, Failure> {
    match name {
        "nested" => Ok(Profile1D::nested(1)),
        "disjoint" => Ok(Profile1D::disjoint(1)),
        path => {
            let p: Profile1D = read_input(Path::new(path))?;
            p.validate()?;
            Ok(p)
        }
    }
}

fn cmd_oned(cmd: OnedCmd, tol: f64) -> Out {
    match cmd {
        OnedCmd::Bounds { a, b } => {
            let (pa, pb) = (a.phase(tol)?, b.phase()?);
            let out = json!({
                "input": { "pa": pa, "pb": pb },
                "window": overlap_window(&pa, &pb),
                "bounds": bounds_1d(&pa, &pb),
            });
            Ok(Report::ok(to_json(&out)))
        }
        OnedCmd::Invert { a, b, target } => {
            let (pa, pb) = (a.phase(tol)?, b.phase()?);
            let (t, profile) = invert_theta_ab(&pa, &pb, target)?;
            let realized = bsharp_1d(&pa, &pb, t)?;
            let out = json!({
                "input": { "pa": pa, "pb": pb, "target": target },
                "thetaAB": t,
                "bsharp": realized,
                "profile": profile,
            });
            Ok(Report::ok(to_json(&out)))
        }
        OnedCmd::Converge { a, b, profile, periods, f, format, assert_rel } => {
            let (pa, pb) = (a.phase(tol)?, b.phase()?);
            let p = load_profile(&profile)?;
            let src = Source1D::constant(f);
            let target = homogenized_energy(&p, &pa, &pb, &src)?;
            let rows: Vec<ConvCsvRow> = convergence_study(&p, &pa, &pb, &src, &periods)?
                .into_iter()
                .map(|r| ConvCsvRow {
                    periods: r.periods,
                    eps: r.eps,
                    energy: r.energy,
                    error: r.error,
                    rel_error: r.error / target.abs(),
                })
                .collect();
            let last = rows.last().map_or(0.0, |r| r.rel_error);
            let text = table(&rows, format)?;
            match assert_rel {
                Some(limit) => Ok(Report::check(text, true, last <= limit, "final relative error above limit")),
                None => Ok(Report::ok(text)),
            }
        }
    }
}

fn cmd_odp(args: OdpArgs, tol: f64) -> Out {
    let pa = args.a.phase(tol)?;
    let src = Source1D::constant(args.f);
    let brute = odp_bruteforce_1d(args.n, args.k, &pa, &src)?;
    let relaxed = odp_relaxed_min_1d(args.k as f64 / args.n as f64, &pa, &src, args.n, args.scan)?;
    let ok = brute.value >= relaxed.value - tol * relaxed.value.abs().max(1.0);
    let out = json!({
        "input": { "pa": pa, "n": args.n, "k": args.k, "f": args.f },
        "brute": brute,
        "relaxed": relaxed,
    });
    Ok(Report::check(to_json(&out), args.assert, ok, "brute-force minimum below relaxed minimum"))
}

fn cmd_oodp(args: OodpArgs, tol: f64) -> Out {
    let (pa, pb) = (args.a.phase(tol)?, args.b.phase()?);
    let src = Source1D::constant(args.f);
    let n = args.n as f64;
    let brute = oodp_bruteforce_1d(args.n, args.ka, args.kb, &pa, &pb, &src)?;
    let relaxed = oodp_relaxed_min_1d(args.ka as f64 / n, args.kb as f64 / n, &pa, &pb, &src, args.n, args.scan)?;
    let ok = brute.value >= relaxed.value - tol * relaxed.value.abs().max(1.0);
    let out = json!({
        "input": { "pa": pa, "pb": pb, "n": args.n, "kA": args.ka, "kB": args.kb, "f": args.f },
        "brute": brute,
        "relaxed": relaxed,
    });
    Ok(Report::check(to_json(&out), args.assert, ok, "brute-force minimum below relaxed minimum"))
}

#[derive(Serialize)]
struct PhaseRow {
    #[serde(rename = "thetaA")]
    theta_a: f64,
    #[serde(rename = "thetaB")]
    theta_b: f64,
    region: String,
    overlap_lower: f64,
    overlap_upper: f64,
    bsharp_lower: f64,
    bsharp_upper: f64,
}

fn cmd_phase(args: PhaseGridArgs, tol: f64) -> Out {
    let (pa, pb) = (args.a.phase(tol)?, args.b.phase()?);
    if args.grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    let at = |i: usize| i as f64 / (args.grid - 1) as f64;
    let mut rows = Vec::with_capacity(args.grid * args.grid);
    for i in 0..args.grid {
        for j in 0..args.grid {
            let pa = pa.with_theta(at(i));
            let pb = PhaseB::new(pb.b1, pb.b2, at(j))?;
            let w = overlap_window(&pa, &pb);
            let bd = bounds_1d(&pa, &pb);
            rows.push(PhaseRow {
                theta_a: pa.theta,
                theta_b: pb.theta,
                region: classify_region(&pa, &pb).name().to_string(),
                overlap_lower: w.lower,
                overlap_upper: w.upper,
                bsharp_lower: bd.lower,
                bsharp_upper: bd.upper,
            });
        }
    }
    Ok(Report::ok(table(&rows, args.format)?))
}

fn run(cli: Cli) -> Out {
    let tol = cli.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(usage(format!("tolerance must be positive, got {tol}")));
    }
    match cli.cmd {
        Cmd::Gset(c) => cmd_gset(c, tol),
        Cmd::Pair(c) => cmd_pair(c, tol),
        Cmd::Laminate(c) => cmd_laminate(c, tol),
        Cmd::Hashin(a) => cmd_hashin(a, tol),
        Cmd::Oned(c) => cmd_oned(c, tol),
        Cmd::Odp(a) => cmd_odp(a, tol),
        Cmd::Oodp(a) => cmd_oodp(a, tol),
        Cmd::Phase(a) => cmd_phase(a, tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = cli.out.clone();
    match run(cli) {
        Ok(report) => {
            let written = match &out_path {
                Some(p) => std::fs::write(p, &report.text),
                None => std::io::stdout().write_all(report.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            match report.failed {
                Some(msg) => {
                    eprintln!("assertion failed: {msg}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Assert(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(1)
        }
    }
}
