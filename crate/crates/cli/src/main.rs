//! `pfkit`: command-line front end for the power-flow polynomial toolkit.
//!
//! Machine-readable results go to stdout (CSV or JSON), diagnostics to
//! stderr. Exit codes: 0 success, 1 usage or input error, 2 numerical
//! failure.

use std::fmt::Write as _;
use std::io::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use pfkit::groebner::{
    buchberger, eliminate, load_equivalent_polynomial, loadability_polynomial, sample_curve, sample_load_equivalent,
    BuchbergerOptions, Ideal,
};
use pfkit::homotopy::{binomial_bound, cbb, solve_powerflow, SolveOptions};
use pfkit::moment::{
    build_mixed_sdpsocp, build_msos_c, build_msos_r, check_exactness_and_extract, MomentOptions, MomentRelaxation,
};
use pfkit::network::{load_case, powerflow_system, Network};
use pfkit::newton::{flat_start, newton_solve, NewtonOptions};
use pfkit::poly::{parse_system, rational_approx, Rational};
use pfkit::sdp::{solve, solve_sdpa, SdpOptions, SdpStatus, SdpaData};
use pfkit::{MonomialOrder, Ring};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "pfkit", version, about = "Power-flow equations as polynomial systems")]
struct Cli {
    /// Seed for every randomized step (echoed in all outputs).
    #[arg(long, global = true, env = "PFKIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Print progress and diagnostics to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a case file and summarise it.
    Validate { case: PathBuf },
    /// Newton-Raphson power flow from one starting point.
    Solve {
        case: PathBuf,
        /// `flat`, or a CSV with columns bus,V_d,V_q (as written by `solve`).
        #[arg(long, default_value = "flat")]
        start: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// All power-flow solutions by homotopy continuation.
    SolveAll {
        case: PathBuf,
        /// Worker threads for path tracking (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        /// Real solutions only, one row per bus and solution.
        #[arg(long)]
        csv: bool,
    },
    /// Solution-count bounds of a case.
    Bounds { case: PathBuf },
    /// Reduced lex Gröbner basis of a polynomial system file.
    Groebner {
        /// One polynomial per line; blank lines and `#` comments ignored.
        system: PathBuf,
        /// Variables, highest lex precedence first.
        #[arg(long, value_delimiter = ',', required = true)]
        order: Vec<String>,
        /// Keep only generators in the last `k` variables.
        #[arg(long)]
        eliminate: Option<usize>,
        /// Buchberger pair budget.
        #[arg(long, default_value_t = 1_000_000)]
        max_pairs: usize,
    },
    /// Two-bus loadability boundary points (V, P_L, Q_L).
    Loadability {
        #[arg(long, value_delimiter = ',', required = true)]
        vset: Vec<f64>,
        #[command(flatten)]
        line: LineArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        pl_min: f64,
        #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
        pl_max: f64,
        #[arg(long, default_value_t = 151)]
        points: usize,
        #[command(flatten)]
        plot: PlotArgs,
    },
    /// Source voltage against delivered active power for a fixed load (V, P).
    LoadEquivalent {
        #[arg(long, allow_hyphen_values = true)]
        pl: f64,
        #[arg(long, allow_hyphen_values = true)]
        ql: f64,
        #[command(flatten)]
        line: LineArgs,
        #[arg(long, default_value_t = 0.0)]
        vmin: f64,
        #[arg(long, default_value_t = 1.5)]
        vmax: f64,
        #[arg(long, default_value_t = 151)]
        points: usize,
        #[command(flatten)]
        plot: PlotArgs,
    },
    /// Moment relaxation of the OPF problem: export or solve.
    Moment {
        case: PathBuf,
        #[arg(long)]
        gamma: usize,
        /// Complex hierarchy instead of the real one.
        #[arg(long, conflicts_with = "mixed")]
        complex: bool,
        /// Mixed SDP/SOCP weakening (gamma >= 2).
        #[arg(long)]
        mixed: bool,
        /// Write the problem in SDPA sparse format instead of solving.
        #[arg(long, conflicts_with = "solve")]
        export: Option<PathBuf>,
        /// Solve with the embedded interior-point method (the default).
        #[arg(long)]
        solve: bool,
        #[arg(long, default_value_t = 5000)]
        max_moment_size: usize,
    },
    /// Solve an SDPA sparse file with the embedded interior-point method.
    SdpSolve { file: PathBuf },
}

#[derive(Args, Debug)]
struct LineArgs {
    /// Line resistance (decimal or fraction such as 1/4).
    #[arg(long, default_value = "1/4")]
    r: String,
    /// Line reactance (decimal or fraction).
    #[arg(long, default_value = "1/4")]
    x: String,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write a matplotlib script that plots the CSV.
    #[arg(long)]
    emit_plot_script: Option<PathBuf>,
}

/// Failure classes, mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
}

type Outcome = Result<(), Failure>;

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn numerical(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn numerical(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Numerical(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let seed = cli.seed;
    match &cli.command {
        Command::Validate { case } => validate(case, seed),
        Command::Solve { case, start, tol } => solve_one(case, start, *tol, seed),
        Command::SolveAll { case, threads, csv, .. } => solve_all_cmd(case, *threads, *csv, seed, cli.verbose),
        Command::Bounds { case } => bounds(case, seed),
        Command::Groebner {
            system,
            order,
            eliminate,
            max_pairs,
        } => groebner(system, order, *eliminate, *max_pairs, seed, cli.verbose),
        Command::Loadability {
            vset,
            line,
            pl_min,
            pl_max,
            points,
            plot,
        } => loadability(vset, line, *pl_min, *pl_max, *points, plot, seed),
        Command::LoadEquivalent {
            pl,
            ql,
            line,
            vmin,
            vmax,
            points,
            plot,
        } => load_equivalent(*pl, *ql, line, *vmin, *vmax, *points, plot, seed),
        Command::Moment {
            case,
            gamma,
            complex,
            mixed,
            export,
            max_moment_size,
            ..
        } => moment(case, *gamma, *complex, *mixed, export.as_deref(), *max_moment_size, seed, cli.verbose),
        Command::SdpSolve { file } => sdp_solve(file, seed),
    }
}

// ---------------------------------------------------------------------------
// Output helpers

/// Twelve fixed decimals: far below the solvers' tolerances yet above
/// round-off, so runs that differ only in floating-point noise (e.g. the
/// homotopy seed) print the same bytes. Negative zero prints as zero.
fn num(x: f64) -> String {
    let s = format!("{x:.12}");
    match s.strip_prefix('-') {
        Some(abs) if abs.bytes().all(|c| c == b'0' || c == b'.') => abs.to_string(),
        _ => s,
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn out(text: &str) -> Outcome {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Usage(e.into())),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Outcome {
    let text = serde_json::to_string(value).usage()?;
    out(&format!("{text}\n"))
}

/// `bus,V_d,V_q,|V|,angle` rows (angle in degrees).
fn voltage_rows(buf: &mut String, net: &Network, v: &[Complex64], prefix: &str) {
    for (b, z) in net.buses().iter().zip(v) {
        let _ = writeln!(
            buf,
            "{prefix}{},{},{},{},{}",
            b.id,
            num(z.re),
            num(z.im),
            num(z.norm()),
            num(z.arg().to_degrees())
        );
    }
}

fn read_case(path: &Path) -> Result<Network, Failure> {
    load_case(path).with_context(|| format!("reading case {}", path.display())).usage()
}

/// Decimal or `a/b` literal as an exact rational.
fn parse_rational(s: &str) -> anyhow::Result<Rational> {
    if let Ok(r) = s.trim().parse::<Rational>() {
        return Ok(r);
    }
    let v: f64 = s.trim().parse().map_err(|_| anyhow!("`{s}` is neither a fraction nor a number"))?;
    if !v.is_finite() {
        bail!("`{s}` is not finite");
    }
    Ok(rational_approx(v, 1 << 40))
}

fn emit(csv: &str, plot: &PlotArgs, title: &str, x: &str, y: &str, group: Option<&str>) -> Outcome {
    match &plot.output {
        Some(path) => fs::write(path, csv).with_context(|| format!("writing {}", path.display())).usage()?,
        None => out(csv)?,
    }
    if let Some(script) = &plot.emit_plot_script {
        let data = plot.output.as_ref().map_or("data.csv".to_string(), |p| p.display().to_string());
        let grouping = match group {
            Some(g) => format!(
                "for key, part in df.groupby({g:?}):\n    ax.plot(part[{x:?}], part[{y:?}], \".\", ms=2, label=f\"{g}={{key}}\")\nax.legend()\n"
            ),
            None => format!("ax.plot(df[{x:?}], df[{y:?}], \".\", ms=2)\n"),
        };
        let body = format!(
            "# Plots the CSV written by pfkit. Usage: python {name}\nimport pandas as pd\nimport matplotlib.pyplot as plt\n\n\
             df = pd.read_csv({data:?}, comment=\"#\")\nfig, ax = plt.subplots()\n{grouping}\
             ax.set_xlabel({x:?})\nax.set_ylabel({y:?})\nax.set_title({title:?})\nplt.show()\n",
            name = script.display()
        );
        fs::write(script, body).with_context(|| format!("writing {}", script.display())).usage()?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcommands

#[derive(Serialize)]
struct ValidateReport {
    valid: bool,
    buses: usize,
    lines: usize,
    slack: u32,
    pq: usize,
    pv: usize,
    opf_limits: bool,
    seed: u64,
}

fn validate(case: &Path, seed: u64) -> Outcome {
    let net = read_case(case)?;
    let kinds = |k| net.buses().iter().filter(|b| b.kind == k).count();
    print_json(&ValidateReport {
        valid: true,
        buses: net.nbuses(),
        lines: net.lines().len(),
        slack: net.buses()[net.slack()].id,
        pq: kinds(pfkit::network::BusKind::Pq),
        pv: kinds(pfkit::network::BusKind::Pv),
        opf_limits: pfkit::network::opf_constraints(&net).is_ok(),
        seed,
    })
}

/// Start vector `[Vd.., Vq..]` over the non-slack buses from a CSV file.
fn read_start(net: &Network, path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ns = net.non_slack();
    let m = ns.len();
    let mut x = flat_start(net);
    let mut seen = vec![false; m];
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("bus") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() < 3 {
            bail!("{}:{}: expected bus,V_d,V_q", path.display(), k + 1);
        }
        let id: u32 = cols[0].parse().with_context(|| format!("{}:{}: bus id", path.display(), k + 1))?;
        let vd: f64 = cols[1].parse().with_context(|| format!("{}:{}: V_d", path.display(), k + 1))?;
        let vq: f64 = cols[2].parse().with_context(|| format!("{}:{}: V_q", path.display(), k + 1))?;
        let pos = net.position(id).ok_or_else(|| anyhow!("{}:{}: unknown bus {id}", path.display(), k + 1))?;
        if let Some(j) = ns.iter().position(|&b| b == pos) {
            x[j] = vd;
            x[m + j] = vq;
            seen[j] = true;
        }
    }
    if let Some(j) = seen.iter().position(|s| !s) {
        bail!("{}: no row for bus {}", path.display(), net.buses()[ns[j]].id);
    }
    Ok(x)
}

fn solve_one(case: &Path, start: &str, tol: f64, seed: u64) -> Outcome {
    let net = read_case(case)?;
    let x0 = if start == "flat" { flat_start(&net) } else { read_start(&net, Path::new(start)).usage()? };
    if !(tol > 0.0) {
        return Err(Failure::Usage(anyhow!("--tol must be positive")));
    }
    let opts = NewtonOptions {
        tol,
        ..NewtonOptions::default()
    };
    let sol = newton_solve(&powerflow_system(&net), &x0, &opts).numerical()?;
    let v = net.full_voltages(&sol.solution.iter().map(|&r| Complex64::new(r, 0.0)).collect::<Vec<_>>());
    let mut buf = format!("# seed={seed}\n# iterations={} residual={:e}\nbus,V_d,V_q,|V|,angle\n", sol.iterations, sol.residual);
    voltage_rows(&mut buf, &net, &v, "");
    out(&buf)?;
    Ok(())
}

#[derive(Serialize)]
struct BoundsReport {
    paths_tracked: usize,
    cbb: u128,
    binomial: Option<u128>,
    n_found: usize,
}

#[derive(Serialize)]
struct SolutionRow {
    /// `[re, im]` per bus, slack included.
    voltages: Vec<[f64; 2]>,
    residual: f64,
    real: bool,
    singular: bool,
}

#[derive(Serialize)]
struct SolveAllReport {
    seed: u64,
    bounds: BoundsReport,
    diagnostics: pfkit::homotopy::Diagnostics,
    solutions: Vec<SolutionRow>,
}

fn solve_all_cmd(case: &Path, threads: Option<usize>, csv: bool, seed: u64, verbose: bool) -> Outcome {
    let net = read_case(case)?;
    if threads == Some(0) {
        return Err(Failure::Usage(anyhow!("--threads must be at least 1")));
    }
    let opts = SolveOptions {
        threads,
        ..SolveOptions::default()
    };
    let set = solve_powerflow(&net, seed, &opts).numerical()?;
    if verbose {
        eprintln!("{:?}", set.diagnostics);
    }
    let bounds = BoundsReport {
        paths_tracked: set.diagnostics.paths_tracked,
        cbb: set.bounds.cbb,
        binomial: set.bounds.binomial,
        n_found: set.n_found(),
    };
    if csv {
        let mut reals: Vec<Vec<Complex64>> = set
            .real_solutions
            .iter()
            .map(|x| net.full_voltages(&x.iter().map(|&r| Complex64::new(r, 0.0)).collect::<Vec<_>>()))
            .collect();
        // Descending |V| of the first non-slack bus, then the remaining
        // components: an order independent of the path numbering.
        reals.sort_by(|a, b| {
            let key = |v: &[Complex64]| v.iter().flat_map(|z| [-z.norm(), z.arg()]).collect::<Vec<f64>>();
            key(a).partial_cmp(&key(b)).unwrap()
        });
        let mut buf = format!(
            "# seed={seed}\n# paths_tracked={} cbb={} binomial={} n_found={}\nsolution,bus,V_d,V_q,|V|,angle\n",
            bounds.paths_tracked,
            bounds.cbb,
            bounds.binomial.map_or("-".into(), |b| b.to_string()),
            bounds.n_found
        );
        for (k, v) in reals.iter().enumerate() {
            voltage_rows(&mut buf, &net, v, &format!("{},", k + 1));
        }
        out(&buf)?;
        return Ok(());
    }
    let solutions = set
        .complex_solutions
        .iter()
        .map(|s| SolutionRow {
            voltages: net.full_voltages(&s.point).iter().map(|z| [z.re, z.im]).collect(),
            residual: s.residual,
            real: s.is_real,
            singular: s.singular,
        })
        .collect();
    print_json(&SolveAllReport {
        seed,
        bounds,
        diagnostics: set.diagnostics,
        solutions,
    })
}

#[derive(Serialize)]
struct BoundsOnly {
    cbb: u128,
    binomial: u128,
    seed: u64,
}

fn bounds(case: &Path, seed: u64) -> Outcome {
    let net = read_case(case)?;
    print_json(&BoundsOnly {
        cbb: cbb(&powerflow_system(&net)),
        binomial: binomial_bound(net.nbuses()).usage()?,
        seed,
    })
}

fn groebner(system: &Path, order: &[String], keep: Option<usize>, max_pairs: usize, seed: u64, verbose: bool) -> Outcome {
    let text = fs::read_to_string(system).with_context(|| format!("reading {}", system.display())).usage()?;
    let ring = Ring::new(order).usage()?;
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let gens = parse_system::<Rational>(&ring, &body).usage()?;
    let ideal = Ideal::new(&ring, gens, MonomialOrder::lex_natural(ring.nvars())).usage()?;
    let gb = buchberger(&ideal, &BuchbergerOptions { max_pairs }).numerical()?;
    if verbose {
        eprintln!("{} pairs, {} zero reductions", gb.pairs_processed, gb.zero_reductions);
    }
    let polys = match keep {
        Some(k) if k > ring.nvars() => return Err(Failure::Usage(anyhow!("--eliminate {k} exceeds the {} variables", ring.nvars()))),
        Some(k) => eliminate(&gb, k).numerical()?,
        None => gb.basis.clone(),
    };
    let mut buf = format!("# seed={seed}\n");
    for p in &polys {
        let _ = writeln!(buf, "{}", p.to_text_with(&gb.order));
    }
    out(&buf)?;
    Ok(())
}

fn loadability(vset: &[f64], line: &LineArgs, pl_min: f64, pl_max: f64, points: usize, plot: &PlotArgs, seed: u64) -> Outcome {
    let (r, x) = (parse_rational(&line.r).usage()?, parse_rational(&line.x).usage()?);
    let curve = loadability_polynomial(&r, &x).numerical()?;
    let mut buf = format!("# seed={seed}\n# boundary: {curve} = 0\nV,P_L,Q_L\n");
    for &v in vset {
        for (pl, ql) in sample_curve(&curve, v, pl_min, pl_max, points).numerical()? {
            let _ = writeln!(buf, "{},{},{}", num(v), num(pl), num(ql));
        }
    }
    emit(&buf, plot, "Loadability boundary", "P_L", "Q_L", Some("V"))
}

#[allow(clippy::too_many_arguments)]
fn load_equivalent(pl: f64, ql: f64, line: &LineArgs, vmin: f64, vmax: f64, points: usize, plot: &PlotArgs, seed: u64) -> Outcome {
    let (r, x) = (parse_rational(&line.r).usage()?, parse_rational(&line.x).usage()?);
    let curve = load_equivalent_polynomial(&r, &x).numerical()?;
    let mut buf = format!("# seed={seed}\n# curve: {curve} = 0\nV,P\n");
    for (v, p) in sample_load_equivalent(&curve, pl, ql, vmin, vmax, points).numerical()? {
        let _ = writeln!(buf, "{},{}", num(v), num(p));
    }
    emit(&buf, plot, "Load equivalent", "V", "P", None)
}

#[derive(Serialize)]
struct ExportReport<'a> {
    file: String,
    relaxation: &'a str,
    gamma: usize,
    moment_size: usize,
    constraints: usize,
    blocks: usize,
    objective_offset: f64,
    seed: u64,
}

#[allow(clippy::too_many_arguments)]
fn moment(case: &Path, gamma: usize, complex: bool, mixed: bool, export: Option<&Path>, max_size: usize, seed: u64, verbose: bool) -> Outcome {
    let net = read_case(case)?;
    let opts = MomentOptions {
        max_moment_size: max_size,
        ..MomentOptions::default()
    };
    let (name, relax): (&str, MomentRelaxation) = if mixed {
        ("mixed", build_mixed_sdpsocp(&net, gamma, &opts).usage()?)
    } else if complex {
        ("complex", build_msos_c(&net, gamma, &opts).usage()?)
    } else {
        ("real", build_msos_r(&net, gamma, &opts).usage()?)
    };
    if verbose {
        eprintln!(
            "{name} relaxation: {} lifted variables, {} blocks, {} equations",
            relax.problem.nvars(),
            relax.problem.blocks.len(),
            relax.problem.equations.len()
        );
    }
    if let Some(path) = export {
        let pre = relax.problem.presolve().numerical()?;
        let text = format!("{OFFSET_TAG}{}\n{}", pre.objective_offset, pre.data.to_sdpa_string());
        fs::write(path, text).with_context(|| format!("writing {}", path.display())).usage()?;
        return print_json(&ExportReport {
            file: path.display().to_string(),
            relaxation: name,
            gamma,
            moment_size: relax.moment_size,
            constraints: pre.data.m(),
            blocks: pre.data.block_sizes.len(),
            objective_offset: pre.objective_offset,
            seed,
        });
    }
    let sol = solve(&relax.problem, &SdpOptions::default()).map_err(|e| match e {
        pfkit::sdp::SdpError::OverSize { .. } => Failure::Usage(anyhow!("{e}; use --export and an external solver")),
        other => Failure::Numerical(other.into()),
    })?;
    let report = check_exactness_and_extract(&relax, &sol).numerical()?;
    let mut buf = format!(
        "# seed={seed}\n# relaxation={name} gamma={gamma} status={:?} iterations={}\n# bound={} rank={} eigenvalue_ratio={:e} certified={}\n",
        sol.status,
        sol.iterations,
        num(sol.primal_objective),
        report.rank_estimate,
        report.eigenvalue_ratio,
        report.certified
    );
    if let (Some(obj), Some(viol)) = (report.extracted_objective, report.max_violation) {
        let _ = writeln!(buf, "# extracted_objective={} max_violation={viol:e}", num(obj));
    }
    buf.push_str("bus,V_d,V_q,|V|,angle\n");
    if let Some(v) = &report.extracted_voltages {
        voltage_rows(&mut buf, &net, v, "");
    }
    out(&buf)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Failure::Numerical(anyhow!(
            "solver stopped with status {:?}: {}",
            sol.status,
            sol.message.unwrap_or_default()
        )));
    }
    Ok(())
}

/// Comment line carrying the constant dropped from the exported objective;
/// SDPA readers skip lines starting with `*`.
const OFFSET_TAG: &str = "* objective_offset = ";

#[derive(Serialize)]
struct SdpReport {
    status: SdpStatus,
    primal_objective: f64,
    dual_objective: f64,
    relative_gap: f64,
    iterations: usize,
    x: Vec<f64>,
    message: Option<String>,
    /// Present when the file came from `pfkit moment --export`.
    objective_offset: Option<f64>,
    /// `primal_objective + objective_offset`: the relaxation bound.
    bound: Option<f64>,
    seed: u64,
}

fn sdp_solve(file: &Path, seed: u64) -> Outcome {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display())).usage()?;
    let data = SdpaData::parse(&text).with_context(|| format!("parsing {}", file.display())).usage()?;
    let offset = text
        .lines()
        .find_map(|l| l.strip_prefix(OFFSET_TAG))
        .map(|v| v.trim().parse::<f64>())
        .transpose()
        .with_context(|| format!("{}: bad objective offset", file.display()))
        .usage()?;
    let sol = solve_sdpa(&data, &SdpOptions::default()).usage()?;
    print_json(&SdpReport {
        status: sol.status,
        primal_objective: sol.primal_objective,
        dual_objective: sol.dual_objective,
        relative_gap: sol.relative_gap(),
        iterations: sol.iterations,
        x: sol.x.clone(),
        message: sol.message.clone(),
        objective_offset: offset,
        bound: offset.map(|c| sol.primal_objective + c),
        seed,
    })?;
    if sol.status != SdpStatus::Optimal {
        return Err(Failure::Numerical(anyhow!("solver stopped with status {:?}", sol.status)));
    }
    Ok(())
}
