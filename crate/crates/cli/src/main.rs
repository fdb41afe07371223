//! `sdlab`: command-line front end for the sigma-delta toolkit.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 invariance violation,
//! 3 infeasible parameters, 4 divergence. Data goes to `--out` (or stdout),
//! diagnostics to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sdlab_core::certificate::{self, StabilityCertificate, Variant};
use sdlab_core::invariance::{self, InvarianceProbe, InvarianceReport};
use sdlab_core::quantizer::{self, QuantizerKind, SchemeParams, TRAJECTORY_HEADER};
use sdlab_core::region::RegionSpec;
use sdlab_core::signal::{self, FilterDesign, Scheme, Taper};
use sdlab_core::sweep::{self, InputMode, SweepConfig};
use sdlab_core::{format::g17, Error};

const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser, Debug)]
#[command(name = "sdlab", version, about = "Chaotic second-order sigma-delta quantization lab")]
struct Cli {
    /// Worker threads for parallel operations (default: all processors).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// PRNG seed.
    #[arg(long, global = true, env = "SD_LAB_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Print timing and summaries to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the double-loop recursion and write its trajectory as CSV.
    Simulate(SimulateArgs),
    /// Compute a stability certificate as JSON.
    Certificate(CertificateArgs),
    /// Export the invariant region boundary as CSV.
    Region(RegionArgs),
    /// Check region invariance of a certificate by sampling.
    Verify(VerifyArgs),
    /// Measure reconstruction error against the sampling rate.
    Reconstruct(ReconstructArgs),
    /// Run a figure sweep.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InputKind {
    Constant,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum QuantizerArg {
    Sign,
    Trilevel,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    #[value(alias = "eq5-literal")]
    Eq5,
    #[value(alias = "remark-derived")]
    Remark,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Eq5 => Variant::Eq5Literal,
            VariantArg::Remark => Variant::RemarkDerived,
        }
    }
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArg {
    fn open(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    lambda1: f64,
    #[arg(long)]
    lambda2: f64,
    #[arg(long)]
    gamma: f64,
    /// Input level (constant) or bound (random).
    #[arg(long)]
    beta: f64,
    #[arg(long, value_enum, default_value = "constant")]
    input: InputKind,
    #[arg(long)]
    steps: usize,
    #[arg(long, value_enum, default_value = "sign")]
    quantizer: QuantizerArg,
    /// Dead-band half-width of the trilevel quantizer.
    #[arg(long, default_value_t = quantizer::DEFAULT_DEADBAND)]
    deadband: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct CertArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    lambda: f64,
    /// Use the general construction at this epsilon.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Multiplier for the general construction.
    #[arg(long, requires = "epsilon")]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "remark")]
    variant: VariantArg,
}

impl CertArgs {
    fn build(&self) -> sdlab_core::Result<StabilityCertificate> {
        match self.epsilon {
            Some(eps) => certificate::thm2_certificate(self.alpha, self.lambda, eps, self.gamma),
            None => certificate::thm1_certificate(self.alpha, self.lambda, self.variant.into()),
        }
    }
}

#[derive(Args, Debug)]
struct CertificateArgs {
    #[command(flatten)]
    cert: CertArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[arg(long)]
    alpha: f64,
    /// Region size (default: the smallest admissible, 2(1+alpha)/(1-alpha)).
    #[arg(long = "c")]
    c: Option<f64>,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    cert: CertArgs,
    #[arg(long, default_value_t = 2000)]
    points: usize,
    #[arg(long, default_value_t = 50)]
    deltas: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long, default_value_t = 1.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda2: f64,
    /// Use lambda1 = lambda2 = 1 + 1/T at each rate instead.
    #[arg(long, conflicts_with_all = ["lambda1", "lambda2"])]
    chaotic: bool,
    /// Single-loop scheme instead of the double loop.
    #[arg(long, conflicts_with_all = ["chaotic", "gamma"])]
    first_order: bool,
    #[arg(long)]
    gamma: Option<f64>,
    /// Sup bound of the test signal.
    #[arg(long, default_value_t = 0.4)]
    beta: f64,
    #[arg(long, default_value_t = 6)]
    components: usize,
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
    rates: Vec<f64>,
    #[arg(long, default_value_t = signal::DEFAULT_T0)]
    t0: f64,
    #[arg(long, default_value_t = signal::DEFAULT_TRUNC_TOL)]
    trunc_tol: f64,
    /// Transition shape: smooth-step or raised-cosine-squared.
    #[arg(long, default_value = "smooth-step")]
    taper: String,
    /// Write the tabulated kernel as `t,g` CSV.
    #[arg(long)]
    filter_out: Option<PathBuf>,
    /// Write the kernel norm summary as JSON.
    #[arg(long)]
    norms_out: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(value_enum)]
    figure: Figure,
    #[arg(long, default_value_t = 1.0)]
    lambda_min: f64,
    #[arg(long, default_value_t = 1.12)]
    lambda_max: f64,
    #[arg(long, default_value_t = 0.005)]
    lambda_step: f64,
    #[arg(long, value_enum, default_value = "remark")]
    variant: VariantArg,
    #[arg(long, default_value_t = 0.99)]
    alpha_cap: f64,
    #[arg(long, value_enum, default_value = "constant")]
    input: InputKind,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1000.0)]
    bound: f64,
    #[arg(long, default_value_t = 1e-3)]
    bisect_tol: f64,
    /// fig4 only: also write `lambda,beta_theoretical,vmax_theoretical,vmax_measured,ratio`
    /// measured at the certified input bound.
    #[arg(long)]
    ratios: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

enum Failure {
    Usage(String),
    Violation(String),
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn report(&self) -> ExitCode {
        match self {
            Failure::Usage(m) => {
                eprintln!("error: {m}");
                ExitCode::from(1)
            }
            Failure::Violation(m) => {
                eprintln!("{m}");
                ExitCode::from(2)
            }
            Failure::Io(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
            Failure::Core(e) => {
                match e {
                    Error::Infeasible { bound, detail } => eprintln!("infeasible: bound {bound}: {detail}"),
                    Error::Divergence { step, last_state } => eprintln!(
                        "divergence at step {step} (last state u={}, v={})",
                        g17(last_state.u),
                        g17(last_state.v)
                    ),
                    other => eprintln!("error: {other}"),
                }
                ExitCode::from(match e {
                    Error::Infeasible { .. } => 3,
                    Error::Divergence { .. } => 4,
                    _ => 1,
                })
            }
        }
    }
}

type CmdResult = Result<(), Failure>;

fn simulate(args: &SimulateArgs, seed: u64) -> CmdResult {
    let kind = match args.quantizer {
        QuantizerArg::Sign => QuantizerKind::Sign,
        QuantizerArg::Trilevel => QuantizerKind::Trilevel { deadband: args.deadband },
    };
    let params = SchemeParams::new(args.lambda1, args.lambda2, args.gamma, kind)?;
    let input: Box<dyn Iterator<Item = f64>> = match args.input {
        InputKind::Constant => Box::new(std::iter::repeat(args.beta)),
        InputKind::Random => Box::new(quantizer::uniform_input(seed, args.beta)),
    };
    let mut out = args.out.open()?;
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    let mut io_err = None;
    let result = quantizer::simulate(&params, input, args.steps, |r| {
        if io_err.is_none() {
            if let Err(e) = quantizer::write_csv_row(&mut out, r) {
                io_err = Some(e);
            }
        }
    });
    out.flush()?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    result?;
    Ok(())
}

fn certificate_cmd(args: &CertificateArgs) -> CmdResult {
    let cert = args.cert.build()?;
    let mut out = args.out.open()?;
    writeln!(out, "{}", cert.to_json())?;
    out.flush()?;
    Ok(())
}

fn region(args: &RegionArgs) -> CmdResult {
    let spec = match args.c {
        Some(c) => RegionSpec::new(args.alpha, c)?,
        None => RegionSpec::minimal(args.alpha)?,
    };
    if args.points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    spec.write_boundary_csv(args.points, args.out.open()?)?;
    Ok(())
}

/// Probe for `verify`; when no certificate exists at the requested lambda,
/// the unit-lambda certificate at the same alpha is checked under the
/// requested expansion.
fn verify_probe(args: &CertArgs, verbose: bool) -> Result<InvarianceProbe, Failure> {
    match args.build() {
        Ok(cert) => Ok(InvarianceProbe::from_certificate(&cert)?),
        Err(Error::Infeasible { bound, detail }) if args.epsilon.is_none() && args.lambda > 1.0 => {
            if verbose {
                eprintln!("no certificate ({bound}: {detail}); probing the lambda = 1 region");
            }
            let base = certificate::thm1_certificate(args.alpha, 1.0, args.variant.into())?;
            let mut probe = InvarianceProbe::from_certificate(&base)?;
            probe.lambda = args.lambda;
            Ok(probe)
        }
        Err(e) => Err(e.into()),
    }
}

fn write_report<W: Write>(report: &InvarianceReport, mut out: W) -> io::Result<()> {
    writeln!(out, "{{")?;
    writeln!(out, "  \"n_points\": {},", report.n_points)?;
    writeln!(out, "  \"n_deltas\": {},", report.deltas.len())?;
    writeln!(out, "  \"worst_excess\": {},", g17(report.worst_excess))?;
    writeln!(out, "  \"n_violations\": {},", report.violations.len())?;
    write!(out, "  \"violations\": [")?;
    for (i, v) in report.violations.iter().take(20).enumerate() {
        write!(
            out,
            "{}\n    {{\"sample\": {}, \"kind\": \"{:?}\", \"u\": {}, \"v\": {}, \"delta\": {}, \"excess\": {}}}",
            if i == 0 { "" } else { "," },
            v.sample_index,
            v.kind,
            g17(v.point.u),
            g17(v.point.v),
            g17(v.delta),
            g17(v.excess)
        )?;
    }
    if report.violations.is_empty() {
        writeln!(out, "]")?;
    } else {
        writeln!(out, "\n  ]")?;
    }
    writeln!(out, "}}")?;
    out.flush()
}

fn verify(args: &VerifyArgs, seed: u64, verbose: bool) -> CmdResult {
    let probe = verify_probe(&args.cert, verbose)?;
    let report = invariance::verify_probe(&probe, args.points, args.deltas, seed);
    write_report(&report, args.out.open()?)?;
    if report.is_verified() {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "invariance violated: {} of {} images left the region (worst excess {})",
            report.violations.len(),
            report.n_points * report.deltas.len(),
            g17(report.worst_excess)
        )))
    }
}

fn reconstruct(args: &ReconstructArgs, seed: u64) -> CmdResult {
    let taper = match args.taper.as_str() {
        "smooth-step" => Taper::SmoothStep,
        "raised-cosine-squared" => Taper::RaisedCosineSquared,
        other => return Err(Failure::Usage(format!("unknown taper '{other}'"))),
    };
    let filter = signal::design_filter_with(FilterDesign {
        t0: args.t0,
        trunc_tol: args.trunc_tol,
        taper,
        ..FilterDesign::default()
    })?;
    if let Some(p) = &args.filter_out {
        filter.write_csv(File::create(p)?)?;
    }
    if let Some(p) = &args.norms_out {
        let mut f = File::create(p)?;
        writeln!(f, "{}", filter.norms_json())?;
    }
    let sig = signal::gen_signal(seed, args.components, args.beta)?;
    let norms = filter.norms();
    let mut rows = Vec::with_capacity(args.rates.len());
    for &rate in &args.rates {
        let (scheme, kernel_norm, power) = if args.first_order {
            (Scheme::SingleLoop(QuantizerKind::Sign), norms.dg_l1, 1)
        } else {
            let gamma = args.gamma.unwrap_or((1.0 - args.beta) / (1.0 + args.beta));
            let (l1, l2) = if args.chaotic {
                (1.0 + 1.0 / rate, 1.0 + 1.0 / rate)
            } else {
                (args.lambda1, args.lambda2)
            };
            let params = SchemeParams::new(l1, l2, gamma, QuantizerKind::Sign)?;
            let norm = if params.is_chaotic() { norms.c_g() } else { norms.d2g_l1 };
            (Scheme::DoubleLoop(params), norm, 2)
        };
        let sampling = signal::SamplingConfig::for_filter(rate, &filter)?;
        let rep = signal::sup_error_report(&sig, &scheme, &sampling, &filter, &sampling.default_grid())?;
        let bound = rep.v_max * kernel_norm * rate.powi(-power);
        rows.push((rate, rep.sup_error, bound));
    }
    signal::write_error_curve(&rows, args.out.open()?)?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    match signal::order_fit(&pts) {
        Ok(slope) => eprintln!("order slope {}", g17(slope)),
        Err(e) => eprintln!("order slope unavailable: {e}"),
    }
    Ok(())
}

fn sweep_cmd(args: &SweepArgs, seed: u64) -> CmdResult {
    let variant: Variant = args.variant.into();
    let grid = sweep::lambda_grid(args.lambda_min, args.lambda_max, args.lambda_step);
    let out = args.out.open()?;
    if let Figure::Fig1 = args.figure {
        sweep::write_fig1(&sweep::run_fig1(&grid, args.alpha_cap, variant), out)?;
        return Ok(());
    }
    let cfg = SweepConfig {
        lambda_grid: grid,
        input_mode: match args.input {
            InputKind::Constant => InputMode::Constant,
            InputKind::Random => InputMode::RandomUniform,
        },
        max_iters: args.max_iters,
        divergence_bound: args.bound,
        bisect_tol: args.bisect_tol,
        seed,
        variant,
        alpha_cap: args.alpha_cap,
        ..SweepConfig::default()
    };
    cfg.validate()?;
    match args.figure {
        Figure::Fig1 => unreachable!("handled above"),
        Figure::Fig2 => sweep::write_thresholds(&sweep::run_fig2(&cfg)?, out)?,
        Figure::Fig3 => sweep::write_thresholds(&sweep::run_fig3(&cfg)?, out)?,
        Figure::Fig4 => {
            sweep::write_fig4(&sweep::run_fig4(&cfg)?, out)?;
            if let Some(p) = &args.ratios {
                let mut f = BufWriter::new(File::create(p)?);
                writeln!(f, "lambda,beta_theoretical,vmax_theoretical,vmax_measured,ratio")?;
                for (lambda, row) in cfg.lambda_grid.iter().zip(sweep::vmax_at_theoretical(&cfg)?) {
                    match row {
                        Some(r) => writeln!(
                            f,
                            "{},{},{},{},{}",
                            g17(r.lambda),
                            g17(r.beta),
                            g17(r.vmax_theoretical),
                            g17(r.vmax_measured),
                            g17(r.ratio())
                        )?,
                        None => writeln!(f, "{},NA,NA,NA,NA", g17(*lambda))?,
                    }
                }
                f.flush()?;
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::Usage("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Simulate(a) => simulate(a, cli.seed),
        Command::Certificate(a) => certificate_cmd(a),
        Command::Region(a) => region(a),
        Command::Verify(a) => verify(a, cli.seed, cli.verbose),
        Command::Reconstruct(a) => reconstruct(a, cli.seed),
        Command::Sweep(a) => sweep_cmd(a, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = std::time::Instant::now();
    let result = run(&cli);
    if cli.verbose {
        eprintln!("elapsed {:.3} s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
