use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cpless::analysis::{edge_decay_rate, gamma_with_fallback, roots, two_path, write_pole_table, Polynomial, RootSet};
use cpless::channel::{draw_channel, ChannelProfile};
use cpless::equalizer::EqualizerMode;
use cpless::harness::{
    emit_csv, emit_plot_data, parse_complex_arg, run_campaign, selftest, CampaignConfig, ProfileKind,
};
use cpless::rng::{stream, Role};
use num_complex::Complex64;

#[derive(Parser)]
#[command(
    name = "cpless",
    version,
    about = "Frequency-domain equalization with and without a cyclic prefix"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an SER campaign and write CSV plus gnuplot data.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the configured master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Inspect poles and inverse filters.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Run the built-in numerical checks.
    Selftest,
}

#[derive(Subcommand)]
enum Analyze {
    /// Roots of R(z) for the two-path channel h0 + h1 z^d, as a pole table.
    Poles(PolesArgs),
    /// Inverse filter magnitude |γ_m| for one random channel draw.
    Gamma(GammaArgs),
}

#[derive(Args)]
struct PolesArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    h0: Complex64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    h1: Complex64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Regularizer K (0 for ZF, N0 for MMSE).
    #[arg(long, default_value_t = 0.1)]
    k: f64,
}

#[derive(Args)]
struct GammaArgs {
    /// two-path, flat or uniform.
    #[arg(long, default_value = "two-path")]
    profile: String,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value = "mmse")]
    mode: String,
    #[arg(long, default_value_t = 0.1)]
    n0: f64,
    #[arg(long, default_value_t = 1)]
    delay: usize,
    /// Tap count for the uniform profile.
    #[arg(long, default_value_t = 3)]
    taps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    parse_complex_arg(s).map_err(|e| e.to_string())
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn simulate(config: &Path, out: &Path, seed: Option<u64>, threads: Option<usize>) -> AnyResult<()> {
    let mut cfg = CampaignConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        pool = pool.num_threads(t);
    }
    let result = pool.build()?.install(|| run_campaign(&cfg))?;
    let records = result.records();
    emit_csv(&records, out)?;
    let plot = out.with_extension("dat");
    emit_plot_data(&records, &plot)?;
    eprint!("{}", result.summary);
    eprintln!(
        "wrote {} records to {} and {}",
        records.len(),
        out.display(),
        plot.display()
    );
    Ok(())
}

fn poles(args: &PolesArgs) -> AnyResult<()> {
    let outcome = two_path(args.h0, args.h1, args.d, args.k)?;
    let mut err = io::stderr().lock();
    let Some(a) = outcome.analysis() else {
        writeln!(
            err,
            "one path is zero: the channel is flat and the equalizer has no poles"
        )?;
        return Ok(());
    };
    writeln!(err, "psi = {:.12}", a.psi)?;
    writeln!(err, "rho1 = {:.12}  |rho1| = {:.12}", a.rho1, a.rho1.norm())?;
    writeln!(err, "rho2 = {:.12}  |rho2| = {:.12}", a.rho2, a.rho2.norm())?;
    writeln!(
        err,
        "outer pole magnitude |rho2|^(1/d) = {:.12}",
        a.outer_pole_magnitude()
    )?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * args.d + 1];
    coeffs[0] = args.h0 * args.h1.conj();
    coeffs[args.d] = Complex64::new(a.psi, 0.0);
    coeffs[2 * args.d] = args.h0.conj() * args.h1;
    let set = RootSet::new(roots(&Polynomial::new(coeffs))?);
    writeln!(err, "min ||beta| - 1| = {:.3e}", set.min_unit_circle_distance())?;
    write_pole_table(&set, io::stdout().lock())?;
    Ok(())
}

fn gamma(args: &GammaArgs) -> AnyResult<()> {
    let mode: EqualizerMode = args.mode.parse()?;
    let kind: ProfileKind = match args.profile.as_str() {
        "two-path" => ProfileKind::TwoPath,
        "flat" => ProfileKind::Flat,
        "uniform" => ProfileKind::Uniform,
        other => return Err(format!("unknown profile {other:?} (two-path, flat, uniform)").into()),
    };
    let profile = match kind {
        ProfileKind::TwoPath => ChannelProfile::two_path(args.delay, 0.5, 0.5)?,
        ProfileKind::Flat => ChannelProfile::flat(1, 1)?,
        _ => ChannelProfile::uniform(1, 1, args.taps)?,
    };
    let ch = draw_channel(&profile, &mut stream(args.seed, Role::Analysis, &[0]));
    let (g, fallback) = gamma_with_fallback(&ch, mode, args.n0, args.n)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "# inverse filter of one {} draw, N = {}, {mode}, N0 = {}",
        args.profile, args.n, args.n0
    )?;
    for (l, h) in ch.taps().scalars().iter().enumerate() {
        writeln!(out, "# h_{l} = {h:.6}")?;
    }
    if let Some(why) = fallback {
        writeln!(
            out,
            "# closed form unavailable ({why:?}); gamma from the IDFT of the taps"
        )?;
    }
    if args.n >= 16 {
        let rates = edge_decay_rate(&g)?;
        writeln!(out, "# decay rate head {:.6} tail {:.6}", rates.head, rates.tail)?;
    }
    writeln!(out, "# m |gamma_m|")?;
    for (m, v) in g.iter().enumerate() {
        writeln!(out, "{m} {:.12e}", v[(0, 0)].norm())?;
    }
    Ok(())
}

fn run_selftest() -> bool {
    let checks = selftest::run();
    for c in &checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            threads,
        } => simulate(config, out, *seed, *threads),
        Command::Analyze(Analyze::Poles(args)) => poles(args),
        Command::Analyze(Analyze::Gamma(args)) => gamma(args),
        Command::Selftest => {
            return if run_selftest() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
