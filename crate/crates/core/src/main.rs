use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use sqw::fock::Frame;
use sqw::harness::{self, exit, RunOptions, Scenario};
use sqw::{Error, OrderingVector, Result};

#[derive(Parser)]
#[command(name = "sqw", version, about = "Oscillator in a squeezed thermal bath: propagator, oracle and comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagator coefficients and sampled evolution kernels.
    Kernel {
        #[command(flatten)]
        common: Common,
        /// Times to emit (scenario units); defaults to the scenario times.
        #[arg(long = "time")]
        times: Vec<f64>,
    },
    /// Wigner grids from the phase-space propagator.
    Propagate {
        #[command(flatten)]
        common: Common,
    },
    /// Truncated-Fock master-equation trajectory.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Also rerun at dt/2 and report the convergence ratio.
        #[arg(long)]
        order_check: bool,
    },
    /// Propagator against oracle; exit 3 when a tolerance is exceeded.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Quasi-distribution of the initial state and the operator checks.
    Quasidist {
        #[command(flatten)]
        common: Common,
        /// `a,b,c` for (ia, ib, c) or six numbers `re1,im1,re2,im2,re3,im3`.
        #[arg(long, default_value = "0,0,0")]
        ordering: String,
    },
    /// Embedded invariant suite.
    Selftest {
        #[arg(long, hide = true)]
        corrupt: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (repeatable). The built-in benchmark runs when none is given.
    #[arg(long = "scenario")]
    scenarios: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Frame of emitted grids.
    #[arg(long, value_enum, default_value_t = FrameArg::Rotating)]
    frame: FrameArg,
    #[arg(long)]
    verify: bool,
    /// Scenarios run in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameArg {
    Lab,
    Rotating,
}

fn parse_ordering(text: &str) -> Result<OrderingVector> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad ordering component {s:?}"))))
        .collect::<Result<_>>()?;
    match v[..] {
        [a, b, c] => Ok(OrderingVector::physical(a, b, c)),
        [a, b, c, d, e, f] => Ok(OrderingVector::new(Complex64::new(a, b), Complex64::new(c, d), Complex64::new(e, f))),
        _ => Err(Error::Parse(format!("ordering needs 3 or 6 numbers, got {}", v.len()))),
    }
}

/// Highest-priority code: configuration, then numerical, then tolerance.
fn combine(codes: impl IntoIterator<Item = i32>) -> i32 {
    codes.into_iter().fold(exit::SUCCESS, |acc, c| {
        let rank = |c: i32| match c {
            exit::CONFIG => 3,
            exit::NUMERICAL => 2,
            exit::TOLERANCE => 1,
            _ => 0,
        };
        if rank(c) > rank(acc) {
            c
        } else {
            acc
        }
    })
}

fn fail(context: &str, e: &Error) -> i32 {
    eprintln!("error: {context}: {e}");
    harness::exit_code(e)
}

fn run_scenarios<F>(common: &Common, task: F) -> i32
where
    F: Fn(&Scenario, &RunOptions) -> Result<i32> + Sync,
{
    let opts = RunOptions {
        out_dir: common.out.clone(),
        frame: match common.frame {
            FrameArg::Lab => Frame::Lab,
            FrameArg::Rotating => Frame::Rotating,
        },
        verify: common.verify,
        order_check: false,
    };
    let loaded: Vec<(String, Result<Scenario>)> = if common.scenarios.is_empty() {
        vec![("benchmark".into(), Ok(harness::benchmark()))]
    } else {
        common.scenarios.iter().map(|p| (p.display().to_string(), Scenario::load(p))).collect()
    };
    let one = |(label, sc): &(String, Result<Scenario>)| -> i32 {
        match sc.as_ref() {
            Err(e) => fail(label, e),
            Ok(sc) => match task(sc, &opts) {
                Ok(code) => code,
                Err(e) => fail(&sc.name, &e),
            },
        }
    };
    let codes: Vec<i32> = if common.jobs > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(common.jobs).build() {
            Ok(pool) => pool.install(|| loaded.par_iter().map(one).collect()),
            Err(e) => {
                eprintln!("error: thread pool: {e}");
                return exit::CONFIG;
            }
        }
    } else {
        loaded.iter().map(one).collect()
    };
    combine(codes)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Kernel { common, times } => run_scenarios(&common, |sc, opts| {
            let t = if times.is_empty() { sc.times.clone() } else { times.clone() };
            for p in harness::run_kernel(sc, &t, opts)? {
                println!("{}", p.display());
            }
            Ok(exit::SUCCESS)
        }),
        Command::Propagate { common } => run_scenarios(&common, |sc, opts| {
            for p in harness::run_propagate(sc, opts)? {
                println!("{}", p.display());
            }
            Ok(exit::SUCCESS)
        }),
        Command::Oracle { common, order_check } => run_scenarios(&common, |sc, opts| {
            let opts = RunOptions { order_check, ..opts.clone() };
            for p in harness::run_oracle(sc, &opts)? {
                println!("{}", p.display());
            }
            Ok(exit::SUCCESS)
        }),
        Command::Compare { common } => run_scenarios(&common, |sc, opts| {
            let report = harness::run_compare(sc, opts)?;
            for r in &report.records {
                let worst = r.moment_errors.iter().map(|e| e.error).fold(0.0, f64::max);
                println!(
                    "{} t={} linf={:.3e} l2={:.3e} moment={:.3e} trace={:.3e} {}",
                    report.scenario,
                    r.t,
                    r.linf_wigner,
                    r.l2_wigner,
                    worst,
                    r.trace_drift,
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            Ok(if report.pass { exit::SUCCESS } else { exit::TOLERANCE })
        }),
        Command::Quasidist { common, ordering } => match parse_ordering(&ordering) {
            Err(e) => fail("--ordering", &e),
            Ok(r) => run_scenarios(&common, |sc, opts| {
                for p in harness::run_quasidist(sc, &r, opts)? {
                    println!("{}", p.display());
                }
                Ok(exit::SUCCESS)
            }),
        },
        Command::Selftest { corrupt } => match harness::seed_from_env() {
            Err(e) => fail("SQW_SEED", &e),
            Ok(seed) => match harness::run_selftest(seed, corrupt.as_deref()) {
                Err(e) => fail("selftest", &e),
                Ok(report) => {
                    print!("{}", report.table());
                    if report.pass() {
                        exit::SUCCESS
                    } else {
                        exit::NUMERICAL
                    }
                }
            },
        },
    };
    ExitCode::from(code as u8)
}
