use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use checkercop::inference::{chi_squared_asymptotic, independence_test, MultiplierConfig, MultiplierLaw};
use checkercop::io::{read_count_table, read_observations, read_pmf, Record};
use checkercop::simulation::{parse_plan, run_plan, PlanOverrides};
use checkercop::statistics::StatsReport;
use checkercop::{CheckerboardCopula, Error, RankedSample, Result};

#[derive(Parser)]
#[command(name = "checkercop", version, about = "Checkerboard copula statistics and independence tests for count data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args)]
struct Output {
    /// Output format: text (6 significant digits) or json (full precision).
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct Input {
    /// CSV file of observations, one row per observation.
    file: PathBuf,
    /// Read the file as a table of counts instead of observations.
    #[arg(long)]
    table: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Rank statistics of a sample: Kendall's tau, Spearman's rho,
    /// chi-squared, G-squared and the Cramer-von Mises statistic.
    Stats {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Multiplier-bootstrap test of independence for a bivariate sample.
    Test {
        #[command(flatten)]
        input: Input,
        /// Seed of the multiplier draws.
        #[arg(long)]
        seed: u64,
        /// Number of multiplier replicates.
        #[arg(short = 'M', long, default_value_t = 1000)]
        multipliers: usize,
        /// Nominal level for the reject decision.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Multiplier distribution: normal or rademacher.
        #[arg(long, default_value = "normal")]
        law: MultiplierLaw,
        #[command(flatten)]
        output: Output,
    },
    /// Population quantities of the checkerboard copula of a joint pmf file.
    Copula {
        /// TOML file describing the joint pmf.
        file: PathBuf,
        /// Evaluate the copula at a point (one value per dimension).
        #[arg(long, num_args = 1.., value_name = "U")]
        eval: Option<Vec<f64>>,
        /// Kendall's tau (bivariate only).
        #[arg(long)]
        tau: bool,
        /// Spearman's rho.
        #[arg(long)]
        rho: bool,
        /// Squared L2 distance to the independence copula.
        #[arg(long)]
        gap: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Run a simulation plan of level/power scenarios.
    Simulate {
        /// TOML simulation plan.
        plan: PathBuf,
        /// Master seed (overrides the plan file).
        #[arg(long)]
        seed: Option<u64>,
        /// Repetitions per scenario.
        #[arg(short = 'N', long)]
        reps: Option<usize>,
        /// Multiplier replicates per test.
        #[arg(short = 'M', long)]
        multipliers: Option<usize>,
        /// Nominal level.
        #[arg(long)]
        alpha: Option<f64>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
        /// Include wall-clock time in each report.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        output: Output,
    },
}

fn load(input: &Input) -> Result<RankedSample> {
    if input.table {
        read_count_table(&input.file)?.to_sample()
    } else {
        read_observations(&input.file)
    }
}

fn render(r: &Record, format: Format) -> String {
    match format {
        Format::Text => r.to_text(),
        Format::Json => r.to_json() + "\n",
    }
}

fn stats(input: &Input) -> Result<Record> {
    let s = load(input)?;
    let rep = StatsReport::compute(&s)?;
    let mut r = Record::new();
    r.push("n", rep.n).push("d", rep.d);
    if let Some(t) = rep.tau {
        r.push("tau", t);
    }
    if let Some(x) = rep.rho {
        r.push("rho", x);
    }
    if rep.d > 2 {
        r.push("rho_d", rep.rho_d);
    }
    if let Some(x) = rep.chi2 {
        r.push("chi2", x);
    }
    if let Some(x) = rep.g2 {
        r.push("g2", x);
    }
    r.push("S", rep.cvm);
    Ok(r)
}

fn test(input: &Input, seed: u64, multipliers: usize, alpha: f64, law: MultiplierLaw) -> Result<Record> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!("alpha = {alpha} outside (0, 1)")));
    }
    let cfg = MultiplierConfig::new(multipliers, seed)?.with_law(law);
    let s = load(input)?;
    let rep = independence_test(&s, &cfg)?;
    let table = checkercop::ContingencyTable::from_sample(&s)?;
    let mut r = Record::new();
    r.push("n", s.len())
        .push("S", rep.statistic)
        .push("p_value", rep.p_value)
        .push("multipliers", rep.replicates)
        .push("seed", rep.seed)
        .push("alpha", alpha)
        .push("reject", rep.rejects(alpha));
    if let Ok((chi2, df, p)) = chi_squared_asymptotic(&table) {
        r.push("chi2", chi2).push("chi2_df", df).push("chi2_p_value", p);
    }
    Ok(r)
}

fn copula(file: &Path, eval: &Option<Vec<f64>>, tau: bool, rho: bool, gap: bool) -> Result<Record> {
    let c = CheckerboardCopula::build(read_pmf(file)?);
    let mut r = Record::new();
    r.push("d", c.dim());
    let all = eval.is_none() && !tau && !rho && !gap;
    if let Some(u) = eval {
        r.push("cdf", c.cdf(u)?);
    }
    if (tau || all) && c.dim() == 2 {
        r.push("tau", c.population_tau()?);
    } else if tau {
        c.population_tau()?;
    }
    if rho || all {
        r.push("rho", c.population_rho()?);
    }
    if gap || all {
        r.push("gap", c.independence_gap());
    }
    Ok(r)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnsupportedDimension { .. } => 2,
        Error::Numeric(_) => 4,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<()> {
    let stdout = std::io::stdout();
    let emit = |text: String| -> Result<()> {
        let mut out = stdout.lock();
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
    };
    match cli.command {
        Command::Stats { input, output } => emit(render(&stats(&input)?, output.format)),
        Command::Test {
            input,
            seed,
            multipliers,
            alpha,
            law,
            output,
        } => emit(render(&test(&input, seed, multipliers, alpha, law)?, output.format)),
        Command::Copula {
            file,
            eval,
            tau,
            rho,
            gap,
            output,
        } => emit(render(&copula(&file, &eval, tau, rho, gap)?, output.format)),
        Command::Simulate {
            plan,
            seed,
            reps,
            multipliers,
            alpha,
            jobs,
            timing,
            output,
        } => {
            let text = checkercop::io::read_to_string(&plan)?;
            let overrides = PlanOverrides {
                reps,
                multipliers,
                alpha,
                seed,
            };
            let scenarios = parse_plan(&text, &plan.display().to_string(), &overrides)?;
            let mut first = true;
            run_plan(&scenarios, jobs, |rep| {
                let mut text = render(&rep.to_record(timing), output.format);
                if matches!(output.format, Format::Text) && !std::mem::take(&mut first) {
                    text.insert(0, '\n');
                }
                emit(text)
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
