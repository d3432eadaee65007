use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cusp::cli::{self, PriorSimConfig, StudyConfig};
use cusp::mcmc::{Algorithm, EspChoice, MixturePrior, SamplerConfig};
use cusp::Error;

#[derive(Parser)]
#[command(name = "cusp", version, about = "Shrinkage-process priors and samplers for sparse Bayesian factor models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the replicate datasets of a study.
    Simulate {
        #[command(flatten)]
        study: StudyArgs,
    },
    /// Fit one dataset (a directory with y.csv or a CSV file).
    Fit {
        data: PathBuf,
        /// Sampler settings as JSON; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        standardize: bool,
        #[arg(long, default_value = "chain")]
        out: PathBuf,
    },
    /// Monte Carlo checks of the shrinkage priors.
    PriorSim {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        esp: Option<EspChoice>,
        #[arg(long, default_value = "prior_sim")]
        out: PathBuf,
    },
    /// Run the simulation-study grid and write the summary tables.
    ReproduceTable {
        #[command(flatten)]
        study: StudyArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Summaries and figure data of a chain directory.
    Summarize {
        chain: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SamplerArgs {
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// Slab mixture (restricts the study to it).
    #[arg(long)]
    prior: Option<MixturePrior>,
    #[arg(long)]
    esp: Option<EspChoice>,
    /// Total sweeps including burn-in.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
}

impl SamplerArgs {
    fn resolve(&self, mut c: SamplerConfig) -> cusp::Result<SamplerConfig> {
        if let Some(a) = self.algorithm {
            c.algorithm = a;
        }
        if let Some(p) = self.prior {
            c = c.with_prior(p);
        }
        if let Some(e) = self.esp {
            c.esp = e.family();
        }
        if let Some(n) = self.iters {
            c.iterations = n;
        }
        if let Some(b) = self.burnin {
            c.burn_in = b;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct StudyArgs {
    /// Study configuration as JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include the (100, 15) scenario.
    #[arg(long)]
    full: bool,
}

impl StudyArgs {
    fn resolve(&self) -> cusp::Result<StudyConfig> {
        let mut c: StudyConfig = match &self.config {
            Some(p) => cli::read_json(p)?,
            None => StudyConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.jobs.is_some() {
            c.jobs = self.jobs;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.full {
            c = c.with_full_grid();
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> cusp::Result<()> {
    match cli.command {
        Command::Simulate { study } => {
            let config = study.resolve()?;
            let out = config.out.clone().unwrap_or_else(|| PathBuf::from("datasets"));
            let dirs = cli::cmd_simulate(&config, &out)?;
            println!("wrote {} datasets under {}", dirs.len(), out.display());
        }
        Command::Fit {
            data,
            config,
            sampler,
            seed,
            standardize,
            out,
        } => {
            let base = match &config {
                Some(p) => cli::read_json(p)?,
                None => SamplerConfig::default(),
            };
            let config = sampler.resolve(base)?;
            let chain = cli::cmd_fit(&data, &config, seed, standardize, &out)?;
            println!(
                "{} draws of H* over {} columns written to {} ({:.1} s)",
                chain.len(),
                chain.h(),
                out.display(),
                chain.meta.wall_seconds
            );
        }
        Command::PriorSim { config, seed, esp, out } => {
            let mut c: PriorSimConfig = match &config {
                Some(p) => cli::read_json(p)?,
                None => PriorSimConfig::default(),
            };
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(e) = esp {
                c.esp = e.family();
            }
            let report = cli::cmd_prior_sim(&c, &out)?;
            for r in &report.hstar {
                println!(
                    "{:<5} H = {:>3}: E[H*] ~ {:.3} (se {:.3}){}",
                    r.prior,
                    r.h,
                    r.mc_mean,
                    r.mc_mean_se,
                    r.exact_mean.map(|m| format!(", exact {m:.3}")).unwrap_or_default()
                );
            }
            println!("reports written to {}", out.display());
        }
        Command::ReproduceTable { study, sampler } => {
            let mut config = study.resolve()?;
            config.sampler = sampler.resolve(config.sampler.clone())?;
            if let Some(e) = sampler.esp {
                config.esp = e.family();
            }
            if let Some(p) = sampler.prior {
                config.priors = vec![p];
            }
            if config.out.is_none() {
                config.out = Some(PathBuf::from("study"));
            }
            let result = cli::cmd_reproduce_table(&config)?;
            for c in &result.table {
                let med = |s: &Option<cusp::cli::Spread>| s.as_ref().map_or("-".to_string(), |s| format!("{:.3}", s.median));
                println!(
                    "{:<16} {}  mode {}  ordinate {}  mse {}  ({} ok, {} failed)",
                    c.scenario,
                    c.prior.tag(),
                    med(&c.mode),
                    med(&c.ordinate),
                    med(&c.mse_omega),
                    c.completed,
                    c.failed
                );
            }
        }
        Command::Summarize { chain, out } => {
            let s = cli::cmd_summarize(&chain, out.as_deref())?;
            let dest: &Path = out.as_deref().unwrap_or(&chain);
            println!(
                "mode {}{}; ESS/N log det {:.3}; written to {}",
                s.hstar.mode,
                s.hstar.ordinate.map(|o| format!(", p(H* = H0 | y) = {o:.3}")).unwrap_or_default(),
                s.ess_rate_logdet_omega,
                dest.display()
            );
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        2
    } else if e.is_io() {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
