use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpsig_core::power::{
    default_effect_grid, matching_curves_with, write_grid_csv, write_matching_csv, NormalModel,
    PartitionLocation,
};
use dpsig_core::rng::entropy_seed;
use dpsig_core::selection::{build_loss_table_with, LossTableConfig};
use dpsig_core::{
    decide_value, fit_ols, make_partition, power_grid, release_statistic, select_params,
    simulate_null_reference, t_statistic, PowerGrid, PrivacyParams, ReferenceCache,
};
use dpsig_service::{Config, Table, VerificationService};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "dpsig",
    version,
    about = "Differentially private significance tests for regression coefficients"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every random draw; drawn from OS entropy and reported if omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo draws.
    #[arg(long = "n-mc", global = true)]
    n_mc: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Number of subsets.
    #[arg(long = "m", short = 'M', global = true)]
    m: Option<usize>,
    /// Truncation threshold.
    #[arg(long, global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Machine-readable output; human-readable text when omitted.
    #[arg(long, global = true, value_enum)]
    output: Option<Output>,
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Csv,
    Json,
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    response: String,
    /// Comma-separated predictor columns.
    #[arg(long, value_delimiter = ',', required = true)]
    predictors: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Non-private OLS fit, for testing on local data.
    Fit(DataArgs),
    /// Release a noisy truncated t-statistic for one coefficient.
    Release {
        #[command(flatten)]
        data: DataArgs,
        /// Coefficient to test: a predictor name or "(Intercept)".
        #[arg(long)]
        coefficient: String,
        #[arg(long, default_value_t = 0.0)]
        null_value: f64,
    },
    /// P-value and decision for a released value.
    Pvalue {
        /// The released statistic.
        #[arg(long, allow_hyphen_values = true)]
        value: f64,
        /// Directory for cached null references.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Power, loss and bound grids as long-format CSV.
    Power {
        #[arg(long)]
        lambda0: Option<f64>,
        /// Write matching-probability curves instead of the metric grid.
        #[arg(long)]
        matching: bool,
        #[arg(long, value_enum, default_value = "sqrt-m-times-effect")]
        location: Location,
    },
    /// Loss table and the chosen (M, a).
    Select {
        #[arg(long, default_value_t = 0.1)]
        bound: f64,
        #[arg(long)]
        lambda0: Option<f64>,
        #[arg(long, value_enum, default_value = "sqrt-m-times-effect")]
        location: Location,
    },
    /// Start the HTTP service.
    Serve {
        /// Address to bind, overriding the config file.
        #[arg(long)]
        bind: Option<String>,
        /// Directory for JSON-lines ledgers, overriding the config file.
        #[arg(long)]
        ledger_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Location {
    SqrtMTimesEffect,
    EffectOverSqrtM,
}

impl From<Location> for PartitionLocation {
    fn from(l: Location) -> Self {
        match l {
            Location::SqrtMTimesEffect => PartitionLocation::SqrtMTimesEffect,
            Location::EffectOverSqrtM => PartitionLocation::EffectOverSqrtM,
        }
    }
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

impl Global {
    fn params(&self) -> Res<PrivacyParams> {
        let (Some(epsilon), Some(m), Some(a)) = (self.epsilon, self.m, self.a) else {
            return Err("--epsilon, --m and --a are required".into());
        };
        Ok(PrivacyParams::new(epsilon, m, a)?)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            let seed = entropy_seed();
            eprintln!("seed: {seed}");
            seed
        })
    }
}

fn run(cli: Cli) -> Res<()> {
    let g = &cli.global;
    let config = match &g.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Fit(args) => {
            let table = Table::read(&args.data)?;
            let data = table.dataset(&args.response, &args.predictors)?;
            let fit = fit_ols(&data)?;
            let rows = data
                .column_names()
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    Ok(json!({
                        "term": name,
                        "estimate": fit.beta_hat[j],
                        "std_error": fit.std_error(j)?,
                        "t": t_statistic(&fit, j, 0.0)?,
                    }))
                })
                .collect::<Result<Vec<_>, dpsig_core::Error>>()?;
            match g.output {
                Some(Output::Json) => serde_json::to_writer_pretty(
                    &mut out,
                    &json!({ "coefficients": rows, "sigma2": fit.sigma2_hat, "df": fit.df }),
                )?,
                Some(Output::Csv) => {
                    writeln!(out, "term,estimate,std_error,t")?;
                    for r in &rows {
                        writeln!(
                            out,
                            "{},{},{},{}",
                            r["term"].as_str().unwrap_or(""),
                            r["estimate"],
                            r["std_error"],
                            r["t"]
                        )?;
                    }
                }
                None => {
                    writeln!(
                        out,
                        "{:>14} {:>12} {:>12} {:>9}",
                        "term", "estimate", "std.err", "t"
                    )?;
                    for r in &rows {
                        writeln!(
                            out,
                            "{:>14} {:>12.5} {:>12.5} {:>9.3}",
                            r["term"].as_str().unwrap_or(""),
                            r["estimate"].as_f64().unwrap_or(f64::NAN),
                            r["std_error"].as_f64().unwrap_or(f64::NAN),
                            r["t"].as_f64().unwrap_or(f64::NAN)
                        )?;
                    }
                    writeln!(out, "sigma^2 = {:.6} on {} df", fit.sigma2_hat, fit.df)?;
                }
            }
        }
        Command::Release {
            data: args,
            coefficient,
            null_value,
        } => {
            let params = g.params()?;
            let seed = g.seed();
            let table = Table::read(&args.data)?;
            let data = table.dataset(&args.response, &args.predictors)?;
            let j = data
                .column_index(&coefficient)
                .ok_or_else(|| format!("unknown coefficient {coefficient:?}"))?;
            let released = release_statistic(&data, j, null_value, &params, seed)?;
            match g.output {
                Some(Output::Json) => serde_json::to_writer_pretty(&mut out, &released)?,
                Some(Output::Csv) => {
                    writeln!(
                        out,
                        "value,sign,noise_scale,epsilon,M,a,coefficient,null_value,seed"
                    )?;
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{}",
                        released.value,
                        i8::from(released.sign),
                        released.noise_scale,
                        params.epsilon,
                        params.m,
                        params.a,
                        coefficient,
                        null_value,
                        seed
                    )?;
                }
                None => {
                    let plan = make_partition(data.n(), params.m, seed)?;
                    let sizes = plan.sizes();
                    writeln!(
                        out,
                        "released {:.6} (sign {:+})",
                        released.value,
                        i8::from(released.sign)
                    )?;
                    writeln!(
                        out,
                        "noise scale {:.6}, subsets of {}..{} rows, seed {seed}",
                        released.noise_scale,
                        sizes.iter().min().unwrap_or(&0),
                        sizes.iter().max().unwrap_or(&0)
                    )?;
                }
            }
        }
        Command::Pvalue { value, cache_dir } => {
            let params = g.params()?;
            let alpha = g.alpha.unwrap_or(0.05);
            let n_mc = g.n_mc.unwrap_or(config.reference_n_mc);
            let seed = g.seed();
            let reference = match cache_dir {
                Some(dir) => ReferenceCache::new(dir)?.get_or_build(&params, n_mc, seed)?,
                None => simulate_null_reference(&params, n_mc, seed)?,
            };
            let d = decide_value(value, &reference, alpha)?;
            match g.output {
                Some(Output::Json) => serde_json::to_writer_pretty(
                    &mut out,
                    &json!({ "value": value, "decision": d, "params": params, "n_mc": n_mc, "seed": seed }),
                )?,
                Some(Output::Csv) => {
                    writeln!(out, "value,p_value,critical_value,alpha,reject,n_mc,seed")?;
                    writeln!(
                        out,
                        "{value},{},{},{alpha},{},{n_mc},{seed}",
                        d.p_value, d.critical_value, d.reject
                    )?;
                }
                None => writeln!(
                    out,
                    "p-value {:.6}, critical value {:.6} at alpha {alpha}: {}",
                    d.p_value,
                    d.critical_value,
                    if d.reject { "reject" } else { "do not reject" }
                )?,
            }
        }
        Command::Power {
            lambda0,
            matching,
            location,
        } => {
            let seed = g.seed();
            let m_grid = g.m.map_or(config.m_grid.clone(), |m| vec![m]);
            let a_grid = g.a.map_or(config.a_grid.clone(), |a| vec![a]);
            let epsilons = g.epsilon.map_or(config.epsilon_grid.clone(), |e| vec![e]);
            let n_mc = g.n_mc.unwrap_or(config.power_n_mc);
            if matching {
                let curves = matching_curves_with(
                    &NormalModel::new(location.into()),
                    &default_effect_grid(),
                    &epsilons,
                    &m_grid,
                    &a_grid,
                    g.alpha.unwrap_or(0.05),
                    n_mc,
                    seed,
                )?;
                match g.output {
                    Some(Output::Json) => serde_json::to_writer_pretty(&mut out, &curves)?,
                    _ => write_matching_csv(&curves, n_mc, seed, &mut out)?,
                }
            } else {
                let grid = PowerGrid {
                    m_grid,
                    a_grid,
                    epsilons,
                    alphas: g.alpha.map_or(config.alphas.clone(), |a| vec![a]),
                    lambda0: lambda0.unwrap_or(config.lambda0),
                    alpha0: config.alpha0,
                    n_mc,
                    seed,
                    location: location.into(),
                };
                let records = power_grid(&grid)?;
                match g.output {
                    Some(Output::Json) => serde_json::to_writer_pretty(&mut out, &records)?,
                    _ => write_grid_csv(&records, &mut out)?,
                }
            }
        }
        Command::Select {
            bound,
            lambda0,
            location,
        } => {
            let table_config = LossTableConfig {
                epsilon: g.epsilon.unwrap_or(1.5),
                m_grid: g.m.map_or(config.m_grid.clone(), |m| vec![m]),
                a_grid: g.a.map_or(config.a_grid.clone(), |a| vec![a]),
                alpha: g.alpha.unwrap_or(0.05),
                lambda0: lambda0.unwrap_or(config.lambda0),
                alpha0: config.alpha0,
                n_mc: g.n_mc.unwrap_or(config.power_n_mc),
                seed: g.seed(),
            };
            let table = build_loss_table_with(&NormalModel::new(location.into()), &table_config)?;
            let chosen = select_params(&table, bound);
            match g.output {
                Some(Output::Json) => serde_json::to_writer_pretty(
                    &mut out,
                    &json!({
                        "table": table,
                        "bound": bound,
                        "selection": chosen.as_ref().ok(),
                        "error": chosen.as_ref().err().map(ToString::to_string),
                    }),
                )?,
                Some(Output::Csv) => {
                    table.write_csv(&mut out)?;
                    report_selection(&mut io::stderr(), &chosen)?;
                }
                None => {
                    writeln!(
                        out,
                        "loss_sig at epsilon {}, alpha {}, lambda0 {}; * marks values below {bound}\n",
                        table.epsilon, table.alpha, table.lambda0
                    )?;
                    write!(out, "{}", table.render_text(Some(bound)))?;
                    writeln!(out)?;
                    report_selection(&mut out, &chosen)?;
                }
            }
        }
        Command::Serve { bind, ledger_dir } => {
            let bind = bind.unwrap_or(config.bind.clone());
            let service = match ledger_dir.or(config.ledger_dir.clone()) {
                Some(dir) => VerificationService::with_ledger_dir(dir)?,
                None => VerificationService::new(),
            };
            eprintln!("listening on {bind}");
            tokio::runtime::Runtime::new()?
                .block_on(dpsig_service::http::serve(Arc::new(service), &bind))?;
        }
    }
    if g.output == Some(Output::Json) {
        writeln!(out)?;
    }
    Ok(())
}

fn report_selection<W: Write>(
    w: &mut W,
    chosen: &dpsig_core::Result<dpsig_core::Selection>,
) -> io::Result<()> {
    match chosen {
        Ok(s) => writeln!(
            w,
            "chosen: M = {}, a = {} (loss_sig {:.4})",
            s.m, s.a, s.loss_sig
        ),
        Err(e) => writeln!(w, "no choice: {e}"),
    }
}
