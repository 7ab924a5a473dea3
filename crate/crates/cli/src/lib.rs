//! Command-line front end for `converse-core`.
//!
//! Every subcommand renders its report to a string, which goes to `--out`
//! or standard output. Reports are byte-stable for fixed inputs; run time is
//! printed on standard error.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use converse_core::entropy::{fano_lower_bound, GTable};
use converse_core::format::{sig17, Json};
use converse_core::harness::{
    fano_json, monte_carlo_error, prop1_experiment, repetition_trend, theorem1_trend, trend_csv,
    trend_json, CodeSource, DecoderKind, TrialConfig,
};
use converse_core::{BipartiteCode, ChannelParams};

#[derive(Debug, Parser)]
#[command(
    name = "converse",
    version,
    about = "Converse bounds and decoding experiments for bipartite-graph codes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate G(0..=dmax), the residual uncertainty of a bit seen d+1 times.
    ComputeG {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        dmax: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fano lower bound on the block error probability of a code.
    Fano {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimate of the block error probability.
    Simulate {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, value_enum)]
        decoder: DecoderArg,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Worker threads; 0 uses every core. Does not affect the report.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Repetition codes with r = ceil(M log2 k) checked against P_k <= 1/k.
    Prop1 {
        /// Repetition factor M.
        #[arg(long = "factor", visible_alias = "M")]
        factor: f64,
        /// Comma-separated message lengths.
        #[arg(long, value_delimiter = ',', required = true)]
        k_list: Vec<usize>,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Monte Carlo trials per k; 0 skips simulation.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fano bound, degree and rate trends as k grows.
    Trend {
        #[arg(long, value_enum, default_value_t = FamilyArg::RandomRegular)]
        family: FamilyArg,
        /// Target encoded rate k/(k+m), as a decimal or a fraction like 1/2.
        #[arg(long, value_parser = parse_rate, default_value = "1/2")]
        rate: f64,
        #[arg(long, default_value_t = 3)]
        parity_degree: usize,
        /// Factor M of the repetition family r = ceil(M log2 k).
        #[arg(long = "factor", visible_alias = "M", default_value_t = 1.0)]
        factor: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        k_list: Vec<usize>,
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write a code file from a builder.
    Codegen {
        #[command(flatten)]
        code: BuilderArgs,
        /// Destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// Flip probability.
    #[arg(long)]
    pub p1: f64,
    /// Erasure probability.
    #[arg(long)]
    pub per: f64,
    /// Master seed for codes and trials.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ChannelArgs {
    fn params(&self) -> Result<ChannelParams> {
        Ok(ChannelParams::new(self.p1, self.per)?)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct BuilderArgs {
    #[arg(long, value_enum)]
    pub code_builder: Option<BuilderArg>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Repetitions per message bit.
    #[arg(long)]
    pub r: Option<usize>,
    /// Number of parity nodes.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub parity_degree: Option<usize>,
    /// Seed of the random code; defaults to --seed.
    #[arg(long)]
    pub code_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    /// Code file ("k m" header, then one "f i_1 ... i_f" line per parity).
    #[arg(long, conflicts_with = "code_builder")]
    pub code: Option<PathBuf>,
    #[command(flatten)]
    pub builder: BuilderArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuilderArg {
    Repetition,
    RandomRegular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    Majority,
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    RandomRegular,
    Repetition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

fn parse_rate(s: &str) -> std::result::Result<f64, String> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in {s:?}"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in {s:?}"))?;
            num / den
        }
        None => s.parse().map_err(|_| format!("bad rate {s:?}"))?,
    };
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(format!("rate {s} must lie in (0, 1]"))
    }
}

impl BuilderArgs {
    fn source(&self, default_seed: u64) -> Result<CodeSource> {
        let need =
            |v: Option<usize>, flag: &str| v.with_context(|| format!("--{flag} is required"));
        match self.code_builder {
            Some(BuilderArg::Repetition) => Ok(CodeSource::Repetition {
                k: need(self.k, "k")?,
                r: need(self.r, "r")?,
            }),
            Some(BuilderArg::RandomRegular) => Ok(CodeSource::RandomRegular {
                k: need(self.k, "k")?,
                m: need(self.m, "m")?,
                parity_degree: need(self.parity_degree, "parity-degree")?,
                seed: self.code_seed.unwrap_or(default_seed),
            }),
            None => bail!("one of --code or --code-builder is required"),
        }
    }
}

impl CodeArgs {
    fn source(&self, default_seed: u64) -> Result<CodeSource> {
        match &self.code {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let code = BipartiteCode::parse(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                Ok(CodeSource::Explicit {
                    label: path.display().to_string(),
                    code,
                })
            }
            None => self.builder.source(default_seed),
        }
    }
}

/// Rendered report and where it goes.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub out: Option<PathBuf>,
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    Ok(pool.install(f))
}

/// Runs one parsed command and renders its report.
pub fn execute(cli: &Cli) -> Result<Rendered> {
    match &cli.command {
        Command::ComputeG {
            channel,
            dmax,
            output,
        } => {
            let table = GTable::new(channel.params()?, *dmax);
            let text = match output.format.unwrap_or(FormatArg::Csv) {
                FormatArg::Csv => table.to_csv(),
                FormatArg::Json => Json::object([
                    ("p1", Json::from(table.params().p1())),
                    ("p_er", Json::from(table.params().p_er())),
                    ("d_max", Json::from(table.d_max())),
                    (
                        "G",
                        Json::Array(table.values().iter().map(|&g| Json::from(g)).collect()),
                    ),
                ])
                .render(),
            };
            Ok(Rendered {
                text,
                out: output.out.clone(),
            })
        }
        Command::Fano {
            code,
            channel,
            output,
        } => {
            let params = channel.params()?;
            let source = code.source(channel.seed)?;
            let code = source.build()?;
            let fano = fano_lower_bound(&code, &params);
            let text = match output.format.unwrap_or(FormatArg::Json) {
                FormatArg::Json => {
                    let mut doc = fano_json(&fano);
                    if let Json::Object(fields) = &mut doc {
                        fields.insert("m".into(), Json::from(code.m()));
                        fields.insert("encoded_rate".into(), Json::from(code.encoded_rate()));
                        fields.insert("p1".into(), Json::from(params.p1()));
                        fields.insert("p_er".into(), Json::from(params.p_er()));
                    }
                    doc.render()
                }
                FormatArg::Csv => format!(
                    "k,m,encoded_rate,entropy_sum,lower_bound\n{},{},{},{},{}\n",
                    code.k(),
                    code.m(),
                    sig17(code.encoded_rate()),
                    sig17(fano.entropy_sum),
                    sig17(fano.lower_bound)
                ),
            };
            Ok(Rendered {
                text,
                out: output.out.clone(),
            })
        }
        Command::Simulate {
            code,
            channel,
            decoder,
            trials,
            threads,
            output,
        } => {
            let config = TrialConfig {
                code: code.source(channel.seed)?,
                params: channel.params()?,
                decoder: match decoder {
                    DecoderArg::Majority => DecoderKind::Majority,
                    DecoderArg::Map => DecoderKind::Map,
                },
                trials: *trials,
                seed: channel.seed,
            };
            let report = with_pool(*threads, || monte_carlo_error(&config))??;
            eprintln!(
                "simulate: {} trials in {:.3} s",
                report.trials, report.runtime_seconds
            );
            let text = match output.format.unwrap_or(FormatArg::Json) {
                FormatArg::Json => report.to_json().render(),
                FormatArg::Csv => format!(
                    "k,m,trials,block_errors,block_error_rate,ci_low,ci_high,fano_lower_bound\n{},{},{},{},{},{},{},{}\n",
                    report.k,
                    report.m,
                    report.trials,
                    report.block_errors,
                    sig17(report.block_error_rate),
                    sig17(report.ci_low),
                    sig17(report.ci_high),
                    sig17(report.fano.lower_bound)
                ),
            };
            Ok(Rendered {
                text,
                out: output.out.clone(),
            })
        }
        Command::Prop1 {
            factor,
            k_list,
            channel,
            trials,
            threads,
            output,
        } => {
            let params = channel.params()?;
            let table = with_pool(*threads, || {
                prop1_experiment(*factor, k_list, &params, *trials, channel.seed)
            })??;
            let text = match output.format.unwrap_or(FormatArg::Json) {
                FormatArg::Json => table.to_json().render(),
                FormatArg::Csv => table.to_csv(),
            };
            Ok(Rendered {
                text,
                out: output.out.clone(),
            })
        }
        Command::Trend {
            family,
            rate,
            parity_degree,
            factor,
            k_list,
            channel,
            output,
        } => {
            let params = channel.params()?;
            let rows = match family {
                FamilyArg::RandomRegular => {
                    theorem1_trend(*rate, *parity_degree, k_list, &params, channel.seed)?
                }
                FamilyArg::Repetition => repetition_trend(*factor, k_list, &params)?,
            };
            let text = match output.format.unwrap_or(FormatArg::Json) {
                FormatArg::Json => trend_json(&rows).render(),
                FormatArg::Csv => trend_csv(&rows),
            };
            Ok(Rendered {
                text,
                out: output.out.clone(),
            })
        }
        Command::Codegen { code, out } => {
            let seed = code.code_seed.unwrap_or(0);
            let built = code.source(seed)?.build()?;
            Ok(Rendered {
                text: built.serialize(),
                out: out.clone(),
            })
        }
    }
}

/// Parses `argv`, runs the command and writes the report. Returns the
/// process exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return err.exit_code();
        }
    };
    let started = Instant::now();
    let result = execute(&cli).and_then(|rendered| {
        match &rendered.out {
            Some(path) => fs::write(path, &rendered.text)
                .with_context(|| format!("writing {}", path.display()))?,
            None => print!("{}", rendered.text),
        }
        Ok(())
    });
    match result {
        Ok(()) => {
            eprintln!("done in {:.3} s", started.elapsed().as_secs_f64());
            0
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("converse").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn rate_parsing() {
        assert_eq!(parse_rate("1/2"), Ok(0.5));
        assert_eq!(parse_rate("0.25"), Ok(0.25));
        assert!(parse_rate("3/2").is_err());
        assert!(parse_rate("x").is_err());
    }

    #[test]
    fn compute_g_rows() {
        let cli = parse(&["compute-g", "--p1", "0.1", "--per", "0.1", "--dmax", "20"]);
        let rendered = execute(&cli).unwrap();
        assert_eq!(rendered.text.lines().count(), 22);
        assert!(rendered.text.starts_with("d,G\n0,"));
    }

    #[test]
    fn builder_flags_required() {
        let cli = parse(&[
            "fano",
            "--code-builder",
            "repetition",
            "--k",
            "4",
            "--p1",
            "0",
            "--per",
            "0.3",
        ]);
        assert!(execute(&cli).unwrap_err().to_string().contains("--r"));
        let cli = parse(&["fano", "--p1", "0", "--per", "0.3"]);
        assert!(execute(&cli).is_err());
    }

    #[test]
    fn invalid_channel_rejected() {
        let cli = parse(&["compute-g", "--p1", "0.7", "--per", "0.7", "--dmax", "2"]);
        assert!(execute(&cli).is_err());
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_ne!(run_cli(["converse", "frobnicate"]), 0);
        assert_ne!(run_cli(["converse", "compute-g", "--bogus"]), 0);
    }
}
