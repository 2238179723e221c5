use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use affordance_kb::kb::{
    build_kb, export, load_kb, mln_query, save_kb, train_mln, validate_files, ExportFormat,
    InputFormat, KbError, PipelineConfig, Query, DEFAULT_THRESHOLD,
};
use affordance_kb::mln::{default_program, parse_program};

#[derive(Parser)]
#[command(
    name = "affordance-kb",
    version,
    about = "Build and query ability-modality knowledge bases"
)]
struct Cli {
    /// Pipeline configuration file (TOML)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured seed
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Fail on the first malformed sentence instead of skipping it
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a KB from parsed corpus files
    Build {
        #[arg(short, long, value_name = "KB")]
        output: PathBuf,
        /// Overrides the configured input format (conllu or sd)
        #[arg(long, value_parser = parse_format)]
        format: Option<InputFormat>,
        #[arg(required = true)]
        corpus: Vec<PathBuf>,
    },
    /// Answer a query, e.g. `can robot build` or `neighbors passive door 3`
    Query {
        kb: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(required = true, num_args = 1..)]
        query: Vec<String>,
    },
    /// Dump the KB as JSON lines or a pair list
    Export {
        kb: PathBuf,
        #[arg(long, value_parser = ["jsonl", "pairs"])]
        format: String,
        /// Output file; stdout when absent
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Learn MLN weights from the KB's counts and store them in the KB
    MlnTrain {
        kb: PathBuf,
        /// Formula file; the built-in CanDo/Affords program when absent
        #[arg(long)]
        formulas: Option<PathBuf>,
        /// Write the updated KB here instead of in place
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Marginal probability of a ground atom, e.g. `CanDo(arm,pull)`
    MlnQuery {
        kb: PathBuf,
        atom: String,
        /// Evidence file, one ground literal per line
        #[arg(long)]
        evidence: Option<PathBuf>,
    },
    /// Check corpus files and list every rejected sentence
    Validate {
        #[arg(long, value_parser = parse_format)]
        format: Option<InputFormat>,
        #[arg(required = true)]
        corpus: Vec<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<InputFormat, String> {
    match s {
        "conllu" => Ok(InputFormat::Conllu),
        "sd" => Ok(InputFormat::Sd),
        other => Err(format!("expected conllu or sd, got {other:?}")),
    }
}

fn read(path: &Path) -> Result<String, KbError> {
    fs::read_to_string(path).map_err(|e| KbError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_out(output: Option<&Path>, text: &str) -> Result<(), KbError> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| KbError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, KbError> {
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::from_toml(&read(p)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if cli.strict {
        config.strict = true;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), KbError> {
    let mut config = load_config(&cli)?;
    match cli.command {
        Command::Build {
            output,
            format,
            corpus,
        } => {
            if let Some(f) = format {
                config.input_format = f;
            }
            let (kb, report) = build_kb(&corpus, &config)?;
            save_kb(&kb, &output)?;
            print!("{report}");
        }
        Command::Query {
            kb,
            threshold,
            query,
        } => {
            let query = Query::from_words(&query)?;
            let kb = load_kb(&kb)?;
            for line in kb.answer(&query, threshold)? {
                println!("{line}");
            }
        }
        Command::Export { kb, format, output } => {
            let format: ExportFormat = format.parse()?;
            let kb = load_kb(&kb)?;
            write_out(output.as_deref(), &export(&kb, format))?;
        }
        Command::MlnTrain {
            kb: path,
            formulas,
            output,
        } => {
            let mut kb = load_kb(&path)?;
            let program = match formulas {
                Some(p) => parse_program(&read(&p)?)?,
                None => default_program(),
            };
            let section = train_mln(&kb.model, &program, config.mln_l2, &config.step_config())?;
            for (f, w) in section.program.formulas.iter().map(|f| (&f.id, f.weight)) {
                println!("{f} {w:.4}");
            }
            println!(
                "iterations {} converged {}",
                section.iterations, section.converged
            );
            kb.mln = Some(section);
            save_kb(&kb, output.as_deref().unwrap_or(&path))?;
        }
        Command::MlnQuery { kb, atom, evidence } => {
            let kb = load_kb(&kb)?;
            let evidence = match evidence {
                Some(p) => read(&p)?,
                None => String::new(),
            };
            let p = mln_query(&kb, &atom, &evidence, &config.sampler_config())?;
            println!("{p:.4}");
        }
        Command::Validate { format, corpus } => {
            let checks = validate_files(&corpus, format.unwrap_or(config.input_format))?;
            let mut rejected = 0;
            for c in &checks {
                println!(
                    "{}: {} sentences, {} rejected",
                    c.path,
                    c.sentences,
                    c.errors.len()
                );
                for e in &c.errors {
                    println!("{}:{}", c.path, e);
                }
                rejected += c.errors.len();
            }
            if rejected > 0 {
                return Err(KbError::Rejected(rejected));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("{}", KbError::Usage(first.to_string()).report_line());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
