//! Command-line front end: stream generation, experiment runs, and
//! K-sensitivity sweeps.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wordseg::experiment::{self, RunSpec};
use wordseg::streamgen::{self, Corpus};
use wordseg::EngineConfig;

#[derive(Parser)]
#[command(name = "wordseg", about = "Online unsupervised word segmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a letter stream plus gold boundaries from a corpus
    Generate {
        #[arg(long)]
        corpus: PathBuf,
        /// Number of words to draw
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value_t = 123456)]
        seed: u32,
        /// Output file for the letter stream (one line)
        #[arg(long)]
        stream_out: PathBuf,
        /// Output file for gold boundaries (ascending, one per line)
        #[arg(long)]
        gold_out: PathBuf,
    },
    /// Learn from sampled words, segment the corpus, evaluate
    Run {
        #[command(flatten)]
        spec: SpecArgs,
        /// Compare replica output against a golden file; exit 2 on mismatch
        #[arg(long)]
        golden: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = EmitMode::Replica)]
        emit: EmitMode,
        /// Write the evaluation report as JSON
        #[arg(long)]
        report_json: Option<PathBuf>,
        /// Write a per-record dump of sequence memory
        #[arg(long)]
        dump_memory: Option<PathBuf>,
    },
    /// Run the same spec across several K values and tabulate the results
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        /// K values to sweep (overrides --k)
        #[arg(long, value_delimiter = ',', required = true)]
        ks: Vec<f64>,
    },
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Threshold numerator; f_T = K / corpus letter count
    #[arg(long, default_value_t = 0.76)]
    k: f64,
    #[arg(long, default_value_t = 175000)]
    learn_words: usize,
    #[arg(long, default_value_t = 123456)]
    seed: u32,
    #[arg(long)]
    bias: Option<f32>,
    /// Event window capacity
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    min_columns: Option<usize>,
    /// Average-word-score gate threshold
    #[arg(long)]
    gate: Option<f32>,
    /// Select boundaries from first-level scores only
    #[arg(long)]
    no_second_level: bool,
    /// Print a per-event trace of the newest column
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitMode {
    /// Reference text framing plus the stats block
    Replica,
    /// Segmented words only, markers stripped
    Clean,
    /// Evaluation report only
    Report,
}

fn load_spec(args: &SpecArgs) -> Result<RunSpec, String> {
    let text = fs::read_to_string(&args.corpus)
        .map_err(|e| format!("cannot read {}: {e}", args.corpus.display()))?;
    let corpus = Corpus::from_text(&text).map_err(|e| e.to_string())?;
    let defaults = EngineConfig::default();
    let mut spec = RunSpec::new(corpus, args.k, args.learn_words, args.seed);
    spec.bias = args.bias.unwrap_or(defaults.bias);
    spec.window_capacity = args.window.unwrap_or(defaults.window_capacity);
    spec.min_columns = args.min_columns.unwrap_or(defaults.min_columns);
    spec.gate_score = args.gate.unwrap_or(defaults.gate_score);
    spec.second_level = !args.no_second_level;
    spec.trace = args.trace;
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // render help/version normally, usage errors with exit code 1
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Generate {
            corpus,
            n,
            seed,
            stream_out,
            gold_out,
        } => {
            let text = fs::read_to_string(&corpus)
                .map_err(|e| format!("cannot read {}: {e}", corpus.display()))?;
            let corpus = Corpus::from_text(&text).map_err(|e| e.to_string())?;
            let stream = streamgen::generate(&corpus, n, seed);
            let mut gold = String::new();
            for b in &stream.boundaries {
                gold.push_str(&format!("{b}\n"));
            }
            fs::write(&stream_out, stream.letters + "\n").map_err(|e| e.to_string())?;
            fs::write(&gold_out, gold).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            spec,
            golden,
            emit,
            report_json,
            dump_memory,
        } => {
            let spec = load_spec(&spec)?;
            let out = experiment::run(&spec).map_err(|e| e.to_string())?;
            for line in &out.trace_lines {
                eprintln!("{line}");
            }
            match emit {
                EmitMode::Replica => print!("{}", out.replica_text),
                EmitMode::Clean => {
                    println!("{}", out.predicted.words().join(" "));
                }
                EmitMode::Report => print!("{}", out.report.render_text()),
            }
            if let Some(path) = report_json {
                let json =
                    serde_json::to_string_pretty(&out.report).map_err(|e| e.to_string())?;
                fs::write(&path, json).map_err(|e| e.to_string())?;
            }
            if let Some(path) = dump_memory {
                let mut buf = Vec::new();
                out.session
                    .memory()
                    .dump(&mut buf)
                    .map_err(|e| e.to_string())?;
                fs::write(&path, buf).map_err(|e| e.to_string())?;
            }
            if let Some(path) = golden {
                let want = fs::read_to_string(&path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                if want != out.replica_text {
                    eprintln!("golden mismatch against {}", path.display());
                    return Ok(ExitCode::from(2));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { spec, ks } => {
            let spec = load_spec(&spec)?;
            let rows = experiment::sweep(&spec, &ks).map_err(|e| e.to_string())?;
            println!("{:>8} {:>10} {:>10} {:>8}", "K", "bnd_errs", "spans", "F1");
            for (k, out) in &rows {
                println!(
                    "{:>8} {:>10} {:>10} {:>8.4}",
                    k,
                    out.report.boundary_errors,
                    out.report.errors.len(),
                    out.report.boundary_f1
                );
            }
            for (k, out) in &rows {
                for e in &out.report.errors {
                    println!(
                        "K={k}: {:?} pred=[{}] gold=[{}]",
                        e.class,
                        e.predicted.join(" "),
                        e.gold.join(" ")
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
