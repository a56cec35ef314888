use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aismotif::evaluation::{self, EvalError};
use aismotif::immune::{self, ImmuneError, Mode, RunParams, SeedChoice};
use aismotif::report;
use aismotif::sequence::{self, NucleotideSequence};
use aismotif::synth::{self, PlantParams, SynthError};

/// Exit code 1: bad flags or flag combinations. Exit code 2: the input
/// data could not be read or processed.
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn data_in(path: &Path, err: impl std::fmt::Display) -> CliError {
        CliError::Data(format!("{}: {}", path.display(), err))
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ImmuneError> for CliError {
    fn from(e: ImmuneError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "aismotif",
    version,
    about = "Motif discovery in promoter sequences via clonal selection, \
             with built-in evaluation and synthetic dataset generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discover motifs in a FASTA file and write a ranked report
    Discover(DiscoverArgs),
    /// Score predicted instances against annotated sites
    Eval(EvalArgs),
    /// Generate a planted-motif dataset with ground-truth annotations
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Oops,
    Dedup,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Tsv,
    Gff,
}

#[derive(Args)]
struct DiscoverArgs {
    /// Input promoter sequences (FASTA)
    #[arg(long)]
    input: PathBuf,
    /// Motif length
    #[arg(long, conflicts_with_all = ["min_length", "max_length"])]
    length: Option<usize>,
    /// Smallest motif length of a range (needs --max-length)
    #[arg(long, requires = "max_length")]
    min_length: Option<usize>,
    /// Largest motif length of a range (needs --min-length)
    #[arg(long, requires = "min_length")]
    max_length: Option<usize>,
    /// oops keeps repeat occurrences as separate motifs; dedup merges them
    #[arg(long, value_enum, default_value_t = ModeArg::Oops)]
    mode: ModeArg,
    /// Merge threshold for dedup mode, in (0, 1]
    #[arg(long, default_value_t = 0.8)]
    min_match_threshold: f64,
    /// Score antigens on both strands
    #[arg(long)]
    both_strands: bool,
    /// Which sequence seeds the memory: first, random, or a 0-based index
    #[arg(long, default_value = "first")]
    seed_sequence: String,
    /// RNG seed (required with --seed-sequence random)
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Seed the memory from this file of known motifs, one per line
    #[arg(long, conflicts_with_all = ["min_length", "max_length"])]
    known_motifs: Option<PathBuf>,
    /// Report only the best K motifs
    #[arg(long)]
    top: Option<usize>,
    /// Report format
    #[arg(long, value_enum, default_value_t = FormatArg::Tsv)]
    format: FormatArg,
    /// Output path (default: standard output)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Keep windows containing N (they then match no matrix column)
    #[arg(long)]
    keep_ambiguous: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted instances: annotation TSV or discover's GFF output
    #[arg(long)]
    predictions: PathBuf,
    /// Known sites: TSV of seq_id, start, end, optional strand
    #[arg(long)]
    annotations: PathBuf,
    /// The evaluated sequences (FASTA), used for sequence lengths
    #[arg(long)]
    input: PathBuf,
    /// Output path (default: standard output)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    num_seqs: usize,
    #[arg(long)]
    seq_len: usize,
    #[arg(long)]
    motif_len: usize,
    /// Substitutions per planted copy
    #[arg(long, default_value_t = 0)]
    mutations: usize,
    /// Plant copies on either strand
    #[arg(long)]
    both_strands: bool,
    #[arg(long)]
    rng_seed: u64,
    /// Files are written as <prefix>.fa, <prefix>.ann.tsv, <prefix>.motif.txt
    #[arg(long)]
    out_prefix: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Discover(args) => cmd_discover(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            process::exit(1);
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            process::exit(2);
        }
    }
}

fn read_fasta(path: &Path) -> Result<Vec<NucleotideSequence>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::data_in(path, e))?;
    sequence::parse_fasta(io::BufReader::new(file)).map_err(|e| CliError::data_in(path, e))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let file = fs::File::create(p).map_err(|e| CliError::data_in(p, e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn parse_seed_choice(args: &DiscoverArgs) -> Result<SeedChoice, CliError> {
    match args.seed_sequence.as_str() {
        "first" => Ok(SeedChoice::First),
        "random" => match args.rng_seed {
            Some(seed) => Ok(SeedChoice::Random { rng_seed: seed }),
            None => Err(CliError::Usage(
                "--seed-sequence random requires --rng-seed".into(),
            )),
        },
        other => other.parse::<usize>().map(SeedChoice::Index).map_err(|_| {
            CliError::Usage(format!(
                "--seed-sequence must be 'first', 'random' or a 0-based index, got '{other}'"
            ))
        }),
    }
}

fn read_known_motifs(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data_in(path, e))?;
    let motifs: Vec<String> = text
        .lines()
        .map(|l| l.trim().to_ascii_uppercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if motifs.is_empty() {
        return Err(CliError::data_in(path, "no motifs found"));
    }
    Ok(motifs)
}

fn cmd_discover(args: DiscoverArgs) -> Result<(), CliError> {
    if !(args.min_match_threshold > 0.0 && args.min_match_threshold <= 1.0) {
        return Err(CliError::Usage(format!(
            "--min-match-threshold must lie in (0, 1], got {}",
            args.min_match_threshold
        )));
    }
    let lengths = match (args.length, args.min_length, args.max_length) {
        (Some(l), None, None) => (l, l),
        (None, Some(lo), Some(hi)) => {
            if lo == 0 || lo > hi {
                return Err(CliError::Usage(format!(
                    "invalid length range {lo}..{hi}"
                )));
            }
            (lo, hi)
        }
        _ => {
            return Err(CliError::Usage(
                "provide --length, or both --min-length and --max-length".into(),
            ))
        }
    };
    if lengths.0 == 0 {
        return Err(CliError::Usage("--length must be at least 1".into()));
    }

    let sequences = read_fasta(&args.input)?;
    let mut params = RunParams::new(lengths.0);
    params.mode = match args.mode {
        ModeArg::Oops => Mode::Oops,
        ModeArg::Dedup => Mode::Dedup,
    };
    params.min_match_threshold = args.min_match_threshold;
    params.both_strands = args.both_strands;
    params.seed_choice = parse_seed_choice(&args)?;
    params.top_k = args.top;
    params.skip_ambiguous = !args.keep_ambiguous;
    if let Some(path) = &args.known_motifs {
        params.known_motifs = Some(read_known_motifs(path)?);
    }

    let ranked = if lengths.0 == lengths.1 {
        immune::run_aismotif(&sequences, &params)
    } else {
        immune::run_variable_lengths(&sequences, lengths.0, lengths.1, &params)
    }
    .map_err(|e| CliError::data_in(&args.input, e))?;

    let rows = report::build_report(&ranked);
    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        FormatArg::Tsv => report::write_tsv(&mut out, &rows)?,
        FormatArg::Gff => report::write_gff(&mut out, &rows)?,
    }
    out.flush()?;
    Ok(())
}

fn clean(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let sequences = read_fasta(&args.input)?;
    let lengths: HashMap<String, usize> = sequences
        .iter()
        .map(|s| (s.id.clone(), s.len()))
        .collect();

    let truth_text =
        fs::read_to_string(&args.annotations).map_err(|e| CliError::data_in(&args.annotations, e))?;
    let truth = evaluation::parse_annotations(&truth_text)
        .map_err(|e| CliError::data_in(&args.annotations, e))?;

    let pred_text =
        fs::read_to_string(&args.predictions).map_err(|e| CliError::data_in(&args.predictions, e))?;
    let predictions = evaluation::parse_predictions(&pred_text)
        .map_err(|e| CliError::data_in(&args.predictions, e))?;

    let counts = evaluation::confusion_counts(&predictions, &truth, &lengths)?;
    let metrics = evaluation::compute_metrics(&counts)?;

    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "# aismotif eval: nucleotide-level assessment")?;
    writeln!(out, "# predictions: {}", args.predictions.display())?;
    writeln!(out, "# annotations: {}", args.annotations.display())?;
    writeln!(
        out,
        "# Values come from local position-level counting. External benchmark \
         assessment services use unpublished counting conventions, so their \
         reported figures are not directly comparable."
    )?;
    for (name, value) in metrics.rows() {
        writeln!(out, "{}\t{:.4}", name, clean(value))?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let params = PlantParams {
        num_seqs: args.num_seqs,
        seq_len: args.seq_len,
        motif_len: args.motif_len,
        num_mutations: args.mutations,
        both_strands: args.both_strands,
        rng_seed: args.rng_seed,
    };
    let dataset = synth::generate_planted(&params)?;

    let prefix = args.out_prefix.as_os_str().to_string_lossy();
    let fasta_path = PathBuf::from(format!("{prefix}.fa"));
    let ann_path = PathBuf::from(format!("{prefix}.ann.tsv"));
    let motif_path = PathBuf::from(format!("{prefix}.motif.txt"));

    let mut fa = BufWriter::new(
        fs::File::create(&fasta_path).map_err(|e| CliError::data_in(&fasta_path, e))?,
    );
    sequence::write_fasta(&mut fa, &dataset.sequences)?;
    fa.flush()?;

    let mut ann = BufWriter::new(
        fs::File::create(&ann_path).map_err(|e| CliError::data_in(&ann_path, e))?,
    );
    evaluation::write_annotations(&mut ann, &dataset.annotations)?;
    ann.flush()?;

    fs::write(&motif_path, format!("{}\n", dataset.motif))
        .map_err(|e| CliError::data_in(&motif_path, e))?;
    Ok(())
}
