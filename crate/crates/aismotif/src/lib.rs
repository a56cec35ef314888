//! Motif discovery for sets of co-expressed promoter sequences.
//!
//! The search treats candidate motifs as immune-memory detectors: windows
//! of a seed sequence form the initial antibody set, every further
//! sequence contributes antigens, and each antigen clones its
//! best-matching detector under a weighted match score. The surviving
//! table is ranked by a weighted information score. Neither score needs a
//! background model.
//!
//! The crate also ships nucleotide-level evaluation against annotated
//! sites and a planted-motif dataset generator, so discovery runs can be
//! validated end to end.

pub mod evaluation;
pub mod immune;
pub mod report;
pub mod scoring;
pub mod sequence;
pub mod synth;

pub use evaluation::{
    average_site_performance, compute_metrics, confusion_counts, parse_annotations,
    parse_predictions, Annotation, AnnotationStrand, ConfusionCounts, EvalError, MetricReport,
};
pub use immune::{
    rank_detectors, run_aismotif, run_variable_lengths, BestMatch, Detector, ImmuneError,
    ImmuneMemory, Instance, Mode, RunParams, SeedChoice,
};
pub use report::{build_report, write_gff, write_tsv, ReportInstance, ReportRow};
pub use scoring::{
    consensus, information_score, match_score, PositionCountMatrix, ScoringError, BASES,
};
pub use sequence::{
    enumerate_windows, parse_fasta, parse_fasta_str, reverse_complement, write_fasta,
    NucleotideSequence, SequenceError, Strand, Window,
};
pub use synth::{generate_planted, PlantParams, PlantedDataset, SynthError};
