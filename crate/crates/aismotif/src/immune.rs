//! The clonal-selection search. Windows of a seed sequence become the
//! initial memory detectors (antibodies); every remaining sequence is
//! processed in turn, its windows acting as antigens. Each antigen is
//! scored against the frozen incoming generation, its best-matching
//! detector is cloned with the antigen appended, and the next generation
//! consists of exactly those clones. The final table is ranked by
//! information score.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scoring::{
    self, consensus, information_score, match_score_encoded, PositionCountMatrix, ScoringError,
};
use crate::sequence::{
    enumerate_windows, reverse_complement, NucleotideSequence, SequenceError, Strand, Window,
};

#[derive(Debug, Error)]
pub enum ImmuneError {
    #[error("empty antibody set: nothing to seed the immune memory with")]
    EmptySource,
    #[error("no input sequences")]
    EmptyInput,
    #[error("sequence '{id}' yields no usable windows of length {motif_len}")]
    NoUsableWindows { id: String, motif_len: usize },
    #[error("known motif '{motif}' has length {found}, expected {expected}")]
    KnownMotifLength {
        motif: String,
        found: usize,
        expected: usize,
    },
    #[error("known motif '{motif}' contains a base outside A, C, G, T")]
    KnownMotifAlphabet { motif: String },
    #[error("seed sequence index {index} out of range (have {count} sequences)")]
    SeedIndexOutOfRange { index: usize, count: usize },
    #[error("antigen window length {found} does not match motif length {expected}")]
    AntigenLengthMismatch { found: usize, expected: usize },
    #[error("antigen list is empty")]
    NoAntigens,
    #[error("min match threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("motif length range {min}..{max} is invalid")]
    InvalidLengthRange { min: usize, max: usize },
    #[error("ranking requested before all sequences were processed ({stage} of {expected})")]
    Incomplete { stage: usize, expected: usize },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// How the seed sequence (the one whose windows become the initial
/// antibodies) is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedChoice {
    /// First sequence in input order. The reproducible default.
    First,
    /// A fixed 0-based index into the input ordering.
    Index(usize),
    /// Uniformly random, driven by the given seed.
    Random { rng_seed: u64 },
}

/// Whether repeated occurrences within one sequence stay separate
/// detectors or merge into a duplicates list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One occurrence per sequence: every antigen spawns its own clone.
    Oops,
    /// Clones of the same parent merge when the antigen clears the
    /// minimum match threshold against an already-emitted clone.
    Dedup,
}

/// Search parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub motif_length: usize,
    pub mode: Mode,
    /// Merge threshold for [`Mode::Dedup`], in (0, 1].
    pub min_match_threshold: f64,
    /// Score antigens in both orientations and record the winning strand.
    pub both_strands: bool,
    pub seed_choice: SeedChoice,
    /// Seed the memory with these motifs instead of a sequence's windows;
    /// all input sequences are then processed as antigen sources.
    pub known_motifs: Option<Vec<String>>,
    /// Keep only the best `top_k` detectors in the ranked output.
    pub top_k: Option<usize>,
    /// Drop windows containing N (default). When off, N matches no column.
    pub skip_ambiguous: bool,
}

impl RunParams {
    pub fn new(motif_length: usize) -> Self {
        RunParams {
            motif_length,
            mode: Mode::Oops,
            min_match_threshold: 0.8,
            both_strands: false,
            seed_choice: SeedChoice::First,
            known_motifs: None,
            top_k: None,
            skip_ambiguous: true,
        }
    }

    fn validate(&self) -> Result<(), ImmuneError> {
        if self.motif_length == 0 {
            return Err(SequenceError::ZeroLength.into());
        }
        if !(self.min_match_threshold > 0.0 && self.min_match_threshold <= 1.0) {
            return Err(ImmuneError::InvalidThreshold(self.min_match_threshold));
        }
        Ok(())
    }
}

/// One stored motif occurrence. `subseq` reads in motif orientation, i.e.
/// it is the reverse complement of the source window when `strand` is
/// [`Strand::Reverse`]; `offset` always refers to the forward coordinates
/// of the source sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub seq_index: usize,
    pub seq_id: String,
    pub offset: usize,
    pub strand: Strand,
    pub subseq: String,
}

impl Instance {
    fn from_window(window: &Window, seq_index: usize, strand: Strand) -> Self {
        Instance {
            seq_index,
            seq_id: window.seq_id.clone(),
            offset: window.offset,
            strand,
            subseq: window.oriented(strand).to_string(),
        }
    }

    fn flip_orientation(&mut self) {
        self.strand = self.strand.flipped();
        self.subseq = reverse_complement(&self.subseq).expect("stored instances are valid");
    }
}

/// One immune-memory entry: an ordered list of motif instances (one per
/// processed sequence in oops mode) plus a count-matrix cache that always
/// reflects instances, duplicates and the optional known-motif seed.
#[derive(Debug, Clone)]
pub struct Detector {
    instances: Vec<Instance>,
    duplicates: Vec<Instance>,
    seed_motif: Option<String>,
    pcm: PositionCountMatrix,
    info_score: Option<f64>,
}

impl Detector {
    fn from_window(window: &Window, seq_index: usize) -> Self {
        let instance = Instance::from_window(window, seq_index, Strand::Forward);
        let mut pcm = PositionCountMatrix::empty(window.len());
        pcm.add_instance(&instance.subseq);
        Detector {
            instances: vec![instance],
            duplicates: Vec::new(),
            seed_motif: None,
            pcm,
        info_score: None,
        }
    }

    fn from_known_motif(motif: &str) -> Self {
        let mut pcm = PositionCountMatrix::empty(motif.len());
        pcm.add_instance(motif);
        Detector {
            instances: Vec::new(),
            duplicates: Vec::new(),
            seed_motif: Some(motif.to_string()),
            pcm,
            info_score: None,
        }
    }

    fn cloned_with(&self, instance: Instance) -> Self {
        let mut clone = self.clone();
        clone.pcm.add_instance(&instance.subseq);
        clone.instances.push(instance);
        clone
    }

    fn absorb_duplicate(&mut self, instance: Instance) {
        self.pcm.add_instance(&instance.subseq);
        self.duplicates.push(instance);
    }

    /// Reverse-complements the whole detector: every instance flips
    /// strand and subsequence, the count matrix is mirrored. The
    /// information score is unchanged by this operation.
    fn flip_orientation(&mut self) {
        for inst in self.instances.iter_mut().chain(self.duplicates.iter_mut()) {
            inst.flip_orientation();
        }
        if let Some(seed) = &self.seed_motif {
            self.seed_motif = Some(reverse_complement(seed).expect("valid seed"));
        }
        self.pcm = self.pcm.reverse_complemented();
    }

    /// In both-strands mode a detector and its reverse complement describe
    /// the same motif; report whichever orientation has the smaller
    /// consensus so output does not depend on which strand the search
    /// happened to walk. Detectors seeded from known motifs keep the
    /// user's orientation.
    fn canonicalize_orientation(&mut self) {
        if self.seed_motif.is_some() {
            return;
        }
        let fwd = consensus(&self.pcm);
        let rev = consensus(&self.pcm.reverse_complemented());
        if rev < fwd {
            self.flip_orientation();
        }
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn duplicates(&self) -> &[Instance] {
        &self.duplicates
    }

    /// The known motif this detector was seeded from, if any.
    pub fn seed_motif(&self) -> Option<&str> {
        self.seed_motif.as_deref()
    }

    pub fn pcm(&self) -> &PositionCountMatrix {
        &self.pcm
    }

    pub fn motif_length(&self) -> usize {
        self.pcm.length()
    }

    /// Set at ranking time; `None` while the search is still running.
    pub fn info_score(&self) -> Option<f64> {
        self.info_score
    }

    pub fn consensus(&self) -> String {
        consensus(&self.pcm)
    }

    fn first_instance_key(&self) -> (usize, usize, u8) {
        match self.instances.first() {
            Some(inst) => (
                inst.seq_index,
                inst.offset,
                match inst.strand {
                    Strand::Forward => 0,
                    Strand::Reverse => 1,
                },
            ),
            None => (usize::MAX, usize::MAX, 0),
        }
    }
}

/// Sort key of one ranked detector: score, consensus, first coordinates.
type RankKey = (f64, String, (usize, usize, u8));

/// Result of matching one antigen against the memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestMatch {
    pub detector_index: usize,
    pub score: f64,
    pub strand: Strand,
}

/// The memory detector table plus progress through the input set.
#[derive(Debug, Clone)]
pub struct ImmuneMemory {
    detectors: Vec<Detector>,
    stage: usize,
    params: RunParams,
}

impl ImmuneMemory {
    /// Seeds the memory with one detector per window, each holding a
    /// single forward-strand instance. `stage` starts at 1: the seed
    /// sequence counts as processed.
    pub fn from_windows(
        windows: &[Window],
        seq_index: usize,
        params: &RunParams,
    ) -> Result<Self, ImmuneError> {
        params.validate()?;
        if windows.is_empty() {
            return Err(ImmuneError::EmptySource);
        }
        for w in windows {
            if w.len() != params.motif_length {
                return Err(ImmuneError::AntigenLengthMismatch {
                    found: w.len(),
                    expected: params.motif_length,
                });
            }
        }
        let detectors = windows
            .iter()
            .map(|w| Detector::from_window(w, seq_index))
            .collect();
        Ok(ImmuneMemory {
            detectors,
            stage: 1,
            params: params.clone(),
        })
    }

    /// Seeds the memory with user-supplied motifs. `stage` starts at 0 so
    /// every input sequence is subsequently processed as antigens.
    pub fn from_known_motifs(motifs: &[String], params: &RunParams) -> Result<Self, ImmuneError> {
        params.validate()?;
        if motifs.is_empty() {
            return Err(ImmuneError::EmptySource);
        }
        for motif in motifs {
            if motif.len() != params.motif_length {
                return Err(ImmuneError::KnownMotifLength {
                    motif: motif.clone(),
                    found: motif.len(),
                    expected: params.motif_length,
                });
            }
            if !motif.bytes().all(|b| matches!(b, b'A' | b'C' | b'G' | b'T')) {
                return Err(ImmuneError::KnownMotifAlphabet {
                    motif: motif.clone(),
                });
            }
        }
        let detectors = motifs
            .iter()
            .map(|m| Detector::from_known_motif(m))
            .collect();
        Ok(ImmuneMemory {
            detectors,
            stage: 0,
            params: params.clone(),
        })
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    /// Number of sequences processed so far.
    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn params(&self) -> &RunParams {
        &self.params
    }

    /// Finds the detector that best matches the antigen, scoring the
    /// forward string and, in both-strands mode, also the reverse. Ties
    /// resolve to the lowest detector index, forward over reverse.
    pub fn best_match(&self, antigen: &Window) -> Result<BestMatch, ImmuneError> {
        if antigen.len() != self.params.motif_length {
            return Err(ImmuneError::AntigenLengthMismatch {
                found: antigen.len(),
                expected: self.params.motif_length,
            });
        }
        debug_assert!(!self.detectors.is_empty());
        let fwd = scoring::encode_lossy(&antigen.forward);
        let rev = self
            .params
            .both_strands
            .then(|| scoring::encode_lossy(&antigen.reverse));
        let mut best: Option<BestMatch> = None;
        for (index, detector) in self.detectors.iter().enumerate() {
            let mut consider = |score: f64, strand: Strand| {
                if best.is_none_or(|b| score > b.score) {
                    best = Some(BestMatch {
                        detector_index: index,
                        score,
                        strand,
                    });
                }
            };
            consider(match_score_encoded(&detector.pcm, &fwd), Strand::Forward);
            if let Some(rev) = &rev {
                consider(match_score_encoded(&detector.pcm, rev), Strand::Reverse);
            }
        }
        Ok(best.expect("memory is non-empty"))
    }

    /// Runs one generation: every antigen is matched against the frozen
    /// incoming detectors and contributes exactly one clone (or, in dedup
    /// mode, merges into an earlier clone of the same parent when it
    /// clears the match threshold). The incoming generation is retired
    /// wholesale; clones are emitted in antigen order.
    pub fn clonal_step(
        self,
        antigens: &[Window],
        seq_index: usize,
    ) -> Result<ImmuneMemory, ImmuneError> {
        if antigens.is_empty() {
            return Err(ImmuneError::NoAntigens);
        }
        let mut next: Vec<Detector> = Vec::with_capacity(antigens.len());
        // Parent index -> clones already emitted this generation.
        let mut clones_of: HashMap<usize, Vec<usize>> = HashMap::new();
        for antigen in antigens {
            let matched = self.best_match(antigen)?;
            if self.params.mode == Mode::Dedup {
                if let Some((clone_index, strand)) =
                    self.find_merge_target(&next, &clones_of, matched.detector_index, antigen)
                {
                    let instance = Instance::from_window(antigen, seq_index, strand);
                    next[clone_index].absorb_duplicate(instance);
                    continue;
                }
            }
            let instance = Instance::from_window(antigen, seq_index, matched.strand);
            next.push(self.detectors[matched.detector_index].cloned_with(instance));
            clones_of
                .entry(matched.detector_index)
                .or_default()
                .push(next.len() - 1);
        }
        Ok(ImmuneMemory {
            detectors: next,
            stage: self.stage + 1,
            params: self.params,
        })
    }

    /// First already-emitted clone of `parent` that the antigen matches at
    /// or above the threshold, along with the orientation that achieved
    /// the qualifying score against that clone.
    fn find_merge_target(
        &self,
        next: &[Detector],
        clones_of: &HashMap<usize, Vec<usize>>,
        parent: usize,
        antigen: &Window,
    ) -> Option<(usize, Strand)> {
        let clone_indices = clones_of.get(&parent)?;
        let fwd = scoring::encode_lossy(&antigen.forward);
        let rev = self
            .params
            .both_strands
            .then(|| scoring::encode_lossy(&antigen.reverse));
        for &ci in clone_indices {
            let pcm = &next[ci].pcm;
            let mut score = match_score_encoded(pcm, &fwd);
            let mut strand = Strand::Forward;
            if let Some(rev) = &rev {
                let rev_score = match_score_encoded(pcm, rev);
                if rev_score > score {
                    score = rev_score;
                    strand = Strand::Reverse;
                }
            }
            if score >= self.params.min_match_threshold {
                return Some((ci, strand));
            }
        }
        None
    }
}

/// Ranks the completed memory: computes each detector's information score
/// (normalized by its own instance count, duplicates and seed included),
/// sorts descending with ties broken by lexicographically smaller
/// consensus and then first-instance coordinates, and truncates to
/// `top_k`. In both-strands mode detectors are first brought into a
/// canonical orientation so the report does not depend on which strand
/// the search walked.
pub fn rank_detectors(
    memory: ImmuneMemory,
    num_sequences: usize,
) -> Result<Vec<Detector>, ImmuneError> {
    if memory.stage != num_sequences {
        return Err(ImmuneError::Incomplete {
            stage: memory.stage,
            expected: num_sequences,
        });
    }
    let ImmuneMemory {
        mut detectors,
        params,
        ..
    } = memory;
    for det in &mut detectors {
        if params.both_strands {
            det.canonicalize_orientation();
        }
        let score = information_score(&det.pcm, det.pcm.instance_count())?;
        det.info_score = Some(score);
    }
    let mut keyed: Vec<(RankKey, Detector)> = detectors
        .into_iter()
        .map(|d| {
            let key = (
                d.info_score.expect("just set"),
                d.consensus(),
                d.first_instance_key(),
            );
            (key, d)
        })
        .collect();
    keyed.sort_by(|(a, _), (b, _)| {
        b.0.partial_cmp(&a.0)
            .expect("scores are finite")
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    let mut ranked: Vec<Detector> = keyed.into_iter().map(|(_, d)| d).collect();
    if let Some(k) = params.top_k {
        ranked.truncate(k);
    }
    Ok(ranked)
}

fn choose_seed_index(
    sequences: &[NucleotideSequence],
    choice: SeedChoice,
) -> Result<usize, ImmuneError> {
    match choice {
        SeedChoice::First => Ok(0),
        SeedChoice::Index(k) => {
            if k < sequences.len() {
                Ok(k)
            } else {
                Err(ImmuneError::SeedIndexOutOfRange {
                    index: k,
                    count: sequences.len(),
                })
            }
        }
        SeedChoice::Random { rng_seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            Ok(rng.gen_range(0..sequences.len()))
        }
    }
}

fn run_single_length(
    sequences: &[NucleotideSequence],
    params: &RunParams,
) -> Result<Vec<Detector>, ImmuneError> {
    if sequences.is_empty() {
        return Err(ImmuneError::EmptyInput);
    }
    params.validate()?;
    let l = params.motif_length;
    for seq in sequences {
        if seq.len() < l {
            return Err(SequenceError::SequenceShorterThanMotif {
                id: seq.id.clone(),
                seq_len: seq.len(),
                motif_len: l,
            }
            .into());
        }
    }

    let antigens_for = |index: usize| -> Result<Vec<Window>, ImmuneError> {
        let windows = enumerate_windows(&sequences[index], l, params.skip_ambiguous)?;
        if windows.is_empty() {
            return Err(ImmuneError::NoUsableWindows {
                id: sequences[index].id.clone(),
                motif_len: l,
            });
        }
        Ok(windows)
    };

    let (mut memory, remaining): (ImmuneMemory, Vec<usize>) = match &params.known_motifs {
        Some(motifs) => {
            let memory = ImmuneMemory::from_known_motifs(motifs, params)?;
            (memory, (0..sequences.len()).collect())
        }
        None => {
            let seed_index = choose_seed_index(sequences, params.seed_choice)?;
            let memory = ImmuneMemory::from_windows(&antigens_for(seed_index)?, seed_index, params)?;
            let remaining = (0..sequences.len()).filter(|&i| i != seed_index).collect();
            (memory, remaining)
        }
    };

    for index in remaining {
        memory = memory.clonal_step(&antigens_for(index)?, index)?;
    }
    rank_detectors(memory, sequences.len())
}

/// Runs the full search at a single motif length and returns the ranked
/// detector table.
pub fn run_aismotif(
    sequences: &[NucleotideSequence],
    params: &RunParams,
) -> Result<Vec<Detector>, ImmuneError> {
    run_single_length(sequences, params)
}

/// Runs the search once per length in `min_len..=max_len`, merges the
/// tables and re-ranks globally (the information score is length
/// normalized, so scores are comparable across lengths). `top_k` applies
/// to the merged ranking.
pub fn run_variable_lengths(
    sequences: &[NucleotideSequence],
    min_len: usize,
    max_len: usize,
    params: &RunParams,
) -> Result<Vec<Detector>, ImmuneError> {
    if min_len == 0 || min_len > max_len {
        return Err(ImmuneError::InvalidLengthRange {
            min: min_len,
            max: max_len,
        });
    }
    let mut merged: Vec<Detector> = Vec::new();
    for l in min_len..=max_len {
        let mut per_length = params.clone();
        per_length.motif_length = l;
        per_length.top_k = None;
        merged.extend(run_single_length(sequences, &per_length)?);
    }
    merged.sort_by(|a, b| {
        let sa = a.info_score.expect("ranked");
        let sb = b.info_score.expect("ranked");
        sb.partial_cmp(&sa)
            .expect("scores are finite")
            .then_with(|| a.consensus().cmp(&b.consensus()))
            .then_with(|| a.first_instance_key().cmp(&b.first_instance_key()))
    });
    if let Some(k) = params.top_k {
        merged.truncate(k);
    }
    Ok(merged)
}
