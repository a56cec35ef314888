//! Synthetic planted-motif datasets with ground-truth annotations, used
//! for self-validation: draw a random motif, plant one mutated copy per
//! sequence in uniform background, and emit the matching annotation set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::evaluation::{Annotation, AnnotationStrand};
use crate::scoring::BASES;
use crate::sequence::{reverse_complement, NucleotideSequence};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid plant parameters: {0}")]
    InvalidParams(String),
}

/// Parameters for one planted dataset. Generation is fully determined by
/// `rng_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantParams {
    pub num_seqs: usize,
    pub seq_len: usize,
    pub motif_len: usize,
    /// Exactly this many substituted positions per planted copy.
    pub num_mutations: usize,
    /// Reverse-complement each copy independently with probability 1/2.
    pub both_strands: bool,
    pub rng_seed: u64,
}

impl PlantParams {
    fn validate(&self) -> Result<(), SynthError> {
        if self.num_seqs == 0 {
            return Err(SynthError::InvalidParams("num_seqs must be at least 1".into()));
        }
        if self.motif_len == 0 {
            return Err(SynthError::InvalidParams("motif_len must be at least 1".into()));
        }
        if self.motif_len > self.seq_len {
            return Err(SynthError::InvalidParams(format!(
                "motif_len {} exceeds seq_len {}",
                self.motif_len, self.seq_len
            )));
        }
        if self.num_mutations > self.motif_len {
            return Err(SynthError::InvalidParams(format!(
                "num_mutations {} exceeds motif_len {}",
                self.num_mutations, self.motif_len
            )));
        }
        Ok(())
    }
}

/// A generated dataset: sequences named s1..sN, one annotation per
/// sequence, and the planted motif itself.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedDataset {
    pub sequences: Vec<NucleotideSequence>,
    pub annotations: Vec<Annotation>,
    pub motif: String,
}

fn random_dna(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| BASES[rng.gen_range(0..4)]).collect()
}

/// Substitutes exactly `d` distinct positions, each with a uniformly
/// chosen base different from the original.
fn mutate(rng: &mut ChaCha8Rng, motif: &str, d: usize) -> String {
    let mut bytes = motif.as_bytes().to_vec();
    let positions = rand::seq::index::sample(rng, bytes.len(), d);
    for pos in positions {
        let original = bytes[pos];
        let replacement = loop {
            let b = BASES[rng.gen_range(0..4)] as u8;
            if b != original {
                break b;
            }
        };
        bytes[pos] = replacement;
    }
    String::from_utf8(bytes).expect("ASCII bases")
}

/// Generates the dataset: i.i.d. uniform background with exactly one
/// planted copy per sequence at a uniform offset.
pub fn generate_planted(params: &PlantParams) -> Result<PlantedDataset, SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let motif = random_dna(&mut rng, params.motif_len);

    let mut sequences = Vec::with_capacity(params.num_seqs);
    let mut annotations = Vec::with_capacity(params.num_seqs);
    for i in 0..params.num_seqs {
        let id = format!("s{}", i + 1);
        let mut background = random_dna(&mut rng, params.seq_len);
        let offset = rng.gen_range(0..=params.seq_len - params.motif_len);
        let mut copy = mutate(&mut rng, &motif, params.num_mutations);
        let strand = if params.both_strands && rng.gen_bool(0.5) {
            copy = reverse_complement(&copy).expect("generated bases are valid");
            AnnotationStrand::Minus
        } else {
            AnnotationStrand::Plus
        };
        background.replace_range(offset..offset + params.motif_len, &copy);
        annotations.push(Annotation {
            seq_id: id.clone(),
            start: offset + 1,
            end: offset + params.motif_len,
            strand,
        });
        sequences.push(NucleotideSequence { id, residues: background });
    }
    Ok(PlantedDataset {
        sequences,
        annotations,
        motif,
    })
}
