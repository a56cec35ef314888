//! Position count matrices and the two weighted scores used to drive the
//! clonal search: a match score for antigen/antibody affinity and an
//! information score for ranking the final motif table. No background
//! model is involved; both scores depend only on the instance counts.

use thiserror::Error;

/// Nucleotide column order used throughout the count matrix.
pub const BASES: [char; 4] = ['A', 'C', 'G', 'T'];

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("cannot build a count matrix from an empty instance list")]
    EmptyInstances,
    #[error("unequal instance lengths: expected {expected}, found {found}")]
    UnequalLengths { expected: usize, found: usize },
    #[error("ambiguous or invalid base '{ch}' (count matrices index A, C, G, T only)")]
    AmbiguousBase { ch: char },
    #[error("candidate length {candidate} does not match matrix length {matrix}")]
    LengthMismatch { candidate: usize, matrix: usize },
    #[error("normalizer {normalizer} is smaller than the largest column count {max_count}")]
    NormalizerTooSmall { normalizer: u32, max_count: u32 },
    #[error("normalizer must be positive")]
    ZeroNormalizer,
}

/// Maps a base to its column index, or `None` for anything outside
/// {A,C,G,T} (N contributes to no column).
#[inline]
pub(crate) fn base_index(b: u8) -> Option<usize> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

pub(crate) const NO_BASE: u8 = u8::MAX;

/// Encodes a string into column indices; non-ACGT bases become [`NO_BASE`].
pub(crate) fn encode_lossy(s: &str) -> Vec<u8> {
    s.bytes()
        .map(|b| base_index(b).map_or(NO_BASE, |i| i as u8))
        .collect()
}

fn encode_strict(s: &str) -> Result<Vec<u8>, ScoringError> {
    s.bytes()
        .map(|b| {
            base_index(b)
                .map(|i| i as u8)
                .ok_or(ScoringError::AmbiguousBase { ch: b as char })
        })
        .collect()
}

/// Per-position nucleotide counts of a motif's instances.
///
/// Position `i` of the motif maps to `counts[i]`, a 4-vector in [`BASES`]
/// order. With N-free instances every position's counts sum to
/// `instance_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionCountMatrix {
    counts: Vec<[u32; 4]>,
    instance_count: u32,
}

impl PositionCountMatrix {
    /// Builds the count matrix of a non-empty set of equal-length,
    /// N-free instances.
    pub fn from_instances<S: AsRef<str>>(instances: &[S]) -> Result<Self, ScoringError> {
        let first = instances.first().ok_or(ScoringError::EmptyInstances)?;
        let len = first.as_ref().len();
        let mut pcm = PositionCountMatrix::empty(len);
        for inst in instances {
            let inst = inst.as_ref();
            if inst.len() != len {
                return Err(ScoringError::UnequalLengths {
                    expected: len,
                    found: inst.len(),
                });
            }
            encode_strict(inst)?;
            pcm.add_instance(inst);
        }
        Ok(pcm)
    }

    /// An all-zero matrix; callers must add at least one instance before
    /// exposing it.
    pub(crate) fn empty(length: usize) -> Self {
        PositionCountMatrix {
            counts: vec![[0; 4]; length],
            instance_count: 0,
        }
    }

    /// Accumulates one instance. Bases outside {A,C,G,T} add to no column,
    /// so an N never matches anything downstream.
    pub(crate) fn add_instance(&mut self, instance: &str) {
        debug_assert_eq!(instance.len(), self.counts.len());
        for (pos, b) in instance.bytes().enumerate() {
            if let Some(j) = base_index(b) {
                self.counts[pos][j] += 1;
            }
        }
        self.instance_count += 1;
    }

    /// Number of motif positions (matrix rows as conventionally printed).
    pub fn length(&self) -> usize {
        self.counts.len()
    }

    /// Number of instances accumulated.
    pub fn instance_count(&self) -> u32 {
        self.instance_count
    }

    /// The 4 counts at a position, in [`BASES`] order.
    pub fn counts_at(&self, pos: usize) -> [u32; 4] {
        self.counts[pos]
    }

    /// Count of one base at one position; `None` for a base outside ACGT.
    pub fn count(&self, pos: usize, base: char) -> Option<u32> {
        base_index(base as u8).map(|j| self.counts[pos][j])
    }

    pub(crate) fn max_column_count(&self) -> u32 {
        self.counts
            .iter()
            .map(|row| *row.iter().max().expect("4 columns"))
            .max()
            .unwrap_or(0)
    }

    /// The matrix of the reverse-complemented instance set: positions
    /// reversed, base columns swapped A<->T and C<->G.
    pub(crate) fn reverse_complemented(&self) -> Self {
        let counts = self
            .counts
            .iter()
            .rev()
            .map(|row| [row[3], row[2], row[1], row[0]])
            .collect();
        PositionCountMatrix {
            counts,
            instance_count: self.instance_count,
        }
    }
}

/// Weighted match score of a candidate against a count matrix:
///
/// score = (1 / ((n+1)^2 * l)) * sum_i (C[i, candidate_i] + 1)^2
///
/// where n is the instance count and l the motif length. Lies in
/// [1/(n+1)^2, 1]; 1 means the candidate agrees with a fully conserved
/// matrix at every position.
pub fn match_score(
    pcm: &PositionCountMatrix,
    candidate: &str,
) -> Result<f64, ScoringError> {
    if candidate.len() != pcm.length() {
        return Err(ScoringError::LengthMismatch {
            candidate: candidate.len(),
            matrix: pcm.length(),
        });
    }
    let enc = encode_strict(candidate)?;
    Ok(match_score_encoded(pcm, &enc))
}

/// Match score over a pre-encoded candidate. Positions encoded as
/// [`NO_BASE`] contribute a bare (0+1)^2 term, i.e. N matches no column.
pub(crate) fn match_score_encoded(pcm: &PositionCountMatrix, encoded: &[u8]) -> f64 {
    debug_assert_eq!(encoded.len(), pcm.length());
    let mut sum: u64 = 0;
    for (row, &b) in pcm.counts.iter().zip(encoded) {
        let c = if b == NO_BASE { 0 } else { u64::from(row[b as usize]) };
        sum += (c + 1) * (c + 1);
    }
    let n = u64::from(pcm.instance_count);
    let denom = (n + 1) * (n + 1) * pcm.length() as u64;
    sum as f64 / denom as f64
}

/// Information score of a count matrix:
///
/// score = (1 / (normalizer^2 * l)) * sum_i (max_j C[i,j])^2
///
/// With normalizer = instance count this lies in ((ceil(n/4)/n)^2, 1];
/// 1 means all instances are identical.
pub fn information_score(
    pcm: &PositionCountMatrix,
    normalizer: u32,
) -> Result<f64, ScoringError> {
    if normalizer == 0 {
        return Err(ScoringError::ZeroNormalizer);
    }
    let max_count = pcm.max_column_count();
    if normalizer < max_count {
        return Err(ScoringError::NormalizerTooSmall {
            normalizer,
            max_count,
        });
    }
    let sum: u64 = pcm
        .counts
        .iter()
        .map(|row| {
            let m = u64::from(*row.iter().max().expect("4 columns"));
            m * m
        })
        .sum();
    let n = u64::from(normalizer);
    let denom = n * n * pcm.length() as u64;
    Ok(sum as f64 / denom as f64)
}

/// Per-position argmax string of the matrix; ties resolve by the fixed
/// priority A > C > G > T.
pub fn consensus(pcm: &PositionCountMatrix) -> String {
    pcm.counts
        .iter()
        .map(|row| {
            let mut best = 0;
            for j in 1..4 {
                if row[j] > row[best] {
                    best = j;
                }
            }
            BASES[best]
        })
        .collect()
}
