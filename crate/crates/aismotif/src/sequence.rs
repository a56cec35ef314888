//! FASTA input, alphabet normalization, reverse complements and
//! fixed-length window enumeration.

use std::io::{self, BufRead};

use thiserror::Error;

/// Strand orientation of a motif instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strand {
    Forward,
    Reverse,
}

impl Strand {
    pub fn symbol(self) -> char {
        match self {
            Strand::Forward => '+',
            Strand::Reverse => '-',
        }
    }

    pub fn flipped(self) -> Strand {
        match self {
            Strand::Forward => Strand::Reverse,
            Strand::Reverse => Strand::Forward,
        }
    }
}

#[derive(Debug, Error)]
pub enum SequenceError {
    #[error("empty FASTA input: no records found")]
    EmptyFile,
    #[error("line {line}: expected '>' header before sequence data")]
    MissingHeader { line: usize },
    #[error("line {line}: header has no identifier")]
    EmptyHeader { line: usize },
    #[error("record '{id}' (line {line}): empty sequence")]
    EmptyRecord { id: String, line: usize },
    #[error("record '{id}' (line {line}): invalid character '{ch}' (expected A, C, G, T or N)")]
    InvalidCharacter { id: String, line: usize, ch: char },
    #[error("line {line}: duplicate sequence id '{id}'")]
    DuplicateId { id: String, line: usize },
    #[error("invalid character '{ch}' in nucleotide string")]
    InvalidBase { ch: char },
    #[error("motif length must be at least 1")]
    ZeroLength,
    #[error("sequence '{id}' is shorter than motif length ({seq_len} < {motif_len})")]
    SequenceShorterThanMotif {
        id: String,
        seq_len: usize,
        motif_len: usize,
    },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// One named promoter sequence over {A,C,G,T,N}, uppercased on input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NucleotideSequence {
    pub id: String,
    pub residues: String,
}

impl NucleotideSequence {
    /// Validates the alphabet and uppercases the residues.
    pub fn new(id: impl Into<String>, residues: &str) -> Result<Self, SequenceError> {
        let id = id.into();
        let mut out = String::with_capacity(residues.len());
        for ch in residues.chars() {
            let up = ch.to_ascii_uppercase();
            match up {
                'A' | 'C' | 'G' | 'T' | 'N' => out.push(up),
                _ => return Err(SequenceError::InvalidBase { ch }),
            }
        }
        Ok(NucleotideSequence { id, residues: out })
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

/// An l-length subsequence with its source coordinates. Serves as both
/// antigen and antibody seed; the reverse complement rides along so both
/// orientations can be scored without re-deriving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub seq_id: String,
    /// 0-based start within the source sequence.
    pub offset: usize,
    pub forward: String,
    pub reverse: String,
}

impl Window {
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// The string read in the given orientation.
    pub fn oriented(&self, strand: Strand) -> &str {
        match strand {
            Strand::Forward => &self.forward,
            Strand::Reverse => &self.reverse,
        }
    }
}

fn complement(b: u8) -> Option<u8> {
    match b {
        b'A' => Some(b'T'),
        b'T' => Some(b'A'),
        b'C' => Some(b'G'),
        b'G' => Some(b'C'),
        b'N' => Some(b'N'),
        _ => None,
    }
}

/// Reverse complement of an uppercase {A,C,G,T,N} string.
pub fn reverse_complement(s: &str) -> Result<String, SequenceError> {
    let mut out = Vec::with_capacity(s.len());
    for &b in s.as_bytes().iter().rev() {
        match complement(b) {
            Some(c) => out.push(c),
            None => return Err(SequenceError::InvalidBase { ch: b as char }),
        }
    }
    Ok(String::from_utf8(out).expect("complement table yields ASCII"))
}

/// Parses multi-record FASTA. Sequence lines are concatenated and
/// uppercased; the record id is the first whitespace-delimited token after
/// `>`. Blank lines are skipped.
pub fn parse_fasta<R: BufRead>(reader: R) -> Result<Vec<NucleotideSequence>, SequenceError> {
    let mut records: Vec<NucleotideSequence> = Vec::new();
    let mut current: Option<(String, usize, String)> = None; // (id, header line, residues)

    let finish = |current: &mut Option<(String, usize, String)>,
                      records: &mut Vec<NucleotideSequence>|
     -> Result<(), SequenceError> {
        if let Some((id, line, residues)) = current.take() {
            if residues.is_empty() {
                return Err(SequenceError::EmptyRecord { id, line });
            }
            records.push(NucleotideSequence { id, residues });
        }
        Ok(())
    };

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            finish(&mut current, &mut records)?;
            let id = header
                .split_whitespace()
                .next()
                .ok_or(SequenceError::EmptyHeader { line: line_no })?
                .to_string();
            if records.iter().any(|r| r.id == id) {
                return Err(SequenceError::DuplicateId { id, line: line_no });
            }
            current = Some((id, line_no, String::new()));
        } else {
            let (id, _, residues) = current
                .as_mut()
                .ok_or(SequenceError::MissingHeader { line: line_no })?;
            for ch in line.chars() {
                let up = ch.to_ascii_uppercase();
                match up {
                    'A' | 'C' | 'G' | 'T' | 'N' => residues.push(up),
                    _ => {
                        return Err(SequenceError::InvalidCharacter {
                            id: id.clone(),
                            line: line_no,
                            ch,
                        })
                    }
                }
            }
        }
    }
    finish(&mut current, &mut records)?;

    if records.is_empty() {
        return Err(SequenceError::EmptyFile);
    }
    Ok(records)
}

/// Convenience wrapper over [`parse_fasta`] for in-memory text.
pub fn parse_fasta_str(text: &str) -> Result<Vec<NucleotideSequence>, SequenceError> {
    parse_fasta(text.as_bytes())
}

/// Writes records as FASTA, wrapping sequence lines at 60 columns.
pub fn write_fasta<W: io::Write>(
    mut w: W,
    records: &[NucleotideSequence],
) -> io::Result<()> {
    for rec in records {
        writeln!(w, ">{}", rec.id)?;
        for chunk in rec.residues.as_bytes().chunks(60) {
            w.write_all(chunk)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Enumerates all length-`l` windows of `seq` in ascending offset order.
/// With `skip_ambiguous`, windows containing N are omitted (they cannot be
/// counted against the four-letter alphabet). Each window carries its
/// reverse complement.
pub fn enumerate_windows(
    seq: &NucleotideSequence,
    l: usize,
    skip_ambiguous: bool,
) -> Result<Vec<Window>, SequenceError> {
    if l == 0 {
        return Err(SequenceError::ZeroLength);
    }
    if seq.len() < l {
        return Err(SequenceError::SequenceShorterThanMotif {
            id: seq.id.clone(),
            seq_len: seq.len(),
            motif_len: l,
        });
    }
    let bytes = seq.residues.as_bytes();
    let mut windows = Vec::with_capacity(seq.len() - l + 1);
    for offset in 0..=(seq.len() - l) {
        let slice = &bytes[offset..offset + l];
        if skip_ambiguous && slice.contains(&b'N') {
            continue;
        }
        let forward = String::from_utf8(slice.to_vec()).expect("validated ASCII");
        let reverse = reverse_complement(&forward)?;
        windows.push(Window {
            seq_id: seq.id.clone(),
            offset,
            forward,
            reverse,
        });
    }
    Ok(windows)
}
