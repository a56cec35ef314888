//! Nucleotide-level assessment of predicted motif instances against
//! annotated binding sites: confusion counts over every position of every
//! sequence, then the standard Sn / Sp / PPV / PC / nCC / ASP statistics.

use std::collections::HashMap;
use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("line {line}: malformed annotation ({reason})")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: start {start} is greater than end {end}")]
    InvertedInterval {
        line: usize,
        start: usize,
        end: usize,
    },
    #[error("annotation names unknown sequence '{id}'")]
    UnknownSequence { id: String },
    #[error("annotation {start}..{end} on '{id}' exceeds sequence length {len}")]
    OutOfBounds {
        id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("confusion counts are all zero: nothing was evaluated")]
    EmptyCounts,
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// Strand of an annotated site. Counting is strand-agnostic; the field is
/// carried through for reporting only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationStrand {
    Plus,
    Minus,
    Unknown,
}

impl AnnotationStrand {
    pub fn symbol(self) -> char {
        match self {
            AnnotationStrand::Plus => '+',
            AnnotationStrand::Minus => '-',
            AnnotationStrand::Unknown => '.',
        }
    }
}

/// One annotated interval, 1-based inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub seq_id: String,
    pub start: usize,
    pub end: usize,
    pub strand: AnnotationStrand,
}

/// Nucleotide-position confusion counts across all evaluated sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub true_positive: u64,
    pub false_positive: u64,
    pub true_negative: u64,
    pub false_negative: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }
}

/// The six assessment statistics. `asp` is always exactly
/// `(sn + ppv) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub sn: f64,
    pub sp: f64,
    pub ppv: f64,
    pub pc: f64,
    pub ncc: f64,
    pub asp: f64,
}

impl MetricReport {
    /// (name, value) pairs in reporting order.
    pub fn rows(&self) -> [(&'static str, f64); 6] {
        [
            ("Sn", self.sn),
            ("Sp", self.sp),
            ("PPV", self.ppv),
            ("PC", self.pc),
            ("nCC", self.ncc),
            ("ASP", self.asp),
        ]
    }
}

fn parse_strand(token: &str, line: usize) -> Result<AnnotationStrand, EvalError> {
    match token {
        "+" => Ok(AnnotationStrand::Plus),
        "-" => Ok(AnnotationStrand::Minus),
        "." => Ok(AnnotationStrand::Unknown),
        other => Err(EvalError::Malformed {
            line,
            reason: format!("unrecognized strand '{other}'"),
        }),
    }
}

fn parse_position(token: &str, what: &str, line: usize) -> Result<usize, EvalError> {
    let value: usize = token.parse().map_err(|_| EvalError::Malformed {
        line,
        reason: format!("{what} '{token}' is not a positive integer"),
    })?;
    if value == 0 {
        return Err(EvalError::Malformed {
            line,
            reason: format!("{what} must be 1-based (got 0)"),
        });
    }
    Ok(value)
}

/// Parses annotation TSV: `seq_id<TAB>start<TAB>end[<TAB>strand]`,
/// 1-based inclusive, `#` comment lines and blank lines skipped.
pub fn parse_annotations(text: &str) -> Result<Vec<Annotation>, EvalError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(EvalError::Malformed {
                line: line_no,
                reason: format!("expected 3 or 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let seq_id = fields[0].to_string();
        if seq_id.is_empty() {
            return Err(EvalError::Malformed {
                line: line_no,
                reason: "empty sequence id".into(),
            });
        }
        let start = parse_position(fields[1], "start", line_no)?;
        let end = parse_position(fields[2], "end", line_no)?;
        if start > end {
            return Err(EvalError::InvertedInterval {
                line: line_no,
                start,
                end,
            });
        }
        let strand = match fields.get(3) {
            Some(tok) => parse_strand(tok, line_no)?,
            None => AnnotationStrand::Unknown,
        };
        out.push(Annotation {
            seq_id,
            start,
            end,
            strand,
        });
    }
    Ok(out)
}

/// Parses GFF3 interval lines, keeping seqid, start, end and strand.
pub fn parse_gff(text: &str) -> Result<Vec<Annotation>, EvalError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 9 {
            return Err(EvalError::Malformed {
                line: line_no,
                reason: format!("expected 9 GFF fields, found {}", fields.len()),
            });
        }
        let start = parse_position(fields[3], "start", line_no)?;
        let end = parse_position(fields[4], "end", line_no)?;
        if start > end {
            return Err(EvalError::InvertedInterval {
                line: line_no,
                start,
                end,
            });
        }
        out.push(Annotation {
            seq_id: fields[0].to_string(),
            start,
            end,
            strand: parse_strand(fields[6], line_no)?,
        });
    }
    Ok(out)
}

/// Parses a predictions file, accepting either the annotation TSV format
/// or GFF output. The first non-comment line decides: nine tab-separated
/// fields mean GFF.
pub fn parse_predictions(text: &str) -> Result<Vec<Annotation>, EvalError> {
    let looks_like_gff = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.split('\t').count() == 9);
    if looks_like_gff {
        parse_gff(text)
    } else {
        parse_annotations(text)
    }
}

/// Writes annotations in the same TSV format [`parse_annotations`] reads.
pub fn write_annotations<W: io::Write>(mut w: W, annotations: &[Annotation]) -> io::Result<()> {
    for ann in annotations {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            ann.seq_id,
            ann.start,
            ann.end,
            ann.strand.symbol()
        )?;
    }
    Ok(())
}

fn mark_coverage(
    covered: &mut HashMap<String, Vec<bool>>,
    annotations: &[Annotation],
    lengths: &HashMap<String, usize>,
) -> Result<(), EvalError> {
    for ann in annotations {
        let len = *lengths
            .get(&ann.seq_id)
            .ok_or_else(|| EvalError::UnknownSequence {
                id: ann.seq_id.clone(),
            })?;
        if ann.end > len {
            return Err(EvalError::OutOfBounds {
                id: ann.seq_id.clone(),
                start: ann.start,
                end: ann.end,
                len,
            });
        }
        let flags = covered
            .get_mut(&ann.seq_id)
            .expect("initialized for every known sequence");
        for flag in &mut flags[ann.start - 1..ann.end] {
            *flag = true;
        }
    }
    Ok(())
}

/// Classifies every nucleotide position of every sequence: TP when
/// covered by at least one prediction and one truth interval, FP when
/// prediction only, FN when truth only, TN otherwise. Overlapping
/// intervals are unioned; strand is ignored.
pub fn confusion_counts(
    predictions: &[Annotation],
    truth: &[Annotation],
    lengths: &HashMap<String, usize>,
) -> Result<ConfusionCounts, EvalError> {
    let blank = || -> HashMap<String, Vec<bool>> {
        lengths
            .iter()
            .map(|(id, &len)| (id.clone(), vec![false; len]))
            .collect()
    };
    let mut predicted = blank();
    let mut annotated = blank();
    mark_coverage(&mut predicted, predictions, lengths)?;
    mark_coverage(&mut annotated, truth, lengths)?;

    let mut counts = ConfusionCounts::default();
    for (id, pred_flags) in &predicted {
        let truth_flags = &annotated[id];
        for (p, t) in pred_flags.iter().zip(truth_flags) {
            match (p, t) {
                (true, true) => counts.true_positive += 1,
                (true, false) => counts.false_positive += 1,
                (false, true) => counts.false_negative += 1,
                (false, false) => counts.true_negative += 1,
            }
        }
    }
    Ok(counts)
}

fn ratio(num: u64, denom: u64) -> f64 {
    if denom == 0 {
        0.0
    } else {
        num as f64 / denom as f64
    }
}

/// Average site performance, the mean of sensitivity and positive
/// predictive value.
pub fn average_site_performance(sn: f64, ppv: f64) -> f64 {
    (sn + ppv) / 2.0
}

/// Computes the six statistics from confusion counts. Any ratio with a
/// zero denominator is defined as 0 (for nCC, a zero radicand), so
/// degenerate runs still produce a report.
pub fn compute_metrics(c: &ConfusionCounts) -> Result<MetricReport, EvalError> {
    if c.total() == 0 {
        return Err(EvalError::EmptyCounts);
    }
    let tp = c.true_positive;
    let fp = c.false_positive;
    let tn = c.true_negative;
    let fn_ = c.false_negative;

    let sn = ratio(tp, tp + fn_);
    let sp = ratio(tn, tn + fp);
    let ppv = ratio(tp, tp + fp);
    let pc = ratio(tp, tp + fn_ + fp);
    let radicand = (tp + fn_) as f64 * (tn + fp) as f64 * (tp + fp) as f64 * (tn + fn_) as f64;
    let ncc = if radicand == 0.0 {
        0.0
    } else {
        (tp as f64 * tn as f64 - fn_ as f64 * fp as f64) / radicand.sqrt()
    };
    Ok(MetricReport {
        sn,
        sp,
        ppv,
        pc,
        ncc,
        asp: average_site_performance(sn, ppv),
    })
}
