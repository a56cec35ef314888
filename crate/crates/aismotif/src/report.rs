//! Report formatting for ranked detector tables: a TSV with one row per
//! motif, and GFF3 with one line per motif instance. All coordinates are
//! 1-based inclusive.

use std::io;

use crate::immune::Detector;

/// One reported instance. `start == 0` marks a synthetic entry (a
/// known-motif seed, which has no source coordinates).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportInstance {
    pub seq_id: String,
    pub start: usize,
    pub end: usize,
    pub strand: char,
    pub subseq: String,
}

impl ReportInstance {
    pub fn is_synthetic(&self) -> bool {
        self.start == 0
    }
}

/// One row of the ranked motif report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub rank: usize,
    pub length: usize,
    pub consensus: String,
    pub information_score: f64,
    pub instances: Vec<ReportInstance>,
}

/// Builds report rows from a ranked detector table. Instance order is
/// seed first (if any), then instances in processing order, then merged
/// duplicates.
pub fn build_report(detectors: &[Detector]) -> Vec<ReportRow> {
    detectors
        .iter()
        .enumerate()
        .map(|(i, det)| {
            let l = det.motif_length();
            let mut instances = Vec::new();
            if let Some(seed) = det.seed_motif() {
                instances.push(ReportInstance {
                    seq_id: "seed".into(),
                    start: 0,
                    end: 0,
                    strand: '.',
                    subseq: seed.to_string(),
                });
            }
            for inst in det.instances().iter().chain(det.duplicates()) {
                instances.push(ReportInstance {
                    seq_id: inst.seq_id.clone(),
                    start: inst.offset + 1,
                    end: inst.offset + l,
                    strand: inst.strand.symbol(),
                    subseq: inst.subseq.clone(),
                });
            }
            ReportRow {
                rank: i + 1,
                length: l,
                consensus: det.consensus(),
                information_score: det
                    .info_score()
                    .expect("report is built from a ranked table"),
                instances,
            }
        })
        .collect()
}

/// Writes the TSV report: columns rank, length, consensus,
/// information_score (6 decimals), instances (semicolon-separated
/// `seq_id,start,end,strand,subseq` quintuples).
pub fn write_tsv<W: io::Write>(mut w: W, rows: &[ReportRow]) -> io::Result<()> {
    writeln!(w, "rank\tlength\tconsensus\tinformation_score\tinstances")?;
    for row in rows {
        let instances = row
            .instances
            .iter()
            .map(|i| {
                format!(
                    "{},{},{},{},{}",
                    i.seq_id, i.start, i.end, i.strand, i.subseq
                )
            })
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            w,
            "{}\t{}\t{}\t{:.6}\t{}",
            row.rank, row.length, row.consensus, row.information_score, instances
        )?;
    }
    Ok(())
}

/// Writes GFF3: one `motif_instance` line per instance with the motif's
/// information score and `ID=motif<rank>;Consensus=<c>` attributes.
/// Synthetic seed entries have no coordinates and are omitted.
pub fn write_gff<W: io::Write>(mut w: W, rows: &[ReportRow]) -> io::Result<()> {
    writeln!(w, "##gff-version 3")?;
    for row in rows {
        for inst in row.instances.iter().filter(|i| !i.is_synthetic()) {
            writeln!(
                w,
                "{}\taismotif\tmotif_instance\t{}\t{}\t{:.6}\t{}\t.\tID=motif{};Consensus={}",
                inst.seq_id,
                inst.start,
                inst.end,
                row.information_score,
                inst.strand,
                row.rank,
                row.consensus
            )?;
        }
    }
    Ok(())
}
