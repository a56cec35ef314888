//! Acceptance suite. One test per criterion; each prints a PASS line with
//! its measured numbers (visible with --nocapture).


use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use aismotif::evaluation::{self, Annotation, AnnotationStrand};
use aismotif::immune::{run_aismotif, Detector, ImmuneMemory, RunParams};
use aismotif::scoring::{information_score, match_score, PositionCountMatrix, BASES};
use aismotif::sequence::{enumerate_windows, reverse_complement, NucleotideSequence, Strand};
use aismotif::synth::{generate_planted, PlantParams};

const SCORE_TOL: f64 = 1e-12;

fn random_dna(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| BASES[rng.gen_range(0..4)]).collect()
}

fn random_sequences(rng: &mut ChaCha8Rng, count: usize, min_len: usize, max_len: usize) -> Vec<NucleotideSequence> {
    (0..count)
        .map(|i| {
            let len = rng.gen_range(min_len..=max_len);
            NucleotideSequence {
                id: format!("s{}", i + 1),
                residues: random_dna(rng, len),
            }
        })
        .collect()
}

fn instance_sites(detector: &Detector) -> Vec<(String, usize, usize)> {
    let l = detector.motif_length();
    detector
        .instances()
        .iter()
        .map(|i| (i.seq_id.clone(), i.offset + 1, i.offset + l))
        .collect()
}

#[test]
fn criterion_01_worked_example_exactness() {
    let pcm =
        PositionCountMatrix::from_instances(&["GATCACCG", "GATTACCG", "GATTACCG"]).unwrap();
    let match_value = match_score(&pcm, "GATTAACG").unwrap();
    assert!(
        (match_value - 106.0 / 128.0).abs() < SCORE_TOL,
        "match score {match_value} != 106/128"
    );
    let info_value = information_score(&pcm, 3).unwrap();
    assert!(
        (info_value - 67.0 / 72.0).abs() < SCORE_TOL,
        "information score {info_value} != 67/72"
    );
    println!("[PASS] criterion 1: match 106/128 = {match_value}, information 67/72 = {info_value}");
}

#[test]
fn criterion_02_asp_cross_check() {
    let rows = [
        (0.956, 0.042, 0.499),
        (0.759, 0.149, 0.454),
        (0.898, 0.114, 0.506),
    ];
    for (sn, ppv, expected) in rows {
        let asp = evaluation::average_site_performance(sn, ppv);
        assert!(
            (asp - expected).abs() <= 0.001,
            "ASP({sn}, {ppv}) = {asp}, expected {expected} +- 0.001"
        );
    }
    println!("[PASS] criterion 2: ASP cross-check on 3 published (Sn, PPV) pairs within 0.001");
}

#[test]
fn criterion_03_oracle_equivalence() {
    let mut checked_detectors = 0usize;
    for case in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + case);
        let num_seqs = rng.gen_range(3..=5);
        let l = rng.gen_range(4..=6);
        let sequences = random_sequences(&mut rng, num_seqs, 20, 40);

        let ranked = run_aismotif(&sequences, &RunParams::new(l)).unwrap();
        let pairs: Vec<(String, String)> = sequences
            .iter()
            .map(|s| (s.id.clone(), s.residues.clone()))
            .collect();
        let expected = reference::reference_aismotif(&pairs, l);

        assert_eq!(
            ranked.len(),
            expected.len(),
            "case {case}: detector counts differ"
        );
        for (got, want) in ranked.iter().zip(&expected) {
            let got_score = got.info_score().unwrap();
            assert!(
                (got_score - want.info_score).abs() < SCORE_TOL,
                "case {case}: scores {got_score} vs {}",
                want.info_score
            );
            assert_eq!(got.consensus(), want.consensus, "case {case}");
            assert_eq!(got.instances().len(), want.instances.len(), "case {case}");
            for (gi, wi) in got.instances().iter().zip(&want.instances) {
                assert_eq!(gi.seq_index, wi.seq_index, "case {case}");
                assert_eq!(gi.seq_id, wi.seq_id, "case {case}");
                assert_eq!(gi.offset, wi.offset, "case {case}");
                assert_eq!(gi.subseq, wi.subseq, "case {case}");
                assert_eq!(gi.strand, Strand::Forward, "case {case}");
            }
            checked_detectors += 1;
        }
    }
    println!("[PASS] criterion 3: 50 random instances match the reference trace ({checked_detectors} detectors compared)");
}

#[test]
fn criterion_04_memory_size_and_instance_count_laws() {
    for run in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + run);
        let num_seqs = rng.gen_range(2..=5);
        let l = rng.gen_range(3..=6);
        let sequences = random_sequences(&mut rng, num_seqs, 15, 40);
        let params = RunParams::new(l);

        let windows = enumerate_windows(&sequences[0], l, true).unwrap();
        let mut memory = ImmuneMemory::from_windows(&windows, 0, &params).unwrap();
        assert_eq!(memory.detectors().len(), sequences[0].len() - l + 1);

        for (t, seq) in sequences.iter().enumerate().skip(1) {
            let antigens = enumerate_windows(seq, l, true).unwrap();
            memory = memory.clonal_step(&antigens, t).unwrap();
            assert_eq!(
                memory.detectors().len(),
                seq.len() - l + 1,
                "run {run}: memory size law after sequence {t}"
            );
            for det in memory.detectors() {
                assert_eq!(det.instances().len(), t + 1, "run {run}: instance count law");
                for (k, inst) in det.instances().iter().enumerate() {
                    assert_eq!(inst.seq_index, k, "run {run}: processing order");
                    let src = &sequences[inst.seq_index].residues;
                    assert_eq!(
                        &src[inst.offset..inst.offset + l],
                        inst.subseq,
                        "run {run}: instance re-slices from source"
                    );
                }
            }
        }
    }
    println!("[PASS] criterion 4: memory-size and instance-count laws hold over 100 randomized runs");
}

#[test]
fn criterion_05_planted_motif_recovery() {
    // d = 0: the rank-1 detector must sit exactly on the planted sites
    // with information score 1.0 in at least 19 of 20 datasets.
    let mut exact_hits = 0;
    for seed in 100..120u64 {
        let dataset = generate_planted(&PlantParams {
            num_seqs: 10,
            seq_len: 500,
            motif_len: 10,
            num_mutations: 0,
            both_strands: false,
            rng_seed: seed,
        })
        .unwrap();
        let ranked = run_aismotif(&dataset.sequences, &RunParams::new(10)).unwrap();
        let top = &ranked[0];
        let mut predicted = instance_sites(top);
        predicted.sort();
        let mut planted: Vec<(String, usize, usize)> = dataset
            .annotations
            .iter()
            .map(|a| (a.seq_id.clone(), a.start, a.end))
            .collect();
        planted.sort();
        if top.info_score() == Some(1.0) && predicted == planted {
            exact_hits += 1;
        }
    }
    assert!(
        exact_hits >= 19,
        "d=0 recovery in only {exact_hits}/20 datasets (need >= 19)"
    );

    // d = 1: the rank-1 detector must cover at least 70% of planted
    // positions in at least 15 of 20 datasets.
    let mut overlap_hits = 0;
    for seed in 200..220u64 {
        let dataset = generate_planted(&PlantParams {
            num_seqs: 10,
            seq_len: 500,
            motif_len: 10,
            num_mutations: 1,
            both_strands: false,
            rng_seed: seed,
        })
        .unwrap();
        let ranked = run_aismotif(&dataset.sequences, &RunParams::new(10)).unwrap();
        let top = &ranked[0];
        let predictions: Vec<Annotation> = instance_sites(top)
            .into_iter()
            .map(|(seq_id, start, end)| Annotation {
                seq_id,
                start,
                end,
                strand: AnnotationStrand::Unknown,
            })
            .collect();
        let lengths: HashMap<String, usize> = dataset
            .sequences
            .iter()
            .map(|s| (s.id.clone(), s.len()))
            .collect();
        let counts =
            evaluation::confusion_counts(&predictions, &dataset.annotations, &lengths).unwrap();
        let covered = counts.true_positive as f64
            / (counts.true_positive + counts.false_negative) as f64;
        if covered >= 0.70 {
            overlap_hits += 1;
        }
    }
    assert!(
        overlap_hits >= 15,
        "d=1 overlap >= 70% in only {overlap_hits}/20 datasets (need >= 15)"
    );
    println!("[PASS] criterion 5: planted recovery d=0 {exact_hits}/20 exact, d=1 {overlap_hits}/20 at >=70% overlap");
}

#[test]
fn criterion_06_score_bound_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(6000);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=12);
        let l = rng.gen_range(1..=12);
        let instances: Vec<String> = (0..n).map(|_| random_dna(&mut rng, l)).collect();
        let candidate = random_dna(&mut rng, l);
        let pcm = PositionCountMatrix::from_instances(&instances).unwrap();

        let m = match_score(&pcm, &candidate).unwrap();
        let nf = n as f64;
        let lower = 1.0 / ((nf + 1.0) * (nf + 1.0));
        assert!(
            m >= lower - SCORE_TOL && m <= 1.0 + SCORE_TOL,
            "match score {m} outside [{lower}, 1]"
        );

        let i = information_score(&pcm, n as u32).unwrap();
        let q = (n as u32).div_ceil(4) as f64;
        let info_lower = (q / nf) * (q / nf);
        assert!(
            i >= info_lower - SCORE_TOL && i <= 1.0 + SCORE_TOL,
            "information score {i} outside [{info_lower}, 1]"
        );
    }

    // Constructed boundary cases reach the extremes exactly.
    for n in [1usize, 2, 3, 4, 5, 7, 8, 11] {
        let l = 6;
        let conserved = vec!["ACGTAC".to_string(); n];
        let pcm = PositionCountMatrix::from_instances(&conserved).unwrap();
        assert_eq!(match_score(&pcm, "ACGTAC").unwrap(), 1.0);
        assert_eq!(
            match_score(&pcm, "CAACCA").unwrap(),
            1.0 / ((n as f64 + 1.0) * (n as f64 + 1.0))
        );
        assert_eq!(information_score(&pcm, n as u32).unwrap(), 1.0);

        // Spread instances evenly: every column's best count is ceil(n/4).
        let spread: Vec<String> = (0..n).map(|j| BASES[j % 4].to_string().repeat(l)).collect();
        let pcm = PositionCountMatrix::from_instances(&spread).unwrap();
        let q = (n as u32).div_ceil(4) as f64;
        assert_eq!(
            information_score(&pcm, n as u32).unwrap(),
            (q * q) / (n as f64 * n as f64)
        );
    }
    println!("[PASS] criterion 6: score bounds hold on 1000 random pairs; extremes reached exactly on boundary cases");
}

#[test]
fn criterion_07_strand_property() {
    let mut params = RunParams::new(10);
    params.both_strands = true;
    for seed in 300..310u64 {
        let dataset = generate_planted(&PlantParams {
            num_seqs: 8,
            seq_len: 300,
            motif_len: 10,
            num_mutations: 0,
            both_strands: true,
            rng_seed: seed,
        })
        .unwrap();
        let ranked = run_aismotif(&dataset.sequences, &params).unwrap();
        let top = &ranked[0];
        assert_eq!(top.info_score(), Some(1.0), "seed {seed}: planted chain not found");
        assert!(
            ranked[1].info_score().unwrap() < 1.0,
            "seed {seed}: rank-1 not unique, test premise broken"
        );

        for flip_index in [0usize, 4, 7] {
            let mut flipped = dataset.sequences.clone();
            let original = &dataset.sequences[flip_index];
            flipped[flip_index] = NucleotideSequence {
                id: original.id.clone(),
                residues: reverse_complement(&original.residues).unwrap(),
            };
            let ranked_flipped = run_aismotif(&flipped, &params).unwrap();
            let top_flipped = &ranked_flipped[0];
            assert_eq!(top_flipped.info_score(), Some(1.0), "seed {seed}, flip {flip_index}");

            assert_eq!(
                top.instances().len(),
                top_flipped.instances().len(),
                "seed {seed}, flip {flip_index}"
            );
            for (a, b) in top.instances().iter().zip(top_flipped.instances()) {
                assert_eq!(
                    a.subseq, b.subseq,
                    "seed {seed}, flip {flip_index}: oriented subsequences must not change"
                );
                assert_eq!(a.seq_index, b.seq_index);
                if a.seq_index == flip_index {
                    let len = original.len();
                    assert_eq!(b.offset, len - 10 - a.offset, "seed {seed}, flip {flip_index}");
                    assert_ne!(b.strand, a.strand, "seed {seed}, flip {flip_index}");
                } else {
                    assert_eq!(b.offset, a.offset);
                    assert_eq!(b.strand, a.strand);
                }
            }
        }
    }
    println!("[PASS] criterion 7: rank-1 oriented instances invariant under per-sequence strand flips (10 datasets x 3 flips)");
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aismotif"))
}

fn run_ok(args: &[&str]) {
    let out = binary().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn criterion_08_determinism() {
    let dir = TempDir::new().unwrap();
    let path = |name: &str| -> String { dir.path().join(name).to_str().unwrap().to_string() };

    for prefix in ["a", "b"] {
        run_ok(&[
            "generate", "--num-seqs", "8", "--seq-len", "200", "--motif-len", "9",
            "--mutations", "1", "--both-strands", "--rng-seed", "77",
            "--out-prefix", &path(prefix),
        ]);
    }
    for suffix in [".fa", ".ann.tsv", ".motif.txt"] {
        assert_eq!(
            fs::read(path(&format!("a{suffix}"))).unwrap(),
            fs::read(path(&format!("b{suffix}"))).unwrap(),
            "generate outputs differ for {suffix}"
        );
    }

    for (out_name, format) in [("r1.tsv", "tsv"), ("r2.tsv", "tsv"), ("g1.gff", "gff"), ("g2.gff", "gff")] {
        run_ok(&[
            "discover", "--input", &path("a.fa"), "--length", "9", "--both-strands",
            "--seed-sequence", "random", "--rng-seed", "5",
            "--format", format, "--output", &path(out_name),
        ]);
    }
    assert_eq!(fs::read(path("r1.tsv")).unwrap(), fs::read(path("r2.tsv")).unwrap());
    assert_eq!(fs::read(path("g1.gff")).unwrap(), fs::read(path("g2.gff")).unwrap());

    for out_name in ["m1.tsv", "m2.tsv"] {
        run_ok(&[
            "eval", "--predictions", &path("g1.gff"), "--annotations", &path("a.ann.tsv"),
            "--input", &path("a.fa"), "--output", &path(out_name),
        ]);
    }
    assert_eq!(fs::read(path("m1.tsv")).unwrap(), fs::read(path("m2.tsv")).unwrap());
    println!("[PASS] criterion 8: fixed-seed generate/discover/eval invocations are byte-identical");
}

#[test]
fn criterion_09_performance_budget() {
    // Liver-scale input: 12 sequences of 1 kb, motif length 12.
    let dataset = generate_planted(&PlantParams {
        num_seqs: 12,
        seq_len: 1000,
        motif_len: 12,
        num_mutations: 2,
        both_strands: false,
        rng_seed: 9090,
    })
    .unwrap();
    let start = Instant::now();
    let ranked = run_aismotif(&dataset.sequences, &RunParams::new(12)).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(ranked.len(), 1000 - 12 + 1);
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "Liver-scale run took {:.2}s, budget is 60s",
        elapsed.as_secs_f64()
    );
    println!(
        "[PASS] criterion 9: Liver-scale run (12 x 1kb, l=12) in {:.2}s (< 60s budget)",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_10_benchmark_pipeline() {
    let dir = TempDir::new().unwrap();
    let path = |name: &str| -> String { dir.path().join(name).to_str().unwrap().to_string() };

    // With AISMOTIF_BENCHMARK_DIR set (containing sequences.fa and
    // sites.tsv), the pipeline runs on the supplied benchmark data;
    // otherwise a generated dataset stands in so the pipeline itself is
    // always exercised.
    let supplied = std::env::var_os("AISMOTIF_BENCHMARK_DIR").map(PathBuf::from);
    let (fasta, sites, source) = match supplied {
        Some(dir) if dir.join("sequences.fa").is_file() && dir.join("sites.tsv").is_file() => (
            dir.join("sequences.fa").to_str().unwrap().to_string(),
            dir.join("sites.tsv").to_str().unwrap().to_string(),
            "user-supplied benchmark",
        ),
        _ => {
            run_ok(&[
                "generate", "--num-seqs", "12", "--seq-len", "400", "--motif-len", "12",
                "--mutations", "1", "--rng-seed", "31", "--out-prefix", &path("bench"),
            ]);
            (path("bench.fa"), path("bench.ann.tsv"), "generated stand-in")
        }
    };

    run_ok(&[
        "discover", "--input", &fasta, "--length", "12",
        "--format", "gff", "--output", &path("pred.gff"),
    ]);
    run_ok(&[
        "eval", "--predictions", &path("pred.gff"), "--annotations", &sites,
        "--input", &fasta, "--output", &path("metrics.tsv"),
    ]);

    let metrics = fs::read_to_string(path("metrics.tsv")).unwrap();
    for name in ["Sn", "Sp", "PPV", "PC", "nCC", "ASP"] {
        assert!(
            metrics.lines().any(|l| l.starts_with(&format!("{name}\t"))),
            "metric {name} missing from report:\n{metrics}"
        );
    }
    assert!(
        metrics
            .lines()
            .take_while(|l| l.starts_with('#'))
            .any(|l| l.contains("not directly comparable")),
        "report header must document the gap to external assessment services:\n{metrics}"
    );
    println!("[PASS] criterion 10: discover+eval pipeline end-to-end on {source}; all six metrics reported, gap documented in header");
}
