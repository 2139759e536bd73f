//! Enumeration and classification of sphere candidates of a fixed degree,
//! persisted as JSONL so long runs can be resumed.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::RealizationCertificate;
use crate::football;
use crate::oracle::{self, OracleOptions, Outcome};
use crate::partition::{is_zheng_exceptional, theorem2_applies, validate, BranchDatum, DatumReport, Partition};

/// Default largest degree `classify` accepts.
pub const DEFAULT_MAX_DEGREE: u32 = 8;

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("degree {degree} is outside the configured range 2..={max}")]
    Degree { degree: u32, max: u32 },
    #[error("record {index} ({datum}): {reason}")]
    Classify { index: usize, datum: String, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: line {line}: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Realizable,
    Exceptional,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordMethod {
    Theorem2Constructive,
    Oracle,
    ZhengFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub index: usize,
    pub datum: BranchDatum,
    pub nu: u64,
    pub flags: DatumReport,
    pub decision: Verdict,
    pub method: RecordMethod,
    /// For family members: whether an exhaustive search backed the verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirmed: Option<bool>,
    pub certificate: Option<RealizationCertificate>,
    pub nodes: u64,
    pub ms: f64,
}

/// Nontrivial partitions of `d`, largest first in reverse lexicographic order.
pub fn nontrivial_partitions(d: u32) -> Vec<Partition> {
    fn go(rest: u32, cap: u32, acc: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition::new(acc.clone()).expect("positive parts"));
            return;
        }
        for part in (1..=cap.min(rest)).rev() {
            acc.push(part);
            go(rest - part, part, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(d, d, &mut Vec::new(), &mut out);
    out.retain(|p| !p.is_trivial());
    out
}

/// Every multiset of nontrivial partitions of `d` with total branching
/// `2d - 2`, each once, in a fixed order. `k` defaults to `2..`.
pub fn enumerate_candidates(d: u32, k_range: Option<RangeInclusive<usize>>) -> impl Iterator<Item = BranchDatum> {
    let parts = if d >= 2 { nontrivial_partitions(d) } else { Vec::new() };
    let target = 2 * d.saturating_sub(1);
    let k_range = k_range.unwrap_or(2..=usize::MAX);
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fill(&parts, 0, target, &k_range, d, &mut chosen, &mut out);
    out.into_iter()
}

fn fill(
    parts: &[Partition],
    from: usize,
    remaining: u32,
    k_range: &RangeInclusive<usize>,
    d: u32,
    chosen: &mut Vec<usize>,
    out: &mut Vec<BranchDatum>,
) {
    if remaining == 0 {
        if k_range.contains(&chosen.len()) {
            let partitions = chosen.iter().map(|&i| parts[i].clone()).collect();
            out.push(BranchDatum::new(d, partitions).expect("nontrivial partitions of d"));
        }
        return;
    }
    if chosen.len() >= *k_range.end() {
        return;
    }
    for i in from..parts.len() {
        let b = parts[i].branching();
        if b <= remaining {
            chosen.push(i);
            fill(parts, i, remaining - b, k_range, d, chosen, out);
            chosen.pop();
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub max_degree: u32,
    /// Family members up to this degree are re-checked by exhaustive search.
    pub confirm_bound: u32,
    pub oracle: OracleOptions,
    pub k_range: Option<RangeInclusive<usize>>,
    /// Worker threads across data; 0 or 1 runs sequentially.
    pub jobs: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            max_degree: DEFAULT_MAX_DEGREE,
            confirm_bound: 8,
            oracle: OracleOptions::default(),
            k_range: None,
            jobs: 1,
        }
    }
}

/// Classifies one datum.
pub fn classify_one(index: usize, datum: &BranchDatum, options: &ClassifyOptions) -> Result<ClassificationRecord, AtlasError> {
    let start = Instant::now();
    let flags = validate(datum);
    let fail = |reason: String| AtlasError::Classify { index, datum: datum.to_string(), reason };
    let run_oracle = || oracle::decide_with(datum, &options.oracle).map_err(|e| fail(e.to_string()));

    let (decision, method, confirmed, certificate, nodes) = if theorem2_applies(datum) {
        match football::realize(datum) {
            Ok(cert) => (Verdict::Realizable, RecordMethod::Theorem2Constructive, None, Some(cert), 0),
            Err(e) => return Err(fail(e.to_string())),
        }
    } else if is_zheng_exceptional(datum).is_some() {
        if datum.degree() <= options.confirm_bound {
            let d = run_oracle()?;
            let (verdict, cert) = verdict_of(d.outcome);
            (verdict, RecordMethod::ZhengFamily, Some(verdict == Verdict::Exceptional), cert, d.nodes_explored)
        } else {
            (Verdict::Exceptional, RecordMethod::ZhengFamily, Some(false), None, 0)
        }
    } else {
        let d = run_oracle()?;
        let (verdict, cert) = verdict_of(d.outcome);
        (verdict, RecordMethod::Oracle, None, cert, d.nodes_explored)
    };
    Ok(ClassificationRecord {
        index,
        datum: datum.clone(),
        nu: datum.nu(),
        flags,
        decision,
        method,
        confirmed,
        certificate,
        nodes,
        ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn verdict_of(outcome: Outcome) -> (Verdict, Option<RealizationCertificate>) {
    match outcome {
        Outcome::Realizable(c) => (Verdict::Realizable, Some(*c)),
        Outcome::Exceptional => (Verdict::Exceptional, None),
        Outcome::Unknown => (Verdict::Unknown, None),
    }
}

fn check_degree(d: u32, options: &ClassifyOptions) -> Result<(), AtlasError> {
    if d < 2 || d > options.max_degree {
        return Err(AtlasError::Degree { degree: d, max: options.max_degree });
    }
    Ok(())
}

/// Classifies every candidate of degree `d` in memory.
pub fn classify(d: u32, options: &ClassifyOptions) -> Result<Vec<ClassificationRecord>, AtlasError> {
    check_degree(d, options)?;
    let data: Vec<BranchDatum> = enumerate_candidates(d, options.k_range.clone()).collect();
    classify_batch(&data, 0, options)
}

fn classify_batch(data: &[BranchDatum], offset: usize, options: &ClassifyOptions) -> Result<Vec<ClassificationRecord>, AtlasError> {
    if options.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            data.par_iter()
                .enumerate()
                .map(|(i, datum)| classify_one(offset + i, datum, options))
                .collect()
        })
    } else {
        data.iter()
            .enumerate()
            .map(|(i, datum)| classify_one(offset + i, datum, options))
            .collect()
    }
}

/// One row of the per-`k` summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SummaryRow {
    pub degree: u32,
    pub k: usize,
    pub total: usize,
    pub realizable: usize,
    pub exceptional: usize,
    pub unknown: usize,
}

pub fn summarize(records: &[ClassificationRecord]) -> Vec<SummaryRow> {
    let mut rows: BTreeMap<(u32, usize), SummaryRow> = BTreeMap::new();
    for r in records {
        let key = (r.datum.degree(), r.datum.k());
        let row = rows.entry(key).or_insert(SummaryRow { degree: key.0, k: key.1, ..Default::default() });
        row.total += 1;
        match r.decision {
            Verdict::Realizable => row.realizable += 1,
            Verdict::Exceptional => row.exceptional += 1,
            Verdict::Unknown => row.unknown += 1,
        }
    }
    rows.into_values().collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("degree,k,total,realizable,exceptional,unknown\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{},{}\n", r.degree, r.k, r.total, r.realizable, r.exceptional, r.unknown));
    }
    out
}

/// Where the summary of a JSONL file goes: `x.jsonl` becomes `x.summary.csv`.
pub fn summary_path(jsonl: &Path) -> PathBuf {
    jsonl.with_extension("summary.csv")
}

/// Reads the records `0..n` that form an unbroken prefix of the file and
/// returns them with the byte length of that prefix. Anything after it (a
/// torn last line, an out-of-order record) is ignored.
pub fn read_prefix(path: &Path) -> Result<(Vec<ClassificationRecord>, u64), AtlasError> {
    let io_err = |source| AtlasError::Io { path: path.to_path_buf(), source };
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
        Err(e) => return Err(io_err(e)),
    };
    let mut reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut offset = 0u64;
    let mut line = String::new();
    loop {
        line.clear();
        let n = reader.read_line(&mut line).map_err(io_err)?;
        if n == 0 || !line.ends_with('\n') {
            break;
        }
        match serde_json::from_str::<ClassificationRecord>(line.trim_end()) {
            Ok(r) if r.index == records.len() => records.push(r),
            _ => break,
        }
        offset += n as u64;
    }
    Ok((records, offset))
}

/// Report of an atlas run.
#[derive(Debug, Clone)]
pub struct AtlasRun {
    pub records: Vec<ClassificationRecord>,
    pub resumed_from: usize,
    pub summary: Vec<SummaryRow>,
    pub summary_path: PathBuf,
}

/// Classifies degree `d` into `out` (JSONL), writing records in index order
/// and the summary CSV at the end. With `resume`, records already present as
/// a complete prefix are kept and the rest is appended.
pub fn run(d: u32, out: &Path, resume: bool, options: &ClassifyOptions) -> Result<AtlasRun, AtlasError> {
    check_degree(d, options)?;
    let io_err = |source| AtlasError::Io { path: out.to_path_buf(), source };
    let (mut records, keep) = if resume { read_prefix(out)? } else { (Vec::new(), 0) };
    // A prefix from another degree or enumeration is not a prefix of this run.
    let data: Vec<BranchDatum> = enumerate_candidates(d, options.k_range.clone()).collect();
    let consistent = records.len() <= data.len() && records.iter().zip(&data).all(|(r, x)| r.datum == *x);
    let (keep, start) = if consistent { (keep, records.len()) } else {
        records.clear();
        (0, 0)
    };

    let file = OpenOptions::new().create(true).write(true).truncate(false).open(out).map_err(io_err)?;
    file.set_len(keep).map_err(io_err)?;
    let mut file = file;
    file.seek(SeekFrom::End(0)).map_err(io_err)?;
    let mut writer = BufWriter::new(file);

    let chunk = 16 * options.jobs.max(1);
    let mut next = start;
    while next < data.len() {
        let end = (next + chunk).min(data.len());
        let batch = classify_batch(&data[next..end], next, options)?;
        for r in &batch {
            let line = serde_json::to_string(r).expect("record serializes");
            writeln!(writer, "{line}").map_err(io_err)?;
        }
        writer.flush().map_err(io_err)?;
        records.extend(batch);
        next = end;
    }
    drop(writer);

    let summary = summarize(&records);
    let csv_path = summary_path(out);
    std::fs::write(&csv_path, summary_csv(&summary)).map_err(|source| AtlasError::Io { path: csv_path.clone(), source })?;
    Ok(AtlasRun { records, resumed_from: start, summary, summary_path: csv_path })
}
