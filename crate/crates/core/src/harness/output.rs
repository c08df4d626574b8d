//! `replicates.csv`, `summary.json`, `qq.csv`, graph dumps and the manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CampaignResult, HarnessError, ReplicateRecord};
use crate::fmt::sig17;

pub const CSV_HEADER: [&str; 11] = [
    "replicate",
    "seed",
    "n_f",
    "mono",
    "poly",
    "poly_star",
    "s_tilde",
    "s_f_star",
    "normalized",
    "overflow",
    "runtime_ms",
];

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w)
}

fn row(r: &ReplicateRecord) -> [String; 11] {
    [
        r.replicate.to_string(),
        r.seed.to_string(),
        r.n_f.to_string(),
        r.mono.to_string(),
        r.poly.to_string(),
        r.poly_star.to_string(),
        r.s_tilde.to_string(),
        sig17(r.s_f_star),
        r.normalized.map(sig17).unwrap_or_default(),
        r.overflow.to_string(),
        r.runtime_ms.map(|v| v.to_string()).unwrap_or_default(),
    ]
}

fn csv_error(e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::IoFailure(io),
        other => HarnessError::IoFailure(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Appends rows to `replicates.csv` as replicates complete.
pub(crate) struct CsvSink {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    pub(crate) fn create(path: &Path) -> Result<Self, HarnessError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut writer = csv_writer(BufWriter::new(File::create(path)?));
        writer.write_record(CSV_HEADER).map_err(csv_error)?;
        writer.flush()?;
        Ok(CsvSink { writer })
    }

    pub(crate) fn write(&mut self, record: &ReplicateRecord) -> Result<(), HarnessError> {
        self.writer.write_record(row(record)).map_err(csv_error)
    }

    pub(crate) fn flush(&mut self) -> Result<(), HarnessError> {
        Ok(self.writer.flush()?)
    }
}

/// The full CSV text for `records`.
pub fn write_replicates_csv(records: &[ReplicateRecord]) -> String {
    let mut w = csv_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record(row(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Parses `replicates.csv` back into records.
pub fn read_replicates_csv(text: &str) -> Result<Vec<ReplicateRecord>, HarnessError> {
    let bad = |msg: String| HarnessError::IoFailure(std::io::Error::new(std::io::ErrorKind::InvalidData, msg));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_error)?;
        let int = |i: usize| rec[i].parse::<u64>().map_err(|e| bad(format!("column {}: {e}", CSV_HEADER[i])));
        let real = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("column {}: {e}", CSV_HEADER[i])));
        out.push(ReplicateRecord {
            replicate: int(0)?,
            seed: int(1)?,
            n_f: int(2)?,
            mono: int(3)?,
            poly: int(4)?,
            poly_star: int(5)?,
            s_tilde: int(6)?,
            s_f_star: real(7)?,
            normalized: if rec[8].is_empty() { None } else { Some(real(8)?) },
            overflow: int(9)?,
            runtime_ms: if rec[10].is_empty() { None } else { Some(int(10)?) },
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

fn qq_csv(points: &[(f64, f64)]) -> String {
    let mut w = csv_writer(Vec::new());
    w.write_record(["theoretical", "empirical"]).expect("in-memory write");
    for &(t, e) in points {
        w.write_record([sig17(t), sig17(e)]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Writes every artifact under `dir` and a `manifest.json` with their hashes.
pub fn emit_outputs(result: &CampaignResult, dir: &Path) -> Result<Manifest, HarnessError> {
    fs::create_dir_all(dir)?;
    let mut files: Vec<(String, Vec<u8>)> = vec![
        ("replicates.csv".into(), write_replicates_csv(&result.records).into_bytes()),
        (
            "summary.json".into(),
            (serde_json::to_string_pretty(&result.summary).expect("summary serializes") + "\n").into_bytes(),
        ),
    ];
    if !result.summary.diagnostics.qq.is_empty() {
        files.push(("qq.csv".into(), qq_csv(&result.summary.diagnostics.qq).into_bytes()));
    }
    for (replicate, dump) in &result.graph_dumps {
        files.push((format!("graphs/replicate_{replicate:06}.txt"), dump.clone().into_bytes()));
    }
    let mut entries = Vec::with_capacity(files.len());
    for (name, bytes) in &files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        entries.push(ManifestEntry {
            path: name.clone(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest { files: entries };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    Ok(manifest)
}
