use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AggregateStats, ExperimentSpec, RunRecord, SweepRow, SweepSpec};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Results of one experiment as persisted on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentFile {
    pub schema_version: u32,
    pub spec: ExperimentSpec,
    pub runs: Vec<RunRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<AggregateStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFile {
    pub schema_version: u32,
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

/// Either kind of results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Document {
    Sweep(SweepFile),
    Experiment(ExperimentFile),
}

/// One line of the flat CSV export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub gen: u64,
    pub nfe: u64,
    pub elapsed_s: f64,
    pub quality: f64,
    pub diversity: Option<f64>,
    pub rep: usize,
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Config(format!("unsupported schema_version {v}")));
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn export_json(spec: &ExperimentSpec, runs: &[RunRecord], path: &Path) -> Result<()> {
    write_json(
        &ExperimentFile {
            schema_version: SCHEMA_VERSION,
            spec: spec.clone(),
            runs: runs.to_vec(),
            aggregate: None,
        },
        path,
    )
}

/// Like [`export_json`] with the cross-repetition statistics attached.
pub fn export_aggregate_json(spec: &ExperimentSpec, runs: &[RunRecord], path: &Path) -> Result<()> {
    write_json(
        &ExperimentFile {
            schema_version: SCHEMA_VERSION,
            spec: spec.clone(),
            runs: runs.to_vec(),
            aggregate: Some(super::aggregate(runs)),
        },
        path,
    )
}

pub fn export_sweep_json(spec: &SweepSpec, rows: &[SweepRow], path: &Path) -> Result<()> {
    write_json(
        &SweepFile {
            schema_version: SCHEMA_VERSION,
            spec: spec.clone(),
            rows: rows.to_vec(),
        },
        path,
    )
}

pub fn import_json(path: &Path) -> Result<ExperimentFile> {
    let file: ExperimentFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    check_version(file.schema_version)?;
    Ok(file)
}

pub fn read_document(path: &Path) -> Result<Document> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    let doc: Document = serde_json::from_str(&text)?;
    match &doc {
        Document::Sweep(s) => check_version(s.schema_version)?,
        Document::Experiment(e) => check_version(e.schema_version)?,
    }
    Ok(doc)
}

/// Flattens every run's history, one row per sample.
pub fn export_csv(runs: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(["gen", "nfe", "elapsed_s", "quality", "diversity", "rep"])?;
    for r in runs {
        for p in &r.series {
            w.serialize(CsvRow {
                gen: p.gen,
                nfe: p.nfe,
                elapsed_s: p.elapsed_s,
                quality: p.quality,
                diversity: p.diversity,
                rep: r.rep,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn import_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<CsvRow>, _>>()?;
    Ok(rows)
}
