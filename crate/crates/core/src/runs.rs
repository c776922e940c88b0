//! Resumable chunked batch runs.
//!
//! A run directory holds `manifest.json`, one file per finished chunk under
//! `chunks/`, and the final outputs. Chunk boundaries depend only on the
//! run parameters, and final outputs are assembled in chunk order, so the
//! result does not depend on the worker count or on interruptions.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::CanonicalKey;
use crate::census::{census_with, CensusMode, CensusOptions, CensusResult};
use crate::digraph::Digraph;
use crate::enumerate::{
    check_seeded, classes_of_seed, enumerate_with_budget, seeds, ClassMember, EnumerationMode,
};
use crate::error::{Error, Result};
use crate::experiments::{
    random_chunk, survey_members, ClassSurvey, RandomModelConfig, RandomReport, RandomTally,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DIGRAPHS_FILE: &str = "digraphs.jsonl";
pub const SURVEY_FILE: &str = "survey.json";
pub const RANDOM_FILE: &str = "random.json";

/// One line of an enumeration stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumRecord {
    #[serde(flatten)]
    pub digraph: Digraph,
    pub key: CanonicalKey,
    pub census: CensusResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RunKind {
    Enumerate {
        n: usize,
        k: usize,
        mode: EnumerationMode,
    },
    Survey {
        n: usize,
        k: usize,
        mode: EnumerationMode,
    },
    Random {
        config: RandomModelConfig,
    },
}

/// Everything that determines the outputs of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunParams {
    #[serde(flatten)]
    pub kind: RunKind,
    pub chunk_size: u64,
    pub census_mode: CensusMode,
    pub automata_budget: String,
    pub candidate_budget: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkStatus {
    pub index: usize,
    pub start: u64,
    pub end: u64,
    pub done: bool,
    pub records: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub params: RunParams,
    pub seed: Option<u64>,
    pub workers: usize,
    pub chunks: Vec<ChunkStatus>,
    pub complete: bool,
    pub wall_time_secs: f64,
    pub outputs: Vec<String>,
    /// Exact totals of the finished run, as decimal strings.
    pub totals: serde_json::Map<String, serde_json::Value>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Manifest> {
        Ok(serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)?)
    }

    fn save(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(self)?;
        text.push(b'\n');
        write_atomic(&dir.join(MANIFEST_FILE), &text)
    }

    pub fn done_chunks(&self) -> usize {
        self.chunks.iter().filter(|c| c.done).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Work units (seeds, class members or samples) per chunk.
    pub chunk_size: u64,
    pub census: CensusOptions,
    pub candidate_budget: u128,
    /// Stop after this many chunks in this session; used for checkpoints.
    pub max_chunks: Option<usize>,
    /// Recorded in the manifest only.
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            chunk_size: 0,
            census: CensusOptions::default(),
            candidate_budget: crate::enumerate::DEFAULT_CANDIDATE_BUDGET,
            max_chunks: None,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome<T> {
    Complete(T),
    Interrupted { done: usize, total: usize },
}

impl<T> RunOutcome<T> {
    pub fn complete(self) -> Option<T> {
        match self {
            RunOutcome::Complete(t) => Some(t),
            RunOutcome::Interrupted { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationSummary {
    pub records: u64,
    pub totally_sync: u64,
    pub path: PathBuf,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn chunk_path(dir: &Path, index: usize, ext: &str) -> PathBuf {
    dir.join("chunks").join(format!("chunk-{index:05}.{ext}"))
}

fn plan(units: u64, chunk_size: u64) -> Vec<ChunkStatus> {
    let size = chunk_size.max(1);
    (0..units.div_ceil(size))
        .map(|i| ChunkStatus {
            index: i as usize,
            start: i * size,
            end: ((i + 1) * size).min(units),
            done: false,
            records: 0,
        })
        .collect()
}

/// Opens or creates the manifest, runs pending chunks and saves
/// checkpoints. Returns the manifest once every chunk is done.
fn drive(
    dir: &Path,
    params: RunParams,
    seed: Option<u64>,
    units: u64,
    ext: &str,
    opts: &RunOptions,
    work: impl Fn(Range<u64>) -> Result<(Vec<u8>, u64)> + Sync,
) -> Result<std::result::Result<Manifest, (usize, usize)>> {
    let started = Instant::now();
    fs::create_dir_all(dir.join("chunks"))?;
    let mut manifest = if dir.join(MANIFEST_FILE).exists() {
        let m = Manifest::load(dir)?;
        if m.params != params {
            return Err(Error::Manifest(format!(
                "{} was written for different parameters",
                dir.join(MANIFEST_FILE).display()
            )));
        }
        m
    } else {
        Manifest {
            tool: "sync-census".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            params,
            seed,
            workers: opts.workers,
            chunks: plan(units, opts.chunk_size),
            complete: false,
            wall_time_secs: 0.0,
            outputs: Vec::new(),
            totals: Default::default(),
        }
    };
    manifest.workers = opts.workers;
    for c in manifest.chunks.iter_mut() {
        if c.done && !chunk_path(dir, c.index, ext).exists() {
            c.done = false;
        }
    }
    let prior_time = manifest.wall_time_secs;
    manifest.save(dir)?;

    let mut pending: Vec<(usize, Range<u64>)> = manifest
        .chunks
        .iter()
        .filter(|c| !c.done)
        .map(|c| (c.index, c.start..c.end))
        .collect();
    if let Some(max) = opts.max_chunks {
        pending.truncate(max);
    }
    let shared = Mutex::new(manifest);
    pending
        .into_par_iter()
        .try_for_each(|(index, range)| -> Result<()> {
            let (bytes, records) = work(range)?;
            write_atomic(&chunk_path(dir, index, ext), &bytes)?;
            let mut m = shared.lock().expect("manifest lock");
            m.chunks[index].done = true;
            m.chunks[index].records = records;
            m.wall_time_secs = prior_time + started.elapsed().as_secs_f64();
            m.save(dir)
        })?;
    let mut manifest = shared.into_inner().expect("manifest lock");
    manifest.wall_time_secs = prior_time + started.elapsed().as_secs_f64();
    let done = manifest.done_chunks();
    let total = manifest.chunks.len();
    manifest.save(dir)?;
    if done < total {
        return Ok(Err((done, total)));
    }
    Ok(Ok(manifest))
}

fn finish(
    dir: &Path,
    mut manifest: Manifest,
    outputs: &[&str],
    totals: serde_json::Value,
) -> Result<()> {
    manifest.complete = true;
    manifest.outputs = outputs.iter().map(|s| s.to_string()).collect();
    if let serde_json::Value::Object(map) = totals {
        manifest.totals = map;
    }
    manifest.save(dir)
}

fn params(kind: RunKind, opts: &RunOptions, default_chunk: u64) -> (RunParams, RunOptions) {
    let mut opts = *opts;
    if opts.chunk_size == 0 {
        opts.chunk_size = default_chunk;
    }
    let p = RunParams {
        kind,
        chunk_size: opts.chunk_size,
        census_mode: opts.census.mode,
        automata_budget: opts.census.budget.to_string(),
        candidate_budget: opts.candidate_budget.to_string(),
    };
    (p, opts)
}

/// Units of work for class runs: seeds, or members in direct mode.
enum ClassSource {
    Seeds(Vec<crate::canon::SimpleGraph>),
    Members(Vec<ClassMember>),
}

impl ClassSource {
    fn new(n: usize, k: usize, mode: EnumerationMode, budget: u128) -> Result<ClassSource> {
        Ok(match mode {
            EnumerationMode::Seeded => {
                check_seeded(n, k)?;
                ClassSource::Seeds(seeds(n)?)
            }
            EnumerationMode::Direct => {
                ClassSource::Members(enumerate_with_budget(n, k, mode, budget)?)
            }
        })
    }

    fn units(&self) -> u64 {
        match self {
            ClassSource::Seeds(s) => s.len() as u64,
            ClassSource::Members(m) => m.len() as u64,
        }
    }

    fn members(&self, k: usize, range: Range<u64>) -> Vec<ClassMember> {
        let r = range.start as usize..range.end as usize;
        match self {
            ClassSource::Seeds(s) => s[r].iter().flat_map(|g| classes_of_seed(g, k)).collect(),
            ClassSource::Members(m) => m[r].to_vec(),
        }
    }
}

fn default_class_chunk(mode: EnumerationMode) -> u64 {
    match mode {
        EnumerationMode::Seeded => 16,
        EnumerationMode::Direct => 4096,
    }
}

/// Enumerates classes with their census into `dir/digraphs.jsonl`.
pub fn run_enumeration(
    dir: &Path,
    n: usize,
    k: usize,
    mode: EnumerationMode,
    opts: &RunOptions,
) -> Result<RunOutcome<EnumerationSummary>> {
    let (p, opts) = params(
        RunKind::Enumerate { n, k, mode },
        opts,
        default_class_chunk(mode),
    );
    let source = ClassSource::new(n, k, mode, opts.candidate_budget)?;
    let census = opts.census;
    let manifest = match drive(dir, p, None, source.units(), "jsonl", &opts, |range| {
        let mut buf = Vec::new();
        let members = source.members(k, range);
        for m in &members {
            let record = EnumRecord {
                census: census_with(&m.digraph, &census)?,
                digraph: m.digraph.clone(),
                key: m.key.clone(),
            };
            serde_json::to_writer(&mut buf, &record)?;
            buf.push(b'\n');
        }
        Ok((buf, members.len() as u64))
    })? {
        Ok(m) => m,
        Err((done, total)) => return Ok(RunOutcome::Interrupted { done, total }),
    };

    let path = dir.join(DIGRAPHS_FILE);
    let tmp = path.with_extension("tmp");
    let mut out = BufWriter::new(fs::File::create(&tmp)?);
    let mut keys = HashSet::new();
    let (mut records, mut totally_sync) = (0u64, 0u64);
    for c in &manifest.chunks {
        for line in BufReader::new(fs::File::open(chunk_path(dir, c.index, "jsonl"))?).lines() {
            let line = line?;
            let record: EnumRecord = serde_json::from_str(&line)?;
            if !keys.insert(record.key.clone()) {
                return Err(Error::Manifest(format!(
                    "key {} appears in two chunks",
                    record.key
                )));
            }
            records += 1;
            totally_sync += record.census.is_totally_synchronizing() as u64;
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
        }
    }
    out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    fs::rename(&tmp, &path)?;
    finish(
        dir,
        manifest,
        &[DIGRAPHS_FILE],
        serde_json::json!({"records": records.to_string(), "totally_sync": totally_sync.to_string()}),
    )?;
    Ok(RunOutcome::Complete(EnumerationSummary {
        records,
        totally_sync,
        path,
    }))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    write_atomic(path, &text)
}

/// Statistics and gap histogram over all classes, into `dir/survey.json`.
pub fn run_survey(
    dir: &Path,
    n: usize,
    k: usize,
    mode: EnumerationMode,
    opts: &RunOptions,
) -> Result<RunOutcome<ClassSurvey>> {
    let (p, opts) = params(
        RunKind::Survey { n, k, mode },
        opts,
        default_class_chunk(mode),
    );
    let source = ClassSource::new(n, k, mode, opts.candidate_budget)?;
    // fails early on (k!)^n overflow
    ClassSurvey::new(n, k)?;
    let census = opts.census;
    let manifest = match drive(dir, p, None, source.units(), "json", &opts, |range| {
        let s = survey_members(n, k, &source.members(k, range), &census)?;
        Ok((serde_json::to_vec(&s)?, s.stats.class_size))
    })? {
        Ok(m) => m,
        Err((done, total)) => return Ok(RunOutcome::Interrupted { done, total }),
    };
    let mut survey = ClassSurvey::new(n, k)?;
    for c in &manifest.chunks {
        let part: ClassSurvey =
            serde_json::from_slice(&fs::read(chunk_path(dir, c.index, "json"))?)?;
        survey.merge(&part)?;
    }
    write_json(&dir.join(SURVEY_FILE), &survey)?;
    let totals = serde_json::json!({
        "class_size": survey.stats.class_size.to_string(),
        "totally_sync": survey.stats.totally_sync.to_string(),
        "sum": survey.stats.sum.to_string(),
        "sum_sq": survey.stats.sum_sq.to_string(),
    });
    finish(dir, manifest, &[SURVEY_FILE], totals)?;
    Ok(RunOutcome::Complete(survey))
}

/// Random-model experiment, into `dir/random.json`.
pub fn run_random(
    dir: &Path,
    cfg: &RandomModelConfig,
    opts: &RunOptions,
) -> Result<RunOutcome<RandomReport>> {
    cfg.validate()?;
    let (p, opts) = params(RunKind::Random { config: *cfg }, opts, 4096);
    RandomTally::new(cfg.n, cfg.k)?;
    let census = opts.census;
    let manifest = match drive(
        dir,
        p,
        Some(cfg.seed),
        cfg.samples,
        "json",
        &opts,
        |range| {
            let t = random_chunk(cfg, range, &census)?;
            Ok((serde_json::to_vec(&t)?, t.stats.class_size))
        },
    )? {
        Ok(m) => m,
        Err((done, total)) => return Ok(RunOutcome::Interrupted { done, total }),
    };
    let mut tally = RandomTally::new(cfg.n, cfg.k)?;
    for c in &manifest.chunks {
        let part: RandomTally =
            serde_json::from_slice(&fs::read(chunk_path(dir, c.index, "json"))?)?;
        tally.merge(&part)?;
    }
    let report = RandomReport::from_tally(*cfg, tally);
    write_json(&dir.join(RANDOM_FILE), &report)?;
    let totals = serde_json::json!({
        "samples": report.stats.class_size.to_string(),
        "totally_sync": report.stats.totally_sync.to_string(),
    });
    finish(dir, manifest, &[RANDOM_FILE], totals)?;
    Ok(RunOutcome::Complete(report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ClassFilter;

    fn small() -> RunOptions {
        RunOptions {
            chunk_size: 3,
            ..Default::default()
        }
    }

    #[test]
    fn enumeration_resumes_to_identical_output() {
        let full = tempfile::tempdir().unwrap();
        let s = run_enumeration(full.path(), 4, 2, EnumerationMode::Seeded, &small())
            .unwrap()
            .complete()
            .unwrap();
        assert_eq!((s.records, s.totally_sync), (100, 66));

        let part = tempfile::tempdir().unwrap();
        // different chunking, same stream
        let stop = RunOptions {
            chunk_size: 2,
            max_chunks: Some(2),
            ..small()
        };
        let mut sessions = 0;
        loop {
            sessions += 1;
            match run_enumeration(part.path(), 4, 2, EnumerationMode::Seeded, &stop).unwrap() {
                RunOutcome::Complete(_) => break,
                RunOutcome::Interrupted { done, total } => assert!(done < total),
            }
        }
        assert_eq!(sessions, 3);
        assert_eq!(
            fs::read(full.path().join(DIGRAPHS_FILE)).unwrap(),
            fs::read(part.path().join(DIGRAPHS_FILE)).unwrap()
        );
        let m = Manifest::load(part.path()).unwrap();
        assert!(m.complete);
        assert_eq!(m.totals["records"], "100");
    }

    #[test]
    fn mismatched_parameters_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        run_enumeration(dir.path(), 3, 2, EnumerationMode::Seeded, &small()).unwrap();
        assert!(matches!(
            run_enumeration(dir.path(), 3, 3, EnumerationMode::Seeded, &small()),
            Err(Error::Manifest(_))
        ));
    }

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        run_enumeration(dir.path(), 2, 3, EnumerationMode::Direct, &small()).unwrap();
        let text = fs::read_to_string(dir.path().join(DIGRAPHS_FILE)).unwrap();
        let records: Vec<EnumRecord> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(records.len(), 5);
        for r in &records {
            assert_eq!(crate::canon::canonical_key(&r.digraph).unwrap(), r.key);
            assert_eq!(
                census_with(&r.digraph, &CensusOptions::default()).unwrap(),
                r.census
            );
        }
    }

    #[test]
    fn survey_and_random_runs_match_in_memory_results() {
        let dir = tempfile::tempdir().unwrap();
        let s = run_survey(dir.path(), 4, 2, EnumerationMode::Seeded, &small())
            .unwrap()
            .complete()
            .unwrap();
        let expected = crate::experiments::class_survey(4, 2, &Default::default()).unwrap();
        assert_eq!(s, expected);

        let dir = tempfile::tempdir().unwrap();
        let cfg = RandomModelConfig::new(4, 2, 500, 9, ClassFilter::StronglyConnectedAperiodic);
        let r = run_random(
            dir.path(),
            &cfg,
            &RunOptions {
                chunk_size: 64,
                ..Default::default()
            },
        )
        .unwrap()
        .complete()
        .unwrap();
        let m = crate::experiments::random_experiment(&cfg, &CensusOptions::default()).unwrap();
        assert_eq!(r.stats, m.stats);
        assert_eq!(r.weights, m.weights);
        assert_eq!(Manifest::load(dir.path()).unwrap().seed, Some(9));
    }
}
