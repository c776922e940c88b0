//! Exact statistics over isomorphism classes, gap tables and the uniform
//! random digraph model.
//!
//! All partial results merge exactly, so chunked and parallel runs reduce
//! to the same record as a single pass.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::Range;

use num_integer::Roots;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::is_primitive;
use crate::canon::{automorphism_count, SimpleGraph, MAX_CANON_VERTICES};
use crate::census::{census_with, coloring_weight, factorial, CensusOptions, CensusResult};
use crate::digraph::{Digraph, MAX_DEGREE, MAX_VERTICES};
use crate::enumerate::{
    check_seeded, classes_of_seed, enumerate_with_budget, seeds, ClassMember, EnumerationMode,
    DEFAULT_CANDIDATE_BUDGET,
};
use crate::error::{Error, Result};

/// Decimal places used in reports.
pub const REPORT_DECIMALS: u32 = 3;

fn overflow(what: &str) -> Error {
    Error::Overflow(what.to_string())
}

fn parse_u128(s: &str) -> std::result::Result<u128, String> {
    s.parse().map_err(|e| format!("bad integer {s:?}: {e}"))
}

/// `r` rounded half-up to `decimals` places, printed with exactly that many.
pub fn round_half_up(r: &Ratio<u128>, decimals: u32) -> String {
    let scale = 10u128.pow(decimals);
    let m = (2 * r.numer() * scale + r.denom()) / (2 * r.denom());
    format_fixed(m, decimals)
}

fn format_fixed(m: u128, decimals: u32) -> String {
    if decimals == 0 {
        return m.to_string();
    }
    let scale = 10u128.pow(decimals);
    format!(
        "{}.{:0width$}",
        m / scale,
        m % scale,
        width = decimals as usize
    )
}

/// `sqrt(x) / n` rounded half-up to `decimals` places, exactly.
fn sqrt_ratio_half_up(x: u128, n: u128, decimals: u32) -> Option<String> {
    // floor(sqrt(A)/n + 1/2) = floor((isqrt(4A) + n) / 2n) with A = 10^(2d) x
    let a4 = 10u128
        .checked_pow(2 * decimals)?
        .checked_mul(x)?
        .checked_mul(4)?;
    let m = (a4.sqrt() + n) / (2 * n);
    Some(format_fixed(m, decimals))
}

/// Exact sums over a set of digraphs; derived statistics on demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StatsJson", into = "StatsJson")]
pub struct StatsRecord {
    pub n: usize,
    pub k: usize,
    pub class_size: u64,
    pub min: Option<u128>,
    pub sum: u128,
    pub sum_sq: u128,
    pub totally_sync: u64,
    /// `(k!)^n`.
    pub total_colorings: u128,
}

impl StatsRecord {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let total_colorings = factorial(k)
            .checked_pow(n as u32)
            .ok_or_else(|| overflow("(k!)^n does not fit in 128 bits"))?;
        Ok(StatsRecord {
            n,
            k,
            class_size: 0,
            min: None,
            sum: 0,
            sum_sq: 0,
            totally_sync: 0,
            total_colorings,
        })
    }

    pub fn add(&mut self, c: &CensusResult) -> Result<()> {
        if c.total_colorings != self.total_colorings {
            return Err(Error::Domain("census belongs to a different (n, k)".into()));
        }
        let s = c.sync_colorings;
        self.class_size += 1;
        self.min = Some(self.min.map_or(s, |m| m.min(s)));
        self.sum = self.sum.checked_add(s).ok_or_else(|| overflow("sum"))?;
        let sq = s.checked_mul(s).ok_or_else(|| overflow("square"))?;
        self.sum_sq = self
            .sum_sq
            .checked_add(sq)
            .ok_or_else(|| overflow("sum of squares"))?;
        if c.is_totally_synchronizing() {
            self.totally_sync += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &StatsRecord) -> Result<()> {
        if (self.n, self.k) != (other.n, other.k) {
            return Err(Error::Domain(
                "cannot merge records of different (n, k)".into(),
            ));
        }
        self.class_size += other.class_size;
        self.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.sum = self
            .sum
            .checked_add(other.sum)
            .ok_or_else(|| overflow("sum"))?;
        self.sum_sq = self
            .sum_sq
            .checked_add(other.sum_sq)
            .ok_or_else(|| overflow("sum of squares"))?;
        self.totally_sync += other.totally_sync;
        Ok(())
    }

    pub fn min_ratio(&self) -> Option<Ratio<u128>> {
        self.min.map(|m| Ratio::new(m, self.total_colorings))
    }

    pub fn avg(&self) -> Option<Ratio<u128>> {
        (self.class_size > 0).then(|| Ratio::new(self.sum, self.class_size as u128))
    }

    pub fn avg_ratio(&self) -> Option<Ratio<u128>> {
        (self.class_size > 0)
            .then(|| Ratio::new(self.sum, self.class_size as u128 * self.total_colorings))
    }

    /// `N * sum_sq - sum^2`, the population variance times `N^2`.
    fn scaled_variance(&self) -> Option<u128> {
        let n = self.class_size as u128;
        let a = n.checked_mul(self.sum_sq)?;
        let b = self.sum.checked_mul(self.sum)?;
        Some(a - b)
    }

    pub fn variance(&self) -> Option<Ratio<u128>> {
        let n = self.class_size as u128;
        if n == 0 {
            return None;
        }
        Some(Ratio::new(self.scaled_variance()?, n.checked_mul(n)?))
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> Option<f64> {
        let n = self.class_size as f64;
        if self.class_size == 0 {
            return None;
        }
        let var = match self.scaled_variance() {
            Some(x) => x as f64 / (n * n),
            None => {
                let mean = self.sum as f64 / n;
                (self.sum_sq as f64 / n - mean * mean).max(0.0)
            }
        };
        Some(var.sqrt())
    }

    /// Population standard deviation rounded half-up, computed exactly
    /// when the intermediate integers fit.
    pub fn std_dev_rounded(&self, decimals: u32) -> Option<String> {
        if self.class_size == 0 {
            return None;
        }
        self.scaled_variance()
            .and_then(|x| sqrt_ratio_half_up(x, self.class_size as u128, decimals))
            .or_else(|| {
                self.std_dev()
                    .map(|s| format!("{:.*}", decimals as usize, s))
            })
    }

    pub fn totally_sync_fraction(&self) -> Option<Ratio<u128>> {
        (self.class_size > 0)
            .then(|| Ratio::new(self.totally_sync as u128, self.class_size as u128))
    }

    pub fn table2_row(&self) -> Table2Row {
        Table2Row {
            k: self.k,
            n: self.n,
            primitive: self.class_size,
            totally_sync: self.totally_sync,
            fraction: self
                .totally_sync_fraction()
                .unwrap_or_else(|| Ratio::from_integer(0)),
        }
    }
}

fn ratio_string(r: Option<Ratio<u128>>) -> Option<String> {
    r.map(|r| format!("{}/{}", r.numer(), r.denom()))
}

/// JSON form: exact integers as decimal strings, rationals as `p/q`.
#[derive(Serialize, Deserialize)]
struct StatsJson {
    k: usize,
    n: usize,
    class_size: u64,
    min: Option<String>,
    sum: String,
    sum_sq: String,
    totally_sync: u64,
    total_colorings: String,
    #[serde(default, skip_deserializing)]
    min_ratio: Option<String>,
    #[serde(default, skip_deserializing)]
    avg: Option<String>,
    #[serde(default, skip_deserializing)]
    avg_ratio: Option<String>,
    #[serde(default, skip_deserializing)]
    variance: Option<String>,
    #[serde(default, skip_deserializing)]
    std_dev: Option<f64>,
    #[serde(default, skip_deserializing)]
    totally_sync_fraction: Option<String>,
}

impl From<StatsRecord> for StatsJson {
    fn from(s: StatsRecord) -> Self {
        StatsJson {
            k: s.k,
            n: s.n,
            class_size: s.class_size,
            min: s.min.map(|m| m.to_string()),
            sum: s.sum.to_string(),
            sum_sq: s.sum_sq.to_string(),
            totally_sync: s.totally_sync,
            total_colorings: s.total_colorings.to_string(),
            min_ratio: ratio_string(s.min_ratio()),
            avg: ratio_string(s.avg()),
            avg_ratio: ratio_string(s.avg_ratio()),
            variance: ratio_string(s.variance()),
            std_dev: s.std_dev(),
            totally_sync_fraction: ratio_string(s.totally_sync_fraction()),
        }
    }
}

impl TryFrom<StatsJson> for StatsRecord {
    type Error = String;

    fn try_from(j: StatsJson) -> std::result::Result<Self, String> {
        Ok(StatsRecord {
            n: j.n,
            k: j.k,
            class_size: j.class_size,
            min: j.min.as_deref().map(parse_u128).transpose()?,
            sum: parse_u128(&j.sum)?,
            sum_sq: parse_u128(&j.sum_sq)?,
            totally_sync: j.totally_sync,
            total_colorings: parse_u128(&j.total_colorings)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table2Row {
    pub k: usize,
    pub n: usize,
    pub primitive: u64,
    pub totally_sync: u64,
    pub fraction: Ratio<u128>,
}

/// Histogram of synchronizing-coloring counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GapJson", into = "GapJson")]
pub struct GapTable {
    pub n: usize,
    pub k: usize,
    pub histogram: BTreeMap<u128, u64>,
}

impl GapTable {
    pub fn new(n: usize, k: usize) -> Self {
        GapTable {
            n,
            k,
            histogram: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, sync_colorings: u128) {
        *self.histogram.entry(sync_colorings).or_default() += 1;
    }

    pub fn merge(&mut self, other: &GapTable) {
        for (&v, &c) in &other.histogram {
            *self.histogram.entry(v).or_default() += c;
        }
    }

    pub fn total(&self) -> u64 {
        self.histogram.values().sum()
    }

    pub fn min_key(&self) -> Option<u128> {
        self.histogram.keys().next().copied()
    }

    /// Maximal runs of unachieved multiples of `k!` strictly between the
    /// smallest and largest achieved values, as inclusive endpoints.
    pub fn gaps(&self) -> Vec<(u128, u128)> {
        let step = factorial(self.k);
        let keys: Vec<u128> = self.histogram.keys().copied().collect();
        keys.windows(2)
            .filter_map(|w| {
                let lo = (w[0] / step + 1) * step;
                let hi = if w[1] % step == 0 {
                    w[1] - step
                } else {
                    w[1] / step * step
                };
                (lo <= hi).then_some((lo, hi))
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct GapEntry {
    sync_colorings: String,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct GapJson {
    k: usize,
    n: usize,
    histogram: Vec<GapEntry>,
    #[serde(default, skip_deserializing)]
    gaps: Vec<[String; 2]>,
}

impl From<GapTable> for GapJson {
    fn from(g: GapTable) -> Self {
        GapJson {
            k: g.k,
            n: g.n,
            gaps: g
                .gaps()
                .iter()
                .map(|(a, b)| [a.to_string(), b.to_string()])
                .collect(),
            histogram: g
                .histogram
                .iter()
                .map(|(v, c)| GapEntry {
                    sync_colorings: v.to_string(),
                    count: *c,
                })
                .collect(),
        }
    }
}

impl TryFrom<GapJson> for GapTable {
    type Error = String;

    fn try_from(j: GapJson) -> std::result::Result<Self, String> {
        let mut g = GapTable::new(j.n, j.k);
        for e in j.histogram {
            *g.histogram
                .entry(parse_u128(&e.sync_colorings)?)
                .or_default() += e.count;
        }
        Ok(g)
    }
}

/// Statistics and histogram over the same set of digraphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSurvey {
    pub stats: StatsRecord,
    pub gaps: GapTable,
}

impl ClassSurvey {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Ok(ClassSurvey {
            stats: StatsRecord::new(n, k)?,
            gaps: GapTable::new(n, k),
        })
    }

    pub fn add(&mut self, c: &CensusResult) -> Result<()> {
        self.stats.add(c)?;
        self.gaps.add(c.sync_colorings);
        Ok(())
    }

    pub fn merge(&mut self, other: &ClassSurvey) -> Result<()> {
        self.stats.merge(&other.stats)?;
        self.gaps.merge(&other.gaps);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SurveyOptions {
    pub mode: EnumerationMode,
    pub candidate_budget: u128,
    pub census: CensusOptions,
}

impl Default for SurveyOptions {
    fn default() -> Self {
        SurveyOptions {
            mode: EnumerationMode::Seeded,
            candidate_budget: DEFAULT_CANDIDATE_BUDGET,
            census: CensusOptions::default(),
        }
    }
}

/// Survey of the given digraphs, in order.
pub fn survey_members(
    n: usize,
    k: usize,
    members: &[ClassMember],
    opts: &CensusOptions,
) -> Result<ClassSurvey> {
    let mut out = ClassSurvey::new(n, k)?;
    for m in members {
        out.add(&census_with(&m.digraph, opts)?)?;
    }
    Ok(out)
}

/// Survey of the classes generated by one seed.
pub fn survey_seed(g: &SimpleGraph, k: usize, opts: &CensusOptions) -> Result<ClassSurvey> {
    survey_members(g.n(), k, &classes_of_seed(g, k), opts)
}

/// Census of every nonisomorphic primitive digraph on `n` vertices,
/// aggregated. Runs on the current rayon pool.
pub fn class_survey(n: usize, k: usize, opts: &SurveyOptions) -> Result<ClassSurvey> {
    let parts: Vec<ClassSurvey> = match opts.mode {
        EnumerationMode::Seeded => {
            check_seeded(n, k)?;
            let seeds = seeds(n)?;
            seeds
                .par_iter()
                .map(|g| survey_seed(g, k, &opts.census))
                .collect::<Result<_>>()?
        }
        EnumerationMode::Direct => {
            let members =
                enumerate_with_budget(n, k, EnumerationMode::Direct, opts.candidate_budget)?;
            members
                .par_chunks(256)
                .map(|c| survey_members(n, k, c, &opts.census))
                .collect::<Result<_>>()?
        }
    };
    let mut out = ClassSurvey::new(n, k)?;
    for p in &parts {
        out.merge(p)?;
    }
    Ok(out)
}

pub fn table1_stats(n: usize, k: usize) -> Result<StatsRecord> {
    Ok(class_survey(n, k, &SurveyOptions::default())?.stats)
}

pub fn table2_counts(n: usize, k: usize) -> Result<Table2Row> {
    Ok(table1_stats(n, k)?.table2_row())
}

pub fn gap_distribution(n: usize, k: usize) -> Result<GapTable> {
    Ok(class_survey(n, k, &SurveyOptions::default())?.gaps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ClassFilter {
    #[default]
    #[serde(rename = "all")]
    All,
    /// Strongly connected and aperiodic.
    #[serde(rename = "sc-aperiodic")]
    StronglyConnectedAperiodic,
}

pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomModelConfig {
    pub n: usize,
    pub k: usize,
    pub samples: u64,
    pub seed: u64,
    pub filter: ClassFilter,
    /// Attempts per sample before rejection sampling gives up.
    pub rejection_cap: u64,
}

impl RandomModelConfig {
    pub fn new(n: usize, k: usize, samples: u64, seed: u64, filter: ClassFilter) -> Self {
        RandomModelConfig {
            n,
            k,
            samples,
            seed,
            filter,
            rejection_cap: DEFAULT_REJECTION_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::Domain("random model needs n >= 1 and k >= 1".into()));
        }
        if self.n > MAX_VERTICES {
            return Err(Error::SizeLimit {
                what: "vertices",
                value: self.n,
                max: MAX_VERTICES,
            });
        }
        if self.k > MAX_DEGREE {
            return Err(Error::SizeLimit {
                what: "out-degree",
                value: self.k,
                max: MAX_DEGREE,
            });
        }
        if self.samples == 0 {
            return Err(Error::Domain("sample count must be positive".into()));
        }
        if self.rejection_cap == 0 {
            return Err(Error::Domain("rejection cap must be positive".into()));
        }
        Ok(())
    }
}

/// Sample number `index` of the run: ChaCha8 keyed by the seed, one stream
/// per sample, so the sequence does not depend on how samples are split.
pub fn sample_random_digraph(cfg: &RandomModelConfig, index: u64) -> Result<Digraph> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let (n, k) = (cfg.n, cfg.k);
    let mut flat = vec![0u8; n * k];
    for _ in 0..cfg.rejection_cap {
        for slot in flat.iter_mut() {
            *slot = rng.random_range(0..n) as u8;
        }
        let d = Digraph::from_flat_unsorted(n, k, flat.clone());
        if cfg.filter == ClassFilter::All || is_primitive(&d) {
            return Ok(d);
        }
    }
    Err(Error::RejectionCap {
        attempts: cfg.rejection_cap,
    })
}

/// Number of labeled slot tables (every vertex's out-edges in order)
/// isomorphic to `d`: `n!/|Aut(d)| * prod_v k!/prod_i m_{v,i}!`.
pub fn labeled_multiplicity(d: &Digraph) -> Result<u128> {
    let (n, k) = (d.n(), d.k());
    let scale = factorial(n)
        .checked_mul(
            factorial(k)
                .checked_pow(n as u32)
                .ok_or_else(|| overflow("(k!)^n"))?,
        )
        .ok_or_else(|| overflow("n! (k!)^n"))?;
    Ok(scale / class_weight(d)?)
}

/// `|Aut(d)| * prod_v prod_i m_{v,i}!`, which is `n! (k!)^n` divided by
/// [`labeled_multiplicity`]. Weighting uniform labeled samples by it gives
/// every isomorphism class the same total weight.
pub fn class_weight(d: &Digraph) -> Result<u128> {
    (automorphism_count(d)? as u128)
        .checked_mul(coloring_weight(d))
        .ok_or_else(|| overflow("class weight"))
}

/// Exact sums of class weights over samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "WeightsJson", into = "WeightsJson")]
pub struct ClassWeights {
    pub sum: u128,
    /// Sum over totally synchronizing samples.
    pub sync_sum: u128,
    /// `None` once the sum of squares overflows.
    pub sq_sum: Option<u128>,
}

impl ClassWeights {
    fn add(&mut self, w: u128, totally_sync: bool) -> Result<()> {
        self.sum = self
            .sum
            .checked_add(w)
            .ok_or_else(|| overflow("weight sum"))?;
        if totally_sync {
            self.sync_sum += w;
        }
        self.sq_sum = self.sq_sum.and_then(|s| s.checked_add(w.checked_mul(w)?));
        Ok(())
    }

    fn merge(&mut self, other: &ClassWeights) -> Result<()> {
        self.sum = self
            .sum
            .checked_add(other.sum)
            .ok_or_else(|| overflow("weight sum"))?;
        self.sync_sum += other.sync_sum;
        self.sq_sum = match (self.sq_sum, other.sq_sum) {
            (Some(a), Some(b)) => a.checked_add(b),
            _ => None,
        };
        Ok(())
    }

    /// Weighted fraction of totally synchronizing samples.
    pub fn estimate(&self) -> Option<f64> {
        (self.sum > 0).then(|| self.sync_sum as f64 / self.sum as f64)
    }

    /// Kish effective sample size `(sum w)^2 / sum w^2`.
    pub fn effective_samples(&self) -> Option<f64> {
        let sq = self.sq_sum?;
        (sq > 0).then(|| (self.sum as f64) * (self.sum as f64) / sq as f64)
    }
}

#[derive(Serialize, Deserialize)]
struct WeightsJson {
    sum: String,
    sync_sum: String,
    sq_sum: Option<String>,
}

impl From<ClassWeights> for WeightsJson {
    fn from(w: ClassWeights) -> Self {
        WeightsJson {
            sum: w.sum.to_string(),
            sync_sum: w.sync_sum.to_string(),
            sq_sum: w.sq_sum.map(|s| s.to_string()),
        }
    }
}

impl TryFrom<WeightsJson> for ClassWeights {
    type Error = String;

    fn try_from(j: WeightsJson) -> std::result::Result<Self, String> {
        Ok(ClassWeights {
            sum: parse_u128(&j.sum)?,
            sync_sum: parse_u128(&j.sync_sum)?,
            sq_sum: j.sq_sum.as_deref().map(parse_u128).transpose()?,
        })
    }
}

/// Mergeable partial result of a random experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomTally {
    pub stats: StatsRecord,
    /// Present when canonical forms are available for `n`.
    pub weights: Option<ClassWeights>,
}

impl RandomTally {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Ok(RandomTally {
            stats: StatsRecord::new(n, k)?,
            weights: (n <= MAX_CANON_VERTICES).then(|| ClassWeights {
                sq_sum: Some(0),
                ..Default::default()
            }),
        })
    }

    pub fn merge(&mut self, other: &RandomTally) -> Result<()> {
        self.stats.merge(&other.stats)?;
        self.weights = match (self.weights, other.weights) {
            (Some(mut a), Some(b)) => {
                a.merge(&b)?;
                Some(a)
            }
            _ => None,
        };
        Ok(())
    }
}

/// Tally over samples `range` of the run.
pub fn random_chunk(
    cfg: &RandomModelConfig,
    range: Range<u64>,
    opts: &CensusOptions,
) -> Result<RandomTally> {
    let mut tally = RandomTally::new(cfg.n, cfg.k)?;
    for i in range {
        let d = sample_random_digraph(cfg, i)?;
        let c = census_with(&d, opts)?;
        tally.stats.add(&c)?;
        if let Some(w) = tally.weights.as_mut() {
            w.add(class_weight(&d)?, c.is_totally_synchronizing())?;
        }
    }
    Ok(tally)
}

/// `3 * sqrt(p (1 - p) / samples)`.
pub fn binomial_radius(p: f64, samples: u64) -> f64 {
    3.0 * (p * (1.0 - p) / samples as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomReport {
    pub config: RandomModelConfig,
    pub stats: StatsRecord,
    pub weights: Option<ClassWeights>,
    /// Fraction of totally synchronizing labeled samples.
    pub estimate: f64,
    /// Three-sigma binomial radius around `estimate`.
    pub radius: f64,
    /// Fraction with every isomorphism class weighted equally.
    pub class_estimate: Option<f64>,
    pub effective_samples: Option<f64>,
}

impl RandomReport {
    pub fn from_tally(config: RandomModelConfig, tally: RandomTally) -> Self {
        let stats = tally.stats;
        let estimate = stats.totally_sync as f64 / stats.class_size.max(1) as f64;
        RandomReport {
            config,
            radius: binomial_radius(estimate, stats.class_size.max(1)),
            estimate,
            class_estimate: tally.weights.and_then(|w| w.estimate()),
            effective_samples: tally.weights.and_then(|w| w.effective_samples()),
            weights: tally.weights,
            stats,
        }
    }
}

/// Samples per chunk in [`random_experiment`].
pub const RANDOM_CHUNK: u64 = 1024;

pub fn random_experiment(cfg: &RandomModelConfig, opts: &CensusOptions) -> Result<RandomReport> {
    cfg.validate()?;
    let chunks: Vec<Range<u64>> = (0..cfg.samples.div_ceil(RANDOM_CHUNK))
        .map(|i| i * RANDOM_CHUNK..((i + 1) * RANDOM_CHUNK).min(cfg.samples))
        .collect();
    let parts: Vec<RandomTally> = chunks
        .into_par_iter()
        .map(|r| random_chunk(cfg, r, opts))
        .collect::<Result<_>>()?;
    let mut tally = RandomTally::new(cfg.n, cfg.k)?;
    for p in &parts {
        tally.merge(p)?;
    }
    Ok(RandomReport::from_tally(*cfg, tally))
}

fn opt_round(r: Option<Ratio<u128>>) -> String {
    r.map(|r| round_half_up(&r, REPORT_DECIMALS))
        .unwrap_or_default()
}

#[derive(Serialize)]
struct Table1Csv {
    k: usize,
    n: usize,
    class_size: u64,
    min: String,
    min_ratio: String,
    avg: String,
    avg_ratio: String,
    std_dev: String,
}

pub fn write_table1_csv<W: Write>(out: W, rows: &[StatsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in rows {
        w.serialize(Table1Csv {
            k: s.k,
            n: s.n,
            class_size: s.class_size,
            min: s.min.map(|m| m.to_string()).unwrap_or_default(),
            min_ratio: opt_round(s.min_ratio()),
            avg: opt_round(s.avg()),
            avg_ratio: opt_round(s.avg_ratio()),
            std_dev: s.std_dev_rounded(REPORT_DECIMALS).unwrap_or_default(),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Table2Csv {
    k: usize,
    n: usize,
    primitive: u64,
    totally_sync: u64,
    fraction: String,
}

pub fn write_table2_csv<W: Write>(out: W, rows: &[Table2Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(Table2Csv {
            k: r.k,
            n: r.n,
            primitive: r.primitive,
            totally_sync: r.totally_sync,
            fraction: round_half_up(&r.fraction, REPORT_DECIMALS),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GapsCsv {
    k: usize,
    n: usize,
    sync_colorings: String,
    count: u64,
}

pub fn write_gaps_csv<W: Write>(out: W, tables: &[GapTable]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in tables {
        for (v, c) in &t.histogram {
            w.serialize(GapsCsv {
                k: t.k,
                n: t.n,
                sync_colorings: v.to_string(),
                count: *c,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RandomCsv {
    k: usize,
    n: usize,
    filter: &'static str,
    samples: u64,
    seed: u64,
    min: String,
    min_ratio: String,
    avg: String,
    avg_ratio: String,
    std_dev: String,
    totally_sync: u64,
    fraction: String,
    radius: String,
    class_fraction: String,
    effective_samples: String,
}

pub fn write_random_csv<W: Write>(out: W, reports: &[RandomReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        let s = &r.stats;
        w.serialize(RandomCsv {
            k: s.k,
            n: s.n,
            filter: match r.config.filter {
                ClassFilter::All => "all",
                ClassFilter::StronglyConnectedAperiodic => "sc-aperiodic",
            },
            samples: r.config.samples,
            seed: r.config.seed,
            min: s.min.map(|m| m.to_string()).unwrap_or_default(),
            min_ratio: opt_round(s.min_ratio()),
            avg: opt_round(s.avg()),
            avg_ratio: opt_round(s.avg_ratio()),
            std_dev: s.std_dev_rounded(REPORT_DECIMALS).unwrap_or_default(),
            totally_sync: s.totally_sync,
            fraction: format!("{:.6}", r.estimate),
            radius: format!("{:.6}", r.radius),
            class_fraction: r
                .class_estimate
                .map(|e| format!("{e:.6}"))
                .unwrap_or_default(),
            effective_samples: r
                .effective_samples
                .map(|e| format!("{e:.1}"))
                .unwrap_or_default(),
        })?;
    }
    w.flush()?;
    Ok(())
}
