//! Acceptance gate: one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{naive_census, naive_is_synchronizing};
use sync_census::census::{census, AutomatonSpace, CensusMode, CensusOptions};
use sync_census::enumerate::{enumerate_primitive_digraphs, EnumerationMode};
use sync_census::experiments::{
    binomial_radius, class_survey, random_experiment, round_half_up, ClassFilter, ClassSurvey,
    RandomModelConfig, SurveyOptions,
};
use sync_census::families::{g30, FamilySpec};
use sync_census::runs::{
    run_enumeration, run_random, run_survey, RunOptions, DIGRAPHS_FILE, RANDOM_FILE, SURVEY_FILE,
};
use sync_census::sync::{is_synchronizing, shortest_reset_word};
use sync_census::Automaton;

struct Gate {
    failed: Vec<usize>,
    surveys: HashMap<(usize, usize), ClassSurvey>,
}

impl Gate {
    fn survey(&mut self, n: usize, k: usize) -> &ClassSurvey {
        self.surveys
            .entry((n, k))
            .or_insert_with(|| class_survey(n, k, &SurveyOptions::default()).expect("survey"))
    }

    fn criterion(
        &mut self,
        id: usize,
        name: &str,
        body: impl FnOnce(&mut Gate) -> Result<String, String>,
    ) {
        let started = Instant::now();
        let outcome = body(self);
        let secs = started.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                self.failed.push(id);
                ("FAIL", d)
            }
        };
        println!("criterion {id:2}: {status}  {name}: {detail} [{secs:.1} s]");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn g30_census(_: &mut Gate) -> Result<String, String> {
    for mode in [CensusMode::Full, CensusMode::SymmetryReduced] {
        let c = census(&g30(), mode).map_err(|e| e.to_string())?;
        ensure((c.sync_colorings, c.total_colorings) == (30, 64), || {
            format!("{mode:?}: {} of {}", c.sync_colorings, c.total_colorings)
        })?;
    }
    Ok("30 of 64 colorings synchronize in both census modes".into())
}

fn construction_ratios(_: &mut Gate) -> Result<String, String> {
    let mut specs = Vec::new();
    specs.extend((3..=10).map(|n| FamilySpec::Cerny { n }));
    for n in 4..=8 {
        for k in 2..=4 {
            specs.push(FamilySpec::Gnk { n, k });
        }
    }
    for d in 1..=3 {
        for n in 3 * d..=3 * d + 4 {
            for k in 2..=3 {
                specs.push(FamilySpec::Hdnk { d, n, k });
            }
        }
    }
    for spec in &specs {
        let r = spec
            .self_check(&CensusOptions::default())
            .map_err(|e| format!("{spec}: {e}"))?;
        ensure(r.passed, || {
            format!("{spec}: ratio {} expected {}", r.census.ratio, r.expected)
        })?;
    }
    Ok(format!(
        "{} family members match their closed-form ratios exactly",
        specs.len()
    ))
}

const CLASS_COUNTS: [(usize, usize, u64, u64); 13] = [
    (2, 2, 2, 1),
    (2, 3, 12, 6),
    (2, 4, 100, 66),
    (2, 5, 1220, 890),
    (2, 6, 19064, 14973),
    (2, 7, 361157, 296303),
    (3, 2, 5, 3),
    (3, 3, 85, 63),
    (3, 4, 3148, 2672),
    (4, 2, 9, 6),
    (4, 3, 357, 302),
    (5, 2, 14, 10),
    (5, 3, 1102, 990),
];

fn class_counts(g: &mut Gate) -> Result<String, String> {
    for (k, n, primitive, totally) in CLASS_COUNTS {
        let s = &g.survey(n, k).stats;
        ensure(
            (s.class_size, s.totally_sync) == (primitive, totally),
            || {
                format!(
                    "k={k} n={n}: {}/{}, expected {primitive}/{totally}",
                    s.class_size, s.totally_sync
                )
            },
        )?;
    }
    Ok(format!(
        "{} (k, n) rows of primitive / totally synchronizing counts match",
        CLASS_COUNTS.len()
    ))
}

/// (k, n, min, min ratio, avg, std dev) with 3-decimal strings.
type StatsRow = (
    usize,
    usize,
    u128,
    Option<&'static str>,
    &'static str,
    &'static str,
);

const CLASS_STATS: [StatsRow; 9] = [
    (2, 2, 2, None, "3.000", "1.000"),
    (2, 3, 4, None, "6.833", "1.280"),
    (2, 4, 8, None, "14.640", "2.243"),
    (2, 5, 16, None, "30.987", "2.146"),
    (2, 6, 30, Some("0.469"), "63.139", "2.381"),
    (3, 2, 24, None, "31.200", "5.879"),
    (3, 3, 144, None, "208.800", "14.163"),
    (4, 2, 432, None, "533.333", "61.738"),
    (5, 2, 11520, None, "13782.857", "1048.941"),
];

fn class_statistics(g: &mut Gate) -> Result<String, String> {
    for (k, n, min, min_ratio, avg, std) in CLASS_STATS {
        let s = &g.survey(n, k).stats;
        let got_avg = round_half_up(&s.avg().unwrap(), 3);
        let got_std = s.std_dev_rounded(3).unwrap();
        let got_ratio = round_half_up(&s.min_ratio().unwrap(), 3);
        ensure(
            s.min == Some(min)
                && got_avg == avg
                && got_std == std
                && min_ratio.is_none_or(|r| r == got_ratio),
            || {
                format!(
                    "k={k} n={n}: min {:?} ratio {got_ratio} avg {got_avg} std {got_std}",
                    s.min
                )
            },
        )?;
    }
    Ok(format!(
        "{} rows of min / avg / population std dev match to 3 decimals",
        CLASS_STATS.len()
    ))
}

fn gap_tables(g: &mut Gate) -> Result<String, String> {
    let mut notes = Vec::new();
    for (n, classes, minimum) in [(6, 19064u64, 30u128), (7, 361157, 64)] {
        let t = &g.survey(n, 2).gaps;
        ensure(t.total() == classes, || {
            format!("n={n}: histogram total {}", t.total())
        })?;
        ensure(t.histogram.keys().all(|v| v % 2 == 0), || {
            format!("n={n}: odd key")
        })?;
        ensure(t.min_key() == Some(minimum), || {
            format!("n={n}: min key {:?}", t.min_key())
        })?;
        notes.push(format!(
            "n={n}: {} values, {} gaps",
            t.histogram.len(),
            t.gaps().len()
        ));
    }
    Ok(format!("k=2 histograms consistent ({})", notes.join("; ")))
}

fn sync_oracle(_: &mut Gate) -> Result<String, String> {
    let mut checked = 0u64;
    for n in 1..=5 {
        for m in enumerate_primitive_digraphs(n, 2, EnumerationMode::Seeded)
            .map_err(|e| e.to_string())?
        {
            let space = AutomatonSpace::new(&m.digraph).map_err(|e| e.to_string())?;
            for i in 0..space.len() {
                let a = space.automaton(i).unwrap();
                ensure(
                    is_synchronizing(&a) == naive_is_synchronizing(&a.table()),
                    || format!("{a:?}"),
                )?;
                checked += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100_000 {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(1..=3);
        let table: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..k).map(|_| rng.random_range(0..n)).collect())
            .collect();
        let a = Automaton::new(n, k, table.clone()).unwrap();
        let expected = naive_is_synchronizing(&table);
        let word = shortest_reset_word(&a).map_err(|e| e.to_string())?;
        ensure(
            is_synchronizing(&a) == expected && word.is_some() == expected,
            || format!("{a:?}"),
        )?;
        checked += 1;
    }
    Ok(format!(
        "{checked} automata, zero disagreements with subset BFS"
    ))
}

fn census_equivalence(_: &mut Gate) -> Result<String, String> {
    let mut checked = 0u64;
    let mut same = |rows: Vec<Vec<usize>>, d: &sync_census::Digraph| -> Result<(), String> {
        let full = census(d, CensusMode::Full).map_err(|e| e.to_string())?;
        let reduced = census(d, CensusMode::SymmetryReduced).map_err(|e| e.to_string())?;
        let (sync, total) = naive_census(&rows);
        ensure(
            full == reduced && (full.sync_colorings, full.total_colorings) == (sync, total),
            || {
                format!(
                    "{d:?}: full {} reduced {} naive {sync}",
                    full.sync_colorings, reduced.sync_colorings
                )
            },
        )?;
        checked += 1;
        Ok(())
    };
    for n in 1..=4 {
        for k in 1..=3 {
            for m in enumerate_primitive_digraphs(n, k, EnumerationMode::Seeded)
                .map_err(|e| e.to_string())?
            {
                same(m.digraph.rows(), &m.digraph)?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..2000 {
        let n = rng.random_range(1..=4);
        let k = rng.random_range(1..=3);
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..k).map(|_| rng.random_range(0..n)).collect())
            .collect();
        let d = sync_census::Digraph::from_unsorted_rows(n, k, rows.clone()).unwrap();
        same(rows, &d)?;
    }
    Ok(format!(
        "{checked} digraphs with n <= 4, k <= 3: full = symmetry-reduced = brute force"
    ))
}

fn enumeration_cross_check(_: &mut Gate) -> Result<String, String> {
    let mut classes = 0;
    for n in 1..=5 {
        for k in 1..=3 {
            let keys = |mode| -> Result<BTreeSet<_>, String> {
                Ok(enumerate_primitive_digraphs(n, k, mode)
                    .map_err(|e| e.to_string())?
                    .into_iter()
                    .map(|m| m.key)
                    .collect())
            };
            let (seeded, direct) = (
                keys(EnumerationMode::Seeded)?,
                keys(EnumerationMode::Direct)?,
            );
            ensure(seeded == direct, || {
                format!(
                    "n={n} k={k}: seeded {} direct {}",
                    seeded.len(),
                    direct.len()
                )
            })?;
            classes += seeded.len();
        }
    }
    Ok(format!(
        "seeded and direct key sets identical for n <= 5, k <= 3 ({classes} classes)"
    ))
}

fn random_calibration(g: &mut Gate) -> Result<String, String> {
    let samples = 100_000;
    let cfg = RandomModelConfig::new(6, 2, samples, 7, ClassFilter::StronglyConnectedAperiodic);
    let r = random_experiment(&cfg, &CensusOptions::default()).map_err(|e| e.to_string())?;
    let exact = g.survey(6, 2).stats.totally_sync_fraction().unwrap();
    let target = 0.785;
    let radius = binomial_radius(target, samples);
    let est = r.class_estimate.ok_or("no class-weighted estimate")?;
    let detail = format!(
        "class-weighted estimate {est:.5} vs {target} (radius {radius:.5}, exhaustive {}/{}; \
         labeled fraction {:.5}, effective samples {:.0})",
        exact.numer(),
        exact.denom(),
        r.estimate,
        r.effective_samples.unwrap_or(0.0)
    );
    ensure((est - target).abs() <= radius, || detail.clone())?;
    Ok(detail)
}

fn outputs(dir: &Path, workers: usize) -> Vec<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .unwrap();
    pool.install(|| {
        let opts = RunOptions {
            workers,
            ..Default::default()
        };
        let e = dir.join("enumerate");
        run_enumeration(&e, 5, 2, EnumerationMode::Seeded, &opts).unwrap();
        let s = dir.join("survey");
        run_survey(&s, 4, 3, EnumerationMode::Seeded, &opts).unwrap();
        let r = dir.join("random");
        let cfg = RandomModelConfig::new(6, 2, 20_000, 7, ClassFilter::StronglyConnectedAperiodic);
        run_random(&r, &cfg, &opts).unwrap();
        vec![
            fs::read(e.join(DIGRAPHS_FILE)).unwrap(),
            fs::read(s.join(SURVEY_FILE)).unwrap(),
            fs::read(r.join(RANDOM_FILE)).unwrap(),
        ]
    })
}

fn determinism(_: &mut Gate) -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let one = outputs(&dir.path().join("w1"), 1);
    let four = outputs(&dir.path().join("w4"), 4);
    let again = outputs(&dir.path().join("w1-again"), 1);
    ensure(one == four && one == again, || {
        "outputs differ between runs".into()
    })?;
    let bytes: usize = one.iter().map(Vec::len).sum();
    Ok(format!(
        "enumeration, survey and random outputs byte-identical for 1 and 4 workers ({bytes} bytes)"
    ))
}

fn main() {
    let mut gate = Gate {
        failed: Vec::new(),
        surveys: HashMap::new(),
    };
    gate.criterion(1, "G30 census", g30_census);
    gate.criterion(2, "construction ratios", construction_ratios);
    gate.criterion(3, "class counts", class_counts);
    gate.criterion(4, "class statistics", class_statistics);
    gate.criterion(5, "gap tables at desk scale", gap_tables);
    gate.criterion(6, "synchronization oracle", sync_oracle);
    gate.criterion(7, "census equivalence", census_equivalence);
    gate.criterion(8, "enumeration cross-validation", enumeration_cross_check);
    gate.criterion(9, "random-model calibration", random_calibration);
    gate.criterion(10, "determinism", determinism);
    if gate.failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failed criteria {:?}", gate.failed);
        std::process::exit(1);
    }
}
