use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::metrics::mean_std;

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        Self { mean, std }
    }
}

/// Statistics across repetitions at one generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub gen: u64,
    /// Repetitions that recorded this generation.
    pub count: usize,
    pub nfe: Stat,
    pub elapsed_s: Stat,
    pub quality: Stat,
    pub diversity: Option<Stat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub reps: usize,
    pub series: Vec<AggregatePoint>,
    pub generations: Stat,
    pub nfe: Stat,
    pub elapsed_s: Stat,
    pub quality: Stat,
    pub hypervolume: Option<Stat>,
    pub throughput: Stat,
}

/// Groups history points by generation; runs of unequal length contribute where they have data.
pub fn aggregate(records: &[RunRecord]) -> AggregateStats {
    let mut by_gen: BTreeMap<u64, Vec<&super::HistoryPoint>> = BTreeMap::new();
    for r in records {
        for p in &r.series {
            by_gen.entry(p.gen).or_default().push(p);
        }
    }
    let series = by_gen
        .into_iter()
        .map(|(gen, pts)| {
            let col = |f: &dyn Fn(&super::HistoryPoint) -> f64| Stat::of(&pts.iter().map(|p| f(p)).collect::<Vec<_>>());
            let div: Option<Vec<f64>> = pts.iter().map(|p| p.diversity).collect();
            AggregatePoint {
                gen,
                count: pts.len(),
                nfe: col(&|p| p.nfe as f64),
                elapsed_s: col(&|p| p.elapsed_s),
                quality: col(&|p| p.quality),
                diversity: div.map(|d| Stat::of(&d)),
            }
        })
        .collect();
    let summary = |f: &dyn Fn(&RunRecord) -> f64| Stat::of(&records.iter().map(f).collect::<Vec<_>>());
    let hv: Option<Vec<f64>> = records.iter().map(|r| r.summary.hypervolume).collect();
    AggregateStats {
        reps: records.len(),
        series,
        generations: summary(&|r| r.summary.generations as f64),
        nfe: summary(&|r| r.summary.nfe as f64),
        elapsed_s: summary(&|r| r.summary.elapsed_s),
        quality: summary(&|r| r.summary.quality),
        hypervolume: hv.filter(|v| !v.is_empty()).map(|v| Stat::of(&v)),
        throughput: summary(&|r| r.summary.throughput),
    }
}
