use serde::{Deserialize, Serialize};

/// Summary of a sample set, in the samples' unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    /// Nearest-rank 95th percentile.
    pub p95: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Option<Summary> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 {
            s[n / 2]
        } else {
            (s[n / 2 - 1] + s[n / 2]) / 2.0
        };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Some(Summary {
            count: n,
            median,
            mean: s.iter().sum::<f64>() / n as f64,
            p95: s[rank - 1],
            max: s[n - 1],
        })
    }
}

/// Per-repetition maximum across workers. Workers without a sample at an
/// index do not contribute to it.
pub fn max_across(per_worker: &[Vec<f64>]) -> Vec<f64> {
    let reps = per_worker.iter().map(Vec::len).max().unwrap_or(0);
    (0..reps)
        .map(|i| {
            per_worker
                .iter()
                .filter_map(|w| w.get(i).copied())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}
