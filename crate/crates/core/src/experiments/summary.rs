use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Half-open latency bucket `[lo_ms, hi_ms)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub lo_ms: u64,
    pub hi_ms: u64,
    pub count: usize,
}

/// Bucket width shared by every campaign histogram.
pub const BUCKET_MS: u64 = 50;

/// Aggregate statistics of one measurement campaign.
///
/// Latency figures cover only the `completed` runs; `failed` counts runs that
/// ended without a result (a blocked cluster, or time running out) and sit
/// outside every other statistic. An all-failed campaign reports zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub iterations: usize,
    /// Runs that produced a measurable completion time.
    pub completed: usize,
    /// Runs excluded from the latency statistics.
    pub failed: usize,
    pub mean_ms: f64,
    pub min_ms: u64,
    pub max_ms: u64,
    /// Nearest-rank 90th percentile of the completed times.
    pub p90_ms: u64,
    /// Fraction of completed runs where two or more nodes campaigned in the
    /// round that produced the result. Zero for single-node campaigns.
    pub split_vote_fraction: f64,
    /// Fraction of completed runs finishing within 100 ms.
    pub within_100ms_fraction: f64,
    /// Contiguous 50 ms buckets from zero through the slowest completed run;
    /// counts sum to `completed`.
    pub histogram: Vec<HistogramBucket>,
}

impl CampaignSummary {
    /// Summarize raw completion times.
    ///
    /// `times` holds one entry per completed run, in any order; `split_votes`
    /// counts the completed runs that saw competing candidacies.
    pub fn from_times(
        iterations: usize,
        failed: usize,
        mut times: Vec<u64>,
        split_votes: usize,
    ) -> CampaignSummary {
        assert_eq!(
            times.len() + failed,
            iterations,
            "every iteration is either completed or failed"
        );
        assert!(split_votes <= times.len());
        times.sort_unstable();
        let completed = times.len();
        if completed == 0 {
            return CampaignSummary {
                iterations,
                completed,
                failed,
                mean_ms: 0.0,
                min_ms: 0,
                max_ms: 0,
                p90_ms: 0,
                split_vote_fraction: 0.0,
                within_100ms_fraction: 0.0,
                histogram: Vec::new(),
            };
        }
        let sum: u128 = times.iter().map(|&t| t as u128).sum();
        let max_ms = *times.last().unwrap();
        // Nearest-rank percentile: the smallest value with at least 90% of
        // the sample at or below it.
        let rank = (completed * 9).div_ceil(10);
        let p90_ms = times[rank - 1];
        let within = times.partition_point(|&t| t <= 100);

        let buckets = (max_ms / BUCKET_MS + 1) as usize;
        let mut histogram: Vec<HistogramBucket> = (0..buckets as u64)
            .map(|k| HistogramBucket {
                lo_ms: k * BUCKET_MS,
                hi_ms: (k + 1) * BUCKET_MS,
                count: 0,
            })
            .collect();
        for &t in &times {
            histogram[(t / BUCKET_MS) as usize].count += 1;
        }

        CampaignSummary {
            iterations,
            completed,
            failed,
            mean_ms: sum as f64 / completed as f64,
            min_ms: times[0],
            max_ms,
            p90_ms,
            split_vote_fraction: split_votes as f64 / completed as f64,
            within_100ms_fraction: within as f64 / completed as f64,
            histogram,
        }
    }
}

/// A file emission failure, carrying the path that refused.
#[derive(Debug, thiserror::Error)]
#[error("writing {}: {source}", path.display())]
pub struct EmitError {
    path: PathBuf,
    #[source]
    source: io::Error,
}

impl EmitError {
    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn emit(path: &Path, body: String) -> Result<(), EmitError> {
    let wrap = |source| EmitError {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(wrap)?);
    out.write_all(body.as_bytes()).map_err(wrap)?;
    out.flush().map_err(wrap)
}

/// Render the summary as CSV: one bucket per row, then the scalar statistics
/// as `# key,value` footer lines. Re-emitting a summary is byte-identical.
pub fn csv_string(summary: &CampaignSummary) -> String {
    let mut s = String::from("bucket_lo_ms,bucket_hi_ms,count\n");
    for b in &summary.histogram {
        s.push_str(&format!("{},{},{}\n", b.lo_ms, b.hi_ms, b.count));
    }
    s.push_str(&format!("# iterations,{}\n", summary.iterations));
    s.push_str(&format!("# completed,{}\n", summary.completed));
    s.push_str(&format!("# failed,{}\n", summary.failed));
    s.push_str(&format!("# mean_ms,{:.6}\n", summary.mean_ms));
    s.push_str(&format!("# min_ms,{}\n", summary.min_ms));
    s.push_str(&format!("# max_ms,{}\n", summary.max_ms));
    s.push_str(&format!("# p90_ms,{}\n", summary.p90_ms));
    s.push_str(&format!(
        "# split_vote_fraction,{:.6}\n",
        summary.split_vote_fraction
    ));
    s.push_str(&format!(
        "# within_100ms_fraction,{:.6}\n",
        summary.within_100ms_fraction
    ));
    s
}

pub fn emit_csv(summary: &CampaignSummary, path: &Path) -> Result<(), EmitError> {
    emit(path, csv_string(summary))
}

/// Render the summary as a terminal-width bar chart over its buckets, widest
/// bar 60 columns, followed by the scalar statistics.
pub fn histogram_string(summary: &CampaignSummary) -> String {
    const WIDTH: usize = 60;
    let mut s = format!(
        "completion time, {} ms buckets ({} completed, {} failed)\n",
        BUCKET_MS, summary.completed, summary.failed
    );
    let peak = summary
        .histogram
        .iter()
        .map(|b| b.count)
        .max()
        .unwrap_or(0);
    for b in &summary.histogram {
        let bar = if b.count == 0 || peak == 0 {
            0
        } else {
            // Scale to the peak, but never erase a non-empty bucket.
            (b.count * WIDTH).div_ceil(peak)
        };
        s.push_str(&format!(
            "[{:>6}, {:>6}) {:<width$} {}\n",
            b.lo_ms,
            b.hi_ms,
            "#".repeat(bar),
            b.count,
            width = WIDTH,
        ));
    }
    s.push_str(&format!(
        "mean {:.2} ms  min {} ms  p90 {} ms  max {} ms\n",
        summary.mean_ms, summary.min_ms, summary.p90_ms, summary.max_ms
    ));
    s.push_str(&format!(
        "split votes {:.2}%  within 100 ms {:.2}%\n",
        summary.split_vote_fraction * 100.0,
        summary.within_100ms_fraction * 100.0
    ));
    s
}

pub fn emit_histogram(summary: &CampaignSummary, path: &Path) -> Result<(), EmitError> {
    emit(path, histogram_string(summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CampaignSummary {
        CampaignSummary::from_times(10, 2, vec![64, 99, 100, 101, 130, 180, 210, 851], 3)
    }

    #[test]
    fn scalar_statistics_match_hand_computation() {
        let s = sample();
        assert_eq!(s.iterations, 10);
        assert_eq!(s.completed, 8);
        assert_eq!(s.failed, 2);
        assert_eq!(s.min_ms, 64);
        assert_eq!(s.max_ms, 851);
        // mean of the eight times = 1735 / 8
        assert!((s.mean_ms - 216.875).abs() < 1e-12);
        // ceil(0.9 * 8) = 8th smallest
        assert_eq!(s.p90_ms, 851);
        assert_eq!(s.split_vote_fraction, 3.0 / 8.0);
        // 64, 99, 100 land at or under 100 ms
        assert_eq!(s.within_100ms_fraction, 3.0 / 8.0);
    }

    #[test]
    fn nearest_rank_p90_on_a_decile_grid() {
        let s = CampaignSummary::from_times(10, 0, (1..=10).collect(), 0);
        assert_eq!(s.p90_ms, 9);
        let s = CampaignSummary::from_times(1, 0, vec![7], 0);
        assert_eq!(s.p90_ms, 7);
    }

    #[test]
    fn histogram_is_contiguous_and_conserves_counts() {
        let s = sample();
        let total: usize = s.histogram.iter().map(|b| b.count).sum();
        assert_eq!(total, s.completed);
        assert_eq!(s.histogram.len(), (851 / 50 + 1) as usize);
        for (k, b) in s.histogram.iter().enumerate() {
            assert_eq!(b.lo_ms, k as u64 * 50);
            assert_eq!(b.hi_ms, (k as u64 + 1) * 50);
        }
        // 64 and 99 share [50, 100); 100, 101 and 130 share [100, 150).
        assert_eq!(s.histogram[1].count, 2);
        assert_eq!(s.histogram[2].count, 3);
        assert_eq!(s.histogram[17].count, 1);
    }

    #[test]
    fn empty_campaigns_summarize_to_zeros() {
        let s = CampaignSummary::from_times(5, 5, Vec::new(), 0);
        assert_eq!(s.completed, 0);
        assert_eq!(s.mean_ms, 0.0);
        assert_eq!((s.min_ms, s.max_ms, s.p90_ms), (0, 0, 0));
        assert!(s.histogram.is_empty());
        let csv = csv_string(&s);
        assert!(csv.starts_with("bucket_lo_ms,bucket_hi_ms,count\n# iterations,5\n"));
        assert!(csv.contains("# completed,0\n"));
        assert!(csv.contains("# mean_ms,0.000000\n"));
    }

    #[test]
    fn csv_layout_is_pinned() {
        let s = CampaignSummary::from_times(3, 1, vec![10, 120], 1);
        assert_eq!(
            csv_string(&s),
            "bucket_lo_ms,bucket_hi_ms,count\n\
             0,50,1\n\
             50,100,0\n\
             100,150,1\n\
             # iterations,3\n\
             # completed,2\n\
             # failed,1\n\
             # mean_ms,65.000000\n\
             # min_ms,10\n\
             # max_ms,120\n\
             # p90_ms,120\n\
             # split_vote_fraction,0.500000\n\
             # within_100ms_fraction,0.500000\n"
        );
    }

    #[test]
    fn emission_is_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        emit_csv(&sample(), &a).unwrap();
        emit_csv(&sample(), &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let ha = dir.path().join("a.txt");
        let hb = dir.path().join("b.txt");
        emit_histogram(&sample(), &ha).unwrap();
        emit_histogram(&sample(), &hb).unwrap();
        assert_eq!(std::fs::read(&ha).unwrap(), std::fs::read(&hb).unwrap());
    }

    #[test]
    fn histogram_text_shows_scaled_bars_and_stats() {
        let text = histogram_string(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "completion time, 50 ms buckets (8 completed, 2 failed)"
        );
        // Peak bucket ([100, 150), 3 runs) gets the full 60 columns.
        assert!(lines[3].starts_with("[   100,    150) "));
        assert!(lines[3].contains(&"#".repeat(60)));
        assert!(lines[3].trim_end().ends_with('3'));
        // Non-empty buckets keep a visible bar even far below the peak.
        assert!(lines[2].contains("# "));
        assert!(text.contains("mean 216.88 ms  min 64 ms  p90 851 ms  max 851 ms"));
        assert!(text.contains("split votes 37.50%  within 100 ms 37.50%"));
    }

    #[test]
    fn unwritable_paths_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("out.csv");
        let err = emit_csv(&sample(), &path).unwrap_err();
        assert!(err.to_string().contains("missing"));
        assert_eq!(err.path(), path.as_path());
    }
}
