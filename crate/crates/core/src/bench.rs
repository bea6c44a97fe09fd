//! Throughput comparison against SHA-256.
//!
//! Only the hash computation itself is timed: buffers are generated and the
//! matrix is loaded before the clock starts.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::{Duration, Instant};

use sha2::{Digest as _, Sha256};

use crate::digest::{hash, HashParams};
use crate::error::{Error, Result};
use crate::matgen::{Seed, SplitMix64};

/// A single timed sample must last at least this long; shorter calls are
/// repeated inside the sample.
pub const MIN_SAMPLE: Duration = Duration::from_millis(2);

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub input_size: usize,
    /// Median time of one model hash.
    pub model_time: Duration,
    /// Median time of one SHA-256 hash.
    pub sha2_time: Duration,
    /// Calls per timed sample for the model and for SHA-256.
    pub model_batch: u32,
    pub sha2_batch: u32,
}

impl BenchRow {
    pub fn model_throughput(&self) -> f64 {
        self.input_size as f64 / self.model_time.as_secs_f64()
    }

    pub fn sha2_throughput(&self) -> f64 {
        self.input_size as f64 / self.sha2_time.as_secs_f64()
    }

    pub fn sha2_faster(&self) -> bool {
        self.sha2_time < self.model_time
    }
}

/// Where SHA-256 overtakes the model among the measured sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossover {
    /// SHA-256 is faster at this size and every larger one, and the model is
    /// faster at the next smaller measured size.
    At(usize),
    /// SHA-256 is faster at every measured size.
    ShaAlwaysFaster,
    /// The model is faster at the largest measured size.
    NotReached,
}

impl std::fmt::Display for Crossover {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Crossover::At(size) => write!(f, "{size} bytes ({} bits)", size * 8),
            Crossover::ShaAlwaysFaster => {
                f.write_str("none: SHA-256 faster at every measured size")
            }
            Crossover::NotReached => f.write_str("none: model faster at the largest measured size"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub m: usize,
    pub model: crate::digest::Model,
    pub rows: Vec<BenchRow>,
    pub warnings: Vec<String>,
}

impl BenchReport {
    pub fn crossover(&self) -> Crossover {
        crossover(&self.rows)
    }

    /// Model time ratios between consecutive rows.
    pub fn model_ratios(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| w[1].model_time.as_secs_f64() / w[0].model_time.as_secs_f64())
            .collect()
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "m = {}, model {}", self.m, self.model);
        let _ = writeln!(
            s,
            "{:>12} {:>12} {:>14} {:>14} {:>12} {:>12}",
            "size (B)", "size (bit)", "model (ms)", "SHA-256 (ms)", "model MB/s", "SHA MB/s"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>12} {:>12} {:>14.6} {:>14.6} {:>12.1} {:>12.1}",
                r.input_size,
                r.input_size * 8,
                r.model_time.as_secs_f64() * 1e3,
                r.sha2_time.as_secs_f64() * 1e3,
                r.model_throughput() / 1e6,
                r.sha2_throughput() / 1e6
            );
        }
        let _ = writeln!(s, "crossover: {}", self.crossover());
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "input_bytes,input_bits,model_seconds,sha256_seconds,model_bytes_per_sec,sha256_bytes_per_sec\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.9e},{:.9e},{:.6e},{:.6e}",
                r.input_size,
                r.input_size * 8,
                r.model_time.as_secs_f64(),
                r.sha2_time.as_secs_f64(),
                r.model_throughput(),
                r.sha2_throughput()
            );
        }
        s
    }
}

/// Crossover over rows sorted by increasing size.
pub fn crossover(rows: &[BenchRow]) -> Crossover {
    let Some(last) = rows.last() else {
        return Crossover::NotReached;
    };
    if !last.sha2_faster() {
        return Crossover::NotReached;
    }
    match rows.iter().rposition(|r| !r.sha2_faster()) {
        None => Crossover::ShaAlwaysFaster,
        Some(i) => Crossover::At(rows[i + 1].input_size),
    }
}

/// Median per-call time of `f`, over `reps` samples of `batch` calls each.
/// The batch doubles until one sample lasts at least [`MIN_SAMPLE`].
fn time_calls(reps: usize, mut f: impl FnMut()) -> (Duration, u32) {
    let mut batch = 1u32;
    loop {
        let start = Instant::now();
        for _ in 0..batch {
            f();
        }
        if start.elapsed() >= MIN_SAMPLE || batch >= 1 << 24 {
            break;
        }
        batch *= 2;
    }
    let mut samples: Vec<Duration> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..batch {
                f();
            }
            start.elapsed() / batch
        })
        .collect();
    samples.sort();
    (samples[samples.len() / 2], batch)
}

/// Times the model and SHA-256 on identical seeded random buffers.
pub fn run(params: &HashParams, sizes: &[usize], reps: usize, seed: Seed) -> Result<BenchReport> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no benchmark sizes given".into()));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument(
            "repetitions must be at least 1".into(),
        ));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::with_capacity(sizes.len());
    let mut warnings = Vec::new();
    for &size in &sizes {
        let buf = rng.bytes(size);
        let (model_time, model_batch) = time_calls(reps, || {
            black_box(hash(params, black_box(&buf)));
        });
        let (sha2_time, sha2_batch) = time_calls(reps, || {
            black_box(Sha256::digest(black_box(&buf)));
        });
        if model_batch > 1 || sha2_batch > 1 {
            warnings.push(format!(
                "size {size}: timer too coarse for a single call, batching {model_batch} model / {sha2_batch} SHA-256 calls per sample"
            ));
        }
        rows.push(BenchRow {
            input_size: size,
            model_time,
            sha2_time,
            model_batch,
            sha2_batch,
        });
    }
    Ok(BenchReport {
        m: params.m(),
        model: params.model(),
        rows,
        warnings,
    })
}

/// Parses a comma-separated size list. Sizes are bytes and accept binary
/// suffixes `K`, `M`, `G` (optionally followed by `iB` or `B`).
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let upper = t.to_ascii_uppercase();
            let trimmed = upper.trim_end_matches("IB").trim_end_matches('B');
            let (digits, mult) = match trimmed.chars().last() {
                Some('K') => (&trimmed[..trimmed.len() - 1], 1usize << 10),
                Some('M') => (&trimmed[..trimmed.len() - 1], 1 << 20),
                Some('G') => (&trimmed[..trimmed.len() - 1], 1 << 30),
                _ => (trimmed, 1),
            };
            digits
                .parse::<usize>()
                .ok()
                .and_then(|n| n.checked_mul(mult))
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::InvalidArgument(format!("bad size {t:?}")))
        })
        .collect::<Result<Vec<_>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Error::InvalidArgument("no benchmark sizes given".into()))
            } else {
                Ok(v)
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(size: usize, model_us: u64, sha_us: u64) -> BenchRow {
        BenchRow {
            input_size: size,
            model_time: Duration::from_micros(model_us),
            sha2_time: Duration::from_micros(sha_us),
            model_batch: 1,
            sha2_batch: 1,
        }
    }

    #[test]
    fn crossover_cases() {
        let rows = [
            row(32, 1, 2),
            row(64, 2, 3),
            row(128, 5, 4),
            row(256, 10, 6),
        ];
        assert_eq!(crossover(&rows), Crossover::At(128));
        let rows = [row(32, 3, 2), row(64, 6, 3)];
        assert_eq!(crossover(&rows), Crossover::ShaAlwaysFaster);
        let rows = [row(32, 3, 2), row(64, 1, 3)];
        assert_eq!(crossover(&rows), Crossover::NotReached);
        // a late win for the model moves the crossover past it
        let rows = [
            row(32, 1, 2),
            row(64, 5, 3),
            row(128, 3, 4),
            row(256, 10, 6),
        ];
        assert_eq!(crossover(&rows), Crossover::At(256));
    }

    #[test]
    fn size_parsing() {
        assert_eq!(
            parse_sizes("32, 64,1K,2KiB,1M").unwrap(),
            vec![32, 64, 1024, 2048, 1 << 20]
        );
        assert_eq!(parse_sizes("8kb").unwrap(), vec![8192]);
        assert!(parse_sizes("").is_err());
        assert!(parse_sizes("12x").is_err());
        assert!(parse_sizes("0").is_err());
    }

    #[test]
    fn csv_shape() {
        let report = BenchReport {
            m: 128,
            model: crate::digest::Model::Two,
            rows: vec![row(32, 1, 2)],
            warnings: vec![],
        };
        let csv = report.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("32,256,"));
        assert!(report.to_table().contains("crossover: none"));
    }
}
