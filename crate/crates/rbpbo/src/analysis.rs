//! Evaluation instruments: byte-frequency histograms, chi-square
//! homogeneity tests, encryption timing runs, and brute-force key-search
//! estimates.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigUint;

use crate::bitcore::IterationParams;
use crate::codec::{decrypt_stream, encrypt_stream, CodecError};
use crate::keying::{derive_key, KeyError};

/// Seconds per year used for key-search time conversion.
pub const SECONDS_PER_YEAR: f64 = 3.1536e7;

/// Errors raised by the analysis tools.
#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("TotalsMismatch: source total {source_total} != cipher total {cipher_total}")]
    TotalsMismatch { source_total: u64, cipher_total: u64 },
    #[error("DegenerateInput: chi-square needs at least two used byte categories, found {used}")]
    DegenerateInput { used: u32 },
    #[error("RoundTripMismatch: decrypting {path} did not restore the source bytes")]
    RoundTripMismatch { path: PathBuf },
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AnalysisError + '_ {
    move |source| AnalysisError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Byte-value frequency counts over a buffer.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Histogram256 {
    pub counts: [u64; 256],
}

impl Histogram256 {
    /// Sum of all counts; equals the profiled length in bytes.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Tallies byte values over `data`.
pub fn byte_histogram(data: &[u8]) -> Histogram256 {
    let mut counts = [0u64; 256];
    for &b in data {
        counts[b as usize] += 1;
    }
    Histogram256 { counts }
}

/// Outcome of a chi-square homogeneity test of a ciphertext histogram
/// against its plaintext histogram.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ChiSquareReport {
    pub statistic: f64,
    /// Used categories minus one.
    pub df: u32,
    /// Categories with zero source count, excluded from the sum.
    pub skipped: u32,
    /// Whether the statistic exceeds the 1% upper-tail critical value.
    pub significant_1pct: bool,
}

/// Chi-square homogeneity statistic with the plaintext histogram as the
/// expected distribution:
/// `sum over b with source[b] > 0 of (cipher[b] - source[b])^2 / source[b]`.
///
/// Asymmetric by construction — the source histogram always supplies the
/// expected counts.
pub fn chi_square(
    source: &Histogram256,
    cipher: &Histogram256,
) -> Result<ChiSquareReport, AnalysisError> {
    let (source_total, cipher_total) = (source.total(), cipher.total());
    if source_total != cipher_total {
        return Err(AnalysisError::TotalsMismatch {
            source_total,
            cipher_total,
        });
    }
    let mut statistic = 0.0f64;
    let mut used = 0u32;
    for b in 0..256 {
        let expected = source.counts[b];
        if expected == 0 {
            continue;
        }
        used += 1;
        let diff = cipher.counts[b] as f64 - expected as f64;
        statistic += diff * diff / expected as f64;
    }
    if used < 2 {
        return Err(AnalysisError::DegenerateInput { used });
    }
    let df = used - 1;
    Ok(ChiSquareReport {
        statistic,
        df,
        skipped: 256 - used,
        significant_1pct: statistic > chi_square_critical_1pct(df),
    })
}

/// Upper-tail 1% critical values for df 1..=30.
const CRIT_1PCT_SMALL: [f64; 30] = [
    6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475, 20.090, 21.666, 23.209, 24.725, 26.217,
    27.688, 29.141, 30.578, 32.000, 33.409, 34.805, 36.191, 37.566, 38.932, 40.289, 41.638,
    42.980, 44.314, 45.642, 46.963, 48.278, 49.588, 50.892,
];

/// Chi-square upper-tail critical value at the 1% level: exact table for
/// df <= 30, Wilson-Hilferty approximation beyond (within 3 significant
/// figures through df = 255; ~310.46 at df = 255).
pub fn chi_square_critical_1pct(df: u32) -> f64 {
    assert!(df >= 1, "chi-square needs at least one degree of freedom");
    if df <= 30 {
        return CRIT_1PCT_SMALL[df as usize - 1];
    }
    const Z_99: f64 = 2.326_347_874_040_841;
    let k = df as f64;
    let t = 2.0 / (9.0 * k);
    k * (1.0 - t + Z_99 * t.sqrt()).powi(3)
}

/// CSV text of two histograms: header `byte,source_count,cipher_count`
/// followed by one line per byte value 0..=255.
pub fn freq_csv_text(source: &Histogram256, cipher: &Histogram256) -> String {
    let mut out = String::with_capacity(257 * 12);
    out.push_str("byte,source_count,cipher_count\n");
    for b in 0..256 {
        out.push_str(&format!("{},{},{}\n", b, source.counts[b], cipher.counts[b]));
    }
    out
}

/// Reads two files and renders their byte-frequency CSV (257 lines).
pub fn freq_csv(source_path: &Path, cipher_path: &Path) -> Result<String, AnalysisError> {
    let source = fs::read(source_path).map_err(io_err(source_path))?;
    let cipher = fs::read(cipher_path).map_err(io_err(cipher_path))?;
    Ok(freq_csv_text(&byte_histogram(&source), &byte_histogram(&cipher)))
}

/// One measured file in a timing run.
#[derive(Clone, PartialEq, Debug)]
pub struct TimingRow {
    pub path: PathBuf,
    pub source_bytes: u64,
    pub encrypt_seconds: f64,
    pub cipher_bytes: u64,
    pub decrypt_seconds: f64,
}

/// Result of [`timing_run`]: rows sorted by size, plus per-file failures.
#[derive(Debug, Default)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
    pub failures: Vec<(PathBuf, AnalysisError)>,
}

/// Encrypts and decrypts each file in memory, timing the pure transforms
/// (file I/O excluded) and verifying the round trip. Files are measured
/// one at a time; a failing file is recorded and the run continues.
pub fn timing_run(paths: &[PathBuf], params: IterationParams) -> TimingReport {
    let mut report = TimingReport::default();
    // Prime thread pools and code paths so the first row is not inflated.
    let warmup_key = derive_key(4096 * 8, params).expect("warmup length fits");
    let _ = encrypt_stream(&vec![0u8; 4096], &warmup_key);

    for path in paths {
        match time_one_file(path, params) {
            Ok(row) => report.rows.push(row),
            Err(err) => report.failures.push((path.clone(), err)),
        }
    }
    report.rows.sort_by_key(|row| row.source_bytes);
    report
}

fn time_one_file(path: &Path, params: IterationParams) -> Result<TimingRow, AnalysisError> {
    let data = fs::read(path).map_err(io_err(path))?;
    let key = derive_key(data.len() as u64 * 8, params)?;

    let start = Instant::now();
    let cipher = encrypt_stream(&data, &key)?;
    let encrypt_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let plain = decrypt_stream(&cipher, &key)?;
    let decrypt_seconds = start.elapsed().as_secs_f64();

    if plain != data {
        return Err(AnalysisError::RoundTripMismatch {
            path: path.to_path_buf(),
        });
    }
    Ok(TimingRow {
        path: path.to_path_buf(),
        source_bytes: data.len() as u64,
        encrypt_seconds,
        cipher_bytes: cipher.len() as u64,
        decrypt_seconds,
    })
}

/// Expected exhaustive key-search cost for one key width.
#[derive(Clone, PartialEq, Debug)]
pub struct KeyspaceRow {
    pub key_bits: u32,
    /// Exact `2^key_bits`.
    pub alternate_keys: BigUint,
    /// Expected half-keyspace time in seconds at 1 decryption per us.
    pub slow_seconds: f64,
    /// Same at the fast rate passed to [`keyspace_table`].
    pub fast_seconds: f64,
    pub note: Option<&'static str>,
}

const NOTE_114: &str = "half-keyspace time follows 2^(bits-1) us, giving ~3.29e20 years at one \
     decryption per us; tables quoting 3.33e24 years for 114 bits are inconsistent with their \
     own 128-bit row by a factor of about 2^14";

/// Builds the exhaustive-search table: exact `2^bits` key counts and
/// half-keyspace times at 1 decryption/us and at `rate_fast`
/// decryptions/us. Widths must lie in 1..=512.
pub fn keyspace_table(bit_sizes: &[u32], rate_fast: f64) -> Vec<KeyspaceRow> {
    bit_sizes
        .iter()
        .map(|&bits| {
            assert!((1..=512).contains(&bits), "key width {bits} out of range");
            let half_micros = ((bits - 1) as f64).exp2();
            KeyspaceRow {
                key_bits: bits,
                alternate_keys: BigUint::from(1u8) << bits,
                slow_seconds: half_micros / 1e6,
                fast_seconds: half_micros / rate_fast / 1e6,
                note: (bits == 114).then_some(NOTE_114),
            }
        })
        .collect()
}

/// Renders a duration in the largest unit that keeps the value >= 1
/// ("35.8 minutes", "1142.5 years", "5.3951e24 years", ...).
pub fn format_duration(seconds: f64) -> String {
    let (value, unit) = if seconds >= SECONDS_PER_YEAR {
        (seconds / SECONDS_PER_YEAR, "years")
    } else if seconds >= 86_400.0 {
        (seconds / 86_400.0, "days")
    } else if seconds >= 3_600.0 {
        (seconds / 3_600.0, "hours")
    } else if seconds >= 60.0 {
        (seconds / 60.0, "minutes")
    } else if seconds >= 1.0 {
        (seconds, "seconds")
    } else if seconds >= 1e-3 {
        (seconds * 1e3, "ms")
    } else {
        (seconds * 1e6, "us")
    };
    if value >= 1e6 {
        format!("{value:.4e} {unit}")
    } else if value >= 10.0 {
        format!("{value:.1} {unit}")
    } else {
        format!("{value:.2} {unit}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hist(pairs: &[(u8, u64)]) -> Histogram256 {
        let mut counts = [0u64; 256];
        for &(b, c) in pairs {
            counts[b as usize] = c;
        }
        Histogram256 { counts }
    }

    #[test]
    fn byte_histogram_examples() {
        let empty = byte_histogram(&[]);
        assert_eq!(empty.total(), 0);
        assert!(empty.counts.iter().all(|&c| c == 0));

        let h = byte_histogram(&[0x41, 0x41, 0x42]);
        assert_eq!(h.counts[0x41], 2);
        assert_eq!(h.counts[0x42], 1);
        assert_eq!(h.total(), 3);
    }

    #[test]
    fn chi_square_identical_is_zero() {
        let h = hist(&[(1, 10), (2, 20), (3, 5)]);
        let report = chi_square(&h, &h).unwrap();
        assert_eq!(report.statistic, 0.0);
        assert!(!report.significant_1pct);
        assert_eq!(report.df, 2);
        assert_eq!(report.skipped, 253);
    }

    #[test]
    fn chi_square_two_category_hand_example() {
        let source = hist(&[(b'A', 2), (b'B', 2)]);
        let cipher = hist(&[(b'A', 1), (b'B', 3)]);
        let report = chi_square(&source, &cipher).unwrap();
        assert_eq!(report.statistic, 1.0);
        assert_eq!(report.df, 1);
    }

    #[test]
    fn chi_square_three_category_cross_check() {
        let source = hist(&[(0, 4), (7, 8), (200, 4)]);
        let cipher = hist(&[(0, 6), (7, 5), (200, 5)]);
        let report = chi_square(&source, &cipher).unwrap();
        // independent summation over the three categories
        let expected = (6.0f64 - 4.0).powi(2) / 4.0
            + (5.0f64 - 8.0).powi(2) / 8.0
            + (5.0f64 - 4.0).powi(2) / 4.0;
        assert!((report.statistic - expected).abs() < 1e-12);
    }

    #[test]
    fn chi_square_is_asymmetric() {
        // the source histogram supplies the expected counts
        let a = hist(&[(0, 8), (1, 2)]);
        let b = hist(&[(0, 5), (1, 5)]);
        let ab = chi_square(&a, &b).unwrap().statistic;
        let ba = chi_square(&b, &a).unwrap().statistic;
        assert!((ab - (9.0 / 8.0 + 9.0 / 2.0)).abs() < 1e-12);
        assert!((ba - (9.0 / 5.0 + 9.0 / 5.0)).abs() < 1e-12);
        assert_ne!(ab, ba);
    }

    #[test]
    fn chi_square_rejects_total_mismatch() {
        let source = hist(&[(0, 4)]);
        let cipher = hist(&[(0, 5)]);
        assert!(matches!(
            chi_square(&source, &cipher).unwrap_err(),
            AnalysisError::TotalsMismatch { source_total: 4, cipher_total: 5 }
        ));
    }

    #[test]
    fn chi_square_rejects_degenerate_input() {
        let source = hist(&[(9, 4)]);
        let cipher = hist(&[(1, 2), (2, 2)]);
        assert!(matches!(
            chi_square(&source, &cipher).unwrap_err(),
            AnalysisError::DegenerateInput { used: 1 }
        ));
    }

    #[test]
    fn critical_values_match_tables() {
        assert_eq!(chi_square_critical_1pct(1), 6.635);
        assert_eq!(chi_square_critical_1pct(30), 50.892);
        // Wilson-Hilferty region
        assert!((chi_square_critical_1pct(255) - 310.46).abs() < 0.5);
        assert!((chi_square_critical_1pct(100) - 135.81).abs() < 0.5);
        for df in 2..=300 {
            assert!(chi_square_critical_1pct(df) > chi_square_critical_1pct(df - 1));
        }
    }

    #[test]
    fn freq_csv_shape_and_sums() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        fs::write(&a, b"").unwrap();
        fs::write(&b, b"").unwrap();
        let csv = freq_csv(&a, &b).unwrap();
        assert_eq!(csv.lines().count(), 257);
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",0,0")));

        fs::write(&a, b"abcabc").unwrap();
        fs::write(&b, b"zzz!!!").unwrap();
        let csv = freq_csv(&a, &b).unwrap();
        let (mut sum_src, mut sum_cip) = (0u64, 0u64);
        for line in csv.lines().skip(1) {
            let mut cols = line.split(',');
            cols.next();
            sum_src += cols.next().unwrap().parse::<u64>().unwrap();
            sum_cip += cols.next().unwrap().parse::<u64>().unwrap();
        }
        assert_eq!(sum_src, 6);
        assert_eq!(sum_cip, 6);
    }

    #[test]
    fn timing_run_measures_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut paths = Vec::new();
        for (name, len) in [("big", 40_000usize), ("small", 5_000), ("mid", 20_000)] {
            let mut buf = vec![0u8; len];
            rng.fill_bytes(&mut buf);
            let path = dir.path().join(name);
            fs::write(&path, &buf).unwrap();
            paths.push(path);
        }
        let report = timing_run(&paths, IterationParams::default());
        assert!(report.failures.is_empty());
        let sizes: Vec<u64> = report.rows.iter().map(|r| r.source_bytes).collect();
        assert_eq!(sizes, vec![5_000, 20_000, 40_000]);
        for row in &report.rows {
            assert_eq!(row.cipher_bytes, row.source_bytes);
            assert!(row.encrypt_seconds >= 0.0);
            assert!(row.decrypt_seconds >= 0.0);
        }
    }

    #[test]
    fn timing_run_continues_past_failures() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good");
        fs::write(&good, b"eight by").unwrap();
        let missing = dir.path().join("missing");
        let report = timing_run(&[missing.clone(), good], IterationParams::default());
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].0, missing);
    }

    #[test]
    fn keyspace_table_reference_rows() {
        let rows = keyspace_table(&[32, 56, 114, 128, 168], 1e6);

        let minutes = rows[0].slow_seconds / 60.0;
        assert!((minutes - 35.8).abs() / 35.8 < 0.01);
        assert!((rows[0].fast_seconds * 1e3 - 2.15).abs() < 0.01);

        let years_56 = rows[1].slow_seconds / SECONDS_PER_YEAR;
        assert!((years_56 - 1142.0).abs() / 1142.0 < 0.01);

        let years_114 = rows[2].slow_seconds / SECONDS_PER_YEAR;
        assert!((years_114 - 3.293e20).abs() / 3.293e20 < 0.01);
        assert!(rows[2].note.is_some());

        let years_128 = rows[3].slow_seconds / SECONDS_PER_YEAR;
        assert!((years_128 - 5.4e24).abs() / 5.4e24 < 0.02);

        assert_eq!(rows[1].alternate_keys, BigUint::from(1u8) << 56);
        assert_eq!(
            rows[4].alternate_keys.to_string().len(),
            51 // 2^168 has 51 decimal digits
        );
        assert!(rows.iter().filter(|r| r.key_bits != 114).all(|r| r.note.is_none()));
    }

    #[test]
    fn format_duration_units() {
        assert_eq!(format_duration(2u64.pow(31) as f64 / 1e6), "35.8 minutes");
        let half_56_bit_seconds = 2u64.pow(55) as f64 / 1e6;
        assert_eq!(format_duration(half_56_bit_seconds), "1142.5 years");
        assert_eq!(format_duration(0.00214748), "2.15 ms");
        assert!(format_duration(5.3951e24 * SECONDS_PER_YEAR).starts_with("5.395"));
        assert!(format_duration(5e-6).ends_with("us"));
    }
}
