//! `rbpbo` — file encryption and analysis tool for the RBPBO block cipher.
//!
//! Machine-readable results (summary lines, key listings, CSV, tables) go
//! to stdout; diagnostics and notes go to stderr. Exit codes: 0 success,
//! 1 usage error, 2 data error (malformed key, length or totals mismatch,
//! capacity exceeded), 3 I/O error.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rbpbo::analysis::{
    byte_histogram, chi_square, format_duration, freq_csv_text, keyspace_table, AnalysisError,
};
use rbpbo::bitcore::{block_cycle_length, transform_order, Block, IterationParams, Phase};
use rbpbo::codec::{decrypt_file_with_key, encrypt_file, CodecError};
use rbpbo::keying::{
    capacity, pack_key, parse_key, segment_block_bits, KeyError, SessionKey, SEGMENT_COUNT,
};

#[derive(Parser)]
#[command(name = "rbpbo", version, about = "RBPBO block cipher: encrypt, decrypt, and analyze")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt a file, deriving its session key from the file length and
    /// writing the 17-byte key record
    Encrypt {
        input: PathBuf,
        output: PathBuf,
        key_out: PathBuf,
        /// Phase-1 iteration count
        #[arg(long, default_value_t = 3)]
        t1: u8,
        /// Phase-2 iteration count
        #[arg(long, default_value_t = 1)]
        t2: u8,
    },
    /// Decrypt a file with its key record (file argument or --key-hex)
    Decrypt {
        input: PathBuf,
        output: PathBuf,
        key_file: Option<PathBuf>,
        /// Session key as 34 lowercase hex digits
        #[arg(long)]
        key_hex: Option<String>,
    },
    /// Show the segment layout, iteration counts, and hex form of a key
    Keyinfo {
        key_file: Option<PathBuf>,
        /// Session key as 34 lowercase hex digits
        #[arg(long)]
        key_hex: Option<String>,
    },
    /// Measure the iteration order of a block transform
    Cycle {
        /// Block size in bits (even, >= 2)
        #[arg(long)]
        n: usize,
        /// Transform phase: 1 (neighbor XOR) or 2 (pair cascade)
        #[arg(long, default_value_t = 1)]
        phase: u8,
        /// Also list the cycle-length distribution over all blocks
        /// (requires n <= 16)
        #[arg(long)]
        exhaustive: bool,
    },
    /// Byte-frequency CSV of two files plus a chi-square homogeneity
    /// verdict at the 1% level
    Stats { source: PathBuf, cipher: PathBuf },
    /// Exhaustive key-search time table for the given key widths
    Keyspace {
        /// Key widths in bits (repeatable or comma-separated);
        /// defaults to 32,56,114,128,168
        #[arg(long = "bits", value_delimiter = ',', num_args = 1..)]
        bits: Vec<u32>,
    },
}

enum CliError {
    Usage(String),
    Data(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) | CliError::Io(msg) => f.write_str(msg),
        }
    }
}

impl From<KeyError> for CliError {
    fn from(err: KeyError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(err: CodecError) -> Self {
        match err {
            CodecError::Io { .. } => CliError::Io(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(err: AnalysisError) -> Self {
        match err {
            AnalysisError::Io { .. } => CliError::Io(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encrypt {
            input,
            output,
            key_out,
            t1,
            t2,
        } => cmd_encrypt(&input, &output, &key_out, IterationParams { t1, t2 }),
        Command::Decrypt {
            input,
            output,
            key_file,
            key_hex,
        } => cmd_decrypt(&input, &output, key_file.as_deref(), key_hex.as_deref()),
        Command::Keyinfo { key_file, key_hex } => {
            cmd_keyinfo(key_file.as_deref(), key_hex.as_deref())
        }
        Command::Cycle {
            n,
            phase,
            exhaustive,
        } => cmd_cycle(n, phase, exhaustive),
        Command::Stats { source, cipher } => cmd_stats(&source, &cipher),
        Command::Keyspace { bits } => cmd_keyspace(&bits),
    }
}

fn cmd_encrypt(
    input: &Path,
    output: &Path,
    key_out: &Path,
    params: IterationParams,
) -> Result<(), CliError> {
    let summary = encrypt_file(input, key_out, output, params)?;
    println!(
        "{} {} {:.6}",
        summary.input_bytes, summary.output_bytes, summary.seconds
    );
    Ok(())
}

fn cmd_decrypt(
    input: &Path,
    output: &Path,
    key_file: Option<&Path>,
    key_hex: Option<&str>,
) -> Result<(), CliError> {
    let key = load_key(key_file, key_hex)?;
    let summary = decrypt_file_with_key(input, &key, output)?;
    println!(
        "{} {} {:.6}",
        summary.input_bytes, summary.output_bytes, summary.seconds
    );
    Ok(())
}

fn load_key(
    key_file: Option<&Path>,
    key_hex: Option<&str>,
) -> Result<SessionKey, CliError> {
    let record = match (key_file, key_hex) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "pass either a key file or --key-hex, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "a key file argument or --key-hex is required".into(),
            ))
        }
        (Some(path), None) => fs::read(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        (None, Some(digits)) => hex::decode(digits)
            .map_err(|e| CliError::Data(format!("MalformedKey: invalid hex: {e}")))?,
    };
    Ok(parse_key(&record)?)
}

fn cmd_keyinfo(
    key_file: Option<&Path>,
    key_hex: Option<&str>,
) -> Result<(), CliError> {
    let key = load_key(key_file, key_hex)?;
    for rank in 1..=SEGMENT_COUNT as u8 {
        println!(
            "{rank} {} {}",
            segment_block_bits(rank),
            key.counts[rank as usize - 1]
        );
    }
    println!("total_bits {}", key.total_bits());
    println!("t1 {}", key.params.t1);
    println!("t2 {}", key.params.t2);
    println!("key {}", hex::encode(pack_key(&key)?));
    let cap = capacity();
    println!("capacity_bytes {}", cap.max_bytes);
    eprintln!("note: {}", cap.deviation_note());
    Ok(())
}

fn cmd_cycle(n: usize, phase: u8, exhaustive: bool) -> Result<(), CliError> {
    let phase = match phase {
        1 => Phase::Bits,
        2 => Phase::Pairs,
        other => return Err(CliError::Usage(format!("--phase must be 1 or 2, got {other}"))),
    };
    if n < 2 || !n.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "--n must be an even block size of at least 2 bits, got {n}"
        )));
    }
    if exhaustive && n > 16 {
        return Err(CliError::Usage(format!(
            "--exhaustive enumerates all 2^n blocks and needs n <= 16, got {n}"
        )));
    }
    println!("order {}", transform_order(n, phase));
    if exhaustive {
        let mut distribution: BTreeMap<u64, u64> = BTreeMap::new();
        for value in 0u64..(1 << n) {
            let bits: Vec<bool> = (0..n).map(|i| (value >> (n - 1 - i)) & 1 == 1).collect();
            let len = block_cycle_length(&Block::from_bits(&bits), phase);
            *distribution.entry(len).or_insert(0) += 1;
        }
        for (len, count) in distribution {
            println!("len {len} count {count}");
        }
    }
    Ok(())
}

fn cmd_stats(source: &Path, cipher: &Path) -> Result<(), CliError> {
    let source_data =
        fs::read(source).map_err(|e| CliError::Io(format!("{}: {e}", source.display())))?;
    let cipher_data =
        fs::read(cipher).map_err(|e| CliError::Io(format!("{}: {e}", cipher.display())))?;
    let source_hist = byte_histogram(&source_data);
    let cipher_hist = byte_histogram(&cipher_data);
    let report = chi_square(&source_hist, &cipher_hist)?;
    print!("{}", freq_csv_text(&source_hist, &cipher_hist));
    eprintln!(
        "chi2={} df={} significant_1pct={}",
        report.statistic, report.df, report.significant_1pct
    );
    Ok(())
}

const DEFAULT_KEYSPACE_BITS: [u32; 5] = [32, 56, 114, 128, 168];

fn cmd_keyspace(bits: &[u32]) -> Result<(), CliError> {
    let bits = if bits.is_empty() {
        &DEFAULT_KEYSPACE_BITS[..]
    } else {
        bits
    };
    if let Some(bad) = bits.iter().find(|b| !(1..=512).contains(*b)) {
        return Err(CliError::Usage(format!(
            "--bits values must lie in 1..=512, got {bad}"
        )));
    }
    let rows = keyspace_table(bits, 1e6);
    println!("bits\talternate_keys\ttime_at_1_per_us\ttime_at_1e6_per_us");
    for row in &rows {
        println!(
            "{}\t{}\t{}\t{}",
            row.key_bits,
            row.alternate_keys,
            format_duration(row.slow_seconds),
            format_duration(row.fast_seconds)
        );
        if let Some(note) = row.note {
            eprintln!("note ({} bits): {note}", row.key_bits);
        }
    }
    Ok(())
}
