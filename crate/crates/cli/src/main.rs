use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

use phykey_core::blockcipher::{binarize, MessageMatrix};
use phykey_core::keyexchange::{self, SecretExponent};
use phykey_core::phykeygen::{ComparisonSetup, QuantizerConfig, Scheme};
use phykey_core::pipeline::{self, PipelineConfig, PipelineError};
use phykey_core::{channelsim, container, metrics, report, RngSeed, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "phykey-lab", version, about = "PHY-layer key agreement and block-matrix encryption lab")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Print progress (and the pipeline transcript) to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    /// Output file. Written to a temporary file first and renamed on success.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the Monte-Carlo commands. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the key exchange and print shares and the shared key as JSON.
    Keyexchange(KeyexchangeArgs),
    /// Encrypt a PGM image (or raw bytes) into a PHK1 container.
    Encrypt(CipherArgs),
    /// Decrypt a PHK1 container back into a PGM image (or raw bytes).
    Decrypt(CipherArgs),
    /// Monte-Carlo BER curve of M-PSK over AWGN, as CSV.
    Ber(BerArgs),
    /// Compare RSS and phase key generation, as CSV.
    Phykey(PhykeyArgs),
    /// Bit-rate CDF from a BER CSV, plus an optional cipher summary.
    Report(ReportArgs),
    /// Key exchange, both gates, encrypt, decrypt and scalability in one run.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
struct SecretArgs {
    #[arg(long)]
    modulus: BigUint,
    #[arg(long)]
    generator: BigUint,
    #[arg(long, requires = "secret_b")]
    secret_a: Option<BigUint>,
    #[arg(long, requires = "secret_a")]
    secret_b: Option<BigUint>,
    /// Draw both secrets from the seeded generator with this many bits.
    #[arg(long, conflicts_with_all = ["secret_a", "secret_b"])]
    secret_bits: Option<u32>,
}

impl SecretArgs {
    fn secrets(&self, seed: u64) -> Result<(SecretExponent, SecretExponent)> {
        match (&self.secret_a, &self.secret_b, self.secret_bits) {
            (Some(a), Some(b), _) => Ok((SecretExponent::new(a.clone()), SecretExponent::new(b.clone()))),
            (_, _, Some(bits)) => Ok((
                SecretExponent::random(bits, &mut RngSeed::new(seed, 0).rng()),
                SecretExponent::random(bits, &mut RngSeed::new(seed, 1).rng()),
            )),
            _ => bail!("give --secret-a and --secret-b, or --secret-bits"),
        }
    }
}

#[derive(Args, Debug)]
struct KeyexchangeArgs {
    #[command(flatten)]
    secrets: SecretArgs,
}

#[derive(Args, Debug)]
struct CipherArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k2: i128,
    /// Plaintext is raw bytes rather than PGM.
    #[arg(long)]
    raw: bool,
}

#[derive(Args, Debug)]
struct BerArgs {
    #[arg(long, default_value_t = 1_000_000)]
    bits: u64,
    /// Comma-separated Eb/N0 values in dB; `inf` is noiseless.
    #[arg(long, default_value = "0,2,4,6,8", allow_hyphen_values = true)]
    ebn0: String,
    #[arg(long, default_value_t = 2)]
    order: u32,
    /// Append a noiseless point.
    #[arg(long)]
    noiseless: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeChoice {
    Rss,
    Phase,
    Both,
}

#[derive(Args, Debug)]
struct PhykeyArgs {
    #[arg(long, default_value_t = 10_000)]
    probes: usize,
    /// Comma-separated SNR values in dB; `inf` is noiseless.
    #[arg(long, default_value = "0,10,20,30", allow_hyphen_values = true)]
    snr: String,
    #[arg(long, value_enum, default_value_t = SchemeChoice::Both)]
    scheme: SchemeChoice,
    #[arg(long, default_value_t = 4)]
    sectors: u32,
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    q_plus: f64,
    #[arg(long, default_value_t = -0.8, allow_negative_numbers = true)]
    q_minus: f64,
    #[arg(long, default_value_t = 250)]
    window: usize,
    #[arg(long, default_value_t = 1)]
    coherence: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    ber_csv: PathBuf,
    #[arg(long, default_value_t = 1e6)]
    symbol_rate: f64,
    /// PSK order the BER CSV was produced with.
    #[arg(long, default_value_t = 2)]
    order: u32,
    #[arg(long, requires = "cipher")]
    plain: Option<PathBuf>,
    #[arg(long, requires = "plain")]
    cipher: Option<PathBuf>,
    /// The plaintext given with --plain is raw bytes rather than PGM.
    #[arg(long)]
    raw: bool,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    raw: bool,
    #[command(flatten)]
    secrets: SecretArgs,
    /// Common secret entered at the first gate (defaults to Bob's key).
    #[arg(long)]
    common_key: Option<BigUint>,
    /// Encryption key (defaults to the shared key).
    #[arg(long)]
    k2: Option<BigUint>,
    /// Encryption key entered at the second gate (defaults to --k2).
    #[arg(long)]
    entered_k2: Option<BigUint>,
    #[arg(long)]
    cipher_out: Option<PathBuf>,
    #[arg(long)]
    decrypted_out: Option<PathBuf>,
}

/// Writes through a temporary file in the destination directory so a failed
/// run never leaves a partial output behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(value)?;
    s.push(b'\n');
    Ok(s)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?}")))
        .collect()
}

fn require_out(out: Option<&Path>, cmd: &str) -> Result<PathBuf> {
    out.map(Path::to_path_buf)
        .with_context(|| format!("{cmd} needs --out FILE"))
}

fn keyexchange_cmd(cli: &Cli, args: &KeyexchangeArgs) -> Result<()> {
    let s = &args.secrets;
    let params = keyexchange::make_params(s.modulus.clone(), s.generator.clone())?;
    let (a, b) = s.secrets(cli.seed)?;
    let share_a = keyexchange::public_share(&params, &a);
    let share_b = keyexchange::public_share(&params, &b);
    let key_a = keyexchange::shared_key(&params, &share_b, &a)?;
    let key_b = keyexchange::shared_key(&params, &share_a, &b)?;
    if key_a != key_b {
        bail!("shared keys disagree");
    }
    let out = json!({
        "n": params.modulus().to_string(),
        "g": params.generator().to_string(),
        "share_a": share_a.value().to_string(),
        "share_b": share_b.value().to_string(),
        "shared_key": key_a.value().to_string(),
        "prime_checked": params.prime_checked(),
    });
    emit(cli.out.as_deref(), &to_json(&out)?)
}

fn encrypt_cmd(cli: &Cli, args: &CipherArgs) -> Result<()> {
    let out = require_out(cli.out.as_deref(), "encrypt")?;
    let bytes = pipeline::encrypt_file(&read(&args.input)?, args.raw, args.k2)?;
    write_atomic(&out, &bytes)
}

fn decrypt_cmd(cli: &Cli, args: &CipherArgs) -> Result<()> {
    let out = require_out(cli.out.as_deref(), "decrypt")?;
    let bytes = pipeline::decrypt_file(&read(&args.input)?, args.raw, args.k2)?;
    write_atomic(&out, &bytes)
}

fn ber_cmd(cli: &Cli, args: &BerArgs) -> Result<()> {
    let mut list = parse_list(&args.ebn0)?;
    if args.noiseless {
        list.push(f64::INFINITY);
    }
    let points = channelsim::ber_curve(args.bits, &list, args.order, RngSeed::new(cli.seed, 0))?;
    if cli.verbose {
        for p in &points {
            eprintln!(
                "Eb/N0 {} dB: {} errors in {} bits (theory BPSK {})",
                p.ebn0_db,
                p.errors,
                p.bits_simulated,
                channelsim::ber_theory_bpsk(p.ebn0_db)
            );
        }
    }
    emit(cli.out.as_deref(), report::ber_csv(&points).as_bytes())
}

fn phykey_cmd(cli: &Cli, args: &PhykeyArgs) -> Result<()> {
    let schemes = match args.scheme {
        SchemeChoice::Rss => vec![Scheme::Rss],
        SchemeChoice::Phase => vec![Scheme::Phase],
        SchemeChoice::Both => vec![Scheme::Rss, Scheme::Phase],
    };
    let setup = ComparisonSetup {
        n_probes: args.probes,
        snr_list: parse_list(&args.snr)?,
        schemes,
        config: QuantizerConfig {
            q_plus: args.q_plus,
            q_minus: args.q_minus,
            window: args.window,
            sectors: args.sectors,
        },
        coherence_block: args.coherence,
        trials: args.trials,
        seed: cli.seed,
    };
    let rows = phykey_core::phykeygen::compare_schemes(&setup)?;
    if cli.verbose {
        for r in &rows {
            eprintln!("{} @ {} dB: eve kdp {}", r.scheme, r.snr_db, r.eve_kdp);
        }
    }
    emit(cli.out.as_deref(), report::phykey_csv(&rows).as_bytes())
}

fn report_cmd(cli: &Cli, args: &ReportArgs) -> Result<()> {
    let text = String::from_utf8(read(&args.ber_csv)?).context("BER CSV is not UTF-8")?;
    let points = report::parse_ber_csv(&text)?;
    let rates = metrics::bitrate_samples(&points, args.symbol_rate, args.order);
    let cdf = metrics::empirical_cdf(&rates)?;
    emit(cli.out.as_deref(), report::cdf_csv(&cdf).as_bytes())?;

    if let (Some(plain), Some(cipher)) = (&args.plain, &args.cipher) {
        let plain = pipeline::read_message(&read(plain)?, args.raw)?;
        let cipher: MessageMatrix = container::decode(&read(cipher)?)?;
        let scal = metrics::scalability_factor(&plain, &cipher)?;
        let low_bytes: Vec<u8> = cipher.padded().data().iter().map(|&v| v as u8).collect();
        let summary = json!({
            "scalability_factor": scal.factor,
            "monobit_p": metrics::monobit_p(&binarize(&low_bytes)),
            "rows": cdf.points.len(),
        });
        std::io::stdout().write_all(&to_json(&summary)?)?;
    }
    Ok(())
}

fn pipeline_cmd(cli: &Cli, args: &PipelineArgs) -> Result<()> {
    let (secret_a, secret_b) = args.secrets.secrets(cli.seed)?;
    let cfg = PipelineConfig {
        modulus: args.secrets.modulus.clone(),
        generator: args.secrets.generator.clone(),
        secret_a,
        secret_b,
        entered_common_key: args.common_key.clone(),
        k2: args.k2.clone(),
        entered_k2: args.entered_k2.clone(),
        raw: args.raw,
    };
    let input = read(&args.input)?;
    let mut transcript = Vec::new();
    let result = pipeline::run_pipeline(&cfg, &input, &mut transcript);
    if cli.verbose {
        for line in &transcript {
            eprintln!("{line}");
        }
    }
    let output = result?;
    if let Some(p) = &args.cipher_out {
        write_atomic(p, &output.ciphertext)?;
    }
    if let Some(p) = &args.decrypted_out {
        write_atomic(p, &output.decrypted)?;
    }
    emit(cli.out.as_deref(), &to_json(&output.report)?)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Keyexchange(a) => keyexchange_cmd(cli, a),
        Command::Encrypt(a) => encrypt_cmd(cli, a),
        Command::Decrypt(a) => decrypt_cmd(cli, a),
        Command::Ber(a) => ber_cmd(cli, a),
        Command::Phykey(a) => phykey_cmd(cli, a),
        Command::Report(a) => report_cmd(cli, a),
        Command::Pipeline(a) => pipeline_cmd(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(e.into()),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.downcast_ref::<PipelineError>().map_or(1, PipelineError::exit_code);
            if code == 1 {
                eprintln!("error: {e:#}");
            } else {
                eprintln!("{e}");
            }
            ExitCode::from(code as u8)
        }
    }
}
