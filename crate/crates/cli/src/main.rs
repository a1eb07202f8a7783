//! Command-line front door for the basecrypt toolkit.
//!
//! Results go to stdout, diagnostics to stderr. Exit codes: 0 on
//! success, 1 on domain errors (bad numerals, non-invertible pipelines,
//! ...), 2 on usage errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use basecrypt::alphabet::{Alphabet, BUILTIN_MAX_RADIX};
use basecrypt::baseconv::{convert, render, Message, DEFAULT_PRECISION};
use basecrypt::cracker::{self, crack_known_pair};
use basecrypt::exprlang::Expr;
use basecrypt::numeric::Budget;
use basecrypt::pipeline::file::{parse_pipeline_file_seeded, serialize_pipeline, PipelineFile};
use basecrypt::pipeline::{
    Envelope, ExecutionMode, Pipeline, DEFAULT_VERIFY_SEED, DEFAULT_VERIFY_TRIALS,
};
use basecrypt::remap::Remapping;

const FIXTURE_CIPHERTEXT: &str = include_str!("../../../fixtures/ciphertext.txt");
const FIXTURE_DECRYPT: &str = include_str!("../../../fixtures/decrypt.pipeline");
const FIXTURE_ENCRYPT: &str = include_str!("../../../fixtures/encrypt.pipeline");

#[derive(Parser)]
#[command(
    name = "basecrypt",
    version,
    about = "Exact-arithmetic base conversion, symbol remapping and invertible operator pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Mode {
    /// Thread one exact value through adjacent value-level steps.
    #[default]
    Exact,
    /// Reference semantics: render digits between every step.
    Rendered,
}

impl From<Mode> for ExecutionMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Exact => ExecutionMode::Exact,
            Mode::Rendered => ExecutionMode::Rendered,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Convert a message between alphabets through its exact value
    Convert {
        /// Source alphabet (builtin:<radix> or file:<path>)
        #[arg(long)]
        from: String,
        /// Target alphabet (builtin:<radix> or file:<path>)
        #[arg(long)]
        to: String,
        /// Fractional digits rendered in the target radix
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
        /// Inline message
        message: Option<String>,
        /// Message file, one message per line
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Evaluate a left-to-right expression with X bound to a message
    Eval {
        /// Alphabet for the expression, its literals and the message
        #[arg(long)]
        alphabet: String,
        /// Expression text, e.g. "X+33*6/4.5"
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
        message: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Substitute message glyphs under a rearranged same-radix alphabet
    Remap {
        /// Source alphabet
        #[arg(long)]
        from: String,
        /// Target arrangement (mutually exclusive with --rot)
        #[arg(long)]
        to: Option<String>,
        /// Rotate the source arrangement by this offset instead
        #[arg(long, allow_hyphen_values = true)]
        rot: Option<i64>,
        message: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Run a pipeline file forward
    Encode {
        #[arg(long)]
        pipeline: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        mode: Mode,
        /// Override the pipeline file's precision
        #[arg(long)]
        precision: Option<u32>,
        /// Seed for manual-inverse verification sampling
        #[arg(long, default_value_t = DEFAULT_VERIFY_SEED)]
        seed: u64,
        message: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Run the inversion of a pipeline file
    Decode {
        #[arg(long)]
        pipeline: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        mode: Mode,
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_VERIFY_SEED)]
        seed: u64,
        message: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Print the inversion of a pipeline file
    Invert {
        #[arg(long)]
        pipeline: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VERIFY_SEED)]
        seed: u64,
    },
    /// Apply a schedule segment-by-segment (or undo one from an envelope)
    Segment {
        #[arg(long)]
        schedule: PathBuf,
        /// Envelope file: runs the decrypt direction instead
        #[arg(long)]
        envelope: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_VERIFY_SEED)]
        seed: u64,
        message: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Exhaustively search a bounded pipeline space for a known pair
    Crack {
        /// Search-space description file
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        plain: String,
        #[arg(long)]
        plain_alphabet: String,
        #[arg(long)]
        cipher: String,
        #[arg(long)]
        cipher_alphabet: String,
        /// Only print the candidate counts, do not search
        #[arg(long)]
        cost_only: bool,
    },
    /// Show built-in alphabet rosters
    Alphabets {
        /// Print one radix instead of the overview
        #[arg(long)]
        radix: Option<u32>,
    },
    /// Replay the bundled reference fixture end to end
    Selftest,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => {}
        Err(err) => {
            if err.is::<UsageError>() {
                eprintln!("usage error: {err}");
                std::process::exit(2);
            }
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

/// Errors that are the caller's fault, reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Convert {
            from,
            to,
            precision,
            message,
            file,
        } => {
            let from = resolve_alphabet(&from)?;
            let to = resolve_alphabet(&to)?;
            for_each_message(message, file, |text| {
                let m = Message::new(text, from.clone())?;
                let (out, info) = convert(&m, &to, precision)?;
                if !info.is_terminating() {
                    eprintln!("note: expansion is {info}; output cut at precision {precision}");
                }
                println!("{}", out.text());
                Ok(())
            })
        }
        Command::Eval {
            alphabet,
            expr,
            precision,
            message,
            file,
        } => {
            let alphabet = resolve_alphabet(&alphabet)?;
            let expr = Expr::parse(&expr, &alphabet)?;
            let budget = Budget::default();
            for_each_message(message, file, |text| {
                let m = Message::new(text, alphabet.clone())?;
                let result = expr.evaluate(&m.value(), &budget)?;
                let (out, info) = render(&result, &alphabet, precision);
                if !info.is_terminating() {
                    eprintln!("note: expansion is {info}; output cut at precision {precision}");
                }
                println!("{out}");
                Ok(())
            })
        }
        Command::Remap {
            from,
            to,
            rot,
            message,
            file,
        } => {
            let source = resolve_alphabet(&from)?;
            let remapping = match (to, rot) {
                (Some(to), None) => Remapping::new(source, resolve_alphabet(&to)?)?,
                (None, Some(k)) => Remapping::rotation(source, k),
                _ => return Err(usage("pass exactly one of --to or --rot")),
            };
            for_each_message(message, file, |text| {
                println!("{}", remapping.apply_text(text)?);
                Ok(())
            })
        }
        Command::Encode {
            pipeline,
            mode,
            precision,
            seed,
            message,
            file,
        } => {
            let p = load_single_pipeline(&pipeline, seed, precision)?;
            run_pipeline(&p, mode.into(), message, file)
        }
        Command::Decode {
            pipeline,
            mode,
            precision,
            seed,
            message,
            file,
        } => {
            let p = load_single_pipeline(&pipeline, seed, precision)?.invert()?;
            run_pipeline(&p, mode.into(), message, file)
        }
        Command::Invert { pipeline, seed } => {
            let p = load_single_pipeline(&pipeline, seed, None)?.invert()?;
            print!("{}", serialize_pipeline(&p)?);
            Ok(())
        }
        Command::Segment {
            schedule,
            envelope,
            mode,
            seed,
            message,
            file,
        } => {
            let parsed = load_pipeline_file(&schedule, seed)?;
            let schedule = parsed.schedule()?;
            let budget = Budget::default();
            match (envelope, message, file) {
                (Some(envelope_path), None, None) => {
                    let text = std::fs::read_to_string(&envelope_path)
                        .with_context(|| format!("reading {}", envelope_path.display()))?;
                    let envelope = Envelope::parse(&text)?;
                    let out = schedule.run_inverse_with(&envelope, mode.into(), &budget)?;
                    println!("{}", out.text());
                    Ok(())
                }
                (None, message, file) => for_each_message(message, file, |text| {
                    let input = schedule
                        .entries()
                        .first()
                        .expect("schedules are nonempty")
                        .pipeline
                        .input_alphabet()
                        .clone();
                    let m = Message::new(text, input)?;
                    let envelope = schedule.run_with(&m, mode.into(), &budget)?;
                    print!("{}", envelope.to_text());
                    Ok(())
                }),
                _ => Err(usage("pass a message or --envelope, not both")),
            }
        }
        Command::Crack {
            space,
            plain,
            plain_alphabet,
            cipher,
            cipher_alphabet,
            cost_only,
        } => {
            let text = std::fs::read_to_string(&space)
                .with_context(|| format!("reading {}", space.display()))?;
            let space = cracker::parse_space_file(&text)?;
            if cost_only {
                println!("{}", cracker::cost_report(&space)?);
                return Ok(());
            }
            let plain = Message::new(plain, resolve_alphabet(&plain_alphabet)?)?;
            let cipher = Message::new(cipher, resolve_alphabet(&cipher_alphabet)?)?;
            let report = crack_known_pair(&plain, &cipher, &space)?;
            print!("{report}");
            Ok(())
        }
        Command::Alphabets { radix } => {
            let mut out = String::new();
            match radix {
                Some(r) => {
                    let a = Alphabet::builtin(r)?;
                    writeln!(out, "builtin:{r} {}", roster_text(&a))?;
                }
                None => {
                    for r in [2, 8, 10, 16, 36, 62, BUILTIN_MAX_RADIX] {
                        let a = Alphabet::builtin(r)?;
                        writeln!(out, "builtin:{r} {}", roster_text(&a))?;
                    }
                }
            }
            print!("{out}");
            Ok(())
        }
        Command::Selftest => selftest(),
    }
}

fn roster_text(a: &Alphabet) -> String {
    a.glyphs().iter().collect()
}

/// `builtin:<radix>` or `file:<path>` where the file's first line is the
/// roster.
fn resolve_alphabet(reference: &str) -> Result<Alphabet> {
    if let Some(radix) = reference.strip_prefix("builtin:") {
        let radix: u32 = radix
            .parse()
            .map_err(|_| usage(format!("bad radix in {reference:?}")))?;
        return Ok(Alphabet::builtin(radix)?);
    }
    if let Some(path) = reference.strip_prefix("file:") {
        let text = std::fs::read_to_string(Path::new(path))
            .with_context(|| format!("reading alphabet file {path}"))?;
        let roster = text
            .lines()
            .next()
            .ok_or_else(|| anyhow!("alphabet file {path} is empty"))?;
        return Ok(Alphabet::from_str_roster(roster)?);
    }
    Err(usage(format!(
        "alphabet reference {reference:?} must be builtin:<radix> or file:<path>"
    )))
}

/// Applies `action` to the inline message or to every line of the file.
/// Passing both is ambiguous and refused.
fn for_each_message(
    message: Option<String>,
    file: Option<PathBuf>,
    mut action: impl FnMut(&str) -> Result<()>,
) -> Result<()> {
    match (message, file) {
        (Some(_), Some(_)) => Err(usage("pass an inline message or --file, not both")),
        (None, None) => Err(usage("pass a message (inline or via --file)")),
        (Some(text), None) => action(&text),
        (None, Some(path)) => {
            let content = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            for line in content.lines() {
                action(line)?;
            }
            Ok(())
        }
    }
}

fn load_pipeline_file(path: &Path, seed: u64) -> Result<PipelineFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_pipeline_file_seeded(
        &text,
        DEFAULT_VERIFY_TRIALS,
        seed,
    )?)
}

fn load_single_pipeline(path: &Path, seed: u64, precision: Option<u32>) -> Result<Pipeline> {
    let file = load_pipeline_file(path, seed)?;
    let pipeline = file.single_pipeline()?.clone();
    Ok(match precision {
        Some(p) => Pipeline::new(
            pipeline.input_alphabet().clone(),
            p,
            pipeline.steps().to_vec(),
        )?,
        None => pipeline,
    })
}

fn run_pipeline(
    p: &Pipeline,
    mode: ExecutionMode,
    message: Option<String>,
    file: Option<PathBuf>,
) -> Result<()> {
    let budget = Budget::default();
    for_each_message(message, file, |text| {
        let m = Message::new(text, p.input_alphabet().clone())?;
        let out = p.run_with(&m, mode, &budget)?;
        println!("{}", out.text());
        Ok(())
    })
}

/// Replays the bundled worked example: decrypt the reference ciphertext,
/// print the recovered plaintext, re-encrypt and compare byte for byte.
fn selftest() -> Result<()> {
    let ciphertext = FIXTURE_CIPHERTEXT.trim();
    let decrypt = parse_pipeline_file_seeded(FIXTURE_DECRYPT, DEFAULT_VERIFY_TRIALS, 0)?
        .single_pipeline()?
        .clone();
    let encrypt = parse_pipeline_file_seeded(FIXTURE_ENCRYPT, DEFAULT_VERIFY_TRIALS, 0)?
        .single_pipeline()?
        .clone();

    if encrypt.invert()? != decrypt {
        bail!("fixture pipelines are not mutual inversions");
    }

    let cipher_message = Message::new(ciphertext, decrypt.input_alphabet().clone())?;
    let plain = decrypt.run(&cipher_message)?;
    println!("recovered plaintext: {}", plain.text());

    let re_encrypted = encrypt.run(&plain)?;
    if re_encrypted.text() != ciphertext {
        bail!(
            "re-encryption mismatch:\n  got  {}\n  want {}",
            re_encrypted.text(),
            ciphertext
        );
    }
    println!("roundtrip OK");
    Ok(())
}
