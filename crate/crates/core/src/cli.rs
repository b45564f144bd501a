//! The `csfe` command line.
//!
//! Reads one utterance per line from a file or stdin and writes one
//! serialized record group per line. Failed lines are reported on stderr as
//! `line N: byte OFF: message` and the rest are still processed.
//!
//! Exit codes: 0 success, 1 some line failed, 2 usage or resource error.

use std::ffi::OsString;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use crate::embedding::{EmbeddingTables, LayerDims};
use crate::encoder::{Encoder, EncoderOptions};
use crate::resources::load_resources;
use crate::schema::{Strictness, SystemConfig};
use crate::serialize::{serialize, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_LINE_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Jsonl,
    Tsv,
    Bin,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Format {
        match f {
            OutputFormat::Jsonl => Format::Jsonl,
            OutputFormat::Tsv => Format::Tsv,
            OutputFormat::Bin => Format::Bin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    /// Index matrices.
    Frames,
    /// The symbol table manifest for the configuration.
    Symbols,
    /// Seeded embedding matrices.
    Embeddings,
}

fn parse_preset(name: &str) -> Result<SystemConfig, String> {
    SystemConfig::PRESETS
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| {
            let names: Vec<_> = SystemConfig::PRESETS.iter().map(|c| c.name).collect();
            format!("expected one of {}", names.join(", "))
        })
}

fn parse_threshold(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        _ => Err("must be an integer of at least 2".into()),
    }
}

/// Mixed Mandarin/English text to linguistic feature matrices.
#[derive(Debug, Clone, Parser)]
#[command(name = "csfe", version)]
pub struct CliOptions {
    /// Directory holding the lexicon and mapping tables.
    #[arg(long = "resources", default_value = "resources")]
    pub resources_dir: PathBuf,
    /// System preset: PE, IE, PTE, ITE, ITE-B, ITE-BW, ITE-BS or ITE-BWS.
    #[arg(long = "config", default_value = "ITE-BWS", value_parser = parse_preset)]
    pub config: SystemConfig,
    #[arg(long = "format", value_enum, default_value = "jsonl")]
    pub output_format: OutputFormat,
    #[arg(long, value_enum, default_value = "frames")]
    pub emit: Emit,
    /// Seed for the embedding tables.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Characters per prosodic phrase before a PPH is forced.
    #[arg(long, default_value = "7", value_parser = parse_threshold)]
    pub pph_threshold: usize,
    /// Fail on symbols missing from the tables instead of mapping them to <unk>.
    #[arg(long)]
    pub strict: bool,
    /// Input file; stdin when absent.
    pub input: Option<PathBuf>,
}

/// Parses `args` and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let options = match CliOptions::try_parse_from(args) {
        Ok(o) => o,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    match &options.input {
        Some(path) => match std::fs::File::open(path) {
            Ok(file) => run(&options, file, stdout.lock(), stderr.lock()),
            Err(e) => {
                let _ = writeln!(stderr.lock(), "csfe: {}: {e}", path.display());
                EXIT_USAGE
            }
        },
        None => run(&options, io::stdin().lock(), stdout.lock(), stderr.lock()),
    }
}

fn embeddings_bytes(
    m: &ndarray::Array2<f32>,
    source: &str,
    config: &str,
    format: Format,
) -> Vec<u8> {
    match format {
        Format::Jsonl => {
            let header = serde_json::json!({
                "config": config,
                "text": source,
                "rows": m.nrows(),
                "cols": m.ncols(),
            });
            let mut out = header.to_string();
            out.push('\n');
            for row in m.rows() {
                out.push_str(&serde_json::Value::from(row.to_vec()).to_string());
                out.push('\n');
            }
            out.into_bytes()
        }
        Format::Tsv => {
            let mut out = format!("#config\t{config}\n#rows\t{}\t{}\n", m.nrows(), m.ncols());
            for row in m.rows() {
                let cells: Vec<String> = row.iter().map(f32::to_string).collect();
                out.push_str(&cells.join("\t"));
                out.push('\n');
            }
            out.into_bytes()
        }
        Format::Bin => {
            let mut out = b"CSEM1".to_vec();
            out.extend_from_slice(&(m.nrows() as u32).to_le_bytes());
            out.extend_from_slice(&(m.ncols() as u32).to_le_bytes());
            for v in m.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
            out
        }
    }
}

/// Runs with already parsed options.
pub fn run(
    options: &CliOptions,
    mut input: impl Read,
    mut out: impl Write,
    mut err: impl Write,
) -> i32 {
    let bundle = match load_resources(&options.resources_dir) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(err, "csfe: resources: {e}");
            return EXIT_USAGE;
        }
    };
    let encoder = Encoder::new(
        &bundle,
        EncoderOptions {
            pph_threshold: options.pph_threshold,
            strictness: if options.strict {
                Strictness::Strict
            } else {
                Strictness::Lenient
            },
            ..EncoderOptions::default()
        },
    );
    let config = options.config;
    let format = Format::from(options.output_format);

    let tables = match encoder.symbol_tables(&config) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "csfe: symbol tables: {e}");
            return EXIT_USAGE;
        }
    };
    if options.emit == Emit::Symbols {
        return match out.write_all(tables.to_manifest().as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "csfe: {e}");
                EXIT_LINE_FAILED
            }
        };
    }
    let embeddings = match options.emit {
        Emit::Embeddings => {
            match EmbeddingTables::new(&tables, &LayerDims::default(), options.seed) {
                Ok(t) => Some(t),
                Err(e) => {
                    let _ = writeln!(err, "csfe: {e}");
                    return EXIT_USAGE;
                }
            }
        }
        _ => None,
    };

    let mut raw = Vec::new();
    if let Err(e) = input.read_to_end(&mut raw) {
        let _ = writeln!(err, "csfe: reading input: {e}");
        return EXIT_USAGE;
    }
    let text = match String::from_utf8(raw) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(
                err,
                "csfe: input is not UTF-8 (byte {})",
                e.utf8_error().valid_up_to()
            );
            return EXIT_USAGE;
        }
    };
    let lines: Vec<&str> = text.lines().collect();

    let results: Vec<Result<Vec<u8>, String>> = lines
        .par_iter()
        .map(|line| {
            let matrix = encoder
                .encode_utterance(line, &config)
                .map_err(|e| e.to_string())?;
            match &embeddings {
                None => Ok(serialize(&matrix, format)),
                Some(tables) => {
                    let m = tables.assemble(&matrix).map_err(|e| e.to_string())?;
                    Ok(embeddings_bytes(&m, line, config.name, format))
                }
            }
        })
        .collect();

    let mut code = EXIT_OK;
    for (n, result) in results.into_iter().enumerate() {
        match result {
            Ok(bytes) => {
                if let Err(e) = out.write_all(&bytes) {
                    let _ = writeln!(err, "csfe: {e}");
                    return EXIT_LINE_FAILED;
                }
            }
            Err(message) => {
                let _ = writeln!(err, "line {}: {message}", n + 1);
                code = EXIT_LINE_FAILED;
            }
        }
    }
    if let Err(e) = out.flush() {
        let _ = writeln!(err, "csfe: {e}");
        return EXIT_LINE_FAILED;
    }
    code
}
