//! `pcbz` command line: argument parsing and output formatting over the
//! library calls.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_sweep, BenchConfig};
use crate::container::{read_container, Container, FrameRecord, HEADER_LEN, VERSION};
use crate::error::{Error, Result};
use crate::frame::{Frame, FrameStack, LensletGeometry, PredictorSpec};
use crate::io::{read_image, read_raw_stack, write_image, write_raw_stack};
use crate::parallel::available_workers;
use crate::pipeline::{compress_stack_detailed, decompress_stack, CompressOptions, Metrics};
use crate::synth::{generate, SynthMode, SynthParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CORRUPT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pcbz", version, about = "Lossless compression for light-field microscopy frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress PGM or raw frames into a .pcbz container
    Compress(CompressArgs),
    /// Restore frames from a container
    Decompress(DecompressArgs),
    /// Print container header, predictors and block tables
    Inspect(InspectArgs),
    /// Write a synthetic light-field stack
    Gen(GenArgs),
    /// Sweep predictors over synthetic frames at several noise levels
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct Threads {
    /// Worker threads; affects speed only, never output bytes
    #[arg(long, env = "PCBZ_THREADS")]
    threads: Option<usize>,
}

impl Threads {
    fn get(&self) -> Result<usize> {
        match self.threads {
            Some(0) => Err(Error::InvalidOptions("--threads must be at least 1".into())),
            Some(n) => Ok(n),
            None => Ok(available_workers()),
        }
    }
}

#[derive(Debug, Args)]
struct CompressArgs {
    /// Input files (.pgm with one or more frames, or .raw with a .meta sidecar)
    #[arg(value_name = "INPUT", conflicts_with = "input")]
    inputs: Vec<PathBuf>,
    #[arg(short, long, value_name = "INPUT")]
    input: Vec<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    /// Lenslet pitch as WxH; required for PGM input, overrides a raw sidecar
    #[arg(long, value_parser = parse_pitch)]
    pitch: Option<LensletGeometry>,
    #[command(flatten)]
    threads: Threads,
    #[arg(long, default_value_t = crate::block_codec::DEFAULT_BLOCK_SIZE)]
    block_size: usize,
    /// `auto`, an intra id 0..=12, or `<id>,temporal`
    #[arg(long, default_value = "auto")]
    predictor: PredictorChoice,
    /// Let frames after the first use the temporal delta (default off)
    #[arg(long, value_parser = parse_on_off)]
    temporal: Option<bool>,
}

#[derive(Debug, Args)]
struct DecompressArgs {
    #[arg(value_name = "INPUT", conflicts_with = "input", required_unless_present = "input")]
    container: Option<PathBuf>,
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Output .pgm (all frames concatenated) or .raw (plus .meta sidecar)
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    threads: Threads,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(value_name = "INPUT", conflicts_with = "input", required_unless_present = "input")]
    container: Option<PathBuf>,
    #[arg(short, long)]
    input: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Output .raw (with .meta sidecar) or .pgm
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value = "smooth_lenslet")]
    modes: SynthMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_pitch, default_value = "15x15")]
    pitch: LensletGeometry,
    #[arg(long, value_parser = parse_size, default_value = "600x600")]
    size: (usize, usize),
    #[arg(long, default_value_t = 1)]
    frames: usize,
    #[arg(long, default_value_t = 10.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    photon_scale: f64,
    #[arg(long, default_value_t = 20_000.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 200.0)]
    background: f64,
    #[arg(long, default_value_t = 0.0)]
    drift: f64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "smooth_lenslet,beads")]
    modes: Vec<SynthMode>,
    #[arg(long, value_delimiter = ',', default_value = "0,50,200,800")]
    sweep_noise: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of seeds per (mode, noise) point, counting up from --seed
    #[arg(long, default_value_t = 1)]
    samples: u64,
    #[arg(long, value_parser = parse_pitch, default_value = "15x15")]
    pitch: LensletGeometry,
    #[arg(long, value_parser = parse_size, default_value = "300x300")]
    size: (usize, usize),
    #[arg(long, default_value_t = 0.0)]
    photon_scale: f64,
    #[arg(long, default_value_t = 20_000.0)]
    amplitude: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    threads: Threads,
    #[arg(long, default_value_t = crate::block_codec::DEFAULT_BLOCK_SIZE)]
    block_size: usize,
}

/// `--predictor` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorChoice {
    Auto,
    Forced(PredictorSpec),
}

impl FromStr for PredictorChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(PredictorChoice::Auto);
        }
        let (id, temporal) = match s.split_once(',') {
            Some((id, "temporal")) => (id, true),
            Some(_) => return Err(format!("expected auto, <0..12> or <0..12>,temporal; got {s:?}")),
            None => (s, false),
        };
        let id: u8 = id.parse().map_err(|_| format!("predictor id {id:?} is not a number"))?;
        PredictorSpec::new(id, temporal).map(PredictorChoice::Forced).map_err(|e| e.to_string())
    }
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w = w.parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h = h.parse().map_err(|_| format!("bad height in {s:?}"))?;
    Ok((w, h))
}

fn parse_pitch(s: &str) -> std::result::Result<LensletGeometry, String> {
    let (w, h) = parse_size(s)?;
    let conv = |v: usize| u16::try_from(v).map_err(|_| format!("pitch {v} too large"));
    LensletGeometry::new(conv(w)?, conv(h)?).map_err(|e| e.to_string())
}

fn parse_on_off(s: &str) -> std::result::Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(format!("expected on or off, got {s:?}")),
    }
}

fn is_raw(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("raw"))
}

fn is_pgm(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("pnm"))
}

/// Loads inputs in order as one stack.
pub fn load_stack(inputs: &[PathBuf], pitch: Option<LensletGeometry>) -> Result<FrameStack> {
    if inputs.is_empty() {
        return Err(Error::InvalidOptions("no input files".into()));
    }
    let mut frames: Vec<Frame> = Vec::new();
    for path in inputs {
        let stack = if is_raw(path) {
            let s = read_raw_stack(path)?;
            match pitch {
                Some(g) => FrameStack::new(s.into_frames().into_iter().map(|f| f.with_geometry(g)).collect())?,
                None => s,
            }
        } else if is_pgm(path) {
            let g = pitch.ok_or_else(|| {
                Error::InvalidOptions(format!("{} carries no lenslet geometry; pass --pitch WxH", path.display()))
            })?;
            read_image(path, g)?
        } else {
            return Err(Error::UnsupportedFormat(format!("{}: expected a .pgm or .raw input", path.display())));
        };
        frames.extend(stack.into_frames());
    }
    FrameStack::new(frames)
}

pub fn save_stack(path: &Path, stack: &FrameStack) -> Result<()> {
    if is_raw(path) {
        write_raw_stack(path, stack)
    } else {
        write_image(path, stack)
    }
}

/// One line per fact, `key value...`, stable for scripts.
pub fn format_inspect(container: &Container<'_>, file_len: usize) -> String {
    let h = &container.header;
    let mut s = String::new();
    let _ = writeln!(s, "magic PCBZ");
    let _ = writeln!(s, "version {VERSION}");
    let _ = writeln!(s, "flags 0x{:02X}", h.flags);
    let _ = writeln!(s, "bit_depth 16");
    let _ = writeln!(s, "width {}", h.width);
    let _ = writeln!(s, "height {}", h.height);
    let _ = writeln!(s, "frames {}", h.frame_count);
    let _ = writeln!(s, "pitch {}x{}", h.pitch_x, h.pitch_y);
    let _ = writeln!(s, "block_size {}", h.block_size);
    let overhead = HEADER_LEN + container.records.iter().map(FrameRecord::encoded_len).sum::<usize>();
    let _ = writeln!(s, "overhead_bytes {overhead}");
    let _ = writeln!(s, "container_bytes {file_len}");
    for (f, r) in container.records.iter().enumerate() {
        let _ = writeln!(
            s,
            "frame {f} predictor 0x{:02X} {} blocks {} bytes {}",
            r.predictor.encode(),
            r.predictor.name(),
            r.block_sizes.len(),
            r.payload_len()
        );
        for (b, size) in r.block_sizes.iter().enumerate() {
            let _ = writeln!(s, "frame {f} block {b} bytes {size}");
        }
    }
    s
}

pub fn format_metrics(m: &Metrics, selection_ms: f64) -> String {
    format!(
        "input_bytes={} container_bytes={} ratio={:.4} bits_per_dim={:.4} selection_ms={:.1} compress_ms={:.1}",
        m.uncompressed_bytes,
        m.container_bytes,
        m.compression_ratio,
        m.bits_per_dim,
        selection_ms,
        m.compress_time.as_secs_f64() * 1e3
    )
}

fn exit_code(e: &Error) -> i32 {
    match e {
        _ if e.is_corruption() => EXIT_CORRUPT,
        Error::InvalidOptions(_) | Error::InvalidSpec(_) | Error::InvalidCandidate(_) => EXIT_USAGE,
        _ => EXIT_IO,
    }
}

/// Runs the CLI with `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "pcbz: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Compress(a) => compress(a, stdout),
        Command::Decompress(a) => {
            let path = a.container.or(a.input).expect("clap requires an input");
            let stack = decompress_stack(&std::fs::read(&path)?, a.threads.get()?)?;
            save_stack(&a.output, &stack)?;
            writeln!(stdout, "frames={} width={} height={}", stack.len(), stack.width(), stack.height())?;
            Ok(())
        }
        Command::Inspect(a) => {
            let path = a.container.or(a.input).expect("clap requires an input");
            let data = std::fs::read(&path)?;
            let container = read_container(&data)?;
            stdout.write_all(format_inspect(&container, data.len()).as_bytes())?;
            Ok(())
        }
        Command::Gen(a) => {
            let params = SynthParams {
                width: a.size.0,
                height: a.size.1,
                pitch_x: a.pitch.pitch_x(),
                pitch_y: a.pitch.pitch_y(),
                mode: a.modes,
                background: a.background,
                signal_amplitude: a.amplitude,
                noise_sigma: a.noise_sigma,
                photon_scale: a.photon_scale,
                frames: a.frames,
                drift: a.drift,
                seed: a.seed,
            };
            let stack = generate(&params)?;
            save_stack(&a.output, &stack)?;
            writeln!(
                stdout,
                "wrote {} frame(s) {}x{} pitch {}",
                stack.len(),
                stack.width(),
                stack.height(),
                stack.geometry()
            )?;
            Ok(())
        }
        Command::Bench(a) => bench(a, stdout),
    }
}

fn compress(a: CompressArgs, stdout: &mut dyn Write) -> Result<()> {
    let inputs = if a.inputs.is_empty() { a.input } else { a.inputs };
    let stack = load_stack(&inputs, a.pitch)?;
    let mut opts = CompressOptions {
        block_size: a.block_size,
        workers: a.threads.get()?,
        temporal: a.temporal.unwrap_or(false),
        ..CompressOptions::default()
    };
    if let PredictorChoice::Forced(spec) = a.predictor {
        if spec.temporal() && a.temporal == Some(false) {
            return Err(Error::InvalidOptions("--predictor ...,temporal conflicts with --temporal off".into()));
        }
        opts.forced = Some(spec);
        opts.temporal |= spec.temporal();
    }
    let outcome = compress_stack_detailed(&stack, &opts)?;
    std::fs::write(&a.output, &outcome.container)?;
    let m = Metrics::new(&stack, outcome.container.len() as u64, outcome.total_time, Default::default());
    writeln!(stdout, "frames={} {}", stack.len(), format_metrics(&m, outcome.selection_time.as_secs_f64() * 1e3))?;
    Ok(())
}

fn bench(a: BenchArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = BenchConfig {
        modes: a.modes,
        noise_levels: a.sweep_noise,
        seeds: (a.seed..a.seed + a.samples.max(1)).collect(),
        base: SynthParams {
            width: a.size.0,
            height: a.size.1,
            pitch_x: a.pitch.pitch_x(),
            pitch_y: a.pitch.pitch_y(),
            signal_amplitude: a.amplitude,
            photon_scale: a.photon_scale,
            ..SynthParams::default()
        },
        options: CompressOptions { block_size: a.block_size, workers: a.threads.get()?, ..CompressOptions::default() },
        ..BenchConfig::default()
    };
    let report = run_sweep(&config)?;
    match &a.csv {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            report.write_csv(&mut f)?;
            f.flush()?;
            for s in &report.samples {
                writeln!(
                    stdout,
                    "sample {} mode {} noise {} selected 0x{:02X} {:.4} bits/dim best 0x{:02X} {:.4} bits/dim improvement_over_identity {:.4}",
                    s.sample_id,
                    s.mode,
                    s.noise_sigma,
                    s.selected.encode(),
                    s.selected_bits_per_dim,
                    s.best.encode(),
                    s.best_bits_per_dim,
                    s.best_improvement().unwrap_or(f64::NAN)
                )?;
            }
        }
        None => report.write_csv(stdout)?,
    }
    Ok(())
}
