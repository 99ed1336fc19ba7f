//! Command-line front end for the polar source-coding library: constructs
//! code specs, compresses and reconstructs files in the three codec modes,
//! and runs rate/BER sweeps.
//!
//! Exit codes: 0 success, 1 I/O or data errors, 2 usage errors, 3 when
//! decompression completed but at least one block failed its checksum (the
//! output is still written).

mod frames;

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use polar_sw::bits::BitVector;
use polar_sw::code::{CodeSpec, Syndrome};
use polar_sw::construct::{construct_code, DEFAULT_FIDELITY};
use polar_sw::crc::CRC_WIDTH;
use polar_sw::sim::{
    entropy_inverse, find_threshold, run_sweep, BerRecord, Mode, SimConfig,
    DEFAULT_MAX_BLOCKS, DEFAULT_TARGET_ERRORS,
};
use polar_sw::sw::{
    asym_decode, asym_encode, decompress_single, nonasym_decode, nonasym_encode_x,
    nonasym_encode_y, NonasymMessage, RateSplit, LIST_SIZE,
};
use polar_sw::systematic::SystematicSpec;

use frames::{FrameHeader, FrameMode};

/// Marker for errors that should exit with the usage code instead of the
/// generic failure code.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Parser)]
#[command(
    name = "polar-sw",
    version,
    about = "Distributed source coding with polar codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a code spec for a given rate and design parameter.
    Construct(ConstructArgs),
    /// Compress raw blocks into a syndrome stream.
    Compress(CompressArgs),
    /// Reconstruct sources from compressed streams.
    Decompress(DecompressArgs),
    /// Run a Monte-Carlo rate/BER sweep and emit CSV.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// Transform depth; the block length is 2^n.
    #[arg(long)]
    n: u32,
    /// Code rate K/N in (0, 1); alternative to --K.
    #[arg(long)]
    rate: Option<f64>,
    /// Information-set size; alternative to --rate.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Crossover probability the construction is optimized for.
    #[arg(long)]
    design_p: f64,
    /// Per-block checksum.
    #[arg(long, value_enum, default_value_t = CrcChoice::Xmodem16)]
    crc: CrcChoice,
    /// Output-alphabet budget of the construction; larger is slower and
    /// more accurate.
    #[arg(long, default_value_t = DEFAULT_FIDELITY)]
    fidelity: usize,
    /// Spec file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CrcChoice {
    None,
    Xmodem16,
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long, value_enum)]
    mode: CompressMode,
    /// Spec file from `construct`.
    #[arg(long)]
    spec: PathBuf,
    /// Nonasymmetric split point; required by the nonasym modes.
    #[arg(long)]
    k1: Option<usize>,
    /// Raw input file; its length must be a whole number of block
    /// payloads.
    #[arg(long = "in")]
    input: PathBuf,
    /// Compressed stream to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompressMode {
    Single,
    Asym,
    NonasymX,
    NonasymY,
}

#[derive(Args)]
struct DecompressArgs {
    #[arg(long, value_enum)]
    mode: DecompressMode,
    /// Spec file the stream was compressed with.
    #[arg(long)]
    spec: PathBuf,
    /// Crossover probability assumed by the decoder.
    #[arg(long)]
    p: f64,
    /// Compressed X stream.
    #[arg(long)]
    x: Option<PathBuf>,
    /// Compressed Y stream (nonasym mode only).
    #[arg(long)]
    y: Option<PathBuf>,
    /// Raw side-information file (asym mode only).
    #[arg(long)]
    side_info: Option<PathBuf>,
    /// Output path; pass twice in nonasym mode (X first, then Y).
    #[arg(long, action = clap::ArgAction::Append)]
    out: Vec<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecompressMode {
    Single,
    Asym,
    Nonasym,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    mode: SimulateMode,
    #[arg(long)]
    spec: PathBuf,
    /// Nonasymmetric split point; required by nonasym mode.
    #[arg(long)]
    k1: Option<usize>,
    /// Comma-separated crossover probabilities to sweep.
    #[arg(long, value_delimiter = ',')]
    p_list: Option<Vec<f64>>,
    /// Comma-separated conditional entropies; converted to probabilities
    /// through the inverse binary entropy.
    #[arg(long, value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    /// Stop a point after this many block errors.
    #[arg(long, default_value_t = DEFAULT_TARGET_ERRORS)]
    target_errors: u64,
    /// Hard cap on blocks per point.
    #[arg(long, default_value_t = DEFAULT_MAX_BLOCKS)]
    max_blocks: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append a threshold line: the largest H(p) whose measured BER stays
    /// at or below this target.
    #[arg(long)]
    threshold_ber: Option<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to machine parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimulateMode {
    Single,
    Asym,
    Nonasym,
}

impl SimulateMode {
    fn to_sim(self) -> Mode {
        match self {
            SimulateMode::Single => Mode::Single,
            SimulateMode::Asym => Mode::Asym,
            SimulateMode::Nonasym => Mode::Nonasym,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Construct(args) => cmd_construct(args),
        Command::Compress(args) => cmd_compress(args),
        Command::Decompress(args) => cmd_decompress(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn cmd_construct(args: ConstructArgs) -> Result<ExitCode> {
    if !(1..=30).contains(&args.n) {
        return Err(usage(format!("--n must lie in 1..=30, got {}", args.n)));
    }
    let len = 1usize << args.n;
    let k = match (args.k, args.rate) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(usage("exactly one of --K and --rate is required"));
        }
        (Some(k), None) => k,
        (None, Some(rate)) => {
            if !(rate > 0.0 && rate < 1.0) {
                return Err(usage(format!("--rate must lie in (0, 1), got {rate}")));
            }
            (rate * len as f64).round() as usize
        }
    };
    if k == 0 || k >= len {
        return Err(usage(format!("K = {k} must lie strictly between 0 and N = {len}")));
    }
    if !(args.design_p > 0.0 && args.design_p < 0.5) {
        return Err(usage(format!(
            "--design-p must lie in (0, 0.5), got {}",
            args.design_p
        )));
    }
    if args.fidelity < 2 {
        return Err(usage("--fidelity must be at least 2"));
    }
    let spec = construct_code(args.n, k, args.design_p, args.fidelity)?;
    let spec = match args.crc {
        CrcChoice::None => spec,
        CrcChoice::Xmodem16 => spec.with_l_crc(CRC_WIDTH)?,
    };
    spec.save_to_path(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "N = {}, K = {}, rate = {}, design_p = {}, l_crc = {}",
        spec.block_len(),
        spec.dim(),
        spec.dim() as f64 / spec.block_len() as f64,
        spec.design_p(),
        spec.l_crc()
    );
    Ok(ExitCode::SUCCESS)
}

fn load_spec(path: &Path) -> Result<CodeSpec> {
    let spec = CodeSpec::load_from_path(path)
        .with_context(|| format!("loading spec {}", path.display()))?;
    ensure!(
        spec.payload_len() % 8 == 0,
        "block payload of {} bits is not byte-aligned; file mode needs n >= 3",
        spec.payload_len()
    );
    Ok(spec)
}

fn read_payload_blocks(path: &Path, spec: &CodeSpec) -> Result<Vec<BitVector>> {
    let block_bytes = spec.payload_len() / 8;
    let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    ensure!(
        !data.is_empty() && data.len() % block_bytes == 0,
        "{} is {} bytes; expected a positive multiple of the {}-byte block payload",
        path.display(),
        data.len(),
        block_bytes
    );
    data.chunks_exact(block_bytes)
        .map(|chunk| Ok(BitVector::unpack_bytes(chunk, spec.payload_len())?))
        .collect()
}

fn write_payload_blocks(path: &Path, payloads: &[BitVector]) -> Result<()> {
    let mut bytes = Vec::with_capacity(payloads.len() * payloads[0].len() / 8);
    for payload in payloads {
        bytes.extend_from_slice(&payload.pack_bytes());
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn split_for(k1: Option<usize>, spec: &CodeSpec) -> Result<RateSplit> {
    let k1 = k1.ok_or_else(|| usage("--k1 is required in the nonasym modes"))?;
    RateSplit::new(k1, spec).map_err(|e| usage(e.to_string()))
}

fn cmd_compress(args: CompressArgs) -> Result<ExitCode> {
    let spec = load_spec(&args.spec)?;
    let payloads = read_payload_blocks(&args.input, &spec)?;
    let (frame_mode, k1, rate, messages) = match args.mode {
        CompressMode::Single | CompressMode::Asym => {
            if args.k1.is_some() {
                return Err(usage("--k1 only applies to the nonasym modes"));
            }
            let frame_mode = match args.mode {
                CompressMode::Single => FrameMode::Single,
                _ => FrameMode::Asym,
            };
            let rate = spec.frozen_len() as f64 / spec.block_len() as f64;
            let messages = payloads
                .iter()
                .map(|x| Ok(asym_encode(x, &spec)?.into_bits()))
                .collect::<Result<Vec<_>>>()?;
            (frame_mode, 0usize, rate, messages)
        }
        CompressMode::NonasymX | CompressMode::NonasymY => {
            let split = split_for(args.k1, &spec)?;
            let systematic = SystematicSpec::new(spec.clone());
            let is_x = matches!(args.mode, CompressMode::NonasymX);
            let rate = if is_x {
                split.rate_x(&spec)
            } else {
                split.rate_y(&spec)
            };
            let messages = payloads
                .iter()
                .map(|payload| {
                    let msg = if is_x {
                        nonasym_encode_x(payload, &split, &systematic)?
                    } else {
                        nonasym_encode_y(payload, &split, &systematic)?
                    };
                    let mut bits = msg.systematic.into_vec();
                    bits.extend_from_slice(msg.syndrome.into_bits().as_slice());
                    Ok(BitVector::new(bits)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let frame_mode = if is_x {
                FrameMode::NonasymX
            } else {
                FrameMode::NonasymY
            };
            (frame_mode, split.k1(), rate, messages)
        }
    };
    let blocks = messages.len();
    let bytes = frames::encode_file(frame_mode, spec.digest(), k1 as u32, &messages)?;
    let out_len = bytes.len();
    fs::write(&args.out, bytes).with_context(|| format!("writing {}", args.out.display()))?;
    println!("compressed {blocks} blocks at rate {rate} -> {out_len} bytes");
    Ok(ExitCode::SUCCESS)
}

fn read_stream(
    path: &Path,
    spec: &CodeSpec,
    want: FrameMode,
    bits_per_block: impl FnOnce(&FrameHeader) -> Result<usize>,
) -> Result<(FrameHeader, Vec<BitVector>)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let digest = spec.digest();
    frames::decode_file(&bytes, |header| {
        ensure!(
            header.mode == want,
            "{} holds a {} stream, expected {}",
            path.display(),
            header.mode.label(),
            want.label()
        );
        ensure!(
            header.spec_digest == digest,
            "{} was compressed with a different spec (digest mismatch)",
            path.display()
        );
        bits_per_block(header)
    })
    .with_context(|| format!("parsing {}", path.display()))
}

fn finish_decompress(crc_failures: usize, blocks: usize) -> ExitCode {
    if crc_failures > 0 {
        eprintln!("{crc_failures} of {blocks} blocks failed the checksum");
        ExitCode::from(3)
    } else {
        println!("reconstructed {blocks} blocks");
        ExitCode::SUCCESS
    }
}

fn cmd_decompress(args: DecompressArgs) -> Result<ExitCode> {
    let spec = load_spec(&args.spec)?;
    if !(args.p > 0.0 && args.p < 0.5) {
        return Err(usage(format!("--p must lie in (0, 0.5), got {}", args.p)));
    }
    let x_path = args
        .x
        .as_ref()
        .ok_or_else(|| usage("--x (the compressed X stream) is required"))?;
    match args.mode {
        DecompressMode::Single | DecompressMode::Asym => {
            if args.y.is_some() {
                return Err(usage("--y only applies to nonasym mode"));
            }
            let [out] = args.out.as_slice() else {
                return Err(usage("exactly one --out is required in this mode"));
            };
            let want = if args.mode == DecompressMode::Single {
                FrameMode::Single
            } else {
                FrameMode::Asym
            };
            let (_, blocks) =
                read_stream(x_path, &spec, want, |h| {
                    ensure!(h.k1 == 0, "unexpected split point {} in the header", h.k1);
                    Ok(spec.frozen_len())
                })?;
            let side_info = match args.mode {
                DecompressMode::Single => {
                    if args.side_info.is_some() {
                        return Err(usage("--side-info only applies to asym mode"));
                    }
                    None
                }
                _ => {
                    let path = args
                        .side_info
                        .as_ref()
                        .ok_or_else(|| usage("--side-info is required in asym mode"))?;
                    let y_blocks = read_payload_blocks(path, &spec)?;
                    ensure!(
                        y_blocks.len() == blocks.len(),
                        "side information holds {} blocks, stream holds {}",
                        y_blocks.len(),
                        blocks.len()
                    );
                    Some(y_blocks)
                }
            };
            let mut crc_failures = 0usize;
            let mut payloads = Vec::with_capacity(blocks.len());
            for (i, bits) in blocks.into_iter().enumerate() {
                let syndrome = Syndrome::new(bits, &spec)?;
                let decoded = match &side_info {
                    None => decompress_single(&syndrome, &spec, args.p)?,
                    Some(ys) => asym_decode(&syndrome, &ys[i], &spec, args.p)?,
                };
                crc_failures += usize::from(!decoded.crc_pass);
                payloads.push(decoded.payload);
            }
            write_payload_blocks(out, &payloads)?;
            Ok(finish_decompress(crc_failures, payloads.len()))
        }
        DecompressMode::Nonasym => {
            if args.side_info.is_some() {
                return Err(usage("--side-info only applies to asym mode"));
            }
            let y_path = args
                .y
                .as_ref()
                .ok_or_else(|| usage("--y (the compressed Y stream) is required"))?;
            let [out_x, out_y] = args.out.as_slice() else {
                return Err(usage("pass --out twice in nonasym mode (X first, then Y)"));
            };
            let (header_x, blocks_x) = read_stream(x_path, &spec, FrameMode::NonasymX, |h| {
                ensure!(h.k1 as usize <= spec.dim(), "split point exceeds K");
                Ok(h.k1 as usize + spec.frozen_len())
            })?;
            let k1 = header_x.k1;
            let (_, blocks_y) = read_stream(y_path, &spec, FrameMode::NonasymY, |h| {
                ensure!(
                    h.k1 == k1,
                    "streams disagree on the split point ({} vs {})",
                    h.k1,
                    k1
                );
                Ok(spec.dim() - h.k1 as usize + spec.frozen_len())
            })?;
            ensure!(
                blocks_x.len() == blocks_y.len(),
                "streams hold {} and {} blocks",
                blocks_x.len(),
                blocks_y.len()
            );
            let split = RateSplit::new(k1 as usize, &spec)?;
            let systematic = SystematicSpec::new(spec.clone());
            let mut crc_failures = 0usize;
            let mut x_payloads = Vec::with_capacity(blocks_x.len());
            let mut y_payloads = Vec::with_capacity(blocks_y.len());
            for (bits_x, bits_y) in blocks_x.into_iter().zip(blocks_y) {
                let msg_x = split_message(bits_x, split.k1(), &spec)?;
                let msg_y = split_message(bits_y, split.k2(), &spec)?;
                let decoded = nonasym_decode(&msg_x, &msg_y, &split, &systematic, args.p)?;
                crc_failures += usize::from(!decoded.crc_pass);
                x_payloads.push(decoded.x_payload);
                y_payloads.push(decoded.y_payload);
            }
            write_payload_blocks(out_x, &x_payloads)?;
            write_payload_blocks(out_y, &y_payloads)?;
            Ok(finish_decompress(crc_failures, x_payloads.len()))
        }
    }
}

fn split_message(bits: BitVector, systematic_len: usize, spec: &CodeSpec) -> Result<NonasymMessage> {
    let slice = bits.as_slice();
    let systematic = BitVector::new(slice[..systematic_len].to_vec())?;
    let syndrome = Syndrome::new(BitVector::new(slice[systematic_len..].to_vec())?, spec)?;
    Ok(NonasymMessage {
        syndrome,
        systematic,
    })
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let spec = CodeSpec::load_from_path(&args.spec)
        .with_context(|| format!("loading spec {}", args.spec.display()))?;
    let ps: Vec<f64> = match (&args.p_list, &args.h_list) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(usage("exactly one of --p-list and --h-list is required"));
        }
        (Some(ps), None) => {
            for &p in ps {
                if !(p > 0.0 && p < 0.5) {
                    return Err(usage(format!("--p-list entries must lie in (0, 0.5), got {p}")));
                }
            }
            ps.clone()
        }
        (None, Some(hs)) => hs
            .iter()
            .map(|&h| {
                if !(h > 0.0 && h <= 1.0) {
                    return Err(usage(format!("--h-list entries must lie in (0, 1], got {h}")));
                }
                Ok(entropy_inverse(h)?)
            })
            .collect::<Result<_>>()?,
    };
    let mode = args.mode.to_sim();
    let k1 = match mode {
        Mode::Nonasym => split_for(args.k1, &spec)?.k1(),
        _ => {
            if args.k1.is_some() {
                return Err(usage("--k1 only applies to nonasym mode"));
            }
            0
        }
    };
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("initializing the worker pool")?;
    }
    let config = SimConfig::new(mode, spec, k1, args.seed)
        .and_then(|c| c.with_target_errors(args.target_errors))
        .and_then(|c| c.with_max_blocks(args.max_blocks))
        .map_err(|e| usage(e.to_string()))?;
    if let Some(target) = args.threshold_ber
        && (target <= 0.0 || target.is_nan())
    {
        return Err(usage(format!(
            "--threshold-ber must be positive, got {target}"
        )));
    }
    let records = run_sweep(&config, &ps)?;
    let csv = render_csv(&config, &records, args.threshold_ber)?;
    match &args.out {
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn render_csv(
    config: &SimConfig,
    records: &[BerRecord],
    threshold_ber: Option<f64>,
) -> Result<String> {
    let mut csv = String::new();
    csv.push_str("mode,N,K,K1,p,h_cond,blocks,bit_errors_x,bit_errors_y,ber_avg,block_errors,crc_fails\n");
    let spec = config.spec();
    for r in records {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            config.mode().as_str(),
            spec.block_len(),
            spec.dim(),
            config.k1(),
            r.p,
            r.h_cond,
            r.blocks,
            r.bit_errors_x,
            r.bit_errors_y,
            r.ber_avg,
            r.block_errors,
            r.crc_fail_count
        )?;
    }
    writeln!(
        csv,
        "# rng = chacha8, seed = {}, target_errors = {}, max_blocks = {}, list_size = {}",
        config.seed(),
        config.target_errors(),
        config.max_blocks(),
        LIST_SIZE
    )?;
    if let Some(target) = threshold_ber {
        let mut ordered: Vec<BerRecord> = records.to_vec();
        ordered.sort_by(|a, b| a.h_cond.total_cmp(&b.h_cond));
        match find_threshold(&ordered, target) {
            Ok(h) => writeln!(csv, "# threshold_h = {h}")?,
            Err(polar_sw::Error::ThresholdBelowGrid) => {
                writeln!(csv, "# threshold_h = below_grid")?
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(csv)
}
