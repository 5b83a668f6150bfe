//! `gramlin` command-line tool.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 malformed input or corrupt
//! container, 5 dimension mismatch.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gramlin::encoding::MAGIC;
use gramlin::io::{read_matrix, write_matrix, write_to, Format};
use gramlin::reorder::{PairCounting, ReorderOutcome};
use gramlin::{
    bench_dense, bench_iterate, choose_best_reordering, Algorithm, BenchConfig, BlockedMatrix,
    CompressedMatrix, CsmMode, CsrvMatrix, DenseMatrix, Error, ReorderConfig, Variant,
};

#[derive(Parser)]
#[command(name = "gramlin", version, about = "Grammar-compressed matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a matrix file into a container.
    Compress {
        input: PathBuf,
        /// Output container; defaults to the input path with `.grlm` appended.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        input_format: FormatArg,
        #[command(flatten)]
        layout: LayoutArgs,
        #[command(flatten)]
        reorder: ReorderArgs,
    },
    /// Write the matrix stored in a container.
    Decompress {
        input: PathBuf,
        /// Output matrix file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        output_format: FormatArg,
    },
    /// Print sizes and grammar statistics of a container.
    Info { input: PathBuf },
    /// Report, per row block, the size reached by each column order.
    Reorder {
        input: PathBuf,
        /// Also write the reordered container here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        input_format: FormatArg,
        #[command(flatten)]
        layout: LayoutArgs,
        #[command(flatten)]
        reorder: ReorderArgs,
    },
    /// Time alternating right and left products on a matrix or container.
    Bench {
        input: PathBuf,
        #[command(flatten)]
        input_format: FormatArg,
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        /// Start from a seeded random vector instead of all ones.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct FormatArg {
    /// Matrix file format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatChoice>,
}

#[derive(Args)]
struct LayoutArgs {
    #[arg(long, value_enum, default_value = "reiv")]
    variant: VariantChoice,
    /// Row blocks; defaults to the worker count.
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long, env = "GRAMLIN_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args)]
struct ReorderArgs {
    #[arg(long, value_enum, default_value = "none")]
    reorder: ReorderChoice,
    #[arg(long, value_enum, default_value = "local")]
    prune: PruneChoice,
    /// Scores kept per column (local) or per column on average (global).
    #[arg(long, default_value_t = 16)]
    k: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatChoice {
    Mtx,
    Csv,
    Bin,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantChoice {
    Csrv,
    Re32,
    Reiv,
    Reans,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ReorderChoice {
    None,
    Pathcover,
    #[value(name = "pathcover+")]
    PathcoverPlus,
    Mwm,
    Tsp,
    Best,
}

#[derive(Clone, Copy, ValueEnum)]
enum PruneChoice {
    Full,
    Local,
    Global,
}

impl From<FormatChoice> for Format {
    fn from(f: FormatChoice) -> Self {
        match f {
            FormatChoice::Mtx => Format::Mtx,
            FormatChoice::Csv => Format::Csv,
            FormatChoice::Bin => Format::Bin,
        }
    }
}

impl From<VariantChoice> for Variant {
    fn from(v: VariantChoice) -> Self {
        match v {
            VariantChoice::Csrv => Variant::Csrv,
            VariantChoice::Re32 => Variant::Re32,
            VariantChoice::Reiv => Variant::ReIv,
            VariantChoice::Reans => Variant::ReAns,
        }
    }
}

impl FormatArg {
    fn get(&self) -> Option<Format> {
        self.format.map(Format::from)
    }
}

impl LayoutArgs {
    fn workers(&self) -> Result<usize, Error> {
        match self.workers {
            Some(0) => Err(Error::InvalidArgument(
                "--workers must be at least 1".into(),
            )),
            Some(w) => Ok(w),
            None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }

    /// Block count for a matrix with `n_rows` rows. An explicit `--blocks`
    /// is checked later; the worker default is capped at the row count.
    fn blocks(&self, n_rows: usize) -> Result<usize, Error> {
        match self.blocks {
            Some(b) => Ok(b),
            None => Ok(self.workers()?.min(n_rows)),
        }
    }
}

impl ReorderArgs {
    fn algorithms(&self) -> Option<Vec<Algorithm>> {
        let a = match self.reorder {
            ReorderChoice::None => return None,
            ReorderChoice::Pathcover => vec![Algorithm::PathCover],
            ReorderChoice::PathcoverPlus => vec![Algorithm::PathCoverPlus],
            ReorderChoice::Mwm => vec![Algorithm::Mwm],
            ReorderChoice::Tsp => vec![Algorithm::Tsp],
            ReorderChoice::Best => Algorithm::ALL.to_vec(),
        };
        Some(a)
    }

    fn mode(&self) -> Result<CsmMode, Error> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("--k must be at least 1".into()));
        }
        Ok(match self.prune {
            PruneChoice::Full => CsmMode::Full,
            PruneChoice::Local => CsmMode::Local(self.k),
            PruneChoice::Global => CsmMode::Global(self.k),
        })
    }

    fn config(&self, variant: Variant, algorithms: Vec<Algorithm>) -> Result<ReorderConfig, Error> {
        Ok(ReorderConfig {
            algorithms,
            mode: self.mode()?,
            variant,
            counting: PairCounting::Sort,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gramlin: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 2,
        Error::Io(_) => 3,
        Error::DimensionMismatch { .. } => 5,
        _ => 4,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Compress {
            input,
            output,
            input_format,
            layout,
            reorder,
        } => {
            let m = read_matrix(&input, input_format.get())?;
            let output = output.unwrap_or_else(|| with_suffix(&input, "grlm"));
            let workers = layout.workers()?;
            let variant = Variant::from(layout.variant);
            let blocks = layout.blocks(m.n_rows())?;
            let cm = gramlin::blocked::with_workers(workers, || -> Result<_, Error> {
                let bm = match reorder.algorithms() {
                    None => BlockedMatrix::build(&m, blocks)?,
                    Some(algorithms) => {
                        let cfg = reorder.config(variant, algorithms)?;
                        choose_best_reordering(&CsrvMatrix::build(&m), blocks, &cfg)?.matrix
                    }
                };
                CompressedMatrix::encode(&bm, variant)
            })??;
            let bytes = cm.to_bytes();
            fs::write(&output, &bytes)?;
            println!("output={}", output.display());
            println!("bytes_total={}", bytes.len());
            println!("ratio_vs_dense={:.6}", ratio(bytes.len(), &m));
            Ok(())
        }
        Command::Decompress {
            input,
            output,
            output_format,
        } => {
            let cm = CompressedMatrix::from_bytes(&fs::read(&input)?)?;
            let m = cm.to_csrv()?.decode()?;
            match output {
                Some(path) => write_matrix(&path, &m, output_format.get()),
                None => {
                    let mut w = BufWriter::new(io::stdout().lock());
                    write_to(&mut w, &m, output_format.get().unwrap_or(Format::Csv))?;
                    w.flush()?;
                    Ok(())
                }
            }
        }
        Command::Info { input } => info(&fs::read(&input)?),
        Command::Reorder {
            input,
            output,
            input_format,
            layout,
            reorder,
        } => {
            let m = read_matrix(&input, input_format.get())?;
            let variant = Variant::from(layout.variant);
            let blocks = layout.blocks(m.n_rows())?;
            // Without an explicit choice every heuristic is reported.
            let algorithms = reorder
                .algorithms()
                .unwrap_or_else(|| Algorithm::ALL.to_vec());
            let cfg = reorder.config(variant, algorithms)?;
            let start = Instant::now();
            let out = gramlin::blocked::with_workers(layout.workers()?, || {
                choose_best_reordering(&CsrvMatrix::build(&m), blocks, &cfg)
            })??;
            print_reorder(&out, start.elapsed().as_secs_f64());
            if let Some(path) = output {
                fs::write(
                    &path,
                    CompressedMatrix::encode(&out.matrix, variant)?.to_bytes(),
                )?;
                println!("output={}", path.display());
            }
            Ok(())
        }
        Command::Bench {
            input,
            input_format,
            layout,
            iters,
            seed,
        } => {
            let workers = layout.workers()?;
            let mut cfg = BenchConfig {
                iterations: iters,
                variant: layout.variant.into(),
                blocks: 1,
                workers,
                seed,
            };
            let report = match read_container(&input)? {
                Some(cm) => {
                    cfg.variant = cm.variant();
                    cfg.blocks = cm.block_count();
                    bench_iterate(&cm, &cfg)?
                }
                None => {
                    let m = read_matrix(&input, input_format.get())?;
                    cfg.blocks = layout.blocks(m.n_rows())?;
                    bench_dense(&m, &cfg)?
                }
            };
            print!("{}", report.to_key_value());
            Ok(())
        }
    }
}

fn with_suffix(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn ratio(bytes: usize, m: &DenseMatrix) -> f64 {
    bytes as f64 / (8.0 * m.n_rows() as f64 * m.n_cols() as f64)
}

/// The container in `path`, or `None` when the file is not one.
fn read_container(path: &Path) -> Result<Option<CompressedMatrix>, Error> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(&MAGIC) {
        CompressedMatrix::from_bytes(&bytes).map(Some)
    } else {
        Ok(None)
    }
}

fn info(bytes: &[u8]) -> Result<(), Error> {
    let report = gramlin::compressed_size_report(bytes)?;
    let cm = CompressedMatrix::from_bytes(bytes)?;
    println!("variant={}", report.variant);
    println!("rows={}", report.n_rows);
    println!("cols={}", report.n_cols);
    println!("blocks={}", cm.block_count());
    println!("dict_values={}", cm.dict().len());
    println!("rules={}", cm.rule_count());
    println!("final_len={}", cm.final_len());
    println!("payload_codes={}", cm.code_count());
    println!("payload_bytes={}", cm.payload_bytes());
    println!("bytes_total={}", report.bytes_total);
    println!("dense_bytes={}", report.dense_bytes);
    println!("ratio_vs_dense={:.6}", report.ratio);

    // The same blocks under every layout. A csrv container holds no grammar,
    // so its blocks are compressed first.
    let blocked = if cm.variant() == Variant::Csrv {
        BlockedMatrix::build(&cm.to_csrv()?.decode()?, cm.block_count())?
    } else {
        cm.to_blocked()?
    };
    for v in Variant::ALL {
        let total = CompressedMatrix::encode(&blocked, v)?.to_bytes().len();
        println!("size.{v}={total}");
        println!("ratio.{v}={:.6}", total as f64 / report.dense_bytes as f64);
    }
    Ok(())
}

fn print_reorder(out: &ReorderOutcome, seconds: f64) {
    let (mut identity, mut chosen) = (0, 0);
    for r in &out.blocks {
        let sizes: Vec<String> = r
            .candidates
            .iter()
            .map(|c| format!("bytes.{}={}", c.algorithm, c.bytes))
            .collect();
        println!("block={} winner={} {}", r.block, r.winner, sizes.join(" "));
        identity += r.identity_bytes();
        chosen += r.winner_bytes();
    }
    println!("identity_bytes={identity}");
    println!("chosen_bytes={chosen}");
    println!(
        "reduction={:.6}",
        if identity == 0 {
            0.0
        } else {
            1.0 - chosen as f64 / identity as f64
        }
    );
    println!("seconds={seconds:.6}");
}
