use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ajpeg_core::analysis::counterexample_element;
use ajpeg_core::analysis::montecarlo::{add_noise_image, NoiseModel};
use ajpeg_core::{decode, CompressedImage, EncodeConfig, MeshMode, NormKind};
use clap::{Parser, Subcommand, ValueEnum};

use ajpeg::analyze::{self, McRow};
use ajpeg::bench::{load_corpus, run_bench, to_csv};
use ajpeg::corpus::{write_corpus, DEFAULT_SEED};
use ajpeg::error::{AppError, Result};
use ajpeg::io::{read_bytes, read_image, write_bytes, write_image};
use ajpeg::metrics::compare;
use ajpeg::parallel::{encode_parallel, with_pool};

#[derive(Parser, Debug)]
#[command(version, about = "Adaptive quadtree JPEG-style image compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Norm {
    L2,
    Bv,
}

impl From<Norm> for NormKind {
    fn from(n: Norm) -> Self {
        match n {
            Norm::L2 => NormKind::L2,
            Norm::Bv => NormKind::Bv,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compress a PPM or PNG image.
    Encode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Luma tolerance.
        #[arg(short, long)]
        tau: f64,
        #[arg(long, value_enum, default_value = "l2")]
        norm: Norm,
        /// Chroma tolerance (default: twice the luma tolerance).
        #[arg(long)]
        chroma_tau: Option<f64>,
        /// Use the fixed 8-pixel block grid instead of the adaptive mesh.
        #[arg(long)]
        uniform: bool,
    },
    /// Reconstruct an image; the extension of the output picks PPM or PNG.
    Decode {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Distortion metrics between two images.
    Compare { a: PathBuf, b: PathBuf },
    /// Adaptive versus uniform grid over a directory of images (CSV).
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.02")]
        tau: Vec<f64>,
        /// Write the CSV here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Numerical analysis of the refinement property.
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
    /// Write the synthetic test corpus.
    GenCorpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum Analyze {
    /// Norm of the refinement operator for square element sizes.
    Norms {
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        size: Vec<usize>,
    },
    /// Probability bound for the refinement property, optimized over z.
    Bound {
        #[arg(long, value_delimiter = ',', default_value = "0.0075,0.008,0.0085")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 0.13)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Monte-Carlo violation rate of the refinement property under noise.
    Mc {
        #[arg(long, default_value_t = 0.0075)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 4.0)]
        c0: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Images whose top-left 32x32 luma block is tested (default: the counterexample element).
        images: Vec<PathBuf>,
    },
    /// Add Gaussian noise to an image.
    Noise {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0.015)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(AppError::io(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

macro_rules! outln {
    ($($arg:tt)*) => {
        emit(&format!("{}\n", format_args!($($arg)*)))?
    };
}

fn write_or_print(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_bytes(p, text.as_bytes()),
        None => emit(text),
    }
}

fn cmd_encode(input: &Path, output: &Path, config: EncodeConfig) -> Result<()> {
    let img = read_image(input)?;
    let out = encode_parallel(&img, &config)?;
    let bytes = out.to_bytes()?;
    write_bytes(output, &bytes)?;
    outln!(
        "{}x{} -> {}x{} padded, {} bytes",
        img.height(),
        img.width(),
        out.compressed.height,
        out.compressed.width,
        bytes.len()
    );
    for (name, (c, m)) in ["Y", "Cb", "Cr"].iter().zip(out.channels.iter().enumerate()) {
        outln!(
            "{name:>2}: {} elements, {} iterations, E = {:.6e} (tau {}), quantized {:.6e}, {:?}",
            m.leaves.len(),
            m.iterations,
            m.error,
            config.channel_tolerance(c),
            m.quantized_error,
            m.termination
        );
    }
    Ok(())
}

fn cmd_decode(input: &Path, output: &Path) -> Result<()> {
    let bytes = read_bytes(input)?;
    let corrupt = |source| AppError::Corrupt {
        path: input.to_path_buf(),
        source,
    };
    let parsed = CompressedImage::deserialize(&bytes).map_err(|e| corrupt(e.into()))?;
    let img = decode(&bytes).map_err(corrupt)?;
    write_image(output, &img)?;
    let counts = [0, 1, 2].map(|c| parsed.channels[c].len());
    outln!(
        "{}x{}, elements Y {} Cb {} Cr {}",
        img.height(),
        img.width(),
        counts[0],
        counts[1],
        counts[2]
    );
    Ok(())
}

fn cmd_analyze(what: Analyze) -> Result<()> {
    match what {
        Analyze::Norms { size } => {
            let sizes: Vec<_> = size.iter().map(|&s| (s, s)).collect();
            emit(&analyze::norms_csv(&analyze::norms(&sizes)?))?;
        }
        Analyze::Bound { eps, delta, c } => {
            emit(&analyze::bounds_csv(&analyze::bounds(&eps, delta, c)?))?;
        }
        Analyze::Mc {
            eps,
            trials,
            c0,
            seed,
            images,
        } => {
            let mut rows = Vec::new();
            if images.is_empty() {
                let report = analyze::monte_carlo(&counterexample_element(), eps, c0, trials, seed)?;
                rows.push(McRow {
                    name: "counterexample".into(),
                    epsilon: eps,
                    report,
                });
            }
            for path in &images {
                let element = analyze::corner_element(&read_image(path)?, 32);
                rows.push(McRow {
                    name: path.display().to_string(),
                    epsilon: eps,
                    report: analyze::monte_carlo(&element, eps, c0, trials, seed)?,
                });
            }
            emit(&analyze::mc_csv(&rows))?;
        }
        Analyze::Noise {
            input,
            output,
            eps,
            seed,
        } => {
            let img = read_image(&input)?;
            let model = NoiseModel::new(eps, seed)?;
            write_image(&output, &add_noise_image(&img, &model)?)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode {
            input,
            output,
            tau,
            norm,
            chroma_tau,
            uniform,
        } => {
            let mut config = EncodeConfig::new(tau).with_norm(norm.into());
            if let Some(t) = chroma_tau {
                config = config.with_chroma_tolerance(t);
            }
            if uniform {
                config.mesh = MeshMode::Uniform;
            }
            config
                .validate()
                .map_err(|_| AppError::Usage(format!("tolerance must be positive, got {tau}")))?;
            cmd_encode(&input, &output, config)
        }
        Command::Decode { input, output } => cmd_decode(&input, &output),
        Command::Compare { a, b } => {
            outln!("{}", compare(&read_image(&a)?, &read_image(&b)?)?);
            Ok(())
        }
        Command::Bench { corpus, tau, output } => {
            let rows = run_bench(&load_corpus(&corpus)?, &tau)?;
            write_or_print(output.as_deref(), &to_csv(&rows))
        }
        Command::Analyze { what } => cmd_analyze(what),
        Command::GenCorpus { dir, size, seed } => {
            if size == 0 {
                return Err(AppError::Usage("size must be positive".into()));
            }
            for p in write_corpus(&dir, size, size, seed)? {
                outln!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_pool(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ajpeg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
