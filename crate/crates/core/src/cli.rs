//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::grid::{MarginalGrid, SegmentationGrid};
use crate::io::{format_float, load_npy, save_csv, save_npy, save_pgm};
use crate::marginal::compute_marginal;
use crate::metrics::{accuracy, cross_entropy, dice, soft_dice};
use crate::montecarlo::{verify_correlation, verify_marginal, verify_variance, verify_volume, McReport};
use crate::noise::{sample_noisy_segmentation, NoiseParams, DEFAULT_LENGTH_SCALE};
use crate::optimal::{accuracy_optimal, dice_optimal};
use crate::phantom::{generate, FigureShape, PhantomKind, PhantomSpec};
use crate::rng::split;

#[derive(Debug, Parser)]
#[command(name = "segnoise", version, about = "Gaussian-field label noise for segmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic segmentation as NPY (and PGM for 2D shapes).
    Phantom {
        #[arg(long, default_value = "disk")]
        phantom: String,
        #[arg(long, default_value = "64,64")]
        shape: ShapeArg,
        #[arg(long)]
        output: PathBuf,
    },
    /// Draw noisy samples of a segmentation.
    Sample {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Prefix for `<prefix>_<i>.npy`.
        #[arg(long)]
        output: PathBuf,
    },
    /// Write the closed-form marginal of a segmentation.
    Marginal {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write the Accuracy- or Dice-optimal segmentation of a marginal.
    Optimal {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        metric: OptimalMetric,
        #[arg(long)]
        output: PathBuf,
        /// Threshold CSV for `--metric dice`; defaults to the output path with a `.csv` extension.
        #[arg(long)]
        threshold_csv: Option<PathBuf>,
    },
    /// Evaluate cross-entropy, soft-Dice, Accuracy and Dice of a prediction against a soft label.
    Metrics {
        /// Soft label (marginal).
        #[arg(long)]
        input: PathBuf,
        /// Binary segmentation or soft prediction.
        #[arg(long)]
        prediction: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Monte Carlo check of a closed-form statistic. Exits 1 when it fails.
    Verify {
        #[arg(long, value_enum)]
        target: VerifyTarget,
        /// Segmentation to perturb; overrides `--phantom`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "disk")]
        phantom: String,
        #[arg(long, default_value = "64,64")]
        shape: ShapeArg,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0.10)]
        tolerance: f64,
        #[arg(long)]
        output: PathBuf,
        /// Per-voxel error grid for `--target marginal`.
        #[arg(long)]
        error_grid: Option<PathBuf>,
    },
    /// Samples, marginal and optimal segmentations over a sweep of noise levels.
    Figure1 {
        #[arg(long, default_value = "figure")]
        phantom: String,
        #[arg(long, default_value = "128,128")]
        shape: ShapeArg,
        #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.02,0.03,0.04,0.05,0.06")]
        sweep: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_LENGTH_SCALE)]
        b: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct NoiseArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = DEFAULT_LENGTH_SCALE)]
    pub b: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl NoiseArgs {
    fn params(&self) -> Result<NoiseParams> {
        NoiseParams::new(self.a, self.b, self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimalMetric {
    Dice,
    Accuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyTarget {
    Marginal,
    Variance,
    Volume,
    Correlation,
}

/// Grid shape given as comma-separated positive axis lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeArg(pub Vec<usize>);

impl std::str::FromStr for ShapeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        parse_shape(s).map(ShapeArg)
    }
}

pub fn parse_shape(s: &str) -> std::result::Result<Vec<usize>, String> {
    let shape = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad axis length {t:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if shape.is_empty() || shape.len() > 3 || shape.contains(&0) {
        return Err(format!("shape must have 1 to 3 positive axes, got {s:?}"));
    }
    Ok(shape)
}

/// Parses `kind[:p1,p2,...]`.
///
/// * `disk[:c_1,..,c_n,r]`, default center 0.5 and radius 0.25
/// * `annulus[:c_1,..,c_n,inner,outer]`, default radii 0.15 and 0.3
/// * `bar[:lo_1,..,lo_n,hi_1,..,hi_n]`, default the middle half on every axis
/// * `figure`
pub fn parse_phantom(s: &str, shape: &[usize]) -> Result<PhantomSpec> {
    let (kind, params) = match s.split_once(':') {
        Some((k, p)) => (k, Some(p)),
        None => (s, None),
    };
    let values = params
        .map(|p| {
            p.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad phantom parameter {t:?}"))))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let n = shape.len();
    let arity = |expected: usize, v: &Vec<f64>| {
        if v.len() != expected {
            return Err(Error::InvalidArgument(format!("{kind} takes {expected} parameters on a {n}D grid, got {}", v.len())));
        }
        Ok(())
    };
    let kind = match kind {
        "disk" => match values {
            None => PhantomKind::Disk { center: vec![0.5; n], radius: 0.25 },
            Some(v) => {
                arity(n + 1, &v)?;
                PhantomKind::Disk { center: v[..n].to_vec(), radius: v[n] }
            }
        },
        "annulus" => match values {
            None => PhantomKind::Annulus { center: vec![0.5; n], inner: 0.15, outer: 0.3 },
            Some(v) => {
                arity(n + 2, &v)?;
                PhantomKind::Annulus { center: v[..n].to_vec(), inner: v[n], outer: v[n + 1] }
            }
        },
        "bar" => match values {
            None => PhantomKind::Bar { lower: vec![0.25; n], upper: vec![0.75; n] },
            Some(v) => {
                arity(2 * n, &v)?;
                PhantomKind::Bar { lower: v[..n].to_vec(), upper: v[n..].to_vec() }
            }
        },
        "figure" => PhantomKind::FigureShape,
        other => return Err(Error::InvalidArgument(format!("unknown phantom kind {other:?}"))),
    };
    Ok(PhantomSpec::new(kind, shape.to_vec()))
}

/// Runs a command. `Ok(false)` means a verification ran and failed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Phantom { phantom, shape, output } => {
            cmd_phantom(&parse_phantom(&phantom, &shape.0)?, &output)?;
        }
        Command::Sample { input, noise, samples, output } => {
            cmd_sample(&input, &noise.params()?, samples, &output)?;
        }
        Command::Marginal { input, a, output } => cmd_marginal(&input, a, &output)?,
        Command::Optimal { input, metric, output, threshold_csv } => {
            let csv = threshold_csv.unwrap_or_else(|| output.with_extension("csv"));
            cmd_optimal(&input, metric, &output, &csv)?;
        }
        Command::Metrics { input, prediction, output } => cmd_metrics(&input, &prediction, &output)?,
        Command::Verify { target, input, phantom, shape, noise, samples, tolerance, output, error_grid } => {
            let l = match input {
                Some(path) => SegmentationGrid::validate(load_npy(path)?)?,
                None => generate(&parse_phantom(&phantom, &shape.0)?)?,
            };
            let report = cmd_verify(target, &l, &noise.params()?, samples, tolerance)?;
            report.save_csv(&output)?;
            if let (Some(path), Some(grid)) = (error_grid, &report.error_grid) {
                save_npy(path, grid)?;
            }
            return Ok(report.pass);
        }
        Command::Figure1 { phantom, shape, sweep, b, seed, samples, output } => {
            let l = generate(&parse_phantom(&phantom, &shape.0)?)?;
            let is_figure = phantom == "figure";
            cmd_figure1(&l, &sweep, b, seed, samples, &output, is_figure)?;
        }
    }
    Ok(true)
}

/// Writes the phantom as NPY, plus a PGM next to it for 2D grids.
pub fn cmd_phantom(spec: &PhantomSpec, output: &Path) -> Result<SegmentationGrid> {
    let l = generate(spec)?;
    save_npy(output, l.grid())?;
    if l.shape().len() == 2 {
        save_pgm(output.with_extension("pgm"), l.grid())?;
    }
    Ok(l)
}

/// Path of sample `i` for an output prefix.
pub fn sample_path(prefix: &Path, i: usize) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(format!("_{i:03}.npy"));
    prefix.with_file_name(name)
}

/// Sample `i` is drawn with seed `split(seed, i)`.
pub fn cmd_sample(input: &Path, params: &NoiseParams, n: usize, prefix: &Path) -> Result<Vec<PathBuf>> {
    let l = SegmentationGrid::validate(load_npy(input)?)?;
    (0..n)
        .map(|i| {
            let sample = sample_noisy_segmentation(&l, &params.with_seed(split(params.seed, i as u64)))?;
            let path = sample_path(prefix, i);
            save_npy(&path, sample.grid())?;
            Ok(path)
        })
        .collect()
}

pub fn cmd_marginal(input: &Path, a: f64, output: &Path) -> Result<()> {
    let l = SegmentationGrid::validate(load_npy(input)?)?;
    save_npy(output, compute_marginal(&l, a)?.grid())
}

pub const THRESHOLD_CSV_HEADER: [&str; 2] = ["threshold", "best_dice"];

pub fn cmd_optimal(input: &Path, metric: OptimalMetric, output: &Path, threshold_csv: &Path) -> Result<()> {
    let m = MarginalGrid::validate(load_npy(input)?)?;
    match metric {
        OptimalMetric::Accuracy => save_npy(output, accuracy_optimal(&m).grid()),
        OptimalMetric::Dice => {
            let opt = dice_optimal(&m)?;
            save_npy(output, opt.segmentation.grid())?;
            save_csv(
                threshold_csv,
                &THRESHOLD_CSV_HEADER,
                &[vec![format_float(opt.threshold), format_float(opt.best_dice)]],
            )
        }
    }
}

pub const METRICS_CSV_HEADER: [&str; 2] = ["metric", "value"];

/// Accuracy and Dice are only defined for binary predictions; their value
/// cells stay empty for soft predictions.
pub fn cmd_metrics(m_path: &Path, prediction_path: &Path, output: &Path) -> Result<()> {
    let m = MarginalGrid::validate(load_npy(m_path)?)?;
    let prediction = load_npy(prediction_path)?;
    let c = MarginalGrid::validate(prediction.clone())?;
    let binary = SegmentationGrid::validate(prediction).ok();

    let mut rows = vec![
        row("cross_entropy", Some(cross_entropy(&m, &c)?.value)),
        row("soft_dice", Some(soft_dice(&m, &c)?.value)),
    ];
    match &binary {
        Some(s) => {
            rows.push(row("accuracy", Some(accuracy(&m, s)?.value)));
            rows.push(row("dice", Some(dice(&m, s)?.value)));
        }
        None => {
            rows.push(row("accuracy", None));
            rows.push(row("dice", None));
        }
    }
    save_csv(output, &METRICS_CSV_HEADER, &rows)
}

fn row(name: &str, value: Option<f64>) -> Vec<String> {
    vec![name.to_string(), value.map(format_float).unwrap_or_default()]
}

/// Variance runs on the shape of `l`; correlation on the length of a 1D `l`.
pub fn cmd_verify(target: VerifyTarget, l: &SegmentationGrid, params: &NoiseParams, samples: usize, tolerance: f64) -> Result<McReport> {
    match target {
        VerifyTarget::Marginal => verify_marginal(l, params, samples, tolerance),
        VerifyTarget::Variance => verify_variance(l.shape(), params, samples),
        VerifyTarget::Volume => verify_volume(l, params, samples),
        VerifyTarget::Correlation => match l.shape() {
            [len] => verify_correlation(*len, params, samples, tolerance),
            other => Err(Error::InvalidArgument(format!("correlation check needs a 1D grid, got {other:?}"))),
        },
    }
}

/// One column of the noise-level sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Row {
    pub a: f64,
    pub threshold: f64,
    pub best_dice: f64,
    pub accuracy_volume: usize,
    pub dice_volume: usize,
    pub symmetric_difference: usize,
    /// Hole voxels of the figure phantom that the Dice-optimal segmentation fills.
    pub hole_filled: Option<usize>,
    /// Protrusion voxels of the figure phantom kept by the Dice-optimal segmentation.
    pub protrusion_kept: Option<usize>,
    pub accuracy_optimal: SegmentationGrid,
    pub dice_optimal: SegmentationGrid,
}

pub const FIGURE1_CSV_HEADER: [&str; 8] = [
    "a",
    "threshold",
    "best_dice",
    "accuracy_volume",
    "dice_volume",
    "symmetric_difference",
    "hole_filled",
    "protrusion_kept",
];

/// For every `a` in `sweep` writes, under `outdir`, `a<a>_sample<k>.pgm`
/// for `k < n_samples`, plus `a<a>_{marginal,accuracy,dice}.{npy,pgm}`;
/// then `phantom.npy` and `summary.csv`. Column `j` draws sample `k` with
/// seed `split(split(seed, j), k)`.
pub fn cmd_figure1(
    l: &SegmentationGrid,
    sweep: &[f64],
    b: f64,
    seed: u64,
    n_samples: usize,
    outdir: &Path,
    is_figure: bool,
) -> Result<Vec<Figure1Row>> {
    if sweep.windows(2).any(|w| w[0] > w[1]) || sweep.iter().any(|&a| !(a >= 0.0)) {
        return Err(Error::InvalidArgument(format!("sweep must be non-negative and sorted, got {sweep:?}")));
    }
    if l.shape().len() != 2 {
        return Err(Error::InvalidArgument(format!("figure needs a 2D phantom, got {:?}", l.shape())));
    }
    fs::create_dir_all(outdir)?;
    save_npy(outdir.join("phantom.npy"), l.grid())?;
    save_pgm(outdir.join("phantom.pgm"), l.grid())?;

    let hole = is_figure.then(|| FigureShape::hole_voxels(l.shape()));
    let protrusion = is_figure.then(|| FigureShape::protrusion_voxels(l.shape()));

    let mut rows = Vec::with_capacity(sweep.len());
    for (j, &a) in sweep.iter().enumerate() {
        let params = NoiseParams::new(a, b, split(seed, j as u64))?;
        let tag = format!("a{}", format_float(a));
        for k in 0..n_samples {
            let sample = sample_noisy_segmentation(l, &params.with_seed(split(params.seed, k as u64)))?;
            save_pgm(outdir.join(format!("{tag}_sample{k}.pgm")), sample.grid())?;
        }
        let marginal = compute_marginal(l, a)?;
        let acc = accuracy_optimal(&marginal);
        let opt = dice_optimal(&marginal)?;
        for (name, grid) in [("marginal", marginal.grid()), ("accuracy", acc.grid()), ("dice", opt.segmentation.grid())] {
            save_npy(outdir.join(format!("{tag}_{name}.npy")), grid)?;
            save_pgm(outdir.join(format!("{tag}_{name}.pgm")), grid)?;
        }
        let count = |voxels: &Option<Vec<usize>>| {
            voxels.as_ref().map(|v| v.iter().filter(|&&f| opt.segmentation.is_set(f)).count())
        };
        rows.push(Figure1Row {
            a,
            threshold: opt.threshold,
            best_dice: opt.best_dice,
            accuracy_volume: acc.count(),
            dice_volume: opt.segmentation.count(),
            symmetric_difference: acc.symmetric_difference(&opt.segmentation)?,
            hole_filled: count(&hole),
            protrusion_kept: count(&protrusion),
            accuracy_optimal: acc,
            dice_optimal: opt.segmentation,
        });
    }

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
            vec![
                format_float(r.a),
                format_float(r.threshold),
                format_float(r.best_dice),
                r.accuracy_volume.to_string(),
                r.dice_volume.to_string(),
                r.symmetric_difference.to_string(),
                opt(r.hole_filled),
                opt(r.protrusion_kept),
            ]
        })
        .collect();
    save_csv(outdir.join("summary.csv"), &FIGURE1_CSV_HEADER, &csv_rows)?;
    Ok(rows)
}
