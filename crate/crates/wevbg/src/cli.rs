//! Command-line surface: subcommands that wire frame ingestion, model
//! training, segmentation, evaluation, and the numerical experiments into
//! runnable pipelines.
//!
//! Exit codes: 0 on success, 1 when the command line or configuration is
//! invalid, 2 when a validated run fails midway. Configuration is checked
//! before any output file is created, so a rejected run never leaves
//! partial results behind. All randomness flows from the single `--seed`
//! flag; repeated runs with the same arguments produce byte-identical
//! files. `WEVBG_THREADS` caps worker parallelism (default: all
//! available processors).

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::eigenmodel::Selection;
use crate::evalkit::{
    build_ground_truth, holdout_eval, subspace_grid, sweep_selections, write_eval_csv,
    write_subspace_csv, EvalReport,
};
use crate::frames::FrameLabel;
use crate::frames::FrameSequence;
use crate::io::{
    load_frames, load_labels, read_vector_csv, write_labels, write_mask_pgm, write_pgm,
    write_vector_csv,
};
use crate::scene::{generate_scene, SceneParams};
use crate::segmenter::{tile_blocks, train_block_bases, train_block_models, ModelSet};
use crate::theory::{
    check_expectation_chain, drift_experiment, estimate_beta, mean_delta, rotated_spectrum,
    synth_two_class, write_chain_csv, write_drift_csv, ArrivalOrder, TwoClassParams,
};

/// Runs one CLI invocation and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // prints help to stdout, errors to stderr
            let _ = e.print();
            return code;
        }
    };
    if let Err(f) = init_threads() {
        return f.report();
    }
    let result = match cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Model(args) => run_model(args),
        Command::Segment(args) => run_segment(args),
        Command::Eval(args) => run_eval(args),
        Command::Perturb(args) => run_perturb(args),
        Command::Theory(args) => run_theory(args),
        Command::Subspace(args) => run_subspace(args),
    };
    match result {
        Ok(()) => 0,
        Err(f) => f.report(),
    }
}

/// A failed run, split by whether the configuration was bad (exit 1) or a
/// validated computation broke midway (exit 2).
#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn report(&self) -> i32 {
        match self {
            Failure::Validation(msg) => {
                eprintln!("error: {msg}");
                1
            }
            Failure::Runtime(msg) => {
                eprintln!("error: {msg}");
                2
            }
        }
    }
}

fn validation(e: impl Display) -> Failure {
    Failure::Validation(e.to_string())
}

fn runtime(e: impl Display) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Applies the `WEVBG_THREADS` cap. Ignores the error from a pool that is
/// already running (repeat calls within one process).
fn init_threads() -> Result<(), Failure> {
    if let Ok(raw) = std::env::var("WEVBG_THREADS") {
        let n: usize = raw.parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            Failure::Validation(format!(
                "WEVBG_THREADS must be a positive integer, got {raw:?}"
            ))
        })?;
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

#[derive(Parser)]
#[command(
    name = "wevbg",
    version,
    about = "Block eigenspace background modeling and segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled sequence (scene or vector mode)
    Synth(SynthArgs),
    /// Train per-block background models and serialize them
    Model(ModelArgs),
    /// Apply trained models: backgrounds, residuals, and masks per frame
    Segment(SegmentArgs),
    /// Score selections by reconstruction and background RMSE
    Eval(EvalArgs),
    /// Track dominant-eigenvector drift across streaming updates
    Perturb(PerturbArgs),
    /// Monte-Carlo checks of the drift bounds and moment identities
    Theory(TheoryArgs),
    /// Project frames onto an eigenvector pair with grid representatives
    Subspace(SubspaceArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Vector mode: dimension of the two-class Gaussian samples
    #[arg(long, conflicts_with_all = ["height", "width"])]
    dim: Option<usize>,
    /// Vector mode: background sample count
    #[arg(long, default_value_t = 92)]
    n_bg: usize,
    /// Vector mode: foreground sample count
    #[arg(long, default_value_t = 29)]
    n_fg: usize,
    /// Vector mode: background mean (every coordinate)
    #[arg(long, default_value_t = 0.3)]
    mu_bg: f64,
    /// Vector mode: foreground mean (every coordinate)
    #[arg(long, default_value_t = 0.7)]
    mu_fg: f64,
    /// Vector mode: background noise level
    #[arg(long, default_value_t = 0.002)]
    sigma_bg: f64,
    /// Vector mode: foreground noise level
    #[arg(long, default_value_t = 0.04)]
    sigma_fg: f64,
    /// Vector mode: arrival order (given | interleaved | shuffled)
    #[arg(long, default_value = "interleaved")]
    order: String,
    /// Scene mode: frame height in pixels
    #[arg(long, requires = "width")]
    height: Option<usize>,
    /// Scene mode: frame width in pixels
    #[arg(long, requires = "height")]
    width: Option<usize>,
    /// Scene mode: total frame count
    #[arg(long, default_value_t = 121)]
    frames: usize,
    /// Scene mode: frames containing the moving object
    #[arg(long, default_value_t = 4)]
    object_frames: usize,
    /// Scene mode: object area as a fraction of the frame
    #[arg(long, default_value_t = 0.10)]
    fraction: f64,
    /// Scene mode: object pixel intensity
    #[arg(long, default_value_t = 0.85)]
    intensity: f64,
    /// Scene mode: pixel noise standard deviation
    #[arg(long, default_value_t = 0.035)]
    noise: f64,
    /// Seed for all generated randomness
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

fn run_synth(args: SynthArgs) -> Result<(), Failure> {
    match (args.dim, args.height, args.width) {
        (Some(dim), None, None) => {
            let params = TwoClassParams {
                dim,
                mu_b: vec![args.mu_bg; dim],
                mu_f: vec![args.mu_fg; dim],
                sigma_b: vec![args.sigma_bg; dim],
                sigma_f: vec![args.sigma_fg; dim],
                n_b: args.n_bg,
                n_f: args.n_fg,
                seed: args.seed,
            };
            let order = ArrivalOrder::parse(&args.order).map_err(validation)?;
            let seq = synth_two_class(&params, order).map_err(validation)?;
            fs::create_dir_all(&args.out).map_err(runtime)?;
            write_vector_csv(&args.out.join("vectors.csv"), &seq).map_err(runtime)?;
            let labels = seq.labels.as_ref().expect("two-class output is labeled");
            write_labels(&args.out.join("labels.csv"), labels).map_err(runtime)?;
            println!(
                "wrote vectors.csv ({} samples, dim {dim}) and labels.csv to {}",
                seq.len(),
                args.out.display()
            );
            Ok(())
        }
        (None, Some(height), Some(width)) => {
            let params = SceneParams {
                height,
                width,
                n_frames: args.frames,
                n_object_frames: args.object_frames,
                object_fraction: args.fraction,
                object_intensity: args.intensity,
                noise_sigma: args.noise,
                seed: args.seed,
            };
            let scene = generate_scene(&params).map_err(validation)?;
            // frames get their own subdirectory so that a frame pattern
            // like *.pgm can never pick up the ground-truth image
            let frames_dir = args.out.join("frames");
            fs::create_dir_all(&frames_dir).map_err(runtime)?;
            let seq = &scene.sequence;
            let pad = pad_width(seq.len());
            for i in 0..seq.len() {
                let name = format!("frame_{i:0pad$}.pgm");
                write_pgm(&frames_dir.join(name), height, width, seq.frame(i)).map_err(runtime)?;
            }
            write_pgm(
                &args.out.join("truth.pgm"),
                height,
                width,
                &scene.true_background,
            )
            .map_err(runtime)?;
            let labels = seq.labels.as_ref().expect("scene output is labeled");
            write_labels(&args.out.join("labels.csv"), labels).map_err(runtime)?;
            println!(
                "wrote {} frames ({height}x{width}) to frames/, plus truth.pgm and labels.csv, under {}",
                seq.len(),
                args.out.display()
            );
            Ok(())
        }
        _ => Err(Failure::Validation(
            "choose one mode: --dim for vector output, or --height and --width for a scene".into(),
        )),
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Directory of input frames
    #[arg(long)]
    input: PathBuf,
    /// Filename wildcard for frame files
    #[arg(long, default_value = "*.pgm")]
    pattern: String,
    /// Eigenvector subset: strongest:k | weakest:k | idx:1,3,5 | all
    #[arg(long)]
    selection: String,
    /// Block size in pixels: one number for square blocks, or HxW
    #[arg(long)]
    block: String,
    /// Output directory for the serialized model set
    #[arg(long)]
    out: PathBuf,
}

fn run_model(args: ModelArgs) -> Result<(), Failure> {
    let selection = Selection::parse(&args.selection).map_err(validation)?;
    let block = parse_block(&args.block)?;
    let seq = load_frames(&args.input, &args.pattern).map_err(validation)?;
    let grid = tile_blocks((seq.height, seq.width), block).map_err(validation)?;
    let set = train_block_models(&seq, &grid, &selection).map_err(runtime)?;
    set.save(&args.out).map_err(runtime)?;
    println!(
        "trained {} block models ({}x{} blocks) on {} frames ({}x{}), selection {}",
        grid.n_blocks(),
        block.0,
        block.1,
        seq.len(),
        seq.height,
        seq.width,
        selection.descriptor()
    );
    println!("wrote model set to {}", args.out.display());
    Ok(())
}

#[derive(Args)]
struct SegmentArgs {
    /// Directory of input frames
    #[arg(long)]
    input: PathBuf,
    /// Filename wildcard for frame files
    #[arg(long, default_value = "*.pgm")]
    pattern: String,
    /// Directory holding a serialized model set
    #[arg(long)]
    models: PathBuf,
    /// Foreground threshold on absolute residuals
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    /// Output directory for backgrounds, residuals, and masks
    #[arg(long)]
    out: PathBuf,
}

fn run_segment(args: SegmentArgs) -> Result<(), Failure> {
    if !(args.tau.is_finite() && args.tau >= 0.0) {
        return Err(Failure::Validation(format!(
            "threshold {} must be finite and non-negative",
            args.tau
        )));
    }
    let set = ModelSet::load(&args.models).map_err(validation)?;
    let seq = load_frames(&args.input, &args.pattern).map_err(validation)?;
    if (seq.height, seq.width) != set.grid.frame_shape {
        return Err(Failure::Validation(format!(
            "frames are {}x{}, models expect {}x{}",
            seq.height, seq.width, set.grid.frame_shape.0, set.grid.frame_shape.1
        )));
    }
    fs::create_dir_all(&args.out).map_err(runtime)?;
    let pad = pad_width(seq.len());
    let mut fg_total = 0usize;
    for i in 0..seq.len() {
        let s = set.segment(seq.frame(i), args.tau).map_err(runtime)?;
        fg_total += s.mask.iter().filter(|&&m| m).count();
        let (h, w) = (seq.height, seq.width);
        write_pgm(
            &args.out.join(format!("background_{i:0pad$}.pgm")),
            h,
            w,
            &s.background,
        )
        .map_err(runtime)?;
        write_pgm(
            &args.out.join(format!("residual_{i:0pad$}.pgm")),
            h,
            w,
            &s.residual,
        )
        .map_err(runtime)?;
        write_mask_pgm(&args.out.join(format!("mask_{i:0pad$}.pgm")), h, w, &s.mask)
            .map_err(runtime)?;
    }
    let fg_fraction = fg_total as f64 / (seq.len() * seq.pixels()) as f64;
    println!(
        "segmented {} frames at tau {}; mean foreground fraction {fg_fraction:.4}",
        seq.len(),
        args.tau
    );
    println!(
        "wrote backgrounds, residuals, and masks to {}",
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of input frames
    #[arg(long)]
    input: PathBuf,
    /// Filename wildcard for frame files
    #[arg(long, default_value = "*.pgm")]
    pattern: String,
    /// Per-frame labels CSV (frame,label with bg/fg entries)
    #[arg(long)]
    labels: PathBuf,
    /// Comma-separated selections, e.g. "strongest:1,all,weakest:7"
    #[arg(long)]
    selections: String,
    /// Block size in pixels: one number for square blocks, or HxW
    #[arg(long)]
    block: String,
    /// Train on the first K frames and score only the rest
    #[arg(long)]
    train_count: Option<usize>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn run_eval(args: EvalArgs) -> Result<(), Failure> {
    let selections = parse_selection_list(&args.selections)?;
    let block = parse_block(&args.block)?;
    let mut seq = load_frames(&args.input, &args.pattern).map_err(validation)?;
    let labels = load_labels(&args.labels, seq.len()).map_err(validation)?;
    seq.set_labels(labels).map_err(validation)?;
    let grid = tile_blocks((seq.height, seq.width), block).map_err(validation)?;
    let gt = build_ground_truth(&seq).map_err(validation)?;

    let report = match args.train_count {
        None => sweep_selections(&seq, &grid, &selections, &gt).map_err(runtime)?,
        Some(k) => {
            if k < 2 || k >= seq.len() {
                return Err(Failure::Validation(format!(
                    "--train-count {k} must be in 2..{} to leave held-out frames",
                    seq.len()
                )));
            }
            let train = seq.window(0, k).map_err(validation)?;
            let held_out = seq.window(k, seq.len()).map_err(validation)?;
            let sets = selections
                .iter()
                .map(|s| train_block_models(&train, &grid, s))
                .collect::<crate::Result<Vec<ModelSet>>>()
                .map_err(runtime)?;
            let mut report = holdout_eval(&sets, &held_out, &gt).map_err(runtime)?;
            // report frame positions in the full sequence, not the window
            for row in &mut report.rows {
                row.frame_index += k;
            }
            report
        }
    };
    write_eval_csv(&args.out, &report).map_err(runtime)?;
    print_eval_summary(&report);
    println!("wrote {} rows to {}", report.rows.len(), args.out.display());
    Ok(())
}

/// Per-selection mean background RMSE, with the 0-255 grayscale
/// equivalent for readability.
fn print_eval_summary(report: &EvalReport) {
    for id in &report.selections {
        let vals: Vec<f64> = report.column(id).iter().map(|r| r.bg_rmse).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        println!(
            "selection {id}: mean background RMSE {mean:.6} ({:.2}/255)",
            mean * 255.0
        );
    }
}

#[derive(Args)]
struct PerturbArgs {
    /// Directory of frames, or a vectors CSV from vector-mode synth
    #[arg(long)]
    input: PathBuf,
    /// Filename wildcard for frame files (directories only)
    #[arg(long, default_value = "*.pgm")]
    pattern: String,
    /// Per-frame labels CSV (frame,label with bg/fg entries)
    #[arg(long)]
    labels: PathBuf,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn run_perturb(args: PerturbArgs) -> Result<(), Failure> {
    let mut seq = load_input(&args.input, &args.pattern)?;
    let labels = load_labels(&args.labels, seq.len()).map_err(validation)?;
    seq.set_labels(labels).map_err(validation)?;
    let records = drift_experiment(&seq).map_err(runtime)?;
    write_drift_csv(&args.out, &records).map_err(runtime)?;
    let bg = mean_delta(&records, FrameLabel::Background);
    let fg = mean_delta(&records, FrameLabel::Foreground);
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6}"));
    println!(
        "wrote {} drift rows to {} (mean delta: bg {}, fg {})",
        records.len(),
        args.out.display(),
        fmt(bg),
        fmt(fg)
    );
    Ok(())
}

#[derive(Args)]
struct TheoryArgs {
    /// Which check to run: chain (moment identities) or beta (drift ratio)
    #[arg(long, default_value = "chain")]
    check: String,
    /// Monte-Carlo trial count
    #[arg(long, default_value_t = 10000)]
    trials: usize,
    /// Chain: use equal class counts instead of the 92/29 split
    #[arg(long)]
    balanced: bool,
    /// Beta: comma-separated eigenvalues of the test matrix
    #[arg(long, default_value = "4.0,1.0,0.5,0.25,0.1")]
    spectrum: String,
    /// Beta: cap on the squared perturbation norm
    #[arg(long, default_value_t = 0.01)]
    cap: f64,
    /// Seed for all generated randomness
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn run_theory(args: TheoryArgs) -> Result<(), Failure> {
    match args.check.as_str() {
        "chain" => {
            let params = if args.balanced {
                TwoClassParams::balanced_reference(args.seed)
            } else {
                TwoClassParams::reference(args.seed)
            };
            let report = check_expectation_chain(&params, args.trials).map_err(validation)?;
            write_chain_csv(&args.out, &report).map_err(runtime)?;
            for m in &report.metrics {
                let status = if m.pass { "pass" } else { "FAIL" };
                println!(
                    "{status}  {} = {:.6e} (se {:.2e})",
                    m.metric, m.estimate, m.std_error
                );
            }
            println!(
                "wrote {} metrics ({} trials, {} skipped) to {}",
                report.metrics.len(),
                report.trials,
                report.skipped,
                args.out.display()
            );
            Ok(())
        }
        "beta" => {
            let spectrum = parse_floats(&args.spectrum)?;
            let matrix = rotated_spectrum(&spectrum, args.seed).map_err(validation)?;
            let estimate =
                estimate_beta(&matrix, args.trials, args.cap, args.seed).map_err(validation)?;
            let csv = format!(
                "max_ratio,trials,norm_sq_cap\n{},{},{}\n",
                estimate.max_ratio, estimate.trials, args.cap
            );
            fs::write(&args.out, csv).map_err(runtime)?;
            println!(
                "max rotation ratio {:.6} over {} trials (cap {}); wrote {}",
                estimate.max_ratio,
                estimate.trials,
                args.cap,
                args.out.display()
            );
            Ok(())
        }
        other => Err(Failure::Validation(format!(
            "unknown check {other:?}: expected chain or beta"
        ))),
    }
}

#[derive(Args)]
struct SubspaceArgs {
    /// Directory of frames, or a vectors CSV from vector-mode synth
    #[arg(long)]
    input: PathBuf,
    /// Filename wildcard for frame files (directories only)
    #[arg(long, default_value = "*.pgm")]
    pattern: String,
    /// Optional per-frame labels CSV carried into the output
    #[arg(long)]
    labels: Option<PathBuf>,
    /// 1-based component pair, strongest first, e.g. "1,2"
    #[arg(long, default_value = "1,2")]
    components: String,
    /// Vertex grid resolution per axis
    #[arg(long, default_value_t = 5)]
    grid: usize,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn run_subspace(args: SubspaceArgs) -> Result<(), Failure> {
    let pair = parse_component_pair(&args.components)?;
    let mut seq = load_input(&args.input, &args.pattern)?;
    if let Some(path) = &args.labels {
        let labels = load_labels(path, seq.len()).map_err(validation)?;
        seq.set_labels(labels).map_err(validation)?;
    }
    let full = tile_blocks((seq.height, seq.width), (seq.height, seq.width)).map_err(validation)?;
    let basis = train_block_bases(&seq, &full)
        .map_err(runtime)?
        .into_iter()
        .next()
        .expect("a full-frame grid has exactly one block");
    let points = subspace_grid(&seq, &basis, pair, args.grid).map_err(runtime)?;
    write_subspace_csv(&args.out, &points).map_err(runtime)?;
    let reps = points
        .points
        .iter()
        .filter(|p| p.is_vertex_representative)
        .count();
    println!(
        "wrote {} points ({} grid representatives) for components ({}, {}) to {}",
        points.points.len(),
        reps,
        pair.0,
        pair.1,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------
// Argument parsing helpers
// ---------------------------------------------------------------------

/// Frames come from a directory of images, or from a vectors CSV when the
/// path names a `.csv` file.
fn load_input(input: &Path, pattern: &str) -> Result<FrameSequence, Failure> {
    let is_csv = input
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        read_vector_csv(input).map_err(validation)
    } else {
        load_frames(input, pattern).map_err(validation)
    }
}

/// `"40"` means square 40x40 blocks; `"40x32"` sets height and width.
fn parse_block(s: &str) -> Result<(usize, usize), Failure> {
    let invalid = || Failure::Validation(format!("block size {s:?}: expected N or NxM"));
    let parse_side = |t: &str| t.parse::<usize>().ok().filter(|&v| v > 0);
    match s.split_once('x') {
        None => {
            let side = parse_side(s).ok_or_else(invalid)?;
            Ok((side, side))
        }
        Some((h, w)) => Ok((
            parse_side(h).ok_or_else(invalid)?,
            parse_side(w).ok_or_else(invalid)?,
        )),
    }
}

/// Splits a comma-separated selection list. Bare numeric tokens continue
/// a preceding `idx:` selection, so `"idx:1,3,all"` is two selections.
fn parse_selection_list(s: &str) -> Result<Vec<Selection>, Failure> {
    let mut specs: Vec<String> = Vec::new();
    for token in s.split(',') {
        let t = token.trim();
        let continues_idx = !t.is_empty()
            && t.chars().all(|c| c.is_ascii_digit())
            && specs.last().is_some_and(|p| p.starts_with("idx:"));
        if continues_idx {
            let last = specs.last_mut().expect("checked non-empty");
            last.push(',');
            last.push_str(t);
        } else {
            specs.push(t.to_string());
        }
    }
    let selections = specs
        .iter()
        .map(|spec| Selection::parse(spec))
        .collect::<crate::Result<Vec<Selection>>>()
        .map_err(validation)?;
    if selections.is_empty() {
        return Err(Failure::Validation("no selections given".into()));
    }
    Ok(selections)
}

fn parse_component_pair(s: &str) -> Result<(usize, usize), Failure> {
    let invalid = || {
        Failure::Validation(format!(
            "component pair {s:?}: expected two 1-based indices like \"1,2\""
        ))
    };
    let (i, j) = s.split_once(',').ok_or_else(invalid)?;
    let parse = |t: &str| t.trim().parse::<usize>().ok().filter(|&v| v > 0);
    Ok((parse(i).ok_or_else(invalid)?, parse(j).ok_or_else(invalid)?))
}

fn parse_floats(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Validation(format!("{t:?} in {s:?} is not a number")))
        })
        .collect()
}

/// Zero-pad width for frame-indexed filenames, at least three digits so
/// lexicographic and numeric order agree for typical sequence lengths.
fn pad_width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len().max(3)
}
