//! Command-line front end: `mask`, `simulate`, `reconstruct`, `evaluate`.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mri_admm_core::crop::{crop_offset, kspace_crop_at};
use mri_admm_core::metrics::{self, LossWeights};
use mri_admm_core::phantom::{dynamic_phantom, simulate_coils};
use mri_admm_core::sampling::{achieved_acceleration, generate};
use mri_admm_core::sensitivity::{estimate_from_acs_with, AcsConfig};
use mri_admm_core::solver::admm_reconstruct_traced;
use mri_admm_core::{
    AdmmConfig, ComplexImage, DenoiserKind, DenoiserSpec, ForwardOperator, KSpaceData, MaskScheme, RealImage,
    SamplingMask, SensitivityMaps,
};

use crate::cks::{self, write_cks, CksObject};
use crate::{config, pgm};

/// Exit status for bad flags, inconsistent inputs or violated preconditions.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for IO and file-format failures.
pub const EXIT_FAILURE: i32 = 1;

/// An error caused by how the tool was invoked.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

macro_rules! usage {
    ($($arg:tt)*) => {
        return Err(UsageError(format!($($arg)*)).into())
    };
}

#[derive(Debug, Parser)]
#[command(name = "mri-admm", version, about = "Multi-coil MRI reconstruction by unrolled ADMM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an undersampling mask.
    #[command(args_override_self = true)]
    Mask(MaskArgs),
    /// Simulate a phantom acquisition with known coils.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Reconstruct images from undersampled k-space.
    #[command(args_override_self = true)]
    Reconstruct(ReconstructArgs),
    /// Compare a reconstruction against ground truth and write CSV.
    #[command(args_override_self = true)]
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Equispaced,
    Random,
    Gaussian2d,
    Radial,
    Spiral,
    Full,
}

impl From<SchemeArg> for MaskScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Equispaced => MaskScheme::Equispaced,
            SchemeArg::Random => MaskScheme::RandomRectilinear,
            SchemeArg::Gaussian2d => MaskScheme::Gaussian2d,
            SchemeArg::Radial => MaskScheme::PseudoRadial,
            SchemeArg::Spiral => MaskScheme::PseudoSpiral,
            SchemeArg::Full => MaskScheme::Full,
        }
    }
}

/// `HxW` or a single side length.
pub fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad size {s:?}: {e}"));
    let (h, w) = match s.split_once(['x', 'X']) {
        Some((h, w)) => (parse(h)?, parse(w)?),
        None => {
            let n = parse(s)?;
            (n, n)
        }
    };
    if h == 0 || w == 0 {
        return Err(format!("size {s:?} must be positive"));
    }
    Ok((h, w))
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    /// Grid size as HxW.
    #[arg(long, value_parser = parse_size)]
    pub size: (usize, usize),
    /// Nominal acceleration R ≥ 1.
    #[arg(long)]
    pub accel: f64,
    /// ACS columns (rectilinear) or fully sampled disc radius (gaussian2d).
    #[arg(long, default_value_t = 0)]
    pub acs: usize,
    #[arg(long)]
    pub seed: u64,
    /// Output CKS file.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional PGM preview.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Phantom side length (≥ 16).
    #[arg(long)]
    pub size: usize,
    #[arg(long, default_value_t = 4)]
    pub coils: usize,
    /// Number of cine frames; 1 gives the static phantom.
    #[arg(long, default_value_t = 1)]
    pub frames: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Mask applied to produce `kspace_masked.cks`.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Random spatial crop HxW applied to every output.
    #[arg(long, value_parser = parse_size)]
    pub crop: Option<(usize, usize)>,
    /// Seed for the crop offset; defaults to `--seed`.
    #[arg(long)]
    pub crop_seed: Option<u64>,
    /// Also write `truth.pgm`.
    #[arg(long)]
    pub pgm: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    ZeroFilled,
    Admm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DenoiserArg {
    Identity,
    L1,
    Tikhonov,
    Tv,
}

impl From<DenoiserArg> for DenoiserKind {
    fn from(d: DenoiserArg) -> Self {
        match d {
            DenoiserArg::Identity => DenoiserKind::Identity,
            DenoiserArg::L1 => DenoiserKind::L1SoftThreshold,
            DenoiserArg::Tikhonov => DenoiserKind::TikhonovSmooth,
            DenoiserArg::Tv => DenoiserKind::TvChambolle,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Input k-space, one file per volume.
    #[arg(long, required = true)]
    pub kspace: Vec<PathBuf>,
    /// Output complex image, one per `--kspace`.
    #[arg(long, required = true)]
    pub out: Vec<PathBuf>,
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long, conflicts_with = "estimate_sens", required_unless_present = "estimate_sens")]
    pub sens: Option<PathBuf>,
    /// Estimate coil maps from the mask's ACS region.
    #[arg(long)]
    pub estimate_sens: bool,
    /// Support threshold for `--estimate-sens`, relative to the RSS maximum.
    #[arg(long, default_value_t = 0.05)]
    pub acs_threshold: f64,
    #[arg(long, value_enum, default_value_t = Method::Admm)]
    pub method: Method,
    /// `static` solves each frame separately; `dynamic` solves the frame stack jointly.
    #[arg(long, value_enum, default_value_t = Mode::Static)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = DenoiserArg::Tikhonov)]
    pub denoiser: DenoiserArg,
    /// Prior weight α.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// ADMM rounds (default 16 static, 10 dynamic).
    #[arg(long = "T")]
    pub steps: Option<usize>,
    /// Gradient iterations per round (default 14 static, 8 dynamic).
    #[arg(long)]
    pub inner: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Fixed gradient step (default 1/(1+λ)).
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, default_value_t = mri_admm_core::solver::denoise::DEFAULT_TV_ITERATIONS)]
    pub tv_iters: usize,
    /// Magnitude image output, one per `--kspace`.
    #[arg(long)]
    pub magnitude_out: Vec<PathBuf>,
    /// PGM magnitude preview, one per `--kspace`.
    #[arg(long)]
    pub pgm: Vec<PathBuf>,
    /// Worker threads over independent slices and volumes.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RangeArg {
    /// One data range per volume (max of truth over all frames).
    Volume,
    /// One data range per frame.
    Frame,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Ground-truth image.
    #[arg(long)]
    pub truth: PathBuf,
    /// Reconstructed image.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, requires = "pred_kspace")]
    pub truth_kspace: Option<PathBuf>,
    #[arg(long, requires = "truth_kspace")]
    pub pred_kspace: Option<PathBuf>,
    /// Label for the volume_id column (default: truth file stem).
    #[arg(long)]
    pub volume_id: Option<String>,
    #[arg(long, value_enum, default_value_t = RangeArg::Volume)]
    pub data_range: RangeArg,
    /// Loss weights: ssim,ssim3d,l1,hfen1,nmae.
    #[arg(long, default_value = "1,1,1,1,3")]
    pub weights: String,
    /// CSV destination (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse, run and map the outcome to an exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(mri_admm_core::Error::InvalidArgument(_)) = cause.downcast_ref::<mri_admm_core::Error>() {
            return EXIT_USAGE;
        }
    }
    EXIT_FAILURE
}

pub fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Mask(a) => cmd_mask(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Reconstruct(a) => cmd_reconstruct(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
    }
}

fn build_mask(a: &MaskArgs) -> Result<SamplingMask> {
    let (h, w) = a.size;
    if a.accel.is_nan() || a.accel < 1.0 {
        usage!("--accel must be ≥ 1, got {}", a.accel);
    }
    let scheme = MaskScheme::from(a.scheme);
    if scheme.is_rectilinear() && a.acs > w {
        usage!("--acs {} exceeds the {w} columns of a {h}x{w} grid", a.acs);
    }
    if a.accel == 1.0 || scheme == MaskScheme::Full {
        return Ok(SamplingMask::full(h, w)?);
    }
    Ok(generate(scheme, h, w, a.accel, a.acs, a.seed)?)
}

pub fn cmd_mask(a: &MaskArgs) -> Result<()> {
    let mask = build_mask(a)?;
    write_cks(&a.out, &CksObject::Mask(mask.clone()))?;
    if let Some(p) = &a.pgm {
        pgm::mask_image(&mask).write(p)?;
    }
    println!(
        "sampled {} of {} points, achieved acceleration {:.4}",
        mask.sampled_count(),
        mask.height() * mask.width(),
        achieved_acceleration(&mask)
    );
    if mask.is_column_constant() {
        println!("sampled columns {}", mask.sampled_columns());
    }
    Ok(())
}

fn window_image(img: &ComplexImage, r0: usize, c0: usize, ch: usize, cw: usize) -> Result<ComplexImage> {
    let w = img.width();
    let mut data = Vec::with_capacity(img.n_frames() * ch * cw);
    for t in 0..img.n_frames() {
        let f = img.frame(t);
        for r in r0..r0 + ch {
            data.extend_from_slice(&f[r * w + c0..r * w + c0 + cw]);
        }
    }
    Ok(ComplexImage::new(img.n_frames(), ch, cw, data)?)
}

fn window_sens(s: &SensitivityMaps, r0: usize, c0: usize, ch: usize, cw: usize) -> Result<SensitivityMaps> {
    let w = s.width();
    let mut maps = Vec::with_capacity(s.n_coils() * ch * cw);
    for k in 0..s.n_coils() {
        for r in r0..r0 + ch {
            maps.extend_from_slice(&s.coil(k)[r * w + c0..r * w + c0 + cw]);
        }
    }
    let mut support = Vec::with_capacity(ch * cw);
    for r in r0..r0 + ch {
        support.extend_from_slice(&s.support()[r * w + c0..r * w + c0 + cw]);
    }
    Ok(SensitivityMaps::new(s.n_coils(), ch, cw, maps, support)?)
}

/// Zero every unsampled k-space location.
pub fn apply_mask(ksp: &KSpaceData, mask: &SamplingMask) -> Result<KSpaceData> {
    let (nc, nf, h, w) = ksp.dims();
    if (mask.height(), mask.width()) != (h, w) {
        usage!("mask is {}x{} but k-space is {h}x{w}", mask.height(), mask.width());
    }
    let mut out = ksp.clone();
    for k in 0..nc {
        for t in 0..nf {
            for (z, &s) in out.plane_mut(k, t).iter_mut().zip(mask.pattern()) {
                if !s {
                    *z = num_complex::Complex64::new(0.0, 0.0);
                }
            }
        }
    }
    Ok(out)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    if a.coils == 0 {
        usage!("--coils must be ≥ 1");
    }
    let mut truth = dynamic_phantom(a.size, a.frames)?;
    let (mut sens, mut ksp) = simulate_coils(&truth, a.coils, a.seed)?;
    if let Some((ch, cw)) = a.crop {
        let (r0, c0) = crop_offset(a.size, a.size, ch, cw, a.crop_seed.unwrap_or(a.seed))?;
        ksp = kspace_crop_at(&ksp, ch, cw, r0, c0)?;
        truth = window_image(&truth, r0, c0, ch, cw)?;
        sens = window_sens(&sens, r0, c0, ch, cw)?;
    }
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let out = |name: &str| a.out_dir.join(name);
    let mut written = vec![out("truth.cks"), out("kspace.cks"), out("sens.cks")];
    write_cks(&written[0], &CksObject::Image(truth.clone()))?;
    write_cks(&written[1], &CksObject::KSpace(ksp.clone()))?;
    write_cks(&written[2], &CksObject::SensMaps(sens))?;
    if let Some(m) = &a.mask {
        let mask = cks::read_mask(m)?;
        let path = out("kspace_masked.cks");
        write_cks(&path, &CksObject::KSpace(apply_mask(&ksp, &mask)?))?;
        written.push(path);
    }
    if a.pgm {
        let path = out("truth.pgm");
        pgm::write_magnitude(&path, &truth.magnitude())?;
        written.push(path);
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

/// Solver settings shared by every volume.
#[derive(Debug, Clone)]
pub struct ReconSettings {
    pub method: Method,
    pub mode: Mode,
    pub admm: AdmmConfig,
}

impl ReconSettings {
    pub fn from_args(a: &ReconstructArgs) -> Result<Self> {
        let base = match a.mode {
            Mode::Static => AdmmConfig::static_default(),
            Mode::Dynamic => AdmmConfig::dynamic_default(),
        };
        let kind = DenoiserKind::from(a.denoiser);
        let admm = AdmmConfig {
            steps: a.steps.unwrap_or(base.steps),
            inner_iters: a.inner.unwrap_or(base.inner_iters),
            lambda: a.lambda,
            step_size: a.step,
            denoiser: DenoiserSpec::from_kind(
                kind,
                if kind == DenoiserKind::Identity { 0.0 } else { a.alpha },
                a.tv_iters,
            ),
        };
        if a.method == Method::Admm {
            admm.validate()?;
        }
        Ok(Self { method: a.method, mode: a.mode, admm })
    }
}

/// Reconstruct one volume (all frames of `y`) with a prepared operator.
pub fn reconstruct_volume(y: &KSpaceData, op: &ForwardOperator, s: &ReconSettings) -> Result<ComplexImage> {
    Ok(match s.method {
        Method::ZeroFilled => op.adjoint(y)?,
        Method::Admm => admm_reconstruct_traced(y, op, &s.admm, |_| {})?.x,
    })
}

/// Run `f` over `0..n` on up to `jobs` threads, preserving index order.
pub fn parallel_map<T: Send>(n: usize, jobs: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, n.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let v = f(i);
                slots.lock().unwrap()[i] = Some(v);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|v| v.expect("every task ran")).collect()
}

fn check_counts(what: &str, got: usize, want: usize) -> Result<()> {
    if got != 0 && got != want {
        usage!("{got} {what} paths given for {want} --kspace inputs");
    }
    Ok(())
}

pub fn cmd_reconstruct(a: &ReconstructArgs) -> Result<()> {
    let n_vol = a.kspace.len();
    if a.out.len() != n_vol {
        usage!("{} --out paths given for {n_vol} --kspace inputs", a.out.len());
    }
    check_counts("--magnitude-out", a.magnitude_out.len(), n_vol)?;
    check_counts("--pgm", a.pgm.len(), n_vol)?;
    if a.jobs == 0 {
        usage!("--jobs must be ≥ 1");
    }
    let settings = ReconSettings::from_args(a)?;
    let mask = cks::read_mask(&a.mask)?;
    let volumes: Vec<KSpaceData> = a.kspace.iter().map(cks::read_kspace).collect::<Result<_>>()?;
    let mut ops = Vec::with_capacity(n_vol);
    for (path, y) in a.kspace.iter().zip(&volumes) {
        let (_, _, h, w) = y.dims();
        if (mask.height(), mask.width()) != (h, w) {
            usage!("{}: k-space is {h}x{w} but the mask is {}x{}", path.display(), mask.height(), mask.width());
        }
        let sens = match &a.sens {
            Some(p) => cks::read_sens(p)?,
            None => {
                let cfg = AcsConfig { threshold: a.acs_threshold };
                estimate_from_acs_with(&apply_mask(y, &mask)?, &mask, &cfg)
                    .with_context(|| format!("estimating coil maps for {}", path.display()))?
            }
        };
        if sens.n_coils() != y.n_coils() {
            usage!("{}: {} coils but the maps have {}", path.display(), y.n_coils(), sens.n_coils());
        }
        ops.push(ForwardOperator::new(mask.clone(), sens)?);
    }

    // Static mode treats every frame as an independent slice.
    let tasks: Vec<(usize, Option<usize>)> = match settings.mode {
        Mode::Static => {
            volumes.iter().enumerate().flat_map(|(v, y)| (0..y.n_frames()).map(move |t| (v, Some(t)))).collect()
        }
        Mode::Dynamic => (0..n_vol).map(|v| (v, None)).collect(),
    };
    let wall = Instant::now();
    let results = parallel_map(tasks.len(), a.jobs, |i| {
        let (v, frame) = tasks[i];
        let start = Instant::now();
        let out = match frame {
            Some(t) => reconstruct_volume(&volumes[v].frame(t), &ops[v], &settings),
            None => reconstruct_volume(&volumes[v], &ops[v], &settings),
        };
        (out, start.elapsed())
    });
    let mut per_volume: Vec<(Vec<ComplexImage>, Duration)> = (0..n_vol).map(|_| (Vec::new(), Duration::ZERO)).collect();
    for ((v, _), (out, took)) in tasks.iter().zip(results) {
        per_volume[*v].0.push(out?);
        per_volume[*v].1 += took;
    }
    for (v, (frames, took)) in per_volume.into_iter().enumerate() {
        let img = ComplexImage::stack(&frames)?;
        write_cks(&a.out[v], &CksObject::Image(img.clone()))?;
        let mag = img.magnitude();
        if let Some(p) = a.magnitude_out.get(v) {
            write_cks(
                p,
                &CksObject::Image(ComplexImage::from_real(mag.n_frames(), mag.height(), mag.width(), mag.data())?),
            )?;
        }
        if let Some(p) = a.pgm.get(v) {
            pgm::write_magnitude(p, &mag)?;
        }
        println!("volume {v} ({}): {:.3} s", a.kspace[v].display(), took.as_secs_f64());
    }
    println!("total wall time: {:.3} s", wall.elapsed().as_secs_f64());
    Ok(())
}

pub fn parse_weights(s: &str) -> Result<LossWeights> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| UsageError(format!("bad --weights {s:?}: {e}")))?;
    let [ssim, ssim3d, l1, hfen1, nmae] = vals[..] else {
        usage!("--weights needs 5 values (ssim,ssim3d,l1,hfen1,nmae), got {}", vals.len());
    };
    let w = LossWeights { ssim, ssim3d, l1, hfen1, nmae };
    w.validate()?;
    Ok(w)
}

/// One CSV record; `frame` is `None` for whole-volume rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub frame: Option<usize>,
    pub metric: &'static str,
    pub value: f64,
}

pub const CSV_HEADER: &str = "volume_id,frame,metric,value";

/// Every metric row for one volume. Undefined metrics are reported on
/// stderr and left out.
pub fn evaluate_rows(
    truth: &RealImage,
    pred: &RealImage,
    kspace: Option<(&KSpaceData, &KSpaceData)>,
    range: RangeArg,
    weights: &LossWeights,
) -> Result<Vec<MetricRow>> {
    if truth.dims() != pred.dims() {
        usage!("truth is {:?} but prediction is {:?} (frames, height, width)", truth.dims(), pred.dims());
    }
    if let Some((yt, yp)) = kspace {
        if yt.dims() != yp.dims() {
            usage!("k-space dims differ: {:?} vs {:?}", yt.dims(), yp.dims());
        }
    }
    let mut rows = Vec::new();
    let mut push = |frame: Option<usize>, metric: &'static str, r: mri_admm_core::Result<f64>| -> Result<()> {
        match r {
            Ok(value) => rows.push(MetricRow { frame, metric, value }),
            Err(e @ mri_admm_core::Error::UndefinedMetric(_)) => {
                let at = frame.map_or("volume".to_owned(), |t| format!("frame {t}"));
                eprintln!("warning: {metric} skipped at {at}: {e}");
            }
            Err(e) => return Err(e.into()),
        }
        Ok(())
    };
    let nf = truth.n_frames();
    let volume_range = truth.max();
    let range_of = |t: usize| match range {
        RangeArg::Volume => volume_range,
        RangeArg::Frame => truth.frame(t).data.iter().copied().fold(0.0, f64::max),
    };
    let mut ssim_sum = 0.0;
    for t in 0..nf {
        let (u, v) = (truth.frame(t), pred.frame(t));
        let s = metrics::ssim(u, v, range_of(t))?;
        ssim_sum += s;
        push(Some(t), "ssim", Ok(s))?;
        push(Some(t), "nmse", metrics::nmse(u.data, v.data))?;
        push(Some(t), "psnr", metrics::psnr(u.data, v.data, range_of(t)))?;
        push(Some(t), "hfen1", metrics::hfen1(u, v))?;
    }
    push(None, "ssim", Ok(ssim_sum / nf as f64))?;
    if nf >= metrics::SSIM_WINDOW {
        push(None, "ssim3d", metrics::ssim3d(truth, pred, volume_range))?;
    }
    push(None, "nmse", metrics::nmse(truth.data(), pred.data()))?;
    push(None, "psnr", metrics::psnr(truth.data(), pred.data(), volume_range))?;
    if let Some((yt, yp)) = kspace {
        push(None, "nmae", metrics::nmae(yt.data(), yp.data()))?;
        if nf > 1 && nf < metrics::SSIM_WINDOW && weights.ssim3d > 0.0 {
            eprintln!("warning: loss skipped: ssim3d needs at least {} frames, found {nf}", metrics::SSIM_WINDOW);
        } else {
            push(None, "loss", metrics::dual_domain_loss(truth, pred, yt, yp, weights))?;
        }
    }
    Ok(rows)
}

pub fn format_csv(volume_id: &str, rows: &[MetricRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let frame = r.frame.map_or("all".to_owned(), |t| t.to_string());
        out.push_str(&format!("{volume_id},{frame},{},{}\n", r.metric, r.value));
    }
    out
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "volume".to_owned(), |s| s.to_string_lossy().into_owned())
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let weights = parse_weights(&a.weights)?;
    let truth = cks::read_image(&a.truth)?.magnitude();
    let pred = cks::read_image(&a.pred)?.magnitude();
    let kspace = match (&a.truth_kspace, &a.pred_kspace) {
        (Some(t), Some(p)) => Some((cks::read_kspace(t)?, cks::read_kspace(p)?)),
        _ => None,
    };
    let rows = evaluate_rows(&truth, &pred, kspace.as_ref().map(|(t, p)| (t, p)), a.data_range, &weights)?;
    let id = a.volume_id.clone().unwrap_or_else(|| file_stem(&a.truth));
    if id.contains([',', '\n']) {
        usage!("--volume-id must not contain commas or newlines");
    }
    let csv = format_csv(&id, &rows);
    match &a.out {
        Some(p) => fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(())
}
