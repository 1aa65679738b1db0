//! Batch front end behind the `scalepath` binary.
//!
//! Four subcommands: `smooth` writes one image per input and target level,
//! `path` records every snapshot of a path, `bench` times the projection
//! strategies and `spectrum` compares two image sets in the frequency domain.
//!
//! Files are processed on a bounded worker pool; the manifest is written once
//! by the calling thread, in input-sorted order. Artifacts carry no
//! timestamps, so repeated runs produce identical bytes. Timestamps and
//! machine details only go to the optional `--report` file.
//!
//! Settings resolve as command-line flag, then config file (`key = value`
//! lines, `#` comments), then built-in default.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::dynamics::{HyperParams, StepSize};
use crate::error::{Error, Result};
use crate::io::{self, ColorMode};
use crate::lattice::{Image, ImagePlane, LatticeGraph};
use crate::oracle::{self, BenchReport};
use crate::path::{default_level, run_path, PathConfig, Snapshot};
use crate::spectral::{expected_spectral_diff, Spectrum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const MANIFEST_NAME: &str = "manifest.csv";
pub const MANIFEST_HEADER: &str =
    "file,status,achieved_sparsity,iterations,kappa,beta,alpha,levels,input_sha256,message";

/// Levels recorded by `path` when none are given.
pub const PATH_LEVELS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Parser, Debug)]
#[command(
    name = "scalepath",
    version,
    about = "Edge-sparse image smoothing along an inverse scale path"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Smooth images to one or more sparsity levels.
    Smooth(JobArgs),
    /// Record projected snapshots at several levels along the path.
    Path(JobArgs),
    /// Time graph, dense and least-squares projections.
    Bench(BenchArgs),
    /// Average frequency-domain difference between two image sets.
    Spectrum(SpectrumArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct HyperArgs {
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Step size; defaults to 1 / (kappa * |H|).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct JobArgs {
    /// Image file or directory of images.
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Target sparsity level in (0, 1]; repeat for several.
    #[arg(long = "level")]
    pub levels: Vec<f64>,
    #[arg(long, value_enum)]
    pub color: Option<ColorMode>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub workers: Option<usize>,
    /// key = value file with defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run report with timing and machine details.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Image size, `N` or `HxW`.
    #[arg(long, default_value = "84")]
    pub size: String,
    #[arg(long, default_value_t = 15_000)]
    pub iters: usize,
    /// Number of projections spread over the run.
    #[arg(long, default_value_t = 5)]
    pub projections: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    pub originals: PathBuf,
    pub smoothed: PathBuf,
    /// Cut-off radius of the low band.
    #[arg(long, default_value_t = 6.0)]
    pub radius: f64,
    /// Suffix stripped from smoothed file stems before matching, e.g. `_s0.6`.
    #[arg(long, default_value = "")]
    pub suffix: String,
    /// Output directory for the heat map and energy summary.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit status for an error that aborted a whole command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) | Error::InvalidDimensions { .. } | Error::UnsupportedFormat(_) => {
            EXIT_USAGE
        }
        _ => EXIT_FAILURE,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Smooth(args) | Command::Path(args) => {
            let snapshots = matches!(cli.command, Command::Path(_));
            let job = JobSpec::from_args(args, snapshots)?;
            let start = Instant::now();
            let outcome = run_job(&job)?;
            let counts = outcome.counts();
            println!(
                "{} file(s): {} ok, {} truncated, {} skipped, {} failed; manifest {}",
                outcome.rows.len(),
                counts[0],
                counts[1],
                counts[2],
                counts[3],
                outcome.manifest_path.display()
            );
            if let Some(path) = &args.report {
                let name = if snapshots { "path" } else { "smooth" };
                let mut lines = vec![
                    ("files".to_string(), outcome.rows.len().to_string()),
                    ("ok".into(), counts[0].to_string()),
                    ("truncated".into(), counts[1].to_string()),
                    ("skipped".into(), counts[2].to_string()),
                    ("failed".into(), counts[3].to_string()),
                    ("workers".into(), job.workers.to_string()),
                ];
                lines.push((
                    "elapsed_seconds".into(),
                    format!("{:.3}", start.elapsed().as_secs_f64()),
                ));
                write_report(path, name, &lines)?;
            }
            Ok(outcome.exit_code())
        }
        Command::Bench(args) => {
            let (h, w) = parse_size(&args.size)?;
            let report = cmd_bench(h, w, args.iters, args.projections)?;
            let text = report.to_key_value();
            print!("{text}");
            if let Some(path) = &args.report {
                let lines: Vec<(String, String)> = text
                    .lines()
                    .filter_map(|l| l.split_once('='))
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect();
                write_report(path, "bench", &lines)?;
            }
            Ok(if report.equivalent() {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
        Command::Spectrum(args) => {
            let report = cmd_spectrum(&args.originals, &args.smoothed, args.radius, &args.suffix)?;
            report.write(&args.out)?;
            print!("{}", report.summary());
            if let Some(path) = &args.report {
                let lines: Vec<(String, String)> = report
                    .summary()
                    .lines()
                    .filter_map(|l| l.split_once('='))
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect();
                write_report(path, "spectrum", &lines)?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// A fully resolved smoothing job.
#[derive(Clone, Debug, PartialEq)]
pub struct JobSpec {
    pub input: PathBuf,
    pub out: PathBuf,
    /// `None` selects the size-dependent default for `smooth` and
    /// [`PATH_LEVELS`] for `path`.
    pub levels: Option<Vec<f64>>,
    pub color: ColorMode,
    pub hp: HyperParams,
    pub workers: usize,
    /// Record every snapshot (`path`) instead of one image per level.
    pub snapshots: bool,
}

impl JobSpec {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        JobSpec {
            input: input.into(),
            out: out.into(),
            levels: None,
            color: ColorMode::Auto,
            hp: HyperParams::default(),
            workers: default_workers(),
            snapshots: false,
        }
    }

    /// Merges flags over the optional config file over the defaults.
    pub fn from_args(args: &JobArgs, snapshots: bool) -> Result<Self> {
        let mut job = JobSpec::new(&args.input, &args.out);
        job.snapshots = snapshots;
        if let Some(path) = &args.config {
            Config::load(path)?.apply(&mut job)?;
        }
        if !args.levels.is_empty() {
            job.levels = Some(args.levels.clone());
        }
        if let Some(c) = args.color {
            job.color = c;
        }
        let h = &args.hyper;
        if let Some(k) = h.kappa {
            job.hp.kappa = k;
        }
        if let Some(b) = h.beta {
            job.hp.beta = b;
        }
        if let Some(a) = h.alpha {
            job.hp.alpha = StepSize::Explicit(a);
        }
        if let Some(n) = h.max_iters {
            job.hp.max_iters = n;
        }
        if let Some(n) = args.workers {
            job.workers = n;
        }
        job.validate()?;
        Ok(job)
    }

    /// Checks everything that does not depend on the input images.
    pub fn validate(&self) -> Result<()> {
        if let Some(levels) = &self.levels {
            PathConfig::new(levels.clone(), self.hp.clone()).validated_levels()?;
        }
        self.hp.resolve(&LatticeGraph::new(1, 1)?)?;
        if self.workers == 0 {
            return Err(Error::Parameter("workers must be positive".into()));
        }
        Ok(())
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Parsed `key = value` config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    const KEYS: [&'static str; 7] = [
        "kappa",
        "beta",
        "alpha",
        "max_iters",
        "levels",
        "color",
        "workers",
    ];

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parameter(format!("config line {}: expected key = value", n + 1))
            })?;
            let key = k.trim().replace('-', "_");
            if !Self::KEYS.contains(&key.as_str()) {
                return Err(Error::Parameter(format!(
                    "config line {}: unknown key '{key}'",
                    n + 1
                )));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Parameter(format!("config key {key}: cannot parse '{v}'")))
            })
            .transpose()
    }

    pub fn apply(&self, job: &mut JobSpec) -> Result<()> {
        if let Some(k) = self.number("kappa")? {
            job.hp.kappa = k;
        }
        if let Some(b) = self.number("beta")? {
            job.hp.beta = b;
        }
        match self.get("alpha") {
            None | Some("auto") => {}
            Some(_) => job.hp.alpha = StepSize::Explicit(self.number("alpha")?.unwrap_or_default()),
        }
        if let Some(n) = self.number("max_iters")? {
            job.hp.max_iters = n;
        }
        if let Some(n) = self.number("workers")? {
            job.workers = n;
        }
        if let Some(c) = self.get("color") {
            job.color = c.parse()?;
        }
        if let Some(list) = self.get("levels") {
            let levels = list
                .split(',')
                .map(|l| {
                    l.trim().parse().map_err(|_| {
                        Error::Parameter(format!("config key levels: cannot parse '{l}'"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            job.levels = Some(levels);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The iteration budget ran out before the highest level was reached.
    Truncated,
    /// Not a supported image format.
    Skipped,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Truncated => "truncated",
            Status::Skipped => "skipped",
            Status::Error => "error",
        }
    }
}

/// One manifest line. Multi-level values are joined with `;`.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestRow {
    pub file: String,
    pub status: Status,
    pub achieved: Vec<f64>,
    pub iterations: Vec<usize>,
    /// `(kappa, beta, alpha)` actually used.
    pub params: Option<(f64, f64, f64)>,
    pub levels: Vec<f64>,
    pub sha256: String,
    pub message: String,
    pub outputs: Vec<PathBuf>,
}

impl ManifestRow {
    fn new(file: String, status: Status, message: impl Into<String>) -> Self {
        ManifestRow {
            file,
            status,
            achieved: Vec::new(),
            iterations: Vec::new(),
            params: None,
            levels: Vec::new(),
            sha256: String::new(),
            message: message.into(),
            outputs: Vec::new(),
        }
    }

    /// Manifest fields in header order; multi-valued fields are joined by `;`.
    pub fn fields(&self) -> [String; 10] {
        let join = |v: Vec<String>| v.join(";");
        let (k, b, a) = match self.params {
            Some((k, b, a)) => (k.to_string(), b.to_string(), a.to_string()),
            None => Default::default(),
        };
        [
            self.file.clone(),
            self.status.as_str().to_string(),
            join(self.achieved.iter().map(|s| format!("{s:.6}")).collect()),
            join(self.iterations.iter().map(usize::to_string).collect()),
            k,
            b,
            a,
            join(self.levels.iter().map(|&l| level_tag(l)).collect()),
            self.sha256.clone(),
            self.message.replace(['\n', '\r'], " "),
        ]
    }
}

fn write_csv<R: AsRef<[u8]>>(
    path: &Path,
    rows: impl IntoIterator<Item = impl IntoIterator<Item = R>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e.into(),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Level as used in file names: shortest round-trip form with at least one
/// decimal, so `1.0` and not `1`.
pub fn level_tag(level: f64) -> String {
    let s = level.to_string();
    if s.contains('.') {
        s
    } else {
        format!("{level:.1}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobOutcome {
    pub rows: Vec<ManifestRow>,
    pub manifest_path: PathBuf,
}

impl JobOutcome {
    /// Number of rows that are ok, truncated, skipped and failed.
    pub fn counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for r in &self.rows {
            c[match r.status {
                Status::Ok => 0,
                Status::Truncated => 1,
                Status::Skipped => 2,
                Status::Error => 3,
            }] += 1;
        }
        c
    }

    /// Nonzero as soon as one file failed.
    pub fn exit_code(&self) -> i32 {
        if self.counts()[3] > 0 {
            EXIT_FAILURE
        } else {
            EXIT_OK
        }
    }
}

pub fn cmd_smooth(job: &JobSpec) -> Result<JobOutcome> {
    run_job(&JobSpec {
        snapshots: false,
        ..job.clone()
    })
}

pub fn cmd_path(job: &JobSpec) -> Result<JobOutcome> {
    run_job(&JobSpec {
        snapshots: true,
        ..job.clone()
    })
}

fn run_job(job: &JobSpec) -> Result<JobOutcome> {
    job.validate()?;
    let inputs = collect_inputs(&job.input)?;
    fs::create_dir_all(&job.out)?;
    if job.input.is_dir() && fs::canonicalize(&job.input)? == fs::canonicalize(&job.out)? {
        return Err(Error::Parameter(
            "output directory must differ from the input directory".into(),
        ));
    }

    // two inputs with the same stem would write the same output names
    let mut seen = BTreeSet::new();
    let clash: Vec<bool> = inputs
        .iter()
        .map(|(path, _)| io::is_supported(path) && !seen.insert(stem(path)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<ManifestRow> = pool.install(|| {
        inputs
            .par_iter()
            .zip(clash.par_iter())
            .map(|((path, name), &clash)| {
                if clash {
                    ManifestRow::new(
                        name.clone(),
                        Status::Error,
                        "another input has the same file stem",
                    )
                } else {
                    process_file(job, path, name)
                }
            })
            .collect()
    });

    let manifest_path = job.out.join(MANIFEST_NAME);
    let header: Vec<String> = MANIFEST_HEADER.split(',').map(str::to_string).collect();
    write_csv(
        &manifest_path,
        std::iter::once(header).chain(rows.iter().map(|r| r.fields().to_vec())),
    )?;
    Ok(JobOutcome {
        rows,
        manifest_path,
    })
}

/// Files to process with their manifest names, sorted by name. A directory
/// is read without recursion.
fn collect_inputs(input: &Path) -> Result<Vec<(PathBuf, String)>> {
    if input.is_dir() {
        let mut files = Vec::new();
        for entry in fs::read_dir(input)? {
            let entry = entry?;
            if entry.file_type()?.is_file() {
                files.push((
                    entry.path(),
                    entry.file_name().to_string_lossy().into_owned(),
                ));
            }
        }
        if files.is_empty() {
            return Err(Error::Parameter(format!("no files in {}", input.display())));
        }
        files.sort_by(|a, b| a.1.cmp(&b.1));
        Ok(files)
    } else if input.is_file() {
        let name = input
            .file_name()
            .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        Ok(vec![(input.to_path_buf(), name)])
    } else {
        Err(Error::Parameter(format!(
            "input {} does not exist",
            input.display()
        )))
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

fn process_file(job: &JobSpec, path: &Path, name: &str) -> ManifestRow {
    if !io::is_supported(path) {
        log::warn!("skipping {name}: unsupported format");
        return ManifestRow::new(name.to_string(), Status::Skipped, "unsupported format");
    }
    let mut row = ManifestRow::new(name.to_string(), Status::Ok, "");
    if let Err(e) = smooth_file(job, path, &mut row) {
        log::error!("{name}: {e}");
        row.status = Status::Error;
        row.message = e.to_string();
    }
    row
}

fn smooth_file(job: &JobSpec, path: &Path, row: &mut ManifestRow) -> Result<()> {
    let bytes = fs::read(path)?;
    row.sha256 = Sha256::digest(&bytes)
        .iter()
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
    let format = io::format_of(path).ok_or_else(|| Error::UnsupportedFormat(path.to_path_buf()))?;
    let x = io::load_bytes(&bytes, format, job.color)?;
    let levels = match &job.levels {
        Some(l) => l.clone(),
        None if job.snapshots => PATH_LEVELS.to_vec(),
        None => vec![default_level(x.height(), x.width())],
    };
    let result = run_path(&x, &PathConfig::new(levels.clone(), job.hp.clone()))?;
    row.params = Some((result.params.kappa, result.params.beta, result.params.alpha));
    if result.truncated {
        row.status = Status::Truncated;
        row.message = format!("iteration budget {} exhausted", job.hp.max_iters);
    }
    let stem = stem(path);
    let record = |snap: &Snapshot, file: String, row: &mut ManifestRow| -> Result<()> {
        let out = job.out.join(file);
        io::save_png(&snap.image, &out)?;
        row.achieved.push(snap.achieved_sparsity);
        row.iterations.push(snap.iteration);
        row.outputs.push(out);
        Ok(())
    };

    if job.snapshots {
        let mut csv = vec![[
            "requested_level",
            "achieved_sparsity",
            "iteration",
            "coincident",
            "output",
        ]
        .map(String::from)];
        for snap in &result.snapshots {
            let (tag, file) = match snap.requested_level {
                Some(l) => (level_tag(l), format!("{stem}_s{}.png", level_tag(l))),
                None => ("terminal".to_string(), format!("{stem}_terminal.png")),
            };
            csv.push([
                tag,
                format!("{:.6}", snap.achieved_sparsity),
                snap.iteration.to_string(),
                snap.coincident.to_string(),
                file.clone(),
            ]);
            if let Some(l) = snap.requested_level {
                row.levels.push(l);
            }
            record(snap, file, row)?;
        }
        write_csv(&job.out.join(format!("{stem}_path.csv")), csv)?;
    } else {
        // unreached levels get the final iterate; the manifest shows the
        // sparsity actually achieved
        let fallback = result.snapshots.last();
        for &l in &levels {
            let snap = result
                .snapshots
                .iter()
                .find(|s| s.requested_level == Some(l))
                .or(fallback)
                .ok_or_else(|| Error::Parameter("path produced no snapshot".into()))?;
            row.levels.push(l);
            record(snap, format!("{stem}_s{}.png", level_tag(l)), row)?;
        }
    }
    Ok(())
}

/// Parses `N` or `HxW`.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parameter(format!("invalid size '{s}', expected N or HxW"));
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let (h, w) = match s.to_ascii_lowercase().split_once('x') {
        Some((h, w)) => (parse(h)?, parse(w)?),
        None => {
            let n = parse(s)?;
            (n, n)
        }
    };
    if h == 0 || w == 0 {
        return Err(Error::InvalidDimensions {
            height: h,
            width: w,
        });
    }
    Ok((h, w))
}

/// Runs the projection benchmark on a synthetic `h x w` scene.
pub fn cmd_bench(
    height: usize,
    width: usize,
    iters: usize,
    projections: usize,
) -> Result<BenchReport> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidDimensions { height, width });
    }
    if projections == 0 {
        return Err(Error::Parameter("projections must be positive".into()));
    }
    oracle::timing_benchmark(height, width, iters, projections)
}

/// Result of comparing two image sets.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub pairs: Vec<String>,
    pub radius: f64,
    pub low_energy: f64,
    pub high_energy: f64,
    pub spectrum: Spectrum,
}

impl SpectrumReport {
    pub fn high_fraction(&self) -> f64 {
        self.spectrum.high_fraction(self.radius)
    }

    /// `key=value` lines.
    pub fn summary(&self) -> String {
        format!(
            "images={}\nradius={}\nlow_energy={:e}\nhigh_energy={:e}\nhigh_fraction={:.6}\n",
            self.pairs.len(),
            self.radius,
            self.low_energy,
            self.high_energy,
            self.high_fraction()
        )
    }

    /// Heat map on a logarithmic scale, DC in the center.
    pub fn heat_map(&self) -> Result<Image> {
        let max = self.spectrum.magnitude.iter().copied().fold(0.0, f64::max);
        let px = self
            .spectrum
            .magnitude
            .iter()
            .map(|&m| {
                if max > 0.0 {
                    m.ln_1p() / max.ln_1p()
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Image::Gray(ImagePlane::new(
            self.spectrum.height,
            self.spectrum.width,
            px,
        )?))
    }

    /// Writes `spectrum.png` and `spectrum.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        io::save_png(&self.heat_map()?, &dir.join("spectrum.png"))?;
        fs::write(dir.join("spectrum.txt"), self.summary())?;
        Ok(())
    }
}

fn images_by_stem(dir: &Path, suffix: &str) -> Result<BTreeMap<String, PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::Parameter(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && io::is_supported(&path) {
            let s = stem(&path);
            let key = s
                .strip_suffix(suffix)
                .filter(|k| !k.is_empty())
                .unwrap_or(&s)
                .to_string();
            out.insert(key, path);
        }
    }
    if out.is_empty() {
        return Err(Error::Parameter(format!("no images in {}", dir.display())));
    }
    Ok(out)
}

/// Pairs files by stem (after removing `suffix` from smoothed stems), loads
/// them as grayscale and averages their spectral difference.
pub fn cmd_spectrum(
    originals: &Path,
    smoothed: &Path,
    radius: f64,
    suffix: &str,
) -> Result<SpectrumReport> {
    if !(radius > 0.0) {
        return Err(Error::Parameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let a = images_by_stem(originals, "")?;
    let b = images_by_stem(smoothed, suffix)?;
    let unmatched: Vec<String> = a
        .iter()
        .filter(|(k, _)| !b.contains_key(*k))
        .chain(b.iter().filter(|(k, _)| !a.contains_key(*k)))
        .map(|(_, p)| p.display().to_string())
        .collect();
    if !unmatched.is_empty() {
        return Err(Error::UnmatchedFiles(unmatched));
    }
    let gray = |p: &Path| -> Result<ImagePlane> {
        match io::load(p, ColorMode::Gray)? {
            Image::Gray(g) => Ok(g),
            Image::Rgb(_) => unreachable!("gray mode yields gray images"),
        }
    };
    let mut xs = Vec::with_capacity(a.len());
    let mut ys = Vec::with_capacity(a.len());
    for (key, pa) in &a {
        xs.push(gray(pa)?);
        ys.push(gray(&b[key])?);
    }
    let spectrum = expected_spectral_diff(&xs, &ys)?;
    let (low_energy, high_energy) = spectrum.band_energy(radius);
    Ok(SpectrumReport {
        pairs: a.into_keys().collect(),
        radius,
        low_energy,
        high_energy,
        spectrum,
    })
}

/// Writes `key=value` lines plus timestamp and machine details.
pub fn write_report(path: &Path, command: &str, lines: &[(String, String)]) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "command={command}");
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let _ = writeln!(s, "timestamp={secs}");
    let _ = writeln!(s, "version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "os={}", std::env::consts::OS);
    let _ = writeln!(s, "arch={}", std::env::consts::ARCH);
    let _ = writeln!(s, "cpus={}", default_workers());
    for (k, v) in lines {
        let _ = writeln!(s, "{k}={v}");
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_size("84").unwrap(), (84, 84));
        assert_eq!(parse_size("16x32").unwrap(), (16, 32));
        assert_eq!(parse_size("3X4").unwrap(), (3, 4));
        assert!(parse_size("0").is_err());
        assert!(parse_size("4x0").is_err());
        assert!(parse_size("big").is_err());
    }

    #[test]
    fn level_tags() {
        assert_eq!(level_tag(0.6), "0.6");
        assert_eq!(level_tag(1.0), "1.0");
        assert_eq!(level_tag(0.25), "0.25");
    }

    #[test]
    fn config_parsing() {
        let c =
            Config::parse("# defaults\nkappa = 4\nmax-iters=100\nlevels = 0.2, 0.5\ncolor=gray\n")
                .unwrap();
        let mut job = JobSpec::new("in", "out");
        c.apply(&mut job).unwrap();
        assert_eq!(job.hp.kappa, 4.0);
        assert_eq!(job.hp.max_iters, 100);
        assert_eq!(job.levels, Some(vec![0.2, 0.5]));
        assert_eq!(job.color, ColorMode::Gray);
        assert_eq!(job.hp.alpha, StepSize::Auto);
        assert!(Config::parse("speed = 3").is_err());
        assert!(Config::parse("kappa").is_err());
        let mut job = JobSpec::new("in", "out");
        assert!(Config::parse("beta = x").unwrap().apply(&mut job).is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.txt");
        fs::write(&cfg, "kappa = 4\nbeta = 2\nworkers = 3\n").unwrap();
        let cli = Cli::try_parse_from([
            "scalepath",
            "smooth",
            "in",
            "--out",
            "o",
            "--kappa",
            "7",
            "--config",
            cfg.to_str().unwrap(),
        ])
        .unwrap();
        let Command::Smooth(args) = cli.command else {
            panic!()
        };
        let job = JobSpec::from_args(&args, false).unwrap();
        assert_eq!((job.hp.kappa, job.hp.beta, job.workers), (7.0, 2.0, 3));
    }

    #[test]
    fn manifest_row_format() {
        let mut row = ManifestRow::new("a,b.png".into(), Status::Ok, "");
        row.achieved = vec![0.6, 0.81];
        row.iterations = vec![10, 20];
        row.params = Some((5.0, 1.0, 0.25));
        row.levels = vec![0.6, 0.8];
        let fields = row.fields();
        assert_eq!(
            fields.join("|"),
            "a,b.png|ok|0.600000;0.810000|10;20|5|1|0.25|0.6;0.8||"
        );
        assert_eq!(MANIFEST_HEADER.split(',').count(), fields.len());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_csv(&path, [fields.clone()]).unwrap();
        let back: Vec<String> = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(&path)
            .unwrap()
            .records()
            .next()
            .unwrap()
            .unwrap()
            .iter()
            .map(str::to_string)
            .collect();
        assert_eq!(back, fields);
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(run(["scalepath", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["scalepath", "bench", "--size", "0"]), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Parameter("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::UnmatchedFiles(vec![])), EXIT_FAILURE);
    }
}
