use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use aquastretch::metrics::corner_repeatability;
use aquastretch::pipeline::{ConfigSettings, EnhancementTrace};
use aquastretch::{enhance, load_image, save_image, PipelineConfig, RgbImage};
use rayon::prelude::*;
use serde::Serialize;

pub const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];
pub const OUTPUT_SUFFIX: &str = ".enhanced.png";

#[derive(Debug, Clone)]
pub struct JobSpec {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub config: PipelineConfig,
    pub report: Option<PathBuf>,
    pub parallelism: usize,
    pub repeatability_rotation: Option<f64>,
}

/// `degenerate` counts successful images whose trace flags a passthrough,
/// so it is a subset of `ok`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub ok: usize,
    pub degenerate: usize,
    pub failed: usize,
}

impl Summary {
    pub fn exit_code(&self) -> i32 {
        if self.failed > 0 { 1 } else { 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Degenerate,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageRecord {
    /// Relative to the input directory, or the bare file name.
    pub input: String,
    pub output: Option<String>,
    pub status: Status,
    pub error: Option<String>,
    pub trace: Option<EnhancementTrace>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// Wall-clock time; the only field that differs between identical runs.
    pub generated_at: String,
    pub version: &'static str,
    pub config: ConfigSettings,
    pub summary: Summary,
    pub images: Vec<ImageRecord>,
}

#[derive(Debug)]
pub enum JobError {
    /// Bad input, output or settings; nothing was processed.
    Invocation(anyhow::Error),
    /// The batch ran but its report could not be written.
    Report(anyhow::Error),
}

impl JobError {
    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Invocation(_) => 2,
            JobError::Report(_) => 1,
        }
    }
}

impl fmt::Display for JobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JobError::Invocation(e) | JobError::Report(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for JobError {}

struct Input {
    path: PathBuf,
    name: String,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

/// Image files under `input`, sorted by name. A file argument is taken as is.
fn collect_inputs(input: &Path) -> anyhow::Result<(Vec<Input>, PathBuf)> {
    let meta = fs::metadata(input).with_context(|| format!("input {}", input.display()))?;
    if meta.is_file() {
        let name = input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let dir = input.parent().map(Path::to_path_buf).unwrap_or_default();
        return Ok((vec![Input { path: input.to_path_buf(), name }], dir));
    }
    let mut found = Vec::new();
    for entry in fs::read_dir(input).with_context(|| format!("reading {}", input.display()))? {
        let path = entry?.path();
        if path.is_file() && is_image(&path) {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            found.push(Input { path, name });
        }
    }
    found.sort_by(|a, b| a.name.cmp(&b.name));
    Ok((found, input.to_path_buf()))
}

fn same_dir(a: &Path, b: &Path) -> bool {
    let a = if a.as_os_str().is_empty() { Path::new(".") } else { a };
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

fn output_name(input: &Input) -> String {
    let stem = Path::new(&input.name).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{stem}{OUTPUT_SUFFIX}")
}

fn process_one(img: &RgbImage, out: &Path, job: &JobSpec) -> anyhow::Result<EnhancementTrace> {
    let enhanced = enhance(img, &job.config)?;
    save_image(&enhanced.image, out)?;
    let mut trace = enhanced.trace;
    if let Some(deg) = job.repeatability_rotation {
        let stored = RgbImage::from_bytes(&enhanced.image.to_bytes())?;
        let cmp = corner_repeatability(img, &stored, deg)?;
        if let Some(m) = trace.metrics_before.as_mut() {
            m.corner_repeatability = cmp.original.fraction();
        }
        if let Some(m) = trace.metrics_after.as_mut() {
            m.corner_repeatability = cmp.enhanced.fraction();
        }
    }
    Ok(trace)
}

fn run_input(input: &Input, output: Option<&str>, job: &JobSpec) -> ImageRecord {
    let mut record = ImageRecord {
        input: input.name.clone(),
        output: None,
        status: Status::Failed,
        error: None,
        trace: None,
    };
    let Some(output) = output else {
        record.error = Some(format!("output name {} already taken by an earlier input", output_name(input)));
        return record;
    };
    let result = load_image(&input.path)
        .map_err(anyhow::Error::from)
        .and_then(|img| process_one(&img, &job.output_dir.join(output), job));
    match result {
        Ok(trace) => {
            record.status = if trace.has_degeneracy() { Status::Degenerate } else { Status::Ok };
            record.output = Some(output.to_string());
            record.trace = Some(trace);
        }
        Err(e) => {
            log::warn!("{}: {e:#}", input.path.display());
            record.error = Some(format!("{e:#}"));
        }
    }
    record
}

/// Processes every input and returns the report. Per-image failures are
/// recorded, never fatal.
pub fn run_batch(job: &JobSpec) -> Result<Report, JobError> {
    let invocation = |e: anyhow::Error| JobError::Invocation(e);
    if job.parallelism == 0 {
        return Err(invocation(anyhow!("parallelism must be at least 1")));
    }
    job.config.validate().map_err(|e| invocation(e.into()))?;
    let (inputs, input_dir) = collect_inputs(&job.input).map_err(invocation)?;
    if inputs.is_empty() {
        return Err(invocation(anyhow!("no inputs: no png/jpg/jpeg files in {}", job.input.display())));
    }
    fs::create_dir_all(&job.output_dir)
        .with_context(|| format!("creating {}", job.output_dir.display()))
        .map_err(invocation)?;
    if same_dir(&input_dir, &job.output_dir) {
        return Err(invocation(anyhow!("output directory must differ from the input directory")));
    }

    let mut taken = HashSet::new();
    let outputs: Vec<Option<String>> = inputs
        .iter()
        .map(|i| {
            let name = output_name(i);
            taken.insert(name.clone()).then_some(name)
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.parallelism)
        .build()
        .map_err(|e| invocation(e.into()))?;
    let images: Vec<ImageRecord> = pool.install(|| {
        inputs
            .par_iter()
            .zip(outputs.par_iter())
            .map(|(input, out)| run_input(input, out.as_deref(), job))
            .collect()
    });

    let mut summary = Summary::default();
    for r in &images {
        match r.status {
            Status::Ok => summary.ok += 1,
            Status::Degenerate => {
                summary.ok += 1;
                summary.degenerate += 1;
            }
            Status::Failed => summary.failed += 1,
        }
    }
    Ok(Report {
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        version: env!("CARGO_PKG_VERSION"),
        config: job.config.to_settings(),
        summary,
        images,
    })
}

/// Writes `value` as pretty JSON through a temp file in the same directory.
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    serde_json::to_writer_pretty(&mut tmp, value)?;
    tmp.write_all(b"\n")?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Runs the batch and writes the report if one was requested.
pub fn run_enhance(job: &JobSpec) -> Result<Summary, JobError> {
    let report = run_batch(job)?;
    if let Some(path) = &job.report {
        write_json_atomic(path, &report)
            .with_context(|| format!("writing report {}", path.display()))
            .map_err(JobError::Report)?;
    }
    Ok(report.summary)
}
