use std::process::ExitCode;

use aquastretch::pipeline::ConfigSettings;
use aquastretch::PipelineConfig;
use aquastretch_cli::args::{Cli, Command, EnhanceArgs};
use aquastretch_cli::{run_cbam, run_enhance, JobSpec};
use clap::Parser;

fn job_from_args(args: &EnhanceArgs) -> anyhow::Result<JobSpec> {
    let file = match &args.config {
        Some(path) => ConfigSettings::from_file(path)?,
        None => ConfigSettings::default(),
    };
    let config = file.merged_with((&args.pipeline).into()).apply(PipelineConfig::default())?;
    Ok(JobSpec {
        input: args.input.clone(),
        output_dir: args.output_dir.clone(),
        config,
        report: args.report.clone(),
        parallelism: args.jobs as usize,
        repeatability_rotation: args.repeatability_rotation,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Enhance(args) => {
            let job = match job_from_args(&args) {
                Ok(job) => job,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            };
            match run_enhance(&job) {
                Ok(summary) => {
                    println!("ok {} degenerate {} failed {}", summary.ok, summary.degenerate, summary.failed);
                    ExitCode::from(summary.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Cbam(args) => match run_cbam(&args.weights, &args.tensor, &args.output) {
            Ok(summary) => {
                println!("{summary}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
