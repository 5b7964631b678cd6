mod args;
mod corpus;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use flowkit::curation::{self, corpus_stats, manifest, ClipInput, ClipStats, CurationConfig};
use flowkit::eval::{self, report_table, RolloutSpec};
use flowkit::media::{decode_gif, load_frame_dir, netpbm, write_frame_dir};
use flowkit::warp::flo;
use flowkit::{flow_magnitude, to_grayscale, warp_image, FeatureMap};
use log::{info, warn, LevelFilter};
use serde_json::{json, Value};

use crate::args::{Cli, Command, CorpusArgs, CurateArgs, EvalArgs, StatsArgs};

/// Bad input detected before any work starts; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => LevelFilter::Error,
        (_, 0) => LevelFilter::Warn,
        (_, 1) => LevelFilter::Info,
        (_, 2) => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn print_config(command: &str, config: Value) {
    eprintln!(
        "resolved config: {}",
        json!({ "command": command, "config": config })
    );
}

fn write_json(path: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract { gif, out } => {
            print_config("extract", json!({ "gif": gif, "out": out }));
            let bytes = fs::read(&gif).with_context(|| format!("reading {}", gif.display()))?;
            let seq = decode_gif(&bytes).with_context(|| gif.display().to_string())?;
            let written = write_frame_dir(&seq, &out)?;
            info!(
                "wrote {} frames of {}x{} to {}",
                written.len(),
                seq.width(),
                seq.height(),
                out.display()
            );
            Ok(())
        }
        Command::Flow { prev, next, flow } => {
            let params = flow.resolve()?;
            print_config(
                "flow",
                json!({ "prev": prev, "next": next, "flow_params": params }),
            );
            let a = netpbm::read_color(&prev)?;
            let b = netpbm::read_color(&next)?;
            let result = flow_magnitude(&to_grayscale(&a), &to_grayscale(&b), &params)?;
            write_json(None, &result)
        }
        Command::Curate(args) => curate(args),
        Command::Warp { image, flow, out } => {
            print_config("warp", json!({ "image": image, "flow": flow, "out": out }));
            let img = netpbm::read_color(&image)?;
            let field = flo::read(&flow)?;
            if (field.width(), field.height()) != (img.width(), img.height()) {
                return Err(usage(format!(
                    "flow is {}x{} but image is {}x{}",
                    field.width(),
                    field.height(),
                    img.width(),
                    img.height()
                )));
            }
            let warped = warp_image(&FeatureMap::from_color(&img), &field)?;
            netpbm::write_ppm(&out, &warped.to_color()?)?;
            Ok(())
        }
        Command::Eval(args) => evaluate(args),
        Command::Stats(args) => stats(args),
    }
}

fn curation_config(corpus: &CorpusArgs, seed: u64) -> Result<CurationConfig> {
    let config = CurationConfig {
        lo: corpus.lo,
        hi: corpus.hi,
        pairs_per_clip: corpus.quota,
        seed,
        flow_params: corpus.flow.resolve()?,
        pairing_policy: corpus.pairing,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("starting worker threads")
}

fn discover_clips(corpus: &CorpusArgs) -> Result<Vec<corpus::ClipEntry>> {
    let clips = corpus::discover(&corpus.input)?;
    if clips.is_empty() {
        return Err(usage(format!(
            "no clips found in {}",
            corpus.input.display()
        )));
    }
    Ok(clips)
}

fn curate(args: CurateArgs) -> Result<()> {
    let config = curation_config(&args.corpus, args.seed)?;
    let clips = discover_clips(&args.corpus)?;
    let captions = corpus::read_captions(&args.captions)?;
    let missing: Vec<&str> = clips
        .iter()
        .map(|c| c.clip_id.as_str())
        .filter(|id| !captions.contains_key(*id))
        .collect();
    if !missing.is_empty() {
        return Err(usage(format!(
            "{} clip(s) have no caption: {}",
            missing.len(),
            missing.join(", ")
        )));
    }
    for id in captions
        .keys()
        .filter(|id| !clips.iter().any(|c| &c.clip_id == *id))
    {
        warn!("caption for unknown clip {id} ignored");
    }
    print_config(
        "curate",
        json!({
            "input": args.corpus.input,
            "captions": args.captions,
            "out": args.out,
            "stats": args.stats,
            "jobs": args.corpus.jobs,
            "curation": config,
        }),
    );

    let inputs = clips.iter().map(|c| ClipInput {
        clip_id: c.clip_id.clone(),
        caption: captions[&c.clip_id].clone(),
        frames: c.load(),
    });
    let output = thread_pool(args.corpus.jobs)?.install(|| curation::curate(inputs, &config, 0))?;

    let file =
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    manifest::write_jsonl(BufWriter::new(file), &output.records)?;
    info!(
        "{} rows from {} clips ({} failed) written to {}",
        output.records.len(),
        output.clip_stats.len(),
        output.failures.len(),
        args.out.display()
    );
    if let Some(path) = &args.stats {
        write_json(
            Some(path),
            &stats_document(&output.clip_stats, &output.failures),
        )?;
    }
    if output.clip_stats.is_empty() {
        anyhow::bail!("every clip failed to curate");
    }
    Ok(())
}

fn stats_document(clips: &[ClipStats], failures: &[curation::ClipFailure]) -> Value {
    json!({
        "summary": corpus_stats(clips).ok(),
        "clips": clips,
        "failures": failures,
    })
}

fn stats(args: StatsArgs) -> Result<()> {
    let config = curation_config(&args.corpus, 0)?;
    let clips = discover_clips(&args.corpus)?;
    print_config(
        "stats",
        json!({ "input": args.corpus.input, "out": args.out, "jobs": args.corpus.jobs, "curation": config }),
    );
    let range = config.range()?;
    let pool = thread_pool(args.corpus.jobs)?;
    let mut stats = Vec::new();
    let mut failures = Vec::new();
    for clip in &clips {
        let scored = clip.load().and_then(|seq| {
            pool.install(|| curation::score_pairs(&seq, &config))
                .map(|scored| (seq.len(), scored))
                .map_err(|e| e.to_string())
        });
        match scored {
            Ok((frames, scored)) => {
                let in_range = curation::filter_range(&scored, range).len();
                stats.push(ClipStats::new(
                    &clip.clip_id,
                    frames,
                    &scored,
                    in_range,
                    in_range.min(config.pairs_per_clip),
                ));
            }
            Err(error) => {
                warn!("skipping clip {}: {error}", clip.clip_id);
                failures.push(curation::ClipFailure {
                    clip_id: clip.clip_id.clone(),
                    error,
                });
            }
        }
    }
    write_json(args.out.as_deref(), &stats_document(&stats, &failures))?;
    if stats.is_empty() {
        anyhow::bail!("no clip could be scored");
    }
    Ok(())
}

fn evaluate(args: EvalArgs) -> Result<()> {
    let params = args.flow.resolve()?;
    let spec =
        RolloutSpec::new(args.motions.clone(), args.cfg_label).map_err(|e| usage(e.to_string()))?;
    let source = netpbm::read_color(&args.source)?;
    let frames = load_frame_dir(&args.frames)?;
    if frames.len() != spec.motion_inputs.len() {
        return Err(usage(format!(
            "{} motion values but {} frames in {}",
            spec.motion_inputs.len(),
            frames.len(),
            args.frames.display()
        )));
    }
    print_config(
        "eval",
        json!({
            "source": args.source,
            "frames": args.frames,
            "out": args.out,
            "method": args.method,
            "rollout": spec,
            "flow_params": params,
        }),
    );
    let report = eval::motion_coherency(&source, frames.frames(), &spec, &params)?;
    write_json(args.out.as_deref(), &report)?;
    let table = report_table(&[(args.cfg_label, args.method, report)])?;
    eprint!("{}", table.render_text());
    Ok(())
}
