//! Command-line driver: ingestion -> spectra -> store -> stability ->
//! reports, plus a directory watch mode that mimics in-situ deployment.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use edms::config::RunConfig;
use edms::frame::Frame;
use edms::pdb::{self, ParseMode, ParseOptions};
use edms::pipeline::{write_decisions_csv, AnalyzeEngine};
use edms::spectra::Precision;
use edms::stability::{select_representatives, StableRegion, Verdict};
use edms::store;
use edms::validate::{build_heatmap, generate_synthetic, SyntheticSpec};

#[derive(Parser)]
#[command(name = "edms", about = "Eigenvalue metadata reduction for protein trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-shot analysis of a complete trajectory.
    Analyze(CommonArgs),
    /// Poll a directory for new frames; persist representatives as regions close.
    Watch(WatchArgs),
    /// Eigenvalue CSV, region table, representatives and heat maps.
    Report(CommonArgs),
    /// Generate a synthetic trajectory as per-frame PDB files.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Config file (TOML) with the run parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trajectory input: multi-model PDB file or directory of frames.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Destination for persisted frames (parallel file system stand-in).
    #[arg(long)]
    persist_dir: Option<PathBuf>,
    /// Storage precision.
    #[arg(long, value_parser = ["f64", "f32"])]
    precision: Option<String>,
    /// Store all five retained eigenvalues instead of just the largest.
    #[arg(long)]
    full5: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct WatchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Poll interval in milliseconds.
    #[arg(long, default_value_t = 500)]
    watch_poll_ms: u64,
    /// Stop after this long with no new frames (runs forever when unset).
    #[arg(long)]
    idle_timeout_ms: Option<u64>,
    /// Warn and skip a missing frame number after this long.
    #[arg(long, default_value_t = 5000)]
    gap_timeout_ms: u64,
}

#[derive(Args)]
struct SynthArgs {
    /// Synthetic trajectory spec (TOML).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Watch(args) => cmd_watch(&args),
        Command::Report(args) => cmd_report(&args),
        Command::Synth(args) => cmd_synth(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error=\"{e}\"");
            ExitCode::from(1)
        }
    }
}

type AnyError = Box<dyn std::error::Error>;

fn load_config(args: &CommonArgs) -> Result<RunConfig, AnyError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(input) = &args.input {
        cfg.input = input.clone();
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(persist) = &args.persist_dir {
        cfg.persist_dir = Some(persist.clone());
    }
    if let Some(precision) = &args.precision {
        cfg.precision = if precision == "f32" {
            Precision::Single
        } else {
            Precision::Double
        };
    }
    if args.full5 {
        cfg.full5 = true;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    Ok(cfg)
}

fn store_path(cfg: &RunConfig) -> PathBuf {
    let stem = cfg
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trajectory");
    cfg.out.join(format!("{stem}.edms"))
}

fn parse_options(cfg: &RunConfig) -> ParseOptions {
    ParseOptions {
        strict_beta: cfg.strict_beta,
    }
}

fn print_result(result: &edms::AnalysisResult) {
    println!(
        "frames={} mean_ms={:.4} p99_ms={:.4} reduction={:.4} regions={}",
        result.frames,
        result.mean_latency_ms,
        result.p99_latency_ms,
        result.reduction,
        result.regions.len()
    );
    for r in &result.regions {
        println!(
            "region={} start={} end={} mean={} std={}",
            r.cluster_ordinal, r.start_frame, r.end_frame, r.mean, r.std
        );
    }
}

fn cmd_analyze(args: &CommonArgs) -> Result<ExitCode, AnyError> {
    let cfg = load_config(args)?;
    let parsed = match pdb::read_trajectory(&cfg.input, &parse_options(&cfg)) {
        Ok(p) => p,
        Err(pdb::ParseError::NoFrames { .. }) => {
            eprintln!("error=\"no frames\" input={}", cfg.input.display());
            return Ok(ExitCode::from(2));
        }
        Err(e) => return Err(e.into()),
    };
    for w in &parsed.warnings {
        eprintln!("warn=\"{w}\"");
    }
    let mut engine = AnalyzeEngine::new(&cfg, &store_path(&cfg))?;
    for frame in &parsed.frames {
        engine.process_frame(frame)?;
    }
    let result = engine.finish()?;
    let mut decisions = BufWriter::new(File::create(cfg.out.join("decisions.csv"))?);
    write_decisions_csv(&result.decisions, &cfg.driving, &mut decisions)?;
    decisions.flush()?;
    print_result(&result);
    Ok(ExitCode::SUCCESS)
}

fn cmd_watch(args: &WatchArgs) -> Result<ExitCode, AnyError> {
    let cfg = load_config(&args.common)?;
    if !cfg.input.is_dir() {
        eprintln!("error=\"watch mode needs a directory input\"");
        return Ok(ExitCode::from(2));
    }
    if let Some(persist) = &cfg.persist_dir {
        fs::create_dir_all(persist)?;
    }
    let opts = parse_options(&cfg);
    let mut engine = AnalyzeEngine::new(&cfg, &store_path(&cfg))?;
    let mut frame_files: Vec<PathBuf> = Vec::new();
    let mut expected_stem: Option<u64> = None;
    let mut finalized_until = 0usize;
    let mut idle = Duration::ZERO;
    let mut gap_wait = Duration::ZERO;
    let poll = Duration::from_millis(args.watch_poll_ms.max(1));

    loop {
        let available = pdb::list_frame_files(&cfg.input)?;
        let mut progressed = false;
        for (stem, path) in available {
            let expected = *expected_stem.get_or_insert(stem);
            if stem < expected {
                continue;
            }
            if stem > expected {
                // Hold out for the missing frame before skipping ahead.
                if gap_wait < Duration::from_millis(args.gap_timeout_ms) {
                    break;
                }
                eprintln!("warn=\"frame gap\" expected={expected} got={stem}");
            }
            gap_wait = Duration::ZERO;
            let text = fs::read_to_string(&path)?;
            let parsed = pdb::parse_pdb(
                &text,
                ParseMode::SingleFrame,
                &opts,
                engine.frames_processed(),
            )?;
            for frame in &parsed.frames {
                if let Some(region) = engine.process_frame(frame)? {
                    finalize_region(&cfg, &engine, &region, &frame_files, &mut finalized_until)?;
                }
            }
            frame_files.push(path);
            expected_stem = Some(stem + 1);
            progressed = true;
        }
        if progressed {
            idle = Duration::ZERO;
        } else {
            idle += poll;
            gap_wait += poll;
            if let Some(timeout) = args.idle_timeout_ms {
                if idle >= Duration::from_millis(timeout) {
                    break;
                }
            }
        }
        std::thread::sleep(poll);
    }
    if engine.frames_processed() == 0 {
        eprintln!("error=\"no frames\" input={}", cfg.input.display());
        return Ok(ExitCode::from(2));
    }
    let result = engine.finish()?;
    // Frames past the last closed region get their final verdicts now.
    for d in &result.decisions[finalized_until.min(result.decisions.len())..] {
        apply_verdict(&cfg, &frame_files, d.frame_index, &d.verdict)?;
    }
    let mut decisions = BufWriter::new(File::create(cfg.out.join("decisions.csv"))?);
    write_decisions_csv(&result.decisions, &cfg.driving, &mut decisions)?;
    decisions.flush()?;
    print_result(&result);
    Ok(ExitCode::SUCCESS)
}

fn finalize_region(
    cfg: &RunConfig,
    engine: &AnalyzeEngine,
    region: &StableRegion,
    frame_files: &[PathBuf],
    finalized_until: &mut usize,
) -> Result<(), AnyError> {
    let reps = select_representatives(
        region,
        engine.driving_series(),
        cfg.detector.reps_per_region,
    )?;
    for frame in *finalized_until..=region.end_frame {
        let verdict = if reps.contains(&frame) {
            Verdict::PersistRepresentative {
                region_ordinal: region.cluster_ordinal,
            }
        } else if frame < region.start_frame {
            if cfg.detector.keep_transitions {
                Verdict::PersistTransition
            } else {
                Verdict::Drop
            }
        } else {
            Verdict::Drop
        };
        apply_verdict(cfg, frame_files, frame, &verdict)?;
    }
    *finalized_until = region.end_frame + 1;
    Ok(())
}

fn apply_verdict(
    cfg: &RunConfig,
    frame_files: &[PathBuf],
    frame: usize,
    verdict: &Verdict,
) -> Result<(), AnyError> {
    let path = match frame_files.get(frame) {
        Some(p) => p,
        None => return Ok(()), // one-shot analyze: nothing staged to move
    };
    match verdict {
        Verdict::PersistRepresentative { .. } | Verdict::PersistTransition => {
            if let Some(persist) = &cfg.persist_dir {
                let name = path.file_name().expect("frame files have names");
                fs::copy(path, persist.join(name))?;
            }
        }
        Verdict::Drop => {
            if cfg.delete_dropped {
                fs::remove_file(path)?;
            }
        }
    }
    Ok(())
}

fn cmd_report(args: &CommonArgs) -> Result<ExitCode, AnyError> {
    let cfg = load_config(args)?;
    let loaded = store::load(&store_path(&cfg))?;
    if loaded.truncated_bytes > 0 {
        eprintln!("warn=\"dropped {} trailing bytes\"", loaded.truncated_bytes);
    }
    let stem = store_path(&cfg)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trajectory")
        .to_string();
    // Per-request eigenvalue series.
    let mut csv = BufWriter::new(File::create(cfg.out.join(format!("{stem}.csv")))?);
    store::export_csv(&loaded.view, &mut csv)?;
    csv.flush()?;

    let driving = loaded
        .view
        .series(&cfg.driving)
        .ok_or_else(|| format!("driving series '{}' not in store", cfg.driving))?
        .to_vec();
    let regions =
        edms::stability::detect_stable_regions(&cfg.driving, &driving, &cfg.detector)?;

    let mut region_table = BufWriter::new(File::create(cfg.out.join("regions.csv"))?);
    writeln!(region_table, "region,request_id,start,end,mean,std")?;
    for r in &regions {
        writeln!(
            region_table,
            "{},{},{},{},{},{}",
            r.cluster_ordinal, r.request_id, r.start_frame, r.end_frame, r.mean, r.std
        )?;
    }
    region_table.flush()?;

    let mut representatives: Vec<(usize, usize)> = Vec::new();
    for r in &regions {
        for f in select_representatives(r, &driving, cfg.detector.reps_per_region)? {
            representatives.push((r.cluster_ordinal, f));
        }
    }
    let mut rep_table = BufWriter::new(File::create(cfg.out.join("representatives.csv"))?);
    writeln!(rep_table, "region,frame")?;
    for (region, frame) in &representatives {
        writeln!(rep_table, "{region},{frame}")?;
    }
    rep_table.flush()?;

    if !representatives.is_empty() {
        let frames = pdb::read_trajectory(&cfg.input, &parse_options(&cfg))?.frames;
        let mut targets: Vec<(String, Option<edms::RegionSpec>)> =
            vec![("full".to_string(), None)];
        for r in &cfg.regions {
            targets.push((r.name.clone(), Some(r.clone())));
        }
        for (name, region) in targets {
            let hm = build_heatmap(&representatives, &frames, region.as_ref())?;
            let mut csv = BufWriter::new(File::create(
                cfg.out.join(format!("heatmap_{name}.csv")),
            )?);
            hm.write_csv(&mut csv)?;
            csv.flush()?;
            let mut svg = BufWriter::new(File::create(
                cfg.out.join(format!("heatmap_{name}.svg")),
            )?);
            hm.write_svg(&mut svg)?;
            svg.flush()?;
        }
    }
    println!(
        "frames={} regions={} representatives={}",
        loaded.view.frame_count(),
        regions.len(),
        representatives.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(args: &SynthArgs) -> Result<ExitCode, AnyError> {
    let text = fs::read_to_string(&args.spec)?;
    let spec: SyntheticSpec = toml::from_str(&text)?;
    let frames = generate_synthetic(&spec, args.seed)?;
    fs::create_dir_all(&args.out)?;
    for frame in &frames {
        write_frame_file(&args.out, frame)?;
    }
    println!("frames={} out={}", frames.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn write_frame_file(dir: &Path, frame: &Frame) -> Result<(), AnyError> {
    let path = dir.join(format!("frame_{:06}.pdb", frame.frame_index));
    let mut file = BufWriter::new(File::create(path)?);
    pdb::write_frame_pdb(frame, &mut file)?;
    file.flush()?;
    Ok(())
}
