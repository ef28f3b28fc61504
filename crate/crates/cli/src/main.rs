//! `superslice` command-line driver.
//!
//! Exit codes: 0 on success, 2 for invalid configuration or arguments, 3 for
//! unreadable or inconsistent data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use superslice::convnet::{init_network, load_checkpoint, predict, save_checkpoint, train, Architecture};
use superslice::pipeline::{
    cnn_inputs, compare_methods, load_segments, rank_sweep, run_pipeline, segment_tensor, write_rank_curve,
    write_summary_csv, DataSource, ExperimentConfig, RecordSource,
};
use superslice::signal::{synthesize_dataset, write_record};
use superslice::tensor::{build_projector, cp_als, read_tensor, super_slices, write_factors, write_tensor};
use superslice::Error;

#[derive(Parser, Debug)]
#[command(name = "superslice", version, about = "EEG time-frequency tensors, CP super-slices and CNN classification")]
struct Cli {
    /// Experiment configuration (JSON). Missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if needed.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Writes the synthetic dataset of the configuration as CSV records with JSON sidecars.
    Synth,
    /// Converts every segment into a time × frequency × channel tensor.
    Tfr {
        /// Only the first N segments.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// CP-decomposes one tensor and writes factors, projector output and super-slices.
    Decompose {
        /// Tensor file written by `tfr`.
        #[arg(long)]
        tensor: PathBuf,
        /// Overrides the configured rank.
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Mean normalized CP error per assumed rank.
    RankSweep {
        /// Ascending ranks, as a list `1,2,5` or a range `1-20`.
        #[arg(long, default_value = "1-20")]
        ranks: String,
    },
    /// Trains the configured CNN on every segment and saves a checkpoint.
    Train,
    /// Cross-validates the configured variant, or scores a saved model with `--model`.
    Evaluate {
        /// Checkpoint directory written by `train`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Cross-validates several configurations on the same data and tabulates them.
    Compare {
        /// Configuration files (at least two).
        #[arg(required = true, num_args = 2..)]
        configs: Vec<PathBuf>,
    },
}

/// Failure classes that map to exit codes.
enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_data_error() {
            Failure::Data(e.into())
        } else {
            Failure::Config(e.into())
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn data<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Data(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Data(e)) => {
            eprintln!("data error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> CliResult<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))
                .map_err(Failure::Config)?;
            ExperimentConfig::from_json(&text)
                .with_context(|| format!("in {}", p.display()))
                .map_err(Failure::Config)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_ranks(text: &str) -> CliResult<Vec<usize>> {
    let bad = || Failure::Config(anyhow!("cannot parse rank list {text:?}"));
    let ranks: Vec<usize> = match text.split_once('-') {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            (a..=b).collect()
        }
        None => text
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?,
    };
    Ok(ranks)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(data)?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(Failure::Data)
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config(anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.into()))?;
    }
    let out = cli.out.as_path();
    fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(Failure::Data)?;

    if let Command::Compare { configs } = &cli.command {
        let cfgs = configs
            .iter()
            .map(|p| load_config(Some(p), cli.seed))
            .collect::<CliResult<Vec<_>>>()?;
        let cmp = compare_methods::<f64>(&cfgs)?;
        for (i, r) in cmp.reports.iter().enumerate() {
            r.write(out.join(format!("report_{i}.json")))?;
        }
        write_summary_csv(out.join("summary.csv"), &cmp.rows)?;
        for row in &cmp.rows {
            println!(
                "{:<20} {:<5} layers={:<2} filter={} mean={}",
                row.variant,
                row.tfd,
                row.layers,
                row.filter,
                row.mean.map_or("n/a".into(), |m| format!("{m:.4}"))
            );
        }
        return Ok(());
    }

    let cfg = load_config(cli.config.as_deref(), cli.seed)?;
    match cli.command {
        Command::Synth => synth(&cfg, out),
        Command::Tfr { limit } => tfr(&cfg, out, limit),
        Command::Decompose { tensor, rank } => decompose(&cfg, out, &tensor, rank),
        Command::RankSweep { ranks } => {
            let curve = rank_sweep::<f64>(&cfg, &parse_ranks(&ranks)?)?;
            write_rank_curve(out.join("rank_curve.csv"), &curve)?;
            for p in &curve {
                println!("R={:<3} mean={:.6} std={:.6}", p.rank, p.mean_error, p.std_error);
            }
            Ok(())
        }
        Command::Train => train_cmd(&cfg, out),
        Command::Evaluate { model: Some(dir) } => evaluate_model(&cfg, out, &dir),
        Command::Evaluate { model: None } => {
            let report = run_pipeline::<f64>(&cfg)?;
            report.write(out.join("report.json"))?;
            match report.mean_accuracy {
                Some(m) => println!(
                    "{}: mean accuracy {m:.4} (std {:.4}) over {} folds{}",
                    report.variant,
                    report.std_accuracy.unwrap_or(0.0),
                    report.accuracies().len(),
                    if report.complete { "" } else { ", some folds failed" }
                ),
                None => println!("{}: every fold failed", report.variant),
            }
            Ok(())
        }
        Command::Compare { .. } => unreachable!(),
    }
}

fn synth(cfg: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let DataSource::Synth(spec) = &cfg.data else {
        return Err(Failure::Config(anyhow!("synth needs a synthetic data source")));
    };
    let records = synthesize_dataset::<f64>(spec)?;
    let mut sources = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let csv = out.join(format!("record_{i:04}.csv"));
        let meta = out.join(format!("record_{i:04}.json"));
        write_record(r, &csv, &meta)?;
        sources.push(RecordSource { csv, meta });
    }
    // A config that reads the written records back.
    let mut replay = cfg.clone();
    replay.data = DataSource::Records(sources);
    write_json(&out.join("dataset_config.json"), &replay)?;
    println!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}

fn tfr(cfg: &ExperimentConfig, out: &Path, limit: Option<usize>) -> CliResult<()> {
    let mut segments = load_segments::<f64>(cfg)?;
    if let Some(n) = limit {
        segments.truncate(n);
    }
    let mut index = String::from("segment,record,start_sample,class,file\n");
    for (i, seg) in segments.iter().enumerate() {
        let x = segment_tensor(cfg, seg)?;
        let name = format!("segment_{i:05}.tns");
        write_tensor(out.join(&name), &x)?;
        index.push_str(&format!(
            "{i},{},{},{},{name}\n",
            seg.origin.record, seg.origin.start_sample, seg.class_id
        ));
    }
    fs::write(out.join("segments.csv"), index).map_err(data)?;
    println!("wrote {} tensors to {}", segments.len(), out.display());
    Ok(())
}

fn decompose(cfg: &ExperimentConfig, out: &Path, tensor: &Path, rank: Option<usize>) -> CliResult<()> {
    let x = read_tensor::<f64>(tensor)?;
    let rank = rank.unwrap_or(cfg.rank);
    let mut opts = cfg.als.clone();
    opts.seed = superslice::pipeline::derive_seed(opts.seed, &[cfg.seed]);
    let res = cp_als(&x, rank, &opts)?;
    let err = res.final_error();
    write_factors(out, &res.factors, err)?;
    let history: Vec<String> = res.error_history.iter().map(|e| format!("{e:e}")).collect();
    fs::write(out.join("error_history.txt"), history.join("\n") + "\n").map_err(data)?;
    let projector = build_projector(&res.factors.c)?;
    let s = super_slices(&x, &projector)?;
    write_tensor(out.join("super_slices.tns"), &s)?;
    println!("rank {rank}: normalized error {err:.6e} after {} iterations", res.error_history.len() - 1);
    Ok(())
}

fn train_cmd(cfg: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let segments = load_segments::<f64>(cfg)?;
    let labels: Vec<usize> = segments.iter().map(|s| s.class_id).collect();
    let n_classes = labels.iter().copied().max().unwrap_or(0).max(1) + 1;
    let (inputs, shape) = cnn_inputs(cfg, &segments)?;
    let h = &cfg.hyper;
    let arch = Architecture::with_layer_count(cfg.layers, shape, cfg.filter, &h.feature_maps, h.fc_neurons, n_classes)?;
    let net = init_network::<f64>(&arch, superslice::pipeline::derive_seed(h.seed, &[cfg.seed, 1]))?;
    let trained = train(net, &inputs, &labels, h)?;
    save_checkpoint(out.join("model"), &trained, h)?;
    let last = trained.history.last();
    println!(
        "trained {} epochs on {} segments, final loss {:.4}, training accuracy {:.4}",
        trained.history.len(),
        inputs.len(),
        last.map_or(f64::NAN, |e| e.loss),
        last.map_or(f64::NAN, |e| e.accuracy)
    );
    Ok(())
}

#[derive(serde::Serialize)]
struct Evaluation {
    n_segments: usize,
    accuracy: f64,
    confusion: Vec<Vec<usize>>,
}

fn evaluate_model(cfg: &ExperimentConfig, out: &Path, dir: &Path) -> CliResult<()> {
    let (net, _) = load_checkpoint::<f64>(dir)?;
    let segments = load_segments::<f64>(cfg)?;
    let (inputs, shape) = cnn_inputs(cfg, &segments)?;
    if shape != net.arch.input {
        return Err(Failure::Config(anyhow!(
            "model expects input {:?}, configuration produces {:?}",
            net.arch.input,
            shape
        )));
    }
    let predictions = predict(&net, &inputs)?;
    let n_classes = net.arch.n_classes;
    let mut confusion = vec![vec![0; n_classes]; n_classes];
    let mut hits = 0;
    for (seg, &p) in segments.iter().zip(&predictions) {
        if seg.class_id >= n_classes {
            return Err(data(anyhow!("segment class {} unknown to the model", seg.class_id)));
        }
        confusion[seg.class_id][p] += 1;
        hits += usize::from(seg.class_id == p);
    }
    let eval = Evaluation {
        n_segments: segments.len(),
        accuracy: hits as f64 / segments.len() as f64,
        confusion,
    };
    write_json(&out.join("evaluation.json"), &eval)?;
    println!("accuracy {:.4} on {} segments", eval.accuracy, eval.n_segments);
    Ok(())
}
