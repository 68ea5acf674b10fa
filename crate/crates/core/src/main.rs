use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mdan::data::io::{load_dense_csv, load_sparse_sv, write_dense_csv};
use mdan::data::{DomainManifest, Format, ManifestEntry, Role};
use mdan::eval::{pad, run_experiment, wilcoxon_signed_rank, ExperimentConfig, Method, ProbeConfig};
use mdan::mdan::{evaluate, train, MdanModel, Mode};
use mdan::nn::checkpoint::write_networks;
use mdan::nn::Matrix;
use mdan::theory::{enumerate_stumps, h_divergence};
use mdan::{Error, Result};

#[derive(Parser)]
#[command(name = "mdan", version, about = "Multisource domain-adversarial training and divergence tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured domains as dense CSV files plus a manifest.
    Generate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train one multisource model and report its target metric.
    Train {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Empirical stump-class H-divergence between two sample files.
    Divergence {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Write the finite-sample bound report for the configured domains.
    Bound {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Proxy A-distance between two sample files.
    Pad {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Wilcoxon signed-rank test on the first two columns of a CSV file.
    Wilcoxon {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every configured method and seed and write the report directory.
    Experiment {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        train: TrainArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the data seed (generate, bound) or the training seeds.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_parser = ["hard", "soft"])]
    mode: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct PairArgs {
    a: PathBuf,
    b: PathBuf,
    /// Read files as sparse `label idx:val` lines of this dimension.
    #[arg(long)]
    sparse_dim: Option<usize>,
}

impl PairArgs {
    fn load(&self) -> Result<(Matrix, Matrix)> {
        let read = |p: &Path| match self.sparse_dim {
            Some(d) => load_sparse_sv(p, d),
            None => load_dense_csv(p),
        };
        let a = read(&self.a)?.features;
        let b = read(&self.b)?.features;
        if a.rows() == 0 || b.rows() == 0 {
            return Err(Error::Input("sample files must contain at least one row".into()));
        }
        Ok((a, b))
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_config(run: &RunArgs, train: Option<&TrainArgs>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&run.config)?;
    if let Some(t) = train {
        if let Some(m) = &t.mode {
            cfg.train.mode = m.parse::<Mode>()?;
        }
        if let Some(g) = t.gamma {
            cfg.train.gamma = g;
        }
        if let Some(mu) = t.mu {
            cfg.train.mu = mu;
        }
        if let Some(b) = t.batch {
            cfg.train.batch_size = b;
        }
        if let Some(e) = t.epochs {
            cfg.train.epochs = e;
        }
        if let Some(s) = run.seed {
            cfg.train.seed = s;
            cfg.experiment.seeds = vec![s];
        }
    } else if let Some(s) = run.seed {
        cfg.data.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { run } => {
            let cfg = load_config(&run, None)?;
            let data = cfg.load_data()?;
            let mut entries = Vec::new();
            for (i, s) in data.sources.iter().enumerate() {
                let path = run.out.join(format!("source_{i}.csv"));
                write(&path, &write_dense_csv(s.features(), Some(s.labels())))?;
                entries.push(ManifestEntry {
                    path,
                    role: Role::Source,
                    format: Format::DenseCsv,
                    labeled: true,
                });
            }
            let path = run.out.join("target.csv");
            let labels = data.target.oracle_labels();
            write(&path, &write_dense_csv(data.target.features(), labels))?;
            entries.push(ManifestEntry {
                path,
                role: Role::Target,
                format: Format::DenseCsv,
                labeled: labels.is_some(),
            });
            let manifest = DomainManifest {
                dim: data.dim(),
                entries,
            };
            write(&run.out.join("manifest.txt"), &manifest.to_text(&run.out))?;
            println!("wrote {} sources and a target to {}", data.k(), run.out.display());
        }
        Command::Train { run, train: targs } => {
            let cfg = load_config(&run, Some(&targs))?;
            let data = cfg.load_data()?;
            let target = data.target.oracle().ok();
            let classes = data
                .sources
                .iter()
                .flat_map(|s| s.labels().iter())
                .max()
                .map_or(2, |m| (m + 1).max(2));
            let model_cfg = cfg.model_config(data.dim(), classes)?;
            let model = MdanModel::new(&model_cfg, data.k(), cfg.train.seed)?;
            let out = train(model, &data.sources, &data.target, &cfg.train)?;
            write(&run.out.join("model.ckpt"), &write_networks(&out.model.networks()))?;
            let trace: String = out.history.iter().map(|t| t.to_json() + "\n").collect();
            write(&run.out.join("trace.log"), &trace)?;
            if let Some(t) = target {
                let v = evaluate(&out.model, &t, cfg.experiment.metric)?;
                write(
                    &run.out.join("metrics.csv"),
                    &format!("metric,value\n{},{v}\n", cfg.experiment.metric.name()),
                )?;
                println!("target {} = {v}", cfg.experiment.metric.name());
            } else {
                println!("trained {} steps; target labels unavailable", out.history.len());
            }
        }
        Command::Divergence { pair } => {
            let (a, b) = pair.load()?;
            let class = enumerate_stumps(&Matrix::vstack(&[&a, &b])?)?;
            println!("{:?}", h_divergence(&class, &a, &b)?);
        }
        Command::Bound { run } => {
            let mut cfg = load_config(&run, None)?;
            cfg.bound.enabled = true;
            cfg.experiment.methods = vec![Method::SourceOnlyCombined];
            let data = cfg.load_data()?;
            let target = data.target.oracle()?;
            let report = mdan::eval::experiment::bound_for(&cfg, &data, &target)?;
            let text = report.to_text();
            write(&run.out.join("bound.txt"), &text)?;
            print!("{text}");
        }
        Command::Pad { pair, seed } => {
            let (a, b) = pair.load()?;
            let probe = ProbeConfig {
                seed,
                ..ProbeConfig::default()
            };
            println!("{:?}", pad(&a, &b, &probe)?);
        }
        Command::Wilcoxon { file, out } => {
            let raw = load_dense_csv(&file)?;
            let m = raw.features;
            if m.cols() < 2 {
                return Err(Error::Input("wilcoxon needs two columns of paired values".into()));
            }
            let a: Vec<f64> = m.iter_rows().map(|r| r[0]).collect();
            let b: Vec<f64> = m.iter_rows().map(|r| r[1]).collect();
            let r = wilcoxon_signed_rank(&a, &b)?;
            let text = format!("statistic,p\n{},{}\n", r.statistic, r.p_value);
            if let Some(dir) = out {
                write(&dir.join("wilcoxon.csv"), &text)?;
            }
            print!("{text}");
        }
        Command::Experiment { run, train: targs } => {
            let cfg = load_config(&run, Some(&targs))?;
            let report = run_experiment(&cfg)?;
            report.write(&run.out)?;
            print!("{}", report.summary_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
