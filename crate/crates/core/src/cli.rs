//! Command-line interface: `graph`, `train`, `evaluate`, `benchmark` and
//! `export-embeddings`.
//!
//! Settings come from built-in defaults, then `--config FILE`, then trailing
//! `section.key=value` overrides, then explicit flags such as `--seed`.
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::autodiff::Tensor;
use crate::config::{synthetic_kind, Settings, KEYS};
use crate::data::{
    chronological_split, known_dataset, load_column, load_csv, synthetic_series, window_series, Scaler,
    TabularDataset,
};
use crate::error::{Error, Result};
use crate::graph::build_graph;
use crate::nn::SplitModel;
use crate::trainer::{
    evaluate, folds_csv, run_benchmark, run_series_benchmark, summary_csv, summary_table, train_observed,
    Method,
};

#[derive(Debug, Parser)]
#[command(name = "umapmix", version, about = "UMAP Mixup regression training and benchmarks")]
pub struct Cli {
    /// Settings file (`key = value` lines under `[section]` headers).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice (overrides train.seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Built-in name (concrete, boston, yacht), synthetic series (trend, shock,
    /// high_vol) or a CSV path.
    #[arg(long)]
    pub dataset: String,
    /// Settings overrides as `section.key=value`.
    #[arg(value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the fuzzy data graph and write it as text.
    Graph(DataArgs),
    /// Train one model and write it with its per-epoch loss log.
    Train {
        #[command(flatten)]
        data: DataArgs,
        /// erm, mixup, manifold_mixup, umap_mixup or supervised_umap.
        #[arg(long)]
        method: Option<String>,
    },
    /// Report the RMSE of a saved model.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Multi-fold comparison of methods; writes per-fold, summary and table files.
    Benchmark {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated method list.
        #[arg(long)]
        methods: Option<String>,
        #[arg(long)]
        folds: Option<usize>,
        /// Worker threads for running folds concurrently.
        #[arg(long)]
        parallel_folds: Option<usize>,
    },
    /// Write the embedding `h(x)` of every data point as CSV.
    ExportEmbeddings {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
    },
}

fn keys_help() -> String {
    let mut s = String::from("Settings (section.key = default):\n");
    for (k, v) in KEYS {
        writeln!(s, "  {k:<26} {v}").unwrap();
    }
    s
}

enum Source {
    Tabular(TabularDataset),
    Series(Vec<f64>),
}

struct Dataset {
    name: String,
    source: Source,
}

fn resolve(name: &str, settings: &Settings) -> Result<Dataset> {
    if let Some(kind) = synthetic_kind(name) {
        let prices = synthetic_series(kind, settings.series_length, settings.train.seed)?;
        return Ok(Dataset { name: name.to_string(), source: Source::Series(prices) });
    }
    if let Some((path, target)) = known_dataset(name, &settings.data_dir) {
        let target = settings.target.clone().unwrap_or(target);
        return Ok(Dataset { name: name.to_string(), source: Source::Tabular(load_csv(path, &target)?) });
    }
    let path = Path::new(name);
    let stem = path.file_stem().map_or(name.to_string(), |s| s.to_string_lossy().into_owned());
    if settings.model_kind == Some(crate::config::ModelKind::Lstm) {
        let prices = load_column(path, &settings.series_column)?;
        return Ok(Dataset { name: stem, source: Source::Series(prices) });
    }
    let target = settings.target.as_deref().ok_or_else(|| {
        Error::Config(format!("`{name}` is not a built-in dataset; set data.target to its target column"))
    })?;
    Ok(Dataset { name: stem, source: Source::Tabular(load_csv(path, target)?) })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

struct Ctx {
    settings: Settings,
    out: PathBuf,
}

impl Ctx {
    fn new(cli: &Cli, overrides: &[String]) -> Result<Self> {
        let mut settings = Settings::load(cli.config.as_deref(), overrides)?;
        if let Some(seed) = cli.seed {
            settings.train.seed = seed;
        }
        Ok(Self { settings, out: cli.out.clone() })
    }

    /// Path of an output file, creating the output directory on first use.
    fn output(&self, file: String) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        Ok(self.out.join(file))
    }
}

/// Training-side inputs of a dataset: whole table, or the training windows of
/// a chronological split with its shared price scaler.
fn training_view(d: &Dataset, s: &Settings) -> Result<(Tensor, Tensor, Option<Scaler>, bool)> {
    match &d.source {
        Source::Tabular(t) => {
            let scaler = s.train.standardize.then(|| Scaler::fit(&t.x, &t.y));
            Ok((t.x.clone(), t.y.clone(), scaler, false))
        }
        Source::Series(p) => {
            let (tr, te) = chronological_split(p, s.window, s.series_test_fraction)?;
            let boundary = te.target_index[0] - s.window;
            let scaler = s.train.standardize.then(|| Scaler::fit_shared(&p[..boundary], s.window, 1)).transpose()?;
            Ok((tr.x, tr.y, scaler, true))
        }
    }
}

fn cmd_graph(ctx: &Ctx, d: &Dataset) -> Result<()> {
    let s = &ctx.settings;
    let (x, _, scaler, _) = training_view(d, s)?;
    let x = match scaler {
        Some(sc) => sc.transform_x(&x)?,
        None => x,
    };
    let g = build_graph(&x, s.train.k, s.train.metric, s.train.exec)?;
    let path = ctx.output(format!("{}.graph", d.name))?;
    g.export(&path)?;
    println!("n={} k={} edges={} mean_p={:.6}", g.n(), g.k(), g.edges().len(), g.mean_p());
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_train(ctx: &Ctx, d: &Dataset) -> Result<()> {
    let s = &ctx.settings;
    let (x, y, scaler, series) = training_view(d, s)?;
    let cfg = s.train_config(series);
    let (model, report) = train_observed(&cfg, &x, &y, scaler, &mut |_| {})?;
    let stem = format!("{}-{}", d.name, cfg.method);
    let model_path = ctx.output(format!("{stem}.model"))?;
    model.save(&model_path)?;
    write(&ctx.output(format!("{stem}-report.csv"))?, report.to_csv())?;
    if let Some(last) = report.epochs.last() {
        println!(
            "{stem}: {} epochs, final loss {:.6} (supervised {:.6}, umap {:.6}), {:.1}s",
            report.epochs.len(),
            last.total,
            last.supervised,
            last.umap,
            report.wall_clock_secs
        );
    }
    println!("wrote {}", model_path.display());
    Ok(())
}

/// Evaluation inputs: the whole table, or the test windows of a series.
fn evaluation_view(d: &Dataset, s: &Settings) -> Result<(Tensor, Tensor)> {
    match &d.source {
        Source::Tabular(t) => Ok((t.x.clone(), t.y.clone())),
        Source::Series(p) => {
            let (_, te) = chronological_split(p, s.window, s.series_test_fraction)?;
            Ok((te.x, te.y))
        }
    }
}

fn check_width(model: &SplitModel, x: &Tensor, op: &'static str) -> Result<()> {
    if model.d_x() != x.cols() {
        return Err(Error::shape(op, format!("model expects d_x={} but the dataset has d_x={}", model.d_x(), x.cols())));
    }
    Ok(())
}

fn cmd_evaluate(ctx: &Ctx, d: &Dataset, model_path: &Path) -> Result<()> {
    let model = SplitModel::load(model_path)?;
    let (x, y) = evaluation_view(d, &ctx.settings)?;
    check_width(&model, &x, "evaluate")?;
    println!("rmse {}", evaluate(&model, &x, &y)?);
    Ok(())
}

fn cmd_benchmark(ctx: &Ctx, d: &Dataset) -> Result<()> {
    let s = &ctx.settings;
    let results = match &d.source {
        Source::Tabular(t) => run_benchmark(&d.name, t, &s.methods, &s.train_config(false), &s.benchmark_options())?,
        Source::Series(p) => run_series_benchmark(&d.name, p, &s.methods, &s.train_config(true), &s.series_options())?,
    };
    write(&ctx.output(format!("{}-folds.csv", d.name))?, folds_csv(&results))?;
    write(&ctx.output(format!("{}-summary.csv", d.name))?, summary_csv(&results))?;
    let table = summary_table(&results);
    write(&ctx.output(format!("{}-table.md", d.name))?, &table)?;
    print!("{table}");
    Ok(())
}

/// `id,z_1..z_{d_z},y` with `z = h(x)` of each row's raw features.
pub fn embeddings_csv(model: &SplitModel, x: &Tensor, y: &Tensor) -> Result<String> {
    check_width(model, x, "export-embeddings")?;
    let z = model.embed_raw(x)?;
    let mut s = String::from("id");
    for k in 1..=model.d_z() {
        write!(s, ",z_{k}").unwrap();
    }
    s.push_str(",y\n");
    for i in 0..x.rows() {
        write!(s, "{i}").unwrap();
        for v in z.row(i) {
            write!(s, ",{v}").unwrap();
        }
        for v in y.row(i) {
            write!(s, ",{v}").unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}

fn cmd_export(ctx: &Ctx, d: &Dataset, model_path: &Path) -> Result<()> {
    let model = SplitModel::load(model_path)?;
    let (x, y) = match &d.source {
        Source::Tabular(t) => (t.x.clone(), t.y.clone()),
        Source::Series(p) => {
            let w = window_series(p, ctx.settings.window)?;
            (w.x, w.y)
        }
    };
    let csv = embeddings_csv(&model, &x, &y)?;
    let path = ctx.output(format!("{}-embeddings.csv", d.name))?;
    write(&path, csv)?;
    println!("wrote {} ({} rows, d_z={})", path.display(), x.rows(), model.d_z());
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Graph(data) => {
            let ctx = Ctx::new(cli, &data.overrides)?;
            cmd_graph(&ctx, &resolve(&data.dataset, &ctx.settings)?)
        }
        Command::Train { data, method } => {
            let mut ctx = Ctx::new(cli, &data.overrides)?;
            if let Some(m) = method {
                ctx.settings.train.method = m.parse()?;
            }
            cmd_train(&ctx, &resolve(&data.dataset, &ctx.settings)?)
        }
        Command::Evaluate { data, model } => {
            let ctx = Ctx::new(cli, &data.overrides)?;
            cmd_evaluate(&ctx, &resolve(&data.dataset, &ctx.settings)?, model)
        }
        Command::Benchmark { data, methods, folds, parallel_folds } => {
            let mut ctx = Ctx::new(cli, &data.overrides)?;
            if let Some(m) = methods {
                ctx.settings.methods = m.split(',').map(|v| v.trim().parse::<Method>()).collect::<Result<_>>()?;
            }
            if let Some(f) = folds {
                ctx.settings.folds = *f;
            }
            if let Some(p) = parallel_folds {
                ctx.settings.parallel_folds = *p;
            }
            cmd_benchmark(&ctx, &resolve(&data.dataset, &ctx.settings)?)
        }
        Command::ExportEmbeddings { data, model } => {
            let ctx = Ctx::new(cli, &data.overrides)?;
            cmd_export(&ctx, &resolve(&data.dataset, &ctx.settings)?, model)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let command = Cli::command().after_long_help(keys_help());
    let cli = match command.try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
