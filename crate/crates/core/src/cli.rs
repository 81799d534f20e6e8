//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::convert::{self, Background, ClusterMode, MarginAxis};
use crate::dataset::BinaryDataset;
use crate::divergence::distance;
use crate::error::{Error, Result};
use crate::io::{self as fmt, format_f64, TileRecord};
use crate::maxent::{fit, FitOptions};
use crate::rank::{fitamin, RankMode};
use crate::redescribe::fruits;
use crate::tile::{format_ids, FreqTile, TileSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tilediff",
    version,
    about = "Compare, redescribe and rank tile-based mining results"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn mining output into a tile-set file.
    #[command(subcommand)]
    Convert(ConvertCommand),
    /// Distance between two tile sets given background knowledge.
    Distance(DistanceArgs),
    /// Pairwise distances between several tile sets, as a TSV matrix.
    DistanceMatrix(MatrixArgs),
    /// Greedily pick candidate tiles that best describe a target set.
    Redescribe(RedescribeArgs),
    /// Order tiles by the information each adds over those above it.
    Rank(RankArgs),
    /// Inspect the maximum-entropy model of a tile set.
    #[command(subcommand)]
    Model(ModelCommand),
}

#[derive(Debug, Subcommand)]
pub enum ConvertCommand {
    /// One itemset per line (column ids), optionally `cols | rows`.
    Itemsets {
        #[command(flatten)]
        io: ConvertIo,
    },
    /// `row cluster` pairs, one per line.
    Clustering {
        #[command(flatten)]
        io: ConvertIo,
        #[arg(long, default_value = "single", value_parser = ClusterMode::from_str)]
        mode: ClusterMode,
    },
    /// One tile per column (or row) holding its density.
    Margins {
        #[command(flatten)]
        out: DataOut,
        #[arg(long, value_enum, default_value_t = AxisArg::Columns)]
        axis: AxisArg,
    },
    /// A single tile over the whole dataset.
    Density {
        #[command(flatten)]
        out: DataOut,
    },
}

#[derive(Debug, Args)]
pub struct DataOut {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertIo {
    #[command(flatten)]
    pub out: DataOut,
    /// Mining result to convert.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxisArg {
    Columns,
    Rows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub data: PathBuf,
    /// Preset (none, density, columns, rows, columns+rows) or a tile-set file.
    #[arg(long, default_value = "none")]
    pub background: String,
    #[arg(long, default_value_t = FitOptions::default().tolerance)]
    pub tolerance: f64,
    #[arg(long, default_value_t = FitOptions::default().max_sweeps)]
    pub max_sweeps: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub common: Common,
    /// Tile-set files; row and column order follow this list.
    #[arg(long = "tiles", required = true, num_args = 1..)]
    pub tiles: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RedescribeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub tiles: PathBuf,
    #[arg(long, default_value = "exact", value_parser = RankMode::from_str)]
    pub mode: RankMode,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Cell probabilities of the model of `tiles ∪ background`, one row per line.
    Dump {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tiles: Option<PathBuf>,
    },
    /// Draw datasets from the model, written in the dataset format.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tiles: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: u64,
    },
}

/// Parses arguments, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match run(&config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

pub fn run(config: &RunConfig) -> Result<()> {
    match &config.command {
        Command::Convert(c) => run_convert(c),
        Command::Distance(a) => run_distance(a),
        Command::DistanceMatrix(a) => run_matrix(a),
        Command::Redescribe(a) => run_redescribe(a),
        Command::Rank(a) => run_rank(a),
        Command::Model(ModelCommand::Dump { common, tiles }) => run_dump(common, tiles.as_deref()),
        Command::Model(ModelCommand::Sample {
            common,
            tiles,
            count,
            seed,
        }) => run_sample(common, tiles.as_deref(), *count, *seed),
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Buffers output for `path` (stdout when absent) and flushes it at the end.
fn emit(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let shown = path.unwrap_or(Path::new("<stdout>"));
    let result = match path {
        Some(p) => {
            let f = File::create(p).map_err(io_err(shown))?;
            let mut w = BufWriter::new(f);
            body(&mut w).and_then(|_| w.flush())
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w).and_then(|_| w.flush())
        }
    };
    match result {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(io_err(shown)),
    }
}

struct Context {
    data: BinaryDataset,
    background: TileSet,
    opts: FitOptions,
}

impl Context {
    fn load(c: &Common) -> Result<Self> {
        let opts = FitOptions {
            tolerance: c.tolerance,
            max_sweeps: c.max_sweeps,
            ..FitOptions::default()
        };
        opts.validate()?;
        let data = fmt::read_dataset(&c.data)?;
        let background = match Background::from_str(&c.background) {
            Ok(preset) => preset.tiles(&data),
            Err(_) => fmt::read_tiles(Path::new(&c.background), data.dims(), Some(&data))?,
        };
        Ok(Context {
            data,
            background,
            opts,
        })
    }

    fn tiles(&self, path: &Path) -> Result<TileSet> {
        fmt::read_tiles(path, self.data.dims(), Some(&self.data))
    }
}

fn run_convert(c: &ConvertCommand) -> Result<()> {
    let (out, conversion) = match c {
        ConvertCommand::Itemsets { io } => {
            let data = fmt::read_dataset(&io.out.data)?;
            let r = fmt::read_itemsets(&io.input)?;
            (&io.out, convert::itemsets_to_tiles(&r, &data)?)
        }
        ConvertCommand::Clustering { io, mode } => {
            let data = fmt::read_dataset(&io.out.data)?;
            let r = fmt::read_clustering(&io.input, data.n_rows())?;
            (&io.out, convert::clustering_to_tiles(&r, &data, *mode)?)
        }
        ConvertCommand::Margins { out, axis } => {
            let data = fmt::read_dataset(&out.data)?;
            let axis = match axis {
                AxisArg::Columns => MarginAxis::Columns,
                AxisArg::Rows => MarginAxis::Rows,
            };
            (out, plain(convert::margin_tiles(&data, axis)))
        }
        ConvertCommand::Density { out } => {
            let data = fmt::read_dataset(&out.data)?;
            (out, plain(convert::density_tile(&data)))
        }
    };
    for k in &conversion.skipped {
        eprintln!(
            "warning: input #{} has empty support and was skipped",
            k + 1
        );
    }
    emit(out.output.as_deref(), |w| {
        fmt::write_tiles(&conversion.tiles, w)
    })
}

fn plain(tiles: TileSet) -> convert::Conversion {
    convert::Conversion {
        tiles,
        skipped: Vec::new(),
    }
}

fn run_distance(a: &DistanceArgs) -> Result<()> {
    let ctx = Context::load(&a.common)?;
    let left = ctx.tiles(&a.left)?;
    let right = ctx.tiles(&a.right)?;
    let report = distance(&left, &right, &ctx.background, &ctx.opts)?;
    emit(a.common.output.as_deref(), |w| match a.format {
        Format::Tsv => writeln!(w, "{:.6}", report.value),
        Format::Jsonl => {
            serde_json::to_writer(&mut *w, &report)?;
            writeln!(w)
        }
    })
}

fn run_matrix(a: &MatrixArgs) -> Result<()> {
    let ctx = Context::load(&a.common)?;
    let sets = a
        .tiles
        .iter()
        .map(|p| ctx.tiles(p))
        .collect::<Result<Vec<_>>>()?;
    let k = sets.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| Ok(distance(&sets[i], &sets[j], &ctx.background, &ctx.opts)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let mut matrix = vec![vec![0.0; k]; k];
    for (&(i, j), &d) in pairs.iter().zip(&values) {
        matrix[i][j] = d;
        matrix[j][i] = d;
    }
    let names: Vec<String> = a.tiles.iter().map(|p| p.display().to_string()).collect();
    emit(a.common.output.as_deref(), |w| {
        for name in &names {
            write!(w, "\t{name}")?;
        }
        writeln!(w)?;
        for (name, row) in names.iter().zip(&matrix) {
            write!(w, "{name}")?;
            for &d in row {
                write!(w, "\t{}", format_f64(d))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct RedescribeStep<'a> {
    step: usize,
    tile: TileRecord<'a>,
    distance: f64,
}

fn run_redescribe(a: &RedescribeArgs) -> Result<()> {
    let ctx = Context::load(&a.common)?;
    let target = ctx.tiles(&a.target)?;
    let candidates = ctx.tiles(&a.candidates)?;
    let r = fruits(&target, &candidates, &ctx.background, &ctx.opts)?;
    emit(a.common.output.as_deref(), |w| {
        if a.format == Format::Tsv {
            writeln!(w, "step\trows\tcols\tfreq\tdistance")?;
        }
        for (step, (tile, &d)) in r.selected.iter().zip(&r.trace).enumerate() {
            match a.format {
                Format::Jsonl => {
                    let rec = RedescribeStep {
                        step: step + 1,
                        tile: tile.into(),
                        distance: d,
                    };
                    serde_json::to_writer(&mut *w, &rec)?;
                    writeln!(w)?;
                }
                Format::Tsv => {
                    write_tile_tsv(w, step + 1, tile)?;
                    writeln!(w, "\t{}", format_f64(d))?;
                }
            }
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct RankStep<'a> {
    step: usize,
    tile: TileRecord<'a>,
    distance_after: f64,
    gain: f64,
}

fn run_rank(a: &RankArgs) -> Result<()> {
    let ctx = Context::load(&a.common)?;
    let tiles = ctx.tiles(&a.tiles)?;
    let r = fitamin(&tiles, &ctx.background, a.mode, &ctx.opts)?;
    emit(a.common.output.as_deref(), |w| {
        if a.format == Format::Tsv {
            writeln!(w, "step\trows\tcols\tfreq\tdistance_after\tgain")?;
        }
        for (step, ((&k, &d), &g)) in r.order.iter().zip(&r.distances).zip(&r.gains).enumerate() {
            let tile = &tiles.tiles()[k];
            match a.format {
                Format::Jsonl => {
                    let rec = RankStep {
                        step: step + 1,
                        tile: tile.into(),
                        distance_after: d,
                        gain: g,
                    };
                    serde_json::to_writer(&mut *w, &rec)?;
                    writeln!(w)?;
                }
                Format::Tsv => {
                    write_tile_tsv(w, step + 1, tile)?;
                    writeln!(w, "\t{}\t{}", format_f64(d), format_f64(g))?;
                }
            }
        }
        Ok(())
    })
}

fn write_tile_tsv(w: &mut dyn Write, step: usize, t: &FreqTile) -> io::Result<()> {
    write!(
        w,
        "{step}\t{}\t{}\t{}",
        format_ids(t.tile.rows()),
        format_ids(t.tile.cols()),
        format_f64(t.alpha())
    )
}

fn model_for(ctx: &Context, tiles: Option<&Path>) -> Result<crate::maxent::EntryModel> {
    let ts = match tiles {
        Some(p) => ctx.tiles(p)?.union(&ctx.background)?,
        None => ctx.background.clone(),
    };
    fit(&ts, &ctx.opts)
}

fn run_dump(c: &Common, tiles: Option<&Path>) -> Result<()> {
    let ctx = Context::load(c)?;
    let model = model_for(&ctx, tiles)?;
    emit(c.output.as_deref(), |w| {
        for row in model.rows() {
            let line: Vec<String> = row.iter().map(|&p| format_f64(p)).collect();
            writeln!(w, "{}", line.join("\t"))?;
        }
        Ok(())
    })
}

fn run_sample(c: &Common, tiles: Option<&Path>, count: usize, seed: u64) -> Result<()> {
    let ctx = Context::load(c)?;
    let model = model_for(&ctx, tiles)?;
    let (n, m) = model.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    emit(c.output.as_deref(), |w| {
        for _ in 0..count {
            let mut d = BinaryDataset::zeros(n, m).expect("model has nonempty dims");
            for (c, &p) in model.probabilities().iter().enumerate() {
                if rng.gen::<f64>() < p {
                    d.set(c / m + 1, c % m + 1, true).expect("in bounds");
                }
            }
            fmt::write_dataset(&d, &mut *w)?;
        }
        Ok(())
    })
}
