//! Command-line front end: build trees from point streams under budgets,
//! query, sample, report argmax and stats, export dense tables, and run the
//! tree-vs-dense-table benchmark.
//!
//! Exit codes: 0 success (including anytime budget stops), 2 usage errors,
//! 1 runtime errors. Diagnostics go to stderr; reports are machine-readable
//! `key=value` lines on stdout.

mod bench;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use mrbt::{io as treeio, Budget, InsertOutcome, Point, SpaceDescriptor, Tree};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "mrbt",
    version,
    about = "Multi-resolution binary trees over discrete joint distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a tree from a CSV point stream (coords...,weight per row).
    Build {
        /// Comma-separated per-dimension cardinalities, e.g. "4,4".
        #[arg(long)]
        space: String,
        /// Input CSV path, or "-" for stdin.
        #[arg(long)]
        input: String,
        /// Output tree document path.
        #[arg(long)]
        out: PathBuf,
        /// Stop before any insert that would push past this node count.
        #[arg(long)]
        max_nodes: Option<usize>,
        /// Stop after this many accepted points.
        #[arg(long)]
        max_points: Option<usize>,
        /// Wall-clock limit for the whole build.
        #[arg(long)]
        time_limit_ms: Option<u64>,
    },
    /// Probability and region report for one point.
    Query {
        #[arg(long)]
        tree: PathBuf,
        /// Comma-separated coordinates, e.g. "2,0".
        #[arg(long)]
        point: String,
    },
    /// Draw points from the distribution, one coordinate row per draw.
    Sample {
        #[arg(long)]
        tree: PathBuf,
        #[arg(short)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Report the maximum-density regions (optionally draw one max cell).
    Argmax {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        draw: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Size and shape report, with the dense-table comparison.
    Stats {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Write the full dense table as CSV (small spaces only).
    ExportDense {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build from a target distribution and benchmark tree queries against
    /// dense-table lookups and CDF sampling.
    Bench {
        #[arg(long)]
        space: String,
        /// "uniform", "bimodal", or a dense CSV path.
        #[arg(long, default_value = "uniform")]
        target: String,
        /// Number of points to draw into the tree.
        #[arg(short)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

pub(crate) type CliResult = Result<(), Box<dyn std::error::Error>>;

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Build {
            space,
            input,
            out,
            max_nodes,
            max_points,
            time_limit_ms,
        } => build(&space, &input, &out, max_nodes, max_points, time_limit_ms),
        Command::Query { tree, point } => query(&tree, &point),
        Command::Sample { tree, n, seed } => sample(&tree, n, seed),
        Command::Argmax { tree, draw, seed } => argmax(&tree, draw, seed),
        Command::Stats { tree } => stats(&tree),
        Command::ExportDense { tree, out } => export_dense(&tree, &out),
        Command::Bench {
            space,
            target,
            n,
            seed,
        } => bench::run(&space, &target, n, seed),
    }
}

fn read_input(input: &str) -> Result<String, Box<dyn std::error::Error>> {
    if input == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| format!("stdin: {e}"))?;
        Ok(text)
    } else {
        read_file(Path::new(input))
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, Box<dyn std::error::Error>> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn write_file(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_tree(path: &Path) -> Result<Tree, Box<dyn std::error::Error>> {
    Ok(treeio::deserialize_tree(&read_file(path)?)?)
}

fn build(
    space: &str,
    input: &str,
    out: &Path,
    max_nodes: Option<usize>,
    max_points: Option<usize>,
    time_limit_ms: Option<u64>,
) -> CliResult {
    let space: SpaceDescriptor = space.parse()?;
    let text = read_input(input)?;
    let stream = treeio::parse_points_csv(&text, &space)?;
    let budget = Budget {
        max_nodes,
        max_points,
        deadline: time_limit_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
    };
    let mut tree = Tree::new(space, budget);
    let (mut inserted, mut ignored, mut stopped) = (0usize, 0usize, 0usize);
    for wp in stream {
        match tree.insert(wp)? {
            InsertOutcome::Inserted { .. } => inserted += 1,
            InsertOutcome::DuplicateIgnored => ignored += 1,
            InsertOutcome::BudgetExhausted => stopped += 1,
        }
    }
    write_file(out, &treeio::serialize_tree(&tree))?;
    let status = if stopped > 0 {
        "budget-exhausted"
    } else {
        "complete"
    };
    println!(
        "inserted={inserted} ignored={ignored} budget_stopped={stopped} z={} nodes={} depth={} status={status}",
        tree.total_mass(),
        tree.node_count(),
        tree.depth()
    );
    Ok(())
}

fn query(tree_path: &Path, point: &str) -> CliResult {
    let tree = load_tree(tree_path)?;
    let point: Point = point.parse()?;
    let prob = tree.prob(&point)?;
    let report = tree.region_of(&point)?;
    println!("prob={prob}");
    println!("region={}", report.region);
    println!("density={}", report.density);
    println!("mass={}", report.mass);
    println!("normalized_mass={}", report.normalized_mass);
    println!("z={}", tree.total_mass());
    Ok(())
}

fn sample(tree_path: &Path, n: usize, seed: u64) -> CliResult {
    let tree = load_tree(tree_path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for _ in 0..n {
        let p = tree.sample(&mut rng)?;
        out.push_str(&p.to_string());
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}

fn argmax(tree_path: &Path, draw: bool, seed: u64) -> CliResult {
    let tree = load_tree(tree_path)?;
    let regions = tree.max_regions()?;
    println!("max_density={}", tree.max_density());
    for r in &regions {
        println!(
            "region={} mass={} normalized_mass={}",
            r.region, r.mass, r.normalized_mass
        );
    }
    if draw {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        println!("drawn={}", tree.draw_max(&mut rng)?);
    }
    Ok(())
}

fn stats(tree_path: &Path) -> CliResult {
    let tree = load_tree(tree_path)?;
    let s = tree.stats();
    println!("space={}", tree.space());
    println!("cells={}", s.total_cells);
    println!("nodes={}", s.node_count);
    println!("leaves={}", s.leaf_count);
    println!("depth={}", s.depth);
    println!("inserted_points={}", s.inserted_points);
    println!("z={}", s.total_mass);
    println!("max_density={}", s.max_density);
    println!("tree_bytes={}", s.tree_bytes);
    println!("dense_table_bytes={}", s.dense_table_bytes);
    Ok(())
}

fn export_dense(tree_path: &Path, out: &Path) -> CliResult {
    let tree = load_tree(tree_path)?;
    let dense = tree.to_dense()?;
    write_file(out, &treeio::write_dense(tree.space(), &dense))?;
    println!("wrote={} rows={}", out.display(), dense.len());
    Ok(())
}
