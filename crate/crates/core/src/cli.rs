//! Command-line front end. [`run`] returns the process exit code:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 1    | I/O, parse or format error                |
//! | 2    | usage error or invalid parameter          |
//! | 3    | infeasible problem                        |
//! | 4    | solver failure or unsupported request     |

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::exact::solve_exact;
use crate::instances::{app_to_qubo, generate_app, generate_blob_graph, maxcut_to_qubo, parse_gset, scale_radius};
use crate::metrics::{speedup, write_csv, BenchmarkRecord};
use crate::orchestrator::{split_solve, PartitionerKind, SplitConfig, SweepKind};
use crate::partition::Partition;
use crate::qp::{ProblemClass, QuadraticProgram};
use crate::subsolvers::{branch_and_bound, SolverBudget, SolverKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Parse { .. } => EXIT_IO,
        Error::InvalidParameter(_) | Error::Dimension { .. } | Error::IndexOutOfRange { .. } => EXIT_USAGE,
        Error::InvalidProblem(_) => EXIT_IO,
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::GraphTooLarge { .. } | Error::SizeCapExceeded { .. } | Error::Unsupported(_) => EXIT_SOLVER,
    }
}

#[derive(Parser, Debug)]
#[command(name = "splitqp", version, about = "Partition-and-solve heuristic for binary quadratic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a problem JSON and write the report JSON.
    Solve {
        /// Problem JSON file.
        problem: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Generate a Gaussian-blob MaxCut problem.
    GenMaxcut {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        blobs: usize,
        #[arg(long, default_value_t = 1.0)]
        std: f64,
        #[arg(long, default_value_t = 1.2)]
        threshold: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the graph in Gset format.
        #[arg(long)]
        gset_output: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Generate an antenna placement problem.
    GenApp {
        #[arg(long)]
        sites: usize,
        /// Defaults to 20 per site.
        #[arg(long)]
        devices: Option<usize>,
        /// Antennas to place; defaults to half the sites.
        #[arg(long)]
        v: Option<usize>,
        /// Coverage radius (km) at the base size.
        #[arg(long, default_value_t = 15.0)]
        radius: f64,
        /// Scale the radius by sqrt(scale_base / sites).
        #[arg(long)]
        scale_base: Option<usize>,
        #[arg(long, default_value_t = 100.0)]
        box_km: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the instance (coordinates and counts).
        #[arg(long)]
        instance_output: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Convert a Gset graph file to problem JSON.
    ImportGset {
        input: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Branch-and-bound on the whole problem.
    Exact {
        problem: PathBuf,
        #[arg(long)]
        budget_nodes: Option<u64>,
        #[arg(long)]
        time_limit_s: Option<f64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Solve every problem JSON in a directory and tabulate the results.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, value_enum, default_value_t = Reference::Exact)]
        reference: Reference,
        /// Wall-clock cap (s) for each exact reference solve.
        #[arg(long)]
        instance_time_limit_s: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Reference {
    /// No reference: alpha and speed-up are left empty.
    None,
    /// Exact branch-and-bound reference.
    Exact,
    /// Exact reference plus a branch-and-bound run capped at the split time.
    Approx,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct SolveArgs {
    /// Base configuration JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// exhaustive | branch_bound | greedy
    #[arg(long)]
    subsolver: Option<String>,
    #[arg(long)]
    budget_nodes: Option<u64>,
    #[arg(long)]
    time_limit_s: Option<f64>,
    #[arg(long, env = crate::orchestrator::WORKERS_ENV)]
    workers: Option<usize>,
    /// auto | single_flip | double_flip | both | none
    #[arg(long)]
    sweep: Option<String>,
    /// auto | spectral | greedy | external
    #[arg(long)]
    partitioner: Option<String>,
    /// Part labels (JSON array) for the external partitioner.
    #[arg(long)]
    partition: Option<PathBuf>,
}

impl SolveArgs {
    fn config(&self) -> Result<SplitConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let mut value: serde_json::Value = serde_json::from_str(&read(path)?)?;
                if let (Some(k), Some(obj)) = (self.k, value.as_object_mut()) {
                    obj.insert("k".into(), k.into());
                }
                serde_json::from_value(value)?
            }
            None => SplitConfig::new(
                self.k
                    .ok_or_else(|| Error::InvalidParameter("--k is required without --config".into()))?,
            ),
        };
        if let Some(v) = self.iters {
            cfg.n_iter = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.subsolver {
            cfg.subsolver = v.parse::<SolverKind>()?;
        }
        if self.budget_nodes.is_some() || self.time_limit_s.is_some() {
            cfg.budget = SolverBudget {
                node_budget: self.budget_nodes,
                wall_limit: self.time_limit_s,
            };
        }
        if let Some(v) = self.workers {
            cfg.worker_count = v;
        }
        if let Some(v) = &self.sweep {
            cfg.sweep = v.parse::<SweepKind>()?;
        }
        if let Some(v) = &self.partitioner {
            cfg.partitioner = v.parse::<PartitionerKind>()?;
        }
        if let Some(path) = &self.partition {
            let p: Partition = serde_json::from_str(&read(path)?)?;
            cfg.partition = Some(p);
            cfg.partitioner = PartitionerKind::External;
        }
        Ok(cfg)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn load_problem(path: &Path) -> Result<QuadraticProgram> {
    QuadraticProgram::from_json(&read(path)?)
}

/// Cut value of `x` when the program is a MaxCut encoding.
fn maxcut_value(qp: &QuadraticProgram, cost: f64) -> Option<f64> {
    (qp.class() == Some(ProblemClass::MaxCut)).then_some(-cost)
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Solve { problem, solve, output } => {
            let qp = load_problem(&problem)?;
            let report = split_solve(&qp, &solve.config()?)?;
            eprintln!(
                "best_cost {} feasible {} iterations {} ({:?}) tts {:.3}s",
                report.best_cost, report.feasible, report.iterations_run, report.termination, report.tts_seconds
            );
            emit(output.as_deref(), &report.to_json()?)
        }
        Command::GenMaxcut {
            n,
            blobs,
            std,
            threshold,
            seed,
            gset_output,
            output,
        } => {
            let g = generate_blob_graph(n, blobs, std, threshold, seed)?;
            if let Some(path) = gset_output {
                fs::write(&path, crate::instances::write_gset(&g))
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
            emit(output.as_deref(), &maxcut_to_qubo(&g).to_json()?)
        }
        Command::GenApp {
            sites,
            devices,
            v,
            radius,
            scale_base,
            box_km,
            seed,
            instance_output,
            output,
        } => {
            let radius = match scale_base {
                Some(base) if base > 0 && sites > 0 => scale_radius(radius, sites, base),
                Some(_) => return Err(Error::InvalidParameter("scale base and sites must be positive".into())),
                None => radius,
            };
            let inst = generate_app(sites, devices, v.unwrap_or(sites / 2), radius, box_km, seed)?;
            if let Some(path) = instance_output {
                fs::write(&path, inst.to_json()?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
            emit(output.as_deref(), &app_to_qubo(&inst).to_json()?)
        }
        Command::ImportGset { input, output } => {
            let g = parse_gset(&read(&input)?)?;
            emit(output.as_deref(), &maxcut_to_qubo(&g).to_json()?)
        }
        Command::Exact {
            problem,
            budget_nodes,
            time_limit_s,
            output,
        } => {
            let qp = load_problem(&problem)?;
            let budget = SolverBudget {
                node_budget: budget_nodes,
                wall_limit: time_limit_s,
            };
            let s = solve_exact(&qp, &budget)?;
            eprintln!("cost {} optimal {} nodes {} ({:.3}s)", s.cost, s.optimal, s.nodes, s.seconds);
            emit(output.as_deref(), &serde_json::to_string_pretty(&s)?)
        }
        Command::Bench {
            dir,
            solve,
            reference,
            instance_time_limit_s,
            format,
            output,
        } => {
            let records = bench(&dir, &solve, reference, instance_time_limit_s)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&records)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(&mut buf, &records)?;
                    String::from_utf8(buf).expect("csv output is utf-8")
                }
            };
            emit(output.as_deref(), text.trim_end())
        }
    }
}

fn bench(dir: &Path, args: &SolveArgs, reference: Reference, cap: Option<f64>) -> Result<Vec<BenchmarkRecord>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    let mut records = Vec::new();
    for path in files {
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let qp = load_problem(&path)?;
        let mut cfg = args.config()?;
        cfg.k = cfg.k.min(qp.n().max(1));
        let report = split_solve(&qp, &cfg)?;
        let mut split = BenchmarkRecord {
            instance: id.clone(),
            n: qp.n(),
            k: report.k,
            method: "split".into(),
            best_cost: report.objective_cost,
            cut_value: maxcut_value(&qp, report.objective_cost),
            feasible: report.feasible,
            tts_seconds: report.tts_seconds,
            iterations: report.iterations_run,
            alpha: None,
            alpha_cut: None,
            gap: None,
            speedup: None,
        };
        if reference == Reference::None {
            records.push(split);
            continue;
        }
        let budget = SolverBudget {
            node_budget: None,
            wall_limit: cap,
        };
        let exact = solve_exact(&qp, &budget)?;
        let exact_cut = maxcut_value(&qp, exact.cost);
        let mut exact_rec = BenchmarkRecord {
            instance: id.clone(),
            n: qp.n(),
            k: 1,
            method: if exact.optimal { "exact" } else { "exact_capped" }.into(),
            best_cost: exact.cost,
            cut_value: exact_cut,
            feasible: qp.is_feasible(&exact.x)?,
            tts_seconds: exact.seconds,
            iterations: 1,
            alpha: None,
            alpha_cut: None,
            gap: None,
            speedup: None,
        };
        exact_rec.compare_to(exact.cost, exact_cut);
        split.compare_to(exact.cost, exact_cut);
        split.speedup = speedup(exact.seconds, report.tts_seconds).ok();
        records.push(split);
        if reference == Reference::Approx {
            let capped = SolverBudget::seconds(report.tts_seconds.max(1e-3));
            let start = std::time::Instant::now();
            let approx = branch_and_bound(&qp, &capped)?;
            let mut rec = BenchmarkRecord {
                instance: id.clone(),
                n: qp.n(),
                k: 1,
                method: "approx".into(),
                best_cost: approx.cost,
                cut_value: maxcut_value(&qp, approx.cost),
                feasible: qp.is_feasible(&approx.x)?,
                tts_seconds: start.elapsed().as_secs_f64(),
                iterations: 1,
                alpha: None,
                alpha_cut: None,
                gap: None,
                speedup: None,
            };
            rec.compare_to(exact.cost, exact_cut);
            records.push(rec);
        }
        records.push(exact_rec);
    }
    Ok(records)
}
