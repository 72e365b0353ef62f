use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use gridplan::expansion::{build_planning_model, extract_plan, ExpansionPlan, ModelOptions};
use gridplan::grid::{validate_scenario, PlanningScenario};
use gridplan::io::{self, RunManifest};
use gridplan::milp::{solve_milp, write_lp, MilpStatus, SolverConfig};
use gridplan::sweep::{render_decision_table, render_plan_table, run_sweep, summary_csv, SweepSpec};
use gridplan::{IoError, SweepError};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(name = "gridplan", version, about = "Transmission expansion planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file (or bundled fixture name) for invariant violations.
    Validate { scenario: String },
    /// Build and solve a scenario, writing the plan, decision table and manifest.
    Solve {
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Relative optimality gap.
        #[arg(long, default_value_t = 1e-6)]
        gap: f64,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Also write the model in LP format.
        #[arg(long)]
        dump_lp: bool,
    },
    /// Run a sweep spec, writing a summary CSV and per-point plans.
    Sweep {
        spec: PathBuf,
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// List bundled scenarios, optionally writing them as JSON files.
    Fixtures {
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Solve {
            scenario,
            out,
            gap,
            time_limit,
            dump_lp,
        } => cmd_solve(&scenario, &out, gap, time_limit, dump_lp),
        Command::Sweep { spec, out, workers } => cmd_sweep(&spec, &out, workers),
        Command::Fixtures { export } => cmd_fixtures(export.as_deref()),
    };
    ExitCode::from(code)
}

/// A path, or a bundled fixture name when no such file exists.
fn load(arg: &str) -> Result<PlanningScenario, IoError> {
    let path = Path::new(arg);
    if !path.exists() && io::FIXTURES.contains(&arg) {
        return io::fixture(arg);
    }
    io::load_scenario(path)
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    io::write_atomic(path, text.as_bytes())
}

fn create_dir(dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.display().to_string(),
        source,
    })
}

fn cmd_validate(arg: &str) -> u8 {
    let scenario = match load(arg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let report = validate_scenario(&scenario);
    if report.is_empty() {
        println!("{}: ok", scenario.name);
        EXIT_OK
    } else {
        print!("{report}");
        EXIT_INVALID
    }
}

fn status_code(status: MilpStatus) -> u8 {
    match status {
        MilpStatus::Optimal => EXIT_OK,
        MilpStatus::IterationLimit => EXIT_LIMIT,
        MilpStatus::Infeasible | MilpStatus::Unbounded => EXIT_INFEASIBLE,
    }
}

fn cmd_solve(arg: &str, out: &Path, gap: f64, time_limit: Option<f64>, dump_lp: bool) -> u8 {
    let scenario = match load(arg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let report = validate_scenario(&scenario);
    if !report.is_empty() {
        eprint!("{report}");
        return EXIT_INVALID;
    }
    let mut config = SolverConfig {
        gap_tol: gap,
        ..SolverConfig::default()
    };
    config.time_limit = time_limit.map(Duration::from_secs_f64);
    match solve(&scenario, &config, out, dump_lp) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

fn solve(
    scenario: &PlanningScenario,
    config: &SolverConfig,
    out: &Path,
    dump_lp: bool,
) -> Result<u8, Box<dyn std::error::Error>> {
    let start = Instant::now();
    create_dir(out)?;
    let pm = build_planning_model(scenario, ModelOptions::default())?;
    if dump_lp {
        write(&out.join("model.lp"), &write_lp(&pm.model))?;
    }
    let solution = solve_milp(&pm.model, config)?;
    let status = solution.status;
    let plan = if solution.has_incumbent() {
        Some(extract_plan(&pm, &solution, scenario)?)
    } else {
        None
    };
    match &plan {
        Some(plan) => {
            write_plan(out, plan)?;
            print!("{}", render_plan_table(plan).text);
            println!(
                "status {}  ic {:.3}  oc {:.3}  total {:.3}",
                status.as_str(),
                plan.investment_cost,
                plan.operational_cost,
                plan.total_cost
            );
        }
        None => println!("status {}: no plan", status.as_str()),
    }
    RunManifest::new(
        scenario,
        config,
        start.elapsed().as_secs_f64(),
        status.as_str(),
    )
    .write(out)?;
    Ok(status_code(status))
}

fn write_plan(dir: &Path, plan: &ExpansionPlan) -> Result<(), IoError> {
    let table = render_plan_table(plan);
    write(&dir.join("plan.json"), &(serde_json::to_string_pretty(plan)? + "\n"))?;
    write(&dir.join("decisions.txt"), &table.text)?;
    write(&dir.join("decisions.csv"), &table.csv)?;
    let mut costs = String::from("year,line,tower,hp,generation,maintenance,ic,oc\n");
    for c in &plan.costs {
        costs.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            c.year,
            c.line,
            c.tower,
            c.hp,
            c.generation,
            c.maintenance,
            c.investment(),
            c.operational()
        ));
    }
    write(&dir.join("costs.csv"), &costs)
}

fn cmd_sweep(spec_path: &Path, out: &Path, workers: usize) -> u8 {
    let spec = match SweepSpec::load(spec_path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    if let Err(e) = spec.points() {
        eprintln!("error: {e}");
        return EXIT_PARSE;
    }
    let dir = spec_path.parent().unwrap_or(Path::new("."));
    let base = match spec.load_base(dir) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let report = validate_scenario(&base);
    if !report.is_empty() {
        eprint!("{report}");
        return EXIT_INVALID;
    }
    match sweep(&spec, &base, out, workers) {
        Ok(code) => code,
        Err(SweepError::UnknownPath(p)) => {
            eprintln!("error: cannot resolve parameter path `{p}`");
            EXIT_PARSE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

fn sweep(spec: &SweepSpec, base: &PlanningScenario, out: &Path, workers: usize) -> Result<u8, SweepError> {
    let start = Instant::now();
    let config = spec.solver_config();
    let result = run_sweep(spec, base, &config, workers)?;
    create_dir(out)?;
    let points = out.join("points");
    create_dir(&points)?;
    for (i, p) in result.points.iter().enumerate() {
        let text = serde_json::to_string_pretty(p).map_err(IoError::from)?;
        write(&points.join(format!("{i:03}.json")), &(text + "\n"))?;
        if let Some(e) = &p.error {
            eprintln!("point {i}: {e}");
        } else if !p.is_optimal() {
            eprintln!("point {i}: {}", p.status);
        }
    }
    let summary = summary_csv(&result);
    write(&out.join("summary.csv"), &summary)?;
    let table = render_decision_table(&result);
    write(&out.join("decisions.txt"), &table.text)?;
    write(&out.join("decisions.csv"), &table.csv)?;
    let status = if result.all_optimal() { "optimal" } else { "partial" };
    RunManifest::new(base, &config, start.elapsed().as_secs_f64(), status).write(out)?;
    print!("{summary}");
    Ok(if result.all_optimal() { EXIT_OK } else { EXIT_LIMIT })
}

fn cmd_fixtures(export: Option<&Path>) -> u8 {
    for name in io::FIXTURES {
        let s = io::fixture(name).expect("bundled fixture parses");
        println!("{name:<10} {}", s.metadata.description);
        if let Some(dir) = export {
            let written = create_dir(dir)
                .and_then(|()| write(&dir.join(format!("{name}.json")), &io::scenario_to_json(&s)));
            if let Err(e) = written {
                eprintln!("error: {e}");
                return EXIT_INVALID;
            }
        }
    }
    EXIT_OK
}
