use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prioroute::{
    analysis, eaf, generators, io, pathfinder, simulator, validate_instance, Error, FamilySpec,
    Prepared, SinkEdgePolicy,
};

/// Competitive packet routing games with edge priorities: simulate profiles,
/// compute equilibria, enumerate optima and build priority lists from
/// earliest arrival flows.
#[derive(Parser)]
#[command(name = "prioroute", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file against the model rules.
    Validate {
        #[arg(short = 'i', long)]
        instance: PathBuf,
    },
    /// Run a strategy profile and report arrival times.
    Simulate {
        #[arg(short = 'i', long)]
        instance: PathBuf,
        #[arg(short = 'p', long)]
        profile: PathBuf,
        /// Write the full event trace as JSON.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Compute a mistrustful equilibrium, one player at a time.
    Solve {
        #[arg(short = 'i', long)]
        instance: PathBuf,
        /// index | roundrobin | fixed:<id,id,...>
        #[arg(long, default_value = "index")]
        sink_policy: String,
        /// Write the computed profile as JSON.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Write the simulation trace as JSON.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Exhaustive equilibrium analysis and price metrics.
    Analyze {
        #[arg(short = 'i', long)]
        instance: PathBuf,
        /// Walk transit horizon; defaults to shortest distance + players.
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Earliest arrival flow and its arrival pattern.
    Eaf {
        #[arg(short = 'i', long)]
        instance: PathBuf,
        /// Number of players to assign to arrival slots.
        #[arg(short = 'k', long)]
        players: Option<usize>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Build a global priority list from the earliest arrival flow.
    Priolist {
        #[arg(short = 'i', long)]
        instance: PathBuf,
        #[arg(short = 'k', long)]
        players: Option<usize>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Write a named instance family to a file.
    Generate {
        /// braess | braess-positive | pos-braess | double-braess-left |
        /// double-braess-right | loop | fig6 | fig7 | fig8 | zero-cycle
        #[arg(long)]
        family: String,
        /// Size parameter: rows for the braess families, players for loop,
        /// the long transit for fig7.
        #[arg(long)]
        param: Option<u32>,
        /// Override the derived player count.
        #[arg(long)]
        players: Option<usize>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::BudgetExceeded(_) => 2,
        Error::InvalidParameter(_) => 3,
        _ => 1,
    }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    if let Some(path) = path {
        fs::write(path, text)
            .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn load_instance(path: &PathBuf) -> Result<prioroute::GameInstance, Error> {
    io::instance_from_json(&read(path)?)
}

fn parse_policy(text: &str) -> Result<SinkEdgePolicy, Error> {
    match text {
        "index" => Ok(SinkEdgePolicy::ByEdgeIndex),
        "roundrobin" => Ok(SinkEdgePolicy::RoundRobin),
        other => {
            let Some(ids) = other.strip_prefix("fixed:") else {
                return Err(Error::InvalidParameter(format!(
                    "unknown sink policy {other:?}; use index, roundrobin or fixed:<ids>"
                )));
            };
            let order = ids
                .split(',')
                .map(|part| part.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidParameter("fixed: wants comma-separated edge ids".into()))?;
            Ok(SinkEdgePolicy::FixedOrder(order))
        }
    }
}

fn parse_family(family: &str, param: Option<u32>) -> Result<FamilySpec, Error> {
    let need = |what: &str| {
        param.map(|p| p as usize).ok_or_else(|| {
            Error::InvalidParameter(format!("family {family:?} needs --param ({what})"))
        })
    };
    Ok(match family {
        "braess" => FamilySpec::Braess { b: need("rows")? },
        "braess-positive" => FamilySpec::BraessPositive { b: need("rows")? },
        "pos-braess" => FamilySpec::PosBraess { b: need("rows")? },
        "double-braess-left" => FamilySpec::DoubleBraessLeft { b: need("rows")? },
        "double-braess-right" => FamilySpec::DoubleBraessRight { b: need("rows")? },
        "loop" => FamilySpec::Loop { k: need("players")? },
        "fig6" => FamilySpec::Fig6,
        "fig7" => FamilySpec::Fig7 { m: param.unwrap_or(7) },
        "fig8" => FamilySpec::Fig8,
        "zero-cycle" => FamilySpec::ZeroCycle,
        other => {
            return Err(Error::InvalidParameter(format!("unknown family {other:?}")));
        }
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Validate { instance } => {
            let inst = load_instance(&instance)?;
            let report = validate_instance(&inst);
            if report.is_empty() {
                println!("ok");
                Ok(ExitCode::SUCCESS)
            } else {
                for violation in &report {
                    eprintln!("violation: {violation}");
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Simulate { instance, profile, output } => {
            let inst = load_instance(&instance)?;
            let profile = io::profile_from_json(&read(&profile)?)?;
            let prep = Prepared::new(&inst)?;
            let trace = simulator::simulate(&prep, &profile)?;
            for (p, arrival) in trace.arrivals.iter().enumerate() {
                println!("player {}: arrival={arrival}", p + 1);
            }
            println!("total cost: {}", trace.total_cost);
            write_out(&output, &trace.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { instance, sink_policy, output, trace_out } => {
            let inst = load_instance(&instance)?;
            let policy = parse_policy(&sink_policy)?;
            let prep = Prepared::new(&inst)?;
            let eq = pathfinder::compute_equilibrium(&prep, policy)?;
            for (p, walk) in eq.profile.walks.iter().enumerate() {
                let ids: Vec<String> = walk.0.iter().map(|e| e.to_string()).collect();
                println!(
                    "player {}: arrival={} walk=[{}]",
                    p + 1,
                    eq.trace.arrivals[p],
                    ids.join(",")
                );
            }
            println!("total cost: {}", eq.trace.total_cost);
            write_out(&output, &io::profile_to_json(&eq.profile))?;
            write_out(&trace_out, &eq.trace.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { instance, horizon, output } => {
            let inst = load_instance(&instance)?;
            let prep = Prepared::new(&inst)?;
            let budget = analysis::SearchBudget { horizon, ..Default::default() };
            let report = analysis::price_metrics(&prep, &budget)?;
            print!("{}", report.render_table());
            write_out(&output, &report.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eaf { instance, players, output } => {
            let inst = load_instance(&instance)?;
            let k = players.unwrap_or(inst.players);
            let prep = Prepared::new(&inst)?;
            let result = eaf::earliest_arrival_flow(&prep, k)?;
            for path in &result.paths {
                let arcs: Vec<String> = path
                    .arcs
                    .iter()
                    .map(|a| format!("{}{}", a.edge, if a.forward { "" } else { "~" }))
                    .collect();
                println!("path length={} flow={} arcs=[{}]", path.length, path.flow, arcs.join(","));
            }
            let arrivals: Vec<String> = result.arrivals.iter().map(|a| a.to_string()).collect();
            println!("arrivals: {}", arrivals.join(","));
            println!("total cost: {}", result.total_cost());
            write_out(&output, &result.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Priolist { instance, players, output } => {
            let inst = load_instance(&instance)?;
            let _ = players;
            let prep = Prepared::new(&inst)?;
            let draft = eaf::construct_priority_list(&prep)?;
            let order: Vec<String> = draft.order.iter().map(|e| e.to_string()).collect();
            println!("order: [{}]", order.join(","));
            match draft.status {
                eaf::ListStatus::Feasible => println!("status: feasible"),
                eaf::ListStatus::Infeasible { edge } => {
                    println!("status: infeasible (edge {edge} occurs twice)")
                }
            }
            if !draft.forced_tail_insertions.is_empty() {
                println!("forced tail insertions: {:?}", draft.forced_tail_insertions);
            }
            write_out(&output, &serde_json::to_string_pretty(&draft).expect("draft serializes"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate { family, param, players, output } => {
            let spec = parse_family(&family, param)?;
            let mut inst = generators::generate(spec)?;
            if let Some(k) = players {
                inst.players = k;
            }
            let json = io::instance_to_json(&inst);
            match &output {
                Some(_) => write_out(&output, &json)?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
