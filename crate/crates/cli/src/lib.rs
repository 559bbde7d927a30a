//! Command-line front end: scenario files in, CSV and text out.

pub mod scenario;

use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tvgcast::broadcast::{fastest_broadcast, BroadcastError, BroadcastOptions};
use tvgcast::learner::{run_learners, LearnOptions};
use tvgcast::oracle::{distance_function, earliest_arrival, eccentricity_function, OracleError};
use tvgcast::sim::{Idle, SimConfig, Simulation};
use tvgcast::{NodeId, SegmentTable, Time, TimeVaryingGraph};

use scenario::{parse_scenario, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_UNREACHABLE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "tvgcast",
    version,
    about = "Fastest broadcast in periodic time-varying graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GraphArg {
    /// Scenario file
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Temporal distance between two nodes, at one date or as a table
    OracleDistance {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(
            long,
            conflicts_with = "function",
            required_unless_present = "function"
        )]
        at: Option<String>,
        #[arg(long)]
        function: bool,
    },
    /// Distance tables learned in simulation from T-Clock events
    Learn {
        #[command(flatten)]
        graph: GraphArg,
        /// Defaults to the scenario's emitter
        #[arg(long)]
        emitter: Option<String>,
        /// Restrict to these nodes (repeatable); default all but the emitter
        #[arg(long)]
        node: Vec<String>,
        /// Local registration date for every learner
        #[arg(long)]
        register_at: Option<String>,
        /// Print the action trace after each table
        #[arg(long)]
        trace: bool,
    },
    /// Aggregate tables, pick the best date and broadcast at it
    FastestBroadcast {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        emitter: Option<String>,
    },
    /// CSV samples of a distance table, or of the eccentricity without --to
    Plot {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: Option<String>,
    },
    /// Edge appearance and disappearance trace
    Simulate {
        #[command(flatten)]
        graph: GraphArg,
        /// Defaults to the scenario's `until`, else one period
        #[arg(long)]
        until: Option<String>,
    },
}

/// Captured result of one invocation.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl ToString) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

fn oracle_fail(e: OracleError) -> Failure {
    match e {
        OracleError::Unreachable { .. } => fail(EXIT_UNREACHABLE, e),
        OracleError::UnknownNode(_) => fail(EXIT_PARSE, e),
        _ => fail(EXIT_INTERNAL, e),
    }
}

fn broadcast_fail(e: BroadcastError) -> Failure {
    match e {
        BroadcastError::Unreached { .. } | BroadcastError::Stalled { .. } => {
            fail(EXIT_UNREACHABLE, e)
        }
        _ => fail(EXIT_INTERNAL, e),
    }
}

fn load(arg: &GraphArg) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(&arg.graph)
        .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", arg.graph.display())))?;
    parse_scenario(&text).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", arg.graph.display())))
}

fn node(g: &TimeVaryingGraph, name: &str) -> Result<NodeId, Failure> {
    g.node(name)
        .map_err(|_| fail(EXIT_PARSE, format!("unknown node `{name}`")))
}

fn time(tok: &str) -> Result<Time, Failure> {
    tok.parse()
        .map_err(|_| fail(EXIT_PARSE, format!("bad time `{tok}`")))
}

fn emitter_of(s: &Scenario, flag: &Option<String>) -> Result<NodeId, Failure> {
    match flag {
        Some(n) => node(&s.graph, n),
        None => s
            .emitter
            .ok_or_else(|| fail(EXIT_PARSE, "no emitter given and none in the scenario")),
    }
}

/// Runs one command line (including the program name).
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Output {
                    stdout: text,
                    ..Default::default()
                }
            } else {
                Output {
                    stderr: text,
                    code,
                    ..Default::default()
                }
            };
        }
    };
    let mut out = String::new();
    match execute(cli.command, &mut out) {
        Ok(()) => Output {
            stdout: out,
            ..Default::default()
        },
        Err(f) => Output {
            stdout: out,
            stderr: format!("error: {}\n", f.message),
            code: f.code,
        },
    }
}

fn execute(cmd: Command, out: &mut String) -> Result<(), Failure> {
    match cmd {
        Command::OracleDistance {
            graph,
            from,
            to,
            at,
            function,
        } => {
            let s = load(&graph)?;
            let g = &s.graph;
            let (u, v) = (node(g, &from)?, node(g, &to)?);
            if function {
                let table = distance_function(g, u, v).map_err(oracle_fail)?;
                out.push_str(&table.to_csv());
            } else {
                let t = time(at.as_deref().unwrap_or("0"))?;
                if t.is_negative() {
                    return Err(fail(EXIT_PARSE, "negative date"));
                }
                let arrival = earliest_arrival(g, u, v, t)
                    .map_err(oracle_fail)?
                    .ok_or_else(|| {
                        fail(
                            EXIT_UNREACHABLE,
                            format!("{to} is unreachable from {from} at {t}"),
                        )
                    })?;
                let _ = writeln!(out, "{} {}", arrival - t, arrival);
            }
        }
        Command::Learn {
            graph,
            emitter,
            node: names,
            register_at,
            trace,
        } => {
            let s = load(&graph)?;
            let g = &s.graph;
            let e = emitter_of(&s, &emitter)?;
            let nodes: Vec<NodeId> = if names.is_empty() {
                g.nodes().filter(|&v| v != e).collect()
            } else {
                names
                    .iter()
                    .map(|n| node(g, n))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .filter(|&v| v != e)
                    .collect()
            };
            if nodes.is_empty() {
                return Ok(());
            }
            let mut register = s.register_at.clone();
            if let Some(t) = register_at {
                let t = time(&t)?;
                for &v in &nodes {
                    register.insert(v, t);
                }
            }
            let opts = LearnOptions {
                register_at: register,
                offsets: s.offsets.clone(),
                until: s.until,
            };
            let outcomes =
                run_learners(g, e, &nodes, &opts).map_err(|err| fail(EXIT_INTERNAL, err))?;
            for o in outcomes {
                let name = g.name(o.node);
                let table = o
                    .table()
                    .map_err(|err| fail(EXIT_UNREACHABLE, format!("learner at {name}: {err}")))?;
                let _ = writeln!(out, "# node {name}");
                out.push_str(&table.to_csv());
                if trace {
                    let _ = writeln!(out, "# trace {name}");
                    out.push_str("date | event | action\n");
                    for row in o.learner.trace() {
                        let _ = writeln!(out, "{}", row.render(g, e));
                    }
                }
            }
        }
        Command::FastestBroadcast { graph, emitter } => {
            let s = load(&graph)?;
            let g = &s.graph;
            let e = emitter_of(&s, &emitter)?;
            let opts = BroadcastOptions {
                offsets: s.offsets.clone(),
                register_at: s.register_at.clone(),
                ..Default::default()
            };
            let f = fastest_broadcast(g, e, &opts).map_err(broadcast_fail)?;
            out.push_str(&f.aggregation.eccentricity.to_csv());
            let _ = writeln!(out, "{} {}", f.chosen_date, f.duration);
            for line in f.tree.lines(g) {
                let _ = writeln!(out, "{line}");
            }
        }
        Command::Plot { graph, from, to } => {
            let s = load(&graph)?;
            let g = &s.graph;
            let u = node(g, &from)?;
            let table: SegmentTable = match to {
                Some(v) => distance_function(g, u, node(g, &v)?).map_err(oracle_fail)?,
                None => eccentricity_function(g, u).map_err(oracle_fail)?,
            };
            out.push_str("t,value\n");
            for (t, v) in table.plot_points() {
                let _ = writeln!(out, "{t},{v}");
            }
        }
        Command::Simulate { graph, until } => {
            let s = load(&graph)?;
            let g = &s.graph;
            let until = match until {
                Some(t) => time(&t)?,
                None => s.until.unwrap_or(g.period()),
            };
            let config = SimConfig {
                offsets: s.offsets.clone(),
                tclock_sources: None,
                record_trace: true,
            };
            let mut sim = Simulation::new(g, vec![Idle; g.node_count()], config);
            sim.run(until).map_err(|err| fail(EXIT_INTERNAL, err))?;
            out.push_str(&sim.trace().to_string());
        }
    }
    Ok(())
}
