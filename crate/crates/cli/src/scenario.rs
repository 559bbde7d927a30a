//! Line-oriented scenario files.
//!
//! ```text
//! period 100
//! latency 1
//! node a
//! node b
//! edge a b [0,30) [70,80)   # intervals are right-open
//! offset b 5
//! emitter a
//! register b 50
//! until 400
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use tvgcast::{NodeId, Time, TimeVaryingGraph, TvgError};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub message: String,
}

impl ScenarioError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ScenarioError {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Scenario {
    pub graph: TimeVaryingGraph,
    pub offsets: BTreeMap<NodeId, Time>,
    pub emitter: Option<NodeId>,
    pub register_at: BTreeMap<NodeId, Time>,
    pub until: Option<Time>,
}

struct EdgeLine {
    line: usize,
    a: String,
    b: String,
    intervals: Vec<(Time, Time)>,
}

fn parse_time(tok: &str, line: usize) -> Result<Time, ScenarioError> {
    tok.parse()
        .map_err(|_| ScenarioError::at(line, format!("bad time `{tok}`")))
}

fn parse_nonneg(tok: &str, line: usize) -> Result<Time, ScenarioError> {
    let t = parse_time(tok, line)?;
    if t.is_negative() {
        return Err(ScenarioError::at(line, format!("negative time `{tok}`")));
    }
    Ok(t)
}

/// Parses `[s,e)` groups; spaces inside a group are allowed.
fn parse_intervals(rest: &[&str], line: usize) -> Result<Vec<(Time, Time)>, ScenarioError> {
    let joined: String = rest.concat();
    let mut out = Vec::new();
    let mut s = joined.as_str();
    while !s.is_empty() {
        let bad = || {
            ScenarioError::at(
                line,
                format!("bad interval near `{s}`, expected [start,end)"),
            )
        };
        let body = s.strip_prefix('[').ok_or_else(bad)?;
        let close = body.find(')').ok_or_else(bad)?;
        let (lo, hi) = body[..close].split_once(',').ok_or_else(bad)?;
        out.push((parse_time(lo, line)?, parse_time(hi, line)?));
        s = &body[close + 1..];
    }
    Ok(out)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut period = None;
    let mut latency = None;
    let mut nodes: Vec<(usize, String)> = Vec::new();
    let mut edges: Vec<EdgeLine> = Vec::new();
    let mut offsets = Vec::new();
    let mut registers = Vec::new();
    let mut emitter = None;
    let mut until = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, args)) = toks.split_first() else {
            continue;
        };
        let want = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(ScenarioError::at(
                    line,
                    format!("`{head}` takes {k} argument(s)"),
                ))
            }
        };
        match head {
            "period" => {
                want(1)?;
                period = Some((line, parse_time(args[0], line)?));
            }
            "latency" => {
                want(1)?;
                latency = Some((line, parse_time(args[0], line)?));
            }
            "node" => {
                want(1)?;
                nodes.push((line, args[0].to_string()));
            }
            "edge" => {
                if args.len() < 2 {
                    return Err(ScenarioError::at(line, "`edge` needs two nodes"));
                }
                edges.push(EdgeLine {
                    line,
                    a: args[0].to_string(),
                    b: args[1].to_string(),
                    intervals: parse_intervals(&args[2..], line)?,
                });
            }
            "offset" => {
                want(2)?;
                offsets.push((line, args[0].to_string(), parse_nonneg(args[1], line)?));
            }
            "register" => {
                want(2)?;
                registers.push((line, args[0].to_string(), parse_nonneg(args[1], line)?));
            }
            "emitter" => {
                want(1)?;
                emitter = Some((line, args[0].to_string()));
            }
            "until" => {
                want(1)?;
                until = Some(parse_nonneg(args[0], line)?);
            }
            other => {
                return Err(ScenarioError::at(
                    line,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }

    let (p_line, p) = period.ok_or(ScenarioError {
        line: None,
        message: "missing `period`".into(),
    })?;
    let (z_line, z) = latency.ok_or(ScenarioError {
        line: None,
        message: "missing `latency`".into(),
    })?;
    let graph = TimeVaryingGraph::new(
        p,
        z,
        nodes.iter().map(|(_, n)| n.clone()).collect(),
        edges
            .iter()
            .map(|e| (e.a.clone(), e.b.clone(), e.intervals.clone()))
            .collect(),
    )
    .map_err(|err| locate(err, p_line, z_line, &nodes, &edges))?;

    let node = |line: usize, name: &str| {
        graph
            .node(name)
            .map_err(|_| ScenarioError::at(line, format!("unknown node `{name}`")))
    };
    let mut off = BTreeMap::new();
    for (line, n, t) in offsets {
        off.insert(node(line, &n)?, t);
    }
    let mut reg = BTreeMap::new();
    for (line, n, t) in registers {
        reg.insert(node(line, &n)?, t);
    }
    let emitter = match emitter {
        Some((line, n)) => Some(node(line, &n)?),
        None => None,
    };
    Ok(Scenario {
        graph,
        offsets: off,
        emitter,
        register_at: reg,
        until,
    })
}

/// Attaches the line of the offending declaration to a graph error.
fn locate(
    err: TvgError,
    p_line: usize,
    z_line: usize,
    nodes: &[(usize, String)],
    edges: &[EdgeLine],
) -> ScenarioError {
    let label = |e: &EdgeLine| {
        let (x, y) = if e.a <= e.b {
            (&e.a, &e.b)
        } else {
            (&e.b, &e.a)
        };
        format!("{x}-{y}")
    };
    let line = match &err {
        TvgError::NonPositivePeriod(_) => Some(p_line),
        TvgError::NonPositiveLatency(_) => Some(z_line),
        TvgError::DuplicateNode(n) => nodes.iter().filter(|(_, m)| m == n).nth(1).map(|(l, _)| *l),
        TvgError::UnknownNode(n) => edges
            .iter()
            .find(|e| &e.a == n || &e.b == n)
            .map(|e| e.line),
        TvgError::SelfLoop(n) => edges
            .iter()
            .find(|e| &e.a == n && &e.b == n)
            .map(|e| e.line),
        TvgError::ParallelEdge(a, b) => {
            let key = format!("{a}-{b}");
            edges
                .iter()
                .filter(|e| label(e) == key)
                .nth(1)
                .map(|e| e.line)
        }
        TvgError::EmptyInterval(_, _, key)
        | TvgError::IntervalOutOfPeriod(_, _, key)
        | TvgError::OverlappingIntervals(key) => {
            edges.iter().find(|e| &label(e) == key).map(|e| e.line)
        }
        _ => None,
    };
    ScenarioError {
        line,
        message: err.to_string(),
    }
}

pub fn serialize_scenario(s: &Scenario) -> String {
    let g = &s.graph;
    let mut out = String::new();
    let _ = writeln!(out, "period {}", g.period());
    let _ = writeln!(out, "latency {}", g.latency());
    for v in g.nodes() {
        let _ = writeln!(out, "node {}", g.name(v));
    }
    for e in g.edges() {
        let _ = write!(out, "edge {} {}", g.name(e.a), g.name(e.b));
        for iv in &e.intervals {
            let _ = write!(out, " [{},{})", iv.start, iv.end);
        }
        out.push('\n');
    }
    for (v, t) in &s.offsets {
        let _ = writeln!(out, "offset {} {}", g.name(*v), t);
    }
    if let Some(e) = s.emitter {
        let _ = writeln!(out, "emitter {}", g.name(e));
    }
    for (v, t) in &s.register_at {
        let _ = writeln!(out, "register {} {}", g.name(*v), t);
    }
    if let Some(t) = s.until {
        let _ = writeln!(out, "until {t}");
    }
    out
}
