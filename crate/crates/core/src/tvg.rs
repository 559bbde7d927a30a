//! Periodic time-varying graphs and journeys over them.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::time::Time;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TvgError {
    #[error("period must be positive, got {0}")]
    NonPositivePeriod(Time),
    #[error("latency must be positive, got {0}")]
    NonPositiveLatency(Time),
    #[error("node `{0}` declared twice")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown edge {0}-{1}")]
    UnknownEdge(String, String),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("edge {0}-{1} declared twice")]
    ParallelEdge(String, String),
    #[error("empty presence interval [{0},{1}) on edge {2}")]
    EmptyInterval(Time, Time, String),
    #[error("presence interval [{0},{1}) on edge {2} does not fit in one period")]
    IntervalOutOfPeriod(Time, Time, String),
    #[error("overlapping presence intervals on edge {0}")]
    OverlappingIntervals(String),
    #[error("negative date {0}")]
    NegativeDate(Time),
    #[error("invalid journey: {0}")]
    InvalidJourney(String),
}

/// Right-open presence interval `[start, end)` inside `[0, p)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Interval {
    pub start: Time,
    pub end: Time,
}

/// A maximal contiguous stretch of presence on the period circle. It may
/// cross the period boundary (`start + len > p`).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Run {
    pub start: Time,
    pub len: Time,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    /// Canonical intervals, sorted and disjoint within `[0, p)`.
    pub intervals: Vec<Interval>,
    /// Presence runs after merging touching intervals, including across the
    /// period boundary. `None` means the edge is present at all times.
    pub runs: Option<Vec<Run>>,
}

impl Edge {
    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn always_present(&self) -> bool {
        self.runs.is_none()
    }
}

/// Raw edge declaration: endpoint names and presence intervals.
pub type EdgeSpec = (String, String, Vec<(Time, Time)>);

/// Builder collecting raw declarations before canonicalization.
#[derive(Clone, Debug, Default)]
pub struct TvgBuilder {
    period: Option<Time>,
    latency: Option<Time>,
    nodes: Vec<String>,
    edges: Vec<EdgeSpec>,
}

impl TvgBuilder {
    pub fn new(period: Time, latency: Time) -> Self {
        TvgBuilder {
            period: Some(period),
            latency: Some(latency),
            ..Default::default()
        }
    }

    pub fn node(mut self, name: &str) -> Self {
        self.nodes.push(name.to_string());
        self
    }

    pub fn edge(mut self, a: &str, b: &str, intervals: &[(i64, i64)]) -> Self {
        let iv = intervals
            .iter()
            .map(|&(s, e)| (Time::from_int(s), Time::from_int(e)))
            .collect();
        self.edges.push((a.to_string(), b.to_string(), iv));
        self
    }

    pub fn edge_exact(mut self, a: &str, b: &str, intervals: Vec<(Time, Time)>) -> Self {
        self.edges.push((a.to_string(), b.to_string(), intervals));
        self
    }

    pub fn build(self) -> Result<TimeVaryingGraph, TvgError> {
        TimeVaryingGraph::new(
            self.period.unwrap_or(Time::ZERO),
            self.latency.unwrap_or(Time::ZERO),
            self.nodes,
            self.edges,
        )
    }
}

/// Nodes, undirected edges with periodic right-open presence schedules, the
/// period, and the constant traversal latency.
///
/// Node ids are assigned in lexicographic order of names, so comparing ids
/// compares names.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TimeVaryingGraph {
    period: Time,
    latency: Time,
    names: Vec<String>,
    by_name: BTreeMap<String, NodeId>,
    edges: Vec<Edge>,
    edge_index: BTreeMap<(NodeId, NodeId), EdgeId>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
}

impl TimeVaryingGraph {
    pub fn new(
        period: Time,
        latency: Time,
        nodes: Vec<String>,
        edges: Vec<EdgeSpec>,
    ) -> Result<Self, TvgError> {
        if !period.is_positive() {
            return Err(TvgError::NonPositivePeriod(period));
        }
        if !latency.is_positive() {
            return Err(TvgError::NonPositiveLatency(latency));
        }
        let mut names = nodes;
        names.sort();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(TvgError::DuplicateNode(w[0].clone()));
            }
        }
        let by_name: BTreeMap<String, NodeId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), NodeId(i)))
            .collect();
        let lookup = |n: &str| {
            by_name
                .get(n)
                .copied()
                .ok_or_else(|| TvgError::UnknownNode(n.to_string()))
        };

        let mut built = Vec::new();
        let mut edge_index = BTreeMap::new();
        for (a, b, raw) in edges {
            let (ia, ib) = (lookup(&a)?, lookup(&b)?);
            if ia == ib {
                return Err(TvgError::SelfLoop(a));
            }
            let key = (ia.min(ib), ia.max(ib));
            let label = format!("{}-{}", names[key.0 .0], names[key.1 .0]);
            if edge_index.contains_key(&key) {
                return Err(TvgError::ParallelEdge(
                    names[key.0 .0].clone(),
                    names[key.1 .0].clone(),
                ));
            }
            let intervals = canonical_intervals(&raw, period, &label)?;
            let runs = merge_runs(&intervals, period);
            edge_index.insert(key, EdgeId(built.len()));
            built.push(Edge {
                a: key.0,
                b: key.1,
                intervals,
                runs,
            });
        }

        let mut adjacency = vec![Vec::new(); names.len()];
        for (i, e) in built.iter().enumerate() {
            adjacency[e.a.0].push((e.b, EdgeId(i)));
            adjacency[e.b.0].push((e.a, EdgeId(i)));
        }
        for adj in &mut adjacency {
            adj.sort();
        }

        Ok(TimeVaryingGraph {
            period,
            latency,
            names,
            by_name,
            edges: built,
            edge_index,
            adjacency,
        })
    }

    pub fn period(&self) -> Time {
        self.period
    }

    pub fn latency(&self) -> Time {
        self.latency
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len()).map(NodeId)
    }

    pub fn name(&self, n: NodeId) -> &str {
        &self.names[n.0]
    }

    pub fn node(&self, name: &str) -> Result<NodeId, TvgError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| TvgError::UnknownNode(name.to_string()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_data(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Result<EdgeId, TvgError> {
        self.edge(a, b).ok_or_else(|| {
            TvgError::UnknownEdge(
                self.names.get(a.0).cloned().unwrap_or_default(),
                self.names.get(b.0).cloned().unwrap_or_default(),
            )
        })
    }

    /// Neighbors sorted by id, with the connecting edge.
    pub fn neighbors(&self, n: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[n.0]
    }

    pub fn edge_label(&self, e: EdgeId) -> String {
        let d = &self.edges[e.0];
        format!("{}-{}", self.names[d.a.0], self.names[d.b.0])
    }

    /// Presence function, read periodically.
    pub fn is_present(&self, a: NodeId, b: NodeId, t: Time) -> Result<bool, TvgError> {
        if t.is_negative() {
            return Err(TvgError::NegativeDate(t));
        }
        let e = self.edge_between(a, b)?;
        Ok(self.present_at(e, t))
    }

    pub fn present_at(&self, e: EdgeId, t: Time) -> bool {
        let t = t.rem_euclid(self.period);
        self.edges[e.0]
            .intervals
            .iter()
            .any(|iv| iv.start <= t && t < iv.end)
    }

    /// True iff the edge is present at every instant of `[t1, t2)`.
    pub fn is_present_throughout(
        &self,
        a: NodeId,
        b: NodeId,
        t1: Time,
        t2: Time,
    ) -> Result<bool, TvgError> {
        let e = self.edge_between(a, b)?;
        Ok(self.present_throughout(e, t1, t2))
    }

    pub fn present_throughout(&self, e: EdgeId, t1: Time, t2: Time) -> bool {
        if t2 <= t1 {
            return true;
        }
        let runs = match &self.edges[e.0].runs {
            None => return true,
            Some(r) => r,
        };
        let p = self.period;
        runs.iter().any(|r| {
            let k = (t1 - r.start).div_floor(p);
            let s = r.start + p * k;
            t1 >= s && t1 < s + r.len && t2 <= s + r.len
        })
    }

    /// Earliest `d >= t` such that a message sent at `d` over `e` arrives.
    pub fn next_departure(&self, e: EdgeId, t: Time) -> Option<Time> {
        let p = self.period;
        let z = self.latency;
        let runs = match &self.edges[e.0].runs {
            None => return Some(t),
            Some(r) => r,
        };
        let mut best: Option<Time> = None;
        for r in runs.iter().filter(|r| r.len >= z) {
            let k0 = (t - r.start).div_floor(p);
            for k in [k0, k0 + 1] {
                let a = r.start + p * k;
                let b = a + r.len - z;
                if t <= b {
                    let cand = a.max(t);
                    best = Some(best.map_or(cand, |x| x.min(cand)));
                    break;
                }
            }
        }
        best
    }

    /// Latest departure `d <= t - zeta` that arrives over `e` by `t`, if any
    /// is at or after `floor`.
    pub fn last_departure(&self, e: EdgeId, t: Time, floor: Time) -> Option<Time> {
        let p = self.period;
        let z = self.latency;
        let x = t - z;
        if x < floor {
            return None;
        }
        let runs = match &self.edges[e.0].runs {
            None => return Some(x),
            Some(r) => r,
        };
        let mut best: Option<Time> = None;
        for r in runs.iter().filter(|r| r.len >= z) {
            let k0 = (x - r.start).div_floor(p);
            for k in [k0, k0 - 1] {
                let a = r.start + p * k;
                let b = a + r.len - z;
                if a <= x {
                    let cand = b.min(x);
                    best = Some(best.map_or(cand, |y| y.max(cand)));
                    break;
                }
            }
        }
        best.filter(|d| *d >= floor)
    }

    /// Closed windows of feasible departure dates for `e` that meet
    /// `[from, to]`, clipped to it.
    pub fn departure_windows(&self, e: EdgeId, from: Time, to: Time) -> Vec<(Time, Time)> {
        let p = self.period;
        let z = self.latency;
        let runs = match &self.edges[e.0].runs {
            None => return vec![(from, to)],
            Some(r) => r,
        };
        let mut out = Vec::new();
        for r in runs.iter().filter(|r| r.len >= z) {
            let mut k = (from - r.start - r.len).div_floor(p);
            loop {
                let a = r.start + p * k;
                if a > to {
                    break;
                }
                let b = a + r.len - z;
                if b >= from {
                    out.push((a.max(from), b.min(to)));
                }
                k += 1;
            }
        }
        out.sort();
        out
    }

    /// Appearance and disappearance dates of `e` within one period, as
    /// `(date, appears)`. Always-present edges have none.
    pub fn edge_transitions(&self, e: EdgeId) -> Vec<(Time, bool)> {
        let p = self.period;
        let mut out = Vec::new();
        if let Some(runs) = &self.edges[e.0].runs {
            for r in runs {
                out.push((r.start, true));
                out.push(((r.start + r.len).rem_euclid(p), false));
            }
        }
        out.sort();
        out
    }

    /// All interval endpoints and run endpoints, normalized to `[0, p)`.
    pub fn schedule_endpoints(&self) -> Vec<Time> {
        let p = self.period;
        let mut pts = Vec::new();
        for e in &self.edges {
            for iv in &e.intervals {
                pts.push(iv.start);
                pts.push(iv.end.rem_euclid(p));
            }
            if let Some(runs) = &e.runs {
                for r in runs {
                    pts.push(r.start);
                    pts.push((r.start + r.len).rem_euclid(p));
                }
            }
        }
        pts.sort();
        pts.dedup();
        pts
    }

    /// Upper bound on the duration of any foremost journey.
    pub fn foremost_bound(&self) -> Time {
        (self.period + self.latency) * (self.node_count().saturating_sub(1) as i64)
    }
}

fn canonical_intervals(
    raw: &[(Time, Time)],
    p: Time,
    label: &str,
) -> Result<Vec<Interval>, TvgError> {
    let mut out = Vec::new();
    for &(s, e) in raw {
        if e <= s {
            return Err(TvgError::EmptyInterval(s, e, label.to_string()));
        }
        if s.is_negative() || s >= p || e - s > p {
            return Err(TvgError::IntervalOutOfPeriod(s, e, label.to_string()));
        }
        if e <= p {
            out.push(Interval { start: s, end: e });
        } else {
            out.push(Interval { start: s, end: p });
            out.push(Interval {
                start: Time::ZERO,
                end: e - p,
            });
        }
    }
    out.sort_by_key(|iv| iv.start);
    for w in out.windows(2) {
        if w[1].start < w[0].end {
            return Err(TvgError::OverlappingIntervals(label.to_string()));
        }
    }
    Ok(out)
}

fn merge_runs(intervals: &[Interval], p: Time) -> Option<Vec<Run>> {
    let mut runs: Vec<Run> = Vec::new();
    for iv in intervals {
        match runs.last_mut() {
            Some(r) if r.start + r.len == iv.start => r.len += iv.end - iv.start,
            _ => runs.push(Run {
                start: iv.start,
                len: iv.end - iv.start,
            }),
        }
    }
    if runs.len() == 1 && runs[0].start.is_zero() && runs[0].len == p {
        return None;
    }
    if runs.len() >= 2 {
        let first = runs[0];
        let last = *runs.last().unwrap();
        if first.start.is_zero() && last.start + last.len == p {
            runs.remove(0);
            runs.last_mut().unwrap().len += first.len;
        }
    }
    Some(runs)
}

/// `t mod p`, in `[0, p)`.
pub fn normalize_date(t: Time, p: Time) -> Time {
    t.rem_euclid(p)
}

/// One edge traversal starting at `date`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Hop {
    pub from: NodeId,
    pub to: NodeId,
    pub date: Time,
}

/// A path over time: hops with departure dates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Journey {
    pub origin: NodeId,
    pub hops: Vec<Hop>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct JourneyMetrics {
    pub hops: usize,
    pub duration: Time,
    pub departure: Time,
    pub arrival: Time,
}

impl Journey {
    pub fn empty(origin: NodeId) -> Self {
        Journey {
            origin,
            hops: Vec::new(),
        }
    }

    /// Builds a journey from `(from, to, date)` triples.
    pub fn from_hops(hops: &[(NodeId, NodeId, Time)]) -> Self {
        let origin = hops.first().map(|h| h.0).unwrap_or(NodeId(0));
        Journey {
            origin,
            hops: hops
                .iter()
                .map(|&(from, to, date)| Hop { from, to, date })
                .collect(),
        }
    }

    pub fn destination(&self) -> NodeId {
        self.hops.last().map_or(self.origin, |h| h.to)
    }

    /// Node sequence, origin first.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut v = vec![self.origin];
        v.extend(self.hops.iter().map(|h| h.to));
        v
    }

    fn violation(&self, g: &TimeVaryingGraph) -> Option<String> {
        let z = g.latency();
        let mut at = self.origin;
        for (i, h) in self.hops.iter().enumerate() {
            if h.from != at {
                return Some(format!("hop {i} does not continue the walk"));
            }
            let Some(e) = g.edge(h.from, h.to) else {
                return Some(format!("hop {i} uses a missing edge"));
            };
            if h.date.is_negative() {
                return Some(format!("hop {i} departs before time 0"));
            }
            if !g.present_throughout(e, h.date, h.date + z) {
                return Some(format!("edge absent during hop {i}"));
            }
            if let Some(next) = self.hops.get(i + 1) {
                if h.date + z > next.date {
                    return Some(format!("hop {} departs before hop {i} arrives", i + 1));
                }
            }
            at = h.to;
        }
        None
    }

    pub fn validate(&self, g: &TimeVaryingGraph) -> bool {
        self.violation(g).is_none()
    }

    pub fn metrics(&self, g: &TimeVaryingGraph) -> Result<JourneyMetrics, TvgError> {
        if let Some(why) = self.violation(g) {
            return Err(TvgError::InvalidJourney(why));
        }
        let (Some(first), Some(last)) = (self.hops.first(), self.hops.last()) else {
            return Err(TvgError::InvalidJourney("no hops".into()));
        };
        let arrival = last.date + g.latency();
        Ok(JourneyMetrics {
            hops: self.hops.len(),
            duration: arrival - first.date,
            departure: first.date,
            arrival,
        })
    }

    /// Each hop leaves exactly when the previous one arrives.
    pub fn is_direct(&self, g: &TimeVaryingGraph) -> Result<bool, TvgError> {
        if let Some(why) = self.violation(g) {
            return Err(TvgError::InvalidJourney(why));
        }
        let z = g.latency();
        Ok(self.hops.windows(2).all(|w| w[0].date + z == w[1].date))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: i64) -> Time {
        Time::from_int(v)
    }

    pub(crate) fn triangle() -> TimeVaryingGraph {
        TvgBuilder::new(t(100), t(1))
            .node("a")
            .node("b")
            .node("c")
            .edge("a", "b", &[(0, 30)])
            .edge("a", "c", &[(20, 60)])
            .edge("b", "c", &[(10, 40), (70, 80)])
            .build()
            .unwrap()
    }

    fn kite(z: Time) -> TimeVaryingGraph {
        TvgBuilder::new(t(10), z)
            .node("a")
            .node("b")
            .node("c")
            .node("d")
            .edge("a", "b", &[(1, 3)])
            .edge("a", "c", &[(2, 5)])
            .edge("b", "c", &[(0, 4)])
            .edge("c", "d", &[(5, 6)])
            .build()
            .unwrap()
    }

    fn ids(g: &TimeVaryingGraph, names: &str) -> Vec<NodeId> {
        names
            .chars()
            .map(|c| g.node(&c.to_string()).unwrap())
            .collect()
    }

    #[test]
    fn presence_is_periodic_and_right_open() {
        let g = triangle();
        let n = ids(&g, "abc");
        assert!(g.is_present(n[0], n[2], t(25)).unwrap());
        assert!(g.is_present(n[0], n[2], t(125)).unwrap());
        assert!(!g.is_present(n[0], n[1], t(30)).unwrap());
        assert!(matches!(
            g.is_present(n[0], n[0], t(1)),
            Err(TvgError::UnknownEdge(..))
        ));
    }

    #[test]
    fn presence_throughout() {
        let g = triangle();
        let n = ids(&g, "abc");
        assert!(g.is_present_throughout(n[1], n[2], t(39), t(40)).unwrap());
        assert!(!g.is_present_throughout(n[1], n[2], t(39), t(41)).unwrap());
        assert!(!g.is_present_throughout(n[1], n[2], t(95), t(111)).unwrap());
        assert!(g.is_present_throughout(n[1], n[2], t(5), t(5)).unwrap());
    }

    #[test]
    fn wrapping_intervals_merge_into_one_run() {
        let g = TvgBuilder::new(t(100), t(1))
            .node("a")
            .node("b")
            .edge("a", "b", &[(90, 110)])
            .build()
            .unwrap();
        let e = EdgeId(0);
        assert_eq!(g.edge_data(e).intervals.len(), 2);
        assert_eq!(
            g.edge_data(e).runs,
            Some(vec![Run {
                start: t(90),
                len: t(20)
            }])
        );
        assert!(g.present_throughout(e, t(95), t(105)));
        assert_eq!(g.next_departure(e, t(50)), Some(t(90)));
        assert_eq!(g.next_departure(e, t(109)), Some(t(109)));
        assert_eq!(g.next_departure(e, Time::new(219, 2)), Some(t(190)));
        assert_eq!(g.next_departure(e, t(108)), Some(t(108)));
        assert_eq!(g.last_departure(e, t(150), t(0)), Some(t(109)));
    }

    #[test]
    fn rejects_malformed_schedules() {
        let base = || TvgBuilder::new(t(100), t(1)).node("a").node("b");
        assert!(matches!(
            base().edge("a", "a", &[(0, 1)]).build(),
            Err(TvgError::SelfLoop(_))
        ));
        assert!(matches!(
            base().edge("a", "b", &[(0, 10), (5, 20)]).build(),
            Err(TvgError::OverlappingIntervals(_))
        ));
        assert!(matches!(
            base().edge("a", "b", &[(5, 5)]).build(),
            Err(TvgError::EmptyInterval(..))
        ));
        assert!(matches!(
            base().edge("a", "b", &[(100, 120)]).build(),
            Err(TvgError::IntervalOutOfPeriod(..))
        ));
        assert!(matches!(
            base()
                .edge("a", "b", &[(0, 1)])
                .edge("b", "a", &[(3, 4)])
                .build(),
            Err(TvgError::ParallelEdge(..))
        ));
        assert!(matches!(
            base().edge("a", "z", &[(0, 1)]).build(),
            Err(TvgError::UnknownNode(_))
        ));
        assert!(matches!(
            TvgBuilder::new(t(0), t(1)).build(),
            Err(TvgError::NonPositivePeriod(_))
        ));
    }

    #[test]
    fn journeys_in_the_four_node_example() {
        let z = Time::new(1, 10);
        let g = kite(z);
        let n = ids(&g, "abcd");
        let (a, b, c, d) = (n[0], n[1], n[2], n[3]);
        let j2 = Journey::from_hops(&[(a, c, t(2)), (c, d, t(5))]);
        assert!(j2.validate(&g));
        let m = j2.metrics(&g).unwrap();
        assert_eq!((m.hops, m.duration), (2, t(3) + z));
        assert!(!j2.is_direct(&g).unwrap());

        let j1 = Journey::from_hops(&[(a, b, t(2)), (b, c, t(2) + z)]);
        assert!(j1.validate(&g));
        assert!(j1.is_direct(&g).unwrap());

        let j3 = Journey::from_hops(&[(a, b, t(2)), (b, c, t(2) + z), (c, d, t(5))]);
        let m3 = j3.metrics(&g).unwrap();
        assert_eq!((m3.hops, m3.arrival, m3.duration), (3, t(5) + z, t(3) + z));

        let bad = Journey::from_hops(&[(a, b, t(3)), (b, c, t(3) + z)]);
        assert!(!bad.validate(&g));
        assert!(bad.metrics(&g).is_err());

        let single = Journey::from_hops(&[(a, b, t(1))]);
        assert_eq!(single.metrics(&g).unwrap().duration, z);
        assert!(single.is_direct(&g).unwrap());
    }

    #[test]
    fn normalize() {
        assert_eq!(normalize_date(t(111), t(100)), t(11));
        assert_eq!(normalize_date(t(100), t(100)), t(0));
        assert_eq!(normalize_date(t(59), t(100)), t(59));
    }

    #[test]
    fn node_ids_follow_name_order() {
        let g = TvgBuilder::new(t(10), t(1))
            .node("z")
            .node("m")
            .node("a")
            .build()
            .unwrap();
        assert_eq!(g.node("a").unwrap(), NodeId(0));
        assert_eq!(g.node("z").unwrap(), NodeId(2));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn graph_strategy() -> impl Strategy<Value = TimeVaryingGraph> {
        (2i64..40, prop::collection::vec((0i64..40, 1i64..10), 1..4)).prop_filter_map(
            "valid schedule",
            |(p, ivs)| {
                let ivs: Vec<(i64, i64)> = ivs
                    .into_iter()
                    .map(|(s, l)| (s % p, s % p + l.min(p)))
                    .collect();
                TvgBuilder::new(Time::from_int(p), Time::new(1, 2))
                    .node("a")
                    .node("b")
                    .edge("a", "b", &ivs)
                    .build()
                    .ok()
            },
        )
    }

    proptest! {
        #[test]
        fn presence_repeats_every_period(g in graph_strategy(), num in 0i64..4000) {
            let t = Time::new(num, 7);
            let e = EdgeId(0);
            prop_assert_eq!(g.present_at(e, t), g.present_at(e, t + g.period()));
        }

        #[test]
        fn throughout_matches_dense_sampling(g in graph_strategy(), s in 0i64..400, l in 0i64..60) {
            let e = EdgeId(0);
            let t1 = Time::new(s, 4);
            let t2 = t1 + Time::new(l, 4);
            let mut pts: Vec<Time> = (0..l * 8).map(|i| t1 + Time::new(i, 32)).collect();
            for x in g.schedule_endpoints() {
                let k0 = t1.div_floor(g.period());
                for k in k0..=k0 + 2 {
                    let y = x + g.period() * k;
                    if y >= t1 && y < t2 {
                        pts.push(y);
                    }
                }
            }
            let sampled = pts.iter().all(|&x| g.present_at(e, x));
            prop_assert_eq!(g.present_throughout(e, t1, t2), sampled);
        }

        #[test]
        fn next_departure_is_feasible_and_earliest(g in graph_strategy(), s in 0i64..400) {
            let e = EdgeId(0);
            let t = Time::new(s, 4);
            if let Some(d) = g.next_departure(e, t) {
                prop_assert!(d >= t);
                prop_assert!(g.present_throughout(e, d, d + g.latency()));
                let grid = (0..).map(|i| t + Time::new(i, 4)).take_while(|x| *x < d);
                for x in grid {
                    prop_assert!(!g.present_throughout(e, x, x + g.latency()));
                }
            }
        }
    }
}
