//! T-Clocks event layer: per-node notifications about direct views (levels)
//! and indirect views (dates) relative to every tracked source.
//!
//! Notifications are computed from the full schedule ahead of a run and then
//! delivered by the simulator at each node's own instants. Levels are reported
//! as right limits: a `LevelChanged` at `t` describes arrivals just after `t`.

use std::fmt;

use crate::intervals::IntervalSet;
use crate::oracle::{distance_functions_from, foremost_from, OracleError};
use crate::segment::{SegmentTable, Trend};
use crate::time::Time;
use crate::tvg::{NodeId, TimeVaryingGraph};

/// Hop count of the best direct journey currently arriving, or `Infinite`
/// when none is.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Level {
    Finite(usize),
    Infinite,
}

impl Level {
    pub fn is_finite(&self) -> bool {
        matches!(self, Level::Finite(_))
    }

    pub fn hops(&self) -> Option<usize> {
        match self {
            Level::Finite(k) => Some(*k),
            Level::Infinite => None,
        }
    }

    /// `now - level * zeta`, the emission date carried by the level.
    pub fn direct_view(&self, now: Time, latency: Time) -> Option<Time> {
        self.hops().map(|k| now - latency * k as i64)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(k) => write!(f, "{k}"),
            Level::Infinite => f.write_str("+inf"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TClockEvent {
    LevelChanged {
        src: NodeId,
        level: Level,
        proxy: Option<NodeId>,
        /// Set on the replay delivered at registration time.
        snapshot: bool,
    },
    DateImproved {
        src: NodeId,
        date: Time,
        proxy: NodeId,
        /// Set on the replay of a frozen view at registration.
        snapshot: bool,
    },
}

impl TClockEvent {
    pub fn src(&self) -> NodeId {
        match self {
            TClockEvent::LevelChanged { src, .. } | TClockEvent::DateImproved { src, .. } => *src,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TClockEvent::LevelChanged { .. } => "tclock-levelChanged",
            TClockEvent::DateImproved { .. } => "tclock-dateImproved",
        }
    }
}

/// Consumer-side view reconstruction from an event stream: the best of the
/// current direct view and everything learned before.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ViewTracker {
    latency: Time,
    level: Level,
    known: Option<Time>,
}

impl ViewTracker {
    pub fn new(latency: Time) -> Self {
        ViewTracker {
            latency,
            level: Level::Infinite,
            known: None,
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn apply(&mut self, now: Time, ev: &TClockEvent) {
        match *ev {
            TClockEvent::LevelChanged { level, .. } => {
                let prev = self.level.direct_view(now, self.latency);
                self.known = self.known.max(prev);
                self.level = level;
            }
            TClockEvent::DateImproved { date, .. } => {
                self.known = self.known.max(Some(date));
            }
        }
    }

    /// Best date seen so far apart from the live direct view.
    pub fn frozen(&self) -> Option<Time> {
        self.known
    }

    pub fn view(&self, now: Time) -> Option<Time> {
        self.known.max(self.level.direct_view(now, self.latency))
    }
}

/// Precomputed notifications for a set of sources up to a horizon.
#[derive(Clone, Debug, Default)]
pub struct TClocks {
    /// `(node, global time, event)` in delivery order.
    events: Vec<(NodeId, Time, TClockEvent)>,
}

impl TClocks {
    /// Notifications strictly before `horizon` for every node and source.
    pub fn compute(
        g: &TimeVaryingGraph,
        sources: &[NodeId],
        horizon: Time,
    ) -> Result<TClocks, OracleError> {
        let mut events = Vec::new();
        for &u in sources {
            let profile = SourceProfile::new(g, u, horizon)?;
            for v in g.nodes().filter(|&v| v != u) {
                for (t, ev) in profile.events_at(v)? {
                    events.push((v, t, ev));
                }
            }
        }
        // stable: per (node, source) order is preserved
        events.sort_by_key(|(v, t, ev)| (*t, *v, ev.src()));
        Ok(TClocks { events })
    }

    pub fn events(&self) -> &[(NodeId, Time, TClockEvent)] {
        &self.events
    }

    pub fn events_for(&self, node: NodeId, src: NodeId) -> Vec<(Time, TClockEvent)> {
        self.events
            .iter()
            .filter(|(v, _, ev)| *v == node && ev.src() == src)
            .map(|(_, t, ev)| (*t, ev.clone()))
            .collect()
    }

    pub fn into_events(self) -> Vec<(NodeId, Time, TClockEvent)> {
        self.events
    }
}

/// Everything about one source needed to derive notifications.
struct SourceProfile<'g> {
    g: &'g TimeVaryingGraph,
    source: NodeId,
    horizon: Time,
    /// `contrib[v][k-1]`: arrival dates at `v` of direct `k`-hop journeys,
    /// split by the neighbour crossed last.
    contrib: Vec<Vec<Vec<(NodeId, IntervalSet)>>>,
    tables: Vec<Option<SegmentTable>>,
}

impl<'g> SourceProfile<'g> {
    fn new(g: &'g TimeVaryingGraph, u: NodeId, horizon: Time) -> Result<Self, OracleError> {
        let n = g.node_count();
        let z = g.latency();
        let reach = horizon + g.period() + z * n as i64;
        let feasible: Vec<IntervalSet> = (0..g.edges().len())
            .map(|e| {
                IntervalSet::from_parts(g.departure_windows(
                    crate::tvg::EdgeId(e),
                    Time::ZERO,
                    reach,
                ))
            })
            .collect();
        let mut contrib: Vec<Vec<Vec<(NodeId, IntervalSet)>>> = vec![Vec::new(); n];
        let mut layer: Vec<IntervalSet> = vec![IntervalSet::empty(); n];
        layer[u.0] = IntervalSet::single(Time::ZERO, reach);
        let mut covered = layer.clone();
        loop {
            let mut next: Vec<IntervalSet> = vec![IntervalSet::empty(); n];
            for y in 0..n {
                let mut parts = Vec::new();
                for &(x, e) in g.neighbors(NodeId(y)) {
                    if layer[x.0].is_empty() {
                        continue;
                    }
                    let arr = layer[x.0]
                        .intersect(&feasible[e.0])
                        .shift(z)
                        .clip(Time::ZERO, reach);
                    if !arr.is_empty() {
                        next[y] = next[y].union(&arr);
                    }
                    parts.push((x, arr));
                }
                contrib[y].push(parts);
            }
            let stable = (0..n).all(|y| next[y].is_subset(&covered[y]));
            if stable {
                break;
            }
            for y in 0..n {
                covered[y] = covered[y].union(&next[y]);
            }
            layer = next;
        }
        let tables = distance_functions_from(g, u)?;
        Ok(SourceProfile {
            g,
            source: u,
            horizon,
            contrib,
            tables,
        })
    }

    /// Level and proxy for arrivals at `v` just after `t`.
    fn level_right_of(&self, v: NodeId, t: Time) -> (Level, Option<NodeId>) {
        for (k, parts) in self.contrib[v.0].iter().enumerate() {
            if let Some((x, _)) = parts.iter().find(|(_, s)| s.covers_right_of(t)) {
                return (Level::Finite(k + 1), Some(*x));
            }
        }
        (Level::Infinite, None)
    }

    /// Latest emission date from the source whose foremost arrival at `v` is
    /// no later than `t`.
    fn view(&self, table: &SegmentTable, t: Time) -> Option<Time> {
        let p = self.g.period();
        let mut best: Option<Time> = None;
        let periods = t.div_floor(p);
        for m in -1..=periods {
            let base = p * m;
            for (i, s) in table.entries().iter().enumerate() {
                let a = s.date + base;
                let b = a + table.span(i);
                if b.is_negative() || a > t {
                    continue;
                }
                // foremost arrival for departures in (a, b]
                let cand = match s.trend {
                    Trend::Flat => {
                        let d = t - s.value;
                        (d > a).then(|| d.min(b))
                    }
                    Trend::Slope => (a + s.value <= t).then_some(b),
                };
                if let Some(d) = cand.filter(|d| !d.is_negative()) {
                    best = best.max(Some(d));
                }
            }
        }
        best
    }

    fn jump_times(&self, table: &SegmentTable) -> Vec<Time> {
        let p = self.g.period();
        let mut out = Vec::new();
        let periods = self.horizon.div_floor(p);
        for m in -1..=periods {
            let base = p * m;
            for (i, s) in table.entries().iter().enumerate() {
                out.push(s.date + base + s.value);
                out.push(s.date + base + table.span(i) + table.end_limit(i));
            }
        }
        out
    }

    fn date_proxy(&self, v: NodeId, date: Time, by: Time) -> Option<NodeId> {
        let fm = foremost_from(self.g, self.source, date).ok()?;
        let z = self.g.latency();
        self.g.neighbors(v).iter().find_map(|&(x, e)| {
            let at = fm.arrival[x.0]?;
            let dep = self.g.next_departure(e, at)?;
            (dep + z <= by).then_some(x)
        })
    }

    fn events_at(&self, v: NodeId) -> Result<Vec<(Time, TClockEvent)>, OracleError> {
        let Some(table) = &self.tables[v.0] else {
            return Ok(Vec::new());
        };
        let z = self.g.latency();
        let mut cands: Vec<Time> = vec![Time::ZERO];
        for parts in &self.contrib[v.0] {
            for (_, s) in parts {
                cands.extend(s.endpoints());
            }
        }
        cands.extend(self.jump_times(table));
        cands.retain(|t| !t.is_negative() && *t < self.horizon);
        cands.sort();
        cands.dedup();

        let mut out = Vec::new();
        let mut tracker = ViewTracker::new(z);
        let mut proxy: Option<NodeId> = None;
        for c in cands {
            let (level, px) = self.level_right_of(v, c);
            if (level, px) != (tracker.level(), proxy) {
                let ev = TClockEvent::LevelChanged {
                    src: self.source,
                    level,
                    proxy: px,
                    snapshot: false,
                };
                tracker.apply(c, &ev);
                proxy = px;
                out.push((c, ev));
            }
            let Some(phi) = self.view(table, c) else {
                continue;
            };
            if tracker.view(c).is_none_or(|r| phi > r) {
                let px = self.date_proxy(v, phi, c).unwrap_or(self.source);
                let ev = TClockEvent::DateImproved {
                    src: self.source,
                    date: phi,
                    proxy: px,
                    snapshot: false,
                };
                tracker.apply(c, &ev);
                out.push((c, ev));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{level, temporal_view};
    use crate::tvg::TvgBuilder;

    fn t(v: i64) -> Time {
        Time::from_int(v)
    }

    fn triangle() -> TimeVaryingGraph {
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

    const A: NodeId = NodeId(0);
    const B: NodeId = NodeId(1);
    const C: NodeId = NodeId(2);

    fn lvl(k: usize) -> Level {
        Level::Finite(k)
    }

    fn levels(evs: &[(Time, TClockEvent)]) -> Vec<(Time, Level, Option<NodeId>)> {
        evs.iter()
            .filter_map(|(t, e)| match e {
                TClockEvent::LevelChanged { level, proxy, .. } => Some((*t, *level, *proxy)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn level_transitions_at_c() {
        let g = triangle();
        let tc = TClocks::compute(&g, &[A], t(100)).unwrap();
        let evs = tc.events_for(C, A);
        assert_eq!(
            levels(&evs),
            vec![
                (t(11), lvl(2), Some(B)),
                (t(21), lvl(1), Some(A)),
                (t(60), Level::Infinite, None),
            ]
        );
        assert!(evs
            .iter()
            .all(|(_, e)| matches!(e, TClockEvent::LevelChanged { .. })));
    }

    #[test]
    fn level_and_date_events_at_b() {
        let g = triangle();
        let tc = TClocks::compute(&g, &[A], t(100)).unwrap();
        let evs = tc.events_for(B, A);
        assert_eq!(
            levels(&evs),
            vec![
                (t(1), lvl(1), Some(A)),
                (t(30), lvl(2), Some(C)),
                (t(40), Level::Infinite, None),
            ]
        );
        let dates: Vec<_> = evs
            .iter()
            .filter(|(_, e)| matches!(e, TClockEvent::DateImproved { .. }))
            .collect();
        assert_eq!(
            dates,
            vec![&(
                t(71),
                TClockEvent::DateImproved {
                    src: A,
                    date: t(59),
                    proxy: C,
                    snapshot: false
                }
            )]
        );
    }

    #[test]
    fn permanent_edge_gives_one_event() {
        let g = TvgBuilder::new(t(10), t(1))
            .node("a")
            .node("b")
            .edge("a", "b", &[(0, 10)])
            .build()
            .unwrap();
        let tc = TClocks::compute(&g, &[A], t(50)).unwrap();
        assert_eq!(levels(&tc.events_for(B, A)), vec![(t(1), lvl(1), Some(A))]);
        assert_eq!(tc.events().len(), 1);
    }

    #[test]
    fn replayed_stream_matches_oracle_views() {
        let g = triangle();
        let horizon = t(300);
        let tc = TClocks::compute(&g, &[A], horizon).unwrap();
        let eps = Time::new(1, 1000);
        for v in [B, C] {
            let evs = tc.events_for(v, A);
            let mut tracker = ViewTracker::new(g.latency());
            for (i, (at, ev)) in evs.iter().enumerate() {
                tracker.apply(*at, ev);
                let next = evs.get(i + 1).map_or(horizon, |e| e.0);
                for probe in [*at, at.lerp(next, 1, 2), next - eps] {
                    if probe >= *at && probe < next {
                        assert_eq!(
                            tracker.view(probe),
                            temporal_view(&g, A, v, probe).unwrap(),
                            "node {v} at {probe}"
                        );
                    }
                }
                if let TClockEvent::LevelChanged {
                    level: Level::Finite(k),
                    ..
                } = ev
                {
                    assert_eq!(level(&g, A, v, *at + eps).unwrap(), Some(*k));
                }
            }
        }
    }
}
