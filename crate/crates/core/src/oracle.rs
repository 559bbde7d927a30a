//! Centralized journey computations with full knowledge of the schedule.
//!
//! These are the reference answers the distributed layers are checked
//! against: foremost arrivals, temporal views, levels, shortest and fastest
//! journeys, and temporal distance and eccentricity functions over a period.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::segment::{aggregate, Segment, SegmentError, SegmentTable, Trend};
use crate::time::Time;
use crate::tvg::{Hop, Journey, NodeId, TimeVaryingGraph, TvgError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Graph(#[from] TvgError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error("node {to} is not reachable from {from}")]
    Unreachable { from: String, to: String },
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("distance is not piecewise linear between {0} and {1}")]
    NotPiecewise(Time, Time),
}

fn check_node(g: &TimeVaryingGraph, n: NodeId) -> Result<(), OracleError> {
    if n.0 < g.node_count() {
        Ok(())
    } else {
        Err(OracleError::UnknownNode(n.0))
    }
}

fn check_date(t: Time) -> Result<(), OracleError> {
    if t.is_negative() {
        Err(TvgError::NegativeDate(t).into())
    } else {
        Ok(())
    }
}

/// Foremost labels from one source: arrival date, hop count and the last hop
/// of a journey achieving it.
#[derive(Clone, Debug)]
pub struct Foremost {
    pub source: NodeId,
    pub start: Time,
    pub arrival: Vec<Option<Time>>,
    hops: Vec<usize>,
    last: Vec<Option<Hop>>,
}

impl Foremost {
    pub fn hop_count(&self, v: NodeId) -> Option<usize> {
        self.arrival[v.0].map(|_| self.hops[v.0])
    }

    /// Journey realizing the foremost arrival at `v`.
    pub fn journey(&self, v: NodeId) -> Option<Journey> {
        self.arrival[v.0]?;
        let mut hops = Vec::new();
        let mut at = v;
        while let Some(h) = self.last[at.0] {
            hops.push(h);
            at = h.from;
        }
        hops.reverse();
        Some(Journey {
            origin: self.source,
            hops,
        })
    }
}

/// Earliest arrivals at every node for journeys leaving `u` no earlier than
/// `t`. Ties prefer fewer hops, then the smaller predecessor id.
pub fn foremost_from(g: &TimeVaryingGraph, u: NodeId, t: Time) -> Result<Foremost, OracleError> {
    check_node(g, u)?;
    check_date(t)?;
    let n = g.node_count();
    let z = g.latency();
    let horizon = t + g.foremost_bound();
    let mut arrival: Vec<Option<Time>> = vec![None; n];
    let mut hops = vec![usize::MAX; n];
    let mut last: Vec<Option<Hop>> = vec![None; n];
    let mut done = vec![false; n];
    arrival[u.0] = Some(t);
    hops[u.0] = 0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((t, 0usize, u)));
    while let Some(Reverse((at, h, x))) = heap.pop() {
        if done[x.0] {
            continue;
        }
        done[x.0] = true;
        for &(y, e) in g.neighbors(x) {
            if done[y.0] {
                continue;
            }
            let Some(dep) = g.next_departure(e, at) else {
                continue;
            };
            let arr = dep + z;
            if arr > horizon {
                continue;
            }
            let better = match arrival[y.0] {
                None => true,
                Some(cur) => (arr, h + 1, x) < (cur, hops[y.0], last[y.0].map_or(x, |l| l.from)),
            };
            if better {
                arrival[y.0] = Some(arr);
                hops[y.0] = h + 1;
                last[y.0] = Some(Hop {
                    from: x,
                    to: y,
                    date: dep,
                });
                heap.push(Reverse((arr, h + 1, y)));
            }
        }
    }
    Ok(Foremost {
        source: u,
        start: t,
        arrival,
        hops,
        last,
    })
}

/// Foremost arrival date at `v` for departures from `u` at or after `t`;
/// `None` when nothing arrives within the reachability horizon.
pub fn earliest_arrival(
    g: &TimeVaryingGraph,
    u: NodeId,
    v: NodeId,
    t: Time,
) -> Result<Option<Time>, OracleError> {
    check_node(g, v)?;
    Ok(foremost_from(g, u, t)?.arrival[v.0])
}

/// Latest departure from `u` of a journey reaching `v` by `t`; `None` when
/// no journey has arrived yet. For `u == v` this is `t` itself.
pub fn temporal_view(
    g: &TimeVaryingGraph,
    u: NodeId,
    v: NodeId,
    t: Time,
) -> Result<Option<Time>, OracleError> {
    check_node(g, u)?;
    check_node(g, v)?;
    if u == v {
        return Ok(Some(t));
    }
    let n = g.node_count();
    // latest[x]: latest date at which leaving x still reaches v by t
    let mut latest: Vec<Option<Time>> = vec![None; n];
    let mut done = vec![false; n];
    latest[v.0] = Some(t);
    let mut heap = BinaryHeap::new();
    heap.push((t, v));
    while let Some((by, y)) = heap.pop() {
        if done[y.0] {
            continue;
        }
        done[y.0] = true;
        if y == u {
            break;
        }
        for &(x, e) in g.neighbors(y) {
            if done[x.0] || x == v {
                continue;
            }
            let Some(dep) = g.last_departure(e, by, Time::ZERO) else {
                continue;
            };
            if latest[x.0].is_none_or(|cur| dep > cur) {
                latest[x.0] = Some(dep);
                heap.push((dep, x));
            }
        }
    }
    Ok(latest[u.0])
}

/// Fewest hops among direct journeys from `u` arriving at `v` exactly at
/// `t`; `None` when no direct journey arrives then.
pub fn level(
    g: &TimeVaryingGraph,
    u: NodeId,
    v: NodeId,
    t: Time,
) -> Result<Option<usize>, OracleError> {
    check_node(g, u)?;
    check_node(g, v)?;
    let z = g.latency();
    let n = g.node_count();
    let mut frontier = vec![false; n];
    frontier[v.0] = true;
    let mut hops = 0usize;
    loop {
        hops += 1;
        let dep = t - z * hops as i64;
        if dep.is_negative() {
            return Ok(None);
        }
        let mut next = vec![false; n];
        let mut any = false;
        for y in (0..n).filter(|&y| frontier[y]) {
            for &(x, e) in g.neighbors(NodeId(y)) {
                if !next[x.0] && g.present_throughout(e, dep, dep + z) {
                    next[x.0] = true;
                    any = true;
                }
            }
        }
        if next[u.0] {
            return Ok(Some(hops));
        }
        if !any {
            return Ok(None);
        }
        frontier = next;
    }
}

/// A journey from `u` to `v` leaving at or after `t` with the fewest hops,
/// arriving as early as possible among those.
pub fn shortest_journey(
    g: &TimeVaryingGraph,
    u: NodeId,
    v: NodeId,
    t: Time,
) -> Result<Option<Journey>, OracleError> {
    check_node(g, u)?;
    check_node(g, v)?;
    check_date(t)?;
    if u == v {
        return Ok(Some(Journey::empty(u)));
    }
    let n = g.node_count();
    let z = g.latency();
    // layers[k][x]: earliest arrival at x using at most k hops, with the hop used
    type Layer = Vec<Option<(Time, Option<Hop>)>>;
    let mut layers: Vec<Layer> = vec![vec![None; n]];
    layers[0][u.0] = Some((t, None));
    for k in 1..n {
        let prev = &layers[k - 1];
        let mut cur = prev.clone();
        for (x, slot) in prev.iter().enumerate() {
            let Some((at, _)) = *slot else { continue };
            for &(y, e) in g.neighbors(NodeId(x)) {
                let Some(dep) = g.next_departure(e, at) else {
                    continue;
                };
                let arr = dep + z;
                if cur[y.0].is_none_or(|(c, _)| arr < c) {
                    cur[y.0] = Some((
                        arr,
                        Some(Hop {
                            from: NodeId(x),
                            to: y,
                            date: dep,
                        }),
                    ));
                }
            }
        }
        let reached = cur[v.0].is_some();
        layers.push(cur);
        if reached {
            let mut hops = Vec::new();
            let (mut at, mut layer) = (v, k);
            loop {
                let label = layers[layer][at.0].expect("label on path");
                // walk back to the layer that introduced this label
                while layer > 0 && layers[layer - 1][at.0] == Some(label) {
                    layer -= 1;
                }
                let Some(hop) = label.1 else { break };
                hops.push(hop);
                at = hop.from;
                layer -= 1;
            }
            hops.reverse();
            return Ok(Some(Journey { origin: u, hops }));
        }
    }
    Ok(None)
}

/// A journey from `u` to `v` leaving at or after `t` whose duration is the
/// least achievable; returns it together with that duration.
pub fn fastest_journey(
    g: &TimeVaryingGraph,
    u: NodeId,
    v: NodeId,
    t: Time,
) -> Result<Option<(Journey, Time)>, OracleError> {
    check_date(t)?;
    if u == v {
        return Ok(Some((Journey::empty(u), Time::ZERO)));
    }
    let table = match distance_function(g, u, v) {
        Ok(tbl) => tbl,
        Err(OracleError::Unreachable { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mins = table.min_windows()?;
    let p = g.period();
    let mut best: Option<Time> = None;
    for w in &mins.windows {
        let k = (t - w.start).div_floor(p);
        for k in [k, k + 1] {
            let s = w.start + p * k;
            let e = w.end + p * k;
            let cand = if w.is_point() {
                (s >= t).then_some(s)
            } else if e > t {
                Some(s.max(t))
            } else {
                None
            };
            if let Some(c) = cand {
                best = Some(best.map_or(c, |b| b.min(c)));
            }
        }
    }
    let Some(dep) = best else {
        return Ok(None);
    };
    let fm = foremost_from(g, u, dep)?;
    let journey = fm.journey(v).ok_or_else(|| OracleError::Unreachable {
        from: g.name(u).to_string(),
        to: g.name(v).to_string(),
    })?;
    let m = journey.metrics(g)?;
    Ok(Some((journey, m.duration)))
}

/// Dates where some distance function from any source may bend, reduced to
/// `[0, p)`: schedule endpoints shifted back by up to `n` latencies.
pub fn breakpoint_candidates(g: &TimeVaryingGraph) -> Vec<Time> {
    let p = g.period();
    let z = g.latency();
    let mut set = BTreeSet::new();
    set.insert(Time::ZERO);
    for x in g.schedule_endpoints() {
        for k in 0..=g.node_count() as i64 {
            set.insert((x - z * k).rem_euclid(p));
        }
    }
    set.into_iter().collect()
}

/// Temporal distance functions from `u` to every node over one period,
/// built by probing foremost arrivals between candidate breakpoints.
/// Unreachable nodes get `None`; `u` itself gets the zero table.
pub fn distance_functions_from(
    g: &TimeVaryingGraph,
    u: NodeId,
) -> Result<Vec<Option<SegmentTable>>, OracleError> {
    check_node(g, u)?;
    let n = g.node_count();
    let p = g.period();
    let cands = breakpoint_candidates(g);
    let mut entries: Vec<Vec<Segment>> = vec![Vec::new(); n];
    let mut reachable = vec![true; n];
    for (i, &c) in cands.iter().enumerate() {
        let next = cands.get(i + 1).copied().unwrap_or(p);
        let probes = [1, 2, 3].map(|q| c.lerp(next, q, 4));
        let arrivals = probes
            .iter()
            .map(|&m| foremost_from(g, u, m).map(|f| f.arrival))
            .collect::<Result<Vec<_>, _>>()?;
        for v in 0..n {
            if v == u.0 || !reachable[v] {
                continue;
            }
            let mut d = [Time::ZERO; 3];
            for (j, arr) in arrivals.iter().enumerate() {
                match arr[v] {
                    Some(a) => d[j] = a - probes[j],
                    None => reachable[v] = false,
                }
            }
            if !reachable[v] {
                continue;
            }
            let step = probes[1] - probes[0];
            let seg = if d[0] == d[1] && d[1] == d[2] {
                Segment::new(c, d[0], Trend::Flat)
            } else if d[0] - d[1] == step && d[1] - d[2] == step {
                Segment::new(c, d[0] + (probes[0] - c), Trend::Slope)
            } else {
                return Err(OracleError::NotPiecewise(c, next));
            };
            entries[v].push(seg);
        }
    }
    let mut out = Vec::with_capacity(n);
    for (v, segs) in entries.into_iter().enumerate() {
        if v == u.0 {
            out.push(Some(SegmentTable::zero(p)));
        } else if reachable[v] {
            out.push(Some(SegmentTable::new(p, segs)?.normal_form()));
        } else {
            out.push(None);
        }
    }
    Ok(out)
}

/// The function `t -> d(u, t, v)` over one period, in normal form.
pub fn distance_function(
    g: &TimeVaryingGraph,
    u: NodeId,
    v: NodeId,
) -> Result<SegmentTable, OracleError> {
    check_node(g, v)?;
    distance_functions_from(g, u)?
        .swap_remove(v.0)
        .ok_or_else(|| OracleError::Unreachable {
            from: g.name(u).to_string(),
            to: g.name(v).to_string(),
        })
}

/// Temporal eccentricity of `u` over one period: the fold of all its
/// distance functions under segment-wise maximum.
pub fn eccentricity_function(g: &TimeVaryingGraph, u: NodeId) -> Result<SegmentTable, OracleError> {
    let tables = distance_functions_from(g, u)?;
    let mut acc = SegmentTable::zero(g.period());
    for (v, tbl) in tables.into_iter().enumerate() {
        if v == u.0 {
            continue;
        }
        let tbl = tbl.ok_or_else(|| OracleError::Unreachable {
            from: g.name(u).to_string(),
            to: g.name(NodeId(v)).to_string(),
        })?;
        acc = aggregate(&acc, &tbl)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::tests::{dist_a_b, dist_a_c, ecc_a};
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

    fn chain() -> TimeVaryingGraph {
        TvgBuilder::new(t(10), Time::new(1, 10))
            .node("a")
            .node("b")
            .node("c")
            .edge("a", "b", &[(0, 4)])
            .edge("b", "c", &[(1, 3), (5, 6)])
            .build()
            .unwrap()
    }

    fn kite() -> TimeVaryingGraph {
        TvgBuilder::new(t(10), Time::new(1, 10))
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

    const A: NodeId = NodeId(0);
    const B: NodeId = NodeId(1);
    const C: NodeId = NodeId(2);
    const D: NodeId = NodeId(3);

    #[test]
    fn foremost_arrivals_in_the_triangle() {
        let g = triangle();
        assert_eq!(earliest_arrival(&g, A, C, t(0)).unwrap(), Some(t(11)));
        assert_eq!(earliest_arrival(&g, A, C, t(20)).unwrap(), Some(t(21)));
        assert_eq!(earliest_arrival(&g, A, A, t(7)).unwrap(), Some(t(7)));
        assert_eq!(earliest_arrival(&g, A, C, t(70)).unwrap(), Some(t(111)));
        let j = foremost_from(&g, A, t(0)).unwrap().journey(C).unwrap();
        assert_eq!(j.nodes(), vec![A, B, C]);
        assert_eq!(j.metrics(&g).unwrap().arrival, t(11));
    }

    #[test]
    fn views_in_the_line_graph() {
        let g = chain();
        let z = Time::new(1, 10);
        assert_eq!(temporal_view(&g, A, C, t(3)).unwrap(), Some(t(3) - z * 2));
        assert_eq!(temporal_view(&g, A, C, Time::new(1, 2)).unwrap(), None);
        // the store-and-forward journey leaving at 4 - z lands at 5 + z
        assert_eq!(temporal_view(&g, A, C, t(5)).unwrap(), Some(t(3) - z * 2));
        assert_eq!(temporal_view(&g, A, C, t(5) + z).unwrap(), Some(t(4) - z));
    }

    #[test]
    fn levels_in_the_triangle() {
        let g = triangle();
        assert_eq!(level(&g, A, C, t(25)).unwrap(), Some(1));
        assert_eq!(level(&g, A, C, t(15)).unwrap(), Some(2));
        assert_eq!(level(&g, A, C, t(65)).unwrap(), None);
        assert_eq!(level(&g, A, B, t(30)).unwrap(), Some(1));
        assert_eq!(level(&g, A, B, t(35)).unwrap(), Some(2));
    }

    #[test]
    fn shortest_journeys() {
        let g = triangle();
        let j = shortest_journey(&g, A, C, t(0)).unwrap().unwrap();
        assert_eq!(j.hops.len(), 1);
        assert_eq!(j.hops[0].date, t(20));
        let g = kite();
        let j = shortest_journey(&g, A, D, t(0)).unwrap().unwrap();
        assert_eq!(j.nodes(), vec![A, C, D]);
        assert!(j.validate(&g));
        assert!(shortest_journey(&g, A, A, t(0))
            .unwrap()
            .unwrap()
            .hops
            .is_empty());
    }

    #[test]
    fn fastest_journeys() {
        let g = triangle();
        let (j, d) = fastest_journey(&g, A, C, t(0)).unwrap().unwrap();
        assert_eq!(d, t(1));
        assert_eq!(j.hops[0].date, t(20));
        let (_, d) = fastest_journey(&g, A, B, t(0)).unwrap().unwrap();
        assert_eq!(d, t(1));
        let (j, d) = fastest_journey(&chain(), A, C, t(0)).unwrap().unwrap();
        assert_eq!(d, Time::new(2, 10));
        assert_eq!(j.hops[0].date, Time::new(9, 10));
    }

    #[test]
    fn distance_tables_of_the_triangle() {
        let g = triangle();
        assert_eq!(distance_function(&g, A, C).unwrap(), dist_a_c());
        assert_eq!(distance_function(&g, A, B).unwrap(), dist_a_b());
        assert_eq!(eccentricity_function(&g, A).unwrap(), ecc_a());
    }

    #[test]
    fn constant_distance_over_a_permanent_edge() {
        let g = TvgBuilder::new(t(10), t(1))
            .node("a")
            .node("b")
            .edge("a", "b", &[(0, 10)])
            .build()
            .unwrap();
        let tbl = distance_function(&g, A, B).unwrap();
        assert_eq!(tbl, SegmentTable::constant(t(10), t(1)));
        assert!(tbl.same_function(&eccentricity_function(&g, A).unwrap()));
    }

    #[test]
    fn unreachable_nodes_are_reported() {
        let g = TvgBuilder::new(t(10), t(1))
            .node("a")
            .node("b")
            .node("c")
            .edge("a", "b", &[(0, 5)])
            .build()
            .unwrap();
        assert_eq!(earliest_arrival(&g, A, C, t(0)).unwrap(), None);
        assert!(matches!(
            distance_function(&g, A, C),
            Err(OracleError::Unreachable { .. })
        ));
        assert!(eccentricity_function(&g, A).is_err());
        assert_eq!(temporal_view(&g, A, C, t(50)).unwrap(), None);
    }
}
