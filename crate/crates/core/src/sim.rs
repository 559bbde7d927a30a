//! Deterministic continuous-time discrete-event simulation over a periodic
//! time-varying graph.
//!
//! Events at equal times run in the order: message deliveries, edge
//! disappearances, edge appearances, then timers and T-Clock notifications.
//! Ties within a class follow scheduling order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use thiserror::Error;

use crate::tclocks::{TClockEvent, TClocks, ViewTracker};
use crate::time::Time;
use crate::tvg::{EdgeId, NodeId, TimeVaryingGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("no edge between {0} and {1}")]
    NoSuchEdge(String, String),
    #[error("timer at {at} is before the current time {now}")]
    PastTimer { at: Time, now: Time },
    #[error("until time {0} is negative")]
    NegativeUntil(Time),
    #[error("node {0} registered twice with T-Clocks")]
    AlreadyRegistered(String),
    #[error("T-Clocks layer is not enabled")]
    NoTClocks,
    #[error("computing T-Clock notifications: {0}")]
    TClocks(String),
    #[error("handler failed at {time} on `{event}`: {message}")]
    Handler {
        time: Time,
        event: String,
        message: String,
    },
}

/// Failure raised by a node handler; aborts the run.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct HandlerError(pub String);

impl From<SimError> for HandlerError {
    fn from(e: SimError) -> Self {
        HandlerError(e.to_string())
    }
}

pub type HandlerResult = Result<(), HandlerError>;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TimerId(pub u64);

/// Node behaviour. Every handler runs atomically at one instant, and `now`
/// seen through the context is the node's local clock.
pub trait Process {
    type Msg: Clone + fmt::Debug;

    /// Called once for every node at time 0, before any event.
    fn on_start(&mut self, _ctx: &mut Context<'_, Self::Msg>) -> HandlerResult {
        Ok(())
    }
    fn on_edge_appear(
        &mut self,
        _ctx: &mut Context<'_, Self::Msg>,
        _peer: NodeId,
    ) -> HandlerResult {
        Ok(())
    }
    fn on_edge_disappear(
        &mut self,
        _ctx: &mut Context<'_, Self::Msg>,
        _peer: NodeId,
    ) -> HandlerResult {
        Ok(())
    }
    fn on_message(
        &mut self,
        _ctx: &mut Context<'_, Self::Msg>,
        _from: NodeId,
        _msg: Self::Msg,
    ) -> HandlerResult {
        Ok(())
    }
    fn on_timer(
        &mut self,
        _ctx: &mut Context<'_, Self::Msg>,
        _id: TimerId,
        _tag: u64,
    ) -> HandlerResult {
        Ok(())
    }
    fn on_tclock(&mut self, _ctx: &mut Context<'_, Self::Msg>, _ev: &TClockEvent) -> HandlerResult {
        Ok(())
    }
}

/// A process that does nothing; useful to observe edge events alone.
#[derive(Clone, Copy, Debug, Default)]
pub struct Idle;

impl Process for Idle {
    type Msg = ();
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceLine {
    pub time: Time,
    pub kind: &'static str,
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.time, self.kind, self.subject)?;
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

/// Ordered record of everything that happened during a run.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct EventTrace {
    pub lines: Vec<TraceLine>,
}

impl EventTrace {
    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a TraceLine> + 'a {
        self.lines.iter().filter(move |l| l.kind == kind)
    }

    pub fn edge_events(&self) -> impl Iterator<Item = &TraceLine> {
        self.lines
            .iter()
            .filter(|l| l.kind == "edge-appear" || l.kind == "edge-disappear")
    }
}

impl fmt::Display for EventTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Payload<M> {
    Deliver { to: NodeId, from: NodeId, msg: M },
    Disappear(EdgeId),
    Appear(EdgeId),
    Timer { node: NodeId, id: TimerId, tag: u64 },
    TClock { node: NodeId, ev: TClockEvent },
}

impl<M> Payload<M> {
    fn class(&self) -> u8 {
        match self {
            Payload::Deliver { .. } => 0,
            Payload::Disappear(_) => 1,
            Payload::Appear(_) => 2,
            Payload::Timer { .. } | Payload::TClock { .. } => 3,
        }
    }
}

struct Queued<M> {
    time: Time,
    class: u8,
    seq: u64,
    payload: Payload<M>,
}

impl<M> PartialEq for Queued<M> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<M> Eq for Queued<M> {}
impl<M> PartialOrd for Queued<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<M> Ord for Queued<M> {
    // reversed so the max-heap pops the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.class, other.seq).cmp(&(self.time, self.class, self.seq))
    }
}

#[derive(Clone, Debug, Default)]
pub struct SimConfig {
    /// Per-node clock offsets added to global time; missing entries are 0.
    pub offsets: BTreeMap<NodeId, Time>,
    /// Sources tracked by the T-Clocks layer; `None` disables it.
    pub tclock_sources: Option<Vec<NodeId>>,
    /// Keep a full event trace (costly for long runs).
    pub record_trace: bool,
}

struct Core<M> {
    now: Time,
    seq: u64,
    queue: BinaryHeap<Queued<M>>,
    offsets: Vec<Time>,
    trace: EventTrace,
    record: bool,
    next_timer: u64,
    cancelled: BTreeSet<TimerId>,
    tclocks_on: bool,
    registered: Vec<bool>,
    tclock_state: BTreeMap<(NodeId, NodeId), TClockState>,
    pending_snapshot: Vec<(NodeId, TClockEvent)>,
    stopped: bool,
    sends: u64,
    losses: u64,
}

/// What a node's T-Clock for one source currently holds.
#[derive(Clone, Debug)]
struct TClockState {
    view: ViewTracker,
    proxy: Option<NodeId>,
    frozen_proxy: Option<NodeId>,
}

impl TClockState {
    fn new(latency: Time) -> Self {
        TClockState {
            view: ViewTracker::new(latency),
            proxy: None,
            frozen_proxy: None,
        }
    }

    fn apply(&mut self, now: Time, ev: &TClockEvent) {
        let before = self.view.frozen();
        self.view.apply(now, ev);
        match *ev {
            TClockEvent::LevelChanged { proxy, .. } => {
                if self.view.frozen() != before {
                    self.frozen_proxy = self.proxy;
                }
                self.proxy = proxy;
            }
            TClockEvent::DateImproved { proxy, .. } => {
                if self.view.frozen() != before {
                    self.frozen_proxy = Some(proxy);
                }
            }
        }
    }
}

impl<M: Clone + fmt::Debug> Core<M> {
    fn push(&mut self, time: Time, payload: Payload<M>) {
        let class = payload.class();
        self.seq += 1;
        self.queue.push(Queued {
            time,
            class,
            seq: self.seq,
            payload,
        });
    }

    fn log(&mut self, kind: &'static str, subject: String, detail: String) {
        if self.record {
            self.trace.lines.push(TraceLine {
                time: self.now,
                kind,
                subject,
                detail,
            });
        }
    }
}

/// A handler's window onto the simulation.
pub struct Context<'a, M> {
    core: &'a mut Core<M>,
    graph: &'a TimeVaryingGraph,
    node: NodeId,
}

impl<'a, M: Clone + fmt::Debug> Context<'a, M> {
    pub fn node(&self) -> NodeId {
        self.node
    }

    /// Local time at this node.
    pub fn now(&self) -> Time {
        self.core.now + self.core.offsets[self.node.0]
    }

    pub fn latency(&self) -> Time {
        self.graph.latency()
    }

    pub fn period(&self) -> Time {
        self.graph.period()
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn name(&self, n: NodeId) -> &str {
        self.graph.name(n)
    }

    pub fn neighbors(&self) -> Vec<NodeId> {
        self.graph
            .neighbors(self.node)
            .iter()
            .map(|&(n, _)| n)
            .collect()
    }

    /// Whether the edge to `peer` is present right now.
    pub fn is_present(&self, peer: NodeId) -> bool {
        self.graph
            .edge(self.node, peer)
            .is_some_and(|e| self.graph.present_at(e, self.core.now))
    }

    /// Whether the edge to `peer` ever stays up for a full traversal.
    pub fn can_traverse(&self, peer: NodeId) -> bool {
        let p = self.graph.period();
        self.graph
            .edge(self.node, peer)
            .is_some_and(|e| !self.graph.departure_windows(e, Time::ZERO, p).is_empty())
    }

    /// Sends `msg` to a neighbour at the current instant. Delivery happens
    /// `zeta` later if the edge stays present throughout; otherwise the
    /// message is silently lost.
    pub fn send(&mut self, to: NodeId, msg: M) -> Result<(), SimError> {
        let g = self.graph;
        let e = g.edge(self.node, to).ok_or_else(|| {
            SimError::NoSuchEdge(g.name(self.node).to_string(), g.name(to).to_string())
        })?;
        let now = self.core.now;
        let z = g.latency();
        self.core.sends += 1;
        let subject = format!("{}->{}", g.name(self.node), g.name(to));
        if g.present_throughout(e, now, now + z) {
            self.core
                .log("send", subject, format!("arrives {}", now + z));
            self.core.push(
                now + z,
                Payload::Deliver {
                    to,
                    from: self.node,
                    msg,
                },
            );
        } else {
            self.core.losses += 1;
            self.core.log("send", subject, "lost".to_string());
        }
        Ok(())
    }

    /// Arms a timer for local date `at`.
    pub fn set_timer(&mut self, at: Time, tag: u64) -> Result<TimerId, SimError> {
        let now = self.now();
        if at < now {
            return Err(SimError::PastTimer { at, now });
        }
        let global = at - self.core.offsets[self.node.0];
        let id = TimerId(self.core.next_timer);
        self.core.next_timer += 1;
        self.core.push(
            global,
            Payload::Timer {
                node: self.node,
                id,
                tag,
            },
        );
        Ok(id)
    }

    pub fn cancel_timer(&mut self, id: TimerId) {
        self.core.cancelled.insert(id);
    }

    /// Subscribes this node to T-Clock notifications. Every source with a
    /// finite current level is reported at once by a snapshot event.
    pub fn register_tclocks(&mut self) -> Result<(), SimError> {
        if !self.core.tclocks_on {
            return Err(SimError::NoTClocks);
        }
        if self.core.registered[self.node.0] {
            return Err(SimError::AlreadyRegistered(
                self.graph.name(self.node).to_string(),
            ));
        }
        self.core.registered[self.node.0] = true;
        let now = self.core.now;
        let z = self.graph.latency();
        let offset = self.core.offsets[self.node.0];
        let mut snaps = Vec::new();
        for (&(_, src), st) in self
            .core
            .tclock_state
            .range((self.node, NodeId(0))..=(self.node, NodeId(usize::MAX)))
        {
            let level = st.view.level();
            if level.is_finite() {
                snaps.push(TClockEvent::LevelChanged {
                    src,
                    level,
                    proxy: st.proxy,
                    snapshot: true,
                });
            }
            if let Some(date) = st.view.frozen() {
                if level.direct_view(now, z).is_none_or(|d| date > d) {
                    snaps.push(TClockEvent::DateImproved {
                        src,
                        date: date + offset,
                        proxy: st.frozen_proxy.unwrap_or(src),
                        snapshot: true,
                    });
                }
            }
        }
        for ev in snaps {
            self.core.pending_snapshot.push((self.node, ev));
        }
        Ok(())
    }

    /// Ends the run after the current event.
    pub fn stop(&mut self) {
        self.core.stopped = true;
    }

    /// Appends a free-form line to the trace.
    pub fn note(&mut self, detail: String) {
        let subject = self.graph.name(self.node).to_string();
        self.core.log("note", subject, detail);
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RunSummary {
    /// Global time of the last processed event.
    pub last_time: Time,
    pub events: u64,
    pub sends: u64,
    pub losses: u64,
    pub stopped: bool,
}

pub struct Simulation<'g, P: Process> {
    graph: &'g TimeVaryingGraph,
    processes: Vec<P>,
    config: SimConfig,
    trace: EventTrace,
}

impl<'g, P: Process> Simulation<'g, P> {
    /// One process per node, indexed by node id.
    pub fn new(graph: &'g TimeVaryingGraph, processes: Vec<P>, config: SimConfig) -> Self {
        assert_eq!(processes.len(), graph.node_count(), "one process per node");
        Simulation {
            graph,
            processes,
            config,
            trace: EventTrace::default(),
        }
    }

    pub fn processes(&self) -> &[P] {
        &self.processes
    }

    pub fn into_processes(self) -> Vec<P> {
        self.processes
    }

    pub fn trace(&self) -> &EventTrace {
        &self.trace
    }

    pub fn offset(&self, n: NodeId) -> Time {
        self.config.offsets.get(&n).copied().unwrap_or(Time::ZERO)
    }

    /// Runs every event strictly before `until` (global time).
    pub fn run(&mut self, until: Time) -> Result<RunSummary, SimError> {
        if until.is_negative() {
            return Err(SimError::NegativeUntil(until));
        }
        let g = self.graph;
        let n = g.node_count();
        let offsets: Vec<Time> = (0..n).map(|i| self.offset(NodeId(i))).collect();
        let mut core: Core<P::Msg> = Core {
            now: Time::ZERO,
            seq: 0,
            queue: BinaryHeap::new(),
            offsets,
            trace: EventTrace::default(),
            record: self.config.record_trace,
            next_timer: 0,
            cancelled: BTreeSet::new(),
            tclocks_on: self.config.tclock_sources.is_some(),
            registered: vec![false; n],
            tclock_state: BTreeMap::new(),
            pending_snapshot: Vec::new(),
            stopped: false,
            sends: 0,
            losses: 0,
        };
        for (i, _) in g.edges().iter().enumerate() {
            for (date, appears) in g.edge_transitions(EdgeId(i)) {
                if date < until {
                    let p = if appears {
                        Payload::Appear(EdgeId(i))
                    } else {
                        Payload::Disappear(EdgeId(i))
                    };
                    core.push(date, p);
                }
            }
        }
        if let Some(sources) = &self.config.tclock_sources {
            let layer = TClocks::compute(g, sources, until)
                .map_err(|e| SimError::TClocks(e.to_string()))?;
            for (node, time, ev) in layer.into_events() {
                if time < until {
                    core.push(time, Payload::TClock { node, ev });
                }
            }
        }

        let mut processed = 0u64;
        for i in 0..n {
            let node = NodeId(i);
            dispatch(
                &mut self.processes[i],
                &mut core,
                g,
                node,
                "start",
                |p, ctx| p.on_start(ctx),
            )?;
            flush_snapshots(&mut self.processes, &mut core, g)?;
        }
        while !core.stopped {
            let Some(ev) = core.queue.pop() else { break };
            if ev.time >= until {
                break;
            }
            core.now = ev.time;
            processed += 1;
            match ev.payload {
                Payload::Appear(e) | Payload::Disappear(e) => {
                    let appears = matches!(ev.payload, Payload::Appear(_));
                    let data = g.edge_data(e);
                    core.log(
                        if appears {
                            "edge-appear"
                        } else {
                            "edge-disappear"
                        },
                        g.edge_label(e),
                        String::new(),
                    );
                    let next = ev.time + g.period();
                    if next < until {
                        core.push(next, ev.payload.clone());
                    }
                    let (a, b) = (data.a, data.b);
                    for (me, peer) in [(a, b), (b, a)] {
                        let label = if appears {
                            "edge-appear"
                        } else {
                            "edge-disappear"
                        };
                        dispatch(
                            &mut self.processes[me.0],
                            &mut core,
                            g,
                            me,
                            label,
                            |p, ctx| {
                                if appears {
                                    p.on_edge_appear(ctx, peer)
                                } else {
                                    p.on_edge_disappear(ctx, peer)
                                }
                            },
                        )?;
                    }
                }
                Payload::Deliver { to, from, msg } => {
                    core.log(
                        "deliver",
                        g.name(to).to_string(),
                        format!("from={} {:?}", g.name(from), msg),
                    );
                    dispatch(
                        &mut self.processes[to.0],
                        &mut core,
                        g,
                        to,
                        "deliver",
                        |p, ctx| p.on_message(ctx, from, msg),
                    )?;
                }
                Payload::Timer { node, id, tag } => {
                    if core.cancelled.remove(&id) {
                        continue;
                    }
                    core.log("timer", g.name(node).to_string(), format!("tag={tag}"));
                    dispatch(
                        &mut self.processes[node.0],
                        &mut core,
                        g,
                        node,
                        "timer",
                        |p, ctx| p.on_timer(ctx, id, tag),
                    )?;
                }
                Payload::TClock { node, ev: tev } => {
                    core.tclock_state
                        .entry((node, tev.src()))
                        .or_insert_with(|| TClockState::new(g.latency()))
                        .apply(core.now, &tev);
                    if core.registered[node.0] {
                        let local = localize(&tev, core.offsets[node.0]);
                        core.log(tev.kind(), g.name(node).to_string(), describe(g, &local));
                        dispatch(
                            &mut self.processes[node.0],
                            &mut core,
                            g,
                            node,
                            tev.kind(),
                            |p, ctx| p.on_tclock(ctx, &local),
                        )?;
                    }
                }
            }
            flush_snapshots(&mut self.processes, &mut core, g)?;
        }
        self.trace = std::mem::take(&mut core.trace);
        Ok(RunSummary {
            last_time: core.now,
            events: processed,
            sends: core.sends,
            losses: core.losses,
            stopped: core.stopped,
        })
    }
}

fn localize(ev: &TClockEvent, offset: Time) -> TClockEvent {
    match *ev {
        TClockEvent::DateImproved {
            src,
            date,
            proxy,
            snapshot,
        } => TClockEvent::DateImproved {
            src,
            date: date + offset,
            proxy,
            snapshot,
        },
        ref other => other.clone(),
    }
}

fn describe(g: &TimeVaryingGraph, ev: &TClockEvent) -> String {
    let proxy = |p: Option<NodeId>| p.map_or("none".to_string(), |n| g.name(n).to_string());
    match *ev {
        TClockEvent::LevelChanged {
            src,
            level,
            proxy: px,
            snapshot,
        } => format!(
            "src={} level={} proxy={}{}",
            g.name(src),
            level,
            proxy(px),
            if snapshot { " snapshot" } else { "" }
        ),
        TClockEvent::DateImproved {
            src,
            date,
            proxy: px,
            snapshot,
        } => format!(
            "src={} date={} proxy={}{}",
            g.name(src),
            date,
            g.name(px),
            if snapshot { " snapshot" } else { "" }
        ),
    }
}

fn dispatch<P: Process>(
    process: &mut P,
    core: &mut Core<P::Msg>,
    graph: &TimeVaryingGraph,
    node: NodeId,
    label: &str,
    f: impl FnOnce(&mut P, &mut Context<'_, P::Msg>) -> HandlerResult,
) -> Result<(), SimError> {
    let time = core.now;
    let mut ctx = Context { core, graph, node };
    f(process, &mut ctx).map_err(|e| SimError::Handler {
        time,
        event: format!("{label} at {}", graph.name(node)),
        message: e.0,
    })
}

fn flush_snapshots<P: Process>(
    processes: &mut [P],
    core: &mut Core<P::Msg>,
    g: &TimeVaryingGraph,
) -> Result<(), SimError> {
    while !core.pending_snapshot.is_empty() {
        let batch = std::mem::take(&mut core.pending_snapshot);
        for (node, ev) in batch {
            core.log(ev.kind(), g.name(node).to_string(), describe(g, &ev));
            dispatch(
                &mut processes[node.0],
                core,
                g,
                node,
                ev.kind(),
                |p, ctx| p.on_tclock(ctx, &ev),
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tclocks::Level;
    use crate::tvg::TvgBuilder;

    fn t(v: i64) -> Time {
        Time::from_int(v)
    }

    const A: NodeId = NodeId(0);
    const B: NodeId = NodeId(1);
    const C: NodeId = NodeId(2);

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

    #[derive(Clone, Debug)]
    enum Action {
        Send(NodeId),
        Register,
        Arm(Time),
        ArmAndCancel(Time),
        Fail,
    }

    /// Performs scripted actions at local dates and records what it sees.
    #[derive(Default)]
    struct Script {
        plan: Vec<(Time, Action)>,
        received: Vec<(Time, NodeId)>,
        fired: Vec<(Time, u64)>,
        tclock: Vec<(Time, TClockEvent)>,
        errors: Vec<SimError>,
    }

    impl Script {
        fn new(plan: Vec<(Time, Action)>) -> Self {
            Script {
                plan,
                ..Default::default()
            }
        }
    }

    const PLAN_TAG: u64 = 1_000_000;

    impl Process for Script {
        type Msg = u32;

        fn on_start(&mut self, ctx: &mut Context<'_, u32>) -> HandlerResult {
            for i in 0..self.plan.len() {
                ctx.set_timer(self.plan[i].0, PLAN_TAG + i as u64)?;
            }
            Ok(())
        }

        fn on_message(
            &mut self,
            ctx: &mut Context<'_, u32>,
            from: NodeId,
            _: u32,
        ) -> HandlerResult {
            self.received.push((ctx.now(), from));
            Ok(())
        }

        fn on_timer(&mut self, ctx: &mut Context<'_, u32>, _: TimerId, tag: u64) -> HandlerResult {
            if tag < PLAN_TAG {
                self.fired.push((ctx.now(), tag));
                return Ok(());
            }
            match self.plan[(tag - PLAN_TAG) as usize].1.clone() {
                Action::Send(to) => ctx.send(to, 7)?,
                Action::Register => {
                    if let Err(e) = ctx.register_tclocks() {
                        self.errors.push(e);
                    }
                }
                Action::Arm(at) => {
                    ctx.set_timer(at, 1)?;
                    ctx.set_timer(at, 2)?;
                }
                Action::ArmAndCancel(at) => {
                    let id = ctx.set_timer(at, 3)?;
                    ctx.cancel_timer(id);
                }
                Action::Fail => return Err(HandlerError("scripted failure".into())),
            }
            Ok(())
        }

        fn on_tclock(&mut self, ctx: &mut Context<'_, u32>, ev: &TClockEvent) -> HandlerResult {
            self.tclock.push((ctx.now(), ev.clone()));
            Ok(())
        }
    }

    fn idle_trace(g: &TimeVaryingGraph, until: i64) -> EventTrace {
        let config = SimConfig {
            record_trace: true,
            ..Default::default()
        };
        let mut sim = Simulation::new(g, vec![Idle; g.node_count()], config);
        sim.run(t(until)).unwrap();
        sim.trace().clone()
    }

    fn scripted(
        g: &TimeVaryingGraph,
        plans: Vec<Vec<(Time, Action)>>,
        config: SimConfig,
        until: i64,
    ) -> (Result<RunSummary, SimError>, Vec<Script>, EventTrace) {
        let procs = plans.into_iter().map(Script::new).collect();
        let mut sim = Simulation::new(g, procs, config);
        let res = sim.run(t(until));
        let trace = sim.trace().clone();
        (res, sim.into_processes(), trace)
    }

    #[test]
    fn one_period_of_edge_events() {
        let trace = idle_trace(&triangle(), 100);
        let lines: Vec<String> = trace.edge_events().map(|l| l.to_string()).collect();
        assert_eq!(
            lines,
            vec![
                "0 edge-appear a-b",
                "10 edge-appear b-c",
                "20 edge-appear a-c",
                "30 edge-disappear a-b",
                "40 edge-disappear b-c",
                "60 edge-disappear a-c",
                "70 edge-appear b-c",
                "80 edge-disappear b-c",
            ]
        );
    }

    #[test]
    fn later_periods_repeat_the_first() {
        let trace = idle_trace(&triangle(), 200);
        let ev: Vec<&TraceLine> = trace.edge_events().collect();
        assert_eq!(ev.len(), 16);
        for i in 0..8 {
            assert_eq!(ev[i + 8].time, ev[i].time + t(100));
            assert_eq!(
                (ev[i + 8].kind, &ev[i + 8].subject),
                (ev[i].kind, &ev[i].subject)
            );
        }
        assert!(
            idle_trace(&TvgBuilder::new(t(5), t(1)).node("x").build().unwrap(), 50)
                .lines
                .is_empty()
        );
    }

    #[test]
    fn sends_respect_presence_throughout() {
        let g = triangle();
        let plan = vec![
            (t(59), Action::Send(C)),
            (Time::new(119, 2), Action::Send(C)),
            (t(10), Action::Send(C)),
        ];
        let (res, procs, trace) = scripted(
            &g,
            vec![plan, vec![], vec![]],
            SimConfig {
                record_trace: true,
                ..Default::default()
            },
            100,
        );
        let summary = res.unwrap();
        assert_eq!(procs[2].received, vec![(t(60), A)]);
        assert_eq!((summary.sends, summary.losses), (3, 2));
        let at60: Vec<&str> = trace
            .lines
            .iter()
            .filter(|l| l.time == t(60))
            .map(|l| l.kind)
            .collect();
        assert_eq!(at60, vec!["deliver", "edge-disappear"]);
    }

    #[test]
    fn timers_fire_in_creation_order_and_can_be_cancelled() {
        let g = triangle();
        let plan = vec![
            (t(60), Action::Arm(t(160))),
            (t(60), Action::ArmAndCancel(t(70))),
        ];
        let (res, procs, _) = scripted(&g, vec![plan, vec![], vec![]], SimConfig::default(), 300);
        res.unwrap();
        assert_eq!(procs[0].fired, vec![(t(160), 1), (t(160), 2)]);
        let plan = vec![(t(60), Action::Arm(t(10)))];
        let (res, _, _) = scripted(&g, vec![plan, vec![], vec![]], SimConfig::default(), 300);
        assert!(matches!(res, Err(SimError::Handler { .. })));
    }

    #[test]
    fn handler_failure_aborts_with_event() {
        let g = triangle();
        let plan = vec![(t(5), Action::Fail)];
        let (res, _, _) = scripted(&g, vec![vec![], plan, vec![]], SimConfig::default(), 100);
        match res {
            Err(SimError::Handler { time, event, .. }) => {
                assert_eq!(time, t(5));
                assert_eq!(event, "timer at b");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn registration_replays_current_state() {
        let g = triangle();
        let config = SimConfig {
            tclock_sources: Some(vec![A]),
            ..Default::default()
        };
        let plans = |at: i64| {
            vec![
                vec![],
                vec![],
                vec![(t(at), Action::Register), (t(at), Action::Register)],
            ]
        };
        let (res, procs, _) = scripted(&g, plans(50), config.clone(), 100);
        res.unwrap();
        assert_eq!(
            procs[2].tclock[0],
            (
                t(50),
                TClockEvent::LevelChanged {
                    src: A,
                    level: Level::Finite(1),
                    proxy: Some(A),
                    snapshot: true
                }
            )
        );
        assert!(matches!(
            procs[2].errors[..],
            [SimError::AlreadyRegistered(_)]
        ));
        // level is +inf at 65, but the view frozen when ac vanished is replayed
        let (res, procs, _) = scripted(&g, plans(65), config, 100);
        res.unwrap();
        assert_eq!(
            procs[2].tclock,
            vec![(
                t(65),
                TClockEvent::DateImproved {
                    src: A,
                    date: t(59),
                    proxy: A,
                    snapshot: true
                }
            )]
        );
    }

    #[test]
    fn offsets_shift_local_clocks() {
        let g = triangle();
        let mut offsets = BTreeMap::new();
        offsets.insert(C, t(1000));
        let config = SimConfig {
            offsets,
            ..Default::default()
        };
        let plan = vec![(t(59), Action::Send(C))];
        let (res, procs, _) = scripted(&g, vec![plan, vec![], vec![]], config, 100);
        res.unwrap();
        assert_eq!(procs[2].received, vec![(t(1060), A)]);
    }

    #[test]
    fn identical_runs_give_identical_traces() {
        let g = triangle();
        let run = || {
            let plan = vec![(t(25), Action::Send(C)), (t(5), Action::Send(B))];
            let config = SimConfig {
                record_trace: true,
                tclock_sources: Some(vec![A]),
                ..Default::default()
            };
            scripted(
                &g,
                vec![plan, vec![(t(0), Action::Register)], vec![]],
                config,
                300,
            )
            .2
            .to_string()
        };
        assert_eq!(run(), run());
    }
}
