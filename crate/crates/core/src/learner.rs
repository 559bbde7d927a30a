//! Receptor-side inference of the temporal distance table to one emitter,
//! driven by T-Clock notifications over exactly one period.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::segment::{Segment, SegmentError, SegmentTable, Trend};
use crate::sim::{
    Context, HandlerError, HandlerResult, Process, SimConfig, SimError, Simulation, TimerId,
};
use crate::tclocks::{Level, TClockEvent};
use crate::time::Time;
use crate::tvg::{NodeId, TimeVaryingGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnerError {
    #[error("learner has not terminated")]
    NotTerminated,
    #[error("event at {now} arrives after the learning period ended at {end}")]
    PastPeriod { now: Time, end: Time },
    #[error(transparent)]
    Segment(#[from] SegmentError),
}

/// What the learner reacted to.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LearnerInput {
    Snapshot { level: Level },
    SnapshotDate { date: Time, proxy: NodeId },
    LevelChanged { level: Level, proxy: Option<NodeId> },
    DateImproved { date: Time, proxy: NodeId },
    PeriodEnd,
    Watchdog,
}

/// One step taken in response to an input. Dates are shown as computed,
/// before reduction modulo the period.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LearnerAction {
    Start {
        start_d: Time,
        pending: Time,
    },
    Add {
        date: Time,
        value: Time,
        trend: Trend,
    },
    Pending(Time),
    Level(Level),
    Terminate,
}

impl fmt::Display for LearnerAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerAction::Start { start_d, pending } => {
                write!(f, "startD <- {start_d}; pendingED <- {pending}")
            }
            LearnerAction::Add { date, value, trend } => {
                write!(f, "table.add({date}, {value}, {trend})")
            }
            LearnerAction::Pending(d) => write!(f, "pendingED <- {d}"),
            LearnerAction::Level(l) => write!(f, "currentLevel <- {l}"),
            LearnerAction::Terminate => f.write_str("terminate"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceRow {
    pub date: Time,
    pub input: LearnerInput,
    pub actions: Vec<LearnerAction>,
}

impl TraceRow {
    /// `date | event | action` with node names taken from `g`.
    pub fn render(&self, g: &TimeVaryingGraph, emitter: NodeId) -> String {
        let name = |n: Option<NodeId>| n.map_or("none".to_string(), |n| g.name(n).to_string());
        let src = g.name(emitter);
        let event = match &self.input {
            LearnerInput::Snapshot { level } => format!("register: levelChanged({src}, {level})"),
            LearnerInput::SnapshotDate { date, proxy } => {
                format!(
                    "register: dateImproved({src}, {date}, {})",
                    name(Some(*proxy))
                )
            }
            LearnerInput::LevelChanged { level, proxy } => {
                format!("levelChanged({src}, {level}, {})", name(*proxy))
            }
            LearnerInput::DateImproved { date, proxy } => {
                format!("dateImproved({src}, {date}, {})", name(Some(*proxy)))
            }
            LearnerInput::PeriodEnd => "period end".to_string(),
            LearnerInput::Watchdog => "watchdog".to_string(),
        };
        let actions: Vec<String> = self.actions.iter().map(|a| a.to_string()).collect();
        let actions = if actions.is_empty() {
            "-".to_string()
        } else {
            actions.join("; ")
        };
        format!("{} | {} | {}", self.date, event, actions)
    }
}

#[derive(Clone, Debug)]
pub struct DistanceLearner {
    emitter: NodeId,
    period: Time,
    latency: Time,
    entries: Vec<Segment>,
    current_level: Level,
    /// Frozen view reported at registration; floors the first pending date.
    frozen: Option<Time>,
    start_d: Option<Time>,
    pending_ed: Option<Time>,
    done: bool,
    trace: Vec<TraceRow>,
    row: Vec<LearnerAction>,
}

impl DistanceLearner {
    pub fn new(emitter: NodeId, period: Time, latency: Time) -> Self {
        DistanceLearner {
            emitter,
            period,
            latency,
            entries: Vec::new(),
            current_level: Level::Infinite,
            frozen: None,
            start_d: None,
            pending_ed: None,
            done: false,
            trace: Vec::new(),
            row: Vec::new(),
        }
    }

    pub fn emitter(&self) -> NodeId {
        self.emitter
    }

    pub fn start_date(&self) -> Option<Time> {
        self.start_d
    }

    /// Local date at which learning completes, once started.
    pub fn deadline(&self) -> Option<Time> {
        self.start_d.map(|s| s + self.period)
    }

    pub fn is_terminated(&self) -> bool {
        self.done
    }

    pub fn current_level(&self) -> Level {
        self.current_level
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    /// Feeds one T-Clock notification received at local date `now`.
    pub fn on_tclock(&mut self, now: Time, ev: &TClockEvent) -> Result<(), LearnerError> {
        if ev.src() != self.emitter || self.done {
            return Ok(());
        }
        match *ev {
            TClockEvent::LevelChanged {
                level,
                snapshot: true,
                ..
            } => {
                self.current_level = level;
                self.row.push(LearnerAction::Level(level));
                self.flush(now, LearnerInput::Snapshot { level });
                Ok(())
            }
            TClockEvent::LevelChanged { level, proxy, .. } => {
                let r = self.on_level_changed(now, level);
                self.flush(now, LearnerInput::LevelChanged { level, proxy });
                r
            }
            TClockEvent::DateImproved {
                date,
                proxy,
                snapshot: true,
                ..
            } => {
                self.frozen = self.frozen.max(Some(date));
                self.flush(now, LearnerInput::SnapshotDate { date, proxy });
                Ok(())
            }
            TClockEvent::DateImproved { date, proxy, .. } => {
                let r = self.update(now, date);
                self.flush(now, LearnerInput::DateImproved { date, proxy });
                r
            }
        }
    }

    fn on_level_changed(&mut self, now: Time, level: Level) -> Result<(), LearnerError> {
        // the view across the change is the better of the two direct views
        let before = self.current_level.direct_view(now, self.latency);
        let after = level.direct_view(now, self.latency);
        if let Some(ed) = before.max(after) {
            self.update(now, ed)?;
        }
        if !self.done {
            self.current_level = level;
            self.row.push(LearnerAction::Level(level));
        }
        Ok(())
    }

    /// Timer at `startD + p` in case no notification closes the period.
    pub fn on_period_end(&mut self, now: Time) -> Result<(), LearnerError> {
        if self.done || self.deadline() != Some(now) {
            return Ok(());
        }
        self.update_flat(now);
        self.terminate();
        self.flush(now, LearnerInput::PeriodEnd);
        Ok(())
    }

    /// Timer one period after registration: a node that saw no transition for
    /// a whole period at a constant finite level has a constant distance.
    pub fn on_watchdog(&mut self, now: Time) -> Result<(), LearnerError> {
        if self.done || self.start_d.is_some() {
            return Ok(());
        }
        if let Some(k) = self.current_level.hops() {
            let value = self.latency * k as i64;
            self.entries = vec![Segment::new(Time::ZERO, value, Trend::Flat)];
            self.row.push(LearnerAction::Add {
                date: Time::ZERO,
                value,
                trend: Trend::Flat,
            });
            self.start_d = Some(now - self.period);
            self.terminate();
        }
        self.flush(now, LearnerInput::Watchdog);
        Ok(())
    }

    fn terminate(&mut self) {
        self.done = true;
        self.row.push(LearnerAction::Terminate);
    }

    fn flush(&mut self, now: Time, input: LearnerInput) {
        let actions = std::mem::take(&mut self.row);
        self.trace.push(TraceRow {
            date: now,
            input,
            actions,
        });
    }

    fn update(&mut self, now: Time, new_ed: Time) -> Result<(), LearnerError> {
        let Some(start) = self.start_d else {
            let new_ed = self.frozen.map_or(new_ed, |f| f.max(new_ed));
            self.start_d = Some(now);
            self.pending_ed = Some(new_ed);
            self.row.push(LearnerAction::Start {
                start_d: now,
                pending: new_ed,
            });
            return Ok(());
        };
        let end = start + self.period;
        if now > end {
            return Err(LearnerError::PastPeriod { now, end });
        }
        self.update_flat(now);
        self.update_slope(now, new_ed);
        if now == end {
            self.terminate();
        }
        Ok(())
    }

    fn update_flat(&mut self, now: Time) {
        let (Some(pending), Some(best)) = (
            self.pending_ed,
            self.current_level.direct_view(now, self.latency),
        ) else {
            return;
        };
        if best > pending {
            let value = self.latency * self.current_level.hops().unwrap_or(0) as i64;
            self.record(pending, value, Trend::Flat);
            self.set_pending(best);
        }
    }

    fn update_slope(&mut self, now: Time, new_ed: Time) {
        let Some(pending) = self.pending_ed else {
            return;
        };
        if new_ed > pending {
            self.record(pending, now - pending, Trend::Slope);
            self.set_pending(new_ed);
        }
    }

    fn record(&mut self, date: Time, value: Time, trend: Trend) {
        self.row.push(LearnerAction::Add { date, value, trend });
        self.entries
            .push(Segment::new(date.rem_euclid(self.period), value, trend));
    }

    fn set_pending(&mut self, d: Time) {
        self.pending_ed = Some(d);
        self.row.push(LearnerAction::Pending(d));
    }

    /// The learned table, ordered by date modulo the period.
    pub fn finalize(&self) -> Result<SegmentTable, LearnerError> {
        if !self.done {
            return Err(LearnerError::NotTerminated);
        }
        let mut entries = self.entries.clone();
        entries.sort_by_key(|s| s.date);
        Ok(SegmentTable::new(self.period, entries)?)
    }
}

pub(crate) const TAG_REGISTER: u64 = 1;
pub(crate) const TAG_PERIOD_END: u64 = 2;
pub(crate) const TAG_WATCHDOG: u64 = 3;

/// Glue between a learner and the simulator timers: registration, the
/// period-end timer and the watchdog.
#[derive(Clone, Debug)]
pub struct LearnerSlot {
    pub learner: DistanceLearner,
    pub register_at: Time,
    armed: bool,
}

impl LearnerSlot {
    pub fn new(learner: DistanceLearner, register_at: Time) -> Self {
        LearnerSlot {
            learner,
            register_at,
            armed: false,
        }
    }

    pub fn start<M: Clone + fmt::Debug>(&mut self, ctx: &mut Context<'_, M>) -> HandlerResult {
        let at = self.register_at.max(ctx.now());
        ctx.set_timer(at, TAG_REGISTER)?;
        Ok(())
    }

    /// Returns true when the timer belonged to the learner.
    pub fn on_timer<M: Clone + fmt::Debug>(
        &mut self,
        ctx: &mut Context<'_, M>,
        tag: u64,
    ) -> Result<bool, HandlerError> {
        let now = ctx.now();
        match tag {
            TAG_REGISTER => {
                ctx.register_tclocks()?;
                ctx.set_timer(now + ctx.period(), TAG_WATCHDOG)?;
            }
            TAG_PERIOD_END => self.learner.on_period_end(now).map_err(learner_err)?,
            TAG_WATCHDOG => self.learner.on_watchdog(now).map_err(learner_err)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn on_tclock<M: Clone + fmt::Debug>(
        &mut self,
        ctx: &mut Context<'_, M>,
        ev: &TClockEvent,
    ) -> HandlerResult {
        self.learner.on_tclock(ctx.now(), ev).map_err(learner_err)?;
        if !self.armed {
            if let Some(end) = self.learner.deadline() {
                self.armed = true;
                if !self.learner.is_terminated() {
                    ctx.set_timer(end, TAG_PERIOD_END)?;
                }
            }
        }
        Ok(())
    }
}

fn learner_err(e: LearnerError) -> HandlerError {
    HandlerError(e.to_string())
}

/// Simulator process running one learner (or nothing, at the emitter).
#[derive(Clone, Debug)]
pub struct LearnerProcess {
    pub slot: Option<LearnerSlot>,
}

impl Process for LearnerProcess {
    type Msg = ();

    fn on_start(&mut self, ctx: &mut Context<'_, ()>) -> HandlerResult {
        match &mut self.slot {
            Some(s) => s.start(ctx),
            None => Ok(()),
        }
    }

    fn on_timer(&mut self, ctx: &mut Context<'_, ()>, _: TimerId, tag: u64) -> HandlerResult {
        if let Some(s) = &mut self.slot {
            s.on_timer(ctx, tag)?;
        }
        Ok(())
    }

    fn on_tclock(&mut self, ctx: &mut Context<'_, ()>, ev: &TClockEvent) -> HandlerResult {
        match &mut self.slot {
            Some(s) => s.on_tclock(ctx, ev),
            None => Ok(()),
        }
    }
}

/// Default registration date: late enough for every view to be periodic.
pub fn settle_time(g: &TimeVaryingGraph) -> Time {
    g.foremost_bound()
}

#[derive(Clone, Debug, Default)]
pub struct LearnOptions {
    /// Local registration date per node; missing nodes use `settle_time`.
    pub register_at: BTreeMap<NodeId, Time>,
    pub offsets: BTreeMap<NodeId, Time>,
    /// Global end of the run; defaults to three periods after the latest
    /// registration.
    pub until: Option<Time>,
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub node: NodeId,
    pub learner: DistanceLearner,
}

impl LearnOutcome {
    pub fn table(&self) -> Result<SegmentTable, LearnerError> {
        self.learner.finalize()
    }
}

/// Runs learners at `nodes` for `emitter` in one simulation.
pub fn run_learners(
    g: &TimeVaryingGraph,
    emitter: NodeId,
    nodes: &[NodeId],
    opts: &LearnOptions,
) -> Result<Vec<LearnOutcome>, SimError> {
    let settle = settle_time(g);
    let mut latest = Time::ZERO;
    let procs: Vec<LearnerProcess> = g
        .nodes()
        .map(|v| {
            if v == emitter || !nodes.contains(&v) {
                return LearnerProcess { slot: None };
            }
            let offset = opts.offsets.get(&v).copied().unwrap_or(Time::ZERO);
            let at = opts.register_at.get(&v).copied().unwrap_or(settle + offset);
            latest = latest.max(at - offset);
            LearnerProcess {
                slot: Some(LearnerSlot::new(
                    DistanceLearner::new(emitter, g.period(), g.latency()),
                    at,
                )),
            }
        })
        .collect();
    let until = opts.until.unwrap_or(latest + g.period() * 3);
    let config = SimConfig {
        offsets: opts.offsets.clone(),
        tclock_sources: Some(vec![emitter]),
        record_trace: false,
    };
    let mut sim = Simulation::new(g, procs, config);
    sim.run(until)?;
    Ok(sim
        .into_processes()
        .into_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            p.slot.map(|s| LearnOutcome {
                node: NodeId(i),
                learner: s.learner,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::distance_function;
    use crate::segment::tests::{dist_a_b, dist_a_c};
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

    fn learn(g: &TimeVaryingGraph, node: NodeId, at: Time) -> DistanceLearner {
        let opts = LearnOptions {
            register_at: [(node, at)].into_iter().collect(),
            ..Default::default()
        };
        let mut out = run_learners(g, A, &[node], &opts).unwrap();
        out.pop().unwrap().learner
    }

    #[test]
    fn trace_at_c_registered_at_50() {
        let g = triangle();
        let l = learn(&g, C, t(50));
        let rows: Vec<String> = l.trace().iter().map(|r| r.render(&g, A)).collect();
        assert_eq!(
            rows,
            vec![
                "50 | register: levelChanged(a, 1) | currentLevel <- 1",
                "60 | levelChanged(a, +inf, none) | startD <- 60; pendingED <- 59; currentLevel <- +inf",
                "111 | levelChanged(a, 2, b) | table.add(59, 52, slope); pendingED <- 109; currentLevel <- 2",
                "121 | levelChanged(a, 1, a) | table.add(109, 2, flat); pendingED <- 119; \
                 table.add(119, 2, slope); pendingED <- 120; currentLevel <- 1",
                "160 | levelChanged(a, +inf, none) | table.add(120, 1, flat); pendingED <- 159; terminate",
            ]
        );
        assert_eq!(l.finalize().unwrap(), dist_a_c());
    }

    #[test]
    fn table_at_b_after_settling() {
        let g = triangle();
        let l = learn(&g, B, settle_time(&g));
        assert_eq!(l.start_date(), Some(t(230)));
        assert_eq!(l.finalize().unwrap(), dist_a_b());
    }

    #[test]
    fn registration_phase_does_not_matter() {
        let g = triangle();
        for node in [B, C] {
            let expected = distance_function(&g, A, node).unwrap();
            for at in [202, 215, 229, 230, 231, 250, 259, 260, 271, 288, 301] {
                let table = learn(&g, node, t(at)).finalize().unwrap();
                assert!(
                    table.same_function(&expected),
                    "node {node:?} at {at}: {table:?}"
                );
            }
        }
    }

    #[test]
    fn unfinished_learner_has_no_table() {
        let l = DistanceLearner::new(A, t(10), t(1));
        assert_eq!(l.finalize(), Err(LearnerError::NotTerminated));
    }

    #[test]
    fn permanent_edge_uses_watchdog() {
        let g = TvgBuilder::new(t(10), t(1))
            .node("a")
            .node("b")
            .edge("a", "b", &[(0, 10)])
            .build()
            .unwrap();
        let l = learn(&g, B, t(3));
        let table = l.finalize().unwrap();
        assert_eq!(table.entries(), &[Segment::new(0, 1, Trend::Flat)]);
        assert!(matches!(
            l.trace().last().unwrap().input,
            LearnerInput::Watchdog
        ));
    }

    #[test]
    fn registration_during_a_frozen_view() {
        // at 11/2 the view of a at c is frozen at 4; the chain through d that
        // delivers from 6 on only sees date 3
        let g = TvgBuilder::new(t(20), t(1))
            .node("a")
            .node("b")
            .node("c")
            .node("d")
            .edge("a", "b", &[(0, 20)])
            .edge("a", "c", &[(0, 5)])
            .edge("b", "d", &[(0, 20)])
            .edge("c", "d", &[(5, 15)])
            .build()
            .unwrap();
        let l = learn(&g, C, Time::new(11, 2));
        assert!(matches!(
            l.trace()[0].input,
            LearnerInput::SnapshotDate { .. }
        ));
        let want = distance_function(&g, A, C).unwrap();
        assert!(l.finalize().unwrap().same_function(&want));
    }

    #[test]
    fn offsets_shift_local_dates_only() {
        let g = triangle();
        let opts = LearnOptions {
            register_at: [(C, t(57))].into_iter().collect(),
            offsets: [(C, t(7))].into_iter().collect(),
            ..Default::default()
        };
        let l = run_learners(&g, A, &[C], &opts)
            .unwrap()
            .pop()
            .unwrap()
            .learner;
        assert_eq!(l.start_date(), Some(t(67)));
        assert!(l
            .finalize()
            .unwrap()
            .same_function(&dist_a_c().shifted(t(7))));
    }
}
