//! Fastest broadcast in graphs with periodic edge schedules.

pub mod broadcast;
pub mod intervals;
pub mod learner;
pub mod oracle;
pub mod random;
pub mod segment;
pub mod sim;
pub mod tclocks;
pub mod time;
pub mod tvg;

pub use broadcast::{
    aggregate_to_emitter, build_convergecast_tree, fastest_broadcast, foremost_broadcast,
    Aggregation, BroadcastError, BroadcastOptions, BroadcastTree, FastestBroadcast,
};
pub use learner::{
    run_learners, settle_time, DistanceLearner, LearnOptions, LearnOutcome, LearnerError,
};
pub use oracle::{
    distance_function, distance_functions_from, earliest_arrival, eccentricity_function,
    fastest_journey, foremost_from, level, shortest_journey, temporal_view, OracleError,
};
pub use segment::{
    aggregate, align_tables, decross, MinWindows, Segment, SegmentError, SegmentTable, Trend,
    Window,
};
pub use sim::{Context, Process, SimConfig, SimError, Simulation};
pub use tclocks::{Level, TClockEvent, TClocks, ViewTracker};
pub use time::Time;
pub use tvg::{
    normalize_date, EdgeId, EdgeSpec, Hop, Journey, JourneyMetrics, NodeId, TimeVaryingGraph,
    TvgBuilder, TvgError,
};
