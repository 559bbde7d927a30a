//! Graphs shared by the benchmarks.

use tvgcast::random::{corpus, CorpusParams};
use tvgcast::{Time, TimeVaryingGraph, TvgBuilder};

pub fn triangle() -> TimeVaryingGraph {
    TvgBuilder::new(Time::from_int(100), Time::ONE)
        .node("a")
        .node("b")
        .node("c")
        .edge("a", "b", &[(0, 30)])
        .edge("a", "c", &[(20, 60)])
        .edge("b", "c", &[(10, 40), (70, 80)])
        .build()
        .expect("valid schedule")
}

/// A few random graphs at the large end of the generator's range.
pub fn large_graphs() -> Vec<TimeVaryingGraph> {
    let params = CorpusParams {
        min_nodes: 6,
        max_nodes: 6,
        ..CorpusParams::default()
    };
    corpus(11, 4, &params)
}
