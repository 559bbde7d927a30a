//! Seeded generators for random periodic graphs and dates.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::time::Time;
use crate::tvg::{TimeVaryingGraph, TvgError};

#[derive(Clone, Debug)]
pub struct CorpusParams {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub max_intervals: usize,
    pub min_period: i64,
    pub max_period: i64,
    pub latencies: Vec<Time>,
    /// Chance of each non-tree pair becoming an edge.
    pub extra_edge_prob: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            min_nodes: 3,
            max_nodes: 6,
            max_intervals: 3,
            min_period: 10,
            max_period: 50,
            latencies: vec![Time::ONE, Time::new(1, 2)],
            extra_edge_prob: 0.35,
        }
    }
}

pub fn node_name(i: usize) -> String {
    let mut s = String::new();
    let mut i = i;
    loop {
        s.insert(0, (b'a' + (i % 26) as u8) as char);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s
}

/// A graph whose underlying graph is connected and whose edges all have
/// 1 to `max_intervals` integer intervals, each at least one unit long, so
/// every edge is traversable in every period.
pub fn random_tvg<R: Rng>(
    rng: &mut R,
    params: &CorpusParams,
) -> Result<TimeVaryingGraph, TvgError> {
    let n = rng.gen_range(params.min_nodes..=params.max_nodes);
    let p = rng.gen_range(params.min_period..=params.max_period);
    let z = *params.latencies.choose(rng).expect("at least one latency");
    let names: Vec<String> = (0..n).map(node_name).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        pairs.push((order[i].min(order[j]), order[i].max(order[j])));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !pairs.contains(&(a, b)) && rng.gen_bool(params.extra_edge_prob) {
                pairs.push((a, b));
            }
        }
    }
    pairs.sort();

    let edges = pairs
        .into_iter()
        .map(|(a, b)| {
            let k = rng.gen_range(1..=params.max_intervals);
            (
                names[a].clone(),
                names[b].clone(),
                random_intervals(rng, p, k),
            )
        })
        .collect();
    TimeVaryingGraph::new(Time::from_int(p), z, names, edges)
}

/// Up to `k` disjoint, non-touching integer intervals in `[0, p)`.
fn random_intervals<R: Rng>(rng: &mut R, p: i64, k: usize) -> Vec<(Time, Time)> {
    let k = k.min((p as usize).div_ceil(2)).max(1);
    let mut points = rand::seq::index::sample(rng, p as usize + 1, 2 * k).into_vec();
    points.sort();
    points
        .chunks(2)
        .map(|c| (Time::from_int(c[0] as i64), Time::from_int(c[1] as i64)))
        .collect()
}

/// `count` graphs from a fixed seed.
pub fn corpus(seed: u64, count: usize, params: &CorpusParams) -> Vec<TimeVaryingGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_tvg(&mut rng, params).expect("generated graphs are valid"))
        .collect()
}

/// Uniform rational date in `[lo, hi)` with denominator `den`.
pub fn random_date<R: Rng>(rng: &mut R, lo: Time, hi: Time, den: i64) -> Time {
    let steps = ((hi - lo) * den).div_floor(Time::ONE).max(1);
    lo + Time::new(rng.gen_range(0..steps), den)
}
