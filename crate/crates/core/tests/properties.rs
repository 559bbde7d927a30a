use proptest::prelude::*;

use tvgcast::oracle::{distance_function, earliest_arrival, eccentricity_function};
use tvgcast::random::{random_tvg, CorpusParams};
use tvgcast::{aggregate, NodeId, Segment, SegmentTable, Time, TimeVaryingGraph, Trend};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const P: i64 = 24;

fn table_strategy() -> impl Strategy<Value = SegmentTable> {
    prop::collection::btree_map(0i64..P * 2, (1i64..P * 4, any::<bool>()), 1..6).prop_filter_map(
        "valid table",
        |rows| {
            let mut rows: Vec<Segment> = rows
                .into_iter()
                .map(|(d, (v, slope))| {
                    let trend = if slope { Trend::Slope } else { Trend::Flat };
                    Segment::new(Time::new(d, 2), Time::new(v, 2), trend)
                })
                .collect();
            if rows[0].date != Time::ZERO {
                rows.insert(
                    0,
                    Segment::new(Time::ZERO, Time::new(P * 4, 2), Trend::Flat),
                );
            }
            SegmentTable::new(Time::from_int(P), rows).ok()
        },
    )
}

fn graph_strategy() -> impl Strategy<Value = TimeVaryingGraph> {
    any::<u64>().prop_map(|seed| {
        random_tvg(
            &mut ChaCha8Rng::seed_from_u64(seed),
            &CorpusParams::default(),
        )
        .expect("generator yields valid graphs")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn aggregate_is_pointwise_max(a in table_strategy(), b in table_strategy(), k in 0i64..(P * 96)) {
        let m = aggregate(&a, &b).unwrap();
        let t = Time::new(k, 96);
        prop_assert_eq!(m.eval_at(t).unwrap(), a.eval_at(t).unwrap().max(b.eval_at(t).unwrap()));
    }

    #[test]
    fn aggregate_commutes(a in table_strategy(), b in table_strategy()) {
        let ab = aggregate(&a, &b).unwrap();
        let ba = aggregate(&b, &a).unwrap();
        prop_assert_eq!(ab.normal_form(), ba.normal_form());
    }

    #[test]
    fn distance_table_matches_direct_search(g in graph_strategy(), k in 0i64..100_000) {
        let t = Time::new(k, 997).rem_euclid(g.period());
        let u = NodeId(0);
        for v in g.nodes().filter(|&v| v != u) {
            let table = distance_function(&g, u, v).unwrap();
            let arrival = earliest_arrival(&g, u, v, t).unwrap().unwrap();
            prop_assert_eq!(table.eval_at(t).unwrap(), arrival - t);
        }
    }

    #[test]
    fn eccentricity_is_max_of_distances(g in graph_strategy(), k in 0i64..100_000) {
        let t = Time::new(k, 991).rem_euclid(g.period());
        let u = NodeId(0);
        let ecc = eccentricity_function(&g, u).unwrap();
        let worst = g
            .nodes()
            .filter(|&v| v != u)
            .map(|v| earliest_arrival(&g, u, v, t).unwrap().unwrap() - t)
            .max()
            .unwrap();
        prop_assert_eq!(ecc.eval_at(t).unwrap(), worst);
    }
}
