//! Seeded randomized cross-checks of fast paths against reference
//! implementations, runnable from the command line.

use serde::Serialize;

use semialg::extremal::{contains_biclique, contains_biclique_naive, count_unit_distances, count_unit_distances_bruteforce, distance_histogram, DEFAULT_NODE_BUDGET};
use semialg::hypergraph::families::{random_points, random_predicate_instance};
use semialg::partition::{build_partition, PartitionParams};
use semialg::rational::ratio;
use semialg::regularity::{homogeneity_error, homogeneity_error_naive, oblivious_parts, TupleMode};
use semialg::util::sub_seed;
use semialg::{Error, PointSet};

pub const NAMES: &[&str] = &[
    "homogeneity_matches_reference",
    "partition_invariants",
    "biclique_matches_reference",
    "unit_distance_matches_reference",
    "points_round_trip",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Seed of the first failing case, to rerun it alone.
    pub first_failure: Option<u64>,
}

/// Small integer in `lo..=hi` drawn from a case seed.
fn pick(seed: u64, label: u64, lo: u64, hi: u64) -> u64 {
    lo + sub_seed(seed, label) % (hi - lo + 1)
}

fn case(name: &str, s: u64) -> semialg::Result<bool> {
    match name {
        "homogeneity_matches_reference" => {
            let d = pick(s, 1, 1, 2) as usize;
            let k = pick(s, 2, 2, 3) as usize;
            let n = pick(s, 3, 4, 10) as usize;
            let h = random_predicate_instance(d, k, n, 64, pick(s, 4, 1, 3) as u32, s)?;
            let a = ratio(pick(s, 5, 1, 4) as i64, 1);
            let parts = h
                .parts
                .iter()
                .map(|p| oblivious_parts(p, &a, &Default::default()))
                .collect::<semialg::Result<Vec<_>>>()?;
            Ok(homogeneity_error(&h, &parts, TupleMode::All)? == homogeneity_error_naive(&h, &parts, TupleMode::All)?)
        }
        "partition_invariants" => {
            let d = pick(s, 1, 1, 3) as usize;
            let p = random_points(pick(s, 2, 1, 80) as usize, d, 128, s)?;
            let c = build_partition(&p, &PartitionParams::new(ratio(pick(s, 3, 1, 6) as i64, 1)).with_seed(s))?;
            Ok(c.check_invariants().is_ok() && c.assignment.len() == p.len())
        }
        "biclique_matches_reference" => {
            let h = random_predicate_instance(1, 2, pick(s, 1, 3, 7) as usize, 64, 2, s)?;
            let u = pick(s, 2, 1, 3) as usize;
            let fast = contains_biclique(&h, u, DEFAULT_NODE_BUDGET)?;
            Ok(fast.label() != "unknown" && fast.is_free() == !contains_biclique_naive(&h, u)?)
        }
        "unit_distance_matches_reference" => {
            let p = random_points(pick(s, 1, 2, 40) as usize, 2, pick(s, 2, 7, 12) as i64, s)?;
            Ok(distance_histogram(&p)
                .iter()
                .try_fold(true, |ok, (sq, c)| {
                    let fast = count_unit_distances(&p, sq)?;
                    Ok::<_, Error>(ok && fast == *c && fast == count_unit_distances_bruteforce(&p, sq))
                })?)
        }
        "points_round_trip" => {
            let p = random_points(pick(s, 1, 0, 30) as usize, pick(s, 2, 1, 4) as usize, 64, s)?;
            Ok(PointSet::from_csv(&p.to_csv())?.points == p.points)
        }
        other => Err(Error::Input(format!("unknown property {other:?}"))),
    }
}

pub fn run(cases: usize, seed: u64, only: Option<&[String]>) -> semialg::Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    for (i, name) in NAMES.iter().enumerate() {
        if only.is_some_and(|o| !o.iter().any(|x| x == name)) {
            continue;
        }
        let mut failures = 0;
        let mut first_failure = None;
        for c in 0..cases {
            let s = sub_seed(seed, (i as u64) << 32 | c as u64);
            if !case(name, s)? {
                failures += 1;
                first_failure.get_or_insert(s);
            }
        }
        out.push(PropertyResult { name: name.to_string(), cases, failures, first_failure });
    }
    Ok(out)
}
