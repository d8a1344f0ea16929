//! Acceptance matrix. Prints one PASS/FAIL line per criterion, then fails
//! the test if any criterion failed. Every tolerance is pinned below.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use semialg::certificates::{default_suite, SuiteConfig, Status};
use semialg::extremal::{
    count_equilateral_bruteforce, count_equilateral_triangles, count_unit_distances, count_unit_distances_bruteforce,
    distance_histogram, turan_extract, zarankiewicz_sweep, SweepFamily, TuranConfig,
};
use semialg::hypergraph::families::{
    grid, grid_points, random_points, random_polynomial, random_predicate_instance, StripesConfig,
};
use semialg::hypergraph::BlowupConfig;
use semialg::partition::{build_partition, crossing_stats, PartitionParams};
use semialg::ramsey::tester::{dense_unit_disk, grid_unit_distance, planted_multipartite, split_bipartite, threshold_graph};
use semialg::ramsey::{
    build_hard_instance, clique_or_is_in_graph, desk_query_budget, extract_cograph, test_h_freeness,
    triangle_far_certificate, CographConfig, Host, Pattern, TesterConfig,
};
use semialg::rational::{int, ratio, to_f64};
use semialg::regularity::{regularize, ARule, RegularityRequest};
use semialg::{Formula, PartiteHypergraph, Polynomial, Rational, SignPredicate, SignSet};

/// Constant of `A = ceil(c * D / eps)` for the one-dimensional matrix.
const REGULARITY_C: f64 = 2.0;
const REGULARITY_CELL_LIMIT: Duration = Duration::from_secs(30);
/// Cell count, top cell size and cutter degree are all bounded with this constant.
const PARTITION_C: f64 = 16.0;
/// Allowed deviation of a measured constant from its mean across seeds.
const STABILITY: f64 = 0.20;
const SUITE_LIMIT: Duration = Duration::from_secs(300);
const EXPONENT_MAX: f64 = 1.48;
const CERTIFY_LIMIT: usize = 200;
const TESTER_EPS: (i64, i64) = (1, 10);
/// Desk constant of the tester query budget, and a cap on queries per trial.
const DESK_C: f64 = 1e-4;
const QUERY_CAP: usize = 3000;
const REJECTION_MIN: f64 = 2.0 / 3.0;
const CROSSING_C: i64 = 4;

struct Check {
    ok: bool,
    detail: String,
}

type Outcome = Result<Check, String>;

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Ok(Check { ok, detail: detail.into() })
}

fn e(err: semialg::Error) -> String {
    err.to_string()
}

fn single_worker<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn c1_regularity_1d() -> Outcome {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut ok = true;
    let mut bad = Vec::new();
    for big_d in [2, 4, 8] {
        for eps in [ratio(1, 4), ratio(1, 10)] {
            let h = StripesConfig::new(big_d, 1, 2000).map_err(e)?.hypergraph().map_err(e)?;
            let mut req = RegularityRequest::new(eps.clone());
            req.a_rule = ARule::Auto { c: REGULARITY_C };
            let t = Instant::now();
            let r = single_worker(|| regularize(&h, &req)).map_err(e)?;
            let took = t.elapsed();
            slowest = slowest.max(took);
            let part_limit = 2.0 * REGULARITY_C * big_d as f64 / to_f64(&eps);
            let parts = *r.part_counts.iter().max().unwrap_or(&0);
            let cell_ok =
                r.homogeneity.error <= eps && parts as f64 <= part_limit && took < REGULARITY_CELL_LIMIT;
            worst = worst.max(to_f64(&r.homogeneity.error) / to_f64(&eps));
            if !cell_ok {
                ok = false;
                bad.push(format!("D={big_d} eps={eps} error={} parts={parts}", r.homogeneity.error));
            }
        }
    }
    check(ok, format!("c={REGULARITY_C}, worst error/eps {worst:.3}, slowest cell {slowest:.2?} {bad:?}"))
}

fn c2_obliviousness() -> Outcome {
    let mut compared = 0;
    for d in [1usize, 2] {
        let p = random_points(300, d, 512, 11).map_err(e)?;
        let q = random_points(300, d, 512, 12).map_err(e)?;
        let arity = 2 * d;
        let g1 = random_polynomial(arity, 3, 1).map_err(e)?;
        let g2 = random_polynomial(arity, 3, 2).map_err(e)?;
        let mk = |g: Polynomial, f: SignSet| -> semialg::Result<PartiteHypergraph> {
            PartiteHypergraph::new(vec![p.clone(), q.clone()], SignPredicate::new(vec![g], Formula::atom(0, f))?)
        };
        let h1 = mk(g1, SignSet::NONNEG).map_err(e)?;
        let h2 = mk(g2, SignSet::ZERO).map_err(e)?;
        if h1.predicate == h2.predicate || h1.total_degree() != h2.total_degree() {
            return check(false, "predicates are not distinct with equal degree");
        }
        let params = PartitionParams::new(int(6)).with_seed(5);
        for (a, b) in h1.parts.iter().zip(&h2.parts) {
            let x = build_partition(a, &params).map_err(e)?.dump_json();
            let y = build_partition(b, &params).map_err(e)?.dump_json();
            if x != y {
                return check(false, format!("d={d}: partition dumps differ"));
            }
            compared += 1;
        }
        let mut req = RegularityRequest::new(ratio(1, 4));
        req.a_rule = ARule::Explicit { a: int(6) };
        let r1 = regularize(&h1, &req).map_err(e)?;
        let r2 = regularize(&h2, &req).map_err(e)?;
        if r1.partitions != r2.partitions {
            return check(false, format!("d={d}: regularity partitions differ"));
        }
    }
    check(true, format!("{compared} partition dumps byte-identical across predicates"))
}

fn c3_partitioner_2d() -> Outcome {
    let grid64 = grid_points(2, 64, 0).map_err(e)?;
    let random = random_points(4096, 2, 1024, 3).map_err(e)?;
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, p) in [("grid", &grid64), ("random", &random)] {
        for a in [2i64, 4, 8] {
            let af = a as f64;
            let mut consts: Vec<[f64; 3]> = Vec::new();
            for seed in 0..5 {
                let c = build_partition(p, &PartitionParams::new(int(a)).with_seed(seed)).map_err(e)?;
                c.check_invariants().map_err(e)?;
                let r = &c.report;
                let within = r.cells as f64 <= PARTITION_C * af * af
                    && r.max_top_cell as f64 <= PARTITION_C * p.len() as f64 / (af * af)
                    && r.total_degree as f64 <= PARTITION_C * af;
                if !within {
                    ok = false;
                    notes.push(format!("{name} A={a} seed={seed} out of bounds"));
                }
                consts.push([r.cell_constant, r.size_constant, r.degree_constant]);
            }
            let mut spread = 0.0f64;
            for j in 0..3 {
                let mean = consts.iter().map(|c| c[j]).sum::<f64>() / consts.len() as f64;
                for c in &consts {
                    spread = spread.max((c[j] - mean).abs() / mean.max(f64::MIN_POSITIVE));
                }
            }
            if spread > STABILITY {
                ok = false;
            }
            let m = &consts[0];
            notes.push(format!("{name} A={a}: ({:.2},{:.2},{:.2}) spread {:.3}", m[0], m[1], m[2], spread));
        }
    }
    check(ok, notes.join("; "))
}

fn c4_certificates() -> Outcome {
    let t = Instant::now();
    let verdicts = default_suite(&SuiteConfig::default()).map_err(e)?;
    let took = t.elapsed();
    let fail = verdicts.iter().filter(|v| v.status == Status::Fail || !v.consistent()).count();
    let na = verdicts.iter().filter(|v| v.status == Status::NotApplicable).count();
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    for v in &verdicts {
        *kinds.entry(v.name.as_str()).or_default() += 1;
    }
    check(
        fail == 0 && na == 0 && took < SUITE_LIMIT,
        format!("{} verdicts {kinds:?}, {fail} failed, {na} not applicable, {took:.2?}", verdicts.len()),
    )
}

fn c5_turan() -> Outcome {
    let mut ok = true;
    let mut min_t = f64::INFINITY;
    let mut min_s = f64::INFINITY;
    for seed in 0..20u64 {
        let d = 1 + (seed % 2) as usize;
        let k = 2 + ((seed / 2) % 2) as usize;
        let n = if k == 2 { 40 } else { 16 };
        let h = random_predicate_instance(d, k, n, 64, 2, seed).map_err(e)?;
        let edges = h.oracle().map_err(e)?.count_edges();
        if edges == 0 {
            return check(false, format!("seed {seed} has no edges"));
        }
        let eps = Rational::new(edges.into(), h.tuple_count().into());
        let ell = k - 1;
        let r = turan_extract(&h, &eps, ell, &TuranConfig::default()).map_err(e)?;
        let ef = to_f64(&eps);
        let t_margin = r.t_ratio / (ef / 3.0);
        min_t = min_t.min(t_margin);
        ok &= r.verified && t_margin >= 1.0;
        if d == 1 {
            let floor = ef / h.total_degree().max(1) as f64 / 8.0;
            for s in &r.s_ratios {
                min_s = min_s.min(s / floor);
                ok &= *s >= floor;
            }
        }
    }
    check(ok, format!("20 instances verified, min |T| margin {min_t:.2}, min |S_i| margin (d=1) {min_s:.2}"))
}

fn c6_zarankiewicz() -> Outcome {
    let pl = zarankiewicz_sweep(SweepFamily::PointLine, &[32, 64, 128, 256], 2, usize::MAX).map_err(e)?;
    let pl_ok = (1.0..=EXPONENT_MAX).contains(&pl.exponent) && pl.all_free;
    let ladder: Vec<usize> = (8..=32).step_by(4).map(|s| s * s).collect();
    let ud = zarankiewicz_sweep(SweepFamily::UnitDistanceGrid, &ladder, 3, CERTIFY_LIMIT).map_err(e)?;
    let flags_ok = ud.rows.iter().all(|r| {
        if r.n <= CERTIFY_LIMIT as f64 {
            r.verdict == "free"
        } else {
            r.verdict == "unknown"
        }
    });
    let ud_ok = ud.exponent <= EXPONENT_MAX && flags_ok;
    let certified = ud.rows.iter().filter(|r| r.verdict == "free").count();
    check(
        pl_ok && ud_ok,
        format!(
            "point-line exponent {:.3} all free {}; unit-distance exponent {:.3}, {certified} certified, {} flagged unknown",
            pl.exponent,
            pl.all_free,
            ud.exponent,
            ud.rows.len() - certified
        ),
    )
}

fn c7_geometry_oracles() -> Outcome {
    let g3 = grid_points(2, 3, 0).map_err(e)?;
    let unit3 = count_unit_distances(&g3, &int(1)).map_err(e)?;
    let mut equilateral_max = 0;
    for s in 2..=12 {
        equilateral_max = equilateral_max.max(count_equilateral_triangles(&grid_points(2, s, 0).map_err(e)?).map_err(e)?);
    }
    let mut mismatches = 0;
    let mut compared = 0;

    // every squared distance of a 17 x 17 grid, against the rational reference
    let g17 = grid_points(2, 17, 0).map_err(e)?;
    for (sq, count) in distance_histogram(&g17) {
        let fast = count_unit_distances(&g17, &sq).map_err(e)?;
        let slow = count_unit_distances_bruteforce(&g17, &sq);
        mismatches += (fast != count || fast != slow) as usize;
        compared += 1;
    }
    mismatches += (count_equilateral_triangles(&g17).map_err(e)? != count_equilateral_bruteforce(&g17)) as usize;

    // random rational points: the whole histogram, and the most frequent distances
    let r = random_points(300, 2, 97, 4).map_err(e)?;
    let hist = distance_histogram(&r);
    let mut reference: BTreeMap<Rational, u64> = BTreeMap::new();
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            let d2: Rational = r.point(i).iter().zip(r.point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            *reference.entry(d2).or_default() += 1;
        }
    }
    mismatches += (hist != reference.into_iter().collect::<Vec<_>>()) as usize;
    let mut by_count = hist.clone();
    by_count.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    for (sq, count) in by_count.iter().take(40) {
        let fast = count_unit_distances(&r, sq).map_err(e)?;
        mismatches += (fast != *count || fast != count_unit_distances_bruteforce(&r, sq)) as usize;
        compared += 1;
    }
    mismatches += (count_equilateral_triangles(&r).map_err(e)? != count_equilateral_bruteforce(&r)) as usize;

    check(
        unit3 == 12 && equilateral_max == 0 && mismatches == 0,
        format!("3x3 unit distances {unit3}, equilateral max {equilateral_max}, {compared} counts compared, {mismatches} mismatches"),
    )
}

fn c8_cograph() -> Outcome {
    let cases = [
        ("grid N=64", grid(2, 8).map_err(e)?),
        ("grid N=256", grid(2, 16).map_err(e)?),
        ("stripes N=64", StripesConfig::new(4, 1, 64).map_err(e)?.symmetric_hypergraph().map_err(e)?),
        ("stripes N=256", StripesConfig::new(4, 1, 256).map_err(e)?.symmetric_hypergraph().map_err(e)?),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, h) in &cases {
        let n = h.parts[0].len();
        let cert = extract_cograph(h, &CographConfig::default()).map_err(e)?;
        let oracle = h.oracle().map_err(e)?;
        let adj = |u: usize, v: usize| u != v && oracle.is_edge(&[u, v]);
        let mismatches = cert.mismatches(adj).map_err(e)?;
        let (kind, set) = clique_or_is_in_graph(h, &cert).map_err(e)?;
        let want_clique = matches!(kind, semialg::ramsey::SetKind::Clique);
        let mut set_errors = 0;
        for (i, &u) in set.iter().enumerate() {
            for &v in &set[i + 1..] {
                set_errors += (adj(u, v) != want_clique) as usize;
            }
        }
        let sqrt_bound = (cert.len() as f64).sqrt().ceil() as usize;
        let log_bound = (n as f64).log2().floor() as usize / 2;
        let pass = mismatches == 0 && set_errors == 0 && set.len() >= sqrt_bound && set.len() >= log_bound;
        ok &= pass;
        notes.push(format!("{name}: certificate {}, {kind:?} {}", cert.len(), set.len()));
    }
    check(ok, notes.join("; "))
}

fn c9_hard_instance() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (t, k, r) in [(2, 1, 2), (3, 1, 2), (2, 2, 1)] {
        let (_, a) = build_hard_instance(&BlowupConfig::new(t, k, r, 7).map_err(e)?).map_err(e)?;
        ok &= a.pairs_exhaustive && a.passed() && a.quadruples_checked > 0;
        notes.push(format!(
            "({t},{k},{r}): {} pairs, {} mismatches, {} quadruples, {} violations",
            a.pairs_checked, a.pair_mismatches, a.quadruples_checked, a.quadruple_violations
        ));
    }
    check(ok, notes.join("; "))
}

fn tester_cfg(host: &Host, trials: usize, seed: u64) -> TesterConfig {
    let eps = ratio(TESTER_EPS.0, TESTER_EPS.1);
    let pattern = Pattern::triangle();
    let queries = desk_query_budget(host.dim(), host.total_degree(), pattern.n(), to_f64(&eps), DESK_C).min(QUERY_CAP);
    TesterConfig { pattern, eps, trials, queries, seed }
}

fn c10_tester() -> Outcome {
    let free = [
        ("split bipartite", split_bipartite(120, 1).map_err(e)?),
        ("grid unit distance", grid_unit_distance(10).map_err(e)?),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, host) in &free {
        let rep = test_h_freeness(host, &tester_cfg(host, 500, 3)).map_err(e)?;
        ok &= rep.acceptance_rate == 1.0 && rep.verdicts.len() == 500;
        notes.push(format!("{name} acceptance {}", rep.acceptance_rate));
    }
    let far = [
        ("planted 5-partite", planted_multipartite(100).map_err(e)?),
        ("dense unit disk", dense_unit_disk(100, 2).map_err(e)?),
        ("threshold", threshold_graph(100, 3).map_err(e)?),
    ];
    let eps = ratio(TESTER_EPS.0, TESTER_EPS.1);
    for (name, host) in &far {
        let cert = triangle_far_certificate(host).map_err(e)?;
        let cfg = tester_cfg(host, 200, 4);
        let rep = test_h_freeness(host, &cfg).map_err(e)?;
        ok &= cert.certified_eps >= eps && rep.rejection_rate >= REJECTION_MIN && rep.verdicts.len() == 200;
        notes.push(format!(
            "{name} far by {} with {} queries, rejection {}",
            cert.certified_eps, cfg.queries, rep.rejection_rate
        ));
    }
    check(ok, notes.join("; "))
}

fn c11_crossing() -> Outcome {
    let p = random_points(400, 1, 4096, 21).map_err(e)?;
    let q = random_points(400, 1, 4096, 22).map_err(e)?;
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut trials = 0;
    for a in [10i64, 20, 40] {
        let params = PartitionParams::new(int(a));
        let cp = build_partition(&p, &params).map_err(e)?;
        let cq = build_partition(&q, &params).map_err(e)?;
        for t in 0..10u64 {
            let big_d = 1 + (t % 8) as u32;
            let g = random_polynomial(2, big_d, 100 * a as u64 + t).map_err(e)?;
            let g = &g - &Polynomial::constant(2, g.eval(&[ratio(1, 2), ratio(1, 2)]).map_err(e)?);
            let s = crossing_stats(&[&cp, &cq], &[&p, &q], &g).map_err(e)?;
            let bound = ratio(CROSSING_C * big_d as i64, a);
            worst = worst.max(to_f64(&s.weighted) / to_f64(&bound));
            ok &= s.weighted <= bound;
            trials += 1;
        }
    }
    check(ok, format!("{trials} trials, worst mass / (4D/A) = {worst:.3}"))
}

// Custom harness so the per-criterion lines always reach the test log.
fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("one-dimensional regularity", c1_regularity_1d),
        ("obliviousness", c2_obliviousness),
        ("two-dimensional partitioner contracts", c3_partitioner_2d),
        ("certificate suite", c4_certificates),
        ("Turán extraction", c5_turan),
        ("Zarankiewicz shape", c6_zarankiewicz),
        ("unit-distance and equilateral oracles", c7_geometry_oracles),
        ("cograph extraction", c8_cograph),
        ("hard instance audit", c9_hard_instance),
        ("property tester", c10_tester),
        ("crossing instrumentation", c11_crossing),
    ];
    let total = criteria.len();
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".to_string()));
        let (ok, detail) = match outcome {
            Ok(c) => (c.ok, c.detail),
            Err(msg) => (false, format!("error: {msg}")),
        };
        println!("{} criterion {:>2} {name} [{:.1?}]: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1, t.elapsed());
        if !ok {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all {total} criteria passed");
}
