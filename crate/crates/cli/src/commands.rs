use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use semialg::certificates::{default_suite, CertificateVerdict, Status, SuiteConfig};
use semialg::extremal::{
    count_equilateral_bruteforce, count_equilateral_triangles, count_unit_distances, count_unit_distances_bruteforce,
    distance_histogram, sweep_unit_distance, turan_extract, zarankiewicz_sweep, SweepFamily, TuranConfig,
};
use semialg::hypergraph::{generate, BlowupConfig, Family, PointSource, DEFAULT_TUPLE_BUDGET};
use semialg::partition::{build_partition, PartitionParams, SearchBudget};
use semialg::ramsey::tester::{dense_unit_disk, grid_unit_distance, planted_multipartite, split_bipartite, threshold_graph};
use semialg::ramsey::{
    build_hard_instance, clique_or_is_in_graph, desk_query_budget, extract_cograph, test_h_freeness,
    triangle_far_certificate, CographConfig, Host, Pattern, TesterConfig,
};
use semialg::rational::{format_rational, to_f64};
use semialg::regularity::{regularize, ARule, RegularityRequest, TupleMode};
use semialg::{Error, PartiteHypergraph, PointSet, Rational};

use crate::fields::Fields;
use crate::proptests;

pub const COMMANDS: &[&str] = &[
    "partition",
    "regularity",
    "turan",
    "zarankiewicz",
    "unitdist",
    "equilateral",
    "ramsey",
    "hardinstance",
    "proptest",
    "certificates",
    "sweep",
];

pub const SUITE_NAME: &str = "lower-bounds-default";
/// Auto constant of `A = ceil(c * D / eps)` when a config names neither `a` nor `c`.
pub const DEFAULT_AUTO_C: f64 = 2.0;
/// Brute-force cross-checks run only up to this many points.
pub const BRUTE_FORCE_POINTS: usize = 300;

/// What a finished command hands back for the report.
pub struct Outcome {
    pub result: Value,
    pub passed: bool,
    /// Scalar metrics, used as sweep table columns.
    pub summary: Map<String, Value>,
    pub csv: Option<String>,
}

pub type Job = Box<dyn FnOnce() -> semialg::Result<Outcome> + Send>;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn summary(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Parses and validates a config for `command`, returning a job ready to run.
pub fn prepare(command: &str, f: &mut Fields) -> Option<Job> {
    match command {
        "partition" => partition(f),
        "regularity" => regularity(f),
        "turan" => turan(f),
        "zarankiewicz" => zarankiewicz(f),
        "unitdist" => unitdist(f),
        "equilateral" => equilateral(f),
        "ramsey" => ramsey(f),
        "hardinstance" => hardinstance(f),
        "proptest" => proptest(f),
        "certificates" => certificates(f),
        "sweep" => sweep(f),
        other => {
            f.problem(format!("command: unknown command {other:?}, expected one of {}", COMMANDS.join(", ")));
            None
        }
    }
}

pub fn load_points(path: &PathBuf) -> semialg::Result<PointSet> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read points file {}: {e}", path.display())))?;
    PointSet::from_csv(&text)
}

enum Points {
    File(PathBuf),
    Source(PointSource),
}

impl Points {
    fn load(self) -> semialg::Result<PointSet> {
        match self {
            Points::File(p) => load_points(&p),
            Points::Source(s) => s.build(),
        }
    }
}

fn points(f: &mut Fields) -> Option<Points> {
    match (f.has("points_file"), f.has("points")) {
        (true, true) => {
            f.problem("points: give either points or points_file, not both");
            None
        }
        (true, false) => f.opt::<PathBuf>("points_file").map(Points::File),
        (false, true) => f.opt::<PointSource>("points").map(Points::Source),
        (false, false) => {
            f.problem("points: required (a point source object or points_file)");
            None
        }
    }
}

enum Graph {
    File(PathBuf),
    Family(Family),
}

impl Graph {
    fn load(self, tuple_budget: u128) -> semialg::Result<PartiteHypergraph> {
        let h = match self {
            Graph::File(p) => {
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| Error::Input(format!("cannot read hypergraph file {}: {e}", p.display())))?;
                let h: PartiteHypergraph = serde_json::from_str(&text)?;
                h.validate()?;
                h
            }
            Graph::Family(fam) => generate(&fam)?,
        };
        if h.tuple_count() > tuple_budget {
            return Err(Error::Budget { what: "vertex tuples".into(), needed: h.tuple_count(), budget: tuple_budget });
        }
        Ok(h)
    }
}

fn graph(f: &mut Fields) -> Option<Graph> {
    if f.has("hypergraph_file") {
        if f.has("family") {
            f.problem("family: give either family or hypergraph_file, not both");
            return None;
        }
        return f.opt::<PathBuf>("hypergraph_file").map(Graph::File);
    }
    f.tagged::<Family>("family").map(Graph::Family)
}

fn tuple_budget(f: &mut Fields) -> u128 {
    let b: u128 = f.or("tuple_budget", DEFAULT_TUPLE_BUDGET);
    if b == 0 {
        f.problem("tuple_budget: must be positive");
    }
    b
}

fn search(f: &mut Fields) -> SearchBudget {
    let mut s = SearchBudget::default();
    s.seed = f.or("seed", 0);
    s.iterations = f.or("iterations", s.iterations);
    s.restarts = f.or("restarts", s.restarts);
    if s.iterations == 0 {
        f.problem("iterations: must be positive");
    }
    if s.restarts == 0 {
        f.problem("restarts: must be positive");
    }
    s
}

fn unit_interval(f: &mut Fields, key: &str, r: &Option<Rational>) {
    if let Some(r) = r {
        let zero = Rational::from_integer(0.into());
        if r <= &zero || r > &Rational::from_integer(1.into()) {
            f.problem(format!("{key}: must lie in (0, 1], got {}", format_rational(r)));
        }
    }
}

fn partition(f: &mut Fields) -> Option<Job> {
    let pts = points(f);
    let a = f.req_rational("a");
    let search = search(f);
    let max_level: Option<usize> = f.opt("max_level");
    if let Some(a) = &a {
        if a <= &Rational::from_integer(0.into()) {
            f.problem("a: must be positive");
        }
    }
    let (pts, a) = (pts?, a?);
    Some(Box::new(move || {
        let p = pts.load()?;
        let c = build_partition(&p, &PartitionParams { a, max_level, search })?;
        let ok = c.check_invariants().is_ok();
        let mut csv = String::from("point,cell,level\n");
        for (i, &cell) in c.assignment.iter().enumerate() {
            csv.push_str(&format!("{i},{cell},{}\n", c.cells[cell].level));
        }
        let r = &c.report;
        Ok(Outcome {
            summary: summary(&[
                ("cells", json!(r.cells)),
                ("max_top_cell", json!(r.max_top_cell)),
                ("total_degree", json!(r.total_degree)),
                ("cell_constant", json!(r.cell_constant)),
                ("size_constant", json!(r.size_constant)),
                ("degree_constant", json!(r.degree_constant)),
            ]),
            result: to_value(&c),
            passed: ok,
            csv: Some(csv),
        })
    }))
}

fn regularity(f: &mut Fields) -> Option<Job> {
    let g = graph(f);
    let budget = tuple_budget(f);
    let eps = f.req_rational("eps");
    unit_interval(f, "eps", &eps);
    let a = f.opt_rational("a");
    let c: Option<f64> = f.opt("c");
    if let Some(c) = c {
        f.positive("c", c);
    }
    if a.is_some() && c.is_some() {
        f.problem("a: give either an explicit a or an auto constant c, not both");
    }
    let equitable = f.or("equitable", false);
    let mode: TupleMode = f.or("mode", TupleMode::All);
    let search = search(f);
    let (g, eps) = (g?, eps?);
    let a_rule = match (a, c) {
        (Some(a), _) => ARule::Explicit { a },
        (None, Some(c)) => ARule::Auto { c },
        (None, None) => ARule::Auto { c: DEFAULT_AUTO_C },
    };
    Some(Box::new(move || {
        let h = g.load(budget)?;
        let req = RegularityRequest { eps: eps.clone(), a_rule, equitable, search, mode };
        let r = regularize(&h, &req)?;
        let passed = r.homogeneity.error <= eps;
        Ok(Outcome {
            summary: summary(&[
                ("a", json!(r.a)),
                ("error", json!(format_rational(&r.homogeneity.error))),
                ("error_f64", json!(to_f64(&r.homogeneity.error))),
                ("parts", json!(r.part_counts.iter().max().copied().unwrap_or(0))),
                ("bound_constant", json!(r.bound_constant)),
            ]),
            csv: Some(r.histogram_csv()),
            result: to_value(&r),
            passed,
        })
    }))
}

fn turan(f: &mut Fields) -> Option<Job> {
    let g = graph(f);
    let budget = tuple_budget(f);
    let eps = f.opt_rational("eps");
    unit_interval(f, "eps", &eps);
    let ell: Option<usize> = f.opt("ell");
    let mut cfg = TuranConfig { search: search(f), ..TuranConfig::default() };
    cfg.c = f.or("c", cfg.c);
    cfg.growth = f.or("growth", cfg.growth);
    f.positive("c", cfg.c);
    if cfg.growth <= 1.0 {
        f.problem(format!("growth: must exceed 1, got {}", cfg.growth));
    }
    let g = g?;
    Some(Box::new(move || {
        let h = g.load(budget)?;
        let eps = match eps {
            Some(e) => e,
            None => {
                let e = h.oracle()?.count_edges();
                Rational::new(e.into(), h.tuple_count().max(1).into())
            }
        };
        let ell = ell.unwrap_or(h.k().saturating_sub(1).max(1));
        let r = turan_extract(&h, &eps, ell, &cfg)?;
        let mut csv = String::from("level,sizes,density,a,parts,error,descend_into\n");
        for (i, s) in r.trace.iter().enumerate() {
            let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            let into = s.descend_into.map(|x| x.to_string()).unwrap_or_default();
            csv.push_str(&format!("{i},{},{},{},{},{},{into}\n", join(&s.sizes), s.density, s.a, join(&s.parts), s.error));
        }
        Ok(Outcome {
            summary: summary(&[
                ("eps", json!(format_rational(&eps))),
                ("t_ratio", json!(r.t_ratio)),
                ("measured_c", json!(r.measured_c)),
                ("levels", json!(r.trace.len())),
            ]),
            passed: r.verified,
            result: to_value(&r),
            csv: Some(csv),
        })
    }))
}

fn zarankiewicz(f: &mut Fields) -> Option<Job> {
    let family = f.tagged::<SweepFamily>("family");
    let ladder: Option<Vec<usize>> = f.req("ladder");
    let u: Option<usize> = f.req("u");
    let limit: usize = f.or("certify_limit", 200);
    let max_exponent: Option<f64> = f.opt("max_exponent");
    if let Some(l) = &ladder {
        if l.len() < 4 {
            f.problem(format!("ladder: a fit needs at least 4 entries, got {}", l.len()));
        }
        if l.contains(&0) {
            f.problem("ladder: entries must be positive");
        }
    }
    if u == Some(0) {
        f.problem("u: must be positive");
    }
    let (family, ladder, u) = (family?, ladder?, u?);
    Some(Box::new(move || {
        let e = zarankiewicz_sweep(family, &ladder, u, limit)?;
        let passed = max_exponent.is_none_or(|m| e.exponent <= m);
        Ok(Outcome {
            summary: summary(&[
                ("exponent", json!(e.exponent)),
                ("r_squared", json!(e.r_squared)),
                ("all_free", json!(e.all_free)),
                ("any_unknown", json!(e.any_unknown)),
            ]),
            csv: Some(e.to_csv()),
            result: to_value(&e),
            passed,
        })
    }))
}

fn histogram_csv(hist: &[(Rational, u64)]) -> String {
    let mut csv = String::from("squared_distance,pairs\n");
    for (sq, c) in hist {
        csv.push_str(&format!("{},{c}\n", format_rational(sq)));
    }
    csv
}

fn unitdist(f: &mut Fields) -> Option<Job> {
    let pts = points(f);
    let sq = f.opt_rational("sq_scale");
    if let Some(s) = &sq {
        if s <= &Rational::from_integer(0.into()) {
            f.problem("sq_scale: must be positive");
        }
    }
    let pts = pts?;
    Some(Box::new(move || {
        let p = pts.load()?;
        let (sq, sweep) = match sq {
            Some(s) => (s, None),
            None => {
                let (s, rep) = sweep_unit_distance(&p)?;
                (s, Some(rep))
            }
        };
        let count = count_unit_distances(&p, &sq)?;
        let reference = (p.len() <= BRUTE_FORCE_POINTS).then(|| count_unit_distances_bruteforce(&p, &sq));
        let hist = distance_histogram(&p);
        Ok(Outcome {
            result: json!({
                "points": p.len(),
                "sq_scale": format_rational(&sq),
                "count": count,
                "bruteforce": reference,
                "sweep": sweep,
                "distinct_distances": hist.len(),
            }),
            passed: reference.is_none_or(|r| r == count),
            summary: summary(&[("points", json!(p.len())), ("count", json!(count))]),
            csv: Some(histogram_csv(&hist)),
        })
    }))
}

fn equilateral(f: &mut Fields) -> Option<Job> {
    let pts = points(f)?;
    Some(Box::new(move || {
        let p = pts.load()?;
        let count = count_equilateral_triangles(&p)?;
        let reference = (p.len() <= BRUTE_FORCE_POINTS).then(|| count_equilateral_bruteforce(&p));
        Ok(Outcome {
            result: json!({ "points": p.len(), "count": count, "bruteforce": reference }),
            passed: reference.is_none_or(|r| r == count),
            summary: summary(&[("points", json!(p.len())), ("count", json!(count))]),
            csv: None,
        })
    }))
}

/// Host graphs for the tester.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "host", rename_all = "snake_case")]
enum HostFamily {
    PlantedMultipartite { n: usize },
    DenseUnitDisk { n: usize, seed: u64 },
    Threshold { n: usize, seed: u64 },
    SplitBipartite { n: usize, seed: u64 },
    GridUnitDistance { s: usize },
}

impl HostFamily {
    fn build(&self) -> semialg::Result<Host> {
        match *self {
            HostFamily::PlantedMultipartite { n } => planted_multipartite(n),
            HostFamily::DenseUnitDisk { n, seed } => dense_unit_disk(n, seed),
            HostFamily::Threshold { n, seed } => threshold_graph(n, seed),
            HostFamily::SplitBipartite { n, seed } => split_bipartite(n, seed),
            HostFamily::GridUnitDistance { s } => grid_unit_distance(s),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PatternSpec {
    Named(String),
    Custom(Pattern),
}

fn ramsey(f: &mut Fields) -> Option<Job> {
    let task: String = f.or("task", "cograph".to_string());
    match task.as_str() {
        "cograph" => cograph(f),
        "tester" => tester(f),
        other => {
            f.problem(format!("task: expected \"cograph\" or \"tester\", got {other:?}"));
            None
        }
    }
}

fn cograph(f: &mut Fields) -> Option<Job> {
    let g = graph(f);
    let budget = tuple_budget(f);
    let mut cfg = CographConfig::default();
    cfg.seed = f.or("seed", 0);
    cfg.p4_samples = f.or("p4_samples", cfg.p4_samples);
    cfg.turan.search.seed = cfg.seed;
    let g = g?;
    Some(Box::new(move || {
        let h = g.load(budget)?;
        let cert = extract_cograph(&h, &cfg)?;
        let (kind, set) = clique_or_is_in_graph(&h, &cert)?;
        let n = h.parts[0].len();
        let sqrt_bound = (cert.len() as f64).sqrt().ceil() as usize;
        let log_bound = (n.max(1) as f64).log2().floor() as usize / 2;
        Ok(Outcome {
            summary: summary(&[
                ("vertices", json!(n)),
                ("certificate", json!(cert.len())),
                ("set", json!(set.len())),
            ]),
            passed: set.len() >= sqrt_bound && set.len() >= log_bound,
            result: json!({
                "vertices": n,
                "certificate": cert,
                "kind": kind,
                "set": set,
                "sqrt_bound": sqrt_bound,
                "log_bound": log_bound,
            }),
            csv: None,
        })
    }))
}

fn tester(f: &mut Fields) -> Option<Job> {
    let host: Option<Result<HostFamily, Graph>> = if f.has("host") {
        f.tagged::<HostFamily>("host").map(Ok)
    } else {
        graph(f).map(Err)
    };
    let budget = tuple_budget(f);
    let pattern = match f.or("pattern", PatternSpec::Named("triangle".into())) {
        PatternSpec::Named(name) => match name.as_str() {
            "triangle" => Some(Pattern::triangle()),
            "partite_triangle" => Some(Pattern::partite_triangle()),
            "edge" => Some(Pattern::single_edge(2)),
            other => {
                f.problem(format!("pattern: unknown pattern {other:?}"));
                None
            }
        },
        PatternSpec::Custom(p) => {
            if let Err(e) = p.validate() {
                f.problem(format!("pattern: {e}"));
            }
            Some(p)
        }
    };
    let eps = f.req_rational("eps");
    unit_interval(f, "eps", &eps);
    let trials: Option<usize> = f.req("trials");
    let queries: Option<usize> = f.opt("queries");
    let desk_c: f64 = f.or("desk_c", 1e-4);
    f.positive("desk_c", desk_c);
    let seed: u64 = f.or("seed", 0);
    let expect: Option<String> = f.opt("expect");
    if let Some(x) = &expect {
        if x != "accept" && x != "reject" {
            f.problem(format!("expect: must be \"accept\" or \"reject\", got {x:?}"));
        }
    }
    if trials == Some(0) {
        f.problem("trials: must be positive");
    }
    let (host, pattern, eps, trials) = (host?, pattern?, eps?, trials?);
    Some(Box::new(move || {
        let host = match host {
            Ok(fam) => fam.build()?,
            Err(g) => Host::from_hypergraph(&g.load(budget)?),
        };
        let queries = queries.unwrap_or_else(|| {
            desk_query_budget(host.dim(), host.total_degree(), pattern.n(), to_f64(&eps), desk_c)
        });
        let cfg = TesterConfig { pattern, eps: eps.clone(), trials, queries, seed };
        let rep = test_h_freeness(&host, &cfg)?;
        let far = if cfg.pattern == Pattern::triangle() && host.classes.len() == 1 {
            Some(triangle_far_certificate(&host)?)
        } else {
            None
        };
        let passed = match expect.as_deref() {
            Some("accept") => rep.acceptance_rate == 1.0,
            Some("reject") => rep.rejection_rate >= 2.0 / 3.0,
            _ => true,
        };
        let mut csv = String::from("trial,seed,injections,rejected\n");
        for v in &rep.verdicts {
            csv.push_str(&format!("{},{},{},{}\n", v.trial, v.seed, v.injections, v.rejected));
        }
        Ok(Outcome {
            summary: summary(&[
                ("queries", json!(queries)),
                ("acceptance_rate", json!(rep.acceptance_rate)),
                ("rejection_rate", json!(rep.rejection_rate)),
            ]),
            result: json!({ "queries": queries, "report": rep, "far_certificate": far }),
            passed,
            csv: Some(csv),
        })
    }))
}

fn hardinstance(f: &mut Fields) -> Option<Job> {
    let t: Option<usize> = f.req("t");
    let k: Option<usize> = f.req("k");
    let r: Option<usize> = f.req("r");
    let seed: Option<u64> = f.req("seed");
    let (t, k, r, seed) = (t?, k?, r?, seed?);
    let cfg = match BlowupConfig::new(t, k, r, seed) {
        Ok(c) => c,
        Err(e) => {
            f.problem(format!("t, k, r: {e}"));
            return None;
        }
    };
    Some(Box::new(move || {
        let (_, audit) = build_hard_instance(&cfg)?;
        Ok(Outcome {
            summary: summary(&[
                ("vertices", json!(audit.vertices)),
                ("pair_mismatches", json!(audit.pair_mismatches)),
                ("quadruple_violations", json!(audit.quadruple_violations)),
                ("largest_clique", json!(audit.largest_clique)),
                ("largest_independent", json!(audit.largest_independent)),
            ]),
            passed: audit.passed(),
            result: to_value(&audit),
            csv: None,
        })
    }))
}

fn proptest(f: &mut Fields) -> Option<Job> {
    let cases: usize = f.or("cases", 32);
    let seed: u64 = f.or("seed", 0);
    let only: Option<Vec<String>> = f.opt("properties");
    if cases == 0 {
        f.problem("cases: must be positive");
    }
    if let Some(names) = &only {
        for n in names {
            if !proptests::NAMES.contains(&n.as_str()) {
                f.problem(format!("properties: unknown property {n:?}"));
            }
        }
    }
    Some(Box::new(move || {
        let results = proptests::run(cases, seed, only.as_deref())?;
        let failures: usize = results.iter().map(|r| r.failures).sum();
        let mut csv = String::from("property,cases,failures\n");
        for r in &results {
            csv.push_str(&format!("{},{},{}\n", r.name, r.cases, r.failures));
        }
        Ok(Outcome {
            summary: summary(&[("properties", json!(results.len())), ("failures", json!(failures))]),
            passed: failures == 0,
            result: to_value(&results),
            csv: Some(csv),
        })
    }))
}

fn verdict_csv(vs: &[CertificateVerdict]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "params", "status", "checks", "note"]).expect("in-memory csv");
    for v in vs {
        let params: Vec<String> = v.params.iter().map(|(k, x)| format!("{k}={x}")).collect();
        let status = match v.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "not_applicable",
        };
        let checks: Vec<String> = v.checks.iter().map(|c| format!("{}: {} vs {}", c.inequality, c.lhs, c.rhs)).collect();
        w.write_record([
            v.name.as_str(),
            &params.join(" "),
            status,
            &checks.join("; "),
            v.note.as_deref().unwrap_or(""),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
}

fn certificates(f: &mut Fields) -> Option<Job> {
    let suite: Option<String> = f.req("suite");
    if let Some(s) = &suite {
        if s != SUITE_NAME {
            f.problem(format!("suite: unknown suite {s:?}, expected {SUITE_NAME:?}"));
        }
    }
    let d = SuiteConfig::default();
    let cfg = SuiteConfig {
        expansion_m: f.or("expansion_m", d.expansion_m),
        expansion_sets: f.or("expansion_sets", d.expansion_sets),
        spacing_max_k: f.or("spacing_max_k", d.spacing_max_k),
        symdiff_k: f.or("symdiff_k", d.symdiff_k),
        symdiff_m: f.or("symdiff_m", d.symdiff_m),
        symdiff_pairs: f.or("symdiff_pairs", d.symdiff_pairs),
        seed: f.or("seed", d.seed),
    };
    suite?;
    Some(Box::new(move || {
        let vs = default_suite(&cfg)?;
        let failed = vs.iter().filter(|v| v.status == Status::Fail || !v.consistent()).count();
        let na = vs.iter().filter(|v| v.status == Status::NotApplicable).count();
        Ok(Outcome {
            summary: summary(&[("verdicts", json!(vs.len())), ("failed", json!(failed)), ("not_applicable", json!(na))]),
            passed: failed == 0,
            csv: Some(verdict_csv(&vs)),
            result: to_value(&vs),
        })
    }))
}

/// Every combination of the varied values, in sorted key order.
fn combinations(vary: &BTreeMap<String, Vec<Value>>) -> Vec<Map<String, Value>> {
    let mut out = vec![Map::new()];
    for (k, values) in vary {
        out = out
            .into_iter()
            .flat_map(|m| {
                values.iter().map(move |v| {
                    let mut m = m.clone();
                    m.insert(k.clone(), v.clone());
                    m
                })
            })
            .collect();
    }
    out
}

fn sweep(f: &mut Fields) -> Option<Job> {
    let base: Option<Map<String, Value>> = f.req("base");
    let vary: Option<BTreeMap<String, Vec<Value>>> = f.req("vary");
    let (base, vary) = (base?, vary?);
    let command = match base.get("command").and_then(Value::as_str) {
        Some("sweep") => {
            f.problem("base.command: sweeps cannot nest");
            return None;
        }
        Some(c) => c.to_string(),
        None => {
            f.problem("base.command: required");
            return None;
        }
    };
    if vary.values().any(Vec::is_empty) {
        f.problem("vary: every varied key needs at least one value");
        return None;
    }
    let mut jobs = Vec::new();
    for (i, combo) in combinations(&vary).into_iter().enumerate() {
        let mut cfg = base.clone();
        cfg.extend(combo.clone());
        let mut sub = Fields::new(cfg);
        let job = prepare(&command, &mut sub);
        match (sub.finish(), job) {
            (Ok(()), Some(job)) => jobs.push((combo, job)),
            (Err(problems), _) => {
                for p in problems {
                    f.problem(format!("run {i}: {p}"));
                }
            }
            (Ok(()), None) => f.problem(format!("run {i}: could not be prepared")),
        }
    }
    if jobs.len() != combinations(&vary).len() {
        return None;
    }
    let keys: Vec<String> = vary.keys().cloned().collect();
    Some(Box::new(move || {
        let mut runs = Vec::new();
        let mut columns: Vec<String> = Vec::new();
        let mut all_passed = true;
        for (combo, job) in jobs {
            let o = job()?;
            all_passed &= o.passed;
            for k in o.summary.keys() {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
            runs.push(json!({ "params": combo, "passed": o.passed, "summary": o.summary, "result": o.result }));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = keys.iter().map(String::as_str).chain(["passed"]).chain(columns.iter().map(String::as_str)).collect();
        w.write_record(&header).expect("in-memory csv");
        let cell = |v: Option<&Value>| match v {
            Some(Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
            None => String::new(),
        };
        for r in &runs {
            let mut row: Vec<String> = keys.iter().map(|k| cell(r["params"].get(k))).collect();
            row.push(r["passed"].to_string());
            row.extend(columns.iter().map(|c| cell(r["summary"].get(c))));
            w.write_record(&row).expect("in-memory csv");
        }
        let csv = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv");
        Ok(Outcome {
            summary: summary(&[("runs", json!(runs.len()))]),
            result: json!({ "command": command, "runs": runs }),
            passed: all_passed,
            csv: Some(csv),
        })
    }))
}
