use super::*;
use crate::hypergraph::families::{grid_points, random_points};
use crate::rational::{int, ratio};
use proptest::prelude::*;

fn pts(d: usize, xs: &[Vec<i64>]) -> PointSet {
    PointSet::from_ints(d, xs).unwrap()
}

fn exact_counts(f: &Polynomial, s: &PointSet) -> SideCounts {
    let mut c = SideCounts::default();
    for p in &s.points {
        match f.eval_sign(p).unwrap() {
            1 => c.pos += 1,
            -1 => c.neg += 1,
            _ => c.zero += 1,
        }
    }
    c
}

#[test]
fn unit_square_corners() {
    let s = pts(2, &[vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
    let b = bisect_simultaneously(std::slice::from_ref(&s), 1, &SearchBudget::default()).unwrap();
    assert!(b.met);
    assert_eq!(b.poly.degree(), 1);
    let c = exact_counts(&b.poly, &s);
    assert!(c.pos <= 2 && c.neg <= 2);
    assert_eq!(c, b.counts[0]);
}

#[test]
fn two_sets_one_line() {
    let a = random_points(21, 2, 64, 1).unwrap();
    let b = random_points(30, 2, 64, 2).unwrap();
    let r = bisect_simultaneously(&[a.clone(), b.clone()], 1, &SearchBudget::default()).unwrap();
    assert!(r.met, "{:?}", r.counts);
    for (s, c) in [(&a, r.counts[0]), (&b, r.counts[1])] {
        assert_eq!(exact_counts(&r.poly, s), c);
        assert!(c.pos.max(c.neg) <= s.len().div_ceil(2));
    }
}

#[test]
fn five_sets_conic() {
    let sets: Vec<PointSet> = (0..5).map(|i| random_points(40, 2, 128, 10 + i).unwrap()).collect();
    let budget = SearchBudget::default();
    let r = bisect_simultaneously(&sets, 2, &budget).unwrap();
    assert!(r.poly.degree() <= 2);
    for (s, c) in sets.iter().zip(&r.counts) {
        assert_eq!(&exact_counts(&r.poly, s), c);
    }
    assert!(r.met, "slack {}", r.realized_slack);
}

#[test]
fn too_many_sets() {
    let sets: Vec<PointSet> = (0..3).map(|i| random_points(5, 2, 16, i).unwrap()).collect();
    assert!(bisect_simultaneously(&sets, 1, &SearchBudget::default()).is_err());
}

#[test]
fn grid_sixteen() {
    let p = grid_points(2, 16, 1).unwrap();
    let c = build_partition(&p, &PartitionParams::new(int(4))).unwrap();
    c.check_invariants().unwrap();
    assert!(c.cells.len() <= 16 * 16, "{}", c.cells.len());
    assert!(c.report.max_top_cell <= 16 * 256 / 16);
    assert!(c.report.total_degree <= 64);
    // members agree with their stored sign vectors
    for cell in &c.cells {
        for &m in &cell.members {
            let s: Vec<Sign> = c.cutters.iter().map(|f| f.eval_sign(&p.points[m]).unwrap()).collect();
            assert_eq!(s, cell.signs);
        }
    }
}

#[test]
fn a_one_single_cell() {
    let p = random_points(50, 2, 32, 3).unwrap();
    let c = build_partition(&p, &PartitionParams::new(int(1))).unwrap();
    assert_eq!(c.cells.len(), 1);
    assert!(c.cutters.is_empty());
    assert!(build_partition(&p, &PartitionParams::new(ratio(1, 2))).is_err());
}

#[test]
fn collinear_goes_to_level_one() {
    let p = pts(2, &(0..6).map(|i| vec![i, 2 * i + 1]).collect::<Vec<_>>());
    let c = build_partition(&p, &PartitionParams::new(int(2))).unwrap();
    c.check_invariants().unwrap();
    assert!(c.report.degenerate);
    assert_eq!(c.cells.len(), 2);
    assert!(c.cells.iter().all(|cell| cell.level == 1 && cell.members.len() == 3));
    assert_eq!(c.cells[0].members, vec![0, 1, 2]);
    for q in &p.points {
        assert_eq!(c.cutters[0].eval_sign(q).unwrap(), 0);
    }
}

#[test]
fn affine_hull() {
    let p = pts(3, &[vec![0, 0, 1], vec![1, 0, 1], vec![0, 5, 1], vec![3, 3, 1]]);
    let h = affine_hull_normal(&p).unwrap().unwrap();
    assert_eq!(h.degree(), 1);
    assert!(p.points.iter().all(|q| h.eval_sign(q).unwrap() == 0));
    let full = pts(3, &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    assert!(affine_hull_normal(&full).unwrap().is_none());
}

#[test]
fn one_dim_delegates() {
    let p = pts(1, &(0..10).map(|i| vec![i]).collect::<Vec<_>>());
    let c = build_partition(&p, &PartitionParams::new(ratio(5, 2))).unwrap();
    assert_eq!(c.cells.len(), 3);
    assert_eq!(c.report.a, "5/2");
}

#[test]
fn dump_is_deterministic() {
    let p = random_points(300, 2, 256, 4).unwrap();
    let params = PartitionParams::new(int(4)).with_seed(9);
    let a = build_partition(&p, &params).unwrap();
    let b = build_partition(&p, &params).unwrap();
    assert_eq!(a.dump_json(), b.dump_json());
    a.check_invariants().unwrap();
}

#[test]
fn crossing_constant_and_singletons() {
    let p = pts(1, &(1..=20).map(|i| vec![i]).collect::<Vec<_>>());
    let c = partition_1d(&p, 4).unwrap();
    let one = Polynomial::constant(2, int(1));
    let s = crossing_stats(&[&c, &c], &[&p, &p], &one).unwrap();
    assert_eq!(s.nonconstant, 0);
    let single = partition_1d(&p, 20).unwrap();
    let g = &Polynomial::var(2, 0) - &Polynomial::var(2, 1);
    let s = crossing_stats(&[&single, &single], &[&p, &p], &g).unwrap();
    assert_eq!(s.nonconstant, 0);
    assert_eq!(s.tuples, 400);
    assert!(crossing_stats(&[&c], &[&p], &g).is_err());
}

#[test]
fn crossing_diagonal() {
    let p = pts(1, &(1..=100).map(|i| vec![i]).collect::<Vec<_>>());
    let c = partition_1d(&p, 10).unwrap();
    let g = &Polynomial::var(2, 0) - &Polynomial::var(2, 1);
    let s = crossing_stats(&[&c, &c], &[&p, &p], &g).unwrap();
    // only the 10 diagonal cell pairs see both signs
    assert_eq!(s.nonconstant, 10);
    assert_eq!(s.weighted, ratio(1, 10));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn partition_is_a_partition(n in 1usize..120, a in 1i64..6, seed in 0u64..1000) {
        let p = random_points(n, 2, 16, seed).unwrap();
        let c = build_partition(&p, &PartitionParams::new(int(a)).with_seed(seed)).unwrap();
        c.check_invariants().unwrap();
        for cell in &c.cells {
            for &m in &cell.members {
                let s: Vec<Sign> = c.cutters.iter().map(|f| f.eval_sign(&p.points[m]).unwrap()).collect();
                prop_assert_eq!(&s, &cell.signs);
            }
        }
    }
}
