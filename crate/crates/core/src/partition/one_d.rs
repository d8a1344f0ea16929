use num_traits::One;

use super::{Cell, CellPartition, PartitionReport};
use crate::error::{input, Result};
use crate::hypergraph::PointSet;
use crate::poly::Polynomial;
use crate::rational::{ratio, Rational};

/// Sizes of an equitable split of `n` items into `parts` pieces, larger first.
pub fn equitable_sizes(n: usize, parts: usize) -> Vec<usize> {
    let parts = parts.min(n);
    if parts == 0 {
        return vec![];
    }
    let (q, r) = (n / parts, n % parts);
    (0..parts).map(|i| q + usize::from(i < r)).collect()
}

/// Splits an ordered list into equitable consecutive intervals.
pub fn split_equitably<T: Clone>(items: &[T], parts: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut start = 0;
    for s in equitable_sizes(items.len(), parts) {
        out.push(items[start..start + s].to_vec());
        start += s;
    }
    out
}

/// Equitable interval partition of a 1-D point set into `min(a, |P|)` cells.
/// Ties in coordinate are broken by input index. The single cutter is
/// `Π (x - y_j)` with `y_j` halfway between consecutive cells (or at the shared
/// value when a tie straddles a boundary).
pub fn partition_1d(p: &PointSet, a: usize) -> Result<CellPartition> {
    if p.d != 1 {
        return input(format!("partition_1d needs d = 1, got d = {}", p.d));
    }
    if a == 0 {
        return input("partition_1d needs A >= 1");
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&i, &j| p.points[i][0].cmp(&p.points[j][0]).then(i.cmp(&j)));
    let groups = split_equitably(&order, a);

    let x = Polynomial::var(1, 0);
    let mut roots: Vec<Rational> = Vec::new();
    for w in groups.windows(2) {
        let hi = &p.points[*w[0].last().unwrap()][0];
        let lo = &p.points[w[1][0]][0];
        roots.push((hi + lo) * ratio(1, 2));
    }
    let cutter = roots.iter().fold(Polynomial::constant(1, Rational::one()), |acc, y| {
        &acc * &(&x - &Polynomial::constant(1, y.clone()))
    });
    let cutters = if roots.is_empty() { vec![] } else { vec![cutter] };

    let mut assignment = vec![0; p.len()];
    let mut cells = Vec::with_capacity(groups.len());
    for (id, members) in groups.into_iter().enumerate() {
        for &m in &members {
            assignment[m] = id;
        }
        // cell j lies between roots j-1 and j, so the product has sign (-1)^(#roots - j)
        let signs = if cutters.is_empty() {
            vec![]
        } else {
            vec![if (roots.len() - id).is_multiple_of(2) { 1 } else { -1 }]
        };
        let mut members = members;
        members.sort_unstable();
        cells.push(Cell { id, level: 0, signs, members });
    }
    let report = PartitionReport::summarize(p.len(), 1, &Rational::from_integer(a.into()), &cutters, &cells, vec![], false);
    Ok(CellPartition { dim: 1, n_points: p.len(), cutters, cells, assignment, report })
}
