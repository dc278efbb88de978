//! Penrose coefficients and the truncated series expansion of `-log z`.
//!
//! For a tuple of points, build the graph on tuple positions with an edge
//! whenever the two points are closer than 1 (repeated atoms sit at distance
//! 0 and are always joined). The Penrose coefficient is
//! `|Σ_{H connected spanning subgraph} (-1)^{|E(H)|}|`: zero when the graph
//! is disconnected, and a non-negative integer otherwise (it counts a
//! distinguished subset of spanning trees). Summing coefficients against
//! mass products over ordered tuples yields a series with non-negative terms
//! whose partial sums climb towards `-log z(A, B)` wherever the expansion
//! converges.

use std::collections::HashMap;

use crate::error::Error;
use crate::measure::AtomicMeasure;
use crate::numeric::KahanSum;
use crate::space::{FiniteMetricSpace, RegionSet};
use crate::zfun::z_ratio;
use crate::Result;

/// Largest tuple size accepted by [`penrose_coefficient`].
pub const MAX_TUPLE: usize = 8;
/// Largest edge count accepted (the sum walks all edge subsets).
pub const MAX_EDGES: usize = 20;
/// Guard on `|atoms|^order` in [`log_z_series`].
const MAX_ORDERED_TUPLES: u128 = 4_000_000;

/// Truncated expansion of `-log z(A, B)` for one region pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSeries {
    pub region_a: RegionSet,
    pub region_b: RegionSet,
    /// Term values `t_1..t_order`; all non-negative.
    pub terms: Vec<f64>,
    /// `-log z(A, B)` computed exactly, when `Z(B) > 0` and the regions are
    /// small enough.
    pub exact_minus_log_z: Option<f64>,
}

impl ClusterSeries {
    pub fn order(&self) -> usize {
        self.terms.len()
    }

    /// Running partial sums `t_1, t_1 + t_2, ...`; non-decreasing.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.terms
            .iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.terms.iter().sum()
    }
}

/// Penrose coefficient of a tuple given its internal distance matrix.
pub fn penrose_coefficient(distances: &[Vec<f64>]) -> Result<u64> {
    let n = distances.len();
    if n == 0 || n > MAX_TUPLE {
        return Err(Error::InvalidParameter(format!(
            "tuple size {n} outside 1..={MAX_TUPLE}"
        )));
    }
    if distances.iter().any(|row| row.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: distances.iter().map(Vec::len).max().unwrap_or(0),
            expected: n,
        });
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if distances[i][j] < 1.0 {
                edges.push((i, j));
            }
        }
    }
    signed_spanning_sum(n, &edges)
}

fn signed_spanning_sum(n: usize, edges: &[(usize, usize)]) -> Result<u64> {
    if edges.len() > MAX_EDGES {
        return Err(Error::InvalidParameter(format!(
            "tuple graph has {} edges, the limit is {MAX_EDGES}",
            edges.len()
        )));
    }
    if n == 1 {
        return Ok(1);
    }
    // Disconnected tuples contribute nothing (quick check on the full graph).
    if !connected(n, edges, (1u32 << edges.len()) - 1) {
        return Ok(0);
    }
    let mut sum: i64 = 0;
    for subset in 0u32..1 << edges.len() {
        if connected(n, edges, subset) {
            sum += if subset.count_ones() % 2 == 0 { 1 } else { -1 };
        }
    }
    Ok(sum.unsigned_abs())
}

fn connected(n: usize, edges: &[(usize, usize)], subset: u32) -> bool {
    let mut reach: u32 = 1;
    let full: u32 = (1 << n) - 1;
    loop {
        let before = reach;
        for (k, &(a, b)) in edges.iter().enumerate() {
            if subset >> k & 1 == 1 {
                if reach >> a & 1 == 1 {
                    reach |= 1 << b;
                }
                if reach >> b & 1 == 1 {
                    reach |= 1 << a;
                }
            }
        }
        if reach == full {
            return true;
        }
        if reach == before {
            return false;
        }
    }
}

/// Penrose coefficient of a multiset of atoms of a space (repeats allowed).
fn penrose_of_atoms(space: &FiniteMetricSpace, tuple: &[usize]) -> Result<u64> {
    let n = tuple.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if tuple[i] == tuple[j] || space.distance(tuple[i], tuple[j]) < 1.0 {
                edges.push((i, j));
            }
        }
    }
    signed_spanning_sum(n, &edges)
}

/// Truncated cluster expansion of `-log z(A, B)`:
/// `t_n = (1/n!) Σ P(x_1..x_n) Π m_{x_i}` over ordered `n`-tuples of atoms
/// of `A ∪ B` that do not lie entirely in `B`.
///
/// Ordered tuples with repetition are enumerated directly; the coefficient
/// of a tuple depends only on its multiset, which is memoised.
pub fn log_z_series(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    region_a: RegionSet,
    region_b: RegionSet,
    order: usize,
) -> Result<ClusterSeries> {
    measure.check_space(space)?;
    if order == 0 || order > MAX_TUPLE {
        return Err(Error::InvalidParameter(format!(
            "expansion order {order} outside 1..={MAX_TUPLE}"
        )));
    }
    let union = region_a.union(region_b);
    // Zero-mass atoms cannot contribute to any term.
    let atoms: Vec<usize> = union.indices().filter(|&i| measure.mass(i) > 0.0).collect();
    let width = atoms.len() as u128;
    if width.pow(order as u32) > MAX_ORDERED_TUPLES {
        return Err(Error::InvalidParameter(format!(
            "{} atoms at order {order} exceed the tuple enumeration guard",
            atoms.len()
        )));
    }

    let mut coeff_memo: HashMap<Vec<usize>, u64> = HashMap::new();
    let mut factorial = 1.0;
    let mut terms = Vec::with_capacity(order);
    for n in 1..=order {
        factorial *= n as f64;
        let mut sum = KahanSum::new();
        let mut tuple = vec![0usize; n];
        if !atoms.is_empty() {
            loop {
                let all_in_b = tuple
                    .iter()
                    .all(|&k| region_b.contains_index(atoms[k]));
                if !all_in_b {
                    let points: Vec<usize> = tuple.iter().map(|&k| atoms[k]).collect();
                    let mut key = points.clone();
                    key.sort_unstable();
                    let coeff = match coeff_memo.get(&key) {
                        Some(&c) => c,
                        None => {
                            let c = penrose_of_atoms(space, &points)?;
                            coeff_memo.insert(key, c);
                            c
                        }
                    };
                    if coeff > 0 {
                        let mass_product: f64 =
                            points.iter().map(|&i| measure.mass(i)).product();
                        sum.add(coeff as f64 * mass_product);
                    }
                }
                // Next ordered tuple in base `atoms.len()`.
                let mut pos = n;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    tuple[pos] += 1;
                    if tuple[pos] < atoms.len() {
                        break;
                    }
                    tuple[pos] = 0;
                }
                if pos == 0 && tuple[0] == 0 {
                    break;
                }
            }
        }
        terms.push(sum.value() / factorial);
    }

    let exact_minus_log_z = z_ratio(space, measure, region_a, region_b)
        .ok()
        .and_then(|z| (z > 0.0).then(|| -z.ln()));

    Ok(ClusterSeries {
        region_a,
        region_b,
        terms,
        exact_minus_log_z,
    })
}
