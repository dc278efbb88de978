//! Finite weighted metric spaces and their unit-distance structure.
//!
//! Distances are dimensionless: the scale is fixed so that all hard-core and
//! dependence statements are about distance 1. Distances exactly equal to 1
//! count as "far": the hard-core constraint needs `>= 1`, independence
//! applies at `>= 1`, and a unit-diameter set has all pairwise distances
//! strictly `< 1`. Floating-point inputs near 1 are compared with strict
//! operators and no epsilon; rounding is the caller's concern.

use std::collections::HashMap;

use crate::error::Error;
use crate::Result;

/// Hard cap on the number of points: regions are subset bitmasks in a `u128`.
pub const MAX_POINTS: usize = 128;

/// Default limit for exact unit-partition-number computations.
pub const DEFAULT_KAPPA_EXACT_LIMIT: usize = 20;

/// A finite metric space with named points.
///
/// Immutable after construction. The strict unit graph (edge iff distance
/// `< 1`) is precomputed as per-point neighbourhood bitmasks.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    ids: Vec<String>,
    id_index: HashMap<String, usize>,
    dist: Vec<f64>,
    coords: Option<Vec<Vec<f64>>>,
    dim: Option<usize>,
    triangle_checked: bool,
    balls: Vec<u128>,
    id_order: Vec<usize>,
}

impl FiniteMetricSpace {
    /// Builds a space from an explicit distance matrix.
    ///
    /// The matrix must be square, symmetric, non-negative and zero on the
    /// diagonal. The triangle inequality is checked for every triple unless
    /// `validate_triangle` is false; skipping is recorded on the object.
    pub fn from_distances(
        ids: Vec<String>,
        matrix: &[Vec<f64>],
        validate_triangle: bool,
    ) -> Result<Self> {
        let n = ids.len();
        check_point_count(n)?;
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::NotSquare {
                rows: matrix.len(),
                cols: matrix.first().map_or(0, Vec::len),
                expected: n,
            });
        }
        let id_index = index_ids(&ids)?;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            let d_ii = matrix[i][i];
            if d_ii != 0.0 {
                return Err(Error::NonzeroDiagonal {
                    a: ids[i].clone(),
                    value: d_ii,
                });
            }
            for j in 0..n {
                let d = matrix[i][j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::BadDistance {
                        a: ids[i].clone(),
                        b: ids[j].clone(),
                        value: d,
                    });
                }
                if matrix[j][i] != d {
                    return Err(Error::Asymmetric {
                        a: ids[i].clone(),
                        b: ids[j].clone(),
                        forward: d,
                        backward: matrix[j][i],
                    });
                }
                dist[i * n + j] = d;
            }
        }
        if validate_triangle {
            check_triangle(&ids, &dist, n)?;
        }
        Ok(Self::finish(ids, id_index, dist, None, None, validate_triangle))
    }

    /// Builds a Euclidean space from coordinates; distances are computed, so
    /// the triangle inequality holds by construction.
    pub fn from_coords(ids: Vec<String>, coords: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        check_point_count(n)?;
        if coords.len() != n {
            return Err(Error::NotSquare {
                rows: coords.len(),
                cols: 0,
                expected: n,
            });
        }
        let id_index = index_ids(&ids)?;
        let dim = coords.first().map_or(0, Vec::len);
        for (id, c) in ids.iter().zip(&coords) {
            if c.len() != dim {
                return Err(Error::CoordDimension {
                    id: id.clone(),
                    expected: dim,
                    found: c.len(),
                });
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::BadGrid(format!("non-finite coordinate for `{id}`")));
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(&coords[i], &coords[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self::finish(ids, id_index, dist, Some(coords), Some(dim), true))
    }

    fn finish(
        ids: Vec<String>,
        id_index: HashMap<String, usize>,
        dist: Vec<f64>,
        coords: Option<Vec<Vec<f64>>>,
        dim: Option<usize>,
        triangle_checked: bool,
    ) -> Self {
        let n = ids.len();
        let mut balls = vec![0u128; n];
        for i in 0..n {
            let mut mask = 0u128;
            for j in 0..n {
                if dist[i * n + j] < 1.0 {
                    mask |= 1u128 << j;
                }
            }
            balls[i] = mask;
        }
        let mut id_order: Vec<usize> = (0..n).collect();
        id_order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        Self {
            ids,
            id_index,
            dist,
            coords,
            dim,
            triangle_checked,
            balls,
            id_order,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.id_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Whether the triangle inequality was validated at construction.
    pub fn triangle_checked(&self) -> bool {
        self.triangle_checked
    }

    /// Bitmask of the open unit sphere around point `i` (always contains `i`).
    pub(crate) fn ball_mask(&self, i: usize) -> u128 {
        self.balls[i]
    }

    /// Point indices sorted by id; the deterministic pivot order.
    pub(crate) fn id_order(&self) -> &[usize] {
        &self.id_order
    }

    /// The open unit sphere `U(x) = { y : d(x, y) < 1 }` as a region.
    pub fn unit_sphere(&self, id: &str) -> Result<RegionSet> {
        let i = self.index_of(id)?;
        Ok(self.unit_sphere_at(i))
    }

    /// As [`unit_sphere`](Self::unit_sphere), by index.
    pub fn unit_sphere_at(&self, i: usize) -> RegionSet {
        RegionSet::from_mask(self.balls[i])
    }

    /// The region containing every point of the space.
    pub fn full_region(&self) -> RegionSet {
        RegionSet::from_mask(full_mask(self.len()))
    }
}

fn check_point_count(n: usize) -> Result<()> {
    if n > MAX_POINTS {
        return Err(Error::TooManyPoints {
            count: n,
            max: MAX_POINTS,
        });
    }
    Ok(())
}

fn index_ids(ids: &[String]) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if map.insert(id.clone(), i).is_some() {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(map)
}

fn check_triangle(ids: &[String], dist: &[f64], n: usize) -> Result<()> {
    // Tiny relative slack so matrices assembled from rounded decimals pass.
    for b in 0..n {
        for a in 0..n {
            let d_ab = dist[a * n + b];
            for c in 0..n {
                let direct = dist[a * n + c];
                let via = d_ab + dist[b * n + c];
                if direct > via + 1e-12 * direct.max(via) {
                    return Err(Error::TriangleViolation {
                        a: ids[a].clone(),
                        b: ids[b].clone(),
                        c: ids[c].clone(),
                        direct,
                        via,
                    });
                }
            }
        }
    }
    Ok(())
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn full_mask(n: usize) -> u128 {
    if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// A subset of the points of one [`FiniteMetricSpace`], stored as a bitmask.
///
/// Regions are plain values; operations that need distances take the space
/// as an argument. Mixing regions across spaces is a logic error the type
/// cannot catch, so keep regions next to the space they came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RegionSet {
    mask: u128,
}

impl RegionSet {
    pub const EMPTY: RegionSet = RegionSet { mask: 0 };

    pub(crate) fn from_mask(mask: u128) -> Self {
        Self { mask }
    }

    pub(crate) fn mask(&self) -> u128 {
        self.mask
    }

    pub fn from_ids<S: AsRef<str>>(space: &FiniteMetricSpace, ids: &[S]) -> Result<Self> {
        let mut mask = 0u128;
        for id in ids {
            mask |= 1u128 << space.index_of(id.as_ref())?;
        }
        Ok(Self { mask })
    }

    pub fn from_indices(space: &FiniteMetricSpace, indices: &[usize]) -> Result<Self> {
        let mut mask = 0u128;
        for &i in indices {
            if i >= space.len() {
                return Err(Error::UnknownId(format!("#{i}")));
            }
            mask |= 1u128 << i;
        }
        Ok(Self { mask })
    }

    pub fn singleton(space: &FiniteMetricSpace, id: &str) -> Result<Self> {
        Ok(Self {
            mask: 1u128 << space.index_of(id)?,
        })
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.mask >> i & 1 == 1
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        BitIter(self.mask)
    }

    pub fn ids<'s>(&self, space: &'s FiniteMetricSpace) -> Vec<&'s str> {
        self.indices().map(|i| space.id(i)).collect()
    }

    pub fn union(&self, other: RegionSet) -> RegionSet {
        Self {
            mask: self.mask | other.mask,
        }
    }

    pub fn intersection(&self, other: RegionSet) -> RegionSet {
        Self {
            mask: self.mask & other.mask,
        }
    }

    pub fn difference(&self, other: RegionSet) -> RegionSet {
        Self {
            mask: self.mask & !other.mask,
        }
    }

    pub fn is_subset_of(&self, other: RegionSet) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn is_disjoint(&self, other: RegionSet) -> bool {
        self.mask & other.mask == 0
    }

    /// Largest pairwise distance within the region; 0 for empty regions and
    /// singletons.
    pub fn diameter(&self, space: &FiniteMetricSpace) -> f64 {
        let idx: Vec<usize> = self.indices().collect();
        let mut d = 0.0f64;
        for (k, &i) in idx.iter().enumerate() {
            for &j in &idx[k + 1..] {
                d = d.max(space.distance(i, j));
            }
        }
        d
    }

    /// Whether all pairwise distances are strictly below 1 (the finite
    /// analogue of a set of diameter less than one).
    pub fn is_unit_diameter(&self, space: &FiniteMetricSpace) -> bool {
        let idx: Vec<usize> = self.indices().collect();
        for (k, &i) in idx.iter().enumerate() {
            for &j in &idx[k + 1..] {
                if space.distance(i, j) >= 1.0 {
                    return false;
                }
            }
        }
        true
    }
}

struct BitIter(u128);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

/// Minimal distance between two regions; infinite if either is empty.
pub fn region_distance(space: &FiniteMetricSpace, a: RegionSet, b: RegionSet) -> f64 {
    let mut d = f64::INFINITY;
    for i in a.indices() {
        for j in b.indices() {
            d = d.min(space.distance(i, j));
        }
    }
    d
}

/// How to compute the unit partition number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaMode {
    /// Exhaustive branch-and-bound; exact but limited in size.
    Exact,
    /// Largest-first clique peeling; an upper bound, always flagged inexact.
    Greedy,
}

/// Result of a unit-partition-number computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kappa {
    pub value: usize,
    pub is_exact: bool,
}

/// Unit partition number κ: the minimum number of unit-diameter pieces
/// partitioning the region, i.e. the minimum clique cover of the strict unit
/// graph restricted to it. `κ(∅) = 0`.
pub fn kappa(space: &FiniteMetricSpace, region: RegionSet, mode: KappaMode) -> Result<Kappa> {
    kappa_with_limit(space, region, mode, DEFAULT_KAPPA_EXACT_LIMIT)
}

/// As [`kappa`], with an explicit size limit for the exact mode.
pub fn kappa_with_limit(
    space: &FiniteMetricSpace,
    region: RegionSet,
    mode: KappaMode,
    exact_limit: usize,
) -> Result<Kappa> {
    let verts: Vec<usize> = region.indices().collect();
    if verts.is_empty() {
        return Ok(Kappa {
            value: 0,
            is_exact: true,
        });
    }
    match mode {
        KappaMode::Greedy => Ok(Kappa {
            value: greedy_clique_cover(space, &verts),
            is_exact: false,
        }),
        KappaMode::Exact => {
            if verts.len() > exact_limit {
                return Err(Error::RegionTooLarge {
                    what: "exact unit partition number",
                    points: verts.len(),
                    limit: exact_limit,
                });
            }
            Ok(Kappa {
                value: exact_clique_cover(space, &verts),
                is_exact: true,
            })
        }
    }
}

/// Growth bound `K`: the maximum of κ(U(x)) over all points, computed exactly.
pub fn growth_bound_k(space: &FiniteMetricSpace) -> Result<usize> {
    growth_bound_k_with_limit(space, DEFAULT_KAPPA_EXACT_LIMIT)
}

/// As [`growth_bound_k`], with an explicit exact-κ size limit.
pub fn growth_bound_k_with_limit(space: &FiniteMetricSpace, exact_limit: usize) -> Result<usize> {
    let mut k = 0;
    for i in 0..space.len() {
        let ball = space.unit_sphere_at(i);
        k = k.max(kappa_with_limit(space, ball, KappaMode::Exact, exact_limit)?.value);
    }
    Ok(k)
}

fn adjacency(space: &FiniteMetricSpace, verts: &[usize]) -> Vec<u128> {
    // Local adjacency over `verts` positions: edge iff distance < 1.
    let k = verts.len();
    let mut adj = vec![0u128; k];
    for a in 0..k {
        for b in (a + 1)..k {
            if space.distance(verts[a], verts[b]) < 1.0 {
                adj[a] |= 1u128 << b;
                adj[b] |= 1u128 << a;
            }
        }
    }
    adj
}

fn greedy_clique_cover(space: &FiniteMetricSpace, verts: &[usize]) -> usize {
    let k = verts.len();
    let adj = adjacency(space, verts);
    let mut remaining = full_mask(k);
    let mut count = 0;
    while remaining != 0 {
        // Seed with the remaining vertex of highest remaining degree, then
        // grow greedily.
        let mut seed = remaining.trailing_zeros() as usize;
        let mut seed_deg = (adj[seed] & remaining).count_ones();
        let mut m = remaining & (remaining - 1);
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let deg = (adj[v] & remaining).count_ones();
            if deg > seed_deg {
                seed = v;
                seed_deg = deg;
            }
        }
        let mut clique = 1u128 << seed;
        let mut candidates = adj[seed] & remaining;
        while candidates != 0 {
            let v = candidates.trailing_zeros() as usize;
            clique |= 1u128 << v;
            candidates &= adj[v];
        }
        remaining &= !clique;
        count += 1;
    }
    count
}

/// Lower bound for the clique cover: a greedily built set of pairwise
/// non-adjacent vertices (each needs its own part).
fn independent_lower_bound(adj: &[u128], mut remaining: u128) -> usize {
    let mut count = 0;
    while remaining != 0 {
        let v = remaining.trailing_zeros() as usize;
        remaining &= !(adj[v] | (1u128 << v));
        count += 1;
    }
    count
}

fn exact_clique_cover(space: &FiniteMetricSpace, verts: &[usize]) -> usize {
    let k = verts.len();
    let adj = adjacency(space, verts);
    let best = greedy_clique_cover(space, verts);
    let lower = independent_lower_bound(&adj, full_mask(k));
    if lower == best {
        return best;
    }

    // Branch and bound: assign vertices in order to an existing compatible
    // clique or open a new one.
    struct Search<'a> {
        adj: &'a [u128],
        k: usize,
        best: usize,
    }

    impl Search<'_> {
        fn go(&mut self, v: usize, cliques: &mut Vec<u128>) {
            if cliques.len() >= self.best {
                return;
            }
            if v == self.k {
                self.best = cliques.len();
                return;
            }
            // Pairwise non-adjacent unassigned vertices need pairwise
            // distinct parts, so their count lower-bounds the total.
            let rest = full_mask(self.k) & !full_mask(v);
            if independent_lower_bound(self.adj, rest) >= self.best {
                return;
            }
            for idx in 0..cliques.len() {
                if cliques[idx] & !self.adj[v] == 0 {
                    cliques[idx] |= 1u128 << v;
                    self.go(v + 1, cliques);
                    cliques[idx] &= !(1u128 << v);
                }
            }
            if cliques.len() + 1 < self.best {
                cliques.push(1u128 << v);
                self.go(v + 1, cliques);
                cliques.pop();
            }
        }
    }

    let mut search = Search { adj: &adj, k, best };
    let mut cliques = Vec::new();
    search.go(0, &mut cliques);
    search.best
}

/// An axis-aligned box in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::BadGrid(format!(
                "box corners have dimensions {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !l.is_finite() || !u.is_finite() || u <= l {
                return Err(Error::BadGrid(format!("degenerate box side [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .product()
    }
}

/// A box discretised into cubic cells, carrying a constant intensity density.
///
/// The induced space has one point per cell centre; the induced measure
/// assigns mass `λ · h^d` to each cell. Discretisation is the bridge between
/// continuum statements and the atomic machinery of this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRegion {
    bounds: BoxRegion,
    cell_width: f64,
    intensity: f64,
}

impl GridRegion {
    pub fn new(bounds: BoxRegion, cell_width: f64, intensity: f64) -> Result<Self> {
        if !cell_width.is_finite() || cell_width <= 0.0 {
            return Err(Error::BadGrid(format!("cell width {cell_width} must be > 0")));
        }
        if !intensity.is_finite() || intensity < 0.0 {
            return Err(Error::BadGrid(format!(
                "intensity density {intensity} must be >= 0"
            )));
        }
        // Each side must be an integer number of cells.
        for (l, u) in bounds.lower.iter().zip(&bounds.upper) {
            let cells = (u - l) / cell_width;
            if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) || cells.round() < 1.0 {
                return Err(Error::BadGrid(format!(
                    "side [{l}, {u}] is not an integer number of cells of width {cell_width}"
                )));
            }
        }
        Ok(Self {
            bounds,
            cell_width,
            intensity,
        })
    }

    pub fn bounds(&self) -> &BoxRegion {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    /// Mass carried by one cell: `λ · h^d`.
    pub fn cell_mass(&self) -> f64 {
        self.intensity * self.cell_width.powi(self.dim() as i32)
    }

    fn cells_per_dim(&self) -> Vec<usize> {
        self.bounds
            .lower
            .iter()
            .zip(&self.bounds.upper)
            .map(|(l, u)| ((u - l) / self.cell_width).round() as usize)
            .collect()
    }
}

/// Discretises a [`GridRegion`] into a metric space (one point per cell
/// centre, Euclidean distances) and the matching atomic measure.
pub fn grid_space(grid: &GridRegion) -> Result<(FiniteMetricSpace, crate::AtomicMeasure)> {
    grid_space_with_limit(grid, MAX_POINTS)
}

/// As [`grid_space`], with an explicit cell-count limit (still capped by
/// [`MAX_POINTS`]).
pub fn grid_space_with_limit(
    grid: &GridRegion,
    max_cells: usize,
) -> Result<(FiniteMetricSpace, crate::AtomicMeasure)> {
    let per_dim = grid.cells_per_dim();
    let total: usize = per_dim.iter().product();
    let cap = max_cells.min(MAX_POINTS);
    if total > cap {
        return Err(Error::CellLimit {
            cells: total,
            max: cap,
        });
    }
    let width = (total.max(1) as f64).log10().floor() as usize + 1;
    let mut ids = Vec::with_capacity(total);
    let mut coords = Vec::with_capacity(total);
    let mut index = vec![0usize; grid.dim()];
    for linear in 0..total {
        let mut rem = linear;
        for (d, &count) in per_dim.iter().enumerate().rev() {
            index[d] = rem % count;
            rem /= count;
        }
        let point: Vec<f64> = index
            .iter()
            .zip(grid.bounds.lower.iter())
            .map(|(&k, l)| l + (k as f64 + 0.5) * grid.cell_width)
            .collect();
        ids.push(format!("c{linear:0width$}"));
        coords.push(point);
    }
    let space = FiniteMetricSpace::from_coords(ids, coords)?;
    let measure = crate::AtomicMeasure::uniform(&space, grid.cell_mass())?;
    Ok((space, measure))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collinear() -> FiniteMetricSpace {
        FiniteMetricSpace::from_coords(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0], vec![0.6], vec![1.2]],
        )
        .unwrap()
    }

    #[test]
    fn one_point_space() {
        let s = FiniteMetricSpace::from_distances(vec!["a".into()], &[vec![0.0]], true).unwrap();
        assert_eq!(s.len(), 1);
        let u = s.unit_sphere("a").unwrap();
        assert_eq!(u.ids(&s), vec!["a"]);
    }

    #[test]
    fn collinear_distances_and_unit_graph() {
        let s = collinear();
        assert!((s.distance(0, 1) - 0.6).abs() < 1e-15);
        assert!((s.distance(1, 2) - 0.6).abs() < 1e-15);
        assert!((s.distance(0, 2) - 1.2).abs() < 1e-15);
        // Edges a-b and b-c only; 1.2 >= 1 excludes a-c.
        assert!(s.ball_mask(0) & (1 << 2) == 0);
        assert_eq!(s.unit_sphere("b").unwrap().len(), 3);
        assert_eq!(s.unit_sphere("a").unwrap().ids(&s), vec!["a", "b"]);
    }

    #[test]
    fn distance_exactly_one_is_far() {
        let s = FiniteMetricSpace::from_coords(
            vec!["a".into(), "b".into()],
            vec![vec![0.0], vec![1.0]],
        )
        .unwrap();
        assert_eq!(s.unit_sphere("a").unwrap().len(), 1);
    }

    #[test]
    fn triangle_violation_reported() {
        let m = vec![
            vec![0.0, 2.0, 5.0],
            vec![2.0, 0.0, 2.0],
            vec![5.0, 2.0, 0.0],
        ];
        let err = FiniteMetricSpace::from_distances(
            vec!["a".into(), "b".into(), "c".into()],
            &m,
            true,
        )
        .unwrap_err();
        match err {
            Error::TriangleViolation { direct, via, .. } => {
                assert_eq!(direct, 5.0);
                assert_eq!(via, 4.0);
            }
            other => panic!("unexpected error: {other}"),
        }
        // Validation can be disabled for non-metric matrices.
        assert!(FiniteMetricSpace::from_distances(
            vec!["a".into(), "b".into(), "c".into()],
            &m,
            false
        )
        .is_ok());
    }

    #[test]
    fn asymmetry_and_diagonal_errors() {
        let m = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(matches!(
            FiniteMetricSpace::from_distances(vec!["a".into(), "b".into()], &m, true),
            Err(Error::Asymmetric { .. })
        ));
        let m = vec![vec![0.5]];
        assert!(matches!(
            FiniteMetricSpace::from_distances(vec!["a".into()], &m, true),
            Err(Error::NonzeroDiagonal { .. })
        ));
    }

    #[test]
    fn kappa_examples() {
        let s = collinear();
        assert_eq!(
            kappa(&s, RegionSet::EMPTY, KappaMode::Exact).unwrap(),
            Kappa {
                value: 0,
                is_exact: true
            }
        );
        let full = s.full_region();
        assert_eq!(kappa(&s, full, KappaMode::Exact).unwrap().value, 2);
        let greedy = kappa(&s, full, KappaMode::Greedy).unwrap();
        assert!(!greedy.is_exact);
        assert!(greedy.value >= 2);

        // Four points pairwise < 1 apart form a single unit-diameter part.
        let tight = FiniteMetricSpace::from_coords(
            (0..4).map(|i| format!("p{i}")).collect(),
            vec![vec![0.0, 0.0], vec![0.3, 0.0], vec![0.0, 0.3], vec![0.3, 0.3]],
        )
        .unwrap();
        assert_eq!(
            kappa(&tight, tight.full_region(), KappaMode::Exact)
                .unwrap()
                .value,
            1
        );
    }

    #[test]
    fn kappa_exact_limit_enforced() {
        let s = collinear();
        let err = kappa_with_limit(&s, s.full_region(), KappaMode::Exact, 2).unwrap_err();
        assert!(matches!(err, Error::RegionTooLarge { .. }));
    }

    #[test]
    fn growth_bound_examples() {
        let one = FiniteMetricSpace::from_distances(vec!["a".into()], &[vec![0.0]], true).unwrap();
        assert_eq!(growth_bound_k(&one).unwrap(), 1);
        assert_eq!(growth_bound_k(&collinear()).unwrap(), 2);

        let grid = GridRegion::new(BoxRegion::new(vec![0.0], vec![2.0]).unwrap(), 0.5, 0.1).unwrap();
        let (gs, _) = grid_space(&grid).unwrap();
        // U(x) spans cell centres within x ± 0.5; the extremes sit exactly
        // 1.0 apart, so two parts are needed.
        assert_eq!(growth_bound_k(&gs).unwrap(), 2);
    }

    #[test]
    fn grid_space_examples() {
        let grid = GridRegion::new(BoxRegion::new(vec![0.0], vec![1.0]).unwrap(), 0.5, 0.2).unwrap();
        let (s, m) = grid_space(&grid).unwrap();
        assert_eq!(s.len(), 2);
        for i in 0..2 {
            assert!((m.mass(i) - 0.1).abs() < 1e-15);
        }

        let grid = GridRegion::new(BoxRegion::new(vec![0.0], vec![3.0]).unwrap(), 0.5, 0.1).unwrap();
        let (s, m) = grid_space(&grid).unwrap();
        assert_eq!(s.len(), 6);
        assert!((m.total() - 0.3).abs() < 1e-12);

        let grid = GridRegion::new(BoxRegion::new(vec![0.0], vec![1.0]).unwrap(), 0.5, 0.0).unwrap();
        let (_, m) = grid_space(&grid).unwrap();
        assert_eq!(m.total(), 0.0);
    }

    #[test]
    fn grid_cell_limit() {
        let grid =
            GridRegion::new(BoxRegion::new(vec![0.0], vec![10.0]).unwrap(), 0.1, 0.1).unwrap();
        assert!(matches!(
            grid_space_with_limit(&grid, 50),
            Err(Error::CellLimit { cells: 100, max: 50 })
        ));
    }

    #[test]
    fn region_ops() {
        let s = collinear();
        let ab = RegionSet::from_ids(&s, &["a", "b"]).unwrap();
        let bc = RegionSet::from_ids(&s, &["b", "c"]).unwrap();
        assert_eq!(ab.union(bc).len(), 3);
        assert_eq!(ab.intersection(bc).ids(&s), vec!["b"]);
        assert_eq!(ab.difference(bc).ids(&s), vec!["a"]);
        assert!(ab.is_unit_diameter(&s));
        assert!(!ab.union(bc).is_unit_diameter(&s));
        assert!((ab.union(bc).diameter(&s) - 1.2).abs() < 1e-15);
        assert!(RegionSet::EMPTY.is_unit_diameter(&s));
    }

    #[test]
    fn unknown_id_errors() {
        let s = collinear();
        assert!(matches!(s.unit_sphere("zz"), Err(Error::UnknownId(_))));
        assert!(RegionSet::from_ids(&s, &["a", "zz"]).is_err());
    }
}
