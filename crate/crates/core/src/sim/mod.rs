//! Samplers for the point processes the library studies, and empirical
//! statistics to audit their laws.
//!
//! Every sampler is a deterministic function of its inputs and an explicit
//! seed. [`empirical_stats`] drives a sampler through independent substreams
//! (one per draw) and aggregates per-query estimates with standard errors.

pub mod hard_sphere;
pub mod matern;
pub mod rng;
pub mod shearer;
pub mod zero;

pub use hard_sphere::{
    hard_sphere_attempt, sample_hard_sphere, sample_hard_sphere_box, HardSphereDraw,
    HardSphereSampler,
};
pub use matern::{
    matern_target_intensity_path3, sample_matern, sample_matern_box, MaternSampler, MaternVariant,
};
pub use shearer::{sample_shearer, ShearerSampler};
pub use zero::{construct_zero_phase, sample_zero_dependent, ZeroDependentSampler, ZeroPhaseSampler};

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::Error;
use crate::measure::AtomicMeasure;
use crate::numeric::{bernoulli_stderr, mean_stderr};
use crate::space::{region_distance, FiniteMetricSpace, RegionSet};
use crate::Result;

/// An occupancy outcome over the points of a space: one bit per point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryField {
    mask: u128,
    len: usize,
}

impl BinaryField {
    pub fn empty(space: &FiniteMetricSpace) -> Self {
        Self {
            mask: 0,
            len: space.len(),
        }
    }

    pub(crate) fn from_mask(space: &FiniteMetricSpace, mask: u128) -> Self {
        Self {
            mask,
            len: space.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn occupied(&self, i: usize) -> bool {
        self.mask >> i & 1 == 1
    }

    pub(crate) fn set(&mut self, i: usize) {
        self.mask |= 1 << i;
    }

    /// Number of occupied points inside a region.
    pub fn count_in(&self, region: RegionSet) -> u32 {
        (self.mask & region.mask()).count_ones()
    }

    pub fn avoids(&self, region: RegionSet) -> bool {
        self.mask & region.mask() == 0
    }

    pub fn occupied_region(&self) -> RegionSet {
        RegionSet::from_mask(self.mask)
    }

    /// Whether all occupied points are pairwise at distance >= 1.
    pub fn is_hard_core(&self, space: &FiniteMetricSpace) -> bool {
        let occ: Vec<usize> = self.occupied_region().indices().collect();
        for (k, &i) in occ.iter().enumerate() {
            for &j in &occ[k + 1..] {
                if space.distance(i, j) < 1.0 {
                    return false;
                }
            }
        }
        true
    }
}

/// Where a sampled point sits: an atom of a space or a continuum coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    Atom(String),
    Coord(Vec<f64>),
}

/// A sampled point pattern with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    pub points: Vec<(Location, u32)>,
    pub is_simple: bool,
    pub is_hard_core: bool,
}

impl PointConfiguration {
    /// Wraps an occupancy field: multiplicities are all one.
    pub fn from_field(space: &FiniteMetricSpace, field: &BinaryField) -> Self {
        let points = field
            .occupied_region()
            .indices()
            .map(|i| (Location::Atom(space.id(i).to_string()), 1))
            .collect();
        Self {
            points,
            is_simple: true,
            is_hard_core: field.is_hard_core(space),
        }
    }

    /// Builds from per-atom counts; repeated atoms become multiplicities.
    pub fn from_atom_counts(space: &FiniteMetricSpace, counts: &[u32]) -> Self {
        let mut points = Vec::new();
        let mut simple = true;
        let mut occupied = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 {
                points.push((Location::Atom(space.id(i).to_string()), c));
                occupied.push(i);
                if c > 1 {
                    simple = false;
                }
            }
        }
        let mut hard = simple;
        'outer: for (k, &i) in occupied.iter().enumerate() {
            if !hard {
                break;
            }
            for &j in &occupied[k + 1..] {
                if space.distance(i, j) < 1.0 {
                    hard = false;
                    break 'outer;
                }
            }
        }
        Self {
            points,
            is_simple: simple,
            is_hard_core: hard,
        }
    }

    /// Builds from continuum coordinates (all multiplicity one).
    pub fn from_coords(coords: Vec<Vec<f64>>) -> Self {
        let mut hard = true;
        'outer: for (k, a) in coords.iter().enumerate() {
            for b in &coords[k + 1..] {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                if sq < 1.0 {
                    hard = false;
                    break 'outer;
                }
            }
        }
        Self {
            points: coords.into_iter().map(|c| (Location::Coord(c), 1)).collect(),
            is_simple: true,
            is_hard_core: hard,
        }
    }

    pub fn total_points(&self) -> u64 {
        self.points.iter().map(|(_, c)| *c as u64).sum()
    }
}

/// A repeatable occupancy-field sampler over one space.
pub trait FieldSampler {
    fn space(&self) -> &FiniteMetricSpace;

    /// One draw from the given stream. Errors signal a violated
    /// precondition (e.g. a boundary denominator), not randomness.
    fn sample(&self, rng: &mut ChaCha12Rng) -> Result<BinaryField>;
}

/// Independent thinning of an occupancy field: site `i` survives with
/// probability `retention[i]`.
pub fn thin_field(
    field: &BinaryField,
    retention: &[f64],
    rng: &mut ChaCha12Rng,
) -> Result<BinaryField> {
    if retention.len() != field.len() {
        return Err(Error::MeasureSpaceMismatch {
            expected: field.len(),
            found: retention.len(),
        });
    }
    for (i, &p) in retention.iter().enumerate() {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "retention probability {p} at point #{i} is outside [0, 1]"
            )));
        }
    }
    let mut out = *field;
    for i in 0..field.len() {
        if field.occupied(i) {
            // p == 1 keeps deterministically because random() < 1 always.
            let keep = if retention[i] == 1.0 {
                true
            } else {
                rng.random::<f64>() < retention[i]
            };
            if !keep {
                out.mask &= !(1u128 << i);
            }
        }
    }
    Ok(out)
}

/// A sampler composed with an independent thinning.
pub struct Thinned<S> {
    base: S,
    retention: Vec<f64>,
}

impl<S: FieldSampler> Thinned<S> {
    pub fn new(base: S, retention: Vec<f64>) -> Result<Self> {
        if retention.len() != base.space().len() {
            return Err(Error::MeasureSpaceMismatch {
                expected: base.space().len(),
                found: retention.len(),
            });
        }
        for &p in &retention {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "retention probability {p} is outside [0, 1]"
                )));
            }
        }
        Ok(Self { base, retention })
    }
}

impl<S: FieldSampler> FieldSampler for Thinned<S> {
    fn space(&self) -> &FiniteMetricSpace {
        self.base.space()
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> Result<BinaryField> {
        let field = self.base.sample(rng)?;
        thin_field(&field, &self.retention, rng)
    }
}

/// One statistic to estimate from sampled fields.
#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    /// Frequency of the region containing no occupied point.
    Avoidance(RegionSet),
    /// Occupancy frequency of one point.
    Intensity(usize),
    /// Mean falling-factorial `ξ(S)·(ξ(S)-1)···(ξ(S)-n+1)` of the occupied
    /// count in the region.
    FactorialMoment(RegionSet, u32),
    /// `|P(A empty, B empty) - P(A empty)·P(B empty)|` for regions at
    /// distance >= 1; zero in expectation for 1-dependent fields.
    Dependence(RegionSet, RegionSet),
    /// Per-draw margin of the avoidance inequality satisfied by every
    /// 1-dependent process: mean of
    /// `1[A∪B empty] - 1[B empty] + Σ_{x∈A\B} m_x·1[B\U(x) empty]`,
    /// non-negative in expectation. `A` must be unit-diameter; the masses
    /// come from the intensity measure passed to [`empirical_stats`].
    OneDependentMargin { a: RegionSet, b: RegionSet },
}

impl Query {
    pub fn kind(&self) -> &'static str {
        match self {
            Query::Avoidance(_) => "avoidance",
            Query::Intensity(_) => "intensity",
            Query::FactorialMoment(..) => "factorial_moment",
            Query::Dependence(..) => "dependence",
            Query::OneDependentMargin { .. } => "one_dependent_margin",
        }
    }

    /// Human-readable arguments, for reports.
    pub fn describe(&self, space: &FiniteMetricSpace) -> String {
        let ids = |r: &RegionSet| r.ids(space).join(" ");
        match self {
            Query::Avoidance(r) => format!("[{}]", ids(r)),
            Query::Intensity(i) => space.id(*i).to_string(),
            Query::FactorialMoment(r, n) => format!("[{}] order={n}", ids(r)),
            Query::Dependence(a, b) => format!("[{}] | [{}]", ids(a), ids(b)),
            Query::OneDependentMargin { a, b } => format!("[{}] given [{}]", ids(a), ids(b)),
        }
    }
}

/// Estimate and standard error for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub query: Query,
    pub estimate: f64,
    pub std_error: f64,
}

/// Aggregated empirical statistics from repeated sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub results: Vec<QueryResult>,
    pub n_samples: u64,
    pub seed: u64,
    pub rng_family: &'static str,
}

enum Accumulator {
    Count {
        hits: u64,
    },
    Moment {
        sum: f64,
        sum_sq: f64,
    },
    Table {
        both: u64,
        a_only: u64,
        b_only: u64,
    },
    Margin {
        masses: Vec<(usize, f64, RegionSet)>,
        union_mask: RegionSet,
        sum: f64,
        sum_sq: f64,
    },
}

fn falling_factorial(k: u32, order: u32) -> f64 {
    let mut v = 1.0;
    for i in 0..order {
        v *= k as f64 - i as f64;
    }
    v
}

/// Runs `n_samples` independent draws (substream per draw) and estimates
/// each query. `intensity` supplies the masses for
/// [`Query::OneDependentMargin`]; other queries ignore it.
pub fn empirical_stats<S: FieldSampler + ?Sized>(
    sampler: &S,
    n_samples: u64,
    seed: u64,
    queries: &[Query],
    intensity: Option<&AtomicMeasure>,
) -> Result<SampleReport> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    let space = sampler.space();
    let mut accs = Vec::with_capacity(queries.len());
    for q in queries {
        let acc = match q {
            Query::Avoidance(_) | Query::Intensity(_) => Accumulator::Count { hits: 0 },
            Query::FactorialMoment(..) => Accumulator::Moment {
                sum: 0.0,
                sum_sq: 0.0,
            },
            Query::Dependence(a, b) => {
                let d = region_distance(space, *a, *b);
                if d < 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "dependence regions are at distance {d} < 1"
                    )));
                }
                Accumulator::Table {
                    both: 0,
                    a_only: 0,
                    b_only: 0,
                }
            }
            Query::OneDependentMargin { a, b } => {
                if !a.is_unit_diameter(space) {
                    return Err(Error::InvalidParameter(
                        "margin query needs a unit-diameter region A".into(),
                    ));
                }
                let measure = intensity.ok_or_else(|| {
                    Error::InvalidParameter(
                        "margin query needs the intensity measure of the process".into(),
                    )
                })?;
                measure.check_space(space)?;
                let masses = a
                    .difference(*b)
                    .indices()
                    .map(|x| {
                        let cleared = b.difference(space.unit_sphere_at(x));
                        (x, measure.mass(x), cleared)
                    })
                    .collect();
                Accumulator::Margin {
                    masses,
                    union_mask: a.union(*b),
                    sum: 0.0,
                    sum_sq: 0.0,
                }
            }
        };
        accs.push(acc);
    }

    for i in 0..n_samples {
        let mut rng = rng::substream(seed, i);
        let field = sampler.sample(&mut rng)?;
        for (q, acc) in queries.iter().zip(&mut accs) {
            match (q, acc) {
                (Query::Avoidance(r), Accumulator::Count { hits }) => {
                    if field.avoids(*r) {
                        *hits += 1;
                    }
                }
                (Query::Intensity(i), Accumulator::Count { hits }) => {
                    if field.occupied(*i) {
                        *hits += 1;
                    }
                }
                (Query::FactorialMoment(r, order), Accumulator::Moment { sum, sum_sq }) => {
                    let v = falling_factorial(field.count_in(*r), *order);
                    *sum += v;
                    *sum_sq += v * v;
                }
                (
                    Query::Dependence(a, b),
                    Accumulator::Table {
                        both,
                        a_only,
                        b_only,
                    },
                ) => {
                    let ea = field.avoids(*a);
                    let eb = field.avoids(*b);
                    match (ea, eb) {
                        (true, true) => *both += 1,
                        (true, false) => *a_only += 1,
                        (false, true) => *b_only += 1,
                        (false, false) => {}
                    }
                }
                (
                    Query::OneDependentMargin { b, .. },
                    Accumulator::Margin {
                        masses,
                        union_mask,
                        sum,
                        sum_sq,
                    },
                ) => {
                    let mut y = 0.0;
                    if field.avoids(*union_mask) {
                        y += 1.0;
                    }
                    if field.avoids(*b) {
                        y -= 1.0;
                    }
                    for (_, m, cleared) in masses.iter() {
                        if field.avoids(*cleared) {
                            y += m;
                        }
                    }
                    *sum += y;
                    *sum_sq += y * y;
                }
                _ => unreachable!("accumulator built from the same query list"),
            }
        }
    }

    let n = n_samples as f64;
    let results = queries
        .iter()
        .zip(accs)
        .map(|(q, acc)| {
            let (estimate, std_error) = match acc {
                Accumulator::Count { hits } => {
                    let p = hits as f64 / n;
                    (p, bernoulli_stderr(p, n_samples))
                }
                Accumulator::Moment { sum, sum_sq } => mean_stderr(sum, sum_sq, n_samples),
                Accumulator::Table {
                    both,
                    a_only,
                    b_only,
                } => dependence_stat(both, a_only, b_only, n_samples),
                Accumulator::Margin { sum, sum_sq, .. } => mean_stderr(sum, sum_sq, n_samples),
            };
            QueryResult {
                query: q.clone(),
                estimate,
                std_error,
            }
        })
        .collect();

    Ok(SampleReport {
        results,
        n_samples,
        seed,
        rng_family: rng::RNG_FAMILY,
    })
}

/// `|cov(1[A empty], 1[B empty])|` with the plug-in standard error of the
/// sample covariance.
fn dependence_stat(both: u64, a_only: u64, b_only: u64, n_samples: u64) -> (f64, f64) {
    let n = n_samples as f64;
    let p11 = both as f64 / n;
    let pa = (both + a_only) as f64 / n;
    let pb = (both + b_only) as f64 / n;
    let cov = p11 - pa * pb;
    // E[((X - pa)(Y - pb) - cov)^2] from the 2x2 table.
    let mut m = 0.0;
    let cells = [
        (both as f64, (1.0 - pa) * (1.0 - pb)),
        (a_only as f64, (1.0 - pa) * (0.0 - pb)),
        (b_only as f64, (0.0 - pa) * (1.0 - pb)),
        (
            (n_samples - both - a_only - b_only) as f64,
            (0.0 - pa) * (0.0 - pb),
        ),
    ];
    for (count, xy) in cells {
        let d = xy - cov;
        m += count * d * d;
    }
    let se = (m / n / n).sqrt();
    (cov.abs(), se)
}
