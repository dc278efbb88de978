//! The avoidance generating function `Z` and its derived quantities.
//!
//! On an atomic space, `Z(B, M)` collapses to the signed independent-set sum
//! `Σ_{I ⊆ B independent} Π_{x ∈ I} (-m_x)` over the strict unit graph
//! (tuples with a repeated atom or a pair at distance < 1 vanish). Two
//! routes compute it:
//!
//! * `Recursion`: the deletion identity `Z(S) = Z(S \ {x}) - m_x · Z(S \ U(x))`
//!   with subset-bitmask memoisation and the lowest-id point as pivot;
//! * `Enumeration`: a direct sum over independent sets, kept as the
//!   brute-force oracle for the recursion.
//!
//! `Z(B, -M)` (all signs positive) is the hard-sphere partition function.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::Error;
use crate::measure::AtomicMeasure;
use crate::numeric::KahanSum;
use crate::sim::rng::substream;
use crate::space::{full_mask, BoxRegion, FiniteMetricSpace, RegionSet};
use crate::Result;

/// Size limits for the exact evaluators.
#[derive(Debug, Clone, Copy)]
pub struct EvalLimits {
    /// Maximum region size for the memoised recursion (hard cap 128).
    pub recursion_points: usize,
    /// Maximum region size for the independent-set enumeration oracle.
    pub enumeration_points: usize,
    /// Maximum space size for full-subset phase scans.
    pub phase_points: usize,
}

impl Default for EvalLimits {
    fn default() -> Self {
        Self {
            recursion_points: 24,
            enumeration_points: 20,
            phase_points: 24,
        }
    }
}

impl EvalLimits {
    /// Limits opened up to the bitmask hard cap; memory use grows with the
    /// number of distinct subsets the recursion actually visits.
    pub fn relaxed() -> Self {
        Self {
            recursion_points: crate::space::MAX_POINTS,
            enumeration_points: 24,
            phase_points: 24,
        }
    }
}

/// Which exact route to use for `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZMethod {
    Recursion,
    Enumeration,
}

/// Phase of an intensity measure on a finite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Some atom has mass > 1: no simple point process exists.
    Empty,
    /// Some subset has `Z < 0`: a vanishing avoidance probability exists.
    Zero,
    /// `Z >= 0` everywhere with equality somewhere.
    ShBoundary,
    /// `Z > 0` on every subset.
    Positive,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Empty => "EMPTY",
            Phase::Zero => "ZERO",
            Phase::ShBoundary => "SH_BOUNDARY",
            Phase::Positive => "POSITIVE",
        }
    }
}

/// Classification result with a witness region where the defining condition
/// bites (the colex-first such subset; none for `Positive`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLabel {
    pub phase: Phase,
    pub witness: Option<RegionSet>,
    /// For `Empty` the offending mass, otherwise the witness `Z` value.
    pub witness_value: Option<f64>,
}

/// Memoised evaluator for `Z(S)` over subsets of one space with fixed masses.
///
/// `sign = -1` gives the avoidance function, `sign = +1` the hard-sphere
/// partition function. The cache is scoped to this value; spawn one per
/// top-level call (or per sampler draw).
pub(crate) struct ZEngine<'a> {
    space: &'a FiniteMetricSpace,
    masses: &'a [f64],
    sign: f64,
    memo: HashMap<u128, f64>,
}

impl<'a> ZEngine<'a> {
    pub(crate) fn avoidance(space: &'a FiniteMetricSpace, masses: &'a [f64]) -> Self {
        Self::new(space, masses, -1.0)
    }

    pub(crate) fn partition(space: &'a FiniteMetricSpace, masses: &'a [f64]) -> Self {
        Self::new(space, masses, 1.0)
    }

    fn new(space: &'a FiniteMetricSpace, masses: &'a [f64], sign: f64) -> Self {
        debug_assert_eq!(space.len(), masses.len());
        Self {
            space,
            masses,
            sign,
            memo: HashMap::new(),
        }
    }

    pub(crate) fn value(&mut self, mask: u128) -> f64 {
        if mask == 0 {
            return 1.0;
        }
        if let Some(&v) = self.memo.get(&mask) {
            return v;
        }
        // Deterministic pivot: the present point with the smallest id.
        let pivot = self
            .space
            .id_order()
            .iter()
            .copied()
            .find(|&i| mask >> i & 1 == 1)
            .expect("non-empty mask");
        let without_pivot = self.value(mask & !(1u128 << pivot));
        let without_ball = self.value(mask & !self.space.ball_mask(pivot));
        let v = without_pivot + self.sign * self.masses[pivot] * without_ball;
        debug_assert!(
            v.abs() <= mask_mass(self.masses, mask).exp() * (1.0 + 1e-9) + 1e-9,
            "|Z| exceeded exp(M(B))"
        );
        self.memo.insert(mask, v);
        v
    }
}

fn mask_mass(masses: &[f64], mask: u128) -> f64 {
    let mut m = mask;
    let mut total = 0.0;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        total += masses[i];
    }
    total
}

/// Direct signed sum over independent sets; the brute-force oracle.
fn enumerate_independent_sets(
    space: &FiniteMetricSpace,
    masses: &[f64],
    region: u128,
    sign: f64,
) -> f64 {
    fn dfs(
        space: &FiniteMetricSpace,
        masses: &[f64],
        sign: f64,
        allowed: u128,
        acc: f64,
        sum: &mut KahanSum,
    ) {
        sum.add(acc);
        let mut m = allowed;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let above = if v + 1 >= 128 {
                0
            } else {
                !full_mask(v + 1)
            };
            let next = allowed & !space.ball_mask(v) & above;
            dfs(space, masses, sign, next, acc * sign * masses[v], sum);
        }
    }
    let mut sum = KahanSum::new();
    dfs(space, masses, sign, region, 1.0, &mut sum);
    sum.value()
}

fn check_region_size(what: &'static str, points: usize, limit: usize) -> Result<()> {
    if points > limit {
        return Err(Error::RegionTooLarge {
            what,
            points,
            limit,
        });
    }
    Ok(())
}

/// Evaluates `Z(region, M)` with default size limits.
pub fn z_exact(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    region: RegionSet,
    method: ZMethod,
) -> Result<f64> {
    z_exact_with(space, measure, region, method, &EvalLimits::default())
}

/// Evaluates `Z(region, M)`; `Z(∅) = 1`.
pub fn z_exact_with(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    region: RegionSet,
    method: ZMethod,
    limits: &EvalLimits,
) -> Result<f64> {
    measure.check_space(space)?;
    match method {
        ZMethod::Recursion => {
            check_region_size("Z recursion", region.len(), limits.recursion_points)?;
            let mut engine = ZEngine::avoidance(space, measure.masses());
            Ok(engine.value(region.mask()))
        }
        ZMethod::Enumeration => {
            check_region_size("Z enumeration", region.len(), limits.enumeration_points)?;
            Ok(enumerate_independent_sets(
                space,
                measure.masses(),
                region.mask(),
                -1.0,
            ))
        }
    }
}

/// The ratio `z(A, B) = Z(A ∪ B) / Z(B)`; requires `Z(B) > 0`.
pub fn z_ratio(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    a: RegionSet,
    b: RegionSet,
) -> Result<f64> {
    z_ratio_with(space, measure, a, b, &EvalLimits::default())
}

/// As [`z_ratio`], with explicit limits.
pub fn z_ratio_with(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    a: RegionSet,
    b: RegionSet,
    limits: &EvalLimits,
) -> Result<f64> {
    measure.check_space(space)?;
    let union = a.union(b);
    check_region_size("Z recursion", union.len(), limits.recursion_points)?;
    let mut engine = ZEngine::avoidance(space, measure.masses());
    let zb = engine.value(b.mask());
    if zb <= 0.0 {
        return Err(Error::ZeroDenominator { value: zb });
    }
    Ok(engine.value(union.mask()) / zb)
}

/// The hard-sphere partition function `Z(region, -M) = Σ_I Π m_x >= 1`.
pub fn hard_sphere_partition(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    region: RegionSet,
) -> Result<f64> {
    hard_sphere_partition_with(space, measure, region, &EvalLimits::default())
}

/// As [`hard_sphere_partition`], with explicit limits.
pub fn hard_sphere_partition_with(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    region: RegionSet,
    limits: &EvalLimits,
) -> Result<f64> {
    measure.check_space(space)?;
    check_region_size("partition function", region.len(), limits.recursion_points)?;
    let mut engine = ZEngine::partition(space, measure.masses());
    let v = engine.value(region.mask());
    debug_assert!(v >= 1.0 - 1e-12);
    Ok(v)
}

/// Classifies an intensity measure by scanning every subset in colex order.
///
/// `EMPTY` if some mass exceeds 1; otherwise `POSITIVE` if `Z > 0`
/// everywhere, `SH_BOUNDARY` if `Z >= 0` with equality somewhere, `ZERO`
/// otherwise. Comparisons against zero are exact; the witness is the first
/// subset (in colex order over point indices) where the condition bites.
pub fn classify_phase(space: &FiniteMetricSpace, measure: &AtomicMeasure) -> Result<PhaseLabel> {
    classify_phase_with(space, measure, &EvalLimits::default())
}

/// As [`classify_phase`], with explicit limits.
pub fn classify_phase_with(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    limits: &EvalLimits,
) -> Result<PhaseLabel> {
    measure.check_space(space)?;
    if let Some(i) = measure.index_above_one() {
        return Ok(PhaseLabel {
            phase: Phase::Empty,
            witness: Some(RegionSet::from_indices(space, &[i])?),
            witness_value: Some(measure.mass(i)),
        });
    }
    let n = space.len();
    check_region_size("phase classification", n, limits.phase_points)?;
    let masses = measure.masses();
    let balls: Vec<usize> = (0..n)
        .map(|i| (space.ball_mask(i) & full_mask(n)) as usize)
        .collect();
    let size = 1usize << n;
    let mut z = vec![0.0f64; size];
    z[0] = 1.0;
    let mut first_zero: Option<usize> = None;
    for mask in 1..size {
        let x = mask.trailing_zeros() as usize;
        let v = z[mask & (mask - 1)] - masses[x] * z[mask & !balls[x]];
        if v < 0.0 {
            return Ok(PhaseLabel {
                phase: Phase::Zero,
                witness: Some(RegionSet::from_mask(mask as u128)),
                witness_value: Some(v),
            });
        }
        if v == 0.0 && first_zero.is_none() {
            first_zero = Some(mask);
        }
        z[mask] = v;
    }
    Ok(match first_zero {
        Some(mask) => PhaseLabel {
            phase: Phase::ShBoundary,
            witness: Some(RegionSet::from_mask(mask as u128)),
            witness_value: Some(0.0),
        },
        None => PhaseLabel {
            phase: Phase::Positive,
            witness: None,
            witness_value: None,
        },
    })
}

/// Coefficients `a_0..a_k` of the polynomial `λ ↦ Z(region, λM)`.
///
/// `a_0 = 1`; `a_k` is `(-1)^k` times the mass-weighted count of independent
/// `k`-subsets of the region.
pub fn independence_polynomial(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    region: RegionSet,
) -> Result<Vec<f64>> {
    independence_polynomial_with(space, measure, region, &EvalLimits::default())
}

/// As [`independence_polynomial`], with explicit limits.
pub fn independence_polynomial_with(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    region: RegionSet,
    limits: &EvalLimits,
) -> Result<Vec<f64>> {
    measure.check_space(space)?;
    check_region_size("polynomial recursion", region.len(), limits.recursion_points)?;

    fn go(
        space: &FiniteMetricSpace,
        masses: &[f64],
        mask: u128,
        memo: &mut HashMap<u128, Vec<f64>>,
    ) -> Vec<f64> {
        if mask == 0 {
            return vec![1.0];
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let pivot = space
            .id_order()
            .iter()
            .copied()
            .find(|&i| mask >> i & 1 == 1)
            .expect("non-empty mask");
        let a = go(space, masses, mask & !(1u128 << pivot), memo);
        let b = go(space, masses, mask & !space.ball_mask(pivot), memo);
        let mut out = vec![0.0; a.len().max(b.len() + 1)];
        out[..a.len()].copy_from_slice(&a);
        for (k, &bk) in b.iter().enumerate() {
            out[k + 1] -= masses[pivot] * bk;
        }
        memo.insert(mask, out.clone());
        out
    }

    let mut memo = HashMap::new();
    Ok(go(space, measure.masses(), region.mask(), &mut memo))
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Smallest `λ` with `Z(region, λM) = 0`, to absolute tolerance `tol`.
///
/// The polynomial `λ ↦ Z(region, λM)` is continuous but need not be
/// monotone, so the first sign change is located by a forward scan (refined
/// up to 10^5 steps if needed) and then pinned down by bisection.
pub fn critical_lambda(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    region: RegionSet,
    tol: f64,
) -> Result<f64> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} must be positive"
        )));
    }
    measure.check_space(space)?;
    if measure.of(region) <= 0.0 {
        return Err(Error::ZeroMassRegion);
    }
    let coeffs = independence_polynomial(space, measure, region)?;
    // The heaviest atom alone reaches zero at 1/max mass, so the first root
    // of the region is at most that.
    let hi = 1.0 / measure.max_mass_in(region);
    for steps in [1_000u32, 10_000, 100_000] {
        let mut prev = 0.0;
        for k in 1..=steps {
            let lambda = hi * k as f64 / steps as f64;
            if horner(&coeffs, lambda) <= 0.0 {
                return Ok(bisect_root(&coeffs, prev, lambda, tol));
            }
            prev = lambda;
        }
    }
    Err(Error::NumericalAbort(
        "no sign change of Z(region, λM) located in (0, 1/max mass]".into(),
    ))
}

fn bisect_root(coeffs: &[f64], mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if horner(coeffs, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Iterated set-difference operator applied to `Z`, in canonical form:
/// `Σ_{I ⊆ [n]} (-1)^{|I|} Z(B ∪ ∪_{i∈I} A_i)`.
pub fn delta_z(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    a_list: &[RegionSet],
    b: RegionSet,
) -> Result<f64> {
    delta_z_with(space, measure, a_list, b, &EvalLimits::default())
}

/// As [`delta_z`], with explicit limits.
pub fn delta_z_with(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    a_list: &[RegionSet],
    b: RegionSet,
    limits: &EvalLimits,
) -> Result<f64> {
    measure.check_space(space)?;
    let n = a_list.len();
    if n > 16 {
        return Err(Error::InvalidParameter(format!(
            "difference operator of order {n} exceeds the limit of 16"
        )));
    }
    let everything = a_list.iter().fold(b, |acc, a| acc.union(*a));
    check_region_size("Z recursion", everything.len(), limits.recursion_points)?;
    let mut engine = ZEngine::avoidance(space, measure.masses());
    let mut sum = KahanSum::new();
    for subset in 0..(1u32 << n) {
        let mut mask = b.mask();
        for (i, a) in a_list.iter().enumerate() {
            if subset >> i & 1 == 1 {
                mask |= a.mask();
            }
        }
        let sign = if subset.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        sum.add(sign * engine.value(mask));
    }
    Ok(sum.value())
}

/// One row of a fugacity scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub lambda: f64,
    pub z: f64,
    pub phase: Phase,
}

/// Evaluates `Z(region, λM)` and classifies `λM` for each `λ` in the grid.
pub fn phase_scan(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    region: RegionSet,
    lambdas: &[f64],
) -> Result<Vec<ScanRow>> {
    let coeffs = independence_polynomial(space, measure, region)?;
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "scan value {lambda} must be finite and >= 0"
            )));
        }
        let scaled = measure.scaled(lambda)?;
        let label = classify_phase(space, &scaled)?;
        rows.push(ScanRow {
            lambda,
            z: horner(&coeffs, lambda),
            phase: label.phase,
        });
    }
    Ok(rows)
}

/// Monte-Carlo estimate of `Z` for a homogeneous intensity on a continuum
/// box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    /// Total mass `λ · volume` of the box.
    pub total_mass: f64,
    /// Set when the `exp(M(B))` variance inflation makes the estimator
    /// unreliable (total mass above 5).
    pub high_mass_warning: bool,
}

/// Unbiased Poisson-functional estimator of `Z(B, λ·Lebesgue)` on a box:
/// `e^{M(B)} · mean[(-1)^N · h]` over Poisson samples, where `h` indicates a
/// 1-hard-core draw. Diffuse intensities only; atoms have no such
/// representation.
pub fn mc_estimate_z(
    bounds: &BoxRegion,
    lambda: f64,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "intensity {lambda} must be finite and >= 0"
        )));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    let dim = bounds.dim();
    let total_mass = lambda * bounds.volume();
    let poisson = if total_mass > 0.0 {
        Some(Poisson::new(total_mass).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let mut plus: u64 = 0;
    let mut minus: u64 = 0;
    let mut points: Vec<f64> = Vec::new();
    for i in 0..n_samples {
        let mut rng = substream(seed, i);
        let n_points = match &poisson {
            Some(p) => p.sample(&mut rng) as usize,
            None => 0,
        };
        points.clear();
        for _ in 0..n_points {
            for d in 0..dim {
                let u: f64 = rng.random();
                points.push(bounds.lower()[d] + u * (bounds.upper()[d] - bounds.lower()[d]));
            }
        }
        let mut hard_core = true;
        'pairs: for a in 0..n_points {
            for b in (a + 1)..n_points {
                let mut sq = 0.0;
                for d in 0..dim {
                    let diff = points[a * dim + d] - points[b * dim + d];
                    sq += diff * diff;
                }
                if sq < 1.0 {
                    hard_core = false;
                    break 'pairs;
                }
            }
        }
        if hard_core {
            if n_points % 2 == 0 {
                plus += 1;
            } else {
                minus += 1;
            }
        }
    }
    let n = n_samples as f64;
    let mean = (plus as f64 - minus as f64) / n;
    let scale = total_mass.exp();
    let std_error = if n_samples > 1 {
        let sum_sq = (plus + minus) as f64;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        scale * (var / n).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        estimate: scale * mean,
        std_error,
        n_samples,
        total_mass,
        high_mass_warning: total_mass > 5.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_space(d: f64) -> FiniteMetricSpace {
        FiniteMetricSpace::from_coords(vec!["a".into(), "b".into()], vec![vec![0.0], vec![d]])
            .unwrap()
    }

    /// Three collinear atoms: ends 0.5 from the middle, 1.0 apart (far).
    fn path3(mass: f64) -> (FiniteMetricSpace, AtomicMeasure) {
        let s = FiniteMetricSpace::from_coords(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0], vec![0.5], vec![1.0]],
        )
        .unwrap();
        let m = AtomicMeasure::uniform(&s, mass).unwrap();
        (s, m)
    }

    #[test]
    fn single_atom() {
        let s = FiniteMetricSpace::from_distances(vec!["x".into()], &[vec![0.0]], true).unwrap();
        let m = AtomicMeasure::new(&s, vec![0.4]).unwrap();
        let r = s.full_region();
        for method in [ZMethod::Recursion, ZMethod::Enumeration] {
            assert!((z_exact(&s, &m, r, method).unwrap() - 0.6).abs() < 1e-15);
        }
        assert_eq!(
            z_exact(&s, &m, RegionSet::EMPTY, ZMethod::Recursion).unwrap(),
            1.0
        );
    }

    #[test]
    fn far_pair_multiplies() {
        let s = pair_space(1.5);
        let m = AtomicMeasure::new(&s, vec![0.3, 0.5]).unwrap();
        for method in [ZMethod::Recursion, ZMethod::Enumeration] {
            let z = z_exact(&s, &m, s.full_region(), method).unwrap();
            assert!((z - 0.35).abs() < 1e-15, "z = {z}");
        }
    }

    #[test]
    fn path3_value() {
        let (s, m) = path3(0.2);
        for method in [ZMethod::Recursion, ZMethod::Enumeration] {
            let z = z_exact(&s, &m, s.full_region(), method).unwrap();
            // Independent sets: ∅, three singletons, the far end pair.
            assert!((z - 0.44).abs() < 1e-15, "z = {z}");
        }
    }

    #[test]
    fn region_size_limits() {
        let (s, m) = path3(0.2);
        let tight = EvalLimits {
            recursion_points: 2,
            enumeration_points: 2,
            phase_points: 2,
        };
        for method in [ZMethod::Recursion, ZMethod::Enumeration] {
            assert!(matches!(
                z_exact_with(&s, &m, s.full_region(), method, &tight),
                Err(Error::RegionTooLarge { .. })
            ));
        }
        assert!(matches!(
            classify_phase_with(&s, &m, &tight),
            Err(Error::RegionTooLarge { .. })
        ));
    }

    #[test]
    fn ratio_examples() {
        let (s, m) = path3(0.2);
        assert_eq!(
            z_ratio(&s, &m, RegionSet::EMPTY, RegionSet::EMPTY).unwrap(),
            1.0
        );
        let mid = RegionSet::from_ids(&s, &["b"]).unwrap();
        let ends = RegionSet::from_ids(&s, &["a", "c"]).unwrap();
        let r = z_ratio(&s, &m, mid, ends).unwrap();
        assert!((r - 0.44 / 0.64).abs() < 1e-15, "r = {r}");

        let single =
            FiniteMetricSpace::from_distances(vec!["x".into()], &[vec![0.0]], true).unwrap();
        let sm = AtomicMeasure::new(&single, vec![0.4]).unwrap();
        let x = single.full_region();
        assert!((z_ratio(&single, &sm, x, RegionSet::EMPTY).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn ratio_zero_denominator() {
        let s = pair_space(0.5);
        let m = AtomicMeasure::new(&s, vec![0.6, 0.6]).unwrap();
        let err = z_ratio(&s, &m, RegionSet::EMPTY, s.full_region()).unwrap_err();
        assert!(matches!(err, Error::ZeroDenominator { .. }));
    }

    #[test]
    fn classify_examples() {
        let single =
            FiniteMetricSpace::from_distances(vec!["x".into()], &[vec![0.0]], true).unwrap();
        let label =
            classify_phase(&single, &AtomicMeasure::new(&single, vec![1.2]).unwrap()).unwrap();
        assert_eq!(label.phase, Phase::Empty);
        assert_eq!(label.witness.unwrap().ids(&single), vec!["x"]);

        let s = pair_space(0.5);
        let zero = classify_phase(&s, &AtomicMeasure::new(&s, vec![0.6, 0.6]).unwrap()).unwrap();
        assert_eq!(zero.phase, Phase::Zero);
        assert_eq!(zero.witness.unwrap().ids(&s), vec!["a", "b"]);
        assert!((zero.witness_value.unwrap() + 0.2).abs() < 1e-15);

        let sh = classify_phase(&s, &AtomicMeasure::new(&s, vec![0.5, 0.5]).unwrap()).unwrap();
        assert_eq!(sh.phase, Phase::ShBoundary);
        assert_eq!(sh.witness.unwrap().ids(&s), vec!["a", "b"]);

        let pos = classify_phase(&s, &AtomicMeasure::new(&s, vec![0.4, 0.4]).unwrap()).unwrap();
        assert_eq!(pos.phase, Phase::Positive);
        assert!(pos.witness.is_none());
    }

    #[test]
    fn critical_lambda_examples() {
        let single =
            FiniteMetricSpace::from_distances(vec!["x".into()], &[vec![0.0]], true).unwrap();
        let m = AtomicMeasure::uniform(&single, 1.0).unwrap();
        let l = critical_lambda(&single, &m, single.full_region(), 1e-10).unwrap();
        assert!((l - 1.0).abs() < 1e-9, "l = {l}");

        let s = pair_space(0.5);
        let m = AtomicMeasure::uniform(&s, 1.0).unwrap();
        let l = critical_lambda(&s, &m, s.full_region(), 1e-10).unwrap();
        assert!((l - 0.5).abs() < 1e-9, "l = {l}");

        let (s, m) = path3(1.0);
        let l = critical_lambda(&s, &m, s.full_region(), 1e-10).unwrap();
        let expected = (3.0 - 5.0f64.sqrt()) / 2.0;
        assert!((l - expected).abs() < 1e-9, "l = {l}");

        let zero = AtomicMeasure::zero(&s).unwrap();
        assert!(matches!(
            critical_lambda(&s, &zero, s.full_region(), 1e-10),
            Err(Error::ZeroMassRegion)
        ));
    }

    #[test]
    fn polynomial_matches_direct_evaluation() {
        let (s, m) = path3(0.7);
        let coeffs = independence_polynomial(&s, &m, s.full_region()).unwrap();
        for lambda in [0.0, 0.3, 0.9, 1.7] {
            let direct = z_exact(
                &s,
                &m.scaled(lambda).unwrap(),
                s.full_region(),
                ZMethod::Enumeration,
            )
            .unwrap();
            assert!((horner(&coeffs, lambda) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_examples() {
        let single =
            FiniteMetricSpace::from_distances(vec!["x".into()], &[vec![0.0]], true).unwrap();
        let m = AtomicMeasure::new(&single, vec![0.35]).unwrap();
        let x = single.full_region();
        // Empty list: the identity operator.
        assert!(
            (delta_z(&single, &m, &[], x).unwrap() - 0.65).abs() < 1e-15
        );
        // Single difference at {x} from ∅: 1 - (1 - m) = m.
        assert!(
            (delta_z(&single, &m, &[x], RegionSet::EMPTY).unwrap() - 0.35).abs() < 1e-15
        );

        // Unit-diameter union forces the second difference to vanish.
        let tight = FiniteMetricSpace::from_coords(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0], vec![0.2], vec![0.4]],
        )
        .unwrap();
        let tm = AtomicMeasure::new(&tight, vec![0.2, 0.3, 0.1]).unwrap();
        let a1 = RegionSet::from_ids(&tight, &["a"]).unwrap();
        let a2 = RegionSet::from_ids(&tight, &["b"]).unwrap();
        let b = RegionSet::from_ids(&tight, &["c"]).unwrap();
        let d = delta_z(&tight, &tm, &[a1, a2], b).unwrap();
        assert!(d.abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn phase_scan_rows() {
        let s = pair_space(0.5);
        let m = AtomicMeasure::uniform(&s, 1.0).unwrap();
        let rows = phase_scan(&s, &m, s.full_region(), &[0.0, 0.4, 0.5, 0.6, 1.2]).unwrap();
        assert_eq!(rows[0].phase, Phase::Positive);
        assert_eq!(rows[1].phase, Phase::Positive);
        assert_eq!(rows[2].phase, Phase::ShBoundary);
        assert_eq!(rows[3].phase, Phase::Zero);
        assert_eq!(rows[4].phase, Phase::Empty);
        assert!((rows[2].z - 0.0).abs() < 1e-15);
        assert!((rows[1].z - 0.2).abs() < 1e-12);
    }

    #[test]
    fn hard_sphere_examples() {
        let single =
            FiniteMetricSpace::from_distances(vec!["x".into()], &[vec![0.0]], true).unwrap();
        let m = AtomicMeasure::uniform(&single, 1.0).unwrap();
        assert!(
            (hard_sphere_partition(&single, &m, single.full_region()).unwrap() - 2.0).abs()
                < 1e-15
        );

        // Unit-diameter region: at most one point fits, so 1 + N(B).
        let tight = pair_space(0.5);
        let tm = AtomicMeasure::new(&tight, vec![0.3, 0.7]).unwrap();
        assert!(
            (hard_sphere_partition(&tight, &tm, tight.full_region()).unwrap() - 2.0).abs()
                < 1e-15
        );

        let far = pair_space(2.0);
        let fm = AtomicMeasure::new(&far, vec![0.4, 1.5]).unwrap();
        let expected = 1.4 * 2.5;
        assert!(
            (hard_sphere_partition(&far, &fm, far.full_region()).unwrap() - expected).abs()
                < 1e-12
        );
    }

    #[test]
    fn mc_zero_intensity_is_exact() {
        let bounds = BoxRegion::new(vec![0.0], vec![2.0]).unwrap();
        let est = mc_estimate_z(&bounds, 0.0, 100, 7).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert!(!est.high_mass_warning);
    }

    #[test]
    fn mc_unit_diameter_box() {
        // Any two points of [0, 0.5] are closer than 1, so Z = 1 - M(B).
        let bounds = BoxRegion::new(vec![0.0], vec![0.5]).unwrap();
        let est = mc_estimate_z(&bounds, 0.4, 100_000, 20240).unwrap();
        assert!(
            (est.estimate - 0.8).abs() <= 4.0 * est.std_error,
            "estimate {} ± {}",
            est.estimate,
            est.std_error
        );
    }

    #[test]
    fn mc_input_validation() {
        let bounds = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
        assert!(mc_estimate_z(&bounds, 0.1, 0, 1).is_err());
        assert!(mc_estimate_z(&bounds, -0.1, 10, 1).is_err());
        assert!(mc_estimate_z(&bounds, 6.0, 10, 1).unwrap().high_mass_warning);
    }
}
