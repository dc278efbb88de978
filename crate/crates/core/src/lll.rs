//! Sufficient local conditions for uniform exponential lower bounds on the
//! ratio `z(A, B)`, packaged as checkable certificates.
//!
//! Four variants are provided: the symmetric condition (driven by the growth
//! bound `K`), the inflation condition (membership of `(1+α)M` in the
//! non-negative phase), the Kotecký–Preiss-style condition driven by an
//! auxiliary measure `N`, and the homogeneous Euclidean specialisation. Each
//! certificate that holds implies the measure is in the everywhere-positive
//! phase and yields a per-query lower bound on `z(A, B)`; auditing those
//! implications against exact values is the job of [`crate::audit`].

use std::f64::consts::PI;

use crate::error::Error;
use crate::measure::AtomicMeasure;
use crate::space::{
    growth_bound_k, kappa, FiniteMetricSpace, KappaMode, RegionSet, DEFAULT_KAPPA_EXACT_LIMIT,
};
use crate::zfun::{classify_phase_with, EvalLimits, Phase};
use crate::Result;

/// Cap on the all-cliques enumeration before falling back to the heuristic
/// (maximal cliques and singletons only).
const CLIQUE_ENUMERATION_CAP: usize = 200_000;

/// Which sufficient condition a certificate talks about.
#[derive(Debug, Clone)]
pub enum BoundVariant {
    /// `M(A) <= (K+1)^{K+1} / (K+2)^{K+2}` for every unit-diameter `A`.
    Symmetric {
        k: usize,
        threshold: f64,
        /// Largest mass of a unit-diameter subset (exact or an upper bound).
        max_unit_mass: f64,
        mass_exact: bool,
    },
    /// `(1+α)M` stays in the non-negative phase.
    Inflation { alpha: f64, inflated_phase: Phase },
    /// `Σ_{x∈A} m_x e^{N(U(x)\A)} <= 1 - e^{-N(A)}` for every unit-diameter
    /// `A`.
    KoteckyPreiss {
        n_measure: AtomicMeasure,
        /// Whether the stronger pointwise form
        /// `M(A) e^{N(U(x)\A)} <= 1 - e^{-N(A)}` also holds.
        strong_form_holds: bool,
        cliques_exact: bool,
    },
    /// Homogeneous intensity `λ` on `R^d`: `α` solves `λ = α e^{-αV}`.
    Euclidean {
        lambda: f64,
        alpha: f64,
        volume: f64,
        dim: usize,
    },
}

impl BoundVariant {
    pub fn name(&self) -> &'static str {
        match self {
            BoundVariant::Symmetric { .. } => "symmetric",
            BoundVariant::Inflation { .. } => "inflation",
            BoundVariant::KoteckyPreiss { .. } => "kotecky_preiss",
            BoundVariant::Euclidean { .. } => "euclidean",
        }
    }
}

/// Outcome of a condition check. When the condition holds, `bound_value`
/// turns the certificate into per-query lower bounds in `(0, 1]`; when it
/// fails, the witness names a region where it bites.
#[derive(Debug, Clone)]
pub struct BoundCertificate {
    pub variant: BoundVariant,
    pub condition_holds: bool,
    pub witness: Option<RegionSet>,
    pub witness_detail: Option<String>,
}

/// `(K+1)^{K+1} / (K+2)^{K+2}`, the unit-diameter mass threshold of the
/// symmetric condition; strictly decreasing in `K`.
pub fn symmetric_threshold(k: usize) -> f64 {
    let k1 = (k + 1) as f64;
    let k2 = (k + 2) as f64;
    k1.powi(k as i32 + 1) / k2.powi(k as i32 + 2)
}

/// Checks the symmetric condition. The heaviest unit-diameter subset is the
/// maximum-weight clique of the strict unit graph, searched exactly on
/// spaces of at most 20 points and replaced by the sound upper bound
/// `max_x M(U(x))` (flagged inexact) beyond that.
pub fn check_symmetric(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
) -> Result<BoundCertificate> {
    measure.check_space(space)?;
    let k = growth_bound_k(space)?;
    let threshold = symmetric_threshold(k);
    let (max_unit_mass, witness, mass_exact) = if space.len() <= DEFAULT_KAPPA_EXACT_LIMIT {
        let (mass, clique) = max_weight_clique(space, measure);
        (mass, RegionSet::from_mask(clique), true)
    } else {
        let mut best = 0.0;
        let mut witness = RegionSet::EMPTY;
        for i in 0..space.len() {
            let ball = space.unit_sphere_at(i);
            let mass = measure.of(ball);
            if mass > best {
                best = mass;
                witness = ball;
            }
        }
        (best, witness, false)
    };
    let condition_holds = max_unit_mass <= threshold;
    Ok(BoundCertificate {
        variant: BoundVariant::Symmetric {
            k,
            threshold,
            max_unit_mass,
            mass_exact,
        },
        condition_holds,
        witness: (!condition_holds).then_some(witness),
        witness_detail: (!condition_holds)
            .then(|| format!("unit-diameter mass {max_unit_mass} exceeds threshold {threshold}")),
    })
}

/// Checks the inflation condition with default evaluation limits.
pub fn check_inflation(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    alpha: f64,
) -> Result<BoundCertificate> {
    check_inflation_with(space, measure, alpha, &EvalLimits::default())
}

/// Checks whether `(1+α)M` stays in the non-negative phase; requires
/// `α > 0` (the bound degenerates at zero).
pub fn check_inflation_with(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    alpha: f64,
    limits: &EvalLimits,
) -> Result<BoundCertificate> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "inflation factor {alpha} must be positive"
        )));
    }
    let inflated = measure.scaled(1.0 + alpha)?;
    let label = classify_phase_with(space, &inflated, limits)?;
    let condition_holds = matches!(label.phase, Phase::Positive | Phase::ShBoundary);
    Ok(BoundCertificate {
        variant: BoundVariant::Inflation {
            alpha,
            inflated_phase: label.phase,
        },
        condition_holds,
        witness: (!condition_holds).then_some(label.witness).flatten(),
        witness_detail: (!condition_holds).then(|| {
            format!(
                "(1+α)M is {} with witness value {:?}",
                label.phase.as_str(),
                label.witness_value
            )
        }),
    })
}

/// Checks the Kotecký–Preiss-style condition for an auxiliary measure `N`
/// absolutely continuous with respect to `M` (atomically: `N` vanishes
/// wherever `M` does). Every unit-diameter subset is a clique of the strict
/// unit graph; all of them are enumerated up to a cap, beyond which only
/// maximal cliques and singletons are checked and the certificate is
/// flagged heuristic.
pub fn check_kp(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    n_measure: &AtomicMeasure,
) -> Result<BoundCertificate> {
    measure.check_space(space)?;
    n_measure.check_space(space)?;
    for i in 0..space.len() {
        if measure.mass(i) == 0.0 && n_measure.mass(i) > 0.0 {
            return Err(Error::SupportViolation {
                id: space.id(i).to_string(),
                n: n_measure.mass(i),
            });
        }
    }
    let (cliques, cliques_exact) = cliques_to_check(space);
    let mut holds = true;
    let mut strong_holds = true;
    let mut witness = None;
    let mut witness_detail = None;
    for &clique in &cliques {
        let region = RegionSet::from_mask(clique);
        let m_a = measure.of(region);
        let rhs = 1.0 - (-n_measure.of(region)).exp();
        let mut integrated = 0.0;
        for x in region.indices() {
            let outside = space.unit_sphere_at(x).difference(region);
            let factor = n_measure.of(outside).exp();
            integrated += measure.mass(x) * factor;
            if measure.mass(x) > 0.0 && m_a * factor > rhs {
                strong_holds = false;
            }
        }
        if integrated > rhs && holds {
            holds = false;
            witness = Some(region);
            witness_detail = Some(format!(
                "∫_A e^(N(U(x)\\A)) M(dx) = {integrated} > 1 - e^(-N(A)) = {rhs}"
            ));
        }
    }
    Ok(BoundCertificate {
        variant: BoundVariant::KoteckyPreiss {
            n_measure: n_measure.clone(),
            strong_form_holds: strong_holds,
            cliques_exact,
        },
        condition_holds: holds,
        witness,
        witness_detail,
    })
}

/// Volume of the unit ball in `R^d`, via the half-integer Γ recurrence.
pub fn unit_ball_volume(dim: usize) -> Result<f64> {
    if dim == 0 || dim > 20 {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} outside 1..=20"
        )));
    }
    // Γ(d/2 + 1) exactly: Γ(1/2) = √π, Γ(1) = 1, Γ(x+1) = xΓ(x).
    let twice = dim as u32 + 2;
    let even = twice.is_multiple_of(2);
    let mut gamma = if even { 1.0 } else { PI.sqrt() };
    let mut k = if even { 2 } else { 1 };
    while k + 2 <= twice {
        gamma *= k as f64 / 2.0;
        k += 2;
    }
    Ok(PI.powf(dim as f64 / 2.0) / gamma)
}

/// Solves `λ = α e^{-αV}` for `α` by bisection on `[0, 1/V]`, where the map
/// is strictly increasing with maximum `1/(eV)` at `1/V`. Returns `(α, V)`.
///
/// The defining equation is solvable only on `[0, 1/V]` even though the
/// admissible fugacities stop at `1/(eV)`; the bisection therefore runs on
/// the former interval.
pub fn euclidean_alpha(lambda: f64, dim: usize, tol: f64) -> Result<(f64, f64)> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} must be positive"
        )));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "fugacity {lambda} must be finite and >= 0"
        )));
    }
    let volume = unit_ball_volume(dim)?;
    let max_lambda = 1.0 / (std::f64::consts::E * volume);
    if lambda > max_lambda {
        return Err(Error::FugacityAboveThreshold {
            lambda,
            max: max_lambda,
        });
    }
    if lambda == 0.0 {
        return Ok((0.0, volume));
    }
    // At the admissible endpoint the equation is tangent and bisection
    // cannot separate the double root; the solution there is exactly 1/V.
    if lambda == max_lambda {
        return Ok((1.0 / volume, volume));
    }
    let f = |s: f64| s * (-s * volume).exp();
    let mut lo = 0.0;
    let mut hi = 1.0 / volume;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), volume))
}

/// Builds the Euclidean certificate; `α` doubles as a uniform bound on the
/// negative log-avoidance value per unit volume.
pub fn euclidean_certificate(lambda: f64, dim: usize, tol: f64) -> Result<BoundCertificate> {
    let (alpha, volume) = euclidean_alpha(lambda, dim, tol)?;
    Ok(BoundCertificate {
        variant: BoundVariant::Euclidean {
            lambda,
            alpha,
            volume,
            dim,
        },
        condition_holds: true,
        witness: None,
        witness_detail: None,
    })
}

/// Evaluates the certificate's lower bound on `z(A, B)`.
///
/// For the Euclidean variant the Lebesgue measure of `A \ B` is recovered
/// from a grid measure (`mass / λ`), which must be supplied.
pub fn bound_value(
    certificate: &BoundCertificate,
    space: &FiniteMetricSpace,
    a: RegionSet,
    b: RegionSet,
    grid_measure: Option<&AtomicMeasure>,
) -> Result<f64> {
    if !certificate.condition_holds {
        return Err(Error::CertificateInvalid);
    }
    let diff = a.difference(b);
    let value = match &certificate.variant {
        BoundVariant::Symmetric { k, .. } => {
            let parts = kappa(space, diff, KappaMode::Exact)?.value as i32;
            ((*k as f64 + 1.0) / (*k as f64 + 2.0)).powi(parts)
        }
        BoundVariant::Inflation { alpha, .. } => {
            let parts = kappa(space, diff, KappaMode::Exact)?.value as i32;
            (alpha / (1.0 + alpha)).powi(parts)
        }
        BoundVariant::KoteckyPreiss { n_measure, .. } => (-n_measure.of(diff)).exp(),
        BoundVariant::Euclidean { lambda, alpha, .. } => {
            let measure = grid_measure.ok_or_else(|| {
                Error::InvalidParameter(
                    "the euclidean bound needs the grid measure to recover Lebesgue mass".into(),
                )
            })?;
            measure.check_space(space)?;
            if *lambda == 0.0 {
                return Ok(1.0);
            }
            let lebesgue = measure.of(diff) / lambda;
            (-alpha * lebesgue).exp()
        }
    };
    debug_assert!(value > 0.0 && value <= 1.0 + 1e-12);
    Ok(value)
}

/// Exact maximum-weight clique of the strict unit graph (weights = masses).
fn max_weight_clique(space: &FiniteMetricSpace, measure: &AtomicMeasure) -> (f64, u128) {
    fn extend(
        space: &FiniteMetricSpace,
        measure: &AtomicMeasure,
        clique: u128,
        weight: f64,
        candidates: u128,
        best: &mut (f64, u128),
    ) {
        if weight > best.0 {
            *best = (weight, clique);
        }
        // Optimistic bound: take every remaining candidate.
        let mut optimistic = weight;
        let mut m = candidates;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            optimistic += measure.mass(v);
        }
        if optimistic <= best.0 {
            return;
        }
        let mut m = candidates;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let above = if v + 1 >= 128 { 0 } else { !crate::space::full_mask(v + 1) };
            extend(
                space,
                measure,
                clique | (1u128 << v),
                weight + measure.mass(v),
                candidates & space.ball_mask(v) & above,
                best,
            );
        }
    }

    let mut best = (0.0, 0u128);
    extend(
        space,
        measure,
        0,
        0.0,
        crate::space::full_mask(space.len()),
        &mut best,
    );
    best
}

/// All non-empty cliques of the strict unit graph, or a heuristic family
/// (maximal cliques plus singletons) when there are too many.
fn cliques_to_check(space: &FiniteMetricSpace) -> (Vec<u128>, bool) {
    fn extend(space: &FiniteMetricSpace, clique: u128, candidates: u128, out: &mut Vec<u128>) -> bool {
        if out.len() > CLIQUE_ENUMERATION_CAP {
            return false;
        }
        let mut m = candidates;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let next = clique | (1u128 << v);
            out.push(next);
            let above = if v + 1 >= 128 { 0 } else { !crate::space::full_mask(v + 1) };
            if !extend(space, next, candidates & space.ball_mask(v) & above, out) {
                return false;
            }
        }
        true
    }

    let mut all = Vec::new();
    if extend(space, 0, crate::space::full_mask(space.len()), &mut all) {
        return (all, true);
    }
    // Heuristic fallback: maximal cliques (greedy from every seed) plus all
    // singletons.
    let mut family = Vec::new();
    for i in 0..space.len() {
        family.push(1u128 << i);
        let mut clique = 1u128 << i;
        let mut candidates = space.ball_mask(i) & !(1u128 << i);
        while candidates != 0 {
            let v = candidates.trailing_zeros() as usize;
            clique |= 1u128 << v;
            candidates &= space.ball_mask(v) & !(1u128 << v);
        }
        family.push(clique);
    }
    family.sort_unstable();
    family.dedup();
    (family, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(mass: f64) -> (FiniteMetricSpace, AtomicMeasure) {
        let s = FiniteMetricSpace::from_coords(vec!["x".into()], vec![vec![0.0]]).unwrap();
        let m = AtomicMeasure::new(&s, vec![mass]).unwrap();
        (s, m)
    }

    fn near_pair(mass: f64) -> (FiniteMetricSpace, AtomicMeasure) {
        let s = FiniteMetricSpace::from_coords(
            vec!["a".into(), "b".into()],
            vec![vec![0.0], vec![0.5]],
        )
        .unwrap();
        let m = AtomicMeasure::uniform(&s, mass).unwrap();
        (s, m)
    }

    #[test]
    fn thresholds_match_closed_forms() {
        assert_eq!(symmetric_threshold(1), 4.0 / 27.0);
        assert_eq!(symmetric_threshold(2), 27.0 / 256.0);
        for k in 0..16 {
            assert!(symmetric_threshold(k + 1) < symmetric_threshold(k));
        }
    }

    #[test]
    fn symmetric_small_mass_holds() {
        let (s, m) = single(0.1);
        let cert = check_symmetric(&s, &m).unwrap();
        assert!(cert.condition_holds);
        match cert.variant {
            BoundVariant::Symmetric { k, mass_exact, .. } => {
                assert_eq!(k, 1);
                assert!(mass_exact);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn symmetric_heavy_atom_fails() {
        let (s, m) = single(0.5);
        let cert = check_symmetric(&s, &m).unwrap();
        assert!(!cert.condition_holds);
        assert_eq!(cert.witness.unwrap().ids(&s), vec!["x"]);
    }

    #[test]
    fn inflation_examples() {
        let (s, m) = near_pair(0.25);
        let cert = check_inflation(&s, &m, 1.0).unwrap();
        assert!(cert.condition_holds);
        match cert.variant {
            BoundVariant::Inflation { inflated_phase, .. } => {
                assert_eq!(inflated_phase, Phase::ShBoundary)
            }
            _ => unreachable!(),
        }
        let a = RegionSet::from_ids(&s, &["a"]).unwrap();
        let bound = bound_value(&cert, &s, a, RegionSet::EMPTY, None).unwrap();
        assert_eq!(bound, 0.5);
        let z = crate::zfun::z_exact(&s, &m, a, crate::zfun::ZMethod::Recursion).unwrap();
        assert!(z >= bound);

        assert!(check_inflation(&s, &m, 0.0).is_err());

        let (s1, m1) = single(0.4);
        let cert = check_inflation(&s1, &m1, 1.0).unwrap();
        assert!(cert.condition_holds);
        let x = s1.full_region();
        assert_eq!(bound_value(&cert, &s1, x, RegionSet::EMPTY, None).unwrap(), 0.5);
    }

    #[test]
    fn kp_examples() {
        let (s, m) = single(0.2);
        let n = AtomicMeasure::new(&s, vec![0.25]).unwrap();
        let cert = check_kp(&s, &m, &n).unwrap();
        assert!(cert.condition_holds);
        match &cert.variant {
            BoundVariant::KoteckyPreiss {
                strong_form_holds,
                cliques_exact,
                ..
            } => {
                assert!(strong_form_holds);
                assert!(cliques_exact);
            }
            _ => unreachable!(),
        }
        let x = s.full_region();
        let bound = bound_value(&cert, &s, x, RegionSet::EMPTY, None).unwrap();
        assert!((bound - (-0.25f64).exp()).abs() < 1e-15);
        assert!(0.8 >= bound);

        // N = 0 with M != 0 makes the right side vanish.
        let zero = AtomicMeasure::zero(&s).unwrap();
        assert!(!check_kp(&s, &m, &zero).unwrap().condition_holds);

        // M = 0 holds vacuously and all bounds are 1.
        let m0 = AtomicMeasure::zero(&s).unwrap();
        let cert = check_kp(&s, &m0, &zero).unwrap();
        assert!(cert.condition_holds);
        assert_eq!(bound_value(&cert, &s, x, RegionSet::EMPTY, None).unwrap(), 1.0);

        // Support violation.
        let n_bad = AtomicMeasure::new(&s, vec![0.1]).unwrap();
        assert!(matches!(
            check_kp(&s, &m0, &n_bad),
            Err(Error::SupportViolation { .. })
        ));
    }

    #[test]
    fn euclidean_alpha_examples() {
        let (alpha, v) = euclidean_alpha(0.0, 3, 1e-12).unwrap();
        assert_eq!(alpha, 0.0);
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-12);

        let endpoint = 1.0 / (2.0 * std::f64::consts::E);
        let (alpha, v) = euclidean_alpha(endpoint, 1, 1e-12).unwrap();
        assert_eq!(v, 2.0);
        assert!((alpha - 0.5).abs() < 1e-12);

        // Independently computed root of α e^{-2α} = 0.1.
        let (alpha, _) = euclidean_alpha(0.1, 1, 1e-12).unwrap();
        assert!((alpha - 0.129_585_550_909_536_87).abs() < 1e-10);
        let residual = alpha * (-2.0 * alpha).exp() - 0.1;
        assert!(residual.abs() < 1e-12);

        assert!(matches!(
            euclidean_alpha(0.2, 1, 1e-12),
            Err(Error::FugacityAboveThreshold { .. })
        ));
    }

    #[test]
    fn alpha_monotone_in_lambda() {
        let mut last = 0.0;
        for k in 1..=10 {
            let lambda = k as f64 * 0.018;
            let (alpha, _) = euclidean_alpha(lambda, 1, 1e-12).unwrap();
            assert!(alpha > last);
            last = alpha;
        }
    }

    #[test]
    fn bound_values() {
        // Two far points give K = 1 and κ(A \ B) = 2, so the symmetric
        // bound is (2/3)^2 = 4/9.
        let s = FiniteMetricSpace::from_coords(
            vec!["a".into(), "b".into()],
            vec![vec![0.0], vec![1.5]],
        )
        .unwrap();
        let m = AtomicMeasure::uniform(&s, 0.05).unwrap();
        let cert = check_symmetric(&s, &m).unwrap();
        assert!(cert.condition_holds);
        match cert.variant {
            BoundVariant::Symmetric { k, .. } => assert_eq!(k, 1),
            _ => unreachable!(),
        }
        let full = s.full_region();
        let v = bound_value(&cert, &s, full, RegionSet::EMPTY, None).unwrap();
        assert!((v - 4.0 / 9.0).abs() < 1e-15);

        // A ⊆ B gives the trivial bound 1 for any variant.
        let sub = RegionSet::from_ids(&s, &["a"]).unwrap();
        assert_eq!(bound_value(&cert, &s, sub, full, None).unwrap(), 1.0);

        // Failed certificates refuse to produce bounds.
        let heavy = AtomicMeasure::uniform(&s, 0.9).unwrap();
        let failed = check_symmetric(&s, &heavy).unwrap();
        assert!(!failed.condition_holds);
        assert!(matches!(
            bound_value(&failed, &s, sub, RegionSet::EMPTY, None),
            Err(Error::CertificateInvalid)
        ));
    }

    #[test]
    fn euclidean_bound_needs_grid_measure() {
        let cert = euclidean_certificate(0.1, 1, 1e-12).unwrap();
        let (s, m) = near_pair(0.05);
        let a = RegionSet::from_ids(&s, &["a"]).unwrap();
        assert!(bound_value(&cert, &s, a, RegionSet::EMPTY, None).is_err());
        let v = bound_value(&cert, &s, a, RegionSet::EMPTY, Some(&m)).unwrap();
        // Lebesgue mass of the difference is 0.05 / 0.1 = 0.5.
        let alpha = match cert.variant {
            BoundVariant::Euclidean { alpha, .. } => alpha,
            _ => unreachable!(),
        };
        assert!((v - (-alpha * 0.5).exp()).abs() < 1e-14);
    }
}
