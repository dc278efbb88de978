//! Deterministic end-to-end check suite.
//!
//! Thirteen checks exercise the library against closed forms, brute-force
//! oracles and large-sample statistics. Everything runs from fixed seeds, so
//! a given build either passes or fails reproducibly. The CLI exposes the
//! suite as `audit all`; the `acceptance` test target asserts it.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::cluster::{log_z_series, penrose_coefficient};
use crate::lll::{
    bound_value, check_inflation, check_kp, check_symmetric, euclidean_alpha, symmetric_threshold,
    unit_ball_volume, BoundCertificate, BoundVariant,
};
use crate::measure::AtomicMeasure;
use crate::numeric::{bernoulli_stderr, within_tol};
use crate::sim::rng::substream;
use crate::sim::{
    empirical_stats, hard_sphere_attempt, FieldSampler, MaternSampler, MaternVariant, Query,
    ShearerSampler, Thinned, ZeroPhaseSampler,
};
use crate::space::{
    full_mask, grid_space, kappa, BoxRegion, FiniteMetricSpace, GridRegion, KappaMode, RegionSet,
};
use crate::zfun::{
    classify_phase, critical_lambda, delta_z, z_exact, z_exact_with, z_ratio_with, EvalLimits,
    Phase, ZMethod,
};

/// Seed of the whole suite; every criterion derives its own substream.
pub const SUITE_SEED: u64 = 1729;

const TOL: f64 = 1e-12;

/// Outcome of one audit check.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

struct Check {
    checks: u64,
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn is(&mut self, cond: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !cond && self.failures.len() < 8 {
            self.failures.push(msg());
        } else if !cond {
            self.failures.push(String::new());
        }
    }

    fn close(&mut self, a: f64, b: f64, what: impl FnOnce() -> String) {
        self.is(within_tol(a, b, TOL), || {
            format!("{}: {a} vs {b}", what())
        });
    }

    fn outcome(self, id: u32, name: &'static str, note: String) -> CriterionOutcome {
        let passed = self.failures.is_empty();
        let details = if passed {
            format!("{note} ({} checks)", self.checks)
        } else {
            let shown: Vec<&String> = self.failures.iter().filter(|s| !s.is_empty()).collect();
            format!(
                "{} of {} checks failed; first: {}",
                self.failures.len(),
                self.checks,
                shown.first().map(|s| s.as_str()).unwrap_or("-")
            )
        };
        CriterionOutcome {
            id,
            name,
            passed,
            details,
        }
    }
}

// ---------------------------------------------------------------------------
// random instance helpers

fn rand_space(rng: &mut ChaCha12Rng, n: usize, dim: usize, side: f64) -> FiniteMetricSpace {
    let ids = (0..n).map(|i| format!("p{i:02}")).collect();
    let coords = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>() * side).collect())
        .collect();
    FiniteMetricSpace::from_coords(ids, coords).expect("random coordinates are valid")
}

fn rand_measure(rng: &mut ChaCha12Rng, space: &FiniteMetricSpace, max_mass: f64) -> AtomicMeasure {
    let masses = (0..space.len())
        .map(|_| rng.random::<f64>() * max_mass)
        .collect();
    AtomicMeasure::new(space, masses).expect("random masses are valid")
}

fn rand_region(rng: &mut ChaCha12Rng, n: usize) -> RegionSet {
    let mut mask = 0u128;
    for i in 0..n {
        if rng.random::<f64>() < 0.5 {
            mask |= 1 << i;
        }
    }
    RegionSet::from_mask(mask)
}

fn rand_subregion(rng: &mut ChaCha12Rng, region: RegionSet, keep: f64) -> RegionSet {
    let mut mask = 0u128;
    for i in region.indices() {
        if rng.random::<f64>() < keep {
            mask |= 1 << i;
        }
    }
    RegionSet::from_mask(mask)
}

/// A random unit-diameter subset (clique of the strict unit graph) inside
/// `within`.
fn rand_clique(rng: &mut ChaCha12Rng, space: &FiniteMetricSpace, within: RegionSet) -> RegionSet {
    let mut pool: Vec<usize> = within.indices().collect();
    if pool.is_empty() {
        return RegionSet::EMPTY;
    }
    pool.shuffle(rng);
    let mut clique = 0u128;
    let mut candidates = within.mask();
    for &v in &pool {
        if candidates >> v & 1 == 1 {
            clique |= 1 << v;
            candidates &= space.ball_mask(v);
            if rng.random::<f64>() < 0.35 {
                break;
            }
        }
    }
    RegionSet::from_mask(clique)
}

/// Scales the measure down by 0.85 until the phase is acceptable.
fn scale_into(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    want: impl Fn(Phase) -> bool,
) -> AtomicMeasure {
    let mut current = measure.clone();
    for _ in 0..80 {
        let label = classify_phase(space, &current).expect("space within phase limits");
        if want(label.phase) {
            return current;
        }
        current = current.scaled(0.85).expect("valid scale");
    }
    panic!("measure did not scale into the requested phase");
}

/// Exact `Z` for every subset of a small space, indexed by subset mask.
fn all_subset_z(space: &FiniteMetricSpace, measure: &AtomicMeasure) -> Vec<f64> {
    let n = space.len();
    assert!(n <= 20, "subset table limited to 20 points");
    let masses = measure.masses();
    let balls: Vec<usize> = (0..n)
        .map(|i| (space.ball_mask(i) & full_mask(n)) as usize)
        .collect();
    let mut z = vec![0.0f64; 1 << n];
    z[0] = 1.0;
    for mask in 1..(1usize << n) {
        let x = mask.trailing_zeros() as usize;
        z[mask] = z[mask & (mask - 1)] - masses[x] * z[mask & !balls[x]];
    }
    z
}

/// Draws a sampler `n_draws` times and histograms the occupancy masks;
/// also reports whether every draw was hard-core.
fn sample_histogram<S: FieldSampler>(
    sampler: &S,
    n_draws: u64,
    seed: u64,
) -> (Vec<u64>, bool) {
    let n = sampler.space().len();
    let mut hist = vec![0u64; 1 << n];
    let mut all_hard_core = true;
    for i in 0..n_draws {
        let field = sampler
            .sample(&mut substream(seed, i))
            .expect("sampler preconditions hold");
        all_hard_core &= field.is_hard_core(sampler.space());
        hist[field.occupied_region().mask() as usize] += 1;
    }
    (hist, all_hard_core)
}

/// For every subset `S`, the number of draws avoiding `S`, via a
/// subset-sum transform of the histogram.
fn avoidance_counts(hist: &[u64], n: usize) -> Vec<u64> {
    // f[t] = number of draws whose occupancy mask is a subset of t.
    let mut f = hist.to_vec();
    for bit in 0..n {
        for t in 0..f.len() {
            if t >> bit & 1 == 1 {
                f[t] += f[t ^ (1 << bit)];
            }
        }
    }
    (0..1usize << n)
        .map(|s| f[(full_mask(n) as usize) & !s])
        .collect()
}

/// Exact factorial-moment value for a hard-core field with avoidance `Z`:
/// `order! ·` mass-weighted count of pairwise-far `order`-subsets of `S`.
fn exact_factorial_moment(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    region: RegionSet,
    order: u32,
) -> f64 {
    fn dfs(
        space: &FiniteMetricSpace,
        measure: &AtomicMeasure,
        allowed: u128,
        left: u32,
        acc: f64,
        total: &mut f64,
    ) {
        if left == 0 {
            *total += acc;
            return;
        }
        let mut m = allowed;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let above = if v + 1 >= 128 { 0 } else { !full_mask(v + 1) };
            dfs(
                space,
                measure,
                allowed & !space.ball_mask(v) & above,
                left - 1,
                acc * measure.mass(v),
                total,
            );
        }
    }
    let mut total = 0.0;
    dfs(space, measure, region.mask(), order, 1.0, &mut total);
    let mut factorial = 1.0;
    for k in 2..=order {
        factorial *= k as f64;
    }
    total * factorial
}

fn path3_space(mass: f64) -> (FiniteMetricSpace, AtomicMeasure) {
    let s = FiniteMetricSpace::from_coords(
        vec!["a".into(), "b".into(), "c".into()],
        vec![vec![0.0], vec![0.5], vec![1.0]],
    )
    .expect("static space");
    let m = AtomicMeasure::uniform(&s, mass).expect("static measure");
    (s, m)
}

fn near_pair_space(mass: f64) -> (FiniteMetricSpace, AtomicMeasure) {
    let s = FiniteMetricSpace::from_coords(
        vec!["a".into(), "b".into()],
        vec![vec![0.0], vec![0.5]],
    )
    .expect("static space");
    let m = AtomicMeasure::uniform(&s, mass).expect("static measure");
    (s, m)
}

// ---------------------------------------------------------------------------
// criteria

/// Recursion vs independent-set enumeration on random spaces.
pub fn criterion_oracle_equivalence() -> CriterionOutcome {
    let mut rng = substream(SUITE_SEED, 1);
    let mut check = Check::new();
    let mut evaluations = 0u64;
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = 2 + (case % 13);
        let dim = 1 + case % 2;
        let side = 0.75 * (n as f64).powf(1.0 / dim as f64) + 0.4;
        let space = rand_space(&mut rng, n, dim, side);
        let measure = rand_measure(&mut rng, &space, 1.0);
        let mut regions = vec![RegionSet::EMPTY, space.full_region()];
        for _ in 0..25 {
            regions.push(rand_region(&mut rng, n));
        }
        for region in regions {
            let a = z_exact(&space, &measure, region, ZMethod::Recursion).expect("within limits");
            let b = z_exact(&space, &measure, region, ZMethod::Enumeration).expect("within limits");
            evaluations += 1;
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
            check.close(a, b, || format!("case {case}, |region| = {}", region.len()));
        }
    }
    check.outcome(
        1,
        "oracle equivalence",
        format!("200 random spaces, {evaluations} subset evaluations, worst deviation {worst:.2e}"),
    )
}

/// Algebraic identity suite on random instances.
pub fn criterion_identity_suite() -> CriterionOutcome {
    let mut rng = substream(SUITE_SEED, 2);
    let mut check = Check::new();
    for case in 0..60 {
        let n = 3 + (case % 10);
        let dim = 1 + case % 2;
        let side = 0.8 * (n as f64).powf(1.0 / dim as f64) + 0.3;
        let space = rand_space(&mut rng, n, dim, side);
        let raw = rand_measure(&mut rng, &space, 0.9);
        let sh = scale_into(&space, &raw, |p| {
            matches!(p, Phase::Positive | Phase::ShBoundary)
        });
        let pos = scale_into(&space, &raw, |p| matches!(p, Phase::Positive));
        let full = space.full_region();
        let zv = |m: &AtomicMeasure, r: RegionSet| {
            z_exact(&space, m, r, ZMethod::Recursion).expect("within limits")
        };

        // Deletion identity: Z(B) = Z(B \ A) - Σ_{y∈A} m_y Z(B \ U(y)) for
        // unit-diameter A ⊆ B (any measure).
        let b = rand_region(&mut rng, n);
        let a = rand_clique(&mut rng, &space, b);
        let mut rhs = zv(&raw, b.difference(a));
        for y in a.indices() {
            rhs -= raw.mass(y) * zv(&raw, b.difference(space.unit_sphere_at(y)));
        }
        check.close(zv(&raw, b), rhs, || format!("case {case}: deletion identity"));

        // Multiplicativity over far regions (any measure).
        let a1 = rand_region(&mut rng, n);
        let mut far = 0u128;
        for i in 0..n {
            let near_a = a1
                .indices()
                .any(|j| space.distance(i, j) < 1.0);
            if !near_a && !a1.contains_index(i) {
                far |= 1 << i;
            }
        }
        let b1 = rand_subregion(&mut rng, RegionSet::from_mask(far), 0.7);
        check.close(
            zv(&raw, a1.union(b1)),
            zv(&raw, a1) * zv(&raw, b1),
            || format!("case {case}: far multiplicativity"),
        );

        // Telescoping over a random partition of A \ B (positive measure).
        let a2 = rand_region(&mut rng, n);
        let b2 = rand_region(&mut rng, n);
        let mut parts: Vec<RegionSet> = Vec::new();
        for i in a2.difference(b2).indices() {
            let slot = rng.random_range(0..3usize);
            while parts.len() <= slot {
                parts.push(RegionSet::EMPTY);
            }
            parts[slot] = parts[slot].union(RegionSet::from_mask(1 << i));
        }
        parts.retain(|p| !p.is_empty());
        let z_ab = z_ratio_with(&space, &pos, a2, b2, &EvalLimits::default()).expect("positive");
        let mut product = 1.0;
        let mut grown = b2;
        for part in parts {
            product *=
                z_ratio_with(&space, &pos, part, grown, &EvalLimits::default()).expect("positive");
            grown = grown.union(part);
        }
        check.close(z_ab, product, || format!("case {case}: telescoping"));

        // Canonical form of the iterated difference operator (any measure).
        let order = 1 + case % 3;
        let a_list: Vec<RegionSet> = (0..order).map(|_| rand_region(&mut rng, n)).collect();
        let b3 = rand_region(&mut rng, n);
        fn iterated(
            space: &FiniteMetricSpace,
            measure: &AtomicMeasure,
            list: &[RegionSet],
            at: RegionSet,
        ) -> f64 {
            match list.split_last() {
                None => z_exact(space, measure, at, ZMethod::Recursion).expect("within limits"),
                Some((last, rest)) => {
                    iterated(space, measure, rest, at)
                        - iterated(space, measure, rest, at.union(*last))
                }
            }
        }
        check.close(
            delta_z(&space, &raw, &a_list, b3).expect("within limits"),
            iterated(&space, &raw, &a_list, b3),
            || format!("case {case}: difference canonical form"),
        );

        // Complete monotonicity up to order 4 (non-negative phase).
        let order = 1 + case % 4;
        let a_list: Vec<RegionSet> = (0..order).map(|_| rand_region(&mut rng, n)).collect();
        let b4 = rand_region(&mut rng, n);
        let d = delta_z(&space, &sh, &a_list, b4).expect("within limits");
        check.is(d >= -TOL, || {
            format!("case {case}: iterated difference {d} is negative")
        });

        // Too few parts for the point count forces a vanishing difference.
        let clique = rand_clique(&mut rng, &space, full);
        if clique.len() >= 2 {
            let pieces: Vec<usize> = clique.indices().collect();
            let (head, tail) = pieces.split_at(pieces.len() / 2);
            let a_1 = RegionSet::from_indices(&space, head).expect("indices valid");
            let a_2 = RegionSet::from_indices(&space, tail).expect("indices valid");
            let d = delta_z(&space, &raw, &[a_1, a_2], RegionSet::EMPTY).expect("limits");
            check.is(d.abs() <= TOL, || {
                format!("case {case}: unit-diameter split difference = {d}")
            });
        }

        // Partition-of-unity over disjoint unit-diameter parts (any measure).
        let mut remaining = full;
        let mut cliques = Vec::new();
        while !remaining.is_empty() && cliques.len() < 4 {
            let c = rand_clique(&mut rng, &space, remaining);
            if c.is_empty() {
                break;
            }
            cliques.push(c);
            remaining = remaining.difference(c);
        }
        if cliques.len() >= 2 {
            let total: RegionSet = cliques
                .iter()
                .fold(RegionSet::EMPTY, |acc, c| acc.union(*c));
            let kap = kappa(&space, total, KappaMode::Exact).expect("small").value;
            let m = cliques.len();
            for r in [kap, m] {
                let mut sum = 0.0;
                for subset in 0..(1u32 << m) {
                    if (subset.count_ones() as usize) > r {
                        continue;
                    }
                    let list: Vec<RegionSet> = (0..m)
                        .filter(|i| subset >> i & 1 == 1)
                        .map(|i| cliques[i])
                        .collect();
                    let rest = (0..m)
                        .filter(|i| subset >> i & 1 == 0)
                        .fold(RegionSet::EMPTY, |acc, i| acc.union(cliques[i]));
                    sum += delta_z(&space, &raw, &list, rest).expect("limits");
                }
                check.close(sum, 1.0, || {
                    format!("case {case}: partition of unity at r = {r}")
                });
            }
        }

        // Ratio inequalities (non-negative/positive phase).
        let b5 = rand_region(&mut rng, n);
        let a5 = rand_clique(&mut rng, &space, space.full_region().difference(b5));
        if z_exact(&space, &pos, b5, ZMethod::Recursion).expect("limits") > 0.0 {
            let z = z_ratio_with(&space, &pos, a5, b5, &EvalLimits::default()).expect("positive");
            check.is(z <= 1.0 - pos.of(a5) + TOL, || {
                format!("case {case}: unit-diameter ratio bound {z}")
            });
            check.is(z <= 1.0 + TOL, || format!("case {case}: ratio above one"));
        }

        // Disjoint far halves of one clique: z(A1, B) >= M(A2).
        let c6 = rand_clique(&mut rng, &space, full);
        if c6.len() >= 2 {
            let pieces: Vec<usize> = c6.indices().collect();
            let (h, t) = pieces.split_at(pieces.len() / 2);
            let a6 = RegionSet::from_indices(&space, h).expect("valid");
            let a6b = RegionSet::from_indices(&space, t).expect("valid");
            let b6 = rand_subregion(
                &mut rng,
                full.difference(c6),
                0.4,
            );
            let z = z_ratio_with(&space, &pos, a6, b6, &EvalLimits::default());
            if let Ok(z) = z {
                check.is(z >= pos.of(a6b) - TOL, || {
                    format!("case {case}: lower ratio bound {z} < {}", pos.of(a6b))
                });
            }
        }

        // Monotonicity in space (non-negative phase).
        let big = rand_region(&mut rng, n);
        let small = rand_subregion(&mut rng, big, 0.6);
        check.is(
            z_exact(&space, &sh, small, ZMethod::Recursion).expect("limits")
                >= z_exact(&space, &sh, big, ZMethod::Recursion).expect("limits") - TOL,
            || format!("case {case}: monotone in space"),
        );

        // Two-argument monotonicity of the ratio.
        let a_big = rand_region(&mut rng, n);
        let b_big = rand_region(&mut rng, n);
        let a_small = rand_subregion(&mut rng, a_big, 0.6);
        let b_small = a_small
            .intersection(b_big)
            .union(rand_subregion(&mut rng, b_big.difference(a_big), 0.6));
        let z_small = z_ratio_with(&space, &pos, a_small, b_small, &EvalLimits::default());
        let z_big = z_ratio_with(&space, &pos, a_big, b_big, &EvalLimits::default());
        if let (Ok(zs), Ok(zb)) = (z_small, z_big) {
            if a_small.intersection(b_small) == a_small.intersection(b_big) {
                check.is(zs >= zb - TOL, || {
                    format!("case {case}: ratio monotonicity {zs} < {zb}")
                });
            }
        }
    }
    check.outcome(2, "identity suite", "60 random instances".into())
}

/// The four-way classification on the canonical pair examples.
pub fn criterion_phase_dichotomy() -> CriterionOutcome {
    let mut check = Check::new();
    let cases = [
        (0.5, Phase::ShBoundary),
        (0.6, Phase::Zero),
        (0.4, Phase::Positive),
    ];
    for (mass, want) in cases {
        let (s, m) = near_pair_space(mass);
        let got = classify_phase(&s, &m).expect("small").phase;
        check.is(got == want, || {
            format!("masses {mass}: got {}, want {}", got.as_str(), want.as_str())
        });
    }
    let s = FiniteMetricSpace::from_coords(vec!["x".into()], vec![vec![0.0]]).expect("static");
    let m = AtomicMeasure::new(&s, vec![1.2]).expect("static");
    let got = classify_phase(&s, &m).expect("small").phase;
    check.is(got == Phase::Empty, || {
        format!("heavy atom: got {}", got.as_str())
    });
    check.outcome(3, "phase dichotomy", "pair and heavy-atom labels".into())
}

/// Closed-form critical scaling factors.
pub fn criterion_critical_values() -> CriterionOutcome {
    let mut check = Check::new();
    let single = FiniteMetricSpace::from_coords(vec!["x".into()], vec![vec![0.0]]).expect("static");
    let m1 = AtomicMeasure::uniform(&single, 1.0).expect("static");
    let l = critical_lambda(&single, &m1, single.full_region(), 1e-10).expect("mass positive");
    check.is((l - 1.0).abs() <= 1e-9, || format!("single atom: {l}"));

    let (pair, mp) = near_pair_space(1.0);
    let l = critical_lambda(&pair, &mp, pair.full_region(), 1e-10).expect("mass positive");
    check.is((l - 0.5).abs() <= 1e-9, || format!("near pair: {l}"));

    let (path, mpath) = path3_space(1.0);
    let l = critical_lambda(&path, &mpath, path.full_region(), 1e-10).expect("mass positive");
    let golden = (3.0 - 5.0f64.sqrt()) / 2.0;
    check.is((l - golden).abs() <= 1e-9, || format!("three-site path: {l}"));
    check.outcome(4, "critical scaling values", "three closed forms".into())
}

fn audit_certificate(
    check: &mut Check,
    rng: &mut ChaCha12Rng,
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    certificate: &BoundCertificate,
    tag: &str,
) {
    let label = classify_phase(space, measure).expect("small space");
    check.is(label.phase == Phase::Positive, || {
        format!("{tag}: certificate holds but phase is {}", label.phase.as_str())
    });
    let n = space.len();
    let mut pairs = vec![(space.full_region(), RegionSet::EMPTY)];
    for _ in 0..12 {
        pairs.push((rand_region(rng, n), rand_region(rng, n)));
    }
    for (a, b) in pairs {
        let bound = bound_value(certificate, space, a, b, None).expect("certificate holds");
        let z = z_ratio_with(space, measure, a, b, &EvalLimits::default()).expect("positive");
        check.is(z >= bound - TOL, || {
            format!("{tag}: z = {z} below bound {bound} (|A|={}, |B|={})", a.len(), b.len())
        });
    }
}

/// Certificates imply positivity and their bounds never exceed exact ratios.
pub fn criterion_lll_soundness() -> CriterionOutcome {
    let mut rng = substream(SUITE_SEED, 5);
    let mut check = Check::new();
    check.is(symmetric_threshold(1) == 4.0 / 27.0, || {
        "threshold at K = 1".into()
    });
    check.is(symmetric_threshold(2) == 27.0 / 256.0, || {
        "threshold at K = 2".into()
    });

    for case in 0..200u32 {
        let n = 4 + (case as usize % 5);
        let dim = 1 + case as usize % 2;
        let side = 0.8 * (n as f64).powf(1.0 / dim as f64) + 0.3;
        let space = rand_space(&mut rng, n, dim, side);
        match case % 3 {
            0 => {
                // Symmetric: keep every unit-diameter subset under threshold.
                let k = crate::space::growth_bound_k(&space).expect("small");
                let threshold = symmetric_threshold(k);
                let max_ball = (0..n)
                    .map(|i| space.unit_sphere_at(i).len())
                    .max()
                    .unwrap_or(1);
                let mass = threshold / max_ball as f64 * (0.2 + 0.75 * rng.random::<f64>());
                let measure = AtomicMeasure::uniform(&space, mass).expect("valid");
                let cert = check_symmetric(&space, &measure).expect("small");
                check.is(cert.condition_holds, || {
                    format!("case {case}: symmetric generator failed to hold")
                });
                if cert.condition_holds {
                    audit_certificate(&mut check, &mut rng, &space, &measure, &cert, "symmetric");
                }
            }
            1 => {
                // Inflation: scale until (1+α)M stays non-negative.
                let alpha = [0.5, 1.0, 2.0][(case as usize / 3) % 3];
                let raw = rand_measure(&mut rng, &space, 0.4);
                let inflated_ok = scale_into(&space, &raw.scaled(1.0 + alpha).expect("valid"), |p| {
                    matches!(p, Phase::Positive | Phase::ShBoundary)
                });
                let measure = inflated_ok.scaled(1.0 / (1.0 + alpha)).expect("valid");
                let cert = check_inflation(&space, &measure, alpha).expect("valid alpha");
                check.is(cert.condition_holds, || {
                    format!("case {case}: inflation generator failed to hold")
                });
                if cert.condition_holds {
                    audit_certificate(&mut check, &mut rng, &space, &measure, &cert, "inflation");
                }
            }
            _ => {
                // Auxiliary-measure condition with N = 2M and small masses.
                let mut measure = rand_measure(&mut rng, &space, 0.02);
                let mut cert = None;
                for _ in 0..24 {
                    let n_measure = measure.scaled(2.0).expect("valid");
                    let c = check_kp(&space, &measure, &n_measure).expect("support ok");
                    if c.condition_holds {
                        cert = Some(c);
                        break;
                    }
                    measure = measure.scaled(0.7).expect("valid");
                }
                check.is(cert.is_some(), || {
                    format!("case {case}: auxiliary-measure generator failed to hold")
                });
                if let Some(cert) = cert {
                    audit_certificate(&mut check, &mut rng, &space, &measure, &cert, "kp");
                }
                // The pointwise form must imply the integrated one, also on
                // instances where neither is forced to hold.
                let probe = rand_measure(&mut rng, &space, 0.25);
                let n_probe = probe.scaled(1.5).expect("valid");
                let c = check_kp(&space, &probe, &n_probe).expect("support ok");
                if let BoundVariant::KoteckyPreiss {
                    strong_form_holds, ..
                } = &c.variant
                {
                    check.is(!strong_form_holds || c.condition_holds, || {
                        format!("case {case}: pointwise form held without the integrated form")
                    });
                }
            }
        }
    }
    check.outcome(
        5,
        "local-lemma soundness",
        "200 holding certificates audited".into(),
    )
}

/// The homogeneous bound on the line, against a discretised interval.
pub fn criterion_euclidean_line() -> CriterionOutcome {
    let mut rng = substream(SUITE_SEED, 6);
    let mut check = Check::new();

    let volume = unit_ball_volume(1).expect("dimension fine");
    check.is(volume == 2.0, || format!("unit ball volume {volume}"));

    let endpoint = 1.0 / (2.0 * std::f64::consts::E);
    let (alpha_end, _) = euclidean_alpha(endpoint, 1, 1e-12).expect("admissible");
    check.is((alpha_end - 0.5).abs() <= 1e-12, || {
        format!("endpoint alpha {alpha_end}")
    });

    let (alpha01, _) = euclidean_alpha(0.1, 1, 1e-12).expect("admissible");
    check.is((alpha01 - 0.129_585_550_909_536_87).abs() <= 1e-10, || {
        format!("alpha(0.1) = {alpha01}")
    });
    check.is(
        (alpha01 * (-2.0 * alpha01).exp() - 0.1).abs() < 1e-12,
        || "alpha residual".into(),
    );

    // Discretised interval [0, 6] at the admissible endpoint.
    let grid = GridRegion::new(
        BoxRegion::new(vec![0.0], vec![6.0]).expect("valid box"),
        0.05,
        endpoint,
    )
    .expect("valid grid");
    let (gspace, gmeasure) = grid_space(&grid).expect("within cap");
    check.is(gspace.len() == 120, || format!("cell count {}", gspace.len()));
    let relaxed = EvalLimits::relaxed();

    let z_full = z_exact_with(
        &gspace,
        &gmeasure,
        gspace.full_region(),
        ZMethod::Recursion,
        &relaxed,
    )
    .expect("within relaxed limits");
    check.is(z_full > 0.0, || format!("grid Z = {z_full}"));

    let rand_grid_region = |rng: &mut ChaCha12Rng, max_len: usize| {
        let len = rng.random_range(1..=max_len);
        let mut mask = 0u128;
        for _ in 0..len {
            mask |= 1u128 << rng.random_range(0..120u32);
        }
        RegionSet::from_mask(mask)
    };

    for _ in 0..40 {
        let region = rand_grid_region(&mut rng, 20);
        let z = z_exact_with(&gspace, &gmeasure, region, ZMethod::Recursion, &relaxed)
            .expect("within relaxed limits");
        check.is(z > 0.0, || format!("sampled subset Z = {z}"));
        // Free-energy form: -log Z per unit length stays below alpha, with
        // discretisation slack.
        let length = 0.05 * region.len() as f64;
        check.is(-z.ln() / length <= alpha_end + 0.02, || {
            format!("free energy density {} over {length}", -z.ln() / length)
        });
    }

    for _ in 0..25 {
        let a = rand_grid_region(&mut rng, 12);
        let b = rand_grid_region(&mut rng, 12);
        let z = z_ratio_with(&gspace, &gmeasure, a, b, &relaxed).expect("positive on grid");
        let lebesgue = 0.05 * a.difference(b).len() as f64;
        let bound = (-alpha_end * lebesgue).exp();
        check.is(z >= bound - 0.02, || {
            format!("grid ratio {z} below bound {bound}")
        });
    }

    // Sharpness: the one-dimensional threshold is 1/e, not 1/(2e): the grid
    // stays positive at λ = 0.3 although the sufficient condition fails.
    check.is(
        matches!(
            euclidean_alpha(0.3, 1, 1e-12),
            Err(crate::error::Error::FugacityAboveThreshold { .. })
        ),
        || "0.3 should be inadmissible".into(),
    );
    let grid03 = GridRegion::new(
        BoxRegion::new(vec![0.0], vec![6.0]).expect("valid box"),
        0.05,
        0.3,
    )
    .expect("valid grid");
    let (gspace3, gmeasure3) = grid_space(&grid03).expect("within cap");
    let z3 = z_exact_with(
        &gspace3,
        &gmeasure3,
        gspace3.full_region(),
        ZMethod::Recursion,
        &relaxed,
    )
    .expect("within relaxed limits");
    check.is(z3 > 0.0, || format!("grid Z at 0.3 = {z3}"));
    for scale in [0.5, 1.0, 1.5, 2.0] {
        let n_measure = gmeasure3.scaled(scale / 0.3).expect("valid");
        let cert = check_kp(&gspace3, &gmeasure3, &n_measure).expect("support ok");
        check.is(!cert.condition_holds, || {
            format!("integrated condition unexpectedly holds at N-scale {scale}")
        });
    }

    check.outcome(
        6,
        "euclidean bound on the line",
        format!("grid Z = {z_full:.6} at the endpoint, {z3:.6} at 0.3"),
    )
}

/// Penrose coefficients and series convergence on both sides of critical.
pub fn criterion_cluster_expansion() -> CriterionOutcome {
    let mut check = Check::new();
    let d = |n: usize, f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { f(i, j) }).collect())
            .collect()
    };
    check.is(
        penrose_coefficient(&d(2, &|_, _| 0.5)).expect("small") == 1,
        || "edge coefficient".into(),
    );
    check.is(
        penrose_coefficient(&d(3, &|i, j| if i.abs_diff(j) == 1 { 0.5 } else { 1.5 }))
            .expect("small")
            == 1,
        || "path coefficient".into(),
    );
    check.is(
        penrose_coefficient(&d(3, &|_, _| 0.5)).expect("small") == 2,
        || "triangle coefficient".into(),
    );
    let mut factorial = 1u64;
    for n in 2..=6usize {
        factorial *= (n - 1) as u64;
        check.is(
            penrose_coefficient(&d(n, &|_, _| 0.0)).expect("small") == factorial,
            || format!("repeated-atom coefficient at n = {n}"),
        );
    }

    // Single atom: t_n = m^n / n and the tail bound around -log(1 - m).
    let s = FiniteMetricSpace::from_coords(vec!["x".into()], vec![vec![0.0]]).expect("static");
    let m = AtomicMeasure::new(&s, vec![0.3]).expect("static");
    let series = log_z_series(&s, &m, s.full_region(), RegionSet::EMPTY, 6).expect("small");
    for (idx, &t) in series.terms.iter().enumerate() {
        let n = idx + 1;
        check.close(t, 0.3f64.powi(n as i32) / n as f64, || {
            format!("single-atom term {n}")
        });
    }
    let exact = -(0.7f64).ln();
    let total = series.total();
    let tail = 0.3f64.powi(7) / (7.0 * 0.7);
    check.is(total <= exact + TOL && exact - total <= tail + TOL, || {
        format!("single-atom partial sum {total} vs {exact}")
    });

    // Near pair of small masses: partial sum within the geometric tail.
    let (pair, _) = near_pair_space(0.0);
    let pm = AtomicMeasure::uniform(&pair, 0.1).expect("static");
    let series = log_z_series(&pair, &pm, pair.full_region(), RegionSet::EMPTY, 4).expect("small");
    let exact = -(0.8f64).ln();
    let total = series.total();
    let tail = 0.2f64.powi(5) / (5.0 * 0.8);
    check.is(total <= exact + TOL && exact - total <= tail + TOL, || {
        format!("pair partial sum {total} vs {exact}")
    });
    for w in series.partial_sums().windows(2) {
        check.is(w[1] >= w[0], || "partial sums must not decrease".into());
    }

    // Divergence signature across the critical scaling of the near pair.
    let (pair1, unit) = near_pair_space(1.0);
    let lambda_crit = 0.5;
    let low = unit.scaled(0.95 * lambda_crit).expect("valid");
    let high = unit.scaled(1.05 * lambda_crit).expect("valid");
    let s_low = log_z_series(&pair1, &low, pair1.full_region(), RegionSet::EMPTY, 6)
        .expect("small")
        .total();
    let s_high = log_z_series(&pair1, &high, pair1.full_region(), RegionSet::EMPTY, 6)
        .expect("small")
        .total();
    check.is(s_high >= s_low + 0.4, || {
        format!("series totals {s_high} vs {s_low} across critical")
    });

    check.outcome(7, "cluster expansion", "coefficients and tails".into())
}

/// The sequential hard-core sampler realises the avoidance function `Z`.
pub fn criterion_hard_core_field_law() -> CriterionOutcome {
    let mut rng = substream(SUITE_SEED, 8);
    let mut check = Check::new();
    let n_draws = 100_000u64;

    let far_pair = FiniteMetricSpace::from_coords(
        vec!["a".into(), "b".into()],
        vec![vec![0.0], vec![2.0]],
    )
    .expect("static");
    let far_measure = AtomicMeasure::new(&far_pair, vec![0.3, 0.5]).expect("static");

    let (path, path_measure) = path3_space(0.2);

    let random_space = rand_space(&mut rng, 8, 2, 2.2);
    let random_measure = scale_into(
        &random_space,
        &rand_measure(&mut rng, &random_space, 0.3),
        |p| matches!(p, Phase::Positive),
    );

    let spaces: [(&FiniteMetricSpace, &AtomicMeasure, u64); 3] = [
        (&far_pair, &far_measure, 80),
        (&path, &path_measure, 81),
        (&random_space, &random_measure, 82),
    ];

    for (space, measure, seed) in spaces {
        let n = space.len();
        let sampler = ShearerSampler::new(space, measure).expect("positive measure");
        let (hist, all_hard_core) = sample_histogram(&sampler, n_draws, seed);
        check.is(all_hard_core, || "a draw violated the hard-core".into());
        let counts = avoidance_counts(&hist, n);
        let z = all_subset_z(space, measure);
        for s in 0..(1usize << n) {
            let p_hat = counts[s] as f64 / n_draws as f64;
            let sigma = (z[s] * (1.0 - z[s]) / n_draws as f64).max(0.0).sqrt();
            check.is((p_hat - z[s]).abs() <= 4.0 * sigma + 1e-9, || {
                format!(
                    "avoidance of subset {s:#b} on {n} points: {p_hat} vs {} (sigma {sigma})",
                    z[s]
                )
            });
        }

        // Factorial moments against the exact tuple sums and the product
        // (independent-case) upper bound.
        let mut regions = vec![space.full_region()];
        for _ in 0..2 {
            regions.push(rand_region(&mut rng, n));
        }
        for region in regions {
            for order in 1..=3u32 {
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                for (mask, &cnt) in hist.iter().enumerate() {
                    if cnt == 0 {
                        continue;
                    }
                    let k = (mask as u128 & region.mask()).count_ones();
                    let mut v = 1.0;
                    for i in 0..order {
                        v *= k as f64 - i as f64;
                    }
                    sum += cnt as f64 * v;
                    sum_sq += cnt as f64 * v * v;
                }
                let mean = sum / n_draws as f64;
                let var =
                    ((sum_sq - n_draws as f64 * mean * mean) / (n_draws as f64 - 1.0)).max(0.0);
                let se = (var / n_draws as f64).sqrt();
                let exact = exact_factorial_moment(space, measure, region, order);
                check.is((mean - exact).abs() <= 4.0 * se + 1e-9, || {
                    format!("factorial moment order {order}: {mean} vs {exact}")
                });
                let poisson = measure.of(region).powi(order as i32);
                check.is(exact <= poisson + TOL, || {
                    format!("exact moment {exact} above product bound {poisson}")
                });
                check.is(mean <= poisson + 4.0 * se + 1e-9, || {
                    format!("empirical moment {mean} above product bound {poisson}")
                });
            }
        }
    }
    check.outcome(
        8,
        "hard-core field law",
        format!("3 spaces x {n_draws} draws, every subset checked"),
    )
}

/// Matérn I on the three-site path: intensities and the dependence gap.
pub fn criterion_matern_audit() -> CriterionOutcome {
    let mut check = Check::new();
    let (path, underlying) = path3_space(0.3);
    let sampler = MaternSampler::new(&path, &underlying, MaternVariant::I).expect("valid");
    let n_draws = 100_000u64;
    let a = RegionSet::from_ids(&path, &["a"]).expect("valid");
    let c = RegionSet::from_ids(&path, &["c"]).expect("valid");
    let report = empirical_stats(
        &sampler,
        n_draws,
        90,
        &[
            Query::Intensity(0),
            Query::Intensity(1),
            Query::Intensity(2),
            Query::Dependence(a, c),
        ],
        None,
    )
    .expect("queries valid");
    let targets = [0.21, 0.147, 0.21];
    for (i, &target) in targets.iter().enumerate() {
        let r = &report.results[i];
        let sigma = bernoulli_stderr(target, n_draws);
        check.is((r.estimate - target).abs() <= 4.0 * sigma, || {
            format!("site {i}: intensity {} vs {target}", r.estimate)
        });
    }
    let dep = &report.results[3];
    check.is(dep.estimate - 4.0 * dep.std_error > 0.0, || {
        format!(
            "dependence gap {} ± {} not detected",
            dep.estimate, dep.std_error
        )
    });
    check.is((dep.estimate - 0.0189).abs() <= 6.0 * dep.std_error, || {
        format!("dependence gap {} far from 0.0189", dep.estimate)
    });
    check.outcome(
        9,
        "matern thinning audit",
        format!("gap estimate {:.5} ± {:.5}", dep.estimate, dep.std_error),
    )
}

/// Rejection sampling of the hard-sphere model on a unit-diameter region.
pub fn criterion_hard_sphere() -> CriterionOutcome {
    let mut check = Check::new();
    let (pair, fugacity) = near_pair_space(0.5);
    let n_attempts = 100_000u64;
    let mut rng = substream(SUITE_SEED, 10);
    let mut accepted = 0u64;
    let mut empty = 0u64;
    for _ in 0..n_attempts {
        if let Some(field) = hard_sphere_attempt(&pair, &fugacity, &mut rng).expect("valid") {
            accepted += 1;
            if field.avoids(pair.full_region()) {
                empty += 1;
            }
        }
    }
    let partition =
        crate::zfun::hard_sphere_partition(&pair, &fugacity, pair.full_region()).expect("small");
    check.close(partition, 2.0, || "partition of a unit-diameter pair".into());

    // Empty-configuration frequency among accepted draws is 1/partition.
    let p_empty = empty as f64 / accepted as f64;
    let sigma_e = bernoulli_stderr(0.5, accepted);
    check.is((p_empty - 0.5).abs() <= 4.0 * sigma_e, || {
        format!("empty frequency {p_empty}")
    });

    // Acceptance rate times e^{M(B)} estimates the partition function.
    let rate = accepted as f64 / n_attempts as f64;
    let scale = fugacity.total().exp();
    let z_hat = scale * rate;
    let sigma_z = scale * bernoulli_stderr(rate, n_attempts);
    check.is((z_hat - partition).abs() <= 4.0 * sigma_z, || {
        format!("partition estimate {z_hat} vs {partition}")
    });
    check.outcome(
        10,
        "hard-sphere rejection sampling",
        format!("accept rate {rate:.4}, partition estimate {z_hat:.4}"),
    )
}

/// The zero-phase construction on the near pair plus a far spectator.
pub fn criterion_zero_phase() -> CriterionOutcome {
    let mut check = Check::new();
    let space = FiniteMetricSpace::from_coords(
        vec!["a".into(), "b".into(), "c".into()],
        vec![vec![0.0], vec![0.5], vec![2.5]],
    )
    .expect("static");
    let measure = AtomicMeasure::new(&space, vec![0.6, 0.6, 0.3]).expect("static");
    let sampler = ZeroPhaseSampler::new(&space, &measure).expect("zero phase");
    check.is((sampler.lambda() - 5.0 / 6.0).abs() <= 1e-9, || {
        format!("critical scaling {}", sampler.lambda())
    });
    let witness = sampler.witness();
    check.is(witness.ids(&space) == vec!["a", "b"], || {
        format!("witness {:?}", witness.ids(&space))
    });

    let n_draws = 100_000u64;
    let a = RegionSet::from_ids(&space, &["a"]).expect("valid");
    let c = RegionSet::from_ids(&space, &["c"]).expect("valid");
    let report = empirical_stats(
        &sampler,
        n_draws,
        110,
        &[
            Query::Avoidance(witness),
            Query::Intensity(0),
            Query::Intensity(1),
            Query::Dependence(a, c),
        ],
        None,
    )
    .expect("queries valid");
    check.is(report.results[0].estimate == 0.0, || {
        format!("witness avoided with frequency {}", report.results[0].estimate)
    });
    for i in [1, 2] {
        let sigma = bernoulli_stderr(0.6, n_draws);
        check.is((report.results[i].estimate - 0.6).abs() <= 4.0 * sigma, || {
            format!("intensity {} vs 0.6", report.results[i].estimate)
        });
    }
    let dep = &report.results[3];
    check.is(dep.estimate <= 4.0 * dep.std_error, || {
        format!("separated dependence {} ± {}", dep.estimate, dep.std_error)
    });
    check.outcome(
        11,
        "zero-phase construction",
        format!("never-empty witness over {n_draws} draws"),
    )
}

/// Independent thinning maps the hard-core field law to the thinned measure.
pub fn criterion_thinning_law() -> CriterionOutcome {
    let mut check = Check::new();
    let (path, measure) = path3_space(0.2);
    let base = ShearerSampler::new(&path, &measure).expect("positive");
    let thinned = Thinned::new(base, vec![0.5; 3]).expect("valid retention");
    let n_draws = 100_000u64;
    let (hist, _) = sample_histogram(&thinned, n_draws, 120);
    let counts = avoidance_counts(&hist, 3);
    let target = AtomicMeasure::uniform(&path, 0.1).expect("static");
    let z = all_subset_z(&path, &target);
    for s in 0..8usize {
        let p_hat = counts[s] as f64 / n_draws as f64;
        let sigma = (z[s] * (1.0 - z[s]) / n_draws as f64).max(0.0).sqrt();
        check.is((p_hat - z[s]).abs() <= 4.0 * sigma + 1e-9, || {
            format!("thinned avoidance of {s:#b}: {p_hat} vs {}", z[s])
        });
    }
    check.outcome(
        12,
        "thinning law",
        "half-retention reproduces the halved measure".into(),
    )
}

/// Avoidance is negatively associated; hard-sphere avoidance positively.
pub fn criterion_association() -> CriterionOutcome {
    let mut rng = substream(SUITE_SEED, 13);
    let mut check = Check::new();
    for case in 0..80 {
        let n = 3 + (case % 8);
        let dim = 1 + case % 2;
        let side = 0.8 * (n as f64).powf(1.0 / dim as f64) + 0.3;
        let space = rand_space(&mut rng, n, dim, side);
        let raw = rand_measure(&mut rng, &space, 0.9);
        let sh = scale_into(&space, &raw, |p| {
            matches!(p, Phase::Positive | Phase::ShBoundary)
        });
        for _ in 0..10 {
            let a = rand_region(&mut rng, n);
            let b = rand_subregion(&mut rng, space.full_region().difference(a), 0.6);
            let z = |m: &AtomicMeasure, r: RegionSet| {
                z_exact(&space, m, r, ZMethod::Recursion).expect("limits")
            };
            check.is(z(&sh, a.union(b)) <= z(&sh, a) * z(&sh, b) + TOL, || {
                format!("case {case}: negative association violated")
            });
            let hs = |r: RegionSet| {
                crate::zfun::hard_sphere_partition(&space, &raw, r).expect("limits")
            };
            let lhs = 1.0 / hs(a.union(b));
            let rhs = (1.0 / hs(a)) * (1.0 / hs(b));
            check.is(lhs >= rhs - TOL, || {
                format!("case {case}: positive association violated")
            });
        }
    }
    check.outcome(13, "association inequalities", "80 random instances".into())
}

/// Runs every check and returns the outcomes in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        criterion_oracle_equivalence(),
        criterion_identity_suite(),
        criterion_phase_dichotomy(),
        criterion_critical_values(),
        criterion_lll_soundness(),
        criterion_euclidean_line(),
        criterion_cluster_expansion(),
        criterion_hard_core_field_law(),
        criterion_matern_audit(),
        criterion_hard_sphere(),
        criterion_zero_phase(),
        criterion_thinning_law(),
        criterion_association(),
    ]
}
