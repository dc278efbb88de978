//! Law-level audits of the samplers: exact enumeration oracles for the
//! Matérn thinnings, minimality of the hard-core field, the avoidance
//! inequality margin for every sampler, and thinning with uneven retention.

use rand_chacha::ChaCha12Rng;

use shearer_core::numeric::bernoulli_stderr;
use shearer_core::sim::rng::substream;
use shearer_core::sim::{
    empirical_stats, FieldSampler, HardSphereSampler, MaternSampler, MaternVariant, Query,
    ShearerSampler, Thinned, ZeroDependentSampler, ZeroPhaseSampler,
};
use shearer_core::space::{FiniteMetricSpace, RegionSet};
use shearer_core::zfun::{z_exact, z_ratio, ZMethod};
use shearer_core::AtomicMeasure;

const DRAWS: u64 = 100_000;

fn path3() -> FiniteMetricSpace {
    FiniteMetricSpace::from_coords(
        vec!["a".into(), "b".into(), "c".into()],
        vec![vec![0.0], vec![0.5], vec![1.0]],
    )
    .unwrap()
}

fn far_pair() -> FiniteMetricSpace {
    FiniteMetricSpace::from_coords(vec!["a".into(), "b".into()], vec![vec![0.0], vec![2.0]])
        .unwrap()
}

/// Exact per-site survival probabilities of the three thinnings on the
/// 3-path, by enumerating occupancy patterns and mark orderings.
/// Adjacency is 0-1 and 1-2; marks are exchangeable, so orderings are
/// uniform permutations.
fn matern_path3_oracle(variant: MaternVariant, n: [f64; 3]) -> [f64; 3] {
    let adjacent = |x: usize, y: usize| x.abs_diff(y) == 1;
    let mut survive = [0.0f64; 3];
    for pattern in 0u32..8 {
        let occupied: Vec<usize> = (0..3).filter(|i| pattern >> i & 1 == 1).collect();
        let mut prob = 1.0;
        for i in 0..3 {
            prob *= if pattern >> i & 1 == 1 { n[i] } else { 1.0 - n[i] };
        }
        if prob == 0.0 {
            continue;
        }
        let k = occupied.len();
        let perms = permutations(k);
        for ranks in &perms {
            // ranks[j] = mark rank of occupied[j]; smaller wins.
            let kept: Vec<usize> = match variant {
                MaternVariant::I => occupied
                    .iter()
                    .copied()
                    .filter(|&x| !occupied.iter().any(|&y| y != x && adjacent(x, y)))
                    .collect(),
                MaternVariant::II => (0..k)
                    .filter(|&j| {
                        !(0..k).any(|l| {
                            l != j && adjacent(occupied[j], occupied[l]) && ranks[l] < ranks[j]
                        })
                    })
                    .map(|j| occupied[j])
                    .collect(),
                MaternVariant::III => {
                    let mut order: Vec<usize> = (0..k).collect();
                    order.sort_by_key(|&j| ranks[j]);
                    let mut kept: Vec<usize> = Vec::new();
                    for j in order {
                        if !kept.iter().any(|&x| adjacent(x, occupied[j])) {
                            kept.push(occupied[j]);
                        }
                    }
                    kept
                }
            };
            let weight = prob / perms.len() as f64;
            for &site in &kept {
                survive[site] += weight;
            }
        }
    }
    survive
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for smaller in permutations(k - 1) {
        for slot in 0..k {
            let mut p = smaller.clone();
            p.insert(slot, k - 1);
            out.push(p);
        }
    }
    out
}

fn empirical_intensities<S: FieldSampler>(sampler: &S, seed: u64) -> Vec<f64> {
    let n = sampler.space().len();
    let mut hits = vec![0u64; n];
    for i in 0..DRAWS {
        let field = sampler.sample(&mut substream(seed, i)).unwrap();
        for (site, h) in hits.iter_mut().enumerate() {
            if field.occupied(site) {
                *h += 1;
            }
        }
    }
    hits.into_iter().map(|h| h as f64 / DRAWS as f64).collect()
}

#[test]
fn matern_oracle_reproduces_frozen_values() {
    let n = [0.3, 0.3, 0.3];
    let one = matern_path3_oracle(MaternVariant::I, n);
    for (got, want) in one.iter().zip([0.21, 0.147, 0.21]) {
        assert!((got - want).abs() < 1e-12);
    }
    // Shared marks couple the middle site's two comparisons; the exact
    // middle intensities differ from the independent-comparison closed
    // forms (0.2566875 for II), while the end sites agree for II.
    let two = matern_path3_oracle(MaternVariant::II, n);
    for (got, want) in two.iter().zip([0.255, 0.219, 0.255]) {
        assert!((got - want).abs() < 1e-12, "II: {got} vs {want}");
    }
    let three = matern_path3_oracle(MaternVariant::III, n);
    for (got, want) in three.iter().zip([0.2595, 0.219, 0.2595]) {
        assert!((got - want).abs() < 1e-12, "III: {got} vs {want}");
    }
}

#[test]
fn matern_samplers_match_enumeration_oracle() {
    let space = path3();
    let underlying = AtomicMeasure::uniform(&space, 0.3).unwrap();
    for (variant, seed) in [
        (MaternVariant::I, 201),
        (MaternVariant::II, 202),
        (MaternVariant::III, 203),
    ] {
        let oracle = matern_path3_oracle(variant, [0.3; 3]);
        let sampler = MaternSampler::new(&space, &underlying, variant).unwrap();
        let empirical = empirical_intensities(&sampler, seed);
        for site in 0..3 {
            let sigma = bernoulli_stderr(oracle[site], DRAWS);
            assert!(
                (empirical[site] - oracle[site]).abs() <= 4.0 * sigma,
                "{variant:?} site {site}: {} vs {}",
                empirical[site],
                oracle[site]
            );
        }
    }
}

#[test]
fn avoidance_margin_holds_for_every_sampler() {
    let space = path3();
    let queries = |space: &FiniteMetricSpace| {
        let a = RegionSet::from_ids(space, &["a"]).unwrap();
        let b = RegionSet::from_ids(space, &["b"]).unwrap();
        let c = RegionSet::from_ids(space, &["c"]).unwrap();
        let ab = a.union(b);
        vec![
            Query::OneDependentMargin { a, b: c },
            Query::OneDependentMargin { a: b, b: a.union(c) },
            Query::OneDependentMargin { a: ab, b: c },
            Query::OneDependentMargin {
                a: c,
                b: RegionSet::EMPTY,
            },
        ]
    };
    let check = |report: shearer_core::sim::SampleReport, tag: &str| {
        for r in &report.results {
            assert!(
                r.estimate >= -4.0 * r.std_error,
                "{tag}: margin {} ± {}",
                r.estimate,
                r.std_error
            );
        }
    };

    let shearer_measure = AtomicMeasure::uniform(&space, 0.2).unwrap();
    let shearer = ShearerSampler::new(&space, &shearer_measure).unwrap();
    check(
        empirical_stats(&shearer, DRAWS, 210, &queries(&space), Some(&shearer_measure)).unwrap(),
        "hard-core field",
    );

    let product_measure = AtomicMeasure::new(&space, vec![0.3, 0.45, 0.25]).unwrap();
    let product = ZeroDependentSampler::new(&space, &product_measure).unwrap();
    check(
        empirical_stats(&product, DRAWS, 211, &queries(&space), Some(&product_measure)).unwrap(),
        "product field",
    );

    let underlying = AtomicMeasure::uniform(&space, 0.3).unwrap();
    for (variant, seed) in [
        (MaternVariant::I, 212),
        (MaternVariant::II, 213),
        (MaternVariant::III, 214),
    ] {
        let sampler = MaternSampler::new(&space, &underlying, variant).unwrap();
        let oracle = matern_path3_oracle(variant, [0.3; 3]);
        let intensity = AtomicMeasure::new(&space, oracle.to_vec()).unwrap();
        check(
            empirical_stats(&sampler, DRAWS, seed, &queries(&space), Some(&intensity)).unwrap(),
            "matern thinning",
        );
    }

    // Zero-phase construction: near pair plus a far spectator.
    let zspace = FiniteMetricSpace::from_coords(
        vec!["a".into(), "b".into(), "c".into()],
        vec![vec![0.0], vec![0.5], vec![2.5]],
    )
    .unwrap();
    let zmeasure = AtomicMeasure::new(&zspace, vec![0.6, 0.6, 0.3]).unwrap();
    let zero_phase = ZeroPhaseSampler::new(&zspace, &zmeasure).unwrap();
    check(
        empirical_stats(&zero_phase, DRAWS, 215, &queries(&zspace), Some(&zmeasure)).unwrap(),
        "zero-phase field",
    );
}

#[test]
fn minimality_of_the_hard_core_field() {
    // Any 1-dependent field with the same intensity has conditional
    // avoidance probabilities above z(A, B). The product field is
    // 0-dependent, hence 1-dependent.
    let space = path3();
    let measure = AtomicMeasure::new(&space, vec![0.35, 0.2, 0.3]).unwrap();
    let product = ZeroDependentSampler::new(&space, &measure).unwrap();
    minimality_audit(&space, &measure, &product, 220, "product field");

    // The middle-free Matérn regime is an independent field as well.
    let underlying = AtomicMeasure::new(&space, vec![0.4, 0.0, 0.55]).unwrap();
    let matern = MaternSampler::new(&space, &underlying, MaternVariant::II).unwrap();
    minimality_audit(&space, &underlying, &matern, 221, "conflict-free thinning");
}

fn minimality_audit<S: FieldSampler>(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    sampler: &S,
    seed: u64,
    tag: &str,
) {
    let n = space.len();
    let regions: Vec<RegionSet> = (0..(1usize << n))
        .map(|mask| {
            RegionSet::from_indices(
                space,
                &(0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>(),
            )
            .unwrap()
        })
        .collect();
    let mut counts = vec![0u64; 1 << n];
    for i in 0..DRAWS {
        let field = sampler.sample(&mut substream(seed, i)).unwrap();
        for (s, region) in regions.iter().enumerate() {
            if field.avoids(*region) {
                counts[s] += 1;
            }
        }
    }
    for a_mask in 0..(1usize << n) {
        for b_mask in 0..(1usize << n) {
            let a = regions[a_mask];
            let b = regions[b_mask];
            let c_b = counts[b_mask];
            if c_b == 0 {
                continue;
            }
            let c_ab = counts[a_mask | b_mask];
            let ratio = c_ab as f64 / c_b as f64;
            let z = z_ratio(space, measure, a, b).unwrap();
            let sigma = (ratio * (1.0 - ratio) / c_b as f64).max(0.0).sqrt();
            assert!(
                ratio >= z - 4.0 * sigma - 1e-9,
                "{tag}: conditional avoidance {ratio} below z = {z}"
            );
        }
    }
}

#[test]
fn hard_core_field_small_examples() {
    let space = path3();
    let measure = AtomicMeasure::uniform(&space, 0.2).unwrap();
    let sampler = ShearerSampler::new(&space, &measure).unwrap();
    let full = space.full_region();
    let ends = RegionSet::from_ids(&space, &["a", "c"]).unwrap();
    let adjacent = RegionSet::from_ids(&space, &["a", "b"]).unwrap();
    let mut empty_hits = 0u64;
    let mut ends_pair = 0u64;
    for i in 0..DRAWS {
        let field = sampler.sample(&mut substream(230, i)).unwrap();
        if field.avoids(full) {
            empty_hits += 1;
        }
        if field.count_in(ends) == 2 {
            ends_pair += 1;
            assert!(field.count_in(adjacent) <= 1);
        }
        assert!(field.count_in(adjacent) <= 1);
    }
    let p_empty = empty_hits as f64 / DRAWS as f64;
    let sigma = bernoulli_stderr(0.44, DRAWS);
    assert!((p_empty - 0.44).abs() <= 4.0 * sigma, "P(empty) = {p_empty}");
    // The far end pair does occur (with probability m_a · m_c = 0.04).
    assert!(ends_pair > 0);
}

#[test]
fn factorial_moment_examples() {
    // Two far atoms: order-2 moment is 2 m_a m_b.
    let space = far_pair();
    let measure = AtomicMeasure::new(&space, vec![0.3, 0.5]).unwrap();
    let sampler = ShearerSampler::new(&space, &measure).unwrap();
    let report = empirical_stats(
        &sampler,
        DRAWS,
        240,
        &[Query::FactorialMoment(space.full_region(), 2)],
        None,
    )
    .unwrap();
    let r = &report.results[0];
    assert!(
        (r.estimate - 0.3).abs() <= 4.0 * r.std_error,
        "moment {} ± {}",
        r.estimate,
        r.std_error
    );

    // A unit-diameter region of a hard-core field never holds two points.
    let path = path3();
    let pm = AtomicMeasure::uniform(&path, 0.2).unwrap();
    let ps = ShearerSampler::new(&path, &pm).unwrap();
    let near = RegionSet::from_ids(&path, &["a", "b"]).unwrap();
    let report =
        empirical_stats(&ps, 20_000, 241, &[Query::FactorialMoment(near, 2)], None).unwrap();
    assert_eq!(report.results[0].estimate, 0.0);
}

#[test]
fn product_field_independence_and_hard_sphere() {
    let space = far_pair();
    let measure = AtomicMeasure::uniform(&space, 0.5).unwrap();
    let a = RegionSet::from_ids(&space, &["a"]).unwrap();
    let b = RegionSet::from_ids(&space, &["b"]).unwrap();

    let product = ZeroDependentSampler::new(&space, &measure).unwrap();
    let report =
        empirical_stats(&product, DRAWS, 250, &[Query::Dependence(a, b)], None).unwrap();
    let r = &report.results[0];
    assert!(r.estimate <= 4.0 * r.std_error, "{} ± {}", r.estimate, r.std_error);

    // The hard-sphere field factorises over far atoms too.
    let hs = HardSphereSampler::new(&space, &measure, 100_000).unwrap();
    let report = empirical_stats(&hs, DRAWS, 251, &[Query::Dependence(a, b)], None).unwrap();
    let r = &report.results[0];
    assert!(r.estimate <= 4.0 * r.std_error, "{} ± {}", r.estimate, r.std_error);
}

#[test]
fn thinning_with_uneven_retention() {
    let space = path3();
    let measure = AtomicMeasure::uniform(&space, 0.2).unwrap();
    let retention = vec![0.7, 0.4, 1.0];
    let thinned = Thinned::new(
        ShearerSampler::new(&space, &measure).unwrap(),
        retention.clone(),
    )
    .unwrap();
    let target = AtomicMeasure::new(
        &space,
        retention.iter().map(|p| p * 0.2).collect(),
    )
    .unwrap();

    let mut queries = Vec::new();
    let mut expected = Vec::new();
    for mask in 0u32..8 {
        let region = RegionSet::from_indices(
            &space,
            &(0..3).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>(),
        )
        .unwrap();
        queries.push(Query::Avoidance(region));
        expected.push(z_exact(&space, &target, region, ZMethod::Enumeration).unwrap());
    }
    let report = empirical_stats(&thinned, DRAWS, 260, &queries, None).unwrap();
    for (r, want) in report.results.iter().zip(expected) {
        let sigma = bernoulli_stderr(want, DRAWS);
        assert!(
            (r.estimate - want).abs() <= 4.0 * sigma + 1e-9,
            "avoidance {} vs {want}",
            r.estimate
        );
    }
}

#[test]
fn margin_query_requires_unit_diameter_and_measure() {
    let space = path3();
    let measure = AtomicMeasure::uniform(&space, 0.2).unwrap();
    let sampler = ZeroDependentSampler::new(&space, &measure).unwrap();
    let full = space.full_region();
    let err = empirical_stats(
        &sampler,
        10,
        0,
        &[Query::OneDependentMargin {
            a: full,
            b: RegionSet::EMPTY,
        }],
        Some(&measure),
    )
    .unwrap_err();
    assert!(matches!(err, shearer_core::Error::InvalidParameter(_)));

    let a = RegionSet::from_ids(&space, &["a"]).unwrap();
    let err = empirical_stats(
        &sampler,
        10,
        0,
        &[Query::OneDependentMargin {
            a,
            b: RegionSet::EMPTY,
        }],
        None,
    )
    .unwrap_err();
    assert!(matches!(err, shearer_core::Error::InvalidParameter(_)));
}

/// Sanity for the rng contract: one sampler, one seed, identical fields.
#[test]
fn draws_are_reproducible() {
    let space = path3();
    let measure = AtomicMeasure::uniform(&space, 0.2).unwrap();
    let sampler = ShearerSampler::new(&space, &measure).unwrap();
    for i in 0..50 {
        let mut rng_a: ChaCha12Rng = substream(7, i);
        let mut rng_b: ChaCha12Rng = substream(7, i);
        assert_eq!(
            sampler.sample(&mut rng_a).unwrap().occupied_region(),
            sampler.sample(&mut rng_b).unwrap().occupied_region()
        );
    }
}
