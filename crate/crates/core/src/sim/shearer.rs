//! Sequential exact sampler for the minimal 1-dependent 1-hard-core process.
//!
//! The law is pinned down by its avoidance function `Z`, and the chain rule
//! for avoidance events gives the per-step occupation probability
//! `P(x occupied | E empty) = m_x · Z(E \ U(x)) / Z(E)`. Occupying `x`
//! removes its whole unit sphere from play; declaring it empty adds it to
//! the conditioning set. The resulting field is 1-hard-core by construction
//! and has avoidance probability `Z(S)` on every subset, which is what the
//! acceptance tests check.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::Error;
use crate::measure::AtomicMeasure;
use crate::sim::{rng::substream, BinaryField, FieldSampler};
use crate::space::{full_mask, FiniteMetricSpace};
use crate::zfun::{classify_phase, Phase, ZEngine};
use crate::Result;

pub struct ShearerSampler<'a> {
    space: &'a FiniteMetricSpace,
    masses: Vec<f64>,
}

impl<'a> ShearerSampler<'a> {
    /// Classifies the measure first: sampling needs `Z > 0` along the way,
    /// so only `POSITIVE` (or boundary, guarded at run time) measures are
    /// accepted.
    pub fn new(space: &'a FiniteMetricSpace, measure: &AtomicMeasure) -> Result<Self> {
        measure.check_space(space)?;
        let label = classify_phase(space, measure)?;
        match label.phase {
            Phase::Positive | Phase::ShBoundary => Ok(Self {
                space,
                masses: measure.masses().to_vec(),
            }),
            other => Err(Error::WrongPhase {
                expected: "POSITIVE or SH_BOUNDARY",
                found: other.as_str(),
            }),
        }
    }

    /// Skips the phase classification (useful beyond the full-subset scan
    /// limit, or for measures known to sit on the boundary by construction).
    /// The zero-denominator guard still aborts bad states at run time.
    pub fn new_unchecked(space: &'a FiniteMetricSpace, measure: &AtomicMeasure) -> Result<Self> {
        measure.check_space(space)?;
        Ok(Self {
            space,
            masses: measure.masses().to_vec(),
        })
    }
}

impl FieldSampler for ShearerSampler<'_> {
    fn space(&self) -> &FiniteMetricSpace {
        self.space
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> Result<BinaryField> {
        let space = self.space;
        let masses = &self.masses;
        // The memo is shared across the steps of this draw only.
        let mut engine = ZEngine::avoidance(space, masses);
        let mut active = full_mask(space.len());
        let mut empty = 0u128;
        let mut occupied = 0u128;
        loop {
            // Lowest-id undecided point with positive mass; zero-mass points
            // can never be occupied and do not alter any Z value.
            let undecided = active & !empty;
            let Some(x) = space
                .id_order()
                .iter()
                .copied()
                .find(|&i| undecided >> i & 1 == 1 && masses[i] > 0.0)
            else {
                break;
            };
            let z_empty = engine.value(empty);
            if z_empty <= 0.0 {
                return Err(Error::NumericalAbort(format!(
                    "avoidance value {z_empty} on the decided-empty set is not positive"
                )));
            }
            let ball = space.ball_mask(x);
            let p = masses[x] * engine.value(empty & !ball) / z_empty;
            debug_assert!((-1e-9..=1.0 + 1e-9).contains(&p), "p = {p}");
            if rng.random::<f64>() < p.clamp(0.0, 1.0) {
                occupied |= 1u128 << x;
                active &= !ball;
                empty &= !ball;
            } else {
                empty |= 1u128 << x;
            }
        }
        Ok(BinaryField::from_mask(space, occupied))
    }
}

/// One draw with a fresh sampler; convenience over [`ShearerSampler`].
pub fn sample_shearer(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    seed: u64,
) -> Result<BinaryField> {
    ShearerSampler::new(space, measure)?.sample(&mut substream(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::RegionSet;

    #[test]
    fn rejects_zero_phase_measure() {
        let s = FiniteMetricSpace::from_coords(
            vec!["a".into(), "b".into()],
            vec![vec![0.0], vec![0.5]],
        )
        .unwrap();
        let m = AtomicMeasure::uniform(&s, 0.6).unwrap();
        assert!(matches!(
            ShearerSampler::new(&s, &m),
            Err(Error::WrongPhase { .. })
        ));
    }

    #[test]
    fn single_atom_occupancy() {
        let s = FiniteMetricSpace::from_distances(vec!["x".into()], &[vec![0.0]], true).unwrap();
        let m = AtomicMeasure::new(&s, vec![0.4]).unwrap();
        let sampler = ShearerSampler::new(&s, &m).unwrap();
        let mut hits = 0u32;
        let n = 100_000u32;
        for i in 0..n {
            let f = sampler.sample(&mut substream(11, u64::from(i))).unwrap();
            if f.occupied(0) {
                hits += 1;
            }
        }
        let p = f64::from(hits) / f64::from(n);
        assert!((p - 0.4).abs() < 4.0 * (0.4f64 * 0.6 / f64::from(n)).sqrt());
    }

    #[test]
    fn draws_are_hard_core() {
        let s = FiniteMetricSpace::from_coords(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0], vec![0.5], vec![1.0]],
        )
        .unwrap();
        let m = AtomicMeasure::uniform(&s, 0.2).unwrap();
        let sampler = ShearerSampler::new(&s, &m).unwrap();
        let adjacent = RegionSet::from_ids(&s, &["a", "b"]).unwrap();
        for i in 0..2_000 {
            let f = sampler.sample(&mut substream(5, i)).unwrap();
            assert!(f.is_hard_core(&s));
            assert!(f.count_in(adjacent) <= 1);
        }
    }
}
