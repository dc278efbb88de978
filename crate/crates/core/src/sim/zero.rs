//! Product fields and the zero-phase construction.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::Error;
use crate::measure::AtomicMeasure;
use crate::sim::{rng::substream, BinaryField, FieldSampler, ShearerSampler};
use crate::space::{FiniteMetricSpace, RegionSet};
use crate::zfun::{classify_phase, critical_lambda, Phase};
use crate::Result;

/// Independent per-atom occupancy with the exact intensity: mass-1 atoms are
/// present deterministically, mass-`m` atoms with probability `m`. The field
/// is 0-dependent by construction.
pub struct ZeroDependentSampler<'a> {
    space: &'a FiniteMetricSpace,
    masses: Vec<f64>,
}

impl<'a> ZeroDependentSampler<'a> {
    pub fn new(space: &'a FiniteMetricSpace, measure: &AtomicMeasure) -> Result<Self> {
        measure.check_space(space)?;
        if let Some(i) = measure.index_above_one() {
            return Err(Error::MassAboveOne {
                id: space.id(i).to_string(),
                mass: measure.mass(i),
            });
        }
        Ok(Self {
            space,
            masses: measure.masses().to_vec(),
        })
    }
}

impl FieldSampler for ZeroDependentSampler<'_> {
    fn space(&self) -> &FiniteMetricSpace {
        self.space
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> Result<BinaryField> {
        let mut field = BinaryField::empty(self.space);
        for (i, &m) in self.masses.iter().enumerate() {
            let occupied = if m == 1.0 {
                true
            } else {
                rng.random::<f64>() < m
            };
            if occupied {
                field.set(i);
            }
        }
        Ok(field)
    }
}

/// One draw from [`ZeroDependentSampler`].
pub fn sample_zero_dependent(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    seed: u64,
) -> Result<BinaryField> {
    ZeroDependentSampler::new(space, measure)?.sample(&mut substream(seed, 0))
}

enum ZeroPhaseKind<'a> {
    /// A mass-one atom already forces a zero avoidance probability.
    DeterministicAtom { product: ZeroDependentSampler<'a> },
    /// Superposition on the witness: boundary-scaled hard-core field plus
    /// independent per-atom Poisson noise, product field outside.
    Superposition {
        shearer: ShearerSampler<'a>,
        poisson_rates: Vec<(usize, f64)>,
        outside: Vec<(usize, f64)>,
    },
}

/// Realises a 1-dependent field with intensity `M` whose avoidance
/// probability vanishes on a witness region; only possible when the measure
/// is outside the everywhere-positive phase.
///
/// With `Λ` the critical scaling of the witness `B`, the field on `B` is the
/// superposition of the hard-core field at `ΛM|_B` and independent Poisson
/// counts with rate `-log(1 - (1-Λ)m_x / (1 - Λ m_x))`, support-collapsed;
/// outside `B` it is the plain product field. Intensity works out to `M`
/// exactly and `P(B empty) = Z(B, ΛM) · e^{-N(B)} = 0`.
pub struct ZeroPhaseSampler<'a> {
    space: &'a FiniteMetricSpace,
    witness: RegionSet,
    lambda: f64,
    kind: ZeroPhaseKind<'a>,
}

impl<'a> ZeroPhaseSampler<'a> {
    pub fn new(space: &'a FiniteMetricSpace, measure: &AtomicMeasure) -> Result<Self> {
        measure.check_space(space)?;
        // A mass-one atom short-circuits: the product field is already never
        // empty on that atom.
        if let Some(i) = measure.masses().iter().position(|&m| m == 1.0) {
            return Ok(Self {
                space,
                witness: RegionSet::from_indices(space, &[i])?,
                lambda: 1.0,
                kind: ZeroPhaseKind::DeterministicAtom {
                    product: ZeroDependentSampler::new(space, measure)?,
                },
            });
        }
        let label = classify_phase(space, measure)?;
        let witness = match label.phase {
            Phase::Zero | Phase::ShBoundary => {
                label.witness.expect("witness accompanies these labels")
            }
            Phase::Empty => {
                return Err(Error::WrongPhase {
                    expected: "ZERO or SH_BOUNDARY",
                    found: "EMPTY",
                })
            }
            Phase::Positive => {
                return Err(Error::WrongPhase {
                    expected: "ZERO or SH_BOUNDARY",
                    found: "POSITIVE",
                })
            }
        };
        let lambda = critical_lambda(space, measure, witness, 1e-12)?;
        let scaled = measure.scaled(lambda)?.restricted(witness);
        let poisson_rates = witness
            .indices()
            .map(|x| {
                let m = measure.mass(x);
                let boosted = (1.0 - lambda) * m / (1.0 - lambda * m);
                (x, -(1.0 - boosted).ln())
            })
            .collect();
        let outside = (0..space.len())
            .filter(|&i| !witness.contains_index(i))
            .map(|i| (i, measure.mass(i)))
            .collect();
        Ok(Self {
            space,
            witness,
            lambda,
            kind: ZeroPhaseKind::Superposition {
                // Z(B, ΛM) = 0 by construction, so the full-subset phase
                // check would reject; the run-time guard covers us instead.
                shearer: ShearerSampler::new_unchecked(space, &scaled)?,
                poisson_rates,
                outside,
            },
        })
    }

    /// The region whose avoidance probability is exactly zero.
    pub fn witness(&self) -> RegionSet {
        self.witness
    }

    /// The critical scaling factor of the witness region.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl FieldSampler for ZeroPhaseSampler<'_> {
    fn space(&self) -> &FiniteMetricSpace {
        self.space
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> Result<BinaryField> {
        match &self.kind {
            ZeroPhaseKind::DeterministicAtom { product } => product.sample(rng),
            ZeroPhaseKind::Superposition {
                shearer,
                poisson_rates,
                outside,
                ..
            } => {
                let mut field = BinaryField::empty(self.space);
                for &(i, m) in outside {
                    let occupied = if m == 1.0 {
                        true
                    } else {
                        rng.random::<f64>() < m
                    };
                    if occupied {
                        field.set(i);
                    }
                }
                let core = shearer.sample(rng)?;
                for i in self.witness.indices() {
                    if core.occupied(i) {
                        field.set(i);
                    }
                }
                for &(i, rate) in poisson_rates {
                    if rate > 0.0 {
                        let poisson = Poisson::new(rate)
                            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                        if poisson.sample(rng) >= 1.0 {
                            field.set(i);
                        }
                    }
                }
                Ok(field)
            }
        }
    }
}

/// One draw plus the witness region; convenience over [`ZeroPhaseSampler`].
pub fn construct_zero_phase(
    space: &FiniteMetricSpace,
    measure: &AtomicMeasure,
    seed: u64,
) -> Result<(BinaryField, RegionSet)> {
    let sampler = ZeroPhaseSampler::new(space, measure)?;
    let field = sampler.sample(&mut substream(seed, 0))?;
    Ok((field, sampler.witness()))
}
