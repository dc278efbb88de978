//! Rejection sampling for the hard-sphere model: a Poisson proposal
//! conditioned on the 1-hard-core.
//!
//! The acceptance rate times `e^{M(B)}` is an unbiased estimate of the
//! partition function `Z(B, -M)`, which the audits compare against the exact
//! value.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::Error;
use crate::measure::AtomicMeasure;
use crate::sim::{rng::substream, BinaryField, FieldSampler, PointConfiguration};
use crate::space::{BoxRegion, FiniteMetricSpace};
use crate::zfun::{hard_sphere_partition_with, EvalLimits};
use crate::Result;

/// An accepted draw together with how many proposals it took.
#[derive(Debug, Clone)]
pub struct HardSphereDraw {
    pub configuration: PointConfiguration,
    pub attempts: u64,
    /// Set when the estimated acceptance probability is below `1e-3`, i.e.
    /// `max_attempts` is unlikely to suffice.
    pub low_acceptance: bool,
}

/// One Poisson proposal on an atomic space; `Some` iff it is 1-hard-core
/// (which also forces all per-atom counts to be at most one).
pub fn hard_sphere_attempt(
    space: &FiniteMetricSpace,
    fugacity: &AtomicMeasure,
    rng: &mut ChaCha12Rng,
) -> Result<Option<BinaryField>> {
    let mut occupied = 0u128;
    for i in 0..space.len() {
        let m = fugacity.mass(i);
        if m == 0.0 {
            continue;
        }
        let count = Poisson::new(m)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(rng);
        if count >= 2.0 {
            return Ok(None);
        }
        if count >= 1.0 {
            occupied |= 1u128 << i;
        }
    }
    let field = BinaryField::from_mask(space, occupied);
    Ok(field.is_hard_core(space).then_some(field))
}

fn acceptance_estimate(space: &FiniteMetricSpace, fugacity: &AtomicMeasure) -> f64 {
    let base = (-fugacity.total()).exp();
    // The exact partition factor when the space is small enough; the
    // conservative lower bound (partition >= 1) otherwise.
    match hard_sphere_partition_with(space, fugacity, space.full_region(), &EvalLimits::default())
    {
        Ok(z) => base * z,
        Err(_) => base,
    }
}

/// Rejection sampler for the hard-sphere model on an atomic space.
pub fn sample_hard_sphere(
    space: &FiniteMetricSpace,
    fugacity: &AtomicMeasure,
    seed: u64,
    max_attempts: u64,
) -> Result<HardSphereDraw> {
    fugacity.check_space(space)?;
    if max_attempts == 0 {
        return Err(Error::InvalidParameter("max_attempts must be positive".into()));
    }
    let low_acceptance = acceptance_estimate(space, fugacity) < 1e-3;
    let mut rng = substream(seed, 0);
    for attempt in 1..=max_attempts {
        if let Some(field) = hard_sphere_attempt(space, fugacity, &mut rng)? {
            return Ok(HardSphereDraw {
                configuration: PointConfiguration::from_field(space, &field),
                attempts: attempt,
                low_acceptance,
            });
        }
    }
    Err(Error::MaxAttemptsExhausted {
        attempts: max_attempts,
    })
}

/// Rejection sampler for the continuum hard-sphere model on a box with
/// homogeneous fugacity density `lambda`.
pub fn sample_hard_sphere_box(
    bounds: &BoxRegion,
    lambda: f64,
    seed: u64,
    max_attempts: u64,
) -> Result<HardSphereDraw> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "fugacity density {lambda} must be finite and >= 0"
        )));
    }
    if max_attempts == 0 {
        return Err(Error::InvalidParameter("max_attempts must be positive".into()));
    }
    let dim = bounds.dim();
    let mass = lambda * bounds.volume();
    let low_acceptance = (-mass).exp() < 1e-3;
    let poisson = if mass > 0.0 {
        Some(Poisson::new(mass).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let mut rng = substream(seed, 0);
    for attempt in 1..=max_attempts {
        let n_points = match &poisson {
            Some(p) => p.sample(&mut rng) as usize,
            None => 0,
        };
        let pts: Vec<Vec<f64>> = (0..n_points)
            .map(|_| {
                (0..dim)
                    .map(|d| {
                        let u: f64 = rng.random();
                        bounds.lower()[d] + u * (bounds.upper()[d] - bounds.lower()[d])
                    })
                    .collect()
            })
            .collect();
        let cfg = PointConfiguration::from_coords(pts);
        if cfg.is_hard_core {
            return Ok(HardSphereDraw {
                configuration: cfg,
                attempts: attempt,
                low_acceptance,
            });
        }
    }
    Err(Error::MaxAttemptsExhausted {
        attempts: max_attempts,
    })
}

/// Field-sampler wrapper: each draw is a full rejection run.
pub struct HardSphereSampler<'a> {
    space: &'a FiniteMetricSpace,
    fugacity: AtomicMeasure,
    max_attempts: u64,
}

impl<'a> HardSphereSampler<'a> {
    pub fn new(
        space: &'a FiniteMetricSpace,
        fugacity: &AtomicMeasure,
        max_attempts: u64,
    ) -> Result<Self> {
        fugacity.check_space(space)?;
        if max_attempts == 0 {
            return Err(Error::InvalidParameter("max_attempts must be positive".into()));
        }
        Ok(Self {
            space,
            fugacity: fugacity.clone(),
            max_attempts,
        })
    }
}

impl FieldSampler for HardSphereSampler<'_> {
    fn space(&self) -> &FiniteMetricSpace {
        self.space
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> Result<BinaryField> {
        for _ in 0..self.max_attempts {
            if let Some(field) = hard_sphere_attempt(self.space, &self.fugacity, rng)? {
                return Ok(field);
            }
        }
        Err(Error::MaxAttemptsExhausted {
            attempts: self.max_attempts,
        })
    }
}
