//! Shared fixtures for the kernel benchmarks.

use shearer_core::{AtomicMeasure, FiniteMetricSpace};

/// A deterministic scattered space: points on a low-discrepancy walk over a
/// square whose side scales with the point count.
pub fn scattered_space(n: usize) -> FiniteMetricSpace {
    let side = (n as f64).sqrt() * 0.85 + 0.4;
    let ids = (0..n).map(|i| format!("p{i:02}")).collect();
    let coords = (0..n)
        .map(|i| {
            let t = i as f64;
            vec![
                (t * 0.754_877_666).fract() * side,
                (t * 0.569_840_291).fract() * side,
            ]
        })
        .collect();
    FiniteMetricSpace::from_coords(ids, coords).expect("valid coordinates")
}

/// Masses cycling through a small range, scaled to keep the measure in the
/// everywhere-positive phase for the benchmark sizes.
pub fn light_measure(space: &FiniteMetricSpace, scale: f64) -> AtomicMeasure {
    let masses = (0..space.len())
        .map(|i| scale * (0.4 + 0.6 * ((i * 7 % 10) as f64 / 10.0)))
        .collect();
    AtomicMeasure::new(space, masses).expect("valid masses")
}
