//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the crate.
///
/// Variants carry the offending ids or values so callers (and the CLI) can
/// report actionable diagnostics.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("distance matrix is {rows}x{cols}, expected square matching {expected} ids")]
    NotSquare {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("duplicate point id `{0}`")]
    DuplicateId(String),
    #[error("unknown point id `{0}`")]
    UnknownId(String),
    #[error("coordinates for `{id}` have {found} components, expected {expected}")]
    CoordDimension {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("distance between `{a}` and `{b}` is asymmetric: {forward} vs {backward}")]
    Asymmetric {
        a: String,
        b: String,
        forward: f64,
        backward: f64,
    },
    #[error("distance between `{a}` and `{b}` is negative or non-finite: {value}")]
    BadDistance { a: String, b: String, value: f64 },
    #[error("diagonal entry for `{a}` is {value}, expected 0")]
    NonzeroDiagonal { a: String, value: f64 },
    #[error(
        "triangle inequality violated: d({a},{c}) = {direct} > d({a},{b}) + d({b},{c}) = {via}"
    )]
    TriangleViolation {
        a: String,
        b: String,
        c: String,
        direct: f64,
        via: f64,
    },
    #[error("space has {count} points, the hard cap is {max}")]
    TooManyPoints { count: usize, max: usize },
    #[error("grid would have {cells} cells, the configured limit is {max}")]
    CellLimit { cells: usize, max: usize },
    #[error("invalid grid or box: {0}")]
    BadGrid(String),
    #[error("measure has {found} masses, space has {expected} points")]
    MeasureSpaceMismatch { expected: usize, found: usize },
    #[error("mass for `{id}` is {mass}; masses must be finite and non-negative")]
    BadMass { id: String, mass: f64 },

    #[error("{what} limited to {limit} points, region has {points}")]
    RegionTooLarge {
        what: &'static str,
        points: usize,
        limit: usize,
    },
    #[error("Z(B) = {value} is not positive; the ratio z(A, B) is undefined here")]
    ZeroDenominator { value: f64 },
    #[error("region has zero total mass")]
    ZeroMassRegion,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("fugacity {lambda} exceeds the admissible threshold {max}")]
    FugacityAboveThreshold { lambda: f64, max: f64 },
    #[error("auxiliary measure is not absolutely continuous: `{id}` has mass 0 but weight {n}")]
    SupportViolation { id: String, n: f64 },
    #[error("certificate condition does not hold; no bound value is available")]
    CertificateInvalid,

    #[error("atom `{id}` has mass {mass} > 1; no simple point process carries this intensity")]
    MassAboveOne { id: String, mass: f64 },
    #[error("intensity measure is in the {found} phase; {expected} required")]
    WrongPhase {
        expected: &'static str,
        found: &'static str,
    },
    #[error("rejection sampler exhausted {attempts} attempts")]
    MaxAttemptsExhausted { attempts: u64 },
    #[error("numerical abort: {0}")]
    NumericalAbort(String),
}
