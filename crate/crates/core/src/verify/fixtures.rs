//! Canonical trace triples exercised by the verification suites, all on
//! the interval (0,π) with the given horizon.

use std::f64::consts::PI;

use crate::domain::{BoundaryComponent, Point};
use crate::measures::{
    CornerMeasure, DensityExpr, InteriorMeasure, LateralMeasure, TraceTriple,
};

/// μ = sin(y) dy: the field is exactly e^{−t} sin x.
pub fn eigenfunction(horizon: f64) -> TraceTriple {
    TraceTriple::new(
        InteriorMeasure::from_density(0.0, PI, DensityExpr::Sin { omega: 1.0, amplitude: 1.0 }),
        CornerMeasure::zero(),
        LateralMeasure::zero(horizon),
    )
    .expect("valid fixture")
}

/// λ = mass at the left end: the field is the corner kernel itself.
pub fn corner_atom(horizon: f64, mass: f64) -> TraceTriple {
    TraceTriple::new(
        InteriorMeasure::zero(),
        CornerMeasure::from_atom(BoundaryComponent::Left, mass),
        LateralMeasure::zero(horizon),
    )
    .expect("valid fixture")
}

/// ν = dσ dt on both ends: the classical boundary-value-1 field
/// 1 − (4/π) Σ_{k odd} e^{−k²t} sin(kx)/k.
pub fn boundary_value_one(horizon: f64) -> TraceTriple {
    TraceTriple::new(
        InteriorMeasure::zero(),
        CornerMeasure::zero(),
        LateralMeasure::from_profile(
            horizon,
            &[BoundaryComponent::Left, BoundaryComponent::Right],
            DensityExpr::Const { value: 1.0 },
        ),
    )
    .expect("valid fixture")
}

/// ν with a smooth compactly supported time profile on both ends, the
/// round-trip lateral fixture (vanishes near t = 0 and t = T).
pub fn lateral_bump(horizon: f64) -> TraceTriple {
    TraceTriple::new(
        InteriorMeasure::zero(),
        CornerMeasure::zero(),
        LateralMeasure::from_profile(
            horizon,
            &[BoundaryComponent::Left, BoundaryComponent::Right],
            DensityExpr::Bump { start: 0.1 * horizon, end: 0.9 * horizon, ramp: 0.2 * horizon },
        ),
    )
    .expect("valid fixture")
}

/// ν = atom at (left, time).
pub fn lateral_atom(horizon: f64, time: f64, mass: f64) -> TraceTriple {
    TraceTriple::new(
        InteriorMeasure::zero(),
        CornerMeasure::zero(),
        LateralMeasure::from_atom(horizon, BoundaryComponent::Left, time, mass),
    )
    .expect("valid fixture")
}

/// μ = atom at the midpoint.
pub fn interior_atom(horizon: f64, mass: f64) -> TraceTriple {
    TraceTriple::new(
        InteriorMeasure::from_atom(Point::One(PI / 2.0), mass),
        CornerMeasure::zero(),
        LateralMeasure::zero(horizon),
    )
    .expect("valid fixture")
}

/// μ = δ(x)^{−1} dx: the boundary-blowup fixture. The δ-weighted mass is
/// π while the plain mass of u(·,t) grows without bound as t → 0.
pub fn blowup_mu(horizon: f64) -> TraceTriple {
    TraceTriple::new(
        InteriorMeasure::from_density(0.0, PI, DensityExpr::BoundaryPow { alpha: 1.0, scale: 1.0 }),
        CornerMeasure::zero(),
        LateralMeasure::zero(horizon),
    )
    .expect("valid fixture")
}

/// All round-trip fixtures with their names.
pub fn roundtrip_fixtures(horizon: f64) -> Vec<(&'static str, TraceTriple)> {
    vec![
        ("eigenfunction", eigenfunction(horizon)),
        ("corner-atom", corner_atom(horizon, 0.3)),
        ("lateral-bump", lateral_bump(horizon)),
    ]
}
