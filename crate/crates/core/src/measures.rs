//! The trace-triple data model: interior measures μ with finite δ-weighted
//! mass, finite corner measures λ on ∂Ω, and lateral measures ν on
//! ∂Ω×(0,T) finite on every (0,T₁).
//!
//! Measures are represented as atoms plus piecewise closed-form densities
//! — the subclass a file format can carry. Densities may blow up like
//! δ(x)^{−α} near ∂Ω for α < 2, which keeps ∫δ dμ finite while the plain
//! mass may diverge. Admissibility is gated exactly by the three defining
//! inequalities; violations are rejected naming the offending entry.

use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryComponent, BoundaryPoint, Domain, Point};
use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureResult, SingularEnd};

/// Closed-form or sampled density expression. Used both for spatial
/// densities (argument x) and lateral time profiles (argument t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityExpr {
    /// Constant value.
    Const { value: f64 },
    /// amplitude · sin(omega · x).
    Sin {
        #[serde(default = "one")]
        omega: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Polynomial Σ coeffs[i] · x^i.
    Poly { coeffs: Vec<f64> },
    /// scale · δ(x)^{−alpha}: boundary blowup (spatial densities only).
    BoundaryPow { alpha: f64, scale: f64 },
    /// Piecewise-linear interpolation of samples; zero outside the range.
    Samples { xs: Vec<f64>, values: Vec<f64> },
    /// C² bump: 0 outside (start, end), quintic ramps of width `ramp`,
    /// plateau 1 between.
    Bump { start: f64, end: f64, ramp: f64 },
    /// scale / (center − x), for σ-finite lateral densities diverging at
    /// the horizon. The pole must lie at or beyond the carrier's end.
    Recip { center: f64, scale: f64 },
}

fn one() -> f64 {
    1.0
}

impl DensityExpr {
    /// Pointwise evaluation. `delta` supplies δ(x) for boundary blowups;
    /// expressions that need it fail without one.
    pub fn eval(&self, x: f64, delta: Option<f64>) -> Result<f64> {
        Ok(match self {
            DensityExpr::Const { value } => *value,
            DensityExpr::Sin { omega, amplitude } => amplitude * (omega * x).sin(),
            DensityExpr::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            DensityExpr::BoundaryPow { alpha, scale } => {
                let d = delta.ok_or_else(|| {
                    Error::Measure("boundary_pow density needs a spatial carrier".into())
                })?;
                if d <= 0.0 {
                    return Err(Error::Measure("boundary_pow evaluated on ∂Ω".into()));
                }
                scale * d.powf(-alpha)
            }
            DensityExpr::Samples { xs, values } => {
                if x <= xs[0] || x >= *xs.last().unwrap() {
                    0.0
                } else {
                    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
                    let (x0, x1) = (xs[i - 1], xs[i]);
                    let w = (x - x0) / (x1 - x0);
                    values[i - 1] * (1.0 - w) + values[i] * w
                }
            }
            DensityExpr::Bump { start, end, ramp } => bump_value(x, *start, *end, *ramp),
            DensityExpr::Recip { center, scale } => {
                if x >= *center {
                    return Err(Error::Measure(format!(
                        "recip density evaluated at or beyond its pole {center}"
                    )));
                }
                scale / (center - x)
            }
        })
    }

    /// Time derivative, for profiles used as boundary test functions.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        Ok(match self {
            DensityExpr::Const { .. } => 0.0,
            DensityExpr::Sin { omega, amplitude } => amplitude * omega * (omega * x).cos(),
            DensityExpr::Poly { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c * x.powi(k as i32 - 1))
                .sum(),
            DensityExpr::Bump { start, end, ramp } => bump_derivative(x, *start, *end, *ramp),
            DensityExpr::Recip { center, scale } => scale / ((center - x) * (center - x)),
            _ => {
                return Err(Error::Measure(
                    "derivative unavailable for this density kind".into(),
                ))
            }
        })
    }

    /// Exact integral over [a, b] where a closed form exists; `None`
    /// signals the caller to fall back to quadrature.
    pub fn exact_integral(&self, a: f64, b: f64) -> Option<f64> {
        match self {
            DensityExpr::Const { value } => Some(value * (b - a)),
            DensityExpr::Sin { omega, amplitude } => {
                Some(amplitude / omega * ((omega * a).cos() - (omega * b).cos()))
            }
            DensityExpr::Poly { coeffs } => Some(
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c / (k as f64 + 1.0) * (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)))
                    .sum(),
            ),
            DensityExpr::Bump { start, end, ramp } => {
                Some(bump_antiderivative(b, *start, *end, *ramp) - bump_antiderivative(a, *start, *end, *ramp))
            }
            DensityExpr::Recip { center, scale } => {
                if b >= *center {
                    None
                } else {
                    Some(scale * ((center - a) / (center - b)).ln())
                }
            }
            _ => None,
        }
    }

    fn blowup_alpha(&self) -> Option<f64> {
        match self {
            DensityExpr::BoundaryPow { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    /// Support bounds when the expression vanishes identically outside a
    /// window (bump, samples).
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            DensityExpr::Bump { start, end, .. } => Some((*start, *end)),
            DensityExpr::Samples { xs, .. } => Some((xs[0], *xs.last().unwrap())),
            _ => None,
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        match self {
            DensityExpr::Const { value } => {
                if *value < 0.0 {
                    return Err(Error::Measure(format!("{path}: negative constant {value}")));
                }
            }
            DensityExpr::BoundaryPow { alpha, scale } => {
                if !(0.0..2.0).contains(alpha) {
                    return Err(Error::Measure(format!(
                        "{path}: blowup exponent {alpha} outside [0, 2)"
                    )));
                }
                if *scale < 0.0 {
                    return Err(Error::Measure(format!("{path}: negative scale {scale}")));
                }
            }
            DensityExpr::Samples { xs, values } => {
                if xs.len() != values.len() || xs.len() < 2 {
                    return Err(Error::Measure(format!(
                        "{path}: samples need matching xs/values of length >= 2"
                    )));
                }
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Measure(format!("{path}: xs must be increasing")));
                }
                if let Some(v) = values.iter().find(|v| **v < 0.0) {
                    return Err(Error::Measure(format!("{path}: negative sample value {v}")));
                }
            }
            DensityExpr::Bump { start, end, ramp } => {
                if !(*ramp > 0.0 && end - start >= 2.0 * ramp) {
                    return Err(Error::Measure(format!(
                        "{path}: bump needs 0 < ramp and end − start >= 2·ramp"
                    )));
                }
            }
            DensityExpr::Recip { scale, .. } => {
                if *scale < 0.0 {
                    return Err(Error::Measure(format!("{path}: negative scale {scale}")));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn smoothstep_int(u: f64) -> f64 {
    // ∫₀ᵘ (6v⁵−15v⁴+10v³) dv = u⁶ − 3u⁵ + 2.5u⁴
    u.powi(4) * (u * u - 3.0 * u + 2.5)
}

fn smoothstep_val(u: f64) -> f64 {
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

fn bump_value(t: f64, start: f64, end: f64, ramp: f64) -> f64 {
    if t <= start || t >= end {
        0.0
    } else if t < start + ramp {
        smoothstep_val((t - start) / ramp)
    } else if t <= end - ramp {
        1.0
    } else {
        smoothstep_val((end - t) / ramp)
    }
}

fn bump_derivative(t: f64, start: f64, end: f64, ramp: f64) -> f64 {
    let ds = |u: f64| 30.0 * u * u * (u - 1.0) * (u - 1.0);
    if t <= start || t >= end {
        0.0
    } else if t < start + ramp {
        ds((t - start) / ramp) / ramp
    } else if t <= end - ramp {
        0.0
    } else {
        -ds((end - t) / ramp) / ramp
    }
}

fn bump_antiderivative(t: f64, start: f64, end: f64, ramp: f64) -> f64 {
    if t <= start {
        0.0
    } else if t < start + ramp {
        ramp * smoothstep_int((t - start) / ramp)
    } else if t <= end - ramp {
        ramp * 0.5 + (t - start - ramp)
    } else if t < end {
        ramp * 0.5 + (end - start - 2.0 * ramp) + ramp * (0.5 - smoothstep_int((end - t) / ramp))
    } else {
        end - start - ramp
    }
}

/// Atom location serialization: a number (1D) or a pair (2D).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum AtomLocation {
    One(f64),
    Two([f64; 2]),
}

impl From<AtomLocation> for Point {
    fn from(a: AtomLocation) -> Point {
        match a {
            AtomLocation::One(x) => Point::One(x),
            AtomLocation::Two([x, y]) => Point::Two(x, y),
        }
    }
}

impl From<Point> for AtomLocation {
    fn from(p: Point) -> AtomLocation {
        match p {
            Point::One(x) => AtomLocation::One(x),
            Point::Two(x, y) => AtomLocation::Two([x, y]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorAtom {
    #[serde(rename = "at")]
    location: AtomLocation,
    pub mass: f64,
}

impl InteriorAtom {
    pub fn new(location: Point, mass: f64) -> Self {
        InteriorAtom { location: location.into(), mass }
    }

    pub fn location(&self) -> Point {
        self.location.into()
    }
}

/// One density piece of an interior measure: `expr` on the 1D segment
/// [from, to].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySegment {
    pub from: f64,
    pub to: f64,
    pub expr: DensityExpr,
}

/// The bottom-trace measure μ ∈ M(Ω,δ): nonnegative with ∫δ dμ < ∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct InteriorMeasure {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<InteriorAtom>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub density: Vec<DensitySegment>,
    /// Declared δ^{−α} blowup rate of the density near ∂Ω, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_exponent: Option<f64>,
}

impl InteriorMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_atom(location: Point, mass: f64) -> Self {
        InteriorMeasure { atoms: vec![InteriorAtom::new(location, mass)], ..Self::default() }
    }

    pub fn from_density(from: f64, to: f64, expr: DensityExpr) -> Self {
        let blowup = expr.blowup_alpha();
        InteriorMeasure {
            density: vec![DensitySegment { from, to, expr }],
            blowup_exponent: blowup,
            ..Self::default()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_empty()
    }

    fn validate_local(&self) -> Result<()> {
        for (i, a) in self.atoms.iter().enumerate() {
            if !(a.mass >= 0.0) {
                return Err(Error::Measure(format!("mu.atoms[{i}]: negative mass {}", a.mass)));
            }
        }
        for (i, s) in self.density.iter().enumerate() {
            if s.to <= s.from {
                return Err(Error::Measure(format!(
                    "mu.density[{i}]: empty segment [{}, {}]",
                    s.from, s.to
                )));
            }
            s.expr.validate(&format!("mu.density[{i}]"))?;
        }
        if let Some(alpha) = self.blowup_exponent {
            if !(0.0..2.0).contains(&alpha) {
                return Err(Error::Measure(format!(
                    "mu.blowup_exponent {alpha} outside [0, 2): ∫δ dμ diverges"
                )));
            }
        }
        Ok(())
    }

    /// Admissibility against a domain: atoms inside Ω, densities
    /// nonnegative (sampled), δ-weighted mass finite.
    pub fn check_admissible(&self, domain: &Domain) -> Result<()> {
        self.validate_local()?;
        for (i, a) in self.atoms.iter().enumerate() {
            if !domain.contains(a.location()) {
                return Err(Error::Measure(format!("mu.atoms[{i}]: location outside Ω")));
            }
        }
        for (i, s) in self.density.iter().enumerate() {
            if domain.dimension() != 1 {
                return Err(Error::Unsupported(
                    "interior densities are supported on interval domains only".into(),
                ));
            }
            let (a, b) = domain.interval_bounds()?;
            if s.from < a - 1e-12 || s.to > b + 1e-12 {
                return Err(Error::Measure(format!(
                    "mu.density[{i}]: segment outside Ω = ({a}, {b})"
                )));
            }
            for j in 1..32 {
                let x = s.from + (s.to - s.from) * j as f64 / 32.0;
                let v = s.expr.eval(x, Some(domain.delta(x.into())?))?;
                if v < 0.0 {
                    return Err(Error::Measure(format!(
                        "mu.density[{i}]: negative value {v} at x = {x}"
                    )));
                }
            }
        }
        self.weighted_mass(domain)?;
        Ok(())
    }

    /// ∫_Ω δ dμ: exact atom sum plus density quadrature (graded toward
    /// the boundary when the density blows up). Divergent blowups are
    /// rejected.
    pub fn weighted_mass(&self, domain: &Domain) -> Result<QuadratureResult> {
        let mut value: f64 = 0.0;
        let mut error = 0.0;
        let mut evaluations = 0;
        for a in &self.atoms {
            value += a.mass * domain.delta(a.location())?;
        }
        for s in &self.density {
            let r = self.integrate_segment_weighted(domain, s, 1e-9)?;
            value += r.value;
            error += r.error_estimate;
            evaluations += r.evaluations;
        }
        Ok(QuadratureResult { value, error_estimate: error, evaluations, converged: true })
    }

    fn integrate_segment_weighted(
        &self,
        domain: &Domain,
        s: &DensitySegment,
        tol: f64,
    ) -> Result<QuadratureResult> {
        let (a, b) = domain.interval_bounds()?;
        let mid = 0.5 * (a + b);
        let expr = &s.expr;
        let d = *domain;
        let f = move |x: f64| {
            let delta = d.delta(x.into()).unwrap_or(0.0);
            expr.eval(x, Some(delta)).unwrap_or(f64::NAN) * delta
        };
        match expr.blowup_alpha() {
            Some(alpha) => {
                // Graded toward whichever ends the segment touches.
                let mut total = QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 0, converged: true };
                let pieces = [
                    (s.from, s.to.min(mid), SingularEnd::Lower),
                    (s.from.max(mid), s.to, SingularEnd::Upper),
                ];
                for (lo, hi, end) in pieces {
                    if hi <= lo {
                        continue;
                    }
                    let r = quadrature::integrate_graded(f, lo, hi, end, alpha, tol / 2.0)?;
                    total.value += r.value;
                    total.error_estimate += r.error_estimate;
                    total.evaluations += r.evaluations;
                    total.converged &= r.converged;
                }
                Ok(total)
            }
            None => quadrature::integrate_adaptive(f, s.from, s.to, tol),
        }
    }

    /// ∫ f dμ: atom sum plus density quadrature to tolerance `tol`.
    pub fn integrate_against<F>(&self, domain: &Domain, f: F, tol: f64) -> Result<QuadratureResult>
    where
        F: Fn(Point) -> f64,
    {
        let mut value: f64 = 0.0;
        let mut error = 0.0;
        let mut evaluations = 0;
        for a in &self.atoms {
            value += a.mass * f(a.location());
        }
        for s in &self.density {
            let d = *domain;
            let expr = &s.expr;
            let g = |x: f64| {
                let delta = d.delta(x.into()).unwrap_or(0.0);
                expr.eval(x, Some(delta)).unwrap_or(f64::NAN) * f(Point::One(x))
            };
            let r = match expr.blowup_alpha() {
                Some(alpha) => {
                    let (a0, b0) = domain.interval_bounds()?;
                    let mid = 0.5 * (a0 + b0);
                    let mut acc = QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 0, converged: true };
                    for (lo, hi, end) in [
                        (s.from, s.to.min(mid), SingularEnd::Lower),
                        (s.from.max(mid), s.to, SingularEnd::Upper),
                    ] {
                        if hi <= lo {
                            continue;
                        }
                        let r = quadrature::integrate_graded(g, lo, hi, end, alpha, tol / 2.0)?;
                        acc.value += r.value;
                        acc.error_estimate += r.error_estimate;
                        acc.evaluations += r.evaluations;
                        acc.converged &= r.converged;
                    }
                    acc
                }
                None => quadrature::integrate_adaptive(g, s.from, s.to, tol)?,
            };
            value += r.value;
            error += r.error_estimate;
            evaluations += r.evaluations;
        }
        Ok(QuadratureResult { value, error_estimate: error, evaluations, converged: true })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerAtom {
    pub component: BoundaryComponent,
    /// Position along the side, for rectangle sides.
    #[serde(default, skip_serializing_if = "is_zero_f64")]
    pub along: f64,
    pub mass: f64,
}

fn is_zero_f64(v: &f64) -> bool {
    *v == 0.0
}

impl CornerAtom {
    pub fn boundary_point(&self) -> BoundaryPoint {
        BoundaryPoint::on_side(self.component, self.along)
    }
}

/// The corner-trace measure λ ∈ M(∂Ω): finite because ∂Ω is compact.
/// Purely atomic on the interval (two sites).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CornerMeasure {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<CornerAtom>,
}

impl CornerMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_atom(component: BoundaryComponent, mass: f64) -> Self {
        CornerMeasure { atoms: vec![CornerAtom { component, along: 0.0, mass }] }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Mass at one component (interval use).
    pub fn component_mass(&self, component: BoundaryComponent) -> f64 {
        self.atoms.iter().filter(|a| a.component == component).map(|a| a.mass).sum()
    }

    pub fn check_admissible(&self, domain: &Domain) -> Result<()> {
        for (i, a) in self.atoms.iter().enumerate() {
            if !(a.mass >= 0.0) {
                return Err(Error::Measure(format!(
                    "lambda.atoms[{i}]: negative mass {}",
                    a.mass
                )));
            }
            if !domain.boundary_components().contains(&a.component) {
                return Err(Error::Measure(format!(
                    "lambda.atoms[{i}]: component {} not on ∂Ω",
                    a.component.label()
                )));
            }
        }
        Ok(())
    }

    /// ∫ f dλ (finite atom sum).
    pub fn integrate_against<F>(&self, f: F) -> f64
    where
        F: Fn(&BoundaryPoint) -> f64,
    {
        self.atoms.iter().map(|a| a.mass * f(&a.boundary_point())).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LateralAtom {
    pub component: BoundaryComponent,
    #[serde(default, skip_serializing_if = "is_zero_f64")]
    pub along: f64,
    pub time: f64,
    pub mass: f64,
}

/// One lateral density piece: a time profile on a boundary component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LateralDensity {
    pub component: BoundaryComponent,
    pub profile: DensityExpr,
}

/// The lateral-trace measure ν ∈ M_s(∂Ω×(0,T)): finite on ∂Ω×(0,T₁) for
/// every T₁ < T, possibly infinite on the full cylinder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LateralMeasure {
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<LateralAtom>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub density: Vec<LateralDensity>,
}

impl LateralMeasure {
    pub fn zero(horizon: f64) -> Self {
        LateralMeasure { horizon, atoms: Vec::new(), density: Vec::new() }
    }

    pub fn from_atom(horizon: f64, component: BoundaryComponent, time: f64, mass: f64) -> Self {
        LateralMeasure {
            horizon,
            atoms: vec![LateralAtom { component, along: 0.0, time, mass }],
            density: Vec::new(),
        }
    }

    /// Density `profile` on every listed component.
    pub fn from_profile(
        horizon: f64,
        components: &[BoundaryComponent],
        profile: DensityExpr,
    ) -> Self {
        LateralMeasure {
            horizon,
            atoms: Vec::new(),
            density: components
                .iter()
                .map(|&component| LateralDensity { component, profile: profile.clone() })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_empty()
    }

    pub fn check_admissible(&self, domain: &Domain) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(Error::Measure(format!("nu.horizon {} must be positive", self.horizon)));
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if !(a.mass >= 0.0) {
                return Err(Error::Measure(format!("nu.atoms[{i}]: negative mass {}", a.mass)));
            }
            if !(a.time > 0.0 && a.time < self.horizon) {
                return Err(Error::Measure(format!(
                    "nu.atoms[{i}]: time {} outside (0, {})",
                    a.time, self.horizon
                )));
            }
            if !domain.boundary_components().contains(&a.component) {
                return Err(Error::Measure(format!(
                    "nu.atoms[{i}]: component {} not on ∂Ω",
                    a.component.label()
                )));
            }
        }
        for (i, d) in self.density.iter().enumerate() {
            d.profile.validate(&format!("nu.density[{i}]"))?;
            if matches!(d.profile, DensityExpr::BoundaryPow { .. }) {
                return Err(Error::Measure(format!(
                    "nu.density[{i}]: boundary_pow is not a time profile"
                )));
            }
            if let DensityExpr::Recip { center, .. } = d.profile {
                if center < self.horizon {
                    return Err(Error::Measure(format!(
                        "nu.density[{i}]: pole {center} inside (0, {})",
                        self.horizon
                    )));
                }
            }
            // σ-finiteness probe: mass up to (horizon − horizon/64) must
            // be finite even when the full mass diverges.
            let t1 = self.horizon * (1.0 - 1.0 / 64.0);
            let m = density_mass(&d.profile, 0.0, t1)?;
            if !m.is_finite() {
                return Err(Error::Measure(format!(
                    "nu.density[{i}]: infinite mass below T₁ = {t1}"
                )));
            }
        }
        Ok(())
    }

    /// ν(∂Ω×(0,T₁)).
    pub fn lateral_mass(&self, t1: f64) -> Result<f64> {
        if !(t1 > 0.0 && t1 < self.horizon) {
            return Err(Error::Time(format!(
                "T₁ = {t1} outside (0, horizon = {})",
                self.horizon
            )));
        }
        let mut mass: f64 = self.atoms.iter().filter(|a| a.time < t1).map(|a| a.mass).sum();
        for d in &self.density {
            mass += density_mass(&d.profile, 0.0, t1)?;
        }
        Ok(mass)
    }

    /// Mass of one component restricted to a time window (exact where the
    /// profile has a closed-form antiderivative).
    pub fn window_mass(&self, component: BoundaryComponent, t0: f64, t1: f64) -> Result<f64> {
        let mut mass: f64 = self
            .atoms
            .iter()
            .filter(|a| a.component == component && a.time >= t0 && a.time < t1)
            .map(|a| a.mass)
            .sum();
        for d in self.density.iter().filter(|d| d.component == component) {
            mass += density_mass(&d.profile, t0, t1)?;
        }
        Ok(mass)
    }

    /// ∬ f dν over ∂Ω×(t0,t1).
    pub fn integrate_against_window<F>(
        &self,
        f: F,
        t0: f64,
        t1: f64,
        tol: f64,
    ) -> Result<QuadratureResult>
    where
        F: Fn(&BoundaryPoint, f64) -> f64,
    {
        let mut value: f64 = 0.0;
        let mut error = 0.0;
        let mut evaluations = 0;
        for a in &self.atoms {
            if a.time >= t0 && a.time < t1 {
                value +=
                    a.mass * f(&BoundaryPoint::on_side(a.component, a.along), a.time);
            }
        }
        for d in &self.density {
            let z = BoundaryPoint::new(d.component);
            let profile = &d.profile;
            let r = quadrature::integrate_adaptive(
                |t| profile.eval(t, None).unwrap_or(f64::NAN) * f(&z, t),
                t0,
                t1,
                tol / self.density.len().max(1) as f64,
            )?;
            value += r.value;
            error += r.error_estimate;
            evaluations += r.evaluations;
        }
        Ok(QuadratureResult { value, error_estimate: error, evaluations, converged: true })
    }
}

fn density_mass(profile: &DensityExpr, t0: f64, t1: f64) -> Result<f64> {
    if let Some(v) = profile.exact_integral(t0, t1) {
        return Ok(v);
    }
    Ok(quadrature::integrate_adaptive(|t| profile.eval(t, None).unwrap_or(f64::NAN), t0, t1, 1e-10)?.value)
}

/// The trace triple (μ, λ, ν) with a common horizon T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceTriple {
    pub schema_version: u32,
    pub horizon: f64,
    #[serde(default)]
    pub mu: InteriorMeasure,
    #[serde(default)]
    pub lambda: CornerMeasure,
    pub nu: LateralMeasure,
}

pub const SCHEMA_VERSION: u32 = 1;

impl TraceTriple {
    pub fn new(mu: InteriorMeasure, lambda: CornerMeasure, nu: LateralMeasure) -> Result<Self> {
        let horizon = nu.horizon;
        let t = TraceTriple { schema_version: SCHEMA_VERSION, horizon, mu, lambda, nu };
        t.validate_horizons()?;
        Ok(t)
    }

    pub fn zero(horizon: f64) -> Self {
        TraceTriple {
            schema_version: SCHEMA_VERSION,
            horizon,
            mu: InteriorMeasure::zero(),
            lambda: CornerMeasure::zero(),
            nu: LateralMeasure::zero(horizon),
        }
    }

    fn validate_horizons(&self) -> Result<()> {
        if !(self.horizon > 0.0) {
            return Err(Error::Measure(format!("horizon {} must be positive", self.horizon)));
        }
        if (self.nu.horizon - self.horizon).abs() > 1e-12 * self.horizon.max(1.0) {
            return Err(Error::Measure(format!(
                "horizon mismatch: triple {} vs nu {}",
                self.horizon, self.nu.horizon
            )));
        }
        Ok(())
    }

    pub fn check_admissible(&self, domain: &Domain) -> Result<()> {
        self.validate_horizons()?;
        self.mu.check_admissible(domain)?;
        self.lambda.check_admissible(domain)?;
        self.nu.check_admissible(domain)?;
        Ok(())
    }
}

/// Parse a trace triple from its JSON schema.
pub fn parse_measure(text: &str) -> Result<TraceTriple> {
    let t: TraceTriple =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("triple file: {e}")))?;
    if t.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            t.schema_version
        )));
    }
    t.validate_horizons()?;
    t.mu.validate_local()?;
    for (i, a) in t.lambda.atoms.iter().enumerate() {
        if !(a.mass >= 0.0) {
            return Err(Error::Measure(format!("lambda.atoms[{i}]: negative mass {}", a.mass)));
        }
    }
    for (i, a) in t.nu.atoms.iter().enumerate() {
        if !(a.mass >= 0.0) {
            return Err(Error::Measure(format!("nu.atoms[{i}]: negative mass {}", a.mass)));
        }
    }
    Ok(t)
}

/// Serialize a trace triple to its JSON schema (pretty-printed; float
/// formatting is shortest-round-trip so parse∘serialize is exact).
pub fn serialize_measure(t: &TraceTriple) -> Result<String> {
    Ok(serde_json::to_string_pretty(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn canonical() -> Domain {
        Domain::default()
    }

    #[test]
    fn weighted_mass_atom_at_center() {
        let mu = InteriorMeasure::from_atom(Point::One(PI / 2.0), 1.0);
        let m = mu.weighted_mass(&canonical()).unwrap();
        assert_abs_diff_eq!(m.value, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn weighted_mass_lebesgue() {
        let mu = InteriorMeasure::from_density(0.0, PI, DensityExpr::Const { value: 1.0 });
        let m = mu.weighted_mass(&canonical()).unwrap();
        // ∫₀^π δ = two triangles of area (π/2)²/2.
        assert_abs_diff_eq!(m.value, PI * PI / 4.0, epsilon = 1e-8);
    }

    #[test]
    fn weighted_mass_blowup_class() {
        // δ^{−1}: ∫ δ·δ^{−1} = π, admissible.
        let mu = InteriorMeasure::from_density(
            0.0,
            PI,
            DensityExpr::BoundaryPow { alpha: 1.0, scale: 1.0 },
        );
        let m = mu.weighted_mass(&canonical()).unwrap();
        assert_abs_diff_eq!(m.value, PI, epsilon = 1e-7);

        // δ^{−2} is outside the admissible class.
        let bad = InteriorMeasure::from_density(
            0.0,
            PI,
            DensityExpr::BoundaryPow { alpha: 2.0, scale: 1.0 },
        );
        assert!(bad.check_admissible(&canonical()).is_err());
    }

    #[test]
    fn lateral_mass_examples() {
        let d = canonical();
        // dσ dt on both ends of (0,1): mass up to 0.5 is 2 × 0.5.
        let nu = LateralMeasure::from_profile(
            1.0,
            d.boundary_components(),
            DensityExpr::Const { value: 1.0 },
        );
        assert_abs_diff_eq!(nu.lateral_mass(0.5).unwrap(), 1.0, epsilon = 1e-12);

        // Atom after the cutoff does not count.
        let nu = LateralMeasure::from_atom(1.0, BoundaryComponent::Left, 0.7, 3.0);
        assert_abs_diff_eq!(nu.lateral_mass(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(nu.lateral_mass(0.8).unwrap(), 3.0);

        // 1/(T−t): every T₁ < T finite, grows without bound as T₁ → T.
        let nu = LateralMeasure::from_profile(
            1.0,
            &[BoundaryComponent::Left],
            DensityExpr::Recip { center: 1.0, scale: 1.0 },
        );
        nu.check_admissible(&d).unwrap();
        let m_early = nu.lateral_mass(0.9).unwrap();
        let m_late = nu.lateral_mass(1.0 - 1e-9).unwrap();
        assert!(m_early.is_finite() && m_late.is_finite());
        assert!(m_late > m_early + 10.0, "mass must blow up toward the horizon");
        assert!(nu.lateral_mass(1.0).is_err(), "T₁ must stay below the horizon");
    }

    #[test]
    fn integrate_against_examples() {
        let d = canonical();
        // Atom of mass 2 at π/2 against sin.
        let mu = InteriorMeasure::from_atom(Point::One(PI / 2.0), 2.0);
        let r = mu
            .integrate_against(&d, |p| p.scalar().unwrap().sin(), 1e-10)
            .unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-14);

        // g ≡ 1 on both ends × (0,1) against e^{−t}: 2(1−e^{−1}).
        let nu = LateralMeasure::from_profile(
            1.0,
            d.boundary_components(),
            DensityExpr::Const { value: 1.0 },
        );
        let r = nu
            .integrate_against_window(|_, t| (-t).exp(), 0.0, 1.0, 1e-10)
            .unwrap();
        assert_abs_diff_eq!(r.value, 1.264_241_117_657_115_4, epsilon = 1e-10);

        // λ atom at the left end against the Martin kernel at π/2.
        let lambda = CornerMeasure::from_atom(BoundaryComponent::Left, 1.0);
        let e = crate::kernels::EllipticGreen::new(d);
        let v = lambda.integrate_against(|z| e.martin((PI / 2.0).into(), z).unwrap());
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn parse_serialize_round_trip() {
        let nu = LateralMeasure::from_profile(
            1.0,
            &[BoundaryComponent::Left, BoundaryComponent::Right],
            DensityExpr::Const { value: 1.0 },
        );
        let t = TraceTriple::new(
            InteriorMeasure::from_atom(Point::One(0.5 * PI), 1.0),
            CornerMeasure::from_atom(BoundaryComponent::Left, 0.25),
            nu,
        )
        .unwrap();
        let text = serialize_measure(&t).unwrap();
        let back = parse_measure(&text).unwrap();
        assert_eq!(t, back, "round trip must be exact for atoms and profiles");
        // And every time-bin mass is preserved exactly.
        for k in 0..8 {
            let (a, b) = (k as f64 * 0.125, (k + 1) as f64 * 0.125);
            assert_eq!(
                t.nu.window_mass(BoundaryComponent::Left, a, b).unwrap(),
                back.nu.window_mass(BoundaryComponent::Left, a, b).unwrap()
            );
        }
    }

    #[test]
    fn parse_rejects_negative_mass_with_location() {
        let text = r#"{
            "schema_version": 1,
            "horizon": 1.0,
            "mu": { "atoms": [ { "at": 1.0, "mass": -0.5 } ] },
            "nu": { "horizon": 1.0 }
        }"#;
        let err = parse_measure(text).unwrap_err();
        assert!(
            err.to_string().contains("mu.atoms[0]"),
            "error must name the offending entry, got: {err}"
        );
    }

    #[test]
    fn parse_rejects_horizon_mismatch() {
        let text = r#"{
            "schema_version": 1,
            "horizon": 1.0,
            "nu": { "horizon": 2.0 }
        }"#;
        assert!(parse_measure(text).is_err());
    }

    #[test]
    fn parse_single_atom_file() {
        let text = r#"{
            "schema_version": 1,
            "horizon": 1.0,
            "mu": { "atoms": [ { "at": 1.5707963267948966, "mass": 1.0 } ] },
            "nu": { "horizon": 1.0 }
        }"#;
        let t = parse_measure(text).unwrap();
        assert_eq!(t.mu.atoms.len(), 1);
        assert_abs_diff_eq!(t.mu.atoms[0].location().scalar().unwrap(), PI / 2.0);
    }

    #[test]
    fn bump_profile_shape_and_integral() {
        let b = DensityExpr::Bump { start: 0.1, end: 0.9, ramp: 0.2 };
        assert_eq!(b.eval(0.05, None).unwrap(), 0.0);
        assert_eq!(b.eval(0.5, None).unwrap(), 1.0);
        assert_eq!(b.eval(0.95, None).unwrap(), 0.0);
        // Total mass = (end − start) − ramp.
        assert_abs_diff_eq!(b.exact_integral(0.0, 1.0).unwrap(), 0.6, epsilon = 1e-15);
        // Closed form matches quadrature on a partial window.
        let q = quadrature::integrate_adaptive(|t| b.eval(t, None).unwrap(), 0.0, 0.4, 1e-12)
            .unwrap();
        assert_abs_diff_eq!(b.exact_integral(0.0, 0.4).unwrap(), q.value, epsilon = 1e-10);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Linearity of the pairing in the measure and monotonicity
            // under adding atoms.
            #[test]
            fn pairing_linear_and_monotone(
                m1 in 0.0f64..3.0,
                m2 in 0.0f64..3.0,
                x1 in 0.1f64..3.0,
                x2 in 0.1f64..3.0,
            ) {
                let d = canonical();
                let f = |p: Point| 1.0 + p.scalar().unwrap().cos().abs();
                let a = InteriorMeasure::from_atom(Point::One(x1), m1);
                let b = InteriorMeasure::from_atom(Point::One(x2), m2);
                let both = InteriorMeasure {
                    atoms: vec![InteriorAtom::new(Point::One(x1), m1), InteriorAtom::new(Point::One(x2), m2)],
                    ..InteriorMeasure::default()
                };
                let ra = a.integrate_against(&d, f, 1e-10).unwrap().value;
                let rb = b.integrate_against(&d, f, 1e-10).unwrap().value;
                let rab = both.integrate_against(&d, f, 1e-10).unwrap().value;
                prop_assert!((rab - ra - rb).abs() < 1e-12);
                prop_assert!(both.weighted_mass(&d).unwrap().value + 1e-12 >= a.weighted_mass(&d).unwrap().value);
            }

            // Serialization round trip is exact for atomic triples.
            #[test]
            fn roundtrip_exact(mass in 0.0f64..10.0, x in 0.01f64..3.1, t in 0.01f64..0.99) {
                let triple = TraceTriple::new(
                    InteriorMeasure::from_atom(Point::One(x), mass),
                    CornerMeasure::from_atom(BoundaryComponent::Right, mass * 0.5),
                    LateralMeasure::from_atom(1.0, BoundaryComponent::Left, t, mass),
                ).unwrap();
                let back = parse_measure(&serialize_measure(&triple).unwrap()).unwrap();
                prop_assert_eq!(triple, back);
            }
        }
    }
}
