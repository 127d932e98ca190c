//! Cylindrical-domain geometry.
//!
//! The spatial cross-section Ω is an open interval (a,b) — canonically
//! (0,π) — or a rectangle (a,b)×(c,d) treated as a tensor product. The
//! module owns the boundary distance δ, its C² positive extension δ̄,
//! the shrunken domains Ω_ε = {δ > ε} with boundary quadratures, and the
//! normal-constant extension of boundary functions used by the lateral
//! trace identity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A spatial point in Ω ⊂ ℝⁿ, n = 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    One(f64),
    Two(f64, f64),
}

impl Point {
    pub fn dim(&self) -> usize {
        match self {
            Point::One(_) => 1,
            Point::Two(_, _) => 2,
        }
    }

    /// The coordinate of a 1D point.
    pub fn scalar(&self) -> Result<f64> {
        match self {
            Point::One(x) => Ok(*x),
            Point::Two(_, _) => Err(Error::Domain("expected a 1D point".into())),
        }
    }

    pub fn coords(&self) -> [f64; 2] {
        match self {
            Point::One(x) => [*x, 0.0],
            Point::Two(x, y) => [*x, *y],
        }
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::One(x)
    }
}

impl From<(f64, f64)> for Point {
    fn from(p: (f64, f64)) -> Self {
        Point::Two(p.0, p.1)
    }
}

/// Connected component of ∂Ω. Intervals use `Left`/`Right`; rectangles
/// add the horizontal sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryComponent {
    Left,
    Right,
    Bottom,
    Top,
}

impl BoundaryComponent {
    pub fn label(&self) -> &'static str {
        match self {
            BoundaryComponent::Left => "left",
            BoundaryComponent::Right => "right",
            BoundaryComponent::Bottom => "bottom",
            BoundaryComponent::Top => "top",
        }
    }
}

/// A point of ∂Ω: a component plus (for rectangle sides) the coordinate
/// along the side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub component: BoundaryComponent,
    /// Position along the side for rectangles; ignored for intervals.
    pub along: f64,
}

impl BoundaryPoint {
    pub fn new(component: BoundaryComponent) -> Self {
        BoundaryPoint { component, along: 0.0 }
    }

    pub fn on_side(component: BoundaryComponent, along: f64) -> Self {
        BoundaryPoint { component, along }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Shape {
    Interval { a: f64, b: f64 },
    Rectangle { a: f64, b: f64, c: f64, d: f64 },
}

/// The spatial domain Ω with its geometric configuration constant ε₀.
///
/// ε₀ fixes where the boundary collar machinery (unique foot points,
/// δ̄ = δ, normal-constant extensions) is valid. The theory only needs it
/// "sufficiently small"; here it is configuration, validated against the
/// geometry: 0 < ε₀ < half the minimal side length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    shape: Shape,
    epsilon0: f64,
}

/// Value, gradient and Laplacian of δ̄ at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaBar {
    pub value: f64,
    pub gradient: [f64; 2],
    pub laplacian: f64,
}

/// Quadrature over the shrunken boundary ∂Ω_ε.
#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub epsilon: f64,
    pub nodes: Vec<BoundaryNode>,
}

/// One node of a shrunken-boundary quadrature: a point on ∂Ω_ε, the
/// parallel component of ∂Ω it offsets, the unit normal into Ω_ε, and
/// its surface-measure weight.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryNode {
    pub point: Point,
    pub component: BoundaryComponent,
    pub inner_normal: [f64; 2],
    pub weight: f64,
}

impl BoundaryQuadrature {
    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

impl Default for Domain {
    /// The canonical domain: the interval (0,π) with ε₀ = 0.3.
    fn default() -> Self {
        Domain::interval(0.0, std::f64::consts::PI, 0.3).expect("canonical domain is valid")
    }
}

impl Domain {
    pub fn interval(a: f64, b: f64, epsilon0: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b - a <= 0.0 {
            return Err(Error::Domain(format!("degenerate interval ({a}, {b})")));
        }
        let half = (b - a) / 2.0;
        if !(epsilon0 > 0.0 && epsilon0 < half) {
            return Err(Error::Domain(format!(
                "epsilon0 = {epsilon0} outside (0, {half}) for interval ({a}, {b})"
            )));
        }
        Ok(Domain { shape: Shape::Interval { a, b }, epsilon0 })
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64), epsilon0: f64) -> Result<Self> {
        let (a, b) = x;
        let (c, d) = y;
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite())
            || b - a <= 0.0
            || d - c <= 0.0
        {
            return Err(Error::Domain(format!(
                "degenerate rectangle ({a}, {b})×({c}, {d})"
            )));
        }
        let half = 0.5 * (b - a).min(d - c);
        if !(epsilon0 > 0.0 && epsilon0 < half) {
            return Err(Error::Domain(format!(
                "epsilon0 = {epsilon0} outside (0, {half}) for rectangle"
            )));
        }
        Ok(Domain { shape: Shape::Rectangle { a, b, c, d }, epsilon0 })
    }

    pub fn dimension(&self) -> usize {
        match self.shape {
            Shape::Interval { .. } => 1,
            Shape::Rectangle { .. } => 2,
        }
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    pub fn is_interval(&self) -> bool {
        self.dimension() == 1
    }

    /// Interval endpoints; error for rectangles.
    pub fn interval_bounds(&self) -> Result<(f64, f64)> {
        match self.shape {
            Shape::Interval { a, b } => Ok((a, b)),
            Shape::Rectangle { .. } => Err(Error::Unsupported(
                "operation requires an interval domain".into(),
            )),
        }
    }

    pub fn rectangle_bounds(&self) -> Result<((f64, f64), (f64, f64))> {
        match self.shape {
            Shape::Rectangle { a, b, c, d } => Ok(((a, b), (c, d))),
            Shape::Interval { .. } => Err(Error::Unsupported(
                "operation requires a rectangle domain".into(),
            )),
        }
    }

    /// Largest value of δ on Ω (half the minimal side length).
    pub fn inradius(&self) -> f64 {
        match self.shape {
            Shape::Interval { a, b } => 0.5 * (b - a),
            Shape::Rectangle { a, b, c, d } => 0.5 * (b - a).min(d - c),
        }
    }

    /// Surface measure of ∂Ω (2 for an interval, the perimeter for a
    /// rectangle).
    pub fn boundary_measure(&self) -> f64 {
        match self.shape {
            Shape::Interval { .. } => 2.0,
            Shape::Rectangle { a, b, c, d } => 2.0 * ((b - a) + (d - c)),
        }
    }

    pub fn boundary_components(&self) -> &'static [BoundaryComponent] {
        match self.shape {
            Shape::Interval { .. } => &[BoundaryComponent::Left, BoundaryComponent::Right],
            Shape::Rectangle { .. } => &[
                BoundaryComponent::Left,
                BoundaryComponent::Right,
                BoundaryComponent::Bottom,
                BoundaryComponent::Top,
            ],
        }
    }

    fn check_dim(&self, p: Point) -> Result<()> {
        if p.dim() != self.dimension() {
            return Err(Error::Domain(format!(
                "point dimension {} does not match domain dimension {}",
                p.dim(),
                self.dimension()
            )));
        }
        Ok(())
    }

    pub fn contains_closure(&self, p: Point) -> bool {
        match (self.shape, p) {
            (Shape::Interval { a, b }, Point::One(x)) => (a..=b).contains(&x),
            (Shape::Rectangle { a, b, c, d }, Point::Two(x, y)) => {
                (a..=b).contains(&x) && (c..=d).contains(&y)
            }
            _ => false,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match (self.shape, p) {
            (Shape::Interval { a, b }, Point::One(x)) => x > a && x < b,
            (Shape::Rectangle { a, b, c, d }, Point::Two(x, y)) => {
                x > a && x < b && y > c && y < d
            }
            _ => false,
        }
    }

    /// Exact Euclidean distance from `p` to ∂Ω.
    pub fn delta(&self, p: Point) -> Result<f64> {
        self.check_dim(p)?;
        if !self.contains_closure(p) {
            return Err(Error::Domain(format!("point {p:?} outside the closure of Ω")));
        }
        Ok(match (self.shape, p) {
            (Shape::Interval { a, b }, Point::One(x)) => (x - a).min(b - x),
            (Shape::Rectangle { a, b, c, d }, Point::Two(x, y)) => {
                (x - a).min(b - x).min(y - c).min(d - y)
            }
            _ => unreachable!(),
        })
    }

    /// The nearest boundary point z(p) and δ(p); in the collar δ ≤ ε₀ the
    /// foot point is unique and satisfies p = z + δ(p)·N_z exactly.
    /// Deeper inside, ties on the medial axis break deterministically in
    /// component order.
    pub fn foot_point(&self, p: Point) -> Result<(BoundaryPoint, f64)> {
        let delta = self.delta(p)?;
        let bp = match (self.shape, p) {
            (Shape::Interval { a, b }, Point::One(x)) => {
                if x - a <= b - x {
                    BoundaryPoint::new(BoundaryComponent::Left)
                } else {
                    BoundaryPoint::new(BoundaryComponent::Right)
                }
            }
            (Shape::Rectangle { a, b, c, d }, Point::Two(x, y)) => {
                let dists = [
                    (BoundaryComponent::Left, x - a),
                    (BoundaryComponent::Right, b - x),
                    (BoundaryComponent::Bottom, y - c),
                    (BoundaryComponent::Top, d - y),
                ];
                let (side, _) = dists
                    .iter()
                    .copied()
                    .min_by(|(_, u), (_, v)| u.partial_cmp(v).unwrap())
                    .unwrap();
                let along = match side {
                    BoundaryComponent::Left | BoundaryComponent::Right => y,
                    BoundaryComponent::Bottom | BoundaryComponent::Top => x,
                };
                BoundaryPoint::on_side(side, along)
            }
            _ => unreachable!(),
        };
        Ok((bp, delta))
    }

    /// Coordinates of a boundary point.
    pub fn boundary_position(&self, z: &BoundaryPoint) -> Result<Point> {
        Ok(match self.shape {
            Shape::Interval { a, b } => match z.component {
                BoundaryComponent::Left => Point::One(a),
                BoundaryComponent::Right => Point::One(b),
                _ => return Err(Error::Domain("interval has only left/right ends".into())),
            },
            Shape::Rectangle { a, b, c, d } => match z.component {
                BoundaryComponent::Left => Point::Two(a, z.along),
                BoundaryComponent::Right => Point::Two(b, z.along),
                BoundaryComponent::Bottom => Point::Two(z.along, c),
                BoundaryComponent::Top => Point::Two(z.along, d),
            },
        })
    }

    /// Unit inner normal N_z at a boundary point (second entry 0 in 1D).
    pub fn inner_normal(&self, z: &BoundaryPoint) -> [f64; 2] {
        match z.component {
            BoundaryComponent::Left => [1.0, 0.0],
            BoundaryComponent::Right => [-1.0, 0.0],
            BoundaryComponent::Bottom => [0.0, 1.0],
            BoundaryComponent::Top => [0.0, -1.0],
        }
    }

    /// Blend profile end: δ̄ transitions from δ on [0, ε₀] to a constant
    /// plateau across [ε₀, blend_end]. The plateau is ε₀·1.5 except when
    /// the medial axis is too close, in which case the transition ends
    /// exactly there (keeping δ̄ C²: the profile has two vanishing
    /// derivatives at both ends).
    fn blend_end(&self) -> f64 {
        (2.0 * self.epsilon0).min(self.inradius())
    }

    pub fn delta_bar_plateau(&self) -> f64 {
        self.epsilon0 + 0.5 * (self.blend_end() - self.epsilon0)
    }

    /// δ̄(p) with gradient and Laplacian. Equals δ for δ ≤ ε₀; C² and
    /// strictly positive throughout Ω.
    ///
    /// For rectangles the underlying δ is only piecewise smooth across
    /// the corner diagonals; there the one-sided derivatives of the
    /// nearest side are returned (the rectangle is excluded from the
    /// trace operations that consume them).
    pub fn delta_bar(&self, p: Point) -> Result<DeltaBar> {
        let delta = self.delta(p)?;
        let profile = self.blend_profile(delta);
        let grad_delta = self.grad_delta(p)?;
        Ok(DeltaBar {
            value: profile.0,
            gradient: [grad_delta[0] * profile.1, grad_delta[1] * profile.1],
            // Δδ̄ = B″(δ)|∇δ|² + B′(δ)Δδ with |∇δ| = 1, Δδ = 0 a.e.
            laplacian: profile.2,
        })
    }

    /// (B(δ), B′(δ), B″(δ)) for the C² blend profile.
    fn blend_profile(&self, delta: f64) -> (f64, f64, f64) {
        let e0 = self.epsilon0;
        let end = self.blend_end();
        if delta <= e0 {
            (delta, 1.0, 0.0)
        } else if delta >= end {
            (self.delta_bar_plateau(), 0.0, 0.0)
        } else {
            let w = end - e0;
            let u = (delta - e0) / w;
            // B' = 1 - S(u) with S the quintic smoothstep; integrate for B.
            let s_int = u.powi(4) * (2.5 - 3.0 * u + u * u); // ∫₀ᵘ S
            let value = e0 + w * (u - s_int);
            let b1 = 1.0 - smoothstep(u).0;
            let b2 = -smoothstep(u).1 / w;
            (value, b1, b2)
        }
    }

    fn grad_delta(&self, p: Point) -> Result<[f64; 2]> {
        let (foot, _) = self.foot_point(p)?;
        // ∇δ points away from the nearest side, i.e. along its inner normal.
        Ok(self.inner_normal(&foot))
    }

    /// Quadrature over ∂Ω_ε with inner normals pointing into Ω_ε.
    /// Weights sum exactly to the surface measure of ∂Ω_ε.
    pub fn shrunken_boundary(&self, epsilon: f64) -> Result<BoundaryQuadrature> {
        if !(epsilon > 0.0 && epsilon <= self.epsilon0) {
            return Err(Error::Domain(format!(
                "epsilon = {epsilon} outside (0, epsilon0 = {}]",
                self.epsilon0
            )));
        }
        let nodes = match self.shape {
            Shape::Interval { a, b } => vec![
                BoundaryNode {
                    point: Point::One(a + epsilon),
                    component: BoundaryComponent::Left,
                    inner_normal: [1.0, 0.0],
                    weight: 1.0,
                },
                BoundaryNode {
                    point: Point::One(b - epsilon),
                    component: BoundaryComponent::Right,
                    inner_normal: [-1.0, 0.0],
                    weight: 1.0,
                },
            ],
            Shape::Rectangle { a, b, c, d } => {
                let mut nodes = Vec::new();
                let sides = [
                    (BoundaryComponent::Left, (a + epsilon, c + epsilon, d - epsilon)),
                    (BoundaryComponent::Right, (b - epsilon, c + epsilon, d - epsilon)),
                    (BoundaryComponent::Bottom, (c + epsilon, a + epsilon, b - epsilon)),
                    (BoundaryComponent::Top, (d - epsilon, a + epsilon, b - epsilon)),
                ];
                for (component, (level, lo, hi)) in sides {
                    let normal = match component {
                        BoundaryComponent::Left => [1.0, 0.0],
                        BoundaryComponent::Right => [-1.0, 0.0],
                        BoundaryComponent::Bottom => [0.0, 1.0],
                        BoundaryComponent::Top => [0.0, -1.0],
                    };
                    for (along, weight) in kronrod_nodes(lo, hi) {
                        let point = match component {
                            BoundaryComponent::Left | BoundaryComponent::Right => {
                                Point::Two(level, along)
                            }
                            _ => Point::Two(along, level),
                        };
                        nodes.push(BoundaryNode { point, component, inner_normal: normal, weight });
                    }
                }
                nodes
            }
        };
        Ok(BoundaryQuadrature { epsilon, nodes })
    }

    /// Normal-constant extension of a boundary function: h̄(p,t) equals
    /// h(z(p),t) for δ(p) ≤ ε₀/2, fades with a C² cutoff, and vanishes
    /// for δ(p) ≥ ε₀. Vanishes in t wherever h does.
    pub fn normal_extension<H>(&self, h: H, p: Point, t: f64) -> Result<f64>
    where
        H: Fn(&BoundaryPoint, f64) -> f64,
    {
        let (foot, delta) = self.foot_point(p)?;
        let (chi, _, _) = self.cutoff(delta);
        if chi == 0.0 {
            return Ok(0.0);
        }
        Ok(h(&foot, t) * chi)
    }

    /// The C² collar cutoff χ(δ): 1 for δ ≤ ε₀/2, 0 for δ ≥ ε₀.
    /// Returns (χ, χ′, χ″) as functions of δ.
    pub fn cutoff(&self, delta: f64) -> (f64, f64, f64) {
        let lo = 0.5 * self.epsilon0;
        let hi = self.epsilon0;
        if delta <= lo {
            (1.0, 0.0, 0.0)
        } else if delta >= hi {
            (0.0, 0.0, 0.0)
        } else {
            let w = hi - lo;
            let u = (delta - lo) / w;
            let (s, s1, s2) = smoothstep_full(u);
            (1.0 - s, -s1 / w, -s2 / (w * w))
        }
    }
}

/// Quintic smoothstep S(u) = 6u⁵ − 15u⁴ + 10u³ on [0,1]; returns (S, S′).
/// S and its first two derivatives vanish at u=0; S(1)=1 with two
/// vanishing derivatives.
fn smoothstep(u: f64) -> (f64, f64) {
    let (s, s1, _) = smoothstep_full(u);
    (s, s1)
}

fn smoothstep_full(u: f64) -> (f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (
        u3 * (10.0 - 15.0 * u + 6.0 * u2),
        30.0 * u2 * (u - 1.0) * (u - 1.0),
        60.0 * u * (2.0 * u - 1.0) * (u - 1.0),
    )
}

/// 15-point Kronrod rule mapped to [lo, hi]; weights sum to hi − lo.
fn kronrod_nodes(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    use crate::quadrature::kronrod_reference_rule;
    kronrod_reference_rule()
        .iter()
        .map(|&(x, w)| {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            (mid + half * x, w * half)
        })
        .collect()
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
    fn make_domain_canonical_interval() {
        let d = Domain::interval(0.0, PI, 0.3).unwrap();
        assert_eq!(d.dimension(), 1);
        assert_eq!(d.epsilon0(), 0.3);
    }

    #[test]
    fn make_domain_rejects_degenerate() {
        assert!(Domain::interval(0.0, 0.0, 0.1).is_err());
        assert!(Domain::interval(1.0, 0.5, 0.1).is_err());
        assert!(Domain::interval(0.0, PI, 0.0).is_err());
        assert!(Domain::interval(0.0, PI, PI / 2.0).is_err());
        assert!(Domain::rectangle((0.0, PI), (0.0, 0.0), 0.1).is_err());
    }

    #[test]
    fn make_domain_rectangle() {
        let d = Domain::rectangle((0.0, PI), (0.0, PI), 0.3).unwrap();
        assert_eq!(d.dimension(), 2);
    }

    #[test]
    fn delta_interval() {
        let d = canonical();
        assert_abs_diff_eq!(d.delta(0.2.into()).unwrap(), 0.2);
        assert_abs_diff_eq!(d.delta((PI / 2.0).into()).unwrap(), PI / 2.0);
        assert!(d.delta((PI + 0.1).into()).is_err());
        assert!(d.delta((-0.1).into()).is_err());
    }

    #[test]
    fn delta_rectangle_nearest_side() {
        let d = Domain::rectangle((0.0, PI), (0.0, PI), 0.3).unwrap();
        assert_abs_diff_eq!(d.delta((0.1, 1.0).into()).unwrap(), 0.1);
        assert_abs_diff_eq!(d.delta((1.0, 0.05).into()).unwrap(), 0.05);
    }

    #[test]
    fn delta_bar_matches_delta_in_collar() {
        let d = canonical();
        let db = d.delta_bar(0.1.into()).unwrap();
        assert_abs_diff_eq!(db.value, 0.1);
        assert_abs_diff_eq!(db.gradient[0], 1.0);
        assert_abs_diff_eq!(db.laplacian, 0.0);

        let db = d.delta_bar((PI - 0.05).into()).unwrap();
        assert_abs_diff_eq!(db.value, 0.05);
        assert_abs_diff_eq!(db.gradient[0], -1.0);
    }

    #[test]
    fn delta_bar_midpoint_is_plateau() {
        let d = canonical();
        let db = d.delta_bar((PI / 2.0).into()).unwrap();
        // Blend ends at 2ε₀ = 0.6 < π/2, so the midpoint sits on the plateau.
        assert_abs_diff_eq!(db.value, 0.45, epsilon = 1e-14);
        assert_abs_diff_eq!(db.gradient[0], 0.0);
        assert_abs_diff_eq!(db.laplacian, 0.0);
    }

    #[test]
    fn delta_bar_blend_consistent_with_finite_differences() {
        let d = canonical();
        // Points inside the transition band (0.3, 0.6).
        for &x in &[0.35, 0.42, 0.5, 0.58, PI - 0.45] {
            let db = d.delta_bar(x.into()).unwrap();
            let h = 1e-5;
            let vp = d.delta_bar((x + h).into()).unwrap().value;
            let vm = d.delta_bar((x - h).into()).unwrap().value;
            let fd_grad = (vp - vm) / (2.0 * h);
            let fd_lap = (vp - 2.0 * db.value + vm) / (h * h);
            assert_abs_diff_eq!(db.gradient[0], fd_grad, epsilon = 1e-8);
            assert_abs_diff_eq!(db.laplacian, fd_lap, epsilon = 1e-4);
        }
    }

    #[test]
    fn foot_point_reconstructs_collar_points() {
        let d = canonical();
        for &x in &[0.01, 0.15, 0.29, PI - 0.2, PI - 0.01] {
            let (z, delta) = d.foot_point(x.into()).unwrap();
            let zp = d.boundary_position(&z).unwrap().scalar().unwrap();
            let n = d.inner_normal(&z)[0];
            assert_abs_diff_eq!(zp + delta * n, x, epsilon = 1e-15);
        }
    }

    #[test]
    fn shrunken_boundary_interval() {
        let d = canonical();
        let q = d.shrunken_boundary(0.1).unwrap();
        assert_eq!(q.nodes.len(), 2);
        assert_abs_diff_eq!(q.nodes[0].point.scalar().unwrap(), 0.1);
        assert_abs_diff_eq!(q.nodes[1].point.scalar().unwrap(), PI - 0.1);
        assert_abs_diff_eq!(q.nodes[0].inner_normal[0], 1.0);
        assert_abs_diff_eq!(q.nodes[1].inner_normal[0], -1.0);
        assert_abs_diff_eq!(q.total_weight(), 2.0);
    }

    #[test]
    fn shrunken_boundary_rejects_out_of_range() {
        let d = canonical();
        assert!(d.shrunken_boundary(0.4).is_err());
        assert!(d.shrunken_boundary(0.0).is_err());
    }

    #[test]
    fn shrunken_boundary_rectangle_perimeter() {
        let d = Domain::rectangle((0.0, PI), (0.0, PI), 0.3).unwrap();
        let q = d.shrunken_boundary(0.1).unwrap();
        assert_abs_diff_eq!(q.total_weight(), 4.0 * (PI - 0.2), epsilon = 1e-12);
    }

    #[test]
    fn normal_extension_collar_values() {
        let d = canonical();
        let h = |z: &BoundaryPoint, _t: f64| match z.component {
            BoundaryComponent::Left => 1.0,
            _ => 0.0,
        };
        assert_abs_diff_eq!(d.normal_extension(h, 0.05.into(), 0.5).unwrap(), 1.0);
        assert_abs_diff_eq!(d.normal_extension(h, (PI - 0.05).into(), 0.5).unwrap(), 0.0);
        // Interior: cutoff kills the extension entirely beyond ε₀.
        let mid = d.normal_extension(h, (PI / 2.0).into(), 0.5).unwrap();
        assert!((0.0..=1.0).contains(&mid));
        assert_abs_diff_eq!(mid, 0.0);
    }

    #[test]
    fn normal_extension_idempotent_along_normals() {
        let d = canonical();
        let h = |z: &BoundaryPoint, _t: f64| match z.component {
            BoundaryComponent::Left => 2.5,
            _ => -1.0,
        };
        // Everywhere within δ ≤ ε₀/2 of the left end the extension equals
        // the boundary value.
        for &x in &[0.01, 0.05, 0.1, 0.15] {
            assert_abs_diff_eq!(d.normal_extension(h, x.into(), 0.1).unwrap(), 2.5);
        }
    }

    #[test]
    fn cutoff_profile_shape() {
        let d = canonical();
        assert_eq!(d.cutoff(0.1), (1.0, 0.0, 0.0));
        assert_eq!(d.cutoff(0.35), (0.0, 0.0, 0.0));
        let (chi, _, _) = d.cutoff(0.225);
        assert_abs_diff_eq!(chi, 0.5, epsilon = 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn delta_bar_positive_and_bounded(x in 1e-6f64..(PI - 1e-6)) {
                let d = canonical();
                let db = d.delta_bar(x.into()).unwrap();
                prop_assert!(db.value > 0.0);
                // Bounded by a fixed multiple of max δ.
                prop_assert!(db.value <= 1.5 * d.inradius() + 1e-12);
            }

            #[test]
            fn delta_bar_equals_delta_in_collar(x in 0.0f64..0.3) {
                prop_assume!(x > 0.0);
                let d = canonical();
                let db = d.delta_bar(x.into()).unwrap();
                prop_assert!((db.value - x).abs() < 1e-15);
                prop_assert!((db.gradient[0].abs() - 1.0).abs() < 1e-15);
            }

            #[test]
            fn shrunken_weights_sum_to_surface_measure(eps in 1e-4f64..0.3) {
                let d = canonical();
                let q = d.shrunken_boundary(eps).unwrap();
                prop_assert!((q.total_weight() - 2.0).abs() < 1e-12);
            }

            #[test]
            fn rectangle_weights_match_perimeter(eps in 1e-4f64..0.3) {
                let d = Domain::rectangle((0.0, PI), (0.0, 2.0 * PI), 0.3).unwrap();
                let q = d.shrunken_boundary(eps).unwrap();
                let perimeter = 2.0 * (PI - 2.0 * eps) + 2.0 * (2.0 * PI - 2.0 * eps);
                prop_assert!((q.total_weight() - perimeter).abs() < 1e-10);
            }
        }
    }
}
