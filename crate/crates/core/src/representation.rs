//! Forward evaluation: build the caloric field u(x,t) of a trace triple,
//!
//! ```text
//! u(x,t) = ∫_Ω G(x,t;y,0) dμ + ∫_∂Ω ∂G/∂N_y(x,t;y,0) dλ
//!        + ∬_{∂Ω×(0,t)} ∂G/∂N_y(x,t;y,s) dν,
//! ```
//!
//! plus the interior identity on shrunken cylinders used by the
//! verification suite:
//!
//! ```text
//! u(x,t) = ∫_{Ω_ε} G_ε(x,t;y,s) u(y,s) dy
//!        + ∫_s^t ∫_{∂Ω_ε} ∂G_ε/∂N_y(x,t;y,τ) u(y,τ) dσ dτ.
//! ```

use crate::domain::{BoundaryComponent, Domain, Point};
use crate::error::{Error, Result};
use crate::kernels::KernelEvaluator;
use crate::measures::{DensityExpr, TraceTriple};
use crate::quadrature::{self, LateralProfile};

/// A field value with its accumulated evaluation-error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue {
    pub value: f64,
    pub error: f64,
}

/// A space-time field on Q_T that can be evaluated pointwise. Implemented
/// by [`SolutionField`], the finite-difference oracle, and closed-form
/// references in tests.
pub trait Field {
    fn domain(&self) -> &Domain;
    fn horizon(&self) -> f64;
    fn eval(&self, x: Point, t: f64) -> Result<FieldValue>;

    /// Times where the field carries boundary-layer structure too narrow
    /// for blind adaptive quadrature (lateral atom times: approaching the
    /// boundary, the flux spike after an atom has width ~δ²). Time
    /// integrals split here and refine geometrically into the layer.
    fn time_breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// ∫ f over [lo, hi] split at the breakpoints, with geometric refinement
/// into each breakpoint from both sides.
pub fn integrate_time_with_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<crate::quadrature::QuadratureResult> {
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|b| *b > lo && *b < hi).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    if cuts.is_empty() {
        return quadrature::integrate_adaptive(f, lo, hi, tol);
    }
    let mut edges = vec![lo];
    edges.extend(cuts.iter().copied());
    edges.push(hi);
    let n_pieces = edges.len() - 1;
    let mut total = crate::quadrature::QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
        converged: true,
    };
    for i in 0..n_pieces {
        let (a, b) = (edges[i], edges[i + 1]);
        if b <= a {
            continue;
        }
        // Interior edges are the breakpoints.
        let upper_is_break = i + 1 < edges.len() - 1;
        let lower_is_break = i > 0;
        let piece_tol = tol / n_pieces as f64;
        let mid = 0.5 * (a + b);
        let mut add = |r: crate::quadrature::QuadratureResult| {
            total.value += r.value;
            total.error_estimate += r.error_estimate;
            total.evaluations += r.evaluations;
            total.converged &= r.converged;
        };
        match (lower_is_break, upper_is_break) {
            (false, false) => add(quadrature::integrate_adaptive(&mut f, a, b, piece_tol)?),
            (true, false) => add(quadrature::integrate_graded(
                &mut f,
                a,
                b,
                crate::quadrature::SingularEnd::Lower,
                1.0,
                piece_tol,
            )?),
            (false, true) => add(quadrature::integrate_graded(
                &mut f,
                a,
                b,
                crate::quadrature::SingularEnd::Upper,
                1.0,
                piece_tol,
            )?),
            (true, true) => {
                add(quadrature::integrate_graded(
                    &mut f,
                    a,
                    mid,
                    crate::quadrature::SingularEnd::Lower,
                    1.0,
                    piece_tol / 2.0,
                )?);
                add(quadrature::integrate_graded(
                    &mut f,
                    mid,
                    b,
                    crate::quadrature::SingularEnd::Upper,
                    1.0,
                    piece_tol / 2.0,
                )?);
            }
        }
    }
    Ok(total)
}

/// Fraction of the evaluation tolerance budgeted to each term. The
/// lateral integral is the hardest; the corner term is a finite sum.
const BUDGET_BOTTOM: f64 = 0.5;
const BUDGET_LATERAL: f64 = 0.4;

/// The caloric field represented by a trace triple.
#[derive(Debug, Clone)]
pub struct SolutionField {
    domain: Domain,
    triple: TraceTriple,
    kernels: KernelEvaluator,
    tolerance: f64,
    /// Evaluations of atomic bottom terms below this time are rejected:
    /// the kernel concentrates and the value blows up like the kernel
    /// itself as t → 0.
    time_floor: f64,
    grid_cache: Option<GridCache>,
}

impl SolutionField {
    pub fn from_triple(domain: Domain, triple: TraceTriple, tolerance: f64) -> Result<Self> {
        triple.check_admissible(&domain)?;
        if domain.dimension() == 2
            && (!triple.mu.density.is_empty() || !triple.nu.density.is_empty())
        {
            return Err(Error::Unsupported(
                "rectangle fields support atomic measures only".into(),
            ));
        }
        Ok(SolutionField {
            domain,
            kernels: KernelEvaluator::new(domain).with_tolerance((tolerance * 1e-3).min(1e-10)),
            triple,
            tolerance,
            time_floor: 1e-4,
            grid_cache: None,
        })
    }

    pub fn with_time_floor(mut self, floor: f64) -> Self {
        self.time_floor = floor;
        self
    }

    pub fn triple(&self) -> &TraceTriple {
        &self.triple
    }

    pub fn kernels(&self) -> &KernelEvaluator {
        &self.kernels
    }

    pub fn grid_cache(&self) -> Option<&GridCache> {
        self.grid_cache.as_ref()
    }

    fn check_inside(&self, x: Point, t: f64) -> Result<()> {
        if !self.domain.contains_closure(x) {
            return Err(Error::Domain(format!("{x:?} outside the closure of Ω")));
        }
        if !(t > 0.0 && t <= self.triple.horizon) {
            return Err(Error::Time(format!(
                "t = {t} outside (0, T = {}]",
                self.triple.horizon
            )));
        }
        Ok(())
    }

    /// ∫_Ω G(x,t;y,0) dμ(y).
    pub fn bottom_term(&self, x: Point, t: f64) -> Result<FieldValue> {
        self.check_inside(x, t)?;
        if self.triple.mu.is_zero() {
            return Ok(FieldValue { value: 0.0, error: 0.0 });
        }
        if !self.triple.mu.atoms.is_empty() && t < self.time_floor {
            return Err(Error::Time(format!(
                "atomic bottom term requires t >= {} (kernel concentration below the \
                 evaluability floor)",
                self.time_floor
            )));
        }
        let tol = self.tolerance * BUDGET_BOTTOM;
        let mut value = 0.0;
        let mut error = 0.0;
        for a in &self.triple.mu.atoms {
            let g = self.kernels.heat_green(x, t, a.location(), 0.0)?;
            value += a.mass * g.value;
            error += a.mass * g.error;
        }
        if !self.triple.mu.density.is_empty() {
            let kernels = &self.kernels;
            let r = self.triple.mu.integrate_against(
                &self.domain,
                |y| kernels.heat_green(x, t, y, 0.0).map(|v| v.value).unwrap_or(f64::NAN),
                tol,
            )?;
            value += r.value;
            error += r.error_estimate + self.kernels.tolerance() * (1.0 + r.value.abs());
        }
        Ok(FieldValue { value, error })
    }

    /// ∫_∂Ω ∂G/∂N_y(x,t;y,0) dλ(y).
    pub fn corner_term(&self, x: Point, t: f64) -> Result<FieldValue> {
        self.check_inside(x, t)?;
        let mut value = 0.0;
        let mut error = 0.0;
        for a in &self.triple.lambda.atoms {
            let p = self.kernels.heat_green_normal(x, t, &a.boundary_point(), 0.0)?;
            value += a.mass * p.value;
            error += a.mass * p.error;
        }
        Ok(FieldValue { value, error })
    }

    /// ∬_{∂Ω×(0,t)} ∂G/∂N_y(x,t;y,s) dν(y,s).
    pub fn lateral_term(&self, x: Point, t: f64) -> Result<FieldValue> {
        self.lateral_term_window(x, t, 0.0, t)
    }

    /// The lateral pairing restricted to s ∈ (s0, s1) ∩ (0, t): the right
    /// side of the shrinking-boundary convergence statement.
    pub fn lateral_term_window(&self, x: Point, t: f64, s0: f64, s1: f64) -> Result<FieldValue> {
        self.check_inside(x, t)?;
        let s1 = s1.min(t);
        if s1 <= s0 || self.triple.nu.is_zero() {
            return Ok(FieldValue { value: 0.0, error: 0.0 });
        }
        let tol = self.tolerance * BUDGET_LATERAL;
        let mut value = 0.0;
        let mut error = 0.0;
        // Atoms: exact pairing against the flux kernel (atoms at s = t
        // contribute nothing: the pairing runs over the open (0,t)).
        for a in &self.triple.nu.atoms {
            if a.time >= s0 && a.time < s1 && a.time < t {
                let z = crate::domain::BoundaryPoint::on_side(a.component, a.along);
                let p = self.kernels.heat_green_normal(x, t, &z, a.time)?;
                value += a.mass * p.value;
                error += a.mass * p.error;
            }
        }
        // Densities: time-outer integration per boundary component (the
        // interval's boundary integral is a two-point sum).
        for d in &self.triple.nu.density {
            let r = self.lateral_density_integral(x, t, s0, s1, d.component, &d.profile, tol)?;
            value += r.value;
            error += r.error;
        }
        Ok(FieldValue { value, error })
    }

    fn lateral_density_integral(
        &self,
        x: Point,
        t: f64,
        s0: f64,
        s1: f64,
        component: BoundaryComponent,
        profile: &DensityExpr,
        tol: f64,
    ) -> Result<FieldValue> {
        // Clip to the profile's support so the adaptive engines never see
        // large all-zero spans.
        let (mut lo, mut hi) = (s0, s1.min(t));
        if let Some((a, b)) = profile.support() {
            lo = lo.max(a);
            hi = hi.min(b);
        }
        if hi <= lo {
            return Ok(FieldValue { value: 0.0, error: 0.0 });
        }
        let z = crate::domain::BoundaryPoint::new(component);
        let zpos = self.domain.boundary_position(&z)?;
        let dist = distance(x, zpos);
        let g_sup = profile_sup(profile, lo, hi);
        let kernels = &self.kernels;
        let mut inner_err = 0.0f64;

        let r = if hi >= t - 1e-300 {
            // Window reaches the kernel singularity at s = t: substitute
            // σ = t − s and integrate the boundary layer.
            let profile_env = LateralProfile {
                dim: self.domain.dimension() as u32,
                distance: dist / std::f64::consts::SQRT_2,
                amplitude: (4.0 * g_sup * (1.0 + dist)).max(1e-300),
            };
            quadrature::integrate_lateral_time(
                |sigma| {
                    let p = match kernels.heat_green_normal(x, t, &z, t - sigma.min(t * 0.999_999))
                    {
                        Ok(p) => p,
                        Err(_) => return f64::NAN,
                    };
                    inner_err = inner_err.max(p.error);
                    let g = profile.eval(t - sigma, None).unwrap_or(f64::NAN);
                    p.value * g
                },
                t - lo,
                &profile_env,
                tol,
            )?
        } else {
            quadrature::integrate_adaptive(
                |s| {
                    let p = match kernels.heat_green_normal(x, t, &z, s) {
                        Ok(p) => p,
                        Err(_) => return f64::NAN,
                    };
                    inner_err = inner_err.max(p.error);
                    let g = profile.eval(s, None).unwrap_or(f64::NAN);
                    p.value * g
                },
                lo,
                hi,
                tol,
            )?
        };
        Ok(FieldValue {
            value: r.value,
            error: r.error_estimate + inner_err * g_sup * (hi - lo),
        })
    }

    /// u(x,t): the three-term sum. Nonnegative for admissible triples;
    /// values within rounding of zero are clamped to zero.
    pub fn evaluate(&self, x: Point, t: f64) -> Result<FieldValue> {
        let b = self.bottom_term(x, t)?;
        let c = self.corner_term(x, t)?;
        let l = self.lateral_term(x, t)?;
        let mut value = b.value + c.value + l.value;
        let error = b.error + c.error + l.error;
        if value < 0.0 && value >= -error.max(1e-15) {
            value = 0.0;
        }
        Ok(FieldValue { value, error })
    }

    /// Batch evaluation on a space-time grid; the cache is stored on the
    /// returned field and the output is independent of evaluation order.
    pub fn evaluate_on_grid(mut self, grid: &GridSpec) -> Result<SolutionField> {
        grid.validate(&self.domain, self.triple.horizon)?;
        let xs = grid.space_nodes(&self.domain)?;
        let ts = grid.time_nodes();
        let mut values = Vec::with_capacity(xs.len() * ts.len());
        let mut errors = Vec::with_capacity(xs.len() * ts.len());
        for &t in &ts {
            for &x in &xs {
                let v = self.evaluate(Point::One(x), t)?;
                values.push(v.value);
                errors.push(v.error);
            }
        }
        self.grid_cache = Some(GridCache { spec: grid.clone(), xs, ts, values, errors });
        Ok(self)
    }
}

impl Field for SolutionField {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn horizon(&self) -> f64 {
        self.triple.horizon
    }

    fn eval(&self, x: Point, t: f64) -> Result<FieldValue> {
        self.evaluate(x, t)
    }

    fn time_breakpoints(&self) -> Vec<f64> {
        self.triple.nu.atoms.iter().map(|a| a.time).collect()
    }
}

fn distance(x: Point, y: Point) -> f64 {
    let [x1, x2] = x.coords();
    let [y1, y2] = y.coords();
    ((x1 - y1).powi(2) + (x2 - y2).powi(2)).sqrt()
}

fn profile_sup(profile: &DensityExpr, lo: f64, hi: f64) -> f64 {
    let mut sup = 0.0f64;
    for i in 0..=16 {
        let t = lo + (hi - lo) * i as f64 / 16.0;
        if let Ok(v) = profile.eval(t, None) {
            sup = sup.max(v.abs());
        }
    }
    sup * 1.25 + 1e-12
}

/// Regular space-time evaluation grid (interval domains).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub nt: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl GridSpec {
    pub fn validate(&self, _domain: &Domain, horizon: f64) -> Result<()> {
        if self.nx == 0 || self.nt == 0 {
            return Ok(()); // empty grid is a valid degenerate case
        }
        if !(self.t_min > 0.0 && self.t_min <= self.t_max && self.t_max <= horizon) {
            return Err(Error::Time(format!(
                "grid times [{}, {}] outside (0, {horizon}]",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    pub fn space_nodes(&self, domain: &Domain) -> Result<Vec<f64>> {
        let (a, b) = domain.interval_bounds()?;
        Ok(linspace(a, b, self.nx))
    }

    pub fn time_nodes(&self) -> Vec<f64> {
        linspace(self.t_min, self.t_max, self.nt)
    }
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Cached grid values, row-major with t outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCache {
    pub spec: GridSpec,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

/// The two terms of the interior representation identity on Ω_ε×(s,t).
#[derive(Debug, Clone, Copy)]
pub struct InteriorRepresentation {
    /// ∫_{Ω_ε} G_ε(x,t;y,s) u(y,s) dy
    pub bottom: f64,
    /// ∫_s^t ∫_{∂Ω_ε} ∂G_ε/∂N_y u dσ dτ
    pub lateral: f64,
    pub error: f64,
}

impl InteriorRepresentation {
    pub fn total(&self) -> f64 {
        self.bottom + self.lateral
    }
}

/// Evaluate both terms of the interior identity for an arbitrary field.
/// Reproduces u(x,t) for caloric fields; each term separately is
/// nonnegative and at most u(x,t).
pub fn interior_representation(
    u: &dyn Field,
    epsilon: f64,
    s: f64,
    x: Point,
    t: f64,
    tol: f64,
) -> Result<InteriorRepresentation> {
    let domain = *u.domain();
    if domain.dimension() != 1 {
        return Err(Error::Unsupported(
            "interior representation is evaluated on interval domains only".into(),
        ));
    }
    let (a, b) = domain.interval_bounds()?;
    if !(epsilon > 0.0 && epsilon <= domain.epsilon0()) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside (0, ε₀]")));
    }
    if !(0.0 < s && s < t && t <= u.horizon()) {
        return Err(Error::Time(format!("need 0 < s < t <= T, got s={s}, t={t}")));
    }
    let xv = x.scalar()?;
    if !(xv > a + epsilon && xv < b - epsilon) {
        return Err(Error::Domain(format!("x = {xv} outside Ω_ε")));
    }
    let kernels = KernelEvaluator::new(domain);
    let mut inner_err = 0.0f64;

    let bottom = quadrature::integrate_adaptive(
        |y| {
            let g = match kernels.heat_green_shrunken(epsilon, x, t, Point::One(y), s) {
                Ok(g) => g,
                Err(_) => return f64::NAN,
            };
            let uv = match u.eval(Point::One(y), s) {
                Ok(v) => v,
                Err(_) => return f64::NAN,
            };
            inner_err = inner_err.max(uv.error + g.error);
            g.value * uv.value
        },
        a + epsilon,
        b - epsilon,
        tol * 0.5,
    )?;

    let boundary = domain.shrunken_boundary(epsilon)?;
    // Breakpoints in the σ = t−τ variable: just below σ = t−t_atom the
    // flux through a near-boundary node is a layer of width ~ε².
    let mut sigma_breaks: Vec<f64> = u
        .time_breakpoints()
        .into_iter()
        .filter(|&b| b > s && b < t)
        .map(|b| t - b)
        .collect();
    sigma_breaks.sort_by(|p, q| p.partial_cmp(q).unwrap());

    let mut lateral = 0.0;
    let mut lateral_err = 0.0;
    for node in &boundary.nodes {
        let dist = distance(x, node.point);
        let profile = LateralProfile {
            dim: 1,
            distance: dist / std::f64::consts::SQRT_2,
            amplitude: 4.0 * (1.0 + dist),
        };
        let z = crate::domain::BoundaryPoint::new(node.component);
        let mut integrand = |sigma: f64| {
            let tau = t - sigma;
            let p = match kernels.heat_green_shrunken_normal(epsilon, x, t, &z, tau) {
                Ok(p) => p,
                Err(_) => return f64::NAN,
            };
            let uv = match u.eval(node.point, tau.max(s).min(t * 0.999_999)) {
                Ok(v) => v,
                Err(_) => return f64::NAN,
            };
            p.value * uv.value
        };
        // The piece touching σ = 0 goes through the substitution engine;
        // beyond the first breakpoint, graded panels climb into each
        // layer sitting just below its σ-break.
        let first_span = sigma_breaks.first().map(|b| 0.5 * b).unwrap_or(t - s);
        let r0 = quadrature::integrate_lateral_time(&mut integrand, first_span, &profile, tol * 0.125)?;
        lateral += node.weight * r0.value;
        lateral_err += node.weight * r0.error_estimate;
        if !sigma_breaks.is_empty() {
            let mut edges = vec![first_span];
            for (i, &b) in sigma_breaks.iter().enumerate() {
                edges.push(b);
                let next = sigma_breaks.get(i + 1).copied().unwrap_or(t - s);
                if next > b {
                    edges.push(0.5 * (b + next).min(2.0 * b));
                }
            }
            edges.push(t - s);
            edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
            edges.dedup_by(|p, q| (*p - *q).abs() < 1e-15);
            for w in edges.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                if hi <= lo {
                    continue;
                }
                // A layer hides just below a break: grade toward the
                // upper end when it is one.
                let is_break_end = sigma_breaks.iter().any(|b| (b - hi).abs() < 1e-14);
                let r = if is_break_end {
                    quadrature::integrate_graded(
                        &mut integrand,
                        lo,
                        hi,
                        crate::quadrature::SingularEnd::Upper,
                        1.0,
                        tol * 0.125 / edges.len() as f64,
                    )?
                } else {
                    quadrature::integrate_adaptive(&mut integrand, lo, hi, tol * 0.125 / edges.len() as f64)?
                };
                lateral += node.weight * r.value;
                lateral_err += node.weight * r.error_estimate;
            }
        }
    }

    Ok(InteriorRepresentation {
        bottom: bottom.value,
        lateral,
        error: bottom.error_estimate + lateral_err + inner_err * (b - a),
    })
}
