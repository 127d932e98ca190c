//! Trace extraction: recover (μ, λ, ν) from a caloric field by the limit
//! procedures of the representation theory.
//!
//! - The initial trace acts on test functions vanishing on ∂Ω:
//!   ∫ η u(·,t) dx → ∫η dμ + ∫(∂η/∂N) dλ as t → 0.
//! - The lateral trace is the weak limit of the shrinking-boundary
//!   functionals ∫∫_{∂Ω_ε} u h̃ dσ dτ, and is pinned down without any
//!   ε-limit by the δ̄-identity
//!   ∬h dν = ∫∫ u (h̄Δδ̄ + 2∇h̄·∇δ̄ + δ̄Δh̄ + δ̄ h̄_t) dx dt.
//! - μ and λ come out of the Green potential w(·,t) = G[u(·,t)]: its t→0
//!   limit is superharmonic and splits into a Green potential of μ plus a
//!   harmonic part carrying λ through the Martin kernel. In 1D the
//!   harmonic part is affine, so λ is read off the boundary intercepts
//!   and μ from −w*″.
//!
//! Limits are discretized on geometric schedules and extrapolated by
//! Aitken Δ² with the empirical order reported, never assumed.

use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryComponent, Domain, Point};
use crate::error::{Error, Result};
use crate::kernels::EllipticGreen;
use crate::measures::{
    CornerAtom, CornerMeasure, DensityExpr, InteriorAtom, InteriorMeasure, LateralDensity,
    LateralMeasure,
};
use crate::quadrature::{self, kronrod_reference_rule};
use crate::representation::{linspace, Field};

/// A smooth test function on Ω̄ vanishing on ∂Ω, with the data the trace
/// pairings need: values, Laplacian, and inner-normal derivatives.
pub struct TestFunction {
    name: String,
    value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    laplacian: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    /// ∂η/∂N at (left, right).
    normal_derivative: (f64, f64),
}

impl TestFunction {
    /// η(x) = sin(kπ(x−a)/L): the k-th Dirichlet mode.
    pub fn sine_mode(domain: &Domain, k: u32) -> Result<Self> {
        let (a, b) = domain.interval_bounds()?;
        let l = b - a;
        let w = k as f64 * std::f64::consts::PI / l;
        let sign_right = if k % 2 == 1 { 1.0 } else { -1.0 };
        Ok(TestFunction {
            name: format!("sine_mode_{k}"),
            value: Box::new(move |x| (w * (x - a)).sin()),
            laplacian: Box::new(move |x| -w * w * (w * (x - a)).sin()),
            normal_derivative: (w, sign_right * w),
        })
    }

    /// η(x) = (x−a)(b−x): the parabolic bubble.
    pub fn bubble(domain: &Domain) -> Result<Self> {
        let (a, b) = domain.interval_bounds()?;
        Ok(TestFunction {
            name: "bubble".into(),
            value: Box::new(move |x| (x - a) * (b - x)),
            laplacian: Box::new(|_| -2.0),
            normal_derivative: (b - a, b - a),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn laplacian(&self, x: f64) -> f64 {
        (self.laplacian)(x)
    }

    pub fn normal_derivative(&self, component: BoundaryComponent) -> f64 {
        match component {
            BoundaryComponent::Left => self.normal_derivative.0,
            _ => self.normal_derivative.1,
        }
    }

    /// The pairing the initial trace converges to, for a known (μ, λ).
    pub fn pair_triple(&self, domain: &Domain, mu: &InteriorMeasure, lambda: &CornerMeasure) -> Result<f64> {
        let m = mu.integrate_against(domain, |p| self.value(p.coords()[0]), 1e-10)?;
        let l = lambda.integrate_against(|z| self.normal_derivative(z.component));
        Ok(m.value + l)
    }
}

/// Discretization of the ε → 0 and t → 0 limits: strictly decreasing
/// geometric schedules with optional extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSchedule {
    pub epsilons: Vec<f64>,
    pub times: Vec<f64>,
    pub richardson: bool,
}

impl ExtractionSchedule {
    /// ε_j = ε₀·2^{−j}, t_j = t₀·2^{−j}, `levels` entries each.
    pub fn geometric(epsilon0: f64, t0: f64, levels: usize) -> Result<Self> {
        if !(epsilon0 > 0.0 && t0 > 0.0 && levels >= 3) {
            return Err(Error::Domain(
                "schedule needs positive starting levels and >= 3 levels".into(),
            ));
        }
        Ok(ExtractionSchedule {
            epsilons: (0..levels).map(|j| epsilon0 * 0.5f64.powi(j as i32)).collect(),
            times: (0..levels).map(|j| t0 * 0.5f64.powi(j as i32)).collect(),
            richardson: true,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for seq in [&self.epsilons, &self.times] {
            if seq.len() < 2 {
                return Err(Error::Domain("schedule needs at least 2 levels".into()));
            }
            if seq.windows(2).any(|w| w[1] >= w[0] || w[1] <= 0.0) {
                return Err(Error::Domain(
                    "schedule levels must decrease strictly toward 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// An extrapolated limit with its convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    /// Disagreement of the last extrapolants: the honest accuracy claim.
    pub residual: f64,
    /// Empirical convergence order from the level ratios, when measurable.
    pub observed_order: Option<f64>,
    /// (level parameter, raw value) table for reporting.
    pub table: Vec<(f64, f64)>,
}

impl LimitEstimate {
    pub fn converged_within(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

/// Aitken Δ² extrapolation of a sequence sampled on a decreasing schedule.
/// Assumes nothing about the order; reports the observed one.
pub fn extrapolate_limit(params: &[f64], values: &[f64], richardson: bool) -> LimitEstimate {
    assert_eq!(params.len(), values.len());
    let table: Vec<(f64, f64)> = params.iter().copied().zip(values.iter().copied()).collect();
    let n = values.len();
    if n == 1 {
        return LimitEstimate { value: values[0], residual: f64::INFINITY, observed_order: None, table };
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    if !richardson || n == 2 {
        return LimitEstimate {
            value: values[n - 1],
            residual: (values[n - 1] - values[n - 2]).abs(),
            observed_order: None,
            table,
        };
    }
    let mut extrapolants = Vec::new();
    for j in 0..n - 2 {
        let (v0, v1, v2) = (values[j], values[j + 1], values[j + 2]);
        let d0 = v1 - v0;
        let d1 = v2 - v1;
        let denom = d1 - d0;
        if denom.abs() <= 1e3 * f64::EPSILON * scale {
            extrapolants.push(v2);
        } else {
            extrapolants.push(v2 - d1 * d1 / denom);
        }
    }
    // Observed order from the decay of the differences, averaged over the
    // tail of the schedule (ratio of parameters assumed constant).
    let mut orders = Vec::new();
    for j in 0..n - 2 {
        let d0 = (values[j + 1] - values[j]).abs();
        let d1 = (values[j + 2] - values[j + 1]).abs();
        let h_ratio = params[j + 1] / params[j];
        if d0 > 1e3 * f64::EPSILON * scale && d1 > 0.0 && h_ratio > 0.0 && h_ratio < 1.0 {
            orders.push((d1 / d0).ln() / h_ratio.ln());
        }
    }
    let observed_order = if orders.len() >= 2 {
        Some(orders.iter().rev().take(3).sum::<f64>() / orders.len().min(3) as f64)
    } else {
        None
    };
    let value = *extrapolants.last().unwrap();
    // Uncertainty: disagreement of the last extrapolants, except when the
    // raw tail already collapsed (super-geometric convergence) — then the
    // final raw step is the sharper honest claim.
    let residual = if extrapolants.len() >= 2 {
        let window_diff = (value - extrapolants[extrapolants.len() - 2]).abs();
        let tail_diff = (value - values[n - 1]).abs() + (values[n - 1] - values[n - 2]).abs();
        window_diff.min(tail_diff).max(f64::EPSILON * scale)
    } else {
        (value - values[n - 1]).abs()
    };
    LimitEstimate { value, residual, observed_order, table }
}

/// ∫_Ω η u(·,t) dx along the time schedule, extrapolated to t → 0.
/// Converges to ∫η dμ + ∫(∂η/∂N) dλ for the field of a trace triple.
pub fn pair_initial_trace(
    u: &dyn Field,
    eta: &TestFunction,
    sched: &ExtractionSchedule,
    tol: f64,
) -> Result<LimitEstimate> {
    sched.validate()?;
    let (a, b) = u.domain().interval_bounds()?;
    let mut values = Vec::with_capacity(sched.times.len());
    for &t in &sched.times {
        if !(t < u.horizon()) {
            return Err(Error::Time(format!("schedule time {t} beyond the horizon")));
        }
        let r = quadrature::integrate_adaptive(
            |x| eta.value(x) * u.eval(Point::One(x), t).map(|v| v.value).unwrap_or(f64::NAN),
            a,
            b,
            tol,
        )?;
        values.push(r.value);
    }
    Ok(extrapolate_limit(&sched.times, &values, sched.richardson))
}

/// Uniform time bins on (t_min, t_max).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBins {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl TimeBins {
    pub fn edges(&self) -> Vec<f64> {
        linspace(self.t_min, self.t_max, self.count + 1)
    }
}

/// Histogram estimate of ν: per boundary component, extrapolated bin
/// masses with their convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuEstimate {
    pub bins: TimeBins,
    pub components: Vec<(BoundaryComponent, Vec<LimitEstimate>)>,
}

impl NuEstimate {
    pub fn component(&self, c: BoundaryComponent) -> Option<&[LimitEstimate]> {
        self.components.iter().find(|(cc, _)| *cc == c).map(|(_, v)| v.as_slice())
    }

    /// Extrapolated mass of ν on component × (lo, hi), pro-rating the
    /// bins that straddle the window.
    pub fn window_mass(&self, c: BoundaryComponent, lo: f64, hi: f64) -> f64 {
        let edges = self.bins.edges();
        let Some(masses) = self.component(c) else { return 0.0 };
        let mut total = 0.0;
        for (i, m) in masses.iter().enumerate() {
            let (b0, b1) = (edges[i], edges[i + 1]);
            let overlap = (hi.min(b1) - lo.max(b0)).max(0.0);
            if overlap > 0.0 {
                total += m.value * overlap / (b1 - b0);
            }
        }
        total
    }

    /// Total extrapolated mass per component.
    pub fn component_mass(&self, c: BoundaryComponent) -> f64 {
        self.component(c).map(|v| v.iter().map(|e| e.value).sum()).unwrap_or(0.0)
    }

    /// Bins whose mass spikes above 3× the median of their neighbors:
    /// the documented atomic-ν detector.
    pub fn detect_spikes(&self, c: BoundaryComponent) -> Vec<usize> {
        let Some(masses) = self.component(c) else { return Vec::new() };
        let mut spikes = Vec::new();
        for i in 0..masses.len() {
            let mut neigh: Vec<f64> = (i.saturating_sub(2)..(i + 3).min(masses.len()))
                .filter(|&j| j != i)
                .map(|j| masses[j].value.abs())
                .collect();
            neigh.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = neigh[neigh.len() / 2];
            if masses[i].value.abs() > 3.0 * median.max(1e-12) {
                spikes.push(i);
            }
        }
        spikes
    }

    /// Convert to a lateral measure with histogram densities.
    pub fn to_measure(&self, horizon: f64) -> LateralMeasure {
        let edges = self.bins.edges();
        LateralMeasure {
            horizon,
            atoms: Vec::new(),
            density: self
                .components
                .iter()
                .map(|(c, masses)| LateralDensity {
                    component: *c,
                    profile: DensityExpr::Samples {
                        xs: edges.clone(),
                        values: {
                            // Piecewise-linear density through bin-center
                            // heights, pinned to bin averages at the edges.
                            let mut v = Vec::with_capacity(edges.len());
                            for i in 0..edges.len() {
                                let lo = i.saturating_sub(1).min(masses.len() - 1);
                                let hi = i.min(masses.len() - 1);
                                let w = self.bins.edges()[1] - self.bins.edges()[0];
                                let d_lo = masses[lo].value / w;
                                let d_hi = masses[hi].value / w;
                                v.push(0.5 * (d_lo + d_hi));
                            }
                            v
                        },
                    },
                })
                .collect(),
        }
    }
}

/// Shrinking-boundary lateral extraction: for each bin and component,
/// ∫_bin u(z_ε, τ) dτ along the ε-schedule, extrapolated to ε = 0.
pub fn extract_lateral_shrinking(
    u: &dyn Field,
    sched: &ExtractionSchedule,
    bins: TimeBins,
    tol: f64,
) -> Result<NuEstimate> {
    sched.validate()?;
    let domain = u.domain();
    if domain.dimension() != 1 {
        return Err(Error::Unsupported("trace extraction runs on interval domains".into()));
    }
    if !(bins.t_min > 0.0 && bins.t_max < u.horizon() && bins.count >= 1) {
        return Err(Error::Time("bins must lie strictly inside (0, T)".into()));
    }
    let edges = bins.edges();
    let breakpoints = u.time_breakpoints();
    let mut components = Vec::new();
    for &component in domain.boundary_components() {
        let mut per_bin: Vec<Vec<f64>> = vec![Vec::new(); bins.count];
        for &eps in &sched.epsilons {
            let q = domain.shrunken_boundary(eps)?;
            let node = q
                .nodes
                .iter()
                .find(|n| n.component == component)
                .expect("interval boundary has one node per component");
            for i in 0..bins.count {
                let r = crate::representation::integrate_time_with_breakpoints(
                    |t| u.eval(node.point, t).map(|v| v.value).unwrap_or(f64::NAN),
                    edges[i],
                    edges[i + 1],
                    &breakpoints,
                    tol / bins.count as f64,
                )?;
                per_bin[i].push(r.value);
            }
        }
        let estimates: Vec<LimitEstimate> = per_bin
            .into_iter()
            .map(|vals| extrapolate_limit(&sched.epsilons, &vals, sched.richardson))
            .collect();
        components.push((component, estimates));
    }
    Ok(NuEstimate { bins, components })
}

/// Boundary test function h on ∂Ω×(0,T): one time profile per component,
/// each vanishing near t = 0 and t = T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTest {
    pub profiles: Vec<(BoundaryComponent, DensityExpr)>,
}

impl BoundaryTest {
    pub fn on_both(profile: DensityExpr) -> Self {
        BoundaryTest {
            profiles: vec![
                (BoundaryComponent::Left, profile.clone()),
                (BoundaryComponent::Right, profile),
            ],
        }
    }

    pub fn single(component: BoundaryComponent, profile: DensityExpr) -> Self {
        BoundaryTest { profiles: vec![(component, profile)] }
    }

    fn validate(&self, horizon: f64) -> Result<()> {
        for (c, p) in &self.profiles {
            let (lo, hi) = p.support().ok_or_else(|| {
                Error::Measure(format!(
                    "boundary test on {} must vanish near t=0,T (compact support required)",
                    c.label()
                ))
            })?;
            if !(lo > 0.0 && hi < horizon) {
                return Err(Error::Measure(format!(
                    "boundary test support [{lo}, {hi}] must sit inside (0, {horizon})"
                )));
            }
        }
        Ok(())
    }

    /// ∬ h dν for a known lateral measure (the identity's left side in
    /// tests).
    pub fn pair_measure(&self, nu: &LateralMeasure) -> Result<f64> {
        let mut total = 0.0;
        for (c, p) in &self.profiles {
            let r = nu.integrate_against_window(
                |z, t| {
                    if z.component == *c {
                        p.eval(t, None).unwrap_or(0.0)
                    } else {
                        0.0
                    }
                },
                0.0,
                nu.horizon,
                1e-10,
            )?;
            total += r.value;
        }
        Ok(total)
    }
}

/// The δ̄-identity: evaluates ∬h dν as a plain space-time integral of u
/// against derivatives of the normal-constant extension h̄ and the blend
/// δ̄ — no ε-limit involved. The integrand is supported in the boundary
/// collar, which is integrated strip by strip.
///
/// Orientation fixes the sign: testing the heat equation with
/// η = (δ̄−ε)h̄ on Ω_ε (η vanishes on ∂Ω_ε, ∂δ̄/∂n = −1 with n outward)
/// gives
///
/// ```text
/// ∬ h dν = − ∫∫ u (h̄Δδ̄ + 2∇h̄·∇δ̄ + δ̄Δh̄ + δ̄h̄_t) dx dt,
/// ```
///
/// which both the shrinking-boundary route and the closed-form fixtures
/// confirm numerically.
pub fn lateral_identity(u: &dyn Field, h: &BoundaryTest, tol: f64) -> Result<quadrature::QuadratureResult> {
    let domain = *u.domain();
    if domain.dimension() != 1 {
        return Err(Error::Unsupported("the δ̄-identity is evaluated on intervals".into()));
    }
    h.validate(u.horizon())?;
    let (a, b) = domain.interval_bounds()?;
    let mid = 0.5 * (a + b);
    let collar = (2.0 * domain.epsilon0()).min(domain.inradius());

    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for (component, profile) in &h.profiles {
        let (strip_lo, strip_hi) = match component {
            BoundaryComponent::Left => (a, (a + collar).min(mid)),
            BoundaryComponent::Right => ((b - collar).max(mid), b),
            _ => unreachable!("interval components"),
        };
        let (t_lo, t_hi) = profile.support().expect("validated above");
        // Inner spatial integral of u(x,t)·(collar weight) over the strip;
        // outer adaptive integral over the profile's support.
        let inner = |t: f64| -> f64 {
            let h_val = profile.eval(t, None).unwrap_or(f64::NAN);
            let h_dot = profile.derivative(t).unwrap_or(f64::NAN);
            let r = quadrature::integrate_adaptive(
                |x| {
                    let db = match domain.delta_bar(Point::One(x)) {
                        Ok(v) => v,
                        Err(_) => return f64::NAN,
                    };
                    let delta = domain.delta(Point::One(x)).unwrap_or(f64::NAN);
                    let (chi, chi1, chi2) = domain.cutoff(delta);
                    if chi == 0.0 && chi1 == 0.0 && chi2 == 0.0 && db.laplacian == 0.0 {
                        return 0.0;
                    }
                    let grad_delta = if x < mid { 1.0 } else { -1.0 };
                    let grad_h = h_val * chi1 * grad_delta;
                    let lap_h = h_val * chi2;
                    let weight = h_val * chi * db.laplacian
                        + 2.0 * grad_h * db.gradient[0]
                        + db.value * lap_h
                        + db.value * h_dot * chi;
                    match u.eval(Point::One(x), t) {
                        Ok(v) => v.value * weight,
                        Err(_) => f64::NAN,
                    }
                },
                strip_lo,
                strip_hi,
                tol / (4.0 * (t_hi - t_lo).max(1e-12)),
            );
            r.map(|q| q.value).unwrap_or(f64::NAN)
        };
        let r = quadrature::integrate_adaptive(inner, t_lo, t_hi, tol / 2.0)?;
        value -= r.value;
        error += r.error_estimate;
        evaluations += r.evaluations;
    }
    Ok(quadrature::QuadratureResult { value, error_estimate: error, evaluations, converged: true })
}

/// The Green potential w(·,t) = ∫ G(·,y) u(y,t) dy of a field's time
/// slice, precomputed on a panel grid so that w is exact at panel edges
/// (the elliptic kernel's kink always falls on an edge).
pub struct GreenPotential {
    domain: Domain,
    edges: Vec<f64>,
    /// Cumulative ∫_a^{edge} u and ∫_a^{edge} (y−a)u.
    cum_mass: Vec<f64>,
    cum_moment: Vec<f64>,
    max_u_error: f64,
}

impl GreenPotential {
    /// Build on the default grid: `interior` uniform panels plus graded
    /// panels accumulating at both ends (resolving boundary layers of
    /// u(·,t) at small t).
    pub fn new(u: &dyn Field, t: f64, interior: usize) -> Result<Self> {
        let domain = *u.domain();
        let (a, b) = domain.interval_bounds()?;
        let mut edges = vec![a];
        let e0 = domain.epsilon0();
        for j in (0..12).rev() {
            edges.push(a + e0 * 0.5f64.powi(j as i32 + 1));
        }
        for x in linspace(a + e0, b - e0, interior.max(2)) {
            edges.push(x);
        }
        for j in 0..12 {
            edges.push(b - e0 * 0.5f64.powi(j as i32 + 1));
        }
        edges.push(b);
        edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
        edges.dedup();
        Self::on_edges(u, t, edges)
    }

    /// Build with explicit panel edges (first = a, last = b).
    pub fn on_edges(u: &dyn Field, t: f64, edges: Vec<f64>) -> Result<Self> {
        let domain = *u.domain();
        let (a, b) = domain.interval_bounds()?;
        if edges.len() < 2 || edges[0] != a || *edges.last().unwrap() != b {
            return Err(Error::Domain("potential edges must span [a, b]".into()));
        }
        if !(t > 0.0 && t <= u.horizon()) {
            return Err(Error::Time(format!("t = {t} outside (0, T]")));
        }
        let rule = kronrod_reference_rule();
        let mut cum_mass = vec![0.0];
        let mut cum_moment = vec![0.0];
        let mut max_u_error = 0.0f64;
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            let mut m = 0.0;
            let mut mm = 0.0;
            for &(xi, wi) in rule.iter() {
                let x = mid + half * xi;
                let v = u.eval(Point::One(x), t)?;
                max_u_error = max_u_error.max(v.error);
                m += wi * half * v.value;
                mm += wi * half * (x - a) * v.value;
            }
            cum_mass.push(cum_mass.last().unwrap() + m);
            cum_moment.push(cum_moment.last().unwrap() + mm);
        }
        Ok(GreenPotential { domain, edges, cum_mass, cum_moment, max_u_error })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn max_u_error(&self) -> f64 {
        self.max_u_error
    }

    /// w at panel edge `i` (exact panel combination, no interpolation).
    pub fn value_at_edge(&self, i: usize) -> f64 {
        let (a, b) = self.domain.interval_bounds().expect("interval");
        let l = b - a;
        let x = self.edges[i];
        let n = self.edges.len() - 1;
        let mass_right = self.cum_mass[n] - self.cum_mass[i];
        let moment_right = self.cum_moment[n] - self.cum_moment[i];
        // ∫_a^x (y−a)(b−x)/L u + ∫_x^b (x−a)(b−y)/L u
        (b - x) / l * self.cum_moment[i] + (x - a) / l * (l * mass_right - moment_right)
    }

    /// w at an arbitrary point (fresh partial-panel integration).
    pub fn eval(&self, u: &dyn Field, t: f64, x: f64) -> Result<f64> {
        let i = match self.edges.binary_search_by(|e| e.partial_cmp(&x).unwrap()) {
            Ok(i) => return Ok(self.value_at_edge(i)),
            Err(i) => i,
        };
        if i == 0 || i >= self.edges.len() {
            return Err(Error::Domain(format!("x = {x} outside the potential grid")));
        }
        let (a, b) = self.domain.interval_bounds()?;
        let l = b - a;
        // Split the straddling panel at x.
        let rule = kronrod_reference_rule();
        let mut partial_mass = 0.0;
        let mut partial_moment = 0.0;
        let (lo, hi) = (self.edges[i - 1], x);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for &(xi, wi) in rule.iter() {
            let y = mid + half * xi;
            let v = u.eval(Point::One(y), t)?;
            partial_mass += wi * half * v.value;
            partial_moment += wi * half * (y - a) * v.value;
        }
        let n = self.edges.len() - 1;
        let mass_left = self.cum_mass[i - 1] + partial_mass;
        let moment_left = self.cum_moment[i - 1] + partial_moment;
        let mass_right = self.cum_mass[n] - mass_left;
        let moment_right = self.cum_moment[n] - moment_left;
        Ok((b - x) / l * moment_left + (x - a) / l * (l * mass_right - moment_right))
    }
}

/// H(x,t) = w(x,t) + ∬_{∂Ω×(t,T₁)} K(x,z) dν̂: the monotone comparison
/// function combining the Green potential with the elliptic Martin
/// kernel applied to the remaining lateral mass. Non-increasing in t.
pub fn h_function(
    u: &dyn Field,
    nu_estimate: &NuEstimate,
    t1: f64,
    x: f64,
    t: f64,
) -> Result<f64> {
    if !(t < t1 && t1 < u.horizon()) {
        return Err(Error::Time(format!("need t < T₁ < T, got t={t}, T₁={t1}")));
    }
    let w = GreenPotential::new(u, t, 48)?;
    let wx = w.eval(u, t, x)?;
    Ok(wx + martin_tail(u.domain(), nu_estimate, x, t, t1)?)
}

fn martin_tail(domain: &Domain, nu: &NuEstimate, x: f64, t: f64, t1: f64) -> Result<f64> {
    let elliptic = EllipticGreen::new(*domain);
    let mut tail = 0.0;
    for &c in domain.boundary_components() {
        let k = elliptic.martin(Point::One(x).into(), &crate::domain::BoundaryPoint::new(c))?;
        tail += k * nu.window_mass(c, t, t1);
    }
    Ok(tail)
}

/// Profile of H along a decreasing time schedule at fixed probes; one
/// Green potential per time level.
pub fn h_function_profile(
    u: &dyn Field,
    nu_estimate: &NuEstimate,
    t1: f64,
    probes: &[f64],
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        if !(t < t1) {
            return Err(Error::Time(format!("schedule time {t} must stay below T₁ = {t1}")));
        }
        let w = GreenPotential::new(u, t, 48)?;
        let mut row = Vec::with_capacity(probes.len());
        for &x in probes {
            let wx = w.eval(u, t, x)?;
            row.push(wx + martin_tail(u.domain(), nu_estimate, x, t, t1)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Result of the 1D Riesz–Martin decomposition of a superharmonic w*.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Interior grid nodes and the recovered density −w*″ there.
    pub nodes: Vec<f64>,
    pub mu_density: Vec<f64>,
    /// Atoms detected at second-difference spikes: (location, mass).
    pub mu_atoms: Vec<(f64, f64)>,
    /// (λ_left, λ_right) from the harmonic (affine) remainder.
    pub lambda: (f64, f64),
    /// Most negative density estimate: the superharmonicity defect.
    pub defect: f64,
}

/// Decompose w* sampled on a uniform grid over [a,b] into a Green
/// potential of μ (density −w*″ plus atoms at spikes) and the affine
/// harmonic remainder carrying (λ_left, λ_right).
///
/// Inputs that fail superharmonicity beyond `noise_tol` are rejected.
pub fn riesz_martin_decompose_1d(
    domain: &Domain,
    xs: &[f64],
    w_star: &[f64],
    noise_tol: f64,
) -> Result<Decomposition> {
    let (a, b) = domain.interval_bounds()?;
    let l = b - a;
    if xs.len() != w_star.len() || xs.len() < 5 {
        return Err(Error::Domain("decomposition needs >= 5 uniform samples".into()));
    }
    let h = xs[1] - xs[0];
    if xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::Domain("decomposition grid must be uniform".into()));
    }

    // Density candidate: −D² w* at interior nodes.
    let n = xs.len();
    let mut density: Vec<f64> = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        density.push(-(w_star[i + 1] - 2.0 * w_star[i] + w_star[i - 1]) / (h * h));
    }

    // Spike detection: a node whose |D²| mass exceeds 3× the median of
    // its neighbors carries an atom of mass ≈ density·h.
    let mut atoms = Vec::new();
    let mut smoothed = density.clone();
    for i in 0..density.len() {
        let mut neigh: Vec<f64> = (i.saturating_sub(3)..(i + 4).min(density.len()))
            .filter(|&j| j != i && j.abs_diff(i) > 1)
            .map(|j| density[j].abs())
            .collect();
        neigh.sort_by(|p, q| p.partial_cmp(q).unwrap());
        if neigh.is_empty() {
            continue;
        }
        let median = neigh[neigh.len() / 2];
        let mass = density[i] * h;
        if density[i].abs() > 3.0 * median.max(noise_tol / h) && mass.abs() > 10.0 * noise_tol {
            let background = median * h.signum() * density[i].signum();
            atoms.push((xs[i + 1], mass - background * h));
            smoothed[i] = background;
        }
    }

    let defect = smoothed.iter().fold(0.0f64, |m, &d| m.min(d));
    if defect < -noise_tol {
        return Err(Error::Measure(format!(
            "input is not superharmonic within the noise floor: density dips to {defect:.3e}"
        )));
    }

    // Harmonic remainder: in 1D affine, λ_left·(b−x)/L + λ_right·(x−a)/L,
    // so the boundary intercepts of w* are the Martin masses. The Green
    // part of w* is C¹ at the boundary with curvature −μ, so a quadratic
    // extrapolation through the three nearest interior nodes removes the
    // O(h²) curvature bias a linear fit would leave.
    let lam_left = quadratic_intercept(a, &xs[1..4], &w_star[1..4]);
    let lam_right = quadratic_intercept(b, &[xs[n - 2], xs[n - 3], xs[n - 4]], &[
        w_star[n - 2],
        w_star[n - 3],
        w_star[n - 4],
    ]);

    let _ = l;
    Ok(Decomposition {
        nodes: xs[1..n - 1].to_vec(),
        mu_density: smoothed,
        mu_atoms: atoms,
        lambda: (lam_left.max(0.0), lam_right.max(0.0)),
        defect,
    })
}

/// Value at `x0` of the parabola through three (x, w) samples (Lagrange).
fn quadratic_intercept(x0: f64, xs: &[f64], ws: &[f64]) -> f64 {
    let (x1, x2, x3) = (xs[0], xs[1], xs[2]);
    let (w1, w2, w3) = (ws[0], ws[1], ws[2]);
    let l1 = (x0 - x2) * (x0 - x3) / ((x1 - x2) * (x1 - x3));
    let l2 = (x0 - x1) * (x0 - x3) / ((x2 - x1) * (x2 - x3));
    let l3 = (x0 - x1) * (x0 - x2) / ((x3 - x1) * (x3 - x2));
    w1 * l1 + w2 * l2 + w3 * l3
}

/// Intercept at ξ = 0 of the least-squares cubic through (ξ, w) samples.
fn cubic_lsq_intercept(pts: &[(f64, f64)]) -> f64 {
    let mut m = [[0.0f64; 4]; 4];
    let mut rhs = [0.0f64; 4];
    for &(xi, w) in pts {
        let powers = [1.0, xi, xi * xi, xi * xi * xi];
        for r in 0..4 {
            rhs[r] += powers[r] * w;
            for c in 0..4 {
                m[r][c] += powers[r] * powers[c];
            }
        }
    }
    // Gaussian elimination with partial pivoting on the 4×4 system.
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&r1, &r2| m[r1][col].abs().partial_cmp(&m[r2][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let d = m[col][col];
        for r in col + 1..4 {
            let f = m[r][col] / d;
            for c in col..4 {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut sol = [0.0f64; 4];
    for r in (0..4).rev() {
        let mut s = rhs[r];
        for c in r + 1..4 {
            s -= m[r][c] * sol[c];
        }
        sol[r] = s / m[r][r];
    }
    sol[0]
}

/// Estimated initial trace (μ, λ) with convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialTraceEstimate {
    pub nodes: Vec<f64>,
    pub mu_density: Vec<f64>,
    pub mu_atoms: Vec<(f64, f64)>,
    pub lambda: (f64, f64),
    /// Residuals of the t→0 extrapolations feeding the estimate.
    pub density_residual: f64,
    pub lambda_residual: f64,
    pub observed_order: Option<f64>,
}

/// Extract (μ, λ) from a field along the Green-potential route: compute
/// w(·,t_j) on a uniform grid for the time schedule, extrapolate the
/// second differences (the density estimates) and the boundary
/// intercepts (the Martin masses) node by node to t → 0.
///
/// Second differences of w(·,t) equal −u(·,t) up to O(h²), so
/// extrapolating them avoids the noise amplification of differencing an
/// extrapolated w*. Within `margin` of ∂Ω the density column reports the
/// boundary layer faithfully but takes no part in atom detection or
/// residuals: at finite schedule resolution, mass there is genuinely
/// ambiguous against the corner measure.
pub fn extract_initial_trace(
    u: &dyn Field,
    sched: &ExtractionSchedule,
    grid_n: usize,
    noise_tol: f64,
    margin: f64,
) -> Result<InitialTraceEstimate> {
    sched.validate()?;
    let domain = *u.domain();
    let (a, b) = domain.interval_bounds()?;
    if grid_n < 9 {
        return Err(Error::Domain("initial-trace grid needs >= 9 nodes".into()));
    }
    let xs = linspace(a, b, grid_n);
    let h = xs[1] - xs[0];

    // w on the uniform grid per schedule time. The potential's panel
    // edges are exactly the uniform nodes plus graded end refinements.
    let mut w_levels: Vec<Vec<f64>> = Vec::with_capacity(sched.times.len());
    for &t in &sched.times {
        let mut edges = xs.clone();
        for j in 1..10 {
            edges.push(a + h * 0.5f64.powi(j));
            edges.push(b - h * 0.5f64.powi(j));
        }
        edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
        edges.dedup();
        let gp = GreenPotential::on_edges(u, t, edges)?;
        let w: Vec<f64> = xs
            .iter()
            .map(|x| {
                let i = gp
                    .edges()
                    .binary_search_by(|e| e.partial_cmp(x).unwrap())
                    .expect("uniform nodes are panel edges");
                gp.value_at_edge(i)
            })
            .collect();
        w_levels.push(w);
    }

    // Node-by-node extrapolation of the second differences.
    let in_margin = |x: f64| (x - a).min(b - x) < margin;
    let mut mu_density = Vec::with_capacity(grid_n - 2);
    let mut density_residual = 0.0f64;
    let mut order_acc = Vec::new();
    for i in 1..grid_n - 1 {
        let vals: Vec<f64> = w_levels
            .iter()
            .map(|w| -(w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h))
            .collect();
        let est = extrapolate_limit(&sched.times, &vals, sched.richardson);
        if !in_margin(xs[i]) {
            density_residual = density_residual.max(est.residual);
            if let Some(p) = est.observed_order {
                order_acc.push(p);
            }
        }
        mu_density.push(est.value);
    }

    // Atom detection on the extrapolated density, outside the margin.
    let mut atoms = Vec::new();
    let mut smoothed = mu_density.clone();
    for i in 0..mu_density.len() {
        if in_margin(xs[i + 1]) {
            continue;
        }
        let mut neigh: Vec<f64> = (i.saturating_sub(3)..(i + 4).min(mu_density.len()))
            .filter(|&j| j != i && j.abs_diff(i) > 1)
            .map(|j| mu_density[j].abs())
            .collect();
        neigh.sort_by(|p, q| p.partial_cmp(q).unwrap());
        if neigh.is_empty() {
            continue;
        }
        let median = neigh[neigh.len() / 2];
        let mass = mu_density[i] * h;
        if mu_density[i].abs() > 3.0 * median.max(noise_tol / h) && mass.abs() > 10.0 * noise_tol {
            atoms.push((xs[i + 1], mass));
            smoothed[i] = median;
        }
    }

    // Martin intercepts: least-squares cubic over a node window clear of
    // the finest boundary layer, extrapolated to the endpoint per level,
    // then the t → 0 limit across levels.
    let e0 = domain.epsilon0();
    let (win_lo, win_hi) = (0.4 * e0, 1.4 * e0);
    let lambda_of = |left: bool| -> LimitEstimate {
        let xi_of = |x: f64| if left { x - a } else { b - x };
        let mut idx: Vec<usize> = (1..grid_n - 1)
            .filter(|&i| {
                let xi = xi_of(xs[i]);
                xi >= win_lo && xi <= win_hi
            })
            .collect();
        if idx.len() < 5 {
            // Coarse grids: take the five nodes nearest the window start.
            idx = (1..grid_n - 1)
                .filter(|&i| xi_of(xs[i]) >= 0.5 * win_lo)
                .take(5)
                .collect();
        }
        let vals: Vec<f64> = w_levels
            .iter()
            .map(|w| {
                let pts: Vec<(f64, f64)> = idx.iter().map(|&i| (xi_of(xs[i]), w[i])).collect();
                cubic_lsq_intercept(&pts)
            })
            .collect();
        extrapolate_limit(&sched.times, &vals, sched.richardson)
    };
    let lam_l = lambda_of(true);
    let lam_r = lambda_of(false);

    let observed_order = if order_acc.is_empty() {
        None
    } else {
        Some(order_acc.iter().sum::<f64>() / order_acc.len() as f64)
    };
    Ok(InitialTraceEstimate {
        nodes: xs[1..grid_n - 1].to_vec(),
        mu_density: smoothed,
        mu_atoms: atoms,
        lambda: (lam_l.value.max(0.0), lam_r.value.max(0.0)),
        density_residual,
        lambda_residual: lam_l.residual.max(lam_r.residual),
        observed_order,
    })
}

/// Full extraction output: estimated triple plus diagnostics, in the
/// measure schema with convergence tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub mu: InteriorMeasure,
    pub lambda: CornerMeasure,
    pub nu: LateralMeasure,
    pub diagnostics: TraceDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDiagnostics {
    pub density_residual: f64,
    pub lambda_residual: f64,
    pub nu_max_residual: f64,
    pub observed_order_initial: Option<f64>,
    /// Per-component convergence tables of the lateral bins (CSV-ready).
    pub nu_tables: Vec<(String, Vec<Vec<(f64, f64)>>)>,
    pub converged: bool,
}

/// Run both extraction routes and assemble a [`TraceReport`].
pub fn extract_traces(
    u: &dyn Field,
    sched: &ExtractionSchedule,
    bins: TimeBins,
    grid_n: usize,
    tol: f64,
    margin: f64,
) -> Result<TraceReport> {
    let initial = extract_initial_trace(u, sched, grid_n, tol, margin)?;
    let nu_est = extract_lateral_shrinking(u, sched, bins, tol)?;

    let mut mu = InteriorMeasure {
        atoms: initial
            .mu_atoms
            .iter()
            .map(|&(x, m)| InteriorAtom::new(Point::One(x), m.max(0.0)))
            .collect(),
        density: Vec::new(),
        blowup_exponent: None,
    };
    let max_density = initial.mu_density.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_density > 10.0 * tol {
        let (a, b) = u.domain().interval_bounds()?;
        let mut xs = vec![a];
        xs.extend_from_slice(&initial.nodes);
        xs.push(b);
        let mut vals = vec![0.0];
        vals.extend(initial.mu_density.iter().map(|v| v.max(0.0)));
        vals.push(0.0);
        mu.density.push(crate::measures::DensitySegment {
            from: a,
            to: b,
            expr: DensityExpr::Samples { xs, values: vals },
        });
    }

    let lambda = CornerMeasure {
        atoms: vec![
            CornerAtom { component: BoundaryComponent::Left, along: 0.0, mass: initial.lambda.0 },
            CornerAtom { component: BoundaryComponent::Right, along: 0.0, mass: initial.lambda.1 },
        ],
    };

    let nu_max_residual = nu_est
        .components
        .iter()
        .flat_map(|(_, v)| v.iter().map(|e| e.residual))
        .fold(0.0f64, f64::max);
    let nu_tables = nu_est
        .components
        .iter()
        .map(|(c, v)| (c.label().to_string(), v.iter().map(|e| e.table.clone()).collect()))
        .collect();
    let nu = nu_est.to_measure(u.horizon());

    let converged = initial.density_residual < 1e3 * tol.max(1e-6)
        && initial.lambda_residual < 1e3 * tol.max(1e-6);
    Ok(TraceReport {
        mu,
        lambda,
        nu,
        diagnostics: TraceDiagnostics {
            density_residual: initial.density_residual,
            lambda_residual: initial.lambda_residual,
            nu_max_residual,
            observed_order_initial: initial.observed_order,
            nu_tables,
            converged,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::TraceTriple;
    use crate::representation::{FieldValue, SolutionField};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    /// Closed-form field for tests.
    struct FnField<F: Fn(f64, f64) -> f64> {
        domain: Domain,
        horizon: f64,
        f: F,
    }

    impl<F: Fn(f64, f64) -> f64> Field for FnField<F> {
        fn domain(&self) -> &Domain {
            &self.domain
        }
        fn horizon(&self) -> f64 {
            self.horizon
        }
        fn eval(&self, x: Point, t: f64) -> crate::Result<FieldValue> {
            Ok(FieldValue { value: (self.f)(x.scalar()?, t), error: 1e-15 })
        }
    }

    fn eigen_field() -> FnField<impl Fn(f64, f64) -> f64> {
        FnField { domain: Domain::default(), horizon: 1.0, f: |x: f64, t: f64| (-t).exp() * x.sin() }
    }

    fn sched() -> ExtractionSchedule {
        ExtractionSchedule::geometric(0.3, 0.1, 8).unwrap()
    }

    #[test]
    fn aitken_kills_geometric_error() {
        // v_j = 1 + 0.5^j: limit 1 exactly after Δ².
        let params: Vec<f64> = (0..6).map(|j| 0.5f64.powi(j)).collect();
        let values: Vec<f64> = params.iter().map(|h| 1.0 + h).collect();
        let e = extrapolate_limit(&params, &values, true);
        assert_abs_diff_eq!(e.value, 1.0, epsilon = 1e-12);
        assert!(e.observed_order.map(|p| (p - 1.0).abs() < 0.05).unwrap_or(false));
    }

    #[test]
    fn pair_initial_trace_eigenfunction() {
        // u = e^{−t} sin x, η = sin: limit ∫ sin² = π/2. Aitken on
        // e^{−t_j} leaves the quadratic tail ~t_min².
        let u = eigen_field();
        let eta = TestFunction::sine_mode(&Domain::default(), 1).unwrap();
        let e = pair_initial_trace(&u, &eta, &sched(), 1e-10).unwrap();
        assert_abs_diff_eq!(e.value, PI / 2.0, epsilon = 1e-5);
        assert!(e.converged_within(1e-4), "residual {}", e.residual);
        assert!((e.value - PI / 2.0).abs() <= 10.0 * e.residual.max(1e-9));
    }

    #[test]
    fn pair_initial_trace_corner_atom() {
        // u from a unit corner atom at the left end: the pairing tends to
        // ∂η/∂N at the left end.
        let triple = TraceTriple::new(
            InteriorMeasure::zero(),
            CornerMeasure::from_atom(BoundaryComponent::Left, 1.0),
            LateralMeasure::zero(1.0),
        )
        .unwrap();
        let u = SolutionField::from_triple(Domain::default(), triple, 1e-9).unwrap();
        let eta = TestFunction::sine_mode(&Domain::default(), 1).unwrap();
        let e = pair_initial_trace(&u, &eta, &sched(), 1e-9).unwrap();
        assert_abs_diff_eq!(e.value, 1.0, epsilon = 1e-4);

        let bubble = TestFunction::bubble(&Domain::default()).unwrap();
        let e2 = pair_initial_trace(&u, &bubble, &sched(), 1e-9).unwrap();
        assert_abs_diff_eq!(e2.value, PI, epsilon = 1e-3);
    }

    #[test]
    fn lateral_shrinking_dirichlet_solution_is_zero() {
        // e^{−t} sin x vanishes on ∂Ω: zero lateral trace.
        let u = eigen_field();
        let bins = TimeBins { t_min: 0.05, t_max: 0.95, count: 8 };
        let est = extract_lateral_shrinking(&u, &sched(), bins, 1e-9).unwrap();
        for c in [BoundaryComponent::Left, BoundaryComponent::Right] {
            for e in est.component(c).unwrap() {
                assert!(e.value.abs() < 1e-6, "Dirichlet field must have zero lateral trace");
            }
        }
    }

    #[test]
    fn green_potential_of_eigenfunction() {
        // −(sin)″ = sin: w(·,t) = e^{−t} sin.
        let u = eigen_field();
        let gp = GreenPotential::new(&u, 0.5, 32).unwrap();
        for &x in &[0.5, 1.2, PI / 2.0, 2.8] {
            let w = gp.eval(&u, 0.5, x).unwrap();
            assert_abs_diff_eq!(w, (-0.5f64).exp() * x.sin(), epsilon = 1e-10);
        }
    }

    #[test]
    fn green_potential_of_constant() {
        // u ≡ 1: w = x(π−x)/2 (the torsion function).
        let u = FnField { domain: Domain::default(), horizon: 1.0, f: |_, _| 1.0 };
        let gp = GreenPotential::new(&u, 0.5, 32).unwrap();
        for &x in &[0.3, 1.0, 2.0, 3.0] {
            assert_abs_diff_eq!(gp.eval(&u, 0.5, x).unwrap(), x * (PI - x) / 2.0, epsilon = 1e-10);
        }
        // L¹ bound: ‖w‖₁ ≤ C ∫ u δ with C = π/2, from
        // ∫ G(x,y) dx = y(π−y)/2 ≤ (π/2)·δ(y).
        let w_l1 = quadrature::integrate_adaptive(
            |x| gp.eval(&u, 0.5, x).unwrap(),
            0.0,
            PI,
            1e-8,
        )
        .unwrap();
        let weighted = PI * PI / 4.0; // ∫ u δ for u ≡ 1
        assert!(w_l1.value <= PI / 2.0 * weighted + 1e-6);
        assert_abs_diff_eq!(w_l1.value, PI.powi(3) / 12.0, epsilon = 1e-6);
    }

    #[test]
    fn decompose_eigenfunction() {
        let d = Domain::default();
        let xs = linspace(0.0, PI, 65);
        let w: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let dec = riesz_martin_decompose_1d(&d, &xs, &w, 1e-6).unwrap();
        for (x, v) in dec.nodes.iter().zip(dec.mu_density.iter()) {
            assert_abs_diff_eq!(*v, x.sin(), epsilon = 2e-3);
        }
        assert!(dec.lambda.0.abs() < 1e-3 && dec.lambda.1.abs() < 1e-3);
        assert!(dec.mu_atoms.is_empty());
    }

    #[test]
    fn decompose_pure_martin_kernel() {
        let d = Domain::default();
        let xs = linspace(0.0, PI, 65);
        let w: Vec<f64> = xs.iter().map(|x| (PI - x) / PI).collect();
        let dec = riesz_martin_decompose_1d(&d, &xs, &w, 1e-8).unwrap();
        assert_abs_diff_eq!(dec.lambda.0, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(dec.lambda.1, 0.0, epsilon = 1e-10);
        for v in &dec.mu_density {
            assert!(v.abs() < 1e-8);
        }
    }

    #[test]
    fn decompose_superposition() {
        // w* = x(π−x)/2 + 0.3·x/π: μ = Lebesgue, λ = (0, 0.3).
        let d = Domain::default();
        let xs = linspace(0.0, PI, 65);
        let w: Vec<f64> = xs.iter().map(|x| x * (PI - x) / 2.0 + 0.3 * x / PI).collect();
        let dec = riesz_martin_decompose_1d(&d, &xs, &w, 1e-7).unwrap();
        for v in &dec.mu_density {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(dec.lambda.0, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(dec.lambda.1, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn decompose_detects_atom() {
        // w* = Green kernel of an atom at a grid node.
        let d = Domain::default();
        let n = 65;
        let xs = linspace(0.0, PI, n);
        let y0 = xs[32];
        let mass = 2.0;
        let w: Vec<f64> = xs
            .iter()
            .map(|x| mass * (x.min(y0) * (PI - x.max(y0))) / PI)
            .collect();
        let dec = riesz_martin_decompose_1d(&d, &xs, &w, 1e-8).unwrap();
        assert_eq!(dec.mu_atoms.len(), 1, "one atom expected, got {:?}", dec.mu_atoms);
        assert_abs_diff_eq!(dec.mu_atoms[0].0, y0, epsilon = 1e-12);
        assert_abs_diff_eq!(dec.mu_atoms[0].1, mass, epsilon = 1e-6);
    }

    #[test]
    fn decompose_rejects_subharmonic() {
        let d = Domain::default();
        let xs = linspace(0.0, PI, 65);
        let w: Vec<f64> = xs.iter().map(|x| -x.sin()).collect();
        assert!(riesz_martin_decompose_1d(&d, &xs, &w, 1e-6).is_err());
    }

    #[test]
    fn initial_trace_from_eigen_field() {
        let u = eigen_field();
        let est = extract_initial_trace(&u, &sched(), 65, 1e-8, 0.25).unwrap();
        // Density ≈ sin, λ ≈ 0.
        let mut max_err = 0.0f64;
        for (x, v) in est.nodes.iter().zip(est.mu_density.iter()) {
            max_err = max_err.max((v - x.sin()).abs());
        }
        assert!(max_err < 5e-3, "density error {max_err}");
        assert!(est.lambda.0 < 1e-3 && est.lambda.1 < 1e-3);
    }

    #[test]
    fn h_function_decreasing_for_eigen_field() {
        let u = eigen_field();
        let bins = TimeBins { t_min: 0.05, t_max: 0.9, count: 8 };
        let nu = extract_lateral_shrinking(&u, &sched(), bins, 1e-8).unwrap();
        let times: Vec<f64> = sched().times;
        let probes = [0.6, 1.5, 2.4];
        let rows = h_function_profile(&u, &nu, 0.93, &probes, &times).unwrap();
        // times decrease, so H must be non-decreasing along the rows
        // (H decreasing in t ⇔ increasing toward t → 0).
        for p in 0..probes.len() {
            for j in 1..times.len() {
                assert!(
                    rows[j][p] >= rows[j - 1][p] - 1e-6,
                    "H must decrease in t at probe {}",
                    probes[p]
                );
            }
        }
    }

    #[test]
    fn boundary_test_requires_compact_support() {
        let h = BoundaryTest::on_both(DensityExpr::Const { value: 1.0 });
        let u = eigen_field();
        assert!(lateral_identity(&u, &h, 1e-6).is_err());
    }

    #[test]
    fn lateral_identity_zero_for_dirichlet_field() {
        let u = eigen_field();
        let h = BoundaryTest::on_both(DensityExpr::Bump { start: 0.1, end: 0.9, ramp: 0.2 });
        let r = lateral_identity(&u, &h, 1e-7).unwrap();
        assert!(r.value.abs() < 1e-5, "got {}", r.value);
    }
}
