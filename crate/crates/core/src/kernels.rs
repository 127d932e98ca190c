//! Dirichlet heat kernel G(x,t;y,s) of Ω×ℝ, its inner-normal derivative
//! ∂G/∂N_y (the lateral Poisson-type kernel), shrunken-domain kernels, and
//! the elliptic Green function of −Δ.
//!
//! Two representations are kept for the interval kernel, each geometrically
//! convergent in its regime:
//!
//! - spectral: G = (2/L) Σ_k e^{−(kπ/L)²τ} sin(kπξ/L) sin(kπη/L), fast for
//!   moderate and large τ = t−s;
//! - method of images: G = Σ_m [Φ(ξ−η−2Lm) − Φ(ξ+η−2Lm)] with the free
//!   Gaussian Φ, fast for small τ.
//!
//! Every value carries an error estimate derived from an analytic tail
//! bound of the chosen representation. Normal derivatives are evaluated by
//! term-wise analytic differentiation, never by numerical differencing.
//! Rectangles factorize into products of interval kernels.

use crate::domain::{BoundaryComponent, BoundaryPoint, Domain, Point};
use crate::error::{Error, Result};

/// A kernel value with its certified truncation-plus-rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub error: f64,
}

impl KernelValue {
    const ZERO: KernelValue = KernelValue { value: 0.0, error: 0.0 };

    fn product(self, other: KernelValue) -> KernelValue {
        KernelValue {
            value: self.value * other.value,
            error: self.error * other.value.abs()
                + other.error * self.value.abs()
                + self.error * other.error,
        }
    }
}

/// Which series realizes the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRepresentation {
    Spectral,
    Image,
}

/// Heat-kernel evaluator for a fixed domain with accuracy control.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    domain: Domain,
    /// Relative accuracy target (against the leading-term scale of the
    /// active representation).
    tolerance: f64,
    /// Hard cap on series terms; reaching it is reported through a larger
    /// error estimate, never silently.
    series_cap: usize,
    /// Representation switch: spectral for τ(π/L)² ≥ threshold, images
    /// below.
    switch_threshold: f64,
}

impl KernelEvaluator {
    pub fn new(domain: Domain) -> Self {
        KernelEvaluator {
            domain,
            tolerance: 1e-10,
            series_cap: 10_000,
            switch_threshold: 0.05,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_series_cap(mut self, cap: usize) -> Self {
        self.series_cap = cap.max(1);
        self
    }

    pub fn with_switch_threshold(mut self, threshold: f64) -> Self {
        self.switch_threshold = threshold;
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn interval(&self) -> Result<Interval1d> {
        let (a, b) = self.domain.interval_bounds()?;
        Ok(Interval1d { a, b })
    }

    fn check_times(t: f64, s: f64) -> Result<f64> {
        let tau = t - s;
        if !(tau > 0.0) {
            return Err(Error::Time(format!("required s < t, got s = {s}, t = {t}")));
        }
        Ok(tau)
    }

    fn pick(&self, interval: &Interval1d, tau: f64) -> KernelRepresentation {
        if interval.canonical_time(tau) >= self.switch_threshold {
            KernelRepresentation::Spectral
        } else {
            KernelRepresentation::Image
        }
    }

    /// G(x,t;y,s). Positive inside Ω, zero if either spatial argument lies
    /// on ∂Ω, symmetric in (x,y), a function of t−s only.
    pub fn heat_green(&self, x: Point, t: f64, y: Point, s: f64) -> Result<KernelValue> {
        let tau = Self::check_times(t, s)?;
        match self.domain.dimension() {
            1 => {
                let iv = self.interval()?;
                self.green_1d(&iv, x.scalar()?, y.scalar()?, tau)
            }
            _ => {
                let ((a, b), (c, d)) = self.domain.rectangle_bounds()?;
                let [x1, x2] = x.coords();
                let [y1, y2] = y.coords();
                let g1 = self.green_1d(&Interval1d { a, b }, x1, y1, tau)?;
                let g2 = self.green_1d(&Interval1d { a: c, b: d }, x2, y2, tau)?;
                Ok(g1.product(g2))
            }
        }
    }

    /// G with the representation forced, for cross-representation checks.
    pub fn heat_green_with(
        &self,
        rep: KernelRepresentation,
        x: Point,
        t: f64,
        y: Point,
        s: f64,
    ) -> Result<KernelValue> {
        let tau = Self::check_times(t, s)?;
        let iv = self.interval()?;
        let (x, y) = (x.scalar()?, y.scalar()?);
        iv.check_contains(x)?;
        iv.check_contains(y)?;
        Ok(match rep {
            KernelRepresentation::Spectral => {
                iv.green_spectral(x, y, tau, self.tolerance, self.series_cap)
            }
            KernelRepresentation::Image => {
                iv.green_image(x, y, tau, self.tolerance, self.series_cap)
            }
        })
    }

    fn green_1d(&self, iv: &Interval1d, x: f64, y: f64, tau: f64) -> Result<KernelValue> {
        iv.check_contains(x)?;
        iv.check_contains(y)?;
        // Dirichlet kernel vanishes identically on ∂Ω.
        if x == iv.a || x == iv.b || y == iv.a || y == iv.b {
            return Ok(KernelValue::ZERO);
        }
        let primary = match self.pick(iv, tau) {
            KernelRepresentation::Spectral => {
                iv.green_spectral(x, y, tau, self.tolerance, self.series_cap)
            }
            KernelRepresentation::Image => {
                iv.green_image(x, y, tau, self.tolerance, self.series_cap)
            }
        };
        // Spectral sums cancel catastrophically when the kernel is many
        // orders below its leading term (distant probes); the image sum
        // has no cancellation there.
        if primary.value.abs() <= primary.error
            && self.pick(iv, tau) == KernelRepresentation::Spectral
        {
            let img = iv.green_image(x, y, tau, self.tolerance, self.series_cap);
            if img.error < primary.error {
                return Ok(img);
            }
        }
        Ok(primary)
    }

    /// Lateral Poisson-type kernel ∂G/∂N_y(x,t;z,s) at a boundary point z.
    /// Strictly positive for x ∈ Ω, s < t.
    pub fn heat_green_normal(
        &self,
        x: Point,
        t: f64,
        z: &BoundaryPoint,
        s: f64,
    ) -> Result<KernelValue> {
        let tau = Self::check_times(t, s)?;
        match self.domain.dimension() {
            1 => {
                let iv = self.interval()?;
                let end = interval_end(z)?;
                self.normal_1d(&iv, x.scalar()?, end, tau)
            }
            _ => {
                let ((a, b), (c, d)) = self.domain.rectangle_bounds()?;
                let [x1, x2] = x.coords();
                let ivx = Interval1d { a, b };
                let ivy = Interval1d { a: c, b: d };
                // The normal derivative acts on the side's transverse
                // factor; the tangential factor is a plain kernel hit at
                // the along-coordinate.
                match z.component {
                    BoundaryComponent::Left | BoundaryComponent::Right => {
                        let end = if z.component == BoundaryComponent::Left {
                            IntervalEnd::Lower
                        } else {
                            IntervalEnd::Upper
                        };
                        let p = self.normal_1d(&ivx, x1, end, tau)?;
                        let g = self.green_1d(&ivy, x2, z.along, tau)?;
                        Ok(p.product(g))
                    }
                    BoundaryComponent::Bottom | BoundaryComponent::Top => {
                        let end = if z.component == BoundaryComponent::Bottom {
                            IntervalEnd::Lower
                        } else {
                            IntervalEnd::Upper
                        };
                        let p = self.normal_1d(&ivy, x2, end, tau)?;
                        let g = self.green_1d(&ivx, x1, z.along, tau)?;
                        Ok(p.product(g))
                    }
                }
            }
        }
    }

    fn normal_1d(&self, iv: &Interval1d, x: f64, end: IntervalEnd, tau: f64) -> Result<KernelValue> {
        iv.check_contains(x)?;
        if x == iv.a || x == iv.b {
            return Ok(KernelValue::ZERO);
        }
        let primary = match self.pick(iv, tau) {
            KernelRepresentation::Spectral => {
                iv.normal_spectral(x, end, tau, self.tolerance, self.series_cap)
            }
            KernelRepresentation::Image => {
                iv.normal_image(x, end, tau, self.tolerance, self.series_cap)
            }
        };
        if primary.value.abs() <= primary.error
            && self.pick(iv, tau) == KernelRepresentation::Spectral
        {
            let img = iv.normal_image(x, end, tau, self.tolerance, self.series_cap);
            if img.error < primary.error {
                return Ok(img);
            }
        }
        Ok(primary)
    }

    fn shrunken_domain(&self, epsilon: f64) -> Result<Domain> {
        if !(epsilon > 0.0 && epsilon <= self.domain.epsilon0()) {
            return Err(Error::Domain(format!(
                "epsilon = {epsilon} outside (0, epsilon0 = {}]",
                self.domain.epsilon0()
            )));
        }
        match self.domain.dimension() {
            1 => {
                let (a, b) = self.domain.interval_bounds()?;
                Domain::interval(a + epsilon, b - epsilon, (self.domain.epsilon0() - epsilon).max(f64::MIN_POSITIVE).min((b - a - 2.0 * epsilon) / 4.0))
            }
            _ => {
                let ((a, b), (c, d)) = self.domain.rectangle_bounds()?;
                Domain::rectangle(
                    (a + epsilon, b - epsilon),
                    (c + epsilon, d - epsilon),
                    (self.domain.epsilon0() - epsilon)
                        .max(f64::MIN_POSITIVE)
                        .min(0.25 * ((b - a).min(d - c) - 2.0 * epsilon)),
                )
            }
        }
    }

    /// Kernel G_ε of the shrunken domain Ω_ε. Domain monotonicity gives
    /// G_ε ≤ G pointwise.
    pub fn heat_green_shrunken(
        &self,
        epsilon: f64,
        x: Point,
        t: f64,
        y: Point,
        s: f64,
    ) -> Result<KernelValue> {
        let sub = KernelEvaluator {
            domain: self.shrunken_domain(epsilon)?,
            ..self.clone()
        };
        sub.heat_green(x, t, y, s)
    }

    /// ∂G_ε/∂N_y on ∂Ω_ε, the flux kernel of the shrunken domain.
    pub fn heat_green_shrunken_normal(
        &self,
        epsilon: f64,
        x: Point,
        t: f64,
        z: &BoundaryPoint,
        s: f64,
    ) -> Result<KernelValue> {
        let sub = KernelEvaluator {
            domain: self.shrunken_domain(epsilon)?,
            ..self.clone()
        };
        sub.heat_green_normal(x, t, z, s)
    }

    /// ∫_Ω G(x,t;y,s) dy by the analytic odd-mode series. At most 1; the
    /// defect equals the boundary flux accumulated over (s,t).
    pub fn heat_mass(&self, x: Point, t: f64, s: f64) -> Result<KernelValue> {
        let tau = Self::check_times(t, s)?;
        let iv = self.interval()?;
        let x = x.scalar()?;
        iv.check_contains(x)?;
        Ok(iv.mass_spectral(x, tau, self.tolerance, self.series_cap))
    }

    /// Analytic truncation-tail bound for the interval kernel: the error
    /// committed after `terms_used` terms of the given representation at
    /// separation `t_minus_s`.
    pub fn tail_bound(
        &self,
        rep: KernelRepresentation,
        terms_used: usize,
        t_minus_s: f64,
    ) -> Result<f64> {
        if terms_used == 0 || !(t_minus_s > 0.0) {
            return Err(Error::Time(
                "tail bound needs terms_used >= 1 and t_minus_s > 0".into(),
            ));
        }
        let iv = self.interval()?;
        Ok(match rep {
            KernelRepresentation::Spectral => iv.spectral_tail(terms_used, t_minus_s),
            KernelRepresentation::Image => iv.image_tail(terms_used, t_minus_s),
        })
    }
}

fn interval_end(z: &BoundaryPoint) -> Result<IntervalEnd> {
    match z.component {
        BoundaryComponent::Left => Ok(IntervalEnd::Lower),
        BoundaryComponent::Right => Ok(IntervalEnd::Upper),
        _ => Err(Error::Domain(
            "interval boundary points are left/right only".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum IntervalEnd {
    Lower,
    Upper,
}

/// One spatial factor: the open interval (a,b).
#[derive(Debug, Clone, Copy)]
struct Interval1d {
    a: f64,
    b: f64,
}

impl Interval1d {
    fn length(&self) -> f64 {
        self.b - self.a
    }

    /// τ rescaled to the canonical interval (0,π): the first spectral
    /// decay rate is exp(−canonical_time).
    fn canonical_time(&self, tau: f64) -> f64 {
        let l = self.length();
        tau * (std::f64::consts::PI / l).powi(2)
    }

    fn check_contains(&self, x: f64) -> Result<()> {
        if x < self.a || x > self.b || !x.is_finite() {
            return Err(Error::Domain(format!(
                "coordinate {x} outside the closure of ({}, {})",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// Remaining-sum bound for the spectral kernel series after N terms:
    /// (2/L) Σ_{k>N} e^{−ck²} ≤ (2/L) e^{−c(N+1)²} / (1 − e^{−2c(N+1)}).
    fn spectral_tail(&self, terms: usize, tau: f64) -> f64 {
        let l = self.length();
        let c = (std::f64::consts::PI / l).powi(2) * tau;
        let n1 = (terms + 1) as f64;
        let q = (-2.0 * c * n1).exp();
        if q >= 1.0 {
            return f64::INFINITY;
        }
        (2.0 / l) * (-c * n1 * n1).exp() / (1.0 - q)
    }

    /// Remaining-sum bound for the derivative series after N terms, with
    /// the extra factor k: Σ_{k>N} k e^{−ck²} ≤ e^{−c(N+1)²}[(N+1)/(1−q) +
    /// q/(1−q)²], q = e^{−2c(N+1)}.
    fn spectral_tail_derivative(&self, terms: usize, tau: f64) -> f64 {
        let l = self.length();
        let pi = std::f64::consts::PI;
        let c = (pi / l).powi(2) * tau;
        let n1 = (terms + 1) as f64;
        let q = (-2.0 * c * n1).exp();
        if q >= 1.0 {
            return f64::INFINITY;
        }
        (2.0 / l) * (pi / l) * (-c * n1 * n1).exp() * (n1 / (1.0 - q) + q / ((1.0 - q) * (1.0 - q)))
    }

    /// Tail of the image sum beyond |m| < M (both Gaussian families).
    fn image_tail(&self, images: usize, tau: f64) -> f64 {
        let l = self.length();
        let m = images.max(2) as f64;
        let diff = gaussian_chain_tail(l * (2.0 * m - 1.0), 2.0 * l, tau);
        let sum = gaussian_chain_tail(2.0 * l * (m - 1.0), 2.0 * l, tau);
        2.0 * (diff + sum)
    }

    fn image_tail_derivative(&self, images: usize, tau: f64) -> f64 {
        let l = self.length();
        let m = images.max(1) as f64;
        // Single family with arguments ξ − 2Lm (|ξ| ≤ L), prefactor |ζ|/τ.
        2.0 * gaussian_chain_tail_derivative(l * (2.0 * m - 1.0), 2.0 * l, tau)
    }

    fn green_spectral(&self, x: f64, y: f64, tau: f64, tol: f64, cap: usize) -> KernelValue {
        let l = self.length();
        let pi = std::f64::consts::PI;
        let c = (pi / l).powi(2) * tau;
        let theta_x = pi * (x - self.a) / l;
        let theta_y = pi * (y - self.a) / l;
        let scale = (2.0 / l) * (-c).exp().max(f64::MIN_POSITIVE);
        let target = tol * scale;

        let mut sum = 0.0f64;
        let mut abs_sum = 0.0f64;
        // sin(kθ) by the two-term recurrence; e^{−ck²} by incremental
        // multiplication: E_{k+1} = E_k · R_k, R_{k+1} = R_k · e^{−2c}.
        let (mut sin_px, mut sin_x) = (0.0, theta_x.sin());
        let (mut sin_py, mut sin_y) = (0.0, theta_y.sin());
        let cos2x = 2.0 * theta_x.cos();
        let cos2y = 2.0 * theta_y.cos();
        let mut e = (-c).exp();
        let mut r = (-3.0 * c).exp();
        let r_step = (-2.0 * c).exp();

        let mut tail = f64::INFINITY;
        for k in 1..=cap {
            let term = (2.0 / l) * e * sin_x * sin_y;
            sum += term;
            abs_sum += term.abs();
            tail = self.spectral_tail(k, tau);
            if tail <= target {
                break;
            }
            let next_x = cos2x * sin_x - sin_px;
            sin_px = sin_x;
            sin_x = next_x;
            let next_y = cos2y * sin_y - sin_py;
            sin_py = sin_y;
            sin_y = next_y;
            e *= r;
            r *= r_step;
        }
        KernelValue { value: sum, error: tail + 8.0 * f64::EPSILON * abs_sum }
    }

    fn normal_spectral(
        &self,
        x: f64,
        end: IntervalEnd,
        tau: f64,
        tol: f64,
        cap: usize,
    ) -> KernelValue {
        let l = self.length();
        let pi = std::f64::consts::PI;
        let c = (pi / l).powi(2) * tau;
        let theta_x = pi * (x - self.a) / l;
        let scale = (2.0 / l) * (pi / l) * (-c).exp().max(f64::MIN_POSITIVE);
        let target = tol * scale;

        let mut sum = 0.0f64;
        let mut abs_sum = 0.0f64;
        let (mut sin_px, mut sin_x) = (0.0, theta_x.sin());
        let cos2x = 2.0 * theta_x.cos();
        let mut e = (-c).exp();
        let mut r = (-3.0 * c).exp();
        let r_step = (-2.0 * c).exp();

        let mut tail = f64::INFINITY;
        for k in 1..=cap {
            let sign = match end {
                IntervalEnd::Lower => 1.0,
                // (−1)^{k+1} from cos(kπ) with the inward orientation.
                IntervalEnd::Upper => {
                    if k % 2 == 1 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            let term = (2.0 / l) * (pi / l) * (k as f64) * e * sin_x * sign;
            sum += term;
            abs_sum += term.abs();
            tail = self.spectral_tail_derivative(k, tau);
            if tail <= target {
                break;
            }
            let next = cos2x * sin_x - sin_px;
            sin_px = sin_x;
            sin_x = next;
            e *= r;
            r *= r_step;
        }
        KernelValue { value: sum, error: tail + 8.0 * f64::EPSILON * abs_sum }
    }

    fn green_image(&self, x: f64, y: f64, tau: f64, tol: f64, cap: usize) -> KernelValue {
        let l = self.length();
        let xi = x - self.a;
        let eta = y - self.a;
        let scale = (4.0 * std::f64::consts::PI * tau).powf(-0.5);
        let target = tol * scale;

        let mut sum = 0.0f64;
        let mut abs_sum = 0.0f64;
        let mut tail = f64::INFINITY;
        for m in 0..(cap as i64) {
            let ms: &[i64] = if m == 0 { &[0] } else { &[m, -m] };
            for &mm in ms {
                let shift = 2.0 * l * mm as f64;
                let t1 = gaussian(xi - eta - shift, tau);
                let t2 = gaussian(xi + eta - shift, tau);
                sum += t1 - t2;
                abs_sum += t1 + t2;
            }
            // The |m| ≥ 2 tail bound applies only once shells 0 and ±1
            // are summed (the ±1 shell can sit arbitrarily close).
            if m >= 1 {
                tail = self.image_tail(m as usize + 1, tau);
                if tail <= target {
                    break;
                }
            }
        }
        KernelValue { value: sum, error: tail + 8.0 * f64::EPSILON * abs_sum }
    }

    fn normal_image(&self, x: f64, end: IntervalEnd, tau: f64, tol: f64, cap: usize) -> KernelValue {
        let l = self.length();
        // Reflect so the boundary point sits at ξ = 0: the flux kernel at
        // the lower end is Σ_m (ξ−2Lm)/τ · Φ(ξ−2Lm); the upper end is the
        // mirror image.
        let xi = match end {
            IntervalEnd::Lower => x - self.a,
            IntervalEnd::Upper => self.b - x,
        };
        let scale = (4.0 * std::f64::consts::PI * tau).powf(-0.5) / tau.sqrt().max(f64::MIN_POSITIVE);
        let target = tol * scale;

        let mut sum = 0.0f64;
        let mut abs_sum = 0.0f64;
        let mut tail = f64::INFINITY;
        for m in 0..(cap as i64) {
            let ms: &[i64] = if m == 0 { &[0] } else { &[m, -m] };
            for &mm in ms {
                let arg = xi - 2.0 * l * mm as f64;
                let term = arg / tau * gaussian(arg, tau);
                sum += term;
                abs_sum += term.abs();
            }
            // |ξ − 2Lm| ≥ L(2M−1) holds for |m| ≥ M ≥ 1.
            tail = self.image_tail_derivative(m as usize + 1, tau);
            if tail <= target {
                break;
            }
        }
        KernelValue { value: sum, error: tail + 8.0 * f64::EPSILON * abs_sum }
    }

    /// ∫ G(x,·) dy = (4/π') Σ_{k odd} e^{−ck²} sin(kθ)/k with the odd-mode
    /// coefficients of the constant function 1.
    fn mass_spectral(&self, x: f64, tau: f64, tol: f64, cap: usize) -> KernelValue {
        let l = self.length();
        let pi = std::f64::consts::PI;
        let c = (pi / l).powi(2) * tau;
        let theta = pi * (x - self.a) / l;
        let target = tol;

        let mut sum = 0.0f64;
        let (mut sin_pk, mut sin_k) = (0.0, theta.sin());
        let cos2 = 2.0 * theta.cos();
        let mut e = (-c).exp();
        let mut r = (-3.0 * c).exp();
        let r_step = (-2.0 * c).exp();
        let mut tail = f64::INFINITY;
        for k in 1..=cap {
            if k % 2 == 1 {
                sum += (4.0 / pi) * e * sin_k / k as f64;
            }
            tail = (4.0 / pi) * self.spectral_tail(k, tau) * l / 2.0; // |sin/k| ≤ 1
            if tail <= target {
                break;
            }
            let next = cos2 * sin_k - sin_pk;
            sin_pk = sin_k;
            sin_k = next;
            e *= r;
            r *= r_step;
        }
        KernelValue { value: sum, error: tail + 16.0 * f64::EPSILON }
    }
}

fn gaussian(xi: f64, tau: f64) -> f64 {
    (4.0 * std::f64::consts::PI * tau).powf(-0.5) * (-xi * xi / (4.0 * tau)).exp()
}

/// Σ_{j≥0} Φ(first + j·step, τ) ≤ Φ(first)/(1−ρ) with
/// ρ = exp(−(2·first·step + step²)/(4τ)).
fn gaussian_chain_tail(first: f64, step: f64, tau: f64) -> f64 {
    if first <= 0.0 {
        return f64::INFINITY;
    }
    let rho = (-(2.0 * first * step + step * step) / (4.0 * tau)).exp();
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    gaussian(first, tau) / (1.0 - rho)
}

/// Same chain bound with the flux prefactor |ζ|/τ.
fn gaussian_chain_tail_derivative(first: f64, step: f64, tau: f64) -> f64 {
    if first <= 0.0 {
        return f64::INFINITY;
    }
    let rho = (-(2.0 * first * step + step * step) / (4.0 * tau)).exp();
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    let g0 = first / tau * gaussian(first, tau);
    g0 * (1.0 / (1.0 - rho) + (step / first) * rho / ((1.0 - rho) * (1.0 - rho)))
}

/// The elliptic Green function of −Δ with Dirichlet conditions, and its
/// Martin (normal-derivative) kernel.
#[derive(Debug, Clone)]
pub struct EllipticGreen {
    domain: Domain,
}

impl EllipticGreen {
    pub fn new(domain: Domain) -> Self {
        EllipticGreen { domain }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// G(x,y): for the interval (a,b) the closed form
    /// (min−a)(b−max)/(b−a); for the rectangle the time integral of the
    /// factorized heat kernel (equal term by term to the spectral double
    /// series Σ φ_{jk}(x)φ_{jk}(y)/λ_{jk}).
    pub fn green(&self, x: Point, y: Point) -> Result<f64> {
        match self.domain.dimension() {
            1 => {
                let (a, b) = self.domain.interval_bounds()?;
                let (x, y) = (x.scalar()?, y.scalar()?);
                for v in [x, y] {
                    if !(a..=b).contains(&v) {
                        return Err(Error::Domain(format!("coordinate {v} outside [{a}, {b}]")));
                    }
                }
                let l = b - a;
                Ok((x.min(y) - a) * (b - x.max(y)) / l)
            }
            _ => {
                if !self.domain.contains_closure(x) || !self.domain.contains_closure(y) {
                    return Err(Error::Domain("point outside the closure of Ω".into()));
                }
                if x == y {
                    return Err(Error::Domain(
                        "2D elliptic Green function diverges logarithmically on the diagonal"
                            .into(),
                    ));
                }
                self.rectangle_time_integral(|k, t| k.heat_green(x, t, y, 0.0))
            }
        }
    }

    /// Martin kernel ∂G/∂N_y(x, z) for z ∈ ∂Ω. Interval: (b−x)/(b−a) at
    /// the left end, (x−a)/(b−a) at the right.
    pub fn martin(&self, x: Point, z: &BoundaryPoint) -> Result<f64> {
        match self.domain.dimension() {
            1 => {
                let (a, b) = self.domain.interval_bounds()?;
                let xv = x.scalar()?;
                if !(a..=b).contains(&xv) {
                    return Err(Error::Domain(format!("coordinate {xv} outside [{a}, {b}]")));
                }
                let l = b - a;
                Ok(match z.component {
                    BoundaryComponent::Left => (b - xv) / l,
                    BoundaryComponent::Right => (xv - a) / l,
                    _ => {
                        return Err(Error::Domain(
                            "interval boundary points are left/right only".into(),
                        ))
                    }
                })
            }
            _ => {
                if !self.domain.contains(x) {
                    return Err(Error::Domain("point outside Ω".into()));
                }
                let z = *z;
                self.rectangle_time_integral(move |k, t| k.heat_green_normal(x, t, &z, 0.0))
            }
        }
    }

    /// ∫₀^∞ f(τ) dτ for a factorized heat-kernel integrand decaying like
    /// e^{−Λτ}; the truncated tail is bounded analytically.
    fn rectangle_time_integral<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&KernelEvaluator, f64) -> Result<KernelValue>,
    {
        let ((a, b), (c, d)) = self.domain.rectangle_bounds()?;
        let pi = std::f64::consts::PI;
        let lambda = (pi / (b - a)).powi(2) + (pi / (d - c)).powi(2);
        let eval = KernelEvaluator::new(self.domain);
        // Beyond t_max the integrand is below (2/L1)(2/L2)·e^{−Λτ}.
        let amp = 4.0 / ((b - a) * (d - c));
        let t_max = (amp / (lambda * 1e-14)).ln().max(1.0) / lambda;
        let mut err = None;
        let r = crate::quadrature::integrate_adaptive(
            |t| match f(&eval, t.max(1e-300)) {
                Ok(v) => v.value,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            },
            0.0,
            t_max,
            1e-11,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let r = r?;
        Ok(r.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BoundaryComponent, BoundaryPoint, Domain};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn canonical() -> KernelEvaluator {
        KernelEvaluator::new(Domain::default())
    }

    // Frozen oracle values: spectral series summed to 30 digits, cross
    // checked against the method-of-images sum (they agree to all digits).
    const G_CENTER_TAU1: f64 = 0.234_277_891_227_503_57;
    const DGDN_CENTER_TAU1: f64 = 0.233_963_630_777_326_57;

    #[test]
    fn heat_green_center_value() {
        let k = canonical().with_tolerance(1e-14);
        let v = k.heat_green((PI / 2.0).into(), 1.0, (PI / 2.0).into(), 0.0).unwrap();
        assert_abs_diff_eq!(v.value, G_CENTER_TAU1, epsilon = 1e-14);

        // At the default tolerance the truncation error stays within the
        // certified estimate.
        let v10 = canonical().heat_green((PI / 2.0).into(), 1.0, (PI / 2.0).into(), 0.0).unwrap();
        assert!((v10.value - G_CENTER_TAU1).abs() <= v10.error);
        assert!(v10.error <= 1e-9);
    }

    #[test]
    fn heat_green_vanishes_on_boundary() {
        let k = canonical();
        for x in [0.3, 1.0, 2.5] {
            let v = k.heat_green(x.into(), 0.7, 0.0.into(), 0.0).unwrap();
            assert_eq!(v.value, 0.0);
            let v = k.heat_green(x.into(), 0.7, PI.into(), 0.0).unwrap();
            assert_eq!(v.value, 0.0);
        }
    }

    #[test]
    fn heat_green_symmetry() {
        let k = canonical();
        let a = k.heat_green(0.4.into(), 1.0, 1.3.into(), 0.0).unwrap();
        let b = k.heat_green(1.3.into(), 1.0, 0.4.into(), 0.0).unwrap();
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-14);
    }

    #[test]
    fn heat_green_time_homogeneous() {
        let k = canonical();
        let a = k.heat_green(0.8.into(), 1.25, 2.0.into(), 0.25).unwrap();
        let b = k.heat_green(0.8.into(), 7.0, 2.0.into(), 6.0).unwrap();
        assert_eq!(a.value, b.value, "kernel must depend on t−s only");
    }

    #[test]
    fn heat_green_rejects_bad_times() {
        let k = canonical();
        assert!(k.heat_green(1.0.into(), 0.0, 1.0.into(), 0.0).is_err());
        assert!(k.heat_green(1.0.into(), -0.5, 1.0.into(), 0.0).is_err());
    }

    #[test]
    fn normal_kernel_left_value() {
        let k = canonical().with_tolerance(1e-14);
        let z = BoundaryPoint::new(BoundaryComponent::Left);
        let v = k.heat_green_normal((PI / 2.0).into(), 1.0, &z, 0.0).unwrap();
        assert_abs_diff_eq!(v.value, DGDN_CENTER_TAU1, epsilon = 1e-14);
    }

    #[test]
    fn normal_kernel_right_matches_mirror() {
        let k = canonical();
        let zl = BoundaryPoint::new(BoundaryComponent::Left);
        let zr = BoundaryPoint::new(BoundaryComponent::Right);
        for x in [0.3, 1.1, 2.0] {
            let l = k.heat_green_normal(x.into(), 0.8, &zl, 0.0).unwrap();
            let r = k.heat_green_normal((PI - x).into(), 0.8, &zr, 0.0).unwrap();
            assert_abs_diff_eq!(l.value, r.value, epsilon = 1e-12);
        }
    }

    #[test]
    fn normal_kernel_positive_on_probe_grid() {
        let k = canonical();
        let z = BoundaryPoint::new(BoundaryComponent::Left);
        for i in 1..10 {
            let x = 0.1 + (PI - 0.2) * i as f64 / 10.0;
            for tau in [1e-3, 1e-2, 0.05, 0.2, 1.0] {
                let v = k.heat_green_normal(x.into(), tau, &z, 0.0).unwrap();
                assert!(v.value >= 0.0, "kernel must be nonnegative at x={x}, tau={tau}");
                // Strict positivity wherever the Gaussian scale is above
                // the f64 underflow threshold.
                if x * x / (4.0 * tau) < 600.0 {
                    assert!(v.value > 0.0, "kernel must be positive at x={x}, tau={tau}");
                }
            }
        }
    }

    #[test]
    fn spectral_and_image_agree_on_overlap_band() {
        let k = canonical();
        for tau in [0.02, 0.05, 0.08, 0.15] {
            for (x, y) in [(1.0, 1.0), (0.5, 2.0), (PI / 2.0, 0.9)] {
                let s = k
                    .heat_green_with(KernelRepresentation::Spectral, x.into(), tau, y.into(), 0.0)
                    .unwrap();
                let i = k
                    .heat_green_with(KernelRepresentation::Image, x.into(), tau, y.into(), 0.0)
                    .unwrap();
                let diff = (s.value - i.value).abs();
                assert!(
                    diff <= s.error + i.error + 1e-13,
                    "representations disagree beyond certified tails at tau={tau}: \
                     diff={diff:.3e} vs {:.3e}",
                    s.error + i.error
                );
            }
        }
    }

    #[test]
    fn small_time_kernel_is_near_free_gaussian() {
        let k = canonical();
        let tau = 1e-4;
        let v = k.heat_green(1.5.into(), tau, 1.5.into(), 0.0).unwrap();
        let free = (4.0 * PI * tau).powf(-0.5);
        assert_abs_diff_eq!(v.value, free, epsilon = 1e-8 * free);
    }

    #[test]
    fn shrunken_kernel_monotone_in_epsilon() {
        let k = canonical();
        let g = k.heat_green((PI / 2.0).into(), 1.0, (PI / 2.0).into(), 0.0).unwrap().value;
        let mut last_diff = f64::INFINITY;
        for eps in [0.2, 0.1, 0.05] {
            let ge = k
                .heat_green_shrunken(eps, (PI / 2.0).into(), 1.0, (PI / 2.0).into(), 0.0)
                .unwrap()
                .value;
            assert!(ge <= g + 1e-12, "domain monotonicity violated at eps={eps}");
            let diff = g - ge;
            assert!(diff <= last_diff, "|G_eps − G| must shrink with eps");
            last_diff = diff;
        }
    }

    #[test]
    fn shrunken_kernel_vanishes_on_its_boundary() {
        let k = canonical();
        let v = k.heat_green_shrunken(0.1, 0.1.into(), 1.0, 1.0.into(), 0.0).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn semigroup_identity_by_quadrature() {
        let k = canonical();
        let (x, z) = (1.0f64, 2.1f64);
        let (r, s, t) = (0.0, 0.4, 1.0);
        let direct = k.heat_green(x.into(), t, z.into(), r).unwrap();
        let composed = crate::quadrature::integrate_adaptive(
            |y| {
                k.heat_green(x.into(), t, y.into(), s).unwrap().value
                    * k.heat_green(y.into(), s, z.into(), r).unwrap().value
            },
            0.0,
            PI,
            1e-11,
        )
        .unwrap();
        assert_abs_diff_eq!(composed.value, direct.value, epsilon = 1e-9);
    }

    #[test]
    fn boundary_consistency_difference_quotient() {
        // ∂G/∂N at the left end = lim G(x,t;η,s)/η, Richardson-extrapolated.
        let k = canonical();
        let z = BoundaryPoint::new(BoundaryComponent::Left);
        let exact = k.heat_green_normal(1.3.into(), 0.7, &z, 0.0).unwrap();
        let q = |eta: f64| k.heat_green(1.3.into(), 0.7, eta.into(), 0.0).unwrap().value / eta;
        let (h1, h2) = (1e-4, 5e-5);
        let richardson = 2.0 * q(h2) - q(h1);
        assert_abs_diff_eq!(richardson, exact.value, epsilon = 10.0 * 1e-9);
    }

    #[test]
    fn mass_at_most_one_with_flux_defect() {
        let k = canonical();
        let (x, t, s) = (1.2f64, 0.6f64, 0.1f64);
        let mass = k.heat_mass(x.into(), t, s).unwrap();
        assert!(mass.value <= 1.0 + 1e-12);
        // Defect = accumulated boundary flux over (s,t).
        let zl = BoundaryPoint::new(BoundaryComponent::Left);
        let zr = BoundaryPoint::new(BoundaryComponent::Right);
        let flux = crate::quadrature::integrate_adaptive(
            |tau| {
                k.heat_green_normal(x.into(), tau, &zl, s).unwrap().value
                    + k.heat_green_normal(x.into(), tau, &zr, s).unwrap().value
            },
            s,
            t,
            1e-10,
        )
        .unwrap();
        assert_abs_diff_eq!(mass.value + flux.value, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn tail_bound_examples() {
        let k = canonical();
        // Spectral, 10 terms, τ=1: bound within a small constant of e^{−121}.
        let b = k.tail_bound(KernelRepresentation::Spectral, 10, 1.0).unwrap();
        let e121 = (-121.0f64).exp();
        assert!(b >= e121 * (2.0 / PI), "bound must dominate the first dropped term");
        assert!(b <= e121 * 10.0, "bound should be within a decade of e^{{−121}}");

        // Small τ forces the image representation: the spectral bound is
        // useless there while the image bound is microscopic.
        let spectral_small = k.tail_bound(KernelRepresentation::Spectral, 3, 1e-3).unwrap();
        let image_small = k.tail_bound(KernelRepresentation::Image, 3, 1e-3).unwrap();
        assert!(spectral_small > 1e-10, "spectral representation degenerates as τ→0");
        assert!(image_small < 1e-300);
    }

    #[test]
    fn rectangle_kernel_is_product() {
        let d = Domain::rectangle((0.0, PI), (0.0, PI), 0.3).unwrap();
        let k = KernelEvaluator::new(d);
        let k1 = canonical();
        let v = k
            .heat_green((1.0, 2.0).into(), 0.9, (1.5, 0.7).into(), 0.0)
            .unwrap();
        let g1 = k1.heat_green(1.0.into(), 0.9, 1.5.into(), 0.0).unwrap();
        let g2 = k1.heat_green(2.0.into(), 0.9, 0.7.into(), 0.0).unwrap();
        assert_abs_diff_eq!(v.value, g1.value * g2.value, epsilon = 1e-13);
    }

    #[test]
    fn rectangle_normal_kernel_factorizes() {
        let d = Domain::rectangle((0.0, PI), (0.0, PI), 0.3).unwrap();
        let k = KernelEvaluator::new(d);
        let k1 = canonical();
        let z = BoundaryPoint::on_side(BoundaryComponent::Left, 1.1);
        let v = k.heat_green_normal((0.8, 1.9).into(), 0.5, &z, 0.0).unwrap();
        let p = k1
            .heat_green_normal(0.8.into(), 0.5, &BoundaryPoint::new(BoundaryComponent::Left), 0.0)
            .unwrap();
        let g = k1.heat_green(1.9.into(), 0.5, 1.1.into(), 0.0).unwrap();
        assert_abs_diff_eq!(v.value, p.value * g.value, epsilon = 1e-12);
    }

    #[test]
    fn elliptic_green_interval_closed_form() {
        let e = EllipticGreen::new(Domain::default());
        // min(x,y)(π−max(x,y))/π at (1,2), frozen: 1·(π−2)/π.
        assert_abs_diff_eq!(
            e.green(1.0.into(), 2.0.into()).unwrap(),
            0.363_380_227_632_418_65,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(e.green(0.0.into(), 1.0.into()).unwrap(), 0.0);
        assert_abs_diff_eq!(e.green(PI.into(), 1.0.into()).unwrap(), 0.0);
        // Symmetry.
        assert_abs_diff_eq!(
            e.green(0.7.into(), 2.2.into()).unwrap(),
            e.green(2.2.into(), 0.7.into()).unwrap()
        );
    }

    #[test]
    fn martin_kernel_interval() {
        let e = EllipticGreen::new(Domain::default());
        let left = BoundaryPoint::new(BoundaryComponent::Left);
        let right = BoundaryPoint::new(BoundaryComponent::Right);
        assert_abs_diff_eq!(e.martin((PI / 2.0).into(), &left).unwrap(), 0.5);
        assert_abs_diff_eq!(e.martin(1.0.into(), &right).unwrap(), 1.0 / PI);
    }

    #[test]
    fn elliptic_green_rectangle_solves_poisson() {
        // w(x) = ∫ G(x,y) dy solves −Δw = 1; check by central differences.
        let d = Domain::rectangle((0.0, PI), (0.0, PI), 0.3).unwrap();
        let e = EllipticGreen::new(d);
        let w = |p: (f64, f64)| -> f64 {
            crate::quadrature::integrate_adaptive(
                |y1| {
                    crate::quadrature::integrate_adaptive(
                        |y2| {
                            if (p.0 - y1).abs() < 1e-12 && (p.1 - y2).abs() < 1e-12 {
                                0.0
                            } else {
                                e.green(p.into(), (y1, y2).into()).unwrap()
                            }
                        },
                        0.0,
                        PI,
                        1e-7,
                    )
                    .unwrap()
                    .value
                },
                0.0,
                PI,
                1e-6,
            )
            .unwrap()
            .value
        };
        let h = 0.02;
        let c = (PI / 2.0, PI / 2.0);
        let lap = (w((c.0 + h, c.1)) + w((c.0 - h, c.1)) + w((c.0, c.1 + h)) + w((c.0, c.1 - h))
            - 4.0 * w(c))
            / (h * h);
        assert_abs_diff_eq!(-lap, 1.0, epsilon = 0.02);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(proptest::test_runner::Config::with_cases(64))]

            #[test]
            fn positivity_inside(x in 0.05f64..3.0, y in 0.05f64..3.0, tau in 1e-3f64..2.0) {
                let k = canonical();
                let v = k.heat_green(x.into(), tau, y.into(), 0.0).unwrap();
                prop_assert!(v.value > 0.0, "kernel must be positive inside Ω");
            }

            #[test]
            fn symmetry_random(x in 0.05f64..3.0, y in 0.05f64..3.0, tau in 1e-3f64..2.0) {
                let k = canonical();
                let a = k.heat_green(x.into(), tau, y.into(), 0.0).unwrap().value;
                let b = k.heat_green(y.into(), tau, x.into(), 0.0).unwrap().value;
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }

            #[test]
            fn mass_bounded_by_one(x in 0.05f64..3.0, tau in 1e-3f64..3.0) {
                let k = canonical();
                let m = k.heat_mass(x.into(), tau, 0.0).unwrap();
                prop_assert!(m.value <= 1.0 + 1e-10);
                prop_assert!(m.value >= 0.0);
            }
        }
    }
}
