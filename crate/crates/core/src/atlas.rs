//! Parameter-space algebra for the abcd system in the Hamiltonian generic
//! regime: admissibility of (a, b, c, d), the two-parameter (nu, b) chart,
//! the dispersion-like region, the (alpha, beta) bands with their selection
//! rule, the virial coefficients, and the linear dispersion relation.
//!
//! Everything here is pure arithmetic on immutable values and safe for
//! arbitrary concurrent use.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("parameters fail admissibility: {0}")]
    NotAdmissible(String),
    #[error("normalized parameters must satisfy a < 0 and c < 0, got a={a}, c={c}")]
    NotNegative { a: f64, c: f64 },
    #[error("gamma boundary is singular at a = 3b/8 (b={b}, a={a})")]
    GammaSingular { b: f64, a: f64 },
    #[error(
        "empty (alpha, beta) band intersection for a={a}, c={c}: \
         parameters are not dispersion-like"
    )]
    EmptyBandIntersection { a: f64, c: f64 },
    #[error("solitary profile requires a = c < 0, got a={a}, c={c}")]
    SolitaryRequiresEqual { a: f64, c: f64 },
}

/// The (a, b, c, d) tuple of the original system; d is stored explicitly
/// even though admissibility forces d = b, so validation can catch caller
/// errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParameters {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Parameters of the normalized system after the b = d = 1 stretching:
/// (a, c) = (a_phys/b, c_phys/b). `b_origin` is the pre-stretching b, kept
/// for reporting and for the group-velocity cubic; it is infinite for limit
/// points with a + c = -2 (e.g. the a = c = -1 test point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedParameters {
    pub a: f64,
    pub c: f64,
    pub b_origin: f64,
}

impl NormalizedParameters {
    /// Builds directly from a normalized pair, deriving b_origin from
    /// a + c = -2 + 1/(3b).
    pub fn from_ac(a: f64, c: f64) -> Result<NormalizedParameters, AtlasError> {
        if !(a < 0.0 && c < 0.0) {
            return Err(AtlasError::NotNegative { a, c });
        }
        let b_origin = 1.0 / (3.0 * (a + c + 2.0));
        Ok(NormalizedParameters { a, c, b_origin })
    }
}

/// Point of the two-parameter chart (2.3): nu in [0, 1], b > 1/6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuB {
    pub nu: f64,
    pub b: f64,
}

/// Diagonal band {(alpha, beta) : alpha + lower < beta < alpha + upper},
/// nonempty iff lower < upper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
}

impl Band {
    pub fn is_empty(&self) -> bool {
        !(self.lower < self.upper)
    }

    /// Strict membership of the offset beta - alpha.
    pub fn contains(&self, offset: f64) -> bool {
        self.lower < offset && offset < self.upper
    }

    pub fn intersect(&self, other: &Band) -> Band {
        Band { lower: self.lower.max(other.lower), upper: self.upper.min(other.upper) }
    }
}

/// Virial tuning pair of the modified functional H = I + alpha J + beta K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

/// Coefficients of the canonical-variable quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub d11: f64,
    pub d12: f64,
    pub d21: f64,
    pub d22: f64,
}

impl VirialCoefficients {
    pub fn all_ab_positive(&self) -> bool {
        self.a1 > 0.0
            && self.a2 > 0.0
            && self.a3 > 0.0
            && self.a4 > 0.0
            && self.b1 > 0.0
            && self.b2 > 0.0
            && self.b3 > 0.0
            && self.b4 > 0.0
    }

    /// Smallest of the eight A/B coefficients.
    pub fn min_ab(&self) -> f64 {
        [self.a1, self.a2, self.a3, self.a4, self.b1, self.b2, self.b3, self.b4]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// One named membership test of the validation report. `margin` is the
/// signed distance into the admissible side; `boundary` flags |margin|
/// within the reporting tolerance, so tangency points are representable.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub boundary: bool,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Interval with individually open/closed endpoints; empty when no point
/// satisfies both bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const EMPTY: Interval =
        Interval { lo: f64::INFINITY, hi: f64::NEG_INFINITY, lo_closed: false, hi_closed: false };

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Interval { lo, hi, lo_closed, hi_closed }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

const B1_TOLERANCE: f64 = 1e-12;
// The closed window checks share the sum-rule tolerance: chart corner
// points land on the window edges up to rounding dust, and the chart
// round-trip must accept them.
const WINDOW_TOLERANCE: f64 = 1e-12;

/// Runs the four membership tests B0, B1(b), B2(b), B3(b) plus the facts
/// they hinge on (b = d, b > 0, b > 1/6). Report-style: never errors.
///
/// `tol` widens only the `boundary` flag on each check; membership itself is
/// exact floating comparison (strict for the open conditions, closed for the
/// interval conditions).
pub fn validate_physical_with_tolerance(p: &PhysicalParameters, tol: f64) -> ValidationReport {
    let mut checks = Vec::with_capacity(7);
    let mut push = |name, pass, margin: f64| {
        checks.push(Check { name, pass, boundary: margin.abs() <= tol, margin });
    };

    let bd = -(p.b - p.d).abs();
    push("b_equals_d", p.b == p.d, bd);
    push("b_positive", p.b > 0.0, p.b);
    // B0: a < 0 and c < 0
    let m0 = (-p.a).min(-p.c);
    push("B0_negative_ac", p.a < 0.0 && p.c < 0.0, m0);
    // B1(b): a + c = 1/3 - 2b, within tolerance
    let r1 = p.a + p.c - (1.0 / 3.0 - 2.0 * p.b);
    push("B1_sum_rule", r1.abs() <= B1_TOLERANCE, -r1.abs());
    // B2(b): -b - 1/6 <= a <= -b + 1/3 (closed)
    let m2 = (p.a - (-p.b - 1.0 / 6.0)).min((-p.b + 1.0 / 3.0) - p.a);
    push("B2_a_window", m2 >= -WINDOW_TOLERANCE, m2);
    // B3(b): -b <= c <= -b + 1/2 (closed)
    let m3 = (p.c - (-p.b)).min((-p.b + 0.5) - p.c);
    push("B3_c_window", m3 >= -WINDOW_TOLERANCE, m3);
    // derived: the admissible nu-interval is nonempty iff b > 1/6
    push("b_exceeds_one_sixth", p.b > 1.0 / 6.0, p.b - 1.0 / 6.0);

    ValidationReport { checks }
}

pub fn validate_physical(p: &PhysicalParameters) -> ValidationReport {
    validate_physical_with_tolerance(p, 0.0)
}

/// Two-parameter chart (a, b, c) = (-nu/2 + 1/3 - b, b, nu/2 - b), d = b.
/// The returned tuple satisfies a + c = 1/3 - 2b exactly.
pub fn from_nu_b(q: NuB) -> PhysicalParameters {
    PhysicalParameters {
        a: -q.nu / 2.0 + 1.0 / 3.0 - q.b,
        b: q.b,
        c: q.nu / 2.0 - q.b,
        d: q.b,
    }
}

/// Admissible chart interval [0, 1] ∩ (2/3 - 2b, 2b); empty iff b <= 1/6.
pub fn admissible_nu_interval(b: f64) -> Interval {
    let unit = Interval { lo: 0.0, hi: 1.0, lo_closed: true, hi_closed: true };
    let open = Interval {
        lo: 2.0 / 3.0 - 2.0 * b,
        hi: 2.0 * b,
        lo_closed: false,
        hi_closed: false,
    };
    let i = unit.intersect(&open);
    if i.is_empty() {
        Interval::EMPTY
    } else {
        i
    }
}

/// Radicand 6b^2 - (11/6)b + 1/9 of the dispersive-interval half-width.
pub fn dispersive_radicand(b: f64) -> f64 {
    6.0 * b * b - 11.0 / 6.0 * b + 1.0 / 9.0
}

/// Dispersion-like chart interval I_b, by the case split at b = 1/4, 1/3,
/// 1/2; empty for b <= 2/9.
pub fn dispersive_nu_interval(b: f64) -> Interval {
    if b <= 2.0 / 9.0 {
        // the hyperbola window (1/3 - r, 1/3 + r) degenerates at b = 2/9 and
        // has no admissible overlap below it
        return Interval::EMPTY;
    }
    if b <= 0.25 {
        let rad = dispersive_radicand(b);
        if rad <= 0.0 {
            return Interval::EMPTY;
        }
        let r = rad.sqrt();
        return Interval {
            lo: 1.0 / 3.0 - r,
            hi: 1.0 / 3.0 + r,
            lo_closed: false,
            hi_closed: false,
        };
    }
    if b <= 1.0 / 3.0 {
        return Interval {
            lo: 2.0 / 3.0 - 2.0 * b,
            hi: 2.0 * b,
            lo_closed: false,
            hi_closed: false,
        };
    }
    if b <= 0.5 {
        return Interval { lo: 0.0, hi: 2.0 * b.min(0.5), lo_closed: true, hi_closed: false };
    }
    Interval { lo: 0.0, hi: 1.0, lo_closed: true, hi_closed: true }
}

/// The same interval assembled from its definition: admissible chart window
/// intersected with the hyperbola window. Kept as an independent route for
/// cross-checking the case split.
pub fn dispersive_nu_interval_by_intersection(b: f64) -> Interval {
    let adm = admissible_nu_interval(b);
    if adm.is_empty() {
        return Interval::EMPTY;
    }
    let rad = dispersive_radicand(b);
    if rad <= 0.0 {
        return Interval::EMPTY;
    }
    let r = rad.sqrt();
    let hyp = Interval {
        lo: 1.0 / 3.0 - r,
        hi: 1.0 / 3.0 + r,
        lo_closed: false,
        hi_closed: false,
    };
    let i = adm.intersect(&hyp);
    if i.is_empty() {
        Interval::EMPTY
    } else {
        i
    }
}

/// b = d = 1 stretching: (a', c') = (a/b, c/b). Rejects inadmissible input.
pub fn normalize(p: &PhysicalParameters) -> Result<NormalizedParameters, AtlasError> {
    let report = validate_physical(p);
    if !report.is_admissible() {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name)
            .collect();
        return Err(AtlasError::NotAdmissible(failed.join(", ")));
    }
    Ok(NormalizedParameters { a: p.a / p.b, c: p.c / p.b, b_origin: p.b })
}

/// Signed margin of the dispersion-like condition: 8ac - 3(a+c) - 2,
/// positive strictly inside the region.
pub fn dispersion_like_margin(n: &NormalizedParameters) -> f64 {
    8.0 * n.a * n.c - 3.0 * (n.a + n.c) - 2.0
}

/// Strict test 3(a+c) + 2 < 8ac.
pub fn is_dispersion_like(n: &NormalizedParameters) -> bool {
    dispersion_like_margin(n) > 0.0
}

/// The c-value on the curve gamma(b) bounding the dispersion-like set in
/// physical variables: c = -b (2b + 3a) / (3b - 8a). The output zeroes
/// 3b(a+c) + 2b^2 - 8ac.
pub fn gamma_boundary(b: f64, a: f64) -> Result<f64, AtlasError> {
    let denom = 3.0 * b - 8.0 * a;
    if denom == 0.0 {
        return Err(AtlasError::GammaSingular { b, a });
    }
    Ok(-b * (2.0 * b + 3.0 * a) / denom)
}

/// Discriminant-scaled test for the joint system {a + c = 1/3 - 2b,
/// c = gamma(b, a)}: real roots exist iff 3456 b^2 - 1056 b + 64 > 0.
pub fn gamma_chord_discriminant(b: f64) -> f64 {
    3456.0 * b * b - 1056.0 * b + 64.0
}

/// The a-roots of the joint system, when real: solutions of
/// 8a^2 + (16b - 8/3) a + b(1 - 4b) = 0, returned in increasing order.
pub fn gamma_chord_roots(b: f64) -> Option<(f64, f64)> {
    let disc = gamma_chord_discriminant(b);
    if disc < 0.0 {
        return None;
    }
    let p = 16.0 * b - 8.0 / 3.0;
    // p^2 - 32 b(1 - 4b) = disc / 9
    let s = (disc / 9.0).sqrt();
    Some(((-p - s) / 16.0, (-p + s) / 16.0))
}

/// Offset bands for positivity of (A2, B2), (A3, B3), (A4, B4):
/// A2 = (3a/2, -3c/2), A3 = ((1+4a)/(2(1-a)), -(1+4c)/(2(1-c))),
/// A4 = (-1/2, 1/2). A3 is nonempty iff the parameters are dispersion-like.
pub fn alpha_beta_bands(n: &NormalizedParameters) -> (Band, Band, Band) {
    let a2 = Band { lower: 1.5 * n.a, upper: -1.5 * n.c };
    let a3 = Band {
        lower: (1.0 + 4.0 * n.a) / (2.0 * (1.0 - n.a)),
        upper: -(1.0 + 4.0 * n.c) / (2.0 * (1.0 - n.c)),
    };
    let a4 = Band { lower: -0.5, upper: 0.5 };
    (a2, a3, a4)
}

/// Fixes alpha = 0 and picks the midpoint of the intersected offset
/// interval, maximizing the margin symmetrically. Errors when the triple
/// intersection is empty (equivalently, when A3 is empty).
pub fn select_alpha_beta(n: &NormalizedParameters) -> Result<AlphaBeta, AtlasError> {
    let (a2, a3, a4) = alpha_beta_bands(n);
    let i = a2.intersect(&a3).intersect(&a4);
    if i.is_empty() {
        return Err(AtlasError::EmptyBandIntersection { a: n.a, c: n.c });
    }
    Ok(AlphaBeta { alpha: 0.0, beta: 0.5 * (i.lower + i.upper) })
}

/// Exact coefficient formulas of the canonical quadratic form.
pub fn virial_coefficients(n: &NormalizedParameters, ab: &AlphaBeta) -> VirialCoefficients {
    let (a, c) = (n.a, n.c);
    let d = ab.beta - ab.alpha; // band offset
    VirialCoefficients {
        a1: 0.5,
        b1: 0.5,
        a2: d - 1.5 * a,
        b2: -d - 1.5 * c,
        a3: (1.0 - a) * d - 2.0 * a - 0.5,
        b3: (1.0 - c) * (-d) - 2.0 * c - 0.5,
        a4: a * (-d - 0.5),
        b4: c * (d - 0.5),
        d11: -0.5 * (1.0 + a) * (d - 1.0) - 0.5,
        d12: -a * (-d - 0.5),
        d21: -0.5 * (1.0 + c) * (-d - 1.0) - 0.5,
        d22: -c * (d - 0.5),
    }
}

/// Dispersion relation of the normalized linearization,
/// w(k) = |k| (1 - a k^2)^{1/2} (1 - c k^2)^{1/2} / (1 + k^2) (plus branch).
pub fn dispersion_omega(k: f64, n: &NormalizedParameters) -> f64 {
    let k2 = k * k;
    k.abs() * ((1.0 - n.a * k2) * (1.0 - n.c * k2)).sqrt() / (1.0 + k2)
}

/// Group velocity magnitude
/// |w'(k)| = |ac k^6 + 3ac k^4 - (1 + 2a + 2c) k^2 + 1|
///           / ((1 + k^2)^2 (1 - a k^2)^{1/2} (1 - c k^2)^{1/2}).
pub fn group_velocity(k: f64, n: &NormalizedParameters) -> f64 {
    let (a, c) = (n.a, n.c);
    let k2 = k * k;
    let ac = a * c;
    let numer = (ac * k2 * k2 * k2 + 3.0 * ac * k2 * k2 - (1.0 + 2.0 * a + 2.0 * c) * k2 + 1.0)
        .abs();
    let denom = (1.0 + k2).powi(2) * ((1.0 - a * k2) * (1.0 - c * k2)).sqrt();
    numer / denom
}

/// Analytic report on the cubic p(mu) = ac mu^3 + 3 ac mu^2 + q mu + 1
/// whose positivity on mu >= 0 is equivalent to a nowhere-vanishing group
/// velocity. The linear coefficient is q = 3 - 2/(3b), which under the
/// chart relation a + c = -2 + 1/(3b) equals -(1 + 2a + 2c).
#[derive(Debug, Clone, Copy)]
pub struct GroupVelocityCubic {
    pub linear_coeff: f64,
    /// Radicand of the critical points mu_pm = -1 ± sqrt(rad).
    pub radicand: f64,
    /// The larger critical point, when real.
    pub mu_plus: Option<f64>,
    /// p at the relevant local minimum, when it sits in mu > 0.
    pub p_at_min: Option<f64>,
    pub everywhere_positive: bool,
}

pub fn group_velocity_cubic(b: f64, n: &NormalizedParameters) -> GroupVelocityCubic {
    let ac = n.a * n.c;
    let q = if b.is_finite() { 3.0 - 2.0 / (3.0 * b) } else { 3.0 };
    let eval = |mu: f64| ac * mu * mu * mu + 3.0 * ac * mu * mu + q * mu + 1.0;
    // p'(mu) = 3ac mu^2 + 6ac mu + q, roots mu_pm = -1 ± sqrt(1 - q/(3ac))
    let radicand = 1.0 - q / (3.0 * ac);
    if radicand < 0.0 {
        // no real critical points: p is increasing, p >= p(0) = 1
        return GroupVelocityCubic {
            linear_coeff: q,
            radicand,
            mu_plus: None,
            p_at_min: None,
            everywhere_positive: true,
        };
    }
    let mu_plus = -1.0 + radicand.sqrt();
    if mu_plus <= 0.0 {
        // p increasing on mu >= 0
        return GroupVelocityCubic {
            linear_coeff: q,
            radicand,
            mu_plus: Some(mu_plus),
            p_at_min: None,
            everywhere_positive: true,
        };
    }
    let p_min = eval(mu_plus);
    GroupVelocityCubic {
        linear_coeff: q,
        radicand,
        mu_plus: Some(mu_plus),
        p_at_min: Some(p_min),
        everywhere_positive: p_min > 0.0,
    }
}

/// Decides p(mu) > 0 for all mu >= 0 analytically via the critical points;
/// true for every admissible pair once b >= 2/9.
pub fn group_velocity_everywhere_positive(b: f64, n: &NormalizedParameters) -> bool {
    group_velocity_cubic(b, n).everywhere_positive
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nb(nu: f64, b: f64) -> NuB {
        NuB { nu, b }
    }

    #[test]
    fn figure_point_minus_one_eighteenth_is_admissible() {
        let p = PhysicalParameters { a: -1.0 / 18.0, b: 2.0 / 9.0, c: -1.0 / 18.0, d: 2.0 / 9.0 };
        let report = validate_physical(&p);
        assert!(report.is_admissible(), "{report:?}");
        // a + c = 1/3 - 2b: both sides -1/9
        assert!(report.check("B1_sum_rule").unwrap().pass);
    }

    #[test]
    fn zero_ac_point_fails_on_b0() {
        let p = PhysicalParameters { a: 0.0, b: 1.0 / 6.0, c: 0.0, d: 1.0 / 6.0 };
        let report = validate_physical(&p);
        assert!(!report.is_admissible());
        assert!(!report.check("B0_negative_ac").unwrap().pass);
        // the sum rule itself holds at this degenerate corner
        assert!(report.check("B1_sum_rule").unwrap().pass);
        assert!(!report.check("b_exceeds_one_sixth").unwrap().pass);
    }

    #[test]
    fn b_one_sixth_with_negative_ac_fails() {
        // at b = 1/6 the sum rule forces a + c = 0, impossible with both
        // negative; any negative pair therefore fails B1, and the derived
        // nu-interval check fails regardless
        let p = PhysicalParameters { a: -0.05, b: 1.0 / 6.0, c: 0.05 - 1e-3, d: 1.0 / 6.0 };
        let report = validate_physical(&p);
        assert!(!report.is_admissible());
        assert!(!report.check("b_exceeds_one_sixth").unwrap().pass);
    }

    #[test]
    fn chart_hits_the_figure_captions() {
        let p = from_nu_b(nb(1.0 / 3.0, 1.0 / 6.0));
        assert!(p.a.abs() < 1e-16 && p.c.abs() < 1e-16);

        let p = from_nu_b(nb(1.0 / 3.0, 2.0 / 9.0));
        assert!((p.a + 1.0 / 18.0).abs() < 1e-16);
        assert!((p.c + 1.0 / 18.0).abs() < 1e-16);

        let p = from_nu_b(nb(2.0 / 3.0, 0.5));
        assert!((p.a + 0.5).abs() < 1e-15);
        assert!((p.c + 1.0 / 6.0).abs() < 1e-15);
        assert!((p.a + p.c - (1.0 / 3.0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn admissible_interval_cases() {
        assert!(admissible_nu_interval(1.0 / 6.0).is_empty());
        let i = admissible_nu_interval(0.5);
        assert_eq!((i.lo, i.hi), (0.0, 1.0));
        assert!(i.lo_closed && !i.hi_closed); // [0, 1)
        let i = admissible_nu_interval(0.25);
        assert!((i.lo - 1.0 / 6.0).abs() < 1e-15 && (i.hi - 0.5).abs() < 1e-15);
        assert!(!i.lo_closed && !i.hi_closed);
    }

    #[test]
    fn dispersive_interval_cases() {
        assert!(dispersive_nu_interval(2.0 / 9.0).is_empty());
        assert!(dispersive_nu_interval(0.2).is_empty());

        // b = 1/4: radicand 1/36, interval (1/6, 1/2), continuous with the
        // next case
        let i = dispersive_nu_interval(0.25);
        assert!((dispersive_radicand(0.25) - 1.0 / 36.0).abs() < 1e-15);
        assert!((i.lo - 1.0 / 6.0).abs() < 1e-12 && (i.hi - 0.5).abs() < 1e-12);

        let i = dispersive_nu_interval(0.75);
        assert_eq!((i.lo, i.hi), (0.0, 1.0));
        assert!(i.lo_closed && i.hi_closed);
    }

    #[test]
    fn dispersive_case_split_matches_intersection_route() {
        for j in 0..2000 {
            let b = 0.17 + j as f64 * (1.2 - 0.17) / 1999.0;
            let piecewise = dispersive_nu_interval(b);
            let intersected = dispersive_nu_interval_by_intersection(b);
            assert_eq!(
                piecewise.is_empty(),
                intersected.is_empty(),
                "emptiness mismatch at b={b}"
            );
            if !piecewise.is_empty() {
                assert!(
                    (piecewise.lo - intersected.lo).abs() < 1e-12
                        && (piecewise.hi - intersected.hi).abs() < 1e-12,
                    "b={b}: {piecewise:?} vs {intersected:?}"
                );
            }
        }
    }

    #[test]
    fn normalize_divides_by_b() {
        let p = PhysicalParameters { a: -1.0 / 18.0, b: 2.0 / 9.0, c: -1.0 / 18.0, d: 2.0 / 9.0 };
        let n = normalize(&p).unwrap();
        assert!((n.a + 0.25).abs() < 1e-15);
        assert!((n.c + 0.25).abs() < 1e-15);
        assert_eq!(n.b_origin, 2.0 / 9.0);

        let p = PhysicalParameters { a: -0.5, b: 0.5, c: -1.0 / 6.0, d: 0.5 };
        let n = normalize(&p).unwrap();
        assert!((n.a + 1.0).abs() < 1e-15);
        assert!((n.c + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_rejects_invalid_input() {
        let p = PhysicalParameters { a: 0.1, b: 0.5, c: -0.2, d: 0.5 };
        assert!(matches!(normalize(&p), Err(AtlasError::NotAdmissible(_))));
    }

    #[test]
    fn normalized_c_stays_above_minus_one_on_chart() {
        for i in 0..200 {
            let b = 1.0 / 6.0 + (i + 1) as f64 * (1.0 - 1.0 / 6.0) / 200.0;
            let interval = admissible_nu_interval(b);
            for j in 0..200 {
                let nu = j as f64 / 199.0;
                if interval.contains(nu) {
                    let n = normalize(&from_nu_b(nb(nu, b))).unwrap();
                    assert!(n.c >= -1.0 - 1e-15, "c'={} at nu={nu}, b={b}", n.c);
                }
            }
        }
    }

    #[test]
    fn dispersion_like_examples() {
        // boundary point: both sides of the inequality equal 1/2 exactly
        let n = NormalizedParameters { a: -0.25, c: -0.25, b_origin: 2.0 / 9.0 };
        assert_eq!(3.0 * (n.a + n.c) + 2.0, 0.5);
        assert_eq!(8.0 * n.a * n.c, 0.5);
        assert!(!is_dispersion_like(&n));
        assert_eq!(dispersion_like_margin(&n), 0.0);

        let n = NormalizedParameters::from_ac(-1.0, -1.0).unwrap();
        assert!(is_dispersion_like(&n));
        assert!(n.b_origin.is_infinite());

        let n = NormalizedParameters::from_ac(-0.01, -0.01).unwrap();
        assert!(!is_dispersion_like(&n));
    }

    #[test]
    fn gamma_boundary_values() {
        for b in [0.25, 0.3, 0.5] {
            let c = gamma_boundary(b, 0.0).unwrap();
            assert!((c + 2.0 * b / 3.0).abs() < 1e-15);
        }
        // tangency at b = 2/9: double root a = c = -1/18
        let (a1, a2) = gamma_chord_roots(2.0 / 9.0).unwrap();
        assert!((a1 + 1.0 / 18.0).abs() < 1e-9, "{a1}");
        assert!((a2 + 1.0 / 18.0).abs() < 1e-9, "{a2}");
        let c = gamma_boundary(2.0 / 9.0, -1.0 / 18.0).unwrap();
        assert!((c + 1.0 / 18.0).abs() < 1e-15);

        assert!(gamma_chord_discriminant(2.0 / 9.0).abs() < 1e-10);
        assert!(gamma_chord_discriminant(0.3) > 0.0);
        assert!(gamma_chord_roots(0.15).is_none());
        assert!(gamma_chord_discriminant(0.15) < 0.0);
    }

    #[test]
    fn gamma_boundary_zeroes_the_region_form() {
        for i in 0..50 {
            let b = 0.23 + i as f64 * 0.015;
            for j in 0..50 {
                let a = -1e-3 - j as f64 * 0.02;
                let c = gamma_boundary(b, a).unwrap();
                let residual = 3.0 * b * (a + c) + 2.0 * b * b - 8.0 * a * c;
                assert!(residual.abs() < 1e-12, "b={b}, a={a}: {residual}");
            }
        }
    }

    #[test]
    fn gamma_boundary_singular_input() {
        let b = 0.4;
        let a = 3.0 * b / 8.0;
        assert!(matches!(
            gamma_boundary(b, a),
            Err(AtlasError::GammaSingular { .. })
        ));
    }

    #[test]
    fn bands_for_symmetric_minus_one() {
        let n = NormalizedParameters::from_ac(-1.0, -1.0).unwrap();
        let (a2, a3, a4) = alpha_beta_bands(&n);
        assert_eq!((a2.lower, a2.upper), (-1.5, 1.5));
        assert_eq!((a3.lower, a3.upper), (-0.75, 0.75));
        assert_eq!((a4.lower, a4.upper), (-0.5, 0.5));
        let i = a2.intersect(&a3).intersect(&a4);
        assert_eq!((i.lower, i.upper), (-0.5, 0.5));
        // (0, 0) always lies in A2 and A4
        assert!(a2.contains(0.0) && a4.contains(0.0));
    }

    #[test]
    fn a3_band_empty_at_boundary_point() {
        let n = NormalizedParameters { a: -0.25, c: -0.25, b_origin: f64::NAN };
        let (_, a3, _) = alpha_beta_bands(&n);
        assert_eq!((a3.lower, a3.upper), (0.0, 0.0));
        assert!(a3.is_empty());
        assert!(matches!(
            select_alpha_beta(&n),
            Err(AtlasError::EmptyBandIntersection { .. })
        ));
    }

    #[test]
    fn selection_is_strictly_inside_all_bands() {
        let n = NormalizedParameters::from_ac(-1.0, -1.0).unwrap();
        let ab = select_alpha_beta(&n).unwrap();
        assert_eq!((ab.alpha, ab.beta), (0.0, 0.0));
        let (a2, a3, a4) = alpha_beta_bands(&n);
        let off = ab.beta - ab.alpha;
        assert!(a2.contains(off) && a3.contains(off) && a4.contains(off));
    }

    #[test]
    fn coefficients_at_symmetric_minus_one() {
        let n = NormalizedParameters::from_ac(-1.0, -1.0).unwrap();
        let ab = AlphaBeta { alpha: 0.0, beta: 0.0 };
        let v = virial_coefficients(&n, &ab);
        assert_eq!((v.a1, v.a2, v.a3, v.a4), (0.5, 1.5, 1.5, 0.5));
        assert_eq!((v.b1, v.b2, v.b3, v.b4), (0.5, 1.5, 1.5, 0.5));
        assert_eq!((v.d11, v.d12, v.d21, v.d22), (-0.5, -0.5, -0.5, -0.5));
        assert!(v.all_ab_positive());
    }

    #[test]
    fn a1_b1_are_always_one_half() {
        for (a, c, al, be) in [(-0.3, -0.9, 0.1, -0.2), (-2.0, -0.1, 0.0, 0.4)] {
            let n = NormalizedParameters { a, c, b_origin: 1.0 };
            let v = virial_coefficients(&n, &AlphaBeta { alpha: al, beta: be });
            assert_eq!(v.a1, 0.5);
            assert_eq!(v.b1, 0.5);
        }
    }

    #[test]
    fn selected_pair_makes_all_coefficients_positive() {
        for (a, c) in [(-1.0, -1.0), (-2.0 / 3.0, -2.0 / 3.0), (-1.2, -0.4), (-0.9, -0.5)] {
            let n = NormalizedParameters::from_ac(a, c).unwrap();
            assert!(is_dispersion_like(&n), "({a}, {c})");
            let ab = select_alpha_beta(&n).unwrap();
            let v = virial_coefficients(&n, &ab);
            assert!(v.all_ab_positive(), "({a}, {c}): {v:?}");
        }
    }

    #[test]
    fn dispersion_relation_endpoints() {
        let n = NormalizedParameters::from_ac(-0.5, -0.25).unwrap();
        assert_eq!(dispersion_omega(0.0, &n), 0.0);
        assert_eq!(group_velocity(0.0, &n), 1.0);
        // omega/k tends to sqrt(ac)
        let slope = dispersion_omega(1e4, &n) / 1e4;
        assert!((slope - (n.a * n.c).sqrt()).abs() < 1e-6, "{slope}");
    }

    #[test]
    fn cubic_report_at_two_ninths_says_no_positive_critical_point() {
        let p = from_nu_b(nb(1.0 / 3.0, 2.0 / 9.0));
        let n = normalize(&p).unwrap();
        let rep = group_velocity_cubic(2.0 / 9.0, &n);
        assert!(rep.everywhere_positive);
        assert!(rep.linear_coeff.abs() < 1e-12); // 3 - 2/(3b) = 0 at b = 2/9
        match rep.mu_plus {
            None => {}
            Some(mu) => assert!(mu <= 0.0, "unexpected positive critical point {mu}"),
        }
    }

    #[test]
    fn cubic_decision_agrees_with_brute_force_minimum() {
        // dense mu-scan oracle over [0, 1000]
        let scan_min = |q: f64, ac: f64| -> f64 {
            let mut min = f64::INFINITY;
            for i in 0..1_000_000u64 {
                let mu = i as f64 * 1e-3;
                let p = ac * mu * mu * mu + 3.0 * ac * mu * mu + q * mu + 1.0;
                min = min.min(p);
            }
            min
        };
        for (b, nu) in [(2.0 / 9.0 + 1e-6, 0.33), (0.25, 0.3), (0.5, 0.6), (0.19, 0.32)] {
            let p = from_nu_b(nb(nu, b));
            if !validate_physical(&p).is_admissible() {
                continue;
            }
            let n = normalize(&p).unwrap();
            let rep = group_velocity_cubic(b, &n);
            let brute = scan_min(rep.linear_coeff, n.a * n.c);
            assert_eq!(
                rep.everywhere_positive,
                brute > 0.0,
                "b={b}, nu={nu}: analytic {rep:?} vs brute {brute}"
            );
        }
        // a hand-picked stable point: b = 1/2, a = c = -1 (limit chart)
        let n = NormalizedParameters { a: -1.0, c: -1.0, b_origin: 0.5 };
        let rep = group_velocity_cubic(0.5, &n);
        assert!(rep.everywhere_positive);
    }
}
