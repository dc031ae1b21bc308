//! Observables of a run: conserved quantities, the virial functionals
//! I, J, K and the modified virial H = I + alpha J + beta K with the exact
//! decomposition dH/dt = Q + SQ + NQ, the canonical-variable form of Q,
//! the localized energy with its variation, and local H1 norms.
//!
//! Every decomposition is evaluated term by term, one quadrature per printed
//! term, so a failing identity is attributable to a specific term. All
//! functions are pure in the state snapshot.

use crate::atlas::{AlphaBeta, NormalizedParameters, VirialCoefficients};
use crate::sim::FieldPair;
use crate::spectral::{
    weight_family, weight_family_unit, weighted_integral, Field, Grid, SpectralOps, WeightFamily,
    WeightKind,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("weight family mismatch: expected {expected:?}, got {got:?}")]
    WrongWeightKind { expected: WeightKind, got: WeightKind },
    #[error("lambda(t) is defined for t >= 2, got t={t}")]
    TimeBeforeWindow { t: f64 },
}

/// Spatial weight regime of a run: a fixed scale lambda, or the growing
/// window lambda(t) = C0 t / log^2 t with unit-scaled weight shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    Fixed { lambda: f64 },
    Growing { c0: f64 },
}

/// One time snapshot of every observable, in CSV column order.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e: f64,
    pub p: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
    pub h: f64,
    pub q: f64,
    pub sq: f64,
    pub nq: f64,
    pub q_canonical: f64,
    pub e_loc: f64,
    pub deloc_rhs: f64,
    pub local_h1: f64,
    pub lambda_t: f64,
    pub boundary_flag: f64,
}

pub const CSV_HEADER: &str =
    "t,E,P,I,J,K,H,Q,SQ,NQ,Q_canonical,E_loc,dEloc_rhs,localH1,lambda_t,boundary_flag";

fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

impl DiagnosticsRecord {
    /// One CSV row, 17 significant digits per column.
    pub fn csv_row(&self) -> String {
        [
            self.t,
            self.e,
            self.p,
            self.i,
            self.j,
            self.k,
            self.h,
            self.q,
            self.sq,
            self.nq,
            self.q_canonical,
            self.e_loc,
            self.deloc_rhs,
            self.local_h1,
            self.lambda_t,
            self.boundary_flag,
        ]
        .map(g17)
        .join(",")
    }
}

fn wint(grid: &Grid, w: &Field, fs: &[&Field]) -> f64 {
    weighted_integral(grid, w, fs).expect("diagnostics fields share the run grid")
}

/// Conserved energy of the normalized flow:
/// E = 1/2 int (-a u_x^2 - c eta_x^2 + u^2 + eta^2 + u^2 eta).
pub fn energy(grid: &Grid, ops: &SpectralOps, s: &FieldPair, n: &NormalizedParameters) -> f64 {
    let ux = ops.derivative(&s.u, 1);
    let ex = ops.derivative(&s.eta, 1);
    let one = Field::from_fn(grid, |_| 1.0);
    0.5 * (-n.a * wint(grid, &one, &[&ux, &ux]) - n.c * wint(grid, &one, &[&ex, &ex])
        + wint(grid, &one, &[&s.u, &s.u])
        + wint(grid, &one, &[&s.eta, &s.eta])
        + wint(grid, &one, &[&s.u, &s.u, &s.eta]))
}

/// Conserved momentum P = int (u eta + u_x eta_x).
pub fn momentum(grid: &Grid, ops: &SpectralOps, s: &FieldPair) -> f64 {
    let ux = ops.derivative(&s.u, 1);
    let ex = ops.derivative(&s.eta, 1);
    let one = Field::from_fn(grid, |_| 1.0);
    wint(grid, &one, &[&s.u, &s.eta]) + wint(grid, &one, &[&ux, &ex])
}

#[derive(Debug, Clone, Copy)]
pub struct Virials {
    pub i: f64,
    pub j: f64,
    pub k: f64,
    pub h: f64,
}

fn expect_kind(w: &WeightFamily, expected: WeightKind) -> Result<(), DiagnosticsError> {
    if w.kind != expected {
        return Err(DiagnosticsError::WrongWeightKind { expected, got: w.kind });
    }
    Ok(())
}

/// I = int phi (u eta + u_x eta_x), J = int phi' eta u_x,
/// K = int phi' eta_x u, H = I + alpha J + beta K. Tanh-family weight.
pub fn virials(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    w: &WeightFamily,
    ab: &AlphaBeta,
) -> Result<Virials, DiagnosticsError> {
    expect_kind(w, WeightKind::Tanh)?;
    let ux = ops.derivative(&s.u, 1);
    let ex = ops.derivative(&s.eta, 1);
    let i = wint(grid, &w.w, &[&s.u, &s.eta]) + wint(grid, &w.w, &[&ux, &ex]);
    let j = wint(grid, &w.w1, &[&s.eta, &ux]);
    let k = wint(grid, &w.w1, &[&ex, &s.u]);
    Ok(Virials { i, j, k, h: i + ab.alpha * j + ab.beta * k })
}

/// The three pieces of dH/dt: the quadratic form Q, the lower-order
/// quadratic remainder SQ, and the cubic-or-higher remainder NQ.
#[derive(Debug, Clone, Copy)]
pub struct DhDecomposition {
    pub q: f64,
    pub sq: f64,
    pub nq: f64,
}

impl DhDecomposition {
    pub fn total(&self) -> f64 {
        self.q + self.sq + self.nq
    }
}

/// Term-by-term evaluation of the decomposition, six Q terms, four SQ
/// terms, five NQ terms, with the nonlocal factors through the Helmholtz
/// inverse.
pub fn dh_decomposition(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    w: &WeightFamily,
    n: &NormalizedParameters,
    ab: &AlphaBeta,
) -> Result<DhDecomposition, DiagnosticsError> {
    expect_kind(w, WeightKind::Tanh)?;
    let (a, c) = (n.a, n.c);
    let (al, be) = (ab.alpha, ab.beta);
    let u = &s.u;
    let eta = &s.eta;
    let ux = ops.derivative(u, 1);
    let ex = ops.derivative(eta, 1);
    let f = ops.helmholtz_inverse(u);
    let g = ops.helmholtz_inverse(eta);
    let fx = ops.derivative(&f, 1);
    let gx = ops.derivative(&g, 1);

    let q = ((1.0 + c) * (al - be - 1.0) + 0.5) * wint(grid, &w.w1, &[eta, eta])
        + c * (be - al - 0.5) * wint(grid, &w.w1, &[&ex, &ex])
        + ((1.0 + a) * (be - al - 1.0) + 0.5) * wint(grid, &w.w1, &[u, u])
        + a * (al - be - 0.5) * wint(grid, &w.w1, &[&ux, &ux])
        + (1.0 + c) * (be - al + 1.0) * wint(grid, &w.w1, &[eta, &g])
        + (1.0 + a) * (al - be + 1.0) * wint(grid, &w.w1, &[u, &f]);

    let sq = be * (1.0 + c) * wint(grid, &w.w2, &[eta, &gx])
        + al * (1.0 + a) * wint(grid, &w.w2, &[u, &fx])
        + 0.5 * al * c * wint(grid, &w.w3, &[eta, eta])
        + 0.5 * be * a * wint(grid, &w.w3, &[u, u]);

    let u_eta = u.mul(eta);
    let u2 = u.mul(u);
    let h_u_eta = ops.helmholtz_inverse(&u_eta);
    let h_u2 = ops.helmholtz_inverse(&u2);
    let h_u_eta_x = ops.derivative(&h_u_eta, 1);
    let h_u2_x = ops.derivative(&h_u2, 1);

    let nq = 0.5 * (be - al - 1.0) * wint(grid, &w.w1, &[u, u, eta])
        + 0.5 * (be - al + 1.0) * wint(grid, &w.w1, &[eta, &h_u2])
        + (al - be + 1.0) * wint(grid, &w.w1, &[u, &h_u_eta])
        + 0.5 * be * wint(grid, &w.w2, &[eta, &h_u2_x])
        + al * wint(grid, &w.w2, &[u, &h_u_eta_x]);

    Ok(DhDecomposition { q, sq, nq })
}

/// The canonical-variable form of Q:
/// int phi' (A1 f^2 + A2 f_x^2 + A3 f_xx^2 + A4 f_xxx^2)
/// + the same in g with B, + int phi''' (D11 f^2 + D12 f_x^2 + D21 g^2
/// + D22 g_x^2), with f = (1-dxx)^-1 u, g = (1-dxx)^-1 eta.
///
/// Takes the coefficient tuple explicitly so cross-checks can probe it.
pub fn quadratic_q_canonical(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    w: &WeightFamily,
    v: &VirialCoefficients,
) -> Result<f64, DiagnosticsError> {
    expect_kind(w, WeightKind::Tanh)?;
    let f = ops.helmholtz_inverse(&s.u);
    let g = ops.helmholtz_inverse(&s.eta);
    let fx = ops.derivative(&f, 1);
    let gx = ops.derivative(&g, 1);
    let fxx = ops.derivative(&f, 2);
    let gxx = ops.derivative(&g, 2);
    let fxxx = ops.derivative(&f, 3);
    let gxxx = ops.derivative(&g, 3);
    Ok(v.a1 * wint(grid, &w.w1, &[&f, &f])
        + v.a2 * wint(grid, &w.w1, &[&fx, &fx])
        + v.a3 * wint(grid, &w.w1, &[&fxx, &fxx])
        + v.a4 * wint(grid, &w.w1, &[&fxxx, &fxxx])
        + v.b1 * wint(grid, &w.w1, &[&g, &g])
        + v.b2 * wint(grid, &w.w1, &[&gx, &gx])
        + v.b3 * wint(grid, &w.w1, &[&gxx, &gxx])
        + v.b4 * wint(grid, &w.w1, &[&gxxx, &gxxx])
        + v.d11 * wint(grid, &w.w3, &[&f, &f])
        + v.d12 * wint(grid, &w.w3, &[&fx, &fx])
        + v.d21 * wint(grid, &w.w3, &[&g, &g])
        + v.d22 * wint(grid, &w.w3, &[&gx, &gx]))
}

/// Weighted canonical norm int phi' sum of squared f, g derivatives up to
/// third order — the coercive quantity of the positivity estimate.
pub fn canonical_weighted_norm(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    w: &WeightFamily,
) -> f64 {
    let mut total = 0.0;
    for field in [&s.u, &s.eta] {
        let f = ops.helmholtz_inverse(field);
        total += wint(grid, &w.w1, &[&f, &f]);
        for order in 1..=3 {
            let d = ops.derivative(&f, order);
            total += wint(grid, &w.w1, &[&d, &d]);
        }
    }
    total
}

/// Both sides of the SQ rewrite in canonical variables:
///   beta(1+c) int phi'' eta (1-dxx)^-1 eta_x = -beta(1+c)/2 int phi''' (g^2 - g_x^2)
/// and the alpha(1+a) analogue in u, f.
#[derive(Debug, Clone, Copy)]
pub struct SqRewriteSides {
    pub eta_direct: f64,
    pub eta_canonical: f64,
    pub u_direct: f64,
    pub u_canonical: f64,
}

pub fn sq_rewrite_sides(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    w: &WeightFamily,
    n: &NormalizedParameters,
    ab: &AlphaBeta,
) -> Result<SqRewriteSides, DiagnosticsError> {
    expect_kind(w, WeightKind::Tanh)?;
    let f = ops.helmholtz_inverse(&s.u);
    let g = ops.helmholtz_inverse(&s.eta);
    let fx = ops.derivative(&f, 1);
    let gx = ops.derivative(&g, 1);
    let bc = ab.beta * (1.0 + n.c);
    let aa = ab.alpha * (1.0 + n.a);
    Ok(SqRewriteSides {
        eta_direct: bc * wint(grid, &w.w2, &[&s.eta, &gx]),
        eta_canonical: -0.5 * bc * (wint(grid, &w.w3, &[&g, &g]) - wint(grid, &w.w3, &[&gx, &gx])),
        u_direct: aa * wint(grid, &w.w2, &[&s.u, &fx]),
        u_canonical: -0.5 * aa * (wint(grid, &w.w3, &[&f, &f]) - wint(grid, &w.w3, &[&fx, &fx])),
    })
}

/// SQ evaluated entirely through the canonical rewrite (the two phi''
/// terms replaced by their phi''' forms).
pub fn sq_canonical_rewrite(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    w: &WeightFamily,
    n: &NormalizedParameters,
    ab: &AlphaBeta,
) -> Result<f64, DiagnosticsError> {
    let sides = sq_rewrite_sides(grid, ops, s, w, n, ab)?;
    Ok(sides.eta_canonical
        + sides.u_canonical
        + 0.5 * ab.alpha * n.c * wint(grid, &w.w3, &[&s.eta, &s.eta])
        + 0.5 * ab.beta * n.a * wint(grid, &w.w3, &[&s.u, &s.u]))
}

/// Localized energy E_loc = 1/2 int psi (-a u_x^2 - c eta_x^2 + u^2 + eta^2
/// + u^2 eta) with a sech^4-family weight.
pub fn local_energy(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    w: &WeightFamily,
    n: &NormalizedParameters,
) -> Result<f64, DiagnosticsError> {
    expect_kind(w, WeightKind::Sech4)?;
    let ux = ops.derivative(&s.u, 1);
    let ex = ops.derivative(&s.eta, 1);
    Ok(0.5
        * (-n.a * wint(grid, &w.w, &[&ux, &ux]) - n.c * wint(grid, &w.w, &[&ex, &ex])
            + wint(grid, &w.w, &[&s.u, &s.u])
            + wint(grid, &w.w, &[&s.eta, &s.eta])
            + wint(grid, &w.w, &[&s.u, &s.u, &s.eta])))
}

/// The exact variation of the localized energy: eight linear terms in the
/// canonical variables plus the four small nonlinear parts.
///
/// With F = (1-dxx)^-1(a u_xx + u + u eta) and G the analogue in eta, the
/// derivative assembles from int psi' F G - int psi' F_x G_x plus the
/// transport terms; the minus sign on the F_x G_x block propagates through
/// every term descending from it.
pub fn deloc_rhs(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    w: &WeightFamily,
    n: &NormalizedParameters,
) -> Result<f64, DiagnosticsError> {
    expect_kind(w, WeightKind::Sech4)?;
    let (a, c) = (n.a, n.c);
    let u = &s.u;
    let eta = &s.eta;
    let ux = ops.derivative(u, 1);
    let ex = ops.derivative(eta, 1);
    let f = ops.helmholtz_inverse(u);
    let g = ops.helmholtz_inverse(eta);
    let fx = ops.derivative(&f, 1);
    let gx = ops.derivative(&g, 1);
    let fxx = ops.derivative(&f, 2);
    let gxx = ops.derivative(&g, 2);
    let fxxx = ops.derivative(&f, 3);
    let gxxx = ops.derivative(&g, 3);

    let linear = wint(grid, &w.w1, &[&f, &g])
        + (-1.0 - 2.0 * (a + c)) * wint(grid, &w.w1, &[&fx, &gx])
        + 3.0 * a * c * wint(grid, &w.w1, &[&fxx, &gxx])
        + a * c * wint(grid, &w.w1, &[&fxxx, &gxxx])
        - a * wint(grid, &w.w2, &[&fx, &g])
        - c * wint(grid, &w.w2, &[&f, &gx])
        + a * c * wint(grid, &w.w2, &[&fxx, &gx])
        + a * c * wint(grid, &w.w2, &[&fx, &gxx]);

    let u2 = u.mul(u);
    let u_eta = u.mul(eta);
    let h_u2 = ops.helmholtz_inverse(&u2);
    let h_u_eta = ops.helmholtz_inverse(&u_eta);
    let h_u2_x = ops.derivative(&h_u2, 1);
    let h_u_eta_x = ops.derivative(&h_u_eta, 1);

    // SNL1: (a/2) int (psi' u_x)_x H(u^2) + c int (psi' eta_x)_x H(u eta)
    let psi1_ux_x = ops.derivative(&w.w1.mul(&ux), 1);
    let psi1_ex_x = ops.derivative(&w.w1.mul(&ex), 1);
    let one = Field::from_fn(grid, |_| 1.0);
    let snl1 = 0.5 * a * wint(grid, &one, &[&psi1_ux_x, &h_u2])
        + c * wint(grid, &one, &[&psi1_ex_x, &h_u_eta]);

    let snl2 = 0.5 * wint(grid, &w.w1, &[&f, &h_u2])
        + 0.5 * a * wint(grid, &w.w1, &[&fxx, &h_u2])
        + wint(grid, &w.w1, &[&g, &h_u_eta])
        + c * wint(grid, &w.w1, &[&gxx, &h_u_eta])
        - 0.5 * wint(grid, &w.w1, &[&fx, &h_u2_x])
        - wint(grid, &w.w1, &[&gx, &h_u_eta_x]);

    let snl3 = -0.5 * a * wint(grid, &w.w1, &[&fxxx, &h_u2_x])
        - c * wint(grid, &w.w1, &[&gxxx, &h_u_eta_x]);

    let snl4 = 0.5 * wint(grid, &w.w1, &[&h_u_eta, &h_u2])
        - 0.5 * wint(grid, &w.w1, &[&h_u_eta_x, &h_u2_x]);

    Ok(linear + snl1 + snl2 + snl3 + snl4)
}

/// Local H1 norm int w (u^2 + u_x^2 + eta^2 + eta_x^2) against a sech^2 or
/// sech^4 window.
pub fn local_h1(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    w: &WeightFamily,
) -> Result<f64, DiagnosticsError> {
    if w.kind == WeightKind::Tanh {
        return Err(DiagnosticsError::WrongWeightKind {
            expected: WeightKind::Sech2,
            got: w.kind,
        });
    }
    let ux = ops.derivative(&s.u, 1);
    let ex = ops.derivative(&s.eta, 1);
    Ok(wint(grid, &w.w, &[&s.u, &s.u])
        + wint(grid, &w.w, &[&ux, &ux])
        + wint(grid, &w.w, &[&s.eta, &s.eta])
        + wint(grid, &w.w, &[&ex, &ex]))
}

/// Growing window scale lambda(t) = C0 t / log^2 t, defined for t >= 2.
pub fn lambda_of_t(t: f64, c0: f64) -> Result<f64, DiagnosticsError> {
    if t < 2.0 {
        return Err(DiagnosticsError::TimeBeforeWindow { t });
    }
    let lt = t.ln();
    Ok(c0 * t / (lt * lt))
}

/// lambda'(t)/lambda(t) = (1 - 2/log t)/t.
pub fn lambda_log_derivative(t: f64) -> Result<f64, DiagnosticsError> {
    if t < 2.0 {
        return Err(DiagnosticsError::TimeBeforeWindow { t });
    }
    Ok((1.0 - 2.0 / t.ln()) / t)
}

/// The three extra terms of dH/dt when the tanh weight carries lambda(t):
///   -(lambda'/lambda) int (x/l) sech^2(x/l) (u eta + u_x eta_x)
///   -alpha (lambda'/lambda) int (1 - (2x/l) tanh(x/l)) (1/l) sech^2(x/l) eta u_x
///   -beta  (lambda'/lambda) analogue with u eta_x.
pub fn time_weight_corrections(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    lambda: f64,
    lambda_log_deriv: f64,
    ab: &AlphaBeta,
) -> (f64, f64, f64) {
    let il = 1.0 / lambda;
    let w_i = Field::from_fn(grid, |x| {
        let u = x * il;
        u / u.cosh().powi(2)
    });
    let w_jk = Field::from_fn(grid, |x| {
        let u = x * il;
        (1.0 - 2.0 * u * u.tanh()) * il / u.cosh().powi(2)
    });
    let ux = ops.derivative(&s.u, 1);
    let ex = ops.derivative(&s.eta, 1);
    let corr_i = -lambda_log_deriv
        * (wint(grid, &w_i, &[&s.u, &s.eta]) + wint(grid, &w_i, &[&ux, &ex]));
    let corr_j = -ab.alpha * lambda_log_deriv * wint(grid, &w_jk, &[&s.eta, &ux]);
    let corr_k = -ab.beta * lambda_log_deriv * wint(grid, &w_jk, &[&s.u, &ex]);
    (corr_i, corr_j, corr_k)
}

/// Extra term of dE_loc/dt for the unit sech^4 weight with lambda(t):
/// 1/2 int psi_t (-a u_x^2 - c eta_x^2 + u^2 + eta^2 + u^2 eta), with
/// psi_t = 4 (lambda'/lambda)(x/l) tanh(x/l) sech^4(x/l).
pub fn eloc_time_weight_correction(
    grid: &Grid,
    ops: &SpectralOps,
    s: &FieldPair,
    n: &NormalizedParameters,
    lambda: f64,
    lambda_log_deriv: f64,
) -> f64 {
    let il = 1.0 / lambda;
    let psi_t = Field::from_fn(grid, |x| {
        let u = x * il;
        let s = 1.0 / u.cosh();
        4.0 * lambda_log_deriv * u * u.tanh() * s.powi(4)
    });
    let ux = ops.derivative(&s.u, 1);
    let ex = ops.derivative(&s.eta, 1);
    0.5 * (-n.a * wint(grid, &psi_t, &[&ux, &ux]) - n.c * wint(grid, &psi_t, &[&ex, &ex])
        + wint(grid, &psi_t, &[&s.u, &s.u])
        + wint(grid, &psi_t, &[&s.eta, &s.eta])
        + wint(grid, &psi_t, &[&s.u, &s.u, &s.eta]))
}

/// Bound engine producing full records for a run. For the growing mode the
/// weight families are rebuilt per record at lambda(max(t, 2)); the record
/// fields keep their fixed-lambda definitions, and the lambda(t) correction
/// terms are exposed separately for identity checks.
pub struct DiagnosticsEngine {
    grid: Grid,
    ops: SpectralOps,
    params: NormalizedParameters,
    ab: AlphaBeta,
    coeffs: VirialCoefficients,
    mode: WeightMode,
    fixed: Option<(WeightFamily, WeightFamily, WeightFamily)>,
}

impl DiagnosticsEngine {
    pub fn new(
        grid: &Grid,
        params: NormalizedParameters,
        ab: AlphaBeta,
        mode: WeightMode,
    ) -> DiagnosticsEngine {
        let ops = SpectralOps::new(grid);
        let coeffs = crate::atlas::virial_coefficients(&params, &ab);
        let fixed = match mode {
            WeightMode::Fixed { lambda } => Some((
                weight_family(WeightKind::Tanh, lambda, grid),
                weight_family(WeightKind::Sech4, lambda, grid),
                weight_family(WeightKind::Sech2, lambda, grid),
            )),
            WeightMode::Growing { .. } => None,
        };
        DiagnosticsEngine { grid: grid.clone(), ops: ops.clone(), params, ab, coeffs, mode, fixed }
    }

    pub fn alpha_beta(&self) -> AlphaBeta {
        self.ab
    }

    pub fn coefficients(&self) -> VirialCoefficients {
        self.coeffs
    }

    pub fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    /// Window scale in effect at time t (clamped to t = 2 in growing mode).
    pub fn lambda_at(&self, t: f64) -> f64 {
        match self.mode {
            WeightMode::Fixed { lambda } => lambda,
            WeightMode::Growing { c0 } => lambda_of_t(t.max(2.0), c0).expect("clamped"),
        }
    }

    fn families_at(&self, t: f64) -> (WeightFamily, WeightFamily, WeightFamily) {
        match &self.fixed {
            Some(f) => f.clone(),
            None => {
                let lambda = self.lambda_at(t);
                (
                    weight_family_unit(WeightKind::Tanh, lambda, &self.grid),
                    weight_family_unit(WeightKind::Sech4, lambda, &self.grid),
                    weight_family_unit(WeightKind::Sech2, lambda, &self.grid),
                )
            }
        }
    }

    /// Max field amplitude over the outer 10% of the domain, the torus
    /// validity flag.
    pub fn boundary_flag(&self, s: &FieldPair) -> f64 {
        let l = self.grid.half_length();
        let mut flag = 0.0f64;
        for (j, &x) in self.grid.nodes().iter().enumerate() {
            if x.abs() >= 0.9 * l {
                flag = flag.max(s.u.values()[j].abs()).max(s.eta.values()[j].abs());
            }
        }
        flag
    }

    pub fn record(&self, t: f64, s: &FieldPair) -> DiagnosticsRecord {
        let (phi, psi, chi) = self.families_at(t);
        let v = virials(&self.grid, &self.ops, s, &phi, &self.ab).expect("tanh family");
        let dh = dh_decomposition(&self.grid, &self.ops, s, &phi, &self.params, &self.ab)
            .expect("tanh family");
        let q_canonical =
            quadratic_q_canonical(&self.grid, &self.ops, s, &phi, &self.coeffs).expect("tanh");
        let e_loc = local_energy(&self.grid, &self.ops, s, &psi, &self.params).expect("sech4");
        let deloc = deloc_rhs(&self.grid, &self.ops, s, &psi, &self.params).expect("sech4");
        let lh1 = local_h1(&self.grid, &self.ops, s, &chi).expect("sech2");
        DiagnosticsRecord {
            t,
            e: energy(&self.grid, &self.ops, s, &self.params),
            p: momentum(&self.grid, &self.ops, s),
            i: v.i,
            j: v.j,
            k: v.k,
            h: v.h,
            q: dh.q,
            sq: dh.sq,
            nq: dh.nq,
            q_canonical,
            e_loc,
            deloc_rhs: deloc,
            local_h1: lh1,
            lambda_t: self.lambda_at(t),
            boundary_flag: self.boundary_flag(s),
        }
    }

    /// Sum of the lambda(t) corrections to dH/dt at time t; zero in fixed
    /// mode and in the clamped region t < 2.
    pub fn dh_time_correction(&self, t: f64, s: &FieldPair) -> f64 {
        match self.mode {
            WeightMode::Fixed { .. } => 0.0,
            WeightMode::Growing { c0 } => {
                if t < 2.0 {
                    return 0.0;
                }
                let lambda = lambda_of_t(t, c0).expect("t >= 2");
                let ld = lambda_log_derivative(t).expect("t >= 2");
                let (ci, cj, ck) =
                    time_weight_corrections(&self.grid, &self.ops, s, lambda, ld, &self.ab);
                ci + cj + ck
            }
        }
    }

    /// Lambda(t) correction to dE_loc/dt; zero in fixed mode / clamped region.
    pub fn eloc_time_correction(&self, t: f64, s: &FieldPair) -> f64 {
        match self.mode {
            WeightMode::Fixed { .. } => 0.0,
            WeightMode::Growing { c0 } => {
                if t < 2.0 {
                    return 0.0;
                }
                let lambda = lambda_of_t(t, c0).expect("t >= 2");
                let ld = lambda_log_derivative(t).expect("t >= 2");
                eloc_time_weight_correction(&self.grid, &self.ops, s, &self.params, lambda, ld)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{gaussian_data, solitary_wave};

    fn setup() -> (Grid, SpectralOps, NormalizedParameters, AlphaBeta) {
        let grid = Grid::new(512, 100.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let n = NormalizedParameters::from_ac(-1.0, -1.0).unwrap();
        let ab = AlphaBeta { alpha: 0.0, beta: 0.0 };
        (grid, ops, n, ab)
    }

    #[test]
    fn zero_state_zeroes_everything() {
        let (grid, ops, n, ab) = setup();
        let s = FieldPair::zeros(grid.len());
        let w = weight_family(WeightKind::Tanh, 20.0, &grid);
        assert_eq!(energy(&grid, &ops, &s, &n), 0.0);
        assert_eq!(momentum(&grid, &ops, &s), 0.0);
        let v = virials(&grid, &ops, &s, &w, &ab).unwrap();
        assert_eq!((v.i, v.j, v.k, v.h), (0.0, 0.0, 0.0, 0.0));
        let dh = dh_decomposition(&grid, &ops, &s, &w, &n, &ab).unwrap();
        assert_eq!((dh.q, dh.sq, dh.nq), (0.0, 0.0, 0.0));
        let psi = weight_family(WeightKind::Sech4, 20.0, &grid);
        assert_eq!(local_energy(&grid, &ops, &s, &psi, &n).unwrap(), 0.0);
        assert_eq!(deloc_rhs(&grid, &ops, &s, &psi, &n).unwrap(), 0.0);
        assert_eq!(quadratic_q_canonical(&grid, &ops, &s, &w,
            &crate::atlas::virial_coefficients(&n, &ab)).unwrap(), 0.0);
    }

    #[test]
    fn canonical_q_without_d_terms_is_nonnegative() {
        // positive A/B coefficients against the nonnegative phi' window
        // make the D-free part a sum of weighted squares
        let (grid, ops, n, _) = setup();
        let ab = crate::atlas::select_alpha_beta(&n).unwrap();
        let mut v = crate::atlas::virial_coefficients(&n, &ab);
        assert!(v.all_ab_positive());
        v.d11 = 0.0;
        v.d12 = 0.0;
        v.d21 = 0.0;
        v.d22 = 0.0;
        let w = weight_family(WeightKind::Tanh, 20.0, &grid);
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = crate::states::random_smooth_state(&grid, &mut rng);
            let q = quadratic_q_canonical(&grid, &ops, &s, &w, &v).unwrap();
            assert!(q >= 0.0, "{q}");
        }
    }

    #[test]
    fn energy_positive_for_small_eta() {
        let (grid, ops, n, _) = setup();
        let s = gaussian_data(&grid, 0.3, -0.4, 5.0, 2.0).unwrap();
        assert!(s.eta.sup_norm() < 1.0);
        assert!(energy(&grid, &ops, &s, &n) > 0.0);
    }

    #[test]
    fn momentum_vanishes_for_odd_even_pair() {
        let (grid, ops, _, _) = setup();
        let s = FieldPair {
            u: Field::from_fn(&grid, |x| x * (-x * x / 16.0).exp()),
            eta: Field::from_fn(&grid, |x| (-x * x / 16.0).exp()),
        };
        assert!(momentum(&grid, &ops, &s).abs() < 1e-14);
    }

    #[test]
    fn solitary_momentum_matches_closed_form() {
        let (grid, ops, n, _) = setup();
        let s = solitary_wave(&grid, &n).unwrap();
        // P = -sqrt(2) (int Q^2 + int Q'^2) = -sqrt(2)(6 + 6/5)
        let exact = -std::f64::consts::SQRT_2 * (6.0 + 1.2);
        let p = momentum(&grid, &ops, &s);
        assert!((p - exact).abs() < 1e-10, "{p} vs {exact}");
    }

    #[test]
    fn virial_i_vanishes_on_centered_even_data() {
        let (grid, ops, _, ab) = setup();
        let w = weight_family(WeightKind::Tanh, 20.0, &grid);
        let s = gaussian_data(&grid, 0.2, 0.3, 6.0, 0.0).unwrap();
        let v = virials(&grid, &ops, &s, &w, &ab).unwrap();
        assert!(v.i.abs() < 1e-13, "{}", v.i);
    }

    #[test]
    fn virial_i_obeys_cauchy_schwarz_bound() {
        let (grid, ops, _, ab) = setup();
        let w = weight_family(WeightKind::Tanh, 20.0, &grid);
        let s = gaussian_data(&grid, 0.4, -0.2, 5.0, 7.0).unwrap();
        let v = virials(&grid, &ops, &s, &w, &ab).unwrap();
        let one = Field::from_fn(&grid, |_| 1.0);
        let l2 = |f: &Field| wint(&grid, &one, &[f, f]).sqrt();
        let ux = ops.derivative(&s.u, 1);
        let ex = ops.derivative(&s.eta, 1);
        let bound = w.w.sup_norm() * (l2(&s.u) * l2(&s.eta) + l2(&ux) * l2(&ex));
        assert!(v.i.abs() <= bound + 1e-12, "{} vs {bound}", v.i);
    }

    #[test]
    fn virials_require_tanh_family() {
        let (grid, ops, _, ab) = setup();
        let w = weight_family(WeightKind::Sech2, 20.0, &grid);
        let s = FieldPair::zeros(grid.len());
        assert!(matches!(
            virials(&grid, &ops, &s, &w, &ab),
            Err(DiagnosticsError::WrongWeightKind { .. })
        ));
    }

    #[test]
    fn q_representations_agree_on_a_smooth_state() {
        let (grid, ops, n, _) = setup();
        let ab = AlphaBeta { alpha: 0.0, beta: 0.1 };
        let w = weight_family(WeightKind::Tanh, 20.0, &grid);
        let s = FieldPair {
            u: Field::from_fn(&grid, |x| 0.5 * (-(x - 3.0) * (x - 3.0) / 30.0).exp()),
            eta: Field::from_fn(&grid, |x| -0.3 * (-(x + 5.0) * (x + 5.0) / 20.0).exp()),
        };
        let direct = dh_decomposition(&grid, &ops, &s, &w, &n, &ab).unwrap().q;
        let coeffs = crate::atlas::virial_coefficients(&n, &ab);
        let canonical = quadratic_q_canonical(&grid, &ops, &s, &w, &coeffs).unwrap();
        let scale = direct.abs().max(canonical.abs());
        assert!((direct - canonical).abs() < 1e-11 * scale.max(1e-30),
            "{direct} vs {canonical}");
    }

    #[test]
    fn sq_rewrite_sides_agree() {
        let (grid, ops, n, _) = setup();
        let ab = AlphaBeta { alpha: 0.2, beta: -0.1 };
        let w = weight_family(WeightKind::Tanh, 15.0, &grid);
        let s = gaussian_data(&grid, 0.5, 0.4, 6.0, -4.0).unwrap();
        let sides = sq_rewrite_sides(&grid, &ops, &s, &w, &n, &ab).unwrap();
        let scale = sides.eta_direct.abs().max(sides.eta_canonical.abs()).max(1e-30);
        assert!((sides.eta_direct - sides.eta_canonical).abs() < 1e-11 * scale.max(1.0));
        let scale = sides.u_direct.abs().max(sides.u_canonical.abs()).max(1e-30);
        assert!((sides.u_direct - sides.u_canonical).abs() < 1e-11 * scale.max(1.0));
    }

    #[test]
    fn sq_rewrite_vanishes_at_zero_alpha_beta() {
        let (grid, ops, n, _) = setup();
        let ab = AlphaBeta { alpha: 0.0, beta: 0.0 };
        let w = weight_family(WeightKind::Tanh, 15.0, &grid);
        let s = gaussian_data(&grid, 0.5, 0.4, 6.0, -4.0).unwrap();
        let sides = sq_rewrite_sides(&grid, &ops, &s, &w, &n, &ab).unwrap();
        assert_eq!(sides.eta_direct, 0.0);
        assert_eq!(sides.eta_canonical, 0.0);
        assert_eq!(sides.u_direct, 0.0);
        assert_eq!(sides.u_canonical, 0.0);
    }

    #[test]
    fn lambda_of_t_values() {
        let e2 = std::f64::consts::E * std::f64::consts::E;
        let v = lambda_of_t(e2, 1.0).unwrap();
        assert!((v - e2 / 4.0).abs() < 1e-14);
        assert!(lambda_of_t(1.5, 1.0).is_err());
        assert!(lambda_log_derivative(1.0).is_err());
    }

    #[test]
    fn local_energy_requires_sech4() {
        let (grid, ops, n, _) = setup();
        let w = weight_family(WeightKind::Tanh, 20.0, &grid);
        let s = FieldPair::zeros(grid.len());
        assert!(local_energy(&grid, &ops, &s, &w, &n).is_err());
    }

    #[test]
    fn records_are_reflection_invariant() {
        let (grid, ops, n, ab) = setup();
        let _ = (&ops, &ab);
        let engine = DiagnosticsEngine::new(&grid, n, AlphaBeta { alpha: 0.1, beta: -0.2 },
            WeightMode::Fixed { lambda: 20.0 });
        let s = FieldPair {
            u: Field::from_fn(&grid, |x| 0.3 * (-(x - 4.0) * (x - 4.0) / 18.0).exp()),
            eta: Field::from_fn(&grid, |x| 0.2 * (-(x + 2.0) * (x + 2.0) / 22.0).exp()),
        };
        // reflected state on the node set: x_j -> -x_j is j -> N - j mod N
        let reflect = |f: &Field| {
            let n = f.len();
            Field((0..n).map(|j| f.values()[(n - j) % n]).collect())
        };
        let sr = FieldPair { u: reflect(&s.u), eta: reflect(&s.eta) };
        // reflecting the state flips the sign of the functionals weighted
        // by the odd tanh profile (I, J, K) and preserves the even ones
        // (E, P, E_loc, local norms, Q against the even sech^2 window)
        let r1 = engine.record(0.0, &s);
        let r2 = engine.record(0.0, &sr);
        assert!((r1.e - r2.e).abs() < 1e-12 * r1.e.abs().max(1e-30));
        assert!((r1.p - r2.p).abs() < 1e-12 * r1.p.abs().max(1e-30));
        assert!((r1.e_loc - r2.e_loc).abs() < 1e-12 * r1.e_loc.abs().max(1e-30));
        assert!((r1.local_h1 - r2.local_h1).abs() < 1e-12 * r1.local_h1.abs().max(1e-30));
        assert!((r1.q - r2.q).abs() < 1e-10 * r1.q.abs().max(1e-30));
        assert!((r1.i + r2.i).abs() < 1e-12 * r1.i.abs().max(1e-30));
        assert!((r1.j + r2.j).abs() < 1e-12 * r1.j.abs().max(1e-30));
    }

    #[test]
    fn csv_row_has_expected_shape() {
        let (grid, _, n, ab) = setup();
        let engine = DiagnosticsEngine::new(&grid, n, ab, WeightMode::Fixed { lambda: 20.0 });
        let rec = engine.record(0.0, &FieldPair::zeros(grid.len()));
        let row = rec.csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("0.0000000000000000e0,"));
    }
}
