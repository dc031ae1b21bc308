//! Time evolution of the normalized system
//!
//!   eta_t = a u_x - (1+a)(1-dxx)^-1 u_x - (1-dxx)^-1 d_x(u eta)
//!   u_t   = c eta_x - (1+c)(1-dxx)^-1 eta_x - (1-dxx)^-1 d_x(u^2/2)
//!
//! with classical RK4 on the full semidiscrete system, plus canonical
//! initial data and run orchestration.

use crate::atlas::{self, AlphaBeta, AtlasError, NormalizedParameters};
use crate::diagnostics::{DiagnosticsEngine, DiagnosticsRecord, WeightMode};
use crate::spectral::{Field, Grid, SpectralError, SpectralOps};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("state blew past the stability guard at t={t} (step {step})")]
    Unstable { t: f64, step: u64 },
    #[error("non-finite state at t={t} (step {step})")]
    NonFinite { t: f64, step: u64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error("state file i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("state file malformed: {0}")]
    BadStateFile(String),
}

/// Simulation state: the pair (u, eta) on a shared grid.
#[derive(Debug, Clone)]
pub struct FieldPair {
    pub u: Field,
    pub eta: Field,
}

impl FieldPair {
    pub fn zeros(n: usize) -> FieldPair {
        FieldPair { u: Field::zeros(n), eta: Field::zeros(n) }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.eta.is_finite()
    }

    pub fn sup_sum(&self) -> f64 {
        self.u.sup_norm() + self.eta.sup_norm()
    }

    fn add_scaled(&self, s: f64, other: &FieldPair) -> FieldPair {
        FieldPair {
            u: self.u.add_scaled(s, &other.u),
            eta: self.eta.add_scaled(s, &other.eta),
        }
    }
}

/// Semidiscrete right-hand side bound to one grid and parameter set.
pub struct AbcdSystem {
    pub grid: Grid,
    pub params: NormalizedParameters,
    pub ops: SpectralOps,
    /// Drop the quadratic terms (dispersion-relation oracles).
    pub linear_only: bool,
    /// 2/3-rule truncation of the quadratic products.
    pub dealias: bool,
}

impl AbcdSystem {
    pub fn new(grid: Grid, params: NormalizedParameters) -> AbcdSystem {
        let ops = SpectralOps::new(&grid);
        AbcdSystem { grid, params, ops, linear_only: false, dealias: false }
    }

    /// Time derivative of the state. Output finiteness is the caller's
    /// blow-up signal.
    pub fn rhs(&self, s: &FieldPair) -> FieldPair {
        let (a, c) = (self.params.a, self.params.c);
        // linear part as a single odd multiplier per component:
        // ik (a - (1+a)/(1+k^2)) = ik (a k^2 - 1)/(1+k^2), same with c
        let eta_lin = self.ops.apply_odd_multiplier(&s.u, |k| {
            k * (a * k * k - 1.0) / (1.0 + k * k)
        });
        let u_lin = self.ops.apply_odd_multiplier(&s.eta, |k| {
            k * (c * k * k - 1.0) / (1.0 + k * k)
        });
        if self.linear_only {
            return FieldPair { u: u_lin, eta: eta_lin };
        }
        let u_eta = self.maybe_dealias(s.u.mul(&s.eta));
        let half_u2 = self.maybe_dealias(s.u.mul(&s.u)).scaled(0.5);
        let eta_nl = self.ops.helmholtz_dx(&u_eta);
        let u_nl = self.ops.helmholtz_dx(&half_u2);
        FieldPair {
            u: u_lin.add_scaled(-1.0, &u_nl),
            eta: eta_lin.add_scaled(-1.0, &eta_nl),
        }
    }

    fn maybe_dealias(&self, f: Field) -> Field {
        if self.dealias {
            self.ops.dealias_two_thirds(&f)
        } else {
            f
        }
    }

    /// One classical RK4 step.
    pub fn rk4_step(&self, s: &FieldPair, dt: f64) -> FieldPair {
        let k1 = self.rhs(s);
        let k2 = self.rhs(&s.add_scaled(0.5 * dt, &k1));
        let k3 = self.rhs(&s.add_scaled(0.5 * dt, &k2));
        let k4 = self.rhs(&s.add_scaled(dt, &k3));
        let sixth = dt / 6.0;
        FieldPair {
            u: s.u
                .add_scaled(sixth, &k1.u)
                .add_scaled(2.0 * sixth, &k2.u)
                .add_scaled(2.0 * sixth, &k3.u)
                .add_scaled(sixth, &k4.u),
            eta: s
                .eta
                .add_scaled(sixth, &k1.eta)
                .add_scaled(2.0 * sixth, &k2.eta)
                .add_scaled(2.0 * sixth, &k3.eta)
                .add_scaled(sixth, &k4.eta),
        }
    }

    /// Default CFL-type step for this grid and parameter set:
    /// 0.25 dx / max(1, sqrt(ac)). The linear symbols grow like
    /// sqrt(ac) k at high wavenumber, so this sits well inside the RK4
    /// imaginary-axis stability limit.
    pub fn default_dt(&self) -> f64 {
        let speed = (self.params.a * self.params.c).sqrt().max(1.0);
        0.25 * self.grid.spacing() / speed
    }
}

/// Explicit zero-speed solitary pair for a = c < 0:
/// (u, eta) = (sqrt(2) Q(x/sqrt(|a|)), -Q(x/sqrt(|a|))) with
/// Q(x) = 3 / (2 cosh^2(x/2)), the positive solution of Q'' - Q + Q^2 = 0.
pub fn solitary_wave(grid: &Grid, n: &NormalizedParameters) -> Result<FieldPair, SimError> {
    if !(n.a == n.c && n.a < 0.0) {
        return Err(AtlasError::SolitaryRequiresEqual { a: n.a, c: n.c }.into());
    }
    let scale = 1.0 / (-n.a).sqrt();
    let q = |x: f64| 1.5 / (0.5 * x * scale).cosh().powi(2);
    Ok(FieldPair {
        u: Field::from_fn(grid, |x| std::f64::consts::SQRT_2 * q(x)),
        eta: Field::from_fn(grid, |x| -q(x)),
    })
}

/// Gaussian pair u = amp_u exp(-((x-center)/width)^2), eta likewise.
pub fn gaussian_data(
    grid: &Grid,
    amp_u: f64,
    amp_eta: f64,
    width: f64,
    center: f64,
) -> Result<FieldPair, SimError> {
    if !(width > 0.0) {
        return Err(SimError::InvalidConfig(format!("gaussian width must be positive, got {width}")));
    }
    let bump = |x: f64| (-((x - center) / width).powi(2)).exp();
    Ok(FieldPair {
        u: Field::from_fn(grid, |x| amp_u * bump(x)),
        eta: Field::from_fn(grid, |x| amp_eta * bump(x)),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Zero,
    Solitary,
    Gaussian { amp_u: f64, amp_eta: f64, width: f64, center: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DealiasMode {
    /// On for horizons past T = 50, off otherwise.
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub params: NormalizedParameters,
    pub n: usize,
    pub half_length: f64,
    /// None picks the CFL default for the grid and parameters.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Diagnostics every `cadence` steps.
    pub cadence: u64,
    pub initial: InitialData,
    pub weight_mode: WeightMode,
    /// None resolves to select_alpha_beta when dispersion-like, else (0, 0).
    pub alpha_beta: Option<AlphaBeta>,
    pub dealias: DealiasMode,
    pub linear_only: bool,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.t_end > 0.0) {
            return Err(SimError::InvalidConfig(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.cadence == 0 {
            return Err(SimError::InvalidConfig("cadence must be at least 1".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(SimError::InvalidConfig(format!("dt must be positive, got {dt}")));
            }
        }
        if let WeightMode::Growing { c0 } = self.weight_mode {
            if !(c0 > 0.0) {
                return Err(SimError::InvalidConfig(format!("C0 must be positive, got {c0}")));
            }
        }
        Ok(())
    }

    /// The (alpha, beta) the run will actually use.
    pub fn resolve_alpha_beta(&self) -> AlphaBeta {
        self.alpha_beta.unwrap_or_else(|| {
            atlas::select_alpha_beta(&self.params)
                .unwrap_or(AlphaBeta { alpha: 0.0, beta: 0.0 })
        })
    }

    fn resolve_dealias(&self) -> bool {
        match self.dealias {
            DealiasMode::On => true,
            DealiasMode::Off => false,
            DealiasMode::Auto => self.t_end > 50.0,
        }
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: FieldPair,
    pub final_time: f64,
    /// Resolved values actually used by the run.
    pub dt: f64,
    pub alpha_beta: AlphaBeta,
    pub steps: u64,
}

/// Steps the configured system to t_end, emitting a diagnostics record at
/// every cadence point (step 0 and the final step always included). The
/// observer receives each record with an immutable snapshot of the state.
///
/// Aborts cleanly with `SimError::Unstable` when sup|u| + sup|eta| exceeds
/// 1e3 times its initial value, and with `SimError::NonFinite` on NaN/inf;
/// records emitted before the abort have already reached the observer.
pub fn run(
    cfg: &SimulationConfig,
    mut observer: impl FnMut(&DiagnosticsRecord, f64, &FieldPair),
) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    let grid = Grid::new(cfg.n, cfg.half_length)?;
    let mut system = AbcdSystem::new(grid, cfg.params);
    system.linear_only = cfg.linear_only;
    system.dealias = cfg.resolve_dealias();

    // explicit dt is honored exactly; the automatic step is shrunk to land
    // on t_end
    let (dt, steps) = match cfg.dt {
        Some(dt) => (dt, (cfg.t_end / dt).round().max(1.0) as u64),
        None => {
            let steps = (cfg.t_end / system.default_dt()).ceil().max(1.0) as u64;
            (cfg.t_end / steps as f64, steps)
        }
    };
    let alpha_beta = cfg.resolve_alpha_beta();

    let engine = DiagnosticsEngine::new(&system.grid, cfg.params, alpha_beta, cfg.weight_mode);

    let mut state = match &cfg.initial {
        InitialData::Zero => FieldPair::zeros(cfg.n),
        InitialData::Solitary => solitary_wave(&system.grid, &cfg.params)?,
        InitialData::Gaussian { amp_u, amp_eta, width, center } => {
            gaussian_data(&system.grid, *amp_u, *amp_eta, *width, *center)?
        }
    };
    let guard = 1e3 * state.sup_sum().max(1e-9);

    let mut records = Vec::new();
    let mut emit = |records: &mut Vec<DiagnosticsRecord>, t: f64, s: &FieldPair| {
        let rec = engine.record(t, s);
        observer(&rec, t, s);
        records.push(rec);
    };

    emit(&mut records, 0.0, &state);
    for step in 1..=steps {
        state = system.rk4_step(&state, dt);
        let t = step as f64 * dt;
        if !state.is_finite() {
            return Err(SimError::NonFinite { t, step });
        }
        if state.sup_sum() > guard {
            return Err(SimError::Unstable { t, step });
        }
        if step % cfg.cadence == 0 || step == steps {
            emit(&mut records, t, &state);
        }
    }

    let final_time = steps as f64 * dt;
    Ok(RunOutput { records, final_state: state, final_time, dt, alpha_beta, steps })
}

/// Writes the final-state dump: little-endian `u64 N`, `f64 L`, `f64 t`,
/// then N doubles of u followed by N doubles of eta.
pub fn write_state(
    path: &Path,
    grid: &Grid,
    t: f64,
    state: &FieldPair,
) -> Result<(), SimError> {
    let mut buf = Vec::with_capacity(24 + 16 * grid.len());
    buf.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    buf.extend_from_slice(&grid.half_length().to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    for v in state.u.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for v in state.eta.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Reads a final-state dump back. Returns (N, L, t, state).
pub fn read_state(path: &Path) -> Result<(usize, f64, f64, FieldPair), SimError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 24 {
        return Err(SimError::BadStateFile("truncated header".into()));
    }
    let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let t = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let expected = 24 + 16 * n;
    if bytes.len() != expected {
        return Err(SimError::BadStateFile(format!(
            "expected {expected} bytes for N={n}, got {}",
            bytes.len()
        )));
    }
    let read_f64s = |off: usize| -> Vec<f64> {
        (0..n)
            .map(|j| f64::from_le_bytes(bytes[off + 8 * j..off + 8 * j + 8].try_into().unwrap()))
            .collect()
    };
    let u = Field(read_f64s(24));
    let eta = Field(read_f64s(24 + 8 * n));
    Ok((n, l, t, FieldPair { u, eta }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::weighted_integral;

    fn minus_one() -> NormalizedParameters {
        NormalizedParameters::from_ac(-1.0, -1.0).unwrap()
    }

    #[test]
    fn zero_state_has_zero_derivative() {
        let grid = Grid::new(128, 50.0).unwrap();
        let sys = AbcdSystem::new(grid, minus_one());
        let s = FieldPair::zeros(128);
        let d = sys.rhs(&s);
        assert_eq!(d.u.sup_norm(), 0.0);
        assert_eq!(d.eta.sup_norm(), 0.0);
    }

    #[test]
    fn solitary_profile_peaks_and_residual() {
        let grid = Grid::new(2048, 100.0).unwrap();
        let n = minus_one();
        let s = solitary_wave(&grid, &n).unwrap();
        let j0 = grid.len() / 2;
        assert!((s.u.values()[j0] - 1.5 * std::f64::consts::SQRT_2).abs() < 1e-14);
        assert!((s.eta.values()[j0] + 1.5).abs() < 1e-14);

        // Q'' - Q + Q^2 = 0 to spectral accuracy
        let ops = SpectralOps::new(&grid);
        let q = s.eta.scaled(-1.0);
        let qxx = ops.derivative(&q, 2);
        let residual = qxx.add_scaled(-1.0, &q).add_scaled(1.0, &q.mul(&q));
        assert!(residual.sup_norm() < 1e-10, "{}", residual.sup_norm());
    }

    #[test]
    fn solitary_pair_is_a_steady_state() {
        let grid = Grid::new(2048, 100.0).unwrap();
        let n = minus_one();
        let sys = AbcdSystem::new(grid, n);
        let s = solitary_wave(&sys.grid, &n).unwrap();
        let d = sys.rhs(&s);
        assert!(d.u.sup_norm() < 1e-8, "{}", d.u.sup_norm());
        assert!(d.eta.sup_norm() < 1e-8, "{}", d.eta.sup_norm());
    }

    #[test]
    fn solitary_rejects_unequal_parameters() {
        let grid = Grid::new(128, 50.0).unwrap();
        let n = NormalizedParameters::from_ac(-1.0, -0.5).unwrap();
        assert!(solitary_wave(&grid, &n).is_err());
    }

    #[test]
    fn solitary_is_steady_for_other_equal_parameters() {
        let grid = Grid::new(2048, 100.0).unwrap();
        let n = NormalizedParameters::from_ac(-0.5, -0.5).unwrap();
        let sys = AbcdSystem::new(grid, n);
        let s = solitary_wave(&sys.grid, &n).unwrap();
        let d = sys.rhs(&s);
        assert!(d.u.sup_norm().max(d.eta.sup_norm()) < 1e-8);
    }

    #[test]
    fn gaussian_rejects_bad_width() {
        let grid = Grid::new(128, 50.0).unwrap();
        assert!(gaussian_data(&grid, 0.1, 0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn gaussian_zero_amplitude_is_zero_state() {
        let grid = Grid::new(128, 50.0).unwrap();
        let s = gaussian_data(&grid, 0.0, 0.0, 5.0, 0.0).unwrap();
        assert_eq!(s.sup_sum(), 0.0);
    }

    #[test]
    fn gaussian_smallness_report() {
        // amp 0.01, width 5: closed-form H1 x H1 norm stays below 0.1
        let grid = Grid::new(1024, 100.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let s = gaussian_data(&grid, 0.01, 0.01, 5.0, 0.0).unwrap();
        let one = Field::from_fn(&grid, |_| 1.0);
        let ux = ops.derivative(&s.u, 1);
        let ex = ops.derivative(&s.eta, 1);
        let h1 = weighted_integral(&grid, &one, &[&s.u, &s.u]).unwrap()
            + weighted_integral(&grid, &one, &[&ux, &ux]).unwrap()
            + weighted_integral(&grid, &one, &[&s.eta, &s.eta]).unwrap()
            + weighted_integral(&grid, &one, &[&ex, &ex]).unwrap();
        let norm = h1.sqrt();
        assert!(norm < 0.1, "{norm}");
        // closed form: ||u||_{H1}^2 = A^2 sqrt(pi/2) (w + 1/w)
        let exact = 2.0 * 1e-4 * (std::f64::consts::PI / 2.0).sqrt() * (5.0 + 0.2);
        assert!((h1 - exact).abs() < 1e-12, "{h1} vs {exact}");
    }

    #[test]
    fn rk4_halving_dt_shrinks_error_fourth_order() {
        let grid = Grid::new(256, 50.0).unwrap();
        let n = minus_one();
        let sys = AbcdSystem::new(grid, n);
        let s0 = gaussian_data(&sys.grid, 0.05, 0.05, 4.0, 0.0).unwrap();
        let advance = |dt: f64, steps: u64| {
            let mut s = s0.clone();
            for _ in 0..steps {
                s = sys.rk4_step(&s, dt);
            }
            s
        };
        let t_end = 1.0;
        let reference = advance(t_end / 64.0, 64);
        let coarse = advance(t_end / 8.0, 8);
        let fine = advance(t_end / 16.0, 16);
        let err = |s: &FieldPair| {
            s.u.add_scaled(-1.0, &reference.u).sup_norm()
                + s.eta.add_scaled(-1.0, &reference.eta).sup_norm()
        };
        let ratio = err(&coarse) / err(&fine);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn run_on_zero_data_yields_zero_diagnostics() {
        let cfg = SimulationConfig {
            params: minus_one(),
            n: 128,
            half_length: 50.0,
            dt: Some(0.05),
            t_end: 0.5,
            cadence: 2,
            initial: InitialData::Zero,
            weight_mode: WeightMode::Fixed { lambda: 20.0 },
            alpha_beta: None,
            dealias: DealiasMode::Off,
            linear_only: false,
        };
        let out = run(&cfg, |_, _, _| {}).unwrap();
        for rec in &out.records {
            assert_eq!(rec.e, 0.0);
            assert_eq!(rec.p, 0.0);
            assert_eq!(rec.h, 0.0);
            assert_eq!(rec.q, 0.0);
            assert_eq!(rec.e_loc, 0.0);
            assert_eq!(rec.local_h1, 0.0);
        }
    }

    #[test]
    fn run_aborts_on_unstable_dt() {
        let grid = Grid::new(256, 50.0).unwrap();
        let sys = AbcdSystem::new(grid, minus_one());
        let stable = sys.default_dt();
        let cfg = SimulationConfig {
            params: minus_one(),
            n: 256,
            half_length: 50.0,
            dt: Some(stable * 8.0),
            t_end: 50.0,
            cadence: 10,
            initial: InitialData::Gaussian { amp_u: 0.05, amp_eta: 0.05, width: 3.0, center: 0.0 },
            weight_mode: WeightMode::Fixed { lambda: 20.0 },
            alpha_beta: None,
            dealias: DealiasMode::Off,
            linear_only: false,
        };
        match run(&cfg, |_, _, _| {}) {
            Err(SimError::Unstable { .. }) | Err(SimError::NonFinite { .. }) => {}
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn state_dump_roundtrip() {
        let dir = std::env::temp_dir().join("abcdlab_state_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.bin");
        let grid = Grid::new(128, 30.0).unwrap();
        let s = gaussian_data(&grid, 0.3, -0.2, 4.0, 1.0).unwrap();
        write_state(&path, &grid, 2.5, &s).unwrap();
        let (n, l, t, back) = read_state(&path).unwrap();
        assert_eq!(n, 128);
        assert_eq!(l, 30.0);
        assert_eq!(t, 2.5);
        assert_eq!(back.u, s.u);
        assert_eq!(back.eta, s.eta);
        std::fs::remove_dir_all(&dir).ok();
    }
}
