//! Right-hand sides and time integration for the anisotropic MHD
//! perturbation system and its variants.
//!
//! The default (perturbation) system about the background field e₂ is
//!
//! ```text
//! ∂t u = P[−u·∇u + b·∇b + ∂₂b] + Σᵢ νᵢ ∂ᵢ²u
//! ∂t b = −u·∇b + b·∇u + ∂₂u + Σᵢ ηᵢ ∂ᵢ²b
//! ```
//!
//! with P the Leray projection, ν = (1,0,0) and η = (1,1,0). Nonlinear terms
//! are evaluated pseudo-spectrally in rotational form (the gradient parts are
//! absorbed by the projection) and dealiased by the 2/3 rule; time stepping
//! is integrating-factor RK4, so the stiff diagonal dissipation is applied
//! exactly and only the nonlinear/coupling terms are integrated explicitly.

use num_complex::Complex64;

use crate::energy::{EnergyReport, SobolevForm};
use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{dealias_coeffs, SpectralVectorField};
use crate::grid::{Axis, Grid};

/// Which member of the model family to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Perturbation system about the background field (the default).
    Perturbation,
    /// Full magnetic field B (background carried in the k = 0 mode of b).
    FullB,
    /// Velocity equation alone, b ≡ 0 (coupling ablation).
    NavierStokesOnly,
    /// Horizontal velocity dissipation with vertical magnetic diffusion and
    /// background axis x₁.
    WuZhu,
}

/// Dissipation masks, coupling switch and variant selector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    /// Per-direction viscosity on u.
    pub nu: [f64; 3],
    /// Per-direction magnetic diffusion on b.
    pub eta: [f64; 3],
    /// Background-field coupling terms (∂₂b in du, ∂₂u in db) on/off.
    pub coupling: bool,
    /// Axis of the background field (x₂ by default).
    pub background_axis: Axis,
    pub variant: Variant,
    /// Quadratic terms on/off; switching them off leaves the per-mode linear
    /// system used by the dispersion analysis.
    pub nonlinear: bool,
}

impl ModelConfig {
    pub fn perturbation() -> Self {
        ModelConfig {
            nu: [1.0, 0.0, 0.0],
            eta: [1.0, 1.0, 0.0],
            coupling: true,
            background_axis: Axis::X2,
            variant: Variant::Perturbation,
            nonlinear: true,
        }
    }

    pub fn full_b() -> Self {
        ModelConfig {
            coupling: false,
            variant: Variant::FullB,
            ..ModelConfig::perturbation()
        }
    }

    pub fn navier_stokes_only() -> Self {
        ModelConfig {
            coupling: false,
            variant: Variant::NavierStokesOnly,
            ..ModelConfig::perturbation()
        }
    }

    pub fn wu_zhu() -> Self {
        ModelConfig {
            nu: [1.0, 1.0, 0.0],
            eta: [0.0, 0.0, 1.0],
            coupling: true,
            background_axis: Axis::X1,
            variant: Variant::WuZhu,
            nonlinear: true,
        }
    }

    /// Apply the variant-forced settings: navier-stokes-only switches the
    /// coupling off and wu-zhu pins its dissipation masks and background axis.
    pub fn normalized(mut self) -> Self {
        match self.variant {
            Variant::NavierStokesOnly | Variant::FullB => {
                self.coupling = false;
            }
            Variant::WuZhu => {
                self.nu = [1.0, 1.0, 0.0];
                self.eta = [0.0, 0.0, 1.0];
                self.background_axis = Axis::X1;
            }
            Variant::Perturbation => {}
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        for &v in self.nu.iter().chain(self.eta.iter()) {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "dissipation coefficients must be non-negative and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Whether the magnetic field takes part at all.
    pub fn has_b(&self) -> bool {
        self.variant != Variant::NavierStokesOnly
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::perturbation()
    }
}

/// Divergence tolerance (relative to the largest coefficient) accepted by
/// [`State::new`] and maintained by the stepper.
pub const DIV_FREE_TOL: f64 = 1e-10;

/// Blow-up cutoff on ‖u‖²_{H⁴} + ‖b‖²_{H⁴} used by [`run`].
pub const BLOW_UP_ENERGY_CUTOFF: f64 = 1e6;

/// Velocity and magnetic perturbation at a simulation time, both
/// divergence-free.
#[derive(Clone, Debug)]
pub struct State {
    pub u: SpectralVectorField,
    pub b: SpectralVectorField,
    pub t: f64,
}

impl State {
    pub fn new(u: SpectralVectorField, b: SpectralVectorField, t: f64) -> Result<State> {
        u.grid().same_as(b.grid())?;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Config(format!("simulation time must be non-negative, got {t}")));
        }
        for (name, f) in [("u", &u), ("b", &b)] {
            let div = f.divergence_relative();
            if div > DIV_FREE_TOL {
                return Err(Error::Precondition(format!(
                    "field {name} is not divergence-free: relative divergence {div:.3e}"
                )));
            }
        }
        Ok(State { u, b, t })
    }

    pub(crate) fn new_unchecked(u: SpectralVectorField, b: SpectralVectorField, t: f64) -> State {
        State { u, b, t }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }
}

/// Scratch buffers for pseudo-spectral right-hand-side evaluation.
struct Workspace {
    grid: Grid,
    fft: Fft3,
    k: [Vec<f64>; 3],
    cbuf: Vec<Complex64>,
    phys: [Vec<f64>; 12], // u(3), b(3), omega(3), current(3)
    cross_u: [Vec<f64>; 3],
    cross_b: [Vec<f64>; 3],
    spec_tmp: SpectralVectorField,
}

/// Physical-space maxima gathered while evaluating the nonlinear terms,
/// used for the advective CFL check.
#[derive(Clone, Copy, Default)]
struct FieldMaxima {
    u: f64,
    b: f64,
}

impl Workspace {
    fn new(grid: Grid) -> Self {
        let size = grid.size();
        Workspace {
            grid,
            fft: Fft3::new(grid.n()),
            k: [grid.wavenumbers(0), grid.wavenumbers(1), grid.wavenumbers(2)],
            cbuf: vec![Complex64::default(); size],
            phys: std::array::from_fn(|_| vec![0.0; size]),
            cross_u: std::array::from_fn(|_| vec![0.0; size]),
            cross_b: std::array::from_fn(|_| vec![0.0; size]),
            spec_tmp: SpectralVectorField::zeros(grid),
        }
    }

    fn to_phys(&mut self, coeffs: &[Complex64], which: usize) {
        self.cbuf.copy_from_slice(coeffs);
        self.fft.inverse(&mut self.cbuf);
        for (o, c) in self.phys[which].iter_mut().zip(self.cbuf.iter()) {
            *o = c.re;
        }
    }

    /// Inverse-transform one curl component of `v` into `phys[which]`.
    fn curl_comp_to_phys(&mut self, v: &SpectralVectorField, comp: usize, which: usize) {
        let (a, bx) = match comp {
            0 => (1, 2),
            1 => (2, 0),
            _ => (0, 1),
        };
        let va = v[bx].coeffs();
        let vb = v[a].coeffs();
        let n = self.grid.n();
        let mut pos = 0usize;
        for i1 in 0..n[0] {
            for i2 in 0..n[1] {
                for i3 in 0..n[2] {
                    let kk = [self.k[0][i1], self.k[1][i2], self.k[2][i3]];
                    // (curl v)_comp = i (k_a v_b − k_b v_a) with (a, b) the
                    // cyclic pair after comp.
                    let val = kk[a] * va[pos] - kk[bx] * vb[pos];
                    self.cbuf[pos] = Complex64::new(-val.im, val.re); // i * val
                    pos += 1;
                }
            }
        }
        self.fft.inverse(&mut self.cbuf);
        let out = &mut self.phys[which];
        for (o, c) in out.iter_mut().zip(self.cbuf.iter()) {
            *o = c.re;
        }
    }


    /// Explicit (non-stiff) part of the right-hand side: projected rotational
    /// nonlinearity plus the background coupling. Dissipation is not included
    /// here; the stepper applies it through integrating factors.
    fn explicit_rhs(
        &mut self,
        u: &SpectralVectorField,
        b: &SpectralVectorField,
        cfg: &ModelConfig,
        du: &mut SpectralVectorField,
        db: &mut SpectralVectorField,
    ) -> FieldMaxima {
        let size = self.grid.size();
        let has_b = cfg.has_b();
        let mut maxima = FieldMaxima::default();

        if cfg.nonlinear {
            for c in 0..3 {
                self.to_phys(u[c].coeffs(), c);
                self.curl_comp_to_phys(u, c, 6 + c);
                if has_b {
                    self.to_phys(b[c].coeffs(), 3 + c);
                    self.curl_comp_to_phys(b, c, 9 + c);
                }
            }

            let mut max_u_sq = 0.0f64;
            let mut max_b_sq = 0.0f64;
            for p in 0..size {
                let uu = [self.phys[0][p], self.phys[1][p], self.phys[2][p]];
                let ww = [self.phys[6][p], self.phys[7][p], self.phys[8][p]];
                max_u_sq = max_u_sq.max(uu[0] * uu[0] + uu[1] * uu[1] + uu[2] * uu[2]);
                // −(ω × u); the gradient part of u·∇u is annihilated by the
                // projection.
                let mut cu = [
                    -(ww[1] * uu[2] - ww[2] * uu[1]),
                    -(ww[2] * uu[0] - ww[0] * uu[2]),
                    -(ww[0] * uu[1] - ww[1] * uu[0]),
                ];
                if has_b {
                    let bb = [self.phys[3][p], self.phys[4][p], self.phys[5][p]];
                    let hh = [self.phys[9][p], self.phys[10][p], self.phys[11][p]];
                    max_b_sq = max_b_sq.max(bb[0] * bb[0] + bb[1] * bb[1] + bb[2] * bb[2]);
                    cu[0] += hh[1] * bb[2] - hh[2] * bb[1];
                    cu[1] += hh[2] * bb[0] - hh[0] * bb[2];
                    cu[2] += hh[0] * bb[1] - hh[1] * bb[0];
                    // b-equation nonlinearity as ∇×(u×b).
                    self.cross_b[0][p] = uu[1] * bb[2] - uu[2] * bb[1];
                    self.cross_b[1][p] = uu[2] * bb[0] - uu[0] * bb[2];
                    self.cross_b[2][p] = uu[0] * bb[1] - uu[1] * bb[0];
                }
                self.cross_u[0][p] = cu[0];
                self.cross_u[1][p] = cu[1];
                self.cross_u[2][p] = cu[2];
            }
            maxima.u = max_u_sq.sqrt();
            maxima.b = max_b_sq.sqrt();

            for c in 0..3 {
                forward_dealiased_into(
                    &mut self.fft,
                    &self.grid,
                    &mut self.cbuf,
                    &self.cross_u[c],
                    du.component_mut(Axis::ALL[c]).coeffs_mut(),
                );
            }
            if has_b {
                for c in 0..3 {
                    forward_dealiased_into(
                        &mut self.fft,
                        &self.grid,
                        &mut self.cbuf,
                        &self.cross_b[c],
                        self.spec_tmp.component_mut(Axis::ALL[c]).coeffs_mut(),
                    );
                }
                curl_into(&self.grid, &self.k, &self.spec_tmp, db);
            } else {
                zero_vector(db);
            }
        } else {
            zero_vector(du);
            zero_vector(db);
        }

        if cfg.coupling && has_b {
            let a = cfg.background_axis.index();
            let ks = &self.k[a];
            let n = self.grid.n();
            for c in 0..3 {
                let bc = b[c].coeffs();
                let uc = u[c].coeffs();
                let duc = du.component_mut(Axis::ALL[c]).coeffs_mut();
                add_i_k_times(duc, bc, ks, n, a);
                let dbc = db.component_mut(Axis::ALL[c]).coeffs_mut();
                add_i_k_times(dbc, uc, ks, n, a);
            }
        }

        du.leray_project_in_place();
        // Mean gauge: the zero mode of the velocity forcing vanishes exactly.
        for c in 0..3 {
            du.component_mut(Axis::ALL[c]).coeffs_mut()[0] = Complex64::default();
        }
        maxima
    }
}

/// Forward transform physical samples, normalise and truncate by the 2/3 rule.
fn forward_dealiased_into(
    fft: &mut Fft3,
    grid: &Grid,
    cbuf: &mut [Complex64],
    input: &[f64],
    out: &mut [Complex64],
) {
    let scale = 1.0 / grid.size() as f64;
    for (c, &v) in cbuf.iter_mut().zip(input.iter()) {
        *c = Complex64::new(v * scale, 0.0);
    }
    fft.forward(cbuf);
    out.copy_from_slice(cbuf);
    dealias_coeffs(grid, out);
}

fn zero_vector(v: &mut SpectralVectorField) {
    for c in 0..3 {
        v.component_mut(Axis::ALL[c]).coeffs_mut().fill(Complex64::default());
    }
}

/// dst += i k_axis · src, where k_axis varies along storage axis `a`.
fn add_i_k_times(dst: &mut [Complex64], src: &[Complex64], ks: &[f64], n: [usize; 3], a: usize) {
    let mut pos = 0usize;
    for i1 in 0..n[0] {
        for i2 in 0..n[1] {
            for i3 in 0..n[2] {
                let k = ks[match a {
                    0 => i1,
                    1 => i2,
                    _ => i3,
                }];
                let s = src[pos];
                dst[pos] += Complex64::new(-k * s.im, k * s.re);
                pos += 1;
            }
        }
    }
}

fn curl_into(grid: &Grid, k: &[Vec<f64>; 3], src: &SpectralVectorField, dst: &mut SpectralVectorField) {
    let n = grid.n();
    let s = [src[0].coeffs(), src[1].coeffs(), src[2].coeffs()];
    let mut pos = 0usize;
    for i1 in 0..n[0] {
        let ka = k[0][i1];
        for i2 in 0..n[1] {
            let kb = k[1][i2];
            for i3 in 0..n[2] {
                let kc = k[2][i3];
                let w0 = kb * s[2][pos] - kc * s[1][pos];
                let w1 = kc * s[0][pos] - ka * s[2][pos];
                let w2 = ka * s[1][pos] - kb * s[0][pos];
                dst.component_mut(Axis::X1).coeffs_mut()[pos] = Complex64::new(-w0.im, w0.re);
                dst.component_mut(Axis::X2).coeffs_mut()[pos] = Complex64::new(-w1.im, w1.re);
                dst.component_mut(Axis::X3).coeffs_mut()[pos] = Complex64::new(-w2.im, w2.re);
                pos += 1;
            }
        }
    }
}

/// Full right-hand side (explicit terms plus diagonal dissipation) of the
/// configured system. The pressure never appears: it is eliminated by the
/// Leray projection.
pub fn rhs(
    s: &State,
    config: &ModelConfig,
) -> Result<(SpectralVectorField, SpectralVectorField)> {
    s.u.grid().same_as(s.b.grid())?;
    let cfg = config.normalized();
    cfg.validate()?;
    let grid = *s.grid();
    let mut ws = Workspace::new(grid);
    let mut du = SpectralVectorField::zeros(grid);
    let mut db = SpectralVectorField::zeros(grid);
    ws.explicit_rhs(&s.u, &s.b, &cfg, &mut du, &mut db);

    let lam_u = dissipation_symbol(&grid, cfg.nu);
    let lam_b = dissipation_symbol(&grid, cfg.eta);
    for c in 0..3 {
        let uc = s.u[c].coeffs();
        let duc = du.component_mut(Axis::ALL[c]).coeffs_mut();
        for (p, d) in duc.iter_mut().enumerate() {
            *d += uc[p] * lam_u[p];
        }
        if cfg.has_b() {
            let bc = s.b[c].coeffs();
            let dbc = db.component_mut(Axis::ALL[c]).coeffs_mut();
            for (p, d) in dbc.iter_mut().enumerate() {
                *d += bc[p] * lam_b[p];
            }
        }
    }
    Ok((du, db))
}

/// −Σᵢ cᵢ kᵢ² per mode, the diagonal dissipation symbol.
fn dissipation_symbol(grid: &Grid, coeff: [f64; 3]) -> Vec<f64> {
    let n = grid.n();
    let k1 = grid.wavenumbers(0);
    let k2 = grid.wavenumbers(1);
    let k3 = grid.wavenumbers(2);
    let mut out = Vec::with_capacity(grid.size());
    for i1 in 0..n[0] {
        let a = coeff[0] * k1[i1] * k1[i1];
        for i2 in 0..n[1] {
            let ab = a + coeff[1] * k2[i2] * k2[i2];
            for i3 in 0..n[2] {
                out.push(-(ab + coeff[2] * k3[i3] * k3[i3]));
            }
        }
    }
    out
}

/// Integrating-factor RK4 stepper with precomputed dissipation multipliers.
pub struct Stepper {
    grid: Grid,
    config: ModelConfig,
    dt: f64,
    cfl_safety: f64,
    eu_full: Vec<f64>,
    eu_half: Vec<f64>,
    eb_full: Vec<f64>,
    eb_half: Vec<f64>,
    ws: Workspace,
    stage_du: [SpectralVectorField; 4],
    stage_db: [SpectralVectorField; 4],
    arg_u: SpectralVectorField,
    arg_b: SpectralVectorField,
}

impl Stepper {
    pub fn new(grid: Grid, config: ModelConfig, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let cfg = config.normalized();
        cfg.validate()?;
        let lam_u = dissipation_symbol(&grid, cfg.nu);
        let lam_b = dissipation_symbol(&grid, cfg.eta);
        let expv = |lam: &[f64], h: f64| lam.iter().map(|&l| (l * h).exp()).collect::<Vec<f64>>();
        Ok(Stepper {
            grid,
            config: cfg,
            dt,
            cfl_safety: 0.5,
            eu_full: expv(&lam_u, dt),
            eu_half: expv(&lam_u, 0.5 * dt),
            eb_full: expv(&lam_b, dt),
            eb_half: expv(&lam_b, 0.5 * dt),
            ws: Workspace::new(grid),
            stage_du: std::array::from_fn(|_| SpectralVectorField::zeros(grid)),
            stage_db: std::array::from_fn(|_| SpectralVectorField::zeros(grid)),
            arg_u: SpectralVectorField::zeros(grid),
            arg_b: SpectralVectorField::zeros(grid),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Override the CFL safety constant (default 0.5).
    pub fn set_cfl_safety(&mut self, c: f64) {
        self.cfl_safety = c;
    }

    /// Advance one step. Errors with [`Error::BlowUp`] if non-finite
    /// coefficients appear, and with [`Error::Cfl`] if the advective CFL
    /// precondition fails at the step's starting state.
    pub fn step(&mut self, s: &State) -> Result<State> {
        self.grid.same_as(s.grid())?;
        let dt = self.dt;
        let has_b = self.config.has_b();

        // Stage 1 at the base state; physical maxima come out for free.
        let maxima = self.ws.explicit_rhs(
            &s.u,
            &s.b,
            &self.config,
            &mut self.stage_du[0],
            &mut self.stage_db[0],
        );
        if self.config.nonlinear {
            let speed = maxima.u.max(maxima.b).max(1.0);
            if !speed.is_finite() {
                return Err(Error::BlowUp {
                    t: s.t,
                    reason: "non-finite state entering step".to_string(),
                });
            }
            let bound = self.cfl_safety * self.grid.min_spacing() / speed;
            if dt > bound {
                return Err(Error::Cfl { dt, bound });
            }
        }

        // Stage 2: N(E_half (v + dt/2 k1)).
        for c in 0..3 {
            combine_gated(
                &self.eu_half,
                s.u[c].coeffs(),
                0.5 * dt,
                self.stage_du[0][c].coeffs(),
                self.arg_u.component_mut(Axis::ALL[c]).coeffs_mut(),
            );
            if has_b {
                combine_gated(
                    &self.eb_half,
                    s.b[c].coeffs(),
                    0.5 * dt,
                    self.stage_db[0][c].coeffs(),
                    self.arg_b.component_mut(Axis::ALL[c]).coeffs_mut(),
                );
            }
        }
        let (arg_u, arg_b, cfg) = (&self.arg_u, &self.arg_b, &self.config);
        self.ws
            .explicit_rhs(arg_u, arg_b, cfg, &mut self.stage_du[1], &mut self.stage_db[1]);

        // Stage 3: N(E_half v + dt/2 k2).
        for c in 0..3 {
            combine_outside(
                &self.eu_half,
                s.u[c].coeffs(),
                0.5 * dt,
                self.stage_du[1][c].coeffs(),
                self.arg_u.component_mut(Axis::ALL[c]).coeffs_mut(),
            );
            if has_b {
                combine_outside(
                    &self.eb_half,
                    s.b[c].coeffs(),
                    0.5 * dt,
                    self.stage_db[1][c].coeffs(),
                    self.arg_b.component_mut(Axis::ALL[c]).coeffs_mut(),
                );
            }
        }
        let (arg_u, arg_b, cfg) = (&self.arg_u, &self.arg_b, &self.config);
        self.ws
            .explicit_rhs(arg_u, arg_b, cfg, &mut self.stage_du[2], &mut self.stage_db[2]);

        // Stage 4: N(E_full v + dt E_half k3).
        for c in 0..3 {
            combine_two_mult(
                &self.eu_full,
                s.u[c].coeffs(),
                dt,
                &self.eu_half,
                self.stage_du[2][c].coeffs(),
                self.arg_u.component_mut(Axis::ALL[c]).coeffs_mut(),
            );
            if has_b {
                combine_two_mult(
                    &self.eb_full,
                    s.b[c].coeffs(),
                    dt,
                    &self.eb_half,
                    self.stage_db[2][c].coeffs(),
                    self.arg_b.component_mut(Axis::ALL[c]).coeffs_mut(),
                );
            }
        }
        let (arg_u, arg_b, cfg) = (&self.arg_u, &self.arg_b, &self.config);
        self.ws
            .explicit_rhs(arg_u, arg_b, cfg, &mut self.stage_du[3], &mut self.stage_db[3]);

        // Combine: v⁺ = E v + dt/6 (E k1 + 2 E_half (k2 + k3) + k4).
        let mut u_new = SpectralVectorField::zeros(self.grid);
        let mut b_new = if has_b {
            SpectralVectorField::zeros(self.grid)
        } else {
            s.b.clone()
        };
        for c in 0..3 {
            rk_combine(
                &self.eu_full,
                &self.eu_half,
                s.u[c].coeffs(),
                self.stage_du[0][c].coeffs(),
                self.stage_du[1][c].coeffs(),
                self.stage_du[2][c].coeffs(),
                self.stage_du[3][c].coeffs(),
                dt,
                u_new.component_mut(Axis::ALL[c]).coeffs_mut(),
            );
            if has_b {
                rk_combine(
                    &self.eb_full,
                    &self.eb_half,
                    s.b[c].coeffs(),
                    self.stage_db[0][c].coeffs(),
                    self.stage_db[1][c].coeffs(),
                    self.stage_db[2][c].coeffs(),
                    self.stage_db[3][c].coeffs(),
                    dt,
                    b_new.component_mut(Axis::ALL[c]).coeffs_mut(),
                );
            }
        }

        // Defensive re-projection; b stays divergence-free analytically but
        // this guards against slow drift.
        u_new.leray_project_in_place();
        if has_b {
            b_new.leray_project_in_place();
        }

        let t_new = s.t + dt;
        if !u_new.has_finite_coeffs() || !b_new.has_finite_coeffs() {
            return Err(Error::BlowUp {
                t: t_new,
                reason: "non-finite coefficient after step".to_string(),
            });
        }
        Ok(State::new_unchecked(u_new, b_new, t_new))
    }
}

/// out = e ⊙ (a + s·b)
fn combine_gated(e: &[f64], a: &[Complex64], s: f64, b: &[Complex64], out: &mut [Complex64]) {
    for (((o, &ev), &av), &bv) in out.iter_mut().zip(e).zip(a).zip(b) {
        *o = (av + bv * s) * ev;
    }
}

/// out = e ⊙ a + s·b
fn combine_outside(e: &[f64], a: &[Complex64], s: f64, b: &[Complex64], out: &mut [Complex64]) {
    for (((o, &ev), &av), &bv) in out.iter_mut().zip(e).zip(a).zip(b) {
        *o = av * ev + bv * s;
    }
}

/// out = e1 ⊙ a + s·(e2 ⊙ b)
fn combine_two_mult(
    e1: &[f64],
    a: &[Complex64],
    s: f64,
    e2: &[f64],
    b: &[Complex64],
    out: &mut [Complex64],
) {
    for ((((o, &e1v), &av), &e2v), &bv) in out.iter_mut().zip(e1).zip(a).zip(e2).zip(b) {
        *o = av * e1v + bv * (s * e2v);
    }
}

#[allow(clippy::too_many_arguments)]
fn rk_combine(
    e_full: &[f64],
    e_half: &[f64],
    v: &[Complex64],
    k1: &[Complex64],
    k2: &[Complex64],
    k3: &[Complex64],
    k4: &[Complex64],
    dt: f64,
    out: &mut [Complex64],
) {
    let w = dt / 6.0;
    for (p, o) in out.iter_mut().enumerate() {
        let acc = k1[p] * e_full[p] + (k2[p] + k3[p]) * (2.0 * e_half[p]) + k4[p];
        *o = v[p] * e_full[p] + acc * w;
    }
}

/// One integrating-factor RK4 step; convenience wrapper that builds a
/// [`Stepper`] on the fly. Prefer a reused `Stepper` in loops.
pub fn step(s: &State, dt: f64, config: &ModelConfig) -> Result<State> {
    Stepper::new(*s.grid(), *config, dt)?.step(s)
}

#[derive(Clone, Debug)]
pub struct BlowUpRecord {
    pub t: f64,
    pub reason: String,
}

/// Result of [`run`]: sampled energy reports, the last reachable state and,
/// when the integration ended early, the blow-up record. Blow-up is a
/// reportable outcome, not an error.
#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<EnergyReport>,
    pub final_state: State,
    pub blow_up: Option<BlowUpRecord>,
}

/// Integrate from `s0` to `t_end` with fixed step `dt`, sampling diagnostics
/// every `sample_every` steps (the initial state is always sampled, as is the
/// final one). `on_sample` observes each sampled state alongside its report.
pub fn run(
    s0: State,
    t_end: f64,
    dt: f64,
    config: &ModelConfig,
    sample_every: usize,
    form: SobolevForm,
    on_sample: impl FnMut(&State, &EnergyReport),
) -> Result<RunOutcome> {
    let report = EnergyReport::initial(&s0, form);
    run_continued(s0, report, t_end, dt, config, sample_every, on_sample)
}

/// [`run`] with an explicit starting report, for resuming mid-trajectory
/// with previously accumulated integrals. The report must sit at the state's
/// time.
pub fn run_continued(
    s0: State,
    initial_report: EnergyReport,
    t_end: f64,
    dt: f64,
    config: &ModelConfig,
    sample_every: usize,
    mut on_sample: impl FnMut(&State, &EnergyReport),
) -> Result<RunOutcome> {
    if sample_every == 0 {
        return Err(Error::Config("sample_every must be at least 1".to_string()));
    }
    if t_end < s0.t {
        return Err(Error::Config(format!(
            "t_end = {t_end} is before the initial time {}",
            s0.t
        )));
    }
    if (initial_report.t - s0.t).abs() > 1e-9 * s0.t.abs().max(1.0) {
        return Err(Error::Config(format!(
            "initial report at t = {} does not match state time {}",
            initial_report.t, s0.t
        )));
    }
    let steps = ((t_end - s0.t) / dt).round() as u64;

    let mut stepper = Stepper::new(*s0.grid(), *config, dt)?;
    let t0 = s0.t;
    let mut report = initial_report;
    on_sample(&s0, &report);
    let mut reports = vec![report];
    let mut state = s0;
    let mut blow_up = None;

    for i in 1..=steps {
        state = match stepper.step(&state) {
            Ok(next) => next,
            Err(Error::BlowUp { t, reason }) => {
                blow_up = Some(BlowUpRecord { t, reason });
                break;
            }
            Err(other) => return Err(other),
        };
        // Regenerate t from the step count so resumed runs agree with direct
        // ones to rounding.
        state.t = t0 + i as f64 * dt;
        if i % sample_every as u64 == 0 || i == steps {
            report = report.update(&state)?;
            on_sample(&state, &report);
            reports.push(report);
            if report.h4_u + report.h4_b > BLOW_UP_ENERGY_CUTOFF {
                blow_up = Some(BlowUpRecord {
                    t: state.t,
                    reason: format!(
                        "H4 energy {:.3e} exceeded cutoff {BLOW_UP_ENERGY_CUTOFF:.1e}",
                        report.h4_u + report.h4_b
                    ),
                });
                break;
            }
        }
    }

    Ok(RunOutcome {
        reports,
        final_state: state,
        blow_up,
    })
}
