//! Dispersion analysis of the linearised system.
//!
//! Eliminating b from the linearised perturbation system yields a damped
//! wave equation for u whose per-mode symbol is the quadratic
//!
//! ```text
//! λ² + (k₁² + k_h²) λ + (k₁² k_h² + k₂²) = 0,     k_h² = k₁² + k₂².
//! ```
//!
//! The same symbol governs b. Root real parts give decay rates; in
//! particular Re λ = −1/2 at k = (0,1,0) shows damping along x₂ with no
//! viscosity acting in that direction.

use num_complex::Complex64;

use crate::dynamics::{ModelConfig, State, Stepper, Variant};
use crate::error::{Error, Result};
use crate::field::SpectralVectorField;
use crate::grid::{Axis, Grid};

/// A wavevector with the two roots of the dispersion quadratic.
#[derive(Clone, Copy, Debug)]
pub struct WaveMode {
    pub k: [f64; 3],
    pub kh_sq: f64,
    /// Root with the larger real part (the slow branch).
    pub lambda_plus: Complex64,
    /// Root with the smaller real part.
    pub lambda_minus: Complex64,
}

/// Roots of λ² + (k₁²+k_h²)λ + (k₁²k_h²+k₂²) = 0 via the product trick: the
/// larger-magnitude root is computed from the quadratic formula (no
/// cancellation, both coefficients are non-negative) and the other from the
/// root product. Near the k₃-axis both coefficients vanish and the naive
/// formula would lose every digit.
pub fn dispersion_roots(k: [f64; 3]) -> WaveMode {
    let k1sq = k[0] * k[0];
    let kh_sq = k1sq + k[1] * k[1];
    let b = k1sq + kh_sq;
    let c = k1sq * kh_sq + k[1] * k[1];
    let disc = b * b - 4.0 * c;
    let (lambda_plus, lambda_minus) = if disc >= 0.0 {
        let big = -(b + disc.sqrt()) * 0.5;
        let small = if big == 0.0 { 0.0 } else { c / big };
        (Complex64::new(small, 0.0), Complex64::new(big, 0.0))
    } else {
        let re = -b * 0.5;
        let im = (-disc).sqrt() * 0.5;
        (Complex64::new(re, im), Complex64::new(re, -im))
    };
    WaveMode {
        k,
        kh_sq,
        lambda_plus,
        lambda_minus,
    }
}

/// Per-mode 2×2 generator of the linearised (nonlinearity off) system acting
/// on one (û, b̂) component pair:
/// [[−Σνᵢkᵢ², i k_a], [i k_a, −Σηᵢkᵢ²]] with a the background axis.
/// Only the perturbation variant with background axis x₂ is supported.
pub fn linear_block(k: [f64; 3], config: &ModelConfig) -> Result<[[Complex64; 2]; 2]> {
    let cfg = config.normalized();
    if cfg.variant != Variant::Perturbation {
        return Err(Error::Config(
            "linear_block is defined for the perturbation variant only".to_string(),
        ));
    }
    if cfg.background_axis != Axis::X2 {
        return Err(Error::Config(
            "linear_block requires background axis x2".to_string(),
        ));
    }
    let du = -(cfg.nu[0] * k[0] * k[0] + cfg.nu[1] * k[1] * k[1] + cfg.nu[2] * k[2] * k[2]);
    let db = -(cfg.eta[0] * k[0] * k[0] + cfg.eta[1] * k[1] * k[1] + cfg.eta[2] * k[2] * k[2]);
    let g = if cfg.coupling {
        Complex64::new(0.0, k[1])
    } else {
        Complex64::default()
    };
    Ok([[Complex64::new(du, 0.0), g], [g, Complex64::new(db, 0.0)]])
}

fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// Closed-form exp(t·M) for a symmetric 2×2 complex matrix M (the linear
/// block): with m = tr M / 2 and Δ² = det-free part, exp(tM) =
/// e^{mt}(cosh(Δt) I + t·sinhc(Δt)(M − mI)).
pub fn propagator(k: [f64; 3], config: &ModelConfig, t: f64) -> Result<[[Complex64; 2]; 2]> {
    let m = linear_block(k, config)?;
    let mean = (m[0][0] + m[1][1]) * 0.5;
    let d = (m[0][0] - m[1][1]) * 0.5;
    let delta = (d * d + m[0][1] * m[1][0]).sqrt();
    let zt = delta * t;
    let ch = zt.cosh();
    let sct = sinhc(zt) * t;
    let scale = (mean * t).exp();
    Ok([
        [scale * (ch + sct * d), scale * (sct * m[0][1])],
        [scale * (sct * m[1][0]), scale * (ch - sct * d)],
    ])
}

/// One row of the decay-rate map over the integer wavenumber lattice.
#[derive(Clone, Copy, Debug)]
pub struct DecayRow {
    pub k: [i64; 3],
    pub re_plus: f64,
    pub im_plus: f64,
    pub re_minus: f64,
    pub im_minus: f64,
}

impl DecayRow {
    pub const CSV_HEADER: &'static str =
        "k1,k2,k3,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.k[0], self.k[1], self.k[2], self.re_plus, self.im_plus, self.re_minus, self.im_minus
        )
    }
}

/// Dispersion roots over an inclusive integer lattice, rows in lexicographic
/// k order.
pub fn decay_map(ranges: [(i64, i64); 3]) -> Vec<DecayRow> {
    let mut rows = Vec::new();
    for k1 in ranges[0].0..=ranges[0].1 {
        for k2 in ranges[1].0..=ranges[1].1 {
            for k3 in ranges[2].0..=ranges[2].1 {
                let mode = dispersion_roots([k1 as f64, k2 as f64, k3 as f64]);
                rows.push(DecayRow {
                    k: [k1, k2, k3],
                    re_plus: mode.lambda_plus.re,
                    im_plus: mode.lambda_plus.im,
                    re_minus: mode.lambda_minus.re,
                    im_minus: mode.lambda_minus.im,
                });
            }
        }
    }
    rows
}

/// Evolve a set of single-mode states with the nonlinearity disabled and
/// compare against the closed-form 2×2 matrix exponential. Returns the worst
/// relative error over modes. Errors if the configuration still has the
/// nonlinearity enabled.
pub fn validate_simulator_linear(
    modes: &[[i64; 3]],
    t_end: f64,
    dt: f64,
    config: &ModelConfig,
) -> Result<f64> {
    let cfg = config.normalized();
    if cfg.nonlinear {
        return Err(Error::Precondition(
            "validate_simulator_linear requires the nonlinearity to be disabled".to_string(),
        ));
    }
    let mut worst = 0.0f64;
    for &m in modes {
        if m == [0, 0, 0] {
            return Err(Error::Config("mode (0,0,0) has no dynamics".to_string()));
        }
        let max_abs = m.iter().map(|v| v.abs()).max().unwrap();
        let n = ((4 * max_abs.max(2)) as usize).next_power_of_two().max(8);
        let grid = Grid::cubic(n)?;

        let kf = [m[0] as f64, m[1] as f64, m[2] as f64];
        let pol = polarization(kf);
        let amp_u = Complex64::new(0.6, 0.8);
        let amp_b = Complex64::new(0.3, -0.4);

        let mut u = SpectralVectorField::zeros(grid);
        let mut b = SpectralVectorField::zeros(grid);
        for c in 0..3 {
            if pol[c] != 0.0 {
                u.component_mut(Axis::ALL[c]).set_mode_pair(m, amp_u * pol[c]);
                b.component_mut(Axis::ALL[c]).set_mode_pair(m, amp_b * pol[c]);
            }
        }
        let state0 = State::new(u, b, 0.0)?;

        let steps = (t_end / dt).round().max(1.0) as u64;
        let t_eff = steps as f64 * dt;
        let mut stepper = Stepper::new(grid, cfg, dt)?;
        let mut state = state0;
        for _ in 0..steps {
            state = stepper.step(&state)?;
        }

        let p = propagator(kf, &cfg, t_eff)?;
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for c in 0..3 {
            let exact_u = (p[0][0] * amp_u + p[0][1] * amp_b) * pol[c];
            let exact_b = (p[1][0] * amp_u + p[1][1] * amp_b) * pol[c];
            let got_u = state.u[c].coeff(m);
            let got_b = state.b[c].coeff(m);
            num += (got_u - exact_u).norm_sqr() + (got_b - exact_b).norm_sqr();
            den += exact_u.norm_sqr() + exact_b.norm_sqr();
        }
        let err = (num / den.max(1e-300)).sqrt();
        worst = worst.max(err);
    }
    Ok(worst)
}

/// A unit vector orthogonal to k, chosen deterministically.
fn polarization(k: [f64; 3]) -> [f64; 3] {
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let e1 = [1.0, 0.0, 0.0];
    let e2 = [0.0, 1.0, 0.0];
    let c1 = cross(k, e1);
    let n1 = (c1[0] * c1[0] + c1[1] * c1[1] + c1[2] * c1[2]).sqrt();
    let (c, n) = if n1 > 1e-12 {
        (c1, n1)
    } else {
        let c2 = cross(k, e2);
        let n2 = (c2[0] * c2[0] + c2[1] * c2[1] + c2[2] * c2[2]).sqrt();
        (c2, n2)
    };
    [c[0] / n, c[1] / n, c[2] / n]
}
