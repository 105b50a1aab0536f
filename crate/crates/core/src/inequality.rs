//! Numerical audits of the anisotropic product inequalities and the 1D
//! interpolation inequality, with empirical constant estimation.
//!
//! Each case computes the left-hand integral by quadrature and the product
//! of directional norms on the right without any constant; the reported
//! ratio lhs/rhs is an empirical sample of the implicit constant. On the
//! periodic box the constants may differ from the whole-space ones; only
//! finiteness and grid-stability are asserted by the test suite.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::fft::fft_1d;
use crate::field::SpectralScalarField;
use crate::grid::{Axis, Grid, TWO_PI};

/// The four displayed anisotropic inequalities, top to bottom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InequalityVariant {
    /// ∫|fgh| ≲ ∏ ‖·‖^{1/2}‖∂·‖^{1/2} with one distinct axis per factor.
    Triple111,
    /// ∫|fgh| ≲ (quarter powers of f with ∂ᵢ, ∂ⱼ, ∂ᵢ∂ⱼ) · ‖g‖^{1/2}‖∂ₖg‖^{1/2} · ‖h‖.
    TripleMixed,
    /// ‖fg‖_{L²} ≲ (quarter powers of f) · ‖g‖^{1/2}‖∂ₖg‖^{1/2}.
    ProductL2,
    /// ∫|fghv| ≲ (quarter powers of f and g) · ‖h‖^{1/2}‖∂ₖh‖^{1/2} · ‖v‖^{1/2}‖∂ₖv‖^{1/2}.
    Quadruple,
}

impl InequalityVariant {
    pub const ALL: [InequalityVariant; 4] = [
        InequalityVariant::Triple111,
        InequalityVariant::TripleMixed,
        InequalityVariant::ProductL2,
        InequalityVariant::Quadruple,
    ];

    pub fn field_count(self) -> usize {
        match self {
            InequalityVariant::Triple111 | InequalityVariant::TripleMixed => 3,
            InequalityVariant::ProductL2 => 2,
            InequalityVariant::Quadruple => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InequalityVariant::Triple111 => "triple-111",
            InequalityVariant::TripleMixed => "triple-mixed",
            InequalityVariant::ProductL2 => "product-l2",
            InequalityVariant::Quadruple => "quadruple",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "triple-111" => Ok(InequalityVariant::Triple111),
            "triple-mixed" => Ok(InequalityVariant::TripleMixed),
            "product-l2" => Ok(InequalityVariant::ProductL2),
            "quadruple" => Ok(InequalityVariant::Quadruple),
            other => Err(Error::Config(format!("unknown inequality variant '{other}'"))),
        }
    }
}

/// One inequality instance: the variant, the axis assignment (i, j, k) and
/// the input fields in display order.
#[derive(Clone, Debug)]
pub struct InequalityCase {
    pub variant: InequalityVariant,
    pub axes: [Axis; 3],
    pub fields: Vec<SpectralScalarField>,
}

#[derive(Clone, Copy, Debug)]
pub struct InequalityResult {
    pub lhs: f64,
    /// Product of directional norms, without any constant.
    pub rhs_factor: f64,
    /// lhs / rhs_factor, defined as 0 when both vanish.
    pub ratio: f64,
}

/// L² norm of ∂_{a₁}∂_{a₂}… f, computed spectrally.
fn deriv_norm(f: &SpectralScalarField, axes: &[Axis]) -> f64 {
    let grid = *f.grid();
    let n = grid.n();
    let k = [grid.wavenumbers(0), grid.wavenumbers(1), grid.wavenumbers(2)];
    let mut total = 0.0f64;
    let mut pos = 0usize;
    for i1 in 0..n[0] {
        for i2 in 0..n[1] {
            for i3 in 0..n[2] {
                let idx = [i1, i2, i3];
                let mut w = 1.0;
                for &a in axes {
                    let kk = k[a.index()][idx[a.index()]];
                    w *= kk * kk;
                }
                total += w * f.coeffs()[pos].norm_sqr();
                pos += 1;
            }
        }
    }
    (grid.volume() * total).sqrt()
}

/// The |·|-integrals are not band-limited (the absolute value kinks at
/// zeros); quadrature runs on a lattice oversampled by this factor, which
/// empirically stabilises them.
const LHS_OVERSAMPLE: usize = 2;

fn oversampled(fields: &[&SpectralScalarField]) -> Result<(Grid, Vec<Vec<f64>>)> {
    let grid = *fields[0].grid();
    let n = grid.n();
    let target = [n[0] * LHS_OVERSAMPLE, n[1] * LHS_OVERSAMPLE, n[2] * LHS_OVERSAMPLE];
    let mut out = Vec::with_capacity(fields.len());
    let mut fine = None;
    for f in fields {
        grid.same_as(f.grid())?;
        let (fg, vals) = f.to_physical_padded(target)?;
        fine = Some(fg);
        out.push(vals);
    }
    Ok((fine.unwrap(), out))
}

/// Evaluate one inequality case: lhs by (oversampled) physical quadrature,
/// rhs as the exact product of directional norms.
///
/// Panics if the rhs vanishes while the lhs does not; for the random
/// band-limited inputs used by the sweeps that combination indicates a
/// quadrature bug.
pub fn check_inequality(case: &InequalityCase) -> Result<InequalityResult> {
    let expect = case.variant.field_count();
    if case.fields.len() != expect {
        return Err(Error::Config(format!(
            "variant {} takes {} fields, got {}",
            case.variant.name(),
            expect,
            case.fields.len()
        )));
    }
    let [i, j, k] = case.axes;
    if i == j || j == k || i == k {
        return Err(Error::Config("axes (i, j, k) must be pairwise distinct".to_string()));
    }

    let refs: Vec<&SpectralScalarField> = case.fields.iter().collect();
    let (fine, phys) = oversampled(&refs)?;
    let dv = fine.volume() / fine.size() as f64;

    let lhs = match case.variant {
        InequalityVariant::Triple111 | InequalityVariant::TripleMixed => {
            let (f, g, h) = (&phys[0], &phys[1], &phys[2]);
            let mut s = 0.0f64;
            for p in 0..f.len() {
                s += (f[p] * g[p] * h[p]).abs();
            }
            s * dv
        }
        InequalityVariant::ProductL2 => {
            let (f, g) = (&phys[0], &phys[1]);
            let mut s = 0.0f64;
            for p in 0..f.len() {
                let fg = f[p] * g[p];
                s += fg * fg;
            }
            (s * dv).sqrt()
        }
        InequalityVariant::Quadruple => {
            let (f, g, h, v) = (&phys[0], &phys[1], &phys[2], &phys[3]);
            let mut s = 0.0f64;
            for p in 0..f.len() {
                s += (f[p] * g[p] * h[p] * v[p]).abs();
            }
            s * dv
        }
    };

    let q = |f: &SpectralScalarField| -> f64 {
        // Quarter-power group ‖f‖^{1/4}‖∂ᵢf‖^{1/4}‖∂ⱼf‖^{1/4}‖∂ᵢ∂ⱼf‖^{1/4}.
        (deriv_norm(f, &[])
            * deriv_norm(f, &[i])
            * deriv_norm(f, &[j])
            * deriv_norm(f, &[i, j]))
        .powf(0.25)
    };
    let half = |f: &SpectralScalarField, a: Axis| -> f64 {
        (deriv_norm(f, &[]) * deriv_norm(f, &[a])).sqrt()
    };

    let rhs_factor = match case.variant {
        InequalityVariant::Triple111 => {
            half(&case.fields[0], i) * half(&case.fields[1], j) * half(&case.fields[2], k)
        }
        InequalityVariant::TripleMixed => {
            q(&case.fields[0]) * half(&case.fields[1], k) * deriv_norm(&case.fields[2], &[])
        }
        InequalityVariant::ProductL2 => q(&case.fields[0]) * half(&case.fields[1], k),
        InequalityVariant::Quadruple => {
            q(&case.fields[0]) * q(&case.fields[1]) * half(&case.fields[2], k) * half(&case.fields[3], k)
        }
    };

    let ratio = if rhs_factor == 0.0 {
        assert!(
            lhs == 0.0,
            "inequality rhs vanished with lhs = {lhs}: quadrature or degenerate input bug"
        );
        0.0
    } else {
        lhs / rhs_factor
    };
    Ok(InequalityResult { lhs, rhs_factor, ratio })
}

/// Hermitian-symmetric field with i.i.d. complex-Gaussian coefficients in the
/// band |mᵢ| ≤ band, zero mean (the k = 0 mode is excluded: on the torus the
/// directional norms of a constant vanish and the inequality degenerates).
pub fn random_band_limited(
    grid: Grid,
    band: i64,
    rng: &mut impl Rng,
) -> Result<SpectralScalarField> {
    let n = grid.n();
    let max_band = (n.iter().copied().min().unwrap() / 2 - 1) as i64;
    if band < 1 || band > max_band {
        return Err(Error::Config(format!(
            "band must lie in [1, {max_band}] for this grid, got {band}"
        )));
    }
    let mut f = SpectralScalarField::zeros(grid);
    for m1 in -band..=band {
        for m2 in -band..=band {
            for m3 in -band..=band {
                if m1 == 0 && m2 == 0 && m3 == 0 {
                    continue;
                }
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let idx = grid.flat(
                    grid.index_of_mode(0, m1),
                    grid.index_of_mode(1, m2),
                    grid.index_of_mode(2, m3),
                );
                f.coeffs_mut()[idx] = Complex64::new(re, im);
            }
        }
    }
    f.symmetrize();
    Ok(f)
}

#[derive(Clone, Copy, Debug)]
pub struct SweepSample {
    pub index: usize,
    pub seed: u64,
    pub lhs: f64,
    pub rhs_factor: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub variant: InequalityVariant,
    pub samples: Vec<SweepSample>,
    pub max_ratio: f64,
    /// Counts of ratios over `histogram.len()` equal buckets spanning
    /// [0, max_ratio].
    pub histogram: Vec<usize>,
}

pub const SWEEP_CSV_HEADER: &str = "sample_index,seed,lhs,rhs_factor,ratio";

impl SweepSample {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.index, self.seed, self.lhs, self.rhs_factor, self.ratio
        )
    }
}

/// Monte Carlo sweep of one inequality variant over random band-limited
/// fields (band n/4). Deterministic for a given seed: sample s uses seed + s,
/// and the max is folded in sample order.
pub fn constant_sweep(
    variant: InequalityVariant,
    n_samples: usize,
    grid: Grid,
    seed: u64,
) -> Result<SweepOutcome> {
    let band = ((grid.n().iter().copied().min().unwrap() / 4) as i64).max(1);
    let mut samples = Vec::with_capacity(n_samples);
    let mut max_ratio = 0.0f64;
    for index in 0..n_samples {
        let sample_seed = seed.wrapping_add(index as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        let fields: Vec<SpectralScalarField> = (0..variant.field_count())
            .map(|_| random_band_limited(grid, band, &mut rng))
            .collect::<Result<_>>()?;
        let case = InequalityCase {
            variant,
            axes: [Axis::X1, Axis::X2, Axis::X3],
            fields,
        };
        let r = check_inequality(&case)?;
        max_ratio = max_ratio.max(r.ratio);
        samples.push(SweepSample {
            index,
            seed: sample_seed,
            lhs: r.lhs,
            rhs_factor: r.rhs_factor,
            ratio: r.ratio,
        });
    }
    let mut histogram = vec![0usize; 16];
    if max_ratio > 0.0 {
        for s in &samples {
            let bucket = ((s.ratio / max_ratio) * 16.0).floor() as usize;
            histogram[bucket.min(15)] += 1;
        }
    } else if !samples.is_empty() {
        histogram[0] = samples.len();
    }
    Ok(SweepOutcome {
        variant,
        samples,
        max_ratio,
        histogram,
    })
}

/// A real 1D field sampled on a uniform periodic interval [origin, origin+length).
#[derive(Clone, Debug)]
pub struct LineField {
    origin: f64,
    length: f64,
    values: Vec<f64>,
}

impl LineField {
    pub fn from_fn(n: usize, origin: f64, length: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::Config(format!("n must be even and at least 4, got {n}")));
        }
        if !(length > 0.0) {
            return Err(Error::Config(format!("interval length must be positive, got {length}")));
        }
        let dx = length / n as f64;
        let values = (0..n).map(|i| f(origin + i as f64 * dx)).collect();
        Ok(LineField { origin, length, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InterpCheck {
    /// max |f|
    pub lhs: f64,
    /// √2 ‖f‖^{1/2}_{L²} ‖f′‖^{1/2}_{L²}
    pub rhs: f64,
    pub ratio: f64,
}

/// Check ‖f‖_∞ ≤ √2 ‖f‖^{1/2}‖f′‖^{1/2} for a function effectively supported
/// inside the interval (the periodic wrap point must carry less than 1e-10
/// of the max, otherwise the whole-line reading of the inequality is
/// meaningless).
pub fn check_interp_1d(f: &LineField) -> Result<InterpCheck> {
    let n = f.values.len();
    let max_abs = f.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if max_abs == 0.0 {
        return Ok(InterpCheck { lhs: 0.0, rhs: 0.0, ratio: 0.0 });
    }
    let edge = f.values[0].abs().max(f.values[n - 1].abs());
    if edge > 1e-10 * max_abs {
        return Err(Error::Precondition(format!(
            "field is not supported inside the interval: boundary magnitude {edge:.3e} vs max {max_abs:.3e}"
        )));
    }

    let mut coeffs: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_1d(&mut coeffs, true);
    let scale = 1.0 / n as f64;
    let mut norm_sq = 0.0f64;
    let mut dnorm_sq = 0.0f64;
    for (idx, c) in coeffs.iter().enumerate() {
        let m = if idx < n / 2 { idx as i64 } else { idx as i64 - n as i64 };
        let k = TWO_PI * m as f64 / f.length;
        let mag = (c * scale).norm_sqr();
        norm_sq += mag;
        if m != -(n as i64) / 2 {
            dnorm_sq += k * k * mag;
        }
    }
    norm_sq *= f.length;
    dnorm_sq *= f.length;

    let rhs = std::f64::consts::SQRT_2 * norm_sq.sqrt().sqrt() * dnorm_sq.sqrt().sqrt();
    let ratio = if rhs == 0.0 { 0.0 } else { max_abs / rhs };
    Ok(InterpCheck { lhs: max_abs, rhs, ratio })
}
