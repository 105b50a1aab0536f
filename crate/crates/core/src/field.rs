//! Spectral scalar and vector fields on a periodic box.
//!
//! Fields store the full complex coefficient lattice (not the Hermitian
//! half): twice the memory of a half-spectrum layout, but no index-symmetry
//! bookkeeping. Real-valuedness in physical space corresponds to the
//! Hermitian symmetry coeff(−k) = conj(coeff(k)), which every operation
//! here preserves. Operations return new fields; values are immutable once
//! constructed.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::grid::{Axis, Grid};

#[derive(Clone, Debug)]
pub struct SpectralScalarField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralScalarField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralScalarField {
            grid,
            coeffs: vec![Complex64::default(); grid.size()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.size() {
            return Err(Error::Config(format!(
                "coefficient vector has length {}, grid needs {}",
                coeffs.len(),
                grid.size()
            )));
        }
        Ok(SpectralScalarField { grid, coeffs })
    }

    /// Analyse physical samples (row-major over lattice points) into
    /// coefficients.
    pub fn from_physical(grid: Grid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::Config(format!(
                "sample vector has length {}, grid needs {}",
                values.len(),
                grid.size()
            )));
        }
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut fft = Fft3::new(grid.n());
        fft.forward(&mut data);
        let scale = 1.0 / grid.size() as f64;
        for c in &mut data {
            *c *= scale;
        }
        Ok(SpectralScalarField { grid, coeffs: data })
    }

    /// Sample a function of (x₁, x₂, x₃) on the lattice and analyse it.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.size());
        for i1 in 0..n[0] {
            let x1 = grid.coordinate(0, i1);
            for i2 in 0..n[1] {
                let x2 = grid.coordinate(1, i2);
                for i3 in 0..n[2] {
                    values.push(f(x1, x2, grid.coordinate(2, i3)));
                }
            }
        }
        SpectralScalarField::from_physical(grid, &values).expect("lengths match by construction")
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at signed mode (m₁, m₂, m₃).
    pub fn coeff(&self, m: [i64; 3]) -> Complex64 {
        let i = self.grid.flat(
            self.grid.index_of_mode(0, m[0]),
            self.grid.index_of_mode(1, m[1]),
            self.grid.index_of_mode(2, m[2]),
        );
        self.coeffs[i]
    }

    /// Set the conjugate pair of coefficients at ±m so the field stays real
    /// in physical space. For self-conjugate modes (m = −m) the real part of
    /// `value` is kept.
    pub fn set_mode_pair(&mut self, m: [i64; 3], value: Complex64) {
        let idx = self.grid.flat(
            self.grid.index_of_mode(0, m[0]),
            self.grid.index_of_mode(1, m[1]),
            self.grid.index_of_mode(2, m[2]),
        );
        let n = self.grid.n();
        let neg = |axis: usize, mi: i64| -> i64 {
            let half = n[axis] as i64 / 2;
            if mi == -half {
                -half
            } else {
                -mi
            }
        };
        let mneg = [neg(0, m[0]), neg(1, m[1]), neg(2, m[2])];
        let jdx = self.grid.flat(
            self.grid.index_of_mode(0, mneg[0]),
            self.grid.index_of_mode(1, mneg[1]),
            self.grid.index_of_mode(2, mneg[2]),
        );
        if idx == jdx {
            self.coeffs[idx] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[idx] = value;
            self.coeffs[jdx] = value.conj();
        }
    }

    /// Physical samples on the native lattice.
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        let mut fft = Fft3::new(self.grid.n());
        fft.inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Physical samples on a finer lattice (`target[i] ≥ n[i]`, even) via
    /// zero-padding; exact for the trigonometric polynomial the coefficients
    /// represent.
    pub fn to_physical_padded(&self, target: [usize; 3]) -> Result<(Grid, Vec<f64>)> {
        let n = self.grid.n();
        for i in 0..3 {
            if target[i] < n[i] {
                return Err(Error::Config(format!(
                    "padded target {:?} is smaller than source {:?}",
                    target, n
                )));
            }
        }
        let fine = Grid::new(target, self.grid.lengths())?;
        let mut data = vec![Complex64::default(); fine.size()];
        for i1 in 0..n[0] {
            let m1 = self.grid.mode_of_index(0, i1);
            let j1 = fine.index_of_mode(0, m1);
            for i2 in 0..n[1] {
                let m2 = self.grid.mode_of_index(1, i2);
                let j2 = fine.index_of_mode(1, m2);
                for i3 in 0..n[2] {
                    let m3 = self.grid.mode_of_index(2, i3);
                    data[fine.flat(j1, j2, fine.index_of_mode(2, m3))] =
                        self.coeffs[self.grid.flat(i1, i2, i3)];
                }
            }
        }
        let mut fft = Fft3::new(target);
        fft.inverse(&mut data);
        Ok((fine, data.into_iter().map(|c| c.re).collect()))
    }

    /// Spectral derivative ∂^order / ∂x_axis^order: multiply by (i k)^order.
    /// For odd orders the Nyquist plane along `axis` is zeroed so Hermitian
    /// symmetry survives.
    pub fn derivative(&self, axis: Axis, order: u32) -> Self {
        assert!(order >= 1, "derivative order must be at least 1");
        let a = axis.index();
        let n = self.grid.n();
        let odd = order % 2 == 1;
        // (ik)^order = i^order k^order; i^order cycles with period 4.
        let phase = match order % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let factors: Vec<Complex64> = (0..n[a])
            .map(|idx| {
                if odd && idx == n[a] / 2 {
                    return Complex64::default();
                }
                let k = self.grid.wavenumber(a, idx);
                phase * k.powi(order as i32)
            })
            .collect();

        let mut out = self.coeffs.clone();
        let mut pos = 0usize;
        for i1 in 0..n[0] {
            for i2 in 0..n[1] {
                for i3 in 0..n[2] {
                    let idx = match a {
                        0 => i1,
                        1 => i2,
                        _ => i3,
                    };
                    out[pos] *= factors[idx];
                    pos += 1;
                }
            }
        }
        SpectralScalarField {
            grid: self.grid,
            coeffs: out,
        }
    }

    /// Zero every coefficient with |mᵢ| > nᵢ/3 (the 2/3 dealiasing rule).
    pub fn dealias(&mut self) {
        let grid = self.grid;
        dealias_coeffs(&grid, &mut self.coeffs);
    }

    /// Pointwise product computed in physical space, then truncated by the
    /// 2/3 rule.
    pub fn dealiased_product(&self, other: &Self) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        let mut fft = Fft3::new(self.grid.n());
        let mut a = self.coeffs.clone();
        let mut b = other.coeffs.clone();
        fft.inverse(&mut a);
        fft.inverse(&mut b);
        let scale = 1.0 / self.grid.size() as f64;
        for (x, y) in a.iter_mut().zip(b.iter()) {
            *x = Complex64::new(x.re * y.re * scale, 0.0);
        }
        fft.forward(&mut a);
        let mut out = SpectralScalarField {
            grid: self.grid,
            coeffs: a,
        };
        out.dealias();
        Ok(out)
    }

    /// Volume-weighted squared L² norm: |box| Σ_k |f̂(k)|² (Parseval).
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// L² inner product |box| Σ_k f̂(k) conj(ĝ(k)).
    pub fn l2_inner(&self, other: &Self) -> Result<Complex64> {
        self.grid.same_as(&other.grid)?;
        let s: Complex64 = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.volume())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from Hermitian symmetry, max_k |c(k) − conj(c(−k))|.
    pub fn hermitian_error(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for i1 in 0..n[0] {
            let j1 = (n[0] - i1) % n[0];
            for i2 in 0..n[1] {
                let j2 = (n[1] - i2) % n[1];
                for i3 in 0..n[2] {
                    let j3 = (n[2] - i3) % n[2];
                    let a = self.coeffs[self.grid.flat(i1, i2, i3)];
                    let b = self.coeffs[self.grid.flat(j1, j2, j3)];
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }

    /// Project onto the Hermitian-symmetric subspace (real fields):
    /// c(k) ← (c(k) + conj(c(−k)))/2.
    pub fn symmetrize(&mut self) {
        let n = self.grid.n();
        let old = self.coeffs.clone();
        for i1 in 0..n[0] {
            let j1 = (n[0] - i1) % n[0];
            for i2 in 0..n[1] {
                let j2 = (n[1] - i2) % n[1];
                for i3 in 0..n[2] {
                    let j3 = (n[2] - i3) % n[2];
                    let a = old[self.grid.flat(i1, i2, i3)];
                    let b = old[self.grid.flat(j1, j2, j3)];
                    self.coeffs[self.grid.flat(i1, i2, i3)] = (a + b.conj()) * 0.5;
                }
            }
        }
    }

    /// Zero the k = 0 coefficient (mean gauge).
    pub fn zero_mean(&mut self) {
        self.coeffs[0] = Complex64::default();
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    /// self += s · other.
    pub fn add_scaled(&mut self, other: &Self, s: f64) -> Result<()> {
        self.grid.same_as(&other.grid)?;
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += b * s;
        }
        Ok(())
    }

    /// Relabel coordinate axes: output(m_{p(1)}, m_{p(2)}, m_{p(3)}) =
    /// input(m₁, m₂, m₃) where `perm[i]` says which source axis lands on
    /// axis i. Requires matching mode counts / lengths across permuted axes.
    pub fn permute_axes(&self, perm: [usize; 3]) -> Result<Self> {
        let n = self.grid.n();
        let len = self.grid.lengths();
        let tn = [n[perm[0]], n[perm[1]], n[perm[2]]];
        let tl = [len[perm[0]], len[perm[1]], len[perm[2]]];
        let tgrid = Grid::new(tn, tl)?;
        let mut out = vec![Complex64::default(); tgrid.size()];
        for i1 in 0..n[0] {
            for i2 in 0..n[1] {
                for i3 in 0..n[2] {
                    let src = [i1, i2, i3];
                    let dst = tgrid.flat(src[perm[0]], src[perm[1]], src[perm[2]]);
                    out[dst] = self.coeffs[self.grid.flat(i1, i2, i3)];
                }
            }
        }
        SpectralScalarField::from_coeffs(tgrid, out)
    }
}

pub(crate) fn dealias_coeffs(grid: &Grid, coeffs: &mut [Complex64]) {
    let n = grid.n();
    let keep = [grid.dealias_limit(0), grid.dealias_limit(1), grid.dealias_limit(2)];
    let mut pos = 0usize;
    for i1 in 0..n[0] {
        let drop1 = grid.mode_of_index(0, i1).abs() > keep[0];
        for i2 in 0..n[1] {
            let drop12 = drop1 || grid.mode_of_index(1, i2).abs() > keep[1];
            for i3 in 0..n[2] {
                if drop12 || grid.mode_of_index(2, i3).abs() > keep[2] {
                    coeffs[pos] = Complex64::default();
                }
                pos += 1;
            }
        }
    }
}

/// Three spectral scalar components on a shared grid.
#[derive(Clone, Debug)]
pub struct SpectralVectorField {
    components: [SpectralScalarField; 3],
}

impl SpectralVectorField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralVectorField {
            components: [
                SpectralScalarField::zeros(grid),
                SpectralScalarField::zeros(grid),
                SpectralScalarField::zeros(grid),
            ],
        }
    }

    pub fn from_components(components: [SpectralScalarField; 3]) -> Result<Self> {
        let g = *components[0].grid();
        g.same_as(components[1].grid())?;
        g.same_as(components[2].grid())?;
        Ok(SpectralVectorField { components })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    #[inline]
    pub fn component(&self, axis: Axis) -> &SpectralScalarField {
        &self.components[axis.index()]
    }

    #[inline]
    pub fn component_mut(&mut self, axis: Axis) -> &mut SpectralScalarField {
        &mut self.components[axis.index()]
    }

    #[inline]
    pub fn components(&self) -> &[SpectralScalarField; 3] {
        &self.components
    }

    /// Leray projection v̂ ← v̂ − k (k·v̂)/|k|²; the k = 0 mode passes through
    /// unchanged. Output is divergence-free.
    pub fn leray_project(&self) -> Self {
        let mut out = self.clone();
        out.leray_project_in_place();
        out
    }

    pub fn leray_project_in_place(&mut self) {
        let grid = *self.grid();
        let n = grid.n();
        let k1: Vec<f64> = grid.wavenumbers(0);
        let k2: Vec<f64> = grid.wavenumbers(1);
        let k3: Vec<f64> = grid.wavenumbers(2);
        let (c0, rest) = self.components.split_at_mut(1);
        let (c1, c2) = rest.split_at_mut(1);
        let v0 = c0[0].coeffs_mut();
        let v1 = c1[0].coeffs_mut();
        let v2 = c2[0].coeffs_mut();
        let mut pos = 0usize;
        for i1 in 0..n[0] {
            let ka = k1[i1];
            for i2 in 0..n[1] {
                let kb = k2[i2];
                for i3 in 0..n[2] {
                    let kc = k3[i3];
                    let ksq = ka * ka + kb * kb + kc * kc;
                    if ksq > 0.0 {
                        let dot = v0[pos] * ka + v1[pos] * kb + v2[pos] * kc;
                        let d = dot / ksq;
                        v0[pos] -= d * ka;
                        v1[pos] -= d * kb;
                        v2[pos] -= d * kc;
                    }
                    pos += 1;
                }
            }
        }
    }

    /// Spectral curl; the output is divergence-free identically
    /// (k · (ik × v̂) = 0).
    pub fn curl(&self) -> Self {
        let grid = *self.grid();
        let n = grid.n();
        let k1: Vec<f64> = grid.wavenumbers(0);
        let k2: Vec<f64> = grid.wavenumbers(1);
        let k3: Vec<f64> = grid.wavenumbers(2);
        let mut out = SpectralVectorField::zeros(grid);
        let v = [
            self.components[0].coeffs(),
            self.components[1].coeffs(),
            self.components[2].coeffs(),
        ];
        let i = Complex64::new(0.0, 1.0);
        let mut pos = 0usize;
        for i1 in 0..n[0] {
            let ka = k1[i1];
            for i2 in 0..n[1] {
                let kb = k2[i2];
                for i3 in 0..n[2] {
                    let kc = k3[i3];
                    let w0 = i * (kb * v[2][pos] - kc * v[1][pos]);
                    let w1 = i * (kc * v[0][pos] - ka * v[2][pos]);
                    let w2 = i * (ka * v[1][pos] - kb * v[0][pos]);
                    out.components[0].coeffs_mut()[pos] = w0;
                    out.components[1].coeffs_mut()[pos] = w1;
                    out.components[2].coeffs_mut()[pos] = w2;
                    pos += 1;
                }
            }
        }
        out
    }

    /// max_k |k · v̂(k)|.
    pub fn divergence_max_abs(&self) -> f64 {
        let grid = *self.grid();
        let n = grid.n();
        let k1: Vec<f64> = grid.wavenumbers(0);
        let k2: Vec<f64> = grid.wavenumbers(1);
        let k3: Vec<f64> = grid.wavenumbers(2);
        let v = [
            self.components[0].coeffs(),
            self.components[1].coeffs(),
            self.components[2].coeffs(),
        ];
        let mut worst = 0.0f64;
        let mut pos = 0usize;
        for i1 in 0..n[0] {
            let ka = k1[i1];
            for i2 in 0..n[1] {
                let kb = k2[i2];
                for i3 in 0..n[2] {
                    let dot = v[0][pos] * ka + v[1][pos] * kb + v[2][pos] * k3[i3];
                    worst = worst.max(dot.norm());
                    pos += 1;
                }
            }
        }
        worst
    }

    /// Largest coefficient magnitude |v̂(k)| (Euclidean over components).
    pub fn max_abs_coeff(&self) -> f64 {
        let v = [
            self.components[0].coeffs(),
            self.components[1].coeffs(),
            self.components[2].coeffs(),
        ];
        let mut worst = 0.0f64;
        for pos in 0..v[0].len() {
            let m = v[0][pos].norm_sqr() + v[1][pos].norm_sqr() + v[2][pos].norm_sqr();
            worst = worst.max(m);
        }
        worst.sqrt()
    }

    /// max_k |k·v̂| relative to the largest coefficient magnitude; 0 for the
    /// zero field.
    pub fn divergence_relative(&self) -> f64 {
        let denom = self.max_abs_coeff();
        if denom == 0.0 {
            0.0
        } else {
            self.divergence_max_abs() / denom
        }
    }

    pub fn is_divergence_free(&self, rel_tol: f64) -> bool {
        self.divergence_relative() <= rel_tol
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.l2_norm_sq()).sum()
    }

    pub fn dealias(&mut self) {
        for c in &mut self.components {
            c.dealias();
        }
    }

    pub fn zero_mean(&mut self) {
        for c in &mut self.components {
            c.zero_mean();
        }
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.components {
            c.scale(s);
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: f64) -> Result<()> {
        for (a, b) in self.components.iter_mut().zip(other.components.iter()) {
            a.add_scaled(b, s)?;
        }
        Ok(())
    }

    pub fn max_hermitian_error(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.hermitian_error())
            .fold(0.0, f64::max)
    }

    pub fn has_finite_coeffs(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.coeffs().iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

impl std::ops::Index<usize> for SpectralVectorField {
    type Output = SpectralScalarField;
    fn index(&self, i: usize) -> &SpectralScalarField {
        &self.components[i]
    }
}
