//! Periodic box discretisation and the integer wavenumber lattice.

use std::fmt;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// One of the three coordinate directions, 1-based in the public vocabulary
/// (x₁, x₂, x₃) and 0-based as a storage index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    /// Axis from its 1-based label.
    pub fn from_label(label: u32) -> Result<Axis> {
        match label {
            1 => Ok(Axis::X1),
            2 => Ok(Axis::X2),
            3 => Ok(Axis::X3),
            other => Err(Error::Config(format!("axis label must be 1, 2 or 3, got {other}"))),
        }
    }

    pub fn label(self) -> u32 {
        self.index() as u32 + 1
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.label())
    }
}

/// Uniform periodic grid: `n[i]` modes along axis `i` on a box of side
/// `len[i]`. Wavenumbers along axis `i` are k = 2π m / len[i] for integer
/// mode indices m ∈ [−n/2, n/2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: [usize; 3],
    len: [f64; 3],
}

impl Grid {
    pub fn new(n: [usize; 3], len: [f64; 3]) -> Result<Self> {
        for (i, &ni) in n.iter().enumerate() {
            if ni < 4 || ni % 2 != 0 {
                return Err(Error::Config(format!(
                    "mode count along axis {} must be even and at least 4, got {ni}",
                    i + 1
                )));
            }
        }
        for (i, &li) in len.iter().enumerate() {
            if !(li > 0.0) || !li.is_finite() {
                return Err(Error::Config(format!(
                    "box length along axis {} must be positive and finite, got {li}",
                    i + 1
                )));
            }
        }
        Ok(Grid { n, len })
    }

    /// Cubic grid of `n` modes per axis on the (2π)³ box.
    pub fn cubic(n: usize) -> Result<Self> {
        Grid::new([n, n, n], [TWO_PI; 3])
    }

    #[inline]
    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    #[inline]
    pub fn lengths(&self) -> [f64; 3] {
        self.len
    }

    /// Total number of lattice points / retained modes.
    #[inline]
    pub fn size(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    #[inline]
    pub fn volume(&self) -> f64 {
        self.len[0] * self.len[1] * self.len[2]
    }

    #[inline]
    pub fn spacing(&self, axis: Axis) -> f64 {
        let i = axis.index();
        self.len[i] / self.n[i] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        Axis::ALL
            .iter()
            .map(|&a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Flat storage index of lattice point (i1, i2, i3).
    #[inline]
    pub fn flat(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n[1] + i2) * self.n[2] + i3
    }

    /// Signed mode index m ∈ [−n/2, n/2) for storage index `idx` along `axis`.
    #[inline]
    pub fn mode_of_index(&self, axis: usize, idx: usize) -> i64 {
        let n = self.n[axis];
        if idx < n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    /// Storage index for signed mode m ∈ [−n/2, n/2).
    #[inline]
    pub fn index_of_mode(&self, axis: usize, m: i64) -> usize {
        let n = self.n[axis] as i64;
        debug_assert!(m >= -n / 2 && m < n / 2, "mode {m} out of range for n = {n}");
        if m >= 0 {
            m as usize
        } else {
            (m + n) as usize
        }
    }

    /// Wavenumber 2π m / L at storage index `idx` along `axis`.
    #[inline]
    pub fn wavenumber(&self, axis: usize, idx: usize) -> f64 {
        TWO_PI * self.mode_of_index(axis, idx) as f64 / self.len[axis]
    }

    /// All wavenumbers along one axis, in storage order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis]).map(|i| self.wavenumber(axis, i)).collect()
    }

    /// Largest retained mode index under the 2/3 rule: coefficients with
    /// |m| > n/3 are zeroed after nonlinear products.
    #[inline]
    pub fn dealias_limit(&self, axis: usize) -> i64 {
        (self.n[axis] / 3) as i64
    }

    /// Physical coordinate of lattice point index along `axis` (box is [0, L)).
    #[inline]
    pub fn coordinate(&self, axis: usize, idx: usize) -> f64 {
        self.len[axis] * idx as f64 / self.n[axis] as f64
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: *self,
                got: *other,
            })
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{}x{} box {:.4}x{:.4}x{:.4}",
            self.n[0], self.n[1], self.n[2], self.len[0], self.len[1], self.len[2]
        )
    }
}
