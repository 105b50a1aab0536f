//! Thin 3D complex-to-complex transform layer over rustfft.
//!
//! Conventions: `forward` is the unnormalised DFT with kernel e^{−i2πmj/n};
//! `inverse` uses e^{+i2πmj/n}. With coefficients interpreted as Fourier
//! coefficients f̂(k) of f(x) = Σ f̂(k)e^{ik·x}, `inverse` yields physical
//! samples exactly and `forward`/N is the analysis transform.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().expect("fft planner poisoned");
    if forward {
        p.plan_fft_forward(len)
    } else {
        p.plan_fft_inverse(len)
    }
}

/// Axis-by-axis 3D transform with reusable lane/scratch buffers. Plans are
/// shared process-wide; the struct itself is cheap to construct.
pub(crate) struct Fft3 {
    n: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
    lane: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Fft3 {
    pub fn new(n: [usize; 3]) -> Self {
        let fwd = [plan(n[0], true), plan(n[1], true), plan(n[2], true)];
        let inv = [plan(n[0], false), plan(n[1], false), plan(n[2], false)];
        let max_n = n.iter().copied().max().unwrap();
        let max_scratch = fwd
            .iter()
            .chain(inv.iter())
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap();
        Fft3 {
            n,
            fwd,
            inv,
            lane: vec![Complex64::default(); max_n],
            scratch: vec![Complex64::default(); max_scratch],
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    fn transform(&mut self, data: &mut [Complex64], forward: bool) {
        let [n0, n1, n2] = self.n;
        assert_eq!(data.len(), n0 * n1 * n2, "field length does not match grid");
        let plans = if forward { &self.fwd } else { &self.inv };

        // Axis 2: lanes are contiguous.
        for chunk in data.chunks_exact_mut(n2) {
            plans[2].process_with_scratch(chunk, &mut self.scratch);
        }

        // Axis 1: stride n2 within each i0-slab.
        let lane = &mut self.lane[..n1];
        for i0 in 0..n0 {
            let base = i0 * n1 * n2;
            for i2 in 0..n2 {
                for i1 in 0..n1 {
                    lane[i1] = data[base + i1 * n2 + i2];
                }
                plans[1].process_with_scratch(lane, &mut self.scratch);
                for i1 in 0..n1 {
                    data[base + i1 * n2 + i2] = lane[i1];
                }
            }
        }

        // Axis 0: stride n1*n2.
        let stride = n1 * n2;
        let lane = &mut self.lane[..n0];
        for rem in 0..stride {
            for i0 in 0..n0 {
                lane[i0] = data[i0 * stride + rem];
            }
            plans[0].process_with_scratch(lane, &mut self.scratch);
            for i0 in 0..n0 {
                data[i0 * stride + rem] = lane[i0];
            }
        }
    }
}

/// 1D helpers used by the interpolation-inequality checks.
pub(crate) fn fft_1d(data: &mut [Complex64], forward: bool) {
    let p = plan(data.len(), forward);
    let mut scratch = vec![Complex64::default(); p.get_inplace_scratch_len()];
    p.process_with_scratch(data, &mut scratch);
}
