//! Transform, derivative, projection and dealiased-product checks for the
//! spectral core, including the property-level invariants.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use anisomhd::field::{SpectralScalarField, SpectralVectorField};
use anisomhd::grid::{Axis, Grid, TWO_PI};
use anisomhd::inequality::random_band_limited;

fn max_coeff_diff(a: &SpectralScalarField, b: &SpectralScalarField) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs().iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn random_vector(grid: Grid, band: i64, seed: u64) -> SpectralVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralVectorField::from_components([
        random_band_limited(grid, band, &mut rng).unwrap(),
        random_band_limited(grid, band, &mut rng).unwrap(),
        random_band_limited(grid, band, &mut rng).unwrap(),
    ])
    .unwrap()
}

#[test]
fn roundtrip_zero_field() {
    let grid = Grid::cubic(8).unwrap();
    let f = SpectralScalarField::zeros(grid);
    let back = SpectralScalarField::from_physical(grid, &f.to_physical()).unwrap();
    assert_eq!(max_coeff_diff(&f, &back), 0.0);
}

#[test]
fn roundtrip_single_mode() {
    let grid = Grid::cubic(8).unwrap();
    let mut f = SpectralScalarField::zeros(grid);
    f.set_mode_pair([2, -1, 3], Complex64::new(0.7, -0.2));
    let back = SpectralScalarField::from_physical(grid, &f.to_physical()).unwrap();
    assert!(max_coeff_diff(&f, &back) < 1e-14);
}

#[test]
fn roundtrip_random_band_limited() {
    let grid = Grid::cubic(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random_band_limited(grid, 5, &mut rng).unwrap();
    let back = SpectralScalarField::from_physical(grid, &f.to_physical()).unwrap();
    let rel = max_coeff_diff(&f, &back) / f.max_abs_coeff();
    assert!(rel < 1e-12, "roundtrip relative error {rel}");
}

#[test]
fn derivative_of_constant_is_zero() {
    let grid = Grid::cubic(8).unwrap();
    let f = SpectralScalarField::from_fn(grid, |_, _, _| 3.5);
    for axis in Axis::ALL {
        let d = f.derivative(axis, 1);
        assert!(d.max_abs_coeff() < 1e-14);
    }
}

#[test]
fn second_derivative_of_sin_2x1() {
    // d²/dx₁² sin(2x₁) = −4 sin(2x₁) on the 2π box.
    let grid = Grid::cubic(8).unwrap();
    let f = SpectralScalarField::from_fn(grid, |x1, _, _| (2.0 * x1).sin());
    let d2 = f.derivative(Axis::X1, 2);
    let mut expected = f.clone();
    expected.scale(-4.0);
    assert!(max_coeff_diff(&d2, &expected) < 1e-13);
}

#[test]
fn derivative_composition_matches_higher_order() {
    let grid = Grid::cubic(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_band_limited(grid, 4, &mut rng).unwrap();
    for axis in Axis::ALL {
        let twice = f.derivative(axis, 1).derivative(axis, 1);
        let once = f.derivative(axis, 2);
        let rel = max_coeff_diff(&twice, &once) / once.max_abs_coeff().max(1e-300);
        assert!(rel < 1e-13, "axis {axis}: {rel}");
    }
}

#[test]
fn derivative_scales_with_box_length() {
    // On a box of length 4π the lowest mode has wavenumber 1/2.
    let grid = Grid::new([8, 8, 8], [2.0 * TWO_PI, TWO_PI, TWO_PI]).unwrap();
    let f = SpectralScalarField::from_fn(grid, |x1, _, _| (0.5 * x1).sin());
    let d = f.derivative(Axis::X1, 1);
    let expected = SpectralScalarField::from_fn(grid, |x1, _, _| 0.5 * (0.5 * x1).cos());
    assert!(max_coeff_diff(&d, &expected) < 1e-14);
}

#[test]
fn leray_annihilates_gradients() {
    // v = ∇φ for a random scalar φ projects to zero (k ≠ 0 part).
    let grid = Grid::cubic(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let phi = random_band_limited(grid, 5, &mut rng).unwrap();
    let grad = SpectralVectorField::from_components([
        phi.derivative(Axis::X1, 1),
        phi.derivative(Axis::X2, 1),
        phi.derivative(Axis::X3, 1),
    ])
    .unwrap();
    let projected = grad.leray_project();
    assert!(projected.max_abs_coeff() < 1e-13 * grad.max_abs_coeff().max(1.0));
}

#[test]
fn leray_fixes_divergence_free_fields_and_is_idempotent() {
    let grid = Grid::cubic(16).unwrap();
    let v = random_vector(grid, 5, 23);
    let p1 = v.leray_project();
    let p2 = p1.leray_project();
    let scale = p1.max_abs_coeff();
    for c in 0..3 {
        let d = max_coeff_diff(&p1[c], &p2[c]);
        assert!(d <= 1e-13 * scale, "component {c}: idempotence defect {d}");
    }
    assert!(p1.divergence_relative() <= 1e-12);
}

#[test]
fn leray_passes_zero_mode_through() {
    let grid = Grid::cubic(8).unwrap();
    let mut v = SpectralVectorField::zeros(grid);
    v.component_mut(Axis::X2).set_mode_pair([0, 0, 0], Complex64::new(1.0, 0.0));
    let p = v.leray_project();
    assert_eq!(p.component(Axis::X2).coeff([0, 0, 0]), Complex64::new(1.0, 0.0));
}

#[test]
fn dealiased_product_with_zero_annihilates() {
    let grid = Grid::cubic(8).unwrap();
    let f = SpectralScalarField::from_fn(grid, |x1, x2, _| (x1.cos()) * (x2.sin()));
    let z = SpectralScalarField::zeros(grid);
    let p = f.dealiased_product(&z).unwrap();
    assert!(p.max_abs_coeff() < 1e-15);
}

#[test]
fn cos_squared_expands_by_trig_identity() {
    // cos²(x₁) = 1/2 + cos(2x₁)/2; both output modes survive dealiasing on
    // n₁ = 8 (keep |m| ≤ 2).
    let grid = Grid::cubic(8).unwrap();
    let f = SpectralScalarField::from_fn(grid, |x1, _, _| x1.cos());
    let p = f.dealiased_product(&f).unwrap();
    let expected = SpectralScalarField::from_fn(grid, |x1, _, _| 0.5 + 0.5 * (2.0 * x1).cos());
    assert!(max_coeff_diff(&p, &expected) < 1e-14);
}

#[test]
fn dealiased_product_truncates_high_modes() {
    // Two mode-2 factors produce a mode-4 overtone, outside the dealias ball
    // on n = 8 (keep |m| ≤ 2); only the zero mode survives.
    let grid = Grid::cubic(8).unwrap();
    let f = SpectralScalarField::from_fn(grid, |x1, _, _| (2.0 * x1).cos());
    let p = f.dealiased_product(&f).unwrap();
    let expected = SpectralScalarField::from_fn(grid, |_, _, _| 0.5);
    assert!(max_coeff_diff(&p, &expected) < 1e-14);
}

#[test]
fn parseval_identity() {
    let grid = Grid::cubic(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_band_limited(grid, 5, &mut rng).unwrap();
    let phys = f.to_physical();
    let dv = grid.volume() / grid.size() as f64;
    let physical_norm: f64 = phys.iter().map(|v| v * v).sum::<f64>() * dv;
    let spectral_norm = f.l2_norm_sq();
    let rel = (physical_norm - spectral_norm).abs() / spectral_norm;
    assert!(rel < 1e-12, "Parseval defect {rel}");
}

#[test]
fn l2_norm_of_single_sine() {
    // ‖A sin(x₂)‖²_{L²} = A² (2π)³ / 2.
    let grid = Grid::cubic(8).unwrap();
    let a = 3.0;
    let f = SpectralScalarField::from_fn(grid, |_, x2, _| a * x2.sin());
    let expected = a * a * TWO_PI.powi(3) / 2.0;
    let rel = (f.l2_norm_sq() - expected).abs() / expected;
    assert!(rel < 1e-13);
}

#[test]
fn padded_evaluation_matches_function() {
    let grid = Grid::cubic(8).unwrap();
    let f = SpectralScalarField::from_fn(grid, |x1, x2, x3| {
        (x1.sin()) * (2.0 * x2).cos() + 0.3 * (x3.sin())
    });
    let (fine, vals) = f.to_physical_padded([16, 16, 16]).unwrap();
    let n = fine.n();
    for i1 in (0..n[0]).step_by(3) {
        for i2 in (0..n[1]).step_by(5) {
            for i3 in (0..n[2]).step_by(7) {
                let x1 = fine.coordinate(0, i1);
                let x2 = fine.coordinate(1, i2);
                let x3 = fine.coordinate(2, i3);
                let exact = (x1.sin()) * (2.0 * x2).cos() + 0.3 * (x3.sin());
                let got = vals[fine.flat(i1, i2, i3)];
                assert!((exact - got).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hermitian_symmetry_preserved_by_ops(seed in any::<u64>(), order in 1u32..4) {
        let grid = Grid::cubic(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_band_limited(grid, 2, &mut rng).unwrap();
        let g = random_band_limited(grid, 2, &mut rng).unwrap();
        let scale = f.max_abs_coeff().max(1e-300);
        prop_assert!(f.hermitian_error() <= 1e-13 * scale);
        for axis in Axis::ALL {
            let d = f.derivative(axis, order);
            prop_assert!(d.hermitian_error() <= 1e-12 * d.max_abs_coeff().max(scale));
        }
        let p = f.dealiased_product(&g).unwrap();
        prop_assert!(p.hermitian_error() <= 1e-12 * p.max_abs_coeff().max(1e-300));
        let v = SpectralVectorField::from_components([f, g, p]).unwrap().leray_project();
        prop_assert!(v.max_hermitian_error() <= 1e-12 * v.max_abs_coeff().max(1e-300));
    }

    #[test]
    fn product_commutes(seed in any::<u64>()) {
        let grid = Grid::cubic(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_band_limited(grid, 2, &mut rng).unwrap();
        let g = random_band_limited(grid, 2, &mut rng).unwrap();
        let fg = f.dealiased_product(&g).unwrap();
        let gf = g.dealiased_product(&f).unwrap();
        prop_assert_eq!(max_coeff_diff(&fg, &gf), 0.0);
    }

    #[test]
    fn derivative_commutes_with_projection(seed in any::<u64>()) {
        let grid = Grid::cubic(8).unwrap();
        let v = random_vector(grid, 2, seed);
        for axis in Axis::ALL {
            let a = v.leray_project();
            let da_then = SpectralVectorField::from_components([
                a[0].derivative(axis, 1),
                a[1].derivative(axis, 1),
                a[2].derivative(axis, 1),
            ]).unwrap();
            let dv = SpectralVectorField::from_components([
                v[0].derivative(axis, 1),
                v[1].derivative(axis, 1),
                v[2].derivative(axis, 1),
            ]).unwrap();
            let then_project = dv.leray_project();
            let scale = then_project.max_abs_coeff().max(1e-300);
            for c in 0..3 {
                prop_assert!(max_coeff_diff(&da_then[c], &then_project[c]) <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn parseval_holds_for_random_fields(seed in any::<u64>()) {
        let grid = Grid::cubic(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_band_limited(grid, 2, &mut rng).unwrap();
        let dv = grid.volume() / grid.size() as f64;
        let phys: f64 = f.to_physical().iter().map(|v| v * v).sum::<f64>() * dv;
        let spec = f.l2_norm_sq();
        if spec > 0.0 {
            prop_assert!((phys - spec).abs() / spec < 1e-12);
        }
    }
}
