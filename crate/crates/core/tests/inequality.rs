//! Anisotropic-inequality audits: closed-form separable oracle, scaling and
//! permutation invariance, refinement behaviour, the 1D interpolation
//! inequality with its Gaussian and mollified-exponential oracles, and the
//! determinism contract of the Monte Carlo sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use anisomhd::field::SpectralScalarField;
use anisomhd::grid::{Axis, Grid};
use anisomhd::inequality::{
    check_inequality, check_interp_1d, constant_sweep, random_band_limited, InequalityCase,
    InequalityVariant, LineField,
};

fn case_of(
    variant: InequalityVariant,
    axes: [Axis; 3],
    fields: Vec<SpectralScalarField>,
) -> InequalityCase {
    InequalityCase { variant, axes, fields }
}

fn random_fields(grid: Grid, band: i64, seed: u64, count: usize) -> Vec<SpectralScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_band_limited(grid, band, &mut rng).unwrap())
        .collect()
}

#[test]
fn zero_field_gives_zero_ratio() {
    let grid = Grid::cubic(16).unwrap();
    let mut fields = random_fields(grid, 4, 1, 3);
    fields[1] = SpectralScalarField::zeros(grid);
    let r = check_inequality(&case_of(
        InequalityVariant::Triple111,
        [Axis::X1, Axis::X2, Axis::X3],
        fields,
    ))
    .unwrap();
    assert_eq!(r.ratio, 0.0);
    assert_eq!(r.lhs, 0.0);
}

#[test]
fn separable_sines_match_closed_form() {
    // f = g = h = sin(x₁)sin(x₂)sin(x₃): ∫|fgh| = (∫|sin|³)³ = (8/3)³ and
    // every directional norm equals π^{3/2}, so rhs = π^{9/2}.
    let grid = Grid::cubic(32).unwrap();
    let f = SpectralScalarField::from_fn(grid, |x1, x2, x3| x1.sin() * x2.sin() * x3.sin());
    let r = check_inequality(&case_of(
        InequalityVariant::Triple111,
        [Axis::X1, Axis::X2, Axis::X3],
        vec![f.clone(), f.clone(), f],
    ))
    .unwrap();
    let lhs_exact = (8.0f64 / 3.0).powi(3);
    let rhs_exact = std::f64::consts::PI.powf(4.5);
    // |sin|³ is C² at its kinks, so the lattice quadrature converges at
    // fourth order; 64 points per axis leave a few-1e-6 residue.
    assert!(
        (r.lhs - lhs_exact).abs() <= 1e-5 * lhs_exact,
        "lhs {} vs {lhs_exact}",
        r.lhs
    );
    assert!((r.rhs_factor - rhs_exact).abs() <= 1e-10 * rhs_exact);
    assert!(r.ratio > 0.0 && r.ratio < 1.0);
}

#[test]
fn ratio_is_scale_invariant() {
    let grid = Grid::cubic(16).unwrap();
    for variant in InequalityVariant::ALL {
        let fields = random_fields(grid, 4, 7, variant.field_count());
        let base = check_inequality(&case_of(variant, [Axis::X1, Axis::X2, Axis::X3], fields.clone()))
            .unwrap();
        for lambda in [2.0f64, 10.0] {
            let mut scaled = fields.clone();
            scaled[0].scale(lambda);
            let r = check_inequality(&case_of(variant, [Axis::X1, Axis::X2, Axis::X3], scaled))
                .unwrap();
            // lhs and rhs_factor pick up the same power of λ.
            assert!(
                (r.lhs / base.lhs - lambda).abs() <= 1e-10 * lambda,
                "{}: lhs scaling {} vs λ = {lambda}",
                variant.name(),
                r.lhs / base.lhs
            );
            assert!((r.rhs_factor / base.rhs_factor - lambda).abs() <= 1e-10 * lambda);
            assert!((r.ratio - base.ratio).abs() <= 1e-10 * base.ratio);
        }
    }
}

#[test]
fn ratio_is_invariant_under_axis_relabeling() {
    let grid = Grid::cubic(16).unwrap();
    let perm = [1usize, 2, 0]; // new axis i carries old axis perm[i]
    for variant in InequalityVariant::ALL {
        let fields = random_fields(grid, 4, 11, variant.field_count());
        let base = check_inequality(&case_of(variant, [Axis::X1, Axis::X2, Axis::X3], fields.clone()))
            .unwrap();
        let permuted: Vec<SpectralScalarField> =
            fields.iter().map(|f| f.permute_axes(perm).unwrap()).collect();
        // Old axis a now lives at the position l with perm[l] = a.
        let relabel = |a: Axis| {
            let l = perm.iter().position(|&p| p == a.index()).unwrap();
            Axis::ALL[l]
        };
        let axes = [relabel(Axis::X1), relabel(Axis::X2), relabel(Axis::X3)];
        let r = check_inequality(&case_of(variant, axes, permuted)).unwrap();
        assert!(
            (r.ratio - base.ratio).abs() <= 1e-12 * base.ratio,
            "{}: {} vs {}",
            variant.name(),
            r.ratio,
            base.ratio
        );
    }
}

/// Embed a field's coefficients on a finer grid (same trigonometric
/// polynomial, more lattice points).
fn embed(f: &SpectralScalarField, n: usize) -> SpectralScalarField {
    let (fine, vals) = f.to_physical_padded([n, n, n]).unwrap();
    SpectralScalarField::from_physical(fine, &vals).unwrap()
}

#[test]
fn signed_triple_product_integral_is_grid_exact() {
    // Without the absolute value the product of three band-limited fields is
    // itself band-limited, so the lattice quadrature is exact and refining
    // the grid changes nothing.
    let grid = Grid::cubic(16).unwrap();
    let fields = random_fields(grid, 4, 13, 3);
    let signed = |fs: &[SpectralScalarField]| -> f64 {
        let n = fs[0].grid().n()[0] * 2;
        let (fine, a) = fs[0].to_physical_padded([n; 3]).unwrap();
        let (_, b) = fs[1].to_physical_padded([n; 3]).unwrap();
        let (_, c) = fs[2].to_physical_padded([n; 3]).unwrap();
        let dv = fine.volume() / fine.size() as f64;
        a.iter()
            .zip(b.iter())
            .zip(c.iter())
            .map(|((x, y), z)| x * y * z)
            .sum::<f64>()
            * dv
    };
    let coarse = signed(&fields);
    let refined: Vec<SpectralScalarField> = fields.iter().map(|f| embed(f, 24)).collect();
    let fine = signed(&refined);
    let rel = (coarse - fine).abs() / coarse.abs().max(1e-300);
    assert!(rel <= 1e-12, "signed integral refinement defect {rel:.3e}");
}

#[test]
fn absolute_lhs_is_stable_under_refinement() {
    // With the absolute value the integrand kinks at the product's zero set
    // and lattice quadrature converges slowly; measured agreement between
    // the n and 3n/2 evaluations sits at the 1e-3 level, far from the 1e-6
    // the band-limited (signed) case enjoys.
    let grid = Grid::cubic(16).unwrap();
    for seed in [17u64, 18, 19] {
        let fields = random_fields(grid, 4, seed, 3);
        let coarse = check_inequality(&case_of(
            InequalityVariant::Triple111,
            [Axis::X1, Axis::X2, Axis::X3],
            fields.clone(),
        ))
        .unwrap();
        let refined: Vec<SpectralScalarField> = fields.iter().map(|f| embed(f, 24)).collect();
        let fine = check_inequality(&case_of(
            InequalityVariant::Triple111,
            [Axis::X1, Axis::X2, Axis::X3],
            refined,
        ))
        .unwrap();
        let rel = (coarse.lhs - fine.lhs).abs() / fine.lhs;
        assert!(rel <= 2e-3, "seed {seed}: refinement defect {rel:.3e}");
    }
}

#[test]
fn product_l2_lhs_is_exact() {
    // (fg)² is band-limited, so the ProductL2 left side is grid-exact; check
    // against the spectral Parseval value of the dealias-free product.
    let grid = Grid::cubic(16).unwrap();
    let fields = random_fields(grid, 3, 23, 2);
    let r = check_inequality(&case_of(
        InequalityVariant::ProductL2,
        [Axis::X1, Axis::X2, Axis::X3],
        fields.clone(),
    ))
    .unwrap();
    // Independent route: embed on a grid large enough that the plain product
    // is alias-free (band 3+3=6 needs keep ≥ 6, i.e. n ≥ 18), then Parseval.
    let a = embed(&fields[0], 32);
    let b = embed(&fields[1], 32);
    let prod = a.dealiased_product(&b).unwrap();
    let exact = prod.l2_norm_sq().sqrt();
    assert!(
        (r.lhs - exact).abs() <= 1e-11 * exact,
        "ProductL2 lhs {} vs Parseval {exact}",
        r.lhs
    );
}

#[test]
fn mismatched_field_count_is_rejected() {
    let grid = Grid::cubic(16).unwrap();
    let fields = random_fields(grid, 4, 29, 2);
    assert!(check_inequality(&case_of(
        InequalityVariant::Triple111,
        [Axis::X1, Axis::X2, Axis::X3],
        fields
    ))
    .is_err());
    let fields = random_fields(grid, 4, 29, 3);
    assert!(check_inequality(&case_of(
        InequalityVariant::Triple111,
        [Axis::X1, Axis::X1, Axis::X3],
        fields
    ))
    .is_err());
}

#[test]
fn sweep_is_deterministic_bit_for_bit() {
    let grid = Grid::cubic(16).unwrap();
    let a = constant_sweep(InequalityVariant::Triple111, 10, grid, 99).unwrap();
    let b = constant_sweep(InequalityVariant::Triple111, 10, grid, 99).unwrap();
    assert_eq!(a.max_ratio.to_bits(), b.max_ratio.to_bits());
    for (x, y) in a.samples.iter().zip(b.samples.iter()) {
        assert_eq!(x.ratio.to_bits(), y.ratio.to_bits());
        assert_eq!(x.lhs.to_bits(), y.lhs.to_bits());
        assert_eq!(x.seed, y.seed);
    }
}

#[test]
fn sweep_max_is_stable_across_seeds() {
    let grid = Grid::cubic(16).unwrap();
    for variant in InequalityVariant::ALL {
        let a = constant_sweep(variant, 40, grid, 1000).unwrap();
        let b = constant_sweep(variant, 40, grid, 5000).unwrap();
        assert!(a.max_ratio.is_finite() && a.max_ratio > 0.0);
        let ratio = a.max_ratio / b.max_ratio;
        assert!(
            (1.0 / 1.5..=1.5).contains(&ratio),
            "{}: max ratios {} vs {} differ beyond 50%",
            variant.name(),
            a.max_ratio,
            b.max_ratio
        );
    }
}

#[test]
fn sweep_with_zero_samples_is_empty() {
    let grid = Grid::cubic(16).unwrap();
    let out = constant_sweep(InequalityVariant::Quadruple, 0, grid, 7).unwrap();
    assert!(out.samples.is_empty());
    assert_eq!(out.max_ratio, 0.0);
}

#[test]
fn interp_zero_field_gives_zero() {
    let f = LineField::from_fn(64, -10.0, 20.0, |_| 0.0).unwrap();
    let r = check_interp_1d(&f).unwrap();
    assert_eq!(r.ratio, 0.0);
}

#[test]
fn interp_gaussian_matches_closed_form() {
    // For e^{−x²}: ‖f‖ = ‖f′‖ = (π/2)^{1/4}, max = 1, so the ratio against
    // √2‖f‖^{1/2}‖f′‖^{1/2} is 1/(√2 (π/2)^{1/4}) ≈ 0.6316.
    let f = LineField::from_fn(2048, -20.0, 40.0, |x| (-x * x).exp()).unwrap();
    let r = check_interp_1d(&f).unwrap();
    let quarter = (std::f64::consts::PI / 2.0).powf(0.25);
    assert!((r.lhs - 1.0).abs() < 1e-12);
    let exact_ratio = 1.0 / (std::f64::consts::SQRT_2 * quarter);
    assert!(
        (r.ratio - exact_ratio).abs() <= 1e-6,
        "ratio {} vs closed form {exact_ratio}",
        r.ratio
    );
    assert!((r.ratio - 0.632).abs() <= 1e-3);
}

#[test]
fn interp_rejects_unsupported_fields() {
    // cos(πx/L) is order-one at the interval ends.
    let f = LineField::from_fn(256, -10.0, 20.0, |x| (std::f64::consts::PI * x / 20.0).cos())
        .unwrap();
    assert!(check_interp_1d(&f).is_err());
}

/// C¹ mollification of e^{−a|x|}: Gaussian cap of width δ glued at ±δ.
fn mollified_exponential(a: f64, delta: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let ax = x.abs();
        if ax >= delta {
            (-a * ax).exp()
        } else {
            (-a * delta / 2.0).exp() * (-a * x * x / (2.0 * delta)).exp()
        }
    }
}

/// Dense-Simpson oracle for ∫g over [−L/2, L/2] with 2·half+1 points.
fn simpson(g: impl Fn(f64) -> f64, half_width: f64, half: usize) -> f64 {
    let n = 2 * half;
    let h = 2.0 * half_width / n as f64;
    let mut acc = g(-half_width) + g(half_width);
    for i in 1..n {
        let x = -half_width + i as f64 * h;
        acc += g(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn mollified_exponential_family_approaches_the_sharp_constant() {
    // e^{−a|x|} is extremal for ‖f‖∞ ≤ ‖f‖^{1/2}‖f′‖^{1/2} (constant 1). As
    // the mollification sharpens the normalised ratio √2·(lhs/rhs) climbs to
    // 1 from below; the reported ratio itself climbs to 1/√2, the supremum
    // once the paper's √2 is kept on the right-hand side.
    let a = 2.0;
    let deltas = [0.8, 0.4, 0.2, 0.1, 0.05];
    let mut prev = 0.0f64;
    for &delta in &deltas {
        let f = mollified_exponential(a, delta);
        let line = LineField::from_fn(16384, -20.0, 40.0, &f).unwrap();
        let r = check_interp_1d(&line).unwrap();

        // Piecewise-analytic oracle via dense quadrature of f and f'.
        let df = move |x: f64| {
            let ax = x.abs();
            if ax >= delta {
                -a * x.signum() * (-a * ax).exp()
            } else {
                -(a * x / delta) * (-a * delta / 2.0).exp() * (-a * x * x / (2.0 * delta)).exp()
            }
        };
        let norm = simpson(|x| f(x) * f(x), 20.0, 400_000).sqrt();
        let dnorm = simpson(move |x| df(x) * df(x), 20.0, 400_000).sqrt();
        let oracle_ratio =
            f(0.0) / (std::f64::consts::SQRT_2 * norm.sqrt() * dnorm.sqrt());
        assert!(
            (r.ratio - oracle_ratio).abs() <= 1e-5,
            "δ = {delta}: spectral {} vs oracle {oracle_ratio}",
            r.ratio
        );

        let normalized = std::f64::consts::SQRT_2 * r.ratio;
        assert!(normalized < 1.0, "δ = {delta}: normalised ratio {normalized} must stay below 1");
        assert!(
            normalized > prev,
            "δ = {delta}: ratios must increase as the kink sharpens ({normalized} after {prev})"
        );
        prev = normalized;
    }
    assert!(prev > 0.95, "sharpest member should approach 1, got {prev}");
}
