//! Randomized invariants: chart membership, comparison principle,
//! translation invariance and quadrature symmetries.

use abcdlab::atlas::{self, NuB};
use abcdlab::diagnostics::{energy, momentum};
use abcdlab::sim::gaussian_data;
use abcdlab::spectral::{Field, Grid, SpectralOps};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn admissible_chart_points_validate(b in 0.167f64..1.5, frac in 0.0f64..1.0) {
        let interval = atlas::admissible_nu_interval(b);
        prop_assume!(!interval.is_empty());
        // strict interior point of the interval
        let nu = interval.lo + (0.05 + 0.9 * frac) * (interval.hi - interval.lo);
        prop_assume!(interval.contains(nu));
        let p = atlas::from_nu_b(NuB { nu, b });
        prop_assert!(atlas::validate_physical(&p).is_admissible());
        prop_assert!((p.a + p.c - (1.0 / 3.0 - 2.0 * b)).abs() < 1e-14);
    }

    #[test]
    fn dispersive_points_are_admissible_and_dispersion_like(
        b in 0.223f64..1.5,
        frac in 0.0f64..1.0,
    ) {
        let interval = atlas::dispersive_nu_interval(b);
        prop_assume!(!interval.is_empty());
        let nu = interval.lo + (0.05 + 0.9 * frac) * (interval.hi - interval.lo);
        prop_assume!(interval.contains(nu));
        prop_assert!(atlas::admissible_nu_interval(b).contains(nu));
        let n = atlas::normalize(&atlas::from_nu_b(NuB { nu, b })).unwrap();
        prop_assert!(atlas::is_dispersion_like(&n));
    }

    #[test]
    fn selected_offset_interior_and_coefficients_positive(
        b in 0.23f64..1.5,
        frac in 0.05f64..0.95,
    ) {
        let interval = atlas::dispersive_nu_interval(b);
        prop_assume!(!interval.is_empty());
        let nu = interval.lo + frac * (interval.hi - interval.lo);
        prop_assume!(interval.contains(nu));
        let n = atlas::normalize(&atlas::from_nu_b(NuB { nu, b })).unwrap();
        let ab = atlas::select_alpha_beta(&n).unwrap();
        let (a2, a3, a4) = atlas::alpha_beta_bands(&n);
        let off = ab.beta - ab.alpha;
        prop_assert!(a2.contains(off) && a3.contains(off) && a4.contains(off));
        prop_assert!(atlas::virial_coefficients(&n, &ab).all_ab_positive());
    }

    #[test]
    fn helmholtz_comparison_principle(seed in 0u64..1000) {
        use abcdlab::states::{random_nonnegative_field, random_smooth_field};
        use rand::SeedableRng;
        let grid = Grid::new(512, 80.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v = random_smooth_field(&grid, &mut rng);
        let w = v.add_scaled(1.0, &random_nonnegative_field(&grid, &mut rng));
        let iv = ops.helmholtz_inverse(&v);
        let iw = ops.helmholtz_inverse(&w);
        for (x, y) in iv.values().iter().zip(iw.values()) {
            prop_assert!(x - y <= 1e-12);
        }
    }

    #[test]
    fn translation_invariant_diagnostics(center in -20.0f64..20.0) {
        let grid = Grid::new(512, 100.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let n = atlas::NormalizedParameters::from_ac(-1.0, -1.0).unwrap();
        let reference = gaussian_data(&grid, 0.01, 0.02, 5.0, 0.0).unwrap();
        let shifted = gaussian_data(&grid, 0.01, 0.02, 5.0, center).unwrap();
        let e0 = energy(&grid, &ops, &reference, &n);
        let e1 = energy(&grid, &ops, &shifted, &n);
        prop_assert!((e0 - e1).abs() < 1e-12 * e0.abs().max(1e-30), "{e0} vs {e1}");
        let p0 = momentum(&grid, &ops, &reference);
        let p1 = momentum(&grid, &ops, &shifted);
        prop_assert!((p0 - p1).abs() < 1e-12 * p0.abs().max(1e-30), "{p0} vs {p1}");
    }

    #[test]
    fn derivative_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let grid = Grid::new(256, 40.0).unwrap();
        let ops = SpectralOps::new(&grid);
        let f = Field::from_fn(&grid, |x| (-x * x / 18.0).exp());
        let g = Field::from_fn(&grid, |x| x * (-x * x / 25.0).exp());
        let lhs = ops.derivative(&f.scaled(a).add_scaled(b, &g), 1);
        let rhs = ops.derivative(&f, 1).scaled(a).add_scaled(b, &ops.derivative(&g, 1));
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((x - y).abs() < 1e-11);
        }
    }
}
