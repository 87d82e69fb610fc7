use std::f64::consts::{PI, TAU};

use phz_core::baselines::{
    residues, unwrap_goldstein, unwrap_irls, unwrap_itoh, unwrap_ls_dct, IrlsConfig,
};
use phz_core::datagen::bicubic_upsample;
use phz_core::io::{decode_grid, encode_grid, export_csv, import_csv};
use phz_core::metrics::{rewrap_error, rsnr, ssim};
use phz_core::phase::{
    adaptive_weights, congruence, forward_gradient, itoh_violations, weighted_energy, wrap,
    wrap_grid, wrap_scalar, wrapped_gradient, WeightBounds,
};
use phz_core::Grid2D;
use proptest::prelude::*;

fn grid(max_side: usize, amp: f64) -> impl Strategy<Value = Grid2D> {
    grid_between(1, max_side, amp)
}

fn grid_between(min_side: usize, max_side: usize, amp: f64) -> impl Strategy<Value = Grid2D> {
    (min_side..=max_side, min_side..=max_side).prop_flat_map(move |(h, w)| {
        prop::collection::vec(-amp..amp, h * w).prop_map(move |d| Grid2D::new(h, w, d).unwrap())
    })
}

/// Smooth surface with gradients well below π per pixel.
fn smooth(h: usize, w: usize, a: f64, b: f64, c: f64) -> Grid2D {
    Grid2D::from_fn(h, w, |i, j| {
        let (y, x) = (i as f64, j as f64);
        a * (0.21 * y + 0.1 * x).sin() + b * 0.3 * x - c * 0.25 * y + 0.02 * x * y
    })
}

fn max_component_diff(a: &phz_core::GradientField, b: &phz_core::GradientField) -> f64 {
    a.gx.max_abs_diff(&b.gx).unwrap().max(a.gy.max_abs_diff(&b.gy).unwrap())
}

proptest! {
    #[test]
    fn wrap_lands_in_half_open_range(x in -1e6f64..1e6) {
        let v = wrap_scalar(x).unwrap();
        prop_assert!((-PI..PI).contains(&v));
        let k = (x - v) / TAU;
        prop_assert!((k - k.round()).abs() < 1e-9 * x.abs().max(1.0));
    }

    #[test]
    fn wrap_is_idempotent(g in grid(12, 200.0)) {
        let once = wrap_grid(&g).unwrap();
        prop_assert_eq!(wrap_grid(&once).unwrap(), once);
    }

    #[test]
    fn wrapped_gradient_ignores_wrapping(g in grid(10, 60.0)) {
        let direct = forward_gradient(&g).wrapped();
        let through = wrapped_gradient(&wrap_grid(&g).unwrap());
        for (a, b) in direct.gx.data().iter().chain(direct.gy.data())
            .zip(through.gx.data().iter().chain(through.gy.data()))
        {
            // both sides live on the circle; compare modulo 2π
            prop_assert!(wrap(a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn itoh_fields_have_exact_wrapped_gradients(
        h in 2usize..20, w in 2usize..20, a in -2.0f64..2.0, b in -3.0f64..3.0, c in -3.0f64..3.0,
    ) {
        let phi = smooth(h, w, a, b, c);
        prop_assume!(itoh_violations(&phi).sum() == 0.0);
        let psi = wrap_grid(&phi).unwrap();
        prop_assert!(max_component_diff(&forward_gradient(&phi), &wrapped_gradient(&psi)) < 1e-9);
        let wts = Grid2D::from_fn(h, w, |i, j| 1.0 + (i * w + j) as f64);
        prop_assert!(weighted_energy(&phi, &psi, &wts).unwrap() < 1e-8);
    }

    #[test]
    fn congruence_rewraps_to_observation(psi in grid(10, PI), shift in grid(10, 80.0)) {
        let psi = wrap_grid(&psi).unwrap();
        let phi_hat = Grid2D::from_fn(psi.height(), psi.width(), |i, j| {
            shift[(i % shift.height(), j % shift.width())]
        });
        let phi = congruence(&psi, &phi_hat).unwrap();
        prop_assert!(wrap_grid(&phi).unwrap().max_abs_diff(&psi).unwrap() < 1e-9);
        prop_assert!(rewrap_error(&phi, &psi).unwrap() < 1e-10 || psi.norm_l2() == 0.0);
    }

    #[test]
    fn adaptive_weights_stay_clamped(
        phi in grid(9, 20.0), eps_min in 0.01f64..1.0, span in 1.0f64..50.0,
    ) {
        let bounds = WeightBounds::new(eps_min, eps_min * span).unwrap();
        let psi = wrap_grid(&phi.map(|v| v * 1.7 + 0.3)).unwrap();
        let w = adaptive_weights(&phi, &psi, bounds).unwrap();
        let (lo, hi) = (1.0 / bounds.eps_max(), 1.0 / bounds.eps_min());
        prop_assert!(w.data().iter().all(|&v| v >= lo && v <= hi));
    }

    #[test]
    fn binary_and_csv_round_trip(g in grid(9, 1e6)) {
        let mut buf = Vec::new();
        encode_grid(&g, &mut buf).unwrap();
        let back = decode_grid(buf.as_slice()).unwrap();
        prop_assert!(g.data().iter().zip(back.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(import_csv(&export_csv(&g)).unwrap(), g);
    }

    #[test]
    fn rsnr_ignores_constant_offsets(g in grid(8, 10.0), c in -1e3f64..1e3) {
        prop_assume!(g.norm_l2() > 1e-3);
        prop_assert!(rsnr(&g.add_scalar(c), &g).unwrap().is_infinite());
    }

    #[test]
    fn ssim_is_symmetric(a in grid_between(11, 16, 5.0), seed in 0u32..1000) {
        let b = Grid2D::from_fn(a.height(), a.width(), |i, j| {
            ((i * 13 + j * 7 + seed as usize) as f64).sin() * 3.0
        });
        prop_assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn bicubic_reproduces_planes_in_the_interior(
        n in 4usize..9, a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, f in 2usize..5,
    ) {
        let m = Grid2D::from_fn(n, n, |i, j| a * i as f64 + b * j as f64 + c);
        let up = bicubic_upsample(&m, n * f, n * f).unwrap();
        for i in 0..n * f {
            for j in 0..n * f {
                let y = (i as f64 + 0.5) / f as f64 - 0.5;
                let x = (j as f64 + 0.5) / f as f64 - 0.5;
                if y < 1.0 || x < 1.0 || y > n as f64 - 2.0 || x > n as f64 - 2.0 {
                    continue;
                }
                prop_assert!((up[(i, j)] - (a * y + b * x + c)).abs() < 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_unwrapper_is_congruent(g in grid(12, 25.0)) {
        let psi = wrap_grid(&g).unwrap();
        let cfg = IrlsConfig { outer_iters: 3, cg_iters: 50, ..IrlsConfig::default() };
        let outs = [
            unwrap_itoh(&psi),
            unwrap_ls_dct(&psi),
            unwrap_goldstein(&psi),
            unwrap_irls(&psi, &cfg).unwrap().0,
        ];
        for out in outs {
            prop_assert!(wrap_grid(&out).unwrap().max_abs_diff(&psi).unwrap() < 1e-9);
        }
    }

    #[test]
    fn goldstein_and_ls_agree_without_residues(
        h in 3usize..24, w in 3usize..24, a in -2.0f64..2.0, b in -3.0f64..3.0, c in -3.0f64..3.0,
    ) {
        let psi = wrap_grid(&smooth(h, w, a, b, c)).unwrap();
        prop_assume!(residues(&psi).count() == 0);
        let diff = unwrap_goldstein(&psi).zip_map(&unwrap_ls_dct(&psi), |x, y| x - y).unwrap();
        prop_assert!((diff.max() - diff.min()) < 1e-6);
    }

    #[test]
    fn residues_survive_smooth_perturbations(
        a in -2.0f64..2.0, b in -3.0f64..3.0, c in -3.0f64..3.0, y0 in 3usize..28, x0 in 3usize..28,
    ) {
        let (h, w) = (32, 32);
        // a vortex between pixel centres; every pixel difference stays below π
        // before and after the perturbation, so loop sums cannot change
        let base = Grid2D::from_fn(h, w, |i, j| {
            (i as f64 - y0 as f64 - 0.5).atan2(j as f64 - x0 as f64 - 0.5) + (i as f64 * 0.4).cos() * 1.5
        });
        let smooth_field = smooth(h, w, a * 0.2, b * 0.2, c * 0.2);
        prop_assume!(itoh_violations(&smooth_field).sum() == 0.0);
        let before = residues(&wrap_grid(&base).unwrap());
        let after = residues(&wrap_grid(&base.zip_map(&smooth_field, |p, q| p + q).unwrap()).unwrap());
        prop_assert_eq!(before.count(), after.count());
        prop_assert_eq!(before.net_charge(), after.net_charge());
    }
}
