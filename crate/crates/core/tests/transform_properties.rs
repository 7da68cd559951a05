use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_tomo::field::random::{random_field, random_sinogram};
use torus_tomo::field::{
    bessel_norm, data_sobolev_norm, grid_lp_norm, sinogram_inner, sinogram_norm, sobolev_inner, sobolev_norm,
    to_coefficients, to_samples, weight_build,
};
use torus_tomo::inversion::{adjoint, adjoint_normalized, invert_filtered, normal_multiplier, slice_reconstruct_coeff};
use torus_tomo::lattice::{band_frequencies, direction_cover, enumerate_directions, orthogonal_primitive};
use torus_tomo::xray::{forward_direction, forward_sinogram, quadrature_line_integral, GeodesicSpec};
use torus_tomo::{Complex64, LpExponent, SubspaceFamily, TorusField64, WeightKind, WeightRule64};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cover_rule(band: i64) -> WeightRule64 {
    let family = SubspaceFamily::from_directions(&direction_cover(band)).unwrap();
    WeightRule64::over_family(WeightKind::CanonicalSingleton, Arc::new(family), band).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_on_the_grid(seed in any::<u64>(), dim in 1usize..=3, band in 0i64..=4) {
        let f: TorusField64 = random_field(dim, band, seed % 2 == 0, &mut rng(seed));
        let grid = (2 * band + 2) as usize;
        let samples = to_samples(&f, grid).unwrap();
        prop_assert!((sobolev_norm(&f, 0.0) - grid_lp_norm(&samples, LpExponent::Two)).abs() < 1e-12);
        let back = to_coefficients(&samples, dim, grid, band).unwrap();
        prop_assert!(back.max_coefficient_diff(&f) < 1e-12);
    }

    #[test]
    fn real_fields_stay_real(seed in any::<u64>(), band in 0i64..=6) {
        let f: TorusField64 = random_field(2, band, true, &mut rng(seed));
        let samples = to_samples(&f, (2 * band + 3) as usize).unwrap();
        prop_assert!(samples.iter().all(|s| s.im.abs() < 1e-12));
    }

    #[test]
    fn bessel_norm_axioms(seed in any::<u64>(), s in -1.0f64..2.0, scale in -3.0f64..3.0) {
        let mut r = rng(seed);
        let f: TorusField64 = random_field(2, 3, true, &mut r);
        let g: TorusField64 = random_field(2, 3, true, &mut r);
        let sum = f.checked_add(&g).unwrap();
        for p in [LpExponent::One, LpExponent::Two, LpExponent::Infinity] {
            let nf = bessel_norm(&f, s, p, 10).unwrap();
            let ng = bessel_norm(&g, s, p, 10).unwrap();
            prop_assert!(bessel_norm(&sum, s, p, 10).unwrap() <= nf + ng + 1e-12);
            let scaled = bessel_norm(&f.scaled(Complex64::new(scale, 0.0)), s, p, 10).unwrap();
            prop_assert!((scaled - scale.abs() * nf).abs() < 1e-11 * nf.max(1.0));
        }
    }

    #[test]
    fn slice_identity_is_exact(seed in any::<u64>(), vx in -4i64..=4, vy in -4i64..=4) {
        prop_assume!(vx != 0 || vy != 0);
        let v = torus_tomo::lattice::primitive_reduce(&[vx, vy]).unwrap();
        let f: TorusField64 = random_field(2, 5, false, &mut rng(seed));
        let g = forward_direction(&f, &v).unwrap();
        for k in band_frequencies(2, 5) {
            let expected = if v.dot(k.as_slice()) == 0 { f.coefficient(&k) } else { Complex64::new(0.0, 0.0) };
            prop_assert_eq!(g.coefficient(&k), expected);
        }
    }

    #[test]
    fn forward_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut r = rng(seed);
        let family = SubspaceFamily::truncated(1, 3, 1).unwrap();
        let f: TorusField64 = random_field(3, 2, false, &mut r);
        let g: TorusField64 = random_field(3, 2, false, &mut r);
        let (ca, cb) = (Complex64::new(a, 0.0), Complex64::new(b, 0.0));
        let combo = f.scaled(ca).checked_add(&g.scaled(cb)).unwrap();
        let lhs = forward_sinogram(&combo, &family).unwrap();
        let rhs = forward_sinogram(&f, &family).unwrap().scaled(ca)
            .checked_add(&forward_sinogram(&g, &family).unwrap().scaled(cb)).unwrap();
        let diff = lhs.checked_sub(&rhs).unwrap();
        prop_assert!(data_sobolev_norm(&diff, 0.0) < 1e-12);
    }

    #[test]
    fn unitarity_for_the_canonical_weight(seed in any::<u64>()) {
        let band = 5;
        let w = cover_rule(band);
        let f: TorusField64 = random_field(2, band, true, &mut rng(seed));
        let g = forward_sinogram(&f, w.family()).unwrap();
        for s in [-1.0, 0.0, 1.0, 2.0] {
            let nf = sobolev_norm(&f, s);
            prop_assert!((sinogram_norm(&g, s, &w, LpExponent::Two, LpExponent::Two).unwrap() - nf).abs() < 1e-12 * nf.max(1.0));
            prop_assert!((data_sobolev_norm(&g, s) - nf).abs() < 1e-12 * nf.max(1.0));
        }
    }
}

#[test]
fn quadrature_oracle_matches_multiplier() {
    let mut r = rng(7);
    let dirs = enumerate_directions(2, 3);
    for _ in 0..100 {
        let f: TorusField64 = random_field(2, 6, true, &mut r);
        let v = &dirs[r.gen_range(0..dirs.len())];
        let x = vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)];
        let spec = GeodesicSpec::line(x.clone(), v).unwrap();
        let steps = (2 * 6 * v.l1_norm() + 1) as usize;
        let quad = quadrature_line_integral(&f, &spec, steps).unwrap();
        assert!((quad - forward_direction(&f, v).unwrap().evaluate(&x)).norm() < 1e-10);
    }
}

fn certified_rules() -> Vec<WeightRule64> {
    vec![
        weight_build(WeightKind::CanonicalSingleton, 1, 2, 4, 4).unwrap(),
        weight_build(WeightKind::HeightDecay, 1, 2, 4, 4).unwrap(),
        weight_build(WeightKind::HeightDecay, 1, 3, 3, 3).unwrap(),
        weight_build(WeightKind::CanonicalSingleton, 2, 3, 3, 3).unwrap(),
        weight_build(WeightKind::HeightDecay, 2, 3, 3, 3).unwrap(),
    ]
}

#[test]
fn inversion_identities_for_certified_weights() {
    let mut r = rng(11);
    for w in certified_rules() {
        let n = w.family().dim();
        let band = w.band();
        for _ in 0..10 {
            let f: TorusField64 = random_field(n, band, true, &mut r);
            let g = forward_sinogram(&f, w.family()).unwrap();
            assert!(invert_filtered(&g, &w).unwrap().max_coefficient_diff(&f) < 1e-12);
            assert!(adjoint_normalized(&g, &w).unwrap().max_coefficient_diff(&f) < 1e-12);
            let norm = sinogram_norm(&g, 0.5, &w, LpExponent::Two, LpExponent::Two).unwrap();
            assert!(sobolev_norm(&f, 0.5) <= norm / w.lower_bound() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn adjoint_pairs_with_forward() {
    let mut r = rng(12);
    for w in certified_rules() {
        let n = w.family().dim();
        for s in [-1.0, 0.0, 1.0] {
            for _ in 0..10 {
                let f: TorusField64 = random_field(n, w.band(), false, &mut r);
                let g = random_sinogram(w.family(), w.band(), false, &mut r);
                let lhs = sinogram_inner(&forward_sinogram(&f, w.family()).unwrap(), &g, s, &w).unwrap();
                let rhs = sobolev_inner(&f, &adjoint(&g, &w).unwrap(), s);
                assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
            }
        }
    }
}

#[test]
fn normal_operator_is_diagonal() {
    for w in certified_rules() {
        let n = w.family().dim();
        for k in band_frequencies(n, w.band()) {
            let e = TorusField64::harmonic(k.clone(), Complex64::new(1.0, 0.0)).with_band(w.band()).unwrap();
            let back = adjoint(&forward_sinogram(&e, w.family()).unwrap(), &w).unwrap();
            for (j, c) in back.iter() {
                let expected = if *j == k { normal_multiplier(&w, &k).unwrap() } else { 0.0 };
                assert_eq!(*c, Complex64::new(expected, 0.0));
            }
        }
    }
}

#[test]
fn slice_and_filtered_inversion_agree() {
    let band = 6;
    let w = cover_rule(band);
    let f: TorusField64 = random_field(2, band, true, &mut rng(13));
    let g = forward_sinogram(&f, w.family()).unwrap();
    let filtered = invert_filtered(&g, &w).unwrap();
    for k in band_frequencies(2, band) {
        let v = if k.is_zero() { "1,0".parse().unwrap() } else { orthogonal_primitive(&k).unwrap() };
        let slice = g.full_slice(&torus_tomo::RationalSubspace::from_direction(&v));
        let steps = (2 * band * v.l1_norm() + 1) as usize;
        let c = slice_reconstruct_coeff(&slice, &v, &k, steps).unwrap();
        assert!((c - filtered.coefficient(&k)).norm() < 1e-10);
    }
}
