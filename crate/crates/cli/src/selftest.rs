//! Quick invariant checks with fixed seeds.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_tomo::field::random::{random_field, random_sinogram, without_mean};
use torus_tomo::field::{data_sobolev_norm, sinogram_inner, sobolev_inner, sobolev_norm, weight_build};
use torus_tomo::inversion::{adjoint, adjoint_normalized, invert_filtered, invert_sum};
use torus_tomo::lattice::{band_frequencies, direction_cover, enumerate_directions};
use torus_tomo::regularize::{c_factor, error_bound, regularized_reconstruct, rescaled_to_norm, tikhonov_reconstruct};
use torus_tomo::xray::{forward_direction, forward_sinogram, quadrature_line_integral, GeodesicSpec};
use torus_tomo::{SubspaceFamily, TorusField64, WeightKind, WeightRule64};

use crate::bridge::{bridge_slice, EuclideanSinogram, CENTER};
use crate::error::CliResult;
use crate::experiment::reconstruct_by_slices;
use crate::phantom::PhantomSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.value <= self.threshold
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cover_family(band: i64) -> CliResult<SubspaceFamily> {
    Ok(SubspaceFamily::from_directions(&direction_cover(band))?)
}

fn slice_identity() -> CliResult<f64> {
    let mut r = rng(1);
    let dirs = enumerate_directions(2, 3);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let f: TorusField64 = random_field(2, 8, true, &mut r);
        for v in &dirs {
            let g = forward_direction(&f, v)?;
            for k in band_frequencies(2, 8) {
                let expected = if v.dot(k.as_slice()) == 0 { f.coefficient(&k) } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((g.coefficient(&k) - expected).norm());
            }
            let x = vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)];
            let steps = (16 * v.l1_norm() + 1) as usize;
            let quad = quadrature_line_integral(&f, &GeodesicSpec::line(x.clone(), v)?, steps)?;
            worst = worst.max((quad - g.evaluate(&x)).norm());
        }
    }
    Ok(worst)
}

fn slice_inversion() -> CliResult<f64> {
    let family = cover_family(8)?;
    let f: TorusField64 = random_field(2, 8, true, &mut rng(2));
    let g = forward_sinogram(&f, &family)?;
    Ok(reconstruct_by_slices(&g, &family)?.max_coefficient_diff(&f))
}

fn unitarity() -> CliResult<f64> {
    let family = cover_family(6)?;
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let f: TorusField64 = random_field(2, 6, true, &mut r);
        let g = forward_sinogram(&f, &family)?;
        for s in [-1.0, 0.0, 1.0, 2.0] {
            let nf = sobolev_norm(&f, s);
            worst = worst.max((data_sobolev_norm(&g, s) - nf).abs() / nf);
        }
    }
    Ok(worst)
}

fn rules() -> CliResult<Vec<WeightRule64>> {
    Ok(vec![
        weight_build(WeightKind::CanonicalSingleton, 1, 2, 4, 4)?,
        weight_build(WeightKind::HeightDecay, 1, 3, 2, 2)?,
        weight_build(WeightKind::HeightDecay, 2, 3, 2, 2)?,
    ])
}

fn adjoint_pairing() -> CliResult<f64> {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for w in rules()? {
        let n = w.family().dim();
        for s in [-1.0, 0.0, 1.0] {
            let f: TorusField64 = random_field(n, w.band(), false, &mut r);
            let g = random_sinogram(w.family(), w.band(), false, &mut r);
            let lhs = sinogram_inner(&forward_sinogram(&f, w.family())?, &g, s, &w)?;
            let rhs = sobolev_inner(&f, &adjoint(&g, &w)?, s);
            worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        }
    }
    Ok(worst)
}

fn filtered_inverse() -> CliResult<f64> {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for w in rules()? {
        let f: TorusField64 = random_field(w.family().dim(), w.band(), true, &mut r);
        let g = forward_sinogram(&f, w.family())?;
        worst = worst.max(invert_filtered(&g, &w)?.max_coefficient_diff(&f));
        worst = worst.max(adjoint_normalized(&g, &w)?.max_coefficient_diff(&f));
    }
    Ok(worst)
}

fn summation_inverse() -> CliResult<f64> {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for (n, band) in [(2usize, 6i64), (3, 2)] {
        let h = torus_tomo::field::complete_cover_height(n - 1, n, band)?;
        let family = SubspaceFamily::truncated(n - 1, n, h)?;
        let f = without_mean(&random_field::<f64, _>(n, band, true, &mut r));
        let g = forward_sinogram(&f, &family)?;
        worst = worst.max(invert_sum(&g, &family)?.max_coefficient_diff(&f));
    }
    Ok(worst)
}

fn tikhonov_shrinkage() -> CliResult<f64> {
    let family = cover_family(5)?;
    let f: TorusField64 = random_field(2, 5, true, &mut rng(7));
    let g = forward_sinogram(&f, &family)?;
    let alpha = 0.2;
    let rec = tikhonov_reconstruct(&g, 1.0, 1.0, alpha)?;
    Ok(rec.max_coefficient_diff(&f.scaled(Complex64::new(1.0 / (1.0 + alpha), 0.0))))
}

fn strategy_bound() -> CliResult<f64> {
    let band = 8;
    let family = Arc::new(cover_family(band)?);
    let (s, delta) = (2.0, 2.0);
    let truth = PhantomSpec::PowerLaw { smoothness: delta }.realize(2, band, 18, &mut rng(8))?.field;
    let clean = forward_sinogram(&truth, &family)?;
    let mut r = rng(9);
    let mut worst = 0.0f64;
    for eps in [1e-1, 1e-3, 1e-5] {
        let noise = rescaled_to_norm(&random_sinogram(&family, band, true, &mut r), 0.0, eps);
        let alpha = f64::powf(eps, 0.5).min(2.0 * s / delta - 1.0);
        let rec = regularized_reconstruct(&clean.checked_add(&noise)?, s, alpha)?;
        let err = sobolev_norm(&rec.checked_sub(&truth)?, 0.0);
        worst = worst.max(err / error_bound(alpha, eps, delta, s, 1.0)?);
    }
    Ok(worst)
}

fn bridge_axis_slice() -> CliResult<f64> {
    let band = 32;
    let v = "1,0".parse()?;
    let sino = EuclideanSinogram::disk(&[v], 256, 0.2)?;
    let v = &sino.angles()[0];
    let bridged = bridge_slice(sino.projection(v).expect("inserted"), v, band)?;
    let disk = PhantomSpec::disk(CENTER, 0.2).realize(2, band, 66, &mut rng(0))?.field;
    let direct = forward_direction(&disk, v)?;
    Ok(sobolev_norm(&bridged.checked_sub(&direct)?, 0.0) / sobolev_norm(&direct, 0.0))
}

pub fn run_selftest() -> CliResult<Vec<Check>> {
    Ok(vec![
        Check { name: "slice_identity", value: slice_identity()?, threshold: 1e-10 },
        Check { name: "slice_inversion", value: slice_inversion()?, threshold: 1e-10 },
        Check { name: "unitarity", value: unitarity()?, threshold: 1e-12 },
        Check { name: "adjoint_pairing", value: adjoint_pairing()?, threshold: 1e-10 },
        Check { name: "filtered_inverse", value: filtered_inverse()?, threshold: 1e-12 },
        Check { name: "summation_inverse", value: summation_inverse()?, threshold: 1e-10 },
        Check { name: "tikhonov_shrinkage", value: tikhonov_shrinkage()?, threshold: 1e-10 },
        Check { name: "c_half", value: (c_factor(0.5)? - 0.5).abs(), threshold: 0.0 },
        Check { name: "strategy_bound_ratio", value: strategy_bound()?, threshold: 1.0 },
        Check { name: "bridge_axis_slice", value: bridge_axis_slice()?, threshold: 1.5e-3 },
    ])
}

/// `check,value,threshold,pass` rows.
pub fn checks_csv(checks: &[Check]) -> String {
    let mut out = String::from("check,value,threshold,pass\n");
    for c in checks {
        let _ = writeln!(out, "{},{:e},{:e},{}", c.name, c.value, c.threshold, c.pass());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        let checks = run_selftest().unwrap();
        for c in &checks {
            assert!(c.pass(), "{c:?}");
        }
        assert!(checks_csv(&checks).starts_with("check,value,threshold,pass\nslice_identity,"));
    }
}
