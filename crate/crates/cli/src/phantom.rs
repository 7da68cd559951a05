//! Test objects realized as band-limited torus fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use torus_tomo::field::{sobolev_norm, to_coefficients};
use torus_tomo::lattice::band_frequencies;
use torus_tomo::{FrequencyIndex, TorusField64};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhantomSpec {
    /// `Σ a_j (e^{2πi k_j·x} + e^{−2πi k_j·x})`, or `a_j` alone at `k_j = 0`.
    Harmonic { frequencies: Vec<Vec<i64>>, amplitudes: Vec<f64> },
    /// Indicator of a disk, from its exact Fourier coefficients.
    Disk { center: [f64; 2], radius: f64 },
    /// Sum of `a·exp(1 − 1/(1 − |x − c|²/ρ²))` bumps, sampled on the grid.
    MultiBump { bumps: Vec<Bump> },
    /// Random phases with `|f̂(k)| = ⟨k⟩^{−γ−1}`, scaled to unit `H^γ` norm.
    PowerLaw { smoothness: f64 },
}

#[derive(Clone, Debug)]
pub struct Phantom {
    pub field: TorusField64,
    /// `L²` distance to the untruncated object; zero for band-limited kinds.
    pub truncation_residual: f64,
    /// Mean of the untruncated object when known in closed form.
    pub analytic_mean: Option<f64>,
}

impl PhantomSpec {
    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        PhantomSpec::Disk { center, radius }
    }

    /// Realizes the phantom at band `band` on `dim` axes; `grid` is the
    /// sampling grid for kinds built from samples. Only power-law draws
    /// from `rng`.
    pub fn realize<R: Rng + ?Sized>(&self, dim: usize, band: i64, grid: usize, rng: &mut R) -> CliResult<Phantom> {
        if (grid as i64) < 2 * band + 2 {
            return Err(CliError::BadParams(format!("grid {grid} is below 2K + 2 = {}", 2 * band + 2)));
        }
        match self {
            PhantomSpec::Harmonic { frequencies, amplitudes } => harmonic(dim, band, frequencies, amplitudes),
            PhantomSpec::Disk { center, radius } => {
                need_plane(dim, "disk")?;
                disk(*center, *radius, band)
            }
            PhantomSpec::MultiBump { bumps } => {
                need_plane(dim, "multi-bump")?;
                multi_bump(bumps, band, grid)
            }
            PhantomSpec::PowerLaw { smoothness } => power_law(dim, band, *smoothness, rng),
        }
    }
}

fn need_plane(dim: usize, kind: &str) -> CliResult<()> {
    if dim != 2 {
        return Err(CliError::BadParams(format!("{kind} phantoms live on T^2, got n = {dim}")));
    }
    Ok(())
}

fn exact(field: TorusField64) -> Phantom {
    Phantom { field, truncation_residual: 0.0, analytic_mean: None }
}

fn harmonic(dim: usize, band: i64, frequencies: &[Vec<i64>], amplitudes: &[f64]) -> CliResult<Phantom> {
    if frequencies.len() != amplitudes.len() {
        return Err(CliError::BadParams(format!(
            "{} frequencies but {} amplitudes",
            frequencies.len(),
            amplitudes.len()
        )));
    }
    let mut f = TorusField64::zeros(dim, band);
    for (k, &a) in frequencies.iter().zip(amplitudes) {
        if k.len() != dim {
            return Err(CliError::BadParams(format!("frequency {k:?} is not in Z^{dim}")));
        }
        let k = FrequencyIndex::new(k.clone());
        if k.sup_norm() > band {
            return Err(CliError::BadParams(format!("frequency {k} lies outside band {band}")));
        }
        let c = Complex64::new(a, 0.0);
        if !k.is_zero() {
            f.add_to(k.neg(), c)?;
        }
        f.add_to(k, c)?;
    }
    f.set_real_flag(true);
    Ok(exact(f))
}

/// `J₁(x) = (2π)⁻¹ ∫₀^{2π} cos(τ − x sin τ) dτ` by the trapezoid rule,
/// which converges geometrically once the node count exceeds `|x|`.
pub fn bessel_j1(x: f64) -> f64 {
    let m = x.abs().ceil() as usize + 64;
    let h = 2.0 * PI / m as f64;
    (0..m).map(|i| (i as f64 * h - x * (i as f64 * h).sin()).cos()).sum::<f64>() / m as f64
}

/// `∫_{|x−c|<ρ} e^{−2πik·x} dx = ρ J₁(2πρ|k|)/|k| · e^{−2πik·c}`.
pub fn disk_coefficient(k: &[i64], center: [f64; 2], radius: f64) -> Complex64 {
    let norm = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
    let magnitude = if norm == 0.0 { PI * radius * radius } else { radius * bessel_j1(2.0 * PI * radius * norm) / norm };
    let phase = -2.0 * PI * (k[0] as f64 * center[0] + k[1] as f64 * center[1]);
    Complex64::from_polar(magnitude, phase)
}

fn disk(center: [f64; 2], radius: f64, band: i64) -> CliResult<Phantom> {
    if !(radius > 0.0 && radius < 0.5) {
        return Err(CliError::BadParams(format!("disk radius must lie in (0, 1/2), got {radius}")));
    }
    if center.iter().any(|c| !(0.0..1.0).contains(c)) {
        return Err(CliError::BadParams(format!("disk center must lie in [0,1)^2, got {center:?}")));
    }
    let mut f = TorusField64::zeros(2, band);
    for k in band_frequencies(2, band) {
        let c = disk_coefficient(k.as_slice(), center, radius);
        f.set(k, c)?;
    }
    f.set_real_flag(true);
    let area = PI * radius * radius;
    let captured = sobolev_norm(&f, 0.0);
    Ok(Phantom {
        field: f,
        truncation_residual: (area - captured * captured).max(0.0).sqrt(),
        analytic_mean: Some(area),
    })
}

fn periodic_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn multi_bump(bumps: &[Bump], band: i64, grid: usize) -> CliResult<Phantom> {
    for b in bumps {
        if !(b.radius > 0.0 && b.radius < 0.5) {
            return Err(CliError::BadParams(format!("bump radius must lie in (0, 1/2), got {}", b.radius)));
        }
    }
    let h = 1.0 / grid as f64;
    let mut samples = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            let value: f64 = bumps
                .iter()
                .map(|b| {
                    let dx = periodic_gap(i as f64 * h, b.center[0]);
                    let dy = periodic_gap(j as f64 * h, b.center[1]);
                    let q = (dx * dx + dy * dy) / (b.radius * b.radius);
                    if q < 1.0 {
                        b.amplitude * (1.0 - 1.0 / (1.0 - q)).exp()
                    } else {
                        0.0
                    }
                })
                .sum();
            samples.push(Complex64::new(value, 0.0));
        }
    }
    Ok(exact(to_coefficients(&samples, 2, grid, band)?))
}

fn power_law<R: Rng + ?Sized>(dim: usize, band: i64, smoothness: f64, rng: &mut R) -> CliResult<Phantom> {
    let mut f = TorusField64::zeros(dim, band);
    for k in band_frequencies(dim, band) {
        let magnitude = k.bracket::<f64>().powf(-smoothness - 1.0);
        let minus = k.neg();
        if k.is_zero() {
            f.set(k, Complex64::new(magnitude, 0.0))?;
        } else if k > minus {
            let c = Complex64::from_polar(magnitude, rng.gen_range(0.0..2.0 * PI));
            f.set(minus, c.conj())?;
            f.set(k, c)?;
        }
    }
    f.set_real_flag(true);
    let norm = sobolev_norm(&f, smoothness);
    Ok(exact(f.scaled(Complex64::new(1.0 / norm, 0.0))))
}
