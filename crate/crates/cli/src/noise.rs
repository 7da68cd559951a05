//! Data-space noise of prescribed norm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use torus_tomo::field::random::random_sinogram;
use torus_tomo::regularize::rescaled_to_norm;
use torus_tomo::{SubspaceFamily, TorusSinogram64};

use crate::error::CliResult;

/// A real noise sinogram over `family` with `‖noise‖_{H^t(Tⁿ×Q)} = ε`.
/// Values are drawn per `(k, A)` with `A ⊥ k`, so the noise obeys the
/// support rule but not the cross-slice consistency of the range.
pub fn noise_sinogram(family: &SubspaceFamily, band: i64, eps: f64, t: f64, seed: u64) -> TorusSinogram64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: TorusSinogram64 = random_sinogram(family, band, true, &mut rng);
    rescaled_to_norm(&raw, t, eps)
}

/// `g + noise` with the noise of [`noise_sinogram`]; `ε = 0` returns `g`.
pub fn add_noise(g: &TorusSinogram64, family: &SubspaceFamily, eps: f64, t: f64, seed: u64) -> CliResult<TorusSinogram64> {
    if eps == 0.0 {
        return Ok(g.clone());
    }
    let noise = noise_sinogram(family, g.band(), eps, t, seed);
    Ok(g.checked_add(&noise)?)
}

/// Noise norm in the unweighted data space, for reporting.
pub fn noise_level(noisy: &TorusSinogram64, clean: &TorusSinogram64, t: f64) -> CliResult<f64> {
    let diff = noisy.checked_sub(clean)?;
    Ok(torus_tomo::field::data_sobolev_norm(&diff, t))
}
