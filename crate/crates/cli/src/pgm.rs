//! Binary PGM (P5) images with 16-bit samples.

use std::io::Write;

use crate::error::CliResult;

/// Writes a `width × height` row-major image, linearly mapping `[min, max]`
/// onto `0..=65535`. The range is recorded as a `# min=… max=…` comment.
/// A constant image maps to 0.
pub fn write_pgm<W: Write>(mut out: W, width: usize, height: usize, values: &[f64]) -> CliResult<()> {
    assert_eq!(values.len(), width * height, "image size");
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    write!(out, "P5\n# min={min:e} max={max:e}\n{width} {height}\n65535\n")?;
    let mut bytes = Vec::with_capacity(2 * values.len());
    for &x in values {
        let level = if span > 0.0 { ((x - min) / span * 65535.0).round() as u16 } else { 0 };
        bytes.extend_from_slice(&level.to_be_bytes());
    }
    out.write_all(&bytes)?;
    Ok(())
}

/// Image of the real part of planar grid samples (row-major, axis 0
/// slowest) with `x` to the right and `y` up.
pub fn planar_image(samples: &[num_complex::Complex64], grid: usize) -> Vec<f64> {
    let mut img = Vec::with_capacity(grid * grid);
    for row in 0..grid {
        let j = grid - 1 - row;
        img.extend((0..grid).map(|i| samples[i * grid + j].re));
    }
    img
}
