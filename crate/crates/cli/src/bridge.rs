//! Euclidean parallel-beam sinograms and their conversion to torus data.
//!
//! The object sits inside one fundamental domain, centered at `c = (½, ½)`
//! with support radius `ρ < ½`. For a direction `v` the detector coordinate
//! of a point `y` is `τ = ½ + (y − c)·n`, `n = v^⊥/|v|`, sampled at
//! `τ_i = i/N`. The closed torus geodesic of direction `v` lifts to parallel
//! lines spaced `1/|v|` apart, so the torus datum is `|v|⁻¹` times the sum
//! of the Euclidean projection over those strands.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use torus_tomo::field::enforce_moment_constraint_unweighted;
use torus_tomo::{FrequencyIndex, PrimitiveDirection, RawSinogram, RationalSubspace, TorusField64, TorusSinogram64};

use crate::error::{CliError, CliResult};

pub const CENTER: [f64; 2] = [0.5, 0.5];

#[derive(Clone, Debug, PartialEq)]
pub struct EuclideanSinogram {
    radius: f64,
    offsets: usize,
    angles: Vec<PrimitiveDirection>,
    values: Vec<Vec<f64>>,
}

impl EuclideanSinogram {
    pub fn new(radius: f64, offsets: usize) -> CliResult<Self> {
        if !(radius > 0.0 && radius < 0.5) {
            return Err(CliError::GeometryViolation(radius));
        }
        if offsets == 0 {
            return Err(CliError::Format("need at least one offset".into()));
        }
        Ok(EuclideanSinogram { radius, offsets, angles: Vec::new(), values: Vec::new() })
    }

    /// Adds or replaces the projection at one angle.
    pub fn insert(&mut self, v: PrimitiveDirection, values: Vec<f64>) -> CliResult<()> {
        if v.dim() != 2 {
            return Err(CliError::Format(format!("direction {v} is not planar")));
        }
        if values.len() != self.offsets {
            return Err(CliError::Format(format!("{} values for {} offsets", values.len(), self.offsets)));
        }
        match self.angles.iter().position(|a| *a == v) {
            Some(i) => self.values[i] = values,
            None => {
                self.angles.push(v);
                self.values.push(values);
            }
        }
        Ok(())
    }

    /// Parallel-beam projections of the disk `|y − c| < r`, chord lengths
    /// `2√(r² − (τ − ½)²)`.
    pub fn disk(angles: &[PrimitiveDirection], offsets: usize, r: f64) -> CliResult<Self> {
        let mut sino = Self::new(r, offsets)?;
        let profile: Vec<f64> = (0..offsets)
            .map(|i| {
                let sigma = i as f64 / offsets as f64 - 0.5;
                2.0 * (r * r - sigma * sigma).max(0.0).sqrt()
            })
            .collect();
        for v in angles {
            sino.insert(v.clone(), profile.clone())?;
        }
        Ok(sino)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn offsets(&self) -> usize {
        self.offsets
    }

    pub fn angles(&self) -> &[PrimitiveDirection] {
        &self.angles
    }

    pub fn projection(&self, v: &PrimitiveDirection) -> Option<&[f64]> {
        self.angles.iter().position(|a| a == v).map(|i| self.values[i].as_slice())
    }

    /// Rows `angle_vx,angle_vy,offset,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["angle_vx", "angle_vy", "offset", "value"])?;
        for (v, row) in self.angles.iter().zip(&self.values) {
            let c = v.components();
            for (i, x) in row.iter().enumerate() {
                let tau = i as f64 / self.offsets as f64;
                w.write_record([c[0].to_string(), c[1].to_string(), tau.to_string(), x.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout of [`write_csv`]. Offsets must form the grid
    /// `i/N` for every angle; the support radius is not stored in the file.
    pub fn read_csv<R: Read>(input: R, radius: f64) -> CliResult<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let headers = rd.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["angle_vx", "angle_vy", "offset", "value"] {
            return Err(CliError::Format(format!("unexpected header {headers:?}")));
        }
        let mut rows: Vec<(PrimitiveDirection, Vec<(f64, f64)>)> = Vec::new();
        for record in rd.records() {
            let record = record?;
            let field = |i: usize| record.get(i).unwrap_or_default().trim().to_string();
            let parse_i = |i: usize| field(i).parse::<i64>().map_err(|e| CliError::Format(format!("{e}: {:?}", field(i))));
            let parse_f = |i: usize| field(i).parse::<f64>().map_err(|e| CliError::Format(format!("{e}: {:?}", field(i))));
            let v = PrimitiveDirection::try_from(vec![parse_i(0)?, parse_i(1)?])?;
            let sample = (parse_f(2)?, parse_f(3)?);
            match rows.iter_mut().find(|(a, _)| *a == v) {
                Some((_, list)) => list.push(sample),
                None => rows.push((v, vec![sample])),
            }
        }
        let offsets = rows.first().map(|(_, r)| r.len()).ok_or_else(|| CliError::Format("no rows".into()))?;
        let mut sino = Self::new(radius, offsets)?;
        for (v, mut list) in rows {
            if list.len() != offsets {
                return Err(CliError::Format(format!("direction {v} has {} offsets, expected {offsets}", list.len())));
            }
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (i, (tau, _)) in list.iter().enumerate() {
                if (tau - i as f64 / offsets as f64).abs() > 1e-9 {
                    return Err(CliError::Format(format!("direction {v}: offset {tau} is off the grid i/{offsets}")));
                }
            }
            sino.insert(v, list.into_iter().map(|(_, x)| x).collect())?;
        }
        Ok(sino)
    }
}

/// `Σ_{p=p0}^{p0+count−1} e^{2πi θ p}`.
fn geometric_turns(theta: f64, p0: i64, count: i64) -> Complex64 {
    let z = Complex64::from_polar(1.0, 2.0 * PI * theta);
    if (Complex64::new(1.0, 0.0) - z).norm() < 1e-13 {
        return Complex64::new(count as f64, 0.0);
    }
    let first = Complex64::from_polar(1.0, 2.0 * PI * (theta * p0 as f64).rem_euclid(1.0));
    let span = Complex64::from_polar(1.0, 2.0 * PI * (theta * count as f64).rem_euclid(1.0));
    first * (Complex64::new(1.0, 0.0) - span) / (Complex64::new(1.0, 0.0) - z)
}

/// Fourier coefficients `P̂_j`, `|j| ≤ jmax`, of the strand-summed torus
/// profile `P(φ) = |v|⁻¹ Σ_m R((φ + m)/|v| + ½)` on `φ ∈ [−½, ½)`.
///
/// `R` is the trigonometric interpolant of the samples; `P` is sampled at
/// `φ_i = i/N` with the strands that cross the detector window, then
/// transformed by a DFT. Both steps are summed in closed form.
fn strand_profile(values: &[f64], length: f64, jmax: i64) -> Vec<Complex64> {
    let n = values.len();
    let mut spectrum: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut spectrum);
    let freqs: Vec<(f64, Complex64)> = spectrum
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let q = if 2 * i < n { i as i64 } else { i as i64 - n as i64 };
            // e^{iπq} moves the interpolant origin to the window center.
            let sign = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            (q as f64, c * sign / n as f64)
        })
        .collect();
    let m = n as f64;
    let half = m * length / 2.0;
    let p0 = (-half).ceil() as i64;
    let p1 = half.ceil() as i64 - 1;
    let count = p1 - p0 + 1;
    (-jmax..=jmax)
        .map(|j| {
            let total: Complex64 =
                freqs.iter().map(|&(q, c)| c * geometric_turns((q / length - j as f64) / m, p0, count)).sum();
            total / (m * length)
        })
        .collect()
}

/// Torus slice of direction `v` from its Euclidean projection, band `K`.
/// The slice mean is kept; [`bridge_ingest`] reconciles the means.
pub fn bridge_slice(values: &[f64], v: &PrimitiveDirection, band: i64) -> CliResult<TorusField64> {
    let perp = v.perp()?;
    let jmax = band / perp[0].abs().max(perp[1].abs());
    let profile = strand_profile(values, v.euclidean_norm(), jmax);
    let shift = CENTER[0] * perp[0] as f64 + CENTER[1] * perp[1] as f64;
    let mut f = TorusField64::zeros(2, band);
    for (j, c) in (-jmax..=jmax).zip(profile) {
        let phase = Complex64::from_polar(1.0, -2.0 * PI * (j as f64 * shift).rem_euclid(1.0));
        f.set(FrequencyIndex::from([j * perp[0], j * perp[1]]), c * phase)?;
    }
    f.set_real_flag(true);
    Ok(f)
}

/// Torus data over `directions` at band `K` from a Euclidean sinogram. The
/// torus mean is the average of the per-direction slice means.
pub fn bridge_ingest(sino: &EuclideanSinogram, directions: &[PrimitiveDirection], band: i64) -> CliResult<TorusSinogram64> {
    if !(sino.radius < 0.5) {
        return Err(CliError::GeometryViolation(sino.radius));
    }
    let mut raw = RawSinogram::new(2, 1, band);
    for v in directions {
        let values = sino.projection(v).ok_or_else(|| CliError::MissingAngle(v.to_string()))?;
        raw.insert_slice(RationalSubspace::from_direction(v), bridge_slice(values, v, band)?)?;
    }
    Ok(enforce_moment_constraint_unweighted(&raw)?)
}
