//! On-disk formats.
//!
//! A field file is one JSON header line `{"n":..,"K":..,"real_flag":..}`
//! followed by little-endian `f64` pairs `(re, im)` for every `|k|_∞ ≤ K`
//! in lexicographic order. A sinogram is a directory holding `meta.json`,
//! `mean.txt` and one field file per slice named by the subspace's file stem.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{TorusField, TorusSinogram};
use crate::error::{Error, Result};
use crate::lattice::{band_frequencies, RationalSubspace};
use crate::scalar::Real;

pub const FIELD_EXTENSION: &str = "field";

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    n: usize,
    #[serde(rename = "K")]
    band: i64,
    real_flag: bool,
}

#[derive(Serialize, Deserialize)]
struct SinogramMeta {
    n: usize,
    d: usize,
    #[serde(rename = "K")]
    band: i64,
    slices: Vec<String>,
}

pub fn write_field<T: Real, W: Write>(f: &TorusField<T>, mut out: W) -> Result<()> {
    let header = FieldHeader { n: f.dim(), band: f.band(), real_flag: f.is_real() };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::new();
    for k in band_frequencies(f.dim(), f.band()) {
        let c = f.coefficient(&k);
        buf.extend_from_slice(&c.re.as_f64().to_le_bytes());
        buf.extend_from_slice(&c.im.as_f64().to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Reads a field; exact zeros are not stored.
pub fn read_field<T: Real, R: Read>(input: R) -> Result<TorusField<T>> {
    let mut reader = BufReader::new(input);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let header: FieldHeader = serde_json::from_str(line.trim_end())?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let freqs = band_frequencies(header.n, header.band);
    if bytes.len() != freqs.len() * 16 {
        return Err(Error::Parse(format!(
            "expected {} coefficient bytes for n = {}, K = {}, found {}",
            freqs.len() * 16,
            header.n,
            header.band,
            bytes.len()
        )));
    }
    let mut f = TorusField::zeros(header.n, header.band);
    for (k, chunk) in freqs.into_iter().zip(bytes.chunks_exact(16)) {
        let re = f64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(chunk[8..].try_into().expect("8 bytes"));
        if re != 0.0 || im != 0.0 {
            f.set(k, Complex::new(T::lit(re), T::lit(im)))?;
        }
    }
    f.set_real_flag(header.real_flag);
    Ok(f)
}

pub fn save_field<T: Real>(f: &TorusField<T>, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path)?;
    write_field(f, &mut file)?;
    file.flush()?;
    Ok(())
}

pub fn load_field<T: Real>(path: &Path) -> Result<TorusField<T>> {
    read_field(fs::File::open(path)?)
}

pub fn save_sinogram<T: Real>(g: &TorusSinogram<T>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut stems = Vec::with_capacity(g.slice_count());
    for (a, f) in g.slices() {
        let stem = a.file_stem();
        save_field(f, &dir.join(format!("{stem}.{FIELD_EXTENSION}")))?;
        stems.push(stem);
    }
    let meta = SinogramMeta { n: g.dim(), d: g.sub_dim(), band: g.band(), slices: stems };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    let m = g.mean();
    fs::write(dir.join("mean.txt"), format!("{:e} {:e}\n", m.re.as_f64(), m.im.as_f64()))?;
    Ok(())
}

pub fn load_sinogram<T: Real>(dir: &Path) -> Result<TorusSinogram<T>> {
    let meta: SinogramMeta = serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;
    let mean_text = fs::read_to_string(dir.join("mean.txt"))?;
    let parts: Vec<f64> = mean_text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("mean.txt: {e}"))))
        .collect::<Result<_>>()?;
    let [re, im] = parts[..] else {
        return Err(Error::Parse(format!("mean.txt must hold `re im`, got {mean_text:?}")));
    };
    let mut g = TorusSinogram::new(meta.n, meta.d, meta.band, Complex::new(T::lit(re), T::lit(im)))?;
    for stem in &meta.slices {
        let a = RationalSubspace::from_file_stem(stem)?;
        g.insert_slice(a, load_field(&dir.join(format!("{stem}.{FIELD_EXTENSION}")))?)?;
    }
    Ok(g)
}
