//! Config-driven experiments: forward data, noise, reconstruction and
//! error reports, plus the regularization sweep.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use torus_tomo::field::{complete_cover_height, io::save_field, sobolev_norm, to_samples, weight_build};
use torus_tomo::inversion::{adjoint_normalized, invert_filtered, invert_sum, slice_reconstruct_coeff, ReconstructionReport};
use torus_tomo::lattice::{band_frequencies, orthogonal_primitive};
use torus_tomo::regularize::{
    alpha_schedule, error_bound, optimal_rate, regularized_reconstruct, tikhonov_reconstruct, RegParams, Schedule,
};
use torus_tomo::xray::forward_sinogram;
use torus_tomo::{
    PrimitiveDirection, RationalSubspace, SubspaceFamily, TorusField64, TorusSinogram64, WeightKind, WeightRule64,
};

use crate::error::{CliError, CliResult};
use crate::noise::add_noise;
use crate::phantom::{Phantom, PhantomSpec};
use crate::pgm::{planar_image, write_pgm};
use crate::seed::derive_seeds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Slice,
    Filtered,
    Normalized,
    Sum,
    Tikhonov,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("method must be one of slice, filtered, normalized, sum, tikhonov; got {s:?}"))
    }
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Slice => "slice",
            Method::Filtered => "filtered",
            Method::Normalized => "normalized",
            Method::Sum => "sum",
            Method::Tikhonov => "tikhonov",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegConfig {
    #[serde(default)]
    pub r: f64,
    #[serde(default = "one")]
    pub s: f64,
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub schedule: Option<Schedule>,
}

fn one() -> f64 {
    1.0
}

impl Default for RegConfig {
    fn default() -> Self {
        RegConfig { r: 0.0, s: 1.0, t: 0.0, delta: None, alpha: None, schedule: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub phantom: PhantomSpec,
    #[serde(default = "two")]
    pub dim: usize,
    pub band: i64,
    /// Sampling grid for phantoms, error norms and images.
    #[serde(default)]
    pub grid: Option<usize>,
    /// Subspace dimension `d`; defaults to `n − 1`.
    #[serde(default)]
    pub sub_dim: Option<usize>,
    /// Height bound `H`; defaults to the smallest complete cover of the band.
    #[serde(default)]
    pub height: Option<i64>,
    #[serde(default = "canonical")]
    pub weight: WeightKind,
    #[serde(default = "filtered")]
    pub method: Method,
    #[serde(default)]
    pub regularization: RegConfig,
    #[serde(default = "noiseless")]
    pub noise: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn two() -> usize {
    2
}

fn canonical() -> WeightKind {
    WeightKind::CanonicalSingleton
}

fn filtered() -> Method {
    Method::Filtered
}

fn noiseless() -> Vec<f64> {
    vec![0.0]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::ConfigInvalid(vec![e.to_string()]))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn grid(&self) -> usize {
        self.grid.unwrap_or((2 * self.band as usize + 2).max(64))
    }

    pub fn sub_dim(&self) -> usize {
        self.sub_dim.unwrap_or(self.dim.saturating_sub(1))
    }

    /// Fills defaulted fields, so the echoed config is self-contained.
    pub fn resolved(&self) -> CliResult<Self> {
        self.validate()?;
        let mut c = self.clone();
        c.grid = Some(self.grid());
        c.sub_dim = Some(self.sub_dim());
        c.height = Some(self.height()?);
        Ok(c)
    }

    pub fn height(&self) -> CliResult<i64> {
        match self.height {
            Some(h) => Ok(h),
            None => Ok(complete_cover_height(self.sub_dim(), self.dim, self.band)?),
        }
    }

    /// Field-level checks; all problems are reported together.
    pub fn validate(&self) -> CliResult<()> {
        let mut errs = Vec::new();
        let (n, d) = (self.dim, self.sub_dim());
        if n < 2 {
            errs.push(format!("dim: need n >= 2, got {n}"));
        }
        if self.band < 1 {
            errs.push(format!("band: need K >= 1, got {}", self.band));
        }
        if let Some(grid) = self.grid {
            if (grid as i64) < 2 * self.band + 2 {
                errs.push(format!("grid: need N >= 2K + 2 = {}, got {grid}", 2 * self.band + 2));
            }
        }
        if d < 1 || d >= n {
            errs.push(format!("sub_dim: need 1 <= d < n = {n}, got {d}"));
        }
        if let Some(h) = self.height {
            if h < 1 {
                errs.push(format!("height: need H >= 1, got {h}"));
            }
        }
        if self.noise.is_empty() {
            errs.push("noise: list is empty".into());
        }
        for eps in &self.noise {
            if !(eps.is_finite() && *eps >= 0.0) {
                errs.push(format!("noise: levels must be finite and >= 0, got {eps}"));
            }
        }
        let planar = n == 2 && d == 1;
        match self.method {
            Method::Slice | Method::Tikhonov if !planar => {
                errs.push(format!("method: {} needs dim = 2 and sub_dim = 1", self.method.name()))
            }
            Method::Sum if d + 1 != n => errs.push(format!("method: sum needs sub_dim = dim - 1, got d = {d}, n = {n}")),
            _ => {}
        }
        if matches!(self.phantom, PhantomSpec::Disk { .. } | PhantomSpec::MultiBump { .. }) && n != 2 {
            errs.push(format!("phantom: disk and multi-bump kinds need dim = 2, got {n}"));
        }
        let reg = &self.regularization;
        if self.method == Method::Tikhonov {
            match (reg.alpha, reg.schedule) {
                (Some(a), _) if !(a > 0.0) => errs.push(format!("regularization.alpha: need alpha > 0, got {a}")),
                (Some(_), _) => {}
                (None, Some(Schedule::Optimal)) if reg.delta.is_none() => {
                    errs.push("regularization.delta: the optimal schedule needs delta".into())
                }
                (None, Some(_)) if self.noise.contains(&0.0) => {
                    errs.push("regularization.alpha: a noiseless level needs a fixed alpha".into())
                }
                (None, Some(_)) => {}
                (None, None) => errs.push("regularization: tikhonov needs alpha or schedule".into()),
            }
            if !(reg.s >= reg.r) {
                errs.push(format!("regularization.s: need s >= r, got s = {}, r = {}", reg.s, reg.r));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::ConfigInvalid(errs))
        }
    }

    pub fn weight_rule(&self) -> CliResult<WeightRule64> {
        Ok(weight_build(self.weight, self.sub_dim(), self.dim, self.height()?, self.band)?)
    }

    fn phantom_seed_and_noise_seeds(&self) -> (u64, Vec<u64>) {
        let seeds = derive_seeds(self.seed, 1 + self.noise.len());
        (seeds[0], seeds[1..].to_vec())
    }

    pub fn realize_phantom(&self) -> CliResult<Phantom> {
        let (seed, _) = self.phantom_seed_and_noise_seeds();
        self.phantom.realize(self.dim, self.band, self.grid(), &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

#[derive(Clone, Debug)]
pub struct LevelResult {
    pub eps: f64,
    pub alpha: Option<f64>,
    pub recon: TorusField64,
    pub report: ReconstructionReport,
}

#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub truth: Phantom,
    pub levels: Vec<LevelResult>,
}

/// Coefficientwise inversion from the one slice orthogonal to each `k`.
pub fn reconstruct_by_slices(g: &TorusSinogram64, family: &SubspaceFamily) -> CliResult<TorusField64> {
    let band = g.band();
    let mut f = TorusField64::zeros(2, band);
    for k in band_frequencies(2, band) {
        let v = if k.is_zero() { PrimitiveDirection::try_from(vec![1, 0])? } else { orthogonal_primitive(&k)? };
        let a = RationalSubspace::from_direction(&v);
        if !family.contains(&a) {
            return Err(torus_tomo::Error::IncompleteCover(format!("no slice for direction {v} needed by k = {k}")).into());
        }
        let steps = (2 * band * v.l1_norm() + 1) as usize;
        let c = slice_reconstruct_coeff(&g.full_slice(&a), &v, &k, steps)?;
        f.set(k, c)?;
    }
    f.set_real_flag(g.slices().all(|(_, s)| s.is_real()));
    Ok(f)
}

/// Summation inversion of the zero-mean part; the mean is restored from
/// the data.
fn reconstruct_by_sum(g: &TorusSinogram64, family: &SubspaceFamily) -> CliResult<TorusField64> {
    let mut centered = g.clone();
    let mean = g.mean();
    centered.set_mean(Complex64::new(0.0, 0.0));
    let mut f = invert_sum(&centered, family)?;
    f.add_to(torus_tomo::FrequencyIndex::zero(g.dim()), mean)?;
    Ok(f)
}

fn tikhonov_alpha(reg: &RegConfig, eps: f64) -> CliResult<f64> {
    if let Some(a) = reg.alpha {
        return Ok(a);
    }
    let schedule = reg.schedule.ok_or_else(|| CliError::ConfigInvalid(vec!["regularization: no alpha".into()]))?;
    Ok(alpha_schedule(eps, reg.delta.unwrap_or(0.0), reg.s, schedule)?)
}

pub fn reconstruct(
    method: Method,
    g: &TorusSinogram64,
    w: &WeightRule64,
    reg: &RegConfig,
    eps: f64,
) -> CliResult<(TorusField64, Option<f64>)> {
    Ok(match method {
        Method::Slice => (reconstruct_by_slices(g, w.family())?, None),
        Method::Filtered => (invert_filtered(g, w)?, None),
        Method::Normalized => (adjoint_normalized(g, w)?, None),
        Method::Sum => (reconstruct_by_sum(g, w.family())?, None),
        Method::Tikhonov => {
            let alpha = tikhonov_alpha(reg, eps)?;
            (tikhonov_reconstruct(g, reg.r, reg.s, alpha)?, Some(alpha))
        }
    })
}

fn error_orders(r: f64) -> Vec<f64> {
    let mut orders = vec![-1.0, 0.0, 1.0, r];
    orders.sort_by(f64::total_cmp);
    orders.dedup();
    orders
}

pub fn run_experiment(config: &ExperimentConfig) -> CliResult<ExperimentRun> {
    let config = config.resolved()?;
    let truth = config.realize_phantom()?;
    let w = config.weight_rule()?;
    let clean = forward_sinogram(&truth.field, w.family())?;
    let (_, seeds) = config.phantom_seed_and_noise_seeds();
    let orders = error_orders(config.regularization.r);
    let levels = config
        .noise
        .par_iter()
        .zip(seeds)
        .map(|(&eps, seed)| {
            let start = Instant::now();
            let g = add_noise(&clean, w.family(), eps, config.regularization.t, seed)?;
            let (recon, alpha) = reconstruct(config.method, &g, &w, &config.regularization, eps)?;
            let mut report =
                ReconstructionReport::measure(config.method.name(), &truth.field, &recon, &orders, config.grid(), start.elapsed())?
                    .with_parameter("eps", eps)
                    .with_parameter("band", config.band)
                    .with_parameter("seed", seed);
            if let Some(a) = alpha {
                report = report.with_parameter("alpha", a);
            }
            Ok(LevelResult { eps, alpha, recon, report })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ExperimentRun { config, truth, levels })
}

fn write_image(path: &Path, f: &TorusField64, grid: usize) -> CliResult<()> {
    let samples = to_samples(f, grid)?;
    let file = fs::File::create(path)?;
    write_pgm(std::io::BufWriter::new(file), grid, grid, &planar_image(&samples, grid))
}

impl ExperimentRun {
    /// `eps,alpha,s,error` rows.
    pub fn errors_csv(&self) -> String {
        let mut out = String::from("eps,alpha,s,error\n");
        for level in &self.levels {
            let alpha = level.alpha.map(|a| format!("{a:e}")).unwrap_or_default();
            for (s, e) in &level.report.sobolev_errors {
                out.push_str(&format!("{:e},{alpha},{s},{e:e}\n", level.eps));
            }
        }
        out
    }

    /// Writes `config.json`, `errors.csv`, `report.json`, the truth field and
    /// per-level reconstructions; planar runs also get PGM images.
    pub fn write_artifacts(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.json"), serde_json::to_string_pretty(&self.config)? + "\n")?;
        fs::write(dir.join("errors.csv"), self.errors_csv())?;
        let reports: Vec<&ReconstructionReport> = self.levels.iter().map(|l| &l.report).collect();
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&reports)? + "\n")?;
        save_field(&self.truth.field, &dir.join("truth.field"))?;
        let grid = self.config.grid();
        let planar = self.config.dim == 2;
        if planar {
            write_image(&dir.join("truth.pgm"), &self.truth.field, grid)?;
        }
        for (i, level) in self.levels.iter().enumerate() {
            let sub = dir.join(format!("level_{i}"));
            fs::create_dir_all(&sub)?;
            save_field(&level.recon, &sub.join("recon.field"))?;
            if planar {
                write_image(&sub.join("recon.pgm"), &level.recon, grid)?;
                write_image(&sub.join("diff.pgm"), &level.recon.checked_sub(&self.truth.field)?, grid)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub alpha: f64,
    pub err_hr: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub params: RegParams,
    pub schedule: Schedule,
    pub band: i64,
    pub seed: u64,
    /// `‖f‖_{H^{r+δ}}`, the constant in the bound.
    pub m_f: f64,
    pub slope: f64,
    pub predicted_rate: f64,
    pub rows: Vec<SweepRow>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Regularization strategy `P^s_α I*` over the noise levels of `config`,
/// with `α` from the schedule capped at `2s/δ − 1` so the bound applies.
pub fn run_sweep(config: &ExperimentConfig) -> CliResult<SweepSummary> {
    let config = config.resolved()?;
    let reg = &config.regularization;
    let mut errs = Vec::new();
    if config.dim != 2 || config.sub_dim() != 1 {
        errs.push("dim: the sweep runs on T^2 with lines".to_string());
    }
    let Some(delta) = reg.delta else {
        errs.push("regularization.delta: required for the sweep".into());
        return Err(CliError::ConfigInvalid(errs));
    };
    if config.noise.iter().any(|e| !(*e > 0.0)) {
        errs.push("noise: sweep levels must be positive".into());
    }
    if !errs.is_empty() {
        return Err(CliError::ConfigInvalid(errs));
    }
    let schedule = reg.schedule.unwrap_or(Schedule::Optimal);
    let base = RegParams { r: reg.r, s: reg.s, t: reg.t, delta, alpha: 1.0, eps: 0.0 };
    base.check_strategy()?;
    let truth = config.realize_phantom()?;
    let family = config.weight_rule()?.shared_family();
    let clean = forward_sinogram(&truth.field, &family)?;
    let m_f = sobolev_norm(&truth.field, reg.r + delta);
    let cap = 2.0 * reg.s / delta - 1.0;
    let (_, seeds) = config.phantom_seed_and_noise_seeds();
    let rows = config
        .noise
        .par_iter()
        .zip(seeds)
        .map(|(&eps, seed)| {
            let alpha = alpha_schedule(eps, delta, reg.s, schedule)?.min(cap);
            RegParams { alpha, eps, ..base }.check_bound()?;
            let g = add_noise(&clean, &family, eps, reg.t, seed)?;
            let recon = regularized_reconstruct(&g, reg.s, alpha)?;
            let err_hr = sobolev_norm(&recon.checked_sub(&truth.field)?, reg.r);
            let bound = error_bound(alpha, eps, delta, reg.s, m_f)?;
            Ok(SweepRow { eps, alpha, err_hr, bound, ratio: err_hr / bound })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.err_hr).collect();
    Ok(SweepSummary {
        params: base,
        schedule,
        band: config.band,
        seed: config.seed,
        m_f,
        slope: if rows.len() >= 2 { loglog_slope(&eps, &err) } else { f64::NAN },
        predicted_rate: optimal_rate(delta, reg.s),
        rows,
    })
}

impl SweepSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,alpha,err_Hr,bound,ratio\n");
        for r in &self.rows {
            out.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", r.eps, r.alpha, r.err_hr, r.bound, r.ratio));
        }
        out
    }

    pub fn write_artifacts(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("sweep.csv"), self.to_csv())?;
        let mut params = serde_json::to_value(self)?;
        if let Some(map) = params.as_object_mut() {
            map.remove("rows");
        }
        fs::write(dir.join("params.json"), serde_json::to_string_pretty(&params)? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic_config(method: Method) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"phantom": {{"kind": "harmonic", "frequencies": [[1, 2], [0, 0], [3, -1]], "amplitudes": [1.0, 0.5, -0.25]}},
                "band": 4, "method": "{}"}}"#,
            method.name()
        ))
        .unwrap()
    }

    #[test]
    fn exact_methods_recover_harmonics() {
        for method in [Method::Slice, Method::Filtered, Method::Normalized, Method::Sum] {
            let run = run_experiment(&harmonic_config(method)).unwrap();
            assert!(run.levels[0].report.sobolev_error(0.0).unwrap() < 1e-10, "{method:?}");
        }
    }

    #[test]
    fn noiseless_tikhonov_shrinks_by_one_plus_alpha() {
        let mut c = harmonic_config(Method::Tikhonov);
        c.regularization = RegConfig { r: 1.0, s: 1.0, alpha: Some(0.3), ..RegConfig::default() };
        let run = run_experiment(&c).unwrap();
        let expected = sobolev_norm(&run.truth.field, 1.0) * 0.3 / 1.3;
        assert!((run.levels[0].report.sobolev_error(1.0).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn config_errors_name_fields() {
        let mut c = harmonic_config(Method::Tikhonov);
        c.grid = Some(4);
        c.noise = vec![-1.0];
        let Err(CliError::ConfigInvalid(msgs)) = c.validate() else { panic!("accepted") };
        for field in ["grid", "noise", "regularization"] {
            assert!(msgs.iter().any(|m| m.starts_with(field)), "{field}: {msgs:?}");
        }
        assert!(matches!(ExperimentConfig::from_json(r#"{"band": 2}"#), Err(CliError::ConfigInvalid(_))));
        assert!(ExperimentConfig::from_json(r#"{"phantom": {"kind": "disk", "center": [0.5, 0.5], "radius": 0.2}, "band": 2, "colour": 1}"#).is_err());
    }

    #[test]
    fn slope_of_a_power_law() {
        let xs = [1e-1, 1e-2, 1e-3];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.4)).collect();
        assert!((loglog_slope(&xs, &ys) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("sum".parse::<Method>().unwrap(), Method::Sum);
        assert!("fbp".parse::<Method>().is_err());
    }
}
