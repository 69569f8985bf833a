//! Jones-calculus polarization states, polarizing-beamsplitter projection,
//! sine fits of angle-resolved projection data and fidelity estimates.
//!
//! Fidelity convention: a fitted fringe of visibility `V` maps to the
//! projection fidelity `F = (1 + V) / 2`. The raw visibility is always
//! reported next to it.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized two-component Jones vector in the (H, V) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    h: Complex64,
    v: Complex64,
}

impl JonesVector {
    /// Builds a state from unnormalized amplitudes. The zero vector is rejected.
    pub fn new(h: Complex64, v: Complex64) -> Result<Self> {
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("Jones vector must be non-zero and finite"));
        }
        Ok(Self {
            h: h / norm,
            v: v / norm,
        })
    }

    pub fn horizontal() -> Self {
        Self::linear(0.0)
    }

    pub fn vertical() -> Self {
        Self::linear(90.0)
    }

    pub fn diagonal() -> Self {
        Self::linear(45.0)
    }

    pub fn antidiagonal() -> Self {
        Self::linear(-45.0)
    }

    /// Linear polarization at `angle_deg` from horizontal.
    pub fn linear(angle_deg: f64) -> Self {
        let a = angle_deg.to_radians();
        Self {
            h: Complex64::new(a.cos(), 0.0),
            v: Complex64::new(a.sin(), 0.0),
        }
    }

    pub fn right_circular() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            h: Complex64::new(s, 0.0),
            v: Complex64::new(0.0, -s),
        }
    }

    pub fn left_circular() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            h: Complex64::new(s, 0.0),
            v: Complex64::new(0.0, s),
        }
    }

    pub fn h(&self) -> Complex64 {
        self.h
    }

    pub fn v(&self) -> Complex64 {
        self.v
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &JonesVector) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    pub fn with_global_phase(&self, phase_rad: f64) -> Self {
        let p = Complex64::from_polar(1.0, phase_rad);
        Self {
            h: self.h * p,
            v: self.v * p,
        }
    }

    /// Parses `H`, `V`, `D`, `A`, `R`, `L`, or a linear angle in degrees.
    pub fn parse(label: &str) -> Result<Self> {
        match label.trim().to_ascii_uppercase().as_str() {
            "H" => Ok(Self::horizontal()),
            "V" => Ok(Self::vertical()),
            "D" => Ok(Self::diagonal()),
            "A" => Ok(Self::antidiagonal()),
            "R" => Ok(Self::right_circular()),
            "L" => Ok(Self::left_circular()),
            other => other
                .parse::<f64>()
                .map(Self::linear)
                .map_err(|_| Error::config(format!("unknown polarization '{label}'"))),
        }
    }
}

/// 2×2 complex Jones matrix of a linear optical element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix(pub Matrix2<Complex64>);

impl JonesMatrix {
    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn rotation(angle_deg: f64) -> Self {
        let (s, c) = angle_deg.to_radians().sin_cos();
        Self(Matrix2::new(
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ))
    }

    /// Linear retarder with fast axis at `axis_deg` and retardance `retardance_rad`.
    pub fn retarder(axis_deg: f64, retardance_rad: f64) -> Self {
        let diag = Matrix2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, retardance_rad),
        );
        let r = Self::rotation(axis_deg).0;
        let rt = Self::rotation(-axis_deg).0;
        Self(r * diag * rt)
    }

    pub fn half_wave_plate(axis_deg: f64) -> Self {
        Self::retarder(axis_deg, PI)
    }

    pub fn quarter_wave_plate(axis_deg: f64) -> Self {
        Self::retarder(axis_deg, PI / 2.0)
    }

    pub fn then(&self, next: &JonesMatrix) -> Self {
        Self(next.0 * self.0)
    }

    /// Applies the element; fails only if the element extinguishes the state.
    pub fn apply(&self, state: &JonesVector) -> Result<JonesVector> {
        let out = self.0 * Vector2::new(state.h, state.v);
        JonesVector::new(out[0], out[1])
    }
}

/// Fractions of the power in the H and V output ports of a polarizing beamsplitter.
pub fn pbs_project(state: &JonesVector) -> (f64, f64) {
    (state.h.norm_sqr(), state.v.norm_sqr())
}

/// State fidelity |⟨expected|observed⟩|².
pub fn fidelity(expected: &JonesVector, observed: &JonesVector) -> f64 {
    expected.inner(observed).norm_sqr().min(1.0)
}

/// Projection fidelity `(1 + V) / 2` for a fringe visibility `V`.
pub fn fidelity_from_visibility(visibility: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::domain(format!(
            "visibility must lie in [0, 1], got {visibility}"
        )));
    }
    Ok(0.5 * (1.0 + visibility))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionPoint {
    pub angle_deg: f64,
    pub counts_v: f64,
    pub counts_h: f64,
    pub exposure_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProjectionDataset {
    pub points: Vec<ProjectionPoint>,
    pub background_v_cps: f64,
    pub background_h_cps: f64,
}

/// Column names of the projection data file, in order.
pub const PROJECTION_COLUMNS: [&str; 4] = ["angle_deg", "counts_v", "counts_h", "exposure_s"];

impl ProjectionDataset {
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if !(p.counts_v >= 0.0 && p.counts_h >= 0.0) {
                return Err(Error::domain(format!("point {i}: counts must be >= 0")));
            }
            if !(p.exposure_s > 0.0) {
                return Err(Error::domain(format!("point {i}: exposure must be > 0")));
            }
            if !(0.0..360.0).contains(&p.angle_deg) {
                return Err(Error::domain(format!(
                    "point {i}: angle {} outside [0, 360)",
                    p.angle_deg
                )));
            }
        }
        if !(self.background_v_cps >= 0.0 && self.background_h_cps >= 0.0) {
            return Err(Error::domain("background rates must be >= 0"));
        }
        Ok(())
    }

    /// Reads `angle_deg,counts_v,counts_h,exposure_s` rows; `#` starts a comment.
    pub fn load(path: &Path, background_v_cps: f64, background_h_cps: f64) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path, background_v_cps, background_h_cps)
    }

    pub fn from_reader<R: std::io::Read>(
        reader: R,
        path: &Path,
        background_v_cps: f64,
        background_h_cps: f64,
    ) -> Result<Self> {
        let rows = crate::io::read_table(reader, path, &PROJECTION_COLUMNS)?;
        let mut points = Vec::with_capacity(rows.len());
        for row in rows {
            let p = ProjectionPoint {
                angle_deg: row.number(0)?,
                counts_v: row.number(1)?,
                counts_h: row.number(2)?,
                exposure_s: row.number(3)?,
            };
            let bad = if !(0.0..360.0).contains(&p.angle_deg) {
                Some("angle_deg outside [0, 360)")
            } else if p.counts_v < 0.0 || p.counts_h < 0.0 {
                Some("negative counts")
            } else if !(p.exposure_s > 0.0) {
                Some("exposure_s must be positive")
            } else {
                None
            };
            if let Some(message) = bad {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: row.line,
                    message: message.into(),
                });
            }
            points.push(p);
        }
        let ds = Self {
            points,
            background_v_cps,
            background_h_cps,
        };
        ds.validate()?;
        Ok(ds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    V,
    H,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SineFitOptions {
    /// Fringe argument is `2·k·θ`: k = 1 for polarizer angle, 2 for half-wave-plate angle.
    pub period_selector: u32,
}

impl Default for SineFitOptions {
    fn default() -> Self {
        Self { period_selector: 2 }
    }
}

/// `rate(θ) = offset + amplitude · sin(2kθ + phase)` with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase_rad: f64,
    pub visibility: f64,
    pub offset_err: f64,
    pub amplitude_err: f64,
    pub phase_err: f64,
    pub visibility_err: f64,
    pub residual_norm: f64,
    pub negative_offset: bool,
}

impl SineFit {
    pub fn evaluate(&self, angle_deg: f64, period_selector: u32) -> f64 {
        let x = 2.0 * period_selector as f64 * angle_deg.to_radians();
        self.offset + self.amplitude * (x + self.phase_rad).sin()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarizationFit {
    pub period_selector: u32,
    pub v: SineFit,
    pub h: SineFit,
}

impl PolarizationFit {
    pub fn detector(&self, d: Detector) -> &SineFit {
        match d {
            Detector::V => &self.v,
            Detector::H => &self.h,
        }
    }
}

fn wrap_phase(phase: f64) -> f64 {
    let mut p = phase % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Linear least squares of `y = c + a sin x + b cos x`.
pub fn fit_sine(x: &[f64], y: &[f64]) -> Result<SineFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::domain("sine fit: x and y lengths differ"));
    }
    if n < 4 {
        return Err(Error::domain(format!(
            "sine fit needs at least 4 points, got {n}"
        )));
    }
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => x[i].sin(),
        _ => x[i].cos(),
    });
    let rhs = DVector::from_column_slice(y);
    let normal = design.transpose() * &design;
    let svd = normal.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::domain(
            "sine fit is underdetermined: angles do not resolve the fringe",
        ));
    }
    let inverse = normal
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular normal matrix".into()))?;
    let coef = &inverse * (design.transpose() * &rhs);
    let residual = &rhs - &design * &coef;
    let rss = residual.norm_squared();
    let sigma2 = if n > 3 { rss / (n - 3) as f64 } else { 0.0 };
    let cov = inverse * sigma2;

    let (c, a, b) = (coef[0], coef[1], coef[2]);
    let amplitude = a.hypot(b);
    let (phase, amp_var, phase_var) = if amplitude > 0.0 {
        let amp_var = (a * a * cov[(1, 1)] + b * b * cov[(2, 2)] + 2.0 * a * b * cov[(1, 2)])
            / (amplitude * amplitude);
        let phase_var = (b * b * cov[(1, 1)] + a * a * cov[(2, 2)] - 2.0 * a * b * cov[(1, 2)])
            / amplitude.powi(4);
        (wrap_phase(b.atan2(a)), amp_var, phase_var)
    } else {
        (0.0, cov[(1, 1)].max(cov[(2, 2)]), f64::INFINITY)
    };

    let (visibility, visibility_err) = if c > 0.0 {
        let v = amplitude / c;
        let cov_ac = if amplitude > 0.0 {
            (a * cov[(0, 1)] + b * cov[(0, 2)]) / amplitude
        } else {
            0.0
        };
        let rel = amp_var / amplitude.max(f64::MIN_POSITIVE).powi(2) + cov[(0, 0)] / (c * c)
            - 2.0 * cov_ac / (amplitude.max(f64::MIN_POSITIVE) * c);
        let err = if amplitude > 0.0 {
            v * rel.max(0.0).sqrt()
        } else {
            amp_var.max(0.0).sqrt() / c
        };
        (v.clamp(0.0, 1.0), err)
    } else {
        (0.0, f64::INFINITY)
    };

    Ok(SineFit {
        offset: c,
        amplitude,
        phase_rad: phase,
        visibility,
        offset_err: cov[(0, 0)].max(0.0).sqrt(),
        amplitude_err: amp_var.max(0.0).sqrt(),
        phase_err: phase_var.max(0.0).sqrt(),
        visibility_err,
        residual_norm: rss.sqrt(),
        negative_offset: c < 0.0,
    })
}

/// Background-corrected count rate of one detector at each point.
pub fn corrected_rates(dataset: &ProjectionDataset, detector: Detector) -> Vec<f64> {
    dataset
        .points
        .iter()
        .map(|p| {
            let (counts, bg) = match detector {
                Detector::V => (p.counts_v, dataset.background_v_cps),
                Detector::H => (p.counts_h, dataset.background_h_cps),
            };
            (counts / p.exposure_s - bg).max(0.0)
        })
        .collect()
}

/// Fits both detectors of a projection scan.
pub fn sine_fit(dataset: &ProjectionDataset, options: SineFitOptions) -> Result<PolarizationFit> {
    dataset.validate()?;
    if !matches!(options.period_selector, 1 | 2) {
        return Err(Error::config(format!(
            "period selector must be 1 or 2, got {}",
            options.period_selector
        )));
    }
    let mut angles: Vec<f64> = dataset.points.iter().map(|p| p.angle_deg).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    if angles.len() < 4 {
        return Err(Error::domain(format!(
            "sine fit needs at least 4 distinct angles, got {}",
            angles.len()
        )));
    }
    let k = options.period_selector as f64;
    let x: Vec<f64> = dataset
        .points
        .iter()
        .map(|p| 2.0 * k * p.angle_deg.to_radians())
        .collect();
    Ok(PolarizationFit {
        period_selector: options.period_selector,
        v: fit_sine(&x, &corrected_rates(dataset, Detector::V))?,
        h: fit_sine(&x, &corrected_rates(dataset, Detector::H))?,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FidelityReport {
    pub convention: String,
    pub fit: PolarizationFit,
    pub visibility_v: f64,
    pub visibility_h: f64,
    pub fidelity_v: f64,
    pub fidelity_h: f64,
    pub mean_fidelity: f64,
    pub warnings: Vec<String>,
}

pub const FIDELITY_CONVENTION: &str = "F = (1 + V) / 2, V = amplitude / offset of the fitted fringe";

pub fn fidelity_report(dataset: &ProjectionDataset, options: SineFitOptions) -> Result<FidelityReport> {
    let fit = sine_fit(dataset, options)?;
    let mut warnings = Vec::new();
    for (name, f) in [("V", &fit.v), ("H", &fit.h)] {
        if f.negative_offset {
            warnings.push(format!("detector {name}: fitted offset is negative"));
        }
    }
    let fidelity_v = fidelity_from_visibility(fit.v.visibility)?;
    let fidelity_h = fidelity_from_visibility(fit.h.visibility)?;
    Ok(FidelityReport {
        convention: FIDELITY_CONVENTION.into(),
        visibility_v: fit.v.visibility,
        visibility_h: fit.h.visibility,
        fidelity_v,
        fidelity_h,
        mean_fidelity: 0.5 * (fidelity_v + fidelity_h),
        fit,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use rand_distr::{Distribution, Poisson};

    fn random_state(rng: &mut StdRng) -> JonesVector {
        JonesVector::new(
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        )
        .unwrap()
    }

    fn orthogonal(s: &JonesVector) -> JonesVector {
        JonesVector::new(-s.v().conj(), s.h().conj()).unwrap()
    }

    fn synthetic(
        offset_v: f64,
        amp_v: f64,
        phase: f64,
        k: u32,
        n: usize,
        exposure: f64,
    ) -> ProjectionDataset {
        let points = (0..n)
            .map(|i| {
                let angle = 180.0 * i as f64 / n as f64;
                let x = 2.0 * k as f64 * angle.to_radians();
                let v = offset_v + amp_v * (x + phase).sin();
                let h = offset_v - amp_v * (x + phase).sin();
                ProjectionPoint {
                    angle_deg: angle,
                    counts_v: v * exposure,
                    counts_h: h * exposure,
                    exposure_s: exposure,
                }
            })
            .collect();
        ProjectionDataset {
            points,
            background_v_cps: 0.0,
            background_h_cps: 0.0,
        }
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(JonesVector::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)).is_err());
        let s = JonesVector::new(Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)).unwrap();
        let (h, v) = pbs_project(&s);
        assert!((h - 0.36).abs() < 1e-15 && (v - 0.64).abs() < 1e-15);
    }

    #[test]
    fn pbs_projections_of_standard_states() {
        assert_eq!(pbs_project(&JonesVector::horizontal()), (1.0, 0.0));
        for s in [JonesVector::diagonal(), JonesVector::right_circular(), JonesVector::left_circular()] {
            let (h, v) = pbs_project(&s);
            assert!((h - 0.5).abs() < 1e-15 && (v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn fidelity_basics() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let s = random_state(&mut rng);
            assert!((fidelity(&s, &s) - 1.0).abs() < 1e-12);
            assert!(fidelity(&s, &orthogonal(&s)) < 1e-12);
            let theta = rng.random_range(0.0..2.0 * PI);
            assert!((fidelity(&s, &s.with_global_phase(theta)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wave_plates() {
        let out = JonesMatrix::half_wave_plate(22.5)
            .apply(&JonesVector::horizontal())
            .unwrap();
        assert!((fidelity(&JonesVector::diagonal(), &out) - 1.0).abs() < 1e-12);
        let circ = JonesMatrix::quarter_wave_plate(45.0)
            .apply(&JonesVector::horizontal())
            .unwrap();
        let (h, v) = pbs_project(&circ);
        assert!((h - 0.5).abs() < 1e-12 && (v - 0.5).abs() < 1e-12);
        assert!(
            (fidelity(&JonesVector::left_circular(), &circ) - 1.0).abs() < 1e-12
                || (fidelity(&JonesVector::right_circular(), &circ) - 1.0).abs() < 1e-12
        );
        // Rotating the HWP by θ rotates linear polarization by 2θ.
        for deg in [0.0, 10.0, 33.0, 80.0] {
            let s = JonesMatrix::half_wave_plate(deg).apply(&JonesVector::horizontal()).unwrap();
            let (_, v) = pbs_project(&s);
            assert!((v - (2.0 * deg.to_radians()).sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn visibility_to_fidelity() {
        assert_eq!(fidelity_from_visibility(1.0).unwrap(), 1.0);
        assert_eq!(fidelity_from_visibility(0.0).unwrap(), 0.5);
        assert!((fidelity_from_visibility(0.92).unwrap() - 0.96).abs() < 1e-15);
        assert!(fidelity_from_visibility(1.01).is_err());
        assert!(fidelity_from_visibility(-0.1).is_err());
    }

    #[test]
    fn noiseless_round_trip() {
        for k in [1, 2] {
            let ds = synthetic(1000.0, 730.0, 0.7, k, 24, 2.0);
            let fit = sine_fit(&ds, SineFitOptions { period_selector: k }).unwrap();
            assert!((fit.v.offset - 1000.0).abs() < 1e-9);
            assert!((fit.v.amplitude - 730.0).abs() < 1e-9);
            assert!((fit.v.phase_rad - 0.7).abs() < 1e-9);
            assert!(fit.v.residual_norm < 1e-9);
            assert!((fit.v.visibility - 0.73).abs() < 1e-12);
            // complementary detector: half a fringe period apart
            let dphi = wrap_phase(fit.h.phase_rad - fit.v.phase_rad);
            assert!((dphi.abs() - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_data_has_no_fringe() {
        let ds = synthetic(500.0, 0.0, 0.0, 2, 12, 1.0);
        let fit = sine_fit(&ds, SineFitOptions::default()).unwrap();
        assert!(fit.v.amplitude < 1e-9);
        assert!(fit.v.visibility < 1e-12);
    }

    #[test]
    fn underdetermined_scan() {
        let mut ds = synthetic(500.0, 100.0, 0.0, 2, 3, 1.0);
        assert!(sine_fit(&ds, SineFitOptions::default()).is_err());
        // 4 angles that alias onto 2 fringe positions for k = 2
        ds.points = [0.0, 90.0, 45.0, 135.0]
            .iter()
            .map(|&a| ProjectionPoint {
                angle_deg: a,
                counts_v: 10.0,
                counts_h: 10.0,
                exposure_s: 1.0,
            })
            .collect();
        assert!(sine_fit(&ds, SineFitOptions::default()).is_err());
    }

    #[test]
    fn background_is_subtracted_and_floored() {
        let mut ds = synthetic(1000.0, 500.0, 0.3, 2, 16, 1.0);
        ds.background_v_cps = 200.0;
        let fit = sine_fit(&ds, SineFitOptions::default()).unwrap();
        assert!((fit.v.offset - 800.0).abs() < 1e-9);
        assert!((fit.v.visibility - 500.0 / 800.0).abs() < 1e-12);
        ds.background_h_cps = 1e6;
        assert!(corrected_rates(&ds, Detector::H).iter().all(|&r| r == 0.0));
    }

    #[test]
    fn poisson_noise_within_three_sigma() {
        let mut rng = StdRng::seed_from_u64(2024);
        // minimum rate 1.6e3 cps over 10 s keeps every point above 1e4 counts
        let (offset, amp, phase, exposure) = (2.0e4, 1.84e4, -1.1, 10.0);
        let truth = amp / offset;
        let mut ds = synthetic(offset, amp, phase, 2, 36, exposure);
        for p in &mut ds.points {
            assert!(p.counts_v >= 1e4 && p.counts_h >= 1e4);
            p.counts_v = Poisson::new(p.counts_v).unwrap().sample(&mut rng);
            p.counts_h = Poisson::new(p.counts_h).unwrap().sample(&mut rng);
        }
        let fit = sine_fit(&ds, SineFitOptions::default()).unwrap();
        let z = (fit.v.visibility - truth).abs() / fit.v.visibility_err;
        assert!(z < 3.0, "z = {z}, fit = {:?}", fit.v);
    }

    proptest! {
        #[test]
        fn projections_sum_to_one(hr in -1.0..1.0f64, hi in -1.0..1.0f64, vr in -1.0..1.0f64, vi in -1.0..1.0f64) {
            prop_assume!(hr.abs() + hi.abs() + vr.abs() + vi.abs() > 1e-6);
            let s = JonesVector::new(Complex64::new(hr, hi), Complex64::new(vr, vi)).unwrap();
            let (h, v) = pbs_project(&s);
            prop_assert!((h + v - 1.0).abs() < 1e-12);
        }

        #[test]
        fn fidelity_symmetric_and_unitary_invariant(seed in any::<u64>(), axis in 0.0..180.0f64, ret in 0.0..6.3f64) {
            let mut rng = StdRng::seed_from_u64(seed);
            let a = random_state(&mut rng);
            let b = random_state(&mut rng);
            prop_assert!((fidelity(&a, &b) - fidelity(&b, &a)).abs() < 1e-12);
            let u = JonesMatrix::retarder(axis, ret).then(&JonesMatrix::rotation(axis * 0.37));
            let ua = u.apply(&a).unwrap();
            let ub = u.apply(&b).unwrap();
            prop_assert!((fidelity(&ua, &ub) - fidelity(&a, &b)).abs() < 1e-12);
        }
    }
}
