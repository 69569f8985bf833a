//! Command-line front end.
//!
//! ```text
//! hcf-fwm <dispersion|sweep|linescan|polfit|fit|optimize> [--config FILE] [flags] [--out DIR] [--svg]
//! ```
//!
//! Every command writes its data files plus `<command>.manifest.json` to the
//! output directory and prints a short summary on stdout.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::detection::{self, FitOptions};
use crate::dispersion::{FiberModel, IndexOptions};
use crate::error::{Error, ErrorKind, Result};
use crate::output::{self, num, Manifest, Table};
use crate::phasematch::{self, PhaseMatcher, SweepProfile};
use crate::polarization::{self, ProjectionDataset, SineFitOptions};
use crate::ramanline;

#[derive(Debug, Parser)]
#[command(name = "hcf-fwm", version, about = "Four-wave-mixing conversion in gas-filled hollow-core fiber")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML). Reference values are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the configuration and HCF_FWM_OUT_DIR.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot next to the data file.
    #[arg(long, global = true)]
    pub svg: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective index, loss estimate and nearest resonance versus wavelength.
    Dispersion {
        #[arg(long, default_value_t = 800.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1600.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 801)]
        steps: usize,
    },
    /// Conversion efficiency versus pressure.
    Sweep {
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        #[arg(long, default_value_t = 300.0)]
        p_max: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Linear pressure drop to this fraction of the grid pressure at the outlet.
        #[arg(long)]
        outlet_ratio: Option<f64>,
    },
    /// Conversion versus pump-stokes detuning at fixed pressure.
    Linescan {
        /// Defaults to the configured gas pressure.
        #[arg(long)]
        pressure: Option<f64>,
        /// Full scan width around the shifted line centre, MHz.
        #[arg(long, default_value_t = 4000.0)]
        span_mhz: f64,
        #[arg(long, default_value_t = 2001)]
        steps: usize,
    },
    /// Sine fits and fidelity from polarization projection counts.
    Polfit {
        dataset: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        background_v: f64,
        #[arg(long, default_value_t = 0.0)]
        background_h: f64,
        /// 2 for half-wave-plate angles (sin 4θ), 1 for polarizer angles (sin 2θ).
        #[arg(long, default_value_t = 2)]
        period: u32,
    },
    /// Scale the conversion model to measured count rates.
    Fit {
        counts: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        p_max_fit: f64,
        #[arg(long, default_value_t = 0.0)]
        background_cps: f64,
    },
    /// Pressure of maximum conversion.
    Optimize {
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        #[arg(long, default_value_t = 300.0)]
        p_max: f64,
        /// Measured internal efficiency at the optimum, for %/W² and noise-floor comparison.
        #[arg(long)]
        internal_efficiency: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Dispersion { .. } => "dispersion",
            Command::Sweep { .. } => "sweep",
            Command::Linescan { .. } => "linescan",
            Command::Polfit { .. } => "polfit",
            Command::Fit { .. } => "fit",
            Command::Optimize { .. } => "optimize",
        }
    }
}

pub fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Io => 1,
        ErrorKind::Config => 3,
        ErrorKind::Parse => 4,
        ErrorKind::Numerical => 5,
        ErrorKind::Domain => 6,
    }
}

/// Parses `args` (including the program name), runs the command and maps
/// errors to exit codes. Usage errors exit with 2.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let line = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(&cli, line) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}

struct Context {
    config: RunConfig,
    out_dir: PathBuf,
    svg: bool,
    manifest: Manifest,
}

impl Context {
    fn emit(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        output::write_text(&path, content)?;
        self.manifest.outputs.push(path);
        Ok(())
    }

    fn emit_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.out_dir.join(name);
        output::write_json(&path, value)?;
        self.manifest.outputs.push(path);
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.manifest.warnings.push(msg);
    }
}

pub fn run(cli: &Cli, command_line: Vec<String>) -> Result<()> {
    let config = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let out_dir = config.output_dir(cli.common.out.as_deref());
    let manifest = Manifest::new(cli.command.name(), command_line, config.hash()?);
    let svg = cli.common.svg || config.output.svg;
    let mut ctx = Context {
        config,
        out_dir,
        svg,
        manifest,
    };
    let conversion = ctx.config.conversion()?;
    for w in conversion.warnings() {
        ctx.warn(w);
    }
    match &cli.command {
        Command::Dispersion {
            lambda_min,
            lambda_max,
            steps,
        } => cmd_dispersion(&mut ctx, *lambda_min, *lambda_max, *steps)?,
        Command::Sweep {
            p_min,
            p_max,
            steps,
            outlet_ratio,
        } => cmd_sweep(&mut ctx, *p_min, *p_max, *steps, *outlet_ratio)?,
        Command::Linescan {
            pressure,
            span_mhz,
            steps,
        } => cmd_linescan(&mut ctx, *pressure, *span_mhz, *steps)?,
        Command::Polfit {
            dataset,
            background_v,
            background_h,
            period,
        } => cmd_polfit(&mut ctx, dataset, *background_v, *background_h, *period)?,
        Command::Fit {
            counts,
            p_max_fit,
            background_cps,
        } => cmd_fit(&mut ctx, counts, *p_max_fit, *background_cps)?,
        Command::Optimize {
            p_min,
            p_max,
            internal_efficiency,
        } => cmd_optimize(&mut ctx, *p_min, *p_max, *internal_efficiency)?,
    }
    let path = ctx.manifest.write(&ctx.out_dir)?;
    println!("manifest: {}", path.display());
    Ok(())
}

fn cmd_dispersion(ctx: &mut Context, lambda_min: f64, lambda_max: f64, steps: usize) -> Result<()> {
    if !(lambda_min > 0.0) || lambda_max < lambda_min || steps == 0 {
        return Err(Error::domain("need 0 < lambda-min <= lambda-max and steps >= 1"));
    }
    if steps > 1 && lambda_max == lambda_min {
        return Err(Error::domain("a single wavelength needs --steps 1"));
    }
    let conv = ctx.config.conversion()?;
    let options = match conv.index {
        phasematch::IndexModel::Fiber(o) => o,
        phasematch::IndexModel::Uniform { .. } => IndexOptions::default(),
    };
    let model = FiberModel::new(&conv.fiber, &conv.mode, options)?;
    let mut table = Table::new(&[
        "wavelength_nm",
        "n_eff",
        "loss_db_per_m",
        "nearest_resonance_nm",
        "resonance_order",
        "in_resonance_band",
    ]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut flagged = 0;
    for i in 0..steps {
        let wl = if steps == 1 {
            lambda_min
        } else if i + 1 == steps {
            lambda_max
        } else {
            lambda_min + (lambda_max - lambda_min) * i as f64 / (steps - 1) as f64
        };
        let nearest = model.nearest_resonance(wl);
        let (n, loss, flag) = match model.n_eff(&conv.gas, &conv.dispersion_data, wl) {
            Ok(n) => (n, model.leakage_loss_db_per_m(wl).unwrap_or(f64::NAN), false),
            Err(Error::ResonanceProximity { .. }) => (f64::NAN, f64::NAN, true),
            Err(e) => return Err(e),
        };
        flagged += usize::from(flag);
        xs.push(wl);
        ys.push(n);
        table.push(vec![
            num(wl),
            num(n),
            num(loss),
            nearest.map_or("nan".into(), |r| num(r.wavelength_nm)),
            nearest.map_or("0".into(), |r| r.order.to_string()),
            u8::from(flag).to_string(),
        ]);
    }
    ctx.emit("dispersion.tsv", &table.to_tsv())?;
    if ctx.svg {
        ctx.emit("dispersion.svg", &output::svg_polyline(&xs, &ys, "wavelength (nm)", "n_eff"))?;
    }
    println!("resonances:");
    for r in model.resonances() {
        println!("  m={} {:.2} nm", r.order, r.wavelength_nm);
    }
    println!("operating wavelengths:");
    for f in conv.fields() {
        let wl = f.wavelength_nm();
        let status = match (model.check_off_resonance(wl), model.nearest_resonance(wl)) {
            (Ok(()), Some(r)) => format!("off resonance ({:.1} nm from m={})", (wl - r.wavelength_nm).abs(), r.order),
            (Ok(()), None) => "off resonance".into(),
            (Err(e), _) => e.to_string(),
        };
        println!("  {:<6} {:>9.2} nm  {status}", f.role(), wl);
    }
    println!("rows: {steps}, flagged: {flagged}");
    Ok(())
}

fn cmd_sweep(ctx: &mut Context, p_min: f64, p_max: f64, steps: usize, outlet_ratio: Option<f64>) -> Result<()> {
    let conv = ctx.config.conversion()?;
    let profile = outlet_ratio.map_or(SweepProfile::Uniform, |r| SweepProfile::Linear { outlet_ratio: r });
    let sweep = phasematch::pressure_sweep_with_profile(&conv, p_min, p_max, steps, profile)?;
    for (i, reason) in &sweep.invalid_reasons {
        ctx.warn(format!("p = {} bar invalid: {reason}", sweep.pressure_bar[*i]));
    }
    ctx.emit("sweep.tsv", &sweep.to_columnar_text())?;
    if ctx.svg {
        let svg = output::svg_polyline(&sweep.pressure_bar, &sweep.efficiency, "pressure (bar)", "normalized efficiency");
        ctx.emit("sweep.svg", &svg)?;
    }
    if let Some(&first) = sweep.local_maxima().first() {
        println!("first local maximum: {:.3} bar", sweep.pressure_bar[first]);
    }
    if let Some(g) = sweep.global_max() {
        println!("global maximum: {:.3} bar", sweep.pressure_bar[g]);
    }
    println!("rows: {}", sweep.len());
    Ok(())
}

fn cmd_linescan(ctx: &mut Context, pressure: Option<f64>, span_mhz: f64, steps: usize) -> Result<()> {
    let conv = ctx.config.conversion()?;
    let p = pressure.unwrap_or(conv.gas.pressure_bar);
    if !(span_mhz > 0.0) || steps < 2 {
        return Err(Error::domain("need a positive span and at least 2 steps"));
    }
    let center = ramanline::collisional_shift_mhz(&conv.raman, p);
    let grid: Vec<f64> = (0..steps)
        .map(|i| center - 0.5 * span_mhz + span_mhz * i as f64 / (steps - 1) as f64)
        .collect();
    let scan = ramanline::detuning_scan(&conv, p, &grid)?;
    let mut table = Table::new(&["detuning_mhz", "conversion"]);
    for (d, c) in scan.detuning_mhz.iter().zip(&scan.conversion) {
        table.push(vec![num(*d), num(*c)]);
    }
    ctx.emit("linescan.tsv", &table.to_tsv())?;
    if ctx.svg {
        let svg = output::svg_polyline(&scan.detuning_mhz, &scan.conversion, "detuning (MHz)", "normalized conversion");
        ctx.emit("linescan.svg", &svg)?;
    }
    println!("pressure: {p} bar");
    println!("line centre: {:.3} MHz, linewidth: {:.3} MHz", scan.center_mhz, scan.linewidth_mhz);
    match scan.fwhm_mhz() {
        Some(w) => println!("scan FWHM: {w:.3} MHz"),
        None => ctx.warn("scan does not contain both half-maximum points".into()),
    }
    Ok(())
}

fn cmd_polfit(ctx: &mut Context, dataset: &Path, bg_v: f64, bg_h: f64, period: u32) -> Result<()> {
    let data = ProjectionDataset::load(dataset, bg_v, bg_h)?;
    let report = polarization::fidelity_report(&data, SineFitOptions { period_selector: period })?;
    for w in report.warnings.clone() {
        ctx.warn(w);
    }
    ctx.emit_json("polfit.json", &report)?;
    if ctx.svg {
        let x: Vec<f64> = data.points.iter().map(|p| p.angle_deg).collect();
        let y = polarization::corrected_rates(&data, polarization::Detector::V);
        ctx.emit("polfit.svg", &output::svg_polyline(&x, &y, "angle (deg)", "V rate (1/s)"))?;
    }
    println!("visibility V: {:.4} ± {:.4}", report.visibility_v, report.fit.v.visibility_err);
    println!("visibility H: {:.4} ± {:.4}", report.visibility_h, report.fit.h.visibility_err);
    println!("fidelity: {:.4} ({})", report.mean_fidelity, report.convention);
    Ok(())
}

fn cmd_fit(ctx: &mut Context, counts: &Path, p_max_fit: f64, background_cps: f64) -> Result<()> {
    let conv = ctx.config.conversion()?;
    let file = detection::load_counts(counts)?;
    for w in file.warnings {
        ctx.warn(w);
    }
    let options = FitOptions {
        p_max_fit_bar: p_max_fit,
        background_cps,
    };
    let report = detection::fit_model_scale(&file.records, &conv, &ctx.config.detection, options)?;
    let mut table = Table::new(&[
        "pressure_bar",
        "detector",
        "corrected_rate_cps",
        "model_rate_cps",
        "residual_cps",
        "in_fit",
    ]);
    for p in &report.points {
        table.push(vec![
            num(p.pressure_bar),
            p.detector.clone(),
            num(p.corrected_rate_cps),
            num(p.fitted_model_cps),
            num(p.residual_cps),
            u8::from(p.in_fit).to_string(),
        ]);
    }
    ctx.emit("fit.tsv", &table.to_tsv())?;
    ctx.emit_json("fit.json", &report)?;
    if ctx.svg {
        let x: Vec<f64> = report.points.iter().map(|p| p.pressure_bar).collect();
        let y: Vec<f64> = report.points.iter().map(|p| p.residual_cps).collect();
        ctx.emit("fit.svg", &output::svg_polyline(&x, &y, "pressure (bar)", "residual (1/s)"))?;
    }
    println!("scale: {:e}", report.scale);
    println!(
        "rms residual: {:.4e} cps (p <= {p_max_fit} bar, {} points), {:.4e} cps (all, {} points)",
        report.restricted.rms_residual_cps,
        report.restricted.points,
        report.full_range.rms_residual_cps,
        report.full_range.points
    );
    println!("full-range relative shortfall: {:.4}", report.full_range.relative_shortfall);
    Ok(())
}

#[derive(Serialize)]
struct OptimizeReport {
    pressure_bar: f64,
    efficiency_au: f64,
    delta_beta_rad_per_m: f64,
    internal_efficiency: Option<f64>,
    relative_efficiency_percent_per_w2: Option<f64>,
    spontaneous_efficiency: f64,
    coherent_to_spontaneous: Option<f64>,
}

fn cmd_optimize(ctx: &mut Context, p_min: f64, p_max: f64, internal: Option<f64>) -> Result<()> {
    let conv = ctx.config.conversion()?;
    let (p, eff) = phasematch::optimize_pressure(&conv, p_min, p_max)?;
    let db = PhaseMatcher::new(&conv)?.delta_beta(p)?;
    let length_cm = conv.fiber.length_m * 100.0;
    let floor = detection::spontaneous_efficiency(&ctx.config.noise, p, length_cm)?;
    let relative = internal
        .map(|e| detection::relative_efficiency_percent_per_w2(e, conv.pump().power_w, conv.stokes().power_w))
        .transpose()?;
    let ratio = match internal {
        Some(e) if floor > 0.0 => Some(e / floor),
        _ => None,
    };
    let report = OptimizeReport {
        pressure_bar: p,
        efficiency_au: eff,
        delta_beta_rad_per_m: db,
        internal_efficiency: internal,
        relative_efficiency_percent_per_w2: relative,
        spontaneous_efficiency: floor,
        coherent_to_spontaneous: ratio,
    };
    ctx.emit_json("optimize.json", &report)?;
    println!("optimum: {p:.3} bar (Δβ = {db:.4} rad/m)");
    println!("spontaneous floor at optimum: {floor:e}");
    if let (Some(r), Some(q)) = (relative, ratio) {
        println!("relative efficiency: {r:e} %/W^2");
        println!("coherent / spontaneous: {q:.4}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let kinds = [
            ErrorKind::Io,
            ErrorKind::Config,
            ErrorKind::Parse,
            ErrorKind::Numerical,
            ErrorKind::Domain,
        ];
        let mut codes: Vec<u8> = kinds.iter().map(|&k| exit_code(k)).collect();
        codes.push(0);
        codes.push(2);
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), 7);
    }

    #[test]
    fn grammar_parses() {
        let cli = Cli::try_parse_from(["hcf-fwm", "sweep", "--steps", "10", "--svg", "--out", "x"]).unwrap();
        assert!(cli.common.svg);
        assert!(matches!(cli.command, Command::Sweep { steps: 10, .. }));
        assert!(Cli::try_parse_from(["hcf-fwm", "bogus"]).is_err());
    }
}
