//! Method dispatch, batch denoising and the side-by-side comparison report.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::baselines::{butterworth_lowpass, filtfilt, iir_filter, IirCoefficients};
use crate::error::{Error, Result};
use crate::gawd::{GawdConfig, GawdDenoiser, GawdThresholdTrace};
use crate::grid::{map_project, Data};
use crate::io::{self, Format};
use crate::metrics::{
    peak_snr_db, psnr, reference_snr_db, saturate_db, ssim, ImageBuffer,
};
use crate::scalar::Real;
use crate::signal::Signal;
use crate::thresholding::{denoise_classic, RuleKind, Shrinkage, ThresholdRule};
use crate::wavelet::{wavelet_by_name, WaveletFilter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Gawd,
    Classic(RuleKind),
    Butterworth,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Gawd,
        Method::Classic(RuleKind::Sqtwolog),
        Method::Classic(RuleKind::Rigrsure),
        Method::Classic(RuleKind::Minimaxi),
        Method::Classic(RuleKind::Heursure),
        Method::Butterworth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gawd => "gawd",
            Method::Classic(k) => k.as_str(),
            Method::Butterworth => "butterworth",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown method {s:?}; expected one of gawd, sqtwolog, rigrsure, minimaxi, heursure, butterworth"
                ))
            })
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Knobs shared by all methods; each method reads the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodParams {
    pub wavelet: String,
    pub levels: usize,
    /// Shrinkage for the classic rules; gaWD always keeps `|w| >= T`.
    pub shrinkage: Shrinkage,
    pub cutoff_hz: f64,
    pub order: usize,
    /// Forward-backward filtering instead of a single causal pass.
    pub zero_phase: bool,
}

impl Default for MethodParams {
    fn default() -> Self {
        Self {
            wavelet: "db8".into(),
            levels: 6,
            shrinkage: Shrinkage::Soft,
            cutoff_hz: 15e6,
            order: 4,
            zero_phase: false,
        }
    }
}

impl MethodParams {
    pub fn describe(&self, method: Method) -> String {
        match method {
            Method::Gawd => format!("{} L={} clear D1-D{}", self.wavelet, self.levels, self.levels / 2),
            Method::Classic(_) => format!("{} L={} {}", self.wavelet, self.levels, self.shrinkage),
            Method::Butterworth => format!(
                "order={} fc={} MHz {}",
                self.order,
                self.cutoff_hz / 1e6,
                if self.zero_phase { "zero-phase" } else { "causal" }
            ),
        }
    }
}

/// A method bound to its prepared filters, reusable across A-lines.
#[derive(Debug, Clone)]
pub enum Denoiser<T: Real> {
    Gawd(GawdDenoiser<T>),
    Classic {
        rule: ThresholdRule,
        filter: WaveletFilter<T>,
        levels: usize,
    },
    Butterworth {
        coeffs: IirCoefficients<T>,
        zero_phase: bool,
    },
}

impl<T: Real> Denoiser<T> {
    pub fn new(method: Method, params: &MethodParams, sample_rate_hz: f64) -> Result<Self> {
        Ok(match method {
            Method::Gawd => Denoiser::Gawd(GawdDenoiser::new(GawdConfig::with_levels(
                params.wavelet.clone(),
                params.levels,
            ))?),
            Method::Classic(kind) => Denoiser::Classic {
                rule: ThresholdRule::new(kind, params.shrinkage),
                filter: wavelet_by_name(&params.wavelet)?,
                levels: params.levels,
            },
            Method::Butterworth => Denoiser::Butterworth {
                coeffs: butterworth_lowpass(params.order, params.cutoff_hz, sample_rate_hz)?,
                zero_phase: params.zero_phase,
            },
        })
    }

    pub fn apply(&self, signal: &Signal<T>) -> Result<(Signal<T>, Option<GawdThresholdTrace<T>>)> {
        match self {
            Denoiser::Gawd(d) => d.denoise(signal).map(|(s, t)| (s, Some(t))),
            Denoiser::Classic {
                rule,
                filter,
                levels,
            } => denoise_classic(signal, *rule, filter, *levels).map(|(s, _)| (s, None)),
            Denoiser::Butterworth { coeffs, zero_phase } => {
                let out = if *zero_phase {
                    filtfilt(signal, coeffs)?
                } else {
                    iir_filter(signal, coeffs)?
                };
                Ok((out, None))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Denoised<T: Real> {
    pub output: Data<T>,
    /// One entry per A-line (a single one for a signal); gaWD only.
    pub traces: Vec<Option<GawdThresholdTrace<T>>>,
}

/// Runs `method` on every A-line independently. Lines may be processed in
/// parallel; results are gathered in row-major order, so the output does not
/// depend on scheduling.
pub fn run_denoise<T: Real>(data: &Data<T>, method: Method, params: &MethodParams) -> Result<Denoised<T>> {
    let denoiser = Denoiser::new(method, params, data.sample_rate_hz())?;
    match data {
        Data::Signal(s) => {
            let (out, trace) = denoiser.apply(s)?;
            Ok(Denoised {
                output: Data::Signal(out),
                traces: vec![trace],
            })
        }
        Data::Grid(g) => {
            let lines = g.try_map_lines(|s| denoiser.apply(s))?;
            let mut samples = Vec::with_capacity(g.data().len());
            let mut traces = Vec::with_capacity(lines.len());
            for (s, t) in lines {
                samples.extend_from_slice(s.samples());
                traces.push(t);
            }
            Ok(Denoised {
                output: Data::Grid(g.with_data(samples)?),
                traces,
            })
        }
    }
}

/// Quality of one output against the reference. `psnr_db`/`ssim` are taken
/// on MAP images for grids and on the raw samples (as a `1 x N` image with
/// global statistics) for single signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    #[serde(serialize_with = "ser_db")]
    pub snr_db: f64,
    #[serde(serialize_with = "ser_db")]
    pub peak_snr_db: f64,
    #[serde(serialize_with = "ser_opt_db")]
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
}

fn ser_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(saturate_db(*v))
}

fn ser_opt_db<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&saturate_db(*v)),
        None => s.serialize_none(),
    }
}

fn image_of<T: Real>(d: &Data<T>) -> ImageBuffer<T> {
    match d {
        Data::Grid(g) => map_project(g),
        Data::Signal(s) => ImageBuffer::new(1, s.len(), s.samples().to_vec())
            .expect("signals are non-empty and finite"),
    }
}

pub fn score<T: Real>(output: &Data<T>, reference: &Data<T>) -> Result<Scores> {
    if !output.same_shape(reference) {
        return Err(Error::DimensionMismatch(format!(
            "output shape {:?} vs reference shape {:?}",
            output.shape(),
            reference.shape()
        )));
    }
    let (out, reff) = (output.samples(), reference.samples());
    let (f, g) = (image_of(reference), image_of(output));
    let peak = f.pixels().iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let range = f.max() - f.min();
    let psnr_db = if peak > T::zero() {
        Some(psnr(&f, &g, peak)?.as_f64())
    } else {
        None
    };
    let range = if range > T::zero() { range } else { peak };
    let ssim = if range > T::zero() {
        Some(ssim(&f, &g, range)?.as_f64())
    } else {
        None
    };
    Ok(Scores {
        snr_db: reference_snr_db(out, reff),
        peak_snr_db: peak_snr_db(out, reff),
        psnr_db,
        ssim,
    })
}

/// Hex SHA-256 of the samples as little-endian `f64`.
pub fn content_digest<T: Real>(data: &Data<T>) -> String {
    let mut h = Sha256::new();
    for v in data.samples() {
        h.update(v.as_f64().to_le_bytes());
    }
    hex::encode(h.finalize())
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// Candidate cutoffs every 0.5 MHz up to just below Nyquist.
pub fn default_cutoff_sweep(sample_rate_hz: f64) -> Vec<f64> {
    let nyquist = sample_rate_hz / 2.0;
    // low-rate data falls back to 80 steps across the band
    let step = if nyquist >= 2e6 { 0.5e6 } else { nyquist / 80.0 };
    (1..)
        .map(|k| k as f64 * step)
        .take_while(|&c| c < nyquist)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareSpec {
    pub methods: Vec<Method>,
    pub params: MethodParams,
    pub seed: u64,
    /// When set, the input is treated as clean and noise is injected first.
    pub noise_snr_db: Option<f64>,
    /// Non-empty: the Butterworth row reports its best cutoff among these
    /// (needs a reference). Empty: `params.cutoff_hz` as given.
    pub butterworth_sweep_hz: Vec<f64>,
}

impl CompareSpec {
    pub fn new(methods: Vec<Method>) -> Self {
        Self {
            methods,
            params: MethodParams::default(),
            seed: 0,
            noise_snr_db: None,
            butterworth_sweep_hz: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub source: Option<String>,
    pub content_sha256: String,
    pub file_sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    #[serde(serialize_with = "ser_opt_db")]
    pub noise_snr_db: Option<f64>,
    pub inputs: Vec<InputDigest>,
    pub params: MethodParams,
    pub butterworth_sweep_hz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: String,
    pub parameters: String,
    pub scores: Option<Scores>,
    pub wall_time_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub kind: String,
    pub shape: Vec<usize>,
    pub sample_rate_hz: f64,
    pub provenance: Provenance,
    /// The unprocessed (possibly noise-injected) input against the reference.
    pub input: Option<Scores>,
    pub rows: Vec<ReportRow>,
}

impl RunReport {
    pub fn row(&self, method: Method) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method.name())
    }

    /// Copy with every wall-clock field zeroed, for byte comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.rows.iter_mut().for_each(|row| row.wall_time_ms = 0.0);
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize") + "\n"
    }

    pub fn to_table(&self) -> String {
        let fmt_db = |v: Option<f64>| match v {
            Some(v) if v.is_infinite() => format!("{}inf", if v > 0.0 { "+" } else { "-" }),
            Some(v) => format!("{v:.2}"),
            None => "-".into(),
        };
        let fmt_ssim = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.4}"));
        let header = [
            "method",
            "parameters",
            "SNR 10log (dB)",
            "SNR 20log peak (dB)",
            "PSNR (dB)",
            "SSIM",
            "time (ms)",
            "status",
        ];
        let mut rows: Vec<[String; 8]> = Vec::new();
        let cells = |name: &str, params: &str, s: Option<&Scores>, ms: String, status: &str| {
            [
                name.to_string(),
                params.to_string(),
                fmt_db(s.map(|s| s.snr_db)),
                fmt_db(s.map(|s| s.peak_snr_db)),
                fmt_db(s.and_then(|s| s.psnr_db)),
                fmt_ssim(s.and_then(|s| s.ssim)),
                ms,
                status.to_string(),
            ]
        };
        rows.push(cells("(input)", "", self.input.as_ref(), "-".into(), "ok"));
        for r in &self.rows {
            rows.push(cells(
                &r.method,
                &r.parameters,
                r.scores.as_ref(),
                format!("{:.1}", r.wall_time_ms),
                r.error.as_deref().unwrap_or("ok"),
            ));
        }
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| {
                    if i < 2 || i == 7 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = String::new();
        out.push_str(&format!(
            "{} {:?} at {} Hz, seed {}, injected noise {}\n",
            self.kind,
            self.shape,
            self.sample_rate_hz,
            self.provenance.seed,
            self.provenance
                .noise_snr_db
                .map_or("none".to_string(), |d| format!("{d} dB"))
        ));
        out.push_str(&line(header.to_vec()));
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&line(rule.iter().map(String::as_str).collect()));
        out.push('\n');
        for r in &rows {
            out.push_str(&line(r.iter().map(|s| s.as_str()).collect()));
            out.push('\n');
        }
        out.push_str(if self.kind == "grid" {
            "PSNR and SSIM are computed on maximum amplitude projection images.\n"
        } else {
            "PSNR and SSIM are computed on the samples as a 1 x N image.\n"
        });
        out
    }
}

#[derive(Debug, Clone)]
pub struct Comparison<T: Real> {
    pub report: RunReport,
    pub reference: Option<Data<T>>,
    /// Exactly what every method received.
    pub noisy: Data<T>,
    /// Parallel to `report.rows`; `None` where the method failed.
    pub outputs: Vec<Option<Data<T>>>,
}

/// Runs every method on the same (optionally noise-injected) input. A failing
/// method is recorded in its row and does not stop the others.
pub fn compare<T: Real>(input: &Data<T>, reference: Option<&Data<T>>, spec: &CompareSpec) -> Result<Comparison<T>> {
    if spec.methods.is_empty() {
        return Err(Error::InvalidParameter("no methods requested".into()));
    }
    let reference: Option<Data<T>> = match (reference, spec.noise_snr_db) {
        (Some(r), _) => Some(r.clone()),
        (None, Some(_)) => Some(input.clone()),
        (None, None) => None,
    };
    if let Some(r) = &reference {
        if !r.same_shape(input) {
            return Err(Error::DimensionMismatch(format!(
                "input shape {:?} vs reference shape {:?}",
                input.shape(),
                r.shape()
            )));
        }
    }
    let noisy = match spec.noise_snr_db {
        Some(db) => input.with_noise(db, spec.seed)?,
        None => input.clone(),
    };
    let score_against = |d: &Data<T>| -> Result<Option<Scores>> {
        reference.as_ref().map(|r| score(d, r)).transpose()
    };

    let mut rows = Vec::with_capacity(spec.methods.len());
    let mut outputs = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let start = Instant::now();
        let result = run_method(&noisy, reference.as_ref(), method, spec);
        let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        match result.and_then(|(out, params)| Ok((score_against(&out)?, out, params))) {
            Ok((scores, out, parameters)) => {
                rows.push(ReportRow {
                    method: method.name().into(),
                    parameters,
                    scores,
                    wall_time_ms,
                    error: None,
                });
                outputs.push(Some(out));
            }
            Err(e) => {
                rows.push(ReportRow {
                    method: method.name().into(),
                    parameters: spec.params.describe(method),
                    scores: None,
                    wall_time_ms,
                    error: Some(e.to_string()),
                });
                outputs.push(None);
            }
        }
    }

    let mut inputs = vec![InputDigest {
        role: "input".into(),
        source: None,
        content_sha256: content_digest(input),
        file_sha256: None,
    }];
    if let Some(r) = &reference {
        inputs.push(InputDigest {
            role: "reference".into(),
            source: None,
            content_sha256: content_digest(r),
            file_sha256: None,
        });
    }
    let report = RunReport {
        kind: input.kind().into(),
        shape: input.shape(),
        sample_rate_hz: input.sample_rate_hz(),
        provenance: Provenance {
            tool: "gawd".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: spec.seed,
            noise_snr_db: spec.noise_snr_db,
            inputs,
            params: spec.params.clone(),
            butterworth_sweep_hz: spec.butterworth_sweep_hz.clone(),
        },
        input: score_against(&noisy)?,
        rows,
    };
    Ok(Comparison {
        report,
        reference,
        noisy,
        outputs,
    })
}

fn run_method<T: Real>(
    noisy: &Data<T>,
    reference: Option<&Data<T>>,
    method: Method,
    spec: &CompareSpec,
) -> Result<(Data<T>, String)> {
    let sweep = &spec.butterworth_sweep_hz;
    if method != Method::Butterworth || sweep.is_empty() {
        let out = run_denoise(noisy, method, &spec.params)?.output;
        return Ok((out, spec.params.describe(method)));
    }
    let reference = reference.ok_or_else(|| {
        Error::InvalidParameter("a cutoff sweep needs a reference to rank cutoffs".into())
    })?;
    let mut best: Option<(f64, f64, Data<T>)> = None;
    for &cutoff in sweep {
        let params = MethodParams {
            cutoff_hz: cutoff,
            ..spec.params.clone()
        };
        let out = run_denoise(noisy, method, &params)?.output;
        let snr = reference_snr_db(out.samples(), reference.samples());
        // strict: ties keep the lower cutoff
        if best.as_ref().map_or(true, |b| snr > b.0) {
            best = Some((snr, cutoff, out));
        }
    }
    let (_, cutoff, out) = best.expect("sweep is non-empty");
    let params = MethodParams {
        cutoff_hz: cutoff,
        ..spec.params.clone()
    };
    Ok((
        out,
        format!("{} (best of {} swept)", params.describe(method), sweep.len()),
    ))
}

/// Writes the report (text and JSON), the noisy input, every successful
/// output, two-column plot files and, for grids, MAP images as CSV matrices.
pub fn write_outputs(dir: &Path, cmp: &Comparison<f64>, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(format!("writing {}", p.display()), e))?;
        written.push(p);
        Ok(())
    };
    put("report.txt".into(), cmp.report.to_table())?;
    put("report.json".into(), cmp.report.to_json())?;

    let mut series: Vec<(String, &Data<f64>)> = vec![("noisy".into(), &cmp.noisy)];
    if let Some(r) = &cmp.reference {
        series.push(("reference".into(), r));
    }
    for (row, out) in cmp.report.rows.iter().zip(&cmp.outputs) {
        if let Some(out) = out {
            series.push((row.method.clone(), out));
        }
    }
    for (name, data) in &series {
        put(format!("plot_{name}.dat"), plot_columns(data))?;
        if let Data::Grid(g) = data {
            put(format!("map_{name}.csv"), image_csv(&map_project(g)))?;
        }
    }

    let mut snr = String::from("# index snr_db_10log; index order:");
    for r in &cmp.report.rows {
        snr.push(' ');
        snr.push_str(&r.method);
    }
    snr.push('\n');
    for (i, r) in cmp.report.rows.iter().enumerate() {
        if let Some(s) = &r.scores {
            snr.push_str(&format!("{i} {:?}\n", saturate_db(s.snr_db)));
        }
    }
    put("plot_snr.dat".into(), snr)?;

    for (name, data) in &series {
        let p = dir.join(format!("{name}.{}", format.extension()));
        io::save(&p, data, format)?;
        written.push(p);
    }
    Ok(written)
}

/// `time_us amplitude` rows for the signal or the centre A-line of a grid.
pub fn plot_columns(data: &Data<f64>) -> String {
    let line = data.representative_line();
    let dt_us = 1e6 / line.sample_rate_hz();
    let mut out = String::from("# time_us amplitude\n");
    for (i, v) in line.samples().iter().enumerate() {
        out.push_str(&format!("{:?} {v:?}\n", i as f64 * dt_us));
    }
    out
}

pub fn image_csv(img: &ImageBuffer<f64>) -> String {
    let mut out = String::new();
    for r in 0..img.rows() {
        let row: Vec<String> = (0..img.cols()).map(|c| format!("{:?}", img.get(r, c))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gawd::gawd_denoise;
    use crate::grid::ScanGrid;
    use crate::synth::{make_two_layer_scene, TwoLayerParams};

    fn scene() -> Signal<f64> {
        make_two_layer_scene::<f64>(&TwoLayerParams::default()).unwrap().clean
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("wiener".parse::<Method>().is_err());
    }

    #[test]
    fn gawd_dispatch_matches_direct_call() {
        let s = scene();
        let d = run_denoise(&Data::Signal(s.clone()), Method::Gawd, &MethodParams::default()).unwrap();
        let (direct, trace) = gawd_denoise(&s, &GawdConfig::default()).unwrap();
        assert_eq!(d.output, Data::Signal(direct));
        assert_eq!(d.traces[0].as_ref().unwrap(), &trace);
    }

    #[test]
    fn butterworth_at_nyquist_is_a_parameter_error() {
        let p = MethodParams {
            cutoff_hz: 40e6,
            ..Default::default()
        };
        let e = run_denoise(&Data::Signal(scene()), Method::Butterworth, &p).unwrap_err();
        assert_eq!(e.kind(), crate::error::ErrorKind::InvalidParameter);
    }

    #[test]
    fn identical_lines_give_identical_outputs() {
        let s = scene();
        let data: Vec<f64> = (0..4).flat_map(|_| s.samples().to_vec()).collect();
        let g = ScanGrid::new(2, 2, s.len(), s.sample_rate_hz(), data).unwrap();
        for m in Method::ALL {
            let out = run_denoise(&Data::Grid(g.clone()), m, &MethodParams::default()).unwrap();
            let og = out.output.as_grid().unwrap();
            for i in 1..4 {
                assert_eq!(og.line(i), og.line(0), "{m}");
            }
        }
    }

    #[test]
    fn grid_errors_carry_the_line_index() {
        let g = ScanGrid::new(1, 2, 8, 80e6, vec![0.0; 16]).unwrap();
        let p = MethodParams {
            levels: 6,
            ..Default::default()
        };
        let e = run_denoise(&Data::Grid(g), Method::Gawd, &p).unwrap_err();
        assert!(matches!(e, Error::ALine { index: 0, .. }), "{e}");
    }

    #[test]
    fn clean_input_saturates() {
        let d = Data::Signal(scene());
        let cmp = compare(&d, Some(&d), &CompareSpec::new(vec![Method::Gawd])).unwrap();
        let input = cmp.report.input.unwrap();
        assert_eq!(input.snr_db, f64::INFINITY);
        assert_eq!(input.psnr_db, Some(f64::INFINITY));
        assert!((input.ssim.unwrap() - 1.0).abs() < 1e-12);
        let json = cmp.report.to_json();
        assert!(json.contains("999.0"), "{json}");
        assert_eq!(cmp.report.rows.len(), 1);
    }

    #[test]
    fn failing_method_does_not_abort_the_rest() {
        let d = Data::Signal(scene());
        let mut spec = CompareSpec::new(vec![Method::Butterworth, Method::Gawd]);
        spec.params.cutoff_hz = 50e6;
        spec.noise_snr_db = Some(18.0);
        spec.seed = 3;
        let cmp = compare(&d, None, &spec).unwrap();
        assert!(cmp.report.rows[0].error.is_some());
        assert!(cmp.outputs[0].is_none());
        assert!(cmp.report.rows[1].error.is_none());
        assert!(cmp.report.to_table().contains("filter design error"));
    }

    #[test]
    fn sweep_picks_the_best_cutoff() {
        let d = Data::Signal(scene());
        let mut spec = CompareSpec::new(vec![Method::Butterworth]);
        spec.noise_snr_db = Some(18.0);
        spec.seed = 1;
        spec.butterworth_sweep_hz = vec![5e6, 20e6, 35e6];
        let swept = compare(&d, None, &spec).unwrap();
        let best = swept.report.rows[0].scores.unwrap().snr_db;
        for c in [5e6, 20e6, 35e6] {
            let mut one = spec.clone();
            one.butterworth_sweep_hz.clear();
            one.params.cutoff_hz = c;
            let s = compare(&d, None, &one).unwrap().report.rows[0].scores.unwrap().snr_db;
            assert!(s <= best);
        }
        assert!(swept.report.rows[0].parameters.contains("best of 3"));
    }

    #[test]
    fn sweep_list_stays_below_nyquist() {
        let s = default_cutoff_sweep(80e6);
        assert_eq!(s.first(), Some(&0.5e6));
        assert!(s.iter().all(|&c| c < 40e6));
        assert_eq!(s.len(), 79);
        assert!(default_cutoff_sweep(1000.0).iter().all(|&c| c < 500.0));
    }
}
