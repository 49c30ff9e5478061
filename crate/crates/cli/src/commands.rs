//! One function per subcommand. Each returns the report body and writes
//! its side files through [`Ctx`].

use std::path::{Path, PathBuf};

use funroot_core::far::{is_stationary, simulate_with, FarModel, NoiseSpec, SimulateOptions, StationarityReport, GENERATOR_NAME};
use funroot_core::funcspace::{fourier_basis, FunctionSeries, GridDomain, GridFunction};
use funroot_core::operators::{golden_unit_root_coupling, OperatorSpec, SeparableKernelOp};
use funroot_core::stats::{
    adf_test, detect_unit_roots_with, fpca, johansen_trace, score_series, AdfResult, DetectOptions, DetectionReport,
    JohansenResult, ScoreCentering,
};
use funroot_core::unitroot::{ar2_unit_root_check, classify, decompose, weak_unit_root_space, Ar2UnitRootReport, DecompositionReport, SpectrumReport};
use funroot_core::{Complex, Error};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::args::{AdfArgs, DetectArgs, FpcaArgs, FredholmArgs, JohansenArgs, ModelArgs, ModelKind, OperatorArgs, SeriesArgs, SimulateArgs};
use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::{write_series_csv, DatasetCsv, Layout, Table};
use crate::report::{InputsDigest, OutputDir};
use crate::svg::{line_chart, Line};

/// Shared state of one invocation.
pub struct Ctx {
    pub cfg: RunConfig,
    pub out: OutputDir,
    pub digest: InputsDigest,
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> Self {
        let out = OutputDir::new(cfg.out.clone());
        Self { cfg, out, digest: InputsDigest::new() }
    }

    fn input(&mut self, path: &Path) -> CliResult<()> {
        self.digest.read_file(path)?;
        Ok(())
    }

    fn write_if(&mut self, format: Format, name: &str, contents: impl AsRef<[u8]>) -> CliResult<Option<String>> {
        if self.cfg.wants(format) {
            self.out.write(name, contents.as_ref())?;
            Ok(Some(name.to_owned()))
        } else {
            Ok(None)
        }
    }
}

fn series_csv(series: &FunctionSeries<f64>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_series_csv(series, &mut buf)?;
    Ok(buf)
}

/// Rows `label,v1,..,vk` under a header.
fn columns_csv(header: &[String], labels: &[String], columns: &[Vec<f64>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::data(e.to_string()))?;
    for (t, label) in labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(columns.iter().map(|c| c[t].to_string()));
        w.write_record(&row).map_err(|e| CliError::data(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::data(e.to_string()))
}

// ---------------------------------------------------------------- model

#[derive(Serialize)]
pub struct ModelBody {
    pub model_file: String,
    pub kind: ModelKind,
    pub order: u8,
    pub grid_size: usize,
    pub noise_seed: u64,
    pub noise_std_devs: Vec<f64>,
}

pub fn build_model(args: &ModelArgs, grid_size: usize, seed: u64) -> CliResult<FarModel<f64>> {
    let domain = GridDomain::uniform(grid_size)?.into_shared();
    let reject = |flag: &str, set: bool| {
        if set {
            Err(CliError::usage(format!("--{flag} does not apply to the {:?} model", args.kind).to_lowercase()))
        } else {
            Ok(())
        }
    };
    reject("alpha", args.alpha.is_some() && args.kind != ModelKind::Fibonacci)?;
    reject("eigenvalues", !args.eigenvalues.is_empty() && args.kind != ModelKind::Spectral)?;
    reject("ar2-eigenvalues", !args.ar2_eigenvalues.is_empty() && args.kind != ModelKind::Spectral)?;
    reject("matrix", args.matrix.is_some() && args.kind != ModelKind::Matrix)?;

    let rank = match args.kind {
        ModelKind::Fibonacci => 2,
        ModelKind::Ou => 0,
        ModelKind::Spectral => {
            if args.eigenvalues.is_empty() {
                return Err(CliError::usage("the spectral model needs --eigenvalues"));
            }
            args.eigenvalues.len().max(args.ar2_eigenvalues.len())
        }
        ModelKind::Matrix => match &args.matrix {
            Some(m) => m.0.len(),
            None => return Err(CliError::usage("the matrix model needs --matrix")),
        },
    };
    let sd = if !args.noise_sd.is_empty() {
        args.noise_sd.clone()
    } else {
        match args.kind {
            // innovations along e₁ only
            ModelKind::Fibonacci => vec![1.0, 0.0],
            ModelKind::Ou => vec![1.0],
            _ => vec![1.0; rank],
        }
    };
    let count = rank.max(sd.len());
    if 2 * count >= grid_size {
        return Err(CliError::usage(format!("{count} Fourier functions need a grid of more than {} nodes", 2 * count)));
    }
    let e = fourier_basis(&domain, count);
    let rho = match args.kind {
        ModelKind::Fibonacci => OperatorSpec::fibonacci(
            args.alpha.unwrap_or_else(golden_unit_root_coupling),
            e[0].clone(),
            e[1].clone(),
        )?,
        ModelKind::Ou => OperatorSpec::point_exp(args.theta, domain.clone())?,
        ModelKind::Spectral => OperatorSpec::spectral(args.eigenvalues.clone(), e[..args.eigenvalues.len()].to_vec())?,
        ModelKind::Matrix => {
            let rows = &args.matrix.as_ref().expect("checked above").0;
            let n = rows.len();
            let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
            SeparableKernelOp::from_matrix(e[..n].to_vec(), &m)?.into()
        }
    };
    let noise = NoiseSpec::new(e[..sd.len()].to_vec(), sd, seed)?;
    Ok(if args.ar2_eigenvalues.is_empty() {
        FarModel::ar1(rho, noise)?
    } else {
        let rho2 = OperatorSpec::spectral(args.ar2_eigenvalues.clone(), e[..args.ar2_eigenvalues.len()].to_vec())?;
        FarModel::ar2(rho, rho2, noise)?
    })
}

pub fn cmd_model(ctx: &mut Ctx, args: &ModelArgs) -> CliResult<ModelBody> {
    let seed = ctx.cfg.seed.unwrap_or(0);
    let model = build_model(args, ctx.cfg.grid_size, seed)?;
    let mut json = serde_json::to_string_pretty(&model)?;
    json.push('\n');
    ctx.out.write(&args.name, json.as_bytes())?;
    Ok(ModelBody {
        model_file: args.name.clone(),
        kind: args.kind,
        order: model.order(),
        grid_size: ctx.cfg.grid_size,
        noise_seed: seed,
        noise_std_devs: model.noise().std_devs().to_vec(),
    })
}

// ------------------------------------------------------------ model files

/// Contents of a model or operator file.
pub enum ModelFile {
    Model(FarModel<f64>),
    Operator(OperatorSpec<f64>),
}

impl ModelFile {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: invalid JSON: {e}", path.display())))?;
        let ctx = |e: serde_json::Error| CliError::data(format!("{}: {e}", path.display()));
        if value.get("kind").is_some() {
            Ok(ModelFile::Operator(serde_json::from_value(value).map_err(ctx)?))
        } else {
            Ok(ModelFile::Model(serde_json::from_value(value).map_err(ctx)?))
        }
    }

    /// `(name, operator)` for each lag.
    pub fn operators(&self) -> Vec<(&'static str, &OperatorSpec<f64>)> {
        match self {
            ModelFile::Operator(op) => vec![("rho", op)],
            ModelFile::Model(m) => {
                let mut v = vec![("rho1", m.rho1())];
                if let Some(r2) = m.rho2() {
                    v.push(("rho2", r2));
                }
                v
            }
        }
    }

    fn order(&self) -> u8 {
        match self {
            ModelFile::Operator(_) => 1,
            ModelFile::Model(m) => m.order(),
        }
    }
}

// ------------------------------------------------------------- simulate

#[derive(Serialize)]
pub struct SimulationMeta {
    pub model: FarModel<f64>,
    pub seed: u64,
    pub burn_in: usize,
    pub replication: u64,
    pub length: usize,
    pub generator: &'static str,
}

#[derive(Serialize)]
pub struct SimulateBody {
    pub series_file: String,
    pub meta_file: String,
    pub length: usize,
    pub grid_size: usize,
    pub burn_in: usize,
    pub replication: u64,
    pub seed: u64,
    pub generator: &'static str,
    pub stationarity: StationarityReport<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<String>,
}

fn meta_name(series_name: &str) -> String {
    let stem = series_name.strip_suffix(".csv").unwrap_or(series_name);
    format!("{stem}.meta.json")
}

pub fn cmd_simulate(ctx: &mut Ctx, args: &SimulateArgs) -> CliResult<SimulateBody> {
    ctx.input(&args.model)?;
    let mut model = match ModelFile::read(&args.model)? {
        ModelFile::Model(m) => m,
        ModelFile::Operator(_) => {
            return Err(CliError::usage("simulate needs a model file with a noise specification, not a bare operator"))
        }
    };
    if let Some(seed) = ctx.cfg.seed {
        model = model.with_noise(model.noise().with_seed(seed))?;
    }
    let seed = model.noise().seed();
    let path = simulate_with(
        &model,
        args.length,
        None,
        SimulateOptions { burn_in: args.burn_in, replication: args.replication },
    )?;
    let stationarity = is_stationary(&model)?;
    ctx.out.write(&args.name, &series_csv(&path.series)?)?;
    let meta = SimulationMeta {
        model: model.clone(),
        seed,
        burn_in: path.burn_in,
        replication: args.replication,
        length: args.length,
        generator: GENERATOR_NAME,
    };
    let meta_file = meta_name(&args.name);
    let mut meta_json = serde_json::to_string_pretty(&meta)?;
    meta_json.push('\n');
    ctx.out.write(&meta_file, meta_json.as_bytes())?;

    let plot = if ctx.cfg.wants(Format::Svg) {
        let basis = model.noise().basis();
        let coords: Vec<Vec<f64>> = basis
            .iter()
            .take(3)
            .map(|e| score_series(&path.series, e))
            .collect::<Result<_, _>>()?;
        let lines: Vec<Line> = coords
            .iter()
            .enumerate()
            .map(|(i, c)| Line { label: format!("<X_n, e{}>", i + 1), values: c })
            .collect();
        let svg = line_chart("Simulated path in the noise basis", "n", None, &lines);
        ctx.write_if(Format::Svg, "simulate.svg", svg)?
    } else {
        None
    };
    Ok(SimulateBody {
        series_file: args.name.clone(),
        meta_file,
        length: args.length,
        grid_size: model.domain().len(),
        burn_in: path.burn_in,
        replication: args.replication,
        seed,
        generator: GENERATOR_NAME,
        stationarity,
        plot,
    })
}

// ------------------------------------------------------------- spectrum

#[derive(Serialize)]
pub struct OperatorSpectrum {
    pub name: &'static str,
    pub spectral_radius: f64,
    pub has_strong_unit_root: bool,
    pub unit_multiplicity: usize,
    /// Dimension of `Ker(ρ* − I)`; absent when the adjoint is not representable.
    pub weak_unit_root_dim: Option<usize>,
    #[serde(flatten)]
    pub classification: SpectrumReport<f64>,
}

#[derive(Serialize)]
pub struct SpectrumBody {
    pub order: u8,
    pub tol_unit: f64,
    pub operators: Vec<OperatorSpectrum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationarity: Option<StationarityReport<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ar2: Option<Ar2UnitRootReport<f64>>,
}

pub fn cmd_spectrum(ctx: &mut Ctx, args: &OperatorArgs) -> CliResult<SpectrumBody> {
    ctx.input(&args.model)?;
    let file = ModelFile::read(&args.model)?;
    let tol = ctx.cfg.tol_unit();
    let mut operators = Vec::new();
    let mut rows = Vec::new();
    for (name, op) in file.operators() {
        let classification = classify(op, tol)?;
        let weak_unit_root_dim = match weak_unit_root_space(op, tol) {
            Ok(b) => Some(b.len()),
            Err(Error::UnsupportedAdjoint) => None,
            Err(e) => return Err(e.into()),
        };
        for (i, l) in classification.eigenvalues.iter().enumerate() {
            let class = if classification.unit_set.contains(&i) {
                "unit"
            } else if classification.stable_set.contains(&i) {
                "stable"
            } else {
                "boundary"
            };
            rows.push(format!("{name},{},{},{},{},{class}", i, l.re, l.im, l.norm()));
        }
        operators.push(OperatorSpectrum {
            name,
            spectral_radius: op.spectral_radius()?,
            has_strong_unit_root: classification.has_strong_unit_root(),
            unit_multiplicity: classification.unit_multiplicity(),
            weak_unit_root_dim,
            classification,
        });
    }
    let (stationarity, ar2) = match &file {
        ModelFile::Model(m) => {
            let ar2 = if m.order() == 2 {
                match ar2_unit_root_check(m, tol) {
                    Ok(r) => Some(r),
                    Err(Error::UnsupportedAdjoint) => None,
                    Err(e) => return Err(e.into()),
                }
            } else {
                None
            };
            (Some(is_stationary(m)?), ar2)
        }
        ModelFile::Operator(_) => (None, None),
    };
    let csv = format!("operator,index,re,im,modulus,class\n{}\n", rows.join("\n"));
    ctx.write_if(Format::Csv, "eigenvalues.csv", csv)?;
    Ok(SpectrumBody { order: file.order(), tol_unit: tol, operators, stationarity, ar2 })
}

// ------------------------------------------------------------- fredholm

#[derive(Serialize)]
pub struct FredholmPoint {
    pub z: Complex<f64>,
    pub p: Complex<f64>,
}

#[derive(Serialize)]
pub struct ReciprocalCheck {
    pub lambda: Complex<f64>,
    pub abs_p: f64,
}

#[derive(Serialize)]
pub struct FredholmOperator {
    pub name: &'static str,
    pub points: Vec<FredholmPoint>,
    /// `|p(1/λ)|` at every nonzero eigenvalue; zero up to rounding.
    pub at_reciprocal_eigenvalues: Vec<ReciprocalCheck>,
}

#[derive(Serialize)]
pub struct FredholmBody {
    pub operators: Vec<FredholmOperator>,
}

pub fn cmd_fredholm(ctx: &mut Ctx, args: &FredholmArgs) -> CliResult<FredholmBody> {
    ctx.input(&args.model)?;
    let file = ModelFile::read(&args.model)?;
    let zs: Vec<Complex<f64>> = if args.z.is_empty() {
        vec![Complex::new(1.0, 0.0)]
    } else {
        args.z.iter().map(|&[re, im]| Complex::new(re, im)).collect()
    };
    let mut operators = Vec::new();
    let mut rows = Vec::new();
    for (name, op) in file.operators() {
        let points = zs
            .iter()
            .map(|&z| Ok(FredholmPoint { z, p: op.fredholm_determinant(z)? }))
            .collect::<CliResult<Vec<_>>>()?;
        for pt in &points {
            rows.push(format!("{name},{},{},{},{}", pt.z.re, pt.z.im, pt.p.re, pt.p.im));
        }
        let at_reciprocal_eigenvalues = op
            .spectrum()?
            .into_iter()
            .filter(|l| l.norm() > 0.0)
            .map(|l| Ok(ReciprocalCheck { lambda: l, abs_p: op.fredholm_determinant(l.inv())?.norm() }))
            .collect::<CliResult<Vec<_>>>()?;
        operators.push(FredholmOperator { name, points, at_reciprocal_eigenvalues });
    }
    let csv = format!("operator,z_re,z_im,p_re,p_im\n{}\n", rows.join("\n"));
    ctx.write_if(Format::Csv, "fredholm.csv", csv)?;
    Ok(FredholmBody { operators })
}

// ------------------------------------------------------------ decompose

#[derive(Serialize)]
pub struct DecomposeBody {
    pub weak_unit_root_dim: Option<usize>,
    #[serde(flatten)]
    pub decomposition: DecompositionReport<f64>,
}

pub fn cmd_decompose(ctx: &mut Ctx, args: &OperatorArgs) -> CliResult<DecomposeBody> {
    ctx.input(&args.model)?;
    let file = ModelFile::read(&args.model)?;
    if file.order() != 1 {
        return Err(CliError::usage("the decomposition applies to order-1 models"));
    }
    let op = file.operators()[0].1;
    let tol = ctx.cfg.tol_unit();
    let dec = decompose(op, tol)?;
    let weak_unit_root_dim = match weak_unit_root_space(op, tol) {
        Ok(b) => Some(b.len()),
        Err(Error::UnsupportedAdjoint) => None,
        Err(e) => return Err(e.into()),
    };
    if ctx.cfg.wants(Format::Csv) {
        let basis = FunctionSeries::new(dec.trend_basis.clone())?;
        ctx.out.write("trend_basis.csv", &series_csv(&basis)?)?;
    }
    if ctx.cfg.wants(Format::Svg) {
        let lines: Vec<Line> = dec
            .trend_basis
            .iter()
            .enumerate()
            .map(|(i, u)| Line { label: format!("u{}", i + 1), values: u.values() })
            .collect();
        let nodes = op.domain().nodes().to_vec();
        ctx.out.write("trend_basis.svg", line_chart("Basis of the unit-root space", "t", Some(&nodes), &lines).as_bytes())?;
    }
    Ok(DecomposeBody { weak_unit_root_dim, decomposition: dec.report() })
}

// ----------------------------------------------------------- series input

/// A loaded series with one label per frame.
pub struct LoadedSeries {
    pub series: FunctionSeries<f64>,
    pub labels: Vec<String>,
}

pub fn load(ctx: &mut Ctx, args: &SeriesArgs) -> CliResult<LoadedSeries> {
    ctx.input(&args.input)?;
    let opts = args.ingest_options();
    match args.layout {
        Layout::Dataset => {
            let sel = DatasetCsv::read(&args.input)?.select(&opts)?;
            Ok(LoadedSeries { labels: sel.years.iter().map(i64::to_string).collect(), series: sel.series })
        }
        Layout::Path => {
            let series = crate::ingest::load_series(&args.input, Layout::Path, &opts)?;
            Ok(LoadedSeries { labels: (0..series.len()).map(|n| n.to_string()).collect(), series })
        }
    }
}

#[derive(Serialize)]
pub struct SeriesSummary {
    pub nobs: usize,
    pub grid_size: usize,
    pub first: String,
    pub last: String,
}

impl LoadedSeries {
    fn summary(&self) -> SeriesSummary {
        SeriesSummary {
            nobs: self.series.len(),
            grid_size: self.series.domain().len(),
            first: self.labels.first().cloned().unwrap_or_default(),
            last: self.labels.last().cloned().unwrap_or_default(),
        }
    }
}

fn score_outputs(ctx: &mut Ctx, title: &str, labels: &[String], columns: &[Vec<f64>]) -> CliResult<(Option<String>, Option<String>)> {
    let mut header = vec!["time".to_owned()];
    header.extend((1..=columns.len()).map(|k| format!("pc{k}")));
    let csv = if ctx.cfg.wants(Format::Csv) {
        ctx.write_if(Format::Csv, "scores.csv", columns_csv(&header, labels, columns)?)?
    } else {
        None
    };
    let svg = if ctx.cfg.wants(Format::Svg) {
        let x: Option<Vec<f64>> = labels.iter().map(|l| l.parse::<f64>().ok()).collect();
        let lines: Vec<Line> = columns
            .iter()
            .enumerate()
            .map(|(k, c)| Line { label: format!("FPC {}", k + 1), values: c })
            .collect();
        ctx.write_if(Format::Svg, "scores.svg", line_chart(title, "time", x.as_deref(), &lines))?
    } else {
        None
    };
    Ok((csv, svg))
}

// ----------------------------------------------------------------- fpca

#[derive(Serialize)]
pub struct FpcaBody {
    #[serde(flatten)]
    pub input: SeriesSummary,
    pub k: usize,
    pub eigenvalues: Vec<f64>,
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
    pub mean: GridFunction<f64>,
    pub eigenfunctions: Vec<GridFunction<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<String>,
}

pub fn cmd_fpca(ctx: &mut Ctx, args: &FpcaArgs) -> CliResult<FpcaBody> {
    let data = load(ctx, &args.series)?;
    let pca = fpca(&data.series, args.k)?;
    let columns: Vec<Vec<f64>> = (0..args.k).map(|c| pca.score_column(c)).collect();
    let (scores_file, plot) = score_outputs(
        ctx,
        &format!("Scores on the first {} functional principal components", args.k),
        &data.labels,
        &columns,
    )?;
    if ctx.cfg.wants(Format::Csv) {
        let ef = FunctionSeries::new(pca.eigenfunctions.clone())?;
        ctx.out.write("eigenfunctions.csv", &series_csv(&ef)?)?;
    }
    Ok(FpcaBody {
        input: data.summary(),
        k: args.k,
        eigenvalues: pca.eigenvalues[..args.k].to_vec(),
        explained_variance: pca.explained_variance_ratio(),
        total_variance: pca.eigenvalues.iter().map(|l| l.max(0.0)).sum(),
        mean: pca.mean.clone(),
        eigenfunctions: pca.eigenfunctions.clone(),
        scores_file,
        plot,
    })
}

// ------------------------------------------------------------------ adf

#[derive(Serialize)]
pub struct AdfBody {
    pub column: String,
    pub length: usize,
    #[serde(flatten)]
    pub result: AdfResult,
}

pub fn cmd_adf(ctx: &mut Ctx, args: &AdfArgs) -> CliResult<AdfBody> {
    ctx.input(&args.input)?;
    let table = Table::read(&args.input)?;
    let (name, y) = table.column(&args.column)?;
    let result = adf_test(y, args.lags, args.spec)?;
    Ok(AdfBody { column: name.to_owned(), length: y.len(), result })
}

// ------------------------------------------------------------- johansen

#[derive(Serialize)]
pub struct JohansenBody {
    pub columns: Vec<String>,
    #[serde(flatten)]
    pub result: JohansenResult,
}

pub fn cmd_johansen(ctx: &mut Ctx, args: &JohansenArgs) -> CliResult<JohansenBody> {
    ctx.input(&args.input)?;
    let table = Table::read(&args.input)?;
    let keys: Vec<String> = if args.columns.is_empty() {
        table.names.clone()
    } else {
        args.columns.clone()
    };
    let mut names = Vec::new();
    let mut cols = Vec::new();
    for k in &keys {
        let (n, c) = table.column(k)?;
        names.push(n.to_owned());
        cols.push(c);
    }
    let t = cols.first().map_or(0, |c| c.len());
    let y = DMatrix::from_fn(t, cols.len(), |i, j| cols[j][i]);
    let result = johansen_trace(&y, args.lags, args.det, args.level)?;
    Ok(JohansenBody { columns: names, result })
}

// --------------------------------------------------------------- detect

#[derive(Serialize)]
pub struct DetectBody {
    #[serde(flatten)]
    pub input: SeriesSummary,
    pub k: usize,
    #[serde(flatten)]
    pub report: DetectionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<String>,
}

pub fn detect_options(args: &DetectArgs) -> DetectOptions {
    DetectOptions {
        adf_lags: args.adf_lags,
        adf_spec: args.adf_spec,
        centering: args.centering,
        johansen_lags: args.johansen_lags,
        johansen_det: args.johansen_det,
        johansen_level: args.johansen_level,
    }
}

pub fn cmd_detect(ctx: &mut Ctx, args: &DetectArgs) -> CliResult<DetectBody> {
    let data = load(ctx, &args.series)?;
    let opts = detect_options(args);
    let report = detect_unit_roots_with(&data.series, args.k, args.level, &opts)?;
    let (scores_file, plot) = if ctx.cfg.wants(Format::Csv) || ctx.cfg.wants(Format::Svg) {
        // the series the unit-root tests saw
        let pca = fpca(&data.series, args.k)?;
        let columns = match opts.centering {
            ScoreCentering::Raw => pca
                .eigenfunctions
                .iter()
                .map(|phi| score_series(&data.series, phi))
                .collect::<Result<Vec<_>, _>>()?,
            ScoreCentering::Centered => (0..args.k).map(|c| pca.score_column(c)).collect(),
        };
        score_outputs(ctx, &format!("Coefficients of the first {} FPCs", args.k), &data.labels, &columns)?
    } else {
        (None, None)
    };
    Ok(DetectBody { input: data.summary(), k: args.k, report, scores_file, plot })
}

/// Default report file of a command.
pub fn report_name(command: &str) -> PathBuf {
    PathBuf::from(format!("{command}.report.json"))
}
