//! Stage runner: layered configuration, on-disk artifacts, the run manifest
//! and the output-directory lock.
//!
//! Every stage reads its inputs from files and writes its outputs to the
//! output directory, so running `pipeline` is the same as running `ingest`,
//! `dict`, `matrix`, `efa` and `report` in turn with the same configuration.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::efa::{
    correlation_matrix, extract_uls, prune_loadings, refine_factors, select_factor_count,
    symmetric_eigenvalues, write_loadings_csv, FactorMethod, FactorModel, LoadingTable, UlsOptions,
    VarimaxOptions,
};
use crate::error::{Error, Result};
use crate::ingest::{load_reviews, read_jsonl, write_jsonl, InputFormat, Review};
use crate::lexicon::{build_dictionary, parse_lexical_database, Lexicon, StopWords, TermDictionary, DATABASE_FILES};
use crate::matrix::{
    build_matrix, filter_low_variance, load_matrix, save_matrix, write_array_symmetric, DocTermMatrix,
    MatrixFiles, VarianceFilter,
};
use crate::report::{attach_labels, build_reports, emit_report, read_labels, FactorReport, ReportFormat};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// One source of settings (config file or command-line flags); unset fields
/// fall through to the layer below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub reviews: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub min_variance: Option<f64>,
    pub top_k_variance: Option<usize>,
    pub factors: Option<String>,
    pub threshold: Option<f64>,
    pub retain: Option<usize>,
    pub uls_tol: Option<f64>,
    pub uls_max_iter: Option<usize>,
    pub kaiser_normalize: Option<bool>,
    pub varimax_tol: Option<f64>,
    pub varimax_max_iter: Option<usize>,
    pub exemplars: Option<usize>,
    pub dump_correlation: Option<bool>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ConfigLayer {
    /// Parse a TOML config file. Relative paths in it are taken relative to
    /// the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut layer: ConfigLayer = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut layer.reviews,
            &mut layer.lexicon,
            &mut layer.stopwords,
            &mut layer.labels,
            &mut layer.output_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(layer)
    }

    /// `over` wins field by field. Setting either variance option in `over`
    /// replaces the variance mode of `self` entirely.
    pub fn overlay(self, over: ConfigLayer) -> ConfigLayer {
        let (min_variance, top_k_variance) = if over.min_variance.is_some() || over.top_k_variance.is_some() {
            (over.min_variance, over.top_k_variance)
        } else {
            (self.min_variance, self.top_k_variance)
        };
        ConfigLayer {
            reviews: over.reviews.or(self.reviews),
            lexicon: over.lexicon.or(self.lexicon),
            stopwords: over.stopwords.or(self.stopwords),
            labels: over.labels.or(self.labels),
            min_variance,
            top_k_variance,
            factors: over.factors.or(self.factors),
            threshold: over.threshold.or(self.threshold),
            retain: over.retain.or(self.retain),
            uls_tol: over.uls_tol.or(self.uls_tol),
            uls_max_iter: over.uls_max_iter.or(self.uls_max_iter),
            kaiser_normalize: over.kaiser_normalize.or(self.kaiser_normalize),
            varimax_tol: over.varimax_tol.or(self.varimax_tol),
            varimax_max_iter: over.varimax_max_iter.or(self.varimax_max_iter),
            exemplars: over.exemplars.or(self.exemplars),
            dump_correlation: over.dump_correlation.or(self.dump_correlation),
            output_dir: over.output_dir.or(self.output_dir),
            threads: over.threads.or(self.threads),
        }
    }
}

/// Fully resolved settings for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub reviews: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    /// `None` uses the bundled English list.
    pub stopwords: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub variance: VarianceFilter,
    pub factors: FactorMethod,
    pub threshold: f64,
    pub retain: usize,
    pub uls: UlsOptions,
    pub varimax: VarimaxOptions,
    pub exemplars: usize,
    pub dump_correlation: bool,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses the machine's parallelism.
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::resolve(ConfigLayer::default()).expect("defaults are valid")
    }
}

impl PipelineConfig {
    pub fn resolve(layer: ConfigLayer) -> Result<Self> {
        let variance = match (layer.min_variance, layer.top_k_variance) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("set only one of min_variance and top_k_variance".into()))
            }
            (Some(v), None) => {
                if !(v > 0.0 && v < 0.25) {
                    return Err(Error::Config(format!("min_variance must lie in (0, 0.25), got {v}")));
                }
                VarianceFilter::MinVariance(v)
            }
            (None, Some(k)) => {
                if k == 0 {
                    return Err(Error::Config("top_k_variance must be at least 1".into()));
                }
                VarianceFilter::TopK(k)
            }
            (None, None) => VarianceFilter::MinVariance(0.01),
        };
        let factors = match &layer.factors {
            Some(s) => s.parse()?,
            None => FactorMethod::Kaiser,
        };
        if matches!(factors, FactorMethod::Fixed(0)) {
            return Err(Error::Config("fixed factor count must be at least 1".into()));
        }
        let threshold = layer.threshold.unwrap_or(0.3);
        if !(threshold >= 0.0 && threshold.is_finite()) {
            return Err(Error::Config(format!("threshold must be >= 0, got {threshold}")));
        }
        let retain = layer.retain.unwrap_or(15);
        if retain == 0 {
            return Err(Error::Config("retain must be at least 1".into()));
        }
        let uls = UlsOptions {
            tol: layer.uls_tol.unwrap_or(UlsOptions::default().tol),
            max_iter: layer.uls_max_iter.unwrap_or(UlsOptions::default().max_iter),
        };
        let varimax = VarimaxOptions {
            kaiser_normalize: layer.kaiser_normalize.unwrap_or(true),
            tol: layer.varimax_tol.unwrap_or(VarimaxOptions::default().tol),
            max_iter: layer.varimax_max_iter.unwrap_or(VarimaxOptions::default().max_iter),
        };
        for (name, tol) in [("uls_tol", uls.tol), ("varimax_tol", varimax.tol)] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {tol}")));
            }
        }
        if uls.max_iter == 0 || varimax.max_iter == 0 {
            return Err(Error::Config("iteration budgets must be at least 1".into()));
        }
        if layer.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(PipelineConfig {
            reviews: layer.reviews,
            lexicon: layer.lexicon,
            stopwords: layer.stopwords,
            labels: layer.labels,
            variance,
            factors,
            threshold,
            retain,
            uls,
            varimax,
            exemplars: layer.exemplars.unwrap_or(20),
            dump_correlation: layer.dump_correlation.unwrap_or(false),
            output_dir: layer.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            threads: layer.threads,
        })
    }

    pub fn artifacts(&self) -> Artifacts {
        Artifacts::new(&self.output_dir)
    }

    /// The settings that determine artifact contents. Output directory and
    /// thread count are left out: neither may change a result.
    pub fn snapshot(&self) -> ConfigSnapshot {
        let show = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let (min_variance, top_k_variance) = match self.variance {
            VarianceFilter::MinVariance(v) => (Some(v), None),
            VarianceFilter::TopK(k) => (None, Some(k)),
        };
        ConfigSnapshot {
            reviews: show(&self.reviews),
            lexicon: show(&self.lexicon),
            stopwords: show(&self.stopwords),
            labels: show(&self.labels),
            min_variance,
            top_k_variance,
            factors: self.factors.to_string(),
            threshold: self.threshold,
            retain: self.retain,
            uls_tol: self.uls.tol,
            uls_max_iter: self.uls.max_iter,
            kaiser_normalize: self.varimax.kaiser_normalize,
            varimax_tol: self.varimax.tol,
            varimax_max_iter: self.varimax.max_iter,
            exemplars: self.exemplars,
            dump_correlation: self.dump_correlation,
        }
    }

    fn require<'a>(&self, value: &'a Option<PathBuf>, name: &str) -> Result<&'a Path> {
        value
            .as_deref()
            .ok_or_else(|| Error::Config(format!("`{name}` is not set (config file or --{name})")))
    }

    /// Check that the inputs a stage reads from outside the output directory exist.
    pub fn validate_for(&self, stage: Stage) -> Result<()> {
        let must_exist = |p: &Path, what: &str, dir: bool| {
            let ok = if dir { p.is_dir() } else { p.is_file() };
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} {} does not exist", p.display())))
            }
        };
        match stage {
            Stage::Ingest => must_exist(self.require(&self.reviews, "reviews")?, "review file", false)?,
            Stage::Dict | Stage::Matrix => {
                must_exist(self.require(&self.lexicon, "lexicon")?, "lexical database directory", true)?;
                if let Some(s) = &self.stopwords {
                    must_exist(s, "stopword file", false)?;
                }
            }
            Stage::Report => {
                if let Some(l) = &self.labels {
                    must_exist(l, "label file", false)?;
                }
            }
            Stage::Efa => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub reviews: Option<String>,
    pub lexicon: Option<String>,
    pub stopwords: Option<String>,
    pub labels: Option<String>,
    pub min_variance: Option<f64>,
    pub top_k_variance: Option<usize>,
    pub factors: String,
    pub threshold: f64,
    pub retain: usize,
    pub uls_tol: f64,
    pub uls_max_iter: usize,
    pub kaiser_normalize: bool,
    pub varimax_tol: f64,
    pub varimax_max_iter: usize,
    pub exemplars: usize,
    pub dump_correlation: bool,
}

/// Reproducibility record kept in `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: ConfigSnapshot,
    /// Input name → SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    /// Dimensions and counts of the artifacts, by name.
    pub counts: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::Dependency(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Ingest,
    Dict,
    Matrix,
    Efa,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Ingest, Stage::Dict, Stage::Matrix, Stage::Efa, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Dict => "dict",
            Stage::Matrix => "matrix",
            Stage::Efa => "efa",
            Stage::Report => "report",
        }
    }
}

/// File layout of an output directory.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Artifacts { dir: dir.to_path_buf() }
    }

    fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn reviews(&self) -> PathBuf {
        self.file("reviews.jsonl")
    }
    pub fn dictionary(&self) -> PathBuf {
        self.file("dictionary.tsv")
    }
    pub fn matrix(&self) -> MatrixFiles {
        MatrixFiles::new(&self.dir, "matrix")
    }
    pub fn filtered(&self) -> MatrixFiles {
        MatrixFiles::new(&self.dir, "filtered")
    }
    pub fn variance_filter(&self) -> PathBuf {
        self.file("variance_filter.tsv")
    }
    pub fn correlation(&self) -> PathBuf {
        self.file("correlation.mtx")
    }
    pub fn model(&self) -> PathBuf {
        self.file("model.json")
    }
    pub fn loadings_json(&self) -> PathBuf {
        self.file("loadings.json")
    }
    pub fn loadings_csv(&self) -> PathBuf {
        self.file("loadings.csv")
    }
    pub fn report(&self, format: ReportFormat) -> PathBuf {
        self.file(format.file_name())
    }
    pub fn manifest(&self) -> PathBuf {
        self.file("manifest.json")
    }
    pub fn lock(&self) -> PathBuf {
        self.file(".lexfactor.lock")
    }
}

/// Pruned loadings of every extracted factor and the refined subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadingsArtifact {
    pub threshold: f64,
    pub retain: usize,
    pub pruned: LoadingTable,
    pub refined: LoadingTable,
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = Artifacts::new(dir).lock();
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Validation(format!(
                "output directory {} is in use by another run (remove {} if that run is gone)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Dependency(path.to_path_buf()))
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Error::Validation(format!("serialization: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    require_file(path)?;
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

/// Load, update and rewrite the manifest. `fresh` discards any previous one.
fn update_manifest(
    cfg: &PipelineConfig,
    fresh: bool,
    inputs: BTreeMap<String, String>,
    counts: BTreeMap<String, u64>,
) -> Result<()> {
    let path = cfg.artifacts().manifest();
    let mut manifest = match (fresh, path.is_file()) {
        (false, true) => RunManifest::read(&path)?,
        _ => RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            config: cfg.snapshot(),
            inputs: BTreeMap::new(),
            counts: BTreeMap::new(),
        },
    };
    manifest.tool_version = TOOL_VERSION.to_string();
    manifest.config = cfg.snapshot();
    manifest.inputs.extend(inputs);
    manifest.counts.extend(counts);
    write_file(&path, &to_json(&manifest)?)
}

fn counts<const N: usize>(pairs: [(&str, usize); N]) -> BTreeMap<String, u64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v as u64)).collect()
}

fn load_corpus(art: &Artifacts) -> Result<Vec<Review>> {
    let path = art.reviews();
    require_file(&path)?;
    let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
    read_jsonl(BufReader::new(f), &path.display().to_string())
}

fn load_dictionary(art: &Artifacts) -> Result<TermDictionary> {
    let path = art.dictionary();
    require_file(&path)?;
    let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
    TermDictionary::read_tsv(BufReader::new(f), &path.display().to_string())
}

fn load_lexicon(cfg: &PipelineConfig) -> Result<(Lexicon, StopWords, BTreeMap<String, String>)> {
    let dir = cfg.require(&cfg.lexicon, "lexicon")?;
    let lex = parse_lexical_database(dir)?;
    let mut inputs = BTreeMap::new();
    for name in DATABASE_FILES {
        inputs.insert(format!("lexicon/{name}"), sha256_file(&dir.join(name))?);
    }
    let stopwords = match &cfg.stopwords {
        Some(p) => {
            inputs.insert("stopwords".into(), sha256_file(p)?);
            StopWords::from_file(p)?
        }
        None => {
            inputs.insert("stopwords".into(), "builtin:english".into());
            StopWords::english()
        }
    };
    Ok((lex, stopwords, inputs))
}

fn ingest(cfg: &PipelineConfig) -> Result<()> {
    let src = cfg.require(&cfg.reviews, "reviews")?;
    let reviews = load_reviews(src, InputFormat::from_path(src))?;
    let art = cfg.artifacts();
    let path = art.reviews();
    let mut out = create(&path)?;
    write_jsonl(&reviews, &mut out).map_err(|e| Error::io(&path, e))?;
    out.flush().map_err(|e| Error::io(&path, e))?;
    let inputs = BTreeMap::from([("reviews".to_string(), sha256_file(src)?)]);
    update_manifest(cfg, true, inputs, counts([("reviews", reviews.len())]))
}

fn dict(cfg: &PipelineConfig) -> Result<()> {
    let art = cfg.artifacts();
    let corpus = load_corpus(&art)?;
    let (lex, stopwords, inputs) = load_lexicon(cfg)?;
    let dictionary = build_dictionary(&corpus, &lex, &stopwords)?;
    let path = art.dictionary();
    dictionary.write_tsv(create(&path)?)?;
    update_manifest(cfg, false, inputs, counts([("dictionary_terms", dictionary.len())]))
}

fn matrix(cfg: &PipelineConfig) -> Result<()> {
    let art = cfg.artifacts();
    let corpus = load_corpus(&art)?;
    let dictionary = load_dictionary(&art)?;
    let (lex, stopwords, inputs) = load_lexicon(cfg)?;
    let m = build_matrix(&corpus, &dictionary, &lex, &stopwords)?;
    save_matrix(&m, &art.matrix())?;
    let (filtered, report) = filter_low_variance(&m, cfg.variance)?;
    save_matrix(&filtered, &art.filtered())?;
    let path = art.variance_filter();
    let mut out = create(&path)?;
    report
        .write_tsv(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&path, e))?;
    update_manifest(
        cfg,
        false,
        inputs,
        counts([
            ("matrix_docs", m.n_docs()),
            ("matrix_terms", m.n_terms()),
            ("matrix_nnz", m.nnz()),
            ("filtered_terms", filtered.n_terms()),
            ("filtered_nnz", filtered.nnz()),
        ]),
    )
}

/// Correlation, factor count, extraction, rotation, pruning and refinement
/// over the filtered matrix.
pub fn analyze(m: &DocTermMatrix, cfg: &PipelineConfig) -> Result<(FactorModel<f64>, LoadingsArtifact)> {
    let c = correlation_matrix::<f64>(m)?;
    let p = c.dim();
    if p < 2 {
        return Err(Error::Validation(format!(
            "factor analysis needs at least 2 retained terms, got {p}"
        )));
    }
    let spectrum = symmetric_eigenvalues(c.values())?;
    // Extraction needs k < p, so a fixed count is capped at p - 1.
    let k = select_factor_count(spectrum.as_slice().expect("contiguous"), cfg.factors)?.min(p - 1);
    let model = extract_uls(&c, k, &cfg.uls)?.rotate_varimax(&cfg.varimax);
    let pruned = prune_loadings(&model, m.terms(), cfg.threshold)?;
    let refined = refine_factors(&pruned, cfg.retain)?;
    Ok((
        model,
        LoadingsArtifact {
            threshold: cfg.threshold,
            retain: cfg.retain,
            pruned,
            refined,
        },
    ))
}

fn efa(cfg: &PipelineConfig) -> Result<()> {
    let art = cfg.artifacts();
    let m = load_matrix(&art.filtered())?;
    if cfg.dump_correlation {
        let c = correlation_matrix::<f64>(&m)?;
        let path = art.correlation();
        let mut out = create(&path)?;
        write_array_symmetric(c.values(), &mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(&path, e))?;
    }
    let (model, loadings) = analyze(&m, cfg)?;
    write_file(&art.model(), &to_json(&model)?)?;
    write_file(&art.loadings_json(), &to_json(&loadings)?)?;
    let path = art.loadings_csv();
    write_loadings_csv(&model, m.terms(), &loadings.refined, create(&path)?)?;
    let pruned_total: usize = loadings.pruned.factors.iter().map(|f| f.entries.len()).sum();
    let refined_total: usize = loadings.refined.factors.iter().map(|f| f.entries.len()).sum();
    update_manifest(
        cfg,
        false,
        BTreeMap::new(),
        counts([
            ("correlation_dim", model.p()),
            ("eigenvalues_above_one", model.eigenvalues.iter().filter(|&&v| v > 1.0).count()),
            ("factors_extracted", model.k),
            ("factors_retained", loadings.refined.factors.len()),
            ("pruned_loadings", pruned_total),
            ("retained_loadings", refined_total),
            ("uls_iterations", model.extraction.iterations),
            ("uls_converged", model.extraction.converged as usize),
            ("heywood_cases", model.extraction.heywood.len()),
        ]),
    )
}

fn report(cfg: &PipelineConfig) -> Result<()> {
    let art = cfg.artifacts();
    let loadings: LoadingsArtifact = read_json(&art.loadings_json())?;
    let m = load_matrix(&art.filtered())?;
    let mut reports = build_reports(&loadings.refined, &m, cfg.exemplars)?;
    let mut inputs = BTreeMap::new();
    if let Some(path) = &cfg.labels {
        reports = attach_labels(reports, &read_labels(path)?)?;
        inputs.insert("labels".to_string(), sha256_file(path)?);
    }
    for format in ReportFormat::ALL {
        emit_report(&reports, format, &art.dir)?;
    }
    let labeled = reports.iter().filter(|r| r.theme_label.is_some()).count();
    update_manifest(
        cfg,
        false,
        inputs,
        counts([("report_factors", reports.len()), ("labeled_factors", labeled)]),
    )
}

fn run_one(stage: Stage, cfg: &PipelineConfig) -> Result<()> {
    let result = match stage {
        Stage::Ingest => ingest(cfg),
        Stage::Dict => dict(cfg),
        Stage::Matrix => matrix(cfg),
        Stage::Efa => efa(cfg),
        Stage::Report => report(cfg),
    };
    result.map_err(|e| e.in_stage(stage.name()))
}

fn with_pool<R: Send>(cfg: &PipelineConfig, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    let threads = cfg
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?
        .install(f)
}

/// Run one stage against the output directory.
pub fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<()> {
    cfg.validate_for(stage)?;
    let _lock = DirLock::acquire(&cfg.output_dir)?;
    with_pool(cfg, || run_one(stage, cfg))
}

/// Every stage in order. All external inputs are checked before any work.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<()> {
    for stage in Stage::ALL {
        cfg.validate_for(stage)?;
    }
    let _lock = DirLock::acquire(&cfg.output_dir)?;
    with_pool(cfg, || Stage::ALL.into_iter().try_for_each(|s| run_one(s, cfg)))
}

/// A manifest count that disagrees with the artifact it describes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMismatch {
    pub key: String,
    pub manifest: u64,
    pub actual: u64,
}

/// Recompute every manifest count from the artifacts in `dir`.
pub fn verify(dir: &Path) -> Result<Vec<CountMismatch>> {
    let art = Artifacts::new(dir);
    let manifest = RunManifest::read(&art.manifest())?;
    let mut actual: BTreeMap<String, u64> = BTreeMap::new();
    let has = |keys: &[&str]| keys.iter().any(|k| manifest.counts.contains_key(*k));
    if has(&["reviews"]) {
        actual.extend(counts([("reviews", load_corpus(&art)?.len())]));
    }
    if has(&["dictionary_terms"]) {
        actual.extend(counts([("dictionary_terms", load_dictionary(&art)?.len())]));
    }
    if has(&["matrix_docs", "matrix_terms", "matrix_nnz"]) {
        let m = load_matrix(&art.matrix())?;
        actual.extend(counts([
            ("matrix_docs", m.n_docs()),
            ("matrix_terms", m.n_terms()),
            ("matrix_nnz", m.nnz()),
        ]));
    }
    if has(&["filtered_terms", "filtered_nnz"]) {
        let m = load_matrix(&art.filtered())?;
        actual.extend(counts([("filtered_terms", m.n_terms()), ("filtered_nnz", m.nnz())]));
    }
    if has(&["factors_extracted", "correlation_dim"]) {
        let model: FactorModel<f64> = read_json(&art.model())?;
        actual.extend(counts([
            ("correlation_dim", model.p()),
            ("eigenvalues_above_one", model.eigenvalues.iter().filter(|&&v| v > 1.0).count()),
            ("factors_extracted", model.k),
            ("uls_iterations", model.extraction.iterations),
            ("uls_converged", model.extraction.converged as usize),
            ("heywood_cases", model.extraction.heywood.len()),
        ]));
        let loadings: LoadingsArtifact = read_json(&art.loadings_json())?;
        actual.extend(counts([
            ("factors_retained", loadings.refined.factors.len()),
            ("pruned_loadings", loadings.pruned.factors.iter().map(|f| f.entries.len()).sum()),
            ("retained_loadings", loadings.refined.factors.iter().map(|f| f.entries.len()).sum()),
        ]));
    }
    if has(&["report_factors"]) {
        let reports: Vec<FactorReport> = read_json(&art.report(ReportFormat::Json))?;
        let labeled = reports.iter().filter(|r| r.theme_label.is_some()).count();
        actual.extend(counts([("report_factors", reports.len()), ("labeled_factors", labeled)]));
    }
    Ok(manifest
        .counts
        .iter()
        .filter_map(|(key, &m)| {
            let a = actual.get(key).copied().unwrap_or(u64::MAX);
            (a != m).then(|| CountMismatch {
                key: key.clone(),
                manifest: m,
                actual: a,
            })
        })
        .collect())
}
