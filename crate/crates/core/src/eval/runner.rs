use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::grid::{GridCell, GridSpec};
use super::metrics::{compute_metrics, mean_std, ConfusionCounts, MetricsReport};
use crate::corpus::{kfold, Dataset, FoldSplit, Token, Transcript};
use crate::embeddings::{self, load_embeddings, save_embeddings, EmbeddingTable, InductionConfig};
use crate::error::{Error, Result};
use crate::model::{self, ModelConfig, DEFAULT_THRESHOLD};

/// Where the embeddings of each grid cell come from.
#[derive(Clone, Debug)]
pub enum EmbeddingSource {
    /// Files named `<method>-<strategy>-d<dim>.vec` in a directory; a
    /// missing file skips the cell.
    Directory(PathBuf),
    /// Induced per cell from a corpus; family, mode and dimension of the
    /// template are replaced by the cell's.
    Induce {
        documents: Arc<Vec<Vec<Token>>>,
        template: InductionConfig,
    },
}

impl EmbeddingSource {
    /// File a cell reads under [`EmbeddingSource::Directory`].
    pub fn file_for(dir: &Path, cell: &GridCell) -> PathBuf {
        dir.join(format!("{cell}.vec"))
    }
}

pub type Progress = Arc<dyn Fn(&str) + Send + Sync>;

/// Runner settings that do not affect results.
#[derive(Clone, Default)]
pub struct CvOptions {
    /// Per-job results are cached here and reused when their inputs are
    /// unchanged.
    pub cache_dir: Option<PathBuf>,
    /// Concurrent jobs; 0 and 1 both mean sequential.
    pub workers: usize,
    pub progress: Option<Progress>,
}

impl CvOptions {
    fn report(&self, msg: &str) {
        if let Some(p) = &self.progress {
            p(msg);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub report: MetricsReport,
    /// Taken from the cache instead of trained.
    pub cached: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellOutcome {
    Completed(Vec<FoldOutcome>),
    Skipped(String),
}

/// Summary over the folds of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub folds: usize,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub min_f1: f64,
    pub max_f1: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    /// Metrics of the fold confusion counts summed.
    pub pooled: MetricsReport,
}

impl Aggregate {
    pub fn of(reports: &[MetricsReport]) -> Option<Self> {
        if reports.is_empty() {
            return None;
        }
        let f1: Vec<f64> = reports.iter().map(|r| r.f1).collect();
        let (mean_f1, std_f1) = mean_std(&f1);
        let mean = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / reports.len() as f64;
        let mut counts = ConfusionCounts::default();
        for r in reports {
            counts += r.counts;
        }
        Some(Aggregate {
            folds: reports.len(),
            mean_f1,
            std_f1,
            min_f1: f1.iter().copied().fold(f64::INFINITY, f64::min),
            max_f1: f1.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_precision: mean(|r| r.precision),
            mean_recall: mean(|r| r.recall),
            pooled: MetricsReport::from_counts(counts),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub cell: GridCell,
    pub outcome: CellOutcome,
}

impl CellResult {
    pub fn folds(&self) -> &[FoldOutcome] {
        match &self.outcome {
            CellOutcome::Completed(f) => f,
            CellOutcome::Skipped(_) => &[],
        }
    }

    pub fn aggregate(&self) -> Option<Aggregate> {
        Aggregate::of(&self.folds().iter().map(|f| f.report).collect::<Vec<_>>())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvResults {
    pub k: usize,
    pub seed: u64,
    pub cells: Vec<CellResult>,
}

impl CvResults {
    pub fn fold_count(&self) -> usize {
        self.cells.iter().map(|c| c.folds().len()).sum()
    }

    pub fn cached_count(&self) -> usize {
        self.cells.iter().flat_map(|c| c.folds()).filter(|f| f.cached).count()
    }
}

/// Runs `f` over `items` on up to `workers` threads, keeping input order.
pub(crate) fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("result lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// Length-prefixed SHA-256 hashing of job inputs.
struct Fingerprint(Sha256);

impl Fingerprint {
    fn new(tag: &str) -> Self {
        let mut f = Fingerprint(Sha256::new());
        f.text(tag);
        f
    }

    fn bytes(&mut self, b: &[u8]) {
        self.0.update((b.len() as u64).to_le_bytes());
        self.0.update(b);
    }

    fn text(&mut self, s: &str) {
        self.bytes(s.as_bytes());
    }

    fn transcript(&mut self, t: &Transcript) {
        self.text(t.id());
        for (tok, l) in t.tokens().iter().zip(t.labels()) {
            self.text(tok.as_str());
            self.text(if l.is_boundary() { "B" } else { "N" });
        }
    }

    fn finish(self) -> String {
        self.0.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn embedding_fingerprint(table: &EmbeddingTable) -> String {
    let mut f = Fingerprint::new("embeddings");
    f.text(table.method().as_str());
    f.bytes(&(table.dim() as u64).to_le_bytes());
    for w in table.vocab().words() {
        f.text(w);
    }
    let floats = |f: &mut Fingerprint, v: &[f32]| {
        let bytes: Vec<u8> = v.iter().flat_map(|x| x.to_le_bytes()).collect();
        f.bytes(&bytes);
    };
    floats(&mut f, table.vectors());
    if let Some(sub) = table.subword() {
        let (lo, hi) = sub.ngram_range();
        f.text(&format!("{lo} {hi} {}", sub.hash_seed()));
        floats(&mut f, sub.buckets());
    }
    f.finish()
}

fn induction_fingerprint(documents: &[Vec<Token>], cfg: &InductionConfig) -> Result<String> {
    let mut f = Fingerprint::new("induction");
    f.text(&serde_json::to_string(cfg).map_err(|e| Error::Data(e.to_string()))?);
    for doc in documents {
        f.bytes(&(doc.len() as u64).to_le_bytes());
        for t in doc {
            f.text(t.as_str());
        }
    }
    Ok(f.finish())
}

fn read_key(path: &Path) -> Option<String> {
    fs::read_to_string(path).ok().map(|s| s.trim().to_owned())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Loads or induces the embeddings of one cell. `Ok(Err(reason))` skips
/// the cell.
fn cell_embeddings(
    cell: &GridCell,
    source: &EmbeddingSource,
    opts: &CvOptions,
) -> Result<std::result::Result<EmbeddingTable, String>> {
    match source {
        EmbeddingSource::Directory(dir) => {
            let path = EmbeddingSource::file_for(dir, cell);
            if !path.is_file() {
                return Ok(Err(format!("missing embedding file {}", path.display())));
            }
            let table = load_embeddings(&path, cell.method)?;
            if table.dim() != cell.dim {
                return Ok(Err(format!(
                    "{} has dimension {}, cell needs {}",
                    path.display(),
                    table.dim(),
                    cell.dim
                )));
            }
            Ok(Ok(table))
        }
        EmbeddingSource::Induce { documents, template } => {
            let mut cfg = template.clone();
            cfg.family = cell.method.family();
            cfg.mode = cell.method.mode();
            cfg.dim = cell.dim;
            let key = induction_fingerprint(documents, &cfg)?;
            let cached = opts.cache_dir.as_ref().map(|d| d.join("embeddings").join(cell.to_string()));
            if let Some(dir) = &cached {
                let file = dir.join("vectors.vec");
                if read_key(&dir.join("key")).as_deref() == Some(key.as_str()) && file.is_file() {
                    opts.report(&format!("{cell}: embeddings from cache"));
                    return Ok(Ok(load_embeddings(&file, cell.method)?));
                }
            }
            opts.report(&format!("{cell}: inducing embeddings"));
            let table = embeddings::train(documents, &cfg)?;
            if let Some(dir) = &cached {
                create_dir(dir)?;
                save_embeddings(&table, &dir.join("vectors.vec"))?;
                write_file(&dir.join("key"), &key)?;
                // Reload so cached and fresh runs see identical values.
                return Ok(Ok(load_embeddings(&dir.join("vectors.vec"), cell.method)?));
            }
            Ok(Ok(table))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CachedFold {
    key: String,
    report: MetricsReport,
}

struct Job<'a> {
    cell_index: usize,
    cell: GridCell,
    fold: usize,
    table: &'a EmbeddingTable,
    table_key: &'a str,
}

fn fold_config(base: &ModelConfig, cell: &GridCell, fold: usize) -> ModelConfig {
    let mut cfg = base.clone();
    cfg.dim = cell.dim;
    cfg.seed = base.seed.wrapping_add(fold as u64);
    cfg
}

fn run_job(dataset: &Dataset, folds: &FoldSplit, base: &ModelConfig, job: &Job<'_>, opts: &CvOptions) -> Result<FoldOutcome> {
    let cfg = fold_config(base, &job.cell, job.fold);
    let (train_idx, test_idx) = folds.split(dataset, job.fold);
    let mut fp = Fingerprint::new("fold");
    fp.text(job.table_key);
    for (k, v) in cfg.to_pairs() {
        fp.text(&format!("{k}={v}"));
    }
    fp.text(&format!("fold {} of {}", job.fold, folds.k()));
    for &i in &train_idx {
        fp.transcript(&dataset.transcripts()[i]);
    }
    fp.text("test");
    for &i in &test_idx {
        fp.transcript(&dataset.transcripts()[i]);
    }
    let key = fp.finish();
    let dir = opts.cache_dir.as_ref().map(|d| d.join(format!("{}-fold{}", job.cell, job.fold)));
    if let Some(dir) = &dir {
        if let Ok(text) = fs::read_to_string(dir.join("metrics.json")) {
            if let Ok(c) = serde_json::from_str::<CachedFold>(&text) {
                if c.key == key {
                    opts.report(&format!("{} fold {}: cached, F1 {:.4}", job.cell, job.fold, c.report.f1));
                    return Ok(FoldOutcome { fold: job.fold, report: c.report, cached: true });
                }
            }
        }
    }
    let train_set = dataset.subset(&train_idx);
    let trained = model::train(&train_set, job.table, &cfg)?;
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for &i in &test_idx {
        let t = &dataset.transcripts()[i];
        pred.extend(trained.model.predict(t.tokens())?.labels(DEFAULT_THRESHOLD));
        gold.extend_from_slice(t.labels());
    }
    let report = compute_metrics(&pred, &gold)?;
    opts.report(&format!("{} fold {}: F1 {:.4}", job.cell, job.fold, report.f1));
    if let Some(dir) = &dir {
        create_dir(dir)?;
        trained.model.save(&dir.join("model.ckpt"))?;
        let json = serde_json::to_string_pretty(&CachedFold { key, report }).map_err(|e| Error::Data(e.to_string()))?;
        write_file(&dir.join("metrics.json"), &json)?;
    }
    Ok(FoldOutcome { fold: job.fold, report, cached: false })
}

/// k-fold cross-validation of every grid cell. Fold assignments are drawn
/// once from the grid seed and shared by all cells.
pub fn run_cv(
    dataset: &Dataset,
    grid: &GridSpec,
    source: &EmbeddingSource,
    model_cfg: &ModelConfig,
    opts: &CvOptions,
) -> Result<CvResults> {
    let folds = kfold(dataset, grid.k, grid.seed)?;
    let workers = opts.workers.max(1);
    let tables: Vec<Result<std::result::Result<EmbeddingTable, String>>> =
        parallel_map(&grid.cells, workers, |cell| cell_embeddings(cell, source, opts));
    let mut prepared = Vec::with_capacity(tables.len());
    for t in tables {
        prepared.push(t?);
    }
    let keys: Vec<Option<String>> = prepared
        .iter()
        .map(|t| t.as_ref().ok().map(embedding_fingerprint))
        .collect();

    let mut jobs = Vec::new();
    for (i, (cell, table)) in grid.cells.iter().zip(&prepared).enumerate() {
        if let (Ok(table), Some(key)) = (table, &keys[i]) {
            for fold in 0..grid.k {
                jobs.push(Job { cell_index: i, cell: *cell, fold, table, table_key: key });
            }
        }
    }
    let outcomes = parallel_map(&jobs, workers, |job| run_job(dataset, &folds, model_cfg, job, opts));

    let mut per_cell: Vec<Vec<FoldOutcome>> = vec![Vec::new(); grid.cells.len()];
    for (job, outcome) in jobs.iter().zip(outcomes) {
        per_cell[job.cell_index].push(outcome?);
    }
    let cells = grid
        .cells
        .iter()
        .zip(prepared)
        .zip(per_cell)
        .map(|((cell, table), folds)| CellResult {
            cell: *cell,
            outcome: match table {
                Ok(_) => CellOutcome::Completed(folds),
                Err(reason) => {
                    opts.report(&format!("{cell}: skipped, {reason}"));
                    CellOutcome::Skipped(reason)
                }
            },
        })
        .collect();
    Ok(CvResults { k: grid.k, seed: grid.seed, cells })
}
