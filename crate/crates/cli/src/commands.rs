use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use sbd_core::corpus::{join, kfold, normalize, Dataset};
use sbd_core::embeddings::{self, load_embeddings, read_corpus, save_embeddings, MethodTag};
use sbd_core::eval::{
    emit_report, run_cv, summary_table, unigram_baseline_cv, CvOptions, EmbeddingSource, GridSpec, ReportFormat,
};
use sbd_core::model::{segment, train_with_progress, SbdModel};
use sbd_core::synth::{induction_documents, sbd_dataset, SbdSynthConfig};

use crate::args::{EmbedTrainArgs, OutputFormat, PredictArgs, SbdEvalArgs, SbdTrainArgs, SynthArgs};
use crate::Failure;

fn require_exists(path: &Path, flag: &str) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{flag} {} does not exist", path.display())))
    }
}

fn load_dataset(path: &Path) -> Result<Dataset, Failure> {
    let d = Dataset::load(path)?.without_punctuation();
    if d.is_empty() {
        return Err(Failure::Data(format!("{} holds no transcripts", path.display())));
    }
    Ok(d)
}

fn write_stdout(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Internal(format!("writing standard output: {e}")))
}

pub fn embed_train(a: EmbedTrainArgs) -> Result<(), Failure> {
    require_exists(&a.corpus, "--corpus")?;
    let cfg = a.induction.config(a.method, a.mode, a.dim, a.seed, a.workers);
    cfg.validate()?;
    let start = Instant::now();
    let corpus = read_corpus(&a.corpus)?;
    let tokens: usize = corpus.iter().map(Vec::len).sum();
    eprintln!("training {} on {} documents ({tokens} tokens)", cfg.method(), corpus.len());
    let table = embeddings::train(&corpus, &cfg)?;
    save_embeddings(&table, &a.out)?;
    write_stdout(&format!(
        "vocabulary {}\ntokens {tokens}\ndim {}\nwall time {:.2}s\n",
        table.len(),
        table.dim(),
        start.elapsed().as_secs_f64()
    ))
}

pub fn sbd_train(a: SbdTrainArgs) -> Result<(), Failure> {
    require_exists(&a.data, "--data")?;
    require_exists(&a.embeddings, "--embeddings")?;
    let table = load_embeddings(&a.embeddings, MethodTag::new(a.method, a.mode))?;
    let cfg = a.model.config(a.dim.unwrap_or(table.dim()), a.seed);
    cfg.validate()?;
    if cfg.dim != table.dim() {
        return Err(Failure::Usage(format!(
            "--dim {} does not match the embedding dimension {} of {}",
            cfg.dim,
            table.dim(),
            a.embeddings.display()
        )));
    }
    let data = load_dataset(&a.data)?;
    eprintln!(
        "training on {} transcripts ({} tokens) with {} embeddings of dimension {}",
        data.len(),
        data.token_count(),
        table.method(),
        table.dim()
    );
    let trained = train_with_progress(&data, &table, &cfg, |s| {
        let val = s.validation_f1.map_or_else(|| "-".to_owned(), |f| format!("{f:.4}"));
        println!("epoch {} loss {:.6} validation_f1 {val}", s.epoch, s.loss);
    })?;
    trained.model.save(&a.out)?;
    eprintln!("wrote {}", a.out.display());
    Ok(())
}

pub fn sbd_eval(a: SbdEvalArgs) -> Result<(), Failure> {
    require_exists(&a.data, "--data")?;
    let grid = GridSpec::parse(&a.grid, a.k, a.seed)?;
    let source = match (&a.embeddings_dir, &a.corpus) {
        (Some(dir), _) => {
            require_exists(dir, "--embeddings-dir")?;
            EmbeddingSource::Directory(dir.clone())
        }
        (None, Some(corpus)) => {
            require_exists(corpus, "--corpus")?;
            let cell = grid.cells[0];
            let template = a.induction.config(cell.method.family(), cell.method.mode(), cell.dim, a.seed, 1);
            template.validate()?;
            EmbeddingSource::Induce { documents: Arc::new(read_corpus(corpus)?), template }
        }
        (None, None) => return Err(Failure::Usage("one of --embeddings-dir or --corpus is required".into())),
    };
    // Dimension is replaced per cell; validate everything else up front.
    let model_cfg = a.model.config(grid.cells[0].dim, a.seed);
    model_cfg.validate()?;
    let data = load_dataset(&a.data)?;
    if data.len() < a.k {
        return Err(Failure::Usage(format!("--k {} exceeds the {} transcripts in --data", a.k, data.len())));
    }
    fs::create_dir_all(&a.out_dir)
        .map_err(|e| Failure::Data(format!("cannot create --out-dir {}: {e}", a.out_dir.display())))?;

    let opts = CvOptions {
        cache_dir: a.cache.clone(),
        workers: a.workers,
        progress: Some(Arc::new(|msg: &str| eprintln!("{msg}"))),
    };
    let results = run_cv(&data, &grid, &source, &model_cfg, &opts)?;
    let csv = a.out_dir.join("report.csv");
    let json = a.out_dir.join("report.json");
    emit_report(&results, &csv, ReportFormat::Csv)?;
    emit_report(&results, &json, ReportFormat::Json)?;

    let folds = kfold(&data, a.k, a.seed)?;
    let baseline = unigram_baseline_cv(&data, &folds, model_cfg.class_weights)?;
    let baseline_f1 = baseline.iter().map(|r| r.f1).sum::<f64>() / baseline.len() as f64;
    eprintln!(
        "{} of {} folds reused from cache; reports in {}",
        results.cached_count(),
        results.fold_count(),
        a.out_dir.display()
    );
    write_stdout(&format!("{}unigram baseline mean_f1 {baseline_f1:.4}\n", summary_table(&results)))
}

fn read_input(path: Option<&PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            require_exists(p, "--input")?;
            fs::read_to_string(p).map_err(|e| Failure::Data(format!("cannot read {}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Data(format!("cannot read standard input: {e}")))?;
            Ok(s)
        }
    }
}

pub fn sbd_predict(a: PredictArgs) -> Result<(), Failure> {
    if !(a.threshold > 0.0 && a.threshold < 1.0) {
        return Err(Failure::Usage(format!("--threshold must be in (0, 1), got {}", a.threshold)));
    }
    require_exists(&a.model, "--model")?;
    let model = SbdModel::load(&a.model)?;
    let text = read_input(a.input.as_ref())?;
    let tokens: Vec<_> = normalize(&text).into_iter().filter(|t| !t.is_punctuation()).collect();
    if tokens.is_empty() {
        return Ok(());
    }
    let prediction = model.predict(&tokens)?;
    let mut out = format!("# threshold={}\n", a.threshold);
    match a.format {
        OutputFormat::Text => {
            for sentence in segment(&tokens, &prediction, a.threshold)? {
                out.push_str(&join(&sentence));
                out.push('\n');
            }
        }
        OutputFormat::Tsv => {
            for (t, p) in tokens.iter().zip(&prediction.probs) {
                out.push_str(&format!("{t}\t{p:.6}\n"));
            }
        }
    }
    write_stdout(&out)
}

pub fn synth(a: SynthArgs) -> Result<(), Failure> {
    let cfg = SbdSynthConfig { transcripts: a.transcripts, seed: a.seed, ..Default::default() };
    let data = sbd_dataset(&cfg)?;
    let text: Vec<String> = data.transcripts().iter().map(|t| t.to_segmented_text()).collect();
    fs::write(&a.out, text.join("\n")).map_err(|e| Failure::Data(format!("cannot write {}: {e}", a.out.display())))?;
    let mut summary = format!("transcripts {}\ntokens {}\n", data.len(), data.token_count());
    if let Some(path) = &a.corpus_out {
        let docs = induction_documents(&cfg, a.documents, a.seed.wrapping_add(1))?;
        let mut body = String::new();
        for d in &docs {
            body.push_str(&join(d));
            body.push('\n');
        }
        fs::write(path, body).map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display())))?;
        summary.push_str(&format!("corpus documents {}\n", docs.len()));
    }
    write_stdout(&summary)
}
