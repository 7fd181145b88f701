use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbd_core::corpus::{normalize, Dataset, Label, Token, Transcript};
use sbd_core::embeddings::{EmbeddingTable, MethodTag, SubwordTable, Vocabulary};
use sbd_core::model::{
    batch_gradient, batch_loss, segment, train, windowize, ClassWeightMode, Lexicon, RcnnLayers, RcnnParams, SbdModel,
    WindowInstance, PAD_ID,
};
use sbd_core::nn::{grad_check, Tensor2, DEFAULT_STEP};
use sbd_core::synth::{sbd_dataset, SbdSynthConfig};
use sbd_core::{Error, ModelConfig};

fn tiny_config() -> ModelConfig {
    let mut cfg = ModelConfig::new(4);
    cfg.window = 6;
    cfg.n_filters = 3;
    cfg.conv_width = 3;
    cfg.pool_width = 3;
    cfg.hidden = 2;
    cfg.dropout = 0.0;
    cfg
}

fn tiny_params(seed: u64, vocab: usize) -> RcnnParams {
    let cfg = tiny_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut embedding = Tensor2::zeros(vocab + 2, cfg.dim);
    for x in embedding.as_mut_slice() {
        *x = rng.gen_range(-1.0..1.0);
    }
    RcnnParams { embedding, layers: RcnnLayers::init(&cfg, &mut rng).unwrap() }
}

fn random_window(rng: &mut ChaCha8Rng, phi: usize, rows: usize, real: usize) -> WindowInstance {
    let mut ids: Vec<usize> = (0..real).map(|_| rng.gen_range(1..rows)).collect();
    let mut labels: Vec<Label> = (0..real)
        .map(|_| if rng.gen_bool(0.3) { Label::Boundary } else { Label::NoBoundary })
        .collect();
    ids.resize(phi, PAD_ID);
    labels.resize(phi, Label::NoBoundary);
    let mut mask = vec![true; real];
    mask.resize(phi, false);
    WindowInstance { start: 0, ids, labels, mask }
}

#[test]
fn assembled_network_gradient_matches_finite_differences() {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let params = tiny_params(seed, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let windows = vec![random_window(&mut rng, 6, 7, 6), random_window(&mut rng, 6, 7, 4)];
        let weights = [3.0, 0.6];
        let grad = batch_gradient(&params, &windows, weights, 0.0, &mut rng).unwrap();
        let analytic = grad.dense(&params);
        let mut probe = params.clone();
        let report = grad_check(&mut probe, &analytic, |p| batch_loss(p, &windows, weights).unwrap(), DEFAULT_STEP);
        assert_eq!(probe, params, "grad_check must restore the parameters");
        assert!((grad.loss - batch_loss(&params, &windows, weights).unwrap()).abs() < 1e-12);
        worst = worst.max(report.max_relative_error());
        assert!(report.max_relative_error() < 1e-4, "seed {seed}: {report:?}");
    }
    eprintln!("worst relative error over 20 seeds: {worst:.3e}");
}

#[test]
fn heavier_boundary_weight_raises_the_boundary_gradient() {
    let params = tiny_params(3, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut w = random_window(&mut rng, 6, 7, 6);
    w.labels = vec![Label::NoBoundary; 6];
    w.labels[2] = Label::Boundary;
    let mut previous = 0.0;
    for wb in [0.5, 1.0, 2.0, 5.0, 20.0] {
        let g = batch_gradient(&params, std::slice::from_ref(&w), [wb, 1.0], 0.0, &mut rng).unwrap();
        let at_b = g.logit_grads[0][2];
        // Misclassified: the gradient pushes P(B) up.
        assert!(at_b[0] < 0.0);
        let magnitude = (at_b[0] * at_b[0] + at_b[1] * at_b[1]).sqrt();
        assert!(magnitude > previous, "weight {wb}: {magnitude} <= {previous}");
        previous = magnitude;
    }
}

fn small_synthetic() -> Dataset {
    sbd_dataset(&SbdSynthConfig { transcripts: 24, min_sentences: 2, max_sentences: 4, ..Default::default() }).unwrap()
}

fn random_table(d: &Dataset, dim: usize, seed: u64) -> EmbeddingTable {
    let mut words: Vec<String> = d
        .transcripts()
        .iter()
        .flat_map(|t| t.tokens())
        .map(|t| t.as_str().to_owned())
        .collect();
    words.sort();
    words.dedup();
    // Leave a few words out so the unknown row is exercised.
    words.truncate(words.len() - 5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..words.len() * dim).map(|_| rng.gen_range(-0.5f32..0.5)).collect();
    EmbeddingTable::new(MethodTag::W2vSg, Vocabulary::from_ordered(words).unwrap(), dim, vectors).unwrap()
}

fn quick_config(dim: usize) -> ModelConfig {
    let mut cfg = ModelConfig::new(dim);
    cfg.window = 12;
    cfg.n_filters = 6;
    cfg.conv_width = 3;
    cfg.hidden = 5;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.dropout = 0.2;
    cfg.learning_rate = 5e-3;
    cfg
}

#[test]
fn training_is_deterministic_with_finite_history() {
    let d = small_synthetic();
    let table = random_table(&d, 8, 1);
    let cfg = quick_config(8);
    let a = train(&d, &table, &cfg).unwrap();
    let b = train(&d, &table, &cfg).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.history, b.history);
    assert_eq!(a.history.len(), 3);
    for e in &a.history {
        assert!(e.loss.is_finite());
        let f1 = e.validation_f1.expect("24 transcripts leave a validation split");
        assert!((0.0..=1.0).contains(&f1));
    }
}

#[test]
fn frozen_embeddings_stay_bit_identical() {
    let d = small_synthetic();
    let table = random_table(&d, 8, 2);
    let mut cfg = quick_config(8);
    cfg.fine_tune = false;
    let frozen = train(&d, &table, &cfg).unwrap().model;
    for (i, w) in frozen.lexicon.words().iter().enumerate() {
        let id = table.vocab().id(w).unwrap();
        let expected: Vec<f64> = table.row(id).iter().map(|&x| f64::from(x)).collect();
        assert_eq!(frozen.params.embedding.row(i + 2), expected.as_slice(), "row of {w}");
    }
    assert!(frozen.params.embedding.row(PAD_ID).iter().all(|&x| x == 0.0));

    cfg.fine_tune = true;
    let tuned = train(&d, &table, &cfg).unwrap().model;
    assert_ne!(tuned.params.embedding, frozen.params.embedding);
    assert!(tuned.params.embedding.row(PAD_ID).iter().all(|&x| x == 0.0));
}

#[test]
fn uniform_class_weights_match_unweighted_cross_entropy() {
    let d = small_synthetic();
    let table = random_table(&d, 8, 3);
    let mut cfg = quick_config(8);
    cfg.class_weights = ClassWeightMode::Manual { boundary: 1.0, no_boundary: 1.0 };
    let unit = train(&d, &table, &cfg).unwrap();
    // Any uniform weighting normalizes to the same gradient; powers of two
    // keep the arithmetic exact, so trajectories agree bit for bit.
    for c in [0.5, 4.0] {
        cfg.class_weights = ClassWeightMode::Manual { boundary: c, no_boundary: c };
        let scaled = train(&d, &table, &cfg).unwrap();
        assert_eq!(unit.model.params, scaled.model.params);
    }

    // With unit weights the loss is the plain mean of -ln p(gold).
    let model = &unit.model;
    let t = Transcript::parse_segmented("t", "então kalu né\nmas pite\n", "test", 1).unwrap();
    let windows = windowize(&t, &model.lexicon, model.config.window, model.config.window).unwrap();
    assert_eq!(windows.len(), 1);
    let weighted = batch_loss(&model.params, &windows, [1.0, 1.0]).unwrap();
    let probs = model.predict(t.tokens()).unwrap().probs;
    let mean_ce = t
        .labels()
        .iter()
        .zip(&probs)
        .map(|(l, p)| -(if l.is_boundary() { *p } else { 1.0 - p }).ln())
        .sum::<f64>()
        / probs.len() as f64;
    assert!((weighted - mean_ce).abs() < 1e-12, "{weighted} vs {mean_ce}");
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let d = small_synthetic();
    let table = random_table(&d, 8, 4);
    let model = train(&d, &table, &quick_config(8)).unwrap().model;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    model.save(&path).unwrap();
    let back = SbdModel::load(&path).unwrap();
    assert_eq!(back, model);
    let toks = d.transcripts()[0].tokens();
    assert_eq!(back.predict(toks).unwrap(), model.predict(toks).unwrap());
    model.save(&dir.path().join("again.ckpt")).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(dir.path().join("again.ckpt")).unwrap());
}

#[test]
fn subword_models_compose_unseen_words() {
    let d = small_synthetic();
    let plain = random_table(&d, 8, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let buckets: Vec<f32> = (0..64 * 8).map(|_| rng.gen_range(-0.5f32..0.5)).collect();
    let sub = SubwordTable::new(8, 3, 4, 7, Vec::new(), buckets).unwrap();
    let words: Vec<String> = plain.vocab().words().map(str::to_owned).collect();
    let table = EmbeddingTable::new(
        MethodTag::SubwordSg,
        Vocabulary::from_ordered(words).unwrap(),
        8,
        plain.vectors().to_vec(),
    )
    .unwrap()
    .with_subword(sub)
    .unwrap();
    let model = train(&d, &table, &quick_config(8)).unwrap().model;
    assert!(model.subword.is_some());
    // Training words missing from the table received composed rows.
    let train_words: std::collections::HashSet<&str> =
        d.transcripts().iter().flat_map(|t| t.tokens()).map(|t| t.as_str()).collect();
    assert!(train_words.iter().all(|w| model.lexicon.row(w).is_some()));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub.ckpt");
    model.save(&path).unwrap();
    let back = SbdModel::load(&path).unwrap();
    assert_eq!(back, model);
    // Two unseen words get different composed inputs, hence different
    // probabilities; with a plain model both would use the unknown row.
    let a = back.predict(&normalize("então zzqqx")).unwrap();
    let b = back.predict(&normalize("então bbkkl")).unwrap();
    assert_ne!(a.probs[1], b.probs[1]);
}

#[test]
fn configuration_and_data_errors() {
    let d = small_synthetic();
    let table = random_table(&d, 8, 6);
    match train(&d, &table, &quick_config(9)) {
        Err(Error::Config(msg)) => assert!(msg.contains('8') && msg.contains('9'), "{msg}"),
        other => panic!("expected a configuration error, got {other:?}"),
    }
    let empty = Dataset::new("empty", Vec::new()).unwrap();
    assert!(matches!(train(&empty, &table, &quick_config(8)), Err(Error::Data(_))));
}

fn trained_model() -> SbdModel {
    let d = small_synthetic();
    let table = random_table(&d, 8, 7);
    let mut cfg = quick_config(8);
    cfg.epochs = 1;
    train(&d, &table, &cfg).unwrap().model
}

#[test]
fn prediction_length_matches_input() {
    let model = trained_model();
    assert!(model.predict(&[]).unwrap().is_empty());
    let words: Vec<Token> = normalize(&"então kalu pite né mas ".repeat(25));
    for n in 1..=100 {
        let p = model.predict(&words[..n]).unwrap();
        assert_eq!(p.len(), n);
        assert!(p.probs.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}

#[test]
fn lexicon_maps_unknown_words() {
    let lex = Lexicon::from_words(vec!["a".into()]).unwrap();
    assert_eq!(lex.row("a"), Some(2));
    assert_eq!(lex.row_or_unknown("b"), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn segmenting_predictions_is_total(n in 0usize..80, threshold in 0.01f64..0.99) {
        thread_local! {
            static MODEL: SbdModel = trained_model();
        }
        let words: Vec<Token> = normalize(&"então kalu pite né mas zzqq ".repeat(14))[..n].to_vec();
        let sentences = MODEL.with(|m| {
            let p = m.predict(&words).unwrap();
            segment(&words, &p, threshold).unwrap()
        });
        prop_assert!(sentences.iter().all(|s| !s.is_empty()));
        let flat: Vec<Token> = sentences.into_iter().flatten().collect();
        prop_assert_eq!(flat, words);
    }
}
