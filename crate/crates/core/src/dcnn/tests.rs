use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::textproc::{PAD, UNK};

fn star(v: i64) -> StarRating {
    StarRating::new(v).unwrap()
}

fn vocab(words: &[&str]) -> Vocabulary {
    let mut all = vec![PAD.to_string(), UNK.to_string()];
    all.extend(words.iter().map(|w| w.to_string()));
    Vocabulary::from_words(all).unwrap()
}

fn tiny_config() -> DcnnConfig {
    DcnnConfig {
        embed_dim: 8,
        filters: 4,
        ancestor_window: 2,
        sibling_window: 2,
        sequential_window: 2,
        ..DcnnConfig::default()
    }
}

fn tiny_vocab() -> Vocabulary {
    let words: Vec<alloc::string::String> = (0..18).map(|i| alloc::format!("w{i}")).collect();
    let refs: Vec<&str> = words.iter().map(|s| s.as_str()).collect();
    vocab(&refs)
}

fn tree(forms: &[&str], heads: &[Option<usize>]) -> DependencyTree {
    DependencyTree::new(forms.iter().map(|f| f.to_string()).collect(), heads.to_vec()).unwrap()
}

fn sample_review() -> PreparedReview {
    PreparedReview {
        sentences: vec![
            tree(
                &["w1", "w2", "w3", "w4", "w5"],
                &[Some(1), None, Some(1), Some(1), Some(3)],
            ),
            tree(&["w6", "zzz", "w7"], &[None, Some(0), Some(1)]),
        ],
    }
}

#[test]
fn init_is_deterministic_with_zero_pad() {
    let cfg = DcnnConfig {
        embed_dim: 4,
        filters: 3,
        ..DcnnConfig::default()
    };
    let v = vocab(&["a", "b", "c", "d", "e", "f", "g", "h"]);
    let a = init_model(&cfg, v.clone(), 9).unwrap();
    let b = init_model(&cfg, v.clone(), 9).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.params, init_model(&cfg, v, 10).unwrap().params);
    let layout = a.layout();
    assert_eq!(layout.vocab * layout.dim, 10 * 4);
    assert!(a.embedding(PAD_ID).iter().all(|&x| x == 0.0));
    assert!(a.params.iter().all(|p| p.abs() <= 0.05));
    assert_eq!(layout.total(), 40 + 3 * (3 * 3 * 4 + 3) + 5 * 9 + 5);
}

#[test]
fn bad_config_rejected() {
    for cfg in [
        DcnnConfig {
            dropout: 1.0,
            ..DcnnConfig::default()
        },
        DcnnConfig {
            filters: 0,
            ..DcnnConfig::default()
        },
        DcnnConfig {
            epsilon: 0.0,
            ..DcnnConfig::default()
        },
    ] {
        assert!(matches!(init_model(&cfg, vocab(&[]), 0), Err(DcnnError::BadConfig(_))));
    }
}

#[test]
fn feature_map_matches_hand_arithmetic() {
    let cfg = DcnnConfig {
        embed_dim: 2,
        filters: 1,
        sequential_window: 2,
        ..DcnnConfig::default()
    };
    let mut m = init_model(&cfg, vocab(&["a", "b"]), 0).unwrap();
    let l = m.layout();
    m.params[l.embedding(2)].copy_from_slice(&[0.5, -1.0]);
    m.params[l.embedding(3)].copy_from_slice(&[2.0, 0.25]);
    m.params[l.filter_weights(Channel::Sequential)].copy_from_slice(&[0.5, 0.25, -0.75, 1.0]);
    m.params[l.filter_biases(Channel::Sequential)][0] = 0.125;
    let review = PreparedReview {
        sentences: vec![deptree::fallback_chain(vec!["a".into(), "b".into()]).unwrap()],
    };
    let enc = m.encode(&review).unwrap();
    // centred window of 2 starts at the token itself: [a b], [b PAD]
    assert_eq!(enc.ids[2], vec![2, 3, 3, 0]);
    let map = m
        .channel_feature_map(Channel::Sequential, &[vec![2, 3], vec![3, 0]])
        .unwrap();
    // 0.5*0.5 + 0.25*-1 + -0.75*2 + 1*0.25 + 0.125 = -1.125
    // 0.5*2 + 0.25*0.25 + 0 + 0 + 0.125 = 1.1875
    assert_eq!(map, vec![vec![libm::tanh(-1.125), libm::tanh(1.1875)]]);
    let fwd = m.forward_encoded(&enc, false, 0).unwrap();
    assert_eq!(fwd.pooled[2], libm::tanh(1.1875));
    assert_eq!(fwd.argmax[2], 1);

    assert!(matches!(
        m.channel_feature_map(Channel::Sequential, &[vec![2]]),
        Err(DcnnError::DimensionMismatch { expected: 2, found: 1 })
    ));
    assert_eq!(
        m.channel_feature_map(Channel::Ancestor, &[vec![2, 3, 9]]),
        Err(DcnnError::VocabMismatch(9))
    );
}

#[test]
fn zero_filter_gives_zero_map_and_width_tracks_length() {
    let mut m = init_model(&tiny_config(), tiny_vocab(), 3).unwrap();
    let l = m.layout();
    m.params[l.filter_weights(Channel::Ancestor)].fill(0.0);
    m.params[l.filter_biases(Channel::Ancestor)].fill(0.0);
    let map = m
        .channel_feature_map(Channel::Ancestor, &[vec![2, 3], vec![4, 5], vec![6, 6]])
        .unwrap();
    assert_eq!(map.len(), 4);
    assert!(map.iter().all(|row| row == &vec![0.0; 3]));
    let single = m.channel_feature_map(Channel::Sibling, &[vec![2, 2]]).unwrap();
    assert!(single.iter().all(|row| row.len() == 1));
}

#[test]
fn pooled_length_is_three_times_filters() {
    let v = vocab(&["great", "app"]);
    let m = init_model(&DcnnConfig::default(), v, 1).unwrap();
    for text in ["great", "great app. app app great great great app!"] {
        let fwd = m.forward(&prepare(text, None).unwrap(), false, 0).unwrap();
        assert_eq!(fwd.pooled.len(), 300);
        assert!((fwd.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn evaluation_is_deterministic_and_duplicate_sentences_do_not_change_pooling() {
    let m = init_model(&tiny_config(), tiny_vocab(), 5).unwrap();
    let r = sample_review();
    let a = m.forward(&r, false, 1).unwrap();
    let b = m.forward(&r, false, 2).unwrap();
    assert_eq!(a, b);
    let mut doubled = r.clone();
    doubled.sentences.push(r.sentences[0].clone());
    assert_eq!(m.forward(&doubled, false, 0).unwrap().pooled, a.pooled);
}

#[test]
fn uniform_scores_give_ln5() {
    let mut m = init_model(&tiny_config(), tiny_vocab(), 5).unwrap();
    let l = m.layout();
    m.params[l.output_weights().start..].fill(0.0);
    let enc = m.encode(&sample_review()).unwrap();
    let (loss, _) = m.loss_and_grads(&enc, star(3), 0).unwrap();
    assert!((loss - libm::log(5.0)).abs() < 1e-12);
}

fn loss_at(m: &DcnnModel, enc: &Encoded, y: StarRating, seed: u64) -> f64 {
    let fwd = m.forward_encoded(enc, true, seed).unwrap();
    -libm::log(fwd.probabilities[y.index()])
}

/// Largest relative error between analytic and central-difference gradients
/// in each parameter group. The PAD row is a constant, not a parameter.
pub(crate) fn gradient_check(
    m: &DcnnModel,
    review: &PreparedReview,
    y: StarRating,
    seed: u64,
) -> Vec<(&'static str, f64)> {
    let enc = m.encode(review).unwrap();
    let (_, grads) = m.loss_and_grads(&enc, y, seed).unwrap();
    let mut out = Vec::new();
    let pad = m.layout().embedding(PAD_ID as usize);
    for (name, range) in m.layout().groups() {
        let mut worst: f64 = 0.0;
        for i in range.filter(|i| !pad.contains(i)) {
            let mut plus = m.clone();
            let mut minus = m.clone();
            plus.params[i] += 1e-4;
            minus.params[i] -= 1e-4;
            let delta = plus.params[i] as f64 - minus.params[i] as f64;
            let numeric = (loss_at(&plus, &enc, y, seed) - loss_at(&minus, &enc, y, seed)) / delta;
            let analytic = grads[i];
            let scale = analytic.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((analytic - numeric).abs() / scale);
        }
        out.push((name, worst));
    }
    out
}

/// Tiny model with weights spread over [-0.5, 0.5] so every path carries
/// a gradient well above rounding noise.
pub(crate) fn spread_tiny_model(seed: u64) -> DcnnModel {
    let mut m = init_model(&tiny_config(), tiny_vocab(), seed).unwrap();
    for p in &mut m.params {
        *p *= 10.0;
    }
    m
}

#[test]
fn gradients_match_finite_differences() {
    let m = spread_tiny_model(11);
    for (label, seed) in [(star(1), 3), (star(4), 8)] {
        for (group, err) in gradient_check(&m, &sample_review(), label, seed) {
            assert!(err < 1e-3, "{group}: {err}");
        }
    }
}

#[test]
fn pad_gradient_is_exactly_zero() {
    let m = spread_tiny_model(2);
    let enc = m.encode(&sample_review()).unwrap();
    assert!(enc.ids[2].contains(&PAD_ID));
    let (_, grads) = m.loss_and_grads(&enc, star(5), 1).unwrap();
    assert!(grads[m.layout().embedding(0)].iter().all(|&g| g == 0.0));
    assert!(grads[m.layout().embedding(1)].iter().any(|&g| g != 0.0));
}

#[test]
fn adadelta_zero_gradient_only_decays_state() {
    let mut x = [1.5f64, -2.0];
    let mut state = AdadeltaState {
        sq_grad: vec![0.4, 0.2],
        sq_update: vec![0.1, 0.3],
    };
    adadelta_step(&mut x, &[0.0, 0.0], &mut state, 0.9, 1e-6).unwrap();
    assert_eq!(x, [1.5, -2.0]);
    assert_eq!(state.sq_grad, vec![0.9 * 0.4, 0.9 * 0.2]);
    assert_eq!(state.sq_update, vec![0.9 * 0.1, 0.9 * 0.3]);
    assert_eq!(
        adadelta_step(&mut x, &[0.0], &mut state, 0.9, 1e-6),
        Err(DcnnError::ShapeMismatch)
    );
}

#[test]
fn adadelta_rho_zero_specialisation() {
    let (prev_update, g, eps) = (0.04f64, 0.3f64, 1e-6);
    let mut x = [1.0f64];
    let mut state = AdadeltaState {
        sq_grad: vec![7.0],
        sq_update: vec![prev_update],
    };
    adadelta_step(&mut x, &[g], &mut state, 0.0, eps).unwrap();
    let expected = -libm::sqrt(prev_update + eps) / libm::sqrt(g * g + eps) * g;
    assert_eq!(x[0], 1.0 + expected);
    assert_eq!(state.sq_grad[0], g * g);
    assert_eq!(state.sq_update[0], expected * expected);
}

#[test]
fn adadelta_decreases_scalar_quadratic() {
    let mut x = [1.0f64];
    let mut state = AdadeltaState::new(1);
    let mut prev = x[0] * x[0];
    for _ in 0..100 {
        let g = 2.0 * x[0];
        adadelta_step(&mut x, &[g], &mut state, 0.95, 1e-6).unwrap();
        let loss = x[0] * x[0];
        assert!(loss < prev);
        prev = loss;
    }
}

#[test]
fn fixed_output_bias_forces_prediction() {
    let mut m = init_model(&tiny_config(), tiny_vocab(), 4).unwrap();
    let l = m.layout();
    m.params[l.output_weights()].fill(0.0);
    m.params[l.output_biases()].copy_from_slice(&[10.0, 0.0, 0.0, 0.0, 0.0]);
    for text in ["w1 w2 w3", "unknown words only!", "w5"] {
        assert_eq!(m.predict_rating(text, None).unwrap(), star(1));
    }
    m.params[l.output_biases()].copy_from_slice(&[0.0, 3.0, 0.0, 3.0, 0.0]);
    assert_eq!(m.predict_rating("w1", None).unwrap(), star(2));
    assert_eq!(
        m.predict_rating("?! ...", None),
        Err(DcnnError::EmptyAfterPreprocessing)
    );
}

#[test]
fn prepare_uses_parses_and_drops_punctuation() {
    let parsed = tree(&["Love", "it", "!!!"], &[None, Some(0), Some(0)]);
    let r = prepare("ignored", Some(&[parsed])).unwrap();
    assert_eq!(r.sentences.len(), 1);
    assert_eq!(r.sentences[0].forms(), &["love".to_string(), "it".to_string()]);
    assert_eq!(r.sentences[0].heads(), &[None, Some(0)]);
    let chained = prepare("Sooo gooood. Crashes, always!", None).unwrap();
    assert_eq!(chained.sentences.len(), 2);
    assert_eq!(chained.sentences[0].forms(), &["soo".to_string(), "good".to_string()]);
}

fn memorization_set() -> Vec<(PreparedReview, StarRating)> {
    let texts = [
        ("love this app", 5),
        ("great tool works well", 5),
        ("nice design", 4),
        ("good but slow", 4),
        ("it is okay", 3),
        ("average at best", 3),
        ("crashes every time", 1),
        ("useless and broken", 1),
        ("too many ads", 2),
        ("freezes on start", 2),
    ];
    texts
        .iter()
        .map(|(t, s)| (prepare(t, None).unwrap(), star(*s)))
        .collect()
}

#[test]
fn memorizes_ten_examples() {
    let cfg = DcnnConfig {
        epochs: 200,
        ..DcnnConfig::default()
    };
    let (_, history) = fit(&cfg, &memorization_set()).unwrap();
    assert_eq!(history.loss.len(), 200);
    assert_eq!(*history.accuracy.last().unwrap(), 1.0);
}

#[test]
fn training_is_deterministic_and_checkpoints_round_trip() {
    let cfg = DcnnConfig {
        embed_dim: 10,
        filters: 6,
        epochs: 3,
        batch_size: 2,
        ..DcnnConfig::default()
    };
    let (a, ha) = fit(&cfg, &memorization_set()).unwrap();
    let (b, hb) = fit(&cfg, &memorization_set()).unwrap();
    assert_eq!(ha, hb);
    let bytes = encode_checkpoint(&a);
    assert_eq!(bytes, encode_checkpoint(&b));
    let back = decode_checkpoint(&bytes).unwrap();
    assert_eq!(back, a);
    assert_eq!(encode_checkpoint(&back), bytes);

    let other = fit(&DcnnConfig { seed: 99, ..cfg }, &memorization_set()).unwrap().0;
    assert_ne!(encode_checkpoint(&other), bytes);
}

#[test]
fn damaged_checkpoints_are_rejected() {
    let m = init_model(&tiny_config(), tiny_vocab(), 1).unwrap();
    let bytes = encode_checkpoint(&m);
    for cut in [bytes.len() - 1, bytes.len() / 2, 13] {
        assert!(matches!(
            decode_checkpoint(&bytes[..cut]),
            Err(CheckpointError::CorruptFile(_))
        ));
    }
    let mut flipped = bytes.clone();
    flipped[40] ^= 1;
    assert!(matches!(
        decode_checkpoint(&flipped),
        Err(CheckpointError::CorruptFile(_))
    ));
    let mut future = bytes.clone();
    future[8..12].copy_from_slice(&999u32.to_le_bytes());
    assert_eq!(
        decode_checkpoint(&future),
        Err(CheckpointError::VersionMismatch {
            found: 999,
            expected: CHECKPOINT_VERSION
        })
    );
    assert!(matches!(
        decode_checkpoint(b"nope"),
        Err(CheckpointError::CorruptFile(_))
    ));
}
