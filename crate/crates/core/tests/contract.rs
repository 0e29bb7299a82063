mod common;

use common::{gaussian, median, records, rng};
use odstream::detectors::Model;
use odstream::{DetectorConfig, DetectorKind, DetectorState, Error, Record};

fn trained(kind: DetectorKind, window: &[Record], seed: u64) -> DetectorState {
    DetectorState::with_defaults(kind, seed).fitted(window).unwrap()
}

fn unit_gaussian_window(seed: u64, n: usize, d: usize) -> Vec<Record> {
    records(&gaussian(&mut rng(seed), n, d))
}

/// Direction pointing out of the learned boundary for the linear OCSVM, any
/// fixed direction for the others.
fn outward(state: &DetectorState, d: usize) -> Vec<f64> {
    if let Model::Ocsvm(m) = state.model() {
        let w = &m.state().unwrap().w;
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            return w.iter().map(|x| -x / n).collect();
        }
    }
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    v
}

#[test]
fn far_points_score_above_the_median() {
    let d = 3;
    let window = unit_gaussian_window(1, 400, d);
    let max_norm = window.iter().map(|r| r.features.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let test = unit_gaussian_window(2, 100, d);
    for kind in DetectorKind::ALL {
        let state = trained(kind, &window, 7);
        let scores: Vec<f64> = test.iter().map(|r| state.score_one(r).unwrap().value()).collect();
        let dir = outward(&state, d);
        let far = Record::new(0, dir.iter().map(|x| x * 100.0 * max_norm).collect());
        let s = state.score_one(&far).unwrap().value();
        assert!(s > median(&scores), "{kind}: far {s} vs median {}", median(&scores));
    }
}

#[test]
fn repeated_training_point_is_normal() {
    let mut points = gaussian(&mut rng(3), 300, 2);
    points.extend(std::iter::repeat_n(vec![0.0, 0.0], 100));
    let window = records(&points);
    for kind in DetectorKind::ALL {
        let state = trained(kind, &window, 5);
        let train_scores: Vec<f64> = window.iter().map(|r| state.score_one(r).unwrap().value()).collect();
        let dup = state.score_one(&Record::new(0, vec![0.0, 0.0])).unwrap().value();
        assert!(dup <= median(&train_scores), "{kind}: {dup} > median {}", median(&train_scores));
    }
}

#[test]
fn versions_count_window_fits_only() {
    let w1 = unit_gaussian_window(10, 60, 2);
    let w2 = unit_gaussian_window(11, 60, 2);
    let extra = Record::new(999, vec![0.1, -0.2]);
    for kind in DetectorKind::ALL {
        let mut s = DetectorState::with_defaults(kind, 1);
        assert_eq!(s.version(), 0);
        assert!(matches!(s.score_one(&extra), Err(Error::Untrained)), "{kind}");
        assert!(matches!(s.learn_one(&extra), Err(Error::Untrained)), "{kind}");
        s.fit_window(&w1).unwrap();
        assert_eq!(s.version(), 1);
        s.learn_one(&extra).unwrap();
        assert_eq!(s.version(), 1, "{kind}: learn_one moved the version");
        s.fit_window(&w2).unwrap();
        s.fit_window(&w1).unwrap();
        assert_eq!(s.version(), 3, "{kind}");
    }
}

#[test]
fn scoring_is_read_only() {
    let window = unit_gaussian_window(4, 80, 3);
    let probe = Record::new(0, vec![0.3, 2.0, -1.0]);
    for kind in DetectorKind::ALL {
        let state = trained(kind, &window, 2);
        let before = state.to_checkpoint();
        let a = state.score_one(&probe).unwrap();
        let b = state.score_one(&probe).unwrap();
        assert_eq!(a, b, "{kind}");
        assert_eq!(before, state.to_checkpoint(), "{kind}");
    }
}

#[test]
fn precondition_errors() {
    let window = unit_gaussian_window(4, 40, 3);
    for kind in DetectorKind::ALL {
        let mut state = DetectorState::with_defaults(kind, 0);
        assert!(matches!(state.fit_window(&[]), Err(Error::EmptyWindow)), "{kind}");
        state.fit_window(&window).unwrap();
        let wrong = Record::new(0, vec![1.0, 2.0]);
        assert!(matches!(state.score_one(&wrong), Err(Error::DimensionMismatch { .. })), "{kind}");
        assert!(matches!(state.learn_one(&wrong), Err(Error::DimensionMismatch { .. })), "{kind}");
        let bad_window = vec![wrong.clone(), wrong];
        assert!(matches!(state.fit_window(&bad_window), Err(Error::DimensionMismatch { .. })), "{kind}");
        assert_eq!(state.version(), 1, "{kind}: failed fit changed the state");
    }
}

#[test]
fn mixed_dimensions_inside_one_window_are_rejected() {
    let window = vec![Record::new(0, vec![1.0, 2.0]), Record::new(1, vec![1.0])];
    let mut state = DetectorState::with_defaults(DetectorKind::Lof, 0);
    assert!(matches!(state.fit_window(&window), Err(Error::DimensionMismatch { .. })));
    assert!(!state.is_trained());
}

#[test]
fn equal_inputs_give_identical_states_and_scores() {
    let windows: Vec<Vec<Record>> = (0..3).map(|i| unit_gaussian_window(20 + i, 120, 4)).collect();
    let test = unit_gaussian_window(30, 50, 4);
    let run = |kind: DetectorKind| {
        let mut s = DetectorState::with_defaults(kind, 77);
        for w in &windows {
            s.fit_window(w).unwrap();
        }
        for r in &test[..10] {
            s.learn_one(r).unwrap();
        }
        let scores: Vec<f64> = test.iter().map(|r| s.score_one(r).unwrap().value()).collect();
        (s.to_checkpoint(), scores)
    };
    for kind in DetectorKind::ALL {
        let (a_bytes, a_scores) = run(kind);
        let (b_bytes, b_scores) = run(kind);
        assert_eq!(a_bytes, b_bytes, "{kind}");
        assert_eq!(a_scores, b_scores, "{kind}");
    }
}

#[test]
fn seed_changes_randomised_models() {
    let window = unit_gaussian_window(8, 200, 3);
    for kind in [DetectorKind::IforestAsd, DetectorKind::Kitnet, DetectorKind::Ocsvm] {
        let a = trained(kind, &window, 1).to_checkpoint();
        let b = trained(kind, &window, 2).to_checkpoint();
        assert_ne!(a, b, "{kind}");
    }
}

#[test]
fn checkpoints_round_trip() {
    let window = unit_gaussian_window(12, 150, 3);
    let test = unit_gaussian_window(13, 30, 3);
    let dir = tempfile::tempdir().unwrap();
    for kind in DetectorKind::ALL {
        let mut cfg = DetectorConfig::default();
        cfg.set("lof.k", "7").unwrap();
        let mut state = DetectorState::new(kind, cfg, 99).fitted(&window).unwrap();
        state.fit_window(&window[50..]).unwrap();
        let path = dir.path().join(format!("{kind}.ods"));
        state.save(&path).unwrap();
        let back = DetectorState::load(&path).unwrap();
        assert_eq!(back.version(), 2);
        assert_eq!(back.kind(), kind);
        assert_eq!(back.to_checkpoint(), state.to_checkpoint(), "{kind}");
        for r in &test {
            assert_eq!(back.score_one(r).unwrap(), state.score_one(r).unwrap(), "{kind}");
        }
    }
}

#[test]
fn checkpoint_header_layout_and_tampering() {
    let window = unit_gaussian_window(12, 50, 2);
    let state = trained(DetectorKind::Abod, &window, 3);
    let bytes = state.to_checkpoint();
    assert_eq!(&bytes[..4], b"ODS1");
    assert_eq!(bytes[4], DetectorKind::Abod.tag());
    assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(bytes[13..21].try_into().unwrap()), 3);
    assert_eq!(&bytes[21..53], &state.config_digest());

    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(DetectorState::from_checkpoint(&bad_magic), Err(Error::Checkpoint(_))));
    let mut bad_digest = bytes.clone();
    bad_digest[30] ^= 0xff;
    assert!(matches!(DetectorState::from_checkpoint(&bad_digest), Err(Error::Checkpoint(_))));
    let mut bad_tag = bytes.clone();
    bad_tag[4] = 42;
    assert!(matches!(DetectorState::from_checkpoint(&bad_tag), Err(Error::Checkpoint(_))));
    assert!(DetectorState::from_checkpoint(&bytes[..bytes.len() - 1]).is_err());
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(DetectorState::from_checkpoint(&trailing).is_err());
}

#[test]
fn scores_stay_finite_on_degenerate_windows() {
    let constant: Vec<Record> = (0..40).map(|i| Record::new(i, vec![1.0, 1.0, 1.0])).collect();
    let probes = [vec![1.0, 1.0, 1.0], vec![5.0, -3.0, 1.0], vec![1e6, 1e6, -1e6]];
    for kind in DetectorKind::ALL {
        let state = trained(kind, &constant, 1);
        for p in &probes {
            let s = state.score_one(&Record::new(0, p.clone())).unwrap().value();
            assert!(s.is_finite(), "{kind}: {p:?} -> {s}");
        }
    }
}
