//! Monte-Carlo and invariant checks for the samplers.

use mpclust_core::rng::{substream, Phase};
use mpclust_core::sampling::ee::next_indices;
use mpclust_core::sampling::{draw_uniform, draw_weighted, Axis, EEConfig, SamplerState, ThresholdRule};
use proptest::prelude::*;

const TRIALS: u64 = 100_000;

#[test]
fn uniform_inclusion_frequency() {
    let mut hits = [0u64; 20];
    for trial in 0..TRIALS {
        let mut rng = substream(1, Phase::ObservationDraw, trial);
        for i in draw_uniform(20, 5, &mut rng).unwrap() {
            hits[i] += 1;
        }
    }
    for h in hits {
        assert!((h as f64 / TRIALS as f64 - 0.25).abs() < 0.01);
    }
}

#[test]
fn equal_weights_match_uniform_marginals() {
    let mut hits = [0u64; 20];
    for trial in 0..TRIALS {
        let mut rng = substream(2, Phase::FeatureDraw, trial);
        for i in draw_weighted(&[1.0; 20], 5, &mut rng).unwrap() {
            hits[i] += 1;
        }
    }
    for h in hits {
        assert!((h as f64 / TRIALS as f64 - 0.25).abs() < 0.01);
    }
}

#[test]
fn weighted_single_draw_frequency() {
    let mut first = 0u64;
    for trial in 0..TRIALS {
        let mut rng = substream(3, Phase::FeatureDraw, trial);
        if draw_weighted(&[2.0, 1.0], 1, &mut rng).unwrap() == [0] {
            first += 1;
        }
    }
    assert!((first as f64 / TRIALS as f64 - 2.0 / 3.0).abs() < 0.01);
}

#[test]
fn burn_in_gives_every_index_enough_looks() {
    for (total, draw, epochs) in [(50, 7, 2), (13, 13, 3), (100, 1, 1), (31, 10, 2)] {
        let cfg = EEConfig::new(total, draw, epochs, ThresholdRule::Quantile(0.95)).unwrap();
        let mut st = SamplerState::new(Axis::Observations, total);
        for t in 1..=cfg.burn_in_len() {
            let idx = next_indices(&cfg, &mut st, t, 4, Phase::ObservationDraw, Phase::ObservationEpoch).unwrap();
            assert_eq!(idx.len(), draw);
            st.record_draw(&idx);
        }
        let min = *st.sample_counts().iter().min().unwrap() as usize;
        assert!(min >= epochs, "{total}/{draw}: min count {min}");
    }
}

proptest! {
    #[test]
    fn observation_weights_stay_normalised(
        conf in proptest::collection::vec(0.0f64..0.25, 2..30),
        alpha in 0.0f64..=1.0,
        rounds in 1usize..20,
    ) {
        let n = conf.len();
        let mut st = SamplerState::new(Axis::Observations, n);
        for t in 2..2 + rounds {
            st.record_draw(&[(t * 7) % n]);
            let shifted: Vec<f64> = conf.iter().map(|c| c * (t % 3) as f64 / 2.0).collect();
            st.update_obs_weights(&shifted, t, alpha).unwrap();
            prop_assert!((st.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(st.weights().iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn ema_endpoints(raw in proptest::collection::vec(0.01f64..1.0, 2..20)) {
        let n = raw.len();
        let mut frozen = SamplerState::new(Axis::Observations, n);
        frozen.record_draw(&(0..n).collect::<Vec<_>>());
        frozen.update_obs_weights(&raw, 2, 1.0).unwrap();
        for w in frozen.weights() {
            prop_assert!((w - 1.0 / n as f64).abs() < 1e-12);
        }
        let mut instant = frozen.clone();
        instant.update_obs_weights(&raw, 2, 0.0).unwrap();
        let total: f64 = raw.iter().sum();
        for (w, r) in instant.weights().iter().zip(&raw) {
            prop_assert!((w - r / total).abs() < 1e-12);
        }
    }

    #[test]
    fn feature_weights_stay_normalised(
        supports in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 10), 1..15),
        alpha in 0.0f64..=1.0,
    ) {
        let mut st = SamplerState::new(Axis::Features, 10);
        let sampled: Vec<usize> = (0..10).collect();
        for mask in &supports {
            st.record_draw(&sampled);
            let support: Vec<usize> = (0..10).filter(|&j| mask[j]).collect();
            st.update_feature_weights(&support, &sampled, alpha).unwrap();
            prop_assert!((st.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        prop_assert!(st.importance().iter().all(|s| (0.0..=1.0).contains(s)));
    }
}
