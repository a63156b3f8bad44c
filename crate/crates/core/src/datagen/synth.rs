use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::metadata::{best_and_gap, expected_policy_losses};
use super::spec::{PolicyKind, PolicySpec, SpecRegime, SyntheticSpec};
use super::StreamFile;
use crate::baselines::greedy_follow_loss;
use crate::domain::{extend_advice, AdviceMatrix, Label, RoundRecord, StreamMeta, StreamRegime};
use crate::error::{Error, Result};
use crate::select;
use crate::seed::rng_from_seed;

/// Accuracy of the dominant model inside an adversarial segment.
pub const DOMINANT_ACCURACY: f64 = 0.95;
/// Accuracy of every other model inside an adversarial segment.
pub const BACKGROUND_ACCURACY: f64 = 0.5;

const GAP_EPSILON: f64 = 1e-12;

fn softmax(scores: &[f64]) -> Vec<f64> {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

fn uniform_simplex(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        draws.iter().map(|d| d / total).collect()
    } else {
        vec![1.0 / k as f64; k]
    }
}

fn advice_row(policy: &PolicySpec, acc_y: &[f64], y: Label, noise: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if policy.kind == PolicyKind::Random {
        return uniform_simplex(acc_y.len(), rng);
    }
    let base: Vec<f64> = match policy.kind {
        PolicyKind::Biased if policy.biased_classes.contains(&y) => acc_y.iter().map(|a| 1.0 - a).collect(),
        _ => acc_y.to_vec(),
    };
    let sign = if policy.kind == PolicyKind::Malicious { -1.0 } else { 1.0 };
    let scores: Vec<f64> = base
        .iter()
        .map(|a| {
            let z: f64 = rng.sample(StandardNormal);
            sign * policy.sharpness * (a + noise * z)
        })
        .collect();
    softmax(&scores)
}

/// Draws one round given the per-class accuracies in force.
fn draw_round(
    t: usize,
    spec: &SyntheticSpec,
    acc: &[Vec<f64>],
    label_probs: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<RoundRecord> {
    let c = spec.c;
    let y = select::sample(label_probs, rng);
    let predictions: Vec<Label> = acc
        .iter()
        .map(|row| {
            if rng.random::<f64>() < row[y] {
                y
            } else {
                let r = rng.random_range(0..c - 1);
                if r >= y {
                    r + 1
                } else {
                    r
                }
            }
        })
        .collect();
    let acc_y: Vec<f64> = acc.iter().map(|row| row[y]).collect();
    let rows: Vec<Vec<f64>> = spec
        .policies
        .iter()
        .map(|p| advice_row(p, &acc_y, y, spec.advice_noise, rng))
        .collect();
    Ok(RoundRecord {
        round_index: t,
        predictions,
        true_label: y,
        advice: AdviceMatrix::from_rows(spec.k, &rows)?,
    })
}

/// Realized greedy-follow loss of every extended policy on a stream.
pub fn realized_policy_losses(records: &[RoundRecord]) -> Vec<f64> {
    let mut totals: Vec<f64> = Vec::new();
    for rec in records {
        let ext = extend_advice(&rec.advice);
        let losses = rec.losses();
        if totals.is_empty() {
            totals = vec![0.0; ext.n_rows()];
        }
        for (total, row) in totals.iter_mut().zip(ext.rows()) {
            *total += greedy_follow_loss(row, &losses);
        }
    }
    totals
}

/// Smallest gap between the top entry of `policy`'s row and its runner-up
/// over the stream (1 for constant policies).
fn realized_margin(records: &[RoundRecord], policy: usize) -> f64 {
    records
        .iter()
        .map(|rec| {
            let ext = extend_advice(&rec.advice);
            let mut row = ext.row(policy).to_vec();
            row.sort_by(|a, b| b.total_cmp(a));
            row[0] - row.get(1).copied().unwrap_or(0.0)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn gen_stochastic(spec: &SyntheticSpec, seed: u64) -> Result<StreamFile> {
    gen_stochastic_with(spec, seed, &expected_policy_losses(spec))
}

/// [`gen_stochastic`] with the expected policy losses already computed, for
/// drawing many streams from one spec.
pub fn gen_stochastic_with(spec: &SyntheticSpec, seed: u64, expected: &[f64]) -> Result<StreamFile> {
    spec.validate()?;
    if spec.regime != SpecRegime::Stochastic {
        return Err(Error::Generation("spec describes an adversarial stream".into()));
    }
    if expected.len() != spec.n() + spec.k {
        return Err(Error::DimensionMismatch {
            what: "expected policy losses",
            expected: spec.n() + spec.k,
            found: expected.len(),
        });
    }
    let (best, delta) = best_and_gap(expected);
    if spec.require_unique_best && delta <= GAP_EPSILON {
        return Err(Error::Generation(format!(
            "no unique best policy: gap between policy {best} and the runner-up is {delta:e}"
        )));
    }
    let acc = spec
        .model_accuracies
        .as_ref()
        .map(|a| a.per_class(spec.c))
        .ok_or_else(|| Error::Generation("model_accuracies missing".into()))?;
    let label_probs = spec.label_probs();
    let mut rng = rng_from_seed(seed);
    let records = (1..=spec.horizon)
        .map(|t| draw_round(t, spec, &acc, &label_probs, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let meta = StreamMeta {
        c: spec.c,
        k: spec.k,
        n: spec.n(),
        horizon: spec.horizon,
        regime: StreamRegime::Stochastic,
        best_policy_index: Some(best),
        gap_delta: (delta > GAP_EPSILON).then_some(delta),
        gap_gamma: Some(realized_margin(&records, best)),
    };
    Ok(StreamFile { meta, records })
}

/// Piecewise-stationary stream, fully materialized before any learner sees it.
pub fn gen_adversarial(spec: &SyntheticSpec, seed: u64) -> Result<StreamFile> {
    spec.validate()?;
    let segments = spec
        .segments
        .as_ref()
        .ok_or_else(|| Error::Generation("adversarial stream needs segments".into()))?;
    let label_probs = spec.label_probs();
    let mut rng = rng_from_seed(seed);
    let mut records = Vec::with_capacity(spec.horizon);
    for seg in segments {
        let acc: Vec<Vec<f64>> = (0..spec.k)
            .map(|j| {
                let a = if j == seg.dominant_model {
                    DOMINANT_ACCURACY
                } else {
                    BACKGROUND_ACCURACY
                };
                vec![a; spec.c]
            })
            .collect();
        for _ in 0..seg.length {
            let t = records.len() + 1;
            records.push(draw_round(t, spec, &acc, &label_probs, &mut rng)?);
        }
    }
    let realized = realized_policy_losses(&records);
    let best = realized
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i);
    let meta = StreamMeta {
        c: spec.c,
        k: spec.k,
        n: spec.n(),
        horizon: spec.horizon,
        regime: StreamRegime::Adversarial,
        best_policy_index: best,
        gap_delta: None,
        gap_gamma: None,
    };
    Ok(StreamFile { meta, records })
}

pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<StreamFile> {
    match spec.regime {
        SpecRegime::Stochastic => gen_stochastic(spec, seed),
        SpecRegime::AdversarialSegments => gen_adversarial(spec, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::spec::{Accuracies, Segment};

    fn spec(acc: Vec<f64>, policies: Vec<PolicySpec>, horizon: usize) -> SyntheticSpec {
        SyntheticSpec {
            c: 2,
            k: acc.len(),
            horizon,
            model_accuracies: Some(Accuracies::Global(acc)),
            policies,
            label_distribution: None,
            regime: SpecRegime::Stochastic,
            segments: None,
            advice_noise: 0.05,
            require_unique_best: false,
            seed: None,
        }
    }

    fn error_rates(stream: &StreamFile) -> Vec<f64> {
        let mut wrong = vec![0.0; stream.meta.k];
        for r in &stream.records {
            for (w, l) in wrong.iter_mut().zip(r.losses()) {
                *w += l;
            }
        }
        wrong.iter().map(|w| w / stream.records.len() as f64).collect()
    }

    #[test]
    fn deterministic_accuracies() {
        let s = gen_stochastic(&spec(vec![1.0, 0.0], vec![], 10_000), 1).unwrap();
        assert_eq!(error_rates(&s), vec![0.0, 1.0]);
    }

    #[test]
    fn error_frequencies_within_three_sigma() {
        let mut s = spec(vec![0.9, 0.7, 0.55], vec![], 10_000);
        s.c = 4;
        let stream = gen_stochastic(&s, 2).unwrap();
        for (rate, acc) in error_rates(&stream).iter().zip([0.9, 0.7, 0.55]) {
            let p: f64 = 1.0 - acc;
            let sigma = (p * (1.0 - p) / 10_000.0).sqrt();
            assert!((rate - p).abs() < 3.0 * sigma, "rate {rate} vs {p}");
        }
    }

    #[test]
    fn wrong_labels_are_uniform_over_the_others() {
        let mut s = spec(vec![0.0, 0.0], vec![], 9000);
        s.c = 4;
        s.label_distribution = Some(vec![1.0, 0.0, 0.0, 0.0]);
        let stream = gen_stochastic(&s, 3).unwrap();
        let mut counts = [0usize; 4];
        for r in &stream.records {
            counts[r.predictions[0]] += 1;
        }
        assert_eq!(counts[0], 0);
        assert!(counts[1..].iter().all(|&n| (n as f64 - 3000.0).abs() < 200.0), "{counts:?}");
    }

    #[test]
    fn rows_are_simplex_and_malicious_reverses_normal() {
        let policies = vec![
            PolicySpec::new(PolicyKind::Normal, 10.0),
            PolicySpec::new(PolicyKind::Malicious, 10.0),
            PolicySpec::new(PolicyKind::Random, 1.0),
            PolicySpec::biased(10.0, vec![1]),
        ];
        let mut s = spec(vec![0.9, 0.6, 0.3], policies, 200);
        s.advice_noise = 0.0;
        let stream = gen_stochastic(&s, 4).unwrap();
        for r in &stream.records {
            for row in r.advice.rows() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            let order = |row: &[f64]| {
                let mut idx: Vec<usize> = (0..row.len()).collect();
                idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
                idx
            };
            let mut normal = order(r.advice.row(0));
            normal.reverse();
            assert_eq!(normal, order(r.advice.row(1)));
            let biased_top = order(r.advice.row(3))[0];
            assert_eq!(biased_top, if r.true_label == 1 { 2 } else { 0 });
        }
    }

    #[test]
    fn malicious_sharp_limit_points_at_worst_model() {
        let s = spec(vec![0.9, 0.1], vec![PolicySpec::new(PolicyKind::Malicious, 500.0)], 5);
        let stream = gen_stochastic(&s, 5).unwrap();
        for r in &stream.records {
            assert!(r.advice.row(0)[1] > 1.0 - 1e-9);
        }
    }

    #[test]
    fn metadata_gap_for_constant_policies() {
        let stream = gen_stochastic(&spec(vec![0.9, 0.7], vec![], 10), 6).unwrap();
        assert_eq!(stream.meta.best_policy_index, Some(0));
        assert!((stream.meta.gap_delta.unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(stream.meta.gap_gamma, Some(1.0));
    }

    #[test]
    fn metadata_gap_matches_monte_carlo() {
        let policies = vec![
            PolicySpec::new(PolicyKind::Normal, 3.0),
            PolicySpec::biased(3.0, vec![0]),
            PolicySpec::new(PolicyKind::Malicious, 3.0),
        ];
        let mut s = SyntheticSpec {
            model_accuracies: Some(Accuracies::PerClass(vec![
                vec![0.9, 0.5, 0.6],
                vec![0.55, 0.85, 0.6],
                vec![0.7, 0.7, 0.7],
            ])),
            ..spec(vec![0.0; 3], policies, 60_000)
        };
        s.c = 3;
        s.advice_noise = 0.1;
        let stream = gen_stochastic(&s, 7).unwrap();
        let mu = expected_policy_losses(&s);
        let realized = realized_policy_losses(&stream.records);
        for (m, r) in mu.iter().zip(&realized) {
            assert!((m - r / 60_000.0).abs() < 0.01, "{mu:?} vs {realized:?}");
        }
        let (_, delta) = best_and_gap(&mu);
        let mut sorted = realized.iter().map(|r| r / 60_000.0).collect::<Vec<_>>();
        sorted.sort_by(f64::total_cmp);
        assert!((delta - (sorted[1] - sorted[0])).abs() < 0.01);
    }

    #[test]
    fn tied_best_rejected_when_unique_required() {
        let mut s = spec(vec![0.8, 0.8], vec![], 10);
        assert!(gen_stochastic(&s, 0).unwrap().meta.gap_delta.is_none());
        s.require_unique_best = true;
        assert!(matches!(gen_stochastic(&s, 0), Err(Error::Generation(_))));
    }

    #[test]
    fn same_seed_same_stream() {
        let s = spec(vec![0.8, 0.6], vec![PolicySpec::new(PolicyKind::Random, 1.0)], 50);
        assert_eq!(gen_stochastic(&s, 9).unwrap(), gen_stochastic(&s, 9).unwrap());
        assert_ne!(gen_stochastic(&s, 9).unwrap(), gen_stochastic(&s, 10).unwrap());
    }

    fn two_segments(horizon: usize) -> SyntheticSpec {
        SyntheticSpec {
            model_accuracies: None,
            regime: SpecRegime::AdversarialSegments,
            segments: Some(vec![
                Segment { length: horizon / 2, dominant_model: 0 },
                Segment { length: horizon / 2, dominant_model: 1 },
            ]),
            ..spec(vec![0.0; 2], vec![PolicySpec::new(PolicyKind::Normal, 20.0)], horizon)
        }
    }

    #[test]
    fn adversarial_constant_policies_pay_for_the_switch() {
        let stream = gen_adversarial(&two_segments(1000), 11).unwrap();
        let losses = realized_policy_losses(&stream.records);
        // expected 0.275 T = 275 per constant policy; sd about 11
        for &l in &losses[1..] {
            assert!(l >= 275.0 - 40.0, "{losses:?}");
        }
        // the normal policy follows the per-segment dominant model: about 0.05 T
        assert!(losses[0] < 90.0, "{losses:?}");
        assert_eq!(stream.meta.best_policy_index, Some(0));
        assert_eq!(stream.meta.regime, StreamRegime::Adversarial);
    }

    #[test]
    fn segment_boundaries() {
        let stream = gen_adversarial(&two_segments(2000), 12).unwrap();
        let wrong = |range: std::ops::Range<usize>, model: usize| {
            stream.records[range].iter().filter(|r| r.predictions[model] != r.true_label).count()
        };
        assert!(wrong(0..1000, 0) < 100);
        assert!(wrong(1000..2000, 0) > 400);
        assert!(wrong(1000..2000, 1) < 100);
        assert!(stream.records.iter().enumerate().all(|(i, r)| r.round_index == i + 1));
    }
}
