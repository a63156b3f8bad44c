//! Named benchmark specs used by the experiment suite and `cams-bench gen --preset`.

use super::spec::{Accuracies, PolicyKind, PolicySpec, Segment, SpecRegime, SyntheticSpec};

pub const PRESET_NAMES: [&str; 6] = ["standard", "malicious", "six-class", "context-free", "vertebral", "adversarial"];

fn base(c: usize, k: usize, horizon: usize, acc: Accuracies, policies: Vec<PolicySpec>) -> SyntheticSpec {
    SyntheticSpec {
        c,
        k,
        horizon,
        model_accuracies: Some(acc),
        policies,
        label_distribution: None,
        regime: SpecRegime::Stochastic,
        segments: None,
        advice_noise: super::spec::DEFAULT_ADVICE_NOISE,
        require_unique_best: true,
        seed: None,
    }
}

fn policies(kinds: &[(PolicyKind, usize)], sharpness: f64) -> Vec<PolicySpec> {
    kinds
        .iter()
        .flat_map(|&(kind, count)| std::iter::repeat_n(PolicySpec::new(kind, sharpness), count))
        .collect()
}

/// Three per-class specialists, one generalist and one coin flip; one normal
/// policy that routes each instance to its specialist dominates every other
/// extended policy by 0.2.
pub fn standard() -> SyntheticSpec {
    let acc = Accuracies::PerClass(vec![
        vec![0.95, 0.55, 0.55],
        vec![0.55, 0.95, 0.55],
        vec![0.55, 0.55, 0.95],
        vec![0.75, 0.75, 0.75],
        vec![0.5, 0.5, 0.5],
    ]);
    let s = 40.0;
    let policies = vec![
        PolicySpec::new(PolicyKind::Normal, s),
        PolicySpec::biased(s, vec![0, 1]),
        PolicySpec::biased(s, vec![1, 2]),
        PolicySpec::new(PolicyKind::Random, 1.0),
        PolicySpec::new(PolicyKind::Random, 1.0),
        PolicySpec::new(PolicyKind::Malicious, s),
    ];
    base(3, 5, 4000, acc, policies)
}

/// Only malicious and random advice; one model is clearly best on its own.
pub fn malicious() -> SyntheticSpec {
    let acc = Accuracies::Global(vec![0.85, 0.45, 0.4, 0.35]);
    let policies = policies(&[(PolicyKind::Malicious, 3), (PolicyKind::Random, 2)], 40.0);
    base(3, 4, 2000, acc, policies)
}

/// Six classes, six specialists and four generalists.
pub fn six_class() -> SyntheticSpec {
    let c = 6;
    let mut acc: Vec<Vec<f64>> = (0..c)
        .map(|j| (0..c).map(|y| if y == j { 0.9 } else { 0.45 }).collect())
        .collect();
    for a in [0.7, 0.6, 0.5, 0.4] {
        acc.push(vec![a; c]);
    }
    let s = 30.0;
    let policies = vec![
        PolicySpec::new(PolicyKind::Normal, s),
        PolicySpec::new(PolicyKind::Normal, s / 3.0),
        PolicySpec::biased(s, vec![0, 1, 2]),
        PolicySpec::biased(s, vec![3, 4, 5]),
        PolicySpec::new(PolicyKind::Random, 1.0),
        PolicySpec::new(PolicyKind::Random, 1.0),
        PolicySpec::new(PolicyKind::Malicious, s),
        PolicySpec::new(PolicyKind::Malicious, s),
    ];
    let mut spec = base(c, 10, 2000, Accuracies::PerClass(acc), policies);
    // the two normal policies differ only in sharpness, so their greedy losses tie
    spec.require_unique_best = false;
    spec
}

/// No base policies: model selection without context.
pub fn context_free() -> SyntheticSpec {
    base(3, 5, 2000, Accuracies::Global(vec![0.8, 0.7, 0.65, 0.6, 0.5]), Vec::new())
}

/// Small, noisy, policy-rich stream in the spirit of a 3-class tabular task.
pub fn vertebral() -> SyntheticSpec {
    let acc = Accuracies::PerClass(vec![
        vec![0.9, 0.6, 0.5],
        vec![0.6, 0.9, 0.55],
        vec![0.5, 0.55, 0.9],
        vec![0.75, 0.7, 0.7],
        vec![0.65, 0.65, 0.65],
        vec![0.4, 0.45, 0.5],
    ]);
    let s = 10.0;
    let mut p = policies(&[(PolicyKind::Normal, 4)], s);
    p.push(PolicySpec::biased(s, vec![0]));
    p.push(PolicySpec::biased(s, vec![2]));
    p.extend(policies(&[(PolicyKind::Malicious, 6), (PolicyKind::Random, 5)], s));
    for r in p.iter_mut().filter(|p| p.kind == PolicyKind::Random) {
        r.sharpness = 1.0;
    }
    let mut spec = base(3, 6, 300, acc, p);
    spec.advice_noise = 0.15;
    spec.require_unique_best = false;
    spec
}

/// Two halves with different dominant models.
pub fn adversarial() -> SyntheticSpec {
    let mut spec = base(
        3,
        4,
        2000,
        Accuracies::Global(vec![0.5; 4]),
        policies(&[(PolicyKind::Normal, 1), (PolicyKind::Random, 1), (PolicyKind::Malicious, 1)], 20.0),
    );
    spec.model_accuracies = None;
    spec.regime = SpecRegime::AdversarialSegments;
    spec.require_unique_best = false;
    spec.segments = Some(vec![
        Segment { length: 1000, dominant_model: 0 },
        Segment { length: 1000, dominant_model: 1 },
    ]);
    spec
}

pub fn preset(name: &str) -> Option<SyntheticSpec> {
    match name {
        "standard" => Some(standard()),
        "malicious" => Some(malicious()),
        "six-class" => Some(six_class()),
        "context-free" => Some(context_free()),
        "vertebral" => Some(vertebral()),
        "adversarial" => Some(adversarial()),
        _ => None,
    }
}
