use rand::Rng;

use crate::select;

/// Follow-the-Leader over the models' raw losses on queried rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct FtlState {
    pub queried_model_losses: Vec<f64>,
}

impl FtlState {
    pub fn new(models: usize) -> Self {
        Self {
            queried_model_losses: vec![0.0; models],
        }
    }

    pub fn observe(&mut self, losses: &[f64]) {
        for (total, l) in self.queried_model_losses.iter_mut().zip(losses) {
            *total += l;
        }
    }
}

/// Model with the smallest cumulative queried loss; ties broken uniformly at random.
pub fn ftl_recommend<R: Rng + ?Sized>(state: &FtlState, rng: &mut R) -> usize {
    select::argmin(&state.queried_model_losses, rng)
}

/// FTL restricted to the models flagged in `allowed`.
pub(crate) fn ftl_recommend_among<R: Rng + ?Sized>(state: &FtlState, allowed: &[bool], rng: &mut R) -> usize {
    let masked: Vec<f64> = state
        .queried_model_losses
        .iter()
        .zip(allowed)
        .map(|(&l, &ok)| if ok { l } else { f64::INFINITY })
        .collect();
    select::argmin(&masked, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn argmin_of_losses() {
        let mut rng = rng_from_seed(0);
        let s = FtlState {
            queried_model_losses: vec![3.0, 1.0, 2.0],
        };
        assert_eq!(ftl_recommend(&s, &mut rng), 1);
    }

    #[test]
    fn no_queries_is_uniform() {
        let mut rng = rng_from_seed(1);
        let s = FtlState::new(4);
        let mut counts = [0usize; 4];
        for _ in 0..8000 {
            counts[ftl_recommend(&s, &mut rng)] += 1;
        }
        assert!(counts.iter().all(|&c| (c as f64 - 2000.0).abs() < 200.0), "{counts:?}");
    }

    #[test]
    fn ties_split_evenly_across_seeds() {
        let s = FtlState {
            queried_model_losses: vec![1.0, 1.0, 5.0],
        };
        let mut counts = [0usize; 3];
        for seed in 0..2000 {
            counts[ftl_recommend(&s, &mut rng_from_seed(seed))] += 1;
        }
        assert_eq!(counts[2], 0);
        assert!((counts[0] as f64 - 1000.0).abs() < 100.0, "{counts:?}");
    }

    #[test]
    fn masked_models_are_skipped() {
        let mut rng = rng_from_seed(0);
        let s = FtlState {
            queried_model_losses: vec![0.0, 2.0, 1.0],
        };
        assert_eq!(ftl_recommend_among(&s, &[false, true, true], &mut rng), 2);
    }
}
