use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{JitterError, Result};
use crate::train::TrialSet;

/// Uniformly permutes the trial order of one neuron; other neurons are untouched.
pub fn trial_shuffle<R: Rng + ?Sized>(ts: &TrialSet, neuron: usize, rng: &mut R) -> Result<TrialSet> {
    if neuron >= ts.neurons() {
        return Err(JitterError::param("neuron", format!("no neuron {neuron}")));
    }
    let mut order: Vec<usize> = (0..ts.trials()).collect();
    order.shuffle(rng);
    let trains = order.iter().map(|&k| ts.train(neuron, k).clone()).collect();
    ts.clone().with_neuron(neuron, trains)
}
