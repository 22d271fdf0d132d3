use rand::Rng;

use crate::error::KernelError;
use crate::time::SimTime;

/// Exponential sample with the given rate, by inversion.
pub fn sample_exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> Result<SimTime, KernelError> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(KernelError::NonPositive { what: "rate", value: rate });
    }
    // 1 - U lies in (0, 1], so the log is finite
    let u: f64 = rng.random();
    SimTime::new(-(1.0 - u).ln() / rate)
}

/// Exponential race among independent clocks with the given rates.
///
/// The race time is exponential with the total rate and the winner is
/// drawn independently with probability `rate_i / total`, which is the joint
/// law of the minimum and its argmin.
pub fn race_winner<R: Rng + ?Sized>(rng: &mut R, rates: &[f64]) -> Result<(usize, SimTime), KernelError> {
    if rates.is_empty() {
        return Err(KernelError::EmptyInput("race_winner"));
    }
    if let Some(&bad) = rates.iter().find(|&&r| !(r > 0.0) || !r.is_finite()) {
        return Err(KernelError::NonPositive { what: "rate", value: bad });
    }
    let total: f64 = rates.iter().sum();
    let time = sample_exponential(rng, total)?;
    Ok((categorical(rng, rates, total), time))
}

/// Index drawn with probability proportional to `weights`.
pub(crate) fn categorical<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    if weights.len() == 1 {
        return 0;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.len() - 1
}
