//! Exact Poisson variates for tau-leaping.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Means below this use sequential inversion; above it, rejection sampling.
const INVERSION_LIMIT: f64 = 12.0;

/// Draws k ~ Poisson(mean). A mean of zero always yields zero.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < INVERSION_LIMIT {
        // Walk the CDF from k = 0; expected cost is O(1 + mean).
        let u: f64 = rng.random();
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut k = 0u64;
        while u >= cdf {
            k += 1;
            p *= mean / k as f64;
            let next = cdf + p;
            if next == cdf {
                break;
            }
            cdf = next;
        }
        k
    } else {
        let dist = Poisson::new(mean).expect("finite positive mean");
        let k: f64 = dist.sample(rng);
        k as u64
    }
}
