//! Deterministic sample points for charts.
//!
//! Points come from a Halton sequence in a box, shifted modulo one by a
//! seeded random offset. Candidates the chart does not admit are skipped,
//! so the result depends only on the seed, the box and the chart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::curvature::MetricChart;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("only {found} of {wanted} points admitted after {tried} candidates")]
    Exhausted { wanted: usize, found: usize, tried: usize },
    #[error("box has {got} sides, chart has dimension {expected}")]
    Dimension { got: usize, expected: usize },
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// `count` points of the shifted Halton sequence in `bounds`.
pub fn halton_points(bounds: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = bounds.iter().map(|_| rng.random::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            bounds
                .iter()
                .enumerate()
                .map(|(d, &(lo, hi))| {
                    let u = (radical_inverse(i, PRIMES[d % PRIMES.len()]) + shift[d]).fract();
                    lo + (hi - lo) * u
                })
                .collect()
        })
        .collect()
}

/// `count` admitted points of `chart` inside `bounds`.
pub fn sample_points(
    chart: &MetricChart,
    bounds: &[(f64, f64)],
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, SamplingError> {
    if bounds.len() != chart.dim() {
        return Err(SamplingError::Dimension { got: bounds.len(), expected: chart.dim() });
    }
    let budget = 50 * count.max(1);
    let candidates = halton_points(bounds, budget, seed);
    let out: Vec<_> = candidates.into_iter().filter(|p| chart.admits(p)).take(count).collect();
    if out.len() < count {
        return Err(SamplingError::Exhausted { wanted: count, found: out.len(), tried: budget });
    }
    Ok(out)
}

/// `n` points per axis on a regular grid in `bounds`, endpoints included.
pub fn grid_points(bounds: &[(f64, f64)], n: usize) -> Vec<Vec<f64>> {
    let n = n.max(1);
    let mut out = vec![Vec::new()];
    for &(lo, hi) in bounds {
        let axis: Vec<f64> = (0..n)
            .map(|i| if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect();
        out = out
            .into_iter()
            .flat_map(|p| axis.iter().map(move |&x| {
                let mut q = p.clone();
                q.push(x);
                q
            }))
            .collect();
    }
    out
}
