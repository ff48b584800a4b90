//! Weighted water-filling power allocation shared by every design stage.

use crate::Scalar;

/// Result of a water-filling allocation.
#[derive(Debug, Clone)]
pub struct WaterfillResult<T> {
    /// Allocated powers, one per input index, all ≥ 0.
    pub powers: Vec<T>,
    /// Water level `1/λ` at the solution (0 when the budget is 0).
    pub water_level: T,
    /// Indices with strictly positive power, ascending.
    pub active_set: Vec<usize>,
}

/// Maximizes `Σ_k weights_k·log2(1 + p_k/noise)` subject to the weighted
/// budget `Σ_k costs_k·p_k = budget`, `p_k ≥ 0`.
///
/// The optimality condition is `p_k = (1/q_k)·max{β_k/λ − q_k·σ², 0}` with the
/// Lagrange level λ chosen to meet the budget: bisection for σ² > 0, closed
/// form for σ² = 0 (every index active, `p_k = budget·β_k/(q_k·Σβ)`). Inactive
/// indices get exactly zero power.
pub fn waterfill<T: Scalar>(costs: &[T], weights: &[T], noise: T, budget: T) -> WaterfillResult<T> {
    let k = costs.len();
    assert_eq!(k, weights.len(), "costs and weights must have equal length");
    assert!(k > 0, "empty allocation");
    assert!(
        costs.iter().all(|q| *q > T::zero() && q.is_finite()),
        "costs must be positive and finite"
    );
    assert!(
        weights.iter().all(|b| *b > T::zero() && b.is_finite()),
        "weights must be positive and finite"
    );
    assert!(noise >= T::zero() && noise.is_finite(), "noise must be ≥ 0");
    assert!(budget >= T::zero() && budget.is_finite(), "budget must be ≥ 0");

    if budget == T::zero() {
        return WaterfillResult {
            powers: vec![T::zero(); k],
            water_level: T::zero(),
            active_set: Vec::new(),
        };
    }

    if noise == T::zero() {
        // Every index is active; the level follows from the budget directly.
        let beta_sum: T = weights.iter().copied().sum();
        let lambda = beta_sum / budget;
        let powers: Vec<T> = costs
            .iter()
            .zip(weights)
            .map(|(&q, &b)| b / (q * lambda))
            .collect();
        return WaterfillResult {
            powers,
            water_level: T::one() / lambda,
            active_set: (0..k).collect(),
        };
    }

    // Σ_k max{β_k/λ − q_k·σ², 0}, the weighted budget consumed at level λ.
    let spent = |lambda: T| -> T {
        costs
            .iter()
            .zip(weights)
            .map(|(&q, &b)| (b / lambda - q * noise).max(T::zero()))
            .fold(T::zero(), |a, x| a + x)
    };

    let beta_max = weights.iter().copied().fold(T::zero(), T::max);
    let cost_noise: T = costs.iter().map(|&q| q * noise).sum();
    // Analytic bracket: the largest-weight term alone overshoots the budget at
    // lambda_lo; at lambda_hi every term has drained to zero.
    let mut lambda_lo = beta_max / (budget + cost_noise);
    let mut lambda_hi = costs
        .iter()
        .zip(weights)
        .map(|(&q, &b)| b / (q * noise))
        .fold(T::zero(), T::max);
    let two = T::lit(2.0);
    let mut guard = 0;
    while spent(lambda_lo) < budget && guard < 512 {
        lambda_lo /= two;
        guard += 1;
    }
    guard = 0;
    while spent(lambda_hi) > budget && guard < 512 {
        lambda_hi *= two;
        guard += 1;
    }

    let mut lo = lambda_lo;
    let mut hi = lambda_hi;
    for _ in 0..500 {
        if hi - lo <= hi * T::epsilon() * two {
            break;
        }
        let mid = (lo + hi) * T::lit(0.5);
        if spent(mid) >= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut lambda = (lo + hi) * T::lit(0.5);

    // Polish: solve the budget exactly on the bisection's active set.
    let active: Vec<usize> = (0..k)
        .filter(|&i| weights[i] / lambda > costs[i] * noise)
        .collect();
    if !active.is_empty() {
        let beta_sum: T = active.iter().map(|&i| weights[i]).sum();
        let cost_sum: T = active.iter().map(|&i| costs[i]).sum();
        let refined = beta_sum / (budget + cost_sum * noise);
        let consistent = (0..k).all(|i| {
            let positive = weights[i] / refined - costs[i] * noise > T::zero();
            positive == active.contains(&i)
        });
        if consistent {
            lambda = refined;
        }
    }

    let powers: Vec<T> = costs
        .iter()
        .zip(weights)
        .map(|(&q, &b)| ((b / lambda - q * noise).max(T::zero())) / q)
        .collect();
    let active_set: Vec<usize> = (0..k).filter(|&i| powers[i] > T::zero()).collect();
    WaterfillResult {
        powers,
        water_level: T::one() / lambda,
        active_set,
    }
}
