//! Exact capacity under a finite attempt budget `A`.
//!
//! With equidistant hops the per-hop attempt counts are iid geometric, so the
//! total `T(M)` is Pascal(M, p). Delivery within the budget is the binomial
//! event `{T(M) <= A} = {S_A >= M}` with `S_A ~ Bin(A, p)`.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::analytic::{per_hop_success, CapacityMethod};
use crate::model::NetworkParams;

/// Total attempts for `m` hops at per-hop success `p`, capped at `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PascalModel {
    pub m: u64,
    pub p: f64,
    pub a: u64,
}

impl PascalModel {
    pub fn new(m: u64, p: f64, a: u64) -> Self {
        debug_assert!((0.0..=1.0).contains(&p), "p out of range: {p}");
        PascalModel { m, p, a }
    }
}

/// Largest `n` for which binomial coefficients are formed exactly in `u128`.
const EXACT_CHOOSE_MAX: u64 = 120;

fn ln_choose(n: u64, k: u64) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

fn choose_exact(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c = C(n, i) here, and C(n, i) (n - i) / (i + 1) is an integer
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// `C(n, k) p^k (1-p)^(n-k)` for `0 < p < 1`, `k <= n`.
///
/// Small `n` multiplies an exact coefficient by integer powers, which keeps
/// the relative error at a few ulps; the log domain is the fallback for large
/// `n` or when the product underflows.
fn bernoulli_mass(n: u64, k: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    if n <= EXACT_CHOOSE_MAX {
        let v = choose_exact(n, k) as f64 * p.powi(k as i32) * q.powi((n - k) as i32);
        if v.is_normal() {
            return v;
        }
    }
    let (kf, nf) = (k as f64, n as f64);
    (ln_choose(n, k) + kf * p.ln() + (nf - kf) * (-p).ln_1p()).exp()
}

/// `P(S_n = k)` for `S_n ~ Bin(n, p)`.
pub fn binom_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    bernoulli_mass(n, k, p)
}

fn lower_sum(n: u64, p: f64, k: u64) -> f64 {
    (0..=k).map(|j| binom_pmf(n, p, j)).sum()
}

fn upper_sum(n: u64, p: f64, k: u64) -> f64 {
    (k..=n).map(|j| binom_pmf(n, p, j)).sum()
}

/// `P(S_n <= k)`. Negative `k` gives 0. Sums whichever tail is lighter.
pub fn binom_cdf(n: u64, p: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let k = k as u64;
    if k >= n {
        return 1.0;
    }
    if (k as f64) <= n as f64 * p {
        lower_sum(n, p, k).min(1.0)
    } else {
        (1.0 - upper_sum(n, p, k + 1)).clamp(0.0, 1.0)
    }
}

/// `P(S_n >= k)`. `k > n` gives 0.
pub fn binom_sf(n: u64, p: f64, k: i64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    let k = k as u64;
    if k > n {
        return 0.0;
    }
    if (k as f64) > n as f64 * p {
        upper_sum(n, p, k).min(1.0)
    } else {
        (1.0 - lower_sum(n, p, k - 1)).clamp(0.0, 1.0)
    }
}

/// `P(T(M) = n)`: the `m`-th success happens on trial `n`.
pub fn pascal_pmf(model: &PascalModel, n: u64) -> f64 {
    let (m, p) = (model.m, model.p);
    if m == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n < m {
        return 0.0;
    }
    if p == 1.0 {
        return if n == m { 1.0 } else { 0.0 };
    }
    if p == 0.0 {
        return 0.0;
    }
    p * bernoulli_mass(n - 1, m - 1, p)
}

/// `P(T(M) <= A)`; the complement is the end-to-end outage.
pub fn prob_delivery(model: &PascalModel) -> f64 {
    if model.m > model.a {
        return 0.0;
    }
    binom_sf(model.a, model.p, model.m as i64)
}

/// `E[T(M) ∧ A]` by summing the Pascal mass up to `A` plus `A` times the tail.
pub fn expected_attempts_capped(model: &PascalModel) -> f64 {
    let PascalModel { m, p, a } = *model;
    if m == 0 {
        return 0.0;
    }
    if m > a {
        return a as f64;
    }
    let head: f64 = (m..=a).map(|n| n as f64 * pascal_pmf(model, n)).sum();
    // P(T > A) = P(S_A <= M - 1)
    head + a as f64 * binom_cdf(a, p, m as i64 - 1)
}

/// `E[T(M) ∧ A]` through the binomial rearrangement
/// `p E = M P(S_A >= M) + (pA + M) P(S_A <= M-1) - M P(S_{A+1} <= M)`.
pub fn expected_attempts_capped_binomial(model: &PascalModel) -> f64 {
    let PascalModel { m, p, a } = *model;
    if p == 0.0 {
        return if m == 0 { 0.0 } else { a as f64 };
    }
    let (mf, af) = (m as f64, a as f64);
    let mi = m as i64;
    let gap = (p * af + mf) * binom_cdf(a, p, mi - 1) - mf * binom_cdf(a + 1, p, mi);
    (mf * binom_sf(a, p, mi) + gap) / p
}

/// `f(M) = p E[T(M) ∧ A] - M P(T(M) <= A)`, non-negative for `0 <= M <= A`.
pub fn budget_gap(model: &PascalModel) -> f64 {
    model.p * expected_attempts_capped(model) - model.m as f64 * prob_delivery(model)
}

/// `f(M+1) - f(M)`, evaluated from two gaps.
pub fn gap_increment(model: &PascalModel) -> f64 {
    let next = PascalModel {
        m: model.m + 1,
        ..*model
    };
    budget_gap(&next) - budget_gap(model)
}

/// Closed form of the gap increment: `M P(S_A = M)`.
pub fn gap_increment_closed(model: &PascalModel) -> f64 {
    model.m as f64 * binom_pmf(model.a, model.p, model.m)
}

/// Residuals of the binomial identities behind the gap increment, for one
/// `(A, M, p)` point. Each should vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// `p sum_{n=M}^{A} P(S_n = M) - P(S_{A+1} >= M+1)`; defined for `M < A`.
    pub tail_sum: f64,
    /// `P(S_A <= M-1) - (1-p) P(S_{A-1} <= M-1) - p P(S_{A-1} <= M-2)`.
    pub last_trial: f64,
    /// `(1-p)(M+1) P(S_A = M+1) - p (A-M) P(S_A = M)`.
    pub adjacent_mass: f64,
    pub delta: f64,
    pub expectation_routes: f64,
}

pub fn identity_residuals(a: u64, m: u64, p: f64) -> IdentityResiduals {
    identity_residuals_with(a, m, p, p)
}

/// As [`identity_residuals`], with the right-hand side of every identity
/// evaluated at `p_rhs`. Anything other than `p_rhs == p` is a negative
/// control and should produce non-zero residuals.
pub fn identity_residuals_with(a: u64, m: u64, p: f64, p_rhs: f64) -> IdentityResiduals {
    let mi = m as i64;
    let q = p_rhs;
    let tail_sum = if m < a {
        p * (m..=a).map(|n| binom_pmf(n, p, m)).sum::<f64>() - binom_sf(a + 1, q, mi + 1)
    } else {
        0.0
    };
    let last_trial = if a >= 1 {
        binom_cdf(a, p, mi - 1) - (1.0 - q) * binom_cdf(a - 1, q, mi - 1) - q * binom_cdf(a - 1, q, mi - 2)
    } else {
        0.0
    };
    let adjacent_mass =
        (1.0 - p) * (m as f64 + 1.0) * binom_pmf(a, p, m + 1) - q * (a as f64 - m as f64) * binom_pmf(a, q, m);
    let model = PascalModel::new(m, p, a);
    let rhs_model = PascalModel::new(m, q, a);
    let delta = if m < a {
        gap_increment(&model) - gap_increment_closed(&rhs_model)
    } else {
        0.0
    };
    let expectation_routes = if m >= 1 {
        expected_attempts_capped(&model) - expected_attempts_capped_binomial(&rhs_model)
    } else {
        0.0
    };
    IdentityResiduals {
        tail_sum,
        last_trial,
        adjacent_mass,
        delta,
        expectation_routes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteRow {
    pub m: u64,
    pub p_s: f64,
    pub p_delivery: f64,
    pub expected_attempts_capped: f64,
    /// `P(T <= A) / E[T ∧ A]`.
    pub objective: f64,
    /// `p_s(M) / M`, the unlimited-budget objective at the same `M`.
    pub bound_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteCapacityResult {
    pub method: CapacityMethod,
    pub a: u64,
    pub capacity: f64,
    pub m_star: u64,
    pub p_out: f64,
    pub per_m_table: Vec<FiniteRow>,
}

impl FiniteCapacityResult {
    /// Upper bound over the same range, `lambda log(1+beta) R max_M p_s(M)/M`.
    pub fn bound_argmax(&self) -> (u64, f64) {
        argmax(self.per_m_table.iter().map(|r| (r.m, r.bound_objective)))
    }
}

/// Largest value, ties to the earliest (smallest `M`).
pub(crate) fn argmax(it: impl Iterator<Item = (u64, f64)>) -> (u64, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (m, v) in it {
        if v > best.1 {
            best = (m, v);
        }
    }
    best
}

pub fn finite_row(params: &NetworkParams, m: u64, a: u64) -> FiniteRow {
    let p_s = per_hop_success(params, m as f64).expect("m >= 1");
    let model = PascalModel::new(m, p_s, a);
    let p_delivery = prob_delivery(&model);
    let expected = expected_attempts_capped(&model);
    FiniteRow {
        m,
        p_s,
        p_delivery,
        expected_attempts_capped: expected,
        objective: p_delivery / expected,
        bound_objective: p_s / m as f64,
    }
}

/// Exact capacity `lambda log(1+beta) R max_{M <= A} P(T <= A) / E[T ∧ A]`.
pub fn capacity_finite(params: &NetworkParams, a: u64) -> FiniteCapacityResult {
    assert!(a >= 1, "attempt budget must be at least 1");
    #[cfg(feature = "parallel")]
    let per_m_table: Vec<FiniteRow> = {
        use rayon::prelude::*;
        (1..=a).into_par_iter().map(|m| finite_row(params, m, a)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_m_table: Vec<FiniteRow> = (1..=a).map(|m| finite_row(params, m, a)).collect();

    let (m_star, best) = argmax(per_m_table.iter().map(|r| (r.m, r.objective)));
    let p_out = 1.0 - per_m_table[(m_star - 1) as usize].p_delivery;
    FiniteCapacityResult {
        method: CapacityMethod::ExactFiniteA,
        a,
        capacity: params.lambda() * params.spectral_efficiency() * params.big_r() * best,
        m_star,
        p_out,
        per_m_table,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pascal_values() {
        let g = PascalModel::new(1, 0.3, 100);
        for n in 1..10 {
            assert_relative_eq!(pascal_pmf(&g, n), 0.7f64.powi(n as i32 - 1) * 0.3, max_relative = 1e-13);
        }
        assert_relative_eq!(pascal_pmf(&PascalModel::new(2, 0.5, 3), 3), 0.25, max_relative = 1e-14);
        assert_eq!(pascal_pmf(&PascalModel::new(3, 0.5, 3), 2), 0.0);
        let sure = PascalModel::new(4, 1.0, 10);
        assert_eq!(pascal_pmf(&sure, 4), 1.0);
        assert_eq!(pascal_pmf(&sure, 5), 0.0);
        let total: f64 = (5..2000).map(|n| pascal_pmf(&PascalModel::new(5, 0.2, 0), n)).sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn binomial_values() {
        assert_relative_eq!(binom_cdf(4, 0.5, 2), 11.0 / 16.0, max_relative = 1e-14);
        assert_eq!(binom_cdf(4, 0.0, 0), 1.0);
        assert_eq!(binom_cdf(4, 0.0, 3), 1.0);
        assert_eq!(binom_sf(4, 1.0, 4), 1.0);
        assert_eq!(binom_cdf(4, 0.3, -1), 0.0);
        assert_eq!(binom_sf(4, 0.3, 5), 0.0);
        for k in -1..6i64 {
            assert_relative_eq!(
                binom_cdf(5, 0.37, k) + binom_sf(5, 0.37, k + 1),
                1.0,
                max_relative = 1e-14
            );
        }
        // large budgets stay finite and normalized
        let s = binom_cdf(10_000, 0.3, 3000) + binom_sf(10_000, 0.3, 3001);
        assert_relative_eq!(s, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn delivery() {
        assert_relative_eq!(
            prob_delivery(&PascalModel::new(3, 0.4, 3)),
            0.4f64.powi(3),
            max_relative = 1e-14
        );
        assert_eq!(prob_delivery(&PascalModel::new(3, 1.0, 7)), 1.0);
        assert_relative_eq!(prob_delivery(&PascalModel::new(2, 0.5, 3)), 0.5, max_relative = 1e-14);
        assert_eq!(prob_delivery(&PascalModel::new(4, 0.9, 3)), 0.0);
    }

    #[test]
    fn capped_expectation() {
        assert_relative_eq!(
            expected_attempts_capped(&PascalModel::new(3, 1.0, 5)),
            3.0,
            max_relative = 1e-14
        );
        for a in 1..20 {
            let p: f64 = 0.27;
            let e = expected_attempts_capped(&PascalModel::new(1, p, a));
            assert_relative_eq!(e, (1.0 - (1.0 - p).powi(a as i32)) / p, max_relative = 1e-13);
        }
        assert_relative_eq!(
            expected_attempts_capped(&PascalModel::new(2, 0.5, 2)),
            2.0,
            max_relative = 1e-14
        );
        let m = PascalModel::new(4, 0.35, 11);
        assert_relative_eq!(
            expected_attempts_capped(&m),
            expected_attempts_capped_binomial(&m),
            max_relative = 1e-12
        );
    }

    #[test]
    fn gap_values() {
        assert_eq!(budget_gap(&PascalModel::new(0, 0.4, 5)), 0.0);
        for a in 1..15 {
            assert!(budget_gap(&PascalModel::new(1, 0.33, a)).abs() < 1e-14);
        }
        // (M=2, p=1/2, A=3): E[T∧3] = 2*1/4 + 3*3/4 = 11/4, P(T<=3) = 1/2
        assert_relative_eq!(
            budget_gap(&PascalModel::new(2, 0.5, 3)),
            0.5 * 11.0 / 4.0 - 1.0,
            max_relative = 1e-13
        );
        assert_eq!(gap_increment(&PascalModel::new(0, 0.5, 4)), 0.0);
        assert_relative_eq!(gap_increment(&PascalModel::new(2, 0.5, 4)), 0.75, max_relative = 1e-12);
        assert_relative_eq!(
            gap_increment_closed(&PascalModel::new(2, 0.5, 4)),
            0.75,
            max_relative = 1e-14
        );
        assert!(gap_increment(&PascalModel::new(2, 1.0 - 1e-12, 6)).abs() < 1e-9);
    }

    fn defaults() -> NetworkParams {
        NetworkParams::with_snr(0.1, 3.0, 3.0, 1.0, 1.0, 10.0).unwrap()
    }

    #[test]
    fn single_attempt_is_single_hop() {
        let p = defaults();
        let r = capacity_finite(&p, 1);
        assert_eq!(r.per_m_table.len(), 1);
        assert_eq!(r.m_star, 1);
        assert_relative_eq!(
            r.capacity,
            crate::analytic::single_hop_capacity(&p),
            max_relative = 1e-14
        );
    }

    #[test]
    fn bounded_by_upper_bound() {
        let p = defaults();
        for a in 1..=50 {
            let r = capacity_finite(&p, a);
            let (_, ub) = crate::analytic::cub_range(&p, a);
            assert!(r.capacity <= ub * (1.0 + 1e-12), "A={a}");
            for row in &r.per_m_table {
                assert!(row.objective <= row.bound_objective * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn large_budget_closes_gap() {
        let p = defaults();
        let r = capacity_finite(&p, 500);
        let (_, ub) = crate::analytic::cub_range(&p, 500);
        assert!((ub - r.capacity) / ub < 1e-6);
    }

    proptest::proptest! {
        #[test]
        fn delivery_monotone(a in 1u64..60, m in 1u64..60, p in 0.01f64..0.99, dp in 0.0f64..0.2) {
            let m = m.min(a);
            let base = prob_delivery(&PascalModel::new(m, p, a));
            proptest::prop_assert!(prob_delivery(&PascalModel::new(m + 1, p, a)) <= base + 1e-14);
            proptest::prop_assert!(prob_delivery(&PascalModel::new(m, p, a + 1)) >= base - 1e-14);
            proptest::prop_assert!(prob_delivery(&PascalModel::new(m, (p + dp).min(1.0), a)) >= base - 1e-14);
        }

        #[test]
        fn capped_expectation_bounds(a in 1u64..80, m in 1u64..80, p in 0.0f64..=1.0) {
            let e = expected_attempts_capped(&PascalModel::new(m, p, a));
            proptest::prop_assert!(e >= (m.min(a) as f64) - 1e-12 && e <= a as f64 + 1e-12);
        }
    }
}
