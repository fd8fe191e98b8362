use super::special::{chi2_sf, normal_quantile};
use super::{Method, StatResult};
use crate::error::{Error, Result};
use crate::num::Real;

/// Wilson score interval for `k` successes out of `n` at confidence `level`.
pub fn wilson_ci<T: Real>(k: u64, n: u64, level: T) -> Result<(T, T)> {
    if n == 0 || k > n {
        return Err(Error::InvalidArgument(format!("wilson interval needs 0 <= k <= n, n >= 1 (k={k}, n={n})")));
    }
    if !(level > T::zero() && level < T::one()) {
        return Err(Error::InvalidArgument("confidence level must be in (0, 1)".into()));
    }
    let two = T::lit(2.0);
    let z = normal_quantile(T::one() - (T::one() - level) / two);
    let nf = T::from_u64(n).unwrap();
    let p = T::from_u64(k).unwrap() / nf;
    let z2 = z * z;
    let denom = T::one() + z2 / nf;
    let centre = (p + z2 / (two * nf)) / denom;
    let half = z / denom * (p * (T::one() - p) / nf + z2 / (T::lit(4.0) * nf * nf)).sqrt();
    let lo = if k == 0 { T::zero() } else { (centre - half).max(T::zero()) };
    let hi = if k == n { T::one() } else { (centre + half).min(T::one()) };
    Ok((lo, hi))
}

/// Chi-squared test (Yates-corrected) that `k1/n1` and `k2/n2` are equal.
/// The effect is `k1/n1 − k2/n2`.
pub fn proportion_test<T: Real>(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<StatResult<T>> {
    if n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2 {
        return Err(Error::InvalidArgument(format!(
            "proportion test needs k <= n and n >= 1 ({k1}/{n1} vs {k2}/{n2})"
        )));
    }
    let f = |x: u64| T::from_u64(x).unwrap();
    let effect = f(k1) / f(n1) - f(k2) / f(n2);
    let (a, b, c, d) = (k1, n1 - k1, k2, n2 - k2);
    let total = f(n1 + n2);
    let margins = f(a + c) * f(b + d) * f(n1) * f(n2);
    if margins == T::zero() {
        return Ok(StatResult {
            statistic: T::zero(),
            p_value: T::one(),
            effect,
            method: Method::ChiSquaredYates,
        });
    }
    let cross = (f(a) * f(d) - f(b) * f(c)).abs();
    let corrected = (cross - total / T::lit(2.0)).max(T::zero());
    let statistic = total * corrected * corrected / margins;
    Ok(StatResult {
        statistic,
        p_value: chi2_sf(statistic, T::one()).min(T::one()),
        effect,
        method: Method::ChiSquaredYates,
    })
}
