use std::cmp::Ordering;

use super::special::t_two_sided_p;
use super::{Method, StatResult};
use crate::error::{Error, Result};
use crate::num::Real;

/// Ranks with ties replaced by their mean rank (1-based).
pub fn midranks<T: Real>(x: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![T::zero(); x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = T::from_count(i + j + 2) / T::lit(2.0);
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn centered<T: Real>(v: &[T]) -> Vec<T> {
    let mean = v.iter().fold(T::zero(), |a, &x| a + x) / T::from_count(v.len());
    v.iter().map(|&x| x - mean).collect()
}

/// Residual sum of squares below this fraction of the raw sum of squares is
/// treated as zero variance.
fn degenerate<T: Real>(ss_resid: T, raw: &[T]) -> bool {
    let scale = dot(raw, raw);
    ss_resid <= T::zero() || ss_resid <= scale * T::epsilon() * T::from_count(raw.len()) * T::lit(16.0)
}

/// Residuals of `v` after least-squares projection on an intercept and the
/// given (already orthonormalized, centered) basis.
fn residualize<T: Real>(v: &[T], basis: &[Vec<T>]) -> Vec<T> {
    let mut r = centered(v);
    for q in basis {
        let c = dot(&r, q);
        for (ri, &qi) in r.iter_mut().zip(q) {
            *ri = *ri - c * qi;
        }
    }
    r
}

/// Modified Gram–Schmidt over the centered controls. Fails if a control is
/// constant or linearly dependent on the others.
fn control_basis<T: Real>(controls: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(controls.len());
    for c in controls {
        let r = residualize(c, &basis);
        let ss = dot(&r, &r);
        if degenerate(ss, c) {
            return Err(Error::ZeroVariance);
        }
        let norm = ss.sqrt();
        basis.push(r.into_iter().map(|x| x / norm).collect());
    }
    Ok(basis)
}

fn correlate<T: Real>(rx: &[T], ry: &[T], x: &[T], y: &[T], df: usize, method: Method) -> Result<StatResult<T>> {
    let (sxx, syy) = (dot(rx, rx), dot(ry, ry));
    if degenerate(sxx, x) || degenerate(syy, y) {
        return Err(Error::ZeroVariance);
    }
    let r = (dot(rx, ry) / (sxx.sqrt() * syy.sqrt())).max(-T::one()).min(T::one());
    let dff = T::from_count(df);
    let p_value = if r.abs() >= T::one() {
        T::zero()
    } else {
        let t = r * (dff / (T::one() - r * r)).sqrt();
        t_two_sided_p(t, dff)
    };
    let statistic = if r.abs() >= T::one() {
        r.signum() * T::infinity()
    } else {
        r * (dff / (T::one() - r * r)).sqrt()
    };
    Ok(StatResult {
        statistic,
        p_value,
        effect: r,
        method,
    })
}

fn check_lengths<T>(x: &[T], y: &[T], k: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 + k {
        return Err(Error::InvalidArgument(format!(
            "correlation needs at least {} observations, got {}",
            3 + k,
            x.len()
        )));
    }
    Ok(())
}

/// Pearson correlation with a two-sided t-test p-value (`n − 2` df). The
/// effect is `r`; the statistic is the t value.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<StatResult<T>> {
    partial_with_method(x, y, &[], Method::Pearson)
}

/// Spearman's rank correlation: Pearson on midranks.
pub fn spearman<T: Real>(x: &[T], y: &[T]) -> Result<StatResult<T>> {
    check_lengths(x, y, 0)?;
    let (rx, ry) = (midranks(x), midranks(y));
    partial_with_method(&rx, &ry, &[], Method::Spearman)
}

/// Correlation of `x` and `y` after removing the linear effect of `controls`
/// (`n − 2 − k` df). With no controls this is exactly [`pearson`].
pub fn partial_pearson<T: Real>(x: &[T], y: &[T], controls: &[Vec<T>]) -> Result<StatResult<T>> {
    let method = if controls.is_empty() { Method::Pearson } else { Method::PartialPearson };
    partial_with_method(x, y, controls, method)
}

fn partial_with_method<T: Real>(x: &[T], y: &[T], controls: &[Vec<T>], method: Method) -> Result<StatResult<T>> {
    check_lengths(x, y, controls.len())?;
    if let Some(c) = controls.iter().find(|c| c.len() != x.len()) {
        return Err(Error::InvalidArgument(format!("control length {} != {}", c.len(), x.len())));
    }
    if x.iter().chain(y).chain(controls.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in correlation input".into()));
    }
    let basis = control_basis(controls)?;
    let rx = residualize(x, &basis);
    let ry = residualize(y, &basis);
    correlate(&rx, &ry, x, y, x.len() - 2 - controls.len(), method)
}
