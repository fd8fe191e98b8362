use std::cmp::Ordering;

use super::special::normal_sf;
use super::{Method, StatResult};
use crate::error::{Error, Result};
use crate::num::Real;

/// Largest combined sample size for which the null distribution is enumerated.
pub const EXACT_MAX_N: usize = 12;

/// Hard limit for explicit enumeration requests.
const ENUMERATION_LIMIT: usize = 24;

fn check<T: Real>(a: &[T], b: &[T]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("rank-sum test needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN in rank-sum sample".into()));
    }
    Ok(())
}

/// Twice the midrank of every pooled observation (`a` first, then `b`), so
/// ties stay integral, plus the tie group sizes.
fn doubled_midranks<T: Real>(a: &[T], b: &[T]) -> (Vec<u64>, Vec<u64>) {
    let pooled: Vec<T> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].partial_cmp(&pooled[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0u64; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1; doubled mean = i + j + 2
        for &k in &order[i..=j] {
            ranks[k] = (i + j + 2) as u64;
        }
        ties.push((j - i + 1) as u64);
        i = j + 1;
    }
    (ranks, ties)
}

/// Exact two-sided p-value by enumerating every assignment of the pooled
/// midranks to a sample of size `a.len()`.
pub fn ranksum_exact_p<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    check(a, b)?;
    let n = a.len();
    let total = n + b.len();
    if total > ENUMERATION_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "exact enumeration limited to {ENUMERATION_LIMIT} observations, got {total}"
        )));
    }
    let (ranks, _) = doubled_midranks(a, b);
    let centre = (n * (total + 1)) as i64;
    let observed: i64 = ranks[..n].iter().sum::<u64>() as i64;
    let obs_dev = (observed - centre).abs();
    let (mut extreme, mut count) = (0u64, 0u64);
    for mask in 0u32..(1u32 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        count += 1;
        let w: u64 = (0..total).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (w as i64 - centre).abs() >= obs_dev {
            extreme += 1;
        }
    }
    Ok(T::from_u64(extreme).unwrap() / T::from_u64(count).unwrap())
}

/// Normal approximation with tie-corrected variance and continuity correction.
pub fn ranksum_normal_p<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    check(a, b)?;
    let (u, _) = u_statistic(a, b);
    Ok(normal_p(u, a.len(), b.len(), &doubled_midranks(a, b).1))
}

fn u_statistic<T: Real>(a: &[T], b: &[T]) -> (T, Vec<u64>) {
    let (ranks, ties) = doubled_midranks(a, b);
    let n = a.len() as u64;
    let doubled_sum: u64 = ranks[..a.len()].iter().sum();
    // U = R - n(n+1)/2, computed in halves
    let doubled_u = doubled_sum - n * (n + 1);
    (T::from_u64(doubled_u).unwrap() / T::lit(2.0), ties)
}

fn normal_p<T: Real>(u: T, n: usize, m: usize, ties: &[u64]) -> T {
    let (nf, mf) = (T::from_count(n), T::from_count(m));
    let big_n = nf + mf;
    let tie_term: u64 = ties.iter().map(|&t| t * t * t - t).sum();
    let tie_term = T::from_u64(tie_term).unwrap();
    let var = nf * mf / T::lit(12.0)
        * ((big_n + T::one()) - tie_term / (big_n * (big_n - T::one())));
    if var <= T::zero() {
        return T::one();
    }
    let dev = ((u - nf * mf / T::lit(2.0)).abs() - T::lit(0.5)).max(T::zero());
    let p = T::lit(2.0) * normal_sf(dev / var.sqrt());
    p.min(T::one())
}

/// Median of all pairwise differences `a_i − b_j`.
pub fn hodges_lehmann<T: Real>(a: &[T], b: &[T]) -> T {
    let mut diffs: Vec<T> = a.iter().flat_map(|&x| b.iter().map(move |&y| x - y)).collect();
    diffs.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    let k = diffs.len();
    if k % 2 == 1 {
        diffs[k / 2]
    } else {
        (diffs[k / 2 - 1] + diffs[k / 2]) / T::lit(2.0)
    }
}

/// Two-sided Wilcoxon rank-sum (Mann–Whitney) test of `a` against `b`.
///
/// The statistic is `U` for `a`; the effect is the Hodges–Lehmann shift of `a`
/// relative to `b`. Samples with at most [`EXACT_MAX_N`] observations in total
/// use the exact null distribution.
pub fn wilcoxon_ranksum<T: Real>(a: &[T], b: &[T]) -> Result<StatResult<T>> {
    check(a, b)?;
    let (u, ties) = u_statistic(a, b);
    let (p_value, method) = if a.len() + b.len() <= EXACT_MAX_N {
        (ranksum_exact_p(a, b)?, Method::RankSumExact)
    } else {
        (normal_p(u, a.len(), b.len(), &ties), Method::RankSumNormal)
    };
    Ok(StatResult {
        statistic: u,
        p_value,
        effect: hodges_lehmann(a, b),
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_exact() {
        let r = wilcoxon_ranksum::<f64>(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.method, Method::RankSumExact);
        assert!((r.p_value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.effect, -2.0);
    }

    #[test]
    fn identical_samples() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let r = wilcoxon_ranksum(&a, &a).unwrap();
        assert_eq!(r.effect, 0.0);
        assert_eq!(r.p_value, 1.0);
        let big: Vec<f64> = (0..40).map(|i| (i % 7) as f64).collect();
        let r = wilcoxon_ranksum(&big, &big).unwrap();
        assert_eq!(r.method, Method::RankSumNormal);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn all_tied_normal_path() {
        let a = vec![1.0; 10];
        assert_eq!(ranksum_normal_p(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn midranks_with_ties() {
        let (r, t) = doubled_midranks(&[1.0, 2.0, 2.0], &[3.0, 2.0]);
        assert_eq!(r, vec![2, 6, 6, 10, 6]);
        assert_eq!(t, vec![1, 3, 1]);
    }

    #[test]
    fn empty_and_nan_rejected() {
        assert!(wilcoxon_ranksum::<f64>(&[], &[1.0]).is_err());
        assert!(wilcoxon_ranksum(&[f64::NAN], &[1.0]).is_err());
        let big = vec![0.0; 30];
        assert!(ranksum_exact_p(&big, &big).is_err());
    }

    #[test]
    fn hodges_lehmann_even_and_odd() {
        assert_eq!(hodges_lehmann(&[10.0], &[1.0, 2.0, 3.0]), 8.0);
        assert_eq!(hodges_lehmann(&[10.0, 11.0], &[1.0, 2.0]), 9.0);
    }
}
