//! Special functions behind the p-values: log-gamma, regularized incomplete
//! gamma and beta, the normal distribution and its quantile.

use crate::num::Real;

const MAX_ITER: usize = 500;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection
        let pi = T::lit(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(*c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + acc.ln()
}

fn tiny<T: Real>() -> T {
    T::min_positive_value() / T::epsilon()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x < a + T::one() {
        gamma_series(a, x)
    } else {
        T::one() - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::one();
    }
    if x < a + T::one() {
        T::one() - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn gamma_series<T: Real>(a: T, x: T) -> T {
    let mut ap = a;
    let mut del = T::one() / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap = ap + T::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * T::tolerance() {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cf<T: Real>(a: T, x: T) -> T {
    let two = T::lit(2.0);
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny::<T>();
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let i = T::from_count(i);
        let an = -i * (i - a);
        b = b + two;
        d = an * d + b;
        if d.abs() < tiny() {
            d = tiny();
        }
        c = b + an / c;
        if c.abs() < tiny() {
            c = tiny();
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() < T::tolerance() {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x >= T::zero() {
        gamma_q(half, x * x)
    } else {
        T::one() + gamma_p(half, x * x)
    }
}

/// Upper tail `P(Z > z)` of the standard normal.
pub fn normal_sf<T: Real>(z: T) -> T {
    T::lit(0.5) * erfc(z / T::lit(std::f64::consts::SQRT_2))
}

pub fn normal_cdf<T: Real>(z: T) -> T {
    normal_sf(-z)
}

/// Upper tail of the chi-squared distribution with `df` degrees of freedom.
pub fn chi2_sf<T: Real>(x: T, df: T) -> T {
    let half = T::lit(0.5);
    gamma_q(df * half, x * half)
}

/// Standard normal quantile, `p ∈ (0, 1)`.
pub fn normal_quantile<T: Real>(p: T) -> T {
    // Acklam's rational approximation followed by Halley refinement.
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let pf = p.to_f64().expect("finite probability");
    let low = 0.02425;
    let x0 = if pf < low {
        let q = (-2.0 * pf.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if pf <= 1.0 - low {
        let q = pf - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - pf).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = T::lit(x0);
    let sqrt_2pi = T::lit((2.0 * std::f64::consts::PI).sqrt());
    let half = T::lit(0.5);
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * sqrt_2pi * (x * x * half).exp();
        x = x - u / (T::one() + x * u * half);
    }
    x
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc<T: Real>(a: T, b: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x >= T::one() {
        return T::one();
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (T::one() - x).ln();
    let front = ln_front.exp();
    if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        T::one() - front * beta_cf(b, a, T::one() - x) / b
    }
}

fn beta_cf<T: Real>(a: T, b: T, x: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny() {
        d = tiny();
    }
    d = one / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = T::from_count(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny() {
            d = tiny();
        }
        c = one + aa / c;
        if c.abs() < tiny() {
            c = tiny();
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny() {
            d = tiny();
        }
        c = one + aa / c;
        if c.abs() < tiny() {
            c = tiny();
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() < T::tolerance() {
            break;
        }
    }
    h
}

/// Two-sided p-value of Student's t statistic with `df` degrees of freedom.
pub fn t_two_sided_p<T: Real>(t: T, df: T) -> T {
    if !t.is_finite() {
        return T::zero();
    }
    let half = T::lit(0.5);
    beta_inc(df * half, half, df / (df + t * t))
}
