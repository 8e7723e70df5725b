//! Integer-order Bessel functions of the first kind and their positive zeros.
//!
//! Small and moderate arguments use Miller's backward recurrence normalised by
//! `J_0 + 2 Σ J_2k = 1`. Large arguments use the Hankel asymptotic expansion
//! for `J_0`, `J_1` followed by upward recurrence, which is stable for `n < x`.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
#[allow(unused_imports)]
use num_traits::Float;

const ASYMPTOTIC_THRESHOLD: f64 = 30.0;

/// `J_n(x)` for integer `n ≥ 0` and real `x` (odd/even symmetry applied for `x < 0`).
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x > ASYMPTOTIC_THRESHOLD && (n as f64) < 0.5 * x {
        upward(n, x)
    } else {
        miller(n, x)
    }
}

/// `J_n(x) / x^n`, finite at the origin where it equals `1 / (2^n n!)`.
pub fn bessel_j_scaled(n: u32, x: f64) -> f64 {
    if x.abs() < 1e-6 {
        let mut lead = 1.0;
        for k in 1..=n {
            lead /= 2.0 * k as f64;
        }
        // next term of the series: -x²/(4(n+1))
        lead * (1.0 - x * x / (4.0 * (n as f64 + 1.0)))
    } else {
        bessel_j(n, x) / x.powi(n as i32)
    }
}

fn upward(n: u32, x: f64) -> f64 {
    let (j0, j1) = (hankel_asymptotic(0, x), hankel_asymptotic(1, x));
    if n == 0 {
        return j0;
    }
    let (mut prev, mut cur) = (j0, j1);
    for k in 1..n {
        let next = 2.0 * k as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn hankel_asymptotic(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu as f64) * (nu as f64);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60u32 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let phase = (nu as f64) * FRAC_PI_2 + FRAC_PI_4;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x.ceil());
    let mut m = (top + 20.0 + (40.0 * top).sqrt()) as u32;
    if m % 2 == 1 {
        m += 1;
    }
    let mut next = 0.0f64;
    let mut cur = 1e-300f64;
    let mut sum = 0.0;
    let mut wanted = 0.0;
    for k in (1..=m).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k-1}, `next` holds J_k
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            sum *= 1e-250;
            wanted *= 1e-250;
        }
        let order = k - 1;
        if order == n {
            wanted = cur;
        }
        if order > 0 && order % 2 == 0 {
            sum += 2.0 * cur;
        }
    }
    sum += cur;
    wanted / sum
}

/// Derivative `J_n'(x) = (n/x) J_n(x) - J_{n+1}(x)`.
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

/// First `count` positive zeros of `J_n`, strictly increasing.
pub fn bessel_zeros(n: u32, count: usize) -> alloc::vec::Vec<f64> {
    let mut zeros: alloc::vec::Vec<f64> = alloc::vec::Vec::with_capacity(count);
    let nu = n as f64;
    let mut guess = if n == 0 {
        2.404_825_557_695_773
    } else {
        nu + 1.855_757_1 * nu.cbrt() + 1.033_150 / nu.cbrt() - 0.003_97 / nu
    };
    for k in 0..count {
        if k > 0 {
            let prev = zeros[k - 1];
            guess = if k == 1 {
                mcmahon(n, k + 1).max(prev + 0.5 * PI)
            } else {
                // consecutive zeros approach a spacing of π from above
                let gap = prev - zeros[k - 2];
                prev + gap.min(PI + 1.0).max(PI * 0.9)
            };
        }
        let root = newton(n, guess);
        zeros.push(root);
    }
    zeros
}

fn mcmahon(n: u32, k: usize) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let beta = (k as f64 + 0.5 * n as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3))
}

fn newton(n: u32, mut x: f64) -> f64 {
    for _ in 0..100 {
        let f = bessel_j(n, x);
        let fp = bessel_j_prime(n, x);
        let mut step = f / fp;
        if step.abs() > 1.0 {
            step = step.signum();
        }
        x -= step;
        if step.abs() < 1e-15 * x.max(1.0) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from an independent arbitrary-precision evaluation
    const TABLE: &[(u32, f64, f64)] = &[
        (0, 0.5, 0.938_469_807_240_812_9),
        (0, 10.0, -0.245_935_764_451_348_34),
        (0, 29.9, -0.097_811_150_066_062_446),
        (0, 30.1, -0.074_101_372_324_018_583),
        (0, 250.0, -0.026_053_373_425_204_234),
        (1, 1.0, 0.440_050_585_744_933_52),
        (1, 7.5, 0.135_248_427_579_705_51),
        (1, 31.0, -0.133_024_316_666_314_2),
        (1, 1000.0, 0.004_728_311_907_089_523_9),
        (2, 0.1, 0.001_248_958_658_799_919),
        (3, 45.0, -0.038_531_851_851_078_721),
        (5, 2.0, 0.007_039_629_755_871_685_5),
    ];

    #[test]
    fn matches_reference_table() {
        for &(n, x, want) in TABLE {
            let got = bessel_j(n, x);
            assert!((got - want).abs() < 2e-14, "J_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn zeros_are_roots_and_increasing() {
        for n in 0..6 {
            let z = bessel_zeros(n, 300);
            for w in z.windows(2) {
                assert!(w[1] - w[0] > 2.5 && w[1] - w[0] < 4.0, "n={n} gap {}", w[1] - w[0]);
            }
            for &x in &z {
                assert!(bessel_j(n, x).abs() < 1e-13, "n={n} x={x}");
            }
        }
        assert!((bessel_zeros(1, 1)[0] - 3.831_705_970_207_512).abs() < 1e-13);
        assert!((bessel_zeros(0, 3)[2] - 8.653_727_912_911_013).abs() < 1e-13);
    }

    #[test]
    fn scaled_form_is_continuous_at_origin() {
        for n in 0..4 {
            let a = bessel_j_scaled(n, 0.9e-6);
            let b = bessel_j_scaled(n, 1.1e-6);
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }
}
