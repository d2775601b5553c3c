//! Binomial probabilities evaluated in log space.
//!
//! Uses Loader's saddle-point form: the log-probability is assembled from
//! the Stirling remainders of `N!`, `n!`, `(N-n)!` and two deviance terms,
//! so no factorial or power is ever formed directly. Terms stay accurate to
//! a few ulps in relative terms far past `N = 10^6`.

const LN_2PI: f64 = 1.837_877_066_409_345_5;

// Bernoulli-series coefficients of the Stirling remainder.
const S0: f64 = 1.0 / 12.0;
const S1: f64 = 1.0 / 360.0;
const S2: f64 = 1.0 / 1260.0;
const S3: f64 = 1.0 / 1680.0;
const S4: f64 = 1.0 / 1188.0;

/// Stirling remainder `ln n! - ((n + 1/2) ln n - n + ln √(2π))` for an
/// integer `n >= 1`.
fn stirling_remainder(n: u64) -> f64 {
    if n <= 30 {
        let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        let x = n as f64;
        return ln_fact - ((x + 0.5) * x.ln() - x + 0.5 * LN_2PI);
    }
    let x = n as f64;
    let xx = x * x;
    (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
}

/// Deviance term `x ln(x/m) + m - x`, accurate when `x ≈ m`.
fn deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let prev = s;
            s += ej / (2 * j + 1) as f64;
            if s == prev {
                return s;
            }
        }
        return s;
    }
    x * (x / m).ln() + m - x
}

/// `ln [C(N,n) q^n (1-q)^(N-n)]`; `-∞` for impossible outcomes.
pub fn ln_binomial_pmf(copies: u64, n: u64, q: f64) -> f64 {
    if n > copies {
        return f64::NEG_INFINITY;
    }
    let p = 1.0 - q;
    if q == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 0.0 {
        return if n == copies { 0.0 } else { f64::NEG_INFINITY };
    }
    let big_n = copies as f64;
    if n == 0 {
        return big_n * (-q).ln_1p();
    }
    if n == copies {
        return big_n * q.ln();
    }
    let k = n as f64;
    let lc = stirling_remainder(copies)
        - stirling_remainder(n)
        - stirling_remainder(copies - n)
        - deviance(k, big_n * q)
        - deviance(big_n - k, big_n * p);
    let lf = LN_2PI + k.ln() + (-k / big_n).ln_1p();
    lc - 0.5 * lf
}

/// `C(N,n) q^n (1-q)^(N-n)`.
pub fn binomial_pmf(copies: u64, n: u64, q: f64) -> f64 {
    ln_binomial_pmf(copies, n, q).exp()
}

/// The most probable occurrence count (the smaller one on ties).
pub fn binomial_mode(copies: u64, q: f64) -> u64 {
    let m = ((copies as f64 + 1.0) * q).floor() as u64;
    m.min(copies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    fn exact_small(copies: u64, n: u64, q: f64) -> f64 {
        // multiplicative C(N,n) exact in f64 for N <= 50
        let mut c = 1.0f64;
        for i in 0..n {
            c = c * (copies - i) as f64 / (i + 1) as f64;
        }
        c * q.powi(n as i32) * (1.0 - q).powi((copies - n) as i32)
    }

    #[test]
    fn matches_direct_products_for_small_n() {
        for copies in 1..=40u64 {
            for &q in &[0.01, 0.2, 1.0 / 3.0, 0.5, 0.77, 0.999] {
                for n in 0..=copies {
                    let a = binomial_pmf(copies, n, q);
                    let b = exact_small(copies, n, q);
                    assert!(
                        (a - b).abs() <= 1e-13 * b.max(1e-300) + 1e-300,
                        "N={copies} n={n} q={q}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn known_values() {
        assert!((binomial_pmf(4, 2, 1.0 / 3.0) - 8.0 / 27.0).abs() < 1e-15);
        assert!((binomial_pmf(2, 1, 0.5) - 0.5).abs() < 1e-15);
        assert_eq!(binomial_pmf(5, 0, 0.0), 1.0);
        assert_eq!(binomial_pmf(5, 3, 0.0), 0.0);
        assert_eq!(binomial_pmf(5, 5, 1.0), 1.0);
        assert_eq!(binomial_pmf(5, 6, 0.5), 0.0);
    }

    #[test]
    fn agrees_with_log_gamma_at_large_n() {
        let copies = 1_000_000u64;
        let q: f64 = 0.3;
        for n in [0u64, 1, 1000, 299_000, 300_000, 300_500, 999_999, 1_000_000] {
            let via_gamma = ln_gamma(copies as f64 + 1.0)
                - ln_gamma(n as f64 + 1.0)
                - ln_gamma((copies - n) as f64 + 1.0)
                + n as f64 * q.ln()
                + (copies - n) as f64 * (1.0 - q).ln();
            let ours = ln_binomial_pmf(copies, n, q);
            // ln_gamma loses ~1e-9 absolute at these magnitudes
            assert!(
                (ours - via_gamma).abs() < 1e-6 * via_gamma.abs().max(1.0),
                "n={n}: {ours} vs {via_gamma}"
            );
        }
    }

    #[test]
    fn mode_is_argmax() {
        for copies in [1u64, 7, 50, 101] {
            for &q in &[0.0, 0.1, 0.5, 0.6, 1.0] {
                let m = binomial_mode(copies, q);
                let best = (0..=copies)
                    .map(|n| binomial_pmf(copies, n, q))
                    .fold(0.0, f64::max);
                assert!((binomial_pmf(copies, m, q) - best).abs() < 1e-15);
            }
        }
    }
}
