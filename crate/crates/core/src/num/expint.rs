//! Generalized exponential integrals E_m(i x) on the imaginary axis.
//!
//! These evaluate the oscillatory tail integrals
//!   integral_T^inf e^{i w t} / t^m dt = T^{1-m} E_m(-i w T),
//! which the characteristic-function inversion uses to correct truncation
//! for densities whose cf decays only polynomially.

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.5772156649015328606065120900824024;

/// E_m(i x) for real x. For x = 0 requires m >= 2 (E_m(0) = 1/(m-1)).
pub fn e_m_ix(m: usize, x: f64) -> Complex64 {
    assert!(m >= 1);
    if x == 0.0 {
        assert!(m >= 2, "E_1(0) diverges");
        return Complex64::new(1.0 / (m as f64 - 1.0), 0.0);
    }
    if x < 0.0 {
        return e_m_ix(m, -x).conj();
    }
    let z = Complex64::new(0.0, x);
    if x >= 50.0 {
        return e_m_asymptotic(m, z);
    }
    // E_1 first, then recur upward.
    let mut e = if x < 2.0 { e1_series(z) } else { e1_lentz(z) };
    let emz = (-z).exp();
    for k in 1..m {
        e = (emz - z * e) / k as f64;
    }
    e
}

/// Power series: E_1(z) = -gamma - ln z + sum_{k>=1} (-1)^{k+1} z^k/(k k!).
fn e1_series(z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..=60 {
        term *= -z / k as f64;
        let add = -term / k as f64;
        sum += add;
        if add.norm() < 1e-18 * (1.0 + sum.norm()) {
            break;
        }
    }
    -EULER_GAMMA - z.ln() + sum
}

/// Modified Lentz continued fraction, reliable for |z| >= 2 off the
/// negative real axis.
fn e1_lentz(z: Complex64) -> Complex64 {
    let tiny = Complex64::new(1e-300, 0.0);
    let mut b = z + 1.0;
    let mut c = Complex64::new(1e300, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=400 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = a * d + b;
        if d.norm() < 1e-300 {
            d = tiny;
        }
        c = b + a / c;
        if c.norm() < 1e-300 {
            c = tiny;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z).exp() * h
}

/// Asymptotic series E_m(z) = e^{-z}/z (1 - m/z + m(m+1)/z^2 - ...),
/// truncated at the smallest term.
fn e_m_asymptotic(m: usize, z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut prev_norm = f64::INFINITY;
    for k in 0..40 {
        term *= -((m + k) as f64) / z;
        if term.norm() >= prev_norm {
            break;
        }
        prev_norm = term.norm();
        sum += term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    (-z).exp() / z * sum
}
