//! Truncated power-series arithmetic for exact cumulant extraction.
//!
//! Coefficients are stored for t^0..t^order inclusive. Only the handful of
//! operations the cumulant path needs are provided.

/// Taylor polynomial around t = 0, truncated at a fixed order.
#[derive(Debug, Clone)]
pub struct TaylorPoly {
    pub coeffs: Vec<f64>,
}

impl TaylorPoly {
    pub fn zero(order: usize) -> Self {
        TaylorPoly {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Series of cos(k t) truncated at `order`.
    pub fn cos_kt(k: f64, order: usize) -> Self {
        let mut p = TaylorPoly::zero(order);
        let mut term = 1.0; // k^j / j!, with sign folded in below
        for j in 0..=order {
            if j % 2 == 0 {
                let sign = if j % 4 == 0 { 1.0 } else { -1.0 };
                p.coeffs[j] = sign * term;
            }
            term *= k / (j as f64 + 1.0);
        }
        p
    }

    /// Series of sin(k t) truncated at `order`.
    pub fn sin_kt(k: f64, order: usize) -> Self {
        let mut p = TaylorPoly::zero(order);
        let mut term = 1.0;
        for j in 0..=order {
            if j % 2 == 1 {
                let sign = if j % 4 == 1 { 1.0 } else { -1.0 };
                p.coeffs[j] = sign * term;
            }
            term *= k / (j as f64 + 1.0);
        }
        p
    }

    /// Series of sinh(z)/z with z = k t, truncated at `order`.
    pub fn sinh_kt_over_kt(k: f64, order: usize) -> Self {
        let mut p = TaylorPoly::zero(order);
        // sinh(z)/z = sum z^{2m} / (2m+1)!
        let mut kpow = 1.0;
        let mut fact = 1.0; // (2m+1)!
        let mut m = 0usize;
        loop {
            let j = 2 * m;
            if j > order {
                break;
            }
            p.coeffs[j] = kpow / fact;
            kpow *= k * k;
            fact *= (2 * m + 2) as f64 * (2 * m + 3) as f64;
            m += 1;
        }
        p
    }

    pub fn add_scaled(&mut self, other: &TaylorPoly, s: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn mul(&self, other: &TaylorPoly) -> TaylorPoly {
        let order = self.order();
        let mut out = TaylorPoly::zero(order);
        for i in 0..=order {
            if self.coeffs[i] == 0.0 {
                continue;
            }
            for j in 0..=(order - i) {
                out.coeffs[i + j] += self.coeffs[i] * other.coeffs[j];
            }
        }
        out
    }

    /// ln(1 + u) for a series u with u(0) = 0.
    ///
    /// Returns None if |u(0)| is not negligibly small.
    pub fn ln_one_plus(u: &TaylorPoly) -> Option<TaylorPoly> {
        if u.coeffs[0].abs() > 1e-12 {
            return None;
        }
        let order = u.order();
        let mut acc = TaylorPoly::zero(order);
        let mut upow = u.clone();
        upow.coeffs[0] = 0.0;
        let base = upow.clone();
        let mut m = 1usize;
        loop {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            acc.add_scaled(&upow, sign / m as f64);
            m += 1;
            // u has valuation >= 1, so u^m vanishes beyond order
            if m > order {
                break;
            }
            upow = upow.mul(&base);
        }
        Some(acc)
    }

    /// ln of a series with constant term 1 + u0 close to 1? Not needed; the
    /// constant term must be exactly handled by the caller.
    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin4_series() {
        // sin^4 t = t^4 - (2/3) t^6 + ...
        let order = 8;
        let s = TaylorPoly::sin_kt(1.0, order);
        let s2 = s.mul(&s);
        let s4 = s2.mul(&s2);
        assert!((s4.coeff(4) - 1.0).abs() < 1e-14);
        assert!((s4.coeff(6) + 2.0 / 3.0).abs() < 1e-14);
        assert!(s4.coeff(3).abs() < 1e-14);
        assert!(s4.coeff(5).abs() < 1e-14);
    }

    #[test]
    fn log_of_sinh_ratio() {
        // ln(sinh z / z) = z^2/6 - z^4/180 + z^6/2835 - ...
        let order = 8;
        let mut u = TaylorPoly::sinh_kt_over_kt(1.0, order);
        u.coeffs[0] -= 1.0;
        let l = TaylorPoly::ln_one_plus(&u).unwrap();
        assert!((l.coeff(2) - 1.0 / 6.0).abs() < 1e-15);
        assert!((l.coeff(4) + 1.0 / 180.0).abs() < 1e-15);
        assert!((l.coeff(6) - 1.0 / 2835.0).abs() < 1e-15);
    }
}
