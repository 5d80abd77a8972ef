//! Uniform-grid densities and their quadrature.

use crate::error::{Error, Result};
use crate::num::{pairwise_sum_fn, phi, trapezoid};
use serde::{Deserialize, Serialize};

/// Density tabulated on a uniform grid.
///
/// Values outside the grid are treated as exactly zero; constructors place
/// compact supports so that their endpoints land on grid points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDensity {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl GridDensity {
    /// Validating constructor: nonnegativity (to -1e-12) and unit mass.
    pub fn new(x0: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        let g = GridDensity { x0, dx, values };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0) || self.values.len() < 2 {
            return Err(Error::ValidationError(
                "grid needs dx > 0 and at least 2 points".into(),
            ));
        }
        let min = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-12 {
            return Err(Error::ValidationError(format!(
                "density has negative values down to {min:.3e}"
            )));
        }
        let mass = self.integral();
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::ValidationError(format!(
                "density mass {mass:.12} is not 1 within 1e-8"
            )));
        }
        Ok(())
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn x_at(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x_at(self.values.len() - 1)
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.dx)
    }

    /// Raw moment E X^k by trapezoid.
    pub fn moment(&self, k: u32) -> f64 {
        let dx = self.dx;
        let s = pairwise_sum_fn(self.values.len(), &|i| {
            let x = self.x_at(i);
            let w = if i == 0 || i == self.values.len() - 1 {
                0.5
            } else {
                1.0
            };
            w * x.powi(k as i32) * self.values[i]
        });
        s * dx
    }

    /// E |X|^3.
    pub fn abs_moment3(&self) -> f64 {
        let s = pairwise_sum_fn(self.values.len(), &|i| {
            let x = self.x_at(i);
            let w = if i == 0 || i == self.values.len() - 1 {
                0.5
            } else {
                1.0
            };
            w * x.abs().powi(3) * self.values[i]
        });
        s * self.dx
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moment(2) - m * m
    }

    pub fn max_density(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Check the declared mean-0/variance-1 standardization.
    pub fn check_standardized(&self) -> Result<()> {
        let m = self.mean();
        let v = self.variance();
        if m.abs() > 1e-6 || (v - 1.0).abs() > 1e-6 {
            return Err(Error::RejectsNonStandardized(format!(
                "mean = {m:.3e}, variance = {v:.9}"
            )));
        }
        Ok(())
    }

    /// Density of lambda*X on the correspondingly scaled grid (exact).
    pub fn rescaled(&self, lambda: f64) -> GridDensity {
        GridDensity {
            x0: self.x0 * lambda,
            dx: self.dx * lambda,
            values: self.values.iter().map(|v| v / lambda).collect(),
        }
    }

    /// p(x_i)/phi(x_i) - 1 at a grid point; None where phi underflows.
    pub fn ratio_minus_1(&self, i: usize) -> Option<f64> {
        let x = self.x_at(i);
        if x.abs() > 37.0 {
            return None;
        }
        Some(self.values[i] / phi(x) - 1.0)
    }
}
