//! Joint input distributions `μ(x, y)` over finite two-party domains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qkernel::linalg::neumaier_sum;

const SUM_TOL: f64 = 1e-12;

/// Distribution over `0..x_size × 0..y_size`, stored row-major (`x * y_size + y`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution {
    x_size: u64,
    y_size: u64,
    probs: Vec<f64>,
}

impl InputDistribution {
    pub fn new(x_size: u64, y_size: u64, probs: Vec<f64>) -> Result<Self> {
        let d = Self {
            x_size,
            y_size,
            probs,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_size == 0 || self.y_size == 0 {
            return Err(Error::InvalidDistribution("empty input domain".into()));
        }
        let n = (self.x_size * self.y_size) as usize;
        if self.probs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.probs.len(),
            });
        }
        if let Some(p) = self.probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("probability {p}")));
        }
        let total = neumaier_sum(self.probs.iter().copied());
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(())
    }

    pub fn uniform(x_size: u64, y_size: u64) -> Self {
        let n = (x_size * y_size) as usize;
        Self {
            x_size,
            y_size,
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Uniform on `x_bits + y_bits` bits.
    pub fn uniform_bits(x_bits: usize, y_bits: usize) -> Self {
        Self::uniform(1 << x_bits, 1 << y_bits)
    }

    pub fn point(x_size: u64, y_size: u64, x: u64, y: u64) -> Result<Self> {
        if x >= x_size || y >= y_size {
            return Err(Error::OutOfRange(format!("({x}, {y})")));
        }
        let mut probs = vec![0.0; (x_size * y_size) as usize];
        probs[(x * y_size + y) as usize] = 1.0;
        Ok(Self {
            x_size,
            y_size,
            probs,
        })
    }

    pub fn product(px: &[f64], py: &[f64]) -> Result<Self> {
        let probs = px
            .iter()
            .flat_map(|a| py.iter().map(move |b| a * b))
            .collect();
        Self::new(px.len() as u64, py.len() as u64, probs)
    }

    /// `k`-fold tensor power: coordinate 0 in the most significant digit.
    pub fn tensor_power(&self, k: usize) -> Result<Self> {
        let xs = self.x_size.checked_pow(k as u32);
        let ys = self.y_size.checked_pow(k as u32);
        let (xs, ys) = match (xs, ys) {
            (Some(a), Some(b)) if a.saturating_mul(b) <= 1 << 24 => (a, b),
            _ => return Err(Error::CapExceeded(format!("{k}-fold input power"))),
        };
        let mut probs = vec![0.0; (xs * ys) as usize];
        for x in 0..xs {
            for y in 0..ys {
                let (mut xr, mut yr, mut p) = (x, y, 1.0);
                for _ in 0..k {
                    p *= self.prob(xr % self.x_size, yr % self.y_size);
                    xr /= self.x_size;
                    yr /= self.y_size;
                }
                probs[(x * ys + y) as usize] = p;
            }
        }
        Ok(Self {
            x_size: xs,
            y_size: ys,
            probs,
        })
    }

    pub fn x_size(&self) -> u64 {
        self.x_size
    }

    pub fn y_size(&self) -> u64 {
        self.y_size
    }

    pub fn prob(&self, x: u64, y: u64) -> f64 {
        self.probs[(x * self.y_size + y) as usize]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Support points `(x, y, μ(x, y))` in row-major order.
    pub fn support(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p > 0.0)
            .map(|(i, &p)| (i as u64 / self.y_size, i as u64 % self.y_size, p))
    }

    pub fn x_marginal(&self) -> Vec<f64> {
        (0..self.x_size)
            .map(|x| neumaier_sum((0..self.y_size).map(|y| self.prob(x, y))))
            .collect()
    }

    pub fn y_marginal(&self) -> Vec<f64> {
        (0..self.y_size)
            .map(|y| neumaier_sum((0..self.x_size).map(|x| self.prob(x, y))))
            .collect()
    }

    /// Largest deviation from the product of the marginals.
    pub fn product_defect(&self) -> f64 {
        let px = self.x_marginal();
        let py = self.y_marginal();
        let mut worst = 0.0f64;
        for x in 0..self.x_size {
            for y in 0..self.y_size {
                worst = worst.max((self.prob(x, y) - px[x as usize] * py[y as usize]).abs());
            }
        }
        worst
    }

    pub fn is_product(&self, tol: f64) -> bool {
        self.product_defect() <= tol
    }

    pub fn require_product(&self, tol: f64) -> Result<()> {
        let d = self.product_defect();
        if d > tol {
            return Err(Error::NotProduct(d));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_product() {
        let u = InputDistribution::uniform_bits(2, 1);
        assert!(u.is_product(1e-12));
        assert_eq!(u.support().count(), 8);
    }

    #[test]
    fn correlated_is_not_product() {
        let d = InputDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(!d.is_product(1e-12));
        assert!(matches!(
            d.require_product(1e-12),
            Err(Error::NotProduct(_))
        ));
    }

    #[test]
    fn tensor_power_of_uniform_bit() {
        let u = InputDistribution::uniform(2, 2).tensor_power(3).unwrap();
        assert_eq!(u.x_size(), 8);
        assert!(u.probs().iter().all(|&p| (p - 1.0 / 64.0).abs() < 1e-15));
    }

    #[test]
    fn tensor_power_orders_coordinates() {
        let d = InputDistribution::product(&[0.25, 0.75], &[1.0]).unwrap();
        let d2 = d.tensor_power(2).unwrap();
        // x = 0b01: coordinate 0 (most significant) is 0, coordinate 1 is 1
        assert!((d2.prob(0b01, 0) - 0.25 * 0.75).abs() < 1e-15);
        assert!((d2.prob(0b11, 0) - 0.75 * 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(InputDistribution::new(2, 2, vec![0.5, 0.5]).is_err());
        assert!(InputDistribution::new(1, 2, vec![0.7, 0.7]).is_err());
    }
}
