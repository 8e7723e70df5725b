//! Radial fields on a grid and their spectral counterparts.

use alloc::sync::Arc;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::RadialGrid;
#[allow(unused_imports)]
use num_traits::Float;

/// Complex samples `u(r_k)` of a radial function.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

/// Complex samples `û(ρ_m)` of the unitary radial Fourier transform.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<RadialGrid>,
    coeffs: Vec<Complex64>,
}

fn check_samples(grid: &RadialGrid, samples: &[Complex64]) -> Result<()> {
    if samples.len() != grid.len() {
        return Err(invalid("samples", "sample count does not match the grid"));
    }
    if samples.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(invalid("samples", "non-finite sample"));
    }
    Ok(())
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        check_samples(&grid, &values)?;
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
        RadialField { grid, values }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.radii().iter().map(|&r| f(r)).collect();
        RadialField { grid, values }
    }

    pub fn from_real_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn forward(&self) -> SpectralField {
        SpectralField { grid: self.grid.clone(), coeffs: self.grid.forward(&self.values) }
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values =
            self.grid.radii().iter().zip(&self.values).map(|(&r, &v)| f(r, v)).collect();
        RadialField { grid: self.grid.clone(), values }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|_, v| v * c)
    }

    pub fn same_grid(&self, other: &RadialField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn add(&self, other: &RadialField) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(RadialField { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &RadialField) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(RadialField { grid: self.grid.clone(), values })
    }

    /// Band-limited values at arbitrary radii (zero beyond `r_max`).
    pub fn resample(&self, radii: &[f64]) -> Vec<Complex64> {
        let coeffs = self.grid.forward(&self.values);
        radii.iter().map(|&r| self.grid.interpolate(&coeffs, r)).collect()
    }

    /// The mass-preserving rescaling `λ^{d/2} f(λ x)` sampled on the same grid.
    pub fn rescale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid("lambda", "must be positive and finite"));
        }
        let amp = lambda.powf(self.grid.dim() as f64 / 2.0);
        let radii: Vec<f64> = self.grid.radii().iter().map(|r| r * lambda).collect();
        let values = self.resample(&radii).into_iter().map(|v| v * amp).collect();
        Ok(RadialField { grid: self.grid.clone(), values })
    }
}

impl SpectralField {
    pub fn new(grid: Arc<RadialGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        check_samples(&grid, &coeffs)?;
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn inverse(&self) -> RadialField {
        RadialField { grid: self.grid.clone(), values: self.grid.inverse(&self.coeffs) }
    }

    /// Pointwise Fourier multiplier `m(ρ) û(ρ)`.
    pub fn multiply(&self, symbol: impl Fn(f64) -> Complex64) -> Self {
        let coeffs =
            self.grid.freqs().iter().zip(&self.coeffs).map(|(&rho, &c)| symbol(rho) * c).collect();
        SpectralField { grid: self.grid.clone(), coeffs }
    }

    pub fn multiply_real(&self, symbol: impl Fn(f64) -> f64) -> Self {
        self.multiply(|rho| Complex64::new(symbol(rho), 0.0))
    }

    /// `∫ |û|² dξ` over the band.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().zip(self.grid.spectral_weights()).map(|(c, w)| w * c.norm_sqr()).sum()
    }

    /// Fraction of `∫|û|²` carried by `ρ > ρ_max / 2`.
    pub fn tail_fraction(&self) -> f64 {
        let cut = 0.5 * self.grid.rho_max();
        let total = self.norm_sq();
        if total == 0.0 {
            return 0.0;
        }
        let tail: f64 = self
            .coeffs
            .iter()
            .zip(self.grid.spectral_weights())
            .zip(self.grid.freqs())
            .filter(|(_, &rho)| rho > cut)
            .map(|((c, w), _)| w * c.norm_sqr())
            .sum();
        tail / total
    }
}

/// Forward radial Fourier transform.
pub fn transform_forward(f: &RadialField) -> SpectralField {
    f.forward()
}

/// Inverse radial Fourier transform.
pub fn transform_inverse(f: &SpectralField) -> RadialField {
    f.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::mass;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(4, 20.0, 256).unwrap())
    }

    #[test]
    fn forward_of_zero_is_zero() {
        let f = RadialField::zeros(grid());
        assert!(f.forward().coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn gaussian_transforms_to_gaussian() {
        let g = grid();
        let f = RadialField::from_real_fn(g.clone(), |r| (-r * r).exp());
        let spec = f.forward();
        // unitary transform of e^{-|x|²} in d = 4 is e^{-ρ²/4} / 4
        for (&rho, c) in g.freqs().iter().zip(spec.coeffs()) {
            assert!((c.re - 0.25 * (-rho * rho / 4.0).exp()).abs() < 1e-13);
            assert!(c.im.abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_mismatched_and_non_finite_samples() {
        let g = grid();
        assert!(RadialField::new(g.clone(), alloc::vec![Complex64::new(0.0, 0.0); 3]).is_err());
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); g.len()];
        v[5] = Complex64::new(f64::NAN, 0.0);
        assert!(RadialField::new(g, v).is_err());
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = RadialField::zeros(grid());
        let b = RadialField::zeros(Arc::new(RadialGrid::new(4, 10.0, 256).unwrap()));
        assert_eq!(a.sub(&b).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn rescale_preserves_mass() {
        let f = RadialField::from_real_fn(grid(), |r| (1.0 + r * r) * (-r * r / 2.0).exp());
        let m = mass(&f);
        for lambda in [0.5, 2.0] {
            let g = f.rescale(lambda).unwrap();
            assert!((mass(&g) - m).abs() < 1e-6 * m);
        }
    }
}
