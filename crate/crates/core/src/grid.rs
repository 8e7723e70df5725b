//! Radial quadrature grid and the discrete Hankel transform that realises the
//! d-dimensional radial Fourier transform.
//!
//! For a radial `u` on ℝ^d with `ν = d/2 - 1`, the unitary Fourier transform is
//! `û(ρ) = ρ^{-ν} ∫ r^ν u(r) J_ν(ρ r) r dr`, an order-ν Hankel transform of
//! `r^ν u`. The grid samples space at `r_k = j_k R / S` and frequency at
//! `ρ_m = j_m / R`, with `j_k` the zeros of `J_ν` and `S = j_{n+1}`; the
//! symmetric kernel `T_mk = 2 J_ν(j_m j_k / S) / (|J_{ν+1}(j_m)| |J_{ν+1}(j_k)| S)`
//! is orthogonal up to ~1e-11 and maps scaled samples in both directions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::bessel::{bessel_j, bessel_j_scaled, bessel_zeros};
use crate::error::{invalid, Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Smallest node count accepted by [`RadialGrid::new`].
pub const MIN_NODES: usize = 16;
/// Largest supported dimension.
pub const MAX_DIMENSION: u32 = 16;

/// Radial nodes, quadrature weights and transform data for one `(d, r_max, n)`.
#[derive(Debug)]
pub struct RadialGrid {
    dim: u32,
    order: u32,
    r_max: f64,
    radii: Vec<f64>,
    freqs: Vec<f64>,
    weights: Vec<f64>,
    spectral_weights: Vec<f64>,
    // spatial and spectral sample scalings into/out of the symmetric kernel
    space_in: Vec<f64>,
    space_out: Vec<f64>,
    freq_in: Vec<f64>,
    freq_out: Vec<f64>,
    kernel: Vec<f64>,
    // ρ_m^{2ν} 2/(R² J_{ν+1}(j_m)²): Fourier-Bessel series coefficients per mode
    series: Vec<f64>,
    // maps û to ∂_r u at the spatial nodes
    gradient: Vec<f64>,
}

impl RadialGrid {
    /// Builds the grid for even `dim ≥ 2`, truncation radius `r_max` and `n` nodes.
    pub fn new(dim: u32, r_max: f64, n: usize) -> Result<Self> {
        if !(2..=MAX_DIMENSION).contains(&dim) || dim % 2 == 1 {
            return Err(Error::DimensionOutOfRange(dim));
        }
        if !r_max.is_finite() || r_max <= 0.0 {
            return Err(invalid("r_max", "must be finite and positive"));
        }
        if n < MIN_NODES {
            return Err(Error::ResolutionTooLow { n, min: MIN_NODES });
        }
        let order = dim / 2 - 1;
        let zeros = bessel_zeros(order, n + 1);
        let band = zeros[n];
        let nodes = &zeros[..n];
        let j_next: Vec<f64> = nodes.iter().map(|&j| bessel_j(order + 1, j).abs()).collect();
        let radii: Vec<f64> = nodes.iter().map(|&j| j * r_max / band).collect();
        let freqs: Vec<f64> = nodes.iter().map(|&j| j / r_max).collect();
        let bandwidth = band / r_max;
        let sphere = sphere_area(dim);
        let nu = order as i32;

        let weights = (0..n)
            .map(|k| {
                sphere * radii[k].powi(dim as i32 - 2) * 2.0 * r_max * r_max
                    / (band * band * j_next[k] * j_next[k])
            })
            .collect();
        let spectral_weights = (0..n)
            .map(|m| {
                sphere * freqs[m].powi(dim as i32 - 2) * 2.0 / (r_max * r_max * j_next[m] * j_next[m])
            })
            .collect();
        let space_in = (0..n).map(|k| radii[k].powi(nu) * r_max / j_next[k]).collect();
        let space_out = (0..n).map(|k| j_next[k] / (r_max * radii[k].powi(nu))).collect();
        let freq_in = (0..n).map(|m| freqs[m].powi(nu) * bandwidth / j_next[m]).collect();
        let freq_out = (0..n).map(|m| j_next[m] / (bandwidth * freqs[m].powi(nu))).collect();

        let series = (0..n)
            .map(|m| freqs[m].powi(2 * nu) * 2.0 / (r_max * r_max * j_next[m] * j_next[m]))
            .collect();
        let mut kernel = vec![0.0; n * n];
        let mut gradient = vec![0.0; n * n];
        for m in 0..n {
            for k in m..n {
                let arg = nodes[m] * nodes[k] / band;
                let t = 2.0 * bessel_j(order, arg) / (j_next[m] * j_next[k] * band);
                kernel[m * n + k] = t;
                kernel[k * n + m] = t;
                let jp = bessel_j(order + 1, arg);
                // ∂_r [r^{-ν} J_ν(ρ r)] = -ρ r^{-ν} J_{ν+1}(ρ r)
                gradient[k * n + m] = -jp * freqs[m].powi(nu + 1) * 2.0
                    / (radii[k].powi(nu) * r_max * r_max * j_next[m] * j_next[m]);
                gradient[m * n + k] = -jp * freqs[k].powi(nu + 1) * 2.0
                    / (radii[m].powi(nu) * r_max * r_max * j_next[k] * j_next[k]);
            }
        }

        Ok(RadialGrid {
            dim,
            order,
            r_max,
            radii,
            freqs,
            weights,
            spectral_weights,
            space_in,
            space_out,
            freq_in,
            freq_out,
            kernel,
            series,
            gradient,
        })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Hankel order `d/2 - 1`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    /// Weights with `∫_{ℝ^d} F(|x|) dx ≈ Σ_k w_k F(r_k)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights with `∫_{ℝ^d} G(|ξ|) dξ ≈ Σ_m w_m G(ρ_m)`.
    pub fn spectral_weights(&self) -> &[f64] {
        &self.spectral_weights
    }

    /// Largest resolved radial frequency.
    pub fn rho_max(&self) -> f64 {
        *self.freqs.last().expect("grid has nodes")
    }

    /// Identity of the grid: equal keys mean identical nodes and transforms.
    pub fn key(&self) -> GridKey {
        GridKey { dim: self.dim, r_max_bits: self.r_max.to_bits(), n: self.len() }
    }

    pub(crate) fn same_as(&self, other: &RadialGrid) -> bool {
        core::ptr::eq(self, other) || self.key() == other.key()
    }

    /// Forward transform of spatial samples into spectral samples.
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let scaled: Vec<Complex64> =
            values.iter().zip(&self.space_in).map(|(v, s)| v * s).collect();
        let mut out = apply(&self.kernel, &scaled);
        for (o, s) in out.iter_mut().zip(&self.freq_out) {
            *o *= s;
        }
        out
    }

    /// Inverse transform of spectral samples back to the spatial nodes.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let scaled: Vec<Complex64> = coeffs.iter().zip(&self.freq_in).map(|(v, s)| v * s).collect();
        let mut out = apply(&self.kernel, &scaled);
        for (o, s) in out.iter_mut().zip(&self.space_out) {
            *o *= s;
        }
        out
    }

    /// Radial derivative `∂_r u(r_k)` from spectral samples `û`.
    pub fn radial_derivative(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        apply(&self.gradient, coeffs)
    }

    /// Band-limited interpolation `u(r)` from spectral samples; zero for `r ≥ r_max`.
    pub fn interpolate(&self, coeffs: &[Complex64], r: f64) -> Complex64 {
        if r >= self.r_max || r < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let nu = self.order;
        coeffs
            .iter()
            .zip(&self.freqs)
            .zip(&self.series)
            .map(|((c, &rho), &s)| c * (s * bessel_j_scaled(nu, rho * r)))
            .sum()
    }
}

/// Hashable identity of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridKey {
    pub dim: u32,
    pub r_max_bits: u64,
    pub n: usize,
}

/// Surface area of the unit sphere in ℝ^d (even d).
pub fn sphere_area(dim: u32) -> f64 {
    let half = dim / 2;
    let mut gamma = 1.0;
    for k in 1..half {
        gamma *= k as f64;
    }
    2.0 * PI.powi(half as i32) / gamma
}

fn apply(matrix: &[f64], x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let (re, im): (Vec<f64>, Vec<f64>) = x.iter().map(|c| (c.re, c.im)).unzip();
    matrix
        .chunks_exact(n)
        .map(|row| {
            let mut a = 0.0;
            let mut b = 0.0;
            for k in 0..n {
                a += row[k] * re[k];
                b += row[k] * im[k];
            }
            Complex64::new(a, b)
        })
        .collect()
}
