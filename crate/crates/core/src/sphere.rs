//! Spectral discretisation of the unit-area round sphere.
//!
//! The source surface is the round two-sphere rescaled so that its total
//! volume is 1.  With that normalisation the positive-definite Laplacian has
//! eigenvalue `4*pi*l*(l+1)` on degree-l spherical harmonics.  The grid is
//! Gauss-Legendre in colatitude (`L+1` rings) times equispaced longitude
//! (`2L+2` points), which integrates products of harmonics of degree <= L
//! exactly and single harmonics up to degree 2L.
//!
//! Stereographic chart convention: `z = tan(theta/2) * exp(i*phi)`, so the
//! north pole sits at `z = 0` and the south pole at `z = infinity`.  Grid
//! nodes never hit either pole.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Standard initial guess followed by Newton iteration on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pn(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pn(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // Ascending in x.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre_pn(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Index into the (l, m >= 0) triangular Legendre table.
#[inline]
fn tri_index(l_max: usize, m: usize, l: usize) -> usize {
    // Entries for fixed m are contiguous: l = m..=l_max.
    m * (l_max + 1) - m * m.saturating_sub(1) / 2 + (l - m)
}

fn tri_len(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 2) / 2
}

/// Discretised unit-area sphere with precomputed transform tables.
#[derive(Debug)]
pub struct SphereGrid {
    band_limit: usize,
    n_rings: usize,
    n_lon: usize,
    colat: Vec<f64>,
    lon: Vec<f64>,
    cos_colat: Vec<f64>,
    sin_colat: Vec<f64>,
    /// Quadrature weight per node (flattened ring-major); sums to 1.
    weights: Vec<f64>,
    /// Per-ring weight; `weights[idx] = ring_weight[i]`.
    ring_weight: Vec<f64>,
    /// Stereographic coordinate z per node.
    chart_z: Vec<Complex64>,
    /// Normalized associated Legendre values per ring, triangular (m, l) layout.
    legendre: Vec<f64>,
    /// d/dtheta of the same functions.
    dlegendre: Vec<f64>,
    /// exp(i * phi_j) powers: twiddle[t] = exp(2*pi*i*t/n_lon).
    twiddle: Vec<Complex64>,
}

impl SphereGrid {
    /// Builds the grid for band limit `band_limit`.
    pub fn new(band_limit: usize) -> Arc<Self> {
        let l_max = 2 * band_limit; // analysis table extends to 2L for oversampling helpers
        let n_rings = band_limit + 1;
        let n_lon = 2 * band_limit + 2;
        let (x, w) = gauss_legendre(n_rings);
        let colat: Vec<f64> = x.iter().map(|&xi| xi.acos()).collect();
        let lon: Vec<f64> = (0..n_lon).map(|j| 2.0 * PI * j as f64 / n_lon as f64).collect();
        let ring_weight: Vec<f64> = w.iter().map(|&wi| wi / (2.0 * n_lon as f64)).collect();

        let mut weights = Vec::with_capacity(n_rings * n_lon);
        let mut chart_z = Vec::with_capacity(n_rings * n_lon);
        for i in 0..n_rings {
            let t = (colat[i] / 2.0).tan();
            for j in 0..n_lon {
                weights.push(ring_weight[i]);
                chart_z.push(Complex64::from_polar(t, lon[j]));
            }
        }

        let tri = tri_len(l_max);
        let mut legendre = vec![0.0; n_rings * tri];
        let mut dlegendre = vec![0.0; n_rings * tri];
        for i in 0..n_rings {
            let (p, dp) = normalized_alp_table(l_max, x[i]);
            legendre[i * tri..(i + 1) * tri].copy_from_slice(&p);
            dlegendre[i * tri..(i + 1) * tri].copy_from_slice(&dp);
        }

        let twiddle: Vec<Complex64> = (0..n_lon)
            .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / n_lon as f64))
            .collect();

        let sin_colat: Vec<f64> = colat.iter().map(|t| t.sin()).collect();

        Arc::new(SphereGrid {
            band_limit,
            n_rings,
            n_lon,
            colat,
            lon,
            cos_colat: x,
            sin_colat,
            weights,
            ring_weight,
            chart_z,
            legendre,
            dlegendre,
            twiddle,
        })
    }

    /// Rejects negative band limits from untyped front ends.
    pub fn try_new(band_limit: i64) -> Result<Arc<Self>> {
        if band_limit < 0 {
            return Err(Error::NegativeBandLimit(band_limit));
        }
        Ok(Self::new(band_limit as usize))
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn n_rings(&self) -> usize {
        self.n_rings
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    pub fn n_nodes(&self) -> usize {
        self.n_rings * self.n_lon
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn chart_nodes(&self) -> &[Complex64] {
        &self.chart_z
    }

    pub fn colatitudes(&self) -> &[f64] {
        &self.colat
    }

    pub fn longitudes(&self) -> &[f64] {
        &self.lon
    }

    #[inline]
    fn tri(&self) -> usize {
        tri_len(2 * self.band_limit)
    }

    #[inline]
    fn leg(&self, ring: usize, m: usize, l: usize) -> f64 {
        self.legendre[ring * self.tri() + tri_index(2 * self.band_limit, m, l)]
    }

    #[inline]
    fn dleg(&self, ring: usize, m: usize, l: usize) -> f64 {
        self.dlegendre[ring * self.tri() + tri_index(2 * self.band_limit, m, l)]
    }

    #[inline]
    fn phase(&self, m: i64, j: usize) -> Complex64 {
        // exp(i m phi_j) with phi_j = 2 pi j / n_lon
        let t = (m.rem_euclid(self.n_lon as i64)) as usize * j % self.n_lon;
        self.twiddle[t]
    }
}

/// Normalized associated Legendre functions and their theta-derivatives.
///
/// Normalisation: (1/2) * integral_{-1}^{1} P(l,m,x)^2 dx = 1, so that
/// `P(l,m,cos(theta)) * exp(i m phi)` is orthonormal for the unit-area
/// quadrature.
fn normalized_alp_table(l_max: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let tri = tri_len(l_max);
    let mut p = vec![0.0; tri];
    let mut dp = vec![0.0; tri];
    let s = (1.0 - x * x).sqrt().max(1e-300);

    // Diagonal terms P_mm.
    let mut pmm = 1.0f64; // P_00 normalized
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            pmm *= s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        }
        p[tri_index(l_max, m, m)] = pmm;
        if m + 1 <= l_max {
            let c = (2.0 * m as f64 + 3.0).sqrt();
            p[tri_index(l_max, m, m + 1)] = c * x * pmm;
        }
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            p[tri_index(l_max, m, l)] =
                a * (x * p[tri_index(l_max, m, l - 1)] - b * p[tri_index(l_max, m, l - 2)]);
        }
        // theta-derivatives from the lowering relation
        // (1-x^2) dP(l,m)/dx = (l+m) P(l-1,m) - l x P(l,m), so
        // dP/dtheta = (l x P(l,m) - c P(l-1,m)) / sin(theta),
        // c = sqrt((2l+1)(l-m)(l+m)/(2l-1)) in this normalization.
        for l in m..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let below = if l > m {
                let c = ((2.0 * lf + 1.0) * (lf - mf) * (lf + mf) / (2.0 * lf - 1.0)).sqrt();
                c * p[tri_index(l_max, m, l - 1)]
            } else {
                0.0
            };
            dp[tri_index(l_max, m, l)] = (lf * x * p[tri_index(l_max, m, l)] - below) / s;
        }
    }
    (p, dp)
}

/// Spherical-harmonic coefficients up to the grid band limit.
#[derive(Debug, Clone)]
pub struct ShCoeffs {
    pub l_max: usize,
    /// Layout: index(l, m) = l*l + (l + m).
    pub data: Vec<Complex64>,
}

impl ShCoeffs {
    pub fn zeros(l_max: usize) -> Self {
        ShCoeffs { l_max, data: vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)] }
    }

    #[inline]
    pub fn idx(l: usize, m: i64) -> usize {
        l * l + (l as i64 + m) as usize
    }

    #[inline]
    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.data[Self::idx(l, m)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, m: i64, v: Complex64) {
        self.data[Self::idx(l, m)] = v;
    }
}

/// Complex scalar field sampled on a [`SphereGrid`].
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for a grid with {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Arc<SphereGrid>) -> Self {
        let n = grid.n_nodes();
        ScalarField { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn constant(grid: Arc<SphereGrid>, c: Complex64) -> Self {
        let n = grid.n_nodes();
        ScalarField { grid, values: vec![c; n] }
    }

    /// Builds a field from a function of (colatitude, longitude, chart z).
    pub fn from_fn<F>(grid: Arc<SphereGrid>, mut f: F) -> Self
    where
        F: FnMut(f64, f64, Complex64) -> Complex64,
    {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for i in 0..grid.n_rings() {
            for j in 0..grid.n_lon() {
                let z = grid.chart_z[i * grid.n_lon() + j];
                values.push(f(grid.colat[i], grid.lon[j], z));
            }
        }
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.band_limit == other.grid.band_limit {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Quadrature of the field over the unit-area sphere.
    pub fn integrate(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, v) in self.grid.weights.iter().zip(self.values.iter()) {
            acc += w * v;
        }
        acc
    }

    pub fn mean(&self) -> Complex64 {
        self.integrate()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_re(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_re(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> ScalarField {
        ScalarField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(
        &self,
        other: &ScalarField,
        f: F,
    ) -> Result<ScalarField> {
        self.same_grid(other)?;
        Ok(ScalarField {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Forward spherical-harmonic transform (exact for band-limited fields).
    pub fn analyze(&self) -> ShCoeffs {
        let g = &self.grid;
        let lmax = g.band_limit;
        let mut coeffs = ShCoeffs::zeros(lmax);
        let n_lon = g.n_lon;
        // Longitudinal DFT per ring: f_hat(i, m) = sum_j f(i,j) exp(-i m phi_j).
        let mut fhat = vec![Complex64::new(0.0, 0.0); g.n_rings * (2 * lmax + 1)];
        for i in 0..g.n_rings {
            for (mi, m) in (-(lmax as i64)..=(lmax as i64)).enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n_lon {
                    acc += self.values[i * n_lon + j] * g.phase(-m, j);
                }
                fhat[i * (2 * lmax + 1) + mi] = acc;
            }
        }
        for (mi, m) in (-(lmax as i64)..=(lmax as i64)).enumerate() {
            let ma = m.unsigned_abs() as usize;
            for l in ma..=lmax {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..g.n_rings {
                    acc += g.ring_weight[i]
                        * g.leg(i, ma, l)
                        * fhat[i * (2 * lmax + 1) + mi];
                }
                coeffs.set(l, m, acc);
            }
        }
        coeffs
    }

    /// Inverse transform.
    pub fn synthesize(grid: &Arc<SphereGrid>, coeffs: &ShCoeffs) -> ScalarField {
        Self::synthesize_with(grid, coeffs, false)
    }

    /// Synthesis of the colatitude derivative (d/dtheta) of the field.
    pub fn synthesize_dtheta(grid: &Arc<SphereGrid>, coeffs: &ShCoeffs) -> ScalarField {
        Self::synthesize_with(grid, coeffs, true)
    }

    fn synthesize_with(grid: &Arc<SphereGrid>, coeffs: &ShCoeffs, dtheta: bool) -> ScalarField {
        let lmax = coeffs.l_max.min(grid.band_limit);
        let n_lon = grid.n_lon;
        let mut values = vec![Complex64::new(0.0, 0.0); grid.n_nodes()];
        for i in 0..grid.n_rings {
            // g_m(i) = sum_l a_lm P(l,|m|)(x_i)
            for m in -(lmax as i64)..=(lmax as i64) {
                let ma = m.unsigned_abs() as usize;
                let mut gm = Complex64::new(0.0, 0.0);
                for l in ma..=lmax {
                    let t = if dtheta { grid.dleg(i, ma, l) } else { grid.leg(i, ma, l) };
                    gm += coeffs.get(l, m) * t;
                }
                if gm.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n_lon {
                    values[i * n_lon + j] += gm * grid.phase(m, j);
                }
            }
        }
        ScalarField { grid: Arc::clone(grid), values }
    }

    /// Positive-definite Laplacian: eigenvalue `4*pi*l*(l+1)` on degree-l modes.
    pub fn laplacian(&self) -> ScalarField {
        let mut coeffs = self.analyze();
        for l in 0..=coeffs.l_max {
            let eig = 4.0 * PI * (l * (l + 1)) as f64;
            for m in -(l as i64)..=(l as i64) {
                let v = coeffs.get(l, m) * eig;
                coeffs.set(l, m, v);
            }
        }
        Self::synthesize(&self.grid, &coeffs)
    }

    /// Solves `laplacian(f) = self` for the zero-mean f.
    ///
    /// The right-hand side must have zero mean (solvability); tolerance is
    /// 1e-8 relative to the field scale.
    pub fn poisson_solve(&self) -> Result<ScalarField> {
        let scale = self.sup_abs().max(1.0);
        let mean = self.mean();
        let tol = 1e-8;
        if mean.norm() > tol * scale {
            return Err(Error::NonZeroMean { mean: mean.norm(), tol });
        }
        let mut coeffs = self.analyze();
        coeffs.set(0, 0, Complex64::new(0.0, 0.0));
        for l in 1..=coeffs.l_max {
            let eig = 4.0 * PI * (l * (l + 1)) as f64;
            for m in -(l as i64)..=(l as i64) {
                let v = coeffs.get(l, m) / eig;
                coeffs.set(l, m, v);
            }
        }
        Ok(Self::synthesize(&self.grid, &coeffs))
    }

    /// Azimuthal derivative d/dphi.
    pub fn d_dphi(&self) -> ScalarField {
        let mut coeffs = self.analyze();
        for l in 0..=coeffs.l_max {
            for m in -(l as i64)..=(l as i64) {
                let v = coeffs.get(l, m) * Complex64::new(0.0, m as f64);
                coeffs.set(l, m, v);
            }
        }
        Self::synthesize(&self.grid, &coeffs)
    }

    /// Colatitude derivative d/dtheta.
    pub fn d_dtheta(&self) -> ScalarField {
        let coeffs = self.analyze();
        Self::synthesize_dtheta(&self.grid, &coeffs)
    }

    /// Holomorphic chart derivative of the field, evaluated per node in the
    /// node's well-conditioned chart: d/dz where |z| <= 1, d/dw (w = 1/z)
    /// otherwise.
    pub fn d_chart(&self) -> ScalarField {
        let ft = self.d_dtheta();
        let fp = self.d_dphi();
        let g = &self.grid;
        let mut values = Vec::with_capacity(g.n_nodes());
        for i in 0..g.n_rings {
            let theta = g.colat[i];
            for j in 0..g.n_lon {
                let idx = i * g.n_lon + j;
                let z = g.chart_z[idx];
                let t = ft.values[idx];
                let p = fp.values[idx];
                let v = if z.norm() <= 1.0 {
                    // d/dz = conj(z)/(|z|(1+|z|^2)) d/dtheta + 1/(2 i z) d/dphi
                    let r = z.norm().max(1e-300);
                    z.conj() / (r * (1.0 + r * r)) * t + p / (Complex64::new(0.0, 2.0) * z)
                } else {
                    let w = Complex64::new(1.0, 0.0) / z;
                    let r = w.norm();
                    -w.conj() / (r * (1.0 + r * r)) * t - p / (Complex64::new(0.0, 2.0) * w)
                };
                let _ = theta;
                values.push(v);
            }
        }
        ScalarField { grid: Arc::clone(g), values }
    }
}

impl std::ops::Add<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b).expect("grid mismatch")
    }
}

impl std::ops::Sub<&ScalarField> for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b).expect("grid mismatch")
    }
}

impl std::ops::Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.map(|v| v * rhs)
    }
}
