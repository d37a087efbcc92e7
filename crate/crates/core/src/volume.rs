//! Monte Carlo moduli-space volumes with importance sampling against the
//! Fubini-Study measure of the parameter projective space.
//!
//! A sample is a uniform point of CP^q drawn by projectivising a standard
//! complex Gaussian vector; the estimator integrates the density ratio
//! det(G)/det(G_FS) and rescales by the exact reference volume pi^q/q!.
//! Sampling uses one counter-based stream per sample index, so the estimate
//! is bit-for-bit reproducible at any worker count.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{
    fs_reference_density, l2_metric_matrix_in_chart, volume_density, BOUNDARY_THRESHOLD,
};
use crate::poly::{Chart, PolyTuple};
use crate::sphere::SphereGrid;
use crate::vortex::{vortex_metric_in_chart, VortexConfig};

/// Exact Fubini-Study volume of CP^q.
pub fn fs_volume(q: usize) -> f64 {
    let mut fact = 1.0f64;
    for i in 2..=q {
        fact *= i as f64;
    }
    PI.powi(q as i32) / fact
}

/// A uniform Fubini-Study point of CP^q in the affine chart that freezes its
/// largest-modulus homogeneous entry to 1.
#[derive(Debug, Clone)]
pub struct ChartPoint {
    /// The q affine coordinates, in homogeneous-index order with the fixed
    /// slot skipped.
    pub w: Vec<Complex64>,
    /// Index of the frozen homogeneous entry.
    pub fixed: usize,
}

/// Draws the sample with the given index from the seeded family of streams.
pub fn sample_parameter(q: usize, seed: u64, index: u64) -> ChartPoint {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut v = Vec::with_capacity(q + 1);
    for _ in 0..=q {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        v.push(Complex64::new(re, im));
    }
    let fixed = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let pivot = v[fixed];
    let w = v
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != fixed)
        .map(|(_, &c)| c / pivot)
        .collect();
    ChartPoint { w, fixed }
}

/// Rebuilds the full homogeneous coefficient vector (fixed slot = 1).
pub fn chart_homogeneous(pt: &ChartPoint) -> Vec<Complex64> {
    let q = pt.w.len();
    let mut v = Vec::with_capacity(q + 1);
    let mut it = pt.w.iter();
    for i in 0..=q {
        if i == pt.fixed {
            v.push(Complex64::new(1.0, 0.0));
        } else {
            v.push(*it.next().unwrap());
        }
    }
    v
}

/// Builds the polynomial tuple whose flattened coefficient vector is the
/// sampled homogeneous representative.
pub fn tuple_from_sample(r: usize, k: usize, pt: &ChartPoint) -> Result<PolyTuple> {
    let v = chart_homogeneous(pt);
    let coeffs: Vec<Vec<Complex64>> = v.chunks(r + 1).map(|row| row.to_vec()).collect();
    PolyTuple::new(k, r, coeffs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    pub mode: String,
    pub r: usize,
    pub k: usize,
    pub q: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s2: Option<f64>,
    pub grid_l: usize,
    pub n: u64,
    pub seed: u64,
}

/// Monte Carlo volume estimate with full reproducibility metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    pub boundary_fraction: f64,
    pub failures: u64,
    #[serde(rename = "grid_L")]
    pub grid_l: usize,
    pub config: McConfig,
}

/// Per-sample record, exposed for diagnostics and robustness studies.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub index: u64,
    pub ratio: f64,
    pub boundary_proximity: f64,
    pub refined: bool,
}

/// Deterministic pairwise summation in index order.
fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

fn estimate_from_ratios(
    ratios: &[f64],
    q: usize,
    n_total: u64,
    failures: u64,
    boundary: u64,
    seed: u64,
    config: McConfig,
) -> VolumeEstimate {
    let n_ok = ratios.len() as f64;
    let scale = fs_volume(q);
    let mean_ratio = pairwise_sum(ratios) / n_ok;
    let centered: Vec<f64> =
        ratios.iter().map(|&x| (x - mean_ratio) * (x - mean_ratio)).collect();
    let var = if ratios.len() > 1 { pairwise_sum(&centered) / (n_ok - 1.0) } else { 0.0 };
    let stderr = scale * (var / n_ok).sqrt();
    VolumeEstimate {
        mean: scale * mean_ratio,
        stderr,
        n: n_total,
        seed,
        boundary_fraction: boundary as f64 / n_total.max(1) as f64,
        failures,
        grid_l: config.grid_l,
        config,
    }
}

/// L2-metric sample evaluation with the near-boundary refinement policy.
fn l2_sample(
    r: usize,
    k: usize,
    pt: &ChartPoint,
    grid: &Arc<SphereGrid>,
    refine: &Arc<SphereGrid>,
) -> Result<(f64, f64, bool)> {
    let tuple = tuple_from_sample(r, k, pt)?;
    let chart = Chart { fixed: pt.fixed };
    let mut g = l2_metric_matrix_in_chart(&tuple, chart, grid)?;
    let proximity = g.diagnostics.boundary_proximity;
    let mut refined = false;
    if proximity < BOUNDARY_THRESHOLD {
        let g2 = l2_metric_matrix_in_chart(&tuple, chart, refine)?;
        g = g2;
        refined = true;
    }
    let det = volume_density(&g)?;
    let ratio = det.max(0.0) / fs_reference_density(&pt.w);
    Ok((ratio, proximity, refined))
}

/// Monte Carlo estimate of the limiting L2 volume of the degree-r moduli of
/// maps to CP^k.
pub fn mc_volume_l2(
    r: usize,
    k: usize,
    n: u64,
    seed: u64,
    grid_l: usize,
) -> Result<VolumeEstimate> {
    let records = mc_l2_samples(r, k, n, seed, grid_l)?;
    let q = (k + 1) * (r + 1) - 1;
    let config = McConfig { mode: "l2".into(), r, k, q, s2: None, grid_l, n, seed };
    let ratios: Vec<f64> = records.iter().map(|s| s.ratio).collect();
    let boundary = records.iter().filter(|s| s.refined).count() as u64;
    let failures = n - records.len() as u64;
    Ok(estimate_from_ratios(&ratios, q, n, failures, boundary, seed, config))
}

/// Per-sample records for the L2 estimator (diagnostics and tests).
pub fn mc_l2_samples(
    r: usize,
    k: usize,
    n: u64,
    seed: u64,
    grid_l: usize,
) -> Result<Vec<SampleRecord>> {
    if r < 1 || k < 1 {
        return Err(Error::InvalidInput("need r >= 1 and k >= 1".into()));
    }
    let q = (k + 1) * (r + 1) - 1;
    let grid = SphereGrid::new(grid_l);
    let refine = SphereGrid::new(2 * grid_l);
    let results: Vec<Option<SampleRecord>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pt = sample_parameter(q, seed, i);
            l2_sample(r, k, &pt, &grid, &refine).ok().map(|(ratio, prox, refined)| {
                SampleRecord { index: i, ratio, boundary_proximity: prox, refined }
            })
        })
        .collect();
    Ok(results.into_iter().flatten().collect())
}

/// Monte Carlo estimate of the finite-coupling vortex volume.
pub fn mc_volume_vortex(
    r: usize,
    k: usize,
    s2: f64,
    n: u64,
    seed: u64,
    grid_l: usize,
) -> Result<VolumeEstimate> {
    if r < 1 || k < 1 {
        return Err(Error::InvalidInput("need r >= 1 and k >= 1".into()));
    }
    let cfg = VortexConfig::new(r, k, s2)?;
    let q = (k + 1) * (r + 1) - 1;
    let grid = SphereGrid::new(grid_l);
    let refine = SphereGrid::new(2 * grid_l);
    let results: Vec<Option<(f64, bool)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pt = sample_parameter(q, seed, i);
            let work = || -> Result<(f64, bool)> {
                let tuple = tuple_from_sample(r, k, &pt)?;
                let chart = Chart { fixed: pt.fixed };
                let rep = vortex_metric_in_chart(&tuple, chart, &cfg, &grid)?;
                let (rep, refined) =
                    if rep.g.diagnostics.boundary_proximity < BOUNDARY_THRESHOLD {
                        (vortex_metric_in_chart(&tuple, chart, &cfg, &refine)?, true)
                    } else {
                        (rep, false)
                    };
                let det = volume_density(&rep.g)?;
                Ok((det.max(0.0) / fs_reference_density(&pt.w), refined))
            };
            work().ok()
        })
        .collect();
    let mut ratios = Vec::with_capacity(n as usize);
    let mut boundary = 0u64;
    for r_opt in &results {
        if let Some((ratio, refined)) = r_opt {
            ratios.push(*ratio);
            if *refined {
                boundary += 1;
            }
        }
    }
    let failures = n - ratios.len() as u64;
    let config = McConfig { mode: "vortex".into(), r, k, q, s2: Some(s2), grid_l, n, seed };
    Ok(estimate_from_ratios(&ratios, q, n, failures, boundary, seed, config))
}

/// Calibration anchor: runs the density-ratio pipeline with the reference
/// metric itself as the integrand; returns exactly pi^q/q! with zero
/// variance.
pub fn calibrate_cpq(q: usize, n: u64, seed: u64) -> Result<VolumeEstimate> {
    if q < 1 {
        return Err(Error::InvalidInput("need q >= 1".into()));
    }
    let results: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pt = sample_parameter(q, seed, i);
            let g = crate::metric::fs_reference_metric(&pt.w);
            let det = volume_density(&g).expect("reference metric is Hermitian");
            det / fs_reference_density(&pt.w)
        })
        .collect();
    let config =
        McConfig { mode: "calibrate".into(), r: 0, k: 0, q, s2: None, grid_l: 0, n, seed };
    Ok(estimate_from_ratios(&results, q, n, 0, 0, seed, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fs_volume_values() {
        assert_abs_diff_eq!(fs_volume(1), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(fs_volume(3), PI.powi(3) / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn samples_live_in_largest_modulus_chart() {
        for i in 0..200 {
            let pt = sample_parameter(3, 99, i);
            assert_eq!(pt.w.len(), 3);
            for w in &pt.w {
                assert!(w.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_per_index() {
        let a = sample_parameter(5, 1234, 7);
        let b = sample_parameter(5, 1234, 7);
        assert_eq!(a.fixed, b.fixed);
        for (x, y) in a.w.iter().zip(b.w.iter()) {
            assert_eq!(x, y);
        }
        let c = sample_parameter(5, 1234, 8);
        assert!(a.w.iter().zip(c.w.iter()).any(|(x, y)| x != y));
    }

    /// Chart-invariant moment of the uniform measure: the homogeneous slot-1
    /// share E[|v_1|^2/|v|^2] equals 1/(q+1).
    #[test]
    fn fs_uniformity_moment() {
        let q = 3usize;
        let n = 100_000u64;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let pt = sample_parameter(q, 2024, i);
                let v = chart_homogeneous(&pt);
                let total: f64 = v.iter().map(|c| c.norm_sqr()).sum();
                v[1].norm_sqr() / total
            })
            .collect();
        let mean = pairwise_sum(&vals) / n as f64;
        let var: f64 =
            vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
        let sigma = (var / n as f64).sqrt();
        let expect = 1.0 / (q as f64 + 1.0);
        assert!(
            (mean - expect).abs() <= 3.0 * sigma,
            "moment {mean:.6} vs {expect:.6} (3 sigma = {:.2e})",
            3.0 * sigma
        );
    }

    #[test]
    fn calibration_has_zero_variance() {
        for q in [1usize, 3] {
            let est = calibrate_cpq(q, 500, 42).unwrap();
            assert_abs_diff_eq!(est.mean, fs_volume(q), epsilon = 1e-12 * fs_volume(q));
            assert!(est.stderr < 1e-14);
            assert_eq!(est.failures, 0);
        }
    }

    #[test]
    fn l2_estimate_is_reproducible_across_worker_counts() {
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| mc_volume_l2(1, 1, 64, 7, 12).unwrap());
        let b = pool4.install(|| mc_volume_l2(1, 1, 64, 7, 12).unwrap());
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn json_schema_keys() {
        let est = calibrate_cpq(2, 10, 1).unwrap();
        let json = serde_json::to_string(&est).unwrap();
        for key in [
            "\"mean\"",
            "\"stderr\"",
            "\"n\"",
            "\"seed\"",
            "\"boundary_fraction\"",
            "\"failures\"",
            "\"grid_L\"",
            "\"config\"",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
    }
}
