//! The limiting L2 metric on moduli in affine chart coordinates, the
//! Fubini-Study reference metric of the parameter projective space, and
//! Kahler volume densities.
//!
//! Conventions: the pointwise Hermitian pairing on target tangent vectors is
//! the quotient formula `(<v,w>|p|^2 - <v,p><p,w>)/|p|^4` with `<a,b> =
//! sum a_i conj(b_i)`, and volume densities are determinants of the Hermitian
//! coordinate matrix, under which the Fubini-Study volume of CP^q is
//! pi^q / q!.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::det_complex;
use crate::poly::{Chart, Direction, PolyTuple, TAU_SING};
use crate::sphere::SphereGrid;

/// Hermiticity tolerance for volume densities.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Near-boundary threshold: min n below this fraction of max n flags the
/// sample for re-evaluation at a doubled band limit.
pub const BOUNDARY_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricDiagnostics {
    pub band_limit: usize,
    /// min n / max n over the grid; small values mean a near-boundary point.
    pub boundary_proximity: f64,
    /// Max entrywise change under band-limit doubling, when measured.
    pub quad_error: Option<f64>,
}

/// Dense Hermitian q x q metric matrix in affine chart coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricMatrix {
    pub q: usize,
    /// Flat index of the chart-fixed coefficient.
    pub chart: usize,
    /// Row-major entries.
    pub entries: Vec<Complex64>,
    pub diagnostics: MetricDiagnostics,
}

impl MetricMatrix {
    pub fn zeros(q: usize, chart: usize, band_limit: usize) -> Self {
        MetricMatrix {
            q,
            chart,
            entries: vec![Complex64::new(0.0, 0.0); q * q],
            diagnostics: MetricDiagnostics {
                band_limit,
                boundary_proximity: 1.0,
                quad_error: None,
            },
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.entries[a * self.q + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, v: Complex64) {
        self.entries[a * self.q + b] = v;
    }

    /// Max deviation from Hermitian symmetry.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for a in 0..self.q {
            for b in 0..self.q {
                dev = dev.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        dev
    }

    /// Replaces the matrix by its Hermitian part (quadrature roundoff only).
    pub fn hermitize(&mut self) {
        for a in 0..self.q {
            for b in a..self.q {
                let m = (self.get(a, b) + self.get(b, a).conj()) * 0.5;
                self.set(a, b, m);
                self.set(b, a, m.conj());
            }
        }
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Max entrywise |self - other|.
    pub fn max_diff(&self, other: &MetricMatrix) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Pointwise Fubini-Study pairing of two homogeneous tangent directions at p.
#[inline]
pub fn fs_pairing(u: &[Complex64], v: &[Complex64], p: &[Complex64]) -> Complex64 {
    let mut uv = Complex64::new(0.0, 0.0);
    let mut up = Complex64::new(0.0, 0.0);
    let mut pv = Complex64::new(0.0, 0.0);
    let mut pp = 0.0f64;
    for i in 0..p.len() {
        uv += u[i] * v[i].conj();
        up += u[i] * p[i].conj();
        pv += p[i] * v[i].conj();
        pp += p[i].norm_sqr();
    }
    (uv * pp - up * pv) / (pp * pp)
}

/// Per-node evaluation context shared by the metric integrands: the tuple
/// representative and the chart directions, all in the node's good chart.
pub(crate) struct NodeEval {
    pub p: Vec<Complex64>,
    pub dirs: Vec<Vec<Complex64>>,
    pub infinity_chart: bool,
    pub chart_coord: Complex64,
}

pub(crate) fn node_eval(
    tuple: &PolyTuple,
    directions: &[Direction],
    z: Complex64,
) -> NodeEval {
    let infinity_chart = z.norm() > 1.0;
    let chart_coord = if infinity_chart { Complex64::new(1.0, 0.0) / z } else { z };
    let p = if infinity_chart {
        tuple.evaluate_infinity_chart(chart_coord)
    } else {
        tuple.evaluate(chart_coord)
    };
    let k1 = tuple.k + 1;
    let dirs = directions
        .iter()
        .map(|d| {
            let mut v = vec![Complex64::new(0.0, 0.0); k1];
            v[d.row] = d.eval_chart(tuple.r, chart_coord, infinity_chart);
            v
        })
        .collect();
    NodeEval { p, dirs, infinity_chart, chart_coord }
}

/// L2 metric matrix at the tuple in the largest-modulus chart.
pub fn l2_metric_matrix(p: &PolyTuple, grid: &Arc<SphereGrid>) -> Result<MetricMatrix> {
    l2_metric_matrix_in_chart(p, Chart::largest_modulus(p), grid)
}

/// L2 metric matrix in an explicit chart.
pub fn l2_metric_matrix_in_chart(
    p: &PolyTuple,
    chart: Chart,
    grid: &Arc<SphereGrid>,
) -> Result<MetricMatrix> {
    let norm_field = p.section_norm_field(grid);
    let (min_n, max_n) = (norm_field.min_re(), norm_field.max_re());
    if min_n <= TAU_SING * max_n {
        return Err(Error::SingularField { min: min_n, max: max_n });
    }
    let tuple = p.normalized_at(chart.fixed)?;
    let q = tuple.q();
    let dirs: Vec<Direction> = chart
        .directions(&tuple)
        .into_iter()
        .map(|f| {
            let (row, col) = tuple.unflatten(f);
            Direction { row, col }
        })
        .collect();

    let mut g = MetricMatrix::zeros(q, chart.fixed, grid.band_limit());
    g.diagnostics.boundary_proximity = min_n / max_n;

    let weights = grid.weights();
    let nodes = grid.chart_nodes();
    for (idx, &z) in nodes.iter().enumerate() {
        let ev = node_eval(&tuple, &dirs, z);
        let w = weights[idx];
        for a in 0..q {
            for b in a..q {
                let v = fs_pairing(&ev.dirs[a], &ev.dirs[b], &ev.p) * w;
                g.entries[a * q + b] += v;
            }
        }
    }
    for a in 0..q {
        for b in 0..a {
            g.entries[a * q + b] = g.entries[b * q + a].conj();
        }
    }
    g.hermitize();
    Ok(g)
}

/// Fubini-Study metric of the parameter CP^q in an affine chart.
pub fn fs_reference_metric(w: &[Complex64]) -> MetricMatrix {
    let q = w.len();
    let mut g = MetricMatrix::zeros(q, 0, 0);
    let norm2: f64 = 1.0 + w.iter().map(|c| c.norm_sqr()).sum::<f64>();
    for a in 0..q {
        for b in 0..q {
            let delta = if a == b { norm2 } else { 0.0 };
            let v = (Complex64::new(delta, 0.0) - w[a].conj() * w[b]) / (norm2 * norm2);
            g.set(a, b, v);
        }
    }
    g
}

/// Closed-form determinant of the chart Fubini-Study metric.
pub fn fs_reference_density(w: &[Complex64]) -> f64 {
    let norm2: f64 = 1.0 + w.iter().map(|c| c.norm_sqr()).sum::<f64>();
    norm2.powi(-(w.len() as i32 + 1))
}

/// Kahler volume density det(G); fails on non-Hermitian input and clamps
/// tiny negative determinants to zero.
pub fn volume_density(g: &MetricMatrix) -> Result<f64> {
    let dev = g.hermitian_deviation();
    let scale = g.max_entry_norm().max(1.0);
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian { deviation: dev, tol: HERMITIAN_TOL });
    }
    let det = det_complex(&g.entries, g.q);
    let re = det.re;
    if re < -1e-10 * scale.powi(g.q as i32) {
        return Ok(re); // genuinely negative: caller decides
    }
    Ok(re.max(0.0))
}
