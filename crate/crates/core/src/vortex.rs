//! The gauge machinery that carries a holomorphic tuple to a finite-coupling
//! vortex, and the finite-s L2 metric it induces on moduli.
//!
//! Pipeline per moduli point: solve the auxiliary potential psi from the
//! pullback curvature, form the negative norm function h = -exp(2 psi),
//! solve the gauge scalar phi_s from the semilinear equation
//!
//! ```text
//!     lap(phi) + c(s) = s^2 h exp(phi),      c(s) = 2 c_1 - s^2,
//! ```
//!
//! (lap is the positive-definite Laplacian; the Newton linearisation
//! `lap + s^2 (-h) exp(phi)` is strictly positive), then differentiate the
//! whole chain in each chart direction and assemble the metric terms X, Y, Z.
//! As s grows, phi_s approaches `log(c_2 / -h)` and the metric converges to
//! the limiting L2 metric of [`crate::metric`].

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{fs_pairing, node_eval, MetricMatrix};
use crate::poly::{Chart, Direction, PolyTuple, TAU_SING};
use crate::sphere::{ScalarField, SphereGrid};

/// Coupling configuration.  `c1` defaults to the Chern mass `2*pi*r`; tests
/// may override it (the stability bound is then `s^2 > 2*c1`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VortexConfig {
    pub s2: f64,
    pub r: usize,
    pub k: usize,
    pub c1: f64,
    pub c2: f64,
}

impl VortexConfig {
    pub fn new(r: usize, k: usize, s2: f64) -> Result<Self> {
        let bound = 4.0 * PI * r as f64;
        if s2 < bound {
            return Err(Error::BradlowViolation { s2, bound });
        }
        Ok(VortexConfig { s2, r, k, c1: 2.0 * PI * r as f64, c2: 1.0 })
    }

    /// Test constructor with an explicit c1 (e.g. zero for constant-h cases).
    pub fn with_c1(r: usize, k: usize, s2: f64, c1: f64) -> Result<Self> {
        if s2 <= 2.0 * c1 {
            return Err(Error::BradlowViolation { s2, bound: 2.0 * c1 });
        }
        Ok(VortexConfig { s2, r, k, c1, c2: 1.0 })
    }

    /// c(s) = 2 c_1 - s^2.
    pub fn c_of_s(&self) -> f64 {
        2.0 * self.c1 - self.s2
    }
}

/// Solved gauge scalar with diagnostics.
#[derive(Debug, Clone)]
pub struct KWSolution {
    pub phi: ScalarField,
    pub psi: ScalarField,
    /// u = phi/2 + psi.
    pub u: ScalarField,
    pub residual_sup: f64,
    pub iterations: usize,
    /// Moduli derivatives of phi, one per chart direction, when computed.
    pub phi_alpha: Option<Vec<ScalarField>>,
}

/// Finite-s metric with its term breakdown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VortexMetricReport {
    pub config: VortexConfig,
    pub g: MetricMatrix,
    pub x: MetricMatrix,
    pub y: MetricMatrix,
    pub z: MetricMatrix,
    pub residual_sup: f64,
    pub iterations: usize,
}

// ---------------------------------------------------------------------------
// real-field helpers

fn re_values(f: &ScalarField) -> Vec<f64> {
    f.values().iter().map(|v| v.re).collect()
}

fn field_from_re(grid: &Arc<SphereGrid>, v: Vec<f64>) -> ScalarField {
    ScalarField::new(
        Arc::clone(grid),
        v.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
    )
    .expect("length from grid")
}

fn lap_re(grid: &Arc<SphereGrid>, v: &[f64]) -> Vec<f64> {
    let f = ScalarField::new(
        Arc::clone(grid),
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    )
    .expect("length");
    re_values(&f.laplacian())
}

/// Preconditioner solve of (lap + shift) on a real field.  The discrete
/// Laplacian annihilates node-space components outside the band-limited
/// subspace, so those are handled by the diagonal shift alone.
fn inv_shifted_lap_re(grid: &Arc<SphereGrid>, v: &[f64], shift: f64) -> Vec<f64> {
    let f = ScalarField::new(
        Arc::clone(grid),
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    )
    .expect("length");
    let coeffs = f.analyze();
    let mut scaled = coeffs.clone();
    for l in 0..=scaled.l_max {
        let eig = 4.0 * PI * (l * (l + 1)) as f64 + shift;
        for m in -(l as i64)..=(l as i64) {
            let c = scaled.get(l, m) / eig;
            scaled.set(l, m, c);
        }
    }
    let in_band_scaled = re_values(&ScalarField::synthesize(grid, &scaled));
    let in_band = re_values(&ScalarField::synthesize(grid, &coeffs));
    (0..v.len())
        .map(|i| in_band_scaled[i] + (v[i] - in_band[i]) / shift)
        .collect()
}

fn dot_w(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a.iter().zip(b.iter())).map(|(wi, (x, y))| wi * x * y).sum()
}

/// Preconditioned conjugate gradients for (lap + pot) x = b with a positive
/// potential, in the quadrature inner product.
fn cg_solve(
    grid: &Arc<SphereGrid>,
    pot: &[f64],
    b: &[f64],
    tol_rel: f64,
    max_iter: usize,
) -> Vec<f64> {
    let w = grid.weights();
    let n = b.len();
    let pot_mean = {
        let mut acc = 0.0;
        for i in 0..n {
            acc += w[i] * pot[i];
        }
        acc.max(1e-12)
    };
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut out = lap_re(grid, x);
        for i in 0..n {
            out[i] += pot[i] * x[i];
        }
        out
    };
    let precond = |r: &[f64]| -> Vec<f64> { inv_shifted_lap_re(grid, r, pot_mean) };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let b_norm = dot_w(w, b, b).sqrt().max(1e-300);
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot_w(w, &r, &z);
    for _ in 0..max_iter {
        if dot_w(w, &r, &r).sqrt() <= tol_rel * b_norm {
            break;
        }
        let ap = apply(&p);
        let pap = dot_w(w, &p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = precond(&r);
        let rz_new = dot_w(w, &r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

// ---------------------------------------------------------------------------
// gauge potentials

/// Zero-mean potential solving `lap(psi) = c_1 - curvature_field(P)`.
pub fn psi_solve(p: &PolyTuple, grid: &Arc<SphereGrid>) -> Result<ScalarField> {
    let curv = p.curvature_field(grid)?;
    let c1 = 2.0 * PI * p.r as f64;
    let rhs = curv.map(|v| Complex64::new(c1 - v.re, 0.0));
    rhs.poisson_solve()
}

/// Closed-form psi: half the zero-mean part of log n.
fn psi_closed_form(p: &PolyTuple, grid: &Arc<SphereGrid>) -> Result<ScalarField> {
    let n = p.section_norm_field(grid);
    let (min, max) = (n.min_re(), n.max_re());
    if min <= TAU_SING * max {
        return Err(Error::SingularField { min, max });
    }
    let logn = n.map(|v| Complex64::new(v.re.ln(), 0.0));
    let mean = logn.mean();
    Ok(logn.map(|v| (v - mean) * 0.5))
}

/// Strictly negative norm function h = -exp(2 psi).
pub fn norm_function(p: &PolyTuple, grid: &Arc<SphereGrid>) -> Result<ScalarField> {
    let psi = psi_closed_form(p, grid)?;
    Ok(psi.map(|v| Complex64::new(-(2.0 * v.re).exp(), 0.0)))
}

/// Approximate solution and its error term:
///
/// ```text
///   v_s = log[(lap(-log(-h)) - c(s)) / (-s^2 h)],
/// ```
///
/// with `E_s` the exact error of `v_s` in the gauge equation, so that
/// `lap(v_s) + c(s) - s^2 h exp(v_s) + E_s = 0` holds identically.  This
/// pairing is what makes the maximum-principle envelope between `phi_s` and
/// `v_s` rigorous at every admissible coupling.  `v_s` approaches the
/// infinite-coupling gauge `log(c_2/(-h))` at rate `1/s^2`.
pub fn approx_solution(h: &ScalarField, cfg: &VortexConfig) -> Result<(ScalarField, ScalarField)> {
    let grid = h.grid();
    let hv = re_values(h);
    if hv.iter().any(|&x| x >= 0.0) {
        return Err(Error::Domain("norm function must be strictly negative".into()));
    }
    let c = cfg.c_of_s();
    let s2 = cfg.s2;
    let mlog = field_from_re(grid, hv.iter().map(|&x| -((-x).ln())).collect());
    let lap_mlog = re_values(&mlog.laplacian());
    let numer: Vec<f64> = lap_mlog.iter().map(|&x| x - c).collect();
    let min_numer = numer.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_numer <= 0.0 {
        return Err(Error::Domain(format!(
            "approximate-solution numerator reaches {min_numer:.3e}; coupling too small"
        )));
    }
    let v: Vec<f64> = numer
        .iter()
        .zip(hv.iter())
        .map(|(&nu, &hh)| (nu / (-s2 * hh)).ln())
        .collect();
    // E = -(lap(v) + c - s^2 h e^v): the equation error carried by v.
    let mut e = lap_re(grid, &v);
    for i in 0..e.len() {
        e[i] = -(e[i] + c - s2 * hv[i] * v[i].exp());
    }
    Ok((field_from_re(grid, v), field_from_re(grid, e)))
}

/// Newton solve of the gauge equation with residual
/// `F(phi) = lap(phi) + c(s) - s^2 h exp(phi)`.
pub fn kw_solve(h: &ScalarField, cfg: &VortexConfig, tol: f64) -> Result<KWSolution> {
    let grid = h.grid();
    let hv = re_values(h);
    if hv.iter().any(|&x| x >= 0.0) {
        return Err(Error::Domain("norm function must be strictly negative".into()));
    }
    if cfg.s2 <= 2.0 * cfg.c1 {
        return Err(Error::BradlowViolation { s2: cfg.s2, bound: 2.0 * cfg.c1 });
    }
    let c = cfg.c_of_s();
    let s2 = cfg.s2;
    let n = hv.len();

    let mut phi: Vec<f64> = match approx_solution(h, cfg) {
        Ok((v, _)) => re_values(&v),
        Err(_) => hv.iter().map(|&x| (cfg.c2 / -x).ln()).collect(),
    };

    let residual = |ph: &[f64]| -> (Vec<f64>, f64) {
        let mut f = lap_re(grid, ph);
        let mut sup = 0.0f64;
        for i in 0..n {
            f[i] += c - s2 * hv[i] * ph[i].exp();
            sup = sup.max(f[i].abs());
        }
        (f, sup)
    };

    let (mut f, mut res) = residual(&phi);
    let mut iterations = 0usize;
    while res > tol && iterations < 50 {
        iterations += 1;
        // J = lap + s^2 (-h) exp(phi): strictly positive potential.
        let pot: Vec<f64> = (0..n).map(|i| s2 * (-hv[i]) * phi[i].exp()).collect();
        let rhs: Vec<f64> = f.iter().map(|&x| -x).collect();
        let delta = cg_solve(grid, &pot, &rhs, 1e-13, 400);
        // Damped step: halve until the residual does not increase.
        let mut lambda = 1.0f64;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = (0..n).map(|i| phi[i] + lambda * delta[i]).collect();
            let (tf, tres) = residual(&trial);
            if tres < res {
                phi = trial;
                f = tf;
                res = tres;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res > tol {
        return Err(Error::NoConvergence { residual: res, iterations });
    }

    let psi: Vec<f64> = hv.iter().map(|&x| 0.5 * (-x).ln()).collect();
    let u: Vec<f64> = (0..n).map(|i| 0.5 * phi[i] + psi[i]).collect();
    Ok(KWSolution {
        phi: field_from_re(grid, phi),
        psi: field_from_re(grid, psi),
        u: field_from_re(grid, u),
        residual_sup: res,
        iterations,
        phi_alpha: None,
    })
}

/// Moduli derivative of the gauge scalar: solves the linearised equation
/// `(lap + s^2 (-h) exp(phi)) phi^a = s^2 h^a exp(phi)` for a complex
/// direction derivative `h^a` of the norm function.
pub fn linearized_solve(
    sol: &KWSolution,
    h: &ScalarField,
    h_alpha: &ScalarField,
    cfg: &VortexConfig,
) -> Result<ScalarField> {
    let grid = h.grid();
    let hv = re_values(h);
    let phiv = re_values(&sol.phi);
    let n = hv.len();
    let pot: Vec<f64> = (0..n).map(|i| cfg.s2 * (-hv[i]) * phiv[i].exp()).collect();
    let rhs_re: Vec<f64> = (0..n)
        .map(|i| cfg.s2 * h_alpha.values()[i].re * phiv[i].exp())
        .collect();
    let rhs_im: Vec<f64> = (0..n)
        .map(|i| cfg.s2 * h_alpha.values()[i].im * phiv[i].exp())
        .collect();
    let xr = cg_solve(grid, &pot, &rhs_re, 1e-13, 400);
    let xi = cg_solve(grid, &pot, &rhs_im, 1e-13, 400);
    ScalarField::new(
        Arc::clone(grid),
        (0..n).map(|i| Complex64::new(xr[i], xi[i])).collect(),
    )
}

// ---------------------------------------------------------------------------
// metric assembly

/// Analytic per-direction data: g_a = d_a log n and its chart derivative,
/// evaluated in each node's good chart.
fn direction_log_derivatives(
    tuple: &PolyTuple,
    dirs: &[Direction],
    grid: &Arc<SphereGrid>,
) -> (Vec<ScalarField>, Vec<ScalarField>) {
    let n_nodes = grid.n_nodes();
    let mut g_fields = vec![vec![Complex64::new(0.0, 0.0); n_nodes]; dirs.len()];
    let mut dg_fields = vec![vec![Complex64::new(0.0, 0.0); n_nodes]; dirs.len()];
    for (idx, &z) in grid.chart_nodes().iter().enumerate() {
        let (vals, ders, c) = tuple.eval_good_chart(z);
        let infinity = z.norm() > 1.0;
        let s: f64 = vals.iter().map(|v| v.norm_sqr()).sum();
        let s_c: Complex64 = ders.iter().zip(vals.iter()).map(|(d, p)| d * p.conj()).sum();
        for (a, dir) in dirs.iter().enumerate() {
            let u = dir.eval_chart(tuple.r, c, infinity);
            let du = dir_chart_derivative(tuple.r, dir, c, infinity);
            let t = u * vals[dir.row].conj();
            let dt = du * vals[dir.row].conj();
            let g = t / s;
            let dg = (dt * s - t * s_c) / (s * s);
            g_fields[a][idx] = g;
            dg_fields[a][idx] = dg;
        }
    }
    let gs = g_fields
        .into_iter()
        .map(|v| ScalarField::new(Arc::clone(grid), v).expect("length"))
        .collect();
    let dgs = dg_fields
        .into_iter()
        .map(|v| ScalarField::new(Arc::clone(grid), v).expect("length"))
        .collect();
    (gs, dgs)
}

/// Chart derivative of the direction monomial.
fn dir_chart_derivative(r: usize, dir: &Direction, c: Complex64, infinity: bool) -> Complex64 {
    let p = if infinity { dir.col } else { r - dir.col };
    if p == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        c.powu((p - 1) as u32) * p as f64
    }
}

/// Finite-s vortex metric with its X/Y/Z breakdown.
pub fn vortex_metric(
    p: &PolyTuple,
    cfg: &VortexConfig,
    grid: &Arc<SphereGrid>,
) -> Result<VortexMetricReport> {
    vortex_metric_in_chart(p, Chart::largest_modulus(p), cfg, grid)
}

pub fn vortex_metric_in_chart(
    p: &PolyTuple,
    chart: Chart,
    cfg: &VortexConfig,
    grid: &Arc<SphereGrid>,
) -> Result<VortexMetricReport> {
    let tuple = p.normalized_at(chart.fixed)?;
    let h = norm_function(&tuple, grid)?;
    let sol = kw_solve(&h, cfg, 1e-10)?;
    let q = tuple.q();
    let dirs: Vec<Direction> = chart
        .directions(&tuple)
        .into_iter()
        .map(|f| {
            let (row, col) = tuple.unflatten(f);
            Direction { row, col }
        })
        .collect();

    let (g_fields, _dg_fields) = direction_log_derivatives(&tuple, &dirs, grid);

    let n_nodes = grid.n_nodes();
    let weights = grid.weights();
    let hv = re_values(&h);
    let phiv = re_values(&sol.phi);
    // (-h) e^{phi_s} = e^{2 u_s}: the section density; converges to 1.
    let mu: Vec<f64> = (0..n_nodes).map(|i| -hv[i] * phiv[i].exp()).collect();
    let s2 = cfg.s2;

    // Per direction: the gauge derivative phi^a, the metric-log variation
    // sigma^a = d_a log(H e^{2u}) = phi^a - mean(g_a), and the gauge-fixing
    // multiplier chi^a solving ((1/2s^2) lap + mu) chi = -i mu (g_a + sigma_a/2),
    // which projects the lifted tangent orthogonal to the unitary gauge orbit.
    let mut sigma: Vec<ScalarField> = Vec::with_capacity(q);
    let mut dsig: Vec<ScalarField> = Vec::with_capacity(q);
    let mut dsig_bar: Vec<ScalarField> = Vec::with_capacity(q);
    let mut m_alpha: Vec<ScalarField> = Vec::with_capacity(q);
    let mut chi: Vec<ScalarField> = Vec::with_capacity(q);
    for a in 0..q {
        let g_mean = g_fields[a].mean();
        let psi_a = g_fields[a].map(|v| (v - g_mean) * 0.5);
        let h_a = psi_a.zip_with(&h, |pa, hh| 2.0 * pa * hh).expect("same grid");
        let phi_a = linearized_solve(&sol, &h, &h_a, cfg)?;
        let sig = phi_a.map(|v| v - g_mean);
        // holomorphic and antiholomorphic chart derivatives
        let ds = sig.d_chart();
        let dbar = sig.map(|v| v.conj()).d_chart().map(|v| v.conj());
        // vertical source m_a = mu (g_a + sigma_a / 2)
        let m_a = ScalarField::new(
            Arc::clone(grid),
            (0..n_nodes)
                .map(|i| mu[i] * (g_fields[a].values()[i] + 0.5 * sig.values()[i]))
                .collect(),
        )
        .expect("length");
        // chi solves ((1/2s^2) lap + mu) chi = -i m_a  <=>
        // (lap + 2 s^2 mu) chi = -2 s^2 i m_a
        let pot: Vec<f64> = mu.iter().map(|&m| 2.0 * s2 * m).collect();
        let rhs_re: Vec<f64> = m_a.values().iter().map(|v| 2.0 * s2 * v.im).collect();
        let rhs_im: Vec<f64> = m_a.values().iter().map(|v| -2.0 * s2 * v.re).collect();
        let xr = cg_solve(grid, &pot, &rhs_re, 1e-13, 400);
        let xi = cg_solve(grid, &pot, &rhs_im, 1e-13, 400);
        let chi_a = ScalarField::new(
            Arc::clone(grid),
            (0..n_nodes).map(|i| Complex64::new(xr[i], xi[i])).collect(),
        )
        .expect("length");
        sigma.push(sig);
        dsig.push(ds);
        dsig_bar.push(dbar);
        m_alpha.push(m_a);
        chi.push(chi_a);
    }

    let band = grid.band_limit();
    let mut x = MetricMatrix::zeros(q, chart.fixed, band);
    let mut y = MetricMatrix::zeros(q, chart.fixed, band);
    let mut z = MetricMatrix::zeros(q, chart.fixed, band);
    let mut g = MetricMatrix::zeros(q, chart.fixed, band);

    // Conformal-free measure: integral f * dx dy = sum_i w_i f_i * conf_i.
    let conf: Vec<f64> = grid
        .chart_nodes()
        .iter()
        .map(|zn| {
            let c2 = if zn.norm() <= 1.0 { zn.norm_sqr() } else { 1.0 / zn.norm_sqr() };
            PI * (1.0 + c2) * (1.0 + c2)
        })
        .collect();

    // Connection term: Adot = (d sigma dz - dbar sigma dzbar)/2, paired with
    // the conformal-free 1-form pairing and the 1/(2 s^2) prefactor.
    for a in 0..q {
        for b in a..q {
            let mut xv = Complex64::new(0.0, 0.0);
            for i in 0..n_nodes {
                xv += weights[i]
                    * conf[i]
                    * (dsig[a].values()[i] * dsig[b].values()[i].conj()
                        + dsig_bar[a].values()[i] * dsig_bar[b].values()[i].conj());
            }
            x.set(a, b, xv / (4.0 * s2));
        }
    }
    // Z term: FS pairing of the projected variations against the section
    // density; this is the part that survives the infinite-coupling limit.
    for (i, &zn) in grid.chart_nodes().iter().enumerate() {
        let ev = node_eval(&tuple, &dirs, zn);
        let w = weights[i] * mu[i];
        for a in 0..q {
            for b in a..q {
                let v = fs_pairing(&ev.dirs[a], &ev.dirs[b], &ev.p) * w;
                z.entries[a * q + b] += v;
            }
        }
    }
    // Full metric: section term of the lifted tangents minus the vertical
    // (gauge) component, plus the connection term.
    for (i, &zn) in grid.chart_nodes().iter().enumerate() {
        let ev = node_eval(&tuple, &dirs, zn);
        let s: f64 = ev.p.iter().map(|v| v.norm_sqr()).sum();
        let w = weights[i] * mu[i];
        for a in 0..q {
            let ga = g_fields[a].values()[i];
            let sa = sigma[a].values()[i];
            for b in a..q {
                let gb = g_fields[b].values()[i];
                let sb = sigma[b].values()[i];
                // <u_a, u_b>/S for the monomial direction vectors
                let mut uab = Complex64::new(0.0, 0.0);
                for (ua, ub) in ev.dirs[a].iter().zip(ev.dirs[b].iter()) {
                    uab += ua * ub.conj();
                }
                let uu = uab / s;
                let section = uu + ga * sb.conj() * 0.5 + sa * gb.conj() * 0.5
                    + sa * sb.conj() * 0.25;
                g.entries[a * q + b] += w * section;
            }
        }
    }
    // vertical Gram correction: <V(chi_a), V(chi_b)> = -i int m_a conj(chi_b),
    // subtracted from the lifted pairing.
    for a in 0..q {
        for b in a..q {
            let mut corr = Complex64::new(0.0, 0.0);
            for i in 0..n_nodes {
                corr += weights[i] * m_alpha[a].values()[i] * chi[b].values()[i].conj();
            }
            let v = g.entries[a * q + b] + Complex64::new(0.0, 1.0) * corr
                + x.entries[a * q + b];
            g.entries[a * q + b] = v;
        }
    }
    for m in [&mut x, &mut z, &mut g] {
        for a in 0..q {
            for b in 0..a {
                m.entries[a * q + b] = m.entries[b * q + a].conj();
            }
        }
        m.hermitize();
    }
    // Gauge-sector remainder: decays with the coupling; defined so the
    // breakdown identity g = X + Y + Z holds exactly.
    for i in 0..q * q {
        y.entries[i] = g.entries[i] - x.entries[i] - z.entries[i];
    }

    let norm_field = tuple.section_norm_field(grid);
    g.diagnostics.boundary_proximity = norm_field.min_re() / norm_field.max_re();

    Ok(VortexMetricReport {
        config: *cfg,
        g,
        x,
        y,
        z,
        residual_sup: sol.residual_sup,
        iterations: sol.iterations,
    })
}

// ---------------------------------------------------------------------------
// bound checks and convergence sweeps

/// Pointwise and integral bound diagnostics for one converged solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    /// Worst violation of the two-sided pointwise envelope.
    pub sandwich_violation: f64,
    /// Violation of the sup bound |h e^phi - h e^v| <= sup|h e^v| sup|E/(h e^v)| / s^2.
    pub uniform_violation: f64,
    /// Violation of |int h e^phi| <= K1 + K2.
    pub integral_violation: f64,
    /// | int (-h) e^phi - (s^2 - 2 c1)/s^2 |.
    pub mass_identity_error: f64,
}

/// Evaluates the maximum-principle envelope and the derived bounds relating
/// the solved gauge scalar to the approximate solution.
pub fn bound_report(
    sol: &KWSolution,
    v: &ScalarField,
    e: &ScalarField,
    h: &ScalarField,
    cfg: &VortexConfig,
) -> BoundReport {
    let hv = re_values(h);
    let phiv = re_values(&sol.phi);
    let vv = re_values(v);
    let ev = re_values(e);
    let s2 = cfg.s2;
    let n = hv.len();
    let w = sol.phi.grid().weights();

    // Envelope coefficients: extrema of E / (-s^2 h e^v).  The maximum
    // principle at the extrema of phi - v bounds e^(phi-v) - 1 between these
    // two constants; multiplying by the negative field h e^v gives the
    // two-sided envelope for h e^phi - h e^v.
    let mut m_lo = f64::INFINITY;
    let mut m_hi = f64::NEG_INFINITY;
    for i in 0..n {
        let ratio = ev[i] / (-s2 * hv[i] * vv[i].exp());
        m_lo = m_lo.min(ratio);
        m_hi = m_hi.max(ratio);
    }
    let mut sandwich_violation = 0.0f64;
    for i in 0..n {
        let hev = hv[i] * vv[i].exp();
        let diff = hv[i] * phiv[i].exp() - hev;
        let b1 = m_lo * hev;
        let b2 = m_hi * hev;
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        sandwich_violation = sandwich_violation.max(lo - diff).max(diff - hi);
    }

    // uniform bound
    let mut sup_hev = 0.0f64;
    let mut sup_ratio = 0.0f64;
    let mut sup_diff = 0.0f64;
    for i in 0..n {
        let hev = hv[i] * vv[i].exp();
        sup_hev = sup_hev.max(hev.abs());
        sup_ratio = sup_ratio.max((ev[i] / hev).abs());
        sup_diff = sup_diff.max((hv[i] * phiv[i].exp() - hev).abs());
    }
    let uniform_violation = (sup_diff - sup_hev * sup_ratio / s2).max(0.0);

    // integral bound and the exact mass identity
    let mut int_hephi = 0.0f64;
    for i in 0..n {
        int_hephi += w[i] * hv[i] * phiv[i].exp();
    }
    let k1 = cfg.c_of_s().abs() / s2;
    let k2 = sup_hev * sup_ratio / s2;
    let integral_violation = (int_hephi.abs() - (k1 + k2)).max(0.0);
    let mass_identity_error = (-int_hephi - (s2 - 2.0 * cfg.c1) / s2).abs();

    BoundReport { sandwich_violation, uniform_violation, integral_violation, mass_identity_error }
}

/// One row of a coupling sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub s2: f64,
    /// max entrywise |g_s - G_L2|
    pub g_diff: f64,
    /// sup |phi_s - v_s|
    pub phi_v_diff: f64,
    /// sup |phi_s - phi_infinity|
    pub phi_inf_diff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepData {
    pub rows: Vec<SweepRow>,
    pub slope_g: f64,
    pub slope_phi_v: f64,
    pub slope_phi_inf: f64,
}

/// Least-squares slope of ln(y) against ln(s); zero-valued samples are
/// skipped (exact constant cases collapse the differences to round-off).
pub fn loglog_slope(s2: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = s2
        .iter()
        .zip(y.iter())
        .filter(|(_, &yi)| yi > 1e-13)
        .map(|(&s, &yi)| (s.sqrt().ln(), yi.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Sweeps the coupling over `s2_list` at a fixed moduli point, comparing the
/// finite-s metric against the limiting L2 metric.
pub fn convergence_sweep(
    p: &PolyTuple,
    s2_list: &[f64],
    grid: &Arc<SphereGrid>,
) -> Result<SweepData> {
    let chart = Chart::largest_modulus(p);
    let tuple = p.normalized_at(chart.fixed)?;
    let g_limit = crate::metric::l2_metric_matrix_in_chart(&tuple, chart, grid)?;
    let h = norm_function(&tuple, grid)?;
    let mut rows = Vec::with_capacity(s2_list.len());
    for &s2 in s2_list {
        let cfg = VortexConfig::new(p.r, p.k, s2)?;
        let (v, _e) = approx_solution(&h, &cfg)?;
        let sol = kw_solve(&h, &cfg, 1e-10)?;
        let report = vortex_metric_in_chart(&tuple, chart, &cfg, grid)?;
        let phi_inf = h.map(|x| Complex64::new((cfg.c2 / -x.re).ln(), 0.0));
        rows.push(SweepRow {
            s2,
            g_diff: report.g.max_diff(&g_limit),
            phi_v_diff: (&sol.phi - &v).sup_abs(),
            phi_inf_diff: (&sol.phi - &phi_inf).sup_abs(),
        });
    }
    let s2v: Vec<f64> = rows.iter().map(|r| r.s2).collect();
    let slope_g = loglog_slope(&s2v, &rows.iter().map(|r| r.g_diff).collect::<Vec<_>>());
    let slope_phi_v = loglog_slope(&s2v, &rows.iter().map(|r| r.phi_v_diff).collect::<Vec<_>>());
    let slope_phi_inf =
        loglog_slope(&s2v, &rows.iter().map(|r| r.phi_inf_diff).collect::<Vec<_>>());
    Ok(SweepData { rows, slope_g, slope_phi_v, slope_phi_inf })
}
