//! Holomorphic maps from the sphere to CP^k as tuples of polynomials.
//!
//! A map `[p_0 : ... : p_k]` of degree r is stored as a `(k+1) x (r+1)`
//! coefficient matrix in descending powers: `coeffs[i][j]` multiplies
//! `z^(r-j)`.  Reading a row in reverse gives the polynomial in the opposite
//! chart `w = 1/z` (the representative `w^r p(1/w)`), which keeps every
//! evaluation well conditioned on the whole sphere.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{deflate, horner, polynomial_roots};
use crate::sphere::{ScalarField, SphereGrid};

/// Root clustering tolerance for common-factor extraction (relative).
pub const TAU_ROOT: f64 = 1e-9;
/// Singularity guard for interior checks (relative).
pub const TAU_SING: f64 = 1e-12;

/// A point of the source sphere: a chart coordinate or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Chart(Complex64),
    Infinity,
}

/// An effective divisor on the sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Divisor {
    pub points: Vec<(SpherePoint, usize)>,
}

impl Divisor {
    pub fn empty() -> Self {
        Divisor { points: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }
}

/// JSON form of a complex number: `{"re": .., "im": ..}`.
pub mod complex_json {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Cx {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(v: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Cx { re: v.re, im: v.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let c = Cx::deserialize(d)?;
        Ok(Complex64::new(c.re, c.im))
    }

    pub mod matrix {
        use super::Cx;
        use num_complex::Complex64;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &Vec<Vec<Complex64>>, s: S) -> Result<S::Ok, S::Error> {
            let rows: Vec<Vec<Cx>> = v
                .iter()
                .map(|row| row.iter().map(|c| Cx { re: c.re, im: c.im }).collect())
                .collect();
            rows.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
            let rows: Vec<Vec<Cx>> = Vec::deserialize(d)?;
            Ok(rows
                .into_iter()
                .map(|row| row.into_iter().map(|c| Complex64::new(c.re, c.im)).collect())
                .collect())
        }
    }
}

/// Polynomial tuple representing a holomorphic map and a chart point of the
/// compactified moduli space CP^q.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyTuple {
    pub k: usize,
    pub r: usize,
    /// Row i holds the coefficients of p_i in descending powers of z.
    #[serde(with = "complex_json::matrix")]
    pub coeffs: Vec<Vec<Complex64>>,
}

impl PolyTuple {
    pub fn new(k: usize, r: usize, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidInput("target dimension k must be >= 1".into()));
        }
        if coeffs.len() != k + 1 || coeffs.iter().any(|row| row.len() != r + 1) {
            return Err(Error::InvalidInput(format!(
                "coefficient matrix must be {}x{}",
                k + 1,
                r + 1
            )));
        }
        let tuple = PolyTuple { k, r, coeffs };
        if tuple.max_coeff_norm() == 0.0 {
            return Err(Error::DegenerateTuple);
        }
        Ok(tuple)
    }

    /// The standard degree-r map: row i carries the single monomial
    /// z^(round(r*(k-i)/k)), interpolating between z^r and 1 so that the
    /// rows never share a zero.
    pub fn standard(k: usize, r: usize) -> Self {
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); r + 1]; k + 1];
        for (i, row) in coeffs.iter_mut().enumerate() {
            let power = ((k - i) * r + k / 2) / k;
            row[r - power] = Complex64::new(1.0, 0.0);
        }
        PolyTuple { k, r, coeffs }
    }

    pub fn n_coeffs(&self) -> usize {
        (self.k + 1) * (self.r + 1)
    }

    /// Moduli dimension q = (k+1)(r+1) - 1.
    pub fn q(&self) -> usize {
        self.n_coeffs() - 1
    }

    #[inline]
    pub fn flat_index(&self, row: usize, col: usize) -> usize {
        row * (self.r + 1) + col
    }

    #[inline]
    pub fn unflatten(&self, flat: usize) -> (usize, usize) {
        (flat / (self.r + 1), flat % (self.r + 1))
    }

    pub fn coeff_flat(&self, flat: usize) -> Complex64 {
        let (i, j) = self.unflatten(flat);
        self.coeffs[i][j]
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|row| row.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Flat index of the largest-modulus coefficient (first on ties).
    pub fn argmax_coeff(&self) -> usize {
        let mut best = 0usize;
        let mut best_norm = -1.0f64;
        for i in 0..=self.k {
            for j in 0..=self.r {
                let n = self.coeffs[i][j].norm();
                if n > best_norm {
                    best_norm = n;
                    best = self.flat_index(i, j);
                }
            }
        }
        best
    }

    /// Rescales all coefficients so that the given flat entry becomes 1.
    pub fn normalized_at(&self, flat: usize) -> Result<PolyTuple> {
        let pivot = self.coeff_flat(flat);
        if pivot.norm() == 0.0 {
            return Err(Error::InvalidIndex("chart coefficient vanishes".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| row.iter().map(|c| c / pivot).collect())
            .collect();
        Ok(PolyTuple { k: self.k, r: self.r, coeffs })
    }

    /// Homogeneous evaluation (p_0(z), ..., p_k(z)).
    pub fn evaluate(&self, z: Complex64) -> Vec<Complex64> {
        self.coeffs.iter().map(|row| horner(row, z)).collect()
    }

    /// Evaluation of the opposite-chart representative w^r p(1/w): the rows
    /// read in reversed (ascending) order.
    pub fn evaluate_infinity_chart(&self, w: Complex64) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|row| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &c in row.iter().rev() {
                    acc = acc * w + c;
                }
                acc
            })
            .collect()
    }

    /// Values and chart derivatives of the representative in the node's
    /// well-conditioned chart: `(p(c), p'(c))` where c = z for |z| <= 1 and
    /// c = 1/z (reversed rows) otherwise.
    pub fn eval_good_chart(&self, z: Complex64) -> (Vec<Complex64>, Vec<Complex64>, Complex64) {
        if z.norm() <= 1.0 {
            let vals = self.evaluate(z);
            let ders = self
                .coeffs
                .iter()
                .map(|row| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let n = row.len();
                    for (j, &c) in row.iter().take(n - 1).enumerate() {
                        let pow = (self.r - j) as f64;
                        acc = acc * z + c * pow;
                    }
                    acc
                })
                .collect();
            (vals, ders, z)
        } else {
            let w = Complex64::new(1.0, 0.0) / z;
            let vals = self.evaluate_infinity_chart(w);
            let ders = self
                .coeffs
                .iter()
                .map(|row| {
                    // derivative of sum_j c_j w^j is sum_{j>=1} j c_j w^{j-1}
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in (1..row.len()).rev() {
                        acc = acc * w + row[j] * j as f64;
                    }
                    acc
                })
                .collect();
            (vals, ders, w)
        }
    }

    /// Degree of row i with a relative coefficient tolerance; None for a zero row.
    fn row_degree(&self, i: usize, tol: f64) -> Option<usize> {
        let scale = self.max_coeff_norm();
        for j in 0..=self.r {
            if self.coeffs[i][j].norm() > tol * scale {
                return Some(self.r - j);
            }
        }
        None
    }

    /// Common-root reduction: extracts the greatest common divisor of the
    /// rows (including the root at infinity carried by jointly deficient
    /// degrees) and returns it with the reduced tuple.
    pub fn reduce(&self) -> Result<(Divisor, PolyTuple)> {
        let scale = self.max_coeff_norm();
        if scale == 0.0 {
            return Err(Error::DegenerateTuple);
        }
        // Multiplicity of the root at infinity: leading columns that vanish
        // in every row.
        let mut inf_mult = 0usize;
        'cols: for j in 0..self.r {
            for i in 0..=self.k {
                if self.coeffs[i][j].norm() > TAU_ROOT * scale {
                    break 'cols;
                }
            }
            inf_mult = j + 1;
        }

        // Work on trimmed descending rows.
        let mut rows: Vec<Vec<Complex64>> = self
            .coeffs
            .iter()
            .map(|row| row[inf_mult..].to_vec())
            .collect();
        let mut divisor_points: Vec<(Complex64, usize)> = Vec::new();

        // Repeatedly peel simple common roots; multiplicities accumulate.
        loop {
            let nonzero: Vec<usize> = (0..rows.len())
                .filter(|&i| rows[i].iter().any(|c| c.norm() > TAU_ROOT * scale))
                .collect();
            if nonzero.is_empty() {
                return Err(Error::DegenerateTuple);
            }
            // Candidates from the lowest-degree nonzero row.
            let pivot = *nonzero
                .iter()
                .min_by_key(|&&i| rows[i].len())
                .unwrap();
            let pivot_roots = polynomial_roots(&rows[pivot]);
            if pivot_roots.is_empty() {
                break;
            }
            let mut found = None;
            'cand: for cand in &pivot_roots {
                let tol = TAU_ROOT * (1.0 + cand.norm());
                for &i in &nonzero {
                    let val = horner(&rows[i], *cand);
                    let row_scale = rows[i].iter().map(|c| c.norm()).fold(0.0, f64::max);
                    // Cheap membership check via nearest root of the row.
                    let roots_i = polynomial_roots(&rows[i]);
                    let near = roots_i.iter().any(|r| (r - cand).norm() < tol * 10.0);
                    if !near && val.norm() > 1e-7 * row_scale {
                        continue 'cand;
                    }
                }
                found = Some(*cand);
                break;
            }
            let Some(root) = found else { break };
            // Polish the root location to the mean of the matched row roots.
            let tol = TAU_ROOT * (1.0 + root.norm());
            let mut acc = Complex64::new(0.0, 0.0);
            let mut cnt = 0usize;
            for &i in &nonzero {
                let roots_i = polynomial_roots(&rows[i]);
                if let Some(r) = roots_i
                    .iter()
                    .min_by(|a, b| (*a - root).norm().partial_cmp(&(*b - root).norm()).unwrap())
                {
                    if (r - root).norm() < tol * 10.0 {
                        acc += r;
                        cnt += 1;
                    }
                }
            }
            let root = if cnt > 0 { acc / cnt as f64 } else { root };
            for i in 0..rows.len() {
                if rows[i].iter().any(|c| c.norm() > 0.0) {
                    let (q, _rem) = deflate(&rows[i], root);
                    rows[i] = q;
                }
            }
            if let Some(entry) = divisor_points
                .iter_mut()
                .find(|(p, _)| (*p - root).norm() < TAU_ROOT * 100.0 * (1.0 + root.norm()))
            {
                entry.1 += 1;
            } else {
                divisor_points.push((root, 1));
            }
        }

        let finite_deg: usize = divisor_points.iter().map(|(_, m)| m).sum();
        let total = inf_mult + finite_deg;
        let new_r = self.r - total;
        let cols = new_r + 1;
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); cols]; self.k + 1];
        for i in 0..=self.k {
            // Rows were deflated from length r+1-inf_mult down to cols.
            let row = &rows[i];
            let offset = cols.saturating_sub(row.len());
            for (j, &c) in row.iter().enumerate() {
                coeffs[i][offset + j] = c;
            }
        }
        let mut points: Vec<(SpherePoint, usize)> = divisor_points
            .into_iter()
            .map(|(z, m)| (SpherePoint::Chart(z), m))
            .collect();
        if inf_mult > 0 {
            points.push((SpherePoint::Infinity, inf_mult));
        }
        let reduced = PolyTuple::new(self.k, new_r, coeffs)?;
        Ok((Divisor { points }, reduced))
    }

    /// The globally smooth section norm n(z) = sum_i |p_i(z)|^2 / (1+|z|^2)^r.
    pub fn section_norm_field(&self, grid: &Arc<SphereGrid>) -> ScalarField {
        ScalarField::from_fn(Arc::clone(grid), |_, _, z| {
            Complex64::new(self.section_norm_at(z), 0.0)
        })
    }

    pub fn section_norm_at(&self, z: Complex64) -> f64 {
        let (vals, _, c) = self.eval_good_chart(z);
        let s: f64 = vals.iter().map(|v| v.norm_sqr()).sum();
        s / (1.0 + c.norm_sqr()).powi(self.r as i32)
    }

    fn interior_guard(&self, grid: &Arc<SphereGrid>) -> Result<(f64, f64)> {
        let n = self.section_norm_field(grid);
        let min = n.min_re();
        let max = n.max_re();
        if min <= TAU_SING * max {
            return Err(Error::SingularField { min, max });
        }
        Ok((min, max))
    }

    /// Pointwise curvature contraction of the pullback metric; integrates to
    /// 2*pi*r for interior tuples.
    pub fn curvature_at(&self, z: Complex64) -> f64 {
        let (vals, ders, c) = self.eval_good_chart(z);
        let s: f64 = vals.iter().map(|v| v.norm_sqr()).sum();
        let s1: f64 = ders.iter().map(|v| v.norm_sqr()).sum();
        let sc: Complex64 = ders
            .iter()
            .zip(vals.iter())
            .map(|(d, p)| d * p.conj())
            .sum();
        let density = (s1 * s - sc.norm_sqr()) / (s * s);
        2.0 * PI * (1.0 + c.norm_sqr()).powi(2) * density
    }

    /// The field sqrt(-1) Lambda F_H of the pullback metric.
    pub fn curvature_field(&self, grid: &Arc<SphereGrid>) -> Result<ScalarField> {
        self.interior_guard(grid)?;
        Ok(ScalarField::from_fn(Arc::clone(grid), |_, _, z| {
            Complex64::new(self.curvature_at(z), 0.0)
        }))
    }

    /// Harmonic-map energy; equals the quadrature of the curvature density
    /// and is constant (2*pi*r) across interior maps of the same degree.
    pub fn energy(&self, grid: &Arc<SphereGrid>) -> Result<f64> {
        self.interior_guard(grid)?;
        let f = ScalarField::from_fn(Arc::clone(grid), |_, _, z| {
            Complex64::new(self.curvature_at(z), 0.0)
        });
        Ok(f.integrate().re)
    }

    /// Energy with the band limit doubled until the relative change drops
    /// below 1e-8 (or the cap is hit).
    pub fn energy_converged(&self, l_start: usize) -> Result<f64> {
        let mut l = l_start.max(8);
        let mut prev = self.energy(&SphereGrid::new(l))?;
        while l < 256 {
            l *= 2;
            let next = self.energy(&SphereGrid::new(l))?;
            if (next - prev).abs() <= 1e-8 * prev.abs().max(1.0) {
                return Ok(next);
            }
            prev = next;
        }
        Ok(prev)
    }
}

/// Affine chart of the moduli CP^q: one coefficient frozen to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    /// Flat index of the frozen coefficient.
    pub fixed: usize,
}

impl Chart {
    pub fn largest_modulus(p: &PolyTuple) -> Chart {
        Chart { fixed: p.argmax_coeff() }
    }

    /// Chart coordinate slots in canonical (row-major) order.
    pub fn directions(&self, p: &PolyTuple) -> Vec<usize> {
        (0..p.n_coeffs()).filter(|&f| f != self.fixed).collect()
    }
}

/// A chart direction: the unit monomial e_row * z^(r - col).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Direction {
    pub row: usize,
    pub col: usize,
}

/// The coordinate vector field for a chart coefficient slot.
///
/// Rejects the chart-fixed slot: it is not a coordinate of the affine chart.
pub fn variation(p: &PolyTuple, chart: Chart, flat: usize) -> Result<Direction> {
    if flat >= p.n_coeffs() {
        return Err(Error::InvalidIndex(format!("coefficient index {flat} out of range")));
    }
    if flat == chart.fixed {
        return Err(Error::InvalidIndex("chart-fixed coefficient has no variation".into()));
    }
    let (row, col) = p.unflatten(flat);
    Ok(Direction { row, col })
}

impl Direction {
    /// Value of the direction at a point of the good chart: `z^(r-col)` in
    /// the finite chart, `w^col` in the infinity chart (the shared rescaling
    /// with the tuple representative cancels in all metric integrands).
    pub fn eval_chart(&self, r: usize, c: Complex64, infinity_chart: bool) -> Complex64 {
        if infinity_chart {
            c.powu(self.col as u32)
        } else {
            c.powu((r - self.col) as u32)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity_11() -> PolyTuple {
        // rows (1,0),(0,1) in descending powers: p_0 = z, p_1 = 1.
        PolyTuple::new(1, 1, vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]])
            .unwrap()
    }

    #[test]
    fn evaluate_matches_direct_substitution() {
        let p = identity_11();
        let v = p.evaluate(c(2.0, 0.0));
        assert_eq!(v, vec![c(2.0, 0.0), c(1.0, 0.0)]);

        let p2 = PolyTuple::new(
            1,
            2,
            vec![
                vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            ],
        )
        .unwrap();
        let v2 = p2.evaluate(c(3.0, 0.0));
        assert_eq!(v2, vec![c(9.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn scaling_is_projective() {
        let p = identity_11();
        let lambda = c(0.3, -1.2);
        let scaled = PolyTuple::new(
            1,
            1,
            p.coeffs.iter().map(|row| row.iter().map(|&x| x * lambda).collect()).collect(),
        )
        .unwrap();
        for z in [c(0.5, 0.2), c(-2.0, 1.0)] {
            let a = p.evaluate(z);
            let b = scaled.evaluate(z);
            // same projective point: cross-ratio of components equal
            assert!((a[0] * b[1] - a[1] * b[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn variation_is_linear_in_coefficients() {
        let p = identity_11();
        let chart = Chart { fixed: 0 };
        let dir = variation(&p, chart, 2).unwrap(); // row 1, col 0 -> z^1
        let eps = 1e-3;
        let mut bumped = p.clone();
        bumped.coeffs[dir.row][dir.col] += c(eps, 0.0);
        for z in [c(0.7, 0.1), c(-0.2, 0.4)] {
            let a = p.evaluate(z);
            let b = bumped.evaluate(z);
            let d = dir.eval_chart(p.r, z, false);
            assert!((b[dir.row] - a[dir.row] - d * eps).norm() < 1e-14);
        }
        // chart-fixed slot rejected
        assert!(variation(&p, chart, 0).is_err());
    }

    #[test]
    fn chart_directions_for_identity() {
        let p = identity_11();
        let chart = Chart { fixed: p.flat_index(0, 0) };
        let dirs = chart.directions(&p);
        assert_eq!(dirs.len(), 3);
        let pairs: Vec<(usize, usize)> = dirs.iter().map(|&f| p.unflatten(f)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn reduce_coprime_is_identity() {
        let p = identity_11();
        let (div, red) = p.reduce().unwrap();
        assert_eq!(div.degree(), 0);
        assert_eq!(red.r, 1);
        for i in 0..=1 {
            for j in 0..=1 {
                assert!((red.coeffs[i][j] - p.coeffs[i][j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn reduce_extracts_constructed_common_factor() {
        // identity rows multiplied by (z - 1): p_0 = z(z-1), p_1 = z - 1.
        let p = PolyTuple::new(
            1,
            2,
            vec![
                vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)],
            ],
        )
        .unwrap();
        let (div, red) = p.reduce().unwrap();
        assert_eq!(div.degree(), 1);
        match div.points[0].0 {
            SpherePoint::Chart(z) => assert!((z - c(1.0, 0.0)).norm() < 1e-9),
            SpherePoint::Infinity => panic!("expected finite root"),
        }
        assert_eq!(red.r, 1);
        assert!((red.coeffs[0][0] - c(1.0, 0.0)).norm() < 1e-9);
        assert!((red.coeffs[0][1]).norm() < 1e-9);
        assert!((red.coeffs[1][0]).norm() < 1e-9);
        assert!((red.coeffs[1][1] - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn reduce_detects_root_at_infinity() {
        // Both rows of degree < r: infinity carries multiplicity 1.
        let p = PolyTuple::new(
            1,
            2,
            vec![
                vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            ],
        )
        .unwrap();
        let (div, red) = p.reduce().unwrap();
        assert_eq!(div.degree(), 1);
        assert!(matches!(div.points[0].0, SpherePoint::Infinity));
        assert_eq!(red.r, 1);
    }

    /// Independent oracle: tolerance-based Euclidean GCD degree for a pair.
    /// The trim tolerance is anchored to the input scale so that numerically
    /// zero remainders terminate the recursion.
    fn gcd_degree_euclid(a: &[Complex64], b: &[Complex64]) -> usize {
        let scale0 = a
            .iter()
            .chain(b.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(1e-300);
        let trim = |v: &[Complex64]| -> Vec<Complex64> {
            match v.iter().position(|c| c.norm() > 1e-9 * scale0) {
                Some(s) => v[s..].to_vec(),
                None => vec![],
            }
        };
        let mut f = trim(a);
        let mut g = trim(b);
        if f.len() < g.len() {
            std::mem::swap(&mut f, &mut g);
        }
        while !g.is_empty() {
            // remainder of f / g
            let mut rem = f.clone();
            while rem.len() >= g.len() {
                let q = rem[0] / g[0];
                for (i, &gc) in g.iter().enumerate() {
                    rem[i] -= q * gc;
                }
                rem = trim(&rem[1..]);
                if rem.is_empty() {
                    break;
                }
            }
            f = g;
            g = rem;
        }
        f.len().saturating_sub(1)
    }

    #[test]
    fn reduce_matches_gcd_oracle_on_shared_quadratic() {
        // Two degree-3 rows sharing a quadratic factor.
        let shared = [c(1.0, 0.0), c(-0.9, 0.4), c(0.35, -0.2)]; // z^2 + ...
        let f1 = [c(1.0, 0.0), c(0.7, -0.3)];
        let f2 = [c(1.0, 0.0), c(-1.4, 0.8)];
        fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
            let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        }
        let row0 = mul(&shared, &f1);
        let row1 = mul(&shared, &f2);
        let oracle = gcd_degree_euclid(&row0, &row1);
        assert_eq!(oracle, 2);

        let p = PolyTuple::new(1, 3, vec![row0, row1]).unwrap();
        let (div, red) = p.reduce().unwrap();
        assert_eq!(div.degree(), 2);
        assert_eq!(red.r, 1);
        assert_eq!(div.degree() + red.r, p.r);
    }

    #[test]
    fn section_norm_identity_is_constant_one() {
        let g = SphereGrid::new(8);
        let p = identity_11();
        let n = p.section_norm_field(&g);
        for v in n.values() {
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn section_norm_vanishes_at_common_root() {
        // rows with common root z = 1
        let p = PolyTuple::new(
            1,
            2,
            vec![
                vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)],
            ],
        )
        .unwrap();
        assert!(p.section_norm_at(c(1.0, 0.0)) < 1e-14);
    }

    #[test]
    fn section_norm_positive_for_coprime_tuple_with_root_oracle() {
        let g = SphereGrid::new(12);
        let p = PolyTuple::new(
            1,
            2,
            vec![
                vec![c(1.0, 0.2), c(-0.3, 0.4), c(0.8, 0.0)],
                vec![c(0.1, -0.5), c(1.1, 0.3), c(-0.4, 0.7)],
            ],
        )
        .unwrap();
        // Root oracle: the rows share no roots.
        let r0 = polynomial_roots(&p.coeffs[0]);
        let r1 = polynomial_roots(&p.coeffs[1]);
        for a in &r0 {
            for b in &r1 {
                assert!((a - b).norm() > 1e-3);
            }
        }
        let n = p.section_norm_field(&g);
        assert!(n.min_re() > 0.0);
    }

    #[test]
    fn curvature_identity_is_two_pi() {
        let g = SphereGrid::new(8);
        let p = identity_11();
        let f = p.curvature_field(&g).unwrap();
        for v in f.values() {
            assert_abs_diff_eq!(v.re, 2.0 * PI, epsilon = 1e-10);
        }
    }

    #[test]
    fn curvature_integral_is_chern_number() {
        // Moderately interior tuple: converged at L = 32.  Tuples closer to
        // the boundary need the L-refinement policy (see energy_converged).
        let g = SphereGrid::new(32);
        let p = PolyTuple::new(
            1,
            2,
            vec![
                vec![c(1.0, 0.2), c(-0.3, 0.4), c(0.8, 0.0)],
                vec![c(0.1, -0.5), c(1.1, 0.3), c(-0.4, 0.7)],
            ],
        )
        .unwrap();
        let mut l = 32;
        let mut prev = p.curvature_field(&SphereGrid::new(l)).unwrap().integrate().re;
        while l < 256 {
            l *= 2;
            let next = p.curvature_field(&SphereGrid::new(l)).unwrap().integrate().re;
            if (next - prev).abs() < 1e-9 {
                break;
            }
            prev = next;
        }
        let _ = g;
        assert_abs_diff_eq!(prev, 2.0 * PI * 2.0, epsilon = 1e-8);
    }

    #[test]
    fn extended_curvature_agrees_after_reduction() {
        // Family with an exact common factor (z - a): away from a the full
        // and reduced curvature densities agree in closed form.
        let a = c(0.6, -0.3);
        let q = identity_11();
        let p = PolyTuple::new(
            1,
            2,
            vec![
                vec![c(1.0, 0.0), -a, c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0), -a],
            ],
        )
        .unwrap(); // rows = (z - a) * (z, 1)
        let (div, red) = p.reduce().unwrap();
        assert_eq!(div.degree(), 1);
        for z in [c(-0.8, 0.1), c(0.2, 0.9), c(2.0, -1.0)] {
            let full = p.curvature_at(z);
            let reduced = red.curvature_at(z);
            let direct = q.curvature_at(z);
            assert_abs_diff_eq!(full, reduced, epsilon = 1e-9);
            assert_abs_diff_eq!(reduced, direct, epsilon = 1e-9);
        }
    }

    #[test]
    fn energy_constant_in_degree() {
        let g = SphereGrid::new(20);
        let p1 = identity_11();
        let e1 = p1.energy(&g).unwrap();
        assert_abs_diff_eq!(e1, 2.0 * PI, epsilon = 1e-10);

        let other = PolyTuple::new(
            1,
            1,
            vec![vec![c(0.9, 0.3), c(0.2, -0.1)], vec![c(-0.4, 0.2), c(1.0, 0.5)]],
        )
        .unwrap();
        let e2 = other.energy_converged(16).unwrap();
        assert_abs_diff_eq!(e2, e1, epsilon = 1e-8 * e1);

        let p2 = PolyTuple::standard(1, 2);
        let e3 = p2.energy_converged(16).unwrap();
        assert_abs_diff_eq!(e3, 2.0 * e1, epsilon = 1e-8 * e3);
    }

    #[test]
    fn reduce_is_idempotent_and_additive() {
        let p = PolyTuple::new(
            1,
            3,
            vec![
                vec![c(1.0, 0.1), c(0.4, -0.2), c(-0.7, 0.3), c(0.2, 0.0)],
                vec![c(0.3, -0.4), c(1.2, 0.0), c(0.1, 0.5), c(-0.6, 0.2)],
            ],
        )
        .unwrap();
        let (div, red) = p.reduce().unwrap();
        assert_eq!(div.degree() + red.r, p.r);
        let (div2, red2) = red.reduce().unwrap();
        assert_eq!(div2.degree(), 0);
        assert_eq!(red2.r, red.r);
    }

    #[test]
    fn json_round_trip_matches_schema() {
        let p = identity_11();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"k\":1"));
        assert!(s.contains("\"r\":1"));
        assert!(s.contains("\"coeffs\""));
        assert!(s.contains("\"re\":"));
        assert!(s.contains("\"im\":"));
        let back: PolyTuple = serde_json::from_str(&s).unwrap();
        assert_eq!(back.coeffs, p.coeffs);
    }

    #[test]
    fn degenerate_tuple_rejected() {
        let z = vec![vec![c(0.0, 0.0); 2]; 2];
        assert!(matches!(PolyTuple::new(1, 1, z), Err(Error::DegenerateTuple)));
    }
}
