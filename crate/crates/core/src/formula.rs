//! Exact evaluation of the closed volume formulas for all genera: the
//! limiting volume (k+1)^b / q!, the finite-coupling volume
//!
//! ```text
//!   Vol(s) = sum_{i=0}^{b}  b! (k+1)^(b-i) / (i! (q-i)! (b-i)!)
//!            * (4 pi / s^2)^i * (Vol - 4 pi r / s^2)^(q-i),
//! ```
//!
//! and the dimension counts.  Arithmetic is exact big-rational whenever the
//! inputs allow (s^2 a rational multiple of pi, rational surface volume).

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Validated formula inputs with the derived dimensions.
#[derive(Debug, Clone)]
pub struct FormulaInput {
    pub b: usize,
    pub r: usize,
    pub k: usize,
    /// s^2, when a finite-coupling volume is requested.
    pub s2: Option<f64>,
    pub vol_sigma: f64,
    /// q = b + (k+1)(r+1-b) - 1.
    pub q: usize,
    /// m = (k+1) r - k (b-1).
    pub m: i64,
}

impl FormulaInput {
    pub fn new(b: usize, r: usize, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidGenusDegree("target dimension k must be >= 1".into()));
        }
        if r < 1 {
            return Err(Error::InvalidGenusDegree(format!("degree r = {r} must be >= 1")));
        }
        // Line bundles of degree r on a genus-b surface need r > 2b - 2 for
        // the moduli description to apply.
        if (r as i64) <= 2 * b as i64 - 2 {
            return Err(Error::InvalidGenusDegree(format!(
                "degree r = {r} must exceed 2b - 2 = {}",
                2 * b as i64 - 2
            )));
        }
        let q_i = b as i64 + (k as i64 + 1) * (r as i64 + 1 - b as i64) - 1;
        if q_i < 1 {
            return Err(Error::InvalidGenusDegree(format!(
                "moduli dimension q = {q_i} must be >= 1"
            )));
        }
        let m = (k as i64 + 1) * r as i64 - k as i64 * (b as i64 - 1);
        Ok(FormulaInput { b, r, k, s2: None, vol_sigma: 1.0, q: q_i as usize, m })
    }

    pub fn with_s2(mut self, s2: f64) -> Self {
        self.s2 = Some(s2);
        self
    }

    pub fn with_vol_sigma(mut self, vol: f64) -> Self {
        self.vol_sigma = vol;
        self
    }
}

fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Limiting volume (k+1)^b / q!, exactly.
pub fn main_volume(inp: &FormulaInput) -> Result<BigRational> {
    let num = BigInt::from(inp.k as i64 + 1).pow(inp.b as u32);
    Ok(BigRational::new(num, factorial(inp.q)))
}

/// Complex dimension of the moduli of maps: (k+1) r - k (b-1).
pub fn dim_hol(inp: &FormulaInput) -> i64 {
    inp.m
}

/// Dimension of the stratum whose divisor has degree l: k(r-b+1) + r - k l.
pub fn strata_dim(inp: &FormulaInput, l: usize) -> Result<i64> {
    if l > inp.r {
        return Err(Error::InvalidIndex(format!("stratum index {l} exceeds degree {}", inp.r)));
    }
    Ok(inp.k as i64 * (inp.r as i64 - inp.b as i64 + 1) + inp.r as i64
        - (inp.k * l) as i64)
}

/// Finite-coupling volume, exact-rational form.  `s2_over_pi` is s^2/pi and
/// `vol_sigma` the surface volume, both rational; requires the stability
/// bound s^2 >= 4 pi r / vol.
pub fn baptista_volume_exact(
    inp: &FormulaInput,
    s2_over_pi: &BigRational,
    vol_sigma: &BigRational,
) -> Result<BigRational> {
    // 4 pi / s^2 = 4 / (s^2/pi), exactly rational in these units.
    if s2_over_pi.is_zero() || s2_over_pi.is_negative() {
        return Err(Error::Domain("s^2 must be positive".into()));
    }
    let four_pi_over_s2 = BigRational::from_integer(BigInt::from(4)) / s2_over_pi;
    let depletion = vol_sigma - &four_pi_over_s2 * BigInt::from(inp.r as i64);
    if depletion.is_negative() {
        return Err(Error::BradlowViolation {
            s2: s2_over_pi.to_f64().unwrap_or(f64::NAN) * PI,
            bound: 4.0 * PI * inp.r as f64 / vol_sigma.to_f64().unwrap_or(1.0),
        });
    }
    let mut total = BigRational::zero();
    let b = inp.b;
    let q = inp.q;
    for i in 0..=b {
        if i > q {
            continue;
        }
        let coeff = BigRational::new(
            factorial(b) * BigInt::from(inp.k as i64 + 1).pow((b - i) as u32),
            factorial(i) * factorial(q - i) * factorial(b - i),
        );
        let term = coeff
            * pow_rational(&four_pi_over_s2, i)
            * pow_rational(&depletion, q - i);
        total += term;
    }
    Ok(total)
}

fn pow_rational(x: &BigRational, n: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Finite-coupling volume in floating point for arbitrary s^2.
pub fn baptista_volume(inp: &FormulaInput) -> Result<f64> {
    let s2 = inp
        .s2
        .ok_or_else(|| Error::InvalidInput("finite-coupling volume needs s^2".into()))?;
    let vol = inp.vol_sigma;
    let bound = 4.0 * PI * inp.r as f64 / vol;
    if s2 < bound {
        return Err(Error::BradlowViolation { s2, bound });
    }
    let four_pi_over_s2 = 4.0 * PI / s2;
    let depletion = vol - four_pi_over_s2 * inp.r as f64;
    let mut total = 0.0f64;
    for i in 0..=inp.b.min(inp.q) {
        let coeff = factorial(inp.b).to_f64().unwrap()
            * ((inp.k + 1) as f64).powi((inp.b - i) as i32)
            / (factorial(i).to_f64().unwrap()
                * factorial(inp.q - i).to_f64().unwrap()
                * factorial(inp.b - i).to_f64().unwrap());
        total += coeff * four_pi_over_s2.powi(i as i32) * depletion.powi((inp.q - i) as i32);
    }
    Ok(total)
}

/// Algebraic large-coupling limit of the finite-s volume: only the i = 0
/// term survives, leaving (k+1)^b / q! * vol^q.
pub fn baptista_limit(inp: &FormulaInput, vol_sigma: &BigRational) -> Result<BigRational> {
    let coeff = BigRational::new(
        BigInt::from(inp.k as i64 + 1).pow(inp.b as u32),
        factorial(inp.q),
    );
    Ok(coeff * pow_rational(vol_sigma, inp.q))
}

/// Pretty decimal + exact display of a rational.
pub fn rational_display(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn main_volume_pinned_values() {
        let v = main_volume(&FormulaInput::new(0, 1, 1).unwrap()).unwrap();
        assert_eq!(v, rat(1, 6));
        let v = main_volume(&FormulaInput::new(0, 1, 2).unwrap()).unwrap();
        assert_eq!(v, rat(1, 120));
        // (b,r,k) = (1,2,1): q = 1 + 2*2 - 1 = 4, volume 2/24 = 1/12.
        let v = main_volume(&FormulaInput::new(1, 2, 1).unwrap()).unwrap();
        assert_eq!(v, rat(1, 12));
    }

    #[test]
    fn degree_constraint() {
        assert!(FormulaInput::new(2, 2, 1).is_err()); // r = 2b-2
        assert!(FormulaInput::new(2, 3, 1).is_ok());
        assert!(FormulaInput::new(0, 0, 1).is_err());
    }

    #[test]
    fn baptista_exact_values() {
        // (0,1,1) at s^2 = 16 pi: (1/6)(3/4)^3 = 27/384.
        let inp = FormulaInput::new(0, 1, 1).unwrap();
        let v = baptista_volume_exact(&inp, &rat(16, 1), &rat(1, 1)).unwrap();
        assert_eq!(v, rat(27, 384));
        // saturation: s^2 = 4 pi gives zero.
        let v0 = baptista_volume_exact(&inp, &rat(4, 1), &rat(1, 1)).unwrap();
        assert!(v0.is_zero());
        // below the bound: rejected.
        assert!(baptista_volume_exact(&inp, &rat(3, 1), &rat(1, 1)).is_err());
    }

    #[test]
    fn baptista_f64_matches_exact() {
        let inp = FormulaInput::new(0, 1, 1).unwrap().with_s2(16.0 * PI);
        let v = baptista_volume(&inp).unwrap();
        assert_abs_diff_eq!(v, 27.0 / 384.0, epsilon = 1e-14);
        // (0,1,1) at s^2 = 8 pi: (1/6)(1/2)^3 = 1/48.
        let inp = FormulaInput::new(0, 1, 1).unwrap().with_s2(8.0 * PI);
        assert_abs_diff_eq!(baptista_volume(&inp).unwrap(), 1.0 / 48.0, epsilon = 1e-14);
    }

    #[test]
    fn limit_identity_exact_for_genus_two_case() {
        let inp = FormulaInput::new(2, 3, 1).unwrap();
        let lim = baptista_limit(&inp, &rat(1, 1)).unwrap();
        let main = main_volume(&inp).unwrap();
        assert_eq!(lim, main);
    }

    #[test]
    fn monotone_convergence_in_coupling() {
        let inp = FormulaInput::new(0, 1, 1).unwrap();
        let main = main_volume(&inp).unwrap().to_f64().unwrap();
        let mut prev_gap = f64::INFINITY;
        for j in 0..10 {
            let s2 = 8.0 * PI * 2.0f64.powi(j);
            let v = baptista_volume(&FormulaInput::new(0, 1, 1).unwrap().with_s2(s2)).unwrap();
            let gap = (v - main).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
    }

    #[test]
    fn genus_zero_single_term_form() {
        // At b = 0 the sum collapses to (1/q!) (vol - 4 pi r/s^2)^q.
        for (r, k, s2m) in [(1usize, 1usize, 12i64), (2, 1, 40), (1, 2, 24)] {
            let inp = FormulaInput::new(0, r, k).unwrap();
            let v = baptista_volume_exact(&inp, &rat(s2m, 1), &rat(1, 1)).unwrap();
            let dep = rat(1, 1) - rat(4 * r as i64, s2m);
            let expect = BigRational::new(BigInt::one(), factorial(inp.q)) * pow_rational(&dep, inp.q);
            assert_eq!(v, expect);
        }
    }

    #[test]
    fn dimensions() {
        let inp = FormulaInput::new(0, 1, 1).unwrap();
        assert_eq!(dim_hol(&inp), 3);
        assert_eq!(inp.q, 3);
        assert_eq!(strata_dim(&inp, 0).unwrap(), dim_hol(&inp));
        // strictly decreasing in l with step k
        for (b, r, k) in [(0usize, 3usize, 2usize), (1, 2, 1), (0, 4, 1)] {
            let inp = FormulaInput::new(b, r, k).unwrap();
            let d0 = strata_dim(&inp, 0).unwrap();
            assert_eq!(d0, dim_hol(&inp));
            for l in 1..=r {
                let dl = strata_dim(&inp, l).unwrap();
                assert_eq!(dl, d0 - (k * l) as i64);
            }
            assert!(strata_dim(&inp, r + 1).is_err());
        }
    }

    #[test]
    fn strata_parameter_count_matches_moduli_split() {
        // A point of the l-th stratum is (degree-l divisor, degree-(r-l)
        // tuple): l parameters plus the reduced moduli dimension equals
        // q - k l at genus zero.
        for (r, k) in [(2usize, 1usize), (3, 2), (4, 1)] {
            let inp = FormulaInput::new(0, r, k).unwrap();
            for l in 0..=r {
                let reduced_q = (k + 1) * (r - l + 1) - 1;
                let count = l + reduced_q;
                assert_eq!(count as i64, inp.q as i64 - (k * l) as i64);
                assert_eq!(count as i64, strata_dim(&inp, l).unwrap());
            }
        }
    }
}
