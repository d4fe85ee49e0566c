//! Evaluation of `phi_{m,n}` at rational multiples of `pi` with certified signs.
//!
//! Every point the crate needs lies at `pi * p / q` for integers `p, q`, so the
//! argument of each sine is reduced exactly in integer arithmetic before any
//! floating point is involved. A sine whose argument is an integer multiple of
//! `pi` therefore comes back as exactly `0.0`, and `0.0` never appears
//! otherwise.

use std::f64::consts::PI;
use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::error::{NodalError, Result};
use crate::modes::ModePair;

/// Point `(pi * x_num / den, pi * y_num / den)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RationalPoint {
    pub x_num: u64,
    pub y_num: u64,
    pub den: u64,
}

impl RationalPoint {
    pub fn new(x_num: u64, y_num: u64, den: u64) -> Self {
        RationalPoint { x_num, y_num, den }
    }

    pub fn x(&self) -> f64 {
        PI * self.x_num as f64 / self.den as f64
    }

    pub fn y(&self) -> f64 {
        PI * self.y_num as f64 / self.den as f64
    }

    fn strictly_inside(&self) -> bool {
        self.den > 0 && self.y_num > 0 && self.y_num <= self.x_num && self.x_num < self.den
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pi*({}, {})/{}", self.x_num, self.y_num, self.den)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v > 0.0 {
            Sign::Positive
        } else if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiValue {
    pub value: f64,
    pub sign: Sign,
    /// The double-precision result was too close to zero and the sign came
    /// from the multi-precision re-evaluation.
    pub extended: bool,
}

/// `sin(pi * p / q)` with the reduction modulo `2q` done exactly.
pub fn sin_pi_ratio(p: u128, q: u128) -> f64 {
    let (r, negative) = reduce_ratio(p, q);
    if r == 0 {
        return 0.0;
    }
    let s = (PI * (r as f64 / q as f64)).sin();
    if negative {
        -s
    } else {
        s
    }
}

/// Reduce `p/q` to `r/q` in `[0, 1/2]` with `sin(pi p/q) = +-sin(pi r/q)`.
fn reduce_ratio(p: u128, q: u128) -> (u128, bool) {
    debug_assert!(q > 0);
    let mut r = p % (2 * q);
    let mut negative = false;
    if r >= q {
        r -= q;
        negative = true;
    }
    if 2 * r > q {
        r = q - r;
    }
    (r, negative)
}

const EXT_PRECISION: usize = 320;
/// Bits of cancellation tolerated in the multi-precision difference.
const EXT_MARGIN: i64 = 240;
/// Relative threshold (in units of `f64::EPSILON`) above which the double
/// precision sign is trusted.
const F64_MARGIN: f64 = 64.0;

fn sin_pi_ratio_ext(p: u128, q: u128, cc: &mut Consts) -> BigFloat {
    let rm = RoundingMode::ToEven;
    let (r, negative) = reduce_ratio(p, q);
    let ratio = BigFloat::from_u128(r, EXT_PRECISION).div(
        &BigFloat::from_u128(q, EXT_PRECISION),
        EXT_PRECISION,
        rm,
    );
    let arg = ratio.mul(&cc.pi(EXT_PRECISION, rm), EXT_PRECISION, rm);
    let s = arg.sin(EXT_PRECISION, rm, cc);
    if negative {
        s.neg()
    } else {
        s
    }
}

fn extended_sign(mode: ModePair, point: RationalPoint) -> Result<Sign> {
    let rm = RoundingMode::ToEven;
    let mut cc =
        Consts::new().map_err(|e| NodalError::UncertifiedSign(format!("{point}: {e:?}")))?;
    let (m, n) = (mode.m() as u128, mode.n() as u128);
    let (x, y, d) = (point.x_num as u128, point.y_num as u128, point.den as u128);
    let a = sin_pi_ratio_ext(m * x, d, &mut cc).mul(
        &sin_pi_ratio_ext(n * y, d, &mut cc),
        EXT_PRECISION,
        rm,
    );
    let b = sin_pi_ratio_ext(n * x, d, &mut cc).mul(
        &sin_pi_ratio_ext(m * y, d, &mut cc),
        EXT_PRECISION,
        rm,
    );
    let v = a.sub(&b, EXT_PRECISION, rm);
    let scale = a.abs().add(&b.abs(), EXT_PRECISION, rm);
    if v.is_nan() || scale.is_nan() {
        return Err(NodalError::UncertifiedSign(point.to_string()));
    }
    if v.is_zero() {
        return Err(NodalError::UncertifiedSign(point.to_string()));
    }
    let (ev, es) = match (v.exponent(), scale.exponent()) {
        (Some(ev), Some(es)) => (ev as i64, es as i64),
        _ => return Err(NodalError::UncertifiedSign(point.to_string())),
    };
    if ev <= es - EXT_MARGIN {
        return Err(NodalError::UncertifiedSign(point.to_string()));
    }
    Ok(if v.is_negative() {
        Sign::Negative
    } else {
        Sign::Positive
    })
}

/// Combine the four sine factors `sin(mx), sin(ny), sin(nx), sin(my)`.
fn combine(mode: ModePair, point: RationalPoint, f: [f64; 4]) -> Result<PhiValue> {
    let [smx, sny, snx, smy] = f;
    let a = smx * sny;
    let b = snx * smy;
    let value = a - b;
    // Exact zeros of the factors are analytic zeros.
    let a_zero = smx == 0.0 || sny == 0.0;
    let b_zero = snx == 0.0 || smy == 0.0;
    let sign = match (a_zero, b_zero) {
        (true, true) => Sign::Zero,
        (true, false) => Sign::of(-b),
        (false, true) => Sign::of(a),
        (false, false) => {
            if value.abs() > F64_MARGIN * f64::EPSILON * (a.abs() + b.abs()) {
                Sign::of(value)
            } else {
                let sign = extended_sign(mode, point)?;
                return Ok(PhiValue {
                    value,
                    sign,
                    extended: true,
                });
            }
        }
    };
    Ok(PhiValue {
        value,
        sign,
        extended: false,
    })
}

/// Evaluate `phi_{m,n}` at a rational point of the closed triangle.
///
/// Points on the diagonal evaluate to a certified zero. Elsewhere the sign is
/// trusted from double precision only when the result clears a relative
/// threshold; otherwise it is recomputed with 320-bit arithmetic and an error
/// is returned if even that cannot separate it from zero.
pub fn eval_phi(mode: ModePair, point: RationalPoint) -> Result<PhiValue> {
    if !point.strictly_inside() && point.x_num != point.y_num {
        return Err(NodalError::InvalidParameter(format!(
            "{point} is not inside the triangle"
        )));
    }
    if point.x_num == point.y_num {
        return Ok(PhiValue {
            value: 0.0,
            sign: Sign::Zero,
            extended: false,
        });
    }
    let (m, n) = (mode.m() as u128, mode.n() as u128);
    let (x, y, d) = (point.x_num as u128, point.y_num as u128, point.den as u128);
    let f = [
        sin_pi_ratio(m * x, d),
        sin_pi_ratio(n * y, d),
        sin_pi_ratio(n * x, d),
        sin_pi_ratio(m * y, d),
    ];
    combine(mode, point, f)
}

/// Fast unchecked value of `phi_{m,n}(pi i / r, pi j / r)` for grid sampling.
pub fn phi_on_grid(m: u64, n: u64, i: u64, j: u64, r: u64) -> f64 {
    let (m, n, i, j, r) = (m as u128, n as u128, i as u128, j as u128, r as u128);
    sin_pi_ratio(m * i, r) * sin_pi_ratio(n * j, r)
        - sin_pi_ratio(n * i, r) * sin_pi_ratio(m * j, r)
}

/// Cached sine factors on a set of abscissae `pi * t / den`.
///
/// Cells only ever sample `phi` at breakpoints and interval midpoints; the
/// factors depend on one coordinate each, so a table of `O(m + n)` sines
/// serves all `O((m + n)^2)` cells.
#[derive(Clone, Debug)]
pub struct FactorTable {
    mode: ModePair,
    den: u64,
    nums: Vec<u64>,
    sin_m: Vec<f64>,
    sin_n: Vec<f64>,
}

impl FactorTable {
    pub fn new(mode: ModePair, den: u64, nums: Vec<u64>) -> Self {
        let (m, n) = (mode.m() as u128, mode.n() as u128);
        let sin_m = nums
            .iter()
            .map(|&t| sin_pi_ratio(m * t as u128, den as u128))
            .collect();
        let sin_n = nums
            .iter()
            .map(|&t| sin_pi_ratio(n * t as u128, den as u128))
            .collect();
        FactorTable {
            mode,
            den,
            nums,
            sin_m,
            sin_n,
        }
    }

    /// `phi` at `(nums[ix], nums[iy])`.
    pub fn eval(&self, ix: usize, iy: usize) -> Result<PhiValue> {
        let point = RationalPoint::new(self.nums[ix], self.nums[iy], self.den);
        combine(
            self.mode,
            point,
            [
                self.sin_m[ix],
                self.sin_n[iy],
                self.sin_n[ix],
                self.sin_m[iy],
            ],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(m: u64, n: u64) -> ModePair {
        ModePair::new(m, n).unwrap()
    }

    #[test]
    fn exact_zeros_of_sine() {
        assert_eq!(sin_pi_ratio(0, 7), 0.0);
        assert_eq!(sin_pi_ratio(14, 7), 0.0);
        assert_eq!(sin_pi_ratio(7, 7), 0.0);
        assert!((sin_pi_ratio(1, 2) - 1.0).abs() < 1e-16);
        assert!((sin_pi_ratio(3, 2) + 1.0).abs() < 1e-16);
        assert!((sin_pi_ratio(1, 6) - 0.5).abs() < 1e-15);
        assert!((sin_pi_ratio(7, 6) + 0.5).abs() < 1e-15);
        assert!((sin_pi_ratio(5, 6) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn phi_2_1_closed_form() {
        // 2 sin x sin y (cos x - cos y) at (pi/2, pi/4)
        let v = eval_phi(mode(2, 1), RationalPoint::new(2, 1, 4)).unwrap();
        assert!((v.value + 1.0).abs() < 1e-15);
        assert_eq!(v.sign, Sign::Negative);
    }

    #[test]
    fn diagonal_is_zero() {
        for t in 1..20 {
            let v = eval_phi(mode(9, 4), RationalPoint::new(t, t, 20)).unwrap();
            assert_eq!(v.sign, Sign::Zero);
        }
    }

    #[test]
    fn agrees_with_naive_evaluation() {
        let md = mode(13, 6);
        for x in 1..60u64 {
            for y in 1..x {
                let p = RationalPoint::new(x, y, 61);
                let (xf, yf) = (p.x(), p.y());
                let naive =
                    (13.0 * xf).sin() * (6.0 * yf).sin() - (6.0 * xf).sin() * (13.0 * yf).sin();
                let v = eval_phi(md, p).unwrap();
                assert!((v.value - naive).abs() < 1e-12);
                if naive.abs() > 1e-9 {
                    assert_eq!(v.sign, Sign::of(naive));
                }
            }
        }
    }

    #[test]
    fn extended_precision_matches_double_when_clear() {
        let md = mode(9, 4);
        let p = RationalPoint::new(13, 5, 36);
        let v = eval_phi(md, p).unwrap();
        assert_eq!(extended_sign(md, p).unwrap(), v.sign);
    }

    #[test]
    fn outside_point_rejected() {
        assert!(eval_phi(mode(3, 2), RationalPoint::new(1, 2, 4)).is_err());
    }
}
