//! Scalar abstraction: a small `Real` trait covering the operations the
//! closed-form bounds need, implemented for `f32`, `f64`, and a 192-bit
//! high-precision float.
//!
//! The bound formulas in [`crate::bounds`] are short compositions of `exp`,
//! `ln`, `sqrt`, and field arithmetic. Writing them once over [`Real`] gives
//! three evaluation tiers from the same source of truth: fast `f64` for
//! scans, `f32` where a rough probe suffices, and [`HighPrec`] (~57
//! significant digits) for escalated comparisons whose `f64` margin falls
//! under the trust threshold.
//!
//! Also here: compensated (Neumaier) summation for long series of small
//! terms, and the decimal formatting used by checkpoint files.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Euler–Mascheroni constant, correctly rounded to `f64`.
pub const EULER_GAMMA: f64 = 0.577215664901532860606512090082402431;

/// Euler–Mascheroni constant to 110 significant digits, for the
/// high-precision tier.
pub const EULER_GAMMA_DIGITS: &str =
    "0.57721566490153286060651209008240243104215933593992359880576723488486772677766467093694706329174674951463144725";

/// Mantissa precision (bits) of the high-precision tier: ~57.8 significant
/// decimal digits, comfortably above the 50 digits checkpoint records carry.
pub const HP_PRECISION: usize = 192;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constant cache allocation"));
}

fn with_cc<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Scalar types the closed-form bounds can be evaluated over.
///
/// Constants enter through [`Real::from_f64`]; every decimal constant in the
/// formulas is exactly representable as `f64` or differs from its decimal
/// reading by well under any tolerance the bounds are used at.
pub trait Real:
    Clone
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Div<Output = Self>
{
    /// Injects an `f64` value exactly.
    fn from_f64(x: f64) -> Self;

    /// Injects a decimal literal at this type's full precision. Formula
    /// constants that are not exact binary fractions (0.73, 0.841, 1.1, ...)
    /// must enter through this so the high-precision tier is not capped at
    /// `f64` fidelity.
    fn from_decimal(s: &str) -> Self {
        Self::from_f64(s.parse::<f64>().expect("valid decimal literal"))
    }

    /// Nearest-`f64` readback (used for error messages and reports).
    fn to_f64(&self) -> f64;

    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;

    /// Euler–Mascheroni constant at this type's full precision.
    fn euler_gamma() -> Self;
}

macro_rules! impl_real_for_float {
    ($t:ty) => {
        impl Real for $t {
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn ln(&self) -> Self {
                <$t>::ln(*self)
            }
            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            fn abs(&self) -> Self {
                <$t>::abs(*self)
            }
            fn euler_gamma() -> Self {
                EULER_GAMMA as $t
            }
        }
    };
}

impl_real_for_float!(f32);
impl_real_for_float!(f64);

/// 192-bit binary float with value semantics.
///
/// Wraps `astro_float::BigFloat` at a fixed precision and rounding mode so
/// arithmetic is deterministic and the type can implement the std operator
/// traits. Not `Copy`; clone freely, mantissas are three words.
#[derive(Debug, Clone)]
pub struct HighPrec(BigFloat);

impl HighPrec {
    pub fn from_f64(x: f64) -> Self {
        // The backend halves subnormal inputs, so scale them into the normal
        // range first. Power-of-two scaling is exact in binary floating point.
        if x != 0.0 && x.abs() < f64::MIN_POSITIVE {
            let scale = f64::from_bits((1023u64 + 200) << 52); // 2^200
            let up = HighPrec(BigFloat::from_f64(x * scale, HP_PRECISION));
            return up / HighPrec(BigFloat::from_f64(scale, HP_PRECISION));
        }
        HighPrec(BigFloat::from_f64(x, HP_PRECISION))
    }

    pub fn from_u64(x: u64) -> Self {
        HighPrec(BigFloat::from_u64(x, HP_PRECISION))
    }

    pub fn from_u128(x: u128) -> Self {
        HighPrec(BigFloat::from_u128(x, HP_PRECISION))
    }

    /// Parses a decimal string (plain or scientific notation).
    pub fn parse(s: &str) -> Result<Self> {
        let v = with_cc(|cc| BigFloat::parse(s, Radix::Dec, HP_PRECISION, RM, cc));
        if v.is_nan() {
            return Err(Error::Undefined(format!(
                "cannot parse {s:?} as a decimal number"
            )));
        }
        Ok(HighPrec(v))
    }

    /// Nearest-`f64` conversion via the top 128 mantissa bits.
    pub fn to_f64(&self) -> f64 {
        let Some((words, _, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let n = words.len();
        if n == 0 || words.iter().all(|&w| w == 0) {
            return 0.0;
        }
        // Value is sign * 0.m * 2^exp with the mantissa's top bit set; the
        // top two words carry 128 bits, more than enough for a f64 mantissa.
        let hi = words[n - 1];
        let lo = if n >= 2 { words[n - 2] } else { 0 };
        let frac = ((hi as u128) << 64) | lo as u128;
        let magnitude = ldexp(frac as f64, exp - 128);
        match sign {
            Sign::Pos => magnitude,
            Sign::Neg => -magnitude,
        }
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }

    /// Formats to `digits` significant decimal digits (round half up at the
    /// cut), in plain notation for moderate exponents and scientific
    /// otherwise.
    pub fn format_sig(&self, digits: usize) -> String {
        assert!(digits > 0);
        if self.0.is_zero() {
            return "0.0".to_string();
        }
        let (sign, mut digs, mut e10) = with_cc(|cc| {
            self.0
                .convert_to_radix(Radix::Dec, RoundingMode::None, cc)
        })
        .expect("finite value converts to decimal");
        // Normalize: drop leading zeros so digs[0] is the first significant
        // digit and the value is 0.digs * 10^e10.
        while digs.first() == Some(&0) {
            digs.remove(0);
            e10 -= 1;
        }
        if digs.is_empty() {
            return "0.0".to_string();
        }
        if digs.len() > digits {
            let round_up = digs[digits] >= 5;
            digs.truncate(digits);
            if round_up {
                let mut i = digits;
                loop {
                    if i == 0 {
                        digs.insert(0, 1);
                        digs.truncate(digits);
                        e10 += 1;
                        break;
                    }
                    i -= 1;
                    if digs[i] == 9 {
                        digs[i] = 0;
                    } else {
                        digs[i] += 1;
                        break;
                    }
                }
            }
        }
        let body: String = digs.iter().map(|d| char::from(b'0' + d)).collect();
        let mut out = String::new();
        if sign == Sign::Neg {
            out.push('-');
        }
        let e = e10 as i64;
        if (-2..=21).contains(&e) {
            if e <= 0 {
                out.push_str("0.");
                for _ in 0..(-e) {
                    out.push('0');
                }
                out.push_str(&body);
            } else if (e as usize) < body.len() {
                out.push_str(&body[..e as usize]);
                out.push('.');
                out.push_str(&body[e as usize..]);
            } else {
                out.push_str(&body);
                for _ in 0..(e as usize - body.len()) {
                    out.push('0');
                }
                out.push_str(".0");
            }
        } else {
            out.push(char::from(b'0' + digs[0]));
            out.push('.');
            if body.len() > 1 {
                out.push_str(&body[1..]);
            } else {
                out.push('0');
            }
            out.push('e');
            let se = e - 1;
            if se >= 0 {
                out.push('+');
            }
            out.push_str(&se.to_string());
        }
        out
    }
}

/// Scales by a power of two without going through `powf`.
fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e != 0 && x != 0.0 && x.is_finite() {
        let step = e.clamp(-1022, 1023);
        x *= f64::from_bits(((1023 + step) as u64) << 52);
        e -= step;
    }
    x
}

impl PartialEq for HighPrec {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for HighPrec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|s| s.cmp(&0))
    }
}

impl Add for HighPrec {
    type Output = HighPrec;
    fn add(self, rhs: Self) -> Self {
        HighPrec(self.0.add(&rhs.0, HP_PRECISION, RM))
    }
}

impl Sub for HighPrec {
    type Output = HighPrec;
    fn sub(self, rhs: Self) -> Self {
        HighPrec(self.0.sub(&rhs.0, HP_PRECISION, RM))
    }
}

impl Mul for HighPrec {
    type Output = HighPrec;
    fn mul(self, rhs: Self) -> Self {
        HighPrec(self.0.mul(&rhs.0, HP_PRECISION, RM))
    }
}

impl Div for HighPrec {
    type Output = HighPrec;
    fn div(self, rhs: Self) -> Self {
        HighPrec(self.0.div(&rhs.0, HP_PRECISION, RM))
    }
}

impl Neg for HighPrec {
    type Output = HighPrec;
    fn neg(self) -> Self {
        HighPrec(self.0.neg())
    }
}

impl Zero for HighPrec {
    fn zero() -> Self {
        HighPrec::from_f64(0.0)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for HighPrec {
    fn one() -> Self {
        HighPrec::from_f64(1.0)
    }
}

impl Real for HighPrec {
    fn from_f64(x: f64) -> Self {
        HighPrec::from_f64(x)
    }

    fn from_decimal(s: &str) -> Self {
        HighPrec::parse(s).expect("valid decimal literal")
    }

    fn to_f64(&self) -> f64 {
        HighPrec::to_f64(self)
    }

    fn ln(&self) -> Self {
        HighPrec(with_cc(|cc| self.0.ln(HP_PRECISION, RM, cc)))
    }

    fn exp(&self) -> Self {
        HighPrec(with_cc(|cc| self.0.exp(HP_PRECISION, RM, cc)))
    }

    fn sqrt(&self) -> Self {
        HighPrec(self.0.sqrt(HP_PRECISION, RM))
    }

    fn abs(&self) -> Self {
        HighPrec(self.0.abs())
    }

    fn euler_gamma() -> Self {
        HighPrec::parse(EULER_GAMMA_DIGITS).expect("built-in constant parses")
    }
}

/// Neumaier compensated sum: a running `f64` pair `(sum, compensation)`
/// whose combined value carries roughly twice the precision of a plain
/// `f64` accumulator.
///
/// Robust against terms larger than the running sum (unlike plain Kahan),
/// which matters when merging whole segment sums into a prefix.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reconstructs an accumulator from a stored `(sum, compensation)` pair.
    pub fn from_parts(sum: f64, comp: f64) -> Self {
        NeumaierSum { sum, comp }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another compensated sum in (deterministic given operand order).
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    /// Best single-`f64` estimate of the total.
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// The raw pair; `parts().0 + parts().1` promoted exactly to a wider
    /// type recovers the accumulator's full information.
    pub fn parts(&self) -> (f64, f64) {
        (self.sum, self.comp)
    }

    /// Exact promotion of the pair into the high-precision tier.
    pub fn to_high_prec(&self) -> HighPrec {
        HighPrec::from_f64(self.sum) + HighPrec::from_f64(self.comp)
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, x: f64) {
        self.add(x);
    }
}
