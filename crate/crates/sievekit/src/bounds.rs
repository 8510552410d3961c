//! Closed-form sieve bound functions and classical explicit prime bounds.
//!
//! Covers the linear-sieve companion functions `F`, `f` on the ranges where
//! they have elementary closed forms, the error profile `h`, the lower
//! envelope `C` combining them, two-sided bands for the Mertens-type product
//! `I(x) = prod_{p <= x} (1 - 1/p)^{-1}` and the sieve product
//! `V(z) = prod_{p < z} (1 - 1/p)`, and a Chebyshev-type upper bound for
//! `pi(y)`.
//!
//! Everything is generic over [`Real`], so the same formula text evaluates
//! at `f32`, `f64`, or 192-bit precision; the concrete pipeline uses `f64`
//! and escalates to [`crate::scalar::HighPrec`] when a comparison gets close
//! to a bound.
//!
//! Each function is only proved on a stated range, and arguments outside
//! that range are hard domain errors rather than extrapolations. Branch
//! membership at interior breakpoints resolves to the left branch; the
//! branches agree there, so the choice only pins down a deterministic code
//! path.

use crate::scalar::Real;
use crate::{Error, Result};

/// The error profile `h`: `e^-2` on `[1,2]`, `e^-s` on `[2,3]`, `3e^-s/s`
/// beyond 3. Continuous at both breakpoints.
pub fn h_of<R: Real>(s: R) -> Result<R> {
    let one = R::one();
    if s < one {
        return Err(Error::Domain {
            what: "h argument s",
            value: s.to_f64(),
            range: "[1, infinity)",
        });
    }
    let two = R::from_f64(2.0);
    if s <= two {
        return Ok((-two).exp());
    }
    let three = R::from_f64(3.0);
    if s <= three {
        return Ok((-s).exp());
    }
    Ok(three * (-s.clone()).exp() / s)
}

/// Upper linear-sieve function `F(s) = 2 e^gamma / s` on `1 <= s <= 3`.
pub fn f_upper<R: Real>(s: R) -> Result<R> {
    if s < R::one() || s > R::from_f64(3.0) {
        return Err(Error::Domain {
            what: "F argument s",
            value: s.to_f64(),
            range: "[1, 3]",
        });
    }
    Ok(R::from_f64(2.0) * R::euler_gamma().exp() / s)
}

/// Lower linear-sieve function `f(s) = 2 e^gamma log(s-1) / s` on
/// `2 <= s <= 4`; `f(2) = 0`.
pub fn f_lower<R: Real>(s: R) -> Result<R> {
    if s < R::from_f64(2.0) || s > R::from_f64(4.0) {
        return Err(Error::Domain {
            what: "f argument s",
            value: s.to_f64(),
            range: "[2, 4]",
        });
    }
    let num = R::from_f64(2.0) * R::euler_gamma().exp() * (s.clone() - R::one()).ln();
    Ok(num / s)
}

/// Lower envelope `C(s) = (2 e^gamma log(s-1) - 0.73 e^{2-s}) / s` on
/// `3 <= s <= 4`; positive on the whole range.
pub fn c_of<R: Real>(s: R) -> Result<R> {
    if s < R::from_f64(3.0) || s > R::from_f64(4.0) {
        return Err(Error::Domain {
            what: "C argument s",
            value: s.to_f64(),
            range: "[3, 4]",
        });
    }
    let log_term = R::from_f64(2.0) * R::euler_gamma().exp() * (s.clone() - R::one()).ln();
    let err_term = R::from_decimal("0.73") * (R::from_f64(2.0) - s.clone()).exp();
    Ok((log_term - err_term) / s)
}

/// Two-sided band for `V(z) = prod_{p < z} (1 - 1/p)`.
///
/// The upper bound holds for every `z > 1`; the lower bound is only proved
/// from `z = 285` on and is `None` below that.
#[derive(Debug, Clone)]
pub struct VBand<R> {
    pub lower: Option<R>,
    pub upper: R,
}

/// Rosser–Schoenfeld band `e^{-gamma}/log z * (1 -/+ 1/(2 log^2 z))` around
/// `V(z)`.
pub fn v_band<R: Real>(z: R) -> Result<VBand<R>> {
    if z <= R::one() {
        return Err(Error::Domain {
            what: "V band argument z",
            value: z.to_f64(),
            range: "(1, infinity)",
        });
    }
    let log_z = z.ln();
    let main = R::euler_gamma().neg().exp() / log_z.clone();
    let half = R::one() / (R::from_f64(2.0) * log_z.clone() * log_z);
    let upper = main.clone() * (R::one() + half.clone());
    let lower = if z >= R::from_f64(285.0) {
        Some(main * (R::one() - half))
    } else {
        None
    };
    Ok(VBand { lower, upper })
}

/// Which proved range(s) a Mertens band was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `2 <= x <= 4e9`: band verified by direct computation over primes.
    Computational,
    /// `x >= exp(22)`: band from the explicit asymptotic estimate.
    Asymptotic,
    /// Overlap of the two; the band is their intersection.
    Both,
}

/// Two-sided band for `I(x) = prod_{p <= x} (1 - 1/p)^{-1}`.
#[derive(Debug, Clone)]
pub struct MertensBand<R> {
    pub lower: R,
    pub upper: R,
    pub x: R,
    pub regime: Regime,
}

/// Band for the Mertens-type product: in the computational regime
/// `(e^gamma log x, e^gamma log x + 2 e^gamma / sqrt x)`, in the asymptotic
/// regime `e^gamma log x / (1 +/- 0.841/log^3 x)`, and their intersection
/// when both apply. Arguments below 2 are in no proved regime — the
/// lower inequality genuinely fails there (e.g. at `x = 1.9`).
pub fn mertens_band<R: Real>(x: R) -> Result<MertensBand<R>> {
    let computational = x >= R::from_f64(2.0) && x <= R::from_f64(4e9);
    let log_x = if x > R::zero() { x.ln() } else { R::zero() };
    let asymptotic = x > R::zero() && log_x >= R::from_f64(22.0);
    if !computational && !asymptotic {
        return Err(Error::Regime {
            x: x.to_f64(),
            detail: "need 2 <= x <= 4e9 or x >= exp(22)",
        });
    }
    let e_gamma = R::euler_gamma().exp();
    let main = e_gamma.clone() * log_x.clone();
    let comp_band = if computational {
        let width = R::from_f64(2.0) * e_gamma / x.sqrt();
        Some((main.clone(), main.clone() + width))
    } else {
        None
    };
    let asym_band = if asymptotic {
        let cube = log_x.clone() * log_x.clone() * log_x.clone();
        let eps = R::from_decimal("0.841") / cube;
        Some((
            main.clone() / (R::one() + eps.clone()),
            main.clone() / (R::one() - eps),
        ))
    } else {
        None
    };
    let (lower, upper, regime) = match (comp_band, asym_band) {
        (Some((cl, cu)), Some((al, au))) => {
            let lower = if cl > al { cl } else { al };
            let upper = if cu < au { cu } else { au };
            (lower, upper, Regime::Both)
        }
        (Some((cl, cu)), None) => (cl, cu, Regime::Computational),
        (None, Some((al, au))) => (al, au, Regime::Asymptotic),
        (None, None) => unreachable!("regime check above"),
    };
    Ok(MertensBand {
        lower,
        upper,
        x,
        regime,
    })
}

/// Chebyshev-type bound `pi(y) < 1.1 y / log y`, proved from `y = 10^7` on.
pub fn pi_upper<R: Real>(y: R) -> Result<R> {
    if y < R::from_f64(1e7) {
        return Err(Error::Domain {
            what: "pi bound argument y",
            value: y.to_f64(),
            range: "[1e7, infinity)",
        });
    }
    Ok(R::from_decimal("1.1") * y.clone() / y.ln())
}
