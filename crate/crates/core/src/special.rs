//! Kaniadakis κ-deformed exponential and logarithm, the κ-Gamma function and
//! the classical special functions the distribution is built from.
//!
//! Everything here is a pure function of its arguments. The checked public
//! functions report poles and domain violations as [`Error::Domain`]; the
//! `pub(crate)` variants skip the checks for use in inner loops where the
//! caller has already established the domain.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this |κ| the deformed functions fall back to their undeformed limits.
pub const KAPPA_SWITCH: f64 = 1e-8;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Deformation parameter restricted to the range the distribution accepts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Kappa(f64);

impl Kappa {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Kappa(value))
        } else {
            Err(Error::InvalidParams(format!("kappa = {value} not in [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `ln exp_κ(x) = asinh(κx)/κ`.
pub fn ln_kappa_exp(x: f64, kappa: f64) -> f64 {
    let k = kappa.abs();
    let w = k * x;
    if k < KAPPA_SWITCH && w.abs() < 1e-4 {
        // asinh(w)/k = x (1 - w²/6 + ...)
        return x - w * w * x / 6.0;
    }
    w.asinh() / k
}

/// κ-exponential `(√(1+κ²x²) + κx)^{1/κ}`.
///
/// Evaluated as `exp(asinh(κx)/κ)`, which avoids the cancellation of the
/// printed form for negative `x`. Overflows to `+inf` and underflows to `0`
/// with ordinary IEEE semantics.
pub fn kappa_exp(x: f64, kappa: f64) -> f64 {
    ln_kappa_exp(x, kappa).exp()
}

/// κ-logarithm `(x^κ − x^{−κ})/(2κ)`, the inverse of [`kappa_exp`].
pub fn kappa_log(x: f64, kappa: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("kappa_log", format!("x = {x} must be > 0")));
    }
    Ok(kappa_log_unchecked(x, kappa))
}

pub(crate) fn kappa_log_unchecked(x: f64, kappa: f64) -> f64 {
    let k = kappa.abs();
    let l = x.ln();
    let w = k * l;
    if k < KAPPA_SWITCH && w.abs() < 1e-4 {
        return l + w * w * l / 6.0;
    }
    w.sinh() / k
}

// ---------------------------------------------------------------------------
// Gamma family
// ---------------------------------------------------------------------------

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x) for real x, using Lanczos with reflection below 1/2. Poles give NaN.
pub(crate) fn gamma_fn(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_fn(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // split the power so t^(x+1/2) does not overflow before e^{-t} is applied
    let tp = t.powf(0.5 * (x + 0.5));
    SQRT_2PI * tp * (tp * (-t).exp()) * a
}

/// Stirling correction `lnΓ(x) − [(x−½)ln x − x + ½ln 2π]`, accurate for x ≥ 10.
fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        + r2 * (-1.0 / 360.0
            + r2 * (1.0 / 1260.0
                + r2 * (-1.0 / 1680.0
                    + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0 + r2 * (1.0 / 156.0)))))))
}

/// lnΓ(x) for x > 0.
pub(crate) fn lgamma(x: f64) -> f64 {
    if x < 10.0 {
        gamma_fn(x).ln()
    } else {
        (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_tail(x)
    }
}

/// `lnΓ(x) − lnΓ(y)` for x, y > 0, without cancellation when both are large.
pub(crate) fn ln_gamma_ratio(x: f64, y: f64) -> f64 {
    if x.min(y) < 10.0 {
        return lgamma(x) - lgamma(y);
    }
    let d = x - y;
    (y - 0.5) * (d / y).ln_1p() + d * x.ln() - d + stirling_tail(x) - stirling_tail(y)
}

/// ln B(a, b) for a, b > 0.
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, large) = if a < b { (a, b) } else { (b, a) };
    lgamma(small) - ln_gamma_ratio(small + large, large)
}

/// ψ(x) for real x away from the poles.
pub(crate) fn psi(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::NAN;
    }
    if x < 0.0 {
        // ψ(1−x) − ψ(x) = π cot(πx)
        return psi(1.0 - x) - PI / (PI * x).tan();
    }
    let mut acc = 0.0;
    let mut x = x;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r2 = 1.0 / (x * x);
    let series = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0
                        - r2 * (1.0 / 132.0 - r2 * (691.0 / 32_760.0 - r2 / 12.0))))));
    acc + x.ln() - 0.5 / x - series
}

/// Γ(x). Non-positive integers are poles.
pub fn gamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) || x.is_nan() {
        return Err(Error::domain("gamma", format!("pole at x = {x}")));
    }
    Ok(gamma_fn(x))
}

/// lnΓ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("log_gamma", format!("x = {x} must be > 0")));
    }
    Ok(lgamma(x))
}

/// Digamma ψ(x) = Γ'(x)/Γ(x).
pub fn digamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) || x.is_nan() {
        return Err(Error::domain("digamma", format!("pole at x = {x}")));
    }
    Ok(psi(x))
}

/// κ-Gamma function
/// `Γ_κ(x) = [1−|κ|(x−1)] / |2κ|^{x−1} · Γ(1/|2κ| − (x−1)/2) / Γ(1/|2κ| + (x−1)/2) · Γ(x)`,
/// reducing to Γ(x) as κ → 0.
pub fn kappa_gamma(x: f64, kappa: f64) -> Result<f64> {
    let k = kappa.abs();
    if k < KAPPA_SWITCH {
        return gamma(x).map_err(|_| Error::domain("kappa_gamma", format!("Γ(x) has a pole at x = {x}")));
    }
    let z = 0.5 / k;
    let c = 0.5 * (x - 1.0);
    let (lo, hi) = (z - c, z + c);
    for (name, arg) in [("Γ(x)", x), ("Γ(1/|2κ| − (x−1)/2)", lo), ("Γ(1/|2κ| + (x−1)/2)", hi)] {
        if is_nonpositive_integer(arg) {
            return Err(Error::domain(
                "kappa_gamma",
                format!("factor {name} has a pole (argument {arg}) at x = {x}, κ = {kappa}"),
            ));
        }
    }
    let prefactor = 1.0 - k * (x - 1.0);
    if x > 0.0 && lo > 0.0 && hi > 0.0 {
        let ln_mag = -(x - 1.0) * (2.0 * k).ln() + ln_gamma_ratio(lo, hi) + lgamma(x);
        return Ok(prefactor * ln_mag.exp());
    }
    Ok(prefactor * (2.0 * k).powf(-(x - 1.0)) * gamma_fn(lo) / gamma_fn(hi) * gamma_fn(x))
}

/// ln Γ_κ(s) on the part of the domain used by the distribution, where every
/// Γ argument and the prefactor are positive (`s > 0`, `|κ(s−1)| < 1`).
pub(crate) fn ln_kappa_gamma_pos(s: f64, kappa: f64) -> f64 {
    let k = kappa.abs();
    if k < KAPPA_SWITCH {
        return lgamma(s);
    }
    let z = 0.5 / k;
    let c = 0.5 * (s - 1.0);
    (-k * (s - 1.0)).ln_1p() - (s - 1.0) * (2.0 * k).ln() + ln_gamma_ratio(z - c, z + c) + lgamma(s)
}

// ---------------------------------------------------------------------------
// Incomplete beta
// ---------------------------------------------------------------------------

const CF_EPS: f64 = 1e-15;
const CF_TINY: f64 = 1e-300;
const CF_MAX_ITER: usize = 50_000;

/// Continued fraction for I_x(a, b) (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    let mut last_delta = f64::NAN;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        last_delta = delta;
        if (delta - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        what: "incomplete beta continued fraction",
        iterations: CF_MAX_ITER,
        residual: (last_delta - 1.0).abs(),
    })
}

fn ln_pair(x: f64, y: f64) -> (f64, f64) {
    let ln_x = if x < 0.5 { x.ln() } else { (-y).ln_1p() };
    let ln_y = if y < 0.5 { y.ln() } else { (-x).ln_1p() };
    (ln_x, ln_y)
}

/// Regularized incomplete beta and its complement, `(I_x(a,b), 1 − I_x(a,b))`.
///
/// The caller supplies both `x` and `y = 1 − x` so that arguments close to 1
/// keep their relative precision. No domain checks.
pub(crate) fn ibeta_pair(x: f64, y: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    if x <= 0.0 {
        return Ok((0.0, 1.0));
    }
    if y <= 0.0 {
        return Ok((1.0, 0.0));
    }
    let (ln_x, ln_y) = ln_pair(x, y);
    let ln_front = a * ln_x + b * ln_y - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        let i = (ln_front.exp() / a) * beta_cf(a, b, x)?;
        Ok((i, 1.0 - i))
    } else {
        let ic = (ln_front.exp() / b) * beta_cf(b, a, y)?;
        Ok((1.0 - ic, ic))
    }
}

fn check_shape(func: &'static str, a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain(func, format!("shape parameters a = {a}, b = {b} must be positive")));
    }
    Ok(())
}

/// Regularized incomplete beta function I_x(a, b).
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_shape("reg_inc_beta", a, b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("reg_inc_beta", format!("x = {x} not in [0, 1]")));
    }
    Ok(ibeta_pair(x, 1.0 - x, a, b)?.0)
}

/// Non-regularized incomplete beta function B_x(a, b) = I_x(a, b)·B(a, b).
pub fn inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    Ok(reg_inc_beta(x, a, b)? * ln_beta(a, b).exp())
}

/// Complete beta function B(a, b).
pub fn beta(a: f64, b: f64) -> Result<f64> {
    check_shape("beta", a, b)?;
    Ok(ln_beta(a, b).exp())
}

/// Safeguarded Newton on a monotone increasing function of `t`.
///
/// `f` returns `(value, derivative)`. `lo`/`hi` must bracket the root
/// (`f(lo) ≤ 0 ≤ f(hi)`); bisection takes over whenever a Newton step
/// leaves the bracket.
fn newton_bracketed(
    what: &'static str,
    mut f: impl FnMut(f64) -> Result<(f64, f64)>,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut t = start.clamp(lo, hi);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let (v, dv) = f(t)?;
        residual = v.abs();
        if v == 0.0 {
            return Ok(t);
        }
        if v < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - v / dv;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - t).abs();
        t = next;
        if step <= tol * (1.0 + t.abs()) || (hi - lo) <= tol * (1.0 + t.abs()) {
            return Ok(t);
        }
    }
    Err(Error::NonConvergence {
        what,
        iterations: max_iter,
        residual,
    })
}

const INV_MAX_ITER: usize = 200;

/// Finds `v ∈ (0, 1/2]` with `I_v(a, b) = p`, given `p ≤ I_{1/2}(a, b)`.
///
/// Newton runs on `t = ln v` against `ln I`, which is nearly linear in the
/// lower tail (`I ≈ v^a / (a B)`).
fn inv_ibeta_lower(p: f64, q: f64, a: f64, b: f64) -> Result<f64> {
    if p <= 0.0 {
        return Ok(0.0);
    }
    let ln_b = ln_beta(a, b);
    // Near p = 1 match ln(1 − I) instead, where ln I is flat.
    let upper = p >= 0.5;
    let ln_target = if upper { q.ln() } else { p.ln() };
    let h = |t: f64| -> Result<(f64, f64)> {
        let v = t.exp();
        let (i, ic) = ibeta_pair(v, 1.0 - v, a, b)?;
        // d ln I / d ln v = v^a (1-v)^{b-1} / (B I)
        let ln_dens = a * t + (b - 1.0) * (-v).ln_1p() - ln_b;
        if upper {
            let ln_ic = ic.ln();
            Ok((ln_target - ln_ic, (ln_dens - ln_ic).exp()))
        } else {
            let ln_i = i.ln();
            Ok((ln_i - ln_target, (ln_dens - ln_i).exp()))
        }
    };
    let hi = 0.5f64.ln();
    let guess = if upper { hi } else { ((ln_target + a.ln() + ln_b) / a).min(hi) };
    let (v0, _) = h(guess)?;
    let lo = if v0 < 0.0 {
        guess
    } else {
        let mut step = 1.0;
        let mut t = guess - step;
        loop {
            let (v, _) = h(t)?;
            if v < 0.0 || t < -745.0 {
                break t;
            }
            step *= 2.0;
            t = guess - step;
        }
    };
    let t = newton_bracketed("inverse incomplete beta", h, lo, hi, guess, 1e-15, INV_MAX_ITER)?;
    Ok(t.exp())
}

/// Inverse of the regularized incomplete beta: returns `(x, 1 − x)` with
/// `I_x(a, b) = p` where `q = 1 − p` is supplied separately for precision.
pub(crate) fn inv_ibeta_pair(p: f64, q: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    if p <= 0.0 {
        return Ok((0.0, 1.0));
    }
    if q <= 0.0 {
        return Ok((1.0, 0.0));
    }
    let (i_half, _) = ibeta_pair(0.5, 0.5, a, b)?;
    if p <= i_half {
        let x = inv_ibeta_lower(p, q, a, b)?;
        Ok((x, 1.0 - x))
    } else {
        // I_x(a,b) = p  <=>  I_{1-x}(b,a) = q
        let y = inv_ibeta_lower(q, p, b, a)?;
        Ok((1.0 - y, y))
    }
}

/// Inverse regularized incomplete beta: `x` with `I_x(a, b) = p`.
pub fn inv_reg_inc_beta(p: f64, a: f64, b: f64) -> Result<f64> {
    check_shape("inv_reg_inc_beta", a, b)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("inv_reg_inc_beta", format!("p = {p} not in [0, 1]")));
    }
    Ok(inv_ibeta_pair(p, 1.0 - p, a, b)?.0)
}

// ---------------------------------------------------------------------------
// Incomplete gamma (used by the κ → 0 Generalized Gamma limit)
// ---------------------------------------------------------------------------

/// Regularized incomplete gamma `(P(a, x), Q(a, x))` for a > 0, x ≥ 0.
pub(crate) fn igamma_pair(a: f64, x: f64) -> Result<(f64, f64)> {
    if x <= 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let ln_front = a * x.ln() - x - lgamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..CF_MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * CF_EPS {
                let p = sum * ln_front.exp();
                return Ok((p, 1.0 - p));
            }
        }
        Err(Error::NonConvergence {
            what: "incomplete gamma series",
            iterations: CF_MAX_ITER,
            residual: del.abs(),
        })
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / CF_TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=CF_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < CF_TINY {
                d = CF_TINY;
            }
            c = b + an / c;
            if c.abs() < CF_TINY {
                c = CF_TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < CF_EPS {
                let q = ln_front.exp() * h;
                return Ok((1.0 - q, q));
            }
        }
        Err(Error::NonConvergence {
            what: "incomplete gamma continued fraction",
            iterations: CF_MAX_ITER,
            residual: f64::NAN,
        })
    }
}

/// Regularized lower incomplete gamma P(a, x).
pub fn reg_inc_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || x < 0.0 || x.is_nan() {
        return Err(Error::domain("reg_inc_gamma", format!("need a > 0, x ≥ 0 (a = {a}, x = {x})")));
    }
    Ok(igamma_pair(a, x)?.0)
}

/// Inverse of P(a, ·): returns x with `P(a, x) = p`, `q = 1 − p`.
pub(crate) fn inv_igamma(p: f64, q: f64, a: f64) -> Result<f64> {
    if p <= 0.0 {
        return Ok(0.0);
    }
    if q <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let ln_ga = lgamma(a);
    let use_lower = p <= 0.5;
    let target = if use_lower { p.ln() } else { q.ln() };
    // increasing function of t = ln x in both branches
    let h = |t: f64| -> Result<(f64, f64)> {
        let x = t.exp();
        let (pp, qq) = igamma_pair(a, x)?;
        let ln_dens = a * t - x - ln_ga; // x · density
        if use_lower {
            let l = pp.ln();
            Ok((l - target, (ln_dens - l).exp()))
        } else {
            let l = qq.ln();
            Ok((target - l, (ln_dens - l).exp()))
        }
    };
    // bracket in ln x
    let guess = if use_lower {
        ((target + a.ln() + ln_ga) / a).min(a.max(1.0).ln() + 1.0)
    } else {
        a.max(1.0).ln()
    };
    let mut lo = guess;
    let mut hi = guess;
    let mut step = 1.0;
    while h(lo)?.0 > 0.0 {
        lo -= step;
        step *= 2.0;
        if lo < -745.0 {
            break;
        }
    }
    step = 1.0;
    while h(hi)?.0 < 0.0 {
        hi += step;
        step *= 2.0;
        if hi > 709.0 {
            break;
        }
    }
    let t = newton_bracketed("inverse incomplete gamma", h, lo, hi, guess, 1e-15, INV_MAX_ITER)?;
    Ok(t.exp())
}
