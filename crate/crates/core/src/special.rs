//! Gamma function and the Hurwitz zeta function on complex arguments.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{real, C64};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

fn gamma_right_half(z: C64) -> C64 {
    // Lanczos approximation, valid for Re z >= 1/2
    let z = z - 1.0;
    let mut x = real(LANCZOS[0]);
    for (i, &coef) in LANCZOS.iter().enumerate().skip(1) {
        x += coef / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// Γ(z) for complex z away from the poles.
pub fn gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        PI / ((PI * z).sin() * gamma_right_half(real(1.0) - z))
    } else {
        gamma_right_half(z)
    }
}

/// 1/Γ(z), an entire function (exactly zero at the non-positive integers).
pub fn rgamma(z: C64) -> C64 {
    if z.re < 0.5 {
        gamma_right_half(real(1.0) - z) * (PI * z).sin() / PI
    } else {
        real(1.0) / gamma_right_half(z)
    }
}

/// log Γ(x) for real x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma needs a positive argument");
    if x < 0.5 {
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut s = LANCZOS[0];
        for (i, &coef) in LANCZOS.iter().enumerate().skip(1) {
            s += coef / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + s.ln()
    }
}

/// Even-index Bernoulli numbers B_2, B_4, ..., B_26.
const BERNOULLI_EVEN: [f64; 13] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174_611.0 / 330.0,
    854_513.0 / 138.0,
    -236_364_091.0 / 2730.0,
    8_553_103.0 / 6.0,
];

/// Index at which the Euler–Maclaurin tail starts for Re s >= 0.
pub const HURWITZ_TAIL_START: usize = 50;
/// Shortest head used for Re s < 0, where a short head limits cancellation.
const HURWITZ_TAIL_START_NEGATIVE: usize = 8;
/// Number of Bernoulli correction terms.
pub const HURWITZ_CORRECTIONS: usize = 12;

/// Hurwitz zeta ζ(s, a) = Σ_{n≥0} (n + a)^{-s}, continued to s ≠ 1 by
/// Euler–Maclaurin summation. Accurate to about 1e-13 for Re s ≥ -2; for more
/// negative Re s the head sum grows like |s|^{1 - Re s} and precision degrades.
pub fn hurwitz_zeta(s: C64, a: f64) -> Result<C64> {
    if a <= 0.0 {
        return Err(Error::Domain(format!("Hurwitz offset must be positive, got {a}")));
    }
    if (s - 1.0).norm() < 1e-300 {
        return Err(Error::Domain("Hurwitz zeta has a pole at s = 1".into()));
    }
    let n = if s.re >= 0.0 {
        HURWITZ_TAIL_START
    } else {
        HURWITZ_TAIL_START_NEGATIVE + s.norm().ceil() as usize
    };
    let mut sum = real(0.0);
    for k in (0..n).rev() {
        sum += (-s * (k as f64 + a).ln()).exp();
    }
    let x = n as f64 + a;
    let lnx = x.ln();
    let x_pow = (-s * lnx).exp();
    sum += x_pow * x / (s - 1.0);
    sum += x_pow * 0.5;
    // Σ B_2j/(2j)! · s(s+1)…(s+2j-2) · x^{-s-2j+1}
    let mut rising = s; // s(s+1)…(s+2j-2), starts at j = 1
    let mut factorial = 2.0; // (2j)!
    let mut x_power = x_pow / x; // x^{-s-1}
    for j in 1..=HURWITZ_CORRECTIONS {
        sum += rising * x_power * (BERNOULLI_EVEN[j - 1] / factorial);
        let j2 = 2.0 * j as f64;
        rising *= (s + j2 - 1.0) * (s + j2);
        factorial *= (j2 + 1.0) * (j2 + 2.0);
        x_power /= x * x;
    }
    Ok(sum)
}

/// ∂ζ(s, a)/∂s at s = 0 by Lerch's formula, log Γ(a) - ½ log 2π.
pub fn hurwitz_zeta_derivative_at_zero(a: f64) -> f64 {
    ln_gamma(a) - 0.5 * (2.0 * PI).ln()
}
