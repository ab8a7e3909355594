//! Even-parity mode solutions.
//!
//! The mode function is
//! `f_ω(x,t) = e^{−iωt} (A/√(2ω)) (cos ωx + B_ω(t − |x|) e^{iω|x|})`
//! and the amplitude at the potential site, `C_ω = 1 + B_ω`, obeys
//! `dC/dt + (λ(t) − iω) C = −iω`. Before the switch-off starts `C` sits at
//! the static fixed point `iω/(iω − λ₀)`; after it ends `C − 1` rotates
//! freely at frequency `ω`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::potential::{PotentialProfile, ProfileKind};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Slack allowed when a time argument is compared against `T`.
const END_SLACK: f64 = 1e-12;

fn check_omega(operation: &'static str, omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            operation,
            format!("needs finite omega > 0, got {omega}"),
        ))
    }
}

fn check_time(operation: &'static str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(operation, format!("needs finite t >= 0, got {t}")))
    }
}

/// Static fixed point `C₀ = iω/(iω − λ₀)`.
pub fn c_static(omega: f64, lambda0: f64) -> Result<Complex64> {
    check_omega("c_static", omega)?;
    if !(lambda0 >= 0.0) {
        return Err(Error::domain(
            "c_static",
            format!("needs lambda0 >= 0, got {lambda0}"),
        ));
    }
    Ok(static_amplitude(omega, lambda0))
}

pub(crate) fn static_amplitude(omega: f64, lambda: f64) -> Complex64 {
    // iω/(iω − λ) = (ω² − iωλ)/(ω² + λ²)
    let d = omega * omega + lambda * lambda;
    Complex64::new(omega * omega / d, -omega * lambda / d)
}

/// Amplitude on `0 ≤ t < T` when the coupling drops suddenly to `λ₀/2`.
pub fn c_step(omega: f64, lambda0: f64, t: f64) -> Result<Complex64> {
    check_omega("c_step", omega)?;
    check_time("c_step", t)?;
    if !(lambda0 >= 0.0) {
        return Err(Error::domain(
            "c_step",
            format!("needs lambda0 >= 0, got {lambda0}"),
        ));
    }
    let (transient, settled) = step_terms(omega, lambda0);
    Ok(transient * Complex64::new(-0.5 * lambda0 * t, omega * t).exp() + settled)
}

/// `(C₀ − C_∞, C_∞)` for the step, with `C_∞ = iω/(iω − λ₀/2)`; the first is
/// written in factored form, `iω(λ₀/2)/((iω − λ₀)(iω − λ₀/2))`.
pub(crate) fn step_terms(omega: f64, lambda0: f64) -> (Complex64, Complex64) {
    let half = 0.5 * lambda0;
    let io = I * omega;
    let transient = io * half / ((io - lambda0) * (io - half));
    (transient, static_amplitude(omega, half))
}

fn rational_params(operation: &'static str, profile: &PotentialProfile) -> Result<(f64, f64, f64, f64)> {
    match (profile.f2(), profile.f3()) {
        (Some(f2), Some(f3)) => Ok((profile.lambda0(), f2, f3, profile.switch_off_duration()?)),
        _ => Err(Error::domain(
            operation,
            format!("needs a rational profile, got {:?}", profile.kind()),
        )),
    }
}

fn check_window(operation: &'static str, t: f64, end: f64) -> Result<f64> {
    check_time(operation, t)?;
    if t > end * (1.0 + END_SLACK) {
        return Err(Error::domain(operation, format!("t = {t} lies beyond T = {end}")));
    }
    Ok(t.min(end))
}

/// `G_ω(t) = ∫₀ᵗ e^{−(iω+f₃)s}(1 + f₂s) ds` in closed form.
pub fn g_rational(omega: f64, profile: &PotentialProfile, t: f64) -> Result<Complex64> {
    check_omega("g_rational", omega)?;
    let (_, f2, f3, end) = rational_params("g_rational", profile)?;
    let t = check_window("g_rational", t, end)?;
    Ok(g_closed(omega, f2, f3, t))
}

fn g_closed(omega: f64, f2: f64, f3: f64, t: f64) -> Complex64 {
    let a = Complex64::new(f3, omega);
    let decay = (-a * t).exp();
    (ONE - decay) / a * (ONE + f2 / a) - f2 * t * decay / a
}

/// Amplitude under the rational profile for `0 ≤ t ≤ T`.
pub fn c_rational(omega: f64, profile: &PotentialProfile, t: f64) -> Result<Complex64> {
    check_omega("c_rational", omega)?;
    let (lambda0, f2, f3, end) = rational_params("c_rational", profile)?;
    let t = check_window("c_rational", t, end)?;
    Ok(rational_closed(omega, lambda0, f2, f3, t))
}

fn rational_closed(omega: f64, lambda0: f64, f2: f64, f3: f64, t: f64) -> Complex64 {
    let c0 = static_amplitude(omega, lambda0);
    let growth = Complex64::new(f3 * t, omega * t).exp() / (1.0 + f2 * t);
    growth * (c0 - I * omega * g_closed(omega, f2, f3, t))
}

/// Free evolution after switch-off: `1 + (C(T) − 1)e^{iω·dt}`.
pub fn post_switch_c(c_at_end: Complex64, omega: f64, dt: f64) -> Complex64 {
    if dt == 0.0 {
        return c_at_end;
    }
    ONE + (c_at_end - ONE) * Complex64::from_polar(1.0, omega * dt)
}

/// Integrates the amplitude equation numerically from `C(0) = C₀` to `t`.
/// Works for every profile kind; the coupling is zero past `T`.
pub fn c_ode(omega: f64, profile: &PotentialProfile, t: f64) -> Result<Complex64> {
    c_ode_with(omega, profile, t, &OdeOptions::default())
}

pub fn c_ode_with(omega: f64, profile: &PotentialProfile, t: f64, opts: &OdeOptions) -> Result<Complex64> {
    check_omega("c_ode", omega)?;
    check_time("c_ode", t)?;
    let lambda0 = profile.lambda0();
    let mut c = static_amplitude(omega, lambda0);
    let rhs =
        |s: f64, c: Complex64| -> Complex64 { -I * omega - Complex64::new(profile.lambda_at(s), -omega) * c };
    let h0 = 0.1 / (omega + lambda0 + 1.0);

    // integrate segment by segment so no step straddles a kink in λ
    let mut start = 0.0;
    for stop in profile
        .breakpoints()
        .into_iter()
        .filter(|b| *b > 0.0 && *b < t)
        .chain(std::iter::once(t))
    {
        // evaluate λ from inside the segment so jumps at its ends are not sampled
        let (lo, hi) = (start, stop);
        let seg_rhs = |s: f64, c: Complex64| {
            let inside = s.clamp(lo + (hi - lo) * 1e-15, hi - (hi - lo) * 1e-15);
            rhs(inside, c)
        };
        c = ode::integrate(seg_rhs, start, c, stop, h0, opts)?;
        start = stop;
    }
    Ok(c)
}

/// Amplitude `C_ω(u)` at any time `u`, using the closed form when the
/// profile has one and the ODE integrator otherwise.
pub fn amplitude(omega: f64, profile: &PotentialProfile, u: f64) -> Result<Complex64> {
    check_omega("amplitude", omega)?;
    let lambda0 = profile.lambda0();
    if u <= 0.0 {
        return Ok(static_amplitude(omega, lambda0));
    }
    match profile.kind() {
        ProfileKind::Static => Ok(static_amplitude(omega, lambda0)),
        ProfileKind::Step => {
            let end = profile.switch_off_duration()?;
            if u <= end {
                c_step(omega, lambda0, u)
            } else {
                Ok(post_switch_c(c_step(omega, lambda0, end)?, omega, u - end))
            }
        }
        ProfileKind::Rational => {
            let (lambda0, f2, f3, end) = rational_params("amplitude", profile)?;
            if u <= end {
                Ok(rational_closed(omega, lambda0, f2, f3, u))
            } else {
                let c_end = rational_closed(omega, lambda0, f2, f3, end);
                Ok(post_switch_c(c_end, omega, u - end))
            }
        }
        ProfileKind::Sampled => {
            let end = profile.switch_off_duration()?;
            if u <= end {
                c_ode(omega, profile, u)
            } else {
                Ok(post_switch_c(c_ode(omega, profile, end)?, omega, u - end))
            }
        }
    }
}

/// Even mode function `f_ω(x, t)` with normalization `A`.
pub fn mode_function(omega: f64, x: f64, t: f64, profile: &PotentialProfile, norm: f64) -> Result<Complex64> {
    check_omega("mode_function", omega)?;
    let r = x.abs();
    let b = amplitude(omega, profile, t - r)? - ONE;
    let envelope = Complex64::from_polar(norm / (2.0 * omega).sqrt(), -omega * t);
    Ok(envelope * ((omega * x).cos() + b * Complex64::from_polar(1.0, omega * r)))
}

/// One quantized even mode in a box `[−L/2, L/2]` with static coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxMode {
    pub n: usize,
    /// Unperturbed frequency `2π(n + ½)/L`.
    pub omega0: f64,
    /// Phase shift `δ ∈ [0, π/2)`.
    pub delta: f64,
    /// Perturbed frequency `ω₀ + 2δ/L`.
    pub omega: f64,
    /// Normalization `A²`.
    pub a2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxSpectrum {
    pub length: f64,
    pub lambda0: f64,
    pub modes: Vec<BoxMode>,
}

impl BoxSpectrum {
    /// `ω cos(ωL/2) + λ₀ sin(ωL/2)` for mode `n`; zero for an exact root.
    pub fn residual(&self, n: usize) -> f64 {
        let w = self.modes[n].omega;
        let half = 0.5 * w * self.length;
        w * half.cos() + self.lambda0 * half.sin()
    }
}

/// Box normalization `A² = (2/L)(1 + 2λ₀/((λ₀² + ω²)L))⁻¹`.
pub fn box_normalization(omega: f64, lambda0: f64, length: f64) -> f64 {
    (2.0 / length) / (1.0 + 2.0 * lambda0 / ((lambda0 * lambda0 + omega * omega) * length))
}

/// Solves `ω_n sin δ_n = λ₀ cos δ_n` with `ω_n = ω₀,n + 2δ_n/L` for
/// `n = 0..=n_max` by bisection on `δ ∈ [0, π/2]`.
pub fn quantized_frequencies(lambda0: f64, length: f64, n_max: usize) -> Result<BoxSpectrum> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::domain(
            "quantized_frequencies",
            format!("needs L > 0, got {length}"),
        ));
    }
    if !(lambda0 >= 0.0 && lambda0.is_finite()) {
        return Err(Error::domain(
            "quantized_frequencies",
            format!("needs lambda0 >= 0, got {lambda0}"),
        ));
    }
    let mut modes = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let omega0 = 2.0 * std::f64::consts::PI * (n as f64 + 0.5) / length;
        let delta = phase_shift(omega0, lambda0, length).ok_or(Error::RootNotConverged { index: n })?;
        let omega = omega0 + 2.0 * delta / length;
        modes.push(BoxMode {
            n,
            omega0,
            delta,
            omega,
            a2: box_normalization(omega, lambda0, length),
        });
    }
    Ok(BoxSpectrum {
        length,
        lambda0,
        modes,
    })
}

fn phase_shift(omega0: f64, lambda0: f64, length: f64) -> Option<f64> {
    if lambda0 == 0.0 {
        return Some(0.0);
    }
    let g = |d: f64| (omega0 + 2.0 * d / length) * d.sin() - lambda0 * d.cos();
    let (mut lo, mut hi) = (0.0f64, FRAC_PI_2);
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-16 {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (hi - lo <= 1e-12).then_some(0.5 * (lo + hi))
}
