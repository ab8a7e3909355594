//! Regularized kinetic-energy densities and energies.
//!
//! L-cancellation convention: continuum operations use the box
//! normalization `A² = 2/L` together with the mode measure `L dω/(2π)`, so
//! the box length drops out. A per-mode density written with `A²` becomes
//! the same expression with `A²` replaced by `1/π` once the measure is
//! absorbed; the radiated per-mode density is therefore
//! `Δε̄_ω(u) = (1/(4πω)) (2ωλ(u) Im C_ω(u) + 2λ(u)² |C_ω(u)|²)`.
//! Per-mode energy changes keep `A² → 2` and leave the `1/(2π)` of the
//! measure to the caller.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mode::{self, BoxSpectrum};
use crate::potential::{PotentialProfile, ProfileKind};
use crate::quadrature::{self, QuadratureSpec, TailedEstimate};

/// Per-mode kinetic energy density of the static vacuum, `A²ω/4`.
pub fn static_mode_density(omega: f64, a2: f64) -> f64 {
    0.25 * a2 * omega
}

/// The unsimplified form `(A²ω/4)(1 + 2 Re B₀ + 2|B₀|²)` with
/// `B₀ = λ₀/(iω − λ₀)`.
pub fn static_mode_density_expanded(omega: f64, lambda0: f64, a2: f64) -> f64 {
    let b0 = Complex64::new(lambda0, 0.0) / Complex64::new(-lambda0, omega);
    0.25 * a2 * omega * (1.0 + 2.0 * b0.re + 2.0 * b0.norm_sqr())
}

/// `ε_R = A²_n ω_n/4 − ω₀,n/(2L)` for mode `n` of a box spectrum.
pub fn static_regularized_mode_density(n: usize, spectrum: &BoxSpectrum) -> f64 {
    let m = &spectrum.modes[n];
    static_mode_density(m.omega, m.a2) - m.omega0 / (2.0 * spectrum.length)
}

/// Leading `1/L²` behaviour of [`static_regularized_mode_density`].
pub fn static_regularized_leading_order(n: usize, spectrum: &BoxSpectrum) -> f64 {
    let m = &spectrum.modes[n];
    let l = spectrum.length;
    regularized_integrand(spectrum.lambda0, m.omega0) / (l * l)
}

/// `arcsin(λ/√(λ² + ω²)) − λω/(λ² + ω²)`.
fn regularized_integrand(lambda: f64, omega: f64) -> f64 {
    lambda.atan2(omega) - lambda * omega / (lambda * lambda + omega * omega)
}

/// `L·T₀₀,R` of the static vacuum: `(1/2π)∫₀^Λ [arcsin(λ₀/√(λ₀²+ω²)) − λ₀ω/(λ₀²+ω²)] dω`.
/// Tends to `λ₀/(2π)` as `Λ → ∞`.
pub fn static_density_continuum(lambda0: f64, cutoff: f64, quad: &QuadratureSpec) -> Result<f64> {
    if lambda0 == 0.0 {
        return Ok(0.0);
    }
    let spec = quad.with_cutoff(cutoff);
    let est = quadrature::integrate_1d(|w| regularized_integrand(lambda0, w), 0.0, cutoff, &spec)?;
    Ok(est.value / (2.0 * PI))
}

/// Total kinetic energy of the static vacuum, `λ₀/(2π)`.
pub fn static_total_energy(lambda0: f64) -> f64 {
    lambda0 / (2.0 * PI)
}

/// `Δε̄` for a given coupling and amplitude.
pub fn mode_density_from(omega: f64, lambda: f64, c: Complex64) -> f64 {
    // −iωλ(C − C*) = 2ωλ Im C
    lambda * (omega * c.im + lambda * c.norm_sqr()) / (2.0 * PI * omega)
}

/// Continuum per-mode regularized density `Δε̄_ω(u)` at retarded time `u`.
pub fn pulse_mode_density(omega: f64, u: f64, profile: &PotentialProfile) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(
            "pulse_mode_density",
            format!("needs omega > 0, got {omega}"),
        ));
    }
    if u < 0.0 || profile.kind() == ProfileKind::Static {
        return Ok(0.0);
    }
    let lambda = profile.lambda_at(u);
    if lambda == 0.0 || (u == 0.0 && lambda == profile.lambda0()) {
        return Ok(0.0);
    }
    let c = mode::amplitude(omega, profile, u)?;
    Ok(mode_density_from(omega, lambda, c))
}

/// Regularized kinetic energy density at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensitySample {
    pub x: f64,
    pub t: f64,
    #[serde(rename = "T00R")]
    pub value: f64,
}

/// Spectral integrand wrapper that remembers the first evaluation error.
struct Integrand<'a> {
    profile: &'a PotentialProfile,
    failure: RefCell<Option<Error>>,
}

impl<'a> Integrand<'a> {
    fn new(profile: &'a PotentialProfile) -> Self {
        Self {
            profile,
            failure: RefCell::new(None),
        }
    }

    fn eval(&self, u: f64, omega: f64) -> f64 {
        match pulse_mode_density(omega, u, self.profile) {
            Ok(v) => v,
            Err(e) => {
                self.failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    }

    fn finish<T>(self, result: Result<T>) -> Result<T> {
        match self.failure.into_inner() {
            Some(e) => Err(e),
            None => result,
        }
    }
}

/// `T₀₀,R(x, t) = ∫₀^Λ Δε̄_ω(t − |x|) dω`.
pub fn pulse_density(
    x: f64,
    t: f64,
    profile: &PotentialProfile,
    quad: &QuadratureSpec,
) -> Result<DensitySample> {
    let value = pulse_density_value(t - x.abs(), profile, quad)?;
    Ok(DensitySample { x, t, value })
}

fn pulse_density_value(u: f64, profile: &PotentialProfile, quad: &QuadratureSpec) -> Result<f64> {
    quad.validate()?;
    if u < 0.0 || profile.kind() == ProfileKind::Static {
        return Ok(0.0);
    }
    if profile.lambda_at(u) == 0.0 {
        return Ok(0.0);
    }
    let integrand = Integrand::new(profile);
    let est = quadrature::integrate_1d(|w| integrand.eval(u, w), 0.0, quad.cutoff, quad);
    integrand.finish(est).map(|e| e.value)
}

/// Densities on the grid `xs × ts`, `t` outermost.
pub fn pulse_density_grid(
    xs: &[f64],
    ts: &[f64],
    profile: &PotentialProfile,
    quad: &QuadratureSpec,
) -> Result<Vec<DensitySample>> {
    let mut out = Vec::with_capacity(xs.len() * ts.len());
    for &t in ts {
        for &x in xs {
            out.push(pulse_density(x, t, profile, quad)?);
        }
    }
    Ok(out)
}

/// Writes `x,t,T00R` rows with nine significant digits.
pub fn write_density_csv<W: Write>(mut w: W, samples: &[DensitySample]) -> std::io::Result<()> {
    writeln!(w, "x,t,T00R")?;
    for s in samples {
        writeln!(w, "{},{},{}", sig9(s.x), sig9(s.t), sig9(s.value))?;
    }
    Ok(())
}

/// Nine significant digits in scientific notation.
pub fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Energy budget of a switch-off.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub lambda0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f2: Option<f64>,
    #[serde(rename = "T")]
    pub duration: f64,
    /// Static vacuum energy before the switch-off, `λ₀/(2π)`.
    #[serde(rename = "E_initial")]
    pub e_initial: f64,
    /// Energy radiated into `x > 0` by `t = T`.
    #[serde(rename = "E_radiated_half")]
    pub e_radiated_half: f64,
    /// Both half-lines.
    #[serde(rename = "E_radiated_total")]
    pub e_radiated_total: f64,
    pub cutoff: f64,
    pub tail_estimate: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// `E(0→T) = ∫₀^T du ∫₀^Λ Δε̄_ω(u) dω`, the energy in `0 < x < T` at `t = T`.
pub fn radiated_energy(profile: &PotentialProfile, quad: &QuadratureSpec) -> Result<EnergyReport> {
    let duration = profile.switch_off_duration()?;
    let integrand = Integrand::new(profile);
    let est = quadrature::integrate_2d(|u, w| integrand.eval(u, w), (0.0, duration), quad);
    let est: TailedEstimate = integrand.finish(est)?;
    Ok(EnergyReport {
        lambda0: profile.lambda0(),
        f2: profile.f2(),
        duration,
        e_initial: static_total_energy(profile.lambda0()),
        e_radiated_half: est.value,
        e_radiated_total: 2.0 * est.value,
        cutoff: quad.cutoff,
        tail_estimate: est.tail,
        error_estimate: est.error,
        subdivisions: est.subdivisions,
    })
}

/// Per-mode kinetic energy change for the step profile when `e^{−λ₀T/2}`
/// is negligible (continuum-normalized, `A² → 2`):
/// `−(λ₀ω/2) · 3(λ₀/2)² / ((ω² + (λ₀/2)²)(ω² + λ₀²))`.
pub fn step_mode_energy_change(omega: f64, lambda0: f64) -> f64 {
    let half = 0.5 * lambda0;
    let w2 = omega * omega;
    -0.5 * lambda0 * omega * 3.0 * half * half / ((w2 + half * half) * (w2 + lambda0 * lambda0))
}

/// Per-mode kinetic energy change `−(λ₀/2)(A²/2ω)(|C(T)|² − |C(0)|²)` for a
/// step of duration `T`, with `A² → 2`.
pub fn step_mode_energy_change_exact(omega: f64, lambda0: f64, duration: f64) -> Result<f64> {
    if !(duration >= 0.0) {
        return Err(Error::domain(
            "step_mode_energy_change_exact",
            format!("needs T >= 0, got {duration}"),
        ));
    }
    if duration == 0.0 {
        return Ok(0.0);
    }
    mode::c_step(omega, lambda0, duration)?;
    let (k, settled) = mode::step_terms(omega, lambda0);
    let half = 0.5 * lambda0;
    let w2 = omega * omega;
    let settled_shift =
        w2 * (lambda0 * lambda0 - half * half) / ((w2 + half * half) * (w2 + lambda0 * lambda0));
    let rotating = k * Complex64::new(-half * duration, omega * duration).exp();
    let change = settled_shift + rotating.norm_sqr() + 2.0 * (rotating * settled.conj()).re;
    Ok(-0.5 * lambda0 / omega * change)
}

/// `(1/2π)∫₀^Λ step_mode_energy_change dω`.
pub fn step_total_energy_change(lambda0: f64, quad: &QuadratureSpec) -> Result<TailedEstimate> {
    let est = quadrature::integrate_semi_infinite(|w| step_mode_energy_change(w, lambda0), 0.0, quad)?;
    Ok(TailedEstimate {
        value: est.value / (2.0 * PI),
        error: est.error / (2.0 * PI),
        tail: est.tail / (2.0 * PI),
        subdivisions: est.subdivisions,
    })
}

/// Closed form of the full step-case spectral integral, `−λ₀ ln 2/(4π)`.
pub fn step_total_closed(lambda0: f64) -> f64 {
    -lambda0 * std::f64::consts::LN_2 / (4.0 * PI)
}

/// Quasi-static per-mode energy change (continuum-normalized, `A² → 2`),
/// `2ω ∫_{λ₀}^{0} λ²/(ω² + λ²)² dλ`, integrating over `λ` rather than `t`.
pub fn quasistatic_mode_energy_change(omega: f64, profile: &PotentialProfile) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(
            "quasistatic_mode_energy_change",
            format!("needs omega > 0, got {omega}"),
        ));
    }
    profile.switch_off_duration()?;
    let lambda0 = profile.lambda0();
    let w2 = omega * omega;
    let spec = QuadratureSpec::default().with_rel_tol(1e-12).with_abs_tol(1e-15);
    let est = quadrature::integrate_1d(
        |l| {
            let d = w2 + l * l;
            l * l / (d * d)
        },
        0.0,
        lambda0,
        &spec,
    )?;
    Ok(-2.0 * omega * est.value)
}

/// Quasi-static total `ΔE_K = −λ₀/(2π)`.
pub fn quasistatic_total(lambda0: f64) -> f64 {
    -lambda0 / (2.0 * PI)
}

/// `(1/2π)∫₀^{λ₀} dλ ∫₀^Λ dω (−2ωλ²/(ω² + λ²)²)` by iterated quadrature.
pub fn quasistatic_total_numeric(lambda0: f64, quad: &QuadratureSpec) -> Result<TailedEstimate> {
    let est = quadrature::integrate_2d(
        |l, w| {
            let d = w * w + l * l;
            -2.0 * w * l * l / (d * d)
        },
        (0.0, lambda0),
        quad,
    )?;
    Ok(TailedEstimate {
        value: est.value / (2.0 * PI),
        error: est.error / (2.0 * PI),
        tail: est.tail / (2.0 * PI),
        subdivisions: est.subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::quantized_frequencies;

    #[test]
    fn free_static_density() {
        let l = 40.0;
        assert!((static_mode_density(3.0, 2.0 / l) - 3.0 / (2.0 * l)).abs() < 1e-16);
        assert!((static_mode_density_expanded(3.0, 0.0, 2.0 / l) - 3.0 / (2.0 * l)).abs() < 1e-16);
    }

    #[test]
    fn static_bracket_collapses_to_one() {
        for (w, l0) in [(0.1, 2.0), (1.0, 1.0), (5.0, 0.3), (30.0, 4.0)] {
            let b0 = Complex64::new(l0, 0.0) / Complex64::new(-l0, w);
            assert!((1.0 + 2.0 * b0.re + 2.0 * b0.norm_sqr() - 1.0).abs() < 1e-14);
            let a2 = crate::mode::box_normalization(w, l0, 50.0);
            let d = static_mode_density(w, a2);
            assert!((static_mode_density_expanded(w, l0, a2) - d).abs() < 1e-14 * d);
        }
    }

    #[test]
    fn regularized_static_density() {
        let free = quantized_frequencies(0.0, 100.0, 3).unwrap();
        assert_eq!(static_regularized_mode_density(2, &free), 0.0);

        let l = 1e4;
        let s = quantized_frequencies(1.0, l, 0).unwrap();
        let exact = static_regularized_mode_density(0, &s);
        let approx = static_regularized_leading_order(0, &s);
        assert!(
            ((exact - approx) / exact).abs() <= 10.0 / l,
            "{exact} vs {approx}"
        );

        let a = static_regularized_mode_density(0, &quantized_frequencies(1.0, 500.0, 0).unwrap());
        let b = static_regularized_mode_density(0, &quantized_frequencies(1.0, 1000.0, 0).unwrap());
        assert!((a / b - 4.0).abs() < 0.1, "ratio {}", a / b);
    }

    #[test]
    fn static_continuum_density() {
        let quad = QuadratureSpec::default();
        assert_eq!(static_density_continuum(0.0, 1e4, &quad).unwrap(), 0.0);
        let v = static_density_continuum(1.0, 1e4, &quad).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-3 / (2.0 * PI));
        assert!((regularized_integrand(1.0, 1.0) - (PI / 4.0 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn static_totals() {
        assert_eq!(static_total_energy(0.0), 0.0);
        assert!((static_total_energy(1.0) - 0.159155).abs() < 1e-6);
        assert!((static_total_energy(2.0) - std::f64::consts::FRAC_1_PI).abs() < 1e-15);
        assert_eq!(quasistatic_total(0.0), 0.0);
        assert!((quasistatic_total(1.0) + 0.159155).abs() < 1e-6);
    }

    #[test]
    fn pulse_mode_density_vanishes_outside_window() {
        let p = PotentialProfile::rational(1.0, 2.0).unwrap();
        assert_eq!(pulse_mode_density(1.0, 0.6, &p).unwrap(), 0.0);
        assert_eq!(pulse_mode_density(1.0, -0.2, &p).unwrap(), 0.0);
        assert!(pulse_mode_density(0.0, 0.2, &p).is_err());
        // continuous at u = 0
        assert!(pulse_mode_density(1.0, 1e-12, &p).unwrap().abs() < 1e-10);
    }

    #[test]
    fn pulse_density_sign_inside_window() {
        let p = PotentialProfile::rational(1.0, 2.0).unwrap();
        let s = pulse_density(0.1, 0.3, &p, &QuadratureSpec::default()).unwrap();
        assert!(s.value < 0.0, "{}", s.value);
        assert_eq!(
            pulse_density(-0.1, 0.3, &p, &QuadratureSpec::default())
                .unwrap()
                .value,
            s.value
        );
        assert_eq!(
            pulse_density(0.5, 0.3, &p, &QuadratureSpec::default())
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            pulse_density(0.1, 1.0, &p, &QuadratureSpec::default())
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn step_spectrum() {
        assert_eq!(step_mode_energy_change(0.0, 1.0), 0.0);
        for w in [1e-3, 0.1, 1.0, 10.0, 1e3] {
            assert!(step_mode_energy_change(w, 1.0) < 0.0);
        }
        let big = step_mode_energy_change(1e4, 1.0);
        let bigger = step_mode_energy_change(2e4, 1.0);
        assert!((big / bigger - 8.0).abs() < 1e-3);
        assert_eq!(step_mode_energy_change_exact(1.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn quasistatic_mode() {
        let p = PotentialProfile::rational(1.0, 2.0).unwrap();
        // closed form of 2ω∫₀^λ₀ λ²/(ω²+λ²)² dλ = atan(λ₀/ω) − ωλ₀/(ω²+λ₀²)
        for w in [0.1, 1.0, 3.0] {
            let got = quasistatic_mode_energy_change(w, &p).unwrap();
            let expect = -((1.0f64 / w).atan() - w / (w * w + 1.0));
            assert!((got - expect).abs() < 1e-12);
            assert!(got < 0.0);
        }
        let q = PotentialProfile::step(0.0, 1.0).unwrap();
        assert_eq!(quasistatic_mode_energy_change(1.0, &q).unwrap(), 0.0);
        assert!(quasistatic_mode_energy_change(1.0, &PotentialProfile::constant(1.0).unwrap()).is_err());
    }

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        write_density_csv(
            &mut buf,
            &[DensitySample {
                x: 0.5,
                t: 1.0,
                value: -0.0123456789123,
            }],
        )
        .unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "x,t,T00R\n5.00000000e-1,1.00000000e0,-1.23456789e-2\n");
    }
}
