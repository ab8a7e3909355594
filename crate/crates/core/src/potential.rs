//! Time-dependent coupling strength `λ(t)` of the delta potential `V = 2λ(t)δ(x)`.
//!
//! Every profile holds `λ = λ₀` for `t < 0` and, except for the static one,
//! switches off to `λ = 0` for `t > T`. Units are natural (`c = 1`): `λ` is
//! an inverse length and times are lengths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discriminant of a [`PotentialProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Static,
    Step,
    Rational,
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Static {
        lambda0: f64,
    },
    /// `λ₀/2` on `[0, T)`.
    Step {
        lambda0: f64,
        duration: f64,
    },
    /// `f₂/(1 + f₂t) − (f₂ − λ₀)` on `[0, T]`.
    Rational {
        lambda0: f64,
        f2: f64,
    },
    /// Piecewise-linear through `(t, λ)` knots, first knot at `t = 0`.
    Sampled {
        samples: Vec<(f64, f64)>,
    },
}

/// A validated coupling history `λ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    shape: Shape,
}

impl PotentialProfile {
    /// Coupling held at `λ₀` forever.
    pub fn constant(lambda0: f64) -> Result<Self> {
        check_lambda0(lambda0)?;
        Ok(Self {
            shape: Shape::Static { lambda0 },
        })
    }

    /// Sudden drop to `λ₀/2` at `t = 0`, then to zero at `t = T`.
    pub fn step(lambda0: f64, duration: f64) -> Result<Self> {
        check_lambda0(lambda0)?;
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "step duration must be finite and positive, got {duration}"
            )));
        }
        Ok(Self {
            shape: Shape::Step { lambda0, duration },
        })
    }

    /// Step profile with the default duration `T = 100/λ₀`.
    pub fn step_default(lambda0: f64) -> Result<Self> {
        if lambda0 <= 0.0 {
            return Err(Error::InvalidProfile(
                "default step duration 100/λ₀ needs λ₀ > 0".into(),
            ));
        }
        Self::step(lambda0, 100.0 / lambda0)
    }

    /// Rational switch-off; requires `f₂ > λ₀ > 0`.
    pub fn rational(lambda0: f64, f2: f64) -> Result<Self> {
        check_lambda0(lambda0)?;
        if !(lambda0 > 0.0 && f2.is_finite() && f2 > lambda0) {
            return Err(Error::InvalidProfile(format!(
                "rational profile needs f2 > lambda0 > 0, got lambda0 = {lambda0}, f2 = {f2}"
            )));
        }
        Ok(Self {
            shape: Shape::Rational { lambda0, f2 },
        })
    }

    /// Piecewise-linear profile. Knots must start at `t = 0`, be strictly
    /// increasing in `t`, non-increasing in `λ`, and end at `λ = 0`.
    pub fn sampled(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidProfile(
                "sampled profile needs at least two knots".into(),
            ));
        }
        if samples.iter().any(|(t, l)| !t.is_finite() || !l.is_finite()) {
            return Err(Error::InvalidProfile("sampled knots must be finite".into()));
        }
        if samples[0].0 != 0.0 {
            return Err(Error::InvalidProfile(format!(
                "first knot must sit at t = 0, got t = {}",
                samples[0].0
            )));
        }
        check_lambda0(samples[0].1)?;
        for pair in samples.windows(2) {
            let ((t0, l0), (t1, l1)) = (pair[0], pair[1]);
            if t1 <= t0 {
                return Err(Error::InvalidProfile(format!(
                    "knot times must be strictly increasing ({t0} then {t1})"
                )));
            }
            if l1 > l0 {
                return Err(Error::InvalidProfile(format!(
                    "λ must be non-increasing ({l0} at t = {t0}, {l1} at t = {t1})"
                )));
            }
        }
        let last = samples[samples.len() - 1].1;
        if last != 0.0 {
            return Err(Error::InvalidProfile(format!(
                "last knot must have λ = 0, got {last}"
            )));
        }
        Ok(Self {
            shape: Shape::Sampled { samples },
        })
    }

    pub fn kind(&self) -> ProfileKind {
        match self.shape {
            Shape::Static { .. } => ProfileKind::Static,
            Shape::Step { .. } => ProfileKind::Step,
            Shape::Rational { .. } => ProfileKind::Rational,
            Shape::Sampled { .. } => ProfileKind::Sampled,
        }
    }

    /// Initial coupling `λ₀`.
    pub fn lambda0(&self) -> f64 {
        match &self.shape {
            Shape::Static { lambda0 } | Shape::Step { lambda0, .. } | Shape::Rational { lambda0, .. } => {
                *lambda0
            }
            Shape::Sampled { samples } => samples[0].1,
        }
    }

    /// Rate parameter `f₂` of the rational profile.
    pub fn f2(&self) -> Option<f64> {
        match self.shape {
            Shape::Rational { f2, .. } => Some(f2),
            _ => None,
        }
    }

    /// Derived `f₃ = f₂ − λ₀` of the rational profile.
    pub fn f3(&self) -> Option<f64> {
        match self.shape {
            Shape::Rational { lambda0, f2 } => Some(f2 - lambda0),
            _ => None,
        }
    }

    pub fn samples(&self) -> Option<&[(f64, f64)]> {
        match &self.shape {
            Shape::Sampled { samples } => Some(samples),
            _ => None,
        }
    }

    /// Time `T` at which the coupling reaches zero.
    pub fn switch_off_duration(&self) -> Result<f64> {
        match &self.shape {
            Shape::Static { .. } => Err(Error::NoSwitchOff),
            Shape::Step { duration, .. } => Ok(*duration),
            Shape::Rational { lambda0, f2 } => Ok(lambda0 / (f2 * (f2 - lambda0))),
            Shape::Sampled { samples } => Ok(samples[samples.len() - 1].0),
        }
    }

    /// `λ(t)`.
    pub fn lambda_at(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.lambda0();
        }
        match &self.shape {
            Shape::Static { lambda0 } => *lambda0,
            Shape::Step { lambda0, duration } => {
                if t < *duration {
                    0.5 * lambda0
                } else {
                    0.0
                }
            }
            Shape::Rational { lambda0, f2 } => {
                let end = lambda0 / (f2 * (f2 - lambda0));
                if t > end {
                    0.0
                } else {
                    // rounding can leave a tiny negative residue at t = T
                    (f2 / (1.0 + f2 * t) - (f2 - lambda0)).max(0.0)
                }
            }
            Shape::Sampled { samples } => interpolate(samples, t),
        }
    }

    /// `F(t) = ∫₀ᵗ λ(u) du` for `t ≥ 0`.
    pub fn accumulated_f(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain("accumulated_F", format!("needs t >= 0, got {t}")));
        }
        Ok(match &self.shape {
            Shape::Static { lambda0 } => lambda0 * t,
            Shape::Step { lambda0, duration } => 0.5 * lambda0 * t.min(*duration),
            Shape::Rational { lambda0, f2 } => {
                let f3 = f2 - lambda0;
                let s = t.min(lambda0 / (f2 * f3));
                (f2 * s).ln_1p() - f3 * s
            }
            Shape::Sampled { samples } => {
                let mut acc = 0.0;
                for pair in samples.windows(2) {
                    let ((t0, l0), (t1, l1)) = (pair[0], pair[1]);
                    if t <= t0 {
                        break;
                    }
                    let hi = t.min(t1);
                    let lhi = l0 + (l1 - l0) * (hi - t0) / (t1 - t0);
                    acc += 0.5 * (l0 + lhi) * (hi - t0);
                }
                acc
            }
        })
    }

    /// Times in `(0, ∞)` where `λ` or its derivative is discontinuous.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Static { .. } => Vec::new(),
            Shape::Step { duration, .. } => vec![*duration],
            Shape::Rational { .. } => vec![self.switch_off_duration().unwrap_or(f64::INFINITY)],
            Shape::Sampled { samples } => samples[1..].iter().map(|(t, _)| *t).collect(),
        }
    }
}

fn check_lambda0(lambda0: f64) -> Result<()> {
    if lambda0.is_finite() && lambda0 >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!(
            "lambda0 must be finite and non-negative, got {lambda0}"
        )))
    }
}

fn interpolate(samples: &[(f64, f64)], t: f64) -> f64 {
    let last = samples[samples.len() - 1];
    if t >= last.0 {
        return 0.0;
    }
    let idx = samples.partition_point(|(ts, _)| *ts <= t);
    let (t0, l0) = samples[idx - 1];
    let (t1, l1) = samples[idx];
    l0 + (l1 - l0) * (t - t0) / (t1 - t0)
}

/// JSON form of a profile:
/// `{"kind": "rational", "lambda0": 1, "f2": 2}`,
/// `{"kind": "step", "lambda0": 1, "T": 100}`,
/// `{"kind": "sampled", "samples": [[0, 1], [0.5, 0]]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: Option<ProfileKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f2: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
}

impl ProfileSpec {
    pub fn build(&self) -> Result<PotentialProfile> {
        let need_lambda0 = || {
            self.lambda0
                .ok_or_else(|| Error::InvalidProfile("missing lambda0".into()))
        };
        match self.kind {
            None => Err(Error::InvalidProfile("missing kind".into())),
            Some(ProfileKind::Static) => PotentialProfile::constant(need_lambda0()?),
            Some(ProfileKind::Step) => match self.duration {
                Some(d) => PotentialProfile::step(need_lambda0()?, d),
                None => PotentialProfile::step_default(need_lambda0()?),
            },
            Some(ProfileKind::Rational) => {
                let f2 = self
                    .f2
                    .ok_or_else(|| Error::InvalidProfile("rational profile needs f2".into()))?;
                PotentialProfile::rational(need_lambda0()?, f2)
            }
            Some(ProfileKind::Sampled) => {
                let samples = self
                    .samples
                    .as_ref()
                    .ok_or_else(|| Error::InvalidProfile("sampled profile needs samples".into()))?;
                let profile = PotentialProfile::sampled(samples.iter().map(|[t, l]| (*t, *l)).collect())?;
                if let Some(l0) = self.lambda0 {
                    if l0 != profile.lambda0() {
                        return Err(Error::InvalidProfile(format!(
                            "lambda0 = {l0} disagrees with first sample {}",
                            profile.lambda0()
                        )));
                    }
                }
                Ok(profile)
            }
        }
    }
}

impl From<&PotentialProfile> for ProfileSpec {
    fn from(p: &PotentialProfile) -> Self {
        ProfileSpec {
            kind: Some(p.kind()),
            lambda0: Some(p.lambda0()),
            f2: p.f2(),
            duration: match p.kind() {
                ProfileKind::Step => p.switch_off_duration().ok(),
                _ => None,
            },
            samples: p.samples().map(|s| s.iter().map(|(t, l)| [*t, *l]).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_endpoints_and_midpoint() {
        let p = PotentialProfile::rational(1.0, 2.0).unwrap();
        assert_eq!(p.lambda_at(0.0), 1.0);
        assert!(p.lambda_at(0.5).abs() < 1e-15);
        assert!((p.lambda_at(0.25) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.lambda_at(-3.0), 1.0);
        assert_eq!(p.lambda_at(0.7), 0.0);
    }

    #[test]
    fn step_values() {
        let p = PotentialProfile::step_default(1.0).unwrap();
        assert_eq!(p.lambda_at(0.3), 0.5);
        assert_eq!(p.lambda_at(0.0), 0.5);
        assert_eq!(p.lambda_at(-0.1), 1.0);
        assert_eq!(p.lambda_at(100.0), 0.0);
        assert_eq!(p.switch_off_duration().unwrap(), 100.0);
        assert_eq!(p.accumulated_f(250.0).unwrap(), 50.0);
    }

    #[test]
    fn durations() {
        let t = |l0, f2| {
            PotentialProfile::rational(l0, f2)
                .unwrap()
                .switch_off_duration()
                .unwrap()
        };
        assert_eq!(t(1.0, 2.0), 0.5);
        assert_eq!(t(0.5, 1.0), 1.0);
        assert_eq!(
            PotentialProfile::constant(1.0).unwrap().switch_off_duration(),
            Err(Error::NoSwitchOff)
        );
    }

    #[test]
    fn rational_accumulated_closed_form() {
        let p = PotentialProfile::rational(1.0, 2.0).unwrap();
        assert_eq!(p.accumulated_f(0.0).unwrap(), 0.0);
        let expect = 2f64.ln() - 0.5;
        assert!((p.accumulated_f(0.5).unwrap() - expect).abs() < 1e-15);
        assert!((p.accumulated_f(0.9).unwrap() - expect).abs() < 1e-15);
        assert!(p.accumulated_f(-1.0).is_err());
    }

    #[test]
    fn rejects_invalid_profiles() {
        assert!(PotentialProfile::rational(1.0, 1.0).is_err());
        assert!(PotentialProfile::rational(1.0, 0.5).is_err());
        assert!(PotentialProfile::rational(0.0, 0.5).is_err());
        assert!(PotentialProfile::constant(-1.0).is_err());
        assert!(PotentialProfile::step(1.0, 0.0).is_err());
        assert!(PotentialProfile::sampled(vec![(0.0, 1.0), (1.0, 0.1)]).is_err());
        assert!(PotentialProfile::sampled(vec![(0.0, 1.0), (1.0, 1.5), (2.0, 0.0)]).is_err());
        assert!(PotentialProfile::sampled(vec![(0.0, 1.0), (0.0, 0.0)]).is_err());
        assert!(PotentialProfile::sampled(vec![(0.1, 1.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn sampled_interpolates_and_accumulates() {
        let p = PotentialProfile::sampled(vec![(0.0, 2.0), (1.0, 1.0), (3.0, 0.0)]).unwrap();
        assert_eq!(p.lambda0(), 2.0);
        assert_eq!(p.lambda_at(0.5), 1.5);
        assert_eq!(p.lambda_at(2.0), 0.5);
        assert_eq!(p.lambda_at(3.0), 0.0);
        assert_eq!(p.switch_off_duration().unwrap(), 3.0);
        assert!((p.accumulated_f(0.5).unwrap() - 0.875).abs() < 1e-15);
        assert!((p.accumulated_f(10.0).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let spec: ProfileSpec =
            serde_json::from_str(r#"{"kind": "rational", "lambda0": 1, "f2": 2}"#).unwrap();
        let p = spec.build().unwrap();
        assert_eq!(p, PotentialProfile::rational(1.0, 2.0).unwrap());

        let spec: ProfileSpec = serde_json::from_str(r#"{"kind": "step", "lambda0": 2}"#).unwrap();
        assert_eq!(spec.build().unwrap().switch_off_duration().unwrap(), 50.0);

        let spec: ProfileSpec =
            serde_json::from_str(r#"{"kind":"sampled","samples":[[0,1],[0.5,0]]}"#).unwrap();
        let p = spec.build().unwrap();
        let back: ProfileSpec =
            serde_json::from_str(&serde_json::to_string(&ProfileSpec::from(&p)).unwrap()).unwrap();
        assert_eq!(back.build().unwrap(), p);

        let bad: ProfileSpec = serde_json::from_str(r#"{"kind": "rational", "lambda0": 1}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
