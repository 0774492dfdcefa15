use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ControllerError;

/// The six motion classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternClass {
    Stabilized,
    CenteredRotation,
    DisplacedRotation,
    ScaleChange,
    PlanarMotion,
    TranslationNoise,
}

/// The twelve motion patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "Eb")]
    Eb,
    #[serde(rename = "Eb_s")]
    EbSmall,
    #[serde(rename = "Er_s")]
    ErSlow,
    #[serde(rename = "Er_f")]
    ErFast,
    #[serde(rename = "Ed")]
    Ed,
    #[serde(rename = "Es_s")]
    EsSlow,
    #[serde(rename = "Es_f")]
    EsFast,
    #[serde(rename = "Es_w")]
    EsWide,
    #[serde(rename = "Em_s")]
    EmSlow,
    #[serde(rename = "Em_f")]
    EmFast,
    #[serde(rename = "En_s")]
    EnSmall,
    #[serde(rename = "En_l")]
    EnLarge,
}

impl Variant {
    pub const ALL: [Variant; 12] = [
        Variant::Eb,
        Variant::EbSmall,
        Variant::ErSlow,
        Variant::ErFast,
        Variant::Ed,
        Variant::EsSlow,
        Variant::EsFast,
        Variant::EsWide,
        Variant::EmSlow,
        Variant::EmFast,
        Variant::EnSmall,
        Variant::EnLarge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Eb => "Eb",
            Variant::EbSmall => "Eb_s",
            Variant::ErSlow => "Er_s",
            Variant::ErFast => "Er_f",
            Variant::Ed => "Ed",
            Variant::EsSlow => "Es_s",
            Variant::EsFast => "Es_f",
            Variant::EsWide => "Es_w",
            Variant::EmSlow => "Em_s",
            Variant::EmFast => "Em_f",
            Variant::EnSmall => "En_s",
            Variant::EnLarge => "En_l",
        }
    }

    pub fn class(self) -> PatternClass {
        match self {
            Variant::Eb | Variant::EbSmall => PatternClass::Stabilized,
            Variant::ErSlow | Variant::ErFast => PatternClass::CenteredRotation,
            Variant::Ed => PatternClass::DisplacedRotation,
            Variant::EsSlow | Variant::EsFast | Variant::EsWide => PatternClass::ScaleChange,
            Variant::EmSlow | Variant::EmFast => PatternClass::PlanarMotion,
            Variant::EnSmall | Variant::EnLarge => PatternClass::TranslationNoise,
        }
    }

    /// Default parameters. Rates, amplitudes and noise levels other than the
    /// 70 px and 35 px object diagonals are configurable choices.
    pub fn default_params(self) -> PatternParams {
        let deg = std::f64::consts::PI / 180.0;
        let base = PatternParams::default();
        match self {
            Variant::Eb => base,
            Variant::EbSmall => PatternParams {
                target_diagonal: 35.0,
                ..base
            },
            Variant::ErSlow => PatternParams {
                roll_rate: deg,
                ..base
            },
            Variant::ErFast => PatternParams {
                roll_rate: 5.0 * deg,
                ..base
            },
            Variant::Ed => PatternParams {
                roll_rate: 2.0 * deg,
                displacement: 0.25,
                ..base
            },
            Variant::EsSlow => PatternParams {
                scale_amplitude: 0.3,
                scale_period: 200.0,
                ..base
            },
            Variant::EsFast => PatternParams {
                scale_amplitude: 0.3,
                scale_period: 40.0,
                ..base
            },
            Variant::EsWide => PatternParams {
                scale_amplitude: 0.6,
                scale_period: 100.0,
                ..base
            },
            Variant::EmSlow => PatternParams {
                orbit_radius: 0.25,
                orbit_period: 200.0,
                ..base
            },
            Variant::EmFast => PatternParams {
                orbit_radius: 0.25,
                orbit_period: 40.0,
                ..base
            },
            Variant::EnSmall => PatternParams {
                noise_sigma: 2.0,
                ..base
            },
            Variant::EnLarge => PatternParams {
                noise_sigma: 15.0,
                ..base
            },
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = ControllerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                ControllerError::InvalidPattern(format!("unknown pattern variant {s:?}"))
            })
    }
}

/// Numeric parameters of a motion pattern. Angles are radians, lengths are
/// pixels unless noted, periods are frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternParams {
    pub target_diagonal: f64,
    /// Roll increment per frame.
    pub roll_rate: f64,
    /// Displacement of the target from the principal point, as a fraction of
    /// `min(width, height)`.
    pub displacement: f64,
    pub scale_amplitude: f64,
    pub scale_period: f64,
    /// Orbit radius as a fraction of `min(width, height)`.
    pub orbit_radius: f64,
    pub orbit_period: f64,
    /// Per-axis standard deviation of the per-frame displacement.
    pub noise_sigma: f64,
    pub seed: u64,
    pub margin: f64,
}

impl Default for PatternParams {
    fn default() -> Self {
        Self {
            target_diagonal: 70.0,
            roll_rate: 0.0,
            displacement: 0.0,
            scale_amplitude: 0.0,
            scale_period: 100.0,
            orbit_radius: 0.0,
            orbit_period: 100.0,
            noise_sigma: 0.0,
            seed: 0,
            margin: 8.0,
        }
    }
}

impl PatternParams {
    pub fn validate(&self) -> Result<(), ControllerError> {
        let bad = |m: &str| Err(ControllerError::InvalidPattern(m.to_string()));
        let all = [
            self.target_diagonal,
            self.roll_rate,
            self.displacement,
            self.scale_amplitude,
            self.scale_period,
            self.orbit_radius,
            self.orbit_period,
            self.noise_sigma,
            self.margin,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("parameters must be finite");
        }
        if self.target_diagonal <= 0.0 {
            return bad("target_diagonal must be positive");
        }
        if self.scale_period < 2.0 || self.orbit_period < 2.0 {
            return bad("periods must be at least 2 frames");
        }
        if !(0.0..1.0).contains(&self.scale_amplitude) {
            return bad("scale_amplitude must be in [0, 1)");
        }
        if self.noise_sigma < 0.0 || self.margin < 0.0 {
            return bad("noise_sigma and margin must be non-negative");
        }
        if self.displacement < 0.0 || self.orbit_radius < 0.0 {
            return bad("displacement and orbit_radius must be non-negative");
        }
        Ok(())
    }
}

/// A motion pattern: variant plus parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionPattern {
    pub variant: Variant,
    pub params: PatternParams,
}

impl MotionPattern {
    pub fn new(variant: Variant, params: PatternParams) -> Result<Self, ControllerError> {
        params.validate()?;
        Ok(Self { variant, params })
    }

    pub fn with_defaults(variant: Variant) -> Self {
        Self {
            variant,
            params: variant.default_params(),
        }
    }

    pub fn class(&self) -> PatternClass {
        self.variant.class()
    }

    pub fn name(&self) -> &'static str {
        self.variant.name()
    }

    /// Largest diagonal the pattern asks for.
    pub fn max_diagonal(&self) -> f64 {
        match self.variant.class() {
            PatternClass::ScaleChange => {
                self.params.target_diagonal * (1.0 + self.params.scale_amplitude)
            }
            _ => self.params.target_diagonal,
        }
    }
}

/// Pattern configuration as written in JSON: a variant plus optional
/// overrides of its default parameters. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternConfig {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_diagonal: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roll_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub displacement: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl PatternConfig {
    pub fn variant(name: &str) -> Self {
        Self {
            variant: name.to_string(),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ControllerError> {
        serde_json::from_str(text).map_err(|e| ControllerError::InvalidPattern(e.to_string()))
    }

    pub fn resolve(&self) -> Result<MotionPattern, ControllerError> {
        let variant: Variant = self.variant.parse()?;
        let mut p = variant.default_params();
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { p.$field = v; })*
            };
        }
        apply!(
            target_diagonal,
            roll_rate,
            displacement,
            scale_amplitude,
            scale_period,
            orbit_radius,
            orbit_period,
            noise_sigma,
            seed,
            margin
        );
        MotionPattern::new(variant, p)
    }

    /// Config with every parameter spelled out.
    pub fn from_pattern(m: &MotionPattern) -> Self {
        let p = &m.params;
        Self {
            variant: m.name().to_string(),
            target_diagonal: Some(p.target_diagonal),
            roll_rate: Some(p.roll_rate),
            displacement: Some(p.displacement),
            scale_amplitude: Some(p.scale_amplitude),
            scale_period: Some(p.scale_period),
            orbit_radius: Some(p.orbit_radius),
            orbit_period: Some(p.orbit_period),
            noise_sigma: Some(p.noise_sigma),
            seed: Some(p.seed),
            margin: Some(p.margin),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
            let json = serde_json::to_string(&v).unwrap();
            assert_eq!(json, format!("\"{}\"", v.name()));
        }
        assert!("Ex".parse::<Variant>().is_err());
    }

    #[test]
    fn classes() {
        let count = |c| Variant::ALL.iter().filter(|v| v.class() == c).count();
        assert_eq!(count(PatternClass::Stabilized), 2);
        assert_eq!(count(PatternClass::ScaleChange), 3);
        assert_eq!(count(PatternClass::DisplacedRotation), 1);
    }

    #[test]
    fn config_overrides_and_rejects_unknown_keys() {
        let cfg =
            PatternConfig::from_json(r#"{"variant":"En_l","noise_sigma":4.5,"seed":9}"#).unwrap();
        let p = cfg.resolve().unwrap();
        assert_eq!(p.variant, Variant::EnLarge);
        assert_eq!(p.params.noise_sigma, 4.5);
        assert_eq!(p.params.seed, 9);
        assert_eq!(p.params.target_diagonal, 70.0);
        assert!(PatternConfig::from_json(r#"{"variant":"Eb","speed":3}"#).is_err());
    }

    #[test]
    fn invalid_params() {
        let bad = [
            r#"{"variant":"Es_w","scale_amplitude":1.0}"#,
            r#"{"variant":"Em_f","orbit_period":1}"#,
            r#"{"variant":"Eb","target_diagonal":0}"#,
            r#"{"variant":"En_s","noise_sigma":-1}"#,
        ];
        for json in bad {
            assert!(
                PatternConfig::from_json(json).unwrap().resolve().is_err(),
                "{json}"
            );
        }
    }

    #[test]
    fn small_target_default() {
        assert_eq!(Variant::EbSmall.default_params().target_diagonal, 35.0);
        assert_eq!(Variant::Eb.default_params().target_diagonal, 70.0);
    }
}
