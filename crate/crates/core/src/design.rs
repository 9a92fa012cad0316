//! Waveguide design rules.
//!
//! Every rate is per metre of propagation; the engine's "time" is propagation
//! length, so a loss rate in m^-1 plugs straight into the dimensionless model.
//! Only the pair rate brings the speed of light back in.

use serde::{Deserialize, Serialize};

use crate::error::DesignError;
use crate::scalar::Real;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `g / (4|delta|)` at or above which coupling asymmetry counts as negligible.
pub const ASYMMETRY_THRESHOLD: f64 = 10.0;

const BUILTIN_JSON: &str = include_str!("../data/platforms.json");
const PLATFORM_SCHEMA: &str = "pairgen.platforms/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialPlatform<T: Real> {
    pub name: String,
    /// Nonlinear refractive index, m^2/W.
    pub n2: T,
    /// Vacuum wavelength, m.
    pub wavelength: T,
    /// Effective modal area, m^2.
    pub modal_area: T,
    /// Coupling of each arm to the lossy central waveguide, m^-1.
    pub g: T,
    /// Loss of the central waveguide, m^-1.
    pub gamma3: T,
    /// Propagation loss of the arms, m^-1.
    pub gamma_linear: T,
}

impl<T: Real> MaterialPlatform<T> {
    pub fn validate(&self) -> Result<(), DesignError> {
        for (field, x) in [
            ("n2", self.n2),
            ("wavelength", self.wavelength),
            ("modal_area", self.modal_area),
            ("g", self.g),
            ("gamma3", self.gamma3),
            ("gamma_linear", self.gamma_linear),
        ] {
            if !(x > T::zero()) || !x.is_finite() {
                return Err(DesignError::InvalidPlatform {
                    name: self.name.clone(),
                    reason: format!("{field} must be finite and > 0, got {x}"),
                });
            }
        }
        Ok(())
    }

    /// Engineered symmetric-mode loss `8 g^2 / gamma3`.
    pub fn collective_loss(&self) -> T {
        T::lit(8.0) * self.g * self.g / self.gamma3
    }

    /// Nonlinear coefficient `2 pi n2 / (lambda S)`, 1/(W m).
    pub fn nonlinear_coefficient(&self) -> T {
        T::lit(2.0) * T::PI() * self.n2 / (self.wavelength * self.modal_area)
    }

    fn cast<U: Real>(&self) -> MaterialPlatform<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        MaterialPlatform {
            name: self.name.clone(),
            n2: c(self.n2),
            wavelength: c(self.wavelength),
            modal_area: c(self.modal_area),
            g: c(self.g),
            gamma3: c(self.gamma3),
            gamma_linear: c(self.gamma_linear),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatformFile {
    schema: String,
    platforms: Vec<MaterialPlatform<f64>>,
}

/// Parses a platform document: `{"schema": "pairgen.platforms/1", "platforms": [...]}`.
/// A bare platform object is accepted too.
pub fn platforms_from_json<T: Real>(json: &str) -> Result<Vec<MaterialPlatform<T>>, DesignError> {
    let parsed = match serde_json::from_str::<PlatformFile>(json) {
        Ok(file) => {
            if file.schema != PLATFORM_SCHEMA {
                return Err(DesignError::InvalidInput(format!(
                    "unsupported platform schema `{}`, expected `{PLATFORM_SCHEMA}`",
                    file.schema
                )));
            }
            file.platforms
        }
        Err(file_err) => match serde_json::from_str::<MaterialPlatform<f64>>(json) {
            Ok(single) => vec![single],
            Err(_) => return Err(DesignError::InvalidInput(format!("platform file: {file_err}"))),
        },
    };
    parsed
        .iter()
        .map(|p| {
            p.validate()?;
            Ok(p.cast())
        })
        .collect()
}

/// Shipped presets: fused_silica, IG2, silicon, InP.
pub fn builtin_platforms<T: Real>() -> Vec<MaterialPlatform<T>> {
    platforms_from_json(BUILTIN_JSON).expect("shipped platform table is valid")
}

pub fn lookup<T: Real>(name: &str) -> Result<MaterialPlatform<T>, DesignError> {
    builtin_platforms()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| DesignError::UnknownPlatform(name.to_string()))
}

/// `Gamma = 8 g^2 / gamma3`.
pub fn collective_loss_rate<T: Real>(g: T, gamma3: T) -> Result<T, DesignError> {
    if !(gamma3 > T::zero()) || g < T::zero() {
        return Err(DesignError::InvalidInput(format!(
            "need g >= 0 and gamma3 > 0, got g = {g}, gamma3 = {gamma3}"
        )));
    }
    Ok(T::lit(8.0) * g * g / gamma3)
}

/// Adiabatic elimination of the central waveguide needs `gamma3 >= 4 g`.
pub fn adiabatic_ok<T: Real>(g: T, gamma3: T) -> bool {
    gamma3 >= T::lit(4.0) * g
}

/// Pump suppression `10 log10(e) (Gamma + gamma) L` in dB.
pub fn rejection_db<T: Real>(length: T, big_gamma: T, gamma_linear: T) -> T {
    T::lit(10.0) * T::LOG10_E() * (big_gamma + gamma_linear) * length
}

/// Pair rate `(2 pi n2 P / (lambda S))^2 c / (8 Gamma) eta`, s^-1.
pub fn pair_rate<T: Real>(platform: &MaterialPlatform<T>, power: T, big_gamma: T, eta: T) -> Result<T, DesignError> {
    if !(power > T::zero()) || !(big_gamma > T::zero()) {
        return Err(DesignError::InvalidInput(format!(
            "need power > 0 and Gamma > 0, got P = {power}, Gamma = {big_gamma}"
        )));
    }
    let k = platform.nonlinear_coefficient() * power;
    Ok(k * k * T::lit(SPEED_OF_LIGHT) / (T::lit(8.0) * big_gamma) * eta)
}

/// Minimum device length and its margin against propagation loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinLength<T: Real> {
    pub big_gamma: T,
    /// Shortest length giving pump rejection `delta`, m.
    pub l_min: T,
    /// `L_min * gamma_linear`; well below 1 for a useful device.
    pub loss_margin: T,
    pub feasible: bool,
}

/// `L_min = (1/Gamma) ln(4 Gamma^2 / (U^2 |alpha|^2 delta))`, clamped at 0.
pub fn min_length<T: Real>(
    platform: &MaterialPlatform<T>,
    pump_photons: T,
    u_spatial: T,
    delta: T,
) -> Result<MinLength<T>, DesignError> {
    platform.validate()?;
    if !(pump_photons > T::zero()) || !(u_spatial > T::zero()) || !(delta > T::zero()) {
        return Err(DesignError::InvalidInput(format!(
            "need pump_photons, U and delta > 0, got {pump_photons}, {u_spatial}, {delta}"
        )));
    }
    let big_gamma = platform.collective_loss();
    let arg = T::lit(4.0) * big_gamma * big_gamma / (u_spatial * u_spatial * pump_photons * delta);
    let l_min = (arg.ln() / big_gamma).max(T::zero());
    let loss_margin = l_min * platform.gamma_linear;
    Ok(MinLength {
        big_gamma,
        l_min,
        loss_margin,
        feasible: loss_margin < T::one(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymmetryReport<T: Real> {
    /// `g / (4|delta|)`, infinite for symmetric coupling.
    pub ratio: T,
    pub pass: bool,
}

/// Coupling imbalance check at the default threshold.
pub fn asymmetry_check<T: Real>(g: T, delta_g: T) -> Result<AsymmetryReport<T>, DesignError> {
    asymmetry_check_with(g, delta_g, T::lit(ASYMMETRY_THRESHOLD))
}

pub fn asymmetry_check_with<T: Real>(g: T, delta_g: T, threshold: T) -> Result<AsymmetryReport<T>, DesignError> {
    if !(g > delta_g.abs()) {
        return Err(DesignError::InvalidInput(format!(
            "need g > |delta| so both couplings stay positive, got g = {g}, delta = {delta_g}"
        )));
    }
    let ratio = if delta_g == T::zero() {
        T::infinity()
    } else {
        g / (T::lit(4.0) * delta_g.abs())
    };
    Ok(AsymmetryReport {
        ratio,
        pass: ratio >= threshold,
    })
}

/// Inputs for a full design evaluation beyond the platform itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignInputs<T: Real> {
    /// Pump power, W.
    pub power: T,
    /// Residual-pump to pair ratio to reach.
    pub delta: T,
    /// Pump photon number in the interaction volume.
    pub pump_photons: T,
    /// Kerr rate per photon, m^-1; defaults to `gamma_NL P / pump_photons`.
    pub u_spatial: Option<T>,
    /// Pair survival factor; defaults to `e^{-2 gamma L_min}`.
    pub eta: Option<T>,
}

impl<T: Real> DesignInputs<T> {
    pub fn new(power: T, delta: T) -> Self {
        Self {
            power,
            delta,
            pump_photons: T::lit(1e10),
            u_spatial: None,
            eta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesignReport<T: Real> {
    pub platform: String,
    pub power: T,
    pub delta: T,
    #[serde(rename = "Gamma")]
    pub big_gamma: T,
    pub l_min: T,
    pub rejection_db_at_l_min: T,
    pub pair_rate: T,
    pub eta: T,
    pub pump_photons: T,
    pub u_spatial: T,
    pub loss_margin: T,
    pub feasible: bool,
    pub adiabatic_ok: bool,
    /// `pair_rate >= 1 kHz`.
    pub khz_scale: bool,
    pub notes: Vec<String>,
}

impl<T: Real> DesignReport<T> {
    /// Pump rejection at an arbitrary length for this design's rates.
    pub fn rejection_db(&self, length: T, gamma_linear: T) -> T {
        rejection_db(length, self.big_gamma, gamma_linear)
    }
}

pub fn design<T: Real>(platform: &MaterialPlatform<T>, inputs: &DesignInputs<T>) -> Result<DesignReport<T>, DesignError> {
    platform.validate()?;
    if !(inputs.power > T::zero()) {
        return Err(DesignError::InvalidInput(format!("power must be > 0, got {}", inputs.power)));
    }
    let u_spatial = inputs
        .u_spatial
        .unwrap_or_else(|| platform.nonlinear_coefficient() * inputs.power / inputs.pump_photons);
    let ml = min_length(platform, inputs.pump_photons, u_spatial, inputs.delta)?;
    let eta = inputs
        .eta
        .unwrap_or_else(|| (T::lit(-2.0) * platform.gamma_linear * ml.l_min).exp());
    let rate = pair_rate(platform, inputs.power, ml.big_gamma, eta)?;
    let adiabatic = adiabatic_ok(platform.g, platform.gamma3);
    let mut notes = Vec::new();
    if !adiabatic {
        notes.push(format!(
            "gamma3 = {} < 4g = {}: adiabatic elimination of the lossy waveguide is marginal",
            platform.gamma3,
            T::lit(4.0) * platform.g
        ));
    }
    if !ml.feasible {
        notes.push(format!(
            "L_min = {} m is not short compared with 1/gamma = {} m",
            ml.l_min,
            T::one() / platform.gamma_linear
        ));
    }
    let lambda = u_spatial * inputs.pump_photons / ml.big_gamma;
    if lambda > T::lit(0.1) {
        notes.push(format!("weak-pump parameter U|alpha|^2/Gamma = {lambda} is not small"));
    }
    Ok(DesignReport {
        platform: platform.name.clone(),
        power: inputs.power,
        delta: inputs.delta,
        big_gamma: ml.big_gamma,
        l_min: ml.l_min,
        rejection_db_at_l_min: rejection_db(ml.l_min, ml.big_gamma, platform.gamma_linear),
        pair_rate: rate,
        eta,
        pump_photons: inputs.pump_photons,
        u_spatial,
        loss_margin: ml.loss_margin,
        feasible: ml.feasible,
        adiabatic_ok: adiabatic,
        khz_scale: rate >= T::lit(1e3),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn silica() -> MaterialPlatform<f64> {
        lookup("fused_silica").unwrap()
    }

    #[test]
    fn collective_loss_examples() {
        assert_eq!(collective_loss_rate(300.0, 1200.0).unwrap(), 600.0);
        assert_eq!(collective_loss_rate(200.0, 800.0).unwrap(), 400.0);
        assert_eq!(collective_loss_rate(0.0, 800.0).unwrap(), 0.0);
        assert!(collective_loss_rate(1.0, 0.0).is_err());
        assert!(adiabatic_ok(300.0, 1200.0));
        assert!(!adiabatic_ok(300.0, 1000.0));
    }

    #[test]
    fn presets() {
        assert_eq!(silica().n2, 2e-20);
        let ratio = lookup::<f64>("IG2").unwrap().n2 / silica().n2;
        assert!((ratio - 100.0).abs() < 1e-9);
        assert_eq!(lookup::<f64>("silicon").unwrap().collective_loss(), 1000.0);
        assert_eq!(lookup::<f64>("silicon").unwrap().modal_area, 5e-12);
        assert_eq!(silica().collective_loss(), 600.0);
        assert!(matches!(lookup::<f64>("unobtainium"), Err(DesignError::UnknownPlatform(_))));
        assert_eq!(builtin_platforms::<f32>().len(), 4);
    }

    #[test]
    fn platform_files() {
        let single = r#"{"name":"x","n2":1e-20,"wavelength":1e-6,"modal_area":1e-11,"g":100,"gamma3":400,"gamma_linear":1}"#;
        assert_eq!(platforms_from_json::<f64>(single).unwrap()[0].name, "x");
        let bad = r#"{"name":"x","n2":-1,"wavelength":1e-6,"modal_area":1e-11,"g":100,"gamma3":400,"gamma_linear":1}"#;
        assert!(matches!(platforms_from_json::<f64>(bad), Err(DesignError::InvalidPlatform { .. })));
        let wrong_schema = r#"{"schema":"other/9","platforms":[]}"#;
        assert!(platforms_from_json::<f64>(wrong_schema).is_err());
        assert!(platforms_from_json::<f64>("not json").is_err());
    }

    #[test]
    fn silica_pair_rate() {
        let r = pair_rate(&silica(), 180.0, 600.0, 1.0).unwrap();
        let k = 2.0 * std::f64::consts::PI * 2e-20 * 180.0 / (800e-9 * 5e-11);
        assert!((r - k * k * SPEED_OF_LIGHT / 4800.0).abs() < 1e-9 * r);
        assert!((r / 2.0e4 - 1.0).abs() < 0.01, "{r}");
        let r2 = pair_rate(&silica(), 360.0, 600.0, 1.0).unwrap();
        assert!((r2 / r - 4.0).abs() < 1e-12);
        let half = pair_rate(&silica(), 180.0, 1200.0, 1.0).unwrap();
        assert!((r / half - 2.0).abs() < 1e-12);
        assert!(pair_rate(&silica(), 0.0, 600.0, 1.0).is_err());
    }

    #[test]
    fn rejection_examples() {
        assert!((rejection_db::<f64>(34.54, 1.0, 0.0) - 150.0).abs() < 0.01);
        assert_eq!(rejection_db(0.0, 600.0, 2.0), 0.0);
        assert!(rejection_db(2.5e-3, 6000.0, 0.0) > 50.0);
        let l = 0.037;
        assert_eq!(rejection_db(2.0 * l, 600.0, 2.0), 2.0 * rejection_db(l, 600.0, 2.0));
    }

    #[test]
    fn dimensionless_min_length() {
        // With gamma = 1 as the unit: Gamma = 400, U^2|alpha|^2 = 1e-10.
        let p = MaterialPlatform {
            name: "unit".into(),
            n2: 1.0,
            wavelength: 1.0,
            modal_area: 1.0,
            g: 200.0,
            gamma3: 800.0,
            gamma_linear: 1.0,
        };
        let ml: MinLength<f64> = min_length(&p, 1e10, 1e-10, 0.1).unwrap();
        assert!((ml.l_min - 0.0967).abs() < 1e-4);
        assert!(ml.feasible);
        let easy = min_length(&p, 1e10, 1e3, 1.0).unwrap();
        assert_eq!(easy.l_min, 0.0);
    }

    #[test]
    fn asymmetry_examples() {
        let r = asymmetry_check(300.0, 5.0).unwrap();
        assert_eq!(r.ratio, 15.0);
        assert!(r.pass);
        assert!(asymmetry_check(300.0, 0.0).unwrap().pass);
        let r = asymmetry_check(300.0, 75.0).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert!(!r.pass);
        assert!(asymmetry_check(300.0, 300.0).is_err());
        assert!(!asymmetry_check_with(300.0, 5.0, 20.0).unwrap().pass);
    }

    #[test]
    fn design_report_for_silica() {
        let rep = design(&silica(), &DesignInputs::new(180.0, 0.1)).unwrap();
        assert_eq!(rep.big_gamma, 600.0);
        assert!(rep.l_min > 0.005 && rep.l_min < 0.1, "{}", rep.l_min);
        assert!(rep.feasible && rep.adiabatic_ok);
        assert!(rep.khz_scale);
        assert!((rep.eta - (-2.0 * 2.0 * rep.l_min).exp()).abs() < 1e-15);
        assert!((rep.rejection_db(rep.l_min, 2.0) - rep.rejection_db_at_l_min).abs() < 1e-12);
        assert!(design(&silica(), &DesignInputs::new(-1.0, 0.1)).is_err());
    }

    #[test]
    fn silicon_needs_tens_of_milliwatts_for_khz() {
        let si = lookup::<f64>("silicon").unwrap();
        let lossless = |power| DesignInputs { eta: Some(1.0), ..DesignInputs::new(power, 0.1) };
        let micro = design(&si, &lossless(5e-6)).unwrap();
        assert!(!micro.khz_scale);
        assert!(micro.pair_rate < 1e-3, "{}", micro.pair_rate);
        let milli = design(&si, &lossless(0.05)).unwrap();
        assert!(milli.khz_scale, "{}", milli.pair_rate);
        // Propagation loss over L_min costs roughly two orders of magnitude more.
        let lossy = design(&si, &DesignInputs::new(0.05, 0.1)).unwrap();
        assert!(lossy.eta < 0.02 && !lossy.khz_scale);
    }

    proptest! {
        #[test]
        fn min_length_monotone(
            g in 200.0f64..300.0, pump in 1e8f64..1e12, u in 1e-12f64..1e-9, delta in 0.01f64..0.5,
        ) {
            let p = MaterialPlatform { g, gamma3: 4.0 * g, ..silica() };
            let base = min_length(&p, pump, u, delta).unwrap().l_min;
            prop_assume!(base > 0.0);
            prop_assert!(min_length(&p, pump * 1.1, u, delta).unwrap().l_min < base);
            prop_assert!(min_length(&p, pump, u * 1.1, delta).unwrap().l_min < base);
        }

        #[test]
        fn min_length_grows_with_gamma(g in 200.0f64..300.0, pump in 1e8f64..1e12, u in 1e-12f64..1e-9) {
            // Below the turnover Gamma = e sqrt(U^2|alpha|^2 delta / 4), L_min rises with Gamma.
            let p = MaterialPlatform { g, gamma3: 4.0 * g, ..silica() };
            let q = MaterialPlatform { g: g * 1.05, gamma3: 4.0 * g, ..silica() };
            let (a, b) = (min_length(&p, pump, u, 0.1).unwrap(), min_length(&q, pump, u, 0.1).unwrap());
            prop_assume!(a.big_gamma * u * pump.sqrt() < 1.0);
            prop_assert!(b.big_gamma > a.big_gamma);
            prop_assert!(b.l_min < a.l_min || a.big_gamma < std::f64::consts::E * (u * u * pump * 0.1 / 4.0).sqrt());
        }
    }
}
