//! One-parameter box families: a state family plus a settings preset, or a
//! direct box mixture, evaluated at a grid value. This is the shared engine
//! behind parameter sweeps and the interactive demo.

use std::str::FromStr;

use thiserror::Error;

use crate::box_core::{BoxError, NsBox};
use crate::catalog::{isotropic_mermin, isotropic_pr, PrIndex};
use crate::quantum::{
    born_box, preset_settings, psi_plus, psi_plus_cc_mixture, schmidt_state, werner_state,
    QuantumError, TwoQubitState,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Box(#[from] BoxError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("unknown state family `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}` takes no settings preset")]
    PresetNotApplicable { family: &'static str },
    #[error("family `{family}` needs a settings preset")]
    PresetRequired { family: &'static str },
}

/// The one-parameter families exposed to sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepFamily {
    /// Pure states with tangle as the grid parameter.
    Schmidt,
    /// Maximally entangled state mixed with white noise, weight p.
    Werner,
    /// Maximally entangled state mixed with the classically-correlated
    /// state, weight p.
    PsiPlusCc,
    /// The maximally entangled state itself; the grid drives the preset.
    PsiPlus,
    /// Box-level mixture of a nonlocal vertex with white noise.
    IsotropicPr,
    /// Box-level mixture of the correlated Mermin box with white noise.
    IsotropicMermin,
}

impl SweepFamily {
    pub fn name(&self) -> &'static str {
        match self {
            SweepFamily::Schmidt => "schmidt",
            SweepFamily::Werner => "werner",
            SweepFamily::PsiPlusCc => "psi-plus-cc",
            SweepFamily::PsiPlus => "psi-plus",
            SweepFamily::IsotropicPr => "isotropic-pr",
            SweepFamily::IsotropicMermin => "isotropic-mermin",
        }
    }

    /// Name of the grid parameter in emitted tables.
    pub fn grid_name(&self) -> &'static str {
        match self {
            SweepFamily::Schmidt => "tau",
            _ => "p",
        }
    }

    /// Inclusive domain of the grid parameter.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            SweepFamily::PsiPlus => (0.5, 1.0),
            _ => (0.0, 1.0),
        }
    }

    pub const ALL: [SweepFamily; 6] = [
        SweepFamily::Schmidt,
        SweepFamily::Werner,
        SweepFamily::PsiPlusCc,
        SweepFamily::PsiPlus,
        SweepFamily::IsotropicPr,
        SweepFamily::IsotropicMermin,
    ];
}

impl FromStr for SweepFamily {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, FamilyError> {
        SweepFamily::ALL
            .iter()
            .find(|f| f.name() == s.to_ascii_lowercase().replace('_', "-"))
            .copied()
            .ok_or_else(|| FamilyError::UnknownFamily(s.to_string()))
    }
}

fn state_at(family: SweepFamily, x: f64) -> Result<TwoQubitState, QuantumError> {
    match family {
        SweepFamily::Schmidt => {
            if !(0.0..=1.0).contains(&x) {
                return Err(QuantumError::OutOfRange { name: "tau", value: x });
            }
            schmidt_state(0.5 * x.sqrt().asin())
        }
        SweepFamily::Werner => werner_state(x),
        SweepFamily::PsiPlusCc => psi_plus_cc_mixture(x),
        SweepFamily::PsiPlus => Ok(psi_plus()),
        SweepFamily::IsotropicPr | SweepFamily::IsotropicMermin => {
            unreachable!("box families have no state")
        }
    }
}

/// Parameter handed to the preset at grid value `x`: angle-linked presets
/// receive the family's angle, weight-linked presets receive `x` itself.
fn preset_param(family: SweepFamily, preset: &str, x: f64) -> Option<f64> {
    match preset {
        "pr_schmidt" | "steer_schmidt" | "bms_xy" | "bms_xz" => Some(match family {
            SweepFamily::Schmidt => 0.5 * x.sqrt().asin(),
            // The mixture parameter plays the role of the Schmidt sine here.
            SweepFamily::PsiPlusCc => 0.5 * x.asin(),
            SweepFamily::PsiPlus => std::f64::consts::FRAC_PI_4,
            _ => x,
        }),
        "interp" | "werner_bm" => Some(x),
        _ => None,
    }
}

/// The box of `family` at grid value `x`, measured with `preset` where the
/// family is a quantum one.
pub fn box_at(family: SweepFamily, preset: Option<&str>, x: f64) -> Result<NsBox, FamilyError> {
    match family {
        SweepFamily::IsotropicPr => {
            if preset.is_some() {
                return Err(FamilyError::PresetNotApplicable {
                    family: family.name(),
                });
            }
            Ok(isotropic_pr(x, PrIndex::new(0, 0, 0))?)
        }
        SweepFamily::IsotropicMermin => {
            if preset.is_some() {
                return Err(FamilyError::PresetNotApplicable {
                    family: family.name(),
                });
            }
            Ok(isotropic_mermin(x)?)
        }
        _ => {
            let preset = preset.ok_or(FamilyError::PresetRequired {
                family: family.name(),
            })?;
            let state = state_at(family, x)?;
            let settings = preset_settings(preset, preset_param(family, preset, x))?;
            Ok(born_box(&state, &settings))
        }
    }
}
