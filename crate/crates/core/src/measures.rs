//! Bell and Mermin function families, the two discord-style measures built
//! from them, inequality values, and the monogamy residuals.
//!
//! Everything here is a function of the four product correlators alone, so
//! the measures are blind to marginals by construction.

use serde::Serialize;

use crate::box_core::NsBox;
use crate::EPS_MEAS;

/// The four Bell-function moduli and the eight signed combinations they are
/// built from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BellFunctions {
    /// |signed combination|, indexed by 2*alpha + beta.
    pub b: [f64; 4],
    /// Signed combinations, indexed by 4*alpha + 2*beta + gamma.
    pub signed: [f64; 8],
}

/// The four Mermin-function moduli and their signed versions, indexed like
/// [`BellFunctions`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MerminFunctions {
    pub m: [f64; 4],
    pub signed: [f64; 8],
}

/// A discord value together with the three pairing components it is the
/// minimum of.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiscordReport {
    pub value: f64,
    pub components: [f64; 3],
    pub argmin: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChshReport {
    pub max: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SteeringReport {
    pub max: f64,
    pub violated: bool,
    /// Caller-supplied premise that the second party measured anticommuting
    /// qubit observables; recorded, not verified -- the table alone cannot
    /// certify it.
    pub anticommuting_observables: bool,
}

pub(crate) fn bell_signed_of_e(e: &[[f64; 2]; 2]) -> [f64; 8] {
    let mut s = [0.0; 8];
    for alpha in 0..2usize {
        for beta in 0..2usize {
            for gamma in 0..2usize {
                let sign = |bit: usize| if bit & 1 == 0 { 1.0 } else { -1.0 };
                s[4 * alpha + 2 * beta + gamma] = sign(gamma) * e[0][0]
                    + sign(beta ^ gamma) * e[0][1]
                    + sign(alpha ^ gamma) * e[1][0]
                    + sign(alpha ^ beta ^ gamma ^ 1) * e[1][1];
            }
        }
    }
    s
}

pub(crate) fn mermin_signed_of_e(e: &[[f64; 2]; 2]) -> [f64; 8] {
    let mut s = [0.0; 8];
    for gamma in 0..2usize {
        let g = if gamma == 0 { 1.0 } else { -1.0 };
        s[gamma] = e[0][1] + e[1][0]; //             alpha beta = 00
        s[2 + gamma] = g * (e[0][0] + e[1][1]); //   alpha beta = 01
        s[4 + gamma] = e[0][1] - e[1][0]; //         alpha beta = 10
        s[6 + gamma] = g * (e[0][0] - e[1][1]); //   alpha beta = 11
    }
    s
}

fn moduli(signed: &[f64; 8]) -> [f64; 4] {
    let mut b = [0.0; 4];
    for ab in 0..4 {
        b[ab] = signed[2 * ab].abs();
        debug_assert!((signed[2 * ab].abs() - signed[2 * ab + 1].abs()).abs() < 1e-12);
    }
    b
}

/// The three double-difference pairings of a four-vector.
pub(crate) fn pairing_components(v: &[f64; 4]) -> [f64; 3] {
    [
        ((v[0] - v[1]).abs() - (v[2] - v[3]).abs()).abs(),
        ((v[0] - v[2]).abs() - (v[1] - v[3]).abs()).abs(),
        ((v[0] - v[3]).abs() - (v[1] - v[2]).abs()).abs(),
    ]
}

fn discord_of(v: &[f64; 4]) -> DiscordReport {
    let components = pairing_components(v);
    let mut argmin = 0;
    for i in 1..3 {
        if components[i] < components[argmin] {
            argmin = i;
        }
    }
    DiscordReport {
        value: components[argmin],
        components,
        argmin,
    }
}

pub(crate) fn g_of_e(e: &[[f64; 2]; 2]) -> DiscordReport {
    discord_of(&moduli(&bell_signed_of_e(e)))
}

pub(crate) fn q_of_e(e: &[[f64; 2]; 2]) -> DiscordReport {
    discord_of(&moduli(&mermin_signed_of_e(e)))
}

/// Bell functions of a box.
pub fn bell_functions(bx: &NsBox) -> BellFunctions {
    let signed = bell_signed_of_e(&bx.correlators().e);
    BellFunctions {
        b: moduli(&signed),
        signed,
    }
}

/// Mermin functions of a box. The gamma bit only flips the sign of the
/// combinations that involve the equal-input correlators.
pub fn mermin_functions(bx: &NsBox) -> MerminFunctions {
    let signed = mermin_signed_of_e(&bx.correlators().e);
    MerminFunctions {
        m: moduli(&signed),
        signed,
    }
}

/// The minimum over the three Bell-function pairings; ranges over [0, 4]
/// and attains 4 exactly on the extremal nonlocal boxes.
pub fn bell_discord(bx: &NsBox) -> DiscordReport {
    g_of_e(&bx.correlators().e)
}

/// The minimum over the three Mermin-function pairings; ranges over [0, 2]
/// and attains 2 exactly on the Mermin boxes.
pub fn mermin_discord(bx: &NsBox) -> DiscordReport {
    q_of_e(&bx.correlators().e)
}

/// Largest signed Bell combination and whether it beats the local bound 2.
pub fn chsh_violation(bx: &NsBox) -> ChshReport {
    let signed = bell_signed_of_e(&bx.correlators().e);
    let max = signed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ChshReport {
        max,
        violated: max > 2.0 + EPS_MEAS,
    }
}

/// Largest Mermin-function modulus and whether it beats sqrt(2), the bound
/// that applies when one side measures anticommuting qubit observables.
pub fn steering_value(bx: &NsBox, anticommuting_observables: bool) -> SteeringReport {
    let m = mermin_functions(bx).m;
    let max = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    SteeringReport {
        max,
        violated: max > std::f64::consts::SQRT_2 + EPS_MEAS,
        anticommuting_observables,
    }
}

/// Residuals 4 - (b[00] + b[j]) for j = 01, 10, 11; nonnegative on every
/// valid box.
pub fn bell_monogamy_residuals(bx: &NsBox) -> [f64; 3] {
    let b = bell_functions(bx).b;
    [4.0 - (b[0] + b[1]), 4.0 - (b[0] + b[2]), 4.0 - (b[0] + b[3])]
}

/// Residual of the trade-off between the two measures: 4 - (G + 2 Q).
pub fn gq_monogamy_residual(bx: &NsBox) -> f64 {
    4.0 - (bell_discord(bx).value + 2.0 * mermin_discord(bx).value)
}

/// Everything the measure pipeline knows about one box.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub bell_functions: BellFunctions,
    pub mermin_functions: MerminFunctions,
    #[serde(rename = "G")]
    pub g: DiscordReport,
    #[serde(rename = "Q")]
    pub q: DiscordReport,
    pub chsh: ChshReport,
    pub steering: SteeringReport,
    pub bell_monogamy_residuals: [f64; 3],
    pub gq_monogamy_residual: f64,
}

pub fn measure_report(bx: &NsBox, anticommuting_observables: bool) -> MeasureReport {
    MeasureReport {
        bell_functions: bell_functions(bx),
        mermin_functions: mermin_functions(bx),
        g: bell_discord(bx),
        q: mermin_discord(bx),
        chsh: chsh_violation(bx),
        steering: steering_value(bx, anticommuting_observables),
        bell_monogamy_residuals: bell_monogamy_residuals(bx),
        gq_monogamy_residual: gq_monogamy_residual(bx),
    }
}
