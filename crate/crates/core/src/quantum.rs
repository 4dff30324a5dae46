//! Two-qubit states, projective measurements, Born-rule box generation, the
//! named state families, and the measurement-direction presets behind the
//! closed-form results.
//!
//! Conventions: standard Pauli matrices, |0> is the +1 eigenvector of the
//! z operator, tensor products are ordered first party (x) second party (y).

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::box_core::{Correlators, NsBox};
use crate::EPS_VAL;

type C = Complex64;
type Mat2 = [[C; 2]; 2];
type Mat4 = [[C; 4]; 4];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("parameter {name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("mixture weights sum to {sum}, expected 1")]
    WeightMismatch { sum: f64 },
    #[error("weight {index} is negative: {value}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("matrix deviates from Hermitian by {max_dev}")]
    NotHermitian { max_dev: f64 },
    #[error("matrix has trace {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("matrix has a negative eigenvalue: {min_eigenvalue}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("{name} has norm {norm}, expected a unit vector")]
    NotUnit { name: &'static str, norm: f64 },
    #[error("unknown settings preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{0}` needs a parameter")]
    MissingParameter(&'static str),
}

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn paulis() -> [Mat2; 3] {
    let i = C::new(0.0, 1.0);
    [
        [[c(0.0), c(1.0)], [c(1.0), c(0.0)]],
        [[c(0.0), -i], [i, c(0.0)]],
        [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]],
    ]
}

fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[c(0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn trace_prod(rho: &Mat4, op: &Mat4) -> f64 {
    let mut t = C::new(0.0, 0.0);
    for r in 0..4 {
        for col in 0..4 {
            t += rho[r][col] * op[col][r];
        }
    }
    t.re
}

/// Direction observable v . sigma for a unit vector v.
fn dir_observable(v: &[f64; 3]) -> Mat2 {
    let p = paulis();
    let mut out = [[c(0.0); 2]; 2];
    for (vi, pi) in v.iter().zip(&p) {
        for r in 0..2 {
            for col in 0..2 {
                out[r][col] += c(*vi) * pi[r][col];
            }
        }
    }
    out
}

/// Qubit state (1 + v . sigma) / 2 with Bloch vector v, |v| <= 1.
fn qubit(v: &[f64; 3]) -> Mat2 {
    let mut m = dir_observable(v);
    for r in 0..2 {
        for col in 0..2 {
            m[r][col] *= c(0.5);
        }
    }
    m[0][0] += c(0.5);
    m[1][1] += c(0.5);
    m
}

fn pure(v: [C; 4]) -> Mat4 {
    let mut rho = [[c(0.0); 4]; 4];
    for r in 0..4 {
        for col in 0..4 {
            rho[r][col] = v[r] * v[col].conj();
        }
    }
    rho
}

/// Cyclic Jacobi sweeps on a small symmetric matrix; returns the diagonal,
/// i.e. the eigenvalues in unspecified order.
fn jacobi_eigenvalues<const N: usize>(mut a: [[f64; N]; N]) -> [f64; N] {
    for _ in 0..60 {
        let mut off: f64 = 0.0;
        for p in 0..N {
            for q in (p + 1)..N {
                off = off.max(a[p][q].abs());
            }
        }
        if off < 1e-14 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut d = [0.0; N];
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[i][i];
    }
    d
}

/// Minimum eigenvalue of a 4x4 Hermitian matrix via the real symmetric
/// embedding [[Re, -Im], [Im, Re]], whose spectrum doubles the original.
fn min_eigenvalue(m: &Mat4) -> f64 {
    let mut a = [[0.0; 8]; 8];
    for r in 0..4 {
        for col in 0..4 {
            a[r][col] = m[r][col].re;
            a[r][col + 4] = -m[r][col].im;
            a[r + 4][col] = m[r][col].im;
            a[r + 4][col + 4] = m[r][col].re;
        }
    }
    jacobi_eigenvalues(a)
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// A validated two-qubit density operator with its Bloch view.
#[derive(Debug, Clone)]
pub struct TwoQubitState {
    rho: Mat4,
    r: [f64; 3],
    s: [f64; 3],
    t: [[f64; 3]; 3],
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace, and positivity, then derives the
    /// local Bloch vectors and the correlation tensor.
    pub fn new(rho: Mat4) -> Result<Self, QuantumError> {
        let mut herm_dev: f64 = 0.0;
        for r in 0..4 {
            for col in 0..4 {
                herm_dev = herm_dev.max((rho[r][col] - rho[col][r].conj()).norm());
            }
        }
        if herm_dev > EPS_VAL {
            return Err(QuantumError::NotHermitian { max_dev: herm_dev });
        }
        let trace: f64 = (0..4).map(|i| rho[i][i].re).sum();
        if (trace - 1.0).abs() > EPS_VAL {
            return Err(QuantumError::BadTrace { trace });
        }
        let min_eig = min_eigenvalue(&rho);
        if min_eig < -EPS_VAL {
            return Err(QuantumError::NotPositive {
                min_eigenvalue: min_eig,
            });
        }

        let p = paulis();
        let id: Mat2 = [[c(1.0), c(0.0)], [c(0.0), c(1.0)]];
        let mut r = [0.0; 3];
        let mut s = [0.0; 3];
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            r[i] = trace_prod(&rho, &kron(&p[i], &id));
            s[i] = trace_prod(&rho, &kron(&id, &p[i]));
            for j in 0..3 {
                t[i][j] = trace_prod(&rho, &kron(&p[i], &p[j]));
            }
        }
        Ok(TwoQubitState { rho, r, s, t })
    }

    pub fn rho(&self) -> &Mat4 {
        &self.rho
    }

    /// First party's local Bloch vector.
    pub fn bloch_r(&self) -> [f64; 3] {
        self.r
    }

    /// Second party's local Bloch vector.
    pub fn bloch_s(&self) -> [f64; 3] {
        self.s
    }

    /// Correlation tensor T[i][j] = <sigma_i x sigma_j>.
    pub fn tensor(&self) -> [[f64; 3]; 3] {
        self.t
    }
}

/// Four measurement directions, one pair per party, each a unit vector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Settings {
    pub a0: [f64; 3],
    pub a1: [f64; 3],
    pub b0: [f64; 3],
    pub b1: [f64; 3],
}

fn norm3(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Settings {
    pub fn new(a0: [f64; 3], a1: [f64; 3], b0: [f64; 3], b1: [f64; 3]) -> Result<Self, QuantumError> {
        for (name, v) in [("a0", &a0), ("a1", &a1), ("b0", &b0), ("b1", &b1)] {
            let n = norm3(v);
            if (n - 1.0).abs() > EPS_VAL {
                return Err(QuantumError::NotUnit { name, norm: n });
            }
        }
        Ok(Settings { a0, a1, b0, b1 })
    }

    fn a(&self, x: usize) -> &[f64; 3] {
        if x == 0 {
            &self.a0
        } else {
            &self.a1
        }
    }

    fn b(&self, y: usize) -> &[f64; 3] {
        if y == 0 {
            &self.b0
        } else {
            &self.b1
        }
    }

    /// Whether the second party's two direction observables anticommute,
    /// i.e. the directions are orthogonal.
    pub fn bob_anticommuting(&self) -> bool {
        dot3(&self.b0, &self.b1).abs() <= 1e-9
    }
}

/// Born-rule box from the Bloch data:
/// P(m,n|x,y) = (1 + a a_x.r + b b_y.s + ab a_x.T.b_y) / 4.
pub fn born_box(state: &TwoQubitState, settings: &Settings) -> NsBox {
    let mut e = [[0.0; 2]; 2];
    let mut ma = [0.0; 2];
    let mut mb = [0.0; 2];
    for x in 0..2 {
        ma[x] = dot3(settings.a(x), &state.r);
    }
    for y in 0..2 {
        mb[y] = dot3(settings.b(y), &state.s);
    }
    for x in 0..2 {
        for y in 0..2 {
            let a = settings.a(x);
            let b = settings.b(y);
            let mut v = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    v += a[i] * state.t[i][j] * b[j];
                }
            }
            e[x][y] = v;
        }
    }
    let table = Correlators { e, ma, mb }.reconstruct();
    NsBox::new(table, EPS_VAL).expect("Born-rule output is nonsignaling by construction")
}

/// Reference Born-rule evaluation through projector traces; used to
/// cross-check the Bloch route.
pub fn born_box_dense(state: &TwoQubitState, settings: &Settings) -> NsBox {
    let mut table = [[0.0; 4]; 4];
    for x in 0..2 {
        for y in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    let pa = projector(settings.a(x), m);
                    let pb = projector(settings.b(y), n);
                    table[2 * x + y][2 * m + n] = trace_prod(&state.rho, &kron(&pa, &pb));
                }
            }
        }
    }
    NsBox::new(table, EPS_VAL).expect("Born-rule output is nonsignaling by construction")
}

/// Projector (1 + (-1)^m v . sigma) / 2.
fn projector(v: &[f64; 3], m: usize) -> Mat2 {
    let sign = if m == 0 { 1.0 } else { -1.0 };
    let signed = [sign * v[0], sign * v[1], sign * v[2]];
    qubit(&signed)
}

/// Pure state cos(theta)|00> + sin(theta)|11>, theta in [0, pi/4].
pub fn schmidt_state(theta: f64) -> Result<TwoQubitState, QuantumError> {
    if !(0.0..=std::f64::consts::FRAC_PI_4 + 1e-12).contains(&theta) {
        return Err(QuantumError::OutOfRange {
            name: "theta",
            value: theta,
        });
    }
    let v = [c(theta.cos()), c(0.0), c(0.0), c(theta.sin())];
    TwoQubitState::new(pure(v))
}

/// Entanglement of the Schmidt family: tangle = sin^2(2 theta).
pub fn tangle(theta: f64) -> f64 {
    (2.0 * theta).sin().powi(2)
}

/// The maximally entangled state (|00> + |11>) / sqrt(2).
pub fn psi_plus() -> TwoQubitState {
    schmidt_state(std::f64::consts::FRAC_PI_4).expect("pi/4 is in range")
}

/// Mixture of the maximally entangled state with white noise. Entangled for
/// p > 1/3; that threshold is background, nothing here computes it.
pub fn werner_state(p: f64) -> Result<TwoQubitState, QuantumError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QuantumError::OutOfRange { name: "p", value: p });
    }
    let me = psi_plus();
    let mut rho = [[c(0.0); 4]; 4];
    for r in 0..4 {
        for col in 0..4 {
            rho[r][col] = c(p) * me.rho[r][col];
        }
        rho[r][r] += c((1.0 - p) / 4.0);
    }
    TwoQubitState::new(rho)
}

/// Mixture of the maximally entangled state with the classically-correlated
/// state (|00><00| + |11><11|) / 2.
pub fn psi_plus_cc_mixture(p: f64) -> Result<TwoQubitState, QuantumError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QuantumError::OutOfRange { name: "p", value: p });
    }
    let me = psi_plus();
    let mut rho = [[c(0.0); 4]; 4];
    for r in 0..4 {
        for col in 0..4 {
            rho[r][col] = c(p) * me.rho[r][col];
        }
    }
    rho[0][0] += c((1.0 - p) / 2.0);
    rho[3][3] += c((1.0 - p) / 2.0);
    TwoQubitState::new(rho)
}

/// The eight maximally entangled basis states, ordered as
/// psi(j,k) for (j,k) = (0,0), (1,0), (0,1), (1,1), then phi(j,k) likewise,
/// where psi(j,k) = (|00> + (-1)^j i^k |11>)/sqrt(2) and
/// phi(j,k) = (|01> + (-1)^j i^k |10>)/sqrt(2).
pub fn me_basis_state(index: usize) -> TwoQubitState {
    assert!(index < 8, "basis index out of range: {index}");
    let jk = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let (j, k) = jk[index % 4];
    let phase = C::new(0.0, 1.0).powu(k as u32) * c(if j == 0 { 1.0 } else { -1.0 });
    let h = c(std::f64::consts::FRAC_1_SQRT_2);
    let v = if index < 4 {
        [h, c(0.0), c(0.0), phase * h]
    } else {
        [c(0.0), h, phase * h, c(0.0)]
    };
    TwoQubitState::new(pure(v)).expect("basis states are valid")
}

/// Convex mixture of the eight maximally entangled basis states.
pub fn me_mixture(weights: &[f64; 8]) -> Result<TwoQubitState, QuantumError> {
    if let Some((i, &w)) = weights.iter().enumerate().find(|(_, &w)| w < 0.0) {
        return Err(QuantumError::NegativeWeight { index: i, value: w });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > EPS_VAL {
        return Err(QuantumError::WeightMismatch { sum });
    }
    let mut rho = [[c(0.0); 4]; 4];
    for (i, &w) in weights.iter().enumerate() {
        let b = me_basis_state(i);
        for r in 0..4 {
            for col in 0..4 {
                rho[r][col] += c(w) * b.rho[r][col];
            }
        }
    }
    TwoQubitState::new(rho)
}

fn check_bloch_args(
    p0: f64,
    r_hat: &[f64; 3],
    s0: &[f64; 3],
    s1: &[f64; 3],
) -> Result<(), QuantumError> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(QuantumError::OutOfRange { name: "p0", value: p0 });
    }
    let n = norm3(r_hat);
    if (n - 1.0).abs() > EPS_VAL {
        return Err(QuantumError::NotUnit { name: "r", norm: n });
    }
    for (name, v) in [("s0", s0), ("s1", s1)] {
        let n = norm3(v);
        if n > 1.0 + EPS_VAL {
            return Err(QuantumError::OutOfRange { name, value: n });
        }
    }
    Ok(())
}

/// Classical-quantum state: a classical bit on the first party's side along
/// direction `r_hat`, with arbitrary conditional qubit states for the second.
/// Its correlation tensor has rank at most one.
pub fn cq_state(
    p0: f64,
    r_hat: [f64; 3],
    s0: [f64; 3],
    s1: [f64; 3],
) -> Result<TwoQubitState, QuantumError> {
    check_bloch_args(p0, &r_hat, &s0, &s1)?;
    let minus = [-r_hat[0], -r_hat[1], -r_hat[2]];
    let t0 = kron(&qubit(&r_hat), &qubit(&s0));
    let t1 = kron(&qubit(&minus), &qubit(&s1));
    let mut rho = [[c(0.0); 4]; 4];
    for r in 0..4 {
        for col in 0..4 {
            rho[r][col] = c(p0) * t0[r][col] + c(1.0 - p0) * t1[r][col];
        }
    }
    TwoQubitState::new(rho)
}

/// Quantum-classical state: the mirror image of [`cq_state`].
pub fn qc_state(
    p0: f64,
    r_hat: [f64; 3],
    s0: [f64; 3],
    s1: [f64; 3],
) -> Result<TwoQubitState, QuantumError> {
    check_bloch_args(p0, &r_hat, &s0, &s1)?;
    let minus = [-r_hat[0], -r_hat[1], -r_hat[2]];
    let t0 = kron(&qubit(&s0), &qubit(&r_hat));
    let t1 = kron(&qubit(&s1), &qubit(&minus));
    let mut rho = [[c(0.0); 4]; 4];
    for r in 0..4 {
        for col in 0..4 {
            rho[r][col] = c(p0) * t0[r][col] + c(1.0 - p0) * t1[r][col];
        }
    }
    TwoQubitState::new(rho)
}

/// True when the correlation tensor has rank at most one, so every joint
/// expectation factorizes into a product of single-party functions.
///
/// Decided through the symmetric embedding [[0, T], [T^t, 0]], whose
/// spectrum is the signed singular values; this keeps full precision where
/// the Gram-matrix route would square the rounding floor.
pub fn factorizes(state: &TwoQubitState, tol: f64) -> bool {
    let t = state.t;
    let mut a = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            a[i][3 + j] = t[i][j];
            a[3 + j][i] = t[i][j];
        }
    }
    let mut vals = jacobi_eigenvalues(a).map(f64::abs);
    vals.sort_by(|x, y| y.total_cmp(x));
    // Eigenvalues come in +/- pairs; the third entry is the second largest
    // singular value.
    vals[2] <= tol
}

const X: [f64; 3] = [1.0, 0.0, 0.0];
const Y: [f64; 3] = [0.0, 1.0, 0.0];
const Z: [f64; 3] = [0.0, 0.0, 1.0];

fn lin(a: f64, u: &[f64; 3], b: f64, v: &[f64; 3]) -> [f64; 3] {
    [
        a * u[0] + b * v[0],
        a * u[1] + b * v[1],
        a * u[2] + b * v[2],
    ]
}

fn require(param: Option<f64>, preset: &'static str) -> Result<f64, QuantumError> {
    param.ok_or(QuantumError::MissingParameter(preset))
}

fn check_theta(theta: f64) -> Result<f64, QuantumError> {
    if !(0.0..=std::f64::consts::FRAC_PI_4 + 1e-12).contains(&theta) {
        return Err(QuantumError::OutOfRange {
            name: "theta",
            value: theta,
        });
    }
    Ok(theta)
}

/// Measurement-direction presets. Fixed presets ignore `param`; the
/// parameterized ones take an angle theta in [0, pi/4] or a weight p.
pub fn preset_settings(name: &str, param: Option<f64>) -> Result<Settings, QuantumError> {
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
    match name {
        "tsirelson" | "mt" => Settings::new(
            X,
            Y,
            lin(sqrt_half, &X, -sqrt_half, &Y),
            lin(sqrt_half, &X, sqrt_half, &Y),
        ),
        "mermin" => Settings::new(X, lin(-1.0, &Y, 0.0, &X), Y, X),
        "mm" => Settings::new(X, Y, lin(-1.0, &Y, 0.0, &X), X),
        "interp" => {
            let p = require(param, "interp")?;
            if !(0.5..=1.0).contains(&p) {
                return Err(QuantumError::OutOfRange { name: "p", value: p });
            }
            Settings::new(
                X,
                Y,
                lin(p.sqrt(), &X, -(1.0 - p).sqrt(), &Y),
                lin((1.0 - p).sqrt(), &X, p.sqrt(), &Y),
            )
        }
        "pr_schmidt" => {
            let theta = check_theta(require(param, "pr_schmidt")?)?;
            let s = (2.0 * theta).sin();
            let ct = 1.0 / (1.0 + s * s).sqrt();
            let st = s * ct;
            Settings::new(Z, X, lin(ct, &Z, st, &X), lin(ct, &Z, -st, &X))
        }
        "steer_schmidt" => {
            let theta = check_theta(require(param, "steer_schmidt")?)?;
            let s = (2.0 * theta).sin();
            let ct = 1.0 / (1.0 + s * s).sqrt();
            let st = s * ct;
            Settings::new(
                lin(sqrt_half, &Z, sqrt_half, &X),
                lin(sqrt_half, &Z, -sqrt_half, &X),
                lin(ct, &Z, -st, &X),
                lin(ct, &Z, st, &X),
            )
        }
        "bms_xy" => {
            let theta = check_theta(require(param, "bms_xy")?)?;
            let cc = (2.0 * theta).cos();
            let ss = (2.0 * theta).sin();
            Settings::new(
                lin(ss, &X, cc, &Y),
                lin(cc, &X, -ss, &Y),
                lin(sqrt_half, &X, sqrt_half, &Y),
                lin(sqrt_half, &X, -sqrt_half, &Y),
            )
        }
        "bms_xz" => {
            let theta = check_theta(require(param, "bms_xz")?)?;
            let cc = (2.0 * theta).cos();
            let ss = (2.0 * theta).sin();
            Settings::new(
                lin(cc, &X, ss, &Z),
                lin(ss, &X, -cc, &Z),
                lin(sqrt_half, &X, sqrt_half, &Z),
                lin(-sqrt_half, &X, sqrt_half, &Z),
            )
        }
        "werner_bm" => {
            let p = require(param, "werner_bm")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(QuantumError::OutOfRange { name: "p", value: p });
            }
            Settings::new(
                lin(p.sqrt(), &X, (1.0 - p).sqrt(), &Y),
                lin((1.0 - p).sqrt(), &X, -p.sqrt(), &Y),
                lin(sqrt_half, &X, sqrt_half, &Y),
                lin(sqrt_half, &X, -sqrt_half, &Y),
            )
        }
        other => Err(QuantumError::UnknownPreset(other.to_string())),
    }
}

/// Names of all settings presets, fixed ones first.
pub const PRESET_NAMES: [&str; 10] = [
    "tsirelson",
    "mermin",
    "mt",
    "mm",
    "interp",
    "pr_schmidt",
    "steer_schmidt",
    "bms_xy",
    "bms_xz",
    "werner_bm",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{mermin_box_mm, tsirelson_box, PrIndex};
    use crate::measures::{bell_discord, mermin_discord};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn gauss(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let v = [gauss(rng), gauss(rng), gauss(rng)];
            let n = norm3(&v);
            if n > 1e-6 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    fn random_settings(rng: &mut ChaCha8Rng) -> Settings {
        Settings::new(
            random_unit(rng),
            random_unit(rng),
            random_unit(rng),
            random_unit(rng),
        )
        .unwrap()
    }

    /// Random density matrix from a complex Gaussian square root.
    fn random_state(rng: &mut ChaCha8Rng) -> TwoQubitState {
        let mut g = [[c(0.0); 4]; 4];
        for r in 0..4 {
            for col in 0..4 {
                g[r][col] = C::new(gauss(rng), gauss(rng));
            }
        }
        let mut rho = [[c(0.0); 4]; 4];
        for r in 0..4 {
            for col in 0..4 {
                for k in 0..4 {
                    rho[r][col] += g[r][k] * g[col][k].conj();
                }
            }
        }
        let tr: f64 = (0..4).map(|i| rho[i][i].re).sum();
        for r in 0..4 {
            for col in 0..4 {
                rho[r][col] /= c(tr);
            }
        }
        TwoQubitState::new(rho).unwrap()
    }

    #[test]
    fn schmidt_bloch_view() {
        for theta in [0.0, 0.3, std::f64::consts::FRAC_PI_4] {
            let st = schmidt_state(theta).unwrap();
            let cc = (2.0 * theta).cos();
            let ss = (2.0 * theta).sin();
            assert!(close(st.bloch_r()[2], cc) && close(st.bloch_s()[2], cc));
            assert!(close(st.bloch_r()[0], 0.0) && close(st.bloch_r()[1], 0.0));
            let t = st.tensor();
            assert!(close(t[0][0], ss) && close(t[1][1], -ss) && close(t[2][2], 1.0));
            assert!(close(t[0][1], 0.0) && close(t[2][0], 0.0));
        }
        assert!(schmidt_state(1.0).is_err());
        assert!(close(tangle(std::f64::consts::FRAC_PI_4), 1.0));
        assert!(close(tangle(0.0), 0.0));
        assert!(close(tangle(std::f64::consts::PI / 8.0), 0.5));
    }

    #[test]
    fn psi_plus_density_matrix() {
        let st = psi_plus();
        for (r, col, want) in [(0, 0, 0.5), (0, 3, 0.5), (3, 0, 0.5), (3, 3, 0.5)] {
            assert!(close(st.rho()[r][col].re, want));
        }
        assert!(close(st.rho()[1][1].re, 0.0));
    }

    #[test]
    fn invalid_matrices_are_rejected() {
        let mut bad_trace = [[c(0.0); 4]; 4];
        bad_trace[0][0] = c(2.0);
        assert!(matches!(
            TwoQubitState::new(bad_trace),
            Err(QuantumError::BadTrace { .. })
        ));

        let mut not_psd = [[c(0.0); 4]; 4];
        not_psd[0][0] = c(1.5);
        not_psd[1][1] = c(-0.5);
        assert!(matches!(
            TwoQubitState::new(not_psd),
            Err(QuantumError::NotPositive { .. })
        ));

        let mut not_herm = [[c(0.25); 4]; 4];
        for (i, row) in not_herm.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if i == j { c(0.25) } else { c(0.0) };
            }
        }
        not_herm[0][1] = c(0.1);
        assert!(matches!(
            TwoQubitState::new(not_herm),
            Err(QuantumError::NotHermitian { .. })
        ));
    }

    #[test]
    fn born_golden_boxes() {
        let me = psi_plus();
        let ts = born_box(&me, &preset_settings("tsirelson", None).unwrap());
        assert!(ts.distance(&tsirelson_box(PrIndex::new(0, 0, 0))) < 1e-12);

        // Measuring x and y on both sides yields the correlated
        // maximally-local box with e = diag(1, -1).
        let raw = Settings::new(X, Y, X, Y).unwrap();
        assert!(born_box(&me, &raw).distance(&mermin_box_mm(PrIndex::new(1, 1, 0))) < 1e-12);

        let mm = born_box(&me, &preset_settings("mm", None).unwrap());
        assert!(mm.distance(&mermin_box_mm(PrIndex::new(0, 0, 0))) < 1e-12);
    }

    #[test]
    fn bloch_and_dense_born_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let st = random_state(&mut rng);
            let settings = random_settings(&mut rng);
            let a = born_box(&st, &settings);
            let b = born_box_dense(&st, &settings);
            assert!(a.distance(&b) < 1e-12);
        }
    }

    #[test]
    fn werner_and_cc_mixture_bloch_views() {
        for p in [0.0, 0.33, 1.0] {
            let t = werner_state(p).unwrap().tensor();
            assert!(close(t[0][0], p) && close(t[1][1], -p) && close(t[2][2], p));

            let t = psi_plus_cc_mixture(p).unwrap().tensor();
            assert!(close(t[0][0], p) && close(t[1][1], -p) && close(t[2][2], 1.0));
        }
        assert!(werner_state(1.5).is_err());
    }

    #[test]
    fn me_mixture_basics() {
        let mut w = [0.0; 8];
        w[0] = 1.0;
        let st = me_mixture(&w).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                assert!((st.rho()[r][col] - psi_plus().rho()[r][col]).norm() < 1e-12);
            }
        }
        assert!(me_mixture(&[0.2; 8]).is_err());
        assert!(me_mixture(&[-0.1, 1.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn me_basis_states_map_to_paired_extremal_mixtures() {
        let mt = preset_settings("mt", None).unwrap();
        let mm = preset_settings("mm", None).unwrap();
        let mut ts_indices = Vec::new();
        let mut mm_indices = Vec::new();
        for i in 0..8 {
            let st = me_basis_state(i);
            let bt = born_box(&st, &mt);
            let bm = born_box(&st, &mm);
            let ti = PrIndex::all()
                .find(|&k| bt.distance(&tsirelson_box(k)) < 1e-12)
                .expect("each basis state lands on a Tsirelson box");
            let mi = PrIndex::all()
                .find(|&k| bm.distance(&mermin_box_mm(k)) < 1e-12)
                .expect("each basis state lands on a Mermin box");
            // The same label under both presets: the pairing behind the
            // sqrt(2) relation between the two measures.
            assert_eq!(ti, mi);
            ts_indices.push(ti.k());
            mm_indices.push(mi.k());
        }
        ts_indices.sort_unstable();
        ts_indices.dedup();
        assert_eq!(ts_indices.len(), 8, "all eight boxes are hit");
    }

    #[test]
    fn me_mixture_box_is_the_weighted_vertex_mixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mt = preset_settings("mt", None).unwrap();
        for _ in 0..10 {
            let mut w = [0.0; 8];
            for v in &mut w {
                *v = rng.random::<f64>();
            }
            let total: f64 = w.iter().sum();
            for v in &mut w {
                *v /= total;
            }
            let direct = born_box(&me_mixture(&w).unwrap(), &mt);
            let mut table = [[0.0; 4]; 4];
            for (i, &wi) in w.iter().enumerate() {
                let part = born_box(&me_basis_state(i), &mt);
                for r in 0..4 {
                    for col in 0..4 {
                        table[r][col] += wi * part.table()[r][col];
                    }
                }
            }
            let mixed = NsBox::new(table, EPS_VAL).unwrap();
            assert!(direct.distance(&mixed) < 1e-12);
        }
    }

    #[test]
    fn paired_presets_swap_bell_for_mermin_functions() {
        // The diagonal-direction preset turns each Bell function of a box
        // into sqrt(2) times the matching Mermin function of the box taken
        // with the axis preset -- for any state, by linearity of traces.
        use crate::measures::{bell_functions, mermin_functions};
        let mt = preset_settings("mt", None).unwrap();
        let mm = preset_settings("mm", None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let st = random_state(&mut rng);
            let b = bell_functions(&born_box(&st, &mt)).b;
            let m = mermin_functions(&born_box(&st, &mm)).m;
            for ab in 0..4 {
                assert!(
                    (b[ab] - std::f64::consts::SQRT_2 * m[ab]).abs() < 1e-12,
                    "component {ab}: {} vs sqrt(2) * {}",
                    b[ab],
                    m[ab]
                );
            }
        }
    }

    #[test]
    fn cq_states_have_rank_one_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let p0: f64 = rng.random();
            let r = random_unit(&mut rng);
            let shrink0: f64 = rng.random();
            let shrink1: f64 = rng.random();
            let u0 = random_unit(&mut rng);
            let u1 = random_unit(&mut rng);
            let s0 = [u0[0] * shrink0, u0[1] * shrink0, u0[2] * shrink0];
            let s1 = [u1[0] * shrink1, u1[1] * shrink1, u1[2] * shrink1];
            for st in [
                cq_state(p0, r, s0, s1).unwrap(),
                qc_state(p0, r, s0, s1).unwrap(),
            ] {
                assert!(factorizes(&st, 1e-9));
            }
        }
        assert!(!factorizes(&psi_plus(), 1e-9));
        assert!(factorizes(&werner_state(0.0).unwrap(), 1e-9));
        assert!(cq_state(1.4, Z, Z, Z).is_err());
        assert!(cq_state(0.5, [0.5, 0.0, 0.0], Z, Z).is_err());
    }

    #[test]
    fn cq_golden_matrices() {
        // p0 = 1 collapses to a product state.
        let st = cq_state(1.0, Z, [0.3, 0.0, 0.4], [0.0; 3]).unwrap();
        let want = kron(&qubit(&Z), &qubit(&[0.3, 0.0, 0.4]));
        for r in 0..4 {
            for col in 0..4 {
                assert!((st.rho()[r][col] - want[r][col]).norm() < 1e-12);
            }
        }

        // The classically-correlated two-bit state in Bloch form.
        let minus_z = [0.0, 0.0, -1.0];
        let cc = cq_state(0.5, Z, Z, minus_z).unwrap();
        let mut want = [[c(0.0); 4]; 4];
        want[0][0] = c(0.5);
        want[3][3] = c(0.5);
        for r in 0..4 {
            for col in 0..4 {
                assert!((cc.rho()[r][col] - want[r][col]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn aligned_measurements_on_cq_states_carry_no_discord() {
        // With the first party's directions orthogonal and one of them along
        // the classical axis, both measures vanish for every choice on the
        // other side.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..60 {
            let r = random_unit(&mut rng);
            let mut perp = random_unit(&mut rng);
            let along = dot3(&perp, &r);
            for i in 0..3 {
                perp[i] -= along * r[i];
            }
            let n = norm3(&perp);
            if n < 1e-3 {
                continue;
            }
            for v in &mut perp {
                *v /= n;
            }
            let scale0: f64 = rng.random();
            let scale1: f64 = rng.random();
            let u0 = random_unit(&mut rng);
            let u1 = random_unit(&mut rng);
            let st = cq_state(
                rng.random(),
                r,
                [u0[0] * scale0, u0[1] * scale0, u0[2] * scale0],
                [u1[0] * scale1, u1[1] * scale1, u1[2] * scale1],
            )
            .unwrap();
            let settings =
                Settings::new(r, perp, random_unit(&mut rng), random_unit(&mut rng)).unwrap();
            let bx = born_box(&st, &settings);
            assert!(bell_discord(&bx).value < 1e-9);
            assert!(mermin_discord(&bx).value < 1e-9);
        }
    }

    #[test]
    fn preset_errors() {
        assert!(matches!(
            preset_settings("nope", None),
            Err(QuantumError::UnknownPreset(_))
        ));
        assert!(matches!(
            preset_settings("interp", None),
            Err(QuantumError::MissingParameter(_))
        ));
        assert!(preset_settings("interp", Some(0.4)).is_err());
        assert!(preset_settings("bms_xy", Some(1.0)).is_err());
        assert!(Settings::new([1.0, 1.0, 0.0], X, Y, Z).is_err());
        for name in PRESET_NAMES {
            let param = match name {
                "interp" | "werner_bm" => Some(0.8),
                "pr_schmidt" | "steer_schmidt" | "bms_xy" | "bms_xz" => Some(0.3),
                _ => None,
            };
            assert!(preset_settings(name, param).is_ok());
        }
    }
}
