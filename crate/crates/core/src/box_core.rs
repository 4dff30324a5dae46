//! Representation, validation, and algebra of nonsignaling boxes.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * rows index the input pair (x,y) in the order (0,0), (0,1), (1,0), (1,1);
//! * columns index the outcome pair (a,b) in the same order;
//! * outcome index m carries the value a_m = (-1)^m, so m = 0 means +1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::EPS_VAL;

/// Errors from box construction and box algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxError {
    #[error("entry at row {row}, column {col} is {value}, outside [0, 1]")]
    NotAProbability { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, expected 1")]
    NotNormalized { row: usize, sum: f64 },
    #[error("{party} marginal for input {input}, outcome {outcome} shifts by {delta} with the remote input")]
    Signaling {
        party: &'static str,
        input: usize,
        outcome: usize,
        delta: f64,
    },
    #[error("{n_boxes} boxes mixed with {n_weights} weights summing to {sum}")]
    WeightMismatch {
        n_boxes: usize,
        n_weights: usize,
        sum: f64,
    },
    #[error("weight {index} is negative: {value}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("parameter {name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("table is not a convex combination of the requested vertices (best slack {slack})")]
    Infeasible { slack: f64 },
    #[error("no candidate produced a valid residual: {detail}")]
    NoValidResidual { detail: String },
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("bad JSON box: {0}")]
    Json(String),
}

#[inline]
pub(crate) fn row_index(x: usize, y: usize) -> usize {
    2 * x + y
}

#[inline]
pub(crate) fn col_index(m: usize, n: usize) -> usize {
    2 * m + n
}

#[inline]
pub(crate) fn outcome_sign(m: usize) -> f64 {
    if m == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Wire schema for a box: `{"table": [[4 reals] x 4]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxTable {
    pub table: [[f64; 4]; 4],
}

/// A validated nonsignaling box.
///
/// Construction enforces that every entry is a probability, every row is
/// normalized, and the marginals of each party do not depend on the other
/// party's input, all within the supplied tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsBox {
    table: [[f64; 4]; 4],
}

impl NsBox {
    /// Validates `table` and wraps it. Tolerance `tol` bounds the allowed
    /// deviation in each of the three checks.
    pub fn new(table: [[f64; 4]; 4], tol: f64) -> Result<Self, BoxError> {
        for (r, row) in table.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < -tol || v > 1.0 + tol {
                    return Err(BoxError::NotAProbability {
                        row: r,
                        col: c,
                        value: v,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(BoxError::NotNormalized { row: r, sum });
            }
        }
        // Alice's marginal must not depend on y, Bob's not on x.
        for x in 0..2 {
            for m in 0..2 {
                let p = |y: usize| {
                    table[row_index(x, y)][col_index(m, 0)] + table[row_index(x, y)][col_index(m, 1)]
                };
                let delta = p(0) - p(1);
                if delta.abs() > tol {
                    return Err(BoxError::Signaling {
                        party: "Alice",
                        input: x,
                        outcome: m,
                        delta,
                    });
                }
            }
        }
        for y in 0..2 {
            for n in 0..2 {
                let p = |x: usize| {
                    table[row_index(x, y)][col_index(0, n)] + table[row_index(x, y)][col_index(1, n)]
                };
                let delta = p(0) - p(1);
                if delta.abs() > tol {
                    return Err(BoxError::Signaling {
                        party: "Bob",
                        input: y,
                        outcome: n,
                        delta,
                    });
                }
            }
        }
        Ok(NsBox { table })
    }

    /// Validates with the default tolerance [`EPS_VAL`].
    pub fn from_table(table: [[f64; 4]; 4]) -> Result<Self, BoxError> {
        Self::new(table, EPS_VAL)
    }

    /// Wraps a table known to be valid by construction (catalog boxes,
    /// permutations of valid boxes).
    pub(crate) fn exact(table: [[f64; 4]; 4]) -> Self {
        debug_assert!(NsBox::new(table, 1e-6).is_ok());
        NsBox { table }
    }

    pub fn table(&self) -> &[[f64; 4]; 4] {
        &self.table
    }

    /// P(a_m, b_n | A_x, B_y).
    #[inline]
    pub fn prob(&self, x: usize, y: usize, m: usize, n: usize) -> f64 {
        self.table[row_index(x, y)][col_index(m, n)]
    }

    /// Expectation values of the products and of each party's outcomes.
    pub fn correlators(&self) -> Correlators {
        let mut e = [[0.0; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                let r = &self.table[row_index(x, y)];
                e[x][y] = r[0] - r[1] - r[2] + r[3];
            }
        }
        // Marginals of a valid box do not depend on the remote input; the
        // average over it just symmetrizes float dust.
        let mut ma = [0.0; 2];
        let mut mb = [0.0; 2];
        for x in 0..2 {
            for y in 0..2 {
                let r = &self.table[row_index(x, y)];
                ma[x] += 0.5 * (r[0] + r[1] - r[2] - r[3]);
                mb[y] += 0.5 * (r[0] - r[1] + r[2] - r[3]);
            }
        }
        Correlators { e, ma, mb }
    }

    /// Applies a local relabeling. The result is again a valid box; the
    /// operation is an exact permutation of table entries.
    pub fn apply_lro(&self, t: &Lro) -> NsBox {
        let mut out = [[0.0; 4]; 4];
        let fa = t.alice.input_flip as usize;
        let fb = t.bob.input_flip as usize;
        for x in 0..2 {
            for y in 0..2 {
                let sx = x ^ fa;
                let sy = y ^ fb;
                for m in 0..2 {
                    for n in 0..2 {
                        let sm = m ^ ((t.alice.alpha as usize) & x) ^ (t.alice.beta as usize);
                        let sn = n ^ ((t.bob.alpha as usize) & y) ^ (t.bob.beta as usize);
                        out[row_index(x, y)][col_index(m, n)] =
                            self.table[row_index(sx, sy)][col_index(sm, sn)];
                    }
                }
            }
        }
        NsBox::exact(out)
    }

    /// Largest absolute entrywise difference.
    pub fn distance(&self, other: &NsBox) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                d = d.max((self.table[r][c] - other.table[r][c]).abs());
            }
        }
        d
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&BoxTable { table: self.table }).expect("box serializes")
    }

    /// Parses the `{"table": ...}` schema and validates it.
    pub fn from_json(s: &str, tol: f64) -> Result<Self, BoxError> {
        let raw: BoxTable = serde_json::from_str(s).map_err(|e| BoxError::Json(e.to_string()))?;
        NsBox::new(raw.table, tol)
    }
}

/// The four product expectations `e[x][y]` plus the per-party marginal
/// expectations of a box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlators {
    pub e: [[f64; 2]; 2],
    pub ma: [f64; 2],
    pub mb: [f64; 2],
}

impl Correlators {
    /// Rebuilds the table. For binary outcomes this inversion is exact:
    /// P(m,n|x,y) = (1 + a ma[x] + b mb[y] + ab e[x][y]) / 4.
    pub fn reconstruct(&self) -> [[f64; 4]; 4] {
        let mut t = [[0.0; 4]; 4];
        for x in 0..2 {
            for y in 0..2 {
                for m in 0..2 {
                    for n in 0..2 {
                        let a = outcome_sign(m);
                        let b = outcome_sign(n);
                        t[row_index(x, y)][col_index(m, n)] =
                            0.25 * (1.0 + a * self.ma[x] + b * self.mb[y] + a * b * self.e[x][y]);
                    }
                }
            }
        }
        t
    }
}

/// Entrywise convex combination of boxes.
pub fn mix(boxes: &[NsBox], weights: &[f64]) -> Result<NsBox, BoxError> {
    let sum: f64 = weights.iter().sum();
    if boxes.len() != weights.len() || boxes.is_empty() || (sum - 1.0).abs() > EPS_VAL {
        return Err(BoxError::WeightMismatch {
            n_boxes: boxes.len(),
            n_weights: weights.len(),
            sum,
        });
    }
    if let Some((i, &w)) = weights.iter().enumerate().find(|(_, &w)| w < 0.0) {
        return Err(BoxError::NegativeWeight { index: i, value: w });
    }
    let mut t = [[0.0; 4]; 4];
    for (bx, &w) in boxes.iter().zip(weights) {
        for r in 0..4 {
            for c in 0..4 {
                t[r][c] += w * bx.table[r][c];
            }
        }
    }
    NsBox::new(t, EPS_VAL)
}

/// Exchanges the roles of the two parties.
pub fn swap_parties(bx: &NsBox) -> NsBox {
    let mut t = [[0.0; 4]; 4];
    for x in 0..2 {
        for y in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    t[row_index(x, y)][col_index(m, n)] = bx.prob(y, x, n, m);
                }
            }
        }
    }
    NsBox::exact(t)
}

/// One party's share of a local reversible operation: an optional input
/// flip plus the output relabeling m -> m xor (alpha and x) xor beta,
/// conditioned on the input the relabeled box is queried with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PartyLro {
    pub input_flip: bool,
    pub alpha: bool,
    pub beta: bool,
}

impl PartyLro {
    pub const IDENTITY: PartyLro = PartyLro {
        input_flip: false,
        alpha: false,
        beta: false,
    };

    fn then(&self, next: &PartyLro) -> PartyLro {
        // Applying `self` first and `next` second composes to another
        // relabeling of the same shape.
        PartyLro {
            input_flip: self.input_flip ^ next.input_flip,
            alpha: self.alpha ^ next.alpha,
            beta: self.beta ^ next.beta ^ (self.alpha & next.input_flip),
        }
    }

    fn inverse(&self) -> PartyLro {
        PartyLro {
            input_flip: self.input_flip,
            alpha: self.alpha,
            beta: self.beta ^ (self.alpha & self.input_flip),
        }
    }

    pub fn all() -> impl Iterator<Item = PartyLro> {
        (0..8).map(|k| PartyLro {
            input_flip: k & 4 != 0,
            alpha: k & 2 != 0,
            beta: k & 1 != 0,
        })
    }
}

/// A local reversible operation for both parties; the group has 64 elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lro {
    pub alice: PartyLro,
    pub bob: PartyLro,
}

impl Lro {
    pub const IDENTITY: Lro = Lro {
        alice: PartyLro::IDENTITY,
        bob: PartyLro::IDENTITY,
    };

    /// The relabeling equivalent to applying `self` first, then `next`.
    pub fn then(&self, next: &Lro) -> Lro {
        Lro {
            alice: self.alice.then(&next.alice),
            bob: self.bob.then(&next.bob),
        }
    }

    pub fn inverse(&self) -> Lro {
        Lro {
            alice: self.alice.inverse(),
            bob: self.bob.inverse(),
        }
    }

    /// All 64 group elements.
    pub fn all() -> Vec<Lro> {
        let mut out = Vec::with_capacity(64);
        for a in PartyLro::all() {
            for b in PartyLro::all() {
                out.push(Lro { alice: a, bob: b });
            }
        }
        out
    }
}
