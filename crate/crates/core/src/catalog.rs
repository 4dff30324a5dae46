//! Exact constructors for the named box families.
//!
//! The nonsignaling polytope for this scenario has 24 vertices: 8 extremal
//! nonlocal boxes (indexed by [`PrIndex`]) and 16 local deterministic boxes
//! (indexed by [`DetIndex`]). The maximally local families built here --
//! the two kinds of Mermin boxes, the classically-correlated boxes, and the
//! Tsirelson mixtures -- are all exact rational or sqrt(2) tables.

use std::fmt;

use crate::box_core::{col_index, row_index, BoxError, NsBox};

/// Three-bit label (alpha, beta, gamma) of an extremal nonlocal box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrIndex {
    pub alpha: u8,
    pub beta: u8,
    pub gamma: u8,
}

impl PrIndex {
    pub fn new(alpha: u8, beta: u8, gamma: u8) -> Self {
        PrIndex {
            alpha: alpha & 1,
            beta: beta & 1,
            gamma: gamma & 1,
        }
    }

    /// Flat index k = 4*alpha + 2*beta + gamma.
    pub fn k(&self) -> usize {
        (4 * self.alpha + 2 * self.beta + self.gamma) as usize
    }

    pub fn from_k(k: usize) -> Self {
        assert!(k < 8, "PrIndex out of range: {k}");
        PrIndex::new((k >> 2) as u8, (k >> 1) as u8 & 1, k as u8 & 1)
    }

    pub fn all() -> impl Iterator<Item = PrIndex> {
        (0..8).map(PrIndex::from_k)
    }

    /// The partner whose uniform mixture with `self` is white noise.
    pub fn anti(&self) -> PrIndex {
        PrIndex::new(self.alpha, self.beta, self.gamma ^ 1)
    }
}

impl fmt::Display for PrIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.alpha, self.beta, self.gamma)
    }
}

/// Four-bit label (alpha, beta, gamma, epsilon) of a deterministic box:
/// m = alpha*x xor beta, n = gamma*y xor epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetIndex {
    pub alpha: u8,
    pub beta: u8,
    pub gamma: u8,
    pub epsilon: u8,
}

impl DetIndex {
    pub fn new(alpha: u8, beta: u8, gamma: u8, epsilon: u8) -> Self {
        DetIndex {
            alpha: alpha & 1,
            beta: beta & 1,
            gamma: gamma & 1,
            epsilon: epsilon & 1,
        }
    }

    /// Flat index l = 8*alpha + 4*beta + 2*gamma + epsilon.
    pub fn l(&self) -> usize {
        (8 * self.alpha + 4 * self.beta + 2 * self.gamma + self.epsilon) as usize
    }

    pub fn from_l(l: usize) -> Self {
        assert!(l < 16, "DetIndex out of range: {l}");
        DetIndex::new(
            (l >> 3) as u8,
            (l >> 2) as u8 & 1,
            (l >> 1) as u8 & 1,
            l as u8 & 1,
        )
    }

    pub fn all() -> impl Iterator<Item = DetIndex> {
        (0..16).map(DetIndex::from_l)
    }
}

impl fmt::Display for DetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}{}", self.alpha, self.beta, self.gamma, self.epsilon)
    }
}

/// Extremal nonlocal box: 1/2 where m xor n = xy xor alpha*x xor beta*y xor gamma.
pub fn pr_box(k: PrIndex) -> NsBox {
    let mut t = [[0.0; 4]; 4];
    for x in 0..2usize {
        for y in 0..2usize {
            for m in 0..2usize {
                for n in 0..2usize {
                    let target = (x & y)
                        ^ (k.alpha as usize & x)
                        ^ (k.beta as usize & y)
                        ^ k.gamma as usize;
                    if m ^ n == target {
                        t[row_index(x, y)][col_index(m, n)] = 0.5;
                    }
                }
            }
        }
    }
    NsBox::exact(t)
}

/// Local deterministic box: outcomes are fixed functions of the local inputs.
pub fn det_box(l: DetIndex) -> NsBox {
    let mut t = [[0.0; 4]; 4];
    for x in 0..2usize {
        for y in 0..2usize {
            let m = (l.alpha as usize & x) ^ l.beta as usize;
            let n = (l.gamma as usize & y) ^ l.epsilon as usize;
            t[row_index(x, y)][col_index(m, n)] = 1.0;
        }
    }
    NsBox::exact(t)
}

/// The uniform box: every entry 1/4.
pub fn white_noise() -> NsBox {
    NsBox::exact([[0.25; 4]; 4])
}

/// Maximally-mixed-marginals Mermin box.
///
/// Two input pairs carry the uniform distribution and the two others carry
/// the perfect XOR correlation m xor n = xy xor alpha*x xor beta*y xor gamma;
/// which pair is uniform switches with beta. Equals the uniform mixture of
/// two extremal nonlocal boxes and also of four deterministic boxes.
pub fn mermin_box_mm(k: PrIndex) -> NsBox {
    let uniform_parity = if k.beta == 0 { 0 } else { 1 };
    let mut t = [[0.0; 4]; 4];
    for x in 0..2usize {
        for y in 0..2usize {
            for m in 0..2usize {
                for n in 0..2usize {
                    let v = if x ^ y == uniform_parity {
                        0.25
                    } else {
                        let target = (x & y)
                            ^ (k.alpha as usize & x)
                            ^ (k.beta as usize & y)
                            ^ k.gamma as usize;
                        if m ^ n == target {
                            0.5
                        } else {
                            0.0
                        }
                    };
                    t[row_index(x, y)][col_index(m, n)] = v;
                }
            }
        }
    }
    NsBox::exact(t)
}

/// Which of the two nonmaximally-mixed-marginals Mermin enumerations a box
/// belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MerminFamily {
    M,
    MPrime,
}

impl fmt::Display for MerminFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MerminFamily::M => write!(f, "M"),
            MerminFamily::MPrime => write!(f, "M'"),
        }
    }
}

/// Nonmaximally-mixed-marginals Mermin box: the uniform mixture of two
/// deterministic boxes.
///
/// Family `M` pairs a constant-output strategy with a both-inputs-following
/// strategy; family `MPrime` pairs the two half-following strategies.
pub fn mermin_box_nmm(family: MerminFamily, l: DetIndex) -> NsBox {
    let (d1, d2) = nmm_components(family, l);
    let b1 = det_box(d1);
    let b2 = det_box(d2);
    let mut t = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            t[r][c] = 0.5 * (b1.table()[r][c] + b2.table()[r][c]);
        }
    }
    NsBox::exact(t)
}

/// The two deterministic boxes averaged by [`mermin_box_nmm`].
pub fn nmm_components(family: MerminFamily, l: DetIndex) -> (DetIndex, DetIndex) {
    match family {
        MerminFamily::M => (
            DetIndex::new(0, l.alpha, 0, l.beta),
            DetIndex::new(1, l.gamma, 1, l.epsilon),
        ),
        MerminFamily::MPrime => (
            DetIndex::new(0, l.alpha, 1, l.beta),
            DetIndex::new(1, l.gamma, 0, l.epsilon),
        ),
    }
}

/// One entry of the deduplicated nonmaximally-mixed Mermin catalog.
#[derive(Debug, Clone)]
pub struct NmmEntry {
    pub family: MerminFamily,
    pub raw: DetIndex,
    pub canonical_id: usize,
    pub table: NsBox,
}

/// Enumerates both four-bit families, folds duplicates, and reports the
/// distinct boxes with a canonical id each. The raw enumeration has 32 slots;
/// the distinct count is computed, not assumed.
pub fn nmm_boxes() -> Vec<NmmEntry> {
    let mut out: Vec<NmmEntry> = Vec::new();
    for family in [MerminFamily::M, MerminFamily::MPrime] {
        for l in DetIndex::all() {
            let bx = mermin_box_nmm(family, l);
            if !out.iter().any(|e| e.table.distance(&bx) < 1e-12) {
                let id = out.len();
                out.push(NmmEntry {
                    family,
                    raw: l,
                    canonical_id: id,
                    table: bx,
                });
            }
        }
    }
    out
}

/// Classically-correlated box: 1/2 where m xor n = alpha*x xor beta*y xor gamma.
pub fn cc_box(k: PrIndex) -> NsBox {
    let mut t = [[0.0; 4]; 4];
    for x in 0..2usize {
        for y in 0..2usize {
            for m in 0..2usize {
                for n in 0..2usize {
                    let target =
                        (k.alpha as usize & x) ^ (k.beta as usize & y) ^ k.gamma as usize;
                    if m ^ n == target {
                        t[row_index(x, y)][col_index(m, n)] = 0.5;
                    }
                }
            }
        }
    }
    NsBox::exact(t)
}

/// The extremal-box mixture that attains the quantum bound 2*sqrt(2):
/// weight 1/sqrt(2) on the nonlocal box, the rest on white noise.
pub fn tsirelson_box(k: PrIndex) -> NsBox {
    isotropic_pr(std::f64::consts::FRAC_1_SQRT_2, k).expect("weight in range")
}

/// Mixture p * pr_box(k) + (1 - p) * white noise.
pub fn isotropic_pr(p: f64, k: PrIndex) -> Result<NsBox, BoxError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(BoxError::OutOfRange { name: "p", value: p });
    }
    let pr = pr_box(k);
    let mut t = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            t[r][c] = p * pr.table()[r][c] + (1.0 - p) * 0.25;
        }
    }
    NsBox::new(t, crate::EPS_VAL)
}

/// Mixture of the correlated maximally-local box with e = diag(1, -1) and
/// white noise. The pure box is `mermin_box_mm(PrIndex::new(1, 1, 0))`.
pub fn isotropic_mermin(p: f64) -> Result<NsBox, BoxError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(BoxError::OutOfRange { name: "p", value: p });
    }
    let mm = mermin_box_mm(PrIndex::new(1, 1, 0));
    let mut t = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            t[r][c] = p * mm.table()[r][c] + (1.0 - p) * 0.25;
        }
    }
    NsBox::new(t, crate::EPS_VAL)
}

/// The 24 polytope vertices: the 8 nonlocal boxes in k order followed by the
/// 16 deterministic boxes in l order.
pub fn extremal_vertices() -> Vec<NsBox> {
    let mut v: Vec<NsBox> = PrIndex::all().map(pr_box).collect();
    v.extend(DetIndex::all().map(det_box));
    v
}

/// The five-box family spanning the maximally-local region around one
/// maximally-mixed Mermin box: the box itself plus the four
/// nonmaximally-mixed Mermin boxes sharing its product correlators.
pub fn q2_family(k: PrIndex) -> Vec<NsBox> {
    let mm = mermin_box_mm(k);
    let e_mm = mm.correlators().e;
    let mut fam = vec![mm];
    for entry in nmm_boxes() {
        let e = entry.table.correlators().e;
        let close = (0..2).all(|x| (0..2).all(|y| (e[x][y] - e_mm[x][y]).abs() < 1e-12));
        if close {
            fam.push(entry.table);
        }
    }
    assert_eq!(
        fam.len(),
        5,
        "each maximally-mixed Mermin box has exactly four correlator partners"
    );
    fam
}
