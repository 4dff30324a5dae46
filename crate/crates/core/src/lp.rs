//! Dense two-phase simplex for the small feasibility problems in this crate:
//! vertex decompositions, hull memberships, and the family fit inside the
//! 3-term decomposition. Problems here have at most a few dozen unknowns and
//! 17 rows, so a plain tableau with Bland's rule is enough.

const MAX_PIVOTS: usize = 50_000;

pub(crate) struct LpResult {
    /// Remaining phase-1 objective: ~0 means a feasible point was found.
    pub infeasibility: f64,
    pub x: Vec<f64>,
}

/// Finds x >= 0 with A x = b, minimizing the sum of artificial variables;
/// if feasible and `c` is given, then minimizes c . x over the feasible set.
pub(crate) fn solve(a: &[Vec<f64>], b: &[f64], c: Option<&[f64]>, tol: f64) -> LpResult {
    let m = b.len();
    let n = a.first().map_or(0, Vec::len);
    let cols = n + m + 1;
    let rhs = cols - 1;

    let mut t = vec![vec![0.0; cols]; m];
    for r in 0..m {
        let flip = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[r][j] = flip * a[r][j];
        }
        t[r][n + r] = 1.0;
        t[r][rhs] = flip * b[r];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: reduced costs for min(sum of artificials) with the artificial
    // basis are the column sums over the structural part.
    let mut z = vec![0.0; cols];
    for r in 0..m {
        for j in 0..n {
            z[j] += t[r][j];
        }
        z[rhs] += t[r][rhs];
    }
    run_simplex(&mut t, &mut z, &mut basis, n, tol);
    let infeasibility = z[rhs].max(0.0);

    if infeasibility <= tol.max(1e-9) {
        if let Some(c) = c {
            let mut z2 = vec![0.0; cols];
            for j in 0..cols {
                let mut d = 0.0;
                for r in 0..m {
                    let cb = if basis[r] < n { c[basis[r]] } else { 0.0 };
                    d += cb * t[r][j];
                }
                z2[j] = d;
            }
            for (j, &cj) in c.iter().enumerate() {
                z2[j] -= cj;
            }
            run_simplex(&mut t, &mut z2, &mut basis, n, tol);
        }
    }

    let mut x = vec![0.0; n];
    for r in 0..m {
        if basis[r] < n {
            x[basis[r]] = t[r][rhs].max(0.0);
        }
    }
    LpResult { infeasibility, x }
}

/// Pivots until no structural column has a positive reduced cost. Entering
/// and leaving choices follow Bland's rule, which rules out cycling.
fn run_simplex(t: &mut [Vec<f64>], z: &mut [f64], basis: &mut [usize], n: usize, tol: f64) {
    let m = t.len();
    let cols = z.len();
    let rhs = cols - 1;
    for _ in 0..MAX_PIVOTS {
        let Some(enter) = (0..n).find(|&j| z[j] > tol) else {
            return;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..m {
            if t[r][enter] > tol {
                let ratio = t[r][rhs] / t[r][enter];
                if ratio < best - 1e-15
                    || (ratio < best + 1e-15 && leave.is_some_and(|l| basis[r] < basis[l]))
                {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(leave) = leave else {
            // Unbounded direction; cannot happen for the bounded feasibility
            // problems built in this crate.
            return;
        };
        let piv = t[leave][enter];
        for j in 0..cols {
            t[leave][j] /= piv;
        }
        for r in 0..m {
            if r != leave && t[r][enter].abs() > 1e-14 {
                let f = t[r][enter];
                for j in 0..cols {
                    t[r][j] -= f * t[leave][j];
                }
            }
        }
        if z[enter].abs() > 1e-14 {
            let f = z[enter];
            for j in 0..cols {
                z[j] -= f * t[leave][j];
            }
        }
        basis[leave] = enter;
    }
    debug_assert!(false, "simplex failed to terminate within {MAX_PIVOTS} pivots");
}
