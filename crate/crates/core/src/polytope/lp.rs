//! Dense primal simplex for `max c·x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The slack basis is feasible because `b >= 0`, so no phase one is needed.
//! Pivoting follows Bland's rule, which rules out cycling.

use thiserror::Error;

/// Pivot and reduced-cost tolerance.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("right-hand side {row} is negative ({value}); origin is not feasible")]
    NegativeRhs { row: usize, value: f64 },
    #[error("row {row} has {got} coefficients, expected {expected}")]
    Shape { row: usize, got: usize, expected: usize },
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("non-finite value in LP data")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, point: Vec<f64> },
    Unbounded,
}

pub fn maximize(objective: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<LpOutcome, LpError> {
    let n = objective.len();
    let m = rows.len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(LpError::Shape {
                row: r,
                got: row.len(),
                expected: n,
            });
        }
        if rhs[r] < 0.0 {
            return Err(LpError::NegativeRhs { row: r, value: rhs[r] });
        }
    }
    if objective
        .iter()
        .chain(rhs)
        .chain(rows.iter().flatten())
        .any(|v| !v.is_finite())
    {
        return Err(LpError::NonFinite);
    }

    // Tableau columns: n structural, m slack, 1 rhs. Row m is the objective,
    // stored as reduced costs (positive = improving).
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for r in 0..m {
        t[r * width..r * width + n].copy_from_slice(&rows[r]);
        t[r * width + n + r] = 1.0;
        t[r * width + n + m] = rhs[r];
    }
    t[m * width..m * width + n].copy_from_slice(objective);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let limit = 50 * (n + m + 1).pow(2);
    for _ in 0..limit {
        let obj = &t[m * width..m * width + n + m];
        let Some(enter) = obj.iter().position(|&c| c > EPS) else {
            let mut point = vec![0.0; n];
            for (r, &b) in basis.iter().enumerate() {
                if b < n {
                    point[b] = t[r * width + n + m];
                }
            }
            let value = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
            return Ok(LpOutcome::Optimal { value, point });
        };

        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let a = t[r * width + enter];
            if a > EPS {
                let ratio = t[r * width + n + m] / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((best, best_ratio)) => {
                        if ratio < best_ratio - 1e-12
                            || (ratio <= best_ratio + 1e-12 && basis[r] < basis[best])
                        {
                            Some((r, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
        }
        let Some((pr, _)) = leave else {
            return Ok(LpOutcome::Unbounded);
        };

        let piv = t[pr * width + enter];
        for v in &mut t[pr * width..(pr + 1) * width] {
            *v /= piv;
        }
        let pivot_row: Vec<f64> = t[pr * width..(pr + 1) * width].to_vec();
        for r in 0..=m {
            if r == pr {
                continue;
            }
            let f = t[r * width + enter];
            if f != 0.0 {
                for (v, p) in t[r * width..(r + 1) * width].iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        basis[pr] = enter;
    }
    Err(LpError::IterationLimit(limit))
}
