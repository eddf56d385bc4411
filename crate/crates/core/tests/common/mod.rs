//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rateregion::network::{MessageSet, NetworkSpec};
use rateregion::polytope::HPolytope;

/// Every nonempty subset that passes the closure predicate, by brute force.
pub fn closed_sets_oracle(spec: &NetworkSpec) -> Vec<MessageSet> {
    let m = spec.len();
    let mut out = Vec::new();
    for bits in 1u64..(1 << m) {
        let s = MessageSet::from_bits(bits);
        let closed = s.iter().all(|i| {
            let ti = &spec.message(i).tx;
            (0..m).all(|l| {
                let tl = &spec.message(l).tx;
                !(tl.len() < ti.len() && tl.is_subset(ti)) || s.contains(l)
            })
        });
        if closed {
            out.push(s);
        }
    }
    out.sort_by_key(|s| s.sort_key());
    out
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets_of_size(n - 1, k);
    for mut s in subsets_of_size(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Constraint rows `(a, b)` meaning `a·x <= b`, with the orthant and a box of
/// side `big` appended.
fn rows_with_box(rows: &[(Vec<f64>, f64)], dim: usize, big: f64) -> Vec<(Vec<f64>, f64)> {
    let mut all = rows.to_vec();
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = -1.0;
        all.push((e.clone(), 0.0));
        e[k] = 1.0;
        all.push((e, big));
    }
    all
}

/// Vertices of `{x >= 0, x_k <= big, rows}` by exhaustive basis enumeration.
pub fn vertices(rows: &[(Vec<f64>, f64)], dim: usize, big: f64) -> Vec<Vec<f64>> {
    let all = rows_with_box(rows, dim, big);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for basis in subsets_of_size(all.len(), dim) {
        let a = basis.iter().map(|&i| all[i].0.clone()).collect();
        let b = basis.iter().map(|&i| all[i].1).collect();
        if let Some(x) = solve(a, b) {
            let feasible = all
                .iter()
                .all(|(c, r)| c.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= r + 1e-9);
            if feasible && !out.iter().any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-9)) {
                out.push(x);
            }
        }
    }
    out
}

pub fn rows_of(p: &HPolytope) -> Vec<(Vec<f64>, f64)> {
    p.halfspaces().iter().map(|h| (h.coeffs.clone(), h.rhs)).collect()
}

/// Indices of constraints implied by the others (each tested alone).
pub fn redundant_oracle(p: &HPolytope, big: f64) -> Vec<bool> {
    let rows = rows_of(p);
    (0..rows.len())
        .map(|i| {
            let others: Vec<_> = rows
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, r)| r.clone())
                .collect();
            let (a, b) = &rows[i];
            vertices(&others, p.dim(), big)
                .iter()
                .all(|v| a.iter().zip(v).map(|(p, q)| p * q).sum::<f64>() <= b + 1e-9)
        })
        .collect()
}

/// `max d·x` over the vertices.
pub fn support_oracle(p: &HPolytope, d: &[f64], big: f64) -> f64 {
    vertices(&rows_of(p), p.dim(), big)
        .iter()
        .map(|v| v.iter().zip(d).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// `I(X; Y)` by direct summation of `p(x,y) log p(x,y) / (p(x) p(y))` over a
/// row-major `nx × ny` table.
pub fn mi_direct(pxy: &[f64], nx: usize, ny: usize) -> f64 {
    let px: Vec<f64> = (0..nx).map(|x| (0..ny).map(|y| pxy[x * ny + y]).sum()).collect();
    let py: Vec<f64> = (0..ny).map(|y| (0..nx).map(|x| pxy[x * ny + y]).sum()).collect();
    let mut i = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            let p = pxy[x * ny + y];
            if p > 0.0 {
                i += p * (p / (px[x] * py[y])).log2();
            }
        }
    }
    i
}

/// Entropy of the marginal over `keep` of a row-major table with `dims`.
pub fn entropy_oracle(pmf: &[f64], dims: &[usize], keep: &[usize]) -> f64 {
    use std::collections::HashMap;
    let mut marg: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut idx = vec![0usize; dims.len()];
    for &p in pmf {
        let key: Vec<usize> = keep.iter().map(|&k| idx[k]).collect();
        *marg.entry(key).or_default() += p;
        for ax in (0..dims.len()).rev() {
            idx[ax] += 1;
            if idx[ax] < dims[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
    marg.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

pub fn unique_temp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("rateregion-{}-{}", tag, std::process::id()));
    std::fs::create_dir_all(&dir).expect("create temp dir");
    dir
}
