//! Test-only oracles, independent of the library's numerical paths.

#![allow(dead_code)]

use dtqw_rank::graph::{self, DirectedGraph};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + a.norm()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Stationary vector of a column-stochastic matrix: solves `(G − I)v = 0`
/// with `Σv = 1` by Gaussian elimination with partial pivoting.
pub fn stationary_vector(g: &DMatrix<f64>) -> Vec<f64> {
    let n = g.nrows();
    let mut m = g.clone() - DMatrix::identity(n, n);
    let mut rhs = vec![0.0; n];
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    rhs[n - 1] = 1.0;
    // forward elimination
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[(a, col)].abs().total_cmp(&m[(b, col)].abs()))
            .unwrap();
        if pivot != col {
            m.swap_rows(pivot, col);
            rhs.swap(pivot, col);
        }
        let d = m[(col, col)];
        for r in (col + 1)..n {
            let f = m[(r, col)] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[(r, c)] -= f * m[(col, c)];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in (r + 1)..n {
            acc -= m[(r, c)] * x[c];
        }
        x[r] = acc / m[(r, r)];
    }
    x
}

/// Full `2N × 2N` walk operator `S·C` on the basis ordering
/// `(↑,0), …, (↑,N−1), (↓,0), …, (↓,N−1)`.
pub fn dense_step_operator(
    coin: &[[[f64; 2]; 2]],
    scatter: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let n = coin.len();
    let mut c = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for (x, b) in coin.iter().enumerate() {
        c[(x, x)] = b[0][0].into();
        c[(x, n + x)] = b[0][1].into();
        c[(n + x, x)] = b[1][0].into();
        c[(n + x, n + x)] = b[1][1].into();
    }
    let mut s = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for x in 0..n {
        s[(x, x)] = Complex64::new(1.0, 0.0);
        for k in 0..n {
            s[(n + k, n + x)] = scatter[(k, x)];
        }
    }
    s * c
}

pub fn dense_probabilities(psi: &DVector<Complex64>) -> Vec<f64> {
    let n = psi.len() / 2;
    (0..n)
        .map(|x| psi[x].norm_sqr() + psi[n + x].norm_sqr())
        .collect()
}

/// Line walk by explicit dense matrices on positions `−t..=t`.
pub fn dense_line_walk(t: usize, theta: f64, a0: Complex64, b0: Complex64) -> Vec<f64> {
    let w = 2 * t + 1;
    let dim = 2 * w;
    let (c, s) = (theta.cos(), theta.sin());
    let mis = Complex64::new(0.0, -s);
    let mut coin = DMatrix::<Complex64>::zeros(dim, dim);
    for x in 0..w {
        coin[(x, x)] = c.into();
        coin[(x, w + x)] = mis;
        coin[(w + x, x)] = mis;
        coin[(w + x, w + x)] = c.into();
    }
    // up moves left, down moves right; edges wrap but are never reached in t steps
    let mut shift = DMatrix::<Complex64>::zeros(dim, dim);
    for x in 0..w {
        shift[((x + w - 1) % w, x)] = Complex64::new(1.0, 0.0);
        shift[(w + (x + 1) % w, w + x)] = Complex64::new(1.0, 0.0);
    }
    let op = shift * coin;
    let mut psi = DVector::<Complex64>::zeros(dim);
    psi[t] = a0;
    psi[w + t] = b0;
    for _ in 0..t {
        psi = &op * psi;
    }
    (0..w)
        .map(|x| psi[x].norm_sqr() + psi[w + x].norm_sqr())
        .collect()
}

/// Graphs used by the property and acceptance suites (54 graphs).
pub fn corpus() -> Vec<(String, DirectedGraph)> {
    let mut out = Vec::new();
    for b in [2usize, 3] {
        for l in 1..=5u32 {
            out.push((format!("tree b={b} L={l}"), graph::gen_tree(b, l).unwrap()));
        }
    }
    for n in [8usize, 16, 32, 64] {
        for m in [1usize, 2] {
            for seed in 0..3u64 {
                out.push((
                    format!("scale-free n={n} m={m} seed={seed}"),
                    graph::gen_scale_free(n, m, seed).unwrap(),
                ));
            }
        }
    }
    for n in [10usize, 25, 50] {
        for seed in 0..3u64 {
            out.push((
                format!("gnc n={n} seed={seed}"),
                graph::gen_gnc(n, seed).unwrap(),
            ));
        }
    }
    for n in [2usize, 3, 5, 7, 10] {
        out.push((format!("cycle n={n}"), graph::gen_cycle(n).unwrap()));
    }
    for (i, (n, p, weighted)) in [
        (6usize, 0.3, false),
        (12, 0.2, true),
        (20, 0.15, false),
        (30, 0.1, true),
        (40, 0.05, true),
        (16, 0.5, false),
    ]
    .into_iter()
    .enumerate()
    {
        out.push((
            format!("random n={n} p={p} weighted={weighted}"),
            graph::gen_random(n, p, weighted, 100 + i as u64).unwrap(),
        ));
    }
    out
}
