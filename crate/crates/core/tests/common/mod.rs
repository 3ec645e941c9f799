//! Independent oracles shared by the integration tests.
#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use altmin::engine::{run, IterateTrace, RunOptions};
use altmin::instances::{assemble_paper_example, make_smooth_instance};
use altmin::linalg::Matrix;

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// ascending.
pub fn jacobi_eigenvalues(k: &Matrix) -> Vec<f64> {
    let n = k.rows();
    let mut a: Vec<Vec<f64>> = k.to_rows();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (arp, arq) = (a[r][p], a[r][q]);
                    a[r][p] = c * arp - s * arq;
                    a[r][q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let (apr, aqr) = (a[p][r], a[q][r]);
                    a[p][r] = c * apr - s * aqr;
                    a[q][r] = s * apr + c * aqr;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(k: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let n = k.rows();
    let mut a = k.to_rows();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Optimal value of `½ xᵀ M x − bᵀ x` by the pivoted solve.
pub fn quadratic_min_value(m: &Matrix, b: &[f64]) -> f64 {
    let x = gauss_solve(m, b);
    -0.5 * b.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>()
}

/// The example trace from `x1 = 0` with the pivoted-solve reference value.
pub fn example_trace(iters: usize) -> IterateTrace {
    let q = assemble_paper_example();
    let h_star = quadratic_min_value(&q.assemble(), &q.rhs());
    let p = make_smooth_instance(q).unwrap();
    run(&p, &[0.0; 3], &RunOptions::iterations(iters))
        .unwrap()
        .with_h_star(h_star)
}

/// The plotted gaps at abscissae 1, 2, 10 and 31; abscissa `j` is the trace
/// index `j − 1` because the plot counts the initialization as the first
/// point.
pub const FIGURE_ANCHORS: [(usize, f64); 4] =
    [(1, 0.2827), (2, 0.0206), (10, 6.9995e-4), (31, 7.5230e-7)];
