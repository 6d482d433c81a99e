//! Small dense complex solvers used by the witness searches and the arc
//! projection. Nothing here contributes to a certified quantity.

use num_complex::Complex64;

/// Damped scalar Newton iteration for a holomorphic equation g(w) = 0.
/// `eval` returns (g(w), g'(w)). Returns the root and iteration count.
pub fn newton_scalar<F>(
    eval: F,
    w0: Complex64,
    tol: f64,
    max_iter: usize,
) -> Option<(Complex64, usize)>
where
    F: Fn(Complex64) -> (Complex64, Complex64),
{
    let mut w = w0;
    let (mut g, mut dg) = eval(w);
    for it in 0..max_iter {
        if g.norm() <= tol {
            return Some((w, it));
        }
        if dg.norm() < 1e-300 {
            return None;
        }
        let full_step = g / dg;
        let mut lambda = 1.0f64;
        let mut accepted = false;
        for _ in 0..24 {
            let cand = w - full_step * lambda;
            let (gc, dgc) = eval(cand);
            if gc.norm() < g.norm() {
                w = cand;
                g = gc;
                dg = dgc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    if g.norm() <= tol {
        Some((w, max_iter))
    } else {
        None
    }
}

/// Levenberg-Marquardt on a square holomorphic system r(z) = 0 with complex
/// Jacobian. Returns (z, ||r(z)||, iterations).
pub fn lm_solve<F>(eval: F, z0: Vec<Complex64>, tol: f64, max_iter: usize) -> (Vec<Complex64>, f64, usize)
where
    F: Fn(&[Complex64]) -> (Vec<Complex64>, Vec<Vec<Complex64>>),
{
    let k = z0.len();
    let mut z = z0;
    let (mut r, mut jac) = eval(&z);
    let mut rnorm = norm(&r);
    let mut mu = 1e-6f64;
    for it in 0..max_iter {
        if rnorm <= tol {
            return (z, rnorm, it);
        }
        // Solve (J^H J + mu I) dz = -J^H r.
        let mut a = vec![vec![Complex64::new(0.0, 0.0); k]; k];
        let mut b = vec![Complex64::new(0.0, 0.0); k];
        for i in 0..k {
            for j in 0..k {
                let mut acc = Complex64::new(0.0, 0.0);
                for jr in &jac {
                    acc += jr[i].conj() * jr[j];
                }
                a[i][j] = acc;
            }
            a[i][i] += Complex64::new(mu, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (row, ri) in r.iter().enumerate() {
                acc += jac[row][i].conj() * ri;
            }
            b[i] = -acc;
        }
        let Some(dz) = solve_dense(a, b) else {
            mu *= 10.0;
            continue;
        };
        let cand: Vec<Complex64> = z.iter().zip(&dz).map(|(a, d)| a + d).collect();
        let (rc, jc) = eval(&cand);
        let rcnorm = norm(&rc);
        if rcnorm < rnorm {
            z = cand;
            r = rc;
            jac = jc;
            rnorm = rcnorm;
            mu = (mu * 0.3).max(1e-14);
        } else {
            mu *= 10.0;
            if mu > 1e12 {
                return (z, rnorm, it);
            }
        }
    }
    (z, rnorm, max_iter)
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Gaussian elimination with partial pivoting for a small dense complex
/// system. `None` on (numerical) singularity.
pub fn solve_dense(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let (pivot, pnorm) = (col..n)
            .map(|r| (r, a[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pnorm < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let delta = f * a[col][c];
                a[r][c] -= delta;
            }
            let delta = f * b[col];
            b[r] -= delta;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in row + 1..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_finds_cube_root() {
        let target = Complex64::new(-8.0, 0.0);
        let (w, _) = newton_scalar(
            |w| (w * w * w - target, 3.0 * w * w),
            Complex64::new(1.0, 1.0),
            1e-14,
            100,
        )
        .unwrap();
        assert!((w * w * w - target).norm() < 1e-12);
    }

    #[test]
    fn lm_reaches_joint_zero() {
        // r = (z1^2 - 1, z1 z2 - 2)
        let eval = |z: &[Complex64]| {
            let r = vec![z[0] * z[0] - 1.0, z[0] * z[1] - 2.0];
            let jac = vec![
                vec![2.0 * z[0], Complex64::new(0.0, 0.0)],
                vec![z[1], z[0]],
            ];
            (r, jac)
        };
        let (z, rn, _) = lm_solve(
            eval,
            vec![Complex64::new(0.8, 0.1), Complex64::new(1.5, -0.2)],
            1e-12,
            200,
        );
        assert!(rn < 1e-12);
        assert!((z[0].norm() - 1.0).abs() < 1e-9);
    }
}
