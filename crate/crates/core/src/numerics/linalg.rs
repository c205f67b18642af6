//! Dense symmetric eigendecomposition (cyclic Jacobi) and thin SVD
//! (one-sided Jacobi). Both favour accuracy over speed; inputs are expected to
//! be at most a few thousand rows.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Eigenpairs of a symmetric matrix, values descending, vectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

/// Truncated SVD `M ≈ U diag(values) Vᵀ`, values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub values: Array1<f64>,
    /// `m × k`, orthonormal columns.
    pub u: Array2<f64>,
    /// `n × k`, orthonormal columns.
    pub v: Array2<f64>,
}

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

fn check_finite(m: ArrayView2<'_, f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric("matrix contains non-finite values".into()))
    }
}

pub fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `max |QᵀQ − I|` over entries.
pub fn orthonormality_error(q: &Array2<f64>) -> f64 {
    let g = q.t().dot(q);
    g.indexed_iter()
        .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Symmetry is checked entrywise against `1e-10 · max(1, max|S|)`.
pub fn sym_eigen(s: &Array2<f64>) -> Result<Spectrum> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "{}x{} matrix is not square",
            n,
            s.ncols()
        )));
    }
    check_finite(s.view())?;
    let scale = s.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (s[[i, j]] - s[[j, i]]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidArgument(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }

    // row-major working copy, symmetrised
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (s[[i, j]] + s[[j, i]]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= 1e-30 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[r * n + order[c]]);
    Ok(Spectrum { values, vectors })
}

/// Replaces columns flagged in `fill` by unit vectors orthogonal to all other
/// columns (Gram–Schmidt over the standard basis).
fn complete_basis(q: &mut Array2<f64>, fill: &[bool]) {
    let (m, k) = q.dim();
    let mut candidate = 0;
    for c in 0..k {
        if !fill[c] {
            continue;
        }
        while candidate < m {
            let mut e = Array1::zeros(m);
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for o in 0..k {
                    if o == c || (fill[o] && o > c) {
                        continue;
                    }
                    let col = q.column(o);
                    let d = col.dot(&e);
                    e.scaled_add(-d, &col);
                }
            }
            let norm = e.dot(&e).sqrt();
            if norm > 1e-6 {
                q.column_mut(c).assign(&(e / norm));
                break;
            }
        }
    }
}

fn jacobi_svd_tall(m: &Array2<f64>) -> Svd {
    let (rows, n) = m.dim();
    let mut u = m.clone();
    let mut v = Array2::<f64>::eye(n);
    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let cp = u.column(p);
                    let cq = u.column(q);
                    (cp.dot(&cp), cq.dot(&cq), cp.dot(&cq))
                };
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let up = u[[r, p]];
                    let uq = u[[r, q]];
                    u[[r, p]] = c * up - s * uq;
                    u[[r, q]] = s * up + c * uq;
                }
                for r in 0..n {
                    let vp = v[[r, p]];
                    let vq = v[[r, q]];
                    v[[r, p]] = c * vp - s * vq;
                    v[[r, q]] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = u.columns().into_iter().map(|c| c.dot(&c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let values: Array1<f64> = order.iter().map(|&i| norms[i]).collect();
    let u = u.select(Axis(1), &order);
    let v = v.select(Axis(1), &order);
    let top = values.first().copied().unwrap_or(0.0);
    let cutoff = top * eps * (rows.max(n) as f64);
    let fill: Vec<bool> = values.iter().map(|&s| s <= cutoff || s == 0.0).collect();
    let mut u = u;
    for (c, &sv) in values.iter().enumerate() {
        if !fill[c] {
            let col = u.column(c).to_owned() / sv;
            u.column_mut(c).assign(&col);
        }
    }
    complete_basis(&mut u, &fill);
    Svd { values, u, v }
}

/// Top-`k` singular triplets of `m`.
pub fn svd(m: &Array2<f64>, k: usize) -> Result<Svd> {
    let (rows, cols) = m.dim();
    if k > rows.min(cols) {
        return Err(Error::InvalidArgument(format!("rank {k} exceeds min({rows}, {cols})")));
    }
    check_finite(m.view())?;
    let full = if rows >= cols {
        jacobi_svd_tall(m)
    } else {
        let t = jacobi_svd_tall(&m.t().to_owned());
        Svd {
            values: t.values,
            u: t.v,
            v: t.u,
        }
    };
    Ok(Svd {
        values: full.values.slice(s![..k]).to_owned(),
        u: full.u.slice(s![.., ..k]).to_owned(),
        v: full.v.slice(s![.., ..k]).to_owned(),
    })
}

/// First right singular vector of `m` (the uncentred first principal
/// direction of its rows).
pub fn top_right_singular(m: &Array2<f64>) -> Result<Array1<f64>> {
    let d = svd(m, 1)?;
    Ok(d.v.column(0).to_owned())
}

/// Minimum-norm least-squares solution of `A X = B` for symmetric positive
/// semi-definite `A`, via its eigendecomposition. Eigenvalues below
/// `1e-12 · λ_max` are treated as zero.
pub fn solve_psd(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let spec = sym_eigen(a)?;
    let top = spec.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = 1e-12 * top;
    let proj = spec.vectors.t().dot(b);
    let mut scaled = proj;
    for (i, mut row) in scaled.rows_mut().into_iter().enumerate() {
        let lam = spec.values[i];
        if lam > cutoff {
            row /= lam;
        } else {
            row.fill(0.0);
        }
    }
    Ok(spec.vectors.dot(&scaled))
}
