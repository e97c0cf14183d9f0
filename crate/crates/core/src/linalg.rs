//! Small dense linear algebra over any [`Field`]. Vectors are `Vec<T>`, matrices row-major `Vec<Vec<T>>`.

use crate::numeric::{Field, Real};

pub type Vector<T> = Vec<T>;
pub type Matrix<T> = Vec<Vec<T>>;

pub fn dot<T: Field>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

pub fn norm_sq<T: Field>(u: &[T]) -> T {
    dot(u, u)
}

pub fn norm<T: Real>(u: &[T]) -> T {
    norm_sq(u).sqrt()
}

pub fn add<T: Field>(u: &[T], v: &[T]) -> Vector<T> {
    u.iter().zip(v).map(|(a, b)| a.clone() + b.clone()).collect()
}

pub fn sub<T: Field>(u: &[T], v: &[T]) -> Vector<T> {
    u.iter().zip(v).map(|(a, b)| a.clone() - b.clone()).collect()
}

pub fn scale<T: Field>(s: &T, u: &[T]) -> Vector<T> {
    u.iter().map(|a| s.clone() * a.clone()).collect()
}

/// `u + s·v`.
pub fn axpy<T: Field>(u: &[T], s: &T, v: &[T]) -> Vector<T> {
    u.iter().zip(v).map(|(a, b)| a.clone() + s.clone() * b.clone()).collect()
}

pub fn mat_vec<T: Field>(m: &[Vec<T>], v: &[T]) -> Vector<T> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul<T: Field>(p: &[Vec<T>], q: &[Vec<T>]) -> Matrix<T> {
    let cols = q.first().map_or(0, Vec::len);
    p.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(q).fold(T::zero(), |acc, (a, qr)| acc + a.clone() * qr[j].clone()))
                .collect()
        })
        .collect()
}

pub fn transpose<T: Field>(m: &[Vec<T>]) -> Matrix<T> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn identity<T: Field>(d: usize) -> Matrix<T> {
    (0..d).map(|i| (0..d).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect()
}

/// Solves `m · x = rhs` by Gaussian elimination with partial pivoting; `None` if singular.
pub fn solve<T: Field>(m: &[Vec<T>], rhs: &[T]) -> Option<Vector<T>> {
    let n = m.len();
    let mut aug: Matrix<T> = m
        .iter()
        .zip(rhs)
        .map(|(row, r)| {
            let mut row = row.clone();
            row.push(r.clone());
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .filter(|&r| !aug[r][col].is_zero())
            .max_by(|&i, &j| aug[i][col].abs().partial_cmp(&aug[j][col].abs()).unwrap())?;
        aug.swap(col, piv);
        let p = aug[col][col].clone();
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone() / p.clone();
                for c in col..=n {
                    let v = aug[col][c].clone();
                    aug[r][c] = aug[r][c].clone() - factor.clone() * v;
                }
            }
        }
    }
    Some((0..n).map(|r| aug[r][n].clone() / aug[r][r].clone()).collect())
}

/// Inverse by Gauss-Jordan; `None` if singular.
pub fn inverse<T: Field>(m: &[Vec<T>]) -> Option<Matrix<T>> {
    let n = m.len();
    let cols: Option<Vec<Vector<T>>> = (0..n)
        .map(|j| {
            let e: Vector<T> = (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect();
            solve(m, &e)
        })
        .collect();
    cols.map(|c| transpose(&c))
}

/// Orthogonalizes `vectors` against `basis` and each other (classical Gram-Schmidt without
/// normalization), dropping vectors whose residual is within `tol` of zero in squared norm.
/// Exact for rational scalars with `tol = 0`.
pub fn gram_schmidt<T: Field>(basis: &mut Vec<Vector<T>>, vectors: impl IntoIterator<Item = Vector<T>>, tol: &T) {
    for v in vectors {
        let original = norm_sq(&v);
        let mut r = v;
        for u in basis.iter() {
            let coef = dot(&r, u) / norm_sq(u);
            r = axpy(&r, &-coef, u);
        }
        if !original.is_zero() && norm_sq(&r) > tol.clone() * original {
            basis.push(r);
        }
    }
}

/// Orthogonal basis of the row space of `rows`.
pub fn row_space_basis<T: Field>(rows: &[Vector<T>], tol: &T) -> Vec<Vector<T>> {
    let mut basis = Vec::new();
    gram_schmidt(&mut basis, rows.iter().cloned(), tol);
    basis
}

/// Orthogonal (unnormalized) basis of `ker(rows)`, obtained by continuing Gram-Schmidt from the
/// row space over the standard basis vectors `e_1, …, e_d`.
pub fn null_space_basis<T: Field>(rows: &[Vector<T>], d: usize, tol: &T) -> Vec<Vector<T>> {
    let mut basis = row_space_basis(rows, tol);
    let r = basis.len();
    let units = (0..d).map(|i| (0..d).map(|j| if i == j { T::one() } else { T::zero() }).collect());
    gram_schmidt(&mut basis, units, tol);
    basis.split_off(r)
}

/// Orthogonal projector onto `ker(rows)`: `I − Σ u uᵀ/‖u‖²` over an orthogonal row-space basis.
pub fn null_projector<T: Field>(rows: &[Vector<T>], d: usize, tol: &T) -> Matrix<T> {
    let basis = row_space_basis(rows, tol);
    let mut p = identity::<T>(d);
    for u in &basis {
        let nu = norm_sq(u);
        for i in 0..d {
            for j in 0..d {
                p[i][j] = p[i][j].clone() - u[i].clone() * u[j].clone() / nu.clone();
            }
        }
    }
    p
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues with unit eigenvectors, sorted ascending (ties keep column order).
pub fn symmetric_eigen<T: Real>(m: &[Vec<T>], tol: &T, max_sweeps: usize) -> Vec<(T, Vector<T>)> {
    let n = m.len();
    let mut a: Matrix<T> = m.to_vec();
    let mut v = identity::<T>(n);
    let off = |a: &Matrix<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s = s + a[i][j].clone() * a[i][j].clone();
                }
            }
        }
        s
    };
    let two = T::from_i64(2);
    for _ in 0..max_sweeps {
        let scale = (0..n).fold(T::zero(), |s, i| s + a[i][i].clone() * a[i][i].clone()) + off(&a);
        if off(&a) <= tol.clone() * tol.clone() * T::one().max_of(scale) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].is_zero() {
                    continue;
                }
                let theta = (a[q][q].clone() - a[p][p].clone()) / (two.clone() * a[p][q].clone());
                let sign = if theta < T::zero() { -T::one() } else { T::one() };
                let t = sign / (theta.abs() + (theta.clone() * theta.clone() + T::one()).sqrt());
                let c = T::one() / (t.clone() * t.clone() + T::one()).sqrt();
                let s = t.clone() * c.clone();
                for k in 0..n {
                    let akp = a[k][p].clone();
                    let akq = a[k][q].clone();
                    a[k][p] = c.clone() * akp.clone() - s.clone() * akq.clone();
                    a[k][q] = s.clone() * akp + c.clone() * akq;
                }
                for k in 0..n {
                    let apk = a[p][k].clone();
                    let aqk = a[q][k].clone();
                    a[p][k] = c.clone() * apk.clone() - s.clone() * aqk.clone();
                    a[q][k] = s.clone() * apk + c.clone() * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p].clone();
                    let vkq = v[k][q].clone();
                    v[k][p] = c.clone() * vkp.clone() - s.clone() * vkq.clone();
                    v[k][q] = s.clone() * vkp + c.clone() * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(T, Vector<T>)> =
        (0..n).map(|j| (a[j][j].clone(), (0..n).map(|i| v[i][j].clone()).collect())).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    pairs
}
