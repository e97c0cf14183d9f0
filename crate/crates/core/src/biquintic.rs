//! Biquintic Hermite patches: one degree-(5,5) polynomial per grid cell, fitted to value,
//! first and pure second derivatives at the four corners.

use std::sync::OnceLock;

use dashu::rational::RBig;

use crate::color_field::CornerAssignment;
use crate::error::{Error, Result};
use crate::linalg::{inverse, mat_mul, transpose, Matrix};
use crate::numeric::Field;

/// Rows: value at 0, value at 1, first derivative at 0 and 1, second derivative at 0 and 1,
/// applied to the monomials `1, t, …, t⁵`.
pub const HERMITE_BASIS: [[i64; 6]; 6] = [
    [1, 0, 0, 0, 0, 0],
    [1, 1, 1, 1, 1, 1],
    [0, 1, 0, 0, 0, 0],
    [0, 1, 2, 3, 4, 5],
    [0, 0, 2, 0, 0, 0],
    [0, 0, 2, 6, 12, 20],
];

pub fn basis_matrix() -> Matrix<RBig> {
    HERMITE_BASIS.iter().map(|r| r.iter().map(|&v| RBig::from(v)).collect()).collect()
}

/// Exact inverse of [`HERMITE_BASIS`], computed once.
pub fn basis_inverse() -> &'static Matrix<RBig> {
    static INV: OnceLock<Matrix<RBig>> = OnceLock::new();
    INV.get_or_init(|| inverse(&basis_matrix()).expect("Hermite basis is invertible"))
}

/// Jet prescribed at one corner.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerJet {
    pub f: RBig,
    pub fx: RBig,
    pub fy: RBig,
    pub fxx: RBig,
    pub fyy: RBig,
}

impl From<&CornerAssignment> for CornerJet {
    fn from(c: &CornerAssignment) -> Self {
        let (fx, fy) = c.direction.gradient();
        let half = RBig::from(-1) / RBig::from(2);
        CornerJet { f: RBig::from(c.value.clone()), fx, fy, fxx: half.clone(), fyy: half }
    }
}

/// The 6×6 matrix `V` of corner data: rows index `x`-functionals, columns `y`-functionals,
/// mixed slots zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerBlock(pub [[RBig; 6]; 6]);

/// Lays out corner jets given in the order `(a,b), (a,b+1), (a+1,b), (a+1,b+1)`.
pub fn assemble_corner_block(corners: [&CornerJet; 4]) -> CornerBlock {
    let [c00, c01, c10, c11] = corners;
    let z = RBig::ZERO;
    let row = |p: &CornerJet, q: &CornerJet| {
        [p.f.clone(), q.f.clone(), p.fy.clone(), q.fy.clone(), p.fyy.clone(), q.fyy.clone()]
    };
    let lone = |u: &RBig, v: &RBig| [u.clone(), v.clone(), z.clone(), z.clone(), z.clone(), z.clone()];
    CornerBlock([
        row(c00, c01),
        row(c10, c11),
        lone(&c00.fx, &c01.fx),
        lone(&c10.fx, &c11.fx),
        lone(&c00.fxx, &c01.fxx),
        lone(&c10.fxx, &c11.fxx),
    ])
}

/// One cell's polynomial `Σ c_ij (x−a)^i (y−b)^j` with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxPatch {
    pub a: i64,
    pub b: i64,
    pub coeffs: [[RBig; 6]; 6],
}

/// `C = A⁻¹ V A⁻ᵀ`.
pub fn solve_coefficients(a: i64, b: i64, v: &CornerBlock) -> BoxPatch {
    let inv = basis_inverse();
    let vm: Matrix<RBig> = v.0.iter().map(|r| r.to_vec()).collect();
    let c = mat_mul(&mat_mul(inv, &vm), &transpose(inv));
    let mut coeffs: [[RBig; 6]; 6] = Default::default();
    for (i, row) in c.into_iter().enumerate() {
        for (j, val) in row.into_iter().enumerate() {
            coeffs[i][j] = val;
        }
    }
    BoxPatch { a, b, coeffs }
}

/// Value, gradient and Hessian at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T> {
    pub f: T,
    pub grad: [T; 2],
    pub hess: [[T; 2]; 2],
}

/// Patch coefficients converted to a working scalar.
#[derive(Clone, Debug)]
pub struct Poly<T> {
    pub coeffs: [[T; 6]; 6],
}

impl BoxPatch {
    pub fn to_poly<T: Field>(&self) -> Poly<T> {
        Poly { coeffs: std::array::from_fn(|i| std::array::from_fn(|j| T::from_ratio(&self.coeffs[i][j]))) }
    }

    /// Exact evaluation at a global point inside the cell.
    pub fn eval(&self, x: &RBig, y: &RBig) -> Result<Jet<RBig>> {
        let (ra, rb) = (RBig::from(self.a), RBig::from(self.b));
        let (u, v) = (x.clone() - ra, y.clone() - rb);
        let unit = |t: &RBig| *t >= RBig::ZERO && *t <= RBig::ONE;
        if !unit(&u) || !unit(&v) {
            return Err(Error::Domain(format!("point outside Box({}, {})", self.a, self.b)));
        }
        Ok(self.to_poly::<RBig>().eval_local(&u, &v))
    }
}

fn powers<T: Field>(t: &T) -> ([T; 6], [T; 6], [T; 6]) {
    let mut p: [T; 6] = std::array::from_fn(|_| T::zero());
    p[0] = T::one();
    for i in 1..6 {
        p[i] = p[i - 1].clone() * t.clone();
    }
    let d1 = std::array::from_fn(|i| if i == 0 { T::zero() } else { T::from_i64(i as i64) * p[i - 1].clone() });
    let d2 = std::array::from_fn(|i| {
        if i < 2 {
            T::zero()
        } else {
            T::from_i64((i * (i - 1)) as i64) * p[i - 2].clone()
        }
    });
    (p, d1, d2)
}

impl<T: Field> Poly<T> {
    /// Evaluates at local coordinates `(u, v) = (x − a, y − b)`.
    pub fn eval_local(&self, u: &T, v: &T) -> Jet<T> {
        let (px, dx, ddx) = powers(u);
        let (py, dy, ddy) = powers(v);
        let mut f = T::zero();
        let mut fx = T::zero();
        let mut fy = T::zero();
        let mut fxx = T::zero();
        let mut fxy = T::zero();
        let mut fyy = T::zero();
        for i in 0..6 {
            let row = &self.coeffs[i];
            let mut r0 = T::zero();
            let mut r1 = T::zero();
            let mut r2 = T::zero();
            for j in 0..6 {
                if row[j].is_zero() {
                    continue;
                }
                r0 = r0 + row[j].clone() * py[j].clone();
                r1 = r1 + row[j].clone() * dy[j].clone();
                r2 = r2 + row[j].clone() * ddy[j].clone();
            }
            f = f + px[i].clone() * r0.clone();
            fx = fx + dx[i].clone() * r0.clone();
            fxx = fxx + ddx[i].clone() * r0;
            fy = fy + px[i].clone() * r1.clone();
            fxy = fxy + dx[i].clone() * r1;
            fyy = fyy + px[i].clone() * r2;
        }
        Jet { f, grad: [fx, fy], hess: [[fxx, fxy.clone()], [fxy, fyy]] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    fn jet(f: i64, fx: i64, fy: i64, second: i64) -> CornerJet {
        CornerJet { f: f.into(), fx: fx.into(), fy: fy.into(), fxx: second.into(), fyy: second.into() }
    }

    #[test]
    fn inverse_is_exact() {
        assert_eq!(mat_mul(&basis_matrix(), basis_inverse()), identity::<RBig>(6));
    }

    #[test]
    fn constant_block() {
        let c = jet(7, 0, 0, 0);
        let v = assemble_corner_block([&c, &c, &c, &c]);
        let nonzero: Vec<(usize, usize)> =
            (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).filter(|&(i, j)| v.0[i][j] != RBig::ZERO).collect();
        assert_eq!(nonzero, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        let p = solve_coefficients(0, 0, &v);
        for i in 0..6 {
            for j in 0..6 {
                let expect = if (i, j) == (0, 0) { RBig::from(7) } else { RBig::ZERO };
                assert_eq!(p.coeffs[i][j], expect);
            }
        }
        let e = p.eval(&(RBig::ONE / RBig::from(3)), &(RBig::ONE / RBig::from(5))).unwrap();
        assert_eq!(e.f, RBig::from(7));
        assert!(e.grad.iter().chain(e.hess.iter().flatten()).all(|x| *x == RBig::ZERO));
    }

    #[test]
    fn zero_block_and_placement() {
        let z = jet(0, 0, 0, 0);
        let p = solve_coefficients(0, 0, &assemble_corner_block([&z, &z, &z, &z]));
        assert!(p.coeffs.iter().flatten().all(|c| *c == RBig::ZERO));
        let one = jet(1, 0, 0, 0);
        let v = assemble_corner_block([&z, &z, &z, &one]);
        let count = v.0.iter().flatten().filter(|c| **c != RBig::ZERO).count();
        assert_eq!((count, v.0[1][1].clone()), (1, RBig::ONE));
        let std = jet(0, 0, 0, 0);
        let std = CornerJet { fxx: RBig::from(-1) / RBig::from(2), ..std };
        let v = assemble_corner_block([&std, &z, &z, &z]);
        assert_eq!(v.0[4][0], RBig::from(-1) / RBig::from(2));
    }

    #[test]
    fn corners_are_reproduced() {
        let cs = [jet(3, 1, -2, -1), jet(-5, 0, 4, 2), jet(11, -3, 1, 0), jet(2, 2, 2, 5)];
        let p = solve_coefficients(4, 9, &assemble_corner_block([&cs[0], &cs[1], &cs[2], &cs[3]]));
        let spots = [(4, 9), (4, 10), (5, 9), (5, 10)];
        for (c, (x, y)) in cs.iter().zip(spots) {
            let e = p.eval(&RBig::from(x), &RBig::from(y)).unwrap();
            assert_eq!(e.f, c.f);
            assert_eq!(e.grad, [c.fx.clone(), c.fy.clone()]);
            assert_eq!((e.hess[0][0].clone(), e.hess[1][1].clone()), (c.fxx.clone(), c.fyy.clone()));
            assert_eq!(e.hess[0][1], RBig::ZERO);
        }
        assert!(p.eval(&RBig::from(6), &RBig::from(9)).is_err());
    }
}
