//! Polytopes, projections, proximal gradients, active sets and the (ε_G, ε_H)-SOSP verifier.

use dashu::rational::RBig;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    axpy, dot, gram_schmidt, mat_mul, mat_vec, norm, norm_sq, null_projector, row_space_basis, scale, solve, sub,
    symmetric_eigen, transpose, Matrix, Vector,
};
use crate::numeric::{Field, Real};

/// Value, gradient and Hessian of an objective at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Eval<T> {
    pub f: T,
    pub grad: Vector<T>,
    pub hess: Matrix<T>,
}

/// A twice-differentiable objective evaluable in scalar type `T`.
pub trait Objective<T>: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[T]) -> Result<Eval<T>>;
    fn value(&self, x: &[T]) -> Result<T> {
        Ok(self.eval(x)?.f)
    }
}

/// Relative tolerance for rank decisions: zero on exact scalars.
pub fn rank_tol<T: Field>() -> T {
    match T::activity_tol() {
        None => T::zero(),
        Some(t) => T::from_f64(t * t * 1e-2),
    }
}

/// `{x : Ax ≤ b}` with rational data.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    a: Vec<Vec<RBig>>,
    b: Vec<RBig>,
    dim: usize,
    bounds: Option<(Vec<RBig>, Vec<RBig>)>,
}

impl Polytope {
    pub fn new(a: Vec<Vec<RBig>>, b: Vec<RBig>) -> Result<Self> {
        let dim = a.first().map_or(0, Vec::len);
        if dim == 0 || a.len() != b.len() || a.iter().any(|r| r.len() != dim) {
            return Err(Error::Validation("constraint matrix and right-hand side disagree in shape".into()));
        }
        if a.iter().any(|r| r.iter().all(|v| *v == RBig::ZERO)) {
            return Err(Error::Validation("zero constraint row".into()));
        }
        let bounds = detect_box(&a, &b, dim);
        Ok(Polytope { a, b, dim, bounds })
    }

    /// `lo ≤ x_i ≤ hi` for every coordinate; rows ordered `x_1 ≥ lo, x_1 ≤ hi, x_2 ≥ lo, …`.
    pub fn unit_box(dim: usize, lo: RBig, hi: RBig) -> Self {
        Self::from_bounds(vec![lo; dim], vec![hi; dim]).expect("well-formed box")
    }

    pub fn from_bounds(lo: Vec<RBig>, hi: Vec<RBig>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::Validation("box bounds must satisfy lo <= hi".into()));
        }
        let d = lo.len();
        let mut a = Vec::with_capacity(2 * d);
        let mut b = Vec::with_capacity(2 * d);
        for i in 0..d {
            let unit = |s: i64| (0..d).map(|j| if i == j { RBig::from(s) } else { RBig::ZERO }).collect::<Vec<_>>();
            a.push(unit(-1));
            b.push(-lo[i].clone());
            a.push(unit(1));
            b.push(hi[i].clone());
        }
        Self::new(a, b)
    }

    /// Adds the half-space `rowᵀx ≤ rhs`.
    pub fn with_cut(&self, row: Vec<RBig>, rhs: RBig) -> Result<Self> {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        a.push(row);
        b.push(rhs);
        Self::new(a, b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_constraints(&self) -> usize {
        self.a.len()
    }

    pub fn rows(&self) -> &[Vec<RBig>] {
        &self.a
    }

    pub fn rhs(&self) -> &[RBig] {
        &self.b
    }

    /// Coordinate bounds when every constraint is a coordinate bound.
    pub fn box_bounds(&self) -> Option<&(Vec<RBig>, Vec<RBig>)> {
        self.bounds.as_ref()
    }

    pub fn rows_as<T: Field>(&self) -> Matrix<T> {
        self.a.iter().map(|r| r.iter().map(T::from_ratio).collect()).collect()
    }

    pub fn rhs_as<T: Field>(&self) -> Vector<T> {
        self.b.iter().map(T::from_ratio).collect()
    }

    /// Slack tolerance `τ(1 + |b_j|)` for constraint `j`, zero on exact scalars.
    fn slack_tol<T: Field>(&self, j: usize) -> T {
        match T::activity_tol() {
            None => T::zero(),
            Some(t) => T::from_f64(t) * (T::one() + T::from_ratio(&self.b[j]).abs()),
        }
    }

    /// `b_j − a_jᵀx` for every row.
    pub fn slacks<T: Field>(&self, x: &[T]) -> Vector<T> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, bj)| T::from_ratio(bj) - row.iter().zip(x).fold(T::zero(), |s, (r, xi)| s + T::from_ratio(r) * xi.clone()))
            .collect()
    }

    pub fn is_feasible<T: Field>(&self, x: &[T]) -> bool {
        x.len() == self.dim && self.slacks(x).iter().enumerate().all(|(j, s)| *s >= -self.slack_tol::<T>(j))
    }

    pub fn require_feasible<T: Field>(&self, x: &[T]) -> Result<()> {
        if self.is_feasible(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {:?} is infeasible", x.iter().map(Field::to_f64).collect::<Vec<_>>())))
        }
    }

    /// Indices with `b_j − a_jᵀx ≤ τ(1 + |b_j|)`.
    pub fn active_indices<T: Field>(&self, x: &[T]) -> Vec<usize> {
        self.slacks(x)
            .iter()
            .enumerate()
            .filter(|(j, s)| **s <= self.slack_tol::<T>(*j))
            .map(|(j, _)| j)
            .collect()
    }

    /// The active set at a feasible point together with the null-space projector.
    pub fn active_set<T: Field>(&self, x: &[T]) -> Result<ActiveSet<T>> {
        self.require_feasible(x)?;
        let indices = self.active_indices(x);
        let rows: Matrix<T> = indices.iter().map(|&j| self.a[j].iter().map(T::from_ratio).collect()).collect();
        let tol = rank_tol::<T>();
        let rank = row_space_basis(&rows, &tol).len();
        let projector = null_projector(&rows, self.dim, &tol);
        Ok(ActiveSet { indices, rows, projector, rank })
    }

    /// Euclidean projection `argmin_{w ∈ X} ‖w − v‖²`.
    pub fn project<T: Field>(&self, v: &[T]) -> Result<Vector<T>> {
        if let Some((lo, hi)) = &self.bounds {
            return Ok(v
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(x, (l, h))| x.clone().max_of(T::from_ratio(l)).min_of(T::from_ratio(h)))
                .collect());
        }
        self.project_qp(v)
    }

    /// Dual active-set projection (Goldfarb-Idnani with identity Hessian). Exact on rationals.
    pub fn project_qp<T: Field>(&self, v: &[T]) -> Result<Vector<T>> {
        let rows = self.rows_as::<T>();
        let rhs = self.rhs_as::<T>();
        let m = rows.len();
        let mut w = v.to_vec();
        let mut active: Vec<usize> = Vec::new();
        let mut mult: Vec<T> = Vec::new();
        let tol = rank_tol::<T>();
        for _ in 0..(50 * (m + self.dim + 1)) {
            let violation = |j: usize, w: &[T]| dot(&rows[j], w) - rhs[j].clone();
            let p = (0..m)
                .filter(|j| !active.contains(j))
                .map(|j| (j, violation(j, &w)))
                .filter(|(j, viol)| *viol > self.slack_tol::<T>(*j))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .map(|(j, _)| j);
            let Some(p) = p else { return Ok(w) };
            let mut up = T::zero();
            loop {
                let n_mat: Matrix<T> = active.iter().map(|&j| rows[j].clone()).collect();
                let r = if active.is_empty() {
                    Vec::new()
                } else {
                    let gram = mat_mul(&n_mat, &transpose(&n_mat));
                    solve(&gram, &mat_vec(&n_mat, &rows[p])).ok_or(Error::Infeasible)?
                };
                let mut z = rows[p].clone();
                for (rj, nj) in r.iter().zip(&n_mat) {
                    z = axpy(&z, &-rj.clone(), nj);
                }
                let zz = norm_sq(&z);
                let full = (zz > tol.clone() * norm_sq(&rows[p])).then(|| violation(p, &w) / zz.clone());
                let partial = r
                    .iter()
                    .enumerate()
                    .filter(|(_, rj)| **rj > T::zero())
                    .map(|(i, rj)| (i, mult[i].clone() / rj.clone()))
                    .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
                let (t, drop) = match (&full, &partial) {
                    (None, None) => return Err(Error::Infeasible),
                    (Some(t2), Some((i, t1))) if t1 < t2 => (t1.clone(), Some(*i)),
                    (Some(t2), _) => (t2.clone(), None),
                    (None, Some((i, t1))) => (t1.clone(), Some(*i)),
                };
                if full.is_some() {
                    w = axpy(&w, &-t.clone(), &z);
                }
                for (u, rj) in mult.iter_mut().zip(&r) {
                    *u = u.clone() - t.clone() * rj.clone();
                }
                up = up + t;
                match drop {
                    None => {
                        active.push(p);
                        mult.push(up);
                        break;
                    }
                    Some(i) => {
                        active.remove(i);
                        mult.remove(i);
                    }
                }
            }
        }
        Err(Error::Contract("projection did not converge".into()))
    }
}

fn detect_box(a: &[Vec<RBig>], b: &[RBig], dim: usize) -> Option<(Vec<RBig>, Vec<RBig>)> {
    let mut lo: Vec<Option<RBig>> = vec![None; dim];
    let mut hi: Vec<Option<RBig>> = vec![None; dim];
    for (row, bj) in a.iter().zip(b) {
        let mut nz = row.iter().enumerate().filter(|(_, v)| **v != RBig::ZERO);
        let (k, c) = nz.next()?;
        if nz.next().is_some() {
            return None;
        }
        let bound = bj.clone() / c.clone();
        if *c > RBig::ZERO {
            hi[k] = Some(hi[k].take().map_or(bound.clone(), |h| if bound < h { bound.clone() } else { h }));
        } else {
            lo[k] = Some(lo[k].take().map_or(bound.clone(), |l| if bound > l { bound.clone() } else { l }));
        }
    }
    let lo: Option<Vec<RBig>> = lo.into_iter().collect();
    let hi: Option<Vec<RBig>> = hi.into_iter().collect();
    let (lo, hi) = (lo?, hi?);
    lo.iter().zip(&hi).all(|(l, h)| l <= h).then_some((lo, hi))
}

/// Active constraints at a point with the projector onto `Null(A'(x))`.
#[derive(Clone, Debug)]
pub struct ActiveSet<T> {
    pub indices: Vec<usize>,
    pub rows: Matrix<T>,
    pub projector: Matrix<T>,
    /// Rank of the active rows; `d − rank = dim Null(A'(x))`.
    pub rank: usize,
}

/// `g_π(x) = L₁(π_X(x − ∇f/L₁) − x)`.
pub fn proximal_gradient<T: Field>(poly: &Polytope, x: &[T], grad: &[T], l1: &T) -> Result<Vector<T>> {
    poly.require_feasible(x)?;
    if *l1 <= T::zero() {
        return Err(Error::Domain("smoothness constant must be positive".into()));
    }
    let step: Vector<T> = x.iter().zip(grad).map(|(xi, gi)| xi.clone() - gi.clone() / l1.clone()).collect();
    let proj = poly.project(&step)?;
    Ok(scale(l1, &sub(&proj, x)))
}

/// Default eigen-accuracy `min(10⁻¹², ε_H/100)`.
pub fn default_eig_accuracy(eps_h: f64) -> f64 {
    (1e-12f64).min(eps_h / 100.0)
}

/// Minimum eigenpair of `PHP` on `range(P)`; `None` when `P = 0`.
pub fn projected_hessian_min_eig<T: Real>(h: &[Vec<T>], p: &[Vec<T>], accuracy: &T) -> Result<Option<(T, Vector<T>)>> {
    let d = h.len();
    let sym_tol = rank_tol::<T>().sqrt();
    for i in 0..d {
        for j in 0..i {
            let scale_ij = T::one().max_of(h[i][j].abs()).max_of(h[j][i].abs());
            if (h[i][j].clone() - h[j][i].clone()).abs() > sym_tol.clone() * scale_ij {
                return Err(Error::Domain("Hessian is not symmetric".into()));
            }
        }
    }
    let mut basis: Vec<Vector<T>> = Vec::new();
    gram_schmidt(&mut basis, transpose(p), &T::from_f64(1e-12).max_of(rank_tol::<T>()));
    if basis.is_empty() {
        return Ok(None);
    }
    let q: Vec<Vector<T>> = basis
        .into_iter()
        .map(|u| {
            let n = norm(&u);
            u.into_iter().map(|x| x / n.clone()).collect()
        })
        .collect();
    let hq: Vec<Vector<T>> = q.iter().map(|u| mat_vec(h, u)).collect();
    let reduced: Matrix<T> = q.iter().map(|u| hq.iter().map(|hv| dot(u, hv)).collect()).collect();
    let pairs = symmetric_eigen(&reduced, accuracy, 64);
    let (lambda, y) = pairs.into_iter().next().expect("non-empty");
    let mut v = vec![T::zero(); d];
    for (yk, qk) in y.iter().zip(&q) {
        v = axpy(&v, yk, qk);
    }
    let n = norm(&v);
    Ok(Some((lambda, v.into_iter().map(|x| x / n.clone()).collect())))
}

/// `λ_min` of `[[f_xx, f_xy], [f_xy, f_yy]]` in closed form.
pub fn min_eig_2x2<T: Real>(fxx: &T, fyy: &T, fxy: &T) -> T {
    let tr = fxx.clone() + fyy.clone();
    let diff = fxx.clone() - fyy.clone();
    let disc = diff.clone() * diff + T::from_i64(4) * fxy.clone() * fxy.clone();
    (tr - disc.sqrt()) / T::from_i64(2)
}

/// Decides `λ_min < −eps` for a symmetric 2×2 matrix without square roots (exact on rationals).
pub fn min_eig_2x2_below<T: Field>(fxx: &T, fyy: &T, fxy: &T, eps: &T) -> bool {
    let shifted = fxx.clone() + fyy.clone() + T::from_i64(2) * eps.clone();
    if shifted < T::zero() {
        return true;
    }
    let diff = fxx.clone() - fyy.clone();
    let disc = diff.clone() * diff + T::from_i64(4) * fxy.clone() * fxy.clone();
    disc > shifted.clone() * shifted
}

/// Outcome of the (ε_G, ε_H)-SOSP test at a point.
#[derive(Clone, Debug)]
pub struct SospReport<T> {
    pub point: Vector<T>,
    pub f: T,
    pub grad: Vector<T>,
    pub prox_grad: Vector<T>,
    pub prox_norm: T,
    /// `None` when the null space of the active constraints is trivial.
    pub lambda_min: Option<T>,
    pub eig_vector: Option<Vector<T>>,
    pub active: Vec<usize>,
    pub null_dim: usize,
    pub first_order: bool,
    pub second_order: bool,
}

impl<T: Field> SospReport<T> {
    pub fn pass(&self) -> bool {
        self.first_order && self.second_order
    }

    pub fn summary(&self) -> SospSummary {
        SospSummary {
            point: self.point.iter().map(Field::to_f64).collect(),
            f: self.f.to_f64(),
            grad: self.grad.iter().map(Field::to_f64).collect(),
            prox_grad: self.prox_grad.iter().map(Field::to_f64).collect(),
            prox_norm: self.prox_norm.to_f64(),
            lambda_min: self.lambda_min.as_ref().map(Field::to_f64),
            active: self.active.clone(),
            null_dim: self.null_dim,
            first_order: self.first_order,
            second_order: self.second_order,
            pass: self.pass(),
        }
    }
}

/// JSON view of a [`SospReport`].
#[derive(Clone, Debug, Serialize, serde::Deserialize, PartialEq)]
pub struct SospSummary {
    pub point: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub prox_grad: Vec<f64>,
    pub prox_norm: f64,
    pub lambda_min: Option<f64>,
    pub active: Vec<usize>,
    pub null_dim: usize,
    pub first_order: bool,
    pub second_order: bool,
    pub pass: bool,
}

/// Tolerances of the SOSP test.
#[derive(Clone, Debug)]
pub struct SospTolerances<T> {
    pub eps_g: T,
    pub eps_h: T,
    pub l1: T,
}

/// `‖g_π(x)‖ ≤ ε_G` and `λ_min(P∇²f P) ≥ −ε_H` on `range(P)`.
pub fn verify_sosp<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    poly: &Polytope,
    x: &[T],
    tol: &SospTolerances<T>,
) -> Result<SospReport<T>> {
    let active = poly.active_set(x)?;
    let e = obj.eval(x)?;
    Ok(report_from_eval(poly, x, e, active, tol)?)
}

pub(crate) fn report_from_eval<T: Real>(
    poly: &Polytope,
    x: &[T],
    e: Eval<T>,
    active: ActiveSet<T>,
    tol: &SospTolerances<T>,
) -> Result<SospReport<T>> {
    let prox_grad = proximal_gradient(poly, x, &e.grad, &tol.l1)?;
    let prox_norm = norm(&prox_grad);
    let accuracy = T::from_f64(default_eig_accuracy(tol.eps_h.to_f64()));
    let eig = projected_hessian_min_eig(&e.hess, &active.projector, &accuracy)?;
    let first_order = prox_norm <= tol.eps_g;
    let second_order = eig.as_ref().is_none_or(|(l, _)| *l >= -tol.eps_h.clone());
    let (lambda_min, eig_vector) = match eig {
        Some((l, v)) => (Some(l), Some(v)),
        None => (None, None),
    };
    Ok(SospReport {
        point: x.to_vec(),
        f: e.f,
        grad: e.grad,
        prox_grad,
        prox_norm,
        lambda_min,
        eig_vector,
        null_dim: poly.dim() - active.rank,
        active: active.indices,
        first_order,
        second_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> RBig {
        RBig::from(n) / RBig::from(d)
    }

    struct Quadratic(Vec<f64>);

    impl Objective<f64> for Quadratic {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn eval(&self, x: &[f64]) -> Result<Eval<f64>> {
            let d = self.0.len();
            let f = x.iter().zip(&self.0).map(|(xi, c)| 0.5 * c * xi * xi).sum();
            let grad = x.iter().zip(&self.0).map(|(xi, c)| c * xi).collect();
            let hess = (0..d).map(|i| (0..d).map(|j| if i == j { self.0[i] } else { 0.0 }).collect()).collect();
            Ok(Eval { f, grad, hess })
        }
    }

    fn unit_square() -> Polytope {
        Polytope::unit_box(2, RBig::ZERO, RBig::ONE)
    }

    #[test]
    fn projections() {
        let sq = unit_square();
        assert_eq!(sq.project(&[0.3, 0.7]).unwrap(), vec![0.3, 0.7]);
        assert_eq!(sq.project(&[-1.0, 0.5]).unwrap(), vec![0.0, 0.5]);
        let cut = sq.with_cut(vec![RBig::ONE, RBig::ONE], RBig::ONE).unwrap();
        assert!(cut.box_bounds().is_none());
        assert_eq!(cut.project(&[RBig::ONE, RBig::ONE]).unwrap(), vec![q(1, 2), q(1, 2)]);
        assert_eq!(cut.project(&[q(3, 1), q(-2, 1)]).unwrap(), vec![RBig::ONE, RBig::ZERO]);
        let via_qp = sq.project_qp(&[q(-1, 1), q(1, 2)]).unwrap();
        assert_eq!(via_qp, vec![RBig::ZERO, q(1, 2)]);
    }

    #[test]
    fn prox_gradient_examples() {
        let sq = unit_square();
        assert_eq!(proximal_gradient(&sq, &[0.0, 0.5], &[1.0, 0.0], &1.0).unwrap(), vec![0.0, 0.0]);
        assert_eq!(proximal_gradient(&sq, &[0.0, 0.5], &[-1.0, 0.0], &1.0).unwrap(), vec![1.0, 0.0]);
        let g = proximal_gradient(&sq, &[0.5, 0.5], &[0.1, -0.2], &10.0).unwrap();
        assert!((g[0] + 0.1).abs() < 1e-12 && (g[1] - 0.2).abs() < 1e-12);
        assert!(proximal_gradient(&sq, &[1.5, 0.5], &[0.0, 0.0], &1.0).is_err());
    }

    #[test]
    fn active_sets() {
        let sq = unit_square();
        let s = sq.active_set(&[q(1, 2), q(1, 2)]).unwrap();
        assert!(s.indices.is_empty());
        let s = sq.active_set(&[RBig::ZERO, q(1, 2)]).unwrap();
        assert_eq!(s.indices, vec![0]);
        assert_eq!(s.projector, vec![vec![RBig::ZERO, RBig::ZERO], vec![RBig::ZERO, RBig::ONE]]);
        let s = sq.active_set(&[RBig::ZERO, RBig::ZERO]).unwrap();
        assert_eq!(s.indices.len(), 2);
        assert!(s.projector.iter().flatten().all(|v| *v == RBig::ZERO));
    }

    #[test]
    fn projected_eigen() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (l, _) = projected_hessian_min_eig(&[vec![-1.0, 0.0], vec![0.0, -1.0]], &id, &1e-12).unwrap().unwrap();
        assert!((l + 1.0).abs() < 1e-12);
        let (l, _) = projected_hessian_min_eig(&[vec![0.0, 1.0], vec![1.0, 0.0]], &id, &1e-12).unwrap().unwrap();
        assert!((l + 1.0).abs() < 1e-12);
        let p = vec![vec![0.0, 0.0], vec![0.0, 1.0]];
        let (l, v) = projected_hessian_min_eig(&[vec![-5.0, 0.0], vec![0.0, 2.0]], &p, &1e-12).unwrap().unwrap();
        assert!((l - 2.0).abs() < 1e-12 && v[0] == 0.0);
        let zero = vec![vec![0.0; 2]; 2];
        assert!(projected_hessian_min_eig(&id, &zero, &1e-12).unwrap().is_none());
        assert!(projected_hessian_min_eig(&[vec![0.0, 1.0], vec![0.0, 0.0]], &id, &1e-12).is_err());
    }

    #[test]
    fn closed_form_eigen() {
        assert_eq!(min_eig_2x2(&-1.0, &-1.0, &0.0), -1.0);
        assert_eq!(min_eig_2x2(&2.0, &3.0, &0.0), 2.0);
        assert_eq!(min_eig_2x2(&0.0, &0.0, &1.0), -1.0);
        assert!(min_eig_2x2_below(&q(-1, 2), &q(-1, 2), &RBig::ZERO, &RBig::ZERO));
        assert!(!min_eig_2x2_below(&RBig::ONE, &RBig::ONE, &RBig::ZERO, &RBig::ZERO));
        assert!(min_eig_2x2_below(&RBig::ONE, &RBig::ONE, &RBig::from(2), &q(1, 2)));
        assert!(!min_eig_2x2_below(&RBig::ONE, &RBig::ONE, &RBig::ONE, &RBig::ZERO));
    }

    #[test]
    fn sosp_examples() {
        let bx = Polytope::unit_box(2, RBig::from(-1), RBig::ONE);
        let tol = SospTolerances { eps_g: 0.0, eps_h: 0.0, l1: 1.0 };
        assert!(verify_sosp(&Quadratic(vec![1.0, 1.0]), &bx, &[0.0, 0.0], &tol).unwrap().pass());
        let tol = SospTolerances { eps_g: 1e-3, eps_h: 0.5, l1: 1.0 };
        let r = verify_sosp(&Quadratic(vec![-1.0, 0.0]), &bx, &[0.0, 0.0], &tol).unwrap();
        assert!(r.first_order && !r.second_order);
        let r = verify_sosp(&Quadratic(vec![-1.0, 0.0]), &bx, &[1.0, 0.0], &tol).unwrap();
        assert!(r.pass());
        assert_eq!(r.prox_norm, 0.0);
        assert_eq!(r.null_dim, 1);
    }
}
