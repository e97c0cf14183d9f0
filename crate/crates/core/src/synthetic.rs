//! Small smooth objectives with known stationary structure, used to exercise the solver and
//! the reduction away from the hard instance.

use crate::error::{Error, Result};
use crate::localopt_reduction::Smoothness;
use crate::numeric::Field;
use crate::stationarity::{Eval, Objective};

fn check_dim<T>(x: &[T], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::Domain(format!("expected a point of dimension {d}, got {}", x.len())));
    }
    Ok(())
}

/// `½xᵀQx + cᵀx` with symmetric `Q`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    pub q: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

impl Quadratic {
    pub fn new(q: Vec<Vec<f64>>, c: Vec<f64>) -> Result<Self> {
        let d = c.len();
        if q.len() != d || q.iter().any(|r| r.len() != d) {
            return Err(Error::Validation("Q must be a square matrix matching c".into()));
        }
        if (0..d).any(|i| (0..i).any(|j| q[i][j] != q[j][i])) {
            return Err(Error::Validation("Q must be symmetric".into()));
        }
        Ok(Quadratic { q, c })
    }

    /// `½(x² − y²)`: a saddle at the origin.
    pub fn saddle() -> Self {
        Quadratic { q: vec![vec![1.0, 0.0], vec![0.0, -1.0]], c: vec![0.0, 0.0] }
    }

    /// Constants on `[−r, r]^d`, with the Frobenius norm bounding `‖Q‖₂`. The Hessian is
    /// constant, so any positive `L₂` is valid and `‖Q‖_F` is reported.
    pub fn smoothness_on_box(&self, r: f64) -> Smoothness {
        let d = self.c.len() as f64;
        let fro = self.q.iter().flatten().map(|v| v * v).sum::<f64>().sqrt().max(f64::EPSILON);
        let c = self.c.iter().map(|v| v * v).sum::<f64>().sqrt();
        Smoothness { l: fro * r * d.sqrt() + c, l1: fro, l2: fro }
    }
}

impl<T: Field> Objective<T> for Quadratic {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn eval(&self, x: &[T]) -> Result<Eval<T>> {
        let d = self.c.len();
        check_dim(x, d)?;
        let q: Vec<Vec<T>> = self.q.iter().map(|r| r.iter().map(|&v| T::from_f64(v)).collect()).collect();
        let grad: Vec<T> = (0..d)
            .map(|i| (0..d).fold(T::from_f64(self.c[i]), |s, j| s + q[i][j].clone() * x[j].clone()))
            .collect();
        let half = T::one() / T::from_i64(2);
        let f = (0..d).fold(T::zero(), |s, i| {
            s + x[i].clone() * (half.clone() * (grad[i].clone() - T::from_f64(self.c[i])) + T::from_f64(self.c[i]))
        });
        Ok(Eval { f, grad, hess: q })
    }
}

/// Separable `Σ (¼aᵢxᵢ⁴ + ½bᵢxᵢ²)` with `aᵢ ≥ 0`. A coordinate with `bᵢ < 0` has a local
/// maximum at 0 and minima at `±√(−bᵢ/aᵢ)`, so the origin is a strict saddle.
#[derive(Clone, Debug)]
pub struct Quartic {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Quartic {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.iter().any(|&v| v < 0.0) {
            return Err(Error::Validation("quartic needs matching lengths and a ≥ 0".into()));
        }
        Ok(Quartic { a, b })
    }

    /// `¼x⁴ − ½x² + ½y²`: a saddle at the origin and minima at `(±1, 0)`.
    pub fn double_well() -> Self {
        Quartic { a: vec![1.0, 0.0], b: vec![-1.0, 1.0] }
    }

    /// Constants on `[−r, r]^d` from the coordinate-wise derivative bounds.
    pub fn smoothness_on_box(&self, r: f64) -> Smoothness {
        let grad = self.a.iter().zip(&self.b).map(|(a, b)| (a * r.powi(3) + b.abs() * r).powi(2)).sum::<f64>().sqrt();
        let hess = self.a.iter().zip(&self.b).map(|(a, b)| 3.0 * a * r * r + b.abs()).fold(0.0, f64::max);
        let third = self.a.iter().map(|a| 6.0 * a * r).fold(0.0, f64::max);
        let l1 = hess.max(f64::EPSILON);
        Smoothness { l: grad, l1, l2: if third > 0.0 { third } else { l1 } }
    }
}

impl<T: Field> Objective<T> for Quartic {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn eval(&self, x: &[T]) -> Result<Eval<T>> {
        let d = self.a.len();
        check_dim(x, d)?;
        let (quarter, half) = (T::one() / T::from_i64(4), T::one() / T::from_i64(2));
        let mut f = T::zero();
        let mut grad = Vec::with_capacity(d);
        let mut hess = vec![vec![T::zero(); d]; d];
        for i in 0..d {
            let (a, b) = (T::from_f64(self.a[i]), T::from_f64(self.b[i]));
            let x2 = x[i].clone() * x[i].clone();
            f = f + quarter.clone() * a.clone() * x2.clone() * x2.clone() + half.clone() * b.clone() * x2.clone();
            grad.push(a.clone() * x2.clone() * x[i].clone() + b.clone() * x[i].clone());
            hess[i][i] = T::from_i64(3) * a * x2 + b;
        }
        Ok(Eval { f, grad, hess })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dashu::rational::RBig;

    #[test]
    fn quadratic_values() {
        let q = Quadratic::new(vec![vec![2.0, 1.0], vec![1.0, -1.0]], vec![1.0, 0.0]).unwrap();
        let e: Eval<f64> = q.eval(&[1.0, 2.0]).unwrap();
        // ½(2 + 4 − 4) + 1 = 2
        assert_eq!(e.f, 2.0);
        assert_eq!(e.grad, vec![5.0, -1.0]);
        assert!(Quadratic::new(vec![vec![1.0, 2.0], vec![0.0, 1.0]], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn quartic_is_exact_on_rationals() {
        let q = Quartic::double_well();
        let x = [RBig::ONE, RBig::ZERO];
        let e: Eval<RBig> = q.eval(&x).unwrap();
        assert_eq!(e.grad, vec![RBig::ZERO, RBig::ZERO]);
        assert_eq!(e.f, RBig::from(-1) / RBig::from(4));
        assert_eq!(e.hess[0][0], RBig::from(2));
        let s: Eval<RBig> = q.eval(&[RBig::ZERO, RBig::ZERO]).unwrap();
        assert_eq!(s.hess[0][0], RBig::from(-1));
    }

    #[test]
    fn smoothness_bounds_hold_on_samples() {
        let q = Quartic::double_well();
        let s = q.smoothness_on_box(1.0);
        for i in 0..=20 {
            let t = -1.0 + 0.1 * i as f64;
            let e: Eval<f64> = q.eval(&[t, t]).unwrap();
            assert!(e.grad.iter().map(|g| g * g).sum::<f64>().sqrt() <= s.l + 1e-12);
            assert!(e.hess[0][0].abs().max(e.hess[1][1].abs()) <= s.l1 + 1e-12);
        }
    }
}
