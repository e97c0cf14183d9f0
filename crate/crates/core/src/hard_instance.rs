//! The hard objective: lazily built biquintic patches over `[0,N]²`, optional rescaling to
//! `[0,1]²`, Lipschitz bounds and decoding of stationary points to ITER solutions.

use std::hash::{Hash, Hasher};
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use dashu::integer::IBig;
use dashu::rational::RBig;
use lru::LruCache;
use serde::Serialize;

use crate::biquintic::{assemble_corner_block, solve_coefficients, BoxPatch, CornerJet, Jet, Poly};
use crate::color_field::{ColorField, GridGeometry};
use crate::error::{Error, Result};
use crate::iter_problems::{IterInstance, Node};
use crate::numeric::{hp_precision, Field, Hp};
use crate::stationarity::{Eval, Objective, Polytope};

/// Rescaling of the domain and objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleMode {
    /// `f` on `[0,N]²`.
    Unit,
    /// `f(Nx, Ny)/N` on `[0,1]²`.
    Moderate,
    /// `f(Nx, Ny)/(c₀N⁴)` on `[0,1]²` with `c₀ = 2⁷⁶`.
    Aggressive,
}

impl std::str::FromStr for ScaleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(ScaleMode::Unit),
            "moderate" => Ok(ScaleMode::Moderate),
            "aggressive" => Ok(ScaleMode::Aggressive),
            _ => Err(Error::Validation(format!("unknown scale mode {s:?}"))),
        }
    }
}

/// Exponent of `c₀ = 2⁷⁶` in aggressive mode.
pub const AGGRESSIVE_EXP: u32 = 76;
pub const DEFAULT_CACHE_CELLS: usize = 4096;
const SHARDS: usize = 16;

/// A cell's exact patch with lazily converted working-precision copies.
pub struct CachedPatch {
    pub patch: BoxPatch,
    hp: OnceLock<(usize, Arc<Poly<Hp>>)>,
    float: OnceLock<Arc<Poly<f64>>>,
    exact: OnceLock<Arc<Poly<RBig>>>,
}

impl CachedPatch {
    fn new(patch: BoxPatch) -> Self {
        CachedPatch { patch, hp: OnceLock::new(), float: OnceLock::new(), exact: OnceLock::new() }
    }
}

/// Scalars the hard instance can be evaluated in.
pub trait PatchScalar: Field {
    fn poly(cell: &CachedPatch) -> Arc<Poly<Self>>;
}

impl PatchScalar for RBig {
    fn poly(cell: &CachedPatch) -> Arc<Poly<Self>> {
        cell.exact.get_or_init(|| Arc::new(cell.patch.to_poly())).clone()
    }
}

impl PatchScalar for f64 {
    fn poly(cell: &CachedPatch) -> Arc<Poly<Self>> {
        cell.float.get_or_init(|| Arc::new(cell.patch.to_poly())).clone()
    }
}

impl PatchScalar for Hp {
    fn poly(cell: &CachedPatch) -> Arc<Poly<Self>> {
        let bits = hp_precision();
        let (cached_bits, poly) = cell.hp.get_or_init(|| (bits, Arc::new(cell.patch.to_poly())));
        if *cached_bits == bits {
            poly.clone()
        } else {
            Arc::new(cell.patch.to_poly())
        }
    }
}

/// Value, gradient and Hessian together with the cell that produced them.
#[derive(Clone, Debug)]
pub struct EvalResult<T> {
    pub jet: Jet<T>,
    pub cell: (i64, i64),
}

/// Analytic smoothness constants.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzConstants {
    pub l: f64,
    pub l1: f64,
    pub l2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    pub mode: ScaleMode,
    pub side: i64,
    /// Bound `2¹⁰(2⁵⁵N + 2)` on the Frobenius norm of every coefficient matrix.
    pub coeff_norm_bound: f64,
    /// Bounds `2⁷N`, `2⁷³N`, `2⁷⁵N`, rescaled for the mode.
    pub stated: LipschitzConstants,
    /// Bounds `10‖C‖`, `90‖C‖`, `400‖C‖` from the coefficient bound, rescaled for the mode.
    pub from_coefficients: LipschitzConstants,
}

pub struct HardInstance {
    field: ColorField,
    mode: ScaleMode,
    shards: Vec<Mutex<LruCache<(i64, i64), Arc<CachedPatch>>>>,
}

impl HardInstance {
    pub fn build(inst: IterInstance, mode: ScaleMode) -> Self {
        Self::with_cache(inst, mode, DEFAULT_CACHE_CELLS)
    }

    pub fn with_cache(inst: IterInstance, mode: ScaleMode, cells: usize) -> Self {
        let per = NonZeroUsize::new(cells.div_ceil(SHARDS).max(1)).unwrap();
        HardInstance {
            field: ColorField::new(Arc::new(inst)),
            mode,
            shards: (0..SHARDS).map(|_| Mutex::new(LruCache::new(per))).collect(),
        }
    }

    pub fn field(&self) -> &ColorField {
        &self.field
    }

    pub fn geometry(&self) -> GridGeometry {
        self.field.geometry()
    }

    pub fn side(&self) -> i64 {
        self.geometry().side
    }

    pub fn mode(&self) -> ScaleMode {
        self.mode
    }

    /// Upper end of the domain in each coordinate (`N` or `1`).
    pub fn domain_max(&self) -> i64 {
        match self.mode {
            ScaleMode::Unit => self.side(),
            _ => 1,
        }
    }

    /// The domain as a box polytope.
    pub fn domain(&self) -> Polytope {
        Polytope::unit_box(2, RBig::ZERO, RBig::from(self.domain_max()))
    }

    fn build_patch(&self, a: i64, b: i64) -> BoxPatch {
        let jet = |x, y| CornerJet::from(&self.field.assignment(x, y));
        let (c00, c01, c10, c11) = (jet(a, b), jet(a, b + 1), jet(a + 1, b), jet(a + 1, b + 1));
        solve_coefficients(a, b, &assemble_corner_block([&c00, &c01, &c10, &c11]))
    }

    /// Patch for `Box(a, b)`, `0 ≤ a, b < N`, through the bounded cache.
    pub fn patch(&self, a: i64, b: i64) -> Result<Arc<CachedPatch>> {
        let side = self.side();
        if !(0..side).contains(&a) || !(0..side).contains(&b) {
            return Err(Error::Domain(format!("no cell Box({a}, {b}) in a grid of side {side}")));
        }
        let mut h = std::collections::hash_map::DefaultHasher::new();
        (a, b).hash(&mut h);
        let shard = &self.shards[(h.finish() as usize) % SHARDS];
        if let Some(p) = shard.lock().unwrap().get(&(a, b)) {
            return Ok(p.clone());
        }
        let built = Arc::new(CachedPatch::new(self.build_patch(a, b)));
        let mut guard = shard.lock().unwrap();
        Ok(guard.get_or_insert((a, b), || built).clone())
    }

    /// Evaluates at the unscaled point `(x, y) ∈ [0,N]²` inside the given cell.
    pub fn evaluate_in_cell<T: PatchScalar>(&self, cell: (i64, i64), x: &T, y: &T) -> Result<Jet<T>> {
        let patch = self.patch(cell.0, cell.1)?;
        let u = x.clone() - T::from_i64(cell.0);
        let v = y.clone() - T::from_i64(cell.1);
        let unit = |t: &T| *t >= T::zero() && *t <= T::one();
        if !unit(&u) || !unit(&v) {
            return Err(Error::Domain(format!("point outside Box({}, {})", cell.0, cell.1)));
        }
        Ok(T::poly(&patch).eval_local(&u, &v))
    }

    /// Unscaled evaluation on `[0,N]²`.
    pub fn evaluate_unit<T: PatchScalar>(&self, x: &T, y: &T) -> Result<EvalResult<T>> {
        let side = self.side();
        let cell_of = |t: &T| -> Result<i64> {
            if *t < T::zero() || *t > T::from_i64(side) {
                return Err(Error::Domain(format!("coordinate {:?} outside [0, {side}]", t.to_f64())));
            }
            let k = i64::try_from(t.floor_int()).expect("bounded coordinate");
            Ok(k.min(side - 1))
        };
        let cell = (cell_of(x)?, cell_of(y)?);
        Ok(EvalResult { jet: self.evaluate_in_cell(cell, x, y)?, cell })
    }

    /// Evaluation in the mode's own coordinates, with the chain rule applied.
    pub fn evaluate<T: PatchScalar>(&self, x: &T, y: &T) -> Result<EvalResult<T>> {
        let n = T::from_i64(self.side());
        match self.mode {
            ScaleMode::Unit => self.evaluate_unit(x, y),
            ScaleMode::Moderate | ScaleMode::Aggressive => {
                let one = T::one();
                if *x < T::zero() || *x > one || *y < T::zero() || *y > one {
                    return Err(Error::Domain(format!("({:?}, {:?}) outside [0,1]²", x.to_f64(), y.to_f64())));
                }
                let r = self.evaluate_unit(&(n.clone() * x.clone()), &(n.clone() * y.clone()))?;
                let (fs, gs, hs) = self.chain_factors::<T>();
                let Jet { f, grad, hess } = r.jet;
                let jet = Jet {
                    f: f / fs,
                    grad: grad.map(|g| g / gs.clone()),
                    hess: hess.map(|row| row.map(|h| h * hs.clone())),
                };
                Ok(EvalResult { jet, cell: r.cell })
            }
        }
    }

    /// `(value divisor, gradient divisor, Hessian multiplier)`.
    fn chain_factors<T: Field>(&self) -> (T, T, T) {
        let n = RBig::from(self.side());
        let (fs, gs, hs) = match self.mode {
            ScaleMode::Unit => (RBig::ONE, RBig::ONE, RBig::ONE),
            ScaleMode::Moderate => (n.clone(), RBig::ONE, n),
            ScaleMode::Aggressive => {
                let c0 = RBig::from(IBig::ONE << AGGRESSIVE_EXP as usize);
                let n2 = n.clone() * n.clone();
                (c0.clone() * n2.clone() * n2.clone(), c0.clone() * n2.clone() * n, RBig::ONE / (c0 * n2))
            }
        };
        (T::from_ratio(&fs), T::from_ratio(&gs), T::from_ratio(&hs))
    }

    /// The ITER solution whose solution cells contain the unscaled point, if any.
    pub fn decode_solution<T: Field>(&self, x: &T, y: &T) -> Option<Node> {
        let fx = i64::try_from(x.floor_int()).ok()?;
        let fy = i64::try_from(y.floor_int()).ok()?;
        if (fy - 2).rem_euclid(6) != 0 {
            return None;
        }
        let k = (fy - 2) / 6;
        ((6 * k - 3..=6 * k - 1).contains(&fx) && self.field.is_solution(k)).then_some(k as Node)
    }

    /// Like [`decode_solution`](Self::decode_solution) for a point in the mode's coordinates.
    pub fn decode_scaled<T: Field>(&self, x: &T, y: &T) -> Option<Node> {
        let s = T::from_i64(if self.mode == ScaleMode::Unit { 1 } else { self.side() });
        self.decode_solution(&(s.clone() * x.clone()), &(s * y.clone()))
    }

    pub fn lipschitz_report(&self) -> LipschitzReport {
        let n = self.side() as f64;
        let coeff = 1024.0 * (2f64.powi(55) * n + 2.0);
        let stated = (2f64.powi(7) * n, 2f64.powi(73) * n, 2f64.powi(75) * n);
        let derived = (10.0 * coeff, 90.0 * coeff, 400.0 * coeff);
        let scale = |(l, l1, l2): (f64, f64, f64)| match self.mode {
            ScaleMode::Unit => LipschitzConstants { l, l1, l2 },
            ScaleMode::Moderate => LipschitzConstants { l, l1: n * l1, l2: n * n * l2 },
            ScaleMode::Aggressive => {
                let c0 = 2f64.powi(AGGRESSIVE_EXP as i32);
                LipschitzConstants { l: l / (c0 * n.powi(3)), l1: l1 / (c0 * n * n), l2: l2 / (c0 * n) }
            }
        };
        LipschitzReport {
            mode: self.mode,
            side: self.side(),
            coeff_norm_bound: coeff,
            stated: scale(stated),
            from_coefficients: scale(derived),
        }
    }
}

impl<T: PatchScalar> Objective<T> for HardInstance {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[T]) -> Result<Eval<T>> {
        let r = self.evaluate(&x[0], &x[1])?;
        let Jet { f, grad, hess } = r.jet;
        Ok(Eval { f, grad: grad.to_vec(), hess: hess.iter().map(|r| r.to_vec()).collect() })
    }

    fn value(&self, x: &[T]) -> Result<T> {
        Ok(self.evaluate(&x[0], &x[1])?.jet.f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color_field::{regime_value, Color};

    fn simple(mode: ScaleMode) -> HardInstance {
        HardInstance::build(IterInstance::from_table(1, vec![2, 2]).unwrap(), mode)
    }

    fn q(num: i64, den: i64) -> RBig {
        RBig::from(num) / RBig::from(den)
    }

    #[test]
    fn corner_query() {
        let h = simple(ScaleMode::Unit);
        let r = h.evaluate_unit(&RBig::from(4), &RBig::from(2)).unwrap();
        assert_eq!(r.jet.f, RBig::from(regime_value(Color::Blue, 4, 2, 18)));
        assert_eq!(r.jet.grad, [RBig::ZERO, q(-1, 2)]);
        assert_eq!(r.jet.hess, [[q(-1, 2), RBig::ZERO], [RBig::ZERO, q(-1, 2)]]);
    }

    #[test]
    fn shared_edges_agree() {
        let h = simple(ScaleMode::Unit);
        for (x, y) in [(q(7, 1), q(37, 7)), (q(33, 4), q(3, 1)), (q(17, 1), q(17, 1))] {
            let fx = i64::try_from(x.floor()).unwrap();
            let fy = i64::try_from(y.floor()).unwrap();
            let base = h.evaluate_in_cell((fx.min(17), fy.min(17)), &x, &y).unwrap();
            if x.is_int() && fx > 0 {
                assert_eq!(h.evaluate_in_cell((fx - 1, fy.min(17)), &x, &y).unwrap(), base);
            }
            if y.is_int() && fy > 0 {
                assert_eq!(h.evaluate_in_cell((fx.min(17), fy - 1), &x, &y).unwrap(), base);
            }
        }
    }

    #[test]
    fn moderate_chain_rule_is_exact() {
        let unit = simple(ScaleMode::Unit);
        let moderate = simple(ScaleMode::Moderate);
        let (x, y) = (q(3, 7), q(5, 11));
        let m = moderate.evaluate(&x, &y).unwrap().jet;
        let n = RBig::from(18);
        let u = unit.evaluate(&(x * n.clone()), &(y * n.clone())).unwrap().jet;
        assert_eq!(m.f, u.f / n.clone());
        assert_eq!(m.grad, u.grad);
        assert_eq!(m.hess[0][1], u.hess[0][1].clone() * n);
        assert!(moderate.evaluate(&q(3, 2), &RBig::ZERO).is_err());
    }

    #[test]
    fn decoding() {
        let h = simple(ScaleMode::Unit);
        assert_eq!(h.decode_solution(&4.5, &8.5), Some(1));
        assert_eq!(h.decode_solution(&10.5, &2.5), None);
        assert_eq!(h.decode_solution(&3.0, &8.999), Some(1));
        assert_eq!(h.decode_solution(&6.0, &8.5), None);
    }

    #[test]
    fn reported_constants() {
        let r = simple(ScaleMode::Unit).lipschitz_report();
        assert_eq!(r.stated.l, 2304.0);
        let a = simple(ScaleMode::Aggressive).lipschitz_report();
        assert!(a.stated.l < 1.0 && a.stated.l1 < 1.0 && a.stated.l2 < 1.0);
        let m = simple(ScaleMode::Moderate).lipschitz_report();
        assert_eq!(m.stated.l, r.stated.l);
        assert_eq!(m.stated.l1, 18.0 * r.stated.l1);
    }

    #[test]
    fn cache_is_bounded_and_consistent() {
        let h = HardInstance::with_cache(IterInstance::from_table(1, vec![2, 2]).unwrap(), ScaleMode::Unit, 16);
        let first = h.patch(3, 4).unwrap().patch.clone();
        for a in 0..18 {
            for b in 0..18 {
                h.patch(a, b).unwrap();
            }
        }
        assert_eq!(h.patch(3, 4).unwrap().patch, first);
        assert!(h.patch(18, 0).is_err());
    }
}
