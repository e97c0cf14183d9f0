//! LOCALOPT instance of a constrained SOSP problem: grid points, the potential
//! `p(x) = f(x) + w·dim Null(A'(x))`, the neighbour `g = Rounding ∘ h`, and a pointwise check
//! that every non-SOSP grid point strictly improves the potential.

use dashu::integer::IBig;
use dashu::rational::RBig;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::numeric::{Field, Real};
use crate::polytope_lattice::{face_frame, lattice_step, map_to_grid_cached, BoxGrid, FrameCache};
use crate::snap_solver::{curvature_decrease, gradient_decrease, snap_update, SnapParams, StepKind};
use crate::stationarity::{Objective, Polytope};

/// Constant `100` of the potential weight `ε⁴/(100·d·L_MAX²)`.
pub const POTENTIAL_CONSTANT: i64 = 100;
/// Constant `1000` of the grid resolution.
pub const GRID_CONSTANT: i64 = 1000;

/// Smoothness constants `(L, L₁, L₂)` of the objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Smoothness {
    pub l: f64,
    pub l1: f64,
    pub l2: f64,
}

impl Smoothness {
    pub fn l_max(&self) -> f64 {
        self.l.max(self.l1).max(self.l2)
    }
}

/// How `h(x)` is brought back onto the grid.
#[derive(Debug)]
pub enum Grid {
    /// Coordinate-wise floor to multiples of `γ`.
    Box(BoxGrid),
    /// MapToGrid on the per-face lattices.
    Polytope { eps_r: RBig, delta: RBig, frames: FrameCache },
}

pub struct ReductionInstance<O> {
    pub objective: O,
    pub poly: Polytope,
    pub eps: RBig,
    pub eps_g: f64,
    pub eps_h: f64,
    pub smoothness: Smoothness,
    pub l_max: RBig,
    /// `ε⁴/(100·d·L_MAX²)`.
    pub weight: RBig,
    pub grid: Grid,
}

/// Outcome of [`ReductionInstance::improvement_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// `x` passes the SOSP test and `g(x) = x`.
    Solution,
    /// `f` dropped enough to pay for rounding and the potential term.
    ImprovedByDecrease,
    /// A max-step activated a constraint, shrinking the null space.
    ImprovedByActiveSet,
    /// Neither contract held: the stated smoothness constants are violated near `x`.
    Violation,
}

#[derive(Clone, Debug, Serialize)]
pub struct ImprovementReport {
    pub verdict: Verdict,
    pub step: Option<StepKind>,
    pub max_step: bool,
    pub p_before: f64,
    pub p_after: f64,
    pub f_decrease: f64,
    /// `min(0.06ε_H³/L₂², ε_G²/(18L₁))`.
    pub guaranteed_decrease: f64,
    pub null_dim_before: usize,
    pub null_dim_after: usize,
    pub rounding_loss: f64,
    pub rounding_bound: f64,
    /// Constraints active at `h(x)` but not at `g(x)`.
    pub lost_constraints: Vec<usize>,
    pub detail: Option<String>,
}

fn ratio(v: f64) -> Result<RBig> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Domain(format!("parameter {v} must be positive and finite")));
    }
    Ok(v.to_ratio())
}

fn pow(r: &RBig, k: u32) -> RBig {
    (0..k).fold(RBig::ONE, |p, _| p * r.clone())
}

impl<O> ReductionInstance<O> {
    /// Box polytopes get the `γ` grid, all others the face lattices with
    /// `ε_r = ε⁵/(1000·d²·L_MAX³)`.
    pub fn new(objective: O, poly: Polytope, eps_g: f64, eps_h: f64, smoothness: Smoothness) -> Result<Self> {
        let eps = ratio(eps_g.min(eps_h))?;
        let l_max = ratio(smoothness.l_max())?;
        let d = RBig::from(poly.dim());
        let weight = pow(&eps, 4) / (RBig::from(POTENTIAL_CONSTANT) * d.clone() * l_max.clone() * l_max.clone());
        let grid = match poly.box_bounds() {
            Some((lo, hi)) => {
                let intervals: Vec<(RBig, RBig)> = lo.iter().cloned().zip(hi.iter().cloned()).collect();
                Grid::Box(BoxGrid::new(&intervals, &eps, &l_max)?)
            }
            None => {
                let eps_r = pow(&eps, 5) / (RBig::from(GRID_CONSTANT) * d.clone() * d * pow(&l_max, 3));
                let delta = lattice_step(&eps_r, poly.dim());
                Grid::Polytope { eps_r, delta, frames: FrameCache::default() }
            }
        };
        Ok(ReductionInstance { objective, poly, eps, eps_g, eps_h, smoothness, l_max, weight, grid })
    }

    /// Largest admissible change of `f` under rounding: `L·γ√d` or `L·ε_r`.
    pub fn rounding_bound(&self) -> f64 {
        match &self.grid {
            Grid::Box(g) => self.smoothness.l * Field::to_f64(&g.step) * (self.poly.dim() as f64).sqrt(),
            Grid::Polytope { eps_r, .. } => self.smoothness.l * Field::to_f64(eps_r),
        }
    }

    fn null_dim(&self, x: &[RBig]) -> usize {
        let active = self.poly.active_indices(x);
        let frame = face_frame(&self.poly, &active).expect("active rows of a feasible point are consistent");
        frame.dim()
    }

    /// Whether the exact point lies on the reduction grid.
    pub fn on_grid(&self, x: &[RBig]) -> Result<bool> {
        if x.len() != self.poly.dim() || !self.poly.is_feasible(x) {
            return Ok(false);
        }
        match &self.grid {
            Grid::Box(g) => Ok(g.indices_of(x).is_some()),
            Grid::Polytope { delta, frames, .. } => Ok(map_to_grid_cached(x, &self.poly, delta, frames)?.0 == x),
        }
    }

    /// Rounds a feasible point onto the grid.
    pub fn round<T: Field>(&self, y: &[T]) -> Result<Vector<RBig>> {
        match &self.grid {
            Grid::Box(g) => Ok(g.point(&g.floor_indices(y))),
            Grid::Polytope { delta, frames, .. } => {
                let seed = self.poly.active_indices(y);
                let frame = frames.get(&self.poly, &seed)?;
                let exact: Vec<RBig> = y.iter().map(Field::to_ratio).collect();
                let on_face = frame.point(&frame.coefficients(&exact));
                if !self.poly.is_feasible(&on_face) {
                    return Err(Error::Contract("rounding input leaves the polytope after snapping to its face".into()));
                }
                Ok(map_to_grid_cached(&on_face, &self.poly, delta, frames)?.0)
            }
        }
    }

    /// Uniformly random grid point (box) or the rounding of a random feasible point (polytope).
    pub fn random_grid_point<R: Rng>(&self, rng: &mut R) -> Result<Vector<RBig>> {
        match &self.grid {
            Grid::Box(g) => {
                let indices: Vec<IBig> = g
                    .counts
                    .iter()
                    .map(|c| IBig::from(rng.gen_range(0..=u64::try_from(c.clone()).unwrap_or(u64::MAX))))
                    .collect();
                Ok(g.point(&indices))
            }
            Grid::Polytope { delta, frames, .. } => {
                let x = self.random_feasible(rng)?;
                Ok(map_to_grid_cached(&x, &self.poly, delta, frames)?.0)
            }
        }
    }

    /// Rejection sample in the bounding box of the coordinate bounds.
    fn random_feasible<R: Rng>(&self, rng: &mut R) -> Result<Vector<RBig>> {
        let d = self.poly.dim();
        let bound = |i: usize, sign: i64| -> Option<RBig> {
            self.poly.rows().iter().zip(self.poly.rhs()).find_map(|(row, b)| {
                let unit = row.iter().enumerate().all(|(j, v)| if j == i { *v == RBig::from(sign) } else { *v == RBig::ZERO });
                unit.then(|| b.clone() * RBig::from(sign))
            })
        };
        let ranges: Vec<(f64, f64)> = (0..d)
            .map(|i| match (bound(i, -1), bound(i, 1)) {
                (Some(lo), Some(hi)) => Ok((Field::to_f64(&lo), Field::to_f64(&hi))),
                _ => Err(Error::Domain("random sampling needs coordinate bounds".into())),
            })
            .collect::<Result<_>>()?;
        for _ in 0..10_000 {
            let x: Vec<RBig> = ranges.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi).to_ratio()).collect();
            if self.poly.is_feasible(&x) {
                return Ok(x);
            }
        }
        Err(Error::Domain("no feasible sample found".into()))
    }

    fn snap_params<T: Field>(&self) -> SnapParams<T> {
        SnapParams::new(
            T::from_f64(self.eps_g),
            T::from_f64(self.eps_h),
            T::from_f64(self.smoothness.l1),
            T::from_f64(self.smoothness.l2),
            1,
        )
    }

    /// `p(x) = f(x) + w·dim Null(A'(x))` at a grid point.
    pub fn potential<T: Real>(&self, x: &[RBig]) -> Result<T>
    where
        O: Objective<T>,
    {
        if !self.on_grid(x)? {
            return Err(Error::Domain("point is not on the reduction grid".into()));
        }
        self.potential_unchecked(x)
    }

    fn potential_unchecked<T: Real>(&self, x: &[RBig]) -> Result<T>
    where
        O: Objective<T>,
    {
        let xt: Vec<T> = x.iter().map(T::from_ratio).collect();
        let f = self.objective.value(&xt)?;
        Ok(f + T::from_ratio(&self.weight) * T::from_i64(self.null_dim(x) as i64))
    }

    /// `g(x) = Rounding(h(x))`; `x` itself when it passes the SOSP test.
    pub fn neighbor<T: Real>(&self, x: &[RBig]) -> Result<Vector<RBig>>
    where
        O: Objective<T>,
    {
        let xt: Vec<T> = x.iter().map(T::from_ratio).collect();
        let update = snap_update(&self.objective, &self.poly, &xt, &self.snap_params())?;
        if update.step.kind == StepKind::Terminal {
            return Ok(x.to_vec());
        }
        self.round(&update.step.to)
    }

    /// Checks `p(g(x)) < p(x)` at a non-SOSP grid point and names the case that delivers it.
    pub fn improvement_check<T: Real>(&self, x: &[RBig]) -> Result<ImprovementReport>
    where
        O: Objective<T>,
    {
        let p_before: T = self.potential(x)?;
        let xt: Vec<T> = x.iter().map(T::from_ratio).collect();
        let params = self.snap_params::<T>();
        let guaranteed = gradient_decrease(&params.eps_g, &params.l1)
            .min_of(curvature_decrease(&params.eps_h, &params.l2))
            .to_f64();
        let null_before = self.null_dim(x);
        let mut report = ImprovementReport {
            verdict: Verdict::Solution,
            step: None,
            max_step: false,
            p_before: p_before.to_f64(),
            p_after: p_before.to_f64(),
            f_decrease: 0.0,
            guaranteed_decrease: guaranteed,
            null_dim_before: null_before,
            null_dim_after: null_before,
            rounding_loss: 0.0,
            rounding_bound: self.rounding_bound(),
            lost_constraints: Vec::new(),
            detail: None,
        };
        let update = match snap_update(&self.objective, &self.poly, &xt, &params) {
            Ok(u) => u,
            Err(Error::Contract(msg)) => {
                report.verdict = Verdict::Violation;
                report.detail = Some(msg);
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        if update.step.kind == StepKind::Terminal {
            return Ok(report);
        }
        let h = update.step.to.clone();
        let y = self.round(&h)?;
        let p_after: T = self.potential_unchecked(&y)?;
        let yt: Vec<T> = y.iter().map(T::from_ratio).collect();
        let f_h = self.objective.value(&h)?;
        let f_y = self.objective.value(&yt)?;
        let h_active = self.poly.active_indices(&h);
        let y_active = self.poly.active_indices(&y);
        report.step = Some(update.step.kind);
        report.max_step = update.step.max_step;
        report.p_after = p_after.to_f64();
        report.f_decrease = (update.report.f.clone() - f_y.clone()).to_f64();
        report.null_dim_after = self.null_dim(&y);
        report.rounding_loss = (f_h - f_y.clone()).abs().to_f64();
        report.lost_constraints = h_active.into_iter().filter(|j| !y_active.contains(j)).collect();
        report.verdict = if p_after >= p_before {
            report.detail = Some(format!("p did not decrease: {:e} → {:e}", report.p_before, report.p_after));
            Verdict::Violation
        } else if update.step.max_step && report.null_dim_after < null_before {
            Verdict::ImprovedByActiveSet
        } else {
            Verdict::ImprovedByDecrease
        };
        if update.shortfall.is_some() && report.verdict != Verdict::Violation {
            report.detail = Some("gradient step below ‖g_π‖²/(18L₁) yet p decreased".into());
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationarity::Eval;
    use rand::SeedableRng;

    /// `½Σ cᵢxᵢ²`.
    struct Diagonal(Vec<f64>);

    impl Objective<f64> for Diagonal {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn eval(&self, x: &[f64]) -> Result<Eval<f64>> {
            let d = x.len();
            Ok(Eval {
                f: (0..d).map(|i| 0.5 * self.0[i] * x[i] * x[i]).sum(),
                grad: (0..d).map(|i| self.0[i] * x[i]).collect(),
                hess: (0..d).map(|i| (0..d).map(|j| if i == j { self.0[i] } else { 0.0 }).collect()).collect(),
            })
        }
    }

    fn instance(c: Vec<f64>) -> ReductionInstance<Diagonal> {
        let poly = Polytope::unit_box(2, RBig::from(-1), RBig::ONE);
        ReductionInstance::new(Diagonal(c), poly, 1e-2, 1e-2, Smoothness { l: 2.0, l1: 1.0, l2: 1.0 }).unwrap()
    }

    fn grid_point(r: &ReductionInstance<Diagonal>, x: &[f64]) -> Vec<RBig> {
        r.round(x).unwrap()
    }

    #[test]
    fn parameters() {
        let r = instance(vec![1.0, 1.0]);
        // w = ε⁴/(100·d·L_MAX²) = 10⁻⁸/800
        let w = Field::to_f64(&r.weight);
        assert!((w - 1e-8 / 800.0).abs() < 1e-24);
        let Grid::Box(g) = &r.grid else { panic!("box grid expected") };
        let expected = box_grid_step_for_test();
        assert_eq!(g.step, expected);
    }

    fn box_grid_step_for_test() -> RBig {
        crate::polytope_lattice::box_grid_step(
            &[(RBig::from(-1), RBig::ONE), (RBig::from(-1), RBig::ONE)],
            &1e-2f64.to_ratio(),
            &RBig::from(2),
        )
        .unwrap()
    }

    #[test]
    fn potential_counts_free_directions() {
        let r = instance(vec![1.0, 1.0]);
        let w = Field::to_f64(&r.weight);
        let interior = grid_point(&r, &[0.5, 0.5]);
        let f = 0.25 * (Field::to_f64(&interior[0]).powi(2) + Field::to_f64(&interior[1]).powi(2)) * 2.0;
        let p: f64 = r.potential(&interior).unwrap();
        assert!((p - (f + 2.0 * w)).abs() < 1e-15);
        let vertex = vec![RBig::ONE, RBig::ONE];
        let p: f64 = r.potential(&vertex).unwrap();
        assert_eq!(p, 1.0);
        let facet = grid_point(&r, &[1.0, 0.0]);
        assert_eq!(facet[0], RBig::ONE);
        let f = 0.5 + 0.5 * Field::to_f64(&facet[1]).powi(2);
        let p: f64 = r.potential(&facet).unwrap();
        assert!((p - (f + w)).abs() < 1e-15);
        let off = vec![RBig::ONE / RBig::from(3), RBig::ZERO];
        assert!(matches!(r.potential::<f64>(&off), Err(Error::Domain(_))));
    }

    #[test]
    fn neighbors() {
        let r = instance(vec![1.0, 1.0]);
        let origin = grid_point(&r, &[0.0, 0.0]);
        assert_eq!(r.neighbor::<f64>(&origin).unwrap(), origin);
        let x = grid_point(&r, &[0.5, -0.25]);
        let y = r.neighbor::<f64>(&x).unwrap();
        let xt: Vec<f64> = x.iter().map(Field::to_f64).collect();
        let expected = r.round(&[xt[0] - xt[0], xt[1] - xt[1]]).unwrap();
        assert_eq!(y, expected);
        let Grid::Box(g) = &r.grid else { unreachable!() };
        let near = grid_point(&r, &[0.5, 0.0]);
        let y = r.neighbor::<f64>(&near).unwrap();
        assert!(y[0].clone().abs() < near[0]);
        assert!(y[0].clone().abs() <= g.step.clone() * RBig::from(2));
    }

    #[test]
    fn verdicts() {
        let r = instance(vec![1.0, 1.0]);
        let sol = r.improvement_check::<f64>(&grid_point(&r, &[0.0, 0.0])).unwrap();
        assert_eq!(sol.verdict, Verdict::Solution);
        let steep = r.improvement_check::<f64>(&grid_point(&r, &[0.8, 0.6])).unwrap();
        assert_eq!(steep.verdict, Verdict::ImprovedByDecrease);
        assert!(steep.f_decrease > steep.guaranteed_decrease);
        assert!(steep.rounding_loss <= steep.rounding_bound);

        let concave = instance(vec![-1.0, 0.0]);
        let x = grid_point(&concave, &[0.0, 0.3]);
        let rep = concave.improvement_check::<f64>(&x).unwrap();
        assert_eq!(rep.verdict, Verdict::ImprovedByActiveSet);
        assert!(rep.max_step);
        assert!(rep.null_dim_after < rep.null_dim_before);
        assert!(rep.lost_constraints.is_empty());
    }

    #[test]
    fn polytope_mode_rounds_with_map_to_grid() {
        let poly = Polytope::unit_box(2, RBig::from(-1), RBig::ONE).with_cut(vec![RBig::ONE, RBig::ONE], RBig::ONE).unwrap();
        let r = ReductionInstance::new(Diagonal(vec![-1.0, 1.0]), poly, 0.1, 0.1, Smoothness { l: 2.0, l1: 1.0, l2: 1.0 }).unwrap();
        assert!(matches!(r.grid, Grid::Polytope { .. }));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = r.random_grid_point(&mut rng).unwrap();
            assert!(r.on_grid(&x).unwrap());
            let rep = r.improvement_check::<f64>(&x).unwrap();
            assert_ne!(rep.verdict, Verdict::Violation, "{rep:?}");
            assert!(rep.lost_constraints.is_empty());
        }
    }
}
