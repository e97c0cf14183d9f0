//! SNAP local search: projected-gradient steps while `‖g_π‖ > ε_G`, negative-curvature line
//! searches while `λ_min(H_P) < −ε_H`, and a terminal fixed point otherwise.
//!
//! Every non-terminal step decreases `f`: by at least `ε_G²/(18L₁)` (gradient step),
//! `0.06ε_H³/L₂²` (curvature step), or it is a max-step that activates a new linearly independent
//! constraint. Starting from `x₀`, at most `d + 1` consecutive steps can be max-steps, so
//! `snap_run` reaches an SOSP after `O(d·(f(x₀) − inf f)·max(18L₁/ε_G², L₂²/(0.06ε_H³)))`
//! iterations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, mat_vec, norm, norm_sq, scale, sub, Vector};
use crate::numeric::{Field, Real};
use crate::stationarity::{report_from_eval, Eval, Objective, Polytope, SospReport, SospTolerances};

/// Constant of the curvature-step decrease `0.06ε_H³/L₂²`.
pub const CURVATURE_DECREASE: f64 = 0.06;
/// Denominator of the gradient-step decrease `‖g_π‖²/(18L₁)`.
pub const GRADIENT_DECREASE_DENOM: i64 = 18;
/// Golden-section refinements applied around the best doubling probe.
const REFINE_STEPS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepKind {
    Pgd,
    NegativeCurvature,
    Terminal,
}

#[derive(Clone, Debug)]
pub struct SnapStep<T> {
    pub kind: StepKind,
    pub from: Vector<T>,
    pub to: Vector<T>,
    pub decrease: T,
    /// The line search stopped at the largest feasible step.
    pub max_step: bool,
    /// Constraints active at `to` but not at `from`.
    pub activated: Vec<usize>,
}

/// A step whose decrease falls short of the smoothness-implied bound: evidence that the stated
/// Lipschitz constants do not hold along the step.
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub kind: StepKind,
    pub iteration: usize,
    pub point: Vec<f64>,
    pub required: f64,
    pub achieved: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SnapStatus {
    Terminal,
    /// `max_iter` exhausted; the report describes the best point reached.
    Timeout,
}

/// Step-size policy of the projected-gradient case.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Smoothness {
    /// Always step `1/L₁`.
    #[default]
    Global,
    /// Backtracking estimate `L̂ ≤ L₁` of the local gradient Lipschitz constant, seeded by the
    /// secant curvature of the previous gradient step and doubled until the quadratic upper
    /// model holds.
    Adaptive,
}

#[derive(Clone, Debug)]
pub struct SnapParams<T> {
    pub eps_g: T,
    pub eps_h: T,
    pub l1: T,
    pub l2: T,
    pub max_iter: usize,
    pub smoothness: Smoothness,
    /// Keep every [`SnapStep`]; counters are kept either way.
    pub record_steps: bool,
}

impl<T: Field> SnapParams<T> {
    pub fn new(eps_g: T, eps_h: T, l1: T, l2: T, max_iter: usize) -> Self {
        SnapParams { eps_g, eps_h, l1, l2, max_iter, smoothness: Smoothness::Global, record_steps: true }
    }

    pub fn tolerances(&self) -> SospTolerances<T> {
        SospTolerances { eps_g: self.eps_g.clone(), eps_h: self.eps_h.clone(), l1: self.l1.clone() }
    }

    /// `min(ε_G²/(18L₁), 0.06ε_H³/L₂²)`.
    pub fn guaranteed_decrease(&self) -> T {
        gradient_decrease(&self.eps_g, &self.l1).min_of(curvature_decrease(&self.eps_h, &self.l2))
    }
}

#[derive(Clone, Debug)]
pub struct SnapTrace<T> {
    pub steps: Vec<SnapStep<T>>,
    pub iterations: usize,
    pub status: SnapStatus,
    pub report: SospReport<T>,
    pub pgd_steps: usize,
    pub curvature_steps: usize,
    pub max_steps: usize,
    pub violations: Vec<Violation>,
    pub f_start: T,
}

impl<T: Field> SnapTrace<T> {
    pub fn terminal(&self) -> bool {
        self.status == SnapStatus::Terminal
    }

    pub fn point(&self) -> &[T] {
        &self.report.point
    }
}

/// Result of one projected-gradient step.
#[derive(Clone, Debug)]
pub struct PgdOutcome<T> {
    pub point: Vector<T>,
    pub f: T,
    pub decrease: T,
    /// `‖g_π(x)‖²/(18L₁)`, the decrease guaranteed by `L₁`-smoothness.
    pub required: T,
    pub satisfied: bool,
}

/// Result of a negative-curvature line search.
#[derive(Clone, Debug)]
pub struct LineSearchOutcome<T> {
    pub point: Vector<T>,
    pub f: T,
    pub step: T,
    pub decrease: T,
    pub max_step: bool,
    pub activated: Vec<usize>,
}

/// `ε_G²/(18L₁)` (also `‖g_π‖²/(18L₁)` when given the norm).
pub fn gradient_decrease<T: Field>(g: &T, l1: &T) -> T {
    g.clone() * g.clone() / (T::from_i64(GRADIENT_DECREASE_DENOM) * l1.clone())
}

/// `0.06ε_H³/L₂²`.
pub fn curvature_decrease<T: Field>(eps_h: &T, l2: &T) -> T {
    T::from_f64(CURVATURE_DECREASE) * eps_h.clone() * eps_h.clone() * eps_h.clone() / (l2.clone() * l2.clone())
}

fn require_positive<T: Field>(v: &T, what: &str) -> Result<()> {
    if *v > T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive")))
    }
}

/// `π_X(x − ∇f(x)/L₁)` with the decrease check against `‖g_π(x)‖²/(18L₁)`.
pub fn pgd_step<T: Real, O: Objective<T> + ?Sized>(obj: &O, poly: &Polytope, x: &[T], l1: &T) -> Result<PgdOutcome<T>> {
    poly.require_feasible(x)?;
    let e = obj.eval(x)?;
    pgd_from_eval(obj, poly, x, &e, l1)
}

fn prox_point<T: Field>(poly: &Polytope, x: &[T], grad: &[T], l: &T) -> Result<Vector<T>> {
    let inv = T::one() / l.clone();
    poly.project(&axpy(x, &(-inv), grad))
}

fn pgd_from_eval<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    poly: &Polytope,
    x: &[T],
    e: &Eval<T>,
    l1: &T,
) -> Result<PgdOutcome<T>> {
    require_positive(l1, "L₁")?;
    let point = prox_point(poly, x, &e.grad, l1)?;
    let g_pi = norm(&scale(l1, &sub(&point, x)));
    let f = obj.value(&point)?;
    let decrease = e.f.clone() - f.clone();
    let required = gradient_decrease(&g_pi, l1);
    let satisfied = decrease >= required;
    Ok(PgdOutcome { point, f, decrease, required, satisfied })
}

/// Barzilai–Borwein estimate `sᵀy/sᵀs` of the curvature along the previous step.
fn secant_curvature<T: Field>(x: &[T], g: &[T], xp: &[T], gp: &[T]) -> Option<T> {
    let s = sub(x, xp);
    let ss = norm_sq(&s);
    let sy = dot(&s, &sub(g, gp));
    (ss > T::zero() && sy > T::zero()).then(|| sy / ss)
}

/// Backtracking step with estimate `l_hat`, falling back to the global step when the adaptive
/// one does not beat the `L₁` guarantee.
fn adaptive_pgd<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    poly: &Polytope,
    x: &[T],
    e: &Eval<T>,
    l1: &T,
    l_hat: &mut T,
) -> Result<PgdOutcome<T>> {
    let two = T::from_i64(2);
    let mut l = l_hat.clone().min_of(l1.clone());
    loop {
        let point = prox_point(poly, x, &e.grad, &l)?;
        let step = sub(&point, x);
        let f = obj.value(&point)?;
        let model = e.f.clone() + dot(&e.grad, &step) + l.clone() / two.clone() * norm_sq(&step);
        if f <= model || l >= *l1 {
            let g_pi = norm(&scale(l1, &sub(&prox_point(poly, x, &e.grad, l1)?, x)));
            let required = gradient_decrease(&g_pi, l1);
            let decrease = e.f.clone() - f.clone();
            *l_hat = l.clone() / two;
            if decrease >= required || l >= *l1 {
                let satisfied = decrease >= required;
                return Ok(PgdOutcome { point, f, decrease, required, satisfied });
            }
            return pgd_from_eval(obj, poly, x, e, l1);
        }
        l = (l * two.clone()).min_of(l1.clone());
    }
}

/// Negative-curvature direction: the unit minimum eigenvector of `P∇²f P` on `range(P)`,
/// signed so that `(P∇f)ᵀd ≤ 0`; exact ties pick the lexicographically larger sign.
pub fn curvature_direction<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    poly: &Polytope,
    x: &[T],
    eps_h: &T,
) -> Result<Vector<T>> {
    let active = poly.active_set(x)?;
    let e = obj.eval(x)?;
    let tol = SospTolerances { eps_g: T::zero(), eps_h: eps_h.clone(), l1: T::one() };
    let report = report_from_eval(poly, x, e, active.clone(), &tol)?;
    match (&report.lambda_min, report.eig_vector) {
        (Some(l), Some(v)) if *l < -eps_h.clone() => Ok(orient(mat_vec(&active.projector, &v), &active.projector, &report.grad)),
        _ => Err(Error::Contract(format!(
            "no curvature below −ε_H at {:?}",
            x.iter().map(Field::to_f64).collect::<Vec<_>>()
        ))),
    }
}

fn orient<T: Real>(v: Vector<T>, projector: &[Vec<T>], grad: &[T]) -> Vector<T> {
    let n = norm(&v);
    let d: Vector<T> = v.into_iter().map(|c| c / n.clone()).collect();
    let q = mat_vec(projector, grad);
    let s = dot(&q, &d);
    let flip = if s.is_zero() { lex_less(&d) } else { s > T::zero() };
    if flip {
        d.into_iter().map(|c| -c).collect()
    } else {
        d
    }
}

/// `d <_lex −d`, i.e. the first non-zero component of `d` is negative.
fn lex_less<T: Field>(d: &[T]) -> bool {
    d.iter().find(|c| !c.is_zero()).is_some_and(|c| *c < T::zero())
}

/// Largest `t ≥ 0` keeping `x + t·d` feasible, with the constraints attaining it. `None` when
/// the ray never leaves the polytope.
pub fn max_feasible_step<T: Field>(poly: &Polytope, x: &[T], d: &[T]) -> Result<Option<(T, Vec<usize>)>> {
    poly.require_feasible(x)?;
    let active = poly.active_indices(x);
    let slacks = poly.slacks(x);
    let rows = poly.rows_as::<T>();
    let mut best: Option<(T, Vec<usize>)> = None;
    for (j, row) in rows.iter().enumerate() {
        let rate = dot(row, d);
        if active.contains(&j) || rate <= T::zero() {
            continue;
        }
        let t = slacks[j].clone().max_of(T::zero()) / rate;
        match &mut best {
            Some((tb, idx)) if t == *tb => idx.push(j),
            Some((tb, _)) if t > *tb => {}
            _ => best = Some((t, vec![j])),
        }
    }
    Ok(best)
}

/// `x + t·d`, with box coordinates of the blocking constraints placed exactly on their bound.
fn ray_point<T: Field>(poly: &Polytope, x: &[T], d: &[T], t: &T, blocking: &[usize]) -> Vector<T> {
    let mut y = axpy(x, t, d);
    if let Some((lo, hi)) = poly.box_bounds() {
        for &j in blocking {
            let i = j / 2;
            y[i] = T::from_ratio(if j % 2 == 0 { &lo[i] } else { &hi[i] });
        }
    }
    y
}

/// Iteration cap `⌈log₂(L_MAX·d/ε)⌉ + 10`.
pub fn line_search_cap(l_max: f64, d: usize, eps: f64) -> usize {
    let ratio = (l_max.max(1.0) * d as f64 / eps).max(1.0);
    ratio.log2().ceil() as usize + 10
}

/// Probes `t = ε_H/L₂, 2ε_H/L₂, …` (clamped at the ratio-test bound) while `f` keeps falling,
/// then refines between the neighbours of the best probe by golden-section search. Returns the
/// best point when it decreases `f` by `0.06ε_H³/L₂²`, otherwise the max-step point when `f`
/// does not increase there.
pub fn line_search<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    poly: &Polytope,
    x: &[T],
    d: &[T],
    eps_h: &T,
    l2: &T,
) -> Result<LineSearchOutcome<T>> {
    require_positive(eps_h, "ε_H")?;
    require_positive(l2, "L₂")?;
    let f0 = obj.value(x)?;
    line_search_from(obj, poly, x, &f0, d, eps_h, l2)
}

fn line_search_from<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    poly: &Polytope,
    x: &[T],
    f0: &T,
    d: &[T],
    eps_h: &T,
    l2: &T,
) -> Result<LineSearchOutcome<T>> {
    let limit = max_feasible_step(poly, x, d)?;
    let (t_max, blocking) = match &limit {
        Some((t, b)) => (Some(t.clone()), b.clone()),
        None => (None, Vec::new()),
    };
    let eps = eps_h.to_f64();
    let cap = line_search_cap(l2.to_f64(), d.len(), eps);
    let required = curvature_decrease(eps_h, l2);
    let before = poly.active_indices(x);
    let at = |t: &T| -> Vector<T> {
        let hits_wall = t_max.as_ref().is_some_and(|m| t == m);
        ray_point(poly, x, d, t, if hits_wall { &blocking } else { &[] })
    };
    let eval_at = |t: &T| -> Result<T> { obj.value(&at(t)) };

    let mut probes: Vec<(T, T)> = Vec::new();
    let mut t = eps_h.clone() / l2.clone();
    for _ in 0..cap {
        if let Some(m) = &t_max {
            t = t.min_of(m.clone());
        }
        let f = eval_at(&t)?;
        let rising = probes.last().is_some_and(|(_, fp)| f > *fp);
        probes.push((t.clone(), f));
        let at_wall = t_max.as_ref().is_some_and(|m| t == *m);
        if rising || at_wall {
            break;
        }
        t = t * T::from_i64(2);
    }
    let best_k = (0..probes.len())
        .min_by(|&i, &j| probes[i].1.partial_cmp(&probes[j].1).expect("comparable values"))
        .expect("at least one probe");
    let (mut best_t, mut best_f) = probes[best_k].clone();
    let is_wall = |t: &T| t_max.as_ref().is_some_and(|m| t == m);

    if !is_wall(&best_t) && best_k + 1 < probes.len() {
        let lo = if best_k == 0 { T::zero() } else { probes[best_k - 1].0.clone() };
        let hi = probes[best_k + 1].0.clone();
        let (t, f) = golden_section(&eval_at, lo, hi, REFINE_STEPS)?;
        if f < best_f {
            best_t = t;
            best_f = f;
        }
    }

    let finish = |t: T, f: T| -> LineSearchOutcome<T> {
        let point = at(&t);
        let max_step = is_wall(&t);
        let activated = poly.active_indices(&point).into_iter().filter(|j| !before.contains(j)).collect();
        LineSearchOutcome { point, decrease: f0.clone() - f.clone(), f, step: t, max_step, activated }
    };
    if f0.clone() - best_f.clone() >= required {
        return Ok(finish(best_t, best_f));
    }
    if let Some(m) = &t_max {
        let f_wall = eval_at(m)?;
        if f_wall <= *f0 {
            return Ok(finish(m.clone(), f_wall));
        }
    }
    Err(Error::Contract(format!(
        "line search violation at {:?}: best decrease {:e} below 0.06ε_H³/L₂² = {:e} and no non-increasing max-step",
        x.iter().map(Field::to_f64).collect::<Vec<_>>(),
        (f0.clone() - best_f).to_f64(),
        required.to_f64()
    )))
}

fn golden_section<T: Real>(f: &impl Fn(&T) -> Result<T>, mut lo: T, mut hi: T, steps: usize) -> Result<(T, T)> {
    let r = (T::from_i64(5).sqrt() - T::one()) / T::from_i64(2);
    let mut a = hi.clone() - r.clone() * (hi.clone() - lo.clone());
    let mut b = lo.clone() + r.clone() * (hi.clone() - lo.clone());
    let (mut fa, mut fb) = (f(&a)?, f(&b)?);
    for _ in 0..steps {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi.clone() - r.clone() * (hi.clone() - lo.clone());
            fa = f(&a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo.clone() + r.clone() * (hi.clone() - lo.clone());
            fb = f(&b)?;
        }
    }
    Ok(if fa <= fb { (a, fa) } else { (b, fb) })
}

/// One application of the update `h` at a point.
#[derive(Clone, Debug)]
pub struct Update<T> {
    /// SOSP test at the starting point.
    pub report: SospReport<T>,
    /// A `Terminal` step (`from = to`) when the report passes.
    pub step: SnapStep<T>,
    /// `(required, achieved)` when a gradient step missed `‖g_π‖²/(18L₁)`.
    pub shortfall: Option<(T, T)>,
}

/// Memory of the adaptive step-size policy between updates.
#[derive(Clone, Debug)]
struct StepMemory<T> {
    l_hat: T,
    previous: Option<(Vector<T>, Vector<T>)>,
}

/// `h(x)`: gradient step if `‖g_π(x)‖ > ε_G`, else curvature step if `λ_min(H_P) < −ε_H`,
/// else `x` itself. Always uses the global `1/L₁` step.
pub fn snap_update<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    poly: &Polytope,
    x: &[T],
    params: &SnapParams<T>,
) -> Result<Update<T>> {
    let global = SnapParams { smoothness: Smoothness::Global, ..params.clone() };
    let mut memory = StepMemory { l_hat: params.l1.clone(), previous: None };
    update_with(obj, poly, x, &global, &mut memory)
}

fn update_with<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    poly: &Polytope,
    x: &[T],
    params: &SnapParams<T>,
    memory: &mut StepMemory<T>,
) -> Result<Update<T>> {
    let active = poly.active_set(x)?;
    let e = obj.eval(x)?;
    let report = report_from_eval(poly, x, e.clone(), active.clone(), &params.tolerances())?;
    if report.pass() {
        let step = SnapStep {
            kind: StepKind::Terminal,
            from: x.to_vec(),
            to: x.to_vec(),
            decrease: T::zero(),
            max_step: false,
            activated: Vec::new(),
        };
        return Ok(Update { report, step, shortfall: None });
    }
    if !report.first_order {
        let out = match params.smoothness {
            Smoothness::Global => pgd_from_eval(obj, poly, x, &e, &params.l1)?,
            Smoothness::Adaptive => {
                if let Some(l) = memory.previous.as_ref().and_then(|(xp, gp)| secant_curvature(x, &e.grad, xp, gp)) {
                    memory.l_hat = l;
                }
                adaptive_pgd(obj, poly, x, &e, &params.l1, &mut memory.l_hat)?
            }
        };
        memory.previous = Some((x.to_vec(), e.grad.clone()));
        let shortfall = (!out.satisfied).then(|| (out.required.clone(), out.decrease.clone()));
        let activated = poly.active_indices(&out.point).into_iter().filter(|j| !report.active.contains(j)).collect();
        let step = SnapStep { kind: StepKind::Pgd, from: x.to_vec(), to: out.point, decrease: out.decrease, max_step: false, activated };
        return Ok(Update { report, step, shortfall });
    }
    memory.previous = None;
    let v = report.eig_vector.clone().expect("second-order failure has an eigenvector");
    let d = orient(mat_vec(&active.projector, &v), &active.projector, &e.grad);
    let out = line_search_from(obj, poly, x, &e.f, &d, &params.eps_h, &params.l2)?;
    let step = SnapStep {
        kind: StepKind::NegativeCurvature,
        from: x.to_vec(),
        to: out.point,
        decrease: out.decrease,
        max_step: out.max_step,
        activated: out.activated,
    };
    Ok(Update { report, step, shortfall: None })
}

/// Iterates the three-case update from `x0` until the current point is an `(ε_G, ε_H)`-SOSP or
/// `max_iter` updates have been made.
pub fn snap_run<T: Real, O: Objective<T> + ?Sized>(
    obj: &O,
    poly: &Polytope,
    x0: &[T],
    params: &SnapParams<T>,
) -> Result<SnapTrace<T>> {
    require_positive(&params.eps_g, "ε_G")?;
    require_positive(&params.eps_h, "ε_H")?;
    require_positive(&params.l1, "L₁")?;
    require_positive(&params.l2, "L₂")?;
    poly.require_feasible(x0)?;
    let mut x = x0.to_vec();
    let mut steps = Vec::new();
    let mut violations = Vec::new();
    let (mut pgd_steps, mut curvature_steps, mut max_steps) = (0, 0, 0);
    let mut memory = StepMemory { l_hat: T::one().min_of(params.l1.clone()), previous: None };
    let mut f_start = None;
    let mut iteration = 0;
    loop {
        let Update { report, step, shortfall } = update_with(obj, poly, &x, params, &mut memory)?;
        f_start.get_or_insert_with(|| report.f.clone());
        let terminal = step.kind == StepKind::Terminal;
        if terminal || iteration >= params.max_iter {
            if terminal && params.record_steps {
                steps.push(step);
            }
            return Ok(SnapTrace {
                steps,
                iterations: iteration,
                status: if terminal { SnapStatus::Terminal } else { SnapStatus::Timeout },
                report,
                pgd_steps,
                curvature_steps,
                max_steps,
                violations,
                f_start: f_start.expect("set on first iteration"),
            });
        }
        if let Some((required, achieved)) = shortfall {
            violations.push(Violation {
                kind: StepKind::Pgd,
                iteration,
                point: x.iter().map(Field::to_f64).collect(),
                required: required.to_f64(),
                achieved: achieved.to_f64(),
            });
        }
        match step.kind {
            StepKind::Pgd => pgd_steps += 1,
            _ => {
                curvature_steps += 1;
                max_steps += usize::from(step.max_step);
            }
        }
        if step.decrease < T::zero() {
            return Err(Error::Contract(format!(
                "step {iteration} increased f by {:e}",
                (-step.decrease.clone()).to_f64()
            )));
        }
        x = step.to.clone();
        if params.record_steps {
            steps.push(step);
        }
        iteration += 1;
    }
}
