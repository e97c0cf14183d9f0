//! Sampling certificates over single cells, the boundary proximal-gradient check and the
//! whole-grid census.

use std::collections::BTreeMap;

use dashu::integer::IBig;
use rayon::prelude::*;
use serde::Serialize;

use super::groups::{classify_cell, Group, GroupLabel};
use crate::biquintic::{BoxPatch, Jet, Poly};
use crate::error::{Error, Result};
use crate::hard_instance::{HardInstance, PatchScalar, ScaleMode};
use crate::numeric::{Field, Hp, Real};
use crate::stationarity::{min_eig_2x2, min_eig_2x2_below};

/// Threshold used by the no-SOSP criteria.
pub const EPS0: f64 = 1e-10;
pub const DEFAULT_RESOLUTION: usize = 51;
pub const REFINED_RESOLUTION: usize = 201;
/// Refinement triggers when the worst margin falls below this multiple of `ε₀`.
pub const REFINE_FACTOR: f64 = 10.0;

/// How many samples met each criterion. `lambda_only` counts samples where the curvature
/// criterion was the only one to hold.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CriterionCounts {
    pub gx: usize,
    pub gy: usize,
    pub lambda: usize,
    pub lambda_only: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Criterion {
    Gx,
    Gy,
    Lambda,
}

/// A point of the cell, in local coordinates, with its first- and second-order data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplePoint {
    pub u: f64,
    pub v: f64,
    pub gx: f64,
    pub gy: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub cell: (i64, i64),
    pub resolution: usize,
    pub refined: bool,
    pub samples: usize,
    pub counts: CriterionCounts,
    /// Smallest over samples of the largest margin among `|Gx| − ε₀`, `|Gy| − ε₀`, `−λ − ε₀`.
    pub worst_margin: f64,
    /// Samples at which no criterion holds.
    pub failures: Vec<SamplePoint>,
    /// An approximate SOSP found by local descent inside the cell.
    pub witness: Option<SamplePoint>,
}

impl CriterionReport {
    pub fn certified(&self) -> bool {
        self.failures.is_empty() && self.witness.is_none()
    }

    pub fn dominant(&self) -> Criterion {
        let c = &self.counts;
        if c.gx >= c.gy && c.gx >= c.lambda {
            Criterion::Gx
        } else if c.gy >= c.lambda {
            Criterion::Gy
        } else {
            Criterion::Lambda
        }
    }
}

fn sample_point(u: &Hp, v: &Hp, jet: &Jet<Hp>) -> SamplePoint {
    let [[fxx, fxy], [_, fyy]] = &jet.hess;
    SamplePoint {
        u: u.to_f64(),
        v: v.to_f64(),
        gx: jet.grad[0].to_f64(),
        gy: jet.grad[1].to_f64(),
        lambda: min_eig_2x2(fxx, fyy, fxy).to_f64(),
    }
}

struct Tally {
    eps: Hp,
    samples: usize,
    counts: CriterionCounts,
    worst: Option<Hp>,
    failures: Vec<SamplePoint>,
}

impl Tally {
    fn new(eps0: f64) -> Self {
        Tally { eps: Hp::from_f64(eps0), samples: 0, counts: CriterionCounts::default(), worst: None, failures: vec![] }
    }

    fn record(&mut self, poly: &Poly<Hp>, u: &Hp, v: &Hp) {
        let jet = poly.eval_local(u, v);
        let eps = &self.eps;
        let [gx, gy] = &jet.grad;
        let [[fxx, fxy], [_, fyy]] = &jet.hess;
        let cx = gx.abs() > *eps;
        let cy = gy.abs() > *eps;
        let cl = min_eig_2x2_below(fxx, fyy, fxy, eps);
        self.samples += 1;
        self.counts.gx += cx as usize;
        self.counts.gy += cy as usize;
        self.counts.lambda += cl as usize;
        self.counts.lambda_only += (cl && !cx && !cy) as usize;
        let lambda = min_eig_2x2(fxx, fyy, fxy);
        let margin = (gx.abs() - eps.clone()).max_of(gy.abs() - eps.clone()).max_of(-lambda - eps.clone());
        if !(cx || cy || cl) {
            self.failures.push(sample_point(u, v, &jet));
        }
        self.worst = Some(match self.worst.take() {
            Some(w) if w < margin => w,
            _ => margin,
        });
    }

    fn worst_margin(&self) -> f64 {
        self.worst.as_ref().map_or(f64::INFINITY, |w| w.to_f64())
    }
}

/// Offsets `s^(−1)`, `s^(−1/2)`, `s^(−1/3)`, `s^(−1/6)` and `10⁻³` for the corner value spread
/// `s`, where thin near-edge features of a patch live.
fn edge_offsets(spread: &IBig) -> Vec<Hp> {
    let mut out = vec![Hp::from_f64(1e-3)];
    let s = Hp::from_ratio(&spread.clone().into());
    if s > Hp::one() {
        let inv = Hp::one() / s;
        let r2 = inv.clone().sqrt();
        let r6 = Hp::from_f64(inv.to_f64().powf(1.0 / 6.0));
        let r3 = r6.clone() * r6.clone();
        out.extend([inv, r2, r3, r6]);
    }
    out
}

fn corner_spread(poly: &Poly<Hp>) -> IBig {
    let zero = Hp::zero();
    let one = Hp::one();
    let vals: Vec<Hp> = [(&zero, &zero), (&one, &zero), (&zero, &one), (&one, &one)]
        .iter()
        .map(|(u, v)| poly.eval_local(u, v).f)
        .collect();
    let hi = vals.iter().cloned().reduce(|a, b| a.max_of(b)).unwrap();
    let lo = vals.iter().cloned().reduce(|a, b| a.min_of(b)).unwrap();
    (hi - lo).floor_int()
}

fn sample_grid(tally: &mut Tally, poly: &Poly<Hp>, resolution: usize, offsets: &[Hp]) {
    let denom = Hp::from_i64(resolution as i64 + 1);
    let grid: Vec<Hp> = (1..=resolution).map(|i| Hp::from_i64(i as i64) / denom.clone()).collect();
    for u in &grid {
        for v in &grid {
            tally.record(poly, u, v);
        }
    }
    let mut lines: Vec<Hp> = Vec::new();
    for d in offsets {
        lines.push(d.clone());
        lines.push(Hp::one() - d.clone());
    }
    for t in &lines {
        for g in &grid {
            tally.record(poly, t, g);
            tally.record(poly, g, t);
        }
        for s in &lines {
            tally.record(poly, t, s);
        }
    }
}

/// Local descent from the lowest interior sample; returns the end point if it is an interior
/// `(ε₀, ε₀)`-SOSP of the patch.
fn find_witness(poly: &Poly<Hp>, eps0: f64) -> Option<SamplePoint> {
    let m = 10;
    let mut best: Option<(Hp, Hp, Hp)> = None;
    for i in 1..m {
        for j in 1..m {
            let (u, v) = (Hp::from_f64(i as f64 / m as f64), Hp::from_f64(j as f64 / m as f64));
            let f = poly.eval_local(&u, &v).f;
            if best.as_ref().map_or(true, |b| f < b.2) {
                best = Some((u, v, f));
            }
        }
    }
    let (u0, v0, _) = best?;
    let (u, v, jet) = cell_descent(poly, (u0, v0), 400);
    let eps = Hp::from_f64(eps0);
    let interior = u > Hp::zero() && u < Hp::one() && v > Hp::zero() && v < Hp::one();
    let [gx, gy] = &jet.grad;
    let [[fxx, fxy], [_, fyy]] = &jet.hess;
    let stationary = gx.abs() <= eps && gy.abs() <= eps;
    let flat_or_convex = min_eig_2x2(fxx, fyy, fxy) >= -eps;
    (interior && stationary && flat_or_convex).then(|| sample_point(&u, &v, &jet))
}

/// Samples the interior grid `(i/(r+1), j/(r+1))`, `1 ≤ i, j ≤ r`, plus lines at the edge offsets,
/// re-sampling at [`REFINED_RESOLUTION`] when the worst margin is below `10·ε₀`, and finally
/// searches for an SOSP witness by descent.
pub fn certify_poly(cell: (i64, i64), poly: &Poly<Hp>, eps0: f64, resolution: usize) -> CriterionReport {
    let offsets = edge_offsets(&corner_spread(poly));
    let mut tally = Tally::new(eps0);
    sample_grid(&mut tally, poly, resolution, &offsets);
    let mut used = resolution;
    let refined = tally.worst_margin() < REFINE_FACTOR * eps0 && resolution < REFINED_RESOLUTION;
    if refined {
        tally = Tally::new(eps0);
        sample_grid(&mut tally, poly, REFINED_RESOLUTION, &offsets);
        used = REFINED_RESOLUTION;
    }
    let witness = find_witness(poly, eps0);
    CriterionReport {
        cell,
        resolution: used,
        refined,
        samples: tally.samples,
        counts: tally.counts.clone(),
        worst_margin: tally.worst_margin(),
        failures: tally.failures,
        witness,
    }
}

/// Sampling certificate that no `(ε₀, ε₀)`-SOSP lies in the patch's cell.
pub fn certify_no_sosp(patch: &BoxPatch, eps0: f64, resolution: usize) -> CriterionReport {
    certify_poly((patch.a, patch.b), &patch.to_poly::<Hp>(), eps0, resolution)
}

/// Descends `f` over the closed unit cell from `start` with projected Newton or gradient steps
/// and backtracking. Returns the final local point and its jet.
pub fn cell_descent<T: Real>(poly: &Poly<T>, start: (T, T), max_iter: usize) -> (T, T, Jet<T>) {
    let clamp = |t: T| t.max_of(T::zero()).min_of(T::one());
    let (mut u, mut v) = start;
    let mut jet = poly.eval_local(&u, &v);
    let half = T::from_f64(0.5);
    let tiny = T::from_f64(1e-45);
    for _ in 0..max_iter {
        let [gx, gy] = jet.grad.clone();
        let [[a, b], [_, c]] = jet.hess.clone();
        let at_lo = |t: &T, g: &T| t.is_zero() && *g > T::zero();
        let at_hi = |t: &T, g: &T| *t == T::one() && *g < T::zero();
        let fix_u = at_lo(&u, &gx) || at_hi(&u, &gx);
        let fix_v = at_lo(&v, &gy) || at_hi(&v, &gy);
        let (mut du, mut dv) = (-gx.clone(), -gy.clone());
        match (fix_u, fix_v) {
            (true, true) => break,
            (true, false) => {
                du = T::zero();
                if c > T::zero() {
                    dv = -gy.clone() / c.clone();
                }
            }
            (false, true) => {
                dv = T::zero();
                if a > T::zero() {
                    du = -gx.clone() / a.clone();
                }
            }
            (false, false) => {
                let det = a.clone() * c.clone() - b.clone() * b.clone();
                if a > T::zero() && det > T::zero() {
                    du = -(c.clone() * gx.clone() - b.clone() * gy.clone()) / det.clone();
                    dv = -(a.clone() * gy.clone() - b.clone() * gx.clone()) / det;
                }
            }
        }
        let mut t = T::one();
        let mut moved = false;
        for _ in 0..200 {
            let nu = clamp(u.clone() + t.clone() * du.clone());
            let nv = clamp(v.clone() + t.clone() * dv.clone());
            if (nu.clone() - u.clone()).abs().max_of((nv.clone() - v.clone()).abs()) <= tiny {
                break;
            }
            let cand = poly.eval_local(&nu, &nv);
            if cand.f < jet.f {
                u = nu;
                v = nv;
                jet = cand;
                moved = true;
                break;
            }
            t = t * half.clone();
        }
        if !moved {
            break;
        }
    }
    (u, v, jet)
}

/// Outcome of the proximal-gradient check on boundary cells.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    pub cells: usize,
    pub samples: usize,
    pub min_prox_norm: f64,
    /// `(cell, local u, local v, ‖g_π‖)` for samples with `‖g_π‖ ≤ ε₀`.
    pub failures: Vec<((i64, i64), f64, f64, f64)>,
}

impl BoundaryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Samples the closed cells on a `resolution × resolution` grid including edges and checks
/// `‖g_π‖ > ε₀` for the proximal gradient of the box `[0,N]²` with the stated `L₁`.
pub fn boundary_prox_check(h: &HardInstance, cells: &[(i64, i64)], eps0: f64, resolution: usize) -> Result<BoundaryReport> {
    if h.mode() != ScaleMode::Unit {
        return Err(Error::Contract("boundary check runs on the unscaled instance".into()));
    }
    if resolution < 2 {
        return Err(Error::Validation("boundary check needs at least 2 samples per axis".into()));
    }
    let side = Hp::from_i64(h.side());
    let l1 = Hp::from_f64(h.lipschitz_report().stated.l1);
    let eps = Hp::from_f64(eps0);
    let clamp = |t: Hp| t.max_of(Hp::zero()).min_of(side.clone());
    let denom = Hp::from_i64(resolution as i64 - 1);
    let ticks: Vec<Hp> = (0..resolution).map(|i| Hp::from_i64(i as i64) / denom.clone()).collect();
    let per_cell: Vec<Result<(Option<Hp>, Vec<_>)>> = cells
        .par_iter()
        .map(|&(a, b)| {
            let patch = h.patch(a, b)?;
            let poly = <Hp as PatchScalar>::poly(&patch);
            let mut min: Option<Hp> = None;
            let mut fails = vec![];
            for u in &ticks {
                for v in &ticks {
                    let jet = poly.eval_local(u, v);
                    let x = Hp::from_i64(a) + u.clone();
                    let y = Hp::from_i64(b) + v.clone();
                    let px = clamp(x.clone() - jet.grad[0].clone() / l1.clone());
                    let py = clamp(y.clone() - jet.grad[1].clone() / l1.clone());
                    let gx = l1.clone() * (px - x);
                    let gy = l1.clone() * (py - y);
                    let norm = (gx.clone() * gx + gy.clone() * gy).sqrt();
                    if norm <= eps {
                        fails.push(((a, b), u.to_f64(), v.to_f64(), norm.to_f64()));
                    }
                    min = Some(match min {
                        Some(m) if m < norm => m,
                        _ => norm,
                    });
                }
            }
            Ok((min, fails))
        })
        .collect();
    let mut report =
        BoundaryReport { cells: cells.len(), samples: cells.len() * resolution * resolution, min_prox_norm: f64::INFINITY, failures: vec![] };
    for r in per_cell {
        let (min, fails) = r?;
        if let Some(m) = min {
            report.min_prox_norm = report.min_prox_norm.min(m.to_f64());
        }
        report.failures.extend(fails);
    }
    Ok(report)
}

/// Per-cell entry of the census.
#[derive(Clone, Debug, Serialize)]
pub struct CellOutcome {
    pub cell: (i64, i64),
    pub label: GroupLabel,
    pub certified: bool,
    pub worst_margin: Option<f64>,
    pub failures: usize,
    pub witness: Option<SamplePoint>,
    pub min_prox_norm: Option<f64>,
}

/// Whole-grid classification and certification.
#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub n: u32,
    pub side: i64,
    pub eps0: f64,
    pub resolution: usize,
    pub label_counts: BTreeMap<Group, usize>,
    pub refined_cells: usize,
    /// Cells where certification failed, with their labels.
    pub failing_cells: Vec<((i64, i64), Group)>,
    pub cells: Vec<CellOutcome>,
}

impl CensusReport {
    /// Every non-X cell certified (or passed the boundary check) and every solution has a
    /// failing X cell.
    pub fn x_localized(&self, solutions: &[u64]) -> bool {
        let only_x = self.failing_cells.iter().all(|(_, g)| *g == Group::X);
        let each_solution = solutions.iter().all(|&k| {
            let k = k as i64;
            self.failing_cells.iter().any(|((a, b), _)| *b == 6 * k + 2 && (6 * k - 3..=6 * k - 1).contains(a))
        });
        only_x && each_solution
    }
}

/// Classifies every cell, certifies interior cells, checks boundary cells and runs the X cells
/// as negative controls.
pub fn census(h: &HardInstance, eps0: f64, resolution: usize) -> Result<CensusReport> {
    if h.mode() != ScaleMode::Unit {
        return Err(Error::Contract("census runs on the unscaled instance".into()));
    }
    let side = h.side();
    let cells: Vec<(i64, i64)> = (0..side).flat_map(|b| (0..side).map(move |a| (a, b))).collect();
    let outcomes: Vec<Result<(CellOutcome, bool)>> = cells
        .par_iter()
        .map(|&(a, b)| {
            let label = classify_cell(h.field(), a, b)?;
            if label.group == Group::Boundary {
                let r = boundary_prox_check(h, &[(a, b)], eps0, resolution)?;
                return Ok((
                    CellOutcome {
                        cell: (a, b),
                        certified: r.passed(),
                        label,
                        worst_margin: None,
                        failures: r.failures.len(),
                        witness: None,
                        min_prox_norm: Some(r.min_prox_norm),
                    },
                    false,
                ));
            }
            let patch = h.patch(a, b)?;
            let r = certify_poly((a, b), &<Hp as PatchScalar>::poly(&patch), eps0, resolution);
            Ok((
                CellOutcome {
                    cell: (a, b),
                    certified: r.certified(),
                    label,
                    worst_margin: Some(r.worst_margin),
                    failures: r.failures.len(),
                    witness: r.witness,
                    min_prox_norm: None,
                },
                r.refined,
            ))
        })
        .collect();
    let mut report = CensusReport {
        n: h.geometry().n,
        side,
        eps0,
        resolution,
        label_counts: BTreeMap::new(),
        refined_cells: 0,
        failing_cells: vec![],
        cells: Vec::with_capacity(cells.len()),
    };
    for o in outcomes {
        let (cell, refined) = o?;
        *report.label_counts.entry(cell.label.group).or_default() += 1;
        report.refined_cells += refined as usize;
        if !cell.certified {
            report.failing_cells.push((cell.cell, cell.label.group));
        }
        report.cells.push(cell);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biquintic::{assemble_corner_block, solve_coefficients, CornerJet};
    use crate::iter_problems::IterInstance;
    use dashu::rational::RBig;

    fn standard(f: i64, fx: (i64, i64)) -> CornerJet {
        let half = |v: i64| RBig::from(v) / RBig::from(2);
        CornerJet { f: f.into(), fx: half(fx.0), fy: half(fx.1), fxx: half(-1), fyy: half(-1) }
    }

    #[test]
    fn uniform_slope_is_certified_by_gx() {
        let right = (-1, 0);
        let c = [standard(10, right), standard(11, right), standard(9, right), standard(10, right)];
        let p = solve_coefficients(0, 0, &assemble_corner_block([&c[0], &c[1], &c[2], &c[3]]));
        let r = certify_no_sosp(&p, EPS0, 11);
        assert!(r.certified());
        assert_eq!(r.dominant(), Criterion::Gx);
        assert!(!r.refined);
    }

    #[test]
    fn x_cell_is_a_negative_control() {
        let h = HardInstance::build(IterInstance::from_table(1, vec![2, 2]).unwrap(), ScaleMode::Unit);
        let patch = h.patch(4, 8).unwrap();
        let r = certify_no_sosp(&patch.patch, EPS0, 11);
        let w = r.witness.as_ref().expect("descent finds the minimizer");
        assert!(w.gx.abs() <= EPS0 && w.gy.abs() <= EPS0 && w.lambda >= -EPS0);
        assert!(!r.certified());
    }

    #[test]
    fn boundary_samples() {
        let h = HardInstance::build(IterInstance::from_table(1, vec![2, 2]).unwrap(), ScaleMode::Unit);
        let r = boundary_prox_check(&h, &[(0, 5), (7, 0)], EPS0, 5).unwrap();
        assert!(r.passed());
        assert!(r.min_prox_norm > EPS0);
        let scaled = HardInstance::build(IterInstance::from_table(1, vec![2, 2]).unwrap(), ScaleMode::Moderate);
        assert!(boundary_prox_check(&scaled, &[(0, 5)], EPS0, 5).is_err());
    }
}
