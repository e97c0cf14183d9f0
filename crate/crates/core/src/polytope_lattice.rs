//! Discrete grids for the LOCALOPT reduction: a uniform grid of step `γ` for boxes, and for
//! general polytopes one canonical lattice per face, reached by MapToGrid's round-and-ray-shoot
//! recursion. Everything here is exact rational arithmetic.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, gram_schmidt, norm_sq, null_space_basis, solve, sub, transpose, Vector};
use crate::numeric::{isqrt, Field};
use crate::stationarity::Polytope;

/// Binary digits kept when bounding a square root from above by a dyadic rational.
const SQRT_BITS: usize = 32;

/// `⌈√r⌉` for a non-negative rational.
pub fn ceil_sqrt(r: &RBig) -> IBig {
    let (num, den) = (r.numerator().clone(), IBig::from(r.denominator().clone()));
    let mut m = isqrt(&(num.clone() / den.clone()));
    while m.clone() * m.clone() * den.clone() < num {
        m += IBig::ONE;
    }
    m
}

/// Dyadic upper bound on `√r` with [`SQRT_BITS`] fractional bits.
pub fn sqrt_upper(r: &RBig) -> RBig {
    let scale = IBig::ONE << SQRT_BITS;
    let scaled = r.clone() * RBig::from(scale.clone() * scale.clone());
    RBig::from_parts(ceil_sqrt(&scaled), UBig::try_from(scale).expect("positive"))
}

fn gcd_int(a: &UBig, b: &UBig) -> UBig {
    let (mut a, mut b) = (a.clone(), b.clone());
    while b != UBig::ZERO {
        let r = a % b.clone();
        a = b;
        b = r;
    }
    a
}

/// Largest rational `g` dividing every length an integer number of times.
pub fn rational_gcd(lengths: &[RBig]) -> Result<RBig> {
    let mut acc: Option<RBig> = None;
    for len in lengths {
        if *len <= RBig::ZERO {
            return Err(Error::Domain("interval lengths must be positive".into()));
        }
        acc = Some(match acc {
            None => len.clone(),
            Some(g) => {
                let (gn, gd) = (UBig::try_from(g.numerator().clone()).expect("positive"), g.denominator().clone());
                let (ln, ld) = (UBig::try_from(len.numerator().clone()).expect("positive"), len.denominator().clone());
                let den = gd.clone() / gcd_int(&gd, &ld) * ld.clone();
                let a = gn * (den.clone() / gd);
                let b = ln * (den.clone() / ld);
                RBig::from_parts(IBig::from(gcd_int(&a, &b)), den)
            }
        });
    }
    acc.ok_or_else(|| Error::Domain("no intervals".into()))
}

/// Uniform grid `a_i + k_i·γ`, `0 ≤ k_i ≤ (b_i − a_i)/γ`, on a box.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxGrid {
    pub lo: Vec<RBig>,
    pub hi: Vec<RBig>,
    pub step: RBig,
    /// `(b_i − a_i)/γ`.
    pub counts: Vec<IBig>,
}

/// `γ = γ_GCD / ⌈1000·d^{3/2}·L_MAX³·γ_GCD/ε⁵⌉`.
pub fn box_grid_step(intervals: &[(RBig, RBig)], eps: &RBig, l_max: &RBig) -> Result<RBig> {
    if *eps <= RBig::ZERO || *l_max <= RBig::ZERO {
        return Err(Error::Domain("ε and L_MAX must be positive".into()));
    }
    let lengths: Vec<RBig> = intervals.iter().map(|(a, b)| b.clone() - a.clone()).collect();
    let g = rational_gcd(&lengths)?;
    let d = RBig::from(intervals.len());
    let eps5 = (0..5).fold(RBig::ONE, |p, _| p * eps.clone());
    let base = RBig::from(1000) * l_max.clone() * l_max.clone() * l_max.clone() * g.clone() / eps5;
    // d^{3/2}·base = √(d³·base²)
    let k = ceil_sqrt(&(d.clone() * d.clone() * d * base.clone() * base)).max(IBig::ONE);
    Ok(g / RBig::from(k))
}

impl BoxGrid {
    pub fn new(intervals: &[(RBig, RBig)], eps: &RBig, l_max: &RBig) -> Result<Self> {
        let step = box_grid_step(intervals, eps, l_max)?;
        Self::with_step(intervals, step)
    }

    pub fn with_step(intervals: &[(RBig, RBig)], step: RBig) -> Result<Self> {
        let mut counts = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            let q = (b.clone() - a.clone()) / step.clone();
            if q.denominator() != &UBig::ONE || q < RBig::ZERO {
                return Err(Error::Domain("grid step does not divide every interval".into()));
            }
            counts.push(q.numerator().clone());
        }
        Ok(BoxGrid {
            lo: intervals.iter().map(|(a, _)| a.clone()).collect(),
            hi: intervals.iter().map(|(_, b)| b.clone()).collect(),
            step,
            counts,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Grid indices of `x` rounded down coordinate-wise, clamped into the box.
    pub fn floor_indices<T: Field>(&self, x: &[T]) -> Vec<IBig> {
        x.iter()
            .enumerate()
            .map(|(i, xi)| {
                let k = ((xi.to_ratio() - self.lo[i].clone()) / self.step.clone()).floor();
                k.max(IBig::ZERO).min(self.counts[i].clone())
            })
            .collect()
    }

    /// Indices of `x` when it lies exactly on the grid.
    pub fn indices_of<T: Field>(&self, x: &[T]) -> Option<Vec<IBig>> {
        if x.len() != self.dim() {
            return None;
        }
        x.iter()
            .enumerate()
            .map(|(i, xi)| {
                let q = (xi.to_ratio() - self.lo[i].clone()) / self.step.clone();
                let k = q.numerator().clone();
                (q.denominator() == &UBig::ONE && k >= IBig::ZERO && k <= self.counts[i]).then_some(k)
            })
            .collect()
    }

    pub fn point<T: Field>(&self, indices: &[IBig]) -> Vec<T> {
        indices
            .iter()
            .enumerate()
            .map(|(i, k)| T::from_ratio(&(self.lo[i].clone() + RBig::from(k.clone()) * self.step.clone())))
            .collect()
    }

    /// `x` rounded down to the closest multiple of `γ` from the lower corner.
    pub fn round_down<T: Field>(&self, x: &[T]) -> Vec<T> {
        self.point(&self.floor_indices(x))
    }
}

/// Canonical coordinates on `E_I = {x : A_I x = b_I}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceFrame {
    pub indices: Vec<usize>,
    /// Minimum-norm solution of `A_I x = b_I`.
    pub reference: Vector<RBig>,
    /// Orthogonal, unnormalized basis of `ker(A_I)`.
    pub basis: Vec<Vector<RBig>>,
    /// `‖v_k‖²`.
    pub norm_sq: Vec<RBig>,
    /// Dyadic upper bounds on `‖v_k‖`; the lattice spacing along `v_k` is `δ/s_k`.
    pub norm_bound: Vec<RBig>,
}

impl FaceFrame {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coefficients `c_k` of the orthogonal projection of `x − x_I` onto `v_k`.
    pub fn coefficients(&self, x: &[RBig]) -> Vec<RBig> {
        let rel = sub(x, &self.reference);
        self.basis.iter().zip(&self.norm_sq).map(|(v, n)| dot(&rel, v) / n.clone()).collect()
    }

    pub fn point(&self, coefficients: &[RBig]) -> Vector<RBig> {
        self.basis.iter().zip(coefficients).fold(self.reference.clone(), |acc, (v, c)| axpy(&acc, c, v))
    }

    /// Spacing of the lattice in units of `v_k`.
    pub fn spacing(&self, delta: &RBig) -> Vec<RBig> {
        self.norm_bound.iter().map(|s| delta.clone() / s.clone()).collect()
    }

    /// Nearest lattice point of `L_I` to the projection of `x` onto `E_I`.
    pub fn round(&self, x: &[RBig], delta: &RBig) -> Vector<RBig> {
        let half = RBig::ONE / RBig::from(2);
        let coeffs: Vec<RBig> = self
            .coefficients(x)
            .into_iter()
            .zip(self.spacing(delta))
            .map(|(c, s)| RBig::from((c / s.clone() + half.clone()).floor()) * s)
            .collect();
        self.point(&coeffs)
    }
}

/// Canonical frame of the face indexed by `indices` (rows of `poly`).
pub fn face_frame(poly: &Polytope, indices: &[usize]) -> Result<FaceFrame> {
    let d = poly.dim();
    let mut indices = indices.to_vec();
    indices.sort_unstable();
    indices.dedup();
    if indices.iter().any(|&j| j >= poly.num_constraints()) {
        return Err(Error::Domain("constraint index out of range".into()));
    }
    let rows: Vec<Vector<RBig>> = indices.iter().map(|&j| poly.rows()[j].clone()).collect();
    let rhs: Vec<RBig> = indices.iter().map(|&j| poly.rhs()[j].clone()).collect();

    let mut span: Vec<Vector<RBig>> = Vec::new();
    let mut independent = Vec::new();
    for (k, r) in rows.iter().enumerate() {
        let before = span.len();
        gram_schmidt(&mut span, [r.clone()], &RBig::ZERO);
        if span.len() > before {
            independent.push(k);
        }
    }
    let reference = if independent.is_empty() {
        vec![RBig::ZERO; d]
    } else {
        let sel: Vec<Vector<RBig>> = independent.iter().map(|&k| rows[k].clone()).collect();
        let gram: Vec<Vector<RBig>> = sel.iter().map(|u| sel.iter().map(|v| dot(u, v)).collect()).collect();
        let sel_rhs: Vec<RBig> = independent.iter().map(|&k| rhs[k].clone()).collect();
        let y = solve(&gram, &sel_rhs).ok_or(Error::EmptyFace)?;
        let cols = transpose(&sel);
        cols.iter().map(|c| dot(c, &y)).collect()
    };
    if rows.iter().zip(&rhs).any(|(r, b)| dot(r, &reference) != *b) {
        return Err(Error::EmptyFace);
    }
    let basis = null_space_basis(&rows, d, &RBig::ZERO);
    let norm_sq: Vec<RBig> = basis.iter().map(|v| norm_sq(v)).collect();
    let norm_bound = norm_sq.iter().map(sqrt_upper).collect();
    Ok(FaceFrame { indices, reference, basis, norm_sq, norm_bound })
}

/// Frames memoized per index set.
#[derive(Debug, Default)]
pub struct FrameCache {
    frames: Mutex<HashMap<Vec<usize>, Arc<FaceFrame>>>,
}

impl FrameCache {
    pub fn get(&self, poly: &Polytope, indices: &[usize]) -> Result<Arc<FaceFrame>> {
        if let Some(f) = self.frames.lock().expect("frame cache poisoned").get(indices) {
            return Ok(f.clone());
        }
        let frame = Arc::new(face_frame(poly, indices)?);
        let mut map = self.frames.lock().expect("frame cache poisoned");
        Ok(map.entry(indices.to_vec()).or_insert(frame).clone())
    }
}

/// Lattice step `δ ≤ ε_r/(d√d)`, exact when `d` is a perfect square.
pub fn lattice_step(eps_r: &RBig, d: usize) -> RBig {
    let dr = RBig::from(d);
    eps_r.clone() / (dr.clone() * sqrt_upper(&dr))
}

/// One ray-shooting bounce.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bounce {
    /// Constraints attaining the earliest collision.
    pub hit: Vec<usize>,
    pub t_min: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundingCertificate {
    pub input: Vector<RBig>,
    pub output: Vector<RBig>,
    pub bounces: Vec<Bounce>,
    /// `‖x⁽ⁱ⁾ − x̃⁽ⁱ⁾‖²` for every round, the last one included.
    pub target_distance_sq: Vec<RBig>,
    /// `‖x − y‖²`.
    pub displacement_sq: RBig,
}

fn active_exact(poly: &Polytope, x: &[RBig]) -> Vec<usize> {
    poly.active_indices(x)
}

fn rank_of(poly: &Polytope, indices: &[usize]) -> usize {
    let mut span = Vec::new();
    gram_schmidt(&mut span, indices.iter().map(|&j| poly.rows()[j].clone()), &RBig::ZERO);
    span.len()
}

/// MapToGrid: rounds `x` onto the lattice of its face, ray-shooting to the first blocking
/// facet whenever the rounded target leaves the polytope.
pub fn map_to_grid(x: &[RBig], poly: &Polytope, delta: &RBig) -> Result<(Vector<RBig>, RoundingCertificate)> {
    map_to_grid_cached(x, poly, delta, &FrameCache::default())
}

pub fn map_to_grid_cached(
    x: &[RBig],
    poly: &Polytope,
    delta: &RBig,
    cache: &FrameCache,
) -> Result<(Vector<RBig>, RoundingCertificate)> {
    poly.require_feasible(x)?;
    if *delta <= RBig::ZERO {
        return Err(Error::Domain("lattice step must be positive".into()));
    }
    let d = poly.dim();
    let mut cur = x.to_vec();
    let mut bounces = Vec::new();
    let mut target_distance_sq = Vec::new();
    loop {
        let active = active_exact(poly, &cur);
        if rank_of(poly, &active) == d {
            break;
        }
        let frame = cache.get(poly, &active)?;
        let target = frame.round(&cur, delta);
        target_distance_sq.push(norm_sq(&sub(&target, &cur)));
        let dir = sub(&target, &cur);
        let mut t_min: Option<(RBig, Vec<usize>)> = None;
        for (j, (row, b)) in poly.rows().iter().zip(poly.rhs()).enumerate() {
            if active.contains(&j) || dot(row, &target) <= *b {
                continue;
            }
            let t = (b.clone() - dot(row, &cur)) / dot(row, &dir);
            match &mut t_min {
                Some((tm, hit)) if t == *tm => hit.push(j),
                Some((tm, _)) if t > *tm => {}
                _ => t_min = Some((t, vec![j])),
            }
        }
        match t_min {
            None => {
                cur = target;
                break;
            }
            Some((t, hit)) => {
                if bounces.len() >= d {
                    return Err(Error::Contract("MapToGrid exceeded d bounces".into()));
                }
                cur = axpy(&cur, &t, &dir);
                bounces.push(Bounce { hit, t_min: Field::to_f64(&t) });
            }
        }
    }
    let displacement_sq = norm_sq(&sub(&cur, x));
    let cert = RoundingCertificate { input: x.to_vec(), output: cur.clone(), bounces, target_distance_sq, displacement_sq };
    Ok((cur, cert))
}

/// `Σ_{d'=0}^{d} C(m, d−d')·(D·d√d/ε_r + 1)^{d'}`.
pub fn lattice_cardinality_bound(poly: &Polytope, diameter: f64, eps_r: f64) -> f64 {
    let d = poly.dim();
    let m = poly.num_constraints();
    let per_axis = diameter * (d as f64).powf(1.5) / eps_r + 1.0;
    (0..=d).map(|dp| binomial(m, d - dp) * per_axis.powi(dp as i32)).sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> RBig {
        RBig::from(n) / RBig::from(d)
    }

    fn unit_square() -> Polytope {
        Polytope::unit_box(2, RBig::ZERO, RBig::ONE)
    }

    #[test]
    fn step_for_a_single_interval() {
        // 1000·(1/5)³/1⁵ = 8
        let g = box_grid_step(&[(RBig::ZERO, RBig::ONE)], &RBig::ONE, &q(1, 5)).unwrap();
        assert_eq!(g, q(1, 8));
    }

    #[test]
    fn step_for_dyadic_lengths() {
        let iv = [(RBig::ZERO, RBig::ONE), (q(1, 4), q(3, 4))];
        assert_eq!(rational_gcd(&[RBig::ONE, q(1, 2)]).unwrap(), q(1, 2));
        let g = box_grid_step(&iv, &RBig::from(10), &RBig::ONE).unwrap();
        assert_eq!(g, q(1, 2));
        let g = box_grid_step(&iv, &RBig::ONE, &RBig::ONE).unwrap();
        // ⌈1000·2^{3/2}·(1/2)⌉ = ⌈1414.2…⌉
        assert_eq!(g, q(1, 2) / RBig::from(1415));
        let grid = BoxGrid::with_step(&iv, g.clone()).unwrap();
        for (i, k) in grid.counts.iter().enumerate() {
            assert_eq!(RBig::from(k.clone()) * g.clone(), iv[i].1.clone() - iv[i].0.clone());
        }
        let bound = RBig::ONE / RBig::from(1000);
        assert!(g.clone() * g.clone() * RBig::from(8) <= bound.clone() * bound);
    }

    #[test]
    fn non_positive_lengths_are_rejected() {
        assert!(matches!(box_grid_step(&[(RBig::ONE, RBig::ONE)], &RBig::ONE, &RBig::ONE), Err(Error::Domain(_))));
    }

    #[test]
    fn grid_rounding_goes_down() {
        let grid = BoxGrid::with_step(&[(RBig::ZERO, RBig::ONE), (RBig::ZERO, RBig::ONE)], q(1, 4)).unwrap();
        assert_eq!(grid.round_down(&[0.6f64, 0.99]), vec![0.5, 0.75]);
        assert_eq!(grid.round_down(&[1.0f64, 0.0]), vec![1.0, 0.0]);
        assert!(grid.indices_of(&[0.5f64, 0.3]).is_none());
        assert_eq!(grid.indices_of(&[0.5f64, 0.25]).unwrap(), vec![IBig::from(2), IBig::from(1)]);
    }

    #[test]
    fn frames() {
        let sq = unit_square();
        let f = face_frame(&sq, &[]).unwrap();
        assert_eq!(f.reference, vec![RBig::ZERO, RBig::ZERO]);
        assert_eq!(f.basis, vec![vec![RBig::ONE, RBig::ZERO], vec![RBig::ZERO, RBig::ONE]]);
        // row 1 is x₁ ≤ 1
        let f = face_frame(&sq, &[1]).unwrap();
        assert_eq!(f.reference, vec![RBig::ONE, RBig::ZERO]);
        assert_eq!(f.basis, vec![vec![RBig::ZERO, RBig::ONE]]);
        let f = face_frame(&sq, &[1, 3]).unwrap();
        assert_eq!(f.dim(), 0);
        assert_eq!(f.reference, vec![RBig::ONE, RBig::ONE]);
        assert!(matches!(face_frame(&sq, &[0, 1]), Err(Error::EmptyFace)));
        assert_eq!(face_frame(&sq, &[3, 1]).unwrap(), face_frame(&sq, &[1, 3]).unwrap());
    }

    #[test]
    fn slanted_frame_is_min_norm() {
        let p = unit_square().with_cut(vec![RBig::ONE, RBig::ONE], RBig::ONE).unwrap();
        let f = face_frame(&p, &[4]).unwrap();
        assert_eq!(f.reference, vec![q(1, 2), q(1, 2)]);
        assert_eq!(f.basis.len(), 1);
        assert_eq!(dot(&f.basis[0], &[RBig::ONE, RBig::ONE]), RBig::ZERO);
    }

    #[test]
    fn lattice_points_are_fixed() {
        let sq = unit_square();
        let x = vec![q(1, 4), q(1, 2)];
        let (y, cert) = map_to_grid(&x, &sq, &q(1, 4)).unwrap();
        assert_eq!(y, x);
        assert!(cert.bounces.is_empty());
    }

    #[test]
    fn interior_rounding_is_coordinatewise() {
        let sq = unit_square();
        let delta = q(1, 10);
        let x = vec![q(33, 100), q(58, 100)];
        let (y, cert) = map_to_grid(&x, &sq, &delta).unwrap();
        assert_eq!(y, vec![q(3, 10), q(6, 10)]);
        assert!(cert.bounces.is_empty());
    }

    #[test]
    fn ray_shoot_near_a_vertex() {
        // Cut x₁ + x₂ ≤ 19/10: the ideal target (1, 1) of (0.97, 0.98) lies beyond it.
        let p = unit_square().with_cut(vec![RBig::ONE, RBig::ONE], q(19, 10)).unwrap();
        let x = vec![q(97, 100), q(90, 100)];
        let delta = q(1, 4);
        let (y, cert) = map_to_grid(&x, &p, &delta).unwrap();
        assert_eq!(cert.bounces.len(), 1);
        assert_eq!(cert.bounces[0].hit, vec![4]);
        // segment (0.97, 0.90) → (1, 1) meets x₁ + x₂ = 1.9 at t = 3/13
        assert_eq!(cert.bounces[0].t_min, (3.0f64 / 13.0));
        assert!(p.active_indices(&y).contains(&4));
        assert!(p.is_feasible(&y));
    }

    #[test]
    fn cardinality_bound() {
        let interval = Polytope::unit_box(1, RBig::ZERO, RBig::from(3));
        let delta = 0.5;
        let bound = lattice_cardinality_bound(&interval, 3.0, delta);
        let points_on_interval = (3.0 / delta) as usize + 1;
        assert!(bound >= points_on_interval as f64);
        let sq = unit_square();
        assert!((lattice_cardinality_bound(&sq, 2f64.sqrt(), 1e300) - (1.0 + 4.0 + 6.0)).abs() < 1e-9);
        // coarse δ on the unit square: count every face lattice point
        let eps_r = RBig::ONE / RBig::from(2);
        let delta = lattice_step(&eps_r, 2);
        let mut count = 0;
        for mask in 0u32..16 {
            let idx: Vec<usize> = (0..4).filter(|j| mask >> j & 1 == 1).collect();
            let Ok(frame) = face_frame(&sq, &idx) else { continue };
            let steps = frame.spacing(&delta);
            let lim = 64i64;
            let mut pts = vec![frame.reference.clone()];
            for (v, s) in frame.basis.iter().zip(&steps) {
                pts = pts
                    .into_iter()
                    .flat_map(|p| (-lim..=lim).map(move |k| axpy(&p, &(RBig::from(k) * s.clone()), v)))
                    .collect();
            }
            count += pts.iter().filter(|p| sq.is_feasible(p.as_slice())).count();
        }
        assert!(lattice_cardinality_bound(&sq, 2f64.sqrt(), Field::to_f64(&eps_r)) >= count as f64);
    }
}
