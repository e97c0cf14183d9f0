//! Cell classification by corner pattern, up to the reflections, rotations and negation
//! that commute with the interpolation.

use std::fmt;

use dashu::integer::IBig;
use serde::{Serialize, Serializer};

use crate::color_field::{ColorField, Direction};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Group {
    G1,
    G2,
    G3,
    G4,
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    X,
    Boundary,
}

impl Group {
    pub const ALL: [Group; 13] = [
        Group::G1,
        Group::G2,
        Group::G3,
        Group::G4,
        Group::A,
        Group::B,
        Group::C,
        Group::D,
        Group::E,
        Group::F,
        Group::G,
        Group::X,
        Group::Boundary,
    ];
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One of the elementary symmetries of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Transform {
    /// `f(x, 1−y)`: swaps top and bottom corners.
    ReflectHorizontal,
    /// `f(1−x, y)`: swaps left and right corners.
    ReflectVertical,
    /// `f(y, x)`: swaps the top-left and bottom-right corners.
    ReflectDiagonal,
    /// `f(1−y, 1−x)`: swaps the bottom-left and top-right corners.
    ReflectAntiDiagonal,
    /// `−f`.
    Negate,
    /// Counter-clockwise rotation by `90°·k`, `k ∈ {1, 2, 3}`.
    Rotate(u8),
}

impl Transform {
    /// Signed permutation acting on centered cell coordinates, and whether values flip sign.
    fn action(self) -> ([[i64; 2]; 2], bool) {
        match self {
            Transform::ReflectHorizontal => ([[1, 0], [0, -1]], false),
            Transform::ReflectVertical => ([[-1, 0], [0, 1]], false),
            Transform::ReflectDiagonal => ([[0, 1], [1, 0]], false),
            Transform::ReflectAntiDiagonal => ([[0, -1], [-1, 0]], false),
            Transform::Negate => ([[1, 0], [0, 1]], true),
            Transform::Rotate(k) => {
                let mut m = [[1, 0], [0, 1]];
                for _ in 0..k % 4 {
                    m = [[-m[1][0], -m[1][1]], [m[0][0], m[0][1]]];
                }
                (m, false)
            }
        }
    }
}

/// Value and descent direction at one corner of a cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerState {
    pub value: IBig,
    pub direction: Direction,
}

/// Corner data of a cell in the order bottom-left, bottom-right, top-left, top-right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellCorners(pub [CornerState; 4]);

const POSITIONS: [(i64, i64); 4] = [(-1, -1), (1, -1), (-1, 1), (1, 1)];

fn descent_vector(d: Direction) -> (i64, i64) {
    let (gx, gy) = d.doubled_gradient();
    (-gx, -gy)
}

fn from_descent_vector(v: (i64, i64)) -> Direction {
    Direction::from_doubled_gradient((-v.0, -v.1)).expect("unit lattice direction")
}

fn apply_matrix(m: &[[i64; 2]; 2], p: (i64, i64)) -> (i64, i64) {
    (m[0][0] * p.0 + m[0][1] * p.1, m[1][0] * p.0 + m[1][1] * p.1)
}

impl CellCorners {
    pub fn of_cell(field: &ColorField, a: i64, b: i64) -> Self {
        let state = |x, y| {
            let c = field.assignment(x, y);
            CornerState { value: c.value, direction: c.direction }
        };
        CellCorners([state(a, b), state(a + 1, b), state(a, b + 1), state(a + 1, b + 1)])
    }

    fn apply(&self, t: Transform) -> Self {
        let (m, negate) = t.action();
        let mut out = self.0.clone();
        for (corner, &p) in self.0.iter().zip(POSITIONS.iter()) {
            let q = apply_matrix(&m, p);
            let slot = POSITIONS.iter().position(|&r| r == q).expect("corner maps to corner");
            let mut v = apply_matrix(&m, descent_vector(corner.direction));
            let mut value = corner.value.clone();
            if negate {
                v = (-v.0, -v.1);
                value = -value;
            }
            out[slot] = CornerState { value, direction: from_descent_vector(v) };
        }
        CellCorners(out)
    }

    pub fn signature(&self) -> String {
        let names: Vec<String> = self.0.iter().map(|c| format!("{}:{}", c.direction, c.value)).collect();
        format!("[bl {}, br {}, tl {}, tr {}]", names[0], names[1], names[2], names[3])
    }
}

/// Applies a transformation sequence from left to right.
pub fn canonicalize(corners: &CellCorners, sequence: &[Transform]) -> CellCorners {
    sequence.iter().fold(corners.clone(), |acc, &t| acc.apply(t))
}

/// Classification of a cell together with the sequence mapping it onto its group's representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupLabel {
    pub group: Group,
    pub transforms: Vec<Transform>,
}

impl Serialize for GroupLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("GroupLabel", 2)?;
        st.serialize_field("group", &self.group)?;
        st.serialize_field("transforms", &self.transforms)?;
        st.end()
    }
}

/// Minimal separation between corner values of distinct bands in a band pattern.
const BAND_GAP: i64 = 16;

enum ValueRule {
    /// `value[i] ≥ value[j] + k` for every `(i, j, k)`.
    AtLeast(&'static [(usize, usize, i64)]),
    /// Band index and offset per corner: equal bands differ by exactly the offsets, higher bands
    /// lie strictly above lower ones by more than [`BAND_GAP`].
    Bands([(u8, i64); 4]),
}

struct Pattern {
    group: Group,
    arrows: [Direction; 4],
    rule: ValueRule,
}

use Direction::{Down as D, Left as L, Right as R, Up as U};

// Corner indices: 0 = bottom-left, 1 = bottom-right, 2 = top-left, 3 = top-right.
// Band letters follow the regime order Blue < Black < Red < Green < Orange (0..=4).
const PATTERNS: [Pattern; 11] = [
    Pattern { group: Group::G1, arrows: [R, R, R, R], rule: ValueRule::AtLeast(&[(2, 3, 1), (0, 1, 1)]) },
    Pattern {
        group: Group::G2,
        arrows: [U, U, R, R],
        rule: ValueRule::AtLeast(&[(2, 3, 1), (0, 1, -1), (1, 3, 1), (0, 2, 1)]),
    },
    Pattern {
        group: Group::G3,
        arrows: [U, U, R, U],
        rule: ValueRule::AtLeast(&[(2, 3, 1), (0, 1, -1), (1, 3, 1), (0, 2, 1)]),
    },
    Pattern {
        group: Group::G4,
        arrows: [R, U, U, U],
        rule: ValueRule::AtLeast(&[(2, 3, -1), (0, 1, 1), (1, 3, 1), (0, 2, 1)]),
    },
    Pattern { group: Group::A, arrows: [U, U, L, R], rule: ValueRule::Bands([(3, -1), (3, 0), (1, 0), (2, 0)]) },
    Pattern { group: Group::B, arrows: [U, L, U, R], rule: ValueRule::Bands([(1, -1), (1, 0), (0, 0), (2, 0)]) },
    Pattern { group: Group::C, arrows: [L, R, D, R], rule: ValueRule::Bands([(1, 0), (2, -2), (2, 0), (2, -1)]) },
    Pattern { group: Group::D, arrows: [U, R, U, U], rule: ValueRule::Bands([(0, 0), (2, 0), (0, -1), (0, -2)]) },
    Pattern { group: Group::E, arrows: [U, R, U, R], rule: ValueRule::Bands([(0, 0), (2, -1), (0, -1), (2, 0)]) },
    Pattern { group: Group::F, arrows: [L, L, R, D], rule: ValueRule::Bands([(1, -1), (1, 0), (2, 0), (2, -1)]) },
    Pattern { group: Group::G, arrows: [U, D, U, D], rule: ValueRule::Bands([(1, 0), (2, -1), (1, -1), (2, 0)]) },
];

impl Pattern {
    fn matches(&self, c: &CellCorners) -> bool {
        if c.0.iter().zip(self.arrows.iter()).any(|(s, d)| s.direction != *d) {
            return false;
        }
        let v = |i: usize| &c.0[i].value;
        match &self.rule {
            ValueRule::AtLeast(rows) => rows.iter().all(|&(i, j, k)| *v(i) >= v(j) + IBig::from(k)),
            ValueRule::Bands(bands) => (0..4).all(|i| {
                (0..4).all(|j| {
                    let (bi, oi) = bands[i];
                    let (bj, oj) = bands[j];
                    let diff = v(i) - v(j);
                    match bi.cmp(&bj) {
                        std::cmp::Ordering::Equal => diff == IBig::from(oi - oj),
                        std::cmp::Ordering::Greater => diff > IBig::from(BAND_GAP),
                        std::cmp::Ordering::Less => true,
                    }
                })
            }),
        }
    }
}

/// The sixteen symmetries, each as a short sequence of elementary transformations.
fn symmetry_sequences() -> Vec<Vec<Transform>> {
    use Transform::*;
    let dihedral: [&[Transform]; 8] = [
        &[],
        &[Rotate(1)],
        &[Rotate(2)],
        &[Rotate(3)],
        &[ReflectHorizontal],
        &[ReflectVertical],
        &[ReflectDiagonal],
        &[ReflectAntiDiagonal],
    ];
    let mut out: Vec<Vec<Transform>> = dihedral.iter().map(|s| s.to_vec()).collect();
    out.extend(dihedral.iter().map(|s| {
        let mut v = s.to_vec();
        v.push(Negate);
        v
    }));
    out
}

/// Whether `Box(a, b)` is one of the three cells at the top of a solution column.
pub fn is_x_cell(field: &ColorField, a: i64, b: i64) -> bool {
    if (b - 2).rem_euclid(6) != 0 {
        return false;
    }
    let k = (b - 2) / 6;
    (6 * k - 3..=6 * k - 1).contains(&a) && field.is_solution(k)
}

pub fn is_boundary_cell(side: i64, a: i64, b: i64) -> bool {
    a == 0 || b == 0 || a == side - 1 || b == side - 1
}

/// Matches the corner pattern of an interior cell against the group table.
pub fn match_pattern(corners: &CellCorners) -> Option<GroupLabel> {
    let seqs = symmetry_sequences();
    PATTERNS.iter().find_map(|p| {
        seqs.iter()
            .find(|s| p.matches(&canonicalize(corners, s)))
            .map(|s| GroupLabel { group: p.group, transforms: s.clone() })
    })
}

pub fn classify_cell(field: &ColorField, a: i64, b: i64) -> Result<GroupLabel> {
    let side = field.geometry().side;
    if !(0..side).contains(&a) || !(0..side).contains(&b) {
        return Err(Error::Domain(format!("no cell Box({a}, {b}) in a grid of side {side}")));
    }
    if is_x_cell(field, a, b) {
        return Ok(GroupLabel { group: Group::X, transforms: vec![] });
    }
    if is_boundary_cell(side, a, b) {
        return Ok(GroupLabel { group: Group::Boundary, transforms: vec![] });
    }
    let corners = CellCorners::of_cell(field, a, b);
    match_pattern(&corners).ok_or_else(|| {
        Error::Classification(format!("Box({a}, {b}) has unmatched corner pattern {}", corners.signature()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iter_problems::IterInstance;
    use std::sync::Arc;

    fn field(n: u32, c: Vec<u64>) -> ColorField {
        ColorField::new(Arc::new(IterInstance::from_table(n, c).unwrap()))
    }

    fn sample() -> CellCorners {
        let s = |v: i64, d| CornerState { value: IBig::from(v), direction: d };
        CellCorners([s(1, U), s(2, L), s(3, D), s(4, R)])
    }

    #[test]
    fn identity_and_involutions() {
        let c = sample();
        assert_eq!(canonicalize(&c, &[]), c);
        for t in [
            Transform::ReflectHorizontal,
            Transform::ReflectVertical,
            Transform::ReflectDiagonal,
            Transform::ReflectAntiDiagonal,
            Transform::Negate,
            Transform::Rotate(2),
        ] {
            assert_eq!(canonicalize(&c, &[t, t]), c, "{t:?}");
        }
        assert_eq!(canonicalize(&c, &[Transform::Rotate(1), Transform::Rotate(3)]), c);
        assert_eq!(canonicalize(&c, &[Transform::Rotate(1); 4]), c);
    }

    #[test]
    fn elementary_actions() {
        let c = sample();
        let h = canonicalize(&c, &[Transform::ReflectHorizontal]);
        assert_eq!(h.0[0].value, IBig::from(3));
        assert_eq!(h.0[0].direction, U);
        assert_eq!(h.0[2].direction, D);
        let n = canonicalize(&c, &[Transform::Negate]);
        let dirs: Vec<Direction> = n.0.iter().map(|s| s.direction).collect();
        assert_eq!(dirs, vec![D, R, U, L]);
        assert!(n.0.iter().zip(c.0.iter()).all(|(p, q)| p.value == -q.value.clone()));
        let d = canonicalize(&c, &[Transform::ReflectDiagonal]);
        assert_eq!((d.0[1].value.clone(), d.0[2].value.clone()), (IBig::from(3), IBig::from(2)));
        assert_eq!(d.0[1].direction, L);
        let r = canonicalize(&c, &[Transform::Rotate(1)]);
        assert_eq!(r.0[1].value, IBig::from(1));
        assert_eq!(r.0[1].direction, L);
    }

    #[test]
    fn listed_cells() {
        let f = field(1, vec![2, 2]);
        assert_eq!(classify_cell(&f, 4, 8).unwrap().group, Group::X);
        assert_eq!(classify_cell(&f, 0, 5).unwrap().group, Group::Boundary);
        assert!(classify_cell(&f, 18, 0).is_err());
    }

    #[test]
    fn uniform_red_background_is_group_one() {
        let s = |v: i64| CornerState { value: IBig::from(v), direction: R };
        let c = CellCorners([s(10), s(9), s(11), s(10)]);
        let label = match_pattern(&c).unwrap();
        assert_eq!(label.group, Group::G1);
        assert!(label.transforms.is_empty());
    }

    #[test]
    fn unmatched_pattern_names_the_corners() {
        let s = |v: i64, d| CornerState { value: IBig::from(v), direction: d };
        let c = CellCorners([s(0, U), s(0, D), s(0, U), s(0, D)]);
        assert!(match_pattern(&c).is_none());
    }
}
