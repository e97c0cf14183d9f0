//! The discrete grid: five affine color regimes and the piecewise value/direction
//! assignment at every lattice point.

use std::fmt;
use std::sync::Arc;

use dashu::integer::IBig;
use dashu::rational::RBig;
use serde::{Deserialize, Serialize};

use crate::iter_problems::{IterInstance, Node};

/// Side length `N = 6·2^n + 6` of the grid for exponent `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridGeometry {
    pub n: u32,
    pub side: i64,
}

impl GridGeometry {
    pub fn new(n: u32) -> Self {
        GridGeometry { n, side: 6 * (1i64 << n) + 6 }
    }

    /// `6·2^n`, the offset used by the boundary regions.
    pub fn t(&self) -> i64 {
        self.side - 6
    }

    pub fn in_lattice(&self, a: i64, b: i64) -> bool {
        (0..=self.side).contains(&a) && (0..=self.side).contains(&b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Black,
    Red,
    Green,
    Orange,
}

impl Color {
    pub const ALL: [Color; 5] = [Color::Blue, Color::Black, Color::Red, Color::Green, Color::Orange];

    pub fn name(self) -> &'static str {
        match self {
            Color::Blue => "blue",
            Color::Black => "black",
            Color::Red => "red",
            Color::Green => "green",
            Color::Orange => "orange",
        }
    }
}

impl std::str::FromStr for Color {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        Color::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| crate::Error::Domain(format!("unknown color {s:?}")))
    }
}

/// Value of a color regime at `(x, y)` on a grid of side `side`.
pub fn regime_value(color: Color, x: i64, y: i64, side: i64) -> IBig {
    let n = IBig::from(side);
    let (x, y) = (IBig::from(x), IBig::from(y));
    let ten = |e: u32| IBig::from(10u8).pow(e as usize);
    match color {
        Color::Blue => ten(4) * n - x - y,
        Color::Black => (ten(6) + IBig::ONE) * n + x - y,
        Color::Red => ten(4) * (ten(4) - IBig::from(2)) * n - x + y,
        Color::Green => ten(15) * n + x - y,
        Color::Orange => ten(16) * n - x + y,
    }
}

/// Direction of steepest descent `−∇f` at a lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Left,
    Down,
    Right,
}

impl Direction {
    /// `2·∇f` as integers.
    pub fn doubled_gradient(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, -1),
            Direction::Left => (1, 0),
            Direction::Down => (0, 1),
            Direction::Right => (-1, 0),
        }
    }

    pub fn gradient(self) -> (RBig, RBig) {
        let (gx, gy) = self.doubled_gradient();
        let half = |v: i64| RBig::from(v) / RBig::from(2);
        (half(gx), half(gy))
    }

    pub fn from_doubled_gradient(g: (i64, i64)) -> Option<Self> {
        [Direction::Up, Direction::Left, Direction::Down, Direction::Right]
            .into_iter()
            .find(|d| d.doubled_gradient() == g)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Value and gradient prescribed at one lattice point. Pure second derivatives are −1/2
/// everywhere and all mixed derivatives vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerAssignment {
    pub color: Color,
    pub value: IBig,
    pub direction: Direction,
}

/// `Columns` and `Solutions` for an ITER instance, with the piecewise grid rules.
#[derive(Clone, Debug)]
pub struct ColorField {
    inst: Arc<IterInstance>,
    geom: GridGeometry,
    columns: Option<Vec<bool>>,
    solutions: Option<Vec<bool>>,
}

impl ColorField {
    pub fn new(inst: Arc<IterInstance>) -> Self {
        let geom = GridGeometry::new(inst.n());
        let (columns, solutions) = if inst.is_table() {
            let cols = (1..=inst.size()).map(|k| inst.c(k) != k).collect();
            let sols = (1..=inst.size()).map(|k| inst.is_solution(k).unwrap_or(false)).collect();
            (Some(cols), Some(sols))
        } else {
            (None, None)
        };
        ColorField { inst, geom, columns, solutions }
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geom
    }

    pub fn instance(&self) -> &Arc<IterInstance> {
        &self.inst
    }

    fn node(&self, k: i64) -> Option<Node> {
        (k >= 1 && (k as u64) <= self.inst.size()).then_some(k as u64)
    }

    fn c(&self, k: i64) -> i64 {
        self.inst.c(k as u64) as i64
    }

    pub fn is_node(&self, k: i64) -> bool {
        self.node(k).is_some()
    }

    pub fn is_column(&self, k: i64) -> bool {
        match (self.node(k), &self.columns) {
            (None, _) => false,
            (Some(v), Some(cols)) => cols[(v - 1) as usize],
            (Some(v), None) => self.inst.c(v) != v,
        }
    }

    /// `C(k) < k` or (`C(k) > k` and `C(C(k)) = C(k)`).
    pub fn is_solution(&self, k: i64) -> bool {
        match (self.node(k), &self.solutions) {
            (None, _) => false,
            (Some(v), Some(sols)) => sols[(v - 1) as usize],
            (Some(v), None) => self.inst.is_solution(v).unwrap_or(false),
        }
    }

    pub fn columns(&self) -> Vec<Node> {
        (1..=self.inst.size() as i64).filter(|&k| self.is_column(k)).map(|k| k as u64).collect()
    }

    pub fn solutions(&self) -> Vec<Node> {
        (1..=self.inst.size() as i64).filter(|&k| self.is_solution(k)).map(|k| k as u64).collect()
    }

    /// Whether a blue corridor leaves column `l`: `C(l) > l` and `C(l) ∈ Columns`.
    pub fn has_corridor(&self, l: i64) -> bool {
        self.is_node(l) && self.c(l) > l && self.is_column(self.c(l))
    }

    /// Color of the lattice point `(a, b)`; clauses are tried in order.
    pub fn color(&self, a: i64, b: i64) -> Color {
        let t = self.geom.t();
        let side = self.geom.side;
        let k4 = (a + 4).div_euclid(6);
        let k3 = (a + 3).div_euclid(6);
        let k0 = a.div_euclid(6);
        let l = b.div_euclid(6);
        let corridor_row = matches!(b.rem_euclid(6), 1 | 2);

        let blue = (self.is_column(k4) && 6 * k4 - 3 <= a && a <= 6 * k4 - 1 && 3 <= b && b <= 6 * k4 + 2)
            || (b == 2 && self.is_column(k4) && a == 6 * k4 - 2)
            || (self.is_node(k0)
                && self.c(k0) > k0
                && self.is_column(self.c(k0))
                && 6 * k0 <= a
                && a <= 6 * k0 + 2
                && 6 * k0 + 1 <= b
                && b <= 6 * k0 + 2)
            || (corridor_row
                && self.has_corridor(l)
                && self.is_column(k3)
                && self.c(l) > k3
                && k3 > l
                && 6 * k3 + 1 <= a
                && a <= 6 * k3 + 2)
            || (corridor_row
                && self.has_corridor(l)
                && self.is_node(k3)
                && !self.is_column(k3)
                && self.c(l) > k3
                && k3 > l
                && 6 * k3 - 3 <= a
                && a <= 6 * k3 + 2);
        if blue {
            return Color::Blue;
        }
        let black = (b == 2 && self.is_column(k4) && 6 * k4 - 1 <= a && a <= 6 * k4 + 1)
            || (b == 2 && self.is_node(k4) && !self.is_column(k4) && 6 * k4 - 4 <= a && a <= 6 * k4 + 1)
            || (b == 2 && t + 2 <= a && a <= t + 4);
        if black {
            return Color::Black;
        }
        if (2 <= a && a <= t + 6 && (0..=1).contains(&b)) || (t + 5 <= a && a <= t + 6 && 2 <= b && b <= t + 4) {
            return Color::Green;
        }
        if ((0..=1).contains(&a) && (0..=side).contains(&b)) || (2 <= a && a <= side && t + 5 <= b && b <= side) {
            return Color::Orange;
        }
        Color::Red
    }

    /// Direction of `−∇f` at `(a, b)`; clauses are tried in order.
    pub fn direction(&self, a: i64, b: i64) -> Direction {
        let t = self.geom.t();
        let side = self.geom.side;
        let k4 = (a + 4).div_euclid(6);
        let k3 = (a + 3).div_euclid(6);
        let k5 = (a + 5).div_euclid(6);
        let k0 = a.div_euclid(6);
        let l = b.div_euclid(6);
        let b1 = b.rem_euclid(6) == 1;

        let up = (2 <= a && a <= t + 6 && (0..=1).contains(&b))
            || (self.is_column(k4) && 6 * k4 - 2 <= a && a <= 6 * k4 - 1 && 2 <= b && b <= 6 * k4 + 1)
            || (self.is_solution(k4) && 6 * k4 - 2 <= a && a <= 6 * k4 - 1 && b == 6 * k4 + 2)
            || (self.is_node(k0)
                && self.c(k0) > k0
                && self.is_column(self.c(k0))
                && 6 * k0 <= a
                && a <= 6 * k0 + 2
                && b == 6 * k0 + 1)
            || (b1
                && self.has_corridor(l)
                && self.is_column(k3)
                && self.c(l) > k3
                && k3 > l
                && 6 * k3 + 1 <= a
                && a <= 6 * k3 + 2)
            || (b1
                && self.has_corridor(l)
                && self.is_node(k3)
                && !self.is_column(k3)
                && self.c(l) > k3
                && k3 > l
                && 6 * k3 - 3 <= a
                && a <= 6 * k3 + 2)
            || (b1 && self.has_corridor(l) && self.is_column(k4) && self.c(l) >= k4 && k4 > l && a == 6 * k4 - 3);
        if up {
            return Direction::Up;
        }
        let left = (b == 2 && self.is_column(k4) && 6 * k4 <= a && a <= 6 * k4 + 1)
            || (b == 2 && self.is_node(k4) && !self.is_column(k4) && 6 * k4 - 4 <= a && a <= 6 * k4 + 1)
            || (b == 2 && t + 2 <= a && a <= t + 4)
            || (t + 5 <= a && a <= t + 6 && 2 <= b && b <= t + 4);
        if left {
            return Direction::Left;
        }
        let down = (2 <= a && a <= side && t + 5 <= b && b <= side)
            || (a == t + 4 && 3 <= b && b <= t + 4)
            || (self.is_solution(k4) && 6 * k4 - 2 <= a && a <= 6 * k4 - 1 && 6 * k4 + 3 <= b && b <= t + 4)
            || (b == 3 && self.is_column(k5) && k5 > 1 && a == 6 * k5 - 5);
        if down {
            return Direction::Down;
        }
        Direction::Right
    }

    /// Full assignment at a lattice point of `{0..N}²`.
    pub fn assignment(&self, a: i64, b: i64) -> CornerAssignment {
        debug_assert!(self.geom.in_lattice(a, b), "({a}, {b}) outside the corner lattice");
        let color = self.color(a, b);
        CornerAssignment {
            color,
            value: regime_value(color, a, b, self.geom.side),
            direction: self.direction(a, b),
        }
    }
}
