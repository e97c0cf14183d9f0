//! ITER and LOCALOPT instances over the node set `{1, …, 2^n}`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based node index.
pub type Node = u64;

/// Largest exponent accepted for table-backed instances.
pub const MAX_TABLE_N: u32 = 20;
/// Largest exponent accepted at all (keeps `6·2^n + 6` inside `u64`).
pub const MAX_N: u32 = 58;

/// Deterministic successor procedure for instances too large to tabulate.
pub type SuccessorFn = Arc<dyn Fn(Node) -> Node + Send + Sync>;

#[derive(Clone)]
enum Successor {
    Table(Vec<Node>),
    Procedure(SuccessorFn),
}

/// The successor map `C` of an ITER instance.
#[derive(Clone)]
pub struct IterInstance {
    n: u32,
    succ: Successor,
}

#[derive(Serialize, Deserialize)]
struct IterFile {
    n: u32,
    #[serde(rename = "C")]
    c: Vec<Node>,
}

impl IterInstance {
    /// Builds a table-backed instance; `table[v-1] = C(v)`.
    pub fn from_table(n: u32, table: Vec<Node>) -> Result<Self> {
        if n == 0 || n > MAX_TABLE_N {
            return Err(Error::Validation(format!("n must lie in 1..={MAX_TABLE_N}, got {n}")));
        }
        let size = 1u64 << n;
        if table.len() as u64 != size {
            return Err(Error::Validation(format!(
                "C must list {size} entries for n = {n}, got {}",
                table.len()
            )));
        }
        if let Some((i, &c)) = table.iter().enumerate().find(|(_, &c)| c < 1 || c > size) {
            return Err(Error::Validation(format!("C({}) = {c} is outside 1..={size}", i + 1)));
        }
        if table[0] <= 1 {
            return Err(Error::Validation(format!("C(1) must exceed 1, got {}", table[0])));
        }
        Ok(IterInstance { n, succ: Successor::Table(table) })
    }

    /// Wraps a procedure. Range and `C(1) > 1` are checked on every call.
    pub fn from_procedure(n: u32, c: SuccessorFn) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::Validation(format!("n must lie in 1..={MAX_N}, got {n}")));
        }
        let inst = IterInstance { n, succ: Successor::Procedure(c) };
        if inst.c(1) <= 1 {
            return Err(Error::Validation("C(1) must exceed 1".into()));
        }
        Ok(inst)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: IterFile = serde_json::from_str(s)?;
        Self::from_table(file.n, file.c)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// JSON form `{"n": .., "C": [..]}`; procedure-backed instances are tabulated.
    pub fn to_json(&self) -> Result<String> {
        if self.n > MAX_TABLE_N {
            return Err(Error::Validation("instance too large to tabulate".into()));
        }
        let c = (1..=self.size()).map(|v| self.c(v)).collect();
        Ok(serde_json::to_string(&IterFile { n: self.n, c })?)
    }

    /// Uniformly random table with `C(1) > 1`.
    pub fn random<R: Rng>(n: u32, rng: &mut R) -> Result<Self> {
        if n == 0 || n > MAX_TABLE_N {
            return Err(Error::Validation(format!("n must lie in 1..={MAX_TABLE_N}, got {n}")));
        }
        let size = 1u64 << n;
        let mut table: Vec<Node> = (0..size).map(|_| rng.gen_range(1..=size)).collect();
        table[0] = rng.gen_range(2..=size);
        Self::from_table(n, table)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of nodes, `2^n`.
    pub fn size(&self) -> Node {
        1u64 << self.n
    }

    pub fn contains(&self, v: Node) -> bool {
        (1..=self.size()).contains(&v)
    }

    pub fn is_table(&self) -> bool {
        matches!(self.succ, Successor::Table(_))
    }

    /// `C(v)`; panics when `v` is not a node or a procedure leaves the range.
    pub fn c(&self, v: Node) -> Node {
        assert!(self.contains(v), "node {v} outside 1..={}", self.size());
        let out = match &self.succ {
            Successor::Table(t) => t[(v - 1) as usize],
            Successor::Procedure(f) => f(v),
        };
        assert!(self.contains(out), "C({v}) = {out} outside the node range");
        out
    }

    pub fn is_solution(&self, v: Node) -> Result<bool> {
        if !self.contains(v) {
            return Err(Error::Domain(format!("node {v} outside 1..={}", self.size())));
        }
        let cv = self.c(v);
        Ok(cv < v || (cv > v && self.c(cv) == cv))
    }

    /// Least solution by exhaustive scan.
    pub fn solve_brute(&self) -> Result<Node> {
        if self.n > MAX_TABLE_N {
            return Err(Error::Validation("brute force needs n <= 20".into()));
        }
        for v in 1..=self.size() {
            if self.is_solution(v)? {
                return Ok(v);
            }
        }
        unreachable!("C(1) > 1 guarantees a solution")
    }
}

impl fmt::Debug for IterInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.succ {
            Successor::Table(t) => write!(f, "IterInstance(n={}, C={:?})", self.n, t),
            Successor::Procedure(_) => write!(f, "IterInstance(n={}, C=<procedure>)", self.n),
        }
    }
}

/// A LOCALOPT instance: potential `p` and neighbor `g` on `{1, …, 2^n}`.
pub struct LocalOptInstance<P> {
    n: u32,
    potential: Box<dyn Fn(Node) -> P + Send + Sync>,
    neighbor: Box<dyn Fn(Node) -> Node + Send + Sync>,
}

impl<P: PartialOrd> LocalOptInstance<P> {
    pub fn new(
        n: u32,
        potential: impl Fn(Node) -> P + Send + Sync + 'static,
        neighbor: impl Fn(Node) -> Node + Send + Sync + 'static,
    ) -> Self {
        LocalOptInstance { n, potential: Box::new(potential), neighbor: Box::new(neighbor) }
    }

    pub fn size(&self) -> Node {
        1u64 << self.n
    }

    pub fn is_solution(&self, v: Node) -> Result<bool> {
        if !(1..=self.size()).contains(&v) {
            return Err(Error::Domain(format!("node {v} outside 1..={}", self.size())));
        }
        let w = (self.neighbor)(v);
        Ok((self.potential)(w) >= (self.potential)(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn figure_one() -> IterInstance {
        IterInstance::from_table(3, vec![2, 5, 4, 4, 1, 6, 7, 8]).unwrap()
    }

    #[test]
    fn solution_predicate() {
        let f = figure_one();
        assert!(f.is_solution(3).unwrap());
        assert!(f.is_solution(5).unwrap());
        let t = IterInstance::from_table(1, vec![2, 2]).unwrap();
        assert!(!t.is_solution(2).unwrap());
        assert!(matches!(t.is_solution(3), Err(Error::Domain(_))));
    }

    #[test]
    fn brute_force() {
        assert_eq!(IterInstance::from_table(1, vec![2, 2]).unwrap().solve_brute().unwrap(), 1);
        assert_eq!(IterInstance::from_table(1, vec![2, 1]).unwrap().solve_brute().unwrap(), 2);
        assert_eq!(figure_one().solve_brute().unwrap(), 3);
    }

    #[test]
    fn validation() {
        assert!(IterInstance::from_json_str(r#"{"n":1,"C":[1,2]}"#).is_err());
        assert!(IterInstance::from_json_str(r#"{"n":1,"C":[2,3]}"#).is_err());
        assert!(IterInstance::from_json_str(r#"{"n":1,"C":[2]}"#).is_err());
        let ok = IterInstance::from_json_str(r#"{"n":1,"C":[2,2]}"#).unwrap();
        assert_eq!(ok.to_json().unwrap(), r#"{"n":1,"C":[2,2]}"#);
    }

    #[test]
    fn table_and_procedure_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t = IterInstance::random(4, &mut rng).unwrap();
            let table: Vec<Node> = (1..=16).map(|v| t.c(v)).collect();
            let p = IterInstance::from_procedure(4, Arc::new(move |v| table[(v - 1) as usize])).unwrap();
            for v in 1..=16 {
                assert_eq!(t.is_solution(v).unwrap(), p.is_solution(v).unwrap());
            }
            assert!(t.is_solution(t.solve_brute().unwrap()).unwrap());
        }
    }

    #[test]
    fn localopt() {
        let p = [5i64, 3];
        let g = [2u64, 2];
        let inst = LocalOptInstance::new(1, move |v| p[(v - 1) as usize], move |v| g[(v - 1) as usize]);
        assert!(!inst.is_solution(1).unwrap());
        assert!(inst.is_solution(2).unwrap());
        let fixed = LocalOptInstance::new(2, |v| v as i64, |v| v);
        assert!((1..=4).all(|v| fixed.is_solution(v).unwrap()));
    }
}
