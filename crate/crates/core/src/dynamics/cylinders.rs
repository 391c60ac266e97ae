//! Enumeration of cylinder representatives with orbit sums.
//!
//! Words are grown right to left: the representative of `a·w` is the
//! inverse branch `a` applied to the representative of `w`, which is also
//! `f` of the new representative. Orbit sums therefore extend by one term per
//! level and never require forward iteration.

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::linalg::LogProduct;

use super::{count_admissible_words, ExpandingMap, Point, Word};

/// Single-point potential evaluated with the map acting at that position.
pub type AdditiveFn<'a> = dyn Fn(&ExpandingMap, Point) -> f64 + Send + Sync + 'a;

/// Parameters of a cylinder sweep.
pub struct SweepSpec<'a> {
    /// `fibers[j]` is the map applied at position `j`; all share one
    /// alphabet and adjacency. A deterministic system repeats one map.
    pub fibers: Vec<&'a ExpandingMap>,
    /// Seed point per last symbol; defaults to the piece centers of the last fiber.
    pub seeds: Option<Vec<Point>>,
    /// Cocycle block length; log-norms are summed over consecutive blocks.
    pub block: usize,
    pub additive: Option<&'a AdditiveFn<'a>>,
    pub cap: usize,
}

impl<'a> SweepSpec<'a> {
    pub fn deterministic(map: &'a ExpandingMap, n: usize, cap: usize) -> Self {
        SweepSpec { fibers: vec![map; n], seeds: None, block: n, additive: None, cap }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub word: Word,
    pub point: Point,
    /// `Σ_j φ(x_j)` for the additive potential, 0 without one.
    pub birkhoff: f64,
    /// `Σ_blocks log‖D f^block‖` along the orbit.
    pub log_norm: f64,
    /// `Σ_blocks log m(D f^block)` along the orbit.
    pub log_conorm: f64,
}

#[derive(Clone)]
struct Node {
    rev: Vec<u8>,
    point: Point,
    birkhoff: f64,
    block: LogProduct,
    sum_norm: f64,
    sum_conorm: f64,
}

/// Enumerates every admissible word of length `fibers.len()` with its
/// representative and orbit sums, in colexicographic order (last symbol
/// varies slowest).
pub fn sweep(spec: &SweepSpec<'_>) -> Result<Vec<SweepRow>> {
    let n = spec.fibers.len();
    assert!(n >= 1, "sweep depth must be positive");
    let block = spec.block.clamp(1, n);
    let last = spec.fibers[n - 1];
    let k = last.branch_count();
    let count = count_admissible_words(last, n);
    if count > spec.cap {
        return Err(LabError::MatrixTooLarge { cylinders: count, cap: spec.cap });
    }
    let dim = last.dim();

    // position j closes a block when j is a multiple of `block` from the left
    let finish = |node: &mut Node, j: usize| -> Result<()> {
        if j.is_multiple_of(block) {
            let (a, b) = node.block.log_norms()?;
            node.sum_norm += a;
            node.sum_conorm += b;
            node.block = LogProduct::new(dim);
        }
        Ok(())
    };
    let visit = |node: &mut Node, j: usize, a: u8| -> Result<()> {
        let map = spec.fibers[j];
        if let Some(phi) = spec.additive {
            node.birkhoff += phi(map, node.point);
        }
        node.block.push_right(&map.branch_derivative(a as usize, node.point));
        finish(node, j)
    };

    let mut level: Vec<Node> = Vec::with_capacity(k);
    for a in 0..k {
        let point = match &spec.seeds {
            Some(s) => s[a],
            None => last.center(a),
        };
        let mut node = Node {
            rev: vec![a as u8],
            point,
            birkhoff: 0.0,
            block: LogProduct::new(dim),
            sum_norm: 0.0,
            sum_conorm: 0.0,
        };
        visit(&mut node, n - 1, a as u8)?;
        level.push(node);
    }

    for j in (0..n - 1).rev() {
        let map = spec.fibers[j];
        level = level
            .par_iter()
            .with_min_len(256)
            .flat_map_iter(|parent| {
                let next = *parent.rev.last().unwrap() as usize;
                (0..k).filter(move |&a| map.allowed(a, next)).map(move |a| {
                    let mut node = parent.clone();
                    node.rev.push(a as u8);
                    node.point = map.branch_inverse(a, parent.point);
                    visit(&mut node, j, a as u8).map(|_| node)
                })
            })
            .collect::<Result<Vec<_>>>()?;
    }

    Ok(level
        .into_iter()
        .map(|node| {
            let mut symbols = node.rev;
            symbols.reverse();
            SweepRow {
                word: Word::from_symbols_unchecked(symbols),
                point: node.point,
                birkhoff: node.birkhoff,
                log_norm: node.sum_norm,
                log_conorm: node.sum_conorm,
            }
        })
        .collect())
}

/// Words and representatives of all `n`-cylinders of a map.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSet {
    pub depth: usize,
    pub words: Vec<Word>,
    pub points: Vec<Point>,
}

impl CylinderSet {
    pub fn enumerate(map: &ExpandingMap, n: usize, cap: usize) -> Result<CylinderSet> {
        let rows = sweep(&SweepSpec::deterministic(map, n, cap))?;
        let (words, points) = rows.into_iter().map(|r| (r.word, r.point)).unzip();
        Ok(CylinderSet { depth: n, words, points })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_markov_map;

    #[test]
    fn sweep_points_equal_cylinder_points_bitwise() {
        for spec in ["doubling", "cookie_cutter r1=2 r2=4", "golden", "circle n=2 a=0.05"] {
            let m = build_markov_map(spec).unwrap();
            let set = CylinderSet::enumerate(&m, 7, 1 << 20).unwrap();
            for (w, p) in set.words.iter().zip(&set.points) {
                assert_eq!(m.cylinder_point(w), *p, "{spec} {w}");
            }
        }
    }

    #[test]
    fn sweep_sums_match_forward_cocycle() {
        let m = build_markov_map("circle n=2 a=0.05").unwrap();
        let rows = sweep(&SweepSpec::deterministic(&m, 6, 1 << 20)).unwrap();
        for r in rows.iter().step_by(7) {
            let c = m.cocycle(r.point, 6).unwrap();
            assert!((c.log_norm - r.log_norm).abs() < 1e-9);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let m = build_markov_map("doubling").unwrap();
        assert!(matches!(
            sweep(&SweepSpec::deterministic(&m, 12, 1000)),
            Err(LabError::MatrixTooLarge { cylinders: 4096, cap: 1000 })
        ));
    }
}
