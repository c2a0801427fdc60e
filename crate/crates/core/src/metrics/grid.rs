//! Uniform hash grid over point positions.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{is_match, PointSample};
use crate::Vec3;

type Cell = (i64, i64, i64);

/// Points bucketed by cell. The cell edge is the query radius inflated by a
/// relative 1e-9 so rounding in the cell index can never hide a neighbor
/// outside the 27-cell block.
#[derive(Debug)]
pub struct PointGrid {
    inv_cell: f64,
    ranges: HashMap<Cell, (u32, u32)>,
    order: Vec<u32>,
}

impl PointGrid {
    pub fn new(points: &[PointSample], radius: f64) -> Self {
        let inv_cell = 1.0 / (radius * (1.0 + 1e-9));
        let mut keyed: Vec<(Cell, u32)> = points
            .par_iter()
            .enumerate()
            .map(|(i, p)| (cell_of(&p.position, inv_cell), i as u32))
            .collect();
        keyed.par_sort_unstable();
        let mut ranges = HashMap::new();
        let mut start = 0;
        while start < keyed.len() {
            let key = keyed[start].0;
            let end = start + keyed[start..].iter().take_while(|k| k.0 == key).count();
            ranges.insert(key, (start as u32, end as u32));
            start = end;
        }
        Self {
            inv_cell,
            ranges,
            order: keyed.into_iter().map(|(_, i)| i).collect(),
        }
    }

    /// Calls `f` with the index of every point in the 27 cells around `p`.
    pub fn for_each_candidate(&self, p: &Vec3, mut f: impl FnMut(usize)) {
        let (cx, cy, cz) = cell_of(p, self.inv_cell);
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(&(a, b)) = self.ranges.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &i in &self.order[a as usize..b as usize] {
                            f(i as usize);
                        }
                    }
                }
            }
        }
    }

    fn any_match(&self, q: &PointSample, targets: &[PointSample], dist2: f64, cos_a: f64, unsigned: bool) -> bool {
        let (cx, cy, cz) = cell_of(&q.position, self.inv_cell);
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(&(a, b)) = self.ranges.get(&(cx + dx, cy + dy, cz + dz)) {
                        let hit = self.order[a as usize..b as usize]
                            .iter()
                            .any(|&i| is_match(q, &targets[i as usize], dist2, cos_a, unsigned));
                        if hit {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Number of `queries` with at least one match among `targets`, the
    /// points this grid was built from.
    pub fn count_matched(
        &self,
        queries: &[PointSample],
        targets: &[PointSample],
        dist2: f64,
        cos_a: f64,
        unsigned: bool,
    ) -> usize {
        queries
            .par_iter()
            .filter(|q| self.any_match(q, targets, dist2, cos_a, unsigned))
            .count()
    }
}

fn cell_of(p: &Vec3, inv_cell: f64) -> Cell {
    (
        (p.x * inv_cell).floor() as i64,
        (p.y * inv_cell).floor() as i64,
        (p.z * inv_cell).floor() as i64,
    )
}
