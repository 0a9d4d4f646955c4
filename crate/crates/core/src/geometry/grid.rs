//! Uniform bucket grid over axis-aligned boxes.

use super::Aabb;
use std::collections::HashMap;

/// Items are registered in every cell their box overlaps; queries return a
/// superset of the items whose boxes overlap the query box.
#[derive(Clone, Debug)]
pub struct GridIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    boxes: Vec<Option<Aabb>>,
}

impl GridIndex {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell size must be positive");
        GridIndex {
            cell,
            buckets: HashMap::new(),
            boxes: Vec::new(),
        }
    }

    /// Builds an index over `(id, extent)` pairs.
    pub fn build<I: IntoIterator<Item = (usize, Aabb)>>(items: I, cell: f64) -> Self {
        let mut g = GridIndex::new(cell);
        for (id, b) in items {
            g.insert(id, b);
        }
        g
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn key(&self, v: f64) -> i64 {
        (v / self.cell).floor().clamp(i64::MIN as f64 / 4.0, i64::MAX as f64 / 4.0) as i64
    }

    fn span(&self, b: &Aabb) -> (i64, i64, i64, i64) {
        (self.key(b.min.x), self.key(b.max.x), self.key(b.min.y), self.key(b.max.y))
    }

    pub fn insert(&mut self, id: usize, b: Aabb) {
        if id >= self.boxes.len() {
            self.boxes.resize(id + 1, None);
        }
        self.boxes[id] = Some(b);
        let (x0, x1, y0, y1) = self.span(&b);
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                self.buckets.entry((cx, cy)).or_default().push(id);
            }
        }
    }

    /// Candidate ids whose boxes overlap `region`, sorted and deduplicated.
    pub fn query(&self, region: &Aabb) -> Vec<usize> {
        let mut out = Vec::new();
        self.query_into(region, &mut out);
        out
    }

    pub fn query_into(&self, region: &Aabb, out: &mut Vec<usize>) {
        out.clear();
        if region.is_empty() {
            return;
        }
        let (x0, x1, y0, y1) = self.span(region);
        let cells = (x1 - x0 + 1).saturating_mul(y1 - y0 + 1);
        if cells as usize > self.buckets.len() {
            for ids in self.buckets.values() {
                self.collect(ids, region, out);
            }
        } else {
            for cx in x0..=x1 {
                for cy in y0..=y1 {
                    if let Some(ids) = self.buckets.get(&(cx, cy)) {
                        self.collect(ids, region, out);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }

    fn collect(&self, ids: &[usize], region: &Aabb, out: &mut Vec<usize>) {
        for &id in ids {
            if let Some(b) = &self.boxes[id] {
                if b.overlaps(region) {
                    out.push(id);
                }
            }
        }
    }
}
