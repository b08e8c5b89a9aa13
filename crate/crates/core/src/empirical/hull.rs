//! Upper concave envelope of a planar point set.

use crate::scalar::Scalar;

/// Least concave majorant of finitely many points, stored as its vertices
/// with strictly increasing abscissae and strictly decreasing slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveHull<T> {
    vertices: Vec<(T, T)>,
}

fn turns_up<T: Scalar>(o: (T, T), a: (T, T), b: (T, T)) -> bool {
    // Nonnegative cross product: `a` lies on or below the chord `o -> b`.
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0) >= T::zero()
}

impl<T: Scalar> ConcaveHull<T> {
    /// Monotone chain over points sorted by abscissa. Collinear interior
    /// points are dropped; among equal abscissae the highest point is kept.
    pub fn new(points: &[(T, T)]) -> Self {
        let mut vertices: Vec<(T, T)> = Vec::with_capacity(points.len());
        for &p in points {
            if let Some(last) = vertices.last() {
                debug_assert!(p.0 >= last.0, "points must be sorted by abscissa");
                if p.0 == last.0 {
                    if p.1 <= last.1 {
                        continue;
                    }
                    vertices.pop();
                }
            }
            while vertices.len() >= 2
                && turns_up(vertices[vertices.len() - 2], vertices[vertices.len() - 1], p)
            {
                vertices.pop();
            }
            vertices.push(p);
        }
        Self { vertices }
    }

    pub fn vertices(&self) -> &[(T, T)] {
        &self.vertices
    }

    fn segment(&self, x: T) -> usize {
        // Index of the vertex starting the segment containing x.
        let k = self.vertices.partition_point(|v| v.0 <= x);
        k.saturating_sub(1).min(self.vertices.len().saturating_sub(2))
    }

    fn slope_of(&self, k: usize) -> T {
        let (a, b) = (self.vertices[k], self.vertices[k + 1]);
        (b.1 - a.1) / (b.0 - a.0)
    }

    /// Envelope height, linear between vertices and constant beyond the ends.
    pub fn value(&self, x: T) -> T {
        match self.vertices.len() {
            0 => T::zero(),
            1 => self.vertices[0].1,
            _ => {
                let (first, last) = (self.vertices[0], self.vertices[self.vertices.len() - 1]);
                if x <= first.0 {
                    return first.1;
                }
                if x >= last.0 {
                    return last.1;
                }
                let k = self.segment(x);
                let a = self.vertices[k];
                a.1 + self.slope_of(k) * (x - a.0)
            }
        }
    }

    /// Slope of the segment to the right of `x` (left segment at the last vertex).
    pub fn slope(&self, x: T) -> T {
        if self.vertices.len() < 2 {
            return T::zero();
        }
        self.slope_of(self.segment(x))
    }

    /// Slope of the segment ending at or after `x` (first segment at the first vertex).
    /// For `x >= 0`, points within relative rounding (`1e-12`) of a vertex count as that vertex.
    pub fn slope_before(&self, x: T) -> T {
        if self.vertices.len() < 2 {
            return T::zero();
        }
        let cut = x - x * T::lit(1e-12);
        let k = self.vertices.partition_point(|v| v.0 < cut);
        self.slope_of(k.saturating_sub(1).min(self.vertices.len() - 2))
    }

    pub fn slopes(&self) -> Vec<T> {
        (0..self.vertices.len().saturating_sub(1))
            .map(|k| self.slope_of(k))
            .collect()
    }

    /// Leftmost vertex attaining the maximum height.
    pub fn argmax(&self) -> Option<(T, T)> {
        let mut best: Option<(T, T)> = None;
        for &v in &self.vertices {
            if best.map_or(true, |b| v.1 > b.1) {
                best = Some(v);
            }
        }
        best
    }
}
