//! Scatterer shapes and their voxelisation on a uniform axis-aligned grid.

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, VieError};
use crate::vec3::{self, Vec3};

/// Axis-aligned box `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn contains(&self, x: Vec3) -> bool {
        (0..3).all(|a| x[a] >= self.min[a] && x[a] <= self.max[a])
    }

    pub fn extent(&self) -> Vec3 {
        vec3::sub(self.max, self.min)
    }

    pub fn diameter(&self) -> f64 {
        vec3::norm(self.extent())
    }

    /// Shortest edge; equals the diameter for a sphere.
    pub fn min_extent(&self) -> f64 {
        let e = self.extent();
        e[0].min(e[1]).min(e[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeKind {
    Sphere { center: Vec3, radius: f64 },
    Cuboid { center: Vec3, half: Vec3 },
    Ellipsoid { center: Vec3, semi_axes: Vec3 },
    Custom,
}

type Predicate = Arc<dyn Fn(Vec3) -> bool + Send + Sync>;

/// The scatterer `D`, described by a pure inside/outside predicate.
#[derive(Clone)]
pub struct ScattererShape {
    kind: ShapeKind,
    bounding_box: Aabb,
    inside: Predicate,
}

impl fmt::Debug for ScattererShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScattererShape")
            .field("kind", &self.kind)
            .field("bounding_box", &self.bounding_box)
            .finish()
    }
}

impl ScattererShape {
    pub fn sphere(center: Vec3, radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        let r2 = radius * radius;
        Ok(Self {
            kind: ShapeKind::Sphere { center, radius },
            bounding_box: Aabb {
                min: center.map(|c| c - radius),
                max: center.map(|c| c + radius),
            },
            inside: Arc::new(move |x| {
                let d = vec3::sub(x, center);
                vec3::dot(d, d) < r2
            }),
        })
    }

    /// Axis-aligned cuboid with full side lengths `sides`.
    pub fn cuboid(center: Vec3, sides: Vec3) -> Result<Self> {
        for s in sides {
            positive("side", s)?;
        }
        let half = vec3::scale(sides, 0.5);
        Ok(Self {
            kind: ShapeKind::Cuboid { center, half },
            bounding_box: Aabb {
                min: vec3::sub(center, half),
                max: vec3::add(center, half),
            },
            inside: Arc::new(move |x| (0..3).all(|a| (x[a] - center[a]).abs() < half[a])),
        })
    }

    pub fn cube(center: Vec3, side: f64) -> Result<Self> {
        Self::cuboid(center, [side; 3])
    }

    pub fn ellipsoid(center: Vec3, semi_axes: Vec3) -> Result<Self> {
        for s in semi_axes {
            positive("semi-axis", s)?;
        }
        Ok(Self {
            kind: ShapeKind::Ellipsoid { center, semi_axes },
            bounding_box: Aabb {
                min: vec3::sub(center, semi_axes),
                max: vec3::add(center, semi_axes),
            },
            inside: Arc::new(move |x| {
                (0..3)
                    .map(|a| ((x[a] - center[a]) / semi_axes[a]).powi(2))
                    .sum::<f64>()
                    < 1.0
            }),
        })
    }

    /// Arbitrary body. Points outside `bounding_box` are always reported outside.
    pub fn custom<F>(bounding_box: Aabb, inside: F) -> Result<Self>
    where
        F: Fn(Vec3) -> bool + Send + Sync + 'static,
    {
        let e = bounding_box.extent();
        if !e.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(VieError::Parameter("custom shape needs a finite, non-degenerate bounding box".into()));
        }
        Ok(Self {
            kind: ShapeKind::Custom,
            bounding_box,
            inside: Arc::new(inside),
        })
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn bounding_box(&self) -> Aabb {
        self.bounding_box
    }

    pub fn contains(&self, x: Vec3) -> bool {
        self.bounding_box.contains(x) && (self.inside)(x)
    }

    /// Outward unit normal at the surface point closest to `x`, for the
    /// analytic shapes. Returns `(surface point, normal)`.
    pub fn surface_projection(&self, x: Vec3) -> Option<(Vec3, Vec3)> {
        match self.kind {
            ShapeKind::Sphere { center, radius } => {
                let d = vec3::sub(x, center);
                let n = vec3::norm(d);
                if n == 0.0 {
                    return None;
                }
                let nrm = vec3::scale(d, 1.0 / n);
                Some((vec3::add(center, vec3::scale(nrm, radius)), nrm))
            }
            ShapeKind::Ellipsoid { center, semi_axes } => {
                // radial projection; the normal is the gradient of the level set
                let d = vec3::sub(x, center);
                let s: f64 = (0..3).map(|a| (d[a] / semi_axes[a]).powi(2)).sum::<f64>().sqrt();
                if s == 0.0 {
                    return None;
                }
                let p = vec3::scale(d, 1.0 / s);
                let g = [0, 1, 2].map(|a| p[a] / (semi_axes[a] * semi_axes[a]));
                let gn = vec3::norm(g);
                Some((vec3::add(center, p), vec3::scale(g, 1.0 / gn)))
            }
            ShapeKind::Cuboid { center, half } => {
                let d = vec3::sub(x, center);
                let axis = (0..3)
                    .max_by(|&a, &b| (d[a].abs() / half[a]).total_cmp(&(d[b].abs() / half[b])))
                    .unwrap();
                let mut nrm = [0.0; 3];
                nrm[axis] = d[axis].signum();
                let mut p = d;
                p[axis] = half[axis] * d[axis].signum();
                Some((vec3::add(center, p), nrm))
            }
            ShapeKind::Custom => None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(VieError::Parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

const NO_NODE: u32 = u32::MAX;

/// Staircase voxelisation of a scatterer.
///
/// Cell `(i, j, l)` occupies `origin + h * [i, i+1] x [j, j+1] x [l, l+1]`;
/// node `(i, j, l)` sits at `origin + h * (i, j, l)` with `i` in `0..=nx`.
#[derive(Debug, Clone)]
pub struct ScattererGrid {
    origin: Vec3,
    h: f64,
    dims: [usize; 3],
    cell_mask: Vec<bool>,
    interior_cells: Vec<[usize; 3]>,
    interior_nodes: Vec<[usize; 3]>,
    node_lookup: Vec<u32>,
}

impl ScattererGrid {
    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    pub fn interior_cells(&self) -> &[[usize; 3]] {
        &self.interior_cells
    }

    pub fn interior_nodes(&self) -> &[[usize; 3]] {
        &self.interior_nodes
    }

    pub fn cell_center(&self, c: [usize; 3]) -> Vec3 {
        [0, 1, 2].map(|a| self.origin[a] + (c[a] as f64 + 0.5) * self.h)
    }

    pub fn cell_min_corner(&self, c: [usize; 3]) -> Vec3 {
        [0, 1, 2].map(|a| self.origin[a] + c[a] as f64 * self.h)
    }

    pub fn node_position(&self, n: [usize; 3]) -> Vec3 {
        [0, 1, 2].map(|a| self.origin[a] + n[a] as f64 * self.h)
    }

    pub fn is_interior_cell(&self, c: [i64; 3]) -> bool {
        if (0..3).any(|a| c[a] < 0 || c[a] >= self.dims[a] as i64) {
            return false;
        }
        self.cell_mask[self.cell_linear([c[0] as usize, c[1] as usize, c[2] as usize])]
    }

    /// Basis index of the node, if it is an interior node.
    pub fn node_basis_index(&self, n: [i64; 3]) -> Option<usize> {
        if (0..3).any(|a| n[a] < 0 || n[a] > self.dims[a] as i64) {
            return None;
        }
        let idx = self.node_linear([n[0] as usize, n[1] as usize, n[2] as usize]);
        match self.node_lookup[idx] {
            NO_NODE => None,
            m => Some(m as usize),
        }
    }

    /// Cell containing `x`, if `x` lies in the grid.
    pub fn cell_of_point(&self, x: Vec3) -> Option<[usize; 3]> {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let t = (x[a] - self.origin[a]) / self.h;
            if !(t >= 0.0 && t <= self.dims[a] as f64) {
                return None;
            }
            c[a] = (t.floor() as usize).min(self.dims[a] - 1);
        }
        Some(c)
    }

    /// Inclusive node-index bounds `(lo, hi)` spanned by the interior nodes.
    pub fn node_span(&self) -> ([usize; 3], [usize; 3]) {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for n in &self.interior_nodes {
            for a in 0..3 {
                lo[a] = lo[a].min(n[a]);
                hi[a] = hi[a].max(n[a]);
            }
        }
        (lo, hi)
    }

    fn cell_linear(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    fn node_linear(&self, n: [usize; 3]) -> usize {
        (n[0] * (self.dims[1] + 1) + n[1]) * (self.dims[2] + 1) + n[2]
    }
}

/// Marks the cells whose centres satisfy the inside predicate, then the
/// nodes whose eight adjacent cells are all interior.
pub fn voxelize(shape: &ScattererShape, h: f64) -> Result<ScattererGrid> {
    if !(h.is_finite() && h > 0.0) {
        return Err(VieError::Parameter(format!("grid spacing must be positive, got {h}")));
    }
    let bb = shape.bounding_box();
    let extent = bb.extent();
    let shortest = extent.iter().cloned().fold(f64::INFINITY, f64::min);
    if h >= shortest {
        return Err(VieError::Parameter(format!(
            "grid spacing {h} is not smaller than the shortest bounding-box edge {shortest}"
        )));
    }
    let dims = extent.map(|e| ((e / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize);
    let origin = bb.min;
    let mut grid = ScattererGrid {
        origin,
        h,
        dims,
        cell_mask: vec![false; dims[0] * dims[1] * dims[2]],
        interior_cells: Vec::new(),
        interior_nodes: Vec::new(),
        node_lookup: vec![NO_NODE; (dims[0] + 1) * (dims[1] + 1) * (dims[2] + 1)],
    };
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for l in 0..dims[2] {
                let c = [i, j, l];
                if shape.contains(grid.cell_center(c)) {
                    let idx = grid.cell_linear(c);
                    grid.cell_mask[idx] = true;
                    grid.interior_cells.push(c);
                }
            }
        }
    }
    if grid.interior_cells.is_empty() {
        return Err(VieError::EmptyScatterer);
    }
    for i in 1..dims[0] {
        for j in 1..dims[1] {
            for l in 1..dims[2] {
                let all_inside = (0..8).all(|corner| {
                    let c = [
                        i as i64 - 1 + (corner & 1) as i64,
                        j as i64 - 1 + ((corner >> 1) & 1) as i64,
                        l as i64 - 1 + ((corner >> 2) & 1) as i64,
                    ];
                    grid.is_interior_cell(c)
                });
                if all_inside {
                    let idx = grid.node_linear([i, j, l]);
                    grid.node_lookup[idx] = grid.interior_nodes.len() as u32;
                    grid.interior_nodes.push([i, j, l]);
                }
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_cell_count_tracks_volume() {
        let a = 1.0;
        let s = ScattererShape::sphere([0.0; 3], a).unwrap();
        let g = voxelize(&s, a / 4.0).unwrap();
        let expected = 4.0 * PI / 3.0 * 64.0;
        let n = g.interior_cells().len() as f64;
        assert!((n - expected).abs() / expected < 0.2, "{n} vs {expected}");
    }

    #[test]
    fn aligned_cube_tiles_exactly() {
        for n in [2usize, 5, 7] {
            let s = ScattererShape::cube([0.3, -0.1, 2.0], 1.4).unwrap();
            let g = voxelize(&s, 1.4 / n as f64).unwrap();
            assert_eq!(g.dims(), [n; 3]);
            assert_eq!(g.interior_cells().len(), n * n * n);
            assert_eq!(g.interior_nodes().len(), (n - 1).pow(3));
        }
    }

    #[test]
    fn halving_spacing_scales_count_by_eight() {
        let s = ScattererShape::ellipsoid([0.0; 3], [1.0, 0.8, 0.6]).unwrap();
        let coarse = voxelize(&s, 0.1).unwrap().interior_cells().len() as f64;
        let fine = voxelize(&s, 0.05).unwrap().interior_cells().len() as f64;
        assert!((fine / coarse - 8.0).abs() < 0.8, "ratio {}", fine / coarse);
    }

    #[test]
    fn refinement_keeps_previous_interior_centres() {
        // with a 3x refinement each coarse centre is the centre of a fine cell
        let s = ScattererShape::sphere([0.0; 3], 1.0).unwrap();
        let coarse = voxelize(&s, 0.25).unwrap();
        let fine = voxelize(&s, 0.25 / 3.0).unwrap();
        for &c in coarse.interior_cells() {
            let f = c.map(|v| 3 * v as i64 + 1);
            assert!(fine.is_interior_cell(f));
        }
    }

    #[test]
    fn interior_nodes_are_strictly_inside_index_range() {
        let s = ScattererShape::sphere([0.1, 0.0, -0.2], 0.7).unwrap();
        let g = voxelize(&s, 0.1).unwrap();
        let d = g.dims();
        assert!(!g.interior_nodes().is_empty());
        for n in g.interior_nodes() {
            for a in 0..3 {
                assert!(n[a] >= 1 && n[a] < d[a]);
            }
        }
    }

    #[test]
    fn voxelize_is_deterministic() {
        let s = ScattererShape::ellipsoid([0.0; 3], [1.0, 0.5, 0.7]).unwrap();
        let a = voxelize(&s, 0.09).unwrap();
        let b = voxelize(&s, 0.09).unwrap();
        assert_eq!(a.interior_cells(), b.interior_cells());
        assert_eq!(a.interior_nodes(), b.interior_nodes());
    }

    #[test]
    fn empty_and_invalid_inputs() {
        let s = ScattererShape::custom(
            Aabb { min: [0.0; 3], max: [1.0; 3] },
            |x| vec3::norm(vec3::sub(x, [0.5; 3])) < 0.01,
        )
        .unwrap();
        assert_eq!(voxelize(&s, 0.3).unwrap_err(), VieError::EmptyScatterer);
        assert!(voxelize(&s, 0.0).is_err());
        assert!(voxelize(&s, 2.0).is_err());
    }

    #[test]
    fn predicate_is_false_outside_box() {
        let s = ScattererShape::custom(Aabb { min: [0.0; 3], max: [1.0; 3] }, |_| true).unwrap();
        assert!(s.contains([0.5; 3]));
        assert!(!s.contains([1.5, 0.5, 0.5]));
    }
}
