//! The recursive 24-box maze and the assembled counterexample set.

use serde::{Deserialize, Serialize};

use super::{Box3, ObstacleSet};
use crate::error::{Error, Result};
use crate::group::HPoint;
use crate::metrics::cc_dist_vertical;

/// Corner of the parent's planar square a child plate is anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    NE,
    SW,
    NW,
    SE,
}

/// Relative placement of the children inside a parent box.
///
/// Children are thin plates stacked in `t`, one per tier, separated by equal
/// gaps. Each plate covers a square of side `span` (relative to the parent
/// side) anchored at a corner; consecutive tiers use the corners in
/// `corner_order`, cyclically, so a descending curve that stays over the
/// parent has to weave between opposite corners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeLayout {
    pub span: f64,
    pub tiers: usize,
    /// Plate thickness as a fraction of the parent `t`-height. Thin plates keep
    /// the limit set close to dimension 2 despite the planar overlap.
    pub thickness: f64,
    pub corner_order: Vec<Corner>,
}

impl Default for MazeLayout {
    fn default() -> Self {
        MazeLayout {
            span: 0.6,
            tiers: 24,
            thickness: 1e-4,
            corner_order: vec![Corner::NE, Corner::SW, Corner::NW, Corner::SE],
        }
    }
}

impl MazeLayout {
    /// Corner plates that just tile the square with no pairwise overlap.
    pub fn zero_overlap() -> Self {
        MazeLayout { span: 0.5, ..MazeLayout::default() }
    }

    /// Planar overlap fraction between opposite-corner plates, `2·span − 1`.
    pub fn overlap(&self) -> f64 {
        2.0 * self.span - 1.0
    }

    /// Relative gap between tiers (and above/below the outer tiers).
    pub fn gap(&self) -> f64 {
        (1.0 - self.tiers as f64 * self.thickness) / (self.tiers as f64 + 1.0)
    }

    /// Contraction bound: each child's diameter is at most `rho` times its parent's.
    pub fn rho(&self) -> f64 {
        self.span.max(self.thickness)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidLayout { message: m, pair: None });
        if self.tiers == 0 {
            return bad("tiers must be positive".into());
        }
        if self.corner_order.is_empty() {
            return bad("corner order is empty".into());
        }
        if !(self.span > 0.0 && self.span < 1.0) {
            return bad(format!("span {} must lie in (0, 1)", self.span));
        }
        if !(self.thickness > 0.0 && self.gap() > 0.0) {
            return bad(format!("thickness {} leaves no gap for {} tiers", self.thickness, self.tiers));
        }
        Ok(())
    }

    /// Child boxes of `parent`, top tier first.
    pub fn children(&self, parent: &Box3) -> Vec<Box3> {
        let lerp = |iv: [f64; 2], r: f64| (1.0 - r) * iv[0] + r * iv[1];
        let g = self.gap();
        let c = self.thickness;
        (0..self.tiers)
            .map(|i| {
                let fi = i as f64;
                // measured down from the top face
                let top = 1.0 - (fi + 1.0) * g - fi * c;
                let bottom = top - c;
                let corner = self.corner_order[i % self.corner_order.len()];
                let (xr, yr) = match corner {
                    Corner::NE => ([1.0 - self.span, 1.0], [1.0 - self.span, 1.0]),
                    Corner::SW => ([0.0, self.span], [0.0, self.span]),
                    Corner::NW => ([0.0, self.span], [1.0 - self.span, 1.0]),
                    Corner::SE => ([1.0 - self.span, 1.0], [0.0, self.span]),
                };
                Box3 {
                    x: [lerp(parent.x, xr[0]), lerp(parent.x, xr[1])],
                    y: [lerp(parent.y, yr[0]), lerp(parent.y, yr[1])],
                    t: [lerp(parent.t, bottom), lerp(parent.t, top)],
                }
            })
            .collect()
    }
}

/// A box of the maze with its multi-index `(i₁, …, i_j)` (0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeNode {
    pub index: Vec<u16>,
    pub bbox: Box3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeTree {
    pub n: u32,
    pub root: Box3,
    pub branching: usize,
    pub levels: usize,
    pub layout: MazeLayout,
    /// `nodes[j]` holds every level-`j` box, children of one parent contiguous.
    pub nodes: Vec<Vec<MazeNode>>,
}

/// Root box `[−10n,10n]²×[−1/2,1/2]`.
pub fn root_box(n: u32) -> Box3 {
    let s = 10.0 * n as f64;
    Box3 { x: [-s, s], y: [-s, s], t: [-0.5, 0.5] }
}

/// Builds the maze of depth `levels` inside `[−10n,10n]²×[−1/2,1/2]`.
pub fn build_maze(n: u32, levels: usize, layout: &MazeLayout) -> Result<MazeTree> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    layout.validate()?;
    let root = root_box(n);
    let mut nodes = vec![vec![MazeNode { index: vec![], bbox: root }]];
    for _ in 0..levels {
        let prev = nodes.last().expect("level 0 exists");
        let mut next = Vec::with_capacity(prev.len() * layout.tiers);
        for parent in prev {
            for (i, bbox) in layout.children(&parent.bbox).into_iter().enumerate() {
                let mut index = parent.index.clone();
                index.push(i as u16);
                next.push(MazeNode { index, bbox });
            }
        }
        nodes.push(next);
    }
    let tree = MazeTree { n, root, branching: layout.tiers, levels, layout: layout.clone(), nodes };
    tree.validate()?;
    Ok(tree)
}

impl MazeTree {
    /// Checks sibling disjointness, containment, planar coverage and diameter decay.
    ///
    /// Children may touch the planar walls of their parent but are strictly
    /// inside it in `t`.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String, pair| Err(Error::InvalidLayout { message: m, pair });
        if self.nodes.len() != self.levels + 1 {
            return bad(format!("expected {} levels, found {}", self.levels + 1, self.nodes.len()), None);
        }
        let k = self.branching;
        let rho = self.layout.rho();
        let d0 = self.root.diameter();
        for j in 1..self.nodes.len() {
            let parents = &self.nodes[j - 1];
            let kids = &self.nodes[j];
            if kids.len() != parents.len() * k {
                return bad(format!("level {j} has {} boxes, expected {}", kids.len(), parents.len() * k), None);
            }
            let bound = rho.powi(j as i32) * d0 * (1.0 + 1e-12);
            for (pi, parent) in parents.iter().enumerate() {
                let sib = &kids[pi * k..(pi + 1) * k];
                for (a, ka) in sib.iter().enumerate() {
                    let (c, p) = (&ka.bbox, &parent.bbox);
                    let inside = p.x[0] <= c.x[0]
                        && c.x[1] <= p.x[1]
                        && p.y[0] <= c.y[0]
                        && c.y[1] <= p.y[1]
                        && p.t[0] < c.t[0]
                        && c.t[1] < p.t[1];
                    if !inside {
                        return bad(format!("child {a} of level-{} box {pi} leaves its parent", j - 1), None);
                    }
                    if c.diameter() > bound {
                        return bad(format!("child {a} at level {j} exceeds the diameter bound"), None);
                    }
                    for (b, kb) in sib.iter().enumerate().skip(a + 1) {
                        if c.intersects(&kb.bbox) {
                            return bad(
                                format!("children {a} and {b} of level-{} box {pi} intersect", j - 1),
                                Some((a, b)),
                            );
                        }
                    }
                }
            }
        }
        if self.levels > 0 && !self.layout_covers_plane() {
            return bad("child projections do not cover the parent square".into(), None);
        }
        Ok(())
    }

    /// Four corner plates of span at least 1/2 cover the square.
    fn layout_covers_plane(&self) -> bool {
        let used = &self.layout.corner_order[..self.layout.corner_order.len().min(self.layout.tiers)];
        self.layout.span >= 0.5 && [Corner::NE, Corner::SW, Corner::NW, Corner::SE].iter().all(|c| used.contains(c))
    }

    pub fn level(&self, j: usize) -> Option<&[MazeNode]> {
        self.nodes.get(j).map(Vec::as_slice)
    }

    /// Largest box diameter at level `j`.
    pub fn max_diameter(&self, j: usize) -> Option<f64> {
        self.level(j).map(|l| l.iter().map(|n| n.bbox.diameter()).fold(0.0, f64::max))
    }

    /// Same tree mapped by `δ_scale` followed by a left translation by `(0,0,shift)`.
    fn transformed(&self, scale: f64, shift: f64) -> MazeTree {
        let map = |b: &Box3| b.dilated(scale).shifted_t(shift);
        MazeTree {
            root: map(&self.root),
            nodes: self
                .nodes
                .iter()
                .map(|l| l.iter().map(|n| MazeNode { index: n.index.clone(), bbox: map(&n.bbox) }).collect())
                .collect(),
            layout: self.layout.clone(),
            ..*self
        }
    }
}

/// Union of the level-`j` boxes.
pub fn maze_level_union(m: &MazeTree, j: usize) -> Result<ObstacleSet> {
    let level = m.level(j).ok_or_else(|| Error::InvalidParameter(format!("level {j} exceeds depth {}", m.levels)))?;
    Ok(ObstacleSet::from_boxes(level.iter().map(|n| n.bbox).collect()))
}

/// One normalized maze, contained in the cc-ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub n: u32,
    pub center: HPoint,
    pub radius: f64,
    pub scale: f64,
    pub tree: MazeTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledSet {
    pub components: Vec<Component>,
    pub includes_origin: bool,
}

impl AssembledSet {
    /// Level-`j` union over all components plus the origin as a degenerate box.
    pub fn level_union(&self, j: usize) -> Result<ObstacleSet> {
        let mut boxes = Vec::new();
        if self.includes_origin {
            boxes.push(Box3 { x: [0.0; 2], y: [0.0; 2], t: [0.0; 2] });
        }
        for c in &self.components {
            boxes.extend(maze_level_union(&c.tree, j.min(c.tree.levels))?.boxes);
        }
        Ok(ObstacleSet::from_boxes(boxes))
    }

    /// First pair of component balls that are not disjoint, judged by the
    /// distance between their centers on the `t`-axis.
    pub fn overlapping_pair(&self) -> Option<(usize, usize)> {
        for (i, a) in self.components.iter().enumerate() {
            for (j, b) in self.components.iter().enumerate().skip(i + 1) {
                if cc_dist_vertical(a.center, b.center.t - a.center.t) <= a.radius + b.radius {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// Radius of a cc-ball about the origin containing `[−10n,10n]²×[−1/2,1/2]`
/// and the witnesses `(0,0,±1)`, from `d_cc ≤ |(x,y)| + √(π|t|)`.
pub fn root_radius(n: u32) -> f64 {
    10.0 * std::f64::consts::SQRT_2 * n as f64 + (std::f64::consts::PI * 0.5).sqrt()
}

/// Target radius `n⁻²/20` of component `n`.
pub fn component_radius(n: u32) -> f64 {
    let nf = n as f64;
    1.0 / (20.0 * nf * nf)
}

/// Normalizes tree `n` (the `n`-th entry, `n` from 1) into `B((0,0,1/n), n⁻²/20)`.
pub fn assemble_a(trees: &[MazeTree]) -> Result<AssembledSet> {
    let mut components = Vec::with_capacity(trees.len());
    for (i, tree) in trees.iter().enumerate() {
        let n = (i + 1) as u32;
        if tree.n != n {
            return Err(Error::InvalidInput(format!("tree {i} is built for n={}, expected {n}", tree.n)));
        }
        let radius = component_radius(n);
        let scale = radius / root_radius(n);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Internal(format!("no dilation fits component {n}")));
        }
        let shift = 1.0 / n as f64;
        components.push(Component {
            n,
            center: HPoint::new(0.0, 0.0, shift),
            radius,
            scale,
            tree: tree.transformed(scale, shift),
        });
    }
    let set = AssembledSet { components, includes_origin: true };
    if let Some((i, j)) = set.overlapping_pair() {
        return Err(Error::Internal(format!("component balls {} and {} overlap", i + 1, j + 1)));
    }
    Ok(set)
}
