use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::thread_count;
use crate::error::{Error, Result};
use crate::group::HPoint;
use crate::obstacles::{Box3, MazeTree, ObstacleSet};
use crate::paths::{pi_t_length, Polyline3};

/// Lattice steps along `x`, `y` and `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSteps {
    pub hx: f64,
    pub hy: f64,
    pub ht: f64,
}

impl GridSteps {
    pub fn uniform(h: f64) -> Self {
        GridSteps { hx: h, hy: h, ht: h }
    }

    fn validate(&self) -> Result<()> {
        for h in [self.hx, self.hy, self.ht] {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter(format!("lattice step {h} must be positive")));
            }
        }
        Ok(())
    }
}

/// Lattice `lo + i·h` over a bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bounds: Box3,
    pub steps: GridSteps,
    /// Drop the boundary columns so the lattice covers the open planar rectangle.
    #[serde(default)]
    pub open_planar: bool,
    /// Inflate every obstacle box by half a step along each axis.
    #[serde(default)]
    pub inflate: bool,
}

/// Columns allowed in one lattice.
const MAX_COLUMNS: usize = 40_000_000;

impl GridSpec {
    pub fn new(bounds: Box3, steps: GridSteps) -> Self {
        GridSpec { bounds, steps, open_planar: false, inflate: false }
    }

    /// Node counts along `x`, `y`, `t`; each step must divide its extent.
    pub fn node_counts(&self) -> Result<[usize; 3]> {
        self.bounds.validate()?;
        self.steps.validate()?;
        let count = |iv: [f64; 2], h: f64, name: &str| {
            let r = (iv[1] - iv[0]) / h;
            let n = r.round();
            if (r - n).abs() > 1e-6 * n.max(1.0) {
                return Err(Error::InvalidParameter(format!("{name}-step {h} does not divide the extent")));
            }
            Ok(n as usize + 1)
        };
        let c = [
            count(self.bounds.x, self.steps.hx, "x")?,
            count(self.bounds.y, self.steps.hy, "y")?,
            count(self.bounds.t, self.steps.ht, "t")?,
        ];
        if c[0].saturating_mul(c[1]) > MAX_COLUMNS || c[2] > u32::MAX as usize / 2 {
            return Err(Error::InvalidParameter("lattice too large".into()));
        }
        Ok(c)
    }
}

/// Lattice path estimate of the `π_t`-distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEstimate {
    /// `pi_t_length(polyline)`.
    pub cost: f64,
    pub polyline: Polyline3,
    pub steps: GridSteps,
    pub node_counts: [usize; 3],
    pub inflated: bool,
    /// Number of collapsed `t`-runs in the search graph.
    pub super_nodes: usize,
}

#[derive(Debug, Clone, Copy)]
struct Axis1 {
    lo: f64,
    h: f64,
    n: usize,
}

impl Axis1 {
    #[inline]
    fn at(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.h
    }

    fn index_of(&self, v: f64) -> Option<usize> {
        let r = (v - self.lo) / self.h;
        let i = r.round();
        ((r - i).abs() <= 1e-9 * i.abs().max(1.0) && i >= 0.0 && (i as usize) < self.n).then_some(i as usize)
    }

    /// Last index with node `< v`, or -1.
    fn last_below(&self, v: f64) -> isize {
        let mut i = (((v - self.lo) / self.h).ceil() as isize).clamp(-1, self.n as isize - 1);
        while i >= 0 && self.at(i as usize) >= v {
            i -= 1;
        }
        while i + 1 < self.n as isize && self.at((i + 1) as usize) < v {
            i += 1;
        }
        i
    }

    /// First index with node `> v`, or `n`.
    fn first_above(&self, v: f64) -> usize {
        let mut i = (((v - self.lo) / self.h).floor() as isize).clamp(0, self.n as isize) as usize;
        while i > 0 && self.at(i - 1) > v {
            i -= 1;
        }
        while i < self.n && self.at(i) <= v {
            i += 1;
        }
        i
    }

    /// Slack absorbing the rounding of `lo + i·h`; nodes this close to a face
    /// count as touching it.
    fn slack(&self) -> f64 {
        1e-9 * self.h
    }

    /// Indices whose nodes lie in `[a, b]`.
    fn range(&self, a: f64, b: f64) -> Option<(usize, usize)> {
        let i0 = (self.last_below(a - self.slack()) + 1) as usize;
        let i1 = self.first_above(b + self.slack());
        (i1 > i0).then(|| (i0, i1 - 1))
    }

    /// `i` with `node_i < a <= b < node_{i+1}`.
    fn between(&self, a: f64, b: f64) -> Option<usize> {
        let (a, b) = (a - self.slack(), b + self.slack());
        let i = self.last_below(a);
        (i >= 0 && (i as usize) + 1 < self.n && self.at(i as usize + 1) > b).then_some(i as usize)
    }
}

/// Run counts per column and the runs themselves, for a block of columns.
type ColumnPart = (Vec<u32>, Vec<(u32, u32)>);

/// `t`-runs of every column, in compressed form.
struct Columns {
    x: Axis1,
    y: Axis1,
    t: Axis1,
    col_lo: [usize; 2],
    col_hi: [usize; 2],
    offsets: Vec<u32>,
    runs: Vec<(u32, u32)>,
    run_col: Vec<u32>,
    /// Blocked `t`-intervals on horizontal edges passing a box that lies
    /// strictly between two lattice lines; key `(axis, i, j)` of the lower end.
    thin: HashMap<(u8, usize, usize), Vec<[f64; 2]>>,
}

impl Columns {
    fn build(g: &GridSpec, boxes: &[Box3]) -> Result<Columns> {
        let [nx, ny, nt] = g.node_counts()?;
        let x = Axis1 { lo: g.bounds.x[0], h: g.steps.hx, n: nx };
        let y = Axis1 { lo: g.bounds.y[0], h: g.steps.hy, n: ny };
        let t = Axis1 { lo: g.bounds.t[0], h: g.steps.ht, n: nt };
        let (col_lo, col_hi) = if g.open_planar {
            if nx < 3 || ny < 3 {
                return Err(Error::InvalidParameter("open lattice has no interior columns".into()));
            }
            ([1, 1], [nx - 2, ny - 2])
        } else {
            ([0, 0], [nx - 1, ny - 1])
        };

        let boxes: Vec<Box3> = if g.inflate {
            let (hx, hy, ht) = (0.5 * g.steps.hx, 0.5 * g.steps.hy, 0.5 * g.steps.ht);
            boxes
                .iter()
                .map(|b| Box3 {
                    x: [b.x[0] - hx, b.x[1] + hx],
                    y: [b.y[0] - hy, b.y[1] + hy],
                    t: [b.t[0] - ht, b.t[1] + ht],
                })
                .collect()
        } else {
            boxes.to_vec()
        };

        let mut strips: Vec<Vec<(usize, usize, [f64; 2])>> = vec![Vec::new(); nx];
        let mut thin: HashMap<(u8, usize, usize), Vec<[f64; 2]>> = HashMap::new();
        for b in &boxes {
            let (ri, rj) = (x.range(b.x[0], b.x[1]), y.range(b.y[0], b.y[1]));
            match (ri, rj) {
                (Some((i0, i1)), Some((j0, j1))) => {
                    for strip in &mut strips[i0..=i1] {
                        strip.push((j0, j1, b.t));
                    }
                }
                (None, Some((j0, j1))) => {
                    if let Some(i) = x.between(b.x[0], b.x[1]) {
                        for j in j0..=j1 {
                            thin.entry((0, i, j)).or_default().push(b.t);
                        }
                    }
                }
                (Some((i0, i1)), None) => {
                    if let Some(j) = y.between(b.y[0], b.y[1]) {
                        for i in i0..=i1 {
                            thin.entry((1, i, j)).or_default().push(b.t);
                        }
                    }
                }
                (None, None) => {}
            }
        }

        let threads = thread_count().clamp(1, 64).min(nx);
        let chunk = nx.div_ceil(threads);
        let parts: Vec<ColumnPart> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|w| {
                    let strips = &strips;
                    s.spawn(move || {
                        let mut counts = Vec::new();
                        let mut runs = Vec::new();
                        let mut ivs: Vec<[f64; 2]> = Vec::new();
                        let first = (w * chunk).min(nx);
                        for (i, strip) in strips.iter().enumerate().take(((w + 1) * chunk).min(nx)).skip(first) {
                            for j in 0..ny {
                                let before = runs.len();
                                let active =
                                    (col_lo[0]..=col_hi[0]).contains(&i) && (col_lo[1]..=col_hi[1]).contains(&j);
                                if active {
                                    ivs.clear();
                                    ivs.extend(strip.iter().filter(|e| e.0 <= j && j <= e.1).map(|e| e.2));
                                    column_runs(&t, &mut ivs, &mut runs);
                                }
                                counts.push((runs.len() - before) as u32);
                            }
                        }
                        (counts, runs)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });

        let total: usize = parts.iter().map(|p| p.1.len()).sum();
        if total >= u32::MAX as usize {
            return Err(Error::InvalidParameter("lattice too large".into()));
        }
        let mut offsets = Vec::with_capacity(nx * ny + 1);
        let mut runs = Vec::with_capacity(total);
        let mut run_col = Vec::with_capacity(total);
        offsets.push(0u32);
        let mut col = 0u32;
        for (counts, r) in parts {
            for c in counts {
                offsets.push(offsets.last().unwrap() + c);
                run_col.extend(std::iter::repeat_n(col, c as usize));
                col += 1;
            }
            runs.extend(r);
        }
        Ok(Columns { x, y, t, col_lo, col_hi, offsets, runs, run_col, thin })
    }

    #[inline]
    fn col(&self, i: usize, j: usize) -> usize {
        i * self.y.n + j
    }

    fn col_runs(&self, c: usize) -> std::ops::Range<usize> {
        self.offsets[c] as usize..self.offsets[c + 1] as usize
    }

    fn run_at(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        let r = self.col_runs(self.col(i, j));
        let slice = &self.runs[r.clone()];
        let pos = slice.partition_point(|&(_, e)| (e as usize) < k);
        (pos < slice.len() && slice[pos].0 as usize <= k).then(|| r.start + pos)
    }

    fn thin_blocked(&self, key: &(u8, usize, usize), k: usize) -> bool {
        self.thin.get(key).is_some_and(|ivs| {
            let (tk, e) = (self.t.at(k), self.t.slack());
            ivs.iter().any(|iv| iv[0] - e <= tk && tk <= iv[1] + e)
        })
    }

    /// A height in `[lo, hi]` usable for the move across `key`, nearest to `k`.
    fn crossing(&self, key: &(u8, usize, usize), lo: usize, hi: usize, k: usize) -> Option<usize> {
        let k = k.clamp(lo, hi);
        if !self.thin.contains_key(key) {
            return Some(k);
        }
        (0..=(hi - lo)).find_map(|d| {
            [k.checked_sub(d), Some(k + d)]
                .into_iter()
                .flatten()
                .find(|&c| c >= lo && c <= hi && !self.thin_blocked(key, c))
        })
    }

    fn ij(&self, c: usize) -> (usize, usize) {
        (c / self.y.n, c % self.y.n)
    }

    /// Neighbouring runs with the key of the crossed edge and its cost.
    fn for_each_neighbour(&self, r: usize, mut f: impl FnMut(usize, (u8, usize, usize), usize, usize, f64)) {
        let (ks, ke) = (self.runs[r].0 as usize, self.runs[r].1 as usize);
        let (i, j) = self.ij(self.run_col[r] as usize);
        let dirs: [(isize, isize, u8, f64); 4] =
            [(-1, 0, 0, self.x.h), (1, 0, 0, self.x.h), (0, -1, 1, self.y.h), (0, 1, 1, self.y.h)];
        for (di, dj, axis, cost) in dirs {
            let (ni, nj) = (i as isize + di, j as isize + dj);
            if ni < self.col_lo[0] as isize
                || nj < self.col_lo[1] as isize
                || ni > self.col_hi[0] as isize
                || nj > self.col_hi[1] as isize
            {
                continue;
            }
            let (ni, nj) = (ni as usize, nj as usize);
            let key = (axis, i.min(ni), j.min(nj));
            let range = self.col_runs(self.col(ni, nj));
            let slice = &self.runs[range.clone()];
            let mut pos = slice.partition_point(|&(_, e)| (e as usize) < ks);
            while pos < slice.len() && (slice[pos].0 as usize) <= ke {
                let lo = ks.max(slice[pos].0 as usize);
                let hi = ke.min(slice[pos].1 as usize);
                if self.crossing(&key, lo, hi, lo).is_some() {
                    f(range.start + pos, key, lo, hi, cost);
                }
                pos += 1;
            }
        }
    }
}

/// Splits the column's `t`-nodes into runs that avoid every closed interval.
fn column_runs(t: &Axis1, ivs: &mut [[f64; 2]], out: &mut Vec<(u32, u32)>) {
    ivs.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut start: usize = 0;
    for iv in ivs.iter() {
        let ka = t.last_below(iv[0] - t.slack());
        let kb = t.first_above(iv[1] + t.slack());
        if ka >= start as isize {
            out.push((start as u32, ka as u32));
        }
        start = start.max(kb);
        if start >= t.n {
            return;
        }
    }
    out.push((start as u32, (t.n - 1) as u32));
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    run: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.run.cmp(&self.run))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn locate(cols: &Columns, p: HPoint, which: &str) -> Result<(usize, usize, usize, usize)> {
    let not_node = || Error::InvalidInput(format!("{which} point {p} is not a lattice node"));
    let i = cols.x.index_of(p.x).ok_or_else(not_node)?;
    let j = cols.y.index_of(p.y).ok_or_else(not_node)?;
    let k = cols.t.index_of(p.t).ok_or_else(not_node)?;
    if i < cols.col_lo[0] || i > cols.col_hi[0] || j < cols.col_lo[1] || j > cols.col_hi[1] {
        return Err(Error::InvalidInput(format!("{which} point {p} lies outside the lattice region")));
    }
    let r =
        cols.run_at(i, j, k).ok_or_else(|| Error::InvalidInput(format!("{which} point {p} lies in an obstacle")))?;
    Ok((i, j, k, r))
}

fn shortest(cols: &Columns, p: HPoint, q: HPoint) -> Result<Polyline3> {
    let (_, _, kp, rp) = locate(cols, p, "start")?;
    let (_, _, _, rq) = locate(cols, q, "end")?;
    let n = cols.runs.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![u32::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[rp] = 0.0;
    heap.push(Entry { cost: 0.0, run: rp as u32 });
    while let Some(Entry { cost, run }) = heap.pop() {
        let r = run as usize;
        if cost > dist[r] {
            continue;
        }
        if r == rq {
            break;
        }
        cols.for_each_neighbour(r, |nr, _, _, _, w| {
            let c = cost + w;
            if c < dist[nr] {
                dist[nr] = c;
                pred[nr] = run;
                heap.push(Entry { cost: c, run: nr as u32 });
            }
        });
    }
    if !dist[rq].is_finite() {
        return Err(Error::Unreachable);
    }

    let mut chain = vec![rq];
    while *chain.last().unwrap() != rp {
        chain.push(pred[*chain.last().unwrap()] as usize);
    }
    chain.reverse();

    let node = |c: usize, k: usize| {
        let (i, j) = cols.ij(c);
        HPoint::new(cols.x.at(i), cols.y.at(j), cols.t.at(k))
    };
    let mut vertices = vec![p];
    let mut k = kp;
    for w in chain.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ca, cb) = (cols.run_col[a] as usize, cols.run_col[b] as usize);
        let ((ia, ja), (ib, jb)) = (cols.ij(ca), cols.ij(cb));
        let key = (u8::from(ia == ib), ia.min(ib), ja.min(jb));
        let lo = cols.runs[a].0.max(cols.runs[b].0) as usize;
        let hi = cols.runs[a].1.min(cols.runs[b].1) as usize;
        let kk = cols.crossing(&key, lo, hi, k).ok_or_else(|| Error::Internal("lost crossing".into()))?;
        if kk != k {
            vertices.push(node(ca, kk));
        }
        vertices.push(node(cb, kk));
        k = kk;
    }
    vertices.push(q);
    vertices.dedup();
    Ok(Polyline3::new(vertices))
}

/// Lattice shortest path for the `π_t`-distance between `p` and `q` in the
/// complement of the boxes of `a`.
///
/// Moves along `x` and `y` cost one step; moves along `t` are free, so every
/// obstacle-free run of a `t`-column is collapsed into one node first.
pub fn grid_pi_distance(a: &ObstacleSet, p: HPoint, q: HPoint, g: &GridSpec) -> Result<PathEstimate> {
    if !a.balls.is_empty() {
        return Err(Error::InvalidParameter("the lattice estimator supports boxes only".into()));
    }
    a.validate()?;
    let cols = Columns::build(g, &a.boxes)?;
    let polyline = shortest(&cols, p, q)?;
    Ok(PathEstimate {
        cost: pi_t_length(&polyline),
        polyline,
        steps: g.steps,
        node_counts: [cols.x.n, cols.y.n, cols.t.n],
        inflated: g.inflate,
        super_nodes: cols.runs.len(),
    })
}

/// Cost of descending through the first level-`j` box of the maze, from the
/// center of its top face to the center of its bottom face, with the
/// lattice restricted to the open planar rectangle of that box and the box's
/// children as obstacles.
pub fn interior_crossing_cost(m: &MazeTree, j: usize, steps: GridSteps) -> Result<PathEstimate> {
    let level = m.level(j).ok_or_else(|| Error::InvalidParameter(format!("level {j} exceeds depth {}", m.levels)))?;
    let parent = level[0].bbox;
    let children: Vec<Box3> =
        m.level(j + 1).map(|l| l[..m.branching.min(l.len())].iter().map(|n| n.bbox).collect()).unwrap_or_default();
    let g = GridSpec { bounds: parent, steps, open_planar: true, inflate: false };
    let c = parent.center();
    let p = HPoint::new(c.x, c.y, parent.t[1]);
    let q = HPoint::new(c.x, c.y, parent.t[0]);
    grid_pi_distance(&ObstacleSet::from_boxes(children), p, q, &g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_helpers() {
        let a = Axis1 { lo: -1.0, h: 0.5, n: 5 };
        assert_eq!(a.range(-0.6, 0.1), Some((1, 2)));
        assert_eq!(a.range(-1.0, 1.0), Some((0, 4)));
        assert_eq!(a.range(0.1, 0.2), None);
        assert_eq!(a.between(0.1, 0.2), Some(2));
        assert_eq!(a.between(1.1, 1.2), None);
        assert_eq!(a.last_below(-1.0), -1);
        assert_eq!(a.first_above(1.0), 5);
        assert_eq!(a.index_of(0.5), Some(3));
        assert_eq!(a.index_of(0.6), None);
    }

    #[test]
    fn runs_split_on_intervals() {
        let t = Axis1 { lo: 0.0, h: 1.0, n: 10 };
        let mut out = Vec::new();
        column_runs(&t, &mut [[2.5, 2.6], [5.0, 6.0]], &mut out);
        assert_eq!(out, vec![(0, 2), (3, 4), (7, 9)]);
        out.clear();
        column_runs(&t, &mut [[-5.0, 20.0]], &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn empty_set_vertical_is_free() {
        let g = GridSpec::new(Box3::new([-1.0, 1.0], [-1.0, 1.0], [-1.5, 1.5]).unwrap(), GridSteps::uniform(0.5));
        let e = grid_pi_distance(&ObstacleSet::default(), HPoint::new(0.0, 0.0, 1.0), HPoint::new(0.0, 0.0, -1.0), &g)
            .unwrap();
        assert_eq!(e.cost, 0.0);
        assert_eq!(e.polyline.vertices.len(), 2);
    }

    #[test]
    fn small_plate_detour() {
        let g = GridSpec::new(Box3::new([-2.0, 2.0], [-2.0, 2.0], [-1.0, 1.0]).unwrap(), GridSteps::uniform(0.5));
        let plate = ObstacleSet::from_boxes(vec![Box3::new([-1.0, 1.0], [-1.0, 1.0], [-0.1, 0.1]).unwrap()]);
        let e = grid_pi_distance(&plate, HPoint::new(0.0, 0.0, 1.0), HPoint::new(0.0, 0.0, -1.0), &g).unwrap();
        assert!((e.cost - 3.0).abs() < 1e-12, "{}", e.cost);
        assert_eq!(e.cost, pi_t_length(&e.polyline));
        // a thin sheet between lattice lines still blocks horizontal moves through it
        let sheet = ObstacleSet::from_boxes(vec![Box3::new([0.2, 0.3], [-2.0, 2.0], [-1.0, 1.0]).unwrap()]);
        let r = grid_pi_distance(&sheet, HPoint::new(0.0, 0.0, 0.0), HPoint::new(1.0, 0.0, 0.0), &g);
        assert!(matches!(r, Err(Error::Unreachable)));
    }

    #[test]
    fn bad_queries() {
        let g = GridSpec::new(Box3::new([-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]).unwrap(), GridSteps::uniform(0.5));
        let a = ObstacleSet::default();
        assert!(grid_pi_distance(&a, HPoint::new(0.1, 0.0, 0.0), HPoint::ORIGIN, &g).is_err());
        assert!(grid_pi_distance(&a, HPoint::new(3.0, 0.0, 0.0), HPoint::ORIGIN, &g).is_err());
        let g2 = GridSpec::new(g.bounds, GridSteps::uniform(0.3));
        assert!(grid_pi_distance(&a, HPoint::ORIGIN, HPoint::ORIGIN, &g2).is_err());
    }
}
