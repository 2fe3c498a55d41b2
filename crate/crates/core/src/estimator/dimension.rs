use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{koranyi_dist, HPoint};
use crate::obstacles::Box3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    Euclidean,
    Koranyi,
}

/// A set to be measured: a point sample or a finite union of boxes.
#[derive(Debug, Clone, PartialEq)]
pub enum DimInput {
    Points(Vec<HPoint>),
    Boxes(Vec<Box3>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub intercept: f64,
    pub gauge: Gauge,
}

/// Cells allowed per scale before a box union is considered too fine.
const MAX_CELLS: u64 = 50_000_000;

/// Box-counting dimension from covering counts at the given scales.
///
/// Euclidean counts are occupied cubes of side `δ` on a grid anchored at the
/// smallest coordinates of the set. Korányi counts are the
/// sizes of greedy `δ`-nets, which sit between the covering numbers at `δ` and
/// `δ/2`; box unions are sampled on a lattice fine enough for the gauge.
pub fn box_dimension(set: &DimInput, gauge: Gauge, scales: &[f64]) -> Result<DimEstimate> {
    if scales.len() < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 scales, got {}", scales.len())));
    }
    if scales.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidParameter("scales must be positive".into()));
    }
    let (lo, hi) = scales.iter().fold((f64::MAX, 0.0f64), |(l, h), &d| (l.min(d), h.max(d)));
    if (hi / lo).log10() < 1.5 - 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "scales span {:.3} decades, need at least 1.5",
            (hi / lo).log10()
        )));
    }
    let empty = match set {
        DimInput::Points(p) => p.is_empty(),
        DimInput::Boxes(b) => b.is_empty(),
    };
    if empty {
        return Err(Error::InsufficientData("empty set".into()));
    }
    if let DimInput::Points(p) = set {
        if p.iter().any(|q| !q.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample point".into()));
        }
    }
    let origin = min_corner(set);
    let counts = scales
        .iter()
        .map(|&d| match (set, gauge) {
            (DimInput::Points(p), Gauge::Euclidean) => Ok(euclidean_points(p, origin, d)),
            (DimInput::Boxes(b), Gauge::Euclidean) => euclidean_boxes(b, origin, d),
            (DimInput::Points(p), Gauge::Koranyi) => Ok(koranyi_net(p, d)),
            (DimInput::Boxes(b), Gauge::Koranyi) => koranyi_net_boxes(b, d),
        })
        .collect::<Result<Vec<u64>>>()?;
    let coarsest = scales.iter().zip(&counts).fold((0.0, 0), |acc, (&d, &n)| if d > acc.0 { (d, n) } else { acc });
    if coarsest.1 < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} cell(s) occupied at the coarsest scale {}",
            coarsest.1, coarsest.0
        )));
    }
    let xs: Vec<f64> = scales.iter().map(|d| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(DimEstimate { scales: scales.to_vec(), counts, slope, intercept, gauge })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn cell(v: f64, d: f64) -> i64 {
    (v / d).floor() as i64
}

/// Smallest coordinates over the set; the Euclidean grid is anchored there.
fn min_corner(set: &DimInput) -> [f64; 3] {
    let mut m = [f64::INFINITY; 3];
    let mut take = |x: f64, y: f64, t: f64| {
        m[0] = m[0].min(x);
        m[1] = m[1].min(y);
        m[2] = m[2].min(t);
    };
    match set {
        DimInput::Points(p) => p.iter().for_each(|p| take(p.x, p.y, p.t)),
        DimInput::Boxes(b) => b.iter().for_each(|b| take(b.x[0], b.y[0], b.t[0])),
    }
    m
}

fn euclidean_points(pts: &[HPoint], o: [f64; 3], d: f64) -> u64 {
    let cells: HashSet<(i64, i64, i64)> =
        pts.iter().map(|p| (cell(p.x - o[0], d), cell(p.y - o[1], d), cell(p.t - o[2], d))).collect();
    cells.len() as u64
}

/// Cells `[o + iδ, o + (i+1)δ)` met by a box; a face lying exactly on a cell
/// boundary does not claim the cell beyond it. Occupied cells are counted layer
/// by layer in `t` as the area of a union of integer rectangles.
fn euclidean_boxes(boxes: &[Box3], o: [f64; 3], d: f64) -> Result<u64> {
    let range_in = |iv: [f64; 2], o: f64| {
        let lo = cell(iv[0] - o, d);
        let hi = (((iv[1] - o) / d).ceil() as i64 - 1).max(lo);
        (lo, hi)
    };
    let mut layers: HashMap<i64, Vec<Rect>> = HashMap::new();
    let mut entries = 0u64;
    for b in boxes {
        let (x, y, t) = (range_in(b.x, o[0]), range_in(b.y, o[1]), range_in(b.t, o[2]));
        entries += (t.1 - t.0 + 1) as u64;
        if entries > MAX_CELLS {
            return Err(Error::InvalidParameter(format!("scale {d} is too fine for this box union")));
        }
        for k in t.0..=t.1 {
            layers.entry(k).or_default().push(Rect { x: [x.0, x.1 + 1], y: [y.0, y.1 + 1] });
        }
    }
    Ok(layers.into_values().map(|mut r| union_area(&mut r)).sum())
}

/// Half-open integer rectangle `[x0, x1) × [y0, y1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Rect {
    x: [i64; 2],
    y: [i64; 2],
}

/// Area of a union of integer rectangles by a sweep in `x` over a coverage
/// tree on the compressed `y` edges.
fn union_area(rects: &mut Vec<Rect>) -> u64 {
    let mut seen = HashSet::with_capacity(rects.len());
    rects.retain(|r| seen.insert(*r));
    let mut ys: Vec<i64> = rects.iter().flat_map(|r| r.y).collect();
    ys.sort_unstable();
    ys.dedup();
    let idx = |v: i64| ys.binary_search(&v).unwrap();
    let mut events: Vec<(i64, i32, usize, usize)> = Vec::with_capacity(2 * rects.len());
    for r in rects.iter() {
        let (a, b) = (idx(r.y[0]), idx(r.y[1]));
        events.push((r.x[0], 1, a, b));
        events.push((r.x[1], -1, a, b));
    }
    events.sort_unstable();
    let mut tree = Cover::new(&ys);
    let mut area = 0u64;
    let mut last = events.first().map_or(0, |e| e.0);
    for (x, delta, a, b) in events {
        area += (tree.len() * (x - last)) as u64;
        last = x;
        tree.add(1, 0, ys.len() - 1, a, b, delta);
    }
    area
}

struct Cover<'a> {
    ys: &'a [i64],
    count: Vec<i32>,
    covered: Vec<i64>,
}

impl<'a> Cover<'a> {
    fn new(ys: &'a [i64]) -> Self {
        let n = 4 * ys.len().max(1);
        Cover { ys, count: vec![0; n], covered: vec![0; n] }
    }

    fn len(&self) -> i64 {
        self.covered[1]
    }

    // node spans [ys[lo], ys[hi]]; update adds delta over [ys[a], ys[b]]
    fn add(&mut self, node: usize, lo: usize, hi: usize, a: usize, b: usize, delta: i32) {
        if b <= lo || hi <= a || hi <= lo {
            return;
        }
        if a <= lo && hi <= b {
            self.count[node] += delta;
        } else {
            let mid = (lo + hi) / 2;
            self.add(2 * node, lo, mid, a, b, delta);
            self.add(2 * node + 1, mid, hi, a, b, delta);
        }
        self.covered[node] = if self.count[node] > 0 {
            self.ys[hi] - self.ys[lo]
        } else if hi - lo == 1 {
            0
        } else {
            self.covered[2 * node] + self.covered[2 * node + 1]
        };
    }
}

/// Size of a greedy `δ`-net in the Korányi distance.
fn koranyi_net(pts: &[HPoint], d: f64) -> u64 {
    // d_K(a,b) <= δ forces |Δx|,|Δy| <= δ and |Δt| <= δ² + 2δ(|x|+|y|)
    let rmax = pts.iter().map(|p| p.x.abs() + p.y.abs()).fold(0.0, f64::max);
    let ct = d * d + 2.0 * d * rmax;
    let key = |p: &HPoint| (cell(p.x, d), cell(p.y, d), cell(p.t, ct));
    let mut buckets: HashMap<(i64, i64, i64), Vec<HPoint>> = HashMap::new();
    let mut count = 0u64;
    for p in pts {
        let (i, j, k) = key(p);
        let mut covered = false;
        'search: for di in -1..=1 {
            for dj in -1..=1 {
                for dk in -1..=1 {
                    if let Some(v) = buckets.get(&(i + di, j + dj, k + dk)) {
                        if v.iter().any(|c| koranyi_dist(*c, *p) <= d) {
                            covered = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if !covered {
            buckets.entry((i, j, k)).or_default().push(*p);
            count += 1;
        }
    }
    count
}

fn koranyi_net_boxes(boxes: &[Box3], d: f64) -> Result<u64> {
    // sampling lattice: a quarter of δ in x and y, a sixteenth of δ² in t
    let sp = 0.25 * d;
    let st = 0.0625 * d * d;
    let steps = |iv: [f64; 2], s: f64| ((iv[1] - iv[0]) / s).ceil().max(0.0) as u64 + 1;
    let total: u64 = boxes.iter().map(|b| steps(b.x, sp) * steps(b.y, sp) * steps(b.t, st)).sum();
    if total > MAX_CELLS {
        return Err(Error::InvalidParameter(format!("scale {d} is too fine for this box union")));
    }
    let mut pts = Vec::with_capacity(total as usize);
    let lin = |iv: [f64; 2], n: u64, i: u64| {
        if n == 1 {
            iv[0]
        } else {
            iv[0] + (iv[1] - iv[0]) * i as f64 / (n - 1) as f64
        }
    };
    for b in boxes {
        let (nx, ny, nt) = (steps(b.x, sp), steps(b.y, sp), steps(b.t, st));
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nt {
                    pts.push(HPoint::new(lin(b.x, nx, i), lin(b.y, ny, j), lin(b.t, nt, k)));
                }
            }
        }
    }
    Ok(koranyi_net(&pts, d))
}

/// Envelope `(max{α, 2α−2}, min{2α, α+1})` for the cc-dimension of a set of
/// Euclidean dimension `α`.
pub fn dct_bounds(alpha: f64) -> Result<(f64, f64)> {
    if !(0.0..=3.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, 3]")));
    }
    Ok((alpha.max(2.0 * alpha - 2.0), (2.0 * alpha).min(alpha + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dct_table() {
        assert_eq!(dct_bounds(0.0).unwrap(), (0.0, 0.0));
        assert_eq!(dct_bounds(1.0).unwrap(), (1.0, 2.0));
        assert_eq!(dct_bounds(2.0).unwrap(), (2.0, 3.0));
        assert_eq!(dct_bounds(3.0).unwrap(), (4.0, 4.0));
        assert!(dct_bounds(3.5).is_err());
        assert!(dct_bounds(f64::NAN).is_err());
    }

    #[test]
    fn scale_checks() {
        let pts = DimInput::Points(vec![HPoint::ORIGIN, HPoint::new(1.0, 1.0, 1.0)]);
        assert!(box_dimension(&pts, Gauge::Euclidean, &[0.1, 0.2, 0.3]).is_err());
        assert!(box_dimension(&pts, Gauge::Euclidean, &[0.1, 0.2, 0.3, 0.4]).is_err());
        let one = DimInput::Points(vec![HPoint::ORIGIN]);
        let r = box_dimension(&one, Gauge::Euclidean, &[0.01, 0.03, 0.1, 0.5]);
        assert!(matches!(r, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn segment_is_one_dimensional() {
        let pts: Vec<_> = (0..20_000).map(|i| HPoint::new(i as f64 / 20_000.0, 0.0, 0.0)).collect();
        let e = box_dimension(&DimInput::Points(pts), Gauge::Euclidean, &[0.2, 0.05, 0.02, 0.005]).unwrap();
        assert!((e.slope - 1.0).abs() < 0.05, "{}", e.slope);
    }

    #[test]
    fn single_box_matches_cell_count() {
        let b = Box3::new([0.0, 0.99], [0.0, 0.49], [0.0, 0.0]).unwrap();
        assert_eq!(euclidean_boxes(&[b], [0.0; 3], 0.1).unwrap(), 50);
        let unit = Box3::new([0.0, 1.0], [0.0, 1.0], [0.0, 1.0]).unwrap();
        assert_eq!(euclidean_boxes(&[unit], [0.0; 3], 0.25).unwrap(), 64);
    }

    proptest::proptest! {
        #[test]
        fn union_area_matches_cell_enumeration(
            raw in proptest::collection::vec((0i64..30, 1i64..12, 0i64..30, 1i64..12), 0..25)
        ) {
            let mut rects: Vec<Rect> =
                raw.iter().map(|&(x, w, y, h)| Rect { x: [x, x + w], y: [y, y + h] }).collect();
            let mut cells = HashSet::new();
            for r in &rects {
                for i in r.x[0]..r.x[1] {
                    for j in r.y[0]..r.y[1] {
                        cells.insert((i, j));
                    }
                }
            }
            proptest::prop_assert_eq!(union_area(&mut rects), cells.len() as u64);
        }
    }
}
