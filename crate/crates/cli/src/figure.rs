use std::fmt::Write;

use heisgeo::obstacles::Box3;
use heisgeo::HPoint;

/// What a run can draw: curves through `(x, y, t)` points and boxes, both
/// shown by their planar projection.
#[derive(Debug, Default)]
pub struct Figure {
    pub curves: Vec<Vec<HPoint>>,
    pub boxes: Vec<Box3>,
    pub marks: Vec<HPoint>,
}

impl Figure {
    fn bounds(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        let mut take = |x: f64, y: f64| {
            b = [b[0].min(x), b[1].min(y), b[2].max(x), b[3].max(y)];
        };
        self.curves.iter().flatten().chain(&self.marks).for_each(|p| take(p.x, p.y));
        for bx in &self.boxes {
            take(bx.x[0], bx.y[0]);
            take(bx.x[1], bx.y[1]);
        }
        if !b[0].is_finite() {
            return [-1.0, -1.0, 1.0, 1.0];
        }
        let pad = 0.05 * (b[2] - b[0]).max(b[3] - b[1]).max(1e-9);
        [b[0] - pad, b[1] - pad, b[2] + pad, b[3] + pad]
    }

    /// Planar projection as SVG, `y` pointing up.
    pub fn svg(&self) -> String {
        let [x0, y0, x1, y1] = self.bounds();
        let w = x1 - x0;
        let h = y1 - y0;
        let stroke = 0.003 * w.max(h);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="{:.0}" viewBox="{x0} {} {w} {h}">"#,
            800.0 * h / w,
            -y1
        );
        let _ = writeln!(s, r#"<g transform="scale(1,-1)" stroke-width="{stroke}">"#);
        for b in &self.boxes {
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="steelblue" fill-opacity="0.15" stroke="steelblue"/>"#,
                b.x[0],
                b.y[0],
                b.x[1] - b.x[0],
                b.y[1] - b.y[0]
            );
        }
        for c in &self.curves {
            let pts: Vec<String> = c.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="firebrick"/>"#, pts.join(" "));
        }
        for p in &self.marks {
            let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="{}" fill="black"/>"#, p.x, p.y, 3.0 * stroke);
        }
        s.push_str("</g>\n</svg>\n");
        s
    }

    /// One row per curve vertex and per box.
    pub fn csv(&self) -> String {
        let mut s = String::from("kind,index,x0,y0,t0,x1,y1,t1\n");
        for (i, c) in self.curves.iter().enumerate() {
            for p in c {
                let _ = writeln!(s, "vertex,{i},{},{},{},,,", p.x, p.y, p.t);
            }
        }
        for (i, b) in self.boxes.iter().enumerate() {
            let _ = writeln!(s, "box,{i},{},{},{},{},{},{}", b.x[0], b.y[0], b.t[0], b.x[1], b.y[1], b.t[1]);
        }
        for (i, p) in self.marks.iter().enumerate() {
            let _ = writeln!(s, "mark,{i},{},{},{},,,", p.x, p.y, p.t);
        }
        s
    }
}
