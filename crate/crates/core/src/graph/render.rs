//! Schematic SVG drawing of the cell decomposition and the nodal graph.
//!
//! The picture lives in the square `[0, pi]^2` with the y axis pointing up.
//! Edges are straight or single-bend polylines inside their cell; the real
//! nodal curves are not traced. Tiling modes are drawn by mapping the reduced
//! pattern onto each tile.

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::cells::{BoundarySide, Cell, CellShape, CornerPos, Lattice};
use crate::error::Result;
use crate::modes::{reduce, ModePair};

/// `(x, y) -> (a x + b y + e, c x + d y + f)`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Affine([f64; 6]);

impl Affine {
    const IDENTITY: Affine = Affine([1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);

    fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let [a, b, c, d, e, f] = self.0;
        (a * x + b * y + e, c * x + d * y + f)
    }

    /// `self` after `inner`.
    fn compose(&self, inner: &Affine) -> Affine {
        let [a, b, c, d, e, f] = self.0;
        let [p, q, r, s, t, u] = inner.0;
        Affine([
            a * p + b * r,
            a * q + b * s,
            c * p + d * r,
            c * q + d * s,
            a * t + b * u + e,
            c * t + d * u + f,
        ])
    }
}

/// Maps from the reduced triangle onto every tile of `mode`.
fn tile_maps(mode: ModePair) -> Vec<Affine> {
    let red = reduce(mode);
    // phi_{a+b, a-b}(x, y) = phi_{a,b}(x + y, x - y): the pattern of the
    // parity-reduced pair fills the half below the anti-diagonal, and its
    // mirror image the other half.
    let parity = if red.parity_step {
        vec![
            Affine([0.5, 0.5, 0.5, -0.5, 0.0, 0.0]),
            Affine([-0.5, 0.5, -0.5, -0.5, PI, PI]),
        ]
    } else {
        vec![Affine::IDENTITY]
    };
    // phi_{dm, dn}(x, y) = phi_{m,n}(dx, dy): d^2 copies, those above a
    // square's diagonal mirrored in it.
    let d = red.gcd as usize;
    let s = 1.0 / d as f64;
    let mut squares = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..=i {
            let (ox, oy) = (i as f64 * PI * s, j as f64 * PI * s);
            squares.push(Affine([s, 0.0, 0.0, s, ox, oy]));
            if j < i {
                squares.push(Affine([0.0, s, s, 0.0, ox, oy]));
            }
        }
    }
    let mut maps = Vec::with_capacity(squares.len() * parity.len());
    for outer in &squares {
        for inner in &parity {
            maps.push(outer.compose(inner));
        }
    }
    maps
}

struct Canvas {
    body: String,
    scale: f64,
}

impl Canvas {
    fn point(&self, map: &Affine, (tx, ty): (f64, f64)) -> (f64, f64) {
        map.apply((tx * self.scale, ty * self.scale))
    }

    fn points(&self, map: &Affine, pts: &[(f64, f64)]) -> String {
        let mut s = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.point(map, p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.6},{y:.6}");
        }
        s
    }

    fn polygon(&mut self, map: &Affine, pts: &[(f64, f64)], class: &str) {
        let p = self.points(map, pts);
        let _ = writeln!(self.body, "<polygon class=\"{class}\" points=\"{p}\"/>");
    }

    fn polyline(&mut self, map: &Affine, pts: &[(f64, f64)], class: &str) {
        let p = self.points(map, pts);
        let _ = writeln!(self.body, "<polyline class=\"{class}\" points=\"{p}\"/>");
    }

    fn dot(&mut self, map: &Affine, p: (f64, f64), r: f64) {
        let (x, y) = self.point(map, p);
        let _ = writeln!(
            self.body,
            "<circle class=\"vertex\" cx=\"{x:.6}\" cy=\"{y:.6}\" r=\"{r:.6}\"/>"
        );
    }
}

fn cell_outline(c: &Cell) -> Vec<(f64, f64)> {
    let (x0, x1) = (c.x.0 as f64, c.x.1 as f64);
    let (y0, y1) = (c.y.0 as f64, c.y.1 as f64);
    match c.shape {
        CellShape::Rectangle => vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)],
        CellShape::DiagonalTriangle => vec![(x0, y0), (x1, y0), (x1, y1)],
    }
}

fn corner_xy(c: &Cell, pos: CornerPos) -> (f64, f64) {
    let (x0, x1) = (c.x.0 as f64, c.x.1 as f64);
    let (y0, y1) = (c.y.0 as f64, c.y.1 as f64);
    match pos {
        CornerPos::BottomLeft => (x0, y0),
        CornerPos::BottomRight => (x1, y0),
        CornerPos::TopLeft => (x0, y1),
        CornerPos::TopRight => (x1, y1),
    }
}

/// Polyline for one edge inside `c`. Corners sharing a side are joined with
/// a bend pulled halfway from the side towards the centre.
fn edge_path(c: &Cell, from: CornerPos, to: Option<CornerPos>) -> Vec<(f64, f64)> {
    let (x0, x1) = (c.x.0 as f64, c.x.1 as f64);
    let (y0, y1) = (c.y.0 as f64, c.y.1 as f64);
    let centre = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let a = corner_xy(c, from);
    let Some(to) = to else {
        let target = match c.boundary {
            BoundarySide::Right => (x1, centre.1),
            BoundarySide::Hypotenuse => ((x0 + x1) / 2.0, (y0 + y1) / 2.0),
            _ => (centre.0, y0),
        };
        return vec![a, target];
    };
    let b = corner_xy(c, to);
    if a.0 != b.0 && a.1 != b.1 {
        return vec![a, b];
    }
    let mid = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
    let bend = (
        mid.0 + (centre.0 - mid.0) * 0.5,
        mid.1 + (centre.1 - mid.1) * 0.5,
    );
    vec![a, bend, b]
}

const STYLE: &str = "<style>\
.cell{fill:none;stroke:#bbbbbb;stroke-width:0.002}\
.shaded{fill:#d9d9d9;stroke:none}\
.tile{fill:none;stroke:#3060c0;stroke-width:0.006;stroke-dasharray:0.03 0.02}\
.edge{fill:none;stroke:#c00000;stroke-width:0.008;stroke-linejoin:round}\
.vertex{fill:#000000}\
.border{fill:none;stroke:#000000;stroke-width:0.01}\
</style>";

/// SVG document for any valid mode.
pub fn render_svg(mode: ModePair) -> Result<Vec<u8>> {
    let red = reduce(mode);
    let base = red.reduced;
    let lattice = Lattice::new(base)?;
    let maps = tile_maps(mode);
    let denom = (base.m() * base.n()) as f64;
    let mut canvas = Canvas {
        body: String::new(),
        scale: PI / denom,
    };
    let cells: Vec<Cell> = lattice.cells().collect();
    let radius = (PI / (mode.m() as f64 + 1.0) * 0.08).min(0.03);

    for map in &maps {
        for c in cells.iter().filter(|c| c.shaded) {
            canvas.polygon(map, &cell_outline(c), "shaded");
        }
    }
    for map in &maps {
        for c in &cells {
            canvas.polygon(map, &cell_outline(c), "cell");
        }
    }
    if maps.len() > 1 {
        let tri = [(0.0, 0.0), (denom, 0.0), (denom, denom)];
        for map in &maps {
            canvas.polygon(map, &tri, "tile");
        }
    }
    let mut paths = Vec::new();
    for c in cells.iter().filter(|c| c.shaded) {
        for e in &lattice.edges_for_cell(c)?.edges {
            let corner = |v: usize| c.v_corners.iter().find(|k| k.vertex == v).map(|k| k.pos);
            match (corner(e.u), corner(e.v)) {
                (Some(p), Some(q)) => paths.push(edge_path(c, p, Some(q))),
                (Some(p), None) | (None, Some(p)) => paths.push(edge_path(c, p, None)),
                (None, None) => {}
            }
        }
    }
    let vertices = super::v_points(base)?;
    for map in &maps {
        for path in &paths {
            canvas.polyline(map, path, "edge");
        }
        for p in &vertices {
            canvas.dot(map, (p.tx as f64, p.ty as f64), radius);
        }
    }

    let mut doc = String::new();
    let _ = writeln!(
        doc,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {PI:.6} {PI:.6}\" width=\"800\" height=\"800\">"
    );
    let _ = writeln!(
        doc,
        "<title>nodal pattern ({}, {})</title>",
        mode.m(),
        mode.n()
    );
    doc.push_str(STYLE);
    doc.push('\n');
    let _ = writeln!(doc, "<g transform=\"matrix(1 0 0 -1 0 {PI:.6})\">");
    doc.push_str(&canvas.body);
    let _ = writeln!(
        doc,
        "<polygon class=\"border\" points=\"0,0 {PI:.6},0 {PI:.6},{PI:.6}\"/>"
    );
    doc.push_str("</g>\n</svg>\n");
    Ok(doc.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(m: u64, n: u64) -> ModePair {
        ModePair::new(m, n).unwrap()
    }

    fn svg(m: u64, n: u64) -> String {
        String::from_utf8(render_svg(mode(m, n)).unwrap()).unwrap()
    }

    #[test]
    fn tile_counts() {
        assert_eq!(tile_maps(mode(9, 4)).len(), 1);
        assert_eq!(tile_maps(mode(9, 5)).len(), 2);
        assert_eq!(tile_maps(mode(21, 6)).len(), 9);
        assert_eq!(tile_maps(mode(6, 2)).len(), 8);
    }

    #[test]
    fn tiles_cover_the_triangle_once() {
        // The image corners of every tile stay inside the big triangle and
        // the tile areas add up to its area.
        for (m, n) in [(9, 5), (21, 6), (6, 2), (15, 3)] {
            let maps = tile_maps(mode(m, n));
            let mut area = 0.0;
            for map in &maps {
                let [a, b, c, d, _, _] = map.0;
                area += (a * d - b * c).abs() * PI * PI / 2.0;
                for p in [(0.0, 0.0), (PI, 0.0), (PI, PI)] {
                    let (x, y) = map.apply(p);
                    assert!(
                        y >= -1e-12 && x <= PI + 1e-12 && y <= x + 1e-12,
                        "{m},{n}: {x},{y}"
                    );
                }
            }
            assert!((area - PI * PI / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn parity_tiles_mirror_across_anti_diagonal() {
        let maps = tile_maps(mode(9, 5));
        let p = (2.0, 0.5);
        let (x0, y0) = maps[0].apply(p);
        let (x1, y1) = maps[1].apply(p);
        assert!((x0 + y1 - PI).abs() < 1e-12);
        assert!((y0 + x1 - PI).abs() < 1e-12);
    }

    #[test]
    fn render_2_1_has_no_edges() {
        let s = svg(2, 1);
        assert!(s.starts_with("<svg"));
        assert_eq!(s.matches("class=\"edge\"").count(), 0);
        assert_eq!(s.matches("<circle").count(), 0);
    }

    #[test]
    fn render_9_4_draws_every_edge() {
        let s = svg(9, 4);
        assert_eq!(s.matches("class=\"edge\"").count(), 36);
        assert_eq!(s.matches("<circle").count(), 31);
    }

    #[test]
    fn render_9_5_two_tiles() {
        let s = svg(9, 5);
        assert_eq!(s.matches("class=\"tile\"").count(), 2);
        let base = super::super::build_graph(mode(7, 2)).unwrap().edges.len();
        assert_eq!(s.matches("class=\"edge\"").count(), 2 * base);
    }
}
