//! Checkerboard cell decomposition of the triangle.
//!
//! Both product factors `sin(mx)sin(ny)` and `sin(nx)sin(my)` vanish on the
//! lines `x, y in (pi/m) Z` and `x, y in (pi/n) Z`. In units of `pi / (mn)`
//! these lines sit at the merged breakpoints `{i n} u {j m}`, identical on both
//! axes. For a non-tiling pair the two progressions only meet at `0` and `mn`,
//! so there are `m + n - 1` intervals per axis.

use arrayvec::ArrayVec;
use serde::Serialize;

use crate::error::{NodalError, Result};
use crate::modes::ModePair;
use crate::phi::{FactorTable, Sign};

/// Which progression a breakpoint belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    /// `t = i n`, the lines `x = pi i / m`.
    StepN,
    /// `t = j m`, the lines `x = pi j / n`.
    StepM,
    /// The endpoints `0` and `mn`.
    Both,
}

/// Lattice point with coordinates `pi * (tx, ty) / (mn)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GridPoint {
    pub tx: u64,
    pub ty: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellShape {
    Rectangle,
    /// The half `{y < x}` of a square on the diagonal.
    DiagonalTriangle,
}

/// Which part of the triangle boundary a cell has a side on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySide {
    Interior,
    Bottom,
    Right,
    BottomRight,
    Hypotenuse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerPos {
    BottomLeft,
    BottomRight,
    TopLeft,
    TopRight,
}

/// A cell corner that belongs to the vertex set `V_{m,n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Corner {
    pub pos: CornerPos,
    pub point: GridPoint,
    /// Graph vertex id; the anchor is `0`.
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cell {
    /// Scan position: `a (a + 1) / 2 + b`.
    pub index: usize,
    /// Interval index along x.
    pub a: usize,
    /// Interval index along y, `b <= a`.
    pub b: usize,
    pub x: (u64, u64),
    pub y: (u64, u64),
    pub shape: CellShape,
    pub shaded: bool,
    pub boundary: BoundarySide,
    pub v_corners: ArrayVec<Corner, 4>,
}

/// One nodal-line segment inside a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    pub cell: usize,
}

impl GraphEdge {
    fn new(a: usize, b: usize, cell: usize) -> Self {
        GraphEdge {
            u: a.min(b),
            v: a.max(b),
            cell,
        }
    }
}

/// Breakpoints of a non-tiling mode plus the sine tables used by the cells.
#[derive(Clone, Debug)]
pub struct Lattice {
    mode: ModePair,
    breaks: Vec<u64>,
    family: Vec<Family>,
    /// Factors at `breaks[p]` (index `2p`) and interval midpoints (`2p + 1`),
    /// over the denominator `2mn`.
    table: FactorTable,
}

impl Lattice {
    pub fn new(mode: ModePair) -> Result<Self> {
        mode.require_nontiling()?;
        let (m, n) = (mode.m(), mode.n());
        let total = m * n;
        let mut breaks = Vec::with_capacity((m + n) as usize);
        let mut family = Vec::with_capacity((m + n) as usize);
        breaks.push(0);
        family.push(Family::Both);
        let (mut i, mut j) = (1u64, 1u64);
        while i < m || j < n {
            let tn = i * n;
            let tm = j * m;
            if j >= n || (i < m && tn < tm) {
                breaks.push(tn);
                family.push(Family::StepN);
                i += 1;
            } else {
                breaks.push(tm);
                family.push(Family::StepM);
                j += 1;
            }
        }
        breaks.push(total);
        family.push(Family::Both);

        let mut nums = Vec::with_capacity(2 * breaks.len());
        for w in breaks.windows(2) {
            nums.push(2 * w[0]);
            nums.push(w[0] + w[1]);
        }
        nums.push(2 * total);
        let table = FactorTable::new(mode, 2 * total, nums);
        Ok(Lattice {
            mode,
            breaks,
            family,
            table,
        })
    }

    pub fn mode(&self) -> ModePair {
        self.mode
    }

    pub fn breakpoints(&self) -> &[u64] {
        &self.breaks
    }

    pub fn families(&self) -> &[Family] {
        &self.family
    }

    /// Number of intervals per axis.
    pub fn intervals(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn cell_count(&self) -> usize {
        let k = self.intervals();
        k * (k + 1) / 2
    }

    pub fn vertex_count(&self) -> usize {
        vertex_count(self.mode)
    }

    /// Vertex id of the lattice point at breakpoint indices `(p, q)`, if it
    /// lies in `V_{m,n}`.
    pub fn vertex_at(&self, p: usize, q: usize) -> Option<usize> {
        let k = self.intervals();
        if q == 0 || p >= k || q >= p || self.family[p] != self.family[q] {
            return None;
        }
        let (m, n) = (self.mode.m(), self.mode.n());
        let (tx, ty) = (self.breaks[p], self.breaks[q]);
        Some(match self.family[p] {
            Family::StepN => 1 + tri_index(tx / n, ty / n),
            Family::StepM => 1 + choose2(m - 1) as usize + tri_index(tx / m, ty / m),
            Family::Both => unreachable!("endpoints are excluded above"),
        })
    }

    fn parity_at(&self, s: u64) -> (u64, u64) {
        let (m, n) = (self.mode.m(), self.mode.n());
        // sign of sin(m x) at x = pi s / (2mn) is (-1)^floor(s / 2n)
        (s / (2 * n), s / (2 * m))
    }

    pub fn cell(&self, a: usize, b: usize) -> Cell {
        debug_assert!(b <= a && a < self.intervals());
        let k = self.intervals();
        let x = (self.breaks[a], self.breaks[a + 1]);
        let y = (self.breaks[b], self.breaks[b + 1]);
        // Each factor's sign only depends on the interval, so the midpoints
        // serve for triangles as well.
        let (xm, xn) = self.parity_at(x.0 + x.1);
        let (ym, yn) = self.parity_at(y.0 + y.1);
        // phi1 = sin(mx) sin(ny), phi2 = sin(nx) sin(my)
        let shaded = (xm + yn + xn + ym) % 2 == 0;
        let shape = if a == b {
            CellShape::DiagonalTriangle
        } else {
            CellShape::Rectangle
        };
        let boundary = match shape {
            CellShape::DiagonalTriangle => BoundarySide::Hypotenuse,
            CellShape::Rectangle => match (b == 0, a + 1 == k) {
                (true, true) => BoundarySide::BottomRight,
                (true, false) => BoundarySide::Bottom,
                (false, true) => BoundarySide::Right,
                (false, false) => BoundarySide::Interior,
            },
        };
        let mut v_corners = ArrayVec::new();
        let candidates: &[(CornerPos, usize, usize)] = match shape {
            CellShape::DiagonalTriangle => &[(CornerPos::BottomRight, a + 1, b)],
            CellShape::Rectangle => &[
                (CornerPos::BottomLeft, a, b),
                (CornerPos::BottomRight, a + 1, b),
                (CornerPos::TopLeft, a, b + 1),
                (CornerPos::TopRight, a + 1, b + 1),
            ],
        };
        for &(pos, p, q) in candidates {
            if let Some(vertex) = self.vertex_at(p, q) {
                v_corners.push(Corner {
                    pos,
                    point: GridPoint {
                        tx: self.breaks[p],
                        ty: self.breaks[q],
                    },
                    vertex,
                });
            }
        }
        Cell {
            index: a * (a + 1) / 2 + b,
            a,
            b,
            x,
            y,
            shape,
            shaded,
            boundary,
            v_corners,
        }
    }

    /// All cells in scan order (a ascending, then b ascending).
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.intervals()).flat_map(move |a| (0..=a).map(move |b| self.cell(a, b)))
    }

    fn assertion(&self, cell: &Cell, reason: String) -> NodalError {
        NodalError::CellAssertion {
            m: self.mode.m(),
            n: self.mode.n(),
            cell: cell.index,
            reason,
        }
    }

    /// Nodal-line segments inside one cell.
    ///
    /// Unshaded cells carry no nodal line. For shaded cells:
    ///
    /// * an interior rectangle with two `V` corners gets one edge joining them;
    /// * an interior rectangle with four `V` corners gets two edges, each
    ///   running along one of the two opposite sides on which `phi` has the
    ///   sign opposite to its value at the centre;
    /// * a cell with a side on the boundary and a single `V` point gets an
    ///   edge to the anchor, and with two `V` points an edge joining them.
    pub fn edges_for_cell(&self, cell: &Cell) -> Result<CellEdges> {
        let mut out = CellEdges::default();
        if !cell.shaded {
            return Ok(out);
        }
        let corners = &cell.v_corners;
        let idx = cell.index;
        match (cell.boundary, corners.len()) {
            (_, 0) => {
                if matches!(
                    cell.boundary,
                    BoundarySide::Bottom | BoundarySide::Right | BoundarySide::BottomRight
                ) {
                    out.empty_boundary = true;
                }
            }
            (BoundarySide::Interior, 2) => {
                out.edges
                    .push(GraphEdge::new(corners[0].vertex, corners[1].vertex, idx));
            }
            (BoundarySide::Interior, 4) => {
                out.four_corner = true;
                let (vertical, extended) = self.four_corner_orientation(cell)?;
                out.extended = extended;
                let at = |pos: CornerPos| corners.iter().find(|c| c.pos == pos).unwrap().vertex;
                use CornerPos::*;
                let pairs = if vertical {
                    [(BottomLeft, TopLeft), (BottomRight, TopRight)]
                } else {
                    [(BottomLeft, BottomRight), (TopLeft, TopRight)]
                };
                for (p, q) in pairs {
                    out.edges.push(GraphEdge::new(at(p), at(q), idx));
                }
            }
            (BoundarySide::Interior, c) => {
                return Err(self.assertion(cell, format!("interior rectangle with {c} V corners")));
            }
            (_, 1) => {
                out.edges.push(GraphEdge::new(corners[0].vertex, 0, idx));
            }
            (BoundarySide::Bottom | BoundarySide::Right, 2) => {
                out.edges
                    .push(GraphEdge::new(corners[0].vertex, corners[1].vertex, idx));
            }
            (_, c) => {
                return Err(self.assertion(cell, format!("boundary cell with {c} V points")));
            }
        }
        Ok(out)
    }

    /// True when the two nodal lines of a four-corner cell run along its left
    /// and right sides, false for bottom and top.
    fn four_corner_orientation(&self, cell: &Cell) -> Result<(bool, bool)> {
        let (a, b) = (cell.a, cell.b);
        let centre = self.table.eval(2 * a + 1, 2 * b + 1)?;
        if centre.sign == Sign::Zero {
            return Err(self.assertion(cell, "phi vanishes at the centre".into()));
        }
        let left = self.table.eval(2 * a, 2 * b + 1)?.sign;
        let right = self.table.eval(2 * a + 2, 2 * b + 1)?.sign;
        let bottom = self.table.eval(2 * a + 1, 2 * b)?.sign;
        let top = self.table.eval(2 * a + 1, 2 * b + 2)?.sign;
        let opposite = centre.sign.flip();
        let flags = [left, right, bottom, top].map(|s| s == opposite);
        match flags {
            [true, true, false, false] => Ok((true, centre.extended)),
            [false, false, true, true] => Ok((false, centre.extended)),
            _ => Err(self.assertion(
                cell,
                format!(
                    "four-corner sign pattern centre={:?} l={left:?} r={right:?} b={bottom:?} t={top:?}",
                    centre.sign
                ),
            )),
        }
    }
}

/// Output of [`Lattice::edges_for_cell`].
#[derive(Clone, Debug, Default)]
pub struct CellEdges {
    pub edges: ArrayVec<GraphEdge, 2>,
    pub four_corner: bool,
    pub extended: bool,
    /// Shaded cell with a boundary side and no `V` point.
    pub empty_boundary: bool,
}

fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Position of `(i, j)`, `0 < j < i`, in row-major order starting at `(2, 1)`.
fn tri_index(i: u64, j: u64) -> usize {
    ((i - 1) * (i - 2) / 2 + (j - 1)) as usize
}

/// `|V_{m,n}| = C(m-1, 2) + C(n-1, 2)`.
pub fn vertex_count(mode: ModePair) -> usize {
    (choose2(mode.m() - 1) + choose2(mode.n() - 1)) as usize
}

/// The vertex set `V_{m,n}` in id order (id = position + 1).
pub fn v_points(mode: ModePair) -> Result<Vec<GridPoint>> {
    mode.require_nontiling()?;
    let (m, n) = (mode.m(), mode.n());
    let mut out = Vec::with_capacity(vertex_count(mode));
    for (count, step) in [(m, n), (n, m)] {
        for i in 2..count {
            for j in 1..i {
                out.push(GridPoint {
                    tx: i * step,
                    ty: j * step,
                });
            }
        }
    }
    Ok(out)
}

pub fn build_cells(mode: ModePair) -> Result<Vec<Cell>> {
    let lattice = Lattice::new(mode)?;
    Ok(lattice.cells().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn mode(m: u64, n: u64) -> ModePair {
        ModePair::new(m, n).unwrap()
    }

    #[test]
    fn v_points_examples() {
        assert_eq!(
            v_points(mode(3, 2)).unwrap(),
            vec![GridPoint { tx: 4, ty: 2 }]
        );
        assert!(v_points(mode(2, 1)).unwrap().is_empty());
        let v = v_points(mode(9, 4)).unwrap();
        assert_eq!(v.len(), 31);
        assert_eq!(
            v.iter().filter(|p| p.tx % 4 == 0 && p.tx % 9 != 0).count(),
            28
        );
        assert!(v_points(mode(9, 5)).is_err());
    }

    #[test]
    fn cells_of_2_1() {
        let cells = build_cells(mode(2, 1)).unwrap();
        let lat = Lattice::new(mode(2, 1)).unwrap();
        assert_eq!(lat.breakpoints(), &[0, 1, 2]);
        assert_eq!(cells.len(), 3);
        assert_eq!(
            cells
                .iter()
                .filter(|c| c.shape == CellShape::Rectangle)
                .count(),
            1
        );
        assert!(cells.iter().all(|c| c.v_corners.is_empty()));
    }

    #[test]
    fn vertex_ids_match_enumeration() {
        for (m, n) in [(9, 4), (12, 7), (17, 2), (6, 5)] {
            let md = mode(m, n);
            let lat = Lattice::new(md).unwrap();
            let pts = v_points(md).unwrap();
            let mut seen = BTreeSet::new();
            let k = lat.intervals();
            for p in 0..=k {
                for q in 0..=k {
                    if let Some(id) = lat.vertex_at(p, q) {
                        let gp = GridPoint {
                            tx: lat.breakpoints()[p],
                            ty: lat.breakpoints()[q],
                        };
                        assert_eq!(pts[id - 1], gp);
                        seen.insert(id);
                    }
                }
            }
            assert_eq!(seen.len(), vertex_count(md));
        }
    }

    #[test]
    fn shading_matches_factor_signs() {
        let md = mode(9, 4);
        let lat = Lattice::new(md).unwrap();
        let den = 2 * 36;
        for c in lat.cells() {
            let (sx, sy) = (c.x.0 + c.x.1, c.y.0 + c.y.1);
            let f = |k: u64, s: u64| crate::phi::sin_pi_ratio((k * s) as u128, den as u128);
            let phi1 = f(9, sx) * f(4, sy);
            let phi2 = f(4, sx) * f(9, sy);
            assert_eq!(c.shaded, (phi1 > 0.0) == (phi2 > 0.0), "cell {c:?}");
        }
    }

    #[test]
    fn cells_below_diagonal_corner_are_unshaded() {
        for (m, n) in [(9, 4), (23, 4), (31, 12)] {
            let lat = Lattice::new(mode(m, n)).unwrap();
            for a in 1..lat.intervals() {
                assert!(!lat.cell(a, a - 1).shaded);
                assert!(lat.cell(a, a).shaded);
            }
        }
    }

    #[test]
    fn empty_triangle_has_no_edges() {
        let lat = Lattice::new(mode(9, 4)).unwrap();
        let c = lat.cell(0, 0);
        assert!(c.v_corners.is_empty());
        assert!(lat.edges_for_cell(&c).unwrap().edges.is_empty());
    }
}
