//! Sign-grid flood fill, an independent and approximate nodal-domain counter.
//!
//! `phi` is sampled at `(pi i / r, pi j / r)` for `0 < j < i < r`, samples with
//! `|phi|` below [`ZERO_THRESHOLD`] are dropped, and same-sign samples are
//! joined across the four lattice neighbours with Hoshen-Kopelman labelling.
//! Only used to cross-check the exact methods.

use rayon::prelude::*;

use crate::error::{NodalError, Result};
use crate::modes::{gcd, ModePair};
use crate::phi::sin_pi_ratio;
use crate::unionfind::UnionFind;

pub const ZERO_THRESHOLD: f64 = 1e-12;
/// Resolutions per unit of `max(m, n)` at the first attempt.
pub const START_FACTOR: u64 = 20;
pub const DEFAULT_MAX_RESOLUTION: u64 = 1 << 14;
/// Rows sampled in parallel before they are labelled.
const ROW_BLOCK: u64 = 128;

/// Signs of the samples: row `i` holds `j = 1 .. i - 1`, with `0` for
/// dropped samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignGrid {
    pub resolution: u64,
    rows: Vec<Vec<i8>>,
}

struct Sines {
    m: Vec<f64>,
    n: Vec<f64>,
}

impl Sines {
    fn new(mode: ModePair, r: u64) -> Self {
        let table = |k: u64| {
            (0..r)
                .map(|i| sin_pi_ratio(k as u128 * i as u128, r as u128))
                .collect()
        };
        Sines {
            m: table(mode.m()),
            n: table(mode.n()),
        }
    }

    fn row(&self, i: usize) -> Vec<i8> {
        (1..i)
            .map(|j| {
                let v = self.m[i] * self.n[j] - self.n[i] * self.m[j];
                if v.abs() < ZERO_THRESHOLD {
                    0
                } else if v > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }
}

impl SignGrid {
    pub fn sample(mode: ModePair, r: u64) -> Result<Self> {
        check_resolution(mode, r)?;
        let sines = Sines::new(mode, r);
        let rows = (0..r as usize)
            .into_par_iter()
            .map(|i| sines.row(i))
            .collect();
        Ok(SignGrid {
            resolution: r,
            rows,
        })
    }

    pub fn sign(&self, i: usize, j: usize) -> i8 {
        if j == 0 || j >= i || i >= self.rows.len() {
            0
        } else {
            self.rows[i][j - 1]
        }
    }

    pub fn components(&self) -> u64 {
        let mut hk = Labeler::default();
        for row in &self.rows {
            hk.push_row(row);
        }
        hk.count()
    }
}

fn check_resolution(mode: ModePair, r: u64) -> Result<()> {
    if r < 4 * mode.m() {
        return Err(NodalError::InvalidParameter(format!(
            "resolution {r} below 4 max(m, n) = {}",
            4 * mode.m()
        )));
    }
    if r > u32::MAX as u64 {
        return Err(NodalError::InvalidParameter(format!(
            "resolution {r} too large"
        )));
    }
    Ok(())
}

/// Row-by-row Hoshen-Kopelman labelling keeping only the previous row.
#[derive(Default)]
struct Labeler {
    uf: Option<UnionFind>,
    prev_signs: Vec<i8>,
    prev_labels: Vec<u32>,
}

impl Labeler {
    fn push_row(&mut self, signs: &[i8]) {
        let uf = self.uf.get_or_insert_with(|| UnionFind::new(0));
        let mut labels = vec![u32::MAX; signs.len()];
        for (j, &s) in signs.iter().enumerate() {
            if s == 0 {
                continue;
            }
            let left = (j > 0 && signs[j - 1] == s).then(|| labels[j - 1]);
            let below =
                (j < self.prev_signs.len() && self.prev_signs[j] == s).then(|| self.prev_labels[j]);
            labels[j] = match (left, below) {
                (Some(a), Some(b)) => {
                    uf.union(a as usize, b as usize);
                    a
                }
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => uf.push() as u32,
            };
        }
        self.prev_signs = signs.to_vec();
        self.prev_labels = labels;
    }

    fn count(self) -> u64 {
        self.uf.map_or(0, |mut uf| uf.components() as u64)
    }
}

/// Number of sign-connected sample clusters at resolution `r`.
pub fn grid_count(mode: ModePair, r: u64) -> Result<u64> {
    check_resolution(mode, r)?;
    let sines = Sines::new(mode, r);
    let mut hk = Labeler::default();
    let mut start = 0u64;
    while start < r {
        let end = (start + ROW_BLOCK).min(r);
        let rows: Vec<Vec<i8>> = (start as usize..end as usize)
            .into_par_iter()
            .map(|i| sines.row(i))
            .collect();
        for row in &rows {
            hk.push_row(row);
        }
        start = end;
    }
    Ok(hk.count())
}

/// Smallest admissible resolution not below `r`. Tiling modes carry straight
/// nodal lines at multiples of `pi / d`; placing samples exactly on them
/// makes those samples vanish exactly.
fn align(mode: ModePair, r: u64) -> u64 {
    let step = 2 * gcd(mode.m(), mode.n());
    r.div_ceil(step) * step
}

/// Doubles the resolution from `20 max(m, n)` until two consecutive counts
/// agree, giving up past `max_resolution`.
pub fn stable_count_with_cap(mode: ModePair, max_resolution: u64) -> Result<u64> {
    let mut r = align(mode, START_FACTOR * mode.m());
    let mut last = grid_count(mode, r)?;
    loop {
        let next_r = 2 * r;
        if next_r > max_resolution {
            return Err(NodalError::NoConvergence {
                m: mode.m(),
                n: mode.n(),
                resolution: r,
            });
        }
        let next = grid_count(mode, next_r)?;
        if next == last {
            return Ok(next);
        }
        last = next;
        r = next_r;
    }
}

pub fn stable_count(mode: ModePair) -> Result<u64> {
    stable_count_with_cap(mode, DEFAULT_MAX_RESOLUTION)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(m: u64, n: u64) -> ModePair {
        ModePair::new(m, n).unwrap()
    }

    #[test]
    fn fixtures() {
        assert_eq!(grid_count(mode(2, 1), 64).unwrap(), 1);
        assert_eq!(grid_count(mode(9, 4), 512).unwrap(), 10);
        assert_eq!(grid_count(mode(3, 2), 128).unwrap(), 2);
    }

    #[test]
    fn stable_fixtures() {
        assert_eq!(stable_count(mode(2, 1)).unwrap(), 1);
        assert_eq!(stable_count(mode(7, 2)).unwrap(), 5);
        assert_eq!(stable_count(mode(21, 6)).unwrap(), 45);
    }

    #[test]
    fn materialised_grid_matches_streaming() {
        for (m, n) in [(9, 4), (9, 5), (12, 5)] {
            let md = mode(m, n);
            let g = SignGrid::sample(md, 200).unwrap();
            assert_eq!(g.components(), grid_count(md, 200).unwrap());
            assert_eq!(g.sign(5, 5), 0);
        }
    }

    #[test]
    fn too_coarse_is_rejected() {
        assert!(grid_count(mode(9, 4), 20).is_err());
    }

    #[test]
    fn cap_reports_non_convergence() {
        assert!(matches!(
            stable_count_with_cap(mode(9, 4), 200),
            Err(NodalError::NoConvergence { .. })
        ));
    }
}
