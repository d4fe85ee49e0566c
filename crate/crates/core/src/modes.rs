//! Eigenfunction labels, spectral ordering and tiling reduction.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{NodalError, Result};

/// Largest admissible eigenvalue cutoff; keeps `m^2 + n^2` inside `u64`.
pub const MAX_LAMBDA: u64 = 1 << 62;

/// Label `(m, n)` of the eigenfunction `sin(mx)sin(ny) - sin(nx)sin(my)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ModePair {
    m: u64,
    n: u64,
}

impl ModePair {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        if n < 1 || m <= n || m > (1 << 31) {
            return Err(NodalError::InvalidMode { m, n });
        }
        Ok(ModePair { m, n })
    }

    pub fn m(self) -> u64 {
        self.m
    }

    pub fn n(self) -> u64 {
        self.n
    }

    pub fn lambda(self) -> u64 {
        self.m * self.m + self.n * self.n
    }

    /// `gcd(m, n) = 1` and `m + n` odd.
    pub fn is_nontiling(self) -> bool {
        gcd(self.m, self.n) == 1 && (self.m + self.n) % 2 == 1
    }

    pub(crate) fn require_nontiling(self) -> Result<()> {
        if self.is_nontiling() {
            Ok(())
        } else {
            Err(NodalError::TilingMode {
                m: self.m,
                n: self.n,
            })
        }
    }
}

impl fmt::Display for ModePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Result of reducing a tiling mode to the pattern it is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Reduction {
    pub original: ModePair,
    pub reduced: ModePair,
    /// Number of congruent copies of the reduced pattern.
    pub tiles: u64,
    /// `gcd(m, n)` of the original pair.
    pub gcd: u64,
    /// Whether the antisymmetry step `((m+n)/2, (m-n)/2)` was applied.
    pub parity_step: bool,
}

/// Divide out `gcd(m, n)`, then apply at most one parity step.
///
/// With `gcd = 1` and an even sum both entries are odd, so the parity step
/// lands on a pair with odd sum and `gcd = 1`; no further iteration is needed.
pub fn reduce(mode: ModePair) -> Reduction {
    let d = gcd(mode.m, mode.n);
    let (mut m, mut n) = (mode.m / d, mode.n / d);
    let mut tiles = d * d;
    let parity_step = (m + n) % 2 == 0;
    if parity_step {
        (m, n) = ((m + n) / 2, (m - n) / 2);
        tiles *= 2;
    }
    let reduced = ModePair { m, n };
    debug_assert!(reduced.is_nontiling());
    Reduction {
        original: mode,
        reduced,
        tiles,
        gcd: d,
        parity_step,
    }
}

pub fn is_nontiling(mode: ModePair) -> bool {
    mode.is_nontiling()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralEntry {
    /// 1-based position in the ordered spectrum.
    pub index: u64,
    pub mode: ModePair,
}

/// All admissible modes with `lambda <= max_lambda`, ordered by
/// `(lambda, n)` ascending.
#[derive(Clone, Debug)]
pub struct SpectralSequence {
    pub entries: Vec<SpectralEntry>,
    pub max_lambda: u64,
}

impl SpectralSequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn check_cutoff(max_lambda: u64) -> Result<()> {
    if max_lambda < 5 {
        return Err(NodalError::CutoffTooSmall(max_lambda));
    }
    if max_lambda > MAX_LAMBDA {
        return Err(NodalError::CutoffTooLarge(max_lambda));
    }
    Ok(())
}

pub fn enumerate_spectrum(max_lambda: u64) -> Result<SpectralSequence> {
    check_cutoff(max_lambda)?;
    let entries = modes_in_range(5, max_lambda)
        .into_iter()
        .zip(1u64..)
        .map(|(mode, index)| SpectralEntry { index, mode })
        .collect();
    Ok(SpectralSequence {
        entries,
        max_lambda,
    })
}

/// Modes with `low <= lambda <= high`, in spectral order.
pub fn modes_in_range(low: u64, high: u64) -> Vec<ModePair> {
    let mut out = Vec::new();
    let mut n = 1u64;
    while n * n + (n + 1) * (n + 1) <= high {
        let nn = n * n;
        let m_lo = if low > nn {
            ceil_sqrt(low - nn).max(n + 1)
        } else {
            n + 1
        };
        let m_hi = (high - nn).isqrt();
        for m in m_lo..=m_hi {
            out.push(ModePair { m, n });
        }
        n += 1;
    }
    out.sort_unstable_by_key(|p| (p.lambda(), p.n));
    out
}

/// Number of modes with `lambda <= max_lambda`, without materialising them.
pub fn spectral_count(max_lambda: u64) -> u64 {
    let mut total = 0;
    let mut n = 1u64;
    while n * n + (n + 1) * (n + 1) <= max_lambda {
        total += (max_lambda - n * n).isqrt() - n;
        n += 1;
    }
    total
}

fn ceil_sqrt(x: u64) -> u64 {
    let r = x.isqrt();
    if r * r == x {
        r
    } else {
        r + 1
    }
}

/// Streams the spectrum in consecutive eigenvalue blocks of width `block`.
///
/// Each yielded block carries the 1-based index of its first entry, so the
/// concatenation of all blocks equals [`enumerate_spectrum`].
pub struct SpectrumBlocks {
    next_low: u64,
    max_lambda: u64,
    block: u64,
    next_index: u64,
}

impl SpectrumBlocks {
    pub fn new(max_lambda: u64, block: u64) -> Result<Self> {
        check_cutoff(max_lambda)?;
        if block == 0 {
            return Err(NodalError::InvalidParameter(
                "block width must be positive".into(),
            ));
        }
        Ok(SpectrumBlocks {
            next_low: 5,
            max_lambda,
            block,
            next_index: 1,
        })
    }
}

impl Iterator for SpectrumBlocks {
    type Item = (u64, Vec<ModePair>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_low > self.max_lambda {
            return None;
        }
        let high = self
            .next_low
            .saturating_add(self.block - 1)
            .min(self.max_lambda);
        let modes = modes_in_range(self.next_low, high);
        let first = self.next_index;
        self.next_index += modes.len() as u64;
        self.next_low = high + 1;
        Some((first, modes))
    }
}

/// Square root of the Weyl-estimated eigenvalue for spectral index `index`.
///
/// The triangle has area `A = pi^2 / 2`, so `q = sqrt(4 pi N / A) = sqrt(8N / pi)`.
pub fn weyl_q(index: f64) -> Result<f64> {
    if !(index > 0.0) || !index.is_finite() {
        return Err(NodalError::NonPositive(index));
    }
    Ok((8.0 * index / PI).sqrt())
}

/// Inverse of [`weyl_q`].
pub fn weyl_index(q: f64) -> f64 {
    PI * q * q / 8.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(m: u64, n: u64) -> ModePair {
        ModePair::new(m, n).unwrap()
    }

    #[test]
    fn rejects_invalid_pairs() {
        assert!(ModePair::new(2, 2).is_err());
        assert!(ModePair::new(1, 2).is_err());
        assert!(ModePair::new(3, 0).is_err());
    }

    #[test]
    fn reduction_examples() {
        let r = reduce(mode(9, 5));
        assert_eq!((r.reduced, r.tiles), (mode(7, 2), 2));
        let r = reduce(mode(21, 6));
        assert_eq!((r.reduced, r.tiles), (mode(7, 2), 9));
        let r = reduce(mode(9, 4));
        assert_eq!((r.reduced, r.tiles), (mode(9, 4), 1));
        let r = reduce(mode(6, 2));
        assert_eq!((r.reduced, r.tiles), (mode(2, 1), 8));
        assert_eq!(r.gcd, 2);
        assert!(r.parity_step);
    }

    #[test]
    fn nontiling_examples() {
        assert!(mode(9, 4).is_nontiling());
        assert!(!mode(9, 5).is_nontiling());
        assert!(mode(2, 1).is_nontiling());
    }

    #[test]
    fn spectrum_up_to_30() {
        let s = enumerate_spectrum(30).unwrap();
        let lambdas: Vec<u64> = s.entries.iter().map(|e| e.mode.lambda()).collect();
        assert_eq!(lambdas, vec![5, 10, 13, 17, 20, 25, 26, 29]);
        let pairs: Vec<(u64, u64)> = s.entries.iter().map(|e| (e.mode.m, e.mode.n)).collect();
        assert_eq!(
            pairs,
            vec![
                (2, 1),
                (3, 1),
                (3, 2),
                (4, 1),
                (4, 2),
                (4, 3),
                (5, 1),
                (5, 2)
            ]
        );
        assert_eq!(s.entries[0].index, 1);
    }

    #[test]
    fn degenerate_level_65_orders_by_n() {
        let s = enumerate_spectrum(65).unwrap();
        let at65: Vec<(u64, u64)> = s
            .entries
            .iter()
            .filter(|e| e.mode.lambda() == 65)
            .map(|e| (e.mode.m, e.mode.n))
            .collect();
        assert_eq!(at65, vec![(8, 1), (7, 4)]);
    }

    #[test]
    fn cutoff_below_ground_state() {
        assert!(matches!(
            enumerate_spectrum(4),
            Err(NodalError::CutoffTooSmall(4))
        ));
    }

    #[test]
    fn weyl_examples() {
        assert!((weyl_q(PI / 8.0).unwrap() - 1.0).abs() < 1e-15);
        let q = weyl_q(8.0 / PI).unwrap();
        assert!((q * q - 64.0 / (PI * PI)).abs() < 1e-12);
        assert!((weyl_q(100.0).unwrap() - 15.957691216057308).abs() < 1e-12);
        assert!(weyl_q(0.0).is_err());
        assert!(weyl_q(-1.0).is_err());
    }

    #[test]
    fn blocks_concatenate_to_full_spectrum() {
        let full = enumerate_spectrum(5000).unwrap();
        let mut joined = Vec::new();
        for (first, block) in SpectrumBlocks::new(5000, 333).unwrap() {
            assert_eq!(first, joined.len() as u64 + 1);
            joined.extend(block);
        }
        let expected: Vec<ModePair> = full.entries.iter().map(|e| e.mode).collect();
        assert_eq!(joined, expected);
        assert_eq!(spectral_count(5000), expected.len() as u64);
    }
}
