//! Closed-form loop, boundary-intersection and nodal counts.
//!
//! The loop count of a non-tiling mode is `I(m, n) = Itilde(n, (m-n-1)/2, 0)`
//! where `Itilde` is a Euclid-like three-parameter recursion. The boundary
//! intersection count is `m + n - 3` and the nodal count recombines the two as
//! `nu = 1 + eta/2 + I`.

use serde::Serialize;

use crate::error::{NodalError, Result};
use crate::modes::{gcd, reduce, ModePair};

/// Hard cap on recursion steps. Each step is a Euclid-style remainder, so real
/// chains stay far below this.
pub const MAX_STEPS: usize = 4096;

/// Arguments `(n, k, l)` of the loop-count recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecursionState {
    pub n: u64,
    pub k: u64,
    pub l: u64,
}

impl RecursionState {
    /// Top-level state for a non-tiling mode.
    pub fn for_mode(mode: ModePair) -> Result<Self> {
        mode.require_nontiling()?;
        Ok(RecursionState {
            n: mode.n(),
            k: (mode.m() - mode.n() - 1) / 2,
            l: 0,
        })
    }
}

/// Evaluates `Itilde(n, k, l)` and reports the number of steps taken.
pub fn itilde_with_depth(state: RecursionState) -> Result<(u64, usize)> {
    let RecursionState {
        mut n,
        mut k,
        mut l,
    } = state;
    if n == 0 {
        return Err(NodalError::InvalidParameter("Itilde needs n >= 1".into()));
    }
    let mut acc: u128 = 0;
    let mut steps = 0usize;
    loop {
        if n == 1 || k == 0 {
            break;
        }
        if 2 * k + 1 == n || 2 * k + 1 == 2 * n {
            return Err(NodalError::UnreachableBranch { n, k, l });
        }
        debug_assert_eq!(
            gcd(n + 2 * k + 1, n),
            1,
            "non-tiling closure broken at ({n}, {k}, {l})"
        );
        steps += 1;
        if steps > MAX_STEPS {
            return Err(NodalError::RecursionDepth(MAX_STEPS));
        }
        let (n128, k128, l128) = (n as u128, k as u128, l as u128);
        let width = 2 * k + 1;
        if width < n {
            // floor(n/(2k+1)) * (l k + (2l+1) k^2)
            let q = (n / width) as u128;
            acc = add(acc, mul(q, l128 * k128 + mul(2 * l128 + 1, k128 * k128)?)?)?;
            n %= width;
        } else if width > 2 * n {
            // 1/2 floor(k/n) (2l+1)(n^2 - n) with n(n-1) always even
            let q = (k / n) as u128;
            acc = add(acc, mul(mul(q, 2 * l128 + 1)?, n128 * (n128 - 1) / 2)?)?;
            k %= n;
        } else {
            // (l + 1/2) S + k/2 = l S + (S + k)/2 with
            // S = 2k^2 + n^2 - n - 2nk + k; S + k is even.
            let s = 2 * k128 * k128 + n128 * n128 + k128 - n128 - 2 * n128 * k128;
            debug_assert_eq!((s + k128) % 2, 0);
            acc = add(acc, add(mul(l128, s)?, (s + k128) / 2)?)?;
            (n, k, l) = (2 * k - n + 1, n - k - 1, l + 1);
        }
    }
    let value = u64::try_from(acc).map_err(|_| NodalError::Overflow("Itilde"))?;
    Ok((value, steps))
}

fn mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or(NodalError::Overflow("Itilde"))
}

fn add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(NodalError::Overflow("Itilde"))
}

pub fn itilde(state: RecursionState) -> Result<u64> {
    itilde_with_depth(state).map(|(v, _)| v)
}

/// Number of closed nodal loops of a non-tiling mode.
pub fn loop_count(mode: ModePair) -> Result<u64> {
    itilde(RecursionState::for_mode(mode)?)
}

/// Number of points where the nodal set meets the boundary, `m + n - 3`.
pub fn boundary_count(mode: ModePair) -> Result<u64> {
    mode.require_nontiling()?;
    Ok(mode.m() + mode.n() - 3)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Recursion,
    Graph,
    Oracle,
}

/// Nodal counts of one mode. `eta` and `loops` refer to the reduced pair;
/// `nu` covers all tiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NodalSummary {
    pub mode: ModePair,
    pub reduced: ModePair,
    pub nu: u64,
    pub eta: u64,
    pub loops: u64,
    pub tiles: u64,
    pub method: Method,
}

impl NodalSummary {
    /// `tiles * (1 + eta/2 + loops)`.
    pub fn recombined_nu(&self) -> u64 {
        self.tiles * (1 + self.eta / 2 + self.loops)
    }

    /// Loops over the whole triangle; every tile carries its own copies.
    pub fn total_loops(&self) -> u64 {
        self.tiles * self.loops
    }

    pub fn total_eta(&self) -> u64 {
        self.tiles * self.eta
    }
}

pub fn nodal_count(mode: ModePair) -> Result<NodalSummary> {
    let red = reduce(mode);
    let eta = boundary_count(red.reduced)?;
    let loops = loop_count(red.reduced)?;
    let nu_reduced = 1 + eta / 2 + loops;
    let nu = red
        .tiles
        .checked_mul(nu_reduced)
        .ok_or(NodalError::Overflow("nodal count"))?;
    Ok(NodalSummary {
        mode,
        reduced: red.reduced,
        nu,
        eta,
        loops,
        tiles: red.tiles,
        method: Method::Recursion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mode(m: u64, n: u64) -> ModePair {
        ModePair::new(m, n).unwrap()
    }

    fn st(n: u64, k: u64, l: u64) -> RecursionState {
        RecursionState { n, k, l }
    }

    #[test]
    fn base_case() {
        assert_eq!(itilde(st(1, 5, 3)).unwrap(), 0);
        assert_eq!(itilde(st(7, 0, 2)).unwrap(), 0);
    }

    #[test]
    fn middle_branch_gives_loops_of_9_4() {
        assert_eq!(itilde(st(4, 2, 0)).unwrap(), 4);
        assert_eq!(loop_count(mode(9, 4)).unwrap(), 4);
    }

    #[test]
    fn wide_branch() {
        assert_eq!(itilde(st(2, 2, 0)).unwrap(), 1);
        assert_eq!(loop_count(mode(7, 2)).unwrap(), 1);
    }

    #[test]
    fn unreachable_branch_is_an_error() {
        // 2k+1 == n with n > 1 only happens for tiling inputs.
        assert!(matches!(
            itilde(st(5, 2, 0)),
            Err(NodalError::UnreachableBranch { .. })
        ));
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(boundary_count(mode(9, 4)).unwrap(), 10);
        assert_eq!(boundary_count(mode(2, 1)).unwrap(), 0);
        assert_eq!(boundary_count(mode(7, 2)).unwrap(), 6);
        assert!(boundary_count(mode(9, 5)).is_err());
        assert!(loop_count(mode(9, 5)).is_err());
    }

    #[test]
    fn nodal_count_examples() {
        let s = nodal_count(mode(9, 4)).unwrap();
        assert_eq!((s.nu, s.eta, s.loops, s.tiles), (10, 10, 4, 1));
        assert_eq!(nodal_count(mode(2, 1)).unwrap().nu, 1);
        let s = nodal_count(mode(21, 6)).unwrap();
        assert_eq!((s.nu, s.tiles), (45, 9));
        assert_eq!(nodal_count(mode(9, 5)).unwrap().nu, 10);
        assert_eq!(s.method, Method::Recursion);
    }

    #[test]
    fn huge_modes_do_not_overflow() {
        let m = (1u64 << 31) - 1;
        let s = nodal_count(mode(m, 2)).unwrap();
        assert!(s.nu <= m * m);
    }

    proptest! {
        #[test]
        fn recombination_and_depth(m in 2u64..5000, n in 1u64..5000) {
            prop_assume!(m > n);
            let s = nodal_count(mode(m, n)).unwrap();
            prop_assert_eq!(s.recombined_nu(), s.nu);
            let (_, depth) = itilde_with_depth(RecursionState::for_mode(s.reduced).unwrap()).unwrap();
            // Euclid-like chains: logarithmic in the arguments.
            prop_assert!(depth <= 4 * (64 - m.leading_zeros() as usize) + 4);
        }
    }
}
