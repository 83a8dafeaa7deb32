//! Truncated multipole basis.
//!
//! Modes are ordered polarization-major: all TE modes, then all TM modes;
//! within a polarization by `l = 1..=lmax`, then `m = -l..=l`.

use serde::{Deserialize, Serialize};

use crate::error::{CasimirError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    /// Transverse electric: the electric field is an `M`-type wave.
    TE,
    /// Transverse magnetic: the electric field is an `N`-type wave.
    TM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultipoleIndex {
    pub polarization: Polarization,
    pub l: usize,
    pub m: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    lmax: usize,
}

impl BasisSpec {
    pub fn new(lmax: usize) -> Result<Self> {
        if lmax == 0 {
            return Err(CasimirError::Domain("L_max must be at least 1".into()));
        }
        if lmax > crate::specfun::MAX_ORDER / 4 {
            return Err(CasimirError::OrderOverflow { order: lmax, max: crate::specfun::MAX_ORDER / 4 });
        }
        Ok(Self { lmax })
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Number of `(l, m)` pairs per polarization.
    pub fn modes_per_polarization(&self) -> usize {
        self.lmax * (self.lmax + 2)
    }

    pub fn dimension(&self) -> usize {
        2 * self.modes_per_polarization()
    }

    /// Offset of `(l, m)` within one polarization block.
    #[inline]
    pub fn lm_offset(l: usize, m: i64) -> usize {
        (l * l - 1) + (m + l as i64) as usize
    }

    pub fn index_of(&self, idx: MultipoleIndex) -> usize {
        let block = match idx.polarization {
            Polarization::TE => 0,
            Polarization::TM => self.modes_per_polarization(),
        };
        block + Self::lm_offset(idx.l, idx.m)
    }

    pub fn index(&self, position: usize) -> MultipoleIndex {
        let n = self.modes_per_polarization();
        let (polarization, rem) = if position < n { (Polarization::TE, position) } else { (Polarization::TM, position - n) };
        let l = ((rem + 1) as f64).sqrt().floor() as usize;
        let l = if (l + 1) * (l + 1) - 1 <= rem { l + 1 } else { l };
        let m = rem as i64 - (l * l - 1) as i64 - l as i64;
        MultipoleIndex { polarization, l, m }
    }

    pub fn iter(&self) -> impl Iterator<Item = MultipoleIndex> + '_ {
        (0..self.dimension()).map(move |p| self.index(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_and_order() {
        for lmax in 1..12 {
            let b = BasisSpec::new(lmax).unwrap();
            assert_eq!(b.dimension(), 2 * lmax * (lmax + 2));
            for (p, idx) in b.iter().enumerate() {
                assert_eq!(b.index_of(idx), p);
                assert!(idx.l >= 1 && idx.l <= lmax && idx.m.unsigned_abs() as usize <= idx.l);
            }
        }
        let b = BasisSpec::new(2).unwrap();
        let first: Vec<_> = b.iter().take(4).map(|i| (i.l, i.m)).collect();
        assert_eq!(first, vec![(1, -1), (1, 0), (1, 1), (2, -2)]);
        assert_eq!(b.index(8).polarization, Polarization::TM);
    }

    #[test]
    fn rejects_zero() {
        assert!(BasisSpec::new(0).is_err());
    }
}
