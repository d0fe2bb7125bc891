//! Spin-1 computational basis and fixed-magnetization sectors.
//!
//! A local level `β ∈ {0, 1, 2}` carries spin projection `m = 1 − β`, so
//! `|0⟩ ↔ m = +1`, `|1⟩ ↔ m = 0`, `|2⟩ ↔ m = −1`. Configurations are packed
//! as base-3 integers with site 0 as the most significant digit, which makes
//! the packed value read like the ket label (`|0202⟩ → 0·27 + 2·9 + 0·3 + 2`).

use crate::error::{Error, Result};

/// Largest chain length whose full space `3^N` fits comfortably in memory
/// for the dense verification paths.
pub const MAX_SITES: usize = 16;

/// A spin-1 basis configuration packed in base 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfig {
    packed: u32,
    n: u8,
}

impl SpinConfig {
    pub fn from_levels(levels: &[u8]) -> Result<Self> {
        let n = levels.len();
        if n == 0 || n > MAX_SITES {
            return Err(Error::InvalidSize(n));
        }
        let mut packed = 0u32;
        for &b in levels {
            if b > 2 {
                return Err(Error::InvalidArgument(format!("local level {b} outside {{0,1,2}}")));
            }
            packed = packed * 3 + b as u32;
        }
        Ok(Self { packed, n: n as u8 })
    }

    /// Parses a ket label such as `"0202"`.
    pub fn parse(label: &str) -> Result<Self> {
        let levels = label
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(Error::InvalidArgument(format!("bad level '{ch}' in '{label}'"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_levels(&levels)
    }

    pub fn from_packed(packed: u32, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return Err(Error::InvalidSize(n));
        }
        if packed >= pow3(n) {
            return Err(Error::InvalidArgument(format!("packed value {packed} >= 3^{n}")));
        }
        Ok(Self { packed, n: n as u8 })
    }

    pub fn packed(self) -> u32 {
        self.packed
    }

    pub fn len(self) -> usize {
        self.n as usize
    }

    pub fn is_empty(self) -> bool {
        self.n == 0
    }

    /// Local level of `site` (0-based).
    pub fn level(self, site: usize) -> u8 {
        debug_assert!(site < self.len());
        ((self.packed / pow3(self.len() - 1 - site)) % 3) as u8
    }

    pub fn levels(self) -> Vec<u8> {
        unpack(self.packed, self.len())
    }

    /// Total magnetization `Σ_l (1 − β_l)`.
    pub fn magnetization(self) -> i32 {
        magnetization_packed(self.packed, self.len())
    }
}

impl std::fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|")?;
        for b in self.levels() {
            write!(f, "{b}")?;
        }
        write!(f, "⟩")
    }
}

pub fn magnetization(c: SpinConfig) -> i32 {
    c.magnetization()
}

#[inline]
pub(crate) const fn pow3(k: usize) -> u32 {
    let mut p = 1u32;
    let mut i = 0;
    while i < k {
        p *= 3;
        i += 1;
    }
    p
}

pub(crate) fn unpack(mut packed: u32, n: usize) -> Vec<u8> {
    let mut out = vec![0u8; n];
    for slot in out.iter_mut().rev() {
        *slot = (packed % 3) as u8;
        packed /= 3;
    }
    out
}

pub(crate) fn pack(levels: &[u8]) -> u32 {
    levels.iter().fold(0u32, |acc, &b| acc * 3 + b as u32)
}

fn magnetization_packed(mut packed: u32, n: usize) -> i32 {
    let mut m = 0i32;
    for _ in 0..n {
        m += 1 - (packed % 3) as i32;
        packed /= 3;
    }
    m
}

/// All configurations of `n` sites with total magnetization `mz`, sorted by
/// packed value, together with the inverse index.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    n: usize,
    mz: i32,
    configs: Vec<u32>,
}

impl SectorBasis {
    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn magnetization(&self) -> i32 {
        self.mz
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn config(&self, i: usize) -> SpinConfig {
        SpinConfig {
            packed: self.configs[i],
            n: self.n as u8,
        }
    }

    /// Packed values in basis order.
    pub fn packed_configs(&self) -> &[u32] {
        &self.configs
    }

    pub fn iter(&self) -> impl Iterator<Item = SpinConfig> + '_ {
        (0..self.dim()).map(|i| self.config(i))
    }

    /// Ordinal of a packed configuration, or `None` when it lies outside the sector.
    #[inline]
    pub fn index_of_packed(&self, packed: u32) -> Option<usize> {
        self.configs.binary_search(&packed).ok()
    }

    pub fn index_of(&self, c: SpinConfig) -> Option<usize> {
        if c.len() != self.n {
            return None;
        }
        self.index_of_packed(c.packed)
    }

    /// Index of the spin-flipped configuration `β → 2 − β`, which maps the
    /// sector `Mz` onto `−Mz`; only meaningful for `Mz = 0`.
    pub(crate) fn spin_flip_map(&self) -> Option<Vec<usize>> {
        if self.mz != 0 {
            return None;
        }
        let all_twos = pow3(self.n) - 1;
        self.configs
            .iter()
            .map(|&p| self.index_of_packed(all_twos - p))
            .collect()
    }
}

/// Enumerates the fixed-magnetization sector.
pub fn enumerate_sector(n: usize, mz: i32) -> Result<SectorBasis> {
    if n == 0 {
        return Err(Error::InvalidSize(n));
    }
    if n > MAX_SITES {
        return Err(Error::SizeLimit {
            what: "chain length",
            size: n,
            limit: MAX_SITES,
        });
    }
    if mz.unsigned_abs() as usize > n {
        return Err(Error::EmptySector { n, mz });
    }
    let mut configs = Vec::new();
    let mut levels = vec![0u8; n];
    fill(&mut levels, 0, mz, &mut configs);
    // depth-first in lexicographic order already yields sorted packed values
    debug_assert!(configs.windows(2).all(|w| w[0] < w[1]));
    Ok(SectorBasis { n, mz, configs })
}

fn fill(levels: &mut [u8], site: usize, remaining: i32, out: &mut Vec<u32>) {
    let left = (levels.len() - site) as i32;
    if remaining.abs() > left {
        return;
    }
    if site == levels.len() {
        out.push(pack(levels));
        return;
    }
    for b in 0..3u8 {
        levels[site] = b;
        fill(levels, site + 1, remaining - (1 - b as i32), out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_count(n: usize, mz: i32) -> usize {
        (0..pow3(n))
            .filter(|&p| magnetization_packed(p, n) == mz)
            .count()
    }

    #[test]
    fn two_site_zero_sector() {
        let basis = enumerate_sector(2, 0).unwrap();
        let labels: Vec<String> = basis.iter().map(|c| c.to_string()).collect();
        assert_eq!(labels, ["|02⟩", "|11⟩", "|20⟩"]);
    }

    #[test]
    fn sector_sizes_match_enumeration() {
        assert_eq!(enumerate_sector(4, 0).unwrap().dim(), 19);
        assert_eq!(brute_count(4, 0), 19);
        assert_eq!(brute_count(10, 0), 8953);
        assert_eq!(enumerate_sector(10, 0).unwrap().dim(), 8953);
    }

    #[test]
    fn sectors_partition_full_space() {
        for n in 1..=7 {
            let total: usize = (-(n as i32)..=n as i32)
                .map(|mz| enumerate_sector(n, mz).unwrap().dim())
                .sum();
            assert_eq!(total, pow3(n) as usize);
            for mz in 0..=n as i32 {
                assert_eq!(
                    enumerate_sector(n, mz).unwrap().dim(),
                    enumerate_sector(n, -mz).unwrap().dim()
                );
                assert_eq!(enumerate_sector(n, mz).unwrap().dim(), brute_count(n, mz));
            }
        }
    }

    #[test]
    fn index_inverts_configs() {
        let basis = enumerate_sector(6, 0).unwrap();
        for i in 0..basis.dim() {
            assert_eq!(basis.index_of(basis.config(i)), Some(i));
            assert_eq!(basis.config(i).magnetization(), 0);
        }
        assert_eq!(basis.index_of(SpinConfig::parse("000000").unwrap()), None);
    }

    #[test]
    fn magnetization_examples() {
        assert_eq!(magnetization(SpinConfig::parse("0202").unwrap()), 0);
        assert_eq!(magnetization(SpinConfig::parse("00000").unwrap()), 5);
        assert_eq!(magnetization(SpinConfig::parse("2").unwrap()), -1);
    }

    #[test]
    fn empty_sector_rejected() {
        assert!(matches!(enumerate_sector(3, 4), Err(Error::EmptySector { .. })));
        assert!(matches!(enumerate_sector(3, -4), Err(Error::EmptySector { .. })));
        assert!(enumerate_sector(3, 3).is_ok());
    }

    #[test]
    fn packing_reads_like_the_ket() {
        let c = SpinConfig::parse("0212").unwrap();
        assert_eq!(c.packed(), 2 * 9 + 3 + 2);
        assert_eq!(c.levels(), vec![0, 2, 1, 2]);
        assert_eq!(c.level(1), 2);
        assert!(SpinConfig::from_levels(&[0, 3]).is_err());
    }

    #[test]
    fn spin_flip_is_an_involution() {
        let basis = enumerate_sector(6, 0).unwrap();
        let flip = basis.spin_flip_map().unwrap();
        for (i, &j) in flip.iter().enumerate() {
            assert_eq!(flip[j], i);
        }
        assert!(enumerate_sector(4, 1).unwrap().spin_flip_map().is_none());
    }
}
