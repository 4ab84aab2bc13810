//! Bit-packed cubic occupancy grids and multi-scale box counting.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Cubic occupancy grid stored one bit per voxel, rows running along x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryGrid {
    resolution: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BinaryGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::param("grid resolution must be at least 1"));
        }
        let words_per_row = resolution.div_ceil(64);
        let total = words_per_row
            .checked_mul(resolution * resolution)
            .ok_or_else(|| Error::param(format!("grid resolution {resolution} too large")))?;
        Ok(BinaryGrid {
            resolution,
            words_per_row,
            words: vec![0; total],
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    #[inline]
    fn row(&self, y: usize, z: usize) -> usize {
        (z * self.resolution + y) * self.words_per_row
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize) {
        let r = self.row(y, z);
        self.words[r + x / 64] |= 1 << (x % 64);
    }

    #[inline]
    pub fn clear(&mut self, x: usize, y: usize, z: usize) {
        let r = self.row(y, z);
        self.words[r + x / 64] &= !(1 << (x % 64));
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        let r = self.row(y, z);
        self.words[r + x / 64] >> (x % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Coordinates of every occupied voxel, ordered by (z, y, x).
    pub fn occupied(&self) -> Vec<[usize; 3]> {
        let n = self.resolution;
        let mut out = Vec::new();
        for z in 0..n {
            for y in 0..n {
                let r = self.row(y, z);
                for (w, &word) in self.words[r..r + self.words_per_row].iter().enumerate() {
                    let mut bits = word;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        out.push([w * 64 + b, y, z]);
                        bits &= bits - 1;
                    }
                }
            }
        }
        out
    }

    /// OR of each aligned 2x2x2 block into a grid of half the resolution.
    pub fn halve(&self) -> Result<BinaryGrid> {
        if self.resolution % 2 != 0 {
            return Err(Error::param(format!(
                "cannot halve a grid of odd resolution {}",
                self.resolution
            )));
        }
        let n2 = self.resolution / 2;
        let mut out = BinaryGrid::new(n2)?;
        let wpr = self.words_per_row;
        let wpr2 = out.words_per_row;
        out.words
            .par_chunks_mut(n2 * wpr2)
            .enumerate()
            .for_each(|(z2, slab)| {
                let mut merged = vec![0u64; wpr];
                for y2 in 0..n2 {
                    merged.iter_mut().for_each(|m| *m = 0);
                    for (dy, dz) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        let r = self.row(2 * y2 + dy, 2 * z2 + dz);
                        for (m, &w) in merged.iter_mut().zip(&self.words[r..r + wpr]) {
                            *m |= w;
                        }
                    }
                    let dst = &mut slab[y2 * wpr2..(y2 + 1) * wpr2];
                    for (w2, d) in dst.iter_mut().enumerate() {
                        let lo = merged.get(2 * w2).copied().unwrap_or(0);
                        let hi = merged.get(2 * w2 + 1).copied().unwrap_or(0);
                        *d = compress_pairs(lo) | compress_pairs(hi) << 32;
                    }
                }
            });
        Ok(out)
    }

    /// Number of aligned `s`-edge blocks containing an occupied voxel.
    pub fn count_blocks(&self, s: usize) -> Result<u64> {
        let n = self.resolution;
        if s == 0 || n % s != 0 {
            return Err(Error::param(format!("box scale {s} does not divide grid resolution {n}")));
        }
        if s == 1 {
            return Ok(self.count_ones());
        }
        let m = n / s;
        let total = (0..m)
            .into_par_iter()
            .map(|bz| {
                let mut seen = vec![false; m * m];
                for z in bz * s..(bz + 1) * s {
                    for y in 0..n {
                        let r = self.row(y, z);
                        let by = y / s;
                        for (w, &word) in self.words[r..r + self.words_per_row].iter().enumerate() {
                            let mut bits = word;
                            while bits != 0 {
                                let x = w * 64 + bits.trailing_zeros() as usize;
                                seen[by * m + x / s] = true;
                                bits &= bits - 1;
                            }
                        }
                    }
                }
                seen.iter().filter(|&&b| b).count() as u64
            })
            .sum();
        Ok(total)
    }

    /// Block counts for each scale, in the order given.
    ///
    /// Power-of-two scales are read off a halving pyramid; other divisors of
    /// the resolution use a direct block scan.
    pub fn count_boxes(&self, scales: &[usize]) -> Result<Vec<u64>> {
        let n = self.resolution;
        for &s in scales {
            if s == 0 || n % s != 0 {
                return Err(Error::param(format!("box scale {s} does not divide grid resolution {n}")));
            }
        }
        let max_pow = scales
            .iter()
            .filter(|s| s.is_power_of_two())
            .max()
            .copied()
            .unwrap_or(1);
        let mut pyramid: Vec<(usize, u64)> = vec![(1, self.count_ones())];
        let mut level: Option<BinaryGrid> = None;
        let mut s = 1;
        while s < max_pow {
            let next = level.as_ref().unwrap_or(self).halve()?;
            s *= 2;
            pyramid.push((s, next.count_ones()));
            level = Some(next);
        }
        scales
            .iter()
            .map(|&s| match pyramid.iter().find(|(p, _)| *p == s) {
                Some(&(_, c)) => Ok(c),
                None => self.count_blocks(s),
            })
            .collect()
    }
}

/// OR adjacent bit pairs of `w` and pack the 32 results into the low half.
#[inline]
fn compress_pairs(w: u64) -> u64 {
    let mut x = (w | w >> 1) & 0x5555_5555_5555_5555;
    x = (x | x >> 1) & 0x3333_3333_3333_3333;
    x = (x | x >> 2) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | x >> 4) & 0x00ff_00ff_00ff_00ff;
    x = (x | x >> 8) & 0x0000_ffff_0000_ffff;
    x = (x | x >> 16) & 0x0000_0000_ffff_ffff;
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(grid: &BinaryGrid, s: usize) -> u64 {
        let m = grid.resolution() / s;
        let mut c = 0;
        for bz in 0..m {
            for by in 0..m {
                for bx in 0..m {
                    let mut any = false;
                    'b: for z in bz * s..(bz + 1) * s {
                        for y in by * s..(by + 1) * s {
                            for x in bx * s..(bx + 1) * s {
                                if grid.get(x, y, z) {
                                    any = true;
                                    break 'b;
                                }
                            }
                        }
                    }
                    c += any as u64;
                }
            }
        }
        c
    }

    #[test]
    fn compress_examples() {
        assert_eq!(compress_pairs(0b11), 0b1);
        assert_eq!(compress_pairs(0b1000), 0b10);
        assert_eq!(compress_pairs(u64::MAX), 0xffff_ffff);
        assert_eq!(compress_pairs(1 << 63), 1 << 31);
    }

    #[test]
    fn single_voxel_counts() {
        let mut g = BinaryGrid::new(8).unwrap();
        g.set(5, 2, 7);
        assert_eq!(g.count_boxes(&[1, 2, 4, 8]).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn full_grid_counts() {
        let mut g = BinaryGrid::new(8).unwrap();
        for z in 0..8 {
            for y in 0..8 {
                for x in 0..8 {
                    g.set(x, y, z);
                }
            }
        }
        assert_eq!(g.count_boxes(&[1, 2, 4, 8]).unwrap(), vec![512, 64, 8, 1]);
    }

    #[test]
    fn non_dividing_scale_rejected() {
        let g = BinaryGrid::new(8).unwrap();
        assert!(g.count_boxes(&[3]).is_err());
        assert!(g.count_boxes(&[0]).is_err());
    }

    #[test]
    fn wide_rows_halve_correctly() {
        let mut g = BinaryGrid::new(192).unwrap();
        for &(x, y, z) in &[(0, 0, 0), (63, 1, 1), (64, 5, 9), (127, 100, 3), (128, 191, 191), (191, 0, 190)] {
            g.set(x, y, z);
        }
        let h = g.halve().unwrap();
        let mut expect: Vec<[usize; 3]> = g.occupied().iter().map(|p| p.map(|c| c / 2)).collect();
        expect.sort_by_key(|p| (p[2], p[1], p[0]));
        expect.dedup();
        assert_eq!(h.occupied(), expect);
    }

    proptest! {
        #[test]
        fn counts_match_naive(
            n_pow in 1u32..6,
            odd in 1usize..4,
            density in 0.0f64..0.2,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let n = (1usize << n_pow) * [1, 3, 5][odd - 1];
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut g = BinaryGrid::new(n).unwrap();
            for z in 0..n { for y in 0..n { for x in 0..n {
                if rng.gen::<f64>() < density { g.set(x, y, z); }
            }}}
            let scales: Vec<usize> = (1..=n).filter(|s| n % s == 0).collect();
            let got = g.count_boxes(&scales).unwrap();
            for (s, c) in scales.iter().zip(got) {
                prop_assert_eq!(c, naive(&g, *s));
            }
        }
    }
}
