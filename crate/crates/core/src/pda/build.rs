use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::math::binomial;
use crate::nhsdp::Nhsdp;

use super::Pda;

/// Largest number of cells any constructor here will allocate.
pub const MAX_CELLS: usize = 1 << 26;

fn check_size(rows: usize, cols: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(n) if n <= MAX_CELLS => Ok(()),
        _ => Err(Error::InvalidArgument(format!("a {rows} x {cols} array exceeds {MAX_CELLS} cells"))),
    }
}

fn symbol_id(s: u64) -> Result<u32> {
    u32::try_from(s).map_err(|_| Error::InvalidArgument(format!("symbol id {s} does not fit in 32 bits")))
}

impl Pda {
    /// The `(v, v, v - bg, bv)` PDA of an NHSDP: cell `(f, k)` holds the
    /// symbol of `((f + k) mod v, i)` when `k - f` lies in block `i`.
    /// Symbol ids are `i * v + c + 1` with `i` 0-based.
    pub fn from_nhsdp(d: &Nhsdp) -> Result<Self> {
        let v = d.v() as usize;
        check_size(v, v)?;
        symbol_id((d.b() * v) as u64)?;
        let ring = d.ring();
        let owner = d.block_lookup();
        let mut cells = vec![0u32; v * v];
        for f in 0..v {
            for k in 0..v {
                let h = ring.sub(k as u64, f as u64) as usize;
                if let Some(i) = owner[h] {
                    let c = ring.add(f as u64, k as u64) as usize;
                    cells[f * v + k] = (i * v + c + 1) as u32;
                }
            }
        }
        Ok(Self::from_raw(v, v, v - d.b() * d.g(), d.b() * v, cells))
    }

    /// The `(K, S, S - (F - Z), F)` conjugate: row `s - 1` has symbol `f + 1`
    /// in column `k` exactly when the input has symbol `s` at `(f, k)`.
    pub fn conjugate(&self) -> Result<Self> {
        self.check_valid()?;
        let (f, k, z, s) = (self.f(), self.k(), self.z(), self.s());
        if z == 0 || z >= f {
            return Err(Error::InvalidArgument(format!("conjugation needs 0 < Z < F, got Z = {z}, F = {f}")));
        }
        if let Some(r) = (0..f).find(|&r| self.row(r).all(|c| c == super::Cell::Star)) {
            return Err(Error::InvalidArgument(format!("row {r} has no symbol; drop it before conjugating")));
        }
        check_size(s, k)?;
        symbol_id(f as u64)?;
        let mut cells = vec![0u32; s * k];
        for (i, &x) in self.raw().iter().enumerate() {
            if x != 0 {
                let (row, col) = (i / k, i % k);
                cells[(x as usize - 1) * k + col] = row as u32 + 1;
            }
        }
        Ok(Self::from_raw(s, k, s - (f - z), f, cells))
    }

    /// Concatenates `K / K_1` copies side by side, copy `j` shifting its
    /// symbols by `j * S`.
    pub fn group_divisible(&self, users: usize) -> Result<Self> {
        self.check_valid()?;
        let (f, k1, s) = (self.f(), self.k(), self.s());
        if users == 0 || !users.is_multiple_of(k1) {
            return Err(Error::InvalidArgument(format!(
                "grouping is constructive only when K_1 = {k1} divides K = {users}"
            )));
        }
        let h = users / k1;
        check_size(f, users)?;
        symbol_id((h * s) as u64)?;
        let mut cells = vec![0u32; f * users];
        for row in 0..f {
            for j in 0..h {
                for col in 0..k1 {
                    let x = self.raw()[row * k1 + col];
                    if x != 0 {
                        cells[row * users + j * k1 + col] = x + (j * s) as u32;
                    }
                }
            }
        }
        Ok(Self::from_raw(f, users, self.z(), h * s, cells))
    }

    /// The MN PDA: rows are the `t`-subsets of `[K]` in colex order, cell
    /// `(T, k)` is a star when `k ∈ T` and otherwise the colex rank of
    /// `T ∪ {k}` plus one.
    pub fn mn(users: usize, t: usize) -> Result<Self> {
        if t == 0 || t >= users {
            return Err(Error::InvalidArgument(format!("the MN array needs 1 <= t < K, got t = {t}, K = {users}")));
        }
        if users > 128 {
            return Err(Error::InvalidArgument(format!("K = {users} exceeds 128 users")));
        }
        let too_big = || Error::InvalidArgument(format!("C({users}, {t}) rows are too many"));
        let rows: usize = binomial(users as u64, t as u64).try_into().map_err(|_| too_big())?;
        check_size(rows, users)?;
        let s: usize = binomial(users as u64, t as u64 + 1).try_into().map_err(|_| too_big())?;
        symbol_id(s as u64)?;
        let z: usize = binomial(users as u64 - 1, t as u64 - 1).try_into().map_err(|_| too_big())?;
        // c[n][r] = C(n, r) for the colex ranks
        let c: Vec<Vec<u64>> = (0..=users)
            .map(|n| (0..=t + 1).map(|r| binomial(n as u64, r as u64).try_into().unwrap_or(u64::MAX)).collect())
            .collect();
        let rank = |mask: u128| -> u64 {
            let mut r = 0;
            let mut i = 1;
            let mut m = mask;
            while m != 0 {
                let e = m.trailing_zeros() as usize;
                r += c[e][i];
                i += 1;
                m &= m - 1;
            }
            r
        };
        let mut cells = vec![0u32; rows * users];
        let mut mask: u128 = (1u128 << t) - 1;
        for row in 0..rows {
            for k in 0..users {
                if mask >> k & 1 == 0 {
                    cells[row * users + k] = rank(mask | 1 << k) as u32 + 1;
                }
            }
            // next t-subset in colex order (Gosper's hack)
            if row + 1 < rows {
                let low = mask & mask.wrapping_neg();
                let ripple = mask + low;
                mask = (((ripple ^ mask) >> 2) / low) | ripple;
            }
        }
        Ok(Self::from_raw(rows, users, z, s, cells))
    }

    /// Keeps only the listed columns and renumbers the surviving symbols
    /// onto `1..=S'` in increasing order of their old ids.
    pub fn drop_columns(&self, keep: &BTreeSet<usize>) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("at least one column must be kept".into()));
        }
        if let Some(&c) = keep.iter().find(|&&c| c >= self.k()) {
            return Err(Error::InvalidArgument(format!("column {c} is out of range for K = {}", self.k())));
        }
        let (f, k) = (self.f(), self.k());
        let cols: Vec<usize> = keep.iter().copied().collect();
        let mut present = vec![false; self.s() + 1];
        for row in 0..f {
            for &col in &cols {
                let x = self.raw()[row * k + col] as usize;
                if x != 0 && x <= self.s() {
                    present[x] = true;
                }
            }
        }
        let mut relabel = vec![0u32; self.s() + 1];
        let mut next = 0u32;
        for (x, &p) in present.iter().enumerate() {
            if p {
                next += 1;
                relabel[x] = next;
            }
        }
        let mut cells = Vec::with_capacity(f * cols.len());
        for row in 0..f {
            for &col in &cols {
                let x = self.raw()[row * k + col] as usize;
                cells.push(if x <= self.s() { relabel[x] } else { x as u32 });
            }
        }
        Ok(Self::from_raw(f, cols.len(), self.z(), next as usize, cells))
    }
}
