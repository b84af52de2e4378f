//! Placement delivery arrays.
//!
//! A `(K, F, Z, S)` PDA is an `F x K` array over `{*} ∪ [S]` where every
//! column holds `Z` stars, every symbol appears, and two cells holding the
//! same symbol sit in different rows and columns with stars in the two
//! cross cells. Rows index packets, columns index users.

mod build;
mod format;

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::ratio;
use crate::Rational;

pub use build::MAX_CELLS;

/// One entry of a PDA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Star,
    /// A symbol id, expected in `[1, S]`.
    Symbol(u32),
}

/// An `F x K` array together with its declared `Z` and `S`.
///
/// Values need not satisfy the PDA axioms; call [`Pda::verify`]. Every
/// constructor in this crate produces arrays that do.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pda {
    rows: usize,
    cols: usize,
    z: usize,
    s: usize,
    // row-major, 0 is a star
    cells: Vec<u32>,
}

impl Pda {
    /// Wraps a grid with the declared star count and symbol count.
    pub fn from_grid(grid: &[Vec<Cell>], z: usize, s: usize) -> Result<Self> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("a PDA needs at least one row and one column".into()));
        }
        if let Some(r) = grid.iter().position(|row| row.len() != cols) {
            return Err(Error::Format(format!("row {r} has {} cells, expected {cols}", grid[r].len())));
        }
        let mut cells = Vec::with_capacity(rows * cols);
        for row in grid {
            for cell in row {
                cells.push(match *cell {
                    Cell::Star => 0,
                    Cell::Symbol(0) => return Err(Error::Format("symbol ids start at 1".into())),
                    Cell::Symbol(x) => x,
                });
            }
        }
        Ok(Self { rows, cols, z, s, cells })
    }

    /// Like [`Pda::from_grid`], reading `S` as the largest symbol and `Z` as
    /// the number of stars in column 0.
    pub fn infer(grid: &[Vec<Cell>]) -> Result<Self> {
        let s = grid.iter().flatten().filter_map(|c| match c {
            Cell::Symbol(x) => Some(*x as usize),
            Cell::Star => None,
        });
        let s = s.max().unwrap_or(0);
        let z = grid.iter().filter(|row| row.first() == Some(&Cell::Star)).count();
        Self::from_grid(grid, z, s)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, z: usize, s: usize, cells: Vec<u32>) -> Self {
        debug_assert_eq!(cells.len(), rows * cols);
        Self { rows, cols, z, s, cells }
    }

    /// Number of users `K`.
    pub fn k(&self) -> usize {
        self.cols
    }

    /// Subpacketization `F`.
    pub fn f(&self) -> usize {
        self.rows
    }

    /// Declared stars per column.
    pub fn z(&self) -> usize {
        self.z
    }

    /// Declared number of symbols.
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        match self.cells[row * self.cols + col] {
            0 => Cell::Star,
            x => Cell::Symbol(x),
        }
    }

    pub fn is_star(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col] == 0
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cols).map(move |c| self.cell(row, c))
    }

    pub fn grid(&self) -> Vec<Vec<Cell>> {
        (0..self.rows).map(|r| self.row(r).collect()).collect()
    }

    pub(crate) fn raw(&self) -> &[u32] {
        &self.cells
    }

    /// Cells holding each symbol `1..=S`, indexed by `symbol - 1`, in
    /// row-major order. Symbols outside `[1, S]` are skipped.
    pub fn symbol_cells(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.s];
        for (i, &x) in self.cells.iter().enumerate() {
            if x != 0 && (x as usize) <= self.s {
                out[x as usize - 1].push((i / self.cols, i % self.cols));
            }
        }
        out
    }

    /// Checks C1, C2, C3a and C3b. The report lists at most
    /// [`PdaReport::MAX_LISTED`] violations but counts all of them.
    pub fn verify(&self) -> std::result::Result<(), PdaReport> {
        let mut violations = Vec::new();
        for col in 0..self.cols {
            let stars = (0..self.rows).filter(|&r| self.is_star(r, col)).count();
            if stars != self.z {
                violations.push(PdaViolation::StarCount { col, stars, declared: self.z });
            }
        }
        for (i, &x) in self.cells.iter().enumerate() {
            if x as usize > self.s {
                violations.push(PdaViolation::SymbolOutOfRange {
                    cell: (i / self.cols, i % self.cols),
                    symbol: x,
                    declared: self.s,
                });
            }
        }
        let groups = self.symbol_cells();
        for (i, g) in groups.iter().enumerate() {
            if g.is_empty() {
                violations.push(PdaViolation::MissingSymbol { symbol: i as u32 + 1 });
            }
        }
        let pair_violations: Vec<Vec<PdaViolation>> =
            groups.par_iter().enumerate().map(|(i, g)| self.check_group(i as u32 + 1, g)).collect();
        violations.extend(pair_violations.into_iter().flatten());
        if violations.is_empty() {
            Ok(())
        } else {
            let total = violations.len();
            violations.truncate(PdaReport::MAX_LISTED);
            Err(PdaReport { violations, total })
        }
    }

    fn check_group(&self, symbol: u32, cells: &[(usize, usize)]) -> Vec<PdaViolation> {
        let mut out = Vec::new();
        for (a, &(r1, c1)) in cells.iter().enumerate() {
            for &(r2, c2) in &cells[a + 1..] {
                if r1 == r2 {
                    out.push(PdaViolation::SameRow { symbol, row: r1, cols: (c1, c2) });
                } else if c1 == c2 {
                    out.push(PdaViolation::SameColumn { symbol, col: c1, rows: (r1, r2) });
                } else {
                    for cross in [(r1, c2), (r2, c1)] {
                        if !self.is_star(cross.0, cross.1) {
                            out.push(PdaViolation::CrossNotStar { symbol, cells: ((r1, c1), (r2, c2)), cross });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.verify().is_ok()
    }

    pub fn stats(&self) -> PdaStats {
        let mut counts = vec![0usize; self.s];
        for &x in &self.cells {
            if x != 0 && (x as usize) <= self.s {
                counts[x as usize - 1] += 1;
            }
        }
        let regular_g = match counts.split_first() {
            Some((&g, rest)) if g > 0 && rest.iter().all(|&c| c == g) => Some(g),
            _ => None,
        };
        let (k, f, z, s) = (self.cols, self.rows, self.z, self.s);
        PdaStats {
            k,
            f,
            z,
            s,
            regular_g,
            memory_ratio: ratio(z as u64, f as u64),
            load: ratio(s as u64, f as u64),
            gain: (s > 0).then(|| ratio((k * (f - z.min(f))) as u64, s as u64)),
        }
    }

    pub(crate) fn check_valid(&self) -> Result<()> {
        self.verify().map_err(|report| Error::NotAPda(report.to_string()))
    }
}

impl fmt::Display for Pda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{}) PDA", self.cols, self.rows, self.z, self.s)
    }
}

/// Parameters and exact performance figures of a PDA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdaStats {
    pub k: usize,
    pub f: usize,
    pub z: usize,
    pub s: usize,
    /// Set when every symbol occurs exactly this many times.
    pub regular_g: Option<usize>,
    /// `Z / F`
    pub memory_ratio: Rational,
    /// `S / F`
    pub load: Rational,
    /// `K (F - Z) / S`; absent when `S = 0`.
    pub gain: Option<Rational>,
}

/// A single failed axiom, with 0-based `(row, column)` coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PdaViolation {
    StarCount { col: usize, stars: usize, declared: usize },
    MissingSymbol { symbol: u32 },
    SymbolOutOfRange { cell: (usize, usize), symbol: u32, declared: usize },
    SameRow { symbol: u32, row: usize, cols: (usize, usize) },
    SameColumn { symbol: u32, col: usize, rows: (usize, usize) },
    CrossNotStar { symbol: u32, cells: ((usize, usize), (usize, usize)), cross: (usize, usize) },
}

impl PdaViolation {
    /// The axiom tag: `C1`, `C2`, `C3a` or `C3b`.
    pub fn condition(&self) -> &'static str {
        match self {
            PdaViolation::StarCount { .. } => "C1",
            PdaViolation::MissingSymbol { .. } | PdaViolation::SymbolOutOfRange { .. } => "C2",
            PdaViolation::SameRow { .. } | PdaViolation::SameColumn { .. } => "C3a",
            PdaViolation::CrossNotStar { .. } => "C3b",
        }
    }
}

impl fmt::Display for PdaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.condition())?;
        match self {
            PdaViolation::StarCount { col, stars, declared } => {
                write!(f, "column {col} has {stars} stars, declared Z = {declared}")
            }
            PdaViolation::MissingSymbol { symbol } => write!(f, "symbol {symbol} never occurs"),
            PdaViolation::SymbolOutOfRange { cell, symbol, declared } => {
                write!(f, "cell ({}, {}) holds {symbol}, outside [1, {declared}]", cell.0, cell.1)
            }
            PdaViolation::SameRow { symbol, row, cols } => {
                write!(f, "symbol {symbol} repeats in row {row} at columns {} and {}", cols.0, cols.1)
            }
            PdaViolation::SameColumn { symbol, col, rows } => {
                write!(f, "symbol {symbol} repeats in column {col} at rows {} and {}", rows.0, rows.1)
            }
            PdaViolation::CrossNotStar { symbol, cells, cross } => write!(
                f,
                "symbol {symbol} at ({}, {}) and ({}, {}) but cell ({}, {}) is not a star",
                cells.0 .0, cells.0 .1, cells.1 .0, cells.1 .1, cross.0, cross.1
            ),
        }
    }
}

/// Violations found by [`Pda::verify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdaReport {
    pub violations: Vec<PdaViolation>,
    /// Total number found, including any beyond the listed ones.
    pub total: usize,
}

impl PdaReport {
    pub const MAX_LISTED: usize = 64;

    pub fn has(&self, condition: &str) -> bool {
        self.violations.iter().any(|v| v.condition() == condition)
    }
}

impl fmt::Display for PdaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violation(s)", self.total)?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        if self.total > self.violations.len() {
            write!(f, "\n  ... {} more", self.total - self.violations.len())?;
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The 2-(4,4,2,4) example array.
    pub(crate) fn example_pda() -> Pda {
        Pda::from_text("* 1 * 4\n1 * 2 *\n* 2 * 3\n4 * 3 *\n").unwrap()
    }

    #[test]
    fn example_is_valid_and_regular() {
        let p = example_pda();
        assert_eq!(p.verify(), Ok(()));
        let st = p.stats();
        assert_eq!((st.k, st.f, st.z, st.s), (4, 4, 2, 4));
        assert_eq!(st.regular_g, Some(2));
        assert_eq!(st.memory_ratio, ratio(1, 2));
        assert_eq!(st.load, ratio(1, 1));
        assert_eq!(st.gain, Some(ratio(2, 1)));
        assert_eq!(p.to_string(), "(4,4,2,4) PDA");
    }

    #[test]
    fn mutation_is_caught() {
        let p = Pda::from_grid(&Pda::from_text("1 1 * 4\n1 * 2 *\n* 2 * 3\n4 * 3 *\n").unwrap().grid(), 2, 4).unwrap();
        let report = p.verify().unwrap_err();
        assert!(report.has("C3a"));
        assert!(report.has("C3b"));
        assert!(report.has("C1"));
        assert!(report.violations.contains(&PdaViolation::CrossNotStar {
            symbol: 1,
            cells: ((0, 1), (1, 0)),
            cross: (0, 0)
        }));
        assert!(report.violations.contains(&PdaViolation::SameRow { symbol: 1, row: 0, cols: (0, 1) }));
    }

    #[test]
    fn all_star_grid_is_degenerate_pda() {
        let p = Pda::from_grid(&vec![vec![Cell::Star; 3]; 2], 2, 0).unwrap();
        assert_eq!(p.verify(), Ok(()));
        let st = p.stats();
        assert_eq!(st.memory_ratio, ratio(1, 1));
        assert_eq!(st.gain, None);
        assert_eq!(st.regular_g, None);
    }

    #[test]
    fn missing_and_out_of_range_symbols() {
        let p = Pda::from_grid(&[vec![Cell::Symbol(3), Cell::Star]], 0, 2).unwrap();
        let report = p.verify().unwrap_err();
        assert!(report.violations.contains(&PdaViolation::MissingSymbol { symbol: 1 }));
        assert!(report.violations.contains(&PdaViolation::SymbolOutOfRange { cell: (0, 0), symbol: 3, declared: 2 }));
    }

    #[test]
    fn singleton_symbols_are_accepted() {
        let p = Pda::from_text("1 *\n* 2\n").unwrap();
        assert_eq!(p.verify(), Ok(()));
        assert_eq!(p.stats().regular_g, Some(1));
    }
}
