//! Non-half-sum disjoint packings.
//!
//! A `(v, g, b)` NHSDP is a family of `b` pairwise disjoint `g`-subsets of
//! `Z_v` (`v` odd) such that the half-sum `(x + y) / 2` of two different
//! elements of one block never lands in any block. Each NHSDP yields a
//! `(v, v, v - bg, bv)` placement delivery array (see [`crate::pda`]).
//!
//! [`Nhsdp`] values are always verified: the only ways to obtain one are
//! [`Nhsdp::new`], [`Nhsdp::from_signed`], [`construct_nhsdp`] and
//! [`cdp_to_nhsdp`], all of which check both conditions.

mod cdp;
mod construct;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Residue, Ring};

pub use cdp::{cdp_to_nhsdp, ds_search, ds_search_bounded, verify_cdp, Cdp, CdpVerdict, DS_SEARCH_MAX_Q};
pub use construct::{choose_params_closed_form, construct_nhsdp, solve_problem1_exact, BlockParams};

/// Why a candidate family fails to be an NHSDP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NhsdpViolation {
    EmptyFamily,
    EmptyBlock {
        block: usize,
    },
    RepeatedElement {
        block: usize,
        element: Residue,
    },
    UnequalBlockSizes {
        block: usize,
        size: usize,
        expected: usize,
    },
    /// Condition 1: two blocks share an element.
    Overlap {
        blocks: (usize, usize),
        element: Residue,
    },
    /// Condition 2: a half-sum of two elements of `block` lies in `hit_block`.
    HalfSumInBlock {
        block: usize,
        pair: (Residue, Residue),
        half_sum: Residue,
        hit_block: usize,
    },
}

impl NhsdpViolation {
    /// Which condition of the definition is violated, if any of the two.
    pub fn condition(&self) -> Option<u8> {
        match self {
            NhsdpViolation::Overlap { .. } => Some(1),
            NhsdpViolation::HalfSumInBlock { .. } => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for NhsdpViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NhsdpViolation::EmptyFamily => write!(f, "the family has no blocks"),
            NhsdpViolation::EmptyBlock { block } => write!(f, "block {block} is empty"),
            NhsdpViolation::RepeatedElement { block, element } => {
                write!(f, "block {block} lists {element} more than once")
            }
            NhsdpViolation::UnequalBlockSizes { block, size, expected } => {
                write!(f, "block {block} has {size} elements, expected {expected}")
            }
            NhsdpViolation::Overlap { blocks, element } => {
                write!(f, "condition 1: blocks {} and {} share element {element}", blocks.0, blocks.1)
            }
            NhsdpViolation::HalfSumInBlock { block, pair, half_sum, hit_block } => write!(
                f,
                "condition 2: half-sum of {} and {} in block {block} is {half_sum}, which lies in block {hit_block}",
                pair.0, pair.1
            ),
        }
    }
}

/// Outcome of [`verify_nhsdp`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NhsdpVerdict {
    Valid { g: usize, b: usize },
    Invalid(NhsdpViolation),
}

impl NhsdpVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, NhsdpVerdict::Valid { .. })
    }
}

/// Checks both NHSDP conditions over `Z_v`.
///
/// Fails with an error (rather than a verdict) for even `v` or elements
/// outside `[0, v)`.
pub fn verify_nhsdp(v: Residue, blocks: &[Vec<Residue>]) -> Result<NhsdpVerdict> {
    let ring = Ring::new(v)?;
    for block in blocks {
        if let Some(&x) = block.iter().find(|&&x| !ring.contains(x)) {
            return Err(Error::ResidueOutOfRange { value: x, modulus: v });
        }
    }
    Ok(match check_family(&ring, blocks) {
        Ok(()) => NhsdpVerdict::Valid { g: blocks[0].len(), b: blocks.len() },
        Err(violation) => NhsdpVerdict::Invalid(violation),
    })
}

fn check_family(ring: &Ring, blocks: &[Vec<Residue>]) -> std::result::Result<(), NhsdpViolation> {
    let Some(first) = blocks.first() else {
        return Err(NhsdpViolation::EmptyFamily);
    };
    let g = first.len();
    // owner[x] = index of the block containing x
    let mut owner: Vec<Option<usize>> = vec![None; ring.modulus() as usize];
    for (i, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(NhsdpViolation::EmptyBlock { block: i });
        }
        if block.len() != g {
            return Err(NhsdpViolation::UnequalBlockSizes { block: i, size: block.len(), expected: g });
        }
        for &x in block {
            match owner[x as usize] {
                Some(j) if j == i => return Err(NhsdpViolation::RepeatedElement { block: i, element: x }),
                Some(j) => return Err(NhsdpViolation::Overlap { blocks: (j, i), element: x }),
                None => owner[x as usize] = Some(i),
            }
        }
    }
    for (i, block) in blocks.iter().enumerate() {
        for (a, &x) in block.iter().enumerate() {
            for &y in &block[a + 1..] {
                let h = ring.half_sum(x, y);
                if let Some(hit_block) = owner[h as usize] {
                    return Err(NhsdpViolation::HalfSumInBlock { block: i, pair: (x, y), half_sum: h, hit_block });
                }
            }
        }
    }
    Ok(())
}

/// A verified `(v, g, b)` non-half-sum disjoint packing.
///
/// Blocks are stored sorted ascending, and the family is ordered by each
/// block's smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Nhsdp {
    v: Residue,
    g: usize,
    blocks: Vec<Vec<Residue>>,
}

impl Nhsdp {
    pub fn new(v: Residue, blocks: Vec<Vec<Residue>>) -> Result<Self> {
        match verify_nhsdp(v, &blocks)? {
            NhsdpVerdict::Valid { g, .. } => {
                let mut blocks = blocks;
                for block in &mut blocks {
                    block.sort_unstable();
                }
                blocks.sort_unstable_by_key(|b| b[0]);
                Ok(Self { v, g, blocks })
            }
            NhsdpVerdict::Invalid(violation) => Err(Error::NotAnNhsdp(violation.to_string())),
        }
    }

    /// Accepts signed notation such as `{-1, 1, -2, 2}` and reduces mod `v`.
    pub fn from_signed(v: Residue, blocks: &[Vec<i64>]) -> Result<Self> {
        let ring = Ring::new(v)?;
        let reduced = blocks.iter().map(|b| b.iter().map(|&x| ring.reduce_signed(x)).collect()).collect();
        Self::new(v, reduced)
    }

    pub fn v(&self) -> Residue {
        self.v
    }

    /// Block size.
    pub fn g(&self) -> usize {
        self.g
    }

    /// Number of blocks.
    pub fn b(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<Residue>] {
        &self.blocks
    }

    pub fn ring(&self) -> Ring {
        Ring::new(self.v).expect("verified modulus")
    }

    /// Maps each residue to the index of the block containing it.
    pub fn block_lookup(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.v as usize];
        for (i, block) in self.blocks.iter().enumerate() {
            for &x in block {
                owner[x as usize] = Some(i);
            }
        }
        owner
    }

    /// All half-sums of two different elements of a common block.
    pub fn half_sum_set(&self) -> BTreeSet<Residue> {
        let ring = self.ring();
        let mut out = BTreeSet::new();
        for block in &self.blocks {
            for (a, &x) in block.iter().enumerate() {
                for &y in &block[a + 1..] {
                    out.insert(ring.half_sum(x, y));
                }
            }
        }
        out
    }

    /// Residues in no block; these are the star offsets `k - f` of the
    /// derived PDA.
    pub fn uncovered(&self) -> BTreeSet<Residue> {
        let owner = self.block_lookup();
        (0..self.v).filter(|&x| owner[x as usize].is_none()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&NhsdpJson { v: self.v, g: self.g, blocks: self.blocks.clone() })
            .expect("plain integers serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: NhsdpJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let nhsdp = Self::new(raw.v, raw.blocks)?;
        if nhsdp.g != raw.g {
            return Err(Error::Format(format!("declared g = {} but blocks have {} elements", raw.g, nhsdp.g)));
        }
        Ok(nhsdp)
    }
}

impl fmt::Display for Nhsdp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{}) NHSDP", self.v, self.g, self.b())
    }
}

/// Reads `v` and the blocks from NHSDP JSON without checking either
/// condition, so that a broken family can still be passed to
/// [`verify_nhsdp`]. The `g` field is optional here.
pub fn family_from_json(text: &str) -> Result<(Residue, Vec<Vec<Residue>>)> {
    #[derive(Deserialize)]
    struct Raw {
        v: Residue,
        blocks: Vec<Vec<Residue>>,
    }
    let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    Ok((raw.v, raw.blocks))
}

#[derive(Serialize, Deserialize)]
struct NhsdpJson {
    v: Residue,
    g: usize,
    blocks: Vec<Vec<Residue>>,
}

/// Modulus used to serve `users` users: `users` itself when odd, otherwise
/// one extra virtual user. The flag is set when a virtual user was added.
pub fn modulus_for_users(users: Residue) -> (Residue, bool) {
    if users % 2 == 1 {
        (users, false)
    } else {
        (users + 1, true)
    }
}
