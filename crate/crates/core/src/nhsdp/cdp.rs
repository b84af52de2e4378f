use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::Residue;

use super::Nhsdp;

/// Default bound on `q` for [`ds_search`].
pub const DS_SEARCH_MAX_Q: u64 = 16;

/// A verified cyclic difference packing over `Z_v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cdp {
    v: Residue,
    elements: Vec<Residue>,
    is_difference_set: bool,
}

impl Cdp {
    pub fn new(v: Residue, elements: Vec<Residue>) -> Result<Self> {
        match verify_cdp(v, &elements)? {
            CdpVerdict::Violation { difference, first, second } => Err(Error::InvalidArgument(format!(
                "not a CDP: difference {difference} arises as {}-{} and {}-{}",
                first.0, first.1, second.0, second.1
            ))),
            verdict => {
                let mut elements = elements;
                elements.sort_unstable();
                Ok(Self { v, elements, is_difference_set: verdict == CdpVerdict::DifferenceSet })
            }
        }
    }

    pub fn v(&self) -> Residue {
        self.v
    }

    pub fn elements(&self) -> &[Residue] {
        &self.elements
    }

    pub fn is_difference_set(&self) -> bool {
        self.is_difference_set
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CdpVerdict {
    Packing,
    DifferenceSet,
    /// `difference` arises as both `first.0 - first.1` and `second.0 - second.1`.
    Violation {
        difference: Residue,
        first: (Residue, Residue),
        second: (Residue, Residue),
    },
}

/// Classifies `elements` as a difference set, a difference packing, or
/// neither. Repeated elements count as a violation of difference 0.
pub fn verify_cdp(v: Residue, elements: &[Residue]) -> Result<CdpVerdict> {
    if v == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if let Some(&x) = elements.iter().find(|&&x| x >= v) {
        return Err(Error::ResidueOutOfRange { value: x, modulus: v });
    }
    let mut seen = BTreeSet::new();
    for &x in elements {
        if !seen.insert(x) {
            return Ok(CdpVerdict::Violation { difference: 0, first: (x, x), second: (x, x) });
        }
    }
    let mut rep: Vec<Option<(Residue, Residue)>> = vec![None; v as usize];
    let mut violation: Option<CdpVerdict> = None;
    for &a in elements {
        for &b in elements {
            if a == b {
                continue;
            }
            let d = (a + v - b) % v;
            match rep[d as usize] {
                None => rep[d as usize] = Some((a, b)),
                Some(first) => {
                    let smaller = match &violation {
                        Some(CdpVerdict::Violation { difference, .. }) => d < *difference,
                        _ => true,
                    };
                    if smaller {
                        violation = Some(CdpVerdict::Violation { difference: d, first, second: (a, b) });
                    }
                }
            }
        }
    }
    if let Some(v) = violation {
        return Ok(v);
    }
    let hit = rep.iter().skip(1).filter(|r| r.is_some()).count() as u64;
    Ok(if hit == v - 1 { CdpVerdict::DifferenceSet } else { CdpVerdict::Packing })
}

/// A CDP over an odd modulus is a single-block NHSDP.
pub fn cdp_to_nhsdp(cdp: &Cdp) -> Result<Nhsdp> {
    Nhsdp::new(cdp.v, vec![cdp.elements.clone()])
}

/// Searches for a `(q^2+q+1, q+1)` difference set with `q <= 16`.
pub fn ds_search(q: u64) -> Result<Option<Cdp>> {
    ds_search_bounded(q, DS_SEARCH_MAX_Q)
}

/// Backtracking search for a `(q^2+q+1, q+1)` difference set containing 0
/// and 1. Returns the lexicographically least such set, or `None` once the
/// search space is exhausted.
pub fn ds_search_bounded(q: u64, max_q: u64) -> Result<Option<Cdp>> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("ds search needs q >= 2, got {q}")));
    }
    if q > max_q {
        return Err(Error::InvalidArgument(format!("q = {q} exceeds the search bound {max_q}")));
    }
    let v = q * q + q + 1;
    let k = (q + 1) as usize;
    let mut search = DsSearch { v, k, used: vec![false; v as usize], set: vec![0, 1] };
    search.used[1] = true;
    search.used[(v - 1) as usize] = true;
    if search.extend(2) {
        Cdp::new(v, search.set).map(Some)
    } else {
        Ok(None)
    }
}

struct DsSearch {
    v: u64,
    k: usize,
    /// used[d] is set when d already arises as a difference
    used: Vec<bool>,
    set: Vec<u64>,
}

impl DsSearch {
    fn extend(&mut self, lo: u64) -> bool {
        if self.set.len() == self.k {
            return true;
        }
        let need = (self.k - self.set.len()) as u64;
        let mut c = lo;
        while c + need <= self.v {
            if let Some(diffs) = self.new_differences(c) {
                for &d in &diffs {
                    self.used[d as usize] = true;
                }
                self.set.push(c);
                if self.extend(c + 1) {
                    return true;
                }
                self.set.pop();
                for &d in &diffs {
                    self.used[d as usize] = false;
                }
            }
            c += 1;
        }
        false
    }

    /// Differences `+-(c - x)` that adding `c` would create, or `None` if any
    /// of them is already taken.
    fn new_differences(&self, c: u64) -> Option<Vec<u64>> {
        let mut out = Vec::with_capacity(2 * self.set.len());
        for &x in &self.set {
            let d = c - x;
            let e = self.v - d;
            if self.used[d as usize] || self.used[e as usize] || d == e || out.contains(&d) {
                return None;
            }
            out.push(d);
            out.push(e);
        }
        Some(out)
    }
}
