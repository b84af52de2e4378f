//! Sets without three-term arithmetic progressions and the perfect hash
//! families built from them.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{binomial, ratio};
use crate::{Rational, Residue, Ring};

/// `2z = x + y` with `x, y, z` distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progression {
    pub x: Residue,
    pub y: Residue,
    pub z: Residue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NtapVerdict {
    Valid,
    Violation(Progression),
}

impl NtapVerdict {
    pub fn is_valid(&self) -> bool {
        *self == NtapVerdict::Valid
    }
}

/// Looks for distinct `x, y, z` in `elements` with `2z ≡ x + y (mod v)`.
/// The reported progression has the smallest `(x, y)` with `x < y`.
pub fn verify_ntap(v: Residue, elements: &[Residue]) -> Result<NtapVerdict> {
    if v == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if let Some(&x) = elements.iter().find(|&&x| x >= v) {
        return Err(Error::ResidueOutOfRange { value: x, modulus: v });
    }
    let set: BTreeSet<Residue> = elements.iter().copied().collect();
    let sorted: Vec<Residue> = set.iter().copied().collect();
    for (a, &x) in sorted.iter().enumerate() {
        for &y in &sorted[a + 1..] {
            let s = (x + y) % v;
            // solutions of 2z = s in Z_v
            let roots: Vec<Residue> = if v % 2 == 1 {
                vec![if s.is_multiple_of(2) { s / 2 } else { (s + v) / 2 }]
            } else if s.is_multiple_of(2) {
                vec![s / 2, s / 2 + v / 2]
            } else {
                Vec::new()
            };
            if let Some(z) = roots.into_iter().find(|z| *z != x && *z != y && set.contains(z)) {
                return Ok(NtapVerdict::Violation(Progression { x, y, z }));
            }
        }
    }
    Ok(NtapVerdict::Valid)
}

/// A verified set with no three-term arithmetic progression in `Z_v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NtapSet {
    v: Residue,
    elements: Vec<Residue>,
}

impl NtapSet {
    pub fn new(v: Residue, elements: &[Residue]) -> Result<Self> {
        match verify_ntap(v, elements)? {
            NtapVerdict::Valid => {
                let elements: BTreeSet<Residue> = elements.iter().copied().collect();
                Ok(Self { v, elements: elements.into_iter().collect() })
            }
            NtapVerdict::Violation(p) => {
                Err(Error::InvalidArgument(format!("2*{} = {} + {} (mod {v})", p.z, p.x, p.y)))
            }
        }
    }

    pub fn v(&self) -> Residue {
        self.v
    }

    pub fn elements(&self) -> &[Residue] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `{"v":27,"elements":[...]}`
    pub fn to_json(&self) -> String {
        serde_json::json!({ "v": self.v, "elements": self.elements }).to_string()
    }

    /// Parses [`NtapSet::to_json`] output and re-verifies the set.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            v: Residue,
            elements: Vec<Residue>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::new(raw.v, &raw.elements)
    }
}

/// `{ sum alpha_i 3^(i-1) : alpha_i = +-1 }` in `Z_{3^n}`, a set of size `2^n`.
pub fn ntap_construct(n: u32) -> Result<NtapSet> {
    if n == 0 || n > 20 {
        return Err(Error::InvalidArgument(format!("n must lie in 1..=20, got {n}")));
    }
    let v = 3u64.pow(n);
    let ring = Ring::new(v)?;
    let elements: Vec<Residue> = (0u64..1 << n)
        .map(|signs| {
            (0..n).fold(0, |acc, i| {
                let t = 3u64.pow(i);
                if signs >> i & 1 == 1 {
                    ring.sub(acc, t)
                } else {
                    ring.add(acc, t)
                }
            })
        })
        .collect();
    NtapSet::new(v, &elements)
}

/// The constants of the logarithmic comparison between `2^n` and the
/// best known progression-free lower bound at `v = 3^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtapConstants {
    pub ln3: f64,
    pub ln2: f64,
    /// `ln 3 - ln 2`
    pub linear: f64,
    /// `2 sqrt(log2(24/7))`
    pub two_sqrt_log2_24_7: f64,
    pub log2_3: f64,
    pub sqrt_log2_3: f64,
    /// `ln 2 * 2 sqrt(log2(24/7)) * log2 3`, the expansion's `sqrt(n)` coefficient
    pub expansion_coefficient: f64,
    /// `ln 2 * 2 sqrt(log2(24/7)) * sqrt(log2 3)`, the exact `sqrt(n)` coefficient
    pub formula_coefficient: f64,
}

pub fn ntap_constants() -> NtapConstants {
    let ln3 = 3f64.ln();
    let ln2 = 2f64.ln();
    let two_sqrt = 2.0 * (24f64 / 7.0).log2().sqrt();
    let log2_3 = 3f64.log2();
    NtapConstants {
        ln3,
        ln2,
        linear: ln3 - ln2,
        two_sqrt_log2_24_7: two_sqrt,
        log2_3,
        sqrt_log2_3: log2_3.sqrt(),
        expansion_coefficient: ln2 * two_sqrt * log2_3,
        formula_coefficient: ln2 * two_sqrt * log2_3.sqrt(),
    }
}

/// Comparison of `rho1 = 2^n` with `rho2 = v 2^(-2 sqrt(log2(24/7)) sqrt(log2 v))`
/// at `v = 3^n`, with the `o(1)` term set to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtapBoundReport {
    pub n: u32,
    pub rho1: f64,
    pub rho2: f64,
    /// `(ln 3 - ln 2) n - c sqrt(n)` with the expansion coefficient `c`.
    pub ln_ratio: f64,
    /// `ln(rho2 / rho1)` evaluated directly from the bound.
    pub ln_ratio_formula: f64,
    /// `ln_ratio <= 0`
    pub rho1_wins: bool,
}

pub fn ntap_bound_report(n: u32) -> Result<NtapBoundReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let c = ntap_constants();
    let nf = f64::from(n);
    let ln_ratio = c.linear * nf - c.expansion_coefficient * nf.sqrt();
    let ln_rho1 = nf * c.ln2;
    let ln_v = nf * c.ln3;
    let ln_rho2 = ln_v - c.two_sqrt_log2_24_7 * (nf * c.log2_3).sqrt() * c.ln2;
    Ok(NtapBoundReport {
        n,
        rho1: ln_rho1.exp(),
        rho2: ln_rho2.exp(),
        ln_ratio,
        ln_ratio_formula: ln_rho2 - ln_rho1,
        rho1_wins: ln_ratio <= 0.0,
    })
}

/// An `r x m` array over `[0, q)` meant to separate every `t` columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhfArray {
    pub r: usize,
    pub m: usize,
    pub q: u64,
    pub t: usize,
    pub grid: Vec<Vec<u64>>,
}

impl PhfArray {
    pub fn new(q: u64, t: usize, grid: Vec<Vec<u64>>) -> Result<Self> {
        let r = grid.len();
        let m = grid.first().map_or(0, Vec::len);
        if r == 0 || m == 0 {
            return Err(Error::InvalidArgument("a PHF array needs rows and columns".into()));
        }
        if grid.iter().any(|row| row.len() != m) {
            return Err(Error::Format("PHF rows differ in length".into()));
        }
        if let Some(&x) = grid.iter().flatten().find(|&&x| x >= q) {
            return Err(Error::Format(format!("symbol {x} is outside [0, {q})")));
        }
        Ok(Self { r, m, q, t, grid })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain integers serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PhfArray = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let phf = Self::new(raw.q, raw.t, raw.grid)?;
        if (phf.r, phf.m) != (raw.r, raw.m) {
            return Err(Error::Format("declared r, m disagree with the grid".into()));
        }
        Ok(phf)
    }

    fn separated(&self, cols: &[usize]) -> bool {
        self.grid
            .iter()
            .any(|row| cols.iter().enumerate().all(|(a, &c)| cols[a + 1..].iter().all(|&d| row[c] != row[d])))
    }
}

/// The `3 x (g v)` array whose column `(i, x)` reads `x + j b_i (mod v)` in
/// row `j`. No checks are made.
pub fn phf_cell_rule(v: Residue, elements: &[Residue]) -> PhfArray {
    let mut grid: Vec<Vec<u64>> = (0..3).map(|_| Vec::with_capacity(elements.len() * v as usize)).collect();
    for &b in elements {
        for x in 0..v {
            for (j, row) in grid.iter_mut().enumerate() {
                row.push((x + j as u64 * b) % v);
            }
        }
    }
    PhfArray { r: 3, m: grid[0].len(), q: v, t: 3, grid }
}

/// A `(3; g v, v, 3)` PHF from a progression-free set over odd `v`.
pub fn phf_from_ntap(ntap: &NtapSet) -> Result<PhfArray> {
    Ring::new(ntap.v())?;
    Ok(phf_cell_rule(ntap.v(), ntap.elements()))
}

/// Largest number of column subsets checked one by one.
pub const PHF_EXHAUSTIVE_LIMIT: u64 = 50_000_000;
/// Column subsets drawn when the exhaustive limit is exceeded.
pub const PHF_SAMPLES: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PhfVerdict {
    /// Every checked subset is separated; `exhaustive` says whether all
    /// `C(m, t)` of them were checked.
    Valid { checked: u64, exhaustive: bool },
    /// No row is injective on these columns.
    Unseparated(Vec<usize>),
}

impl PhfVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, PhfVerdict::Valid { .. })
    }
}

/// Checks that some row separates every `t`-subset of columns. Beyond
/// [`PHF_EXHAUSTIVE_LIMIT`] subsets a seeded sample is checked instead.
pub fn verify_phf(phf: &PhfArray, seed: u64) -> Result<PhfVerdict> {
    let (m, t) = (phf.m, phf.t);
    if t == 0 || t > m {
        return Err(Error::InvalidArgument(format!("need 1 <= t <= m, got t = {t}, m = {m}")));
    }
    let total = binomial(m as u64, t as u64);
    let total = u64::try_from(&total).ok().filter(|&n| n <= PHF_EXHAUSTIVE_LIMIT);
    if let Some(total) = total {
        let bad = (0..=m - t).into_par_iter().find_map_first(|first| {
            let mut cols = Vec::with_capacity(t);
            cols.push(first);
            first_unseparated(phf, &mut cols)
        });
        return Ok(match bad {
            Some(cols) => PhfVerdict::Unseparated(cols),
            None => PhfVerdict::Valid { checked: total, exhaustive: true },
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets: Vec<Vec<usize>> = (0..PHF_SAMPLES)
        .map(|_| {
            let mut s = sample(&mut rng, m, t).into_vec();
            s.sort_unstable();
            s
        })
        .collect();
    let bad = subsets.into_par_iter().find_first(|cols| !phf.separated(cols));
    Ok(match bad {
        Some(cols) => PhfVerdict::Unseparated(cols),
        None => PhfVerdict::Valid { checked: PHF_SAMPLES as u64, exhaustive: false },
    })
}

/// Extends the sorted prefix `cols` in lexicographic order and returns the
/// first completion no row separates.
fn first_unseparated(phf: &PhfArray, cols: &mut Vec<usize>) -> Option<Vec<usize>> {
    if cols.len() == phf.t {
        return (!phf.separated(cols)).then(|| cols.clone());
    }
    let start = cols.last().map_or(0, |c| c + 1);
    let need = phf.t - cols.len();
    for c in start..=phf.m - need {
        cols.push(c);
        let found = first_unseparated(phf, cols);
        cols.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhfComparisonMode {
    /// against `m3 = p^2 (p + 1)` with `p^2 = 3^n`
    Quadrics,
    /// against `m4 = p^5` with `p^3 = 3^n`
    Hermitian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhfComparison {
    pub n: u32,
    pub mode: PhfComparisonMode,
    /// `6^n`
    pub m2: f64,
    pub other: f64,
    /// `other / m2`
    pub ratio: f64,
    /// The same ratio as an exact rational when `p` is an integer.
    pub exact_ratio: Option<Rational>,
}

/// Column counts of the `(3; 6^n, 3^n, 3)` family against the quadric or
/// Hermitian families over the same alphabet size.
pub fn phf_column_comparison(n: u32, mode: PhfComparisonMode) -> Result<PhfComparison> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("the comparison needs n >= 2, got {n}")));
    }
    let nf = f64::from(n);
    let m2 = 6f64.powf(nf);
    let three = num_bigint::BigInt::from(3);
    let two = num_bigint::BigInt::from(2);
    let (other, exact_ratio) = match mode {
        PhfComparisonMode::Quadrics => {
            let p = 3f64.powf(nf / 2.0);
            let exact = n.is_multiple_of(2).then(|| {
                let p = three.pow(n / 2);
                ratio(&p * &p * (&p + 1), num_bigint::BigInt::from(6).pow(n))
            });
            (p * p * (p + 1.0), exact)
        }
        PhfComparisonMode::Hermitian => {
            let p = 3f64.powf(nf / 3.0);
            let exact = n.is_multiple_of(3).then(|| ratio(three.pow(2 * n / 3), two.pow(n)));
            (p.powi(5), exact)
        }
    };
    Ok(PhfComparison { n, mode, m2, other, ratio: other / m2, exact_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nhsdp::{cdp_to_nhsdp, ds_search, verify_nhsdp};
    use proptest::prelude::*;

    #[test]
    fn ntap_examples() {
        assert_eq!(verify_ntap(7, &[0, 1, 3]).unwrap(), NtapVerdict::Valid);
        for v in 5..12 {
            assert_eq!(verify_ntap(v, &[0, 1, 2]).unwrap(), NtapVerdict::Violation(Progression { x: 0, y: 2, z: 1 }));
        }
        assert!(verify_ntap(15, &[14, 1, 13, 2]).unwrap().is_valid());
        assert!(verify_ntap(7, &[7]).is_err());
    }

    #[test]
    fn even_modulus_has_two_midpoints() {
        // 2*5 = 0 + 2 + 8 (mod 8): 5 is a midpoint of 0 and 2 in Z_8
        assert_eq!(verify_ntap(8, &[0, 2, 5]).unwrap(), NtapVerdict::Violation(Progression { x: 0, y: 2, z: 5 }));
        assert!(verify_ntap(8, &[0, 1, 3]).unwrap().is_valid());
    }

    #[test]
    fn ntap_json_round_trip() {
        let s = ntap_construct(2).unwrap();
        assert_eq!(s.to_json(), "{\"elements\":[2,4,5,7],\"v\":9}");
        assert_eq!(NtapSet::from_json(&s.to_json()).unwrap(), s);
        assert!(NtapSet::from_json("{\"v\":9,\"elements\":[0,1,2]}").is_err());
    }

    #[test]
    fn constructed_ntaps() {
        assert_eq!(ntap_construct(1).unwrap().elements(), &[1, 2]);
        assert_eq!(ntap_construct(2).unwrap().elements(), &[2, 4, 5, 7]);
        for n in 1..=10 {
            let s = ntap_construct(n).unwrap();
            assert_eq!(s.len(), 1 << n);
            assert_eq!(s.v(), 3u64.pow(n));
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn rounded_constants() {
        let c = ntap_constants();
        for (value, printed) in [(c.ln3, 1.0986), (c.ln2, 0.6931), (c.linear, 0.4055), (c.log2_3, 1.5850)] {
            assert!((value - printed).abs() < 5e-5, "{value} vs {printed}");
        }
        assert!((c.two_sqrt_log2_24_7 - 2.6665).abs() < 5e-5);
        assert!((0.6931f64 * 2.6665 * 1.5850 - 2.9293).abs() < 5e-5);
        assert!((c.expansion_coefficient - 2.9293).abs() < 5e-4);
    }

    #[test]
    fn bound_crossover() {
        assert!(ntap_bound_report(1).unwrap().rho1_wins);
        assert!(ntap_bound_report(52).unwrap().rho1_wins);
        assert!(!ntap_bound_report(53).unwrap().rho1_wins);
        let first_loss = (1..200).find(|&n| !ntap_bound_report(n).unwrap().rho1_wins);
        assert_eq!(first_loss, Some(53));
        let r = ntap_bound_report(10).unwrap();
        assert!((r.rho1 - 1024.0).abs() < 1e-6);
        assert!((r.ln_ratio_formula - (r.rho2 / r.rho1).ln()).abs() < 1e-9);
    }

    #[test]
    fn phf_examples() {
        let p = phf_from_ntap(&NtapSet::new(3, &[1, 2]).unwrap()).unwrap();
        assert_eq!((p.r, p.m, p.q, p.t), (3, 6, 3, 3));
        assert_eq!(verify_phf(&p, 0).unwrap(), PhfVerdict::Valid { checked: 20, exhaustive: true });
        let p = phf_from_ntap(&ntap_construct(2).unwrap()).unwrap();
        assert_eq!(p.m, 36);
        assert_eq!(verify_phf(&p, 0).unwrap(), PhfVerdict::Valid { checked: 7140, exhaustive: true });
        let ds = cdp_to_nhsdp(&ds_search(2).unwrap().unwrap()).unwrap();
        let p = phf_from_ntap(&NtapSet::new(ds.v(), &ds.blocks()[0]).unwrap()).unwrap();
        assert_eq!((p.m, p.q), (21, 7));
        assert!(verify_phf(&p, 0).unwrap().is_valid());
        let p = phf_from_ntap(&ntap_construct(3).unwrap()).unwrap();
        assert!(verify_phf(&p, 0).unwrap().is_valid());
    }

    #[test]
    fn phf_negative_controls() {
        let p = phf_cell_rule(7, &[0, 1, 2]);
        assert_eq!(verify_phf(&p, 0).unwrap(), PhfVerdict::Unseparated(vec![0, 7, 19]));
        let twin = PhfArray::new(3, 3, vec![vec![0, 0, 1, 2], vec![1, 1, 2, 0], vec![2, 2, 0, 1]]).unwrap();
        assert_eq!(verify_phf(&twin, 0).unwrap(), PhfVerdict::Unseparated(vec![0, 1, 2]));
        let line = PhfArray::new(5, 5, vec![vec![4, 3, 2, 1, 0]]).unwrap();
        assert!(verify_phf(&line, 0).unwrap().is_valid());
        let short = PhfArray::new(2, 3, vec![vec![0, 1]]).unwrap();
        assert!(verify_phf(&short, 0).is_err());
        assert!(phf_from_ntap(&NtapSet::new(8, &[0, 1, 3]).unwrap()).is_err());
    }

    #[test]
    fn phf_json_round_trip() {
        let p = phf_from_ntap(&NtapSet::new(3, &[1, 2]).unwrap()).unwrap();
        let json = p.to_json();
        assert!(json.starts_with("{\"r\":3,\"m\":6,\"q\":3,\"t\":3,\"grid\":[["));
        assert_eq!(PhfArray::from_json(&json).unwrap(), p);
    }

    #[test]
    fn column_comparisons() {
        let c = phf_column_comparison(4, PhfComparisonMode::Quadrics).unwrap();
        assert_eq!(c.exact_ratio, Some(ratio(5, 8)));
        assert!((c.ratio - 0.625).abs() < 1e-12);
        let c = phf_column_comparison(6, PhfComparisonMode::Hermitian).unwrap();
        assert_eq!(c.exact_ratio, Some(ratio(81, 64)));
        assert!((c.ratio - 81.0 / 64.0).abs() < 1e-12);
        let c = phf_column_comparison(2, PhfComparisonMode::Quadrics).unwrap();
        assert_eq!(c.exact_ratio, Some(ratio(1, 1)));
        assert_eq!(phf_column_comparison(5, PhfComparisonMode::Hermitian).unwrap().exact_ratio, None);
        assert!(phf_column_comparison(1, PhfComparisonMode::Quadrics).is_err());
    }

    proptest! {
        #[test]
        fn single_block_nhsdp_iff_ntap(v in (1u64..25).prop_map(|k| 2 * k + 1), raw in prop::collection::btree_set(0u64..51, 1..7)) {
            let elements: Vec<u64> = raw.into_iter().filter(|&x| x < v).collect();
            prop_assume!(!elements.is_empty());
            let as_nhsdp = verify_nhsdp(v, std::slice::from_ref(&elements)).unwrap().is_valid();
            prop_assert_eq!(as_nhsdp, verify_ntap(v, &elements).unwrap().is_valid());
        }

        #[test]
        fn ntap_phfs_separate(v in (1u64..10).prop_map(|k| 2 * k + 1), raw in prop::collection::btree_set(0u64..19, 1..5)) {
            let elements: Vec<u64> = raw.into_iter().filter(|&x| x < v).collect();
            prop_assume!(!elements.is_empty());
            if let Ok(s) = NtapSet::new(v, &elements) {
                let p = phf_from_ntap(&s).unwrap();
                prop_assert!(verify_phf(&p, 0).unwrap().is_valid());
            }
        }
    }
}
