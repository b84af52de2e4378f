//! Closed-form performance of coded caching schemes.
//!
//! Every figure is an exact rational or integer; decimals appear only when
//! rendering. [`evaluate_scheme`] covers the competitor schemes and the
//! NHSDP schemes, [`apply_grouping_formula`] extends any point to more users,
//! and [`sweep`] enumerates parameter grids into plot-ready tables.

mod formulas;
pub mod sweep;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::math::{gcd_lcm, ratio};
use crate::Rational;

pub use formulas::{evaluate_nhsdp_scheme, evaluate_scheme, Solver};
pub use sweep::{default_grid, default_sweep, tradeoff_sweep, write_csv, write_json, DEFAULT_SLACK};

/// Scheme tags. `Pda` is a raw `(K, F, Z, S)` array given by its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Mn,
    Wclc,
    Ytcc,
    Wccls,
    Cksm1,
    Cksm2,
    Ask1,
    Ask2,
    Zcw,
    Wcwl,
    Xxgl,
    Ast,
    Mr,
    Nhsdp,
    NhsdpConj,
    Pda,
}

impl Scheme {
    pub const ALL: [Scheme; 16] = [
        Scheme::Mn,
        Scheme::Wclc,
        Scheme::Ytcc,
        Scheme::Wccls,
        Scheme::Cksm1,
        Scheme::Cksm2,
        Scheme::Ask1,
        Scheme::Ask2,
        Scheme::Zcw,
        Scheme::Wcwl,
        Scheme::Xxgl,
        Scheme::Ast,
        Scheme::Mr,
        Scheme::Nhsdp,
        Scheme::NhsdpConj,
        Scheme::Pda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Mn => "MN",
            Scheme::Wclc => "WCLC",
            Scheme::Ytcc => "YTCC",
            Scheme::Wccls => "WCCLS",
            Scheme::Cksm1 => "CKSM1",
            Scheme::Cksm2 => "CKSM2",
            Scheme::Ask1 => "ASK1",
            Scheme::Ask2 => "ASK2",
            Scheme::Zcw => "ZCW",
            Scheme::Wcwl => "WCWL",
            Scheme::Xxgl => "XXGL",
            Scheme::Ast => "AST",
            Scheme::Mr => "MR",
            Scheme::Nhsdp => "NHSDP",
            Scheme::NhsdpConj => "NHSDP_CONJ",
            Scheme::Pda => "PDA",
        }
    }

    /// Parameter names accepted by [`evaluate_scheme`], required first.
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            Scheme::Mn | Scheme::Wcwl | Scheme::Mr => &["K", "t"],
            Scheme::Wclc => &["m", "z", "k", "t"],
            Scheme::Ytcc => &["H", "a", "z", "r"],
            Scheme::Wccls => &["q", "m", "w"],
            Scheme::Cksm1 | Scheme::Cksm2 => &["q", "k", "m", "t"],
            Scheme::Ask1 | Scheme::Ask2 => &["q"],
            Scheme::Zcw => &["m", "w"],
            Scheme::Xxgl => &["K"],
            Scheme::Ast => &["r", "k"],
            Scheme::Nhsdp | Scheme::NhsdpConj => &["v", "n", "exact"],
            Scheme::Pda => &["K", "F", "Z", "S"],
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase().replace('-', "_");
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == upper)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme {s:?}")))
    }
}

/// Named integer parameters of a scheme.
pub type Params = BTreeMap<String, u64>;

/// Builds a [`Params`] map from `(name, value)` pairs.
pub fn params<const N: usize>(pairs: [(&str, u64); N]) -> Params {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// One operating point of a scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemePoint {
    pub scheme: Scheme,
    pub params: Params,
    pub users: u64,
    pub memory_ratio: Rational,
    pub load: Rational,
    pub subpacketization: BigUint,
    /// `K (1 - M/N) / R`
    pub gain: Rational,
}

impl SchemePoint {
    /// Checks `0 <= M/N <= 1`, `R > 0`, `F >= 1` and fills in the gain.
    pub fn new(
        scheme: Scheme,
        params: Params,
        users: u64,
        memory_ratio: Rational,
        load: Rational,
        subpacketization: BigUint,
    ) -> Result<Self> {
        let violated = |constraint: String| Error::ConstraintViolated { scheme: scheme.to_string(), constraint };
        if users == 0 {
            return Err(violated("K >= 1".into()));
        }
        if memory_ratio.is_negative() || memory_ratio > Rational::one() {
            return Err(violated(format!("memory ratio {memory_ratio} outside [0, 1]")));
        }
        if !load.is_positive() {
            return Err(violated(format!("load {load} must be positive")));
        }
        if subpacketization.is_zero() {
            return Err(violated("subpacketization >= 1".into()));
        }
        let gain = Rational::from_integer(BigInt::from(users)) * (Rational::one() - &memory_ratio) / &load;
        Ok(Self { scheme, params, users, memory_ratio, load, subpacketization, gain })
    }

    /// `Z = F M/N` and `S = F R`, which need not be integers for
    /// formula-level points.
    pub fn z_and_s(&self) -> (Rational, Rational) {
        let f = Rational::from_integer(BigInt::from(self.subpacketization.clone()));
        (&f * &self.memory_ratio, &f * &self.load)
    }

    /// `name=value` pairs joined by `;`.
    pub fn params_string(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }
}

impl fmt::Display for SchemePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}): K={} M/N={} ({:.5}) R={} ({:.5}) F={} gain={}",
            self.scheme,
            self.params_string(),
            self.users,
            self.memory_ratio,
            to_f64(&self.memory_ratio),
            self.load,
            to_f64(&self.load),
            self.subpacketization,
            self.gain
        )
    }
}

/// Decimal value of an exact rational, for display and tolerance checks.
pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Extends a `K_1`-user point to `K` users by grouping: with
/// `h_1 = K_1 / gcd(K_1, K)` and `h = K / gcd(K_1, K)` the result has
/// `F' = h_1 F`, the same memory ratio and load `h S / (h_1 F)`.
pub fn apply_grouping_formula(base: &SchemePoint, users: u64) -> Result<SchemePoint> {
    let k1 = base.users;
    if users <= k1 {
        return Err(Error::InvalidArgument(format!("grouping needs K > K_1 = {k1}, got K = {users}")));
    }
    let (g, _) = gcd_lcm(k1, users);
    let (h1, h) = (k1 / g, users / g);
    let mut params = base.params.clone();
    params.insert("grouped_K".into(), users);
    SchemePoint::new(
        base.scheme,
        params,
        users,
        base.memory_ratio.clone(),
        &base.load * ratio(h, h1),
        &base.subpacketization * h1,
    )
}

/// Exact ratios between two points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioReport {
    /// `F_a / F_b`
    pub f_ratio: Rational,
    /// `R_a / R_b`
    pub r_ratio: Rational,
    /// `(M/N)_a - (M/N)_b`
    pub memory_delta: Rational,
}

pub fn ratio_report(a: &SchemePoint, b: &SchemePoint) -> RatioReport {
    RatioReport {
        f_ratio: ratio(a.subpacketization.clone(), b.subpacketization.clone()),
        r_ratio: &a.load / &b.load,
        memory_delta: &a.memory_ratio - &b.memory_ratio,
    }
}
