//! Non-half-sum disjoint packings and the coded-caching placement delivery
//! arrays built from them.
//!
//! The arithmetic in [`math`] is generic over the unsigned primitive
//! integers. The rest of the crate works with the aliases below.

pub mod designs;
pub mod error;
pub mod math;
pub mod nhsdp;
pub mod pda;
pub mod schemes;
pub mod sim;

pub use error::{Error, Result};
pub use math::{binomial, gaussian_binomial, gcd_lcm, integer_root, ratio, OddResidueRing};
pub use nhsdp::{
    cdp_to_nhsdp, choose_params_closed_form, construct_nhsdp, ds_search, solve_problem1_exact, verify_cdp,
    verify_nhsdp, BlockParams, Cdp, CdpVerdict, Nhsdp, NhsdpVerdict, NhsdpViolation,
};
pub use pda::{Cell, Pda, PdaReport, PdaStats, PdaViolation};
pub use schemes::{
    apply_grouping_formula, evaluate_nhsdp_scheme, evaluate_scheme, ratio_report, Scheme, SchemePoint, Solver,
};

/// Residue type used throughout the crate.
pub type Residue = u64;

/// The ring `Z_v` over [`Residue`].
pub type Ring = OddResidueRing<Residue>;

/// Exact rational used for memory ratios, loads and gains.
pub type Rational = num_rational::BigRational;
