use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::math::{binomial, gaussian_binomial, is_prime_power, ratio};
use crate::nhsdp::{choose_params_closed_form, solve_problem1_exact};
use crate::{Rational, Ring};

use super::{Params, Scheme, SchemePoint};

/// How the NHSDP block parameters are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// `m_i = floor((v^(1/n) - 1)/2)` for every `i`
    ClosedForm,
    /// the best product found by exhaustive search
    Exact,
}

fn get(scheme: Scheme, params: &Params, name: &str) -> Result<u64> {
    params.get(name).copied().ok_or_else(|| {
        Error::InvalidArgument(format!("{scheme} needs parameter {name:?} (expects {:?})", scheme.parameters()))
    })
}

fn require(scheme: Scheme, ok: bool, constraint: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ConstraintViolated { scheme: scheme.to_string(), constraint: constraint.to_string() })
    }
}

fn int(x: impl Into<BigInt>) -> Rational {
    Rational::from_integer(x.into())
}

fn big(x: BigUint) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

fn exponent(x: u64) -> Result<u32> {
    u32::try_from(x)
        .ok()
        .filter(|&e| e <= 1 << 16)
        .ok_or_else(|| Error::InvalidArgument(format!("exponent {x} is too large")))
}

fn pow(base: u64, e: u64) -> Result<BigInt> {
    Ok(BigInt::from(base).pow(exponent(e)?))
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `[k 1]_q`
fn gb1(k: u64, q: u64) -> Result<BigInt> {
    Ok(BigInt::from(gaussian_binomial(k, 1, q)?))
}

fn gb(k: u64, t: u64, q: u64) -> Result<BigInt> {
    Ok(BigInt::from(gaussian_binomial(k, t, q)?))
}

fn as_integer(scheme: Scheme, what: &str, x: &Rational) -> Result<BigUint> {
    if !x.is_integer() {
        return Err(Error::ConstraintViolated {
            scheme: scheme.to_string(),
            constraint: format!("{what} = {x} is not an integer"),
        });
    }
    x.to_integer().to_biguint().ok_or_else(|| Error::ConstraintViolated {
        scheme: scheme.to_string(),
        constraint: format!("{what} = {x} is negative"),
    })
}

fn users_u64(scheme: Scheme, k: &BigUint) -> Result<u64> {
    k.to_u64().ok_or_else(|| Error::InvalidArgument(format!("{scheme}: K = {k} does not fit in 64 bits")))
}

/// Evaluates one row of the scheme table at the given parameters.
pub fn evaluate_scheme(scheme: Scheme, params: &Params) -> Result<SchemePoint> {
    let p = |name: &str| get(scheme, params, name);
    let (users, memory, load, f): (BigUint, Rational, Rational, BigUint) = match scheme {
        Scheme::Mn => {
            let (k, t) = (p("K")?, p("t")?);
            require(scheme, t < k, "0 <= t < K")?;
            (k.into(), ratio(t, k), ratio(k - t, t + 1), binomial(k, t))
        }
        Scheme::Wclc => {
            let (m, z, k, t) = (p("m")?, p("z")?, p("k")?, p("t")?);
            require(scheme, 1 <= t && t < k, "1 <= t < k")?;
            require(scheme, 1 <= z && z <= m, "1 <= z <= m")?;
            let fl = (k - 1) / (k - t);
            let users = binomial(m, z) * BigUint::from(k).pow(exponent(z)?);
            let memory = Rational::one() - Rational::new(pow(k - t, z)?, pow(k, z)?);
            let load = Rational::new(pow(k - t, z)?, pow(fl, z)?);
            let f = pow(fl, z)? * pow(k, m - 1)?;
            (users, memory, load, f.to_biguint().expect("positive"))
        }
        Scheme::Ytcc => {
            let (h, a, z, r) = (p("H")?, p("a")?, p("z")?, p("r")?);
            require(scheme, r < a && a < h, "r < a < H")?;
            require(scheme, r < z && z < h, "r < z < H")?;
            require(scheme, a + z <= h + r, "a + z <= H + r")?;
            let chz = big(binomial(h, z));
            let memory = Rational::one() - big(binomial(a, r) * binomial(h - a, z - r)) / &chz;
            let first = binomial(h + 2 * r - a - z, r);
            let second = binomial(a + z - 2 * r, a - r);
            let load = big(binomial(h, a + z - 2 * r)) / &chz * big(first.min(second));
            (binomial(h, a), memory, load, binomial(h, z))
        }
        Scheme::Wccls => {
            let (q, m, w) = (p("q")?, p("m")?, p("w")?);
            require(scheme, q >= 2, "q >= 2")?;
            require(scheme, 1 <= w && w <= m, "1 <= w <= m")?;
            let c = BigInt::from(binomial(m, w)) * pow(q - 1, w)?;
            let qm = pow(q, m)?;
            let memory = Rational::one() - Rational::new(c.clone(), qm.clone());
            let load = Rational::new(c, pow(q, m - w)?);
            let qm = qm.to_biguint().expect("positive");
            (qm.clone(), memory, load, qm)
        }
        Scheme::Cksm1 => {
            let (q, k, m, t) = (p("q")?, p("k")?, p("m")?, p("t")?);
            require(scheme, is_prime_power(q), "q is a prime power")?;
            require(scheme, m >= 1 && t >= 1 && m + t <= k, "m + t <= k")?;
            let users = Rational::new(
                pow(q, t * (t - 1) / 2)? * (0..t).map(|i| gb1(k - i, q)).product::<Result<BigInt>>()?,
                factorial(t),
            );
            let mut memory_frac = int(pow(q, m * t)?);
            for i in 0..m {
                memory_frac *= Rational::new(gb1(k - t - i, q)?, gb1(k - i, q)?);
            }
            let load = Rational::new(factorial(m) * pow(q, m * t)?, factorial(m + t))
                * int(pow(q, t * (t - 1) / 2)?)
                * int((0..t).map(|i| gb1(k - m - i, q)).product::<Result<BigInt>>()?);
            let f = Rational::new(
                pow(q, m * (m - 1) / 2)? * (0..m).map(|i| gb1(k - i, q)).product::<Result<BigInt>>()?,
                factorial(m),
            );
            (as_integer(scheme, "K", &users)?, Rational::one() - memory_frac, load, as_integer(scheme, "F", &f)?)
        }
        Scheme::Cksm2 => {
            let (q, k, m, t) = (p("q")?, p("k")?, p("m")?, p("t")?);
            require(scheme, q >= 2, "2 <= q")?;
            require(scheme, m >= 1 && t >= 1 && m + t <= k, "m + t <= k")?;
            let f = gb(k, m + t, q)?;
            let memory = Rational::one() - Rational::new(gb(k - t, m, q)?, f.clone());
            let load = Rational::new(gb(k, m, q)?, f.clone());
            (gaussian_binomial(k, t, q)?, memory, load, f.to_biguint().expect("positive"))
        }
        Scheme::Ask1 => {
            let q = p("q")?;
            require(scheme, is_prime_power(q), "q is a prime power")?;
            let k = q * q + q + 1;
            (k.into(), ratio(q * q, k), int(1), k.into())
        }
        Scheme::Ask2 => {
            let q = p("q")?;
            require(scheme, q >= 2, "2 <= q")?;
            ((q * q).into(), ratio(q - 1, q), ratio(q, q + 1), (q * q + q).into())
        }
        Scheme::Zcw => {
            let (m, w) = (p("m")?, p("w")?);
            require(scheme, 1 <= w && w < m, "1 <= w < m")?;
            let sum: BigUint = (0..=w).map(|i| binomial(m, i)).sum();
            let c = binomial(m, w);
            let memory = Rational::one() - Rational::new(c.clone().into(), sum.clone().into());
            let load = Rational::new(BigInt::from(c) * pow(2, m - w)?, sum.clone().into());
            (pow(2, m)?.to_biguint().expect("positive"), memory, load, sum)
        }
        Scheme::Wcwl => {
            let (k, t) = (p("K")?, p("t")?);
            require(scheme, 1 <= t && t < k, "1 <= t < K")?;
            let d = k - t + 1;
            let fl = k / d;
            let (load, f) = if k % d == 0 || k - t == 1 {
                (ratio((k - t) * (k - t + 1), 2 * k), BigUint::from(k))
            } else if k % d == k - t {
                (ratio(k - t, 2 * fl + 1), BigUint::from(2 * fl + 1) * k)
            } else {
                (ratio(k - t, 2 * fl), BigUint::from(2 * fl) * k)
            };
            (k.into(), ratio(t, k), load, f)
        }
        Scheme::Xxgl => {
            let k = p("K")?;
            require(scheme, k >= 2, "K >= 2")?;
            (k.into(), ratio(k - 2, k), ratio(k - 1, k), k.into())
        }
        Scheme::Ast => {
            let (r, k) = (p("r")?, p("k")?);
            require(scheme, r >= 1 && k >= 1, "r, k >= 1")?;
            let two_r = pow(2, r)?;
            let users = &two_r * k;
            let memory = Rational::one() - Rational::new(BigInt::from(r + 1), two_r.clone())
                + Rational::new(BigInt::from(r), users.clone());
            let load = Rational::new(BigInt::from(k * (r + 1) - r), two_r);
            let users = users.to_biguint().expect("positive");
            (users.clone(), memory, load, users)
        }
        Scheme::Mr => {
            let (k, t) = (p("K")?, p("t")?);
            require(scheme, 1 <= t && t < k, "1 <= t < K")?;
            let d = k - t + 1;
            let den = 2 + t / d + (t - 1) / d;
            let num = k * (k - t);
            (k.into(), ratio(t, k), ratio(num.div_ceil(den), k), k.into())
        }
        Scheme::Nhsdp | Scheme::NhsdpConj => {
            let (v, n) = (p("v")?, p("n")?);
            let solver = match params.get("exact") {
                Some(&1) => Solver::Exact,
                None | Some(&0) => Solver::ClosedForm,
                Some(x) => return Err(Error::InvalidArgument(format!("exact must be 0 or 1, got {x}"))),
            };
            let n = u32::try_from(n).map_err(|_| Error::InvalidArgument(format!("n = {n} is too large")))?;
            let point = evaluate_nhsdp_scheme(v, n, solver)?;
            return if scheme == Scheme::Nhsdp { Ok(point) } else { conjugate_point(&point) };
        }
        Scheme::Pda => {
            let (k, f, z, s) = (p("K")?, p("F")?, p("Z")?, p("S")?);
            require(scheme, f >= 1 && z <= f, "0 <= Z <= F")?;
            (k.into(), ratio(z, f), ratio(s, f), f.into())
        }
    };
    SchemePoint::new(scheme, params.clone(), users_u64(scheme, &users)?, memory, load, f)
}

/// The `(v, 2^n, prod m_i)` NHSDP scheme: `K = F = v`,
/// `M/N = 1 - 2^n prod m_i / v` and `R = prod m_i`.
pub fn evaluate_nhsdp_scheme(v: u64, n: u32, solver: Solver) -> Result<SchemePoint> {
    Ring::new(v)?;
    let m = match solver {
        Solver::ClosedForm => choose_params_closed_form(v, n)?,
        Solver::Exact => solve_problem1_exact(v, n)?.0,
    };
    let b: u64 = m.iter().product();
    let g =
        1u64.checked_shl(n).filter(|&g| g <= v).ok_or_else(|| Error::Infeasible(format!("2^{n} exceeds v = {v}")))?;
    let mut params = Params::new();
    params.insert("v".into(), v);
    params.insert("n".into(), u64::from(n));
    if solver == Solver::Exact {
        params.insert("exact".into(), 1);
    }
    for (i, mi) in m.iter().enumerate() {
        params.insert(format!("m{}", i + 1), *mi);
    }
    SchemePoint::new(Scheme::Nhsdp, params, v, Rational::one() - ratio(g * b, v), int(b), v.into())
}

/// The conjugate `(v, bv, bv - bg, v)` array of an NHSDP point.
fn conjugate_point(point: &SchemePoint) -> Result<SchemePoint> {
    let v = point.users;
    let b = point.load.to_integer().to_u64().expect("NHSDP load is an integer");
    let g = 1u64 << point.params["n"];
    let s = b * v;
    SchemePoint::new(Scheme::NhsdpConj, point.params.clone(), v, ratio(s - b * g, s), ratio(v, s), BigUint::from(s))
}
