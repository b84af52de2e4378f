//! Parameter sweeps around a target user count.

use std::io::Write;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::is_prime_power;
use crate::nhsdp::modulus_for_users;

use super::{evaluate_scheme, Params, Scheme, SchemePoint};

/// Default `|K' - K|` allowed when pairing rigid schemes with a target `K`.
pub const DEFAULT_SLACK: u64 = 8;

fn binom_sat(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul(u128::from(n - i)) {
            Some(x) => acc = x / u128::from(i + 1),
            None => return u128::MAX,
        }
    }
    acc
}

fn pow_sat(base: u64, e: u64) -> u128 {
    let e = u32::try_from(e).unwrap_or(u32::MAX);
    u128::from(base).checked_pow(e).unwrap_or(u128::MAX)
}

/// `[k 1]_q = 1 + q + ... + q^(k-1)`, saturating.
fn qint_sat(k: u64, q: u64) -> u128 {
    (0..k).fold(0u128, |acc, i| acc.saturating_add(pow_sat(q, i)))
}

fn p(pairs: &[(&str, u64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Candidate parameter sets of `scheme` whose user count can land in
/// `[K - slack, K + slack]`. Flexible schemes use `K` itself. Some
/// candidates may still fail the scheme's constraints; the sweep skips them.
pub fn default_grid(scheme: Scheme, users: u64, slack: u64) -> Vec<Params> {
    let hi = users.saturating_add(slack);
    let hi128 = u128::from(hi);
    let mut out = Vec::new();
    match scheme {
        Scheme::Mn => out.extend((0..users).map(|t| p(&[("K", users), ("t", t)]))),
        Scheme::Wcwl | Scheme::Mr => out.extend((1..users).map(|t| p(&[("K", users), ("t", t)]))),
        Scheme::Xxgl => out.push(p(&[("K", users)])),
        Scheme::Nhsdp | Scheme::NhsdpConj => {
            let (v, _) = modulus_for_users(users);
            out.extend((1..64u64).take_while(|&n| 1u64 << n <= v).map(|n| p(&[("v", v), ("n", n)])));
        }
        Scheme::Pda => {}
        Scheme::Wclc => {
            for m in 1..=hi {
                for z in 1..=m.min(64) {
                    for k in 2..=hi {
                        if binom_sat(m, z).saturating_mul(pow_sat(k, z)) > hi128 {
                            break;
                        }
                        out.extend((1..k).map(|t| p(&[("m", m), ("z", z), ("k", k), ("t", t)])));
                    }
                }
            }
        }
        Scheme::Ytcc => {
            for h in 2..=hi.saturating_add(1) {
                let mut sizes = Vec::new();
                for a in 1..=h / 2 {
                    if binom_sat(h, a) > hi128 {
                        break;
                    }
                    sizes.push(a);
                    if a != h - a {
                        sizes.push(h - a);
                    }
                }
                for a in sizes {
                    for r in 0..a {
                        for z in r + 1..=(h + r - a).min(h - 1) {
                            out.push(p(&[("H", h), ("a", a), ("z", z), ("r", r)]));
                        }
                    }
                }
            }
        }
        Scheme::Wccls => {
            for q in 2..=hi {
                for m in (1..).take_while(|&m| pow_sat(q, m) <= hi128) {
                    out.extend((1..=m).map(|w| p(&[("q", q), ("m", m), ("w", w)])));
                }
            }
        }
        Scheme::Cksm1 | Scheme::Cksm2 => {
            for q in (2..=hi).filter(|&q| scheme == Scheme::Cksm2 || is_prime_power(q)) {
                for k in (2..).take_while(|&k| qint_sat(k, q) <= hi128) {
                    for t in 1..k {
                        out.extend((1..=k - t).map(|m| p(&[("q", q), ("k", k), ("m", m), ("t", t)])));
                    }
                }
            }
        }
        Scheme::Ask1 => {
            out.extend((2..).take_while(|&q| q * q + q < hi).filter(|&q| is_prime_power(q)).map(|q| p(&[("q", q)])))
        }
        Scheme::Ask2 => out.extend((2..).take_while(|&q| q * q <= hi).map(|q| p(&[("q", q)]))),
        Scheme::Zcw => {
            for m in (2..64).take_while(|&m| 1u64 << m <= hi) {
                out.extend((1..m).map(|w| p(&[("m", m), ("w", w)])));
            }
        }
        Scheme::Ast => {
            for r in (1..64).take_while(|&r| 1u64 << r <= hi) {
                out.extend((1..=hi >> r).map(|k| p(&[("r", r), ("k", k)])));
            }
        }
    }
    out
}

/// Evaluates every grid point in parallel, drops points that violate their
/// scheme's constraints or fall outside `|K' - K| <= slack`, and sorts by
/// memory ratio, then load, then scheme and parameters.
pub fn tradeoff_sweep(users: u64, slack: u64, grids: &[(Scheme, Vec<Params>)]) -> Vec<SchemePoint> {
    let mut points: Vec<SchemePoint> = grids
        .par_iter()
        .flat_map_iter(|(scheme, grid)| grid.iter().map(move |params| (*scheme, params)))
        .filter_map(|(scheme, params)| evaluate_scheme(scheme, params).ok())
        .filter(|point| point.users.abs_diff(users) <= slack)
        .collect();
    points.sort_by(|a, b| {
        a.memory_ratio
            .cmp(&b.memory_ratio)
            .then_with(|| a.load.cmp(&b.load))
            .then_with(|| a.scheme.cmp(&b.scheme))
            .then_with(|| a.params.cmp(&b.params))
    });
    points
}

/// [`tradeoff_sweep`] over [`default_grid`] for each scheme.
pub fn default_sweep(users: u64, slack: u64, schemes: &[Scheme]) -> Vec<SchemePoint> {
    let grids: Vec<_> = schemes.iter().map(|&s| (s, default_grid(s, users, slack))).collect();
    tradeoff_sweep(users, slack, &grids)
}

#[derive(Serialize)]
struct Row {
    scheme: String,
    params: String,
    #[serde(rename = "K")]
    users: u64,
    memory_ratio_num: String,
    memory_ratio_den: String,
    load_num: String,
    load_den: String,
    #[serde(rename = "F")]
    subpacketization: String,
    gain_num: String,
    gain_den: String,
}

fn parts(x: &crate::Rational) -> (String, String) {
    (x.numer().to_string(), x.denom().to_string())
}

impl From<&SchemePoint> for Row {
    fn from(point: &SchemePoint) -> Self {
        let (memory_ratio_num, memory_ratio_den) = parts(&point.memory_ratio);
        let (load_num, load_den) = parts(&point.load);
        let (gain_num, gain_den) = parts(&point.gain);
        Row {
            scheme: point.scheme.to_string(),
            params: point.params_string(),
            users: point.users,
            memory_ratio_num,
            memory_ratio_den,
            load_num,
            load_den,
            subpacketization: BigInt::from(point.subpacketization.clone()).to_string(),
            gain_num,
            gain_den,
        }
    }
}

/// CSV with header
/// `scheme,params,K,memory_ratio_num,memory_ratio_den,load_num,load_den,F,gain_num,gain_den`.
pub fn write_csv<W: Write>(points: &[SchemePoint], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if points.is_empty() {
        writer
            .write_record([
                "scheme",
                "params",
                "K",
                "memory_ratio_num",
                "memory_ratio_den",
                "load_num",
                "load_den",
                "F",
                "gain_num",
                "gain_den",
            ])
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    for point in points {
        writer.serialize(Row::from(point)).map_err(|e| Error::Format(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::Format(e.to_string()))
}

/// The same rows as a JSON array; big integers are strings.
pub fn write_json<W: Write>(points: &[SchemePoint], mut out: W) -> Result<()> {
    let rows: Vec<Row> = points.iter().map(Row::from).collect();
    serde_json::to_writer_pretty(&mut out, &rows).map_err(|e| Error::Format(e.to_string()))?;
    out.write_all(b"\n").map_err(|e| Error::Format(e.to_string()))
}
