use crate::error::{Error, Result};
use crate::math::integer_root;
use crate::{Residue, Ring};

use super::Nhsdp;

/// Block parameters `m_1..m_n` with the derived `f(i)`, `x_i = f(i)/m_i`
/// and `phi = sum f(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockParams {
    pub n: usize,
    pub m: Vec<u64>,
    pub f: Vec<u64>,
    pub x: Vec<u64>,
    pub phi: u64,
}

impl BlockParams {
    pub fn new(m: &[u64]) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::InvalidArgument("block parameters need n >= 1".into()));
        }
        if let Some(i) = m.iter().position(|&mi| mi == 0) {
            return Err(Error::InvalidArgument(format!("m_{} must be positive", i + 1)));
        }
        let overflow = || Error::InvalidArgument(format!("phi({m:?}) overflows u64"));
        let mut f = Vec::with_capacity(m.len());
        let mut x = Vec::with_capacity(m.len());
        let mut phi: u64 = 0;
        for &mi in m {
            let xi = phi.checked_mul(2).and_then(|p| p.checked_add(1)).ok_or_else(overflow)?;
            let fi = mi.checked_mul(xi).ok_or_else(overflow)?;
            phi = phi.checked_add(fi).ok_or_else(overflow)?;
            f.push(fi);
            x.push(xi);
        }
        Ok(Self { n: m.len(), m: m.to_vec(), f, x, phi })
    }

    /// `2 phi + 1`, the smallest modulus the construction accepts.
    pub fn min_modulus(&self) -> u64 {
        2 * self.phi + 1
    }

    /// Number of blocks, `prod m_i`.
    pub fn block_count(&self) -> u64 {
        self.m.iter().product()
    }

    /// Block size `2^n`.
    pub fn block_size(&self) -> usize {
        1 << self.n
    }
}

/// Builds the `(v, 2^n, prod m_i)` NHSDP whose block for
/// `a in [m_1] x ... x [m_n]` is `{ sum alpha_i a_i x_i : alpha_i = +-1 }`.
pub fn construct_nhsdp(v: Residue, m: &[u64]) -> Result<Nhsdp> {
    let ring = Ring::new(v)?;
    let params = BlockParams::new(m)?;
    if v < params.min_modulus() {
        return Err(Error::ModulusTooSmall { v, min: params.min_modulus() });
    }
    if params.n >= 32 {
        return Err(Error::InvalidArgument(format!("block size 2^{} is too large", params.n)));
    }
    let mut blocks = Vec::with_capacity(params.block_count() as usize);
    let mut a = vec![1u64; params.n];
    loop {
        let terms: Vec<u64> = a.iter().zip(&params.x).map(|(ai, xi)| ai * xi).collect();
        let mut block = Vec::with_capacity(params.block_size());
        for signs in 0u64..(1 << params.n) {
            let mut s = 0;
            for (i, &t) in terms.iter().enumerate() {
                let t = ring.reduce(t);
                s = if signs >> i & 1 == 1 { ring.sub(s, t) } else { ring.add(s, t) };
            }
            block.push(s);
        }
        blocks.push(block);
        // odometer over a, last coordinate fastest
        let mut i = params.n;
        loop {
            if i == 0 {
                return Nhsdp::new(v, blocks);
            }
            i -= 1;
            if a[i] < params.m[i] {
                a[i] += 1;
                break;
            }
            a[i] = 1;
        }
    }
}

/// The all-equal choice `m_i = floor((v^(1/n) - 1) / 2)`, using an exact
/// integer root.
pub fn choose_params_closed_form(v: Residue, n: u32) -> Result<Vec<u64>> {
    Ring::new(v)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let r = integer_root(v, n);
    let m = (r - 1) / 2;
    if m == 0 {
        return Err(Error::Infeasible(format!("floor(({v}^(1/{n}) - 1)/2) = 0; need v >= 3^n")));
    }
    Ok(vec![m; n as usize])
}

/// Maximizes `prod m_i` subject to `phi(m) <= (v - 1)/2` by exhaustive
/// search. Among maximizers the lexicographically smallest is returned.
pub fn solve_problem1_exact(v: Residue, n: u32) -> Result<(Vec<u64>, u64)> {
    Ring::new(v)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let budget = (v - 1) / 2;
    let n = n as usize;
    if min_completion(0, n) > budget {
        return Err(Error::Infeasible(format!("phi(1,...,1) = (3^{n} - 1)/2 exceeds (v - 1)/2 = {budget}")));
    }
    let mut best: Option<(Vec<u64>, u64)> = None;
    let mut prefix = Vec::with_capacity(n);
    search(budget, n, 0, 1, &mut prefix, &mut best);
    Ok(best.expect("all-ones sequence is feasible"))
}

/// Smallest phi reachable from partial sum `s` with `remaining` coordinates
/// still to fill (all of them set to 1).
fn min_completion(s: u64, remaining: usize) -> u64 {
    (0..remaining).fold(s, |acc, _| acc.saturating_mul(3).saturating_add(1))
}

fn search(budget: u64, n: usize, s: u64, product: u64, prefix: &mut Vec<u64>, best: &mut Option<(Vec<u64>, u64)>) {
    let x = 2 * s + 1;
    let remaining = n - prefix.len() - 1;
    if remaining == 0 {
        // product grows with the last coordinate, so take the largest one
        let m_last = (budget - s) / x;
        let p = product * m_last;
        if best.as_ref().is_none_or(|(_, bp)| p > *bp) {
            let mut seq = prefix.clone();
            seq.push(m_last);
            *best = Some((seq, p));
        }
        return;
    }
    let mut mi = 1;
    loop {
        let s_next = s + mi * x;
        if min_completion(s_next, remaining) > budget {
            break;
        }
        prefix.push(mi);
        search(budget, n, s_next, product * mi, prefix, best);
        prefix.pop();
        mi += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn product(m: &[u64]) -> u64 {
        m.iter().product()
    }

    #[test]
    fn block_params_examples() {
        let p = BlockParams::new(&[2, 2, 2]).unwrap();
        assert_eq!(p.f, vec![2, 10, 50]);
        assert_eq!(p.x, vec![1, 5, 25]);
        assert_eq!(p.phi, 62);
        assert_eq!(p.min_modulus(), 125);
        assert_eq!(BlockParams::new(&[7]).unwrap().phi, 7);
        assert_eq!(BlockParams::new(&[1, 1, 1]).unwrap().phi, 13);
        assert!(BlockParams::new(&[]).is_err());
        assert!(BlockParams::new(&[1, 0]).is_err());
    }

    #[test]
    fn construct_example_three() {
        let d = construct_nhsdp(125, &[2, 2, 2]).unwrap();
        assert_eq!((d.g(), d.b()), (8, 8));
        let mut expected = vec![31u64, 21, 29, 19, 106, 96, 104, 94];
        expected.sort_unstable();
        assert!(d.blocks().contains(&expected));
    }

    #[test]
    fn construct_small_cases() {
        let d = construct_nhsdp(3, &[1]).unwrap();
        assert_eq!(d.blocks(), &[vec![1, 2]]);
        let d = construct_nhsdp(9, &[1, 1]).unwrap();
        assert_eq!(d.blocks(), &[vec![2, 4, 5, 7]]);
    }

    #[test]
    fn construct_rejects_small_or_even_modulus() {
        assert_eq!(construct_nhsdp(123, &[2, 2, 2]), Err(Error::ModulusTooSmall { v: 123, min: 125 }));
        assert_eq!(construct_nhsdp(126, &[2, 2, 2]), Err(Error::InvalidModulus(126)));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(choose_params_closed_form(125, 3).unwrap(), vec![2, 2, 2]);
        assert_eq!(choose_params_closed_form(33, 3).unwrap(), vec![1, 1, 1]);
        assert_eq!(choose_params_closed_form(49, 2).unwrap(), vec![3, 3]);
        assert_eq!(choose_params_closed_form(2199, 3).unwrap(), vec![6, 6, 6]);
        assert!(matches!(choose_params_closed_form(25, 3), Err(Error::Infeasible(_))));
    }

    #[test]
    fn exact_solver_examples() {
        assert_eq!(solve_problem1_exact(125, 3).unwrap(), (vec![2, 2, 2], 8));
        assert_eq!(solve_problem1_exact(33, 3).unwrap(), (vec![1, 1, 1], 1));
        assert_eq!(solve_problem1_exact(63, 2).unwrap(), (vec![3, 4], 12));
        assert_eq!(solve_problem1_exact(85, 2).unwrap(), (vec![2, 8], 16));
        assert_eq!(solve_problem1_exact(85, 4).unwrap(), (vec![1, 1, 1, 1], 1));
        assert!(matches!(solve_problem1_exact(25, 3), Err(Error::Infeasible(_))));
        for q in [3u64, 5, 7, 9, 11] {
            for n in 1..=3u32 {
                let (m, _) = solve_problem1_exact(q.pow(n), n).unwrap();
                assert_eq!(m, vec![(q - 1) / 2; n as usize], "q={q} n={n}");
            }
        }
    }

    proptest! {
        #[test]
        fn construction_round_trip(
            m in prop::collection::vec(1u64..=3, 1..=3),
            extra in 0u64..25,
        ) {
            let p = BlockParams::new(&m).unwrap();
            let v = p.min_modulus() + 2 * extra;
            let d = construct_nhsdp(v, &m).unwrap();
            prop_assert_eq!(d.b() as u64, product(&m));
            prop_assert_eq!(d.g(), 1 << m.len());
        }

    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn closed_form_is_feasible(v in (1u64..2_000_000).prop_map(|k| 2 * k + 1), n in 1u32..8) {
            if let Ok(m) = choose_params_closed_form(v, n) {
                prop_assert!(BlockParams::new(&m).unwrap().phi <= (v - 1) / 2);
            } else {
                prop_assert!(3u64.checked_pow(n).is_none_or(|p| p > v));
            }
        }

        #[test]
        fn exact_solver_dominates_closed_form(v in (13u64..1500).prop_map(|k| 2 * k + 1), n in 1u32..4) {
            if let Ok(m) = choose_params_closed_form(v, n) {
                let (best, p) = solve_problem1_exact(v, n).unwrap();
                prop_assert!(p >= product(&m));
                prop_assert_eq!(p, product(&best));
                prop_assert!(BlockParams::new(&best).unwrap().phi <= (v - 1) / 2);
            }
        }
    }
}
