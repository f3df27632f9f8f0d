//! Fisher's exact test, the Mann–Whitney U test, and small descriptive helpers.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// Relative tolerance when comparing point probabilities of tables.
pub const FISHER_TIE_SLACK: f64 = 1e-12;

/// Samples with at most this many pooled observations get an exact p-value.
pub const MWU_EXACT_MAX_TOTAL: usize = 16;

/// 2×2 table; rows are the two groups, columns attribute present / absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contingency2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Contingency2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        if a + b == 0 || c + d == 0 {
            return Err(Error::InvalidInput(format!(
                "contingency table [[{a},{b}],[{c},{d}]] has an empty row"
            )));
        }
        Ok(Contingency2x2 { a, b, c, d })
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// `(a·d)/(b·c)`: +∞ when only the denominator vanishes, NaN when both do.
    pub fn odds_ratio(&self) -> f64 {
        let num = self.a as f64 * self.d as f64;
        let den = self.b as f64 * self.c as f64;
        if den == 0.0 {
            if num > 0.0 {
                f64::INFINITY
            } else {
                f64::NAN
            }
        } else {
            num / den
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_two_sided: f64,
    /// Odds ratio (Fisher) or rank-biserial correlation (Mann–Whitney).
    pub effect: f64,
    pub significant: bool,
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Two-sided Fisher exact test: sums the hypergeometric probabilities of all
/// same-margin tables no more likely than the observed one.
pub fn fisher_exact(t: Contingency2x2, alpha: f64) -> Result<TestResult> {
    if t.a + t.b == 0 || t.c + t.d == 0 {
        return Err(Error::InvalidInput("contingency table has an empty row".into()));
    }
    let r1 = t.a + t.b;
    let r2 = t.c + t.d;
    let c1 = t.a + t.c;
    let n = r1 + r2;
    let ln_den = ln_choose(n, c1);
    let point = |x: u64| (ln_choose(r1, x) + ln_choose(r2, c1 - x) - ln_den).exp();
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let p_obs = point(t.a);
    let cutoff = p_obs * (1.0 + FISHER_TIE_SLACK);
    let p: f64 = (lo..=hi).map(point).filter(|&p| p <= cutoff).sum();
    let p = p.min(1.0);
    let or = t.odds_ratio();
    Ok(TestResult { statistic: or, p_two_sided: p, effect: or, significant: p < alpha })
}

/// Midranks (1-based) of the pooled sample, doubled so they stay integral.
fn doubled_midranks(pooled: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // positions i..=j share the midrank ((i+1)+(j+1))/2
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        i = j + 1;
    }
    ranks
}

/// Mann–Whitney U for `xs` against `ys`; U counts pairs with x > y plus half the ties.
pub fn mann_whitney_u(xs: &[f64], ys: &[f64], alpha: f64) -> Result<TestResult> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidInput("Mann-Whitney U needs two non-empty samples".into()));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("Mann-Whitney U sample contains NaN".into()));
    }
    let n1 = xs.len() as u64;
    let n2 = ys.len() as u64;
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let r1: u64 = ranks[..xs.len()].iter().sum();
    // 2U = 2R1 - n1(n1+1)
    let u2 = r1 - n1 * (n1 + 1);
    let u = u2 as f64 / 2.0;
    let p = if pooled.len() <= MWU_EXACT_MAX_TOTAL {
        exact_mwu_p(&ranks, xs.len(), u2)
    } else {
        normal_mwu_p(&pooled, n1, n2, u)
    };
    let effect = 2.0 * u / (n1 * n2) as f64 - 1.0;
    Ok(TestResult { statistic: u, p_two_sided: p, effect, significant: p < alpha })
}

/// Exact two-sided p: share of equally likely group assignments whose U is
/// at least as far from n1·n2/2 as the observed one.
fn exact_mwu_p(ranks: &[u64], n1: usize, u2_obs: u64) -> f64 {
    let n1u = n1 as u64;
    let n2u = (ranks.len() - n1) as u64;
    let max_sum: u64 = ranks.iter().sum();
    let width = max_sum as usize + 1;
    // ways[k][s]: subsets of size k with doubled-rank sum s
    let mut ways = vec![vec![0u64; width]; n1 + 1];
    ways[0][0] = 1;
    for &r in ranks {
        let r = r as usize;
        for k in (1..=n1).rev() {
            let (lower, upper) = ways.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for s in (r..width).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let center = (n1u * n2u) as i64;
    let obs_dev = (u2_obs as i64 - center).abs();
    let offset = n1u * (n1u + 1);
    let mut extreme = 0u64;
    let mut total = 0u64;
    for (s, &count) in ways[n1].iter().enumerate() {
        if count == 0 {
            continue;
        }
        total += count;
        let u2 = s as i64 - offset as i64;
        if (u2 - center).abs() >= obs_dev {
            extreme += count;
        }
    }
    extreme as f64 / total as f64
}

fn normal_mwu_p(pooled: &[f64], n1: u64, n2: u64, u: f64) -> f64 {
    let n = (n1 + n2) as f64;
    let mut sorted = pooled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let nn = (n1 * n2) as f64;
    let var = nn / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u - nn / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

/// Complementary CDF points: each distinct value with the share of values ≥ it.
pub fn ccdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        out.push((v[i], (v.len() - i) as f64 / n));
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    /// Exact rational enumeration over all same-margin tables.
    fn fisher_oracle(a: u64, b: u64, c: u64, d: u64) -> f64 {
        fn choose(n: u64, k: u64) -> u128 {
            (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
        }
        let (r1, r2, c1) = (a + b, c + d, a + c);
        let num = |x: u64| choose(r1, x) * choose(r2, c1 - x);
        let obs = num(a);
        let den = choose(r1 + r2, c1);
        let lo = c1.saturating_sub(r2);
        let extreme: u128 = (lo..=r1.min(c1)).map(num).filter(|&v| v <= obs).sum();
        extreme as f64 / den as f64
    }

    /// Direct pair counting over every split of the pooled sample.
    fn mwu_oracle(xs: &[f64], ys: &[f64]) -> f64 {
        let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
        let n1 = xs.len();
        let u2 = |sel: &[usize]| -> i64 {
            let mut s = 0i64;
            for (i, &p) in pooled.iter().enumerate() {
                if !sel.contains(&i) {
                    continue;
                }
                for (j, &q) in pooled.iter().enumerate() {
                    if sel.contains(&j) {
                        continue;
                    }
                    s += if p > q { 2 } else if p == q { 1 } else { 0 };
                }
            }
            s
        };
        let center = (xs.len() * ys.len()) as i64;
        let obs = (u2(&(0..n1).collect::<Vec<_>>()) - center).abs();
        let (mut hit, mut tot) = (0u64, 0u64);
        let n = pooled.len();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n1 {
                continue;
            }
            let sel: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            tot += 1;
            if (u2(&sel) - center).abs() >= obs {
                hit += 1;
            }
        }
        hit as f64 / tot as f64
    }

    fn fisher(a: u64, b: u64, c: u64, d: u64) -> TestResult {
        fisher_exact(Contingency2x2::new(a, b, c, d).unwrap(), 0.05).unwrap()
    }

    #[test]
    fn fisher_examples() {
        let r = fisher(6, 94, 16, 84);
        assert!((r.effect - 0.335).abs() < 0.005);
        assert!((r.p_two_sided - 0.04).abs() < 0.01);
        assert!(r.significant);
        let r = fisher(5, 5, 5, 5);
        assert_eq!(r.effect, 1.0);
        assert!((r.p_two_sided - 1.0).abs() < 1e-12);
        let r = fisher(3, 0, 0, 3);
        assert_eq!(r.effect, f64::INFINITY);
        assert!((r.p_two_sided - 0.1).abs() < 1e-12);
        assert!(fisher(0, 3, 0, 3).effect.is_nan());
        assert!(Contingency2x2::new(0, 0, 0, 0).is_err());
        assert!(Contingency2x2::new(0, 0, 1, 1).is_err());
    }

    #[test]
    fn fisher_matches_oracle_small_tables() {
        for n in 1..=12u64 {
            for a in 0..=n {
                for b in 0..=n - a {
                    for c in 0..=n - a - b {
                        let d = n - a - b - c;
                        if a + b == 0 || c + d == 0 {
                            continue;
                        }
                        let p = fisher(a, b, c, d).p_two_sided;
                        assert!((p - fisher_oracle(a, b, c, d)).abs() < 1e-9, "{a} {b} {c} {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn fisher_large_margins_stay_finite() {
        let r = fisher(120_000, 880_000, 100_000, 900_000);
        assert!(r.p_two_sided < 1e-10 && r.p_two_sided >= 0.0);
    }

    #[test]
    fn mwu_examples() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0], 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_two_sided - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.effect, -1.0);
        let r = mann_whitney_u(&[1.0, 4.0], &[2.0, 3.0], 0.05).unwrap();
        assert_eq!(r.statistic, 2.0);
        assert!((r.p_two_sided - 1.0).abs() < 1e-12);
        let same = [3.0, 1.0, 2.0, 5.0];
        assert!(mann_whitney_u(&same, &same, 0.05).unwrap().p_two_sided >= 0.99);
        assert!(mann_whitney_u(&[], &[1.0], 0.05).is_err());
    }

    #[test]
    fn mwu_exact_matches_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let n1 = rng.gen_range(1..=6);
            let n2 = rng.gen_range(1..=6);
            // coarse values force ties
            let xs: Vec<f64> = (0..n1).map(|_| rng.gen_range(0..5) as f64).collect();
            let ys: Vec<f64> = (0..n2).map(|_| rng.gen_range(0..5) as f64 * 0.9).collect();
            let p = mann_whitney_u(&xs, &ys, 0.05).unwrap().p_two_sided;
            assert!((p - mwu_oracle(&xs, &ys)).abs() < 1e-9, "{xs:?} {ys:?}");
        }
    }

    #[test]
    fn mwu_normal_approximation() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let ys: Vec<f64> = (0..30).map(|i| i as f64 + 100.0).collect();
        let r = mann_whitney_u(&xs, &ys, 0.001).unwrap();
        assert!(r.p_two_sided < 1e-9 && r.significant);
        let r = mann_whitney_u(&xs, &xs, 0.05).unwrap();
        assert!(r.p_two_sided > 0.99);
        let r = mann_whitney_u(&[1.0; 20], &[1.0; 20], 0.05).unwrap();
        assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn mwu_more_extreme_never_raises_p() {
        let ys = [1.0, 2.0, 3.0, 4.0];
        let mut xs = vec![5.0, 6.0];
        let mut last = mann_whitney_u(&xs, &ys, 0.05).unwrap().p_two_sided;
        for v in [7.0, 8.0, 9.0, 10.0] {
            xs.push(v);
            let p = mann_whitney_u(&xs, &ys, 0.05).unwrap().p_two_sided;
            assert!(p <= last + 1e-15);
            last = p;
        }
    }

    #[test]
    fn descriptive_helpers() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
        assert_eq!(ccdf(&[1.0, 1.0, 2.0, 3.0]), vec![(1.0, 1.0), (2.0, 0.5), (3.0, 0.25)]);
    }

    proptest! {
        #[test]
        fn fisher_swap_symmetries(a in 0u64..15, b in 0u64..15, c in 0u64..15, d in 0u64..15) {
            prop_assume!(a + b > 0 && c + d > 0 && a + c > 0 && b + d > 0);
            let base = fisher(a, b, c, d);
            let both = fisher(d, c, b, a);
            prop_assert!((base.p_two_sided - both.p_two_sided).abs() < 1e-12);
            let rows = fisher(c, d, a, b);
            prop_assert!((base.p_two_sided - rows.p_two_sided).abs() < 1e-12);
            if base.effect.is_finite() && base.effect > 0.0 {
                prop_assert!((rows.effect - 1.0 / base.effect).abs() < 1e-9 * (1.0 + rows.effect));
            }
        }

        #[test]
        fn mwu_u_complement(xs in proptest::collection::vec(-1e3f64..1e3, 1..10),
                            ys in proptest::collection::vec(-1e3f64..1e3, 1..10)) {
            let pooled: std::collections::HashSet<u64> = xs.iter().chain(&ys).map(|v| v.to_bits()).collect();
            prop_assume!(pooled.len() == xs.len() + ys.len());
            let u = mann_whitney_u(&xs, &ys, 0.05).unwrap().statistic;
            let v = mann_whitney_u(&ys, &xs, 0.05).unwrap().statistic;
            prop_assert_eq!(u + v, (xs.len() * ys.len()) as f64);
        }
    }
}
