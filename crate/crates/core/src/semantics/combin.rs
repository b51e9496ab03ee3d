use num_bigint::BigUint;
use num_traits::One;

/// `n!` for every `n <= max`.
pub fn factorials(max: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(BigUint::one());
    for i in 1..=max {
        let next = &out[i - 1] * BigUint::from(i);
        out.push(next);
    }
    out
}

/// `n! / (k_1! ... k_m!)`; the parts must sum to `n`.
pub fn multinomial(parts: &[usize], fact: &[BigUint]) -> BigUint {
    let n: usize = parts.iter().sum();
    let mut out = fact[n].clone();
    for &p in parts {
        out /= &fact[p];
    }
    out
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut out = BigUint::one();
    for i in 0..k {
        out = out * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    out
}

/// `n (n-1) ... (n-k+1)`, zero when `k > n`.
pub fn falling_factorial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i))
}

pub fn pow(base: usize, exp: usize) -> BigUint {
    num_traits::pow(BigUint::from(base), exp)
}

/// Number of ways to write `n` as an ordered sum of `parts` nonnegative integers.
pub fn composition_count(n: usize, parts: usize) -> BigUint {
    if parts == 0 {
        return if n == 0 { BigUint::one() } else { BigUint::default() };
    }
    binomial(n + parts - 1, parts - 1)
}

/// All ordered ways to write `n` as a sum of `parts` nonnegative integers, in
/// lexicographic order.
pub fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if parts == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0; parts];
    fn go(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            go(i + 1, left - v, cur, out);
        }
    }
    go(0, n, &mut cur, &mut out);
    out
}

/// Set partitions of `0..m` as restricted growth strings: entry `i` is the
/// block of element `i`, and blocks are numbered in order of first use.
pub fn set_partitions(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn go(m: usize, blocks: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for b in 0..=blocks {
            cur.push(b);
            go(m, blocks.max(b + 1), cur, out);
            cur.pop();
        }
    }
    go(m, 0, &mut cur, &mut out);
    out
}
