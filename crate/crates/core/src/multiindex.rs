//! Strictly increasing multi-indices and their lexicographic ranks.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Registry of leaked, build-once lookup tables keyed by small integers.
pub(crate) type TableRegistry<T> = OnceLock<Mutex<HashMap<(usize, usize, usize), &'static T>>>;

pub(crate) fn cached<T: Send + Sync + 'static>(
    reg: &'static TableRegistry<T>,
    key: (usize, usize, usize),
    build: impl FnOnce() -> T,
) -> &'static T {
    let map = reg.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = map.lock().expect("table registry poisoned").get(&key) {
        return t;
    }
    // Build outside the lock: builders may request other tables.
    let built: &'static T = Box::leak(Box::new(build()));
    map.lock()
        .expect("table registry poisoned")
        .entry(key)
        .or_insert(built)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn build(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, p: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, p, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(n, p));
    rec(n, p, 0, &mut Vec::with_capacity(p), &mut out);
    out
}

/// All increasing `p`-subsets of `0..n` in lexicographic order (cached).
pub fn combos(n: usize, p: usize) -> &'static [Vec<usize>] {
    static REG: OnceLock<Mutex<HashMap<(usize, usize), &'static [Vec<usize>]>>> = OnceLock::new();
    let reg = REG.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = reg.lock().expect("combination registry poisoned");
    map.entry((n, p))
        .or_insert_with(|| Box::leak(build(n, p).into_boxed_slice()))
}

/// Lexicographic rank of a strictly increasing index set.
pub fn rank(n: usize, idx: &[usize]) -> usize {
    let p = idx.len();
    let mut r = 0;
    let mut prev = 0;
    for (a, &i) in idx.iter().enumerate() {
        for j in prev..i {
            r += binomial(n - j - 1, p - a - 1);
        }
        prev = i + 1;
    }
    r
}

/// Sorts `idx` in place, returning the permutation sign, or `None` on a repeat.
pub fn sort_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && idx[j - 1] == idx[j] {
            return None;
        }
    }
    for w in idx.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some(sign)
}

/// Rank and sign of the sorted version of an arbitrary index list.
pub fn signed_rank(n: usize, idx: &[usize]) -> Option<(usize, f64)> {
    let mut v = idx.to_vec();
    let s = sort_sign(&mut v)?;
    Some((rank(n, &v), s))
}
