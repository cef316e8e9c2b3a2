//! Precomputed index tables for the exterior algebra on `ℝⁿ`.

use crate::multiindex::{cached, combos, rank, TableRegistry};

/// `(a, b, out, sign)`: `(α∧β)_out += sign · α_a β_b`.
pub(crate) fn wedge(n: usize, p: usize, q: usize) -> &'static [(u32, u32, u32, f64)] {
    static REG: TableRegistry<Vec<(u32, u32, u32, f64)>> = TableRegistry::new();
    let t: &'static Vec<_> = cached(&REG, (n, p, q), || {
        let mut t = Vec::new();
        if p + q > n {
            return t;
        }
        for (ia, a) in combos(n, p).iter().enumerate() {
            for (ib, b) in combos(n, q).iter().enumerate() {
                if a.iter().any(|i| b.contains(i)) {
                    continue;
                }
                // sign of the shuffle that sorts a ++ b
                let inversions: usize = a
                    .iter()
                    .map(|&i| b.iter().filter(|&&j| j < i).count())
                    .sum();
                let mut k: Vec<usize> = a.iter().chain(b).copied().collect();
                k.sort_unstable();
                let sign = if inversions.is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                t.push((ia as u32, ib as u32, rank(n, &k) as u32, sign));
            }
        }
        t
    });
    t
}

/// `(j, src, dst, sign)`: `(v⌟α)_dst += sign · v^j α_src` for `α` of degree `p ≥ 1`.
pub(crate) fn interior(n: usize, p: usize) -> &'static [(u32, u32, u32, f64)] {
    static REG: TableRegistry<Vec<(u32, u32, u32, f64)>> = TableRegistry::new();
    let t: &'static Vec<_> = cached(&REG, (n, p, 0), || {
        let mut t = Vec::new();
        if p == 0 {
            return t;
        }
        for (isrc, src) in combos(n, p).iter().enumerate() {
            for (pos, &j) in src.iter().enumerate() {
                let mut rest = src.clone();
                rest.remove(pos);
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                t.push((j as u32, isrc as u32, rank(n, &rest) as u32, sign));
            }
        }
        t
    });
    t
}

/// `(dst, k, m, src, sign)` for the derivation extension of an endomorphism
/// `E^m_k` of 1-forms: `(E·ψ)_dst -= sign · E^m_k ψ_src`, where `src` is `dst`
/// with its entry `k` replaced by `m`.
pub(crate) fn derivation(n: usize, p: usize) -> &'static [(u32, u32, u32, u32, f64)] {
    static REG: TableRegistry<Vec<(u32, u32, u32, u32, f64)>> = TableRegistry::new();
    let t: &'static Vec<_> = cached(&REG, (n, p, 0), || {
        let mut t = Vec::new();
        for (idst, dst) in combos(n, p).iter().enumerate() {
            for (pos, &k) in dst.iter().enumerate() {
                for m in 0..n {
                    if m != k && dst.contains(&m) {
                        continue;
                    }
                    let mut src = dst.clone();
                    src[pos] = m;
                    let mut sign = 1.0;
                    // bubble the replaced entry into place
                    let mut i = pos;
                    while i > 0 && src[i - 1] > src[i] {
                        src.swap(i - 1, i);
                        sign = -sign;
                        i -= 1;
                    }
                    while i + 1 < p && src[i] > src[i + 1] {
                        src.swap(i, i + 1);
                        sign = -sign;
                        i += 1;
                    }
                    t.push((idst as u32, k as u32, m as u32, rank(n, &src) as u32, sign));
                }
            }
        }
        t
    });
    t
}

/// `(complement, ε(I, K))` for every increasing `I` of length `p`.
pub(crate) fn complement(n: usize, p: usize) -> &'static [(u32, f64)] {
    static REG: TableRegistry<Vec<(u32, f64)>> = TableRegistry::new();
    let t: &'static Vec<_> = cached(&REG, (n, p, 0), || {
        combos(n, p)
            .iter()
            .map(|i| {
                let k: Vec<usize> = (0..n).filter(|x| !i.contains(x)).collect();
                let inversions: usize = i
                    .iter()
                    .map(|&a| k.iter().filter(|&&b| b < a).count())
                    .sum();
                let sign = if inversions.is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                (rank(n, &k) as u32, sign)
            })
            .collect()
    });
    t
}

/// Laplace-expansion plan for `q × q` minors of an `nr × nc` matrix: for each
/// `(I, J)` pair at level `q` (indexed `rank(I) * C(nc, q) + rank(J)`), the terms
/// `(i0, j_b, sub_pair, sign)` with `sub_pair` indexing level `q-1`.
pub(crate) fn minor_plan(nr: usize, nc: usize, q: usize) -> &'static [Vec<(u32, u32, u32, f64)>] {
    static REG: TableRegistry<Vec<Vec<(u32, u32, u32, f64)>>> = TableRegistry::new();
    let t: &'static Vec<_> = cached(&REG, (nr, nc, q), || {
        let rows = combos(nr, q);
        let cols = combos(nc, q);
        let nsub = combos(nc, q.saturating_sub(1)).len();
        let mut plan = Vec::with_capacity(rows.len() * cols.len());
        for i in rows {
            for j in cols {
                let mut terms = Vec::with_capacity(q);
                let i0 = i[0];
                let isub = rank(nr, &i[1..]);
                for (b, &jb) in j.iter().enumerate() {
                    let mut jsub = j.clone();
                    jsub.remove(b);
                    let sign = if b % 2 == 0 { 1.0 } else { -1.0 };
                    let sub = isub * nsub + rank(nc, &jsub);
                    terms.push((i0 as u32, jb as u32, sub as u32, sign));
                }
                plan.push(terms);
            }
        }
        plan
    });
    t
}
