//! Small exact-ish counting helpers shared by the polynomial and scheme modules.

/// Binomial coefficient as an exact integer. Panics on overflow, which cannot
/// happen for the sizes used in this crate (n ≤ 64).
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    u64::try_from(acc).expect("binomial overflow")
}

/// Trinomial coefficient N! / (i! j! (N-i-j)!). Zero outside the triangle.
pub fn multinomial(n: u64, i: u64, j: u64) -> u64 {
    if i + j > n {
        return 0;
    }
    binomial(n, i) * binomial(n - i, j)
}

/// Rising factorial (a)_k = a (a+1) ... (a+k-1), accumulated term by term.
/// A zero factor short-circuits so terminating hypergeometric sums never see 0 * inf.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        let factor = a + i as f64;
        if factor == 0.0 {
            return 0.0;
        }
        acc *= factor;
    }
    acc
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Every point (i, j) with i + j ≤ n, ordered by i then j.
pub fn triangle_points(n: usize) -> Vec<(usize, usize)> {
    let mut pts = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for i in 0..=n {
        for j in 0..=(n - i) {
            pts.push((i, j));
        }
    }
    pts
}

/// Position of (i, j) in the ordering produced by [`triangle_points`].
pub fn triangle_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i + j <= n);
    // rows 0..i contribute (n+1) + n + ... + (n-i+2) points
    i * (n + 1) - i * (i.saturating_sub(1)) / 2 + j
}
