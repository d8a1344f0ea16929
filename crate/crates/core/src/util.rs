//! Small shared helpers: mixed-radix tuple iteration and seeded RNGs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream from a base seed and a label.
pub fn sub_seed(seed: u64, label: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn product(sizes: &[usize]) -> u128 {
    sizes.iter().map(|&s| s as u128).product()
}

/// Visits every tuple of `[0,s_0) x ... x [0,s_{k-1})`, last index fastest.
/// Stops early when `f` returns `false`; the return value says whether the
/// walk completed.
pub fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[usize]) -> bool) -> bool {
    if sizes.contains(&0) {
        return true;
    }
    let k = sizes.len();
    let mut cur = vec![0usize; k];
    loop {
        if !f(&cur) {
            return false;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < sizes[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// All `u`-subsets of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, u: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    if u > n {
        return true;
    }
    let mut idx: Vec<usize> = (0..u).collect();
    loop {
        if !f(&idx) {
            return false;
        }
        let mut i = u;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if idx[i] < n - u + i {
                idx[i] += 1;
                for j in i + 1..u {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
