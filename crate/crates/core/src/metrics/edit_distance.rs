//! Levenshtein distance over Unicode scalar values.
//!
//! Unit-cost substitution, insertion and deletion only; transposition of
//! adjacent characters costs 2. The capped variant evaluates only the
//! diagonal band `|i - j| <= cap` and stops as soon as a whole row exceeds
//! the cap.

use std::mem;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("edit distance exceeds cap {cap}")]
pub struct ExceedsCap {
    pub cap: usize,
}

/// Distance between `a` and `b`; with `cap`, `Err(ExceedsCap)` whenever the
/// distance is larger than the cap.
pub fn edit_distance(a: &str, b: &str, cap: Option<usize>) -> Result<usize, ExceedsCap> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    match cap {
        None => Ok(levenshtein(&a, &b)),
        Some(cap) => levenshtein_capped(&a, &b, cap).ok_or(ExceedsCap { cap }),
    }
}

fn trim_common<'a>(mut a: &'a [char], mut b: &'a [char]) -> (&'a [char], &'a [char]) {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    a = &a[prefix..];
    b = &b[prefix..];
    let suffix = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    (&a[..a.len() - suffix], &b[..b.len() - suffix])
}

pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    let (a, b) = trim_common(a, b);
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, &lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = (diag + usize::from(lc != sc)).min(up + 1).min(row[j] + 1);
            diag = up;
        }
    }
    row[short.len()]
}

/// Exact distance if it is at most `cap`, otherwise `None`.
pub fn levenshtein_capped(a: &[char], b: &[char], cap: usize) -> Option<usize> {
    let (a, b) = trim_common(a, b);
    let (n, m) = (a.len(), b.len());
    if n.abs_diff(m) > cap {
        return None;
    }
    if n == 0 || m == 0 {
        return Some(n.max(m));
    }
    // every stored value is min(true distance, cap + 1)
    let over = cap + 1;
    let mut prev: Vec<usize> = (0..=m).map(|j| j.min(over)).collect();
    let mut cur = vec![over; m + 1];
    for i in 1..=n {
        let lo = i.saturating_sub(cap).max(1);
        let hi = (i + cap).min(m);
        cur[lo - 1] = if lo == 1 { i.min(over) } else { over };
        let mut row_min = cur[lo - 1];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1).min(over);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < m {
            cur[hi + 1] = over;
        }
        if row_min > cap {
            return None;
        }
        mem::swap(&mut prev, &mut cur);
    }
    (prev[m] <= cap).then_some(prev[m])
}
