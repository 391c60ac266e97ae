use std::fmt;

use crate::error::{LabError, Result};

use super::ExpandingMap;

/// An admissible finite sequence of branch indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    symbols: Vec<u8>,
}

impl Word {
    /// Checks admissibility against the map's adjacency.
    pub fn new(map: &ExpandingMap, symbols: Vec<u8>) -> Result<Word> {
        if symbols.is_empty() {
            return Err(LabError::BadSpec("empty word".into()));
        }
        let k = map.branch_count();
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= k) {
            return Err(LabError::BadSpec(format!("symbol {s} out of range for {k} branches")));
        }
        if let Some(w) = symbols.windows(2).find(|w| !map.allowed(w[0] as usize, w[1] as usize)) {
            return Err(LabError::NonMarkov(format!("transition {} -> {} not allowed", w[0], w[1])));
        }
        Ok(Word { symbols })
    }

    pub(crate) fn from_symbols_unchecked(symbols: Vec<u8>) -> Word {
        Word { symbols }
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Whether the word closes up into a periodic orbit.
    pub fn is_cyclically_admissible(&self, map: &ExpandingMap) -> bool {
        let s = &self.symbols;
        map.allowed(s[s.len() - 1] as usize, s[0] as usize)
    }

    /// The word repeated `times` times.
    pub fn repeat(&self, times: usize) -> Word {
        Word { symbols: self.symbols.repeat(times) }
    }

    /// The word extended to `len` by repeating its last symbol; callers must
    /// make sure the last symbol may follow itself.
    pub fn pad_last(&self, len: usize) -> Word {
        let mut symbols = self.symbols.clone();
        let last = *symbols.last().expect("non-empty word");
        symbols.resize(len.max(symbols.len()), last);
        Word { symbols }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Number of admissible words of length `n`, saturating at `usize::MAX`.
pub fn count_admissible_words(map: &ExpandingMap, n: usize) -> usize {
    let k = map.branch_count();
    let mut ends = vec![1usize; k];
    for _ in 1..n {
        let mut next = vec![0usize; k];
        for (a, &c) in ends.iter().enumerate() {
            for (b, v) in next.iter_mut().enumerate() {
                if map.allowed(a, b) {
                    *v = v.saturating_add(c);
                }
            }
        }
        ends = next;
    }
    ends.iter().fold(0usize, |acc, &c| acc.saturating_add(c))
}

/// All admissible words of length `n` in lexicographic order.
pub fn admissible_words(map: &ExpandingMap, n: usize) -> Vec<Word> {
    assert!(n >= 1);
    let k = map.branch_count();
    let mut out = Vec::new();
    let mut stack: Vec<u8> = Vec::with_capacity(n);
    fn rec(map: &ExpandingMap, k: usize, n: usize, stack: &mut Vec<u8>, out: &mut Vec<Word>) {
        if stack.len() == n {
            out.push(Word { symbols: stack.clone() });
            return;
        }
        for b in 0..k {
            if stack.last().is_none_or(|&a| map.allowed(a as usize, b)) {
                stack.push(b as u8);
                rec(map, k, n, stack, out);
                stack.pop();
            }
        }
    }
    rec(map, k, n, &mut stack, &mut out);
    out
}

/// Lyndon words over `alphabet` letters of every length `1..=max_len`
/// (Fredricksen–Kessler–Maiorana). Each periodic orbit of minimal period
/// `p ≤ max_len` of the full shift corresponds to exactly one of them.
pub fn lyndon_words(alphabet: usize, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if alphabet == 0 || max_len == 0 {
        return out;
    }
    let mut w: Vec<usize> = vec![0];
    loop {
        out.push(w.iter().map(|&s| s as u8).collect());
        let m = w.len();
        while w.len() < max_len {
            let c = w[w.len() - m];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last == alphabet - 1 {
                w.pop();
            } else {
                break;
            }
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out
}

/// One word per periodic orbit of minimal period `≤ max_period`: the
/// cyclically admissible Lyndon words.
pub fn periodic_words(map: &ExpandingMap, max_period: usize) -> Vec<Word> {
    lyndon_words(map.branch_count(), max_period)
        .into_iter()
        .filter(|s| {
            s.windows(2).all(|w| map.allowed(w[0] as usize, w[1] as usize))
                && map.allowed(s[s.len() - 1] as usize, s[0] as usize)
        })
        .map(Word::from_symbols_unchecked)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_markov_map;

    #[test]
    fn fibonacci_counts() {
        let g = build_markov_map("golden").unwrap();
        // oracle: sum of the entries of A^{n-1}
        let mut a = [[1u64, 1], [1, 0]];
        let mul = |x: [[u64; 2]; 2], y: [[u64; 2]; 2]| {
            let mut z = [[0u64; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    z[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
                }
            }
            z
        };
        for _ in 0..3 {
            a = mul(a, [[1, 1], [1, 0]]);
        }
        let oracle: u64 = a.iter().flatten().sum();
        assert_eq!(oracle, 13);
        assert_eq!(count_admissible_words(&g, 5), 13);
        assert_eq!(admissible_words(&g, 5).len(), 13);
    }

    #[test]
    fn lyndon_counts_match_necklace_formula() {
        // binary Lyndon words: 2, 1, 2, 3, 6, 9 of lengths 1..6
        let words = lyndon_words(2, 6);
        let mut by_len = [0usize; 7];
        for w in &words {
            by_len[w.len()] += 1;
        }
        assert_eq!(&by_len[1..], &[2, 1, 2, 3, 6, 9]);
        // points of period dividing n are 2^n
        for n in 1..=6 {
            let pts: usize = (1..=n).filter(|d| n % d == 0).map(|d| d * by_len[d]).sum();
            assert_eq!(pts, 1 << n);
        }
    }

    #[test]
    fn inadmissible_words_are_rejected() {
        let g = build_markov_map("golden").unwrap();
        assert!(Word::new(&g, vec![0, 1, 1]).is_err());
        assert!(Word::new(&g, vec![0, 1, 0]).is_ok());
        assert!(Word::new(&g, vec![2]).is_err());
        assert!(!periodic_words(&g, 4).iter().any(|w| w.symbols() == [1]));
    }
}
