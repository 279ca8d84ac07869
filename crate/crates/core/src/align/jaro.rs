use crate::scalar::Real;

const PREFIX_SCALE: f64 = 0.1;
const MAX_PREFIX: usize = 4;

/// Jaro similarity over chars.
///
/// Inputs are ordered by (length, content) first so the greedy match is the
/// same whichever argument comes first.
pub fn jaro<T: Real>(a: &str, b: &str) -> T {
    let (a, b) = if (a.len(), a) <= (b.len(), b) { (a, b) } else { (b, a) };
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return T::one();
    }
    if a.is_empty() || b.is_empty() {
        return T::zero();
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut a_hit = vec![false; a.len()];
    let mut b_hit = vec![false; b.len()];
    let mut matches = 0usize;
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_hit[j] && b[j] == *ca {
                a_hit[i] = true;
                b_hit[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return T::zero();
    }
    let mut half_transpositions = 0usize;
    let mut bs = b.iter().zip(&b_hit).filter(|(_, h)| **h).map(|(c, _)| c);
    for (ca, _) in a.iter().zip(&a_hit).filter(|(_, h)| **h) {
        if bs.next() != Some(ca) {
            half_transpositions += 1;
        }
    }
    let m = T::count(matches);
    let t = T::count(half_transpositions / 2);
    (m / T::count(a.len()) + m / T::count(b.len()) + (m - t) / m) / T::lit(3.0)
}

/// Jaro-Winkler with prefix scale 0.1 over at most four leading chars.
pub fn jaro_winkler<T: Real>(a: &str, b: &str) -> T {
    let j: T = jaro(a, b);
    let prefix = a
        .chars()
        .zip(b.chars())
        .take(MAX_PREFIX)
        .take_while(|(x, y)| x == y)
        .count();
    j + T::count(prefix) * T::lit(PREFIX_SCALE) * (T::one() - j)
}
