/// Unit-cost edit distance.
///
/// Banded DP: the band half-width starts at the length difference and
/// doubles until the distance found fits inside it, at which point it is
/// exact. Cost is O(n·d) for distance d.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if a.is_empty() {
        return b.len();
    }
    let mut band = (b.len() - a.len()).max(1);
    loop {
        if let Some(d) = banded(a, b, band) {
            return d;
        }
        band *= 2;
    }
}

/// Distance if it is at most `band`, computed over cells with |i - j| <= band.
fn banded<T: PartialEq>(a: &[T], b: &[T], band: usize) -> Option<usize> {
    let (n, m) = (a.len(), b.len());
    let inf = usize::MAX / 2;
    let mut prev = vec![inf; m + 1];
    let mut cur = vec![inf; m + 1];
    for (j, cell) in prev.iter_mut().enumerate().take(band.min(m) + 1) {
        *cell = j;
    }
    for i in 1..=n {
        let lo = i.saturating_sub(band);
        let hi = (i + band).min(m);
        cur.fill(inf);
        if lo == 0 {
            cur[0] = i;
        }
        for j in lo.max(1)..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[m];
    (d <= band).then_some(d)
}

/// Edit distance over `max(|a|, |b|)`; two empty sequences are at distance 0.
pub fn normalized_levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let len = a.len().max(b.len());
    if len == 0 {
        return 0.0;
    }
    levenshtein(a, b) as f64 / len as f64
}

/// [`normalized_levenshtein`] on inputs truncated to `cap` symbols. The
/// flag reports whether truncation happened.
pub fn normalized_levenshtein_capped<T: PartialEq>(a: &[T], b: &[T], cap: usize) -> (f64, bool) {
    let truncated = a.len() > cap || b.len() > cap;
    let a = &a[..a.len().min(cap)];
    let b = &b[..b.len().min(cap)];
    (normalized_levenshtein(a, b), truncated)
}
