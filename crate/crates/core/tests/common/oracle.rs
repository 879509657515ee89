//! Literal transcriptions of the feature formulas, written for clarity
//! rather than speed. Shared by the core property tests and the acceptance
//! suite; nothing here calls into the library.

#![allow(dead_code, clippy::needless_range_loop, clippy::manual_div_ceil, clippy::manual_is_multiple_of)]

/// Strict interior maxima by direct index arithmetic.
pub fn detect_peaks(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    if x.len() < 3 {
        return out;
    }
    let mut k = 1;
    while k + 1 < x.len() {
        if x[k - 1] < x[k] && x[k] > x[k + 1] {
            out.push(k);
        }
        k += 1;
    }
    out
}

fn subsets(n: usize, q: usize) -> Vec<Vec<usize>> {
    if q == 0 {
        return vec![vec![]];
    }
    if n < q {
        return vec![];
    }
    let mut with_last: Vec<Vec<usize>> = subsets(n - 1, q - 1);
    for s in &mut with_last {
        s.push(n - 1);
    }
    let mut out = subsets(n - 1, q);
    out.extend(with_last);
    out
}

/// Amplitudes in descending order, then bins ascending.
type Key = (Vec<f64>, Vec<usize>);

/// Brute force over every q-subset of the peaks: keep the subset with the
/// largest amplitude profile, ties to the lowest bins; pad with the weakest
/// kept peak (highest bin among equally weak ones); sort descending.
pub fn select_prominent(bins: &[usize], amps: &[f64], p: usize) -> Vec<usize> {
    if bins.is_empty() {
        return vec![0; p];
    }
    let q = bins.len().min(p);
    let key = |s: &Vec<usize>| {
        let mut a: Vec<f64> = s.iter().map(|&i| amps[i]).collect();
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let mut b: Vec<usize> = s.iter().map(|&i| bins[i]).collect();
        b.sort();
        (a, b)
    };
    let better = |x: &(Vec<f64>, Vec<usize>), y: &(Vec<f64>, Vec<usize>)| {
        for (a, b) in x.0.iter().zip(&y.0) {
            if a != b {
                return a > b;
            }
        }
        x.1 < y.1
    };
    let mut best: Option<(Vec<usize>, Key)> = None;
    for s in subsets(bins.len(), q) {
        let k = key(&s);
        if best.as_ref().is_none_or(|(_, bk)| better(&k, bk)) {
            best = Some((s, k));
        }
    }
    let chosen = best.unwrap().0;
    let weakest_amp = chosen.iter().map(|&i| amps[i]).fold(f64::INFINITY, f64::min);
    let pad = chosen.iter().filter(|&&i| amps[i] == weakest_amp).map(|&i| bins[i]).max().unwrap();
    let mut col: Vec<usize> = chosen.iter().map(|&i| bins[i]).collect();
    while col.len() < p {
        col.push(pad);
    }
    col.sort_by(|a, b| b.cmp(a));
    col
}

pub struct Attributes {
    pub mu: Vec<f64>,
    pub c: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
}

pub fn attributes(s: &[Vec<u32>]) -> Attributes {
    let l = s[0].len();
    let cap = if l % 2 == 0 { l / 2 } else { (l + 1) / 2 };
    let mut mu = Vec::new();
    let mut c = Vec::new();
    let mut a = Vec::new();
    for row in s {
        let mut sum = 0.0;
        for i in 0..l {
            sum += row[i] as f64;
        }
        let m = sum / l as f64;
        let cr: Vec<f64> = (0..l).map(|i| row[i] as f64 - m).collect();
        let mut ar = Vec::new();
        for tau in 0..=cap {
            let mut acc = 0.0;
            let mut i = 0;
            while i + tau < l {
                acc += cr[i] * cr[i + tau];
                i += 1;
            }
            ar.push(acc / l as f64);
        }
        mu.push(m);
        c.push(cr);
        a.push(ar);
    }
    Attributes { mu, c, a }
}

pub fn periodicity(a: &[f64]) -> f64 {
    let t = detect_peaks(a);
    if t.len() < 2 {
        return 0.0;
    }
    let gaps: Vec<f64> = (1..t.len()).map(|u| (t[u] - t[u - 1]) as f64).collect();
    let m = gaps.iter().sum::<f64>() / gaps.len() as f64;
    gaps.iter().map(|g| (g - m) * (g - m)).sum::<f64>() / gaps.len() as f64
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn zcr(c: &[f64]) -> f64 {
    let l = c.len();
    let mut acc = 0.0;
    for i in 1..l {
        acc += (sgn(c[i]) - sgn(c[i - 1])).abs();
    }
    acc / (2.0 * l as f64)
}

pub fn scg(s: &[Vec<u32>]) -> Vec<f64> {
    let at = attributes(s);
    let p = s.len();
    let l = s[0].len() as f64;
    let sigma: Vec<f64> =
        (0..p).map(|r| (s[r].iter().map(|&x| (x as f64 - at.mu[r]).powi(2)).sum::<f64>() / l).sqrt()).collect();
    let mut grad = vec![0.0; p];
    grad[0] = at.mu[1] - at.mu[0];
    grad[p - 1] = at.mu[p - 1] - at.mu[p - 2];
    for r in 1..p - 1 {
        grad[r] = 0.5 * (at.mu[r + 1] - at.mu[r - 1]);
    }
    let mut v = at.mu.clone();
    v.extend(sigma);
    v.extend(grad);
    v
}

/// `Σ_m x[m] e^{-2πi km/N}` by direct summation; returns `(re, im)` pairs.
pub fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (m, v) in x.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * ((k * m) % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            (re, im)
        })
        .collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
