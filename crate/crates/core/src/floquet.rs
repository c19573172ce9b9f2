//! Full spectra `σ_{(k,p)} = {x : |t_{(k,p)}(x)| ≤ 2}` of the periodic
//! approximants, from the eigenvalues of periodic and antiperiodic Jacobi
//! matrices. Used to audit set identities between whole families of bands.

use nalgebra::DMatrix;

use crate::tracemap::TraceLabel;

/// One period of potential values whose transfer-matrix trace is `t_{(k,p)}`,
/// or `None` when the trace is the constant 2 (`σ = ℝ`).
pub fn potential_word(quotients: &[u32], coupling: f64, label: TraceLabel) -> Option<Vec<f64>> {
    let TraceLabel { level: k, power: p } = label;
    if p == -1 {
        if k == 0 {
            return Some(vec![-coupling]);
        }
        let a_k = quotients[k as usize - 1] as i64;
        return potential_word(quotients, coupling, TraceLabel::new(k - 1, a_k - 1));
    }
    if k == 0 {
        return match p {
            0 => None,
            _ => {
                let mut w = vec![coupling];
                w.extend(std::iter::repeat(0.0).take(p as usize - 1));
                Some(w)
            }
        };
    }
    let mut w = transfer_word(quotients, coupling, k - 1);
    let m_k = transfer_word(quotients, coupling, k);
    for _ in 0..p {
        w.extend_from_slice(&m_k);
    }
    Some(w)
}

/// Site potentials of `M_j`, `j ≥ 0`, in product order:
/// `M_0 = T(0)`, `M_1 = T(V) T(0)^{a₁-1}`, `M_{j+1} = M_{j-1} M_j^{a_{j+1}}`.
pub fn transfer_word(quotients: &[u32], coupling: f64, j: u32) -> Vec<f64> {
    let mut prev = vec![0.0];
    if j == 0 {
        return prev;
    }
    let mut cur = vec![coupling];
    cur.extend(std::iter::repeat(0.0).take(quotients[0] as usize - 1));
    for i in 1..j as usize {
        let mut next = prev.clone();
        for _ in 0..quotients[i] {
            next.extend_from_slice(&cur);
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

fn jacobi_eigenvalues(word: &[f64], corner: f64) -> Vec<f64> {
    let n = word.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (i, v) in word.iter().enumerate() {
        h[(i, i)] = *v;
    }
    match n {
        1 => return vec![word[0] + 2.0 * corner],
        2 => {
            h[(0, 1)] = 1.0 + corner;
            h[(1, 0)] = 1.0 + corner;
        }
        _ => {
            for i in 0..n - 1 {
                h[(i, i + 1)] = 1.0;
                h[(i + 1, i)] = 1.0;
            }
            h[(0, n - 1)] = corner;
            h[(n - 1, 0)] = corner;
        }
    }
    h.symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// The `N` bands of a period-`N` potential, ascending.
pub fn band_spectrum(word: &[f64]) -> Vec<(f64, f64)> {
    let mut edges = jacobi_eigenvalues(word, 1.0);
    edges.extend(jacobi_eigenvalues(word, -1.0));
    edges.sort_by(f64::total_cmp);
    edges.chunks(2).map(|c| (c[0], c[1])).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    /// The whole real line.
    All,
    Bands(Vec<(f64, f64)>),
}

impl Spectrum {
    pub fn of(quotients: &[u32], coupling: f64, label: TraceLabel) -> Self {
        match potential_word(quotients, coupling, label) {
            None => Spectrum::All,
            Some(w) => Spectrum::Bands(band_spectrum(&w)),
        }
    }

    /// Whether `[lo, hi]` lies in the union, allowing `tol` slack at joins.
    pub fn covers(&self, lo: f64, hi: f64, tol: f64) -> bool {
        let Spectrum::Bands(bands) = self else {
            return true;
        };
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for &(a, b) in bands {
            match merged.last_mut() {
                Some(last) if a <= last.1 + tol => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        merged.iter().any(|&(a, b)| a - tol <= lo && hi <= b + tol)
    }
}

/// Longest common piece of three spectra, or 0 when they are disjoint.
pub fn triple_overlap(a: &Spectrum, b: &Spectrum, c: &Spectrum) -> f64 {
    let all = [(f64::NEG_INFINITY, f64::INFINITY)];
    let as_slice = |s: &Spectrum| -> Vec<(f64, f64)> {
        match s {
            Spectrum::All => all.to_vec(),
            Spectrum::Bands(v) => v.clone(),
        }
    };
    let (a, b, c) = (as_slice(a), as_slice(b), as_slice(c));
    let mut worst = 0.0f64;
    for &(a0, a1) in &a {
        for &(b0, b1) in &b {
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if lo > hi {
                continue;
            }
            for &(c0, c1) in &c {
                let (l2, h2) = (lo.max(c0), hi.min(c1));
                if l2 <= h2 {
                    worst = worst.max(h2 - l2).max(f64::MIN_POSITIVE);
                }
            }
        }
    }
    worst
}
