//! Large-coupling asymptotics through the matrices
//!
//! ```text
//! R_n(x) = [ 0          x^(a_n-1)  0          ]
//!          [ (a_n+1)x   0          a_n x      ]
//!          [ a_n x      0          (a_n-1)x   ]
//! ```
//!
//! For eventually periodic `α` with period `T`, `f⁎(α)` is the `x ∈ (0,1]`
//! where the Perron root of the period product has `ρ^{1/T} = 1`.

use nalgebra::Matrix3;

use crate::bandtree::BandTree;
use crate::cfrac::ContinuedFraction;
use crate::dimension::{ln_lengths, pre_dimension, LengthMode};
use crate::error::{Error, Result};
use crate::tracemap::SpectralParams;

pub fn r_matrix(a: u32, x: f64) -> Result<Matrix3<f64>> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::DomainViolation(format!("x = {x} outside (0,1]")));
    }
    if a == 0 {
        return Err(Error::InvalidQuotient("0".into()));
    }
    let a_f = a as f64;
    Ok(Matrix3::new(
        0.0,
        x.powi(a as i32 - 1),
        0.0,
        (a_f + 1.0) * x,
        0.0,
        a_f * x,
        a_f * x,
        0.0,
        (a_f - 1.0) * x,
    ))
}

/// `R_{i+1}(x) ⋯ R_{i+T}(x)` over one period.
pub fn period_product(period: &[u32], x: f64) -> Result<Matrix3<f64>> {
    period
        .iter()
        .try_fold(Matrix3::identity(), |acc, &a| Ok(acc * r_matrix(a, x)?))
}

/// Perron root of a nonnegative matrix by power iteration on `P + I`,
/// which shares the Perron vector and is primitive when `P` is irreducible.
pub fn perron_root(p: &Matrix3<f64>) -> f64 {
    let shifted = p + Matrix3::identity();
    let mut v = nalgebra::Vector3::new(1.0, 1.0, 1.0);
    let mut lambda = 0.0;
    for _ in 0..200_000 {
        let w = shifted * v;
        let norm = w.amax();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w / norm;
        if (next - lambda).abs() <= 1e-15 * next {
            break;
        }
        lambda = next;
    }
    // Rayleigh-type refinement through the max-entry ratio
    let w = shifted * v;
    let i = v.iamax();
    w[i] / v[i] - 1.0
}

/// The period of an eventually periodic expansion.
fn period_of(cf: &ContinuedFraction) -> Result<&[u32]> {
    if cf.is_truncated() || cf.period().is_empty() {
        return Err(Error::UnsupportedAperiodic);
    }
    Ok(cf.period())
}

/// `ρ(P(x))^{1/T}`.
pub fn growth_rate(period: &[u32], x: f64) -> Result<f64> {
    Ok(perron_root(&period_product(period, x)?).powf(1.0 / period.len() as f64))
}

/// `f⁎(α)`, the root of `ρ(P(x))^{1/T} = 1` in `(0, 1]`.
pub fn f_star(cf: &ContinuedFraction) -> Result<f64> {
    let period = period_of(cf)?;
    let at_one = growth_rate(period, 1.0)?;
    if at_one < 1.0 {
        return Err(Error::NoRootInUnitInterval(at_one));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if growth_rate(period, mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `‖R_1(x) ⋯ R_n(x)‖_∞^{1/n}` (maximum row sum), accumulated in log space.
pub fn norm_product_rate(cf: &ContinuedFraction, x: f64, n: usize) -> Result<f64> {
    let qs = cf.quotients(n)?;
    let mut acc = Matrix3::identity();
    let mut log_scale = 0.0;
    for a in qs {
        acc *= r_matrix(a, x)?;
        let s = row_sum_norm(&acc);
        acc /= s;
        log_scale += s.ln();
    }
    Ok(((log_scale + row_sum_norm(&acc).ln()) / n as f64).exp())
}

fn row_sum_norm(m: &Matrix3<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawRow {
    pub coupling: f64,
    pub order: u32,
    pub s: f64,
    pub s_ln_v: f64,
    /// `-ln f⁎`.
    pub target: f64,
    pub gap: f64,
}

/// `s_order · ln V` against `-ln f⁎` for each coupling.
pub fn large_v_law(cf: &ContinuedFraction, couplings: &[f64], order: u32, precision: u32) -> Result<Vec<LawRow>> {
    let target = -f_star(cf)?.ln();
    couplings
        .iter()
        .map(|&v| {
            let prec = precision.max(SpectralParams::required_precision(v, order));
            let params = SpectralParams::new(v, prec)?;
            let tree = BandTree::enumerate(cf, &params, order)?;
            let s = pre_dimension(&ln_lengths(&tree, order, LengthMode::Endpoints)?)?.s;
            let s_ln_v = s * v.ln();
            Ok(LawRow {
                coupling: v,
                order,
                s,
                s_ln_v,
                target,
                gap: (s_ln_v - target).abs(),
            })
        })
        .collect()
}

/// `V, order, s, s·lnV, target, gap` lines.
pub fn law_table(rows: &[LawRow]) -> String {
    let mut out = String::from("V,order,s,s_lnV,target,gap\n");
    for r in rows {
        out += &format!(
            "{},{},{:.15},{:.15},{:.15},{:.15}\n",
            r.coupling, r.order, r.s, r.s_ln_v, r.target, r.gap
        );
    }
    out
}
