//! Pre-dimensions `s_n` (`Σ_{B∈𝒢_n} |B|^{s_n} = 1`), the lower and upper
//! dimension bounds for `V > 20`, Moran coverings and box-counting fits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rug::Float;

use crate::bandtree::{Band, BandTree};
use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, log_sum_exp, ls_slope};

/// How band lengths are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LengthMode {
    /// `hi - lo` from the resolved endpoints.
    #[default]
    Endpoints,
    /// `4 / |t'(midpoint)|`, cheaper at depth; within a bounded factor of
    /// the true length.
    Derivative,
}

/// `ln |B|` for every band of generation `order`, in tree order.
pub fn ln_lengths(tree: &BandTree, order: u32, mode: LengthMode) -> Result<Vec<f64>> {
    let gen = tree.generation(order)?;
    Ok(match mode {
        LengthMode::Endpoints => gen.iter().map(Band::ln_length).collect(),
        LengthMode::Derivative => {
            let loc = tree.locator();
            gen.iter()
                .map(|b| {
                    let (_, d) = loc.eval_with_derivative(b.label, &b.midpoint());
                    let len = Float::with_val(d.prec(), 4u32) / d.abs();
                    len.ln().to_f64()
                })
                .collect()
        }
    })
}

/// A solved pre-dimension with its certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreDimension {
    pub s: f64,
    /// `Σ |B|^s - 1`, compensated, summed in descending-length order.
    pub residual: f64,
    /// `f(s - 10⁻⁶) > 1 > f(s + 10⁻⁶)`.
    pub bracketed: bool,
}

/// `f(s) = Σ exp(s · ln|B|)` summed from the longest band down.
pub fn partition_sum(ln_len: &[f64], s: f64) -> f64 {
    let mut sorted: Vec<f64> = ln_len.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    compensated_sum(sorted.into_iter().map(|l| (s * l).exp()))
}

/// Solves `Σ |B|^s = 1` given `ln |B|` for one generation.
pub fn pre_dimension(ln_len: &[f64]) -> Result<PreDimension> {
    if ln_len.is_empty() {
        return Err(Error::EmptyGeneration);
    }
    if let Some(&worst) = ln_len.iter().find(|l| **l >= 0.0) {
        return Err(Error::NotContractive(worst.exp()));
    }
    if ln_len.len() == 1 {
        log::warn!("DegenerateSingleBand: a single band has pre-dimension 0");
        return Ok(PreDimension {
            s: 0.0,
            residual: 0.0,
            bracketed: false,
        });
    }
    // g(s) = ln f(s) is convex and strictly decreasing from ln N > 0
    let g = |s: f64| log_sum_exp(&ln_len.iter().map(|l| s * l).collect::<Vec<_>>());
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    // Newton on g: g'(s) = Σ w_i ln|B_i| with w_i the normalized terms
    for _ in 0..4 {
        let terms: Vec<f64> = ln_len.iter().map(|l| s * l).collect();
        let lse = log_sum_exp(&terms);
        let slope = compensated_sum(ln_len.iter().zip(&terms).map(|(l, t)| l * (t - lse).exp()));
        if slope == 0.0 {
            break;
        }
        let step = lse / slope;
        if !step.is_finite() || step.abs() < 1e-17 {
            break;
        }
        s -= step;
    }
    let residual = partition_sum(ln_len, s) - 1.0;
    let bracketed = partition_sum(ln_len, s - 1e-6) > 1.0 && partition_sum(ln_len, s + 1e-6) < 1.0;
    Ok(PreDimension { s, residual, bracketed })
}

/// Lower and upper dimension bounds for `V > 20` and `K = liminf (a₁⋯a_k)^{1/k}`,
/// with `t₁ = 3/(V-8)`, `t₂ = 1/(4(V+8))`. `K = ∞` gives `(1, 1)`.
pub fn theorem_a_bounds(coupling: f64, k: f64) -> (f64, f64) {
    if k.is_infinite() {
        return (1.0, 1.0);
    }
    let t1 = 3.0 / (coupling - 8.0);
    let t2 = 1.0 / (4.0 * (coupling + 8.0));
    let ln2 = std::f64::consts::LN_2;
    let (lk, l3) = (k.ln(), 3f64.ln());
    let lower = f64::max(ln2 / (10.0 * ln2 - 3.0 * t2.ln()), (lk - l3) / (lk - (t2 / 3.0).ln()));
    let upper = (2.0 * lk + l3) / (2.0 * lk - t1.ln());
    (lower, upper)
}

/// The `r`-Moran covering: bands with `|B| ≤ r` whose parent is longer than `r`.
#[derive(Debug, Clone)]
pub struct MoranCover {
    pub scale: f64,
    /// `(order, index within generation)`.
    pub bands: Vec<(u32, usize)>,
    /// `min |B| / r` over the cover.
    pub min_ratio: f64,
}

impl MoranCover {
    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }
}

pub fn moran_cover(tree: &BandTree, r: f64) -> Result<MoranCover> {
    let deepest = tree.generation(tree.depth())?;
    if deepest.iter().any(|b| b.length_f64() > r) {
        return Err(Error::InsufficientDepth {
            depth: tree.depth(),
            scale: r,
        });
    }
    let mut bands = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for (order, gen) in tree.generations().iter().enumerate() {
        for (i, b) in gen.iter().enumerate() {
            let len = b.length_f64();
            let parent_len = tree.parent_of(b).map_or(f64::INFINITY, Band::length_f64);
            if len <= r && parent_len > r {
                bands.push((order as u32, i));
                min_ratio = min_ratio.min(len / r);
            }
        }
    }
    Ok(MoranCover {
        scale: r,
        bands,
        min_ratio,
    })
}

/// Order at which every band is shorter than 1, if any computed order is.
pub fn first_contractive_order(tree: &BandTree) -> Option<u32> {
    tree.generations()
        .iter()
        .position(|g| g.iter().all(|b| b.length_f64() < 1.0))
        .map(|n| n as u32)
}

#[derive(Debug, Clone)]
pub struct DimensionOptions {
    pub length_mode: LengthMode,
    /// Scales for Moran counts; empty to skip.
    pub moran_scales: Vec<f64>,
    /// `K` for the bounds; defaults to the growth constant of the expansion.
    pub k_constant: Option<f64>,
}

impl Default for DimensionOptions {
    fn default() -> Self {
        Self {
            length_mode: LengthMode::Endpoints,
            moran_scales: Vec::new(),
            k_constant: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DimensionReport {
    pub s_seq: BTreeMap<u32, PreDimension>,
    /// Estimate of the liminf: minimum over the tail window.
    pub s_low: f64,
    /// Estimate of the limsup: maximum over the tail window.
    pub s_high: f64,
    pub bounds: (f64, f64),
    pub n0: u32,
    pub moran_counts: Vec<(f64, usize)>,
    pub length_mode: LengthMode,
}

/// Pre-dimensions for every order from the first contractive one on, with
/// tail extremes over the last `⌈n_max/2⌉` orders.
pub fn dimension_report(tree: &BandTree, opts: &DimensionOptions) -> Result<DimensionReport> {
    let n_max = tree.depth();
    let n0 = first_contractive_order(tree).ok_or_else(|| {
        let worst = tree
            .generation(n_max)
            .map(|g| g.iter().map(Band::length_f64).fold(0.0, f64::max))
            .unwrap_or(f64::NAN);
        Error::NotContractive(worst)
    })?;
    let mut s_seq = BTreeMap::new();
    for n in n0..=n_max {
        s_seq.insert(n, pre_dimension(&ln_lengths(tree, n, opts.length_mode)?)?);
    }
    let tail_start = n_max + 1 - n_max.div_ceil(2).max(1);
    let tail: Vec<f64> = s_seq.range(tail_start.max(n0)..).map(|(_, p)| p.s).collect();
    let s_low = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let s_high = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k = opts.k_constant.unwrap_or_else(|| tree.cf().growth_constant());
    let bounds = theorem_a_bounds(tree.params().coupling_f64(), k);
    let mut moran_counts = Vec::new();
    for &r in &opts.moran_scales {
        match moran_cover(tree, r) {
            Ok(c) => moran_counts.push((r, c.len())),
            Err(Error::InsufficientDepth { .. }) => log::warn!("scale {r:e} below enumerated depth; skipped"),
            Err(e) => return Err(e),
        }
    }
    Ok(DimensionReport {
        s_seq,
        s_low,
        s_high,
        bounds,
        n0,
        moran_counts,
        length_mode: opts.length_mode,
    })
}

impl DimensionReport {
    /// Upper box-dimension estimate and, when at least two Moran counts are
    /// available, the log-count slope.
    pub fn box_dim_estimate(&self) -> (f64, Option<f64>) {
        (self.s_high, moran_slope(&self.moran_counts))
    }

    /// `key: value` lines followed by an `order s_n sum_residual` table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mode = match self.length_mode {
            LengthMode::Endpoints => "endpoints",
            LengthMode::Derivative => "derivative-estimate",
        };
        let _ = writeln!(out, "n0: {}", self.n0);
        let _ = writeln!(out, "length_mode: {mode}");
        let _ = writeln!(out, "s_low_estimate: {:.15}", self.s_low);
        let _ = writeln!(out, "s_high_estimate: {:.15}", self.s_high);
        let _ = writeln!(out, "lower_bound: {:.15}", self.bounds.0);
        let _ = writeln!(out, "upper_bound: {:.15}", self.bounds.1);
        if let (_, Some(slope)) = self.box_dim_estimate() {
            let _ = writeln!(out, "moran_slope: {slope:.15}");
        }
        for (r, c) in &self.moran_counts {
            let _ = writeln!(out, "moran_count[{r:e}]: {c}");
        }
        let _ = writeln!(out, "order\ts_n\tsum_residual\tbracketed");
        for (n, p) in &self.s_seq {
            let _ = writeln!(out, "{n}\t{:.15}\t{:.3e}\t{}", p.s, p.residual, p.bracketed);
        }
        out
    }
}

/// Slope of `ln N(r)` against `ln(1/r)`.
pub fn moran_slope(counts: &[(f64, usize)]) -> Option<f64> {
    let xs: Vec<f64> = counts.iter().map(|(r, _)| -r.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, c)| (*c as f64).ln()).collect();
    ls_slope(&xs, &ys)
}
