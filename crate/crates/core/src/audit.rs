//! Numerical audit of the identities and band-length estimates over an
//! enumerated tree.
//!
//! Hard checks carry explicit constants and must hold within a relative
//! tolerance. Soft checks measure constants whose existence is asserted but
//! whose value is not; they pass when the measured extreme over the last three
//! orders grows by less than the drift limit per order.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;

use crate::bandtree::{predicted_counts, sample_points, BandKind, BandTree, IndexWindow};
use crate::dimension::{ln_lengths, pre_dimension, LengthMode};
use crate::error::{Error, Result};
use crate::floquet::{triple_overlap, Spectrum};
use crate::gibbs::{build_measure, gibbs_ratio_report};
use crate::ladder::{
    contraction_ratio, ladders_at, ratio_bounds, rung_ratio, window_bounds, window_samples, Ladder,
};
use crate::numerics::compensated_sum;
use crate::tracemap::{fricke_residual, state_at, TraceLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckId {
    FrickeInvariant = 1,
    TripleDisjoint,
    CoveringChain,
    BoundedVariation,
    BoundedDistortion,
    BoundedCovariation,
    DerivativeRatio,
    IndexLocalization,
    KeyWindows,
    Contraction,
    CountRecursion,
    GibbsRatios,
}

impl CheckId {
    pub const ALL: [CheckId; 12] = [
        CheckId::FrickeInvariant,
        CheckId::TripleDisjoint,
        CheckId::CoveringChain,
        CheckId::BoundedVariation,
        CheckId::BoundedDistortion,
        CheckId::BoundedCovariation,
        CheckId::DerivativeRatio,
        CheckId::IndexLocalization,
        CheckId::KeyWindows,
        CheckId::Contraction,
        CheckId::CountRecursion,
        CheckId::GibbsRatios,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::FrickeInvariant => "fricke_invariant",
            CheckId::TripleDisjoint => "triple_disjoint",
            CheckId::CoveringChain => "covering_chain",
            CheckId::BoundedVariation => "bounded_variation",
            CheckId::BoundedDistortion => "bounded_distortion",
            CheckId::BoundedCovariation => "bounded_covariation",
            CheckId::DerivativeRatio => "derivative_ratio",
            CheckId::IndexLocalization => "index_localization",
            CheckId::KeyWindows => "keyLW_windows",
            CheckId::Contraction => "contraction",
            CheckId::CountRecursion => "count_recursion",
            CheckId::GibbsRatios => "gibbs_ratios",
        }
    }

    pub fn is_hard(self) -> bool {
        !matches!(
            self,
            CheckId::BoundedVariation
                | CheckId::BoundedDistortion
                | CheckId::BoundedCovariation
                | CheckId::GibbsRatios
        )
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s || (*c as u8).to_string() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    All,
    Hard,
    Soft,
    Only(Vec<CheckId>),
}

impl Selection {
    pub fn checks(&self) -> Vec<CheckId> {
        match self {
            Selection::All => CheckId::ALL.to_vec(),
            Selection::Hard => CheckId::ALL.into_iter().filter(|c| c.is_hard()).collect(),
            Selection::Soft => CheckId::ALL.into_iter().filter(|c| !c.is_hard()).collect(),
            Selection::Only(v) => {
                let mut v = v.clone();
                v.sort();
                v.dedup();
                v
            }
        }
    }
}

impl std::str::FromStr for Selection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Selection::All),
            "hard" => Ok(Selection::Hard),
            "soft" => Ok(Selection::Soft),
            list => list
                .split(',')
                .map(|t| {
                    CheckId::from_name(t.trim())
                        .ok_or_else(|| Error::InvalidArgument(format!("unknown check `{t}`")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Selection::Only),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Not enough enumerated depth or data to decide.
    Insufficient,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Insufficient => "INSUFFICIENT",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub id: CheckId,
    pub hard: bool,
    pub population: usize,
    /// The measured extreme; its meaning is given per check in `detail`.
    pub extreme: f64,
    pub bound: Option<f64>,
    pub verdict: Verdict,
    /// `(path, x)` of the worst sample, when meaningful.
    pub worst: Option<(String, String)>,
    pub detail: String,
}

impl AuditReport {
    pub fn name(&self) -> &'static str {
        self.id.name()
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// `name population extreme bound verdict`.
    pub fn summary_line(&self) -> String {
        let bound = self.bound.map_or("-".to_string(), |b| format!("{b:.6e}"));
        format!(
            "{}\t{}\t{:.6e}\t{}\t{}",
            self.name(),
            self.population,
            self.extreme,
            bound,
            self.verdict
        )
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}] {}", self.id as u8, self.name())?;
        writeln!(f, "  kind: {}", if self.hard { "hard" } else { "soft" })?;
        writeln!(f, "  population: {}", self.population)?;
        writeln!(f, "  extreme: {:.6e}", self.extreme)?;
        if let Some(b) = self.bound {
            writeln!(f, "  bound: {b:.6e}")?;
        }
        if let Some((p, x)) = &self.worst {
            writeln!(f, "  worst: {p} at x = {x}")?;
        }
        if !self.detail.is_empty() {
            writeln!(f, "  detail: {}", self.detail)?;
        }
        write!(f, "  verdict: {}", self.verdict)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub seed: u64,
    /// Relative slack for hard inequalities.
    pub hard_tol: f64,
    /// Largest accepted growth factor per order for soft constants.
    pub drift_limit: f64,
    /// Sample points per band for derivative checks.
    pub variation_samples: usize,
    /// Deepest level for the full-spectrum set identities.
    pub floquet_max_level: u32,
    /// Exponent for the Gibbs check; defaults to the deepest pre-dimension.
    pub beta: Option<f64>,
    /// Random energies per `(k, p)` in the invariant check.
    pub fricke_random: usize,
    /// Samples per window for the window bounds.
    pub window_samples: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            hard_tol: 1e-10,
            drift_limit: 1.05,
            variation_samples: 33,
            floquet_max_level: 6,
            beta: None,
            fricke_random: 8,
            window_samples: 1000,
        }
    }
}

/// Runs the selected checks; reports come back ordered by check id.
pub fn run_suite(tree: &BandTree, selection: &Selection, cfg: &AuditConfig) -> Result<Vec<AuditReport>> {
    let checks = selection.checks();
    let needs_ladders = checks.iter().any(|c| {
        matches!(
            c,
            CheckId::DerivativeRatio | CheckId::IndexLocalization | CheckId::Contraction
        )
    });
    let ladders = if needs_ladders {
        ladders_at(tree, tree.depth())?
    } else {
        Vec::new()
    };
    checks
        .par_iter()
        .map(|&id| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(id as u64));
            match id {
                CheckId::FrickeInvariant => fricke_check(tree, cfg, &mut rng),
                CheckId::TripleDisjoint => triple_check(tree, cfg),
                CheckId::CoveringChain => covering_check(tree, cfg),
                CheckId::BoundedVariation => variation_check(tree, cfg, false),
                CheckId::BoundedDistortion => variation_check(tree, cfg, true),
                CheckId::BoundedCovariation => covariation_check(tree, cfg),
                CheckId::DerivativeRatio => ratio_check(tree, cfg, &ladders),
                CheckId::IndexLocalization => index_check(tree, cfg, &ladders),
                CheckId::KeyWindows => window_check(tree, cfg),
                CheckId::Contraction => contraction_check(tree, cfg, &ladders, &mut rng),
                CheckId::CountRecursion => Ok(count_check(tree)),
                CheckId::GibbsRatios => gibbs_check(tree, cfg),
            }
        })
        .collect()
}

fn report(id: CheckId) -> AuditReport {
    AuditReport {
        id,
        hard: id.is_hard(),
        population: 0,
        extreme: 0.0,
        bound: None,
        verdict: Verdict::Insufficient,
        worst: None,
        detail: String::new(),
    }
}

fn fmt_x(x: &Float) -> String {
    x.to_string_radix(10, Some(24))
}

fn fricke_check(tree: &BandTree, cfg: &AuditConfig, rng: &mut ChaCha8Rng) -> Result<AuditReport> {
    let mut r = report(CheckId::FrickeInvariant);
    let params = tree.params();
    let qs = tree.quotients();
    let v = params.coupling_f64();
    let mut residuals = Vec::new();
    let mut worst = (0.0f64, String::new(), String::new());
    for k in 0..=tree.depth() {
        let mut xs: Vec<Float> = tree.generation(k)?.iter().map(|b| b.midpoint()).collect();
        for _ in 0..cfg.fricke_random {
            xs.push(params.real(rng.gen_range(-3.0..v + 3.0)));
        }
        let a = qs[k as usize];
        for x in &xs {
            let state = state_at(qs, k, x, params);
            let next = &state.v;
            for p in 0..=a + 1 {
                let (tp, _) = state.trace(p);
                let (tp1, _) = state.trace(p + 1);
                let res = fricke_residual(next, &tp, &tp1, params.coupling());
                if res > worst.0 {
                    worst = (res, format!("{}", TraceLabel::new(k, p as i64)), fmt_x(x));
                }
                residuals.push(res);
            }
        }
    }
    residuals.sort_by(f64::total_cmp);
    r.population = residuals.len();
    r.extreme = worst.0;
    r.bound = Some(cfg.hard_tol);
    r.worst = Some((worst.1, worst.2));
    r.detail = format!(
        "relative residual of x²+y²+z²-xyz-4-V²; median {:.3e}",
        residuals[residuals.len() / 2]
    );
    r.verdict = if r.extreme <= cfg.hard_tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(r)
}

fn floquet_levels(tree: &BandTree, cfg: &AuditConfig) -> u32 {
    cfg.floquet_max_level.min(tree.depth())
}

fn triple_check(tree: &BandTree, cfg: &AuditConfig) -> Result<AuditReport> {
    let mut r = report(CheckId::TripleDisjoint);
    let qs = tree.quotients();
    let v = tree.params().coupling_f64();
    let tol = cfg.hard_tol * (v + 4.0);
    let mut worst = (0.0f64, String::new());
    for k in 0..=floquet_levels(tree, cfg) {
        let next = Spectrum::of(qs, v, TraceLabel::new(k + 1, 0));
        for p in 0..=qs[k as usize] as i64 + 1 {
            let a = Spectrum::of(qs, v, TraceLabel::new(k, p));
            let b = Spectrum::of(qs, v, TraceLabel::new(k, p - 1));
            let overlap = triple_overlap(&next, &a, &b);
            r.population += 1;
            if overlap > worst.0 {
                worst = (overlap, format!("(k,p)=({k},{p})"));
            }
        }
    }
    r.extreme = worst.0;
    r.bound = Some(tol);
    if worst.0 > 0.0 {
        r.worst = Some((worst.1, "-".into()));
    }
    r.detail = "longest common piece of σ(k+1,0), σ(k,p), σ(k,p-1)".into();
    r.verdict = if worst.0 <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(r)
}

fn covering_check(tree: &BandTree, cfg: &AuditConfig) -> Result<AuditReport> {
    let mut r = report(CheckId::CoveringChain);
    let qs = tree.quotients();
    let v = tree.params().coupling_f64();
    let tol = cfg.hard_tol * (v + 4.0);
    let mut failures = 0usize;
    let bands = |label| match Spectrum::of(qs, v, label) {
        Spectrum::Bands(b) => Some(b),
        Spectrum::All => None,
    };
    // (left, right₁, right₂): σ(left) ⊂ σ(right₁) ∪ σ(right₂)
    let mut cases = Vec::new();
    for k in 0..=floquet_levels(tree, cfg) {
        for p in 0..=qs[k as usize] as i64 + 1 {
            cases.push((TraceLabel::new(k, p + 1), TraceLabel::new(k + 1, 0), TraceLabel::new(k, p)));
        }
        cases.push((TraceLabel::new(k + 2, 0), TraceLabel::new(k + 1, 0), TraceLabel::new(k, 0)));
    }
    for (left, a, b) in cases {
        let (Some(mut union), Some(extra)) = (bands(a), bands(b)) else {
            continue;
        };
        union.extend(extra);
        union.sort_by(|x, y| x.0.total_cmp(&y.0));
        let union = Spectrum::Bands(union);
        let Some(left_bands) = bands(left) else {
            failures += 1;
            continue;
        };
        for (lo, hi) in left_bands {
            r.population += 1;
            if !union.covers(lo, hi, tol) {
                failures += 1;
                r.worst.get_or_insert((format!("σ{left} ⊄ σ{a} ∪ σ{b}"), format!("[{lo}, {hi}]")));
            }
        }
    }
    r.extreme = failures as f64;
    r.bound = Some(0.0);
    r.detail = "bands of σ(k,p+1), p >= 0, outside σ(k+1,0) ∪ σ(k,p), and of σ(k+2,0) outside σ(k+1,0) ∪ σ(k,0)".into();
    r.verdict = if failures == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(r)
}

/// The three orders the soft checks compare.
fn soft_orders(tree: &BandTree) -> Option<[u32; 3]> {
    let d = tree.depth();
    (d >= 3).then(|| [d - 2, d - 1, d])
}

/// Fills a soft report from per-order extremes.
fn drift_verdict(r: &mut AuditReport, orders: &[u32], values: &[f64], cfg: &AuditConfig) {
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    r.extreme = values.iter().copied().fold(0.0, f64::max);
    r.bound = Some(cfg.drift_limit);
    let listing: Vec<String> = orders
        .iter()
        .zip(values)
        .map(|(n, v)| format!("{n}:{v:.6}"))
        .collect();
    let growth: Vec<String> = ratios.iter().map(|g| format!("{g:.4}")).collect();
    r.detail = format!("{} per order [{}], growth [{}]", r.detail, listing.join(", "), growth.join(", "));
    let finite = values.iter().all(|v| v.is_finite());
    r.verdict = if finite && ratios.iter().all(|g| *g < cfg.drift_limit) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
}

fn variation_check(tree: &BandTree, cfg: &AuditConfig, distortion: bool) -> Result<AuditReport> {
    let id = if distortion {
        CheckId::BoundedDistortion
    } else {
        CheckId::BoundedVariation
    };
    let mut r = report(id);
    let Some(orders) = soft_orders(tree) else {
        return Ok(r);
    };
    let loc = tree.locator();
    let mut values = Vec::new();
    let mut worst = (0.0f64, String::new());
    for &n in &orders {
        let per_band: Vec<(f64, String)> = tree
            .generation(n)?
            .par_iter()
            .map(|b| {
                let len = b.length();
                let ds: Vec<Float> = b
                    .sample_points(cfg.variation_samples)
                    .iter()
                    .map(|x| loc.eval_with_derivative(b.label, x).1.abs())
                    .collect();
                let max = ds.iter().fold(0.0f64, |m, d| m.max(d.to_f64()));
                let min = ds.iter().fold(f64::INFINITY, |m, d| m.min(d.to_f64()));
                let value = if distortion {
                    let scaled = |d: f64| d * len.to_f64();
                    scaled(max).max(1.0 / scaled(min))
                } else {
                    max / min
                };
                (value, b.path.to_string())
            })
            .collect();
        r.population += per_band.len() * cfg.variation_samples;
        let (m, path) = per_band
            .into_iter()
            .fold((0.0, String::new()), |a, b| if b.0 > a.0 { b } else { a });
        if m > worst.0 {
            worst = (m, path);
        }
        values.push(m);
    }
    r.detail = if distortion {
        "max of |h'|·|B| and its inverse".into()
    } else {
        "max |h'(x1)/h'(x2)| within a band".into()
    };
    r.worst = Some((worst.1, "-".into()));
    drift_verdict(&mut r, &orders, &values, cfg);
    Ok(r)
}

fn covariation_check(tree: &BandTree, cfg: &AuditConfig) -> Result<AuditReport> {
    use std::collections::HashMap;
    let mut r = report(CheckId::BoundedCovariation);
    let Some(orders) = soft_orders(tree) else {
        return Ok(r);
    };
    let mut values = Vec::new();
    for &n in &orders {
        let leaves = tree.generation(n)?;
        let ln_leaf = ln_lengths(tree, n, LengthMode::Endpoints)?;
        let mut eta = 1.0f64;
        for k in 1..n {
            let mut groups: HashMap<(BandKind, &[crate::bandtree::PathSymbol]), (f64, f64)> = HashMap::new();
            for (b, ln_n) in leaves.iter().zip(&ln_leaf) {
                let chain = tree.ancestry(b);
                let anc = chain[k as usize];
                let key = (anc.kind, &b.path.symbols()[k as usize + 1..]);
                let ratio = ln_n - anc.ln_length();
                let e = groups.entry(key).or_insert((f64::INFINITY, f64::NEG_INFINITY));
                e.0 = e.0.min(ratio);
                e.1 = e.1.max(ratio);
                r.population += 1;
            }
            for (lo, hi) in groups.values() {
                eta = eta.max((hi - lo).exp());
            }
        }
        values.push(eta);
    }
    r.detail = "max ratio of |B_n|/|B_k| across chains sharing types and indices".into();
    drift_verdict(&mut r, &orders, &values, cfg);
    Ok(r)
}

fn ladder_points(l: &Ladder, n: usize) -> Vec<Float> {
    let d = l.deepest();
    sample_points(&d.lo, &d.hi, n)
}

fn ratio_check(tree: &BandTree, cfg: &AuditConfig, ladders: &[Ladder]) -> Result<AuditReport> {
    let mut r = report(CheckId::DerivativeRatio);
    let v = tree.params().coupling_f64();
    let per: Vec<(usize, f64, String, String)> = ladders
        .par_iter()
        .map(|l| {
            let mut worst = (0usize, 0.0f64, String::new(), String::new());
            for x in ladder_points(l, 5) {
                for i in 1..l.m() {
                    let ratio = rung_ratio(l, tree, i, &x)?.to_f64();
                    let (lo, hi) = ratio_bounds(v, l.p(i));
                    let excess = (lo / ratio).max(ratio / hi);
                    worst.0 += 1;
                    if excess > worst.1 {
                        worst.1 = excess;
                        worst.2 = format!("{} rung {i}", l.path);
                        worst.3 = fmt_x(&x);
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    r.population = per.iter().map(|w| w.0).sum();
    let w = per
        .into_iter()
        .fold((0, 0.0, String::new(), String::new()), |a, b| if b.1 > a.1 { b } else { a });
    r.extreme = w.1;
    r.bound = Some(1.0 + cfg.hard_tol);
    r.worst = Some((w.2, w.3));
    r.detail = "max of lower/ratio and ratio/upper for (V-8)(p+1)/3 <= |h'_{i+1}/h'_i| <= (V+8)(p+1)^3/4".into();
    r.verdict = if r.population == 0 {
        Verdict::Insufficient
    } else if r.extreme <= 1.0 + cfg.hard_tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(r)
}

fn index_check(tree: &BandTree, cfg: &AuditConfig, ladders: &[Ladder]) -> Result<AuditReport> {
    let mut r = report(CheckId::IndexLocalization);
    let loc = tree.locator();
    let mut failures = 0usize;
    for l in ladders {
        for i in 1..l.m() {
            let next = &l.rungs[i + 1];
            let p = l.p(i);
            let pts = sample_points(&next.lo, &next.hi, 5);
            r.population += pts.len();
            let Some(idx) = l.l(i) else {
                failures += pts.len();
                r.worst.get_or_insert((format!("{} rung {i}", l.path), "no window".into()));
                continue;
            };
            let w = IndexWindow::new(p, idx);
            for x in &pts {
                let t = loc.eval(l.rungs[i].label, x).to_f64();
                if !w.contains_with_tol(t, cfg.hard_tol) {
                    failures += 1;
                    r.worst.get_or_insert((format!("{} rung {i}", l.path), fmt_x(x)));
                }
            }
        }
    }
    // the enumerator's own localization of II/III-parent children
    for gen in tree.generations().iter().skip(1) {
        for b in gen {
            let Some(w) = b.window() else {
                continue;
            };
            let parent = tree.parent_of(b).expect("order >= 1");
            for x in [&b.lo, &b.hi] {
                r.population += 1;
                let t = loc.eval(parent.label, x).to_f64();
                if !w.contains_with_tol(t, cfg.hard_tol) {
                    failures += 1;
                    r.worst.get_or_insert((b.path.to_string(), fmt_x(x)));
                }
            }
        }
    }
    r.extreme = failures as f64;
    r.bound = Some(0.0);
    r.detail = "samples of h_i on the next rung outside I_{p_i,l_i}".into();
    r.verdict = if failures == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(r)
}

fn window_check(tree: &BandTree, cfg: &AuditConfig) -> Result<AuditReport> {
    let mut r = report(CheckId::KeyWindows);
    let p_max = tree.quotients().iter().copied().max().unwrap_or(1) + 1;
    let mut failures = 0usize;
    for p in 1..=p_max {
        for l in 1..=p {
            for t in window_samples(IndexWindow::new(p, l), cfg.window_samples) {
                r.population += 1;
                if window_bounds(p, t).any() {
                    failures += 1;
                    r.worst.get_or_insert((format!("I_{{{p},{l}}}"), format!("{t}")));
                }
            }
        }
    }
    r.extreme = failures as f64;
    r.bound = Some(0.0);
    r.detail = format!("window samples violating the four Chebyshev bounds, p <= {p_max}");
    r.verdict = if failures == 0 && r.population > 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(r)
}

fn contraction_check(
    tree: &BandTree,
    cfg: &AuditConfig,
    ladders: &[Ladder],
    rng: &mut ChaCha8Rng,
) -> Result<AuditReport> {
    let mut r = report(CheckId::Contraction);
    let loc = tree.locator();
    let mut worst = (0.0f64, String::new(), String::new());
    let (mut worst_top, mut worst_chain) = (0.0f64, 0.0f64);
    for l in ladders {
        let d = l.deepest();
        let mut pairs = vec![(d.lo.clone(), d.hi.clone())];
        let width = d.hi.clone() - &d.lo;
        for _ in 0..4 {
            let u: f64 = rng.gen();
            let w: f64 = rng.gen();
            let x = Float::with_val(d.lo.prec(), &width * u) + &d.lo;
            let y = Float::with_val(d.lo.prec(), &width * w) + &d.lo;
            pairs.push((x, y));
        }
        for (x, y) in &pairs {
            let top = (loc.eval(d.label, x) - loc.eval(d.label, y)).abs().to_f64();
            // second inequality: |h_m(x) - h_m(y)| <= 4
            worst_top = worst_top.max(top / 4.0);
            let mut excess = top / 4.0;
            for i in 1..l.m() {
                let c = contraction_ratio(l, tree, i, x, y);
                worst_chain = worst_chain.max(c);
                excess = excess.max(c);
                r.population += 1;
            }
            if excess > worst.0 {
                worst = (excess, l.path.to_string(), format!("{} / {}", fmt_x(x), fmt_x(y)));
            }
        }
    }
    r.extreme = worst.0;
    r.bound = Some(1.0 + cfg.hard_tol);
    r.worst = Some((worst.1, worst.2));
    r.detail = format!(
        "max |h_i(x)-h_i(y)| / (3^-(m-i) |h_m(x)-h_m(y)|) = {worst_chain:.6}; \
         max |h_m(x)-h_m(y)| / 4 = {worst_top:.6}"
    );
    r.verdict = if r.population == 0 {
        Verdict::Insufficient
    } else if worst.0 <= 1.0 + cfg.hard_tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(r)
}

fn count_check(tree: &BandTree) -> AuditReport {
    let mut r = report(CheckId::CountRecursion);
    let got = tree.counts();
    let want = predicted_counts(tree.quotients(), tree.depth());
    let mismatches = got.iter().zip(&want).filter(|(a, b)| a != b).count();
    r.population = got.len();
    r.extreme = mismatches as f64;
    r.bound = Some(0.0);
    r.detail = format!(
        "orders with (n_I, n_II, n_III) off the recursion; deepest {:?}",
        got.last().copied().unwrap_or_default()
    );
    r.verdict = if mismatches == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    r
}

/// Exponent used by the Gibbs check.
pub fn default_beta(tree: &BandTree) -> Result<f64> {
    Ok(pre_dimension(&ln_lengths(tree, tree.depth(), LengthMode::Endpoints)?)?.s)
}

fn gibbs_check(tree: &BandTree, cfg: &AuditConfig) -> Result<AuditReport> {
    let mut r = report(CheckId::GibbsRatios);
    let Some(orders) = soft_orders(tree) else {
        return Ok(r);
    };
    let d = tree.depth();
    if d < 5 {
        return Ok(r);
    }
    let beta = match cfg.beta {
        Some(b) => b,
        None => default_beta(tree)?,
    };
    // every k ≤ m enters the extreme at order m; per-k drift is reported for the shared range
    let k_common = orders[0].saturating_sub(3) as usize;
    let mut per_m: Vec<Vec<f64>> = Vec::new();
    for &m in &orders {
        let rows = gibbs_ratio_report(tree, beta, m, m)?;
        r.population += rows.len();
        per_m.push(rows.iter().map(|row| row.zeta()).collect());
    }
    let mut per_k_growth = 0.0f64;
    for k in 0..=k_common {
        for w in per_m.windows(2) {
            per_k_growth = per_k_growth.max(w[1][k] / w[0][k]);
        }
    }
    let mu = build_measure(tree, beta, d)?;
    let mut norm_err = 0.0f64;
    let mut add_err = 0.0f64;
    for k in 0..=d {
        let gen = tree.generation(k)?;
        let mut sums = vec![Vec::new(); gen.len()];
        for (path, w) in mu.weights() {
            let anc = path.prefix(k);
            let i = gen.binary_search_by(|b| b.path.cmp(&anc)).expect("ancestor enumerated");
            sums[i].push(w);
        }
        for (i, parts) in sums.into_iter().enumerate() {
            add_err = add_err.max((compensated_sum(parts) - mu.mass(k, i)).abs());
        }
        norm_err = norm_err.max((compensated_sum(mu.generation_masses(k).iter().copied()) - 1.0).abs());
    }
    let zetas: Vec<f64> = per_m
        .iter()
        .map(|v| v.iter().copied().fold(0.0, f64::max))
        .collect();
    let growth = zetas.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    r.extreme = zetas.iter().copied().fold(0.0, f64::max);
    r.bound = Some(cfg.drift_limit);
    r.detail = format!(
        "beta {beta:.6}; max zeta per m {:?}; growth {growth:.4}; \
         per-k growth {per_k_growth:.4} for k <= {k_common}; normalization error {norm_err:.2e}; additivity error {add_err:.2e}",
        orders.iter().zip(&zetas).map(|(m, z)| format!("{m}:{z:.6}")).collect::<Vec<_>>()
    );
    let exact = norm_err <= 1e-12 && add_err <= 1e-12;
    r.verdict = if exact && growth < cfg.drift_limit && r.extreme.is_finite() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(r)
}

/// Whether every selected hard check passed.
pub fn hard_checks_pass(reports: &[AuditReport]) -> bool {
    reports.iter().filter(|r| r.hard).all(AuditReport::passed)
}
