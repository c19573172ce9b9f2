//! Generations `𝒢_k` of typed spectral generating bands.
//!
//! Order 0 holds `[V-2, V+2]` (type I, `t_{(0,1)} = x - V`) and `[-2, 2]`
//! (type III, `t_{(1,0)} = x`). With `a = a_{k+1}`, a band of order `k`
//! has children of order `k+1`:
//!
//! * type I → one type II band (generating trace `t_{(k+2,0)}`);
//! * type II → `a+1` type I bands in windows `I_{a+1,l}` and `a` type III
//!   bands in windows `I_{a,l}`;
//! * type III → `a` type I bands in `I_{a,l}` and `a-1` type III bands in
//!   `I_{a-1,l}`.
//!
//! Children of II/III parents are localized through the preimage of their
//! index window under the parent's monotone generating trace; the II child
//! of a type I band is reached through the intermediate traces
//! `t_{(k,2)}, …, t_{(k,a)}`, each localized in `I_{1,1}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::Float;

use crate::bisect::{bisect, stop_width, BisectFailure};
use crate::cfrac::ContinuedFraction;
use crate::error::{Error, Result};
use crate::tracemap::{chebyshev_f64, SpectralParams, TraceLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BandKind {
    I,
    II,
    III,
}

impl fmt::Display for BandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandKind::I => "I",
            BandKind::II => "II",
            BandKind::III => "III",
        })
    }
}

impl FromStr for BandKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(BandKind::I),
            "II" => Ok(BandKind::II),
            "III" => Ok(BandKind::III),
            _ => Err(Error::InvalidArgument(format!("unknown band kind `{s}`"))),
        }
    }
}

/// One symbol of a characteristic index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathSymbol {
    /// `i₀`: the order-0 band, either I or III.
    Root(BandKind),
    /// A type I child with index `j`.
    I(u32),
    /// The unique type II child of a type I band.
    II,
    /// A type III child with index `j`.
    III(u32),
}

impl PathSymbol {
    pub fn kind(&self) -> BandKind {
        match self {
            PathSymbol::Root(k) => *k,
            PathSymbol::I(_) => BandKind::I,
            PathSymbol::II => BandKind::II,
            PathSymbol::III(_) => BandKind::III,
        }
    }

    pub fn index(&self) -> u32 {
        match self {
            PathSymbol::I(j) | PathSymbol::III(j) => *j,
            _ => 0,
        }
    }
}

impl fmt::Display for PathSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathSymbol::Root(k) => write!(f, "{k}"),
            PathSymbol::I(j) => write!(f, "I{j}"),
            PathSymbol::II => f.write_str("II"),
            PathSymbol::III(j) => write!(f, "III{j}"),
        }
    }
}

/// Characteristic index `i₀ i₁ ⋯ i_n` of a band of order `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CharPath(Vec<PathSymbol>);

impl CharPath {
    pub fn root(kind: BandKind) -> Self {
        CharPath(vec![PathSymbol::Root(kind)])
    }

    pub fn symbols(&self) -> &[PathSymbol] {
        &self.0
    }

    /// Order of the band this path names.
    pub fn order(&self) -> u32 {
        self.0.len() as u32 - 1
    }

    pub fn child(&self, symbol: PathSymbol) -> Self {
        let mut v = self.0.clone();
        v.push(symbol);
        CharPath(v)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.len() <= 1 {
            None
        } else {
            Some(CharPath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn prefix(&self, order: u32) -> Self {
        CharPath(self.0[..=order as usize].to_vec())
    }

    /// Checks the type-transition rules and index ranges against `cf`.
    pub fn check_admissible(&self, cf: &ContinuedFraction) -> Result<()> {
        let bad = || Error::InadmissiblePath(self.to_string());
        let first = self.0.first().ok_or_else(bad)?;
        if !matches!(first, PathSymbol::Root(BandKind::I) | PathSymbol::Root(BandKind::III)) {
            return Err(bad());
        }
        for (k, pair) in self.0.windows(2).enumerate() {
            let a = cf.quotient(k + 1).ok_or_else(bad)?;
            let ok = match (pair[0].kind(), pair[1]) {
                (BandKind::I, PathSymbol::II) => true,
                (BandKind::II, PathSymbol::I(j)) => (1..=a + 1).contains(&j),
                (BandKind::II, PathSymbol::III(j)) => (1..=a).contains(&j),
                (BandKind::III, PathSymbol::I(j)) => (1..=a).contains(&j),
                (BandKind::III, PathSymbol::III(j)) => (1..a).contains(&j),
                _ => false,
            };
            if !ok {
                return Err(bad());
            }
        }
        Ok(())
    }
}

impl fmt::Display for CharPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for CharPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InadmissiblePath(s.to_string());
        let mut out = Vec::new();
        for (i, tok) in s.split('.').enumerate() {
            let sym = if i == 0 {
                PathSymbol::Root(tok.parse().map_err(|_| bad())?)
            } else if tok == "II" {
                PathSymbol::II
            } else if let Some(j) = tok.strip_prefix("III") {
                PathSymbol::III(j.parse().map_err(|_| bad())?)
            } else if let Some(j) = tok.strip_prefix('I') {
                PathSymbol::I(j.parse().map_err(|_| bad())?)
            } else {
                return Err(bad());
            };
            out.push(sym);
        }
        if out.is_empty() {
            return Err(bad());
        }
        Ok(CharPath(out))
    }
}

/// The window `I_{p,l}` around the zero `2cos(lπ/(p+1))` of `S_{p+1}`:
/// points `2cos((l+c)π/(p+1))` with `|c| ≤ 1/10` and `|S_{p+1}| ≤ 1/4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexWindow {
    pub p: u32,
    pub l: u32,
}

impl IndexWindow {
    pub const ARC_HALF_WIDTH: f64 = 0.1;
    pub const CHEBYSHEV_BOUND: f64 = 0.25;

    pub fn new(p: u32, l: u32) -> Self {
        assert!(p >= 1 && (1..=p).contains(&l), "window I_{{{p},{l}}} out of range");
        Self { p, l }
    }

    fn angle(&self, c: f64) -> f64 {
        (self.l as f64 + c) / (self.p as f64 + 1.0) * std::f64::consts::PI
    }

    /// `(θ₊, θ₋) = ((l - 1/10)π/(p+1), (l + 1/10)π/(p+1))`.
    pub fn arc(&self) -> (f64, f64) {
        (self.angle(-Self::ARC_HALF_WIDTH), self.angle(Self::ARC_HALF_WIDTH))
    }

    /// Trace values at the arc ends, ascending.
    pub fn trace_range(&self) -> (f64, f64) {
        let (th_lo, th_hi) = self.arc();
        (2.0 * th_hi.cos(), 2.0 * th_lo.cos())
    }

    pub fn center(&self) -> f64 {
        2.0 * self.angle(0.0).cos()
    }

    /// Offset `c` of `t = 2cos((l+c)π/(p+1))`; `None` outside `[-2, 2]`.
    pub fn offset(&self, t: f64) -> Option<f64> {
        if !(-2.0..=2.0).contains(&t) {
            return None;
        }
        let theta = (t / 2.0).acos();
        Some(theta * (self.p as f64 + 1.0) / std::f64::consts::PI - self.l as f64)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.contains_with_tol(t, 0.0)
    }

    /// Membership with both defining bounds relaxed by `tol`.
    pub fn contains_with_tol(&self, t: f64, tol: f64) -> bool {
        let Some(c) = self.offset(t) else {
            return false;
        };
        c.abs() <= Self::ARC_HALF_WIDTH + tol
            && chebyshev_f64(self.p + 1, t).0.abs() <= Self::CHEBYSHEV_BOUND + tol
    }

    /// The unique `l` with `t ∈ I_{p,l}`, if any.
    pub fn locate(p: u32, t: f64) -> Option<u32> {
        (1..=p).find(|&l| IndexWindow::new(p, l).contains(t))
    }
}

/// One spectral generating band.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub order: u32,
    pub kind: BandKind,
    /// Generating polynomial `t_{(level, power)}`.
    pub label: TraceLabel,
    pub lo: Float,
    pub hi: Float,
    /// Index `l` of the window the band was localized in; 0 for II bands
    /// and the order-0 bands.
    pub index_l: u32,
    /// `p` of that window; 0 when there is none.
    pub family_p: u32,
    pub path: CharPath,
    /// Position of the parent within generation `order - 1`.
    pub parent: Option<usize>,
}

impl Band {
    pub fn length(&self) -> Float {
        Float::with_val(self.lo.prec(), &self.hi - &self.lo)
    }

    pub fn length_f64(&self) -> f64 {
        self.length().to_f64()
    }

    pub fn ln_length(&self) -> f64 {
        self.length().ln().to_f64()
    }

    pub fn midpoint(&self) -> Float {
        Float::with_val(self.lo.prec(), &self.lo + &self.hi) / 2u32
    }

    /// `n` equispaced points from `lo` to `hi` inclusive.
    pub fn sample_points(&self, n: usize) -> Vec<Float> {
        sample_points(&self.lo, &self.hi, n)
    }

    pub fn contains_interval(&self, other: &Band) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn window(&self) -> Option<IndexWindow> {
        (self.family_p > 0).then(|| IndexWindow::new(self.family_p, self.index_l))
    }
}

pub fn sample_points(lo: &Float, hi: &Float, n: usize) -> Vec<Float> {
    let prec = lo.prec();
    let width = Float::with_val(prec, hi - lo);
    (0..n)
        .map(|i| {
            if n == 1 {
                return Float::with_val(prec, lo + hi) / 2u32;
            }
            let frac = Float::with_val(prec, &width * i as u32) / (n as u32 - 1);
            Float::with_val(prec, lo + &frac)
        })
        .collect()
}

/// What a parent band expects to contain at the next order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChildSlot {
    pub kind: BandKind,
    /// Window family `p`; 0 for the II child of a type I band.
    pub family_p: u32,
    pub l: u32,
    pub label: TraceLabel,
}

impl ChildSlot {
    pub fn symbol(&self) -> PathSymbol {
        match self.kind {
            BandKind::I => PathSymbol::I(self.l),
            BandKind::II => PathSymbol::II,
            BandKind::III => PathSymbol::III(self.l),
        }
    }
}

/// Child slots of `band` given `a_next = a_{k+1}` for a band of order `k`.
pub fn child_plan(band: &Band, a_next: u32) -> Vec<ChildSlot> {
    let k = band.order;
    let i_label = TraceLabel::new(k + 1, 1);
    let iii_label = TraceLabel::new(k + 2, 0);
    let family = |kind, p: u32, label| {
        (1..=p).map(move |l| ChildSlot {
            kind,
            family_p: p,
            l,
            label,
        })
    };
    match band.kind {
        BandKind::I => vec![ChildSlot {
            kind: BandKind::II,
            family_p: 0,
            l: 0,
            label: TraceLabel::new(k + 2, 0),
        }],
        BandKind::II => family(BandKind::I, a_next + 1, i_label)
            .chain(family(BandKind::III, a_next, iii_label))
            .collect(),
        BandKind::III => family(BandKind::I, a_next, i_label)
            .chain(family(BandKind::III, a_next - 1, iii_label))
            .collect(),
    }
}

/// The two order-0 bands `[V-2, V+2]` (I) and `[-2, 2]` (III).
pub fn roots(params: &SpectralParams) -> Result<Vec<Band>> {
    params.require_band_regime()?;
    let prec = params.precision();
    let v = params.coupling();
    Ok(vec![
        Band {
            order: 0,
            kind: BandKind::I,
            label: TraceLabel::new(0, 1),
            lo: Float::with_val(prec, v - 2u32),
            hi: Float::with_val(prec, v + 2u32),
            index_l: 0,
            family_p: 0,
            path: CharPath::root(BandKind::I),
            parent: None,
        },
        Band {
            order: 0,
            kind: BandKind::III,
            label: TraceLabel::new(1, 0),
            lo: Float::with_val(prec, -2),
            hi: Float::with_val(prec, 2),
            index_l: 0,
            family_p: 0,
            path: CharPath::root(BandKind::III),
            parent: None,
        },
    ])
}

/// Tolerances for band location.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationSettings {
    /// Endpoint bisection stops below this fraction of the parent length.
    pub bisect_rel_tol: f64,
    /// Coarser tolerance for the window preimages that only bracket a child.
    pub window_rel_tol: f64,
    /// Points of the single-crossing test on each located band.
    pub monotone_samples: usize,
    /// Points of the fallback scan when window bracketing fails.
    pub fallback_scan: usize,
}

impl Default for EnumerationSettings {
    fn default() -> Self {
        Self {
            bisect_rel_tol: 1e-30,
            window_rel_tol: 1e-12,
            monotone_samples: 17,
            fallback_scan: 1024,
        }
    }
}

/// Everything needed to evaluate generating traces and locate bands.
#[derive(Debug, Clone, Copy)]
pub struct Locator<'a> {
    pub quotients: &'a [u32],
    pub params: &'a SpectralParams,
    pub settings: &'a EnumerationSettings,
}

impl<'a> Locator<'a> {
    pub fn eval(&self, label: TraceLabel, x: &Float) -> Float {
        label
            .eval_value(self.quotients, x, self.params)
            .expect("labels built by the enumerator are valid")
    }

    pub fn eval_with_derivative(&self, label: TraceLabel, x: &Float) -> (Float, Float) {
        label
            .eval(self.quotients, x, self.params)
            .expect("labels built by the enumerator are valid")
    }

    fn solve_level(
        &self,
        label: TraceLabel,
        level: f64,
        lo: &Float,
        hi: &Float,
        width: &Float,
    ) -> std::result::Result<Float, BisectFailure> {
        let target = self.params.real(level);
        bisect(|x| self.eval(label, x) - &target, lo, hi, width)
    }

    /// Solves `parent(x) ∈ {t_lo, t_hi}` of the window inside `[lo, hi]`.
    fn window_bracket(
        &self,
        parent: TraceLabel,
        window: IndexWindow,
        lo: &Float,
        hi: &Float,
    ) -> std::result::Result<(Float, Float), BisectFailure> {
        let prec = self.params.precision();
        let scale = Float::with_val(prec, hi - lo);
        let width = stop_width(prec, self.settings.window_rel_tol, &scale);
        let (t_lo, t_hi) = window.trace_range();
        let a = self.solve_level(parent, t_lo, lo, hi, &width)?;
        let b = self.solve_level(parent, t_hi, lo, hi, &width)?;
        Ok(if a <= b { (a, b) } else { (b, a) })
    }

    /// Endpoints of the band of `child` inside `[lo, hi]` given `|child| > 2`
    /// with opposite signs at the two ends.
    fn band_in_bracket(
        &self,
        child: TraceLabel,
        lo: &Float,
        hi: &Float,
        parent_len: &Float,
        path: &CharPath,
    ) -> Result<Option<(Float, Float)>> {
        let g_lo = self.eval(child, lo);
        let g_hi = self.eval(child, hi);
        let outside = |g: &Float| *g > 2 || *g < -2;
        if !(outside(&g_lo) && outside(&g_hi)) || g_lo.is_sign_negative() == g_hi.is_sign_negative() {
            return Ok(None);
        }
        let prec = self.params.precision();
        let width = stop_width(prec, self.settings.bisect_rel_tol, parent_len);
        let level_lo = if g_lo.is_sign_negative() { -2.0 } else { 2.0 };
        let stall = |e| match e {
            BisectFailure::Stalled => Error::PrecisionExhausted { path: path.to_string() },
            BisectFailure::NoSignChange => Error::BracketFailure {
                path: path.to_string(),
                reason: "no sign change at band edge".into(),
            },
        };
        let e1 = self.solve_level(child, level_lo, lo, hi, &width).map_err(stall)?;
        let e2 = self.solve_level(child, -level_lo, lo, hi, &width).map_err(stall)?;
        let (a, b) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        if a >= b {
            return Ok(None);
        }
        Ok(Some((a, b)))
    }

    /// True if the derivative of `label` keeps one sign on `[lo, hi]`.
    pub fn is_monotone(&self, label: TraceLabel, lo: &Float, hi: &Float, samples: usize) -> bool {
        let signs: Vec<Option<bool>> = sample_points(lo, hi, samples)
            .iter()
            .map(|x| {
                let (_, d) = self.eval_with_derivative(label, x);
                (!d.is_zero() && d.is_finite()).then(|| d.is_sign_negative())
            })
            .collect();
        signs.iter().all(|s| s.is_some() && *s == signs[0])
    }

    /// Dense scan of `[lo, hi]` for the single band of `child`.
    fn scan_for_band(
        &self,
        child: TraceLabel,
        lo: &Float,
        hi: &Float,
        parent_len: &Float,
        path: &CharPath,
    ) -> Result<(Float, Float)> {
        let pts = sample_points(lo, hi, self.settings.fallback_scan + 1);
        let vals: Vec<Float> = pts.iter().map(|x| self.eval(child, x)).collect();
        let mut crossings = Vec::new();
        for i in 0..pts.len() - 1 {
            for level in [2.0, -2.0] {
                let a = Float::with_val(vals[i].prec(), &vals[i] - level);
                let b = Float::with_val(vals[i].prec(), &vals[i + 1] - level);
                if a.is_sign_negative() != b.is_sign_negative() {
                    crossings.push((i, level));
                }
            }
        }
        let failure = |reason: String| Error::BracketFailure {
            path: path.to_string(),
            reason,
        };
        if crossings.len() != 2 || crossings[0].1 == crossings[1].1 {
            return Err(failure(format!(
                "fallback scan found {} level crossings",
                crossings.len()
            )));
        }
        let prec = self.params.precision();
        let width = stop_width(prec, self.settings.bisect_rel_tol, parent_len);
        let mut ends = Vec::with_capacity(2);
        for (i, level) in crossings {
            let e = self
                .solve_level(child, level, &pts[i], &pts[i + 1], &width)
                .map_err(|_| Error::PrecisionExhausted { path: path.to_string() })?;
            ends.push(e);
        }
        ends.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        let hi_end = ends.pop().expect("two ends");
        let lo_end = ends.pop().expect("two ends");
        Ok((lo_end, hi_end))
    }

    /// Locates the band of `child` whose `parent`-trace values lie in
    /// `window`, inside the parent band `[lo, hi]`.
    pub fn locate_in_window(
        &self,
        parent: TraceLabel,
        lo: &Float,
        hi: &Float,
        window: IndexWindow,
        child: TraceLabel,
        path: &CharPath,
    ) -> Result<(Float, Float)> {
        let prec = self.params.precision();
        let parent_len = Float::with_val(prec, hi - lo);
        let bracket = self.window_bracket(parent, window, lo, hi).map_err(|_| Error::BracketFailure {
            path: path.to_string(),
            reason: format!("parent trace does not cross window I_{{{},{}}}", window.p, window.l),
        })?;
        if let Some((a, b)) = self.band_in_bracket(child, &bracket.0, &bracket.1, &parent_len, path)? {
            if self.is_monotone(child, &a, &b, self.settings.monotone_samples) {
                return Ok((a, b));
            }
        }
        log::debug!("window bracketing failed for {path}; falling back to scan");
        let (a, b) = self.scan_for_band(child, &bracket.0, &bracket.1, &parent_len, path)?;
        if !self.is_monotone(child, &a, &b, self.settings.monotone_samples) {
            return Err(Error::BracketFailure {
                path: path.to_string(),
                reason: "generating trace not monotone on located band".into(),
            });
        }
        Ok((a, b))
    }

    /// Intermediate bands `B_{(k,p)}`, `p = 2..=a`, inside a type I band of
    /// order `k` with generating trace `t_{(k,1)}`. The last entry is the
    /// interval of the type II child.
    pub fn added_rungs(&self, parent: &Band, a_next: u32) -> Result<Vec<(TraceLabel, Float, Float)>> {
        debug_assert_eq!(parent.kind, BandKind::I);
        let k = parent.label.level;
        let mut out: Vec<(TraceLabel, Float, Float)> = Vec::new();
        let mut cur = (parent.label, parent.lo.clone(), parent.hi.clone());
        for p in 1..a_next {
            let next = TraceLabel::new(k, p as i64 + 1);
            let path = parent.path.child(PathSymbol::II);
            let (lo, hi) = self.locate_in_window(cur.0, &cur.1, &cur.2, IndexWindow::new(1, 1), next, &path)?;
            cur = (next, lo, hi);
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Resolves one child slot of `parent`.
    pub fn locate_child(&self, parent: &Band, parent_index: usize, slot: &ChildSlot) -> Result<Band> {
        let path = parent.path.child(slot.symbol());
        let a_next = self.quotients[parent.order as usize];
        let (lo, hi) = match parent.kind {
            BandKind::I if a_next == 1 => (parent.lo.clone(), parent.hi.clone()),
            BandKind::I => {
                let rungs = self.added_rungs(parent, a_next)?;
                let (_, lo, hi) = rungs.into_iter().last().expect("a_next >= 2");
                (lo, hi)
            }
            BandKind::II | BandKind::III => self.locate_in_window(
                parent.label,
                &parent.lo,
                &parent.hi,
                IndexWindow::new(slot.family_p, slot.l),
                slot.label,
                &path,
            )?,
        };
        Ok(Band {
            order: parent.order + 1,
            kind: slot.kind,
            label: slot.label,
            lo,
            hi,
            index_l: slot.l,
            family_p: slot.family_p,
            path,
            parent: Some(parent_index),
        })
    }
}

/// Band counts `(n_I, n_II, n_III)` of one generation.
pub type KindCounts = (u64, u64, u64);

/// Counts predicted by the child rules, for orders `0..=n_max`.
pub fn predicted_counts(quotients: &[u32], n_max: u32) -> Vec<KindCounts> {
    let mut out = vec![(1u64, 0u64, 1u64)];
    for k in 0..n_max as usize {
        let a = quotients[k] as u64;
        let (i, ii, iii) = out[k];
        out.push(((a + 1) * ii + a * iii, i, a * ii + (a - 1) * iii));
    }
    out
}

/// The enumerated band hierarchy.
#[derive(Debug, Clone)]
pub struct BandTree {
    cf: ContinuedFraction,
    params: SpectralParams,
    settings: EnumerationSettings,
    quotients: Vec<u32>,
    generations: Vec<Vec<Band>>,
}

impl BandTree {
    /// Enumerates generations `𝒢_0..=𝒢_{n_max}`.
    pub fn enumerate(cf: &ContinuedFraction, params: &SpectralParams, n_max: u32) -> Result<Self> {
        Self::enumerate_with(cf, params, n_max, EnumerationSettings::default())
    }

    pub fn enumerate_with(
        cf: &ContinuedFraction,
        params: &SpectralParams,
        n_max: u32,
        settings: EnumerationSettings,
    ) -> Result<Self> {
        let mut tree = Self::from_generations(cf, params, settings, vec![roots(params)?])?;
        tree.extend_to(n_max)?;
        Ok(tree)
    }

    /// Rebuilds a tree from previously resolved generations (e.g. a cache).
    pub fn from_generations(
        cf: &ContinuedFraction,
        params: &SpectralParams,
        settings: EnumerationSettings,
        generations: Vec<Vec<Band>>,
    ) -> Result<Self> {
        params.require_band_regime()?;
        let depth = generations.len().max(1) as u32 - 1;
        let quotients = available_quotients(cf, depth + 2);
        Ok(Self {
            cf: cf.clone(),
            params: params.clone(),
            settings,
            quotients,
            generations,
        })
    }

    /// Adds generations until order `n_max` is present.
    pub fn extend_to(&mut self, n_max: u32) -> Result<()> {
        self.quotients = available_quotients(&self.cf, n_max + 2);
        if self.quotients.len() < n_max as usize {
            return Err(Error::TruncatedExpansion {
                index: n_max as usize,
                available: self.quotients.len(),
            });
        }
        while self.depth() < n_max {
            let next = self.next_generation()?;
            self.generations.push(next);
        }
        Ok(())
    }

    fn next_generation(&self) -> Result<Vec<Band>> {
        let loc = self.locator();
        let parents = self.generations.last().expect("order 0 present");
        let a_next = self.quotients[parents[0].order as usize];
        let children: Result<Vec<Vec<Band>>> = parents
            .par_iter()
            .enumerate()
            .map(|(i, parent)| {
                child_plan(parent, a_next)
                    .iter()
                    .map(|slot| loc.locate_child(parent, i, slot))
                    .collect()
            })
            .collect();
        Ok(children?.into_iter().flatten().collect())
    }

    pub fn locator(&self) -> Locator<'_> {
        Locator {
            quotients: &self.quotients,
            params: &self.params,
            settings: &self.settings,
        }
    }

    pub fn cf(&self) -> &ContinuedFraction {
        &self.cf
    }

    pub fn params(&self) -> &SpectralParams {
        &self.params
    }

    pub fn settings(&self) -> &EnumerationSettings {
        &self.settings
    }

    pub fn quotients(&self) -> &[u32] {
        &self.quotients
    }

    /// Deepest enumerated order.
    pub fn depth(&self) -> u32 {
        self.generations.len() as u32 - 1
    }

    pub fn generation(&self, order: u32) -> Result<&[Band]> {
        self.generations
            .get(order as usize)
            .map(Vec::as_slice)
            .ok_or(Error::OrderUnavailable(order))
    }

    pub fn generations(&self) -> &[Vec<Band>] {
        &self.generations
    }

    pub fn parent_of(&self, band: &Band) -> Option<&Band> {
        band.parent
            .map(|i| &self.generations[band.order as usize - 1][i])
    }

    /// `B_0 ⊃ B_1 ⊃ ⋯ ⊃ band`, ordered from order 0.
    pub fn ancestry<'a>(&'a self, band: &'a Band) -> Vec<&'a Band> {
        let mut chain = vec![band];
        let mut cur = band;
        while let Some(p) = self.parent_of(cur) {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        chain
    }

    pub fn find(&self, path: &CharPath) -> Option<&Band> {
        let gen = self.generations.get(path.order() as usize)?;
        gen.binary_search_by(|b| b.path.cmp(path)).ok().map(|i| &gen[i])
    }

    pub fn counts(&self) -> Vec<KindCounts> {
        self.generations
            .iter()
            .map(|g| {
                g.iter().fold((0, 0, 0), |(i, ii, iii), b| match b.kind {
                    BandKind::I => (i + 1, ii, iii),
                    BandKind::II => (i, ii + 1, iii),
                    BandKind::III => (i, ii, iii + 1),
                })
            })
            .collect()
    }

    /// Number of bands over all orders.
    pub fn len(&self) -> usize {
        self.generations.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn available_quotients(cf: &ContinuedFraction, n: u32) -> Vec<u32> {
    (1..=n as usize).map_while(|i| cf.quotient(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden24() -> (ContinuedFraction, SpectralParams) {
        (ContinuedFraction::golden_mean(), SpectralParams::new(24.0, 192).unwrap())
    }

    #[test]
    fn roots_at_v24() {
        let (_, p) = golden24();
        let r = roots(&p).unwrap();
        assert_eq!((r[0].lo.to_f64(), r[0].hi.to_f64()), (22.0, 26.0));
        assert_eq!((r[1].lo.to_f64(), r[1].hi.to_f64()), (-2.0, 2.0));
        assert_eq!(r[0].label, TraceLabel::new(0, 1));
        assert_eq!(r[1].label, TraceLabel::new(1, 0));
        let small = SpectralParams::new(20.0, 192).unwrap();
        assert!(matches!(roots(&small), Err(Error::CouplingTooSmall(_))));
    }

    #[test]
    fn plan_examples() {
        let (_, p) = golden24();
        let r = roots(&p).unwrap();
        let mut ii = r[1].clone();
        ii.kind = BandKind::II;
        let plan = child_plan(&ii, 2);
        assert_eq!(plan.iter().filter(|s| s.kind == BandKind::I).count(), 3);
        assert_eq!(plan.iter().filter(|s| s.kind == BandKind::III).count(), 2);
        assert!(plan.iter().filter(|s| s.kind == BandKind::I).all(|s| s.family_p == 3));
        let plan = child_plan(&r[1], 1);
        assert_eq!(plan.len(), 1);
        assert_eq!(plan[0].kind, BandKind::I);
        for a in 1..5 {
            let plan = child_plan(&r[0], a);
            assert_eq!(plan.len(), 1);
            assert_eq!(plan[0].kind, BandKind::II);
        }
    }

    #[test]
    fn first_type_i_child_is_the_quadratic_band() {
        let (cf, p) = golden24();
        let tree = BandTree::enumerate(&cf, &p, 1).unwrap();
        let g1 = tree.generation(1).unwrap();
        let i_band = g1.iter().find(|b| b.kind == BandKind::I).unwrap();
        // t_{(1,1)} = x² - 24x - 2; ends solve x² - 24x - 4 = 0 and x² - 24x = 0
        let expected_lo = (24.0 - 592f64.sqrt()) / 2.0;
        assert!((i_band.lo.to_f64() - expected_lo).abs() < 1e-15);
        assert!(i_band.hi.to_f64().abs() < 1e-40);
        let ii = g1.iter().find(|b| b.kind == BandKind::II).unwrap();
        assert_eq!((ii.lo.to_f64(), ii.hi.to_f64()), (22.0, 26.0));
    }

    #[test]
    fn golden_counts() {
        let (cf, p) = golden24();
        let tree = BandTree::enumerate(&cf, &p, 4).unwrap();
        assert_eq!(
            tree.counts(),
            vec![(1, 0, 1), (1, 1, 0), (2, 1, 1), (3, 2, 1), (5, 3, 2)]
        );
        assert_eq!(tree.counts(), predicted_counts(tree.quotients(), 4));
    }

    #[test]
    fn path_round_trip_and_admissibility() {
        let (cf, p) = golden24();
        let tree = BandTree::enumerate(&cf, &p, 4).unwrap();
        for band in tree.generation(4).unwrap() {
            let parsed: CharPath = band.path.to_string().parse().unwrap();
            assert_eq!(parsed, band.path);
            band.path.check_admissible(&cf).unwrap();
            assert_eq!(tree.find(&band.path), Some(band));
        }
        let bad: CharPath = "I.I1".parse().unwrap();
        assert!(bad.check_admissible(&cf).is_err());
        let bad: CharPath = "III.III1".parse().unwrap();
        assert!(bad.check_admissible(&cf).is_err());
    }

    #[test]
    fn windows_are_disjoint_and_hold_zeros() {
        for p in 1..7 {
            let ws: Vec<_> = (1..=p).map(|l| IndexWindow::new(p, l)).collect();
            for w in &ws {
                assert!(w.contains(w.center()));
                assert!(chebyshev_f64(p + 1, w.center()).0.abs() < 1e-12);
            }
            for (i, a) in ws.iter().enumerate() {
                for b in &ws[i + 1..] {
                    let (alo, ahi) = a.trace_range();
                    let (blo, bhi) = b.trace_range();
                    assert!(ahi < blo || bhi < alo);
                }
            }
        }
        assert_eq!(IndexWindow::locate(1, 0.1), Some(1));
        assert_eq!(IndexWindow::locate(1, 0.3), None);
    }

    #[test]
    fn silver_and_mixed_frequencies_enumerate() {
        let p = SpectralParams::new(24.0, 192).unwrap();
        for cf in [
            ContinuedFraction::periodic(vec![2]).unwrap(),
            ContinuedFraction::periodic(vec![3, 1]).unwrap(),
        ] {
            let tree = BandTree::enumerate(&cf, &p, 4).unwrap();
            assert_eq!(tree.counts(), predicted_counts(tree.quotients(), 4));
            for gen in tree.generations().iter().skip(1) {
                for b in gen {
                    let parent = tree.parent_of(b).unwrap();
                    assert!(parent.contains_interval(b));
                    assert!(b.lo < b.hi);
                }
            }
        }
    }
}
