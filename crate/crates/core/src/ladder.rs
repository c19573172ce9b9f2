//! Initial and modified ladders along a characteristic path.
//!
//! The initial ladder of a band `B_n` is its chain of ancestors
//! `B_n ⊂ ⋯ ⊂ B_0 ⊂ B_{-1}`. The modified ladder collapses a type I rung
//! with `a_{i+1} = 1` and its identical II child into one rung, and inserts
//! the intermediate bands `B_{(i,p)}`, `2 ≤ p ≤ a_{i+1}-1`, after a type I
//! rung with `a_{i+1} > 2`. Consecutive generating traces then satisfy
//!
//! `ĥ_{i+1} = z_±(ĥ_i, ĥ_{i-1}) S_{p_i+1}(ĥ_i) - ĥ_{i-1} S_{p_i}(ĥ_i)`.

use rug::float::Special;
use rug::Float;

use crate::bandtree::{Band, BandKind, BandTree, CharPath, IndexWindow};
use crate::error::{Error, Result};
use crate::tracemap::{chebyshev, chebyshev_f64, z_branch_unchecked, Branch, TraceLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RungKind {
    /// The order −1 band `σ_{(0,0)}`, `ĥ ≡ 2`.
    Root,
    Initial(BandKind),
    /// A type I band with `a_{k+1} = 1` standing in for itself and its II
    /// child. Entered as type I, left as type II of order `k+1`.
    Merged,
    /// `B_{(k,p)}` between a type I band and its II child.
    Added { power: u32 },
}

impl RungKind {
    /// Type seen by the transition into this rung.
    fn incoming(&self) -> Option<BandKind> {
        match self {
            RungKind::Initial(k) => Some(*k),
            RungKind::Merged => Some(BandKind::I),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rung {
    /// Band order; −1 for the root.
    pub order: i32,
    pub kind: RungKind,
    pub label: TraceLabel,
    pub lo: Float,
    pub hi: Float,
}

impl Rung {
    pub fn midpoint(&self) -> Float {
        Float::with_val(self.lo.prec(), &self.lo + &self.hi) / 2u32
    }
}

#[derive(Debug, Clone)]
pub struct Ladder {
    pub path: CharPath,
    /// Initial rungs `B_0, …, B_n` (the root is implicit).
    pub initial: Vec<Band>,
    /// Modified rungs `B̂_0 = σ_{(0,0)}, …, B̂_m = B_n`.
    pub rungs: Vec<Rung>,
    /// `p_i` for `0 < i < m`, stored at index `i - 1`.
    pub p_seq: Vec<u32>,
    /// Window index of `ĥ_i(B̂_{i+1})` for `0 < i < m`, at index `i - 1`;
    /// `None` when no window `I_{p_i,l}` contains the samples.
    pub l_seq: Vec<Option<u32>>,
    pub h_labels: Vec<TraceLabel>,
}

impl Ladder {
    /// `m`, the index of the deepest rung.
    pub fn m(&self) -> usize {
        self.rungs.len() - 1
    }

    /// `p_i` for `0 < i < m`.
    pub fn p(&self, i: usize) -> u32 {
        self.p_seq[i - 1]
    }

    pub fn l(&self, i: usize) -> Option<u32> {
        self.l_seq[i - 1]
    }

    pub fn deepest(&self) -> &Rung {
        self.rungs.last().expect("ladder has rungs")
    }
}

fn root_rung(prec: u32) -> Rung {
    Rung {
        order: -1,
        kind: RungKind::Root,
        label: TraceLabel::new(0, 0),
        lo: Float::with_val(prec, Special::NegInfinity),
        hi: Float::with_val(prec, Special::Infinity),
    }
}

fn band_rung(band: &Band, kind: RungKind) -> Rung {
    Rung {
        order: band.order as i32,
        kind,
        label: band.label,
        lo: band.lo.clone(),
        hi: band.hi.clone(),
    }
}

/// `p_i` for the step from `cur` to `next`.
fn p_value(cur: &Rung, next: &Rung, quotients: &[u32]) -> Result<u32> {
    let bad = || Error::InvalidArgument(format!("no p-value for {:?} -> {:?}", cur.kind, next.kind));
    let next_kind = next.kind.incoming();
    let (outgoing, order) = match cur.kind {
        RungKind::Initial(BandKind::I) | RungKind::Added { .. } => return Ok(1),
        RungKind::Merged => (BandKind::II, cur.order + 1),
        RungKind::Initial(k) => (k, cur.order),
        RungKind::Root => return Err(bad()),
    };
    let a = quotients[order as usize];
    match (outgoing, next_kind) {
        (BandKind::III, Some(BandKind::I)) => Ok(a),
        (BandKind::III, Some(BandKind::III)) => Ok(a - 1),
        (BandKind::II, Some(BandKind::I)) => Ok(a + 1),
        (BandKind::II, Some(BandKind::III)) => Ok(a),
        _ => Err(bad()),
    }
}

/// Builds the modified ladder of the band named by `path`.
pub fn build_ladder(path: &CharPath, tree: &BandTree) -> Result<Ladder> {
    path.check_admissible(tree.cf())?;
    let n = path.order();
    if n > tree.depth() {
        return Err(Error::OrderUnavailable(n));
    }
    let initial: Vec<Band> = (0..=n)
        .map(|j| {
            tree.find(&path.prefix(j))
                .cloned()
                .ok_or_else(|| Error::InadmissiblePath(path.to_string()))
        })
        .collect::<Result<_>>()?;
    let quotients = tree.quotients();
    let loc = tree.locator();
    let mut rungs = vec![root_rung(tree.params().precision())];
    let mut skip_next = false;
    for (j, band) in initial.iter().enumerate() {
        if std::mem::take(&mut skip_next) {
            continue;
        }
        let last = j as u32 == n;
        if band.kind != BandKind::I || last {
            rungs.push(band_rung(band, RungKind::Initial(band.kind)));
            continue;
        }
        let a = quotients[j];
        match a {
            1 => {
                rungs.push(band_rung(band, RungKind::Merged));
                skip_next = true;
            }
            2 => rungs.push(band_rung(band, RungKind::Initial(BandKind::I))),
            _ => {
                rungs.push(band_rung(band, RungKind::Initial(BandKind::I)));
                let added = loc.added_rungs(band, a)?;
                for (label, lo, hi) in added.into_iter().take(a as usize - 2) {
                    rungs.push(Rung {
                        order: j as i32,
                        kind: RungKind::Added {
                            power: label.power as u32,
                        },
                        label,
                        lo,
                        hi,
                    });
                }
            }
        }
    }
    let m = rungs.len() - 1;
    let mut p_seq = Vec::with_capacity(m.saturating_sub(1));
    let mut l_seq = Vec::with_capacity(m.saturating_sub(1));
    for i in 1..m {
        let p = p_value(&rungs[i], &rungs[i + 1], quotients)?;
        p_seq.push(p);
        l_seq.push(locate_index(&loc, &rungs[i], &rungs[i + 1], p));
    }
    let h_labels = rungs.iter().map(|r| r.label).collect();
    Ok(Ladder {
        path: path.clone(),
        initial,
        rungs,
        p_seq,
        l_seq,
        h_labels,
    })
}

fn locate_index(loc: &crate::bandtree::Locator<'_>, cur: &Rung, next: &Rung, p: u32) -> Option<u32> {
    let t = loc.eval(cur.label, &next.midpoint()).to_f64();
    if let Some(l) = IndexWindow::locate(p, t) {
        return Some(l);
    }
    let mut votes = vec![0usize; p as usize + 1];
    let pts = crate::bandtree::sample_points(&next.lo, &next.hi, 7);
    for x in &pts[1..6] {
        let t = loc.eval(cur.label, x).to_f64();
        if let Some(l) = IndexWindow::locate(p, t) {
            votes[l as usize] += 1;
        }
    }
    let (best, &count) = votes.iter().enumerate().max_by_key(|(_, c)| **c)?;
    (count >= 3).then_some(best as u32)
}

fn eval_rung(tree: &BandTree, rung: &Rung, x: &Float) -> (Float, Float) {
    tree.locator().eval_with_derivative(rung.label, x)
}

/// `|ĥ'_{i+1}(x) / ĥ'_i(x)|` for `0 < i < m`.
pub fn rung_ratio(ladder: &Ladder, tree: &BandTree, i: usize, x: &Float) -> Result<Float> {
    let (_, d_i) = eval_rung(tree, &ladder.rungs[i], x);
    let (_, d_next) = eval_rung(tree, &ladder.rungs[i + 1], x);
    if d_i.is_zero() {
        return Err(Error::ZeroDerivative { rung: i });
    }
    Ok(Float::with_val(x.prec(), d_next / d_i).abs())
}

/// Bounds `[(V-8)(p+1)/3, (V+8)(p+1)³/4]` on the rung ratio.
pub fn ratio_bounds(coupling: f64, p: u32) -> (f64, f64) {
    let q = p as f64 + 1.0;
    ((coupling - 8.0) * q / 3.0, (coupling + 8.0) * q.powi(3) / 4.0)
}

/// Relative residual of the ladder recursion at rung `i`, `0 < i < m`,
/// minimized over the branch of `z_±`.
pub fn closure_residual(ladder: &Ladder, tree: &BandTree, i: usize, x: &Float) -> f64 {
    let loc = tree.locator();
    let prev = loc.eval(ladder.rungs[i - 1].label, x);
    let cur = loc.eval(ladder.rungs[i].label, x);
    let next = loc.eval(ladder.rungs[i + 1].label, x);
    let p = ladder.p(i);
    let s_p1 = chebyshev(p + 1, &cur).value;
    let s_p = chebyshev(p, &cur).value;
    let prec = x.prec();
    [Branch::Plus, Branch::Minus]
        .into_iter()
        .map(|b| {
            let z = z_branch_unchecked(&cur, &prev, tree.params().coupling(), b).value;
            let lead = Float::with_val(prec, &z * &s_p1);
            let tail = Float::with_val(prec, &prev * &s_p);
            let pred = Float::with_val(prec, &lead - &tail);
            let scale = [lead.to_f64().abs(), tail.to_f64().abs(), next.to_f64().abs(), 1.0]
                .into_iter()
                .fold(0.0, f64::max);
            (Float::with_val(prec, &pred - &next).abs().to_f64()) / scale
        })
        .fold(f64::INFINITY, f64::min)
}

/// `|ĥ_i(x) - ĥ_i(y)| / (3^{-(m-i)} |ĥ_m(x) - ĥ_m(y)|)`; at most 1 when
/// the ladder contracts as expected.
pub fn contraction_ratio(ladder: &Ladder, tree: &BandTree, i: usize, x: &Float, y: &Float) -> f64 {
    let loc = tree.locator();
    let m = ladder.m();
    let diff = |label| {
        let d = loc.eval(label, x) - loc.eval(label, y);
        d.abs().to_f64()
    };
    let top = diff(ladder.rungs[i].label);
    let bottom = diff(ladder.rungs[m].label) * 3f64.powi(-((m - i) as i32));
    if bottom == 0.0 {
        if top == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        top / bottom
    }
}

/// Which window inequalities fail at `t`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WindowBoundViolations {
    pub s_next: bool,
    pub s_cur: bool,
    pub ds_next: bool,
    pub ds_cur: bool,
}

impl WindowBoundViolations {
    pub fn any(&self) -> bool {
        self.s_next || self.s_cur || self.ds_next || self.ds_cur
    }
}

/// For `t ∈ I_{p,l}`: `|S_{p+1}| ≤ 1/4`, `|S_p| ≤ 5/4`,
/// `(p+1)/3 ≤ |S'_{p+1}| ≤ (p+1)³/4` and `|S'_p| ≤ 2|S'_{p+1}|`.
pub fn window_bounds(p: u32, t: f64) -> WindowBoundViolations {
    let (s1, ds1) = chebyshev_f64(p + 1, t);
    let (s0, ds0) = chebyshev_f64(p, t);
    let q = p as f64 + 1.0;
    WindowBoundViolations {
        s_next: s1.abs() > 0.25,
        s_cur: s0.abs() > 1.25,
        ds_next: ds1.abs() < q / 3.0 || ds1.abs() > q.powi(3) / 4.0,
        ds_cur: ds0.abs() > 2.0 * ds1.abs(),
    }
}

/// `samples` points of `I_{p,l}` spread over the arc, in ascending `c`.
pub fn window_samples(window: IndexWindow, samples: usize) -> Vec<f64> {
    let q = window.p as f64 + 1.0;
    (0..samples)
        .map(|i| {
            let c = -IndexWindow::ARC_HALF_WIDTH
                + 2.0 * IndexWindow::ARC_HALF_WIDTH * i as f64 / (samples.max(2) - 1) as f64;
            2.0 * ((window.l as f64 + c) / q * std::f64::consts::PI).cos()
        })
        .filter(|&t| window.contains(t))
        .collect()
}

/// Convenience: ladder of every band in generation `order`.
pub fn ladders_at(tree: &BandTree, order: u32) -> Result<Vec<Ladder>> {
    use rayon::prelude::*;
    tree.generation(order)?
        .par_iter()
        .map(|b| build_ladder(&b.path, tree))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfrac::ContinuedFraction;
    use crate::tracemap::SpectralParams;

    fn tree(cf: ContinuedFraction, n: u32) -> BandTree {
        BandTree::enumerate(&cf, &SpectralParams::new(24.0, 192).unwrap(), n).unwrap()
    }

    #[test]
    fn golden_ladders_merge_type_i_rungs() {
        let t = tree(ContinuedFraction::golden_mean(), 6);
        for ladder in ladders_at(&t, 6).unwrap() {
            assert!(ladder.p_seq.iter().all(|p| (1..=2).contains(p)));
            for w in ladder.rungs.windows(2) {
                assert!(!matches!(
                    (w[0].kind, w[1].kind),
                    (RungKind::Initial(BandKind::I), RungKind::Initial(BandKind::II))
                        | (RungKind::Merged, RungKind::Initial(BandKind::II))
                ));
            }
            assert!(ladder.m() >= ((ladder.path.order() + 1) / 2) as usize);
        }
    }

    #[test]
    fn large_quotient_inserts_rungs() {
        let t = tree(ContinuedFraction::periodic(vec![3]).unwrap(), 3);
        let band = t
            .generation(1)
            .unwrap()
            .iter()
            .find(|b| b.kind == BandKind::II)
            .unwrap();
        let ladder = build_ladder(&band.path, &t).unwrap();
        let kinds: Vec<_> = ladder.rungs.iter().map(|r| r.kind).collect();
        assert_eq!(
            kinds,
            vec![
                RungKind::Root,
                RungKind::Initial(BandKind::I),
                RungKind::Added { power: 2 },
                RungKind::Initial(BandKind::II),
            ]
        );
        assert_eq!(ladder.p_seq, vec![1, 1]);
    }

    #[test]
    fn ladder_recursion_closes() {
        for cf in [
            ContinuedFraction::golden_mean(),
            ContinuedFraction::periodic(vec![3, 1]).unwrap(),
        ] {
            let t = tree(cf, 5);
            for ladder in ladders_at(&t, 5).unwrap() {
                let x = ladder.deepest().midpoint();
                for i in 1..ladder.m() {
                    let r = closure_residual(&ladder, &t, i, &x);
                    assert!(r < 1e-15, "{} rung {i}: {r:e}", ladder.path);
                }
            }
        }
    }

    #[test]
    fn ratios_within_bounds_and_indices_found() {
        let t = tree(ContinuedFraction::golden_mean(), 6);
        for ladder in ladders_at(&t, 6).unwrap() {
            let x = ladder.deepest().midpoint();
            for i in 1..ladder.m() {
                let r = rung_ratio(&ladder, &t, i, &x).unwrap().to_f64();
                let (lo, hi) = ratio_bounds(24.0, ladder.p(i));
                assert!(lo <= r && r <= hi, "{} rung {i}: {r}", ladder.path);
                assert!(ladder.l(i).is_some());
                assert!(contraction_ratio(&ladder, &t, i, &ladder.deepest().lo, &ladder.deepest().hi) <= 1.0);
            }
        }
    }

    #[test]
    fn window_bounds_hold() {
        for p in 1..6 {
            for l in 1..=p {
                let w = IndexWindow::new(p, l);
                let ts = window_samples(w, 1000);
                assert!(!ts.is_empty());
                assert!(ts.iter().all(|&t| !window_bounds(p, t).any()));
            }
        }
    }
}
