//! Trace-map kernel: `t_{(k,p)}(x) = tr M_{k-1}(x) M_k(x)^p` and its
//! energy derivative, evaluated through the `(u, v, w)` recursion.
//!
//! The level-k state holds `u = tr M_{k-1}`, `v = tr M_k` and
//! `w = tr M_{k-1} M_k`. Advancing with quotient `a` uses
//! `A^n = S_n(tr A) A - S_{n-1}(tr A) I`, so no matrix product over
//! `q_k` sites is ever formed.

use rug::ops::NegAssign;
use rug::Float;

use crate::cfrac::ContinuedFraction;
use crate::error::{Error, Result};

/// Working real type.
pub type Real = Float;

/// Coupling `V` and working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralParams {
    coupling: Float,
    precision: u32,
}

impl SpectralParams {
    pub const DEFAULT_PRECISION: u32 = 192;
    pub const MIN_PRECISION: u32 = 64;
    /// Band machinery needs `V` strictly above this.
    pub const MIN_BAND_COUPLING: f64 = 20.0;

    pub fn new(coupling: f64, precision: u32) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::InvalidCoupling(coupling.to_string()));
        }
        if precision < Self::MIN_PRECISION {
            return Err(Error::InvalidPrecision(precision));
        }
        Ok(Self {
            coupling: Float::with_val(precision, coupling),
            precision,
        })
    }

    /// Parses `V` from a decimal string at the working precision, so that
    /// e.g. `24.1` is not first rounded to binary64.
    pub fn from_decimal(coupling: &str, precision: u32) -> Result<Self> {
        if precision < Self::MIN_PRECISION {
            return Err(Error::InvalidPrecision(precision));
        }
        let parsed = Float::parse(coupling.trim())
            .map_err(|_| Error::InvalidCoupling(coupling.to_string()))?;
        let v = Float::with_val(precision, parsed);
        if !(v.is_finite() && v > 0) {
            return Err(Error::InvalidCoupling(coupling.to_string()));
        }
        Ok(Self {
            coupling: v,
            precision,
        })
    }

    pub fn coupling(&self) -> &Float {
        &self.coupling
    }

    pub fn coupling_f64(&self) -> f64 {
        self.coupling.to_f64()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        Self {
            coupling: Float::with_val(precision, &self.coupling),
            precision,
        }
    }

    pub fn real(&self, value: f64) -> Float {
        Float::with_val(self.precision, value)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.precision)
    }

    /// Fails with `CouplingTooSmall` unless `V > 20`.
    pub fn require_band_regime(&self) -> Result<()> {
        if self.coupling > Self::MIN_BAND_COUPLING {
            Ok(())
        } else {
            Err(Error::CouplingTooSmall(self.coupling_f64()))
        }
    }

    /// Bits needed to resolve order-`order` bands: lengths shrink roughly
    /// like `(cV)^{-order}`, plus headroom for the bisection tolerance.
    pub fn required_precision(coupling: f64, order: u32) -> u32 {
        let per_level = (coupling * 8.0).log2();
        ((order as f64 + 1.0) * per_level).ceil() as u32 + 96
    }
}

/// `S_p(t)` and `S'_p(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevEval {
    pub p: u32,
    pub value: Float,
    pub derivative: Float,
}

/// `S_0..=S_{p_max}` with derivatives, by the three-term recurrence
/// `S_{p+1} = t S_p - S_{p-1}` and its derivative
/// `S'_{p+1} = S_p + t S'_p - S'_{p-1}`.
fn chebyshev_table(p_max: u32, t: &Float) -> Vec<(Float, Float)> {
    let prec = t.prec();
    let mut out = Vec::with_capacity(p_max as usize + 1);
    out.push((Float::new(prec), Float::new(prec)));
    if p_max == 0 {
        return out;
    }
    out.push((Float::with_val(prec, 1), Float::new(prec)));
    for p in 1..p_max as usize {
        let (s, ds) = &out[p];
        let (s_prev, ds_prev) = &out[p - 1];
        let s_next = Float::with_val(prec, t * s) - s_prev;
        let ds_next = Float::with_val(prec, t * ds) + s - ds_prev;
        out.push((s_next, ds_next));
    }
    out
}

pub fn chebyshev(p: u32, t: &Float) -> ChebyshevEval {
    let (value, derivative) = chebyshev_table(p, t).pop().expect("non-empty table");
    ChebyshevEval {
        p,
        value,
        derivative,
    }
}

/// Binary64 version of [`chebyshev`], used for window arithmetic.
pub fn chebyshev_f64(p: u32, t: f64) -> (f64, f64) {
    if p == 0 {
        return (0.0, 0.0);
    }
    let (mut s_prev, mut s) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for _ in 1..p {
        let s_next = t * s - s_prev;
        let d_next = s + t * d - d_prev;
        s_prev = s;
        s = s_next;
        d_prev = d;
        d = d_next;
    }
    (s, d)
}

/// The trace triple at one energy and level, with x-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceState {
    pub level: u32,
    pub x: Float,
    /// `t_{(k,0)} = tr M_{k-1}`
    pub u: Float,
    /// `t_{(k+1,0)} = tr M_k`
    pub v: Float,
    /// `t_{(k,1)} = tr M_{k-1} M_k`
    pub w: Float,
    pub du: Float,
    pub dv: Float,
    pub dw: Float,
}

/// `a S_n - b S_{n-1}` with derivative, where `(a, da)` and `(b, db)` are
/// trace values and the Chebyshev polynomials are evaluated at `v`.
fn combine(
    a: (&Float, &Float),
    b: (&Float, &Float),
    s_n: &(Float, Float),
    s_n1: &(Float, Float),
    dv: &Float,
) -> (Float, Float) {
    let prec = a.0.prec();
    let value = Float::with_val(prec, a.0 * &s_n.0 - b.0 * &s_n1.0);
    // d/dx [a S_n(v) - b S_{n-1}(v)]
    let chain_a = Float::with_val(prec, a.0 * &s_n.1) * dv;
    let chain_b = Float::with_val(prec, b.0 * &s_n1.1) * dv;
    let mut deriv = Float::with_val(prec, a.1 * &s_n.0 - b.1 * &s_n1.0);
    deriv += chain_a;
    deriv -= chain_b;
    (value, deriv)
}

impl TraceState {
    /// Level-0 state: `u = 2`, `v = x`, `w = x - V`.
    pub fn seed(x: &Float, params: &SpectralParams) -> Self {
        let prec = params.precision();
        let x = Float::with_val(prec, x);
        Self {
            level: 0,
            u: Float::with_val(prec, 2),
            v: x.clone(),
            w: Float::with_val(prec, &x - params.coupling()),
            du: Float::new(prec),
            dv: Float::with_val(prec, 1),
            dw: Float::with_val(prec, 1),
            x,
        }
    }

    /// One renormalization step `M_{k+1} = M_{k-1} M_k^a`.
    pub fn advance(&self, a: u32) -> Self {
        assert!(a >= 1, "partial quotients are >= 1");
        let table = chebyshev_table(a + 1, &self.v);
        let a = a as usize;
        let w = (&self.w, &self.dw);
        let u = (&self.u, &self.du);
        let (v_next, dv_next) = combine(w, u, &table[a], &table[a - 1], &self.dv);
        let (w_next, dw_next) = combine(w, u, &table[a + 1], &table[a], &self.dv);
        Self {
            level: self.level + 1,
            x: self.x.clone(),
            u: self.v.clone(),
            du: self.dv.clone(),
            v: v_next,
            dv: dv_next,
            w: w_next,
            dw: dw_next,
        }
    }

    /// `t_{(k,p)}` at this state's level for `p ≥ 0`, via
    /// `t_{(k,p)} = w S_p(v) - u S_{p-1}(v)`.
    pub fn trace(&self, p: u32) -> (Float, Float) {
        match p {
            0 => (self.u.clone(), self.du.clone()),
            1 => (self.w.clone(), self.dw.clone()),
            _ => {
                let table = chebyshev_table(p, &self.v);
                let p = p as usize;
                combine(
                    (&self.w, &self.dw),
                    (&self.u, &self.du),
                    &table[p],
                    &table[p - 1],
                    &self.dv,
                )
            }
        }
    }

    /// `t_{(k,-1)} = tr M_{k-1} M_k^{-1} = u v - w`.
    pub fn trace_inverse(&self) -> (Float, Float) {
        let prec = self.u.prec();
        let value = Float::with_val(prec, &self.u * &self.v - &self.w);
        let mut deriv = Float::with_val(prec, &self.du * &self.v + &self.u * &self.dv);
        deriv -= &self.dw;
        (value, deriv)
    }
}

/// Advances the seed through `quotients[0..level]` (`a₁..a_level`).
pub fn state_at(quotients: &[u32], level: u32, x: &Float, params: &SpectralParams) -> TraceState {
    let mut state = TraceState::seed(x, params);
    for &a in &quotients[..level as usize] {
        state = state.advance(a);
    }
    state
}

/// Identifies the generating polynomial `t_{(level, power)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceLabel {
    pub level: u32,
    pub power: i64,
}

impl TraceLabel {
    pub const fn new(level: u32, power: i64) -> Self {
        Self { level, power }
    }

    /// Number of quotients `a₁..a_j` needed to evaluate this label.
    pub fn quotients_needed(&self) -> usize {
        match self.power {
            0 => self.level.saturating_sub(1) as usize,
            _ => self.level as usize,
        }
    }

    /// `(t, dt/dx)` at `x`. `quotients` must hold at least
    /// [`quotients_needed`](Self::quotients_needed) entries.
    pub fn eval(&self, quotients: &[u32], x: &Float, params: &SpectralParams) -> Result<(Float, Float)> {
        let TraceLabel { level, power } = *self;
        match power {
            p if p < -1 => Err(Error::InvalidLabel { level, power }),
            0 if level >= 1 => {
                // t_{(k,0)} = tr M_{k-1} is the v of level k-1
                let s = state_at(quotients, level - 1, x, params);
                Ok((s.v, s.dv))
            }
            -1 if level >= 1 => {
                let a_k = quotients[level as usize - 1];
                let s = state_at(quotients, level - 1, x, params);
                Ok(s.trace(a_k - 1))
            }
            -1 => Ok(TraceState::seed(x, params).trace_inverse()),
            p => Ok(state_at(quotients, level, x, params).trace(p as u32)),
        }
    }

    pub fn eval_value(&self, quotients: &[u32], x: &Float, params: &SpectralParams) -> Result<Float> {
        self.eval(quotients, x, params).map(|(t, _)| t)
    }
}

impl std::fmt::Display for TraceLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.level, self.power)
    }
}

/// `t_{(k,p)}(x)` and its derivative.
pub fn trace_at(
    cf: &ContinuedFraction,
    params: &SpectralParams,
    k: u32,
    p: i64,
    x: &Float,
) -> Result<(Float, Float)> {
    let label = TraceLabel::new(k, p);
    if p < -1 {
        return Err(Error::InvalidLabel { level: k, power: p });
    }
    let quotients = cf.quotients(label.quotients_needed().max(k as usize))?;
    label.eval(&quotients, x, params)
}

/// Fricke–Vogt invariant `Λ(x,y,z) = x² + y² + z² - xyz - 4`.
pub fn fricke(x: &Float, y: &Float, z: &Float) -> Float {
    let prec = x.prec().max(y.prec()).max(z.prec());
    let mut acc = Float::with_val(prec, x * x + y * y);
    acc += Float::with_val(prec, z * z);
    let xyz = Float::with_val(prec, x * y) * z;
    acc -= xyz;
    acc - 4
}

/// `|Λ(x,y,z) - V²|` relative to the largest term of the sum, so that
/// off-spectrum magnitudes do not mask loss of precision.
pub fn fricke_residual(x: &Float, y: &Float, z: &Float, coupling: &Float) -> f64 {
    let prec = x.prec();
    let lambda = fricke(x, y, z);
    let v2 = Float::with_val(prec, coupling * coupling);
    let diff = Float::with_val(prec, &lambda - &v2).abs();
    let xyz = Float::with_val(prec, x * y) * z;
    let scale = [
        Float::with_val(prec, x * x),
        Float::with_val(prec, y * y),
        Float::with_val(prec, z * z),
        xyz.abs(),
        v2,
    ]
    .into_iter()
    .fold(Float::with_val(prec, 1), |m, t| if t > m { t } else { m });
    (diff / scale).to_f64()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// `z_±(x, y, V)` with first partials `z₁ = ∂z/∂x`, `z₂ = ∂z/∂y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZBranch {
    pub value: Float,
    pub dz_dx: Float,
    pub dz_dy: Float,
}

/// The two solutions in `z` of `Λ(x, y, z) = V²`:
/// `z_± = xy/2 ± ½√(4V² + (4-x²)(4-y²))`. Requires `|x|, |y| ≤ 2`.
pub fn z_branch(x: &Float, y: &Float, params: &SpectralParams, branch: Branch) -> Result<ZBranch> {
    for t in [x, y] {
        if Float::with_val(t.prec(), t.abs_ref()) > 2 {
            return Err(Error::DomainViolation(t.to_f64().abs().to_string()));
        }
    }
    Ok(z_branch_unchecked(x, y, params.coupling(), branch))
}

/// [`z_branch`] without the domain check, for ladder residual matching
/// where rounding can push a trace a few ulps past ±2.
pub fn z_branch_unchecked(x: &Float, y: &Float, coupling: &Float, branch: Branch) -> ZBranch {
    let prec = x.prec();
    let four_minus_x2 = Float::with_val(prec, 4) - Float::with_val(prec, x * x);
    let four_minus_y2 = Float::with_val(prec, 4) - Float::with_val(prec, y * y);
    let mut disc: Float = Float::with_val(prec, coupling * coupling) * 4u32;
    disc += Float::with_val(prec, &four_minus_x2 * &four_minus_y2);
    let root = disc.sqrt();
    let mut half_root = Float::with_val(prec, &root / 2);
    // ∂/∂x ½√D = -x (4-y²) / (2√D)
    let mut droot_dx = Float::with_val(prec, x * &four_minus_y2) / &root;
    droot_dx /= 2;
    droot_dx.neg_assign();
    let mut droot_dy = Float::with_val(prec, y * &four_minus_x2) / &root;
    droot_dy /= 2;
    droot_dy.neg_assign();
    if branch == Branch::Minus {
        half_root.neg_assign();
        droot_dx.neg_assign();
        droot_dy.neg_assign();
    }
    let value = Float::with_val(prec, x * y) / 2 + half_root;
    let dz_dx = Float::with_val(prec, y / 2) + droot_dx;
    let dz_dy = Float::with_val(prec, x / 2) + droot_dy;
    ZBranch {
        value,
        dz_dx,
        dz_dy,
    }
}
