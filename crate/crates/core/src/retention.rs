//! Scalar retention map `T(p) = F((b₀ + b₁p − min(α, ᾱ) − μ)/σ)` with a
//! logistic `F`, its fixed points, trajectories, and one-parameter sweeps.

use crate::error::{Error, Result};

pub const GRID_CELLS: usize = 10_000;
pub const ROOT_TOL: f64 = 1e-12;
pub const DEDUP_TOL: f64 = 1e-6;
pub const MARGINAL_BAND: f64 = 1e-6;
/// Largest `|T(p) − p|` accepted for a tangential (non-crossing) root.
pub const TANGENT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RetentionModel {
    pub b0: f64,
    pub b1: f64,
    pub alpha: f64,
    pub mu: f64,
    pub sigma: f64,
    /// Sanction cap `ᾱ`; `None` is uncapped.
    pub alpha_cap: Option<f64>,
}

impl RetentionModel {
    pub fn new(b0: f64, b1: f64, alpha: f64, mu: f64, sigma: f64, alpha_cap: Option<f64>) -> Result<Self> {
        let m = RetentionModel { b0, b1, alpha, mu, sigma, alpha_cap };
        m.validate()?;
        Ok(m)
    }

    /// `b₁ = 2.4`, `σ = 0.08`, `b₀ = α − 1.2`, `μ = 0`: a symmetric S-curve
    /// centred at `p = 1/2`.
    pub fn symmetric_reference(alpha: f64) -> Self {
        RetentionModel { b0: alpha - 1.2, b1: 2.4, alpha, mu: 0.0, sigma: 0.08, alpha_cap: None }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("b0", self.b0), ("alpha", self.alpha), ("mu", self.mu)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if !(self.b1 > 0.0) || !self.b1.is_finite() {
            return Err(Error::invalid("b1", format!("must be positive, got {}", self.b1)));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        if self.alpha < 0.0 {
            return Err(Error::invalid("alpha", "must be nonnegative"));
        }
        if let Some(cap) = self.alpha_cap {
            if !(cap >= 0.0) {
                return Err(Error::invalid("alpha_cap", "must be nonnegative"));
            }
        }
        Ok(())
    }

    pub fn effective_alpha(&self) -> f64 {
        self.alpha_cap.map_or(self.alpha, |cap| self.alpha.min(cap))
    }

    fn argument(&self, p: f64) -> f64 {
        (self.b0 + self.b1 * p - self.effective_alpha() - self.mu) / self.sigma
    }

    /// Largest slope of the map over the real line, `b₁/(4σ)`.
    pub fn max_slope(&self) -> f64 {
        self.b1 / (4.0 * self.sigma)
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn retention_map(model: &RetentionModel, p: f64) -> f64 {
    logistic(model.argument(p)).clamp(0.0, 1.0)
}

/// `T′(p) = T(1−T) b₁/σ`
pub fn map_derivative(model: &RetentionModel, p: f64) -> f64 {
    let t = retention_map(model, p);
    t * (1.0 - t) * model.b1 / model.sigma
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn from_derivative(d: f64) -> Self {
        if d.abs() < 1.0 - MARGINAL_BAND {
            Stability::Stable
        } else if d.abs() > 1.0 + MARGINAL_BAND {
            Stability::Unstable
        } else {
            Stability::Marginal
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPoint {
    pub p_star: f64,
    pub derivative: f64,
    pub stability: Stability,
}

/// All fixed points on `[0, 1]` in increasing order.
pub fn fixed_points(model: &RetentionModel) -> Vec<FixedPoint> {
    let f = |p: f64| retention_map(model, p) - p;
    let n = GRID_CELLS;
    let grid: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&p| f(p)).collect();
    let mut roots = Vec::new();

    if vals[0].abs() <= ROOT_TOL {
        roots.push(0.0);
    }
    if vals[n].abs() <= ROOT_TOL {
        roots.push(1.0);
    }
    for k in 0..n {
        if k > 0 && vals[k] == 0.0 {
            roots.push(grid[k]);
        } else if vals[k] * vals[k + 1] < 0.0 {
            roots.push(bisect(&f, grid[k], grid[k + 1], vals[k]));
        }
    }
    // Tangencies never change sign; look for interior local minima of |f|.
    for k in 1..n {
        let (a, b, c) = (vals[k - 1].abs(), vals[k].abs(), vals[k + 1].abs());
        let crossing = vals[k - 1] * vals[k] <= 0.0 || vals[k] * vals[k + 1] <= 0.0;
        if b <= a && b <= c && !crossing && b < 1e-4 {
            let x = golden_min(|p| f(p).abs(), grid[k - 1], grid[k + 1]);
            if f(x).abs() <= TANGENT_TOL {
                roots.push(x);
            }
        }
    }

    roots.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        if merged.last().map_or(true, |&m| r - m > DEDUP_TOL) {
            merged.push(r);
        }
    }
    merged
        .into_iter()
        .map(|p| {
            let d = map_derivative(model, p);
            FixedPoint { p_star: p, derivative: d, stability: Stability::from_derivative(d) }
        })
        .collect()
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-15 || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-14 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - ratio * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + ratio * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

/// Lowest stable, unstable (domino threshold) and highest stable roots.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Equilibria {
    pub p_low: Option<f64>,
    pub p_dom: Option<f64>,
    pub p_high: Option<f64>,
}

pub fn equilibria(points: &[FixedPoint]) -> Equilibria {
    let stable: Vec<f64> = points.iter().filter(|f| f.stability == Stability::Stable).map(|f| f.p_star).collect();
    Equilibria {
        p_low: stable.first().copied(),
        p_dom: points.iter().find(|f| f.stability == Stability::Unstable).map(|f| f.p_star),
        p_high: stable.last().copied(),
    }
}

/// `p_{t+1} = T(p_{t−delay})` with `p_{−1} = p₀`; returns `steps + 1` values.
pub fn simulate(model: &RetentionModel, p0: f64, steps: usize, delay: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::invalid("steps", "must be at least 1"));
    }
    if delay > 1 {
        return Err(Error::invalid("delay", format!("only 0 or 1 supported, got {delay}")));
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::invalid("p0", format!("must lie in [0, 1], got {p0}")));
    }
    let mut path = Vec::with_capacity(steps + 1);
    path.push(p0);
    for t in 0..steps {
        let src = if delay == 0 || t == 0 { path[t] } else { path[t - 1] };
        path.push(retention_map(model, src));
    }
    Ok(path)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    Alpha,
    Sigma,
    Mu,
    AlphaCap,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::Sigma => "sigma",
            SweepParameter::Mu => "mu",
            SweepParameter::AlphaCap => "alpha_cap",
        }
    }

    pub fn apply(&self, base: &RetentionModel, value: f64) -> RetentionModel {
        let mut m = *base;
        match self {
            SweepParameter::Alpha => m.alpha = value,
            SweepParameter::Sigma => m.sigma = value,
            SweepParameter::Mu => m.mu = value,
            SweepParameter::AlphaCap => m.alpha_cap = Some(value),
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub fixed_points: Vec<FixedPoint>,
}

impl SweepRow {
    pub fn count(&self) -> usize {
        self.fixed_points.len()
    }

    pub fn equilibria(&self) -> Equilibria {
        equilibria(&self.fixed_points)
    }
}

/// Change in the number of fixed points between adjacent grid values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub from_count: usize,
    pub to_count: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    pub transitions: Vec<Transition>,
}

pub fn sweep(base: &RetentionModel, parameter: SweepParameter, grid: &[f64]) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must be nonempty"));
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::invalid("grid", "must be strictly monotone"));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &v in grid {
        let m = parameter.apply(base, v);
        m.validate()?;
        rows.push(SweepRow { value: v, fixed_points: fixed_points(&m) });
    }
    let transitions = rows
        .windows(2)
        .filter(|w| w[0].count() != w[1].count())
        .map(|w| Transition {
            from_count: w[0].count(),
            to_count: w[1].count(),
            lower: w[0].value.min(w[1].value),
            upper: w[0].value.max(w[1].value),
        })
        .collect();
    Ok(SweepTable { parameter, rows, transitions })
}
