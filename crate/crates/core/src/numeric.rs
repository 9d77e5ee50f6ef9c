//! Small numerical kernels shared by the solvers: natural cubic spline,
//! composite Simpson, Gauss-Legendre panels and a bracketing root finder.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Natural cubic spline through strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::Validation("spline abscissae and ordinates differ in length".into()));
        }
        if n < 2 {
            return Err(Error::Validation("spline needs at least two points".into()));
        }
        if let Some(w) = x.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "abscissae must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite spline data".into()));
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal solve for interior second derivatives.
            let mut c_prime = vec![0.0; n];
            let mut d_prime = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let c = h1 / 6.0;
                let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                let denom = b - a * c_prime[i - 1];
                c_prime[i] = c / denom;
                d_prime[i] = (d - a * d_prime[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d_prime[i] - c_prime[i] * m[i + 1];
            }
        }
        Ok(Self { x, y, m })
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn ys(&self) -> &[f64] {
        &self.y
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value at `t`; outside the knots the end cubic is continued.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }
}

/// Composite Simpson rule on uniformly spaced samples. An even number of
/// samples closes with the 3/8 rule on the last four points.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let (body, tail) = if n % 2 == 1 { (n, 0) } else { (n - 3, 3) };
            let mut s = values[0] + values[body - 1];
            for (i, v) in values[1..body - 1].iter().enumerate() {
                s += if i % 2 == 0 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = s * h / 3.0;
            if tail == 3 {
                let t = &values[n - 4..];
                total += 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3]);
            }
            total
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped onto a panel.
#[derive(Debug, Clone)]
pub struct GaussPanel {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussPanel {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    /// (abscissa, weight) pairs on [a, b].
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }
}

/// Brent's method for a root of `f` bracketed by `[a, b]`.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Convergence(format!("root not bracketed in [{a}, {b}]")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::Convergence("Brent iteration limit reached".into()))
}

/// One accepted panel of [`integrate_panels`]: its interval, the index of the
/// starting panel it was refined from, and its contribution per component.
#[derive(Debug, Clone)]
pub struct PanelResult {
    pub a: f64,
    pub b: f64,
    pub root: usize,
    pub values: Vec<f64>,
}

struct Pending {
    a: f64,
    b: f64,
    root: usize,
    whole: Vec<f64>,
}

/// Adaptive Gauss-Legendre quadrature of a vector-valued integrand over
/// consecutive panels `edges[i]..edges[i+1]`. A panel is accepted when its
/// halves agree with the whole to `rel_tol` of every component's running total
/// plus its entry in `scale` (absent entries count as zero).
/// `eval` receives a batch of abscissae and returns one vector per abscissa,
/// so callers can evaluate the batch in parallel. Returns totals and the
/// accepted panels in increasing order.
pub fn integrate_panels<F>(
    mut eval: F,
    edges: &[f64],
    order: usize,
    rel_tol: f64,
    scale: &[f64],
    max_rounds: usize,
) -> Result<(Vec<f64>, Vec<PanelResult>)>
where
    F: FnMut(&[f64]) -> Result<Vec<Vec<f64>>>,
{
    let rule = GaussPanel::new(order);
    let quad = |vals: &[Vec<f64>], ws: &[f64], dim: usize| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (v, w) in vals.iter().zip(ws) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += w * x;
            }
        }
        out
    };
    // Whole-panel estimates for the initial panels.
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for w in edges.windows(2) {
        for (x, wt) in rule.points(w[0], w[1]) {
            xs.push(x);
            ws.push(wt);
        }
    }
    if xs.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let vals = eval(&xs)?;
    let dim = vals.first().map(|v| v.len()).unwrap_or(0);
    let mut pending: Vec<Pending> = edges
        .windows(2)
        .enumerate()
        .map(|(i, w)| Pending {
            a: w[0],
            b: w[1],
            root: i,
            whole: quad(&vals[i * order..(i + 1) * order], &ws[i * order..(i + 1) * order], dim),
        })
        .collect();
    let mut accepted: Vec<PanelResult> = Vec::new();
    for round in 0..=max_rounds {
        if pending.is_empty() {
            break;
        }
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for p in &pending {
            let mid = 0.5 * (p.a + p.b);
            for (x, w) in rule.points(p.a, mid).chain(rule.points(mid, p.b)) {
                xs.push(x);
                ws.push(w);
            }
        }
        let vals = eval(&xs)?;
        let halves: Vec<(Vec<f64>, Vec<f64>)> = (0..pending.len())
            .map(|k| {
                let o = 2 * k * order;
                (
                    quad(&vals[o..o + order], &ws[o..o + order], dim),
                    quad(&vals[o + order..o + 2 * order], &ws[o + order..o + 2 * order], dim),
                )
            })
            .collect();
        let mut total: Vec<f64> = vec![0.0; dim];
        for r in &accepted {
            for (t, v) in total.iter_mut().zip(&r.values) {
                *t += v;
            }
        }
        for (l, r) in &halves {
            for c in 0..dim {
                total[c] += l[c] + r[c];
            }
        }
        let last = round == max_rounds;
        let mut next = Vec::new();
        for (p, (l, r)) in pending.into_iter().zip(halves) {
            let converged = (0..dim).all(|c| {
                let refined = l[c] + r[c];
                let floor = scale.get(c).copied().unwrap_or(0.0).abs();
                (refined - p.whole[c]).abs() <= rel_tol * (total[c].abs() + floor) || refined == p.whole[c]
            });
            if converged || last {
                let values = l.iter().zip(&r).map(|(x, y)| x + y).collect();
                accepted.push(PanelResult { a: p.a, b: p.b, root: p.root, values });
            } else {
                let mid = 0.5 * (p.a + p.b);
                next.push(Pending { a: p.a, b: mid, root: p.root, whole: l });
                next.push(Pending { a: mid, b: p.b, root: p.root, whole: r });
            }
        }
        pending = next;
    }
    accepted.sort_by(|x, y| x.a.total_cmp(&y.a));
    let totals = (0..dim).map(|c| compensated_sum(accepted.iter().map(|p| p.values[c]))).collect();
    Ok((totals, accepted))
}

/// Panel edges `0, top·2^-n, ..., top/2, top`.
pub fn octave_edges(top: f64, octaves: u32) -> Vec<f64> {
    std::iter::once(0.0).chain((0..=octaves).rev().map(|k| top * 0.5f64.powi(k as i32))).collect()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}
