//! Chart-described Riemannian manifolds, curvature, geodesics and parallel transport.
//!
//! Curvature convention: `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]` with components
//! `R(∂_i, ∂_j)∂_k = R^l_{kij} ∂_l` and lowered `R_{ijkl} = g(R(∂_k, ∂_l)∂_j, ∂_i)`,
//! so that the unit sphere has `R_{ijkl} = g_{ik}g_{jl} − g_{il}g_{jk}` and `s = n(n−1)`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::jets::{Jet, MAX_ORDER};

/// Metric as a function of coordinate jets, returning `n × n` row-major jets.
pub type MetricFn = Arc<dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync>;

/// Coordinate change between charts, written against coordinate jets.
pub type TransitionFn = Arc<dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync>;

/// Coordinate regions used for chart domains and sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    All,
    Ball {
        radius: f64,
    },
    Cube {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Concatenated coordinates of two regions.
    Product(Box<Region>, Box<Region>, usize),
    /// Base region times an interval in a final coordinate.
    Cylinder(Box<Region>, f64, f64),
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::All => true,
            Region::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>() < radius * radius,
            Region::Cube { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *a <= *v && *v <= *b),
            Region::Product(a, b, na) => a.contains(&x[..*na]) && b.contains(&x[*na..]),
            Region::Cylinder(base, lo, hi) => {
                let r = x[x.len() - 1];
                *lo < r && r < *hi && base.contains(&x[..x.len() - 1])
            }
        }
    }

    /// Uniform sample; `All` samples the unit cube.
    pub fn sample<R: Rng>(&self, dim: usize, rng: &mut R) -> Vec<f64> {
        match self {
            Region::All => (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            Region::Ball { radius } => loop {
                let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-*radius..*radius)).collect();
                if self.contains(&x) {
                    return x;
                }
            },
            Region::Cube { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| rng.gen_range(*a..*b))
                .collect(),
            Region::Product(a, b, na) => {
                let mut x = a.sample(*na, rng);
                x.extend(b.sample(dim - na, rng));
                x
            }
            Region::Cylinder(base, lo, hi) => {
                let mut x = base.sample(dim - 1, rng);
                x.push(rng.gen_range(*lo..*hi));
                x
            }
        }
    }
}

#[derive(Clone)]
pub struct Chart {
    pub id: String,
    pub metric: MetricFn,
    pub domain: Region,
    pub sample: Region,
}

impl std::fmt::Debug for Chart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Chart({}, domain={:?}, sample={:?})",
            self.id, self.domain, self.sample
        )
    }
}

/// A Riemannian manifold given by one or two coordinate charts.
#[derive(Clone, Debug)]
pub struct ChartManifold {
    pub id: String,
    pub dim: usize,
    pub charts: Vec<Chart>,
    /// Sign of the chart orientation relative to `dx¹∧…∧dxⁿ`.
    pub orientation: f64,
    /// Map from chart 1 coordinates to chart 0 coordinates, when two charts exist.
    pub transition: Option<TransitionFnDebug>,
}

#[derive(Clone)]
pub struct TransitionFnDebug(pub TransitionFn);

impl std::fmt::Debug for TransitionFnDebug {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<transition>")
    }
}

impl ChartManifold {
    pub fn single(id: &str, dim: usize, metric: MetricFn, domain: Region, sample: Region) -> Self {
        ChartManifold {
            id: id.to_string(),
            dim,
            charts: vec![Chart {
                id: format!("{id}:0"),
                metric,
                domain,
                sample,
            }],
            orientation: 1.0,
            transition: None,
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.charts[0]
    }

    pub fn metric_fn(&self) -> &MetricFn {
        &self.charts[0].metric
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Invalid(format!(
                "point of dimension {} on a {}-manifold",
                x.len(),
                self.dim
            )));
        }
        if !self.charts[0].domain.contains(x) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain {
                chart: self.charts[0].id.clone(),
                point: x.to_vec(),
            });
        }
        Ok(())
    }

    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.charts[0].sample.sample(self.dim, rng)
    }

    /// Metric and inverse values at a point.
    pub fn metric_at(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let lg = LocalGeom::new(self, x, 0)?;
        Ok((values(&lg.g), values(&lg.ginv)))
    }

    /// Same manifold with the metric multiplied by `e^{2λ}`.
    pub fn conformal(&self, lambda: Arc<dyn Fn(&[Jet]) -> Result<Jet> + Send + Sync>) -> Self {
        let base = self.charts[0].metric.clone();
        let metric: MetricFn = Arc::new(move |x: &[Jet]| {
            let f = lambda(x)?.scale(2.0).exp();
            Ok(base(x)?.iter().map(|gij| gij * &f).collect())
        });
        let mut out = self.clone();
        out.id = format!("{}~conformal", self.id);
        out.charts.truncate(1);
        out.charts[0].metric = metric;
        out.transition = None;
        out
    }
}

pub fn values(v: &[Jet]) -> Vec<f64> {
    v.iter().map(|j| j.value()).collect()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &[f64], n: usize) -> f64 {
    let mat = DMatrix::from_row_slice(n, n, m);
    let eig = SymmetricEigen::new(mat);
    eig.eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Inverse and determinant of a symmetric positive definite jet matrix.
pub fn invert_spd(g: &[Jet], n: usize) -> Result<(Vec<Jet>, Jet)> {
    let mut a: Vec<Jet> = g.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| g[0].constant_like(if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    let mut det = g[0].constant_like(1.0);
    for col in 0..n {
        let piv = a[col * n + col].clone();
        let r = piv.recip()?;
        det = det.mul_jet(&piv);
        for k in 0..n {
            a[col * n + k] = a[col * n + k].mul_jet(&r);
            inv[col * n + k] = inv[col * n + k].mul_jet(&r);
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row * n + col].clone();
            if f.coeffs().iter().all(|&c| c == 0.0) {
                continue;
            }
            for k in 0..n {
                let ak = a[col * n + k].clone();
                let ik = inv[col * n + k].clone();
                a[row * n + k].fma(-1.0, &f, &ak);
                inv[row * n + k].fma(-1.0, &f, &ik);
            }
        }
    }
    Ok((inv, det))
}

/// Jets of metric data at a point: `g`, `g⁻¹` to order `k`, Christoffels to order `k−1`,
/// curvature to order `k−2`.
#[derive(Clone, Debug)]
pub struct LocalGeom {
    pub n: usize,
    pub order: usize,
    pub x: Vec<f64>,
    pub orientation: f64,
    pub g: Vec<Jet>,
    pub ginv: Vec<Jet>,
    pub sqrt_det: Jet,
    /// `gamma[(k * n + i) * n + j] = Γ^k_{ij}`
    pub gamma: Vec<Jet>,
    /// `riem[((l * n + k) * n + i) * n + j] = R^l_{kij}`
    pub riem: Vec<Jet>,
}

impl LocalGeom {
    pub fn new(m: &ChartManifold, x: &[f64], order: usize) -> Result<LocalGeom> {
        m.check_domain(x)?;
        let vars = Jet::coordinates(x, order);
        LocalGeom::from_metric(m.metric_fn(), &vars, m.orientation)
    }

    /// Geometry from a metric evaluated on coordinate jets `vars`.
    pub fn from_metric(metric: &MetricFn, vars: &[Jet], orientation: f64) -> Result<LocalGeom> {
        let n = vars.len();
        let order = vars.first().map_or(0, |v| v.order());
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh {
                requested: order,
                max: MAX_ORDER,
            });
        }
        let g = metric(vars)?;
        if g.len() != n * n || g.iter().any(|j| !j.is_finite()) {
            return Err(Error::Invalid("metric evaluation failed".into()));
        }
        let gv = values(&g);
        let lam = min_eigenvalue(&gv, n);
        if lam <= 1e-10 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: lam,
            });
        }
        let (ginv, det) = invert_spd(&g, n)?;
        let sqrt_det = det.sqrt()?;
        let mut lg = LocalGeom {
            n,
            order,
            x: vars.iter().map(|v| v.value()).collect(),
            orientation,
            g,
            ginv,
            sqrt_det,
            gamma: Vec::new(),
            riem: Vec::new(),
        };
        if order >= 1 {
            lg.gamma = christoffel(&lg.g, &lg.ginv, n)?;
        }
        if order >= 2 {
            lg.riem = riemann(&lg.gamma, n)?;
        }
        Ok(lg)
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &Jet {
        &self.gamma[(k * self.n + i) * self.n + j]
    }

    pub fn riem(&self, l: usize, k: usize, i: usize, j: usize) -> &Jet {
        let n = self.n;
        &self.riem[((l * n + k) * n + i) * n + j]
    }

    /// `E^m_k = Γ^m_{ik}` for the Christoffel correction in direction `i`.
    pub fn gamma_endo(&self, i: usize) -> Vec<Jet> {
        let n = self.n;
        let mut e = Vec::with_capacity(n * n);
        for m in 0..n {
            for k in 0..n {
                e.push(self.gamma(m, i, k).clone());
            }
        }
        e
    }

    /// `E^m_k = R^m_{kij}`, the endomorphism `R(∂_i, ∂_j)` on vectors.
    pub fn curv_endo(&self, i: usize, j: usize) -> Vec<Jet> {
        let n = self.n;
        let mut e = Vec::with_capacity(n * n);
        for m in 0..n {
            for k in 0..n {
                e.push(self.riem(m, k, i, j).clone());
            }
        }
        e
    }

    /// `∇_a R^l_{kij}` (order `k−3`), indexed like `riem` with `a` outermost.
    pub fn nabla_riem(&self) -> Result<Vec<Jet>> {
        if self.order < 3 {
            return Err(Error::OrderTooHigh {
                requested: 3,
                max: self.order,
            });
        }
        let n = self.n;
        let idx = |l: usize, k: usize, i: usize, j: usize| ((l * n + k) * n + i) * n + j;
        let mut out = Vec::with_capacity(n * n * n * n * n);
        for a in 0..n {
            for l in 0..n {
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let mut v = self.riem[idx(l, k, i, j)].partial(a)?;
                            for m in 0..n {
                                v.fma(1.0, self.gamma(l, a, m), &self.riem[idx(m, k, i, j)]);
                                v.fma(-1.0, self.gamma(m, a, k), &self.riem[idx(l, m, i, j)]);
                                v.fma(-1.0, self.gamma(m, a, i), &self.riem[idx(l, k, m, j)]);
                                v.fma(-1.0, self.gamma(m, a, j), &self.riem[idx(l, k, i, m)]);
                            }
                            out.push(v);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn g_values(&self) -> Vec<f64> {
        values(&self.g)
    }

    pub fn ginv_values(&self) -> Vec<f64> {
        values(&self.ginv)
    }

    /// Copy with every jet truncated to `order`.
    pub fn truncate(&self, order: usize) -> LocalGeom {
        if order >= self.order {
            return self.clone();
        }
        let tr = |v: &[Jet], o: usize| v.iter().map(|j| j.truncate(o)).collect::<Vec<_>>();
        LocalGeom {
            n: self.n,
            order,
            x: self.x.clone(),
            orientation: self.orientation,
            g: tr(&self.g, order),
            ginv: tr(&self.ginv, order),
            sqrt_det: self.sqrt_det.truncate(order),
            // derived quantities keep whatever order they have, capped at `order`
            gamma: tr(&self.gamma, order),
            riem: tr(&self.riem, order),
        }
    }
}

fn christoffel(g: &[Jet], ginv: &[Jet], n: usize) -> Result<Vec<Jet>> {
    // dg[(l * n + i) * n + j] = ∂_l g_ij
    let mut dg = Vec::with_capacity(n * n * n);
    for l in 0..n {
        for ij in 0..n * n {
            dg.push(g[ij].partial(l)?);
        }
    }
    let d = |l: usize, i: usize, j: usize| &dg[(l * n + i) * n + j];
    let proto = dg[0].zero_like();
    let mut gam = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = proto.clone();
                for l in 0..n {
                    let mut t = d(i, j, l).clone();
                    t.axpy(1.0, d(j, i, l));
                    t.axpy(-1.0, d(l, i, j));
                    acc.fma(0.5, &ginv[k * n + l], &t);
                }
                gam.push(acc);
            }
        }
    }
    Ok(gam)
}

fn riemann(gam: &[Jet], n: usize) -> Result<Vec<Jet>> {
    let gi = |k: usize, i: usize, j: usize| &gam[(k * n + i) * n + j];
    let mut dgam = Vec::with_capacity(n * gam.len());
    for a in 0..n {
        for v in gam {
            dgam.push(v.partial(a)?);
        }
    }
    let dgi = |a: usize, k: usize, i: usize, j: usize| &dgam[a * n * n * n + (k * n + i) * n + j];
    let mut out = Vec::with_capacity(n * n * n * n);
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = dgi(i, l, j, k).clone();
                    v.axpy(-1.0, dgi(j, l, i, k));
                    for m in 0..n {
                        v.fma(1.0, gi(l, i, m), gi(m, j, k));
                        v.fma(-1.0, gi(l, j, m), gi(m, i, k));
                    }
                    out.push(v);
                }
            }
        }
    }
    Ok(out)
}

/// Real-valued geometric data at a point.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GeometryFrame {
    pub point: Vec<f64>,
    pub n: usize,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    /// `Γ^k_{ij}` at `(k * n + i) * n + j`
    pub gamma: Vec<f64>,
    /// `∂_l Γ^k_{ij}` at `l * n³ + (k * n + i) * n + j` (depth ≥ 2)
    pub dgamma: Vec<f64>,
    /// Lowered `R_{ijkl}` (depth ≥ 2)
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
    /// `∇_m R_{ijkl}` at `m * n⁴ + …` (depth 3)
    pub nabla_riemann: Option<Vec<f64>>,
}

/// Assemble the frame at `x`; `depth` = 1 (Christoffels), 2 (curvature), 3 (`∇R`).
pub fn metric_frame(m: &ChartManifold, x: &[f64], depth: usize) -> Result<GeometryFrame> {
    if !(1..=3).contains(&depth) {
        return Err(Error::Invalid(format!("frame depth {depth} not in 1..=3")));
    }
    let lg = LocalGeom::new(m, x, depth)?;
    frame_from_local(&lg, depth)
}

pub fn frame_from_local(lg: &LocalGeom, depth: usize) -> Result<GeometryFrame> {
    let n = lg.n;
    let g = lg.g_values();
    let g_inv = lg.ginv_values();
    let gamma = values(&lg.gamma);
    let mut frame = GeometryFrame {
        point: lg.x.clone(),
        n,
        g: g.clone(),
        g_inv: g_inv.clone(),
        gamma,
        dgamma: Vec::new(),
        riemann: Vec::new(),
        ricci: Vec::new(),
        scalar: 0.0,
        nabla_riemann: None,
    };
    if depth < 2 {
        return Ok(frame);
    }
    for l in 0..n {
        for v in &lg.gamma {
            frame.dgamma.push(v.partial(l)?.value());
        }
    }
    let riem = values(&lg.riem);
    frame.riemann = lower_riemann(&riem, &g, n);
    let mut ric = vec![0.0; n * n];
    for j in 0..n {
        for l in 0..n {
            for m in 0..n {
                ric[j * n + l] += riem[((m * n + l) * n + m) * n + j];
            }
        }
    }
    frame.scalar = (0..n * n).map(|k| g_inv[k] * ric[k]).sum();
    frame.ricci = ric;
    if depth >= 3 {
        let nr = values(&lg.nabla_riem()?);
        let n4 = n * n * n * n;
        let mut out = Vec::with_capacity(n * n4);
        for a in 0..n {
            out.extend(lower_riemann(&nr[a * n4..(a + 1) * n4], &g, n));
        }
        frame.nabla_riemann = Some(out);
    }
    Ok(frame)
}

fn lower_riemann(riem: &[f64], g: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        acc += g[i * n + m] * riem[((m * n + j) * n + k) * n + l];
                    }
                    out[((i * n + j) * n + k) * n + l] = acc;
                }
            }
        }
    }
    out
}

/// Pointwise norm `(R_{ijkl} R^{ijkl})^{1/2}` of the Riemann tensor.
pub fn riemann_norm(m: &ChartManifold, x: &[f64]) -> Result<f64> {
    let f = metric_frame(m, x, 2)?;
    let n = f.n;
    let mut t = f.riemann.clone();
    // raise one slot at a time
    for slot in 0..4u32 {
        let stride = n.pow(3 - slot);
        t = (0..t.len())
            .map(|idx| {
                let a = (idx / stride) % n;
                let base = idx - a * stride;
                (0..n)
                    .map(|b| f.g_inv[a * n + b] * t[base + b * stride])
                    .sum()
            })
            .collect();
    }
    let acc: f64 = t.iter().zip(&f.riemann).map(|(u, v)| u * v).sum();
    Ok(acc.max(0.0).sqrt())
}

/// Christoffel symbols at a point.
pub fn christoffel_at(m: &ChartManifold, x: &[f64]) -> Result<Vec<f64>> {
    let lg = LocalGeom::new(m, x, 1)?;
    Ok(values(&lg.gamma))
}

/// Classical fixed-step Runge–Kutta step for `y' = f(t, y)`.
pub fn rk4_step<F>(f: &F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let add =
        |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &add(y, &k1, 0.5 * h))?;
    let k3 = f(t + 0.5 * h, &add(y, &k2, 0.5 * h))?;
    let k4 = f(t + h, &add(y, &k3, h))?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CurveState {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub transported: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub enum CurveStatus {
    Complete,
    /// Integration stopped because the curve left the chart domain.
    ChartExit {
        t: f64,
    },
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct Trajectory {
    pub states: Vec<CurveState>,
    pub status: CurveStatus,
}

/// Index variance of a tensor slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Up,
    Down,
}

/// Tensor components in row-major order over the slot list.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub slots: Vec<Slot>,
    pub c: Vec<f64>,
}

impl Tensor {
    /// `g(T, T)` with all slots contracted by the metric.
    pub fn norm_sq(&self, g: &[f64], ginv: &[f64], n: usize) -> f64 {
        let r = self.slots.len();
        let total = n.pow(r as u32);
        let mut acc = 0.0;
        for a in 0..total {
            for b in 0..total {
                let (mut w, mut ia, mut ib) = (1.0, a, b);
                for s in self.slots.iter().rev() {
                    let (x, y) = (ia % n, ib % n);
                    ia /= n;
                    ib /= n;
                    w *= match s {
                        Slot::Up => g[x * n + y],
                        Slot::Down => ginv[x * n + y],
                    };
                    if w == 0.0 {
                        break;
                    }
                }
                if w != 0.0 {
                    acc += w * self.c[a] * self.c[b];
                }
            }
        }
        acc
    }
}

/// `dT/dt` for `∇_v T = 0` given Christoffels at the current point.
fn transport_rate(gam: &[f64], n: usize, v: &[f64], slots: &[Slot], t: &[f64]) -> Vec<f64> {
    let r = slots.len();
    let mut out = vec![0.0; t.len()];
    let mut digits = vec![0usize; r];
    for (flat, o) in out.iter_mut().enumerate() {
        let mut f = flat;
        for s in (0..r).rev() {
            digits[s] = f % n;
            f /= n;
        }
        let mut acc = 0.0;
        for (s, slot) in slots.iter().enumerate() {
            let stride = n.pow((r - 1 - s) as u32);
            let base = flat - digits[s] * stride;
            for i in 0..n {
                if v[i] == 0.0 {
                    continue;
                }
                for m in 0..n {
                    let tm = t[base + m * stride];
                    match slot {
                        // dT^a/dt = −Γ^a_{im} v^i T^m
                        Slot::Up => acc -= gam[(digits[s] * n + i) * n + m] * v[i] * tm,
                        // dT_b/dt = +Γ^m_{ib} v^i T_m
                        Slot::Down => acc += gam[(m * n + i) * n + digits[s]] * v[i] * tm,
                    }
                }
            }
        }
        *o = acc;
    }
    out
}

/// Geodesic `ẍ^k + Γ^k_{ij} ẋ^i ẋ^j = 0` by RK4, optionally transporting tensors.
pub fn geodesic_integrate(
    m: &ChartManifold,
    x0: &[f64],
    v0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    geodesic_transport(m, x0, v0, &[], t_end, step)
}

pub fn geodesic_transport(
    m: &ChartManifold,
    x0: &[f64],
    v0: &[f64],
    tensors: &[Tensor],
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::Invalid("integration step must be positive".into()));
    }
    m.check_domain(x0)?;
    let n = m.dim;
    let mut y: Vec<f64> = x0.iter().chain(v0).copied().collect();
    for t in tensors {
        y.extend(&t.c);
    }
    let rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let x = &y[..n];
        let v = &y[n..2 * n];
        let gam = christoffel_at(m, x)?;
        let mut out = Vec::with_capacity(y.len());
        out.extend_from_slice(v);
        for k in 0..n {
            let mut a = 0.0;
            for i in 0..n {
                for j in 0..n {
                    a -= gam[(k * n + i) * n + j] * v[i] * v[j];
                }
            }
            out.push(a);
        }
        let mut off = 2 * n;
        for t in tensors {
            let len = t.c.len();
            out.extend(transport_rate(&gam, n, v, &t.slots, &y[off..off + len]));
            off += len;
        }
        Ok(out)
    };
    let split = |t: f64, y: &[f64]| {
        let mut tr = Vec::new();
        let mut off = 2 * n;
        for ten in tensors {
            tr.push(y[off..off + ten.c.len()].to_vec());
            off += ten.c.len();
        }
        CurveState {
            t,
            x: y[..n].to_vec(),
            v: y[n..2 * n].to_vec(),
            transported: if tensors.is_empty() { None } else { Some(tr) },
        }
    };
    let steps = (t_end / step).round() as usize;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(split(0.0, &y));
    for s in 0..steps {
        let t = s as f64 * step;
        match rk4_step(&rhs, t, &y, step) {
            Ok(next) if m.charts[0].domain.contains(&next[..n]) => y = next,
            Ok(_) | Err(Error::Domain { .. }) => {
                return Ok(Trajectory {
                    states,
                    status: CurveStatus::ChartExit { t },
                })
            }
            Err(e) => return Err(e),
        }
        states.push(split((s + 1) as f64 * step, &y));
    }
    Ok(Trajectory {
        states,
        status: CurveStatus::Complete,
    })
}

/// A parametrized curve in chart coordinates with its velocity.
pub type PathFn = Arc<dyn Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync>;

/// Parallel transport of `tensor0` along `path` for `t ∈ [0, t_end]`.
pub fn parallel_transport(
    m: &ChartManifold,
    path: &PathFn,
    tensor0: &Tensor,
    t_end: f64,
    step: f64,
) -> Result<Vec<CurveState>> {
    let n = m.dim;
    let rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (x, v) = path(t);
        let gam = christoffel_at(m, &x)?;
        Ok(transport_rate(&gam, n, &v, &tensor0.slots, y))
    };
    let steps = (t_end / step).round() as usize;
    let mut y = tensor0.c.clone();
    let mut out = Vec::with_capacity(steps + 1);
    let (x, v) = path(0.0);
    out.push(CurveState {
        t: 0.0,
        x,
        v,
        transported: Some(vec![y.clone()]),
    });
    for s in 0..steps {
        let t = s as f64 * step;
        y = rk4_step(&rhs, t, &y, step)?;
        let (x, v) = path(t + step);
        out.push(CurveState {
            t: t + step,
            x,
            v,
            transported: Some(vec![y.clone()]),
        });
    }
    Ok(out)
}
