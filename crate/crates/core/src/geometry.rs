//! Periodic charts, their discrete derivative operators, and all first and
//! second fundamental-form quantities.
//!
//! Grid layout: node `k = i1 * n2 + i2`, so the second chart coordinate is
//! contiguous. The chart domain is `[0, p1) x [0, p2)`.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::{Mat2, Mat3, Vec3};

/// The closed-form surfaces the crate knows how to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceKind {
    /// Flat periodic rectangle with side lengths `p1`, `p2`.
    FlatTorus { p1: f64, p2: f64 },
    /// Torus of revolution, `X = ((R + r cos t) cos p, (R + r cos t) sin p, r sin t)`.
    EmbeddedTorus { r_major: f64, r_minor: f64 },
}

impl SurfaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceKind::FlatTorus { .. } => "FlatTorus",
            SurfaceKind::EmbeddedTorus { .. } => "EmbeddedTorus",
        }
    }
}

/// Discretization of chart derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeScheme {
    /// Fourier pseudo-spectral; the Nyquist mode is dropped for odd derivatives.
    Spectral,
    /// Fourth-order central differences.
    Fd4,
}

impl DerivativeScheme {
    /// Nominal convergence order, `None` for spectral.
    pub fn order(&self) -> Option<u32> {
        match self {
            DerivativeScheme::Spectral => None,
            DerivativeScheme::Fd4 => Some(4),
        }
    }
}

/// Periodic structured grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n1: usize,
    pub n2: usize,
    pub p1: f64,
    pub p2: f64,
}

impl Grid {
    pub fn new(n1: usize, n2: usize, p1: f64, p2: f64) -> Result<Self> {
        if n1 < 8 || n2 < 8 || !n1.is_multiple_of(2) || !n2.is_multiple_of(2) {
            return Err(Error::InvalidGrid { n1, n2 });
        }
        if !(p1 > 0.0 && p2 > 0.0 && p1.is_finite() && p2.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "domain".into(),
                reason: format!("side lengths must be positive, got ({p1}, {p2})"),
            });
        }
        Ok(Self { n1, n2, p1, p2 })
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    #[inline]
    pub fn h1(&self) -> f64 {
        self.p1 / self.n1 as f64
    }
    #[inline]
    pub fn h2(&self) -> f64 {
        self.p2 / self.n2 as f64
    }
    /// Area element of the parameter domain, `h1 * h2`.
    #[inline]
    pub fn cell(&self) -> f64 {
        self.h1() * self.h2()
    }
    #[inline]
    pub fn idx(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n2 + i2
    }
    /// Chart coordinates of node `k`.
    #[inline]
    pub fn coords(&self, k: usize) -> (f64, f64) {
        let i1 = k / self.n2;
        let i2 = k % self.n2;
        (i1 as f64 * self.h1(), i2 as f64 * self.h2())
    }
    /// Angular wavenumbers along one direction, in FFT order.
    pub fn wavenumbers(&self, dir: usize) -> Vec<f64> {
        let (n, p) = if dir == 0 { (self.n1, self.p1) } else { (self.n2, self.p2) };
        (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * std::f64::consts::PI * m / p
            })
            .collect()
    }
}

/// Discrete partial derivatives on a periodic grid.
///
/// Both schemes are circulant with an antisymmetric first-derivative matrix,
/// which is what makes the discrete adjoint divergence exact.
#[derive(Clone)]
pub struct Differ {
    scheme: DerivativeScheme,
    grid: Grid,
    /// First-derivative symbols `s(k)`, so that `d/dx` acts as `i s(k)`.
    sym: [Vec<f64>; 2],
    fwd: [Arc<dyn Fft<f64>>; 2],
    inv: [Arc<dyn Fft<f64>>; 2],
}

impl std::fmt::Debug for Differ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Differ").field("scheme", &self.scheme).field("grid", &self.grid).finish()
    }
}

impl Differ {
    pub fn new(grid: Grid, scheme: DerivativeScheme) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = [planner.plan_fft_forward(grid.n1), planner.plan_fft_forward(grid.n2)];
        let inv = [planner.plan_fft_inverse(grid.n1), planner.plan_fft_inverse(grid.n2)];
        let sym = [0, 1].map(|dir| {
            let n = if dir == 0 { grid.n1 } else { grid.n2 };
            let h = if dir == 0 { grid.h1() } else { grid.h2() };
            grid.wavenumbers(dir)
                .into_iter()
                .enumerate()
                .map(|(j, k)| match scheme {
                    DerivativeScheme::Spectral => {
                        if j == n / 2 {
                            0.0
                        } else {
                            k
                        }
                    }
                    DerivativeScheme::Fd4 => (8.0 * (k * h).sin() - (2.0 * k * h).sin()) / (6.0 * h),
                })
                .collect()
        });
        Self { scheme, grid, sym, fwd, inv }
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// First-derivative Fourier symbol along `dir` (FFT order).
    pub fn symbol(&self, dir: usize) -> &[f64] {
        &self.sym[dir]
    }

    /// Partial derivative along chart direction `dir` (0 or 1).
    pub fn d(&self, f: &[f64], dir: usize) -> Vec<f64> {
        assert_eq!(f.len(), self.grid.len(), "field length does not match grid");
        match self.scheme {
            DerivativeScheme::Spectral => self.d_spectral(f, dir),
            DerivativeScheme::Fd4 => self.d_fd4(f, dir),
        }
    }

    fn d_fd4(&self, f: &[f64], dir: usize) -> Vec<f64> {
        let g = self.grid;
        let (n, h) = if dir == 0 { (g.n1, g.h1()) } else { (g.n2, g.h2()) };
        let c = 1.0 / (12.0 * h);
        let mut out = vec![0.0; f.len()];
        out.par_chunks_mut(g.n2).enumerate().for_each(|(i1, row)| {
            for (i2, o) in row.iter_mut().enumerate() {
                let at = |s: isize| -> f64 {
                    if dir == 0 {
                        let j = (i1 as isize + s).rem_euclid(n as isize) as usize;
                        f[j * g.n2 + i2]
                    } else {
                        let j = (i2 as isize + s).rem_euclid(n as isize) as usize;
                        f[i1 * g.n2 + j]
                    }
                };
                *o = c * (8.0 * (at(1) - at(-1)) - (at(2) - at(-2)));
            }
        });
        out
    }

    /// Differentiates lines pairwise by packing two real lines into one complex FFT.
    fn d_spectral(&self, f: &[f64], dir: usize) -> Vec<f64> {
        let g = self.grid;
        let (n, lines) = if dir == 0 { (g.n1, g.n2) } else { (g.n2, g.n1) };
        let line_at = |l: usize, j: usize| -> usize {
            if dir == 0 {
                j * g.n2 + l
            } else {
                l * g.n2 + j
            }
        };
        let sym = &self.sym[dir];
        let fwd = &self.fwd[dir];
        let inv = &self.inv[dir];
        let scale = 1.0 / n as f64;
        let pairs: Vec<(usize, Vec<f64>, Vec<f64>)> = (0..lines.div_ceil(2))
            .into_par_iter()
            .map(|p| {
                let la = 2 * p;
                let lb = (2 * p + 1).min(lines - 1);
                let mut buf: Vec<Complex64> =
                    (0..n).map(|j| Complex64::new(f[line_at(la, j)], f[line_at(lb, j)])).collect();
                fwd.process(&mut buf);
                for (b, &s) in buf.iter_mut().zip(sym) {
                    *b = Complex64::new(-b.im * s, b.re * s);
                }
                inv.process(&mut buf);
                let a: Vec<f64> = buf.iter().map(|c| c.re * scale).collect();
                let b: Vec<f64> = buf.iter().map(|c| c.im * scale).collect();
                (p, a, b)
            })
            .collect();
        let mut out = vec![0.0; f.len()];
        for (p, a, b) in pairs {
            let la = 2 * p;
            let lb = 2 * p + 1;
            for j in 0..n {
                out[line_at(la, j)] = a[j];
                if lb < lines {
                    out[line_at(lb, j)] = b[j];
                }
            }
        }
        out
    }

    /// 2D forward FFT of a real field.
    pub fn fft2(&self, f: &[f64]) -> Vec<Complex64> {
        let mut c: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform2(&mut c, true);
        c
    }

    /// 2D inverse FFT returning the real part (normalized).
    pub fn ifft2(&self, mut c: Vec<Complex64>) -> Vec<f64> {
        self.transform2(&mut c, false);
        let s = 1.0 / self.grid.len() as f64;
        c.iter().map(|z| z.re * s).collect()
    }

    fn transform2(&self, c: &mut [Complex64], forward: bool) {
        let g = self.grid;
        let (p0, p1) = if forward { (&self.fwd[0], &self.fwd[1]) } else { (&self.inv[0], &self.inv[1]) };
        c.par_chunks_mut(g.n2).for_each(|row| p1.process(row));
        let mut t = vec![Complex64::new(0.0, 0.0); c.len()];
        for i1 in 0..g.n1 {
            for i2 in 0..g.n2 {
                t[i2 * g.n1 + i1] = c[i1 * g.n2 + i2];
            }
        }
        t.par_chunks_mut(g.n1).for_each(|col| p0.process(col));
        for i1 in 0..g.n1 {
            for i2 in 0..g.n2 {
                c[i1 * g.n2 + i2] = t[i2 * g.n1 + i1];
            }
        }
    }

    /// Removes the Nyquist modes in both directions. First-derivative symbols
    /// vanish there, so implicit operators cannot damp them.
    pub fn drop_nyquist(&self, f: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let mut c = self.fft2(f);
        for i2 in 0..g.n2 {
            c[(g.n1 / 2) * g.n2 + i2] = Complex64::new(0.0, 0.0);
        }
        for i1 in 0..g.n1 {
            c[i1 * g.n2 + g.n2 / 2] = Complex64::new(0.0, 0.0);
        }
        self.ifft2(c)
    }

    /// Applies `alpha + c1 S1^2 + c2 S2^2` in Fourier space.
    pub fn apply_const(&self, f: &[f64], alpha: f64, c1: f64, c2: f64) -> Vec<f64> {
        let g = self.grid;
        let mut c = self.fft2(f);
        for i1 in 0..g.n1 {
            let s1 = self.sym[0][i1];
            for i2 in 0..g.n2 {
                let s2 = self.sym[1][i2];
                c[i1 * g.n2 + i2] *= alpha + c1 * s1 * s1 + c2 * s2 * s2;
            }
        }
        self.ifft2(c)
    }

    /// Solves `(alpha + c1 S1^2 + c2 S2^2) u = f` in Fourier space, where `S`
    /// are the first-derivative symbols. Modes where the operator vanishes are
    /// set to zero.
    pub fn solve_const(&self, f: &[f64], alpha: f64, c1: f64, c2: f64) -> Vec<f64> {
        let g = self.grid;
        let mut c = self.fft2(f);
        for i1 in 0..g.n1 {
            let s1 = self.sym[0][i1];
            for i2 in 0..g.n2 {
                let s2 = self.sym[1][i2];
                let d = alpha + c1 * s1 * s1 + c2 * s2 * s2;
                let k = i1 * g.n2 + i2;
                c[k] = if d.abs() > 1e-300 { c[k] / d } else { Complex64::new(0.0, 0.0) };
            }
        }
        self.ifft2(c)
    }
}

/// Sampled chart with all geometric fields populated.
#[derive(Debug, Clone)]
pub struct ChartGeometry {
    pub kind: Option<SurfaceKind>,
    pub grid: Grid,
    pub diff: Differ,
    /// Node positions.
    pub x: Vec<Vec3>,
    /// Tangent basis `d_i X`.
    pub tangent: [Vec<Vec3>; 2],
    /// Dual basis `d^i X = g^{ij} d_j X`.
    pub dual: [Vec<Vec3>; 2],
    pub g: Vec<Mat2>,
    pub g_inv: Vec<Mat2>,
    /// `christoffel[node][k]` holds the matrix `Gamma^k_{ij}`.
    pub christoffel: Vec<[Mat2; 2]>,
    pub normal: Vec<Vec3>,
    /// Covariant second fundamental form `II_{ij}`.
    pub shape_op: Vec<Mat2>,
    /// Embedded shape operator `II_{ij} d^i X (x) d^j X`.
    pub shape_emb: Vec<Mat3>,
    /// Tangential projection `Id - nu nu`.
    pub proj: Vec<Mat3>,
    pub mean_curv: Vec<f64>,
    pub gauss_curv: Vec<f64>,
    pub area_form: Vec<f64>,
}

/// Builds one of the closed-form charts.
pub fn build_chart(kind: SurfaceKind, n1: usize, n2: usize, scheme: DerivativeScheme) -> Result<ChartGeometry> {
    use std::f64::consts::TAU;
    match kind {
        SurfaceKind::FlatTorus { p1, p2 } => {
            let grid = Grid::new(n1, n2, p1, p2)?;
            let n = grid.len();
            let x = (0..n).map(|k| {
                let (a, b) = grid.coords(k);
                Vec3::new(a, b, 0.0)
            });
            let geo = Analytic {
                x: x.collect(),
                tangent: [vec![Vec3::x(); n], vec![Vec3::y(); n]],
                g: vec![Mat2::identity(); n],
                christoffel: vec![[Mat2::zeros(); 2]; n],
                normal: vec![Vec3::z(); n],
                shape_op: vec![Mat2::zeros(); n],
            };
            assemble(Some(kind), grid, scheme, geo)
        }
        SurfaceKind::EmbeddedTorus { r_major, r_minor } => {
            if !(r_minor > 0.0 && r_major.is_finite() && r_minor.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "r_minor".into(),
                    reason: format!("must be positive, got {r_minor}"),
                });
            }
            if r_major <= r_minor {
                return Err(Error::NonPeriodicDomain(format!(
                    "torus with R = {r_major} <= r = {r_minor} self-intersects or pinches"
                )));
            }
            let grid = Grid::new(n1, n2, TAU, TAU)?;
            let n = grid.len();
            let (rr, r) = (r_major, r_minor);
            let mut geo = Analytic::with_capacity(n);
            for k in 0..n {
                let (t, p) = grid.coords(k);
                let (st, ct) = t.sin_cos();
                let (sp, cp) = p.sin_cos();
                let rho = rr + r * ct;
                geo.x.push(Vec3::new(rho * cp, rho * sp, r * st));
                geo.tangent[0].push(Vec3::new(-r * st * cp, -r * st * sp, r * ct));
                geo.tangent[1].push(Vec3::new(-rho * sp, rho * cp, 0.0));
                geo.g.push(Mat2::new(r * r, 0.0, 0.0, rho * rho));
                let mut gam = [Mat2::zeros(); 2];
                gam[0][(1, 1)] = rho * st / r;
                gam[1][(0, 1)] = -r * st / rho;
                gam[1][(1, 0)] = -r * st / rho;
                geo.christoffel.push(gam);
                geo.normal.push(-Vec3::new(ct * cp, ct * sp, st));
                geo.shape_op.push(Mat2::new(r, 0.0, 0.0, rho * ct));
            }
            assemble(Some(kind), grid, scheme, geo)
        }
    }
}

/// Builds a chart from sampled node positions only, using the grid's
/// discrete derivatives for every geometric quantity.
pub fn from_embedding(grid: Grid, x: Vec<Vec3>, scheme: DerivativeScheme) -> Result<ChartGeometry> {
    let n = grid.len();
    if x.len() != n {
        return Err(Error::ShapeMismatch { expected: n, got: x.len() });
    }
    let diff = Differ::new(grid, scheme);
    let comp = |c: usize| -> Vec<f64> { x.iter().map(|p| p[c]).collect() };
    let xs = [comp(0), comp(1), comp(2)];
    // first and second partials of each Cartesian component
    let d1: [[Vec<f64>; 3]; 2] = [0, 1].map(|i| [0, 1, 2].map(|c| diff.d(&xs[c], i)));
    let d11 = [0, 1, 2].map(|c| diff.d(&d1[0][c], 0));
    let d22 = [0, 1, 2].map(|c| diff.d(&d1[1][c], 1));
    // symmetrize the mixed derivative
    let d12 = [0, 1, 2].map(|c| {
        let a = diff.d(&d1[0][c], 1);
        let b = diff.d(&d1[1][c], 0);
        a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect::<Vec<f64>>()
    });
    let vec_at = |arr: &[Vec<f64>; 3], k: usize| Vec3::new(arr[0][k], arr[1][k], arr[2][k]);
    let mut geo = Analytic::with_capacity(n);
    for k in 0..n {
        let t1 = vec_at(&d1[0], k);
        let t2 = vec_at(&d1[1], k);
        let g = Mat2::new(t1.dot(&t1), t1.dot(&t2), t2.dot(&t1), t2.dot(&t2));
        let det = g.determinant();
        if !(det > 0.0) {
            return Err(Error::DegenerateMetric { node: k, det });
        }
        let g_inv = g.try_inverse().ok_or(Error::DegenerateMetric { node: k, det })?;
        let nu = t1.cross(&t2).normalize();
        let xx = [[vec_at(&d11, k), vec_at(&d12, k)], [vec_at(&d12, k), vec_at(&d22, k)]];
        let tang = [t1, t2];
        let mut gam = [Mat2::zeros(); 2];
        let mut ii = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                ii[(i, j)] = nu.dot(&xx[i][j]);
                for kk in 0..2 {
                    let mut s = 0.0;
                    for l in 0..2 {
                        s += g_inv[(kk, l)] * tang[l].dot(&xx[i][j]);
                    }
                    gam[kk][(i, j)] = s;
                }
            }
        }
        geo.x.push(x[k]);
        geo.tangent[0].push(t1);
        geo.tangent[1].push(t2);
        geo.g.push(g);
        geo.christoffel.push(gam);
        geo.normal.push(nu);
        geo.shape_op.push(ii);
    }
    assemble(None, grid, scheme, geo)
}

struct Analytic {
    x: Vec<Vec3>,
    tangent: [Vec<Vec3>; 2],
    g: Vec<Mat2>,
    christoffel: Vec<[Mat2; 2]>,
    normal: Vec<Vec3>,
    shape_op: Vec<Mat2>,
}

impl Analytic {
    fn with_capacity(n: usize) -> Self {
        Self {
            x: Vec::with_capacity(n),
            tangent: [Vec::with_capacity(n), Vec::with_capacity(n)],
            g: Vec::with_capacity(n),
            christoffel: Vec::with_capacity(n),
            normal: Vec::with_capacity(n),
            shape_op: Vec::with_capacity(n),
        }
    }
}

fn assemble(kind: Option<SurfaceKind>, grid: Grid, scheme: DerivativeScheme, a: Analytic) -> Result<ChartGeometry> {
    let n = grid.len();
    let mut g_inv = Vec::with_capacity(n);
    let mut area_form = Vec::with_capacity(n);
    for (k, g) in a.g.iter().enumerate() {
        let det = g.determinant();
        if !(det > 0.0 && g[(0, 0)] > 0.0) {
            return Err(Error::DegenerateMetric { node: k, det });
        }
        g_inv.push(g.try_inverse().ok_or(Error::DegenerateMetric { node: k, det })?);
        area_form.push(det.sqrt());
    }
    let mut dual = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut shape_emb = Vec::with_capacity(n);
    let mut proj = Vec::with_capacity(n);
    let mut mean_curv = Vec::with_capacity(n);
    let mut gauss_curv = Vec::with_capacity(n);
    for k in 0..n {
        let gi = g_inv[k];
        let t = [a.tangent[0][k], a.tangent[1][k]];
        let d = [gi[(0, 0)] * t[0] + gi[(0, 1)] * t[1], gi[(1, 0)] * t[0] + gi[(1, 1)] * t[1]];
        let ii = a.shape_op[k];
        let mut b = Mat3::zeros();
        for i in 0..2 {
            for j in 0..2 {
                b += ii[(i, j)] * d[i] * d[j].transpose();
            }
        }
        let mixed = gi * ii;
        mean_curv.push(mixed.trace());
        gauss_curv.push(mixed.determinant());
        let nu = a.normal[k];
        proj.push(Mat3::identity() - nu * nu.transpose());
        shape_emb.push(b);
        dual[0].push(d[0]);
        dual[1].push(d[1]);
    }
    Ok(ChartGeometry {
        kind,
        grid,
        diff: Differ::new(grid, scheme),
        x: a.x,
        tangent: a.tangent,
        dual,
        g: a.g,
        g_inv,
        christoffel: a.christoffel,
        normal: a.normal,
        shape_op: a.shape_op,
        shape_emb,
        proj,
        mean_curv,
        gauss_curv,
        area_form,
    })
}

impl ChartGeometry {
    #[inline]
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
    pub fn scheme(&self) -> DerivativeScheme {
        self.diff.scheme()
    }
    pub fn is_flat(&self) -> bool {
        matches!(self.kind, Some(SurfaceKind::FlatTorus { .. }))
    }

    /// Returns an error unless `n` equals the node count.
    pub fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), got: n });
        }
        Ok(())
    }

    /// Quadrature weight of node `k` (`mu * h1 * h2`).
    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        self.area_form[k] * self.grid.cell()
    }

    /// Covariant Levi-Civita tensor at node `k` (`E_12 = mu`).
    pub fn levi_civita(&self, k: usize) -> Mat2 {
        let m = self.area_form[k];
        Mat2::new(0.0, m, -m, 0.0)
    }

    /// Embedded Levi-Civita tensor: `a . E b = nu . (a x b)` for tangential `a`, `b`.
    pub fn levi_civita_emb(&self, k: usize) -> Mat3 {
        -self.normal[k].cross_matrix()
    }

    /// Gauss curvature recovered from the Christoffel symbols by way of the
    /// Riemann tensor, `K = R_1212 / det g`.
    pub fn gauss_from_christoffel(&self) -> Vec<f64> {
        let n = self.len();
        // dgam[dir][k] component arrays
        let comp =
            |kk: usize, i: usize, j: usize| -> Vec<f64> { self.christoffel.iter().map(|c| c[kk][(i, j)]).collect() };
        let mut dgam = vec![
            [
                [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]],
                [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]]
            ];
            2
        ];
        for (dir, dg) in dgam.iter_mut().enumerate() {
            for (kk, a) in dg.iter_mut().enumerate() {
                for (i, b) in a.iter_mut().enumerate() {
                    for (j, c) in b.iter_mut().enumerate() {
                        *c = self.diff.d(&comp(kk, i, j), dir);
                    }
                }
            }
        }
        (0..n)
            .map(|p| {
                let gam = &self.christoffel[p];
                // R^l_{ijk} = d_j G^l_{ik} - d_k G^l_{ij} + G^l_{jm} G^m_{ik} - G^l_{km} G^m_{ij}
                let riem = |l: usize, i: usize, j: usize, k: usize| -> f64 {
                    let mut s = dgam[j][l][i][k][p] - dgam[k][l][i][j][p];
                    for m in 0..2 {
                        s += gam[l][(j, m)] * gam[m][(i, k)] - gam[l][(k, m)] * gam[m][(i, j)];
                    }
                    s
                };
                // R_{1212} = g_{1l} R^l_{212}
                let g = self.g[p];
                let r1212 = g[(0, 0)] * riem(0, 1, 0, 1) + g[(0, 1)] * riem(1, 1, 0, 1);
                r1212 / g.determinant()
            })
            .collect()
    }
}

/// Area integral `sum f mu h1 h2`, exact for trigonometric integrands below Nyquist.
pub fn area_integral(chart: &ChartGeometry, f: &[f64]) -> Result<f64> {
    chart.check_len(f.len())?;
    Ok(f.iter().zip(&chart.area_form).map(|(a, m)| a * m).sum::<f64>() * chart.grid.cell())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn torus(n: usize) -> ChartGeometry {
        build_chart(SurfaceKind::EmbeddedTorus { r_major: 2.0, r_minor: 1.0 }, n, n, DerivativeScheme::Spectral)
            .unwrap()
    }

    #[test]
    fn flat_chart_is_flat() {
        let c = build_chart(SurfaceKind::FlatTorus { p1: TAU, p2: TAU }, 64, 64, DerivativeScheme::Spectral).unwrap();
        for k in 0..c.len() {
            assert_eq!(c.mean_curv[k], 0.0);
            assert_eq!(c.gauss_curv[k], 0.0);
            assert_eq!(c.g[k], Mat2::identity());
            assert_eq!(c.shape_op[k], Mat2::zeros());
        }
        let one = vec![1.0; c.len()];
        assert!((area_integral(&c, &one).unwrap() - 4.0 * PI * PI).abs() < 1e-12);
        let s: Vec<f64> = (0..c.len()).map(|k| c.grid.coords(k).0.sin()).collect();
        assert!(area_integral(&c, &s).unwrap().abs() < 1e-12);
    }

    #[test]
    fn torus_outer_equator_curvatures() {
        let c = torus(16);
        // node 0 is theta = 0
        assert!((c.mean_curv[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((c.gauss_curv[0] - 1.0 / 3.0).abs() < 1e-15);
        // theta = pi/2 is node i1 = n/4
        let k = c.grid.idx(4, 3);
        assert!(c.gauss_curv[k].abs() < 1e-15);
    }

    #[test]
    fn torus_area_and_invariants() {
        let c = torus(32);
        let one = vec![1.0; c.len()];
        assert!((area_integral(&c, &one).unwrap() - 4.0 * PI * PI * 2.0).abs() < 1e-11);
        for k in 0..c.len() {
            let nu = c.normal[k];
            assert!((nu.norm() - 1.0).abs() < 1e-14);
            assert!(nu.dot(&c.tangent[0][k]).abs() < 1e-14);
            assert!(nu.dot(&c.tangent[1][k]).abs() < 1e-14);
            // Cayley-Hamilton on the shape operator
            let ii = c.shape_op[k];
            let lhs = ii * c.g_inv[k] * ii;
            let rhs = c.mean_curv[k] * ii - c.gauss_curv[k] * c.g[k];
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn grid_rejects_odd_or_small() {
        assert!(matches!(Grid::new(7, 8, 1.0, 1.0), Err(Error::InvalidGrid { .. })));
        assert!(matches!(Grid::new(9, 8, 1.0, 1.0), Err(Error::InvalidGrid { .. })));
        assert!(build_chart(
            SurfaceKind::EmbeddedTorus { r_major: 1.0, r_minor: 1.0 },
            8,
            8,
            DerivativeScheme::Spectral
        )
        .is_err());
    }

    #[test]
    fn spectral_derivative_of_trig() {
        let c = torus(16);
        let f: Vec<f64> = (0..c.len())
            .map(|k| {
                let (a, b) = c.grid.coords(k);
                (2.0 * a).sin() * b.cos()
            })
            .collect();
        let d0 = c.diff.d(&f, 0);
        let d1 = c.diff.d(&f, 1);
        for k in 0..c.len() {
            let (a, b) = c.grid.coords(k);
            assert!((d0[k] - 2.0 * (2.0 * a).cos() * b.cos()).abs() < 1e-12);
            assert!((d1[k] + (2.0 * a).sin() * b.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn fd4_converges_at_fourth_order() {
        let err = |n: usize| {
            let g = Grid::new(n, n, TAU, TAU).unwrap();
            let d = Differ::new(g, DerivativeScheme::Fd4);
            let f: Vec<f64> = (0..g.len()).map(|k| g.coords(k).0.sin().exp()).collect();
            let df = d.d(&f, 0);
            (0..g.len())
                .map(|k| {
                    let a = g.coords(k).0;
                    (df[k] - a.cos() * a.sin().exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let order = (err(32) / err(64)).log2();
        assert!(order > 3.8, "order {order}");
    }

    #[test]
    fn discrete_embedding_matches_analytic_torus() {
        let c = torus(32);
        let e = from_embedding(c.grid, c.x.clone(), DerivativeScheme::Spectral).unwrap();
        for k in 0..c.len() {
            assert!((e.mean_curv[k] - c.mean_curv[k]).abs() < 1e-10);
            assert!((e.gauss_curv[k] - c.gauss_curv[k]).abs() < 1e-10);
            assert!((e.normal[k] - c.normal[k]).norm() < 1e-12);
            for kk in 0..2 {
                assert!((e.christoffel[k][kk] - c.christoffel[k][kk]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn riemann_contraction_recovers_gauss_curvature() {
        let c = torus(32);
        let k2 = c.gauss_from_christoffel();
        for k in 0..c.len() {
            assert!((k2[k] - c.gauss_curv[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn solve_const_inverts_operator() {
        let g = Grid::new(16, 16, TAU, TAU).unwrap();
        let d = Differ::new(g, DerivativeScheme::Spectral);
        let u: Vec<f64> = (0..g.len())
            .map(|k| {
                let (a, b) = g.coords(k);
                (a + 2.0 * b).sin() + 0.3
            })
            .collect();
        // (2 - 3 d11 - d22) u
        let uxx = d.d(&d.d(&u, 0), 0);
        let uyy = d.d(&d.d(&u, 1), 1);
        let f: Vec<f64> = (0..g.len()).map(|k| 2.0 * u[k] - 3.0 * uxx[k] - uyy[k]).collect();
        let back = d.solve_const(&f, 2.0, 3.0, 1.0);
        for k in 0..g.len() {
            assert!((back[k] - u[k]).abs() < 1e-12);
        }
    }
}
