//! Field containers and differential calculus on a chart.
//!
//! Every operator takes the chart by reference and returns a fresh field.
//! Naming:
//! - `nabla_c_*`: componentwise derivative, the last slot is the new tangential one;
//! - `div_c_*`: the L2-adjoint divergence, `-nabla_c^*`;
//! - `div_trace_*`: the trace divergence, `Tr . nabla_c`;
//! - [`grad_c`]: the adjoint of `-Div_C` on vectors, `grad f + H f nu`.

use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::ChartGeometry;
use crate::{Mat2, Mat3, Vec2, Vec3};

/// Rank-3 embedded tensor: `self.0[c][(a, b)] = T^{ab}_c`, where `c` is the
/// tangential slot created by a componentwise derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank3(pub [Mat3; 3]);

impl Rank3 {
    pub fn zeros() -> Self {
        Rank3([Mat3::zeros(); 3])
    }
    /// Contraction of the last slot with `u`.
    pub fn apply(&self, u: &Vec3) -> Mat3 {
        self.0[0] * u[0] + self.0[1] * u[1] + self.0[2] * u[2]
    }
    /// `(T^T : T)_{cd} = sum_{ab} T^{ab}_c T^{ab}_d`.
    pub fn gram(&self) -> Mat3 {
        Mat3::from_fn(|c, d| frob(&self.0[c], &self.0[d]))
    }
    /// Applies `f` to each first-two-slot matrix.
    pub fn map_slices(&self, f: impl Fn(&Mat3) -> Mat3) -> Self {
        Rank3([f(&self.0[0]), f(&self.0[1]), f(&self.0[2])])
    }
    /// Right-multiplies the last slot by a matrix: `(T M)^{ab}_d = T^{ab}_c M_{cd}`.
    pub fn mul_last(&self, m: &Mat3) -> Self {
        let mut out = Rank3::zeros();
        for d in 0..3 {
            for c in 0..3 {
                out.0[d] += self.0[c] * m[(c, d)];
            }
        }
        out
    }
}

impl Add for Rank3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Rank3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}
impl Sub for Rank3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Rank3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}
impl Mul<f64> for Rank3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Rank3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}
impl Neg for Rank3 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

/// Per-node value type with a flat real component view.
pub trait Component:
    Copy + Send + Sync + std::fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + 'static
{
    const DIM: usize;
    fn zero() -> Self;
    fn get(&self, i: usize) -> f64;
    fn set(&mut self, i: usize, v: f64);
    fn dot(&self, o: &Self) -> f64 {
        (0..Self::DIM).map(|i| self.get(i) * o.get(i)).sum()
    }
}

impl Component for f64 {
    const DIM: usize = 1;
    fn zero() -> Self {
        0.0
    }
    fn get(&self, _: usize) -> f64 {
        *self
    }
    fn set(&mut self, _: usize, v: f64) {
        *self = v
    }
    fn dot(&self, o: &Self) -> f64 {
        self * o
    }
}

macro_rules! impl_component_na {
    ($t:ty, $n:expr) => {
        impl Component for $t {
            const DIM: usize = $n;
            fn zero() -> Self {
                <$t>::zeros()
            }
            fn get(&self, i: usize) -> f64 {
                self.as_slice()[i]
            }
            fn set(&mut self, i: usize, v: f64) {
                self.as_mut_slice()[i] = v
            }
            fn dot(&self, o: &Self) -> f64 {
                self.component_mul(o).sum()
            }
        }
    };
}
impl_component_na!(Vec2, 2);
impl_component_na!(Vec3, 3);
impl_component_na!(Mat2, 4);
impl_component_na!(Mat3, 9);

impl Component for Rank3 {
    const DIM: usize = 27;
    fn zero() -> Self {
        Rank3::zeros()
    }
    fn get(&self, i: usize) -> f64 {
        self.0[i / 9].as_slice()[i % 9]
    }
    fn set(&mut self, i: usize, v: f64) {
        self.0[i / 9].as_mut_slice()[i % 9] = v
    }
    fn dot(&self, o: &Self) -> f64 {
        (0..3).map(|c| frob(&self.0[c], &o.0[c])).sum()
    }
}

/// Frobenius inner product of two matrices.
#[inline]
pub fn frob(a: &Mat3, b: &Mat3) -> f64 {
    a.component_mul(b).sum()
}

/// Node-indexed field of values of type `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub data: Vec<T>,
}

pub type ScalarField = Field<f64>;
/// Embedded (R3-valued) vector field.
pub type VectorField = Field<Vec3>;
/// Cartesian 3x3 proxies.
pub type MatrixField = Field<Mat3>;
pub type EmbeddedTensor2Field = MatrixField;
pub type Rank3Field = Field<Rank3>;
/// Contravariant chart components of a tangential vector field.
pub type TangentVectorField = Field<Vec2>;
/// Contravariant chart components of a tangential 2-tensor field.
pub type TangentTensor2Field = Field<Mat2>;

impl<T: Component> Field<T> {
    pub fn new(data: Vec<T>) -> Self {
        Self { data }
    }
    pub fn zeros(n: usize) -> Self {
        Self { data: vec![T::zero(); n] }
    }
    pub fn constant(n: usize, v: T) -> Self {
        Self { data: vec![v; n] }
    }
    pub fn from_fn(n: usize, f: impl FnMut(usize) -> T) -> Self {
        Self { data: (0..n).map(f).collect() }
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
    pub fn map<U: Component>(&self, f: impl Fn(&T) -> U) -> Field<U> {
        Field { data: self.data.iter().map(f).collect() }
    }
    pub fn map_indexed<U: Component>(&self, f: impl Fn(usize, &T) -> U) -> Field<U> {
        Field { data: self.data.iter().enumerate().map(|(k, v)| f(k, v)).collect() }
    }
    pub fn zip_map<U: Component, V: Component>(&self, o: &Field<U>, f: impl Fn(&T, &U) -> V) -> Field<V> {
        assert_eq!(self.len(), o.len(), "field length mismatch");
        Field { data: self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect() }
    }
    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| *v * s)
    }
    /// `self + s * o`.
    pub fn axpy(&self, s: f64, o: &Self) -> Self {
        self.zip_map(o, |a, b| *a + *b * s)
    }
    pub fn add(&self, o: &Self) -> Self {
        self.zip_map(o, |a, b| *a + *b)
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.zip_map(o, |a, b| *a - *b)
    }
    /// Largest absolute component over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().flat_map(|v| (0..T::DIM).map(move |i| v.get(i).abs())).fold(0.0, f64::max)
    }
    /// Largest pointwise Euclidean/Frobenius norm.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|v| v.dot(v).sqrt()).fold(0.0, f64::max)
    }
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| (0..T::DIM).all(|i| v.get(i).is_finite()))
    }
    /// Splits into one real array per component.
    pub fn components(&self) -> Vec<Vec<f64>> {
        (0..T::DIM).map(|i| self.data.iter().map(|v| v.get(i)).collect()).collect()
    }
    pub fn from_components(c: &[Vec<f64>]) -> Self {
        assert_eq!(c.len(), T::DIM);
        let n = c[0].len();
        Self::from_fn(n, |k| {
            let mut v = T::zero();
            for (i, ci) in c.iter().enumerate() {
                v.set(i, ci[k]);
            }
            v
        })
    }
}

/// Declared symmetry class of an embedded 2-tensor field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorClass {
    General,
    Symmetric,
    Skew,
    QTensor,
    RightTangential,
}

/// Validates a class declaration (`1e-12` absolute tolerance).
pub fn check_class(chart: &ChartGeometry, r: &MatrixField, class: TensorClass) -> Result<()> {
    chart.check_len(r.len())?;
    const TOL: f64 = 1e-12;
    for (k, m) in r.data.iter().enumerate() {
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::ClassViolation { node: k, reason: "non-finite entry".into() });
        }
        let bad = match class {
            TensorClass::General => None,
            TensorClass::Symmetric => ((m - m.transpose()).amax() > TOL).then_some("not symmetric"),
            TensorClass::Skew => ((m + m.transpose()).amax() > TOL).then_some("not skew"),
            TensorClass::QTensor => {
                if (m - m.transpose()).amax() > TOL {
                    Some("not symmetric")
                } else if m.trace().abs() >= TOL {
                    Some("not traceless")
                } else {
                    None
                }
            }
            TensorClass::RightTangential => ((m * chart.normal[k]).amax() > TOL).then_some("R nu != 0"),
        };
        if let Some(reason) = bad {
            return Err(Error::ClassViolation { node: k, reason: reason.into() });
        }
    }
    Ok(())
}

/// Constructs a matrix field after validating its declared class.
pub fn matrix_field_checked(chart: &ChartGeometry, data: Vec<Mat3>, class: TensorClass) -> Result<MatrixField> {
    let f = Field::new(data);
    check_class(chart, &f, class)?;
    Ok(f)
}

// ---------------------------------------------------------------------------
// L2 pairings

/// `sum_k a_k . b_k mu_k h1 h2`.
pub fn l2_inner<T: Component>(chart: &ChartGeometry, a: &Field<T>, b: &Field<T>) -> f64 {
    a.data.iter().zip(&b.data).enumerate().map(|(k, (x, y))| x.dot(y) * chart.area_form[k]).sum::<f64>()
        * chart.grid.cell()
}

pub fn l2_norm<T: Component>(chart: &ChartGeometry, a: &Field<T>) -> f64 {
    l2_inner(chart, a, a).sqrt()
}

// ---------------------------------------------------------------------------
// Chart partials

/// Componentwise partial derivative along chart direction `dir`.
pub fn partial<T: Component>(chart: &ChartGeometry, f: &Field<T>, dir: usize) -> Field<T> {
    assert_eq!(f.len(), chart.len(), "field does not live on this chart");
    let d: Vec<Vec<f64>> = f.components().iter().map(|c| chart.diff.d(c, dir)).collect();
    Field::from_components(&d)
}

// ---------------------------------------------------------------------------
// Componentwise derivative

/// `nabla_C f = sum_i d_i f d^i X`, the tangential gradient as an embedded vector.
pub fn nabla_c_scalar(chart: &ChartGeometry, f: &ScalarField) -> VectorField {
    let d0 = partial(chart, f, 0);
    let d1 = partial(chart, f, 1);
    Field::from_fn(chart.len(), |k| chart.dual[0][k] * d0.data[k] + chart.dual[1][k] * d1.data[k])
}

/// `nabla_C W = sum_i d_i W (x) d^i X`.
pub fn nabla_c_vector(chart: &ChartGeometry, w: &VectorField) -> MatrixField {
    let d0 = partial(chart, w, 0);
    let d1 = partial(chart, w, 1);
    Field::from_fn(chart.len(), |k| {
        d0.data[k] * chart.dual[0][k].transpose() + d1.data[k] * chart.dual[1][k].transpose()
    })
}

/// `(nabla_C R)^{ab}_c = sum_i d_i R^{ab} (d^i X)_c`.
pub fn nabla_c_matrix(chart: &ChartGeometry, r: &MatrixField) -> Rank3Field {
    let d0 = partial(chart, r, 0);
    let d1 = partial(chart, r, 1);
    Field::from_fn(chart.len(), |k| {
        let (a, b) = (chart.dual[0][k], chart.dual[1][k]);
        Rank3(std::array::from_fn(|c| d0.data[k] * a[c] + d1.data[k] * b[c]))
    })
}

// ---------------------------------------------------------------------------
// Divergences

/// `(1/mu) sum_i d_i (mu w_i)`, the building block of every adjoint divergence.
fn adjoint_sum<T: Component>(chart: &ChartGeometry, w0: Field<T>, w1: Field<T>) -> Field<T> {
    let a = partial(chart, &w0, 0);
    let b = partial(chart, &w1, 1);
    Field::from_fn(chart.len(), |k| (a.data[k] + b.data[k]) * (1.0 / chart.area_form[k]))
}

/// Adjoint divergence of a vector field, `div_C W = -nabla_C^* W`.
pub fn div_c_vector(chart: &ChartGeometry, w: &VectorField) -> ScalarField {
    let w0 = Field::from_fn(chart.len(), |k| chart.area_form[k] * w.data[k].dot(&chart.dual[0][k]));
    let w1 = Field::from_fn(chart.len(), |k| chart.area_form[k] * w.data[k].dot(&chart.dual[1][k]));
    adjoint_sum(chart, w0, w1)
}

/// Adjoint divergence of a 2-tensor (contraction over the last slot).
pub fn div_c_matrix(chart: &ChartGeometry, r: &MatrixField) -> VectorField {
    let w0 = Field::from_fn(chart.len(), |k| r.data[k] * chart.dual[0][k] * chart.area_form[k]);
    let w1 = Field::from_fn(chart.len(), |k| r.data[k] * chart.dual[1][k] * chart.area_form[k]);
    adjoint_sum(chart, w0, w1)
}

/// Adjoint divergence of a rank-3 field (contraction over the last slot).
pub fn div_c_rank3(chart: &ChartGeometry, t: &Rank3Field) -> MatrixField {
    let w0 = Field::from_fn(chart.len(), |k| t.data[k].apply(&chart.dual[0][k]) * chart.area_form[k]);
    let w1 = Field::from_fn(chart.len(), |k| t.data[k].apply(&chart.dual[1][k]) * chart.area_form[k]);
    adjoint_sum(chart, w0, w1)
}

/// Trace divergence of a vector field, `Div_C W = Tr nabla_C W`.
pub fn div_trace_vector(chart: &ChartGeometry, w: &VectorField) -> ScalarField {
    let d0 = partial(chart, w, 0);
    let d1 = partial(chart, w, 1);
    Field::from_fn(chart.len(), |k| d0.data[k].dot(&chart.dual[0][k]) + d1.data[k].dot(&chart.dual[1][k]))
}

/// Trace divergence of a 2-tensor.
pub fn div_trace_matrix(chart: &ChartGeometry, r: &MatrixField) -> VectorField {
    let d0 = partial(chart, r, 0);
    let d1 = partial(chart, r, 1);
    Field::from_fn(chart.len(), |k| d0.data[k] * chart.dual[0][k] + d1.data[k] * chart.dual[1][k])
}

/// Trace divergence of a rank-3 field.
pub fn div_trace_rank3(chart: &ChartGeometry, t: &Rank3Field) -> MatrixField {
    let d0 = partial(chart, t, 0);
    let d1 = partial(chart, t, 1);
    Field::from_fn(chart.len(), |k| d0.data[k].apply(&chart.dual[0][k]) + d1.data[k].apply(&chart.dual[1][k]))
}

/// `Grad_C f = Div_C(f Id_S) = grad f + H f nu`.
pub fn grad_c(chart: &ChartGeometry, f: &ScalarField) -> VectorField {
    let g = nabla_c_scalar(chart, f);
    Field::from_fn(chart.len(), |k| g.data[k] + chart.normal[k] * (chart.mean_curv[k] * f.data[k]))
}

// ---------------------------------------------------------------------------
// Laplacians

/// Laplace-Beltrami operator; identical to `div_C . nabla_C` on scalars.
pub fn laplace_scalar(chart: &ChartGeometry, f: &ScalarField) -> ScalarField {
    div_c_vector(chart, &nabla_c_scalar(chart, f))
}

/// Componentwise Laplacian of an embedded vector field.
pub fn laplace_c_vector(chart: &ChartGeometry, w: &VectorField) -> VectorField {
    div_c_matrix(chart, &nabla_c_vector(chart, w))
}

/// Componentwise Laplacian `Delta_C R = div_C nabla_C R`.
pub fn laplace_c_matrix(chart: &ChartGeometry, r: &MatrixField) -> MatrixField {
    div_c_rank3(chart, &nabla_c_matrix(chart, r))
}

// ---------------------------------------------------------------------------
// Tangential calculus on embedded proxies

/// Covariant gradient of a tangential vector given as an embedded proxy:
/// `nabla w = Id_S nabla_C w`.
pub fn cov_grad_tangent_vector(chart: &ChartGeometry, w: &VectorField) -> MatrixField {
    nabla_c_vector(chart, w).map_indexed(|k, m| chart.proj[k] * m)
}

/// Covariant gradient of a tangential 2-tensor proxy, projected on all slots.
pub fn cov_grad_tangent_tensor(chart: &ChartGeometry, q: &MatrixField) -> Rank3Field {
    nabla_c_matrix(chart, q).map_indexed(|k, t| {
        let p = chart.proj[k];
        t.map_slices(|m| p * m * p)
    })
}

/// Covariant divergence of a tangential 2-tensor proxy: `Id_S div_C sigma`.
pub fn cov_div_tangent_tensor(chart: &ChartGeometry, s: &MatrixField) -> VectorField {
    div_c_matrix(chart, s).map_indexed(|k, v| chart.proj[k] * v)
}

/// Bochner Laplacian of a tangential vector proxy.
pub fn bochner_vector(chart: &ChartGeometry, w: &VectorField) -> VectorField {
    cov_div_tangent_tensor(chart, &cov_grad_tangent_vector(chart, w))
}

/// Bochner Laplacian of a tangential 2-tensor proxy.
pub fn bochner_tensor(chart: &ChartGeometry, q: &MatrixField) -> MatrixField {
    let d = div_c_rank3(chart, &cov_grad_tangent_tensor(chart, q));
    d.map_indexed(|k, m| chart.proj[k] * m * chart.proj[k])
}

// ---------------------------------------------------------------------------
// Christoffel-based covariant derivatives on chart components

/// `f_{|k} = d_k f` (covariant components).
pub fn covariant_derivative_scalar(chart: &ChartGeometry, f: &ScalarField) -> Field<Vec2> {
    let d0 = partial(chart, f, 0);
    let d1 = partial(chart, f, 1);
    Field::from_fn(chart.len(), |k| Vec2::new(d0.data[k], d1.data[k]))
}

/// `out[(i, k)] = w^i_{|k} = d_k w^i + Gamma^i_{kj} w^j`.
pub fn covariant_derivative_vector(chart: &ChartGeometry, w: &TangentVectorField) -> Field<Mat2> {
    let d = [partial(chart, w, 0), partial(chart, w, 1)];
    Field::from_fn(chart.len(), |p| {
        let gam = &chart.christoffel[p];
        Mat2::from_fn(|i, k| d[k].data[p][i] + (0..2).map(|j| gam[i][(k, j)] * w.data[p][j]).sum::<f64>())
    })
}

/// `out[k][(i, j)] = t^{ij}_{|k}` for contravariant components.
pub fn covariant_derivative_tensor(chart: &ChartGeometry, t: &TangentTensor2Field) -> Field<[Mat2; 2]> {
    let d = [partial(chart, t, 0), partial(chart, t, 1)];
    let data = (0..chart.len())
        .map(|p| {
            let gam = &chart.christoffel[p];
            let tt = t.data[p];
            std::array::from_fn(|k| {
                Mat2::from_fn(|i, j| {
                    let mut s = d[k].data[p][(i, j)];
                    for m in 0..2 {
                        s += gam[i][(k, m)] * tt[(m, j)] + gam[j][(k, m)] * tt[(i, m)];
                    }
                    s
                })
            })
        })
        .collect();
    Field { data }
}

/// `out[k][(i, j)] = t_{ij|k}` for covariant components.
pub fn covariant_derivative_covariant_tensor(chart: &ChartGeometry, t: &Field<Mat2>) -> Field<[Mat2; 2]> {
    let d = [partial(chart, t, 0), partial(chart, t, 1)];
    let data = (0..chart.len())
        .map(|p| {
            let gam = &chart.christoffel[p];
            let tt = t.data[p];
            std::array::from_fn(|k| {
                Mat2::from_fn(|i, j| {
                    let mut s = d[k].data[p][(i, j)];
                    for m in 0..2 {
                        s -= gam[m][(k, i)] * tt[(m, j)] + gam[m][(k, j)] * tt[(i, m)];
                    }
                    s
                })
            })
        })
        .collect();
    Field { data }
}

/// Covariant divergence `w^i_{|i}`.
pub fn div_vector(chart: &ChartGeometry, w: &TangentVectorField) -> ScalarField {
    covariant_derivative_vector(chart, w).map(|m| m.trace())
}

/// Covariant divergence `t^{ij}_{|j}` (contravariant result).
pub fn div_tensor(chart: &ChartGeometry, t: &TangentTensor2Field) -> TangentVectorField {
    let d = covariant_derivative_tensor(chart, t);
    Field::new(d.data.iter().map(|d| Vec2::new(d[0][(0, 0)] + d[1][(0, 1)], d[0][(1, 0)] + d[1][(1, 1)])).collect())
}

// ---------------------------------------------------------------------------
// Embedding conversions

/// `w^i d_i X`.
pub fn embed_vector(chart: &ChartGeometry, w: &TangentVectorField) -> VectorField {
    w.map_indexed(|k, v| chart.tangent[0][k] * v[0] + chart.tangent[1][k] * v[1])
}

/// Contravariant components `W . d^i X` of the tangential part.
pub fn chart_vector(chart: &ChartGeometry, w: &VectorField) -> TangentVectorField {
    w.map_indexed(|k, v| Vec2::new(v.dot(&chart.dual[0][k]), v.dot(&chart.dual[1][k])))
}

/// `t^{ij} d_i X (x) d_j X`.
pub fn embed_tensor(chart: &ChartGeometry, t: &TangentTensor2Field) -> MatrixField {
    t.map_indexed(|k, m| {
        let e = [chart.tangent[0][k], chart.tangent[1][k]];
        let mut r = Mat3::zeros();
        for i in 0..2 {
            for j in 0..2 {
                r += m[(i, j)] * e[i] * e[j].transpose();
            }
        }
        r
    })
}

/// Contravariant components `d^i X . R . d^j X` of the tangential block.
pub fn chart_tensor(chart: &ChartGeometry, r: &MatrixField) -> TangentTensor2Field {
    r.map_indexed(|k, m| {
        let d = [chart.dual[0][k], chart.dual[1][k]];
        Mat2::from_fn(|i, j| d[i].dot(&(m * d[j])))
    })
}

// ---------------------------------------------------------------------------
// Projections

/// Orthogonal subspaces of the embedded 2-tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    Sym,
    Skew,
    /// Symmetric traceless.
    Q,
    /// `Id_S R Id_S`.
    Tangential,
    /// Symmetric, tangential and surface-traceless.
    TangentialQ,
    /// Q-tensors with the normal as eigenvector.
    ConformingQ,
    /// Multiples of the identity.
    Iso,
}

impl FromStr for Subspace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sym" | "symmetric" => Subspace::Sym,
            "skew" => Subspace::Skew,
            "q" | "qtensor" => Subspace::Q,
            "tangential" => Subspace::Tangential,
            "tangential-q" | "tangential_q" => Subspace::TangentialQ,
            "conforming-q" | "conforming_q" => Subspace::ConformingQ,
            "iso" => Subspace::Iso,
            _ => return Err(Error::UnknownSubspace(s.to_string())),
        })
    }
}

#[inline]
pub fn sym(r: &Mat3) -> Mat3 {
    (r + r.transpose()) * 0.5
}
#[inline]
pub fn skew(r: &Mat3) -> Mat3 {
    (r - r.transpose()) * 0.5
}
/// Symmetric traceless part.
#[inline]
pub fn proj_q(r: &Mat3) -> Mat3 {
    sym(r) - Mat3::identity() * (r.trace() / 3.0)
}
/// Tangential Q part, `Id_S sym(R) Id_S - (sym(R) : Id_S / 2) Id_S`.
#[inline]
pub fn proj_qs(r: &Mat3, nu: &Vec3) -> Mat3 {
    let p = Mat3::identity() - nu * nu.transpose();
    let t = p * sym(r) * p;
    t - p * (t.trace() * 0.5)
}

/// Pointwise orthogonal projection onto `sub` at a node with normal `nu`.
pub fn project_point(r: &Mat3, sub: Subspace, nu: &Vec3) -> Mat3 {
    let p = Mat3::identity() - nu * nu.transpose();
    match sub {
        Subspace::Sym => sym(r),
        Subspace::Skew => skew(r),
        Subspace::Q => proj_q(r),
        Subspace::Tangential => p * r * p,
        Subspace::TangentialQ => proj_qs(r, nu),
        Subspace::ConformingQ => {
            let qq = proj_q(r);
            let beta = nu.dot(&(qq * nu));
            proj_qs(&qq, nu) + (nu * nu.transpose() - p * 0.5) * beta
        }
        Subspace::Iso => Mat3::identity() * (r.trace() / 3.0),
    }
}

/// Field version of [`project_point`].
pub fn project(chart: &ChartGeometry, r: &MatrixField, sub: Subspace) -> Result<MatrixField> {
    chart.check_len(r.len())?;
    Ok(r.map_indexed(|k, m| project_point(m, sub, &chart.normal[k])))
}

/// Band-limited random scalar field: a sum of Fourier modes with
/// `|m1|, |m2| <= kmax` and coefficients uniform in `[-1, 1]`, scaled so
/// that the maximum over nodes is at most one.
pub fn smooth_random_scalar<R: rand::Rng + ?Sized>(
    grid: &crate::geometry::Grid,
    rng: &mut R,
    kmax: i32,
) -> ScalarField {
    use std::f64::consts::TAU;
    let mut modes = Vec::new();
    for m1 in -kmax..=kmax {
        for m2 in -kmax..=kmax {
            modes.push((m1 as f64, m2 as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    let mut f: Vec<f64> = (0..grid.len())
        .map(|k| {
            let (a, b) = grid.coords(k);
            let (x, y) = (a / grid.p1, b / grid.p2);
            modes
                .iter()
                .map(|&(m1, m2, c, s)| {
                    let ph = TAU * (m1 * x + m2 * y);
                    c * ph.cos() + s * ph.sin()
                })
                .sum()
        })
        .collect();
    let m = f.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        f.iter_mut().for_each(|v| *v /= m);
    }
    Field::new(f)
}
