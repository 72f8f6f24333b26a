//! Matrix Lie algebra substrate.
//!
//! Elements of `so(n)` are stored as coordinate vectors over the basis
//! `E_ij = e_i e_jᵀ − e_j e_iᵀ` (`i < j`, lexicographic order). With the
//! inner product `⟨A,B⟩ = −½ tr(AB)` that basis is orthonormal, so the
//! bi-invariant inner product is the Euclidean dot product of coordinates.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singular-value cutoff used for numerical null spaces.
pub const NULL_SPACE_CUTOFF: f64 = 1e-9;

/// Tolerance below which a bracket counts as zero for commuting tests.
pub const COMMUTE_TOL: f64 = 1e-10;

const MAX_GENERIC_RESAMPLES: usize = 100;

/// Classical families of compact matrix Lie algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `so(n)`: real skew-symmetric `n × n` matrices.
    SpecialOrthogonal,
}

/// An element of a Lie algebra, in coordinates over the algebra's basis.
///
/// Elements do not carry a pointer to their algebra; operations check that
/// the coordinate length matches the algebra dimension instead.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    coords: DVector<f64>,
}

impl AlgebraElement {
    pub fn zeros(dim: usize) -> Self {
        Self { coords: DVector::zeros(dim) }
    }

    pub fn from_vector(coords: DVector<f64>) -> Self {
        Self { coords }
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self { coords: DVector::from_column_slice(coords) }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `h₀`-inner product; valid because the basis is orthonormal.
    pub fn dot(&self, other: &Self) -> f64 {
        self.coords.dot(&other.coords)
    }

    /// `h₀`-norm.
    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.coords.norm_squared()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    /// Unit vector in the same direction, or `None` for (near) zero input.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 1e-300).then(|| self * (1.0 / n))
    }
}

macro_rules! impl_binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<AlgebraElement> for AlgebraElement {
            type Output = AlgebraElement;
            fn $f(self, rhs: AlgebraElement) -> AlgebraElement {
                AlgebraElement { coords: self.coords $op rhs.coords }
            }
        }
        impl $tr<&AlgebraElement> for AlgebraElement {
            type Output = AlgebraElement;
            fn $f(self, rhs: &AlgebraElement) -> AlgebraElement {
                AlgebraElement { coords: self.coords $op &rhs.coords }
            }
        }
        impl $tr<AlgebraElement> for &AlgebraElement {
            type Output = AlgebraElement;
            fn $f(self, rhs: AlgebraElement) -> AlgebraElement {
                AlgebraElement { coords: &self.coords $op rhs.coords }
            }
        }
        impl $tr<&AlgebraElement> for &AlgebraElement {
            type Output = AlgebraElement;
            fn $f(self, rhs: &AlgebraElement) -> AlgebraElement {
                AlgebraElement { coords: &self.coords $op &rhs.coords }
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);

impl AddAssign<&AlgebraElement> for AlgebraElement {
    fn add_assign(&mut self, rhs: &AlgebraElement) {
        self.coords += &rhs.coords;
    }
}

impl SubAssign<&AlgebraElement> for AlgebraElement {
    fn sub_assign(&mut self, rhs: &AlgebraElement) {
        self.coords -= &rhs.coords;
    }
}

impl Mul<f64> for AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: f64) -> AlgebraElement {
        AlgebraElement { coords: self.coords * rhs }
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: f64) -> AlgebraElement {
        AlgebraElement { coords: &self.coords * rhs }
    }
}

impl Mul<&AlgebraElement> for f64 {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        rhs * self
    }
}

impl Mul<AlgebraElement> for f64 {
    type Output = AlgebraElement;
    fn mul(self, rhs: AlgebraElement) -> AlgebraElement {
        rhs * self
    }
}

impl Neg for AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement { coords: -self.coords }
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement { coords: -&self.coords }
    }
}

/// A special orthogonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    matrix: DMatrix<f64>,
}

impl GroupElement {
    /// Validates `‖gᵀg − I‖∞ < 1e-10` and `det g > 0`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let n = matrix.nrows();
        let residual = (matrix.transpose() * &matrix - DMatrix::identity(n, n)).amax();
        let det = matrix.determinant();
        if residual >= 1e-10 || det <= 0.0 {
            return Err(Error::NotOrthogonal { residual, det });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: DMatrix::identity(n, n) }
    }

    /// Rotation by `theta` in the `(i, j)` coordinate plane (1-based), taking
    /// `e_i` towards `e_j`.
    pub fn rotation(n: usize, i: usize, j: usize, theta: f64) -> Self {
        assert!(i >= 1 && j >= 1 && i <= n && j <= n && i != j, "bad rotation plane ({i},{j})");
        let (i, j) = (i - 1, j - 1);
        let mut m = DMatrix::identity(n, n);
        let (s, c) = theta.sin_cos();
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(j, i)] = s;
        m[(i, j)] = -s;
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn inverse(&self) -> Self {
        Self { matrix: self.matrix.transpose() }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix * &other.matrix }
    }

    /// Re-projects onto the orthogonal group (polar factor) to undo drift
    /// accumulated by long products.
    pub fn reorthonormalized(&self) -> Self {
        let svd = self.matrix.clone().svd(true, true);
        let u = svd.u.expect("u requested");
        let vt = svd.v_t.expect("v_t requested");
        Self { matrix: u * vt }
    }
}

/// An `h₀`-orthonormal subspace of a Lie algebra, stored as the columns of
/// a `dim 𝔤 × k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: DMatrix::zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: DMatrix::identity(ambient_dim, ambient_dim) }
    }

    /// Orthonormalizes the given spanning set with modified Gram–Schmidt
    /// (two passes), dropping vectors that are dependent to within `1e-10`.
    pub fn span(ambient_dim: usize, elements: &[AlgebraElement]) -> Result<Self> {
        let mut cols: Vec<DVector<f64>> = Vec::new();
        for e in elements {
            if e.dim() != ambient_dim {
                return Err(Error::Dimension { expected: ambient_dim, found: e.dim() });
            }
            let scale = e.norm();
            if scale <= 1e-14 {
                continue;
            }
            let mut v = e.coords().clone();
            for _ in 0..2 {
                for c in &cols {
                    let d = c.dot(&v);
                    v.axpy(-d, c, 1.0);
                }
            }
            let r = v.norm();
            if r > 1e-10 * scale.max(1.0) {
                cols.push(v / r);
            }
        }
        Ok(Self::from_columns(ambient_dim, &cols))
    }

    fn from_columns(ambient_dim: usize, cols: &[DVector<f64>]) -> Self {
        let basis = if cols.is_empty() {
            DMatrix::zeros(ambient_dim, 0)
        } else {
            DMatrix::from_columns(cols)
        };
        Self { ambient_dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn element(&self, i: usize) -> AlgebraElement {
        AlgebraElement::from_vector(self.basis.column(i).into_owned())
    }

    pub fn elements(&self) -> Vec<AlgebraElement> {
        (0..self.dim()).map(|i| self.element(i)).collect()
    }

    /// Coordinates of the projection of `a` in this subspace's basis.
    pub fn local_coords(&self, a: &AlgebraElement) -> DVector<f64> {
        self.basis.tr_mul(a.coords())
    }

    pub fn from_local(&self, c: &DVector<f64>) -> AlgebraElement {
        AlgebraElement::from_vector(&self.basis * c)
    }

    /// `h₀`-orthogonal projection `Σ ⟨a, bᵢ⟩ bᵢ`.
    pub fn project(&self, a: &AlgebraElement) -> AlgebraElement {
        self.from_local(&self.local_coords(a))
    }

    pub fn contains(&self, a: &AlgebraElement, tol: f64) -> bool {
        (a - self.project(a)).norm() <= tol * a.norm().max(1.0)
    }

    /// `self ⊖ inner`: the part of `self` orthogonal to `inner`.
    pub fn minus(&self, inner: &Subspace) -> Subspace {
        let mut cols: Vec<DVector<f64>> = Vec::new();
        let candidates = self.elements();
        for c in candidates {
            let mut v = (&c - inner.project(&c)).into_vector();
            for _ in 0..2 {
                for u in &cols {
                    let d = u.dot(&v);
                    v.axpy(-d, u, 1.0);
                }
                let w = AlgebraElement::from_vector(v);
                v = (&w - inner.project(&w)).into_vector();
            }
            let r = v.norm();
            if r > 1e-8 {
                cols.push(v / r);
            }
        }
        Self::from_columns(self.ambient_dim, &cols)
    }

    /// Orthogonal complement in the ambient algebra.
    pub fn complement(&self) -> Subspace {
        Subspace::full(self.ambient_dim).minus(self)
    }

    /// `{v ∈ self : v ⟂ other}`, computed as a null space so it is correct
    /// even when `other` is not contained in `self`.
    pub fn orthogonal_part(&self, other: &Subspace) -> Subspace {
        if self.dim() == 0 || other.dim() == 0 {
            return self.clone();
        }
        let m = other.basis.tr_mul(&self.basis);
        let null = null_space(&m, NULL_SPACE_CUTOFF);
        let cols: Vec<DVector<f64>> =
            null.iter().map(|c| &self.basis * c).map(|v| v.normalize()).collect();
        let elems: Vec<AlgebraElement> = cols.into_iter().map(AlgebraElement::from_vector).collect();
        Subspace::span(self.ambient_dim, &elems).expect("dimensions agree")
    }

    /// Maximum deviation of the Gram matrix from the identity.
    pub fn gram_residual(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        (self.basis.tr_mul(&self.basis) - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// A random unit vector of this subspace.
    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<AlgebraElement> {
        if self.dim() == 0 {
            return None;
        }
        loop {
            let c = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let n = c.norm();
            if n > 1e-8 {
                return Some(self.from_local(&(c / n)));
            }
        }
    }
}

/// Right singular vectors of `m` whose singular value is below
/// `cutoff · σ_max` (all of them when `m` vanishes).
pub(crate) fn null_space(m: &DMatrix<f64>, cutoff: f64) -> Vec<DVector<f64>> {
    let ncols = m.ncols();
    if m.nrows() == 0 || m.amax() == 0.0 {
        return (0..ncols).map(|i| DVector::from_fn(ncols, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
    }
    // Pad to at least square so the SVD returns a full set of right vectors.
    let padded = if m.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < cutoff * smax)
        .map(|(i, _)| vt.row(i).transpose())
        .collect()
}

/// Result of a centralizer computation.
#[derive(Debug, Clone)]
pub struct Centralizer {
    pub subspace: Subspace,
    /// Set when the input was zero, in which case the centralizer is the
    /// whole algebra.
    pub degenerate: bool,
}

/// A matrix Lie algebra with its standard orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    family: Family,
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl LieAlgebra {
    /// `so(n)`, `n ≥ 2`.
    pub fn so(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("so(n) requires n ≥ 2, got {n}")));
        }
        let pairs = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        Ok(Self { family: Family::SpecialOrthogonal, n, pairs })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Matrix size.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    /// Dimension of a maximal abelian subalgebra.
    pub fn rank(&self) -> usize {
        self.n / 2
    }

    /// 1-based `(i, j)` label of basis element `k`.
    pub fn label(&self, k: usize) -> (usize, usize) {
        let (i, j) = self.pairs[k];
        (i + 1, j + 1)
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Basis element `E_ij` with 1-based indices; `e(j, i) = −e(i, j)`.
    pub fn e(&self, i: usize, j: usize) -> AlgebraElement {
        assert!(i >= 1 && j >= 1 && i <= self.n && j <= self.n && i != j, "bad index pair ({i},{j})");
        let mut out = AlgebraElement::zeros(self.dim());
        if i < j {
            out.coords[self.pair_index(i - 1, j - 1)] = 1.0;
        } else {
            out.coords[self.pair_index(j - 1, i - 1)] = -1.0;
        }
        out
    }

    pub fn basis_element(&self, k: usize) -> AlgebraElement {
        let mut out = AlgebraElement::zeros(self.dim());
        out.coords[k] = 1.0;
        out
    }

    pub fn basis(&self) -> Vec<AlgebraElement> {
        (0..self.dim()).map(|k| self.basis_element(k)).collect()
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement::zeros(self.dim())
    }

    pub fn check(&self, a: &AlgebraElement) -> Result<()> {
        if a.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.dim(), found: a.dim() })
        }
    }

    /// The skew-symmetric matrix with these coordinates.
    pub fn to_matrix(&self, a: &AlgebraElement) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let c = a.coords[k];
            m[(i, j)] = c;
            m[(j, i)] = -c;
        }
        m
    }

    /// Coordinates of the skew part of `m`.
    pub fn from_matrix(&self, m: &DMatrix<f64>) -> AlgebraElement {
        let coords = DVector::from_iterator(
            self.dim(),
            self.pairs.iter().map(|&(i, j)| 0.5 * (m[(i, j)] - m[(j, i)])),
        );
        AlgebraElement { coords }
    }

    /// `⟨A,B⟩ = −½ tr(AB)`.
    pub fn inner(&self, a: &AlgebraElement, b: &AlgebraElement) -> f64 {
        assert_eq!(a.dim(), self.dim(), "element does not belong to this algebra");
        assert_eq!(b.dim(), self.dim(), "element does not belong to this algebra");
        a.dot(b)
    }

    pub fn checked_inner(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.dot(b))
    }

    /// `[A,B] = AB − BA`.
    pub fn bracket(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        assert_eq!(a.dim(), self.dim(), "element does not belong to this algebra");
        assert_eq!(b.dim(), self.dim(), "element does not belong to this algebra");
        let ma = self.to_matrix(a);
        let mb = self.to_matrix(b);
        let ab = &ma * &mb;
        // AB − BA = AB − (AB)ᵀ for skew A, B: only the upper triangle is needed.
        let coords =
            DVector::from_iterator(self.dim(), self.pairs.iter().map(|&(i, j)| ab[(i, j)] - ab[(j, i)]));
        AlgebraElement { coords }
    }

    pub fn checked_bracket(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.bracket(a, b))
    }

    /// Matrix of `Z ↦ [A, Z]` in basis coordinates.
    pub fn ad_matrix(&self, a: &AlgebraElement) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> =
            self.basis().iter().map(|z| self.bracket(a, z).into_vector()).collect();
        DMatrix::from_columns(&cols)
    }

    /// `Ad_g A = g A g⁻¹`.
    pub fn ad_g(&self, g: &GroupElement, a: &AlgebraElement) -> AlgebraElement {
        assert_eq!(g.n(), self.n, "group element has the wrong size");
        let m = g.matrix() * self.to_matrix(a) * g.matrix().transpose();
        self.from_matrix(&m)
    }

    /// Matrix exponential by scaling and squaring with a Taylor kernel.
    pub fn exp(&self, a: &AlgebraElement) -> GroupElement {
        GroupElement::new_unchecked(expm(&self.to_matrix(a)))
    }

    pub fn centralizer(&self, a: &AlgebraElement) -> Centralizer {
        if a.is_zero(0.0) {
            return Centralizer { subspace: Subspace::full(self.dim()), degenerate: true };
        }
        let null = null_space(&self.ad_matrix(a), NULL_SPACE_CUTOFF);
        let elems: Vec<AlgebraElement> = null.into_iter().map(AlgebraElement::from_vector).collect();
        let subspace = Subspace::span(self.dim(), &elems).expect("dimensions agree");
        Centralizer { subspace, degenerate: false }
    }

    /// Joint centralizer of every basis vector of `s`.
    pub fn common_centralizer(&self, s: &Subspace) -> Subspace {
        if s.dim() == 0 {
            return Subspace::full(self.dim());
        }
        let blocks: Vec<DMatrix<f64>> = s.elements().iter().map(|b| self.ad_matrix(b)).collect();
        let d = self.dim();
        let mut stacked = DMatrix::zeros(d * blocks.len(), d);
        for (i, b) in blocks.iter().enumerate() {
            stacked.view_mut((i * d, 0), (d, d)).copy_from(b);
        }
        let null = null_space(&stacked, NULL_SPACE_CUTOFF);
        let elems: Vec<AlgebraElement> = null.into_iter().map(AlgebraElement::from_vector).collect();
        Subspace::span(d, &elems).expect("dimensions agree")
    }

    /// An element is generic when its centralizer has dimension `rank`.
    pub fn is_generic(&self, a: &AlgebraElement) -> bool {
        let c = self.centralizer(a);
        !c.degenerate && c.subspace.dim() == self.rank()
    }

    /// A maximal abelian subalgebra containing the commuting pair `x, y`,
    /// grown greedily from joint centralizers. Zero inputs are ignored.
    pub fn maximal_abelian_containing(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<Subspace> {
        self.check(x)?;
        self.check(y)?;
        let comm = self.bracket(x, y).norm();
        if comm >= COMMUTE_TOL {
            return Err(Error::Precondition(format!("inputs do not commute: |[X,Y]| = {comm:.3e}")));
        }
        let mut current = Subspace::span(self.dim(), &[x.clone(), y.clone()])?;
        loop {
            let cent = self.common_centralizer(&current);
            let extra = cent.minus(&current);
            if extra.dim() == 0 {
                break;
            }
            let mut elems = current.elements();
            elems.push(extra.element(0));
            current = Subspace::span(self.dim(), &elems)?;
        }
        let elems = current.elements();
        for (i, a) in elems.iter().enumerate() {
            for b in &elems[i + 1..] {
                let r = self.bracket(a, b).norm();
                if r >= COMMUTE_TOL {
                    return Err(Error::NotClosed { what: "torus basis is not abelian".into(), residual: r });
                }
            }
        }
        if current.dim() != self.rank() {
            return Err(Error::NotClosed {
                what: format!("torus has dimension {} but rank is {}", current.dim(), self.rank()),
                residual: (current.dim() as f64 - self.rank() as f64).abs(),
            });
        }
        Ok(current)
    }

    /// `V + eps·W` for a random unit `W` of `torus` (orthogonal to `avoid`
    /// when given), resampled until the result is generic.
    pub fn generic_perturb<R: Rng + ?Sized>(
        &self,
        torus: &Subspace,
        v: &AlgebraElement,
        eps: f64,
        avoid: Option<&Subspace>,
        rng: &mut R,
    ) -> Result<AlgebraElement> {
        self.check(v)?;
        if !(eps >= 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be ≥ 0, got {eps}")));
        }
        if !torus.contains(v, 1e-10) {
            return Err(Error::Precondition("perturbation base point is not in the torus".into()));
        }
        if eps == 0.0 {
            return if self.is_generic(v) {
                Ok(v.clone())
            } else {
                Err(Error::GenericityUnreachable { attempts: 0 })
            };
        }
        let pool = match avoid {
            Some(k) => torus.orthogonal_part(k),
            None => torus.clone(),
        };
        if pool.dim() == 0 {
            return Err(Error::UnsupportedConfiguration(
                "torus has no directions orthogonal to the isotropy algebra".into(),
            ));
        }
        for _ in 0..MAX_GENERIC_RESAMPLES {
            let w = pool.random_unit(rng).expect("pool is non-empty");
            let out = v + w * eps;
            if self.is_generic(&out) {
                return Ok(out);
            }
        }
        Err(Error::GenericityUnreachable { attempts: MAX_GENERIC_RESAMPLES })
    }

    /// Random element with i.i.d. standard normal coordinates.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> AlgebraElement {
        AlgebraElement::from_vector(DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal)))
    }

    /// Uniformly distributed (Haar) random group element.
    pub fn random_group_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        random_orthogonal(self.n, rng)
    }
}

/// Haar-random special orthogonal matrix (QR of a Gaussian matrix with
/// sign correction).
pub(crate) fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GroupElement {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    GroupElement::new_unchecked(q)
}

/// `exp(M)` by scaling and squaring with a degree-≤30 Taylor kernel.
pub(crate) fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm1 = m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    let squarings = if norm1 > 0.25 { (norm1 / 0.25).log2().ceil() as u32 } else { 0 };
    let scaled = m / 2f64.powi(squarings as i32);
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        result += &term;
        if term.amax() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
