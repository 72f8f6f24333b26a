//! The chain `𝔨 ⊂ 𝔥 ⊂ 𝔤`, the horizontal and vertical spaces of the quotient
//! `(G,h) × F → M` at points `(g, yK)`, and the fatness audit.
//!
//! Tangent vectors to `G × F` are left-trivialized: the `G` part of a pair is
//! `dL_g⁻¹` of the vector, the `F` part is `dL_y⁻¹` of its horizontal lift to
//! `H`, an element of `𝔪`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::liealg::{AlgebraElement, GroupElement, LieAlgebra, Subspace};
use crate::metric::MetricSpec;

const FATNESS_RESTARTS: usize = 20;
const FATNESS_MAX_SWEEPS: usize = 500;

/// Deficit above which a bundle is reported fat.
pub const FAT_THRESHOLD: f64 = 1e-6;

/// A subalgebra chain `𝔨 ⊂ 𝔥 ⊂ 𝔤` with `𝔪 = 𝔥 ⊖ 𝔨` and `𝔭 = 𝔤 ⊖ 𝔥`.
#[derive(Debug, Clone)]
pub struct BundleTriple {
    algebra: LieAlgebra,
    k: Subspace,
    h: Subspace,
    m: Subspace,
    p: Subspace,
}

/// A tangent vector to `(G,h) × F`, left-trivialized.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub g: AlgebraElement,
    pub f: AlgebraElement,
}

impl TangentPair {
    pub fn new(g: AlgebraElement, f: AlgebraElement) -> Self {
        Self { g, f }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { g: AlgebraElement::zeros(dim), f: AlgebraElement::zeros(dim) }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { g: &self.g * s, f: &self.f * s }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { g: &self.g + &other.g, f: &self.f + &other.f }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { g: &self.g - &other.g, f: &self.f - &other.f }
    }

    /// Euclidean norm of the stacked coordinates (not a metric norm).
    pub fn coord_norm(&self) -> f64 {
        (self.g.norm_squared() + self.f.norm_squared()).sqrt()
    }
}

/// Outcome of the fatness search.
#[derive(Debug, Clone)]
pub struct FatnessReport {
    /// `min |[X,Y]|` over unit `X ∈ 𝔪`, `Y ∈ 𝔭` found by the search.
    pub deficit: f64,
    /// Minimizing witness pair.
    pub x: AlgebraElement,
    pub y: AlgebraElement,
    pub fat: bool,
}

impl BundleTriple {
    /// Builds and validates a chain from spanning sets of `𝔨` and `𝔥`.
    pub fn new(algebra: LieAlgebra, k_span: &[AlgebraElement], h_span: &[AlgebraElement]) -> Result<Self> {
        let d = algebra.dim();
        let k = Subspace::span(d, k_span)?;
        let h = Subspace::span(d, h_span)?;
        if h.dim() >= d {
            return Err(Error::Precondition(format!("dim 𝔥 = {} must be smaller than dim 𝔤 = {d}", h.dim())));
        }
        let k_in_h = k.elements().iter().map(|b| (b - h.project(b)).norm()).fold(0.0, f64::max);
        if k_in_h >= 1e-12 {
            return Err(Error::NotClosed { what: "𝔨 is not contained in 𝔥".into(), residual: k_in_h });
        }
        let m = h.minus(&k);
        let p = h.complement();
        let triple = Self { algebra, k, h, m, p };
        triple.check_closure()?;
        Ok(triple)
    }

    fn check_closure(&self) -> Result<()> {
        let closure = |a: &Subspace, b: &Subspace, target: &Subspace| -> f64 {
            let mut worst: f64 = 0.0;
            for x in a.elements() {
                for y in b.elements() {
                    let c = self.algebra.bracket(&x, &y);
                    worst = worst.max((&c - target.project(&c)).norm());
                }
            }
            worst
        };
        for (a, b, t, what) in [
            (&self.h, &self.h, &self.h, "[𝔥,𝔥] ⊄ 𝔥"),
            (&self.k, &self.k, &self.k, "[𝔨,𝔨] ⊄ 𝔨"),
            (&self.k, &self.m, &self.m, "[𝔨,𝔪] ⊄ 𝔪"),
        ] {
            let r = closure(a, b, t);
            if r >= 1e-11 {
                return Err(Error::NotClosed { what: what.into(), residual: r });
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn k(&self) -> &Subspace {
        &self.k
    }

    pub fn h(&self) -> &Subspace {
        &self.h
    }

    pub fn m(&self) -> &Subspace {
        &self.m
    }

    pub fn p(&self) -> &Subspace {
        &self.p
    }

    /// `𝔤 ⊖ 𝔨 = 𝔪 ⊕ 𝔭`, the legal plane arguments.
    pub fn plane_space(&self) -> Subspace {
        self.k.complement()
    }

    /// `φ⁻¹(v^𝔪)`.
    pub fn fiber_inv(&self, metric: &MetricSpec, v: &AlgebraElement) -> AlgebraElement {
        self.m.from_local(&metric.fiber_solve(&self.m.local_coords(v)))
    }

    /// `h′(a, b) = ⟨a, φ b⟩` on `𝔪`.
    pub fn fiber_inner(&self, metric: &MetricSpec, a: &AlgebraElement, b: &AlgebraElement) -> f64 {
        self.m.local_coords(a).dot(&metric.fiber_apply(&self.m.local_coords(b)))
    }

    /// The product metric `h ⊕ h′` on left-trivialized pairs.
    pub fn product_inner(&self, metric: &MetricSpec, a: &TangentPair, b: &TangentPair) -> f64 {
        metric.h(&a.g, &b.g) + self.fiber_inner(metric, &a.f, &b.f)
    }

    pub fn product_norm2(&self, metric: &MetricSpec, a: &TangentPair) -> f64 {
        self.product_inner(metric, a, a)
    }

    fn check_plane_vector(&self, u: &AlgebraElement) -> Result<()> {
        self.algebra.check(u)?;
        let r = self.k.project(u).norm();
        if r >= 1e-10 {
            return Err(Error::Precondition(format!("vector has a 𝔨-component of norm {r:.3e}")));
        }
        Ok(())
    }

    /// Horizontal lift `ū = (Φ⁻¹(Ad_{g⁻¹}u), −φ⁻¹(u^𝔪))` at `(g, eK)`.
    pub fn horizontal_lift(&self, metric: &MetricSpec, g: &GroupElement, u: &AlgebraElement) -> Result<TangentPair> {
        self.horizontal_lift_at(metric, g, &GroupElement::identity(self.algebra.n()), u)
    }

    /// Horizontal lift at a general point `(g, yK)` with `y ∈ H`.
    pub fn horizontal_lift_at(
        &self,
        metric: &MetricSpec,
        g: &GroupElement,
        y: &GroupElement,
        u: &AlgebraElement,
    ) -> Result<TangentPair> {
        self.check_plane_vector(u)?;
        let gy = g.inverse().compose(y);
        let gc = metric.apply_phi_inv(&self.algebra.ad_g(&gy, u));
        let fc = -self.fiber_inv(metric, u);
        Ok(TangentPair::new(gc, fc))
    }

    /// Action fields of the basis of `𝔥` at `(g, eK)`: `(Ad_{g⁻¹}A, A^𝔪)`.
    pub fn vertical_basis(&self, g: &GroupElement) -> Vec<TangentPair> {
        self.vertical_basis_at(g, &GroupElement::identity(self.algebra.n()))
    }

    /// Action fields at `(g, yK)`: `(Ad_{g⁻¹}A, (Ad_{y⁻¹}A)^𝔪)`.
    pub fn vertical_basis_at(&self, g: &GroupElement, y: &GroupElement) -> Vec<TangentPair> {
        let gi = g.inverse();
        let yi = y.inverse();
        self.h
            .elements()
            .iter()
            .map(|a| {
                TangentPair::new(self.algebra.ad_g(&gi, a), self.m.project(&self.algebra.ad_g(&yi, a)))
            })
            .collect()
    }

    /// `h ⊕ h′`-orthogonal projection onto the vertical space at `(g, eK)`.
    pub fn project_vertical(&self, metric: &MetricSpec, g: &GroupElement, v: &TangentPair) -> Result<TangentPair> {
        let basis = self.vertical_basis(g);
        let n = basis.len();
        let gram = DMatrix::from_fn(n, n, |i, j| self.product_inner(metric, &basis[i], &basis[j]));
        let eig = SymmetricEigen::new(gram.clone());
        let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        if !(lo > 0.0) || hi / lo > 1e12 {
            return Err(Error::IllConditioned { what: "vertical Gram matrix", cond: hi / lo.max(0.0) });
        }
        let rhs = DVector::from_fn(n, |i, _| self.product_inner(metric, v, &basis[i]));
        let chol = Cholesky::new(gram).ok_or(Error::IllConditioned { what: "vertical Gram matrix", cond: f64::INFINITY })?;
        let c = chol.solve(&rhs);
        let d = self.algebra.dim();
        Ok(basis.iter().zip(c.iter()).fold(TangentPair::zeros(d), |acc, (b, &ci)| acc.add(&b.scaled(ci))))
    }

    /// Minimizes `|[X,Y]|` over unit `X ∈ 𝔪`, `Y ∈ 𝔭` by alternating least
    /// eigenvectors, with random restarts.
    pub fn fatness_deficit(&self, seed: u64) -> Result<FatnessReport> {
        if self.m.dim() == 0 {
            return Err(Error::NotApplicable("𝔨 = 𝔥, the fiber is a point".into()));
        }
        if self.p.dim() == 0 {
            return Err(Error::NotApplicable("𝔥 = 𝔤".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<(f64, AlgebraElement, AlgebraElement)> = None;
        for _ in 0..FATNESS_RESTARTS {
            let mut x = self.m.random_unit(&mut rng).expect("𝔪 is non-empty");
            let mut y = self.least_partner(&x, &self.p);
            let mut value = self.algebra.bracket(&x, &y).norm();
            for _ in 0..FATNESS_MAX_SWEEPS {
                x = self.least_partner(&y, &self.m);
                y = self.least_partner(&x, &self.p);
                let next = self.algebra.bracket(&x, &y).norm();
                let done = value - next <= 1e-15 * value.max(1e-300);
                value = next;
                if done {
                    break;
                }
            }
            if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
                best = Some((value, x, y));
            }
        }
        let (deficit, x, y) = best.expect("at least one restart");
        Ok(FatnessReport { deficit, x, y, fat: deficit > FAT_THRESHOLD })
    }

    /// Unit `W ∈ space` minimizing `|[a, W]|`: least eigenvector of the
    /// restriction of `ad_aᵀ ad_a`.
    fn least_partner(&self, a: &AlgebraElement, space: &Subspace) -> AlgebraElement {
        let l = self.algebra.ad_matrix(a) * space.basis_matrix();
        let eig = SymmetricEigen::new(l.tr_mul(&l));
        let imin = eig.eigenvalues.imin();
        let c = eig.eigenvectors.column(imin).into_owned();
        space.from_local(&c.normalize())
    }
}
