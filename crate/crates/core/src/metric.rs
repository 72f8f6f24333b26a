//! Left-invariant metric data.
//!
//! `h(A,B) = ⟨ΦA, B⟩` on `𝔤` and `h′(A,B) = ⟨A, φB⟩` on `𝔪`, both stored as
//! symmetric positive-definite matrices in basis coordinates.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bundle::BundleTriple;
use crate::error::{Error, Result};
use crate::liealg::{random_orthogonal, AlgebraElement};

const MAX_CONDITION: f64 = 1e12;
const SYMMETRY_TOL: f64 = 1e-12;
const FIBER_INVARIANCE_TOL: f64 = 1e-10;

/// A cached SPD operator.
#[derive(Debug, Clone)]
struct SpdOperator {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    eig_min: f64,
    eig_max: f64,
    identity: bool,
}

impl SpdOperator {
    fn new(matrix: DMatrix<f64>, what: &'static str) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let n = matrix.nrows();
        let scale = matrix.amax().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidArgument(format!("{what} is not symmetric (residual {asym:.3e})")));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let eig_min = eig.eigenvalues.min();
        let eig_max = eig.eigenvalues.max();
        if !(eig_min > 0.0) {
            return Err(Error::DegenerateMetric(format!(
                "{what} is not positive-definite (smallest eigenvalue {eig_min:.3e})"
            )));
        }
        let cond = eig_max / eig_min;
        if cond > MAX_CONDITION {
            return Err(Error::IllConditioned { what, cond });
        }
        let chol = Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::DegenerateMetric(format!("{what}: Cholesky factorization failed")))?;
        let identity = matrix == DMatrix::identity(n, n);
        Ok(Self { matrix, chol, eig_min, eig_max, identity })
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.identity {
            v.clone()
        } else {
            &self.matrix * v
        }
    }

    fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.identity {
            v.clone()
        } else {
            self.chol.solve(v)
        }
    }
}

/// The operators `Φ` (on `𝔤`) and `φ` (on `𝔪`) defining `h` and `h′`.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    phi: SpdOperator,
    fiber: Option<SpdOperator>,
}

impl MetricSpec {
    /// `h` from a symmetric positive-definite `Φ`; `φ` is the identity.
    pub fn new(phi: DMatrix<f64>) -> Result<Self> {
        Ok(Self { phi: SpdOperator::new(phi, "Φ")?, fiber: None })
    }

    /// The bi-invariant metric `h₀`.
    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is SPD")
    }

    pub fn diagonal(eigenvalues: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(eigenvalues)))
    }

    /// `Φ = Qᵀ diag(λ) Q` with Haar-random `Q` and `λ` log-uniform in `[lo, hi]`.
    pub fn random_spd<R: Rng + ?Sized>(dim: usize, lo: f64, hi: f64, rng: &mut R) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidArgument(format!("eigenvalue range [{lo}, {hi}] must satisfy 0 < lo ≤ hi")));
        }
        let q = random_orthogonal(dim, rng).matrix().clone();
        let (llo, lhi) = (lo.ln(), hi.ln());
        let lam = DVector::from_fn(dim, |_, _| (llo + (lhi - llo) * rng.random::<f64>()).exp());
        let m = q.transpose() * DMatrix::from_diagonal(&lam) * q;
        Self::new(symmetrize(m))
    }

    /// `Φ_t = (1−t)·id on 𝔥 ⊕ id on 𝔭`, `0 ≤ t < 1`.
    pub fn phi_t(triple: &BundleTriple, t: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::DegenerateMetric(format!("Φ_t requires 0 ≤ t < 1, got t = {t}")));
        }
        let d = triple.algebra().dim();
        let bh = triple.h().basis_matrix();
        let proj_h = bh * bh.transpose();
        let phi = DMatrix::identity(d, d) - proj_h * t;
        Self::new(symmetrize(phi))
    }

    /// Installs a fiber operator `φ` (in `𝔪`-basis coordinates), validating
    /// positivity and commutation with `ad_W|𝔪` for every `W ∈ 𝔨`.
    pub fn with_fiber(mut self, triple: &BundleTriple, phi_fiber: DMatrix<f64>) -> Result<Self> {
        let dm = triple.m().dim();
        if phi_fiber.nrows() != dm {
            return Err(Error::Dimension { expected: dm, found: phi_fiber.nrows() });
        }
        let op = SpdOperator::new(phi_fiber, "φ")?;
        let residual = fiber_invariance_residual(triple, &op.matrix);
        if residual >= FIBER_INVARIANCE_TOL {
            return Err(Error::NotClosed {
                what: "φ does not commute with ad(𝔨) on 𝔪".into(),
                residual,
            });
        }
        self.fiber = if op.identity { None } else { Some(op) };
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.phi.matrix.nrows()
    }

    pub fn phi_matrix(&self) -> &DMatrix<f64> {
        &self.phi.matrix
    }

    /// `φ` in `𝔪`-coordinates, `None` meaning the identity.
    pub fn fiber_matrix(&self) -> Option<&DMatrix<f64>> {
        self.fiber.as_ref().map(|f| &f.matrix)
    }

    pub fn is_bi_invariant(&self) -> bool {
        self.phi.identity
    }

    pub fn fiber_is_normal(&self) -> bool {
        self.fiber.is_none()
    }

    pub fn eigenvalue_range(&self) -> (f64, f64) {
        (self.phi.eig_min, self.phi.eig_max)
    }

    pub fn apply_phi(&self, a: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::from_vector(self.phi.apply(a.coords()))
    }

    pub fn apply_phi_inv(&self, a: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::from_vector(self.phi.solve(a.coords()))
    }

    /// `h(A,B) = ⟨ΦA, B⟩`.
    pub fn h(&self, a: &AlgebraElement, b: &AlgebraElement) -> f64 {
        self.apply_phi(a).dot(b)
    }

    /// `|A|²_h`.
    pub fn norm_h2(&self, a: &AlgebraElement) -> f64 {
        self.h(a, a)
    }

    /// `φ` applied to `𝔪`-coordinates.
    pub fn fiber_apply(&self, c: &DVector<f64>) -> DVector<f64> {
        match &self.fiber {
            Some(f) => f.apply(c),
            None => c.clone(),
        }
    }

    /// `φ⁻¹` applied to `𝔪`-coordinates.
    pub fn fiber_solve(&self, c: &DVector<f64>) -> DVector<f64> {
        match &self.fiber {
            Some(f) => f.solve(c),
            None => c.clone(),
        }
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `max_W ‖φ·ad_W|𝔪 − ad_W|𝔪·φ‖∞` over the basis of `𝔨`.
pub fn fiber_invariance_residual(triple: &BundleTriple, phi_fiber: &DMatrix<f64>) -> f64 {
    let alg = triple.algebra();
    let m = triple.m();
    let mut worst: f64 = 0.0;
    for w in triple.k().elements() {
        let ad = alg.ad_matrix(&w);
        let restricted = m.basis_matrix().tr_mul(&(ad * m.basis_matrix()));
        let r = (phi_fiber * &restricted - &restricted * phi_fiber).amax();
        worst = worst.max(r);
    }
    worst
}

/// Random SPD fiber operator commuting with `ad(𝔨)|𝔪`. With trivial
/// isotropy any SPD matrix qualifies; otherwise a random scalar multiple of
/// the identity is returned.
pub fn random_invariant_fiber<R: Rng + ?Sized>(triple: &BundleTriple, rng: &mut R) -> DMatrix<f64> {
    let dm = triple.m().dim();
    let k = triple.k();
    if k.dim() == 0 {
        let a = DMatrix::from_fn(dm, dm, |_, _| rng.sample::<f64, _>(StandardNormal));
        let spd = &a * a.transpose() * (0.5 / dm as f64) + DMatrix::identity(dm, dm) * 0.5;
        return symmetrize(spd);
    }
    // log-uniform in [0.5, 2]
    let s = ((0.5f64).ln() + (4f64).ln() * rng.random::<f64>()).exp();
    DMatrix::identity(dm, dm) * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::liealg::LieAlgebra;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_diagonal_examples() {
        let g = LieAlgebra::so(3).unwrap();
        let id = MetricSpec::identity(3);
        let a = g.e(1, 3) * 2.0 - g.e(2, 3);
        assert_eq!(id.apply_phi(&a), a);
        assert_eq!(id.apply_phi_inv(&a), a);
        let d = MetricSpec::diagonal(&[2.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.apply_phi(&g.e(1, 2)), g.e(1, 2) * 2.0);
        assert!((d.apply_phi_inv(&g.e(1, 2)) - g.e(1, 2) * 0.5).norm() < 1e-15);
    }

    #[test]
    fn random_spd_round_trip_and_self_adjointness() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = LieAlgebra::so(4).unwrap();
        for _ in 0..50 {
            let m = MetricSpec::random_spd(6, 0.5, 2.0, &mut rng).unwrap();
            let (lo, hi) = m.eigenvalue_range();
            assert!(lo >= 0.5 - 1e-12 && hi <= 2.0 + 1e-12);
            let a = g.random_element(&mut rng);
            let b = g.random_element(&mut rng);
            assert!((m.apply_phi(&m.apply_phi_inv(&a)) - &a).norm() < 1e-11);
            assert!((m.apply_phi(&a).dot(&b) - a.dot(&m.apply_phi(&b))).abs() < 1e-12);
            assert!((m.h(&a, &b) - m.h(&b, &a)).abs() < 1e-12);
            assert!(m.norm_h2(&a) >= lo * a.norm_squared() - 1e-12);
        }
    }

    #[test]
    fn rejects_bad_operators() {
        let mut asym = DMatrix::<f64>::identity(3, 3);
        asym[(0, 1)] = 0.1;
        assert!(matches!(MetricSpec::new(asym), Err(Error::InvalidArgument(_))));
        assert!(matches!(MetricSpec::diagonal(&[1.0, -1.0, 1.0]), Err(Error::DegenerateMetric(_))));
        assert!(matches!(
            MetricSpec::diagonal(&[1.0, 1e-13, 1.0]),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn phi_t_blocks() {
        let triple = catalog::t1s3();
        let alg = triple.algebra();
        assert!(MetricSpec::phi_t(&triple, 0.0).unwrap().is_bi_invariant());
        let m = MetricSpec::phi_t(&triple, 0.5).unwrap();
        for a in triple.h().elements() {
            assert!((m.apply_phi(&a) - &a * 0.5).norm() < 1e-15);
        }
        for a in triple.p().elements() {
            assert!((m.apply_phi(&a) - &a).norm() < 1e-15);
        }
        let x = alg.e(1, 2) + alg.e(1, 4);
        assert!((m.apply_phi(&x) - (alg.e(1, 2) * 0.5 + alg.e(1, 4))).norm() < 1e-15);
        for &t in &[0.0, 0.3, 0.9, 0.999] {
            let (lo, hi) = MetricSpec::phi_t(&triple, t).unwrap().eigenvalue_range();
            assert!((lo - (1.0 - t)).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        }
        assert!(matches!(MetricSpec::phi_t(&triple, 1.0), Err(Error::DegenerateMetric(_))));
        assert!(matches!(MetricSpec::phi_t(&triple, -0.1), Err(Error::DegenerateMetric(_))));
    }

    #[test]
    fn fiber_invariance_is_enforced() {
        let triple = catalog::t1s3();
        let id = MetricSpec::identity(6);
        let ok = id.clone().with_fiber(&triple, DMatrix::identity(2, 2) * 1.7).unwrap();
        assert!(!ok.fiber_is_normal());
        let bad = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0]));
        assert!(matches!(id.clone().with_fiber(&triple, bad), Err(Error::NotClosed { .. })));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for triple in [catalog::t1s2(), catalog::t1s3(), catalog::t1sn(4).unwrap()] {
            let f = random_invariant_fiber(&triple, &mut rng);
            assert!(fiber_invariance_residual(&triple, &f) < 1e-10);
            assert!(MetricSpec::identity(triple.algebra().dim()).with_fiber(&triple, f).is_ok());
        }
    }
}
