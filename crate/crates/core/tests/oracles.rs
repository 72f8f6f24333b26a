//! Independent oracles for the curvature formulas.

use bundlecurv::curvature::{bracket_lemma_a, fd_bracket_oracle, k_h_puttmann, k_m, stacked};
use bundlecurv::metric::{random_invariant_fiber, MetricSpec};
use bundlecurv::{catalog, AlgebraElement, GroupElement, LieAlgebra};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Left-invariant curvature from the Koszul formula in an `h`-orthonormal
/// frame, built from structure constants only.
struct Koszul {
    frame_inv: DMatrix<f64>,
    /// `gamma[i][j]`: coordinates of `∇_{e_i} e_j` in the frame.
    gamma: Vec<Vec<DVector<f64>>>,
    /// `c[i][j]`: coordinates of `[e_i, e_j]` in the frame.
    c: Vec<Vec<DVector<f64>>>,
}

impl Koszul {
    fn new(alg: &LieAlgebra, metric: &MetricSpec) -> Self {
        let d = alg.dim();
        let eig = metric.phi_matrix().clone().symmetric_eigen();
        let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        let frame = &eig.eigenvectors * inv_sqrt;
        let frame_inv = frame.clone().try_inverse().unwrap();
        let e = |i: usize| AlgebraElement::from_vector(frame.column(i).into_owned());
        let c: Vec<Vec<DVector<f64>>> = (0..d)
            .map(|i| (0..d).map(|j| &frame_inv * alg.bracket(&e(i), &e(j)).coords()).collect())
            .collect();
        let gamma = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| DVector::from_fn(d, |k, _| 0.5 * (c[i][j][k] - c[j][k][i] + c[k][i][j])))
                    .collect()
            })
            .collect();
        Self { frame_inv, gamma, c }
    }

    /// `∇_u v` for frame-coordinate vectors.
    fn nabla(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let d = u.len();
        let mut out = DVector::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out += &self.gamma[i][j] * (u[i] * v[j]);
            }
        }
        out
    }

    fn bracket(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let d = u.len();
        let mut out = DVector::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out += &self.c[i][j] * (u[i] * v[j]);
            }
        }
        out
    }

    /// `⟨R(u,v)v,u⟩` with `R(u,v) = ∇_u∇_v − ∇_v∇_u − ∇_{[u,v]}`.
    fn k(&self, x: &AlgebraElement, y: &AlgebraElement) -> f64 {
        let u = &self.frame_inv * x.coords();
        let v = &self.frame_inv * y.coords();
        // For left-invariant fields, ∇_u(∇_v w) expands through the frame.
        let nn = |a: &DVector<f64>, b: &DVector<f64>, w: &DVector<f64>| {
            let inner = self.nabla(b, w);
            self.nabla(a, &inner)
        };
        let r = nn(&u, &v, &v) - nn(&v, &u, &v) - self.nabla(&self.bracket(&u, &v), &v);
        r.dot(&u)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

#[test]
fn puttmann_matches_koszul_on_random_metrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [3, 4, 5] {
        let alg = LieAlgebra::so(n).unwrap();
        for _ in 0..20 {
            let metric = MetricSpec::random_spd(alg.dim(), 0.5, 2.0, &mut rng).unwrap();
            let oracle = Koszul::new(&alg, &metric);
            let x = alg.random_element(&mut rng);
            let y = alg.random_element(&mut rng);
            let fast = k_h_puttmann(&alg, &metric, &x, &y);
            let slow = oracle.k(&x, &y);
            assert!(rel_err(fast, slow) < 1e-9, "so({n}): {fast} vs {slow}");
        }
    }
}

#[test]
fn milnor_frame_curvatures_on_so3() {
    // Diagonal Φ in the basis (E12, E13, E23); Milnor's unimodular formulas
    // give Ric(e_i) = 2 μ_j μ_k and hence every sectional curvature.
    let alg = LieAlgebra::so(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let phi: Vec<f64> = (0..3).map(|_| 0.5 + 1.5 * rand::Rng::random::<f64>(&mut rng)).collect();
        let metric = MetricSpec::diagonal(&phi).unwrap();
        let e: Vec<AlgebraElement> = (0..3).map(|a| alg.basis_element(a) * (1.0 / phi[a].sqrt())).collect();
        let lambda = |a: usize, b: usize, c: usize| metric.h(&alg.bracket(&e[b], &e[c]), &e[a]);
        let l = [lambda(0, 1, 2), lambda(1, 2, 0), lambda(2, 0, 1)];
        let half = 0.5 * (l[0] + l[1] + l[2]);
        let mu = [half - l[0], half - l[1], half - l[2]];
        let ric = [2.0 * mu[1] * mu[2], 2.0 * mu[2] * mu[0], 2.0 * mu[0] * mu[1]];
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            // K(e_b, e_c) = (Ric_b + Ric_c − Ric_a) / 2.
            let expected = 0.5 * (ric[b] + ric[c] - ric[a]);
            let got = k_h_puttmann(&alg, &metric, &e[b], &e[c]);
            assert!(rel_err(got, expected) < 1e-9, "{got} vs {expected}");
        }
    }
}

#[test]
fn closed_form_bracket_matches_chart_differences_off_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for triple in [catalog::t1s3(), catalog::t1sn(4).unwrap(), catalog::geroch(3, 4).unwrap()] {
        let alg = triple.algebra();
        let planes = triple.plane_space();
        for _ in 0..5 {
            let fiber = random_invariant_fiber(&triple, &mut rng);
            let metric = MetricSpec::random_spd(alg.dim(), 0.5, 2.0, &mut rng)
                .unwrap()
                .with_fiber(&triple, fiber)
                .unwrap();
            let g0 = alg.random_group_element(&mut rng);
            let x = planes.project(&alg.random_element(&mut rng));
            let y = planes.project(&alg.random_element(&mut rng));
            let closed = stacked(&bracket_lemma_a(&triple, &metric, &g0, &x, &y).unwrap());
            let fd = stacked(&fd_bracket_oracle(&triple, &metric, &g0, &x, &y, 1e-4).unwrap());
            assert!((&closed - &fd).norm() < 1e-5 * closed.norm());
        }
    }
}

#[test]
fn geroch_quotient_matches_inverted_group_metric() {
    // With K trivial and both metrics bi-invariant, (g, y) ↦ y⁻¹g identifies
    // M with G carrying the right-invariant metric that is ½ on 𝔥 and 1 on
    // 𝔭; inversion turns it into the left-invariant one, and the lift of x
    // maps to x + x^𝔥.
    let triple = catalog::geroch(3, 4).unwrap();
    let alg = triple.algebra();
    let d = alg.dim();
    let diag: Vec<f64> = (0..d)
        .map(|a| if triple.h().contains(&alg.basis_element(a), 1e-12) { 0.5 } else { 1.0 })
        .collect();
    let tilde = Koszul::new(alg, &MetricSpec::diagonal(&diag).unwrap());
    let id = MetricSpec::identity(d);
    let e = GroupElement::identity(4);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let x = alg.random_element(&mut rng);
        let y = alg.random_element(&mut rng);
        let w = |v: &AlgebraElement| v + &triple.h().project(v);
        let got = k_m(&triple, &id, &e, &x, &y).unwrap().k_m;
        let expected = tilde.k(&w(&x), &w(&y));
        assert!(rel_err(got, expected) < 1e-9, "{got} vs {expected}");
    }
}
