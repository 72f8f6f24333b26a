//! Finite-difference Lie bracket of the natural horizontal extensions.
//!
//! Works in the chart `(a, b) ↦ (g₀·exp(a), exp(b)K)` with `a ∈ 𝔤` and
//! `b ∈ 𝔪`, so the section of `H → F` is `exp` of a small `𝔪`-ball. The
//! extension of `X̄` at `(g, yK)` with `y = exp(b)` is
//! `(dL_g Φ⁻¹(Ad_{g⁻¹y}X), −dL_y φ⁻¹(X^𝔪))`; its chart components are
//! recovered by inverting the left-trivialized differential of `exp`. The
//! bracket is `D_X̄ Ȳ − D_Ȳ X̄` with central differences along the chart
//! directions, which at the origin is the left-trivialized bracket.

use nalgebra::DVector;

use super::dexp_matrix;
use crate::bundle::{BundleTriple, TangentPair};
use crate::error::{Error, Result};
use crate::liealg::{AlgebraElement, GroupElement};
use crate::metric::MetricSpec;

struct Chart<'a> {
    triple: &'a BundleTriple,
    metric: &'a MetricSpec,
    g0: &'a GroupElement,
}

impl Chart<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.triple.algebra().dim(), self.triple.m().dim())
    }

    /// Chart components of the extension of `z` at chart point `q = (a, b)`.
    fn field(&self, z: &AlgebraElement, q: &DVector<f64>) -> Result<DVector<f64>> {
        let alg = self.triple.algebra();
        let m = self.triple.m();
        let (dg, dm) = self.dims();
        let a = AlgebraElement::from_vector(q.rows(0, dg).into_owned());
        let b = m.from_local(&q.rows(dg, dm).into_owned());

        let g = self.g0.compose(&alg.exp(&a));
        let y = alg.exp(&b);
        let v = self.metric.apply_phi_inv(&alg.ad_g(&g.inverse().compose(&y), z));
        let adot = dexp_matrix(alg, &a)
            .lu()
            .solve(v.coords())
            .ok_or(Error::IllConditioned { what: "exp differential", cond: f64::INFINITY })?;

        let w = -self.metric.fiber_solve(&m.local_coords(z));
        let fiber_dexp = m.basis_matrix().tr_mul(&(dexp_matrix(alg, &b) * m.basis_matrix()));
        let bdot = fiber_dexp
            .lu()
            .solve(&w)
            .ok_or(Error::IllConditioned { what: "section differential", cond: f64::INFINITY })?;

        let mut out = DVector::zeros(dg + dm);
        out.rows_mut(0, dg).copy_from(&adot);
        out.rows_mut(dg, dm).copy_from(&bdot);
        Ok(out)
    }

    fn directional(&self, z: &AlgebraElement, dir: &DVector<f64>, step: f64) -> Result<DVector<f64>> {
        let plus = self.field(z, &(dir * step))?;
        let minus = self.field(z, &(dir * -step))?;
        Ok((plus - minus) / (2.0 * step))
    }
}

/// Central-difference bracket `[X̄,Ȳ]` at `(g₀, eK)`, truncation `O(step²)`.
pub fn fd_bracket_oracle(
    triple: &BundleTriple,
    metric: &MetricSpec,
    g0: &GroupElement,
    x: &AlgebraElement,
    y: &AlgebraElement,
    step: f64,
) -> Result<TangentPair> {
    if !(1e-6..=1e-2).contains(&step) {
        return Err(Error::InvalidArgument(format!("finite-difference step {step:e} outside [1e-6, 1e-2]")));
    }
    super::check_plane_args(triple, x, y)?;
    let chart = Chart { triple, metric, g0 };
    let (dg, dm) = chart.dims();
    let origin = DVector::zeros(dg + dm);
    let xf = chart.field(x, &origin)?;
    let yf = chart.field(y, &origin)?;
    let bracket = chart.directional(y, &xf, step)? - chart.directional(x, &yf, step)?;
    let g = AlgebraElement::from_vector(bracket.rows(0, dg).into_owned());
    let f = triple.m().from_local(&bracket.rows(dg, dm).into_owned());
    Ok(TangentPair::new(g, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::curvature::{bracket_lemma_a, stacked};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn commuting_pair_gives_zero() {
        let t = catalog::geroch(2, 5).unwrap();
        let g = t.algebra();
        let r = fd_bracket_oracle(&t, &MetricSpec::identity(10), &GroupElement::identity(5), &g.e(1, 3), &g.e(4, 5), 1e-3)
            .unwrap();
        assert!(r.coord_norm() < 1e-9);
    }

    #[test]
    fn rejects_out_of_range_steps() {
        let t = catalog::t1s3();
        let g = t.algebra();
        let id = MetricSpec::identity(6);
        let e = GroupElement::identity(4);
        for step in [1e-7, 0.1] {
            assert!(matches!(
                fd_bracket_oracle(&t, &id, &e, &g.e(1, 3), &g.e(1, 4), step),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn agrees_with_closed_form_at_identity() {
        let t = catalog::t1s3();
        let g = t.algebra();
        let id = MetricSpec::identity(6);
        let e = GroupElement::identity(4);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let planes = t.plane_space();
        let x = planes.project(&g.random_element(&mut rng));
        let y = planes.project(&g.random_element(&mut rng));
        let closed = stacked(&bracket_lemma_a(&t, &id, &e, &x, &y).unwrap());
        let fd = stacked(&fd_bracket_oracle(&t, &id, &e, &x, &y, 1e-4).unwrap());
        assert!((&closed - &fd).norm() < 1e-6 * closed.norm());
    }
}
