//! Named bundle triples built from upper-left block embeddings
//! `so(a) ⊂ so(b) ⊂ so(n)`.

use crate::bundle::BundleTriple;
use crate::error::{Error, Result};
use crate::liealg::{AlgebraElement, LieAlgebra};

/// Basis of `so(block)` embedded in the upper-left corner of `so(n)`.
pub fn block_basis(alg: &LieAlgebra, block: usize) -> Vec<AlgebraElement> {
    let mut out = Vec::new();
    for i in 1..=block {
        for j in (i + 1)..=block {
            out.push(alg.e(i, j));
        }
    }
    out
}

/// `so(k_block) ⊂ so(h_block) ⊂ so(n)`.
pub fn block_triple(n: usize, k_block: usize, h_block: usize) -> Result<BundleTriple> {
    if !(k_block <= h_block && h_block <= n) {
        return Err(Error::InvalidArgument(format!(
            "block sizes must satisfy k ≤ h ≤ n, got k = {k_block}, h = {h_block}, n = {n}"
        )));
    }
    let alg = LieAlgebra::so(n)?;
    let k = block_basis(&alg, k_block);
    let h = block_basis(&alg, h_block);
    BundleTriple::new(alg, &k, &h)
}

/// `({e}, SO(2), SO(3))`.
pub fn t1s2() -> BundleTriple {
    block_triple(3, 1, 2).expect("catalog triple is valid")
}

/// `(SO(2), SO(3), SO(4))`, the non-fat unit tangent bundle of `S³`.
pub fn t1s3() -> BundleTriple {
    block_triple(4, 2, 3).expect("catalog triple is valid")
}

/// `SO(n−1) ⊂ SO(n) ⊂ SO(n+1)`.
pub fn t1sn(n: usize) -> Result<BundleTriple> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("t1sn requires n ≥ 2, got {n}")));
    }
    block_triple(n + 1, n - 1, n)
}

/// Trivial isotropy: `({e}, SO(h), SO(g))`.
pub fn geroch(h: usize, g: usize) -> Result<BundleTriple> {
    block_triple(g, 0, h)
}

/// Resolves `t1s2`, `t1s3`, `t1sn:<n>` and `geroch:<H>:<G>`.
pub fn by_name(name: &str) -> Result<BundleTriple> {
    let parts: Vec<&str> = name.trim().split(':').collect();
    let num = |s: &str| -> Result<usize> {
        s.parse::<usize>().map_err(|_| Error::InvalidArgument(format!("catalog entry `{name}`: `{s}` is not a number")))
    };
    match parts.as_slice() {
        ["t1s2"] => Ok(t1s2()),
        ["t1s3"] => Ok(t1s3()),
        ["t1sn", n] => t1sn(num(n)?),
        ["geroch", h, g] => geroch(num(h)?, num(g)?),
        _ => Err(Error::InvalidArgument(format!(
            "unknown catalog entry `{name}` (expected t1s2, t1s3, t1sn:<n> or geroch:<H>:<G>)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        assert_eq!(by_name("t1s2").unwrap().h().dim(), 1);
        assert_eq!(by_name("t1s3").unwrap().k().dim(), 1);
        let t = by_name("t1sn:4").unwrap();
        assert_eq!((t.algebra().n(), t.k().dim(), t.h().dim()), (5, 3, 6));
        let g = by_name("geroch:3:5").unwrap();
        assert_eq!((g.k().dim(), g.h().dim(), g.algebra().dim()), (0, 3, 10));
        assert!(by_name("t1s9").is_err());
        assert!(by_name("t1sn:x").is_err());
        assert!(by_name("geroch:5:5").is_err());
    }
}
