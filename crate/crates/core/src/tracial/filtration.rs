use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Operator, OperatorJson, Subalgebra, TracialContext};
use crate::{random, CMatrix, Error, Result, Tolerances};

/// Increasing chain `S_1 ⊆ … ⊆ S_T` of unital *-subalgebras of `M_N`.
///
/// Levels are one-based to match martingale indices. `terminal` records
/// whether `S_T` is all of `M_N`; chains that stop short are allowed.
#[derive(Debug, Clone)]
pub struct Filtration {
    ctx: TracialContext,
    levels: Vec<Arc<Subalgebra>>,
    terminal: bool,
    descriptor: Option<FiltrationDescriptor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiltrationKind {
    Tensor,
    DyadicDiagonal,
    Conjugated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationParams {
    pub dim: usize,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<FiltrationDescriptor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<OperatorJson>,
}

/// Recipe from which a [`Filtration`] is rebuilt; levels are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationDescriptor {
    pub kind: FiltrationKind,
    pub params: FiltrationParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FiltrationDescriptor {
    pub fn tensor(dim: usize, depth: usize) -> Self {
        Self {
            kind: FiltrationKind::Tensor,
            params: FiltrationParams { dim, depth, base: None, unitary: None },
            seed: None,
        }
    }

    pub fn dyadic_diagonal(dim: usize, depth: usize) -> Self {
        Self {
            kind: FiltrationKind::DyadicDiagonal,
            params: FiltrationParams { dim, depth, base: None, unitary: None },
            seed: None,
        }
    }

    pub fn conjugated(base: FiltrationDescriptor, seed: u64) -> Self {
        let (dim, depth) = (base.params.dim, base.params.depth);
        Self {
            kind: FiltrationKind::Conjugated,
            params: FiltrationParams { dim, depth, base: Some(Box::new(base)), unitary: None },
            seed: Some(seed),
        }
    }

    pub fn build(&self) -> Result<Filtration> {
        self.build_with(Tolerances::default())
    }

    pub fn build_with(&self, tol: Tolerances) -> Result<Filtration> {
        let ctx = TracialContext::with_tolerances(self.params.dim, tol)?;
        match self.kind {
            FiltrationKind::Tensor => Filtration::tensor(ctx, self.params.depth),
            FiltrationKind::DyadicDiagonal => Filtration::dyadic_diagonal(ctx, self.params.depth),
            FiltrationKind::Conjugated => {
                let base = self
                    .params
                    .base
                    .as_ref()
                    .ok_or_else(|| Error::Config("conjugated filtration needs a base".into()))?
                    .build_with(tol)?;
                match (&self.params.unitary, self.seed) {
                    (Some(u), _) => {
                        let u = u.clone().into_operator(ctx)?;
                        Filtration::conjugated(&base, &u)
                    }
                    (None, Some(seed)) => Filtration::conjugated_seeded(&base, seed),
                    (None, None) => Err(Error::Config("conjugated filtration needs a seed or a unitary".into())),
                }
            }
        }
    }
}

fn dyadic_depth_check(n: usize, depth: usize) -> Result<usize> {
    if depth == 0 || depth >= usize::BITS as usize {
        return Err(Error::InvalidDimensions(format!("depth {depth} out of range")));
    }
    let blocks = 1usize << depth;
    if !n.is_multiple_of(blocks) {
        return Err(Error::InvalidDimensions(format!("dimension {n} is not divisible by 2^{depth}")));
    }
    Ok(blocks)
}

impl Filtration {
    /// Validated constructor: checks that consecutive levels are nested.
    pub fn new(ctx: TracialContext, levels: Vec<Subalgebra>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("a filtration needs at least one level".into()));
        }
        for s in &levels {
            ctx.ensure_same(s.context())?;
        }
        let tol = ctx.tolerances().span_residual;
        for (k, pair) in levels.windows(2).enumerate() {
            for b in pair[0].basis() {
                let r = pair[1].residual(&b)?;
                if r > tol {
                    return Err(Error::InvalidArgument(format!(
                        "level {} is not contained in level {} (residual {r:.3e})",
                        k + 1,
                        k + 2
                    )));
                }
            }
        }
        Ok(Self::from_levels_unchecked(ctx, levels, None))
    }

    fn from_levels_unchecked(
        ctx: TracialContext,
        levels: Vec<Subalgebra>,
        descriptor: Option<FiltrationDescriptor>,
    ) -> Self {
        let n = ctx.dim();
        let terminal = levels.last().map(|s| s.dimension() == n * n).unwrap_or(false);
        Self { ctx, levels: levels.into_iter().map(Arc::new).collect(), terminal, descriptor }
    }

    /// Levels `M_{2^k} ⊗ 1_{N/2^k}` for `k = 1..=depth`; terminal exactly when
    /// `N = 2^depth`.
    pub fn tensor(ctx: TracialContext, depth: usize) -> Result<Self> {
        let n = ctx.dim();
        dyadic_depth_check(n, depth)?;
        let levels = (1..=depth)
            .map(|k| {
                let a = 1usize << k;
                let m = n / a;
                let norm = (a as f64).sqrt();
                let mut basis = Vec::with_capacity(a * a);
                for r in 0..a {
                    for c in 0..a {
                        let mut b = CMatrix::zeros(n, n);
                        for t in 0..m {
                            b[(r * m + t, c * m + t)] = Complex64::new(norm, 0.0);
                        }
                        basis.push(b);
                    }
                }
                Subalgebra::from_orthonormal_unchecked(ctx, &basis)
            })
            .collect();
        Ok(Self::from_levels_unchecked(ctx, levels, Some(FiltrationDescriptor::tensor(n, depth))))
    }

    /// Diagonal matrices constant on `2^k` consecutive blocks at level `k`.
    /// These embed classical dyadic martingales.
    pub fn dyadic_diagonal(ctx: TracialContext, depth: usize) -> Result<Self> {
        let n = ctx.dim();
        dyadic_depth_check(n, depth)?;
        let levels = (1..=depth)
            .map(|k| {
                let a = 1usize << k;
                let m = n / a;
                let norm = (a as f64).sqrt();
                let basis: Vec<CMatrix> = (0..a)
                    .map(|blk| {
                        let mut b = CMatrix::zeros(n, n);
                        for t in 0..m {
                            b[(blk * m + t, blk * m + t)] = Complex64::new(norm, 0.0);
                        }
                        b
                    })
                    .collect();
                Subalgebra::from_orthonormal_unchecked(ctx, &basis)
            })
            .collect();
        Ok(Self::from_levels_unchecked(ctx, levels, Some(FiltrationDescriptor::dyadic_diagonal(n, depth))))
    }

    /// `u S_k u*` at every level. Fails unless `u` is unitary to tolerance.
    pub fn conjugated(base: &Filtration, u: &Operator) -> Result<Self> {
        base.ctx.ensure_same(u.context())?;
        let n = base.ctx.dim();
        let err = (u.matrix().adjoint() * u.matrix() - CMatrix::identity(n, n)).norm();
        if err > base.ctx.tolerances().projection {
            return Err(Error::InvalidArgument(format!("conjugating matrix is not unitary ({err:.3e})")));
        }
        let descriptor = base.descriptor.clone().map(|d| FiltrationDescriptor {
            kind: FiltrationKind::Conjugated,
            params: FiltrationParams {
                dim: n,
                depth: base.depth(),
                base: Some(Box::new(d)),
                unitary: Some(u.to_json()),
            },
            seed: None,
        });
        Ok(base.conjugated_by(u.matrix(), descriptor))
    }

    /// Conjugation by a Haar unitary drawn from `seed`.
    pub fn conjugated_seeded(base: &Filtration, seed: u64) -> Result<Self> {
        let mut rng = random::rng_from_seed(seed);
        let u = random::haar_unitary(&mut rng, base.ctx.dim());
        let descriptor = base.descriptor.clone().map(|d| FiltrationDescriptor::conjugated(d, seed));
        Ok(base.conjugated_by(&u, descriptor))
    }

    fn conjugated_by(&self, u: &CMatrix, descriptor: Option<FiltrationDescriptor>) -> Self {
        let levels = self.levels.iter().map(|s| s.conjugated(u)).collect();
        let mut f = Self::from_levels_unchecked(self.ctx, levels, descriptor);
        f.terminal = self.terminal;
        f
    }

    pub fn context(&self) -> &TracialContext {
        &self.ctx
    }

    /// Number of levels `T`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    pub fn descriptor(&self) -> Option<&FiltrationDescriptor> {
        self.descriptor.as_ref()
    }

    /// Level `S_n`, one-based.
    pub fn level(&self, n: usize) -> Result<&Subalgebra> {
        if n == 0 || n > self.levels.len() {
            return Err(Error::InvalidArgument(format!("level {n} outside 1..={}", self.levels.len())));
        }
        Ok(&self.levels[n - 1])
    }

    pub fn levels(&self) -> impl Iterator<Item = &Subalgebra> {
        self.levels.iter().map(|s| s.as_ref())
    }

    /// `E_n(x)`, one-based.
    pub fn expectation(&self, n: usize, x: &Operator) -> Result<Operator> {
        self.level(n)?.expectation(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_level_dimensions() {
        let ctx = TracialContext::new(4).unwrap();
        let f = Filtration::tensor(ctx, 2).unwrap();
        let dims: Vec<_> = f.levels().map(|s| s.dimension()).collect();
        assert_eq!(dims, vec![4, 16]);
        assert!(f.is_terminal());
    }

    #[test]
    fn dyadic_levels() {
        let ctx = TracialContext::new(4).unwrap();
        let f = Filtration::dyadic_diagonal(ctx, 2).unwrap();
        let dims: Vec<_> = f.levels().map(|s| s.dimension()).collect();
        assert_eq!(dims, vec![2, 4]);
        assert!(!f.is_terminal());
        let p = Operator::diagonal(ctx, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(f.level(1).unwrap().contains(&p).unwrap());
        let q = Operator::diagonal(ctx, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(!f.level(1).unwrap().contains(&q).unwrap());
        assert!(f.level(2).unwrap().contains(&q).unwrap());
    }

    #[test]
    fn tensor_expectation_is_a_partial_trace() {
        // M_2 ⊗ 1 in M_4: e11 ⊗ e12 has vanishing partial trace.
        let ctx = TracialContext::new(4).unwrap();
        let f = Filtration::tensor(ctx, 2).unwrap();
        let x = Operator::matrix_unit(ctx, 0, 1).unwrap();
        let e = f.expectation(1, &x).unwrap();
        assert!(e.max_abs() < 1e-15);
    }

    #[test]
    fn invalid_dimensions() {
        let ctx = TracialContext::new(6).unwrap();
        assert!(Filtration::tensor(ctx, 2).is_err());
        assert!(Filtration::dyadic_diagonal(ctx, 0).is_err());
        assert!(Filtration::dyadic_diagonal(ctx, 1).is_ok());
    }

    #[test]
    fn seeded_conjugation_is_deterministic() {
        let d = FiltrationDescriptor::conjugated(FiltrationDescriptor::tensor(4, 2), 7);
        let a = d.build().unwrap();
        let b = d.build().unwrap();
        let x = Operator::matrix_unit(*a.context(), 0, 3).unwrap();
        let ea = a.expectation(1, &x).unwrap();
        let eb = b.expectation(1, &x).unwrap();
        assert_eq!(ea, eb);
    }

    #[test]
    fn descriptor_round_trips_through_json() {
        let d = FiltrationDescriptor::conjugated(FiltrationDescriptor::dyadic_diagonal(8, 3), 99);
        let text = serde_json::to_string(&d).unwrap();
        assert!(text.contains("\"kind\":\"conjugated\""));
        let back: FiltrationDescriptor = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        let f = back.build().unwrap();
        assert_eq!(f.descriptor(), Some(&d));
    }

    #[test]
    fn supplied_unitary_is_recorded() {
        let ctx = TracialContext::new(4).unwrap();
        let base = Filtration::tensor(ctx, 2).unwrap();
        let mut rng = random::rng_from_seed(1);
        let u = Operator::new(ctx, random::haar_unitary(&mut rng, 4)).unwrap();
        let f = Filtration::conjugated(&base, &u).unwrap();
        let rebuilt = f.descriptor().unwrap().build().unwrap();
        let x = Operator::matrix_unit(ctx, 1, 2).unwrap();
        let diff = f.expectation(1, &x).unwrap() - rebuilt.expectation(1, &x).unwrap();
        assert!(diff.max_abs() < 1e-14);
        assert!(Filtration::conjugated(&base, &ctx.identity().scale(2.0)).is_err());
    }

    #[test]
    fn new_rejects_non_nested_levels() {
        let ctx = TracialContext::new(2).unwrap();
        let diag = Subalgebra::from_generators(ctx, &[Operator::matrix_unit(ctx, 0, 0).unwrap()]).unwrap();
        let scalars = Subalgebra::scalars(ctx);
        assert!(Filtration::new(ctx, vec![scalars.clone(), diag.clone()]).is_ok());
        assert!(Filtration::new(ctx, vec![diag, scalars]).is_err());
    }
}
