//! Algebraic identities evaluated on random probes.

use num_complex::Complex64;
use rand::Rng;

use crate::random;
use crate::spectral;
use crate::tracial::{Filtration, Operator, TracialContext};
use crate::truncation::{diagonal_part, hilbert_op, strict_lower, triangular_truncate, ProjectionFamily};
use crate::{Error, Result};

/// `lhs ≤ rhs` with a name, before it is attached to a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

fn probe(name: &'static str, lhs: f64, rhs: f64) -> Probe {
    Probe { name, lhs, rhs }
}

/// Complex Gaussian operator scaled to unit operator norm.
pub fn unit_gaussian<R: Rng + ?Sized>(ctx: TracialContext, rng: &mut R) -> Operator {
    let x = Operator::from_matrix_unchecked(ctx, random::complex_gaussian(rng, ctx.dim(), ctx.dim()));
    let n = x.norm_inf();
    x.scale(1.0 / n)
}

/// `m` projections onto consecutive groups of Haar-random columns, with group
/// sizes drawn at random; the family is complete.
pub fn random_projection_family<R: Rng + ?Sized>(
    ctx: TracialContext,
    rng: &mut R,
    m: usize,
) -> Result<ProjectionFamily> {
    let n = ctx.dim();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("{m} cells for dimension {n}")));
    }
    let u = random::haar_unitary(rng, n);
    let mut cuts: Vec<usize> = (1..n).collect();
    for i in 0..cuts.len() {
        let j = rng.random_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut cuts: Vec<usize> = cuts.into_iter().take(m - 1).collect();
    cuts.sort_unstable();
    cuts.insert(0, 0);
    cuts.push(n);
    let ps = cuts
        .windows(2)
        .map(|w| {
            let cols = u.columns(w[0], w[1] - w[0]);
            Operator::from_matrix_unchecked(ctx, cols * cols.adjoint())
        })
        .collect();
    ProjectionFamily::new(ctx, ps)
}

/// Largest residual of the conditional-expectation axioms at every level on
/// one unit-norm probe: idempotence, trace preservation, adjoint
/// compatibility, the bimodule property, positivity and the tower property.
pub fn expectation_axioms<R: Rng + ?Sized>(f: &Filtration, rng: &mut R) -> Result<f64> {
    let ctx = *f.context();
    let x = unit_gaussian(ctx, rng);
    let mut worst: f64 = 0.0;
    let ex: Vec<Operator> = (1..=f.depth()).map(|n| f.expectation(n, &x)).collect::<Result<_>>()?;
    for n in 1..=f.depth() {
        let e = &ex[n - 1];
        worst = worst.max((f.expectation(n, e)? - e).norm_inf());
        worst = worst.max((e.trace() - x.trace()).norm());
        worst = worst.max((f.expectation(n, &x.adjoint())? - e.adjoint()).norm_inf());
        let a = f.expectation(n, &unit_gaussian(ctx, rng))?;
        let b = f.expectation(n, &unit_gaussian(ctx, rng))?;
        worst = worst.max((f.expectation(n, &(&a * &x * &b))? - &a * e * &b).norm_inf());
        let pos = f.expectation(n, &x.abs_squared())?;
        worst = worst.max(-spectral::min_eigenvalue(&pos.hermitian_part())?);
        for m in 1..=f.depth() {
            let lhs = f.expectation(n, &ex[m - 1])?;
            worst = worst.max((lhs - &ex[n.min(m) - 1]).norm_inf());
        }
    }
    Ok(worst)
}

/// One random instance of the distribution splitting inequality.
pub fn splitting_sample<R: Rng + ?Sized>(ctx: TracialContext, rng: &mut R) -> Result<(f64, f64)> {
    let a = unit_gaussian(ctx, rng).scale(random::standard_normal(rng).exp());
    let b = unit_gaussian(ctx, rng).scale(random::standard_normal(rng).exp());
    let lambda = rng.random_range(0.05..1.5) * (&a + &b).norm_inf();
    let alpha = rng.random_range(0.02..0.98);
    let beta = rng.random_range(0.02..0.98);
    let r = spectral::splitting_inequality_check(&a, &b, lambda, alpha, beta)?;
    Ok((r.lhs, r.rhs))
}

/// Identities satisfied by `T`, `D` and `H` for a complete family, on
/// unit-norm random probes. Every `lhs` is a residual compared with `tol`,
/// except `truncation_resolvent` (against `1/λ`) and `truncation_contraction`
/// (against `‖x‖_2`).
pub fn truncation_identities<R: Rng + ?Sized>(fam: &ProjectionFamily, rng: &mut R, tol: f64) -> Result<Vec<Probe>> {
    let ctx = *fam.context();
    let x = unit_gaussian(ctx, rng);
    let y = unit_gaussian(ctx, rng);
    let t = |a: &Operator| triangular_truncate(fam, a);
    let d = |a: &Operator| diagonal_part(fam, a);
    let tx = t(&x)?;
    let dx = d(&x)?;
    let mut out = Vec::new();

    out.push(probe("truncation_idempotent", (t(&tx)? - &tx).norm_inf(), tol));
    let ty = t(&y)?;
    out.push(probe("truncation_orthogonal", tx.inner(&(&y - &ty)).norm(), tol));
    out.push(probe("truncation_contraction", tx.norm2(), x.norm2() + tol));
    out.push(probe("truncation_complement", (&tx + strict_lower(fam, &x)? - &x).norm_inf(), tol));

    let dt = d(&tx)?;
    let td = t(&dx)?;
    out.push(probe("truncation_diag_commutes", (&dt - &dx).norm_inf().max((&td - &dx).norm_inf()), tol));
    let prod = d(&(&tx * &ty))? - d(&tx)? * d(&ty)?;
    out.push(probe("truncation_diag_multiplicative", prod.norm_inf(), tol));

    // Upper triangular with invertible Hermitian diagonal: 2·1 + T(a) for a ≥ 0
    // of norm at most one.
    let a = x.abs_squared();
    let w = ctx.identity().scale(2.0) + t(&a)?;
    let inv = |o: &Operator| -> Result<Operator> {
        o.matrix()
            .clone()
            .try_inverse()
            .map(|m| Operator::from_matrix_unchecked(ctx, m))
            .ok_or_else(|| Error::NumericalBreakdown("singular matrix in truncation check".into()))
    };
    let dw = d(&w)?;
    let inv_res = (inv(&dw)? - d(&inv(&w)?)?).norm_inf();
    out.push(probe("truncation_diag_inverse", inv_res, tol));

    let h = x.hermitian_part();
    let hh = hilbert_op(fam, &h)?;
    let lhs = &h + hh.scale_complex(Complex64::new(0.0, 1.0));
    let rhs = t(&h)?.scale(2.0) - d(&h)?;
    out.push(probe("truncation_hilbert_identity", (lhs - rhs).norm_inf(), tol));
    out.push(probe("truncation_hilbert_hermitian", (&hh - hh.adjoint()).norm_inf(), tol));
    out.push(probe("truncation_hilbert_diagonal_free", d(&hh)?.norm_inf(), tol));

    out.push(probe("truncation_trace", (dx.trace() - x.trace()).norm(), tol));

    let lambda = 1.0;
    let ha = hilbert_op(fam, &a)?;
    let r = ctx.identity().scale(lambda) + &a + ha.scale_complex(Complex64::new(0.0, 1.0));
    out.push(probe("truncation_resolvent", inv(&r)?.norm_inf(), 1.0 / lambda + tol));
    Ok(out)
}
