use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Operator, TracialContext};
use crate::{random, CMatrix, Error, Result};

/// A unital *-subalgebra of `M_N`, stored as a trace-orthonormal basis.
///
/// Internally the basis is kept as the columns `vec(b_i) / √N` of an
/// `N² × d` frame, which are orthonormal for the Euclidean inner product. The
/// conditional expectation is the orthogonal projection onto their span.
#[derive(Debug, Clone)]
pub struct Subalgebra {
    ctx: TracialContext,
    frame: CMatrix,
}

/// Residuals of the structural invariants of a [`Subalgebra`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubalgebraReport {
    pub gram: f64,
    pub identity: f64,
    pub adjoint_closure: f64,
    pub product_closure: f64,
}

impl SubalgebraReport {
    pub fn max_residual(&self) -> f64 {
        self.gram.max(self.identity).max(self.adjoint_closure).max(self.product_closure)
    }
}

fn vec_of(m: &CMatrix) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

fn unvec(n: usize, v: &[Complex64]) -> CMatrix {
    DMatrix::from_column_slice(n, n, v)
}

/// Appends `v` to `cols` after two passes of Gram-Schmidt if it is not
/// already in their span (relative residual above `rel_tol`).
fn extend_orthonormal(cols: &mut Vec<DVector<Complex64>>, v: DVector<Complex64>, rel_tol: f64) -> bool {
    let scale = v.norm();
    if scale == 0.0 {
        return false;
    }
    let mut r = v;
    for _ in 0..2 {
        for q in cols.iter() {
            let c = q.dotc(&r);
            r.axpy(-c, q, Complex64::new(1.0, 0.0));
        }
    }
    let rn = r.norm();
    if rn > rel_tol * scale {
        cols.push(r.unscale(rn));
        true
    } else {
        false
    }
}

impl Subalgebra {
    fn from_columns(ctx: TracialContext, cols: &[DVector<Complex64>]) -> Self {
        let frame =
            if cols.is_empty() { CMatrix::zeros(ctx.dim() * ctx.dim(), 0) } else { CMatrix::from_columns(cols) };
        Self { ctx, frame }
    }

    /// Trusted constructor for builders whose basis is orthonormal by
    /// construction.
    pub(crate) fn from_orthonormal_unchecked(ctx: TracialContext, basis: &[CMatrix]) -> Self {
        let s = ctx.trace_weight().sqrt();
        let cols: Vec<_> = basis.iter().map(|b| vec_of(b).scale(s)).collect();
        Self::from_columns(ctx, &cols)
    }

    /// The scalar subalgebra `C·1`.
    pub fn scalars(ctx: TracialContext) -> Self {
        Self::from_orthonormal_unchecked(ctx, &[CMatrix::identity(ctx.dim(), ctx.dim())])
    }

    /// All of `M_N`, with the matrix-unit basis `√N e_{ij}`.
    pub fn full(ctx: TracialContext) -> Self {
        let n = ctx.dim();
        let cols: Vec<_> = (0..n * n)
            .map(|k| {
                let mut v = DVector::zeros(n * n);
                v[k] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::from_columns(ctx, &cols)
    }

    /// Validated constructor from a basis claimed orthonormal for `τ(a* b)`.
    pub fn from_orthonormal_basis(ctx: TracialContext, basis: &[Operator]) -> Result<Self> {
        for b in basis {
            ctx.ensure_same(b.context())?;
        }
        let mats: Vec<CMatrix> = basis.iter().map(|b| b.matrix().clone()).collect();
        let s = Self::from_orthonormal_unchecked(ctx, &mats);
        let report = s.check_invariants();
        let tol = ctx.tolerances().span_residual;
        if report.max_residual() > tol.max(1e-12) * (1.0 + s.dimension() as f64) {
            return Err(Error::InvalidArgument(format!("basis does not span a unital *-subalgebra: {report:?}")));
        }
        Ok(s)
    }

    /// Smallest unital *-subalgebra containing `generators`.
    ///
    /// Adjoints and pairwise products of the current basis are added and the
    /// span re-orthonormalized until the dimension stops growing. A finite
    /// dimensional algebra stabilizes after at most `N²` rounds, so running
    /// out of rounds is reported as a numerical breakdown.
    pub fn from_generators(ctx: TracialContext, generators: &[Operator]) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidArgument("at least one generator is required".into()));
        }
        for g in generators {
            ctx.ensure_same(g.context())?;
        }
        let n = ctx.dim();
        let full = n * n;
        let tol = ctx.tolerances().span_residual;
        let mut cols = Vec::new();
        extend_orthonormal(&mut cols, vec_of(&CMatrix::identity(n, n)), tol);
        for g in generators {
            extend_orthonormal(&mut cols, vec_of(g.matrix()), tol);
        }
        for _ in 0..full.max(1) {
            let before = cols.len();
            let current: Vec<CMatrix> = cols.iter().map(|c| unvec(n, c.as_slice())).collect();
            for a in &current {
                if cols.len() == full {
                    break;
                }
                extend_orthonormal(&mut cols, vec_of(&a.adjoint()), tol);
            }
            'outer: for a in &current {
                for b in &current {
                    if cols.len() == full {
                        break 'outer;
                    }
                    extend_orthonormal(&mut cols, vec_of(&(a * b)), tol);
                }
            }
            if cols.len() == before || cols.len() == full {
                return Ok(Self::from_columns(ctx, &cols));
            }
        }
        Err(Error::NumericalBreakdown(format!("*-closure did not stabilize within {full} rounds")))
    }

    pub fn context(&self) -> &TracialContext {
        &self.ctx
    }

    pub fn dimension(&self) -> usize {
        self.frame.ncols()
    }

    /// Orthonormal basis for `τ(a* b)`.
    pub fn basis(&self) -> Vec<Operator> {
        let n = self.ctx.dim();
        let s = (n as f64).sqrt();
        self.frame
            .column_iter()
            .map(|c| {
                let m = DMatrix::from_iterator(n, n, c.iter().map(|z| z * s));
                Operator::from_matrix_unchecked(self.ctx, m)
            })
            .collect()
    }

    pub(crate) fn project_matrix(&self, m: &CMatrix) -> CMatrix {
        let n = self.ctx.dim();
        let v = DVector::from_column_slice(m.as_slice());
        let coeffs = self.frame.ad_mul(&v);
        let proj = &self.frame * coeffs;
        unvec(n, proj.as_slice())
    }

    /// Trace-preserving conditional expectation onto this subalgebra,
    /// `E(x) = Σ_i ⟨b_i, x⟩ b_i`.
    pub fn expectation(&self, x: &Operator) -> Result<Operator> {
        self.ctx.ensure_same(x.context())?;
        Ok(Operator::from_matrix_unchecked(self.ctx, self.project_matrix(x.matrix())))
    }

    /// `‖x − E(x)‖_2`.
    pub fn residual(&self, x: &Operator) -> Result<f64> {
        Ok((x - self.expectation(x)?).norm2())
    }

    pub fn contains(&self, x: &Operator) -> Result<bool> {
        let tol = self.ctx.tolerances().span_residual * (1.0 + x.norm2());
        Ok(self.residual(x)? <= tol)
    }

    /// `u S u*` for a unitary `u`.
    pub fn conjugated(&self, u: &CMatrix) -> Self {
        let n = self.ctx.dim();
        let uh = u.adjoint();
        let cols: Vec<_> = self
            .frame
            .column_iter()
            .map(|c| {
                let b = unvec(n, c.as_slice());
                vec_of(&(u * b * &uh))
            })
            .collect();
        Self::from_columns(self.ctx, &cols)
    }

    /// Gram, unit and closure residuals. Closure is tested on every pair of
    /// basis elements for small subalgebras and on seeded random elements
    /// otherwise.
    pub fn check_invariants(&self) -> SubalgebraReport {
        let d = self.dimension();
        let gram =
            (self.frame.ad_mul(&self.frame) - CMatrix::identity(d, d)).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        let one = self.ctx.identity();
        let identity = self.residual(&one).unwrap_or(f64::INFINITY);
        let basis = self.basis();
        let probes: Vec<Operator> = if d <= 16 {
            basis.clone()
        } else {
            let mut rng = random::rng_from_seed(0x5eed);
            (0..6)
                .map(|_| {
                    let c = random::complex_gaussian(&mut rng, d, 1);
                    let v = &self.frame * c;
                    let n = self.ctx.dim();
                    let m = unvec(n, v.as_slice()).scale((n as f64).sqrt() / (d as f64).sqrt());
                    Operator::from_matrix_unchecked(self.ctx, m)
                })
                .collect()
        };
        let mut adjoint_closure = 0.0_f64;
        let mut product_closure = 0.0_f64;
        for a in &probes {
            let r = self.residual(&a.adjoint()).unwrap_or(f64::INFINITY) / a.norm2().max(1e-300);
            adjoint_closure = adjoint_closure.max(r);
            for b in &probes {
                let ab = a * b;
                let scale = (a.norm2() * b.norm2()).max(1e-300);
                product_closure = product_closure.max(self.residual(&ab).unwrap_or(f64::INFINITY) / scale);
            }
        }
        SubalgebraReport { gram, identity, adjoint_closure, product_closure }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize) -> TracialContext {
        TracialContext::new(n).unwrap()
    }

    #[test]
    fn identity_generates_the_scalars() {
        let c = ctx(3);
        let s = Subalgebra::from_generators(c, &[c.identity()]).unwrap();
        assert_eq!(s.dimension(), 1);
    }

    #[test]
    fn single_matrix_unit_generates_the_diagonal() {
        let c = ctx(2);
        let e11 = Operator::matrix_unit(c, 0, 0).unwrap();
        let s = Subalgebra::from_generators(c, &[e11]).unwrap();
        assert_eq!(s.dimension(), 2);
        let e22 = Operator::matrix_unit(c, 1, 1).unwrap();
        assert!(s.contains(&e22).unwrap());
        assert!(!s.contains(&Operator::matrix_unit(c, 0, 1).unwrap()).unwrap());
    }

    #[test]
    fn matrix_units_generate_everything() {
        let c = ctx(2);
        let units: Vec<_> = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| Operator::matrix_unit(c, i, j).unwrap())
            .collect();
        let s = Subalgebra::from_generators(c, &units).unwrap();
        assert_eq!(s.dimension(), 4);
        // An off-diagonal unit alone already generates M_2.
        let s = Subalgebra::from_generators(c, &[Operator::matrix_unit(c, 0, 1).unwrap()]).unwrap();
        assert_eq!(s.dimension(), 4);
    }

    #[test]
    fn empty_generator_list_is_an_error() {
        assert!(Subalgebra::from_generators(ctx(2), &[]).is_err());
    }

    #[test]
    fn scalar_expectation_is_the_trace() {
        let c = ctx(3);
        let mut rng = random::rng_from_seed(2);
        let x = Operator::new(c, random::complex_gaussian(&mut rng, 3, 3)).unwrap();
        let e = Subalgebra::scalars(c).expectation(&x).unwrap();
        let target = c.identity().scale_complex(x.trace());
        assert!((e - target).max_abs() < 1e-14);
    }

    #[test]
    fn diagonal_expectation_keeps_the_diagonal() {
        let c = ctx(2);
        let s = Subalgebra::from_generators(c, &[Operator::matrix_unit(c, 0, 0).unwrap()]).unwrap();
        let x = Operator::from_real_rows(c, &[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let e = s.expectation(&x).unwrap();
        let want = Operator::diagonal(c, &[1.0, 4.0]).unwrap();
        assert!((e - want).max_abs() < 1e-14);
    }

    #[test]
    fn validated_constructor_rejects_non_algebras() {
        let c = ctx(2);
        // span{1, e12·√2}: not *-closed.
        let one = c.identity();
        let e12 = Operator::matrix_unit(c, 0, 1).unwrap().scale(2f64.sqrt());
        assert!(Subalgebra::from_orthonormal_basis(c, &[one.clone(), e12]).is_err());
        assert!(Subalgebra::from_orthonormal_basis(c, &[one]).is_ok());
    }

    #[test]
    fn full_algebra_invariants() {
        let s = Subalgebra::full(ctx(5));
        assert_eq!(s.dimension(), 25);
        assert!(s.check_invariants().max_residual() < 1e-12);
    }
}
