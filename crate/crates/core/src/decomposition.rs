//! Column/row splitting `x = y + z` of a martingale by triangular truncation
//! against the dyadic families.
//!
//! A general martingale is reduced to at most four positive ones through the
//! Jordan parts of the Hermitian and imaginary parts of its final term. Each
//! positive component is normalised to trace one, decomposed with its own
//! families, and the pieces are recombined. `dz = dx − dy`, so the
//! reconstruction is exact.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cuculescu::{dyadic_families, DyadicFamilies};
use crate::martingale::{DifferenceSequence, HardyCandidate, MartingaleSequence, NormKind, Side};
use crate::spectral;
use crate::tracial::{Operator, OperatorJson};
use crate::truncation::triangular_truncate;
use crate::Result;

/// A positive piece `coefficient · scale · m` of the input, with `τ(m_T) = 1`.
#[derive(Debug, Clone)]
pub struct Component {
    pub coefficient: Complex64,
    pub scale: f64,
    pub martingale: MartingaleSequence,
    pub families: DyadicFamilies,
    /// Column parts `T(P_{n−1}, dm_n)` before scaling.
    pub column: Vec<Operator>,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    x: MartingaleSequence,
    dy: DifferenceSequence,
    dz: DifferenceSequence,
    components: Vec<Component>,
}

/// Family used to truncate the `n`-th difference (one-based): level `n − 1`,
/// and level 1 for `n = 1`.
fn family_index(n: usize) -> usize {
    (n - 1).max(1)
}

fn decompose_positive(coefficient: Complex64, part: &Operator, x: &MartingaleSequence) -> Result<Component> {
    let scale = part.trace().re;
    let m = MartingaleSequence::from_final(x.filtration().clone(), &part.scale(1.0 / scale))?;
    let families = dyadic_families(&m)?;
    let dm = m.differences();
    let column = dm
        .diffs()
        .iter()
        .enumerate()
        .map(|(k, d)| triangular_truncate(families.level(family_index(k + 1)), d))
        .collect::<Result<Vec<_>>>()?;
    Ok(Component { coefficient, scale, martingale: m, families, column })
}

/// Splits `x` into `y` (upper truncations, diagonal included) and `z`.
pub fn decompose(x: &MartingaleSequence) -> Result<Decomposition> {
    let ctx = *x.filtration().context();
    let last = x.last();
    let (hp, hm) = spectral::jordan_parts(&last.hermitian_part())?;
    let (kp, km) = spectral::jordan_parts(&last.imaginary_part())?;
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let parts: Vec<(Complex64, Operator)> =
        [(one, hp), (-one, hm), (i, kp), (-i, km)].into_iter().filter(|(_, p)| p.trace().re > 0.0).collect();
    let components = parts.par_iter().map(|(c, p)| decompose_positive(*c, p, x)).collect::<Result<Vec<_>>>()?;
    let dx = x.differences();
    let mut dy = Vec::with_capacity(x.len());
    let mut dz = Vec::with_capacity(x.len());
    for (k, d) in dx.diffs().iter().enumerate() {
        let y = components.iter().fold(ctx.zero(), |acc, c| acc + c.column[k].scale_complex(c.coefficient * c.scale));
        dz.push(d - &y);
        dy.push(y);
    }
    let f = x.filtration().clone();
    Ok(Decomposition {
        x: x.clone(),
        dy: DifferenceSequence::from_parts(f.clone(), dy),
        dz: DifferenceSequence::from_parts(f, dz),
        components,
    })
}

impl Decomposition {
    pub fn input(&self) -> &MartingaleSequence {
        &self.x
    }

    pub fn dy(&self) -> &DifferenceSequence {
        &self.dy
    }

    pub fn dz(&self) -> &DifferenceSequence {
        &self.dz
    }

    pub fn y(&self) -> MartingaleSequence {
        self.dy.martingale()
    }

    pub fn z(&self) -> MartingaleSequence {
        self.dz.martingale()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Families of the single component of a positive input.
    pub fn families(&self) -> Option<&DyadicFamilies> {
        match self.components.as_slice() {
            [c] => Some(&c.families),
            _ => None,
        }
    }

    pub fn hardy_candidate(&self) -> HardyCandidate {
        HardyCandidate { label: "decomposition".into(), column: self.dy.clone(), row: self.dz.clone() }
    }

    pub fn verify(&self) -> Result<DecompositionReport> {
        verify_decomposition(self)
    }

    pub fn to_json(&self, with_matrices: bool) -> Result<DecompositionJson> {
        let report = self.verify()?;
        let components = self
            .components
            .iter()
            .map(|c| ComponentJson {
                coefficient: [c.coefficient.re, c.coefficient.im],
                scale: c.scale,
                k_max: c.families.k_max(),
            })
            .collect();
        let matrices = with_matrices.then(|| DecompositionMatrices {
            dy: self.dy.diffs().iter().map(Operator::to_json).collect(),
            dz: self.dz.diffs().iter().map(Operator::to_json).collect(),
        });
        Ok(DecompositionJson { components, report, matrices })
    }
}

/// Residuals and norm ratios for the four conclusions plus the structural
/// identity for `|dy_n|²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    /// `max_n max(‖E_n(a_n) − a_n‖_∞, ‖E_{n−1}(a_n)‖_∞)` over `a = dy, dz`.
    pub martingale_difference: f64,
    /// `max_n ‖x_n − y_n − z_n‖_∞`.
    pub reconstruction: f64,
    /// `‖S_C(y)‖_2 + ‖S_R(z)‖_2`.
    pub l2_value: f64,
    pub l2_norm: f64,
    /// `l2_value / (2‖x‖_2)`.
    pub l2_ratio: f64,
    /// `‖S_C(y)‖_{1,∞} + ‖S_R(z)‖_{1,∞}`.
    pub weak_value: f64,
    pub l1_norm: f64,
    /// `weak_value / ‖x‖_1`.
    pub weak_ratio: f64,
    /// `max_n ‖|dy_n|² − Σ_{l,j} Σ_{i≤min(l,j)} p_l dx_n p_i dx_n p_j‖_∞`,
    /// per normalised component.
    pub square_expansion: f64,
    /// The same for `|dz_n*|²` with `i < min(l,j)`.
    pub row_square_expansion: f64,
    pub components: usize,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else if a == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `Σ_{l,j} Σ_{i ≤ min(l,j)} p_l d p_i d p_j`, or `i < min(l,j)` for `lower`.
fn triple_sum(ps: &[Operator], d: &Operator, lower: bool) -> Operator {
    let ctx = *d.context();
    let m = ps.len();
    let mut acc = ctx.zero();
    for l in 0..m {
        let left = &ps[l] * d;
        for j in 0..m {
            let right = d * &ps[j];
            let range = if lower { 0..l.min(j) } else { 0..(l.min(j) + 1) };
            for i in range {
                acc = acc + &left * &ps[i] * &right;
            }
        }
    }
    acc
}

pub fn verify_decomposition(dec: &Decomposition) -> Result<DecompositionReport> {
    let x = &dec.x;
    let f = x.filtration();
    let mut mds: f64 = 0.0;
    for seq in [&dec.dy, &dec.dz] {
        for (k, a) in seq.diffs().iter().enumerate() {
            let n = k + 1;
            mds = mds.max((f.expectation(n, a)? - a).norm_inf());
            if n >= 2 {
                mds = mds.max(f.expectation(n - 1, a)?.norm_inf());
            }
        }
    }
    let y = dec.y();
    let z = dec.z();
    let mut recon: f64 = 0.0;
    for ((a, b), c) in x.terms().iter().zip(y.terms()).zip(z.terms()) {
        recon = recon.max((a - b - c).norm_inf());
    }
    let l2_value =
        dec.dy.sequence_norm(Side::Column, NormKind::Lp(2.0))? + dec.dz.sequence_norm(Side::Row, NormKind::Lp(2.0))?;
    let l2_norm = x.norm(2.0)?;
    let weak_value =
        dec.dy.sequence_norm(Side::Column, NormKind::WeakL1)? + dec.dz.sequence_norm(Side::Row, NormKind::WeakL1)?;
    let l1_norm = x.norm(1.0)?;

    let mut sq: f64 = 0.0;
    let mut row_sq: f64 = 0.0;
    for c in &dec.components {
        let dm = c.martingale.differences();
        for (k, d) in dm.diffs().iter().enumerate() {
            let ps = c.families.level(family_index(k + 1)).projections();
            let direct = c.column[k].abs_squared();
            sq = sq.max((direct - triple_sum(ps, d, false)).norm_inf());
            let lower = d - &c.column[k];
            row_sq = row_sq.max((lower.adjoint().abs_squared() - triple_sum(ps, d, true)).norm_inf());
        }
    }
    Ok(DecompositionReport {
        martingale_difference: mds,
        reconstruction: recon,
        l2_value,
        l2_norm,
        l2_ratio: ratio(l2_value, 2.0 * l2_norm),
        weak_value,
        l1_norm,
        weak_ratio: ratio(weak_value, l1_norm),
        square_expansion: sq,
        row_square_expansion: row_sq,
        components: dec.components.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentJson {
    pub coefficient: [f64; 2],
    pub scale: f64,
    pub k_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionMatrices {
    pub dy: Vec<OperatorJson>,
    pub dz: Vec<OperatorJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionJson {
    pub components: Vec<ComponentJson>,
    pub report: DecompositionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<DecompositionMatrices>,
}
