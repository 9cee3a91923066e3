use serde::Serialize;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// `K_1(α, β) = 4α⁻¹(1−α)⁻¹(1−β)⁻¹β⁻² + 10√2(1−α)⁻²(1−β)⁻¹β^{−1/2}`.
pub fn k1_constant(alpha: f64, beta: f64) -> f64 {
    4.0 / (alpha * (1.0 - alpha) * (1.0 - beta) * beta * beta)
        + 10.0 * SQRT2 / ((1.0 - alpha).powi(2) * (1.0 - beta) * beta.sqrt())
}

/// `4α⁻²β⁻² + α⁻¹K_1(α, β) + 2(1−α)⁻¹`.
pub fn c0_objective(alpha: f64, beta: f64) -> f64 {
    4.0 / (alpha * alpha * beta * beta) + k1_constant(alpha, beta) / alpha + 2.0 / (1.0 - alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C0Result {
    pub c0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub grid_step: f64,
    /// Overall constant `K = 8·K0`, `K0 = 2·C1`, `C1 = 2·C0`.
    pub k_theory: f64,
}

pub fn theoretical_constant_c0() -> C0Result {
    theoretical_constant_c0_with(1e-3)
}

/// Grid search over `(0,1)²` with the given step, then compass search down to
/// a step of `1e-8`.
pub fn theoretical_constant_c0_with(grid_step: f64) -> C0Result {
    let steps = (1.0 / grid_step).round() as usize;
    let mut best = (f64::INFINITY, 0.5, 0.5);
    for i in 1..steps {
        let a = i as f64 * grid_step;
        for j in 1..steps {
            let b = j as f64 * grid_step;
            let v = c0_objective(a, b);
            if v < best.0 {
                best = (v, a, b);
            }
        }
    }
    let (mut v, mut a, mut b) = best;
    let mut h = grid_step;
    let inside = |t: f64| t > 0.0 && t < 1.0;
    while h > 1e-8 {
        let mut moved = false;
        for (da, db) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let (na, nb) = (a + da, b + db);
            if inside(na) && inside(nb) {
                let nv = c0_objective(na, nb);
                if nv < v {
                    (v, a, b) = (nv, na, nb);
                    moved = true;
                }
            }
        }
        if !moved {
            h /= 2.0;
        }
    }
    C0Result { c0: v, alpha: a, beta: b, grid_step, k_theory: 32.0 * v }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_values() {
        // 4·2·2·2·4 + 10√2·4·2·√2 = 128 + 160.
        assert!((k1_constant(0.5, 0.5) - 288.0).abs() < 1e-9);
        // 4·4·4 + 2·288 + 2·2.
        assert!((c0_objective(0.5, 0.5) - 644.0).abs() < 1e-9);
    }

    #[test]
    fn minimiser_is_below_witness_and_stable() {
        let fine = theoretical_constant_c0();
        let coarse = theoretical_constant_c0_with(2e-3);
        assert!(fine.c0 <= 900.0);
        assert!((fine.c0 - coarse.c0).abs() < 1e-6);
        assert!((fine.alpha - coarse.alpha).abs() < 1e-6);
        assert!((fine.beta - coarse.beta).abs() < 1e-6);
        assert!((fine.k_theory - 32.0 * fine.c0).abs() < 1e-9);
        // Frozen from an independent Nelder–Mead minimisation.
        assert!((fine.c0 - 630.4820647337164).abs() < 1e-6);
        assert!((fine.alpha - 0.49688316).abs() < 1e-6);
        assert!((fine.beta - 0.56232937).abs() < 1e-6);
    }
}
