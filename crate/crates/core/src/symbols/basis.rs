use super::SymbolError;

/// Orthonormal basis {v_1, …, v_{d−1}, μ} of R^d built recursively from a
/// unit vector μ with μ₁ > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoBasis {
    pub mu: Vec<f64>,
    /// Column-major: `columns[k]` is v_{k+1}, the last column is μ.
    pub columns: Vec<Vec<f64>>,
}

impl OrthoBasis {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Row-major d×d matrix with the basis vectors as columns.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.columns[j][i]).collect()).collect()
    }

    /// max |(MᵀM − I)_{ij}|
    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = self.columns[i].iter().zip(&self.columns[j]).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// First component of v_k from the closed formula
/// μ₁|μ_{k+1}| / (√(μ₁²+…+μ_k²) · √(μ₁²+…+μ_{k+1}²)), k = 1, …, d−1.
pub fn first_row_formula(mu: &[f64], k: usize) -> f64 {
    let s_k: f64 = mu[..k].iter().map(|x| x * x).sum();
    let s_k1 = s_k + mu[k] * mu[k];
    mu[0] * mu[k].abs() / (s_k.sqrt() * s_k1.sqrt())
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn complement(mu: &[f64]) -> Vec<Vec<f64>> {
    let d = mu.len();
    if d == 2 {
        return if mu[1] >= 0.0 { vec![vec![mu[1], -mu[0]]] } else { vec![vec![-mu[1], mu[0]]] };
    }
    let last = mu[d - 1];
    let rest = (1.0 - last * last).max(0.0).sqrt();
    let tilde: Vec<f64> = mu[..d - 1].iter().map(|x| x / rest).collect();
    let mut out: Vec<Vec<f64>> = complement(&tilde)
        .into_iter()
        .map(|mut w| {
            w.push(0.0);
            w
        })
        .collect();
    let mut vd: Vec<f64> = tilde.iter().map(|x| last.abs() * x).collect();
    vd.push(-sgn(last) * rest);
    out.push(vd);
    out
}

/// Recursive orthonormal completion of μ.
pub fn ortho_basis(mu: &[f64]) -> Result<OrthoBasis, SymbolError> {
    if mu.len() < 2 {
        return Err(SymbolError::Domain("orthonormal completion needs d ≥ 2".into()));
    }
    let n: f64 = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-12 {
        return Err(SymbolError::Domain(format!("mu must be a unit vector (|mu| = {n})")));
    }
    if !(mu[0] > 0.0) {
        return Err(SymbolError::Domain(format!("first component must be positive, got {}", mu[0])));
    }
    let mut columns = complement(mu);
    columns.push(mu.to_vec());
    Ok(OrthoBasis { mu: mu.to_vec(), columns })
}
