use super::{check_nu, OperatorError, TestFunction};
use crate::kernels::Kernel;
use crate::symbols::symbol;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Uniform periodic grid on [0, L)^d with n points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    pub length: f64,
    pub n: usize,
    pub d: usize,
}

impl PeriodicGrid {
    pub fn new(length: f64, n: usize, d: usize) -> Result<Self, OperatorError> {
        if !(length > 0.0) || n < 2 || !n.is_power_of_two() || !(1..=2).contains(&d) {
            return Err(OperatorError::InvalidInput(format!(
                "periodic grid needs L > 0, n a power of two and d in {{1, 2}} (got L={length}, n={n}, d={d})"
            )));
        }
        Ok(PeriodicGrid { length, n, d })
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinates of flat index `idx` (row-major, first axis slowest).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        if self.d == 1 {
            vec![idx as f64 * h]
        } else {
            vec![(idx / self.n) as f64 * h, (idx % self.n) as f64 * h]
        }
    }

    fn signed(&self, m: usize) -> i64 {
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }
}

/// Samples on a periodic grid; one component for a scalar, d for a vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: PeriodicGrid,
    pub components: Vec<Vec<f64>>,
}

impl SampledField {
    pub fn scalar(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self, OperatorError> {
        if values.len() != grid.len() {
            return Err(OperatorError::InvalidInput(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        Ok(SampledField { grid, components: vec![values] })
    }

    pub fn sample(grid: PeriodicGrid, u: &dyn TestFunction) -> Self {
        let values = (0..grid.len()).map(|i| u.value(&grid.point(i))).collect();
        SampledField { grid, components: vec![values] }
    }

    pub fn is_scalar(&self) -> bool {
        self.components.len() == 1
    }

    /// h^d Σ_j |v_j|².
    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.grid.spacing().powi(self.grid.d as i32);
        self.components.iter().flatten().map(|v| v * v).sum::<f64>() * w
    }
}

/// Result of the spectral gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOutput {
    pub field: SampledField,
    /// More than 1% of the non-mean energy sits in the top third of modes.
    pub aliasing_warning: bool,
    /// Largest discarded imaginary part.
    pub imag_residue: f64,
    /// h^d/N Σ_k |λ(k/L) û_k|², the Fourier side of the Parseval identity.
    pub spectral_energy: f64,
}

fn fft_axis(data: &mut [Complex64], n: usize, d: usize, axis: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    if d == 1 {
        fft.process(data);
    } else if axis == 1 {
        for row in data.chunks_mut(n) {
            fft.process(row);
        }
    } else {
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            fft.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }
}

fn fft_nd(data: &mut [Complex64], grid: &PeriodicGrid, inverse: bool) {
    for axis in 0..grid.d {
        fft_axis(data, grid.n, grid.d, axis, inverse);
    }
}

/// Multiplier for one mode. Nyquist components are averaged over both signs
/// so that the multiplier stays Hermitian on the discrete spectrum.
fn multiplier(kernel: &Kernel, nu: &[f64], grid: &PeriodicGrid, modes: &[usize]) -> Result<Vec<Complex64>, OperatorError> {
    let base: Vec<i64> = modes.iter().map(|&m| grid.signed(m)).collect();
    let nyq: Vec<usize> = (0..grid.d).filter(|&a| grid.n % 2 == 0 && modes[a] == grid.n / 2).collect();
    let variants = 1usize << nyq.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.d];
    for v in 0..variants {
        let mut k = base.clone();
        for (bit, &a) in nyq.iter().enumerate() {
            if v >> bit & 1 == 1 {
                k[a] = -k[a];
            }
        }
        let xi: Vec<f64> = k.iter().map(|&m| m as f64 / grid.length).collect();
        let s = symbol(kernel, nu, &xi)?;
        for (a, val) in acc.iter_mut().zip(s.value) {
            *a += val;
        }
    }
    Ok(acc.into_iter().map(|a| a / variants as f64).collect())
}

/// G_w^ν applied to a periodic scalar sample by Fourier multiplication.
pub fn gradient_spectral(kernel: &Kernel, nu: &[f64], field: &SampledField) -> Result<SpectralOutput, OperatorError> {
    let grid = field.grid;
    let d = grid.d;
    if kernel.dim() != d {
        return Err(OperatorError::InvalidInput("kernel and grid dimensions differ".into()));
    }
    if !field.is_scalar() {
        return Err(OperatorError::InvalidInput("spectral gradient expects a scalar field".into()));
    }
    check_nu(nu, d)?;
    let total = grid.len();
    let mut hat: Vec<Complex64> = field.components[0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut hat, &grid, false);

    let modes = |idx: usize| -> Vec<usize> {
        if d == 1 {
            vec![idx]
        } else {
            vec![idx / grid.n, idx % grid.n]
        }
    };

    let energy: f64 = hat.iter().skip(1).map(|c| c.norm_sqr()).sum();
    let top: f64 = hat
        .iter()
        .enumerate()
        .filter(|(i, _)| modes(*i).iter().any(|&m| 3 * grid.signed(m).unsigned_abs() as usize > grid.n))
        .map(|(_, c)| c.norm_sqr())
        .sum();
    let aliasing_warning = energy > 0.0 && top > 0.01 * energy;

    let mults: Vec<Vec<Complex64>> = (0..total)
        .into_par_iter()
        .map(|i| multiplier(kernel, nu, &grid, &modes(i)))
        .collect::<Result<_, _>>()?;

    let hd = grid.spacing().powi(d as i32);
    let mut spectral_energy = 0.0;
    let mut components = Vec::with_capacity(d);
    let mut imag_residue: f64 = 0.0;
    for a in 0..d {
        let mut data: Vec<Complex64> = hat.iter().zip(&mults).map(|(u, m)| u * m[a]).collect();
        spectral_energy += data.iter().map(|c| c.norm_sqr()).sum::<f64>();
        fft_nd(&mut data, &grid, true);
        let scale = 1.0 / total as f64;
        let re: Vec<f64> = data.iter().map(|c| c.re * scale).collect();
        let peak = re.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let im = data.iter().fold(0.0f64, |m, c| m.max((c.im * scale).abs()));
        if im > 1e-10 * (1.0 + peak) {
            return Err(OperatorError::ComplexResidue(im));
        }
        imag_residue = imag_residue.max(im);
        components.push(re);
    }
    Ok(SpectralOutput {
        field: SampledField { grid, components },
        aliasing_warning,
        imag_residue,
        spectral_energy: spectral_energy * hd / total as f64,
    })
}
