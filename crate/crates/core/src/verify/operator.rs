use num_complex::Complex64;

use super::grid::Grid1D;
use crate::error::{Error, Result};
use crate::profile::{InvariantCoefficients, TimeProfile};
use crate::Region;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square banded complex matrix, rows stored as the 2b+1 entries
/// A[i][i-b..=i+b]. Entries outside the matrix are kept at zero, which
/// gives Dirichlet boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    n: usize,
    band: usize,
    data: Vec<Complex64>,
}

impl DiscretizedOperator {
    pub fn zeros(n: usize, band: usize) -> Self {
        DiscretizedOperator {
            n,
            band,
            data: vec![ZERO; n * (2 * band + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.band
    }

    fn width(&self) -> usize {
        2 * self.band + 1
    }

    /// A[i][j]; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let off = j as i64 - i as i64;
        if off.unsigned_abs() as usize > self.band || j >= self.n {
            return ZERO;
        }
        self.data[i * self.width() + (off + self.band as i64) as usize]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let off = j as i64 - i as i64;
        assert!(
            off.unsigned_abs() as usize <= self.band && j < self.n,
            "({i}, {j}) outside band"
        );
        let w = self.width();
        self.data[i * w + (off + self.band as i64) as usize] = v;
    }

    fn add_at(&mut self, i: usize, j: usize, v: Complex64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut op = DiscretizedOperator::zeros(values.len(), 0);
        op.data.copy_from_slice(values);
        op
    }

    /// Three-point second difference / dx².
    pub fn second_difference(n: usize, dx: f64) -> Self {
        let mut op = DiscretizedOperator::zeros(n, 1);
        let s = 1.0 / (dx * dx);
        for i in 0..n {
            op.set(i, i, Complex64::new(-2.0 * s, 0.0));
            if i > 0 {
                op.set(i, i - 1, Complex64::new(s, 0.0));
            }
            if i + 1 < n {
                op.set(i, i + 1, Complex64::new(s, 0.0));
            }
        }
        op
    }

    /// Central first difference / (2dx).
    pub fn first_difference(n: usize, dx: f64) -> Self {
        let mut op = DiscretizedOperator::zeros(n, 1);
        let s = 0.5 / dx;
        for i in 0..n {
            if i > 0 {
                op.set(i, i - 1, Complex64::new(-s, 0.0));
            }
            if i + 1 < n {
                op.set(i, i + 1, Complex64::new(s, 0.0));
            }
        }
        op
    }

    fn widened(&self, band: usize) -> Self {
        if band == self.band {
            return self.clone();
        }
        let mut out = DiscretizedOperator::zeros(self.n, band);
        for i in 0..self.n {
            for j in i.saturating_sub(self.band)..(i + self.band + 1).min(self.n) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    /// a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &DiscretizedOperator, b: Complex64) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let band = self.band.max(other.band);
        let mut out = self.widened(band);
        for v in &mut out.data {
            *v *= a;
        }
        let o = other.widened(band);
        for (v, w) in out.data.iter_mut().zip(&o.data) {
            *v += b * w;
        }
        out
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= a;
        }
        out
    }

    pub fn matmul(&self, other: &DiscretizedOperator) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = DiscretizedOperator::zeros(self.n, self.band + other.band);
        for i in 0..self.n {
            for k in i.saturating_sub(self.band)..(i + self.band + 1).min(self.n) {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in k.saturating_sub(other.band)..(k + other.band + 1).min(self.n) {
                    out.add_at(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    /// self·other - other·self.
    pub fn commutator(&self, other: &DiscretizedOperator) -> Self {
        let one = Complex64::new(1.0, 0.0);
        self.matmul(other).combine(one, &other.matmul(self), -one)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.band);
                let hi = (i + self.band + 1).min(self.n);
                (lo..hi).map(|j| self.get(i, j) * v[j]).sum()
            })
            .collect()
    }

    /// Max over rows `skip..n-skip` of Σ_j |A[i][j]|.
    pub fn max_row_sum(&self, skip: usize) -> f64 {
        (skip..self.n.saturating_sub(skip))
            .map(|i| {
                let lo = i.saturating_sub(self.band);
                let hi = (i + self.band + 1).min(self.n);
                (lo..hi).map(|j| self.get(i, j).norm()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric_real(&self) -> bool {
        (0..self.n).all(|i| {
            (i..(i + self.band + 1).min(self.n)).all(|j| {
                let a = self.get(i, j);
                a.im == 0.0 && a == self.get(j, i)
            })
        })
    }

    /// (lower, diag, upper) of a tridiagonal operator.
    pub fn tridiagonal(&self) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
        if self.band > 1 {
            return Err(Error::Invalid(format!("bandwidth {} is not tridiagonal", self.band)));
        }
        let lower = (0..self.n)
            .map(|i| if i > 0 { self.get(i, i - 1) } else { ZERO })
            .collect();
        let diag = (0..self.n).map(|i| self.get(i, i)).collect();
        let upper = (0..self.n).map(|i| self.get(i, i + 1)).collect();
        Ok((lower, diag, upper))
    }
}

/// Solves a tridiagonal system by Thomas elimination; `lower[0]` and
/// `upper[n-1]` are ignored.
pub fn solve_tridiagonal(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let mut c = vec![ZERO; n];
    let mut d = vec![ZERO; n];
    let mut pivot = diag[0];
    if pivot.norm() == 0.0 {
        return Err(Error::ZeroPivot { row: 0 });
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot.norm() == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    Ok(d)
}

/// Whether the potential term is i f|x| (the model) or f|x| (a Hermitian
/// code-path check).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Potential {
    #[default]
    Imaginary,
    Real,
}

/// Position-dependent part of an operator on a grid: |x| on the full
/// line, or σx on a half-line grid of region σ.
fn abs_x(grid: &Grid1D) -> Vec<f64> {
    grid.points().into_iter().map(f64::abs).collect()
}

/// H(t) = -(1/2m) D₂ + i f |x|.
pub fn build_hamiltonian(profile: &TimeProfile, t: f64, grid: &Grid1D) -> Result<DiscretizedOperator> {
    build_hamiltonian_with(profile, t, grid, Potential::Imaginary)
}

pub fn build_hamiltonian_with(
    profile: &TimeProfile,
    t: f64,
    grid: &Grid1D,
    potential: Potential,
) -> Result<DiscretizedOperator> {
    let m = profile.mass_at(t)?;
    let f = profile.coupling_at(t)?;
    hamiltonian_from(m, f, &abs_x(grid), grid.dx, potential)
}

pub(crate) fn hamiltonian_from(
    m: f64,
    f: f64,
    abs_x: &[f64],
    dx: f64,
    potential: Potential,
) -> Result<DiscretizedOperator> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    let strength = match potential {
        Potential::Imaginary => Complex64::new(0.0, f),
        Potential::Real => Complex64::new(f, 0.0),
    };
    let n = abs_x.len();
    let mut h = DiscretizedOperator::second_difference(n, dx).scaled(Complex64::new(-0.5 / m, 0.0));
    for (i, &ax) in abs_x.iter().enumerate() {
        h.add_at(i, i, strength * ax);
    }
    Ok(h)
}

/// p2·p² + x·X + p·P + constant on `grid` with p = -i d/dx.
pub fn build_invariant(coefficients: &InvariantCoefficients, grid: &Grid1D) -> DiscretizedOperator {
    let n = grid.len();
    let one = Complex64::new(1.0, 0.0);
    let p2 = DiscretizedOperator::second_difference(n, grid.dx).scaled(-coefficients.p2);
    let p = DiscretizedOperator::first_difference(n, grid.dx).scaled(-I * coefficients.p);
    let diag: Vec<Complex64> = grid
        .points()
        .into_iter()
        .map(|x| coefficients.x * x + coefficients.constant)
        .collect();
    p2.combine(one, &p, one)
        .combine(one, &DiscretizedOperator::diagonal(&diag), one)
}

/// The Hermitian reference p² + σx of region σ.
pub fn build_hermitian_invariant(region: Region, grid: &Grid1D) -> DiscretizedOperator {
    let coefficients = InvariantCoefficients {
        region,
        p2: Complex64::new(1.0, 0.0),
        x: Complex64::new(region.sign(), 0.0),
        p: ZERO,
        constant: ZERO,
    };
    build_invariant(&coefficients, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::level;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn thomas_matches_dense_product() {
        let n = 9;
        let lower: Vec<_> = (0..n).map(|i| c(0.3 * i as f64, -0.1)).collect();
        let diag: Vec<_> = (0..n).map(|i| c(4.0 + i as f64, 0.5)).collect();
        let upper: Vec<_> = (0..n).map(|i| c(-0.2, 0.1 * i as f64)).collect();
        let rhs: Vec<_> = (0..n).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        let mut op = DiscretizedOperator::zeros(n, 1);
        for i in 0..n {
            op.set(i, i, diag[i]);
            if i > 0 {
                op.set(i, i - 1, lower[i]);
            }
            if i + 1 < n {
                op.set(i, i + 1, upper[i]);
            }
        }
        for (a, b) in op.apply(&x).iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let z = vec![c(0.0, 0.0); 3];
        let one = vec![c(1.0, 0.0); 3];
        assert_eq!(
            solve_tridiagonal(&one, &z, &one, &one),
            Err(Error::ZeroPivot { row: 0 })
        );
        let diag = vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(
            solve_tridiagonal(&one, &diag, &one, &one),
            Err(Error::ZeroPivot { row: 1 })
        );
    }

    #[test]
    fn hamiltonian_structure() {
        let grid = Grid1D::symmetric(5.0, 0.1).unwrap();
        let free = TimeProfile::constant(1.0, 0.0, 1.0).unwrap();
        let h = build_hamiltonian(&free, 0.5, &grid).unwrap();
        assert!(h.is_symmetric_real());
        assert_eq!(h.bandwidth(), 1);

        let p = TimeProfile::constant(1.0, 0.7, 1.0).unwrap();
        let h = build_hamiltonian(&p, 0.5, &grid).unwrap();
        let i = grid.origin_index() + 13;
        assert!((h.get(i, i).im - 0.7 * grid.x(i).abs()).abs() < 1e-14);
        assert_eq!(h.get(i, i).re, 1.0 / (0.1 * 0.1));
    }

    #[test]
    fn real_potential_toggle_reproduces_invariant() {
        // m = 1/2 and f = 1 with a real potential give H = p² + |x| = I.
        let p = TimeProfile::constant(0.5, 1.0, 1.0).unwrap();
        let grid = Grid1D::symmetric(16.0, 0.005).unwrap();
        let h = build_hamiltonian_with(&p, 0.0, &grid, Potential::Real).unwrap();
        let l = level(0).unwrap();
        let v: Vec<Complex64> = grid.points().iter().map(|&x| c(l.value(x), 0.0)).collect();
        let hv = h.apply(&v);
        let o = grid.origin_index();
        let worst = (1..grid.len() - 1)
            .filter(|&i| i.abs_diff(o) > 2)
            .map(|i| (hv[i] - v[i] * l.lambda).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-5, "{worst}");
        assert!(build_hamiltonian(&TimeProfile::constant(1.0, 0.0, 1.0).unwrap(), 2.0, &grid).is_err());
    }

    #[test]
    fn banded_algebra() {
        let d2 = DiscretizedOperator::second_difference(6, 1.0);
        let d1 = DiscretizedOperator::first_difference(6, 1.0);
        let prod = d1.matmul(&d1);
        assert_eq!(prod.bandwidth(), 2);
        assert_eq!(prod.get(3, 1), c(0.25, 0.0));
        assert_eq!(prod.get(3, 3), c(-0.5, 0.0));
        assert_eq!(d2.commutator(&d2).max_row_sum(0), 0.0);
        let x = DiscretizedOperator::diagonal(&(0..6).map(|i| c(i as f64, 0.0)).collect::<Vec<_>>());
        // [D₁, x] is the averaging operator (shift₊ + shift₋)/2 in the interior.
        let k = d1.commutator(&x);
        assert_eq!(
            (k.get(2, 1), k.get(2, 2), k.get(2, 3)),
            (c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0))
        );
    }
}
