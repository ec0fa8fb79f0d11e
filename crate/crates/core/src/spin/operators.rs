use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::{Error, Result};

/// Angular-momentum matrices for spin `j` in the `J_z` eigenbasis, ordered
/// `m = j, j-1, …, -j`.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub j: f64,
    pub dimension: usize,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
    pub jplus: CMatrix,
    pub jminus: CMatrix,
}

impl SpinOperators {
    /// `m` quantum number of basis index `k`.
    pub fn m_of(&self, k: usize) -> f64 {
        self.j - k as f64
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dimension, self.dimension)
    }
}

pub fn build_spin_matrices(j: f64) -> Result<SpinOperators> {
    let twice = 2.0 * j;
    if !(twice >= 0.0) || (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::invalid(format!("spin {j} is not a non-negative half-integer")));
    }
    let dimension = twice.round() as usize + 1;
    let m = |k: usize| j - k as f64;
    let jz = CMatrix::from_fn(dimension, dimension, |r, c| {
        if r == c {
            Complex64::new(m(r), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    // <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)); row k-1 holds m+1 when column k holds m
    let jplus = CMatrix::from_fn(dimension, dimension, |r, c| {
        if c == r + 1 {
            let mc = m(c);
            Complex64::new((j * (j + 1.0) - mc * (mc + 1.0)).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let jminus = jplus.adjoint();
    let jx = (&jplus + &jminus) * Complex64::new(0.5, 0.0);
    let jy = (&jplus - &jminus) * Complex64::new(0.0, -0.5);
    Ok(SpinOperators { j, dimension, jx, jy, jz, jplus, jminus })
}
