use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operators::{build_spin_matrices, SpinOperators};
use crate::linalg::{eigh, kron, CMatrix};
use crate::{Error, Result};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Physical constants of the donor electron–nuclear system.
///
/// `hyperfine` is an angular frequency (rad/s); `delta_bi` and `delta_si` are
/// the nuclear-to-electron Zeeman frequency ratios of the donor nucleus and of
/// ²⁹Si.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DonorSpec {
    pub electron_spin: f64,
    pub nuclear_spin: f64,
    pub hyperfine: f64,
    pub moment: f64,
    pub delta_bi: f64,
    pub delta_si: f64,
}

impl DonorSpec {
    /// Substitutional ²⁰⁹Bi in silicon.
    pub fn si_bi() -> Self {
        DonorSpec {
            electron_spin: 0.5,
            nuclear_spin: 4.5,
            hyperfine: 2.0 * PI * 1.4754e9,
            moment: 1.857e-23,
            delta_bi: 2.486e-4,
            delta_si: 3.021e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.electron_spin != 0.5 {
            return Err(Error::invalid("donor model needs an electron spin of 1/2"));
        }
        let twice = 2.0 * self.nuclear_spin;
        if !(twice >= 1.0) || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::invalid("nuclear spin must be a positive half-integer"));
        }
        for (name, v) in [
            ("hyperfine", self.hyperfine),
            ("moment", self.moment),
            ("delta_bi", self.delta_bi),
            ("delta_si", self.delta_si),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }

    pub fn nuclear_dim(&self) -> usize {
        (2.0 * self.nuclear_spin).round() as usize + 1
    }

    /// Hilbert-space dimension `(2S+1)(2I+1)`.
    pub fn dimension(&self) -> usize {
        2 * self.nuclear_dim()
    }

    /// Largest `|m|` with `m = m_S + m_I`.
    pub fn m_max(&self) -> i32 {
        (self.nuclear_spin + 0.5).round() as i32
    }

    /// Electronic Zeeman angular frequency `ω₀ = μB/ħ` (rad/s).
    pub fn omega0(&self, field: f64) -> f64 {
        self.moment * field / HBAR
    }

    /// Field (T) for a given `ω₀`.
    pub fn field_for_omega0(&self, omega0: f64) -> f64 {
        omega0 * HBAR / self.moment
    }

    /// Bare ²⁹Si nuclear Zeeman angular frequency `δ_Si ω₀`.
    pub fn si_zeeman(&self, field: f64) -> f64 {
        self.delta_si * self.omega0(field)
    }

    /// `Ω_m(ω₀) = m + (ω₀/A)(1 + δ_Bi)`.
    pub fn omega_m(&self, m: i32, omega0: f64) -> f64 {
        m as f64 + omega0 / self.hyperfine * (1.0 + self.delta_bi)
    }

    /// Closed-form doublet mixing `γ_m = Ω_m / sqrt(Ω_m² + (I+½)² − m²)`.
    ///
    /// For the unmixed extremes `|m| = I+½` this is the sign of `Ω_m`, with
    /// `Ω_m = 0` mapped to −1.
    pub fn gamma(&self, m: i32, omega0: f64) -> f64 {
        let om = self.omega_m(m, omega0);
        let mm = self.m_max() as f64;
        let rest = mm * mm - (m as f64) * (m as f64);
        if rest <= 0.0 {
            if om > 0.0 {
                1.0
            } else {
                -1.0
            }
        } else {
            om / (om * om + rest).sqrt()
        }
    }

    /// `⟨S_z⟩` of doublet member `(m, branch)` from the closed form.
    pub fn sz(&self, m: i32, branch: Branch, omega0: f64) -> f64 {
        branch.sign() * self.gamma(m, omega0) / 2.0
    }
}

impl Default for DonorSpec {
    fn default() -> Self {
        Self::si_bi()
    }
}

/// Upper (`Plus`) or lower (`Minus`) member of a constant-`m` doublet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Branch::Plus => '+',
            Branch::Minus => '-',
        }
    }
}

/// Mixing data for one eigenstate `|±, m⟩ = a|±½, m∓½⟩ + b|∓½, m±½⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubletLevel {
    pub m: i32,
    pub branch: Branch,
    pub omega_m: f64,
    /// `|a|² − |b|²` from the eigenvector.
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
}

impl DoubletLevel {
    /// `⟨S_z⟩ = ±γ/2`.
    pub fn sz(&self) -> f64 {
        self.branch.sign() * self.gamma / 2.0
    }
}

/// Energies and eigenvectors at one field with adiabatic labels `1..=20`.
///
/// Index `k` of every vector corresponds to label `k + 1`; energies ascend.
#[derive(Clone, Debug)]
pub struct DonorEigensystem {
    pub field: f64,
    pub omega0: f64,
    pub energies: Vec<f64>,
    /// Columns are eigenvectors in the `|m_S, m_I⟩` product basis.
    pub states: CMatrix,
    pub levels: Vec<DoubletLevel>,
}

impl DonorEigensystem {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    fn index(&self, label: usize) -> Result<usize> {
        if label == 0 || label > self.len() {
            return Err(Error::invalid(format!("level label {label} outside 1..={}", self.len())));
        }
        Ok(label - 1)
    }

    pub fn energy(&self, label: usize) -> Result<f64> {
        Ok(self.energies[self.index(label)?])
    }

    pub fn level(&self, label: usize) -> Result<&DoubletLevel> {
        Ok(&self.levels[self.index(label)?])
    }

    pub fn state(&self, label: usize) -> Result<DVector<Complex64>> {
        Ok(self.states.column(self.index(label)?).into_owned())
    }

    pub fn label_of(&self, m: i32, branch: Branch) -> Option<usize> {
        self.levels.iter().position(|l| l.m == m && l.branch == branch).map(|k| k + 1)
    }

    /// `V† op V` for an operator given in the product basis.
    pub fn to_eigenbasis(&self, op: &CMatrix) -> CMatrix {
        self.states.adjoint() * op * &self.states
    }
}

/// Electron and nuclear operators on the donor product space.
#[derive(Clone, Debug)]
pub struct DonorOperators {
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub ix: CMatrix,
    pub iy: CMatrix,
    pub iz: CMatrix,
}

impl DonorOperators {
    pub fn new(spec: &DonorSpec) -> Result<Self> {
        spec.validate()?;
        let s = build_spin_matrices(spec.electron_spin)?;
        let i = build_spin_matrices(spec.nuclear_spin)?;
        let e1 = s.identity();
        let n1 = i.identity();
        Ok(DonorOperators {
            sx: kron(&s.jx, &n1),
            sy: kron(&s.jy, &n1),
            sz: kron(&s.jz, &n1),
            ix: kron(&e1, &i.jx),
            iy: kron(&e1, &i.jy),
            iz: kron(&e1, &i.jz),
        })
    }
}

/// `H = A I·S + ω₀ (S_z − δ_Bi I_z)` in rad/s on the `|m_S, m_I⟩` basis.
pub fn build_donor_hamiltonian(spec: &DonorSpec, field: f64) -> Result<CMatrix> {
    if !(field >= 0.0 && field.is_finite()) {
        return Err(Error::invalid(format!("field {field} T must be finite and non-negative")));
    }
    let ops = DonorOperators::new(spec)?;
    let a = Complex64::new(spec.hyperfine, 0.0);
    let w = Complex64::new(spec.omega0(field), 0.0);
    let hf = (&ops.sx * &ops.ix + &ops.sy * &ops.iy + &ops.sz * &ops.iz) * a;
    let zee = (&ops.sz - &ops.iz * Complex64::new(spec.delta_bi, 0.0)) * w;
    Ok(hf + zee)
}

fn product_index(spec: &DonorSpec, ms_up: bool, mi: f64) -> usize {
    let s = if ms_up { 0 } else { 1 };
    let k = (spec.nuclear_spin - mi).round() as usize;
    s * spec.nuclear_dim() + k
}

/// Diagonalise the donor Hamiltonian and assign doublet labels.
///
/// `H` conserves `m = m_S + m_I`, so each eigenvector is obtained inside its
/// constant-`m` subspace; this keeps the `(m, ±)` assignment exact even where
/// levels of different `m` are degenerate. Labels follow ascending energy;
/// ties are broken by ascending `m`, then `−` before `+`.
pub fn eigensystem(spec: &DonorSpec, field: f64) -> Result<DonorEigensystem> {
    let h = build_donor_hamiltonian(spec, field)?;
    let omega0 = spec.omega0(field);
    let dim = spec.dimension();
    let m_max = spec.m_max();
    let mut found: Vec<(f64, DoubletLevel, DVector<Complex64>)> = Vec::with_capacity(dim);

    for m in -m_max..=m_max {
        let mf = m as f64;
        let omega_m = spec.omega_m(m, omega0);
        if m.abs() == m_max {
            let idx = if m > 0 { product_index(spec, true, mf - 0.5) } else { product_index(spec, false, mf + 0.5) };
            let mut v = DVector::zeros(dim);
            v[idx] = Complex64::new(1.0, 0.0);
            // the lone state is |+½, I⟩ for m > 0 and |−½, −I⟩ for m < 0; the branch
            // is chosen so that |a|² − |b|² carries the sign of Ω_m
            let (branch, a, b) = if m > 0 || omega_m <= 0.0 {
                if m > 0 {
                    (Branch::Plus, 1.0, 0.0)
                } else {
                    (Branch::Plus, 0.0, 1.0)
                }
            } else {
                (Branch::Minus, 1.0, 0.0)
            };
            let level = DoubletLevel { m, branch, omega_m, gamma: a * a - b * b, a, b };
            found.push((h[(idx, idx)].re, level, v));
            continue;
        }
        let p = product_index(spec, true, mf - 0.5);
        let q = product_index(spec, false, mf + 0.5);
        let block = CMatrix::from_row_slice(2, 2, &[h[(p, p)], h[(p, q)], h[(q, p)], h[(q, q)]]);
        let e = eigh(&block);
        for (col, branch) in [(0usize, Branch::Minus), (1usize, Branch::Plus)] {
            let (cp, cq) = (e.vectors[(0, col)], e.vectors[(1, col)]);
            let (ca, cb) = match branch {
                Branch::Plus => (cp, cq),
                Branch::Minus => (cq, cp),
            };
            let phase = if ca.norm() > 1e-300 { ca.conj() / ca.norm() } else { cb.conj() / cb.norm() };
            let (cp, cq, ca, cb) = (cp * phase, cq * phase, ca * phase, cb * phase);
            let mut v = DVector::zeros(dim);
            v[p] = cp;
            v[q] = cq;
            let (a, b) = (ca.re, cb.re);
            let gamma = ca.norm_sqr() - cb.norm_sqr();
            let level = DoubletLevel { m, branch, omega_m, gamma, a, b };
            found.push((e.values[col], level, v));
        }
    }

    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    // deterministic order inside numerically degenerate groups
    let tol = 1e-9 * (spec.hyperfine + omega0.abs());
    let mut start = 0;
    while start < found.len() {
        let mut end = start + 1;
        while end < found.len() && found[end].0 - found[end - 1].0 <= tol {
            end += 1;
        }
        found[start..end].sort_by_key(|x| (x.1.m, x.1.branch));
        start = end;
    }

    let energies = found.iter().map(|f| f.0).collect();
    let levels = found.iter().map(|f| f.1).collect();
    let states = CMatrix::from_fn(dim, dim, |r, c| found[c].2[r]);
    Ok(DonorEigensystem { field, omega0, energies, states, levels })
}

/// Transition between two adiabatic levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub upper: usize,
    pub lower: usize,
    /// Hz
    pub frequency: f64,
    /// Hz/T
    pub dfdb: f64,
}

impl TransitionSpec {
    pub fn at(spec: &DonorSpec, upper: usize, lower: usize, field: f64) -> Result<Self> {
        Ok(TransitionSpec {
            upper,
            lower,
            frequency: transition_frequency(spec, upper, lower, field)?,
            dfdb: df_db(spec, upper, lower, field)?,
        })
    }
}

/// `|E_i − E_j| / 2π` in Hz.
pub fn transition_frequency(spec: &DonorSpec, i: usize, j: usize, field: f64) -> Result<f64> {
    if i == j {
        return Err(Error::invalid("transition needs two distinct levels"));
    }
    let es = eigensystem(spec, field)?;
    Ok((es.energy(i)? - es.energy(j)?).abs() / (2.0 * PI))
}

/// Default finite-difference step for `df/dB` (T).
pub const DFDB_STEP: f64 = 10e-6;

/// Central difference of the transition frequency with step `h` (Hz/T).
///
/// Falls back to a forward difference when `field < h`.
pub fn df_db_step(spec: &DonorSpec, i: usize, j: usize, field: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    if field >= h {
        let fp = transition_frequency(spec, i, j, field + h)?;
        let fm = transition_frequency(spec, i, j, field - h)?;
        Ok((fp - fm) / (2.0 * h))
    } else {
        let f0 = transition_frequency(spec, i, j, field)?;
        let fp = transition_frequency(spec, i, j, field + h)?;
        Ok((fp - f0) / h)
    }
}

/// `df/dB` with a 10 μT central difference, Richardson-corrected when the
/// half-step estimate disagrees by more than 0.1 %.
pub fn df_db(spec: &DonorSpec, i: usize, j: usize, field: f64) -> Result<f64> {
    let d1 = df_db_step(spec, i, j, field, DFDB_STEP)?;
    let d2 = df_db_step(spec, i, j, field, DFDB_STEP / 2.0)?;
    if (d1 - d2).abs() <= 1e-3 * d2.abs().max(1.0) {
        Ok(d2)
    } else {
        Ok((4.0 * d2 - d1) / 3.0)
    }
}

/// Hellmann–Feynman `df/dB` from the closed-form `⟨S_z⟩`: each level moves as
/// `dE/dω₀ = (1+δ_Bi)⟨S_z⟩ − δ_Bi m`.
pub fn df_db_closed_form(spec: &DonorSpec, es: &DonorEigensystem, i: usize, j: usize) -> Result<f64> {
    let slope = |label: usize| -> Result<f64> {
        let l = es.level(label)?;
        Ok((1.0 + spec.delta_bi) * spec.sz(l.m, l.branch, es.omega0) - spec.delta_bi * l.m as f64)
    };
    let sign = (es.energy(i)? - es.energy(j)?).signum();
    Ok(sign * (slope(i)? - slope(j)?) * spec.moment / HBAR / (2.0 * PI))
}

/// `|⟨i| S_x |j⟩|` between adiabatic levels.
pub fn sx_element(es: &DonorEigensystem, ops: &DonorOperators, i: usize, j: usize) -> Result<f64> {
    let vi = es.state(i)?;
    let vj = es.state(j)?;
    Ok((vi.adjoint() * &ops.sx * vj)[(0, 0)].norm())
}

/// Convenience for the bath module: electron spin-½ operators.
pub fn electron_operators() -> SpinOperators {
    build_spin_matrices(0.5).expect("spin 1/2 is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn spec() -> DonorSpec {
        DonorSpec::si_bi()
    }

    #[test]
    fn dimension_is_twenty() {
        assert_eq!(spec().dimension(), 20);
        assert_eq!(spec().m_max(), 5);
    }

    #[test]
    fn hamiltonian_is_hermitian_and_traceless() {
        for b in [0.0, 0.1, 0.188, 0.6, 2.0] {
            let h = build_donor_hamiltonian(&spec(), b).unwrap();
            let norm = max_abs(&h);
            assert!(max_abs(&(&h - h.adjoint())) < 1e-12 * norm);
            assert!(h.trace().norm() < 1e-9 * norm);
        }
    }

    #[test]
    fn negative_field_is_rejected() {
        assert!(build_donor_hamiltonian(&spec(), -1e-3).is_err());
        assert!(eigensystem(&spec(), f64::NAN).is_err());
    }

    #[test]
    fn zero_field_gamma_is_m_over_five() {
        let es = eigensystem(&spec(), 0.0).unwrap();
        for l in &es.levels {
            if l.m.abs() < 5 {
                assert!((l.gamma - l.m as f64 / 5.0).abs() < 1e-12, "{l:?}");
            }
        }
    }

    #[test]
    fn block_energies_match_full_diagonalisation() {
        for b in [0.0, 0.05, 0.1579, 0.188, 0.4, 1.0] {
            let es = eigensystem(&spec(), b).unwrap();
            let full = eigh(&build_donor_hamiltonian(&spec(), b).unwrap());
            for (x, y) in es.energies.iter().zip(&full.values) {
                assert!((x - y).abs() < 1e-12 * spec().hyperfine * 10.0, "B={b}");
            }
            let u = es.states.adjoint() * &es.states - CMatrix::identity(20, 20);
            assert!(max_abs(&u) < 1e-10);
        }
    }

    #[test]
    fn numerical_gamma_matches_closed_form() {
        for b in [0.0, 0.01, 0.1, 0.1579, 0.2105, 0.263, 0.3, 0.6, 1.5] {
            let es = eigensystem(&spec(), b).unwrap();
            for l in &es.levels {
                let closed = spec().gamma(l.m, es.omega0);
                assert!((l.gamma - closed).abs() < 1e-10, "B={b} {l:?}");
                assert!((l.a * l.a + l.b * l.b - 1.0).abs() < 1e-10);
                assert!(l.gamma.abs() <= 1.0 + 1e-12);
                if l.m.abs() == 5 {
                    assert_eq!(l.gamma.abs(), 1.0);
                }
            }
        }
    }

    #[test]
    fn numerical_sz_matches_branch_convention() {
        let ops = DonorOperators::new(&spec()).unwrap();
        let es = eigensystem(&spec(), 0.32).unwrap();
        let sz = es.to_eigenbasis(&ops.sz);
        for (k, l) in es.levels.iter().enumerate() {
            assert!((sz[(k, k)].re - l.sz()).abs() < 1e-12);
        }
    }

    #[test]
    fn labels_twelve_and_nine() {
        let es = eigensystem(&spec(), 0.188).unwrap();
        let l12 = es.level(12).unwrap();
        let l9 = es.level(9).unwrap();
        assert_eq!((l12.m, l12.branch), (-3, Branch::Plus));
        assert_eq!((l9.m, l9.branch), (-4, Branch::Minus));
    }

    #[test]
    fn high_field_limit() {
        let es = eigensystem(&spec(), 200.0).unwrap();
        for l in &es.levels {
            assert!(l.gamma > 0.99, "{l:?}");
        }
    }

    #[test]
    fn finite_difference_matches_hellmann_feynman() {
        for b in [0.05, 0.188, 0.4] {
            let es = eigensystem(&spec(), b).unwrap();
            let fd = df_db(&spec(), 12, 9, b).unwrap();
            let hf = df_db_closed_form(&spec(), &es, 12, 9).unwrap();
            assert!((fd - hf).abs() < 1e-4 * hf.abs().max(1e6), "B={b} fd={fd} hf={hf}");
        }
    }

    #[test]
    fn step_halving_agrees() {
        for b in [0.1, 0.3, 0.5] {
            let d1 = df_db_step(&spec(), 12, 9, b, DFDB_STEP).unwrap();
            let d2 = df_db_step(&spec(), 12, 9, b, DFDB_STEP / 2.0).unwrap();
            assert!((d1 - d2).abs() < 1e-3 * d2.abs());
        }
    }

    #[test]
    fn transition_needs_distinct_levels() {
        assert!(transition_frequency(&spec(), 3, 3, 0.1).is_err());
        assert!(transition_frequency(&spec(), 0, 3, 0.1).is_err());
        assert!(transition_frequency(&spec(), 21, 3, 0.1).is_err());
    }
}
