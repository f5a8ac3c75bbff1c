//! Neuron states, glial fields, the covariant difference and gauge maps.
//!
//! Rows of φ are sites i = 0..n (periodic); columns are temporal steps. In
//! column-vector language the covariant difference is
//! (Δφ)ᵢ = (I + Gᵢ)φᵢ₊₁ − φᵢ, and under φᵢ → Oᵢφᵢ the connection transforms as
//! Gᵢ → OᵢGᵢOᵢ₊₁ᵀ − (Oᵢ₊₁ − Oᵢ)Oᵢ₊₁ᵀ, which gives Δ → ÔΔÔᵀ exactly.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::GlianetError;
use crate::numerics::{expm, rng::unit_sphere};

/// Largest n·N for which the assembled operator is exponentiated.
pub const MAX_FULL_DIMENSION: usize = 4096;

const NORM_TOLERANCE: f64 = 1e-12;
const ALGEBRA_TOLERANCE: f64 = 1e-12;
const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NeuralState {
    phi: DMatrix<f64>,
}

impl NeuralState {
    /// Frobenius-unit n×N state.
    pub fn new(phi: DMatrix<f64>) -> Result<Self, GlianetError> {
        let norm = phi.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(GlianetError::NotNormalized(norm));
        }
        Ok(Self { phi })
    }

    pub fn normalized(phi: DMatrix<f64>) -> Result<Self, GlianetError> {
        let norm = phi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(GlianetError::NotNormalized(norm));
        }
        Ok(Self { phi: phi / norm })
    }

    /// Uniform on the unit sphere in n·N dimensions.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, big_n: usize) -> Self {
        let v = unit_sphere(rng, n * big_n);
        Self {
            phi: DMatrix::from_row_slice(n, big_n, &v),
        }
    }

    pub fn sites(&self) -> usize {
        self.phi.nrows()
    }

    pub fn steps(&self) -> usize {
        self.phi.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// Site-major flattening, index i·N + k.
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.phi.len(), self.phi.transpose().iter().copied())
    }

    /// Elementwise sign, +1 for a spike (ties to +1).
    pub fn spikes(&self) -> DMatrix<i8> {
        self.phi.map(|x| if x >= 0.0 { 1 } else { -1 })
    }
}

/// Site-indexed glial connections Gᵢ.
#[derive(Debug, Clone, PartialEq)]
pub struct GlialField {
    g: Vec<DMatrix<f64>>,
}

impl GlialField {
    /// Checks that each Gᵢ is square and antisymmetric.
    pub fn new(g: Vec<DMatrix<f64>>) -> Result<Self, GlianetError> {
        let field = Self::general(g)?;
        for (site, m) in field.g.iter().enumerate() {
            let defect = (m + m.transpose()).amax();
            if defect > ALGEBRA_TOLERANCE * m.amax().max(1.0) {
                return Err(GlianetError::NotAntisymmetric { site, defect });
            }
        }
        Ok(field)
    }

    /// Any square matrices of a common size; gauge images land here.
    pub fn general(g: Vec<DMatrix<f64>>) -> Result<Self, GlianetError> {
        let big_n = g.first().map(|m| m.nrows()).unwrap_or(0);
        if g.is_empty() || g.iter().any(|m| m.nrows() != big_n || m.ncols() != big_n) {
            return Err(GlianetError::ShapeMismatch(
                "glial field needs at least one site of common square matrices".into(),
            ));
        }
        Ok(Self { g })
    }

    pub fn zeros(n: usize, big_n: usize) -> Self {
        Self {
            g: vec![DMatrix::zeros(big_n, big_n); n],
        }
    }

    /// The same G at every site.
    pub fn replicated(g: &DMatrix<f64>, n: usize) -> Result<Self, GlianetError> {
        Self::new(vec![g.clone(); n])
    }

    /// Independent antisymmetric Gᵢ with upper entries N(0, scale²).
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, big_n: usize, scale: f64) -> Self {
        Self {
            g: (0..n).map(|_| random_antisymmetric(rng, big_n, scale)).collect(),
        }
    }

    pub fn sites(&self) -> usize {
        self.g.len()
    }

    pub fn dimension(&self) -> usize {
        self.g[0].nrows()
    }

    pub fn site(&self, i: usize) -> &DMatrix<f64> {
        &self.g[i]
    }

    /// Largest |Gᵢ + Gᵢᵀ| entry over sites; zero for an o(N)-valued field.
    pub fn antisymmetry_defect(&self) -> f64 {
        self.g.iter().map(|m| (m + m.transpose()).amax()).fold(0.0, f64::max)
    }
}

pub(crate) fn random_antisymmetric<R: Rng + ?Sized>(rng: &mut R, big_n: usize, scale: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(big_n, big_n);
    for a in 0..big_n {
        for b in a + 1..big_n {
            let x: f64 = StandardNormal.sample(rng);
            m[(a, b)] = scale * x;
            m[(b, a)] = -scale * x;
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTransformation {
    o: Vec<DMatrix<f64>>,
}

impl GaugeTransformation {
    pub fn new(o: Vec<DMatrix<f64>>) -> Result<Self, GlianetError> {
        let big_n = o.first().map(|m| m.nrows()).unwrap_or(0);
        if o.is_empty() || o.iter().any(|m| m.nrows() != big_n || m.ncols() != big_n) {
            return Err(GlianetError::ShapeMismatch(
                "gauge transformation needs at least one site of common square matrices".into(),
            ));
        }
        let identity = DMatrix::<f64>::identity(big_n, big_n);
        for (site, m) in o.iter().enumerate() {
            let defect = (m * m.transpose() - &identity).amax();
            if defect > ORTHOGONALITY_TOLERANCE {
                return Err(GlianetError::NotOrthogonal { site, defect });
            }
        }
        Ok(Self { o })
    }

    pub fn identity(n: usize, big_n: usize) -> Self {
        Self {
            o: vec![DMatrix::identity(big_n, big_n); n],
        }
    }

    /// Haar-distributed Oᵢ from the QR factorization of Gaussian matrices.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, big_n: usize) -> Self {
        let o = (0..n)
            .map(|_| {
                let a = DMatrix::from_fn(big_n, big_n, |_, _| StandardNormal.sample(rng));
                let qr = a.qr();
                let r = qr.r();
                let mut q = qr.q();
                for (j, mut col) in q.column_iter_mut().enumerate() {
                    if r[(j, j)] < 0.0 {
                        col.neg_mut();
                    }
                }
                q
            })
            .collect();
        Self { o }
    }

    pub fn sites(&self) -> usize {
        self.o.len()
    }

    pub fn site(&self, i: usize) -> &DMatrix<f64> {
        &self.o[i]
    }

    /// Block-diagonal Ô = diag(O₀, …, O_{n−1}) on the flattened state.
    pub fn block_operator(&self) -> DMatrix<f64> {
        let big_n = self.o[0].nrows();
        let dim = self.o.len() * big_n;
        let mut out = DMatrix::zeros(dim, dim);
        for (i, m) in self.o.iter().enumerate() {
            out.view_mut((i * big_n, i * big_n), (big_n, big_n)).copy_from(m);
        }
        out
    }
}

fn check_shapes(phi: &NeuralState, g: &GlialField) -> Result<(), GlianetError> {
    if phi.sites() != g.sites() || phi.steps() != g.dimension() {
        return Err(GlianetError::ShapeMismatch(format!(
            "state is {}x{} but the glial field has {} sites of size {}",
            phi.sites(),
            phi.steps(),
            g.sites(),
            g.dimension()
        )));
    }
    Ok(())
}

/// Row form of (Δφ)ᵢ = φᵢ₊₁ + φᵢ₊₁Gᵢᵀ − φᵢ with periodic site index.
pub fn covariant_difference(phi: &NeuralState, g: &GlialField) -> Result<DMatrix<f64>, GlianetError> {
    check_shapes(phi, g)?;
    let n = phi.sites();
    let m = phi.matrix();
    let mut out = DMatrix::zeros(n, phi.steps());
    for i in 0..n {
        let next = m.row((i + 1) % n);
        let row = next + next * g.site(i).transpose() - m.row(i);
        out.set_row(i, &row);
    }
    Ok(out)
}

/// Δ as an (nN)×(nN) operator on the site-major flattened state.
pub fn assemble_delta(g: &GlialField) -> DMatrix<f64> {
    let n = g.sites();
    let big_n = g.dimension();
    let mut delta = DMatrix::zeros(n * big_n, n * big_n);
    for i in 0..n {
        let j = (i + 1) % n;
        let mut block = delta.view_mut((i * big_n, j * big_n), (big_n, big_n));
        block += g.site(i);
        for k in 0..big_n {
            delta[(i * big_n + k, j * big_n + k)] += 1.0;
            delta[(i * big_n + k, i * big_n + k)] -= 1.0;
        }
    }
    delta
}

/// exp(Δ) by scaling and squaring.
pub fn exp_delta(g: &GlialField) -> Result<DMatrix<f64>, GlianetError> {
    let dim = g.sites() * g.dimension();
    if dim > MAX_FULL_DIMENSION {
        return Err(GlianetError::TooLarge(dim));
    }
    Ok(expm(&assemble_delta(g))?)
}

/// ℋ_int = −(1/2N)·⟨⟨φ, exp(Δ)φ⟩⟩ + ℋ₀.
pub fn hamiltonian_full(phi: &NeuralState, g: &GlialField, h0: f64) -> Result<f64, GlianetError> {
    check_shapes(phi, g)?;
    let e = exp_delta(g)?;
    let v = phi.to_vector();
    Ok(-v.dot(&(e * &v)) / (2.0 * phi.steps() as f64) + h0)
}

/// φᵢ → φᵢOᵢᵀ, Gᵢ → OᵢGᵢOᵢ₊₁ᵀ − (Oᵢ₊₁ − Oᵢ)Oᵢ₊₁ᵀ. The image of an o(N) field
/// is generally not antisymmetric, so the field comes back as `general`.
pub fn gauge_transform(
    phi: &NeuralState,
    g: &GlialField,
    o: &GaugeTransformation,
) -> Result<(NeuralState, GlialField), GlianetError> {
    check_shapes(phi, g)?;
    if o.sites() != g.sites() || o.site(0).nrows() != g.dimension() {
        return Err(GlianetError::ShapeMismatch(format!(
            "gauge transformation has {} sites of size {}, expected {} of size {}",
            o.sites(),
            o.site(0).nrows(),
            g.sites(),
            g.dimension()
        )));
    }
    let n = phi.sites();
    let m = phi.matrix();
    let mut rotated = DMatrix::zeros(n, phi.steps());
    for i in 0..n {
        rotated.set_row(i, &(m.row(i) * o.site(i).transpose()));
    }
    let transformed = (0..n)
        .map(|i| {
            let next = o.site((i + 1) % n);
            let next_t = next.transpose();
            o.site(i) * g.site(i) * &next_t - (next - o.site(i)) * &next_t
        })
        .collect();
    Ok((NeuralState { phi: rotated }, GlialField::general(transformed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::stream;
    use nalgebra::{Complex, SymmetricEigen};

    fn reference_exp_normal(m: &DMatrix<f64>) -> DMatrix<f64> {
        // exp(S + K) = exp(S)·exp(K) when the parts commute (M normal).
        let s = (m + m.transpose()) * 0.5;
        let k = (m - m.transpose()) * 0.5;
        let es = SymmetricEigen::new(s);
        let exp_s = &es.eigenvectors
            * DMatrix::from_diagonal(&es.eigenvalues.map(f64::exp))
            * es.eigenvectors.transpose();
        let ik = k.map(|x| Complex::new(0.0, x));
        let ek = SymmetricEigen::new(ik);
        let phases = ek.eigenvalues.map(|l| Complex::new(0.0, -l).exp());
        let exp_k = &ek.eigenvectors * DMatrix::from_diagonal(&phases) * ek.eigenvectors.adjoint();
        exp_s * exp_k.map(|z| z.re)
    }

    #[test]
    fn constant_rows_have_zero_difference() {
        let phi = NeuralState::normalized(DMatrix::from_element(3, 4, 1.0)).unwrap();
        let d = covariant_difference(&phi, &GlialField::zeros(3, 4)).unwrap();
        assert_eq!(d, DMatrix::zeros(3, 4));
    }

    #[test]
    fn periodic_forward_difference_example() {
        let r = 0.5f64.sqrt();
        let phi = NeuralState::new(DMatrix::from_row_slice(2, 2, &[r, 0.0, 0.0, r])).unwrap();
        let d = covariant_difference(&phi, &GlialField::zeros(2, 2)).unwrap();
        assert_eq!(d, DMatrix::from_row_slice(2, 2, &[-r, r, r, -r]));
    }

    #[test]
    fn assembled_operator_matches_difference() {
        let mut rng = stream(3, 0);
        let phi = NeuralState::random(&mut rng, 3, 5);
        let g = GlialField::random(&mut rng, 3, 5, 0.7);
        let d = covariant_difference(&phi, &g).unwrap();
        let flat = assemble_delta(&g) * phi.to_vector();
        for i in 0..3 {
            for k in 0..5 {
                assert!((d[(i, k)] - flat[i * 5 + k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_site_zero_field_energy() {
        let mut rng = stream(5, 0);
        let phi = NeuralState::random(&mut rng, 1, 6);
        let e = hamiltonian_full(&phi, &GlialField::zeros(1, 6), 0.25).unwrap();
        assert!((e - (-1.0 / 12.0 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn seeded_energy_is_bit_reproducible() {
        let run = || {
            let mut rng = stream(42, 0);
            let phi = NeuralState::random(&mut rng, 4, 4);
            let g = GlialField::random(&mut rng, 4, 4, 0.5);
            hamiltonian_full(&phi, &g, 0.0).unwrap()
        };
        let (a, b) = (run(), run());
        assert!(a.is_finite());
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn offset_is_additive() {
        let mut rng = stream(9, 0);
        let phi = NeuralState::random(&mut rng, 2, 3);
        let g = GlialField::random(&mut rng, 2, 3, 1.0);
        let a = hamiltonian_full(&phi, &g, 0.0).unwrap();
        let b = hamiltonian_full(&phi, &g, 0.75).unwrap();
        assert!((b - a - 0.75).abs() < 1e-15);
    }

    #[test]
    fn guard_rejects_large_operators() {
        let g = GlialField::zeros(65, 64);
        assert!(matches!(exp_delta(&g), Err(GlianetError::TooLarge(4160))));
    }

    #[test]
    fn identity_gauge_is_exact() {
        let mut rng = stream(11, 0);
        let phi = NeuralState::random(&mut rng, 4, 4);
        let g = GlialField::random(&mut rng, 4, 4, 0.5);
        let (p2, g2) = gauge_transform(&phi, &g, &GaugeTransformation::identity(4, 4)).unwrap();
        assert_eq!(p2, phi);
        assert_eq!(g2, g);
    }

    #[test]
    fn covariance_and_invariance() {
        let mut rng = stream(12, 0);
        let phi = NeuralState::random(&mut rng, 4, 4);
        let g = GlialField::random(&mut rng, 4, 4, 0.5);
        let o = GaugeTransformation::random(&mut rng, 4, 4);
        let (p2, g2) = gauge_transform(&phi, &g, &o).unwrap();
        assert!((p2.matrix().norm() - 1.0).abs() < 1e-12);
        let big_o = o.block_operator();
        let expected = &big_o * assemble_delta(&g) * big_o.transpose();
        assert!((assemble_delta(&g2) - expected).amax() < 1e-12);
        let h = hamiltonian_full(&phi, &g, 0.0).unwrap();
        let h2 = hamiltonian_full(&p2, &g2, 0.0).unwrap();
        assert!(((h2 - h) / h).abs() < 1e-10);
        assert!(g2.antisymmetry_defect() > 1e-3);
    }

    #[test]
    fn matrix_exponential_agrees_with_eigen_path() {
        let mut rng = stream(13, 0);
        // Site-independent fields and single sites give normal Δ.
        for (n, big_n) in [(1, 6), (3, 4), (4, 3)] {
            let g0 = random_antisymmetric(&mut rng, big_n, 0.8);
            let g = GlialField::replicated(&g0, n).unwrap();
            let delta = assemble_delta(&g);
            let normal_defect = (&delta * delta.transpose() - delta.transpose() * &delta).amax();
            assert!(normal_defect < 1e-12);
            let diff = (exp_delta(&g).unwrap() - reference_exp_normal(&delta)).amax();
            assert!(diff < 1e-10, "n={n} N={big_n}: {diff}");
        }
    }

    #[test]
    fn validation() {
        assert!(NeuralState::new(DMatrix::from_element(2, 2, 1.0)).is_err());
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(GlialField::new(vec![bad.clone()]), Err(GlianetError::NotAntisymmetric { .. })));
        assert!(matches!(
            GaugeTransformation::new(vec![bad * 2.0]),
            Err(GlianetError::NotOrthogonal { .. })
        ));
        let phi = NeuralState::normalized(DMatrix::from_element(2, 3, 1.0)).unwrap();
        assert!(covariant_difference(&phi, &GlialField::zeros(2, 4)).is_err());
        assert!(hamiltonian_full(&phi, &GlialField::zeros(3, 3), 0.0).is_err());
    }
}
