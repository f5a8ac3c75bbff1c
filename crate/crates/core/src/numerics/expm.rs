//! Matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! Degree selection and scaling follow Higham (2005): the smallest degree
//! m ∈ {3, 5, 7, 9, 13} whose backward-error bound θ_m exceeds ‖A‖₁ is used;
//! otherwise A is scaled by 2^{-s} so that ‖A/2^s‖₁ ≤ θ₁₃ and the Padé(13)
//! result is squared s times.

use nalgebra::{ComplexField, DMatrix};

use super::NumericsError;

const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
    (13, 5.371_920_351_148_152),
];

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const PADE9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Maximum absolute column sum.
pub fn one_norm<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>, s: f64) -> DMatrix<T> {
    a.map(|x| x * T::from_real(s))
}

fn axpy_identity<T: ComplexField<RealField = f64> + Copy>(m: &mut DMatrix<T>, c: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += T::from_real(c);
    }
}

/// Odd/even parts (U, V) of the low-degree Padé approximant, m ∈ {3,5,7,9}.
fn pade_low<T: ComplexField<RealField = f64> + Copy>(
    a: &DMatrix<T>,
    coeffs: &[f64],
) -> (DMatrix<T>, DMatrix<T>) {
    let n = a.nrows();
    let a2 = a * a;
    let degree = coeffs.len() - 1;
    let mut powers = vec![DMatrix::<T>::identity(n, n), a2.clone()];
    while 2 * (powers.len() - 1) < degree {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut odd = DMatrix::<T>::zeros(n, n);
    let mut even = DMatrix::<T>::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k < degree {
            odd += scaled(p, coeffs[2 * k + 1]);
        }
        if 2 * k <= degree {
            even += scaled(p, coeffs[2 * k]);
        }
    }
    (a * odd, even)
}

fn pade13<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let mut outer_u = &a6 * inner_u + scaled(&a6, b[7]) + scaled(&a4, b[5]) + scaled(&a2, b[3]);
    axpy_identity(&mut outer_u, b[1]);
    let u = a * outer_u;
    let inner_v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let mut v = &a6 * inner_v + scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]);
    axpy_identity(&mut v, b[0]);
    (u, v)
}

/// Computes exp(A) for a real or complex square matrix.
pub fn expm<T: ComplexField<RealField = f64> + Copy>(
    a: &DMatrix<T>,
) -> Result<DMatrix<T>, NumericsError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(NumericsError::InvalidInput(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(NumericsError::NonFinite("matrix exponential input".into()));
    }

    let mut squarings = 0u32;
    let (u, v) = if let Some(&(m, _)) = THETA[..4].iter().find(|(_, theta)| norm <= *theta) {
        let coeffs: &[f64] = match m {
            3 => &PADE3,
            5 => &PADE5,
            7 => &PADE7,
            _ => &PADE9,
        };
        pade_low(a, coeffs)
    } else {
        let theta13 = THETA[4].1;
        if norm > theta13 {
            squarings = (norm / theta13).log2().ceil().max(0.0) as u32;
        }
        let scaled_a = scaled(a, 0.5f64.powi(squarings as i32));
        pade13(&scaled_a)
    };

    let numerator = &v + &u;
    let denominator = v - u;
    let mut result = denominator
        .lu()
        .solve(&numerator)
        .ok_or_else(|| NumericsError::Singular("Padé denominator".into()))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|x| !x.modulus().is_finite()) {
        return Err(NumericsError::NonFinite("matrix exponential result".into()));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn max_abs_diff<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
        (a - b).iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_gives_identity() {
        let z = DMatrix::<f64>::zeros(5, 5);
        assert_eq!(expm(&z).unwrap(), DMatrix::identity(5, 5));
    }

    #[test]
    fn rotation_generator_closed_form() {
        // Every Padé branch: tiny, medium, large angles.
        for theta in [1e-3f64, 0.2, 0.9, 2.0, 5.0, 40.0] {
            let g = DMatrix::from_row_slice(2, 2, &[0.0, theta, -theta, 0.0]);
            let e = expm(&g).unwrap();
            let expected =
                DMatrix::from_row_slice(2, 2, &[theta.cos(), theta.sin(), -theta.sin(), theta.cos()]);
            assert!(max_abs_diff(&e, &expected) < 1e-13 * theta.max(1.0), "theta={theta}");
        }
    }

    #[test]
    fn diagonal_complex_phases() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.0, -3.0),
            Complex64::new(0.0, 1.5),
            Complex64::new(-0.25, 0.0),
        ]));
        let e = expm(&h).unwrap();
        for i in 0..3 {
            assert!((e[(i, i)] - h[(i, i)].exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn nilpotent_jordan_block() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 7.0, 0.0, 0.0, 0.0, 7.0, 0.0, 0.0, 0.0]);
        let e = expm(&a).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 7.0, 24.5, 0.0, 1.0, 7.0, 0.0, 0.0, 1.0]);
        assert!(max_abs_diff(&e, &expected) < 1e-12);
    }

    #[test]
    fn non_square_rejected() {
        assert!(expm(&DMatrix::<f64>::zeros(2, 3)).is_err());
    }
}
