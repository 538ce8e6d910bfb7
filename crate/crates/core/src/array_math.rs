//! Steering-vector and beam-pattern primitives.
//!
//! The array response of an `n`-element uniform array along spatial
//! direction `phi` is `u(phi, n)[k] = exp(-j*pi*k*phi)`, a periodic
//! function of `phi` with period 2. All directions are therefore wrapped
//! into `[-1, 1)`, and every module in this crate uses this one sign
//! convention: beam gains conjugate the steering vector, `A = |u^H w|`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An effective spatial direction, wrapped modulo 2 into `[-1, 1)`.
///
/// The underlying value is the per-element phase progression in units of
/// pi radians; it maps one-to-one onto physical angle given the element
/// spacing.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpatialDirection(f64);

impl SpatialDirection {
    /// Wrap an arbitrary finite real into `[-1, 1)`.
    pub fn new(raw: f64) -> Result<Self> {
        if !raw.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "spatial direction must be finite, got {raw}"
            )));
        }
        let mut v = (raw + 1.0).rem_euclid(2.0) - 1.0;
        // rem_euclid can return exactly 2.0 - eps rounding up to 2.0 only
        // for inputs at the representability edge; clamp the open endpoint.
        if v >= 1.0 {
            v = -1.0;
        }
        Ok(SpatialDirection(v))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Wrap a raw spatial direction modulo 2 into `[-1, 1)`.
///
/// `steering_vector(wrap_direction(x), n)` equals `steering_vector(x, n)`
/// for every `n` because the steering vector has period 2 in `phi`.
pub fn wrap_direction(raw: f64) -> Result<SpatialDirection> {
    SpatialDirection::new(raw)
}

/// Steering vector `u(phi, n)` with element `k = exp(-j*pi*k*phi)`.
///
/// `phi` may be raw (unwrapped); periodicity makes the result identical
/// to the wrapped direction's.
pub fn steering_vector(phi: f64, n: usize) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    if !phi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "steering direction must be finite, got {phi}"
        )));
    }
    Ok((0..n)
        .map(|k| Complex64::cis(-std::f64::consts::PI * k as f64 * phi))
        .collect())
}

/// A unit-modulus vector of per-element IRS reflection coefficients.
///
/// Reflection amplitude is fixed to one, so a codeword is fully described
/// by its per-element phases.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword(Vec<Complex64>);

impl Codeword {
    /// Modulus tolerance for accepting externally supplied coefficients.
    pub const UNIT_MODULUS_TOL: f64 = 1e-12;

    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (k, c) in coefficients.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "codeword element {k} is not finite"
                )));
            }
            if (c.norm() - 1.0).abs() > Self::UNIT_MODULUS_TOL {
                return Err(Error::InvalidArgument(format!(
                    "codeword element {k} has modulus {} (must be 1)",
                    c.norm()
                )));
            }
        }
        Ok(Codeword(coefficients))
    }

    /// Internal constructor for coefficients that are unit-modulus by
    /// construction (`exp(j*theta)` entries or slices thereof).
    pub(crate) fn from_unit_entries(coefficients: Vec<Complex64>) -> Self {
        debug_assert!(!coefficients.is_empty());
        debug_assert!(coefficients
            .iter()
            .all(|c| (c.norm() - 1.0).abs() <= 1e-9));
        Codeword(coefficients)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Deref for Codeword {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// Inner product `u^H(phi, len(w)) w` of the steering vector along `phi`
/// with an arbitrary coefficient vector.
pub fn steered_response(w: &[Complex64], phi: f64) -> Complex64 {
    let pi = std::f64::consts::PI;
    w.iter()
        .enumerate()
        .map(|(k, c)| Complex64::cis(pi * k as f64 * phi) * c)
        .sum()
}

/// Beam gain `A(w, phi) = |u^H(phi, len(w)) w|`.
///
/// Bounded by `len(w)`, with equality exactly when `w` is a steering
/// vector along `phi` up to a global phase.
pub fn beam_gain(w: &[Complex64], phi: f64) -> f64 {
    steered_response(w, phi).norm()
}

/// Kronecker product; `result[i*len(b)+j] = a[i]*b[j]`.
pub fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Elementwise (Hadamard) product of two equal-length vectors.
pub fn hadamard(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "hadamard product needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| x * y).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!(
            (a - b).norm() <= tol,
            "expected {b}, got {a} (|diff| = {})",
            (a - b).norm()
        );
    }

    #[test]
    fn steering_vector_zero_phase() {
        let u = steering_vector(0.0, 4).unwrap();
        for c in u {
            assert_close(c, Complex64::new(1.0, 0.0), 1e-15);
        }
    }

    #[test]
    fn steering_vector_alternating() {
        let u = steering_vector(1.0, 2).unwrap();
        assert_close(u[0], Complex64::new(1.0, 0.0), 1e-15);
        assert_close(u[1], Complex64::new(-1.0, 0.0), 1e-15);
    }

    #[test]
    fn steering_vector_period_two() {
        let a = steering_vector(0.3, 8).unwrap();
        let b = steering_vector(2.3, 8).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_close(*x, *y, 1e-12);
        }
    }

    #[test]
    fn steering_vector_rejects_zero_size() {
        assert!(matches!(steering_vector(0.1, 0), Err(Error::EmptyVector)));
    }

    #[test]
    fn wrap_examples() {
        assert!((wrap_direction(1.5).unwrap().value() - (-0.5)).abs() < 1e-15);
        assert!((wrap_direction(-1.2).unwrap().value() - 0.8).abs() < 1e-15);
        assert_eq!(wrap_direction(0.0).unwrap().value(), 0.0);
        assert_eq!(wrap_direction(1.0).unwrap().value(), -1.0);
        assert!(wrap_direction(f64::NAN).is_err());
        assert!(wrap_direction(f64::INFINITY).is_err());
    }

    #[test]
    fn wrap_preserves_steering_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let raw: f64 = rng.gen_range(-7.0..7.0);
            let wrapped = wrap_direction(raw).unwrap().value();
            assert!((-1.0..1.0).contains(&wrapped));
            // raw and wrapped differ by an even integer
            let d = (raw - wrapped) / 2.0;
            assert!((d - d.round()).abs() < 1e-12);
            let a = steering_vector(raw, 16).unwrap();
            let b = steering_vector(wrapped, 16).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_close(*x, *y, 1e-10);
            }
        }
    }

    #[test]
    fn periodicity_many_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let phi: f64 = rng.gen_range(-3.0..3.0);
            let n = rng.gen_range(1..=512);
            let a = steering_vector(phi, n).unwrap();
            let b = steering_vector(phi + 2.0, n).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_close(*x, *y, 1e-12);
            }
        }
    }

    #[test]
    fn beam_gain_aligned_all_ones() {
        let w = Codeword::new(vec![Complex64::new(1.0, 0.0); 4]).unwrap();
        assert!((beam_gain(&w, 0.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn beam_gain_bounded_by_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let n = rng.gen_range(1..=64);
            let w: Vec<Complex64> = (0..n)
                .map(|_| Complex64::cis(rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            let phi: f64 = rng.gen_range(-1.0..1.0);
            assert!(beam_gain(&w, phi) <= n as f64 + 1e-9);
            // equality at a matched steering vector with a global phase
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let matched: Vec<Complex64> = steering_vector(phi, n)
                .unwrap()
                .into_iter()
                .map(|c| c * Complex64::cis(theta))
                .collect();
            assert!((beam_gain(&matched, phi) - n as f64).abs() < 1e-9 * n as f64);
        }
    }

    #[test]
    fn kron_identity_factor() {
        let a = [Complex64::new(1.0, 0.0)];
        let b = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert_eq!(kron(&a, &b), b.to_vec());
    }

    #[test]
    fn kron_by_definition() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let out = kron(&[one, i], &[one, one]);
        assert_eq!(out, vec![one, one, i, i]);
    }

    #[test]
    fn kron_matches_planar_response() {
        // u(phi_a, 2) (x) u(phi_b, 3) enumerates the 2x3 planar response
        // row-major: element (r, c) = exp(-j*pi*(r*phi_a + c*phi_b)).
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let phi_a: f64 = rng.gen_range(-1.0..1.0);
            let phi_b: f64 = rng.gen_range(-1.0..1.0);
            let k = kron(
                &steering_vector(phi_a, 2).unwrap(),
                &steering_vector(phi_b, 3).unwrap(),
            );
            for r in 0..2 {
                for c in 0..3 {
                    let expect = Complex64::cis(
                        -std::f64::consts::PI * (r as f64 * phi_a + c as f64 * phi_b),
                    );
                    assert_close(k[r * 3 + c], expect, 1e-12);
                }
            }
        }
    }

    #[test]
    fn hadamard_basics() {
        let one = Complex64::new(1.0, 0.0);
        let out = hadamard(&[one, one], &[one, -one]).unwrap();
        assert_eq!(out, vec![one, -one]);
        assert!(hadamard(&[one], &[one, one]).is_err());
    }

    #[test]
    fn hadamard_adds_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p1: f64 = rng.gen_range(-1.0..1.0);
            let p2: f64 = rng.gen_range(-1.0..1.0);
            let n = rng.gen_range(1..=32);
            let prod = hadamard(
                &steering_vector(p1, n).unwrap(),
                &steering_vector(p2, n).unwrap(),
            )
            .unwrap();
            let sum = steering_vector(p1 + p2, n).unwrap();
            for (x, y) in prod.iter().zip(&sum) {
                assert_close(*x, *y, 1e-12);
            }
        }
    }

    #[test]
    fn conjugated_hadamard_is_direction_difference() {
        // conj(u(pt, n)) .* u(pr, n) = conj(u(pt - pr, n))
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let pt: f64 = rng.gen_range(-1.0..1.0);
            let pr: f64 = rng.gen_range(-1.0..1.0);
            let n = rng.gen_range(1..=64);
            let ut: Vec<Complex64> = steering_vector(pt, n)
                .unwrap()
                .iter()
                .map(|c| c.conj())
                .collect();
            let ur = steering_vector(pr, n).unwrap();
            let prod = hadamard(&ut, &ur).unwrap();
            let diff = steering_vector(pt - pr, n).unwrap();
            for (x, y) in prod.iter().zip(&diff) {
                assert_close(*x, y.conj(), 1e-12);
            }
        }
    }

    #[test]
    fn decoupling_identity_random_instances() {
        // (u(p, nx) (x) u(c, nz))^H (vx (x) vz)
        //   = (u^H(wrap(p), nx) vx) * (u^H(wrap(c), nz) vz)
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let p: f64 = rng.gen_range(-2.0..2.0);
            let c: f64 = rng.gen_range(-2.0..2.0);
            let nx = rng.gen_range(1..=64);
            let nz = rng.gen_range(1..=64);
            let vx: Vec<Complex64> = (0..nx)
                .map(|_| Complex64::cis(rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            let vz: Vec<Complex64> = (0..nz)
                .map(|_| Complex64::cis(rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();

            let left_vec = kron(&steering_vector(p, nx).unwrap(), &steering_vector(c, nz).unwrap());
            let v = kron(&vx, &vz);
            let left: Complex64 = left_vec
                .iter()
                .zip(&v)
                .map(|(a, b)| a.conj() * b)
                .sum();

            let px = wrap_direction(p).unwrap().value();
            let cz = wrap_direction(c).unwrap().value();
            let right = steered_response(&vx, px) * steered_response(&vz, cz);
            assert_close(left, right, 1e-10);
        }
    }

    #[test]
    fn cascaded_response_factorizes() {
        // conj(b_t) .* a_r = conj(u(pt-pr, nx) (x) u(st-sr, nz))
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let (pt, pr, st, sr): (f64, f64, f64, f64) = (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let nx = rng.gen_range(1..=32);
            let nz = rng.gen_range(1..=32);
            let b_t = kron(&steering_vector(pt, nx).unwrap(), &steering_vector(st, nz).unwrap());
            let a_r = kron(&steering_vector(pr, nx).unwrap(), &steering_vector(sr, nz).unwrap());
            let b_conj: Vec<Complex64> = b_t.iter().map(|c| c.conj()).collect();
            let cascade = hadamard(&b_conj, &a_r).unwrap();
            let expect = kron(
                &steering_vector(pt - pr, nx).unwrap(),
                &steering_vector(st - sr, nz).unwrap(),
            );
            for (x, y) in cascade.iter().zip(&expect) {
                assert_close(*x, y.conj(), 1e-10);
            }
        }
    }

    #[test]
    fn codeword_validation() {
        assert!(Codeword::new(vec![]).is_err());
        assert!(Codeword::new(vec![Complex64::new(0.5, 0.0)]).is_err());
        assert!(Codeword::new(vec![Complex64::new(f64::NAN, 0.0)]).is_err());
        let w = Codeword::new(steering_vector(0.37, 8).unwrap()).unwrap();
        assert_eq!(w.len(), 8);
    }
}
