//! Single-beam and sub-array codebook construction.
//!
//! The spatial domain `[-1, 1)` is split into `J = n_x` sectors with
//! central directions `alpha(j) = -1 + (2j - 1)/n_x`. The full-array
//! codeword for sector `j` is the steering vector along `alpha(j)`;
//! sub-array codewords are contiguous slices of it, so that steering all
//! sub-arrays at the same `j` reproduces the full-array codeword exactly.
//! Direction indices `j` and sub-array indices `m` are 1-based throughout
//! the public surface.

use std::fmt::Write as _;

use crate::array_math::{steering_vector, Codeword, SpatialDirection};
use crate::error::{Error, Result};

/// Horizontal array partition: `n_x` elements split into `m` sub-arrays
/// of `l = n_x / m` adjacent elements each.
///
/// `m` must be a power of two and `l` even; `m = 1` is the degenerate
/// single-beam case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodebookGeometry {
    n_x: usize,
    m: usize,
    l: usize,
}

impl CodebookGeometry {
    pub fn new(n_x: usize, m: usize) -> Result<Self> {
        if n_x < 2 {
            return Err(Error::InvalidGeometry(format!(
                "need at least 2 horizontal elements, got {n_x}"
            )));
        }
        if m == 0 || !m.is_power_of_two() {
            return Err(Error::InvalidGeometry(format!(
                "sub-array count must be a power of two, got {m}"
            )));
        }
        if n_x % m != 0 {
            return Err(Error::InvalidGeometry(format!(
                "sub-array count {m} does not divide {n_x} elements"
            )));
        }
        let l = n_x / m;
        if l % 2 != 0 {
            return Err(Error::InvalidGeometry(format!(
                "sub-array length must be even, got {l} ({n_x} elements / {m} sub-arrays)"
            )));
        }
        Ok(CodebookGeometry { n_x, m, l })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    /// Number of sub-arrays `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Elements per sub-array `L = n_x / M`.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Number of sampled directions `J = n_x`.
    pub fn num_directions(&self) -> usize {
        self.n_x
    }

    /// Sweep rounds of the multi-beam schedule: `1 + log2(M)`.
    pub fn num_rounds(&self) -> usize {
        1 + self.m.trailing_zeros() as usize
    }
}

fn check_direction_index(j: usize, n_x: usize) -> Result<()> {
    if j == 0 || j > n_x {
        return Err(Error::IndexOutOfRange(format!(
            "direction index {j} outside 1..={n_x}"
        )));
    }
    Ok(())
}

/// Central direction `alpha(j) = -1 + (2j - 1)/n_x` of sector `j`.
pub fn center_direction(j: usize, n_x: usize) -> Result<SpatialDirection> {
    check_direction_index(j, n_x)?;
    SpatialDirection::new(-1.0 + (2 * j - 1) as f64 / n_x as f64)
}

/// Full-array codeword steering all `n_x` elements toward `alpha(j)`.
pub fn single_beam_codeword(j: usize, n_x: usize) -> Result<Codeword> {
    let alpha = center_direction(j, n_x)?;
    Ok(Codeword::from_unit_entries(steering_vector(
        alpha.value(),
        n_x,
    )?))
}

/// Codeword of sub-array `m_idx` steering its `L` elements toward
/// `alpha(j)`: the contiguous slice of the full-array codeword covering
/// elements `(m_idx-1)*L+1 ..= m_idx*L`.
pub fn subarray_codeword(m_idx: usize, j: usize, geo: &CodebookGeometry) -> Result<Codeword> {
    if m_idx == 0 || m_idx > geo.m {
        return Err(Error::IndexOutOfRange(format!(
            "sub-array index {m_idx} outside 1..={}",
            geo.m
        )));
    }
    let full = single_beam_codeword(j, geo.n_x)?;
    let start = (m_idx - 1) * geo.l;
    Ok(Codeword::from_unit_entries(
        full[start..start + geo.l].to_vec(),
    ))
}

/// Composite multi-beam codeword: sub-array `m` steers
/// `direction_assignment[m-1]`, concatenated over all `M` sub-arrays.
pub fn composite_codeword(
    direction_assignment: &[usize],
    geo: &CodebookGeometry,
) -> Result<Codeword> {
    if direction_assignment.len() != geo.m {
        return Err(Error::InvalidArgument(format!(
            "assignment must list {} directions, got {}",
            geo.m,
            direction_assignment.len()
        )));
    }
    let mut coeffs = Vec::with_capacity(geo.n_x);
    for (idx, &j) in direction_assignment.iter().enumerate() {
        let sub = subarray_codeword(idx + 1, j, geo)?;
        coeffs.extend_from_slice(&sub);
    }
    Ok(Codeword::from_unit_entries(coeffs))
}

/// All `J = n_x` full-array codewords, precomputed once.
///
/// Composite codewords assembled through [`Codebook::composite`] copy
/// slices of these, keeping the arithmetic path identical to
/// [`single_beam_codeword`].
#[derive(Debug, Clone)]
pub struct Codebook {
    n_x: usize,
    words: Vec<Codeword>,
}

impl Codebook {
    pub fn new(n_x: usize) -> Result<Self> {
        if n_x < 2 {
            return Err(Error::InvalidGeometry(format!(
                "need at least 2 horizontal elements, got {n_x}"
            )));
        }
        let words = (1..=n_x)
            .map(|j| single_beam_codeword(j, n_x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Codebook { n_x, words })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    /// Full-array codeword for direction `j` (1-based).
    pub fn word(&self, j: usize) -> Result<&Codeword> {
        check_direction_index(j, self.n_x)?;
        Ok(&self.words[j - 1])
    }

    pub fn words(&self) -> &[Codeword] {
        &self.words
    }

    /// Composite codeword for a positional sub-array assignment.
    pub fn composite(&self, assignment: &[usize], geo: &CodebookGeometry) -> Result<Codeword> {
        if geo.n_x != self.n_x {
            return Err(Error::InvalidArgument(format!(
                "geometry is for {} elements, codebook for {}",
                geo.n_x, self.n_x
            )));
        }
        if assignment.len() != geo.m {
            return Err(Error::InvalidArgument(format!(
                "assignment must list {} directions, got {}",
                geo.m,
                assignment.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(self.n_x);
        for (idx, &j) in assignment.iter().enumerate() {
            check_direction_index(j, self.n_x)?;
            let start = idx * geo.l;
            coeffs.extend_from_slice(&self.words[j - 1][start..start + geo.l]);
        }
        Ok(Codeword::from_unit_entries(coeffs))
    }

    /// Debug listing: one line per codeword with `j`, `alpha(j)` and the
    /// per-element phases in turns (phase / pi).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate() {
            let alpha = center_direction(i + 1, self.n_x).expect("index in range");
            let _ = write!(out, "j={} alpha={:.6} phases/pi=", i + 1, alpha.value());
            for (k, c) in w.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:.4}", c.arg() / std::f64::consts::PI);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_math::beam_gain;
    use num_complex::Complex64;

    #[test]
    fn center_direction_values() {
        assert_eq!(
            center_direction(1, 32).unwrap().value(),
            -31.0 / 32.0
        );
        assert_eq!(center_direction(16, 32).unwrap().value(), -1.0 / 32.0);
        assert_eq!(center_direction(17, 32).unwrap().value(), 1.0 / 32.0);
        assert!(center_direction(0, 32).is_err());
        assert!(center_direction(33, 32).is_err());
    }

    #[test]
    fn center_directions_evenly_spaced() {
        for n_x in [8usize, 32, 160] {
            for j in 1..n_x {
                let a = center_direction(j, n_x).unwrap().value();
                let b = center_direction(j + 1, n_x).unwrap().value();
                assert!((b - a - 2.0 / n_x as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_beam_peak_gain() {
        for j in [1usize, 7, 16, 32] {
            let w = single_beam_codeword(j, 32).unwrap();
            let alpha = center_direction(j, 32).unwrap().value();
            assert!((beam_gain(&w, alpha) - 32.0).abs() < 1e-9);
            assert!((w[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn single_beam_nulls_at_main_lobe_edge() {
        // The main lobe has width 2/n_x: one full grid step away from the
        // peak the gain is an exact null.
        let n_x = 32;
        for j in [1usize, 5, 16, 32] {
            let w = single_beam_codeword(j, n_x).unwrap();
            let alpha = center_direction(j, n_x).unwrap().value();
            let step = 2.0 / n_x as f64;
            assert!(beam_gain(&w, alpha + step) < 1e-9);
            assert!(beam_gain(&w, alpha - step) < 1e-9);
        }
    }

    #[test]
    fn subarray_is_leading_slice() {
        let geo = CodebookGeometry::new(32, 4).unwrap();
        for j in [1usize, 9, 20] {
            let sub = subarray_codeword(1, j, &geo).unwrap();
            let alpha = center_direction(j, 32).unwrap().value();
            let direct = steering_vector(alpha, geo.l()).unwrap();
            for (a, b) in sub.iter().zip(&direct) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn subarray_concatenation_reproduces_full_codeword() {
        for (n_x, m) in [(32usize, 4usize), (160, 8)] {
            let geo = CodebookGeometry::new(n_x, m).unwrap();
            for j in 1..=n_x {
                let full = single_beam_codeword(j, n_x).unwrap();
                let mut cat = Vec::new();
                for m_idx in 1..=m {
                    cat.extend_from_slice(&subarray_codeword(m_idx, j, &geo).unwrap());
                }
                assert_eq!(cat, full.coefficients());
            }
        }
    }

    #[test]
    fn subarray_gain_is_subarray_length() {
        let geo = CodebookGeometry::new(32, 4).unwrap();
        for m_idx in 1..=4 {
            let alpha = center_direction(9, 32).unwrap().value();
            let sub = subarray_codeword(m_idx, 9, &geo).unwrap();
            assert!((beam_gain(&sub, alpha) - geo.l() as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn composite_uniform_equals_single_beam() {
        for (n_x, m) in [(32usize, 4usize), (32, 1), (160, 2)] {
            let geo = CodebookGeometry::new(n_x, m).unwrap();
            for j in 1..=n_x {
                let comp = composite_codeword(&vec![j; m], &geo).unwrap();
                let full = single_beam_codeword(j, n_x).unwrap();
                assert_eq!(comp.coefficients(), full.coefficients());
            }
        }
    }

    #[test]
    fn composite_multi_beam_has_four_lobes() {
        let geo = CodebookGeometry::new(32, 4).unwrap();
        let comp = composite_codeword(&[1, 9, 17, 25], &geo).unwrap();
        for j in [1usize, 9, 17, 25] {
            let alpha = center_direction(j, 32).unwrap().value();
            assert!(
                beam_gain(&comp, alpha) >= 6.0,
                "gain at alpha({j}) = {}",
                beam_gain(&comp, alpha)
            );
        }
    }

    #[test]
    fn composite_rejects_bad_assignments() {
        let geo = CodebookGeometry::new(32, 4).unwrap();
        assert!(composite_codeword(&[1, 2, 3], &geo).is_err());
        assert!(composite_codeword(&[1, 2, 3, 33], &geo).is_err());
    }

    #[test]
    fn codebook_matches_direct_construction() {
        let cb = Codebook::new(32).unwrap();
        let geo = CodebookGeometry::new(32, 4).unwrap();
        for j in 1..=32 {
            assert_eq!(
                cb.word(j).unwrap().coefficients(),
                single_beam_codeword(j, 32).unwrap().coefficients()
            );
        }
        let a = cb.composite(&[3, 11, 19, 27], &geo).unwrap();
        let b = composite_codeword(&[3, 11, 19, 27], &geo).unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
    }

    #[test]
    fn codebook_completeness_on_grid() {
        // For every on-grid direction the best codeword is its own.
        let cb = Codebook::new(32).unwrap();
        for j in 1..=32 {
            let alpha = center_direction(j, 32).unwrap().value();
            let best = (1..=32)
                .max_by(|&a, &b| {
                    beam_gain(cb.word(a).unwrap(), alpha)
                        .partial_cmp(&beam_gain(cb.word(b).unwrap(), alpha))
                        .unwrap()
                })
                .unwrap();
            assert_eq!(best, j);
        }
    }

    #[test]
    fn all_codewords_unit_modulus() {
        let cb = Codebook::new(160).unwrap();
        for w in cb.words() {
            for c in w.iter() {
                assert!((c.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn geometry_validation() {
        assert!(CodebookGeometry::new(32, 3).is_err()); // not a power of two
        assert!(CodebookGeometry::new(30, 2).is_err()); // l = 15, odd
        assert!(CodebookGeometry::new(32, 32).is_err()); // l = 1, odd
        assert!(CodebookGeometry::new(32, 64).is_err()); // m > n_x
        assert!(CodebookGeometry::new(1, 1).is_err());
        let geo = CodebookGeometry::new(32, 4).unwrap();
        assert_eq!((geo.n_x(), geo.m(), geo.l()), (32, 4, 8));
        assert_eq!(geo.num_rounds(), 3);
        let single = CodebookGeometry::new(32, 1).unwrap();
        assert_eq!(single.l(), 32);
        assert_eq!(single.num_rounds(), 1);
    }

    #[test]
    fn dump_lists_every_direction() {
        let cb = Codebook::new(8).unwrap();
        let text = cb.dump();
        assert_eq!(text.lines().count(), 8);
        assert!(text.starts_with("j=1 alpha=-0.875000"));
    }
}
