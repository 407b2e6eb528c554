//! Exact sliding-window arithmetic for integer-base torus maps.
//!
//! Iterating `x -> beta * x mod 1` in `f64` loses one digit of state per step
//! and collapses onto the fixed point 0 within ~53 steps (base 2), which
//! destroys the stationary statistics every long-orbit computation depends
//! on. Instead, a state is a window of `W` base-`beta` digits sliding over a
//! digit sequence: stepping the map is dropping the leading digit and pulling
//! in the next one, which is exact by construction. States decode to `f64`
//! only when a distance is taken.
//!
//! With i.i.d. uniform digits the decoded state at every time is uniform on
//! `[0, 1)` up to the truncation tolerance `beta^-W`, so a freshly seeded
//! window is a stationary start whose orbit never degenerates.

use crate::error::DomainError;
use crate::rng::{substream, uniform_digit, Substream};

/// Default number of digits retained per state.
pub const DEFAULT_DIGIT_WIDTH: usize = 96;

/// Where the digits beyond the current window come from.
#[derive(Debug, Clone)]
enum DigitSource {
    /// No further information: the represented number is exactly `V / beta^W`.
    Zeros,
    /// Lazily generated i.i.d. uniform digits.
    Random(Substream),
    /// A repeating pattern (fixtures and exactly periodic points).
    Cyclic { pattern: Vec<u8>, next: usize },
}

impl DigitSource {
    #[inline]
    fn next_digit(&mut self, base: u32) -> u8 {
        match self {
            DigitSource::Zeros => 0,
            DigitSource::Random(rng) => uniform_digit(rng, base),
            DigitSource::Cyclic { pattern, next } => {
                let d = pattern[*next];
                *next = (*next + 1) % pattern.len();
                d
            }
        }
    }
}

/// A base-`beta` expansion window representing one coordinate of a state of
/// the map `x -> beta * x mod 1`.
#[derive(Debug, Clone)]
pub struct DigitWindow {
    base: u32,
    width: usize,
    inv_base: f64,
    /// Digits `buf[start .. start + width]`, most significant first. The
    /// buffer grows up to `2 * width` and is then compacted in one move.
    buf: Vec<u8>,
    start: usize,
    source: DigitSource,
}

impl DigitWindow {
    fn new(base: u32, width: usize, window: Vec<u8>, source: DigitSource) -> Self {
        debug_assert!(base >= 2);
        debug_assert_eq!(window.len(), width);
        debug_assert!(window.iter().all(|&d| (d as u32) < base));
        let mut buf = Vec::with_capacity(2 * width);
        buf.extend_from_slice(&window);
        DigitWindow {
            base,
            width,
            inv_base: 1.0 / base as f64,
            buf,
            start: 0,
            source,
        }
    }

    /// Window over i.i.d. uniform digits drawn from `rng`: a stationary start.
    pub fn random(base: u32, width: usize, mut rng: Substream) -> Self {
        let window = (0..width).map(|_| uniform_digit(&mut rng, base)).collect();
        Self::new(base, width, window, DigitSource::Random(rng))
    }

    /// Window over an infinitely repeated digit pattern.
    pub fn cyclic(base: u32, width: usize, pattern: &[u8]) -> Self {
        assert!(!pattern.is_empty(), "cyclic digit pattern must be nonempty");
        let window: Vec<u8> = pattern.iter().copied().cycle().take(width).collect();
        let next = width % pattern.len();
        Self::new(
            base,
            width,
            window,
            DigitSource::Cyclic {
                pattern: pattern.to_vec(),
                next,
            },
        )
    }

    /// Exact base-`beta` expansion of an `f64` in `[0, 1)`, truncated to
    /// `width` digits and padded with zeros beyond. Values below `2^-64`
    /// are flushed to zero.
    pub fn from_f64(base: u32, width: usize, x: f64) -> Result<Self, DomainError> {
        if !(0.0..1.0).contains(&x) {
            return Err(DomainError::PointOutOfRange { index: 0, value: x });
        }
        // x = mantissa * 2^-shift exactly
        let (mantissa, shift) = decompose(x);
        let mut window = vec![0u8; width];
        if shift > 0 {
            let den: u128 = 1u128 << shift;
            let mut rem: u128 = mantissa as u128;
            for slot in window.iter_mut() {
                rem *= base as u128;
                *slot = (rem >> shift) as u8;
                rem &= den - 1;
            }
        }
        Ok(Self::new(base, width, window, DigitSource::Zeros))
    }

    /// Exact base-`beta` expansion of the decimal fraction `num / 10^scale`,
    /// truncated to `width` digits. This is how command-line coordinates like
    /// `0.1` enter integer-base orbits without inheriting binary rounding.
    pub fn from_decimal(base: u32, width: usize, num: u128, scale: u32) -> Result<Self, DomainError> {
        let den = 10u128
            .checked_pow(scale)
            .filter(|&d| d <= 10u128.pow(30))
            .ok_or(DomainError::PointOutOfRange {
                index: 0,
                value: f64::NAN,
            })?;
        if num >= den {
            return Err(DomainError::PointOutOfRange {
                index: 0,
                value: num as f64 / den as f64,
            });
        }
        let mut window = vec![0u8; width];
        let mut rem = num;
        for slot in window.iter_mut() {
            rem *= base as u128;
            *slot = (rem / den) as u8;
            rem %= den;
        }
        Ok(Self::new(base, width, window, DigitSource::Zeros))
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// The current window, most significant digit first.
    pub fn digits(&self) -> &[u8] {
        &self.buf[self.start..self.start + self.width]
    }

    /// Decode the window to `f64`: `sum_{j=1..W} d_j beta^-j`, evaluated as
    /// four interleaved Horner chains (the serial chain would dominate the
    /// hot loop otherwise).
    pub fn decode(&self) -> f64 {
        decode_digits(self.digits(), self.inv_base)
    }

    /// Apply `x -> beta * x mod 1` exactly: slide the window one digit.
    #[inline]
    pub fn step(&mut self) {
        let next = self.source.next_digit(self.base);
        if self.buf.len() == 2 * self.width {
            self.buf.copy_within(self.start + 1.., 0);
            self.buf.truncate(self.width - 1);
            self.start = 0;
        } else {
            self.start += 1;
        }
        self.buf.push(next);
    }
}

/// `x = mantissa * 2^-shift` with both parts exact; `shift = 0` encodes `x = 0`.
/// Keeping `shift <= 116` bounds `rem * base` within `u128` for bases up to 64.
fn decompose(x: f64) -> (u64, u32) {
    if x < 2f64.powi(-64) {
        return (0, 0);
    }
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64 - 1023;
    let mantissa = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    // x = mantissa * 2^(exponent - 52), exponent in [-64, -1] for x in [2^-64, 1)
    let shift = (52 - exponent) as u32;
    debug_assert!(shift <= 116);
    (mantissa, shift)
}

fn decode_digits(digits: &[u8], inv: f64) -> f64 {
    let rem = digits.len() % 4;
    let (head, tail) = digits.split_at(rem);
    let q4 = inv * inv * inv * inv;
    let mut c = [0.0f64; 4];
    for chunk in tail.rchunks_exact(4) {
        c[0] = c[0] * q4 + chunk[0] as f64;
        c[1] = c[1] * q4 + chunk[1] as f64;
        c[2] = c[2] * q4 + chunk[2] as f64;
        c[3] = c[3] * q4 + chunk[3] as f64;
    }
    let mut x = inv * (c[0] + inv * (c[1] + inv * (c[2] + inv * c[3])));
    for &d in head.iter().rev() {
        x = inv * (x + d as f64);
    }
    x
}

/// A reproducible source of i.i.d. uniform base-`beta` digits together with
/// the window geometry needed to read it as a stationary orbit of the map
/// `x -> beta * x mod 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitStream {
    pub base: u32,
    pub width: usize,
    pub seed: u64,
}

impl DigitStream {
    pub fn new(base: u32, width: usize, seed: u64) -> Self {
        assert!((2..=64).contains(&base), "supported bases are 2..=64");
        assert!(width >= 1, "digit window must hold at least one digit");
        DigitStream { base, width, seed }
    }

    /// The sliding window positioned at time 0.
    pub fn window(&self) -> DigitWindow {
        DigitWindow::random(self.base, self.width, substream(self.seed, 0))
    }
}

/// Decoded states at times `0..n` of the orbit carried by `stream`.
pub fn digit_orbit(stream: &DigitStream, n: usize) -> Result<Vec<f64>, DomainError> {
    if n == 0 {
        return Err(DomainError::EmptyCount);
    }
    let mut window = stream.window();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(window.decode());
        window.step();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_shift_example() {
        // digits 1,0,1,0,...: state0 = 0.1010_2 = 0.625, state1 = 0.0101_2 = 0.3125
        let mut w = DigitWindow::cyclic(2, 4, &[1, 0]);
        assert_eq!(w.decode(), 0.625);
        w.step();
        assert_eq!(w.decode(), 0.3125);
    }

    #[test]
    fn constant_base3_digits_are_a_fixed_point() {
        // 2/3 + 2/9 + 2/27 = 26/27; shifting changes nothing
        let mut w = DigitWindow::cyclic(3, 3, &[2]);
        let x0 = w.decode();
        assert_eq!(x0, 26.0 / 27.0);
        w.step();
        assert_eq!(w.decode(), x0);
    }

    #[test]
    fn digit_orbit_is_deterministic_in_its_parameters() {
        let stream = DigitStream::new(3, 96, 42);
        let a = digit_orbit(&stream, 64).unwrap();
        let b = digit_orbit(&stream, 64).unwrap();
        assert_eq!(a, b);
        let c = digit_orbit(&DigitStream::new(3, 96, 43), 64).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn digit_orbit_rejects_empty_counts() {
        assert!(digit_orbit(&DigitStream::new(2, 96, 1), 0).is_err());
    }

    #[test]
    fn states_stay_in_the_unit_interval() {
        for seed in 0..20 {
            let orbit = digit_orbit(&DigitStream::new(2, 96, seed), 500).unwrap();
            assert!(orbit.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
    }

    #[test]
    fn f64_conversion_is_exact_for_dyadics() {
        let w = DigitWindow::from_f64(2, 96, 0.625).unwrap();
        assert_eq!(&w.digits()[..4], &[1, 0, 1, 0]);
        assert!(w.digits()[4..].iter().all(|&d| d == 0));
        assert_eq!(w.decode(), 0.625);
    }

    #[test]
    fn f64_conversion_rejects_out_of_range() {
        assert!(DigitWindow::from_f64(2, 96, 1.0).is_err());
        assert!(DigitWindow::from_f64(2, 96, -0.25).is_err());
    }

    #[test]
    fn decimal_conversion_matches_the_exact_rational() {
        // 1/10 in base 2: 0.0(0011) repeating
        let w = DigitWindow::from_decimal(2, 12, 1, 1).unwrap();
        assert_eq!(w.digits(), &[0, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1]);
        // decoded value sits within beta^-W of 1/10
        let full = DigitWindow::from_decimal(2, 96, 1, 1).unwrap();
        assert!((full.decode() - 0.1).abs() < 1e-16);
    }

    #[test]
    fn decimal_conversion_rejects_values_of_one_or_more() {
        assert!(DigitWindow::from_decimal(2, 8, 10, 1).is_err());
        assert!(DigitWindow::from_decimal(2, 8, 17, 1).is_err());
    }

    #[test]
    fn stepping_a_doubling_window_matches_f64_doubling_while_exact() {
        // while the f64 orbit is still exact (dyadic start), both routes agree
        let mut w = DigitWindow::from_f64(2, 96, 0.3125).unwrap();
        let mut x = 0.3125f64;
        for _ in 0..4 {
            w.step();
            x = (2.0 * x) % 1.0;
            assert_eq!(w.decode(), x);
        }
    }

    #[test]
    fn window_ring_buffer_compaction_preserves_the_digit_sequence() {
        let stream = DigitStream::new(5, 17, 9);
        let mut w = stream.window();
        let mut seen = Vec::new();
        for _ in 0..200 {
            seen.push(w.digits().to_vec());
            w.step();
        }
        // consecutive windows overlap in all but one digit
        for i in 1..seen.len() {
            assert_eq!(seen[i - 1][1..], seen[i][..16]);
        }
    }
}
