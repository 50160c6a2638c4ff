//! Scalar measures on lattice vectors: localization, dominant wave vector,
//! mirror parity, and the bilinear (non-conjugating) inner product used for
//! complex symmetric operators.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::Parity;

/// Grid points per unit of `pi / N` on the Fourier grid.
pub const FOURIER_OVERSAMPLING: usize = 4;

/// `sum_x a_x b_x` without complex conjugation.
pub fn bilinear_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Principal square root of `sum_x psi_x^2`, the scale that makes a vector
/// bilinearly normalized. Returns the raw bilinear square alongside.
pub fn bilinear_scale(a: &[Complex64]) -> (Complex64, Complex64) {
    let sq = bilinear_dot(a, a);
    (sq.sqrt(), sq)
}

/// Inverse participation ratio `sum |u|^4 / (sum |u|^2)^2`, in `[1/N, 1]`.
pub fn ipr(u: &[Complex64]) -> Result<f64> {
    let mut s2 = 0.0;
    let mut s4 = 0.0;
    for z in u {
        let p = z.norm_sqr();
        s2 += p;
        s4 += p * p;
    }
    if s2 == 0.0 || !s2.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(s4 / (s2 * s2))
}

/// Mirror overlap `<u|Ru> / <u|u>` with `R: x -> N + 1 - x`.
///
/// Real because `R` is real symmetric; `+1` for even and `-1` for odd vectors
/// regardless of the global phase.
pub fn mirror_overlap(u: &[Complex64]) -> f64 {
    let n = u.len();
    let norm = norm_sqr(u);
    if norm == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for x in 0..n {
        acc += (u[x].conj() * u[n - 1 - x]).re;
    }
    acc / norm
}

/// `|sum_{x=1}^N exp(-i k x) u_x|` on the grid `k_l = pi l / (4N)`, `l = 1..=4N`.
pub fn fourier_magnitudes(u: &[Complex64]) -> Vec<f64> {
    let n = u.len();
    let points = FOURIER_OVERSAMPLING * n;
    (1..=points)
        .map(|l| {
            let k = std::f64::consts::PI * l as f64 / points as f64;
            let step = Complex64::from_polar(1.0, -k);
            let mut phase = step;
            let mut acc = Complex64::new(0.0, 0.0);
            for z in u {
                acc += phase * z;
                phase *= step;
            }
            acc.norm()
        })
        .collect()
}

/// Wave vector of the dominant Fourier component on `(0, pi]`.
///
/// The argmax on the oversampled grid is refined by a parabola through the
/// neighbouring bins; at the ends of the grid the bin centre is returned.
pub fn fourier_kmax(u: &[Complex64]) -> Result<f64> {
    if norm_sqr(u) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mags = fourier_magnitudes(u);
    let points = mags.len();
    let dk = std::f64::consts::PI / points as f64;
    let (l, _) =
        mags.iter().enumerate().fold(
            (0, f64::MIN),
            |best, (i, &m)| if m > best.1 { (i, m) } else { best },
        );
    let k = dk * (l + 1) as f64;
    if l == 0 || l + 1 == points {
        return Ok(k);
    }
    let (y0, y1, y2) = (mags[l - 1], mags[l], mags[l + 1]);
    let curvature = y0 - 2.0 * y1 + y2;
    if curvature >= 0.0 {
        return Ok(k);
    }
    let offset = 0.5 * (y0 - y2) / curvature;
    Ok(k + offset.clamp(-0.5, 0.5) * dk)
}

/// Smallest wave vector on the Fourier grid; a `k_max` equal to this is a DC
/// peak and carries no standing-wave index.
pub fn fourier_grid_floor(n: usize) -> f64 {
    std::f64::consts::PI / (FOURIER_OVERSAMPLING * n) as f64
}

/// Nearest integer to `raw` whose parity matches `even`.
pub fn nearest_with_parity(raw: f64, even: bool) -> i64 {
    let p = if even { 0.0 } else { 1.0 };
    (2.0 * ((raw - p) / 2.0).round() + p) as i64
}

/// Standing-wave index `j in 1..N` closest to `k N / pi`, restricted to the
/// parity class `(-1)^j` of a mirror-even or mirror-odd vector. Near `k = pi`
/// the peak merges with its alias, so out-of-range values step back by 2.
pub fn standing_wave_index(k: f64, parity: Parity, n: usize) -> usize {
    let raw = k * n as f64 / std::f64::consts::PI;
    let mut j = match parity {
        Parity::Even => nearest_with_parity(raw, true),
        Parity::Odd => nearest_with_parity(raw, false),
        Parity::Indefinite => raw.round() as i64,
    };
    let top = n as i64 - 1;
    while j > top.max(1) {
        j -= 2;
    }
    while j < 1 {
        j += 2;
    }
    j as usize
}
