//! Gaussian scale-space derivatives and per-pixel Hessian eigen-analysis.
//!
//! Differential quantities come from correlating the image with sampled
//! derivative-of-Gaussian kernels. Truncated pointwise sampling does not
//! preserve the discrete moments that make polynomial inputs differentiate
//! exactly, so every 1D factor is moment-corrected after sampling (see
//! [`gaussian_derivative_kernel`]); a ramp then responds with exactly 1
//! instead of 1 − 2.4e-4. Image boundaries are mirror-extended without
//! repeating the edge sample.

use crate::error::{Error, Result};
use crate::image::{Image, Pixel};

/// Separable correlation kernel for the (dx, dy) derivative of a 2D Gaussian.
///
/// Only the two 1D factors are stored; the weight at offset `(u, v)` is
/// `factor_x[u] · factor_y[v]` with offsets running over `[-radius, radius]²`.
#[derive(Debug, Clone)]
pub struct Kernel {
    radius: usize,
    sigma: f64,
    order: (u8, u8),
    /// 1D factor applied along x (columns), index 0 ↔ offset −radius.
    kx: Vec<f64>,
    /// 1D factor applied along y (rows).
    ky: Vec<f64>,
}

impl Kernel {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Derivative orders `(dx, dy)`.
    pub fn order(&self) -> (u8, u8) {
        self.order
    }

    /// 2D weight at offset `(du, dv)`; zero outside the support.
    pub fn weight(&self, du: isize, dv: isize) -> f64 {
        let r = self.radius as isize;
        if du < -r || du > r || dv < -r || dv > r {
            return 0.0;
        }
        self.kx[(du + r) as usize] * self.ky[(dv + r) as usize]
    }

    /// Sum of all 2D weights (dense double loop, not the factored product,
    /// so rounding is reported honestly).
    pub fn sum(&self) -> f64 {
        let r = self.radius as isize;
        let mut acc = 0.0;
        for dv in -r..=r {
            for du in -r..=r {
                acc += self.weight(du, dv);
            }
        }
        acc
    }
}

/// Builds the 1D factor for one axis.
///
/// Raw samples of a truncated Gaussian derivative have slightly wrong
/// discrete moments (the 4σ tail cut plus sampling error), which shows up as
/// a multiplicative bias on every derivative estimate. Each factor is
/// therefore corrected so the handful of moments that control polynomial
/// responses are exact:
///
/// * order 0: Σ k = 1 (constants preserved);
/// * order 1: Σ k·u = 1 (ramps differentiate exactly; Σ k = 0 already holds
///   by antisymmetry);
/// * order 2: Σ k = 0 and Σ k·u² = 2, imposed by mixing in a multiple of the
///   Gaussian itself so the taps stay smooth.
fn gaussian_factor(order: u8, sigma: f64, radius: usize) -> Vec<f64> {
    let n = 2 * radius + 1;
    let x_of = |i: usize| i as f64 - radius as f64;
    let g: Vec<f64> = (0..n)
        .map(|i| {
            let x = x_of(i);
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    match order {
        0 => {
            let s: f64 = g.iter().sum();
            g.iter().map(|v| v / s).collect()
        }
        1 => {
            // Correlation semantics: the factor is +u·G(u) (the flipped
            // convolution kernel −u·G(u)), rescaled to unit first moment.
            let raw: Vec<f64> = (0..n).map(|i| x_of(i) * g[i]).collect();
            let m1: f64 = raw.iter().enumerate().map(|(i, v)| v * x_of(i)).sum();
            raw.iter().map(|v| v / m1).collect()
        }
        2 => {
            // Solve k = a·s + b·g for Σk = 0 and Σk·u² = 2, where s is the
            // raw sampled second derivative (u²/σ² − 1)·G(u).
            let s: Vec<f64> = (0..n)
                .map(|i| {
                    let x = x_of(i);
                    (x * x / (sigma * sigma) - 1.0) * g[i]
                })
                .collect();
            let s0: f64 = s.iter().sum();
            let s2: f64 = s.iter().enumerate().map(|(i, v)| v * x_of(i) * x_of(i)).sum();
            let g0: f64 = g.iter().sum();
            let g2: f64 = g.iter().enumerate().map(|(i, v)| v * x_of(i) * x_of(i)).sum();
            let det = s0 * g2 - g0 * s2;
            let a = -2.0 * g0 / det;
            let b = 2.0 * s0 / det;
            (0..n).map(|i| a * s[i] + b * g[i]).collect()
        }
        _ => unreachable!("orders are validated before factor construction"),
    }
}

/// Samples the (dx, dy)-derivative-of-Gaussian kernel at scale `sigma`,
/// truncated at radius ⌈4σ⌉ and moment-corrected per factor.
///
/// Orders must satisfy dx, dy ∈ {0, 1, 2} and dx + dy ≤ 2.
pub fn gaussian_derivative_kernel(dx: u8, dy: u8, sigma: f64) -> Result<Kernel> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Parameter(format!(
            "kernel scale must be positive and finite, got {sigma}"
        )));
    }
    if dx > 2 || dy > 2 || dx + dy > 2 {
        return Err(Error::Parameter(format!(
            "derivative orders ({dx},{dy}) out of range: each in 0..=2, sum ≤ 2"
        )));
    }
    let radius = (4.0 * sigma).ceil() as usize;
    Ok(Kernel {
        radius,
        sigma,
        order: (dx, dy),
        kx: gaussian_factor(dx, sigma, radius),
        ky: gaussian_factor(dy, sigma, radius),
    })
}

/// Mirror index: reflect about the edge sample without repeating it
/// (−1 → 1, n → n−2). Preconditions keep one fold sufficient, but the loop
/// handles deeper overshoot anyway.
fn mirror(mut i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

/// Dense correlation of `img` with `k` under mirror boundary extension:
/// `out(y, x) = Σ_{u,v} k(u, v) · img(y+v, x+u)`.
///
/// This is correlation, not flipped convolution; for these kernels the
/// distinction is a sign on odd orders, pinned down by the moment
/// normalization (a rising ramp has positive derivative).
pub fn convolve(img: &Image, k: &Kernel) -> Result<Image> {
    let (w, h) = (img.width(), img.height());
    if k.radius >= w.min(h) {
        return Err(Error::Dimension(format!(
            "kernel radius {} must be smaller than both image sides ({w}×{h})",
            k.radius
        )));
    }
    let r = k.radius as isize;
    // Separable two-pass: along y with ky, then along x with kx.
    let mut tmp = vec![0.0; w * h];
    for row in 0..h {
        for col in 0..w {
            let mut acc = 0.0;
            for (i, &kv) in k.ky.iter().enumerate() {
                let rr = mirror(row as isize + i as isize - r, h);
                acc += kv * img.get(rr, col);
            }
            tmp[row * w + col] = acc;
        }
    }
    let mut out = Image::zeros(w, h);
    for row in 0..h {
        for col in 0..w {
            let mut acc = 0.0;
            for (i, &kv) in k.kx.iter().enumerate() {
                let cc = mirror(col as isize + i as isize - r, w);
                acc += kv * tmp[row * w + cc];
            }
            out.set(row, col, acc);
        }
    }
    Ok(out)
}

/// Per-pixel intensity gradient (gx, gy) with cached magnitudes.
#[derive(Debug, Clone)]
pub struct VectorField {
    width: usize,
    height: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
    magnitude: Vec<f64>,
}

impl VectorField {
    /// Assembles a field from raw components (test scaffolding).
    #[cfg(test)]
    pub(crate) fn from_components(width: usize, height: usize, gx: Vec<f64>, gy: Vec<f64>) -> Self {
        debug_assert_eq!(gx.len(), width * height);
        debug_assert_eq!(gy.len(), width * height);
        let magnitude = gx
            .iter()
            .zip(&gy)
            .map(|(&x, &y)| (x * x + y * y).sqrt())
            .collect();
        VectorField {
            width,
            height,
            gx,
            gy,
            magnitude,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn gx(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.gx[row * self.width + col]
    }

    pub fn gy(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.gy[row * self.width + col]
    }

    pub fn magnitude(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.magnitude[row * self.width + col]
    }

    /// Row-major magnitude slice, for whole-field scans.
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitude
    }
}

/// Gaussian-derivative gradient of `img` at scale `sigma`.
pub fn gradient_field(img: &Image, sigma: f64) -> Result<VectorField> {
    let gx = convolve(img, &gaussian_derivative_kernel(1, 0, sigma)?)?;
    let gy = convolve(img, &gaussian_derivative_kernel(0, 1, sigma)?)?;
    let magnitude = gx
        .as_slice()
        .iter()
        .zip(gy.as_slice())
        .map(|(&x, &y)| (x * x + y * y).sqrt())
        .collect();
    Ok(VectorField {
        width: img.width(),
        height: img.height(),
        gx: gx.as_slice().to_vec(),
        gy: gy.as_slice().to_vec(),
        magnitude,
    })
}

/// Per-pixel symmetric Hessian entries; only the one mixed term is stored.
#[derive(Debug, Clone)]
pub struct HessianField {
    width: usize,
    height: usize,
    fxx: Vec<f64>,
    fxy: Vec<f64>,
    fyy: Vec<f64>,
}

impl HessianField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn entries(&self, row: usize, col: usize) -> (f64, f64, f64) {
        debug_assert!(row < self.height && col < self.width);
        let i = row * self.width + col;
        (self.fxx[i], self.fxy[i], self.fyy[i])
    }
}

/// Gaussian second-derivative (Hessian) field of `img` at scale `sigma`.
pub fn hessian_field(img: &Image, sigma: f64) -> Result<HessianField> {
    let fxx = convolve(img, &gaussian_derivative_kernel(2, 0, sigma)?)?;
    let fxy = convolve(img, &gaussian_derivative_kernel(1, 1, sigma)?)?;
    let fyy = convolve(img, &gaussian_derivative_kernel(0, 2, sigma)?)?;
    Ok(HessianField {
        width: img.width(),
        height: img.height(),
        fxx: fxx.as_slice().to_vec(),
        fxy: fxy.as_slice().to_vec(),
        fyy: fyy.as_slice().to_vec(),
    })
}

/// Per-pixel principal eigenpair of the Hessian: the eigenvalue of largest
/// absolute value and its unit eigenvector, sign-canonicalized.
#[derive(Debug, Clone)]
pub struct EigenField {
    width: usize,
    height: usize,
    lambda: Vec<f64>,
    vx: Vec<f64>,
    vy: Vec<f64>,
}

impl EigenField {
    /// Assembles a field from precomputed eigenpairs (test scaffolding).
    #[cfg(test)]
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        lambda: Vec<f64>,
        vx: Vec<f64>,
        vy: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(lambda.len(), width * height);
        debug_assert_eq!(vx.len(), width * height);
        debug_assert_eq!(vy.len(), width * height);
        EigenField {
            width,
            height,
            lambda,
            vx,
            vy,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn lambda(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.lambda[row * self.width + col]
    }

    /// Unit eigenvector (vx, vy); first nonzero component is nonnegative.
    pub fn v(&self, row: usize, col: usize) -> (f64, f64) {
        debug_assert!(row < self.height && col < self.width);
        let i = row * self.width + col;
        (self.vx[i], self.vy[i])
    }
}

/// Closed-form principal eigenpair of the symmetric 2×2 matrix
/// [[fxx, fxy], [fxy, fyy]].
///
/// Rules: the eigenvalue of larger |λ| wins; a tie within 1e-12 goes to the
/// larger signed eigenvalue; the eigenvector is unit-normalized with its
/// first nonzero component made nonnegative. An isotropic matrix (both
/// candidate eigenvector rows vanish) returns the canonical (1, 0).
pub fn principal_eigenpair(fxx: f64, fxy: f64, fyy: f64) -> (f64, (f64, f64)) {
    let half_tr = 0.5 * (fxx + fyy);
    let half_diff = 0.5 * (fxx - fyy);
    let root = (half_diff * half_diff + fxy * fxy).sqrt();
    let hi = half_tr + root; // larger signed eigenvalue
    let lo = half_tr - root;
    let lambda = if (hi.abs() - lo.abs()).abs() <= 1e-12 || hi.abs() >= lo.abs() {
        hi
    } else {
        lo
    };
    // (H − λI)v = 0: v is orthogonal to either row of (H − λI).
    let (c1x, c1y) = (fxy, lambda - fxx);
    let (c2x, c2y) = (lambda - fyy, fxy);
    let n1 = c1x * c1x + c1y * c1y;
    let n2 = c2x * c2x + c2y * c2y;
    let (mut vx, mut vy) = if n1 >= n2 { (c1x, c1y) } else { (c2x, c2y) };
    let norm = (vx * vx + vy * vy).sqrt();
    if norm == 0.0 {
        return (lambda, (1.0, 0.0));
    }
    vx /= norm;
    vy /= norm;
    if vx < 0.0 || (vx == 0.0 && vy < 0.0) {
        vx = -vx;
        vy = -vy;
    }
    (lambda, (vx, vy))
}

/// Principal Hessian eigenpairs of `img` at scale `sigma`, one per pixel.
pub fn hessian_eigen(img: &Image, sigma: f64) -> Result<EigenField> {
    let h = hessian_field(img, sigma)?;
    let n = h.width * h.height;
    let mut lambda = Vec::with_capacity(n);
    let mut vx = Vec::with_capacity(n);
    let mut vy = Vec::with_capacity(n);
    for i in 0..n {
        let (l, (x, y)) = principal_eigenpair(h.fxx[i], h.fxy[i], h.fyy[i]);
        lambda.push(l);
        vx.push(x);
        vy.push(y);
    }
    Ok(EigenField {
        width: h.width,
        height: h.height,
        lambda,
        vx,
        vy,
    })
}

/// |v(p) · v(q)| for the principal eigenvectors at two pixels.
///
/// The absolute value makes the measure independent of the arbitrary
/// eigenvector sign; rounding is clipped so the result stays in [0, 1].
pub fn orientation_coherence(e: &EigenField, p: Pixel, q: Pixel) -> f64 {
    let (px, py) = e.v(p.row, p.col);
    let (qx, qy) = e.v(q.row, q.col);
    (px * qx + py * qy).abs().min(1.0)
}
