//! Grayscale image grids, pixel sets, binary masks, and the column-major
//! vector reshaping used by the masked denoising step.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader};

use crate::error::{Error, Result};

/// Grid coordinate. `row` indexes top-to-bottom (y), `col` left-to-right (x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub fn new(row: usize, col: usize) -> Self {
        Pixel { row, col }
    }
}

/// Which channel of the input file to segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Gray,
    Red,
    Green,
    Blue,
}

/// A 2D grid of real intensities, stored row-major.
///
/// Images produced by [`load_image`] and kept by the segmentation loop stay
/// in `[0, 1]`; intermediate transform outputs may leave that range and are
/// clamped by their consumers.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    /// All-zero image.
    pub fn zeros(width: usize, height: usize) -> Self {
        Image {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    /// Build from row-major data. Length must be `width * height`.
    pub fn from_rows(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "expected {} values for a {}x{} image, got {}",
                width * height,
                width,
                height,
                data.len()
            )));
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    /// Build by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Image {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col] = value;
    }

    /// Row-major backing slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Column-major flattening: entry `j` is pixel `(row = j % height, col = j / height)`.
    pub fn to_colmajor(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for col in 0..self.width {
            for row in 0..self.height {
                out.push(self.get(row, col));
            }
        }
        out
    }

    /// Inverse of [`Image::to_colmajor`].
    pub fn from_colmajor(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Dimension(format!(
                "expected {} values for a {}x{} image, got {}",
                width * height,
                width,
                height,
                values.len()
            )));
        }
        let mut img = Image::zeros(width, height);
        for col in 0..width {
            for row in 0..height {
                img.set(row, col, values[col * height + row]);
            }
        }
        Ok(img)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Clamp every intensity into `[0, 1]` in place.
    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Boolean membership grid over an image; the active set of the iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelSet {
    width: usize,
    height: usize,
    members: Vec<bool>,
    count: usize,
}

impl PixelSet {
    pub fn empty(width: usize, height: usize) -> Self {
        PixelSet {
            width,
            height,
            members: vec![false; width * height],
            count: 0,
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        PixelSet {
            width,
            height,
            members: vec![true; width * height],
            count: width * height,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut set = PixelSet::empty(width, height);
        for row in 0..height {
            for col in 0..width {
                if f(row, col) {
                    set.insert(row, col);
                }
            }
        }
        set
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// |Λ|: number of member pixels.
    pub fn cardinality(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.members[row * self.width + col]
    }

    pub fn insert(&mut self, row: usize, col: usize) {
        let idx = row * self.width + col;
        if !self.members[idx] {
            self.members[idx] = true;
            self.count += 1;
        }
    }

    pub fn remove(&mut self, row: usize, col: usize) {
        let idx = row * self.width + col;
        if self.members[idx] {
            self.members[idx] = false;
            self.count -= 1;
        }
    }

    /// Member pixels in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = Pixel> + '_ {
        let width = self.width;
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(move |(i, _)| Pixel::new(i / width, i % width))
    }

    /// True when every member of `self` is also a member of `other`.
    pub fn is_subset_of(&self, other: &PixelSet) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .members
                .iter()
                .zip(&other.members)
                .all(|(&a, &b)| !a || b)
    }

    pub fn same_dims_as_image(&self, img: &Image) -> bool {
        self.width == img.width() && self.height == img.height()
    }
}

/// Strictly two-valued segmentation output; `true` pixels are vessel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        BinaryMask {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.width + col] = value;
    }

    /// Number of vessel pixels.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    /// Write as an 8-bit grayscale PNG with pixel values 0 and 255.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut img = GrayImage::new(self.width as u32, self.height as u32);
        for row in 0..self.height {
            for col in 0..self.width {
                let v = if self.get(row, col) { 255u8 } else { 0u8 };
                img.put_pixel(col as u32, row as u32, image::Luma([v]));
            }
        }
        img.save_with_format(path.as_ref(), image::ImageFormat::Png)
            .map_err(map_image_error)
    }

    /// Load a mask image; any nonzero pixel counts as vessel.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let img = decode(path.as_ref())?.to_luma8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mut mask = BinaryMask::new(w, h);
        for row in 0..h {
            for col in 0..w {
                mask.set(row, col, img.get_pixel(col as u32, row as u32)[0] != 0);
            }
        }
        Ok(mask)
    }
}

/// Replace `base` entries by `replacement` on the member pixels of `set`.
///
/// Vectors are in column-major pixel order, matching [`Image::to_colmajor`].
pub fn blend_on_set(base: &[f64], replacement: &[f64], set: &PixelSet) -> Result<Vec<f64>> {
    let n = set.width() * set.height();
    if base.len() != n || replacement.len() != n {
        return Err(Error::Dimension(format!(
            "blend operands must have {} entries, got {} and {}",
            n,
            base.len(),
            replacement.len()
        )));
    }
    let height = set.height();
    let out = base
        .iter()
        .zip(replacement)
        .enumerate()
        .map(|(j, (&b, &r))| {
            if set.contains(j % height, j / height) {
                r
            } else {
                b
            }
        })
        .collect();
    Ok(out)
}

/// Write an intensity image as an 8-bit grayscale PNG, mapping [0, 1] to
/// 0..=255 with rounding.  Values outside [0, 1] are clamped.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let mut out = GrayImage::new(img.width() as u32, img.height() as u32);
    for row in 0..img.height() {
        for col in 0..img.width() {
            let v = (img.get(row, col).clamp(0.0, 1.0) * 255.0).round() as u8;
            out.put_pixel(col as u32, row as u32, image::Luma([v]));
        }
    }
    out.save_with_format(path.as_ref(), image::ImageFormat::Png)
        .map_err(map_image_error)
}

fn map_image_error(e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::Format(other.to_string()),
    }
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)?;
    reader.decode().map_err(map_image_error)
}

/// Load an 8-bit PNG/PGM/JPEG image, select `channel`, and scale to `[0, 1]`.
///
/// With `channel = None` color inputs use green and grayscale inputs use
/// gray. An explicit color-channel request on a grayscale file degrades to
/// gray with a warning. 16-bit and float inputs are rejected.
pub fn load_image(path: impl AsRef<Path>, channel: Option<Channel>) -> Result<Image> {
    let dynimg = decode(path.as_ref())?;
    let grayscale_input = matches!(
        dynimg,
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_)
    );
    match dynimg {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageRgb8(_)
        | DynamicImage::ImageRgba8(_) => {}
        other => {
            return Err(Error::Format(format!(
                "unsupported bit depth or layout {:?}; only 8-bit images are accepted",
                other.color()
            )))
        }
    }

    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    if w < 3 || h < 3 {
        return Err(Error::Parameter(format!(
            "image is {}x{}; at least 3x3 is required",
            w, h
        )));
    }

    let effective = match channel {
        None if grayscale_input => Channel::Gray,
        None => Channel::Green,
        Some(ch) if grayscale_input && ch != Channel::Gray => {
            log::warn!(
                "{}: grayscale input, ignoring {:?} channel request",
                path.as_ref().display(),
                ch
            );
            Channel::Gray
        }
        Some(ch) => ch,
    };

    let mut img = Image::zeros(w, h);
    match effective {
        Channel::Gray => {
            let gray = dynimg.to_luma8();
            for row in 0..h {
                for col in 0..w {
                    let v = gray.get_pixel(col as u32, row as u32)[0];
                    img.set(row, col, f64::from(v) / 255.0);
                }
            }
        }
        Channel::Red | Channel::Green | Channel::Blue => {
            let rgb = dynimg.to_rgb8();
            let idx = match effective {
                Channel::Red => 0,
                Channel::Green => 1,
                _ => 2,
            };
            for row in 0..h {
                for col in 0..w {
                    let v = rgb.get_pixel(col as u32, row as u32)[idx];
                    img.set(row, col, f64::from(v) / 255.0);
                }
            }
        }
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn colmajor_order_of_2x2() {
        // rows [[a, b], [c, d]] flatten column-first to (a, c, b, d)
        let img = Image::from_rows(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(img.to_colmajor(), vec![1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn colmajor_of_single_row_is_the_row() {
        let img = Image::from_rows(5, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(img.to_colmajor(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn blend_empty_set_keeps_base() {
        let set = PixelSet::empty(2, 1);
        let out = blend_on_set(&[0.0, 0.0], &[9.0, 9.0], &set).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn blend_full_set_takes_replacement() {
        let set = PixelSet::full(2, 1);
        let out = blend_on_set(&[0.0, 0.0], &[9.0, 9.0], &set).unwrap();
        assert_eq!(out, vec![9.0, 9.0]);
    }

    #[test]
    fn blend_single_index() {
        // 2x1 grid, column-major index 1 = (row 0, col 1)
        let mut set = PixelSet::empty(2, 1);
        set.insert(0, 1);
        let out = blend_on_set(&[0.0, 0.0], &[9.0, 9.0], &set).unwrap();
        assert_eq!(out, vec![0.0, 9.0]);
    }

    #[test]
    fn blend_rejects_size_mismatch() {
        let set = PixelSet::empty(2, 2);
        assert!(blend_on_set(&[0.0], &[1.0], &set).is_err());
    }

    #[test]
    fn pixel_set_counts_and_subset() {
        let mut a = PixelSet::empty(3, 3);
        a.insert(1, 1);
        a.insert(2, 0);
        assert_eq!(a.cardinality(), 2);
        a.insert(1, 1); // no double count
        assert_eq!(a.cardinality(), 2);
        let mut b = a.clone();
        b.insert(0, 0);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        a.remove(1, 1);
        assert_eq!(a.cardinality(), 1);
    }

    #[test]
    fn load_selects_green_channel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let mut rgb = image::RgbImage::new(4, 3);
        for (x, y, p) in rgb.enumerate_pixels_mut() {
            *p = image::Rgb([10, (x * 20 + y * 5) as u8, 200]);
        }
        rgb.save(&path).unwrap();
        let img = load_image(&path, Some(Channel::Green)).unwrap();
        assert_eq!((img.width(), img.height()), (4, 3));
        for row in 0..3 {
            for col in 0..4 {
                let expected = f64::from((col * 20 + row * 5) as u8) / 255.0;
                assert_eq!(img.get(row, col), expected);
            }
        }
    }

    #[test]
    fn load_all_black_is_all_zero_and_white_is_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bw.png");
        let mut gray = GrayImage::new(3, 3);
        gray.put_pixel(1, 1, image::Luma([255]));
        gray.save(&path).unwrap();
        let img = load_image(&path, Some(Channel::Gray)).unwrap();
        assert_eq!(img.get(1, 1), 1.0);
        assert_eq!(img.get(0, 0), 0.0);
        assert!(img.min() >= 0.0 && img.max() <= 1.0);
    }

    #[test]
    fn load_color_channel_on_grayscale_degrades() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gray.png");
        let mut gray = GrayImage::new(3, 3);
        gray.put_pixel(2, 2, image::Luma([51]));
        gray.save(&path).unwrap();
        let img = load_image(&path, Some(Channel::Green)).unwrap();
        assert_eq!(img.get(2, 2), 51.0 / 255.0);
    }

    #[test]
    fn load_default_channel_fits_the_input() {
        let dir = tempfile::tempdir().unwrap();

        let gray_path = dir.path().join("gray.png");
        let mut gray = GrayImage::new(3, 3);
        gray.put_pixel(0, 1, image::Luma([102]));
        gray.save(&gray_path).unwrap();
        let img = load_image(&gray_path, None).unwrap();
        assert_eq!(img.get(1, 0), 102.0 / 255.0);

        let rgb_path = dir.path().join("rgb.png");
        let mut rgb = image::RgbImage::new(3, 3);
        rgb.put_pixel(0, 1, image::Rgb([10, 102, 200]));
        rgb.save(&rgb_path).unwrap();
        let img = load_image(&rgb_path, None).unwrap();
        assert_eq!(img.get(1, 0), 102.0 / 255.0);
    }

    #[test]
    fn load_missing_file_is_io_error() {
        let err = load_image("/nonexistent/nope.png", Some(Channel::Gray)).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn load_rejects_16_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let img16 = image::ImageBuffer::<image::Luma<u16>, _>::new(4, 4);
        img16.save(&path).unwrap();
        let err = load_image(&path, Some(Channel::Gray)).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn mask_png_roundtrip_is_0_255() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.png");
        let mask = BinaryMask::from_fn(4, 3, |r, c| (r + c) % 2 == 0);
        mask.save_png(&path).unwrap();
        let raw = image::open(&path).unwrap().to_luma8();
        for (x, y, p) in raw.enumerate_pixels() {
            let expected = if (y + x).is_multiple_of(2) { 255 } else { 0 };
            assert_eq!(p[0], expected);
        }
        let back = BinaryMask::load(&path).unwrap();
        assert_eq!(back, mask);
    }

    proptest! {
        #[test]
        fn colmajor_roundtrip(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
            let mut state = seed;
            let img = Image::from_fn(w, h, |_, _| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            });
            let v = img.to_colmajor();
            let back = Image::from_colmajor(w, h, &v).unwrap();
            prop_assert_eq!(back, img);
        }

        #[test]
        fn blend_is_idempotent(w in 1usize..10, h in 1usize..10, seed in any::<u64>()) {
            let n = w * h;
            let base: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let repl: Vec<f64> = (0..n).map(|i| -(i as f64)).collect();
            let set = PixelSet::from_fn(w, h, |r, c| {
                (r * 31 + c * 17 + (seed % 97) as usize).is_multiple_of(3)
            });
            let once = blend_on_set(&base, &repl, &set).unwrap();
            let twice = blend_on_set(&once, &repl, &set).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
