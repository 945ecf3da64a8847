use std::path::Path;

use image::DynamicImage;

use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Structure(format!(
                "{width}x{height} image needs {} bytes, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    pub(crate) fn expect_size(&self, width: usize, height: usize) -> Result<()> {
        if self.width == width && self.height == height {
            Ok(())
        } else {
            Err(Error::ImageSize {
                expected_w: width,
                expected_h: height,
                actual_w: self.width,
                actual_h: self.height,
            })
        }
    }

    /// Reads a binary PGM (P5) or PPM (P6). Color is reduced with luma weights
    /// 0.299 / 0.587 / 0.114.
    pub fn load(path: &Path) -> Result<Self> {
        let reader = image::ImageReader::open(path)
            .map_err(|e| Error::io(path, e))?
            .with_guessed_format()
            .map_err(|e| Error::io(path, e))?;
        let decoded = reader
            .decode()
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Ok(Self::from_dynamic(decoded))
    }

    fn from_dynamic(img: DynamicImage) -> Self {
        let (width, height) = (img.width() as usize, img.height() as usize);
        let data = match img {
            DynamicImage::ImageLuma8(g) => g.into_raw(),
            other => other
                .to_rgb8()
                .pixels()
                .map(|p| {
                    let [r, g, b] = p.0.map(f64::from);
                    (0.299 * r + 0.587 * g + 0.114 * b).round().clamp(0.0, 255.0) as u8
                })
                .collect(),
        };
        GrayImage { width, height, data }
    }

    /// Writes a binary PGM (P5).
    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        let mut bytes = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        bytes.extend_from_slice(&self.data);
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length() {
        assert!(GrayImage::new(3, 2, vec![0; 5]).is_err());
        assert!(GrayImage::new(3, 2, vec![0; 6]).is_ok());
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        let img = GrayImage::from_fn(5, 3, |x, y| (x * 40 + y) as u8);
        img.save_pgm(&path).unwrap();
        assert_eq!(GrayImage::load(&path).unwrap(), img);
    }

    #[test]
    fn ppm_uses_luma_weights() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ppm");
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 10, 200, 30]);
        std::fs::write(&path, bytes).unwrap();
        let img = GrayImage::load(&path).unwrap();
        let expected = (0.299f64 * 10.0 + 0.587 * 200.0 + 0.114 * 30.0).round() as u8;
        assert_eq!(img.data(), &[76, expected]);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            GrayImage::load(Path::new("/nonexistent/x.pgm")),
            Err(Error::Io { .. })
        ));
    }
}
