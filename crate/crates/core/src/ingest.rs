//! IDX image/label files and the two-class data matrix built from them.
//!
//! Only uncompressed IDX is handled; the `.gz` files as distributed must be
//! decompressed first (e.g. `gunzip -k`).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const IMAGES_MAGIC: [u8; 4] = [0x00, 0x00, 0x08, 0x03];
pub const LABELS_MAGIC: [u8; 4] = [0x00, 0x00, 0x08, 0x01];

pub const FASHION_MNIST_CLASSES: [&str; 10] = [
    "T-shirt/top",
    "Trouser",
    "Pullover",
    "Dress",
    "Coat",
    "Sandal",
    "Shirt",
    "Sneaker",
    "Bag",
    "Ankle boot",
];

/// Standard file names inside an (uncompressed) Fashion-MNIST directory,
/// as (images, labels) for the training and test splits.
pub const FASHION_MNIST_FILES: [(&str, &str); 2] = [
    ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// `count * rows * cols` bytes, image after image, each row-major.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let d = self.pixels_per_image();
        &self.pixels[i * d..(i + 1) * d]
    }
}

fn read_u32_be(bytes: &[u8], at: usize) -> Result<usize> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize)
        .ok_or_else(|| Error::Format("truncated IDX header".into()))
}

fn check_magic(bytes: &[u8], want: [u8; 4], what: &str) -> Result<()> {
    match bytes.get(..4) {
        Some(m) if m == want => Ok(()),
        Some(m) => Err(Error::Format(format!("bad magic {m:02x?} for an IDX {what} file, expected {want:02x?}"))),
        None => Err(Error::Format("file shorter than the IDX magic".into())),
    }
}

fn check_payload(bytes: &[u8], header: usize, expected: usize) -> Result<()> {
    let got = bytes.len() - header;
    if got < expected {
        return Err(Error::Format(format!("truncated IDX payload: {got} bytes, expected {expected}")));
    }
    if got > expected {
        return Err(Error::Format(format!("{} trailing bytes after the IDX payload", got - expected)));
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    check_magic(bytes, IMAGES_MAGIC, "image")?;
    let count = read_u32_be(bytes, 4)?;
    let rows = read_u32_be(bytes, 8)?;
    let cols = read_u32_be(bytes, 12)?;
    let len = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::Format("IDX dimensions overflow".into()))?;
    check_payload(bytes, 16, len)?;
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: bytes[16..].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC, "label")?;
    let count = read_u32_be(bytes, 4)?;
    check_payload(bytes, 8, count)?;
    let labels = bytes[8..].to_vec();
    if labels.contains(&255) {
        return Err(Error::Format("label value 255 is out of range".into()));
    }
    Ok(labels)
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    parse_idx_images(&std::fs::read(path)?)
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&std::fs::read(path)?)
}

fn dim_u32(v: usize) -> Result<[u8; 4]> {
    u32::try_from(v)
        .map(u32::to_be_bytes)
        .map_err(|_| Error::InvalidInput(format!("dimension {v} does not fit in 32 bits")))
}

pub fn write_idx_images(path: impl AsRef<Path>, images: &IdxImages) -> Result<()> {
    if images.pixels.len() != images.count * images.rows * images.cols {
        return Err(Error::DimensionMismatch("pixel buffer does not match the image dimensions".into()));
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&IMAGES_MAGIC)?;
    for d in [images.count, images.rows, images.cols] {
        f.write_all(&dim_u32(d)?)?;
    }
    f.write_all(&images.pixels)?;
    f.flush()?;
    Ok(())
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&LABELS_MAGIC)?;
    f.write_all(&dim_u32(labels.len())?)?;
    f.write_all(labels)?;
    f.flush()?;
    Ok(())
}

/// Record of the transforms applied to a data matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    /// Pixels were divided by this value before anything else.
    pub pixel_divisor: f64,
    pub centered: bool,
    pub scaled: bool,
    /// Global factor applied by scaling (1 when not scaled).
    pub scale_factor: f64,
}

impl Default for Preprocessing {
    fn default() -> Self {
        Preprocessing {
            pixel_divisor: 1.0,
            centered: false,
            scaled: false,
            scale_factor: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairDataset {
    /// `p x n`, one flattened image per column.
    pub x: Matrix,
    /// `+1` for class `pair.0`, `-1` for class `pair.1`.
    pub j: Vec<f64>,
    pub pair: (u8, u8),
    pub preprocessing: Preprocessing,
}

/// Columns are the images of class `k1` followed by those of `k2`, in file
/// order (files taken in the order given), with pixels mapped to `[0, 1]`.
pub fn select_pair(images: &[IdxImages], labels: &[Vec<u8>], k1: u8, k2: u8) -> Result<PairDataset> {
    if k1 == k2 {
        return Err(Error::InvalidInput(format!("a pair needs two distinct classes, got {k1} twice")));
    }
    if images.is_empty() || images.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!("{} image files but {} label files", images.len(), labels.len())));
    }
    let p = images[0].pixels_per_image();
    for (img, lab) in images.iter().zip(labels) {
        if img.pixels_per_image() != p {
            return Err(Error::DimensionMismatch("image files have different image sizes".into()));
        }
        if img.count != lab.len() {
            return Err(Error::DimensionMismatch(format!("{} images but {} labels", img.count, lab.len())));
        }
    }

    let mut columns: Vec<&[u8]> = Vec::new();
    let mut j = Vec::new();
    for (class, sign) in [(k1, 1.0), (k2, -1.0)] {
        let before = columns.len();
        for (img, lab) in images.iter().zip(labels) {
            for (i, _) in lab.iter().enumerate().filter(|(_, &l)| l == class) {
                columns.push(img.image(i));
                j.push(sign);
            }
        }
        if columns.len() == before {
            return Err(Error::InvalidInput(format!("class {class} has no samples")));
        }
    }

    let n = columns.len();
    let mut x = Matrix::zeros(p, n);
    for (c, img) in columns.iter().enumerate() {
        x.col_mut(c).iter_mut().zip(img.iter()).for_each(|(dst, &b)| *dst = b as f64 / 255.0);
    }
    Ok(PairDataset {
        x,
        j,
        pair: (k1, k2),
        preprocessing: Preprocessing {
            pixel_divisor: 255.0,
            ..Preprocessing::default()
        },
    })
}

fn row_means(x: &Matrix) -> Vec<f64> {
    let mut mean = vec![0.0; x.rows()];
    for col in x.columns() {
        mean.iter_mut().zip(col).for_each(|(m, v)| *m += v);
    }
    let n = x.cols() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Average over features of the population variance across samples.
pub fn mean_feature_variance(x: &Matrix) -> f64 {
    let mean = row_means(x);
    let mut ss = 0.0;
    for col in x.columns() {
        ss += col.iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)).sum::<f64>();
    }
    ss / (x.rows() as f64 * x.cols() as f64)
}

/// Optionally removes each feature's mean and rescales all entries by one
/// factor so that [`mean_feature_variance`] equals 1.
pub fn preprocess(x: &mut Matrix, center: bool, scale: bool) -> Result<Preprocessing> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::Preprocessing("empty data matrix".into()));
    }
    let mut record = Preprocessing {
        centered: center,
        scaled: scale,
        ..Preprocessing::default()
    };
    if center {
        let mean = row_means(x);
        for c in 0..x.cols() {
            x.col_mut(c).iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
        }
    }
    if scale {
        let var = mean_feature_variance(x);
        if !(var > 0.0) {
            return Err(Error::Preprocessing("data has zero variance and cannot be scaled".into()));
        }
        let factor = 1.0 / var.sqrt();
        x.as_mut_slice().iter_mut().for_each(|v| *v *= factor);
        record.scale_factor = factor;
    }
    Ok(record)
}

impl PairDataset {
    pub fn preprocess(&mut self, center: bool, scale: bool) -> Result<()> {
        let applied = preprocess(&mut self.x, center, scale)?;
        self.preprocessing.centered = applied.centered;
        self.preprocessing.scaled = applied.scaled;
        self.preprocessing.scale_factor = applied.scale_factor;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.x.cols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_bytes(count: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
        let mut b = IMAGES_MAGIC.to_vec();
        for d in [count, rows, cols] {
            b.extend(d.to_be_bytes());
        }
        b.extend(pixels);
        b
    }

    #[test]
    fn parse_single_image() {
        let img = parse_idx_images(&image_bytes(1, 2, 2, &[0, 255, 128, 7])).unwrap();
        assert_eq!((img.count, img.rows, img.cols), (1, 2, 2));
        assert_eq!(img.pixels, vec![0, 255, 128, 7]);
    }

    #[test]
    fn image_format_errors() {
        let mut wrong = image_bytes(1, 2, 2, &[0, 1, 2, 3]);
        wrong[3] = 0x01;
        assert!(matches!(parse_idx_images(&wrong), Err(Error::Format(_))));
        assert!(matches!(parse_idx_images(&image_bytes(1, 2, 2, &[0, 1, 2])), Err(Error::Format(_))));
        assert!(matches!(parse_idx_images(&image_bytes(1, 2, 2, &[0, 1, 2, 3, 4])), Err(Error::Format(_))));
        assert!(parse_idx_images(&[0, 0, 8]).is_err());
    }

    #[test]
    fn parse_labels() {
        let mut b = LABELS_MAGIC.to_vec();
        b.extend(3u32.to_be_bytes());
        b.extend([0, 9, 4]);
        assert_eq!(parse_idx_labels(&b).unwrap(), vec![0, 9, 4]);
        assert!(matches!(parse_idx_labels(&b[..b.len() - 1]), Err(Error::Format(_))));
        let mut bad = b.clone();
        bad[10] = 255;
        assert!(parse_idx_labels(&bad).is_err());
        assert!(parse_idx_labels(&image_bytes(1, 1, 1, &[0])).is_err());
    }

    fn fixture() -> (IdxImages, Vec<u8>) {
        let img = IdxImages {
            count: 5,
            rows: 1,
            cols: 2,
            pixels: vec![0, 255, 10, 20, 30, 40, 50, 60, 255, 0],
        };
        (img, vec![1, 0, 1, 2, 0])
    }

    #[test]
    fn select_pair_orders_by_class() {
        let (img, lab) = fixture();
        let ds = select_pair(&[img], &[lab], 1, 0).unwrap();
        assert_eq!(ds.j, vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(ds.x.col(0), &[0.0, 1.0]);
        assert_eq!(ds.x.col(1), &[30.0 / 255.0, 40.0 / 255.0]);
        assert_eq!(ds.x.col(3), &[1.0, 0.0]);
        assert_eq!(ds.preprocessing.pixel_divisor, 255.0);
    }

    #[test]
    fn select_pair_errors() {
        let (img, lab) = fixture();
        assert!(select_pair(&[img.clone()], &[lab.clone()], 1, 1).is_err());
        assert!(select_pair(&[img.clone()], &[lab.clone()], 1, 7).is_err());
        assert!(select_pair(&[img], &[], 1, 0).is_err());
    }

    #[test]
    fn preprocessing_cases() {
        let mut same = Matrix::from_fn(3, 4, |i, _| i as f64 + 1.0);
        preprocess(&mut same, true, false).unwrap();
        assert_eq!(same.max_abs(), 0.0);
        assert!(matches!(preprocess(&mut same, true, true), Err(Error::Preprocessing(_))));

        // Each row alternates -2, +2: population variance 4.
        let mut x = Matrix::from_fn(2, 4, |_, j| if j % 2 == 0 { -2.0 } else { 2.0 });
        let rec = preprocess(&mut x, false, true).unwrap();
        assert!((rec.scale_factor - 0.5).abs() < 1e-15);
        assert!(x.as_slice().iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn round_trip_files() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = fixture();
        write_idx_images(dir.path().join("i"), &img).unwrap();
        write_idx_labels(dir.path().join("l"), &lab).unwrap();
        assert_eq!(read_idx_images(dir.path().join("i")).unwrap(), img);
        assert_eq!(read_idx_labels(dir.path().join("l")).unwrap(), lab);
    }
}
