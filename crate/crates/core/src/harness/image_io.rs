//! 8-bit grayscale image I/O. PGM (P5) is the native format; PNG is accepted
//! on input and output when the file extension asks for it.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, GrayImage, ImageEncoder};

use crate::error::{invalid, Error, Result};
use crate::linops::Image;

pub fn load_image(path: &Path) -> Result<Image> {
    let decoded = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::io(path, e))?;
    let gray = decoded.to_luma8();
    let (w, h) = gray.dimensions();
    let pixels = gray.into_raw().into_iter().map(f64::from).collect();
    Image::new(w as usize, h as usize, pixels)
}

/// Clamp to [0, 255] and round half to even.
pub fn quantize(img: &Image) -> Result<Vec<u8>> {
    img.pixels()
        .iter()
        .map(|&p| {
            if !p.is_finite() {
                return Err(invalid("cannot quantize a non-finite pixel"));
            }
            Ok(p.clamp(0.0, 255.0).round_ties_even() as u8)
        })
        .collect()
}

pub fn save_image(img: &Image, path: &Path) -> Result<()> {
    let bytes = quantize(img)?;
    let (w, h) = (img.width() as u32, img.height() as u32);
    let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        let buf = GrayImage::from_raw(w, h, bytes).ok_or_else(|| invalid("image buffer size"))?;
        return buf.save(path).map_err(|e| Error::io(path, e));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    PnmEncoder::new(BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&bytes, w, h, ExtendedColorType::L8)
        .map_err(|e| Error::io(path, e))
}
