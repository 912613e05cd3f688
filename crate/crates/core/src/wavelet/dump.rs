//! Debug dump of a pyramid: one little-endian `f32` file per band plus a
//! `manifest.txt` listing `name rows cols`.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use super::pyramid::{SubbandPyramid, BAND_NAMES};

pub fn dump_pyramid(pyramid: &SubbandPyramid, dir: impl AsRef<Path>) -> std::io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    manifest.push_str(&format!(
        "# basis {} levels {} original {}x{}\n",
        pyramid.basis,
        pyramid.levels(),
        pyramid.original_width,
        pyramid.original_height
    ));
    let mut write_band = |name: String, band: &Array2<f64>| -> std::io::Result<()> {
        let mut file = fs::File::create(dir.join(format!("{name}.f32")))?;
        let mut buf = Vec::with_capacity(band.len() * 4);
        for &v in band.iter() {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        file.write_all(&buf)?;
        let (rows, cols) = band.dim();
        manifest.push_str(&format!("{name} {rows} {cols}\n"));
        Ok(())
    };
    for (i, d) in pyramid.details.iter().enumerate() {
        for (name, band) in BAND_NAMES.iter().zip(d.bands()) {
            write_band(format!("{name}{}", i + 1), band)?;
        }
    }
    write_band(format!("LL{}", pyramid.levels()), &pyramid.approximation)?;
    fs::write(dir.join("manifest.txt"), manifest)
}
