//! Best-effort PNG rendering of a correlation matrix.

use std::io::Cursor;

use image::{ImageBuffer, ImageFormat, Rgb};

use nvtrack::correlation::CorrelationMatrix;
use nvtrack::error::Result;

const CELL: u32 = 48;
const BORDER: u32 = 2;

/// Diverging colour map: -1 deep blue, 0 white, +1 deep red.
fn colour(r: f64) -> Rgb<u8> {
    let r = r.clamp(-1.0, 1.0);
    let fade = (255.0 * (1.0 - r.abs())) as u8;
    if r >= 0.0 {
        Rgb([255, fade, fade])
    } else {
        Rgb([fade, fade, 255])
    }
}

pub fn render_png(matrix: &CorrelationMatrix) -> Result<Vec<u8>> {
    let n = matrix.variables().len() as u32;
    let size = n * CELL + (n + 1) * BORDER;
    let img = ImageBuffer::from_fn(size, size, |x, y| {
        let cx = x % (CELL + BORDER);
        let cy = y % (CELL + BORDER);
        let i = (y / (CELL + BORDER)).min(n.saturating_sub(1));
        let j = (x / (CELL + BORDER)).min(n.saturating_sub(1));
        if cx < BORDER || cy < BORDER || x >= size - BORDER || y >= size - BORDER {
            Rgb([40, 40, 40])
        } else {
            colour(matrix.get(i as usize, j as usize))
        }
    });
    let mut bytes = Vec::new();
    img.write_to(&mut Cursor::new(&mut bytes), ImageFormat::Png)
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(bytes)
}
