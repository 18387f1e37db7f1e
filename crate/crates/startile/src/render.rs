//! SVG slices of a tiling: rasterize a coordinate 2-plane through the
//! origin and color each pixel by a stable hash of its tile id, merging
//! horizontal runs into rects.

use crate::cache::fnv1a64;
use crate::error::{Error, Result};
use crate::tiling::Tiling;

/// Renders the plane spanned by basis vectors `plane.0` and `plane.1`
/// (1-based) over `[bbox.0, bbox.1]^2` at `pixels x pixels` resolution.
pub fn render_slice(
    tiling: &Tiling,
    plane: (usize, usize),
    bbox: (f64, f64),
    pixels: usize,
) -> Result<String> {
    let (pi, pj) = plane;
    let dim = tiling.dim();
    if pi == pj || pi == 0 || pj == 0 || pi > dim || pj > dim {
        return Err(Error::Config(format!(
            "plane indices must be distinct and in 1..={dim}, got {pi}:{pj}"
        )));
    }
    if !(bbox.1 > bbox.0) || pixels < 2 {
        return Err(Error::Config("render needs bbox.lo < bbox.hi and pixels >= 2".into()));
    }
    let (lo, hi) = bbox;
    let w = hi - lo;
    let mut svg = String::with_capacity(pixels * 64);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{pixels}\" height=\"{pixels}\" \
         viewBox=\"0 0 {pixels} {pixels}\">\n"
    ));
    let mut x = vec![0.0; dim];
    for row in 0..pixels {
        // Row sweeps top to bottom; the second axis decreases.
        let t = (row as f64 + 0.5) / pixels as f64;
        let cj = hi - t * w;
        let mut run_start = 0usize;
        let mut run_color: Option<String> = None;
        for col in 0..pixels {
            let s = (col as f64 + 0.5) / pixels as f64;
            let ci = lo + s * w;
            x.iter_mut().for_each(|v| *v = 0.0);
            x[pi - 1] = ci;
            x[pj - 1] = cj;
            let id = tiling.locate_full(&x)?;
            let color = tile_color(&serde_json::to_vec(&id)?);
            match &run_color {
                Some(c) if *c == color => {}
                Some(c) => {
                    push_rect(&mut svg, run_start, row, col - run_start, c);
                    run_start = col;
                    run_color = Some(color);
                }
                None => run_color = Some(color),
            }
        }
        if let Some(c) = run_color {
            push_rect(&mut svg, run_start, row, pixels - run_start, &c);
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn push_rect(svg: &mut String, col: usize, row: usize, width: usize, color: &str) {
    svg.push_str(&format!(
        "<rect x=\"{col}\" y=\"{row}\" width=\"{width}\" height=\"1\" fill=\"{color}\"/>\n"
    ));
}

/// Stable color from the tile id bytes: hash to a hue, fixed saturation
/// and lightness.
fn tile_color(id_bytes: &[u8]) -> String {
    let h = fnv1a64(id_bytes);
    let hue = (h % 360) as f64;
    let (r, g, b) = hsl_to_rgb(hue, 0.62, 0.58);
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> (u8, u8, u8) {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    (
        ((r1 + m) * 255.0).round() as u8,
        ((g1 + m) * 255.0).round() as u8,
        ((b1 + m) * 255.0).round() as u8,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::{TemplateConstants, TemplateVariant};
    use crate::space::SpaceDescriptor;

    #[test]
    fn render_is_deterministic_and_well_formed() {
        let template = TemplateConstants::derive(TemplateVariant::A, 1.3, 0.9).unwrap();
        let t = Tiling::build(SpaceDescriptor::lp(2, 2.0), template, 0.2, 9).unwrap();
        let a = render_slice(&t, (1, 2), (-6.0, 6.0), 48).unwrap();
        let b = render_slice(&t, (1, 2), (-6.0, 6.0), 48).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert!(a.matches("<rect").count() >= 48);
        // The central tile region shows up as one color around the origin.
        let origin = t.locate_full(&[0.0, 0.0]).unwrap();
        assert_eq!(origin.level(), 0);
    }

    #[test]
    fn render_rejects_bad_planes() {
        let template = TemplateConstants::derive(TemplateVariant::A, 1.3, 0.9).unwrap();
        let t = Tiling::build(SpaceDescriptor::lp(2, 2.0), template, 0.2, 9).unwrap();
        assert!(render_slice(&t, (1, 1), (-6.0, 6.0), 32).is_err());
        assert!(render_slice(&t, (1, 3), (-6.0, 6.0), 32).is_err());
    }
}
