//! Intelligent-scissors graph: one vertex per pixel, edges to the eight
//! neighbours, cheap edges along strong gradients.

use crate::error::{Error, Result};
use crate::experiments::GrayImage;
use crate::graph::Graph;
use crate::scalar::Scalar;

/// Floor added to the cost so boundary edges stay strictly positive.
pub const EPSILON: f64 = 0.01;

/// Zero-based `(row, col)`.
pub type Pixel = (usize, usize);

/// Row-major numbering of pixels as graph vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelMap {
    pub width: usize,
    pub height: usize,
}

impl PixelMap {
    pub fn vertex(&self, p: Pixel) -> Result<usize> {
        if p.0 >= self.height || p.1 >= self.width {
            return Err(Error::VertexOutOfRange(p.0 * self.width + p.1 + 1, self.width * self.height));
        }
        Ok(p.0 * self.width + p.1)
    }

    pub fn pixel(&self, v: usize) -> Pixel {
        (v / self.width, v % self.width)
    }
}

/// Sobel gradient magnitude scaled so the largest value is 1 (all zero on
/// a flat image). Borders replicate the nearest pixel.
#[derive(Debug, Clone)]
pub struct GradientField {
    width: usize,
    values: Vec<f64>,
}

impl GradientField {
    pub fn new(img: &GrayImage) -> Self {
        let (w, h) = (img.width() as isize, img.height() as isize);
        let at = |r: isize, c: isize| img.get(r.clamp(0, h - 1) as usize, c.clamp(0, w - 1) as usize) as f64;
        let mut values = Vec::with_capacity((w * h) as usize);
        for r in 0..h {
            for c in 0..w {
                let gx = (at(r - 1, c + 1) + 2.0 * at(r, c + 1) + at(r + 1, c + 1))
                    - (at(r - 1, c - 1) + 2.0 * at(r, c - 1) + at(r + 1, c - 1));
                let gy = (at(r + 1, c - 1) + 2.0 * at(r + 1, c) + at(r + 1, c + 1))
                    - (at(r - 1, c - 1) + 2.0 * at(r - 1, c) + at(r - 1, c + 1));
                values.push(gx.hypot(gy));
            }
        }
        let top = values.iter().copied().fold(0.0, f64::max);
        if top > 0.0 {
            values.iter_mut().for_each(|v| *v /= top);
        }
        Self { width: img.width(), values }
    }

    pub fn at(&self, p: Pixel) -> f64 {
        self.values[p.0 * self.width + p.1]
    }

    /// `d(p, q) (EPSILON + 1 - (G(p) + G(q)) / 2)`, `d` = 1 or sqrt 2.
    pub fn weight(&self, p: Pixel, q: Pixel) -> Result<f64> {
        let (dr, dc) = (p.0.abs_diff(q.0), p.1.abs_diff(q.1));
        let d = match (dr, dc) {
            (0, 1) | (1, 0) => 1.0,
            (1, 1) => std::f64::consts::SQRT_2,
            _ => return Err(Error::NotNeighbors(p, q)),
        };
        Ok(d * (EPSILON + 1.0 - 0.5 * (self.at(p) + self.at(q))))
    }
}

/// Cost of the edge between 8-neighbours `p` and `q`.
pub fn edge_weight_from_gradient(img: &GrayImage, p: Pixel, q: Pixel) -> Result<f64> {
    for x in [p, q] {
        if x.0 >= img.height() || x.1 >= img.width() {
            return Err(Error::NotNeighbors(p, q));
        }
    }
    GradientField::new(img).weight(p, q)
}

/// Graph over all pixels with 8-neighbour edges.
///
/// Edge count is `4 W H - 3 (W + H) + 2`.
pub fn scissors_graph<T: Scalar>(img: &GrayImage) -> Result<(Graph<T>, PixelMap)> {
    let (w, h) = (img.width(), img.height());
    if w < 2 || h < 2 {
        return Err(Error::ImageTooSmall(w, h));
    }
    let field = GradientField::new(img);
    let map = PixelMap { width: w, height: h };
    let mut edges = Vec::with_capacity(4 * w * h);
    for r in 0..h {
        for c in 0..w {
            let p = (r, c);
            let mut push = |q: Pixel| -> Result<()> {
                edges.push((map.vertex(p)?, map.vertex(q)?, T::lit(field.weight(p, q)?)));
                Ok(())
            };
            if c + 1 < w {
                push((r, c + 1))?;
            }
            if r + 1 < h {
                push((r + 1, c))?;
                if c + 1 < w {
                    push((r + 1, c + 1))?;
                }
                if c > 0 {
                    push((r + 1, c - 1))?;
                }
            }
        }
    }
    Ok((Graph::from_edges(w * h, &edges)?, map))
}

/// Expected 8-neighbour edge count for a `width x height` grid.
pub fn scissors_edge_count(width: usize, height: usize) -> usize {
    (4 * width * height + 2).saturating_sub(3 * (width + height))
}

/// Bright disk (200) on a dark background (30), with its true boundary:
/// every pixel that has a 4-neighbour of the other class.
pub fn synthetic_disk(width: usize, height: usize, center: (f64, f64), radius: f64) -> Result<(GrayImage, Vec<Pixel>)> {
    let inside = |r: usize, c: usize| {
        let (dr, dc) = (r as f64 - center.0, c as f64 - center.1);
        dr * dr + dc * dc <= radius * radius
    };
    let img = GrayImage::from_fn(width, height, |r, c| if inside(r, c) { 200 } else { 30 })?;
    let mut boundary = Vec::new();
    for r in 0..height {
        for c in 0..width {
            let here = inside(r, c);
            let mut nbrs = Vec::with_capacity(4);
            if r > 0 {
                nbrs.push((r - 1, c));
            }
            if r + 1 < height {
                nbrs.push((r + 1, c));
            }
            if c > 0 {
                nbrs.push((r, c - 1));
            }
            if c + 1 < width {
                nbrs.push((r, c + 1));
            }
            if nbrs.iter().any(|&(a, b)| inside(a, b) != here) {
                boundary.push((r, c));
            }
        }
    }
    Ok((img, boundary))
}
