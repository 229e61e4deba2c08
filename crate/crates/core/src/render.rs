//! Crossed-polarizer textures of director fields, one pixel per grid node.

use serde::{Deserialize, Serialize};

use crate::grid::{DirectorField, DomainGrid, NodeKind, QField};
use crate::qtensor::{principal_eigenvector, Vec3, E1, E2, E3};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Colormap {
    #[default]
    Gray,
    Hue,
}

/// Row 0 is the top of the image (largest y).
#[derive(Clone, Debug, PartialEq)]
pub struct Texture {
    pub width: usize,
    pub height: usize,
    pub colormap: Colormap,
    /// One byte per pixel in gray mode, three otherwise.
    pub data: Vec<u8>,
    pub undefined: usize,
    pub active: usize,
}

impl Texture {
    pub fn undefined_fraction(&self) -> f64 {
        if self.active == 0 {
            0.0
        } else {
            self.undefined as f64 / self.active as f64
        }
    }

    pub fn to_rgba(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 * self.width * self.height);
        match self.colormap {
            Colormap::Gray => self.data.iter().for_each(|&v| out.extend_from_slice(&[v, v, v, 255])),
            Colormap::Hue => self.data.chunks(3).for_each(|c| out.extend_from_slice(&[c[0], c[1], c[2], 255])),
        }
        out
    }
}

/// 4 [n1 n2 / (n1^2 + n2^2)]^2, or None when the planar part vanishes.
pub fn schlieren_intensity(n: &Vec3) -> Option<f64> {
    let r2 = n[0] * n[0] + n[1] * n[1];
    if r2 < 1e-24 {
        return None;
    }
    let v = n[0] * n[1] / r2;
    Some((4.0 * v * v).min(1.0))
}

fn hue_rgb(angle: f64) -> [u8; 3] {
    let h = angle.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU * 6.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as usize {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    let q = |v: f64| (255.0 * v).round() as u8;
    [q(r), q(g), q(b)]
}

fn render(grid: &DomainGrid, colormap: Colormap, director: impl Fn(usize) -> Option<Vec3>) -> Texture {
    let (width, height) = (grid.nx, grid.ny);
    let px = if colormap == Colormap::Gray { 1 } else { 3 };
    let mut data = vec![0u8; px * width * height];
    let (mut undefined, mut active) = (0, 0);
    for j in 0..height {
        for i in 0..width {
            let k = grid.index(i, j);
            if grid.kind(k) == NodeKind::Exterior {
                continue;
            }
            active += 1;
            let at = px * ((height - 1 - j) * width + i);
            let n = director(k);
            let value = n.and_then(|n| schlieren_intensity(&n).map(|v| (n, v)));
            let Some((n, v)) = value else {
                undefined += 1;
                data[at..at + px].fill(128);
                continue;
            };
            match colormap {
                Colormap::Gray => data[at] = (255.0 * v).round() as u8,
                Colormap::Hue => data[at..at + 3].copy_from_slice(&hue_rgb(n[1].atan2(n[0]))),
            }
        }
    }
    Texture { width, height, colormap, data, undefined, active }
}

pub fn render_director(n: &DirectorField, colormap: Colormap) -> Texture {
    render(n.grid(), colormap, |k| Some(n.get(k)))
}

/// Uses the principal eigenvector, sign-aligned with e3 where possible.
pub fn render_q(q: &QField, colormap: Colormap) -> Texture {
    render(q.grid(), colormap, |k| {
        let v = q.get(k);
        [E3, E1, E2].iter().find_map(|r| principal_eigenvector(&v, r).ok())
    })
}
