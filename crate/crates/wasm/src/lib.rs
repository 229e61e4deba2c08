//! Browser bindings: Schlieren textures of conformal fields and the escape-point
//! potential, computed by ldg-core. Points cross the boundary as flat [x0, y0, x1, y1, ...].

use wasm_bindgen::prelude::*;

use ldg_core::asymptotics::sweep::radius_sweep;
use ldg_core::conformal::{ConformalMap, EscapeConfig};
use ldg_core::energy::w_ldg_unchecked;
use ldg_core::grid::make_grid;
use ldg_core::render::{render_director, Colormap};
use ldg_core::{Domain, MaterialParams};

#[wasm_bindgen]
pub struct Image {
    width: usize,
    height: usize,
    rgba: Vec<u8>,
    w_ldg: f64,
}

#[wasm_bindgen]
impl Image {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major RGBA, top row first.
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// W_LdG of the field for unit material constants.
    #[wasm_bindgen(getter)]
    pub fn w_ldg(&self) -> f64 {
        self.w_ldg
    }
}

fn unit_params() -> MaterialParams {
    MaterialParams::new(1.0, 1.0, 1.0, 0.1).expect("unit constants are valid")
}

fn domain(name: &str) -> Result<Domain, String> {
    match name {
        "disk" => Ok(Domain::Disk),
        "square" => Ok(Domain::Square),
        _ => Err(format!("unknown domain '{name}'")),
    }
}

fn pairs(flat: &[f64]) -> Result<Vec<[f64; 2]>, String> {
    if flat.len() % 2 != 0 {
        return Err("points need an even number of coordinates".into());
    }
    Ok(flat.chunks(2).map(|c| [c[0], c[1]]).collect())
}

fn colormap(hue: bool) -> Colormap {
    if hue {
        Colormap::Hue
    } else {
        Colormap::Gray
    }
}

fn image(map: &ConformalMap, hue: bool) -> Image {
    let n = map.field();
    let t = render_director(&n, colormap(hue));
    Image { width: t.width, height: t.height, rgba: t.to_rgba(), w_ldg: w_ldg_unchecked(&n, &unit_params()) }
}

pub fn escape_image(domain_name: &str, resolution: usize, points: &[f64], alpha: f64, hue: bool) -> Result<Image, String> {
    let grid = make_grid(domain(domain_name)?, resolution).map_err(|e| e.to_string())?;
    let pts = pairs(points)?;
    let cfg = EscapeConfig { alpha, ..EscapeConfig::new(pts.len() as i32, pts) };
    Ok(image(&ConformalMap::new(&cfg, &grid).map_err(|e| e.to_string())?, hue))
}

pub fn mixed_image(domain_name: &str, resolution: usize, zeros: &[f64], poles: &[f64], alpha: f64, hue: bool) -> Result<Image, String> {
    let grid = make_grid(domain(domain_name)?, resolution).map_err(|e| e.to_string())?;
    let map = ConformalMap::mixed(&pairs(zeros)?, &pairs(poles)?, alpha, &grid).map_err(|e| e.to_string())?;
    Ok(image(&map, hue))
}

/// W_LdG of the m = 1 disk field with its escape point at each radius.
pub fn escape_potential(resolution: usize, radii: &[f64]) -> Result<Vec<f64>, String> {
    let grid = make_grid(Domain::Disk, resolution).map_err(|e| e.to_string())?;
    let p = unit_params();
    radius_sweep(radii)
        .iter()
        .map(|cfg| Ok(w_ldg_unchecked(&ConformalMap::new(cfg, &grid).map_err(|e| e.to_string())?.field(), &p)))
        .collect()
}

/// Crossed-polarizer texture of the degree-k field escaping at `points`.
#[wasm_bindgen(js_name = escapeTexture)]
pub fn escape_texture(domain: &str, resolution: usize, points: &[f64], alpha: f64, hue: bool) -> Result<Image, JsError> {
    escape_image(domain, resolution, points, alpha, hue).map_err(|e| JsError::new(&e))
}

/// Texture of the field with vertical points at `zeros` and antipodal points at `poles`.
#[wasm_bindgen(js_name = mixedTexture)]
pub fn mixed_texture(domain: &str, resolution: usize, zeros: &[f64], poles: &[f64], alpha: f64, hue: bool) -> Result<Image, JsError> {
    mixed_image(domain, resolution, zeros, poles, alpha, hue).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = escapePotential)]
pub fn escape_potential_js(resolution: usize, radii: &[f64]) -> Result<Vec<f64>, JsError> {
    escape_potential(resolution, radii).map_err(|e| JsError::new(&e))
}
