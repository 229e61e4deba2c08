use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde_json::{json, Value};

use ldg_core::asymptotics::ladder::{
    b0_criteria, b0_initial, check_b0, check_expansion, expansion_criteria, limit_state, run_b0_ladder, run_ladder, B0Config,
    BoundaryData, Criterion, LadderConfig,
};
use ldg_core::asymptotics::sweep::{escape_sweep, radius_sweep, separation_sweep, SweepMode};
use ldg_core::asymptotics::{relative_l2, trace_component};
use ldg_core::conformal::{b0_conformal_cfield, boundary_director, degree_of_boundary, ConformalMap, EscapeConfig};
use ldg_core::energy::{b0_limit_correction, b0_q_field, b0_rho_prediction, corrected_minimizer, dirichlet_integral, ldg_energy, w_ldg};
use ldg_core::grid::io::FieldFile;
use ldg_core::grid::make_grid;
use ldg_core::grid::stencil::dirichlet_energy;
use ldg_core::render::{render_director, render_q, Colormap, Texture};
use ldg_core::solvers::{ldg_gradient_flow, s4_harmonic_flow, FlowConfig, StepPolicy};
use ldg_core::{DomainGrid, MaterialParams};

use crate::args::*;
use crate::manifest::{write_json, write_sidecar, GridDescriptor, RunManifest};
use crate::Failure;

/// Largest share of undefined Schlieren pixels accepted without a usage error.
const MAX_UNDEFINED: f64 = 0.01;

pub fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Conformal(a) => conformal(&a),
        Command::Minimize(a) => minimize(&a),
        Command::VerifyExpansion(a) => verify(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Schlieren(a) => schlieren(&a),
    }
}

fn escape_config(p: &ProblemArgs) -> Result<EscapeConfig, Failure> {
    let cfg = EscapeConfig { m: p.m, points: p.escape.0.clone(), alpha: p.alpha, orientation: p.orientation.into() };
    cfg.validate(&p.domain)?;
    Ok(cfg)
}

fn params(m: &MaterialArgs, eps: f64) -> Result<MaterialParams, Failure> {
    Ok(MaterialParams::new(m.a2, m.b2, m.c2, eps)?)
}

fn flow(s: &SolverArgs, init: &str) -> FlowConfig {
    let policy = match (s.tau, s.backtracking) {
        (Some(tau), false) => StepPolicy::Fixed { tau },
        (Some(tau), true) => StepPolicy::Backtracking { tau },
        (None, _) => StepPolicy::ConjugateGradient,
    };
    FlowConfig {
        policy,
        max_iterations: s.max_iterations,
        energy_tol: s.energy_tol,
        residual_tol: s.residual_tol,
        init: init.into(),
        ..FlowConfig::default()
    }
}

fn boundary_data(kind: BoundaryArg, amplitude: f64, p: &ProblemArgs) -> Result<BoundaryData, Failure> {
    Ok(match kind {
        BoundaryArg::Conformal => BoundaryData::Conformal(escape_config(p)?),
        BoundaryArg::Perturbed => BoundaryData::Perturbed { amplitude },
    })
}

fn material_json(p: &MaterialParams) -> Value {
    json!({ "a2": p.a2, "b2": p.b2, "c2": p.c2, "eps": p.eps, "s_plus": p.s_plus(), "mu": p.mu(), "nu": p.nu() })
}

fn write_field(path: &Path, file: &FieldFile) -> Result<(), Failure> {
    file.write(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn conformal(a: &ConformalArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    let cfg = escape_config(&a.problem)?;
    let grid = make_grid(a.problem.domain, a.problem.grid)?;
    let map = ConformalMap::new(&cfg, &grid)?;
    let n = map.field();
    let samples = grid.domain.boundary_samples(4096);
    let degree = degree_of_boundary(&boundary_director(&map, &samples))?;
    let p = params(&a.material, 1.0)?;
    write_field(&a.out, &FieldFile::from_director(&n))?;
    let mut m = RunManifest::new("conformal", a);
    m.grid = Some(GridDescriptor::from(grid.as_ref()));
    m.outputs.push(a.out.clone());
    if let Some(q) = &a.q_out {
        write_field(q, &FieldFile::from_q(&n.uniaxial(p.s_plus())))?;
        m.outputs.push(q.clone());
        m.material = Some(material_json(&p));
    }
    let w = w_ldg(&n, &p).ok();
    m.wall_time_s = start.elapsed().as_secs_f64();
    let results = json!({
        "escape": cfg,
        "boundary_degree": degree,
        "dirichlet_integral": dirichlet_integral(&n),
        "w_ldg": w,
    });
    write_sidecar(&a.out, &m, results.clone())?;
    if let Some(q) = &a.q_out {
        write_sidecar(q, &m, results)?;
    }
    println!("boundary degree {degree}; wrote {}", a.out.display());
    Ok(0)
}

fn b0_points(a: &B0Args, p: &ProblemArgs) -> Vec<[f64; 2]> {
    a.poles.as_ref().map(|v| v.0.clone()).unwrap_or_else(|| p.escape.0.clone())
}

fn minimize(a: &MinimizeArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    let p = params(&a.material, a.eps)?;
    let grid = make_grid(a.problem.domain, a.problem.grid)?;
    let tag = match a.init {
        InitArg::Corrected => "corrected",
        InitArg::Uniaxial => "uniaxial",
    };
    let cfg = flow(&a.solver, tag);
    let mut m = RunManifest::new("minimize", a);
    m.grid = Some(GridDescriptor::from(grid.as_ref()));
    m.material = Some(material_json(&p));
    m.outputs.push(a.out.clone());
    let (q, report, mut results) = if p.b2 == 0.0 {
        let seed = b0_conformal_cfield(a.b0.k, &b0_points(&a.b0, &a.problem), a.b0.kappa, &grid)?;
        let (c0, c_report) = s4_harmonic_flow(&seed, &cfg)?;
        let q0 = b0_q_field(&c0, &p);
        let rho = b0_rho_prediction(&q0, &p)?;
        let init = match a.init {
            InitArg::Corrected => b0_initial(&q0, &rho, p.eps),
            InitArg::Uniaxial => q0.clone(),
        };
        let (q, report) = ldg_gradient_flow(&init, &p, &cfg)?;
        let e0 = dirichlet_energy(&grid, q0.values());
        let g0 = b0_limit_correction(&q0, &p)?;
        let inner = grid.interior_beyond(3.0 * grid.h);
        let trace = relative_l2(&q, &inner, &trace_component(&q, &q0, p.eps), &rho);
        let energy = ldg_energy(&q, &p).relative_to(e0, p.eps);
        let results = json!({ "regime": "b2 = 0", "limit_report": c_report, "energy": energy, "g0": g0, "trace_error": trace });
        (q, report, results)
    } else {
        let boundary = boundary_data(a.boundary, a.amplitude, &a.problem)?;
        let limit = limit_state(&grid, &boundary, &p, &cfg)?;
        let init = match a.init {
            InitArg::Corrected => corrected_minimizer(&limit.n0, &p)?,
            InitArg::Uniaxial => limit.n0.uniaxial(p.s_plus()),
        };
        let (q, report) = ldg_gradient_flow(&init, &p, &cfg)?;
        let energy = ldg_energy(&q, &p).relative_to(limit.e0, p.eps);
        let results = json!({
            "boundary": boundary,
            "limit_report": limit.report,
            "energy": energy,
            "h0": limit.h0,
            "h0_closed": limit.h0_closed,
            "w_ldg_scaled": limit.w_ldg,
        });
        (q, report, results)
    };
    write_field(&a.out, &FieldFile::from_q(&q))?;
    results["report"] = serde_json::to_value(&report).unwrap_or(Value::Null);
    results["converged"] = json!(report.converged);
    m.wall_time_s = start.elapsed().as_secs_f64();
    write_sidecar(&a.out, &m, results)?;
    println!(
        "{} after {} iterations ({}); energy {}; wrote {}",
        if report.converged { "converged" } else { "NOT converged" },
        report.iterations,
        report.stop_reason,
        report.final_energy,
        a.out.display()
    );
    Ok(if report.converged { 0 } else { 4 })
}

fn print_table(rows: &[Criterion]) {
    for r in rows {
        let status = match r.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "    ",
        };
        println!("{status}  {:<52} {:>16.8}  {}", r.label, r.value, r.target);
    }
}

fn verify(a: &VerifyArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    let eps = a.eps_list.0.clone();
    let p = params(&a.material, eps.first().copied().unwrap_or(0.1))?;
    let cfg = flow(&a.solver, "corrected");
    let mut m = RunManifest::new("verify-expansion", a);
    m.material = Some(material_json(&p));
    let (rows, converged, report) = if p.b2 == 0.0 {
        let c = B0Config {
            domain: a.problem.domain,
            resolution: a.problem.grid,
            k: a.b0.k,
            points: b0_points(&a.b0, &a.problem),
            kappa: a.b0.kappa,
            params: p,
            eps,
            flow: cfg,
        };
        let run = run_b0_ladder(&c)?;
        m.grid = Some(GridDescriptor::from(run.q0.grid().as_ref()));
        let check = check_b0(&run);
        let converged = run.c_report.converged && check.converged.iter().all(|&c| c);
        (b0_criteria(&check), converged, serde_json::to_value(&check).unwrap_or(Value::Null))
    } else {
        let c = LadderConfig {
            domain: a.problem.domain,
            resolution: a.problem.grid,
            boundary: boundary_data(a.boundary, a.amplitude, &a.problem)?,
            params: p,
            eps,
            flow: cfg,
            warm_start: a.warm_start,
        };
        let run = run_ladder(&c)?;
        m.grid = Some(GridDescriptor::from(run.grid().as_ref()));
        let check = check_expansion(&run)?;
        for s in &check.steps {
            if let Some(e) = &s.decomposition_error {
                eprintln!("eps = {}: {e}", s.eps);
            }
        }
        (expansion_criteria(&check), run.all_converged(), serde_json::to_value(&check).unwrap_or(Value::Null))
    };
    print_table(&rows);
    m.wall_time_s = start.elapsed().as_secs_f64();
    if let Some(path) = &a.report {
        m.outputs.push(path.clone());
        write_json(path, &json!({ "manifest": m, "criteria": rows, "check": report }))?;
    }
    if !converged {
        eprintln!("some solves stopped at the iteration cap");
        return Ok(4);
    }
    Ok(if rows.iter().any(|r| r.pass == Some(false)) { 5 } else { 0 })
}

fn sweep(a: &SweepArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    let configs: Vec<EscapeConfig> = match (&a.radius_range, &a.separation_range, &a.configs) {
        (Some(r), None, None) => radius_sweep(&r.0),
        (None, Some(d), None) => separation_sweep(&d.0),
        (None, None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
        _ => return Err(Failure::usage("give exactly one of --radius-range, --separation-range, --configs".into())),
    };
    for c in &configs {
        c.validate(&a.domain)?;
    }
    let grid: Arc<DomainGrid> = make_grid(a.domain, a.grid)?;
    let p = params(&a.material, a.eps_list.0.first().copied().unwrap_or(0.1))?;
    let mode = match a.mode {
        ModeArg::Formula => SweepMode::Formula,
        ModeArg::FullSolve => SweepMode::FullSolve,
    };
    let table = escape_sweep(&configs, &grid, &p, mode, &a.eps_list.0, &flow(&a.solver, "corrected"))?;
    match &a.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            table.write_csv(BufWriter::new(f))?;
            let mut m = RunManifest::new("sweep", a);
            m.grid = Some(GridDescriptor::from(grid.as_ref()));
            m.material = Some(material_json(&p));
            m.outputs.push(path.clone());
            m.wall_time_s = start.elapsed().as_secs_f64();
            write_sidecar(path, &m, json!({ "rows": table.rows.len(), "configs": configs }))?;
        }
        None => table.write_csv(std::io::stdout().lock())?,
    }
    Ok(0)
}

fn write_png(path: &Path, t: &Texture) -> Result<(), Failure> {
    let io = |e: String| Failure::io(format!("{}: {e}", path.display()));
    let f = File::create(path).map_err(|e| io(e.to_string()))?;
    let mut enc = png::Encoder::new(BufWriter::new(f), t.width as u32, t.height as u32);
    enc.set_color(match t.colormap {
        Colormap::Gray => png::ColorType::Grayscale,
        Colormap::Hue => png::ColorType::Rgb,
    });
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header().map_err(|e| io(e.to_string()))?;
    w.write_image_data(&t.data).map_err(|e| io(e.to_string()))?;
    w.finish().map_err(|e| io(e.to_string()))
}

fn schlieren(a: &SchlierenArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    let file = FieldFile::read(&a.input).map_err(|e| Failure::io(format!("{}: {e}", a.input.display())))?;
    let colormap = match a.colormap {
        ColormapArg::Gray => Colormap::Gray,
        ColormapArg::Hue => Colormap::Hue,
    };
    let texture = match file.components {
        3 => render_director(&file.to_director()?, colormap),
        _ => render_q(&file.to_q()?, colormap),
    };
    write_png(&a.out, &texture)?;
    let mut m = RunManifest::new("schlieren", a);
    m.grid = Some(GridDescriptor::from(file.grid.as_ref()));
    m.inputs.push(a.input.clone());
    m.outputs.push(a.out.clone());
    m.wall_time_s = start.elapsed().as_secs_f64();
    let frac = texture.undefined_fraction();
    write_sidecar(&a.out, &m, json!({ "width": texture.width, "height": texture.height, "undefined_pixels": texture.undefined, "undefined_fraction": frac }))?;
    if frac > MAX_UNDEFINED {
        eprintln!("{} of {} pixels have an undefined planar angle", texture.undefined, texture.active);
        return Ok(2);
    }
    Ok(0)
}
