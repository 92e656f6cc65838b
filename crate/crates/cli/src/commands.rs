use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use plateau_core::chain_solver::{self, BoundaryMode, PlateauChainProblem};
use plateau_core::complex::{Chain, Ring, SimplicialComplex, Subcomplex};
use plateau_core::douglas::{self, BoundaryParam, ClosedCurve};
use plateau_core::grid::{self, CubicalGrid, FaceSet, FfInput};
use plateau_core::homology::{self, AdmissibilityProblem, Generator};
use plateau_core::measure;
use plateau_core::reference;
use plateau_core::scene::{self, EvolveBlock, GridBlock, Scene};
use plateau_core::sliding;
use plateau_core::Vec3;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::{Common, DEFAULT_SEED};

/// A loaded scene with its directory (for relative paths) and run settings.
struct Run {
    scene: Scene,
    dir: PathBuf,
    seed: u64,
    out: Option<PathBuf>,
    started: Instant,
}

impl Run {
    fn load(common: &Common) -> Result<Run, CliError> {
        let scene = Scene::load(&common.scene)?;
        let dir = common.scene.parent().map(Path::to_path_buf).unwrap_or_default();
        let seed = common.seed.or(scene.seed).unwrap_or(DEFAULT_SEED);
        let out = common.out.clone().or_else(|| scene.output.as_ref().map(|o| dir.join(&o.dir)));
        if let Some(out) = &out {
            std::fs::create_dir_all(out).map_err(|e| CliError::io(format!("cannot create {}: {e}", out.display())))?;
        }
        Ok(Run { scene, dir, seed, out, started: Instant::now() })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_relative() {
            self.dir.join(p)
        } else {
            p.to_path_buf()
        }
    }

    fn artifact(&self, name: &str) -> Option<PathBuf> {
        self.out.as_ref().map(|d| d.join(name))
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        if let Some(path) = self.artifact(name) {
            let text = serde_json::to_string_pretty(value).expect("artifacts serialize");
            std::fs::write(&path, text + "\n").map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }

    /// Writes `report.json` and `metadata.json`, returning the report.
    fn finish(&self, command: &str, report: Value) -> Result<Value, CliError> {
        let report = json!({ "command": command, "seed": self.seed, "report": report });
        self.write_json("report.json", &report)?;
        let meta = json!({
            "elapsed_seconds": self.started.elapsed().as_secs_f64(),
            "finished_unix": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            "seed": self.seed,
            "threads": rayon::current_num_threads(),
            "version": env!("CARGO_PKG_VERSION"),
        });
        self.write_json("metadata.json", &meta)?;
        Ok(report)
    }
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn douglas(common: &Common) -> Result<Value, CliError> {
    let run = Run::load(common)?;
    let block = run.scene.douglas.as_ref().ok_or_else(|| CliError::missing_block("douglas"))?;
    let curve = match (&block.curve, block.piece) {
        (Some(c), _) => c.clone(),
        (None, Some(p)) => ClosedCurve::from_piece(&run.scene.boundary[p])?,
        (None, None) => return Err(CliError::schema("douglas block needs `curve` or `piece`")),
    };
    let start = BoundaryParam::uniform(curve, block.samples)?;
    let (param, stats) = douglas::minimize_douglas(start, &block.options);
    let map = douglas::harmonic_extension(&param, block.rings, block.angles)?;
    let area = douglas::area_integral(&map);
    if let Some(path) = run.artifact("douglas.obj") {
        let (v, t) = map.triangles();
        scene::export_obj(&path, &v, &t, None)?;
    }
    run.write_json("knots.json", &param.knots)?;
    let energy = stats.energy;
    let report = json!({
        "samples": param.len(),
        "initial_energy": stats.initial_energy,
        "energy": energy,
        "area": area,
        "relative_gap": (area - energy).abs() / energy,
        "flat_area": param.curve.flat_area(),
        "iterations": stats.iterations,
        "converged": stats.converged,
    });
    run.finish("douglas", report)
}

pub fn evolve(common: &Common, snapshot_every: Option<usize>) -> Result<Value, CliError> {
    let run = Run::load(common)?;
    let mut scene = run.scene.clone();
    if let Some(scene::SurfaceSpec::Mesh { path, .. }) = &mut scene.surface {
        *path = run.resolve(path);
    }
    let block = scene.evolve.clone().unwrap_or_default();
    let EvolveBlock { options, probe, .. } = &block;
    let every = snapshot_every.unwrap_or(block.snapshot_every);
    let mut mesh = scene::build_initial_surface(&scene)?;
    if let Some(path) = run.artifact("initial.obj") {
        scene::export_mesh(&path, &mesh)?;
    }
    let mut snapshot_error = None;
    let report = sliding::evolve_with(&mut mesh, options, |it, m| {
        if every > 0 && it % every == 0 && snapshot_error.is_none() {
            if let Some(path) = run.artifact(&format!("step_{it:06}.obj")) {
                snapshot_error = scene::export_mesh(&path, m).err();
            }
        }
    })?;
    if let Some(e) = snapshot_error {
        return Err(e.into());
    }
    if let Some(path) = run.artifact("final.obj") {
        scene::export_mesh(&path, &mesh)?;
    }
    let monotone = report.area_history.windows(2).all(|w| w[1] <= w[0]);
    let stats = sliding::singular_edge_stats(&mesh);
    let probe = probe.as_ref().map(|p| {
        let mut p = p.clone();
        p.seed = run.seed;
        sliding::check_local_sliding_minimality(&mesh, &p)
    });
    run.write_json("area_history.json", &report.area_history)?;
    let out = json!({
        "initial_area": report.initial_area,
        "final_area": report.final_area,
        "iterations": report.iterations,
        "converged": report.converged,
        "stop_reason": report.stop_reason,
        "final_gradient": report.final_gradient,
        "max_constraint_residual": report.max_constraint_residual,
        "collapsed_triangles": report.collapsed_triangles,
        "monotone": monotone,
        "vertices": mesh.vertices.len(),
        "triangles": mesh.triangles.len(),
        "angles": {
            "triple_edges": stats.triple_edges,
            "mean": stats.mean,
            "min": stats.min,
            "max": stats.max,
            "histogram": stats.histogram,
        },
        "probe": probe.map(|p| to_value(&p)),
    });
    run.finish("evolve", out)
}

fn simplices_subcomplex(host: &SimplicialComplex, simplices: &[Vec<usize>]) -> Result<Subcomplex, CliError> {
    Ok(Subcomplex::from_simplices(host, simplices)?)
}

pub fn chain_solve(common: &Common) -> Result<Value, CliError> {
    let run = Run::load(common)?;
    let block = run.scene.chain.as_ref().ok_or_else(|| CliError::missing_block("chain"))?;
    let complex = SimplicialComplex::from_json(&block.complex)?;
    let boundary = Chain::from_json(&block.boundary)?;
    let mut problem = PlateauChainProblem::new(complex, boundary, block.objective).with_bound(block.bound);
    if let Some(gamma) = &block.homologous_on {
        let sub = simplices_subcomplex(&problem.complex, gamma)?;
        problem = problem.with_mode(BoundaryMode::HomologousOn(sub));
    }
    let solution = chain_solver::solve_problem(&problem)?;
    let verify = chain_solver::verify_chain(&problem, &solution.chain)?;
    run.write_json("chain.json", &solution.chain.to_json())?;
    let report = json!({
        "objective": block.objective,
        "value": solution.value,
        "chain": solution.chain.to_json(),
        "homology_witness": solution.homology_witness.as_ref().map(Chain::to_json),
        "certificate": to_value(&solution.certificate),
        "verify": to_value(&verify),
        "verified": verify.passes(),
    });
    run.finish("chain-solve", report)
}

pub fn homology(common: &Common) -> Result<Value, CliError> {
    let run = Run::load(common)?;
    let block = run.scene.homology.as_ref().ok_or_else(|| CliError::missing_block("homology"))?;
    let ambient = SimplicialComplex::from_json(&block.complex)?;
    let boundary = simplices_subcomplex(&ambient, &block.boundary)?;
    let ring = Ring::from_modulus(block.modulus)?;
    let generators = block
        .generators
        .iter()
        .map(|g| Ok(Generator { name: g.name.clone(), cycle: Chain::from_json(&g.chain)?.reduce(ring) }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let problem = AdmissibilityProblem { ambient, boundary, generators, ring };
    let report = homology::reifenberg_admissible(&problem)?;
    run.finish("homology", to_value(&report))
}

fn grid_setup(run: &Run, block: &GridBlock) -> Result<(CubicalGrid, grid::SafeRegion), CliError> {
    let g = CubicalGrid::covering(block.lo, block.hi, block.level)?;
    let region = grid::mark_safe_region(&g, &run.scene.boundary, block.margin_cells * g.side())?;
    Ok((g, region))
}

fn projected(run: &Run, block: &GridBlock, g: &CubicalGrid, region: &grid::SafeRegion) -> Result<grid::FfResult, CliError> {
    let input = match &block.input {
        Some(input) => input.clone(),
        None => {
            let mesh = scene::build_initial_surface(&run.scene)?;
            let tris: Vec<[Vec3; 3]> = mesh.triangles.iter().map(|t| t.map(|v| mesh.vertices[v])).collect();
            FfInput::from_triangles(&tris)
        }
    };
    Ok(grid::ff_project(&input, g, region, run.seed, None)?)
}

fn faceset_report(g: &CubicalGrid, faces: &FaceSet) -> Value {
    json!({
        "faces": faces.faces,
        "face_count": faces.faces.len(),
        "area": measure::hausdorff_of_faceset(faces, g),
        "residue_edges": faces.residue_edges.len(),
    })
}

pub fn ff_project(common: &Common) -> Result<Value, CliError> {
    let run = Run::load(common)?;
    let block = run.scene.grid.as_ref().ok_or_else(|| CliError::missing_block("grid"))?;
    let (g, region) = grid_setup(&run, block)?;
    let result = projected(&run, block, &g, &region)?;
    run.write_json("faces.json", &result.faces)?;
    run.write_json("stage_log.json", &result.log)?;
    if let Some(path) = run.artifact("faces.obj") {
        scene::export_faceset(&path, &result.faces.triangles(&g))?;
    }
    let area = measure::hausdorff_of_faceset(&result.faces, &g);
    let report = json!({
        "grid": to_value(&g),
        "safe_cubes": region.v.len(),
        "inner_cubes": region.v_prime.len(),
        "input_area": result.input_area,
        "output": faceset_report(&g, &result.faces),
        "area_ratio": if result.input_area > 0.0 { Some(area / result.input_area) } else { None },
        "cube_centers": result.log.cube_centers.len(),
        "face_centers": result.log.face_centers.len(),
        "untouched_polygons": result.untouched_polygons.len(),
        "untouched_curves": result.untouched_curves.len(),
    });
    run.finish("ff-project", report)
}

pub fn grid_min(common: &Common) -> Result<Value, CliError> {
    let run = Run::load(common)?;
    let block = run.scene.grid.as_ref().ok_or_else(|| CliError::missing_block("grid"))?;
    let (g, region) = grid_setup(&run, block)?;
    let start = match &block.faces {
        Some(path) => {
            let path = run.resolve(path);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
            let faces: FaceSet = serde_json::from_str(&text).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
            if let Some(&bad) = faces.faces.iter().find(|&&f| f >= g.num_faces()) {
                return Err(grid::GridError::BadFace(bad).into());
            }
            faces
        }
        None => projected(&run, block, &g, &region)?.faces,
    };
    let (best, cert) = grid::discrete_minimize(&g, &start, &region, run.seed);
    run.write_json("faces.json", &best)?;
    if let Some(path) = run.artifact("faces.obj") {
        scene::export_faceset(&path, &best.triangles(&g))?;
    }
    let report = json!({
        "input": faceset_report(&g, &start),
        "output": faceset_report(&g, &best),
        "certificate": to_value(&cert),
    });
    run.finish("grid-min", report)
}

fn read_samples(path: &Path) -> Result<Vec<Vec3>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let xs: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::schema(format!("{}:{}: {e}", path.display(), n + 1)))?;
        if xs.len() != 3 {
            return Err(CliError::schema(format!("{}:{}: expected three coordinates", path.display(), n + 1)));
        }
        out.push(Vec3::new(xs[0], xs[1], xs[2]));
    }
    Ok(out)
}

pub fn measure(common: &Common) -> Result<Value, CliError> {
    let run = Run::load(common)?;
    let block = run.scene.measure.as_ref().ok_or_else(|| CliError::missing_block("measure"))?;
    let (samples, surface_area) = match &block.samples_file {
        Some(p) => (read_samples(&run.resolve(p))?, None),
        None => {
            let mesh = scene::build_initial_surface(&run.scene)?;
            let tris: Vec<[Vec3; 3]> = mesh.triangles.iter().map(|t| t.map(|v| mesh.vertices[v])).collect();
            (measure::sample_triangles(&tris, block.density, run.seed), Some(sliding::total_area(&mesh)))
        }
    };
    let est = measure::hausdorff_upper(&samples, block.dimension, block.delta)?;
    run.write_json("cover.json", &est.cover)?;
    let report = json!({
        "dimension": est.dimension,
        "delta": est.delta,
        "samples": samples.len(),
        "balls": est.cover.len(),
        "value": est.value,
        "label": est.label,
        "resolution": est.resolution,
        "resolved": est.delta >= est.resolution,
        "surface_area": surface_area,
        "cover_valid": est.audit(&samples),
    });
    run.finish("measure", report)
}

pub fn oracle(common: &Common) -> Result<Value, CliError> {
    let run = Run::load(common)?;
    let block = run.scene.oracle.as_ref().ok_or_else(|| CliError::missing_block("oracle"))?;
    let mut rows = Vec::new();
    for &r in &block.radii {
        for &h in &block.half_separations {
            rows.push(to_value(&reference::oracle_row(r, h)?));
        }
    }
    let mut thresholds = Vec::new();
    for &r in &block.radii {
        reference::TwoCircleConfig::new(r, 1.0)?;
        thresholds.push(json!({ "radius": r, "thresholds": to_value(&reference::thresholds(r)) }));
    }
    let report = json!({
        "rows": rows,
        "thresholds": thresholds,
        "cones": to_value(&reference::cone_densities()),
    });
    run.finish("oracle", report)
}
