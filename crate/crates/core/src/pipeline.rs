//! End-to-end runs: load, neighbours, surface flags, counting, fitting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::bitgrid::BinaryGrid;
use crate::dimension::{dimension_from_counts, BoxCountSeries, FitResult};
use crate::error::{Error, Result};
use crate::exact::{self, BoxClassification};
use crate::model::Structure;
use crate::neighbors::{build_neighbor_list, NeighborList};
use crate::radii::RadiusType;
use crate::surface::{find_surface_atoms, SurfaceAlgorithm, SurfaceFlags, DEFAULT_NUM_NEIGH_THRESHOLD};
use crate::synth::{generate_structure, ShapeSpec};
use crate::voxel::{self, GridFrame, PointCloud};
use crate::xyz::load_xyz;

/// Parameters of a run. Defaults follow the documented parameter table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inp_file_path: Option<PathBuf>,
    pub rad_type: RadiusType,
    pub rad_mult: f64,
    pub find_surf_alg: SurfaceAlgorithm,
    pub alpha_mult: f64,
    pub num_neigh_threshold: usize,
    pub trim_len: bool,
    pub min_sample: usize,
    pub conf_lvl: f64,
    pub rm_in_surf: bool,
    pub voxel_surf: bool,
    pub num_points: usize,
    pub grid_num: usize,
    pub exact_surf: bool,
    pub min_len_mult: f64,
    pub max_len_mult: f64,
    pub num_cpus: usize,
    pub num_box_len: usize,
    pub out_dir: Option<PathBuf>,
    pub dump_surface: bool,
    pub dump_points: bool,
    pub dump_voxels: bool,
    pub dump_boxes: bool,
    pub verbose: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inp_file_path: None,
            rad_type: RadiusType::Atomic,
            rad_mult: 1.2,
            find_surf_alg: SurfaceAlgorithm::AlphaShape,
            alpha_mult: 2.0,
            num_neigh_threshold: DEFAULT_NUM_NEIGH_THRESHOLD,
            trim_len: true,
            min_sample: 6,
            conf_lvl: 95.0,
            rm_in_surf: true,
            voxel_surf: true,
            num_points: 10000,
            grid_num: 1024,
            exact_surf: true,
            min_len_mult: 0.25,
            max_len_mult: 1.0,
            num_cpus: 8,
            num_box_len: 10,
            out_dir: None,
            dump_surface: false,
            dump_points: false,
            dump_voxels: false,
            dump_boxes: false,
            verbose: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !self.voxel_surf && !self.exact_surf {
            return bad("both voxelSurf and exactSurf are disabled; nothing to run".into());
        }
        if !(self.rad_mult > 0.0 && self.rad_mult.is_finite()) {
            return bad(format!("radMult must be positive, got {}", self.rad_mult));
        }
        if !(self.alpha_mult > 0.0 && self.alpha_mult.is_finite()) {
            return bad(format!("alphaMult must be positive, got {}", self.alpha_mult));
        }
        if self.min_sample < 3 {
            return bad(format!("minSample must be at least 3, got {}", self.min_sample));
        }
        if !(self.conf_lvl > 0.0 && self.conf_lvl < 100.0) {
            return bad(format!("confLvl must lie in (0, 100), got {}", self.conf_lvl));
        }
        if self.num_points == 0 {
            return bad("numPoints must be at least 1".into());
        }
        if self.grid_num < 2 {
            return bad(format!("gridNum must be at least 2, got {}", self.grid_num));
        }
        if !(self.min_len_mult > 0.0) || !(self.max_len_mult > 0.0) {
            return bad("minLenMult and maxLenMult must be positive".into());
        }
        if self.num_cpus == 0 {
            return bad("numCPUs must be at least 1".into());
        }
        if self.num_box_len < 2 {
            return bad(format!("numBoxLen must be at least 2, got {}", self.num_box_len));
        }
        if self.voxel_surf && voxel::default_scales(self.grid_num).len() < self.min_sample {
            return bad(format!(
                "gridNum {} yields {} power-of-two box scales, fewer than minSample {}",
                self.grid_num,
                voxel::default_scales(self.grid_num).len(),
                self.min_sample
            ));
        }
        if self.exact_surf && self.num_box_len < self.min_sample {
            return bad(format!(
                "numBoxLen {} is below minSample {}",
                self.num_box_len, self.min_sample
            ));
        }
        Ok(())
    }

    /// `name = value` lines using the parameter table's names.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let inp = self
            .inp_file_path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default();
        let _ = writeln!(s, "inpFilePath = {inp}");
        let _ = writeln!(s, "radType = {}", self.rad_type);
        let _ = writeln!(s, "radMult = {}", self.rad_mult);
        let _ = writeln!(s, "findSurfAlg = {}", self.find_surf_alg);
        let _ = writeln!(s, "alphaMult = {}", self.alpha_mult);
        let _ = writeln!(s, "numNeighThreshold = {}", self.num_neigh_threshold);
        let _ = writeln!(s, "trimLen = {}", self.trim_len);
        let _ = writeln!(s, "minSample = {}", self.min_sample);
        let _ = writeln!(s, "confLvl = {}", self.conf_lvl);
        let _ = writeln!(s, "rmInSurf = {}", self.rm_in_surf);
        let _ = writeln!(s, "voxelSurf = {}", self.voxel_surf);
        let _ = writeln!(s, "numPoints = {}", self.num_points);
        let _ = writeln!(s, "gridNum = {}", self.grid_num);
        let _ = writeln!(s, "exactSurf = {}", self.exact_surf);
        let _ = writeln!(s, "minLenMult = {}", self.min_len_mult);
        let _ = writeln!(s, "maxLenMult = {}", self.max_len_mult);
        let _ = writeln!(s, "numCPUs = {}", self.num_cpus);
        let _ = writeln!(s, "numBoxLen = {}", self.num_box_len);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub series: BoxCountSeries,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: RunConfig,
    pub n_atoms: usize,
    pub n_surface: usize,
    pub voxel: Option<PipelineResult>,
    pub exact: Option<PipelineResult>,
    /// Wall-clock seconds per stage, in execution order.
    pub timings: Vec<(&'static str, f64)>,
}

impl RunReport {
    pub fn timing(&self, stage: &str) -> Option<f64> {
        self.timings.iter().find(|(s, _)| *s == stage).map(|&(_, t)| t)
    }

    pub fn pipelines(&self) -> impl Iterator<Item = (&'static str, &PipelineResult)> {
        [("VX", self.voxel.as_ref()), ("EX", self.exact.as_ref())]
            .into_iter()
            .filter_map(|(k, p)| p.map(|p| (k, p)))
    }

    /// Machine-readable `key=value` block.
    pub fn key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nAtoms={}", self.n_atoms);
        let _ = writeln!(s, "nSurfAtoms={}", self.n_surface);
        for (tag, p) in self.pipelines() {
            let f = &p.fit;
            let _ = writeln!(s, "dBox{tag}={}", f.d_box);
            let _ = writeln!(s, "ciLow{tag}={}", f.ci.0);
            let _ = writeln!(s, "ciHigh{tag}={}", f.ci.1);
            let _ = writeln!(s, "r2{tag}={}", f.r2);
            let _ = writeln!(s, "lMin{tag}={}", f.l_min);
            let _ = writeln!(s, "lMax{tag}={}", f.l_max);
            let _ = writeln!(s, "pointsUsed{tag}={}", f.points_used);
            let lens: Vec<String> = p.series.lengths.iter().map(|l| l.to_string()).collect();
            let counts: Vec<String> = p.series.counts.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "boxLens{tag}={}", lens.join(","));
            let _ = writeln!(s, "boxCounts{tag}={}", counts.join(","));
        }
        for (stage, t) in &self.timings {
            let _ = writeln!(s, "time_{stage}={t:.6}");
        }
        s
    }

    pub const CSV_HEADER: &'static str = "representation,dBox,ciLow,ciHigh,r2,lMin,lMax,pointsUsed";

    /// One CSV row per representation, without timings.
    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        for (tag, p) in self.pipelines() {
            let f = &p.fit;
            let _ = writeln!(
                s,
                "{tag},{},{},{},{},{},{},{}",
                f.d_box, f.ci.0, f.ci.1, f.r2, f.l_min, f.l_max, f.points_used
            );
        }
        s
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "atoms: {} ({} on surface)", self.n_atoms, self.n_surface);
        for (tag, p) in self.pipelines() {
            let f = &p.fit;
            let name = if tag == "VX" { "voxel" } else { "exact" };
            let _ = writeln!(
                s,
                "{name}: D_box = {:.4} [{:.4}, {:.4}] at {}%, R^2 = {:.5}, lengths {:.4}..{:.4} A ({} points)",
                f.d_box, f.ci.0, f.ci.1, self.config.conf_lvl, f.r2, f.l_min, f.l_max, f.points_used
            );
        }
        s
    }
}

/// Intermediate data retained for dumps.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub flags: Option<SurfaceFlags>,
    pub cloud: Option<PointCloud>,
    pub grid: Option<(BinaryGrid, GridFrame)>,
    pub boxes: Vec<BoxClassification>,
}

fn pool(n: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::param(format!("cannot start {n} worker threads: {e}")))
}

fn timed<T>(timings: &mut Vec<(&'static str, f64)>, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let t0 = Instant::now();
    let out = f().map_err(|e| e.in_stage(stage))?;
    timings.push((stage, t0.elapsed().as_secs_f64()));
    Ok(out)
}

/// Run both pipelines on an in-memory structure.
pub fn run_on_structure(structure: &Structure, config: &RunConfig) -> Result<RunReport> {
    run_detailed(structure, config, false).map(|(r, _)| r)
}

/// As [`run_on_structure`], optionally keeping intermediates for dumps.
pub fn run_detailed(structure: &Structure, config: &RunConfig, keep: bool) -> Result<(RunReport, Artifacts)> {
    config.validate()?;
    pool(config.num_cpus)?.install(|| run_inner(structure, config, keep))
}

fn run_inner(structure: &Structure, cfg: &RunConfig, keep: bool) -> Result<(RunReport, Artifacts)> {
    let mut timings = Vec::new();
    let mut art = Artifacts::default();

    let nl: NeighborList = timed(&mut timings, "neighbors", || build_neighbor_list(structure, cfg.rad_mult))?;
    let flags = timed(&mut timings, "surface", || {
        if cfg.rm_in_surf {
            find_surface_atoms(
                structure,
                &nl,
                cfg.find_surf_alg,
                cfg.alpha_mult,
                cfg.num_neigh_threshold,
            )
        } else {
            Ok(SurfaceFlags::all(structure.len()))
        }
    })?;

    let voxel = if cfg.voxel_surf {
        let t0 = Instant::now();
        let frame = GridFrame::for_structure(structure, cfg.grid_num).map_err(|e| e.in_stage("voxel"))?;
        let cloud = timed(&mut timings, "points", || {
            voxel::gen_surface_points(structure, &nl, &flags, cfg.num_points, cfg.rm_in_surf)
        })?;
        if cloud.is_empty() {
            return Err(Error::Numeric("no surface points survived filtering".into()).in_stage("points"));
        }
        let grid = timed(&mut timings, "voxelise", || voxel::voxelise(&cloud, &frame))?;
        let series = timed(&mut timings, "voxel_count", || {
            voxel::count_series(&grid, &frame, &voxel::default_scales(cfg.grid_num))
        })?;
        let fit = timed(&mut timings, "voxel_fit", || {
            dimension_from_counts(&series, cfg.min_sample, cfg.conf_lvl, cfg.trim_len)
        })?;
        timings.push(("voxel", t0.elapsed().as_secs_f64()));
        if keep {
            art.cloud = Some(cloud);
            art.grid = Some((grid, frame));
        }
        Some(PipelineResult { series, fit })
    } else {
        None
    };

    let exact = if cfg.exact_surf {
        let t0 = Instant::now();
        let lengths = exact::length_schedule(structure, cfg.min_len_mult, cfg.max_len_mult, cfg.num_box_len)
            .map_err(|e| e.in_stage("exact"))?;
        let (series, classes) = timed(&mut timings, "exact_count", || {
            exact::count_series(structure, &nl, &flags, &lengths, cfg.rm_in_surf)
        })?;
        let fit = timed(&mut timings, "exact_fit", || {
            dimension_from_counts(&series, cfg.min_sample, cfg.conf_lvl, cfg.trim_len)
        })?;
        timings.push(("exact", t0.elapsed().as_secs_f64()));
        if keep {
            art.boxes = classes;
        }
        Some(PipelineResult { series, fit })
    } else {
        None
    };

    let n_surface = flags.count();
    if keep {
        art.flags = Some(flags);
    }
    Ok((
        RunReport {
            config: cfg.clone(),
            n_atoms: structure.len(),
            n_surface,
            voxel,
            exact,
            timings,
        },
        art,
    ))
}

/// Load the configured input file and run.
pub fn run_box_cnt(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let path = config
        .inp_file_path
        .as_ref()
        .ok_or_else(|| Error::param("no input file given"))?;
    let structure = load_xyz(path, config.rad_type).map_err(|e| e.in_stage("load"))?;
    run_on_structure(&structure, config)
}

/// Write the plot-data files for every representation in `report`.
///
/// For each representation `<tag>` this writes `plot_<tag>.csv` with columns
/// `log10_length,log10_count,in_window`, and `fit_<tag>.txt` holding the line
/// `log10_count = dBox * log10(1/length) + intercept_log10`. With `svg`, a
/// scatter plot with the fitted line is written to `plot_<tag>.svg`.
pub fn emit_plot_data(report: &RunReport, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (tag, p) in report.pipelines() {
        let (lo, hi) = p.fit.window;
        let mut csv = String::from("log10_length,log10_count,in_window\n");
        for (i, (&l, &n)) in p.series.lengths.iter().zip(&p.series.counts).enumerate() {
            let _ = writeln!(csv, "{},{},{}", l.log10(), (n as f64).log10(), (lo..hi).contains(&i) as u8);
        }
        let path = dir.join(format!("plot_{tag}.csv"));
        std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
        written.push(path);

        let intercept = p.fit.intercept / std::f64::consts::LN_10;
        let fit = format!(
            "dBox={}\nintercept_log10={}\nr2={}\nciLow={}\nciHigh={}\nwindowStart={lo}\nwindowEnd={hi}\n",
            p.fit.d_box, intercept, p.fit.r2, p.fit.ci.0, p.fit.ci.1
        );
        let path = dir.join(format!("fit_{tag}.txt"));
        std::fs::write(&path, fit).map_err(|e| Error::io(&path, e))?;
        written.push(path);

        if svg {
            let path = dir.join(format!("plot_{tag}.svg"));
            std::fs::write(&path, render_svg(p, intercept)).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn render_svg(p: &PipelineResult, intercept: f64) -> String {
    let xs: Vec<f64> = p.series.lengths.iter().map(|l| -l.log10()).collect();
    let ys: Vec<f64> = p.series.counts.iter().map(|&n| (n as f64).log10()).collect();
    let (x0, x1) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (y0, y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (w, h, m) = (480.0, 360.0, 40.0);
    let sx = |x: f64| m + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * m);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    let _ = writeln!(
        s,
        "<rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        w - 2.0 * m,
        h - 2.0 * m
    );
    let (lo, hi) = p.fit.window;
    for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
        let fill = if (lo..hi).contains(&i) { "steelblue" } else { "lightgray" };
        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{fill}\"/>", sx(x), sy(y));
    }
    let line = |x: f64| p.fit.d_box * x + intercept;
    let _ = writeln!(
        s,
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"firebrick\"/>",
        sx(xs[lo]),
        sy(line(xs[lo])),
        sx(xs[hi - 1]),
        sy(line(xs[hi - 1]))
    );
    let _ = writeln!(
        s,
        "<text x=\"{m}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">D_box = {:.4}, R^2 = {:.4}</text>",
        p.fit.d_box, p.fit.r2
    );
    s.push_str("</svg>\n");
    s
}

/// Timing summary for one structure and one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub label: String,
    pub n_atoms: usize,
    pub pipeline: &'static str,
    pub median: f64,
    pub mean: f64,
    pub kept: usize,
    pub runs: usize,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "label,nAtoms,pipeline,medianSeconds,meanSeconds,keptRuns,runs";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.label, self.n_atoms, self.pipeline, self.median, self.mean, self.kept, self.runs
        )
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Drop samples outside `[Q1 - 1.5 IQR, Q3 + 1.5 IQR]`; returns the kept samples sorted.
pub fn trim_outliers(samples: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    if s.is_empty() {
        return s;
    }
    let (q1, q3) = (quantile(&s, 0.25), quantile(&s, 0.75));
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    s.retain(|&v| v >= lo && v <= hi);
    s
}

/// Median and mean after outlier trimming.
pub fn robust_stats(samples: &[f64]) -> (f64, f64, usize) {
    let kept = trim_outliers(samples);
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    (quantile(&kept, 0.5), mean, kept.len())
}

/// Time each representation separately on every structure.
pub fn bench(specs: &[ShapeSpec], repeats: usize, base: &RunConfig) -> Result<Vec<BenchRow>> {
    if repeats < 3 {
        return Err(Error::param(format!("bench needs at least 3 repeats, got {repeats}")));
    }
    let mut rows = Vec::new();
    for spec in specs {
        let structure = generate_structure(spec, base.rad_type)?;
        let label = format!("{}{}_{}", spec.element, spec.order, spec.kind);
        for (name, voxel_on) in [("voxel", true), ("exact", false)] {
            let cfg = RunConfig {
                voxel_surf: voxel_on,
                exact_surf: !voxel_on,
                ..base.clone()
            };
            let pool = pool(cfg.num_cpus)?;
            let mut times = Vec::with_capacity(repeats);
            for _ in 0..repeats {
                let t0 = Instant::now();
                pool.install(|| run_inner(&structure, &cfg, false))?;
                times.push(t0.elapsed().as_secs_f64());
            }
            let (median, mean, kept) = robust_stats(&times);
            rows.push(BenchRow {
                label: label.clone(),
                n_atoms: structure.len(),
                pipeline: name,
                median,
                mean,
                kept,
                runs: repeats,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::ShapeKind;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        let none = RunConfig {
            voxel_surf: false,
            exact_surf: false,
            ..Default::default()
        };
        assert!(matches!(none.validate(), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn outliers_are_trimmed() {
        let mut t = vec![1.0; 29];
        t.push(50.0);
        let (median, mean, kept) = robust_stats(&t);
        assert_eq!(kept, 29);
        assert_eq!(mean, 1.0);
        assert_eq!(median, 1.0);
    }

    #[test]
    fn small_octahedron_runs() {
        let s = generate_structure(&ShapeSpec::pd(ShapeKind::FccOctahedron, 4), RadiusType::Atomic).unwrap();
        let cfg = RunConfig {
            num_points: 300,
            grid_num: 256,
            num_cpus: 2,
            ..Default::default()
        };
        let r = run_on_structure(&s, &cfg).unwrap();
        assert!(r.voxel.is_some() && r.exact.is_some());
        assert!(r.key_values().contains("dBoxEX="));
        assert_eq!(r.csv_rows().lines().count(), 2);
    }
}
