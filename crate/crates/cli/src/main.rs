use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boxdim::dump::write_dumps;
use boxdim::pipeline::{bench, emit_plot_data, run_detailed, BenchRow, RunConfig, RunReport};
use boxdim::surface::SurfaceAlgorithm;
use boxdim::synth::{generate_structure, ShapeKind, ShapeSpec, PD_LATTICE_CONSTANT};
use boxdim::xyz::write_xyz;
use boxdim::{load_xyz, Error, RadiusType};
use clap::{ArgAction, Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "boxdim", version, about = "Box-counting dimension of sphere-union surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the surface box-counting dimension of an XYZ structure.
    Run(RunArgs),
    /// Time both pipelines on a ladder of synthetic particles.
    Bench(BenchArgs),
    /// Write a synthetic FCC particle to an XYZ file.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Params {
    #[arg(long, default_value = "atomic")]
    rad_type: RadiusType,
    #[arg(long, default_value_t = 1.2)]
    rad_mult: f64,
    #[arg(long, default_value = "alphaShape")]
    find_surf_alg: SurfaceAlgorithm,
    #[arg(long, default_value_t = 2.0)]
    alpha_mult: f64,
    /// Coordination below which an atom counts as surface (numNeigh algorithm).
    #[arg(long, default_value_t = 12)]
    num_neigh_threshold: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    trim_len: bool,
    #[arg(long, default_value_t = 6)]
    min_sample: usize,
    #[arg(long, default_value_t = 95.0)]
    conf_lvl: f64,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    rm_in_surf: bool,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    voxel_surf: bool,
    #[arg(long, default_value_t = 10000)]
    num_points: usize,
    #[arg(long, default_value_t = 1024)]
    grid_num: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    exact_surf: bool,
    #[arg(long, default_value_t = 0.25)]
    min_len_mult: f64,
    #[arg(long, default_value_t = 1.0)]
    max_len_mult: f64,
    #[arg(long = "num-cpus", default_value_t = 8)]
    num_cpus: usize,
    #[arg(long, default_value_t = 10)]
    num_box_len: usize,
    #[arg(short, long)]
    verbose: bool,
}

impl Params {
    fn config(&self) -> RunConfig {
        RunConfig {
            inp_file_path: None,
            rad_type: self.rad_type,
            rad_mult: self.rad_mult,
            find_surf_alg: self.find_surf_alg,
            alpha_mult: self.alpha_mult,
            num_neigh_threshold: self.num_neigh_threshold,
            trim_len: self.trim_len,
            min_sample: self.min_sample,
            conf_lvl: self.conf_lvl,
            rm_in_surf: self.rm_in_surf,
            voxel_surf: self.voxel_surf,
            num_points: self.num_points,
            grid_num: self.grid_num,
            exact_surf: self.exact_surf,
            min_len_mult: self.min_len_mult,
            max_len_mult: self.max_len_mult,
            num_cpus: self.num_cpus,
            num_box_len: self.num_box_len,
            verbose: self.verbose,
            ..RunConfig::default()
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Input XYZ file.
    #[arg(required_unless_present = "print_config")]
    inp_file_path: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
    /// Directory for the report, CSVs, plot data and dumps.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also render SVG plots into the output directory.
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    dump_surface: bool,
    #[arg(long)]
    dump_points: bool,
    #[arg(long)]
    dump_voxels: bool,
    #[arg(long)]
    dump_boxes: bool,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Octahedron orders forming the size ladder.
    #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
    orders: Vec<usize>,
    #[arg(long, default_value = "octahedron")]
    shape: ShapeKind,
    #[arg(long, default_value = "Pd")]
    element: String,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[command(flatten)]
    params: Params,
    /// Write the timing CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    shape: ShapeKind,
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[arg(long, default_value = "Pd")]
    element: String,
    #[arg(long, default_value_t = PD_LATTICE_CONSTANT)]
    lattice_constant: f64,
    #[arg(long, default_value = "atomic")]
    rad_type: RadiusType,
    /// Output XYZ path.
    #[arg(short, long)]
    out: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::InvalidParameter(_) | Error::Empty(_) => 2,
        Error::Parse { .. } | Error::UnknownElement { .. } | Error::MissingRadius { .. } | Error::Io { .. } => 3,
        Error::Degenerate(_) | Error::Numeric(_) => 4,
        Error::Stage { .. } => 1,
    }
}

fn write_file(path: &Path, text: &str) -> boxdim::Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn series_csv(report: &RunReport) -> String {
    let mut s = String::from("representation,boxLength,boxCount\n");
    for (tag, p) in report.pipelines() {
        for (l, c) in p.series.lengths.iter().zip(&p.series.counts) {
            let _ = writeln!(s, "{tag},{l},{c}");
        }
    }
    s
}

fn run(args: RunArgs) -> boxdim::Result<()> {
    let mut cfg = args.params.config();
    cfg.inp_file_path = args.inp_file_path.clone();
    cfg.out_dir = args.out_dir.clone();
    cfg.dump_surface = args.dump_surface;
    cfg.dump_points = args.dump_points;
    cfg.dump_voxels = args.dump_voxels;
    cfg.dump_boxes = args.dump_boxes;
    if args.print_config {
        print!("{}", cfg.dump());
        return Ok(());
    }
    cfg.validate()?;
    let path = cfg.inp_file_path.clone().expect("clap requires an input path");
    let structure = load_xyz(&path, cfg.rad_type).map_err(|e| e.in_stage("load"))?;
    let keep = cfg.dump_surface || cfg.dump_points || cfg.dump_voxels || cfg.dump_boxes;
    let (report, art) = run_detailed(&structure, &cfg, keep)?;
    if cfg.verbose {
        eprint!("{}", cfg.dump());
        eprintln!("{}", report.summary());
    }
    print!("{}", report.key_values());
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        write_file(&dir.join("report.txt"), &report.key_values())?;
        write_file(&dir.join("config.txt"), &cfg.dump())?;
        write_file(&dir.join("fits.csv"), &format!("{}\n{}", RunReport::CSV_HEADER, report.csv_rows()))?;
        write_file(&dir.join("series.csv"), &series_csv(&report))?;
        emit_plot_data(&report, dir, args.svg)?;
        if keep {
            write_dumps(
                dir,
                &structure,
                &art,
                cfg.dump_surface,
                cfg.dump_points,
                cfg.dump_voxels,
                cfg.dump_boxes,
            )?;
        }
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> boxdim::Result<()> {
    let base = args.params.config();
    base.validate()?;
    let specs: Vec<ShapeSpec> = args
        .orders
        .iter()
        .map(|&o| ShapeSpec::new(args.shape, &args.element, o))
        .collect();
    let rows = bench(&specs, args.repeats, &base)?;
    let mut text = format!("{}\n", BenchRow::CSV_HEADER);
    for r in &rows {
        let _ = writeln!(text, "{}", r.csv());
    }
    match &args.out {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn synth(args: SynthArgs) -> boxdim::Result<()> {
    let mut spec = ShapeSpec::new(args.shape, &args.element, args.order);
    spec.lattice_constant = args.lattice_constant;
    let s = generate_structure(&spec, args.rad_type)?;
    write_xyz(&args.out, &s, &format!("{}{} {} order {}", args.element, s.len(), args.shape, args.order))?;
    println!("wrote {} atoms to {}", s.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => run(a),
        Command::Bench(a) => run_bench(a),
        Command::Synth(a) => synth(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
