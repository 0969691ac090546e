//! `slrm`: phantoms, masks, degradation, restoration and evaluation from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slrm_core::config::ExperimentConfig;
use slrm_core::experiment::{
    build_problem, demo_1d, hat_signal, prepare, ramp_signal, random_rect_phantom, rank_sweep, report_csv,
    run_method, two_region_phantom, Method, MethodResult, ReportRow,
};
use slrm_core::grid::CenteredGrid;
use slrm_core::io::{
    encode_pgm16, read_field, read_image, read_mask, write_field, write_image, write_mask, Manifest,
};
use slrm_core::sampling::degrade;
use slrm_core::{SlrmError, SpatialImage};

#[derive(Parser)]
#[command(name = "slrm", version, about = "Structured low-rank restoration of piecewise smooth images from Fourier samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the ground-truth image and its spectrum for a config.
    Phantom {
        #[arg(short, long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write the sampling mask for a config.
    Mask {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Restrict a spectrum to a mask and add noise.
    Degrade {
        #[arg(short, long)]
        config: PathBuf,
        /// Spectrum to degrade; defaults to the config phantom.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        /// Mask to use; defaults to the config mask.
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the configured methods and write images, diagnostics and a metric report.
    Restore {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Number of methods run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Record wall-clock runtimes in the report (makes it non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Compare an image against a reference and print a report row.
    Evaluate {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value = "image")]
        name: String,
        #[arg(long, default_value = "unknown")]
        method: String,
    },
    /// Print lift ranks against the rank bound for enlarged supports.
    Spectrum {
        /// Grid size.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Comma-separated odd supports K'.
        #[arg(long, value_delimiter = ',', default_values_t = vec![5usize, 7, 9])]
        supports: Vec<usize>,
        /// Seed of a random rectangle phantom; the two-region phantom when absent.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print annihilation residuals and lift ranks for the 1D demo signals.
    Demo1d {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        support: usize,
    },
}

fn exit_code(e: &SlrmError) -> u8 {
    match e {
        SlrmError::Config { .. } | SlrmError::InvalidParameter(_) | SlrmError::InvalidGrid(_) | SlrmError::InvalidModel(_) => 2,
        SlrmError::NotConverged { .. } | SlrmError::NonFinite(_) | SlrmError::UepViolation(_) => 3,
        SlrmError::Io(_) | SlrmError::Format(_) => 4,
        SlrmError::ShapeMismatch(_) | SlrmError::WrongOrder { .. } => 2,
    }
}

struct Run {
    cfg: ExperimentConfig,
    text: String,
    out: PathBuf,
}

impl Run {
    fn load(config: &Path, out: Option<PathBuf>) -> slrm_core::Result<Self> {
        let (cfg, text) = ExperimentConfig::load(config)?;
        let out = out.unwrap_or_else(|| cfg.output.clone());
        std::fs::create_dir_all(&out)?;
        Ok(Self { cfg, text, out })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn manifest(&self, command: &str, outputs: &[&str]) -> slrm_core::Result<()> {
        let mut m = Manifest::new(&self.text, self.cfg.seed, command);
        m.outputs = outputs.iter().map(|s| s.to_string()).collect();
        m.write(&self.path(&format!("{command}_manifest.toml")))
    }
}

fn write_pgm(path: &Path, image: &SpatialImage) -> slrm_core::Result<()> {
    let (n1, n2) = image.grid().extents();
    Ok(std::fs::write(path, encode_pgm16(&image.real_part(), n1, n2, 0.0, 1.0)?)?)
}

fn run(cli: Cli) -> slrm_core::Result<()> {
    match cli.command {
        Command::Phantom { config, out } => {
            let r = Run::load(&config, out)?;
            let data = prepare(&r.cfg)?;
            write_image(&r.path("reference.bin"), &data.reference)?;
            write_pgm(&r.path("reference.pgm"), &data.reference)?;
            write_field(&r.path("spectrum.bin"), &data.spectrum)?;
            r.manifest("phantom", &["reference.bin", "reference.pgm", "spectrum.bin"])
        }
        Command::Mask { config, out } => {
            let r = Run::load(&config, out)?;
            let data = prepare(&r.cfg)?;
            write_mask(&r.path("mask.bin"), &data.mask)?;
            println!("kept {} of {} frequencies", data.mask.count(), data.mask.grid().len());
            r.manifest("mask", &["mask.bin"])
        }
        Command::Degrade { config, spectrum, mask, out } => {
            let r = Run::load(&config, out)?;
            let data = prepare(&r.cfg)?;
            let observed = match (spectrum, mask) {
                (None, None) => data.observed,
                (s, m) => {
                    let s = s.map(|p| read_field(&p)).transpose()?.unwrap_or(data.spectrum);
                    let m = m.map(|p| read_mask(&p)).transpose()?.unwrap_or(data.mask);
                    let (_, noise_seed) = slrm_core::experiment::derived_seeds(r.cfg.seed);
                    degrade(&s, &m, r.cfg.noise.sigma, noise_seed)?
                }
            };
            write_field(&r.path("observed.bin"), &observed)?;
            r.manifest("degrade", &["observed.bin"])
        }
        Command::Restore { config, out, jobs, timing } => {
            let r = Run::load(&config, out)?;
            let data = prepare(&r.cfg)?;
            let problem = build_problem(&r.cfg, &data)?;
            let methods: Vec<Method> =
                r.cfg.method.names.iter().map(|n| n.parse()).collect::<slrm_core::Result<_>>()?;
            let results = run_all(&methods, &r.cfg, &problem, jobs.max(1))?;
            let mut rows = Vec::new();
            let mut outputs = vec!["report.csv".to_string()];
            for res in &results {
                let name = res.method.name();
                write_image(&r.path(&format!("{name}_image.bin")), &res.image)?;
                write_pgm(&r.path(&format!("{name}_image.pgm")), &res.image)?;
                write_field(&r.path(&format!("{name}_spectrum.bin")), &res.spectrum)?;
                std::fs::write(r.path(&format!("{name}_diagnostics.csv")), res.diagnostics.to_csv())?;
                for ext in ["image.bin", "image.pgm", "spectrum.bin", "diagnostics.csv"] {
                    outputs.push(format!("{name}_{ext}"));
                }
                let rt = timing.then_some(res.runtime_s);
                rows.push(ReportRow::new(&phantom_name(&r.cfg), name, &res.image, &data.reference, rt)?);
            }
            let csv = report_csv(&rows);
            print!("{csv}");
            std::fs::write(r.path("report.csv"), csv)?;
            let refs: Vec<&str> = outputs.iter().map(|s| s.as_str()).collect();
            r.manifest("restore", &refs)
        }
        Command::Evaluate { image, reference, name, method } => {
            let u = read_image(&image)?;
            let rf = read_image(&reference)?;
            print!("{}", report_csv(&[ReportRow::new(&name, &method, &u, &rf, None)?]));
            Ok(())
        }
        Command::Spectrum { n, supports, seed } => {
            let grid = CenteredGrid::square(n)?;
            let model = match seed {
                Some(s) => random_rect_phantom(s, 3)?,
                None => two_region_phantom(),
            };
            println!("support,rank_first,rank_second,bound");
            for row in rank_sweep(&model, grid, 3, &supports)? {
                println!("{},{},{},{}", row.support, row.rank_first, row.rank_second, row.bound);
            }
            Ok(())
        }
        Command::Demo1d { n, support } => {
            println!("signal,singular_points,residual_first,residual_second,rank_first,rank_second");
            for (name, model) in [("hat", hat_signal()), ("ramp", ramp_signal())] {
                let row = demo_1d(&model, name, n, support)?;
                println!(
                    "{},{},{:.3e},{:.3e},{},{}",
                    row.name, row.singular_points, row.residual_first, row.residual_second, row.rank_first, row.rank_second
                );
            }
            Ok(())
        }
    }
}

fn phantom_name(cfg: &ExperimentConfig) -> String {
    use slrm_core::config::PhantomKind;
    match cfg.phantom.kind {
        PhantomKind::Rectangles => format!("rectangles-{}", cfg.seed),
        PhantomKind::TwoRegion => "two-region".into(),
        PhantomKind::Image | PhantomKind::File => cfg
            .phantom
            .path
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".into()),
    }
}

/// Runs methods on up to `jobs` threads; results keep the input order.
fn run_all(
    methods: &[Method],
    cfg: &ExperimentConfig,
    problem: &slrm_core::solvers::RestorationProblem,
    jobs: usize,
) -> slrm_core::Result<Vec<MethodResult>> {
    let mut results = Vec::with_capacity(methods.len());
    for chunk in methods.chunks(jobs) {
        let batch: Vec<slrm_core::Result<MethodResult>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|&m| s.spawn(move || run_method(m, cfg, problem))).collect();
            handles.into_iter().map(|h| h.join().expect("method thread panicked")).collect()
        });
        for r in batch {
            results.push(r?);
        }
    }
    Ok(results)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
