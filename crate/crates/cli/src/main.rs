use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use combescure::classify::{classify, cone_net_kind, is_koenigs, koenigs_residual};
use combescure::construct::extract_cone_cylinder_data;
use combescure::deform::{christoffel_dual, max_area_residual, DeformationFamily};
use combescure::io::{export_obj, net_to_json, read_net, smooth_from_json, write_net, GeneratorSpec};
use combescure::isotropic::dual_net;
use combescure::net::validate;
use combescure::ratios::tables_HV;
use combescure::smooth::{sample_family, SmoothFamilyMember};
use combescure::{Error, Net, Result, Tolerances};

#[derive(Parser)]
#[command(name = "combescure", version, about = "Area-preserving Combescure transformations of Q-nets")]
struct Cli {
    /// Uniform tolerance for all geometric tests.
    #[arg(long, global = true, env = "COMBESCURE_TOL")]
    tol: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check planarity, convexity and edge lengths of every face.
    Validate { net: PathBuf },
    /// Report deformability class, Koenigs property and cone-net structure.
    Classify {
        net: PathBuf,
        /// Include the opposite-ratio tables H and V.
        #[arg(long)]
        tables: bool,
    },
    /// Evaluate an area-preserving deformation at one or several parameters.
    #[command(group(ArgGroup::new("param").required(true).args(["t", "samples"])))]
    Deform {
        net: PathBuf,
        #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["samples", "t_min", "t_max"])]
        t: Option<f64>,
        #[arg(long, requires = "out")]
        samples: Option<usize>,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        t_max: f64,
        /// Output file (single t) or directory (samples).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Propagate)]
        method: Method,
        /// Also write an OBJ file next to every JSON output.
        #[arg(long)]
        obj: bool,
    },
    /// Christoffel dual, or with --isotropic the net of face-plane poles.
    Dual {
        net: PathBuf,
        #[arg(long)]
        isotropic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Complete an L-shaped net to the unique deformable net of a class.
    CompleteL {
        input: PathBuf,
        /// i, i_rows, i_cols or ii; defaults to the "class" field of the input.
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a net from an explicit numeric spec.
    Gen {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a member of a smooth cone-cylinder family on a grid.
    SampleSmooth {
        spec: PathBuf,
        /// Grid size MxN.
        #[arg(long, value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a net as an OBJ quad mesh.
    ExportObj { net: PathBuf, out: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Propagate,
    Hyperbolic,
    ConeCylinder,
    ClosedForm,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (m, n) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected MxN, got {s:?}"))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("expected MxN, got {s:?}"));
    let (m, n) = (p(m)?, p(n)?);
    if m == 0 || n == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((m, n))
}

fn print_line(s: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{s}")?;
    out.flush()?;
    Ok(())
}

fn print(v: &Value) -> Result<()> {
    print_line(&serde_json::to_string_pretty(v)?)
}

fn emit_net(net: &Net, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_net(p, net),
        None => print_line(&net_to_json(net)),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn family(net: Net, method: Method, tol: &Tolerances) -> Result<DeformationFamily> {
    match method {
        Method::Propagate => DeformationFamily::propagated(net, tol),
        Method::Hyperbolic => DeformationFamily::hyperbolic(net, tol),
        Method::ConeCylinder => DeformationFamily::cone_cylinder(extract_cone_cylinder_data(&net, tol)?, tol),
        Method::ClosedForm => DeformationFamily::closed_form_2x2(net, tol),
    }
}

fn run(cli: Cli) -> Result<()> {
    let tol = match cli.tol {
        Some(e) => Tolerances::uniform(e)?,
        None => Tolerances::default(),
    };
    match cli.cmd {
        Cmd::Validate { net } => {
            let net = read_net(&net)?;
            let report = validate(&net, &tol);
            let faces: Vec<Value> = report
                .failures()
                .map(|f| {
                    json!({
                        "i": f.i, "j": f.j, "planar": f.planar, "convex": f.convex,
                        "planarity_residual": f.planarity_residual,
                        "degenerate_edges": f.degenerate_edges.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>(),
                    })
                })
                .collect();
            print(&json!({ "valid": report.is_valid(), "m": net.m(), "n": net.n(), "failures": faces }))?;
            report.into_result()
        }
        Cmd::Classify { net, tables } => {
            let net = read_net(&net)?;
            let verdict = classify(&net, &tol)?;
            let mut v = serde_json::to_value(&verdict)?;
            let cone = cone_net_kind(&net, &tol);
            let obj = v.as_object_mut().expect("struct serializes to an object");
            if net.m() >= 2 && net.n() >= 2 {
                obj.insert("koenigs".into(), json!(is_koenigs(&net, &tol)?));
                obj.insert("koenigs_residual".into(), json!(koenigs_residual(&net, &tol)?));
            }
            obj.insert(
                "cone_net".into(),
                json!({
                    "rows": cone.rows.strongest(),
                    "cols": cone.cols.strongest(),
                    "detail": cone,
                }),
            );
            if tables {
                obj.insert("tables".into(), serde_json::to_value(tables_HV(&net, &tol)?)?);
            }
            print(&v)?;
            Ok(())
        }
        Cmd::Deform { net, t, samples, t_min, t_max, out, method, obj } => {
            let base = read_net(&net)?;
            let fam = family(base, method, &tol)?;
            match (t, samples) {
                (Some(t), _) => {
                    let net = fam.evaluate(t, &tol)?;
                    emit_net(&net, out.as_deref())?;
                    if let (true, Some(p)) = (obj, &out) {
                        export_obj(&net, &p.with_extension("obj"))?;
                    }
                }
                (None, Some(k)) => {
                    let dir = out.expect("clap requires --out with --samples");
                    std::fs::create_dir_all(&dir)?;
                    let ts: Vec<f64> = match k {
                        0 => Vec::new(),
                        1 => vec![t_min],
                        _ => (0..k).map(|s| t_min + (t_max - t_min) * s as f64 / (k - 1) as f64).collect(),
                    };
                    let mut frames = Vec::new();
                    let mut worst: f64 = 0.0;
                    for (s, &t) in ts.iter().enumerate() {
                        let net = fam
                            .evaluate(t, &tol)
                            .map_err(|e| Error::OutOfDomain(format!("frame {s} (t = {t}): {e}")))?;
                        worst = worst.max(max_area_residual(&fam.base, &net)?);
                        let path = dir.join(format!("frame_{s:04}.json"));
                        write_net(&path, &net)?;
                        if obj {
                            export_obj(&net, &path.with_extension("obj"))?;
                        }
                        frames.push(json!({ "t": t, "path": path.display().to_string() }));
                    }
                    print(&json!({ "frames": frames, "max_area_residual": worst }))?;
                }
                (None, None) => unreachable!("clap requires --t or --samples"),
            }
            Ok(())
        }
        Cmd::Dual { net, isotropic, out } => {
            let net = read_net(&net)?;
            let d = if isotropic { dual_net(&net, &tol)? } else { christoffel_dual(&net, &tol)? };
            emit_net(&d, out.as_deref())
        }
        Cmd::CompleteL { input, class, out } => {
            let mut v = read_json(&input)?;
            let obj = v.as_object_mut().ok_or_else(|| Error::Input("L-shape input must be a JSON object".into()))?;
            obj.insert("kind".into(), json!("l_shape"));
            if let Some(c) = class {
                obj.insert("class".into(), json!(c));
            }
            obj.entry("class").or_insert(json!("ii"));
            let spec: GeneratorSpec = serde_json::from_value(v)?;
            emit_net(&spec.generate(&tol)?, out.as_deref())
        }
        Cmd::Gen { spec, out } => {
            let spec: GeneratorSpec = serde_json::from_value(read_json(&spec)?)?;
            emit_net(&spec.generate(&tol)?, out.as_deref())
        }
        Cmd::SampleSmooth { spec, grid: (m, n), t, out } => {
            let base = smooth_from_json(&std::fs::read_to_string(&spec)?)?;
            let member = SmoothFamilyMember::new(base, t)?;
            emit_net(&sample_family(&member, m, n, &tol)?, out.as_deref())
        }
        Cmd::ExportObj { net, out } => export_obj(&read_net(&net)?, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
