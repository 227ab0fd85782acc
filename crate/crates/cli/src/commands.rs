use std::f64::consts::TAU;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use num_complex::Complex64 as C;
use rand::Rng;
use serde_json::json;

use stitchkit::acceptance::{self, CRITERIA};
use stitchkit::amoeba::{self, AmoebaSpec, Hypersurface, Membership, Polynomial, Sampling};
use stitchkit::builder::{BuildOptions, BuiltFibration};
use stitchkit::calculus::{
    closedness_transfer, closedness_transfer_s, ell_to_s, integrality_check, s_to_ell, series_inversion,
    AnySequence, EllSequence, GermFile, SequenceFile,
};
use stitchkit::flows::{
    self, conjugate_to_unit_shear, ham_field, integrate, omega, BasePath, Combination, ContinuationOptions,
};
use stitchkit::random;
use stitchkit::zoo::{self, ExampleFibration, Side, Variant};

use crate::report::Report;
use crate::{AmoebaCommand, BuildArgs, Cli, Command, Direction, MonodromyArgs, RenderArgs, ReportArgs, SeqCommand, VerifyArgs};

/// Runs one subcommand. `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let out = cli.report.as_deref();
    match &cli.command {
        Command::Verify(a) if a.list => {
            for name in zoo::NAMES {
                let ex = zoo::make(name)?;
                println!("{name} n={} discriminant={}", ex.n, ex.discriminant);
            }
            Ok(true)
        }
        Command::Verify(a) => finish(verify(a, cli.seed)?, out),
        Command::Seq(SeqCommand::Convert { dir, input, output }) => {
            convert(*dir, input, output.as_deref())?;
            Ok(true)
        }
        Command::Seq(SeqCommand::Check { input }) => finish(seq_check(input)?, out),
        Command::Seq(SeqCommand::Act { germ, input, output }) => {
            let g = GermFile::read(germ)?.decode()?;
            let ell = read_ell(input)?;
            write_or_print(&SequenceFile::from_ell(&g.act(&ell)?).to_json()?, output.as_deref())?;
            Ok(true)
        }
        Command::BuildU(a) => finish(build_u(a, cli.seed)?, out),
        Command::Monodromy(a) => finish(monodromy(a)?, out),
        Command::Amoeba(AmoebaCommand::Render(a)) => {
            render(a)?;
            Ok(true)
        }
        Command::Report(a) => finish(suite(a)?, out),
    }
}

fn finish(report: Report, out: Option<&Path>) -> Result<bool> {
    report.emit(out).context("writing report")?;
    Ok(report.passed())
}

fn write_or_print(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure!(v > 0.0 && v.is_finite(), "{name} must be positive, got {v}");
    Ok(())
}

fn read_ell(path: &Path) -> Result<EllSequence<f64>> {
    match SequenceFile::read(path)?.decode()? {
        AnySequence::Ell(e) => Ok(e),
        AnySequence::S(_) => bail!("{} holds a Taylor sequence, expected kind \"ell\"", path.display()),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn verify(a: &VerifyArgs, seed: u64) -> Result<Report> {
    let name = a.example.as_deref().ok_or_else(|| anyhow!("missing example name"))?;
    positive("--residual-tol", a.residual_tol)?;
    positive("--match-tol", a.match_tol)?;
    ensure!(a.points > 0, "--points must be positive");
    let ex = zoo::make(name)?;
    let mut rep = Report::new(
        "verify",
        json!({"example": name, "seed": seed, "points": a.points,
               "residual_tol": a.residual_tol, "match_tol": a.match_tol}),
    );
    let mut rng = random::rng(seed);
    let seam = ex.seam_points(&mut rng, a.points);
    let fibres = fibre_points(&ex, &mut rng, a.points);

    let mut inv: f64 = 0.0;
    for z in seam.iter().chain(&fibres) {
        inv = inv.max(flows::invariance_error(&ex, z, rng.gen_range(0.0..TAU))?);
    }
    rep.check("invariance", inv <= 1e-10, format!("max_err={inv:.3e}"));

    let mut cont: f64 = 0.0;
    for z in &seam {
        cont = cont.max(max_abs_diff(&ex.eval_side(z, Side::Plus)?, &ex.eval_side(z, Side::Minus)?));
    }
    rep.check("seam_continuity", cont <= 1e-10, format!("max_err={cont:.3e}"));

    let (mut om, mut drift): (f64, f64) = (0.0, 0.0);
    for z in &fibres {
        let side = side_of(&ex, z)?;
        let etas = (1..=ex.n)
            .map(|j| ham_field(&Combination::component(&ex, j, side), z))
            .collect::<stitchkit::Result<Vec<_>>>()?;
        for i in 0..ex.n {
            for j in (i + 1)..ex.n {
                om = om.max(omega(&etas[i], &etas[j]).abs());
            }
        }
        let f0 = ex.eval_side(z, side)?;
        for k in 1..=ex.n {
            let tr = integrate(&Combination::component(&ex, k, side), z, 1.0, 400)?;
            drift = drift.max(max_abs_diff(&f0, &ex.eval_side(tr.end(), side)?));
        }
    }
    rep.info("fibre_points", fibres.len().to_string());
    rep.check("lagrangian", om <= 1e-8, format!("max_omega={om:.3e}"));
    rep.check("commuting_flows", drift <= 1e-7, format!("max_drift={drift:.3e}"));

    let (mut resid, mut err, mut uncorrected): (f64, f64, Option<f64>) = (0.0, 0.0, None);
    for z in &seam {
        let d = flows::discrepancy(&ex, z)?;
        resid = resid.max(d.max_residual());
        err = err.max(max_abs_diff(&d.a, &ex.closed_form_a(z, Variant::Corrected)?));
        if let Ok(p) = ex.closed_form_a(z, Variant::Uncorrected) {
            let e = max_abs_diff(&d.a, &p);
            uncorrected = Some(uncorrected.map_or(e, |m: f64| m.max(e)));
        }
    }
    rep.check("discrepancy_residual", resid <= a.residual_tol, format!("max_residual={resid:.3e}"));
    rep.check("discrepancy_match", err <= a.match_tol, format!("max_err={err:.3e} variant=corrected"));
    if let Some(p) = uncorrected {
        rep.info("uncorrected_variant_err", format!("{p:.3e}"));
    }

    if let Some(dir) = &a.dump {
        std::fs::create_dir_all(dir)?;
        let z = fibres.first().ok_or_else(|| anyhow!("no regular fibre point sampled"))?;
        let side = side_of(&ex, z)?;
        for k in 1..=ex.n {
            let tr = integrate(&Combination::component(&ex, k, side), z, 1.0, 400)?;
            let path = dir.join(format!("{name}_eta{k}.csv"));
            std::fs::write(&path, tr.to_csv())?;
        }
    }
    Ok(rep)
}

fn side_of(ex: &ExampleFibration, z: &[C]) -> Result<Side> {
    Ok(if ex.eval(z)?[0] >= 0.0 { Side::Plus } else { Side::Minus })
}

/// Points on regular fibres over a box in the base; failures are skipped.
fn fibre_points<R: Rng>(ex: &ExampleFibration, rng: &mut R, count: usize) -> Vec<Vec<C>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..50 * count {
        if out.len() == count {
            break;
        }
        let b: Vec<f64> = (0..ex.n).map(|_| rng.gen_range(-0.8..0.8)).collect();
        if let Ok(z) = ex.fibre_point(&b) {
            out.push(z);
        }
    }
    out
}

fn convert(dir: Direction, input: &Path, output: Option<&Path>) -> Result<()> {
    let file = match (dir, SequenceFile::read(input)?.decode()?) {
        (Direction::EllToS, AnySequence::Ell(e)) => SequenceFile::from_s(&ell_to_s(&e)?),
        (Direction::SToEll, AnySequence::S(s)) => SequenceFile::from_ell(&s_to_ell(&s)?),
        (Direction::EllToS, _) => bail!("ell2s needs a file of kind \"ell\""),
        (Direction::SToEll, _) => bail!("s2ell needs a file of kind \"s\""),
    };
    write_or_print(&file.to_json()?, output)
}

fn seq_check(input: &Path) -> Result<Report> {
    let decoded = SequenceFile::read(input)?.decode()?;
    let (ell, s) = match decoded {
        AnySequence::Ell(e) => {
            let s = ell_to_s(&e)?;
            (e, s)
        }
        AnySequence::S(s) => (s_to_ell(&s)?, s),
    };
    let mut rep = Report::new(
        "seq check",
        json!({"input": input.display().to_string(), "n": ell.n(), "order": ell.order()}),
    );
    rep.check("closedness", ell.is_closed(), format!("closed={}", ell.is_closed()));
    let adm = s.check_admissible()?;
    rep.check("admissibility", adm.passed, format!("max_residual={:.3e}", adm.max_residual));
    match integrality_check(&ell) {
        Ok(m) => rep.check("integrality", true, format!("periods={m:?}")),
        Err(e) => rep.check("integrality", false, format!("error=\"{e}\"")),
    }
    let v = closedness_transfer(&ell)?;
    let w = closedness_transfer_s(&s)?;
    rep.check(
        "closedness_transfer",
        v.consistent() && w.consistent(),
        format!("ell_closed={} s_admissible={}", v.ell_closed, v.s_admissible),
    );
    Ok(rep)
}

fn build_u(a: &BuildArgs, seed: u64) -> Result<Report> {
    positive("--bracket-tol", a.bracket_tol)?;
    positive("--taylor-tol", a.taylor_tol)?;
    ensure!(a.points > 0, "--points must be positive");
    let ell = match SequenceFile::read(&a.seq)?.decode()? {
        AnySequence::Ell(e) => e,
        AnySequence::S(s) => s_to_ell(&s)?,
    };
    let opts = BuildOptions {
        seed,
        ..BuildOptions::unit_box(ell.n())
    };
    let mut rep = Report::new(
        "build-u",
        json!({"seq": a.seq.display().to_string(), "seed": seed, "points": a.points,
               "bracket_tol": a.bracket_tol, "taylor_tol": a.taylor_tol,
               "eps0": opts.eps, "base_lo": opts.base_lo, "base_hi": opts.base_hi}),
    );
    rep.check("closedness", ell.is_closed(), format!("closed={}", ell.is_closed()));
    let u = BuiltFibration::build(&ell, &opts)?;
    let mut rng = random::rng(seed);
    let pts = u.sample_points(&mut rng, a.points);
    let lag = u.verify_lagrangian(&pts, 1e-5)?;
    let base: Vec<_> = pts.iter().take(5).map(|(b, y)| (b[1..].to_vec(), y[1..].to_vec())).collect();
    let taylor = u.taylor_check(&base, 0.5 * u.eps())?;
    rep.info("certified_eps", format!("{}", u.eps()));
    rep.check("commutation", lag.max_bracket <= a.bracket_tol, format!("max_bracket={:.3e}", lag.max_bracket));
    rep.check("taylor_match", taylor <= a.taylor_tol, format!("max_err={taylor:.3e}"));
    if let Some(path) = &a.csv {
        let csv = format!(
            "quantity,value\ncertified_eps,{}\nsamples,{}\nmax_bracket,{:e}\ntaylor_err,{:e}\n",
            u.eps(),
            lag.samples,
            lag.max_bracket,
            taylor
        );
        std::fs::write(path, csv)?;
    }
    Ok(rep)
}

fn numbers(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number '{t}'")))
        .collect()
}

/// Parses `circle:<center>:<p>,<q>:<radius>` or `poly:<pt>;<pt>;...`.
pub fn parse_loop(spec: &str, n: usize) -> Result<BasePath> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| anyhow!("loop spec '{spec}' has no kind"))?;
    let path = match kind {
        "circle" => {
            let parts: Vec<&str> = rest.split(':').collect();
            ensure!(parts.len() == 3, "circle loop needs <center>:<p>,<q>:<radius>");
            let center = numbers(parts[0])?;
            let axes: Vec<usize> = parts[1]
                .split(',')
                .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad axis '{t}'")))
                .collect::<Result<_>>()?;
            ensure!(axes.len() == 2 && axes[0] != axes[1], "circle loop needs two distinct axes");
            ensure!(axes.iter().all(|&x| (1..=n).contains(&x)), "axes must lie in 1..={n}");
            let radius: f64 = parts[2].trim().parse().context("bad radius")?;
            positive("radius", radius)?;
            BasePath::Circle {
                center,
                axes: (axes[0] - 1, axes[1] - 1),
                radius,
            }
        }
        "poly" => BasePath::Polyline(rest.split(';').map(numbers).collect::<Result<_>>()?),
        other => bail!("unknown loop kind '{other}'"),
    };
    ensure!(path.dim() == n, "loop lives in dimension {}, example has n = {n}", path.dim());
    Ok(path)
}

fn default_loops(name: &str) -> Vec<String> {
    match name {
        "focus_focus" => vec!["circle:0,0:1,2:0.5".into()],
        "leg" => vec!["circle:0,0,0:1,3:0.5".into()],
        _ => vec!["circle:0,-2,-0.01:1,3:0.5".into(), "circle:0,-0.01,-2:1,2:0.5".into()],
    }
}

fn monodromy(a: &MonodromyArgs) -> Result<Report> {
    positive("--snap-tol", a.snap_tol)?;
    ensure!(a.samples >= 8, "--samples must be at least 8");
    let ex = zoo::make(&a.example)?;
    let loops = if a.loops.is_empty() { default_loops(&a.example) } else { a.loops.clone() };
    let opts = ContinuationOptions {
        samples: a.samples,
        ..ContinuationOptions::default()
    };
    let mut rep = Report::new(
        "monodromy",
        json!({"example": a.example, "loops": loops, "snap_tol": a.snap_tol, "samples": a.samples}),
    );
    for (i, spec) in loops.iter().enumerate() {
        let path = parse_loop(spec, ex.n)?;
        let tag = format!("loop{}", i + 1);
        match flows::monodromy(&ex, &path, &opts) {
            Ok(res) => {
                rep.info(&format!("{tag}_matrix"), res.matrix.to_string());
                rep.check(
                    &format!("{tag}_snap"),
                    res.snap_error <= a.snap_tol,
                    format!("snap_err={:.3e} samples={}", res.snap_error, res.samples),
                );
                rep.check(&format!("{tag}_unimodular"), res.matrix.determinant() == 1, format!("det={}", res.matrix.determinant()));
                if res.matrix.n() == 2 && !res.matrix.is_identity() {
                    let ok = conjugate_to_unit_shear(&res.matrix);
                    rep.check(&format!("{tag}_unit_shear"), ok, format!("conjugate_to=[[1,1],[0,1]]:{ok}"));
                }
            }
            Err(e) => rep.check(&format!("{tag}_continuation"), false, format!("error=\"{e}\"")),
        }
    }
    Ok(rep)
}

fn parse_bounds(text: &str) -> Result<[f64; 4]> {
    let v = numbers(text)?;
    ensure!(v.len() == 4, "--bounds needs four numbers");
    Ok([v[0], v[1], v[2], v[3]])
}

fn render(a: &RenderArgs) -> Result<()> {
    let bounds = parse_bounds(&a.bounds)?;
    let surface = match (&a.poly, a.sampled) {
        (Some(p), _) => Hypersurface::Poly(Polynomial::parse(p)?),
        (None, true) => Hypersurface::Poly(Polynomial::line()),
        (None, false) => Hypersurface::Line,
    };
    let spec = AmoebaSpec {
        surface,
        bounds,
        width: a.res,
        height: a.res,
        sampling: Sampling::default(),
    };
    spec.validate()?;
    let raster = amoeba::render(&spec)?;
    std::fs::write(&a.out, raster.to_ppm()).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(svg) = &a.svg {
        std::fs::write(svg, raster.to_svg())?;
    }
    let unsure = raster.cells.iter().filter(|c| **c == Membership::Inconclusive).count();
    println!("components={}", raster.components());
    if unsure > 0 {
        println!("inconclusive={unsure}");
    }
    Ok(())
}

fn criterion_id(key: &str) -> Result<u8> {
    CRITERIA
        .iter()
        .find(|(id, name)| key == *name || key.parse::<u8>().ok() == Some(*id))
        .map(|c| c.0)
        .ok_or_else(|| anyhow!("unknown criterion '{key}'"))
}

fn suite(a: &ReportArgs) -> Result<Report> {
    let ids: Vec<u8> = if a.only.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        a.only.iter().map(|k| criterion_id(k)).collect::<Result<_>>()?
    };
    let mut rep = Report::new("report", json!({"criteria": ids, "oracle": "series_inversion"}));
    let oracle = |s: &_| series_inversion(s);
    for id in ids {
        let out = acceptance::run(id, &oracle);
        let line = if a.timings { out.timed_line() } else { out.check_line() };
        rep.check_line(line, out.passed);
    }
    Ok(rep)
}
