use serde_json::{json, Value};
use steklov_core::dtn::slope_study;
use steklov_core::perturbation::{
    assemble_matrix, assemble_matrix_quadrature, diagnose_p2k, eigen_spectrum, normalized_expansion, ClosedFormEngine,
    PerturbMatrix, PerturbationFunction, Route,
};
use steklov_core::quadrature::build_grid;

use crate::config::*;
use crate::verify;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::Matrix(a) => matrix(a),
        Command::Table(a) => table(a),
        Command::Verify(a) => verify::run(a),
        Command::OracleSlope(a) => oracle_slope(a),
        Command::DiagnoseP2k(a) => diagnose(a),
    }
}

pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

struct Assembled {
    matrix: PerturbMatrix,
    cross_route_diff: Option<f64>,
}

fn quadrature_matrix(k: u32, rho: &PerturbationFunction, quad_degree: Option<usize>) -> CliResult<PerturbMatrix> {
    Ok(match quad_degree {
        Some(deg) => assemble_matrix_quadrature(&build_grid(rho.dim(), deg)?, k, rho)?,
        None => assemble_matrix(Route::Quadrature, k, rho)?,
    })
}

fn assemble(route: RouteArg, k: u32, rho: &PerturbationFunction, quad_degree: Option<usize>, tol: f64) -> CliResult<Assembled> {
    match route {
        RouteArg::Wigner => Ok(Assembled { matrix: assemble_matrix(Route::Wigner, k, rho)?, cross_route_diff: None }),
        RouteArg::Quadrature => Ok(Assembled { matrix: quadrature_matrix(k, rho, quad_degree)?, cross_route_diff: None }),
        RouteArg::Both => {
            let w = assemble_matrix(Route::Wigner, k, rho)?;
            let q = quadrature_matrix(k, rho, quad_degree)?;
            let diff = w.matrix.max_abs_diff(&q.matrix);
            if !(diff <= tol) {
                return Err(CliError::Numerical(format!("routes disagree at k={k}: max |M_quad - M_wigner| = {diff:e} > {tol:e}")));
            }
            Ok(Assembled { matrix: w, cross_route_diff: Some(diff) })
        }
    }
}

fn matrix_setup(a: &MatrixArgs, command: &'static str) -> CliResult<(PerturbationFunction, ConfigEcho, f64)> {
    a.common.apply()?;
    let rho = load_rho(&a.rho)?;
    let d = a.common.resolve_dim(Some(&rho), 3)?;
    let k = check_k(a.k)?;
    let tol = check_tol(a.tol, 1e-9)?;
    let mut cfg = ConfigEcho::new(command).with_rho(Some(&a.rho), &rho);
    cfg.dim = Some(d);
    cfg.k = Some(k);
    cfg.route = Some(a.route);
    cfg.quad_degree = a.quad_degree;
    cfg.tol = Some(tol);
    Ok((rho, cfg, tol))
}

fn spectrum(a: MatrixArgs) -> CliResult<()> {
    let (rho, cfg, tol) = matrix_setup(&a, "spectrum")?;
    let asm = assemble(a.route, a.k, &rho, a.quad_degree, tol)?;
    let report = eigen_spectrum(&asm.matrix, rho.a01())?;
    let lambda: Vec<(f64, f64)> = normalized_expansion(&report);
    let mut v = serde_json::to_value(&report).expect("report serializes");
    let obj = v.as_object_mut().expect("object");
    obj.insert("config".into(), cfg.to_value());
    obj.insert("route".into(), json!(asm.matrix.route));
    obj.insert("Lambda0".into(), json!(lambda.first().map(|p| p.0)));
    obj.insert("Lambda1".into(), json!(lambda.iter().map(|p| p.1).collect::<Vec<_>>()));
    if let Some(diff) = asm.cross_route_diff {
        obj.insert("cross_route_diff".into(), json!(diff));
    }
    a.common.write(&to_json_text(&v))
}

fn matrix(a: MatrixArgs) -> CliResult<()> {
    let (rho, cfg, tol) = matrix_setup(&a, "matrix")?;
    let asm = assemble(a.route, a.k, &rho, a.quad_degree, tol)?;
    let m = &asm.matrix;
    let n = m.size();
    let re: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.matrix[(i, j)].re).collect()).collect();
    let im: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.matrix[(i, j)].im).collect()).collect();
    let v = json!({
        "config": cfg.to_value(),
        "d": m.d,
        "k": m.k,
        "route": m.route,
        "basis": m.basis,
        "real": re,
        "imag": im,
        "hermitian_defect": m.matrix.hermitian_defect(),
        "cross_route_diff": asm.cross_route_diff,
    });
    a.common.write(&to_json_text(&v))
}

fn table(a: TableArgs) -> CliResult<()> {
    a.common.apply()?;
    let rho = load_rho(&a.rho)?;
    let d = a.common.resolve_dim(Some(&rho), 3)?;
    let tol = check_tol(a.tol, 1e-9)?;
    let ks: Vec<u32> = match (a.k, a.kmax) {
        (Some(k), None) => vec![check_k(k)?],
        (None, Some(kmax)) => (1..=check_k(kmax)?).collect(),
        _ => return Err(CliError::Parse("table needs --k or --kmax".into())),
    };
    let mut cfg = ConfigEcho::new("table").with_rho(Some(&a.rho), &rho);
    cfg.dim = Some(d);
    cfg.k = a.k;
    cfg.kmax = a.kmax;
    cfg.route = Some(a.route);
    cfg.quad_degree = a.quad_degree;
    cfg.tol = Some(tol);

    let mut out = format!("# config {}\n", serde_json::to_string(&cfg.to_value()).expect("json"));
    out.push_str("d,k,global_index,lambda1,e,Lambda1\n");
    for k in ks {
        let asm = assemble(a.route, k, &rho, a.quad_degree, tol)?;
        let report = eigen_spectrum(&asm.matrix, rho.a01())?;
        let lambda = normalized_expansion(&report);
        for (j, (l1, e)) in report.lambda1.iter().zip(&report.e).enumerate() {
            out.push_str(&format!("{d},{k},{},{l1:?},{e:?},{:?}\n", report.index_range.0 + j as u64, lambda[j].1));
        }
    }
    a.common.write(&out)
}

fn oracle_slope(a: OracleArgs) -> CliResult<()> {
    a.common.apply()?;
    let loaded = a.rho.as_ref().map(load_rho).transpose()?;
    let d = a.common.resolve_dim(loaded.as_ref(), 3)?;
    let rho = match loaded {
        Some(r) => r,
        None => default_oracle_rho(d)?,
    };
    let k = check_k(a.k)?;
    let eps = check_eps(&a.eps)?;
    if let Some(l) = a.band_limit {
        if l < k + rho.band() {
            return Err(CliError::Parse(format!("--band-limit {l} must be >= k + band(rho) = {}", k + rho.band())));
        }
    }
    let mut cfg = ConfigEcho::new("oracle-slope").with_rho(a.rho.as_ref(), &rho);
    cfg.dim = Some(d);
    cfg.k = Some(k);
    cfg.eps = Some(eps.clone());
    cfg.band_limit = a.band_limit;
    let study = slope_study(&rho, k, &eps, a.band_limit)?;
    let mut v = serde_json::to_value(&study).expect("study serializes");
    v.as_object_mut().expect("object").insert("config".into(), cfg.to_value());
    a.common.write(&to_json_text(&v))
}

fn diagnose(a: DiagnoseArgs) -> CliResult<()> {
    a.common.apply()?;
    let d = a.common.resolve_dim(None, 3)?;
    let k = check_k(a.k)?;
    let mut cfg = ConfigEcho::new("diagnose-p2k");
    cfg.dim = Some(d);
    cfg.k = Some(k);
    cfg.xi = Some(a.xi);
    let diag = diagnose_p2k(&mut ClosedFormEngine::new(), d, k, a.xi)?;
    let mut v = serde_json::to_value(&diag).expect("diagnostic serializes");
    v.as_object_mut().expect("object").insert("config".into(), cfg.to_value());
    a.common.write(&to_json_text(&v))
}
