use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncdomain::charcurv::{self, curvature, factorization_residual, star_curvature};
use ncdomain::fock::{bohr_margin, build_fock, defect_residual, wiener_check, TruncatedFock};
use ncdomain::io::{self, CoeffEntry, ComplexJson, PickJson, Report, TupleJson};
use ncdomain::kernel::{self, kernel_check, pick_feasible, right_spectrum_witness, z_vector};
use ncdomain::poisson;
use ncdomain::symbol::{self, compute_b, Coeffs, FreeSymbol};
use ncdomain::tuples::{self, OperatorTuple};
use ncdomain::{Error, C64};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "ncdomain", version, about = "Finite-truncation numerics for noncommutative domains")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override, `name=value`; repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Suppress the one-line summary on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    /// Run the library single-threaded.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    #[command(subcommand)]
    Symbol(SymbolCmd),
    #[command(subcommand)]
    Fock(FockCmd),
    #[command(subcommand)]
    Tuple(TupleCmd),
    #[command(subcommand)]
    Poisson(PoissonCmd),
    #[command(subcommand)]
    Kernel(KernelCmd),
    #[command(subcommand)]
    Pick(PickCmd),
    #[command(subcommand)]
    Charfn(CharfnCmd),
    /// Curvature and *-curvature of a tuple.
    Curvature {
        #[command(flatten)]
        st: SymTuple,
        #[arg(long, default_value_t = tuples::DEFAULT_KMAX)]
        kmax: usize,
    },
    /// Corona lower bound `λ_min(Σ φ_i φ_i*)` on low degrees.
    Corona {
        #[command(flatten)]
        sym: Sym,
        #[arg(long)]
        level: usize,
        /// JSON array of coefficient lists.
        #[arg(long)]
        phis: String,
        /// Degree of the compression; defaults to the level.
        #[arg(long)]
        degree: Option<usize>,
    },
}

#[derive(Args)]
struct Sym {
    /// Symbol JSON file or inline JSON.
    #[arg(long)]
    symbol: String,
}

#[derive(Args)]
struct SymTuple {
    #[command(flatten)]
    sym: Sym,
    /// Tuple JSON file or inline JSON.
    #[arg(long)]
    tuple: String,
}

#[derive(Subcommand)]
enum SymbolCmd {
    /// The b-table up to a degree, with its cross-checks.
    Coeffs {
        #[command(flatten)]
        sym: Sym,
        #[arg(long)]
        degree: usize,
    },
    /// Radius test for a coefficient map.
    Radius {
        #[command(flatten)]
        sym: Sym,
        #[arg(long)]
        coeffs: String,
        #[arg(long)]
        degree: usize,
    },
}

#[derive(Subcommand)]
enum FockCmd {
    /// Build the truncated model and report its defect residual.
    Build {
        #[command(flatten)]
        sym: Sym,
        #[arg(long)]
        level: usize,
    },
    /// Wiener coefficient inequality for `Σ c_β W_β`.
    Wiener {
        #[command(flatten)]
        sym: Sym,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        coeffs: String,
        #[arg(long = "norm-ub", default_value_t = 1.0)]
        norm_ub: f64,
    },
    /// Bohr margin at a point.
    Bohr {
        #[command(flatten)]
        sym: Sym,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        coeffs: String,
        #[arg(long)]
        lambda: String,
        #[arg(long = "norm-ub", default_value_t = 1.0)]
        norm_ub: f64,
    },
}

#[derive(Subcommand)]
enum TupleCmd {
    /// Membership, purity and complete non-coisometry.
    Classify {
        #[command(flatten)]
        st: SymTuple,
        #[arg(long, default_value_t = tuples::DEFAULT_KMAX)]
        kmax: usize,
    },
    /// Cauchy kernel by three routes and their agreement.
    Cauchy {
        #[command(flatten)]
        st: SymTuple,
        #[arg(long)]
        level: usize,
    },
    /// Random tuple rescaled to a gauge, emitted as tuple JSON.
    Random {
        #[command(flatten)]
        sym: Sym,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.8)]
        gauge: f64,
        #[arg(long)]
        commuting: bool,
    },
}

#[derive(Subcommand)]
enum PoissonCmd {
    /// Poisson kernel identities and transform residuals.
    Verify {
        #[command(flatten)]
        st: SymTuple,
        #[arg(long)]
        level: usize,
        #[arg(long = "max-len", default_value_t = 2)]
        max_len: usize,
    },
}

#[derive(Subcommand)]
enum KernelCmd {
    /// Eigenvector `z_λ` residuals and the right-spectrum witness.
    Point {
        #[command(flatten)]
        sym: Sym,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        lambda: String,
    },
    /// `K_f(μ, λ)` against the truncated inner product.
    Value {
        #[command(flatten)]
        sym: Sym,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        lambda: String,
    },
}

#[derive(Subcommand)]
enum PickCmd {
    /// Pick matrix positivity.
    Feasible {
        #[command(flatten)]
        sym: Sym,
        #[arg(long)]
        problem: String,
    },
}

#[derive(Subcommand)]
enum CharfnCmd {
    /// `Θ(z)` at a scalar point.
    Point {
        #[command(flatten)]
        st: SymTuple,
        #[arg(long)]
        z: String,
    },
    /// `I − ΘΘ* = KK*` on the truncated model.
    Factor {
        #[command(flatten)]
        st: SymTuple,
        #[arg(long)]
        level: usize,
    },
}

struct Ctx {
    seed: u64,
    tol: BTreeMap<String, f64>,
}

impl Ctx {
    /// Registered tolerance, overridden by `--tol` when given.
    fn tol(&mut self, used: &mut BTreeMap<String, f64>, name: &str, default: f64) -> f64 {
        let v = self.tol.remove(name).unwrap_or(default);
        used.insert(name.to_string(), v);
        v
    }
}

struct Output {
    report: Value,
    summary: String,
}

fn load(arg: &str, field: &str) -> ncdomain::Result<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(arg.to_string())
    } else {
        io::read_file(Path::new(arg), field)
    }
}

fn load_symbol(s: &Sym) -> ncdomain::Result<FreeSymbol> {
    let text = load(&s.symbol, "symbol")?;
    io::parse_symbol(&text)
}

fn load_tuple(arg: &str, f: &FreeSymbol) -> ncdomain::Result<OperatorTuple> {
    let t: TupleJson = io::parse(&load(arg, "tuple")?, "tuple")?;
    t.into_tuple(f.n())
}

fn load_point(arg: &str, field: &str, f: &FreeSymbol) -> ncdomain::Result<Vec<C64>> {
    let p: Vec<ComplexJson> = io::parse(&load(arg, field)?, field)?;
    if p.len() != f.n() {
        return Err(Error::DimensionMismatch(format!("{field} has {} coordinates, symbol has n = {}", p.len(), f.n())));
    }
    io::point_from_json(&p, field)
}

fn load_coeffs(arg: &str, field: &str, f: &FreeSymbol) -> ncdomain::Result<Coeffs> {
    let e: Vec<CoeffEntry> = io::parse(&load(arg, field)?, field)?;
    io::coeffs_from_json(&e, f.n(), field)
}

fn check_level(level: usize) -> ncdomain::Result<()> {
    if level == 0 {
        return Err(Error::InvalidInput { field: "level".into(), reason: "must be at least 1".into() });
    }
    Ok(())
}

fn fock_for(f: &FreeSymbol, level: usize) -> ncdomain::Result<TruncatedFock> {
    check_level(level)?;
    build_fock(f, level)
}

fn envelope<T: Serialize>(
    command: &str,
    f: &FreeSymbol,
    level: Option<(usize, usize)>,
    tol: BTreeMap<String, f64>,
    result: T,
) -> Value {
    let mut r = Report::new(command, f, result);
    if let Some((m, d)) = level {
        r = r.level(m, d);
    }
    r.tolerances = tol;
    serde_json::to_value(r).expect("report serializes")
}

fn run(cmd: Cmd, ctx: &mut Ctx) -> ncdomain::Result<Output> {
    let mut tol = BTreeMap::new();
    let out = match cmd {
        Cmd::Symbol(SymbolCmd::Coeffs { sym, degree }) => {
            let f = load_symbol(&sym)?;
            let b = compute_b(&f, degree);
            let table: Vec<Value> = ncdomain::words::enumerate_words(f.n(), degree)
                .into_iter()
                .map(|w| json!({ "word": w, "b": b.get(&w) }))
                .collect();
            let suffix = symbol::suffix_residual(&f, &b);
            let result = json!({
                "degree": degree,
                "b": table,
                "suffix_residual": suffix,
                "submultiplicativity_excess": symbol::submultiplicativity_excess(&b),
                "gamma": symbol::gamma_constant(&f, &compute_b(&f, f.support_degree())).ok(),
            });
            Output {
                summary: format!(
                    "b-table to degree {degree}: {} entries, suffix residual {suffix:e}",
                    b.values().len()
                ),
                report: envelope("symbol coeffs", &f, None, tol, result),
            }
        }
        Cmd::Symbol(SymbolCmd::Radius { sym, coeffs, degree }) => {
            let f = load_symbol(&sym)?;
            let c = load_coeffs(&coeffs, "coeffs", &f)?;
            let r = symbol::radius_test(&c, &compute_b(&f, degree), degree)?;
            tol.insert("radius".into(), r.tolerance);
            Output {
                summary: format!(
                    "trailing ρ {:.6}, plausibly holomorphic: {}",
                    r.trailing_max, r.plausibly_holomorphic
                ),
                report: envelope("symbol radius", &f, None, tol, r),
            }
        }
        Cmd::Fock(FockCmd::Build { sym, level }) => {
            let f = load_symbol(&sym)?;
            let fock = fock_for(&f, level)?;
            let t = ctx.tol(&mut tol, "defect", 1e-12);
            let d = defect_residual(&fock);
            let hist: Vec<Value> = (0..f.n())
                .map(|i| {
                    json!(fock
                        .weight_histogram(i)
                        .into_iter()
                        .map(|(w, c)| json!({"weight": w, "count": c}))
                        .collect::<Vec<_>>())
                })
                .collect();
            let result = json!({
                "dim": fock.dim(),
                "defect_residual": d.residual,
                "defect_ok": d.residual <= t,
                "weight_histograms": hist,
            });
            Output {
                summary: format!(
                    "dim {}, defect residual {:e} on degrees ≤ {}",
                    fock.dim(),
                    d.residual,
                    d.interior_degree
                ),
                report: envelope("fock build", &f, Some((level, d.interior_degree)), tol, result),
            }
        }
        Cmd::Fock(FockCmd::Wiener { sym, level, coeffs, norm_ub }) => {
            let f = load_symbol(&sym)?;
            let fock = fock_for(&f, level)?;
            let c = load_coeffs(&coeffs, "coeffs", &f)?;
            let r = wiener_check(&fock, &c, norm_ub)?;
            tol.insert("margin".into(), 1e-12);
            Output {
                summary: format!("Wiener inequality holds: {} (observed norm {:.6})", r.holds, r.observed_norm),
                report: envelope("fock wiener", &f, Some((level, level)), tol, r),
            }
        }
        Cmd::Fock(FockCmd::Bohr { sym, level, coeffs, lambda, norm_ub }) => {
            let f = load_symbol(&sym)?;
            let fock = fock_for(&f, level)?;
            let c = load_coeffs(&coeffs, "coeffs", &f)?;
            let p = load_point(&lambda, "lambda", &f)?;
            let r = bohr_margin(&fock, &c, &p, norm_ub)?;
            tol.insert("boundary_band".into(), kernel::BOUNDARY_BAND);
            Output {
                summary: format!("Bohr margin {:.12}, 3λ in domain: {}", r.margin, r.in_domain),
                report: envelope("fock bohr", &f, Some((level, level)), tol, r),
            }
        }
        Cmd::Tuple(TupleCmd::Classify { st, kmax }) => {
            let f = load_symbol(&st.sym)?;
            let t = load_tuple(&st.tuple, &f)?;
            let mem = tuples::membership(&f, &t)?;
            if !mem.member {
                let result =
                    json!({ "member": false, "defect_min_eig": mem.defect_min_eig, "tolerance": mem.tolerance });
                tol.insert("psd".into(), mem.tolerance);
                return Ok(Output {
                    summary: format!("not a member: λ_min(I − Φ(I)) = {:e}", mem.defect_min_eig),
                    report: envelope("tuple classify", &f, None, tol, result),
                });
            }
            let r = tuples::classify(&f, &t, kmax)?;
            tol.insert("psd".into(), r.tolerance);
            tol.insert("pure".into(), tuples::EPS_PURE);
            tol.insert("cnc".into(), tuples::EPS_CNC);
            Output {
                summary: format!("member, pure {}, c.n.c. {}, spectral radius {:.6}", r.pure, r.cnc, r.spectral_radius),
                report: envelope("tuple classify", &f, None, tol, r),
            }
        }
        Cmd::Tuple(TupleCmd::Cauchy { st, level }) => {
            let f = load_symbol(&st.sym)?;
            let t = load_tuple(&st.tuple, &f)?;
            let fock = fock_for(&f, level)?;
            let k = tuples::cauchy_kernel(&f, &t, &fock)?;
            let a = k.op.to_dense();
            let fourier = ncdomain::linalg::max_abs(&(tuples::cauchy_fourier(&f, &t, &fock)?.to_dense() - &a));
            let neumann = ncdomain::linalg::max_abs(&(tuples::cauchy_neumann(&f, &t, &fock)?.to_dense() - &a));
            let t_ag = ctx.tol(&mut tol, "agreement", 1e-10);
            let result = json!({
                "spectral_radius": k.spectral_radius,
                "fourier_difference": fourier,
                "neumann_difference": neumann,
                "agree": fourier <= t_ag && neumann <= t_ag,
                "norm": ncdomain::linalg::spectral_norm(&a),
                "norm_bound": tuples::cauchy_norm_bound(&f, &t, tuples::DEFAULT_KMAX)?,
                "warnings": k.warnings,
            });
            Output {
                summary: format!("Cauchy kernel routes differ by {:e} / {:e}", fourier, neumann),
                report: envelope("tuple cauchy", &f, Some((level, level)), tol, result),
            }
        }
        Cmd::Tuple(TupleCmd::Random { sym, d, gauge, commuting }) => {
            let f = load_symbol(&sym)?;
            if d == 0 {
                return Err(Error::InvalidInput { field: "d".into(), reason: "must be at least 1".into() });
            }
            let mut rng = tuples::seeded_rng(ctx.seed);
            let raw = if commuting {
                tuples::random_commuting_tuple(&mut rng, f.n(), d)
            } else {
                tuples::random_tuple(&mut rng, f.n(), d)
            };
            let t = tuples::scale_to_gauge(&f, &raw, gauge)?;
            let mut v = serde_json::to_value(TupleJson::from_tuple(&t)).expect("tuple serializes");
            v["schema"] = json!(io::SCHEMA);
            v["command"] = json!("tuple random");
            v["symbol_hash"] = json!(f.hash());
            v["seed"] = json!(ctx.seed);
            v["gauge"] = json!(tuples::gauge(&f, &t)?);
            v["tolerances"] = json!({});
            Output { summary: format!("random {d}×{d} tuple at gauge {gauge} (seed {})", ctx.seed), report: v }
        }
        Cmd::Poisson(PoissonCmd::Verify { st, level, max_len }) => {
            let f = load_symbol(&st.sym)?;
            let t = load_tuple(&st.tuple, &f)?;
            let fock = fock_for(&f, level)?;
            let r = poisson::verify(&f, &t, &fock, max_len)?;
            let ti = ctx.tol(&mut tol, "intertwine", 1e-9);
            let tt = ctx.tol(&mut tol, "transform", 1e-8);
            tol.insert("rank_cut".into(), poisson::RANK_CUT);
            let ok = r.intertwine_residual <= ti && r.transform_residual <= tt;
            let mut v = serde_json::to_value(&r).expect("report serializes");
            v["ok"] = json!(ok);
            Output {
                summary: format!(
                    "‖K*K − I‖ {:e}, intertwining {:e}, transform {:e}",
                    r.kk_residual, r.intertwine_residual, r.transform_residual
                ),
                report: envelope("poisson verify", &f, Some((level, r.interior_degree)), tol, v),
            }
        }
        Cmd::Kernel(KernelCmd::Point { sym, level, lambda }) => {
            let f = load_symbol(&sym)?;
            let fock = fock_for(&f, level)?;
            let p = load_point(&lambda, "lambda", &f)?;
            let z = z_vector(&fock, &p)?;
            let result = json!({
                "norm_sq": z.norm_sq,
                "full_norm_sq": z.full_norm_sq,
                "tail_bound": z.tail_bound,
                "eigen_residual": z.eigen_residual,
                "eigen_bound": z.eigen_bound,
                "eigen_ok": z.eigen_residual <= z.eigen_bound,
                "right_spectrum_witness": right_spectrum_witness(&fock, &p)?,
            });
            tol.insert("boundary_band".into(), kernel::BOUNDARY_BAND);
            Output {
                summary: format!("eigen residual {:e} ≤ bound {:e}", z.eigen_residual, z.eigen_bound),
                report: envelope("kernel point", &f, Some((level, level - 1)), tol, result),
            }
        }
        Cmd::Kernel(KernelCmd::Value { sym, level, mu, lambda }) => {
            let f = load_symbol(&sym)?;
            let fock = fock_for(&f, level)?;
            let m = load_point(&mu, "mu", &f)?;
            let l = load_point(&lambda, "lambda", &f)?;
            let k = kernel_check(&fock, &m, &l)?;
            tol.insert("boundary_band".into(), kernel::BOUNDARY_BAND);
            Output {
                summary: format!("K(μ,λ) = {}, truncation error {:e} ≤ {:e}", k.closed_form, k.difference, k.bound),
                report: envelope("kernel value", &f, Some((level, level)), tol, k),
            }
        }
        Cmd::Pick(PickCmd::Feasible { sym, problem }) => {
            let f = load_symbol(&sym)?;
            let p: PickJson = io::parse(&load(&problem, "problem")?, "problem")?;
            let (mut v, pm) = pick_feasible(&f, &p.into_problem()?)?;
            let t = ctx.tol(&mut tol, "pick", v.tolerance);
            v.feasible = v.min_eig >= -t;
            v.tolerance = t;
            tol.insert("node_separation".into(), kernel::NODE_SEPARATION);
            let result = json!({
                "feasible": v.feasible,
                "min_eig": v.min_eig,
                "asymmetry": pm.asymmetry,
                "pick_matrix": io::matrix_to_json(&pm.matrix),
            });
            Output {
                summary: format!("feasible: {}, λ_min {:e}", v.feasible, v.min_eig),
                report: envelope("pick feasible", &f, None, tol, result),
            }
        }
        Cmd::Charfn(CharfnCmd::Point { st, z }) => {
            let f = load_symbol(&st.sym)?;
            let t = load_tuple(&st.tuple, &f)?;
            let p = load_point(&z, "z", &f)?;
            let data = charcurv::char_data(&f, &t)?;
            let c = charcurv::char_point_with(&f, &t, &data, &p)?;
            let tf = ctx.tol(&mut tol, "factorization", 1e-10);
            let tc = ctx.tol(&mut tol, "contraction", 1e-10);
            tol.insert("rank_cut".into(), poisson::RANK_CUT);
            let result = json!({
                "theta": io::matrix_to_json(&c.theta),
                "norm": c.norm,
                "contractive": c.norm <= 1.0 + tc,
                "factor_residual": c.factor_residual,
                "factor_ok": c.factor_residual <= tf,
                "gauge": c.gauge,
                "slots": data.slots,
                "rank_defect": data.rank_c,
                "rank_defect_star": data.rank_cstar,
                "commuting": t.commutator_norm() <= 1e-12,
            });
            Output {
                summary: format!("‖Θ(z)‖ = {:.12}, factorization residual {:e}", c.norm, c.factor_residual),
                report: envelope("charfn point", &f, None, tol, result),
            }
        }
        Cmd::Charfn(CharfnCmd::Factor { st, level }) => {
            let f = load_symbol(&st.sym)?;
            let t = load_tuple(&st.tuple, &f)?;
            let fock = fock_for(&f, level)?;
            let r = factorization_residual(&f, &t, &fock)?;
            let tf = ctx.tol(&mut tol, "factorization", 1e-7);
            let mut v = serde_json::to_value(&r).expect("report serializes");
            v["ok"] = json!(r.residual <= tf);
            Output {
                summary: format!("‖(I − ΘΘ*) − KK*‖_F = {:e} on degrees ≤ {}", r.residual, r.interior_degree),
                report: envelope("charfn factor", &f, Some((level, r.interior_degree)), tol, v),
            }
        }
        Cmd::Curvature { st, kmax } => {
            let f = load_symbol(&st.sym)?;
            let t = load_tuple(&st.tuple, &f)?;
            let curv = curvature(&f, &t, kmax)?;
            let star = star_curvature(&f, &t, kmax)?;
            let ellipsoid = if f.is_linear() {
                let a: Vec<f64> = (0..f.n()).map(|i| f.coeff(&ncdomain::words::Word::letter(i))).collect();
                Some(charcurv::ellipsoid_report(&a, &t, kmax)?)
            } else {
                None
            };
            tol.insert("plateau_relative".into(), charcurv::PLATEAU_REL);
            tol.insert("branch_band".into(), charcurv::BRANCH_BAND);
            let summary = format!(
                "curvature {:.9} ({}), *-curvature {:.9} ({})",
                curv.value(),
                if curv.primary.converged { "converged" } else { "not converged" },
                star.value(),
                if star.primary.converged { "converged" } else { "not converged" },
            );
            let result = json!({
                "kmax": kmax,
                "curvature": curv,
                "star_curvature": star,
                "model_candidate": ellipsoid.as_ref().map(|e| e.model_candidate),
                "pure": ellipsoid.as_ref().map(|e| e.pure),
            });
            Output { summary, report: envelope("curvature", &f, None, tol, result) }
        }
        Cmd::Corona { sym, level, phis, degree } => {
            let f = load_symbol(&sym)?;
            let fock = fock_for(&f, level)?;
            let raw: Vec<Vec<CoeffEntry>> = io::parse(&load(&phis, "phis")?, "phis")?;
            let cs = raw
                .iter()
                .enumerate()
                .map(|(i, e)| io::coeffs_from_json(e, f.n(), &format!("phis[{i}]")))
                .collect::<ncdomain::Result<Vec<_>>>()?;
            let d = degree.unwrap_or(level);
            let delta = kernel::corona_delta(&fock, &cs, d)?;
            let result =
                json!({ "delta_sq_lower": delta, "delta_lower": delta.max(0.0).sqrt(), "functions": cs.len() });
            Output {
                summary: format!("corona δ² estimate {delta:e} on degrees ≤ {d}"),
                report: envelope("corona", &f, Some((level, d)), tol, result),
            }
        }
    };
    if let Some(name) = ctx.tol.keys().next() {
        return Err(Error::InvalidInput {
            field: "tol".into(),
            reason: format!("`{name}` is not used by this command"),
        });
    }
    Ok(out)
}

fn parse_tol(items: &[String]) -> ncdomain::Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let bad = || Error::InvalidInput { field: "tol".into(), reason: format!("expected NAME=VALUE, got `{item}`") };
        let (k, v) = item.split_once('=').ok_or_else(bad)?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput {
                field: "tol".into(),
                reason: format!("`{k}` must be a finite nonnegative number"),
            });
        }
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn emit(out: &Output, path: Option<&Path>, quiet: bool) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&out.report).expect("report serializes");
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => writeln!(std::io::stdout(), "{text}")?,
    }
    if !quiet {
        eprintln!("{}", out.summary);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ncdomain::par::set_parallel(!cli.sequential);
    let result = parse_tol(&cli.tol).and_then(|tol| run(cli.cmd, &mut Ctx { seed: cli.seed, tol }));
    match result {
        Ok(out) => match emit(&out, cli.out.as_deref(), cli.quiet) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: cannot write report: {e}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
