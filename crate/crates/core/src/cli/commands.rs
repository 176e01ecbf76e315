use std::io::Write as _;
use std::path::Path;

use collisionless::analytic2;
use collisionless::critical::{self, CriticalSystem};
use collisionless::impact::{
    find_roots, scan_contour, solution_at, solve_impact, ImpactEquations, ImpactSolution, ImpactTimes, NewtonOptions,
    RootFilter,
};
use collisionless::model::{
    build_armed_biped, model_from_json, n2_spectrum, ArmedBipedParams, ModelSpec, N2Family, N2Params, SpectraFile,
    SpectrumPair,
};
use collisionless::reproduce::{reproduce_reference, Fixtures};
use collisionless::spectral::{analyze, constrained_spectrum, normal_modes, SpectralData};
use collisionless::trajectory::{synthesize, validate, Tolerances, Trajectory, ValidationReport};
use collisionless::Error;
use serde::Serialize;

use super::args::{BranchRange, GridArgs, ModelArgs, Pick, PlotFormat, TrajectoryFormat};
use super::manifest::Recorder;
use super::{Failure, EXIT_MISMATCH, EXIT_NO_EXISTENCE, EXIT_NO_ROOT, EXIT_VALIDATION};

/// Rank-gap threshold separating accepted roots from numerical accidents.
const RANK_GAP_ACCEPT: f64 = 1e-6;

pub struct Ctx<'a> {
    pub json: bool,
    pub seed: u64,
    pub tol: Option<f64>,
    pub config: Option<&'a Path>,
    pub rec: Recorder,
}

impl Ctx<'_> {
    fn tolerances(&self) -> Tolerances {
        self.tol.map_or_else(Tolerances::default, Tolerances::uniform)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        self.rec
            .write(name, contents)
            .map_err(|e| Failure::from(Error::from(e)))?;
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<String, Failure> {
        let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
        self.write(name, &text)?;
        Ok(text)
    }

    /// Prints `text` for humans, or `json` when --json is set.
    fn emit(&self, text: &str, json: &str) {
        let mut out = std::io::stdout().lock();
        let _ = if self.json {
            writeln!(out, "{json}")
        } else {
            write!(out, "{text}")
        };
    }
}

/// What a command operates on: a full model, or spectra alone.
enum Subject {
    Model(ModelSpec),
    Spectra { name: String, spectra: SpectrumPair },
}

impl Subject {
    fn name(&self) -> &str {
        match self {
            Subject::Model(m) => &m.name,
            Subject::Spectra { name, .. } => name,
        }
    }

    fn spectra(&self) -> Result<SpectrumPair, Failure> {
        match self {
            Subject::Model(m) => {
                let modes = normal_modes(m)?;
                let lambda_prime = constrained_spectrum(m, &modes.lambda)?;
                Ok(SpectrumPair::new(
                    modes.lambda,
                    lambda_prime,
                    m.sigma.clone(),
                    m.sigma_prime.clone(),
                )?)
            }
            Subject::Spectra { spectra, .. } => Ok(spectra.clone()),
        }
    }

    fn model(&self) -> Result<&ModelSpec, Failure> {
        match self {
            Subject::Model(m) => Ok(m),
            Subject::Spectra { name, .. } => Err(Failure::general(format!(
                "`{name}` is given by its spectra only; this command needs mass and stiffness matrices"
            ))),
        }
    }
}

fn resolve_subject(ctx: &mut Ctx, args: &ModelArgs) -> Result<Subject, Failure> {
    if let Some(path) = ctx.config {
        let text = ctx.rec.read_input(path).map_err(Error::from)?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
        if value.get("mass").is_some() {
            return Ok(Subject::Model(model_from_json(&text)?));
        }
        let file: SpectraFile = serde_json::from_value(value).map_err(Error::from)?;
        let name = file.name.clone().unwrap_or_else(|| {
            path.file_stem()
                .map_or("spectra".into(), |s| s.to_string_lossy().into_owned())
        });
        return Ok(Subject::Spectra {
            name,
            spectra: SpectrumPair::from_file(&file)?,
        });
    }
    if args.model == "armed-biped" {
        let params = ArmedBipedParams {
            theta: args.theta,
            ..ArmedBipedParams::default()
        };
        return Ok(Subject::Model(build_armed_biped(params)?));
    }
    let family: N2Family = args.model.parse()?;
    let params = match family {
        N2Family::Hopper | N2Family::Juggler => N2Params::hopper(args.omega2, args.omega1p),
        N2Family::Rimless | N2Family::Rocker => N2Params::unstable(args.nu1, args.omega2, args.omega1p),
    };
    Ok(Subject::Spectra {
        name: family.name().into(),
        spectra: n2_spectrum(family, params)?,
    })
}

fn existence_gate(spectra: &SpectrumPair) -> Result<(), Failure> {
    if critical::existence_gate(&spectra.lambda_prime) {
        return Ok(());
    }
    let top = spectra.lambda_prime[spectra.lambda_prime.len() - 1];
    Err(Failure {
        code: EXIT_NO_EXISTENCE,
        message: format!(
            "no collisionless solution exists: the top constrained eigenvalue is {top} <= 0 \
             (the constrained phase has no oscillating mode)"
        ),
    })
}

pub fn list_models(ctx: &Ctx) -> Result<u8, Failure> {
    let rows = [
        (
            "armed-biped",
            "3",
            "model",
            "planar biped with legs at a fixed angle, torso and hanging arm (--theta)",
        ),
        ("hopper", "2", "spectra", "zero mode; --omega2, --omega1p"),
        ("juggler", "2", "spectra", "zero mode; --omega2, --omega1p"),
        ("rimless", "2", "spectra", "--nu1, --omega2, --omega1p"),
        ("rocker", "2", "spectra", "--nu1, --omega2, --omega1p"),
    ];
    let json: Vec<_> = rows
        .iter()
        .map(|(name, n, kind, about)| serde_json::json!({"name": name, "n": n.parse::<usize>().unwrap(), "kind": kind, "description": about}))
        .collect();
    let mut text = String::new();
    for (name, n, kind, about) in rows {
        text.push_str(&format!("{name:<12} N={n}  {kind:<8} {about}\n"));
    }
    ctx.emit(&text, &serde_json::to_string_pretty(&json).map_err(Error::from)?);
    Ok(0)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RootEntry {
    row: usize,
    times: ImpactTimes,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_prime: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    accepted: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SolveOutput {
    model: String,
    spectra: SpectraFile,
    pick: Pick,
    roots_found: usize,
    rejected_seeds: usize,
    solutions: Vec<RootEntry>,
}

struct Picked {
    /// `(row, root)` pairs chosen by the pick strategy.
    roots: Vec<(usize, ImpactTimes)>,
    found: usize,
    rejected: usize,
}

/// Scans the grid, refines every seed and keeps the roots selected by `pick`.
fn picked_roots(eq: &ImpactEquations, grid: &GridArgs, pick: Pick) -> Result<Picked, Failure> {
    let field = scan_contour(eq, &grid.spec())?;
    let set = find_roots(eq, &field, &NewtonOptions::default(), &RootFilter::default());
    let all: Vec<(usize, ImpactTimes)> = set.rows.iter().copied().zip(set.roots.iter().copied()).collect();
    let picked = match pick {
        Pick::All => all.clone(),
        Pick::LowestRow => all.first().copied().into_iter().collect(),
        Pick::Nearest { o_n, o_prime } => set
            .nearest(o_n, o_prime)
            .and_then(|t| all.iter().find(|(_, r)| r == t).copied())
            .into_iter()
            .collect(),
    };
    if picked.is_empty() {
        return Err(Failure {
            code: EXIT_NO_ROOT,
            message: format!(
                "no converged root of the impact equations on the grid (0, {}] x (0, {}] ({} seeds rejected)",
                grid.o_max, grid.op_max, set.rejected
            ),
        });
    }
    Ok(Picked {
        roots: picked,
        found: all.len(),
        rejected: set.rejected,
    })
}

fn check_solution(
    model: &ModelSpec,
    sd: &SpectralData,
    eq: &ImpactEquations,
    times: ImpactTimes,
    samples: usize,
    tol: &Tolerances,
) -> Result<(ImpactSolution, ValidationReport), Failure> {
    let sol = solution_at(sd, eq, times)?;
    let traj = synthesize(model, &sol, samples)?;
    let report = validate(&traj, model, tol)?;
    Ok((sol, report))
}

pub fn solve(ctx: &mut Ctx, args: &ModelArgs, grid: &GridArgs, pick: Pick, samples: usize) -> Result<u8, Failure> {
    let subject = resolve_subject(ctx, args)?;
    let spectra = subject.spectra()?;
    existence_gate(&spectra)?;
    let eq = ImpactEquations::new(spectra.clone())?;
    let Picked {
        roots: picked,
        found,
        rejected,
    } = picked_roots(&eq, grid, pick)?;
    let tol = ctx.tolerances();
    let sd = match &subject {
        Subject::Model(m) => Some(analyze(m)?),
        Subject::Spectra { .. } => None,
    };
    let mut solutions = Vec::new();
    for (row, times) in picked {
        let entry = match (&subject, &sd) {
            (Subject::Model(model), Some(sd)) => match check_solution(model, sd, &eq, times, samples, &tol) {
                Ok((sol, report)) => RootEntry {
                    row,
                    times,
                    rank_gap: Some(sol.rank_gap),
                    weight_residual: Some(sol.weight_residual),
                    q: Some(sol.q.as_slice().to_vec()),
                    q_prime: Some(sol.q_prime.as_slice().to_vec()),
                    accepted: report.passed && sol.rank_gap < RANK_GAP_ACCEPT,
                    validation: Some(report),
                    error: None,
                },
                Err(f) => RootEntry {
                    row,
                    times,
                    rank_gap: None,
                    weight_residual: None,
                    q: None,
                    q_prime: None,
                    validation: None,
                    error: Some(f.message),
                    accepted: false,
                },
            },
            _ => RootEntry {
                row,
                times,
                rank_gap: None,
                weight_residual: None,
                q: None,
                q_prime: None,
                validation: None,
                error: None,
                accepted: true,
            },
        };
        solutions.push(entry);
    }
    let output = SolveOutput {
        model: subject.name().into(),
        spectra: spectra.to_file(None),
        pick,
        roots_found: found,
        rejected_seeds: rejected,
        solutions,
    };
    let json = ctx.write_json("solution.json", &output)?;
    let mut text = format!(
        "{}: {} root(s) on the grid, {} reported\n",
        output.model,
        found,
        output.solutions.len()
    );
    text.push_str("row       tau        tau'         o_N        o'    rank gap   accepted\n");
    for e in &output.solutions {
        text.push_str(&format!(
            "{:>3} {:>9.5} {:>10.5} {:>11.5} {:>9.5} {:>11} {:>10}\n",
            e.row,
            e.times.tau,
            e.times.tau_prime,
            e.times.o_n,
            e.times.o_prime,
            e.rank_gap.map_or("-".into(), |g| format!("{g:.1e}")),
            e.accepted
        ));
    }
    ctx.emit(&text, &json);
    Ok(if output.solutions.iter().any(|e| e.accepted) {
        0
    } else {
        EXIT_VALIDATION
    })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CrossReport {
    n: usize,
    o_n: f64,
    o_prime: f64,
    /// Root reached by Newton refinement from the cross, if any.
    refined: Option<(f64, f64)>,
    displacement: Option<f64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ContourSummary {
    model: String,
    points: usize,
    seeds: usize,
    polylines: [usize; 2],
    crosses: Vec<CrossReport>,
}

pub fn contour(
    ctx: &mut Ctx,
    args: &ModelArgs,
    grid: &GridArgs,
    asymptotes: Option<BranchRange>,
    format: PlotFormat,
) -> Result<u8, Failure> {
    let subject = resolve_subject(ctx, args)?;
    let spectra = subject.spectra()?;
    let eq = ImpactEquations::new(spectra.clone())?;
    let field = scan_contour(&eq, &grid.spec())?;
    let mut crosses = Vec::new();
    if let Some(range) = asymptotes {
        for n in range.iter() {
            let p = critical::large_tau_asymptote(n, &spectra)?;
            let refined = solve_impact(&eq, (p.o_n, p.o_prime), &NewtonOptions::default()).ok();
            crosses.push(CrossReport {
                n,
                o_n: p.o_n,
                o_prime: p.o_prime,
                refined: refined.map(|t| (t.o_n, t.o_prime)),
                displacement: refined.map(|t| (t.o_n - p.o_n).hypot(t.o_prime - p.o_prime)),
            });
        }
    }
    if matches!(format, PlotFormat::Csv | PlotFormat::Both) {
        ctx.write("contour.csv", &field.to_csv())?;
    }
    if matches!(format, PlotFormat::Svg | PlotFormat::Both) {
        let pts: Vec<(f64, f64)> = crosses.iter().map(|c| (c.o_n, c.o_prime)).collect();
        ctx.write("contour.svg", &field.to_svg(&pts))?;
    }
    let summary = ContourSummary {
        model: subject.name().into(),
        points: field.o_n.len() * field.o_prime.len(),
        seeds: field.seeds.len(),
        polylines: [field.curves[0].len(), field.curves[1].len()],
        crosses,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
    let mut text = format!(
        "{}: {} grid points, {} + {} zero-level polylines, {} intersection seeds\n",
        summary.model, summary.points, summary.polylines[0], summary.polylines[1], summary.seeds
    );
    for c in &summary.crosses {
        text.push_str(&format!(
            "branch {}: asymptote ({:.4}, {:.4}), refined displacement {}\n",
            c.n,
            c.o_n,
            c.o_prime,
            c.displacement.map_or("-".into(), |d| format!("{d:.4}"))
        ));
    }
    ctx.emit(&text, &json);
    Ok(0)
}

pub fn trajectory(
    ctx: &mut Ctx,
    args: &ModelArgs,
    grid: &GridArgs,
    pick: Pick,
    samples: usize,
    format: TrajectoryFormat,
) -> Result<u8, Failure> {
    if pick == Pick::All {
        return Err(Failure::general(
            "trajectory exports one root; use lowest-row or nearest=O_N,O_PRIME",
        ));
    }
    let subject = resolve_subject(ctx, args)?;
    let model = subject.model()?.clone();
    let spectra = subject.spectra()?;
    existence_gate(&spectra)?;
    let sd = analyze(&model)?;
    let eq = ImpactEquations::new(spectra)?;
    let picked = picked_roots(&eq, grid, pick)?;
    let sol = solution_at(&sd, &eq, picked.roots[0].1)?;
    let traj = synthesize(&model, &sol, samples)?;
    let report = validate(&traj, &model, &ctx.tolerances())?;
    let all = format == TrajectoryFormat::All;
    if all || format == TrajectoryFormat::Csv {
        ctx.write("trajectory.csv", &traj.to_csv())?;
    }
    if all || format == TrajectoryFormat::Svg {
        ctx.write("trajectory.svg", &traj.to_svg())?;
    }
    if all || format == TrajectoryFormat::Json {
        ctx.write("trajectory.json", &traj.to_json()?)?;
    }
    let json = ctx.write_json("validation.json", &report)?;
    let text = format!(
        "{}: tau = {:.6}, tau' = {:.6}, {} samples\n{}",
        model.name,
        sol.times.tau,
        sol.times.tau_prime,
        traj.samples.len(),
        report_text(&report)
    );
    ctx.emit(&text, &json);
    Ok(if report.passed { 0 } else { EXIT_VALIDATION })
}

fn report_text(r: &ValidationReport) -> String {
    format!(
        "impact velocity residual  {:.3e}\nimpact accel residual     {:.3e}\ncontinuity residual       {:.3e}\n\
         energy variation          {:.3e}\npenetration (min)         {:.3e}\ncontact force (min)       {:.3e}\n{}\n",
        r.impact_velocity_residual,
        r.impact_accel_residual,
        r.continuity_residual,
        r.energy_variation,
        r.penetration_violation,
        r.contact_force_violation,
        if r.passed { "passed" } else { "FAILED" }
    )
}

pub fn validate_cmd(ctx: &mut Ctx, args: &ModelArgs, path: &Path) -> Result<u8, Failure> {
    let text = ctx.rec.read_input(path).map_err(Error::from)?;
    let traj = Trajectory::from_json(&text)?;
    let subject = resolve_subject(ctx, args)?;
    let model = subject.model()?;
    let report = validate(&traj, model, &ctx.tolerances())?;
    let json = ctx.write_json("validation.json", &report)?;
    ctx.emit(&report_text(&report), &json);
    Ok(if report.passed { 0 } else { EXIT_VALIDATION })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BranchRow {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    solution: Option<analytic2::N2Solution>,
    /// Scaled impact-equation residuals at the closed-form phases.
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn analytic2_cmd(
    ctx: &mut Ctx,
    family: N2Family,
    nu1: f64,
    omega2: f64,
    omega1p: f64,
    branches: BranchRange,
) -> Result<u8, Failure> {
    let params = match family {
        N2Family::Hopper | N2Family::Juggler => N2Params::hopper(omega2, omega1p),
        N2Family::Rimless | N2Family::Rocker => N2Params::unstable(nu1, omega2, omega1p),
    };
    let spectra = n2_spectrum(family, params)?;
    let rows: Vec<BranchRow> = branches
        .iter()
        .map(|n| match analytic2::solve_family(family, &spectra, n) {
            Ok(s) => BranchRow {
                n,
                residual: analytic2::residuals(&spectra, s.o2, s.o_prime1).ok(),
                solution: Some(s),
                error: None,
            },
            Err(e) => BranchRow {
                n,
                solution: None,
                residual: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let out = serde_json::json!({
        "family": family,
        "spectra": spectra.to_file(None),
        "branches": rows,
    });
    let json = ctx.write_json("analytic2.json", &out)?;
    let mut text = format!(
        "{} family\n  n        o2        o'1        tau       tau'         mu\n",
        family.name()
    );
    for r in &rows {
        match (&r.solution, &r.error) {
            (Some(s), _) => text.push_str(&format!(
                "{:>3} {:>9.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}\n",
                r.n, s.o2, s.o_prime1, s.tau, s.tau_prime, s.mu
            )),
            (None, Some(e)) => text.push_str(&format!("{:>3} {e}\n", r.n)),
            _ => {}
        }
    }
    ctx.emit(&text, &json);
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
pub fn critical_cmd(
    ctx: &mut Ctx,
    args: &ModelArgs,
    study_c0: bool,
    sample_spectra: bool,
    dim: usize,
    samples: usize,
    epsilon: f64,
    o_max: f64,
    branches: BranchRange,
) -> Result<u8, Failure> {
    if study_c0 {
        let summary = critical::c0_sampling_study(samples, dim, ctx.seed, o_max)?;
        let json = ctx.write_json("critical-study.json", &summary)?;
        let text = format!(
            "N = {}, {} samples (seed {}): {} critical roots, {} with c0 <= 0, min c0 = {:.6}, {} samples without a root\n",
            summary.n, summary.samples, summary.seed, summary.roots, summary.non_positive, summary.min_c0, summary.failures
        );
        ctx.emit(&text, &json);
        return Ok(0);
    }
    if sample_spectra {
        let spectra = critical::sample_near_critical_spectra(ctx.seed, dim, epsilon)?;
        let file = spectra.to_file(Some(format!("near-critical-N{dim}-seed{}", ctx.seed)));
        let json = ctx.write_json("spectra.json", &file)?;
        let text = format!(
            "lambda  = {:?}\nlambda' = {:?}\n",
            spectra.lambda.as_slice(),
            spectra.lambda_prime.as_slice()
        );
        ctx.emit(&text, &json);
        return Ok(0);
    }
    let subject = resolve_subject(ctx, args)?;
    let spectra = subject.spectra()?;
    let report = critical::critical_report(&spectra, o_max, branches.iter())?;
    let system = CriticalSystem::new(&spectra)?;
    let (k, kt) = system.k_matrices(report.tau_critical)?;
    let json = ctx.write_json("critical.json", &report)?;
    let mut text = format!(
        "{}: critical tau = {:.6} (o_N = {:.6}), c0 = {:.6}\nK = {:?}\nK~ = {:?}\n",
        subject.name(),
        report.tau_critical,
        report.o_n,
        report.c0,
        k.as_slice(),
        kt.as_slice()
    );
    for p in &report.asymptotic_grid {
        text.push_str(&format!("branch {}: o_N = {:.6}, o' = {:.6}\n", p.n, p.o_n, p.o_prime));
    }
    ctx.emit(&text, &json);
    Ok(0)
}

pub fn reproduce_cmd(ctx: &mut Ctx, perturb: f64) -> Result<u8, Failure> {
    let fixtures = Fixtures::default().perturbed(perturb);
    let report = reproduce_reference(&fixtures)?;
    let json = ctx.write_json("reproduce.json", &report)?;
    ctx.emit(&report.to_table(), &json);
    Ok(if report.passed { 0 } else { EXIT_MISMATCH })
}
