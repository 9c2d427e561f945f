use std::collections::BTreeMap;
use std::path::Path;

use dmrg_lab::angular::{self, GaussianChain};
use dmrg_lab::ctm::{self, Boundary, CtmConfig};
use dmrg_lab::dmrg::{self, DmrgConfig};
use dmrg_lab::infogeo::{self, Bernoulli, IndependentBernoullis, ParametricFamily, ProbDist};
use dmrg_lab::models::{self, ChainSpec, SiteModel};
use dmrg_lab::oracles::{self, OracleReport};
use dmrg_lab::qinfo;
use dmrg_lab::{DenseMatrix, Error};
use serde::Serialize;

use crate::output::{self, Real};
use crate::{
    AngularCommand, BoundaryKind, Command, CtmArgs, DmrgArgs, Failure, FamilyKind, Format,
    GaussianArgs, InfogeoArgs, ModelArgs, ModelKind, OracleCommand, SpectrumArgs, WaveArgs,
    EXIT_NOT_CONVERGED,
};

/// Normalization tolerance for distributions given on the command line.
const INPUT_NORM_TOL: f64 = 1e-9;
/// Largest lattice the `ctm` command cross-checks by enumeration.
const CTM_CHECK_SPINS: usize = 16;
const CTM_CHECK_TOL: f64 = 1e-10;

type Outcome = Result<u8, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn numeric(e: impl std::fmt::Display) -> Failure {
    Failure::Numeric(e.to_string())
}

fn io(e: std::io::Error) -> Failure {
    Failure::Numeric(format!("writing output: {e}"))
}

fn finite(name: &str, x: f64) -> Result<f64, Failure> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(usage(format!("--{name} must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<f64, Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(usage(format!("--{name} must be positive, got {x}")))
    }
}

fn at_least(name: &str, x: usize, min: usize) -> Result<usize, Failure> {
    if x >= min {
        Ok(x)
    } else {
        Err(usage(format!("--{name} must be at least {min}, got {x}")))
    }
}

fn write(out: Option<&Path>, bytes: std::io::Result<Vec<u8>>) -> Result<(), Failure> {
    output::emit(out, &bytes.map_err(io)?).map_err(io)
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Dmrg(a) => cmd_dmrg(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Infogeo(a) => cmd_infogeo(a),
        Command::Angular { command } => match command {
            AngularCommand::Wave(a) => cmd_wave(a),
            AngularCommand::Spectrum(a) => cmd_gaussian(a),
        },
        Command::Ctm(a) => cmd_ctm(a),
        Command::Oracle { command } => cmd_oracle(command),
    }
}

struct BuiltModel {
    name: &'static str,
    params: BTreeMap<&'static str, f64>,
    model: SiteModel,
}

fn build_model(a: &ModelArgs) -> Result<BuiltModel, Failure> {
    let mut params = BTreeMap::new();
    let (name, model) = match a.model {
        ModelKind::Tfim => {
            params.insert("g", finite("g", a.g)?);
            ("tfim", models::tfim(a.g))
        }
        ModelKind::Heisenberg => {
            params.insert("jz", finite("jz", a.jz)?);
            ("heisenberg", models::heisenberg(a.jz))
        }
        ModelKind::Harmonic => {
            params.insert("mass", finite("mass", a.mass)?);
            params.insert("d_levels", at_least("d-levels", a.d_levels, 2)? as f64);
            (
                "harmonic",
                models::harmonic_chain(a.mass, a.d_levels).map_err(usage)?,
            )
        }
    };
    Ok(BuiltModel {
        name,
        params,
        model,
    })
}

#[derive(Serialize)]
struct FinalSpectrum<'a> {
    eigenvalues: &'a [f64],
    discarded_weight: f64,
    entropy: f64,
}

#[derive(Serialize)]
struct DmrgOutput<'a> {
    model: &'a str,
    params: &'a BTreeMap<&'static str, f64>,
    m_max: usize,
    seed: u64,
    iterations: usize,
    energy_trace: &'a [f64],
    energy_per_site_trace: &'a [f64],
    converged: bool,
    final_spectrum: FinalSpectrum<'a>,
}

fn cmd_dmrg(a: DmrgArgs) -> Outcome {
    let built = build_model(&a.model)?;
    at_least("m-max", a.m_max, 1)?;
    at_least("iters", a.iters, 1)?;
    positive("tol", a.tol)?;
    let mut cfg = DmrgConfig::new(a.m_max, a.iters, a.tol, a.seed);
    if let Some(w) = a.targets {
        cfg = cfg.with_targets(w);
    }
    cfg.validate().map_err(usage)?;

    let r = dmrg::run_infinite_dmrg(&built.model, &cfg).map_err(numeric)?;
    let bytes = match a.format {
        Format::Json => output::json(&DmrgOutput {
            model: built.name,
            params: &built.params,
            m_max: r.m_max,
            seed: a.seed,
            iterations: r.iterations,
            energy_trace: &r.energy_trace,
            energy_per_site_trace: &r.energy_per_site_trace,
            converged: r.converged,
            final_spectrum: FinalSpectrum {
                eigenvalues: &r.final_spectrum.kept_eigenvalues,
                discarded_weight: r.final_spectrum.discarded_weight,
                entropy: r.final_spectrum.entanglement_entropy,
            },
        }),
        Format::Csv => output::csv_rows(
            &["iteration", "index", "eigenvalue"],
            r.spectra.iter().enumerate().flat_map(|(it, s)| {
                s.kept_eigenvalues
                    .iter()
                    .enumerate()
                    .map(move |(i, l)| (it, i, *l))
            }),
        ),
    };
    write(a.out.as_deref(), bytes)?;
    Ok(if r.converged { 0 } else { EXIT_NOT_CONVERGED })
}

#[derive(Serialize)]
struct SpectrumOutput<'a> {
    model: &'a str,
    params: &'a BTreeMap<&'static str, f64>,
    n_sites: usize,
    cut: usize,
    energy: f64,
    eigenvalues: Vec<f64>,
    entropy_left: f64,
    entropy_right: f64,
}

fn cmd_spectrum(a: SpectrumArgs) -> Outcome {
    let built = build_model(&a.model)?;
    at_least("n", a.n, 2)?;
    let cut = a.cut.unwrap_or(a.n / 2);
    if cut == 0 || cut >= a.n {
        return Err(usage(format!("--cut must lie in 1..{}, got {cut}", a.n)));
    }
    let d = built.model.d;
    let spec = ChainSpec::new(built.model, a.n).map_err(usage)?;
    match spec.dim() {
        Some(dim) if dim <= models::MAX_EXACT_DIM => {}
        _ => return Err(usage("chain too large for exact diagonalization")),
    }
    let (energy, psi) = models::exact_ground_state(&spec).map_err(numeric)?;
    let rows = d.pow(cut as u32);
    let psi = DenseMatrix::from_row_slice(rows, psi.len() / rows, &psi);
    let (left, right) = qinfo::partial_densities(&psi).map_err(numeric)?;
    let eigenvalues = left.eigenvalues_desc();
    let bytes = match a.format {
        Format::Json => output::json(&SpectrumOutput {
            model: built.name,
            params: &built.params,
            n_sites: a.n,
            cut,
            energy,
            entropy_left: qinfo::von_neumann_entropy(&left),
            entropy_right: qinfo::von_neumann_entropy(&right),
            eigenvalues,
        }),
        Format::Csv => output::csv_rows(&["index", "eigenvalue"], eigenvalues.into_iter().enumerate()),
    };
    write(a.out.as_deref(), bytes)?;
    Ok(0)
}

fn parse_dist(name: &str, text: &str) -> Result<ProbDist, Failure> {
    let v: Vec<f64> = serde_json::from_str(text)
        .map_err(|e| usage(format!("--{name} must be a JSON array of numbers: {e}")))?;
    ProbDist::with_tolerance(v, INPUT_NORM_TOL).map_err(|e| usage(format!("--{name}: {e}")))
}

#[derive(Serialize)]
struct DivergenceOutput {
    alpha: f64,
    divergence: Real,
}

#[derive(Serialize)]
struct FisherOutput<'a> {
    family: &'a str,
    theta: &'a [f64],
    fisher_matrix: Vec<Vec<f64>>,
}

fn cmd_infogeo(a: InfogeoArgs) -> Outcome {
    positive("h", a.h)?;
    if let Some(family) = a.fisher {
        let theta = a.theta.ok_or_else(|| usage("--fisher needs --theta"))?;
        let (name, fam): (&str, Box<dyn ParametricFamily>) = match family {
            FamilyKind::Bernoulli => ("bernoulli", Box::new(Bernoulli)),
            FamilyKind::IndependentBernoullis => (
                "independent-bernoullis",
                Box::new(IndependentBernoullis { n: theta.len() }),
            ),
        };
        if theta.len() != fam.n_params() {
            return Err(usage(format!(
                "family {name} takes {} parameter(s), got {}",
                fam.n_params(),
                theta.len()
            )));
        }
        for &t in &theta {
            if !(t - a.h >= 0.0 && t + a.h <= 1.0) {
                return Err(usage(format!(
                    "--theta {t} must lie in [h, 1 − h] for a central difference"
                )));
            }
        }
        let g = infogeo::fisher_matrix(fam.as_ref(), &theta, a.h).map_err(numeric)?;
        let rows = (0..g.nrows())
            .map(|i| g.row(i).iter().copied().collect())
            .collect();
        let bytes = output::json(&FisherOutput {
            family: name,
            theta: &theta,
            fisher_matrix: rows,
        });
        write(a.out.as_deref(), bytes)?;
        return Ok(0);
    }
    let (Some(p), Some(q), Some(alpha)) = (a.p, a.q, a.alpha) else {
        return Err(usage("infogeo needs --p, --q and --alpha, or --fisher"));
    };
    let alpha = finite("alpha", alpha)?;
    let p = parse_dist("p", &p)?;
    let q = parse_dist("q", &q)?;
    if p.len() != q.len() {
        return Err(usage(format!(
            "--p has {} outcomes but --q has {}",
            p.len(),
            q.len()
        )));
    }
    let d = infogeo::alpha_divergence(&p, &q, alpha).map_err(numeric)?;
    write(
        a.out.as_deref(),
        output::json(&DivergenceOutput {
            alpha,
            divergence: d.into(),
        }),
    )?;
    Ok(0)
}

fn cmd_wave(a: WaveArgs) -> Outcome {
    if !(a.ell >= 0.0 && a.ell.is_finite()) {
        return Err(usage(format!("--ell must be finite and non-negative, got {}", a.ell)));
    }
    positive("mass", a.mass)?;
    positive("xmin", a.xmin)?;
    if !(a.xmax > a.xmin && a.xmax.is_finite()) {
        return Err(usage("--xmax must exceed --xmin"));
    }
    at_least("n", a.n, 2)?;
    let samples = angular::wave_samples(a.ell, a.mass, a.xmin, a.xmax, a.n).map_err(numeric)?;
    write(
        a.out.as_deref(),
        output::csv_rows(&["x", "value"], samples.iter().map(|s| (s.x, s.value))),
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct GaussianOutput<'a> {
    n: usize,
    cut: usize,
    mass: f64,
    epsilons: &'a [f64],
    rho_eigenvalues: &'a [f64],
    entropy: f64,
}

fn cmd_gaussian(a: GaussianArgs) -> Outcome {
    at_least("n", a.n, 2)?;
    if a.cut == 0 || a.cut >= a.n {
        return Err(usage(format!("--cut must lie in 1..{}, got {}", a.n, a.cut)));
    }
    at_least("modes", a.modes, 1)?;
    if !(a.mass >= 0.0 && a.mass.is_finite()) {
        return Err(usage(format!("--mass must be finite and non-negative, got {}", a.mass)));
    }
    let chain = GaussianChain::new(a.n, a.mass).map_err(usage)?;
    let s = angular::half_chain_spectrum(&chain, a.cut, a.modes, a.cutoff).map_err(numeric)?;
    write(
        a.out.as_deref(),
        output::json(&GaussianOutput {
            n: a.n,
            cut: a.cut,
            mass: chain.mass,
            epsilons: &s.epsilons,
            rho_eigenvalues: &s.rho_eigenvalues,
            entropy: s.entropy,
        }),
    )?;
    Ok(0)
}

fn boundary(b: BoundaryKind) -> Boundary {
    match b {
        BoundaryKind::Free => Boundary::Free,
        BoundaryKind::Fixed => Boundary::Fixed,
    }
}

#[derive(Serialize)]
struct CtmOutput<'a> {
    #[serde(rename = "L")]
    half_width: usize,
    beta_j: f64,
    boundary: Boundary,
    #[serde(rename = "Z")]
    z: Real,
    ln_z: f64,
    spectrum: &'a [f64],
    check_z_bruteforce: &'a str,
}

fn cmd_ctm(a: CtmArgs) -> Outcome {
    let cfg = CtmConfig::new(a.half_width, a.beta_j, boundary(a.boundary)).map_err(usage)?;
    let ln_z = ctm::ln_partition_function(&cfg).map_err(numeric)?;
    let z = ctm::partition_function(&cfg).map_err(numeric)?;
    let spectrum = ctm::half_row_density(&cfg)
        .map_err(numeric)?
        .eigenvalues_desc();
    let check = if cfg.total_spins() <= CTM_CHECK_SPINS {
        let brute = oracles::ising_brute_force_z(&cfg).map_err(numeric)?;
        if ((z - brute) / brute).abs() <= CTM_CHECK_TOL {
            "pass"
        } else {
            return Err(numeric(format!(
                "Tr A⁴ = {z} disagrees with enumeration {brute}"
            )));
        }
    } else {
        "skipped"
    };
    let bytes = match a.format {
        Format::Json => output::json(&CtmOutput {
            half_width: cfg.half_width,
            beta_j: cfg.beta_j,
            boundary: cfg.boundary,
            z: z.into(),
            ln_z,
            spectrum: &spectrum,
            check_z_bruteforce: check,
        }),
        Format::Csv => output::csv_rows(
            &["index", "eigenvalue", "ln_eigenvalue"],
            spectrum.iter().enumerate().map(|(i, l)| (i, *l, l.ln())),
        ),
    };
    write(a.out.as_deref(), bytes)?;
    Ok(0)
}

fn cmd_oracle(c: OracleCommand) -> Outcome {
    let report = match c {
        OracleCommand::TfimEnergy { g } => {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(usage(format!("--g must be finite and non-negative, got {g}")));
            }
            let e = oracles::tfim_energy_density_exact(g).map_err(numeric)?;
            OracleReport::new("tfim_energy_density", &[("g", g)], vec![e], 1e-13)
        }
        OracleCommand::TwoOscillator { mass } => {
            positive("mass", mass)?;
            let s = oracles::two_oscillator_reduced_spectrum(mass).map_err(numeric)?;
            OracleReport::new(
                "two_oscillator_reduced_spectrum",
                &[("mass", mass), ("nodes", oracles::TWO_OSCILLATOR_NODES as f64)],
                s,
                1e-12,
            )
        }
        OracleCommand::IsingZ {
            half_width,
            beta_j,
            boundary: b,
        } => {
            let cfg = CtmConfig {
                half_width,
                beta_j: finite("beta-j", beta_j)?,
                boundary: boundary(b),
            };
            if half_width == 0 || cfg.total_spins() > oracles::MAX_BRUTE_FORCE_SPINS {
                return Err(usage(Error::SizeGuard(format!(
                    "--L {half_width} outside the enumerable range 1..=2"
                ))));
            }
            let z = oracles::ising_brute_force_z(&cfg).map_err(numeric)?;
            let fixed = if cfg.boundary == Boundary::Fixed { 1.0 } else { 0.0 };
            OracleReport::new(
                "ising_brute_force_z",
                &[("L", half_width as f64), ("beta_j", beta_j), ("fixed_boundary", fixed)],
                vec![z],
                0.0,
            )
        }
    };
    write(None, output::json(&report))?;
    Ok(0)
}
