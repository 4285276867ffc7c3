use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use gnc_lasso::glasso::{self, GlassoOptions};
use gnc_lasso::io::{self, ModelDocument, PrecisionDocument};
use gnc_lasso::pipeline::{self, GncModel, ModelConfig};
use gnc_lasso::sim::{self, HarnessOptions, Method, SimConfig, SimulationSummary};
use gnc_lasso::smoother::{self, TuningCurve};
use gnc_lasso::{GncError, LaplacianSpectrum, Matrix, Network, SpectralBasis, StandardizedLaplacian};

use crate::manifest::{self, ManifestBuilder};
use crate::{AlphaArgs, Cli, Command, DataArgs, DiagnoseArgs, FitArgs, RocArgs, SimulateArgs, TuneArgs};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => fit(a, cli.seed),
        Command::Tune(a) => tune(a, cli.seed),
        Command::Simulate(a) => simulate(a, cli.seed),
        Command::Roc(a) => roc(a, cli.seed),
        Command::Diagnose(a) => diagnose(a),
    }
}

struct Loaded {
    x: Matrix,
    net: Network,
    laplacian: StandardizedLaplacian,
    basis: SpectralBasis,
}

fn load(args: &DataArgs, mf: &mut ManifestBuilder) -> Result<Loaded> {
    let data_text = mf.input(&args.data)?;
    let x = io::parse_data_csv(&data_text).with_context(|| format!("parsing {}", args.data.display()))?;
    let edge_text = mf.input(&args.edges)?;
    let net = io::network_from_edge_list(&edge_text, Some(x.nrows()))
        .with_context(|| format!("parsing {}", args.edges.display()))?;
    let components = net.component_count();
    if components > 1 {
        log::warn!("network is disconnected ({components} components); effective dimension unavailable");
    }
    let x = if args.no_standardize {
        x
    } else {
        smoother::standardize_columns(&x)?
    };
    let laplacian = StandardizedLaplacian::new(&net)?;
    let basis = SpectralBasis::from_laplacian(&laplacian)?;
    Ok(Loaded {
        x,
        net,
        laplacian,
        basis,
    })
}

fn check_alpha_grid(args: &AlphaArgs) -> Result<Vec<f64>> {
    let grid = args.alphas.clone().unwrap_or_else(smoother::default_alpha_grid);
    if grid.is_empty() || grid.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        bail!(GncError::InvalidParameter("alpha grid must be positive and finite".into()));
    }
    Ok(grid)
}

fn tuning_curve(args: &AlphaArgs, d: &Loaded, seed: u64) -> Result<TuningCurve<f64>> {
    let grid = check_alpha_grid(args)?;
    Ok(if args.gcv {
        smoother::gcv_curve(&d.x, &d.basis, &grid)?
    } else {
        smoother::cross_validate_alpha(&d.x, &d.laplacian, &grid, args.cv_folds, seed)?
    })
}

/// Fixed alpha, or the tuned one along with its curve.
fn choose_alpha(args: &AlphaArgs, d: &Loaded, seed: u64) -> Result<(f64, String, Option<TuningCurve<f64>>)> {
    match args.alpha {
        Some(a) => {
            if !(a >= 0.0) || !a.is_finite() {
                bail!(GncError::InvalidParameter("alpha must be non-negative".into()));
            }
            Ok((a, "fixed".into(), None))
        }
        None => {
            let curve = tuning_curve(args, d, seed)?;
            let method = if args.gcv { "gcv" } else { "cv" };
            Ok((curve.chosen_alpha, method.into(), Some(curve)))
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn fit(args: &FitArgs, seed: u64) -> Result<()> {
    let mut mf = ManifestBuilder::new("fit");
    let d = load(&args.data, &mut mf)?;
    let (alpha, alpha_method, curve) = choose_alpha(&args.alpha, &d, seed)?;
    let mean_fit = smoother::smooth_means(&d.x, &d.basis, alpha)?;
    let s = pipeline::checked_residual_covariance(&d.x, &mean_fit.m_hat)?;
    let opts = GlassoOptions::default();
    let (precision_fit, lambda_method) = match (args.lambda, args.target_edges) {
        (Some(l), _) => (glasso::fit_glasso(&s, l, &opts)?, "fixed"),
        (None, Some(k)) => (glasso::fit_target_edges(&s, k, &opts)?, "target-edges"),
        (None, None) => bail!(GncError::InvalidParameter("pass --lambda or --target-edges".into())),
    };
    let lambda = precision_fit.lambda;
    let model = GncModel {
        mean_fit,
        precision_fit,
        config: ModelConfig {
            alpha,
            lambda,
            alpha_method: alpha_method.clone(),
            lambda_method: lambda_method.into(),
        },
    };
    let doc = ModelDocument::new(&model, &d.net, !args.data.no_standardize);
    write_text(&args.out, &(doc.to_json()? + "\n"))?;

    let diag = &model.precision_fit.diagnostics;
    let config = json!({
        "alpha": alpha,
        "alpha_method": alpha_method,
        "alpha_tuning": curve,
        "cv_folds": if args.alpha.alpha.is_none() && !args.alpha.gcv { Some(args.alpha.cv_folds) } else { None },
        "lambda": lambda,
        "lambda_method": lambda_method,
        "target_edges": args.target_edges,
        "standardize": !args.data.no_standardize,
        "seed": seed,
        "glasso_tol": opts.tol,
        "glasso_max_iter": opts.max_iter,
    });
    manifest::write(&mf.finish(&[&args.out], config), &manifest::sidecar_path(&args.out))?;

    println!("alpha: {alpha:e} ({alpha_method})");
    println!("lambda: {lambda:e} ({lambda_method})");
    println!("support size: {}", model.precision_fit.support.len());
    println!(
        "glasso: {} sweeps, converged {}, KKT residual {:e}, objective {:.6}",
        diag.iterations, diag.converged, diag.kkt_residual, diag.objective
    );
    if !diag.converged {
        log::warn!("glasso did not converge; the model was written with converged = false");
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn tune(args: &TuneArgs, seed: u64) -> Result<()> {
    let mut mf = ManifestBuilder::new("tune");
    let d = load(&args.data, &mut mf)?;
    if args.alpha.alpha.is_some() {
        bail!(GncError::InvalidParameter("tune chooses alpha; drop --alpha".into()));
    }
    let curve = tuning_curve(&args.alpha, &d, seed)?;
    write_text(&args.out, &(serde_json::to_string_pretty(&curve)? + "\n"))?;
    let config = json!({
        "method": curve.method,
        "alphas": curve.alphas,
        "cv_folds": if args.alpha.gcv { None } else { Some(args.alpha.cv_folds) },
        "standardize": !args.data.no_standardize,
        "seed": seed,
        "chosen_alpha": curve.chosen_alpha,
    });
    manifest::write(&mf.finish(&[&args.out], config), &manifest::sidecar_path(&args.out))?;
    println!("chosen alpha: {:e} (index {})", curve.chosen_alpha, curve.chosen_index);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn simulate(args: &SimulateArgs, seed: u64) -> Result<()> {
    let mut mf = ManifestBuilder::new("simulate");
    let net = match &args.edges {
        Some(path) => io::network_from_edge_list(&mf.input(path)?, None)?,
        None => {
            let side = (args.n as f64).sqrt().round() as usize;
            if side * side != args.n || side < 2 {
                bail!(GncError::InvalidParameter(format!(
                    "--n {} is not a square; pass --edges for a non-lattice network",
                    args.n
                )));
            }
            Network::lattice(side)?
        }
    };
    if args.reps == 0 {
        bail!(GncError::InvalidParameter("--reps must be positive".into()));
    }
    let config = SimConfig {
        p: args.p,
        graph_edge_prob: args.edge_prob,
        t: args.t,
        k: args.k,
        snr: args.snr,
        seed,
    };
    config.validate()?;
    let mut opts = HarnessOptions::default();
    if args.iterative {
        opts.methods.push(Method::IterativeOracle);
    }
    let laplacian = StandardizedLaplacian::new(&net)?;
    let basis = SpectralBasis::from_laplacian(&laplacian)?;
    let results = (0..args.reps)
        .into_par_iter()
        .map(|rep| sim::run_replicate(&config, &laplacian, &basis, rep, &opts))
        .collect::<gnc_lasso::Result<Vec<_>>>()?;
    let summary = SimulationSummary::new(net.n(), &config, &results);

    let report = args.out_dir.join("report.csv");
    let summary_path = args.out_dir.join("summary.json");
    write_text(&report, &sim::report_csv(&results))?;
    write_text(&summary_path, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    let manifest = mf.finish(
        &[&report, &summary_path],
        json!({
            "n": net.n(),
            "network": if args.edges.is_some() { "edge-list".to_string() } else { format!("lattice {}x{}", (net.n() as f64).sqrt() as usize, (net.n() as f64).sqrt() as usize) },
            "network_hash": io::network_hash(&net),
            "reps": args.reps,
            "sim": config,
            "harness": opts,
        }),
    );
    manifest::write(&manifest, &manifest::sidecar_path(&report))?;
    manifest::write(&manifest, &manifest::sidecar_path(&summary_path))?;

    println!("{:<18} {:>9}", "method", "mean AUC");
    for m in &summary.methods {
        println!("{:<18} {:>9.4}", m.method.name(), m.mean_auc);
    }
    println!("wrote {} and {}", report.display(), summary_path.display());
    Ok(())
}

fn roc(args: &RocArgs, seed: u64) -> Result<()> {
    let mut mf = ManifestBuilder::new("roc");
    let d = load(&args.data, &mut mf)?;
    let truth_net = io::network_from_edge_list(&mf.input(&args.truth)?, Some(d.x.ncols()))
        .with_context(|| format!("parsing {}", args.truth.display()))?;
    if args.lambda_count == 0 || !(args.lambda_ratio > 0.0 && args.lambda_ratio < 1.0) {
        bail!(GncError::InvalidParameter("need --lambda-count >= 1 and 0 < --lambda-ratio < 1".into()));
    }
    let (s, alpha, alpha_method, curve) = if args.plain {
        (smoother::sample_covariance(&d.x)?, None, "none".to_string(), None)
    } else {
        let (alpha, method, curve) = choose_alpha(&args.alpha, &d, seed)?;
        let fit = smoother::smooth_means(&d.x, &d.basis, alpha)?;
        (pipeline::checked_residual_covariance(&d.x, &fit.m_hat)?, Some(alpha), method, curve)
    };
    let grid = glasso::lambda_grid(&s, args.lambda_count, args.lambda_ratio);
    let path = glasso::glasso_path(&s, &grid, &GlassoOptions::default())?;
    let curve_roc = sim::roc_curve(&path, truth_net.edges())?;
    let truth: BTreeSet<(usize, usize)> = truth_net.edges().iter().copied().collect();

    let mut out = String::from("lambda,fpr,tpr,support_size\n");
    for fit in &path {
        let (fpr, tpr) = sim::rates::<f64>(&fit.support, &truth, d.x.ncols())?;
        out.push_str(&format!("{:?},{:?},{:?},{}\n", fit.lambda, fpr, tpr, fit.support.len()));
    }
    write_text(&args.out, &out)?;
    let last = PrecisionDocument::from_fit(path.last().expect("nonempty path"));
    let config = json!({
        "plain": args.plain,
        "alpha": alpha,
        "alpha_method": alpha_method,
        "alpha_tuning": curve,
        "lambdas": grid,
        "standardize": !args.data.no_standardize,
        "seed": seed,
        "auc": curve_roc.auc,
        "smallest_lambda_support": last.support_size,
    });
    manifest::write(&mf.finish(&[&args.out], config), &manifest::sidecar_path(&args.out))?;
    println!("AUC: {:.6}", curve_roc.auc);
    println!("wrote {}", args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct DiagnoseReport {
    n: usize,
    edges: usize,
    mean_degree: f64,
    algebraic_connectivity: f64,
    effective_dimension: usize,
    /// `(m, tau_{n-m}, 1/sqrt(m))` for `m = 1..n-1`.
    series: Vec<(usize, f64, f64)>,
}

fn diagnose(args: &DiagnoseArgs) -> Result<()> {
    let mut mf = ManifestBuilder::new("diagnose");
    let net = io::network_from_edge_list(&mf.input(&args.edges)?, args.nodes)
        .with_context(|| format!("parsing {}", args.edges.display()))?;
    let components = net.component_count();
    if components > 1 {
        bail!(GncError::Disconnected(components));
    }
    // eigenvalues are all the report needs
    let spectrum = LaplacianSpectrum::from_network(&net)?;
    let n = net.n();
    let report = DiagnoseReport {
        n,
        edges: net.edges().len(),
        mean_degree: net.mean_degree(),
        algebraic_connectivity: spectrum.algebraic_connectivity()?,
        effective_dimension: spectrum.effective_dimension()?,
        series: (1..n)
            .map(|m| (m, spectrum.tau[n - 1 - m], 1.0 / (m as f64).sqrt()))
            .collect(),
    };
    let json_text = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(out) = &args.out {
        write_text(out, &json_text)?;
        manifest::write(
            &mf.finish(&[out], json!({ "nodes": args.nodes })),
            &manifest::sidecar_path(out),
        )?;
    }
    if args.json {
        print!("{json_text}");
    } else {
        println!("nodes: {}", report.n);
        println!("edges: {}", report.edges);
        println!("mean degree: {:.6}", report.mean_degree);
        println!("algebraic connectivity: {:.6e}", report.algebraic_connectivity);
        println!("effective dimension: {}", report.effective_dimension);
    }
    Ok(())
}
