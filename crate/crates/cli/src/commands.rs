//! One function per subcommand. Each writes its data files into `out` and
//! returns what the run manifest needs to know about them.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nhaah::model::{build_fock_basis, build_hamiltonian, with_phase_shift};
use nhaah::observables::{
    density_profile, fit_sub_wigner, ks_statistic, site_occupation, Histogram,
    ReferenceDistribution, ReferenceKind,
};
use nhaah::spectral::export::{write_matrix_blob, write_metadata, write_spectrum_csv};
use nhaah::spectral::{complex_fraction, det_trajectory, eig, max_imag, ModelFamily, DEFAULT_IMAG_CUTOFF};
use nhaah::sweep::{
    boundary_v1c, run_sweep, scaling_collapse, size_crossing, Observable, ResultTable, RunOptions,
    SizeCurves, SweepSpec, winding_transition,
};
use serde_json::{json, Value};

use crate::config::{
    LevelstatsConfig, MblConfig, Overrides, PhaseDiagramConfig, SpectrumConfig, WindingConfig,
};

/// Fewer pooled spacings than this draw a warning in `levelstats`.
pub const MIN_SPACINGS: usize = 100;

#[derive(Debug, Default)]
pub struct Outcome {
    pub spec_hashes: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub details: Value,
}

/// Where sweeps checkpoint their rows and whether earlier rows are reused.
pub fn run_options(out: &Path, resume: bool) -> RunOptions {
    RunOptions {
        cache_dir: Some(out.join("cache")),
        resume,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn axis_header(spec: &SweepSpec) -> String {
    spec.axes.iter().map(|a| a.name.as_str()).collect::<Vec<_>>().join(",")
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn sweep_table(spec: &SweepSpec, out: &Path, stem: &str, resume: bool) -> Result<(ResultTable, Vec<PathBuf>)> {
    let table = run_sweep(spec, &run_options(out, resume))?;
    if table.manifest.failed_jobs > 0 {
        log::warn!("{} of {} jobs failed; see the error column", table.manifest.failed_jobs, table.rows.len());
    }
    let files = table.save(out, stem)?;
    Ok((table, files))
}

pub fn spectrum(cfg: &SpectrumConfig, out: &Path) -> Result<Outcome> {
    let p = &cfg.model;
    p.validate()?;
    let hash = p.canonical_hash();
    let h = build_hamiltonian(p)?;
    let s = eig(&h)?;
    if s.degraded {
        log::warn!("eigensolver residual {:.3e} is above tolerance", s.residual);
    }
    let f_im = complex_fraction(&s.eigenvalues, DEFAULT_IMAG_CUTOFF);
    let eps = max_imag(&s.eigenvalues);

    let mut outputs = Vec::new();
    let path = out.join("spectrum.csv");
    let meta = [
        ("param_hash", hash.clone()),
        ("dim", s.dim().to_string()),
        ("residual", s.residual.to_string()),
        ("f_im", f_im.to_string()),
        ("max_imag", eps.to_string()),
    ];
    let mut w = create(&path)?;
    write_spectrum_csv(&mut w, &s.eigenvalues, &meta)?;
    w.flush()?;
    outputs.push(path);

    if let Some(n) = cfg.output.state {
        if n >= s.dim() {
            bail!("output.state = {n} but the spectrum has {} states", s.dim());
        }
        let profile = match p.particles {
            Some(np) => site_occupation(s.vector(n), &build_fock_basis(p.sites, np)?)?,
            None => density_profile(s.vector(n)),
        };
        let path = out.join(format!("density_state{n}.csv"));
        let mut w = create(&path)?;
        let e = s.eigenvalues[n];
        write_metadata(&mut w, &[("param_hash", hash.clone()), ("state", n.to_string()), ("energy", e.to_string())])?;
        writeln!(w, "site,density")?;
        for (j, d) in profile.iter().enumerate() {
            writeln!(w, "{j},{d}")?;
        }
        w.flush()?;
        outputs.push(path);
    }

    if cfg.output.eigenvectors {
        let path = out.join("eigenvectors.bin");
        let mut w = create(&path)?;
        write_matrix_blob(&mut w, &s.right_vectors, &hash)?;
        w.flush()?;
        outputs.push(path);
    }

    Ok(Outcome {
        spec_hashes: vec![hash],
        outputs,
        details: json!({
            "dim": s.dim(),
            "residual": s.residual,
            "degraded": s.degraded,
            "f_im": f_im,
            "max_imag": eps,
        }),
    })
}

pub fn phase_diagram(cfg: &PhaseDiagramConfig, ov: Overrides, out: &Path, resume: bool) -> Result<Outcome> {
    let mut spec = cfg.sweep.clone();
    ov.apply(&mut spec);
    let (table, mut outputs) = sweep_table(&spec, out, "phase_diagram", resume)?;
    let header = axis_header(&spec);

    for o in &spec.observables {
        if *o == Observable::Spacings {
            continue;
        }
        let path = out.join(format!("heatmap_{}.csv", o.name()));
        let mut w = create(&path)?;
        write_metadata(&mut w, &[("spec_hash", table.manifest.spec_hash.clone())])?;
        writeln!(w, "{header},{}", o.name())?;
        for a in &table.averages {
            let v = a.values.get(o.name()).map_or(String::new(), f64::to_string);
            writeln!(w, "{},{v}", join(&a.coords))?;
        }
        w.flush()?;
        outputs.push(path);
    }

    let path = out.join("boundary.csv");
    let mut w = create(&path)?;
    writeln!(w, "{header},V1c")?;
    for g in 0..spec.grid_len() {
        let p = spec.params_at(g)?;
        writeln!(w, "{},{}", join(&spec.coords(g)), boundary_v1c(p.g, p.h, p.v2, p.t))?;
    }
    w.flush()?;
    outputs.push(path);

    Ok(Outcome {
        spec_hashes: vec![table.manifest.spec_hash.clone()],
        outputs,
        details: json!({ "sweep": table.manifest }),
    })
}

pub fn winding(cfg: &WindingConfig, ov: Overrides, out: &Path, resume: bool) -> Result<Outcome> {
    let mut spec = cfg.sweep.clone();
    ov.apply(&mut spec);
    let wanted = cfg.winding.observable();
    if !spec.observables.contains(&wanted) {
        spec.observables.push(wanted);
    }
    let (table, mut outputs) = sweep_table(&spec, out, "winding", resume)?;
    let averages = table.winding_averages(cfg.winding.axis);

    let path = out.join(format!("{}_averages.csv", wanted.name()));
    let mut w = create(&path)?;
    write_metadata(&mut w, &[("spec_hash", table.manifest.spec_hash.clone())])?;
    writeln!(w, "{},mean,mean_abs,samples,indeterminate", axis_header(&spec))?;
    let mut flagged = Vec::new();
    for (g, a) in averages.iter().enumerate() {
        writeln!(w, "{},{},{},{},{}", join(&a.coords), a.mean, a.mean_abs, a.samples, a.indeterminate)?;
        if a.indeterminate > 0 {
            flagged.push(json!({ "grid": g, "coords": a.coords, "indeterminate": a.indeterminate }));
        }
    }
    w.flush()?;
    outputs.push(path);

    if cfg.winding.trajectory {
        for g in 0..spec.grid_len() {
            let p = with_phase_shift(&spec.params_at(g)?, spec.phi(g, 0));
            let family = ModelFamily::new(&p, cfg.winding.axis)?;
            let loop_ = det_trajectory(&family, cfg.winding.trajectory_points)?;
            let path = out.join(format!("trajectory_g{g}.csv"));
            let mut w = create(&path)?;
            write_metadata(&mut w, &[("param_hash", p.canonical_hash()), ("coords", join(&spec.coords(g)))])?;
            writeln!(w, "theta,re,im")?;
            for (th, z) in loop_ {
                writeln!(w, "{th},{},{}", z.re, z.im)?;
            }
            w.flush()?;
            outputs.push(path);
        }
    }

    Ok(Outcome {
        spec_hashes: vec![table.manifest.spec_hash.clone()],
        outputs,
        details: json!({
            "sweep": table.manifest,
            "indeterminate_points": flagged,
            // Where the averaged winding first reaches zero, for 1-D scans.
            "transition": if spec.axes.len() == 1 { winding_transition(&averages) } else { None },
        }),
    })
}

pub fn mbl(cfg: &MblConfig, ov: Overrides, out: &Path, resume: bool) -> Result<Outcome> {
    cfg.validate()?;
    let mut outcome = Outcome::default();
    let mut tables = Vec::new();
    for (i, &l) in cfg.mbl.sizes.iter().enumerate() {
        let mut spec = cfg.sweep_for(i)?;
        ov.apply(&mut spec);
        log::info!("L = {l}: {} grid points x {} samples", spec.grid_len(), spec.n_phi_samples);
        let (table, files) = sweep_table(&spec, out, &format!("mbl_L{l}"), resume)?;
        outcome.spec_hashes.push(table.manifest.spec_hash.clone());
        outcome.outputs.extend(files);
        tables.push((l, table));
    }
    let curves = |column: &str| -> SizeCurves {
        tables.iter().map(|(l, t)| (*l, t.curve(column))).collect()
    };

    let mut crossings = Vec::new();
    if let Some(column) = &cfg.mbl.crossing {
        for pair in tables.windows(2) {
            let (la, lb) = (pair[0].0, pair[1].0);
            let x = size_crossing(&pair[0].1.curve(column), &pair[1].1.curve(column));
            crossings.push(match x {
                Ok(x) => json!({ "column": column, "sizes": [la, lb], "x": x }),
                Err(e) => json!({ "column": column, "sizes": [la, lb], "error": e.to_string() }),
            });
        }
    }

    let mut fits = Vec::new();
    for c in &cfg.mbl.collapse {
        let fit = scaling_collapse(&curves(&c.column), c.x_c, c.nu)
            .with_context(|| format!("collapse of {}", c.column))?;
        let path = out.join(format!("mbl_collapse_{}.json", c.column));
        fs::write(&path, serde_json::to_vec_pretty(&fit)?)?;
        outcome.outputs.push(path);
        fits.push(json!({ "column": c.column, "x_c": fit.x_c, "nu": fit.nu, "cost": fit.cost }));
    }

    if cfg.mbl.cross_size_mean {
        let path = out.join("mbl_cross_size_mean.csv");
        let first = &tables[0].1;
        let mut columns: Vec<String> = first.averages.iter().flat_map(|a| a.values.keys().cloned()).collect();
        columns.sort();
        columns.dedup();
        let mut w = create(&path)?;
        writeln!(w, "{},{}", axis_header(&first.spec), columns.join(","))?;
        for (g, a) in first.averages.iter().enumerate() {
            let means: Vec<String> = columns
                .iter()
                .map(|c| {
                    let v: Vec<f64> = tables.iter().filter_map(|(_, t)| t.average(g, c)).collect();
                    if v.is_empty() {
                        String::new()
                    } else {
                        (v.iter().sum::<f64>() / v.len() as f64).to_string()
                    }
                })
                .collect();
            writeln!(w, "{},{}", join(&a.coords), means.join(","))?;
        }
        w.flush()?;
        outcome.outputs.push(path);
    }

    outcome.details = json!({
        "sweeps": tables.iter().map(|(l, t)| json!({ "L": l, "manifest": t.manifest })).collect::<Vec<_>>(),
        "crossings": crossings,
        "collapse": fits,
    });
    Ok(outcome)
}

pub fn levelstats(cfg: &LevelstatsConfig, ov: Overrides, out: &Path, resume: bool) -> Result<Outcome> {
    let mut spec = cfg.sweep.clone();
    ov.apply(&mut spec);
    if !spec.observables.contains(&Observable::Spacings) {
        spec.observables.push(Observable::Spacings);
    }
    let (table, mut outputs) = sweep_table(&spec, out, "levelstats", resume)?;
    let fixed = [
        (ReferenceKind::GinibreComplex, ReferenceDistribution::ginibre()),
        (ReferenceKind::PoissonReal, ReferenceDistribution::poisson_real()),
        (ReferenceKind::PoissonComplex, ReferenceDistribution::poisson_complex()),
    ];

    let mut reports = Vec::new();
    for g in 0..spec.grid_len() {
        let spacings = table.pooled_spacings(g);
        if spacings.is_empty() {
            log::warn!("grid point {g}: no spacings (every job failed)");
            continue;
        }
        if spacings.len() < MIN_SPACINGS {
            log::warn!("grid point {g}: only {} spacings", spacings.len());
        }
        let hist = match (cfg.levelstats.bins, cfg.levelstats.upper) {
            (Some(b), upper) => {
                let top = upper.unwrap_or_else(|| spacings.iter().copied().fold(0.0, f64::max));
                Histogram::with_bins(&spacings, b, top)?
            }
            (None, _) => Histogram::freedman_diaconis(&spacings)?,
        };
        let mut refs: Vec<(String, ReferenceDistribution)> =
            fixed.iter().map(|(k, r)| (k.name().to_string(), r.clone())).collect();
        let mut fit_json = Value::Null;
        if cfg.levelstats.fit_sub_wigner {
            match fit_sub_wigner(&hist) {
                Ok(fit) => {
                    fit_json = json!(fit);
                    refs.push((
                        ReferenceKind::SubWigner.name().to_string(),
                        ReferenceDistribution::sub_wigner(fit.params)?,
                    ));
                }
                Err(e) => log::warn!("grid point {g}: sub-Wigner fit failed: {e}"),
            }
        }

        let path = out.join(format!("levelstats_g{g}.csv"));
        let mut w = create(&path)?;
        write_metadata(
            &mut w,
            &[
                ("spec_hash", table.manifest.spec_hash.clone()),
                ("coords", join(&spec.coords(g))),
                ("spacings", spacings.len().to_string()),
            ],
        )?;
        let names: Vec<&str> = refs.iter().map(|(n, _)| n.as_str()).collect();
        writeln!(w, "bin_center,empirical_pdf,{}", names.join(","))?;
        for (c, d) in hist.centers().iter().zip(&hist.density) {
            let pdfs: Vec<f64> = refs.iter().map(|(_, r)| r.pdf(*c)).collect();
            writeln!(w, "{c},{d},{}", join(&pdfs))?;
        }
        w.flush()?;
        outputs.push(path);

        let ks: serde_json::Map<String, Value> = refs
            .iter()
            .map(|(n, r)| (n.clone(), json!(ks_statistic(&spacings, |s| r.cdf(s)))))
            .collect();
        let nearest = ks
            .iter()
            .filter_map(|(n, v)| v.as_f64().map(|v| (n, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(n, _)| n.clone());
        reports.push(json!({
            "grid": g,
            "coords": spec.coords(g),
            "spacings": spacings.len(),
            "ks": ks,
            "nearest": nearest,
            "sub_wigner": fit_json,
        }));
    }

    Ok(Outcome {
        spec_hashes: vec![table.manifest.spec_hash.clone()],
        outputs,
        details: json!({ "sweep": table.manifest, "grid_points": reports }),
    })
}
