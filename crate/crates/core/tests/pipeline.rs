//! Sweep → cache → transition, end to end on small systems.

use nhaah::model::ModelParams;
use nhaah::sweep::{
    boundary_v1c, detect_transition, run_sweep, Axis, Observable, RunOptions, SweepSpec,
    TransitionCriterion,
};
use nhaah::WindingAxis;

fn nonreciprocal_scan() -> SweepSpec {
    let base = ModelParams { g: 0.5, ..ModelParams::new(89) };
    SweepSpec::new(
        base,
        vec![Axis::new("V1", 2.0, 4.6, 14)],
        vec![Observable::FdAll, Observable::FIm, Observable::WindingG],
    )
}

#[test]
fn transitions_track_the_analytic_boundary() {
    let t = run_sweep(&nonreciprocal_scan(), &RunOptions::default()).unwrap();
    let v1c = boundary_v1c(0.5, 0.0, 0.0, 1.0);
    for column in ["fd_all", "f_im", "winding_g_abs"] {
        let x = detect_transition(&[t.curve(column)], TransitionCriterion::HalfCrossing).unwrap();
        assert!((x - v1c).abs() < 0.4, "{column}: {x} vs {v1c}");
    }
    assert_eq!(t.manifest.failed_jobs, 0);
    assert_eq!(t.winding_averages(WindingAxis::G).len(), 14);
}

#[test]
fn resumed_sweep_reads_every_row_back() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = nonreciprocal_scan();
    spec.base.sites = 34;
    spec.n_phi_samples = 2;
    spec.random_phi = true;
    let fresh = run_sweep(&spec, &RunOptions { cache_dir: Some(dir.path().into()), resume: false }).unwrap();
    assert_eq!(fresh.manifest.cache_hits, 0);
    let resumed = run_sweep(&spec, &RunOptions::cached(dir.path())).unwrap();
    assert_eq!(resumed.manifest.cache_hits, 28);
    assert_eq!(resumed.manifest.computed_jobs, 0);
    assert_eq!(resumed.rows, fresh.rows);
    assert_eq!(resumed.averages, fresh.averages);

    let files = resumed.save(dir.path(), "scan").unwrap();
    assert!(files.iter().all(|f| f.exists()));
}

#[test]
fn many_body_entropy_grows_towards_delocalization() {
    let base = ModelParams { g: 0.5, v2: 0.5, u: 2.0, ..ModelParams::half_filled(8) };
    let mut spec = SweepSpec::new(base, vec![Axis::new("V1", 1.0, 12.0, 2)], vec![Observable::Ee]);
    spec.n_phi_samples = 4;
    spec.random_phi = true;
    let t = run_sweep(&spec, &RunOptions::default()).unwrap();
    let ee = t.curve("ee");
    assert!(ee[0].1 > 2.0 * ee[1].1, "{ee:?}");
}
