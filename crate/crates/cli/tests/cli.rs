use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn vie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vie"))
        .args(args)
        .env("VIE_THREADS", "2")
        .output()
        .expect("spawn vie")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("case.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_contrast_run_reports_no_scattering() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "shape = \"cube\"\nside = 1.0\neps_rel = 1.0\nk = 1.0\nh = 0.25\nfar_theta = 5\nfar_phi = 4\n",
    );
    let out = vie(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let line = stdout(&out);
    let sigma: f64 = line
        .split_whitespace()
        .find_map(|t| t.strip_prefix("sigma_scat="))
        .expect("summary line")
        .parse()
        .unwrap();
    assert!(sigma.abs() < 1e-20, "{line}");
}

#[test]
fn unknown_key_is_named_and_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "shape = \"sphere\"\nradius = 1.0\nk = 0.5\nh = 0.25\nwavelenght = 3.0\n");
    let out = vie(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("wavelenght"), "{}", stderr(&out));
}

#[test]
fn missing_config_file_exits_one() {
    let out = vie(&["run", "/nonexistent/case.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn sphere_run_writes_far_field_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "shape = \"sphere\"\nradius = 1.0\neps_rel = 2.0\nk = 0.5\ncells_per_diameter = 16\n\
         far_theta = 7\nfar_phi = 6\noutput_dir = \"out\"\n",
    );
    let out = vie(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("sigma_scat="));
    let table = fs::read_to_string(dir.path().join("out/far_field.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "theta,phi,re_ax,im_ax,re_ay,im_ay,re_az,im_az");
    assert_eq!(lines.count(), 7 * 6);
}

#[test]
fn non_convergence_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "shape = \"sphere\"\nradius = 1.0\neps_rel = 4.0\nk = 1.0\nh = 0.25\n\
         solver = \"iterative\"\ntol = 1e-14\nmax_iter = 1\n",
    );
    let out = vie(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("did not converge"));
}

#[test]
fn mie_subcommand_writes_reference_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "shape = \"sphere\"\nradius = 1.0\neps_rel = 2.0\nk = 0.5\nh = 0.25\noutput_dir = \"mie\"\n",
    );
    let out = vie(&["mie", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("sigma_ext="));
    for f in ["mie_far_field.csv", "mie_amplitudes.csv", "mie_summary.json"] {
        assert!(dir.path().join("mie").join(f).exists(), "{f} missing");
    }
}

#[test]
fn mie_subcommand_rejects_non_spheres() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "shape = \"cube\"\nside = 1.0\neps_rel = 2.0\nk = 0.5\nh = 0.25\n");
    let out = vie(&["mie", &cfg]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn converge_by_cells_per_diameter() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "shape = \"sphere\"\nradius = 1.0\neps_rel = 2.0\nk = 0.5\nh = 0.25\n\
         far_theta = 5\nfar_phi = 4\noutput_dir = \"conv\"\n",
    );
    let out = vie(&["converge", &cfg, "--cells-per-diameter", "6", "8", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("h=")).count(), 3);
    let csv = fs::read_to_string(dir.path().join("conv/convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn converge_needs_levels() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "shape = \"sphere\"\nradius = 1.0\nk = 0.5\nh = 0.25\n");
    let out = vie(&["converge", &cfg]);
    assert_eq!(out.status.code(), Some(1));
}
