use std::path::PathBuf;
use std::process::Command;

const EXAMPLES: &[(&str, &[&str])] = &[
    ("symmetric_quads", &[]),
    ("bricard_octahedron", &[]),
    ("dodecahedron", &[]),
    ("flex_trajectory", &[]),
    ("min8_twist", &[]),
    ("minimality", &[]),
    ("optimize", &["5"]),
    ("net_svg", &[]),
    ("serve", &[]),
];

fn example_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?.join("examples");
    dir.is_dir().then_some(dir)
}

#[test]
fn examples_run_cleanly() {
    let Some(dir) = example_dir() else {
        eprintln!("examples not built, skipping");
        return;
    };
    for (name, args) in EXAMPLES {
        let bin = dir.join(name);
        if !bin.exists() {
            eprintln!("{name} not built, skipping");
            continue;
        }
        let out = Command::new(&bin).args(*args).output().unwrap();
        assert!(out.status.success(), "{name} failed:\n{}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty(), "{name} printed nothing");
    }
}
