use std::path::Path;
use std::process::Command;

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/redlens.h"))
            .unwrap();
    for name in [
        "rl_version",
        "rl_last_error_message",
        "rl_layer_redundancy",
        "rl_cluster",
        "rl_partition_labels",
        "rl_partition_free",
        "rl_archive_open",
        "rl_archive_layer_count",
        "rl_archive_layer_name",
        "rl_archive_analyze",
        "rl_archive_free",
        "RL_STATUS_OK",
        "RL_LINKAGE_AVERAGE",
        "RlReport",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = std::env::temp_dir().join(format!("redlens-h-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"redlens.h\"\n\
         int check(const double *w) {\n\
           RlReport r;\n\
           RlStatus s = rl_layer_redundancy(w, 2, 3, 0.5, RL_LINKAGE_AVERAGE, &r);\n\
           return s == RL_STATUS_OK ? (int)r.n_r : -1;\n\
         }\n",
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
