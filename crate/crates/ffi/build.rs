use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("set by cargo"));
    let header = crate_dir.join("include").join("mxsefl.h");

    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.header = Some("/* C ABI for the mxsefl fair-division library. */".into());
    config.include_guard = Some("MXSEFL_H".into());
    config.cpp_compat = true;
    config.documentation = true;

    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen generates the header")
        .write_to_file(header);

    println!("cargo:rerun-if-changed=src/lib.rs");
}
