use std::path::Path;

fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("cargo sets the manifest dir");
    let header = Path::new(&crate_dir).join("include").join("wevbg.h");
    match cbindgen::generate(&crate_dir) {
        // only rewrites the committed header when the API changed
        Ok(bindings) => {
            bindings.write_to_file(header);
        }
        Err(e) => panic!("C header generation failed: {e}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
