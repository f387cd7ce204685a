use std::fmt::Write;
use std::path::Path;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/icons");
    println!("cargo:rerun-if-changed={}", dir.display());
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .expect("assets/icons exists")
        .map(|e| e.expect("readable entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    files.sort();
    let mut src = String::from("pub(crate) const BUNDLED_GLYPHS: &[(&str, &[u8])] = &[\n");
    for f in files {
        let name = f.file_name().unwrap().to_string_lossy();
        writeln!(src, "    ({name:?}, include_bytes!({:?})),", f.display().to_string()).unwrap();
    }
    src.push_str("];\n");
    let out = Path::new(&std::env::var("OUT_DIR").unwrap()).join("bundled_icons.rs");
    std::fs::write(out, src).unwrap();
}
