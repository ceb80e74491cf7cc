use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use rauzy_ffi::*;

fn parse(text: &str) -> *mut RauzySubstitution {
    let c = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { rauzy_substitution_parse(c.as_ptr(), &mut out) },
        RauzyStatus::Ok
    );
    out
}

fn last_error() -> String {
    let p = rauzy_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn tau_morphism_through_the_c_interface() {
    let (s1, s2) = (parse("a -> aba\nb -> ab"), parse("a -> aab\nb -> ba"));
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { rauzy_intersect(s1, s2, 0, 0, 0, &mut m) },
        RauzyStatus::Ok
    );
    assert_eq!(unsafe { rauzy_morphism_block_count(m) }, 4);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { rauzy_morphism_to_text(m, &mut text) }, RauzyStatus::Ok);
    let s = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    assert!(s.starts_with("block A = a | a\nblock B = ba | ab\n"));
    assert!(s.ends_with("phi D -> DAAC\n"));
    unsafe {
        rauzy_string_free(text);
        rauzy_morphism_free(m);
        rauzy_substitution_free(s1);
        rauzy_substitution_free(s2);
    }
}

#[test]
fn status_codes_match_the_cli() {
    let (c1, c2) = (parse("a -> aab\nb -> ab"), parse("a -> baa\nb -> ba"));
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { rauzy_intersect(c1, c2, 0, 0, 0, &mut m) },
        RauzyStatus::EmptyIntersection
    );
    assert!(m.is_null());
    let (t1, t2) = (
        parse("a -> ab\nb -> ac\nc -> a"),
        parse("a -> ab\nb -> ca\nc -> a"),
    );
    assert_eq!(
        unsafe { rauzy_intersect(t1, t2, 0, 0, 3, &mut m) },
        RauzyStatus::Resource
    );
    assert!(last_error().contains("inner point"));
    assert_eq!(
        unsafe { rauzy_intersect(t1, c1, 0, 0, 0, &mut m) },
        RauzyStatus::Invalid
    );

    let bad = CString::new("a -> ab\na -> b").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { rauzy_substitution_parse(bad.as_ptr(), &mut out) },
        RauzyStatus::Parse
    );
    assert!(out.is_null());
    assert!(last_error().contains("line 2"), "{}", last_error());
    assert_eq!(
        unsafe { rauzy_substitution_parse(ptr::null(), &mut out) },
        RauzyStatus::NullPointer
    );
    assert_eq!(RauzyStatus::EmptyIntersection as i32, 4);
    unsafe {
        for s in [c1, c2, t1, t2] {
            rauzy_substitution_free(s);
        }
    }
}

#[test]
fn spectral_queries() {
    let t = parse("a -> ab\nb -> ac\nc -> a");
    let mut coeffs = [0i64; 4];
    let mut len = 0;
    assert_eq!(
        unsafe { rauzy_char_poly(t, coeffs.as_mut_ptr(), 4, &mut len) },
        RauzyStatus::Ok
    );
    assert_eq!((len, coeffs), (4, [-1, -1, -1, 1]));
    assert_eq!(
        unsafe { rauzy_char_poly(t, coeffs.as_mut_ptr(), 2, &mut len) },
        RauzyStatus::BufferTooSmall
    );
    assert_eq!(len, 4);
    let mut beta = 0.0;
    assert_eq!(unsafe { rauzy_beta(t, 1e-10, &mut beta) }, RauzyStatus::Ok);
    assert!((beta - 1.839_286_755_214_161).abs() < 1e-9);
    assert_eq!(unsafe { rauzy_beta(t, -1.0, &mut beta) }, RauzyStatus::Invalid);
    assert_eq!(unsafe { rauzy_substitution_dim(t) }, 3);
    assert_eq!(unsafe { rauzy_substitution_dim(ptr::null()) }, 0);
    unsafe { rauzy_substitution_free(t) };
}

#[test]
fn render_buffer() {
    let t = parse("a -> ab\nb -> ac\nc -> a");
    let (mut data, mut len) = (ptr::null_mut(), 0);
    assert_eq!(
        unsafe { rauzy_render_ppm(t, 2000, 32, 16, true, &mut data, &mut len) },
        RauzyStatus::Ok
    );
    let bytes = unsafe { std::slice::from_raw_parts(data, len) }.to_vec();
    assert!(bytes.starts_with(b"P6\n32 16\n255\n"));
    assert_eq!(len, 13 + 32 * 16 * 3);
    unsafe { rauzy_buffer_free(data, len) };
    assert_eq!(
        unsafe { rauzy_render_ppm(t, 2000, 8, 8, false, &mut data, &mut len) },
        RauzyStatus::Invalid
    );
    assert!(data.is_null());
    unsafe { rauzy_substitution_free(t) };
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/rauzy.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "rauzy_substitution_parse",
        "rauzy_intersect",
        "rauzy_render_ppm",
        "RAUZY_STATUS_EMPTY_INTERSECTION",
    ] {
        assert!(text.contains(name), "{name} missing from the header");
    }
    let probe = std::env::temp_dir().join(format!("rauzy-header-{}.c", std::process::id()));
    std::fs::write(
        &probe,
        format!(
            "#include \"{}\"\nint main(void) {{ return RAUZY_STATUS_OK; }}\n",
            header.display()
        ),
    )
    .unwrap();
    match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&probe)
        .output()
    {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; skipping the syntax check"),
    }
    let _ = std::fs::remove_file(probe);
}
