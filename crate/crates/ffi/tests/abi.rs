use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use sigqual_ffi::*;

fn svc(shift: i64) -> CString {
    let mut text = String::from("40\n");
    for i in 0..40i64 {
        let x = i * 30 + shift;
        let y = ((i as f64 * 0.4).sin() * 200.0) as i64;
        text.push_str(&format!(
            "{x} {y} {} 1 0 0 {}\n",
            i * 10,
            300 + (i * 7) % 400
        ));
    }
    CString::new(text).unwrap()
}

unsafe fn parse(text: &CString) -> *mut SqSample {
    let mut s = ptr::null_mut();
    assert_eq!(sq_sample_parse_svc(text.as_ptr(), &mut s), SqStatus::Ok);
    s
}

unsafe fn last_error() -> String {
    let p = sq_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

#[test]
fn full_round_trip() {
    unsafe {
        let samples: Vec<*mut SqSample> = (0..4).map(|k| parse(&svc(k * 3))).collect();
        assert_eq!(sq_sample_len(samples[0]), 40);

        let mut feats = Vec::new();
        for &s in &samples {
            let mut f = ptr::null_mut();
            assert_eq!(sq_features_extract(s, 1023, &mut f), SqStatus::Ok);
            feats.push(f);
        }
        let n = sq_features_len(feats[0]);
        assert_eq!(n, 2 * 64 + 2 * 16);
        let mut buf = vec![0.0; n];
        assert_eq!(
            sq_features_copy(feats[0], buf.as_mut_ptr(), n),
            SqStatus::Ok
        );
        assert!((buf[..64].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(
            sq_features_copy(feats[0], buf.as_mut_ptr(), n - 1),
            SqStatus::BufferTooSmall
        );
        assert!(last_error().contains("need"));

        let handles: Vec<*const SqFeatures> = feats[..3].iter().map(|&f| f.cast_const()).collect();
        let id = CString::new("u1").unwrap();
        let mut t = ptr::null_mut();
        assert_eq!(
            sq_template_enroll(id.as_ptr(), handles.as_ptr(), 3, &mut t),
            SqStatus::Ok
        );

        let (mut d, mut c, mut score) = (0.0, 0.0, 0.0);
        assert_eq!(sq_distinctiveness(t, 147, &mut d), SqStatus::Ok);
        assert!(d > 0.0);
        assert_eq!(sq_complexity(t, &mut c), SqStatus::Ok);
        assert!(c.is_finite() && c >= 0.0);
        assert_eq!(sq_histogram_score(t, feats[3], &mut score), SqStatus::Ok);
        assert!(score >= 0.0);

        let mut dist = -1.0;
        assert_eq!(
            sq_dtw_distance(samples[0], samples[0], &mut dist),
            SqStatus::Ok
        );
        assert_eq!(dist, 0.0);

        sq_template_free(t);
        for f in feats {
            sq_features_free(f);
        }
        for s in samples {
            sq_sample_free(s);
        }
    }
}

#[test]
fn statistics() {
    unsafe {
        let mut r = 0.0;
        let scores = [1.0, 2.0, 3.0];
        assert_eq!(sq_repeatability(scores.as_ptr(), 3, &mut r), SqStatus::Ok);
        assert_eq!(r, 0.5);
        let zeros = [0.0; 2];
        assert_eq!(sq_repeatability(zeros.as_ptr(), 2, &mut r), SqStatus::Ok);
        assert!(r.is_infinite());

        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(sq_spearman(x.as_ptr(), y.as_ptr(), 4, &mut r), SqStatus::Ok);
        assert_eq!(r, -1.0);

        let g = [1.0, 1.5, 2.0];
        let i = [3.0, 4.0, 5.0];
        let (mut t, mut e) = (0.0, 1.0);
        assert_eq!(
            sq_eer(g.as_ptr(), 3, i.as_ptr(), 3, &mut t, &mut e),
            SqStatus::Ok
        );
        assert_eq!(e, 0.0);
        assert_eq!(
            sq_eer(g.as_ptr(), 3, ptr::null(), 0, &mut t, &mut e),
            SqStatus::EvalError
        );
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            sq_sample_parse_svc(ptr::null(), &mut s),
            SqStatus::NullPointer
        );
        assert!(s.is_null());
        let bad = CString::new("1 2 x 1\n").unwrap();
        assert_eq!(
            sq_sample_parse_svc(bad.as_ptr(), &mut s),
            SqStatus::ParseError
        );
        assert!(!last_error().is_empty());
        let mut out = 0.0;
        assert_eq!(sq_complexity(ptr::null(), &mut out), SqStatus::NullPointer);
        assert_eq!(
            sq_repeatability(ptr::null(), 0, &mut out),
            SqStatus::QualityError
        );
        sq_sample_free(ptr::null_mut());
        assert_eq!(sq_features_len(ptr::null()), 0);
        let v = CStr::from_ptr(sq_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
        // a successful call clears the message
        let mut r = 0.0;
        let one = [1.0];
        assert_eq!(sq_repeatability(one.as_ptr(), 1, &mut r), SqStatus::Ok);
        assert!(sq_last_error().is_null());
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sigqual.h");
    assert!(header.exists(), "header missing: {}", header.display());
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "sq_sample_parse_svc",
        "sq_template_enroll",
        "sq_eer",
        "SQ_STATUS_OK",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(probe) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(probe.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"sigqual.h\"\nint main(void) { SqSample *s = 0; return sq_sample_parse_svc(\"\", &s) == SQ_STATUS_OK; }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
