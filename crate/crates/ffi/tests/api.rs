use std::ffi::{c_char, CStr, CString};
use std::ptr;

use dmmcodes_ffi::*;

fn text(f: impl Fn(*mut c_char, usize, *mut usize) -> DmmStatus) -> String {
    let mut needed = 0usize;
    assert_eq!(f(ptr::null_mut(), 0, &mut needed), DmmStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(f(buf.as_mut_ptr(), buf.len(), &mut needed), DmmStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_owned()
}

fn last_error() -> String {
    text(|b, l, n| unsafe { dmm_last_error_message(b, l, n) })
}

#[test]
fn field_ops() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(dmm_field_new(2, 3, &mut f), DmmStatus::Ok);
        assert_eq!(dmm_field_order(f), 8);
        let mut x = 0;
        for a in 1..8 {
            assert_eq!(dmm_field_inv(f, a, &mut x), DmmStatus::Ok);
            let mut one = 0;
            dmm_field_mul(f, a, x, &mut one);
            assert_eq!(one, 1);
            dmm_field_add(f, a, a, &mut x);
            assert_eq!(x, 0);
        }
        assert_eq!(dmm_field_inv(f, 0, &mut x), DmmStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(dmm_field_add(f, 8, 0, &mut x), DmmStatus::InvalidArgument);
        dmm_field_free(f);

        let mut g = ptr::null_mut();
        assert_eq!(dmm_field_new(6, 1, &mut g), DmmStatus::InvalidArgument);
        assert!(g.is_null());
        let spec = CString::new("9").unwrap();
        assert_eq!(dmm_field_parse(spec.as_ptr(), &mut g), DmmStatus::Ok);
        assert_eq!(dmm_field_order(g), 9);
        dmm_field_free(g);
        let bad = CString::new("nine").unwrap();
        assert_ne!(dmm_field_parse(bad.as_ptr(), &mut g), DmmStatus::Ok);
    }
}

#[test]
fn null_handles() {
    unsafe {
        let mut x = 0;
        assert_eq!(dmm_field_add(ptr::null(), 0, 0, &mut x), DmmStatus::NullPointer);
        assert_eq!(dmm_field_order(ptr::null()), 0);
        assert_eq!(dmm_field_parse(ptr::null(), ptr::null_mut()), DmmStatus::NullPointer);
        dmm_field_free(ptr::null_mut());
        dmm_solution_free(ptr::null_mut());
        dmm_matrix_free(ptr::null_mut());
        dmm_coder_free(ptr::null_mut());
        dmm_report_free(ptr::null_mut());
        assert_eq!(dmm_report_success(ptr::null()), 0);
    }
}

#[test]
fn solution_info_and_text() {
    unsafe {
        let spec = CString::new("sep-vars mprime=5 nprime=5 F=8").unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(dmm_solution_new(2, spec.as_ptr(), &mut s), DmmStatus::Ok);
        let mut info = DmmSolutionInfo::default();
        assert_eq!(dmm_solution_info(s, &mut info), DmmStatus::Ok);
        assert_eq!((info.q, info.l, info.m, info.n), (2, 10, 16, 16));
        assert_eq!((info.fb, info.recovery_threshold, info.workers), (64, 961, 1024));
        assert_eq!(info.is_matdot, 0);

        let t = text(|b, l, n| dmm_solution_to_text(s, b, l, n));
        let ct = CString::new(t).unwrap();
        let mut s2 = ptr::null_mut();
        assert_eq!(dmm_solution_parse(ct.as_ptr(), &mut s2), DmmStatus::Ok);
        let mut info2 = DmmSolutionInfo::default();
        dmm_solution_info(s2, &mut info2);
        assert_eq!(info, info2);
        dmm_solution_free(s);
        dmm_solution_free(s2);

        let big = CString::new("poly-box m=20,20 n=20,20").unwrap();
        assert_ne!(dmm_solution_new(19, big.as_ptr(), &mut s), DmmStatus::Ok);
        let junk = CString::new("cube m=2").unwrap();
        assert_eq!(dmm_solution_new(19, junk.as_ptr(), &mut s), DmmStatus::Parse);
    }
}

unsafe fn matrix(f: *const DmmField, rows: usize, cols: usize, data: &[u32]) -> *mut DmmMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(dmm_matrix_new(f, rows, cols, data.as_ptr(), &mut m), DmmStatus::Ok);
    m
}

unsafe fn entries(m: *const DmmMatrix) -> Vec<u32> {
    let mut v = vec![0; dmm_matrix_rows(m) * dmm_matrix_cols(m)];
    assert_eq!(dmm_matrix_entries(m, v.as_mut_ptr(), v.len()), DmmStatus::Ok);
    v
}

#[test]
fn matrix_product() {
    unsafe {
        let mut f = ptr::null_mut();
        dmm_field_new(7, 1, &mut f);
        let a = matrix(f, 2, 2, &[1, 2, 3, 4]);
        let b = matrix(f, 2, 1, &[5, 6]);
        let mut c = ptr::null_mut();
        assert_eq!(dmm_matrix_mul(a, b, &mut c), DmmStatus::Ok);
        // 1*5+2*6 = 17 = 3, 3*5+4*6 = 39 = 4 (mod 7)
        assert_eq!(entries(c), vec![3, 4]);
        let mut bad = ptr::null_mut();
        assert_eq!(dmm_matrix_mul(b, a, &mut bad), DmmStatus::InvalidArgument);
        let mut short = [0u32; 1];
        assert_eq!(dmm_matrix_entries(a, short.as_mut_ptr(), 1), DmmStatus::BufferTooSmall);
        assert_eq!(dmm_matrix_new(f, 1, 1, [9u32].as_ptr(), &mut bad), DmmStatus::InvalidArgument);
        for m in [a, b, c] {
            dmm_matrix_free(m);
        }
        dmm_field_free(f);
    }
}

#[test]
fn coded_round_trip() {
    unsafe {
        let mut f = ptr::null_mut();
        dmm_field_new(7, 1, &mut f);
        let spec = CString::new("matdot-box m=2,2").unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(dmm_solution_new(7, spec.as_ptr(), &mut s), DmmStatus::Ok);
        let a_data: Vec<u32> = (0..16).map(|i| (i * 3 + 1) % 7).collect();
        let b_data: Vec<u32> = (0..16).map(|i| (i * 5 + 2) % 7).collect();
        let a = matrix(f, 4, 4, &a_data);
        let b = matrix(f, 4, 4, &b_data);
        let mut want = ptr::null_mut();
        dmm_matrix_mul(a, b, &mut want);

        let mut coder = ptr::null_mut();
        assert_eq!(dmm_coder_new(s, a, b, &mut coder), DmmStatus::Ok);
        assert_eq!(dmm_coder_workers(coder), 49);
        let k1 = dmm_coder_threshold(coder);
        assert_eq!(k1, 25);

        // Workers from the back, the minimum number needed.
        let idx: Vec<usize> = (49 - k1..49).collect();
        let prods: Vec<*mut DmmMatrix> = idx
            .iter()
            .map(|&i| {
                let mut p = ptr::null_mut();
                assert_eq!(dmm_coder_work(coder, i, &mut p), DmmStatus::Ok);
                p
            })
            .collect();
        let cprods: Vec<*const DmmMatrix> = prods.iter().map(|&p| p as *const _).collect();
        let mut got = ptr::null_mut();
        assert_eq!(
            dmm_coder_decode(coder, idx.as_ptr(), cprods.as_ptr(), idx.len(), &mut got),
            DmmStatus::Ok
        );
        assert_eq!(dmm_matrix_equal(got, want), 1);

        let mut none = ptr::null_mut();
        assert_eq!(
            dmm_coder_decode(coder, idx.as_ptr(), cprods.as_ptr(), k1 - 1, &mut none),
            DmmStatus::InsufficientResponses
        );
        assert!(last_error().contains("24"));
        assert_eq!(dmm_coder_work(coder, 49, &mut none), DmmStatus::InvalidArgument);

        for p in prods {
            dmm_matrix_free(p);
        }
        for m in [a, b, want, got] {
            dmm_matrix_free(m);
        }
        dmm_coder_free(coder);
        dmm_solution_free(s);
        dmm_field_free(f);
    }
}

#[test]
fn simulate_and_tables() {
    unsafe {
        let cfg = CString::new(
            "field = 7\nconstruction = matdot-box m=2,2\nr = 4\ns = 4\nt = 4\nstraggler.kind = random\nstraggler.param = 0.3\nseed = 5\n",
        )
        .unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(dmm_simulate(cfg.as_ptr(), &mut r), DmmStatus::Ok);
        assert_eq!(dmm_report_success(r), 1);
        assert!(dmm_report_responses_used(r) >= 25);
        let summary = text(|b, l, n| dmm_report_summary(r, b, l, n));
        assert!(summary.starts_with("success: true"), "{summary}");
        let tr = text(|b, l, n| dmm_report_transcript(r, b, l, n));
        assert_eq!(tr.lines().count(), dmm_report_responses_used(r));
        dmm_report_free(r);

        let id = CString::new("T3").unwrap();
        let tsv = text(|b, l, n| dmm_table_tsv(id.as_ptr(), b, l, n));
        assert!(tsv.starts_with("F\tm\tFB\txi\tk+1\n"));
        let bad = CString::new("T0").unwrap();
        let mut needed = 0;
        assert_eq!(dmm_table_tsv(bad.as_ptr(), ptr::null_mut(), 0, &mut needed), DmmStatus::InvalidArgument);
    }
}
