//! Golden reports for every subcommand. Set `SPIBISIM_BLESS=1` to rewrite
//! the expected files after an intended change.

use std::path::{Path, PathBuf};
use std::process::Command;

use spibisim::syntax::parse_derivation;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Exit code, stdout and stderr in one comparable text.
fn invoke(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_spibisim"))
        .args(args)
        .current_dir(root())
        .output()
        .unwrap();
    format!(
        "exit {}\n--- stdout\n{}--- stderr\n{}",
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    )
}

const CASES: &[(&str, &[&str])] = &[
    (
        "prove",
        &[
            "prove",
            "--theory",
            "fixtures/cipher.thy",
            "--left",
            "pr(#a,#k)",
            "--right",
            "pr(#b,#k)",
        ],
    ),
    (
        "prove-fails",
        &[
            "prove",
            "--theory",
            "fixtures/cipher.thy",
            "--left",
            "#a",
            "--right",
            "#a",
        ],
    ),
    (
        "prove-bad-message",
        &[
            "prove",
            "--theory",
            "fixtures/cipher.thy",
            "--left",
            "enc(#a,",
            "--right",
            "#a",
        ],
    ),
    (
        "synth",
        &["synth", "--msgs", "fixtures/sealed.msgs", "--goal", "pr(#t,#k)"],
    ),
    (
        "synth-fails",
        &["synth", "--msgs", "fixtures/sealed.msgs", "--goal", "#u"],
    ),
    ("normalize", &["normalize", "--theory", "fixtures/cipher.thy"]),
    (
        "consistent",
        &["consistent", "--theory", "fixtures/cipher.thy", "--oracle"],
    ),
    ("consistent-bad", &["consistent", "--theory", "fixtures/bad.thy"]),
    (
        "compose",
        &[
            "compose",
            "--left",
            "fixtures/cipher.thy",
            "--right",
            "fixtures/cipher-relabel.thy",
        ],
    ),
    (
        "compose-fails",
        &[
            "compose",
            "--left",
            "fixtures/cipher.thy",
            "--right",
            "fixtures/bad.thy",
        ],
    ),
    ("step", &["step", "--process", "fixtures/handshake.spi"]),
    (
        "traces",
        &["traces", "--process", "fixtures/handshake.spi", "--depth", "3"],
    ),
    (
        "check-bitrace",
        &[
            "check-bitrace",
            "--bitrace",
            "fixtures/opened.bt",
            "--subst-depth",
            "1",
        ],
    ),
    (
        "check-bisim",
        &[
            "check-bisim",
            "--relation",
            "fixtures/leaky-receiver.rel",
            "--subst-depth",
            "1",
            "--up-to",
            "c,s",
        ],
    ),
    (
        "check-bisim-bare",
        &[
            "check-bisim",
            "--relation",
            "fixtures/leaky-receiver.rel",
            "--subst-depth",
            "1",
        ],
    ),
    (
        "check-bisim-bad-rule",
        &[
            "check-bisim",
            "--relation",
            "fixtures/leaky-receiver.rel",
            "--up-to",
            "c,z",
        ],
    ),
    (
        "distinguish",
        &[
            "distinguish",
            "--left",
            "fixtures/intro-left.spi",
            "--right",
            "fixtures/intro-right.spi",
            "--depth",
            "3",
        ],
    ),
    (
        "distinguish-found",
        &[
            "distinguish",
            "--left",
            "fixtures/handshake.spi",
            "--right",
            "fixtures/intro-left.spi",
            "--depth",
            "1",
        ],
    ),
    ("missing-file", &["normalize", "--theory", "fixtures/absent.thy"]),
];

#[test]
fn golden_reports() {
    let bless = std::env::var_os("SPIBISIM_BLESS").is_some();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut mismatched = Vec::new();
    for (name, args) in CASES {
        let got = invoke(args);
        let path = dir.join(format!("{name}.out"));
        if bless {
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_default();
        if got != want {
            eprintln!("{name}: expected\n{want}\ngot\n{got}");
            mismatched.push(*name);
        }
    }
    assert!(mismatched.is_empty(), "reports differ: {mismatched:?}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for (name, args) in CASES {
        assert_eq!(invoke(args), invoke(args), "{name}");
    }
}

#[test]
fn emitted_derivation_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.txt");
    let report = invoke(&[
        "prove",
        "--theory",
        "fixtures/cipher.thy",
        "--left",
        "enc(pr(#a,#k),#k)",
        "--right",
        "enc(pr(#b,#k),#k)",
        "--emit-derivation",
        out.to_str().unwrap(),
    ]);
    assert!(report.starts_with("exit 0"), "{report}");
    let d = parse_derivation(std::fs::read_to_string(&out).unwrap().trim()).unwrap();
    d.validate().unwrap();
}

#[test]
fn usage_errors_exit_two() {
    assert!(invoke(&["prove"]).starts_with("exit 2"));
    assert!(
        invoke(&["traces", "--process", "fixtures/handshake.spi", "--depth", "99"]).starts_with("exit 2")
    );
    assert!(invoke(&["frobnicate"]).starts_with("exit 2"));
}
