//! Lock-step comparison of the interpreter against the independent
//! reference interpreter in the testkit: same reachable states, same
//! labels, same contexts, same amplitudes.

use qproc_testkit::compare::assert_equivalent;

fn corpus(name: &str) -> String {
    let path = format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn build_epr_agrees_with_the_reference() {
    assert_equivalent(&corpus("build_epr.qp"), "Main", 256);
}

#[test]
fn check_epr_agrees_with_the_reference() {
    assert_equivalent(&corpus("check_epr1.qp"), "Main", 512);
}

#[test]
fn coin_flip_agrees_with_the_reference() {
    assert_equivalent(&corpus("coin.qp"), "Main", 256);
}

#[test]
fn choice_agrees_with_the_reference() {
    assert_equivalent(&corpus("choice_demo.qp"), "Main", 256);
}

#[test]
fn no_cloning_agrees_with_the_reference() {
    assert_equivalent(&corpus("no_cloning.qp"), "Main", 64);
}

#[test]
fn scope_cleanup_agrees_with_the_reference() {
    assert_equivalent(&corpus("scope_cleanup.qp"), "Main", 1024);
}

#[test]
fn teleport_agrees_with_the_reference() {
    assert_equivalent(&corpus("teleport.qp"), "Main", 512);
}

#[test]
fn ghz_agrees_with_the_reference() {
    assert_equivalent(&corpus("ghz.qp"), "Main", 2048);
}

#[test]
fn two_epr_pairs_agree_with_the_reference() {
    assert_equivalent(&corpus("two_pairs.qp"), "Main", 4096);
}

#[test]
fn nested_parallel_agrees_with_the_reference() {
    let src = "Main = [ nat[k] : ( ( a?k . end || ( a!1 . end || a!2 . end ) ) |{a} ) ]\n";
    assert_equivalent(src, "Main", 256);
}

#[test]
fn measurement_emission_agrees_with_the_reference() {
    let src = "Main = [ qubit[x] nat[r] : ( ( c?x . H[x] . m!M_std[x] . end \
               || c!0 . m?r . end ) |{c,m} ) ]\n";
    assert_equivalent(src, "Main", 512);
}

#[test]
fn partial_application_agrees_with_the_reference() {
    let src = "P = [ nat[n] qubit[q] : ( ( c?q . X[q] . M_std[q] . end || c!n . end ) |{c} ) ]\n\
               Main = [ nat[v] : ( ( s?v . P[v] || s!1 . end ) |{s} ) ]\n";
    assert_equivalent(src, "Main", 512);
}
