mod contact_triples {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/contact_triples.rs"));
}

mod softmax_observables {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/softmax_observables.rs"));
}

mod synthetic_families {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/synthetic_families.rs"));
}

mod gram_realization {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/gram_realization.rs"));
}

mod exponent_fit {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/exponent_fit.rs"));
}

mod power_fit {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/power_fit.rs"));
}

mod sweeps {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sweeps.rs"));
}

mod dump_io {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/dump_io.rs"));
}

#[test]
fn contact_triples_runs() {
    contact_triples::run_example().expect("contact_triples example should run");
}

#[test]
fn softmax_observables_runs() {
    softmax_observables::run_example().expect("softmax_observables example should run");
}

#[test]
fn synthetic_families_runs() {
    synthetic_families::run_example().expect("synthetic_families example should run");
}

#[test]
fn gram_realization_runs() {
    gram_realization::run_example().expect("gram_realization example should run");
}

#[test]
fn exponent_fit_runs() {
    exponent_fit::run_example().expect("exponent_fit example should run");
}

#[test]
fn power_fit_runs() {
    power_fit::run_example().expect("power_fit example should run");
}

#[test]
fn sweeps_runs() {
    sweeps::run_example().expect("sweeps example should run");
}

#[test]
fn dump_io_runs() {
    dump_io::run_example().expect("dump_io example should run");
}
