//! Built-in property suite run by `gapcount verify`.
//!
//! Each check draws from a fixed-seed generator and reports pass or fail with a
//! short detail line; the whole suite runs in a few seconds.

use std::f64::consts::E;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::estimate::{
    bootstrap_halfiqr, bucket_series, gamma_sweep, AggregateOptions, Cell, Coordinate, Statistic, TupleField,
    Weighting, DEFAULT_GAMMA_GRID,
};
use crate::gap::{
    accumulation_scale, contact_point, contact_triple, laplace_envelope, rank_boundary, Scale, DEFAULT_EPS,
};
use crate::io::{read_triples, write_triples, DumpFormat, DumpReader, DumpWriter, Dtype};
use crate::row::{gap_profile, observables, partition_by_parts, softmax, RowMeta, ScoreRow};
use crate::synth::{
    block_gram, gram_realize, simplex_gram, yarn_beta, BlockConfig, BlockFamily, ScoreFamily, SimplexConfig,
    SimplexFamily,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

type Check = fn() -> Result<String, String>;

const CHECKS: &[(&str, Check)] = &[
    ("contact-identity", contact_identity),
    ("counting-envelope", counting_envelope),
    ("shift-invariance", shift_invariance),
    ("partition-by-parts", partition_parts),
    ("laplace-sandwich", laplace_sandwich),
    ("subcritical-top-two", subcritical_top_two),
    ("supercritical-partition", supercritical_partition),
    ("rank-boundary", rank_boundary_closed_form),
    ("gram-realization", gram_realization),
    ("planted-recovery", planted_recovery),
    ("gamma-monotone", gamma_monotone),
    ("bootstrap-determinism", bootstrap_determinism),
    ("schedule-identity", schedule_identity),
    ("io-round-trip", io_round_trip),
];

/// Runs every check in a fixed order.
pub fn run_all() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { name, passed, detail }
        })
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_rows(seed: u64, count: usize, max_n: usize) -> Vec<ScoreRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=max_n);
            ScoreRow::from_scores((0..n).map(|_| normal.sample(&mut rng)).collect()).unwrap()
        })
        .collect()
}

fn contact_identity() -> Result<String, String> {
    let mut worst = 0.0f64;
    for row in random_rows(1, 2000, 256) {
        let p = gap_profile(&row);
        let Scale::Finite(lambda) = accumulation_scale(&p) else { continue };
        let c = contact_point(&p, 0.0).map_err(|e| e.to_string())?;
        let lhs = lambda * c.delta;
        let rhs = c.alpha * (row.len() as f64).ln();
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
    }
    ensure(worst <= 1e-10, || format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn counting_envelope() -> Result<String, String> {
    for row in random_rows(2, 1000, 256) {
        let p = gap_profile(&row);
        let Scale::Finite(lambda) = accumulation_scale(&p) else { continue };
        for (u, count) in p.levels() {
            ensure(count as f64 <= (lambda * u).exp() * (1.0 + 1e-10), || format!("N({u}) = {count} above envelope"))?;
        }
    }
    Ok("N(u) <= exp(Lambda u) on 1000 rows".into())
}

fn shift_invariance() -> Result<String, String> {
    for (i, row) in random_rows(3, 200, 64).into_iter().enumerate() {
        let shift = 1e3 * (i as f64 - 100.0);
        let moved = ScoreRow::from_scores(row.scores().iter().map(|z| z + shift).collect()).unwrap();
        for beta in [0.1, 1.0, 10.0] {
            let a = observables(&softmax(&row, beta).map_err(|e| e.to_string())?);
            let b = observables(&softmax(&moved, beta).map_err(|e| e.to_string())?);
            ensure((a.entropy - b.entropy).abs() <= 1e-9, || format!("entropy moved under shift {shift}"))?;
        }
        let ta = contact_triple(&row, DEFAULT_EPS).map_err(|e| e.to_string())?;
        let tb = contact_triple(&moved, DEFAULT_EPS).map_err(|e| e.to_string())?;
        if let (Some(x), Some(y)) = (ta.lambda.finite(), tb.lambda.finite()) {
            ensure((x - y).abs() <= 1e-6 * x, || format!("Lambda {x} vs {y} under shift {shift}"))?;
        }
    }
    Ok("observables and Lambda invariant under score shifts".into())
}

fn partition_parts() -> Result<String, String> {
    let mut worst = 0.0f64;
    for row in random_rows(4, 500, 128) {
        let p = gap_profile(&row);
        for beta in [0.01, 0.5, 3.0, 40.0] {
            let direct = softmax(&row, beta).map_err(|e| e.to_string())?.z;
            let parts = partition_by_parts(&p, beta).map_err(|e| e.to_string())?;
            worst = worst.max((direct - parts).abs() / direct);
        }
    }
    ensure(worst <= 1e-12, || format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn laplace_sandwich() -> Result<String, String> {
    for row in random_rows(5, 500, 256) {
        let p = gap_profile(&row);
        let slack = (1.0 + (row.len() as f64).ln()).ln();
        for beta in [0.05, 0.3, 1.0, 4.0, 25.0] {
            let s = laplace_envelope(&p, beta).map_err(|e| e.to_string())?;
            let log_z = softmax(&row, beta).map_err(|e| e.to_string())?.log_z;
            ensure(s <= log_z + 1e-12 && log_z <= s + slack + 1e-12, || format!("S={s} logZ={log_z} at beta={beta}"))?;
        }
    }
    Ok("S <= log Z <= S + log(1 + log n)".into())
}

fn subcritical_top_two() -> Result<String, String> {
    let fam = SimplexFamily::fixed(1.0);
    let row = fam.row(1 << 16).map_err(|e| e.to_string())?;
    let lambda = accumulation_scale(&gap_profile(&row)).as_f64();
    for s in [0.01, 0.05, 0.2, 0.5] {
        let d = observables(&softmax(&row, s * lambda).map_err(|e| e.to_string())?).top_two_gap;
        ensure(d <= 2.0 / E * s + 1e-9, || format!("D = {d} at s = {s}"))?;
    }
    Ok("D(s Lambda) <= (2/e) s".into())
}

fn supercritical_partition() -> Result<String, String> {
    let families: [&dyn ScoreFamily; 2] = [&SimplexFamily::fixed(0.5), &BlockFamily::planted(4, 1.0)];
    for fam in families {
        let row = fam.row(4096).map_err(|e| e.to_string())?;
        let lambda = accumulation_scale(&gap_profile(&row)).as_f64();
        for s in [2.0, 5.0, 20.0] {
            let sm = softmax(&row, s * lambda).map_err(|e| e.to_string())?;
            let h = observables(&sm).entropy;
            let bound = s / (s - 1.0);
            ensure(sm.z >= 1.0 && sm.z <= bound + 1e-10, || format!("{}: Z = {} at s = {s}", fam.name(), sm.z))?;
            ensure(h <= sm.log_z + bound * bound - 1.0 + 1e-9, || format!("{}: H = {h} at s = {s}", fam.name()))?;
        }
    }
    Ok("1 <= Z <= s/(s-1) and entropy bound".into())
}

fn rank_boundary_closed_form() -> Result<String, String> {
    let row = ScoreRow::from_scores(vec![0.0, -1.0, -2.0]).unwrap();
    let beta = rank_boundary(&gap_profile(&row), 2f64.ln()).map_err(|e| e.to_string())?.as_f64();
    let expected = (2.0 / (5f64.sqrt() - 1.0)).ln();
    ensure((beta - expected).abs() <= 1e-9, || format!("{beta} vs {expected}"))?;
    Ok(format!("beta = {beta:.12}"))
}

fn gram_realization() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut mats = vec![
        simplex_gram(&SimplexConfig::new(32, 0.7).unwrap()),
        block_gram(&BlockConfig::new(32, 4, 0.3, 1.1).unwrap()),
    ];
    for _ in 0..20 {
        let n = rng.random_range(2..=24);
        let a = DMatrix::from_fn(n, n, |_, _| normal.sample(&mut rng));
        mats.push(&a * a.transpose());
    }
    let mut worst = 0.0f64;
    for sigma in &mats {
        let g = gram_realize(sigma, sigma.nrows()).map_err(|e| e.to_string())?;
        worst = worst.max((g.scores() - sigma).amax());
    }
    ensure(worst <= 1e-8, || format!("max reconstruction error {worst:e}"))?;
    Ok(format!("max reconstruction error {worst:.1e}"))
}

fn planted_recovery() -> Result<String, String> {
    let grid: Vec<usize> = (10..=20).step_by(2).map(|k| 1usize << k).collect();
    let cell = Cell::new("planted", grid.clone(), vec![TupleField::Head]).map_err(|e| e.to_string())?;
    for xi in [0.5, 1.0, 2.0] {
        let fam = SimplexFamily::planted(xi);
        let triples = grid
            .iter()
            .map(|&n| {
                let t = contact_triple(&fam.row(n)?, DEFAULT_EPS)?;
                Ok((RowMeta::new("planted", 0, 0, "s", n, 0), t))
            })
            .collect::<crate::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        let fit = bucket_series(&cell, &triples).fit(Coordinate::Lambda, Weighting::Plain).map_err(|e| e.to_string())?;
        ensure((fit.slope - xi).abs() <= 1e-10, || format!("xi = {xi}: slope {}", fit.slope))?;
    }
    Ok("simplex xi in {0.5, 1, 2} recovered".into())
}

fn gamma_monotone() -> Result<String, String> {
    let sweep = gamma_sweep(&random_rows(6, 300, 512), &DEFAULT_GAMMA_GRID).map_err(|e| e.to_string())?;
    let medians: Vec<f64> = sweep.points.iter().map(|p| p.median_p_star).collect();
    ensure(medians.windows(2).all(|w| w[0] <= w[1]), || format!("medians {medians:?}"))?;
    Ok(format!("median p* {:.3} .. {:.3}", medians[0], medians[medians.len() - 1]))
}

fn bootstrap_determinism() -> Result<String, String> {
    let grid = vec![32, 64, 128];
    let cell = Cell::new("c", grid.clone(), vec![TupleField::Head]).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut triples = Vec::new();
    for &n in &grid {
        for head in 0..6 {
            let row = ScoreRow::from_scores((0..n).map(|_| normal.sample(&mut rng)).collect()).unwrap();
            triples.push((RowMeta::new("c", 0, head, "s", n, 0), contact_triple(&row, DEFAULT_EPS).unwrap()));
        }
    }
    let stat = Statistic::Xi(Coordinate::Lambda);
    let run = || bootstrap_halfiqr(&cell, &triples, stat, AggregateOptions::default(), 100, 7).map_err(|e| e.to_string());
    let multi = run()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let single = pool.install(run)?;
    ensure(multi == single, || format!("{multi:?} vs {single:?}"))?;
    Ok(format!("half-IQR {:.6} on 1 and N workers", multi.half_iqr))
}

fn schedule_identity() -> Result<String, String> {
    for t in [512usize, 4096, 32768] {
        let b = yarn_beta(t, t).map_err(|e| e.to_string())?;
        ensure(b == 1.0, || format!("yarn(T, T) = {b}"))?;
    }
    Ok("yarn(T, T) = 1".into())
}

fn io_round_trip() -> Result<String, String> {
    let rows = random_rows(8, 50, 64);
    for format in [DumpFormat::Text, DumpFormat::Binary] {
        let mut w = DumpWriter::new(Vec::new(), format, Dtype::F64).map_err(|e| e.to_string())?;
        for r in &rows {
            w.write_row(r).map_err(|e| e.to_string())?;
        }
        let bytes = w.finish().map_err(|e| e.to_string())?;
        let back = DumpReader::new(Box::new(std::io::Cursor::new(bytes)), false)
            .map_err(|e| e.to_string())?
            .collect::<crate::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        ensure(back == rows, || format!("{format:?} dump changed rows"))?;
    }
    let triples: Vec<_> =
        rows.iter().map(|r| (r.meta().clone(), contact_triple(r, DEFAULT_EPS).unwrap())).collect();
    let csv = write_triples(Vec::new(), &triples).map_err(|e| e.to_string())?;
    let back = read_triples(csv.as_slice()).map_err(|e| e.to_string())?;
    ensure(back == triples, || "triples changed in CSV round trip".into())?;
    Ok("text, binary and CSV round trips exact".into())
}
