use std::time::Instant;

use hcompress::arith::{hlu, lu_residual_norm, ArithmeticMode};
use hcompress::hmatrix::{HMatrix, MemoryReport, StorageMode};
use hcompress::model::Model;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Bench, BenchConfig};
use crate::report::{BenchReport, Row};
use crate::Result;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median wall time of `reps` runs of `f`, plus the last result.
fn timed<R>(reps: usize, mut f: impl FnMut() -> R) -> (f64, R) {
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps {
        let t = Instant::now();
        last = Some(f());
        times.push(t.elapsed().as_secs_f64());
    }
    (median(times), last.expect("reps >= 1"))
}

struct Setup {
    model: Model,
    assembly: Vec<(f64, HMatrix<f64>, f64)>,
}

fn setup(cfg: &BenchConfig) -> Result<Setup> {
    cfg.validate()?;
    let model = Model::build(cfg.model_config())?;
    let mut assembly = Vec::new();
    for &eps in &cfg.eps {
        let t = Instant::now();
        let (h, _) = model.assemble::<f64>(eps)?;
        assembly.push((eps, h, t.elapsed().as_secs_f64()));
    }
    Ok(Setup { model, assembly })
}

fn base_row(cfg: &BenchConfig, n: usize, eps: f64, mode: StorageMode, mem: &MemoryReport) -> Row {
    Row {
        bench: cfg.bench.to_string(),
        app: cfg.app.to_string(),
        n,
        eps,
        codec: mode.to_string(),
        arith: None,
        dense_too: cfg.dense_too,
        bytes_uncompressed: mem.uncompressed,
        bytes_compressed: mem.total(),
        bytes_dense: mem.dense(),
        bytes_lowrank: mem.lowrank(),
        rate: mem.rate(),
        status: "ok".into(),
        ..Row::default()
    }
}

/// Copy of `h` stored in `mode`, with its memory report and the median time.
fn compressed(h: &HMatrix<f64>, eps: f64, mode: StorageMode, dense_too: bool, reps: usize) -> Result<(HMatrix<f64>, MemoryReport, f64)> {
    if mode.is_raw() {
        return Ok((h.clone(), h.memory_footprint(), 0.0));
    }
    let (t, r) = timed(reps, || {
        let mut c = h.clone();
        c.compress_in_place(eps, mode, dense_too).map(|m| (c, m))
    });
    let (c, m) = r?;
    Ok((c, m, t))
}

/// Storage size and compression time per mode.
pub fn run_compress(cfg: &BenchConfig) -> Result<BenchReport> {
    let s = setup(cfg)?;
    let mut report = BenchReport::default();
    for (eps, h, t_asm) in &s.assembly {
        for mode in cfg.modes() {
            let (_, mem, t) = compressed(h, *eps, mode, cfg.dense_too, cfg.reps)?;
            let mut row = base_row(cfg, s.model.size(), *eps, mode, &mem);
            row.t_assembly = Some(*t_asm);
            row.t_compress = Some(t);
            report.rows.push(row);
        }
    }
    Ok(report)
}

/// Matvec time relative to FP64 and the deviation from the FP64 result,
/// normalized by `||M||_F ||x||`.
pub fn run_matvec(cfg: &BenchConfig) -> Result<BenchReport> {
    let s = setup(cfg)?;
    let n = s.model.size();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x_norm = DVector::from_column_slice(&x).norm();
    let mut report = BenchReport::default();
    for (eps, h, t_asm) in &s.assembly {
        let scale = h.norm_fro()? * x_norm;
        let mut reference: Option<(Vec<f64>, f64)> = None;
        for mode in cfg.modes() {
            let (c, mem, t_c) = compressed(h, *eps, mode, cfg.dense_too, 1)?;
            let (t, y) = timed(cfg.reps, || {
                let mut y = vec![0.0; n];
                c.matvec(1.0, &x, 0.0, &mut y).map(|_| y)
            });
            let y = y?;
            let (y_ref, t_ref) = reference.get_or_insert_with(|| (y.clone(), t));
            let err = y.iter().zip(y_ref.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let mut row = base_row(cfg, n, *eps, mode, &mem);
            row.t_assembly = Some(*t_asm);
            row.t_compress = Some(t_c);
            row.t_matvec = Some(t);
            row.rel_time = Some(if *t_ref > 0.0 { t / *t_ref } else { 1.0 });
            row.matvec_error = Some(if scale > 0.0 { err / scale } else { 0.0 });
            report.rows.push(row);
        }
    }
    Ok(report)
}

/// LU time, factor storage and residual per strategy and mode. The input
/// is stored in the row's mode; the residual is taken against the
/// uncompressed matrix.
pub fn run_lu(cfg: &BenchConfig) -> Result<BenchReport> {
    let s = setup(cfg)?;
    let mut report = BenchReport::default();
    for (eps, h, t_asm) in &s.assembly {
        report.rows.extend(lu_rows(cfg, *eps, h, Some(*t_asm))?);
    }
    Ok(report)
}

/// LU rows for one assembled matrix. A failed factorization is recorded in
/// the row status and the remaining rows are still produced.
pub fn lu_rows(cfg: &BenchConfig, eps: f64, h: &HMatrix<f64>, t_assembly: Option<f64>) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for strategy in cfg.arith.strategies() {
        let mut t_ref = None;
        for mode in cfg.modes() {
            let (input, mem, t_c) = compressed(h, eps, mode, cfg.dense_too, 1)?;
            let mut row = base_row(cfg, h.nrows(), eps, mode, &mem);
            row.arith = Some(strategy.to_string());
            row.t_assembly = t_assembly;
            row.t_compress = Some(t_c);
            let amode = ArithmeticMode::new(strategy, mode, eps)?.with_dense(cfg.dense_too);
            let (t, res) = timed(cfg.reps, || hlu(&input, amode));
            match res {
                Ok((f, _)) => {
                    let t_base = *t_ref.get_or_insert(t);
                    let fm = f.memory_footprint();
                    row.t_lu = Some(t);
                    row.rel_time = Some(if t_base > 0.0 { t / t_base } else { 1.0 });
                    row.factor_bytes = Some(fm.total());
                    row.factor_rate = Some(fm.rate());
                    row.lu_residual = Some(lu_residual_norm(h, &f, cfg.seed)?);
                }
                Err(e) => row.status = e.to_string(),
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn run(cfg: &BenchConfig) -> Result<BenchReport> {
    match cfg.bench {
        Bench::Compress => run_compress(cfg),
        Bench::Matvec => run_matvec(cfg),
        Bench::Lu => run_lu(cfg),
    }
}
