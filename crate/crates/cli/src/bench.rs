use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use hpt_core::dc::DcOptions;
use hpt_core::skeleton::{build_plan, BlockSize, Representation};
use hpt_core::special::GeometryKind;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::commands::random_block;
use crate::report::{sci, Report};
use crate::CliError;

/// Least-squares slope of `ln y` against `ln x` with a two-sided 95% interval half-width.
#[derive(Debug, Clone, Copy)]
pub struct Slope {
    pub slope: f64,
    pub half_width: Option<f64>,
}

pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<Slope> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    let k = pts.len();
    if k < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let half_width = (k > 2).then(|| {
        let sse: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
        let se = (sse / (k - 2) as f64 / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, (k - 2) as f64).expect("positive dof").inverse_cdf(0.975);
        t * se
    });
    Some(Slope { slope, half_width })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

struct Sample {
    n: usize,
    block: usize,
    precompute: f64,
    execute: f64,
    precompute_work: f64,
    execute_work: f64,
    checksum: u64,
}

fn measure(kind: GeometryKind<f64>, n: usize, block: BlockSize, repeats: usize, seed: u64) -> Result<Sample, CliError> {
    let opts = DcOptions::default();
    let mut pre = Vec::with_capacity(repeats);
    let mut plan = None;
    for _ in 0..repeats {
        let mut p = build_plan(kind, n, block)?;
        let start = Instant::now();
        p.precompute(&opts)?;
        pre.push(start.elapsed().as_secs_f64());
        plan = Some(p);
    }
    let plan = plan.expect("at least one repeat");
    let x = random_block(plan.layout(), n, Representation::Native, seed);
    let mut exec = Vec::with_capacity(repeats);
    let mut hasher = DefaultHasher::new();
    for r in 0..repeats {
        let start = Instant::now();
        let y = plan.to_base(&x)?;
        exec.push(start.elapsed().as_secs_f64());
        if r == 0 {
            for v in y.matrix().as_slice() {
                v.to_bits().hash(&mut hasher);
            }
        }
    }
    let cost = plan.cost_report();
    Ok(Sample {
        n,
        block: plan.block(),
        precompute: median(pre),
        execute: median(exec),
        precompute_work: cost.precompute_work,
        execute_work: (cost.node_flops + cost.givens_rotations) as f64,
        checksum: hasher.finish(),
    })
}

fn slope_text(s: Option<Slope>) -> String {
    match s {
        Some(Slope { slope, half_width: Some(h) }) => format!("{slope:.3} ± {h:.3}"),
        Some(Slope { slope, half_width: None }) => format!("{slope:.3}"),
        None => "n/a".into(),
    }
}

pub fn run(kind: GeometryKind<f64>, sweep: &[usize], block: BlockSize, repeats: usize, seed: u64) -> Result<(), CliError> {
    let mut samples = Vec::with_capacity(sweep.len());
    for &n in sweep {
        log::info!("bench n = {n}");
        samples.push(measure(kind, n, block, repeats, seed)?);
    }
    let col = |f: fn(&Sample) -> f64| samples.iter().map(f).collect::<Vec<_>>();
    let ns = col(|s| s.n as f64);

    let mut r = Report::new();
    r.kv("kind", kind.name());
    r.kv("repeats", repeats);
    let mut all = DefaultHasher::new();
    for s in &samples {
        r.kv(format!("checksum.{}", s.n), format!("{:016x}", s.checksum));
        s.checksum.hash(&mut all);
    }
    r.kv("checksum", format!("{:016x}", all.finish()));
    if samples.len() >= 2 {
        let fits = [
            ("precompute", loglog_slope(&ns, &col(|s| s.precompute)), loglog_slope(&ns, &col(|s| s.precompute_work))),
            ("execute", loglog_slope(&ns, &col(|s| s.execute)), loglog_slope(&ns, &col(|s| s.execute_work))),
        ];
        for (name, measured, predicted) in fits {
            if let Some(m) = measured {
                r.kv(format!("slope.{name}"), format!("{:.4}", m.slope));
                if let Some(h) = m.half_width {
                    r.kv(format!("slope.{name}.ci95"), format!("{:.4}", h));
                }
            }
            if let Some(p) = predicted {
                r.kv(format!("predicted.{name}"), format!("{:.4}", p.slope));
            }
            println!("# {name}: measured slope {}, predicted from operation counts {}", slope_text(measured), slope_text(predicted.map(|p| Slope { half_width: None, ..p })));
        }
    }
    r.header(&["n", "block", "precompute_s", "execute_s", "precompute_work", "execute_work"]);
    for s in &samples {
        r.row(vec![
            s.n.to_string(),
            s.block.to_string(),
            sci(s.precompute),
            sci(s.execute),
            sci(s.precompute_work),
            sci(s.execute_work),
        ]);
    }
    r.print();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws_have_zero_width() {
        let x = [64.0, 128.0, 256.0, 512.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        let s = loglog_slope(&x, &y).unwrap();
        assert!((s.slope - 3.0).abs() < 1e-12);
        assert!(s.half_width.unwrap() < 1e-9);
    }

    #[test]
    fn two_points_give_no_interval() {
        let s = loglog_slope(&[1.0, 2.0], &[1.0, 4.0]).unwrap();
        assert!((s.slope - 2.0).abs() < 1e-12);
        assert!(s.half_width.is_none());
        assert!(loglog_slope(&[8.0], &[1.0]).is_none());
    }

    #[test]
    fn interval_matches_tabulated_quantile() {
        let x = [1.0f64, 2.0, 4.0, 8.0, 16.0];
        let y: Vec<f64> = x.iter().zip([1.0, -1.0, 1.0, -1.0, 1.0]).map(|(v, e)| v.powi(2) * (0.01f64 * e).exp()).collect();
        let s = loglog_slope(&x, &y).unwrap();
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let mx = lx.iter().sum::<f64>() / 5.0;
        let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let my = ly.iter().sum::<f64>() / 5.0;
        let sse: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - my - s.slope * (a - mx)).powi(2)).sum();
        let expected = 3.182446305284263 * (sse / 3.0 / sxx).sqrt();
        assert!((s.half_width.unwrap() - expected).abs() <= 1e-9 * expected);
    }
}
