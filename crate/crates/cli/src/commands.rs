use std::path::{Path, PathBuf};
use std::time::Instant;

use hpt_core::dc::DcOptions;
use hpt_core::io::{coefficients_from_bytes, coefficients_to_bytes, plan_from_bytes, plan_to_bytes};
use hpt_core::skeleton::{build_plan, BlockSize, CoefficientBlock, CostReport, Direction, Layout, Representation};
use hpt_core::special::GeometryKind;
use hpt_core::TransformPlan64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{sci, Report};
use crate::CliError;

pub enum PlanSource {
    File(PathBuf),
    Build(GeometryKind<f64>, usize, BlockSize),
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::new(CliError::USAGE, format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::new(CliError::USAGE, format!("cannot write {}: {e}", path.display())))
}

fn with_path(path: &Path) -> impl Fn(hpt_core::Error) -> CliError + '_ {
    move |e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    }
}

pub fn load_plan(path: &Path) -> Result<TransformPlan64, CliError> {
    plan_from_bytes(&read_file(path)?).map_err(with_path(path))
}

pub fn load_coefficients(path: &Path) -> Result<CoefficientBlock<f64>, CliError> {
    coefficients_from_bytes(&read_file(path)?).map_err(with_path(path))
}

pub fn ready_plan(kind: GeometryKind<f64>, degree: usize, block: BlockSize) -> Result<TransformPlan64, CliError> {
    let mut plan = build_plan(kind, degree, block)?;
    plan.precompute(&DcOptions::default())?;
    Ok(plan)
}

pub fn random_block(layout: Layout, n: usize, rep: Representation, seed: u64) -> CoefficientBlock<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CoefficientBlock::from_fn(layout, n, rep, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn cost_pairs(report: &mut Report, c: &CostReport) {
    report.kv("kind", c.kind);
    report.kv("degree", c.degree);
    report.kv("block", c.block);
    report.kv("blocks", c.blocks);
    report.kv("levels", c.levels);
    report.kv("families", c.families);
    report.kv("decompositions", c.decompositions);
    report.kv("decompositions_per_family", c.decompositions_per_family);
    report.kv("dyadic_sum", c.dyadic_sum);
    report.kv("max_path_length", c.max_path_length);
    report.kv("givens_rotations", c.givens_rotations);
    report.kv("all_givens_rotations", c.all_givens_rotations);
    report.kv("node_flops", c.node_flops);
    report.kv("storage_bytes", c.storage_bytes);
    report.kv("precompute_work", c.precompute_work);
}

pub fn plan(kind: GeometryKind<f64>, degree: usize, block: BlockSize, out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let plan = ready_plan(kind, degree, block)?;
    let seconds = start.elapsed().as_secs_f64();
    write_file(out, &plan_to_bytes(&plan)?)?;
    let cost = plan.cost_report();
    let mut r = Report::new();
    cost_pairs(&mut r, &cost);
    r.kv("precompute_seconds", format!("{seconds:.6}"));
    r.kv("plan", out.display());
    r.header(&["family", "level", "source", "target", "section", "buffer", "bytes", "seconds"]);
    for (i, node) in plan.nodes().iter().enumerate() {
        r.row(vec![
            node.family.to_string(),
            node.level.to_string(),
            node.source.to_string(),
            node.target.to_string(),
            node.section.to_string(),
            node.buffer.to_string(),
            cost.node_storage_bytes[i].to_string(),
            format!("{:.4}", cost.node_seconds[i]),
        ]);
    }
    r.print();
    Ok(())
}

pub fn apply(plan_path: &Path, input: &Path, output: &Path, direction: Direction) -> Result<(), CliError> {
    let plan = load_plan(plan_path)?;
    let x = load_coefficients(input)?;
    let (y, stats) = plan.execute(&x, direction)?;
    write_file(output, &coefficients_to_bytes(&y))?;
    let inverse = match direction {
        Direction::ToBase => Direction::FromBase,
        Direction::FromBase => Direction::ToBase,
    };
    let back = plan.execute(&y, inverse)?.0;
    let mut r = Report::new();
    r.kv("direction", if direction == Direction::ToBase { "to-base" } else { "from-base" });
    r.kv("degree", plan.degree());
    r.kv("rotations", stats.rotations);
    r.kv("node_flops", stats.node_flops);
    r.kv("seconds", format!("{:.6}", stats.seconds));
    r.kv("input_norm", sci(x.frobenius()));
    r.kv("output_norm", sci(y.frobenius()));
    r.kv("roundtrip_max_error", sci(back.max_abs_diff(&x)));
    r.kv("output", output.display());
    r.print();
    Ok(())
}

pub fn coeffs(kind: &GeometryKind<f64>, degree: usize, zero: bool, rep: Representation, seed: u64, out: &Path) -> Result<(), CliError> {
    let layout = Layout::of(kind);
    let block = if zero { CoefficientBlock::zeros(layout, degree) } else { random_block(layout, degree, rep, seed) };
    write_file(out, &coefficients_to_bytes(&block))?;
    let mut r = Report::new();
    r.kv("layout", layout.name());
    r.kv("degree", degree);
    r.kv("norm", sci(block.frobenius()));
    r.kv("output", out.display());
    r.print();
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.value <= self.threshold
    }
}

fn ceil_log2(j: usize) -> usize {
    (usize::BITS - (j.max(1) - 1).leading_zeros()) as usize
}

fn structural_defect(plan: &TransformPlan64) -> f64 {
    let mut bad = 0usize;
    if !plan.is_precomputed() {
        bad += 1;
    }
    let families = plan.families().len();
    if plan.decomposition_count() != families * (plan.blocks() - 1) {
        bad += 1;
    }
    let bound = ceil_log2(plan.blocks());
    bad += (0..=plan.degree()).filter(|&order| plan.path(order).len() > bound).count();
    bad as f64
}

fn node_checks(plan: &TransformPlan64) -> Result<[Check; 3], CliError> {
    let (mut route, mut orth, mut eig) = (0.0f64, 0.0f64, 0.0f64);
    for node in plan.nodes() {
        let data = node.data.as_ref().ok_or_else(|| CliError::new(CliError::VERIFY, "plan has nodes without data"))?;
        let conn = plan.connection(node.target, node.source)?;
        route = route.max(data.u.sub(&conn.givens_product(node.section)).max_abs());
        orth = orth.max(data.u.orthonormality_defect());
        for (k, &l) in data.eigenvalues.iter().enumerate() {
            let exact = conn.eigenvalue(k);
            eig = eig.max((l - exact).abs() / exact.abs().max(1.0));
        }
    }
    Ok([
        Check { name: "node_givens_route", value: route, threshold: 1e-9 },
        Check { name: "node_orthonormality", value: orth, threshold: 1e-10 },
        Check { name: "node_eigenvalues", value: eig, threshold: 1e-9 },
    ])
}

pub fn verify(source: PlanSource, full: bool, seed: u64) -> Result<(), CliError> {
    let plan = match source {
        PlanSource::File(path) => load_plan(&path)?,
        PlanSource::Build(kind, n, block) => ready_plan(kind, n, block)?,
    };
    let n = plan.degree();
    let x = random_block(plan.layout(), n, Representation::Native, seed);
    let scale = x.matrix().max_abs().max(f64::MIN_POSITIVE);
    let y = plan.to_base(&x)?;
    let back = plan.from_base(&y)?;

    let mut checks = vec![
        Check { name: "structure", value: structural_defect(&plan), threshold: 0.0 },
        Check { name: "roundtrip", value: back.max_abs_diff(&x) / scale, threshold: 1e-9 },
        Check {
            name: "norm",
            value: (y.frobenius() - x.frobenius()).abs() / x.frobenius().max(f64::MIN_POSITIVE),
            threshold: 1e-10,
        },
    ];
    if full {
        let givens = ready_plan(*plan.kind(), n, BlockSize::Fixed(n))?;
        let g = givens.to_base(&x)?;
        checks.push(Check {
            name: "route_equivalence",
            value: y.max_abs_diff(&g) / g.matrix().max_abs().max(f64::MIN_POSITIVE),
            threshold: 1e-9,
        });
        checks.extend(node_checks(&plan)?);
    }

    let mut r = Report::new();
    r.kv("kind", plan.kind().name());
    r.kv("degree", n);
    r.kv("block", plan.block());
    r.kv("depth", if full { "full" } else { "quick" });
    for c in &checks {
        r.kv(format!("check.{}", c.name), if c.passed() { "pass" } else { "fail" });
        r.kv(format!("value.{}", c.name), sci(c.value));
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    r.kv("status", if failed.is_empty() { "pass" } else { "fail" });
    r.header(&["check", "value", "threshold", "status"]);
    for c in &checks {
        r.row(vec![c.name.into(), sci(c.value), sci(c.threshold), if c.passed() { "pass" } else { "FAIL" }.into()]);
    }
    r.print();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::new(CliError::VERIFY, format!("verification failed: {}", failed.join(", "))))
    }
}
