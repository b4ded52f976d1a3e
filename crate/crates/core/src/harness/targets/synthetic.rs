use super::super::{InputDomain, ParamSpec, ParamValue, ShapeBounds, Target, TargetInput};
use super::{Block, ByteTarget, Probed, Tracer};

// -------------------------------------------------------------------- parity

const PA_CHECK: u8 = 0;
const PA_SCAN: u8 = 1;
const PA_PAIRS: u8 = 2;

static PARITY_BLOCKS: &[Block] = &[
    Block::new("parity.check", 1),
    Block::new("parity.scan", 1),
    Block::new("parity.pairs", 1),
];

/// Linear scan when the first byte is even, all-pairs loop when it is odd.
fn parity(data: &[u8], t: &mut Tracer) -> Probed {
    t.hit(PA_CHECK)?;
    let n = data.len();
    if data[0] % 2 == 0 {
        for _ in 0..n {
            t.hit(PA_SCAN)?;
        }
    } else {
        for _ in 0..n {
            for _ in 0..n {
                t.hit(PA_PAIRS)?;
            }
        }
    }
    Ok(())
}

pub const PARITY: ByteTarget = ByteTarget {
    name: "parity",
    tag: 11,
    blocks: PARITY_BLOCKS,
    min_len: 1,
    max_len: 64,
    run: parity,
};

// -------------------------------------------------------- tolerance solver

const TS_SETUP: u8 = 0;
const TS_NEWTON_ITER: u8 = 1;
const TS_NEWTON_GRAD: u8 = 2;
const TS_NEWTON_CHECK: u8 = 3;
const TS_NEWTON_CONVERGED: u8 = 4;
const TS_LBFGS_ITER: u8 = 5;
const TS_LBFGS_GRAD: u8 = 6;
const TS_SAGA_EPOCH: u8 = 7;
const TS_SAGA_UPDATE: u8 = 8;
const TS_DONE: u8 = 9;

static SOLVER_BLOCKS: &[Block] = &[
    Block::new("solver.setup", 2),
    Block::new("newton.iter", 1),
    Block::new("newton.grad", 1),
    Block::new("newton.if_max_absgrad_lt_tol", 1),
    Block::new("newton.converged", 1),
    Block::new("lbfgs.iter", 1),
    Block::new("lbfgs.grad", 1),
    Block::new("saga.epoch", 1),
    Block::new("saga.update", 1),
    Block::new("solver.done", 1),
];

/// A toy iterative solver over a `samples × features` problem.
///
/// `newton` stops once the gradient magnitude drops strictly below `tol`, so
/// `tol = 0` never converges early and always runs `max_iter` passes. `lbfgs`
/// runs a fixed number of passes; `saga` does one epoch per sample.
pub struct ToleranceSolver;

impl Target for ToleranceSolver {
    fn name(&self) -> &str {
        "tolsolver"
    }

    fn tag(&self) -> u16 {
        12
    }

    fn blocks(&self) -> &'static [Block] {
        SOLVER_BLOCKS
    }

    fn domain(&self) -> InputDomain {
        InputDomain::Params {
            params: vec![
                ParamSpec::categorical("solver", &["lbfgs", "newton", "saga"]),
                ParamSpec::real("tol", 0.0, 0.1),
                ParamSpec::int("max_iter", 20, 60),
            ],
            shape: Some(ShapeBounds { samples: (1, 16), features: (1, 8) }),
            size_field: None,
        }
    }

    fn execute(&self, input: &TargetInput, t: &mut Tracer) -> Probed {
        let rec = input.as_params().expect("solver takes a parameter record");
        let shape = rec.shape.expect("solver input needs a data shape");
        let size = (shape.samples * shape.features) as usize;
        let solver = match rec.values.get("solver") {
            Some(ParamValue::Cat(s)) => s.as_str(),
            _ => "lbfgs",
        };
        let tol = match rec.values.get("tol") {
            Some(ParamValue::Real(v)) => *v,
            _ => 0.0,
        };
        let max_iter = match rec.values.get("max_iter") {
            Some(ParamValue::Int(v)) => *v as usize,
            _ => 20,
        };
        t.hit(TS_SETUP)?;
        match solver {
            "newton" => {
                let mut grad = 1.0f64;
                for _ in 0..max_iter {
                    t.hit(TS_NEWTON_ITER)?;
                    for _ in 0..size {
                        t.hit(TS_NEWTON_GRAD)?;
                    }
                    grad *= 0.25;
                    t.hit(TS_NEWTON_CHECK)?;
                    if grad < tol {
                        t.hit(TS_NEWTON_CONVERGED)?;
                        break;
                    }
                }
            }
            "saga" => {
                for _ in 0..shape.samples {
                    t.hit(TS_SAGA_EPOCH)?;
                    for _ in 0..size {
                        t.hit(TS_SAGA_UPDATE)?;
                    }
                }
            }
            _ => {
                for _ in 0..5 {
                    t.hit(TS_LBFGS_ITER)?;
                    for _ in 0..size {
                        t.hit(TS_LBFGS_GRAD)?;
                    }
                }
            }
        }
        t.hit(TS_DONE)
    }
}
