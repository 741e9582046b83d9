//! Bit-level inference cost model.
//!
//! Additions and subtractions of an `a`-bit and a `b`-bit operand cost
//! `min(a, b)`; multiplications and divisions cost `a * b` (shift and add).
//! Inputs, outputs and readout weights are 32 bits wide, CA cells
//! `ceil(log2 m)` bits.

use std::fmt;

use crate::error::{Error, Result};
use crate::modring::Modulus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn op_cost(op: Op, a_bits: u64, b_bits: u64) -> Result<u64> {
    if a_bits == 0 || b_bits == 0 {
        return Err(Error::InvalidConfig("operand widths must be positive".into()));
    }
    Ok(match op {
        Op::Add | Op::Sub => a_bits.min(b_bits),
        Op::Mul | Op::Div => a_bits * b_bits,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostModel {
    pub input_bits: u64,
    pub output_bits: u64,
    pub state_bits: u64,
    pub ca_bits: u64,
}

impl CostModel {
    pub fn new(m: u32) -> Result<Self> {
        Ok(CostModel {
            input_bits: 32,
            output_bits: 32,
            state_bits: 32,
            ca_bits: Modulus::new(m)?.bits() as u64,
        })
    }
}

/// Cost of one inference step, split by stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostBreakdown {
    /// Scaling the input before quantization.
    pub input_scaling: u64,
    /// Multiplies and adds of the CA updates over all iterations.
    pub ca_update: u64,
    /// Weight times cell products of the readout.
    pub readout_mul: u64,
    /// Readout accumulation including the bias.
    pub readout_acc: u64,
    /// Raw input weight and its accumulation.
    pub skip: u64,
}

impl CostBreakdown {
    pub fn total(&self) -> u64 {
        self.input_scaling + self.ca_update + self.readout_mul + self.readout_acc + self.skip
    }
}

impl fmt::Display for CostBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "input scaling  {}", self.input_scaling)?;
        writeln!(f, "ca update      {}", self.ca_update)?;
        writeln!(f, "readout mul    {}", self.readout_mul)?;
        writeln!(f, "readout acc    {}", self.readout_acc)?;
        writeln!(f, "skip           {}", self.skip)?;
        write!(f, "total          {}", self.total())
    }
}

/// Cost of a reservoir with `cells` cells, `iterations` CA steps per input and
/// `nnz` nonzero rule coefficients.
pub fn relica_breakdown(
    m: u32,
    cells: u64,
    iterations: u64,
    nnz: u64,
    skip: bool,
) -> Result<CostBreakdown> {
    if cells == 0 || iterations == 0 || nnz == 0 {
        return Err(Error::InvalidConfig(
            "cells, iterations and nonzero coefficients must be positive".into(),
        ));
    }
    let c = CostModel::new(m)?;
    let b = c.ca_bits;
    let features = cells * iterations;
    let per_cell = nnz * op_cost(Op::Mul, b, b)? + (nnz - 1) * op_cost(Op::Add, b, b)?;
    Ok(CostBreakdown {
        input_scaling: op_cost(Op::Mul, c.input_bits, c.input_bits)?,
        ca_update: features * per_cell,
        readout_mul: features * op_cost(Op::Mul, b, c.state_bits)?,
        readout_acc: (features + 1) * op_cost(Op::Add, c.state_bits, c.output_bits)?,
        skip: if skip {
            op_cost(Op::Mul, c.input_bits, c.state_bits)?
                + op_cost(Op::Add, c.state_bits, c.output_bits)?
        } else {
            0
        },
    })
}

pub fn relica_cost(m: u32, cells: u64, iterations: u64, nnz: u64, skip: bool) -> Result<u64> {
    Ok(relica_breakdown(m, cells, iterations, nnz, skip)?.total())
}

/// A linear regression over `inputs` values: one multiply and one
/// accumulation per input, the bias add included.
pub fn linear_cost(inputs: u64) -> Result<u64> {
    if inputs == 0 {
        return Err(Error::InvalidConfig("a linear model needs at least one input".into()));
    }
    Ok(inputs * op_cost(Op::Mul, 32, 32)? + inputs * op_cost(Op::Add, 32, 32)?)
}
