use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::architecture::{compile, ArchitectureSpec, ParamVector};
use crate::mcg::{evaluate, ValidGraph};
use crate::morphology::BinaryImage;

use super::{SamplePair, TrainError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// Fraction of the frame where output and target differ.
    Absolute,
    /// One minus intersection over union; 0 when both are empty.
    #[default]
    Iou,
}

fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Loss of an already computed output against its target.
///
/// # Panics
///
/// If the frames differ.
pub fn pair_loss(out: &BinaryImage, target: &BinaryImage, loss: Loss) -> BigRational {
    match loss {
        Loss::Absolute => ratio(out.count_xor(target), out.area()),
        Loss::Iou => {
            let union = out.count_or(target);
            if union == 0 {
                BigRational::zero()
            } else {
                ratio(union - out.count_and(target), union)
            }
        }
    }
}

fn checked(x: &BinaryImage, y: &BinaryImage) -> Result<(), TrainError> {
    if x.same_frame(y) {
        Ok(())
    } else {
        Err(TrainError::FrameMismatch(x.width(), x.height(), y.width(), y.height()))
    }
}

pub fn loss_absolute(x: &BinaryImage, y: &BinaryImage, g: &ValidGraph) -> Result<BigRational, TrainError> {
    checked(x, y)?;
    Ok(pair_loss(&evaluate(g, x), y, Loss::Absolute))
}

pub fn loss_iou(x: &BinaryImage, y: &BinaryImage, g: &ValidGraph) -> Result<BigRational, TrainError> {
    checked(x, y)?;
    Ok(pair_loss(&evaluate(g, x), y, Loss::Iou))
}

/// Mean of the per-pair losses of the operator given by `params`.
pub fn mean_loss(
    params: &ParamVector,
    arch: &ArchitectureSpec,
    sample: &[SamplePair],
    loss: Loss,
) -> Result<BigRational, TrainError> {
    if sample.is_empty() {
        return Err(TrainError::EmptySample);
    }
    let g = compile(arch, params)?.graph;
    let mut sum = BigRational::zero();
    for p in sample {
        checked(&p.input, &p.target)?;
        sum += pair_loss(&evaluate(&g, &p.input), &p.target, loss);
    }
    Ok(sum / BigRational::from_integer(sample.len().into()))
}
