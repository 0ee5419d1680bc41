//! Significance testing: paired Cramér–von Mises permutation tests and
//! Moran's I spatial autocorrelation.

mod cvm;
mod moran;

pub use cvm::{
    cvm_combined, cvm_joint_permutation_test, cvm_permutation_test, cvm_statistic, CvmResult, JointCvmResult,
    MIN_PERMUTATIONS,
};
pub use moran::{morans_i, morans_i_statistic, morans_i_with, MoranResult, MoranWeights};
