//! Dense layers with hand-written backward passes, RMSProp, gradient
//! checking and the checkpoint container. All math is `f64`.

mod checkpoint;
mod conv;
mod dropout;
mod gradcheck;
mod lstm;
mod output;
mod params;
mod pool;
mod rmsprop;
mod tensor;

pub use self::checkpoint::Checkpoint;
pub use self::conv::{conv1d_backward, conv1d_forward, conv_output_len, ConvLayer, ConvOutput};
pub use self::dropout::{dropout, dropout_backward, dropout_seeded};
pub use self::gradcheck::{grad_check, relative_error, BlockError, GradCheckReport, DEFAULT_STEP};
pub use self::lstm::{
    bilstm_backward, bilstm_forward, lstm_backward, lstm_forward, lstm_step, lstm_step_backward, BiLstmOutput,
    LstmCell, LstmSequence, LstmStepCache,
};
pub(crate) use self::lstm::{cell_blocks, cell_blocks_mut};
pub use self::output::{
    dense_backward, dense_forward, dense_softmax, softmax2, weighted_cross_entropy, WeightedLoss, CLASS_B, CLASS_NB,
    PROB_FLOOR,
};
pub use self::params::{ParamVec, Parameters};
pub use self::pool::{maxpool_backward, maxpool_temporal, PoolOutput};
pub use self::rmsprop::RmsProp;
pub use self::tensor::Tensor2;
