//! From-scratch recurrent classifier: LSTM and GRU cells, forward passes
//! over variable-length sequences, backpropagation through time, Adam,
//! and the sigmoid output layer with its 0.5 decision threshold.

pub mod adam;
pub mod backprop;
pub mod cell;
pub mod math;
pub mod model;
pub mod train;

pub use adam::{adam_update, AdamConfig, AdamState};
pub use backprop::{backward, tensor_names, visit_tensors_mut, BatchSample, Gradients};
pub use cell::{
    gru_forward, gru_step, lstm_forward, lstm_step, run_sequence, CellKind, CellParams, Gate,
    GruParams, GruStep, LstmParams, LstmStep,
};
pub use model::{bce_loss, OutputLayer, RnnModel, MODEL_FORMAT_VERSION};
pub use train::{init_model, train, train_samples, TrainConfig, TrainOutput, TrainSample};
