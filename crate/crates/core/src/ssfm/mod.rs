//! Split-step Fourier reference simulation of dual-polarization WDM
//! transmission (Manakov equation, lumped EDFAs, ideal coherent receiver).

mod campaign;
mod propagate;
mod receiver;
mod signal;

pub use campaign::{
    gn_prediction, run_verification_campaign, simulate, GnPrediction, Profile, VerificationReport, VerificationRow,
};
pub use propagate::{log_step_boundaries, propagate_span, Propagator};
pub use receiver::{receive_all, receive_channel, ChannelEstimate};
pub use signal::{generate_wdm_signal, rrc_response, FieldBuffer, SimulationConfig, TxRecord};
