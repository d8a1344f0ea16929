//! Ramsey-type extraction, the blowup hard instance audit and a sampling
//! tester for pattern freeness.

pub mod cograph;
pub mod hard_instance;
pub mod tester;

pub use cograph::{
    clique_or_is_from_cograph, clique_or_is_in_graph, extract_cograph, CographCertificate, CographConfig, CographStep,
    Cotree, DenseSide, SetKind,
};
pub use hard_instance::{build_hard_instance, HardInstanceAudit, RamseyMethod};
pub use tester::{
    count_labelled_copies, desk_query_budget, test_h_freeness, triangle_far_certificate, FarCertificate, Host, Pattern,
    TesterConfig, TesterReport, TrialVerdict,
};
