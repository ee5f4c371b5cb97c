//! t-SNE embeddings and plot export.

mod export;
mod tsne;

pub use export::{
    embedding_csv, embedding_svg, parse_embedding_csv, roc_svg, two_sample_probe_auc, PointTag,
    RocLine, ROC_ZOOM,
};
pub use tsne::{
    conditional_probabilities, joint_probabilities, kl_divergence, tsne_embed, TsneConfig,
    TsneResult, ENTROPY_TOL,
};
