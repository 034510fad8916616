//! Exchange cones, scenario ensembles and set-valued portfolios.

mod cone;
mod ensemble;
mod portfolio;

pub use cone::{BidAskMatrix, ExchangeCone2D};
pub use ensemble::ScenarioEnsemble;
pub use portfolio::{PortfolioKind, SegmentVertices, SetPortfolio};
