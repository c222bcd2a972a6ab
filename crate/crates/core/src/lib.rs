//! Fairness-constrained income-distribution toolkit.
//!
//! * [`allocation`]: income allocations, level histograms, exact and
//!   Stirling multiplicities.
//! * [`maxent`]: maximum-multiplicity distributions by enumeration and by the
//!   continuous Boltzmann-Gibbs solution.
//! * [`models`]: exponential and Pareto densities, closed-form and numerical
//!   Gini coefficients, Lorenz curves.
//! * [`stats`]: moments, Jarque-Bera, histograms and the two-sigma alarm level.
//! * [`sim`]: fair-exchange and rich-get-richer simulators, Hill estimator.
//! * [`panel`]: country Gini panels and per-year reports.

pub mod allocation;
pub mod maxent;
pub mod models;
pub mod output;
pub mod panel;
pub mod quadrature;
pub mod sim;
pub mod stats;

pub use allocation::{
    log_multiplicity, log_multiplicity_stirling, multiplicity, validate_allocation,
    AllocationError, DiscreteIncomeDistribution, IncomeAllocation, MultiplicityResult,
};
pub use maxent::{
    argmax_multiplicity, enumerate_distributions, solve_boltzmann, BoltzmannParams,
    BoltzmannSolution, EnumerationOptions, EnumerationResult, IncomeConstraint, MaxentError,
    NewtonOptions,
};
pub use models::{
    empirical_gini, gini_exponential, gini_from_lorenz, gini_numeric, gini_numeric_model,
    gini_pareto, lorenz_curve, ExponentialModel, GiniEstimate, IncomeDensity, LorenzSource,
    ModelError, ParetoModel, UniformModel,
};
pub use panel::{
    ingest_csv, ingest_reader, year_report, GiniPanel, GiniRecord, PanelError, ReportOptions,
    Units, YearReport,
};
pub use sim::{
    hill_tail_exponent, run_fair_exchange, run_rich_get_richer, Regime, SimConfig, SimError,
    SimRun, SimSnapshot,
};
pub use stats::{alarm_level, histogram, jarque_bera, summary, AlarmResult, JbResult, StatsError, SummaryStats};
