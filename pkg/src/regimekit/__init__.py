"""regimekit: volatility-regime detection from monthly realized
covariance matrices, with a synthetic ground-truth harness and a
regime-filtered momentum backtest."""

from .backtest import (
    BacktestError,
    CostParams,
    StrategyResult,
    apply_regime_filter,
    momentum_signal,
    moving_average,
    run_backtest,
    sharpe_ratio,
)
from .cluster import (
    ClusterError,
    ClusterValidation,
    Dendrogram,
    agnes,
    cut,
    dunn_index,
    hopkins,
    label_regimes_cluster,
    manhattan_distance,
    silhouette_values,
    validate_clustering,
)
from .fracdiff import (
    FracDiffError,
    FracDiffSpec,
    estimate_d,
    frac_difference,
    fracdiff_weights,
    partial_window_count,
)
from .market_data import (
    CsvColumns,
    MarketDataError,
    PriceSeries,
    ReturnPanel,
    align_panel,
    load_prices,
    log_returns,
    panel_from_csv,
    panel_to_csv,
)
from .pca import PCAModel, PcaError, fit_pca, standardize
from .pipeline import (
    ClusterDetection,
    TvarDetection,
    VlstarDetection,
    detect_cluster,
    detect_tvar,
    detect_vlstar,
    evaluate_detectors,
    expand_monthly,
    transition_candidates,
)
from .realized_cov import (
    CovarianceError,
    RealizedCovSeries,
    cov_panel,
    metric_panel,
    realized_covariance,
    to_correlation,
    to_metric,
    unvech,
    vech,
    vech_names,
)
from .regimes import CALM, HIGHVOL, RegimeSeries
from .synthetic import (
    ConfusionMatrix,
    SyntheticDataset,
    SyntheticError,
    SyntheticParams,
    generate,
    month_chunks,
    monthly_truth,
    score,
    to_monthly_panel,
)
from .tvar import TvarError, TvarFit, fit_tvar, label_regimes_tvar
from .vlstar import (
    LinearityResult,
    LogisticParams,
    VlstarError,
    VlstarFit,
    fit_vlstar,
    label_regimes,
    linearity_test,
    logistic_g,
    profile_ssr,
    select_transition,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
