"""maskcov: masked sample covariance estimation.

Estimate a covariance matrix through a fixed symmetric mask, evaluate
explicit-constant error bounds and sample-complexity formulas for the
estimator, and verify the matrix inequalities behind them by seeded
Monte Carlo simulation.
"""

__version__ = "0.1.0"

from .matrix_core import (  # noqa: F401
    SymMatrix,
    schur_product,
    spectral_norm,
    schatten_norm,
    one_to_two_norm,
    max_norm,
    gershgorin_column_bound,
    is_psd,
    psd_order_leq,
    psd_sqrt,
)
from .masks import (  # noqa: F401
    Mask,
    MaskComplexity,
    banded_mask,
    all_ones_mask,
    tapered_mask,
    mask_complexity,
    load_mask,
)
from .models import (  # noqa: F401
    CovarianceSpec,
    DistributionSpec,
    SampleSet,
    ConcentrationParams,
    materialize,
    draw_samples,
    center_samples,
    gaussian_mu,
    gaussian_nu,
    empirical_mu,
    empirical_nu,
)
from .estimator import (  # noqa: F401
    ErrorDecomposition,
    sample_covariance,
    masked_estimator,
    decompose_error,
    relative_spectral_error,
)
from .bounds import (  # noqa: F401
    BoundReport,
    main_bound,
    expected_max_bound,
    gaussian_bound,
    sample_complexity_masked,
    sample_complexity_banded,
    sample_complexity_lv,
    sample_complexity_classical,
    banded_bias_bound,
    moment_bound_psd,
    moment_bound_selfadj,
    khintchine_rhs,
)
from .experiments import (  # noqa: F401
    ExperimentConfig,
    ExperimentResult,
    run_variance_experiment,
    scaling_study,
)
