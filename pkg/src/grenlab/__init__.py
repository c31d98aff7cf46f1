"""Grenander estimator laboratory.

Fits the least concave majorant of an empirical CDF, evaluates L_k error
functionals between the estimated and true decreasing density, computes the
limit constants of the associated central limit theorems from first
principles by simulating Brownian argmax processes, and runs seeded Monte
Carlo experiments confronting the limit theorems with finite samples.
"""

from grenlab.densities import (
    DensityFamily,
    MonotoneDensity,
    density_integral,
    make_density,
    sample,
)
from grenlab.grenander import (
    ConcaveMajorant,
    CutoffSpec,
    EmpiricalCDF,
    GrenanderEstimate,
    apply_cutoff,
    eval_fhat,
    fit_lcm,
    inverse_cutoff,
    inverse_un,
    segment_decomposition,
)
from grenlab.distances import (
    ErrorSpec,
    StandardizedStatistic,
    inverse_lk_error,
    lk_error,
    modified_eps_window,
    modified_lk_error,
    segment_gap_check,
    standardize,
)
from grenlab.chernoff import (
    ArgmaxConfig,
    ChernoffEstimates,
    LimitConstants,
    brownian_argmax,
    compute_constants,
    covariance_scale_constant,
    estimate_chernoff,
    scaling_check,
    simulate_V,
)
from grenlab.inverse_process import (
    LocalizedArgmaxSpec,
    dev_scale,
    empirical_inverse_dev,
    moment_profile,
    offset_scale,
    scaled_inverse_dev,
    scaled_vn,
    simulate_inverse_dev,
    simulate_vn,
    vn_E,
)

__version__ = "0.1.0"
