from lobnet.plfit.bootstrap import gof_pvalue
from lobnet.plfit.estimators import XminChoice, ks_distance, mle_alpha, select_xmin
from lobnet.plfit.fitting import ccdf, classify_scaling_range, fit_powerlaw, levy_regime, summarize_fits
from lobnet.plfit.sampling import rand_powerlaw

__all__ = [
    "XminChoice",
    "mle_alpha",
    "ks_distance",
    "select_xmin",
    "gof_pvalue",
    "rand_powerlaw",
    "classify_scaling_range",
    "fit_powerlaw",
    "levy_regime",
    "ccdf",
    "summarize_fits",
]
