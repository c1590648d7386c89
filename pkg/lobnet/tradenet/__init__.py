from lobnet.tradenet.network import (
    ComponentReport,
    TradingNetwork,
    build_network,
    components,
    degrees,
    network_metrics,
    order_sizes,
)
from lobnet.tradenet.profiles import (
    Direction,
    degree_distribution_fits,
    degree_size_correlation,
    knn_profile,
)

__all__ = [
    "TradingNetwork",
    "ComponentReport",
    "build_network",
    "degrees",
    "components",
    "network_metrics",
    "order_sizes",
    "Direction",
    "knn_profile",
    "degree_size_correlation",
    "degree_distribution_fits",
]
