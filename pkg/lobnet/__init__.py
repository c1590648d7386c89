"""lobnet: order book replay and trading-network analysis for order-flow data."""

__version__ = "0.1.0"
