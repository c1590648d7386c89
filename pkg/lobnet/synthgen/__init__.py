from lobnet.synthgen.generator import generate_day, generate_days, next_trading_date

__all__ = ["generate_day", "generate_days", "next_trading_date"]
