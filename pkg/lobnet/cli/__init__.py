from lobnet.cli.main import cli

__all__ = ["cli"]
