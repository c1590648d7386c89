from lobnet.cli.main import cli

cli()
