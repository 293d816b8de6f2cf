import json

import typer

from divconst.config_utils import ConfigYMLPathNotSetError

app = typer.Typer(help="Run ledger CLI: estimates recorded by divconst-cli estimate")


def _ledger():
    from divconst.db_utils.database import RunLedger

    try:
        return RunLedger()
    except ConfigYMLPathNotSetError as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(2)


@app.command("list")
def list_runs():
    """
    List all recorded estimate runs.

    Example usage:
    runs-cli list
    """
    runs = _ledger().list_runs()
    typer.echo("id | constant | budget | lo | hi | finished_at")
    for run in runs:
        typer.echo(
            f"{run['id']} | {run['constant']} | {run['budget']} | {run['lo']} | {run['hi']} | {run['finished_at']}"
        )


@app.command("show")
def show_run(run_id: int):
    """
    Print one recorded run as JSON.

    Example usage:
    runs-cli show 1
    """
    run = _ledger().get(run_id)
    if run is None:
        typer.echo(f"error: no run with id {run_id}", err=True)
        raise typer.Exit(2)
    typer.echo(json.dumps(run, indent=2))
