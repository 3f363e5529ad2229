"""Command-line client for the planning service.

Commands build request models and post them to the FastAPI app, in-process
by default or against a remote server given ``--server``. Exit codes: 0
success, 1 usage or I/O error, 2 planning infeasibility, 3 solver
non-convergence.
"""

from __future__ import annotations

import asyncio
import json
import logging
import sys
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_NOT_CONVERGED = 3

logging.basicConfig(stream=sys.stderr, level=logging.WARNING)


class _ExitCodeGroup(click.Group):
    """Maps click usage errors onto this CLI's exit-code contract."""

    def main(self, *args, **kwargs):
        kwargs.setdefault("standalone_mode", False)
        try:
            return super().main(*args, **kwargs)
        except click.UsageError as exc:
            click.echo(f"error: {exc.format_message()}", err=True)
            sys.exit(EXIT_USAGE)
        except click.ClickException as exc:
            exc.show()
            sys.exit(EXIT_USAGE)
        except click.exceptions.Abort:
            sys.exit(EXIT_USAGE)


@click.group(cls=_ExitCodeGroup)
@click.option("--server", default=None, help="Remote service URL; default runs in-process.")
@click.pass_context
def cli(ctx, server):
    ctx.obj = {"server": server}


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)

    from .app import app

    async def _run():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://graspmotion", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(_run())


def _call(server, path, payload) -> dict:
    try:
        resp = _post(server, path, payload)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach service: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        click.echo(f"error: {detail}", err=True)
        sys.exit(EXIT_USAGE)
    return resp.json()


def _robot_payload(urdf, base_link, tool_link, points_per_link, seed) -> dict:
    return {
        "urdf": urdf,
        "base_link": base_link,
        "tool_link": tool_link,
        "points_per_link": points_per_link,
        "seed": seed,
    }


@cli.command("sdf")
@click.option("--cloud", default=None, help="Scene cloud (.xyz or .ply).")
@click.option("--depth", default=None, help="16-bit PGM depth; sidecar <depth>.cam holds the camera.")
@click.option("--resolution", default=0.05, show_default=True, help="Grid cell edge in meters.")
@click.option("--margin", default=0.3, show_default=True, help="Extent padding in meters.")
@click.option("--out", required=True, help="Output SDF file.")
@click.pass_context
def cmd_sdf(ctx, cloud, depth, resolution, margin, out):
    """Build the signed distance grid of a scene."""
    data = _call(
        ctx.obj["server"],
        "/sdf",
        {"cloud": cloud, "depth": depth, "resolution": resolution, "margin": margin, "out": out},
    )
    dims = "x".join(str(d) for d in data["dims"])
    click.echo(
        f"sdf {dims} min={data['value_min']:.4f} max={data['value_max']:.4f} -> {data['out']}"
    )


@cli.command("ik")
@click.option("--urdf", required=True)
@click.option("--goals", required=True, help="Goal set JSON.")
@click.option(
    "--cost",
    "costs",
    multiple=True,
    type=click.Choice(["pm", "quat", "euler"]),
    help="Goal cost; repeat for an ablation table. Default pm.",
)
@click.option("--report", default=None, help="Write the JSON report here.")
@click.option("--base-link", default=None)
@click.option("--tool-link", default=None)
@click.option("--points-per-link", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_context
def cmd_ik(ctx, urdf, goals, costs, report, base_link, tool_link, points_per_link, seed):
    """Solve IK for every goal and count successes per cost."""
    data = _call(
        ctx.obj["server"],
        "/ik",
        {
            "robot": _robot_payload(urdf, base_link, tool_link, points_per_link, seed),
            "goals": goals,
            "costs": list(costs) or ["pm"],
            "report": report,
        },
    )
    for cost, count in data["success_counts"].items():
        click.echo(f"{cost}: {count}/{data['count']} IK solutions")


def _parse_q0(value: str) -> list[float]:
    path = Path(value)
    if path.is_file():
        return [float(v) for v in path.read_text().replace(",", " ").split()]
    try:
        return [float(v) for v in value.replace(",", " ").split()]
    except ValueError:
        raise click.UsageError(f"cannot parse --q0 value {value!r}") from None


@cli.command("plan")
@click.option("--urdf", required=True)
@click.option("--sdf", required=True, help="SDF file from the sdf command.")
@click.option("--goals", required=True, help="Goal set JSON.")
@click.option("--q0", default=None, help="Start configuration: comma list or a file of numbers.")
@click.option("--config", default=None, help="Planner config JSON file.")
@click.option("--out-traj", required=True, help="Output trajectory CSV.")
@click.option("--out-report", default=None, help="Output planning report JSON.")
@click.option("--base-link", default=None)
@click.option("--tool-link", default=None)
@click.option("--points-per-link", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_context
def cmd_plan(ctx, urdf, sdf, goals, q0, config, out_traj, out_report, base_link, tool_link, points_per_link, seed):
    """Plan a grasping trajectory reaching one goal from the set."""
    config_data = {}
    if config:
        try:
            config_data = json.loads(Path(config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            click.echo(f"error: bad config file {config}: {exc}", err=True)
            sys.exit(EXIT_USAGE)
    data = _call(
        ctx.obj["server"],
        "/plan",
        {
            "robot": _robot_payload(urdf, base_link, tool_link, points_per_link, seed),
            "sdf": sdf,
            "goals": goals,
            "q0": _parse_q0(q0) if q0 else None,
            "config": config_data,
            "out_traj": out_traj,
            "out_report": out_report,
        },
    )
    if data["status"] == "infeasible":
        click.echo(f"no feasible goal: {data['message']}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    click.echo(
        f"goal {data['selected_goal_index']} objective={data['objective']['total']:.6f} "
        f"trans={data['translation_error']:.4f}m rot={data['rotation_error']:.4f}rad "
        f"-> {data['out_traj']}"
    )
    if data["status"] != "converged":
        click.echo("solver did not converge; best trajectory written", err=True)
        sys.exit(EXIT_NOT_CONVERGED)


@cli.command("check")
@click.option("--urdf", required=True)
@click.option("--sdf", required=True)
@click.option("--traj", required=True, help="Trajectory CSV from the plan command.")
@click.option("--base-link", default=None)
@click.option("--tool-link", default=None)
@click.option("--points-per-link", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_context
def cmd_check(ctx, urdf, sdf, traj, base_link, tool_link, points_per_link, seed):
    """Report whether a trajectory collides with the scene."""
    data = _call(
        ctx.obj["server"],
        "/check",
        {
            "robot": _robot_payload(urdf, base_link, tool_link, points_per_link, seed),
            "sdf": sdf,
            "traj": traj,
        },
    )
    verdict = "COLLISION" if data["in_collision"] else "OK"
    click.echo(f"{verdict} {data['worst_negative_count']}")


@cli.command("gen-scene")
@click.option("--kind", required=True, type=click.Choice(["tabletop", "shelf"]))
@click.option("--seed", default=0, show_default=True)
@click.option("--out-cloud", required=True, help="Output XYZ cloud.")
@click.option("--out-goals", required=True, help="Output goal set JSON.")
@click.pass_context
def cmd_gen_scene(ctx, kind, seed, out_cloud, out_goals):
    """Generate a deterministic synthetic scene with a reachable goal set."""
    data = _call(
        ctx.obj["server"],
        "/scenes",
        {"kind": kind, "seed": seed, "out_cloud": out_cloud, "out_goals": out_goals},
    )
    click.echo(
        f"{data['kind']} seed={data['seed']}: {data['num_points']} points, "
        f"{data['num_goals']} goals"
    )


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
def cmd_serve(host, port):
    """Run the planning service."""
    import uvicorn

    uvicorn.run("graspmotion.app:app", host=host, port=port)


def main(argv=None):
    return cli.main(args=argv, prog_name="graspmotion")


if __name__ == "__main__":
    sys.exit(main())
