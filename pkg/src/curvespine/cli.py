"""Command line interface.

Exit codes: 0 success, 2 parse or input error, 3 genericity failure,
4 audit or check failure, 5 resource bound exceeded.
"""

from __future__ import annotations

import functools
import os
import sys

import click

from . import algebra, fiber0, flow, invariants, resolution
from .parser import ParseError, parse_poly
from .report import (canonical_json, emit_csv, emit_dot, emit_report,
                     emit_svg, fiber_section, flow_section,
                     resolution_section, unique_checks)

EXIT_OK, EXIT_PARSE, EXIT_GENERIC, EXIT_CHECK, EXIT_RESOURCE = 0, 2, 3, 4, 5

_EXIT_FOR = (
    ((ParseError, resolution.ZeroPolynomial, resolution.NotSingularAtOrigin,
      invariants.NonReducedInput), EXIT_PARSE),
    ((resolution.GenericityFailure, flow.DegenerateMetric), EXIT_GENERIC),
    ((algebra.ExtensionDegreeExceeded, resolution.ResolutionError,
      flow.StepLimit, flow.EscapedBall, flow.TraceDivergence), EXIT_RESOURCE),
    ((AssertionError, ArithmeticError), EXIT_CHECK),
)


def _exit_code(exc):
    for kinds, code in _EXIT_FOR:
        if isinstance(exc, kinds):
            return code
    return None


def _seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("CURVE_SPINE_SEED")
    return int(env) if env not in (None, "") else 0


def common(fn):
    """Options shared by every subcommand."""
    opts = [
        click.argument("poly", required=False),
        click.option("--file", "file_", type=click.Path(exists=True),
                     help="Read the polynomial from a file."),
        click.option("--pol/--min", "pol", default=True,
                     help="Resolve with a generic polar (default) or minimally."),
        click.option("--seed", type=int, default=None,
                     help="Seed for every random choice (env CURVE_SPINE_SEED)."),
        click.option("--max-ext-degree", type=int, default=64,
                     help="Bound on the degree of algebraic extensions."),
        click.option("--tol", type=float, default=None,
                     help="Relative tolerance of the ODE integrator."),
        click.option("--out", type=click.Path(), default=None,
                     help="Write JSON here instead of stdout."),
        click.option("--dot", type=click.Path(), default=None,
                     help="Write the dual graph as DOT."),
        click.option("--svg", type=click.Path(), default=None,
                     help="Write a field/spine plot as SVG."),
        click.option("--csv", type=click.Path(), default=None,
                     help="Write sampled trajectories as CSV."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)

    @functools.wraps(fn)
    def wrapper(poly, file_, pol, seed, max_ext_degree, tol, out, dot, svg,
                csv, **kw):
        if file_:
            with open(file_) as fh:
                poly = fh.read().strip()
        if not poly:
            click.echo("error: no polynomial given", err=True)
            sys.exit(EXIT_PARSE)
        ctx = {"text": poly, "pol": pol, "seed": _seed(seed),
               "max_ext_degree": max_ext_degree,
               "cfg": flow.FlowConfig(**({"ode_rel_tol": tol} if tol else {}),
                                      seed=_seed(seed)),
               "out": out, "dot": dot, "svg": svg, "csv": csv}
        try:
            ctx["f"] = parse_poly(poly)
            doc, failed = fn(ctx, **kw)
        except Exception as exc:           # mapped to documented exit codes
            code = _exit_code(exc)
            if code is None:
                raise
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(code)
        text = canonical_json(doc) + "\n" if not isinstance(doc, str) else doc
        if out:
            with open(out, "w") as fh:
                fh.write(text)
        else:
            click.echo(text, nl=False)
        sys.exit(EXIT_CHECK if failed else EXIT_OK)
    return wrapper


def _analyze(ctx):
    return invariants.analyze(ctx["f"], seed=ctx["seed"],
                              max_ext_degree=ctx["max_ext_degree"])


def _write(path, text):
    if path:
        with open(path, "w") as fh:
            fh.write(text)


def _side_outputs(ctx, graph, table=None, runs=None, spine=None):
    _write(ctx["dot"], emit_dot(graph, table) if ctx["dot"] else "")
    if ctx["svg"]:
        f = runs[-1].f if runs else ctx["f"]
        _write(ctx["svg"], emit_svg(flow.sample_field(f), spine))
    _write_csv(ctx, runs[-1].f if runs else ctx["f"])


def _write_csv(ctx, f):
    # 20 trajectories from the fiber f = 1e-3
    if ctx["csv"]:
        pts = flow.fiber_points(f, 1e-3, 20, seed=ctx["seed"])
        trs = [flow.trace_to_curve(f, p, ctx["cfg"]) for p in pts]
        _write(ctx["csv"], emit_csv(trs))


def _failed(checks):
    return any(not c.passed for c in checks)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Resolution graphs, Milnor fiber combinatorics and gradient spines of
    plane curve singularities."""


@main.command("resolve")
@common
def resolve_cmd(ctx):
    """Embedded resolution and its dual graph."""
    if ctx["pol"]:
        g = resolution.resolve_pol(ctx["f"], seed=ctx["seed"],
                                   max_ext_degree=ctx["max_ext_degree"])
    else:
        g = resolution.resolve_min(ctx["f"], ctx["max_ext_degree"])
    _side_outputs(ctx, g)
    return {"schema_version": "1", "resolution": resolution_section(g)}, False


@main.command("invariants")
@common
def invariants_cmd(ctx):
    """Invariant table and its consistency checks."""
    t = _analyze(ctx)
    _side_outputs(ctx, t.graph, t)
    checks = unique_checks(t.checks)
    return {"schema_version": "1", "resolution": resolution_section(t.graph, t),
            "mu": t.mu, "checks": [c.as_dict() for c in checks]}, \
        _failed(checks)


@main.command("fiber")
@common
def fiber_cmd(ctx):
    """Radius-zero fiber pieces, corners, Petri dishes and spine census."""
    t = _analyze(ctx)
    m = fiber0.fiber_model(t.graph, t)
    _side_outputs(ctx, t.graph, t)
    return {"schema_version": "1", "fiber": fiber_section(m), "mu": t.mu,
            "checks": [c.as_dict() for c in unique_checks(m.checks)]}, \
        _failed(m.checks)


@main.command("flow-criticals")
@common
def flow_criticals_cmd(ctx):
    """Critical points of the D_0 potential (with one coordinate retry)."""
    runs = flow.morse_workflow(ctx["f"], ctx["cfg"], seed=ctx["seed"])
    _, _, tang = resolution.tangent_cone(runs[-1].f)
    sec = flow_section(runs, tang)
    if ctx["svg"]:
        _write(ctx["svg"], emit_svg(flow.sample_field(runs[-1].f)))
    _write_csv(ctx, runs[-1].f)
    return {"schema_version": "1", "flow": sec}, not sec["index_check"]["pass"]


@main.command("spine")
@common
@click.option("--theta", type=float, default=1.0, show_default=True,
              help="Angle of the fiber, in radians.")
def spine_cmd(ctx, theta):
    """Numerically traced spine of the invariant fiber at angle theta."""
    table, runs, spine = flow.spine_workflow(ctx["f"], theta, ctx["cfg"],
                                             seed=ctx["seed"])
    _, _, tang = resolution.tangent_cone(runs[-1].f)
    _side_outputs(ctx, table.graph, table, runs, spine)
    sec = flow_section(runs, tang, spine)
    sec["spine"]["edges"] = [e.as_dict() for e in spine.edges]
    checks = unique_checks(spine.checks)
    return {"schema_version": "1", "flow": sec, "mu": table.mu,
            "checks": [c.as_dict() for c in checks]}, _failed(checks)


@main.command("report")
@common
@click.option("--theta", type=float, default=1.0, show_default=True)
@click.option("--no-flow", is_flag=True, help="Skip the numerical stages.")
def report_cmd(ctx, theta, no_flow):
    """Full JSON report of all stages."""
    fl = None
    f = ctx["f"]
    if no_flow:
        table = _analyze(ctx)
        runs = spine = None
    else:
        table, runs, spine = flow.spine_workflow(f, theta, ctx["cfg"],
                                                 seed=ctx["seed"])
        _, _, tang = resolution.tangent_cone(runs[-1].f)
        fl = {"runs": runs, "t": tang, "spine": spine}
    model = fiber0.fiber_model(table.graph, table)
    text = emit_report(ctx["text"], f, ctx["seed"], table, model, fl,
                       ctx["max_ext_degree"])
    _side_outputs(ctx, table.graph, table, runs, spine)
    failed = '"pass": false' in text
    return text, failed


if __name__ == "__main__":   # pragma: no cover
    main()
