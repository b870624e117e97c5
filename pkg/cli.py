#!/usr/bin/env python3
"""
qprism command line

verify runs the property suites, compute wraps single operations over JSON
files, simpson and descent expose the transports directly. Exit codes: 0 on
success, 1 on a property failure or invariant violation, 2 on usage, schema
and inconclusive outcomes. Errors go to stderr as JSON.
"""

import json
import logging
import sys
from dataclasses import replace
from math import comb
from typing import Any, Dict, Optional

import click
import sympy

from config import configure_logging, get_settings
from crysdict import crys_module_from_json, log_conn
from descent import Cocycle, check_pair, default_pair, descend
from errors import PreconditionViolation, QPrismError, SchemaError
from homcomplex import FreeComplex, Z, Zmod, bockstein_comparison, cohomology, eta, koszul
from laurent import AlgebraDesc
from qconn import QConnModule, QHiggsModule, module_from_json, module_to_json, qde_rham
from simpson import NygaardConfig, pull, push
from strat import ModPConnection, taylor
from suites import SUITE_NAMES, verify as run_verify

LOGGER = logging.getLogger("qprism")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _fail(err: QPrismError, code: int = None) -> None:
    click.echo(json.dumps(err.to_json()), err=True)
    sys.exit(err.exit_code if code is None else code)


def _read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise SchemaError(f"malformed JSON: {e.msg}", {"file": path, "line": e.lineno})
    except OSError as e:
        raise SchemaError(f"cannot read input: {e.strerror}", {"file": path})


def _write_json(data: Dict[str, Any], path: Optional[str]) -> None:
    text = json.dumps(data, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
        LOGGER.info(f"wrote {path}")
    else:
        click.echo(text)


def _guarded(fn):
    """Run fn, mapping library errors and schema problems to exit codes."""
    try:
        return fn()
    except QPrismError as e:
        _fail(e)
    except (KeyError, TypeError, ValueError) as e:
        _fail(SchemaError(f"input does not match the schema: {e}"))


@click.group()
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (default from QPRISM_LOG_LEVEL)")
@click.pass_context
def cli(ctx, log_level):
    """Exact q-connections, Witt vectors, descent and the crystalline dictionary."""
    configure_logging(log_level)
    ctx.ensure_object(dict)
    ctx.obj["settings"] = get_settings()


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


@cli.command("verify")
@click.argument("suite", type=click.Choice(list(SUITE_NAMES) + ["all"]))
@click.option("--p", "p", type=int, default=None, help="prime (default 3)")
@click.option("--N", "N", type=int, default=None, help="p-adic precision (default 4)")
@click.option("--M", "M", type=int, default=None, help="v-adic precision (default 6)")
@click.option("--s", "s", type=int, default=None, help="root level of q (default 1)")
@click.option("--d", "d", type=int, default=None, help="number of framed variables (default 2)")
@click.option("--rank", type=int, default=None, help="module rank (default 2)")
@click.option("--trials", type=int, default=None, help="trials per suite (default 100)")
@click.option("--seed", type=int, default=None, help="base seed (default 0)")
@click.option("--degree-bound", type=int, default=None, help="U-degree bound of searches (default 2)")
@click.option("--pd-trunc", type=int, default=None, help="PD truncation K (default 8)")
@click.option("--json-out", type=click.Path(dir_okay=False), default=None, help="write the report as JSON")
@click.pass_context
def verify_cmd(ctx, suite, json_out, **flags):
    """Run a property suite and report failures."""
    overrides = {k: v for k, v in flags.items() if v is not None}
    settings = replace(ctx.obj["settings"], **overrides)
    if not sympy.isprime(settings.p):
        _fail(PreconditionViolation(f"p={settings.p} is not prime", {"p": settings.p}), EXIT_USAGE)
    if min(settings.N, settings.M, settings.d, settings.rank, settings.trials) < 1 or settings.s < 0:
        _fail(PreconditionViolation("N, M, d, rank and trials must be positive and s non-negative", overrides), EXIT_USAGE)
    report = run_verify(suite, settings)
    table = report.table()
    click.echo(f"{report.suite}: {report.trials} trials, {len(report.failures)} failures, {report.elapsed:.2f}s")
    if not table.empty:
        click.echo(table.to_string(index=False))
    if json_out:
        _write_json(report.to_json(), json_out)
    sys.exit(EXIT_OK if report.ok else EXIT_FAIL)


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------


def _compute_derham(data, radius, pd_trunc):
    module, _ = module_from_json(data)
    if not isinstance(module, QConnModule):
        raise SchemaError("derham needs a q-connection module", {"kind": data.get("kind")})
    C = qde_rham(module, radius)
    return {"module_ranks": [module.rank * comb(module.desc.d, k) for k in range(module.desc.d + 1)],
            "window": radius, "complex": C.to_json(), "cohomology": cohomology(C).to_json()}


def _compute_koszul(data, radius, pd_trunc):
    m = int(data.get("modulus", 0))
    C = koszul(data["endomorphisms"], Zmod(m) if m else Z)
    return {"complex": C.to_json(), "cohomology": cohomology(C).to_json()}


def _compute_leta(data, radius, pd_trunc):
    C = FreeComplex.from_json(data["complex"])
    f = int(data["f"])
    E = eta(C, f)
    ok, lhs, rhs = bockstein_comparison(C, f)
    return {"complex": E.to_json(), "cohomology": cohomology(E).to_json(),
            "bockstein": {"agrees": ok, "eta_mod_f": lhs.to_json(), "bockstein": rhs.to_json()}}


def _compute_cohomology(data, radius, pd_trunc):
    return cohomology(FreeComplex.from_json(data)).to_json()


def _compute_push(data, radius, pd_trunc):
    module, frob = module_from_json(data)
    if not isinstance(module, QHiggsModule):
        raise SchemaError("push needs a q-Higgs module", {"kind": data.get("kind")})
    if frob is None:
        return module_to_json(push(module))
    N, fs = push(module, frob)
    return module_to_json(N, fs)


def _compute_pull(data, radius, pd_trunc):
    module, frob = module_from_json(data)
    if not isinstance(module, QConnModule) or frob is None:
        raise SchemaError("pull needs a q-connection module with a Frobenius structure", {"kind": data.get("kind")})
    cfg = NygaardConfig(b=int(data.get("b", 0)), D=int(data.get("degree_bound", max(radius, module.desc.p))))
    res = pull(module, frob, cfg)
    out = module_to_json(res.higgs, res.frob)
    out["witness"] = res.witness.to_json()
    out["witness_inverse"] = res.witness_inv.to_json()
    return out


def _compute_descend(data, radius, pd_trunc):
    return descend(Cocycle.from_json(data)).to_json()


def _compute_taylor(data, radius, pd_trunc):
    return taylor(ModPConnection.from_json(data), int(data.get("K", pd_trunc))).to_json()


def _compute_logconn(data, radius, pd_trunc):
    return log_conn(crys_module_from_json(data)).to_json()


COMPUTE = {
    "derham": _compute_derham,
    "koszul": _compute_koszul,
    "leta": _compute_leta,
    "cohomology": _compute_cohomology,
    "push": _compute_push,
    "pull": _compute_pull,
    "descend": _compute_descend,
    "taylor": _compute_taylor,
    "logconn": _compute_logconn,
}


@cli.command("compute")
@click.argument("sub", type=click.Choice(list(COMPUTE)))
@click.option("--in", "in_path", required=True, type=click.Path(dir_okay=False), help="input JSON")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False), help="output JSON (default stdout)")
@click.option("--window", type=int, default=None, help="monomial window half-width (default QPRISM_WINDOW)")
@click.option("--pd-trunc", type=int, default=None, help="PD truncation K for taylor")
@click.pass_context
def compute_cmd(ctx, sub, in_path, out_path, window, pd_trunc):
    """Run one operation on a JSON input."""
    settings = ctx.obj["settings"]
    radius = settings.window if window is None else window
    K = settings.pd_trunc if pd_trunc is None else pd_trunc
    result = _guarded(lambda: COMPUTE[sub](_read_json(in_path), radius, K))
    _write_json(result, out_path)


# ---------------------------------------------------------------------------
# simpson / descent
# ---------------------------------------------------------------------------


@cli.group("simpson")
def simpson_group():
    """q-Simpson transport between q-Higgs modules and q-connections."""


@simpson_group.command("push")
@click.option("--in", "in_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def simpson_push(in_path, out_path):
    """F^* of a q-Higgs module (with its Frobenius structure, if any)."""
    _write_json(_guarded(lambda: _compute_push(_read_json(in_path), 0, 0)), out_path)


@simpson_group.command("pull")
@click.option("--in", "in_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.option("--b", "b", type=int, default=0, help="exponent b of the Nygaard-style lattice")
@click.option("--degree-bound", type=int, default=None, help="U-degree bound of the basis search")
@click.pass_context
def simpson_pull(ctx, in_path, out_path, b, degree_bound):
    """Higgs module of a q-connection with Frobenius structure, plus the iso witness."""

    def run():
        data = _read_json(in_path)
        data["b"] = b
        if degree_bound is not None:
            data["degree_bound"] = degree_bound
        return _compute_pull(data, ctx.obj["settings"].degree_bound, 0)

    _write_json(_guarded(run), out_path)


@cli.group("descent")
def descent_group():
    """Successive approximation of 1-cocycles."""


PAIR_NAMES = ("xi1", "mu")


@descent_group.command("run")
@click.option("--in", "in_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.option("--c0", type=click.Choice(PAIR_NAMES), default=None, help="c0 (default from the input, else xi1)")
@click.option("--c1", type=click.Choice(PAIR_NAMES), default=None, help="c1 (default from the input, else mu)")
@click.option("--max-steps", type=int, default=None)
def descent_run(in_path, out_path, c0, c1, max_steps):
    """Descend a cocycle; reports X, the descended cocycle and the precision ideal."""

    def run():
        data = _read_json(in_path)
        named = dict(zip(PAIR_NAMES, default_pair(AlgebraDesc.from_json(data["desc"]).params)))
        c = Cocycle.from_json(data, named.get(c0), named.get(c1))
        if not check_pair(c.c0, c.c1):
            raise PreconditionViolation("(c0, c1) is not an admissible pair", {"c0": c0, "c1": c1})
        return descend(c, max_steps).to_json()

    _write_json(_guarded(run), out_path)


if __name__ == "__main__":
    cli()
