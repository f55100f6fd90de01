#!/usr/bin/env python3
"""
dimer-mirror: command-line front end.

Every command builds a ``Report`` and prints it as text or JSON. Both forms
are deterministic and can be read back with ``dimer-mirror reparse``.
"""

import json
import logging
import re
import sys
import time

import click

from backend.models import CheckResult, Report
from dimer import check_geometric_consistency, load_dimer, serialize_dimer
from disks import (
    adjacent_identity_pairs,
    deformed_mirror_object,
    deformed_potential,
    deformed_superpotential,
    enumerate_midpoint_polygons,
    identity_shift_check,
    oracle_checks,
    polygon_dump,
    sign_law_check,
)
from errors import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, DimerMirrorError, exit_code_for
from jacobi import (
    default_length_cap,
    ideal_membership_truncated,
    normal_form,
    quasi_flat_check_truncated,
)
from mirror import centrality_check, classical_mirror_object, classical_potential, classical_superpotential, dual_dimer
from ncpoly import NCPoly, cyclic_derivative, mul, parse_ncpoly
from settings import get_settings, setup_logging

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Report text format
# ---------------------------------------------------------------------------

def render_text(report):
    lines = [
        f"command: {report.command}",
        f"status: {report.status}",
    ]
    if report.dimer is not None:
        lines.append(f"dimer: {report.dimer}")
    if report.order is not None:
        lines.append(f"order: {report.order}")
    for key, value in report.sections.items():
        if isinstance(value, list) and not value:
            lines.append(f"{key}[]")
        elif isinstance(value, list):
            lines.extend(f"{key}[] = {item}" for item in value)
        else:
            lines.append(f"{key} = {value}")
    for check in report.checks:
        lines.append(f"check {check.name} = {'PASS' if check.passed else 'FAIL'} | {check.detail}")
    for key, seconds in report.timing.items():
        lines.append(f"time {key} = {seconds:.3f}")
    return "\n".join(lines) + "\n"


def parse_text(text):
    header, sections, checks, timing = {}, {}, [], {}
    for line in text.splitlines():
        if not line.strip():
            continue
        if " = " not in line and line.endswith("[]"):
            sections[line[:-2]] = []
            continue
        if " = " not in line:
            key, _, value = line.partition(": ")
            header[key] = value
            continue
        key, _, value = line.partition(" = ")
        if key.startswith("check "):
            verdict, _, detail = value.partition(" | ")
            checks.append(CheckResult(name=key[6:], passed=verdict == "PASS", detail=detail))
        elif key.startswith("time "):
            timing[key[5:]] = float(value)
        elif key.endswith("[]"):
            sections.setdefault(key[:-2], []).append(value)
        else:
            sections[key] = value
    return Report(
        command=header.get("command", ""),
        status=header.get("status", "ok"),
        dimer=header.get("dimer"),
        order=int(header["order"]) if "order" in header else None,
        sections=sections,
        checks=checks,
        timing=timing,
    )


def parse_report(text):
    """Read a report in either output format."""
    if text.lstrip().startswith("{"):
        return Report.model_validate_json(text)
    return parse_text(text)


def render(report, fmt):
    if fmt == "json":
        return report.model_dump_json(indent=2) + "\n"
    return render_text(report)


# ---------------------------------------------------------------------------
# Report builders (shared with the HTTP API)
# ---------------------------------------------------------------------------

def _finish(report):
    if report.status == "ok" and report.failed_checks():
        report.status = "violation"
    return report


def parse_identity_locations(values):
    """``["L1=a2", "2=b1:L"]`` -> {0: "a2", 1: "b1:L"}."""
    out = {}
    for value in values or ():
        key, sep, arc = value.partition("=")
        if not sep:
            raise click.BadParameter(f"expected path=arc, got {value!r}", param_hint="--id-loc")
        match = re.fullmatch(r"L?(\d+)", key.strip())
        if match is None or int(match.group(1)) < 1:
            raise click.BadParameter(f"expected L<n>=arc with n >= 1, got {value!r}", param_hint="--id-loc")
        out[int(match.group(1)) - 1] = arc
    return out


def build_validate_report(source, depth=8):
    d = load_dimer(source)
    verdict = check_geometric_consistency(d, depth)
    return Report(command="validate", dimer=d.name, sections={
        "punctures": len(d.punctures),
        "arcs": len(d.arcs),
        "faces": len(d.faces),
        "genus": d.genus,
        "zigzag_paths": len(d.zigzag_paths),
        "consistency": verdict.status,
        "consistency_depth": verdict.depth,
        "digest": d.digest,
    })


def build_zigzag_report(source):
    d = load_dimer(source)
    rows = []
    for idx, path in enumerate(d.zigzag_paths, 1):
        arc, turn = path.identity_step
        translation = ",".join(str(x) for x in d.deck_translation(path.arcs))
        rows.append(f"L{idx}: {path.word()} | identity {arc}:{turn} | translation ({translation})")
    return Report(command="zigzag", dimer=d.name, sections={"zigzag": rows})


def build_dual_report(source):
    d = load_dimer(source)
    dq = dual_dimer(d)
    return Report(command="dual", dimer=d.name, sections={
        "genus": dq.genus,
        "mirror": serialize_dimer(dq).splitlines(),
    })


def build_superpotential_report(source):
    d = load_dimer(source)
    dq = dual_dimer(d)
    return Report(command="superpotential", dimer=d.name, sections={
        "W": classical_superpotential(dq).serialize(),
        "l": classical_potential(dq).serialize(),
    })


def build_jacobi_report(source, element, length_cap=None):
    d = load_dimer(source)
    dq = dual_dimer(d)
    x = parse_ncpoly(element, dq.quiver)
    reduced = normal_form(x, dq, length_cap)
    return Report(command="jacobi", dimer=d.name, sections={
        "input": x.serialize(),
        "normal_form": reduced.serialize(),
    })


def build_deform_report(source, order, identities=None):
    d = load_dimer(source)
    dq = dual_dimer(d)
    w = deformed_superpotential(d, order, dq)
    ell = deformed_potential(d, order, identities, dq)
    sections = {"W_q": w.serialize(), "l_q": ell.serialize()}
    for arc in dq.arc_ids():
        sections[f"R[{arc}]"] = cyclic_derivative(w, arc).serialize()
    report = Report(command="deform", dimer=d.name, order=order, sections=sections)
    for idx, path in enumerate(d.zigzag_paths):
        report.checks.append(identity_shift_check(d, order, idx, adjacent_identity_pairs(path)[0], dq))
    return _finish(report)


def build_mirror_report(source, arc, order, length_cap=None):
    d = load_dimer(source)
    dq = dual_dimer(d)
    sections = {}
    if order == 0:
        sections["classical"] = classical_mirror_object(dq, arc, length_cap).serialize().splitlines()
    mf = deformed_mirror_object(arc, d, order, length_cap=length_cap, dq=dq)
    sections["even"] = mf.even
    sections["odd"] = mf.odd
    sections["f"] = mf.f.serialize()
    sections["g"] = mf.g.serialize()
    sections["curvature_even"] = mf.curvature_even.serialize()
    sections["curvature_odd"] = mf.curvature_odd.serialize()
    return Report(command="mirror", dimer=d.name, order=order, sections=sections)


def build_centrality_report(source, order, length_cap=None):
    d = load_dimer(source)
    dq = dual_dimer(d)
    length_cap = length_cap if length_cap is not None else default_length_cap(dq, order)
    w = deformed_superpotential(d, order, dq)
    ell = deformed_potential(d, order, dq=dq)
    relations = [cyclic_derivative(w, arc) for arc in dq.arc_ids()]
    report = Report(command="centrality", dimer=d.name, order=order, sections={"length_cap": length_cap})
    if order == 0:
        failing = centrality_check(dq)
        report.checks.append(CheckResult(
            name="classical normal form", passed=not failing, detail=" ".join(failing),
        ))
    for arc in dq.arc_ids():
        x = NCPoly.from_word(dq.quiver, [arc], order=order)
        verdict = ideal_membership_truncated(mul(ell, x) - mul(x, ell), relations, order, length_cap)
        report.checks.append(CheckResult(name=f"[l_q, {arc}]", passed=verdict.status == "MEMBER", detail=verdict.status))
    return _finish(report)


def build_flatness_report(source, order, length_cap=None):
    d = load_dimer(source)
    dq = dual_dimer(d)
    length_cap = length_cap if length_cap is not None else max(len(f) for f in dq.faces)
    w = deformed_superpotential(d, order, dq)
    relations = [cyclic_derivative(w, arc) for arc in dq.arc_ids()]
    verdict = quasi_flat_check_truncated(relations, order, length_cap)
    report = Report(command="flatness", dimer=d.name, order=order, sections={
        "length_cap": length_cap,
        "verdict": verdict.status,
    })
    report.checks.append(CheckResult(
        name="quasi-flat", passed=verdict.status == "QUASI_FLAT", detail=verdict.witness or "",
    ))
    return _finish(report)


def build_polygons_report(source, order):
    d = load_dimer(source)
    polygons = enumerate_midpoint_polygons(d, order)
    report = Report(command="polygons", dimer=d.name, order=order, sections={
        "count": len(polygons),
        "polygons": polygon_dump(polygons).splitlines(),
    })
    bad = sign_law_check(polygons)
    report.checks.append(CheckResult(
        name="sign law", passed=not bad, detail="; ".join(p.serialize() for p in bad),
    ))
    return _finish(report)


def build_oracle_report(source, order, length_cap=None):
    d = load_dimer(source)
    report = Report(command="oracle", dimer=d.name, order=order)
    report.checks.extend(oracle_checks(d, order, length_cap=length_cap))
    return _finish(report)


def error_report(command, error):
    return Report(status="error", command=command, sections={
        "error": error.qualified_code,
        "message": error.message,
        **({"witness": json.dumps(error.witness, sort_keys=True)} if error.witness is not None else {}),
    })


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _run(ctx, command, builder, *args, **kwargs):
    fmt = ctx.obj["format"]
    started = time.time()
    logger.info(f"→ {command}")
    try:
        report = builder(*args, **kwargs)
    except DimerMirrorError as e:
        logger.error(f"✗ {command}: {e}")
        click.echo(render(error_report(command, e), fmt), nl=False)
        ctx.exit(exit_code_for(e))
    if ctx.obj["timing"]:
        report.timing["total"] = round(time.time() - started, 3)
    logger.info(f"✓ {command} finished with status {report.status} ({time.time() - started:.2f}s)")
    click.echo(render(report, fmt), nl=False)
    ctx.exit(EXIT_VIOLATION if report.status == "violation" else EXIT_OK)


def _order_option(func):
    return click.option("--order", "order", type=click.IntRange(min=0), default=None,
                        help="Truncation order N in the deformation parameters.")(func)


def _resolve_order(order):
    return order if order is not None else get_settings().default_order


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--timing", is_flag=True, help="Include wall-clock timings (breaks byte-identical output).")
@click.pass_context
def cli(ctx, fmt, timing):
    """Mirror symmetry computations for dimers."""
    setup_logging()
    ctx.ensure_object(dict)
    ctx.obj["format"] = fmt
    ctx.obj["timing"] = timing


@cli.command()
@click.argument("file")
@click.option("--depth", type=click.IntRange(min=1), default=8, show_default=True)
@click.pass_context
def validate(ctx, file, depth):
    """Parse a dimer and classify its geometric consistency."""
    _run(ctx, "validate", build_validate_report, file, depth)


@cli.command()
@click.argument("file")
@click.pass_context
def zigzag(ctx, file):
    """List the zigzag paths."""
    _run(ctx, "zigzag", build_zigzag_report, file)


@cli.command()
@click.argument("file")
@click.pass_context
def dual(ctx, file):
    """Print the mirror dimer."""
    _run(ctx, "dual", build_dual_report, file)


@cli.command()
@click.argument("file")
@click.pass_context
def superpotential(ctx, file):
    """Classical W and ℓ of the mirror."""
    _run(ctx, "superpotential", build_superpotential_report, file)


@cli.command()
@click.argument("file")
@click.option("--reduce", "element", required=True, help="Element of the mirror path algebra, e.g. '+1*[a b] -1*[b a]'.")
@click.option("--length-cap", type=click.IntRange(min=0), default=None)
@click.pass_context
def jacobi(ctx, file, element, length_cap):
    """Normal form in the Jacobi algebra of the mirror."""
    _run(ctx, "jacobi", build_jacobi_report, file, element, length_cap)


@cli.command()
@click.argument("file")
@_order_option
@click.option("--id-loc", "id_locs", multiple=True, help="Identity location path=arc, e.g. L1=a2 or 1=b1:L.")
@click.pass_context
def deform(ctx, file, order, id_locs):
    """Deformed W_q, ℓ_q and relations."""
    _run(ctx, "deform", build_deform_report, file, _resolve_order(order), parse_identity_locations(id_locs))


@cli.command()
@click.argument("file")
@click.option("--arc", required=True)
@_order_option
@click.option("--length-cap", type=click.IntRange(min=0), default=None)
@click.pass_context
def mirror(ctx, file, arc, order, length_cap):
    """Deformed mirror object F_q(a)."""
    _run(ctx, "mirror", build_mirror_report, file, arc, _resolve_order(order), length_cap)


@cli.command()
@click.argument("file")
@_order_option
@click.option("--length-cap", type=click.IntRange(min=0), default=None)
@click.pass_context
def centrality(ctx, file, order, length_cap):
    """Check that ℓ_q commutes with every arrow modulo the relations."""
    _run(ctx, "centrality", build_centrality_report, file, _resolve_order(order), length_cap)


@cli.command()
@click.argument("file")
@_order_option
@click.option("--length-cap", type=click.IntRange(min=0), default=None)
@click.pass_context
def flatness(ctx, file, order, length_cap):
    """Quasi-flatness of the deformed relation ideal."""
    _run(ctx, "flatness", build_flatness_report, file, _resolve_order(order), length_cap)


@cli.command()
@click.argument("file")
@_order_option
@click.pass_context
def polygons(ctx, file, order):
    """Dump the midpoint polygons up to the given order."""
    _run(ctx, "polygons", build_polygons_report, file, _resolve_order(order))


@cli.command()
@click.argument("file")
@_order_option
@click.option("--length-cap", type=click.IntRange(min=0), default=None)
@click.pass_context
def oracle(ctx, file, order, length_cap):
    """Cross-check the product-table construction against the polygon sums."""
    _run(ctx, "oracle", build_oracle_report, file, _resolve_order(order), length_cap)


@cli.command()
@click.argument("report_file", type=click.File("r"))
@click.pass_context
def reparse(ctx, report_file):
    """Read a report back and print it again in the chosen format."""
    text = report_file.read()
    report = parse_report(text)
    fmt = "json" if text.lstrip().startswith("{") else "text"
    same = render(report, fmt) == text
    click.echo(render(report, ctx.obj["format"]), nl=False)
    ctx.exit(EXIT_OK if same else EXIT_VIOLATION)


def main(argv=None):
    try:
        code = cli.main(args=argv, prog_name="dimer-mirror", standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    sys.exit(code or EXIT_OK)


if __name__ == "__main__":
    main()
