"""The verify command: exact audits and statistical comparisons."""

import functools
import logging
from pathlib import Path

import click

from mobile_maps.harness import (
    bijection_audit,
    centering_audit,
    chirality_control,
    eqdist_check,
    fdd_compare,
    gh_check,
    identities_check,
    law_corpus,
    run_parallel,
    sibling_dependent_law,
    snake_covariance_check,
)
from mobile_maps.laws import mobile_law
from mobile_maps.utils import (
    REPORT_FAILED_EXIT,
    emit_reports,
    parse_int_list,
    parse_weights,
    report_target,
    reported,
    solve_for,
)

_logger = logging.getLogger(__name__)

SUITES = ("eqdist", "centering", "bijection", "identities", "fdd", "snake-cov", "gh")
DEFAULT_SUITES = ("eqdist", "centering", "bijection", "gh")
FDD_LAWS = ("binary-shifted", "two-type", "geometric-like")


def _exact(report_fn):
    return lambda rng, seed: report_fn()


def _build_tasks(
    config, suites, max_vertices, k_values, max_edges, q_support, samples, mobile=None
):
    tasks = {}
    controls = {}
    alpha = config.get("stats.alpha")
    if "eqdist" in suites:
        for name, law in law_corpus().items():
            for k in k_values:
                check = functools.partial(eqdist_check, law, k, max_vertices)
                tasks[f"eqdist/{name}/k={k}"] = _exact(check)
                conditioned = functools.partial(
                    eqdist_check, law, k, max_vertices, exclude_root=True
                )
                tasks[f"eqdist/{name}/k={k}/no-root"] = _exact(conditioned)
    if "centering" in suites:
        tasks["centering"] = _exact(centering_audit)
    if "bijection" in suites:
        tasks["bijection"] = _exact(
            functools.partial(bijection_audit, max_edges, q_support)
        )
        controls["chirality"] = _exact(
            functools.partial(chirality_control, max_edges, q_support)
        )
    if "identities" in suites:
        tasks["identities"] = lambda rng, seed: identities_check(rng, seed=seed)
    if "fdd" in suites:
        corpus = law_corpus()
        for law in corpus.values():
            law.vertex_cap = config.get("vertex_cap")
        for name in FDD_LAWS:
            for k in k_values:
                tasks[f"fdd/{name}/k={k}"] = functools.partial(
                    _fdd, corpus[name], k, samples, alpha
                )
        if mobile is not None:
            for k in k_values:
                tasks[f"fdd/{mobile.name}/k={k}"] = functools.partial(
                    _fdd, mobile, k, samples, alpha
                )
        controls["sibling"] = functools.partial(
            _fdd, sibling_dependent_law(), 2, samples, alpha
        )
    if "snake-cov" in suites:
        tasks["snake-cov"] = lambda rng, seed: snake_covariance_check(rng, seed=seed)
    if "gh" in suites:
        tasks["gh"] = lambda rng, seed: gh_check(rng, seed=seed)
    return tasks, controls


def _fdd(law, k, samples, alpha, rng, seed):
    return fdd_compare(law, k, samples, rng, alpha=alpha, seed=seed)


@click.command()
@click.option(
    "--suite",
    "suites",
    multiple=True,
    type=click.Choice(SUITES),
    help="Suite to run (repeatable, default: eqdist, centering, bijection, gh)",
)
@click.option(
    "--max-vertices", type=int, help="Truncation of exact laws (default: from config)"
)
@click.option("--k", "k_text", default="1,2", help="Numbers of sampled vertices")
@click.option(
    "--max-edges", type=int, default=4, help="Largest maps for the bijection audit"
)
@click.option("--q-support", help="Allowed face degrees for the bijection audit")
@click.option(
    "--samples", type=int, default=500, help="Samples per statistical comparison"
)
@click.option("--q", "q_text", help="Face weights adding a mobile ensemble to fdd")
@click.option(
    "--n", "n_vertices", type=int, default=200, help="Map vertices of that ensemble"
)
@click.option("--seed", type=int, help="Random seed (default: from config)")
@click.option("--workers", type=int, default=1, help="Suites run in parallel")
@click.option(
    "--report", "report_path", type=click.Path(dir_okay=False, path_type=Path)
)
@reported
def verify(
    config,
    suites,
    max_vertices,
    k_text,
    max_edges,
    q_support,
    samples,
    q_text,
    n_vertices,
    seed,
    workers,
    report_path,
):
    """Run verification suites and print a pass/fail line per report.

    Negative controls run with their suites and are expected to fail; one
    that passes means the suite lost its power and fails the run.
    """
    suites = suites or DEFAULT_SUITES
    support = parse_int_list(q_support) if q_support else None
    mobile = None
    if q_text is not None:
        mobile = mobile_law(solve_for(config, parse_weights(q_text)), n_vertices)
    tasks, controls = _build_tasks(
        config,
        set(suites),
        config.resolve("max_vertices", max_vertices),
        parse_int_list(k_text),
        max_edges,
        support,
        samples,
        mobile,
    )
    seed = config.resolve("seed", seed)
    _logger.info("running %d suites and %d controls", len(tasks), len(controls))
    control_reports = run_parallel(controls, seed + 1, workers) if controls else []
    undetected = [r for r in control_reports if r.passed]
    for r in control_reports:
        mark = "🧪" if not r.passed else "⚠️ "
        status = "NOT detected" if r.passed else "detected"
        click.echo(f"{mark} control {r.name}: {status}")
    reports = run_parallel(tasks, seed, workers)
    report_path = report_target(config, report_path)
    if undetected:
        click.secho(
            f"❌ {len(undetected)} negative control(s) passed", fg="red", err=True
        )
    emit_reports(reports, report_path)
    if undetected:
        click.get_current_context().exit(REPORT_FAILED_EXIT)
