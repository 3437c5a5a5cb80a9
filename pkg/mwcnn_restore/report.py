# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""
Report generation functionality.

Renders self-check results, evaluation tables and ablation comparisons as
plain text or JSON-serializable dicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .ablation import AblationResult
    from .selfcheck import CheckResult


@dataclass
class ReportContext:
    """Context for generating self-check reports."""

    title: str = ""
    passed: bool = False
    results: list[CheckResult] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def _status(passed: bool) -> str:
    return "PASS" if passed else "FAIL"


def _format_db(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:.2f}"


def get_check_lines(results: list[CheckResult]) -> list[str]:
    """One ``STATUS name: detail`` line per check.

    Args:
        results (list[CheckResult]): Check outcomes in run order.

    Returns:
        list[str]: Plain-text lines.
    """
    return [f"{_status(r.passed)} {r.name}: {r.detail}" for r in results]


def report_text(rc: ReportContext, verbose: bool = False) -> str:
    """Generates the check-by-check result table in plain text.

    Args:
        rc (ReportContext): Information for generating the report.
        verbose (bool): If True, append per-check timing and case counts.

    Returns:
        str: Plain-text representation of the results.
    """
    report: list[str] = []

    if rc.errors:
        report.append("The self-check could not be completed.\n")
        report.append("The following error(s) were raised:\n")
        report.extend(rc.errors)
        return "\n".join(report)

    report.append(f"{rc.title} Results\n")
    report.append(f"All checks passed: {rc.passed}\n")
    if rc.results:
        report.append("Check                                          | Status")
        report.append("-------------------------------------------------------")
        for r in rc.results:
            report.append(f"{r.description:<46} | {_status(r.passed)}")
        report.append("")
        report.extend(get_check_lines(rc.results))

    if verbose:
        report.append("")
        for r in rc.results:
            report.append(f"{r.name}: {r.cases} case(s) in {r.seconds:.2f} s")

    return "\n".join(report)


def report_json(rc: ReportContext) -> dict[str, Any]:
    """Generates a JSON-serializable dict of the results."""
    return {
        "title": rc.title,
        "allPassed": rc.passed,
        "errors": list(rc.errors),
        "checks": [
            {
                "name": r.name,
                "description": r.description,
                "passed": r.passed,
                "cases": r.cases,
                "detail": r.detail,
                "worst": r.worst,
                "seconds": round(r.seconds, 3),
            }
            for r in rc.results
        ],
    }


def eval_table_text(rows: list[tuple[str, float, float]], border: int) -> str:
    """Tab-separated ``<file> <psnr_db> <ssim>`` table with a header comment.

    Args:
        rows (list[tuple[str, float, float]]): (file name, PSNR, SSIM), in
            output order.
        border (int): Pixels cropped from every side before scoring.

    Returns:
        str: The table, newline terminated.
    """
    lines = [f"# border crop {border} px; columns: file psnr_db ssim"]
    lines += [f"{name}\t{_format_db(p)}\t{s:.4f}" for name, p, s in rows]
    if rows:
        finite = [p for _, p, _ in rows if math.isfinite(p)]
        mean_psnr = sum(finite) / len(finite) if finite else math.inf
        mean_ssim = sum(s for _, _, s in rows) / len(rows)
        lines.append(f"# mean\t{_format_db(mean_psnr)}\t{mean_ssim:.4f}")
    return "\n".join(lines) + "\n"


def ablation_table_text(results: list[AblationResult]) -> str:
    """Fixed-width comparison of trained variants.

    Args:
        results (list[AblationResult]): One entry per trained variant.

    Returns:
        str: The table, newline terminated.
    """
    header = (
        f"{'variant':<16} {'levels':>6} {'convs':>5} {'params':>9} "
        f"{'rf':>7} {'holes':>5} {'noisy dB':>9} {'val dB':>8} {'gain':>6}"
    )
    lines = [header, "-" * len(header)]
    for r in results:
        rf = f"{r.rf_extent[0]}x{r.rf_extent[1]}"
        lines.append(
            f"{r.variant:<16} {r.levels:>6} {r.conv_layers:>5} {r.params:>9} "
            f"{rf:>7} {r.rf_holes:>5} {_format_db(r.noisy_psnr):>9} "
            f"{_format_db(r.val_psnr):>8} {r.gain:>+6.2f}"
        )
    return "\n".join(lines) + "\n"
