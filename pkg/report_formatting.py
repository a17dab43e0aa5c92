#!/usr/bin/env python3
"""
Report Formatting for Lagrange-Ops
Human text blocks, JSON record streams, pandas summaries and Markdown to HTML
"""

import html as html_module
import json
import re
from typing import Iterable, List, Sequence

import pandas as pd

from numeric_verify import RECORD_FIELDS, VerificationReport

RULE = "━" * 40

# Import markdown parser
try:
    import markdown
    markdown_available = True
except ImportError:
    markdown_available = False


def status_icon(report: VerificationReport) -> str:
    return "✅" if report.passed else "❌"


def format_report(report: VerificationReport) -> str:
    """One report as a titled key: value block."""
    title = report.equation or report.check
    lines = [f"{status_icon(report)} **{title}**: {report.check}", RULE]
    lines.extend(f"• {line}" for line in report.to_text().splitlines())
    return "\n".join(lines)


def format_section(title: str, body_lines: Iterable[str]) -> str:
    lines = [f"📋 **{title}**", RULE]
    lines.extend(f"• {line}" for line in body_lines)
    return "\n".join(lines)


def record_line(report: VerificationReport) -> str:
    """One machine record; field order fixed, no whitespace variation."""
    return json.dumps(report.to_record(), ensure_ascii=False, separators=(",", ":"))


def record_stream(reports: Sequence[VerificationReport]) -> str:
    return "".join(record_line(report) + "\n" for report in reports)


def reports_frame(reports: Sequence[VerificationReport]) -> pd.DataFrame:
    columns = list(RECORD_FIELDS) + ["equation"]
    rows = [dict(report.to_record(), equation=report.equation) for report in reports]
    return pd.DataFrame(rows, columns=columns)


def summary_table(reports: Sequence[VerificationReport]) -> str:
    """Compact per-check table with pass counts per equation."""
    if not reports:
        return "no checks were run"
    frame = reports_frame(reports)
    table = frame[["equation", "check", "status", "max_residual", "tolerance"]].copy()
    table["max_residual"] = table["max_residual"].map(lambda v: "aborted" if v is None or pd.isna(v) else f"{v:.3e}")
    table["tolerance"] = table["tolerance"].map(lambda v: f"{v:g}")
    by_equation = (
        frame.assign(passed=frame["status"] == "pass")
        .groupby("equation", sort=False)["passed"]
        .agg(passed="sum", total="count")
        .reset_index()
    )
    totals = [f"{row.equation}: {int(row.passed)}/{int(row.total)} passed" for row in by_equation.itertuples()]
    return table.to_string(index=False) + "\n\n" + "\n".join(totals)


def report_markdown(title: str, blocks: Sequence[str]) -> str:
    return "\n\n".join([f"# {title}"] + list(blocks))


def preprocess_report_text(text: str) -> str:
    """Turn bullet blocks into Markdown lists before conversion."""
    lines = text.split("\n")
    processed_lines: List[str] = []
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("• "):
            if processed_lines and processed_lines[-1].strip() != "" and not processed_lines[-1].strip().startswith("- "):
                processed_lines.append("")
            processed_lines.append(f"- {stripped[2:]}")
        else:
            processed_lines.append(line)
    return "\n".join(processed_lines).replace("━", "─")


def post_process_report_html(html: str) -> str:
    """Attach styling classes and turn rules into dividers."""
    html = html.replace("<h1>", '<h1 class="report-title">')
    html = html.replace("<ul>", '<ul class="report-fields">')
    html = html.replace("<strong>", '<strong class="report-check">')
    html = re.sub(r"<p>\s*─{20,}\s*</p>", '<div class="report-rule"></div>', html)
    html = re.sub(r"─{20,}", '<div class="report-rule"></div>', html)
    return html


def format_html_fallback(text: str) -> str:
    """Escaped text with line breaks when markdown is not installed."""
    escaped = html_module.escape(text).replace("\n", "<br>")
    escaped = re.sub(r"\*\*(.*?)\*\*", r"<strong>\1</strong>", escaped)
    escaped = re.sub(r"━{20,}", '<div class="report-rule"></div>', escaped)
    return f'<div class="report">{escaped}</div>'


def render_html(text: str) -> str:
    """Convert a Markdown report to an HTML fragment."""
    if not markdown_available:
        return format_html_fallback(text)
    md = markdown.Markdown(extensions=[
        "markdown.extensions.tables",
        "markdown.extensions.fenced_code",
        "markdown.extensions.sane_lists",
    ])
    return post_process_report_html(md.convert(preprocess_report_text(text)))
