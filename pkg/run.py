#!/usr/bin/env python3
"""
Lagrange-Ops - Batch Runner
Runs every check on every shipped fixture and reports the outcome
"""

import io
import sys
import time
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def main() -> int:
    print("🚀 Lagrange-Ops fixture run")
    print("=" * 50)

    try:
        from lagrange_ops import RunFlags, load_problem, run
    except ImportError as e:
        print(f"❌ Error importing lagrange_ops: {e}")
        print("Make sure all dependencies are installed: pip install -r requirements.txt")
        return 2

    problems = sorted(FIXTURES.glob("*.txt"))
    if not problems:
        print(f"⚠️  No fixtures found in {FIXTURES}")
        return 2

    worst = 0
    started = time.perf_counter()
    for path in problems:
        begin = time.perf_counter()
        try:
            spec = load_problem(path)
        except Exception as e:
            print(f"❌ {path.name}: {e}")
            worst = max(worst, 2)
            continue
        code, reports = run("all", spec, RunFlags(json=True), out=io.StringIO())
        failed = [report for report in reports if not report.passed]
        elapsed = time.perf_counter() - begin
        icon = "✅" if code == 0 else "❌"
        print(f"{icon} {path.name}: {len(reports) - len(failed)}/{len(reports)} checks passed ({elapsed:.1f}s)")
        for report in failed:
            print(f"   • {report.equation}: {report.check} ({report.detail or report.max_residual})")
        worst = max(worst, code)

    print("=" * 50)
    print(f"⏱️  Total {time.perf_counter() - started:.1f}s")
    print("🎉 All fixtures verified!" if worst == 0 else "⚠️  Some checks failed, see above")
    return worst


if __name__ == "__main__":
    sys.exit(main())
