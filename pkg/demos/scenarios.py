"""
Scenario files
==============

Every narrative above also exists as a plain-text scenario under
``scenarios/``. This script runs each one and prints the text report the
``relfacts run --format text`` command would produce.
"""

from pathlib import Path

from relfacts.report import to_text
from relfacts.scenario import interpret, parse

here = Path(__file__).resolve().parents[1] / "scenarios"
for path in sorted(here.glob("*.scn")):
    print("=" * 8, path.name)
    print(to_text(interpret(parse(path.read_text(encoding="utf-8")))))
