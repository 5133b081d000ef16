"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a single PASS/FAIL line (outside pytest's capture) followed by
the individual verdicts, and writes the suite's artefacts to a temporary folder.
"""

import json

import pytest

from fpme import checks
from fpme.analysis import report_json

CRITERIA = [
    (1, "linear-kernel"),
    (2, "exponent-law"),
    (3, "tails"),
    (4, "vss"),
    (5, "constants"),
    (6, "conservation"),
    (7, "attraction"),
    (8, "reflection"),
    (9, "eternal"),
    (10, "figures"),
]


@pytest.mark.slow
@pytest.mark.parametrize("number,suite", CRITERIA, ids=[s for _, s in CRITERIA])
def test_criterion(number, suite, tmp_path, capsys):
    result = checks.SUITES[suite]()
    for name, text in result.files.items():
        (tmp_path / name).write_text(text)
    body = json.loads(report_json(result.verdicts))
    assert body["checks"], f"suite {suite} produced no verdicts"
    failing = [v.name for v in result.verdicts if not v.passed]
    with capsys.disabled():
        status = "PASS" if result.passed else "FAIL"
        print(f"\n{status} criterion {number} ({suite}): {len(result.verdicts) - len(failing)}/{len(result.verdicts)} checks")
        for v in result.verdicts:
            print("    " + v.line())
    assert not failing, f"failing checks: {failing}"
