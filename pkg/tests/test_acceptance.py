"""Acceptance gate: one test and one printed verdict line per criterion, full sizes."""

import pytest

from tasep_entropy import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion, capsys):
    res = criterion(quick=False)
    with capsys.disabled():
        print("\n" + res.line())
        if not res.passed:
            for d in res.details:
                print(f"    {d}")
    assert res.passed, res.line()


def test_verify_quick_enumerates_criteria(capsys):
    from tasep_entropy.cli import run

    code = run(["verify", "--quick"])
    out = capsys.readouterr().out.splitlines()
    verdicts = [l for l in out if l.startswith(("[PASS]", "[FAIL]"))]
    assert len(verdicts) == len(acceptance.CRITERIA)
    for line in verdicts:
        assert "measured" in line and "tolerance" in line
    n_fail = sum(l.startswith("[FAIL]") for l in verdicts)
    assert code == (0 if n_fail == 0 else 2)
    assert out[-1] == f"{len(verdicts) - n_fail}/{len(verdicts)} criteria passed"
