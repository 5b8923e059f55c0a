"""The ten acceptance criteria, one line each, as run by ``vps selftest``."""

import pytest

from vps import selftest


@pytest.mark.parametrize("index", range(len(selftest.CRITERIA)), ids=[c[0] for c in selftest.CRITERIA])
def test_criterion(index):
    item = selftest.run_criterion(index)
    print(f"\n{item.status.upper():5} {item.name}  {item.detail}")
    assert item.status == "pass", item.witness


def test_selftest_command():
    report = selftest.run()
    for item in report.items:
        print(f"{item.status.upper():5} {item.name}")
    assert report.status == "pass"
    assert report.ms < 60_000
