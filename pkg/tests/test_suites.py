from dataclasses import replace

import pytest

from config import Settings
from errors import QPrismError
from suites import SUITE_NAMES, SUITES, Failure, SuiteReport, run_suite, trial_seed, verify

SMALL = replace(Settings(), trials=2)


class TestRunner:
    def test_every_suite_is_registered(self):
        assert set(SUITE_NAMES) == set(SUITES)

    def test_trial_seed(self):
        assert trial_seed(0, 7) == 7
        assert trial_seed(2, 1) == 2_000_007

    def test_unknown_suite(self):
        with pytest.raises(QPrismError):
            run_suite("topology", SMALL)

    def test_report_shape(self):
        report = SuiteReport("x", {}, 3, [Failure(9, "b"), Failure(4, "a", {"k": 1})])
        assert not report.ok
        table = report.table()
        assert list(table.columns) == ["seed", "property", "payload"]
        assert len(table) == 2
        assert report.to_json()["ok"] is False

    def test_clean_report_has_empty_table(self):
        report = SuiteReport("x", {}, 1)
        assert report.ok
        assert report.table().empty


@pytest.mark.parametrize("name", SUITE_NAMES)
def test_small_suites_pass(name):
    report = run_suite(name, SMALL)
    assert report.trials == 2
    assert report.ok, report.table().to_string()


def test_trials_capped_by_suite():
    report = run_suite("crys", replace(SMALL, trials=500, pd_trunc=6))
    assert report.trials == SUITES["crys"][1]


def test_threads_do_not_change_the_outcome():
    seq = run_suite("complex", replace(SMALL, trials=3))
    par = run_suite("complex", replace(SMALL, trials=3, threads=3))
    assert [(f.seed, f.prop) for f in seq.failures] == [(f.seed, f.prop) for f in par.failures]


def test_verify_all_passes():
    report = verify("all", replace(SMALL, trials=1))
    assert report.suite == "all"
    assert report.trials == len(SUITE_NAMES)
    assert all("/" in f.prop for f in report.failures)
    assert report.ok, report.table().to_string()
