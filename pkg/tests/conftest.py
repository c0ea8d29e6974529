import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Acceptance tests print their own PASS line; print the FAIL twin here
    so every criterion always emits exactly one verdict line."""
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or report.passed:
        return
    match = _CRITERION.search(item.name)
    if match and "test_acceptance" in str(item.fspath):
        print(f"\nACCEPTANCE {match.group(1)}: FAIL — see traceback")
