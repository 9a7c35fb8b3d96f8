import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CRITERIA = {
    1: "closed-form exactness, C = lambda I",
    2: "LP vs oracle agreement, 50 random 2D systems",
    3: "invariance and tightness certificates",
    4: "epsilon convergence of the perturbed LPs",
    5: "translation and scaling covariance",
    6: "3D icosphere smoke test",
    7: "Lyapunov norm machinery",
    8: "simplex vs basic-solution enumeration",
}
_outcomes = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    k = int(name.split("_")[2])
    if report.when == "call" or report.outcome != "passed":
        prev = _outcomes.get(k, "PASS")
        _outcomes[k] = "PASS" if (prev == "PASS" and report.outcome == "passed") else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        status = _outcomes.get(k, "NOT RUN")
        terminalreporter.write_line(f"criterion {k}: {status:7s} {CRITERIA[k]}")
