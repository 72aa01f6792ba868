from fractions import Fraction

import pytest

from kronecker_triples.algebra import CrossedProductAlgebra, FoliationParams, TimeRegistry

# filled by test_acceptance: criterion number -> (passed, detail)
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def params():
    return FoliationParams(Fraction(3, 5), Fraction(4, 5))


@pytest.fixture(scope="session")
def alg(params):
    return CrossedProductAlgebra(params, TimeRegistry(("T1", "T2")))


@pytest.fixture(scope="session")
def numeric_params():
    return FoliationParams.pythagorean(1, 2, mode="numeric")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
