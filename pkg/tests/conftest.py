import pytest

from mrarc import kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # pay any jit compilation cost once, before timing-sensitive tests run
    kernels.warm_up()
