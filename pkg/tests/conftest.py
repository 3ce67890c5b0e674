import pytest

from fracsync import kernels

_BACKENDS = ["numpy"] + (["numba"] if kernels.NUMBA_ENABLED else [])


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # Pay the jit compile cost once, before any timed or parametrized test.
    kernels.warmup()


@pytest.fixture(params=_BACKENDS)
def backend(request):
    return request.param
