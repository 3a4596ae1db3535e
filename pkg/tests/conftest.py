import pytest

from atspp.instance import gap_instance


@pytest.fixture(scope="session")
def f1():
    return gap_instance(1)


@pytest.fixture(scope="session")
def f2():
    return gap_instance(2)


@pytest.fixture(scope="session")
def forced_path3():
    """3-vertex metric where the degree constraints force x(s->a) = x(a->t) = 1."""
    from atspp.instance import metric_completion

    return metric_completion(3, {(0, 1): 1.0, (1, 2): 2.0}, 0, 2)
