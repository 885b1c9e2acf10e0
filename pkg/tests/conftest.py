import pytest

from trolleybatch.instance import load_fixture
from trolleybatch.milp import BackendConfig, find_cbc


@pytest.fixture(scope="session")
def backend():
    if find_cbc() is None:
        pytest.skip("no CBC executable available")
    return BackendConfig.cbc()


@pytest.fixture
def worked():
    return load_fixture("worked_example.json")
