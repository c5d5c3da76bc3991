import pytest

ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

from oblivion.authsig import auth_keygen
from oblivion.fhe import DEFAULT_PARAMS, SMALL_PARAMS, keygen


@pytest.fixture(scope="session")
def toy_keys():
    return keygen(DEFAULT_PARAMS, 1, "toy")


@pytest.fixture(scope="session")
def small_keys():
    return keygen(SMALL_PARAMS, 1, "toy")


@pytest.fixture(scope="session")
def clear_keys():
    return keygen(None, 1, "clear")


@pytest.fixture(scope="session", params=["clear", "toy"])
def any_keys(request, clear_keys, small_keys):
    return clear_keys if request.param == "clear" else small_keys


@pytest.fixture(scope="session")
def alice_auth():
    return auth_keygen(101, "alice")


@pytest.fixture(scope="session")
def bob_auth():
    return auth_keygen(202, "bob")
