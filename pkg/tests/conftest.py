import pytest

from felogit import load_csv, separated_panel_path


@pytest.fixture(scope="session")
def fixture_path():
    return separated_panel_path()


@pytest.fixture(scope="session")
def fixture_panel(fixture_path):
    return load_csv(fixture_path)
