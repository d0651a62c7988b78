import pytest


@pytest.fixture
def output_dir(tmp_path):
    """Temporary output directory for the demo runner."""
    return str(tmp_path)
