import pytest

from modefuse.synthetic import make_synthetic_dataset


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """60-image black/bright dataset shared by harness and CLI tests."""
    root = tmp_path_factory.mktemp("synth_small")
    manifest = make_synthetic_dataset(root, k=60, seed=7, side=32)
    return manifest
