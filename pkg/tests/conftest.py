from pathlib import Path

import pytest

TOY_DIR = Path(__file__).parent / "data" / "toy"


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return TOY_DIR


@pytest.fixture(scope="session")
def toy_sequence() -> str:
    return "MKTAYIAKQRQI"
