import json

import pytest

from phstab.model import preset_string


@pytest.fixture
def unit_string():
    """Unit string, rho = T = 1, with a damper of gain 1 at the right end."""
    return preset_string(k=1.0)


@pytest.fixture
def conservative_string():
    return preset_string(k=0.0)


@pytest.fixture
def write_config(tmp_path):
    def write(payload, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    return write
