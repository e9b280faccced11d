import json
import subprocess
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource


def pytest_addoption(parser):
    parser.addoption("--hd-mmd", required=True, help="path to the hd-mmd executable")
    parser.addoption("--schemas", required=True, help="directory holding the *.schema.json files")


@pytest.fixture(scope="session")
def hd_mmd(request):
    exe = request.config.getoption("--hd-mmd")

    def run(*args, check=None):
        proc = subprocess.run([exe, *map(str, args)], capture_output=True, text=True, timeout=600)
        if check is not None:
            assert proc.returncode == check, proc.stderr
        return proc

    return run


@pytest.fixture(scope="session")
def validator(request):
    root = Path(request.config.getoption("--schemas"))
    schemas = {p.name.removesuffix(".schema.json"): json.loads(p.read_text()) for p in root.glob("*.schema.json")}
    registry = Registry().with_resources((s["$id"], Resource.from_contents(s)) for s in schemas.values())

    def validate(name, document):
        Draft202012Validator(schemas[name], registry=registry).validate(document)

    return validate


@pytest.fixture(scope="session")
def configs_dir():
    return Path(__file__).resolve().parents[2] / "configs"
