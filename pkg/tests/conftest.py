import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wordbox.demo_assets import write_demo_assets  # noqa: E402
from wordbox.synthgen import GeneratorConfig, load_assets  # noqa: E402


@pytest.fixture(scope="session")
def asset_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("assets")
    write_demo_assets(d)
    return d


@pytest.fixture(scope="session")
def config_path(asset_dir):
    return asset_dir / "config.json"


@pytest.fixture
def gen_config(config_path):
    cfg = GeneratorConfig.from_json(config_path)
    cfg.seed = 42
    return cfg


@pytest.fixture(scope="session")
def font_path(asset_dir):
    return asset_dir / "fonts" / "DejaVuSans.ttf"


@pytest.fixture
def assets(gen_config):
    return load_assets(gen_config)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        print(line)
        request.config.acceptance_lines.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
